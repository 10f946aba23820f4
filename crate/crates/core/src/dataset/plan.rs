use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use super::fs::{SourceFs, StdFs};
use super::{DatasetError, ParsedLine, RAW_ARITY};

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

pub(crate) type MapFn = Arc<dyn Fn(ParsedLine) -> ParsedLine + Send + Sync>;
pub(crate) type FilterFn = Arc<dyn Fn(&ParsedLine) -> bool + Send + Sync>;
pub(crate) type KeyFn = Arc<dyn Fn(&ParsedLine) -> String + Send + Sync>;
pub(crate) type ValueFn<V> = Arc<dyn Fn(&str, Vec<ParsedLine>) -> Result<V, BoxError> + Send + Sync>;

#[derive(Clone)]
pub(crate) enum RowOp {
    Map(MapFn),
    Filter(FilterFn),
}

#[derive(Clone)]
pub(crate) struct Input {
    pub path: PathBuf,
    /// Width rows from this file are decoded with.
    pub arity: usize,
    pub ops: Arc<Vec<RowOp>>,
}

/// Lazy description of a row dataset: source files plus a chain of row
/// transformations. Building and combining plans never reads input.
#[derive(Clone)]
pub struct DatasetPlan {
    pub(crate) inputs: Vec<Input>,
    /// Width of the rows the plan produces.
    pub(crate) arity: usize,
    pub(crate) fs: Arc<dyn SourceFs>,
    pub(crate) skip_malformed: bool,
}

impl fmt::Debug for DatasetPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DatasetPlan")
            .field("sources", &self.sources())
            .field("arity", &self.arity)
            .field("skip_malformed", &self.skip_malformed)
            .finish()
    }
}

/// Plan over the union of raw dataset files.
pub fn read_multi<P: Into<PathBuf>>(paths: impl IntoIterator<Item = P>) -> DatasetPlan {
    DatasetPlan::read_with(Arc::new(StdFs), paths, RAW_ARITY)
}

impl DatasetPlan {
    /// Plan over files of `arity`-column rows read through `fs`.
    pub fn read_with<P: Into<PathBuf>>(
        fs: Arc<dyn SourceFs>,
        paths: impl IntoIterator<Item = P>,
        arity: usize,
    ) -> Self {
        let ops = Arc::new(Vec::new());
        DatasetPlan {
            inputs: paths
                .into_iter()
                .map(|p| Input {
                    path: p.into(),
                    arity,
                    ops: Arc::clone(&ops),
                })
                .collect(),
            arity,
            fs,
            skip_malformed: false,
        }
    }

    pub fn sources(&self) -> Vec<PathBuf> {
        self.inputs.iter().map(|i| i.path.clone()).collect()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Count and drop undecodable lines instead of failing.
    pub fn skip_malformed(mut self, skip: bool) -> Self {
        self.skip_malformed = skip;
        self
    }

    fn push(mut self, op: RowOp) -> Self {
        for input in &mut self.inputs {
            let mut ops = input.ops.as_ref().clone();
            ops.push(op.clone());
            input.ops = Arc::new(ops);
        }
        self
    }

    /// Row-wise transformation producing rows of the same width.
    pub fn map(self, f: impl Fn(ParsedLine) -> ParsedLine + Send + Sync + 'static) -> Self {
        self.push(RowOp::Map(Arc::new(f)))
    }

    /// Row-wise transformation producing rows of `arity` columns.
    pub fn map_to(self, arity: usize, f: impl Fn(ParsedLine) -> ParsedLine + Send + Sync + 'static) -> Self {
        let mut plan = self.push(RowOp::Map(Arc::new(f)));
        plan.arity = arity;
        plan
    }

    pub fn filter(self, f: impl Fn(&ParsedLine) -> bool + Send + Sync + 'static) -> Self {
        self.push(RowOp::Filter(Arc::new(f)))
    }

    /// Multiset union. Both plans must produce rows of the same width; the
    /// filesystem and malformed-line policy of `self` are kept.
    pub fn union(mut self, other: DatasetPlan) -> Result<Self, DatasetError> {
        if self.arity != other.arity {
            return Err(DatasetError::SchemaMismatch {
                left: self.arity,
                right: other.arity,
            });
        }
        self.inputs.extend(other.inputs);
        Ok(self)
    }

    pub fn group_by_key(self, key: impl Fn(&ParsedLine) -> String + Send + Sync + 'static) -> GroupedPlan {
        GroupedPlan {
            base: self,
            key: Arc::new(key),
        }
    }

    /// Groups by the value of one column.
    pub fn group_by_column(self, column: usize) -> GroupedPlan {
        self.group_by_key(move |row| row.get(column).unwrap_or_default().to_string())
    }
}

/// Rows grouped by a key. Group-internal order follows input order but
/// callers should not depend on it.
#[derive(Clone)]
pub struct GroupedPlan {
    pub(crate) base: DatasetPlan,
    pub(crate) key: KeyFn,
}

impl GroupedPlan {
    pub fn map_values<V, E>(
        self,
        f: impl Fn(&str, Vec<ParsedLine>) -> Result<V, E> + Send + Sync + 'static,
    ) -> KeyedPlan<V>
    where
        E: Into<BoxError>,
    {
        KeyedPlan {
            grouped: self,
            value: Arc::new(move |k, rows| f(k, rows).map_err(Into::into)),
        }
    }

    /// Keeps every group's rows as its value.
    pub fn groups(self) -> KeyedPlan<Vec<ParsedLine>> {
        self.map_values(|_, rows| Ok::<_, BoxError>(rows))
    }
}

/// One value per distinct key.
#[derive(Clone)]
pub struct KeyedPlan<V> {
    pub(crate) grouped: GroupedPlan,
    pub(crate) value: ValueFn<V>,
}
