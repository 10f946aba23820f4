//! Tree differencing: matching, edit scripts, and change classification.

mod matcher;
mod script;
mod taxonomy;
mod tree;

use std::fmt;

pub use matcher::{match_trees, Matching, DICE_THRESHOLD};
pub use script::{edit_script, EditKind, EditOperation, NodeRef};
pub use taxonomy::{classify, ChangeType, UnknownChangeType};

use crate::ast::{parse_source, AstNode, NodeKind, ParseError, SourceUnit};
use tree::FlatTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Before,
    After,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Before => "before",
            Side::After => "after",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DiffError {
    #[error("{path} ({side}): {error}")]
    Parse {
        side: Side,
        path: String,
        #[source]
        error: ParseError,
    },
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
}

/// One classified change of a file diff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedChange {
    pub change_type: ChangeType,
    pub entity_kind: NodeKind,
    /// Label of the changed node (the new label unless it was deleted).
    pub entity_name: String,
    /// Dot-separated path of the enclosing classes, methods and fields;
    /// method segments end in `()`.
    pub parent_path: String,
}

pub fn diff_sources(before: &SourceUnit, after: &SourceUnit) -> Result<Vec<ClassifiedChange>, DiffError> {
    let parse = |unit: &SourceUnit, side| {
        parse_source(unit).map_err(|error| DiffError::Parse {
            side,
            path: unit.path.clone(),
            error,
        })
    };
    let src = parse(before, Side::Before)?;
    let dst = parse(after, Side::After)?;
    Ok(diff_trees(&src, &dst))
}

/// Match, script and classify, dropping edits subsumed by an inserted or
/// deleted ancestor.
pub fn diff_trees(src: &AstNode, dst: &AstNode) -> Vec<ClassifiedChange> {
    let s = FlatTree::new(src);
    let d = FlatTree::new(dst);
    if s.kind(0) != d.kind(0) {
        return vec![];
    }
    let state = matcher::match_flat(&s, &d);
    let ops = script::script_flat(&s, &d, &state.src, &state.dst);
    ops.iter()
        .filter(|op| match (op.op, op.node) {
            (EditKind::Delete, NodeRef::Source(id)) => s.ancestors(id).all(|a| state.src[a].is_some()),
            (_, NodeRef::Target(id)) => d.ancestors(id).all(|a| state.dst[a].is_some()),
            (_, NodeRef::Source(id)) => {
                let partner = state.src[id].expect("non-delete edits of source nodes are matched");
                d.ancestors(partner).all(|a| state.dst[a].is_some())
            }
        })
        .map(|op| ClassifiedChange {
            change_type: classify(op),
            entity_kind: op.node_kind,
            entity_name: op.label().to_string(),
            parent_path: match op.op {
                EditKind::Delete => op.old_parent_path.clone(),
                _ => op.new_parent_path.clone(),
            }
            .unwrap_or_default(),
        })
        .collect()
}
