//! Commit-level aggregation of raw change rows and its author, project and
//! global roll-ups.

mod tests_stats;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::str::FromStr;

pub use tests_stats::{count_test_stats, is_test_case_name, TestStats};

use crate::dataset::{
    execute, DatasetError, DatasetPlan, ExecMode, ExecutionReport, FileSink, KeyedPlan, ParsedLine, VecSink,
    AUTHOR_EMAIL, AUTHOR_NAME, CHANGE_TYPE, COMMIT_ID, FILE_PATH, IS_TEST_FILE, PARENT_ID, PROJECT, TICKET_ID,
    TIMESTAMP,
};
use crate::diff::ChangeType;

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("unknown change type `{label}`")]
    UnknownChangeType { label: String },
    #[error("commit {commit}: rows disagree on {column} (`{first}` vs `{second}`)")]
    InconsistentGroup {
        commit: String,
        column: &'static str,
        first: String,
        second: String,
    },
    #[error("commit {commit}: bad {column} value `{value}`")]
    BadValue {
        commit: String,
        column: &'static str,
        value: String,
    },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

impl AnalyticsError {
    pub fn is_data_error(&self) -> bool {
        match self {
            AnalyticsError::Dataset(e) => e.is_data_error(),
            _ => true,
        }
    }
}

const N_TYPES: usize = ChangeType::ALL.len();

/// Change-type counts. Absent types count zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChangeTypeFrequencies {
    counts: [u64; N_TYPES],
}

impl Default for ChangeTypeFrequencies {
    fn default() -> Self {
        ChangeTypeFrequencies { counts: [0; N_TYPES] }
    }
}

impl ChangeTypeFrequencies {
    pub fn get(&self, t: ChangeType) -> u64 {
        self.counts[t.index()]
    }

    pub fn add(&mut self, t: ChangeType, n: u64) {
        self.counts[t.index()] += n;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Non-zero entries in taxonomy order.
    pub fn iter(&self) -> impl Iterator<Item = (ChangeType, u64)> + '_ {
        ChangeType::ALL
            .iter()
            .map(|&t| (t, self.get(t)))
            .filter(|&(_, n)| n > 0)
    }

    pub fn to_map(&self) -> BTreeMap<String, u64> {
        self.iter().map(|(t, n)| (t.name().to_string(), n)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
}

/// Projects rows to their change type, groups equal labels and counts each
/// group.
pub fn count_change_types<'a>(
    rows: impl IntoIterator<Item = &'a ParsedLine>,
) -> Result<ChangeTypeFrequencies, AnalyticsError> {
    let mut groups: HashMap<&str, u64> = HashMap::new();
    for label in rows.into_iter().map(|r| &r[CHANGE_TYPE]) {
        *groups.entry(label).or_default() += 1;
    }
    let mut freq = ChangeTypeFrequencies::default();
    for (label, n) in groups {
        let t = ChangeType::from_str(label).map_err(|_| AnalyticsError::UnknownChangeType {
            label: label.to_string(),
        })?;
        freq.add(t, n);
    }
    Ok(freq)
}

/// Names of the count columns shared by all aggregation levels.
pub fn count_columns() -> Vec<&'static str> {
    let mut cols: Vec<&'static str> = ChangeType::ALL.iter().map(|t| t.name()).collect();
    cols.extend([
        "numTestFiles",
        "numNonTestFiles",
        "testSuitesAdded",
        "testSuitesRemoved",
        "testSuitesModified",
        "testCasesAdded",
        "testCasesRemoved",
        "testCasesModified",
        "totalChanges",
    ]);
    cols
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitAggregate {
    pub project: String,
    pub commit_id: String,
    pub author_name: String,
    pub author_email: String,
    pub timestamp: i64,
    pub ticket_id: String,
    pub frequencies: ChangeTypeFrequencies,
    pub num_test_files: u64,
    pub num_non_test_files: u64,
    pub tests: TestStats,
    pub total_changes: u64,
}

impl CommitAggregate {
    pub const META_COLUMNS: [&'static str; 6] = [
        "project",
        "commitId",
        "authorName",
        "authorEmail",
        "timestamp",
        "ticketId",
    ];

    pub fn header() -> Vec<&'static str> {
        let mut h = Self::META_COLUMNS.to_vec();
        h.extend(count_columns());
        h
    }

    /// Values of [`count_columns`], in order.
    pub fn counts(&self) -> Vec<u64> {
        let mut v: Vec<u64> = ChangeType::ALL.iter().map(|&t| self.frequencies.get(t)).collect();
        let t = &self.tests;
        v.extend([
            self.num_test_files,
            self.num_non_test_files,
            t.suites_added,
            t.suites_removed,
            t.suites_modified,
            t.cases_added,
            t.cases_removed,
            t.cases_modified,
            self.total_changes,
        ]);
        v
    }

    pub fn to_fields(&self) -> Vec<String> {
        let mut f = vec![
            self.project.clone(),
            self.commit_id.clone(),
            self.author_name.clone(),
            self.author_email.clone(),
            self.timestamp.to_string(),
            self.ticket_id.clone(),
        ];
        f.extend(self.counts().into_iter().map(|n| n.to_string()));
        f
    }

    /// Aggregates the rows of one commit.
    pub fn from_rows(commit: &str, rows: &[ParsedLine]) -> Result<Self, AnalyticsError> {
        let first = rows.first();
        let meta = |col: usize, name: &'static str| -> Result<String, AnalyticsError> {
            let value = first.map(|r| r[col].to_string()).unwrap_or_default();
            if let Some(other) = rows.iter().find(|r| r[col] != *value) {
                return Err(AnalyticsError::InconsistentGroup {
                    commit: commit.to_string(),
                    column: name,
                    first: value,
                    second: other[col].to_string(),
                });
            }
            Ok(value)
        };
        let project = meta(PROJECT, "project")?;
        meta(PARENT_ID, "parentId")?;
        let author_name = meta(AUTHOR_NAME, "authorName")?;
        let author_email = meta(AUTHOR_EMAIL, "authorEmail")?;
        let ts = meta(TIMESTAMP, "timestamp")?;
        let ticket_id = meta(TICKET_ID, "ticketId")?;
        let timestamp = ts.parse::<i64>().map_err(|_| AnalyticsError::BadValue {
            commit: commit.to_string(),
            column: "timestamp",
            value: ts.clone(),
        })?;

        let mut files: BTreeMap<&str, bool> = BTreeMap::new();
        for r in rows {
            let test = parse_bool(&r[IS_TEST_FILE]).ok_or_else(|| AnalyticsError::BadValue {
                commit: commit.to_string(),
                column: "isTestFile",
                value: r[IS_TEST_FILE].to_string(),
            })?;
            if let Some(&seen) = files.get(&r[FILE_PATH]) {
                if seen != test {
                    return Err(AnalyticsError::InconsistentGroup {
                        commit: commit.to_string(),
                        column: "isTestFile",
                        first: seen.to_string(),
                        second: test.to_string(),
                    });
                }
            }
            files.insert(&r[FILE_PATH], test);
        }
        let num_test_files = files.values().filter(|&&t| t).count() as u64;

        let frequencies = count_change_types(rows)?;
        Ok(CommitAggregate {
            project,
            commit_id: commit.to_string(),
            author_name,
            author_email,
            timestamp,
            ticket_id,
            total_changes: frequencies.total(),
            frequencies,
            num_test_files,
            num_non_test_files: files.len() as u64 - num_test_files,
            tests: count_test_stats(rows),
        })
    }
}

pub(crate) fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

/// Groups raw rows by commit id and aggregates each group.
pub fn commit_plan(plan: DatasetPlan) -> KeyedPlan<CommitAggregate> {
    plan.group_by_column(COMMIT_ID)
        .map_values(|commit, rows| CommitAggregate::from_rows(commit, &rows))
}

/// Writes one aggregate row per commit, sorted by commit id, under a
/// header line.
pub fn per_commit(plan: DatasetPlan, out: &Path, mode: ExecMode) -> Result<ExecutionReport, AnalyticsError> {
    let header = CommitAggregate::header();
    let mut sink = FileSink::create(out, Some(&header), |_: &str, a: &CommitAggregate| a.to_fields())?;
    execute(&commit_plan(plan), mode, &mut sink).map_err(unwrap_function_error)
}

/// Commit aggregates in commit id order.
pub fn commit_aggregates(
    plan: DatasetPlan,
    mode: ExecMode,
) -> Result<(Vec<CommitAggregate>, ExecutionReport), AnalyticsError> {
    let mut sink = VecSink::default();
    let report = execute(&commit_plan(plan), mode, &mut sink).map_err(unwrap_function_error)?;
    Ok((sink.items.into_iter().map(|(_, a)| a).collect(), report))
}

/// Surfaces analytics errors raised inside the executor as themselves.
fn unwrap_function_error(e: DatasetError) -> AnalyticsError {
    match e {
        DatasetError::Function { key, source } => match source.downcast::<AnalyticsError>() {
            Ok(inner) => *inner,
            Err(source) => AnalyticsError::Dataset(DatasetError::Function { key, source }),
        },
        other => AnalyticsError::Dataset(other),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Commit,
    Author,
    Project,
    Global,
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "commit" => Ok(Level::Commit),
            "author" => Ok(Level::Author),
            "project" => Ok(Level::Project),
            "global" => Ok(Level::Global),
            _ => Err(format!(
                "unknown level `{s}` (expected commit, author, project or global)"
            )),
        }
    }
}

/// Summed counts over a set of commits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RollUp {
    /// Author email or project name; `None` for the global roll-up.
    pub key: Option<String>,
    pub num_commits: u64,
    /// Values of [`count_columns`], in order.
    pub counts: Vec<u64>,
}

impl RollUp {
    fn new(key: Option<String>) -> Self {
        RollUp {
            key,
            num_commits: 0,
            counts: vec![0; count_columns().len()],
        }
    }

    fn add(&mut self, a: &CommitAggregate) {
        self.num_commits += 1;
        for (acc, n) in self.counts.iter_mut().zip(a.counts()) {
            *acc += n;
        }
    }

    pub fn header(key_column: Option<&'static str>) -> Vec<&'static str> {
        let mut h: Vec<&'static str> = key_column.into_iter().collect();
        h.push("numCommits");
        h.extend(count_columns());
        h
    }

    pub fn to_fields(&self) -> Vec<String> {
        let mut f: Vec<String> = self.key.iter().cloned().collect();
        f.push(self.num_commits.to_string());
        f.extend(self.counts.iter().map(u64::to_string));
        f
    }
}

fn roll_up_by(aggregates: &[CommitAggregate], key: impl Fn(&CommitAggregate) -> &str) -> Vec<RollUp> {
    let mut groups: BTreeMap<&str, RollUp> = BTreeMap::new();
    for a in aggregates {
        let k = key(a);
        groups
            .entry(k)
            .or_insert_with(|| RollUp::new(Some(k.to_string())))
            .add(a);
    }
    groups.into_values().collect()
}

/// One row per author email, sorted.
pub fn per_author(aggregates: &[CommitAggregate]) -> Vec<RollUp> {
    roll_up_by(aggregates, |a| &a.author_email)
}

/// One row per project, sorted.
pub fn per_project(aggregates: &[CommitAggregate]) -> Vec<RollUp> {
    roll_up_by(aggregates, |a| &a.project)
}

pub fn global_stats(aggregates: &[CommitAggregate]) -> RollUp {
    let mut g = RollUp::new(None);
    for a in aggregates {
        g.add(a);
    }
    g
}

/// Runs the requested aggregation level over `plan` and writes it to `out`.
pub fn aggregate_to_file(
    plan: DatasetPlan,
    level: Level,
    out: &Path,
    mode: ExecMode,
) -> Result<ExecutionReport, AnalyticsError> {
    if level == Level::Commit {
        return per_commit(plan, out, mode);
    }
    let (aggregates, report) = commit_aggregates(plan, mode)?;
    let (key_column, rows) = match level {
        Level::Author => (Some("authorEmail"), per_author(&aggregates)),
        Level::Project => (Some("project"), per_project(&aggregates)),
        _ => (None, vec![global_stats(&aggregates)]),
    };
    let header = RollUp::header(key_column);
    let mut sink = FileSink::create(out, Some(&header), |_: &str, r: &RollUp| r.to_fields())?;
    use crate::dataset::Sink;
    for r in rows {
        sink.accept("", r)?;
    }
    sink.finish()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::RAW_ARITY;

    fn row(commit: &str, file: &str, test: bool, ct: &str, kind: &str, name: &str, parent: &str) -> ParsedLine {
        let mut v: Vec<String> = vec![String::new(); RAW_ARITY];
        v[PROJECT] = "p".into();
        v[COMMIT_ID] = commit.into();
        v[PARENT_ID] = "0".repeat(40);
        v[AUTHOR_NAME] = "Ann".into();
        v[AUTHOR_EMAIL] = "ann@x.org".into();
        v[TIMESTAMP] = "1700000000".into();
        v[FILE_PATH] = file.into();
        v[IS_TEST_FILE] = test.to_string();
        v[CHANGE_TYPE] = ct.into();
        v[9] = kind.into();
        v[10] = name.into();
        v[11] = parent.into();
        v[TICKET_ID] = "T-1".into();
        ParsedLine::from_values(v)
    }

    #[test]
    fn four_row_commit_frequencies() {
        let rows: Vec<ParsedLine> = ["PARAMETER_INSERT", "DOC_DELETE", "PARAMETER_INSERT", "PARAMETER_INSERT"]
            .iter()
            .map(|ct| row("1a2b3c", "A.java", false, ct, "PARAMETER", "x:int", "A.m()"))
            .collect();
        let freq = count_change_types(&rows).unwrap();
        let expected: BTreeMap<String, u64> =
            [("PARAMETER_INSERT".to_string(), 3), ("DOC_DELETE".to_string(), 1)].into();
        assert_eq!(freq.to_map(), expected);
        let agg = CommitAggregate::from_rows("1a2b3c", &rows).unwrap();
        assert_eq!(agg.total_changes, 4);
        assert_eq!(agg.num_non_test_files, 1);
        assert_eq!(agg.num_test_files, 0);
        assert!(count_change_types(&[]).unwrap().is_empty());
    }

    #[test]
    fn unknown_labels_are_rejected() {
        let rows = vec![row("c", "A.java", false, "PARAMETER_INSERTED", "PARAMETER", "x", "")];
        assert!(matches!(
            count_change_types(&rows),
            Err(AnalyticsError::UnknownChangeType { label }) if label == "PARAMETER_INSERTED"
        ));
    }

    #[test]
    fn inconsistent_metadata_is_an_error() {
        let a = row("c", "A.java", false, "STATEMENT_INSERT", "STATEMENT", "x;", "A.m()");
        let mut v = a.to_vec();
        v[AUTHOR_EMAIL] = "bob@x.org".into();
        let b = ParsedLine::from_values(v);
        let err = CommitAggregate::from_rows("c", &[a.clone(), b]).unwrap_err();
        assert!(matches!(
            err,
            AnalyticsError::InconsistentGroup {
                column: "authorEmail",
                ..
            }
        ));

        let mut v = a.to_vec();
        v[IS_TEST_FILE] = "yes".into();
        let err = CommitAggregate::from_rows("c", &[ParsedLine::from_values(v)]).unwrap_err();
        assert!(matches!(
            err,
            AnalyticsError::BadValue {
                column: "isTestFile",
                ..
            }
        ));
    }

    #[test]
    fn files_are_counted_once_each() {
        let rows = vec![
            row("c", "src/A.java", false, "STATEMENT_INSERT", "STATEMENT", "a;", "A.m()"),
            row("c", "src/A.java", false, "STATEMENT_DELETE", "STATEMENT", "b;", "A.m()"),
            row(
                "c",
                "src/test/ATest.java",
                true,
                "STATEMENT_INSERT",
                "STATEMENT",
                "c;",
                "ATest.testA()",
            ),
            row("c", "src/B.java", false, "DOC_INSERT", "DOC_COMMENT", "d", "B"),
        ];
        let agg = CommitAggregate::from_rows("c", &rows).unwrap();
        assert_eq!((agg.num_test_files, agg.num_non_test_files), (1, 2));
        assert_eq!(agg.total_changes, 4);
        assert_eq!(agg.to_fields().len(), CommitAggregate::header().len());
    }

    #[test]
    fn roll_ups_sum_columns() {
        let a = CommitAggregate::from_rows(
            "c1",
            &[row(
                "c1",
                "A.java",
                false,
                "STATEMENT_INSERT",
                "STATEMENT",
                "a;",
                "A.m()",
            )],
        )
        .unwrap();
        let mut b = CommitAggregate::from_rows(
            "c2",
            &[
                row("c2", "A.java", false, "STATEMENT_INSERT", "STATEMENT", "a;", "A.m()"),
                row("c2", "A.java", false, "DOC_DELETE", "DOC_COMMENT", "d", "A"),
            ],
        )
        .unwrap();
        let single = per_author(std::slice::from_ref(&a));
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].num_commits, 1);
        assert_eq!(single[0].counts, a.counts());

        let both = per_author(&[a.clone(), b.clone()]);
        assert_eq!(both.len(), 1);
        let sum: Vec<u64> = a.counts().iter().zip(b.counts()).map(|(x, y)| x + y).collect();
        assert_eq!(both[0].counts, sum);

        b.author_email = "bob@x.org".into();
        b.project = "q".into();
        let authors = per_author(&[a.clone(), b.clone()]);
        assert_eq!(
            authors.iter().map(|r| r.key.clone().unwrap()).collect::<Vec<_>>(),
            ["ann@x.org", "bob@x.org"]
        );
        let g = global_stats(&[a.clone(), b.clone()]);
        assert_eq!(g.counts, sum);
        assert_eq!(g.num_commits, 2);
        assert_eq!(g.to_fields().len(), RollUp::header(None).len());
        assert_eq!(per_project(&[a, b]).len(), 2);
    }
}
