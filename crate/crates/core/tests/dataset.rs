use std::collections::BTreeMap;
use std::io::{self, BufRead};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use distill_core::dataset::{
    encode_row, execute, read_multi, CodecError, DatasetError, DatasetPlan, ExecMode, FileSink, ParsedLine, SourceFs,
    StdFs, VecSink, COMMIT_ID, RAW_ARITY,
};
use proptest::prelude::*;
use tempfile::TempDir;

fn row(commit: &str, value: &str) -> Vec<String> {
    let mut r: Vec<String> = (0..RAW_ARITY).map(|i| format!("v{i}")).collect();
    r[COMMIT_ID] = commit.to_string();
    r[10] = value.to_string();
    r
}

fn write(dir: &Path, name: &str, rows: &[Vec<String>]) -> PathBuf {
    let path = dir.join(name);
    let text: String = rows.iter().map(|r| encode_row(r).unwrap()).collect();
    std::fs::write(&path, text).unwrap();
    path
}

#[derive(Default)]
struct CountingFs {
    calls: AtomicUsize,
}

impl SourceFs for CountingFs {
    fn len(&self, path: &Path) -> io::Result<u64> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        StdFs.len(path)
    }

    fn open_at(&self, path: &Path, offset: u64) -> io::Result<Box<dyn BufRead + Send>> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        StdFs.open_at(path, offset)
    }
}

fn grouped_sizes(plan: &DatasetPlan, mode: ExecMode) -> Vec<(String, usize)> {
    let keyed = plan
        .clone()
        .group_by_column(COMMIT_ID)
        .map_values(|_, rows| Ok::<_, DatasetError>(rows.len()));
    let mut sink = VecSink::default();
    execute(&keyed, mode, &mut sink).unwrap();
    sink.items
}

#[test]
fn zero_paths_evaluate_to_nothing() {
    let plan = read_multi(Vec::<PathBuf>::new());
    let (rows, report) = plan.collect(ExecMode::Sequential).unwrap();
    assert!(rows.is_empty());
    assert_eq!(report.rows_read, 0);
    assert!(grouped_sizes(&plan, ExecMode::parallel(4)).is_empty());
}

#[test]
fn union_keeps_duplicates_and_order() {
    let dir = TempDir::new().unwrap();
    let a_rows = vec![row("c1", "x"), row("c1", "x"), row("c2", "y")];
    let b_rows = vec![row("c1", "x"), row("c3", "z"), row("c3", "z"), row("c4", "#%\n")];
    let a = write(dir.path(), "a.csv", &a_rows);
    let b = write(dir.path(), "b.csv", &b_rows);
    let plan = read_multi([&a, &b]);
    let (rows, _) = plan.collect(ExecMode::Sequential).unwrap();
    let oracle: Vec<Vec<String>> = a_rows.iter().chain(&b_rows).cloned().collect();
    assert_eq!(rows.iter().map(ParsedLine::to_vec).collect::<Vec<_>>(), oracle);
    let (par, _) = plan
        .collect(ExecMode::Parallel {
            workers: 3,
            partitions: Some(5),
        })
        .unwrap();
    assert_eq!(par, rows);

    let joined = read_multi([&a]).union(read_multi([&b])).unwrap();
    assert_eq!(joined.collect(ExecMode::Sequential).unwrap().0, rows);
}

#[test]
fn grouping_counts_rows_per_key() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "a.csv", &[row("k1", "a"), row("k1", "b"), row("k2", "c")]);
    let sizes = grouped_sizes(&read_multi([f]), ExecMode::Sequential);
    assert_eq!(sizes, vec![("k1".to_string(), 2), ("k2".to_string(), 1)]);
}

#[test]
fn map_and_filter_apply_before_grouping() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "a.csv", &[row("k1", "a"), row("k1", "b"), row("k2", "c")]);
    let plan = read_multi([f]).filter(|r| &r[10] != "b").map(|r| {
        let mut v = r.to_vec();
        v[COMMIT_ID] = v[COMMIT_ID].to_uppercase();
        ParsedLine::from_values(v)
    });
    let sizes = grouped_sizes(&plan, ExecMode::parallel(2));
    assert_eq!(sizes, vec![("K1".to_string(), 1), ("K2".to_string(), 1)]);
}

#[test]
fn building_plans_reads_nothing() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "a.csv", &[row("k1", "a"), row("k2", "b")]);
    let fs = Arc::new(CountingFs::default());
    let plan = DatasetPlan::read_with(fs.clone(), [f.clone(), f.clone()], RAW_ARITY)
        .map(|r| r)
        .filter(|_| true)
        .union(DatasetPlan::read_with(fs.clone(), [f], RAW_ARITY))
        .unwrap();
    let keyed = plan
        .clone()
        .group_by_column(COMMIT_ID)
        .map_values(|_, rows| Ok::<_, DatasetError>(rows.len()));
    let _also = keyed.clone();
    assert_eq!(fs.calls.load(Ordering::SeqCst), 0);

    let mut sink = VecSink::default();
    let report = execute(&keyed, ExecMode::Sequential, &mut sink).unwrap();
    assert!(fs.calls.load(Ordering::SeqCst) > 0);
    assert_eq!(report.rows_read, 6);
    assert_eq!(sink.items, vec![("k1".to_string(), 3), ("k2".to_string(), 3)]);
}

#[test]
fn union_requires_equal_width() {
    let a = read_multi(["a.csv"]);
    let b = DatasetPlan::read_with(Arc::new(StdFs), ["b.csv"], 5);
    assert!(matches!(
        a.union(b),
        Err(DatasetError::SchemaMismatch { left: 13, right: 5 })
    ));
}

#[test]
fn missing_file_is_reported_at_execution() {
    let plan = read_multi(["/nonexistent/dir/x.csv"]);
    for mode in [ExecMode::Sequential, ExecMode::parallel(2)] {
        let err = plan.collect(mode).unwrap_err();
        assert!(matches!(err, DatasetError::FileNotFound { .. }), "{err}");
        assert!(!err.is_data_error());
    }
}

#[test]
fn malformed_lines_name_file_and_line() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.csv");
    let mut text = String::new();
    text.push_str(&encode_row(&row("c1", "a")).unwrap());
    text.push_str(&encode_row(&row("c1", "b")).unwrap());
    text.push_str("only#twelve#columns#here#x#x#x#x#x#x#x#x\n");
    text.push_str(&encode_row(&row("c2", "c")).unwrap());
    std::fs::write(&path, &text).unwrap();

    for mode in [
        ExecMode::Sequential,
        ExecMode::Parallel {
            workers: 2,
            partitions: Some(3),
        },
        ExecMode::Parallel {
            workers: 4,
            partitions: Some(17),
        },
    ] {
        let err = read_multi([&path]).collect(mode).unwrap_err();
        match &err {
            DatasetError::Decode { line, source, .. } => {
                assert_eq!(*line, 3);
                assert_eq!(
                    *source,
                    CodecError::Arity {
                        expected: 13,
                        found: 12
                    }
                );
            }
            other => panic!("unexpected {other}"),
        }
        assert!(err.to_string().contains("bad.csv:3"));
        assert!(err.is_data_error());

        let (rows, report) = read_multi([&path]).skip_malformed(true).collect(mode).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(report.rows_skipped, 1);
    }
}

#[test]
fn missing_final_newline_and_crlf_are_accepted() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("x.csv");
    let a = encode_row(&row("c1", "a")).unwrap().replace('\n', "\r\n");
    let b = encode_row(&row("c2", "b")).unwrap();
    std::fs::write(&path, format!("{a}\n{}", b.trim_end())).unwrap();
    let (rows, _) = read_multi([&path]).collect(ExecMode::Sequential).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[1][10], "b");
}

#[test]
fn failing_value_function_removes_partial_output() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "a.csv", &[row("k1", "a"), row("k2", "b"), row("k3", "c")]);
    let out = dir.path().join("out.csv");
    let keyed = read_multi([f]).group_by_column(COMMIT_ID).map_values(|key, rows| {
        if key == "k2" || key == "k3" {
            Err(format!("cannot handle {}", rows.len()))
        } else {
            Ok(rows.len())
        }
    });
    for mode in [ExecMode::Sequential, ExecMode::parallel(3)] {
        let mut sink = FileSink::create(&out, Some(&["key", "n"]), |k: &str, n: &usize| {
            vec![k.to_string(), n.to_string()]
        })
        .unwrap();
        let err = execute(&keyed, mode, &mut sink).unwrap_err();
        assert!(
            matches!(&err, DatasetError::Function { key, .. } if key == "k2"),
            "{err}"
        );
        drop(sink);
        let leftovers: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(leftovers, vec![std::ffi::OsString::from("a.csv")]);
    }
}

#[test]
fn file_sink_writes_header_and_sorted_rows() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "a.csv", &[row("b", "1"), row("a", "2"), row("b", "3")]);
    let out = dir.path().join("out.csv");
    let keyed = read_multi([f])
        .group_by_column(COMMIT_ID)
        .map_values(|_, rows| Ok::<_, DatasetError>(rows.len()));
    let mut sink = FileSink::create(&out, Some(&["key", "n"]), |k: &str, n: &usize| {
        vec![k.to_string(), n.to_string()]
    })
    .unwrap();
    execute(&keyed, ExecMode::parallel(2), &mut sink).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "key#n\na#1\nb#2\n");

    let empty = write(dir.path(), "empty.csv", &[]);
    let keyed = read_multi([empty])
        .group_by_column(COMMIT_ID)
        .map_values(|_, rows| Ok::<_, DatasetError>(rows.len()));
    let mut sink = FileSink::create(&out, Some(&["key", "n"]), |k: &str, n: &usize| {
        vec![k.to_string(), n.to_string()]
    })
    .unwrap();
    let report = execute(&keyed, ExecMode::parallel(2), &mut sink).unwrap();
    assert_eq!(report.groups, 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "key#n\n");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grouping_is_conserving_and_partition_invariant(
        files in proptest::collection::vec(
            proptest::collection::vec(("[a-e]{1,2}", "[a-z#%\n]{0,5}"), 0..60),
            1..4,
        ),
        workers in 1usize..6,
        parts in proptest::option::of(1usize..20),
    ) {
        let dir = TempDir::new().unwrap();
        let paths: Vec<PathBuf> = files
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                let rows: Vec<Vec<String>> = rows.iter().map(|(k, v)| row(k, v)).collect();
                write(dir.path(), &format!("f{i}.csv"), &rows)
            })
            .collect();
        let plan = read_multi(&paths);
        let total: usize = files.iter().map(Vec::len).sum();

        let mut oracle: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (k, v) in files.iter().flatten() {
            oracle.entry(k.clone()).or_default().push(v.clone());
        }

        let keyed = plan.clone().group_by_column(COMMIT_ID).map_values(|_, rows| {
            let mut values: Vec<String> = rows.iter().map(|r| r[10].to_string()).collect();
            values.sort();
            Ok::<_, DatasetError>(values)
        });
        let mut seq = VecSink::default();
        execute(&keyed, ExecMode::Sequential, &mut seq).unwrap();
        let mut par = VecSink::default();
        let report = execute(&keyed, ExecMode::Parallel { workers, partitions: parts }, &mut par).unwrap();

        prop_assert_eq!(report.rows_read as usize, total);
        prop_assert_eq!(seq.items.iter().map(|(_, v)| v.len()).sum::<usize>(), total);
        let expected: Vec<(String, Vec<String>)> = oracle
            .into_iter()
            .map(|(k, mut v)| { v.sort(); (k, v) })
            .collect();
        prop_assert_eq!(&seq.items, &expected);
        prop_assert_eq!(&par.items, &expected);
    }
}
