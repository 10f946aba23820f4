use std::collections::hash_map::{DefaultHasher, Entry};
use std::collections::HashMap;
use std::fs::File;
use std::hash::{Hash, Hasher};
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::codec::{decode_fields, encode_fields};
use super::plan::{DatasetPlan, Input, KeyedPlan, RowOp};
use super::{DatasetError, ParsedLine};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// One pass over the inputs in the calling thread.
    Sequential,
    /// A pool of `workers` threads over line-aligned byte ranges. Without a
    /// forced `partitions` count, four ranges per worker are used.
    Parallel { workers: usize, partitions: Option<usize> },
}

impl ExecMode {
    pub fn parallel(workers: usize) -> Self {
        ExecMode::Parallel {
            workers,
            partitions: None,
        }
    }

    pub fn workers(self) -> usize {
        match self {
            ExecMode::Sequential => 1,
            ExecMode::Parallel { workers, .. } => workers.max(1),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExecutionReport {
    pub rows_read: u64,
    pub rows_skipped: u64,
    pub groups: u64,
    pub partitions: usize,
    pub workers: usize,
    pub wall_time: Duration,
}

/// Receives the output of an execution in key order.
pub trait Sink<V> {
    fn accept(&mut self, key: &str, value: V) -> Result<(), DatasetError>;

    fn finish(&mut self) -> Result<(), DatasetError> {
        Ok(())
    }

    /// Called instead of `finish` when execution fails.
    fn abort(&mut self) {}
}

#[derive(Debug)]
pub struct VecSink<V> {
    pub items: Vec<(String, V)>,
}

impl<V> Default for VecSink<V> {
    fn default() -> Self {
        VecSink { items: Vec::new() }
    }
}

impl<V> Sink<V> for VecSink<V> {
    fn accept(&mut self, key: &str, value: V) -> Result<(), DatasetError> {
        self.items.push((key.to_string(), value));
        Ok(())
    }
}

type Formatter<V> = Box<dyn Fn(&str, &V) -> Vec<String>>;

/// Writes encoded rows to a temporary file next to `path` and renames it
/// into place on `finish`. The temporary file is removed if the sink is
/// aborted or dropped unfinished.
pub struct FileSink<V> {
    path: PathBuf,
    tmp: PathBuf,
    writer: Option<BufWriter<File>>,
    format: Formatter<V>,
}

impl<V> FileSink<V> {
    pub fn create(
        path: impl Into<PathBuf>,
        header: Option<&[&str]>,
        format: impl Fn(&str, &V) -> Vec<String> + 'static,
    ) -> Result<Self, DatasetError> {
        let path = path.into();
        let tmp = temp_path(&path);
        let file = File::create(&tmp).map_err(|e| DatasetError::io(&tmp, e))?;
        let mut sink = FileSink {
            path,
            tmp,
            writer: Some(BufWriter::with_capacity(1 << 16, file)),
            format: Box::new(format),
        };
        if let Some(header) = header {
            sink.write_line(&encode_fields(header))?;
        }
        Ok(sink)
    }

    fn write_line(&mut self, line: &str) -> Result<(), DatasetError> {
        let writer = self.writer.as_mut().expect("sink is open");
        writer
            .write_all(line.as_bytes())
            .map_err(|e| DatasetError::io(&self.tmp, e))
    }
}

pub(crate) fn temp_path(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}

impl<V> Sink<V> for FileSink<V> {
    fn accept(&mut self, key: &str, value: V) -> Result<(), DatasetError> {
        let fields = (self.format)(key, &value);
        self.write_line(&encode_fields(&fields))
    }

    fn finish(&mut self) -> Result<(), DatasetError> {
        let Some(writer) = self.writer.take() else {
            return Ok(());
        };
        let file = writer
            .into_inner()
            .map_err(|e| DatasetError::io(&self.tmp, e.into_error()))?;
        file.sync_all().map_err(|e| DatasetError::io(&self.tmp, e))?;
        drop(file);
        std::fs::rename(&self.tmp, &self.path).map_err(|e| DatasetError::io(&self.path, e))
    }

    fn abort(&mut self) {
        if self.writer.take().is_some() {
            let _ = std::fs::remove_file(&self.tmp);
        }
    }
}

impl<V> Drop for FileSink<V> {
    fn drop(&mut self) {
        self.abort();
    }
}

struct Partition {
    input: usize,
    start: u64,
    end: u64,
}

#[derive(Default)]
struct Counts {
    read: u64,
    skipped: u64,
}

/// Runs a keyed plan and feeds `(key, value)` pairs to `sink` sorted by key.
/// The output depends only on the input contents, not on `mode`.
pub fn execute<V: Send>(
    plan: &KeyedPlan<V>,
    mode: ExecMode,
    sink: &mut dyn Sink<V>,
) -> Result<ExecutionReport, DatasetError> {
    let result = run_keyed(plan, mode).and_then(|(items, report)| {
        for (key, value) in items {
            sink.accept(&key, value)?;
        }
        sink.finish()?;
        Ok(report)
    });
    if result.is_err() {
        sink.abort();
    }
    result
}

/// Rows grouped by key, one map per shard.
type ShardMaps = Vec<HashMap<String, Vec<ParsedLine>>>;

fn run_keyed<V: Send>(
    plan: &KeyedPlan<V>,
    mode: ExecMode,
) -> Result<(Vec<(String, V)>, ExecutionReport), DatasetError> {
    let started = Instant::now();
    let base = &plan.grouped.base;
    let key_fn = &plan.grouped.key;
    let value_fn = &plan.value;
    let partitions = partitions(base, mode)?;
    let workers = mode.workers();
    let shards = if workers == 1 { 1 } else { workers * 4 };

    let group_partition = |p: &Partition| -> Result<(ShardMaps, Counts), DatasetError> {
        let mut maps: ShardMaps = (0..shards).map(|_| HashMap::new()).collect();
        let counts = read_partition(base, p, |row| {
            let key = key_fn(&row);
            let shard = shard_of(&key, shards);
            maps[shard].entry(key).or_default().push(row);
        })?;
        Ok((maps, counts))
    };
    let merge_shard = |parts: Vec<HashMap<String, Vec<ParsedLine>>>| -> Vec<Result<(String, V), DatasetError>> {
        let mut merged: HashMap<String, Vec<ParsedLine>> = HashMap::new();
        for part in parts {
            for (key, rows) in part {
                match merged.entry(key) {
                    Entry::Vacant(e) => {
                        e.insert(rows);
                    }
                    Entry::Occupied(mut e) => e.get_mut().extend(rows),
                }
            }
        }
        merged
            .into_iter()
            .map(|(key, rows)| match value_fn(&key, rows) {
                Ok(v) => Ok((key, v)),
                Err(source) => Err(DatasetError::Function { key, source }),
            })
            .collect()
    };

    let (grouped, results) = match mode {
        ExecMode::Sequential => {
            let grouped: Vec<_> = partitions.iter().map(group_partition).collect();
            let (parts, counts) = first_error(grouped)?;
            let results = merge_shard(transpose(parts, shards).pop().unwrap_or_default());
            (counts, results)
        }
        ExecMode::Parallel { .. } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| DatasetError::Pool(e.to_string()))?;
            pool.install(|| -> Result<_, DatasetError> {
                let grouped: Vec<_> = partitions.par_iter().map(group_partition).collect();
                let (parts, counts) = first_error(grouped)?;
                let results: Vec<_> = transpose(parts, shards)
                    .into_par_iter()
                    .flat_map_iter(merge_shard)
                    .collect();
                Ok((counts, results))
            })?
        }
    };

    let mut items = Vec::with_capacity(results.len());
    let mut failure: Option<DatasetError> = None;
    for r in results {
        match r {
            Ok(item) => items.push(item),
            // Report the failing group with the smallest key so that the
            // error does not depend on scheduling.
            Err(e) => {
                let replace = match (&failure, &e) {
                    (None, _) => true,
                    (Some(DatasetError::Function { key: old, .. }), DatasetError::Function { key, .. }) => key < old,
                    _ => false,
                };
                if replace {
                    failure = Some(e);
                }
            }
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    if matches!(mode, ExecMode::Parallel { .. }) {
        items.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));
    } else {
        items.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    }
    let report = ExecutionReport {
        rows_read: grouped.read,
        rows_skipped: grouped.skipped,
        groups: items.len() as u64,
        partitions: partitions.len(),
        workers,
        wall_time: started.elapsed(),
    };
    Ok((items, report))
}

impl DatasetPlan {
    /// Evaluates the plan to its rows, in input order.
    pub fn collect(&self, mode: ExecMode) -> Result<(Vec<ParsedLine>, ExecutionReport), DatasetError> {
        let started = Instant::now();
        let partitions = partitions(self, mode)?;
        let read = |p: &Partition| -> Result<(Vec<ParsedLine>, Counts), DatasetError> {
            let mut rows = Vec::new();
            let counts = read_partition(self, p, |row| rows.push(row))?;
            Ok((rows, counts))
        };
        let results: Vec<_> = match mode {
            ExecMode::Sequential => partitions.iter().map(read).collect(),
            ExecMode::Parallel { workers, .. } => rayon::ThreadPoolBuilder::new()
                .num_threads(workers.max(1))
                .build()
                .map_err(|e| DatasetError::Pool(e.to_string()))?
                .install(|| partitions.par_iter().map(read).collect()),
        };
        let (chunks, counts) = first_error(results)?;
        let rows: Vec<ParsedLine> = chunks.into_iter().flatten().collect();
        let report = ExecutionReport {
            rows_read: counts.read,
            rows_skipped: counts.skipped,
            groups: 0,
            partitions: partitions.len(),
            workers: mode.workers(),
            wall_time: started.elapsed(),
        };
        Ok((rows, report))
    }
}

fn first_error<T>(results: Vec<Result<(T, Counts), DatasetError>>) -> Result<(Vec<T>, Counts), DatasetError> {
    let mut out = Vec::with_capacity(results.len());
    let mut total = Counts::default();
    for r in results {
        let (t, c) = r?;
        total.read += c.read;
        total.skipped += c.skipped;
        out.push(t);
    }
    Ok((out, total))
}

fn transpose(
    parts: Vec<Vec<HashMap<String, Vec<ParsedLine>>>>,
    shards: usize,
) -> Vec<Vec<HashMap<String, Vec<ParsedLine>>>> {
    let mut by_shard: Vec<Vec<_>> = (0..shards).map(|_| Vec::with_capacity(parts.len())).collect();
    for part in parts {
        for (s, map) in part.into_iter().enumerate() {
            by_shard[s].push(map);
        }
    }
    by_shard
}

fn shard_of(key: &str, shards: usize) -> usize {
    if shards == 1 {
        return 0;
    }
    let mut h = DefaultHasher::new();
    key.hash(&mut h);
    (h.finish() % shards as u64) as usize
}

fn partitions(plan: &DatasetPlan, mode: ExecMode) -> Result<Vec<Partition>, DatasetError> {
    let ExecMode::Parallel { workers, partitions } = mode else {
        return Ok((0..plan.inputs.len())
            .map(|input| Partition {
                input,
                start: 0,
                end: u64::MAX,
            })
            .collect());
    };
    let target = partitions.unwrap_or(workers.max(1) * 4).max(1) as u64;
    let lens = plan
        .inputs
        .iter()
        .map(|i| plan.fs.len(&i.path).map_err(|e| DatasetError::io(&i.path, e)))
        .collect::<Result<Vec<u64>, _>>()?;
    let total: u64 = lens.iter().sum();
    let mut out = Vec::new();
    for (input, &len) in lens.iter().enumerate() {
        // Each file gets a share of the target proportional to its size.
        let pieces = if total == 0 {
            1
        } else {
            (target * len).div_ceil(total).clamp(1, len.max(1))
        };
        for i in 0..pieces {
            out.push(Partition {
                input,
                start: len * i / pieces,
                end: len * (i + 1) / pieces,
            });
        }
    }
    Ok(out)
}

/// Reads the lines that start inside `[p.start, p.end)`: a line belongs to
/// the range containing its first byte.
fn read_partition(plan: &DatasetPlan, p: &Partition, mut emit: impl FnMut(ParsedLine)) -> Result<Counts, DatasetError> {
    let input: &Input = &plan.inputs[p.input];
    let path = &input.path;
    let io_err = |e| DatasetError::io(path, e);
    let mut pos = p.start.saturating_sub(1);
    let mut reader = plan.fs.open_at(path, pos).map_err(io_err)?;
    let mut buf = Vec::with_capacity(256);
    if p.start > 0 {
        // Skip the tail of the line that began in the previous range.
        pos += reader.read_until(b'\n', &mut buf).map_err(io_err)? as u64;
    }
    let mut counts = Counts::default();
    while pos < p.end {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf).map_err(io_err)?;
        if n == 0 {
            break;
        }
        let line_start = pos;
        pos += n as u64;
        let mut line: &[u8] = &buf;
        if let Some(rest) = line.strip_suffix(b"\n") {
            line = rest.strip_suffix(b"\r").unwrap_or(rest);
        }
        if line.is_empty() {
            continue;
        }
        let decoded = match std::str::from_utf8(line) {
            Ok(text) => decode_fields(text, input.arity).map_err(|source| DatasetError::Decode {
                path: path.clone(),
                line: line_number(plan, path, line_start),
                source,
            }),
            Err(_) => Err(DatasetError::InvalidUtf8 {
                path: path.clone(),
                line: line_number(plan, path, line_start),
            }),
        };
        let row = match decoded {
            Ok(row) => row,
            Err(_) if plan.skip_malformed => {
                counts.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        counts.read += 1;
        if let Some(row) = apply_ops(&input.ops, row) {
            emit(row);
        }
    }
    Ok(counts)
}

fn apply_ops(ops: &[RowOp], mut row: ParsedLine) -> Option<ParsedLine> {
    for op in ops {
        match op {
            RowOp::Map(f) => row = f(row),
            RowOp::Filter(f) => {
                if !f(&row) {
                    return None;
                }
            }
        }
    }
    Some(row)
}

/// 1-based number of the line starting at byte `offset`. Only used to
/// build diagnostics, so it rereads the file prefix.
fn line_number(plan: &DatasetPlan, path: &Path, offset: u64) -> usize {
    let Ok(mut reader) = plan.fs.open_at(path, 0) else {
        return 0;
    };
    let mut seen = 0u64;
    let mut newlines = 0usize;
    while seen < offset {
        let Ok(chunk) = reader.fill_buf() else { return 0 };
        if chunk.is_empty() {
            break;
        }
        let take = chunk.len().min((offset - seen) as usize);
        newlines += chunk[..take].iter().filter(|&&b| b == b'\n').count();
        seen += take as u64;
        reader.consume(take);
    }
    newlines + 1
}
