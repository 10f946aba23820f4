//! Sequential versus parallel commit-level aggregation over a synthetic
//! dataset.

use std::path::Path;
use std::time::{Duration, Instant};

use crate::analytics::{commit_aggregates, AnalyticsError};
use crate::dataset::{read_multi, DatasetError, ExecMode};
use crate::synth::{write_dataset, SynthConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: u64,
    pub commits: usize,
    pub workers: usize,
    pub sequential: Duration,
    pub parallel: Duration,
    pub identical: bool,
}

impl BenchReport {
    pub fn speedup(&self) -> f64 {
        self.sequential.as_secs_f64() / self.parallel.as_secs_f64().max(1e-9)
    }
}

/// Writes the synthetic dataset into `dir`, then aggregates it once
/// sequentially and once with `workers` workers.
pub fn run(dir: &Path, cfg: SynthConfig, workers: usize) -> Result<BenchReport, AnalyticsError> {
    let inputs = write_dataset(dir, cfg).map_err(|e| DatasetError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;

    let start = Instant::now();
    let (seq, seq_report) = commit_aggregates(read_multi(&inputs), ExecMode::Sequential)?;
    let sequential = start.elapsed();

    let start = Instant::now();
    let (par, _) = commit_aggregates(read_multi(&inputs), ExecMode::parallel(workers))?;
    let parallel = start.elapsed();

    Ok(BenchReport {
        rows: seq_report.rows_read,
        commits: seq.len(),
        workers,
        sequential,
        parallel,
        identical: seq == par,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bench_agrees() {
        let dir = tempfile::tempdir().unwrap();
        let report = run(dir.path(), SynthConfig::new(3000, 4), 3).unwrap();
        assert!(report.identical);
        assert_eq!(report.rows, 3000);
        assert!(report.commits > 50);
        assert!(report.speedup() > 0.0);
    }
}
