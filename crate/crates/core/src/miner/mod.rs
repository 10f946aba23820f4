//! Replays a repository's first-parent history and writes one dataset row
//! per classified change of every changed source file.

mod git;
mod rules;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use git::GitCli;
pub use rules::{extract_ticket_id, is_test_file};

use crate::ast::SourceUnit;
use crate::dataset::{encode_row, RAW_ARITY};
use crate::diff::{diff_sources, ClassifiedChange, DiffError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitMeta {
    pub commit_id: String,
    /// First parent, empty for a root commit.
    pub parent_id: String,
    pub author_name: String,
    pub author_email: String,
    pub timestamp: i64,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FileStatus {
    Added,
    Modified,
    Deleted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileChange {
    pub path: String,
    pub status: FileStatus,
}

#[derive(Debug, thiserror::Error)]
pub enum MinerError {
    #[error("{}: no such repository", .0.display())]
    RepoNotFound(PathBuf),
    #[error("{}: not a git repository", .0.display())]
    NotAGitRepository(PathBuf),
    #[error("commit {0} not found")]
    CommitNotFound(String),
    #[error("{path} does not exist at {commit}")]
    FileNotFoundAtRevision { commit: String, path: String },
    #[error("{command}: {message}")]
    Git { command: String, message: String },
    #[error("cannot run git: {0}")]
    GitUnavailable(#[source] std::io::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("project name `{0}` is used by more than one repository")]
    DuplicateProject(String),
}

/// Narrow read access to a repository.
pub trait RepoReader: Sync {
    /// First-parent history of HEAD, oldest first.
    fn linear_history(&self) -> Result<Vec<CommitMeta>, MinerError>;

    /// Source files that differ between two commits.
    fn changed_files(&self, current: &CommitMeta, next: &CommitMeta) -> Result<Vec<FileChange>, MinerError>;

    fn read_file_at(&self, commit: &CommitMeta, path: &str) -> Result<SourceUnit, MinerError>;

    /// Invalid UTF-8 sequences replaced so far by `read_file_at`.
    fn replacement_count(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MiningReport {
    pub project: String,
    pub output: PathBuf,
    pub commits: usize,
    pub rows_written: u64,
    pub files_diffed: u64,
    pub files_skipped: u64,
    /// One message per file skipped because a side failed to parse.
    pub parse_errors: Vec<String>,
    pub replaced_chars: u64,
}

/// Project name of a repository: its directory name.
pub fn project_name(repo: &Path) -> String {
    let name = repo.file_name().map(|n| n.to_string_lossy().into_owned());
    match name {
        Some(n) if !n.is_empty() && n != "." && n != ".." => n,
        _ => repo
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "project".to_string()),
    }
}

/// Mines `repo` into `<out_dir>/<project>.csv`.
pub fn mine_repo(repo: &Path, out_dir: &Path) -> Result<MiningReport, MinerError> {
    let reader = GitCli::open(repo)?;
    mine_with(&reader, &project_name(repo), out_dir)
}

/// Mines several repositories, `jobs` at a time. Results are in input order.
pub fn mine_repos(repos: &[PathBuf], out_dir: &Path, jobs: usize) -> Vec<Result<MiningReport, MinerError>> {
    let mut seen = HashSet::new();
    let duplicate: Vec<bool> = repos.iter().map(|r| !seen.insert(project_name(r))).collect();
    let work = |(repo, dup): (&PathBuf, &bool)| {
        if *dup {
            Err(MinerError::DuplicateProject(project_name(repo)))
        } else {
            mine_repo(repo, out_dir)
        }
    };
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(|| repos.par_iter().zip(&duplicate).map(work).collect()),
        Err(_) => repos.iter().zip(&duplicate).map(work).collect(),
    }
}

/// Repository paths listed one per line; blank lines and `#` comments are
/// ignored.
pub fn read_repo_list(list: &Path) -> Result<Vec<PathBuf>, MinerError> {
    let text = std::fs::read_to_string(list).map_err(|source| MinerError::Io {
        path: list.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(PathBuf::from)
        .collect())
}

/// Classified changes of one file between two commits.
pub fn diff_file(
    reader: &dyn RepoReader,
    current: &CommitMeta,
    next: &CommitMeta,
    change: &FileChange,
) -> Result<Result<Vec<ClassifiedChange>, DiffError>, MinerError> {
    let before = match change.status {
        FileStatus::Added => SourceUnit::empty(&change.path),
        _ => reader.read_file_at(current, &change.path)?,
    };
    let after = match change.status {
        FileStatus::Deleted => SourceUnit::empty(&change.path),
        _ => reader.read_file_at(next, &change.path)?,
    };
    Ok(diff_sources(&before, &after))
}

/// Mines through any reader. The output file is written under a temporary
/// name and renamed into place when complete.
pub fn mine_with(reader: &dyn RepoReader, project: &str, out_dir: &Path) -> Result<MiningReport, MinerError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| MinerError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let output = out_dir.join(format!("{project}.csv"));
    let tmp = crate::dataset::temp_path(&output);
    let mut report = MiningReport {
        project: project.to_string(),
        output: output.clone(),
        ..MiningReport::default()
    };

    let result = (|| -> Result<(), MinerError> {
        let mut out = BufWriter::new(File::create(&tmp).map_err(io_err(&tmp))?);
        let history = reader.linear_history()?;
        report.commits = history.len();
        for pair in history.windows(2) {
            let (current, next) = (&pair[0], &pair[1]);
            let ticket = extract_ticket_id(&next.message);
            let timestamp = next.timestamp.to_string();
            for change in reader.changed_files(current, next)? {
                let changes = match diff_file(reader, current, next, &change)? {
                    Ok(changes) => changes,
                    Err(e) => {
                        report.files_skipped += 1;
                        report.parse_errors.push(format!("{}: {e}", next.commit_id));
                        continue;
                    }
                };
                report.files_diffed += 1;
                let test = is_test_file(&change.path).to_string();
                for c in changes {
                    let row: [&str; RAW_ARITY] = [
                        project,
                        &next.commit_id,
                        &current.commit_id,
                        &next.author_name,
                        &next.author_email,
                        &timestamp,
                        &change.path,
                        &test,
                        c.change_type.name(),
                        c.entity_kind.name(),
                        &c.entity_name,
                        &c.parent_path,
                        &ticket,
                    ];
                    let line = encode_row(&row).expect("row has the raw arity");
                    out.write_all(line.as_bytes()).map_err(io_err(&tmp))?;
                    report.rows_written += 1;
                }
            }
        }
        let file = out.into_inner().map_err(|e| MinerError::Io {
            path: tmp.clone(),
            source: e.into_error(),
        })?;
        file.sync_all().map_err(io_err(&tmp))?;
        std::fs::rename(&tmp, &output).map_err(io_err(&output))
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(e);
    }
    report.replaced_chars = reader.replacement_count();
    Ok(report)
}
