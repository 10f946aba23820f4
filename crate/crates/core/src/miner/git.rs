use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU64, Ordering};

use super::{CommitMeta, FileChange, FileStatus, MinerError, RepoReader};
use crate::ast::SourceUnit;

/// [`RepoReader`] backed by the `git` executable.
#[derive(Debug)]
pub struct GitCli {
    repo: PathBuf,
    extensions: Vec<String>,
    replacements: AtomicU64,
}

impl GitCli {
    /// Opens the repository whose work tree (or bare directory) is `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, MinerError> {
        let path = path.as_ref();
        if !path.is_dir() {
            return Err(MinerError::RepoNotFound(path.to_path_buf()));
        }
        let repo = path.canonicalize().map_err(|source| MinerError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let git = GitCli {
            repo,
            extensions: vec![".java".to_string()],
            replacements: AtomicU64::new(0),
        };
        let not_repo = || MinerError::NotAGitRepository(path.to_path_buf());
        let out = git.run(&["rev-parse", "--is-bare-repository"])?;
        if !out.status.success() {
            return Err(not_repo());
        }
        if String::from_utf8_lossy(&out.stdout).trim() != "true" {
            // A subdirectory of some other repository is not a repository itself.
            let out = git.run(&["rev-parse", "--show-toplevel"])?;
            let top = String::from_utf8_lossy(&out.stdout).trim().to_string();
            let root_matches = Path::new(&top).canonicalize().is_ok_and(|top| top == git.repo);
            if !out.status.success() || !root_matches {
                return Err(not_repo());
            }
        }
        Ok(git)
    }

    /// Restricts changed files to the given extensions (default `.java`).
    pub fn with_extensions(mut self, extensions: &[&str]) -> Self {
        self.extensions = extensions.iter().map(|e| e.to_string()).collect();
        self
    }

    pub fn path(&self) -> &Path {
        &self.repo
    }

    fn run(&self, args: &[&str]) -> Result<Output, MinerError> {
        Command::new("git")
            .arg("-C")
            .arg(&self.repo)
            .args(args)
            .env("LC_ALL", "C")
            .env("GIT_CONFIG_NOSYSTEM", "1")
            .output()
            .map_err(MinerError::GitUnavailable)
    }

    fn run_ok(&self, args: &[&str]) -> Result<Vec<u8>, MinerError> {
        let out = self.run(args)?;
        if out.status.success() {
            Ok(out.stdout)
        } else {
            Err(MinerError::Git {
                command: format!("git {}", args.join(" ")),
                message: String::from_utf8_lossy(&out.stderr).trim().to_string(),
            })
        }
    }

    fn commit_exists(&self, id: &str) -> Result<bool, MinerError> {
        let rev = format!("{id}^{{commit}}");
        Ok(self.run(&["cat-file", "-e", &rev])?.status.success())
    }

    fn is_source(&self, path: &str) -> bool {
        self.extensions.iter().any(|e| path.ends_with(e.as_str()))
    }
}

impl RepoReader for GitCli {
    fn linear_history(&self) -> Result<Vec<CommitMeta>, MinerError> {
        if !self.run(&["rev-parse", "--verify", "-q", "HEAD"])?.status.success() {
            return Ok(Vec::new());
        }
        let out = self.run_ok(&[
            "log",
            "--first-parent",
            "--reverse",
            "-z",
            "--format=%H%x00%P%x00%an%x00%ae%x00%at%x00%B",
            "HEAD",
        ])?;
        let text = String::from_utf8_lossy(&out);
        let mut fields: Vec<&str> = text.split('\0').collect();
        if fields.len() % 6 == 1 && fields.last() == Some(&"") {
            fields.pop();
        }
        if !fields.len().is_multiple_of(6) {
            return Err(MinerError::Git {
                command: "git log".into(),
                message: "unexpected output format".into(),
            });
        }
        fields
            .chunks(6)
            .map(|f| {
                let timestamp = f[4].parse::<i64>().map_err(|_| MinerError::Git {
                    command: "git log".into(),
                    message: format!("bad timestamp `{}`", f[4]),
                })?;
                Ok(CommitMeta {
                    commit_id: f[0].to_string(),
                    parent_id: f[1].split(' ').next().unwrap_or_default().to_string(),
                    author_name: f[2].to_string(),
                    author_email: f[3].to_string(),
                    timestamp: timestamp.max(0),
                    message: f[5].trim_end().to_string(),
                })
            })
            .collect()
    }

    fn changed_files(&self, current: &CommitMeta, next: &CommitMeta) -> Result<Vec<FileChange>, MinerError> {
        for c in [current, next] {
            if !self.commit_exists(&c.commit_id)? {
                return Err(MinerError::CommitNotFound(c.commit_id.clone()));
            }
        }
        let out = self.run_ok(&[
            "diff-tree",
            "-r",
            "--no-renames",
            "-z",
            "--name-status",
            &current.commit_id,
            &next.commit_id,
        ])?;
        let text = String::from_utf8_lossy(&out);
        let mut parts = text.split('\0').filter(|s| !s.is_empty());
        let mut files = Vec::new();
        while let (Some(status), Some(path)) = (parts.next(), parts.next()) {
            let status = match status.chars().next() {
                Some('A') => FileStatus::Added,
                Some('D') => FileStatus::Deleted,
                _ => FileStatus::Modified,
            };
            if self.is_source(path) {
                files.push(FileChange {
                    path: path.to_string(),
                    status,
                });
            }
        }
        files.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(files)
    }

    fn read_file_at(&self, commit: &CommitMeta, path: &str) -> Result<SourceUnit, MinerError> {
        let rev = format!("{}:{path}", commit.commit_id);
        let out = self.run(&["cat-file", "blob", &rev])?;
        if !out.status.success() {
            return Err(MinerError::FileNotFoundAtRevision {
                commit: commit.commit_id.clone(),
                path: path.to_string(),
            });
        }
        let (text, replaced) = decode_lossy(out.stdout);
        self.replacements.fetch_add(replaced, Ordering::Relaxed);
        Ok(SourceUnit::new(path, text))
    }

    fn replacement_count(&self) -> u64 {
        self.replacements.load(Ordering::Relaxed)
    }
}

/// UTF-8 decoding that replaces each invalid sequence with U+FFFD and
/// returns how many replacements were made.
pub(crate) fn decode_lossy(bytes: Vec<u8>) -> (String, u64) {
    match String::from_utf8(bytes) {
        Ok(s) => (s, 0),
        Err(e) => {
            let bytes = e.into_bytes();
            let mut out = String::with_capacity(bytes.len());
            let mut count = 0;
            for chunk in bytes.utf8_chunks() {
                out.push_str(chunk.valid());
                if !chunk.invalid().is_empty() {
                    out.push(char::REPLACEMENT_CHARACTER);
                    count += 1;
                }
            }
            (out, count)
        }
    }
}
