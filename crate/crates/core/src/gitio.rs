//! Thin wrapper over the `git` command line for repository access.
//!
//! Everything here reads object storage directly (`git show`, `rev-parse`,
//! `diff`), so no working-tree checkout is needed during extraction. Snapshot
//! materialization for detector runs goes through `git archive`.

use std::path::{Path, PathBuf};
use std::process::Command;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GitError {
    #[error("git is not runnable: {0}")]
    Spawn(std::io::Error),
    #[error("git {args} failed in {repo}: {stderr}")]
    Command {
        args: String,
        repo: String,
        stderr: String,
    },
    #[error("commit {0} has no parent")]
    NoParent(String),
    #[error("clone of {url} failed: {stderr}")]
    Clone { url: String, stderr: String },
    #[error("snapshot checkout failed: {0}")]
    Snapshot(String),
}

fn run_git(repo: &Path, args: &[&str]) -> Result<Vec<u8>, GitError> {
    let output = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(args)
        .output()
        .map_err(GitError::Spawn)?;
    if output.status.success() {
        Ok(output.stdout)
    } else {
        Err(GitError::Command {
            args: args.join(" "),
            repo: repo.display().to_string(),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        })
    }
}

fn run_git_str(repo: &Path, args: &[&str]) -> Result<String, GitError> {
    run_git(repo, args).map(|b| String::from_utf8_lossy(&b).trim().to_string())
}

/// Resolves a possibly abbreviated id to the full commit id.
pub fn resolve_commit(repo: &Path, commit: &str) -> Result<String, GitError> {
    run_git_str(repo, &["rev-parse", &format!("{commit}^{{commit}}")])
}

pub fn commit_exists(repo: &Path, commit: &str) -> bool {
    resolve_commit(repo, commit).is_ok()
}

/// First parent of `fix_commit`, the snapshot treated as vulnerable. A merge
/// commit resolves to its mainline parent; a root commit is an error.
pub fn resolve_parent(repo: &Path, fix_commit: &str) -> Result<String, GitError> {
    let line = run_git_str(repo, &["rev-list", "--parents", "-n", "1", fix_commit])?;
    let mut ids = line.split_whitespace();
    let own = ids.next().unwrap_or_default().to_string();
    match ids.next() {
        Some(parent) => Ok(parent.to_string()),
        None => Err(GitError::NoParent(if own.is_empty() {
            fix_commit.to_string()
        } else {
            own
        })),
    }
}

/// File change reported by `git diff --name-status` between two commits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileChange {
    pub status: FileStatus,
    pub path: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileStatus {
    Added,
    Modified,
    Deleted,
}

/// Changed files between two commits, rename detection off so a rename shows
/// up as one deletion plus one addition.
pub fn changed_files(repo: &Path, from: &str, to: &str) -> Result<Vec<FileChange>, GitError> {
    let out = run_git_str(
        repo,
        &["diff", "--name-status", "--no-renames", from, to],
    )?;
    let mut changes = Vec::new();
    for line in out.lines() {
        let mut parts = line.splitn(2, '\t');
        let status = parts.next().unwrap_or_default();
        let Some(path) = parts.next() else { continue };
        let status = match status.chars().next() {
            Some('A') => FileStatus::Added,
            Some('M') => FileStatus::Modified,
            Some('D') => FileStatus::Deleted,
            // Type changes and the like are treated as modifications.
            Some(_) => FileStatus::Modified,
            None => continue,
        };
        changes.push(FileChange {
            status,
            path: path.to_string(),
        });
    }
    Ok(changes)
}

/// Raw bytes of `path` at `commit`, or None if the file does not exist there.
pub fn read_file_at(repo: &Path, commit: &str, path: &str) -> Option<Vec<u8>> {
    run_git(repo, &["show", &format!("{commit}:{path}")]).ok()
}

/// Every path in the tree of `commit`.
pub fn list_tree(repo: &Path, commit: &str) -> Result<Vec<String>, GitError> {
    let out = run_git_str(repo, &["ls-tree", "-r", "--name-only", commit])?;
    Ok(out.lines().map(|l| l.to_string()).collect())
}

/// Store layout: `<store>/<normalized-host>/<owner>/<name>`.
pub fn store_path(store_dir: &Path, repo_url: &str) -> PathBuf {
    let trimmed = repo_url.trim().trim_end_matches('/');
    let trimmed = trimmed.strip_suffix(".git").unwrap_or(trimmed);
    let without_scheme = trimmed
        .split_once("://")
        .map(|(_, rest)| rest)
        .unwrap_or(trimmed);
    let mut parts: Vec<&str> = without_scheme.split('/').filter(|p| !p.is_empty()).collect();
    let (host, owner, name) = match parts.len() {
        0 => ("local", "_", "repo"),
        1 => ("local", "_", parts[0]),
        2 => ("local", parts[0], parts[1]),
        _ => {
            let name = parts.pop().unwrap();
            let owner = parts.pop().unwrap();
            let host = if trimmed.contains("://") {
                parts[0]
            } else {
                "local"
            };
            (host, owner, name)
        }
    };
    let sanitize = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' {
                c.to_ascii_lowercase()
            } else {
                '_'
            })
            .collect()
    };
    store_dir
        .join(sanitize(host))
        .join(sanitize(owner))
        .join(sanitize(name))
}

/// Ensures a repository is available in the store, cloning if needed, and
/// returns its path. Local paths and file URLs clone fine offline.
pub fn ensure_repo(store_dir: &Path, repo_url: &str) -> Result<PathBuf, GitError> {
    let dest = store_path(store_dir, repo_url);
    if dest.join(".git").exists() || dest.join("HEAD").exists() {
        return Ok(dest);
    }
    if let Some(parent) = dest.parent() {
        std::fs::create_dir_all(parent).map_err(GitError::Spawn)?;
    }
    let output = Command::new("git")
        .arg("clone")
        .arg("--quiet")
        .arg(repo_url)
        .arg(&dest)
        .output()
        .map_err(GitError::Spawn)?;
    if output.status.success() {
        Ok(dest)
    } else {
        Err(GitError::Clone {
            url: repo_url.to_string(),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        })
    }
}

/// Materializes the tree of `commit` under `dest` without touching the
/// repository's working tree.
pub fn checkout_snapshot(repo: &Path, commit: &str, dest: &Path) -> Result<(), GitError> {
    std::fs::create_dir_all(dest).map_err(GitError::Spawn)?;
    let paths = list_tree(repo, commit)?;
    for path in paths {
        let Some(bytes) = read_file_at(repo, commit, &path) else {
            return Err(GitError::Snapshot(format!("{commit}:{path} unreadable")));
        };
        let target = dest.join(&path);
        if let Some(parent) = target.parent() {
            std::fs::create_dir_all(parent).map_err(GitError::Spawn)?;
        }
        std::fs::write(&target, bytes).map_err(GitError::Spawn)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_path_is_normalized() {
        let base = Path::new("/store");
        assert_eq!(
            store_path(base, "https://GitHub.com/Owner/Repo.git"),
            PathBuf::from("/store/github.com/owner/repo")
        );
        assert_eq!(
            store_path(base, "/tmp/fixtures/myrepo"),
            PathBuf::from("/store/local/fixtures/myrepo")
        );
    }
}
