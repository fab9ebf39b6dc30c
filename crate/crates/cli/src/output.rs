use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

fn parent_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes `contents` to a temporary file beside `path` and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = parent_of(path);
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes to `path` when given, standard output otherwise.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            std::io::stdout().write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

/// Collects files in a staging directory and moves it to the target in one
/// rename, so a failed run leaves nothing behind.
pub struct StagedDir {
    staging: tempfile::TempDir,
    target: PathBuf,
}

impl StagedDir {
    pub fn new(target: &Path, force: bool) -> Result<Self> {
        if target.exists() {
            let empty = target.is_dir() && std::fs::read_dir(target)?.next().is_none();
            if !empty && !force {
                bail!("{} exists and is not empty (use --force to replace it)", target.display());
            }
        }
        let parent = parent_of(target);
        std::fs::create_dir_all(&parent)?;
        let staging = tempfile::Builder::new()
            .prefix(".actgram-")
            .tempdir_in(&parent)
            .with_context(|| format!("creating a directory in {}", parent.display()))?;
        Ok(StagedDir {
            staging,
            target: target.to_path_buf(),
        })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.staging.path().join(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, contents).with_context(|| format!("writing {name}"))
    }

    pub fn commit(self) -> Result<()> {
        if self.target.is_dir() {
            std::fs::remove_dir_all(&self.target)?;
        } else if self.target.exists() {
            std::fs::remove_file(&self.target)?;
        }
        let path = self.staging.keep();
        std::fs::rename(&path, &self.target).with_context(|| format!("moving output to {}", self.target.display()))?;
        Ok(())
    }
}
