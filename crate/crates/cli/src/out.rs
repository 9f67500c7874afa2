//! Output directory handling. Every CSV gets a JSON sidecar carrying the
//! same rows at full machine precision.

use std::path::{Path, PathBuf};

use cbp_core::{Error, Result};
use serde::Serialize;

use crate::fmt::{csv_line, Cell};

pub struct OutDir {
    path: PathBuf,
}

impl OutDir {
    pub fn create(path: &Path) -> Result<Self> {
        std::fs::create_dir_all(path).map_err(|e| {
            Error::Domain(format!("output directory {} not writable: {e}", path.display()))
        })?;
        Ok(OutDir { path: path.to_path_buf() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write(&self, name: &str, content: &str) -> Result<PathBuf> {
        let target = self.path.join(name);
        std::fs::write(&target, content)
            .map_err(|e| Error::Domain(format!("cannot write {}: {e}", target.display())))?;
        Ok(target)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Domain(format!("serialization failed: {e}")))?;
        self.write(name, &(text + "\n"))
    }

    /// CSV at six significant digits plus a `<stem>.json` sidecar at full
    /// precision.
    pub fn write_csv<T: Serialize>(
        &self,
        stem: &str,
        header: &str,
        rows: &[Vec<Cell>],
        sidecar: &T,
    ) -> Result<PathBuf> {
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            text.push_str(&csv_line(row));
            text.push('\n');
        }
        let path = self.write(&format!("{stem}.csv"), &text)?;
        self.write_json(&format!("{stem}.json"), sidecar)?;
        Ok(path)
    }
}
