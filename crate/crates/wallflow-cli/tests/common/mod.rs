//! Helpers shared by the CLI test binaries: running the built binary and
//! parsing its CSV artifacts.

#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

/// Runs the `wallflow` binary with `args`, working directory `cwd`. The
/// output-root variable is cleared so runs are hermetic.
pub fn wallflow(cwd: &Path, args: &[&str]) -> Output {
    wallflow_env(cwd, args, &[])
}

/// Like [`wallflow`] but with extra environment variables set.
pub fn wallflow_env(cwd: &Path, args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wallflow"));
    cmd.args(args).current_dir(cwd).env_remove("WALLFLOW_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

pub fn assert_success(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed (status {:?}):\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// A parsed CSV artifact: the manifest-hash comment, the header, and rows.
pub struct CsvData {
    pub hash_line: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvData {
    pub fn read(path: &Path) -> CsvData {
        let text = std::fs::read_to_string(path)
            .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
        let mut lines = text.lines();
        let hash_line = lines.next().expect("hash comment").to_string();
        assert!(
            hash_line.starts_with("# manifest_hash=") && hash_line.len() == 32,
            "bad hash line in {}: {hash_line:?}",
            path.display()
        );
        let header: Vec<String> = lines
            .next()
            .expect("header row")
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        CsvData {
            hash_line,
            header,
            rows,
        }
    }

    pub fn col(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name} in {:?}", self.header))
    }

    pub fn f64(&self, row: usize, name: &str) -> f64 {
        let cell = &self.rows[row][self.col(name)];
        cell.parse()
            .unwrap_or_else(|e| panic!("row {row} column {name} = {cell:?}: {e}"))
    }

    /// Whole column as floats; panics on empty cells.
    pub fn column(&self, name: &str) -> Vec<f64> {
        (0..self.rows.len()).map(|r| self.f64(r, name)).collect()
    }
}
