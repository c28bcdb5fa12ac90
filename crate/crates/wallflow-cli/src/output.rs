//! Output plumbing shared by every experiment: exit-code classification,
//! output-directory resolution, the run manifest with its content hash, and
//! deterministic CSV emission.
//!
//! Determinism contract: identical resolved configurations produce
//! byte-identical artifacts. Floats are written with [`fmt`] (17 significant
//! digits, round-trip exact), the manifest holds no timestamps or absolute
//! paths, and every CSV opens with a comment line carrying the manifest hash
//! so artifacts can be matched to the configuration that produced them.

use serde::Serialize;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use wallflow::diagnostics::DiagnosticsRecord;
use wallflow::SolverError;

/// Environment variable naming the output root used when `--out-dir` is
/// absent; each run writes to `<root>/<subcommand>`.
pub const OUT_ROOT_ENV: &str = "WALLFLOW_OUT";

/// Failures surfaced as process exit codes: configuration and I/O problems
/// exit 2, numerical aborts of a requested run exit 3.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file, input data, or output I/O.
    Config(String),
    /// A solver refused or aborted the run (CFL, non-finite state, lost
    /// decay bound).
    Abort(String),
}

impl CliError {
    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Abort(m) => m,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Abort(_) => 3,
        }
    }

    /// Failure marker recorded in the manifest `status` field.
    pub fn status(&self) -> String {
        match self {
            CliError::Config(m) => format!("error: {m}"),
            CliError::Abort(m) => format!("aborted: {m}"),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidConfig(_)
            | SolverError::GridMismatch(_)
            | SolverError::NonFiniteInput(_)
            | SolverError::TooFewSamples { .. } => CliError::Config(e.to_string()),
            SolverError::NonFiniteState { .. }
            | SolverError::CflViolation { .. }
            | SolverError::DecayViolation { .. } => CliError::Abort(e.to_string()),
        }
    }
}

/// Wraps an I/O-ish error with context into a configuration error.
pub fn cfg_err(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{context}: {e}"))
}

/// 64-bit FNV-1a digest; tiny, dependency-free, and stable across platforms.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Fixed float formatting for CSV cells: 17 significant digits, so reading
/// the cell back reproduces the exact binary value.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// [`fmt`] for optional cells; absent values become empty fields.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn resolve_out_dir(kind: &str, flag: Option<PathBuf>) -> PathBuf {
    if let Some(dir) = flag {
        return dir;
    }
    if let Ok(root) = std::env::var(OUT_ROOT_ENV) {
        if !root.is_empty() {
            return PathBuf::from(root).join(kind);
        }
    }
    PathBuf::from("wallflow-out").join(kind)
}

/// Resolved output destination of one experiment: directory, manifest
/// content, and the hash stamped into every CSV.
pub struct RunContext {
    pub dir: PathBuf,
    pub hash: u64,
    core: serde_json::Value,
}

impl RunContext {
    /// Resolves the output directory, creates it, and freezes the manifest
    /// core (kind, artifact version, seed, resolved parameters). The hash
    /// covers exactly that core, so it is known before the run starts and
    /// identical resolved configurations hash identically.
    pub fn create<P: Serialize>(
        kind: &str,
        out_dir: Option<PathBuf>,
        seed: u64,
        params: &P,
    ) -> Result<RunContext, CliError> {
        let dir = resolve_out_dir(kind, out_dir);
        fs::create_dir_all(&dir).map_err(|e| {
            cfg_err(
                &format!("cannot create output directory {}", dir.display()),
                e,
            )
        })?;
        let core = serde_json::json!({
            "kind": kind,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
            "params": serde_json::to_value(params)
                .map_err(|e| cfg_err("cannot serialize parameters", e))?,
        });
        let hash = fnv1a64(
            serde_json::to_string_pretty(&core)
                .map_err(|e| cfg_err("cannot serialize manifest", e))?
                .as_bytes(),
        );
        Ok(RunContext { dir, hash, core })
    }

    /// Writes `manifest.json`: the hashed core plus the final `status`
    /// (`"ok"`, `"error: ..."`, or `"aborted: ..."`).
    pub fn write_manifest(&self, status: &str) -> Result<(), CliError> {
        let mut full = self.core.clone();
        full.as_object_mut()
            .expect("manifest core is an object")
            .insert("status".into(), status.into());
        let text = serde_json::to_string_pretty(&full)
            .map_err(|e| cfg_err("cannot serialize manifest", e))?;
        let path = self.dir.join("manifest.json");
        fs::write(&path, text + "\n")
            .map_err(|e| cfg_err(&format!("cannot write {}", path.display()), e))
    }

    /// Opens `<dir>/<name>` with the manifest-hash comment line and the
    /// header row already written.
    pub fn csv(&self, name: &str, header: &[&str]) -> Result<CsvSink, CliError> {
        let path = self.dir.join(name);
        let mut file = BufWriter::new(
            File::create(&path)
                .map_err(|e| cfg_err(&format!("cannot create {}", path.display()), e))?,
        );
        writeln!(file, "# manifest_hash={:016x}", self.hash)
            .map_err(|e| cfg_err(&format!("cannot write {}", path.display()), e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer
            .write_record(header)
            .map_err(|e| cfg_err(&format!("cannot write {}", path.display()), e))?;
        Ok(CsvSink {
            writer,
            name: name.to_string(),
        })
    }
}

/// One open CSV artifact.
pub struct CsvSink {
    writer: csv::Writer<BufWriter<File>>,
    name: String,
}

impl CsvSink {
    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|e| cfg_err(&format!("cannot write {}", self.name), e))
    }

    /// Flushes through to the file; call once per artifact.
    pub fn finish(self) -> Result<(), CliError> {
        let name = self.name;
        let mut inner = self
            .writer
            .into_inner()
            .map_err(|e| cfg_err(&format!("cannot flush {name}"), e))?;
        inner
            .flush()
            .map_err(|e| cfg_err(&format!("cannot flush {name}"), e))
    }
}

/// Writes a diagnostics series in the shared 12-column schema; empty cells
/// stand for diagnostics the geometry does not define.
pub fn write_diagnostics(
    ctx: &RunContext,
    name: &str,
    records: &[DiagnosticsRecord],
) -> Result<(), CliError> {
    let header: Vec<&str> = DiagnosticsRecord::CSV_HEADER.split(',').collect();
    let mut sink = ctx.csv(name, &header)?;
    for rec in records {
        sink.row(rec.csv_fields().iter().map(|f| fmt_opt(*f)))?;
    }
    sink.finish()
}
