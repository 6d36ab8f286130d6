//! Result serialization: CSV and JSON writers with reproducibility metadata.
//!
//! Every file starts from the same ingredients: a config string (the resolved
//! run parameters), the seed, and a table of named columns. CSV output embeds
//! the metadata as `#`-prefixed header lines; JSON output nests it under a
//! top-level `config` key. Writes go through a temporary file in the target
//! directory followed by a rename, so readers never observe a partial file.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use serde_json::{json, Value};

/// Output format selector shared by all CLI subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// A rectangular result table: column names plus equal-length columns.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<(String, Vec<f64>)>,
}

impl Table {
    pub fn new() -> Self {
        Table { columns: Vec::new() }
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) {
        self.columns.push((name.to_string(), values));
    }

    fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, v)| v.len())
    }
}

/// FNV-1a over the config string; stable across platforms and runs, cheap to
/// recompute by hand, and enough to spot a mismatched config at a glance.
pub fn config_hash(config: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in config.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Formats a float so the text round-trips to the identical bit pattern.
fn fmt_f64(x: f64) -> String {
    let mut s = format!("{x}");
    // `{}` prints integral floats without a decimal point; keep one so the
    // column stays typed as real when read back.
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

/// Renders the CSV body: metadata lines, header row, then comma-separated
/// data rows with `.` as the decimal separator.
pub fn render_csv(config: &str, seed: u64, table: &Table) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# ginue-lab {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# config: {config}");
    let _ = writeln!(out, "# config_hash: {:016x}", config_hash(config));
    let _ = writeln!(out, "# seed: {seed}");
    let names: Vec<&str> = table.columns.iter().map(|(n, _)| n.as_str()).collect();
    let _ = writeln!(out, "{}", names.join(","));
    for row in 0..table.n_rows() {
        let cells: Vec<String> = table
            .columns
            .iter()
            .map(|(_, v)| fmt_f64(v[row]))
            .collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Renders the JSON body: `{"config": {...}, "results": {...}}` with columns
/// stored as named arrays.
pub fn render_json(config: &str, seed: u64, table: &Table) -> String {
    let mut results = serde_json::Map::new();
    for (name, values) in &table.columns {
        results.insert(name.clone(), json!(values));
    }
    let doc = json!({
        "config": {
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "config_hash": format!("{:016x}", config_hash(config)),
            "seed": seed,
        },
        "results": Value::Object(results),
    });
    // `to_string_pretty` is deterministic for a fixed map order; serde_json
    // preserves insertion order via the default feature set.
    let mut s = serde_json::to_string_pretty(&doc).expect("static document serializes");
    s.push('\n');
    s
}

/// Writes `content` to `path` atomically: a sibling temporary file is written
/// and synced, then renamed over the destination.
pub fn write_atomic(path: &Path, content: &str) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().map_or_else(
                || "out".to_string(),
                |n| n.to_string_lossy().into_owned()
            )
        )),
        None => Path::new(&format!(
            ".{}.tmp",
            path.file_name().map_or_else(
                || "out".to_string(),
                |n| n.to_string_lossy().into_owned()
            )
        ))
        .to_path_buf(),
    };
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Renders in the requested format and writes atomically; with no path the
/// content goes to stdout unchanged.
pub fn emit(
    path: Option<&Path>,
    format: Format,
    config: &str,
    seed: u64,
    table: &Table,
) -> io::Result<()> {
    let content = match format {
        Format::Csv => render_csv(config, seed, table),
        Format::Json => render_json(config, seed, table),
    };
    match path {
        Some(p) => write_atomic(p, &content),
        None => io::stdout().write_all(content.as_bytes()),
    }
}
