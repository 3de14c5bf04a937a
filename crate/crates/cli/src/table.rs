//! Named real-valued columns with CSV/JSON export.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::{Format, ScanConfig};
use crate::error::{CliError, Result};
use crate::Command;

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    /// Leading columns that identify a row in diagnostics.
    key_columns: usize,
    pub rows: Vec<Vec<f64>>,
}

impl ResultTable {
    pub fn new<S: AsRef<str>>(name: &str, columns: &[S], key_columns: usize) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            key_columns: key_columns.min(columns.len()),
            rows: Vec::new(),
        }
    }

    /// Appends a row; any non-finite entry aborts naming the row's point.
    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(CliError::Internal(format!(
                "table `{}` has {} columns, row has {}",
                self.name,
                self.columns.len(),
                row.len()
            )));
        }
        if let Some(k) = row.iter().position(|v| !v.is_finite()) {
            let point = if self.key_columns == 0 {
                format!("row {}", self.rows.len())
            } else {
                let keys: Vec<String> =
                    (0..self.key_columns).map(|i| format!("{}={}", self.columns[i], row[i])).collect();
                format!("row {} ({})", self.rows.len(), keys.join(", "))
            };
            return Err(CliError::NonFinite { column: self.columns[k].clone(), point });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Internal(format!("csv encoding: {e}"));
        w.write_record(&self.columns).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_number(v))).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Internal(format!("csv encoding: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        json!({ "columns": self.columns, "rows": self.rows })
    }
}

/// Integral values print without exponent, others in shortest round-trip
/// scientific notation.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// A command's output: a main table, companion tables and scalar results.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub main: ResultTable,
    pub companions: Vec<ResultTable>,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn new(main: ResultTable) -> Self {
        Self { main, companions: Vec::new(), summary: Map::new() }
    }

    pub fn companion(&self, name: &str) -> Option<&ResultTable> {
        self.companions.iter().find(|t| t.name == name)
    }
}

/// Config echo, code version and seed; enough to re-run the table.
pub fn metadata(command: Command, config: &ScanConfig) -> Value {
    json!({
        "command": command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": config.seed,
        "config": config,
    })
}

fn companion_path(main: &Path, name: &str) -> PathBuf {
    let stem = main.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    main.with_file_name(format!("{stem}.{name}.csv"))
}

fn sidecar_path(main: &Path) -> PathBuf {
    let mut name = main.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    main.with_file_name(name)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Writes a report. CSV goes to the output path with `<stem>.<name>.csv`
/// companions and a `<path>.meta.json` sidecar; on stdout, companions
/// follow the main table after a blank line and metadata goes to stderr.
pub fn emit(command: Command, config: &ScanConfig, report: &Report) -> Result<()> {
    let mut meta = metadata(command, config);
    meta["columns"] = json!(report.main.columns);
    if !report.summary.is_empty() {
        meta["summary"] = Value::Object(report.summary.clone());
    }
    let path = config.output.path.as_deref();
    match config.output.format {
        Format::Json => {
            let mut tables = Map::new();
            tables.insert(report.main.name.clone(), report.main.to_json());
            for t in &report.companions {
                tables.insert(t.name.clone(), t.to_json());
            }
            let doc = pretty(&json!({ "metadata": meta, "tables": tables }));
            match path {
                Some(p) => write(p, &doc),
                None => stdout(&doc),
            }
        }
        Format::Csv => match path {
            Some(p) => {
                write(p, &report.main.to_csv()?)?;
                let mut files = Map::new();
                for t in &report.companions {
                    let cp = companion_path(p, &t.name);
                    write(&cp, &t.to_csv()?)?;
                    files.insert(t.name.clone(), json!(cp.file_name().map(|f| f.to_string_lossy().into_owned())));
                }
                if !files.is_empty() {
                    meta["companions"] = Value::Object(files);
                }
                write(&sidecar_path(p), &pretty(&meta))
            }
            None => {
                let mut text = report.main.to_csv()?;
                for t in &report.companions {
                    text.push('\n');
                    text.push_str(&t.to_csv()?);
                }
                stdout(&text)?;
                eprint!("{}", pretty(&meta));
                Ok(())
            }
        },
    }
}

pub fn emit_json(config: &ScanConfig, doc: &Value) -> Result<()> {
    let text = pretty(doc);
    match config.output.path.as_deref() {
        Some(p) => write(p, &text),
        None => stdout(&text),
    }
}

fn stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| CliError::Output { path: PathBuf::from("<stdout>"), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [1000.0, -3.0, 0.1, 1.0 / 3.0, 6.02e23, -2.5e-300, f64::MIN_POSITIVE] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1000.0), "1000");
    }

    #[test]
    fn non_finite_rows_name_their_point() {
        let mut t = ResultTable::new("main", &["n_bar", "tau", "qfi_s2"], 2);
        t.push(vec![1.0, 0.5, 2.0]).unwrap();
        let e = t.push(vec![3.0, -1.0, f64::NAN]).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("qfi_s2") && msg.contains("n_bar=3") && msg.contains("tau=-1"), "{msg}");
        assert_eq!(t.rows.len(), 1);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut t = ResultTable::new("main", &["a", "b"], 1);
        t.push(vec![1.0, 0.25]).unwrap();
        assert_eq!(t.to_csv().unwrap(), "a,b\n1,2.5e-1\n");
    }

    #[test]
    fn sibling_paths() {
        let p = Path::new("/tmp/x/fig3.csv");
        assert_eq!(companion_path(p, "minimum"), Path::new("/tmp/x/fig3.minimum.csv"));
        assert_eq!(sidecar_path(p), Path::new("/tmp/x/fig3.csv.meta.json"));
    }
}
