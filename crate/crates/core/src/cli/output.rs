use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

/// Plot-ready numeric table.
#[derive(Clone, Debug, Serialize)]
pub struct Table {
    #[serde(skip)]
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_number(*v))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }
}

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-4, 1e16)`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if !v.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// What one command produced, before anything touches the filesystem.
pub struct Output {
    pub command: String,
    pub input: Value,
    /// The first table is the primary output; the rest go to side files.
    pub tables: Vec<Table>,
    /// Extra JSON payload, merged into the bundle's top level.
    pub result: Option<Map<String, Value>>,
    /// Commands whose primary output is JSON regardless of `--format`.
    pub json_only: bool,
}

pub struct Provenance {
    pub seed: u64,
    pub timestamp: Option<u64>,
}

impl Output {
    pub fn bundle(&self, provenance: &Provenance) -> Value {
        let mut map = Map::new();
        map.insert("command".into(), json!(self.command));
        map.insert("input".into(), self.input.clone());
        if !self.tables.is_empty() {
            let tables: Map<String, Value> =
                self.tables.iter().map(|t| (t.name.clone(), serde_json::to_value(t).expect("table"))).collect();
            map.insert("tables".into(), Value::Object(tables));
        }
        if let Some(result) = &self.result {
            map.extend(result.clone());
        }
        let mut prov = Map::new();
        prov.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
        prov.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        prov.insert("seed".into(), json!(provenance.seed));
        if let Some(ts) = provenance.timestamp {
            prov.insert("timestamp_unix_s".into(), json!(ts));
        }
        map.insert("provenance".into(), Value::Object(prov));
        Value::Object(map)
    }

    /// Rendered files: `(path, contents)`, primary first. With no `out`
    /// path, only the primary output is produced, for standard output.
    pub fn render(&self, out: Option<&Path>, json: bool, provenance: &Provenance) -> Vec<(Option<PathBuf>, String)> {
        let primary = if json || self.json_only || self.tables.is_empty() {
            let mut s = serde_json::to_string_pretty(&self.bundle(provenance)).expect("JSON");
            s.push('\n');
            s
        } else {
            self.tables[0].to_csv()
        };
        let mut files = vec![(out.map(Path::to_path_buf), primary)];
        if let Some(out) = out {
            let skip = if json || self.json_only { 0 } else { 1 };
            for t in self.tables.iter().skip(skip) {
                files.push((Some(side_path(out, &t.name)), t.to_csv()));
            }
        }
        files
    }
}

/// `dir/stem.ext` → `dir/stem_suffix.csv`.
pub fn side_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}_{suffix}.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(3.0), "3");
        assert_eq!(format_number(0.25), "0.25");
        assert_eq!(format_number(1.5e-7), "1.5e-7");
        assert_eq!(format_number(f64::NAN), "NaN");
        assert_eq!(format_number(-2e20), "-2e20");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("main", &["a", "b"]);
        t.push(vec![1.0, 0.5]);
        assert_eq!(t.to_csv(), "a,b\n1,0.5\n");
    }

    #[test]
    fn side_paths() {
        assert_eq!(
            side_path(Path::new("/tmp/x/modes.csv"), "participation"),
            Path::new("/tmp/x/modes_participation.csv")
        );
    }
}
