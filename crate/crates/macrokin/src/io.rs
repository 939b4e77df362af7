//! Output files: provenance-stamped CSV and JSON, written atomically.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use crate::config::Format;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(config_sha256: impl Into<String>) -> Self {
        Self {
            config_sha256: config_sha256.into(),
        }
    }

    pub fn csv_line(&self) -> String {
        format!("# macrokin {VERSION} config-sha256={}\n", self.config_sha256)
    }

    pub fn json(&self) -> Value {
        json!({ "tool": "macrokin", "version": VERSION, "config_sha256": self.config_sha256 })
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::file(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::file(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::file(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::file(path, e))?;
    tmp.persist(path).map_err(|e| CliError::file(path, e.error))?;
    Ok(())
}

/// CSV text: provenance line, extra `#` comment lines, header, rows.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(prov: &Provenance, comments: &[String], header: &[S]) -> Self {
        let mut text = prov.csv_line();
        for c in comments {
            let _ = writeln!(text, "# {c}");
        }
        let head: Vec<&str> = header.iter().map(AsRef::as_ref).collect();
        text.push_str(&head.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row<I, T>(&mut self, cells: I)
    where
        I: IntoIterator<Item = T>,
        T: std::fmt::Display,
    {
        let mut first = true;
        for c in cells {
            if !first {
                self.text.push(',');
            }
            first = false;
            let _ = write!(self.text, "{c}");
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Pretty JSON object with `provenance` merged in at the top level.
pub fn json_doc(prov: &Provenance, body: Value) -> String {
    let mut obj = match body {
        Value::Object(m) => m,
        other => {
            let mut m = serde_json::Map::new();
            m.insert("data".into(), other);
            m
        }
    };
    obj.insert("provenance".into(), prov.json());
    let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json serializes");
    s.push('\n');
    s
}

/// A table that renders as CSV (`#` comments, header, rows) or as a JSON
/// object with `comments`, `columns` and `rows`.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            comments: Vec::new(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn render(&self, prov: &Provenance, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut csv = Csv::new(prov, &self.comments, &self.header);
                for row in &self.rows {
                    csv.row(row.iter().map(cell));
                }
                csv.finish()
            }
            Format::Json => json_doc(
                prov,
                json!({ "comments": self.comments, "columns": self.header, "rows": self.rows }),
            ),
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// JSON-safe float: non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_provenance_and_header() {
        let prov = Provenance::new("abc");
        let mut csv = Csv::new(&prov, &["model=x".to_string()], &["t", "A"]);
        csv.row([0.5, 2.0]);
        let text = csv.finish();
        assert_eq!(text, format!("# macrokin {VERSION} config-sha256=abc\n# model=x\nt,A\n0.5,2\n"));
    }

    #[test]
    fn table_renders_both_formats() {
        let prov = Provenance::new("h");
        let mut t = Table::new(["rank", "word", "count"]);
        t.rows.push(vec![json!(1), json!("ab"), json!(7)]);
        let csv = t.render(&prov, Format::Csv);
        assert!(csv.ends_with("rank,word,count\n1,ab,7\n"));
        let v: Value = serde_json::from_str(&t.render(&prov, Format::Json)).unwrap();
        assert_eq!(v["rows"][0][1], "ab");
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("f.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn json_doc_is_sorted_and_stamped() {
        let doc = json_doc(&Provenance::new("h"), json!({"b": 1, "a": num(f64::NAN)}));
        let v: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["provenance"]["config_sha256"], "h");
        assert!(v["a"].is_null());
        assert!(doc.find("\"a\"").unwrap() < doc.find("\"b\"").unwrap());
    }
}
