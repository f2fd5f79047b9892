//! Versioned CSV tables.
//!
//! Every file starts with a `# <schema> v<version>` line followed by the
//! column header. Fields are comma-separated with `\n` line endings; floats
//! carry 17 significant digits so they parse back to the same bits.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::format_f64;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// One CSV field.
pub fn float(v: f64) -> String {
    format_f64(v)
}

pub fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

impl Table {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        Self {
            schema: schema.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.schema);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# {} v{}\n{}\n", self.schema, SCHEMA_VERSION, self.columns.join(","));
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let first = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))?;
        let (schema, version) = first
            .strip_prefix("# ")
            .and_then(|s| s.rsplit_once(" v"))
            .ok_or_else(|| Error::Format(format!("missing schema line, found `{first}`")))?;
        if version.parse::<u32>() != Ok(SCHEMA_VERSION) {
            return Err(Error::Format(format!("unsupported schema version `{version}`")));
        }
        let header = lines.next().ok_or_else(|| Error::Format("missing CSV header".into()))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for line in lines {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != columns.len() {
                return Err(Error::Format(format!(
                    "row has {} fields, header has {}",
                    row.len(),
                    columns.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self {
            schema: schema.into(),
            columns,
            rows,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec!["1".into(), float(0.1)]);
        t.push(vec!["2".into(), opt_float(None)]);
        let text = t.to_csv();
        assert!(text.starts_with("# demo v1\na,b\n1,1.0000000000000001e-1\n"));
        let back = Table::parse(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.rows[0][1].parse::<f64>().unwrap(), 0.1);
        assert!(Table::parse("a,b\n1,2\n").is_err());
        assert!(Table::parse("# demo v1\na,b\n1\n").is_err());
    }

    #[test]
    fn header_only() {
        let t = Table::new("empty", &["x"]);
        assert_eq!(t.to_csv(), "# empty v1\nx\n");
        assert!(Table::parse(&t.to_csv()).unwrap().rows.is_empty());
    }
}
