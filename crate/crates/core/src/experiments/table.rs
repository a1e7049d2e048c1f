//! Fixed-schema CSV tables with `# key=value` metadata lines.

use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// Full-precision decimal (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// Written as `# key=value` lines ahead of the header.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::MalformedTable(format!(
                "row has {} cells, header has {}",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.meta.push((key.to_string(), value)),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MalformedTable(format!("no column {name:?}")))
    }

    pub fn text(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    /// Column parsed as floats; empty cells become `None`.
    pub fn numeric(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let i = self.column_index(name)?;
        self.rows
            .iter()
            .map(|r| {
                let cell = r[i].trim();
                if cell.is_empty() {
                    return Ok(None);
                }
                cell.parse::<f64>().map(Some).map_err(|_| {
                    Error::MalformedTable(format!("column {name:?}: {cell:?} is not a number"))
                })
            })
            .collect()
    }

    /// Errors unless the header is exactly `columns`.
    pub fn expect_columns(&self, columns: &[&str]) -> Result<()> {
        if self.columns.iter().map(String::as_str).ne(columns.iter().copied()) {
            return Err(Error::MalformedTable(format!(
                "header {:?} does not match schema {:?}",
                self.columns, columns
            )));
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            if k.contains(['=', '\n']) || v.contains('\n') {
                return Err(Error::MalformedTable(format!("metadata {k:?} not representable")));
            }
            let _ = writeln!(out, "# {k}={v}");
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::MalformedTable(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv of utf-8 cells"));
        Ok(out)
    }

    pub fn from_csv_str(s: &str) -> Result<Table> {
        let mut meta = Vec::new();
        let mut body_start = 0;
        for line in s.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix('#') else { break };
            let rest = rest.trim();
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| Error::MalformedTable(format!("metadata line {rest:?} lacks '='")))?;
            meta.push((k.to_string(), v.to_string()));
            body_start += line.len();
        }
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(s[body_start..].as_bytes());
        let columns: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        if columns.is_empty() || columns.iter().all(String::is_empty) {
            return Err(Error::MalformedTable("missing header".into()));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(csv_err)?.iter().map(str::to_string).collect());
        }
        Ok(Table { meta, columns, rows })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?).map_err(|e| Error::io_at(path, e))
    }

    pub fn load(path: &Path) -> Result<Table> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        Table::from_csv_str(&s)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::MalformedTable(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_every_bit() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn round_trip() {
        let mut t = Table::new(&["kind", "x"]);
        t.set_meta("gamma_resolution", "h");
        t.set_meta("partial", "false");
        t.set_meta("partial", "true");
        t.push(vec!["bspline".into(), fmt_f64(0.1)]).unwrap();
        t.push(vec!["expsmooth".into(), String::new()]).unwrap();
        let s = t.to_csv_string().unwrap();
        assert!(s.starts_with("# gamma_resolution=h\n# partial=true\nkind,x\n"));
        let back = Table::from_csv_str(&s).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.numeric("x").unwrap(), vec![Some(0.1), None]);
        back.expect_columns(&["kind", "x"]).unwrap();
        assert!(back.expect_columns(&["kind"]).is_err());
        assert!(t.push(vec!["a".into()]).is_err());
    }

    #[test]
    fn malformed_inputs() {
        assert!(Table::from_csv_str("").is_err());
        assert!(Table::from_csv_str("# nokey\na,b\n").is_err());
        assert!(Table::from_csv_str("a,b\n1\n").is_err());
        let t = Table::from_csv_str("a,b\nx,1\n").unwrap();
        assert!(t.numeric("a").is_err());
        assert!(t.numeric("c").is_err());
    }
}
