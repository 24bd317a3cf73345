//! Column tables and report documents, written as files under `--out` or
//! concatenated on standard output.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Cell {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Cell {
        Cell::Text(s)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Cell {
        Cell::Int(i as i64)
    }
}

/// 17 significant digits, so values round-trip.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Table {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// `{"columns": [...], "rows": [[...], ...]}`; keeps column order.
    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        serde_json::json!({ "columns": self.columns, "rows": Value::Array(rows) })
    }
}

/// One named output of a command.
pub enum Artifact {
    Table { name: String, table: Table },
    Report { name: String, value: Value },
}

impl Artifact {
    pub fn table(name: impl Into<String>, table: Table) -> Artifact {
        Artifact::Table { name: name.into(), table }
    }

    pub fn report(name: impl Into<String>, value: &impl Serialize) -> Result<Artifact, CliError> {
        let value = serde_json::to_value(value).map_err(|e| CliError::Input(e.to_string()))?;
        Ok(Artifact::Report { name: name.into(), value })
    }

    fn file_name(&self, format: Format) -> String {
        match self {
            Artifact::Table { name, .. } => format!("{name}.{}", format.extension()),
            Artifact::Report { name, .. } => format!("{name}.json"),
        }
    }

    fn render(&self, format: Format) -> String {
        match (self, format) {
            (Artifact::Table { table, .. }, Format::Csv) => table.to_csv(),
            (Artifact::Table { table, .. }, Format::Json) => pretty(&table.to_json()),
            (Artifact::Report { value, .. }, _) => pretty(value),
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Writes each artifact to `dir/<name>.<ext>`, or to `stdout` preceded by a
/// `# <file name>` line when no directory is given.
pub fn emit(artifacts: &[Artifact], format: Format, dir: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        for a in artifacts {
            std::fs::write(dir.join(a.file_name(format)), a.render(format))?;
        }
        return Ok(());
    }
    for a in artifacts {
        writeln!(stdout, "# {}", a.file_name(format))?;
        stdout.write_all(a.render(format).as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_through_csv() {
        for x in [0.1, -6.565, 1e-300, 123_456_789.123_456_78, 2.0f64.sqrt()] {
            let back: f64 = fmt_num(x).parse().unwrap();
            assert_eq!(back, x);
        }
    }

    #[test]
    fn csv_quotes_text_with_commas() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["x,y".into(), 1.0.into()]);
        assert_eq!(t.to_csv(), "a,b\n\"x,y\",1.0000000000000000e0\n");
    }

    #[test]
    fn json_keeps_column_order() {
        let mut t = Table::new(["z", "a"]);
        t.push(vec![true.into(), 3usize.into()]);
        let s = serde_json::to_string(&t.to_json()).unwrap();
        assert_eq!(s, r#"{"columns":["z","a"],"rows":[[true,3]]}"#);
    }
}
