//! Column tables written as CSV with a `#`-prefixed comment header.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { comments: Vec::new(), columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidParameter(format!(
                "row has {} values but table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Write the comment block followed by the CSV body. Values use the
    /// shortest round-trip representation, so identical inputs give
    /// byte-identical output.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for line in &self.comments {
            writeln!(out, "# {line}")?;
        }
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    /// Inverse of [`Table::to_csv_string`].
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let comments = text.lines().map_while(|l| l.strip_prefix("# ")).map(str::to_string).collect();
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let columns = reader.headers()?.iter().map(str::to_string).collect();
        let mut t = Table { comments, columns, rows: Vec::new() };
        for record in reader.records() {
            let row = record?
                .iter()
                .map(|v| v.trim().parse::<f64>().map_err(|e| Error::InvalidParameter(format!("bad number `{v}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            t.push_row(row)?;
        }
        Ok(t)
    }
}
