//! Delimiter-separated tables with a leading `#` comment line.

use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra `#` lines written after the header comment.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Values of column `name` across rows matching every `(column, value)` filter.
    pub fn select<'a>(&'a self, name: &str, filters: &[(&str, &str)]) -> Vec<&'a str> {
        let Some(col) = self.column(name) else {
            return Vec::new();
        };
        let idx: Vec<(usize, &str)> = filters
            .iter()
            .filter_map(|(c, v)| self.column(c).map(|i| (i, *v)))
            .collect();
        if idx.len() != filters.len() {
            return Vec::new();
        }
        self.rows
            .iter()
            .filter(|r| idx.iter().all(|(i, v)| r[*i] == *v))
            .map(|r| r[col].as_str())
            .collect()
    }

    pub fn write_to<W: Write>(&self, w: &mut W, header: &str, delim: char) -> io::Result<()> {
        writeln!(w, "# {header}")?;
        for n in &self.notes {
            writeln!(w, "# {n}")?;
        }
        let cells = |row: &mut dyn Iterator<Item = &str>| -> String {
            let mut line = String::new();
            for (i, c) in row.enumerate() {
                if i > 0 {
                    line.push(delim);
                }
                line.push_str(&escape(c, delim));
            }
            line
        };
        writeln!(w, "{}", cells(&mut self.columns.iter().copied()))?;
        for r in &self.rows {
            writeln!(w, "{}", cells(&mut r.iter().map(String::as_str)))?;
        }
        Ok(())
    }

    pub fn to_string_with(&self, header: &str, delim: char) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf, header, delim).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8 cells")
    }
}

fn escape(cell: &str, delim: char) -> String {
    if cell.contains(delim) || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Shortest round-trip scientific form, so tables are stable across runs.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
