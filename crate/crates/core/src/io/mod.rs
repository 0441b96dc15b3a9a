//! Line-oriented text formats.
//!
//! Every file starts with a `<kind> <version>` header. Records are one per
//! line, whitespace separated; blank lines and lines starting with `#` are
//! ignored. Reals are written in the shortest decimal form that reads back to
//! the same value. Parse errors carry 1-based line numbers.

mod descriptor;
mod metrics;
mod placement;
mod polyline;
mod trace;

pub use descriptor::{read_descriptor, read_descriptor_for_solving, write_descriptor};
pub use metrics::{read_metrics, write_metrics, MetricRecord};
pub use placement::{read_placement, write_placement};
pub use polyline::{read_polylines, Polylines};
pub use trace::{read_table, read_trace, write_table, write_trace, SolveTrace};

use std::str::FromStr;

use crate::error::{Error, Result};

pub(crate) fn real(v: f64) -> String {
    format!("{v:?}")
}

pub(crate) struct Records<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

pub(crate) struct Record<'a> {
    pub line: usize,
    pub fields: Vec<&'a str>,
}

impl<'a> Records<'a> {
    pub fn new(text: &'a str) -> Self {
        Records {
            lines: text.lines().enumerate(),
            line: 0,
        }
    }

    /// Line number of the last record returned.
    pub fn line(&self) -> usize {
        self.line
    }

    pub fn next_record(&mut self) -> Option<Record<'a>> {
        for (i, raw) in self.lines.by_ref() {
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            self.line = i + 1;
            return Some(Record {
                line: i + 1,
                fields: t.split_whitespace().collect(),
            });
        }
        None
    }

    /// Next record, which must start with `key`.
    pub fn expect(&mut self, key: &str) -> Result<Record<'a>> {
        match self.next_record() {
            Some(r) if r.fields[0] == key => Ok(r),
            Some(r) => Err(Error::format(r.line, format!("expected '{key}', found '{}'", r.fields[0]))),
            None => Err(Error::format(self.line + 1, format!("expected '{key}', found end of file"))),
        }
    }

    pub fn header(&mut self, kind: &str, version: u32) -> Result<()> {
        let r = self.expect(kind)?;
        r.arity(2)?;
        let v: u32 = r.parse(1)?;
        if v != version {
            return Err(Error::format(r.line, format!("unsupported {kind} version {v}, expected {version}")));
        }
        Ok(())
    }
}

impl Record<'_> {
    pub fn arity(&self, n: usize) -> Result<()> {
        if self.fields.len() != n {
            return Err(Error::format(
                self.line,
                format!("'{}' takes {} values, got {}", self.fields[0], n - 1, self.fields.len() - 1),
            ));
        }
        Ok(())
    }

    pub fn parse<T: FromStr>(&self, k: usize) -> Result<T> {
        let tok = self
            .fields
            .get(k)
            .ok_or_else(|| Error::format(self.line, format!("missing value {k} of '{}'", self.fields[0])))?;
        tok.parse()
            .map_err(|_| Error::format(self.line, format!("cannot parse '{tok}' in '{}'", self.fields[0])))
    }

    pub fn real(&self, k: usize) -> Result<f64> {
        let v: f64 = self.parse(k)?;
        if !v.is_finite() {
            return Err(Error::format(self.line, format!("non-finite value in '{}'", self.fields[0])));
        }
        Ok(v)
    }
}

/// Error at a record, for semantic checks after parsing.
pub(crate) fn at(line: usize, e: Error) -> Error {
    match e {
        Error::Format { .. } => e,
        other => Error::format(line, other.to_string()),
    }
}
