//! Discrete tabular data bound to declared column domains.
//!
//! A [`Dataset`] stores one state index per cell, column-major. Numeric
//! columns keep the numeric value of each state so they can later be
//! binned, binarized or used as an identity utility.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{fmt_num, fnv1a, hex64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical,
    Ordinal,
    Integer,
    Continuous,
}

impl ColumnKind {
    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnKind::Integer | ColumnKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, alias = "states", skip_serializing_if = "Option::is_none")]
    pub declared_states: Option<Vec<String>>,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self {
            name: name.into(),
            kind,
            declared_states: None,
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Self::new(name, ColumnKind::Categorical)
    }

    pub fn ordinal<S: Into<String>>(name: impl Into<String>, states: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Ordinal,
            declared_states: Some(states.into_iter().map(Into::into).collect()),
        }
    }

    pub fn integer(name: impl Into<String>) -> Self {
        Self::new(name, ColumnKind::Integer)
    }

    pub fn continuous(name: impl Into<String>) -> Self {
        Self::new(name, ColumnKind::Continuous)
    }

    pub fn with_states<S: Into<String>>(mut self, states: impl IntoIterator<Item = S>) -> Self {
        self.declared_states = Some(states.into_iter().map(Into::into).collect());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidColumnSpec {
            column: self.name.clone(),
            reason: reason.to_string(),
        };
        if self.name.is_empty() {
            return Err(invalid("empty column name"));
        }
        match (&self.declared_states, self.kind) {
            (None, ColumnKind::Ordinal) => Err(invalid("ordinal columns need declared states")),
            (Some(states), kind) => {
                if kind == ColumnKind::Ordinal && states.len() < 2 {
                    return Err(invalid("ordinal columns need at least two states"));
                }
                if has_duplicates(states) {
                    return Err(invalid("duplicate state labels"));
                }
                if kind.is_numeric() {
                    for s in states {
                        if s.trim().parse::<f64>().is_err() {
                            return Err(invalid("declared numeric state is not a number"));
                        }
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn has_duplicates(states: &[String]) -> bool {
    let mut seen = BTreeMap::new();
    states.iter().any(|s| seen.insert(s.as_str(), ()).is_some())
}

/// One materialized column: declared domain plus per-row state indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    name: String,
    kind: ColumnKind,
    states: Vec<String>,
    values: Option<Vec<f64>>,
    bin_edges: Option<Vec<f64>>,
    codes: Vec<u32>,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind, states: Vec<String>, codes: Vec<u32>) -> Result<Self> {
        let name = name.into();
        if states.is_empty() {
            return Err(Error::InvalidColumnSpec {
                column: name,
                reason: "column has no states".to_string(),
            });
        }
        if has_duplicates(&states) {
            return Err(Error::InvalidColumnSpec {
                column: name,
                reason: "duplicate state labels".to_string(),
            });
        }
        if let Some(bad) = codes.iter().find(|&&c| c as usize >= states.len()) {
            return Err(Error::InvalidColumnSpec {
                column: name,
                reason: format!("state index {bad} out of range"),
            });
        }
        let values = parse_all(&states);
        Ok(Self {
            name,
            kind,
            states,
            values,
            bin_edges: None,
            codes,
        })
    }

    pub(crate) fn with_bin_edges(mut self, edges: Vec<f64>) -> Self {
        self.bin_edges = Some(edges);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ColumnKind {
        self.kind
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    /// Numeric value of every state, when all labels are numbers.
    pub fn numeric_values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    pub fn bin_edges(&self) -> Option<&[f64]> {
        self.bin_edges.as_deref()
    }

    pub fn state_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; self.states.len()];
        for &c in &self.codes {
            counts[c as usize] += 1;
        }
        counts
    }

    pub fn spec(&self) -> ColumnSpec {
        ColumnSpec {
            name: self.name.clone(),
            kind: self.kind,
            declared_states: Some(self.states.clone()),
        }
    }
}

fn parse_all(states: &[String]) -> Option<Vec<f64>> {
    states
        .iter()
        .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    n_rows: usize,
    dropped_rows: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        Self::with_dropped(columns, 0)
    }

    pub(crate) fn with_dropped(columns: Vec<Column>, dropped_rows: usize) -> Result<Self> {
        let n_rows = columns.first().map_or(0, |c| c.codes.len());
        if let Some(bad) = columns.iter().find(|c| c.codes.len() != n_rows) {
            return Err(Error::InvalidColumnSpec {
                column: bad.name.clone(),
                reason: "column length differs from the others".to_string(),
            });
        }
        let mut names = BTreeMap::new();
        for c in &columns {
            if names.insert(c.name.as_str(), ()).is_some() {
                return Err(Error::InvalidColumnSpec {
                    column: c.name.clone(),
                    reason: "duplicate column".to_string(),
                });
            }
        }
        if n_rows == 0 {
            return Err(Error::EmptyAfterCleaning { dropped: dropped_rows });
        }
        Ok(Self {
            columns,
            n_rows,
            dropped_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn require_column(&self, name: &str) -> Result<&Column> {
        self.column(name).ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn cell(&self, row: usize, column: usize) -> &str {
        let col = &self.columns[column];
        &col.states[col.codes[row] as usize]
    }

    /// Returns a copy with `column` replacing the column of the same name
    /// (or appended when the name is new).
    pub fn with_column(&self, column: Column) -> Result<Self> {
        let mut columns = self.columns.clone();
        match columns.iter().position(|c| c.name == column.name) {
            Some(i) => columns[i] = column,
            None => columns.push(column),
        }
        Self::with_dropped(columns, self.dropped_rows)
    }

    /// Stable content digest over column names, domains and cells.
    pub fn digest(&self) -> String {
        let mut buf = Vec::new();
        for c in &self.columns {
            buf.extend_from_slice(c.name.as_bytes());
            buf.push(0);
            for s in &c.states {
                buf.extend_from_slice(s.as_bytes());
                buf.push(1);
            }
            for code in &c.codes {
                buf.extend_from_slice(&code.to_le_bytes());
            }
        }
        hex64(fnv1a(&buf))
    }
}

/// Row-wise construction from string cells with missing-value dropping.
///
/// Every row with a missing cell (empty string or a registered missing
/// token) in any declared column is dropped and counted.
#[derive(Debug, Clone)]
pub struct DatasetBuilder {
    specs: Vec<ColumnSpec>,
    positions: Option<Vec<usize>>,
    missing_tokens: Vec<String>,
    cells: Vec<Vec<String>>,
    dropped: usize,
}

impl DatasetBuilder {
    pub fn new(specs: Vec<ColumnSpec>) -> Result<Self> {
        let mut names = BTreeMap::new();
        for s in &specs {
            s.validate()?;
            if names.insert(s.name.clone(), ()).is_some() {
                return Err(Error::InvalidColumnSpec {
                    column: s.name.clone(),
                    reason: "duplicate column".to_string(),
                });
            }
        }
        let cells = specs.iter().map(|_| Vec::new()).collect();
        Ok(Self {
            specs,
            positions: None,
            missing_tokens: Vec::new(),
            cells,
            dropped: 0,
        })
    }

    /// Binds spec columns to header positions. Extra header columns are ignored.
    pub fn with_header<S: AsRef<str>>(mut self, header: &[S]) -> Result<Self> {
        let mut positions = Vec::with_capacity(self.specs.len());
        for spec in &self.specs {
            let pos = header
                .iter()
                .position(|h| h.as_ref().trim() == spec.name)
                .ok_or_else(|| Error::HeaderMismatch(format!("column `{}` not in header", spec.name)))?;
            positions.push(pos);
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn missing_token(mut self, token: impl Into<String>) -> Self {
        self.missing_tokens.push(token.into());
        self
    }

    pub fn push_record<S: AsRef<str>>(&mut self, record: &[S]) -> Result<()> {
        let width = match &self.positions {
            Some(p) => p.iter().copied().max().map_or(0, |m| m + 1),
            None => self.specs.len(),
        };
        if record.len() < width {
            return Err(Error::HeaderMismatch(format!(
                "record has {} fields, expected at least {width}",
                record.len()
            )));
        }
        let pick = |i: usize| -> &str {
            let pos = self.positions.as_ref().map_or(i, |p| p[i]);
            record[pos].as_ref().trim()
        };
        let missing = (0..self.specs.len()).any(|i| {
            let v = pick(i);
            v.is_empty() || self.missing_tokens.iter().any(|t| t == v)
        });
        if missing {
            self.dropped += 1;
            return Ok(());
        }
        for i in 0..self.specs.len() {
            let v = pick(i).to_string();
            self.cells[i].push(v);
        }
        Ok(())
    }

    pub fn finish(self) -> Result<Dataset> {
        if self.cells.first().is_none_or(|c| c.is_empty()) {
            return Err(Error::EmptyAfterCleaning { dropped: self.dropped });
        }
        let mut columns = Vec::with_capacity(self.specs.len());
        for (spec, cells) in self.specs.into_iter().zip(self.cells) {
            columns.push(materialize(spec, cells)?);
        }
        Dataset::with_dropped(columns, self.dropped)
    }
}

fn materialize(spec: ColumnSpec, cells: Vec<String>) -> Result<Column> {
    let ColumnSpec {
        name,
        kind,
        declared_states,
    } = spec;
    if kind.is_numeric() {
        let expected = if kind == ColumnKind::Integer {
            "integer"
        } else {
            "number"
        };
        let parse = |v: &str| -> Result<f64> {
            let parsed = if kind == ColumnKind::Integer {
                v.parse::<i64>().map(|i| i as f64).ok()
            } else {
                v.parse::<f64>().ok().filter(|f| f.is_finite())
            };
            parsed.ok_or_else(|| Error::UnparseableCell {
                column: name.clone(),
                value: v.to_string(),
                expected,
            })
        };
        let numbers = cells.iter().map(|v| parse(v)).collect::<Result<Vec<f64>>>()?;
        let domain: Vec<f64> = match &declared_states {
            Some(states) => {
                let mut d = states.iter().map(|s| parse(s.trim())).collect::<Result<Vec<_>>>()?;
                d.sort_by(f64::total_cmp);
                d
            }
            None => {
                let mut d = numbers.clone();
                d.sort_by(f64::total_cmp);
                d.dedup();
                d
            }
        };
        let codes = numbers
            .iter()
            .zip(&cells)
            .map(|(v, raw)| {
                domain
                    .binary_search_by(|p| p.total_cmp(v))
                    .map(|i| i as u32)
                    .map_err(|_| Error::UnknownState {
                        column: name.clone(),
                        state: raw.clone(),
                    })
            })
            .collect::<Result<Vec<u32>>>()?;
        let labels = domain.iter().map(|&v| fmt_num(v)).collect();
        return Column::new(name, kind, labels, codes);
    }

    let states = match declared_states {
        Some(states) => states,
        None => {
            let mut s = cells.clone();
            s.sort();
            s.dedup();
            s
        }
    };
    let index: BTreeMap<&str, u32> = states.iter().enumerate().map(|(i, s)| (s.as_str(), i as u32)).collect();
    let codes = cells
        .iter()
        .map(|v| {
            index.get(v.as_str()).copied().ok_or_else(|| Error::UnknownState {
                column: name.clone(),
                state: v.clone(),
            })
        })
        .collect::<Result<Vec<u32>>>()?;
    Column::new(name, kind, states, codes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toy() -> Dataset {
        let mut b = DatasetBuilder::new(vec![ColumnSpec::categorical("x"), ColumnSpec::categorical("y")])
            .unwrap()
            .with_header(&["x", "y"])
            .unwrap();
        for r in [["a", "0"], ["a", "1"], ["b", "1"], ["b", "1"]] {
            b.push_record(&r).unwrap();
        }
        b.finish().unwrap()
    }

    #[test]
    fn toy_read_back() {
        let d = toy();
        assert_eq!(d.n_rows(), 4);
        assert_eq!(d.column("x").unwrap().states(), ["a", "b"]);
        assert_eq!(d.column("y").unwrap().states(), ["0", "1"]);
        assert_eq!(d.column("y").unwrap().codes(), [0, 1, 1, 1]);
    }

    #[test]
    fn empty_after_missing_drop() {
        let mut b = DatasetBuilder::new(vec![ColumnSpec::categorical("x"), ColumnSpec::categorical("y")]).unwrap();
        b.push_record(&["a", ""]).unwrap();
        assert_eq!(b.finish(), Err(Error::EmptyAfterCleaning { dropped: 1 }));
    }

    #[test]
    fn dropped_plus_retained_is_raw() {
        let mut b = DatasetBuilder::new(vec![ColumnSpec::categorical("x"), ColumnSpec::integer("h")])
            .unwrap()
            .missing_token("?");
        for r in [["a", "3"], ["?", "4"], ["b", ""], ["b", "7"], ["c", "1"]] {
            b.push_record(&r).unwrap();
        }
        let d = b.finish().unwrap();
        assert_eq!(d.n_rows() + d.dropped_rows(), 5);
        assert_eq!(d.dropped_rows(), 2);
        assert_eq!(d.column("h").unwrap().numeric_values(), Some(&[1.0, 3.0, 7.0][..]));
    }

    #[test]
    fn header_mismatch_and_bad_cells() {
        let b = DatasetBuilder::new(vec![ColumnSpec::categorical("wage")]).unwrap();
        assert!(matches!(b.with_header(&["x", "y"]), Err(Error::HeaderMismatch(_))));

        let mut b = DatasetBuilder::new(vec![ColumnSpec::integer("n")]).unwrap();
        b.push_record(&["1.5"]).unwrap();
        assert!(matches!(b.finish(), Err(Error::UnparseableCell { .. })));

        let mut b = DatasetBuilder::new(vec![ColumnSpec::ordinal("o", ["lo", "hi"])]).unwrap();
        b.push_record(&["mid"]).unwrap();
        assert!(matches!(b.finish(), Err(Error::UnknownState { .. })));
    }

    #[test]
    fn spec_invariants() {
        assert!(ColumnSpec::new("o", ColumnKind::Ordinal).validate().is_err());
        assert!(ColumnSpec::ordinal("o", ["a"]).validate().is_err());
        assert!(ColumnSpec::ordinal("o", ["a", "a"]).validate().is_err());
        assert!(ColumnSpec::ordinal("o", ["a", "b"]).validate().is_ok());
        assert!(ColumnSpec::categorical("c").with_states(["u", "u"]).validate().is_err());
    }

    #[test]
    fn declared_states_keep_unobserved() {
        let mut b = DatasetBuilder::new(vec![ColumnSpec::categorical("g").with_states(["f", "m", "x"])]).unwrap();
        b.push_record(&["m"]).unwrap();
        let d = b.finish().unwrap();
        assert_eq!(d.column("g").unwrap().state_counts(), [0, 1, 0]);
    }
}
