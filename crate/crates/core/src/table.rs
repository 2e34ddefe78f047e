//! Column-oriented result tables with CSV and JSON output.
//!
//! CSV output has one header row and one row per entry. Reals are written in
//! scientific notation with 17 significant digits, which round-trips every
//! `f64`; missing values are written as `NaN`.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::analysis::{ErrorSource, SignCase};
use crate::error::{Result, VideError};
use crate::mesh::Mesh;
use crate::problems::ProblemSpec;
use crate::stepper::ImplicitSolveConfig;
use crate::trajectory::{Divergence, Method};

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Index(Vec<usize>),
    Real(Vec<f64>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Index(v) => v.len(),
            ColumnData::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cell(&self, row: usize) -> String {
        match self {
            ColumnData::Index(v) => v[row].to_string(),
            ColumnData::Real(v) => format_real(v[row]),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            ColumnData::Index(v) => json!(v),
            ColumnData::Real(v) => json!(v),
        }
    }
}

fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TableMetadata {
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<Mesh>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<ImplicitSolveConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_source: Option<ErrorSource>,
    /// Growth rate `L`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_case: Option<SignCase>,
    /// Maximum of `|C̃_i h / L|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_error: Option<f64>,
    pub diverged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<Divergence>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub metadata: TableMetadata,
}

impl ResultTable {
    pub fn new(metadata: TableMetadata) -> Self {
        ResultTable {
            columns: Vec::new(),
            metadata,
        }
    }

    /// Number of rows; zero for a table without columns.
    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, |c| c.data.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&mut self, name: &str, data: ColumnData) -> Result<()> {
        if !self.columns.is_empty() && data.len() != self.len() {
            return Err(VideError::LengthMismatch {
                expected: self.len(),
                found: data.len(),
            });
        }
        self.columns.push(Column {
            name: name.to_string(),
            data,
        });
        Ok(())
    }

    pub fn push_index(&mut self, name: &str, values: Vec<usize>) -> Result<()> {
        self.push(name, ColumnData::Index(values))
    }

    pub fn push_real(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        self.push(name, ColumnData::Real(values))
    }

    /// Missing entries become `NaN`.
    pub fn push_optional(&mut self, name: &str, values: Vec<Option<f64>>) -> Result<()> {
        self.push_real(
            name,
            values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
        )
    }

    pub fn column(&self, name: &str) -> Option<&ColumnData> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| &c.data)
    }

    pub fn real(&self, name: &str) -> Option<&[f64]> {
        match self.column(name)? {
            ColumnData::Real(v) => Some(v),
            ColumnData::Index(_) => None,
        }
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in 0..self.len() {
            out.write_record(self.columns.iter().map(|c| c.data.cell(row)))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is ascii"))
    }

    pub fn metadata_json(&self) -> Result<Value> {
        Ok(serde_json::to_value(&self.metadata)?)
    }

    /// Columns and metadata as one JSON document. Non-finite reals become
    /// `null`.
    pub fn to_json(&self) -> Result<Value> {
        let columns: Map<String, Value> = self
            .columns
            .iter()
            .map(|c| (c.name.clone(), c.data.to_json()))
            .collect();
        Ok(json!({ "columns": columns, "metadata": self.metadata_json()? }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new(TableMetadata {
            experiment: "sample".into(),
            ..Default::default()
        });
        t.push_index("i", vec![0, 1, 2]).unwrap();
        t.push_real("x", vec![0.0, 0.1, 0.2]).unwrap();
        t.push_optional("c", vec![None, Some(1.0 / 3.0), Some(-2.5e-8)])
            .unwrap();
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv_string().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "i,x,c");
        assert_eq!(lines[1], "0,0.0000000000000000e0,NaN");
        assert_eq!(lines[2], "1,1.0000000000000001e-1,3.3333333333333331e-1");
        assert_eq!(lines[3], "2,2.0000000000000001e-1,-2.4999999999999999e-8");
    }

    #[test]
    fn csv_reals_round_trip() {
        let csv = sample().to_csv_string().unwrap();
        let third: f64 = csv
            .lines()
            .nth(2)
            .unwrap()
            .split(',')
            .nth(2)
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(third, 1.0 / 3.0);
    }

    #[test]
    fn ragged_columns_are_rejected() {
        let mut t = sample();
        assert!(matches!(
            t.push_real("bad", vec![1.0]),
            Err(VideError::LengthMismatch {
                expected: 3,
                found: 1
            })
        ));
    }

    #[test]
    fn json_document() {
        let v = sample().to_json().unwrap();
        assert_eq!(v["columns"]["i"], json!([0, 1, 2]));
        assert!(v["columns"]["c"][0].is_null());
        assert_eq!(v["metadata"]["experiment"], "sample");
        assert_eq!(v["metadata"]["diverged"], false);
    }
}
