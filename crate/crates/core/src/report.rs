//! Serializable record of one experiment.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::verify::{CriterionReport, GofResult};

/// Output file format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Parameter(format!("unknown format {other:?}"))),
        }
    }
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(default)]
    pub p_value: Option<f64>,
}

impl TestVerdict {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
            p_value: None,
        }
    }

    pub fn from_gof(name: impl Into<String>, gof: &GofResult) -> Self {
        Self {
            name: name.into(),
            passed: gof.pass,
            detail: format!(
                "chi-square {:.4} on {} dof, p = {:.4} (threshold {}), n = {}",
                gof.statistic, gof.dof, gof.p_value, gof.threshold, gof.samples
            ),
            p_value: Some(gof.p_value),
        }
    }
}

impl From<&CriterionReport> for TestVerdict {
    fn from(c: &CriterionReport) -> Self {
        Self {
            name: format!("{:02} {}", c.id, c.name),
            passed: c.passed,
            detail: c.detail.clone(),
            p_value: c.p_value,
        }
    }
}

/// Parameters, seeds, measured metrics, verdicts and optional per-trial
/// rows of an experiment. Maps are ordered, so the JSON form is canonical.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub seeds: Vec<u64>,
    pub metrics: BTreeMap<String, f64>,
    pub tests: Vec<TestVerdict>,
    #[serde(default)]
    pub rows: Vec<BTreeMap<String, Value>>,
    pub wall_clock_seconds: f64,
}

impl ReportDocument {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn metric(&mut self, key: &str, value: f64) -> &mut Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn test(&mut self, verdict: TestVerdict) -> &mut Self {
        self.tests.push(verdict);
        self
    }

    pub fn all_passed(&self) -> bool {
        self.tests.iter().all(|t| t.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        // Round-trip through `Value` so nested maps are key-sorted as well.
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&value)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV with one line per row when rows are present, otherwise one
    /// `metric,value` line per metric.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(["metric", "value"])?;
            for (k, v) in &self.metrics {
                w.write_record([k.as_str(), &v.to_string()])?;
            }
        } else {
            let mut columns: Vec<&String> = self.rows.iter().flat_map(|r| r.keys()).collect();
            columns.sort();
            columns.dedup();
            w.write_record(&columns)?;
            for row in &self.rows {
                let cells: Vec<String> = columns
                    .iter()
                    .map(|c| match row.get(*c) {
                        None | Some(Value::Null) => String::new(),
                        Some(Value::String(s)) => s.clone(),
                        Some(v) => v.to_string(),
                    })
                    .collect();
                w.write_record(&cells)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
    }

    pub fn emit(&self, path: impl AsRef<Path>, format: Format) -> Result<()> {
        let text = match format {
            Format::Json => self.to_json()?,
            Format::Csv => self.to_csv()?,
        };
        fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReportDocument {
        let mut doc = ReportDocument::new("demo");
        doc.param("epsilon", 0.1).param("gamma", 20);
        doc.metric("zeta", 1.0).metric("alpha", 0.5);
        doc.seeds = vec![7];
        doc.test(TestVerdict::new("check", true, "fine"));
        doc
    }

    #[test]
    fn json_round_trip_and_order() {
        let doc = sample();
        let text = doc.to_json().unwrap();
        assert_eq!(ReportDocument::from_json(&text).unwrap(), doc);
        assert!(text.find("\"alpha\"").unwrap() < text.find("\"zeta\"").unwrap());
        assert_eq!(text, sample().to_json().unwrap());
    }

    #[test]
    fn csv_shapes() {
        let mut doc = sample();
        assert_eq!(doc.to_csv().unwrap().lines().count(), 3);
        for i in 0..5 {
            doc.rows
                .push(BTreeMap::from([("trial".to_string(), Value::from(i))]));
        }
        assert_eq!(doc.to_csv().unwrap().lines().count(), 6);
    }

    #[test]
    fn verdicts() {
        let mut doc = sample();
        assert!(doc.all_passed());
        doc.test(TestVerdict::new("other", false, ""));
        assert!(!doc.all_passed());
    }
}
