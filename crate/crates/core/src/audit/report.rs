use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use super::witness::Witness;
use crate::error::{Error, Result};
use crate::forms::IntegralResult;

/// Pass/fail outcome of one identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub tolerance: f64,
    /// The compared discrepancy.
    pub observed: f64,
    /// Quantities the verdict is about.
    pub quantities: Vec<String>,
}

/// A machine-readable audit result. Maps are ordered, so serialisation is
/// deterministic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub command: String,
    pub tool_version: String,
    pub map_source: String,
    pub config: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub quantities: BTreeMap<String, IntegralResult>,
    pub certificates: BTreeMap<String, Value>,
    pub verdicts: Vec<Verdict>,
    pub witnesses: Vec<Witness>,
}

impl AuditReport {
    pub fn new(command: &str, map_source: &str) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            map_source: map_source.to_string(),
            config: BTreeMap::new(),
            seed: None,
            quantities: BTreeMap::new(),
            certificates: BTreeMap::new(),
            verdicts: Vec::new(),
            witnesses: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn set_config(&mut self, key: &str, value: impl Serialize) {
        self.config.insert(key.to_string(), to_value(value));
    }

    pub fn quantity(&mut self, name: &str, value: IntegralResult) {
        self.quantities.insert(name.to_string(), value);
    }

    pub fn certificate(&mut self, name: &str, value: impl Serialize) {
        self.certificates.insert(name.to_string(), to_value(value));
    }

    pub fn witness(&mut self, w: Witness) {
        self.witnesses.push(w);
    }

    /// Records `observed <= tolerance` as a verdict on named quantities,
    /// all of which must already be in the report.
    pub fn verdict(&mut self, name: &str, observed: f64, tolerance: f64, quantities: &[&str]) -> Result<bool> {
        for q in quantities {
            if !self.quantities.contains_key(*q) {
                return Err(Error::InvalidParameter(format!(
                    "verdict {name} refers to missing quantity {q}"
                )));
            }
        }
        let pass = observed <= tolerance;
        self.verdicts.push(Verdict {
            name: name.to_string(),
            pass,
            tolerance,
            observed,
            quantities: quantities.iter().map(|q| q.to_string()).collect(),
        });
        Ok(pass)
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn failed_verdicts(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.pass).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values serialise")
    }
}

fn to_value(v: impl Serialize) -> Value {
    // non-finite floats serialise as null
    serde_json::to_value(v).unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_need_quantities() {
        let mut r = AuditReport::new("integrate", "identity");
        assert!(r.verdict("v", 0.0, 1.0, &["missing"]).is_err());
        r.quantity("a", IntegralResult::exact(1.0, 8));
        assert!(r.verdict("v", 0.5, 1.0, &["a"]).unwrap());
        assert!(!r.verdict("w", 2.0, 1.0, &["a"]).unwrap());
        assert!(!r.passed());
        assert_eq!(r.failed_verdicts().len(), 1);
        let json = r.to_json();
        let back: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["quantities"]["a"]["value"], 1.0);
        assert_eq!(back["verdicts"][0]["pass"], true);
    }
}
