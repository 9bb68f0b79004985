//! Named verification results shared by the library, the CLI and the test suites.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Where a reference value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    /// A published identity or bound.
    Reference,
    /// Follows immediately from the definitions.
    Trivial,
    /// Computed here by an independent oracle or threshold run.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub anchor: String,
    pub computed: Vec<f64>,
    pub reference: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: Provenance,
    pub params: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Kept out of the serialized check so reports are byte-deterministic.
    #[serde(skip)]
    pub wall_time: Duration,
    #[serde(skip)]
    rule: Option<Rule>,
}

/// How `pass` was decided, so a tolerance rescale can re-judge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    AgainstReference,
    AtMost,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, provenance: Provenance) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            computed: Vec::new(),
            reference: Vec::new(),
            tolerance: 0.0,
            pass: false,
            provenance,
            params: BTreeMap::new(),
            note: None,
            wall_time: Duration::ZERO,
            rule: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn computed(mut self, v: Vec<f64>) -> Self {
        self.computed = v;
        self
    }

    pub fn reference(mut self, v: Vec<f64>) -> Self {
        self.reference = v;
        self
    }

    pub fn tolerance(mut self, t: f64) -> Self {
        self.tolerance = t;
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.note = Some(s.into());
        self
    }

    pub fn pass(mut self, p: bool) -> Self {
        self.pass = p;
        self
    }

    /// Pass iff every computed value is within `tolerance` of its reference.
    pub fn judge_against_reference(mut self) -> Self {
        self.rule = Some(Rule::AgainstReference);
        self.pass = self.computed.len() == self.reference.len()
            && self
                .computed
                .iter()
                .zip(&self.reference)
                .all(|(c, r)| c.is_finite() && (c - r).abs() <= self.tolerance);
        self
    }

    /// Pass iff every computed value is at most `tolerance`.
    pub fn judge_at_most(mut self) -> Self {
        self.rule = Some(Rule::AtMost);
        self.pass = !self.computed.is_empty() && self.computed.iter().all(|c| c.is_finite() && *c <= self.tolerance);
        self
    }

    /// Multiplies the tolerance by `factor` and re-judges. Checks with a
    /// composite pass rule keep their verdict.
    pub fn rescale_tolerance(mut self, factor: f64) -> Self {
        if factor == 1.0 {
            return self;
        }
        self.tolerance *= factor;
        self = self.param("tol_scale", factor);
        match self.rule {
            Some(Rule::AgainstReference) => self.judge_against_reference(),
            Some(Rule::AtMost) => self.judge_at_most(),
            None => self,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wall_time_is_not_serialized() {
        let mut r = CheckReport::new("x", "a = a", Provenance::Trivial).computed(vec![1.0]).reference(vec![1.0]);
        r.wall_time = Duration::from_millis(5);
        let s = serde_json::to_string(&r).unwrap();
        assert!(!s.contains("wall"));
        assert!(s.contains("\"TRIVIAL\""));
    }

    #[test]
    fn judging() {
        let r = CheckReport::new("x", "", Provenance::Derived).computed(vec![1.0, 2.0]).reference(vec![1.0, 2.1]).tolerance(0.2);
        assert!(r.clone().judge_against_reference().pass);
        assert!(!r.tolerance(0.01).judge_against_reference().pass);
        let tight = CheckReport::new("z", "", Provenance::Derived).computed(vec![0.5]).tolerance(0.4).judge_at_most();
        assert!(!tight.pass);
        assert!(tight.rescale_tolerance(2.0).pass);
        assert!(!CheckReport::new("y", "", Provenance::Derived).computed(vec![f64::NAN]).tolerance(1.0).judge_at_most().pass);
    }
}
