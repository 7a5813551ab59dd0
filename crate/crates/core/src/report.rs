//! Run reports: a deterministic body (text or JSON) plus the wall time, which
//! is kept out of the body.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    /// Fingerprints of the input files or generated corpora, in input order.
    pub inputs: Vec<String>,
    pub seed: u64,
    pub budgets: Value,
    pub outcome: Outcome,
    /// Command-specific results.
    pub details: Value,
    pub witness: Option<Value>,
    #[serde(skip)]
    pub wall_ms: u128,
}

impl RunReport {
    pub fn new(command: impl Into<String>, seed: u64, budgets: Value) -> Self {
        RunReport {
            command: command.into(),
            inputs: Vec::new(),
            seed,
            budgets,
            outcome: Outcome::Pass,
            details: Value::Object(Default::default()),
            witness: None,
            wall_ms: 0,
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        if let Value::Object(map) = &mut self.details {
            map.insert(key.to_string(), v);
        }
    }

    pub fn fail_with(&mut self, witness: impl Serialize) {
        self.outcome = Outcome::Fail;
        self.witness = Some(serde_json::to_value(witness).expect("witness serializes"));
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `key: value` lines; nested values are written as compact JSON.
    pub fn text(&self) -> String {
        let mut out = format!("command: {}\n", self.command);
        for (i, f) in self.inputs.iter().enumerate() {
            out.push_str(&format!("input[{i}]: {f}\n"));
        }
        out.push_str(&format!("seed: {}\n", self.seed));
        out.push_str(&format!("budgets: {}\n", self.budgets));
        if let Value::Object(map) = &self.details {
            for (k, v) in map {
                match v {
                    Value::String(s) if !s.contains('\n') => out.push_str(&format!("{k}: {s}\n")),
                    Value::String(s) => {
                        out.push_str(&format!("{k}:\n"));
                        for line in s.lines() {
                            out.push_str(&format!("  {line}\n"));
                        }
                    }
                    other => out.push_str(&format!("{k}: {other}\n")),
                }
            }
        }
        let outcome = match self.outcome {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
        };
        out.push_str(&format!("outcome: {outcome}\n"));
        if let Some(w) = &self.witness {
            out.push_str(&format!("witness: {w}\n"));
        }
        out
    }
}
