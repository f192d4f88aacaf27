//! Versioned JSON payloads shared by the CLI and the C interface.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::decider::{verify_certificate, Answer, Certificate, Method, PgstVerdict};

pub const SCHEMA_VERSION: u32 = 1;

/// Envelope for every CLI command.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub timing_ms: f64,
}

/// Failure envelope; `reason` is a stable token for refusals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorReport {
    pub schema_version: u32,
    pub command: String,
    pub error: ErrorBody,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub reason: String,
    pub message: String,
}

/// Cross-check of a special decider against the general one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub method: Method,
    pub answer: Answer,
    pub agree: bool,
}

/// JSON form of a verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub schema_version: u32,
    pub n: usize,
    pub m: u64,
    pub state_spec: String,
    pub answer: Answer,
    /// `general_lattice`, `S_sets`, `R_sets`, `corollary` or `auto`.
    pub method: String,
    /// The decider that produced the certificate when `method` is `auto`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decided_by: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
    pub support: Vec<usize>,
    pub certificate: Certificate,
}

fn method_name(method: Method) -> String {
    match serde_json::to_value(method) {
        Ok(Value::String(s)) => s,
        _ => unreachable!("methods serialize as strings"),
    }
}

impl VerdictJson {
    pub fn new(verdict: &PgstVerdict, state_spec: String) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n: verdict.n,
            m: verdict.m,
            state_spec,
            answer: verdict.answer,
            method: method_name(verdict.method),
            decided_by: None,
            cross_check: None,
            support: verdict.support.clone(),
            certificate: verdict.certificate.clone(),
        }
    }

    /// Mark as produced by automatic method selection.
    pub fn auto(mut self, cross_check: Option<CrossCheck>) -> Self {
        let decided_by = serde_json::from_value(Value::String(self.method.clone())).ok();
        self.method = "auto".into();
        self.decided_by = decided_by;
        self.cross_check = cross_check;
        self
    }

    /// The verdict behind this record, for re-verification.
    pub fn verdict(&self) -> Result<PgstVerdict, String> {
        let method = match self.decided_by {
            Some(m) => m,
            None => serde_json::from_value(Value::String(self.method.clone()))
                .map_err(|_| format!("unknown method {:?}", self.method))?,
        };
        if self.m != self.n as u64 + 1 {
            return Err(format!("m = {} does not equal n + 1 = {}", self.m, self.n + 1));
        }
        Ok(PgstVerdict {
            n: self.n,
            m: self.m,
            answer: self.answer,
            method,
            support: self.support.clone(),
            certificate: self.certificate.clone(),
        })
    }

    pub fn check(&self) -> Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {}", self.schema_version));
        }
        verify_certificate(&self.verdict()?)
    }
}

/// Accepts a bare verdict or a full `decide` report.
pub fn parse_verdict_document(text: &str) -> Result<VerdictJson, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let inner = match value.get("results") {
        Some(results) => results.clone(),
        None => value,
    };
    serde_json::from_value(inner).map_err(|e| format!("not a verdict: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decider::decide_pgst_general;
    use crate::state::PureState;

    #[test]
    fn verdict_round_trip_and_check() {
        let v = decide_pgst_general(&PureState::vertex(11, 1).unwrap()).unwrap();
        let json = VerdictJson::new(&v, "1:1".into());
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.contains("\"method\":\"general_lattice\""));
        let back = parse_verdict_document(&text).unwrap();
        assert_eq!(back, json);
        back.check().unwrap();

        let auto = json.clone().auto(None);
        assert_eq!(auto.method, "auto");
        assert_eq!(auto.decided_by, Some(Method::GeneralLattice));
        auto.check().unwrap();

        let mut wrong = json;
        wrong.answer = Answer::Yes;
        assert!(wrong.check().is_err());
    }
}
