use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// Outcome of one inequality or identity check.
///
/// `margin = rhs - lhs`; a report passes exactly when
/// `margin ≥ -error_budget`. Certified-exact reports carry a zero budget.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub check_id: String,
    pub inputs: BTreeMap<String, String>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub certified_exact: bool,
    pub error_budget: f64,
    pub status: Status,
    pub diagnostics: Vec<String>,
}

/// 17 significant digits.
pub fn real_string(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl VerificationReport {
    fn base(check_id: &str, inputs: BTreeMap<String, String>) -> Self {
        VerificationReport {
            check_id: check_id.to_string(),
            inputs,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            certified_exact: false,
            error_budget: 0.0,
            status: Status::Inconclusive,
            diagnostics: Vec::new(),
        }
    }

    /// Numeric inequality `lhs ≤ rhs` with an absolute error budget.
    pub fn numeric(
        check_id: &str,
        inputs: BTreeMap<String, String>,
        lhs: f64,
        rhs: f64,
        error_budget: f64,
    ) -> Self {
        let margin = rhs - lhs;
        let status = if margin.is_nan() || error_budget.is_nan() {
            Status::Inconclusive
        } else if margin >= -error_budget {
            Status::Pass
        } else {
            Status::Fail
        };
        VerificationReport {
            lhs,
            rhs,
            margin,
            error_budget,
            status,
            ..Self::base(check_id, inputs)
        }
    }

    /// Exactly decided statement; `lhs`, `rhs` are representative values.
    pub fn exact(
        check_id: &str,
        inputs: BTreeMap<String, String>,
        lhs: f64,
        rhs: f64,
        holds: bool,
    ) -> Self {
        VerificationReport {
            lhs,
            rhs,
            margin: rhs - lhs,
            certified_exact: true,
            status: if holds { Status::Pass } else { Status::Fail },
            ..Self::base(check_id, inputs)
        }
    }

    pub fn inconclusive(check_id: &str, inputs: BTreeMap<String, String>, reason: String) -> Self {
        let mut r = Self::base(check_id, inputs);
        r.diagnostics.push(reason);
        r
    }

    pub fn with_diagnostic(mut self, note: impl Into<String>) -> Self {
        self.diagnostics.push(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl Serialize for VerificationReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("VerificationReport", 9)?;
        st.serialize_field("check_id", &self.check_id)?;
        st.serialize_field("inputs", &self.inputs)?;
        st.serialize_field("lhs", &real_string(self.lhs))?;
        st.serialize_field("rhs", &real_string(self.rhs))?;
        st.serialize_field("margin", &real_string(self.margin))?;
        st.serialize_field("certified_exact", &self.certified_exact)?;
        st.serialize_field("error_budget", &real_string(self.error_budget))?;
        st.serialize_field("status", &self.status)?;
        st.serialize_field("diagnostics", &self.diagnostics)?;
        st.end()
    }
}

pub fn reports_to_json(reports: &[VerificationReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialise");
    s.push('\n');
    s
}

pub const TSV_HEADER: &str = "check_id\tstatus\tmargin";

pub fn reports_to_tsv(reports: &[VerificationReport]) -> String {
    let mut out = String::from(TSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!("{}\t{}\t{}\n", r.check_id, r.status, real_string(r.margin)));
    }
    out
}

/// Overall status of a batch: any failure wins, then any inconclusive.
pub fn overall(reports: &[VerificationReport]) -> Status {
    if reports.iter().any(|r| r.status == Status::Fail) {
        Status::Fail
    } else if reports.iter().any(|r| r.status == Status::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_decides_status() {
        let inputs = BTreeMap::new();
        assert_eq!(VerificationReport::numeric("x", inputs.clone(), 1.0, 2.0, 0.0).status, Status::Pass);
        assert_eq!(
            VerificationReport::numeric("x", inputs.clone(), 1.0 + 1e-9, 1.0, 1e-8).status,
            Status::Pass
        );
        assert_eq!(VerificationReport::numeric("x", inputs.clone(), 2.0, 1.0, 0.5).status, Status::Fail);
        assert_eq!(
            VerificationReport::numeric("x", inputs, f64::NAN, 1.0, 0.0).status,
            Status::Inconclusive
        );
    }

    #[test]
    fn json_reals_are_strings() {
        let r = VerificationReport::exact("conv01", BTreeMap::new(), 1.0, 1.0, true);
        let js = reports_to_json(&[r]);
        assert!(js.contains("\"lhs\": \"1.0000000000000000e0\""));
        assert!(js.contains("\"status\": \"pass\""));
        assert!(js.contains("\"error_budget\": \"0.0000000000000000e0\""));
    }

    #[test]
    fn overall_precedence() {
        let p = VerificationReport::exact("a", BTreeMap::new(), 0.0, 0.0, true);
        let f = VerificationReport::exact("a", BTreeMap::new(), 0.0, 0.0, false);
        let i = VerificationReport::inconclusive("a", BTreeMap::new(), "x".into());
        assert_eq!(overall(&[p.clone()]), Status::Pass);
        assert_eq!(overall(&[p.clone(), i.clone()]), Status::Inconclusive);
        assert_eq!(overall(&[i, f, p]), Status::Fail);
    }
}
