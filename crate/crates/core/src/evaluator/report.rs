//! Security report and its text rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::requirements::RequirementVerdict;
use crate::device::{Definition1Verdict, FamilyId};
use crate::stats::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mechanism {
    /// Minimum read-out time.
    Mrt,
    /// Erasure upon read-out.
    Eur,
}

impl Mechanism {
    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Mrt => "MRT",
            Mechanism::Eur => "EUR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Levels {
    /// Δt_a / Δt_t, for MRT devices.
    pub l_bf: Option<f64>,
    /// (3/4)^ℓ, for EUR devices.
    pub l_guess: Option<f64>,
    /// The closed-form level that applies to the mechanism.
    pub analytic: f64,
    pub empirical: f64,
    pub empirical_ci95: Interval,
    pub empirical_trials: u64,
    pub empirical_strategy: String,
    pub empirical_reads: u64,
    /// Set when the attack budget was cut to keep the simulation tractable.
    pub empirical_budget_capped: bool,
    pub l_target: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Answer {
    pub id: String,
    pub topic: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecurityReport {
    pub family: FamilyId,
    pub mechanism: Mechanism,
    pub definition1: Definition1Verdict,
    pub levels: Levels,
    pub requirement_verdicts: Vec<RequirementVerdict>,
    pub questionnaire: Vec<Answer>,
    pub notes: Vec<String>,
    pub pass: bool,
}

fn format_margin(m: f64) -> String {
    if m == 0.0 || (1e-3..1e9).contains(&m.abs()) {
        format!("{m:+.4}")
    } else {
        format!("{m:+.3e}")
    }
}

impl SecurityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "security report: {} ({}) {verdict}", self.family, self.mechanism.name());
        let d = &self.definition1;
        let _ = writeln!(
            out,
            "puf definition: is_puf={} (deterministic={}, non-constant={})",
            d.is_puf, d.deterministic_on_m, d.non_constant
        );
        let l = &self.levels;
        let _ = writeln!(
            out,
            "levels: analytic={:.4e} empirical={:.4e} [{:.4e}, {:.4e}] target={:.1e}",
            l.analytic, l.empirical, l.empirical_ci95.lo, l.empirical_ci95.hi, l.l_target
        );
        for a in &self.questionnaire {
            let _ = writeln!(out, "{} {}: {}", a.id, a.topic, a.answer);
        }
        for v in &self.requirement_verdicts {
            let margin = v.margin.map_or_else(|| "-".to_string(), format_margin);
            let mark = if v.pass { "pass" } else { "FAIL" };
            let _ = writeln!(out, "{:<9} {mark} margin {margin:<12} {}", v.id, v.description);
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}
