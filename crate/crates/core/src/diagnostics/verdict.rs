use std::fmt;

use serde::{Deserialize, Serialize};

use super::probes::SequenceProbe;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    CounterexampleFound,
    NoCounterexampleFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    FnLsc,
    FnUsc,
    MfLsc,
    MfUsc,
    ALsc,
    KInfCompact,
    InfCompact,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::FnLsc,
        Property::FnUsc,
        Property::MfLsc,
        Property::MfUsc,
        Property::ALsc,
        Property::KInfCompact,
        Property::InfCompact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::FnLsc => "fn-lsc",
            Property::FnUsc => "fn-usc",
            Property::MfLsc => "mf-lsc",
            Property::MfUsc => "mf-usc",
            Property::ALsc => "a-lsc",
            Property::KInfCompact => "k-inf-compact",
            Property::InfCompact => "inf-compact",
        }
    }

    pub fn parse(s: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// One evaluated probe term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub index: usize,
    pub point: Vec<f64>,
    /// The quantity the check looks at: a function value, a distance or an excess.
    pub value: f64,
    /// How strongly this term argues for a counterexample.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Materialized probe: explicit terms and companions.
    pub probe: SequenceProbe,
    /// The fixed target point of the check (`b` for lsc checks), if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<f64>>,
    pub terms: Vec<Term>,
    /// Tail estimate the decision was based on.
    pub estimate: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub property: Property,
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    pub probes_tested: usize,
    pub tolerance_used: f64,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn is_counterexample(&self) -> bool {
        self.outcome == Outcome::CounterexampleFound
    }

    pub fn summary(&self) -> String {
        match (&self.outcome, &self.witness) {
            (Outcome::CounterexampleFound, Some(w)) => format!(
                "{}: counterexample found along probe `{}` (margin {:.6e}, tolerance {:e})",
                self.property.name(),
                w.probe.label,
                w.margin,
                self.tolerance_used
            ),
            _ => format!(
                "{}: no counterexample among {} tested probes (tolerance {:e})",
                self.property.name(),
                self.probes_tested,
                self.tolerance_used
            ),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

/// Result of running one probe.
#[derive(Debug, Clone)]
pub(crate) struct ProbeOutcome {
    pub counterexample: bool,
    pub witness: Witness,
}

/// Combines per-probe results: the first counterexample in probe order, so
/// hinted and harmonic probes are reported ahead of the others.
pub(crate) fn aggregate(property: Property, results: Vec<ProbeOutcome>, probes_tested: usize, tol: f64, notes: Vec<String>) -> Verdict {
    let best = results.into_iter().find(|r| r.counterexample);
    Verdict {
        property,
        outcome: if best.is_some() { Outcome::CounterexampleFound } else { Outcome::NoCounterexampleFound },
        witness: best.map(|b| b.witness),
        probes_tested,
        tolerance_used: tol,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absence_is_worded_as_such() {
        let v = aggregate(Property::FnLsc, Vec::new(), 4, 1e-4, Vec::new());
        assert!(v.summary().contains("no counterexample among 4 tested probes"));
        assert!(!v.is_counterexample());
    }

    #[test]
    fn property_names_round_trip() {
        for p in Property::ALL {
            assert_eq!(Property::parse(p.name()), Some(p));
            assert_eq!(serde_json::to_string(&p).unwrap(), format!("\"{}\"", p.name()));
        }
    }
}
