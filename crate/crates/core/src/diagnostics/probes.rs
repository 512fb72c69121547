//! Deterministic sequence probes `p_n -> anchor`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rate {
    /// `p_n = anchor + scale * direction / n`
    Harmonic,
    /// `p_n = anchor + scale * direction / n^2`
    Quadratic,
    /// Explicit terms, used verbatim; `len` must match.
    Custom { points: Vec<Vec<f64>> },
}

/// How a probe picks the first player's action `a_n` along `x_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Companion {
    Fixed { values: Vec<f64> },
    /// `a_n = a`, the anchor's action.
    Constant,
    /// `a_n = scale / |x_n - x|`.
    InverseOffset { scale: f64 },
    /// `a_n` maximizing `dist(Phi_B(x_n, a_n), b)` over the sampled `Phi_A(x_n)`.
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceProbe {
    pub label: String,
    pub anchor: Vec<f64>,
    pub direction: Vec<f64>,
    pub rate: Rate,
    pub scale: f64,
    pub len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub companion: Option<Companion>,
}

pub const MIN_PROBE_LEN: usize = 16;

impl SequenceProbe {
    pub fn harmonic(anchor: Vec<f64>, direction: Vec<f64>, len: usize) -> Self {
        SequenceProbe {
            label: "harmonic".into(),
            anchor,
            direction,
            rate: Rate::Harmonic,
            scale: 1.0,
            len,
            companion: None,
        }
    }

    pub fn custom(label: impl Into<String>, anchor: Vec<f64>, points: Vec<Vec<f64>>) -> Self {
        SequenceProbe {
            label: label.into(),
            direction: vec![0.0; anchor.len()],
            anchor,
            len: points.len(),
            rate: Rate::Custom { points },
            scale: 1.0,
            companion: None,
        }
    }

    pub fn with_companion(mut self, c: Companion) -> Self {
        self.companion = Some(c);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.len < MIN_PROBE_LEN {
            return Err(Error::InvalidConfig(format!(
                "probe `{}` has {} terms; at least {MIN_PROBE_LEN} are needed",
                self.label, self.len
            )));
        }
        match &self.rate {
            Rate::Custom { points } => {
                if points.len() != self.len || points.iter().any(|p| p.len() != self.anchor.len()) {
                    return Err(Error::InvalidConfig(format!("probe `{}`: custom points do not match len/dimension", self.label)));
                }
            }
            _ => {
                if self.direction.len() != self.anchor.len() {
                    return Err(Error::InvalidConfig(format!("probe `{}`: direction has the wrong dimension", self.label)));
                }
            }
        }
        if let Some(Companion::Fixed { values }) = &self.companion {
            if values.len() != self.len {
                return Err(Error::InvalidConfig(format!("probe `{}`: {} companion values for {} terms", self.label, values.len(), self.len)));
            }
        }
        Ok(())
    }

    /// The `n`-th term, `n` starting at 1.
    pub fn term(&self, n: usize) -> Vec<f64> {
        let r = match &self.rate {
            Rate::Custom { points } => return points[n - 1].clone(),
            Rate::Harmonic => 1.0 / n as f64,
            Rate::Quadratic => 1.0 / (n as f64 * n as f64),
        };
        self.anchor.iter().zip(&self.direction).map(|(p, d)| p + self.scale * d * r).collect()
    }

    /// Indices of the tail half, `N/2 + 1 ..= N`; only these enter a verdict.
    pub fn tail(&self) -> std::ops::RangeInclusive<usize> {
        self.len / 2 + 1..=self.len
    }

    /// Every term of the probe, `n = 1..=len`.
    pub fn points(&self) -> Vec<Vec<f64>> {
        (1..=self.len).map(|n| self.term(n)).collect()
    }

    /// Same terms with all rules evaluated, so a replay is independent of the rate formula.
    pub fn materialize(&self, companions: Option<Vec<f64>>) -> SequenceProbe {
        SequenceProbe {
            label: self.label.clone(),
            anchor: self.anchor.clone(),
            direction: self.direction.clone(),
            rate: Rate::Custom { points: self.points() },
            scale: self.scale,
            len: self.len,
            companion: companions.map(|values| Companion::Fixed { values }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub len: usize,
    pub scales: Vec<f64>,
    /// Extra user sequences, appended after the generated family.
    #[serde(default)]
    pub custom: Vec<SequenceProbe>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            len: 128,
            scales: vec![1.0],
            custom: Vec::new(),
        }
    }
}

fn directions(dim: usize) -> Vec<(String, Vec<f64>)> {
    let mut out = Vec::new();
    for i in 0..dim {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; dim];
            d[i] = sign;
            let name = if dim == 1 { if sign > 0.0 { "+".to_string() } else { "-".to_string() } } else { format!("{}e{}", if sign > 0.0 { "+" } else { "-" }, i + 1) };
            out.push((name, d));
        }
    }
    match dim {
        2 => {
            out.push(("+(1,1)".into(), vec![1.0, 1.0]));
            out.push(("-(1,1)".into(), vec![-1.0, -1.0]));
            out.push(("+(1,-1)".into(), vec![1.0, -1.0]));
            out.push(("-(1,-1)".into(), vec![-1.0, 1.0]));
        }
        3 => {
            out.push(("+(1,1,1)".into(), vec![1.0, 1.0, 1.0]));
            out.push(("-(1,1,1)".into(), vec![-1.0, -1.0, -1.0]));
        }
        _ => {}
    }
    out
}

/// Directions x rates x scales, then the custom probes.
pub fn generate_probes(anchor: &[f64], cfg: &ProbeConfig) -> Vec<SequenceProbe> {
    let mut out = Vec::new();
    for (name, d) in directions(anchor.len()) {
        for (rname, rate) in [("harmonic", Rate::Harmonic), ("quadratic", Rate::Quadratic)] {
            for &scale in &cfg.scales {
                out.push(SequenceProbe {
                    label: format!("{rname} {name} c={scale}"),
                    anchor: anchor.to_vec(),
                    direction: d.clone(),
                    rate: rate.clone(),
                    scale,
                    len: cfg.len,
                    companion: None,
                });
            }
        }
    }
    out.extend(cfg.custom.iter().cloned());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_terms() {
        let p = SequenceProbe::harmonic(vec![0.0], vec![1.0], 128);
        assert_eq!(p.term(1), vec![1.0]);
        assert_eq!(p.term(4), vec![0.25]);
        let m = SequenceProbe::harmonic(vec![0.0], vec![-1.0], 128);
        assert_eq!(m.term(2), vec![-0.5]);
        assert_eq!(p.tail().count(), 64);
    }

    #[test]
    fn family_shape() {
        let cfg = ProbeConfig::default();
        assert_eq!(generate_probes(&[0.0], &cfg).len(), 4);
        assert_eq!(generate_probes(&[0.0, 1.0], &cfg).len(), 16);
        let q = generate_probes(&[1.0], &cfg).into_iter().find(|p| p.rate == Rate::Quadratic).unwrap();
        assert_eq!(q.term(2), vec![1.25]);
    }

    #[test]
    fn custom_probe_is_echoed() {
        let pts: Vec<Vec<f64>> = (1..=16).map(|n| vec![n as f64 * 0.5]).collect();
        let cfg = ProbeConfig {
            custom: vec![SequenceProbe::custom("mine", vec![0.0], pts.clone())],
            ..ProbeConfig::default()
        };
        let fam = generate_probes(&[0.0], &cfg);
        assert_eq!(fam.last().unwrap().points(), pts);
    }

    #[test]
    fn short_probes_are_rejected() {
        assert!(SequenceProbe::harmonic(vec![0.0], vec![1.0], 8).validate().is_err());
    }

    #[test]
    fn materialized_probe_has_identical_terms() {
        let p = SequenceProbe::harmonic(vec![0.3], vec![-1.0], 32).with_companion(Companion::Constant);
        let m = p.materialize(Some(vec![0.0; 32]));
        assert_eq!(m.points(), p.points());
        assert!(m.validate().is_ok());
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<SequenceProbe>(&json).unwrap(), m);
    }
}
