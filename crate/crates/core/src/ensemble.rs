//! The hypothesis set `{(p_j, ρ_j)}` and its JSON document format.
//!
//! ```json
//! { "states": [ {"bloch": [0, 0, 1]}, {"angles": {"theta": 1.5707963267948966, "phi": 0}} ],
//!   "priors": [0.5, 0.5] }
//! ```
//!
//! `priors` is optional and defaults to `1/N` each. A document wrapped as
//! `{"ensemble": {...}}` (the echo inside a run report) is accepted too.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::{BlochDirection, DensityOp, HermitianOp2};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    states: Vec<DensityOp>,
    priors: Vec<f64>,
}

/// `p_j ρ_j`, with trace `p_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedState(pub HermitianOp2);

/// Overlap between two hypotheses. `mixed` marks that at least one state is
/// mixed, in which case the value is `Tr(ρ_j ρ_k)` rather than a fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlap {
    pub value: f64,
    pub mixed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Bloch { bloch: [f64; 3] },
    Angles { angles: AnglesSpec },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnglesSpec {
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleDocument {
    pub states: Vec<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyEnsembleDocument {
    Bare(EnsembleDocument),
    Wrapped { ensemble: EnsembleDocument },
}

impl Ensemble {
    pub fn new(states: Vec<DensityOp>, priors: Vec<f64>) -> Result<Self> {
        let n = states.len();
        if n < 2 {
            return Err(Error::TooFewStates(n));
        }
        if priors.len() != n {
            return Err(Error::SizeMismatch { expected: n, actual: priors.len() });
        }
        if let Some((index, &value)) =
            priors.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::NegativePrior { index, value });
        }
        let sum: f64 = priors.iter().sum();
        if (sum - 1.0).abs() > tol::STRUCTURAL {
            return Err(Error::PriorsSum { sum });
        }
        Ok(Ensemble { states, priors })
    }

    pub fn equiprobable(states: Vec<DensityOp>) -> Result<Self> {
        let n = states.len();
        Self::new(states, vec![1.0 / n as f64; n])
    }

    /// Equiprobable pure states from Bloch directions.
    pub fn pure_equiprobable(directions: &[BlochDirection]) -> Result<Self> {
        Self::equiprobable(directions.iter().map(DensityOp::pure).collect())
    }

    pub fn from_document(doc: &EnsembleDocument) -> Result<Self> {
        let states = doc
            .states
            .iter()
            .enumerate()
            .map(|(index, spec)| match spec {
                StateSpec::Bloch { bloch } => DensityOp::from_bloch(Vector3::from(*bloch))
                    .map_err(|_| Error::BlochOutOfRange {
                        index,
                        norm: Vector3::from(*bloch).norm(),
                    }),
                StateSpec::Angles { angles } => {
                    if !(angles.theta.is_finite() && angles.phi.is_finite()) {
                        return Err(Error::Malformed(format!("state {index}: non-finite angle")));
                    }
                    Ok(DensityOp::from_angles(angles.theta, angles.phi))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        match &doc.priors {
            Some(p) => Self::new(states, p.clone()),
            None => Self::equiprobable(states),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: AnyEnsembleDocument =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        match doc {
            AnyEnsembleDocument::Bare(d) | AnyEnsembleDocument::Wrapped { ensemble: d } => {
                Self::from_document(&d)
            }
        }
    }

    /// Canonical document: Bloch vectors and explicit priors.
    pub fn to_document(&self) -> EnsembleDocument {
        EnsembleDocument {
            states: self
                .states
                .iter()
                .map(|s| StateSpec::Bloch { bloch: s.bloch_vector().into() })
                .collect(),
            priors: Some(self.priors.clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[DensityOp] {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn weighted(&self, j: usize) -> WeightedState {
        WeightedState(self.states[j].op().scaled(self.priors[j]))
    }

    pub fn weighted_states(&self) -> impl Iterator<Item = WeightedState> + '_ {
        (0..self.len()).map(|j| self.weighted(j))
    }

    pub fn is_equiprobable(&self) -> bool {
        let p = 1.0 / self.len() as f64;
        self.priors.iter().all(|q| (q - p).abs() <= tol::STRUCTURAL)
    }

    pub fn all_pure(&self) -> bool {
        self.states.iter().all(DensityOp::is_pure)
    }

    /// Pairs `(j, k)`, `j < k`, whose states coincide. Such pairs make the
    /// optimal strategy non-unique.
    pub fn duplicates(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.len() {
            for k in j + 1..self.len() {
                if self.states[j].op().distance(self.states[k].op()) <= tol::STRUCTURAL {
                    out.push((j, k));
                }
            }
        }
        out
    }

    /// `|⟨ψ_j|ψ_k⟩|² = (1 + b_j·b_k)/2` for pure states; the same expression is
    /// `Tr(ρ_j ρ_k)` in general.
    pub fn pairwise_overlap(&self, j: usize, k: usize) -> Overlap {
        let (a, b) = (&self.states[j], &self.states[k]);
        Overlap {
            value: a.op().trace_product(b.op()),
            mixed: !(a.is_pure() && b.is_pure()),
        }
    }

    /// Applies one rotation to every Bloch vector.
    pub fn rotated(&self, rotation: &nalgebra::Rotation3<f64>) -> Self {
        Ensemble {
            states: self.states.iter().map(|s| s.rotated(rotation)).collect(),
            priors: self.priors.clone(),
        }
    }
}
