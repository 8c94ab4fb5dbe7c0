//! POVMs and optimality certificates.
//!
//! A strategy `{Π_k}` is optimal iff the Lagrangian `C = Σ_j p_j ρ_j Π_j` is
//! Hermitian and `C − p_k ρ_k ⪰ 0` for every `k`. Then `C` is dual feasible
//! with `Tr C = 1 − P_e`, which certifies the strategy. Stationarity
//! `(C − p_k ρ_k) Π_k = 0` alone is only a first-order condition.

use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::qubit::{Effect, HermitianOp2, Op2};
use crate::tol;

/// Ordered effects, one per hypothesis. Zero elements are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    elements: Vec<Effect>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyPovmDocument {
    Bare { elements: Vec<HermitianOp2> },
    Wrapped { povm: PovmElements },
}

#[derive(Deserialize)]
struct PovmElements {
    elements: Vec<HermitianOp2>,
}

impl Povm {
    /// Validates positivity and completeness at the `1e-9` certification tier.
    pub fn new(ops: Vec<HermitianOp2>) -> Result<Self> {
        let elements = ops
            .into_iter()
            .map(|op| Effect::with_tolerance(op, tol::FEASIBILITY))
            .collect::<Result<Vec<_>>>()?;
        let sum: HermitianOp2 = elements.iter().map(|e| *e.op()).sum();
        let deviation = (sum - HermitianOp2::identity()).operator_norm();
        if deviation > tol::FEASIBILITY {
            return Err(Error::Incomplete(deviation));
        }
        Ok(Povm { elements })
    }

    /// Rescales arbitrary positive operators into a POVM by the congruence
    /// `Π_k ↦ S^{-1/2} Π_k S^{-1/2}`, `S = Σ Π_k`. Requires `S` to be invertible.
    pub fn recomplete(ops: &[HermitianOp2]) -> Result<Self> {
        let sum: HermitianOp2 = ops.iter().copied().sum();
        if sum.min_eigenvalue() <= tol::STRUCTURAL {
            return Err(Error::Incomplete(sum.min_eigenvalue()));
        }
        let inv_sqrt = sum.map_spectrum(|x| 1.0 / x.sqrt());
        let scaled = ops
            .iter()
            .map(|op| inv_sqrt.op_mul(op).mul(&Op2::from(inv_sqrt)).hermitian_part())
            .collect();
        Self::new(scaled)
    }

    /// Accepts `{"elements": [...]}` or a run report carrying `{"povm": {"elements": [...]}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: AnyPovmDocument =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        match doc {
            AnyPovmDocument::Bare { elements } | AnyPovmDocument::Wrapped { povm: PovmElements { elements } } => {
                Self::new(elements)
            }
        }
    }

    pub fn elements(&self) -> &[Effect] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn rotated(&self, rotation: &nalgebra::Rotation3<f64>) -> Self {
        Povm {
            elements: self
                .elements
                .iter()
                .map(|e| Effect::with_tolerance(e.op().rotated(rotation), 1.0).unwrap())
                .collect(),
        }
    }

    fn check_size(&self, e: &Ensemble) -> Result<()> {
        if self.len() != e.len() {
            return Err(Error::SizeMismatch { expected: e.len(), actual: self.len() });
        }
        Ok(())
    }
}

/// `Σ_j p_j ρ_j Π_j` as a general operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lagrangian {
    pub operator: Op2,
    /// Operator norm of the anti-Hermitian part.
    pub hermiticity_residual: f64,
}

impl Lagrangian {
    pub fn hermitian(&self) -> HermitianOp2 {
        self.operator.hermitian_part()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Optimal,
    StationaryOnly,
    NonOptimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Hermitian part of the Lagrangian `C`.
    pub lagrangian: HermitianOp2,
    pub error_probability: f64,
    /// `λ_min(C − p_k ρ_k)` per hypothesis.
    pub feasibility_slacks: Vec<f64>,
    /// `‖(C − p_k ρ_k) Π_k‖` per hypothesis.
    pub stationarity_residuals: Vec<f64>,
    pub hermiticity_residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn is_optimal(&self) -> bool {
        self.verdict == Verdict::Optimal
    }
}

pub fn compute_lagrangian(p: &Povm, e: &Ensemble) -> Result<Lagrangian> {
    p.check_size(e)?;
    let operator = e
        .weighted_states()
        .zip(p.elements())
        .fold(Op2::zero(), |acc, (w, pi)| acc.add(&w.0.op_mul(pi.op())));
    Ok(Lagrangian { operator, hermiticity_residual: operator.anti_hermitian_norm() })
}

/// `1 − Σ_k p_k Tr(ρ_k Π_k)`, clamped to `[0, 1]`.
pub fn error_probability(p: &Povm, e: &Ensemble) -> f64 {
    let success: f64 = e
        .weighted_states()
        .zip(p.elements())
        .map(|(w, pi)| w.0.trace_product(pi.op()))
        .sum();
    let raw = 1.0 - success;
    debug_assert!((-tol::STRUCTURAL..=1.0 + tol::STRUCTURAL).contains(&raw), "P_e = {raw}");
    raw.clamp(0.0, 1.0)
}

/// `‖(C − p_k ρ_k) Π_k‖` with `C` the Hermitian part of the Lagrangian.
pub fn check_stationarity(p: &Povm, e: &Ensemble) -> Result<Vec<f64>> {
    let c = compute_lagrangian(p, e)?.hermitian();
    Ok(stationarity_residuals(&c, p, e))
}

fn stationarity_residuals(c: &HermitianOp2, p: &Povm, e: &Ensemble) -> Vec<f64> {
    e.weighted_states()
        .zip(p.elements())
        .map(|(w, pi)| (*c - w.0).op_mul(pi.op()).operator_norm())
        .collect()
}

/// `λ_min(c − p_k ρ_k)` per hypothesis; `c` is dual feasible iff all are `≥ −1e-9`.
pub fn check_dual_feasible(c: &HermitianOp2, e: &Ensemble) -> Vec<f64> {
    e.weighted_states().map(|w| (*c - w.0).min_eigenvalue()).collect()
}

pub fn is_dual_feasible(c: &HermitianOp2, e: &Ensemble, tolerance: f64) -> bool {
    check_dual_feasible(c, e).iter().all(|s| *s >= -tolerance)
}

/// `|det(c − p_k ρ_k)| ≤ 1e-9`. Hypotheses failing this must get zero elements.
pub fn check_det_condition(c: &HermitianOp2, e: &Ensemble) -> Vec<bool> {
    e.weighted_states().map(|w| (*c - w.0).det().abs() <= tol::FEASIBILITY).collect()
}

pub fn check_global(p: &Povm, e: &Ensemble) -> Result<Certificate> {
    check_global_with_tolerance(p, e, tol::FEASIBILITY)
}

pub fn check_global_with_tolerance(p: &Povm, e: &Ensemble, tolerance: f64) -> Result<Certificate> {
    let lagrangian = compute_lagrangian(p, e)?;
    let c = lagrangian.hermitian();
    let feasibility_slacks = check_dual_feasible(&c, e);
    let stationarity_residuals = stationarity_residuals(&c, p, e);
    let hermitian = lagrangian.hermiticity_residual <= tolerance;
    let feasible = feasibility_slacks.iter().all(|s| *s >= -tolerance);
    let stationary = stationarity_residuals.iter().all(|r| *r <= tolerance);
    let verdict = if hermitian && feasible {
        Verdict::Optimal
    } else if stationary {
        Verdict::StationaryOnly
    } else {
        Verdict::NonOptimal
    };
    Ok(Certificate {
        lagrangian: c,
        error_probability: error_probability(p, e),
        feasibility_slacks,
        stationarity_residuals,
        hermiticity_residual: lagrangian.hermiticity_residual,
        tolerance,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{BlochDirection, DensityOp};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn trine() -> (Ensemble, Povm) {
        let dirs: Vec<_> = (0..3)
            .map(|k| BlochDirection::from_angles(FRAC_PI_2, 2.0 * PI * k as f64 / 3.0))
            .collect();
        let e = Ensemble::pure_equiprobable(&dirs).unwrap();
        let p = Povm::new(dirs.iter().map(|d| d.projector().op().scaled(2.0 / 3.0)).collect())
            .unwrap();
        (e, p)
    }

    fn poles() -> (Ensemble, Povm) {
        let z = BlochDirection::z();
        let e = Ensemble::pure_equiprobable(&[z, z.antipode()]).unwrap();
        let p = Povm::new(vec![*z.projector().op(), *z.antipode().projector().op()]).unwrap();
        (e, p)
    }

    #[test]
    fn perfect_discrimination() {
        let (e, p) = poles();
        let l = compute_lagrangian(&p, &e).unwrap();
        assert!(l.hermitian().distance(&HermitianOp2::identity().scaled(0.5)) < 1e-15);
        assert_eq!(error_probability(&p, &e), 0.0);
        assert!(check_global(&p, &e).unwrap().is_optimal());
    }

    #[test]
    fn trine_symmetric_povm() {
        // Σ_j (1/3) ρ_j (2/3) P_j = (2/9) Σ_j P_j = (2/9)(3/2)·1 = (1/3)·1.
        let (e, p) = trine();
        let l = compute_lagrangian(&p, &e).unwrap();
        assert!(l.hermitian().distance(&HermitianOp2::identity().scaled(1.0 / 3.0)) < 1e-15);
        assert!(l.hermiticity_residual < 1e-15);
        assert_abs_diff_eq!(error_probability(&p, &e), 1.0 / 3.0, epsilon = 1e-15);
        let cert = check_global(&p, &e).unwrap();
        assert_eq!(cert.verdict, Verdict::Optimal);
        assert_abs_diff_eq!(cert.error_probability, 1.0 - cert.lagrangian.trace(), epsilon = 1e-12);
    }

    #[test]
    fn guessing_on_identical_states() {
        let d = BlochDirection::from_angles(0.4, 0.9);
        let e = Ensemble::pure_equiprobable(&[d, d]).unwrap();
        let p = Povm::new(vec![HermitianOp2::identity(), HermitianOp2::zero()]).unwrap();
        let l = compute_lagrangian(&p, &e).unwrap();
        assert!(l.hermitian().distance(&DensityOp::pure(&d).op().scaled(0.5)) < 1e-15);
        assert_abs_diff_eq!(error_probability(&p, &e), 0.5, epsilon = 1e-15);
        assert!(check_global(&p, &e).unwrap().is_optimal());
    }

    #[test]
    fn random_guess_error() {
        let (e, _) = trine();
        let p = Povm::new(vec![HermitianOp2::identity().scaled(1.0 / 3.0); 3]).unwrap();
        assert_abs_diff_eq!(error_probability(&p, &e), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn swapped_trine_is_not_optimal() {
        // Detecting state 0 with Π_1 and vice versa: Tr(ρ_0 Π_1) = (2/3)(1/4) = 1/6,
        // so P_e = 1 − (1/3)(1/6 + 1/6 + 2/3) = 2/3.
        let (e, p) = trine();
        let els = p.elements();
        let swapped = Povm::new(vec![*els[1].op(), *els[0].op(), *els[2].op()]).unwrap();
        let cert = check_global(&swapped, &e).unwrap();
        assert_eq!(cert.verdict, Verdict::NonOptimal);
        assert_abs_diff_eq!(cert.error_probability, 2.0 / 3.0, epsilon = 1e-15);
        // ρ_0Π_1 + ρ_1Π_0 ∝ {ρ_0, ρ_1} is Hermitian; it is dual feasibility that fails.
        assert!(cert.feasibility_slacks.iter().any(|s| *s < -1e-3));
    }

    #[test]
    fn guessing_on_orthogonal_states_is_not_optimal() {
        let (e, _) = poles();
        let p = Povm::new(vec![HermitianOp2::identity(), HermitianOp2::zero()]).unwrap();
        let cert = check_global(&p, &e).unwrap();
        assert_ne!(cert.verdict, Verdict::Optimal);
        assert_abs_diff_eq!(cert.error_probability, 0.5);
    }

    #[test]
    fn stationary_point_that_is_not_optimal() {
        // For the poles, the swapped projective measurement is stationary (it is
        // the worst strategy) but violates dual feasibility.
        let (e, p) = poles();
        let els = p.elements();
        let worst = Povm::new(vec![*els[1].op(), *els[0].op()]).unwrap();
        let cert = check_global(&worst, &e).unwrap();
        assert_eq!(cert.verdict, Verdict::StationaryOnly);
        assert_eq!(cert.error_probability, 1.0);
    }

    #[test]
    fn dual_feasibility_examples() {
        let (e, _) = trine();
        let slacks = check_dual_feasible(&HermitianOp2::identity(), &e);
        assert!(slacks.iter().zip(e.priors()).all(|(s, p)| *s >= 1.0 - p - 1e-15));
        assert!(!is_dual_feasible(&HermitianOp2::zero(), &e, tol::FEASIBILITY));
        // p·1 − p·ρ = p(1 − ρ) has spectrum {0, p}.
        let c = HermitianOp2::identity().scaled(1.0 / 3.0);
        for s in check_dual_feasible(&c, &e) {
            assert_abs_diff_eq!(s, 0.0, epsilon = 1e-15);
        }
        assert!(check_det_condition(&c, &e).iter().all(|b| *b));
        assert!(check_det_condition(&HermitianOp2::identity(), &e).iter().all(|b| !*b));
    }

    #[test]
    fn validation() {
        let z = BlochDirection::z();
        assert!(matches!(
            Povm::new(vec![*z.projector().op(), HermitianOp2::zero()]),
            Err(Error::Incomplete(_))
        ));
        assert!(matches!(
            Povm::new(vec![HermitianOp2::from_parts(0.5, [0.0, 0.0, 0.6]), HermitianOp2::from_parts(0.5, [0.0, 0.0, -0.6])]),
            Err(Error::InvalidEffect(..))
        ));
        let (e, p) = trine();
        let short = Povm::new(vec![HermitianOp2::identity()]).unwrap();
        assert!(matches!(compute_lagrangian(&short, &e), Err(Error::SizeMismatch { .. })));
        assert!(check_global(&p, &e).is_ok());
    }

    #[test]
    fn povm_documents() {
        let bare = r#"{"elements": [{"scalar": 0.5, "bloch": [0, 0, 0.5]}, {"scalar": 0.5, "bloch": [0, 0, -0.5]}]}"#;
        assert_eq!(Povm::from_json(bare).unwrap().len(), 2);
        let wrapped = format!(r#"{{"povm": {bare}, "other": 1}}"#);
        assert_eq!(Povm::from_json(&wrapped).unwrap().len(), 2);
        assert!(Povm::from_json(r#"{"elements": [{"scalar": 0.5, "bloch": [0, 0, 0.5]}]}"#).is_err());
    }

    #[test]
    fn recomplete_preserves_directions_of_a_scaled_povm() {
        let (_, p) = trine();
        let scaled: Vec<_> = p.elements().iter().map(|e| e.op().scaled(0.4)).collect();
        let back = Povm::recomplete(&scaled).unwrap();
        for (a, b) in back.elements().iter().zip(p.elements()) {
            assert!(a.op().distance(b.op()) < 1e-14);
        }
    }

    #[test]
    fn error_matches_lagrangian_trace() {
        let dirs = [
            BlochDirection::from_angles(0.3, 0.1),
            BlochDirection::from_angles(2.0, 2.1),
            BlochDirection::from_angles(1.2, 4.0),
        ];
        let e = Ensemble::new(
            vec![
                DensityOp::pure(&dirs[0]),
                DensityOp::from_bloch(dirs[1].vector() * 0.5).unwrap(),
                DensityOp::pure(&dirs[2]),
            ],
            vec![0.2, 0.5, 0.3],
        )
        .unwrap();
        let raw: Vec<_> = [0.3, 1.0, 0.7]
            .iter()
            .zip(dirs.iter())
            .map(|(w, d)| d.projector().op().scaled(*w))
            .collect();
        let p = Povm::recomplete(&raw).unwrap();
        let l = compute_lagrangian(&p, &e).unwrap();
        assert_abs_diff_eq!(error_probability(&p, &e), 1.0 - l.hermitian().trace(), epsilon = 1e-12);
        assert!(l.operator.trace().im.abs() < 1e-15);
    }
}
