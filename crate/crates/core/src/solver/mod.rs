//! Constructive minimum-error solver.
//!
//! The solver works on the Lagrangian `C` rather than on the POVM: it proposes
//! a `C` from the structure of the ensemble, checks `C − p_k ρ_k ⪰ 0` for every
//! hypothesis, reads the element shapes off the kernels of `C − p_k ρ_k`, and
//! finally looks for non-negative weights that complete the POVM.
//!
//! For equiprobable pure qubit states the candidates for `C` are
//!
//! 1. two states: the Helstrom operator;
//! 2. all states on one latitude, with elements that can be completed;
//! 3. states that form a POVM after rescaling, giving `C = 1/N`;
//! 4. a three-state subset on a common latitude;
//! 5. a pair of states (the binary fallback).
//!
//! Each candidate is accepted only after the resulting POVM passes
//! [`check_global`] against the whole ensemble.

mod family;
mod latitude;

use itertools::Itertools;
use serde::Serialize;

pub use family::{enumerate_optimal_family, FamilyMember, FamilyReport, HypothesisKernel};
pub use latitude::{
    construct_candidate_povm, find_common_latitude_basis, in_open_semicircle,
    min_error_common_latitude, Candidate, LatitudeBasis,
};

use crate::conditions::{check_global, is_dual_feasible, Certificate, Povm};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::polytope::{kernel_shape, ElementShape, WeightPolytope};
use crate::qubit::HermitianOp2;
use crate::tol;

/// Below this norm `C − p_k ρ_k` is treated as the zero operator.
pub(crate) const FREE_KERNEL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionCase {
    TwoState,
    CommonLatitude,
    YuenPom,
    Subset,
    BinaryFallback,
}

impl std::fmt::Display for SolutionCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolutionCase::TwoState => "two-state",
            SolutionCase::CommonLatitude => "common-latitude",
            SolutionCase::YuenPom => "yuen-pom",
            SolutionCase::Subset => "subset",
            SolutionCase::BinaryFallback => "binary-fallback",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalSolution {
    pub lagrangian: HermitianOp2,
    pub p_error: f64,
    pub case: SolutionCase,
    /// Hypotheses whose canonical element is nonzero.
    pub active_set: Vec<usize>,
    /// Element shape for each entry of `active_set`.
    pub directions: Vec<ElementShape>,
    /// Subset of hypotheses that produced `C`.
    pub support: Vec<usize>,
    pub weight_polytope: WeightPolytope,
    /// Weights of `canonical_povm`, aligned with `weight_polytope.hypotheses`.
    pub canonical_weights: Vec<f64>,
    pub canonical_povm: Povm,
    pub certificate: Certificate,
    pub flags: Vec<String>,
}

/// Turns a dual-feasible `C` into a certified solution, or `None` when the
/// admissible elements cannot be completed into an optimal POVM.
fn finalize(
    e: &Ensemble,
    c: HermitianOp2,
    case: SolutionCase,
    support: Vec<usize>,
    mut flags: Vec<String>,
) -> Option<OptimalSolution> {
    let (hypotheses, shapes): (Vec<usize>, Vec<ElementShape>) = e
        .weighted_states()
        .enumerate()
        .filter_map(|(k, w)| kernel_shape(&c, &w.0, tol::FEASIBILITY, FREE_KERNEL).map(|s| (k, s)))
        .unzip();
    let polytope = WeightPolytope::enumerate(hypotheses, shapes, 1e-10);
    let weights = polytope.vertices.first()?.clone();
    let povm = Povm::new(polytope.elements(&weights, e.len())).ok()?;
    let certificate = check_global(&povm, e).ok()?;
    let p_error = 1.0 - c.trace();
    if !certificate.is_optimal() || (certificate.error_probability - p_error).abs() > tol::FEASIBILITY {
        return None;
    }

    let (active_set, directions): (Vec<usize>, Vec<ElementShape>) = polytope
        .hypotheses
        .iter()
        .zip(&polytope.shapes)
        .zip(&weights)
        .filter(|(_, w)| **w > tol::STRUCTURAL)
        .map(|((k, s), _)| (*k, *s))
        .unzip();
    if polytope.shapes.contains(&ElementShape::Free) {
        flags.push("free-kernel: some C − p_k ρ_k vanish, their elements are unconstrained".into());
    }
    for (j, k) in e.duplicates() {
        flags.push(format!("duplicate-states: {j} and {k}"));
    }
    Some(OptimalSolution {
        lagrangian: c,
        p_error,
        case,
        active_set,
        directions,
        support,
        weight_polytope: polytope,
        canonical_weights: weights,
        canonical_povm: povm,
        certificate,
        flags,
    })
}

/// Helstrom Lagrangian for hypotheses `j`, `k` with their (unnormalized) priors:
/// `C = p_k ρ_k + (p_j ρ_j − p_k ρ_k)₊`.
fn pair_lagrangian(e: &Ensemble, j: usize, k: usize) -> HermitianOp2 {
    let (a, b) = (e.weighted(j).0, e.weighted(k).0);
    b + (a - b).positive_part()
}

/// Optimal measurement for two hypotheses with arbitrary priors and purity:
/// projectors onto the positive and negative eigenspaces of `p₁ρ₁ − p₂ρ₂`.
/// When `p₁ρ₁ = p₂ρ₂` every strategy is optimal and the guessing strategy
/// `(1, 0)` is returned.
pub fn helstrom_two_state(e: &Ensemble) -> Result<OptimalSolution> {
    if e.len() != 2 {
        return Err(Error::SizeMismatch { expected: 2, actual: e.len() });
    }
    finalize(e, pair_lagrangian(e, 0, 1), SolutionCase::TwoState, vec![0, 1], Vec::new())
        .ok_or_else(|| Error::SolverExhausted("Helstrom candidate failed certification".into()))
}

/// Weights `w ≥ 0` with `Σ w_k = 2` and `Σ w_k b_k = 0`, i.e. the states
/// themselves form a POVM after rescaling. Then `C = 1/N`.
pub fn check_yuen_case(e: &Ensemble) -> Option<Vec<f64>> {
    let shapes = e
        .states()
        .iter()
        .map(|s| s.direction().map(ElementShape::Rank1))
        .collect::<Option<Vec<_>>>()?;
    let polytope = WeightPolytope::enumerate((0..e.len()).collect(), shapes, 1e-10);
    polytope.vertices.first().cloned()
}

/// Full decision procedure for equiprobable pure states (any `N ≥ 2`; for
/// `N = 2` priors and purity are unrestricted).
pub fn solve_equiprobable_pure(e: &Ensemble) -> Result<OptimalSolution> {
    if e.len() == 2 {
        return helstrom_two_state(e);
    }
    if !e.is_equiprobable() {
        return Err(Error::Unsupported("unequal priors with more than two states".into()));
    }
    if !e.all_pure() {
        return Err(Error::Unsupported("mixed states with more than two states".into()));
    }
    let n = e.len();
    let prior = 1.0 / n as f64;
    let all: Vec<usize> = (0..n).collect();

    if let Ok(Some(basis)) = find_common_latitude_basis(e.states()) {
        if let Ok(candidate) = construct_candidate_povm(&basis, e.states()) {
            let flags = candidate
                .merged
                .iter()
                .map(|(i, j)| format!("merged-direction: {i} and {j} share a longitude"))
                .collect();
            if let Some(sol) = finalize(e, basis.lagrangian(prior), SolutionCase::CommonLatitude, all.clone(), flags) {
                return Ok(sol);
            }
        }
    }

    if check_yuen_case(e).is_some() {
        let c = HermitianOp2::identity().scaled(prior);
        if let Some(sol) = finalize(e, c, SolutionCase::YuenPom, all, Vec::new()) {
            return Ok(sol);
        }
    }

    let mut triples: Vec<(f64, Vec<usize>, LatitudeBasis)> = (0..n)
        .combinations(3)
        .filter_map(|idx| {
            let states: Vec<_> = idx.iter().map(|&i| e.states()[i]).collect();
            let basis = find_common_latitude_basis(&states).ok()??;
            Some((basis.cos_latitude.abs(), idx, basis))
        })
        .collect();
    // Closest to the equator first; the stable sort keeps lexicographic order on ties.
    triples.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, idx, basis) in &triples {
        let states: Vec<_> = idx.iter().map(|&i| e.states()[i]).collect();
        if construct_candidate_povm(basis, &states).is_err() {
            continue;
        }
        let c = basis.lagrangian(prior);
        if !is_dual_feasible(&c, e, tol::FEASIBILITY) {
            continue;
        }
        if let Some(sol) = finalize(e, c, SolutionCase::Subset, idx.clone(), Vec::new()) {
            return Ok(sol);
        }
    }

    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .tuple_combinations()
        .map(|(j, k)| (e.pairwise_overlap(j, k).value, j, k))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(_, j, k) in &pairs {
        let c = pair_lagrangian(e, j, k);
        if !is_dual_feasible(&c, e, tol::FEASIBILITY) {
            continue;
        }
        if let Some(sol) = finalize(e, c, SolutionCase::BinaryFallback, vec![j, k], Vec::new()) {
            return Ok(sol);
        }
    }

    Err(Error::SolverExhausted(format!(
        "{} triples and {} pairs tried without a certified candidate",
        triples.len(),
        pairs.len()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{BlochDirection, DensityOp};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

    fn ring(theta: f64, longitudes_deg: &[f64]) -> Vec<BlochDirection> {
        longitudes_deg
            .iter()
            .map(|d| BlochDirection::from_angles(theta, d.to_radians()))
            .collect()
    }

    #[test]
    fn trine_is_common_latitude() {
        let e = Ensemble::pure_equiprobable(&ring(FRAC_PI_2, &[0.0, 120.0, 240.0])).unwrap();
        let sol = solve_equiprobable_pure(&e).unwrap();
        assert_eq!(sol.case, SolutionCase::CommonLatitude);
        assert_abs_diff_eq!(sol.p_error, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(sol.active_set, vec![0, 1, 2]);
        assert_eq!(sol.weight_polytope.dimension, 0);
        assert!(sol.certificate.is_optimal());
    }

    #[test]
    fn fourth_state_on_the_equator_keeps_c() {
        let trine = Ensemble::pure_equiprobable(&ring(FRAC_PI_2, &[0.0, 120.0, 240.0])).unwrap();
        let four = Ensemble::pure_equiprobable(&ring(FRAC_PI_2, &[0.0, 120.0, 240.0, 60.0])).unwrap();
        let a = solve_equiprobable_pure(&trine).unwrap();
        let b = solve_equiprobable_pure(&four).unwrap();
        assert_eq!(b.case, SolutionCase::CommonLatitude);
        // Same P_e; C scales with the prior 1/N but has the same shape.
        assert_abs_diff_eq!(b.p_error, 1.0 - 2.0 / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.p_error, 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!(b.weight_polytope.dimension, 1);
    }

    #[test]
    fn fourth_state_in_opposite_hemisphere_is_yuen() {
        let mut dirs = ring(FRAC_PI_6, &[0.0, 120.0, 240.0]);
        dirs.push(BlochDirection::z().antipode());
        let e = Ensemble::pure_equiprobable(&dirs).unwrap();
        let sol = solve_equiprobable_pure(&e).unwrap();
        assert_eq!(sol.case, SolutionCase::YuenPom);
        assert_abs_diff_eq!(sol.p_error, 0.5, epsilon = 1e-12);
        assert!(check_yuen_case(&e).is_some());
    }

    #[test]
    fn fourth_state_off_latitude_same_hemisphere_is_subset() {
        let mut dirs = ring(PI / 3.0, &[0.0, 120.0, 240.0]);
        dirs.push(BlochDirection::from_angles(0.2, 1.0));
        let e = Ensemble::pure_equiprobable(&dirs).unwrap();
        let sol = solve_equiprobable_pure(&e).unwrap();
        assert_eq!(sol.case, SolutionCase::Subset);
        assert_eq!(sol.active_set, vec![0, 1, 2]);
        assert_abs_diff_eq!(sol.p_error, 1.0 - 0.25 - 0.25 * (PI / 3.0).sin(), epsilon = 1e-12);
        assert!(check_yuen_case(&e).is_none());
    }

    #[test]
    fn narrow_arc_falls_back_to_a_pair() {
        let e = Ensemble::pure_equiprobable(&ring(FRAC_PI_2, &[0.0, 50.0, 100.0])).unwrap();
        let sol = solve_equiprobable_pure(&e).unwrap();
        assert_eq!(sol.case, SolutionCase::BinaryFallback);
        assert_eq!(sol.support, vec![0, 2]);
        assert_eq!(sol.active_set, vec![0, 2]);
        assert!(sol.canonical_povm.elements()[1].is_zero(1e-12));
    }

    #[test]
    fn helstrom_examples() {
        let z = BlochDirection::z();
        let poles = Ensemble::pure_equiprobable(&[z, z.antipode()]).unwrap();
        assert_abs_diff_eq!(helstrom_two_state(&poles).unwrap().p_error, 0.0, epsilon = 1e-15);

        // Bloch angle 90°: |⟨ψ₁|ψ₂⟩|² = 1/2, P_e = (1 − √(1/2))/2.
        let right = Ensemble::pure_equiprobable(&[z, BlochDirection::from_angles(FRAC_PI_2, 0.3)]).unwrap();
        let sol = helstrom_two_state(&right).unwrap();
        assert_abs_diff_eq!(sol.p_error, (1.0 - 0.5f64.sqrt()) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sol.p_error, 0.146_446_609_4, epsilon = 1e-10);
        assert_eq!(sol.case, SolutionCase::TwoState);

        let same = Ensemble::pure_equiprobable(&[z, z]).unwrap();
        let sol = helstrom_two_state(&same).unwrap();
        assert_abs_diff_eq!(sol.p_error, 0.5, epsilon = 1e-15);
        assert_eq!(*sol.canonical_povm.elements()[0].op(), HermitianOp2::identity());
    }

    #[test]
    fn helstrom_unequal_priors_and_mixed_states() {
        let d = BlochDirection::from_angles(FRAC_PI_4, 0.0);
        let e = Ensemble::new(
            vec![
                DensityOp::from_bloch(d.vector() * 0.7).unwrap(),
                DensityOp::from_bloch(-BlochDirection::z().vector() * 0.4).unwrap(),
            ],
            vec![0.3, 0.7],
        )
        .unwrap();
        let sol = helstrom_two_state(&e).unwrap();
        let gamma = e.weighted(0).0 - e.weighted(1).0;
        let (hi, lo) = gamma.eigenvalues();
        assert_abs_diff_eq!(sol.p_error, 0.5 * (1.0 - hi.abs() - lo.abs()), epsilon = 1e-14);
    }

    #[test]
    fn dominant_prior_never_measures() {
        // p₁ρ₁ − p₂ρ₂ ⪰ 0: always answer 1.
        let e = Ensemble::new(
            vec![
                DensityOp::from_bloch(nalgebra::Vector3::zeros()).unwrap(),
                DensityOp::from_bloch(nalgebra::Vector3::zeros()).unwrap(),
            ],
            vec![0.8, 0.2],
        )
        .unwrap();
        let sol = helstrom_two_state(&e).unwrap();
        assert_abs_diff_eq!(sol.p_error, 0.2, epsilon = 1e-15);
        assert_eq!(sol.active_set, vec![0]);
    }

    #[test]
    fn unsupported_regimes() {
        let dirs = ring(1.0, &[0.0, 120.0, 240.0]);
        let unequal = Ensemble::new(dirs.iter().map(DensityOp::pure).collect(), vec![0.5, 0.25, 0.25]).unwrap();
        assert!(matches!(solve_equiprobable_pure(&unequal), Err(Error::Unsupported(_))));
        let mixed = Ensemble::equiprobable(vec![
            DensityOp::pure(&dirs[0]),
            DensityOp::pure(&dirs[1]),
            DensityOp::from_bloch(dirs[2].vector() * 0.5).unwrap(),
        ])
        .unwrap();
        assert!(matches!(solve_equiprobable_pure(&mixed), Err(Error::Unsupported(_))));
    }

    #[test]
    fn duplicates_are_flagged() {
        let dirs = ring(FRAC_PI_2, &[0.0, 120.0, 240.0, 0.0]);
        let e = Ensemble::pure_equiprobable(&dirs).unwrap();
        let sol = solve_equiprobable_pure(&e).unwrap();
        assert_eq!(sol.case, SolutionCase::CommonLatitude);
        assert!(sol.flags.iter().any(|f| f.starts_with("duplicate-states")));
        assert!(sol.flags.iter().any(|f| f.starts_with("merged-direction")));
        assert_eq!(sol.weight_polytope.dimension, 1);
    }
}
