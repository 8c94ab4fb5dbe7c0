use serde::Serialize;

use super::{OptimalSolution, FREE_KERNEL};
use crate::conditions::{check_global, Povm, Verdict};
use crate::ensemble::Ensemble;
use crate::polytope::{kernel_shape, ElementShape, WeightPolytope};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisKernel {
    pub index: usize,
    /// `det(C − p_k ρ_k)`.
    pub det: f64,
    /// `None` when the element must be zero.
    pub shape: Option<ElementShape>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyMember {
    pub weights: Vec<f64>,
    pub povm: Povm,
    pub error_probability: f64,
    pub verdict: Verdict,
    pub nonzero_elements: usize,
}

/// Every optimal strategy sharing the solution's Lagrangian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub hypotheses: Vec<HypothesisKernel>,
    pub polytope: WeightPolytope,
    /// The weight polytope has positive dimension.
    pub non_unique: bool,
    /// Hypotheses with `C − p_k ρ_k = 0`, whose elements are not even fixed in shape.
    pub free_kernels: Vec<usize>,
    /// One POVM per polytope vertex.
    pub members: Vec<FamilyMember>,
    /// A vertex with the fewest nonzero elements (never more than four).
    pub minimal: Option<FamilyMember>,
}

/// Describes the set of optimal POVMs for `sol.lagrangian`: element shapes are
/// fixed by the kernels of `C − p_k ρ_k`, and the weights range over a polytope.
pub fn enumerate_optimal_family(sol: &OptimalSolution, e: &Ensemble) -> FamilyReport {
    let c = sol.lagrangian;
    let hypotheses: Vec<HypothesisKernel> = e
        .weighted_states()
        .enumerate()
        .map(|(index, w)| HypothesisKernel {
            index,
            det: (c - w.0).det(),
            shape: kernel_shape(&c, &w.0, tol::FEASIBILITY, FREE_KERNEL),
        })
        .collect();
    let (idx, shapes): (Vec<usize>, Vec<ElementShape>) = hypotheses
        .iter()
        .filter_map(|h| h.shape.map(|s| (h.index, s)))
        .unzip();
    let free_kernels = idx
        .iter()
        .zip(&shapes)
        .filter(|(_, s)| **s == ElementShape::Free)
        .map(|(k, _)| *k)
        .collect();
    let polytope = WeightPolytope::enumerate(idx, shapes, 1e-10);

    let member = |weights: &Vec<f64>| -> Option<FamilyMember> {
        let povm = Povm::new(polytope.elements(weights, e.len())).ok()?;
        let cert = check_global(&povm, e).ok()?;
        Some(FamilyMember {
            weights: weights.clone(),
            nonzero_elements: weights.iter().filter(|w| **w > tol::STRUCTURAL).count(),
            error_probability: cert.error_probability,
            verdict: cert.verdict,
            povm,
        })
    };
    let members: Vec<FamilyMember> = polytope.vertices.iter().filter_map(member).collect();
    let minimal = polytope.minimal_support_vertex().and_then(member);
    FamilyReport {
        non_unique: polytope.is_non_unique(),
        hypotheses,
        free_kernels,
        members,
        minimal,
        polytope,
    }
}
