//! Weight polytope of a fixed set of element shapes.
//!
//! Once the Lagrangian `C` is fixed, each hypothesis that may be detected has
//! its element shape pinned by the kernel of `C − p_k ρ_k`; only the traces
//! `w_k = Tr Π_k` remain free. Completeness `Σ w_k S_k = 1` (with `S_k` the
//! unit-trace shape) gives four real equations, so the admissible weights form
//! the polytope `{w ≥ 0 : A w = b}` with `A` a 4×m matrix. Its vertices are the
//! basic feasible solutions, each with at most `rank A ≤ 4` nonzero weights.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::qubit::{BlochDirection, HermitianOp2};

impl Serialize for BlochDirection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: [f64; 3] = self.vector().into();
        v.serialize(s)
    }
}

/// Shape of a POVM element allowed by complementary slackness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementShape {
    /// `C − p_k ρ_k` has a one-dimensional kernel along this direction.
    Rank1(BlochDirection),
    /// `C − p_k ρ_k = 0`: any positive element is allowed. The polytope only
    /// tracks multiples of the identity for these.
    Free,
}

impl ElementShape {
    /// Unit-trace representative.
    pub fn unit_trace(&self) -> HermitianOp2 {
        match self {
            ElementShape::Rank1(d) => *d.projector().op(),
            ElementShape::Free => HermitianOp2::identity().scaled(0.5),
        }
    }

    pub fn direction(&self) -> Option<BlochDirection> {
        match self {
            ElementShape::Rank1(d) => Some(*d),
            ElementShape::Free => None,
        }
    }
}

/// Element shape permitted for a hypothesis by `C`, or `None` when
/// `|det(C − p_k ρ_k)| > det_tol` and the element must vanish.
pub fn kernel_shape(
    c: &HermitianOp2,
    weighted: &HermitianOp2,
    det_tol: f64,
    free_tol: f64,
) -> Option<ElementShape> {
    let d = *c - *weighted;
    if d.det().abs() > det_tol {
        return None;
    }
    if d.operator_norm() <= free_tol {
        return Some(ElementShape::Free);
    }
    // Kernel is the eigenvector whose eigenvalue is nearest zero.
    let (hi, lo) = d.eigenvalues();
    let u = d.bloch / d.bloch.norm();
    let v = if lo.abs() <= hi.abs() { -u } else { u };
    BlochDirection::normalize(v).ok().map(ElementShape::Rank1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightPolytope {
    /// Hypothesis index of each column.
    pub hypotheses: Vec<usize>,
    pub shapes: Vec<ElementShape>,
    /// Vertices as weight vectors aligned with `hypotheses`.
    pub vertices: Vec<Vec<f64>>,
    /// Dimension of the affine hull of the vertices.
    pub dimension: usize,
    pub rank: usize,
}

const RANK_TOL: f64 = 1e-10;

fn numerical_rank(m: &DMatrix<f64>, tolerance: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone().svd(false, false).singular_values.iter().filter(|s| **s > tolerance).count()
}

impl WeightPolytope {
    /// Enumerates every vertex. `residual_tol` bounds the completeness error
    /// accepted for a basic solution.
    pub fn enumerate(hypotheses: Vec<usize>, shapes: Vec<ElementShape>, residual_tol: f64) -> Self {
        assert_eq!(hypotheses.len(), shapes.len());
        let m = shapes.len();
        let mut a = DMatrix::<f64>::zeros(4, m);
        for (j, s) in shapes.iter().enumerate() {
            let op = s.unit_trace();
            a[(0, j)] = op.scalar;
            a[(1, j)] = op.bloch.x;
            a[(2, j)] = op.bloch.y;
            a[(3, j)] = op.bloch.z;
        }
        let b = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let rank = numerical_rank(&a, RANK_TOL);

        let mut vertices: Vec<Vec<f64>> = Vec::new();
        for cols in (0..m).combinations(rank) {
            let sub = a.select_columns(cols.iter());
            let svd = sub.clone().svd(true, true);
            if svd.singular_values.min() <= RANK_TOL {
                continue;
            }
            let Ok(w) = svd.solve(&b, RANK_TOL) else { continue };
            if (&sub * &w - &b).amax() > residual_tol || w.iter().any(|x| *x < -residual_tol) {
                continue;
            }
            let mut full = vec![0.0; m];
            for (k, &c) in cols.iter().enumerate() {
                full[c] = w[k].max(0.0);
            }
            let duplicate = vertices
                .iter()
                .any(|v| v.iter().zip(&full).all(|(x, y)| (x - y).abs() <= 1e-9));
            if !duplicate {
                vertices.push(full);
            }
        }

        let dimension = match vertices.split_first() {
            None => 0,
            Some((first, rest)) => {
                let diffs = DMatrix::from_fn(m, rest.len(), |i, j| rest[j][i] - first[i]);
                numerical_rank(&diffs, 1e-9)
            }
        };
        WeightPolytope { hypotheses, shapes, vertices, dimension, rank }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// More than one weight assignment completes the POVM.
    pub fn is_non_unique(&self) -> bool {
        self.dimension >= 1
    }

    pub fn centroid(&self) -> Option<Vec<f64>> {
        let n = self.vertices.len();
        if n == 0 {
            return None;
        }
        let mut c = vec![0.0; self.shapes.len()];
        for v in &self.vertices {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi / n as f64;
            }
        }
        Some(c)
    }

    /// Vertex with the fewest nonzero weights; ties go to the earliest vertex.
    pub fn minimal_support_vertex(&self) -> Option<&Vec<f64>> {
        self.vertices
            .iter()
            .min_by_key(|v| v.iter().filter(|w| **w > 1e-12).count())
    }

    /// Full list of `total` elements, zero outside the polytope's hypotheses.
    pub fn elements(&self, weights: &[f64], total: usize) -> Vec<HermitianOp2> {
        let mut ops = vec![HermitianOp2::zero(); total];
        for ((&k, shape), &w) in self.hypotheses.iter().zip(&self.shapes).zip(weights) {
            ops[k] = shape.unit_trace().scaled(w);
        }
        ops
    }
}
