//! Common-latitude geometry.
//!
//! Three distinct points on the Bloch sphere always lie on one circle. Taking
//! the circle's axis `n` as the quantization axis, every state has the same
//! diagonal elements `⟨±|ρ|±⟩ = (1 ± cos θ*)/2`. The optimal elements for such
//! a set are equatorial (relative to `n`) at the states' own longitudes, and
//! they form a POVM iff no open semicircle contains all the longitudes.

use std::f64::consts::TAU;

use nalgebra::Vector3;
use serde::Serialize;

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::polytope::{ElementShape, WeightPolytope};
use crate::qubit::{BlochDirection, DensityOp, HermitianOp2};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatitudeBasis {
    /// Quantization axis `n`; `|+⟩` is the eigenvector of `n·σ` with eigenvalue +1.
    pub axis: BlochDirection,
    /// Zero of longitude, orthogonal to `axis`.
    pub longitude_reference: BlochDirection,
    /// `θ*` in `[0, π/2]`.
    pub common_latitude: f64,
    /// `cos θ* = n·b_j`, the same for every state.
    pub cos_latitude: f64,
}

impl LatitudeBasis {
    fn from_axis(axis: Vector3<f64>, first: &Vector3<f64>) -> Self {
        let mut n = axis.normalize();
        let mut cos = n.dot(first);
        if cos < 0.0 {
            n = -n;
            cos = -cos;
        }
        let mut reference = first - n * cos;
        if reference.norm() < tol::STRUCTURAL {
            // Any vector orthogonal to n will do.
            let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            reference = helper - n * n.dot(&helper);
        }
        LatitudeBasis {
            axis: BlochDirection::normalize(n).expect("non-zero axis"),
            longitude_reference: BlochDirection::normalize(reference).expect("non-zero reference"),
            common_latitude: cos.clamp(-1.0, 1.0).acos(),
            cos_latitude: cos,
        }
    }

    /// Longitude of a Bloch vector around the axis, in `[0, 2π)`.
    pub fn longitude(&self, b: &Vector3<f64>) -> f64 {
        let n = self.axis.vector();
        let r = self.longitude_reference.vector();
        b.dot(&n.cross(&r)).atan2(b.dot(&r)).rem_euclid(TAU)
    }

    /// Unit vector on the basis equator at longitude `phi`.
    pub fn equatorial(&self, phi: f64) -> BlochDirection {
        let n = self.axis.vector();
        let r = self.longitude_reference.vector();
        BlochDirection::normalize(r * phi.cos() + n.cross(&r) * phi.sin()).expect("unit")
    }

    /// `(⟨+|ρ|+⟩, ⟨−|ρ|−⟩)` in this basis.
    pub fn diagonal(&self, rho: &DensityOp) -> (f64, f64) {
        let c = self.axis.vector().dot(&rho.bloch_vector());
        (0.5 * (1.0 + c), 0.5 * (1.0 - c))
    }

    /// Lagrangian for equiprobable states (each with prior `prior`) on this
    /// latitude: `C = p(1 + sin θ*)/2 · 1 + p cos θ*/2 · n·σ`.
    pub fn lagrangian(&self, prior: f64) -> HermitianOp2 {
        let sin = (1.0 - self.cos_latitude * self.cos_latitude).max(0.0).sqrt();
        HermitianOp2::new(
            0.5 * prior * (1.0 + sin),
            self.axis.vector() * (0.5 * prior * self.cos_latitude),
        )
    }
}

fn unit_vectors(states: &[DensityOp]) -> Result<Vec<Vector3<f64>>> {
    states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if !s.is_pure() {
                return Err(Error::Unsupported(format!("state {i} is mixed")));
            }
            Ok(s.bloch_vector().normalize())
        })
        .collect()
}

/// Finds the basis in which all the (pure) states share diagonal elements.
///
/// Returns `Ok(None)` when the states do not lie on one circle and
/// [`Error::DegenerateConfiguration`] when no three of them are distinct.
pub fn find_common_latitude_basis(states: &[DensityOp]) -> Result<Option<LatitudeBasis>> {
    if states.len() < 3 {
        return Err(Error::DegenerateConfiguration(format!(
            "a latitude needs at least three states (got {})",
            states.len()
        )));
    }
    let b = unit_vectors(states)?;
    let n = b.len();
    let mut found = None;
    'search: for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let cross = (b[i] - b[j]).cross(&(b[i] - b[k]));
                if cross.norm() >= tol::DEGENERATE_CROSS {
                    found = Some((cross, i));
                    break 'search;
                }
            }
        }
    }
    let Some((cross, first)) = found else {
        return Err(Error::DegenerateConfiguration(
            "Bloch vectors do not span a plane (duplicate states)".into(),
        ));
    };
    let basis = LatitudeBasis::from_axis(cross, &b[first]);
    let axis = basis.axis.vector();
    let on_latitude = b.iter().all(|v| (axis.dot(v) - basis.cos_latitude).abs() <= tol::FEASIBILITY);
    Ok(on_latitude.then_some(basis))
}

/// True iff all angles lie strictly inside some half circle.
pub fn in_open_semicircle(longitudes: &[f64]) -> bool {
    if longitudes.is_empty() {
        return true;
    }
    let mut sorted: Vec<f64> = longitudes.iter().map(|l| l.rem_euclid(TAU)).collect();
    sorted.sort_by(f64::total_cmp);
    let wrap = sorted[0] + TAU - sorted[sorted.len() - 1];
    let largest_gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap, f64::max);
    largest_gap > std::f64::consts::PI + tol::FEASIBILITY
}

/// Equatorial elements at the states' longitudes and one admissible weight vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub longitudes: Vec<f64>,
    pub directions: Vec<BlochDirection>,
    /// A vertex of the weight polytope (unique for three generic states).
    pub weights: Vec<f64>,
    pub polytope: WeightPolytope,
    /// Index pairs with the same longitude; their weights trade off freely.
    pub merged: Vec<(usize, usize)>,
}

/// Builds the equatorial candidate POVM, or [`Error::NotFormable`] when no
/// non-negative weights satisfy completeness.
pub fn construct_candidate_povm(basis: &LatitudeBasis, states: &[DensityOp]) -> Result<Candidate> {
    let b = unit_vectors(states)?;
    let longitudes: Vec<f64> = b.iter().map(|v| basis.longitude(v)).collect();
    let directions: Vec<BlochDirection> = longitudes.iter().map(|&phi| basis.equatorial(phi)).collect();
    let mut merged = Vec::new();
    for i in 0..longitudes.len() {
        for j in i + 1..longitudes.len() {
            let gap = (longitudes[i] - longitudes[j]).rem_euclid(TAU);
            if gap.min(TAU - gap) <= tol::FEASIBILITY {
                merged.push((i, j));
            }
        }
    }
    let polytope = WeightPolytope::enumerate(
        (0..states.len()).collect(),
        directions.iter().map(|d| ElementShape::Rank1(*d)).collect(),
        1e-10,
    );
    let weights = polytope.vertices.first().cloned().ok_or(Error::NotFormable)?;
    Ok(Candidate { longitudes, directions, weights, polytope, merged })
}

/// `1 − p − 2p √(⟨+|ρ|+⟩⟨−|ρ|−⟩)` with `p = 1/N`, for equiprobable pure states on
/// a common latitude whose candidate elements form a POVM.
pub fn min_error_common_latitude(e: &Ensemble, basis: &LatitudeBasis) -> Result<f64> {
    if !e.is_equiprobable() || !e.all_pure() {
        return Err(Error::Unsupported("formula requires equiprobable pure states".into()));
    }
    let axis = basis.axis.vector();
    if e
        .states()
        .iter()
        .any(|s| (axis.dot(&s.bloch_vector()) - basis.cos_latitude).abs() > tol::FEASIBILITY)
    {
        return Err(Error::DegenerateConfiguration("states are not on the basis latitude".into()));
    }
    construct_candidate_povm(basis, e.states())?;
    let p = 1.0 / e.len() as f64;
    let (plus, minus) = basis.diagonal(&e.states()[0]);
    Ok(1.0 - p - 2.0 * p * (plus * minus).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn ring(theta: f64, longitudes_deg: &[f64]) -> Vec<DensityOp> {
        longitudes_deg
            .iter()
            .map(|d| DensityOp::from_angles(theta, d.to_radians()))
            .collect()
    }

    #[test]
    fn coordinate_axes() {
        let states: Vec<_> = [Vector3::x(), Vector3::y(), Vector3::z()]
            .iter()
            .map(|v| DensityOp::from_bloch(*v).unwrap())
            .collect();
        let basis = find_common_latitude_basis(&states).unwrap().unwrap();
        let expected = Vector3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
        assert!((basis.axis.vector() - expected).norm() < 1e-12);
        assert_abs_diff_eq!(basis.cos_latitude, 1.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert!(basis.axis.vector().dot(&basis.longitude_reference.vector()).abs() < 1e-12);
    }

    #[test]
    fn equatorial_trine_axis_is_z() {
        let basis = find_common_latitude_basis(&ring(FRAC_PI_2, &[0.0, 120.0, 240.0]))
            .unwrap()
            .unwrap();
        assert!(basis.axis.vector().z.abs() > 1.0 - 1e-12);
        assert_abs_diff_eq!(basis.common_latitude, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn trine_plus_pole_has_no_latitude() {
        let mut states = ring(FRAC_PI_2, &[0.0, 120.0, 240.0]);
        states.push(DensityOp::pure(&BlochDirection::z()));
        assert_eq!(find_common_latitude_basis(&states).unwrap(), None);
    }

    #[test]
    fn duplicates_are_degenerate() {
        let states = ring(1.0, &[10.0, 10.0, 200.0]);
        assert!(matches!(
            find_common_latitude_basis(&states),
            Err(Error::DegenerateConfiguration(_))
        ));
        // With a fourth distinct state a non-degenerate triple exists.
        let mut more = states.clone();
        more.push(DensityOp::from_angles(1.0, 1.0));
        assert!(find_common_latitude_basis(&more).unwrap().is_some());
    }

    #[test]
    fn trine_candidate_weights() {
        let states = ring(FRAC_PI_3, &[0.0, 120.0, 240.0]);
        let basis = find_common_latitude_basis(&states).unwrap().unwrap();
        let cand = construct_candidate_povm(&basis, &states).unwrap();
        for w in &cand.weights {
            assert_abs_diff_eq!(*w, 2.0 / 3.0, epsilon = 1e-12);
        }
        for (d, s) in cand.directions.iter().zip(&states) {
            // Equatorial in the basis, same longitude as the state.
            assert!(d.vector().dot(&basis.axis.vector()).abs() < 1e-12);
            let b = s.bloch_vector();
            assert_abs_diff_eq!(basis.longitude(&d.vector()), basis.longitude(&b), epsilon = 1e-12);
        }
    }

    #[test]
    fn narrow_arc_is_not_formable() {
        let states = ring(FRAC_PI_2, &[0.0, 30.0, 60.0]);
        let basis = find_common_latitude_basis(&states).unwrap().unwrap();
        assert!(matches!(construct_candidate_povm(&basis, &states), Err(Error::NotFormable)));
    }

    #[test]
    fn right_angle_arc_solves_linear_system() {
        // w0 + w1 + w2 = 2, w0 − w2 = 0 (x), w1 = 0 (y)  ⇒  w = (1, 0, 1).
        let states = ring(FRAC_PI_2, &[0.0, 90.0, 180.0]);
        let basis = find_common_latitude_basis(&states).unwrap().unwrap();
        let cand = construct_candidate_povm(&basis, &states).unwrap();
        let shift = cand.longitudes[0];
        // Longitudes are relative to the first state.
        assert_abs_diff_eq!(shift, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cand.weights[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cand.weights[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cand.weights[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn formability_matches_semicircle_rule() {
        let mut rng_state = 7u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..300 {
            let theta = 0.2 + 1.3 * next();
            let lons: Vec<f64> = (0..3 + (next() * 3.0) as usize).map(|_| 360.0 * next()).collect();
            let states = ring(theta, &lons);
            let basis = find_common_latitude_basis(&states).unwrap().unwrap();
            let cand = construct_candidate_povm(&basis, &states);
            let rads: Vec<f64> = lons.iter().map(|l| l.to_radians()).collect();
            assert_eq!(cand.is_ok(), !in_open_semicircle(&rads), "longitudes {lons:?}");
        }
    }

    #[test]
    fn closed_form_values() {
        let trine = Ensemble::equiprobable(ring(FRAC_PI_2, &[0.0, 120.0, 240.0])).unwrap();
        let basis = find_common_latitude_basis(trine.states()).unwrap().unwrap();
        assert_abs_diff_eq!(min_error_common_latitude(&trine, &basis).unwrap(), 1.0 / 3.0, epsilon = 1e-15);

        let tilted = Ensemble::equiprobable(ring(FRAC_PI_3, &[0.0, 120.0, 240.0])).unwrap();
        let basis = find_common_latitude_basis(tilted.states()).unwrap().unwrap();
        let expected = 2.0 / 3.0 - 3f64.sqrt() / 6.0;
        assert_abs_diff_eq!(min_error_common_latitude(&tilted, &basis).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.377_992, epsilon = 1e-6);

        // Approaching the pole the error approaches guessing, 1 − 1/N.
        let polar = Ensemble::equiprobable(ring(1e-3, &[0.0, 120.0, 240.0])).unwrap();
        let basis = find_common_latitude_basis(polar.states()).unwrap().unwrap();
        assert_abs_diff_eq!(min_error_common_latitude(&polar, &basis).unwrap(), 2.0 / 3.0, epsilon = 1e-3);
    }

    #[test]
    fn semicircle_rule() {
        assert!(in_open_semicircle(&[0.0, 0.5, 1.0]));
        assert!(!in_open_semicircle(&[0.0, PI / 2.0, PI]));
        assert!(!in_open_semicircle(&[0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0]));
    }
}
