//! Closed-form algebra for single-qubit operators.
//!
//! Every Hermitian 2×2 operator is written as `H = s·1 + v·σ` with real `s`
//! and a real 3-vector `v`. In this form the spectrum is `s ± |v|`, the
//! determinant is `s² − |v|²` and products reduce to dot and cross products,
//! so none of the checks below need an iterative eigensolver.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// Row-major complex 2×2 matrix in the computational basis.
pub type Matrix2c = [[Complex64; 2]; 2];

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "OpDoc", into = "OpDoc")]
pub struct HermitianOp2 {
    /// Coefficient of the identity.
    pub scalar: f64,
    /// Coefficients of (σx, σy, σz).
    pub bloch: Vector3<f64>,
}

#[derive(Serialize, Deserialize)]
struct OpDoc {
    scalar: f64,
    bloch: [f64; 3],
}

impl From<OpDoc> for HermitianOp2 {
    fn from(doc: OpDoc) -> Self {
        HermitianOp2::from_parts(doc.scalar, doc.bloch)
    }
}

impl From<HermitianOp2> for OpDoc {
    fn from(op: HermitianOp2) -> Self {
        OpDoc { scalar: op.scalar, bloch: op.bloch.into() }
    }
}

/// Spectral decomposition of a [`HermitianOp2`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen {
    /// Eigenvalues, largest first.
    pub values: (f64, f64),
    /// Rank-1 projectors onto the matching eigenvectors.
    pub projectors: (HermitianOp2, HermitianOp2),
    /// Set when `|v| < 1e-12`; the projectors are then the computational basis.
    pub degenerate: bool,
}

impl HermitianOp2 {
    pub fn new(scalar: f64, bloch: Vector3<f64>) -> Self {
        HermitianOp2 { scalar, bloch }
    }

    pub fn from_parts(scalar: f64, bloch: [f64; 3]) -> Self {
        HermitianOp2 { scalar, bloch: Vector3::from(bloch) }
    }

    pub fn identity() -> Self {
        Self::new(1.0, Vector3::zeros())
    }

    pub fn zero() -> Self {
        Self::new(0.0, Vector3::zeros())
    }

    /// Reads the Hermitian part of `m`.
    pub fn from_matrix(m: &Matrix2c) -> Self {
        let scalar = 0.5 * (m[0][0] + m[1][1]).re;
        let x = 0.5 * (m[0][1] + m[1][0]).re;
        let y = 0.5 * (m[1][0] - m[0][1]).im;
        let z = 0.5 * (m[0][0] - m[1][1]).re;
        Self::new(scalar, Vector3::new(x, y, z))
    }

    pub fn to_matrix(&self) -> Matrix2c {
        let (s, v) = (self.scalar, self.bloch);
        [
            [Complex64::new(s + v.z, 0.0), Complex64::new(v.x, -v.y)],
            [Complex64::new(v.x, v.y), Complex64::new(s - v.z, 0.0)],
        ]
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.scalar
    }

    pub fn det(&self) -> f64 {
        self.scalar * self.scalar - self.bloch.norm_squared()
    }

    /// `(s + |v|, s − |v|)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let r = self.bloch.norm();
        (self.scalar + r, self.scalar - r)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.scalar - self.bloch.norm()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.scalar + self.bloch.norm()
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        self.scalar.abs() + self.bloch.norm()
    }

    pub fn is_psd(&self, tolerance: f64) -> bool {
        self.min_eigenvalue() >= -tolerance
    }

    pub fn eigen(&self) -> Eigen {
        let values = self.eigenvalues();
        let r = self.bloch.norm();
        if r < tol::STRUCTURAL {
            let up = Self::new(0.5, Vector3::new(0.0, 0.0, 0.5));
            let down = Self::new(0.5, Vector3::new(0.0, 0.0, -0.5));
            return Eigen { values, projectors: (up, down), degenerate: true };
        }
        let half = self.bloch / (2.0 * r);
        Eigen {
            values,
            projectors: (Self::new(0.5, half), Self::new(0.5, -half)),
            degenerate: false,
        }
    }

    /// Applies `f` to the spectrum: `f(H) = Σ f(λ) P_λ`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let r = self.bloch.norm();
        if r < tol::STRUCTURAL {
            return Self::new(f(self.scalar), Vector3::zeros());
        }
        let (hi, lo) = (f(self.scalar + r), f(self.scalar - r));
        Self::new(0.5 * (hi + lo), self.bloch * (0.5 * (hi - lo) / r))
    }

    /// Positive part `Σ max(λ, 0) P_λ`.
    pub fn positive_part(&self) -> Self {
        self.map_spectrum(|x| x.max(0.0))
    }

    /// Matrix product. Not Hermitian unless the operators commute.
    pub fn op_mul(&self, other: &HermitianOp2) -> Op2 {
        Op2::from(*self).mul(&Op2::from(*other))
    }

    /// `Tr(self · other) = 2(s s' + v·v')`.
    pub fn trace_product(&self, other: &HermitianOp2) -> f64 {
        2.0 * (self.scalar * other.scalar + self.bloch.dot(&other.bloch))
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.scalar * k, self.bloch * k)
    }

    /// Rotates the Bloch part by `rotation`; the scalar part is invariant.
    pub fn rotated(&self, rotation: &nalgebra::Rotation3<f64>) -> Self {
        Self::new(self.scalar, rotation * self.bloch)
    }

    /// Largest absolute coefficient difference.
    pub fn distance(&self, other: &HermitianOp2) -> f64 {
        let d = *self - *other;
        d.scalar.abs().max(d.bloch.amax())
    }
}

impl Add for HermitianOp2 {
    type Output = HermitianOp2;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.scalar + rhs.scalar, self.bloch + rhs.bloch)
    }
}

impl AddAssign for HermitianOp2 {
    fn add_assign(&mut self, rhs: Self) {
        self.scalar += rhs.scalar;
        self.bloch += rhs.bloch;
    }
}

impl Sub for HermitianOp2 {
    type Output = HermitianOp2;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.scalar - rhs.scalar, self.bloch - rhs.bloch)
    }
}

impl Neg for HermitianOp2 {
    type Output = HermitianOp2;
    fn neg(self) -> Self {
        Self::new(-self.scalar, -self.bloch)
    }
}

impl Mul<f64> for HermitianOp2 {
    type Output = HermitianOp2;
    fn mul(self, k: f64) -> Self {
        self.scaled(k)
    }
}

impl std::iter::Sum for HermitianOp2 {
    fn sum<It: Iterator<Item = Self>>(iter: It) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

/// General 2×2 operator `a₀·1 + a·σ` with complex coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Op2 {
    pub scalar: Complex64,
    pub vector: [Complex64; 3],
}

impl From<HermitianOp2> for Op2 {
    fn from(h: HermitianOp2) -> Self {
        Op2 {
            scalar: Complex64::new(h.scalar, 0.0),
            vector: [
                Complex64::new(h.bloch.x, 0.0),
                Complex64::new(h.bloch.y, 0.0),
                Complex64::new(h.bloch.z, 0.0),
            ],
        }
    }
}

impl Op2 {
    pub fn zero() -> Self {
        Op2 { scalar: Complex64::new(0.0, 0.0), vector: [Complex64::new(0.0, 0.0); 3] }
    }

    /// `(a₀ + a·σ)(b₀ + b·σ) = a₀b₀ + a·b + (a₀b + b₀a + i a×b)·σ`.
    pub fn mul(&self, other: &Op2) -> Op2 {
        let (a0, a) = (self.scalar, &self.vector);
        let (b0, b) = (other.scalar, &other.vector);
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        let mut vector = [Complex64::new(0.0, 0.0); 3];
        for i in 0..3 {
            vector[i] = a0 * b[i] + b0 * a[i] + I * cross[i];
        }
        Op2 { scalar: a0 * b0 + dot, vector }
    }

    pub fn add(&self, other: &Op2) -> Op2 {
        let mut vector = self.vector;
        for (v, w) in vector.iter_mut().zip(other.vector.iter()) {
            *v += w;
        }
        Op2 { scalar: self.scalar + other.scalar, vector }
    }

    pub fn trace(&self) -> Complex64 {
        self.scalar * 2.0
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> HermitianOp2 {
        HermitianOp2::new(
            self.scalar.re,
            Vector3::new(self.vector[0].re, self.vector[1].re, self.vector[2].re),
        )
    }

    /// Operator norm of `(M − M†)/2`, which equals `i(Im a₀ + Im a·σ)`.
    pub fn anti_hermitian_norm(&self) -> f64 {
        let im = Vector3::new(self.vector[0].im, self.vector[1].im, self.vector[2].im);
        self.scalar.im.abs() + im.norm()
    }

    pub fn to_matrix(&self) -> Matrix2c {
        let (a0, a) = (self.scalar, &self.vector);
        [[a0 + a[2], a[0] - I * a[1]], [a[0] + I * a[1], a0 - a[2]]]
    }

    pub fn from_matrix(m: &Matrix2c) -> Self {
        Op2 {
            scalar: (m[0][0] + m[1][1]) * 0.5,
            vector: [
                (m[0][1] + m[1][0]) * 0.5,
                I * (m[0][1] - m[1][0]) * 0.5,
                (m[0][0] - m[1][1]) * 0.5,
            ],
        }
    }

    /// Largest singular value, from the closed-form spectrum of `M†M`.
    pub fn operator_norm(&self) -> f64 {
        let m = self.to_matrix();
        let a = m[0][0].norm_sqr() + m[1][0].norm_sqr();
        let d = m[0][1].norm_sqr() + m[1][1].norm_sqr();
        let b = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
        let half_gap = 0.5 * (a - d);
        let top = 0.5 * (a + d) + (half_gap * half_gap + b.norm_sqr()).sqrt();
        top.max(0.0).sqrt()
    }
}

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochDirection(Vector3<f64>);

impl BlochDirection {
    /// Rejects inputs whose norm differs from 1 by more than `1e-12`.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > tol::STRUCTURAL {
            return Err(Error::NonUnitDirection(n));
        }
        Ok(BlochDirection(v))
    }

    /// Normalizes any non-zero vector.
    pub fn normalize(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n <= f64::MIN_POSITIVE {
            return Err(Error::NonUnitDirection(n));
        }
        Ok(BlochDirection(v / n))
    }

    pub fn z() -> Self {
        BlochDirection(Vector3::z())
    }

    /// Polar angle `theta` from +z, azimuth `phi` from +x.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        BlochDirection(Vector3::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ))
    }

    /// `(θ, φ)` relative to +z and +x, with `θ ∈ [0, π]` and `φ ∈ [0, 2π)`.
    pub fn angles(&self) -> (f64, f64) {
        self.angles_in(&Vector3::z(), &Vector3::x())
    }

    /// `(θ, φ)` relative to an arbitrary `axis`, with longitude measured from
    /// `reference` (which must be orthogonal to `axis`).
    pub fn angles_in(&self, axis: &Vector3<f64>, reference: &Vector3<f64>) -> (f64, f64) {
        let v = &self.0;
        let third = axis.cross(reference);
        let theta = v.dot(axis).clamp(-1.0, 1.0).acos();
        let phi = v.dot(&third).atan2(v.dot(reference)).rem_euclid(std::f64::consts::TAU);
        (theta, phi)
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.0
    }

    pub fn antipode(&self) -> Self {
        BlochDirection(-self.0)
    }

    pub fn rotated(&self, rotation: &nalgebra::Rotation3<f64>) -> Self {
        BlochDirection(rotation * self.0)
    }

    /// Rank-1 projector `(1 + d·σ)/2`.
    pub fn projector(&self) -> Effect {
        Effect(HermitianOp2::new(0.5, self.0 * 0.5))
    }
}

/// Free-function form of [`BlochDirection::projector`].
pub fn projector_from_direction(d: &BlochDirection) -> Effect {
    d.projector()
}

/// Unit-trace positive operator `(1 + b·σ)/2`, `|b| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOp(HermitianOp2);

impl DensityOp {
    /// Builds `ρ = (1 + b·σ)/2` from the Bloch vector `b`.
    pub fn from_bloch(b: Vector3<f64>) -> Result<Self> {
        let norm = b.norm();
        if !norm.is_finite() || norm > 1.0 + 2.0 * tol::STRUCTURAL {
            return Err(Error::BlochOutOfRange { index: 0, norm });
        }
        Ok(DensityOp(HermitianOp2::new(0.5, b * 0.5)))
    }

    pub fn pure(d: &BlochDirection) -> Self {
        DensityOp(HermitianOp2::new(0.5, d.vector() * 0.5))
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self::pure(&BlochDirection::from_angles(theta, phi))
    }

    /// The Bloch vector `b = 2v`.
    pub fn bloch_vector(&self) -> Vector3<f64> {
        self.0.bloch * 2.0
    }

    pub fn is_pure(&self) -> bool {
        (self.bloch_vector().norm() - 1.0).abs() <= tol::PURITY
    }

    /// Direction of the Bloch vector; `None` for the maximally mixed state.
    pub fn direction(&self) -> Option<BlochDirection> {
        BlochDirection::normalize(self.bloch_vector()).ok()
    }

    pub fn op(&self) -> &HermitianOp2 {
        &self.0
    }

    pub fn rotated(&self, rotation: &nalgebra::Rotation3<f64>) -> Self {
        DensityOp(self.0.rotated(rotation))
    }
}

/// Positive operator bounded by the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianOp2", into = "HermitianOp2")]
pub struct Effect(HermitianOp2);

impl TryFrom<HermitianOp2> for Effect {
    type Error = Error;
    fn try_from(op: HermitianOp2) -> Result<Self> {
        Effect::new(op)
    }
}

impl From<Effect> for HermitianOp2 {
    fn from(e: Effect) -> Self {
        e.0
    }
}

impl Effect {
    /// Requires both eigenvalues in `[−1e-12, 1 + 1e-12]`.
    pub fn new(op: HermitianOp2) -> Result<Self> {
        Self::with_tolerance(op, tol::STRUCTURAL)
    }

    pub fn with_tolerance(op: HermitianOp2, tolerance: f64) -> Result<Self> {
        let (hi, lo) = op.eigenvalues();
        if !(lo >= -tolerance && hi <= 1.0 + tolerance) {
            return Err(Error::InvalidEffect(hi, lo));
        }
        Ok(Effect(op))
    }

    pub fn zero() -> Self {
        Effect(HermitianOp2::zero())
    }

    pub fn identity() -> Self {
        Effect(HermitianOp2::identity())
    }

    /// `weight · (1 + d·σ)/2`, with `weight ∈ [0, 1]`.
    pub fn rank_one(weight: f64, d: &BlochDirection) -> Result<Self> {
        Self::new(d.projector().0.scaled(weight))
    }

    /// The trace, which for a rank-1 effect is its weight.
    pub fn weight(&self) -> f64 {
        self.0.trace()
    }

    pub fn op(&self) -> &HermitianOp2 {
        &self.0
    }

    pub fn is_zero(&self, tolerance: f64) -> bool {
        self.0.operator_norm() <= tolerance
    }
}
