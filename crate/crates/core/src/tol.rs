//! Numeric tolerance tiers shared across the crate.

/// Representation error: reconstruction, idempotence, unit norms.
pub const STRUCTURAL: f64 = 1e-12;

/// Certification slack for PSD, completeness and optimality checks.
pub const FEASIBILITY: f64 = 1e-9;

/// Agreement between the structured solver and the iterative oracle.
pub const ORACLE_AGREEMENT: f64 = 1e-6;

/// Cross products below this norm mean the three Bloch vectors do not span a plane.
pub const DEGENERATE_CROSS: f64 = 1e-10;

/// Determinant threshold for active hypotheses when reading an iterative dual.
pub const ORACLE_ACTIVE_SET: f64 = 1e-7;

/// Purity threshold on the Bloch vector length.
pub const PURITY: f64 = 1e-9;
