use serde::Serialize;

use minerr_core::{
    Certificate, DualResult, ElementShape, EnsembleDocument, FamilyReport, HermitianOp2, OptimalSolution, Povm,
    SimulationReport, SolutionCase,
};

/// Everything a command produced. Feeding the same file back as the ensemble
/// (and, for `verify`, as the POVM) reproduces it.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub seed: u64,
    pub ensemble: EnsembleDocument,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub povm: Option<Povm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationReport>,
}

impl RunReport {
    pub fn new(command: &'static str, seed: u64, ensemble: EnsembleDocument) -> Self {
        RunReport {
            command,
            seed,
            ensemble,
            solution: None,
            dual: None,
            povm: None,
            certificate: None,
            oracle: None,
            family: None,
            simulation: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SolutionSummary {
    pub case: SolutionCase,
    pub p_error: f64,
    pub lagrangian: HermitianOp2,
    pub active_set: Vec<usize>,
    pub directions: Vec<ElementShape>,
    pub support: Vec<usize>,
    /// Hypotheses indexed by `weights`.
    pub hypotheses: Vec<usize>,
    pub weights: Vec<f64>,
    pub polytope_dimension: usize,
    pub flags: Vec<String>,
}

impl From<&OptimalSolution> for SolutionSummary {
    fn from(s: &OptimalSolution) -> Self {
        SolutionSummary {
            case: s.case,
            p_error: s.p_error,
            lagrangian: s.lagrangian,
            active_set: s.active_set.clone(),
            directions: s.directions.clone(),
            support: s.support.clone(),
            hypotheses: s.weight_polytope.hypotheses.clone(),
            weights: s.canonical_weights.clone(),
            polytope_dimension: s.weight_polytope.dimension,
            flags: s.flags.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OracleComparison {
    pub p_error: f64,
    pub difference: f64,
    pub tolerance: f64,
    pub agrees: bool,
    pub dual: DualResult,
}
