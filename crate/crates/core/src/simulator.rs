//! Monte Carlo of the discrimination experiment.
//!
//! Trial `i` draws the prepared hypothesis `j` from the priors and the outcome
//! `k` from `P(k|j) = Tr(Π_k ρ_j)`. Its random numbers come from the ChaCha8
//! keystream at word offset `4i` for the given seed, so every trial is a pure
//! function of `(seed, i)` and any partition of the trial range gives the same
//! counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::{error_probability, Povm};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::tol;

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    /// `counts[j][k]`: prepared `j`, detected `k`.
    pub counts: Vec<Vec<u64>>,
    /// Empirical `P(k|j)`; rows for hypotheses never drawn are all zero.
    pub confusion: Vec<Vec<f64>>,
    /// Exact `Tr(Π_k ρ_j)` after clamping and renormalization.
    pub born: Vec<Vec<f64>>,
    pub empirical_error: f64,
    pub analytic_error: f64,
    /// `√(P_e(1 − P_e)/trials)` with the analytic `P_e`.
    pub standard_error: f64,
}

impl SimulationReport {
    /// Delimited confusion matrix, one row per prepared hypothesis.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("prepared");
        for k in 0..self.confusion.len() {
            out.push_str(&format!(",detected_{k}"));
        }
        out.push('\n');
        for (j, row) in self.confusion.iter().enumerate() {
            out.push_str(&j.to_string());
            for p in row {
                out.push_str(&format!(",{p:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Born-rule outcome distribution per hypothesis. Values in `[−1e-12, 0)` are
/// clamped to zero and the row renormalized; anything more negative is an error.
pub fn outcome_distributions(e: &Ensemble, p: &Povm) -> Result<Vec<Vec<f64>>> {
    if p.len() != e.len() {
        return Err(Error::SizeMismatch { expected: e.len(), actual: p.len() });
    }
    e.states()
        .iter()
        .enumerate()
        .map(|(j, rho)| {
            let mut row: Vec<f64> = p.elements().iter().map(|pi| rho.op().trace_product(pi.op())).collect();
            if let Some((k, v)) = row.iter().enumerate().find(|(_, v)| **v < -tol::STRUCTURAL) {
                return Err(Error::InvalidSampling(format!("P({k}|{j}) = {v}")));
            }
            row.iter_mut().for_each(|v| *v = v.max(0.0));
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > tol::FEASIBILITY {
                return Err(Error::InvalidSampling(format!("row {j} sums to {total}")));
            }
            row.iter_mut().for_each(|v| *v /= total);
            Ok(row)
        })
        .collect()
}

fn draw(cumulative: &[f64], u: f64) -> usize {
    cumulative.iter().position(|c| u < *c).unwrap_or(cumulative.len() - 1)
}

fn cumulative(row: &[f64]) -> Vec<f64> {
    row.iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

/// Counts for trials `start..end`.
fn run_range(seed: u64, start: u64, end: u64, priors: &[f64], outcomes: &[Vec<f64>]) -> Vec<Vec<u64>> {
    let n = priors.len();
    let mut counts = vec![vec![0u64; n]; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(4 * start as u128);
    for _ in start..end {
        let j = draw(priors, rng.random::<f64>());
        let k = draw(&outcomes[j], rng.random::<f64>());
        counts[j][k] += 1;
    }
    counts
}

pub fn simulate(e: &Ensemble, p: &Povm, trials: u64, seed: u64) -> Result<SimulationReport> {
    if trials == 0 {
        return Err(Error::InvalidSampling("at least one trial is required".into()));
    }
    let born = outcome_distributions(e, p)?;
    let outcome_cdf: Vec<Vec<f64>> = born.iter().map(|r| cumulative(r)).collect();
    let prior_cdf = cumulative(e.priors());
    let n = e.len();

    let chunks: Vec<(u64, u64)> = (0..trials.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(trials)))
        .collect();
    let counts = chunks
        .par_iter()
        .map(|&(a, b)| run_range(seed, a, b, &prior_cdf, &outcome_cdf))
        .reduce(
            || vec![vec![0u64; n]; n],
            |mut acc, part| {
                for (r, s) in acc.iter_mut().zip(part) {
                    for (x, y) in r.iter_mut().zip(s) {
                        *x += y;
                    }
                }
                acc
            },
        );

    let errors: u64 = (0..n)
        .flat_map(|j| (0..n).filter(move |k| *k != j).map(move |k| (j, k)))
        .map(|(j, k)| counts[j][k])
        .sum();
    let confusion = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            row.iter()
                .map(|c| if total == 0 { 0.0 } else { *c as f64 / total as f64 })
                .collect()
        })
        .collect();
    let analytic_error = error_probability(p, e);
    Ok(SimulationReport {
        trials,
        seed,
        counts,
        confusion,
        born,
        empirical_error: errors as f64 / trials as f64,
        analytic_error,
        standard_error: (analytic_error * (1.0 - analytic_error) / trials as f64).sqrt(),
    })
}
