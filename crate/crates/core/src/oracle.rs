//! Independent numerical solution of the dual problem
//!
//! ```text
//! minimize Tr C   subject to   C − p_k ρ_k ⪰ 0  for all k,
//! ```
//!
//! with `C = c₀·1 + c·σ` parametrized by four reals. In Bloch form each
//! constraint reads `c₀ − p_k/2 ≥ |c − p_k v_k|`, a second-order cone, so the
//! minimum eigenvalue is available in closed form. The solver follows the
//! central path of the log-barrier `−Σ ln((c₀ − a_k)² − |c − x_k|²)` with
//! damped Newton steps, growing the objective weight geometrically. The
//! duality gap on the path is `2m/t`, which gives the stopping rule.
//!
//! Nothing here uses the structure exploited by [`crate::solver`]; the oracle
//! is the ground truth the structured solver is tested against.

use nalgebra::{Matrix4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::{check_dual_feasible, check_global, error_probability, Povm};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::polytope::{kernel_shape, WeightPolytope};
use crate::qubit::{BlochDirection, HermitianOp2};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualOptions {
    pub restarts: usize,
    /// Newton steps allowed per restart.
    pub iteration_budget: usize,
    /// Factor applied to the barrier weight between centering rounds.
    pub weight_growth: f64,
    /// Target bound on the duality gap `2m/t`.
    pub gap: f64,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions { restarts: 16, iteration_budget: 100_000, weight_growth: 10.0, gap: 1e-13 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualResult {
    pub c_star: HermitianOp2,
    pub p_error: f64,
    /// Newton steps taken by the winning restart.
    pub iterations: usize,
    /// `max_k max(0, −λ_min(C − p_k ρ_k))`.
    pub max_infeasibility: f64,
    pub restart: usize,
    pub seed: u64,
}

struct Cone {
    apex: f64,
    center: Vector3<f64>,
}

struct Barrier<'a> {
    cones: &'a [Cone],
}

impl Barrier<'_> {
    /// `(c₀ − a_k, (c₀ − a_k)² − |c − x_k|²)` per cone, or `None` outside the interior.
    fn margins(&self, x: &Vector4<f64>) -> Option<Vec<(f64, f64, Vector3<f64>)>> {
        let c = Vector3::new(x[1], x[2], x[3]);
        self.cones
            .iter()
            .map(|k| {
                let u = x[0] - k.apex;
                let r = c - k.center;
                let h = u * u - r.norm_squared();
                (u > 0.0 && h > 0.0).then_some((u, h, r))
            })
            .collect()
    }

    /// Gradient and Hessian of `t·2c₀ − Σ ln h_k`.
    fn derivatives(&self, t: f64, m: &[(f64, f64, Vector3<f64>)]) -> (Vector4<f64>, Matrix4<f64>) {
        let mut g = Vector4::new(2.0 * t, 0.0, 0.0, 0.0);
        let mut hess = Matrix4::zeros();
        for &(u, h, r) in m {
            let dh = Vector4::new(2.0 * u, -2.0 * r.x, -2.0 * r.y, -2.0 * r.z);
            g -= dh / h;
            hess += dh * dh.transpose() / (h * h);
            hess -= Matrix4::from_diagonal(&Vector4::new(2.0, -2.0, -2.0, -2.0)) / h;
        }
        (g, hess)
    }

    /// `F(x') − F(x)` without forming the large `t·2c₀` terms.
    fn delta(&self, t: f64, x: &Vector4<f64>, m: &[(f64, f64, Vector3<f64>)], y: &Vector4<f64>) -> Option<f64> {
        let my = self.margins(y)?;
        let logs: f64 = m.iter().zip(&my).map(|(a, b)| (b.1 / a.1).ln()).sum();
        Some(2.0 * t * (y[0] - x[0]) - logs)
    }
}

struct Run {
    x: Vector4<f64>,
    iterations: usize,
}

fn central_path(cones: &[Cone], start: Vector4<f64>, opts: &DualOptions) -> std::result::Result<Run, Run> {
    let barrier = Barrier { cones };
    let mut x = start;
    let mut iterations = 0;
    let mut t = 1.0;
    let target = 2.0 * cones.len() as f64 / opts.gap;
    loop {
        // Centering by damped Newton.
        loop {
            let m = barrier.margins(&x).expect("iterate stays interior");
            let (g, h) = barrier.derivatives(t, &m);
            let step = match h.cholesky() {
                Some(ch) => -ch.solve(&g),
                None => match h.lu().solve(&(-g)) {
                    Some(s) => s,
                    None => break,
                },
            };
            let decrement = -g.dot(&step);
            if decrement.is_nan() || decrement <= 1e-14 {
                break;
            }
            iterations += 1;
            if iterations > opts.iteration_budget {
                return Err(Run { x, iterations });
            }
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-12 {
                let y = x + step * alpha;
                if let Some(d) = barrier.delta(t, &x, &m, &y) {
                    if d <= -0.25 * alpha * decrement {
                        x = y;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved || decrement < 1e-10 {
                break;
            }
        }
        if t >= target {
            return Ok(Run { x, iterations });
        }
        t = (t * opts.weight_growth).min(target);
    }
}

fn cones(e: &Ensemble) -> Vec<Cone> {
    e.weighted_states()
        .map(|w| Cone { apex: w.0.scalar, center: w.0.bloch })
        .collect()
}

fn to_op(x: &Vector4<f64>) -> HermitianOp2 {
    HermitianOp2::new(x[0], Vector3::new(x[1], x[2], x[3]))
}

/// Minimizes `Tr C` over dual-feasible `C` from `opts.restarts` seeded interior
/// starting points. The winner is the lowest objective, ties going to the
/// lowest restart index, so the result does not depend on scheduling.
pub fn solve_dual_with(e: &Ensemble, seed: u64, opts: &DualOptions) -> Result<DualResult> {
    let cones = cones(e);
    let starts: Vec<Vector4<f64>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..opts.restarts.max(1))
            .map(|_| {
                let c = Vector3::new(
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                );
                let c0 = cones
                    .iter()
                    .map(|k| k.apex + (c - k.center).norm())
                    .fold(f64::NEG_INFINITY, f64::max);
                Vector4::new(c0 + 0.5 + rng.random_range(0.0..0.5), c.x, c.y, c.z)
            })
            .collect()
    };
    let runs: Vec<_> = starts.par_iter().map(|s| central_path(&cones, *s, opts)).collect();

    let best = runs
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().ok().map(|run| (i, run)))
        .min_by(|a, b| a.1.x[0].total_cmp(&b.1.x[0]).then(a.0.cmp(&b.0)));
    let Some((restart, run)) = best else {
        let (iterations, x) = runs
            .iter()
            .map(|r| match r {
                Ok(run) | Err(run) => (run.iterations, run.x),
            })
            .min_by(|a, b| a.1[0].total_cmp(&b.1[0]))
            .expect("at least one restart");
        return Err(Error::NonConvergence { iterations, best_p_error: 1.0 - 2.0 * x[0] });
    };
    let c_star = to_op(&run.x);
    let max_infeasibility = check_dual_feasible(&c_star, e)
        .into_iter()
        .map(|s| (-s).max(0.0))
        .fold(0.0, f64::max);
    Ok(DualResult {
        c_star,
        p_error: 1.0 - c_star.trace(),
        iterations: run.iterations,
        max_infeasibility,
        restart,
        seed,
    })
}

pub fn solve_dual(e: &Ensemble, seed: u64) -> Result<DualResult> {
    solve_dual_with(e, seed, &DualOptions::default())
}

/// Reads an optimal POVM off an approximate dual solution: hypotheses with
/// `|det(C − p_k ρ_k)|` below a threshold are active, their elements lie along
/// the kernels, and the weights come from the completeness equations. The
/// result is exactly completed by congruence and must pass [`check_global`].
pub fn recover_povm_from_dual(r: &DualResult, e: &Ensemble) -> Result<Povm> {
    let c = r.c_star;
    let mut last = String::from("no active hypotheses");
    for det_tol in [tol::ORACLE_ACTIVE_SET, tol::FEASIBILITY, 1e-6, 1e-5] {
        let (hyp, shapes): (Vec<usize>, Vec<_>) = e
            .weighted_states()
            .enumerate()
            .filter_map(|(k, w)| kernel_shape(&c, &w.0, det_tol, 1e-6).map(|s| (k, s)))
            .unzip();
        if hyp.is_empty() {
            continue;
        }
        let polytope = WeightPolytope::enumerate(hyp, shapes, 1e-6);
        for weights in &polytope.vertices {
            let raw = polytope.elements(weights, e.len());
            let Ok(povm) = Povm::recomplete(&raw) else { continue };
            match check_global(&povm, e) {
                Ok(cert) if cert.is_optimal() => return Ok(povm),
                Ok(cert) => {
                    last = format!(
                        "det tolerance {det_tol:e}: verdict {:?}, P_e {}",
                        cert.verdict, cert.error_probability
                    )
                }
                Err(err) => last = err.to_string(),
            }
        }
    }
    Err(Error::Recovery(last))
}

/// Best POVM found by random rank-1 strategies plus local refinement. A third
/// opinion only: its error can never fall below the dual optimum.
pub fn primal_random_search(e: &Ensemble, seed: u64, restarts: usize) -> (Povm, f64) {
    let n = e.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_direction = |rng: &mut ChaCha8Rng| loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm() > 0.1 && v.norm() <= 1.0 {
            return v.normalize();
        }
    };
    let build = |dirs: &[Vector3<f64>], weights: &[f64]| -> Option<Povm> {
        let ops: Vec<HermitianOp2> = dirs
            .iter()
            .zip(weights)
            .map(|(d, w)| Some(*BlochDirection::normalize(*d).ok()?.projector().op() * w.max(0.0)))
            .collect::<Option<_>>()?;
        Povm::recomplete(&ops).ok()
    };

    // Start from the guessing strategy, which is always valid.
    let mut best_ops = vec![HermitianOp2::zero(); n];
    let top = (0..n).max_by(|a, b| e.priors()[*a].total_cmp(&e.priors()[*b])).unwrap_or(0);
    best_ops[top] = HermitianOp2::identity();
    let mut best = Povm::new(best_ops).expect("guessing strategy");
    let mut best_pe = error_probability(&best, e);

    for _ in 0..restarts.max(1) {
        let mut dirs: Vec<Vector3<f64>> = (0..n).map(|_| random_direction(&mut rng)).collect();
        let mut weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let Some(mut povm) = build(&dirs, &weights) else { continue };
        let mut pe = error_probability(&povm, e);
        let mut step = 0.3;
        for _ in 0..4000 {
            let mut nd = dirs.clone();
            let mut nw = weights.clone();
            let k = rng.random_range(0..n);
            nd[k] += random_direction(&mut rng) * step;
            nw[k] = (nw[k] + rng.random_range(-step..step)).max(0.0);
            if let Some(candidate) = build(&nd, &nw) {
                let cpe = error_probability(&candidate, e);
                if cpe < pe {
                    dirs = nd;
                    weights = nw;
                    povm = candidate;
                    pe = cpe;
                    continue;
                }
            }
            step = (step * 0.997).max(1e-6);
        }
        if pe < best_pe {
            best = povm;
            best_pe = pe;
        }
    }
    (best, best_pe)
}
