use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use minerr_core::{
    check_global_with_tolerance, enumerate_optimal_family, recover_povm_from_dual, simulate as run_simulation,
    solve_dual, solve_equiprobable_pure, tol, Certificate, Ensemble, Error, OptimalSolution, Povm,
};
use serde::Serialize;

use crate::json;
use crate::report::{OracleComparison, RunReport, SolutionSummary};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_UNSUPPORTED: u8 = 2;
pub const EXIT_NOT_OPTIMAL: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
    pub hint: Option<String>,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID, message: message.into(), hint: None }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let (code, hint) = match &err {
            Error::Unsupported(_) => (
                EXIT_UNSUPPORTED,
                Some("the constructive solver covers equiprobable pure states and any pair; try `minerr oracle`".into()),
            ),
            Error::NotFormable | Error::SolverExhausted(_) => {
                (EXIT_NUMERIC, Some("`minerr oracle` solves any ensemble numerically".into()))
            }
            Error::NonConvergence { .. } | Error::Recovery(_) => (EXIT_NUMERIC, None),
            _ => (EXIT_INVALID, None),
        };
        CliError { code, message: err.to_string(), hint }
    }
}

pub struct Context {
    pub ensemble: PathBuf,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub tolerance: Option<f64>,
}

impl Context {
    fn tolerance(&self) -> Result<f64, CliError> {
        match self.tolerance {
            None => Ok(tol::FEASIBILITY),
            Some(t) if t.is_finite() && t > 0.0 => Ok(t),
            Some(t) => Err(CliError::invalid(format!("tolerance must be positive and finite, got {t}"))),
        }
    }

    fn load_ensemble(&self) -> Result<Ensemble, CliError> {
        Ok(Ensemble::from_json(&read(&self.ensemble)?)?)
    }

    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.output {
            Some(path) => write(path, text),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::invalid(format!("standard output: {e}"))),
        }
    }

    fn emit_report(&self, report: &RunReport) -> Result<(), CliError> {
        self.emit(&to_json(report)?)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    json::to_string(value).map_err(|e| CliError { code: EXIT_NUMERIC, message: e.to_string(), hint: None })
}

fn load_povm(path: &Path) -> Result<Povm, CliError> {
    Ok(Povm::from_json(&read(path)?)?)
}

fn verdict_code(cert: &Certificate) -> u8 {
    if cert.is_optimal() {
        EXIT_OK
    } else {
        EXIT_NOT_OPTIMAL
    }
}

/// The solver's certificate, re-evaluated only when the tolerance was overridden.
fn certificate(sol: &OptimalSolution, e: &Ensemble, ctx: &Context) -> Result<Certificate, CliError> {
    match ctx.tolerance {
        None => Ok(sol.certificate.clone()),
        Some(_) => Ok(check_global_with_tolerance(&sol.canonical_povm, e, ctx.tolerance()?)?),
    }
}

fn write_povm(path: Option<&Path>, povm: &Povm) -> Result<(), CliError> {
    match path {
        Some(p) => write(p, &to_json(povm)?),
        None => Ok(()),
    }
}

pub fn solve(ctx: &Context, oracle_check: bool, trials: Option<u64>, povm_out: Option<&Path>) -> Result<u8, CliError> {
    let e = ctx.load_ensemble()?;
    let sol = solve_equiprobable_pure(&e)?;
    let cert = certificate(&sol, &e, ctx)?;
    let mut report = RunReport::new("solve", ctx.seed, e.to_document());
    report.solution = Some(SolutionSummary::from(&sol));

    let mut code = verdict_code(&cert);
    if oracle_check {
        let dual = solve_dual(&e, ctx.seed)?;
        let difference = (dual.p_error - sol.p_error).abs();
        let agrees = difference <= tol::ORACLE_AGREEMENT;
        if !agrees {
            eprintln!("warning: solver and oracle differ by {difference:e}");
            code = EXIT_NUMERIC;
        }
        report.oracle = Some(OracleComparison {
            p_error: dual.p_error,
            difference,
            tolerance: tol::ORACLE_AGREEMENT,
            agrees,
            dual,
        });
    }
    if let Some(n) = trials {
        report.simulation = Some(run_simulation(&e, &sol.canonical_povm, n, ctx.seed)?);
    }
    write_povm(povm_out, &sol.canonical_povm)?;
    report.povm = Some(sol.canonical_povm);
    report.certificate = Some(cert);
    ctx.emit_report(&report)?;
    Ok(code)
}

pub fn oracle(ctx: &Context, trials: Option<u64>, povm_out: Option<&Path>) -> Result<u8, CliError> {
    let e = ctx.load_ensemble()?;
    let dual = solve_dual(&e, ctx.seed)?;
    let povm = recover_povm_from_dual(&dual, &e)?;
    let cert = check_global_with_tolerance(&povm, &e, ctx.tolerance()?)?;
    let mut report = RunReport::new("oracle", ctx.seed, e.to_document());
    if let Some(n) = trials {
        report.simulation = Some(run_simulation(&e, &povm, n, ctx.seed)?);
    }
    write_povm(povm_out, &povm)?;
    let code = verdict_code(&cert);
    report.dual = Some(dual);
    report.povm = Some(povm);
    report.certificate = Some(cert);
    ctx.emit_report(&report)?;
    Ok(code)
}

pub fn verify(ctx: &Context, povm_path: &Path) -> Result<u8, CliError> {
    let e = ctx.load_ensemble()?;
    let povm = load_povm(povm_path)?;
    let cert = check_global_with_tolerance(&povm, &e, ctx.tolerance()?)?;
    let code = verdict_code(&cert);
    let mut report = RunReport::new("verify", ctx.seed, e.to_document());
    report.povm = Some(povm);
    report.certificate = Some(cert);
    ctx.emit_report(&report)?;
    Ok(code)
}

pub fn simulate(
    ctx: &Context,
    povm_path: Option<&Path>,
    trials: u64,
    confusion_csv: Option<&Path>,
) -> Result<u8, CliError> {
    let e = ctx.load_ensemble()?;
    let povm = match povm_path {
        Some(p) => load_povm(p)?,
        None => solve_equiprobable_pure(&e)?.canonical_povm,
    };
    let sim = run_simulation(&e, &povm, trials, ctx.seed)?;
    if let Some(path) = confusion_csv {
        write(path, &sim.confusion_csv())?;
    }
    let mut report = RunReport::new("simulate", ctx.seed, e.to_document());
    report.povm = Some(povm);
    report.simulation = Some(sim);
    ctx.emit_report(&report)?;
    Ok(EXIT_OK)
}

pub fn family(ctx: &Context) -> Result<u8, CliError> {
    let e = ctx.load_ensemble()?;
    let sol = solve_equiprobable_pure(&e)?;
    let cert = certificate(&sol, &e, ctx)?;
    let fam = enumerate_optimal_family(&sol, &e);
    let code = verdict_code(&cert);
    let mut report = RunReport::new("family", ctx.seed, e.to_document());
    report.solution = Some(SolutionSummary::from(&sol));
    report.povm = Some(sol.canonical_povm);
    report.certificate = Some(cert);
    report.family = Some(fam);
    ctx.emit_report(&report)?;
    Ok(code)
}

/// One row per state and per nonzero element: Bloch coordinates plus the
/// prior (states) or trace (elements). Element coordinates are the unit
/// direction of a rank-one element, or the raw Bloch vector otherwise.
pub fn export_bloch(ctx: &Context, povm_path: Option<&Path>) -> Result<u8, CliError> {
    let e = ctx.load_ensemble()?;
    let povm = match povm_path {
        Some(p) => load_povm(p)?,
        None => solve_equiprobable_pure(&e)?.canonical_povm,
    };
    if povm.len() != e.len() {
        return Err(Error::SizeMismatch { expected: e.len(), actual: povm.len() }.into());
    }
    let mut out = String::from("kind,index,x,y,z,weight\n");
    for (k, (rho, p)) in e.states().iter().zip(e.priors()).enumerate() {
        let b = rho.bloch_vector();
        out.push_str(&format!("state,{k},{:.16e},{:.16e},{:.16e},{p:.16e}\n", b.x, b.y, b.z));
    }
    for (k, el) in povm.elements().iter().enumerate() {
        if el.is_zero(tol::STRUCTURAL) {
            continue;
        }
        let op = el.op();
        let v = if (op.bloch.norm() - op.scalar).abs() <= tol::FEASIBILITY {
            op.bloch / op.scalar
        } else {
            op.bloch
        };
        out.push_str(&format!("element,{k},{:.16e},{:.16e},{:.16e},{:.16e}\n", v.x, v.y, v.z, op.trace()));
    }
    ctx.emit(&out)?;
    Ok(EXIT_OK)
}
