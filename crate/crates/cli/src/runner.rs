use std::path::{Path, PathBuf};

use orthobracket_core::flows::{
    exact_flow_opuc, exact_flow_oprl, integrate_flow, opuc_ode_check, oprl_ode_check, vector_field_checks, FlowSpec,
};
use orthobracket_core::oprl::{jacobi_to_measure, measure_to_jacobi, zeros_interlace};
use orthobracket_core::opuc::{cmv_to_measure, measure_to_verblunsky, para_zeros_interlace, strip_cs};
use orthobracket_core::periodic::{periodic_checks, verify_periodic_brackets, PeriodicParams};
use orthobracket_core::poisson::{
    jacobian_opuc, jacobian_oprl, symplectic_check, verify_fundamental_opuc, verify_fundamental_oprl,
    verify_identity_suite_opuc, verify_identity_suite_oprl, Backend, BracketReport, Grid, JacobianVariant, ParamPoint,
    PoissonTensor, Tolerances,
};
use orthobracket_core::{JacobiParams, Result, VerblunskyParams, C64};
use serde::Serialize;

use crate::config::{Command, Compare, ConfigError, Family, FlowKindArg, RunConfig};
use crate::sample::Sampler;

/// Roundtrip through the spectral measure.
pub const ROUNDTRIP_TOL: f64 = 1e-9;
/// Coefficient stripping residual.
pub const STRIP_TOL: f64 = 1e-12;
/// Accuracy the computed zeros must certify before their order is trusted.
pub const INTERLACE_RESOLUTION: f64 = 1e-9;
pub const JACOBIAN_TOL: f64 = 1e-6;
/// RK4 against the exact spectral solution.
pub const FLOW_DEVIATION_TOL: f64 = 1e-6;
/// Drift of the monitored traces along RK4.
pub const DRIFT_TOL: f64 = 1e-9;

pub const REPORT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stream offset separating periodic instances from finite ones of equal size.
const PERIODIC_STREAM: u64 = 1 << 32;

#[derive(Serialize)]
struct Document<'a> {
    version: &'a str,
    config_echo: &'a RunConfig,
    reports: &'a [BracketReport],
}

/// Result of a run. Nothing is written to disk here; the binary decides
/// where `json` and the CSV files go.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub reports: Vec<BracketReport>,
    pub json: String,
    /// Trajectory CSV contents keyed by destination path.
    pub csv: Vec<(PathBuf, String)>,
    /// Human-readable lines for stderr.
    pub messages: Vec<String>,
}

impl RunOutput {
    pub fn failures(&self) -> Vec<&BracketReport> {
        self.reports.iter().filter(|r| r.pass == Some(false)).collect()
    }

    /// 0 when every asserted report passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures().is_empty() {
            0
        } else {
            1
        }
    }
}

/// Turns a failed suite into a single failing report carrying the error.
fn guard(id: &str, size: usize, res: Result<Vec<BracketReport>>) -> Vec<BracketReport> {
    res.unwrap_or_else(|e| vec![BracketReport::asserted(id, size, "", f64::INFINITY, 0.0, format!("error: {e}"))])
}

fn tolerances(cfg: &RunConfig) -> Tolerances {
    Tolerances { overrides: cfg.tolerances.clone(), global: cfg.tolerance }
}

pub fn run(cfg: &RunConfig) -> std::result::Result<RunOutput, ConfigError> {
    cfg.validate()?;
    let family = cfg.family()?;
    let tols = tolerances(cfg);
    let mut out = RunOutput { reports: Vec::new(), json: String::new(), csv: Vec::new(), messages: Vec::new() };
    for &n in &cfg.sizes {
        match cfg.command {
            Command::Verify => out.reports.extend(verify_size(cfg, family, n, &tols)),
            Command::Jacobian => jacobian_size(cfg, family, n, &tols, &mut out),
            Command::Periodic => {
                let params = periodic_instance(cfg.seed, family, n);
                out.reports.extend(periodic_size(&params, cfg.grid, &tols));
            }
            Command::Flow => flow_size(cfg, family, n, &tols, &mut out)?,
        }
    }
    out.reports.sort_by(|x, y| x.identity_id.cmp(&y.identity_id).then(x.size.cmp(&y.size)));
    let doc = Document { version: REPORT_VERSION, config_echo: cfg, reports: &out.reports };
    out.json = serde_json::to_string_pretty(&doc).expect("reports serialize") + "\n";
    Ok(out)
}

pub fn jacobi_instance(seed: u64, n: usize) -> JacobiParams {
    Sampler::new(seed, n as u64).jacobi(n)
}

pub fn verblunsky_instance(seed: u64, n: usize) -> VerblunskyParams {
    Sampler::new(seed, n as u64).verblunsky(n)
}

pub fn periodic_instance(seed: u64, family: Family, p: usize) -> PeriodicParams {
    let mut s = Sampler::new(seed, PERIODIC_STREAM + p as u64);
    match family {
        Family::Oprl => PeriodicParams::Oprl(s.periodic_oprl(p)),
        Family::Opuc => PeriodicParams::Opuc(s.periodic_opuc(p)),
    }
}

fn verify_size(cfg: &RunConfig, family: Family, n: usize, tols: &Tolerances) -> Vec<BracketReport> {
    let mut r = Vec::new();
    match family {
        Family::Oprl => {
            let j = jacobi_instance(cfg.seed, n);
            r.extend(guard("oprl_fundamental", n, verify_fundamental_oprl(&j, tols)));
            r.extend(guard(
                "oprl_identity_suite",
                n,
                verify_identity_suite_oprl(&j, &Grid::real_line(cfg.grid), tols, Backend::Dual),
            ));
            r.extend(guard("oprl_symplectic", n, symplectic_check(&ParamPoint::Oprl(j.clone()), tols)));
            r.extend(guard("oprl_measure_roundtrip", n, oprl_roundtrip(&j, tols)));
            r.extend(guard("oprl_zeros_interlace", n, oprl_interlace(&j, tols)));
        }
        Family::Opuc => {
            let v = verblunsky_instance(cfg.seed, n);
            r.extend(guard("opuc_fundamental", n, verify_fundamental_opuc(&v, tols)));
            r.extend(guard(
                "opuc_identity_suite",
                n,
                verify_identity_suite_opuc(&v, &Grid::circle(cfg.grid), tols, Backend::Dual),
            ));
            r.extend(guard("opuc_symplectic", n, symplectic_check(&ParamPoint::Opuc(v.clone()), tols)));
            r.extend(guard("opuc_strip", n, opuc_strip(&v, tols)));
            r.extend(guard("opuc_measure_roundtrip", n, opuc_roundtrip(&v, tols)));
            r.extend(guard("opuc_zeros_interlace", n, opuc_interlace(&v, tols)));
        }
    }
    // periodic structures of period n; OPUC needs an even period
    if family == Family::Oprl || n.is_multiple_of(2) {
        r.extend(periodic_size(&periodic_instance(cfg.seed, family, n), cfg.grid, tols));
    }
    r
}

fn periodic_size(params: &PeriodicParams, grid: usize, tols: &Tolerances) -> Vec<BracketReport> {
    let p = params.period();
    let (prefix, grid) = match params {
        PeriodicParams::Oprl(_) => ("periodic_oprl", Grid::real_line(grid)),
        PeriodicParams::Opuc(_) => ("periodic_opuc", Grid::circle(grid)),
    };
    let mut r = guard(&format!("{prefix}_checks"), p, periodic_checks(params, tols));
    r.extend(guard(&format!("{prefix}_brackets"), p, verify_periodic_brackets(params, &grid, tols)));
    r
}

/// J -> measure -> J and measure -> J -> measure.
pub fn oprl_roundtrip(j: &JacobiParams, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let n = j.size();
    let m = jacobi_to_measure(j)?;
    let back = measure_to_jacobi(&m)?;
    let again = jacobi_to_measure(&back)?;
    Ok(vec![
        BracketReport::asserted(
            "oprl_jacobi_measure_roundtrip",
            n,
            "",
            j.max_diff(&back),
            tols.get("oprl_jacobi_measure_roundtrip", ROUNDTRIP_TOL),
            "max parameter difference".into(),
        ),
        BracketReport::asserted(
            "oprl_measure_jacobi_roundtrip",
            n,
            "",
            m.max_diff(&again),
            tols.get("oprl_measure_jacobi_roundtrip", ROUNDTRIP_TOL),
            format!("max node/weight difference, min node gap {:.3e}", m.min_gap()),
        ),
    ])
}

/// Verblunsky -> measure -> Verblunsky and back.
pub fn opuc_roundtrip(v: &VerblunskyParams, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let n = v.size();
    let m = cmv_to_measure(v)?;
    let back = measure_to_verblunsky(&m)?;
    let again = cmv_to_measure(&back)?;
    Ok(vec![
        BracketReport::asserted(
            "opuc_verblunsky_measure_roundtrip",
            n,
            "",
            v.max_diff(&back),
            tols.get("opuc_verblunsky_measure_roundtrip", ROUNDTRIP_TOL),
            "max parameter difference, beta included".into(),
        ),
        BracketReport::asserted(
            "opuc_measure_verblunsky_roundtrip",
            n,
            "",
            m.max_diff(&again),
            tols.get("opuc_measure_verblunsky_roundtrip", ROUNDTRIP_TOL),
            format!("max angle/weight difference, min angular gap {:.3e}", m.min_gap()),
        ),
    ])
}

/// Residual is the violation count: 0 when the zeros alternate, 1 otherwise.
fn interlace_report(id: &str, n: usize, interlaced: bool, tol: f64, notes: String) -> BracketReport {
    BracketReport::asserted(id, n, "", if interlaced { 0.0 } else { 1.0 }, tol, notes)
}

pub fn oprl_interlace(j: &JacobiParams, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let il = zeros_interlace(j, INTERLACE_RESOLUTION)?;
    let id = "oprl_zeros_interlace";
    let notes = format!(
        "min separation {:.3e}, certified root accuracy {:.1e}, resolution {:.0e}",
        il.min_separation, il.root_accuracy, INTERLACE_RESOLUTION
    );
    Ok(vec![interlace_report(id, j.size(), il.interlaced, tols.get(id, 0.0), notes)])
}

pub fn opuc_interlace(v: &VerblunskyParams, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let il = para_zeros_interlace(v, INTERLACE_RESOLUTION)?;
    let id = "opuc_zeros_interlace";
    // zeros off the circle would make the angular order meaningless
    let on_circle = il.max_radius_error < INTERLACE_RESOLUTION;
    let notes = format!(
        "min angular separation {:.3e}, max ||z|-1| {:.1e}, resolution {:.0e}",
        il.min_separation, il.max_radius_error, INTERLACE_RESOLUTION
    );
    Ok(vec![interlace_report(id, v.size(), il.interlaced && on_circle, tols.get(id, 0.0), notes)])
}

pub fn opuc_strip(v: &VerblunskyParams, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let n = v.size();
    let s = strip_cs(v)?;
    Ok(vec![
        BracketReport::asserted(
            "opuc_strip_cs",
            n,
            "coefficients",
            s.cs_residual,
            tols.get("opuc_strip_cs", STRIP_TOL),
            "C and S after removing alpha_0".into(),
        ),
        BracketReport::reported(
            "opuc_strip_cs_factored",
            n,
            "coefficients",
            s.cs_residual_factored,
            tols.get("opuc_strip_cs_factored", STRIP_TOL),
            "C step written as z (C' - alpha_0 z S'); does not hold".into(),
        ),
        BracketReport::asserted(
            "opuc_strip_pq",
            n,
            "coefficients",
            s.pq_residual,
            tols.get("opuc_strip_pq", STRIP_TOL),
            "P and Q after removing alpha_0".into(),
        ),
    ])
}

fn jacobian_size(cfg: &RunConfig, family: Family, n: usize, tols: &Tolerances, out: &mut RunOutput) {
    let checks = match family {
        Family::Oprl => {
            let j = jacobi_instance(cfg.seed, n);
            [JacobianVariant::FixedTrace, JacobianVariant::Full].map(|v| (v, jacobian_oprl(&j, v)))
        }
        Family::Opuc => {
            let v = verblunsky_instance(cfg.seed, n);
            [JacobianVariant::FixedBeta, JacobianVariant::FreeBeta].map(|var| (var, jacobian_opuc(&v, var)))
        }
    };
    for (variant, res) in checks {
        let id = format!("jacobian_{}", variant_name(variant));
        match res {
            Ok(c) => {
                out.messages.push(format!(
                    "{id} N={n}: numeric {:.12e} formula {:.12e} relative gap {:.3e}",
                    c.numeric_det, c.formula_det, c.relative_error
                ));
                out.reports.push(BracketReport::asserted(
                    &id,
                    n,
                    "",
                    c.relative_error,
                    tols.get(&id, JACOBIAN_TOL),
                    format!("numeric {:.12e}, formula {:.12e}", c.numeric_det, c.formula_det),
                ));
            }
            Err(e) => out.reports.extend(guard(&id, n, Err(e))),
        }
    }
}

fn variant_name(v: JacobianVariant) -> &'static str {
    match v {
        JacobianVariant::FixedTrace => "oprl_fixed_trace",
        JacobianVariant::Full => "oprl_full",
        JacobianVariant::FixedBeta => "opuc_fixed_beta",
        JacobianVariant::FreeBeta => "opuc_free_beta",
    }
}

fn flow_spec(cfg: &RunConfig, family: Family) -> std::result::Result<FlowSpec, ConfigError> {
    let f = cfg.flow.as_ref().ok_or_else(|| ConfigError("flow settings missing".into()))?;
    let spec = match (f.kind, family) {
        (FlowKindArg::Toda, _) => FlowSpec::toda(f.t, f.dt),
        (FlowKindArg::Schur, _) => FlowSpec::schur(f.t, f.dt),
        (FlowKindArg::Custom, Family::Oprl) => FlowSpec::oprl(f.coeffs.clone(), f.t, f.dt),
        (FlowKindArg::Custom, Family::Opuc) => {
            FlowSpec::opuc(f.coeffs.chunks(2).map(|c| C64::new(c[0], c[1])).collect(), f.t, f.dt)
        }
    };
    spec.map_err(|e| ConfigError(format!("flow: {e}")))
}

fn csv_path(out: &Path, n: usize, many: bool) -> PathBuf {
    if !many {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_n{n}.{}", ext.to_string_lossy()),
        None => format!("{stem}_n{n}"),
    };
    out.with_file_name(name)
}

fn flow_size(
    cfg: &RunConfig,
    family: Family,
    n: usize,
    tols: &Tolerances,
    out: &mut RunOutput,
) -> std::result::Result<(), ConfigError> {
    let spec = flow_spec(cfg, family)?;
    let compare = cfg.flow.as_ref().map_or(Compare::Exact, |f| f.compare);
    let (start, tensor) = match family {
        Family::Oprl => (ParamPoint::Oprl(jacobi_instance(cfg.seed, n)), PoissonTensor::oprl_finite(n)),
        Family::Opuc => (ParamPoint::Opuc(verblunsky_instance(cfg.seed, n)), PoissonTensor::opuc_finite(n)),
    };
    let traj = match integrate_flow(&spec, &start, &tensor, Backend::Dual) {
        Ok(t) => t,
        Err(e) => {
            out.reports.extend(guard("flow_integration", n, Err(e)));
            return Ok(());
        }
    };

    if compare == Compare::Exact {
        let deviation = match (&start, traj.last()) {
            (ParamPoint::Oprl(j), Some(ParamPoint::Oprl(end))) => exact_flow_oprl(j, &spec, spec.t_final).map(|e| e.max_diff(end)),
            (ParamPoint::Opuc(v), Some(ParamPoint::Opuc(end))) => exact_flow_opuc(v, &spec, spec.t_final).map(|e| e.max_diff(end)),
            _ => unreachable!("trajectory family matches its start"),
        };
        match deviation {
            Ok(d) => {
                out.messages.push(format!("max deviation N={n} t={}: {d:.3e}", spec.t_final));
                out.reports.push(BracketReport::asserted(
                    "flow_exact_deviation",
                    n,
                    "",
                    d,
                    tols.get("flow_exact_deviation", FLOW_DEVIATION_TOL),
                    format!("RK4 dt={} against the exact spectral solution", spec.dt),
                ));
            }
            Err(e) => out.reports.extend(guard("flow_exact_deviation", n, Err(e))),
        }
    }

    let drift = traj.max_drift();
    let worst = drift.iter().copied().fold(0.0, f64::max);
    let absolute = traj.max_absolute_drift();
    let detail: Vec<String> =
        traj.labels.iter().zip(&drift).zip(&absolute).map(|((l, d), a)| format!("{l} {d:.1e} (absolute {a:.1e})")).collect();
    out.reports.push(BracketReport::asserted(
        "flow_invariant_drift",
        n,
        "",
        worst,
        tols.get("flow_invariant_drift", DRIFT_TOL),
        detail.join(", "),
    ));

    let odes = match &start {
        ParamPoint::Oprl(j) => oprl_ode_check(j, &spec, tols),
        ParamPoint::Opuc(v) => opuc_ode_check(v, &spec, tols),
    };
    out.reports.extend(guard("flow_induced_ode", n, odes));
    out.reports.extend(guard("flow_vector_field", n, vector_field_checks(&start, tols)));

    if let Some(path) = &cfg.out {
        out.csv.push((csv_path(path, n, cfg.sizes.len() > 1), trajectory_csv(&traj.header(), &traj.rows())));
    }
    Ok(())
}

/// Header row then one row per time step. Numbers use the shortest
/// representation that reads back exactly.
pub fn trajectory_csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string())).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}
