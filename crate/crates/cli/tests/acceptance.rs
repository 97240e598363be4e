//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are pinned here rather than taken from the reports,
//! so a loosened default cannot make a criterion pass.

use std::process::Command;
use std::time::Instant;

use orthobracket::runner::{
    jacobi_instance, opuc_interlace, opuc_roundtrip, opuc_strip, oprl_interlace, oprl_roundtrip, periodic_instance,
    verblunsky_instance,
};
use orthobracket::{Family, Sampler};
use orthobracket_core::flows::{
    exact_flow_opuc, exact_flow_oprl, integrate_flow, opuc_ode_check, oprl_ode_check, FlowSpec,
};
use orthobracket_core::periodic::{monodromy, periodic_checks, verify_periodic_brackets, PeriodicParams};
use orthobracket_core::poisson::{
    jacobian_opuc, jacobian_oprl, verify_fundamental_opuc, verify_fundamental_oprl, verify_identity_suite_opuc,
    verify_identity_suite_oprl, Backend, BracketReport, Grid, JacobianVariant, ParamPoint, PoissonTensor, Tolerances,
};
use orthobracket_core::{Result, C64};

struct Tally {
    checks: usize,
    worst: f64,
    failures: Vec<String>,
    skipped_reported: usize,
    absolute_drift: f64,
}

impl Tally {
    fn new() -> Self {
        Tally { checks: 0, worst: 0.0, failures: Vec::new(), skipped_reported: 0, absolute_drift: 0.0 }
    }

    fn check(&mut self, label: impl FnOnce() -> String, residual: f64, tol: f64) {
        self.checks += 1;
        if residual.is_nan() || residual > self.worst {
            self.worst = if residual.is_nan() { f64::INFINITY } else { residual };
        }
        if !(residual <= tol) {
            self.failures.push(format!("{} residual {residual:.3e} > {tol:.0e}", label()));
        }
    }

    /// Asserted reports must pass on their own terms and under the pinned bound.
    fn report(&mut self, r: &BracketReport, pinned: f64) {
        match r.pass {
            None => self.skipped_reported += 1,
            Some(ok) => {
                self.check(|| format!("{} N={}", r.identity_id, r.size), r.max_residual, pinned);
                if !ok && r.max_residual <= pinned {
                    self.failures.push(format!("{} N={} failed: {}", r.identity_id, r.size, r.notes));
                }
            }
        }
    }

    fn result(&mut self, what: &str, size: usize, res: Result<Vec<BracketReport>>, pinned: impl Fn(&str) -> f64) {
        match res {
            Ok(reports) => reports.iter().for_each(|r| self.report(r, pinned(&r.identity_id))),
            Err(e) => {
                self.checks += 1;
                self.failures.push(format!("{what} N={size}: {e}"));
            }
        }
    }

    fn fail(&mut self, msg: String) {
        self.checks += 1;
        self.failures.push(msg);
    }
}

const SEEDS: std::ops::Range<u64> = 0..20;

fn criterion_1() -> Tally {
    let mut t = Tally::new();
    let tols = Tolerances::default();
    for seed in SEEDS {
        for n in 2..=6 {
            let j = jacobi_instance(seed, n);
            let pinned = |id: &str| if id.ends_with("weight_weight") { 1e-6 } else { 1e-7 };
            t.result("oprl fundamental", n, verify_fundamental_oprl(&j, &tols), pinned);
        }
    }
    t
}

fn criterion_2() -> Tally {
    let mut t = Tally::new();
    let tols = Tolerances::default();
    for seed in SEEDS {
        for n in 2..=6 {
            let v = verblunsky_instance(seed, n);
            t.result("opuc fundamental", n, verify_fundamental_opuc(&v, &tols), |_| 1e-7);
        }
    }
    t
}

fn criterion_3() -> Tally {
    let mut t = Tally::new();
    let tols = Tolerances::default();
    let grid = Grid::real_line(8);
    for seed in 0..5 {
        for n in 2..=6 {
            let j = jacobi_instance(seed, n);
            t.result("oprl suite", n, verify_identity_suite_oprl(&j, &grid, &tols, Backend::Dual), |_| 1e-8);
        }
    }
    t
}

fn criterion_4() -> Tally {
    let mut t = Tally::new();
    let tols = Tolerances::default();
    let grid = Grid::circle(8);
    for seed in 0..5 {
        for n in 2..=5 {
            let v = verblunsky_instance(seed, n);
            t.result("opuc suite", n, verify_identity_suite_opuc(&v, &grid, &tols, Backend::Dual), |_| 1e-8);
        }
    }
    t
}

fn criterion_5() -> Tally {
    let mut t = Tally::new();
    let tols = Tolerances::default();
    for seed in SEEDS {
        for n in 2..=8 {
            t.result("strip", n, opuc_strip(&verblunsky_instance(seed, n), &tols), |_| 1e-12);
        }
    }
    t
}

fn criterion_6() -> Tally {
    let mut t = Tally::new();
    for seed in 0..10 {
        for n in 2..=4 {
            let j = jacobi_instance(seed, n);
            let v = verblunsky_instance(seed, n);
            let runs = [
                jacobian_oprl(&j, JacobianVariant::FixedTrace),
                jacobian_oprl(&j, JacobianVariant::Full),
                jacobian_opuc(&v, JacobianVariant::FixedBeta),
                jacobian_opuc(&v, JacobianVariant::FreeBeta),
            ];
            for res in runs {
                match res {
                    Ok(c) => t.check(|| format!("{:?} N={n} seed={seed}", c.variant), c.relative_error, 1e-6),
                    Err(e) => t.fail(format!("jacobian N={n} seed={seed}: {e}")),
                }
            }
        }
    }
    t
}

fn criterion_7() -> Tally {
    let mut t = Tally::new();
    let toda = FlowSpec::toda(1.0, 1e-3).unwrap();
    let schur = FlowSpec::schur(1.0, 1e-3).unwrap();
    for seed in 0..3 {
        for n in 2..=6 {
            let j = jacobi_instance(seed, n);
            match integrate_flow(&toda, &ParamPoint::Oprl(j.clone()), &PoissonTensor::oprl_finite(n), Backend::Dual) {
                Ok(traj) => {
                    let exact = exact_flow_oprl(&j, &toda, 1.0).unwrap();
                    let Some(ParamPoint::Oprl(end)) = traj.last() else { unreachable!() };
                    t.check(|| format!("toda deviation N={n} seed={seed}"), exact.max_diff(end), 1e-6);
                    // normalized by max(1, |Tr J^m(0)|); the absolute value is shown too
                    for (label, d) in traj.labels.iter().zip(traj.max_drift()) {
                        t.check(|| format!("toda drift {label} N={n} seed={seed}"), d, 1e-9);
                    }
                    t.absolute_drift = traj.max_absolute_drift().into_iter().fold(t.absolute_drift, f64::max);
                }
                Err(e) => t.fail(format!("toda N={n} seed={seed}: {e}")),
            }
            let v = verblunsky_instance(seed, n);
            match integrate_flow(&schur, &ParamPoint::Opuc(v.clone()), &PoissonTensor::opuc_finite(n), Backend::Dual) {
                Ok(traj) => {
                    let exact = exact_flow_opuc(&v, &schur, 1.0).unwrap();
                    let Some(ParamPoint::Opuc(end)) = traj.last() else { unreachable!() };
                    t.check(|| format!("schur deviation N={n} seed={seed}"), exact.max_diff(end), 1e-6);
                }
                Err(e) => t.fail(format!("schur N={n} seed={seed}: {e}")),
            }
        }
    }
    t
}

fn criterion_8() -> Tally {
    let mut t = Tally::new();
    let tols = Tolerances::default();
    let oprl_flows = [FlowSpec::toda(1.0, 1e-3).unwrap(), FlowSpec::oprl(vec![0.2, -0.4, 0.3], 1.0, 1e-3).unwrap()];
    let opuc_flows = [
        FlowSpec::schur(1.0, 1e-3).unwrap(),
        FlowSpec::opuc(vec![C64::new(0.3, 0.0), C64::new(0.2, -0.5), C64::new(0.1, 0.2)], 1.0, 1e-3).unwrap(),
    ];
    for seed in 0..3 {
        for n in 2..=6 {
            let j = jacobi_instance(seed, n);
            let v = verblunsky_instance(seed, n);
            for spec in &oprl_flows {
                t.result("oprl ode", n, oprl_ode_check(&j, spec, &tols), |_| 1e-5);
            }
            for spec in &opuc_flows {
                t.result("opuc ode", n, opuc_ode_check(&v, spec, &tols), |_| 1e-5);
            }
        }
    }
    t
}

fn periodic_pinned(id: &str) -> f64 {
    if id.ends_with("monodromy_det") {
        1e-10
    } else if id.contains("theta") {
        1e-8
    } else if id.ends_with("_commute") || id.ends_with("rho_product_floquet") {
        1e-7
    } else {
        // everything else must meet its own (pinned-in-core) tolerance
        f64::INFINITY
    }
}

fn criterion_9() -> Tally {
    let mut t = Tally::new();
    let tols = Tolerances::default();
    let cases = [(Family::Oprl, 2), (Family::Oprl, 3), (Family::Oprl, 4), (Family::Opuc, 2), (Family::Opuc, 4)];
    for seed in 0..5 {
        for (family, p) in cases {
            let params = periodic_instance(seed, family, p);
            let grid = match family {
                Family::Oprl => Grid::real_line(6),
                Family::Opuc => Grid::circle(6),
            };
            t.result("periodic checks", p, periodic_checks(&params, &tols), periodic_pinned);
            t.result("periodic brackets", p, verify_periodic_brackets(&params, &grid, &tols), periodic_pinned);
            // unnormalized determinant residual at random z
            let mut s = Sampler::new(seed, 1000 + p as u64);
            for _ in 0..20 {
                let (z, residual) = match &params {
                    PeriodicParams::Oprl(_) => {
                        let z = C64::new(s.uniform(-2.5, 2.5), s.uniform(-1.0, 1.0));
                        (z, (monodromy(&params, z).map(|m| (m.det() - 1.0).norm())))
                    }
                    PeriodicParams::Opuc(_) => {
                        let z = C64::from_polar(s.uniform(0.5, 2.0), s.uniform(-3.14, 3.14));
                        let zp = z.powu(p as u32);
                        (z, monodromy(&params, z).map(|m| (m.det() - zp).norm() / zp.norm()))
                    }
                };
                match residual {
                    Ok(r) => t.check(|| format!("det T_p p={p} z={z} seed={seed}"), r, 1e-10),
                    Err(e) => t.fail(format!("monodromy p={p} z={z}: {e}")),
                }
            }
        }
    }
    t
}

fn criterion_10() -> Tally {
    let mut t = Tally::new();
    let tols = Tolerances::default();
    for seed in 0..50 {
        for n in 2..=12 {
            t.result("oprl roundtrip", n, oprl_roundtrip(&jacobi_instance(seed, n), &tols), |_| 1e-9);
            t.result("opuc roundtrip", n, opuc_roundtrip(&verblunsky_instance(seed, n), &tols), |_| 1e-9);
        }
    }
    t
}

fn criterion_11() -> Tally {
    let mut t = Tally::new();
    let tols = Tolerances::default();
    for seed in 0..50 {
        for n in 2..=12 {
            t.result("oprl interlace", n, oprl_interlace(&jacobi_instance(seed, n), &tols), |_| 0.0);
            t.result("opuc interlace", n, opuc_interlace(&verblunsky_instance(seed, n), &tols), |_| 0.0);
        }
    }
    t
}

fn criterion_12() -> Tally {
    let mut t = Tally::new();
    let bin = env!("CARGO_BIN_EXE_orthobracket");
    let runs: [&[&str]; 4] = [
        &["verify", "--family", "oprl", "--n", "2..4", "--seed", "7"],
        &["verify", "--family", "opuc", "--n", "2..4", "--seed", "7"],
        &["flow", "--kind", "schur", "--n", "3", "--seed", "7", "--t", "0.5"],
        &["periodic", "--family", "opuc", "--n", "2,4", "--seed", "7"],
    ];
    for args in runs {
        let once = || Command::new(bin).args(args).output();
        match (once(), once()) {
            (Ok(a), Ok(b)) => {
                let label = args.join(" ");
                t.checks += 1;
                if a.stdout.is_empty() {
                    t.failures.push(format!("'{label}' produced no JSON"));
                } else if a.stdout != b.stdout {
                    t.failures.push(format!("'{label}' output differs between runs"));
                }
                if a.status.code() != Some(0) {
                    t.failures.push(format!("'{label}' exited with {:?}", a.status.code()));
                }
            }
            (Err(e), _) | (_, Err(e)) => t.fail(format!("could not run {bin}: {e}")),
        }
    }
    t
}

fn main() {
    let criteria: [(&str, fn() -> Tally); 12] = [
        ("fundamental OPRL brackets", criterion_1),
        ("fundamental OPUC brackets", criterion_2),
        ("OPRL polynomial identity suite", criterion_3),
        ("OPUC polynomial identity suite", criterion_4),
        ("coefficient stripping", criterion_5),
        ("Jacobian determinants", criterion_6),
        ("RK4 against exact flows, trace drift", criterion_7),
        ("induced polynomial ODEs", criterion_8),
        ("periodic monodromy, theta laws, commutation", criterion_9),
        ("spectral roundtrips", criterion_10),
        ("zero interlacing", criterion_11),
        ("CLI determinism", criterion_12),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let t = f();
        let secs = start.elapsed().as_secs_f64();
        let ok = t.failures.is_empty() && t.checks > 0;
        let mut extra = String::new();
        if t.skipped_reported > 0 {
            extra += &format!(", {} reported-only skipped", t.skipped_reported);
        }
        if t.absolute_drift > 0.0 {
            extra += &format!(", worst absolute trace drift {:.2e}", t.absolute_drift);
        }
        println!(
            "{} criterion {:>2}: {name} ({} checks, worst residual {:.2e}{extra}, {secs:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            t.checks,
            t.worst
        );
        for msg in t.failures.iter().take(10) {
            println!("       {msg}");
        }
        if t.failures.len() > 10 {
            println!("       ... {} more", t.failures.len() - 10);
        }
        failed += usize::from(!ok);
    }
    if failed > 0 {
        println!("{failed} of 12 criteria failed");
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
