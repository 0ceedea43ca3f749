//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its criterion and then
//! asserts it. Harness reports are computed once and shared.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use varharm::{run, ExperimentConfig, VerificationReport};
use varharm_core::grid::{indicator, Ball, Grid, GridFunction};
use varharm_core::lebesgue::{norm, ExponentFunction};
use varharm_core::potentials::{evaluate_at, OperatorSpec};
use varharm_core::Verdict;

const CONSTANT_EXPONENTS: [f64; 4] = [1.0, 1.5, 2.0, 4.0];
const RIESZ_ORACLE: f64 = 4.0;
const RIESZ_RTOL: f64 = 0.03;
const REFLECTED_RTOL: f64 = 0.02;
const FARFIELD_SECONDS: f64 = 120.0;
const STABILITY_TOL: f64 = 0.25;

fn report(target: &str) -> VerificationReport {
    static CACHE: OnceLock<Mutex<HashMap<String, VerificationReport>>> = OnceLock::new();
    // Holding the lock while running keeps reports from being computed twice.
    let mut cache = CACHE
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    cache
        .entry(target.to_string())
        .or_insert_with(|| run(&ExperimentConfig::for_target(target)).expect("target runs"))
        .clone()
}

fn verdict_line(criterion: u32, what: &str, ok: bool, detail: String) {
    println!(
        "criterion {criterion:>2} {}: {what} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} failed: {what} ({detail})");
}

fn target_passes(criterion: u32, target: &str, extra: impl Fn(&VerificationReport) -> Result<(), String>) {
    let r = report(target);
    let failing: Vec<String> = r
        .conditions
        .iter()
        .filter(|c| c.verdict != Verdict::Pass)
        .map(|c| format!("{} = {:e} vs {:e}", c.name, c.measured, c.bound))
        .collect();
    let extra = extra(&r);
    let ok = r.verdict == Verdict::Pass && extra.is_ok();
    let detail = match (&extra, failing.is_empty()) {
        (Err(e), _) => e.clone(),
        (Ok(()), false) => failing.join("; "),
        (Ok(()), true) => format!("{} conditions, {:.1} s", r.conditions.len(), r.wall_time_s),
    };
    verdict_line(criterion, &format!("{target} verdict {:?}", r.verdict), ok, detail);
}

#[test]
fn criterion_01_luxemburg_closed_forms() {
    let start = std::time::Instant::now();
    let line = Grid::new(1, 4.0, 1024).unwrap();
    let plane = Grid::new(2, 4.0, 128).unwrap();
    let interval = indicator(&line, &Ball::interval(0.0, 1.0).unwrap()).unwrap();
    let hat = GridFunction::from_fn(line, |x| (1.0 - x[0].abs()).max(0.0));
    let disk = indicator(&plane, &Ball::new([0.3, -0.2], 1.5).unwrap()).unwrap();
    let mut worst = 0.0f64;
    let mut ok = true;
    for p in CONSTANT_EXPONENTS {
        let cases = [
            (&interval, 2.0f64.powf(1.0 / p), line),
            (&hat, (2.0 / (p + 1.0)).powf(1.0 / p), line),
            (&disk, (std::f64::consts::PI * 2.25).powf(1.0 / p), plane),
        ];
        for (f, exact, g) in cases {
            let got = norm(f, &ExponentFunction::constant(g, p).unwrap()).unwrap();
            let rel = (got - exact).abs() / exact;
            let tol = (2.0 * g.spacing()).max(1e-6);
            worst = worst.max(rel / tol);
            ok &= rel <= tol;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 5.0;
    verdict_line(
        1,
        "Luxemburg norm equals the L^p norm for constant exponents",
        ok,
        format!("worst error/tolerance {worst:.3}, {secs:.2} s"),
    );
}

#[test]
fn criterion_02_quasinorm_properties() {
    target_passes(2, "lemma1-quasinorm", |r| {
        if r.settings.cases >= 200 {
            Ok(())
        } else {
            Err(format!("only {} cases", r.settings.cases))
        }
    });
}

#[test]
fn criterion_03_maximal_sandwich() {
    target_passes(3, "ineqmax", |r| {
        let dims_ok = ["n1", "n2"]
            .iter()
            .all(|d| r.conditions.iter().any(|c| c.name.starts_with(d)));
        if r.settings.cases >= 50 && dims_ok {
            Ok(())
        } else {
            Err("needs 50 cases in both dimensions".into())
        }
    });
}

#[test]
fn criterion_04_quadrature_oracles() {
    let g = Grid::new(1, 4.0, 2048).unwrap();
    let chi = indicator(&g, &Ball::interval(0.0, 1.0).unwrap()).unwrap();
    let riesz = OperatorSpec::riesz(1, 0.5).unwrap();
    let got = evaluate_at(&riesz, &chi, &[0.0, 0.0]).unwrap();
    let riesz_err = (got - RIESZ_ORACLE).abs() / RIESZ_ORACLE;

    let shifted = indicator(&g, &Ball::interval(1.5, 0.5).unwrap()).unwrap();
    let pair = OperatorSpec::reflected_pair(1, 0.0, 0.5, 0.5).unwrap();
    let got_pair = evaluate_at(&pair, &shifted, &[0.0, 0.0]).unwrap();
    let pair_err = (got_pair - 2f64.ln()).abs() / 2f64.ln();

    verdict_line(
        4,
        "fractional integral and reflected-pair closed forms",
        riesz_err <= RIESZ_RTOL && pair_err <= REFLECTED_RTOL,
        format!("I(0) = {got:.5} (rel {riesz_err:.2e}), T(0) = {got_pair:.5} (rel {pair_err:.2e})"),
    );
}

#[test]
fn criterion_05_far_field_decay() {
    target_passes(5, "farfield-decay", |r| {
        if r.wall_time_s < FARFIELD_SECONDS {
            Ok(())
        } else {
            Err(format!("runtime {:.1} s", r.wall_time_s))
        }
    });
}

#[test]
fn criterion_06_vanishing_moments() {
    target_passes(6, "cond3-moments", |r| {
        if r.settings.atoms >= 10 {
            Ok(())
        } else {
            Err(format!("only {} atoms", r.settings.atoms))
        }
    });
}

#[test]
fn criterion_07_rubio_de_francia_certificate() {
    target_passes(7, "rdf-certificate", |r| {
        if r.settings.cases >= 20 {
            Ok(())
        } else {
            Err(format!("only {} seeds", r.settings.cases))
        }
    });
}

fn ladder_covers(r: &VerificationReport) -> Result<(), String> {
    let s = &r.settings;
    if s.atoms >= 50 && s.radius_min <= 0.125 && s.radius_max >= 8.0 {
        Ok(())
    } else {
        Err(format!("{} atoms over [{}, {}]", s.atoms, s.radius_min, s.radius_max))
    }
}

#[test]
fn criterion_08_potential_uniform_over_atoms() {
    target_passes(8, "theorem21", |r| {
        ladder_covers(r)?;
        for alpha in ["alpha=0 ", "alpha=0.5 "] {
            if !r
                .conditions
                .iter()
                .any(|c| c.name.starts_with(alpha) && c.name.contains("slope"))
            {
                return Err(format!("no uniformity verdict for {}", alpha.trim()));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_09_hardy_uniform_over_atoms() {
    target_passes(9, "theorem24", |r| {
        ladder_covers(r)?;
        if r.notes.iter().any(|n| n.contains("bank-relative")) {
            Ok(())
        } else {
            Err("report is not flagged bank-relative".into())
        }
    });
}

#[test]
fn criterion_10_refinement_stability() {
    let mut unstable = Vec::new();
    let mut count = 0;
    let mut worst = 0.0f64;
    for target in [
        "farfield-decay",
        "cond3-moments",
        "rdf-certificate",
        "theorem21",
        "theorem24",
    ] {
        for c in report(target).constants {
            count += 1;
            match c.relative_change {
                Some(d) if d < STABILITY_TOL && c.coarse.is_finite() => worst = worst.max(d),
                _ => unstable.push(format!("{target}: {} {:?}", c.name, c.relative_change)),
            }
        }
    }
    verdict_line(
        10,
        "fitted constants stable from N to 2N",
        unstable.is_empty() && count > 0,
        if unstable.is_empty() {
            format!("{count} constants, largest change {worst:.3}")
        } else {
            unstable.join("; ")
        },
    );
}
