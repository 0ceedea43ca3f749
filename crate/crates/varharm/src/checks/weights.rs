use varharm_core::grid::{integrate, GridFunction};
use varharm_core::lebesgue::{conjugate, norm, sobolev_shift, ExponentFunction};
use varharm_core::maximal::{estimate_operator_norm, fractional_maximal, BallFamily};
use varharm_core::random;
use varharm_core::weights::{a1_constant, a1_rh_exponent, rh_constant, rubio_de_francia, RDF_TOL};

use super::{grid, power_weight, push_constant, resolutions, shifted_index};
use crate::config::Settings;
use crate::report::{Condition, Row, VerificationReport};

pub fn lemma12_defaults(s: &mut Settings) {
    s.points = 512;
}

/// `(name, centre, gamma)` of the power weights `|x - c|^{-gamma}`; `gamma = 0` is `w = 1`.
const POWER_WEIGHTS: [(&str, f64, f64); 4] = [
    ("one", 0.0, 0.0),
    ("abs^-0.3", 0.0, 0.3),
    ("shifted^-0.5", 0.5, 0.5),
    ("abs^-0.8", 0.0, 0.8),
];

pub fn lemma12(s: &Settings, report: &mut VerificationReport) -> anyhow::Result<()> {
    for (name, center, gamma) in POWER_WEIGHTS {
        let mut rhs = Vec::new();
        for points in resolutions(s) {
            let g = grid(s, points)?;
            let w = power_weight(&g, center, gamma)?;
            let fam = BallFamily::uncentered(&g);
            let a1 = a1_constant(&w, &fam)?;
            let exponent = a1_rh_exponent(s.dim, a1);
            let rh = rh_constant(&w, exponent, &fam)?;
            let rh_low = rh_constant(&w, 1.1, &fam)?;
            let rh_high = rh_constant(&w, 1.5, &fam)?;
            report.rows.push(
                Row::new(format!("{name}@N{points}"))
                    .with("a1", a1)
                    .with("rh_exponent", exponent)
                    .with("rh_constant", rh)
                    .with("rh_1.1", rh_low)
                    .with("rh_1.5", rh_high)
                    .with("budget_rel", 1e-9),
            );
            if points == s.points {
                report.conditions.push(Condition::with(
                    &format!("{name} reverse Hoelder constant finite"),
                    rh,
                    f64::INFINITY,
                    rh.is_finite() && rh >= 1.0 - 1e-9,
                ));
                report.conditions.push(Condition::at_most(
                    &format!("{name} monotone in the exponent"),
                    rh_low,
                    rh_high * (1.0 + 1e-9),
                ));
                if gamma == 0.0 {
                    report.conditions.push(Condition::at_most(
                        "constant weight: RH constant - 1",
                        (rh - 1.0).abs(),
                        1e-9,
                    ));
                    report.conditions.push(Condition::at_most(
                        "constant weight: exponent - 5/4",
                        (exponent - 1.25).abs(),
                        1e-9,
                    ));
                }
            }
            rhs.push(rh);
        }
        push_constant(report, s, &format!("{name} RH constant"), &rhs);
    }
    Ok(())
}

pub fn lemma13_defaults(s: &mut Settings) {
    s.cases = 8;
    s.points = 512;
}

const THETA: f64 = 2.0;
const SEQUENCE_LEN: usize = 8;
/// Lebesgue index of the right-hand side; the left one follows from alpha.
const VECTOR_P: f64 = 1.5;

pub fn lemma13(s: &Settings, report: &mut VerificationReport) -> anyhow::Result<()> {
    let n = s.dim as f64;
    let q = 1.0 / (1.0 / VECTOR_P - s.alpha / n);
    anyhow::ensure!(q.is_finite() && q >= VECTOR_P, "alpha too large for p = {VECTOR_P}");
    report.note(format!(
        "p = {VECTOR_P}, q = {q}, theta = {THETA}, J = {SEQUENCE_LEN}, w = |x|^(-0.3)"
    ));
    let mut fits = Vec::new();
    for points in resolutions(s) {
        let g = grid(s, points)?;
        let w = power_weight(&g, 0.0, 0.3)?;
        let fam = BallFamily::uncentered(&g);
        let wr = w.powf(VECTOR_P / q)?;
        let mut best = 0.0f64;
        for case in 0..s.cases {
            let mut rng = random::seeded(s.seed.wrapping_add(case as u64));
            let mut lhs_sq = vec![0.0; g.len()];
            let mut rhs_sq = vec![0.0; g.len()];
            for _ in 0..SEQUENCE_LEN {
                let f = random::rough_signed(&g, &mut rng);
                let m = fractional_maximal(&f, s.alpha, &fam)?;
                for ((l, r), (mv, fv)) in lhs_sq
                    .iter_mut()
                    .zip(rhs_sq.iter_mut())
                    .zip(m.values().iter().zip(f.values()))
                {
                    *l += mv.powf(THETA);
                    *r += fv.abs().powf(THETA);
                }
            }
            let lhs_int = GridFunction::new(g, lhs_sq)?.zip_map(w.function(), |a, b| a.powf(q / THETA) * b)?;
            let rhs_int = GridFunction::new(g, rhs_sq)?.zip_map(wr.function(), |a, b| a.powf(VECTOR_P / THETA) * b)?;
            let lhs = integrate(&lhs_int, None).powf(1.0 / q);
            let rhs = integrate(&rhs_int, None).powf(1.0 / VECTOR_P);
            best = best.max(lhs / rhs);
            report.rows.push(
                Row::new(format!("case{case}@N{points}"))
                    .with("lhs", lhs)
                    .with("rhs", rhs)
                    .with("ratio", lhs / rhs)
                    .with("quadrature_budget_rel", 1e-12),
            );
        }
        if points == s.points {
            report.conditions.push(Condition::with(
                "vector-valued constant finite",
                best,
                f64::INFINITY,
                best.is_finite(),
            ));
        }
        fits.push(best);
    }
    push_constant(report, s, "vector-valued constant", &fits);
    Ok(())
}

pub fn rdf_defaults(s: &mut Settings) {
    s.cases = 20;
    s.points = 512;
}

/// Trials used to estimate the maximal operator norm on the dual exponent.
const NORM_TRIALS: usize = 8;
/// The series uses this multiple of the estimated norm, which is only a lower bound.
const NORM_SAFETY: f64 = 2.0;

pub fn rdf(s: &Settings, report: &mut VerificationReport) -> anyhow::Result<()> {
    let q0 = shifted_index(s.dim, s.p0, s.alpha);
    let mut ratios = Vec::new();
    let mut a1s = Vec::new();
    for points in resolutions(s) {
        let g = grid(s, points)?;
        let p = ExponentFunction::from_spec(g, &s.exponent)?;
        let q = sobolev_shift(&p, s.alpha)?;
        let dual = conjugate(&q.scaled(1.0 / q0)?)?;
        let m_norm = NORM_SAFETY * estimate_operator_norm(&dual, NORM_TRIALS, s.seed)?;
        let (mut all_dominate, mut worst_ratio, mut worst_a1_rel) = (true, 0.0f64, 0.0f64);
        let mut worst_a1 = 0.0f64;
        for case in 0..s.cases {
            let mut rng = random::seeded(s.seed.wrapping_add(case as u64));
            let raw = if case % 2 == 0 {
                random::rough_nonneg(&g, &mut rng)
            } else {
                random::rough_signed(&g, &mut rng)
            };
            let gnorm = norm(&raw, &dual)?;
            let gfun = raw.scale(1.0 / gnorm);
            let res = rubio_de_francia(&gfun, &dual, m_norm, RDF_TOL)?;
            let c = &res.certificate;
            all_dominate &= c.dominates;
            worst_ratio = worst_ratio.max(c.norm_ratio);
            worst_a1_rel = worst_a1_rel.max(c.a1 / c.a1_bound);
            worst_a1 = worst_a1.max(c.a1);
            report.rows.push(
                Row::new(format!("g{case}@N{points}"))
                    .with("dominates", if c.dominates { 1.0 } else { 0.0 })
                    .with("norm_ratio", c.norm_ratio)
                    .with("a1", c.a1)
                    .with("a1_bound", c.a1_bound)
                    .with("m_norm", m_norm)
                    .with("terms", res.truncation_index as f64)
                    .with("tail_budget", res.tail_bound),
            );
        }
        if points == s.points {
            report.note(format!("dual exponent range [{}, {}]", dual.p_minus(), dual.p_plus()));
            report
                .conditions
                .push(Condition::with("Rg dominates |g| everywhere", 0.0, 0.0, all_dominate));
            report.conditions.push(Condition::at_most(
                "max ||Rg|| / ||g||",
                worst_ratio,
                2.0 * (1.0 + 1e-6),
            ));
            report
                .conditions
                .push(Condition::at_most("max [Rg]_A1 / (2 m)", worst_a1_rel, 1.1));
        }
        ratios.push(worst_ratio);
        a1s.push(worst_a1);
    }
    push_constant(report, s, "max norm ratio", &ratios);
    push_constant(report, s, "max [Rg]_A1", &a1s);
    Ok(())
}
