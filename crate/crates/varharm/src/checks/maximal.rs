use varharm_core::grid::Grid;
use varharm_core::lebesgue::ExponentFunction;
use varharm_core::maximal::{centered_maximal, estimate_operator_norm, hl_maximal, BallFamily};
use varharm_core::random;

use super::{grid, push_constant, resolutions};
use crate::config::Settings;
use crate::report::{Condition, Row, VerificationReport};

const SANDWICH_RTOL: f64 = 1e-10;
/// Relative slack allowed for the dilated-exponent norm over the base one.
const DILATION_SLACK: f64 = 0.1;

pub fn ineqmax_defaults(s: &mut Settings) {
    s.cases = 50;
    s.points = 512;
    s.refine = false;
}

/// Planar grid used for the two-dimensional half of the sandwich check.
const PLANE_HALF_WIDTH: f64 = 4.0;
const PLANE_POINTS: usize = 64;

pub fn ineqmax(s: &Settings, report: &mut VerificationReport) -> anyhow::Result<()> {
    let grids = [grid(s, s.points)?, Grid::new(2, PLANE_HALF_WIDTH, PLANE_POINTS)?];
    for g in grids {
        let n = g.dim();
        let family = BallFamily::uncentered(&g);
        let lower = 0.5f64.powi(n as i32);
        let mut violations = 0usize;
        for case in 0..s.cases {
            let mut rng = random::seeded(s.seed.wrapping_add(case as u64));
            let f = if case % 2 == 0 {
                random::rough_signed(&g, &mut rng)
            } else {
                random::smooth_signed(&g, &mut rng)
            };
            let m = hl_maximal(&f, &family)?;
            let mc = centered_maximal(&f, &family)?;
            let mut worst_low = f64::INFINITY;
            let mut worst_high = 0.0f64;
            let mut bad = 0usize;
            for (a, b) in m.values().iter().zip(mc.values()) {
                if *a > 0.0 {
                    worst_low = worst_low.min(b / a);
                    worst_high = worst_high.max(b / a);
                }
                if *b > a * (1.0 + SANDWICH_RTOL) || lower * a > b * (1.0 + SANDWICH_RTOL) {
                    bad += 1;
                }
            }
            violations += bad;
            report.rows.push(
                Row::new(format!("n{n}-case{case}"))
                    .with("min_centered_over_uncentered", worst_low)
                    .with("max_centered_over_uncentered", worst_high)
                    .with("lower_bound", lower)
                    .with("budget_rel", SANDWICH_RTOL)
                    .with("violations", bad as f64),
            );
        }
        report.conditions.push(Condition::at_most(
            &format!("n{n} sandwich violations"),
            violations as f64,
            0.0,
        ));
    }
    Ok(())
}

pub fn lemma4_defaults(s: &mut Settings) {
    s.exponent = "radial:decay:1.2:2.0".into();
    s.cases = 12;
    s.half_width = 8.0;
    s.points = 512;
}

const DILATION: f64 = 2.0;

pub fn lemma4(s: &Settings, report: &mut VerificationReport) -> anyhow::Result<()> {
    let mut base = Vec::new();
    let mut dilated = Vec::new();
    for points in resolutions(s) {
        let g = grid(s, points)?;
        let p = ExponentFunction::from_spec(g, &s.exponent)?;
        let sp = p.scaled(DILATION)?;
        let a = estimate_operator_norm(&p, s.cases, s.seed)?;
        let b = estimate_operator_norm(&sp, s.cases, s.seed)?;
        report.rows.push(
            Row::new(format!("N{points}"))
                .with("norm_p", a)
                .with("norm_sp", b)
                .with("slack_rel", DILATION_SLACK),
        );
        if points == s.points {
            report.conditions.push(Condition::at_most(
                "norm on L^{sp} vs L^{p}",
                b,
                a * (1.0 + DILATION_SLACK),
            ));
        }
        base.push(a);
        dilated.push(b);
    }
    push_constant(report, s, "maximal norm on L^{p}", &base);
    push_constant(report, s, "maximal norm on L^{sp}", &dilated);
    report.note("operator norms are lower estimates from seeded trial functions");
    Ok(())
}
