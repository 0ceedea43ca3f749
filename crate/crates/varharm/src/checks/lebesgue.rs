use varharm_core::grid::{pullback, GridFunction, OrthogonalMatrix};
use varharm_core::lebesgue::{log_holder_check, norm, ExponentFunction, LUXEMBURG_RTOL};
use varharm_core::random;

use super::{grid, push_constant, resolutions};
use crate::config::Settings;
use crate::report::{Condition, Row, VerificationReport};

const SUBADDITIVE_ATOL: f64 = 1e-6;
const POWER_RTOL: f64 = 1e-6;
const POWERS: [f64; 3] = [0.5, 2.0, 3.0];

pub fn lemma1_defaults(s: &mut Settings) {
    s.cases = 200;
    s.half_width = 4.0;
    s.points = 256;
    s.refine = false;
}

/// Two norms computed by independent bisections agree to within the bracket width.
fn bisection_rtol() -> f64 {
    LUXEMBURG_RTOL.exp_m1() + 1e-13
}

pub fn lemma1(s: &Settings, report: &mut VerificationReport) -> anyhow::Result<()> {
    let g = grid(s, s.points)?;
    let neg = OrthogonalMatrix::negation(s.dim);
    let tol = bisection_rtol();
    let mut violations = [0usize; 5];
    let mut worst = [0.0f64; 5];
    for case in 0..s.cases {
        let mut rng = random::seeded(s.seed.wrapping_add(case as u64));
        let (f, other) = if case % 2 == 0 {
            (random::smooth_signed(&g, &mut rng), random::rough_signed(&g, &mut rng))
        } else {
            (random::rough_signed(&g, &mut rng), random::smooth_signed(&g, &mut rng))
        };
        let p = ExponentFunction::new(random::smooth_exponent(&g, &mut rng, 0.5, 3.0))?;
        let c = 0.25 + 3.75 * (case as f64 / s.cases as f64);
        let c = if case % 3 == 0 { -c } else { c };

        let nf = norm(&f, &p)?;
        let homog = (norm(&f.scale(c), &p)? - c.abs() * nf).abs() / (c.abs() * nf);
        let zero_ok = norm(&GridFunction::zeros(g), &p)? == 0.0 && (nf > 0.0) == !f.is_zero();

        let low = p.lower_index();
        let ng = norm(&other, &p)?;
        let nsum = norm(&f.axpby(1.0, &other, 1.0)?, &p)?;
        let excess = nsum.powf(low) - nf.powf(low) - ng.powf(low);

        let mut power_err = 0.0f64;
        for sp in POWERS {
            let lhs = norm(&f.abs().map(|v| v.powf(sp)), &p)?;
            let rhs = norm(&f, &p.scaled(sp)?)?.powf(sp);
            power_err = power_err.max((lhs - rhs).abs() / rhs);
        }

        let pe = ExponentFunction::new(random::even_exponent(&g, &mut rng, 0.5, 3.0))?;
        let nfe = norm(&f, &pe)?;
        let sym = (norm(&pullback(&f, &neg)?, &pe)? - nfe).abs() / nfe;

        let measured = [homog, if zero_ok { 0.0 } else { 1.0 }, excess, power_err, sym];
        let bounds = [tol, 0.0, SUBADDITIVE_ATOL, POWER_RTOL, tol];
        for k in 0..5 {
            worst[k] = worst[k].max(measured[k]);
            if measured[k] > bounds[k] {
                violations[k] += 1;
            }
        }
        report.rows.push(
            Row::new(format!("case{case}"))
                .with("homogeneity_rel_err", homog)
                .with("homogeneity_budget", tol)
                .with("definiteness_violation", measured[1])
                .with("p_triangle_excess", excess)
                .with("p_triangle_budget", SUBADDITIVE_ATOL)
                .with("power_rule_rel_err", power_err)
                .with("power_rule_budget", POWER_RTOL)
                .with("symmetric_pullback_rel_err", sym)
                .with("symmetric_pullback_budget", tol)
                .with("lower_index", low),
        );
    }
    let names = [
        "homogeneity",
        "definiteness",
        "p_triangle",
        "power_rule",
        "symmetric_pullback",
    ];
    for k in 0..5 {
        report.conditions.push(Condition::at_most(
            &format!("{}_violations", names[k]),
            violations[k] as f64,
            0.0,
        ));
        report.note(format!("worst {} discrepancy {:e}", names[k], worst[k]));
    }
    Ok(())
}

pub fn remark22_defaults(s: &mut Settings) {
    s.half_width = 8.0;
    s.points = 1024;
}

const REMARK22_EXPONENTS: [&str; 4] = [
    "radial:decay:1.2:2.0",
    "radial:log:1.2:2.0",
    "even-sym:bump:0.6:0.8",
    "even-sym:wave:0.6:0.8",
];

pub fn remark22(s: &Settings, report: &mut VerificationReport) -> anyhow::Result<()> {
    let neg = OrthogonalMatrix::negation(s.dim);
    for spec in REMARK22_EXPONENTS {
        let mut scores = Vec::new();
        for points in resolutions(s) {
            let g = grid(s, points)?;
            let p = ExponentFunction::from_spec(g, spec)?;
            let flipped = pullback(p.function(), &neg)?;
            let defect = p
                .values()
                .iter()
                .zip(flipped.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let score = log_holder_check(&p);
            scores.push(score);
            report.rows.push(
                Row::new(format!("{spec}@N{points}"))
                    .with("symmetry_defect", defect)
                    .with("symmetry_budget", 1e-12)
                    .with("log_holder_score", score)
                    .with("p_minus", p.p_minus())
                    .with("p_plus", p.p_plus()),
            );
            if points == s.points {
                report
                    .conditions
                    .push(Condition::at_most(&format!("{spec} symmetry defect"), defect, 1e-12));
                report.conditions.push(Condition::with(
                    &format!("{spec} log-Hoelder score finite"),
                    score,
                    f64::INFINITY,
                    score.is_finite(),
                ));
            }
        }
        push_constant(report, s, &format!("{spec} log-Hoelder score"), &scores);
    }
    Ok(())
}
