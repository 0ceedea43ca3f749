use serde::Serialize;

use super::{apply_with_mass, evaluate_with_mass, OperatorSpec, Support};
use crate::atoms::{multi_indices, Atom};
use crate::error::{Error, Result};
use crate::fit;
use crate::grid::{distance, integrate, norm, GridFunction, Point};
use crate::verdict::Verdict;
use crate::weights::{act, Weight};

/// Safety factor on `eps * integral |K a|` when budgeting round-off in cancelling sums.
pub const ROUNDOFF_FACTOR: f64 = 64.0;
/// Relative quadrature tolerance for vanishing moments of potentials.
pub const MOMENT_QUAD_RTOL: f64 = 1e-9;
/// Moments count as vanishing at this fraction of their scale; a larger truncation tail
/// leaves the check inconclusive.
pub const MOMENT_TOLERANCE_RTOL: f64 = 1e-6;

/// Samples along one ray leaving `A_k x0`.
#[derive(Clone, Debug, Serialize)]
pub struct RayFit {
    pub center: Point,
    pub direction: Point,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Round-off budget of each value.
    pub budgets: Vec<f64>,
    pub slope: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FarFieldReport {
    pub rays: Vec<RayFit>,
    /// Least steep of the fitted slopes.
    pub slope: f64,
    pub predicted_slope: f64,
    /// `max |T a(x)| ||chi_B|| r^{-(n+d+1)} |x - A_k x0|^{n-alpha+d+1}`.
    pub c_fit: f64,
    /// Largest budget-to-signal ratio among fitted samples.
    pub budget_ratio: f64,
    pub budget_ok: bool,
    pub fit_from: f64,
}

impl FarFieldReport {
    /// Slope within `tol` of the prediction and budgets below 10% of the signal.
    pub fn agrees(&self, tol: f64) -> bool {
        self.budget_ok && self.rays.iter().all(|r| (r.slope - self.predicted_slope).abs() <= tol)
    }
}

/// Samples `|T a|` along rays from each `A_k x0` through the region nearer to it than to
/// the other centres, and fits the log-log decay on radii `>= 4r`.
pub fn far_field_check(spec: &OperatorSpec, a: &Atom, radii: &[f64]) -> Result<FarFieldReport> {
    let grid = *a.values.grid();
    let dim = grid.dim();
    if spec.dim() != dim {
        return Err(Error::GridMismatch("operator and atom dimensions differ".into()));
    }
    let n = dim as f64;
    let d = a.moment_degree as f64;
    let r = a.ball.radius;
    let x0 = a.ball.center;
    let centers: Vec<Point> = spec.matrices().iter().map(|m| m.apply(&x0)).collect();
    let support = Support::of(&a.values);
    let h = grid.spacing();
    let decay = n - spec.alpha() + d + 1.0;
    let fit_from = 4.0 * r;
    let (mut buf, mut abs_buf) = (Vec::new(), Vec::new());
    let mut rays = Vec::new();
    for (k, c) in centers.iter().enumerate() {
        let mut away = [0.0, 0.0];
        for (j, other) in centers.iter().enumerate() {
            if j != k {
                away[0] += c[0] - other[0];
                away[1] += c[1] - other[1];
            }
        }
        let len = norm(dim, &away);
        let dir = if len > 1e-12 {
            [away[0] / len, away[1] / len]
        } else {
            [1.0, 0.0]
        };
        if rays.iter().any(|ray: &RayFit| ray.center == *c && ray.direction == dir) {
            continue;
        }
        let mut fit = RayFit {
            center: *c,
            direction: dir,
            radii: Vec::new(),
            values: Vec::new(),
            budgets: Vec::new(),
            slope: f64::NAN,
        };
        for &rho in radii {
            let x = [c[0] + rho * dir[0], c[1] + rho * dir[1]];
            let nearest = centers.iter().all(|o| distance(dim, &x, o) >= rho - 1e-12);
            if rho < 2.0 * r || !grid.contains(&x) || !nearest {
                continue;
            }
            let (v, mass) = evaluate_with_mass(spec, &support, h, &x, &mut buf, &mut abs_buf)?;
            fit.radii.push(rho);
            fit.values.push(v.abs());
            fit.budgets.push(ROUNDOFF_FACTOR * f64::EPSILON * mass);
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = fit
            .radii
            .iter()
            .zip(&fit.values)
            .filter(|(rho, _)| **rho >= fit_from)
            .map(|(rho, v)| (*rho, *v))
            .unzip();
        if xs.len() >= 2 {
            fit.slope = fit::log_log_slope(&xs, &ys)?;
        }
        rays.push(fit);
    }
    if rays.iter().all(|ray| ray.slope.is_nan()) {
        return Err(Error::Geometry("fewer than two admissible far-field radii".into()));
    }
    rays.retain(|ray| !ray.slope.is_nan());
    let mut c_fit = 0.0f64;
    let mut budget_ratio = 0.0f64;
    for ray in &rays {
        for ((rho, v), b) in ray.radii.iter().zip(&ray.values).zip(&ray.budgets) {
            c_fit = c_fit.max(v * a.chi_norm() * r.powf(-(n + d + 1.0)) * rho.powf(decay));
            if *rho >= fit_from {
                budget_ratio = budget_ratio.max(b / v);
            }
        }
    }
    let slope = rays.iter().map(|r| r.slope).fold(f64::NEG_INFINITY, f64::max);
    Ok(FarFieldReport {
        rays,
        slope,
        predicted_slope: -decay,
        c_fit,
        budget_ratio,
        budget_ok: budget_ratio < 0.1,
        fit_from,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentRow {
    pub beta: [usize; 2],
    /// `integral ((x - x0)/r)^beta I_alpha a(x) dx` over the box.
    pub value: f64,
    /// `integral |((x - x0)/r)^beta I_alpha a|`, the scale the tolerances refer to.
    pub scale: f64,
    pub tolerance: f64,
    pub quadrature_budget: f64,
    /// Estimated contribution from outside the box.
    pub truncation_budget: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    /// Empirical decay constant `max |I a(x)| |x - x0|^{n - alpha + D + 1}` on the outer half of the box.
    pub decay_constant: f64,
    pub decay_exponent: f64,
    pub verdict: Verdict,
}

/// Moments of `I_alpha a` up to `max_degree`, with quadrature and truncation budgets.
pub fn riesz_moment_check(alpha: f64, a: &Atom, max_degree: usize) -> Result<MomentReport> {
    let grid = *a.values.grid();
    let dim = grid.dim();
    let n = dim as f64;
    let spec = OperatorSpec::riesz(dim, alpha)?;
    let (ia, mass) = apply_with_mass(&spec, &a.values)?;
    let x0 = a.ball.center;
    let r = a.ball.radius;
    let decay = n - alpha + a.moment_degree as f64 + 1.0;
    let reach = grid.half_width() - x0[0].abs().max(if dim == 2 { x0[1].abs() } else { 0.0 });
    if reach <= 2.0 * r {
        return Err(Error::Geometry("atom too close to the box boundary".into()));
    }
    let decay_constant = (0..grid.len())
        .filter_map(|i| {
            let rho = distance(dim, &grid.point(i), &x0);
            (rho >= 0.5 * reach).then(|| ia.values()[i].abs() * rho.powf(decay))
        })
        .fold(0.0, f64::max);
    let sphere = if dim == 1 { 2.0 } else { std::f64::consts::TAU };
    let mut rows = Vec::new();
    for beta in multi_indices(dim, max_degree) {
        let order = (beta[0] + beta[1]) as f64;
        let mono = GridFunction::from_fn(grid, |x| {
            let u = [(x[0] - x0[0]) / r, if dim == 2 { (x[1] - x0[1]) / r } else { 0.0 }];
            u[0].powi(beta[0] as i32) * u[1].powi(beta[1] as i32)
        });
        let value = integrate(&mono.zip_map(&ia, |m, v| m * v)?, None);
        let scale = integrate(&mono.zip_map(&ia, |m, v| (m * v).abs())?, None);
        let roundoff = ROUNDOFF_FACTOR * f64::EPSILON * integrate(&mono.zip_map(&mass, |m, v| (m * v).abs())?, None);
        let quadrature_budget = MOMENT_QUAD_RTOL * scale + roundoff;
        let tail_power = decay - order - n;
        let truncation_budget = if tail_power > 0.0 {
            sphere * decay_constant * r.powf(-order) * reach.powf(-tail_power) / tail_power
        } else {
            f64::INFINITY
        };
        let tolerance = MOMENT_TOLERANCE_RTOL * scale;
        let verdict = if truncation_budget > tolerance {
            Verdict::Inconclusive
        } else if value.abs() <= quadrature_budget + truncation_budget {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        rows.push(MomentRow {
            beta,
            value,
            scale,
            tolerance,
            quadrature_budget,
            truncation_budget,
            verdict,
        });
    }
    let verdict = Verdict::combine(rows.iter().map(|r| r.verdict));
    Ok(MomentReport {
        rows,
        decay_constant,
        decay_exponent: decay,
        verdict,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakTypeRow {
    pub lambda: f64,
    /// `w({|T f| >= lambda})`.
    pub level_measure: f64,
    /// Right-hand side without the constant.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakTypeReport {
    pub a1: f64,
    pub rows: Vec<WeakTypeRow>,
    /// Smallest constant making every row hold.
    pub c_fit: f64,
}

/// `w({|T f| >= lambda}) <= C lambda^{-n/(n-alpha)} sum_i (integral |f| [w_{A_i^{-1}}]^{(n-alpha)/n})^{n/(n-alpha)}`.
pub fn weak_type_check(spec: &OperatorSpec, f: &GridFunction, w: &Weight, lambdas: &[f64]) -> Result<WeakTypeReport> {
    f.check_same_grid(w.function())?;
    let tf = apply_with_mass(spec, f)?.0;
    weak_type_from(spec, f, &tf, w, lambdas)
}

/// [`weak_type_check`] with the image `tf = T f` already computed.
pub fn weak_type_from(
    spec: &OperatorSpec,
    f: &GridFunction,
    tf: &GridFunction,
    w: &Weight,
    lambdas: &[f64],
) -> Result<WeakTypeReport> {
    let n = spec.dim() as f64;
    let gap = n - spec.alpha();
    let mut sum = 0.0;
    for a in spec.matrices() {
        let moved = act(w, &a.transpose())?;
        let inner = integrate(&f.zip_map(moved.function(), |v, m| v.abs() * m.powf(gap / n))?, None);
        sum += inner.powf(n / gap);
    }
    let mut rows = Vec::new();
    let mut c_fit = 0.0f64;
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("level {lambda} must be positive")));
        }
        let level_measure = w.measure_where(|i| tf.values()[i].abs() >= lambda);
        let bound = lambda.powf(-n / gap) * sum;
        if bound > 0.0 {
            c_fit = c_fit.max(level_measure / bound);
        }
        rows.push(WeakTypeRow {
            lambda,
            level_measure,
            bound,
        });
    }
    Ok(WeakTypeReport {
        a1: w.a1(),
        rows,
        c_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{make_atom, potential_moment_degree};
    use crate::grid::{indicator, Ball, Grid};
    use crate::lebesgue::ExponentFunction;

    fn far_radii(r: f64, top: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut rho = 2.0 * r;
        while rho <= top {
            out.push(rho);
            rho *= 2f64.sqrt();
        }
        out
    }

    #[test]
    fn far_field_slopes() {
        let g = Grid::new(1, 16.0, 2048).unwrap();
        let p = ExponentFunction::constant(g, 0.8).unwrap();
        let r = 1.0 / 16.0;
        let ball = Ball::interval(0.0, r).unwrap();
        let radii = far_radii(r, 15.0);
        for (alpha, first, second) in [(0.0, 0.4, 0.6), (0.5, 0.2, 0.3)] {
            let spec = OperatorSpec::reflected_pair(1, alpha, first, second).unwrap();
            for d in [0usize, 1] {
                let a = make_atom(ball, &p, 8.0, d, 7).unwrap();
                let rep = far_field_check(&spec, &a, &radii).unwrap();
                assert!(
                    rep.agrees(0.15),
                    "alpha {alpha} d {d}: {} vs {}",
                    rep.slope,
                    rep.predicted_slope
                );
                assert!(rep.c_fit.is_finite() && rep.c_fit > 0.0);
            }
        }
        let spec = OperatorSpec::riesz(1, 0.5).unwrap();
        let a = make_atom(ball, &p, 8.0, 0, 3).unwrap();
        let rep = far_field_check(&spec, &a, &radii).unwrap();
        assert!((rep.slope + 1.5).abs() < 0.15);
        assert!(far_field_check(&spec, &a, &[0.01, 40.0]).is_err());
    }

    #[test]
    fn odd_atom_has_zero_mean_potential() {
        let g = Grid::new(1, 8.0, 512).unwrap();
        let p = ExponentFunction::constant(g, 0.8).unwrap();
        let ball = Ball::interval(0.0, 1.0).unwrap();
        let odd = GridFunction::from_fn(g, |x| {
            if x[0].abs() < 1.0 {
                x[0] * (1.0 - x[0] * x[0])
            } else {
                0.0
            }
        });
        let a = Atom::from_parts(odd, ball, p, 8.0, 0).unwrap();
        let rep = riesz_moment_check(0.5, &a, 0).unwrap();
        assert!(rep.rows[0].value.abs() <= 1e-10 * rep.rows[0].scale);
    }

    #[test]
    fn degree_loaded_atoms_have_vanishing_potential_moments() {
        let g = Grid::new(1, 16.0, 2048).unwrap();
        let p = ExponentFunction::constant(g, 0.8).unwrap();
        let deg = potential_moment_degree(1, 0.6, 0.5);
        for (seed, r) in [(1u64, 0.5), (2, 1.0)] {
            let a = make_atom(Ball::interval(0.25, r).unwrap(), &p, 8.0, deg, seed).unwrap();
            let rep = riesz_moment_check(0.5, &a, 0).unwrap();
            assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
        }
    }

    #[test]
    fn weak_type_levels() {
        let g = Grid::new(1, 8.0, 512).unwrap();
        let f = indicator(&g, &Ball::interval(0.0, 1.0).unwrap()).unwrap();
        let w = Weight::new(GridFunction::constant(g, 1.0)).unwrap();
        let spec = OperatorSpec::riesz(1, 0.5).unwrap();
        let lambdas = [0.5, 1.0, 2.0, 3.0, 10.0];
        let rep = weak_type_check(&spec, &f, &w, &lambdas).unwrap();
        assert_eq!(rep.rows[4].level_measure, 0.0);
        assert!(rep.rows[4].bound > 0.0);
        assert!(rep.c_fit.is_finite() && rep.c_fit > 0.0);
        // level sets of a decreasing profile: measure decreases with lambda
        assert!(rep.rows.windows(2).all(|w| w[0].level_measure >= w[1].level_measure));
        let twice = weak_type_check(&spec, &f.scale(2.0), &w, &lambdas.map(|l| 2.0 * l)).unwrap();
        assert!((twice.c_fit / rep.c_fit - 1.0).abs() < 0.05);
    }
}
