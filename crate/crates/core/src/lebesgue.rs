//! Variable-exponent Lebesgue spaces: modulars, Luxemburg norms, conjugate and
//! Sobolev-shifted exponents.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{integrate, pairwise_sum, Grid, GridFunction};
use crate::random;

/// Relative tolerance of the Luxemburg bisection.
pub const LUXEMBURG_RTOL: f64 = 1e-8;
const LAMBDA_TINY: f64 = 1e-300;
const MAX_BISECTIONS: usize = 400;

/// A positive, bounded exponent sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFunction {
    values: GridFunction,
    p_minus: f64,
    p_plus: f64,
}

impl ExponentFunction {
    pub fn new(values: GridFunction) -> Result<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for &v in values.values() {
            if v <= 0.0 {
                return Err(Error::Domain(format!("exponent value {v} is not positive")));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok(Self {
            values,
            p_minus: lo,
            p_plus: hi,
        })
    }

    pub fn constant(grid: Grid, p: f64) -> Result<Self> {
        Self::new(GridFunction::constant(grid, p))
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&crate::grid::Point) -> f64) -> Result<Self> {
        Self::new(GridFunction::from_fn(grid, f))
    }

    pub fn grid(&self) -> &Grid {
        self.values.grid()
    }

    pub fn function(&self) -> &GridFunction {
        &self.values
    }

    pub fn values(&self) -> &[f64] {
        self.values.values()
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// `min(p_-, 1)`, the exponent of the quasi-triangle inequality.
    pub fn lower_index(&self) -> f64 {
        self.p_minus.min(1.0)
    }

    pub fn is_constant(&self) -> bool {
        self.p_minus == self.p_plus
    }

    /// `s * p(.)`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!("exponent scale {s} must be positive")));
        }
        Self::new(self.values.scale(s))
    }

    /// Builds a named exponent; see [`parse_exponent`].
    pub fn from_spec(grid: Grid, spec: &str) -> Result<Self> {
        parse_exponent(grid, spec)
    }
}

/// Outcome of the Luxemburg bisection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LuxemburgResult {
    pub norm: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

fn check_grid(f: &GridFunction, p: &ExponentFunction) -> Result<()> {
    if f.grid() != p.grid() {
        return Err(Error::GridMismatch(
            "function and exponent live on different grids".into(),
        ));
    }
    Ok(())
}

/// `integral |f / lambda|^{p(x)} dx`.
pub fn modular(f: &GridFunction, p: &ExponentFunction, lambda: f64) -> Result<f64> {
    check_grid(f, p)?;
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("modular scale {lambda} must be positive")));
    }
    let terms: Vec<f64> = f
        .values()
        .iter()
        .zip(p.values())
        .map(|(&v, &e)| if v == 0.0 { 0.0 } else { (v.abs() / lambda).powf(e) })
        .collect();
    Ok(f.grid().cell_volume() * pairwise_sum(&terms))
}

/// Modular evaluator over the support of `f`, working in logarithms so that extreme
/// scales neither overflow nor underflow prematurely.
struct LogModular {
    log_abs: Vec<f64>,
    exps: Vec<f64>,
    cell: f64,
    scratch: std::cell::RefCell<Vec<f64>>,
}

impl LogModular {
    fn new(f: &GridFunction, p: &ExponentFunction) -> Self {
        let (log_abs, exps): (Vec<f64>, Vec<f64>) = f
            .values()
            .iter()
            .zip(p.values())
            .filter(|(v, _)| **v != 0.0)
            .map(|(v, e)| (v.abs().ln(), *e))
            .unzip();
        let n = log_abs.len();
        Self {
            log_abs,
            exps,
            cell: f.grid().cell_volume(),
            scratch: std::cell::RefCell::new(vec![0.0; n]),
        }
    }

    fn at_log(&self, log_lambda: f64) -> f64 {
        let mut s = self.scratch.borrow_mut();
        for ((t, la), e) in s.iter_mut().zip(&self.log_abs).zip(&self.exps) {
            *t = (e * (la - log_lambda)).exp();
        }
        self.cell * pairwise_sum(&s)
    }
}

/// `inf { lambda > 0 : modular(f, p, lambda) <= 1 }` by geometric bisection.
pub fn luxemburg_norm(f: &GridFunction, p: &ExponentFunction) -> Result<LuxemburgResult> {
    check_grid(f, p)?;
    if f.is_zero() {
        return Ok(LuxemburgResult {
            norm: 0.0,
            iterations: 0,
            bracket: (0.0, 0.0),
        });
    }
    let grid = f.grid();
    let m = LogModular::new(f, p);
    let mut hi = f.sup_norm() * (2.0 * grid.half_width()).powf(grid.dim() as f64 / p.p_minus()) + 1.0;
    let mut iterations = 0;
    while m.at_log(hi.ln()) > 1.0 {
        hi *= 2.0;
        iterations += 1;
    }
    let lo0 = LAMBDA_TINY;
    let (mut llo, mut lhi) = (lo0.ln(), hi.ln());
    let mut m_lo = m.at_log(llo);
    let mut m_hi = m.at_log(lhi);
    if m_lo <= 1.0 {
        return Err(Error::InvariantViolation(
            "modular at the lower bracket does not exceed 1".into(),
        ));
    }
    while lhi - llo > LUXEMBURG_RTOL && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (llo + lhi);
        let m_mid = m.at_log(mid);
        if !(m_mid <= m_lo && m_mid >= m_hi) {
            return Err(Error::InvariantViolation(format!(
                "modular is not monotone at lambda = {:e}",
                mid.exp()
            )));
        }
        if m_mid > 1.0 {
            llo = mid;
            m_lo = m_mid;
        } else {
            lhi = mid;
            m_hi = m_mid;
        }
        iterations += 1;
    }
    Ok(LuxemburgResult {
        norm: lhi.exp(),
        iterations,
        bracket: (llo.exp(), lhi.exp()),
    })
}

/// Convenience wrapper returning only the norm.
pub fn norm(f: &GridFunction, p: &ExponentFunction) -> Result<f64> {
    Ok(luxemburg_norm(f, p)?.norm)
}

/// `p'(x) = p(x) / (p(x) - 1)`.
pub fn conjugate(p: &ExponentFunction) -> Result<ExponentFunction> {
    if p.p_minus() <= 1.0 {
        return Err(Error::Domain(format!(
            "conjugate exponent needs p_- > 1, got {}",
            p.p_minus()
        )));
    }
    ExponentFunction::new(p.function().map(|v| v / (v - 1.0)))
}

/// `1/q = 1/p - alpha/n`.
pub fn sobolev_shift(p: &ExponentFunction, alpha: f64) -> Result<ExponentFunction> {
    let n = p.grid().dim() as f64;
    if !(0.0..n).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} outside [0, {n})")));
    }
    if alpha == 0.0 {
        return Ok(p.clone());
    }
    if p.p_plus() >= n / alpha {
        return Err(Error::Domain(format!(
            "p_+ = {} must stay below n/alpha = {}",
            p.p_plus(),
            n / alpha
        )));
    }
    ExponentFunction::new(p.function().map(|v| 1.0 / (1.0 / v - alpha / n)))
}

/// Lower bound for `||f||_{p(.)}` from `sup integral |f g|` over normalized `g`.
///
/// Trial 0 uses the extremal `g = (|f|/||f||)^{p-1}`; the rest are random non-negative
/// functions, all rescaled to unit `p'(.)` norm.
pub fn duality_lower_bound(f: &GridFunction, p: &ExponentFunction, trials: usize, seed: u64) -> Result<f64> {
    let dual = conjugate(p)?;
    if f.is_zero() || trials == 0 {
        return Ok(0.0);
    }
    let fnorm = norm(f, p)?;
    let grid = *f.grid();
    let mut rng = random::seeded(seed);
    let mut best = 0.0f64;
    for t in 0..trials {
        let g = if t == 0 {
            f.zip_map(p.function(), |v, e| (v.abs() / fnorm).powf(e - 1.0))?
        } else {
            let base = random::rough_nonneg(&grid, &mut rng);
            let mix: f64 = rng.gen_range(0.0..1.0);
            base.zip_map(f, |b, v| b + mix * v.abs())?
        };
        let gn = norm(&g, &dual)?;
        if gn == 0.0 {
            continue;
        }
        let prod = f.zip_map(&g, |a, b| (a * b).abs() / gn)?;
        best = best.max(integrate(&prod, None));
    }
    Ok(best)
}

/// Discrete log-Holder score: max over pairs with `|x - y| <= 1/2` of
/// `|p(x) - p(y)| log(e + 1/|x - y|)`.
pub fn log_holder_check(p: &ExponentFunction) -> f64 {
    let grid = p.grid();
    let h = grid.spacing();
    let n = grid.points_per_axis() as isize;
    let reach = (0.5 / h).floor() as isize;
    let v = p.values();
    let e = std::f64::consts::E;
    let mut best = 0.0f64;
    if grid.dim() == 1 {
        for i in 0..n {
            for di in 1..=reach {
                let j = i + di;
                if j >= n {
                    break;
                }
                let d = di as f64 * h;
                let s = (v[i as usize] - v[j as usize]).abs() * (e + 1.0 / d).ln();
                best = best.max(s);
            }
        }
    } else {
        for i0 in 0..n {
            for i1 in 0..n {
                let a = v[(i0 * n + i1) as usize];
                for d0 in 0..=reach {
                    for d1 in -reach..=reach {
                        if d0 == 0 && d1 <= 0 {
                            continue;
                        }
                        let (j0, j1) = (i0 + d0, i1 + d1);
                        if j0 >= n || j1 < 0 || j1 >= n {
                            continue;
                        }
                        let d = h * ((d0 * d0 + d1 * d1) as f64).sqrt();
                        if d > 0.5 {
                            continue;
                        }
                        let b = v[(j0 * n + j1) as usize];
                        best = best.max((a - b).abs() * (e + 1.0 / d).ln());
                    }
                }
            }
        }
    }
    best
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("`{s}` is not a number")))
}

fn parse_range(parts: &[&str], default: (f64, f64)) -> Result<(f64, f64)> {
    match parts {
        [] => Ok(default),
        [lo, hi] => {
            let (lo, hi) = (parse_f64(lo)?, parse_f64(hi)?);
            if !(lo > 0.0 && hi >= lo) {
                return Err(Error::Parse(format!("bad exponent range {lo}:{hi}")));
            }
            Ok((lo, hi))
        }
        _ => Err(Error::Parse("expected `<lo>:<hi>` after the profile name".into())),
    }
}

fn radial_profile(id: &str, lo: f64, hi: f64) -> Result<Box<dyn Fn(f64) -> f64>> {
    let span = hi - lo;
    Ok(match id {
        "decay" => Box::new(move |r| lo + span / (1.0 + r * r)),
        "log" => Box::new(move |r| lo + span / (1.0 + (1.0 + r).ln())),
        "step" => Box::new(move |r| if r < 1.0 { lo } else { hi }),
        _ => return Err(Error::Parse(format!("unknown radial profile `{id}`"))),
    })
}

/// Named exponents:
///
/// * `const:<v>`
/// * `radial:<decay|log|step>[:lo:hi]` gives `p(x) = h(|x|)`
/// * `even-sym:<bump|wave>[:lo:hi]` gives `p(x) + p(-x)` for a non-symmetric base `p`
///   taking values in `[lo, hi]`
pub fn parse_exponent(grid: Grid, spec: &str) -> Result<ExponentFunction> {
    let parts: Vec<&str> = spec.split(':').collect();
    let dim = grid.dim();
    match parts.as_slice() {
        ["const", v] => ExponentFunction::constant(grid, parse_f64(v)?),
        ["radial", id, rest @ ..] => {
            let (lo, hi) = parse_range(rest, (1.2, 2.0))?;
            let h = radial_profile(id, lo, hi)?;
            ExponentFunction::from_fn(grid, |x| h(crate::grid::norm(dim, x)))
        }
        ["even-sym", id, rest @ ..] => {
            let (lo, hi) = parse_range(rest, (0.6, 0.8))?;
            let span = hi - lo;
            let base: Box<dyn Fn(&crate::grid::Point) -> f64> = match *id {
                "bump" => Box::new(move |x| {
                    let d2 = (x[0] - 1.0).powi(2) + if dim == 2 { x[1] * x[1] } else { 0.0 };
                    lo + span * (-d2).exp()
                }),
                "wave" => Box::new(move |x| lo + span * 0.5 * (1.0 + (x[0] + 1.0).sin())),
                _ => return Err(Error::Parse(format!("unknown base profile `{id}`"))),
            };
            ExponentFunction::from_fn(grid, |x| base(x) + base(&[-x[0], -x[1]]))
        }
        _ => Err(Error::Parse(format!("unrecognised exponent spec `{spec}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{indicator, Ball};
    use proptest::prelude::*;

    fn g1(l: f64, n: usize) -> Grid {
        Grid::new(1, l, n).unwrap()
    }

    fn chi01(g: Grid) -> GridFunction {
        GridFunction::from_fn(g, |p| if (0.0..1.0).contains(&p[0]) { 1.0 } else { 0.0 })
    }

    #[test]
    fn modular_examples() {
        let g = g1(4.0, 512);
        let h = g.spacing();
        let p2 = ExponentFunction::constant(g, 2.0).unwrap();
        assert!((modular(&chi01(g), &p2, 1.0).unwrap() - 1.0).abs() <= h);
        let p1 = ExponentFunction::constant(g, 1.0).unwrap();
        assert!((modular(&chi01(g).scale(2.0), &p1, 2.0).unwrap() - 1.0).abs() <= h);
        let pv = ExponentFunction::from_fn(g, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 2.0 }).unwrap();
        assert!((modular(&chi01(g).scale(2.0), &pv, 2.0).unwrap() - 1.0).abs() <= h);
        assert!(modular(&chi01(g), &p2, 0.0).is_err());
    }

    #[test]
    fn norm_examples() {
        let g = g1(4.0, 512);
        let h = g.spacing();
        let p2 = ExponentFunction::constant(g, 2.0).unwrap();
        assert!((norm(&chi01(g), &p2).unwrap() - 1.0).abs() <= 1e-6 + h);

        let chi = indicator(&g, &Ball::interval(0.0, 1.0).unwrap()).unwrap();
        assert!((norm(&chi, &p2).unwrap() - 2f64.sqrt()).abs() <= 1e-6 + h);

        let pv = ExponentFunction::from_fn(g, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 2.0 }).unwrap();
        assert!((norm(&chi01(g).scale(2.0), &pv).unwrap() - 2.0).abs() <= 1e-6 + 2.0 * h);

        let zero = luxemburg_norm(&GridFunction::zeros(g), &p2).unwrap();
        assert_eq!((zero.norm, zero.iterations), (0.0, 0));
    }

    #[test]
    fn luxemburg_saturates_modular() {
        let g = g1(4.0, 256);
        let mut rng = random::seeded(5);
        let f = random::rough_signed(&g, &mut rng);
        let p = ExponentFunction::new(random::smooth_exponent(&g, &mut rng, 0.7, 3.0)).unwrap();
        let r = luxemburg_norm(&f, &p).unwrap();
        let m = modular(&f, &p, r.norm).unwrap();
        assert!((m - 1.0).abs() < 1e-7, "modular {m}");
        assert!(r.bracket.0 <= r.norm && r.norm <= r.bracket.1);
    }

    #[test]
    fn conjugate_and_shift_examples() {
        let g = g1(1.0, 16);
        let c = conjugate(&ExponentFunction::constant(g, 4.0).unwrap()).unwrap();
        assert!(c.values().iter().all(|v| (v - 4.0 / 3.0).abs() < 1e-15));
        assert!(conjugate(&ExponentFunction::constant(g, 1.0).unwrap()).is_err());
        let q = sobolev_shift(&ExponentFunction::constant(g, 1.0).unwrap(), 0.5).unwrap();
        assert!(q.values().iter().all(|v| (v - 2.0).abs() < 1e-14));
        let g2 = Grid::new(2, 1.0, 16).unwrap();
        let q = sobolev_shift(&ExponentFunction::constant(g2, 4.0 / 3.0).unwrap(), 1.0).unwrap();
        assert!(q.values().iter().all(|v| (v - 4.0).abs() < 1e-12));
        assert!(sobolev_shift(&ExponentFunction::constant(g, 2.0).unwrap(), 0.5).is_err());
        let p = ExponentFunction::constant(g, 1.7).unwrap();
        assert_eq!(sobolev_shift(&p, 0.0).unwrap(), p);
    }

    #[test]
    fn duality_probe() {
        let g = g1(4.0, 256);
        let p2 = ExponentFunction::constant(g, 2.0).unwrap();
        assert_eq!(duality_lower_bound(&GridFunction::zeros(g), &p2, 5, 1).unwrap(), 0.0);
        let f = chi01(g);
        let b = duality_lower_bound(&f, &p2, 1, 1).unwrap();
        assert!((b - 1.0).abs() < 1e-6);

        let p3 = ExponentFunction::constant(g, 3.0).unwrap();
        let f = random::rough_signed(&g, &mut random::seeded(9));
        let n = norm(&f, &p3).unwrap();
        let b = duality_lower_bound(&f, &p3, 100, 2).unwrap();
        assert!(b <= 1.01 * n && b >= 0.99 * n, "{b} vs {n}");
    }

    #[test]
    fn log_holder_scores() {
        let g = g1(4.0, 256);
        assert_eq!(log_holder_check(&ExponentFunction::constant(g, 2.0).unwrap()), 0.0);
        let lip = ExponentFunction::from_fn(g, |x| 2.0 + x[0].abs().min(1.0)).unwrap();
        let s = log_holder_check(&lip);
        assert!(s.is_finite() && s > 0.0 && s < 2.0);

        let step = |n| {
            let g = g1(4.0, n);
            log_holder_check(&parse_exponent(g, "radial:step:1.5:2.5").unwrap())
        };
        let (a, b) = (step(256), step(512));
        assert!((b - a - 2f64.ln()).abs() < 0.1, "{a} {b}");
    }

    #[test]
    fn named_exponents() {
        let g = g1(4.0, 256);
        let p = parse_exponent(g, "even-sym:bump:0.6:0.8").unwrap();
        assert!(p.p_minus() >= 1.2 - 1e-12 && p.p_plus() < 1.41);
        let v = p.values();
        for k in 0..256 {
            assert!((v[k] - v[255 - k]).abs() < 1e-12);
        }
        assert!(parse_exponent(g, "radial:decay").is_ok());
        assert!(parse_exponent(g, "even-sym:wave:1:2").is_ok());
        assert!(parse_exponent(g, "bogus:1").is_err());
        assert_eq!(parse_exponent(g, "const:1.5").unwrap().p_plus(), 1.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn homogeneity(seed in 0u64..1000, c in -5.0f64..5.0) {
            let g = g1(4.0, 128);
            let mut rng = random::seeded(seed);
            let f = random::smooth_signed(&g, &mut rng);
            let p = ExponentFunction::new(random::smooth_exponent(&g, &mut rng, 0.5, 4.0)).unwrap();
            let a = norm(&f.scale(c), &p).unwrap();
            let b = c.abs() * norm(&f, &p).unwrap();
            prop_assert!((a - b).abs() <= 1e-8 * b.max(1e-300) * 4.0 + 1e-300);
        }

        #[test]
        fn conjugate_is_involutive(seed in 0u64..1000) {
            let g = g1(2.0, 64);
            let p = ExponentFunction::new(random::smooth_exponent(&g, &mut random::seeded(seed), 1.05, 6.0)).unwrap();
            let back = conjugate(&conjugate(&p).unwrap()).unwrap();
            for (a, b) in back.values().iter().zip(p.values()) {
                prop_assert!((a - b).abs() < 1e-12 * b.max(1.0) * 10.0);
            }
        }

        #[test]
        fn modular_decreasing(seed in 0u64..1000, l1 in 0.01f64..10.0, ratio in 1.01f64..4.0) {
            let g = g1(4.0, 64);
            let mut rng = random::seeded(seed);
            let f = random::rough_signed(&g, &mut rng);
            let p = ExponentFunction::new(random::smooth_exponent(&g, &mut rng, 0.5, 3.0)).unwrap();
            prop_assert!(modular(&f, &p, l1).unwrap() > modular(&f, &p, l1 * ratio).unwrap());
        }
    }
}
