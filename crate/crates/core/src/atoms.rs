//! Atoms with prescribed vanishing moments, finite atomic decompositions and the
//! norms attached to them.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{indicator, integrate, Ball, GridFunction, Point};
use crate::lebesgue::{self, ExponentFunction};
use crate::maximal::Smoother;
use crate::random;
use crate::weights::Weight;

/// Fraction of the size cap that constructed atoms saturate.
pub const SATURATION: f64 = 0.9;
/// Largest admitted condition number of the moment Gram matrix.
pub const MAX_GRAM_CONDITION: f64 = 1e12;
/// Relative tolerance of the vanishing-moment condition.
pub const MOMENT_RTOL: f64 = 1e-8;
/// Relative slack of the size condition.
pub const SIZE_RTOL: f64 = 1e-6;
/// Absolute tolerance of the support condition.
pub const SUPPORT_ATOL: f64 = 1e-12;

/// `floor(n (1/p0 - 1))`, clamped at zero: the moment degree an atom for `H^{p0}` needs.
pub fn hardy_moment_degree(dim: usize, p0: f64) -> usize {
    (dim as f64 * (1.0 / p0 - 1.0)).floor().max(0.0) as usize
}

/// Extra moments that make Riesz-potential images of atoms into molecules:
/// `2 floor(n (1/q0 - 1)) + 3 + floor(alpha) + n` with `1/q0 = 1/p0 - alpha/n`.
pub fn potential_moment_degree(dim: usize, p0: f64, alpha: f64) -> usize {
    let n = dim as f64;
    let q0 = 1.0 / (1.0 / p0 - alpha / n);
    2 * hardy_moment_degree(dim, q0) + 3 + alpha.floor() as usize + dim
}

/// Multi-indices of total degree at most `degree`.
pub fn multi_indices(dim: usize, degree: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for total in 0..=degree {
        if dim == 1 {
            out.push([total, 0]);
        } else {
            for a in (0..=total).rev() {
                out.push([a, total - a]);
            }
        }
    }
    out
}

fn scaled_monomial(beta: &[usize; 2], u: &Point) -> f64 {
    u[0].powi(beta[0] as i32) * u[1].powi(beta[1] as i32)
}

/// A function supported in a ball with vanishing moments up to `moment_degree`.
#[derive(Clone, Debug)]
pub struct Atom {
    pub values: GridFunction,
    pub ball: Ball,
    pub q: f64,
    pub moment_degree: usize,
    pub p: ExponentFunction,
    chi_norm: f64,
}

impl Atom {
    /// Wraps given values without validation.
    pub fn from_parts(
        values: GridFunction,
        ball: Ball,
        p: ExponentFunction,
        q: f64,
        moment_degree: usize,
    ) -> Result<Self> {
        if values.grid() != p.grid() {
            return Err(Error::GridMismatch("atom and exponent live on different grids".into()));
        }
        let chi = indicator(values.grid(), &ball)?;
        let chi_norm = lebesgue::norm(&chi, &p)?;
        Ok(Self {
            values,
            ball,
            q,
            moment_degree,
            p,
            chi_norm,
        })
    }

    /// `||chi_B||_{p(.)}`.
    pub fn chi_norm(&self) -> f64 {
        self.chi_norm
    }

    /// `|B|^{1/q} / ||chi_B||_{p(.)}`, the size cap.
    pub fn size_cap(&self) -> f64 {
        let dim = self.values.grid().dim();
        self.ball.volume(dim).powf(1.0 / self.q) / self.chi_norm
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.scale(c),
            ..self.clone()
        }
    }
}

fn lq_norm(f: &GridFunction, q: f64) -> f64 {
    integrate(&f.map(|v| v.abs().powf(q)), None).powf(1.0 / q)
}

/// Seeded atom: a smooth bump times (random polynomial + sinusoid), with the moments of
/// degree `<= degree` projected out through the Gram system of scaled monomials, then
/// rescaled to `0.9` of the size cap.
pub fn make_atom(ball: Ball, p: &ExponentFunction, q: f64, degree: usize, seed: u64) -> Result<Atom> {
    if !(q > 1.0) {
        return Err(Error::Domain(format!("atom integrability q = {q} must exceed 1")));
    }
    let grid = *p.grid();
    let dim = grid.dim();
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&i| ball.contains(dim, &grid.point(i)))
        .collect();
    let basis = multi_indices(dim, degree);
    let needed = (degree + 1).pow(dim as u32) + 1;
    if inside.len() < needed {
        return Err(Error::Geometry(format!(
            "ball holds {} grid points, degree {degree} needs at least {needed}",
            inside.len()
        )));
    }

    let mut rng = random::seeded(seed);
    let poly_basis = multi_indices(dim, degree + 2);
    let coeffs: Vec<f64> = poly_basis.iter().map(|_| rng.sample(StandardNormal)).collect();
    let omega: f64 = rng.gen_range(1.0..3.0);
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let dir = if dim == 1 {
        [1.0, 0.0]
    } else {
        [theta.cos(), theta.sin()]
    };

    let r = ball.radius;
    let scaled: Vec<Point> = inside
        .iter()
        .map(|&i| {
            let x = grid.point(i);
            [
                (x[0] - ball.center[0]) / r,
                if dim == 2 { (x[1] - ball.center[1]) / r } else { 0.0 },
            ]
        })
        .collect();
    let bump: Vec<f64> = scaled
        .iter()
        .map(|u| (1.0 - (u[0] * u[0] + u[1] * u[1])).max(0.0).powi(3))
        .collect();
    let seed_values: Vec<f64> = scaled
        .iter()
        .map(|u| {
            let poly: f64 = poly_basis
                .iter()
                .zip(&coeffs)
                .map(|(b, c)| c * scaled_monomial(b, u))
                .sum();
            poly + (omega * (dir[0] * u[0] + dir[1] * u[1]) + phase).sin()
        })
        .collect();

    let k = basis.len();
    let design = DMatrix::from_fn(inside.len(), k, |i, j| scaled_monomial(&basis[j], &scaled[i]));
    let cell = grid.cell_volume();
    let gram = DMatrix::from_fn(k, k, |a, b| {
        let col: Vec<f64> = (0..inside.len())
            .map(|i| bump[i] * design[(i, a)] * design[(i, b)])
            .collect();
        cell * crate::grid::pairwise_sum(&col)
    });
    let eig = gram.clone().symmetric_eigen();
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= MAX_GRAM_CONDITION) {
        return Err(Error::IllConditioned { cond });
    }
    let chol = gram.clone().cholesky().ok_or(Error::IllConditioned { cond })?;

    // a = bump * (v - sum c_beta m_beta); two passes clean up the solve residual.
    let mut residual = DVector::from_vec(seed_values.clone());
    for _ in 0..2 {
        let rhs = DVector::from_fn(k, |a, _| {
            let col: Vec<f64> = (0..inside.len())
                .map(|i| bump[i] * residual[i] * design[(i, a)])
                .collect();
            cell * crate::grid::pairwise_sum(&col)
        });
        let c = chol.solve(&rhs);
        residual -= &design * c;
    }
    let seed_scale = seed_values
        .iter()
        .zip(&bump)
        .fold(0.0f64, |m, (v, b)| m.max((v * b).abs()));
    let mut values = vec![0.0; grid.len()];
    for (t, &i) in inside.iter().enumerate() {
        values[i] = bump[t] * residual[t];
    }
    let raw = GridFunction::new(grid, values)?;
    if raw.sup_norm() <= 1e-10 * seed_scale {
        return Err(Error::DegenerateSeed);
    }
    let atom = Atom::from_parts(raw, ball, p.clone(), q, degree)?;
    let target = SATURATION * atom.size_cap();
    let current = lq_norm(&atom.values, q);
    Ok(atom.scaled(target / current))
}

/// Measured slack of one condition.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Condition {
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
}

impl Condition {
    fn new(measured: f64, bound: f64) -> Self {
        Self {
            passed: measured <= bound,
            measured,
            bound,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AtomReport {
    /// `max |a|` outside the ball.
    pub support: Condition,
    /// `||a||_q` against the size cap.
    pub size: Condition,
    /// Largest centred, scaled moment `|integral a ((x - x0)/r)^beta|`.
    pub moments: Condition,
    /// `(s, ||a||_s against |B|^{1/s} / ||chi_B||)` for intermediate exponents.
    pub holder: Vec<(f64, Condition)>,
}

impl AtomReport {
    pub fn passed(&self) -> bool {
        self.support.passed && self.size.passed && self.moments.passed && self.holder.iter().all(|(_, c)| c.passed)
    }
}

/// Largest centred, scaled moment of order `<= degree`.
pub fn max_scaled_moment(f: &GridFunction, ball: &Ball, degree: usize) -> f64 {
    let grid = f.grid();
    let dim = grid.dim();
    let r = ball.radius;
    multi_indices(dim, degree)
        .iter()
        .map(|beta| {
            let g = GridFunction::from_fn(*grid, |x| {
                let u = [
                    (x[0] - ball.center[0]) / r,
                    if dim == 2 { (x[1] - ball.center[1]) / r } else { 0.0 },
                ];
                scaled_monomial(beta, &u)
            });
            let prod = f.zip_map(&g, |a, m| a * m).expect("same grid");
            integrate(&prod, None).abs()
        })
        .fold(0.0, f64::max)
}

/// Checks support, size, vanishing moments and the intermediate Holder bounds.
pub fn validate_atom(a: &Atom) -> AtomReport {
    let grid = a.values.grid();
    let dim = grid.dim();
    let outside = a
        .values
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| !a.ball.contains(dim, &grid.point(*i)))
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    let cap = a.size_cap();
    let norm_q = lq_norm(&a.values, a.q);
    let vol = a.ball.volume(dim);
    let moment = max_scaled_moment(&a.values, &a.ball, a.moment_degree);
    let moment_bound = MOMENT_RTOL * norm_q * vol.powf(1.0 - 1.0 / a.q);
    let holder = [1.5, 0.5 * (1.0 + a.q)]
        .into_iter()
        .filter(|s| *s > 1.0 && *s < a.q)
        .map(|s| {
            (
                s,
                Condition::new(
                    lq_norm(&a.values, s),
                    vol.powf(1.0 / s) / a.chi_norm * (1.0 + SIZE_RTOL),
                ),
            )
        })
        .collect();
    AtomReport {
        support: Condition::new(outside, SUPPORT_ATOL),
        size: Condition::new(norm_q, cap * (1.0 + SIZE_RTOL)),
        moments: Condition::new(moment, moment_bound),
        holder,
    }
}

/// `f = sum_j lambda_j a_j` with positive coefficients and valid atoms.
#[derive(Clone, Debug)]
pub struct FiniteDecomposition {
    terms: Vec<(f64, Atom)>,
}

impl FiniteDecomposition {
    pub fn new(terms: Vec<(f64, Atom)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Domain("a decomposition needs at least one atom".into()));
        }
        let grid = *terms[0].1.values.grid();
        for (j, (lambda, atom)) in terms.iter().enumerate() {
            if !(*lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::Domain(format!("coefficient {j} = {lambda} must be positive")));
            }
            if atom.values.grid() != &grid {
                return Err(Error::GridMismatch(format!("atom {j} lives on another grid")));
            }
            let report = validate_atom(atom);
            if !report.passed() {
                return Err(Error::InvariantViolation(format!("atom {j} is not valid: {report:?}")));
            }
        }
        Ok(Self { terms })
    }

    pub fn single(atom: Atom) -> Result<Self> {
        Self::new(vec![(1.0, atom)])
    }

    pub fn terms(&self) -> &[(f64, Atom)] {
        &self.terms
    }

    /// `sum_j lambda_j a_j`.
    pub fn sum(&self) -> GridFunction {
        let grid = *self.terms[0].1.values.grid();
        let mut acc = vec![0.0; grid.len()];
        for (lambda, atom) in &self.terms {
            for (s, v) in acc.iter_mut().zip(atom.values.values()) {
                *s += lambda * v;
            }
        }
        GridFunction::new(grid, acc).expect("finite sum of finite values")
    }

    /// Same atoms, every coefficient multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.terms.iter().map(|(l, a)| (l * c, a.clone())).collect())
    }

    fn chi_norms(&self, p: &ExponentFunction) -> Result<Vec<f64>> {
        self.terms
            .iter()
            .map(|(_, a)| {
                if &a.p == p {
                    Ok(a.chi_norm)
                } else {
                    lebesgue::norm(&indicator(a.values.grid(), &a.ball)?, p)
                }
            })
            .collect()
    }
}

/// `|| sum_j lambda_j chi_{B_j} / ||chi_{B_j}||_{p(.)} ||_{p(.)}` for this decomposition.
pub fn finite_atomic_norm(d: &FiniteDecomposition, p: &ExponentFunction) -> Result<f64> {
    let grid = *p.grid();
    let norms = d.chi_norms(p)?;
    let mut acc = vec![0.0; grid.len()];
    for ((lambda, atom), cn) in d.terms.iter().zip(norms) {
        let c = lambda / cn;
        for (i, s) in acc.iter_mut().enumerate() {
            if atom.ball.contains(grid.dim(), &grid.point(i)) {
                *s += c;
            }
        }
    }
    lebesgue::norm(&GridFunction::new(grid, acc)?, p)
}

/// `(integral sum_j lambda_j^{p0} chi_{B_j} / ||chi_{B_j}||^{p0} w)^{1/p0}` for this decomposition.
pub fn weighted_finite_atomic_norm(d: &FiniteDecomposition, p: &ExponentFunction, p0: f64, w: &Weight) -> Result<f64> {
    if !(p0 > 0.0) {
        return Err(Error::Domain(format!("p0 = {p0} must be positive")));
    }
    let grid = *p.grid();
    let norms = d.chi_norms(p)?;
    let mut acc = vec![0.0; grid.len()];
    for ((lambda, atom), cn) in d.terms.iter().zip(norms) {
        let c = (lambda / cn).powf(p0);
        for (i, s) in acc.iter_mut().enumerate() {
            if atom.ball.contains(grid.dim(), &grid.point(i)) {
                *s += c * w.values()[i];
            }
        }
    }
    Ok(integrate(&GridFunction::new(grid, acc)?, None).powf(1.0 / p0))
}

/// `(integral (M_phi f)^{p0} w)^{1/p0}` with a prepared smoother (its kernels define `M_phi`).
pub fn weighted_hardy_norm_with(f: &GridFunction, p0: f64, w: &Weight, smoother: &Smoother) -> Result<f64> {
    if !(p0 > 0.0) {
        return Err(Error::Domain(format!("p0 = {p0} must be positive")));
    }
    let m = smoother.maximal(f)?;
    let prod = m.zip_map(w.function(), |a, b| a.powf(p0) * b)?;
    Ok(integrate(&prod, None).powf(1.0 / p0))
}

/// `(integral (M_phi f)^{p0} w)^{1/p0}` with `phi` the bank's first profile over the
/// standard scale ladder.
pub fn weighted_hardy_norm(
    f: &GridFunction,
    p0: f64,
    w: &Weight,
    bank: &crate::maximal::TestFunctionBank,
) -> Result<f64> {
    let ladder = crate::maximal::ScaleLadder::standard(f.grid());
    let s = Smoother::new(f.grid(), std::slice::from_ref(bank.first()), &ladder)?;
    weighted_hardy_norm_with(f, p0, w, &s)
}
