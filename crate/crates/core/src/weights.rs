//! Muckenhoupt and reverse Holder constants of grid weights, orthogonal actions on
//! weights and the Rubio de Francia iteration.
//!
//! Ball constants run over the balls of a family whose centres are grid points and
//! which lie inside the box, with exact cell-overlap averages. Essential infima over a
//! ball are minima over the grid points strictly inside it. The maximal-function form
//! of the `A_1` constant uses the operator of [`crate::maximal`].

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ball_volume, pullback, GridFunction, OrthogonalMatrix};
use crate::lebesgue::{self, ExponentFunction};
use crate::maximal::{ball_sums, hl_maximal, neighbourhood_max, BallFamily, Stencil};

/// Floor keeping pulled-back weights strictly positive.
pub const WEIGHT_FLOOR: f64 = 1e-300;
/// Default relative truncation tolerance of the Rubio de Francia series.
pub const RDF_TOL: f64 = 1e-8;
/// Admitted excess of `[Rg]_{A_1}` over `2 m`.
pub const RDF_A1_SLACK: f64 = 0.1;
/// Admitted excess of `||Rg|| / ||g||` over 2.
pub const RDF_NORM_SLACK: f64 = 1e-6;

/// A strictly positive grid function.
#[derive(Clone, Debug)]
pub struct Weight {
    values: GridFunction,
    a1: OnceLock<f64>,
}

impl PartialEq for Weight {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Weight {
    pub fn new(values: GridFunction) -> Result<Self> {
        if let Some(index) = values.values().iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Domain(format!(
                "weight is not positive at grid index {index} (value {})",
                values.values()[index]
            )));
        }
        Ok(Self {
            values,
            a1: OnceLock::new(),
        })
    }

    /// `max(f, floor)`.
    pub fn floored(values: GridFunction, floor: f64) -> Result<Self> {
        Self::new(values.map(|v| v.max(floor)))
    }

    pub fn function(&self) -> &GridFunction {
        &self.values
    }

    pub fn values(&self) -> &[f64] {
        self.values.values()
    }

    pub fn grid(&self) -> &crate::grid::Grid {
        self.values.grid()
    }

    /// `w^r`.
    pub fn powf(&self, r: f64) -> Result<Self> {
        Self::new(self.values.map(|v| v.powf(r)))
    }

    /// `A_1` constant over the standard uncentered family, computed once.
    pub fn a1(&self) -> f64 {
        *self
            .a1
            .get_or_init(|| a1_constant(self, &BallFamily::uncentered(self.grid())).expect("family matches grid"))
    }

    /// `w(E)` for `E` the set where `mask` holds.
    pub fn measure_where(&self, mask: impl Fn(usize) -> bool) -> f64 {
        let selected: Vec<f64> = self
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| mask(*i))
            .map(|(_, v)| *v)
            .collect();
        self.grid().cell_volume() * crate::grid::pairwise_sum(&selected)
    }
}

/// Ball averages of several arrays at every lattice centre; `None` where the ball leaves
/// the box.
fn local_averages<const K: usize>(arrays: [&[f64]; K], w: &Weight, rho: f64) -> [Vec<Option<f64>>; K] {
    let grid = w.grid();
    let (dim, n) = (grid.dim(), grid.points_per_axis());
    let stencil = Stencil::new(dim, rho);
    let ones = vec![1.0; grid.len()];
    let measure = ball_sums(&ones, dim, n, &stencil);
    let full = ball_volume(dim, rho);
    arrays.map(|a| {
        ball_sums(a, dim, n, &stencil)
            .into_iter()
            .zip(&measure)
            .map(|(s, m)| ((full - m).abs() <= 1e-9 * full).then(|| s / m))
            .collect()
    })
}

fn ball_minima(w: &Weight, rho: f64) -> Vec<f64> {
    let grid = w.grid();
    let neg: Vec<f64> = w.values().iter().map(|v| -v).collect();
    neighbourhood_max(&neg, grid.dim(), grid.points_per_axis(), rho, false)
        .into_iter()
        .map(|v| -v)
        .collect()
}

/// `max_x Mw(x) / w(x)`, cross-checked against the ball form
/// `max_B avg_B w / ess inf_B w`; the larger value is returned.
pub fn a1_constant(w: &Weight, family: &BallFamily) -> Result<f64> {
    let mw = hl_maximal(w.function(), family)?;
    let m_form = mw
        .values()
        .iter()
        .zip(w.values())
        .map(|(m, v)| m / v)
        .fold(0.0f64, f64::max);
    let mut ball_form = 0.0f64;
    for &rho in family.index_radii() {
        let [avg] = local_averages([w.values()], w, rho);
        let mins = ball_minima(w, rho);
        for (a, m) in avg.iter().zip(&mins) {
            if let Some(a) = a {
                ball_form = ball_form.max(a / m);
            }
        }
    }
    Ok(m_form.max(ball_form))
}

/// `max_B (avg_B w)(avg_B w^{-1/(p-1)})^{p-1}`.
pub fn ap_constant(w: &Weight, p: f64, family: &BallFamily) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("A_p needs p > 1, got {p}")));
    }
    let dual: Vec<f64> = w.values().iter().map(|v| v.powf(-1.0 / (p - 1.0))).collect();
    let mut best = 0.0f64;
    for &rho in family.index_radii() {
        let [a, b] = local_averages([w.values(), &dual], w, rho);
        for (x, y) in a.iter().zip(&b) {
            if let (Some(x), Some(y)) = (x, y) {
                best = best.max(x * y.powf(p - 1.0));
            }
        }
    }
    Ok(best)
}

/// `max_B (avg_B w^q)^{1/q} (avg_B w^{-p'})^{1/p'}` for `p > 1`, and
/// `max_B (avg_B w^q)^{1/q} / ess inf_B w` for `p = 1`.
pub fn apq_constant(w: &Weight, p: f64, q: f64, family: &BallFamily) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("A_(p,q) needs p >= 1, got {p}")));
    }
    if p > q {
        return Err(Error::Domain(format!("A_(p,q) needs p <= q, got p = {p}, q = {q}")));
    }
    let wq: Vec<f64> = w.values().iter().map(|v| v.powf(q)).collect();
    let mut best = 0.0f64;
    if p == 1.0 {
        for &rho in family.index_radii() {
            let [a] = local_averages([&wq], w, rho);
            let mins = ball_minima(w, rho);
            for (x, m) in a.iter().zip(&mins) {
                if let Some(x) = x {
                    best = best.max(x.powf(1.0 / q) / m);
                }
            }
        }
    } else {
        let pc = p / (p - 1.0);
        let dual: Vec<f64> = w.values().iter().map(|v| v.powf(-pc)).collect();
        for &rho in family.index_radii() {
            let [a, b] = local_averages([&wq, &dual], w, rho);
            for (x, y) in a.iter().zip(&b) {
                if let (Some(x), Some(y)) = (x, y) {
                    best = best.max(x.powf(1.0 / q) * y.powf(1.0 / pc));
                }
            }
        }
    }
    Ok(best)
}

/// `max_B (avg_B w^s)^{1/s} / avg_B w`.
pub fn rh_constant(w: &Weight, s: f64, family: &BallFamily) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Domain(format!("reverse Holder needs s > 1, got {s}")));
    }
    let ws: Vec<f64> = w.values().iter().map(|v| v.powf(s)).collect();
    let mut best = 0.0f64;
    for &rho in family.index_radii() {
        let [a, b] = local_averages([&ws, w.values()], w, rho);
        for (x, y) in a.iter().zip(&b) {
            if let (Some(x), Some(y)) = (x, y) {
                best = best.max(x.powf(1.0 / s) / y);
            }
        }
    }
    Ok(best)
}

/// Reverse Holder exponent `1 + (2^{n+1} [w]_{A_1})^{-1}` attached to an `A_1` weight.
pub fn a1_rh_exponent(dim: usize, a1: f64) -> f64 {
    1.0 + 1.0 / (2f64.powi(dim as i32 + 1) * a1)
}

/// `w_A(x) = w(A^{-1} x)`, floored at [`WEIGHT_FLOOR`].
pub fn act(w: &Weight, a: &OrthogonalMatrix) -> Result<Weight> {
    Weight::floored(pullback(w.function(), a)?, WEIGHT_FLOOR)
}

/// Output of [`rubio_de_francia`] with its certificate.
#[derive(Clone, Debug)]
pub struct RdFResult {
    pub rg: Weight,
    /// Number of series terms summed.
    pub truncation_index: usize,
    pub m_norm_used: f64,
    /// Sup-norm bound on the omitted tail.
    pub tail_bound: f64,
    pub certificate: RdFCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct RdFCertificate {
    pub dominates: bool,
    pub norm_ratio: f64,
    pub norm_ok: bool,
    pub a1: f64,
    pub a1_bound: f64,
    pub a1_ok: bool,
    pub diagnostics: Vec<String>,
}

impl RdFCertificate {
    pub fn passed(&self) -> bool {
        self.dominates && self.norm_ok && self.a1_ok
    }
}

/// `Rg = sum_i M^i |g| / (2 m)^i`, truncated once the sup-norm tail bound drops below
/// `tol * ||g||_inf`. The three properties are checked, and failures are reported in the
/// certificate rather than hidden.
pub fn rubio_de_francia(g: &GridFunction, p_dual: &ExponentFunction, m_norm: f64, tol: f64) -> Result<RdFResult> {
    if !(m_norm > 0.5 && m_norm.is_finite()) {
        return Err(Error::Domain(format!("m_norm = {m_norm} must exceed 1/2")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let grid = *g.grid();
    if p_dual.grid() != &grid {
        return Err(Error::GridMismatch("exponent and g live on different grids".into()));
    }
    let g = g.abs();
    if g.is_zero() {
        return Err(Error::Domain("Rubio de Francia needs g != 0".into()));
    }
    let family = BallFamily::uncentered(&grid);
    let ratio = 1.0 / (2.0 * m_norm);
    let threshold = tol * g.sup_norm();
    let mut sum = g.values().to_vec();
    let mut term = g.clone();
    let mut weight = 1.0;
    let mut k = 1usize;
    let tail = loop {
        term = hl_maximal(&term, &family)?;
        weight *= ratio;
        // ||M^j g||_inf is non-increasing in j, so the tail from k on is geometric.
        let tail = term.sup_norm() * weight / (1.0 - ratio);
        if tail < threshold || k >= 10_000 {
            break tail;
        }
        for (s, t) in sum.iter_mut().zip(term.values()) {
            *s += weight * t;
        }
        k += 1;
    };
    let rg = Weight::floored(GridFunction::new(grid, sum)?, WEIGHT_FLOOR)?;

    let mut diagnostics = Vec::new();
    let dominates = rg.values().iter().zip(g.values()).all(|(r, v)| r >= v);
    if !dominates {
        diagnostics.push("Rg falls below |g| somewhere".to_string());
    }
    let norm_ratio = lebesgue::norm(rg.function(), p_dual)? / lebesgue::norm(&g, p_dual)?;
    let norm_ok = norm_ratio <= 2.0 + RDF_NORM_SLACK;
    if !norm_ok {
        diagnostics.push(format!("||Rg|| / ||g|| = {norm_ratio} exceeds 2"));
    }
    let a1 = rg.a1();
    let a1_bound = 2.0 * m_norm;
    let a1_ok = a1 <= a1_bound * (1.0 + RDF_A1_SLACK);
    if !a1_ok {
        diagnostics.push(format!("[Rg]_A1 = {a1} exceeds 2 m = {a1_bound}"));
    }
    Ok(RdFResult {
        rg,
        truncation_index: k,
        m_norm_used: m_norm,
        tail_bound: tail,
        certificate: RdFCertificate {
            dominates,
            norm_ratio,
            norm_ok,
            a1,
            a1_bound,
            a1_ok,
            diagnostics,
        },
    })
}
