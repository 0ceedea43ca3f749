//! Smooth test functions, convolutions and the maximal functions built from them.
//!
//! Convolutions are the grid quadrature `h^n sum_k phi_t(h k) f(x - h k)` of the
//! zero-extended input. Large kernels go through a zero-padded FFT; small ones use the
//! direct sum. Both evaluate the same discrete sum.

use std::ops::RangeInclusive;
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Point};

/// Seminorm order of the certificate `sup |x^a d^b phi| <= 1`, `|a|, |b| <= ORDER`.
pub const CERTIFICATE_ORDER: usize = 4;
const CERTIFICATE_HEADROOM: f64 = 0.99;
const DIRECT_TAPS: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    Gaussian,
    /// `(1 - |x|^2 / w^2)_+^6`.
    PolyBump {
        width: u32,
    },
    /// `exp(-|x|^2) (1 + x_1 / 2)`.
    OddGaussian,
    /// `|x|^2 exp(-|x|^2)`.
    Annular,
}

impl ProfileKind {
    fn base(&self, p: &Point, dim: usize) -> f64 {
        let r2 = p[0] * p[0] + if dim == 2 { p[1] * p[1] } else { 0.0 };
        match self {
            ProfileKind::Gaussian => (-r2).exp(),
            ProfileKind::PolyBump { width } => {
                let w2 = (*width as f64).powi(2);
                let u = 1.0 - r2 / w2;
                if u > 0.0 {
                    u.powi(6)
                } else {
                    0.0
                }
            }
            ProfileKind::OddGaussian => (-r2).exp() * (1.0 + 0.5 * p[0]),
            ProfileKind::Annular => r2 * (-r2).exp(),
        }
    }

    /// Radius beyond which the profile is dropped (below `1e-12` of its peak, or exactly zero).
    pub fn support_radius(&self) -> f64 {
        match self {
            ProfileKind::PolyBump { width } => *width as f64,
            ProfileKind::Annular => 5.6,
            _ => 5.3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Gaussian => "gaussian",
            ProfileKind::PolyBump { width: 1 } => "bump-1",
            ProfileKind::PolyBump { .. } => "bump-2",
            ProfileKind::OddGaussian => "odd-gaussian",
            ProfileKind::Annular => "annular",
        }
    }
}

/// A scaled profile `amplitude * base(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile {
    pub kind: ProfileKind,
    pub amplitude: f64,
    dim: usize,
}

impl Profile {
    pub fn eval(&self, p: &Point) -> f64 {
        self.amplitude * self.kind.base(p, self.dim)
    }

    /// `t^{-n} phi(x / t)`.
    pub fn dilated(&self, p: &Point, t: f64) -> f64 {
        let q = [p[0] / t, p[1] / t];
        self.eval(&q) / t.powi(self.dim as i32)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Fine sampling lattice used for certificates and integrals of profiles.
struct Lattice {
    dim: usize,
    step: f64,
    half: usize,
}

impl Lattice {
    fn for_dim(dim: usize) -> Self {
        if dim == 1 {
            Self {
                dim,
                step: 0.004,
                half: 1750,
            }
        } else {
            Self {
                dim,
                step: 0.02,
                half: 350,
            }
        }
    }

    fn side(&self) -> usize {
        2 * self.half + 1
    }

    fn coord(&self, k: usize) -> f64 {
        (k as f64 - self.half as f64) * self.step
    }

    fn sample(&self, kind: ProfileKind) -> Vec<f64> {
        let s = self.side();
        if self.dim == 1 {
            (0..s).map(|k| kind.base(&[self.coord(k), 0.0], 1)).collect()
        } else {
            let mut v = Vec::with_capacity(s * s);
            for i in 0..s {
                for j in 0..s {
                    v.push(kind.base(&[self.coord(i), self.coord(j)], 2));
                }
            }
            v
        }
    }

    /// Central difference along `axis`; the two boundary layers are left at zero.
    fn diff(&self, v: &[f64], axis: usize) -> Vec<f64> {
        let s = self.side();
        let mut out = vec![0.0; v.len()];
        let inv = 0.5 / self.step;
        if self.dim == 1 {
            for k in 1..s - 1 {
                out[k] = (v[k + 1] - v[k - 1]) * inv;
            }
        } else {
            let stride = if axis == 0 { s } else { 1 };
            for i in 1..s - 1 {
                for j in 1..s - 1 {
                    let k = i * s + j;
                    out[k] = (v[k + stride] - v[k - stride]) * inv;
                }
            }
        }
        out
    }

    /// `max_{|a|, |b| <= order} sup |x^a d^b phi|` over the lattice.
    fn seminorm(&self, kind: ProfileKind, order: usize) -> f64 {
        let s = self.side();
        let base = self.sample(kind);
        let mut best = 0.0f64;
        let multi = |ord: usize| -> Vec<[usize; 2]> {
            let mut out = Vec::new();
            for a in 0..=ord {
                for b in 0..=ord - a {
                    if self.dim == 1 && b > 0 {
                        continue;
                    }
                    out.push([a, b]);
                }
            }
            out
        };
        let betas = multi(order);
        let alphas = multi(order);
        for beta in &betas {
            let mut d = base.clone();
            for _ in 0..beta[0] {
                d = self.diff(&d, 0);
            }
            for _ in 0..beta[1] {
                d = self.diff(&d, 1);
            }
            for (k, val) in d.iter().enumerate() {
                if *val == 0.0 {
                    continue;
                }
                let (x, y) = if self.dim == 1 {
                    (self.coord(k), 0.0)
                } else {
                    (self.coord(k / s), self.coord(k % s))
                };
                for alpha in &alphas {
                    let m = x.abs().powi(alpha[0] as i32) * y.abs().powi(alpha[1] as i32);
                    best = best.max(m * val.abs());
                }
            }
        }
        best
    }

    fn integral(&self, kind: ProfileKind) -> f64 {
        crate::grid::pairwise_sum(&self.sample(kind)) * self.step.powi(self.dim as i32)
    }
}

/// Finite bank of normalised test functions standing in for the unit ball of the
/// Schwartz seminorms of order [`CERTIFICATE_ORDER`].
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunctionBank {
    profiles: Vec<Profile>,
}

const STANDARD_KINDS: [ProfileKind; 5] = [
    ProfileKind::Gaussian,
    ProfileKind::PolyBump { width: 1 },
    ProfileKind::PolyBump { width: 2 },
    ProfileKind::OddGaussian,
    ProfileKind::Annular,
];

static AMPLITUDES: [OnceLock<Vec<f64>>; 2] = [OnceLock::new(), OnceLock::new()];

impl TestFunctionBank {
    /// The five standard profiles, each scaled to seminorm `0.99`.
    pub fn standard(dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Domain(format!("dimension {dim} not in {{1, 2}}")));
        }
        let amps = AMPLITUDES[dim - 1].get_or_init(|| {
            let lat = Lattice::for_dim(dim);
            STANDARD_KINDS
                .iter()
                .map(|k| CERTIFICATE_HEADROOM / lat.seminorm(*k, CERTIFICATE_ORDER))
                .collect()
        });
        Ok(Self {
            profiles: STANDARD_KINDS
                .iter()
                .zip(amps)
                .map(|(&kind, &amplitude)| Profile { kind, amplitude, dim })
                .collect(),
        })
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn first(&self) -> &Profile {
        &self.profiles[0]
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Recomputed seminorm of each scaled profile (each should be at most 1).
    pub fn certificates(&self) -> Vec<f64> {
        self.profiles
            .iter()
            .map(|p| {
                let lat = Lattice::for_dim(p.dim);
                p.amplitude * lat.seminorm(p.kind, CERTIFICATE_ORDER)
            })
            .collect()
    }

    /// `integral phi` of each scaled profile.
    pub fn integrals(&self) -> Vec<f64> {
        self.profiles
            .iter()
            .map(|p| p.amplitude * Lattice::for_dim(p.dim).integral(p.kind))
            .collect()
    }
}

/// Positive scales `t` of the dilations `t^{-n} phi(x / t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleLadder {
    scales: Vec<f64>,
}

impl ScaleLadder {
    pub fn new(mut scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() || scales.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Domain(
                "scales must be a non-empty list of positive numbers".into(),
            ));
        }
        scales.sort_by(f64::total_cmp);
        scales.dedup();
        Ok(Self { scales })
    }

    /// `2^{k/2}` for every integer `k` with `2h <= 2^{k/2} <= L`; contains all dyadic scales
    /// in that range.
    pub fn standard(grid: &Grid) -> Self {
        let lo = (2.0 * (2.0 * grid.spacing()).log2() - 1e-9).ceil() as i32;
        let hi = (2.0 * grid.half_width().log2() + 1e-9).floor() as i32;
        let scales = (lo..=hi.max(lo)).map(|k| 2f64.powf(k as f64 / 2.0)).collect();
        Self { scales }
    }

    /// `2^{-j}` for `j` in the range.
    pub fn dyadic(j_range: RangeInclusive<i32>) -> Result<Self> {
        if j_range.is_empty() {
            return Err(Error::Domain("empty dyadic range".into()));
        }
        Self::new(j_range.map(|j| 2f64.powi(-j)).collect())
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }
}

/// Plans for the zero-padded cyclic convolutions on a grid.
struct Plans {
    dim: usize,
    n: usize,
    p: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(grid: &Grid) -> Self {
        let n = grid.points_per_axis();
        let p = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            dim: grid.dim(),
            n,
            p,
            fwd: planner.plan_fft_forward(p),
            inv: planner.plan_fft_inverse(p),
        }
    }

    fn len(&self) -> usize {
        self.p.pow(self.dim as u32)
    }

    fn transpose(&self, data: &mut [Complex64]) {
        let p = self.p;
        for i in 0..p {
            for j in i + 1..p {
                data.swap(i * p + j, j * p + i);
            }
        }
    }

    fn forward(&self, data: &mut [Complex64]) {
        self.fwd.process(data);
        if self.dim == 2 {
            self.transpose(data);
            self.fwd.process(data);
        }
    }

    fn inverse(&self, data: &mut [Complex64]) {
        self.inv.process(data);
        if self.dim == 2 {
            self.transpose(data);
            self.inv.process(data);
        }
    }

    fn embed(&self, values: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        if self.dim == 1 {
            for (o, v) in out.iter_mut().zip(values) {
                o.re = *v;
            }
        } else {
            for (i, row) in values.chunks(self.n).enumerate() {
                for (j, v) in row.iter().enumerate() {
                    out[i * self.p + j].re = *v;
                }
            }
        }
        out
    }

    fn extract(&self, data: &[Complex64]) -> Vec<f64> {
        let scale = 1.0 / self.len() as f64;
        if self.dim == 1 {
            data[..self.n].iter().map(|c| c.re * scale).collect()
        } else {
            let mut out = Vec::with_capacity(self.n * self.n);
            for i in 0..self.n {
                out.extend(data[i * self.p..i * self.p + self.n].iter().map(|c| c.re * scale));
            }
            out
        }
    }
}

/// Sampled kernel `h^n t^{-n} phi(h k / t)` for offsets `|k_i| <= reach`.
struct Kernel {
    reach: usize,
    taps: Vec<f64>,
}

impl Kernel {
    fn new(profile: &Profile, t: f64, grid: &Grid) -> Self {
        let h = grid.spacing();
        let n = grid.points_per_axis();
        let reach = ((profile.kind.support_radius() * t / h).ceil() as usize).min(n - 1);
        let side = 2 * reach + 1;
        let cell = grid.cell_volume();
        let r = reach as f64;
        let taps = if grid.dim() == 1 {
            (0..side)
                .map(|a| cell * profile.dilated(&[(a as f64 - r) * h, 0.0], t))
                .collect()
        } else {
            let mut v = Vec::with_capacity(side * side);
            for a in 0..side {
                for b in 0..side {
                    v.push(cell * profile.dilated(&[(a as f64 - r) * h, (b as f64 - r) * h], t));
                }
            }
            v
        };
        Self { reach, taps }
    }

    fn side(&self) -> usize {
        2 * self.reach + 1
    }

    fn direct(&self, values: &[f64], dim: usize, n: usize) -> Vec<f64> {
        let r = self.reach as isize;
        let ni = n as isize;
        let side = self.side();
        if dim == 1 {
            (0..ni)
                .map(|i| {
                    let mut s = 0.0;
                    for a in -r..=r {
                        let src = i - a;
                        if src >= 0 && src < ni {
                            s += self.taps[(a + r) as usize] * values[src as usize];
                        }
                    }
                    s
                })
                .collect()
        } else {
            let mut out = vec![0.0; n * n];
            for i in 0..ni {
                for j in 0..ni {
                    let mut s = 0.0;
                    for a in -r..=r {
                        let si = i - a;
                        if si < 0 || si >= ni {
                            continue;
                        }
                        for b in -r..=r {
                            let sj = j - b;
                            if sj >= 0 && sj < ni {
                                s += self.taps[(a + r) as usize * side + (b + r) as usize]
                                    * values[(si * ni + sj) as usize];
                            }
                        }
                    }
                    out[(i * ni + j) as usize] = s;
                }
            }
            out
        }
    }

    fn spectrum(&self, plans: &Plans) -> Vec<Complex64> {
        let p = plans.p as isize;
        let r = self.reach as isize;
        let side = self.side();
        let mut data = vec![Complex64::new(0.0, 0.0); plans.len()];
        let wrap = |k: isize| ((k % p + p) % p) as usize;
        if plans.dim == 1 {
            for a in -r..=r {
                data[wrap(a)].re = self.taps[(a + r) as usize];
            }
        } else {
            for a in -r..=r {
                for b in -r..=r {
                    data[wrap(a) * plans.p + wrap(b)].re = self.taps[(a + r) as usize * side + (b + r) as usize];
                }
            }
        }
        plans.forward(&mut data);
        data
    }
}

/// Convolution by direct summation.
pub fn convolve_direct(f: &GridFunction, profile: &Profile, t: f64) -> Result<GridFunction> {
    check_scale(f.grid(), t)?;
    let grid = *f.grid();
    let k = Kernel::new(profile, t, &grid);
    GridFunction::new(grid, k.direct(f.values(), grid.dim(), grid.points_per_axis()))
}

fn check_scale(grid: &Grid, t: f64) -> Result<()> {
    if t < 2.0 * grid.spacing() * (1.0 - 1e-12) {
        return Err(Error::Domain(format!(
            "scale {t} is below twice the grid spacing {}",
            grid.spacing()
        )));
    }
    Ok(())
}

enum Prepared {
    Direct(Kernel),
    Spectral(Vec<Complex64>),
}

/// Precomputed family of dilated kernels `(profile, t)` on one grid.
pub struct Smoother {
    grid: Grid,
    plans: Plans,
    entries: Vec<(usize, f64)>,
    kernels: Vec<Prepared>,
}

impl Smoother {
    /// Every profile of `profiles` at every scale of `ladder`.
    pub fn new(grid: &Grid, profiles: &[Profile], ladder: &ScaleLadder) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::Domain("no test functions given".into()));
        }
        if profiles.iter().any(|p| p.dim != grid.dim()) {
            return Err(Error::GridMismatch("profile dimension differs from grid".into()));
        }
        for &t in ladder.scales() {
            check_scale(grid, t)?;
        }
        let plans = Plans::new(grid);
        let mut entries = Vec::new();
        let mut kernels = Vec::new();
        for (pi, profile) in profiles.iter().enumerate() {
            for &t in ladder.scales() {
                let k = Kernel::new(profile, t, grid);
                let prepared = if k.side() <= DIRECT_TAPS && grid.dim() == 1 || k.side() <= 5 {
                    Prepared::Direct(k)
                } else {
                    Prepared::Spectral(k.spectrum(&plans))
                };
                entries.push((pi, t));
                kernels.push(prepared);
            }
        }
        Ok(Self {
            grid: *grid,
            plans,
            entries,
            kernels,
        })
    }

    /// `(profile index, scale)` of each kernel.
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    fn run(&self, f: &GridFunction, mut visit: impl FnMut(usize, Vec<f64>)) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch("smoother built for another grid".into()));
        }
        let mut spectrum: Option<Vec<Complex64>> = None;
        for (idx, k) in self.kernels.iter().enumerate() {
            let out = match k {
                Prepared::Direct(kernel) => kernel.direct(f.values(), self.grid.dim(), self.grid.points_per_axis()),
                Prepared::Spectral(ks) => {
                    let fs = spectrum.get_or_insert_with(|| {
                        let mut d = self.plans.embed(f.values());
                        self.plans.forward(&mut d);
                        d
                    });
                    let mut prod: Vec<Complex64> = fs.iter().zip(ks).map(|(a, b)| a * b).collect();
                    self.plans.inverse(&mut prod);
                    self.plans.extract(&prod)
                }
            };
            visit(idx, out);
        }
        Ok(())
    }

    /// All convolutions, in the order of [`Smoother::entries`].
    pub fn convolutions(&self, f: &GridFunction) -> Result<Vec<GridFunction>> {
        let mut out = Vec::with_capacity(self.kernels.len());
        self.run(f, |_, v| out.push(v))?;
        out.into_iter().map(|v| GridFunction::new(self.grid, v)).collect()
    }

    /// `max over kernels of |phi_t * f|`.
    pub fn maximal(&self, f: &GridFunction) -> Result<GridFunction> {
        let mut best = vec![0.0f64; self.grid.len()];
        self.run(f, |_, v| {
            for (b, x) in best.iter_mut().zip(v) {
                *b = b.max(x.abs());
            }
        })?;
        GridFunction::new(self.grid, best)
    }
}

/// `sup_{j in j_range} |phi^j * f|` with `phi^j(x) = 2^{jn} phi(2^j x)`.
pub fn discrete_maximal(f: &GridFunction, profile: &Profile, j_range: RangeInclusive<i32>) -> Result<GridFunction> {
    let ladder = ScaleLadder::dyadic(j_range)?;
    Smoother::new(f.grid(), std::slice::from_ref(profile), &ladder)?.maximal(f)
}

/// `sup_t |phi_t * f|` over a scale ladder for a single profile.
pub fn phi_maximal(f: &GridFunction, profile: &Profile, ladder: &ScaleLadder) -> Result<GridFunction> {
    Smoother::new(f.grid(), std::slice::from_ref(profile), ladder)?.maximal(f)
}

/// Finite-bank lower approximation of the grand maximal function.
pub fn grand_maximal(f: &GridFunction, bank: &TestFunctionBank, ladder: &ScaleLadder) -> Result<GridFunction> {
    Smoother::new(f.grid(), bank.profiles(), ladder)?.maximal(f)
}

/// Dyadic exponents `j` whose scales `2^{-j}` lie in `[2h, L]`.
pub fn dyadic_range(grid: &Grid) -> RangeInclusive<i32> {
    let jmax = (-(2.0 * grid.spacing()).log2() + 1e-9).floor() as i32;
    let jmin = (-grid.half_width().log2() - 1e-9).ceil() as i32;
    jmin..=jmax
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maximal::{hl_maximal, BallFamily};
    use crate::random;

    #[test]
    fn bank_certificates_and_integrals() {
        for dim in [1, 2] {
            let bank = TestFunctionBank::standard(dim).unwrap();
            assert_eq!(bank.len(), 5);
            for c in bank.certificates() {
                assert!(c <= 1.0 && c > 0.9, "certificate {c}");
            }
            for i in bank.integrals() {
                assert!(i.abs() > 1e-6);
            }
        }
        // Unscaled Gaussian integral, n = 1: sqrt(pi).
        let lat = Lattice::for_dim(1);
        assert!((lat.integral(ProfileKind::Gaussian) - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn fft_matches_direct_sum() {
        for (dim, n) in [(1, 256), (2, 32)] {
            let grid = Grid::new(dim, 4.0, n).unwrap();
            let f = random::rough_signed(&grid, &mut random::seeded(2));
            let bank = TestFunctionBank::standard(dim).unwrap();
            let ladder = ScaleLadder::standard(&grid);
            let s = Smoother::new(&grid, bank.profiles(), &ladder).unwrap();
            let conv = s.convolutions(&f).unwrap();
            for (c, &(pi, t)) in conv.iter().zip(s.entries()) {
                let d = convolve_direct(&f, &bank.profiles()[pi], t).unwrap();
                let scale = d.sup_norm().max(1e-300);
                for (a, b) in c.values().iter().zip(d.values()) {
                    assert!((a - b).abs() <= 1e-10 * scale + 1e-14, "t = {t}");
                }
            }
        }
    }

    #[test]
    fn discrete_maximal_of_constant() {
        let grid = Grid::new(1, 16.0, 1024).unwrap();
        let f = GridFunction::constant(grid, 1.0);
        let bank = TestFunctionBank::standard(1).unwrap();
        let phi = bank.first();
        let integral = bank.integrals()[0];
        let m = discrete_maximal(&f, phi, 0..=3).unwrap();
        // Away from the box edge the kernel mass is fully inside.
        for (p, v) in grid.points().zip(m.values()) {
            if p[0].abs() < 8.0 {
                assert!((v - integral).abs() < 1e-6 * integral, "{v} vs {integral}");
            }
        }
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 3..=2;
        assert!(discrete_maximal(&f, phi, empty).is_err());
    }

    #[test]
    fn grand_dominates_discrete() {
        let grid = Grid::new(1, 8.0, 512).unwrap();
        let f = random::rough_signed(&grid, &mut random::seeded(8));
        let bank = TestFunctionBank::standard(1).unwrap();
        let ladder = ScaleLadder::standard(&grid);
        let g = grand_maximal(&f, &bank, &ladder).unwrap();
        let d = discrete_maximal(&f, bank.first(), dyadic_range(&grid)).unwrap();
        for (a, b) in g.values().iter().zip(d.values()) {
            assert!(*a >= *b * (1.0 - 1e-12));
        }
        assert!(grand_maximal(&GridFunction::zeros(grid), &bank, &ladder)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn smoothing_is_dominated_by_hardy_littlewood() {
        // |phi_t * f| <= ||phi||_{radial majorant} Mf; for the Gaussian profile the
        // integrable radial majorant has mass ~ integral of phi.
        let grid = Grid::new(1, 8.0, 512).unwrap();
        let f = random::rough_nonneg(&grid, &mut random::seeded(4));
        let bank = TestFunctionBank::standard(1).unwrap();
        let m = phi_maximal(&f, bank.first(), &ScaleLadder::standard(&grid)).unwrap();
        let hl = hl_maximal(&f, &BallFamily::uncentered(&grid)).unwrap();
        let mass = bank.integrals()[0];
        for (a, b) in m.values().iter().zip(hl.values()) {
            assert!(*a <= 1.05 * mass * b + 1e-12);
        }
    }

    #[test]
    fn rejects_unresolved_scales() {
        let grid = Grid::new(1, 1.0, 64).unwrap();
        let f = GridFunction::constant(grid, 1.0);
        let bank = TestFunctionBank::standard(1).unwrap();
        assert!(convolve_direct(&f, bank.first(), grid.spacing()).is_err());
    }
}
