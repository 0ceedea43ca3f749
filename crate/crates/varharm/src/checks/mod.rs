//! Registered verification targets.

use std::time::Instant;

use anyhow::{bail, Context};
use rand::Rng;
use varharm_core::atoms::{make_atom, Atom};
use varharm_core::fit;
use varharm_core::grid::{Ball, Grid, GridFunction};
use varharm_core::lebesgue::ExponentFunction;
use varharm_core::potentials::OperatorSpec;
use varharm_core::random;
use varharm_core::weights::Weight;

use crate::config::{ExperimentConfig, Settings};
use crate::report::{FittedConstant, VerificationReport};

mod lebesgue;
mod maximal;
mod potentials;
mod theorems;
mod weights;

pub type Run = fn(&Settings, &mut VerificationReport) -> anyhow::Result<()>;

pub struct Target {
    pub id: &'static str,
    pub description: &'static str,
    defaults: fn(&mut Settings),
    run: Run,
}

/// Stated in reports that compare against constructed decompositions.
pub const UPPER_BOUND_NOTE: &str = "atomic norms are evaluated on the constructed decomposition, an upper bound for \
     the infimum over decompositions; the verified chain is therefore slightly weaker than the exact inequality";

const TARGETS: &[Target] = &[
    Target {
        id: "lemma1-quasinorm",
        description:
            "Luxemburg quasi-norm identities: homogeneity, definiteness, p-triangle, power rule, symmetric pullback",
        defaults: lebesgue::lemma1_defaults,
        run: lebesgue::lemma1,
    },
    Target {
        id: "ineqmax",
        description: "Pointwise sandwich between centred and uncentred maximal functions, n = 1 and 2",
        defaults: maximal::ineqmax_defaults,
        run: maximal::ineqmax,
    },
    Target {
        id: "lemma4-dilation",
        description: "Empirical maximal operator norm on L^{sp(.)} against L^{p(.)}",
        defaults: maximal::lemma4_defaults,
        run: maximal::lemma4,
    },
    Target {
        id: "lemma12-rh",
        description: "Reverse Hoelder constant of A1 weights at the exponent determined by [w]_A1",
        defaults: weights::lemma12_defaults,
        run: weights::lemma12,
    },
    Target {
        id: "lemma13-vector",
        description: "Weighted vector-valued fractional maximal inequality, theta = 2, J = 8",
        defaults: weights::lemma13_defaults,
        run: weights::lemma13,
    },
    Target {
        id: "lemma14-weaktype",
        description: "Weighted weak-type bound for the generalized potential",
        defaults: potentials::lemma14_defaults,
        run: potentials::lemma14,
    },
    Target {
        id: "lemma15a",
        description: "Weighted L^{q0} bound for the image of one atom, alpha > 0",
        defaults: potentials::lemma15a_defaults,
        run: potentials::lemma15a,
    },
    Target {
        id: "lemma15b",
        description: "Weighted L^{p0} bound for the image of one atom, alpha = 0",
        defaults: potentials::lemma15b_defaults,
        run: potentials::lemma15b,
    },
    Target {
        id: "prop16",
        description: "Weighted L^{q0} bound for the generalized potential on finite atomic sums",
        defaults: potentials::prop16_defaults,
        run: potentials::prop16,
    },
    Target {
        id: "prop18-pointwise",
        description: "Discrete maximal function of I_alpha a against a power of M(chi_B) outside 2B",
        defaults: potentials::prop18_defaults,
        run: potentials::prop18,
    },
    Target {
        id: "cond3-moments",
        description: "Vanishing low-order moments of Riesz potentials of moment-loaded atoms",
        defaults: potentials::cond3_defaults,
        run: potentials::cond3,
    },
    Target {
        id: "prop20",
        description: "Weighted Hardy-space bound for I_alpha on finite atomic sums",
        defaults: potentials::prop20_defaults,
        run: potentials::prop20,
    },
    Target {
        id: "theorem21",
        description: "Uniform H^{p(.)} -> L^{q(.)} bound of the generalized potential over atoms",
        defaults: theorems::theorem21_defaults,
        run: theorems::theorem21,
    },
    Target {
        id: "theorem24",
        description: "Uniform H^{p(.)} -> H^{q(.)} bound of I_alpha over atoms (bank-relative)",
        defaults: theorems::theorem24_defaults,
        run: theorems::theorem24,
    },
    Target {
        id: "remark22-exponents",
        description: "Radial and even-symmetrized exponents: symmetry and log-Hoelder scores",
        defaults: lebesgue::remark22_defaults,
        run: lebesgue::remark22,
    },
    Target {
        id: "farfield-decay",
        description: "Far-field decay slopes of potentials of atoms against the Taylor-remainder prediction",
        defaults: potentials::farfield_defaults,
        run: potentials::farfield,
    },
    Target {
        id: "rdf-certificate",
        description: "Rubio de Francia iteration: domination, norm and A1 certificates",
        defaults: weights::rdf_defaults,
        run: weights::rdf,
    },
];

pub fn targets() -> &'static [Target] {
    TARGETS
}

pub fn find(id: &str) -> Option<&'static Target> {
    TARGETS.iter().find(|t| t.id == id)
}

/// Target defaults overlaid with the config.
pub fn settings_for(config: &ExperimentConfig) -> anyhow::Result<Settings> {
    let Some(t) = find(&config.target) else {
        bail!("unregistered target `{}`; see `varharm list`", config.target);
    };
    let mut s = Settings::base(t.id);
    (t.defaults)(&mut s);
    s.overlay(config)
}

pub fn run(config: &ExperimentConfig) -> anyhow::Result<VerificationReport> {
    run_settings(&settings_for(config)?)
}

pub fn run_settings(s: &Settings) -> anyhow::Result<VerificationReport> {
    let Some(t) = find(&s.target) else {
        bail!("unregistered target `{}`", s.target);
    };
    let start = Instant::now();
    let mut report = VerificationReport::new(s, t.description);
    (t.run)(s, &mut report).with_context(|| format!("target {}", t.id))?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    report.finish();
    Ok(report)
}

// ---- shared helpers ----

/// Points per axis at the base resolution and, if refining, twice that.
fn resolutions(s: &Settings) -> Vec<usize> {
    if s.refine {
        vec![s.points, 2 * s.points]
    } else {
        vec![s.points]
    }
}

fn grid(s: &Settings, points: usize) -> anyhow::Result<Grid> {
    Ok(Grid::new(s.dim, s.half_width, points)?)
}

fn resolution_tag(points: usize) -> String {
    format!("N{points}")
}

/// Records a constant measured at each resolution.
fn push_constant(report: &mut VerificationReport, s: &Settings, name: &str, values: &[f64]) {
    let fine = values.get(1).copied();
    report
        .constants
        .push(FittedConstant::new(name, values[0], fine, s.stability_tol));
}

/// `|x - c|^{-gamma}`, kept finite on the grid by flooring the distance at half a cell.
fn power_weight(grid: &Grid, center: f64, gamma: f64) -> anyhow::Result<Weight> {
    let floor = 0.5 * grid.spacing();
    let dim = grid.dim();
    let f = GridFunction::from_fn(*grid, |x| {
        let mut d2 = (x[0] - center).powi(2);
        if dim == 2 {
            d2 += x[1] * x[1];
        }
        d2.sqrt().max(floor).powf(-gamma)
    });
    Ok(Weight::new(f)?)
}

/// Ball geometry of the atom ladder: radii geometric over the configured range, seeded
/// centres within `center_spread` (times the radius when `relative_centers`). Depends on the seed only, not on the grid.
fn atom_balls(s: &Settings, count: usize, seed: u64) -> anyhow::Result<Vec<Ball>> {
    let mut rng = random::seeded(seed);
    let ratio = s.radius_max / s.radius_min;
    (0..count)
        .map(|k| {
            let t = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
            let r = s.radius_min * ratio.powf(t);
            let mut c = [0.0; 2];
            for slot in c.iter_mut().take(s.dim) {
                let u = if s.center_spread > 0.0 {
                    rng.gen_range(-s.center_spread..s.center_spread)
                } else {
                    0.0
                };
                *slot = if s.relative_centers { u * r } else { u };
            }
            Ok(Ball::new(c, r)?)
        })
        .collect()
}

fn atom_ladder(p: &ExponentFunction, s: &Settings, degree: usize, count: usize) -> anyhow::Result<Vec<Atom>> {
    atom_balls(s, count, s.seed)?
        .into_iter()
        .enumerate()
        .map(|(k, ball)| {
            make_atom(ball, p, s.atom_q, degree, s.seed.wrapping_add(1000 + k as u64))
                .with_context(|| format!("atom {k} on ball r = {}", ball.radius))
        })
        .collect()
}

/// `1/q0 = 1/p0 - alpha/n`.
fn shifted_index(dim: usize, p0: f64, alpha: f64) -> f64 {
    1.0 / (1.0 / p0 - alpha / dim as f64)
}

/// The configured operator, or the reflected pair `A = +-I` with equal exponents.
fn operator(s: &Settings, alpha: f64) -> anyhow::Result<OperatorSpec> {
    match &s.operator {
        Some(file) => Ok(OperatorSpec::from_file(file)?),
        None => {
            let half = 0.5 * (s.dim as f64 - alpha);
            Ok(OperatorSpec::reflected_pair(s.dim, alpha, half, half)?)
        }
    }
}

/// Estimated integral of `g` outside the box, assuming `g` decays like `|x|^{-decay}`
/// beyond the largest sampled radius.
fn tail_budget(g: &GridFunction, decay: f64) -> f64 {
    let grid = g.grid();
    let n = grid.dim() as f64;
    if decay <= n {
        return f64::INFINITY;
    }
    let l = grid.half_width();
    let npts = grid.points_per_axis();
    let edge = (0..grid.len())
        .filter(|&i| {
            let ij = grid.axis_indices(i);
            (0..grid.dim()).any(|a| ij[a] == 0 || ij[a] == npts - 1)
        })
        .map(|i| g.values()[i].abs())
        .fold(0.0, f64::max);
    let sphere = if grid.dim() == 1 { 2.0 } else { std::f64::consts::TAU };
    sphere * edge * l.powf(n) / (decay - n)
}

/// `(slope of log y against log r, max y / min y)`.
fn trend(radii: &[f64], ys: &[f64]) -> anyhow::Result<(f64, f64)> {
    let slope = fit::log_log_slope(radii, ys)?;
    let max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((slope, max / min))
}

/// Number of distinct dyadic bands `[2^k, 2^{k+1})` hit by the radii.
fn dyadic_bands(radii: &[f64]) -> usize {
    let mut ks: Vec<i64> = radii.iter().map(|r| (r.log2() + 1e-9).floor() as i64).collect();
    ks.sort_unstable();
    ks.dedup();
    ks.len()
}
