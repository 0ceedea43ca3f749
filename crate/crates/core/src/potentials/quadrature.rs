//! Cell weights `integral_cell K(x, y) dy` for a fixed evaluation point.
//!
//! Every factor is `|x - A_i y|^{-alpha_i} = |A_i^T x - y|^{-alpha_i}`, so the kernel is a
//! product of radial powers around the points `s_i = A_i^T x`. Far cells use the midpoint
//! value; cells within one cell width of some `s_i` are integrated in polar coordinates
//! around it, with `u = rho^{n-a} / (n-a)` absorbing the power singularity.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use super::OperatorSpec;
use crate::error::{Error, Result};
use crate::grid::Point;

const GL_ORDER: usize = 8;
const MAX_DEPTH: u32 = 5;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(GL_ORDER)
            .expect("order >= 2")
            .iter()
            .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect()
    })
}

fn gl(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let len = b - a;
    rule().iter().map(|(x, w)| w * f(a + len * x)).sum::<f64>() * len
}

/// A group of coincident singular points with their combined exponent.
#[derive(Clone, Copy, Debug)]
struct Group {
    at: Point,
    exponent: f64,
    first: usize,
}

pub(crate) struct Singularities {
    dim: usize,
    points: Vec<Point>,
    exponents: Vec<f64>,
}

impl Singularities {
    pub fn at(spec: &OperatorSpec, x: &Point) -> Self {
        Self {
            dim: spec.dim,
            points: spec.matrices.iter().map(|a| a.apply_inverse(x)).collect(),
            exponents: spec.exponents.clone(),
        }
    }

    fn dist(&self, a: &Point, b: &Point) -> f64 {
        crate::grid::distance(self.dim, a, b)
    }

    pub fn kernel(&self, y: &Point) -> f64 {
        self.points
            .iter()
            .zip(&self.exponents)
            .map(|(s, a)| self.dist(y, s).powf(-a))
            .product()
    }

    /// Kernel with the factors of one group removed.
    fn smooth_part(&self, y: &Point, group: &Group) -> f64 {
        self.points
            .iter()
            .zip(&self.exponents)
            .filter(|(s, _)| self.dist(s, &group.at) > 0.0)
            .map(|(s, a)| self.dist(y, s).powf(-a))
            .product()
    }

    /// Euclidean distance from `s` to the box `[lo, lo + side]^n`.
    fn box_distance(&self, s: &Point, lo: &Point, side: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.dim {
            let e = (lo[k] - s[k]).max(s[k] - lo[k] - side).max(0.0);
            acc += e * e;
        }
        acc.sqrt()
    }

    fn near_groups(&self, lo: &Point, side: f64) -> Vec<Group> {
        let mut groups: Vec<Group> = Vec::new();
        for (j, (s, &a)) in self.points.iter().zip(&self.exponents).enumerate() {
            if self.box_distance(s, lo, side) >= side {
                continue;
            }
            match groups.iter_mut().find(|g| self.dist(&g.at, s) == 0.0) {
                Some(g) => g.exponent += a,
                None => groups.push(Group {
                    at: *s,
                    exponent: a,
                    first: j,
                }),
            }
        }
        groups
    }

    /// `integral K` over the cell of side `h` centred at `y`.
    pub fn cell_weight(&self, y: &Point, h: f64) -> Result<f64> {
        let flagged = self
            .points
            .iter()
            .any(|s| (0..self.dim).all(|k| (y[k] - s[k]).abs() < 1.5 * h));
        if !flagged {
            return Ok(h.powi(self.dim as i32) * self.kernel(y));
        }
        let lo = [y[0] - 0.5 * h, if self.dim == 2 { y[1] - 0.5 * h } else { 0.0 }];
        self.box_integral(&lo, h, 0)
    }

    fn box_integral(&self, lo: &Point, side: f64, depth: u32) -> Result<f64> {
        let groups = self.near_groups(lo, side);
        match groups.len() {
            0 => Ok(self.tensor_gl(lo, side)),
            1 => self.polar(lo, side, &groups[0]),
            _ if depth < MAX_DEPTH => {
                let half = 0.5 * side;
                let mut total = 0.0;
                let offsets: &[[f64; 2]] = if self.dim == 1 {
                    &[[0.0, 0.0], [1.0, 0.0]]
                } else {
                    &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
                };
                for o in offsets {
                    let child = [lo[0] + o[0] * half, lo[1] + o[1] * half];
                    total += self.box_integral(&child, half, depth + 1)?;
                }
                Ok(total)
            }
            _ => {
                let strongest = groups
                    .iter()
                    .copied()
                    .fold(groups[0], |b, g| if g.exponent > b.exponent { g } else { b });
                self.polar(lo, side, &strongest)
            }
        }
    }

    fn tensor_gl(&self, lo: &Point, side: f64) -> f64 {
        if self.dim == 1 {
            gl(lo[0], lo[0] + side, |t| self.kernel(&[t, 0.0]))
        } else {
            gl(lo[0], lo[0] + side, |a| {
                gl(lo[1], lo[1] + side, |b| self.kernel(&[a, b]))
            })
        }
    }

    /// Exit/entry parameters of the ray `s + t dir` through the box, `t >= 0`.
    fn ray_box(&self, s: &Point, dir: &Point, lo: &Point, side: f64) -> Option<(f64, f64)> {
        let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
        for k in 0..self.dim {
            let (a, b) = (lo[k] - s[k], lo[k] + side - s[k]);
            if dir[k].abs() < 1e-300 {
                if a > 0.0 || b < 0.0 {
                    return None;
                }
                continue;
            }
            let (u, v) = (a / dir[k], b / dir[k]);
            t0 = t0.max(u.min(v));
            t1 = t1.min(u.max(v));
        }
        (t1 > t0).then_some((t0, t1))
    }

    fn polar(&self, lo: &Point, side: f64, group: &Group) -> Result<f64> {
        let n = self.dim as f64;
        let e = n - group.exponent;
        if !(e > 0.0) {
            return Err(Error::NonIntegrableKernel {
                index: group.first,
                exponent: group.exponent,
                dim: self.dim,
            });
        }
        let s = group.at;
        // integral_{t0}^{t1} rho^{n-1-a} g(s + rho dir) d rho with u = rho^e / e
        let radial = |dir: Point, t0: f64, t1: f64| {
            let (u0, u1) = (t0.powf(e) / e, t1.powf(e) / e);
            gl(u0, u1, |u| {
                let rho = (e * u).powf(1.0 / e);
                self.smooth_part(&[s[0] + rho * dir[0], s[1] + rho * dir[1]], group)
            })
        };
        if self.dim == 1 {
            let mut total = 0.0;
            for sign in [-1.0, 1.0] {
                if let Some((t0, t1)) = self.ray_box(&s, &[sign, 0.0], lo, side) {
                    total += radial([sign, 0.0], t0, t1);
                }
            }
            return Ok(total);
        }
        let mut angles: Vec<f64> = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
            .iter()
            .map(|c| (lo[1] + c[1] * side - s[1]).atan2(lo[0] + c[0] * side - s[0]))
            .collect();
        angles.sort_by(f64::total_cmp);
        angles.push(angles[0] + TAU);
        let mut total = 0.0;
        for w in angles.windows(2) {
            if w[1] - w[0] <= 0.0 {
                continue;
            }
            total += gl(w[0], w[1], |theta| {
                let dir = [theta.cos(), theta.sin()];
                self.ray_box(&s, &dir, lo, side)
                    .map_or(0.0, |(t0, t1)| radial(dir, t0, t1))
            });
        }
        Ok(total)
    }
}
