//! Seeded generators for test functions and exponents.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, GridFunction, Point};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_center<R: Rng>(grid: &Grid, rng: &mut R, spread: f64) -> Point {
    let mut c = [0.0; 2];
    for slot in c.iter_mut().take(grid.dim()) {
        *slot = rng.gen_range(-spread..spread);
    }
    c
}

fn sq_dist(dim: usize, a: &Point, b: &Point) -> f64 {
    let mut s = (a[0] - b[0]).powi(2);
    if dim == 2 {
        s += (a[1] - b[1]).powi(2);
    }
    s
}

/// Sum of a few Gaussians with random signs, centres in the middle half of the box.
pub fn smooth_signed<R: Rng>(grid: &Grid, rng: &mut R) -> GridFunction {
    let l = grid.half_width();
    let bumps: Vec<(Point, f64, f64)> = (0..4)
        .map(|_| {
            let c = random_center(grid, rng, 0.5 * l);
            let w = rng.gen_range(0.04..0.15) * l;
            let a = rng.gen_range(-1.0..1.0);
            (c, w, a)
        })
        .collect();
    let dim = grid.dim();
    GridFunction::from_fn(*grid, |p| {
        bumps
            .iter()
            .map(|(c, w, a)| a * (-sq_dist(dim, p, c) / (w * w)).exp())
            .sum()
    })
}

/// Mixture of ball indicators and Gaussians; rough and non-negative.
pub fn rough_nonneg<R: Rng>(grid: &Grid, rng: &mut R) -> GridFunction {
    let l = grid.half_width();
    let h = grid.spacing();
    let dim = grid.dim();
    let pieces: Vec<(Point, f64, f64, bool)> = (0..5)
        .map(|_| {
            let c = random_center(grid, rng, 0.6 * l);
            let r = rng.gen_range((2.0 * h).max(0.02 * l)..0.2 * l);
            let a = rng.gen_range(0.1..2.0);
            (c, r, a, rng.gen_bool(0.5))
        })
        .collect();
    GridFunction::from_fn(*grid, |p| {
        pieces
            .iter()
            .map(|(c, r, a, step)| {
                let d2 = sq_dist(dim, p, c);
                if *step {
                    if d2 < r * r {
                        *a
                    } else {
                        0.0
                    }
                } else {
                    a * (-d2 / (r * r)).exp()
                }
            })
            .sum()
    })
}

/// Signed variant of [`rough_nonneg`]: random signs on each piece.
pub fn rough_signed<R: Rng>(grid: &Grid, rng: &mut R) -> GridFunction {
    let a = rough_nonneg(grid, rng);
    let b = rough_nonneg(grid, rng);
    a.axpby(1.0, &b, -1.0).expect("same grid")
}

/// Smooth exponent with values in `[lo, hi]`.
pub fn smooth_exponent<R: Rng>(grid: &Grid, rng: &mut R, lo: f64, hi: f64) -> GridFunction {
    let l = grid.half_width();
    let freq = [rng.gen_range(0.3..2.0) / l, rng.gen_range(0.3..2.0) / l];
    let phase = [rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3)];
    let dim = grid.dim();
    GridFunction::from_fn(*grid, |p| {
        let mut s = (freq[0] * p[0] * 3.0 + phase[0]).sin();
        if dim == 2 {
            s = 0.5 * (s + (freq[1] * p[1] * 3.0 + phase[1]).sin());
        }
        lo + (hi - lo) * 0.5 * (1.0 + s)
    })
}

/// Exponent invariant under `x -> -x`, values in `[lo, hi]`.
pub fn even_exponent<R: Rng>(grid: &Grid, rng: &mut R, lo: f64, hi: f64) -> GridFunction {
    let l = grid.half_width();
    let freq = rng.gen_range(0.3..2.0) / l;
    let phase = rng.gen_range(0.0..6.3);
    let dim = grid.dim();
    GridFunction::from_fn(*grid, |p| {
        let r = crate::grid::norm(dim, p);
        lo + (hi - lo) * 0.5 * (1.0 + (3.0 * freq * r + phase).cos())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let a = smooth_signed(&g, &mut seeded(7));
        let b = smooth_signed(&g, &mut seeded(7));
        assert_eq!(a, b);
        let p = smooth_exponent(&g, &mut seeded(3), 1.2, 3.0);
        assert!(p.values().iter().all(|&v| (1.2..=3.0).contains(&v)));
    }

    #[test]
    fn even_exponent_is_even() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let p = even_exponent(&g, &mut seeded(1), 1.1, 2.0);
        let v = p.values();
        for k in 0..64 {
            assert!((v[k] - v[63 - k]).abs() < 1e-12);
        }
    }
}
