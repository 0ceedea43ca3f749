//! Uniform cell-centred grids on the box `[-L, L]^n`, grid functions, balls and
//! orthogonal actions.
//!
//! A [`GridFunction`] is read as the piecewise-constant function that takes the
//! sampled value on each cell and vanishes outside the box. Every integral in
//! the crate is the midpoint rule for that reading.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A point of `R^n`; the second coordinate is ignored (and kept at zero) when `n = 1`.
pub type Point = [f64; 2];

const MIN_POINTS: usize = 16;
const PAIRWISE_BLOCK: usize = 32;

/// Uniform cell-centred grid on `[-L, L]^n`, `n` in `{1, 2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width {half_width} must be positive")));
        }
        if points_per_axis < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "{points_per_axis} points per axis, need at least {MIN_POINTS}"
            )));
        }
        Ok(Self {
            dim,
            half_width,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Grid spacing `h = 2L / N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    /// Lebesgue measure of one cell, `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of grid points, `N^n`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of the `k`-th cell centre along one axis.
    pub fn coord(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.spacing()
    }

    /// Per-axis indices of a flat (row-major) index.
    pub fn axis_indices(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.points_per_axis, idx % self.points_per_axis]
        }
    }

    pub fn flat_index(&self, ij: [usize; 2]) -> usize {
        if self.dim == 1 {
            ij[0]
        } else {
            ij[0] * self.points_per_axis + ij[1]
        }
    }

    pub fn point(&self, idx: usize) -> Point {
        let [i, j] = self.axis_indices(idx);
        if self.dim == 1 {
            [self.coord(i), 0.0]
        } else {
            [self.coord(i), self.coord(j)]
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |idx| self.point(idx))
    }

    /// Whether `p` lies in the closed box.
    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|a| p[a].abs() <= self.half_width)
    }

    /// Same box, twice the resolution.
    pub fn refined(&self) -> Self {
        Self {
            points_per_axis: 2 * self.points_per_axis,
            ..*self
        }
    }

    /// Euclidean norm of a point, respecting the dimension.
    pub fn norm(&self, p: &Point) -> f64 {
        norm(self.dim, p)
    }
}

pub(crate) fn norm(dim: usize, p: &Point) -> f64 {
    if dim == 1 {
        p[0].abs()
    } else {
        p[0].hypot(p[1])
    }
}

pub fn distance(dim: usize, a: &Point, b: &Point) -> f64 {
    norm(dim, &[a[0] - b[0], a[1] - b[1]])
}

/// Real samples on a [`Grid`]; all values finite.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f` at every cell centre. Panics if `f` produces a non-finite value.
    pub fn from_fn(grid: Grid, f: impl Fn(&Point) -> f64) -> Self {
        let values: Vec<f64> = grid.points().map(|p| f(&p)).collect();
        assert!(
            values.iter().all(|v| v.is_finite()),
            "sampled function produced a non-finite value"
        );
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise map; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        assert!(values.iter().all(|v| v.is_finite()), "map produced a non-finite value");
        Self {
            grid: self.grid,
            values,
        }
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.grid, values)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.zip_map(other, |x, y| a * x + b * y)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// Writes the CSV interchange format: a metadata row `n,L,N`, then one value per line
    /// in row-major order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{},{},{}",
            self.grid.dim, self.grid.half_width, self.grid.points_per_axis
        )?;
        for v in &self.values {
            writeln!(out, "{v:e}")?;
        }
        Ok(())
    }

    /// Reads the CSV interchange format. A literal `n,L,N` column-name row before the
    /// metadata row is accepted and skipped.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input
            .lines()
            .map(|l| l.map(|s| s.trim().to_string()))
            .filter(|l| l.as_ref().map_or(true, |s| !s.is_empty()));
        let mut header = lines.next().ok_or_else(|| Error::Parse("empty grid CSV".into()))??;
        if header.eq_ignore_ascii_case("n,L,N") {
            header = lines
                .next()
                .ok_or_else(|| Error::Parse("missing metadata row".into()))??;
        }
        let fields: Vec<&str> = header.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("bad metadata row `{header}`")));
        }
        let dim: usize = fields[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension `{}`", fields[0])))?;
        let half_width: f64 = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad half-width `{}`", fields[1])))?;
        let n: usize = fields[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad point count `{}`", fields[2])))?;
        let grid = Grid::new(dim, half_width, n)?;
        let mut values = Vec::with_capacity(grid.len());
        for line in lines {
            let line = line?;
            let v: f64 = line.parse().map_err(|_| Error::Parse(format!("bad value `{line}`")))?;
            values.push(v);
        }
        Self::new(grid, values)
    }
}

/// A ball `B(center, radius)`; in one dimension an interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain(format!("ball radius {radius} must be positive")));
        }
        if !(center[0].is_finite() && center[1].is_finite()) {
            return Err(Error::Domain("ball centre must be finite".into()));
        }
        Ok(Self { center, radius })
    }

    /// Interval `(c - r, c + r)`.
    pub fn interval(c: f64, r: f64) -> Result<Self> {
        Self::new([c, 0.0], r)
    }

    /// `|B|`: `2r` for `n = 1`, `pi r^2` for `n = 2`.
    pub fn volume(&self, dim: usize) -> f64 {
        ball_volume(dim, self.radius)
    }

    /// Open-ball membership (the cell-centre rule).
    pub fn contains(&self, dim: usize, p: &Point) -> bool {
        distance(dim, &self.center, p) < self.radius
    }

    pub fn dilate(&self, factor: f64) -> Self {
        Self {
            center: self.center,
            radius: self.radius * factor,
        }
    }

    /// Whether the ball meets the open box at all.
    pub fn intersects_box(&self, grid: &Grid) -> bool {
        let l = grid.half_width;
        let mut d2 = 0.0;
        for a in 0..grid.dim {
            let c = self.center[a];
            let excess = (c.abs() - l).max(0.0);
            d2 += excess * excess;
        }
        d2.sqrt() < self.radius
    }
}

pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    if dim == 1 {
        2.0 * radius
    } else {
        PI * radius * radius
    }
}

/// Orthogonal `n x n` matrix acting on `R^n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrthogonalMatrix {
    dim: usize,
    m: [[f64; 2]; 2],
}

const ORTHO_TOL: f64 = 1e-12;

impl OrthogonalMatrix {
    /// Builds from row-major entries (`n^2` of them), checking `A^T A = I` and `|det A| = 1`.
    pub fn new(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvariantViolation(format!("dimension {dim} not in {{1, 2}}")));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvariantViolation(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        let mut m = [[0.0; 2]; 2];
        for r in 0..dim {
            for c in 0..dim {
                m[r][c] = entries[r * dim + c];
            }
        }
        let a = Self { dim, m };
        a.validate()?;
        Ok(a)
    }

    fn validate(&self) -> Result<()> {
        for r in 0..self.dim {
            for c in 0..self.dim {
                let dot: f64 = (0..self.dim).map(|k| self.m[k][r] * self.m[k][c]).sum();
                let target = if r == c { 1.0 } else { 0.0 };
                if (dot - target).abs() > ORTHO_TOL {
                    return Err(Error::InvariantViolation(format!(
                        "matrix is not orthogonal: (A^T A)[{r}][{c}] = {dot}"
                    )));
                }
            }
        }
        if (self.det().abs() - 1.0).abs() > ORTHO_TOL {
            return Err(Error::InvariantViolation(format!(
                "|det A| = {} != 1",
                self.det().abs()
            )));
        }
        Ok(())
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            m: [[1.0, 0.0], [0.0, if dim == 2 { 1.0 } else { 0.0 }]],
        }
    }

    /// `-I`.
    pub fn negation(dim: usize) -> Self {
        let mut a = Self::identity(dim);
        a.m[0][0] = -1.0;
        if dim == 2 {
            a.m[1][1] = -1.0;
        }
        a
    }

    /// Counter-clockwise rotation of the plane.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            dim: 2,
            m: [[c, -s], [s, c]],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.push(self.m[r][c]);
            }
        }
        out
    }

    pub fn det(&self) -> f64 {
        if self.dim == 1 {
            self.m[0][0]
        } else {
            self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = *self;
        t.m[0][1] = self.m[1][0];
        t.m[1][0] = self.m[0][1];
        t
    }

    pub fn apply(&self, p: &Point) -> Point {
        if self.dim == 1 {
            [self.m[0][0] * p[0], 0.0]
        } else {
            [
                self.m[0][0] * p[0] + self.m[0][1] * p[1],
                self.m[1][0] * p[0] + self.m[1][1] * p[1],
            ]
        }
    }

    /// `A^{-1} p = A^T p`.
    pub fn apply_inverse(&self, p: &Point) -> Point {
        self.transpose().apply(p)
    }

    /// `|det(A - B)|`, used to check that the kernel singularities are separated.
    pub fn difference_det(&self, other: &Self) -> f64 {
        let d = Self {
            dim: self.dim,
            m: [
                [self.m[0][0] - other.m[0][0], self.m[0][1] - other.m[0][1]],
                [self.m[1][0] - other.m[1][0], self.m[1][1] - other.m[1][1]],
            ],
        };
        d.det().abs()
    }
}

/// Indicator of `ball` by the cell-centre rule.
pub fn indicator(grid: &Grid, ball: &Ball) -> Result<GridFunction> {
    if !ball.intersects_box(grid) {
        return Err(Error::EmptySupport);
    }
    Ok(GridFunction::from_fn(*grid, |p| {
        if ball.contains(grid.dim, p) {
            1.0
        } else {
            0.0
        }
    }))
}

/// Deterministic pairwise (tree) summation; the split points depend only on the length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Midpoint quadrature `h^n * sum f` over the box, or over the grid points inside `region`.
pub fn integrate(f: &GridFunction, region: Option<&Ball>) -> f64 {
    let grid = f.grid();
    let sum = match region {
        None => pairwise_sum(f.values()),
        Some(ball) => {
            let selected: Vec<f64> = f
                .values()
                .iter()
                .enumerate()
                .filter(|(idx, _)| ball.contains(grid.dim, &grid.point(*idx)))
                .map(|(_, &v)| v)
                .collect();
            pairwise_sum(&selected)
        }
    };
    grid.cell_volume() * sum
}

/// Value of the multilinear interpolant of `f` at an arbitrary point; zero outside the box.
pub fn interpolate(f: &GridFunction, p: &Point) -> f64 {
    let grid = f.grid();
    if !grid.contains(p) {
        return 0.0;
    }
    let h = grid.spacing();
    let n = grid.points_per_axis as isize;
    let mut base = [0isize; 2];
    let mut frac = [0.0f64; 2];
    for a in 0..grid.dim {
        let u = (p[a] + grid.half_width) / h - 0.5;
        let mut i = u.floor();
        let mut t = u - i;
        // Snap onto nodes so that exact symmetries of the grid map nodes to nodes.
        if t < 1e-9 {
            t = 0.0;
        } else if t > 1.0 - 1e-9 {
            t = 0.0;
            i += 1.0;
        }
        base[a] = i as isize;
        frac[a] = t;
    }
    let at = |i: isize, j: isize| -> f64 {
        if i < 0 || i >= n || (grid.dim == 2 && (j < 0 || j >= n)) {
            0.0
        } else {
            f.values[grid.flat_index([i as usize, j as usize])]
        }
    };
    if grid.dim == 1 {
        let (i, t) = (base[0], frac[0]);
        let mut v = (1.0 - t) * at(i, 0);
        if t > 0.0 {
            v += t * at(i + 1, 0);
        }
        v
    } else {
        let (i, j) = (base[0], base[1]);
        let (s, t) = (frac[0], frac[1]);
        let mut v = (1.0 - s) * (1.0 - t) * at(i, j);
        if t > 0.0 {
            v += (1.0 - s) * t * at(i, j + 1);
        }
        if s > 0.0 {
            v += s * (1.0 - t) * at(i + 1, j);
            if t > 0.0 {
                v += s * t * at(i + 1, j + 1);
            }
        }
        v
    }
}

/// `f_A(x) = f(A^{-1} x)` by multilinear interpolation; points leaving the box read 0.
pub fn pullback(f: &GridFunction, a: &OrthogonalMatrix) -> Result<GridFunction> {
    a.validate()?;
    let grid = *f.grid();
    if a.dim() != grid.dim {
        return Err(Error::InvariantViolation(format!(
            "{}x{} matrix on a {}-dimensional grid",
            a.dim(),
            a.dim(),
            grid.dim
        )));
    }
    let values = grid.points().map(|p| interpolate(f, &a.apply_inverse(&p))).collect();
    GridFunction::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(l: f64, n: usize) -> Grid {
        Grid::new(1, l, n).unwrap()
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(Grid::new(3, 1.0, 32).is_err());
        assert!(Grid::new(1, 0.0, 32).is_err());
        assert!(Grid::new(1, 1.0, 8).is_err());
    }

    #[test]
    fn cell_centres() {
        let g = grid1(1.0, 16);
        assert!((g.spacing() - 0.125).abs() < 1e-15);
        assert!((g.coord(0) + 0.9375).abs() < 1e-15);
        assert!((g.coord(15) - 0.9375).abs() < 1e-15);
        let g2 = Grid::new(2, 1.0, 16).unwrap();
        assert_eq!(g2.len(), 256);
        assert_eq!(g2.point(17), [g2.coord(1), g2.coord(1)]);
    }

    #[test]
    fn indicator_interval() {
        let g = grid1(4.0, 256);
        let ball = Ball::interval(0.0, 1.0).unwrap();
        let chi = indicator(&g, &ball).unwrap();
        for (p, v) in g.points().zip(chi.values()) {
            let expected = if p[0].abs() < 1.0 { 1.0 } else { 0.0 };
            assert_eq!(*v, expected);
        }
        let area = integrate(&chi, None);
        assert!((area - 2.0).abs() <= g.spacing());
    }

    #[test]
    fn indicator_disk_area() {
        let g = Grid::new(2, 2.0, 128).unwrap();
        let ball = Ball::new([0.0, 0.0], 1.0).unwrap();
        let chi = indicator(&g, &ball).unwrap();
        assert!((integrate(&chi, None) - PI).abs() <= 2.0 * g.spacing());
    }

    #[test]
    fn indicator_disjoint_ball_is_an_error() {
        let g = grid1(1.0, 32);
        let ball = Ball::interval(5.0, 1.0).unwrap();
        assert!(matches!(indicator(&g, &ball), Err(Error::EmptySupport)));
    }

    #[test]
    fn quadrature_examples() {
        let g = grid1(1.0, 64);
        assert_eq!(integrate(&GridFunction::constant(g, 1.0), None), 2.0);
        let odd = GridFunction::from_fn(g, |p| p[0]);
        assert!(integrate(&odd, None).abs() < 1e-12);
        let g = grid1(1.0, 1024);
        let sq = GridFunction::from_fn(g, |p| p[0] * p[0]);
        assert!((integrate(&sq, None) - 2.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let v: Vec<f64> = (0..1000).map(|k| (k as f64).sin()).collect();
        assert_eq!(pairwise_sum(&v).to_bits(), pairwise_sum(&v.clone()).to_bits());
        let direct: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - direct).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_matrix_validation() {
        assert!(OrthogonalMatrix::new(2, &[1.0, 0.1, 0.0, 1.0]).is_err());
        assert!(OrthogonalMatrix::new(1, &[2.0]).is_err());
        let r = OrthogonalMatrix::rotation(0.3);
        assert!(OrthogonalMatrix::new(2, &r.entries()).is_ok());
        assert!((r.difference_det(&OrthogonalMatrix::identity(2)) - (2.0 - 2.0 * 0.3f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn pullback_identity_and_reflection() {
        let g = grid1(4.0, 256);
        let f = GridFunction::from_fn(g, |p| (p[0] * 0.7).sin() * (-p[0] * p[0]).exp());
        let same = pullback(&f, &OrthogonalMatrix::identity(1)).unwrap();
        assert_eq!(same.values(), f.values());

        let chi = GridFunction::from_fn(g, |p| if p[0] >= 1.0 && p[0] <= 2.0 { 1.0 } else { 0.0 });
        let reflected = pullback(&chi, &OrthogonalMatrix::negation(1)).unwrap();
        for (p, v) in g.points().zip(reflected.values()) {
            let expected = if p[0] >= -2.0 && p[0] <= -1.0 { 1.0 } else { 0.0 };
            assert_eq!(*v, expected, "at {}", p[0]);
        }
    }

    #[test]
    fn pullback_quarter_turn_of_disk() {
        let g = Grid::new(2, 2.0, 64).unwrap();
        let chi = indicator(&g, &Ball::new([0.0, 0.0], 1.0).unwrap()).unwrap();
        let rotated = pullback(&chi, &OrthogonalMatrix::rotation(std::f64::consts::FRAC_PI_2)).unwrap();
        let h = g.spacing();
        for (idx, v) in rotated.values().iter().enumerate() {
            if (v - chi.values()[idx]).abs() > 1e-9 {
                // Only allowed within interpolation distance of the boundary.
                let r = g.norm(&g.point(idx));
                assert!((r - 1.0).abs() <= 2.0 * h);
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = Grid::new(2, 1.5, 16).unwrap();
        let f = GridFunction::from_fn(g, |p| p[0] - 2.0 * p[1]);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);

        let with_names = format!("n,L,N\n{}", String::from_utf8(buf).unwrap());
        assert_eq!(GridFunction::read_csv(with_names.as_bytes()).unwrap(), f);
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = grid1(1.0, 16);
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(matches!(GridFunction::new(g, v), Err(Error::NonFinite { index: 3 })));
    }
}
