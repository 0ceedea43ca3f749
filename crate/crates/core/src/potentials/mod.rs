//! Riesz potentials and their product-kernel generalisation
//! `T f(x) = integral prod_i |x - A_i y|^{-alpha_i} f(y) dy`.

mod checks;
mod quadrature;

pub use checks::{
    far_field_check, riesz_moment_check, weak_type_check, weak_type_from, FarFieldReport, MomentReport, MomentRow,
    RayFit, WeakTypeReport, WeakTypeRow, MOMENT_QUAD_RTOL, MOMENT_TOLERANCE_RTOL, ROUNDOFF_FACTOR,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{pairwise_sum, GridFunction, OrthogonalMatrix, Point};

/// Validated parameters of `T_{alpha,m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec {
    dim: usize,
    alpha: f64,
    matrices: Vec<OrthogonalMatrix>,
    exponents: Vec<f64>,
}

/// Serializable form used by configs and the CLI.
#[derive(Clone, Debug, Serialize, serde::Deserialize)]
pub struct OperatorSpecFile {
    pub dim: usize,
    pub alpha: f64,
    /// Row-major entries of each matrix.
    pub matrices: Vec<Vec<f64>>,
    pub exponents: Vec<f64>,
}

impl OperatorSpec {
    pub fn new(dim: usize, alpha: f64, matrices: Vec<OrthogonalMatrix>, exponents: Vec<f64>) -> Result<Self> {
        let n = dim as f64;
        if !(dim == 1 || dim == 2) {
            return Err(Error::Domain(format!("dimension {dim} not supported")));
        }
        if !(0.0..n).contains(&alpha) {
            return Err(Error::Domain(format!("alpha = {alpha} outside [0, {n})")));
        }
        if matrices.is_empty() || matrices.len() != exponents.len() {
            return Err(Error::Domain(format!(
                "{} matrices for {} exponents",
                matrices.len(),
                exponents.len()
            )));
        }
        for (i, (a, &e)) in matrices.iter().zip(&exponents).enumerate() {
            if a.dim() != dim {
                return Err(Error::Domain(format!("matrix {i} is {}x{}", a.dim(), a.dim())));
            }
            if !(e > 0.0) {
                return Err(Error::Domain(format!("exponent alpha_{i} = {e} must be positive")));
            }
            if e >= n {
                return Err(Error::NonIntegrableKernel {
                    index: i,
                    exponent: e,
                    dim,
                });
            }
        }
        let total: f64 = exponents.iter().sum();
        if (total - (n - alpha)).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "exponents sum to {total}, expected n - alpha = {}",
                n - alpha
            )));
        }
        for i in 0..matrices.len() {
            for j in i + 1..matrices.len() {
                let d = matrices[i].difference_det(&matrices[j]);
                if !(d.abs() > 1e-10) {
                    return Err(Error::Domain(format!("A_{i} - A_{j} is singular (det {d:e})")));
                }
            }
        }
        Ok(Self {
            dim,
            alpha,
            matrices,
            exponents,
        })
    }

    /// `I_alpha`: one factor, identity matrix, exponent `n - alpha`.
    pub fn riesz(dim: usize, alpha: f64) -> Result<Self> {
        Self::new(
            dim,
            alpha,
            vec![OrthogonalMatrix::identity(dim)],
            vec![dim as f64 - alpha],
        )
    }

    /// Two factors, `A_1 = I`, `A_2 = -I`.
    pub fn reflected_pair(dim: usize, alpha: f64, first: f64, second: f64) -> Result<Self> {
        Self::new(
            dim,
            alpha,
            vec![OrthogonalMatrix::identity(dim), OrthogonalMatrix::negation(dim)],
            vec![first, second],
        )
    }

    pub fn from_file(file: &OperatorSpecFile) -> Result<Self> {
        let matrices = file
            .matrices
            .iter()
            .map(|m| OrthogonalMatrix::new(file.dim, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.dim, file.alpha, matrices, file.exponents.clone())
    }

    pub fn to_file(&self) -> OperatorSpecFile {
        OperatorSpecFile {
            dim: self.dim,
            alpha: self.alpha,
            matrices: self.matrices.iter().map(|m| m.entries()).collect(),
            exponents: self.exponents.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn matrices(&self) -> &[OrthogonalMatrix] {
        &self.matrices
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn m(&self) -> usize {
        self.matrices.len()
    }

    /// `prod_i |x - A_i y|^{-alpha_i}`.
    pub fn kernel(&self, x: &Point, y: &Point) -> f64 {
        quadrature::Singularities::at(self, x).kernel(y)
    }
}

/// Non-zero cells of an input function.
pub(crate) struct Support {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
}

impl Support {
    pub fn of(f: &GridFunction) -> Self {
        let grid = f.grid();
        let (points, values) = f
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (grid.point(i), *v))
            .unzip();
        Self { points, values }
    }
}

fn check_grid(spec: &OperatorSpec, f: &GridFunction) -> Result<()> {
    if f.grid().dim() != spec.dim {
        return Err(Error::GridMismatch(format!(
            "{}-dimensional operator on a {}-dimensional grid",
            spec.dim,
            f.grid().dim()
        )));
    }
    Ok(())
}

/// Evaluates `T f(x)` and `integral |K(x, y) f(y)| dy` at one point.
pub(crate) fn evaluate_with_mass(
    spec: &OperatorSpec,
    support: &Support,
    h: f64,
    x: &Point,
    buf: &mut Vec<f64>,
    abs_buf: &mut Vec<f64>,
) -> Result<(f64, f64)> {
    let sing = quadrature::Singularities::at(spec, x);
    buf.clear();
    abs_buf.clear();
    for (y, &v) in support.points.iter().zip(&support.values) {
        let weight = sing.cell_weight(y, h)?;
        buf.push(weight * v);
        abs_buf.push((weight * v).abs());
    }
    Ok((pairwise_sum(buf), pairwise_sum(abs_buf)))
}

/// `T f(x)` at an arbitrary point, by direct quadrature over the cells of `f`.
pub fn evaluate_at(spec: &OperatorSpec, f: &GridFunction, x: &Point) -> Result<f64> {
    check_grid(spec, f)?;
    let support = Support::of(f);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    Ok(evaluate_with_mass(spec, &support, f.grid().spacing(), x, &mut a, &mut b)?.0)
}

/// `T f` on the grid of `f`.
pub fn apply(spec: &OperatorSpec, f: &GridFunction) -> Result<GridFunction> {
    Ok(apply_with_mass(spec, f)?.0)
}

/// `T f` together with `integral |K(x, .) f|` at each grid point (the scale of round-off).
pub fn apply_with_mass(spec: &OperatorSpec, f: &GridFunction) -> Result<(GridFunction, GridFunction)> {
    check_grid(spec, f)?;
    let grid = *f.grid();
    let support = Support::of(f);
    let h = grid.spacing();
    let (mut a, mut b) = (
        Vec::with_capacity(support.values.len()),
        Vec::with_capacity(support.values.len()),
    );
    let mut out = Vec::with_capacity(grid.len());
    let mut mass = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let (v, m) = evaluate_with_mass(spec, &support, h, &grid.point(i), &mut a, &mut b)?;
        out.push(v);
        mass.push(m);
    }
    Ok((GridFunction::new(grid, out)?, GridFunction::new(grid, mass)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{indicator, Ball, Grid};
    use crate::random;
    use proptest::prelude::*;

    #[test]
    fn spec_validation() {
        assert!(OperatorSpec::riesz(1, 0.5).is_ok());
        assert!(matches!(
            OperatorSpec::riesz(1, 0.0),
            Err(Error::NonIntegrableKernel { index: 0, .. })
        ));
        assert!(OperatorSpec::riesz(1, 1.0).is_err());
        assert!(OperatorSpec::reflected_pair(1, 0.0, 0.5, 0.5).is_ok());
        assert!(OperatorSpec::reflected_pair(1, 0.0, 0.5, 0.4).is_err());
        assert!(OperatorSpec::reflected_pair(1, 0.0, 1.0, 1e-9).is_err());
        let same = OperatorSpec::new(
            1,
            0.0,
            vec![OrthogonalMatrix::identity(1), OrthogonalMatrix::identity(1)],
            vec![0.5, 0.5],
        );
        assert!(same.is_err());
        let spec = OperatorSpec::reflected_pair(2, 0.5, 0.7, 0.8).unwrap();
        assert_eq!(OperatorSpec::from_file(&spec.to_file()).unwrap(), spec);
        // a rotation by pi/2 differs invertibly from the identity
        assert!(OperatorSpec::new(
            2,
            1.0,
            vec![
                OrthogonalMatrix::identity(2),
                OrthogonalMatrix::rotation(std::f64::consts::FRAC_PI_2)
            ],
            vec![0.5, 0.5]
        )
        .is_ok());
    }

    #[test]
    fn riesz_of_interval_at_origin() {
        let g = Grid::new(1, 4.0, 2048).unwrap();
        let f = indicator(&g, &Ball::interval(0.0, 1.0).unwrap()).unwrap();
        let spec = OperatorSpec::riesz(1, 0.5).unwrap();
        let v = evaluate_at(&spec, &f, &[0.0, 0.0]).unwrap();
        assert!((v / 4.0 - 1.0).abs() < 0.03, "{v}");
        // also at the grid point nearest the centre
        let tf = apply(&spec, &f).unwrap();
        let exact = |x: f64| 2.0 * ((1.0 + x).sqrt() + (1.0 - x).sqrt());
        let i = 1024;
        let x = g.coord(i);
        assert!((tf.values()[i] / exact(x) - 1.0).abs() < 0.01);
    }

    #[test]
    fn reflected_pair_log_oracle() {
        let g = Grid::new(1, 4.0, 2048).unwrap();
        let f = GridFunction::from_fn(g, |x| if (1.0..2.0).contains(&x[0]) { 1.0 } else { 0.0 });
        let spec = OperatorSpec::reflected_pair(1, 0.0, 0.5, 0.5).unwrap();
        let v = evaluate_at(&spec, &f, &[0.0, 0.0]).unwrap();
        assert!((v / 2f64.ln() - 1.0).abs() < 0.02, "{v}");
    }

    #[test]
    fn singular_cells_match_closed_forms() {
        // I_{1/2} chi_[-1,1] at grid points near and inside the support
        let spec = OperatorSpec::riesz(1, 0.5).unwrap();
        let exact = |x: f64| {
            let s = |t: f64| 2.0 * t.abs().sqrt() * t.signum();
            s(1.0 - x) - s(-1.0 - x)
        };
        for n in [256usize, 1024] {
            let g = Grid::new(1, 4.0, n).unwrap();
            let f = indicator(&g, &Ball::interval(0.0, 1.0).unwrap()).unwrap();
            let tf = apply(&spec, &f).unwrap();
            for (i, v) in tf.values().iter().enumerate() {
                let x = g.coord(i);
                // midpoint cells next to the singular ones leave an O(h^{1/2}) error
                assert!(
                    (v - exact(x)).abs() < 2e-3 * exact(x).abs().max(1.0),
                    "x={x} {v} {}",
                    exact(x)
                );
            }
        }
    }

    #[test]
    fn two_dimensional_singular_rule() {
        // I_1 of the unit disk indicator at its centre is 2 pi
        let g = Grid::new(2, 2.0, 64).unwrap();
        let f = indicator(&g, &Ball::new([0.0, 0.0], 1.0).unwrap()).unwrap();
        let spec = OperatorSpec::riesz(2, 1.0).unwrap();
        let v = evaluate_at(&spec, &f, &[0.0, 0.0]).unwrap();
        assert!((v / std::f64::consts::TAU - 1.0).abs() < 0.03, "{v}");
        let tf = apply(&spec, &f).unwrap();
        assert!(tf.values().iter().all(|v| v.is_finite() && *v > 0.0));
        // the general two-factor path handles coincident-cell singularities
        let pair = OperatorSpec::new(
            2,
            0.5,
            vec![
                OrthogonalMatrix::identity(2),
                OrthogonalMatrix::rotation(std::f64::consts::FRAC_PI_2),
            ],
            vec![0.7, 0.8],
        )
        .unwrap();
        let tp = apply(&pair, &f).unwrap();
        assert!(tp.values().iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn riesz_path_is_the_general_path() {
        let g = Grid::new(1, 4.0, 128).unwrap();
        let f = random::smooth_signed(&g, &mut random::seeded(3));
        let a = OperatorSpec::riesz(1, 0.3).unwrap();
        let b = OperatorSpec::new(1, 0.3, vec![OrthogonalMatrix::identity(1)], vec![0.7]).unwrap();
        assert_eq!(apply(&a, &f).unwrap(), apply(&b, &f).unwrap());
    }

    #[test]
    fn even_input_gives_even_output() {
        let g = Grid::new(1, 4.0, 256).unwrap();
        let f = GridFunction::from_fn(g, |x| (-x[0] * x[0]).exp() * (1.0 + x[0] * x[0]));
        let spec = OperatorSpec::reflected_pair(1, 0.25, 0.3, 0.45).unwrap();
        let tf = apply(&spec, &f).unwrap();
        let v = tf.values();
        for i in 0..v.len() {
            assert!((v[i] - v[v.len() - 1 - i]).abs() <= 1e-9 * v[i].abs());
        }
    }

    #[test]
    fn riesz_of_zero_is_zero() {
        let g = Grid::new(1, 2.0, 64).unwrap();
        let tf = apply(&OperatorSpec::riesz(1, 0.5).unwrap(), &GridFunction::zeros(g)).unwrap();
        assert!(tf.is_zero());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn linear_and_positive(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0, alpha in 0.05f64..0.95) {
            let g = Grid::new(1, 4.0, 128).unwrap();
            let mut rng = random::seeded(seed);
            let f = random::smooth_signed(&g, &mut rng);
            let k = random::rough_nonneg(&g, &mut rng);
            let spec = OperatorSpec::reflected_pair(1, alpha, 0.6 * (1.0 - alpha), 0.4 * (1.0 - alpha)).unwrap();
            let combo = f.axpby(a, &k, b).unwrap();
            let lhs = apply(&spec, &combo).unwrap();
            let (tf, mf) = apply_with_mass(&spec, &f).unwrap();
            let (tk, mk) = apply_with_mass(&spec, &k).unwrap();
            for i in 0..g.len() {
                let rhs = a * tf.values()[i] + b * tk.values()[i];
                let scale = a.abs() * mf.values()[i] + b.abs() * mk.values()[i];
                prop_assert!((lhs.values()[i] - rhs).abs() <= 1e-10 * scale.max(1e-300));
                prop_assert!(tk.values()[i] >= 0.0);
            }
        }
    }
}
