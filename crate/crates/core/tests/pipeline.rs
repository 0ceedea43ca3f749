//! Cross-module checks: atoms feeding norms, potentials and weights.

use std::io::Cursor;

use varharm_core::atoms::{finite_atomic_norm, hardy_moment_degree, make_atom, validate_atom, FiniteDecomposition};
use varharm_core::grid::{integrate, Ball, Grid, GridFunction, OrthogonalMatrix};
use varharm_core::lebesgue::{norm, sobolev_shift, ExponentFunction};
use varharm_core::maximal::BallFamily;
use varharm_core::potentials::{far_field_check, OperatorSpec};
use varharm_core::weights::{a1_constant, act, Weight};

fn line() -> Grid {
    Grid::new(1, 16.0, 2048).unwrap()
}

#[test]
fn atom_survives_csv_round_trip() {
    let p = ExponentFunction::from_spec(line(), "even-sym:bump:0.6:0.8").unwrap();
    let a = make_atom(Ball::interval(0.7, 0.5).unwrap(), &p, 64.0, 1, 3).unwrap();
    let mut buf = Vec::new();
    a.values.write_csv(&mut buf).unwrap();
    let back = GridFunction::read_csv(Cursor::new(buf)).unwrap();
    assert_eq!(back.values(), a.values.values());
    assert_eq!(norm(&back, &p).unwrap(), norm(&a.values, &p).unwrap());
}

#[test]
fn single_atom_has_unit_atomic_norm_and_vanishing_mean() {
    let g = line();
    let p = ExponentFunction::from_spec(g, "radial:decay:1.2:2.0").unwrap();
    let degree = hardy_moment_degree(1, 0.6);
    for (k, r) in [0.25, 1.0, 4.0].into_iter().enumerate() {
        let a = make_atom(Ball::interval(-0.5, r).unwrap(), &p, 64.0, degree, k as u64).unwrap();
        assert!(validate_atom(&a).passed());
        let mass = integrate(&a.values, None);
        let scale = integrate(&a.values.abs(), None);
        assert!(mass.abs() <= 1e-9 * scale, "mean {mass} vs {scale}");
        let d = FiniteDecomposition::single(a).unwrap();
        let atomic = finite_atomic_norm(&d, &p).unwrap();
        assert!((atomic - 1.0).abs() < 1e-6, "atomic norm {atomic}");
    }
}

#[test]
fn riesz_image_of_mean_zero_atom_decays_one_order_faster() {
    let p = ExponentFunction::constant(line(), 1.3).unwrap();
    let a = make_atom(Ball::interval(0.0, 0.25).unwrap(), &p, 64.0, 0, 11).unwrap();
    let spec = OperatorSpec::riesz(1, 0.5).unwrap();
    let radii: Vec<f64> = (0..10).map(|k| 1.0 * 1.4f64.powi(k)).collect();
    let rep = far_field_check(&spec, &a, &radii).unwrap();
    assert!((rep.predicted_slope + 1.5).abs() < 1e-12);
    assert!((rep.slope - rep.predicted_slope).abs() < 0.15, "slope {}", rep.slope);
}

#[test]
fn reflection_preserves_a1_constant() {
    let g = Grid::new(1, 8.0, 512).unwrap();
    let w = Weight::new(GridFunction::from_fn(g, |x| {
        (x[0] - 0.5).abs().max(g.spacing() / 2.0).powf(-0.4)
    }))
    .unwrap();
    let flipped = act(&w, &OrthogonalMatrix::negation(1)).unwrap();
    assert_ne!(flipped.values(), w.values());
    let family = BallFamily::uncentered(&g);
    let (a, b) = (
        a1_constant(&w, &family).unwrap(),
        a1_constant(&flipped, &family).unwrap(),
    );
    assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
}

#[test]
fn sobolev_shift_of_constant_exponent() {
    let p = ExponentFunction::constant(line(), 1.2).unwrap();
    let q = sobolev_shift(&p, 0.5).unwrap();
    assert!(q.values().iter().all(|v| (v - 3.0).abs() < 1e-12));
}
