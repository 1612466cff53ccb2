mod common;

use std::f64::consts::PI;

use common::lob_quadrature;
use hyperideal::lob::lob;

#[test]
fn quadrature_reproduces_closed_forms() {
    // Л(π/4) is half of Catalan's constant; Л(π/2) = Л(π) = 0.
    assert!((2.0 * lob_quadrature(PI / 4.0) - 0.915_965_594_177_219).abs() < 1e-14);
    assert!(lob_quadrature(PI / 2.0).abs() < 1e-14);
    assert!(lob_quadrature(PI).abs() < 1e-14);
}

#[test]
fn series_matches_quadrature() {
    for k in 0..=200 {
        let x = PI * k as f64 / 200.0;
        let err = (lob(x).unwrap() - lob_quadrature(x)).abs();
        assert!(err <= 1e-12, "x = {x}: {err:e}");
    }
}

#[test]
fn quadrature_with_shifted_arguments() {
    // Periodicity and oddness of the series against the oracle on [0, π].
    for &x in &[0.3, 1.1, 2.0, 2.9] {
        let q = lob_quadrature(x);
        assert!((lob(x + PI).unwrap() - q).abs() < 1e-12);
        assert!((lob(x - 3.0 * PI).unwrap() - q).abs() < 1e-12);
        assert!((lob(-x).unwrap() + q).abs() < 1e-12);
    }
}
