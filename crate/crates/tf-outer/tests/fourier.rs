use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use tf_outer::fourier::{Spectral, ZGrid};

type C = Complex64;

fn direct_forward(g: &ZGrid, f: &[C]) -> Vec<C> {
    (0..g.n)
        .map(|m| {
            let xi = g.freq(m);
            f.iter().enumerate().map(|(j, v)| v * C::from_polar(g.dz, -xi * g.point(j))).sum()
        })
        .collect()
}

#[test]
fn grid_rejects_degenerate_input() {
    assert!(ZGrid::new(0.0, 1.0, 1).is_err());
    assert!(ZGrid::new(0.0, 0.0, 8).is_err());
    assert!(ZGrid::new(f64::NAN, 1.0, 8).is_err());
}

#[test]
fn frequencies_are_signed() {
    let g = ZGrid::new(0.0, 2.0 * PI, 8).unwrap();
    let idx: Vec<i64> = (0..8).map(|m| g.signed_index(m)).collect();
    assert_eq!(idx, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    assert_eq!(g.freq(5), -3.0);
    assert_eq!(g.wrap_index(2.0 * PI), 0);
    assert_eq!(g.wrap_index(-g.dz), 7);
}

#[test]
fn forward_matches_direct_sum() {
    let g = ZGrid::new(-3.0, 7.0, 48).unwrap();
    let spec = Spectral::new(g);
    let f: Vec<C> = g.points().iter().map(|&z| C::new((z * 0.7).sin(), (z * z * 0.1).cos())).collect();
    let fast = spec.forward(&f);
    let slow = direct_forward(&g, &f);
    for (a, b) in fast.iter().zip(&slow) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn gaussian_transform_matches_closed_form() {
    let g = ZGrid::new(-20.0, 40.0, 512).unwrap();
    let spec = Spectral::new(g);
    let f: Vec<f64> = g.points().iter().map(|z| (-z * z).exp()).collect();
    let fh = spec.forward_real(&f);
    for m in 0..g.n {
        let xi = g.freq(m);
        let exact = PI.sqrt() * (-xi * xi / 4.0).exp();
        assert!((fh[m].re - exact).abs() < 1e-12 && fh[m].im.abs() < 1e-12);
    }
}

#[test]
fn eval_at_agrees_with_inverse_on_nodes() {
    let g = ZGrid::new(1.0, 5.0, 32).unwrap();
    let spec = Spectral::new(g);
    let fh: Vec<C> = (0..32).map(|m| C::new(1.0 / (1.0 + m as f64), (m as f64).sin())).collect();
    let f = spec.inverse(&fh);
    for j in [0, 5, 31] {
        assert!((spec.eval_at(&fh, g.point(j)) - f[j]).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn roundtrip(vals in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16), z0 in -5.0..5.0f64, len in 0.5..20.0f64) {
        let spec = Spectral::new(ZGrid::new(z0, len, 16).unwrap());
        let f: Vec<C> = vals.iter().map(|&(a, b)| C::new(a, b)).collect();
        let back = spec.inverse(&spec.forward(&f));
        for (a, b) in f.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}
