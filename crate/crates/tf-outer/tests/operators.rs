use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tf_outer::embeddings::{CellAxis, SequenceFunction, StoppingSequence};
use tf_outer::fourier::{Spectral, ZGrid};
use tf_outer::geometry::TfGrid;
use tf_outer::operators::*;
use tf_outer::wavepackets::{bump, Generators};

type C = Complex64;

fn spec() -> Spectral {
    Spectral::new(ZGrid::new(-8.0, 16.0, 128).unwrap())
}

fn random_f(spec: &Spectral, seed: u64) -> Vec<C> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64, f64)> = (0..4).map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(-4.0..4.0), rng.gen_range(0.5..2.0))).collect();
    spec.grid
        .points()
        .iter()
        .map(|&z| coeffs.iter().map(|&(x0, w, s)| C::from_polar((-(z - x0) * (z - x0) / s).exp(), w * z)).sum())
        .collect()
}

/// Band-limited `f` with modes `lo..=hi` (signed indices).
fn band_f(spec: &Spectral, lo: i64, hi: i64) -> Vec<C> {
    let g = spec.grid;
    let w = g.freq_step();
    g.points()
        .iter()
        .map(|&z| (lo..=hi).map(|m| C::from_polar(1.0 / (1.0 + (m as f64).abs()), w * m as f64 * z)).sum())
        .collect()
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn segment_projection_is_idempotent() {
    let s = spec();
    let f = random_f(&s, 1);
    let p = multiplier_segment(&f, &s, -1.3, 2.1).unwrap();
    let pp = multiplier_segment(&p.values, &s, -1.3, 2.1).unwrap();
    assert!(max_diff(&p.values, &pp.values) < 1e-12);
    assert!(!p.reversed);
}

#[test]
fn segment_keeps_an_inner_band() {
    let s = spec();
    let w = s.grid.freq_step();
    let f = band_f(&s, -3, 5);
    let p = multiplier_segment(&f, &s, -3.5 * w, 5.5 * w).unwrap();
    assert!(max_diff(&p.values, &f) < 1e-12);
    let p = multiplier_segment(&f, &s, 6.5 * w, f64::INFINITY).unwrap();
    assert!(p.values.iter().all(|v| v.norm() < 1e-12));
}

#[test]
fn degenerate_segments() {
    let s = spec();
    let f = random_f(&s, 2);
    let p = multiplier_segment(&f, &s, 0.7, 0.7).unwrap();
    assert!(p.values.iter().all(|v| v.norm() == 0.0) && !p.reversed);
    let p = multiplier_segment(&f, &s, 1.0, 0.0).unwrap();
    assert!(p.values.iter().all(|v| v.norm() == 0.0) && p.reversed);
    assert!(multiplier_segment(&f, &s, f64::NAN, 0.0).is_err());
    assert!(multiplier_segment(&f[..10], &s, 0.0, 1.0).is_err());
}

#[test]
fn segment_matches_mode_sum() {
    let s = spec();
    let g = s.grid;
    let f = random_f(&s, 3);
    let (cm, cp) = (-0.9, 1.7);
    let fh: Vec<C> = (0..g.n)
        .map(|m| (0..g.n).map(|j| f[j] * C::from_polar(g.dz, -g.freq(m) * g.point(j))).sum())
        .collect();
    let p = multiplier_segment(&f, &s, cm, cp).unwrap();
    for j in [0, 17, 64, 100] {
        let z = g.point(j);
        let want: C = (0..g.n)
            .filter(|&m| g.freq(m) > cm && g.freq(m) < cp)
            .map(|m| fh[m] * C::from_polar(1.0, g.freq(m) * z))
            .sum::<C>()
            / g.length();
        assert!((p.values[j] - want).norm() < 1e-10);
    }
}

#[test]
fn endpoint_bins_get_half_weight() {
    assert_eq!(segment_mask(1.0, 1.0, 2.0, 1e-9), 0.5);
    assert_eq!(segment_mask(1.5, 1.0, 2.0, 1e-9), 1.0);
    assert_eq!(segment_mask(2.5, 1.0, 2.0, 1e-9), 0.0);
    assert_eq!(segment_mask(1.5, 2.0, 1.0, 1e-9), 0.0);
    assert_eq!(segment_mask(1e300, 0.0, f64::INFINITY, 1e-9), 1.0);
}

#[test]
fn carleson_with_constant_levels() {
    let s = spec();
    let w = s.grid.freq_step();
    let f = band_f(&s, -4, 4);
    let axis = CellAxis::uniform(-8.0, 8.0, 4).unwrap();
    let below = StoppingSequence::constant(axis.clone(), &[-10.0 * w]).unwrap();
    let above = StoppingSequence::constant(axis.clone(), &[10.0 * w]).unwrap();
    assert!(max_diff(&carleson(&f, &s, &below).unwrap(), &f) < 1e-12);
    assert!(carleson(&f, &s, &above).unwrap().iter().all(|v| v.norm() < 1e-12));
    let two = StoppingSequence::constant(axis, &[0.0, 1.0]).unwrap();
    assert!(carleson(&f, &s, &two).is_err());
}

#[test]
fn carleson_uses_the_level_of_each_cell() {
    let s = spec();
    let f = random_f(&s, 4);
    let axis = CellAxis::uniform(-8.0, 8.0, 4).unwrap();
    let levels = vec![-1.0, 0.3, 2.0, -0.2];
    let c = StoppingSequence::new(axis.clone(), 1, levels.clone()).unwrap();
    let out = carleson(&f, &s, &c).unwrap();
    for (cell, &lv) in levels.iter().enumerate() {
        let p = multiplier_segment(&f, &s, lv, f64::INFINITY).unwrap();
        for j in 0..s.grid.n {
            if axis.cell_of(s.grid.point(j)) == Some(cell) {
                assert!((out[j] - p.values[j]).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn var_carleson_single_jump() {
    let s = spec();
    let f = random_f(&s, 5);
    let axis = CellAxis::uniform(-8.0, 8.0, 4).unwrap();
    let c = StoppingSequence::new(axis, 2, vec![-1.0, 0.5, 0.0, 0.1, 0.3, 2.0, -2.0, 2.0]).unwrap();
    let c1 = StoppingSequence::new(c.axis().clone(), 1, (0..4).map(|i| c.level(i, 0)).collect()).unwrap();
    let c2 = StoppingSequence::new(c.axis().clone(), 1, (0..4).map(|i| c.level(i, 1)).collect()).unwrap();
    let d: Vec<f64> = carleson(&f, &s, &c2)
        .unwrap()
        .iter()
        .zip(carleson(&f, &s, &c1).unwrap())
        .map(|(a, b)| (a - b).norm())
        .collect();
    for r in [1.5, 2.0, 4.0, f64::INFINITY] {
        let v = var_carleson(&f, &s, &c, r).unwrap();
        for (x, y) in v.iter().zip(&d) {
            assert!((x - y).abs() < 1e-12, "r={r}");
        }
    }
}

#[test]
fn var_carleson_decreases_in_r() {
    let s = spec();
    let f = random_f(&s, 6);
    let axis = CellAxis::uniform(-8.0, 8.0, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut levels = Vec::new();
    for _ in 0..8 {
        let mut row: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
        row.sort_by(f64::total_cmp);
        levels.extend(row);
    }
    let c = StoppingSequence::new(axis, 4, levels).unwrap();
    let rs = [1.2, 2.0, 3.0, 6.0, f64::INFINITY];
    let vals: Vec<Vec<f64>> = rs.iter().map(|&r| var_carleson(&f, &s, &c, r).unwrap()).collect();
    for w in vals.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            assert!(*b <= a + 1e-12);
        }
    }
    assert!(var_carleson(&f, &s, &c, 1.0).is_err());
}

#[test]
fn linear_form_trivial_and_direct() {
    let s = spec();
    let f = random_f(&s, 7);
    let axis = CellAxis::uniform(-8.0, 8.0, 4).unwrap();
    let c = StoppingSequence::new(axis.clone(), 1, vec![-0.5, 0.1, 0.4, 1.0]).unwrap();
    let zero = SequenceFunction::zero(axis.clone(), 1, 1.5).unwrap();
    assert_eq!(linear_form(&f, &s, &zero, &c).unwrap(), C::new(0.0, 0.0));
    let zf = vec![C::new(0.0, 0.0); s.grid.n];
    let a = SequenceFunction::new(axis.clone(), 1, vec![1.0, -2.0, 0.5, 3.0], 1.5).unwrap();
    assert_eq!(linear_form(&zf, &s, &a, &c).unwrap(), C::new(0.0, 0.0));

    let cf = carleson(&f, &s, &c).unwrap();
    let want: C = (0..s.grid.n)
        .filter_map(|j| axis.cell_of(s.grid.point(j)).map(|cell| cf[j] * a.value(cell, 0) * s.grid.dz))
        .sum();
    assert!((linear_form(&f, &s, &a, &c).unwrap() - want).norm() < 1e-12);

    let gen = Generators::default_geometry().unwrap();
    let grid = TfGrid::adapted((-8.0, 8.0, 8), 0.0, (0.05, 1.75, 4), (0.5, 4.0, 3)).unwrap();
    let (l, r) = bilinear_forms(&zf, &a, &c, &s, &grid, &gen).unwrap();
    assert_eq!((l, r), (C::new(0.0, 0.0), C::new(0.0, 0.0)));
}

#[test]
fn mollifier_has_unit_mass() {
    let n = 200_000;
    let du = 2.0 / n as f64;
    let mass: f64 = (0..n).map(|i| bump(-1.0 + (i as f64 + 0.5) * du) * du).sum();
    assert!((mass - 0.443_993_816_168_079_4).abs() < 1e-12, "{mass}");
    let mass: f64 = (0..n).map(|i| upsilon_mollifier(-1.0 + (i as f64 + 0.5) * du) * du).sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn mollify_fixes_constants_and_smooths() {
    let s = spec();
    let h = vec![C::new(2.5, -1.0); s.grid.n];
    for t in [0.01, 0.3, 3.0] {
        assert!(max_diff(&mollify(&h, &s, t), &h) < 1e-12);
    }
    let ladder = TruncationLadder::geometric(0.2, 4.0, 8, 0.0).unwrap();
    let v = var_truncation(&h, &s, &ladder, 3.0, false).unwrap();
    assert!(v.iter().all(|&x| x < 1e-12));
}

#[test]
fn var_truncation_exponent_checks() {
    let s = spec();
    let h = random_f(&s, 8);
    let ladder = TruncationLadder::geometric(0.2, 4.0, 6, 0.0).unwrap();
    assert!(var_truncation(&h, &s, &ladder, 2.0, false).is_err());
    assert!(var_truncation(&h, &s, &ladder, 2.0, true).is_ok());
    assert!(var_truncation(&h, &s, &ladder, 0.5, true).is_err());
    let v3 = var_truncation(&h, &s, &ladder, 3.0, false).unwrap();
    let v6 = var_truncation(&h, &s, &ladder, 6.0, false).unwrap();
    for (a, b) in v3.iter().zip(&v6) {
        assert!(b <= &(a + 1e-12));
    }
    let high = var_truncation(&h, &s, &ladder.above(1.0), 3.0, false).unwrap();
    for (a, b) in v3.iter().zip(&high) {
        assert!(b <= &(a + 1e-12));
    }
}

#[test]
fn ladder_validation() {
    assert!(TruncationLadder::new(vec![], 0.0).is_err());
    assert!(TruncationLadder::new(vec![1.0, 1.0], 0.0).is_err());
    assert!(TruncationLadder::new(vec![1.0, 2.0], -1.0).is_err());
    assert!(TruncationLadder::new(vec![0.5; MAX_LADDER + 1], 0.0).is_err());
    let l = TruncationLadder::geometric(0.5, 8.0, 5, 0.0).unwrap();
    assert!((l.scales[0] - 0.5).abs() < 1e-15 && (l.scales[4] - 8.0).abs() < 1e-12);
    assert_eq!(l.above(1.0).scales.len(), 3);
}

/// Every increasing subsequence, summed left to right from zero.
fn exhaustive_variation(v: &[C], r: f64) -> f64 {
    let n = v.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let mut s = 0.0f64;
        for w in idx.windows(2) {
            let d = (v[w[1]] - v[w[0]]).norm();
            s = if r.is_infinite() { s.max(d) } else { s + d.powf(r) };
        }
        best = best.max(s);
    }
    if r.is_infinite() {
        best
    } else {
        best.powf(1.0 / r)
    }
}

#[test]
fn variation_examples() {
    assert_eq!(r_variation(&[], 2.0), 0.0);
    assert_eq!(r_variation(&[C::new(1.0, 0.0)], 2.0), 0.0);
    let mono: Vec<C> = [0.0, 0.5, 1.25, 3.0].iter().map(|&x| C::new(x, 0.0)).collect();
    assert_eq!(r_variation(&mono, 1.0), 3.0);
    let zigzag: Vec<C> = [0.0, 1.0, 0.0, 1.0].iter().map(|&x| C::new(x, 0.0)).collect();
    assert_eq!(r_variation(&zigzag, 2.0), 3f64.sqrt());
    assert_eq!(r_variation(&zigzag, f64::INFINITY), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn variation_dp_equals_exhaustive(
        pts in proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 2..=10),
        r in prop_oneof![Just(1.0), Just(2.5), Just(3.0), Just(7.0), Just(f64::INFINITY)],
    ) {
        let v: Vec<C> = pts.iter().map(|&(a, b)| C::new(a, b)).collect();
        prop_assert_eq!(r_variation(&v, r).to_bits(), exhaustive_variation(&v, r).to_bits());
    }

    #[test]
    fn projection_is_linear(seed in 0u64..1000, k in -3i32..3) {
        let s = spec();
        let f = random_f(&s, seed);
        let lam = 2f64.powi(k);
        let scaled: Vec<C> = f.iter().map(|v| v * lam).collect();
        let a = multiplier_segment(&f, &s, -0.4, 1.1).unwrap();
        let b = multiplier_segment(&scaled, &s, -0.4, 1.1).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert_eq!(x * lam, *y);
        }
    }
}
