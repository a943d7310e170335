#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tf_outer::embeddings::EmbeddedField;
use tf_outer::geometry::{GeometryParams, Strip, Tent, TfGrid};

/// Grid resolving tents of scale about one around the origin.
pub fn small_grid() -> TfGrid {
    TfGrid::adapted((-4.0, 4.0, 32), 0.0, (-1.2, 1.2, 24), (0.0625, 4.0, 12)).unwrap()
}

/// `T(0,0,s)` and seven others: equal-scale shifts up in `x` and `ξ`,
/// three half-scale tents and a spatially disjoint double.
pub fn eight_tents(s: f64) -> Vec<Tent> {
    vec![
        Tent::new(0.0, 0.0, s),
        Tent::new(0.5 * s, 0.0, s),
        Tent::new(0.0, 0.5 / s, s),
        Tent::new(0.5 * s, 0.5 / s, s),
        Tent::new(0.0, 0.0, 0.5 * s),
        Tent::new(-0.5 * s, 0.0, 0.5 * s),
        Tent::new(0.5 * s, 0.0, 0.5 * s),
        Tent::new(3.0 * s, 0.0, 2.0 * s),
    ]
}

pub fn indicator(grid: &TfGrid, tent: &Tent, g: &GeometryParams) -> EmbeddedField {
    let mut v = vec![0.0; grid.len()];
    for (i, _) in grid.tent_points(tent, g) {
        v[i] = 1.0;
    }
    EmbeddedField::from_real(grid, v)
}

/// Random nonnegative field with a few bumps in `(y, θ, log t)`.
pub fn random_field(grid: &TfGrid, seed: u64) -> EmbeddedField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..1.0), rng.gen_range(0.2..1.0)))
        .collect();
    let v = (0..grid.len())
        .map(|i| {
            let p = grid.point(i);
            let th = p.t * p.eta;
            bumps
                .iter()
                .map(|&(y0, th0, lt0, amp)| {
                    amp * (-(p.y - y0).powi(2) - 4.0 * (th - th0).powi(2) - (p.t.ln() - lt0).powi(2)).exp()
                })
                .sum::<f64>()
        })
        .collect();
    EmbeddedField::from_real(grid, v)
}

pub fn random_tents(rng: &mut ChaCha8Rng, n: usize) -> Vec<Tent> {
    (0..n)
        .map(|_| {
            let s = 2f64.powi(rng.gen_range(-2..=1));
            Tent::new(rng.gen_range(-3.0..3.0), rng.gen_range(-0.8..0.8) / s, s)
        })
        .collect()
}

pub fn random_strips(rng: &mut ChaCha8Rng, n: usize) -> Vec<Strip> {
    (0..n).map(|_| Strip::new(rng.gen_range(-3.0..3.0), 2f64.powi(rng.gen_range(-1..=1)))).collect()
}
