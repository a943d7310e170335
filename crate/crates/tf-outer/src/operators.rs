//! Multiplier-side evaluation of the Carleson-type operators and the
//! variational truncations.

use num_complex::Complex64;

use crate::embeddings::{embed_energy, embed_var_mass_linear, StoppingSequence, SequenceFunction};
use crate::error::{Error, Result};
use crate::fourier::Spectral;
use crate::geometry::TfGrid;
use crate::par;
use crate::wavepackets::{bump, Generators};

type C64 = Complex64;

/// Output of a frequency-segment projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub values: Vec<C64>,
    /// Set when the endpoints were reversed (`c⁻ > c⁺`).
    pub reversed: bool,
}

/// Weight of DFT bin `ξ` under the sharp cutoff to `(c⁻, c⁺)`; bins on an
/// endpoint get one half.
pub fn segment_mask(xi: f64, c_minus: f64, c_plus: f64, tol: f64) -> f64 {
    if c_minus >= c_plus {
        return 0.0;
    }
    let at = |c: f64| c.is_finite() && (xi - c).abs() <= tol;
    if at(c_minus) || at(c_plus) {
        return 0.5;
    }
    if xi > c_minus && xi < c_plus {
        1.0
    } else {
        0.0
    }
}

fn check_f(f: &[C64], spec: &Spectral) -> Result<()> {
    if f.len() != spec.grid.n {
        return Err(Error::Grid(format!("function has {} samples, DFT length is {}", f.len(), spec.grid.n)));
    }
    Ok(())
}

fn project_hat(fh: &[C64], spec: &Spectral, c_minus: f64, c_plus: f64) -> Vec<C64> {
    let tol = 1e-9 * spec.grid.freq_step();
    fh.iter()
        .enumerate()
        .map(|(m, v)| v * segment_mask(spec.grid.freq(m), c_minus, c_plus, tol))
        .collect()
}

/// `z ↦ (2π)⁻¹ ∫_{c⁻}^{c⁺} f̂(ξ) e^{iξz} dξ` on the periodic grid.
pub fn multiplier_segment(f: &[C64], spec: &Spectral, c_minus: f64, c_plus: f64) -> Result<Segment> {
    check_f(f, spec)?;
    if c_minus.is_nan() || c_plus.is_nan() {
        return Err(Error::Argument("segment endpoints must not be NaN".into()));
    }
    if c_minus >= c_plus {
        return Ok(Segment { values: vec![C64::new(0.0, 0.0); f.len()], reversed: c_minus > c_plus });
    }
    let fh = spec.forward(f);
    Ok(Segment { values: spec.inverse(&project_hat(&fh, spec, c_minus, c_plus)), reversed: false })
}

/// Evaluates `P_{lo(z), hi(z)} f(z)` for piecewise-constant endpoints,
/// computing one projection per distinct endpoint pair.
fn per_cell_projection(
    fh: &[C64],
    spec: &Spectral,
    cells: &[Option<usize>],
    endpoints: impl Fn(usize) -> (f64, f64),
    n_cells: usize,
) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); spec.grid.n];
    let mut pairs: Vec<(u64, u64)> = (0..n_cells).map(&endpoints).map(|(a, b)| (a.to_bits(), b.to_bits())).collect();
    pairs.sort_unstable();
    pairs.dedup();
    let projected = par::map_slice(&pairs, |&(a, b)| {
        let (a, b) = (f64::from_bits(a), f64::from_bits(b));
        if a >= b {
            None
        } else {
            Some(spec.inverse(&project_hat(fh, spec, a, b)))
        }
    });
    for (j, cell) in cells.iter().enumerate() {
        if let Some(cell) = cell {
            let (a, b) = endpoints(*cell);
            let key = (a.to_bits(), b.to_bits());
            let idx = pairs.binary_search(&key).unwrap();
            if let Some(v) = &projected[idx] {
                out[j] = v[j];
            }
        }
    }
    out
}

fn sample_cells(c: &StoppingSequence, spec: &Spectral) -> Vec<Option<usize>> {
    (0..spec.grid.n).map(|j| c.axis().cell_of(spec.grid.point(j))).collect()
}

/// `C_c f(z) = P_{c(z), +∞} f(z)`. Points outside the cells of `c` map to 0.
pub fn carleson(f: &[C64], spec: &Spectral, c: &StoppingSequence) -> Result<Vec<C64>> {
    check_f(f, spec)?;
    if c.k() != 1 {
        return Err(Error::Argument(format!("Carleson operator takes one level per cell, got {}", c.k())));
    }
    let fh = spec.forward(f);
    let cells = sample_cells(c, spec);
    Ok(per_cell_projection(&fh, spec, &cells, |i| (c.level(i, 0), f64::INFINITY), c.axis().n_cells()))
}

/// `(Σ_k |C_{c_{k+1}} f - C_{c_k} f|^r)^{1/r}` per sample (max for `r = ∞`).
pub fn var_carleson(f: &[C64], spec: &Spectral, c: &StoppingSequence, r: f64) -> Result<Vec<f64>> {
    check_f(f, spec)?;
    if !(r > 1.0) {
        return Err(Error::Argument(format!("variation exponent must exceed 1, got {r}")));
    }
    if c.k() < 2 {
        return Err(Error::Argument("variational Carleson operator needs at least two levels".into()));
    }
    let fh = spec.forward(f);
    let cells = sample_cells(c, spec);
    let n_cells = c.axis().n_cells();
    let mut acc = vec![0.0f64; spec.grid.n];
    for k in 0..c.k() - 1 {
        // C_{c_{k+1}} - C_{c_k} = -P_{c_k, c_{k+1}}.
        let jump = per_cell_projection(&fh, spec, &cells, |i| (c.level(i, k), c.level(i, k + 1)), n_cells);
        for (a, v) in acc.iter_mut().zip(&jump) {
            if r.is_infinite() {
                *a = a.max(v.norm());
            } else {
                *a += v.norm().powf(r);
            }
        }
    }
    if r.is_finite() {
        for a in acc.iter_mut() {
            *a = a.powf(1.0 / r);
        }
    }
    for (a, cell) in acc.iter_mut().zip(&cells) {
        if cell.is_none() {
            *a = 0.0;
        }
    }
    Ok(acc)
}

/// `∫ Σ_k a_k(z) P_{c_k(z), c_{k+1}(z)} f(z) dz` with `c_{K+1} = +∞`.
pub fn linear_form(f: &[C64], spec: &Spectral, a: &SequenceFunction, c: &StoppingSequence) -> Result<C64> {
    check_f(f, spec)?;
    if a.axis() != c.axis() || a.k() != c.k() {
        return Err(Error::Argument("a and c must share cells and channel count".into()));
    }
    let fh = spec.forward(f);
    let cells = sample_cells(c, spec);
    let n_cells = c.axis().n_cells();
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..c.k() {
        let seg = per_cell_projection(&fh, spec, &cells, |i| c.segment(i, k), n_cells);
        for (j, cell) in cells.iter().enumerate() {
            if let Some(cell) = cell {
                acc += seg[j] * a.value(*cell, k);
            }
        }
    }
    Ok(acc * spec.grid.dz)
}

/// Both sides of the wave-packet duality identity: the linear form and
/// `∭ F·𝔸_𝔠 dy dη dt` on the grid.
pub fn bilinear_forms(
    f: &[C64],
    a: &SequenceFunction,
    c: &StoppingSequence,
    spec: &Spectral,
    grid: &TfGrid,
    gen: &Generators,
) -> Result<(C64, C64)> {
    let lhs = linear_form(f, spec, a, c)?;
    let ff = embed_energy(f, spec, grid, gen)?;
    let aa = embed_var_mass_linear(a, c, spec, grid, gen)?;
    Ok((lhs, ff.pairing(&aa)?))
}

/// Increasing mollifier scales above a cutoff `σ`, with `Υ` a normalized bump.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TruncationLadder {
    pub scales: Vec<f64>,
    pub sigma: f64,
}

pub const MAX_LADDER: usize = 256;

impl TruncationLadder {
    pub fn new(scales: Vec<f64>, sigma: f64) -> Result<Self> {
        let l = Self { scales, sigma };
        l.validate()?;
        Ok(l)
    }

    /// `n` log-spaced scales on `[t_lo, t_hi]`.
    pub fn geometric(t_lo: f64, t_hi: f64, n: usize, sigma: f64) -> Result<Self> {
        if n < 2 || !(t_lo > 0.0 && t_hi > t_lo) {
            return Err(Error::Argument("geometric ladder needs n >= 2 and 0 < t_lo < t_hi".into()));
        }
        let q = (t_hi / t_lo).ln() / (n - 1) as f64;
        Self::new((0..n).map(|i| t_lo * (q * i as f64).exp()).collect(), sigma)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() || self.scales.len() > MAX_LADDER {
            return Err(Error::Argument(format!("ladder length must be in 1..={MAX_LADDER}, got {}", self.scales.len())));
        }
        if !(self.sigma >= 0.0) || self.scales.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::Argument("ladder needs sigma >= 0 and positive scales".into()));
        }
        if self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("ladder scales must increase strictly".into()));
        }
        Ok(())
    }

    /// Drop scales `≤ σ'`.
    pub fn above(&self, sigma: f64) -> Self {
        Self { scales: self.scales.iter().copied().filter(|&t| t > sigma).collect(), sigma: sigma.max(self.sigma) }
    }

    fn active(&self) -> Vec<f64> {
        self.scales.iter().copied().filter(|&t| t > self.sigma).collect()
    }
}

/// `Υ(u) ∝ bump(u)` with unit integral.
pub fn upsilon_mollifier(u: f64) -> f64 {
    const NORM: f64 = 0.443_993_816_168_079_4;
    bump(u) / NORM
}

/// `H * Υ_t` on the periodic grid; the sampled kernel is renormalized to unit mass.
pub fn mollify(h: &[C64], spec: &Spectral, t: f64) -> Vec<C64> {
    let g = spec.grid;
    let mut ker = vec![0.0; g.n];
    let mut total = 0.0;
    for (j, k) in ker.iter_mut().enumerate() {
        let u = g.dz * g.signed_index(j) as f64;
        *k = upsilon_mollifier(u / t) / t;
        total += *k;
    }
    if total == 0.0 {
        ker[0] = 1.0;
        total = 1.0;
    }
    let kc: Vec<C64> = ker.iter().map(|&v| C64::new(v / total, 0.0)).collect();
    let mut kh = kc;
    let mut hh = h.to_vec();
    let planner_fwd = rustfft::FftPlanner::<f64>::new().plan_fft_forward(g.n);
    let planner_inv = rustfft::FftPlanner::<f64>::new().plan_fft_inverse(g.n);
    planner_fwd.process(&mut kh);
    planner_fwd.process(&mut hh);
    for (a, b) in hh.iter_mut().zip(&kh) {
        *a *= b / g.n as f64;
    }
    planner_inv.process(&mut hh);
    hh
}

/// Exact `r`-variation over increasing subsequences, by dynamic programming.
pub fn r_variation(v: &[C64], r: f64) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    if r.is_infinite() {
        let mut m = 0.0f64;
        for j in 1..n {
            for i in 0..j {
                m = m.max((v[j] - v[i]).norm());
            }
        }
        return m;
    }
    let mut best = vec![0.0f64; n];
    let mut top = 0.0f64;
    for j in 1..n {
        let mut b = 0.0f64;
        for i in 0..j {
            let cand = best[i] + (v[j] - v[i]).norm().powf(r);
            if cand > b {
                b = cand;
            }
        }
        best[j] = b;
        top = top.max(b);
    }
    top.powf(1.0 / r)
}

/// `𝒱^r_σ H(z)`: the `r`-variation of `k ↦ H * Υ_{t_k}(z)` over the ladder.
pub fn var_truncation(h: &[C64], spec: &Spectral, ladder: &TruncationLadder, r: f64, allow_small_r: bool) -> Result<Vec<f64>> {
    check_f(h, spec)?;
    ladder.validate()?;
    if !(r > 2.0) && !allow_small_r {
        return Err(Error::Argument(format!("variation exponent must exceed 2, got {r}")));
    }
    if !(r >= 1.0) {
        return Err(Error::Argument(format!("variation exponent must be at least 1, got {r}")));
    }
    let scales = ladder.active();
    let conv: Vec<Vec<C64>> = par::map_slice(&scales, |&t| mollify(h, spec, t));
    Ok(par::map_range(spec.grid.n, |j| {
        let seq: Vec<C64> = conv.iter().map(|c| c[j]).collect();
        r_variation(&seq, r)
    }))
}
