//! Embedding maps from functions on the line to fields on the upper 3-space.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{Spectral, ZGrid};
use crate::geometry::{GeometryParams, TfGrid, TfPoint};
use crate::par;
use crate::wavepackets::{smooth_step, Bump, Generators, Side};

type C64 = Complex64;

/// Sorted cell boundaries on the `z` axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAxis {
    edges: Vec<f64>,
}

impl CellAxis {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("cell edges must be finite and strictly increasing (at least two)".into()));
        }
        Ok(Self { edges })
    }

    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("need at least one cell".into()));
        }
        Self::new((0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect())
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn n_cells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    /// Cell containing `z` (half-open `[lo, hi)`).
    pub fn cell_of(&self, z: f64) -> Option<usize> {
        if !(z >= self.lo() && z < self.hi()) {
            return None;
        }
        let i = self.edges.partition_point(|&e| e <= z);
        Some(i - 1)
    }
}

/// Piecewise-constant nondecreasing levels `c_1(z) ≤ … ≤ c_K(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingSequence {
    axis: CellAxis,
    k: usize,
    levels: Vec<f64>,
}

impl StoppingSequence {
    /// `levels[cell * k + channel]`; infinities are sentinels.
    pub fn new(axis: CellAxis, k: usize, levels: Vec<f64>) -> Result<Self> {
        if k == 0 || levels.len() != axis.n_cells() * k {
            return Err(Error::Argument(format!(
                "stopping sequence needs {} x {} levels, got {}",
                axis.n_cells(),
                k,
                levels.len()
            )));
        }
        if levels.iter().any(|v| v.is_nan()) {
            return Err(Error::Argument("stopping levels must not be NaN".into()));
        }
        for (cell, row) in levels.chunks(k).enumerate() {
            if row.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Argument(format!("levels not nondecreasing in cell {cell}")));
            }
        }
        Ok(Self { axis, k, levels })
    }

    pub fn constant(axis: CellAxis, row: &[f64]) -> Result<Self> {
        let levels = (0..axis.n_cells()).flat_map(|_| row.iter().copied()).collect();
        Self::new(axis, row.len(), levels)
    }

    pub fn axis(&self) -> &CellAxis {
        &self.axis
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn levels(&self, cell: usize) -> &[f64] {
        &self.levels[cell * self.k..(cell + 1) * self.k]
    }

    pub fn level(&self, cell: usize, k: usize) -> f64 {
        self.levels[cell * self.k + k]
    }

    /// Segment `[c_k, c_{k+1})` of channel `k`, with `c_{K+1} = +∞`.
    pub fn segment(&self, cell: usize, k: usize) -> (f64, f64) {
        let row = self.levels(cell);
        let upper = if k + 1 < self.k { row[k + 1] } else { f64::INFINITY };
        (row[k], upper)
    }
}

/// Piecewise-constant `z ↦ (a_k(z))_k` with channel exponent `r'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceFunction {
    axis: CellAxis,
    k: usize,
    values: Vec<f64>,
    pub r_prime: f64,
}

impl SequenceFunction {
    pub fn new(axis: CellAxis, k: usize, values: Vec<f64>, r_prime: f64) -> Result<Self> {
        if k == 0 || values.len() != axis.n_cells() * k {
            return Err(Error::Argument(format!(
                "sequence function needs {} x {} values, got {}",
                axis.n_cells(),
                k,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("sequence values must be finite".into()));
        }
        if !(r_prime >= 1.0) {
            return Err(Error::Argument(format!("channel exponent r' must be >= 1, got {r_prime}")));
        }
        Ok(Self { axis, k, values, r_prime })
    }

    pub fn zero(axis: CellAxis, k: usize, r_prime: f64) -> Result<Self> {
        let n = axis.n_cells() * k;
        Self::new(axis, k, vec![0.0; n], r_prime)
    }

    pub fn axis(&self) -> &CellAxis {
        &self.axis
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize, k: usize) -> f64 {
        self.values[cell * self.k + k]
    }

    pub fn row(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.k..(cell + 1) * self.k]
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * lambda).collect(), ..self.clone() }
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// `‖a(z)‖_{l^{r'}}` on a cell.
    pub fn channel_norm(&self, cell: usize) -> f64 {
        lr_norm(self.row(cell), self.r_prime)
    }

    /// `(∫ ‖a(z)‖_{l^{r'}}^p dz)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = (0..self.axis.n_cells()).map(|i| self.channel_norm(i).powf(p) * self.axis.width(i)).sum();
        s.powf(1.0 / p)
    }

    fn check_matches(&self, c: &StoppingSequence) -> Result<()> {
        if self.axis != c.axis {
            return Err(Error::Grid("sequence function and stopping sequence use different cells".into()));
        }
        if self.k != c.k {
            return Err(Error::Argument(format!("channel count mismatch: a has {}, c has {}", self.k, c.k)));
        }
        Ok(())
    }
}

pub(crate) fn lr_norm(v: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        return v.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    v.iter().map(|x| x.abs().powf(r)).sum::<f64>().powf(1.0 / r)
}

/// A complex field sampled on a `TfGrid`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedField {
    pub grid: TfGrid,
    pub values: Vec<C64>,
}

impl EmbeddedField {
    pub fn zeros(grid: &TfGrid) -> Self {
        Self { grid: grid.clone(), values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_real(grid: &TfGrid, v: Vec<f64>) -> Self {
        Self { grid: grid.clone(), values: v.into_iter().map(|x| C64::new(x, 0.0)).collect() }
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.values[self.grid.index(i, j, k)]
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        self.map(|v| v * lambda)
    }

    /// Zero the field on the given point indices.
    pub fn zero_on(&mut self, idx: &[usize]) {
        for &i in idx {
            self.values[i] = C64::new(0.0, 0.0);
        }
    }

    /// `∭ G·H dy dη dt` by grid quadrature.
    pub fn pairing(&self, other: &EmbeddedField) -> Result<C64> {
        if self.grid != other.grid {
            return Err(Error::Grid("pairing of fields on different grids".into()));
        }
        let per_slice = self.grid.n_y;
        let nf = self.grid.n_f();
        let mut acc = C64::new(0.0, 0.0);
        for (s, (a, b)) in self.values.chunks(per_slice).zip(other.values.chunks(per_slice)).enumerate() {
            let w = self.grid.weight(s / nf);
            acc += a.iter().zip(b).map(|(x, y)| x * y).sum::<C64>() * w;
        }
        Ok(acc)
    }

    /// Rows `(y, η, t, re, im)` in storage order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(idx, v)| {
            let p = self.grid.point(idx);
            (p.y, p.eta, p.t, v.re, v.im)
        })
    }
}

/// Evaluates trigonometric sums `L⁻¹ Σ_m c_m e^{iξ_m y}` at the `y` nodes of a grid.
struct YEvaluator {
    ys: Vec<f64>,
    length: f64,
    folded: Option<(usize, Arc<dyn Fft<f64>>)>,
}

impl YEvaluator {
    fn new(zgrid: &ZGrid, grid: &TfGrid) -> Self {
        let ys: Vec<f64> = (0..grid.n_y).map(|i| grid.y(i)).collect();
        let length = zgrid.length();
        let ratio = length / grid.dy();
        let m = ratio.round();
        let folded = if m >= 1.0 && (ratio - m).abs() < 1e-9 * ratio.max(1.0) {
            let m = m as usize;
            Some((m, FftPlanner::new().plan_fft_inverse(m)))
        } else {
            None
        };
        Self { ys, length, folded }
    }

    /// Sum over `(signed mode index, coefficient)` pairs.
    fn eval(&self, terms: &[(i64, C64)], y_min: f64, out: &mut [C64]) {
        let w = 2.0 * std::f64::consts::PI / self.length;
        match &self.folded {
            Some((m, fft)) => {
                // Nodes y_min + i L/M: modes congruent mod M coincide there.
                let mut buf = vec![C64::new(0.0, 0.0); *m];
                for &(s, c) in terms {
                    let bin = s.rem_euclid(*m as i64) as usize;
                    buf[bin] += c * C64::from_polar(1.0, w * s as f64 * y_min);
                }
                fft.process(&mut buf);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = buf[i % m] / self.length;
                }
            }
            None => {
                for (o, &y) in out.iter_mut().zip(&self.ys) {
                    *o = terms.iter().map(|&(s, c)| c * C64::from_polar(1.0, w * s as f64 * y)).sum::<C64>() / self.length;
                }
            }
        }
    }
}

fn check_f(f: &[C64], spec: &Spectral) -> Result<()> {
    if f.len() != spec.grid.n {
        return Err(Error::Grid(format!("function has {} samples, DFT length is {}", f.len(), spec.grid.n)));
    }
    Ok(())
}

/// `F(y,η,t) = (f * ψ_{η,t})(y)` per slice by DFT.
pub fn embed_energy(f: &[C64], spec: &Spectral, grid: &TfGrid, gen: &Generators) -> Result<EmbeddedField> {
    check_f(f, spec)?;
    grid.validate()?;
    let fh = spec.forward(f);
    let zg = spec.grid;
    let ev = YEvaluator::new(&zg, grid);
    let mut field = EmbeddedField::zeros(grid);
    let nf = grid.n_f();
    par::for_each_chunk(&mut field.values, grid.n_y, |s, out| {
        let (j, k) = (s % nf, s / nf);
        let (eta, t) = (grid.eta(j, k), grid.t(k));
        let terms: Vec<(i64, C64)> = (0..zg.n)
            .filter_map(|m| {
                let p = gen.psi_hat(t * (zg.freq(m) - eta));
                (p != 0.0 && fh[m] != C64::new(0.0, 0.0)).then(|| (zg.signed_index(m), fh[m] * p))
            })
            .collect();
        ev.eval(&terms, grid.y_min, out);
    });
    Ok(field)
}

/// Channel data on the periodic grid, grouped by segment endpoints.
struct SegmentGroup {
    c_minus: f64,
    c_plus: f64,
    /// Conjugated DFT of the channel values restricted to the group's cells.
    ghat_conj: Vec<C64>,
}

fn segment_groups(a: &SequenceFunction, c: &StoppingSequence, spec: &Spectral) -> Result<Vec<SegmentGroup>> {
    a.check_matches(c)?;
    let zg = spec.grid;
    let axis = a.axis();
    if axis.lo() < zg.z0 - 1e-12 || axis.hi() > zg.z0 + zg.length() + 1e-12 {
        return Err(Error::Grid(format!(
            "cells [{}, {}] exceed the period [{}, {}]",
            axis.lo(),
            axis.hi(),
            zg.z0,
            zg.z0 + zg.length()
        )));
    }
    let cells: Vec<Option<usize>> = (0..zg.n).map(|j| axis.cell_of(zg.point(j))).collect();
    let mut groups: BTreeMap<(u64, u64), Vec<f64>> = BTreeMap::new();
    for cell in 0..axis.n_cells() {
        for k in 0..a.k() {
            let (cm, cp) = c.segment(cell, k);
            let v = a.value(cell, k);
            if v == 0.0 || cm >= cp || cm == f64::INFINITY {
                continue;
            }
            let g = groups.entry((cm.to_bits(), cp.to_bits())).or_insert_with(|| vec![0.0; zg.n]);
            for (j, cj) in cells.iter().enumerate() {
                if *cj == Some(cell) {
                    g[j] += v;
                }
            }
        }
    }
    Ok(groups
        .into_iter()
        .map(|((cm, cp), g)| SegmentGroup {
            c_minus: f64::from_bits(cm),
            c_plus: f64::from_bits(cp),
            ghat_conj: spec.forward_real(&g).into_iter().map(|v| v.conj()).collect(),
        })
        .collect())
}

/// Which packet family a variational mass field integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PacketSides {
    Left,
    Right,
    Both,
}

/// `∫ g(z) Ψ_{y,η,t}(z) dz = L⁻¹ Σ_m Ψ̂_0(ξ_m) conj(ĝ(ξ_m)) e^{-iξ_m y}` for real `g`.
fn packet_field(
    groups: &[SegmentGroup],
    spec: &Spectral,
    grid: &TfGrid,
    gen: &Generators,
    sides: PacketSides,
) -> EmbeddedField {
    let zg = spec.grid;
    let ev = YEvaluator::new(&zg, grid);
    let mut field = EmbeddedField::zeros(grid);
    let nf = grid.n_f();
    let b = gen.geom.b;
    par::for_each_chunk(&mut field.values, grid.n_y, |s, out| {
        let (j, k) = (s % nf, s / nf);
        let (eta, t) = (grid.eta(j, k), grid.t(k));
        let mut acc: BTreeMap<i64, C64> = BTreeMap::new();
        let want = |side: Side| match sides {
            PacketSides::Both => true,
            PacketSides::Left => side == Side::Left,
            PacketSides::Right => side == Side::Right,
        };
        // Modes where φ̂(t(ξ-η)) can be nonzero.
        let step = zg.freq_step();
        let lo = ((eta - b / t) / step).floor() as i64;
        let hi = ((eta + b / t) / step).ceil() as i64;
        let half = zg.n as i64 / 2;
        for grp in groups {
            for side in [Side::Left, Side::Right] {
                if !want(side) || !gen.packet_active(eta, t, grp.c_minus, grp.c_plus, side) {
                    continue;
                }
                for sidx in lo.max(-half + 1 - (zg.n as i64 % 2))..=hi.min(half) {
                    let m = sidx.rem_euclid(zg.n as i64) as usize;
                    let xi = zg.freq(m);
                    let v = gen.packet_hat(xi, eta, t, grp.c_minus, grp.c_plus, side);
                    if v != 0.0 {
                        *acc.entry(-sidx).or_insert(C64::new(0.0, 0.0)) += grp.ghat_conj[m] * v;
                    }
                }
            }
        }
        if acc.is_empty() {
            return;
        }
        let terms: Vec<(i64, C64)> = acc.into_iter().collect();
        ev.eval(&terms, grid.y_min, out);
    });
    field
}

/// `A(y,η,t) = ∫ a(z) χ(t(η-c(z))) φ_{η,t}(z-y) dz`, the left packet with `c⁺ = +∞`.
pub fn embed_mass(
    a: &SequenceFunction,
    c: &StoppingSequence,
    spec: &Spectral,
    grid: &TfGrid,
    gen: &Generators,
) -> Result<EmbeddedField> {
    if a.k() != 1 || c.k() != 1 {
        return Err(Error::Argument("mass embedding takes a single channel".into()));
    }
    let groups = segment_groups(a, c, spec)?;
    Ok(packet_field(&groups, spec, grid, gen, PacketSides::Left))
}

/// `𝔸_𝔠(y,η,t) = ∫ Σ_k a_k(z) (Ψ^l + Ψ^r)^{𝔠_k(z), 𝔠_{k+1}(z)}_{y,η,t}(z) dz`.
pub fn embed_var_mass_linear(
    a: &SequenceFunction,
    c: &StoppingSequence,
    spec: &Spectral,
    grid: &TfGrid,
    gen: &Generators,
) -> Result<EmbeddedField> {
    let groups = segment_groups(a, c, spec)?;
    Ok(packet_field(&groups, spec, grid, gen, PacketSides::Both))
}

/// Left-only and right-only parts of `𝔸_𝔠`.
pub fn embed_var_mass_sides(
    a: &SequenceFunction,
    c: &StoppingSequence,
    spec: &Spectral,
    grid: &TfGrid,
    gen: &Generators,
) -> Result<(EmbeddedField, EmbeddedField)> {
    let groups = segment_groups(a, c, spec)?;
    Ok((
        packet_field(&groups, spec, grid, gen, PacketSides::Left),
        packet_field(&groups, spec, grid, gen, PacketSides::Right),
    ))
}

/// Maximum of `|left|`, `|right|` and `|left + right|`: a lower bound for the
/// supremal variational mass embedding over the canonical packet family.
pub fn embed_var_mass_sup(
    a: &SequenceFunction,
    c: &StoppingSequence,
    spec: &Spectral,
    grid: &TfGrid,
    gen: &Generators,
) -> Result<EmbeddedField> {
    let (l, r) = embed_var_mass_sides(a, c, spec, grid, gen)?;
    let v = l
        .values
        .iter()
        .zip(&r.values)
        .map(|(x, y)| x.norm().max(y.norm()).max((x + y).norm()))
        .collect();
    Ok(EmbeddedField::from_real(grid, v))
}

/// Frequency window of the auxiliary embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Both,
    Plus,
    Minus,
}

/// Spatial weight of the auxiliary embedding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// `W_t(z-y)` with exponent `N`.
    Bump { n: u32 },
    /// Average over `B_{Rt}(y)`.
    Ball { r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxVariant {
    pub weight: Weight,
    pub sign: Sign,
}

impl AuxVariant {
    pub fn bump(n: u32) -> Self {
        Self { weight: Weight::Bump { n }, sign: Sign::Both }
    }

    pub fn ball(r: f64, sign: Sign) -> Self {
        Self { weight: Weight::Ball { r }, sign }
    }

    fn validate(&self) -> Result<()> {
        match self.weight {
            Weight::Bump { n: 0 } => Err(Error::Argument("bump exponent must be positive".into())),
            Weight::Ball { r } if !(r >= 1.0) => Err(Error::Argument(format!("ball factor R must be >= 1, got {r}"))),
            _ => Ok(()),
        }
    }
}

fn in_window(g: &GeometryParams, sign: Sign, th: f64) -> bool {
    match sign {
        Sign::Both => g.in_theta(th),
        Sign::Plus => g.in_theta_plus(th),
        Sign::Minus => g.in_theta_minus(th),
    }
}

/// Per-cell integrand `(Σ_k |a_k|^{r'} 1_window(t(η - c_k)))^{1/r'}` at `(η, t)`.
fn aux_cell_values(a: &SequenceFunction, c: &StoppingSequence, g: &GeometryParams, sign: Sign, eta: f64, t: f64) -> Vec<f64> {
    let rp = a.r_prime;
    (0..a.axis().n_cells())
        .map(|cell| {
            let mut s = 0.0;
            for k in 0..a.k() {
                let v = a.value(cell, k);
                if v != 0.0 && in_window(g, sign, t * (eta - c.level(cell, k))) {
                    s += v.abs().powf(rp);
                }
            }
            if s == 0.0 {
                0.0
            } else {
                s.powf(1.0 / rp)
            }
        })
        .collect()
}

fn aux_integrate(axis: &CellAxis, vals: &[f64], weight: Weight, y: f64, t: f64) -> f64 {
    let mut acc = 0.0;
    match weight {
        Weight::Bump { n } => {
            let w = Bump::new(n);
            for (i, &v) in vals.iter().enumerate() {
                if v != 0.0 {
                    let (lo, hi) = axis.cell(i);
                    acc += v * w.cell_integral(t, y, lo, hi);
                }
            }
        }
        Weight::Ball { r } => {
            let (blo, bhi) = (y - r * t, y + r * t);
            for (i, &v) in vals.iter().enumerate() {
                if v != 0.0 {
                    let (lo, hi) = axis.cell(i);
                    let len = hi.min(bhi) - lo.max(blo);
                    if len > 0.0 {
                        acc += v * len;
                    }
                }
            }
            acc /= 2.0 * r * t;
        }
    }
    acc
}

/// Auxiliary embedding `M` (bump weight) or `M_R`, `M^±_R` (ball averages) at one point.
pub fn aux_at(a: &SequenceFunction, c: &StoppingSequence, g: &GeometryParams, variant: AuxVariant, p: &TfPoint) -> Result<f64> {
    a.check_matches(c)?;
    variant.validate()?;
    let vals = aux_cell_values(a, c, g, variant.sign, p.eta, p.t);
    Ok(aux_integrate(a.axis(), &vals, variant.weight, p.y, p.t))
}

/// Auxiliary embedding on every grid point, by exact integration over cells.
pub fn embed_aux(
    a: &SequenceFunction,
    c: &StoppingSequence,
    g: &GeometryParams,
    grid: &TfGrid,
    variant: AuxVariant,
) -> Result<EmbeddedField> {
    a.check_matches(c)?;
    variant.validate()?;
    grid.validate()?;
    let mut out = vec![0.0; grid.len()];
    let nf = grid.n_f();
    par::for_each_chunk(&mut out, grid.n_y, |s, chunk| {
        let (j, k) = (s % nf, s / nf);
        let (eta, t) = (grid.eta(j, k), grid.t(k));
        let vals = aux_cell_values(a, c, g, variant.sign, eta, t);
        if vals.iter().all(|&v| v == 0.0) {
            return;
        }
        for (i, o) in chunk.iter_mut().enumerate() {
            *o = aux_integrate(a.axis(), &vals, variant.weight, grid.y(i), t);
        }
    });
    Ok(EmbeddedField::from_real(grid, out))
}

/// `M_p g(z) = sup_{t ∈ radii} (⨍_{B_t(z)} |g|^p)^{1/p}` for piecewise-constant `g`.
pub fn maximal_function(axis: &CellAxis, g: &[f64], p: f64, radii: &[f64], points: &[f64]) -> Result<Vec<f64>> {
    if g.len() != axis.n_cells() {
        return Err(Error::Argument(format!("expected {} cell values, got {}", axis.n_cells(), g.len())));
    }
    if !(p >= 1.0) || radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Argument("maximal function needs p >= 1 and positive radii".into()));
    }
    let gp: Vec<f64> = g.iter().map(|v| v.abs().powf(p)).collect();
    Ok(par::map_slice(points, |&z| {
        radii
            .iter()
            .map(|&t| aux_integrate(axis, &gp, Weight::Ball { r: 1.0 }, z, t))
            .fold(0.0, f64::max)
            .powf(1.0 / p)
    }))
}

/// Smooth bump equal to 1 on `B_1`, supported in `B_2`.
pub fn upsilon(u: f64) -> f64 {
    smooth_step(2.0 - u.abs())
}

/// Split `f = f_0 + Σ_{k≥1} f_k` with `f_0 = f υ((z-x_0)/5s)` and
/// `f_k = f [υ(u/2^{Nk}) - υ(u/2^{N(k-1)})]`, `u = (z-x_0)/5s`.
pub fn cz_decompose(f: &[C64], zs: &[f64], x0: f64, s: f64, n: u32) -> Result<Vec<Vec<C64>>> {
    if f.len() != zs.len() || !(s > 0.0) || n == 0 {
        return Err(Error::Argument("cz_decompose needs matching samples, s > 0 and N >= 1".into()));
    }
    let reach = f
        .iter()
        .zip(zs)
        .filter(|(v, _)| v.norm() != 0.0)
        .map(|(_, z)| (z - x0).abs() / (5.0 * s))
        .fold(0.0, f64::max);
    let base = 2f64.powi(n as i32);
    let mut k_max = 0u32;
    while base.powi(k_max as i32) <= reach {
        k_max += 1;
    }
    let mut out = Vec::with_capacity(k_max as usize + 1);
    out.push(f.iter().zip(zs).map(|(v, z)| v * upsilon((z - x0) / (5.0 * s))).collect());
    for k in 1..=k_max {
        let outer = base.powi(k as i32);
        let inner = base.powi(k as i32 - 1);
        out.push(
            f.iter()
                .zip(zs)
                .map(|(v, z)| {
                    let u = (z - x0) / (5.0 * s);
                    v * (upsilon(u / outer) - upsilon(u / inner))
                })
                .collect(),
        );
    }
    Ok(out)
}
