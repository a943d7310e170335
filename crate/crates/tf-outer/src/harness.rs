//! Seeded random ensembles and the verification experiments.
//!
//! Every experiment returns a [`Report`]: one [`Row`] per instance (and
//! refinement level) plus a [`Summary`]. Instances are generated from
//! `(seed, index)` alone, so doubling an ensemble keeps the first half.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embeddings::{
    aux_at, embed_aux, embed_energy, embed_mass, embed_var_mass_linear, embed_var_mass_sup, AuxVariant, CellAxis, Sign,
    SequenceFunction, StoppingSequence,
};
use crate::error::{Error, Result};
use crate::fourier::{Spectral, ZGrid};
use crate::geometry::{q_plus_disjoint, GeometryParams, Strip, Tent, TfGrid, TfPoint};
use crate::operators::linear_form;
use crate::outer::{
    check_cover, cover_superlevel_aux, iter_lp_lq, lipschitz_extend, mass_project, outer_lp, stopping_density, CoverParams, Ladder,
    PartialProfile,
};
use crate::par;
use crate::sizes::{generated_size, index_tents, local_size_abs, SizeKind, SizeSpec};
use crate::wavepackets::{Generators, PacketQuadrature, Resolution};

/// Hölder conjugate, with `1 ↔ ∞`.
pub fn conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl Default for Exponents {
    fn default() -> Self {
        Self { p: 4.0, q: 4.0, r: 3.0 }
    }
}

impl Exponents {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q), ("r", self.r)] {
            if !(v >= 1.0) {
                return Err(Error::Argument(format!("exponent {name} must be >= 1, got {v}")));
            }
        }
        Ok(())
    }

    pub fn p_prime(&self) -> f64 {
        conjugate(self.p)
    }

    pub fn q_prime(&self) -> f64 {
        conjugate(self.q)
    }

    pub fn r_prime(&self) -> f64 {
        conjugate(self.r)
    }
}

/// Axis ranges and candidate families of an experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Period of the `z` grid.
    pub length: f64,
    pub n_z: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub n_y: usize,
    /// Frequency center of the adapted axis `η = center + θ/t`.
    pub center: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_theta: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub cell_lo: f64,
    pub cell_hi: f64,
    pub n_cells: usize,
    /// Values `θ₀` of the candidate tent frequencies `ξ = center + θ₀/s`.
    pub tent_thetas: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            length: 64.0,
            n_z: 256,
            y_min: -16.0,
            y_max: 16.0,
            n_y: 32,
            center: 1.0,
            theta_min: 0.05,
            theta_max: 1.75,
            n_theta: 16,
            t_min: 0.5,
            t_max: 8.0,
            n_t: 8,
            cell_lo: -8.0,
            cell_hi: 8.0,
            n_cells: 8,
            tent_thetas: vec![0.5, 1.5],
        }
    }
}

impl GridConfig {
    /// The 128×64×32 grid used for the duality convergence study.
    pub fn duality() -> Self {
        Self {
            y_min: -32.0,
            y_max: 32.0,
            n_y: 128,
            n_theta: 64,
            t_min: 0.125,
            n_t: 32,
            cell_lo: -16.0,
            cell_hi: 16.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || self.n_z < 8 {
            return Err(Error::Grid(format!("grid.length must be positive and grid.n_z >= 8, got {} and {}", self.length, self.n_z)));
        }
        if !(self.cell_lo < self.cell_hi) || self.n_cells == 0 {
            return Err(Error::Grid("grid.cell_lo < grid.cell_hi and grid.n_cells > 0 required".into()));
        }
        if self.cell_hi - self.cell_lo > self.length {
            return Err(Error::Grid("cells must fit inside one period".into()));
        }
        if self.tent_thetas.is_empty() {
            return Err(Error::Grid("grid.tent_thetas must be nonempty".into()));
        }
        self.base_grid()?.validate()
    }

    fn base_grid(&self) -> Result<TfGrid> {
        TfGrid::adapted(
            (self.y_min, self.y_max, self.n_y),
            self.center,
            (self.theta_min, self.theta_max, self.n_theta),
            (self.t_min, self.t_max, self.n_t),
        )
    }

    /// Candidate scales `2 t_max, t_max, …` down to the last one above `t_min`.
    pub fn scales(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut s = 2.0 * self.t_max;
        while s > self.t_min {
            out.push(s);
            s *= 0.5;
        }
        out
    }

    fn centers(&self, s: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut m = 0.0;
        loop {
            let x = self.y_min + s * (m + 0.5);
            if x > self.y_max {
                break;
            }
            out.push(x);
            m += 1.0;
        }
        out
    }

    /// Tents at every scale, centers spaced by the scale, frequencies `center + θ₀/s`.
    pub fn candidate_tents(&self) -> Vec<Tent> {
        let mut out = Vec::new();
        for s in self.scales() {
            for x in self.centers(s) {
                for &th in &self.tent_thetas {
                    out.push(Tent::new(x, self.center + th / s, s));
                }
            }
        }
        out
    }

    pub fn candidate_strips(&self) -> Vec<Strip> {
        self.scales().into_iter().flat_map(|s| self.centers(s).into_iter().map(move |x| Strip::new(x, s))).collect()
    }
}

/// Everything that depends on the grid and the refinement level.
#[derive(Debug, Clone)]
pub struct Setup {
    pub geom: GeometryParams,
    pub config: GridConfig,
    pub level: usize,
    pub spec: Spectral,
    pub grid: TfGrid,
    pub gen: Generators,
    pub axis: CellAxis,
    pub tents: Vec<Tent>,
    pub strips: Vec<Strip>,
}

impl Setup {
    /// Grid refined `level` times; candidate families always from the base grid.
    pub fn new(geom: &GeometryParams, config: &GridConfig, level: usize) -> Result<Self> {
        geom.validate()?;
        config.validate()?;
        let zg = ZGrid::new(-0.5 * config.length, config.length, config.n_z)?;
        let mut grid = config.base_grid()?;
        for _ in 0..level {
            grid = grid.refined();
        }
        Ok(Self {
            geom: *geom,
            config: config.clone(),
            level,
            spec: Spectral::new(zg),
            grid,
            gen: Generators::build(geom, Resolution::default())?,
            axis: CellAxis::uniform(config.cell_lo, config.cell_hi, config.n_cells)?,
            tents: config.candidate_tents(),
            strips: config.candidate_strips(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub seed: u64,
    pub size: usize,
    /// Channel count `K` of the multi-channel data.
    pub channels: usize,
    /// Number of modulated Gaussians in each `f`.
    pub modes: usize,
    pub exponents: Exponents,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { seed: 2024, size: 50, channels: 3, modes: 6, exponents: Exponents::default() }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 || self.modes == 0 || self.modes > 8 {
            return Err(Error::Argument("ensemble.channels >= 1 and 1 <= ensemble.modes <= 8 required".into()));
        }
        self.exponents.validate()
    }
}

/// One random input: band-limited `f`, single-channel `(a₁, c₁)`, and
/// `K`-channel `(a, 𝔠)` with `r′` from the ensemble exponents.
#[derive(Debug, Clone)]
pub struct Instance {
    pub index: usize,
    pub f: Vec<C64>,
    pub a1: SequenceFunction,
    pub c1: StoppingSequence,
    pub a: SequenceFunction,
    pub c: StoppingSequence,
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub config: EnsembleConfig,
    pub geom: GeometryParams,
    pub grid: GridConfig,
    pub instances: Vec<Instance>,
}

fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

fn make_instance(cfg: &EnsembleConfig, grid: &GridConfig, spec: &Spectral, axis: &CellAxis, index: usize) -> Result<Instance> {
    let mut rng = instance_rng(cfg.seed, index);
    let c0 = grid.center;
    let half = 0.5 * (grid.cell_hi - grid.cell_lo);
    let mid = 0.5 * (grid.cell_hi + grid.cell_lo);
    let width = half / 2.0;
    let modes: Vec<(f64, f64, f64)> = (0..cfg.modes)
        .map(|_| (mid + 0.75 * half * rng.gen_range(-1.0..1.0), c0 + rng.gen_range(1.2..3.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let len = grid.length;
    let f = spec
        .grid
        .points()
        .iter()
        .map(|&z| {
            let mut s = C64::new(0.0, 0.0);
            for &(x, w, amp) in &modes {
                for p in -2..=2 {
                    let zz = z - x + len * p as f64;
                    s += C64::from_polar(amp * (-zz * zz / (2.0 * width * width)).exp(), w * zz);
                }
            }
            s
        })
        .collect();
    let n = axis.n_cells();
    let rp = cfg.exponents.r_prime();
    let lv1: Vec<f64> = (0..n).map(|_| c0 + rng.gen_range(-0.1..0.1)).collect();
    let av1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let k = cfg.channels;
    let mut lv = Vec::with_capacity(n * k);
    let mut av = Vec::with_capacity(n * k);
    for _ in 0..n {
        let mut row: Vec<f64> = (0..k).map(|_| c0 + rng.gen_range(-0.1..1.0)).collect();
        row.sort_by(f64::total_cmp);
        lv.extend(row);
        av.extend((0..k).map(|_| rng.gen_range(-1.0..1.0)));
    }
    Ok(Instance {
        index,
        f,
        a1: SequenceFunction::new(axis.clone(), 1, av1, rp)?,
        c1: StoppingSequence::new(axis.clone(), 1, lv1)?,
        a: SequenceFunction::new(axis.clone(), k, av, rp)?,
        c: StoppingSequence::new(axis.clone(), k, lv)?,
    })
}

impl Ensemble {
    pub fn new(geom: &GeometryParams, grid: &GridConfig, config: &EnsembleConfig) -> Result<Self> {
        geom.validate()?;
        grid.validate()?;
        config.validate()?;
        let spec = Spectral::new(ZGrid::new(-0.5 * grid.length, grid.length, grid.n_z)?);
        let axis = CellAxis::uniform(grid.cell_lo, grid.cell_hi, grid.n_cells)?;
        let instances =
            par::map_range(config.size, |i| make_instance(config, grid, &spec, &axis, i)).into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self { config: config.clone(), geom: *geom, grid: grid.clone(), instances })
    }

    /// Same seed, twice the size; the first half is unchanged.
    pub fn doubled(&self) -> Result<Self> {
        let cfg = EnsembleConfig { size: 2 * self.config.size, ..self.config.clone() };
        Self::new(&self.geom, &self.grid, &cfg)
    }

    pub fn setup(&self, level: usize) -> Result<Setup> {
        Setup::new(&self.geom, &self.grid, level)
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// One record of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub level: usize,
    pub instance: usize,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub flags: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStat {
    pub level: usize,
    pub count: usize,
    pub max: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub instances: usize,
    pub skipped: usize,
    pub saturated: usize,
    pub levels: Vec<LevelStat>,
    pub pass: bool,
    pub detail: BTreeMap<String, f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub summary: Summary,
    pub rows: Vec<Row>,
}

impl Report {
    fn new(experiment: &str, instances: usize, rows: Vec<Row>, started: Instant) -> Self {
        let mut levels: Vec<usize> = rows.iter().map(|r| r.level).collect();
        levels.sort_unstable();
        levels.dedup();
        let stats = levels
            .iter()
            .map(|&l| {
                let v: Vec<f64> = rows.iter().filter(|r| r.level == l && r.ratio.is_finite() && !r.flags.contains("skipped")).map(|r| r.ratio).collect();
                LevelStat { level: l, count: v.len(), max: v.iter().copied().fold(0.0, f64::max), median: median(&v) }
            })
            .collect();
        Self {
            summary: Summary {
                experiment: experiment.to_string(),
                instances,
                skipped: rows.iter().filter(|r| r.flags.contains("skipped")).count(),
                saturated: rows.iter().filter(|r| r.flags.contains("saturated")).count(),
                levels: stats,
                pass: true,
                detail: BTreeMap::new(),
                seconds: started.elapsed().as_secs_f64(),
            },
            rows,
        }
    }

    /// Ensemble maximum of the ratio column over all levels.
    pub fn max_ratio(&self) -> f64 {
        self.summary.levels.iter().map(|l| l.max).fold(0.0, f64::max)
    }

    fn finish(mut self, pass: bool) -> Self {
        self.summary.pass = pass && self.summary.levels.iter().all(|l| l.max.is_finite());
        self
    }

    fn detail(mut self, key: &str, v: f64) -> Self {
        self.summary.detail.insert(key.to_string(), v);
        self
    }
}

pub fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

#[allow(clippy::too_many_arguments)]
fn row(experiment: &str, level: usize, instance: usize, e: (f64, f64, f64), lhs: f64, rhs: f64, ratio: f64, flags: &str) -> Row {
    Row { experiment: experiment.into(), level, instance, p: e.0, q: e.1, r: e.2, lhs, rhs, ratio, flags: flags.into() }
}

/// `‖f‖_{L^p}` of samples on the `z` grid.
pub fn sample_lp_norm(f: &[C64], dz: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    (f.iter().map(|v| v.norm().powf(p)).sum::<f64>() * dz).powf(1.0 / p)
}

fn saturation_flag(saturated: bool) -> &'static str {
    if saturated {
        "saturated"
    } else {
        ""
    }
}

/// Duality identity: linear form against `∭ F·𝔸_𝔠` on grids refined
/// `0..levels` times, with the wave-packet domination check.
pub fn verify_duality(ens: &Ensemble, levels: usize) -> Result<Report> {
    let started = Instant::now();
    let mut rows = Vec::new();
    let e = (ens.config.exponents.p, ens.config.exponents.q, ens.config.exponents.r);
    for level in 0..levels {
        let st = ens.setup(level)?;
        let level_rows: Vec<Row> = ens
            .instances
            .iter()
            .map(|ins| -> Result<Row> {
                let lhs = linear_form(&ins.f, &st.spec, &ins.a1, &ins.c1)?;
                let ff = embed_energy(&ins.f, &st.spec, &st.grid, &st.gen)?;
                let aa = embed_var_mass_linear(&ins.a1, &ins.c1, &st.spec, &st.grid, &st.gen)?;
                let rhs = ff.pairing(&aa)?;
                let sup = embed_var_mass_sup(&ins.a1, &ins.c1, &st.spec, &st.grid, &st.gen)?;
                let dom: f64 = (0..st.grid.len()).map(|i| st.grid.weight_at(i) * ff.values[i].norm() * sup.values[i].re).sum();
                let gap = (lhs - rhs).norm();
                let rel = if lhs.norm() > 0.0 { gap / lhs.norm() } else { gap };
                let dominated = dom >= lhs.norm() - gap - 1e-12;
                Ok(row("duality", level, ins.index, e, lhs.norm(), rhs.norm(), rel, if dominated { "dominated" } else { "not_dominated" }))
            })
            .collect::<Result<_>>()?;
        rows.extend(level_rows);
    }
    let rep = Report::new("duality", ens.len(), rows, started);
    let meds: Vec<f64> = rep.summary.levels.iter().map(|l| l.median).collect();
    let mut ok = rep.rows.iter().all(|r| r.flags == "dominated");
    let mut rep = rep;
    for (i, w) in meds.windows(2).enumerate() {
        let ratio = if w[0] > 0.0 { w[1] / w[0] } else { 0.0 };
        rep = rep.detail(&format!("median_ratio_{}_{}", i, i + 1), ratio);
        ok &= ratio <= 0.6;
    }
    Ok(rep.finish(ok))
}

/// Iterated outer Hölder: `|∭F·𝔸_𝔠| / (‖F‖_{L^p𝕃^q(S_e)} ‖𝔸_𝔠‖_{L^{p′}𝕃^{q′}(S_m)})`.
pub fn verify_holder(ens: &Ensemble, level: usize, ladder: &Ladder) -> Result<Report> {
    let started = Instant::now();
    let st = ens.setup(level)?;
    let ex = ens.config.exponents;
    let (p, q, pp, qp) = (ex.p, ex.q, ex.p_prime(), ex.q_prime());
    let se = SizeSpec::new(SizeKind::SEnergy, st.geom);
    let sm = SizeSpec::new(SizeKind::SMass, st.geom);
    let rows: Vec<Row> = ens
        .instances
        .iter()
        .map(|ins| -> Result<Row> {
            let ff = embed_energy(&ins.f, &st.spec, &st.grid, &st.gen)?;
            let aa = embed_var_mass_linear(&ins.a, &ins.c, &st.spec, &st.grid, &st.gen)?;
            let lhs = ff.pairing(&aa)?.norm();
            let nf = iter_lp_lq(&ff, p, q, &se, &st.strips, &st.tents, ladder, false)?;
            let na = iter_lp_lq(&aa, pp, qp, &sm, &st.strips, &st.tents, ladder, false)?;
            let den = nf.value * na.value;
            let sat = nf.saturated || na.saturated;
            if den == 0.0 {
                return Ok(row("holder", level, ins.index, (p, q, ex.r), lhs, 0.0, 0.0, "skipped"));
            }
            Ok(row("holder", level, ins.index, (p, q, ex.r), lhs, den, lhs / den, saturation_flag(sat)))
        })
        .collect::<Result<_>>()?;
    let rep = Report::new("holder", ens.len(), rows, started);
    Ok(rep.finish(true))
}

/// Radon–Nikodym domination for the grid measure restricted to a random
/// subset of the union of candidate tents.
pub fn verify_radon_nikodym(ens: &Ensemble, level: usize, ladder: &Ladder) -> Result<Report> {
    let started = Instant::now();
    let st = ens.setup(level)?;
    let spec = SizeSpec::new(SizeKind::S1Plain, st.geom);
    let idx = index_tents(&st.grid, &st.tents, &st.geom);
    let mut in_union = vec![false; st.grid.len()];
    for tp in &idx {
        for &(i, _) in &tp.points {
            in_union[i] = true;
        }
    }
    let e = (1.0, 1.0, ens.config.exponents.r);
    let rows: Vec<Vec<Row>> = ens
        .instances
        .iter()
        .map(|ins| -> Result<Vec<Row>> {
            let mut rng = instance_rng(ens.config.seed ^ 0x5eed, ins.index);
            let mask: Vec<bool> = in_union.iter().map(|&u| u && rng.gen_bool(0.5)).collect();
            let g = embed_energy(&ins.f, &st.spec, &st.grid, &st.gen)?;
            let lhs = (0..g.values.len()).filter(|&i| mask[i]).map(|i| g.values[i] * st.grid.weight_at(i)).sum::<C64>().norm();
            let abs = g.abs();
            let hyp = idx
                .iter()
                .map(|tp| {
                    let num: f64 = tp.points.iter().filter(|(i, _)| mask[*i]).map(|&(i, _)| abs[i] * st.grid.weight_at(i)).sum();
                    let den = local_size_abs(&abs, tp, SizeKind::S1Plain) * tp.tent.s;
                    if den > 0.0 {
                        num / den
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max);
            let plain = outer_lp(&g, &spec, 1.0, ladder, false, &st.tents)?;
            let iter = iter_lp_lq(&g, 1.0, 1.0, &spec, &st.strips, &st.tents, ladder, false)?;
            let ratio = |d: f64| if d > 0.0 { lhs / d } else { 0.0 };
            let hyp_flag = if hyp <= 1.0 + 1e-12 { "hypothesis_ok" } else { "hypothesis_fail" };
            Ok(vec![
                row("rn", level, ins.index, e, lhs, plain.value, ratio(plain.value), &format!("{hyp_flag};{}", saturation_flag(plain.saturated))),
                row("rn_iterated", level, ins.index, e, lhs, iter.value, ratio(iter.value), &format!("{hyp_flag};{}", saturation_flag(iter.saturated))),
                row("rn_hypothesis", level, ins.index, e, hyp, 1.0, hyp, hyp_flag),
            ])
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    let ok = rows.iter().all(|r| !r.flags.contains("hypothesis_fail"));
    let max_plain = rows.iter().filter(|r| r.experiment == "rn").map(|r| r.ratio).fold(0.0, f64::max);
    let max_iter = rows.iter().filter(|r| r.experiment == "rn_iterated").map(|r| r.ratio).fold(0.0, f64::max);
    Ok(Report::new("rn", ens.len(), rows, started).detail("max_plain", max_plain).detail("max_iterated", max_iter).finish(ok))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Embedding {
    Mass,
    Energy,
    VarMass,
    Aux,
}

impl Embedding {
    pub const ALL: [Embedding; 4] = [Embedding::Mass, Embedding::Energy, Embedding::VarMass, Embedding::Aux];

    pub fn name(&self) -> &'static str {
        match self {
            Embedding::Mass => "mass",
            Embedding::Energy => "energy",
            Embedding::VarMass => "var_mass",
            Embedding::Aux => "aux",
        }
    }

    /// Outer and inner exponents the bound is stated for, given the ensemble tuple.
    pub fn exponents(&self, ex: &Exponents) -> (f64, f64) {
        match self {
            Embedding::Energy => (ex.p, ex.q),
            _ => (ex.p_prime(), ex.q_prime()),
        }
    }

    pub fn in_range(&self, ex: &Exponents) -> bool {
        let (p, q) = self.exponents(ex);
        let rp = ex.r_prime();
        match self {
            Embedding::Mass => p > 1.0 && q > 1.0,
            Embedding::Energy => p > 1.0 && q > 2.0f64.max(conjugate(p)),
            Embedding::VarMass => (1.0..2.0).contains(&rp) && p > 1.0 && q > rp,
            Embedding::Aux => p > 1.0 && q > rp,
        }
    }
}

/// Ratio of the iterated outer norm of the embedded field to the Lebesgue
/// norm of the input, plus the weak endpoint `L^{1,∞}𝕃^{q′}` for `VarMass`
/// and `Aux`.
pub fn bound_ratio_sweep(ens: &Ensemble, which: Embedding, level: usize, ladder: &Ladder, explore: bool) -> Result<Report> {
    let started = Instant::now();
    let ex = ens.config.exponents;
    if !which.in_range(&ex) && !explore {
        return Err(Error::Argument(format!("exponents {ex:?} outside the stated range of the {} bound", which.name())));
    }
    let st = ens.setup(level)?;
    let (p, q) = which.exponents(&ex);
    let kind = match which {
        Embedding::Energy => SizeKind::SEnergy,
        Embedding::Aux => SizeKind::SInf,
        _ => SizeKind::SMass,
    };
    let spec = SizeSpec::new(kind, st.geom);
    let name = format!("bounds_{}", which.name());
    let rows: Vec<Vec<Row>> = ens
        .instances
        .iter()
        .map(|ins| -> Result<Vec<Row>> {
            let (field, input, input_l1) = match which {
                Embedding::Energy => {
                    let g = embed_energy(&ins.f, &st.spec, &st.grid, &st.gen)?;
                    (g, sample_lp_norm(&ins.f, st.spec.grid.dz, p), 0.0)
                }
                Embedding::Mass => (embed_mass(&ins.a1, &ins.c1, &st.spec, &st.grid, &st.gen)?, ins.a1.lp_norm(p), 0.0),
                Embedding::VarMass => {
                    (embed_var_mass_sup(&ins.a, &ins.c, &st.spec, &st.grid, &st.gen)?, ins.a.lp_norm(p), ins.a.lp_norm(1.0))
                }
                Embedding::Aux => (
                    embed_aux(&ins.a, &ins.c, &st.geom, &st.grid, AuxVariant::bump(st.geom.decay_n))?,
                    ins.a.lp_norm(p),
                    ins.a.lp_norm(1.0),
                ),
            };
            let n = iter_lp_lq(&field, p, q, &spec, &st.strips, &st.tents, ladder, false)?;
            let ratio = if input > 0.0 { n.value / input } else { 0.0 };
            let mut out = vec![row(&name, level, ins.index, (p, q, ex.r), n.value, input, ratio, saturation_flag(n.saturated))];
            if matches!(which, Embedding::VarMass | Embedding::Aux) {
                let w = iter_lp_lq(&field, 1.0, q, &spec, &st.strips, &st.tents, ladder, true)?;
                let wr = if input_l1 > 0.0 { w.value / input_l1 } else { 0.0 };
                let flag = format!("weak_endpoint;{}", saturation_flag(w.saturated));
                out.push(row(&format!("{name}_weak"), level, ins.index, (1.0, q, ex.r), w.value, input_l1, wr, &flag));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    let strong_max = rows.iter().filter(|r| !r.flags.contains("weak_endpoint")).map(|r| r.ratio).fold(0.0, f64::max);
    let weak_max = rows.iter().filter(|r| r.flags.contains("weak_endpoint")).map(|r| r.ratio).fold(0.0, f64::max);
    Ok(Report::new(&name, ens.len(), rows, started).detail("max_strong", strong_max).detail("max_weak", weak_max).finish(true))
}

/// Parameters of the interpolation checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpParams {
    pub p0: f64,
    pub p1: f64,
    pub theta: f64,
}

impl Default for InterpParams {
    fn default() -> Self {
        Self { p0: 2.0, p1: 8.0, theta: 0.5 }
    }
}

impl InterpParams {
    pub fn p_theta(&self) -> f64 {
        1.0 / ((1.0 - self.theta) / self.p0 + self.theta / self.p1)
    }
}

/// Log-convexity per energy field, and the Marcinkiewicz consistency of `a ↦ M`.
pub fn verify_interpolation(ens: &Ensemble, level: usize, ladder: &Ladder, ip: InterpParams) -> Result<Report> {
    let started = Instant::now();
    if ip.p0 == ip.p1 || !(0.0..=1.0).contains(&ip.theta) {
        return Err(Error::Argument("interpolation needs p0 != p1 and theta in [0, 1]".into()));
    }
    let st = ens.setup(level)?;
    let pt = ip.p_theta();
    let se = SizeSpec::new(SizeKind::SEnergy, st.geom);
    let sinf = SizeSpec::new(SizeKind::SInf, st.geom);
    let rows: Vec<Vec<Row>> = ens
        .instances
        .iter()
        .map(|ins| -> Result<Vec<Row>> {
            let g = embed_energy(&ins.f, &st.spec, &st.grid, &st.gen)?;
            let strong = outer_lp(&g, &se, pt, ladder, false, &st.tents)?;
            let w0 = outer_lp(&g, &se, ip.p0, ladder, true, &st.tents)?;
            let w1 = outer_lp(&g, &se, ip.p1, ladder, true, &st.tents)?;
            let bound = w0.value.powf(1.0 - ip.theta) * w1.value.powf(ip.theta);
            let c = if bound > 0.0 { strong.value / bound } else { 0.0 };
            let m = embed_aux(&ins.a, &ins.c, &st.geom, &st.grid, AuxVariant::bump(st.geom.decay_n))?;
            let ms = outer_lp(&m, &sinf, pt, ladder, false, &st.tents)?;
            let m0 = outer_lp(&m, &sinf, ip.p0, ladder, true, &st.tents)?;
            let m1 = outer_lp(&m, &sinf, ip.p1, ladder, true, &st.tents)?;
            let ratio = |v: f64, p: f64| {
                let n = ins.a.lp_norm(p);
                if n > 0.0 {
                    v / n
                } else {
                    0.0
                }
            };
            let e = (pt, ip.p0, ip.p1);
            Ok(vec![
                row("interp_logconvex", level, ins.index, e, strong.value, bound, c, saturation_flag(strong.saturated || w0.saturated || w1.saturated)),
                row("interp_aux_strong", level, ins.index, e, ms.value, ins.a.lp_norm(pt), ratio(ms.value, pt), ""),
                row("interp_aux_weak0", level, ins.index, e, m0.value, ins.a.lp_norm(ip.p0), ratio(m0.value, ip.p0), ""),
                row("interp_aux_weak1", level, ins.index, e, m1.value, ins.a.lp_norm(ip.p1), ratio(m1.value, ip.p1), ""),
            ])
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    let mx = |name: &str| rows.iter().filter(|r| r.experiment == name).map(|r| r.ratio).fold(0.0, f64::max);
    let (lc, s, n0, n1) = (mx("interp_logconvex"), mx("interp_aux_strong"), mx("interp_aux_weak0"), mx("interp_aux_weak1"));
    let denom = n0.powf(1.0 - ip.theta) * n1.powf(ip.theta);
    let marc = if denom > 0.0 { s / denom } else { 0.0 };
    Ok(Report::new("interp", ens.len(), rows, started)
        .detail("max_logconvex", lc)
        .detail("marcinkiewicz_constant", marc)
        .finish(lc.is_finite() && marc.is_finite()))
}

/// Size control off a random union of strips and tents: `S_m(𝔸_sup 1_{X∖(K∪E)}) ≤ C·λ`
/// with `λ = max M` off the union.
pub fn verify_size_control(ens: &Ensemble, level: usize) -> Result<Report> {
    let started = Instant::now();
    let st = ens.setup(level)?;
    let sm = SizeSpec::new(SizeKind::SMass, st.geom);
    let e = (ens.config.exponents.p, ens.config.exponents.q, ens.config.exponents.r);
    let rows: Vec<Row> = ens
        .instances
        .iter()
        .map(|ins| -> Result<Row> {
            let mut rng = instance_rng(ens.config.seed ^ 0xc0de, ins.index);
            let mut removed = vec![false; st.grid.len()];
            for _ in 0..rng.gen_range(1..=3) {
                let s = st.strips[rng.gen_range(0..st.strips.len())];
                for i in st.grid.strip_points(&s) {
                    removed[i] = true;
                }
            }
            for _ in 0..rng.gen_range(1..=3) {
                let t = st.tents[rng.gen_range(0..st.tents.len())];
                for (i, _) in st.grid.tent_points(&t, &st.geom) {
                    removed[i] = true;
                }
            }
            let m = embed_aux(&ins.a, &ins.c, &st.geom, &st.grid, AuxVariant::bump(st.geom.decay_n))?;
            let lambda = (0..m.values.len()).filter(|&i| !removed[i]).map(|i| m.values[i].re).fold(0.0, f64::max);
            let mut sup = embed_var_mass_sup(&ins.a, &ins.c, &st.spec, &st.grid, &st.gen)?;
            let off: Vec<usize> = (0..removed.len()).filter(|&i| removed[i]).collect();
            sup.zero_on(&off);
            let size = generated_size(&sup, &st.tents, &sm)?;
            if lambda == 0.0 {
                return Ok(row("sizecontrol", level, ins.index, e, size, 0.0, 0.0, "skipped"));
            }
            Ok(row("sizecontrol", level, ins.index, e, size, lambda, size / lambda, ""))
        })
        .collect::<Result<_>>()?;
    Ok(Report::new("sizecontrol", ens.len(), rows, started).finish(true))
}

/// Reconstruction of `1_{[c⁻,c⁺)}` from truncated packets at the base and
/// refined quadrature, plus generator sanity values.
pub fn verify_wavepackets(geom: &GeometryParams, quad: &PacketQuadrature, c_minus: f64, c_plus: f64, margin: f64) -> Result<Report> {
    let started = Instant::now();
    let gen = Generators::build(geom, Resolution::default())?;
    let n = 200;
    let inner: Vec<f64> = (0..n)
        .map(|i| c_minus + margin + (c_plus - c_minus - 2.0 * margin) * i as f64 / (n - 1) as f64)
        .collect();
    let outer_pts: Vec<f64> = (0..n / 2)
        .flat_map(|i| {
            let d = margin + 5.0 * i as f64 / (n / 2) as f64;
            [c_minus - d, c_plus + d]
        })
        .collect();
    let mut rows = Vec::new();
    let mut errs = Vec::new();
    for (level, q) in [*quad, quad.refined()].into_iter().enumerate() {
        let t0 = Instant::now();
        let rin = gen.reconstruct_indicator(c_minus, c_plus, &inner, &q)?;
        let rout = gen.reconstruct_indicator(c_minus, c_plus, &outer_pts, &q)?;
        let ein = rin.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        let eout = rout.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let secs = t0.elapsed().as_secs_f64();
        errs.push(ein);
        let e = (q.n_eta as f64, q.n_t as f64, secs);
        rows.push(row("wavepackets_interior", level, 0, e, ein, 0.0, ein, ""));
        rows.push(row("wavepackets_exterior", level, 0, e, eout, 0.0, eout, ""));
    }
    let norm = gen.normalization_integral(4096);
    let (b0, b1) = gen.beta_thresholds();
    let checks = [
        ("normalization", (norm - 1.0).abs()),
        ("beta_low", gen.beta(b0).abs()),
        ("beta_high", (gen.beta(b1) - 1.0).abs()),
        ("gamma_one", (gen.gamma(1.0) - 0.5).abs()),
    ];
    for (name, v) in checks {
        rows.push(row(&format!("wavepackets_{name}"), 0, 0, (0.0, 0.0, 0.0), v, 0.0, v, ""));
    }
    let drop = if errs[0] > 0.0 { 1.0 - errs[1] / errs[0] } else { 1.0 };
    let ok = errs[0] <= 0.05 && drop >= 0.4 && checks.iter().all(|(_, v)| *v < 1e-6);
    Ok(Report::new("wavepackets", 1, rows, started).detail("base_error", errs[0]).detail("refined_error", errs[1]).detail("drop", drop).finish(ok))
}

/// Covering of `{M⁺_R ≥ λ}` per instance, with `λ` a fraction of the
/// maximum, the three covering conclusions and the packing bound
/// `Σ s M⁺_R(top)^{r′} ≤ (2R)⁻¹‖a‖^{r′}` (ratio reported).
pub fn verify_covering(ens: &Ensemble, level: usize, params: CoverParams, fraction: f64) -> Result<Report> {
    let started = Instant::now();
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Argument(format!("lambda fraction must be in (0, 1], got {fraction}")));
    }
    let st = ens.setup(level)?;
    params.validate(&st.geom)?;
    let e = (params.r, params.q, ens.config.exponents.r);
    let rows: Vec<Vec<Row>> = ens
        .instances
        .iter()
        .map(|ins| -> Result<Vec<Row>> {
            let field = embed_aux(&ins.a, &ins.c, &st.geom, &st.grid, AuxVariant::ball(params.r, Sign::Plus))?;
            let top = field.values.iter().map(|v| v.re).fold(0.0, f64::max);
            if top == 0.0 {
                return Ok(vec![row("cover", level, ins.index, e, 0.0, 0.0, 0.0, "skipped")]);
            }
            let lambda = fraction * top;
            let cov = cover_superlevel_aux(&ins.a, &ins.c, lambda, params, &st.grid, &st.geom)?;
            let chk = check_cover(&cov, &ins.a, &ins.c, lambda, params, &st.grid, &st.geom)?;
            let rp = ins.a.r_prime;
            let packed: f64 = cov
                .tents
                .iter()
                .map(|t| {
                    let i = nearest_index(&st.grid, t);
                    t.s * cov.values[i].powf(rp)
                })
                .sum();
            let bound = ins.a.lp_norm(rp).powf(rp) / (2.0 * params.r);
            let flag = if chk.all_pass() { "cover_ok" } else { "cover_fail" };
            Ok(vec![
                row("cover", level, ins.index, e, cov.tents.len() as f64, cov.superlevel.len() as f64, lambda, flag),
                row("cover_packing", level, ins.index, e, packed, bound, if bound > 0.0 { packed / bound } else { 0.0 }, ""),
            ])
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    let ok_cover = rows.iter().filter(|r| r.experiment == "cover").all(|r| r.flags != "cover_fail");
    let pack_max = rows.iter().filter(|r| r.experiment == "cover_packing").map(|r| r.ratio).fold(0.0, f64::max);
    Ok(Report::new("cover", ens.len(), rows, started).detail("packing_max", pack_max).finish(ok_cover && pack_max <= 1.05))
}

fn nearest_index(grid: &TfGrid, t: &Tent) -> usize {
    (0..grid.len())
        .min_by(|&i, &j| {
            let (a, b) = (grid.point(i), grid.point(j));
            let da = (a.y - t.x).abs() + (a.eta - t.xi).abs() + (a.t - t.s).abs();
            let db = (b.y - t.x).abs() + (b.eta - t.xi).abs() + (b.t - t.s).abs();
            da.total_cmp(&db)
        })
        .unwrap_or(0)
}

/// Random tents pairwise `Q⁺`-disjoint, useful for projection experiments.
pub fn random_disjoint_tents(rng: &mut ChaCha8Rng, n: usize, q: f64, g: &GeometryParams, center: f64) -> Vec<Tent> {
    let mut out: Vec<Tent> = Vec::new();
    let mut tries = 0;
    while out.len() < n && tries < 10_000 {
        tries += 1;
        let s = rng.gen_range(1.5..3.0);
        let t = Tent::new(rng.gen_range(-6.0..6.0), center + rng.gen_range(0.0..3.0), s);
        if out.iter().all(|u| q_plus_disjoint(u, &t, q, g)) {
            out.push(t);
        }
    }
    out
}

/// Experiments addressable by name from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Duality,
    Holder,
    Rn,
    Interp,
    Bounds,
    SizeControl,
    Wavepackets,
}

impl Experiment {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "duality" => Self::Duality,
            "holder" => Self::Holder,
            "rn" => Self::Rn,
            "interp" => Self::Interp,
            "bounds" => Self::Bounds,
            "sizecontrol" | "size_control" => Self::SizeControl,
            "wavepackets" => Self::Wavepackets,
            _ => return None,
        })
    }
}

/// Ensemble maxima of one experiment across sizes and refinement levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityPoint {
    pub size: usize,
    pub level: usize,
    pub max: f64,
    pub saturated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stability {
    pub name: String,
    pub points: Vec<StabilityPoint>,
    /// Largest ratio `max(a, b) / min(a, b)` against the first point.
    pub spread: f64,
    pub pass: bool,
}

/// Compare ensemble maxima from several runs; stable when every run is
/// finite and within a factor 2 of the first.
pub fn stability(name: &str, runs: &[(usize, usize, f64, usize)]) -> Stability {
    let base = runs.first().map(|r| r.2).unwrap_or(0.0);
    let spread = runs
        .iter()
        .map(|r| {
            let (a, b) = (r.2.max(base), r.2.min(base));
            if b > 0.0 {
                a / b
            } else if a == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        })
        .fold(1.0, f64::max);
    Stability {
        name: name.to_string(),
        points: runs.iter().map(|&(size, level, max, saturated)| StabilityPoint { size, level, max, saturated }).collect(),
        spread,
        pass: runs.iter().all(|r| r.2.is_finite()) && spread < 2.0,
    }
}

/// Parameters of the mass-projection experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionParams {
    pub r: f64,
    pub q: f64,
    pub channels: usize,
    pub r_prime: f64,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        Self { r: 1.5, q: 4.0, channels: 3, r_prime: 1.5 }
    }
}

/// Random valid configurations for [`mass_project`]: per strip the constant
/// `‖ã‖_{l^{r′}} / avg ‖a‖_{l^{r′}}`, per tent `M̃⁺_{2R}(top) / M⁺_R(top)`.
pub fn verify_mass_projection(geom: &GeometryParams, seed: u64, count: usize, pp: ProjectionParams) -> Result<Report> {
    let started = Instant::now();
    geom.validate()?;
    let axis = CellAxis::uniform(-8.0, 8.0, 16)?;
    let center = 1.0;
    let e = (pp.r, pp.q, pp.r_prime);
    let rows: Vec<Vec<Row>> = par::map_range(count, |index| -> Result<Vec<Row>> {
        let mut rng = instance_rng(seed, index);
        for attempt in 0..1000 {
            let n_tents = rng.gen_range(2..=4);
            let tents = random_disjoint_tents(&mut rng, n_tents, pp.q, geom, center);
            let mut strips: Vec<Strip> = Vec::new();
            let want = rng.gen_range(1..=3);
            while strips.len() < want {
                let d = Strip::new(rng.gen_range(-7.0..7.0), rng.gen_range(0.1..0.6));
                if strips.iter().all(|o| (o.x - d.x).abs() >= o.s + d.s) {
                    strips.push(d);
                }
            }
            // Put one strip inside the reach of the first tent so the projection acts.
            if let Some(t) = tents.first() {
                strips[0] = Strip::new(t.x + rng.gen_range(-1.0..1.0) * pp.r * t.s * 0.5, strips[0].s);
                let first = strips[0];
                strips.retain(|o| *o == first || (o.x - first.x).abs() >= o.s + first.s);
            }
            let k = pp.channels;
            let n = axis.n_cells();
            let mut lv = Vec::with_capacity(n * k);
            for _ in 0..n {
                let mut row: Vec<f64> = (0..k).map(|_| center + rng.gen_range(-0.5..3.0)).collect();
                row.sort_by(f64::total_cmp);
                lv.extend(row);
            }
            let av: Vec<f64> = (0..n * k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = SequenceFunction::new(axis.clone(), k, av, pp.r_prime)?;
            let c = StoppingSequence::new(axis.clone(), k, lv)?;
            let proj = match mass_project(&a, &c, &strips, &tents, pp.r, pp.q, geom) {
                Ok(p) => p,
                Err(Error::Precondition(_)) => continue,
                Err(e) => return Err(e),
            };
            let mut out = Vec::new();
            for (m, d) in strips.iter().enumerate() {
                let cell = proj.a.axis().cell_of(d.x).expect("strip center inside the new cells");
                let lhs = proj.a.channel_norm(cell);
                let mut avg = 0.0;
                for i in 0..n {
                    let (lo, hi) = axis.cell(i);
                    let len = hi.min(d.x + d.s) - lo.max(d.x - d.s);
                    if len > 0.0 {
                        avg += a.channel_norm(i) * len;
                    }
                }
                avg /= 2.0 * d.s;
                let ratio = if avg > 0.0 { lhs / avg } else { 0.0 };
                out.push(row("projection_a", 0, index, e, lhs, avg, ratio, &format!("strip={m};attempt={attempt}")));
            }
            for (l, t) in tents.iter().enumerate() {
                let top = TfPoint::new(t.x, t.xi, t.s);
                let before = aux_at(&a, &c, geom, AuxVariant::ball(pp.r, Sign::Plus), &top)?;
                let after = aux_at(&proj.a, &proj.c, geom, AuxVariant::ball(2.0 * pp.r, Sign::Plus), &top)?;
                if before == 0.0 {
                    out.push(row("projection_m", 0, index, e, after, before, 0.0, &format!("tent={l};skipped")));
                    continue;
                }
                let ratio = after / before;
                let flag = if ratio >= 1.0 - 1e-12 { "literal_ok" } else if ratio >= 0.5 - 1e-12 { "half_ok" } else { "fail" };
                out.push(row("projection_m", 0, index, e, after, before, ratio, &format!("tent={l};{flag}")));
            }
            return Ok(out);
        }
        Err(Error::NonTermination(format!("no valid projection configuration for instance {index}")))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    let a_max = rows.iter().filter(|r| r.experiment == "projection_a").map(|r| r.ratio).fold(0.0, f64::max);
    let m_rows: Vec<&Row> = rows.iter().filter(|r| r.experiment == "projection_m" && !r.flags.contains("skipped")).collect();
    let m_min = m_rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let literal_fail = m_rows.iter().filter(|r| !r.flags.contains("literal_ok")).count();
    let half_fail = m_rows.iter().filter(|r| r.flags.contains("fail")).count();
    Ok(Report::new("projection", count, rows, started)
        .detail("a_constant_max", a_max)
        .detail("m_ratio_min", m_min)
        .detail("literal_failures", literal_fail as f64)
        .detail("half_failures", half_fail as f64)
        .finish(a_max <= 1.0 + 1e-9 && half_fail == 0))
}

/// Stopping density of random extended profiles: `(min ρ, max ρ)` per profile
/// against the bounds `(1 + 2/(L-1))^{±1}`.
pub fn verify_stopping_density(seed: u64, count: usize, ls: &[f64], samples: usize) -> Result<Report> {
    let started = Instant::now();
    if ls.is_empty() || samples == 0 {
        return Err(Error::Argument("stopping density needs Lipschitz parameters and samples".into()));
    }
    let rows: Vec<Row> = par::map_range(count, |index| -> Result<Row> {
        let mut rng = instance_rng(seed, index);
        let l = ls[index % ls.len()];
        let m = rng.gen_range(4..=24);
        let mut ys: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.99..0.99)).collect();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let sigma: Vec<f64> = ys.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
        let ext = lipschitz_extend(&PartialProfile { x: 0.0, s: 1.0, ys, sigma }, l)?;
        let nodes: Vec<f64> = (0..=1600).map(|i| -8.0 + 16.0 * i as f64 / 1600.0).collect();
        let pl = ext.sampled(&nodes)?;
        let zs: Vec<f64> = (0..samples).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let rho: Vec<f64> = zs.iter().map(|&z| stopping_density(&pl, z)).collect::<Result<_>>()?;
        let (lo, hi) = (rho.iter().copied().fold(f64::INFINITY, f64::min), rho.iter().copied().fold(0.0, f64::max));
        let bound = 1.0 + 2.0 / (l - 1.0);
        let inside = lo > 1.0 / bound && hi < bound;
        let worst = (hi / bound).max(1.0 / (bound * lo));
        Ok(row("stopping_density", 0, index, (l, 0.0, 0.0), lo, hi, worst, if inside { "inside" } else { "outside" }))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let ok = rows.iter().all(|r| r.flags == "inside");
    Ok(Report::new("stopping_density", count, rows, started).finish(ok))
}
