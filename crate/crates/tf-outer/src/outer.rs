//! Outer measures from greedy covers, outer and iterated outer Lebesgue
//! quasi-norms, the superlevel covering, the mass projection, Lipschitz
//! scale profiles and the stopping-time density.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::embeddings::{aux_at, AuxVariant, CellAxis, EmbeddedField, SequenceFunction, Sign, StoppingSequence};
use crate::error::{Error, Result};
use crate::geometry::{in_enlargement, q_plus_disjoint, GeometryParams, Strip, Tent, TfGrid};
use crate::par;
use crate::sizes::{generated_size_abs, index_tents, local_iter_size_abs, local_size_abs, SizeKind, SizeSpec, TentPoints};

/// Geometric `λ` ladder below the top value: `λ_j = top·ratio^{-(j+1/2)}`,
/// `j < levels`, the midpoints in `log λ` of `[top·ratio^{-levels}, top]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ladder {
    pub ratio: f64,
    pub levels: usize,
}

impl Default for Ladder {
    fn default() -> Self {
        Self { ratio: 2.0, levels: 20 }
    }
}

impl Ladder {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 1.0) || self.levels == 0 {
            return Err(Error::Argument(format!("ladder needs ratio > 1 and at least one level, got {self:?}")));
        }
        Ok(())
    }

    pub fn lambdas(&self, top: f64) -> Vec<f64> {
        (0..self.levels).map(|j| top * self.ratio.powf(-(j as f64 + 0.5))).collect()
    }

    pub fn dlog(&self) -> f64 {
        self.ratio.ln()
    }

    fn floor(&self, top: f64) -> f64 {
        top * self.ratio.powf(-(self.levels as f64 - 0.5))
    }
}

/// A finite collection of generating sets with total premeasure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover<T> {
    pub sets: Vec<T>,
    pub premeasure: f64,
}

impl Cover<Tent> {
    pub fn tents(sets: Vec<Tent>) -> Self {
        let premeasure = sets.iter().map(|t| t.s).sum();
        Self { sets, premeasure }
    }
}

impl Cover<Strip> {
    pub fn strips(sets: Vec<Strip>) -> Self {
        let premeasure = sets.iter().map(|t| t.s).sum();
        Self { sets, premeasure }
    }
}

/// Record of one greedy run: after step `n` the set `selected[n]` has been
/// removed, the remaining size is `remaining[n]`, the cover premeasure is
/// `cumulative[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    pub initial: f64,
    pub selected: Vec<usize>,
    pub remaining: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub saturated: bool,
}

impl GreedyTrace {
    /// `(measure, number of sets, saturated)` for the super-level `> λ`.
    pub fn measure_at(&self, lambda: f64) -> (f64, usize, bool) {
        if self.initial <= lambda {
            return (0.0, 0, false);
        }
        for (n, &r) in self.remaining.iter().enumerate() {
            if r <= lambda {
                return (self.cumulative[n], n + 1, false);
            }
        }
        (self.cumulative.last().copied().unwrap_or(0.0), self.selected.len(), true)
    }
}

pub(crate) struct GreedyProblem<'a> {
    pub n: usize,
    pub size: &'a (dyn Fn(&[f64], usize) -> f64 + Sync),
    pub zero: &'a dyn Fn(usize, &mut [f64]),
    pub overlaps: &'a (dyn Fn(usize, usize) -> bool + Sync),
    pub order: &'a dyn Fn(usize, usize) -> Ordering,
    pub premeasure: &'a dyn Fn(usize) -> f64,
}

/// Repeatedly remove the set of largest local size (ties by `order`) until
/// the largest remaining size is at most `floor`.
pub(crate) fn greedy_run(prob: &GreedyProblem<'_>, abs: &mut [f64], floor: f64) -> GreedyTrace {
    let n = prob.n;
    let mut sizes = {
        let a: &[f64] = abs;
        par::map_range(n, |i| (prob.size)(a, i))
    };
    let mut used = vec![false; n];
    let initial = sizes.iter().copied().fold(0.0, f64::max);
    let mut trace = GreedyTrace { initial, selected: vec![], remaining: vec![], cumulative: vec![], saturated: false };
    let mut cum = 0.0;
    let mut current = initial;
    while current > floor {
        let mut best: Option<usize> = None;
        for i in 0..n {
            if used[i] {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(b) => {
                    let better = sizes[i] > sizes[b] || (sizes[i] == sizes[b] && (prob.order)(i, b) == Ordering::Less);
                    Some(if better { i } else { b })
                }
            };
        }
        let Some(b) = best else {
            trace.saturated = true;
            break;
        };
        used[b] = true;
        cum += (prob.premeasure)(b);
        (prob.zero)(b, abs);
        sizes[b] = 0.0;
        let dirty: Vec<usize> = (0..n).filter(|&j| !used[j] && sizes[j] > 0.0 && (prob.overlaps)(b, j)).collect();
        let fresh = {
            let a: &[f64] = abs;
            par::map_slice(&dirty, |&j| (prob.size)(a, j))
        };
        for (&j, v) in dirty.iter().zip(fresh) {
            sizes[j] = v;
        }
        current = (0..n).filter(|&j| !used[j]).map(|j| sizes[j]).fold(0.0, f64::max);
        trace.selected.push(b);
        trace.remaining.push(current);
        trace.cumulative.push(cum);
        if used.iter().all(|&u| u) && current > floor {
            trace.saturated = true;
            break;
        }
    }
    trace
}

fn tent_problem<'a>(
    family: &'a [&'a TentPoints],
    kind: SizeKind,
) -> (
    impl Fn(&[f64], usize) -> f64 + Sync + 'a,
    impl Fn(usize, &mut [f64]) + 'a,
    impl Fn(usize, usize) -> bool + Sync + 'a,
    impl Fn(usize, usize) -> Ordering + 'a,
    impl Fn(usize) -> f64 + 'a,
) {
    (
        move |a: &[f64], i: usize| local_size_abs(a, family[i], kind),
        move |i: usize, a: &mut [f64]| {
            for &(idx, _) in &family[i].points {
                a[idx] = 0.0;
            }
        },
        move |i: usize, j: usize| {
            let (u, v) = (&family[i].tent, &family[j].tent);
            (u.x - v.x).abs() < u.s + v.s
        },
        move |i: usize, j: usize| family[i].tent.tie_order(&family[j].tent),
        move |i: usize| family[i].tent.s,
    )
}

/// Greedy trace of a nonnegative field over a tent family.
pub fn greedy_tents(abs: &[f64], family: &[&TentPoints], kind: SizeKind, floor: f64) -> GreedyTrace {
    let (size, zero, overlaps, order, pre) = tent_problem(family, kind);
    let prob = GreedyProblem { n: family.len(), size: &size, zero: &zero, overlaps: &overlaps, order: &order, premeasure: &pre };
    let mut work = abs.to_vec();
    greedy_run(&prob, &mut work, floor)
}

/// Greedy upper bound for `μ(‖G‖_S > λ)` and its cover.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperLevel {
    pub measure: f64,
    pub cover: Cover<Tent>,
    pub saturated: bool,
}

pub fn superlevel_measure(field: &EmbeddedField, spec: &SizeSpec, lambda: f64, candidates: &[Tent]) -> Result<SuperLevel> {
    if !(lambda > 0.0) {
        return Err(Error::Argument(format!("lambda must be positive, got {lambda}")));
    }
    let idx = index_tents(&field.grid, candidates, &spec.geom);
    let refs: Vec<&TentPoints> = idx.iter().collect();
    let trace = greedy_tents(&field.abs(), &refs, spec.kind, lambda);
    let (measure, n, saturated) = trace.measure_at(lambda);
    let sets = trace.selected[..n].iter().map(|&i| candidates[i]).collect();
    Ok(SuperLevel { measure, cover: Cover::tents(sets), saturated })
}

/// Ladder of super-level measures and the resulting quasi-norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub p: f64,
    pub top: f64,
    pub lambdas: Vec<f64>,
    pub measures: Vec<f64>,
    pub cover_sizes: Vec<usize>,
    /// Running strong-norm quadrature `Σ_{i≤j} p λ_i^p μ(λ_i) Δlog λ`.
    pub cumulative: Vec<f64>,
    pub strong: f64,
    pub weak: f64,
    pub value: f64,
    pub is_weak: bool,
    pub saturated: bool,
}

impl NormReport {
    fn zero(p: f64, is_weak: bool) -> Self {
        Self {
            p,
            top: 0.0,
            lambdas: vec![],
            measures: vec![],
            cover_sizes: vec![],
            cumulative: vec![],
            strong: 0.0,
            weak: 0.0,
            value: 0.0,
            is_weak,
            saturated: false,
        }
    }

    fn from_measures(p: f64, top: f64, ladder: &Ladder, meas: Vec<(f64, usize, bool)>, is_weak: bool) -> Self {
        let lambdas = ladder.lambdas(top);
        let mut cumulative = Vec::with_capacity(lambdas.len());
        let mut acc = 0.0;
        let mut weak = 0.0f64;
        for (l, m) in lambdas.iter().zip(&meas) {
            acc += p * l.powf(p) * m.0 * ladder.dlog();
            cumulative.push(acc);
            weak = weak.max(l * m.0.powf(1.0 / p));
        }
        let strong = acc.powf(1.0 / p);
        Self {
            p,
            top,
            measures: meas.iter().map(|m| m.0).collect(),
            cover_sizes: meas.iter().map(|m| m.1).collect(),
            saturated: meas.iter().any(|m| m.2),
            lambdas,
            cumulative,
            strong,
            weak,
            value: if is_weak { weak } else { strong },
            is_weak,
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) {
        return Err(Error::Argument(format!("exponent must be positive, got {p}")));
    }
    Ok(())
}

/// Outer `L^p(S)` (or weak `L^{p,∞}(S)`) from a single greedy run.
pub(crate) fn outer_lp_abs(
    abs: &[f64],
    family: &[&TentPoints],
    kind: SizeKind,
    p: f64,
    ladder: &Ladder,
    weak: bool,
) -> NormReport {
    let top = generated_size_abs(abs, family, kind);
    if top == 0.0 {
        return NormReport::zero(p, weak);
    }
    if p.is_infinite() {
        let mut r = NormReport::zero(p, weak);
        r.top = top;
        r.strong = top;
        r.weak = top;
        r.value = top;
        return r;
    }
    let trace = greedy_tents(abs, family, kind, ladder.floor(top));
    let meas = ladder.lambdas(top).iter().map(|&l| trace.measure_at(l)).collect();
    NormReport::from_measures(p, top, ladder, meas, weak)
}

pub fn outer_lp(field: &EmbeddedField, spec: &SizeSpec, p: f64, ladder: &Ladder, weak: bool, candidates: &[Tent]) -> Result<NormReport> {
    check_p(p)?;
    ladder.validate()?;
    if candidates.is_empty() {
        return Err(Error::Argument("empty candidate family".into()));
    }
    let idx = index_tents(&field.grid, candidates, &spec.geom);
    let refs: Vec<&TentPoints> = idx.iter().collect();
    Ok(outer_lp_abs(&field.abs(), &refs, spec.kind, p, ladder, weak))
}

pub const EXACT_MAX: usize = 16;

/// For every subset of a small family: `(premeasure, residual generated size, mask)`.
pub fn exact_profile(abs: &[f64], family: &[&TentPoints], kind: SizeKind) -> Result<Vec<(f64, f64, u32)>> {
    let n = family.len();
    if n > EXACT_MAX {
        return Err(Error::Argument(format!("exact solver handles at most {EXACT_MAX} candidates, got {n}")));
    }
    Ok(par::map_range(1usize << n, |mask| {
        let mut work = abs.to_vec();
        let mut pre = 0.0;
        for (i, tp) in family.iter().enumerate() {
            if mask & (1 << i) != 0 {
                pre += tp.tent.s;
                for &(idx, _) in &tp.points {
                    work[idx] = 0.0;
                }
            }
        }
        let residual = family.iter().map(|tp| local_size_abs(&work, tp, kind)).fold(0.0, f64::max);
        (pre, residual, mask as u32)
    }))
}

/// Least premeasure over subsets whose removal brings the size to at most `λ`.
pub fn exact_measure(profile: &[(f64, f64, u32)], lambda: f64) -> (f64, u32) {
    let mut best = (f64::INFINITY, 0u32);
    for &(pre, res, mask) in profile {
        if res <= lambda && (pre < best.0 || (pre == best.0 && mask < best.1)) {
            best = (pre, mask);
        }
    }
    best
}

/// Outer `L^p` with the exact super-level measure over a small family.
pub fn outer_lp_exact(field: &EmbeddedField, spec: &SizeSpec, p: f64, ladder: &Ladder, weak: bool, candidates: &[Tent]) -> Result<NormReport> {
    check_p(p)?;
    ladder.validate()?;
    let idx = index_tents(&field.grid, candidates, &spec.geom);
    let refs: Vec<&TentPoints> = idx.iter().collect();
    let abs = field.abs();
    let profile = exact_profile(&abs, &refs, spec.kind)?;
    let top = profile.iter().find(|e| e.2 == 0).map(|e| e.1).unwrap_or(0.0);
    if top == 0.0 {
        return Ok(NormReport::zero(p, weak));
    }
    if p.is_infinite() {
        let mut r = NormReport::zero(p, weak);
        (r.top, r.strong, r.weak, r.value) = (top, top, top, top);
        return Ok(r);
    }
    let meas = ladder
        .lambdas(top)
        .iter()
        .map(|&l| {
            let (m, mask) = exact_measure(&profile, l);
            (m, mask.count_ones() as usize, false)
        })
        .collect();
    Ok(NormReport::from_measures(p, top, ladder, meas, weak))
}

/// Iterated outer `L^p 𝕃^q(S)`: greedy over strips against the localized
/// outer `L^q(S)` size, each of which is itself a greedy tent computation.
#[allow(clippy::too_many_arguments)]
pub fn iter_lp_lq(
    field: &EmbeddedField,
    p: f64,
    q: f64,
    spec: &SizeSpec,
    strips: &[Strip],
    tents: &[Tent],
    ladder: &Ladder,
    weak: bool,
) -> Result<NormReport> {
    check_p(p)?;
    check_p(q)?;
    ladder.validate()?;
    if strips.is_empty() || tents.is_empty() {
        return Err(Error::Argument("iterated norm needs nonempty strip and tent families".into()));
    }
    let grid = &field.grid;
    let idx = index_tents(grid, tents, &spec.geom);
    let refs: Vec<&TentPoints> = idx.iter().collect();
    let strip_pts: Vec<Vec<usize>> = par::map_slice(strips, |s| grid.strip_points(s));
    let kind = spec.kind;
    let size = |a: &[f64], i: usize| local_iter_size_abs(a, &strips[i], &strip_pts[i], q, &refs, kind, ladder);
    let zero = |i: usize, a: &mut [f64]| {
        for &k in &strip_pts[i] {
            a[k] = 0.0;
        }
    };
    let overlaps = |i: usize, j: usize| (strips[i].x - strips[j].x).abs() < strips[i].s + strips[j].s;
    let order = |i: usize, j: usize| strips[i].tie_order(&strips[j]);
    let pre = |i: usize| strips[i].s;
    let prob = GreedyProblem { n: strips.len(), size: &size, zero: &zero, overlaps: &overlaps, order: &order, premeasure: &pre };
    let abs = field.abs();
    let top = {
        let a: &[f64] = &abs;
        par::map_range(strips.len(), |i| size(a, i)).into_iter().fold(0.0, f64::max)
    };
    if top == 0.0 {
        return Ok(NormReport::zero(p, weak));
    }
    if p.is_infinite() {
        let mut r = NormReport::zero(p, weak);
        (r.top, r.strong, r.weak, r.value) = (top, top, top, top);
        return Ok(r);
    }
    let mut work = abs;
    let trace = greedy_run(&prob, &mut work, ladder.floor(top));
    let meas = ladder.lambdas(top).iter().map(|&l| trace.measure_at(l)).collect();
    Ok(NormReport::from_measures(p, top, ladder, meas, weak))
}

/// Output of the superlevel covering for `M⁺_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperlevelCover {
    pub tents: Vec<Tent>,
    /// Grid indices of the discrete super-level set `{M⁺_R ≥ λ}`.
    pub superlevel: Vec<usize>,
    /// `M⁺_R` on every grid point.
    pub values: Vec<f64>,
}

/// Parameters of the covering selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverParams {
    pub r: f64,
    pub q: f64,
    /// Defaults to `α⁺`.
    pub r0: Option<f64>,
}

impl CoverParams {
    pub fn validate(&self, g: &GeometryParams) -> Result<f64> {
        let r0 = self.r0.unwrap_or(g.alpha_plus);
        if !(r0 > 0.0) {
            return Err(Error::Precondition(format!("R0 must be positive, got {r0}")));
        }
        if !(self.q > self.r && self.r > r0) {
            return Err(Error::Precondition(format!("Q > R > R0 violated: Q={}, R={}, R0={r0}", self.q, self.r)));
        }
        if !(g.alpha_minus <= -g.alpha_plus / r0) {
            return Err(Error::Precondition(format!(
                "alpha- <= -alpha+/R0 violated: alpha-={}, alpha+={}, R0={r0}",
                g.alpha_minus, g.alpha_plus
            )));
        }
        Ok(r0)
    }
}

/// Select tops of `{M⁺_R ≥ λ}` in order of decreasing scale, skipping points
/// already inside the `3Q²` enlargement of a selected tent.
pub fn cover_superlevel_aux(
    a: &SequenceFunction,
    c: &StoppingSequence,
    lambda: f64,
    params: CoverParams,
    grid: &TfGrid,
    g: &GeometryParams,
) -> Result<SuperlevelCover> {
    params.validate(g)?;
    if !(lambda > 0.0) {
        return Err(Error::Argument(format!("lambda must be positive, got {lambda}")));
    }
    let variant = AuxVariant::ball(params.r, Sign::Plus);
    let field = crate::embeddings::embed_aux(a, c, g, grid, variant)?;
    let values: Vec<f64> = field.values.iter().map(|v| v.re).collect();
    let mut superlevel: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= lambda).collect();
    let tent_of = |i: usize| {
        let p = grid.point(i);
        Tent::new(p.y, p.eta, p.t)
    };
    superlevel.sort_by(|&i, &j| tent_of(i).tie_order(&tent_of(j)));
    let enl = 3.0 * params.q * params.q;
    let mut covered = vec![false; superlevel.len()];
    let mut tents: Vec<Tent> = Vec::new();
    let cap = superlevel.len();
    let mut iterations = 0usize;
    let mut next = 0usize;
    loop {
        while next < superlevel.len() && covered[next] {
            next += 1;
        }
        if next == superlevel.len() {
            break;
        }
        iterations += 1;
        if iterations > cap {
            return Err(Error::NonTermination(format!("covering did not terminate within {cap} selections")));
        }
        let top = tent_of(superlevel[next]);
        tents.push(top);
        let flags = par::map_range(superlevel.len(), |k| covered[k] || in_enlargement(&top, enl, &grid.point(superlevel[k]), g));
        covered = flags;
        if !covered[next] {
            return Err(Error::NonTermination("selected top not covered by its own enlargement".into()));
        }
    }
    Ok(SuperlevelCover { tents, superlevel, values })
}

/// Checks of the covering conclusions: pairwise disjointness, tops in the
/// super-level set, and coverage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoverCheck {
    pub pairs: usize,
    pub disjoint_pairs: usize,
    pub tops: usize,
    pub tops_in_set: usize,
    pub points: usize,
    pub covered_points: usize,
}

impl CoverCheck {
    pub fn all_pass(&self) -> bool {
        self.pairs == self.disjoint_pairs && self.tops == self.tops_in_set && self.points == self.covered_points
    }
}

pub fn check_cover(
    cover: &SuperlevelCover,
    a: &SequenceFunction,
    c: &StoppingSequence,
    lambda: f64,
    params: CoverParams,
    grid: &TfGrid,
    g: &GeometryParams,
) -> Result<CoverCheck> {
    let n = cover.tents.len();
    let mut disjoint = 0;
    for i in 0..n {
        for j in i + 1..n {
            if q_plus_disjoint(&cover.tents[i], &cover.tents[j], params.q, g) {
                disjoint += 1;
            }
        }
    }
    let variant = AuxVariant::ball(params.r, Sign::Plus);
    let mut tops_in = 0;
    for t in &cover.tents {
        if aux_at(a, c, g, variant, &crate::geometry::TfPoint::new(t.x, t.xi, t.s))? >= lambda {
            tops_in += 1;
        }
    }
    let enl = 3.0 * params.q * params.q;
    let covered = cover
        .superlevel
        .iter()
        .filter(|&&i| {
            let p = grid.point(i);
            cover.tents.iter().any(|t| in_enlargement(t, enl, &p, g))
        })
        .count();
    Ok(CoverCheck {
        pairs: n * n.saturating_sub(1) / 2,
        disjoint_pairs: disjoint,
        tops: n,
        tops_in_set: tops_in,
        points: cover.superlevel.len(),
        covered_points: covered,
    })
}

/// Projected channel data produced by [`mass_project`].
#[derive(Debug, Clone, PartialEq)]
pub struct MassProjection {
    pub a: SequenceFunction,
    pub c: StoppingSequence,
}

fn ball_average(axis: &CellAxis, vals: &[f64], center: f64, radius: f64) -> f64 {
    let (blo, bhi) = (center - radius, center + radius);
    let mut acc = 0.0;
    for (i, &v) in vals.iter().enumerate() {
        if v != 0.0 {
            let (lo, hi) = axis.cell(i);
            let len = hi.min(bhi) - lo.max(blo);
            if len > 0.0 {
                acc += v * len;
            }
        }
    }
    acc / (2.0 * radius)
}

/// Replace the channel data inside each strip's ball by per-tent averages,
/// with levels moved to the tent frequencies.
pub fn mass_project(
    a: &SequenceFunction,
    c: &StoppingSequence,
    strips: &[Strip],
    tents: &[Tent],
    r: f64,
    q: f64,
    g: &GeometryParams,
) -> Result<MassProjection> {
    if a.axis() != c.axis() || a.k() != c.k() {
        return Err(Error::Argument("a and c must share cells and channel count".into()));
    }
    if !(q > 2.0 * r && r > 1.0) {
        return Err(Error::Precondition(format!("Q > 2R > 2 violated: Q={q}, R={r}")));
    }
    for i in 0..strips.len() {
        for j in i + 1..strips.len() {
            if (strips[i].x - strips[j].x).abs() < strips[i].s + strips[j].s {
                return Err(Error::Precondition(format!("strips pairwise disjoint violated by strips {i} and {j}")));
            }
        }
    }
    for i in 0..tents.len() {
        for j in i + 1..tents.len() {
            if !q_plus_disjoint(&tents[i], &tents[j], q, g) {
                return Err(Error::Precondition(format!("tents pairwise Q+-disjoint violated by tents {i} and {j}")));
            }
        }
    }
    for (l, t) in tents.iter().enumerate() {
        for (m, d) in strips.iter().enumerate() {
            if (t.x - d.x).abs() + t.s <= 3.0 * d.s && t.s <= 3.0 * d.s {
                return Err(Error::Precondition(format!("tent {l} contained in tripled strip {m}")));
            }
            let meets = (t.x - d.x).abs() < r * t.s + d.s;
            let nested = (t.x - d.x).abs() + d.s <= 2.0 * r * t.s && d.s <= 2.0 * r * t.s;
            if meets && !nested {
                return Err(Error::Precondition(format!("strip nesting violated: strip {m} meets tent {l} at scale R but is not inside D(x, 2Rs)")));
            }
        }
    }
    if strips.is_empty() {
        return Ok(MassProjection { a: a.clone(), c: c.clone() });
    }

    let mut sorted: Vec<Tent> = tents.to_vec();
    sorted.sort_by(|u, v| u.xi.total_cmp(&v.xi).then(u.tie_order(v)));
    let l_count = sorted.len();
    let k_old = a.k();
    let k_new = k_old.max(l_count).max(1);
    let rp = a.r_prime;

    // Channel averages per strip and tent.
    let axis = a.axis();
    let mut avg = vec![vec![0.0; l_count]; strips.len()];
    for (m, d) in strips.iter().enumerate() {
        for (k, t) in sorted.iter().enumerate() {
            if (t.x - d.x).abs() >= r * t.s + d.s {
                continue;
            }
            let vals: Vec<f64> = (0..axis.n_cells())
                .map(|cell| {
                    let s: f64 = (0..k_old)
                        .filter(|&j| g.in_theta_plus(t.s * (t.xi - c.level(cell, j))))
                        .map(|j| a.value(cell, j).abs().powf(rp))
                        .sum();
                    s.powf(1.0 / rp)
                })
                .collect();
            avg[m][k] = ball_average(axis, &vals, d.x, d.s);
        }
    }

    let mut edges: Vec<f64> = axis.edges().to_vec();
    for d in strips {
        edges.push(d.x - d.s);
        edges.push(d.x + d.s);
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let new_axis = CellAxis::new(edges)?;
    let mut av = Vec::with_capacity(new_axis.n_cells() * k_new);
    let mut cv = Vec::with_capacity(new_axis.n_cells() * k_new);
    for cell in 0..new_axis.n_cells() {
        let (lo, hi) = new_axis.cell(cell);
        let mid = 0.5 * (lo + hi);
        if let Some(m) = strips.iter().position(|d| (mid - d.x).abs() < d.s) {
            for k in 0..k_new {
                if k < l_count {
                    av.push(avg[m][k]);
                    cv.push(sorted[k].xi);
                } else {
                    av.push(0.0);
                    cv.push(sorted[l_count - 1].xi);
                }
            }
        } else {
            let old = axis.cell_of(mid);
            for k in 0..k_new {
                match old {
                    Some(oc) if k < k_old => {
                        av.push(a.value(oc, k));
                        cv.push(c.level(oc, k));
                    }
                    _ => {
                        av.push(0.0);
                        cv.push(f64::INFINITY);
                    }
                }
            }
        }
    }
    Ok(MassProjection {
        a: SequenceFunction::new(new_axis.clone(), k_new, av, rp)?,
        c: StoppingSequence::new(new_axis, k_new, cv)?,
    })
}

/// Piecewise-linear function with constant extension beyond the end nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != vs.len() || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("piecewise-linear nodes must be nonempty, matched and increasing".into()));
        }
        if xs.iter().chain(&vs).any(|v| !v.is_finite()) {
            return Err(Error::Argument("piecewise-linear data must be finite".into()));
        }
        Ok(Self { xs, vs })
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.vs)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.vs[0];
        }
        if x >= self.xs[n - 1] {
            return self.vs[n - 1];
        }
        let i = self.xs.partition_point(|&e| e <= x) - 1;
        let u = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.vs[i] + u * (self.vs[i + 1] - self.vs[i])
    }

    pub fn lipschitz(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.vs.windows(2))
            .map(|(x, v)| ((v[1] - v[0]) / (x[1] - x[0])).abs())
            .fold(0.0, f64::max)
    }

    /// Solve `x + sign·σ(x) = z` for a strictly increasing left side.
    fn solve_shift(&self, sign: f64, z: f64) -> f64 {
        let n = self.xs.len();
        let w = |i: usize| self.xs[i] + sign * self.vs[i];
        if z <= w(0) {
            return self.xs[0] - (w(0) - z);
        }
        if z >= w(n - 1) {
            return self.xs[n - 1] + (z - w(n - 1));
        }
        let (mut lo, mut hi) = (0usize, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if w(mid) <= z {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u = (z - w(lo)) / (w(hi) - w(lo));
        self.xs[lo] + u * (self.xs[hi] - self.xs[lo])
    }

    /// `∫_a^b dx / (2σ(x))` in closed form per linear piece.
    fn half_reciprocal_integral(&self, a: f64, b: f64) -> f64 {
        let mut cuts = vec![a];
        cuts.extend(self.xs.iter().copied().filter(|&x| x > a && x < b));
        cuts.push(b);
        cuts.windows(2)
            .map(|w| {
                let (sa, sb) = (self.eval(w[0]), self.eval(w[1]));
                let len = w[1] - w[0];
                let d = sb - sa;
                if (d / sa).abs() < 1e-9 {
                    len / (sa + sb)
                } else {
                    len * (d / sa).ln_1p() / (2.0 * d)
                }
            })
            .sum()
    }
}

/// `ρ_σ(z) = ∫ (2σ(x))⁻¹ 1_{|z-x| < σ(x)} dx` for positive `σ` with Lipschitz constant below 1.
pub fn stopping_density(sigma: &PiecewiseLinear, z: f64) -> Result<f64> {
    let lip = sigma.lipschitz();
    if lip >= 1.0 {
        return Err(Error::Argument(format!("Lipschitz constant must be below 1, got {lip}")));
    }
    if sigma.vs.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Argument("scale function must be positive".into()));
    }
    // {x : x - σ(x) < z < x + σ(x)} is the interval between these roots.
    let lo = sigma.solve_shift(1.0, z);
    let hi = sigma.solve_shift(-1.0, z);
    if hi <= lo {
        return Ok(0.0);
    }
    Ok(sigma.half_reciprocal_integral(lo, hi))
}

/// A scale profile `σ` known on grid points `y_i ∈ B_s(x)`, values in `[0, s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialProfile {
    pub x: f64,
    pub s: f64,
    pub ys: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// `σ̃(y) = min(2s, min_i max(σ(y_i), |y - y_i|/L))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedProfile {
    pub base: PartialProfile,
    pub l: f64,
}

impl ExtendedProfile {
    pub fn eval(&self, y: f64) -> f64 {
        let b = &self.base;
        let inner = b
            .ys
            .iter()
            .zip(&b.sigma)
            .map(|(&yi, &si)| si.max((y - yi).abs() / self.l))
            .fold(f64::INFINITY, f64::min);
        inner.min(2.0 * b.s)
    }

    /// Sample onto nodes as a piecewise-linear function.
    pub fn sampled(&self, nodes: &[f64]) -> Result<PiecewiseLinear> {
        PiecewiseLinear::new(nodes.to_vec(), nodes.iter().map(|&y| self.eval(y)).collect())
    }
}

pub fn lipschitz_extend(profile: &PartialProfile, l: f64) -> Result<ExtendedProfile> {
    if !(l > 2.0) {
        return Err(Error::Argument(format!("Lipschitz parameter L must exceed 2, got {l}")));
    }
    let p = profile;
    if p.ys.is_empty() || p.ys.len() != p.sigma.len() || !(p.s > 0.0) {
        return Err(Error::Argument("profile needs matched nonempty samples and s > 0".into()));
    }
    if p.ys.iter().any(|&y| (y - p.x).abs() >= p.s) || p.sigma.iter().any(|&v| !(0.0..=p.s).contains(&v)) {
        return Err(Error::Argument("profile samples must lie in B_s(x) with values in [0, s]".into()));
    }
    Ok(ExtendedProfile { base: p.clone(), l })
}
