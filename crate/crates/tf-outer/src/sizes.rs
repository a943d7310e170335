//! Local sizes over tents and the localized iterated sizes over strips.

use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddedField;
use crate::error::{Error, Result};
use crate::geometry::{GeometryParams, PointClass, Strip, Tent, TfGrid};
use crate::outer::{outer_lp_abs, Ladder};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeKind {
    /// `sup_T |G|`.
    SInf,
    /// `s⁻¹ ∫_{T^(i)} |G|`.
    S1Interior,
    /// `(s⁻¹ ∫_T |G|²)^{1/2}`.
    S2Full,
    /// `(s⁻¹ ∫_{T^(e)} |G|²)^{1/2}`.
    S2Exterior,
    /// `S²(T^(e)) + S^∞(T)`.
    SEnergy,
    /// `S²(T) + S¹(T^(i))`.
    SMass,
    /// `s⁻¹ ∫_T |G|`.
    S1Plain,
}

impl SizeKind {
    pub const ALL: [SizeKind; 7] = [
        SizeKind::SInf,
        SizeKind::S1Interior,
        SizeKind::S2Full,
        SizeKind::S2Exterior,
        SizeKind::SEnergy,
        SizeKind::SMass,
        SizeKind::S1Plain,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeSpec {
    pub kind: SizeKind,
    pub geom: GeometryParams,
}

impl SizeSpec {
    pub fn new(kind: SizeKind, geom: GeometryParams) -> Self {
        Self { kind, geom }
    }
}

/// Grid points of a tent with their class, computed once and reused.
#[derive(Debug, Clone, PartialEq)]
pub struct TentPoints {
    pub tent: Tent,
    pub points: Vec<(usize, PointClass)>,
    /// Quadrature weight of each entry of `points`.
    pub weights: Vec<f64>,
}

impl TentPoints {
    pub fn new(grid: &TfGrid, tent: Tent, g: &GeometryParams) -> Self {
        let points = grid.tent_points(&tent, g);
        let weights = points.iter().map(|&(i, _)| grid.weight_at(i)).collect();
        Self { tent, points, weights }
    }
}

pub fn index_tents(grid: &TfGrid, tents: &[Tent], g: &GeometryParams) -> Vec<TentPoints> {
    par::map_slice(tents, |t| TentPoints::new(grid, *t, g))
}

/// Local size of a nonnegative field `abs` (one value per grid point).
pub fn local_size_abs(abs: &[f64], tp: &TentPoints, kind: SizeKind) -> f64 {
    let s = tp.tent.s;
    let mut sup = 0.0f64;
    let (mut l1_int, mut l1_all, mut l2_all, mut l2_ext) = (0.0, 0.0, 0.0, 0.0);
    for (&(idx, class), &w) in tp.points.iter().zip(&tp.weights) {
        let v = abs[idx];
        if v == 0.0 {
            continue;
        }
        sup = sup.max(v);
        l1_all += w * v;
        l2_all += w * v * v;
        match class {
            PointClass::Interior => l1_int += w * v,
            PointClass::Exterior => l2_ext += w * v * v,
            PointClass::Outside => {}
        }
    }
    match kind {
        SizeKind::SInf => sup,
        SizeKind::S1Interior => l1_int / s,
        SizeKind::S2Full => (l2_all / s).sqrt(),
        SizeKind::S2Exterior => (l2_ext / s).sqrt(),
        SizeKind::SEnergy => (l2_ext / s).sqrt() + sup,
        SizeKind::SMass => (l2_all / s).sqrt() + l1_int / s,
        SizeKind::S1Plain => l1_all / s,
    }
}

fn check_grid(field: &EmbeddedField, grid: &TfGrid) -> Result<()> {
    if &field.grid != grid {
        return Err(Error::Grid("field and size computation use different grids".into()));
    }
    Ok(())
}

pub fn local_size(field: &EmbeddedField, tent: &Tent, spec: &SizeSpec) -> Result<f64> {
    let tp = TentPoints::new(&field.grid, *tent, &spec.geom);
    Ok(local_size_abs(&field.abs(), &tp, spec.kind))
}

/// `sup_{T ∈ family} local size`.
pub fn generated_size(field: &EmbeddedField, family: &[Tent], spec: &SizeSpec) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::Argument("generated size over an empty tent family".into()));
    }
    let idx = index_tents(&field.grid, family, &spec.geom);
    let refs: Vec<&TentPoints> = idx.iter().collect();
    Ok(generated_size_abs(&field.abs(), &refs, spec.kind))
}

pub fn generated_size_abs(abs: &[f64], family: &[&TentPoints], kind: SizeKind) -> f64 {
    par::map_slice(family, |tp| local_size_abs(abs, tp, kind)).into_iter().fold(0.0, f64::max)
}

/// `‖G 1_D‖_{L^q(S)} / s^{1/q}`; for `q = ∞` the generated size of `G 1_D`.
pub fn local_iter_size(field: &EmbeddedField, strip: &Strip, q: f64, spec: &SizeSpec, tents: &[Tent], ladder: &Ladder) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::Argument(format!("inner exponent must be positive, got {q}")));
    }
    let grid = &field.grid;
    check_grid(field, grid)?;
    let idx = index_tents(grid, tents, &spec.geom);
    let strip_pts = grid.strip_points(strip);
    let abs = field.abs();
    let refs: Vec<&TentPoints> = idx.iter().collect();
    Ok(local_iter_size_abs(&abs, strip, &strip_pts, q, &refs, spec.kind, ladder))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn local_iter_size_abs(
    abs: &[f64],
    strip: &Strip,
    strip_pts: &[usize],
    q: f64,
    tents: &[&TentPoints],
    kind: SizeKind,
    ladder: &Ladder,
) -> f64 {
    let mut restricted = vec![0.0; abs.len()];
    let mut any = false;
    for &i in strip_pts {
        restricted[i] = abs[i];
        any |= abs[i] != 0.0;
    }
    if !any {
        return 0.0;
    }
    let near: Vec<&TentPoints> =
        tents.iter().copied().filter(|tp| (tp.tent.x - strip.x).abs() < tp.tent.s + strip.s).collect();
    if near.is_empty() {
        return 0.0;
    }
    if q.is_infinite() {
        return generated_size_abs(&restricted, &near, kind);
    }
    let rep = outer_lp_abs(&restricted, &near, kind, q, ladder, false);
    rep.value / strip.s.powf(1.0 / q)
}
