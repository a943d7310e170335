use serde::Serialize;
use tf_outer::embeddings::{
    embed_aux, embed_energy, embed_mass, embed_var_mass_linear, embed_var_mass_sup, AuxVariant, EmbeddedField, SequenceFunction,
};
use tf_outer::harness::*;
use tf_outer::operators::{carleson, var_carleson, var_truncation, TruncationLadder};
use tf_outer::outer::{check_cover, cover_superlevel_aux, iter_lp_lq, outer_lp, NormReport};
use tf_outer::sizes::{SizeKind, SizeSpec};

use crate::config::RunConfig;
use crate::output::Output;
use crate::{Failure, FieldKind, OperatorKind, VerifyKind};

fn cfg_err<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn ensemble(cfg: &RunConfig) -> Result<Ensemble, Failure> {
    Ensemble::new(&cfg.geometry, &cfg.grid, &cfg.ensemble).map_err(cfg_err)
}

fn instance(ens: &Ensemble, i: usize) -> Result<&Instance, Failure> {
    ens.instances
        .get(i)
        .ok_or_else(|| Failure::Config(format!("instance {i} out of range for ensemble.size = {}", ens.len())))
}

fn field_name(which: FieldKind) -> &'static str {
    match which {
        FieldKind::Energy => "energy",
        FieldKind::Mass => "mass",
        FieldKind::VarMass => "var_mass",
        FieldKind::VarMassLinear => "var_mass_linear",
        FieldKind::Aux => "aux",
    }
}

fn embed_field(setup: &Setup, ins: &Instance, which: FieldKind) -> Result<EmbeddedField, Failure> {
    let (s, g, gen) = (&setup.spec, &setup.grid, &setup.gen);
    match which {
        FieldKind::Energy => embed_energy(&ins.f, s, g, gen),
        FieldKind::Mass => embed_mass(&ins.a1, &ins.c1, s, g, gen),
        FieldKind::VarMass => embed_var_mass_sup(&ins.a, &ins.c, s, g, gen),
        FieldKind::VarMassLinear => embed_var_mass_linear(&ins.a, &ins.c, s, g, gen),
        FieldKind::Aux => embed_aux(&ins.a, &ins.c, &setup.geom, g, AuxVariant::bump(setup.geom.decay_n)),
    }
    .map_err(cfg_err)
}

#[derive(Serialize)]
struct FieldRow {
    y: f64,
    eta: f64,
    t: f64,
    re: f64,
    im: f64,
    abs: f64,
}

pub fn embed(cfg: &RunConfig, out: &Output, which: FieldKind, index: usize) -> Result<(), Failure> {
    let ens = ensemble(cfg)?;
    let ins = instance(&ens, index)?;
    let setup = ens.setup(0).map_err(cfg_err)?;
    let field = embed_field(&setup, ins, which)?;
    let rows: Vec<FieldRow> = field.rows().map(|(y, eta, t, re, im)| FieldRow { y, eta, t, re, im, abs: re.hypot(im) }).collect();
    let name = format!("embed_{}", field_name(which));
    let path = out.csv(&name, &rows).map_err(Failure::Config)?;
    let max = rows.iter().map(|r| r.abs).fold(0.0, f64::max);
    out.json(&name, &serde_json::json!({ "field": field_name(which), "instance": index, "points": rows.len(), "max_abs": max }))
        .map_err(Failure::Config)?;
    println!("embed {}: {} points, max |field| {max:.4e} -> {}", field_name(which), rows.len(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct LevelRow {
    lambda: f64,
    measure: f64,
    cover_size: usize,
    cumulative: f64,
}

fn norm_rows(r: &NormReport) -> Vec<LevelRow> {
    (0..r.lambdas.len())
        .map(|j| LevelRow { lambda: r.lambdas[j], measure: r.measures[j], cover_size: r.cover_sizes[j], cumulative: r.cumulative[j] })
        .collect()
}

fn size_kind(which: FieldKind) -> SizeKind {
    match which {
        FieldKind::Energy => SizeKind::SEnergy,
        FieldKind::Aux => SizeKind::SInf,
        _ => SizeKind::SMass,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn opnorm(
    cfg: &RunConfig,
    out: &Output,
    which: FieldKind,
    index: usize,
    p: Option<f64>,
    q: Option<f64>,
    iterated: bool,
    weak: bool,
) -> Result<(), Failure> {
    let ens = ensemble(cfg)?;
    let ins = instance(&ens, index)?;
    let setup = ens.setup(0).map_err(cfg_err)?;
    let field = embed_field(&setup, ins, which)?;
    let ex = cfg.ensemble.exponents;
    let (dp, dq) = if which == FieldKind::Energy { (ex.p, ex.q) } else { (ex.p_prime(), ex.q_prime()) };
    let (p, q) = (p.unwrap_or(dp), q.unwrap_or(dq));
    let spec = SizeSpec::new(size_kind(which), setup.geom);
    let rep = if iterated {
        iter_lp_lq(&field, p, q, &spec, &setup.strips, &setup.tents, &cfg.ladder, weak)
    } else {
        outer_lp(&field, &spec, p, &cfg.ladder, weak, &setup.tents)
    }
    .map_err(cfg_err)?;
    let name = format!("opnorm_{}", field_name(which));
    let path = out.csv_with_header(&name, &["lambda", "measure", "cover_size", "cumulative"], &norm_rows(&rep)).map_err(Failure::Config)?;
    let summary = serde_json::json!({
        "field": field_name(which), "instance": index, "p": p, "q": if iterated { Some(q) } else { None },
        "iterated": iterated, "top": rep.top, "strong": rep.strong, "weak": rep.weak, "value": rep.value, "saturated": rep.saturated,
    });
    out.json(&name, &summary).map_err(Failure::Config)?;
    let label = if iterated { format!("L^{p} L^{q}") } else { format!("L^{p}") };
    println!("opnorm {} {label}: {:.6e}{} -> {}", field_name(which), rep.value, if rep.saturated { " (saturated)" } else { "" }, path.display());
    Ok(())
}

#[derive(Serialize)]
struct TentRow {
    x: f64,
    xi: f64,
    s: f64,
}

pub fn cover(cfg: &RunConfig, out: &Output, lambda: Option<f64>, index: usize, zero: bool) -> Result<(), Failure> {
    let ens = ensemble(cfg)?;
    let ins = instance(&ens, index)?;
    let setup = ens.setup(0).map_err(cfg_err)?;
    cfg.cover.validate(&setup.geom).map_err(cfg_err)?;
    let a = if zero {
        SequenceFunction::zero(ins.a.axis().clone(), ins.a.k(), ins.a.r_prime).map_err(cfg_err)?
    } else {
        ins.a.clone()
    };
    let lambda = match lambda {
        Some(l) => l,
        None => {
            let m = embed_aux(&a, &ins.c, &setup.geom, &setup.grid, AuxVariant::ball(cfg.cover.r, tf_outer::embeddings::Sign::Plus))
                .map_err(cfg_err)?;
            let top = m.values.iter().map(|v| v.re).fold(0.0, f64::max);
            if top > 0.0 {
                cfg.cover_fraction * top
            } else {
                1.0
            }
        }
    };
    let cov = cover_superlevel_aux(&a, &ins.c, lambda, cfg.cover, &setup.grid, &setup.geom).map_err(cfg_err)?;
    let chk = check_cover(&cov, &a, &ins.c, lambda, cfg.cover, &setup.grid, &setup.geom).map_err(cfg_err)?;
    let rows: Vec<TentRow> = cov.tents.iter().map(|t| TentRow { x: t.x, xi: t.xi, s: t.s }).collect();
    let path = out.csv_with_header("cover", &["x", "xi", "s"], &rows).map_err(Failure::Config)?;
    out.json("cover", &serde_json::json!({ "lambda": lambda, "tents": rows.len(), "superlevel_points": cov.superlevel.len(), "check": chk, "pass": chk.all_pass() }))
        .map_err(Failure::Config)?;
    println!("cover lambda={lambda:.4e}: {} tents over {} points, checks {} -> {}", rows.len(), cov.superlevel.len(), if chk.all_pass() { "pass" } else { "FAIL" }, path.display());
    if chk.all_pass() {
        Ok(())
    } else {
        Err(Failure::Check(format!("covering conclusions failed: {chk:?}")))
    }
}

#[derive(Serialize)]
struct OperatorRow {
    z: f64,
    re: f64,
    im: f64,
    abs: f64,
}

pub fn operator(cfg: &RunConfig, out: &Output, kind: OperatorKind, index: usize) -> Result<(), Failure> {
    let ens = ensemble(cfg)?;
    let ins = instance(&ens, index)?;
    let setup = ens.setup(0).map_err(cfg_err)?;
    let spec = &setup.spec;
    let r = cfg.ensemble.exponents.r;
    let (name, values): (&str, Vec<(f64, f64)>) = match kind {
        OperatorKind::Carleson => ("carleson", carleson(&ins.f, spec, &ins.c1).map_err(cfg_err)?.iter().map(|v| (v.re, v.im)).collect()),
        OperatorKind::VarCarleson => ("var_carleson", var_carleson(&ins.f, spec, &ins.c, r).map_err(cfg_err)?.iter().map(|&v| (v, 0.0)).collect()),
        OperatorKind::VarTruncation => {
            let o = &cfg.operator;
            let ladder = TruncationLadder::geometric(o.t_lo, o.t_hi, o.n_scales, o.sigma).map_err(cfg_err)?;
            ("var_truncation", var_truncation(&ins.f, spec, &ladder, r, false).map_err(cfg_err)?.iter().map(|&v| (v, 0.0)).collect())
        }
    };
    let rows: Vec<OperatorRow> =
        values.iter().enumerate().map(|(j, &(re, im))| OperatorRow { z: spec.grid.point(j), re, im, abs: re.hypot(im) }).collect();
    let path = out.csv(name, &rows).map_err(Failure::Config)?;
    let max = rows.iter().map(|r| r.abs).fold(0.0, f64::max);
    out.json(name, &serde_json::json!({ "operator": name, "instance": index, "r": r, "samples": rows.len(), "max_abs": max }))
        .map_err(Failure::Config)?;
    println!("operator {name}: max {max:.4e} over {} samples -> {}", rows.len(), path.display());
    Ok(())
}

fn verify_name(which: VerifyKind) -> &'static str {
    match which {
        VerifyKind::Duality => "duality",
        VerifyKind::Holder => "holder",
        VerifyKind::Rn => "rn",
        VerifyKind::Interp => "interp",
        VerifyKind::Bounds => "bounds",
        VerifyKind::Sizecontrol => "sizecontrol",
        VerifyKind::Wavepackets => "wavepackets",
    }
}

/// One harness report per level (a single report for level-free experiments).
fn run_experiment(cfg: &RunConfig, ens: &Ensemble, which: VerifyKind) -> Result<Vec<Report>, Failure> {
    let levels = 0..cfg.levels;
    let l = &cfg.ladder;
    let reports = match which {
        VerifyKind::Duality => vec![verify_duality(ens, cfg.levels)],
        VerifyKind::Wavepackets => {
            let w = &cfg.wavepackets;
            vec![verify_wavepackets(&cfg.geometry, &w.quadrature, w.c_minus, w.c_plus, w.margin)]
        }
        VerifyKind::Holder => levels.map(|k| verify_holder(ens, k, l)).collect(),
        VerifyKind::Rn => levels.map(|k| verify_radon_nikodym(ens, k, l)).collect(),
        VerifyKind::Interp => levels.map(|k| verify_interpolation(ens, k, l, cfg.interp)).collect(),
        VerifyKind::Bounds => levels.map(|k| bound_ratio_sweep(ens, cfg.embedding, k, l, cfg.explore)).collect(),
        VerifyKind::Sizecontrol => levels.map(|k| verify_size_control(ens, k)).collect(),
    };
    reports.into_iter().collect::<Result<Vec<_>, _>>().map_err(cfg_err)
}

pub fn verify(cfg: &RunConfig, out: &Output, which: VerifyKind) -> Result<(), Failure> {
    let ens = if which == VerifyKind::Wavepackets {
        Ensemble::new(&cfg.geometry, &cfg.grid, &EnsembleConfig { size: 0, ..cfg.ensemble.clone() }).map_err(cfg_err)?
    } else {
        ensemble(cfg)?
    };
    let reports = run_experiment(cfg, &ens, which)?;
    let name = verify_name(which);
    let rows: Vec<Row> = reports.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    let path = out.csv(name, &rows).map_err(Failure::Config)?;
    let summaries: Vec<&Summary> = reports.iter().map(|r| &r.summary).collect();
    out.json(name, &summaries).map_err(Failure::Config)?;
    let pass = reports.iter().all(|r| r.summary.pass);
    let max = reports.iter().map(|r| r.max_ratio()).fold(0.0, f64::max);
    let sat: usize = reports.iter().map(|r| r.summary.saturated).sum();
    println!(
        "{name}: {} ({} rows, max ratio {max:.4e}, {sat} saturated) -> {}",
        if pass { "PASS" } else { "FAIL" },
        rows.len(),
        path.display()
    );
    if pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("{name} did not pass")))
    }
}

#[derive(Serialize)]
struct SweepRow<'a> {
    experiment: &'a str,
    size: usize,
    level: usize,
    max: f64,
    saturated: usize,
}

pub fn sweep(cfg: &RunConfig, out: &Output, which: VerifyKind) -> Result<(), Failure> {
    if which == VerifyKind::Wavepackets {
        return Err(Failure::Config("experiment: wavepackets has no ensemble to sweep".into()));
    }
    let name = verify_name(which);
    let base = ensemble(cfg)?;
    let doubled = base.doubled().map_err(cfg_err)?;
    let stat = |ens: &Ensemble, level: usize| -> Result<(f64, usize), Failure> {
        let one = RunConfig { levels: level + 1, ..cfg.clone() };
        let reports = run_experiment(&one, ens, which)?;
        let last = reports.last().expect("at least one report");
        let max = last.summary.levels.iter().filter(|l| l.level == level).map(|l| l.max).fold(0.0, f64::max);
        Ok((max, last.summary.saturated))
    };
    let mut runs = Vec::new();
    let (m, s) = stat(&base, 0)?;
    runs.push((base.len(), 0, m, s));
    let (m, s) = stat(&doubled, 0)?;
    runs.push((doubled.len(), 0, m, s));
    for level in 1..cfg.levels {
        let (m, s) = stat(&base, level)?;
        runs.push((base.len(), level, m, s));
    }
    let st = stability(name, &runs);
    let rows: Vec<SweepRow> =
        st.points.iter().map(|p| SweepRow { experiment: name, size: p.size, level: p.level, max: p.max, saturated: p.saturated }).collect();
    let path = out.csv(&format!("sweep_{name}"), &rows).map_err(Failure::Config)?;
    out.json(&format!("sweep_{name}"), &st).map_err(Failure::Config)?;
    println!("sweep {name}: {} (spread {:.3} over {} runs) -> {}", if st.pass { "PASS" } else { "FAIL" }, st.spread, rows.len(), path.display());
    if st.pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("sweep {name} unstable: spread {:.3}", st.spread)))
    }
}
