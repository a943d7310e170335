//! Acceptance suite: one PASS/FAIL line per criterion, then a single assertion.

mod common;

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tf_outer::embeddings::EmbeddedField;
use tf_outer::fourier::{Spectral, ZGrid};
use tf_outer::geometry::{GeometryParams, TfGrid};
use tf_outer::harness::*;
use tf_outer::operators::{mollify, var_truncation, TruncationLadder};
use tf_outer::outer::{outer_lp, outer_lp_exact, CoverParams, Ladder};
use tf_outer::sizes::{local_size, SizeKind, SizeSpec};
use tf_outer::wavepackets::PacketQuadrature;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn geom() -> GeometryParams {
    GeometryParams::default()
}

fn wavepacket_reconstruction() -> Outcome {
    let t = Instant::now();
    let r = verify_wavepackets(&geom(), &PacketQuadrature::default(), 0.0, 5.0, 0.5).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let d = &r.summary.detail;
    outcome(
        r.summary.pass && secs < 30.0,
        format!("base error {:.4}, refined {:.4}, drop {:.0}%, {secs:.1}s", d["base_error"], d["refined_error"], 100.0 * d["drop"]),
    )
}

fn duality_identity() -> Outcome {
    let ens = Ensemble::new(&geom(), &GridConfig::duality(), &EnsembleConfig { size: 10, ..Default::default() }).unwrap();
    let t = Instant::now();
    let r = verify_duality(&ens, 3).unwrap();
    let per_level = t.elapsed().as_secs_f64() / 3.0;
    let base = r.summary.levels[0].median;
    let ratios: Vec<f64> = r.summary.detail.values().copied().collect();
    let ok = r.summary.pass && base <= 0.1 && ratios.iter().all(|&v| v <= 0.6) && per_level < 120.0;
    outcome(ok, format!("base median gap {base:.2e}, level ratios {ratios:.3?}, {per_level:.1}s/level"))
}

fn covering_ensemble() -> Ensemble {
    Ensemble::new(&geom(), &GridConfig::default(), &EnsembleConfig { size: 25, seed: 77, ..Default::default() }).unwrap()
}

const COVER: CoverParams = CoverParams { r: 2.0, q: 3.0, r0: None };
const FRACTIONS: [f64; 3] = [0.75, 0.5, 0.25];

fn covering() -> Outcome {
    let ens = covering_ensemble();
    let t = Instant::now();
    let (mut total, mut ok) = (0, 0);
    for frac in FRACTIONS {
        let r = verify_covering(&ens, 0, COVER, frac).unwrap();
        for row in r.rows.iter().filter(|r| r.experiment == "cover" && r.flags != "skipped") {
            total += 1;
            ok += (row.flags == "cover_ok") as usize;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(total > 0 && ok == total && secs < 60.0, format!("{ok}/{total} covers pass all three checks, {secs:.1}s"))
}

fn packing() -> Outcome {
    let ens = covering_ensemble();
    let worst = FRACTIONS
        .iter()
        .map(|&f| verify_covering(&ens, 0, COVER, f).unwrap().summary.detail["packing_max"])
        .fold(0.0, f64::max);
    outcome(worst <= 1.05, format!("max packing ratio {worst:.3} (bound 1.05)"))
}

fn mass_projection() -> Outcome {
    let r = verify_mass_projection(&geom(), 5, 20, ProjectionParams::default()).unwrap();
    let d = &r.summary.detail;
    outcome(
        r.summary.pass,
        format!(
            "a constant {:.3}, min M ratio {:.3} (half-form failures {}, literal-form failures {})",
            d["a_constant_max"], d["m_ratio_min"], d["half_failures"], d["literal_failures"]
        ),
    )
}

fn stopping_density() -> Outcome {
    let r = verify_stopping_density(6, 50, &[4.0, 8.0, 16.0], 200).unwrap();
    let worst = r.rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    outcome(r.summary.pass, format!("50 profiles, worst ρ/bound {worst:.3}"))
}

fn exhaustive(v: &[Complex64], r: f64) -> f64 {
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

fn variation_dp() -> Outcome {
    let t = Instant::now();
    let spec = Spectral::new(ZGrid::new(-8.0, 16.0, 64).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for _ in 0..100 {
        let h: Vec<Complex64> = (0..64).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let n = rng.gen_range(2..=12);
        let ladder = TruncationLadder::geometric(rng.gen_range(0.1..0.5), rng.gen_range(1.0..6.0), n, 0.0).unwrap();
        let r = [2.5, 3.0, 4.0, 7.0, f64::INFINITY][rng.gen_range(0..5)];
        let dp = var_truncation(&h, &spec, &ladder, r, false).unwrap();
        let conv: Vec<Vec<Complex64>> = ladder.scales.iter().map(|&s| mollify(&h, &spec, s)).collect();
        for (j, &v) in dp.iter().enumerate() {
            let seq: Vec<Complex64> = conv.iter().map(|c| c[j]).collect();
            mismatches += (exhaustive(&seq, r) != v) as usize;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(mismatches == 0 && secs < 10.0, format!("{mismatches} mismatches over 100×64 sequences, {secs:.1}s"))
}

fn closed_form() -> Outcome {
    let grid = small_grid();
    let ladder = Ladder::default();
    let spec = SizeSpec::new(SizeKind::SInf, geom());
    let mut ok = true;
    let mut worst = 0.0f64;
    for s in [0.5, 1.0, 2.0] {
        let tents = eight_tents(s);
        let ind = indicator(&grid, &tents[0], &geom());
        for p in [1.0, 2.0, 4.0] {
            let ex = outer_lp_exact(&ind, &spec, p, &ladder, false, &tents).unwrap();
            let gr = outer_lp(&ind, &spec, p, &ladder, false, &tents).unwrap();
            let dev = (ex.value / s.powf(1.0 / p) - 1.0).abs() / (2f64.powf(1.0 / p) - 1.0);
            worst = worst.max(dev);
            ok &= dev <= 1.0 && gr.measures == ex.measures && gr.value == ex.value;
        }
    }
    outcome(ok, format!("worst deviation {:.1}% of the ladder tolerance; greedy = exact", 100.0 * worst))
}

fn stability_check() -> Outcome {
    let t = Instant::now();
    let ladder = Ladder::default();
    let cfg = EnsembleConfig { size: 50, ..Default::default() };
    let ens50 = Ensemble::new(&geom(), &GridConfig::default(), &cfg).unwrap();
    let ens100 = ens50.doubled().unwrap();
    type Run<'a> = Box<dyn Fn(&Ensemble, usize) -> Report + 'a>;
    let experiments: Vec<(&str, Run)> = vec![
        ("holder", Box::new(|e: &Ensemble, l| verify_holder(e, l, &ladder).unwrap())),
        ("energy", Box::new(|e: &Ensemble, l| bound_ratio_sweep(e, Embedding::Energy, l, &ladder, false).unwrap())),
        ("mass", Box::new(|e: &Ensemble, l| bound_ratio_sweep(e, Embedding::Mass, l, &ladder, false).unwrap())),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, run) in &experiments {
        let stat = |r: &Report| {
            let m = r.rows.iter().filter(|r| !r.flags.contains("weak_endpoint") && !r.flags.contains("skipped")).map(|r| r.ratio).fold(0.0, f64::max);
            (m, r.summary.saturated)
        };
        let (m0, s0) = stat(&run(&ens50, 0));
        let (m1, s1) = stat(&run(&ens100, 0));
        let (m2, s2) = stat(&run(&ens50, 1));
        let st = stability(name, &[(50, 0, m0, s0), (100, 0, m1, s1), (50, 1, m2, s2)]);
        ok &= st.pass && m0 > 0.0;
        parts.push(format!("{name} spread {:.3}", st.spread));
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(ok && secs < 600.0, format!("{}, {secs:.0}s", parts.join(", ")))
}

fn random_pair(grid: &TfGrid, rng: &mut ChaCha8Rng) -> (EmbeddedField, EmbeddedField) {
    let mut draw = |sparse: bool| {
        let v: Vec<Complex64> = (0..grid.len())
            .map(|_| {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if sparse && rng.gen_bool(0.6) {
                    Complex64::new(0.0, 0.0)
                } else {
                    z
                }
            })
            .collect();
        EmbeddedField { grid: grid.clone(), values: v }
    };
    (draw(false), draw(true))
}

fn size_axioms() -> Outcome {
    let grid = TfGrid::adapted((-2.0, 2.0, 16), 0.0, (-1.1, 1.1, 12), (0.125, 2.0, 8)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut fails = 0;
    let mut worst_c = 0.0f64;
    for kind in SizeKind::ALL {
        let spec = SizeSpec::new(kind, geom());
        for _ in 0..200 {
            let (g1, g2) = random_pair(&grid, &mut rng);
            let s = 2f64.powi(rng.gen_range(-2..=1));
            let tent = tf_outer::geometry::Tent::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.0..1.0) / s, s);
            let k = rng.gen_range(-6..6);
            let lam = if rng.gen_bool(0.5) { -(2f64.powi(k)) } else { 2f64.powi(k) };
            let a = local_size(&g1, &tent, &spec).unwrap();
            let b = local_size(&g2, &tent, &spec).unwrap();
            let sum = EmbeddedField { grid: grid.clone(), values: g1.values.iter().zip(&g2.values).map(|(x, y)| x + y).collect() };
            let ab = local_size(&sum, &tent, &spec).unwrap();
            let scaled = local_size(&g1.scaled(lam), &tent, &spec).unwrap();
            let shrink: f64 = rng.gen_range(0.0..1.0);
            let shrunk = local_size(&g1.map(|v| v * shrink), &tent, &spec).unwrap();
            if a + b > 0.0 {
                worst_c = worst_c.max(ab / (a + b));
            }
            fails += (scaled != lam.abs() * a) as usize;
            fails += (ab > 2.0 * (a + b) * (1.0 + 1e-12)) as usize;
            fails += (shrunk > a) as usize;
        }
    }
    outcome(fails == 0, format!("{fails} failures over 7 kinds × 200 pairs, worst quasi-triangle constant {worst_c:.3}"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("wave-packet reconstruction", wavepacket_reconstruction),
        ("duality identity", duality_identity),
        ("covering algorithm", covering),
        ("packing bound", packing),
        ("mass projection", mass_projection),
        ("stopping density", stopping_density),
        ("variation DP exactness", variation_dp),
        ("outer L^p closed form", closed_form),
        ("Hölder / embedding stability", stability_check),
        ("size axioms", size_axioms),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
