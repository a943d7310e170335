use tf_outer::geometry::GeometryParams;
use tf_outer::harness::*;
use tf_outer::outer::{CoverParams, Ladder};
use tf_outer::par;

fn small_ensemble(size: usize) -> Ensemble {
    let grid = GridConfig { n_y: 16, n_theta: 8, n_t: 4, t_min: 1.0, ..Default::default() };
    Ensemble::new(&GeometryParams::default(), &grid, &EnsembleConfig { size, ..Default::default() }).unwrap()
}

#[test]
fn conjugate_exponents() {
    assert_eq!(conjugate(1.0), f64::INFINITY);
    assert_eq!(conjugate(f64::INFINITY), 1.0);
    for p in [1.5, 2.0, 3.0, 4.0, 7.5] {
        let q = conjugate(p);
        assert!((1.0 / p + 1.0 / q - 1.0).abs() < 1e-12);
    }
    let e = Exponents::default();
    assert!((e.p_prime() - 4.0 / 3.0).abs() < 1e-12 && (e.r_prime() - 1.5).abs() < 1e-12);
    assert!(Exponents { p: 0.5, q: 2.0, r: 3.0 }.validate().is_err());
}

#[test]
fn ensembles_are_reproducible_and_prefix_stable() {
    let a = small_ensemble(4);
    let b = small_ensemble(4);
    let d = a.doubled().unwrap();
    assert_eq!(d.len(), 8);
    for (x, y) in a.instances.iter().zip(&b.instances) {
        assert_eq!(x.f, y.f);
        assert_eq!(x.a, y.a);
    }
    for (x, y) in a.instances.iter().zip(&d.instances) {
        assert_eq!(x.f, y.f);
        assert_eq!(x.c, y.c);
    }
    assert_ne!(a.instances[0].f, a.instances[1].f);
}

#[test]
fn empty_ensemble_and_config_errors() {
    let e = small_ensemble(0);
    assert!(e.is_empty());
    let r = verify_holder(&e, 0, &Ladder::default()).unwrap();
    assert!(r.rows.is_empty() && r.summary.pass);

    let bad = EnsembleConfig { modes: 0, ..Default::default() };
    assert!(Ensemble::new(&GeometryParams::default(), &GridConfig::default(), &bad).is_err());
    let grid = GridConfig { tent_thetas: vec![], ..Default::default() };
    assert!(grid.validate().is_err());
    let grid = GridConfig { cell_lo: -40.0, cell_hi: 40.0, ..Default::default() };
    assert!(grid.validate().is_err());
}

#[test]
fn candidate_families() {
    let g = GridConfig::default();
    let scales = g.scales();
    assert_eq!(scales, vec![16.0, 8.0, 4.0, 2.0, 1.0]);
    let tents = g.candidate_tents();
    assert!(tents.iter().all(|t| t.x > g.y_min && t.x <= g.y_max + t.s));
    assert_eq!(tents.len() % g.tent_thetas.len(), 0);
    assert_eq!(g.candidate_strips().len() * g.tent_thetas.len(), tents.len());
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let e = small_ensemble(3);
    let ladder = Ladder { ratio: 2.0, levels: 8 };
    par::set_sequential(true);
    let seq = verify_holder(&e, 0, &ladder).unwrap();
    let seq_cover = verify_covering(&e, 0, CoverParams { r: 2.0, q: 3.0, r0: None }, 0.5).unwrap();
    par::set_sequential(false);
    let parl = verify_holder(&e, 0, &ladder).unwrap();
    let par_cover = verify_covering(&e, 0, CoverParams { r: 2.0, q: 3.0, r0: None }, 0.5).unwrap();
    assert_eq!(seq.rows, parl.rows);
    assert_eq!(seq_cover.rows, par_cover.rows);
}

#[test]
fn experiments_run_on_a_small_grid() {
    let e = small_ensemble(2);
    let ladder = Ladder { ratio: 2.0, levels: 8 };
    let d = verify_duality(&e, 1).unwrap();
    assert_eq!(d.rows.len(), 2);
    assert!(d.rows.iter().all(|r| r.flags == "dominated"));
    let rn = verify_radon_nikodym(&e, 0, &ladder).unwrap();
    assert!(rn.summary.pass, "{:?}", rn.summary);
    let ip = verify_interpolation(&e, 0, &ladder, InterpParams::default()).unwrap();
    assert!(ip.summary.pass);
    assert!((InterpParams::default().p_theta() - 3.2).abs() < 1e-12);
    let sc = verify_size_control(&e, 0).unwrap();
    assert!(sc.rows.iter().all(|r| r.ratio.is_finite()));
    for which in [Embedding::Energy, Embedding::Mass] {
        let r = bound_ratio_sweep(&e, which, 0, &ladder, false).unwrap();
        assert!(r.max_ratio().is_finite() && r.max_ratio() > 0.0);
    }
    assert!(bound_ratio_sweep(&e, Embedding::VarMass, 0, &ladder, false).is_err());
    let explored = bound_ratio_sweep(&e, Embedding::Aux, 0, &ladder, true).unwrap();
    assert!(explored.rows.iter().any(|r| r.flags.contains("weak_endpoint")));
    assert!(verify_covering(&e, 0, CoverParams { r: 2.0, q: 3.0, r0: None }, 0.0).is_err());
}

#[test]
fn range_predicates() {
    let e = Exponents::default();
    assert!(Embedding::Energy.in_range(&e));
    assert!(Embedding::Mass.in_range(&e));
    assert!(!Embedding::VarMass.in_range(&e));
    let wide = Exponents { p: 4.0, q: 2.5, r: 3.0 };
    assert!(Embedding::VarMass.in_range(&wide));
    assert_eq!(Embedding::Energy.exponents(&e), (4.0, 4.0));
}

#[test]
fn experiment_names_and_stability() {
    assert_eq!(Experiment::parse("holder"), Some(Experiment::Holder));
    assert_eq!(Experiment::parse("size_control"), Some(Experiment::SizeControl));
    assert_eq!(Experiment::parse("nope"), None);
    let s = stability("x", &[(50, 0, 2.0, 0), (100, 0, 3.0, 0), (50, 1, 1.5, 0)]);
    assert_eq!(s.spread, 1.5);
    assert!(s.pass);
    assert!(!stability("x", &[(50, 0, 1.0, 0), (100, 0, 2.5, 0)]).pass);
    assert!(!stability("x", &[(50, 0, 1.0, 0), (100, 0, f64::INFINITY, 0)]).pass);
    assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    assert_eq!(median(&[]), 0.0);
}

#[test]
fn projection_and_density_experiments() {
    let g = GeometryParams::default();
    let r = verify_mass_projection(&g, 1, 3, ProjectionParams::default()).unwrap();
    assert!(r.summary.pass, "{:?}", r.summary.detail);
    let r = verify_stopping_density(2, 6, &[4.0, 8.0], 20).unwrap();
    assert!(r.summary.pass);
    assert!(verify_stopping_density(2, 6, &[], 20).is_err());
}
