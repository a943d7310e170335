use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tf-outer-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tf-outer"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("TF_OUTER_OUT")
        .output()
        .expect("binary runs")
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn verify_duality_passes_and_writes_csv() {
    let dir = scratch("duality");
    let o = run(&dir, &["verify", "duality", "--set", "ensemble.size=8"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.join("duality.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "experiment,level,instance,p,q,r,lhs,rhs,ratio,flags");
    assert_eq!(lines.count(), 8);
    let summary: serde_json::Value = serde_json::from_str(&read(dir.join("duality.json"))).unwrap();
    assert!(summary.is_array());
    assert!(String::from_utf8_lossy(&o.stdout).contains("duality: PASS"));
}

#[test]
fn invalid_geometry_exits_with_config_error() {
    let dir = scratch("geometry");
    let o = run(&dir, &["verify", "duality", "--set", "geometry.beta_plus=1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("beta+ <= alpha+"), "{err}");
}

#[test]
fn unknown_keys_and_bad_flags_exit_two() {
    let dir = scratch("keys");
    let o = run(&dir, &["verify", "holder", "--set", "ensemble.nope=3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ensemble.nope"));

    let cfg = dir.join("bad.json");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(&cfg, r#"{"ensemble": {"size": 4, "extra": true}}"#).unwrap();
    let o = run(&dir, &["--config", cfg.to_str().unwrap(), "verify", "holder"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("extra"));

    let o = run(&dir, &["--workers", "0", "verify", "holder"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&dir, &["embed", "--instance", "99", "--set", "ensemble.size=2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_data_cover_is_empty() {
    let dir = scratch("cover");
    let o = run(&dir, &["cover", "--lambda", "0.5", "--zero", "--set", "ensemble.size=1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(dir.join("cover.csv")), "x,xi,s\n");
    let j: serde_json::Value = serde_json::from_str(&read(dir.join("cover.json"))).unwrap();
    assert_eq!(j["tents"], 0);
    assert_eq!(j["pass"], true);
}

#[test]
fn field_norm_and_operator_commands() {
    let dir = scratch("pipelines");
    for args in [
        &["embed", "--which", "energy"][..],
        &["opnorm", "--which", "energy", "--iterated"],
        &["opnorm", "--which", "mass", "--p", "2", "--weak"],
        &["operator", "--kind", "var-carleson"],
    ] {
        let mut a = args.to_vec();
        a.extend(["--set", "ensemble.size=1"]);
        let o = run(&dir, &a);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let embed = read(dir.join("embed_energy.csv"));
    assert!(embed.starts_with("y,eta,t,re,im,abs\n"));
    let norm = read(dir.join("opnorm_mass.csv"));
    assert!(norm.starts_with("lambda,measure,cover_size,cumulative\n"));
    let j: serde_json::Value = serde_json::from_str(&read(dir.join("opnorm_mass.json"))).unwrap();
    assert_eq!(j["p"], 2.0);
    assert!(j["value"].as_f64().unwrap() > 0.0);
    assert!(read(dir.join("var_carleson.csv")).starts_with("z,re,im,abs\n"));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_workers() {
    let a = scratch("det-a");
    let b = scratch("det-b");
    let c = scratch("det-c");
    let args = ["verify", "holder", "--set", "ensemble.size=6"];
    for (dir, workers) in [(&a, "1"), (&b, "1"), (&c, "2")] {
        let mut v = vec!["--workers", workers];
        v.extend(args);
        let o = run(dir, &v);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let first = read(a.join("holder.csv"));
    assert_eq!(first, read(b.join("holder.csv")));
    assert_eq!(first, read(c.join("holder.csv")));
}
