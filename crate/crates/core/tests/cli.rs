use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use broadbeam::cli::files::{Dims, Metadata, WeightFile};
use broadbeam::evaluation::{drop_gains, drop_ues, spectral_efficiency, SectorConfig};
use broadbeam::expansion::WeightPair;
use broadbeam::patterns::{db_to_linear, ArrayGeometry, ElementModel};
use broadbeam::sequences::{golay_kernel, EPS_PAIR_M7_A, EPS_PAIR_M7_B};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_broadbeam"));
    c.env_remove("BROADBEAM_SEED");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Value after `key: ` on the first matching stdout line.
fn field(o: &Output, key: &str) -> String {
    let prefix = format!("{key}: ");
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
        .unwrap_or_else(|| panic!("no {key} in {}", stdout(o)))
}

fn num(s: &str) -> f64 {
    s.split_whitespace().next().unwrap().parse().unwrap()
}

fn write_pair(dir: &Path, name: &str, a: &[f64], b: &[f64]) -> PathBuf {
    let p = dir.join(name);
    WeightFile::from_phases(a.to_vec(), b.to_vec(), Dims { m: a.len(), n: 1 }, Metadata::new("test"))
        .write(&p)
        .unwrap();
    p
}

fn kernel_file(dir: &Path, len: usize) -> PathBuf {
    let (a, b) = golay_kernel(len).unwrap();
    write_pair(dir, &format!("golay{len}.json"), &a.phases(), &b.phases())
}

#[test]
fn search_writes_a_file_that_verifies() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["search", "--m", "7", "--eps-percent", "1", "--seed", "4", "-o", "p.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(field(&o, "target_sidelobe").starts_with("1.400000e-1"));
    assert!(field(&o, "achieved_sidelobe").contains('%'));
    let f = WeightFile::read(&d.path().join("p.json")).unwrap();
    assert_eq!(f.metadata.seed, Some(4));
    assert_eq!(f.metadata.epsilon, Some(0.14));
    assert!(f.metadata.invocation.unwrap().contains("--m 7"));
    let v = run(d.path(), &["verify", "p.json"]);
    assert_eq!(v.status.code(), Some(0));
    let v = run(d.path(), &["verify", "p.json", "--eps", "0.14"]);
    assert_eq!(field(&v, "result"), "PASS");
}

#[test]
fn search_edge_lengths() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["search", "--m", "1", "-o", "one.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&o, "converged"), "true");
    let o = run(d.path(), &["search", "--m", "9", "-o", "nine.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((num(&field(&o, "target_sidelobe")) - 0.18).abs() < 1e-12);
}

#[test]
fn search_seed_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let o = bin()
        .current_dir(d.path())
        .env("BROADBEAM_SEED", "77")
        .args(["search", "--m", "3", "-o", "s.json"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(WeightFile::read(&d.path().join("s.json")).unwrap().metadata.seed, Some(77));
}

#[test]
fn search_best_effort_exit_code() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &["search", "--m", "5", "--eps", "1e-12", "--max-iterations", "500", "--restarts", "2", "-o", "b.json"],
    );
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(field(&o, "converged"), "false");
    assert!(d.path().join("b.json").exists());
}

#[test]
fn usage_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), &["search", "--m", "7", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(d.path(), &["search", "--m", "x", "-o", "a.json"]).status.code(), Some(2));
    assert_eq!(run(d.path(), &["search", "--m", "0", "-o", "a.json"]).status.code(), Some(2));
    assert_eq!(run(d.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(d.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn verify_reports() {
    let d = tempfile::tempdir().unwrap();
    kernel_file(d.path(), 10);
    let o = run(d.path(), &["verify", "golay10.json", "--eps", "1e-9"]);
    assert_eq!(o.status.code(), Some(0));

    write_pair(d.path(), "ones.json", &[0.0; 5], &[0.0; 5]);
    let o = run(d.path(), &["verify", "ones.json", "--eps", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(field(&o, "result"), "FAIL");
    assert!((num(&field(&o, "max_sidelobe")) - 8.0).abs() < 1e-9);

    write_pair(d.path(), "ref.json", &EPS_PAIR_M7_A, &EPS_PAIR_M7_B);
    let o = run(d.path(), &["verify", "ref.json", "--eps", "0.2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(field(&o, "ripple_bound").starts_with("14 +/- 2.4"));

    // no epsilon anywhere
    assert_eq!(run(d.path(), &["verify", "ref.json"]).status.code(), Some(2));
}

#[test]
fn malformed_files_exit_two() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.json"), "{\"schema_version\": 1, \"kind\": \"ula\"}").unwrap();
    assert_eq!(run(d.path(), &["verify", "bad.json", "--eps", "1"]).status.code(), Some(2));
    std::fs::write(d.path().join("junk.json"), "not json").unwrap();
    assert_eq!(run(d.path(), &["pattern", "junk.json", "-o", "x.csv"]).status.code(), Some(2));
    assert_eq!(run(d.path(), &["verify", "missing.json", "--eps", "1"]).status.code(), Some(2));
}

#[test]
fn expand_modes() {
    let d = tempfile::tempdir().unwrap();
    write_pair(d.path(), "ref.json", &EPS_PAIR_M7_A, &EPS_PAIR_M7_B);
    let o = run(
        d.path(),
        &["expand", "ref.json", "--expander-u", "j,1", "--expander-v", "-1,-j", "--mode", "ula2ura-v", "-o", "x.json"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(field(&o, "dims"), "4x7");
    let f = WeightFile::read(&d.path().join("x.json")).unwrap();
    assert_eq!((f.dims.n, f.dims.m), (4, 7));

    let o = run(d.path(), &["expand", "ref.json", "-u", "1", "-v", "1", "--mode", "ula", "-o", "asi.json"]);
    assert_eq!(field(&o, "dims"), "1x14");

    let o = run(d.path(), &["expand", "ref.json", "-u", "1,1", "-v", "1", "--mode", "ula", "-o", "e.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(d.path(), &["expand", "x.json", "-u", "1,1", "-v", "1,-1", "--mode", "ula", "-o", "e.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn recipe_builds_the_32_by_14_array() {
    let d = tempfile::tempdir().unwrap();
    let recipe = Path::new(env!("CARGO_MANIFEST_DIR")).join("recipes/ura_32x14.toml");
    let out = d.path().to_str().unwrap();
    let o = run(d.path(), &["recipe", recipe.to_str().unwrap(), "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let f = WeightFile::read(&d.path().join("ura_32x14.json")).unwrap();
    assert_eq!((f.dims.n, f.dims.m), (32, 14));
    let p = run(d.path(), &["pattern", "ura_32x14.json", "--step-deg", "3", "-o", "p.csv"]);
    assert_eq!(p.status.code(), Some(0));
    let proto = WeightFile::read(&d.path().join("proto_7.json")).unwrap();
    let s = proto.metadata.params["achieved_sidelobe"].as_f64().unwrap();
    let bound = 10.0 * ((14.0 + 12.0 * s) / (14.0 - 12.0 * s)).log10();
    let measured = num(&field(&p, "af_ripple_db"));
    assert!(measured <= bound, "{measured} > {bound}");
}

#[test]
fn pattern_summaries() {
    let d = tempfile::tempdir().unwrap();
    kernel_file(d.path(), 10);
    let o = run(d.path(), &["pattern", "golay10.json", "--eirp", "-o", "g.csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(num(&field(&o, "af_ripple_db")) < 1e-9);
    assert!((num(&field(&o, "hpbw_deg")) - 90.0).abs() < 1.0);
    assert!((num(&field(&o, "power_utilization")) - 1.0).abs() < 1e-12);
    let text = std::fs::read_to_string(d.path().join("g.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phi_deg,theta_deg,af_power_db,total_db,eirp_dbw"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 721);
    for r in rows {
        assert!(r.split(',').all(|x| x.parse::<f64>().unwrap().is_finite()));
    }

    let o = run(d.path(), &["baseline", "--method", "dft", "--m", "8", "-o", "dft.json"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(d.path(), &["pattern", "dft.json", "-o", "d.csv"]);
    assert!((num(&field(&o, "hpbw_deg")) - 12.5).abs() <= 0.5);

    let o = run(d.path(), &["pattern", "dft.json", "--dy", "0", "-o", "d.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn baselines() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["baseline", "--method", "dft", "--m", "8", "--phi0-deg", "0", "-o", "dft.json"]);
    assert_eq!(o.status.code(), Some(0));
    let f = WeightFile::read(&d.path().join("dft.json")).unwrap();
    assert!(f.phases_a.iter().all(|p| p.abs() < 1e-12));

    let o = run(d.path(), &["baseline", "--method", "phase-taper", "--m", "7", "--p", "3", "--c", "24", "-o", "pt.json"]);
    assert_eq!(o.status.code(), Some(0));
    let f = WeightFile::read(&d.path().join("pt.json")).unwrap();
    assert_eq!(f.metadata.params["c"], 24.0);
    assert!(f.amplitudes_a.is_none());

    let o = run(d.path(), &["baseline", "--method", "amp-taper", "--m", "7", "--zeta", "0.01", "-o", "at.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&o, "in_band"), "true");
    let f = WeightFile::read(&d.path().join("at.json")).unwrap();
    assert!(f.amplitudes_a.is_some());

    let o = run(d.path(), &["baseline", "--method", "phase-taper", "--m", "1", "-o", "x.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(d.path(), &["baseline", "--method", "amp-taper", "--m", "7", "--zeta", "2", "-o", "x.json"]);
    assert_eq!(o.status.code(), Some(2));
}

fn csv_means(text: &str) -> Vec<(String, f64, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn evaluate_orders_methods_and_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    write_pair(d.path(), "proposed.json", &EPS_PAIR_M7_A, &EPS_PAIR_M7_B);
    run(d.path(), &["baseline", "--method", "dft", "--m", "7", "-o", "dft.json"]);
    let args = ["evaluate", "proposed.json", "dft.json", "--seed", "3"];
    let a = run(d.path(), &args);
    let b = run(d.path(), &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("method,snr_db,mean_se_bps_hz,drops,seed\n"));
    let rows = csv_means(&stdout(&a));
    assert_eq!(rows.len(), 10);
    for i in 0..5 {
        assert_eq!(rows[i].0, "proposed");
        assert_eq!(rows[i + 5].0, "dft");
        assert!(rows[i].2 > rows[i + 5].2);
    }
}

#[test]
fn evaluate_single_drop_matches_formula() {
    let d = tempfile::tempdir().unwrap();
    write_pair(d.path(), "p.json", &EPS_PAIR_M7_A, &EPS_PAIR_M7_B);
    let o = run(d.path(), &["evaluate", "p.json", "--drops", "1", "--seed", "11", "--snr-grid", "-5,5", "-o", "se.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_means(&std::fs::read_to_string(d.path().join("se.csv")).unwrap());

    let cfg = SectorConfig {
        drops: 1,
        seed: 11,
        snr_db: vec![-5.0, 5.0],
        ..Default::default()
    };
    let drops = drop_ues(&cfg).unwrap();
    let w = WeightPair::from_phases(&EPS_PAIR_M7_A, &EPS_PAIR_M7_B).unwrap();
    let g = drop_gains(&w, &ArrayGeometry::ula(7).unwrap(), &ElementModel::default(), &drops).unwrap();
    for (row, snr) in rows.iter().zip([-5.0, 5.0]) {
        let c = spectral_efficiency(g[0], drops[0].distance, db_to_linear(snr), db_to_linear(57.0), 2.2);
        assert!((row.2 - c).abs() < 1e-8);
    }
}

#[test]
fn evaluate_is_stable_across_seeds() {
    let d = tempfile::tempdir().unwrap();
    write_pair(d.path(), "p.json", &EPS_PAIR_M7_A, &EPS_PAIR_M7_B);
    let go = |seed: &str| {
        csv_means(&stdout(&run(
            d.path(),
            &["evaluate", "p.json", "--drops", "100000", "--seed", seed, "--snr-grid", "0"],
        )))[0]
            .2
    };
    let (a, b) = (go("1"), go("2"));
    assert!((a - b).abs() / a < 0.005, "{a} vs {b}");
}
