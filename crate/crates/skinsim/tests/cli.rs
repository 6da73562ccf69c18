use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_skinsim");

macro_rules! args {
    ($($x:expr),* $(,)?) => {
        [$(OsString::from(AsRef::<std::ffi::OsStr>::as_ref(&$x))),*]
    };
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn skinsim(args: &[OsString]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn skinsim")
}

fn ok(args: &[OsString]) -> Output {
    let out = skinsim(args);
    assert!(out.status.success(), "skinsim {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn log_lines(p: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(p).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

/// Generates `sites` nodules on the cube and simulates `duration` seconds.
fn cube_run(dir: &Path, sites: usize, duration: f64, extra: &[&str]) -> PathBuf {
    ok(&args!["generate", "--input", fixture("cube.obj"), "--sites", sites.to_string(), "--seed", "3", "--out", dir]);
    let mut a = args![
        "simulate",
        "--manifest",
        dir.join("manifest.json"),
        "--chain",
        fixture("chain.json"),
        "--trajectory",
        fixture("sweep.csv"),
        "--scene",
        fixture("room.json"),
        "--duration",
        duration.to_string(),
        "--seed",
        "3",
        "--out",
        dir,
    ].to_vec();
    a.extend(extra.iter().map(OsString::from));
    ok(&a);
    dir.join("log.jsonl")
}

#[test]
fn generate_writes_material_files_and_repeats_bytewise() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ok(&args!["generate", "--input", fixture("cube.obj"), "--seed", "11", "--out", d.path()]);
    }
    for f in ["skin_structural.stl", "skin_conductive.stl", "skin_flexible.stl", "skin.obj", "manifest.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        assert!(!x.is_empty(), "{f} empty");
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
    let m = json(&a.path().join("manifest.json"));
    assert_eq!(m["sites"].as_array().unwrap().len(), 4);
    let obj = std::fs::read_to_string(a.path().join("skin.obj")).unwrap();
    for mat in ["structural", "conductive", "flexible"] {
        assert!(obj.contains(&format!("usemtl {mat}")), "no {mat} group");
    }
    assert!(a.path().join("config.resolved.toml").exists());
}

#[test]
fn invalid_mesh_exits_2_with_findings() {
    let d = tempfile::tempdir().unwrap();
    let out = skinsim(&args!["generate", "--input", fixture("broken.obj"), "--out", d.path()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "validation");
    let report = json(&d.path().join("validation.json"));
    assert_eq!(report["findings"][0]["kind"], "inconsistent_winding");
}

#[test]
fn arm_fixture_carries_forty_sites() {
    let d = tempfile::tempdir().unwrap();
    ok(&args!["generate", "--input", "builtin:arm_links", "--sites", "40", "--out", d.path()]);
    let m = json(&d.path().join("manifest.json"));
    let sites = m["sites"].as_array().unwrap();
    assert_eq!(sites.len(), 40);
    let pos: Vec<[f64; 3]> = sites.iter().map(|x| serde_json::from_value(x["position"].clone()).unwrap()).collect();
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            let d2: f64 = (0..3).map(|k| (pos[i][k] - pos[j][k]).powi(2)).sum();
            assert!(d2.sqrt() >= 0.03);
        }
    }
}

#[test]
fn one_second_single_nodule_rates() {
    let d = tempfile::tempdir().unwrap();
    let lines = log_lines(&cube_run(d.path(), 1, 1.0, &[]));
    let tof = lines.iter().filter(|l| l["type"] == "tof").count();
    let sc = lines.iter().filter(|l| l["type"] == "sc").count();
    assert_eq!(tof, 12);
    assert!((40..=44).contains(&sc), "{sc} SC samples");
    let t: Vec<f64> = lines.iter().map(|l| l["t"].as_f64().unwrap()).collect();
    assert!(t.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn zero_duration_gives_empty_log() {
    let d = tempfile::tempdir().unwrap();
    let log = cube_run(d.path(), 1, 0.0, &[]);
    assert_eq!(std::fs::read_to_string(log).unwrap(), "");
}

#[test]
fn simulation_repeats_for_equal_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let la = std::fs::read(cube_run(a.path(), 2, 2.0, &[])).unwrap();
    let lb = std::fs::read(cube_run(b.path(), 2, 2.0, &[])).unwrap();
    assert_eq!(la, lb);
}

#[test]
fn no_tof_run_has_no_frames() {
    let d = tempfile::tempdir().unwrap();
    let lines = log_lines(&cube_run(d.path(), 1, 1.0, &["--no-tof"]));
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|l| l["type"] == "sc"));
}

#[test]
fn unreadable_input_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let out = skinsim(&args![
        "simulate", "--manifest", p.join("nope.json"), "--chain", fixture("chain.json"),
        "--trajectory", fixture("sweep.csv"), "--out", p,
    ]);
    assert_eq!(out.status.code(), Some(3));
    let garbage = p.join("garbage.csv");
    std::fs::write(&garbage, "t,q1\n0,abc\n").unwrap();
    ok(&args!["generate", "--input", fixture("cube.obj"), "--sites", "1", "--out", p]);
    let out = skinsim(&args![
        "simulate", "--manifest", p.join("manifest.json"), "--chain", fixture("chain.json"),
        "--trajectory", garbage, "--out", p,
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_overrides_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let out = skinsim(&args!["generate", "--set", "generate.skin.site_cnt=3", "--out", d.path()]);
    assert_eq!(out.status.code(), Some(2));
    let out = skinsim(&args!["calibrate", "--set", "seed=-1", "--out", d.path()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn wall_cloud_keeps_every_valid_zone() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(&args!["generate", "--input", fixture("cube.obj"), "--sites", "1", "--out", p]);
    // imager on the top face looking straight up at the wall
    let chain = r#"{"links": ["base", "turntable"],
        "joints": [{"axis": [0, 0, 1], "type": "revolute"}],
        "mounts": [{"link": 1, "site_id": 0, "local": {"translation": [0.05, 0, 0.11]}}]}"#;
    let chain_path = p.join("chain.json");
    std::fs::write(&chain_path, chain).unwrap();
    ok(&args![
        "simulate", "--manifest", p.join("manifest.json"), "--chain", chain_path, "--trajectory", fixture("sweep.csv"),
        "--scene", fixture("wall.json"), "--duration", "2", "--out", p,
    ]);
    let lines = log_lines(&p.join("log.jsonl"));
    let valid: usize = lines
        .iter()
        .filter(|l| l["type"] == "tof")
        .map(|l| l["valid"].as_array().unwrap().iter().filter(|v| v.as_bool().unwrap()).count())
        .sum();
    assert_eq!(valid, 24 * 64);
    ok(&args![
        "reconstruct", "--log", p.join("log.jsonl"), "--chain", chain_path, "--trajectory", fixture("sweep.csv"),
        "--format", "ascii", "--out", p,
    ]);
    let ply = std::fs::read_to_string(p.join("cloud.ply")).unwrap();
    let (header, body) = ply.split_once("end_header\n").unwrap();
    assert!(header.contains(&format!("element vertex {valid}")));
    let rows: Vec<Vec<f64>> = body.lines().map(|l| l.split(' ').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), valid);
    for r in rows {
        assert!((r[2] - 1.0).abs() < 0.06, "z = {}", r[2]);
    }
}

fn calibrated_logs(dir: &Path) -> PathBuf {
    ok(&args!["calibrate", "--emit-logs", "--seed", "5", "--out", dir]);
    dir.join("logs")
}

fn all_log_args(logs: &Path) -> Vec<OsString> {
    let mut out = Vec::new();
    for tof in ["with_tof", "no_tof"] {
        for cov in ["none", "rest", "squeeze"] {
            out.push("--log".into());
            out.push(format!("{tof}:{cov}={}", logs.join(format!("{tof}_{cov}.jsonl")).display()).into());
        }
    }
    out
}

#[test]
fn calibrated_logs_reproduce_the_table() {
    let d = tempfile::tempdir().unwrap();
    let logs = calibrated_logs(d.path());
    let out_dir = d.path().join("snr");
    let mut a = args!["snr", "--labels", logs.join("labels.csv"), "--out", out_dir].to_vec();
    a.extend(all_log_args(&logs));
    ok(&a);
    let csv = std::fs::read_to_string(out_dir.join("snr.csv")).unwrap();
    assert!(csv.starts_with("config,ring,mu_n,sigma_n,mu,snr,contact\n"));
    assert_eq!(csv.lines().count(), 1 + 6 * 3);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    let table = std::fs::read_to_string(out_dir.join("table1.txt")).unwrap();
    assert!(!table.contains("omitted"));
    let worst: f64 = table
        .lines()
        .find_map(|l| l.strip_prefix("worst relative deviation from published: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(worst < 0.15, "worst {worst}");
}

#[test]
fn labels_missing_a_site_give_partial_report() {
    let d = tempfile::tempdir().unwrap();
    let logs = calibrated_logs(d.path());
    let labels = std::fs::read_to_string(logs.join("labels.csv")).unwrap();
    let trimmed: String = labels.lines().filter(|l| !l.starts_with("no_tof:rest,1,")).map(|l| format!("{l}\n")).collect();
    let labels_path = d.path().join("partial.csv");
    std::fs::write(&labels_path, trimmed).unwrap();
    let out_dir = d.path().join("snr");
    let mut a = args!["snr", "--labels", labels_path, "--out", out_dir].to_vec();
    a.extend(all_log_args(&logs));
    ok(&a);
    let table = std::fs::read_to_string(out_dir.join("table1.txt")).unwrap();
    assert!(table.contains("no_tof:rest: site 1 has no labels"), "{table}");
    assert!(table.contains("no_tof:rest: 2 usable rings, need 3"));
    let csv = std::fs::read_to_string(out_dir.join("snr.csv")).unwrap();
    assert!(!csv.contains("no_tof:rest,"));
    assert_eq!(csv.lines().count(), 1 + 5 * 3);
}

#[test]
fn calibration_verification_and_infeasible_targets() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(&args!["calibrate", "--verify", "--out", d.path()]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("orderings held in 20/20 seeds"));
    let cal = json(&d.path().join("calibration.json"));
    assert!(cal["max_predicted_error"].as_f64().unwrap() < 0.15);
    let csv = std::fs::read_to_string(d.path().join("verification.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let rel: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(rel.abs() < 0.15, "{line}");
    }
    let out = skinsim(&args!["calibrate", "--set", "calibration.targets=[[50,13,22],[40,37,45]]", "--out", d.path()]);
    assert_eq!(out.status.code(), Some(4));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "numerical");
}

#[test]
fn config_file_paths_resolve_from_its_directory() {
    let d = tempfile::tempdir().unwrap();
    let cfg = fixture("run.toml");
    ok(&args!["--config", cfg, "generate", "--out", d.path()]);
    ok(&args!["--config", cfg, "simulate", "--manifest", d.path().join("manifest.json"), "--duration", "1", "--out", d.path()]);
    let resolved = std::fs::read_to_string(d.path().join("config.resolved.toml")).unwrap();
    assert!(resolved.contains(&format!("scene = \"{}\"", fixture("room.json").display())));
    assert!(resolved.contains("seed = 7"));
    assert!(resolved.contains("duration = 1.0"));
}
