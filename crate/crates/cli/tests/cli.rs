use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hole_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hole-lab"))
        .args(args)
        .env_remove("HOLE_LAB_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn verify_detw_instance_passes() {
    let o = hole_lab(&[
        "verify", "--scope", "detw", "--m", "2", "--n", "3", "--json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["results"]["passed"], true);
    assert_eq!(v["results"]["checked"], 20);
    for inst in v["results"]["instances"].as_array().unwrap() {
        assert_eq!(inst["params"]["m"], 2);
        assert_eq!(inst["params"]["n"], 3);
        assert_eq!(inst["detail"]["degrees"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn verify_coefficient_is_unit() {
    let o = hole_lab(&[
        "verify",
        "--scope",
        "coefficient",
        "--m",
        "2",
        "--n",
        "2",
        "--json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let c = v["results"]["instances"][0]["detail"]["coefficient"]
        .as_i64()
        .unwrap();
    assert_eq!(c.abs(), 1);
}

#[test]
fn verify_capacity_and_usage_errors() {
    assert_eq!(
        code(&hole_lab(&["verify", "--scope", "detw", "--m", "9"])),
        2
    );
    assert_eq!(
        code(&hole_lab(&[
            "verify",
            "--scope",
            "coefficient",
            "--m",
            "2",
            "--n",
            "3"
        ])),
        2
    );
    assert_eq!(code(&hole_lab(&["verify", "--scope", "everything"])), 2);
    assert_eq!(code(&hole_lab(&["verify", "--limit", "5000"])), 2);
    assert_eq!(
        code(&hole_lab(&["verify", "--scope", "indices", "--m", "0"])),
        2
    );
}

#[test]
fn verify_detsigma_and_indices_instances() {
    let o = hole_lab(&[
        "verify", "--scope", "detsigma", "--n", "40", "--rho", "0.5,0.9", "--json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["results"]["checked"], 2);
    let inst = &v["results"]["instances"][0];
    assert!(inst["detail"]["via_matrix"].is_number());

    let o = hole_lab(&[
        "verify", "--scope", "indices", "--m", "3", "--n", "7", "--json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let detail = &v["results"]["instances"][0]["detail"];
    // binom(10, 3)
    assert_eq!(detail["binom"], "120");
    assert_eq!(detail["enumerated"]["sigma_bijective"], true);
}

#[test]
fn rates_examples() {
    let o = hole_lab(&["rates", "--m", "1", "--r", "1", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let one_d = v["results"]["rates"]["one_d_rate"].as_f64().unwrap();
    assert!((one_d - 0.5).abs() < 1e-12);

    let o = hole_lab(&["rates", "--m", "2", "--r", "1", "--json"]);
    let v = json(&o);
    let s = v["results"]["rates"]["simplex_integral"].as_f64().unwrap();
    // (1/2!)(1/2 + 1/3) at r = 1
    assert!((s - 5.0 / 12.0).abs() < 1e-14);

    let o = hole_lab(&[
        "rates",
        "--m",
        "1",
        "--r",
        "0.5",
        "--lattice-n",
        "1500",
        "--json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let lat = &v["results"]["lattice"];
    let target = 0.25 * (1.0 + 0.5f64.ln());
    assert!((lat["target"].as_f64().unwrap() - target).abs() < 1e-10);
    let scaled = lat["r_scaled"].as_f64().unwrap();
    assert!((scaled - target).abs() < 0.005, "R/N² = {scaled}");
}

#[test]
fn rates_rejects_bad_radius() {
    assert_eq!(code(&hole_lab(&["rates", "--m", "1", "--r", "0"])), 2);
    assert_eq!(code(&hole_lab(&["rates", "--m", "1"])), 2);
    assert_eq!(
        code(&hole_lab(&[
            "rates", "--m", "1", "--r", "1", "--alpha", "1.5"
        ])),
        2
    );
}

#[test]
fn simulate_usage_errors() {
    let base = ["simulate", "--m", "1", "--n", "4", "--r", "1"];
    let mut a = base.to_vec();
    a.extend(["--trials", "0"]);
    assert_eq!(code(&hole_lab(&a)), 2);
    let mut a = base.to_vec();
    a.extend(["--trials", "1.5"]);
    assert_eq!(code(&hole_lab(&a)), 2);
    let mut a = base.to_vec();
    a.extend(["--trials", "100", "--workers", "0"]);
    assert_eq!(code(&hole_lab(&a)), 2);
    assert_eq!(
        code(&hole_lab(&[
            "simulate", "--m", "3", "--n", "2", "--r", "1", "--trials", "10"
        ])),
        2
    );
}

#[test]
fn simulate_writes_record_and_campaign_row() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--m",
        "1",
        "--n",
        "4",
        "--r",
        "1",
        "--k",
        "0",
        "--trials",
        "2e4",
        "--seed",
        "7",
        "--json",
        "--out",
        p(dir.path()),
    ];
    let o = hole_lab(&args);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["provenance"]["seed"], 7);
    assert!(v["provenance"]["generator"]
        .as_str()
        .unwrap()
        .contains("ChaCha20"));
    assert_eq!(v["config"]["trials"], 20000);
    let e = &v["results"]["estimate"];
    let hits = e["hits"].as_u64().unwrap();

    let on_disk: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("simulate.json")).unwrap())
            .unwrap();
    assert_eq!(on_disk["results"], v["results"]);

    // a second run appends without repeating the header
    assert_eq!(code(&hole_lab(&args)), 0);
    let csv = fs::read_to_string(dir.path().join("campaign.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "m,N,r,k,trials,hits,p_hat,ci_low,ci_high,boundary_flag_rate,seed,trial_start"
    );
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1], lines[2]);
    assert!(lines[1].starts_with(&format!("1,4,1.0,0,20000,{hits},")));
}

#[test]
fn worker_count_does_not_change_hits() {
    let run = |w: &str| {
        let o = hole_lab(&[
            "simulate",
            "--m",
            "1",
            "--n",
            "5",
            "--r",
            "0.9",
            "--k",
            "1",
            "--trials",
            "5e4",
            "--seed",
            "13",
            "--workers",
            w,
            "--json",
        ]);
        assert_eq!(code(&o), 0);
        json(&o)["results"]["estimate"].clone()
    };
    let one = run("1");
    assert_eq!(run("8"), one);
    assert_eq!(run("3"), one);
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("campaign.conf");
    fs::write(
        &cfg,
        "# flat config\nm = 1\nn = 3\nr = 0.75\ntrials = 1e4\nseed = 5\ngrid-res = 16\n",
    )
    .unwrap();
    let o = hole_lab(&["simulate", "--config", p(&cfg), "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["config"]["n"], 3);
    assert_eq!(v["config"]["seed"], 5);

    let o = hole_lab(&[
        "simulate",
        "--config",
        p(&cfg),
        "--n",
        "4",
        "--seed",
        "6",
        "--json",
    ]);
    let v = json(&o);
    assert_eq!(v["config"]["n"], 4);
    assert_eq!(v["config"]["seed"], 6);
    assert_eq!(v["config"]["r"], 0.75);

    fs::write(&cfg, "m = 1\nbogus = 2\n").unwrap();
    assert_eq!(
        code(&hole_lab(&["rates", "--config", p(&cfg), "--r", "1"])),
        2
    );
}

#[test]
fn seed_environment_variable_sets_default() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_hole-lab"));
        c.args([
            "simulate", "--m", "1", "--n", "3", "--r", "1", "--trials", "1000", "--json",
        ]);
        c.args(extra);
        c.env_remove("HOLE_LAB_SEED");
        if let Some(s) = env {
            c.env("HOLE_LAB_SEED", s);
        }
        let o = c.output().unwrap();
        assert_eq!(code(&o), 0);
        json(&o)["config"]["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None, &[]), 0);
    assert_eq!(run(Some("42"), &[]), 42);
    assert_eq!(run(Some("42"), &["--seed", "9"]), 9);
}

#[test]
fn record_reruns_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let o = hole_lab(&[
        "rates",
        "--m",
        "2",
        "--r",
        "0.7",
        "--lattice-n",
        "60",
        "--alpha",
        "0.5",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&o), 0);
    let rec = dir.path().join("rates.json");
    let first: Value = serde_json::from_str(&fs::read_to_string(&rec).unwrap()).unwrap();
    let o = hole_lab(&["rates", "--config", p(&rec), "--json"]);
    assert_eq!(code(&o), 0);
    let again = json(&o);
    assert_eq!(again["results"], first["results"]);
    assert_eq!(again["config"], first["config"]);

    // a record for another command is refused
    assert_eq!(code(&hole_lab(&["simulate", "--config", p(&rec)])), 2);
}

#[test]
fn sweep_synthetic_and_missing_list() {
    let dir = tempfile::tempdir().unwrap();
    let o = hole_lab(&[
        "sweep",
        "--m",
        "1",
        "--r",
        "0.5",
        "--n",
        "2..=6",
        "--inject",
        "exp(-0.37*N^2)",
        "--json",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&o), 0);
    let slope = json(&o)["results"]["fit"]["slope"].as_f64().unwrap();
    assert!((slope - 0.37).abs() < 1e-12);
    let dat = fs::read_to_string(dir.path().join("sweep.dat")).unwrap();
    let rows: Vec<&str> = dat.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].starts_with("2 4 "));
    let svg = fs::read_to_string(dir.path().join("sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches(r#"class="point""#).count(), 5);

    assert_eq!(
        code(&hole_lab(&[
            "sweep", "--m", "1", "--r", "0.5", "--trials", "100"
        ])),
        2
    );
    assert_eq!(
        code(&hole_lab(&[
            "sweep", "--m", "1", "--r", "0.5", "--n", "3,2", "--trials", "100"
        ])),
        2
    );
    assert_eq!(
        code(&hole_lab(&[
            "sweep", "--m", "1", "--r", "0.5", "--n", "2,3", "--inject", "0.37*N^2"
        ])),
        2
    );
}

#[test]
fn refused_fit_exits_one_and_keeps_data() {
    let dir = tempfile::tempdir().unwrap();
    let o = hole_lab(&[
        "sweep",
        "--m",
        "1",
        "--r",
        "2",
        "--k",
        "0",
        "--n",
        "8,9,10",
        "--trials",
        "500",
        "--seed",
        "1",
        "--json",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert!(v["results"]["fit"].is_null());
    assert!(v["results"]["refused"]
        .as_str()
        .unwrap()
        .contains("fit refused"));
    assert_eq!(v["results"]["points"].as_array().unwrap().len(), 3);
    assert!(dir.path().join("sweep.json").exists());
    assert!(dir.path().join("sweep.dat").exists());
    let csv = fs::read_to_string(dir.path().join("campaign.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn report_merges_split_campaigns() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let whole = dir.path().join("whole");
    for n in ["2", "3", "4"] {
        let common = [
            "simulate", "--m", "1", "--n", n, "--r", "0.75", "--k", "0", "--seed", "21",
        ];
        let mut first = common.to_vec();
        first.extend(["--trials", "3000", "--out", p(&a)]);
        assert_eq!(code(&hole_lab(&first)), 0);
        let mut second = common.to_vec();
        second.extend(["--trials", "5000", "--trial-start", "3000", "--out", p(&b)]);
        assert_eq!(code(&hole_lab(&second)), 0);
        let mut all = common.to_vec();
        all.extend(["--trials", "8000", "--out", p(&whole)]);
        assert_eq!(code(&hole_lab(&all)), 0);
    }
    let merged = hole_lab(&[
        "report",
        p(&a.join("campaign.csv")),
        p(&b.join("campaign.csv")),
        "--json",
    ]);
    assert_eq!(
        code(&merged),
        0,
        "{}",
        String::from_utf8_lossy(&merged.stderr)
    );
    let single = hole_lab(&["report", p(&whole.join("campaign.csv")), "--json"]);
    assert_eq!(code(&single), 0);
    let (m, s) = (json(&merged), json(&single));
    assert_eq!(m["results"]["estimates"], s["results"]["estimates"]);
    assert_eq!(m["results"]["fit"]["slope"], s["results"]["fit"]["slope"]);

    // the same range twice overlaps
    let o = hole_lab(&[
        "report",
        p(&a.join("campaign.csv")),
        p(&a.join("campaign.csv")),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_requires_a_single_series() {
    let dir = tempfile::tempdir().unwrap();
    for r in ["0.5", "1"] {
        for n in ["2", "3", "4"] {
            let o = hole_lab(&[
                "simulate",
                "--m",
                "1",
                "--n",
                n,
                "--r",
                r,
                "--trials",
                "2000",
                "--out",
                p(dir.path()),
            ]);
            assert_eq!(code(&o), 0);
        }
    }
    let csv = dir.path().join("campaign.csv");
    assert_eq!(code(&hole_lab(&["report", p(&csv)])), 2);
    let o = hole_lab(&["report", p(&csv), "--r", "0.5", "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["results"]["points"].as_array().unwrap().len(), 3);
}

#[test]
fn help_and_unknown_commands() {
    assert_eq!(code(&hole_lab(&["--help"])), 0);
    assert_eq!(code(&hole_lab(&["frobnicate"])), 2);
    assert_eq!(code(&hole_lab(&[])), 2);
}
