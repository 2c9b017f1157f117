use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use mbe_cli::{cmd_compare, cmd_simulate, cmd_sweep, cmd_verify, CliError, Overrides};
use mbe_core::io::{read_energy_csv, read_snapshot};

fn config(model: &str, eta_sq: f64, scheme: &str, tau: f64, t_final: f64, n: usize, initial: &str) -> String {
    format!(
        r#"[model]
kind = "{model}"
eta_sq = {eta_sq}

[scheme]
kind = "{scheme}"
tau = {tau}
t_final = {t_final}

[grid]
n = {n}

[initial]
{initial}
"#
    )
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn out(dir: &Path) -> Overrides {
    Overrides {
        output_dir: Some(dir.join("out")),
        ..Overrides::default()
    }
}

fn mbe(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mbe")).args(args).output().unwrap()
}

#[test]
fn simulate_writes_monotone_energy_log() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "trig.toml",
        &config("sinc", 0.01, "imex", 0.001, 1.0, 128, "kind = \"trig\""),
    );
    let s = cmd_simulate(&cfg, &out(tmp.path())).unwrap();
    assert_eq!(s.n_steps, 1000);
    assert_eq!(s.run_dir, tmp.path().join("out/trig"));
    let recs = read_energy_csv(s.run_dir.join("energy.csv")).unwrap();
    assert_eq!(recs.len(), 1001);
    assert!(recs.windows(2).all(|w| w[1].energy <= w[0].energy + 1e-12));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(s.run_dir.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["n_steps"], 1000);
    assert_eq!(meta["blowup"], false);
    assert_eq!(meta["config"]["model"]["kind"], "sinc");
    assert_eq!(meta["config"]["scheme"]["tau"], 0.001);
    assert_eq!(meta["config"]["grid"]["nx"], 128);
}

#[test]
fn overrides_and_snapshots_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "rand.toml",
        &config("square", 0.01, "bdf2", 0.01, 0.5, 32, "kind = \"random\"\nseed = 1"),
    );
    let o = Overrides {
        record_every: Some(10),
        snapshot_every: Some(25),
        seed: Some(77),
        ..out(tmp.path())
    };
    let a = cmd_simulate(&cfg, &o).unwrap();
    assert_eq!(a.records, 6);
    assert_eq!(a.snapshots, 3);
    let snap = read_snapshot(a.run_dir.join("snapshots/snap_000025.mbef")).unwrap();
    assert_eq!(snap.step, 25);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.run_dir.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 77);

    let csv_a = fs::read(a.run_dir.join("energy.csv")).unwrap();
    let snap_a = fs::read(a.run_dir.join("snapshots/snap_000050.mbef")).unwrap();
    let b = cmd_simulate(
        &cfg,
        &Overrides {
            output_dir: Some(tmp.path().join("again")),
            ..o.clone()
        },
    )
    .unwrap();
    assert_eq!(csv_a, fs::read(b.run_dir.join("energy.csv")).unwrap());
    assert_eq!(snap_a, fs::read(b.run_dir.join("snapshots/snap_000050.mbef")).unwrap());

    assert!(matches!(
        cmd_simulate(&cfg, &Overrides { record_every: Some(0), ..o }),
        Err(CliError::Usage(_))
    ));
}

#[test]
fn restart_from_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "first.toml",
        &config("sinc", 0.01, "imex", 0.01, 0.2, 32, "kind = \"trig\""),
    );
    let o = Overrides {
        snapshot_every: Some(10),
        ..out(tmp.path())
    };
    let s = cmd_simulate(&cfg, &o).unwrap();
    let snap = s.run_dir.join("snapshots/snap_000010.mbef");
    let second = write(
        tmp.path(),
        "second.toml",
        &config(
            "sinc",
            0.01,
            "imex",
            0.01,
            0.1,
            32,
            &format!("kind = \"file\"\npath = \"{}\"", snap.display()),
        ),
    );
    let r = cmd_simulate(&second, &out(tmp.path())).unwrap();
    let full = read_energy_csv(s.run_dir.join("energy.csv")).unwrap();
    let tail = read_energy_csv(r.run_dir.join("energy.csv")).unwrap();
    assert_eq!(tail.last().unwrap().energy, full.last().unwrap().energy);
}

#[test]
fn compare_joins_on_step() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write(tmp.path(), "sinc.toml", &config("sinc", 0.01, "imex", 0.01, 0.5, 32, "kind = \"trig\""));
    let b = write(
        tmp.path(),
        "classical.toml",
        &config("classical", 0.01, "imex", 0.02, 0.5, 32, "kind = \"random\"\nseed = 3"),
    );
    let s = cmd_compare(&a, &b, &out(tmp.path())).unwrap();
    // steps 0..=50 from a, of which 0..=25 coincide with b
    assert_eq!(s.rows, 51);
    let text = fs::read_to_string(s.run_dir.join("compare.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("step,time_a,time_b,energy_a,energy_b"));
    assert_eq!(lines.len(), 52);
    let last: Vec<&str> = lines[51].split(',').collect();
    assert_eq!(last[0], "50");
    assert!(last[2].is_empty() && !last[1].is_empty());

    let c = write(tmp.path(), "coarse.toml", &config("sinc", 0.01, "imex", 0.01, 0.5, 16, "kind = \"trig\""));
    assert!(matches!(cmd_compare(&a, &c, &out(tmp.path())), Err(CliError::Usage(_))));
}

#[test]
fn sweep_brackets_large_eta_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "row.toml",
        r#"[model]
kind = "sinc"
eta_sq = 0.1

[sweep]
scheme = "imex"
t_final = 200.0
tau_list = [1.0, 2.0]

[grid]
n = 256

[initial]
kind = "trig"
"#,
    );
    let (dir, r) = cmd_sweep(&cfg, &out(tmp.path())).unwrap();
    assert_eq!((r.tau_lo, r.tau_hi), (Some(1.0), Some(2.0)));
    let bracket: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("bracket.json")).unwrap()).unwrap();
    assert_eq!(bracket["closed"], true);
    assert_eq!(fs::read_to_string(dir.join("sweep.csv")).unwrap().lines().count(), 3);
}

#[test]
fn verify_default_suite_passes() {
    let r = cmd_verify(100_000, 0).unwrap();
    assert!(r.passed(), "{:#?}", r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    assert!(r.checks.len() >= 14);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let outdir = tmp.path().join("o");
    let o = outdir.to_str().unwrap();

    assert_eq!(mbe(&[]).status.code(), Some(1));
    assert_eq!(mbe(&["simulate"]).status.code(), Some(1));
    assert_eq!(mbe(&["--help"]).status.code(), Some(0));
    assert_eq!(mbe(&["simulate", "/nonexistent.toml"]).status.code(), Some(1));

    let bad = write(tmp.path(), "bad.toml", &config("sinc", 0.01, "imex", -1.0, 1.0, 16, "kind = \"trig\""));
    let r = mbe(&["simulate", bad.to_str().unwrap(), "--output-dir", o]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("tau"));

    let ok = write(tmp.path(), "ok.toml", &config("sinc", 0.01, "imex", 0.01, 0.1, 16, "kind = \"trig\""));
    assert_eq!(mbe(&["simulate", ok.to_str().unwrap(), "--output-dir", o]).status.code(), Some(0));

    let blow = config("classical", 0.01, "imex", 1.0, 50.0, 32, "kind = \"random\"\namplitude = 1.0");
    let soft = write(tmp.path(), "soft.toml", &blow);
    assert_eq!(mbe(&["simulate", soft.to_str().unwrap(), "--output-dir", o]).status.code(), Some(0));
    let fatal = write(tmp.path(), "fatal.toml", &format!("{blow}\n[output]\nblowup_fatal = true\n"));
    assert_eq!(mbe(&["simulate", fatal.to_str().unwrap(), "--output-dir", o]).status.code(), Some(3));
    let meta = fs::read_to_string(outdir.join("fatal/metadata.json")).unwrap();
    assert!(meta.contains("\"blowup\": true"));

    assert_eq!(mbe(&["verify", "--samples", "2000", "--seed", "4"]).status.code(), Some(0));
    assert_eq!(mbe(&["verify", "--samples", "0"]).status.code(), Some(1));
}
