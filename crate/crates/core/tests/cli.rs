//! The `pairprobe` binary: subcommands, outputs and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use pairprobe::config::RunConfig;

const SMALL: &str = "
[grid]
r_max = 400.0
n_points = 1024

[initial]
manifolds = [\"triplet\"]

[delays]
max_ps = 300.0
step_ps = 2.0

[spectral]
t_start_ps = 50.0

[eigen]
write_wavefunctions = true

[resonances]
j = [2]
e_min_uk = 50.0
e_max_uk = 600.0
samples = 40

[ensemble]
j_max = 4

[map]
detunings_cm1 = [-3.0, -4.0, -6.0, -10.0, -14.0]
";

fn pairprobe(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairprobe")).args(args).current_dir(dir).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn convert_units() {
    let dir = tempfile::tempdir().unwrap();
    let o = pairprobe(&["convert-units", "1", "cm-1", "GHz"], dir.path());
    assert!(o.status.success());
    let out = String::from_utf8_lossy(&o.stdout);
    let v: f64 = out.split_whitespace().next().unwrap().parse().unwrap();
    assert!((v - 29.979_245_8).abs() < 1e-9, "{out}");

    let o = pairprobe(&["convert-units", "1", "cm-1", "ps"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("cm-1") && e.contains("ps"), "{e}");
}

#[test]
fn config_errors_exit_with_two_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = pairprobe(&["eigen", "--config", "missing.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--config"));

    let bad = write_config(dir.path(), "bad.toml", "[pulse]\nfwhm_ps = -1.0\n");
    let o = pairprobe(&["pump-probe", "--config", &bad], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pulse.fwhm_ps"), "{}", stderr(&o));

    let unknown = write_config(dir.path(), "unknown.toml", "[grid]\nrmax = 10.0\n");
    let o = pairprobe(&["eigen", "--config", &unknown], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rmax"), "{}", stderr(&o));

    let grid = write_config(dir.path(), "grid.toml", "[grid]\nn_points = 1000\n");
    let o = pairprobe(&["eigen", "--config", &grid], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("grid.n_points"), "{}", stderr(&o));

    let o = pairprobe(&["eigen", "--threads", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("short.csv");
    let mut text = String::from("# config_hash=abc\ndelay_ps,S_total,S_triplet,S_singlet\n");
    for i in 0..20 {
        text.push_str(&format!("{},{},{},\n", 2 * i, 1.0 + 0.1 * (i as f64).cos(), 1.0));
    }
    std::fs::write(&csv, text).unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let o = pairprobe(&["spectrum", "--config", &cfg, "--input", csv.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn pump_probe_writes_stamped_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let hash = RunConfig::from_toml(SMALL).unwrap().hash();
    let out = dir.path().join("run");
    let o = pairprobe(
        &["pump-probe", "--config", &cfg, "--out", out.to_str().unwrap(), "--checkpoint-every", "100"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let files = csv_files(&out);
    assert!(files.iter().any(|p| p.ends_with("signal.csv")));
    assert!(files.iter().any(|p| p.ends_with("lines.csv")));
    for f in &files {
        let text = std::fs::read_to_string(f).unwrap();
        assert_eq!(text.lines().next().unwrap(), format!("# config_hash={hash}"), "{}", f.display());
    }
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("S(0+)") && summary.contains(&hash));
    // First delay after the pump window, then 100, 200 and 300 ps.
    let cps = std::fs::read_dir(out.join("checkpoints").join("signal")).unwrap().count();
    assert_eq!(cps, 4);

    // The spectrum subcommand re-reads the signal and finds the same lines.
    let spec_out = dir.path().join("spec");
    let o = pairprobe(
        &[
            "spectrum",
            "--config",
            &cfg,
            "--input",
            out.join("signal.csv").to_str().unwrap(),
            "--out",
            spec_out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let a = std::fs::read_to_string(out.join("lines.csv")).unwrap();
    let b = std::fs::read_to_string(spec_out.join("lines.csv")).unwrap();
    assert_eq!(a.lines().count(), b.lines().count());
}

fn signal_column(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut rows = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    rows.records().map(|r| r.unwrap()[1].parse().unwrap()).collect()
}

#[test]
fn zero_pump_gives_flat_signal_and_no_lines() {
    let dir = tempfile::tempdir().unwrap();
    // The probe defaults to the pump, so both are off here.
    let minimal = write_config(dir.path(), "minimal.toml", &format!("{SMALL}\n[pulse]\nenergy_nj = 0.0\n"));
    let probed = write_config(
        dir.path(),
        "probed.toml",
        &format!("{SMALL}\n[pulse]\nenergy_nj = 0.0\n[probe]\nenergy_nj = 1.5\n"),
    );
    for (cfg, level) in [(minimal, None), (probed, Some(1.0))] {
        let out = dir.path().join("flat");
        let o = pairprobe(&["pump-probe", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        let s = signal_column(&out.join("signal.csv"));
        assert!(s.iter().all(|&x| (x - s[0]).abs() < 1e-9), "{s:?}");
        if let Some(l) = level {
            assert!((s[0] - l).abs() < 1e-9, "{}", s[0]);
        }
        let lines = std::fs::read_to_string(out.join("lines.csv")).unwrap();
        assert_eq!(lines.lines().count(), 2, "{lines}");
    }
}

#[test]
fn eigen_resonances_ensemble_and_map() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("o");
    let out_s = out.to_str().unwrap();

    let o = pairprobe(&["eigen", "--config", &cfg, "--out", out_s], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("eigen_a-triplet_J0.csv")).unwrap();
    let nodes: Vec<usize> = text.lines().skip(2).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(nodes.len() >= 15);
    assert!(nodes.iter().enumerate().all(|(i, &n)| n == i), "{nodes:?}");
    let blob = std::fs::metadata(out.join("eigen_a-triplet_J0_v000.bin")).unwrap().len();
    assert_eq!(blob, 8 * (3 + 1024));

    let o = pairprobe(&["resonances", "--config", &cfg, "--out", out_s], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("resonances.csv")).unwrap();
    assert_eq!(text.lines().count(), 3, "{text}");

    let o = pairprobe(&["ensemble", "--config", &cfg, "--out", out_s], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("ensemble_triplet.csv")).unwrap();
    assert!(text.lines().count() > 3);

    let o = pairprobe(&["map", "--config", &cfg, "--out", out_s], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("map.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 5);
}
