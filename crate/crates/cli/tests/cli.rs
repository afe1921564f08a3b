use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const TOY_MM: &str = "\
model = toy
epsilon = 1e-2
sampler = mm
free_energy = exact
proposal = langevin
reconstruction = exact
dt_macro = 0.05
n_steps = 100000
n_replicas = 4
base_seed = 7
";

const TOY_MALA: &str = "\
model = toy
epsilon = 1e-2
sampler = mala
dt_micro = 1e-3
n_steps = 100000
n_replicas = 4
base_seed = 7
";

fn micromacro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_micromacro"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn summary_value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in summary"))
        .to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn toy_exact_setting_accepts_every_reconstruction() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "mm.cfg", TOY_MM);
    let out = tmp.path().join("out");
    let res = micromacro(&["run", s(&cfg), "--out", s(&out), "--threads", "2"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert_eq!(summary, String::from_utf8(res.stdout).unwrap());
    assert_eq!(summary_value(&summary, "micro_acc_rate"), "1");
    assert_eq!(summary_value(&summary, "n_replicas"), "4");
    let accepted: f64 = summary_value(&summary, "macro_acc_rate").parse().unwrap();
    assert!(accepted > 0.5 && accepted < 1.0, "{accepted}");
    for i in 0..4 {
        let trace = fs::read_to_string(out.join(format!("trace_{i}.csv"))).unwrap();
        assert_eq!(trace.lines().next(), Some("step,observable,macro_accepted,micro_accepted"));
        assert_eq!(trace.lines().count(), 100_001);
    }
    let hist = fs::read_to_string(out.join("histogram.csv")).unwrap();
    assert_eq!(hist.lines().count(), 101);
}

#[test]
fn reruns_are_identical_apart_from_wall_time() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "mm.cfg", &TOY_MM.replace("100000", "20000"));
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for (dir, threads) in dirs.iter().zip(["1", "3"]) {
        let res = micromacro(&["run", s(&cfg), "--out", s(dir), "--threads", threads]);
        assert!(res.status.success());
    }
    for name in ["trace_0.csv", "trace_3.csv", "histogram.csv"] {
        assert_eq!(
            fs::read(dirs[0].join(name)).unwrap(),
            fs::read(dirs[1].join(name)).unwrap(),
            "{name}"
        );
    }
    let strip = |p: &Path| {
        fs::read_to_string(p.join("summary.txt"))
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("wall_time"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&dirs[0]), strip(&dirs[1]));
}

#[test]
fn seed_flag_changes_the_chain() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "mm.cfg", &TOY_MM.replace("100000", "5000"));
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(micromacro(&["run", s(&cfg), "--out", s(&a)]).status.success());
    assert!(micromacro(&["run", s(&cfg), "--out", s(&b), "--seed", "8"]).status.success());
    let summary = fs::read_to_string(b.join("summary.txt")).unwrap();
    assert_eq!(summary_value(&summary, "base_seed"), "8");
    assert_ne!(
        fs::read(a.join("trace_0.csv")).unwrap(),
        fs::read(b.join("trace_0.csv")).unwrap()
    );
}

#[test]
fn thinning_keeps_every_kth_step() {
    let tmp = TempDir::new().unwrap();
    let text = TOY_MM.replace("100000", "1000").replace("n_replicas = 4", "n_replicas = 1") + "thin = 10\n";
    let cfg = write_config(tmp.path(), "mm.cfg", &text);
    let out = tmp.path().join("out");
    assert!(micromacro(&["run", s(&cfg), "--out", s(&out)]).status.success());
    let trace = fs::read_to_string(out.join("trace_0.csv")).unwrap();
    let steps: Vec<usize> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(steps, (0..1000).step_by(10).collect::<Vec<_>>());
}

#[test]
fn traces_can_be_disabled() {
    let tmp = TempDir::new().unwrap();
    let text = TOY_MM.replace("100000", "1000") + "write_traces = false\n";
    let cfg = write_config(tmp.path(), "mm.cfg", &text);
    let out = tmp.path().join("out");
    assert!(micromacro(&["run", s(&cfg), "--out", s(&out)]).status.success());
    assert!(!out.join("trace_0.csv").exists());
    assert!(out.join("summary.txt").exists());
}

#[test]
fn missing_config_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let res = micromacro(&["run", s(&tmp.path().join("nope.cfg"))]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn unknown_key_is_a_config_error_with_line_number() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.cfg", &format!("{TOY_MM}colour = blue\n"));
    let res = micromacro(&["run", s(&cfg), "--out", s(&tmp.path().join("out"))]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("line 11"), "{err}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn failing_quadrature_is_a_runtime_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "b.cfg", "model = butane\nbeta = 1e-9\nsampler = mala\ndt_micro = 1e-6\n");
    let out = tmp.path().join("out");
    let res = micromacro(&["coeffs", s(&cfg), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(2), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(!out.exists());
}

#[test]
fn failed_write_removes_partial_output() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "mm.cfg", &TOY_MM.replace("100000", "1000"));
    let out = tmp.path().join("out");
    // A directory where the summary should go makes the last write fail.
    fs::create_dir_all(out.join("summary.txt")).unwrap();
    let res = micromacro(&["run", s(&cfg), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.join("trace_0.csv").exists());
    assert!(!out.join("histogram.csv").exists());
    assert!(out.join("summary.txt").is_dir());
}

#[test]
fn compare_writes_both_ensembles_and_gain() {
    let tmp = TempDir::new().unwrap();
    let micro = write_config(tmp.path(), "micro.cfg", &TOY_MALA.replace("100000", "20000"));
    let mm = write_config(tmp.path(), "mm.cfg", &TOY_MM.replace("100000", "20000"));
    let out = tmp.path().join("cmp");
    let res = micromacro(&["compare", s(&micro), s(&mm), "--out", s(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let gain = fs::read_to_string(out.join("gain.txt")).unwrap();
    let get = |k: &str| -> f64 { summary_value(&gain, k).parse().unwrap() };
    assert_eq!(get("total_gain"), get("variance_gain") * get("runtime_gain"));
    assert_eq!(get("micro_acc_rate"), 1.0);
    assert!(out.join("micro/summary.txt").exists());
    assert!(out.join("mm/trace_3.csv").exists());
}

#[test]
fn compare_of_identical_configs_has_unit_variance_gain() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "mm.cfg", &TOY_MM.replace("100000", "5000"));
    let out = tmp.path().join("cmp");
    let res = micromacro(&["compare", s(&cfg), s(&cfg), "--out", s(&out)]);
    assert!(res.status.success());
    let gain = fs::read_to_string(out.join("gain.txt")).unwrap();
    assert_eq!(summary_value(&gain, "variance_gain"), "1");
}

#[test]
fn compare_rejects_mismatched_settings() {
    let tmp = TempDir::new().unwrap();
    let micro = write_config(tmp.path(), "micro.cfg", &TOY_MALA.replace("base_seed = 7", "base_seed = 8"));
    let mm = write_config(tmp.path(), "mm.cfg", TOY_MM);
    let out = tmp.path().join("cmp");
    let res = micromacro(&["compare", s(&micro), s(&mm), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("base_seed"));
    assert!(!out.exists());
}

#[test]
fn coeffs_writes_a_readable_table() {
    let tmp = TempDir::new().unwrap();
    let text = "model = toy\nsampler = mala\ndt_micro = 1e-3\ntable_nodes = 65\n";
    let cfg = write_config(tmp.path(), "toy.cfg", text);
    let out = tmp.path().join("tab");
    let res = micromacro(&["coeffs", s(&cfg), "--out", s(&out), "--threads", "2"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let file = fs::File::open(out.join("coefficients.txt")).unwrap();
    let table = micromacro::effective::CoefficientTable::read_from(std::io::BufReader::new(file)).unwrap();
    let c = table.interpolate_clamped(0.5);
    assert!((c.sigma2 - 1.0).abs() < 1e-9);

    // A run can reuse the table instead of rebuilding it.
    let mm = format!(
        "model = toy\nsampler = mm\nfree_energy = table\nproposal = effective\nreconstruction = exact\n\
         dt_macro = 0.05\nn_steps = 2000\ntable_file = {}\n",
        out.join("coefficients.txt").display()
    );
    let cfg = write_config(tmp.path(), "mm.cfg", &mm);
    let res = micromacro(&["run", s(&cfg), "--out", s(&tmp.path().join("run"))]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn selftest_passes() {
    let res = micromacro(&["selftest"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stdout));
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
