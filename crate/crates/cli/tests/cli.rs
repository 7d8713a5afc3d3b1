use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn volterra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volterra")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("volterra-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const DET: &str = r#"
[kernel]
rho = 1.5
[domain]
initial = "first_mode"
[ladder]
direction = "time"
n_elem = [16]
n_steps = [8, 16, 32, 64]
"#;

const WEAK: &str = r#"
[kernel]
rho = 1.5
[noise]
model = "inverse_power"
alpha = 1.0
truncation = 16
nu = 0.5
[ladder]
direction = "time"
n_elem = [16]
n_steps = [8, 16, 32]
[estimator]
kind = "monte_carlo"
paths = 400
seed = 5
"#;

#[test]
fn weights_csv_has_17_digits() {
    let o = volterra(&["weights", "--rho", "1.5", "--dt", "1", "--count", "3"]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    assert_eq!(s, "k,weight\n0,1.0000000000000000e0\n1,5.0000000000000000e-1\n2,3.7500000000000000e-1\n");
}

#[test]
fn contour_weights_agree_with_recurrence() {
    let parse = |o: Output| -> Vec<f64> {
        String::from_utf8(o.stdout).unwrap().lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
    };
    let rec = parse(volterra(&["weights", "--rho", "1.3", "--dt", "0.01", "--count", "64"]));
    let con = parse(volterra(&["weights", "--rho", "1.3", "--dt", "0.01", "--count", "64", "--method", "contour"]));
    for (a, b) in rec.iter().zip(&con) {
        assert!(((a - b) / a).abs() < 1e-10);
    }
}

#[test]
fn det_conv_writes_csv_and_metadata() {
    let dir = scratch("det");
    let cfg = write_config(&dir, DET);
    let out = dir.join("det.csv");
    let o = volterra(&["det-conv", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("h,dt,N,error,stderr,log_factor"));
    assert_eq!(lines.count(), 4);
    assert!(!csv.contains('\r'));
    let meta = std::fs::read_to_string(dir.join("det.csv.meta.toml")).unwrap();
    assert!(meta.contains("config_hash"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("slope"));
}

#[test]
fn seed_flag_changes_monte_carlo_output_and_threads_do_not() {
    let dir = scratch("seed");
    let cfg = write_config(&dir, WEAK);
    let run = |extra: &[&str]| {
        let mut args = vec!["weak-conv", "--config", cfg.as_str()];
        args.extend_from_slice(extra);
        let o = volterra(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    let a = run(&["--threads", "1"]);
    let b = run(&["--threads", "3"]);
    let c = run(&["--threads", "1", "--seed", "6"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = scratch("unknown");
    let cfg = write_config(&dir, &DET.replace("rho = 1.5", "rho = 1.5\ncolour = 3"));
    let o = volterra(&["det-conv", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn missing_config_and_bad_flags_exit_with_2() {
    assert_eq!(volterra(&["det-conv"]).status.code(), Some(2));
    assert_eq!(volterra(&["weights", "--rho", "2.5", "--dt", "1", "--count", "3"]).status.code(), Some(2));
    assert_eq!(volterra(&["presets", "--name", "nonexistent"]).status.code(), Some(2));
    assert_eq!(volterra(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn inadmissible_noise_exits_with_4() {
    let dir = scratch("inadmissible");
    let cfg = write_config(&dir, &WEAK.replace("nu = 0.5", "nu = 0.7"));
    let o = volterra(&["weak-conv", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn precision_loss_exits_with_3() {
    let o = volterra(&["weights", "--rho", "1.5", "--dt", "1", "--count", "200", "--method", "contour", "--radius", "0.1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn drop_coarse_shortens_the_fit() {
    let dir = scratch("drop");
    let cfg = write_config(&dir, DET);
    let out = dir.join("d.csv");
    let o = volterra(&["det-conv", "--config", &cfg, "--out", out.to_str().unwrap(), "--drop-coarse", "1"]);
    assert!(o.status.success());
    let meta = std::fs::read_to_string(dir.join("d.csv.meta.toml")).unwrap();
    assert!(meta.contains("drop_coarse = 1"));
    assert!(meta.contains("rows_used = 3"));
}

#[test]
fn presets_round_trip_through_the_loader() {
    let dir = scratch("presets");
    let o = volterra(&["presets", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success());
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        assert!(text.contains("[kernel]"));
        n += 1;
    }
    assert_eq!(n, 7);
}

#[test]
fn ml_eval_starts_at_one() {
    let o = volterra(&["ml-eval", "--rho", "1.5", "--x-max", "4", "--points", "5"]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("x,value"));
    assert_eq!(lines.next(), Some("0.0000000000000000e0,1.0000000000000000e0"));
    assert_eq!(lines.count(), 4);
}
