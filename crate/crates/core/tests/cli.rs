use ahlfors::cli::RunReport;
use std::path::Path;
use std::process::{Command, Output};

const POWER_THM3: &str = r#"
[map]
name = "power_curve"
d = 2

[exhaustion]
name = "norm_squared"
k = 1

[profile]
grid = { min = 0.5, max = 50.0, ratio = 1.3 }
n_samples = 4000
seed = 1
sampler = "stratified"

[criterion]
kind = "thm3"
epsilon = 0.5
"#;

fn ahlfors(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ahlfors")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn catalog_listing_is_deterministic() {
    let a = ahlfors(&["list-catalog"]);
    let b = ahlfors(&["list-catalog"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    for name in ["power_curve", "exp_curve", "linear_embedding", "norm_squared", "1..=64", "1 <= k <= m"] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn derivative_criterion_on_a_power_curve_completes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), POWER_THM3);
    let out = dir.path().join("out");
    let o = ahlfors(&["run", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let radii = std::fs::read_to_string(out.join("radii.csv")).unwrap();
    assert!(radii.lines().count() >= 2, "{radii}");
    for name in ["report.json", "profile.csv", "inequality.csv", "plotdata/t_k.dat"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let plot = std::fs::read_to_string(out.join("plotdata/t_k.dat")).unwrap();
    assert!(plot.lines().all(|l| l.split_whitespace().count() == 2));
    // the report round-trips through the strict schema
    let json = std::fs::read_to_string(out.join("report.json")).unwrap();
    let report: RunReport = serde_json::from_str(&json).unwrap();
    assert_eq!(report.schema_version, ahlfors::cli::SCHEMA_VERSION);
    assert_eq!(serde_json::to_string_pretty(&report).unwrap(), json);
}

#[test]
fn degenerate_maps_exit_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = POWER_THM3
        .replace("name = \"power_curve\"\nd = 2", "name = \"degenerate_map\"")
        .replace("kind = \"thm3\"\nepsilon = 0.5", "kind = \"thm2\"");
    let config = write_config(dir.path(), &text);
    let o = ahlfors(&["run", &config, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("criteria") && err.contains("degenerate"), "{err}");
}

#[test]
fn schema_violations_name_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = POWER_THM3.replace("k = 1", "k = 1\nr0 = 1.0");
    let config = write_config(dir.path(), &text);
    let o = ahlfors(&["run", &config]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 12") && err.contains("r0"), "{err}");

    let config = write_config(dir.path(), &POWER_THM3.replace("seed = 1", "seed = 1\nsamples = 3"));
    let o = ahlfors(&["run", &config]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 14"));
}

#[test]
fn unsatisfied_hypotheses_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), POWER_THM3);
    let out = dir.path().join("o");
    let o = ahlfors(&[
        "run",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "9",
        "--override",
        "criterion={kind = \"thm2\", count = 3}",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let report: RunReport = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.seeds.run, 9);
    assert_eq!(report.criterion.unwrap().selected.len(), 3);
}
