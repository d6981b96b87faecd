use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn drsub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drsub")).args(args).output().expect("binary runs")
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = r#"
objective = "facility-location"
synthetic_users = 40
synthetic_items = 25
constraint = "cardinality"
k_sweep = [2, 4]
solver = "sg"
iterations = 60
batch = 4
c = 0.5
seed = 3
timing = false
"#;

#[test]
fn shipped_configs_validate() {
    let dir = configs_dir();
    let mut paths: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .map(|p| p.display().to_string())
        .collect();
    paths.sort();
    assert!(!paths.is_empty());
    let mut args = vec!["validate"];
    args.extend(paths.iter().map(String::as_str));
    let out = drsub(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let cfg = cfg.to_str().unwrap();
    let a = drsub(&["run", cfg]);
    let b = drsub(&["run", cfg]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("config_id,solver,k,t,B,seed,value_continuous,value_rounded,evals,ms"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.starts_with("small,sg,") && r.ends_with(",0")));
}

#[test]
fn out_dir_gets_one_csv_per_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let out = tmp.path().join("out");
    std::fs::create_dir(&out).unwrap();
    let status = drsub(&["run", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]).status;
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("small.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write(tmp.path(), "typo.toml", &format!("{SMALL}iteratons = 5\n"));
    let out = drsub(&["validate", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("iteratons"));

    let bad_k = write(tmp.path(), "bad.toml", &SMALL.replace("[2, 4]", "[0, 4]"));
    assert_eq!(drsub(&["run", bad_k.to_str().unwrap()]).status.code(), Some(2));

    let fw_simplex = write(
        tmp.path(),
        "fw.toml",
        &SMALL.replace("\"sg\"", "\"fw\"").replace("\"cardinality\"", "\"simplex\"").replace("c = 0.5\n", ""),
    );
    assert_eq!(drsub(&["run", fw_simplex.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn data_errors_exit_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let junk = write(tmp.path(), "junk.dat", "not a ratings file\n");
    let cfg = write(
        tmp.path(),
        "junk.toml",
        "objective = \"facility-location\"\nratings = \"junk.dat\"\nk = 2\nsolver = \"greedy\"\n",
    );
    // the file exists, so validation passes and parsing fails
    assert!(drsub(&["validate", cfg.to_str().unwrap()]).status.success());
    assert_eq!(drsub(&["run", cfg.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(drsub(&["inspect", junk.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn missing_ratings_file_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "missing.toml",
        "objective = \"facility-location\"\nratings = \"nowhere.dat\"\nk = 2\nsolver = \"greedy\"\n",
    );
    assert_eq!(drsub(&["validate", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn generated_ratings_can_be_inspected() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("ratings.tsv");
    let f = file.to_str().unwrap();
    let gen = drsub(&["gen-synthetic", "--users", "30", "--items", "12", "--seed", "5", "-o", f]);
    assert!(gen.status.success());
    let again = drsub(&["gen-synthetic", "--users", "30", "--items", "12", "--seed", "5"]);
    assert_eq!(std::fs::read(&file).unwrap(), again.stdout);

    let out = drsub(&["inspect", f, "--format", "tsv"]);
    assert!(out.status.success());
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("users      30"), "{report}");
    assert!(report.contains("malformed  0"));
}
