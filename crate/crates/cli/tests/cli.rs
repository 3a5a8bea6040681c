use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use varfrac::mittag_leffler::MlSeriesControl;
use varfrac::solver::volterra_example_solution;
use varfrac::{Field, SpatialGrid, TimeGrid};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_varfrac"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(cmd: &mut Command) -> Output {
    cmd.env_remove("VARFRAC_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL_LINEAR: &str = r#"
problem = "linear"
[grid]
points = 4
[time]
horizon = 1.0
steps = 64
[order]
kind = "constant"
value = 0.5
[operator]
kind = "multiplication"
psi = { kind = "constant", value = -1.0 }
[initial]
kind = "constant"
value = 1.0
"#;

#[test]
fn ml_eval_prints_e() {
    let o = run(bin().args(["ml-eval", "--alpha", "1", "--beta", "1", "--z", "1"]));
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - std::f64::consts::E).abs() < 1e-15);
    assert!(stdout(&o).starts_with("2.718281828"));
}

#[test]
fn ml_eval_accepts_negative_arguments() {
    let o = run(bin().args(["ml-eval", "--alpha", "0.5", "--z", "-1"]));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.427_583_576_155_807).abs() < 1e-10);
}

#[test]
fn ml_eval_rejects_bad_order() {
    let o = run(bin().args(["ml-eval", "--alpha", "1.5", "--z", "1"]));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha"), "{}", stderr(&o));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(run(&mut bin()).status.code(), Some(2));
}

#[test]
fn verify_inequalities_table_is_deterministic() {
    let args = ["verify-inequalities", "--samples", "5000", "--seed", "7"];
    let a = run(bin().args(args));
    let b = run(bin().args(args).env("VARFRAC_THREADS", "1"));
    assert_eq!(a.stdout, b.stdout);
    let table = stdout(&a);
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("predicate,samples,violations,worst_margin"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), varfrac::bounds::SUITES.len());
    let gamma = rows.iter().find(|r| r[0] == "gamma_ordering").unwrap();
    assert_eq!(gamma[2], "0");
    let violations: usize = rows.iter().map(|r| r[2].parse::<usize>().unwrap()).sum();
    assert_eq!(a.status.code(), Some(if violations == 0 { 0 } else { 1 }));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let o = bin().args(["ml-eval", "--alpha", "1", "--z", "0"]).env("VARFRAC_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("VARFRAC_THREADS"));
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &format!("{SMALL_LINEAR}\n[output]\ncsv = \"x.csv\"\ncolour = 3\n"));
    let o = run(bin().arg("solve-linear").arg("--config").arg(&cfg));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn out_of_range_order_names_its_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &SMALL_LINEAR.replace("value = 0.5", "value = 1.5"));
    let o = run(bin().arg("solve-linear").arg("--config").arg(&cfg));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`order`"), "{}", stderr(&o));
}

#[test]
fn subcommand_must_match_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "linear.toml", SMALL_LINEAR);
    let o = run(bin().arg("solve-semilinear").arg("--config").arg(&cfg));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("solve-linear"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = run(bin().args(["solve-linear", "--config", "/nonexistent/run.toml"]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unconverged_iteration_is_a_solver_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tight.toml", &format!("{SMALL_LINEAR}\n[solver]\nmax_iter = 1\n"));
    let o = run(bin().arg("solve-linear").arg("--config").arg(&cfg));
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("Picard"));
}

#[test]
fn csv_streams_to_stdout_with_summary_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", SMALL_LINEAR);
    let o = run(bin().arg("solve-linear").arg("--config").arg(&cfg));
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert_eq!(csv.lines().next(), Some("t,x,u"));
    assert_eq!(csv.lines().count(), 1 + 65 * 4);
    let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first, ["0.0000000000000000e0", "0.0000000000000000e0", "1.0000000000000000e0"]);
    assert!(stderr(&o).starts_with("status=completed final_norm="));
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("decay.toml");
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let o = run(bin().arg("solve-semilinear").arg("--config").arg(&cfg).arg("--output").arg(&a));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = bin()
        .arg("solve-semilinear")
        .arg("--config")
        .arg(&cfg)
        .arg("--output")
        .arg(&b)
        .env("VARFRAC_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

/// Parses `t,x,u` rows.
fn read_solution(path: &Path) -> Vec<(f64, f64, f64)> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn volterra_config_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("volterra.csv");
    let o =
        run(bin().arg("solve-linear").arg("--config").arg(configs().join("volterra.toml")).arg("--output").arg(&out));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let grid = SpatialGrid::uniform(0.0, 1.0, 200).unwrap();
    let time = TimeGrid::new(1.0, 4096).unwrap();
    let u0 = Field::constant(grid.clone(), 1.0).unwrap();
    let oracle = volterra_example_solution(0.5, 0.8, &u0, time, &MlSeriesControl::new(0.5)).unwrap();
    let rows = read_solution(&out);
    assert_eq!(rows.len(), 65 * 200);
    let mut worst = 0.0f64;
    for (row, &(t, x, u)) in rows.iter().enumerate() {
        let (k, j) = (row / 200 * 64, row % 200);
        assert_eq!(t, time.t(k));
        assert_eq!(x, grid.points()[j]);
        worst = worst.max((u - oracle.slice(k)[j]).abs());
    }
    assert!(worst <= 1e-3, "max nodal error {worst:e}");
}

#[test]
fn blowup_config_reports_blow_up() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("blowup.csv");
    let o =
        run(bin().arg("solve-semilinear").arg("--config").arg(configs().join("blowup.toml")).arg("--output").arg(&out));
    assert_eq!(o.status.code(), Some(0));
    let summary = stdout(&o);
    assert!(summary.starts_with("status=blow-up omega_est="), "{summary}");
    let rows = read_solution(&out);
    let (t_last, _, u_last) = rows[rows.len() - 1];
    assert!(t_last < 2.0 && u_last >= 1e8);
}

#[test]
fn sir_config_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (out, diag) = (dir.path().join("sir.csv"), dir.path().join("diag.csv"));
    let o = run(bin()
        .arg("simulate-sir")
        .arg("--config")
        .arg(configs().join("sir.toml"))
        .arg("--output")
        .arg(&out)
        .arg("--diagnostics")
        .arg(&diag));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = std::fs::read_to_string(&out).unwrap();
    assert_eq!(table.lines().next(), Some("t,x,S,I,R"));
    assert_eq!(table.lines().count(), 1 + 129 * 100);
    let diagnostics = std::fs::read_to_string(&diag).unwrap();
    assert_eq!(diagnostics.lines().next(), Some("t,defect_norm,total_norm"));
    assert_eq!(diagnostics.lines().count(), 1 + 129);
}

#[test]
fn shipped_configs_finish_within_a_minute() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let loaded = varfrac_cli::load(&path).unwrap();
        let sub = loaded.config.problem.subcommand();
        let clock = Instant::now();
        let o = run(bin().arg(sub).arg("--config").arg(&path).arg("--output").arg(dir.path().join("out.csv")));
        let elapsed = clock.elapsed().as_secs_f64();
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), stderr(&o));
        assert!(elapsed < 60.0, "{} took {elapsed:.1}s", path.display());
    }
}
