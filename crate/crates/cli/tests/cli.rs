use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use robowet_core::scenario::{PlanFile, Scenario};
use robowet_core::sim::TraceSummary;

fn robowet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robowet"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn robowet")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(robowet().arg("--help"))), 0);
    assert_eq!(code(&run(robowet().arg("--version"))), 0);
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(robowet().arg("--bogus"))), 1);
    assert_eq!(code(&run(robowet().args(["plan", "does-not-exist.toml"]))), 1);
    let sc = scenarios().join("five_movers.toml");
    assert_eq!(code(&run(robowet().args(["hil", "--rounds", "0"]).arg(&sc).arg("--out").arg(tmp.path()))), 1);
    assert_eq!(code(&run(robowet().args(["--parallel", "0", "plan"]).arg(&sc))), 1);
}

#[test]
fn malformed_scenario_reports_location() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "format_version = 1\nname = \n").unwrap();
    let out = run(robowet().arg("plan").arg(&bad).arg("--out").arg(tmp.path().join("p.toml")));
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn infeasible_scenario_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenarios().join("five_movers.toml")).unwrap();
    let mut sc = Scenario::from_toml_str(&text).unwrap();
    // a threshold above anything a harvester can receive
    sc.harvest.p0_w = 0.5;
    let path = tmp.path().join("deaf.toml");
    std::fs::write(&path, sc.to_toml_string().unwrap()).unwrap();
    let out = run(robowet().arg("plan").arg(&path).arg("--out").arg(tmp.path().join("p.toml")));
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn plan_then_simulate_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let sc_path = scenarios().join("five_movers.toml");
    let plan_path = tmp.path().join("plan.toml");
    let out = run(robowet().args(["plan", "--seed", "3"]).arg(&sc_path).arg("--out").arg(&plan_path));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let file = PlanFile::from_toml_str(&std::fs::read_to_string(&plan_path).unwrap()).unwrap();
    let sc = Scenario::from_toml_str(&std::fs::read_to_string(&sc_path).unwrap()).unwrap();
    file.check_compatible(&sc).unwrap();
    assert_eq!(PlanFile::from_toml_str(&file.to_toml_string().unwrap()).unwrap().to_toml_string().unwrap(), file.to_toml_string().unwrap());

    let sim = tmp.path().join("sim");
    let out = run(robowet().args(["simulate", "--seed", "3", "--no-plots"]).arg(&sc_path).arg(&plan_path).arg("--out").arg(&sim));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = TraceSummary::from_toml_str(&std::fs::read_to_string(sim.join("summary.toml")).unwrap()).unwrap();
    assert!(summary.finished && summary.requirements_met);
    assert_eq!(summary.robot_collisions, 0);
    assert!(sim.join("trace.csv").exists());
    assert!(!sim.join("trajectory.svg").exists());
}

#[test]
fn one_round_hil_matches_plan_and_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = scenarios().join("five_movers.toml");
    let plan = tmp.path().join("plan.toml");
    let sim = tmp.path().join("sim");
    let hil = tmp.path().join("hil");
    assert_eq!(code(&run(robowet().args(["plan", "--seed", "1"]).arg(&sc).arg("--out").arg(&plan))), 0);
    assert_eq!(code(&run(robowet().args(["simulate", "--seed", "1"]).arg(&sc).arg(&plan).arg("--out").arg(&sim))), 0);
    assert_eq!(code(&run(robowet().args(["hil", "--seed", "1", "--rounds", "1"]).arg(&sc).arg("--out").arg(&hil))), 0);
    let read = |p: PathBuf| std::fs::read(p).unwrap();
    assert_eq!(read(sim.join("trace.csv")), read(hil.join("round_0/trace.csv")));
    assert_eq!(read(plan), read(hil.join("round_0/plan.toml")));
}

#[test]
fn gen_writes_a_loadable_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("g.toml");
    let out = run(robowet().args(["gen", "--seed", "7", "--ehs", "12", "--movers", "2"]).arg("--out").arg(&path));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let sc = Scenario::from_toml_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(sc.ehs.len(), 12);
}

#[test]
fn config_dir_resolves_relative_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(robowet()
        .env("ROBOWET_CONFIG_DIR", scenarios())
        .current_dir(tmp.path())
        .args(["plan", "five_movers.toml", "--out", "p.toml"]));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("p.toml").exists());
}
