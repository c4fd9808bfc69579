use std::path::PathBuf;
use std::process::Command;

use agilab::harness::{drift_sweep, run_experiment, ExperimentConfig, ExperimentKind, Results, RunReport};
use agilab::stats::Verdict;

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn corpus() -> Vec<(String, ExperimentConfig)> {
    let mut v: Vec<_> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), ExperimentConfig::load(&p).unwrap()))
        .collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

fn config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(configs_dir().join(name)).unwrap()
}

#[test]
fn corpus_round_trips() {
    let corpus = corpus();
    assert!(corpus.len() >= 9);
    for (name, c) in corpus {
        let text = c.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), c, "{name}");
    }
}

#[test]
fn reports_round_trip_through_json() {
    let r = run_experiment(&config("evaluate.toml")).unwrap();
    let back = RunReport::from_json(&r.to_json()).unwrap();
    assert_eq!(back.payload(), r.payload());
    assert_eq!(r.schema_version, 1);
    assert_eq!(r.config, config("evaluate.toml"));
}

#[test]
fn dirac_generality_is_the_task_estimate() {
    let mut c = config("evaluate.toml");
    c.distribution.as_mut().unwrap().tasks.truncate(1);
    c.distribution.as_mut().unwrap().tasks[0].goal = agilab::ecologies::GoalSpec::Chain { slip: 0.5, length: None, horizon: None };
    let r = run_experiment(&c).unwrap();
    let Results::Evaluate { generality, .. } = r.results else { panic!() };
    let (_, (est, _)) = generality.per_task.iter().next().unwrap();
    assert_eq!(generality.mean, *est);
}

#[test]
fn relativity_config_yields_a_witness() {
    let r = run_experiment(&config("relativity.toml")).unwrap();
    let Results::Relativity(w) = r.results else { panic!() };
    assert_eq!(w.hold_report.verdict, Verdict::Pass);
    assert_eq!(w.fail_report.verdict, Verdict::Fail);
}

#[test]
fn drift_sequences() {
    let c = config("drift.toml");
    let reports = drift_sweep(&c).unwrap();
    assert_eq!(reports.len(), 5);
    let v: Vec<_> = reports.iter().map(|r| r.verdict.unwrap()).collect();
    assert_eq!(v.first(), Some(&Verdict::Pass));
    assert_eq!(v.last(), Some(&Verdict::Fail));

    let mut two = c.clone();
    two.drift.as_mut().unwrap().steps = 2;
    assert_eq!(drift_sweep(&two).unwrap().len(), 2);

    let mut constant = c.clone();
    constant.drift.as_mut().unwrap().end = constant.distribution.clone().unwrap();
    let v: Vec<_> = drift_sweep(&constant).unwrap().iter().map(|r| r.verdict).collect();
    assert!(v.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn validation_errors_name_the_field() {
    let mut c = config("evaluate.toml");
    c.distribution = None;
    match run_experiment(&c) {
        Err(agilab::Error::Config { path, .. }) => assert_eq!(path, "distribution"),
        other => panic!("{other:?}"),
    }
    let mut c = config("evaluate.toml");
    c.plan.rollouts = 0;
    match run_experiment(&c) {
        Err(agilab::Error::Config { path, .. }) => assert_eq!(path, "plan.rollouts"),
        other => panic!("{other:?}"),
    }
    let bad = "kind = \"evaluate\"\n[family]\nid = \"x\"\nkind = \"mdp\"\nchain_length = 3\nslip_grid = [0.0]\n";
    assert!(matches!(ExperimentConfig::from_toml_str(bad), Err(agilab::Error::Config { .. })));
}

#[test]
fn kinds_parse_by_name() {
    for k in ExperimentKind::ALL {
        assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
    }
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_agilab")).args(args).output().unwrap()
}

fn cfg_path(name: &str) -> String {
    configs_dir().join(name).to_string_lossy().into_owned()
}

#[test]
fn cli_exit_codes_follow_verdicts() {
    assert_eq!(cli(&["axioms", "--config", &cfg_path("axioms.toml")]).status.code(), Some(0));
    assert_eq!(cli(&["axioms", "--config", &cfg_path("axioms-chains.toml")]).status.code(), Some(2));
    assert_eq!(cli(&["evaluate", "--config", "/nonexistent.toml"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let thin = dir.path().join("thin.toml");
    let src = std::fs::read_to_string(cfg_path("axioms.toml")).unwrap().replace("rollouts = 16", "rollouts = 4");
    std::fs::write(&thin, src).unwrap();
    assert_eq!(cli(&["axioms", "--config", thin.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn cli_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = cli(&["evaluate", "--config", &cfg_path("evaluate.toml"), "--seed", "99", "--out", out.to_str().unwrap(), "--parallelism", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = RunReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.seed, 99);
    assert_eq!(r.config.seed, 99);

    let o = Command::new(env!("CARGO_BIN_EXE_agilab"))
        .args(["worst-case", "--config", &cfg_path("worst-case.toml"), "--format", "tabular"])
        .env("AGILAB_PARALLELISM", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("eta,generality"));
}

#[test]
fn subcommand_overrides_config_kind() {
    let o = cli(&["relativity", "--config", &cfg_path("evaluate.toml")]);
    assert!(o.status.success());
    let r = RunReport::from_json(&String::from_utf8_lossy(&o.stdout)).unwrap();
    assert_eq!(r.kind, ExperimentKind::Relativity);
}
