use std::path::PathBuf;
use std::process::Command as Process;

use liftkit_cli::{report_bundle, run, Command, RunConfig};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn doubling(command: Command) -> RunConfig {
    let mut c = RunConfig::new(command, fixture("doubling.map"));
    c.nice = Some("1/3..2/3".into());
    c
}

fn counterexample(command: Command) -> RunConfig {
    let mut c = RunConfig::new(command, fixture("doubling.map"));
    c.scheme = Some(fixture("counterexample.scheme"));
    c
}

#[test]
fn check_on_canonical_scheme_passes() {
    let mut c = doubling(Command::Check);
    c.tau_max = 6;
    let o = run(&c);
    assert_eq!(o.code, 0, "{}", o.text);
    for name in [
        "H1 pass",
        "C pass",
        "M pass-at-depth",
        "FirstReturn pass-at-depth",
    ] {
        assert!(
            o.text.lines().any(|l| l.starts_with(name)),
            "missing {name}:\n{}",
            o.text
        );
    }
}

#[test]
fn check_on_counterexample_fails_m() {
    let o = run(&counterexample(Command::Check));
    assert_eq!(o.code, 1);
    assert!(
        o.text
            .lines()
            .any(|l| l == "M fail witness L=(0,1/2) m=1 J=(1/4,1/2) tau=2"),
        "{}",
        o.text
    );
}

#[test]
fn kac_with_lebesgue() {
    let o = run(&doubling(Command::Kac));
    assert_eq!(o.code, 0, "{}", o.text);
    let kac = o.text.lines().find(|l| l.starts_with("Kac ")).unwrap();
    assert!(kac.contains(" Q=6143/2048 target=3 err<=2^-11"), "{kac}");
}

#[test]
fn kac_with_orbit_measure_is_exact() {
    let mut c = doubling(Command::Kac);
    c.tau_max = 6;
    c.measure = Some(fixture("orbit.measure").display().to_string());
    let o = run(&c);
    assert_eq!(o.code, 0);
    assert!(
        o.text.starts_with("Kac pass depth=6 Q=3 target=3"),
        "{}",
        o.text
    );
    assert!(o.text.contains("Roundtrip pass depth=6 tv=0"));
}

#[test]
fn thermo_records() {
    let mut c = doubling(Command::Thermo);
    c.tau_max = 4;
    let o = run(&c);
    assert_eq!(o.code, 0, "{}", o.text);
    assert!(o.text.contains("cyl 0 1/3..5/12 diam=1/12\n"));
    assert!(o.text.contains("Vn n=3 value=0/1\n"));
    assert!(o
        .text
        .contains("sum1 N=4 partial=7/8 tail=1/8 verdict=pass\n"));
    c.potential = "const:0".into();
    assert_eq!(run(&c).code, 1);
    c.potential = "wobbly".into();
    assert_eq!(run(&c).code, 3);
}

#[test]
fn bundles() {
    assert_eq!(report_bundle(&[]).code, 0);
    assert_eq!(report_bundle(&[]).text, "");
    let mut suite = vec![
        doubling(Command::Tower),
        doubling(Command::Nice),
        doubling(Command::Check),
    ];
    for c in &mut suite {
        c.tau_max = 6;
    }
    let good = report_bundle(&suite);
    assert_eq!(good.code, 0, "{}", good.text);
    assert!(good.text.starts_with("== tower\n"));
    suite.push(counterexample(Command::Check));
    let bad = report_bundle(&suite);
    assert_eq!(bad.code, 1);
    assert!(bad.text.starts_with(&good.text));
}

#[test]
fn report_command_expands_to_stages() {
    let mut c = doubling(Command::Report);
    c.tau_max = 6;
    let o = run(&c);
    let headers: Vec<&str> = o.text.lines().filter(|l| l.starts_with("== ")).collect();
    assert_eq!(
        headers,
        ["== tower", "== nice", "== check", "== kac", "== thermo"]
    );
    assert_eq!(o.code, 0, "{}", o.text);
}

#[test]
fn deterministic_output() {
    let mut c = doubling(Command::Report);
    c.tau_max = 8;
    assert_eq!(run(&c), run(&c));
}

#[test]
fn scheme_dump_feeds_later_stages() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.scheme");
    let mut c = doubling(Command::Scheme);
    c.tau_max = 5;
    c.out = Some(path.clone());
    let written = run(&c);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), written.text);
    let mut check = RunConfig::new(Command::Check, fixture("doubling.map"));
    check.scheme = Some(path);
    check.tau_max = 5;
    assert_eq!(run(&check).code, 0);
}

#[test]
fn parse_errors_exit_three_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.map");
    std::fs::write(&path, "ambient = 0..1\nbranch = 0 1/2 2/1\n").unwrap();
    let o = run(&RunConfig::new(Command::Tower, &path));
    assert_eq!(o.code, 3);
    assert!(
        o.text.starts_with("error kind=parse msg=\"line 2:"),
        "{}",
        o.text
    );
}

#[test]
fn binary_exit_codes_and_budget_env() {
    let bin = env!("CARGO_BIN_EXE_liftkit");
    let map = fixture("markov.map");
    let ok = Process::new(bin)
        .args(["tower", "--map"])
        .arg(&map)
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8(ok.stdout)
        .unwrap()
        .contains("Markov pass depth=5 elements=2"));
    let capped = Process::new(bin)
        .args(["tower", "--map"])
        .arg(&map)
        .env("LIFTKIT_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(2));
    let usage = Process::new(bin).args(["tower"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(3));
    let zero = Process::new(bin)
        .args(["tower", "--budget", "0", "--map"])
        .arg(&map)
        .output()
        .unwrap();
    assert_eq!(zero.status.code(), Some(3));
}

#[test]
fn numeric_maps_downgrade_verdicts() {
    let o = run(&RunConfig::new(Command::Tower, fixture("logistic.map")));
    assert_eq!(o.code, 2);
    assert!(o.text.contains("Markov inconclusive-numeric"));
}
