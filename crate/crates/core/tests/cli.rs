use std::path::Path;
use std::process::{Command, Output};

use unitsched::io::{parse_instance, parse_schedule};
use unitsched::validate_schedule;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitsched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn gen_instance(dir: &Path, name: &str, kind: &str, n: &str, m: &str) -> std::path::PathBuf {
    let file = dir.join(name);
    let out = run(&[
        "gen",
        "--kind",
        kind,
        "--n",
        n,
        "--m",
        m,
        "--seed",
        "3",
        "--output",
        path(&file),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    file
}

#[test]
fn gen_solve_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = gen_instance(dir.path(), "a.inst", "layered:3:3:0.5", "9", "2");
    let inst = parse_instance(&std::fs::read_to_string(&inst_path).unwrap()).unwrap();
    for alg in ["exact", "ls", "cg", "qptas"] {
        let sched_path = dir.path().join(format!("{alg}.sched"));
        let out = run(&[
            "solve",
            "--input",
            path(&inst_path),
            "--alg",
            alg,
            "--output",
            path(&sched_path),
        ]);
        assert!(
            out.status.success(),
            "{alg}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let sched = parse_schedule(&std::fs::read_to_string(&sched_path).unwrap()).unwrap();
        assert!(validate_schedule(&inst, &sched, true).feasible, "{alg}");

        let out = run(&[
            "verify",
            "--input",
            path(&inst_path),
            "--schedule",
            path(&sched_path),
        ]);
        assert_eq!(out.status.code(), Some(0), "{alg}");
        assert!(String::from_utf8_lossy(&out.stdout).starts_with("feasible makespan="));
    }
}

#[test]
fn every_guessing_mode_solves() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = gen_instance(dir.path(), "a.inst", "random:0.3", "8", "2");
    let cases: &[&[&str]] = &[
        &["--mode", "laminar", "--guess", "none"],
        &["--mode", "laminar", "--guess", "sampled", "--samples", "3"],
        &["--mode", "laminar", "--guess", "reference"],
        &[
            "--mode",
            "exhaustive",
            "--guess",
            "exhaustive",
            "--kmax",
            "1",
            "--budget",
            "200",
        ],
        &["--mode", "exhaustive", "--horizon", "8"],
    ];
    for extra in cases {
        let mut args = vec!["solve", "--input", path(&inst_path)];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert!(
            out.status.success(),
            "{extra:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(
            String::from_utf8_lossy(&out.stderr).contains("discarded="),
            "{extra:?}"
        );
    }
}

#[test]
fn verify_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = dir.path().join("c.inst");
    std::fs::write(&inst_path, "jobs 2\nmachines 1\nedge 0 1\n").unwrap();
    let sched_path = dir.path().join("c.sched");
    std::fs::write(&sched_path, "makespan 1\njob 0 0\njob 1 0\n").unwrap();
    let out = run(&[
        "verify",
        "--input",
        path(&inst_path),
        "--schedule",
        path(&sched_path),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_and_parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.inst");
    std::fs::write(&bad, "jobs x\n").unwrap();
    let cyclic = dir.path().join("cyclic.inst");
    std::fs::write(&cyclic, "jobs 2\nmachines 1\nedge 0 1\nedge 1 0\n").unwrap();
    let missing = dir.path().join("missing.inst");
    let cases: Vec<Vec<&str>> = vec![
        vec!["solve", "--input", path(&bad)],
        vec!["solve", "--input", path(&cyclic)],
        vec!["solve", "--input", path(&missing)],
        vec!["solve", "--input", path(&cyclic), "--eps", "3/2"],
        vec!["gen", "--kind", "layered:2:2:0.5", "--n", "5"],
        vec!["gen", "--kind", "nope"],
        vec!["frobnicate"],
    ];
    for args in cases {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn too_short_horizon_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = gen_instance(dir.path(), "chain.inst", "chain", "5", "1");
    let out = run(&["solve", "--input", path(&inst_path), "--horizon", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    assert!(run(&["gen", "--corpus", "--output", path(&corpus)])
        .status
        .success());
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let res = run(&[
            "bench",
            "--input",
            path(&corpus),
            "--algs",
            "exact,ls,cg,qptas",
            "--output",
            path(out),
        ]);
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
    }
    let a = std::fs::read(&a).unwrap();
    assert_eq!(a, std::fs::read(&b).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("instance,algorithm,makespan,opt,ratio,discards,error\n"));
}

#[test]
fn analyze_levels_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = gen_instance(dir.path(), "a.inst", "chain", "8", "1");
    let csv = dir.path().join("levels.csv");
    let out = run(&[
        "analyze",
        "levels",
        "--input",
        path(&inst_path),
        "--output",
        path(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("level,start,end,guess,top\n"));
    assert!(text.lines().count() > 1);
}

#[test]
fn audit_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    gen_instance(&corpus, "anti.inst", "antichain", "6", "2");
    let report = dir.path().join("audit.csv");
    let out = run(&["audit", "--input", path(&corpus), "--report", path(&report)]);
    assert!(out.status.code().is_some());
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("claim,instance,population,violations,observed,bound\n"));
    assert!(text.contains("unique_level,anti,"));
}
