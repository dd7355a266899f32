//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are reported as FAIL but do not fail the
//! process; any other failure does. A known-red criterion that starts
//! passing is reported so that the list can be pruned.

use std::collections::HashSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use unitsched::audit::{self, AuditConfig, AuditReport};
use unitsched::baselines::{coffman_graham_schedule, list_schedule};
use unitsched::bench::{random_order, run_bench, write_bench_csv, BenchOptions};
use unitsched::corpus::{standard_corpus, CorpusEntry};
use unitsched::generate::{generate, GeneratorKind, GeneratorSpec};
use unitsched::laminar::{pad_to_power_of_two, LaminarFamily};
use unitsched::model::longest_chain;
use unitsched::oracle;
use unitsched::params::{prescribed_k, ChainThreshold};
use unitsched::qptas::{self, GuessConfig, JobGuessing, PartitionMode};
use unitsched::{validate_schedule, Eps, Instance};

/// The level-count audit fails on small instances; see the README.
const KNOWN_RED: &[&str] = &["6"];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "1",
            "oracle matches brute force on all DAGs with n <= 6",
            oracle_soundness,
        ),
        ("2", "list scheduling within 2 - 1/m of optimal", list_bound),
        (
            "3",
            "Coffman-Graham optimal on two machines",
            coffman_graham_optimal,
        ),
        (
            "4",
            "full guessing at T = OPT discards nothing",
            full_guessing_exact,
        ),
        (
            "5",
            "repaired schedules feasible, horizon T + |discarded|",
            feasibility_accounting,
        ),
        (
            "6",
            "contractual audits report no violations",
            contractual_audits,
        ),
        (
            "7",
            "advisory audits within bounds at the prescribed guess cap",
            advisory_audits,
        ),
        (
            "8",
            "bench output is byte-identical across runs",
            bench_determinism,
        ),
    ];
    let mut unexpected = 0;
    for (id, name, check) in criteria {
        let started = Instant::now();
        let out = check();
        let secs = started.elapsed().as_secs_f64();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        let known = KNOWN_RED.contains(&id);
        let note = match (out.pass, known) {
            (false, true) => " [known]",
            (true, true) => " [known red now passes]",
            _ => "",
        };
        println!("{verdict} {id} {name}: {} ({secs:.1}s){note}", out.detail);
        if !out.pass && !known {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn corpus_upto(n: usize) -> Vec<CorpusEntry> {
    standard_corpus()
        .into_iter()
        .filter(|e| e.instance.n() <= n)
        .collect()
}

/// Transitive closure as one predecessor mask per job, jobs in topological
/// id order.
fn closure_masks(n: usize, edges: &[(usize, usize)]) -> Vec<u32> {
    let mut preds = vec![0u32; n];
    for &(a, b) in edges {
        preds[b] |= 1 << a;
    }
    for j in 0..n {
        let mut acc = preds[j];
        for i in 0..j {
            if preds[j] >> i & 1 == 1 {
                acc |= preds[i];
            }
        }
        preds[j] = acc;
    }
    preds
}

/// Smallest horizon admitting a slot for every job, by trying all slot
/// assignments in id order.
fn brute_force_makespan(n: usize, m: usize, preds: &[u32]) -> usize {
    fn place(
        j: usize,
        n: usize,
        m: usize,
        horizon: usize,
        preds: &[u32],
        slot: &mut [usize],
        load: &mut [usize],
    ) -> bool {
        if j == n {
            return true;
        }
        let earliest = (0..j)
            .filter(|&i| preds[j] >> i & 1 == 1)
            .map(|i| slot[i] + 1)
            .max()
            .unwrap_or(0);
        for t in earliest..horizon {
            if load[t] < m {
                load[t] += 1;
                slot[j] = t;
                if place(j + 1, n, m, horizon, preds, slot, load) {
                    return true;
                }
                load[t] -= 1;
            }
        }
        false
    }
    (0..=n)
        .find(|&horizon| {
            place(
                0,
                n,
                m,
                horizon,
                preds,
                &mut vec![0; n],
                &mut vec![0; horizon],
            )
        })
        .expect("n slots always suffice")
}

fn oracle_soundness() -> Outcome {
    let mut cases = Vec::new();
    for n in 0..=6usize {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let mut seen = HashSet::new();
        for bits in 0u32..1 << pairs.len() {
            let edges: Vec<_> = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| bits >> k & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            let preds = closure_masks(n, &edges);
            if seen.insert(preds.clone()) {
                cases.push((n, edges, preds));
            }
        }
    }
    let mismatches: Vec<String> = cases
        .par_iter()
        .flat_map_iter(|(n, edges, preds)| {
            (1..=3).filter_map(move |m| {
                let inst = Instance::from_edges(*n, m, edges).expect("acyclic");
                let got = oracle::optimal_makespan(&inst, None).ok();
                let want = brute_force_makespan(*n, m, preds);
                (got != Some(want)).then(|| format!("n={n} m={m} {edges:?}: {got:?} vs {want}"))
            })
        })
        .collect();
    let checked = cases.len() * 3;
    match mismatches.first() {
        None => Outcome::new(
            true,
            format!("{} partial orders x 3 machine counts", cases.len()),
        ),
        Some(first) => Outcome::new(
            false,
            format!("{} of {checked} mismatch, first {first}", mismatches.len()),
        ),
    }
}

/// Mixed-family instance number `i` of a seeded sweep.
fn sweep_instance(i: u64, max_n: usize, machines: &[usize]) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + i);
    let m = machines[rng.gen_range(0..machines.len())];
    let (kind, n) = match i % 5 {
        0 => (GeneratorKind::Antichain, rng.gen_range(1..=max_n)),
        1 => (GeneratorKind::Chain, rng.gen_range(1..=max_n)),
        2 => {
            let layers = rng.gen_range(2..=4);
            let width = rng.gen_range(1..=max_n / layers);
            let edge_prob = rng.gen_range(0.1..0.8);
            (
                GeneratorKind::Layered {
                    layers,
                    width,
                    edge_prob,
                },
                layers * width,
            )
        }
        3 => {
            let edge_prob = rng.gen_range(0.05..0.5);
            (
                GeneratorKind::RandomOrder { edge_prob },
                rng.gen_range(1..=max_n),
            )
        }
        _ => {
            let depth = rng.gen_range(1..=4);
            (GeneratorKind::DiamondMesh { depth }, depth * depth)
        }
    };
    generate(&GeneratorSpec::new(kind, n, m, i)).expect("valid spec")
}

fn list_bound() -> Outcome {
    const INSTANCES: u64 = 500;
    const ORDERS: u64 = 100;
    let results: Vec<(u64, usize, usize, usize)> = (0..INSTANCES)
        .into_par_iter()
        .map(|i| {
            let inst = sweep_instance(i, 18, &[2, 3, 4]);
            let opt = oracle::optimal_makespan(&inst, None).expect("within oracle reach");
            let worst = (0..ORDERS)
                .map(|k| list_schedule(&inst, &random_order(inst.n(), i * ORDERS + k)).makespan())
                .max()
                .unwrap_or(0);
            (i, inst.machines(), opt, worst)
        })
        .collect();
    let over: Vec<_> = results
        .iter()
        .filter(|&&(_, m, opt, worst)| worst * m > (2 * m - 1) * opt)
        .collect();
    let max_ratio = results
        .iter()
        .filter(|r| r.2 > 0)
        .map(|&(_, _, opt, worst)| worst as f64 / opt as f64)
        .fold(1.0, f64::max);
    let detail = format!("{INSTANCES} instances x {ORDERS} orders, max ratio {max_ratio:.4}");
    match over.first() {
        None => Outcome::new(true, detail),
        Some(r) => Outcome::new(
            false,
            format!("{detail}, {} above bound, first {r:?}", over.len()),
        ),
    }
}

fn coffman_graham_optimal() -> Outcome {
    let corpus: Vec<_> = corpus_upto(16)
        .into_iter()
        .filter(|e| e.instance.machines() == 2)
        .collect();
    let mut bad = Vec::new();
    for e in &corpus {
        let sched = coffman_graham_schedule(&e.instance);
        let report = validate_schedule(&e.instance, &sched, true);
        let opt = oracle::optimal_makespan(&e.instance, None).expect("within oracle reach");
        if !report.feasible || report.makespan != opt {
            bad.push(format!("{} {} vs {opt}", e.name, report.makespan));
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!("{} instances {}", corpus.len(), bad.join("; "))
            .trim_end()
            .to_string(),
    )
}

fn full_guessing_exact() -> Outcome {
    let corpus = corpus_upto(9);
    let bad: Vec<String> = corpus
        .par_iter()
        .filter_map(|e| {
            let inst = &e.instance;
            let opt = oracle::optimal_makespan(inst, None).expect("within oracle reach");
            let (padded, _) = pad_to_power_of_two(inst, opt).expect("opt bounds the chains");
            let cfg = GuessConfig {
                k_max: padded.n(),
                partition_mode: PartitionMode::Exhaustive,
                job_guessing: JobGuessing::Exhaustive,
                ..GuessConfig::new(Eps::ONE).with_default_depth(padded.n(), padded.machines())
            };
            let run = match qptas::run_pipeline(inst, opt, &cfg) {
                Ok(run) => run,
                Err(err) => return Some(format!("{}: {err}", e.name)),
            };
            let report = validate_schedule(inst, &run.schedule, true);
            let clean = run.total_discards == 0 && report.feasible && report.makespan == opt;
            (!clean).then(|| {
                format!(
                    "{}: {} discards, makespan {} vs {opt}",
                    e.name, run.total_discards, report.makespan
                )
            })
        })
        .collect();
    Outcome::new(
        bad.is_empty(),
        format!("{} instances {}", corpus.len(), bad.join("; "))
            .trim_end()
            .to_string(),
    )
}

/// Named configurations covering every partition and guessing mode.
fn solve_modes(inst: &Instance, opt: usize) -> Vec<(&'static str, GuessConfig)> {
    let eps = Eps::ONE;
    let (padded, _) = pad_to_power_of_two(inst, opt).expect("opt bounds the chains");
    let base = GuessConfig::new(eps).with_default_depth(padded.n(), padded.machines());
    let opt_sched = oracle::optimal_schedule(inst).expect("within oracle reach");
    let (_, _, assign) =
        qptas::reference_assignment(inst, &opt_sched, opt, eps, ChainThreshold::PerMachine)
            .expect("valid");
    let assign = Arc::new(assign);
    vec![
        ("laminar-none", base.clone()),
        (
            "laminar-sampled",
            GuessConfig {
                k_max: 2,
                job_guessing: JobGuessing::Sampled {
                    samples: 4,
                    seed: 7,
                },
                node_budget: Some(500),
                ..base.clone()
            },
        ),
        (
            "laminar-reference",
            GuessConfig {
                k_max: usize::MAX,
                job_guessing: JobGuessing::Reference(Arc::clone(&assign)),
                ..base.clone()
            },
        ),
        (
            "laminar-reference-k1",
            GuessConfig {
                k_max: 1,
                job_guessing: JobGuessing::Reference(assign),
                ..base.clone()
            },
        ),
        (
            "exhaustive-k2",
            GuessConfig {
                k_max: 2,
                partition_mode: PartitionMode::Exhaustive,
                job_guessing: JobGuessing::Exhaustive,
                max_cells: Some(2),
                node_budget: Some(300),
                ..base.clone()
            },
        ),
        (
            "exhaustive-depth1",
            GuessConfig {
                partition_mode: PartitionMode::Exhaustive,
                max_cells: Some(1),
                depth_max: 1,
                ..base
            },
        ),
    ]
}

fn feasibility_accounting() -> Outcome {
    let corpus = standard_corpus();
    let results: Vec<(usize, Vec<String>)> = corpus
        .par_iter()
        .map(|e| {
            let inst = &e.instance;
            let opt = oracle::optimal_makespan(inst, None).expect("within oracle reach");
            let all: Vec<_> = inst.jobs().collect();
            let horizons: Vec<usize> = {
                let mut h = vec![
                    longest_chain(inst, &all),
                    inst.lower_bound(),
                    opt,
                    opt.next_power_of_two(),
                ];
                h.sort_unstable();
                h.dedup();
                h
            };
            let mut runs = 0;
            let mut bad = Vec::new();
            for (mode, cfg) in solve_modes(inst, opt) {
                for &t in &horizons {
                    let run = match qptas::run_pipeline(inst, t, &cfg) {
                        Ok(run) => run,
                        Err(err) => {
                            bad.push(format!("{} {mode} T={t}: {err}", e.name));
                            continue;
                        }
                    };
                    runs += 1;
                    let total = run.total_discards;
                    let target = t.max(1).next_power_of_two();
                    let padded = validate_schedule(&run.padded, &run.repaired, true);
                    let original = validate_schedule(inst, &run.schedule, true);
                    let originals_dropped = run
                        .solve
                        .discarded
                        .iter()
                        .filter(|j| j.index() < inst.n())
                        .count();
                    let ok = padded.feasible
                        && original.feasible
                        && run.repaired.horizon() == target + total
                        && padded.makespan <= target + total
                        && run.schedule.horizon() == t.max(1) + total
                        && original.makespan <= t.max(1) + total
                        && run.discarded.len() == originals_dropped
                        && total == run.solve.discarded.len();
                    if !ok {
                        bad.push(format!(
                            "{} {mode} T={t}: feasible {}/{}, horizon {} vs {}",
                            e.name,
                            padded.feasible,
                            original.feasible,
                            run.schedule.horizon(),
                            t.max(1) + total
                        ));
                    }
                }
            }
            (runs, bad)
        })
        .collect();
    let runs: usize = results.iter().map(|r| r.0).sum();
    let bad: Vec<_> = results.into_iter().flat_map(|r| r.1).collect();
    let detail = format!("{runs} runs over {} instances", corpus.len());
    match bad.first() {
        None => Outcome::new(true, detail),
        Some(first) => Outcome::new(false, format!("{detail}, {} bad, first {first}", bad.len())),
    }
}

fn audit_corpus(entries: &[CorpusEntry], cfg: &AuditConfig) -> Vec<AuditReport> {
    entries
        .par_iter()
        .map(|e| {
            let run = audit::reference_run(&e.instance, cfg).expect("reference run");
            audit::audit_run(&e.name, &run, cfg.eps).expect("audits")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn summarize(reports: &[AuditReport], claim: &str) -> (usize, usize) {
    reports
        .iter()
        .filter(|r| r.name == claim)
        .fold((0, 0), |(v, p), r| (v + r.violations, p + r.population))
}

fn contractual_audits() -> Outcome {
    let reports = audit_corpus(&corpus_upto(14), &AuditConfig::default());
    let claims = ["unique_level", "shift_bound", "window_slack", "level_count"];
    let mut parts = Vec::new();
    let mut pass = true;
    for claim in claims {
        let (v, p) = summarize(&reports, claim);
        pass &= v == 0;
        parts.push(format!("{claim} {v}/{p}"));
    }
    let offenders: Vec<_> = reports
        .iter()
        .filter(|r| audit::is_contractual(&r.name) && r.violations > 0)
        .map(|r| format!("{}:{} {}>{:.3}", r.name, r.instance, r.worst, r.bound))
        .collect();
    if !offenders.is_empty() {
        parts.push(format!("offenders {}", offenders.join(" ")));
    }
    // Horizon sweep of the level count on its own, n = T·m.
    let mut sweep = Vec::new();
    for m in 1..=4usize {
        let failing: Vec<usize> = (1..=10)
            .map(|e| 1usize << e)
            .filter(|&t| {
                let fam = LaminarFamily::build(t, t * m, Eps::ONE).expect("power of two");
                audit::check_level_count(&fam, t * m, Eps::ONE).violations > 0
            })
            .collect();
        sweep.push(format!("m={m} T={failing:?}"));
    }
    parts.push(format!("sweep over T<=1024 fails at {}", sweep.join(" ")));
    Outcome::new(pass, parts.join(", "))
}

fn advisory_audits() -> Outcome {
    let corpus = standard_corpus();
    let cfg = AuditConfig::default();
    let reports = audit_corpus(&corpus, &cfg);
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join("advisory.csv");
    let advisory: Vec<_> = reports
        .iter()
        .filter(|r| audit::is_advisory(&r.name))
        .cloned()
        .collect();
    let file = std::fs::File::create(&path).expect("writable target dir");
    audit::write_csv(file, &advisory).expect("csv");

    let exceeding: HashSet<&str> = advisory
        .iter()
        .filter(|r| r.violations > 0)
        .map(|r| r.instance.as_str())
        .collect();
    let mut detail = format!(
        "csv {} rows, {} exceedance(s) at k={}",
        advisory.len(),
        advisory.iter().map(|r| r.violations).sum::<usize>(),
        cfg.k_max
    );
    if exceeding.is_empty() {
        return Outcome::new(true, detail);
    }
    // Escalate with the guess cap the analysis prescribes.
    let rerun: Vec<_> = corpus
        .iter()
        .filter(|e| exceeding.contains(e.name.as_str()))
        .cloned()
        .collect();
    let reproduced: Vec<String> = rerun
        .par_iter()
        .flat_map_iter(|e| {
            let opt = oracle::optimal_makespan(&e.instance, None).expect("within oracle reach");
            let (padded, _) = pad_to_power_of_two(&e.instance, opt).expect("padding");
            let k = prescribed_k(padded.machines(), padded.n(), cfg.eps);
            let k_max = if k >= usize::MAX as f64 {
                usize::MAX
            } else {
                k.ceil() as usize
            };
            let strict = AuditConfig { k_max, ..cfg };
            audit_corpus(std::slice::from_ref(e), &strict)
                .into_iter()
                .filter(|r| audit::is_advisory(&r.name) && r.violations > 0)
                .map(|r| format!("{}:{}", r.name, r.instance))
        })
        .collect();
    detail.push_str(&format!(
        ", {} reproduced at the prescribed cap",
        reproduced.len()
    ));
    if !reproduced.is_empty() {
        detail.push_str(&format!(" ({})", reproduced.join(" ")));
    }
    Outcome::new(reproduced.is_empty(), detail)
}

fn bench_determinism() -> Outcome {
    let corpus = standard_corpus();
    let opts = BenchOptions::default();
    let render = || {
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &run_bench(&corpus, &opts), false).expect("in-memory write");
        buf
    };
    let first = render();
    let second = render();
    let rows = first.iter().filter(|&&b| b == b'\n').count();
    Outcome::new(
        first == second,
        format!("{rows} lines, {} bytes", first.len()),
    )
}
