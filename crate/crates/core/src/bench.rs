//! Runs algorithms over a corpus and tabulates makespans against the optimum.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{coffman_graham_schedule, list_schedule, PriorityOrder};
use crate::corpus::CorpusEntry;
use crate::eps::Eps;
use crate::error::{Error, Result};
use crate::model::{validate_schedule, Instance, JobId};
use crate::oracle::ExactSolver;
use crate::qptas::{self, GuessConfig, JobGuessing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Exact,
    /// List scheduling in id order.
    List,
    /// List scheduling in a seeded random order.
    ListRandom,
    CoffmanGraham,
    Qptas,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Exact,
        Algorithm::List,
        Algorithm::ListRandom,
        Algorithm::CoffmanGraham,
        Algorithm::Qptas,
    ];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Exact => "exact",
            Algorithm::List => "ls",
            Algorithm::ListRandom => "ls-random",
            Algorithm::CoffmanGraham => "cg",
            Algorithm::Qptas => "qptas",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.to_string() == s)
            .ok_or_else(|| Error::BadSpec(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
    pub eps: Eps,
    pub k_max: usize,
    /// Random guesses per call of the scheme.
    pub samples: usize,
    pub node_budget: Option<u64>,
    /// Largest instance handed to the exact solver.
    pub oracle_cap: usize,
    /// Adds a wall-time column. Off by default so that output is
    /// reproducible byte for byte.
    pub timing: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            algorithms: Algorithm::ALL.to_vec(),
            seed: 0,
            eps: Eps::ONE,
            k_max: 2,
            samples: 4,
            node_budget: Some(2_000),
            oracle_cap: 20,
            timing: false,
        }
    }
}

impl BenchOptions {
    /// Scheme configuration for an instance of `n` jobs on `m` machines.
    pub fn guess_config(&self, n: usize, m: usize) -> GuessConfig {
        GuessConfig {
            k_max: self.k_max,
            job_guessing: JobGuessing::Sampled {
                samples: self.samples,
                seed: self.seed,
            },
            node_budget: self.node_budget,
            ..GuessConfig::new(self.eps).with_default_depth(n, m)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub algorithm: Algorithm,
    pub makespan: Option<usize>,
    pub opt: Option<usize>,
    pub ratio: Option<f64>,
    pub discards: Option<usize>,
    pub wall_ms: Option<f64>,
    pub error: Option<String>,
}

/// A seeded random priority order.
pub fn random_order(n: usize, seed: u64) -> PriorityOrder {
    let mut perm: Vec<JobId> = (0..n).map(JobId).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    PriorityOrder::new(perm).expect("a permutation")
}

/// One row per instance and algorithm, in corpus order then the order of
/// `opts.algorithms`. Instances run in parallel.
pub fn run_bench(entries: &[CorpusEntry], opts: &BenchOptions) -> Vec<BenchRow> {
    entries
        .par_iter()
        .map(|e| bench_instance(e, opts))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn bench_instance(entry: &CorpusEntry, opts: &BenchOptions) -> Vec<BenchRow> {
    let inst = &entry.instance;
    let oracle = ExactSolver {
        max_jobs: opts.oracle_cap,
        ..ExactSolver::default()
    };
    let opt = oracle.optimal_makespan(inst).ok();
    opts.algorithms
        .iter()
        .map(|&alg| {
            let started = Instant::now();
            let outcome = run_one(inst, alg, opts, opt, &oracle);
            let wall_ms = opts.timing.then(|| started.elapsed().as_secs_f64() * 1e3);
            let mut row = BenchRow {
                instance: entry.name.clone(),
                algorithm: alg,
                makespan: None,
                opt,
                ratio: None,
                discards: None,
                wall_ms,
                error: None,
            };
            match outcome {
                Ok((makespan, discards)) => {
                    row.makespan = Some(makespan);
                    row.discards = discards;
                    row.ratio = opt.filter(|&o| o > 0).map(|o| makespan as f64 / o as f64);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect()
}

fn run_one(
    inst: &Instance,
    alg: Algorithm,
    opts: &BenchOptions,
    opt: Option<usize>,
    oracle: &ExactSolver,
) -> Result<(usize, Option<usize>)> {
    let (sched, discards) = match alg {
        Algorithm::Exact => (oracle.optimal_schedule(inst)?, None),
        Algorithm::List => (
            list_schedule(inst, &PriorityOrder::identity(inst.n())),
            None,
        ),
        Algorithm::ListRandom => (
            list_schedule(inst, &random_order(inst.n(), opts.seed)),
            None,
        ),
        Algorithm::CoffmanGraham => (coffman_graham_schedule(inst), None),
        Algorithm::Qptas => {
            let cfg = opts.guess_config(inst.n(), inst.machines());
            let run = qptas::solve_auto(inst, &cfg, opt)?;
            (run.schedule, Some(run.total_discards))
        }
    };
    let report = validate_schedule(inst, &sched, true);
    if !report.feasible {
        return Err(Error::BadSpec(format!(
            "{alg} produced an infeasible schedule"
        )));
    }
    Ok((report.makespan, discards))
}

pub fn write_bench_csv<W: std::io::Write>(
    out: W,
    rows: &[BenchRow],
    timing: bool,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "instance",
        "algorithm",
        "makespan",
        "opt",
        "ratio",
        "discards",
        "error",
    ];
    if timing {
        header.push("wall_ms");
    }
    w.write_record(&header)?;
    let opt_str = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        let mut rec = vec![
            r.instance.clone(),
            r.algorithm.to_string(),
            opt_str(r.makespan),
            opt_str(r.opt),
            r.ratio.map(|x| format!("{x:.6}")).unwrap_or_default(),
            opt_str(r.discards),
            r.error.clone().unwrap_or_default(),
        ];
        if timing {
            rec.push(r.wall_ms.map(|x| format!("{x:.3}")).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::standard_corpus;

    #[test]
    fn antichains_are_solved_optimally() {
        let entries: Vec<_> = standard_corpus()
            .into_iter()
            .filter(|e| e.name.starts_with("antichain"))
            .collect();
        let rows = run_bench(&entries, &BenchOptions::default());
        assert_eq!(rows.len(), entries.len() * Algorithm::ALL.len());
        for r in &rows {
            assert_eq!(r.ratio, Some(1.0), "{r:?}");
        }
    }

    #[test]
    fn csv_is_reproducible() {
        let entries: Vec<_> = standard_corpus().into_iter().take(4).collect();
        let opts = BenchOptions::default();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_bench_csv(&mut a, &run_bench(&entries, &opts), false).unwrap();
        write_bench_csv(&mut b, &run_bench(&entries, &opts), false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
        assert!("nope".parse::<Algorithm>().is_err());
    }
}
