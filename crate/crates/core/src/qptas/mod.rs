//! Guess-and-recurse approximation scheme.
//!
//! A call receives an interval, the pins made by enclosing calls and the jobs
//! it must place inside the interval. For every guess (jobs pinned to slots
//! plus a partition of the interval into cells) it classifies the remaining
//! jobs as bottom jobs of one cell or top jobs, recurses into each cell with
//! its bottom jobs, and places the top jobs by an earliest-deadline-first
//! sweep. Jobs that cannot be placed are discarded; the guess with the
//! fewest discards wins. Discarded jobs are put back afterwards by
//! [`insert_discarded`], one new slot each.
//!
//! The full guess space is far too large to enumerate, so the caller picks
//! how much of it to try: exhaustively (tiny instances), from a reference
//! schedule, from random samples, or not at all.

pub mod classify;
pub mod edf;
pub mod guess;
pub mod insert;

use std::cell::Cell;
use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::sync::Arc;

pub use classify::{classify, windows_for_top, Classification};
pub use edf::{edf_insert, EdfOutcome, EdfTrace, SlotTrace, TopWindow};
pub use guess::{enumerate_guesses, Guess};
pub use insert::insert_discarded;

use crate::baselines::{list_schedule, PriorityOrder};
use crate::eps::Eps;
use crate::error::{Error, Result};
use crate::laminar::{
    assign_levels, pad_to_power_of_two, Interval, LaminarFamily, LevelAssignment, Pins,
};
use crate::model::{longest_chain, Instance, JobId, JobSet, Schedule};
use crate::params::{self, ChainThreshold};

use guess::Enumerator;

/// How a call cuts its interval into cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PartitionMode {
    /// Intervals of the laminar family at the level fixed by depth and offset.
    #[default]
    Laminar,
    /// Every split into at most `max_cells` (default `max(1, k_max)`) cells.
    Exhaustive,
}

/// Which job pins a call tries.
#[derive(Debug, Clone, Default)]
pub enum JobGuessing {
    /// Every subset of at most `k_max` jobs, largest first, with every
    /// consistent slot assignment.
    Exhaustive,
    /// The guessed jobs of a level assignment whose levels fall in the
    /// call's range, at their reference slots.
    Reference(Arc<LevelAssignment>),
    /// The empty guess followed by `samples` seeded random guesses.
    Sampled { samples: usize, seed: u64 },
    /// Only the empty guess.
    #[default]
    Nothing,
}

#[derive(Debug, Clone)]
pub struct GuessConfig {
    /// Most jobs pinned by a single call.
    pub k_max: usize,
    pub partition_mode: PartitionMode,
    /// Calls at this depth or deeper discard all their jobs. The root has
    /// depth 0.
    pub depth_max: usize,
    pub eps: Eps,
    pub job_guessing: JobGuessing,
    /// Fixes the level offset instead of trying all of them at the root.
    pub offset: Option<usize>,
    pub max_cells: Option<usize>,
    /// Once this many guesses have been tried overall, each call stops after
    /// its first usable guess.
    pub node_budget: Option<u64>,
    pub record_trace: bool,
}

impl GuessConfig {
    pub fn new(eps: Eps) -> Self {
        GuessConfig {
            k_max: 0,
            partition_mode: PartitionMode::Laminar,
            depth_max: 1,
            eps,
            job_guessing: JobGuessing::Nothing,
            offset: None,
            max_cells: None,
            node_budget: None,
            record_trace: false,
        }
    }

    /// Depth cap `⌈(ε/m) log n⌉ + 1` for an instance of `n` jobs.
    pub fn with_default_depth(mut self, n: usize, m: usize) -> Self {
        self.depth_max = params::default_depth_max(n, m, self.eps);
        self
    }
}

/// Input of one recursive call. `jobs` is sorted; none of them is pinned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionInput {
    pub interval: Interval,
    pub pins: Pins,
    pub jobs: Vec<JobId>,
    pub depth: usize,
    pub offset: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Guesses tried over the whole search.
    pub explored: u64,
    /// Discards of the returned solution, by cause.
    pub edf_discards: usize,
    pub degenerate_discards: usize,
    pub depth_cap_discards: usize,
}

/// One call of the returned solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallTrace {
    pub depth: usize,
    pub interval: Interval,
    pub cells: Vec<Interval>,
    pub offset: Option<usize>,
    pub pinned: Vec<(JobId, usize)>,
    pub windows: Vec<TopWindow>,
    pub edf: EdfTrace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    /// Placed jobs, horizon `T`.
    pub schedule: Schedule,
    pub discarded: JobSet,
    pub stats: SolveStats,
    /// Offset chosen at the root, if the partition uses one.
    pub offset: Option<usize>,
    /// Calls of the returned solution in pre-order, when requested.
    pub trace: Vec<CallTrace>,
}

/// Runs the scheme on `[0, horizon)`. `horizon` must be a power of two no
/// shorter than the longest chain. The returned schedule leaves discarded
/// jobs out.
pub fn solve(inst: &Instance, horizon: usize, cfg: &GuessConfig) -> Result<SolveResult> {
    if !horizon.is_power_of_two() {
        return Err(Error::BadHorizon(horizon));
    }
    if cfg.depth_max == 0 {
        return Err(Error::BadSpec("depth_max must be at least 1".into()));
    }
    let all: Vec<JobId> = inst.jobs().collect();
    if longest_chain(inst, &all) > horizon {
        return Err(Error::InfeasibleHorizon(horizon));
    }
    let fam = LaminarFamily::build(horizon, inst.n(), cfg.eps)?;
    let solver = Solver {
        inst,
        cfg,
        horizon,
        enumerator: Enumerator::new(inst, cfg, &fam)?,
        explored: Cell::new(0),
    };
    let root = RecursionInput {
        interval: Interval::new(0, horizon),
        pins: Pins::new(inst.n()),
        jobs: all,
        depth: 0,
        offset: cfg.offset,
    };
    let out = solver.call(&root);
    let mut schedule = Schedule::new(horizon);
    for (&j, &t) in &out.placed {
        schedule.insert(j, t);
    }
    Ok(SolveResult {
        schedule,
        discarded: out.discarded.iter().copied().collect(),
        stats: SolveStats {
            explored: solver.explored.get(),
            edf_discards: out.edf,
            degenerate_discards: out.degenerate,
            depth_cap_discards: out.depth_cap,
        },
        offset: out.offset,
        trace: out.trace,
    })
}

#[derive(Debug, Default)]
struct Outcome {
    placed: BTreeMap<JobId, usize>,
    discarded: Vec<JobId>,
    edf: usize,
    degenerate: usize,
    depth_cap: usize,
    offset: Option<usize>,
    trace: Vec<CallTrace>,
}

impl Outcome {
    fn discard_all(input: &RecursionInput) -> Self {
        Outcome {
            discarded: input.jobs.clone(),
            depth_cap: input.jobs.len(),
            offset: input.offset,
            ..Default::default()
        }
    }

    fn absorb(&mut self, child: Outcome) {
        self.placed.extend(child.placed);
        self.discarded.extend(child.discarded);
        self.edf += child.edf;
        self.degenerate += child.degenerate;
        self.depth_cap += child.depth_cap;
        self.trace.extend(child.trace);
    }
}

struct Solver<'a> {
    inst: &'a Instance,
    cfg: &'a GuessConfig,
    horizon: usize,
    enumerator: Enumerator<'a>,
    explored: Cell<u64>,
}

impl Solver<'_> {
    fn budget_spent(&self) -> bool {
        self.cfg
            .node_budget
            .is_some_and(|b| self.explored.get() >= b)
    }

    fn call(&self, input: &RecursionInput) -> Outcome {
        if input.jobs.is_empty() {
            return Outcome {
                offset: input.offset,
                ..Default::default()
            };
        }
        if input.depth >= self.cfg.depth_max {
            return Outcome::discard_all(input);
        }
        if input.interval.len() == 1 {
            self.explored.set(self.explored.get() + 1);
            let g = Guess {
                pins: Vec::new(),
                cells: vec![input.interval],
                offset: input.offset,
            };
            return self
                .evaluate(input, &g)
                .unwrap_or_else(|_| Outcome::discard_all(input));
        }
        let mut best: Option<Outcome> = None;
        let _ = self.enumerator.visit(input, &mut |g| {
            self.explored.set(self.explored.get() + 1);
            if let Ok(o) = self.evaluate(input, &g) {
                if best
                    .as_ref()
                    .is_none_or(|b| o.discarded.len() < b.discarded.len())
                {
                    best = Some(o);
                }
            }
            match &best {
                Some(b) if b.discarded.is_empty() || self.budget_spent() => ControlFlow::Break(()),
                _ => ControlFlow::Continue(()),
            }
        });
        best.unwrap_or_else(|| Outcome::discard_all(input))
    }

    fn evaluate(&self, input: &RecursionInput, g: &Guess) -> Result<Outcome> {
        let inst = self.inst;
        let iv = input.interval;
        let mut pins = input.pins.clone();
        for &(j, t) in &g.pins {
            pins.pin(j, t);
        }
        let mut out = Outcome {
            offset: g.offset,
            ..Default::default()
        };
        out.placed.extend(g.pins.iter().copied());

        let top = if iv.len() == 1 {
            input.jobs.clone()
        } else {
            let class = classify(inst, &input.jobs, &pins, &g.cells)?;
            for (cell, bottom) in g.cells.iter().zip(class.bottom) {
                if bottom.is_empty() {
                    continue;
                }
                let child = RecursionInput {
                    interval: *cell,
                    pins: pins.clone(),
                    jobs: bottom,
                    depth: input.depth + 1,
                    offset: g.offset,
                };
                out.absorb(self.call(&child));
            }
            class.top
        };
        let children_trace = std::mem::take(&mut out.trace);

        let mut placed: BTreeMap<JobId, usize> = pins.iter().collect();
        placed.extend(out.placed.iter().map(|(&j, &t)| (j, t)));
        let mut load = vec![0; self.horizon];
        for &t in placed.values() {
            if iv.contains(t) {
                load[t] += 1;
            }
        }
        let windows = windows_for_top(inst, &top, &g.cells, iv, &placed);
        let edf = edf_insert(&windows, &load, &placed, inst, iv);
        out.placed
            .extend(edf.placements.iter().map(|(&j, &t)| (j, t)));
        out.discarded.extend(edf.discards());
        out.edf += edf.missed.len();
        out.degenerate += edf.degenerate.len();
        if self.cfg.record_trace {
            out.trace.push(CallTrace {
                depth: input.depth,
                interval: iv,
                cells: g.cells.clone(),
                offset: g.offset,
                pinned: g.pins.clone(),
                windows,
                edf: edf.trace,
            });
        }
        out.trace.extend(children_trace);
        Ok(out)
    }
}

/// Extends `opt` (a schedule of `inst` finishing by `horizon`) to the padded
/// instance of [`pad_to_power_of_two`]: the `k`-th job of each dummy chain
/// runs at `horizon + k`.
pub fn pad_schedule(
    inst: &Instance,
    opt: &Schedule,
    horizon: usize,
) -> Result<(Instance, usize, Schedule)> {
    let (padded, target) = pad_to_power_of_two(inst, horizon)?;
    let t = horizon.max(1);
    let extra = target - t;
    let mut sched = opt.clone();
    for c in 0..inst.machines() {
        for k in 0..extra {
            sched.insert(JobId(inst.n() + c * extra + k), t + k);
        }
    }
    sched.set_horizon(target);
    Ok((padded, target, sched))
}

/// Level assignment of the padded instance against `opt` extended by
/// [`pad_schedule`], ready for [`JobGuessing::Reference`].
pub fn reference_assignment(
    inst: &Instance,
    opt: &Schedule,
    horizon: usize,
    eps: Eps,
    threshold: ChainThreshold,
) -> Result<(Instance, usize, LevelAssignment)> {
    let (padded, target, sched) = pad_schedule(inst, opt, horizon)?;
    let fam = LaminarFamily::build(target, padded.n(), eps)?;
    let assign = assign_levels(&padded, &sched, &fam, eps, threshold);
    Ok((padded, target, assign))
}

/// End-to-end run on an arbitrary horizon: pad, solve, reinsert discards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineResult {
    /// Schedule of the original jobs. Its horizon is `T + |discards|`,
    /// counting discarded dummies too.
    pub schedule: Schedule,
    /// Discarded original jobs.
    pub discarded: JobSet,
    /// Total discards, dummies included.
    pub total_discards: usize,
    pub padded: Instance,
    /// Padded schedule after reinsertion, horizon `T* + total_discards`.
    pub repaired: Schedule,
    pub solve: SolveResult,
}

pub fn run_pipeline(inst: &Instance, horizon: usize, cfg: &GuessConfig) -> Result<PipelineResult> {
    let (padded, target) = pad_to_power_of_two(inst, horizon)?;
    run_padded(inst, padded, horizon, target, cfg)
}

/// [`run_pipeline`] on an instance already padded to `target`.
pub fn run_padded(
    inst: &Instance,
    padded: Instance,
    horizon: usize,
    target: usize,
    cfg: &GuessConfig,
) -> Result<PipelineResult> {
    let solved = solve(&padded, target, cfg)?;
    let repaired = insert_discarded(&solved.schedule, solved.discarded.iter().copied(), &padded)?;
    let total = solved.discarded.len();
    let mut schedule = repaired.clone();
    schedule.retain(|j| j.index() < inst.n());
    schedule.set_horizon(horizon.max(1) + total);
    Ok(PipelineResult {
        schedule,
        discarded: solved
            .discarded
            .iter()
            .copied()
            .filter(|j| j.index() < inst.n())
            .collect(),
        total_discards: total,
        padded,
        repaired,
        solve: solved,
    })
}

/// Runs the pipeline at `known_opt` when given. Otherwise binary-searches
/// the smallest horizon between the lower bound and a list schedule's
/// makespan that needs no discards, and returns the run with the smallest
/// final horizon seen.
pub fn solve_auto(
    inst: &Instance,
    cfg: &GuessConfig,
    known_opt: Option<usize>,
) -> Result<PipelineResult> {
    if let Some(t) = known_opt {
        return run_pipeline(inst, t, cfg);
    }
    let mut hi = list_schedule(inst, &PriorityOrder::identity(inst.n())).makespan();
    let mut lo = inst.lower_bound().min(hi);
    let mut best = run_pipeline(inst, hi, cfg)?;
    if best.total_discards > 0 {
        return Ok(best);
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let run = run_pipeline(inst, mid, cfg)?;
        let clean = run.total_discards == 0;
        if run.schedule.horizon() < best.schedule.horizon() {
            best = run;
        }
        if clean {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_schedule;
    use crate::oracle;

    fn exhaustive(k: usize) -> GuessConfig {
        GuessConfig {
            k_max: k,
            partition_mode: PartitionMode::Exhaustive,
            job_guessing: JobGuessing::Exhaustive,
            depth_max: 3,
            ..GuessConfig::new(Eps::ONE)
        }
    }

    #[test]
    fn antichain_without_guessing() {
        let inst = Instance::from_edges(8, 2, &[]).unwrap();
        let mut cfg = GuessConfig::new(Eps::ONE);
        cfg.offset = Some(0);
        let r = solve(&inst, 4, &cfg).unwrap();
        assert!(r.discarded.is_empty());
        assert!(validate_schedule(&inst, &r.schedule, true).feasible);
    }

    #[test]
    fn full_guessing_is_exact() {
        let inst = Instance::from_edges(6, 2, &[(0, 1), (1, 2), (0, 3), (3, 4)]).unwrap();
        let opt = oracle::optimal_makespan(&inst, None).unwrap();
        let p = run_pipeline(&inst, opt, &exhaustive(6)).unwrap();
        assert!(p.discarded.is_empty());
        assert_eq!(p.total_discards, 0);
        assert_eq!(p.schedule.horizon(), opt);
        assert_eq!(p.schedule.makespan(), opt);
        assert!(validate_schedule(&inst, &p.schedule, true).feasible);
    }

    #[test]
    fn depth_cap_discards_bottom_jobs() {
        // A chain cannot be top in a one-cell partition, so everything lands
        // in the child call, which sits at the cap.
        let inst = Instance::from_edges(3, 1, &[(0, 1), (1, 2)]).unwrap();
        let cfg = GuessConfig {
            partition_mode: PartitionMode::Exhaustive,
            max_cells: Some(1),
            depth_max: 1,
            ..GuessConfig::new(Eps::ONE)
        };
        let r = solve(&inst, 4, &cfg).unwrap();
        assert_eq!(r.discarded.len(), 3);
        assert_eq!(r.stats.depth_cap_discards, 3);
        let fixed = insert_discarded(&r.schedule, r.discarded.iter().copied(), &inst).unwrap();
        assert_eq!(fixed.horizon(), 4 + 3);
        assert!(validate_schedule(&inst, &fixed, true).feasible);
    }

    #[test]
    fn horizon_checks() {
        let chain = Instance::from_edges(5, 2, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let cfg = GuessConfig::new(Eps::ONE);
        assert_eq!(solve(&chain, 3, &cfg).unwrap_err(), Error::BadHorizon(3));
        assert_eq!(
            solve(&chain, 4, &cfg).unwrap_err(),
            Error::InfeasibleHorizon(4)
        );
    }

    #[test]
    fn reference_guessing_runs_clean() {
        let inst =
            Instance::from_edges(7, 2, &[(0, 2), (1, 2), (2, 3), (2, 4), (4, 5), (3, 6)]).unwrap();
        let opt = oracle::optimal_schedule(&inst).unwrap();
        let (padded, target, assign) = reference_assignment(
            &inst,
            &opt,
            opt.makespan(),
            Eps::ONE,
            ChainThreshold::PerMachine,
        )
        .unwrap();
        let cfg = GuessConfig {
            k_max: usize::MAX,
            job_guessing: JobGuessing::Reference(Arc::new(assign)),
            depth_max: 8,
            record_trace: true,
            ..GuessConfig::new(Eps::ONE)
        };
        let p = run_padded(&inst, padded, opt.makespan(), target, &cfg).unwrap();
        assert!(validate_schedule(&p.padded, &p.repaired, true).feasible);
        assert_eq!(p.repaired.horizon(), target + p.total_discards);
        assert!(validate_schedule(&inst, &p.schedule, true).feasible);
        assert!(!p.solve.trace.is_empty());
    }

    #[test]
    fn deterministic() {
        let inst = Instance::from_edges(9, 2, &[(0, 3), (1, 3), (3, 5), (2, 6), (6, 8)]).unwrap();
        let cfg = GuessConfig {
            k_max: 2,
            job_guessing: JobGuessing::Sampled {
                samples: 5,
                seed: 3,
            },
            depth_max: 3,
            ..GuessConfig::new(Eps::ONE)
        };
        assert_eq!(
            solve(&inst, 8, &cfg).unwrap(),
            solve(&inst, 8, &cfg).unwrap()
        );
    }
}
