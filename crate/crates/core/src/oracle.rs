//! Exact optimal makespan for small instances.
//!
//! The search runs breadth-first over order ideals (downward-closed job sets)
//! encoded as bit masks. From an ideal `S`, one time slot schedules a set `A`
//! of available jobs (all predecessors in `S`) with `|A| ≤ m`; the BFS depth
//! at which the full set appears is the optimal makespan.
//!
//! Two reductions keep the lattice small without losing optimality:
//!
//! * Greedy supersets. Only sets with `|A| = min(m, |available|)` are tried.
//!   If a schedule runs `A` in a slot while some available `x ∉ A` waits and a
//!   machine idles, moving `x` into that slot keeps every precedence (its
//!   predecessors are already in `S`, and its successors started later than
//!   `x` did) and never increases the makespan.
//! * Twins. Jobs with identical predecessor and successor sets are
//!   interchangeable, so within a twin class only the lowest-numbered
//!   unscheduled members are picked. Swapping twins maps schedules to
//!   schedules, so some optimal path uses only such prefix choices, and the
//!   lexicographically smallest optimal choice is always a prefix choice.
//!
//! [`optimal_schedule`] breaks ties by taking, slot by slot, the
//! lexicographically smallest job set that still leads to an optimum.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::model::{Instance, JobId, Schedule};

pub const DEFAULT_MAX_JOBS: usize = 24;
/// Masks are 64-bit.
pub const HARD_MAX_JOBS: usize = 63;

/// A downward-closed job set as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdealState(pub u64);

impl IdealState {
    pub fn contains(self, j: JobId) -> bool {
        self.0 >> j.index() & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Checks downward-closedness against `inst`.
    pub fn is_ideal(self, inst: &Instance) -> bool {
        inst.jobs()
            .filter(|&j| self.contains(j))
            .all(|j| inst.preds_of(j).iter().all(|&p| self.contains(p)))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExactSolver {
    pub max_jobs: usize,
    /// Cap on expanded states; `None` means unbounded.
    pub state_limit: Option<usize>,
}

impl Default for ExactSolver {
    fn default() -> Self {
        ExactSolver {
            max_jobs: DEFAULT_MAX_JOBS,
            state_limit: None,
        }
    }
}

struct Lattice<'a> {
    inst: &'a Instance,
    full: u64,
    pred_mask: Vec<u64>,
    /// Twin classes, each sorted by job id.
    classes: Vec<Vec<usize>>,
}

impl<'a> Lattice<'a> {
    fn new(inst: &'a Instance) -> Self {
        let n = inst.n();
        let pred_mask: Vec<u64> = inst
            .jobs()
            .map(|j| {
                inst.preds_of(j)
                    .iter()
                    .fold(0u64, |acc, p| acc | 1 << p.index())
            })
            .collect();
        let mut by_shape: HashMap<(&[JobId], &[JobId]), Vec<usize>> = HashMap::new();
        for j in inst.jobs() {
            by_shape
                .entry((inst.preds_of(j), inst.succs_of(j)))
                .or_default()
                .push(j.index());
        }
        let mut classes: Vec<Vec<usize>> = by_shape.into_values().collect();
        classes.sort();
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Lattice {
            inst,
            full,
            pred_mask,
            classes,
        }
    }

    /// Every slot set `A` worth trying from ideal `s`.
    fn moves(&self, s: u64, out: &mut Vec<u64>) {
        out.clear();
        // Available jobs grouped by twin class, lowest ids first.
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut total = 0;
        for class in &self.classes {
            let avail: Vec<usize> = class
                .iter()
                .copied()
                .filter(|&j| s >> j & 1 == 0 && self.pred_mask[j] & !s == 0)
                .collect();
            if !avail.is_empty() {
                total += avail.len();
                groups.push(avail);
            }
        }
        let m = self.inst.machines();
        if total <= m {
            let all = groups.iter().flatten().fold(0u64, |acc, &j| acc | 1 << j);
            if all != 0 {
                out.push(all);
            }
            return;
        }
        fn rec(groups: &[Vec<usize>], left: usize, acc: u64, out: &mut Vec<u64>) {
            let Some((first, rest)) = groups.split_first() else {
                if left == 0 {
                    out.push(acc);
                }
                return;
            };
            let room: usize = rest.iter().map(Vec::len).sum();
            let lo = left.saturating_sub(room);
            let mut a = acc;
            for (taken, j) in std::iter::once(None)
                .chain(first.iter().map(Some))
                .enumerate()
            {
                if let Some(&j) = j {
                    a |= 1 << j;
                }
                if taken > left {
                    break;
                }
                if taken >= lo {
                    rec(rest, left - taken, a, out);
                }
            }
        }
        rec(&groups, m, 0, out);
    }
}

/// Lower-id-first comparison of two job sets given as masks.
fn lex_less(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let low = diff & diff.wrapping_neg();
    a & low != 0
}

impl ExactSolver {
    fn check(&self, inst: &Instance) -> Result<()> {
        let cap = self.max_jobs.min(HARD_MAX_JOBS);
        if inst.n() > cap {
            return Err(Error::TooLarge { n: inst.n(), cap });
        }
        Ok(())
    }

    /// BFS layers up to (and including) the one holding the full set.
    fn layers(&self, lat: &Lattice) -> Result<Vec<Vec<u64>>> {
        let mut layers = vec![vec![0u64]];
        let mut seen: HashSet<u64> = HashSet::from([0]);
        let mut expanded = 0usize;
        let mut moves = Vec::new();
        while !layers.last().unwrap().contains(&lat.full) {
            let mut next = Vec::new();
            for &s in layers.last().unwrap() {
                expanded += 1;
                if let Some(limit) = self.state_limit {
                    if expanded > limit {
                        return Err(Error::BudgetExhausted(limit));
                    }
                }
                lat.moves(s, &mut moves);
                for &a in &moves {
                    if seen.insert(s | a) {
                        next.push(s | a);
                    }
                }
            }
            next.sort_unstable();
            layers.push(next);
        }
        Ok(layers)
    }

    pub fn optimal_makespan(&self, inst: &Instance) -> Result<usize> {
        self.check(inst)?;
        let lat = Lattice::new(inst);
        Ok(self.layers(&lat)?.len() - 1)
    }

    pub fn optimal_schedule(&self, inst: &Instance) -> Result<Schedule> {
        self.check(inst)?;
        let lat = Lattice::new(inst);
        let layers = self.layers(&lat)?;
        let depth = layers.len() - 1;

        // good[d]: ideals first reached at depth d that still reach the full
        // set in depth - d further slots.
        let mut good: Vec<HashSet<u64>> = vec![HashSet::new(); depth + 1];
        good[depth].insert(lat.full);
        let mut moves = Vec::new();
        for d in (0..depth).rev() {
            let (head, tail) = good.split_at_mut(d + 1);
            for &s in &layers[d] {
                lat.moves(s, &mut moves);
                if moves.iter().any(|&a| tail[0].contains(&(s | a))) {
                    head[d].insert(s);
                }
            }
        }

        let mut sched = Schedule::new(depth);
        let mut s = 0u64;
        for (t, next_good) in good.iter().enumerate().skip(1) {
            lat.moves(s, &mut moves);
            let mut best: Option<u64> = None;
            for &a in &moves {
                if next_good.contains(&(s | a)) && best.is_none_or(|b| lex_less(a, b)) {
                    best = Some(a);
                }
            }
            let a = best.expect("an optimal continuation exists");
            for j in 0..inst.n() {
                if a >> j & 1 == 1 {
                    sched.insert(JobId(j), t - 1);
                }
            }
            s |= a;
        }
        Ok(sched)
    }
}

/// Optimal makespan with the default cap, optionally limiting expanded states.
pub fn optimal_makespan(inst: &Instance, limit: Option<usize>) -> Result<usize> {
    ExactSolver {
        state_limit: limit,
        ..ExactSolver::default()
    }
    .optimal_makespan(inst)
}

pub fn optimal_schedule(inst: &Instance) -> Result<Schedule> {
    ExactSolver::default().optimal_schedule(inst)
}
