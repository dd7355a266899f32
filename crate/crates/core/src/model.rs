//! Instances, precedence relations, schedules, and the feasibility validator.
//!
//! Every job has unit processing time, so a schedule is just a start slot per
//! job: job `j` started at `t` occupies `[t, t + 1)`. Machines are identical,
//! which makes "at most `m` jobs share a slot" equivalent to a machine
//! assignment, so schedules never store machine indices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dense zero-based job index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JobId(pub usize);

impl JobId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for JobId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.parse().map(JobId)
    }
}

impl From<usize> for JobId {
    fn from(i: usize) -> Self {
        JobId(i)
    }
}

/// Transitively closed strict partial order over `[0, n)`, stored as a
/// reachability bit matrix plus sorted predecessor/successor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceRelation {
    n: usize,
    words: usize,
    reach: Vec<u64>,
    preds: Vec<Vec<JobId>>,
    succs: Vec<Vec<JobId>>,
}

impl PrecedenceRelation {
    /// Closes `edges` transitively. Self-loops count as cycles.
    pub fn closure_of(n: usize, edges: &[(JobId, JobId)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            for j in [u, v] {
                if j.index() >= n {
                    return Err(Error::Index { job: j.index(), n });
                }
            }
            if u == v {
                return Err(Error::Cycle(u));
            }
            adj[u.index()].push(v.index());
        }

        let words = n.div_ceil(64).max(1);
        let mut reach = vec![0u64; n * words];
        let mut stack = Vec::new();
        for src in 0..n {
            let row = &mut reach[src * words..(src + 1) * words];
            stack.clear();
            stack.extend(adj[src].iter().copied());
            while let Some(v) = stack.pop() {
                if v == src {
                    return Err(Error::Cycle(JobId(src)));
                }
                let (w, b) = (v / 64, 1u64 << (v % 64));
                if row[w] & b == 0 {
                    row[w] |= b;
                    stack.extend(adj[v].iter().copied());
                }
            }
        }

        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for a in 0..n {
            for b in 0..n {
                if reach[a * words + b / 64] >> (b % 64) & 1 == 1 {
                    succs[a].push(JobId(b));
                    preds[b].push(JobId(a));
                }
            }
        }
        Ok(PrecedenceRelation {
            n,
            words,
            reach,
            preds,
            succs,
        })
    }

    #[inline]
    pub fn precedes(&self, a: JobId, b: JobId) -> bool {
        let (a, b) = (a.index(), b.index());
        self.reach[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    /// All pairs `(a, b)` with `a ≺ b`, sorted.
    pub fn pairs(&self) -> impl Iterator<Item = (JobId, JobId)> + '_ {
        self.succs
            .iter()
            .enumerate()
            .flat_map(|(a, s)| s.iter().map(move |&b| (JobId(a), b)))
    }

    pub fn len(&self) -> usize {
        self.succs.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A scheduling instance: `n` unit jobs, `m` identical machines, and a
/// transitively closed precedence relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    m: usize,
    prec: PrecedenceRelation,
    topo: Vec<JobId>,
}

impl Instance {
    pub fn new(n: usize, m: usize, edges: &[(JobId, JobId)]) -> Result<Self> {
        if m == 0 {
            return Err(Error::BadMachineCount);
        }
        let prec = PrecedenceRelation::closure_of(n, edges)?;
        // In a closed order a ≺ b implies preds(a) ⊊ preds(b), so sorting by
        // predecessor count is a topological order.
        let mut topo: Vec<JobId> = (0..n).map(JobId).collect();
        topo.sort_by_key(|j| (prec.preds[j.index()].len(), *j));
        Ok(Instance { m, prec, topo })
    }

    /// Convenience wrapper over [`Instance::new`] taking raw indices.
    pub fn from_edges(n: usize, m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let edges: Vec<_> = edges.iter().map(|&(u, v)| (JobId(u), JobId(v))).collect();
        Self::new(n, m, &edges)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.prec.n
    }

    #[inline]
    pub fn machines(&self) -> usize {
        self.m
    }

    pub fn jobs(&self) -> impl Iterator<Item = JobId> {
        (0..self.n()).map(JobId)
    }

    pub fn prec(&self) -> &PrecedenceRelation {
        &self.prec
    }

    #[inline]
    pub fn precedes(&self, a: JobId, b: JobId) -> bool {
        self.prec.precedes(a, b)
    }

    /// Jobs in a fixed topological order (by predecessor count, then id).
    pub fn topological_order(&self) -> &[JobId] {
        &self.topo
    }

    /// Same instance with a different machine count.
    pub fn with_machines(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::BadMachineCount);
        }
        Ok(Instance { m, ..self.clone() })
    }

    fn check(&self, j: JobId) -> Result<()> {
        if j.index() < self.n() {
            Ok(())
        } else {
            Err(Error::Index {
                job: j.index(),
                n: self.n(),
            })
        }
    }

    /// Sorted transitive predecessors of `j`.
    pub fn predecessors(&self, j: JobId) -> Result<&[JobId]> {
        self.check(j)?;
        Ok(&self.prec.preds[j.index()])
    }

    /// Sorted transitive successors of `j`.
    pub fn successors(&self, j: JobId) -> Result<&[JobId]> {
        self.check(j)?;
        Ok(&self.prec.succs[j.index()])
    }

    // Unchecked variants for internal hot loops.
    #[inline]
    pub(crate) fn preds_of(&self, j: JobId) -> &[JobId] {
        &self.prec.preds[j.index()]
    }

    #[inline]
    pub(crate) fn succs_of(&self, j: JobId) -> &[JobId] {
        &self.prec.succs[j.index()]
    }

    /// Covering pairs of the order (its transitive reduction): `a ≺ b` with no
    /// `c` such that `a ≺ c ≺ b`.
    pub fn immediate_successors(&self, j: JobId) -> Vec<JobId> {
        let succs = self.succs_of(j);
        succs
            .iter()
            .copied()
            .filter(|&b| !succs.iter().any(|&c| self.precedes(c, b)))
            .collect()
    }

    /// Lower bound `max(⌈n/m⌉, longest chain)` on any makespan.
    pub fn lower_bound(&self) -> usize {
        let all: Vec<JobId> = self.jobs().collect();
        self.n().div_ceil(self.m).max(longest_chain(self, &all))
    }
}

/// Length of the longest chain `j1 ≺ … ≺ jc` inside `subset`.
pub fn longest_chain(inst: &Instance, subset: &[JobId]) -> usize {
    let mut member = vec![false; inst.n()];
    for j in subset {
        member[j.index()] = true;
    }
    chain_in(inst, &member).len()
}

/// A longest chain inside the member mask, earliest job first. Ties are
/// broken towards smaller job ids at every step.
pub(crate) fn chain_in(inst: &Instance, member: &[bool]) -> Vec<JobId> {
    let mut len = vec![0usize; inst.n()];
    let mut best: Option<JobId> = None;
    for &j in inst.topological_order() {
        if !member[j.index()] {
            continue;
        }
        let l = 1 + inst
            .preds_of(j)
            .iter()
            .filter(|p| member[p.index()])
            .map(|p| len[p.index()])
            .max()
            .unwrap_or(0);
        len[j.index()] = l;
        best = match best {
            Some(b) if len[b.index()] > l || (len[b.index()] == l && b < j) => Some(b),
            _ => Some(j),
        };
    }
    let Some(mut cur) = best else {
        return Vec::new();
    };
    let mut chain = vec![cur];
    while len[cur.index()] > 1 {
        let want = len[cur.index()] - 1;
        cur = *inst
            .preds_of(cur)
            .iter()
            .find(|p| member[p.index()] && len[p.index()] == want)
            .expect("chain predecessor exists");
        chain.push(cur);
    }
    chain.reverse();
    chain
}

/// Start slots for (a subset of) the jobs, plus a horizon `T'`.
///
/// The horizon is the length of the timeline the schedule lives on; it is what
/// the text format prints as `makespan`. It is at least the last occupied slot
/// plus one, and can be larger when trailing slots are empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schedule {
    start: BTreeMap<JobId, usize>,
    horizon: usize,
}

impl Schedule {
    pub fn new(horizon: usize) -> Self {
        Schedule {
            start: BTreeMap::new(),
            horizon,
        }
    }

    pub fn from_starts(starts: impl IntoIterator<Item = (JobId, usize)>) -> Self {
        let start: BTreeMap<_, _> = starts.into_iter().collect();
        let horizon = start.values().map(|&t| t + 1).max().unwrap_or(0);
        Schedule { start, horizon }
    }

    /// Returns the previous start of `j`, if any.
    pub fn insert(&mut self, j: JobId, t: usize) -> Option<usize> {
        self.start.insert(j, t)
    }

    pub fn remove(&mut self, j: JobId) -> Option<usize> {
        self.start.remove(&j)
    }

    pub fn start(&self, j: JobId) -> Option<usize> {
        self.start.get(&j).copied()
    }

    pub fn contains(&self, j: JobId) -> bool {
        self.start.contains_key(&j)
    }

    pub fn iter(&self) -> impl Iterator<Item = (JobId, usize)> + '_ {
        self.start.iter().map(|(&j, &t)| (j, t))
    }

    pub fn len(&self) -> usize {
        self.start.len()
    }

    pub fn is_empty(&self) -> bool {
        self.start.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn set_horizon(&mut self, horizon: usize) {
        self.horizon = horizon;
    }

    /// Last occupied slot plus one, `0` when empty.
    pub fn makespan(&self) -> usize {
        self.start.values().map(|&t| t + 1).max().unwrap_or(0)
    }

    /// Number of jobs started in each slot of `[0, len)`.
    pub fn load(&self, len: usize) -> Vec<usize> {
        let mut load = vec![0; len];
        for &t in self.start.values() {
            if t < len {
                load[t] += 1;
            }
        }
        load
    }

    /// Keeps only jobs accepted by `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(JobId) -> bool) {
        self.start.retain(|&j, _| keep(j));
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// More than `m` jobs start in `slot`.
    Capacity { slot: usize, count: usize },
    /// Both scheduled, `pred ≺ succ`, but `succ` does not start after `pred`.
    Precedence { pred: JobId, succ: JobId },
    /// Start at or beyond the horizon.
    Horizon { job: JobId, start: usize },
    /// Scheduled id outside the instance, or (with `require_all`) a job that
    /// is missing from the schedule.
    UnknownJob { job: JobId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Capacity { slot, count } => {
                write!(f, "capacity: {count} jobs in slot {slot}")
            }
            Violation::Precedence { pred, succ } => {
                write!(f, "precedence: {pred} must finish before {succ} starts")
            }
            Violation::Horizon { job, start } => {
                write!(f, "horizon: job {job} starts at {start}")
            }
            Violation::UnknownJob { job } => write!(f, "unknown-job: {job}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
    pub makespan: usize,
}

pub fn validate_schedule(inst: &Instance, sched: &Schedule, require_all: bool) -> ValidationReport {
    let n = inst.n();
    let mut violations = Vec::new();

    let mut per_slot: BTreeMap<usize, usize> = BTreeMap::new();
    for (j, t) in sched.iter() {
        if j.index() >= n {
            violations.push(Violation::UnknownJob { job: j });
            continue;
        }
        *per_slot.entry(t).or_default() += 1;
        if t >= sched.horizon() {
            violations.push(Violation::Horizon { job: j, start: t });
        }
    }
    for (&slot, &count) in &per_slot {
        if count > inst.machines() {
            violations.push(Violation::Capacity { slot, count });
        }
    }
    for (a, b) in inst.prec().pairs() {
        if let (Some(ta), Some(tb)) = (sched.start(a), sched.start(b)) {
            if ta + 1 > tb {
                violations.push(Violation::Precedence { pred: a, succ: b });
            }
        }
    }
    if require_all {
        violations.extend(
            inst.jobs()
                .filter(|&j| !sched.contains(j))
                .map(|job| Violation::UnknownJob { job }),
        );
    }

    ValidationReport {
        feasible: violations.is_empty(),
        violations,
        makespan: sched.makespan(),
    }
}

/// Convenience set type used across the public API.
pub type JobSet = BTreeSet<JobId>;
