//! Laminar interval family over `[0, T)` and the per-level assignment of jobs
//! to guessed and top sets, derived from a reference optimal schedule.

use std::collections::BTreeSet;

use crate::eps::Eps;
use crate::error::{Error, Result};
use crate::model::{chain_in, Instance, JobId, JobSet, Schedule};
use crate::params::{self, ChainThreshold};

/// Half-open slot range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Interval { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start <= t && t < self.end
    }

    pub fn covers(&self, w: Window) -> bool {
        self.start <= w.lo && w.hi <= self.end
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalNode {
    pub interval: Interval,
    pub level: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Aligned tree of intervals. Level 0 is `[0, T)`; an interval of length at
/// least `2^ρ` splits into `2^ρ` equal children, a shorter interval longer
/// than one slot splits into unit children, unit intervals are leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaminarFamily {
    horizon: usize,
    jobs: usize,
    rho: u32,
    nodes: Vec<IntervalNode>,
    levels: Vec<Vec<usize>>,
}

impl LaminarFamily {
    pub fn build(horizon: usize, n: usize, eps: Eps) -> Result<Self> {
        if !horizon.is_power_of_two() {
            return Err(Error::BadHorizon(horizon));
        }
        let rho = params::rho(n, eps);
        let fanout = 1usize << rho;
        let mut nodes = vec![IntervalNode {
            interval: Interval::new(0, horizon),
            level: 0,
            parent: None,
            children: Vec::new(),
        }];
        let mut levels = vec![vec![0]];
        loop {
            let current = levels.last().unwrap().clone();
            let len = nodes[current[0]].interval.len();
            if len == 1 {
                break;
            }
            let (parts, child_len) = if len >= fanout {
                (fanout, len / fanout)
            } else {
                (len, 1)
            };
            let level = levels.len();
            let mut next = Vec::with_capacity(current.len() * parts);
            for &p in &current {
                let s = nodes[p].interval.start;
                for i in 0..parts {
                    let id = nodes.len();
                    nodes.push(IntervalNode {
                        interval: Interval::new(s + i * child_len, s + (i + 1) * child_len),
                        level,
                        parent: Some(p),
                        children: Vec::new(),
                    });
                    nodes[p].children.push(id);
                    next.push(id);
                }
            }
            levels.push(next);
        }
        Ok(LaminarFamily {
            horizon,
            jobs: n,
            rho,
            nodes,
            levels,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn leaf_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn node(&self, id: usize) -> &IntervalNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[IntervalNode] {
        &self.nodes
    }

    /// Node ids of one level, left to right.
    pub fn level(&self, level: usize) -> &[usize] {
        &self.levels[level]
    }

    /// Common length of the intervals at `level`.
    pub fn level_len(&self, level: usize) -> usize {
        self.nodes[self.levels[level][0]].interval.len()
    }

    /// Position within its level of the interval at `level` holding slot `t`.
    pub fn position_at(&self, level: usize, t: usize) -> usize {
        t / self.level_len(level)
    }

    pub fn interval_at(&self, level: usize, t: usize) -> Interval {
        self.nodes[self.levels[level][self.position_at(level, t)]].interval
    }

    /// Level of the family interval equal to `iv`, if there is one.
    pub fn level_of(&self, iv: Interval) -> Option<usize> {
        (0..self.num_levels()).find(|&l| {
            let len = self.level_len(l);
            len == iv.len() && iv.start.is_multiple_of(len) && iv.end <= self.horizon
        })
    }

    /// The intervals at `level` inside `iv` (clamped to the leaf level).
    pub fn cells_within(&self, iv: Interval, level: usize) -> Vec<Interval> {
        let level = level.min(self.leaf_level());
        let len = self.level_len(level);
        if len >= iv.len() {
            return vec![iv];
        }
        (iv.start..iv.end)
            .step_by(len)
            .map(|s| Interval::new(s, s + len))
            .collect()
    }
}

pub fn build_laminar(horizon: usize, n: usize, eps: Eps) -> Result<LaminarFamily> {
    LaminarFamily::build(horizon, n, eps)
}

/// Appends `m · (T* − T)` dummy jobs after every original job, as `m` chains
/// of length `T* − T`, where `T*` is the next power of two `≥ T`.
pub fn pad_to_power_of_two(inst: &Instance, horizon: usize) -> Result<(Instance, usize)> {
    let t = horizon.max(1);
    let target = t.next_power_of_two();
    let extra = target - t;
    if extra == 0 {
        return Ok((inst.clone(), target));
    }
    let n = inst.n();
    let m = inst.machines();
    let mut edges: Vec<(JobId, JobId)> = inst.prec().pairs().collect();
    for c in 0..m {
        let head = n + c * extra;
        for j in 0..n {
            edges.push((JobId(j), JobId(head)));
        }
        for k in 1..extra {
            edges.push((JobId(head + k - 1), JobId(head + k)));
        }
    }
    Ok((Instance::new(n + m * extra, m, &edges)?, target))
}

/// Dense map from job to pinned slot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pins {
    slot: Vec<Option<usize>>,
    count: usize,
}

impl Pins {
    pub fn new(n: usize) -> Self {
        Pins {
            slot: vec![None; n],
            count: 0,
        }
    }

    pub fn from_schedule(
        n: usize,
        sched: &Schedule,
        jobs: impl IntoIterator<Item = JobId>,
    ) -> Self {
        let mut pins = Pins::new(n);
        for j in jobs {
            if let Some(t) = sched.start(j) {
                pins.pin(j, t);
            }
        }
        pins
    }

    pub fn pin(&mut self, j: JobId, t: usize) {
        if self.slot[j.index()].replace(t).is_none() {
            self.count += 1;
        }
    }

    pub fn unpin(&mut self, j: JobId) {
        if self.slot[j.index()].take().is_some() {
            self.count -= 1;
        }
    }

    #[inline]
    pub fn get(&self, j: JobId) -> Option<usize> {
        self.slot[j.index()]
    }

    pub fn contains(&self, j: JobId) -> bool {
        self.slot[j.index()].is_some()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (JobId, usize)> + '_ {
        self.slot
            .iter()
            .enumerate()
            .filter_map(|(j, t)| t.map(|t| (JobId(j), t)))
    }
}

/// Slots `[lo, hi)` where a job may sit given only pinned neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
}

impl Window {
    /// Whether the window meets more than one aligned block of length `len`.
    pub fn spans_blocks(&self, len: usize) -> bool {
        self.lo / len != (self.hi - 1) / len
    }
}

/// `lo` = latest completion of a pinned predecessor (or 0), `hi` = earliest
/// start of a pinned successor (or `horizon`). A pinned job's window is its
/// own slot.
pub fn feasible_window(inst: &Instance, j: JobId, pins: &Pins, horizon: usize) -> Result<Window> {
    if let Some(t) = pins.get(j) {
        return Ok(Window { lo: t, hi: t + 1 });
    }
    let lo = inst
        .preds_of(j)
        .iter()
        .filter_map(|&p| pins.get(p))
        .map(|t| t + 1)
        .max()
        .unwrap_or(0);
    let hi = inst
        .succs_of(j)
        .iter()
        .filter_map(|&s| pins.get(s))
        .min()
        .unwrap_or(horizon)
        .min(horizon);
    if lo >= hi {
        return Err(Error::EmptyWindow { job: j, lo, hi });
    }
    Ok(Window { lo, hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    Guess,
    Top,
}

/// Guessed and top jobs of one interval of one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSets {
    pub interval: Interval,
    pub guess: JobSet,
    pub top: JobSet,
}

/// Per level, per interval guess and top sets, plus the schedule they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelAssignment {
    pub levels: Vec<Vec<IntervalSets>>,
    pub opt: Schedule,
    pub horizon: usize,
}

impl LevelAssignment {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn top_at(&self, level: usize) -> JobSet {
        self.levels
            .get(level)
            .map(|ivs| ivs.iter().flat_map(|s| s.top.iter().copied()).collect())
            .unwrap_or_default()
    }

    pub fn guess_at(&self, level: usize) -> JobSet {
        self.levels
            .get(level)
            .map(|ivs| ivs.iter().flat_map(|s| s.guess.iter().copied()).collect())
            .unwrap_or_default()
    }

    /// Level and kind of `j`, first occurrence.
    pub fn level_of(&self, j: JobId) -> Option<(usize, SetKind)> {
        self.levels.iter().enumerate().find_map(|(l, ivs)| {
            ivs.iter().find_map(|s| {
                if s.guess.contains(&j) {
                    Some((l, SetKind::Guess))
                } else if s.top.contains(&j) {
                    Some((l, SetKind::Top))
                } else {
                    None
                }
            })
        })
    }

    /// Guessed jobs of levels in `range` lying inside `iv`, with their slots
    /// in the reference schedule.
    pub fn guesses_in(
        &self,
        levels: std::ops::RangeInclusive<usize>,
        iv: Interval,
    ) -> Vec<(JobId, usize)> {
        let mut out = Vec::new();
        for l in levels {
            let Some(ivs) = self.levels.get(l) else { break };
            for s in ivs {
                for &j in &s.guess {
                    if let Some(t) = self.opt.start(j) {
                        if iv.contains(t) {
                            out.push((j, t));
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }
}

/// Walks the levels top-down. For an interval `I` of level `ℓ`, `J_I` holds
/// the unassigned jobs whose window (pinning earlier-level guesses at their
/// reference slots) lies in `I`. A job of `J_I` is flexible when its window,
/// now also pinning this level's guesses, meets two or more children of `I`.
/// While the flexible non-guessed jobs contain a chain at least as long as
/// the threshold, the first and last chain job in each child join the guess
/// set. The remaining flexible jobs are the top set of `I`.
///
/// Jobs that reach a unit interval without ever becoming flexible are pinned
/// to that slot by their neighbours; they are placed in the leaf's guess set.
pub fn assign_levels(
    inst: &Instance,
    opt: &Schedule,
    fam: &LaminarFamily,
    eps: Eps,
    threshold: ChainThreshold,
) -> LevelAssignment {
    let n = inst.n();
    let m = inst.machines();
    let horizon = fam.horizon();
    let mut assigned = vec![false; n];
    let mut pins = Pins::new(n);
    let mut levels = Vec::with_capacity(fam.num_levels());

    for level in 0..fam.num_levels() {
        let ids = fam.level(level);
        let len = fam.level_len(level);
        // Bucket unassigned jobs by the interval holding their window.
        let mut members: Vec<Vec<JobId>> = vec![Vec::new(); ids.len()];
        for j in inst.jobs().filter(|j| !assigned[j.index()]) {
            let w =
                feasible_window(inst, j, &pins, horizon).expect("reference pins are consistent");
            let pos = w.lo / len;
            debug_assert!(
                w.hi <= (pos + 1) * len,
                "window of {j} escapes its interval"
            );
            members[pos].push(j);
        }

        let mut sets = Vec::with_capacity(ids.len());
        for (pos, &id) in ids.iter().enumerate() {
            let node = fam.node(id);
            let iv = node.interval;
            let mut guess = JobSet::new();
            let mut top = JobSet::new();
            if node.children.is_empty() {
                guess.extend(members[pos].iter().copied());
            } else {
                let child_len = fam.level_len(level + 1);
                let thr = params::chain_threshold(iv.len(), m, n, eps, threshold);
                loop {
                    let mut flexible = vec![false; n];
                    let mut any = false;
                    for &j in &members[pos] {
                        if guess.contains(&j) {
                            continue;
                        }
                        let w = feasible_window(inst, j, &pins, horizon).expect("consistent");
                        if w.spans_blocks(child_len) {
                            flexible[j.index()] = true;
                            any = true;
                        }
                    }
                    if !any {
                        break;
                    }
                    let chain = chain_in(inst, &flexible);
                    let long_enough = num_rational::Ratio::from_integer(chain.len() as u64) >= thr;
                    if !long_enough {
                        top.extend(inst.jobs().filter(|j| flexible[j.index()]));
                        break;
                    }
                    // The chain is increasing in reference slot order.
                    let mut by_child: Vec<Vec<JobId>> = vec![Vec::new(); iv.len() / child_len];
                    for &j in &chain {
                        let t = opt.start(j).expect("reference schedule is complete");
                        by_child[(t - iv.start) / child_len].push(j);
                    }
                    for part in by_child.iter().filter(|p| !p.is_empty()) {
                        for j in [part[0], part[part.len() - 1]] {
                            guess.insert(j);
                            pins.pin(j, opt.start(j).unwrap());
                        }
                    }
                }
            }
            for &j in guess.iter().chain(top.iter()) {
                assigned[j.index()] = true;
            }
            for &j in &guess {
                pins.pin(j, opt.start(j).expect("reference schedule is complete"));
            }
            sets.push(IntervalSets {
                interval: iv,
                guess,
                top,
            });
        }
        levels.push(sets);
    }

    LevelAssignment {
        levels,
        opt: opt.clone(),
        horizon,
    }
}

/// `|⋃_{r≥0} top[a + r·q + 1]|` for each offset `a ∈ [0, q)`.
pub fn offset_buckets(assign: &LevelAssignment, q: usize) -> Vec<usize> {
    (0..q)
        .map(|a| {
            let mut union = BTreeSet::new();
            let mut l = a + 1;
            while l < assign.num_levels() {
                union.extend(assign.top_at(l));
                l += q;
            }
            union.len()
        })
        .collect()
}

/// Offset `a ∈ [0, m/ε)` minimising its bucket of top jobs, with that size.
/// Ties go to the smallest offset.
pub fn best_offset(assign: &LevelAssignment, m: usize, eps: Eps) -> Result<(usize, usize)> {
    let q = eps
        .machines_over(m)
        .ok_or_else(|| Error::BadEps(format!("m/ε = {m}/{eps} is not an integer")))?;
    Ok(argmin(&offset_buckets(assign, q)))
}

pub(crate) fn argmin(counts: &[usize]) -> (usize, usize) {
    counts
        .iter()
        .copied()
        .enumerate()
        .min_by_key(|&(a, c)| (c, a))
        .unwrap_or((0, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn lens(f: &LaminarFamily) -> Vec<usize> {
        (0..f.num_levels()).map(|l| f.level_len(l)).collect()
    }

    #[test]
    fn family_16() {
        let f = build_laminar(16, 16, Eps::ONE).unwrap();
        assert_eq!(f.rho(), 2);
        assert_eq!(lens(&f), vec![16, 4, 1]);
        assert_eq!(f.level(1).len(), 4);
        assert_eq!(f.level(2).len(), 16);
        assert_eq!(f.num_levels(), 3);
    }

    #[test]
    fn family_small_and_bad() {
        let f = build_laminar(1, 4, Eps::ONE).unwrap();
        assert_eq!(f.num_levels(), 1);
        assert_eq!(build_laminar(12, 16, Eps::ONE), Err(Error::BadHorizon(12)));
        assert_eq!(build_laminar(0, 16, Eps::ONE), Err(Error::BadHorizon(0)));
        // |I| = 2 < 2^ρ = 4 splits straight into unit intervals.
        let f = build_laminar(8, 8, Eps::ONE).unwrap();
        assert_eq!(lens(&f), vec![8, 2, 1]);
    }

    #[test]
    fn siblings_tile_parent() {
        let f = build_laminar(64, 40, Eps::new(1, 2).unwrap()).unwrap();
        for node in f.nodes() {
            if node.children.is_empty() {
                assert_eq!(node.interval.len(), 1);
                continue;
            }
            let mut at = node.interval.start;
            for &c in &node.children {
                let iv = f.node(c).interval;
                assert_eq!(iv.start, at);
                assert_eq!(f.node(c).level, node.level + 1);
                at = iv.end;
            }
            assert_eq!(at, node.interval.end);
        }
    }

    #[test]
    fn padding() {
        let inst = Instance::from_edges(3, 2, &[(0, 1)]).unwrap();
        let (p, t) = pad_to_power_of_two(&inst, 3).unwrap();
        assert_eq!((p.n(), t), (5, 4));
        let (p, t) = pad_to_power_of_two(&inst, 4).unwrap();
        assert_eq!((p.n(), t), (3, 4));

        // T = 5 on three machines: nine dummies in three chains of three.
        let edges: Vec<_> = (1..5).map(|i| (i - 1, i)).collect();
        let chain = Instance::from_edges(5, 3, &edges).unwrap();
        let (p, t) = pad_to_power_of_two(&chain, 5).unwrap();
        assert_eq!((p.n(), t), (14, 8));
        assert!(p.precedes(JobId(4), JobId(5)));
        assert!(p.precedes(JobId(5), JobId(7)));
        assert!(!p.precedes(JobId(5), JobId(8)));
        assert_eq!(oracle::optimal_makespan(&p, None).unwrap(), 8);
    }

    #[test]
    fn windows() {
        let chain = Instance::from_edges(3, 1, &[(0, 1), (1, 2)]).unwrap();
        let mut pins = Pins::new(3);
        assert_eq!(
            feasible_window(&chain, JobId(1), &pins, 8).unwrap(),
            Window { lo: 0, hi: 8 }
        );
        pins.pin(JobId(0), 0);
        pins.pin(JobId(2), 5);
        assert_eq!(
            feasible_window(&chain, JobId(1), &pins, 8).unwrap(),
            Window { lo: 1, hi: 5 }
        );

        let d = Instance::from_edges(4, 2, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let mut pins = Pins::new(4);
        pins.pin(JobId(0), 0);
        pins.pin(JobId(3), 2);
        assert_eq!(
            feasible_window(&d, JobId(1), &pins, 4).unwrap(),
            Window { lo: 1, hi: 2 }
        );
        pins.pin(JobId(3), 1);
        assert!(matches!(
            feasible_window(&d, JobId(1), &pins, 4),
            Err(Error::EmptyWindow { .. })
        ));
    }

    #[test]
    fn antichain_is_all_top() {
        // The threshold ε|I| / (m 2^⌈log log n⌉) = 32 / 16 exceeds the
        // longest chain, so nothing is guessed at the root.
        let inst = Instance::from_edges(64, 2, &[]).unwrap();
        let opt = Schedule::from_starts((0..64).map(|j| (JobId(j), j / 2)));
        let fam = build_laminar(32, 64, Eps::ONE).unwrap();
        let a = assign_levels(&inst, &opt, &fam, Eps::ONE, ChainThreshold::PerMachine);
        assert!(a.levels.iter().flatten().all(|s| s.guess.is_empty()));
        assert_eq!(a.top_at(0).len(), 64);
    }

    #[test]
    fn short_intervals_guess_everything() {
        // Threshold 4 / 8 < 1: every flexible job ends up guessed.
        let inst = Instance::from_edges(8, 2, &[]).unwrap();
        let opt = oracle::optimal_schedule(&inst).unwrap();
        let fam = build_laminar(4, 8, Eps::ONE).unwrap();
        let a = assign_levels(&inst, &opt, &fam, Eps::ONE, ChainThreshold::PerMachine);
        assert_eq!(a.guess_at(0).len(), 8);
        assert!(a.top_at(0).is_empty());
    }

    #[test]
    fn offsets() {
        // Buckets (5, 3) for m = 2, ε = 1.
        let mk = |k: usize, base: usize| IntervalSets {
            interval: Interval::new(0, 1),
            guess: JobSet::new(),
            top: (base..base + k).map(JobId).collect(),
        };
        let a = LevelAssignment {
            levels: vec![vec![mk(0, 0)], vec![mk(5, 0)], vec![mk(3, 5)]],
            opt: Schedule::default(),
            horizon: 1,
        };
        assert_eq!(offset_buckets(&a, 2), vec![5, 3]);
        assert_eq!(best_offset(&a, 2, Eps::ONE).unwrap(), (1, 3));

        let empty = LevelAssignment {
            levels: vec![vec![mk(0, 0)]],
            opt: Schedule::default(),
            horizon: 1,
        };
        assert_eq!(best_offset(&empty, 2, Eps::ONE).unwrap(), (0, 0));
        assert!(best_offset(&empty, 2, Eps::new(2, 3).unwrap()).is_ok());
        assert!(best_offset(&empty, 3, Eps::new(2, 3).unwrap()).is_err());
    }
}
