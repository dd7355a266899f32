//! Greedy list scheduling and the Coffman–Graham labelling.

use crate::error::{Error, Result};
use crate::model::{Instance, JobId, Schedule};

/// A priority list: a permutation of `[0, n)`, highest priority first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityOrder(Vec<JobId>);

impl PriorityOrder {
    pub fn new(perm: Vec<JobId>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for j in &perm {
            match seen.get_mut(j.index()) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::BadOrder(format!("{j} repeated or out of range"))),
            }
        }
        Ok(PriorityOrder(perm))
    }

    pub fn identity(n: usize) -> Self {
        PriorityOrder((0..n).map(JobId).collect())
    }

    pub fn as_slice(&self) -> &[JobId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Graham's list scheduling. At each slot `t`, up to `m` eligible jobs (all
/// predecessors finished by `t`) start, in list order.
///
/// # Panics
/// If `order` does not cover exactly the jobs of `inst`.
pub fn list_schedule(inst: &Instance, order: &PriorityOrder) -> Schedule {
    assert_eq!(order.len(), inst.n(), "priority order must cover every job");
    let n = inst.n();
    let m = inst.machines();
    // rank[j] = position of j in the list
    let mut rank = vec![0usize; n];
    for (r, j) in order.as_slice().iter().enumerate() {
        rank[j.index()] = r;
    }
    let mut start: Vec<Option<usize>> = vec![None; n];
    let mut waiting: Vec<usize> = inst.jobs().map(|j| inst.preds_of(j).len()).collect();
    let mut ready: Vec<JobId> = inst.jobs().filter(|j| waiting[j.index()] == 0).collect();
    let mut done = 0;
    let mut t = 0;
    while done < n {
        ready.sort_by_key(|j| rank[j.index()]);
        let take = ready.len().min(m);
        let batch: Vec<JobId> = ready.drain(..take).collect();
        for &j in &batch {
            start[j.index()] = Some(t);
        }
        done += batch.len();
        // Successors become eligible at t + 1.
        for &j in &batch {
            for &s in inst.succs_of(j) {
                waiting[s.index()] -= 1;
                if waiting[s.index()] == 0 {
                    ready.push(s);
                }
            }
        }
        t += 1;
    }
    Schedule::from_starts(
        start
            .into_iter()
            .enumerate()
            .map(|(j, t)| (JobId(j), t.expect("every job scheduled"))),
    )
}

/// Coffman–Graham labels, indexed by job id, using values `1..=n`.
///
/// Repeatedly labels, among unlabelled jobs whose immediate successors are
/// all labelled, the one whose successor labels (sorted decreasingly) form
/// the lexicographically smallest sequence; ties go to the smaller id.
pub fn coffman_graham_labels(inst: &Instance) -> Vec<usize> {
    let n = inst.n();
    let succ: Vec<Vec<JobId>> = inst.jobs().map(|j| inst.immediate_successors(j)).collect();
    let mut label = vec![0usize; n];
    for next in 1..=n {
        let mut best: Option<(Vec<usize>, JobId)> = None;
        for j in inst.jobs() {
            if label[j.index()] != 0 || succ[j.index()].iter().any(|s| label[s.index()] == 0) {
                continue;
            }
            let mut key: Vec<usize> = succ[j.index()].iter().map(|s| label[s.index()]).collect();
            key.sort_unstable_by(|a, b| b.cmp(a));
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, j));
            }
        }
        let (_, j) = best.expect("a labellable job exists in a DAG");
        label[j.index()] = next;
    }
    label
}

/// List schedule in decreasing Coffman–Graham label order.
pub fn coffman_graham_schedule(inst: &Instance) -> Schedule {
    let label = coffman_graham_labels(inst);
    let mut perm: Vec<JobId> = inst.jobs().collect();
    perm.sort_by_key(|j| std::cmp::Reverse(label[j.index()]));
    list_schedule(inst, &PriorityOrder(perm))
}
