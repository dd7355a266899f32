use std::collections::BTreeMap;

use crate::laminar::Interval;
use crate::model::{Instance, JobId};

/// Release slot `r` and deadline `d` of a top job; it may start in `[r, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopWindow {
    pub job: JobId,
    pub r: usize,
    pub d: usize,
}

impl TopWindow {
    pub fn is_degenerate(&self) -> bool {
        self.r >= self.d
    }
}

/// What happened in one slot of the sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotTrace {
    pub t: usize,
    /// Units already taken by recursion-placed jobs.
    pub preloaded: usize,
    /// Non-degenerate top jobs released by `t`, neither placed nor discarded
    /// when the slot begins.
    pub pending: Vec<JobId>,
    pub placed: Vec<JobId>,
    /// Free machine units left after filling.
    pub idle: usize,
    /// Jobs that were eligible but did not fit.
    pub eligible_left: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdfTrace {
    pub interval: Option<Interval>,
    pub slots: Vec<SlotTrace>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdfOutcome {
    pub placements: BTreeMap<JobId, usize>,
    /// Jobs that reached their deadline unplaced.
    pub missed: Vec<JobId>,
    /// Jobs with `r = d`, dropped before the sweep.
    pub degenerate: Vec<JobId>,
    pub trace: EdfTrace,
}

impl EdfOutcome {
    pub fn discards(&self) -> impl Iterator<Item = JobId> + '_ {
        self.degenerate.iter().chain(self.missed.iter()).copied()
    }
}

/// Earliest-deadline-first sweep over `interval`.
///
/// At slot `t` the eligible jobs are unplaced tops with `r ≤ t` whose placed
/// predecessors (`placed`, from recursion) and top predecessors have all
/// finished by `t`. They fill the `m − load[t]` free units in `(d, id)` order.
/// A top job still unplaced when `t` reaches its deadline is discarded, and a
/// discarded top job no longer holds back its successors.
///
/// `load` is indexed by absolute slot and must cover `interval`.
pub fn edf_insert(
    tops: &[TopWindow],
    load: &[usize],
    placed: &BTreeMap<JobId, usize>,
    inst: &Instance,
    interval: Interval,
) -> EdfOutcome {
    let m = inst.machines();
    let mut out = EdfOutcome {
        trace: EdfTrace {
            interval: Some(interval),
            slots: Vec::with_capacity(interval.len()),
        },
        ..Default::default()
    };

    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Waiting,
        Placed(usize),
        Dropped,
    }
    let mut state: BTreeMap<JobId, State> = BTreeMap::new();
    let mut live: Vec<TopWindow> = Vec::new();
    for w in tops {
        if w.is_degenerate() {
            out.degenerate.push(w.job);
            state.insert(w.job, State::Dropped);
        } else {
            state.insert(w.job, State::Waiting);
            live.push(*w);
        }
    }
    live.sort_by_key(|w| (w.d, w.job));

    #[allow(clippy::needless_range_loop)]
    for t in interval.start..interval.end {
        for w in &live {
            if state[&w.job] == State::Waiting && w.d <= t {
                state.insert(w.job, State::Dropped);
                out.missed.push(w.job);
            }
        }
        let pending: Vec<JobId> = live
            .iter()
            .filter(|w| w.r <= t && state[&w.job] == State::Waiting)
            .map(|w| w.job)
            .collect();

        let ready = |j: JobId, state: &BTreeMap<JobId, State>| {
            inst.preds_of(j).iter().all(|p| match state.get(p) {
                Some(State::Placed(s)) => *s < t,
                Some(State::Waiting) => false,
                Some(State::Dropped) => true,
                None => placed.get(p).is_none_or(|&s| s < t),
            })
        };
        let eligible: Vec<JobId> = live
            .iter()
            .filter(|w| w.r <= t && state[&w.job] == State::Waiting && ready(w.job, &state))
            .map(|w| w.job)
            .collect();

        let preloaded = load[t];
        let free = m.saturating_sub(preloaded);
        let take = eligible.len().min(free);
        for &j in &eligible[..take] {
            state.insert(j, State::Placed(t));
            out.placements.insert(j, t);
        }
        out.trace.slots.push(SlotTrace {
            t,
            preloaded,
            pending,
            placed: eligible[..take].to_vec(),
            idle: free - take,
            eligible_left: eligible.len() - take,
        });
    }
    for w in &live {
        if state[&w.job] == State::Waiting {
            out.missed.push(w.job);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win(job: usize, r: usize, d: usize) -> TopWindow {
        TopWindow {
            job: JobId(job),
            r,
            d,
        }
    }

    #[test]
    fn single_job_goes_first() {
        let inst = Instance::from_edges(1, 1, &[]).unwrap();
        let o = edf_insert(
            &[win(0, 0, 4)],
            &[0; 4],
            &BTreeMap::new(),
            &inst,
            Interval::new(0, 4),
        );
        assert_eq!(o.placements[&JobId(0)], 0);
        assert!(o.missed.is_empty());
    }

    #[test]
    fn deadline_order() {
        let inst = Instance::from_edges(2, 1, &[]).unwrap();
        let o = edf_insert(
            &[win(1, 0, 2), win(0, 0, 1)],
            &[0; 2],
            &BTreeMap::new(),
            &inst,
            Interval::new(0, 2),
        );
        assert_eq!(o.placements[&JobId(0)], 0);
        assert_eq!(o.placements[&JobId(1)], 1);
    }

    #[test]
    fn capacity_forces_a_miss() {
        let inst = Instance::from_edges(2, 1, &[]).unwrap();
        let o = edf_insert(
            &[win(0, 0, 1), win(1, 0, 1)],
            &[0; 2],
            &BTreeMap::new(),
            &inst,
            Interval::new(0, 2),
        );
        assert_eq!(o.placements.len(), 1);
        assert_eq!(o.placements[&JobId(0)], 0);
        assert_eq!(o.missed, vec![JobId(1)]);
    }

    #[test]
    fn degenerate_and_preload() {
        let inst = Instance::from_edges(3, 2, &[]).unwrap();
        let o = edf_insert(
            &[win(0, 2, 2), win(1, 0, 2), win(2, 0, 2)],
            &[1, 2],
            &BTreeMap::new(),
            &inst,
            Interval::new(0, 2),
        );
        assert_eq!(o.degenerate, vec![JobId(0)]);
        assert_eq!(o.placements.len(), 1);
        assert_eq!(o.missed, vec![JobId(2)]);
    }

    #[test]
    fn top_predecessors_hold_back_successors() {
        let inst = Instance::from_edges(2, 2, &[(0, 1)]).unwrap();
        let o = edf_insert(
            &[win(0, 0, 3), win(1, 0, 3)],
            &[0; 3],
            &BTreeMap::new(),
            &inst,
            Interval::new(0, 3),
        );
        assert_eq!(o.placements[&JobId(0)], 0);
        assert_eq!(o.placements[&JobId(1)], 1);
        // Slot 0 idles one unit while job 1 waits on its predecessor.
        assert_eq!(o.trace.slots[0].idle, 1);
        assert_eq!(o.trace.slots[0].eligible_left, 0);
        assert_eq!(o.trace.slots[0].pending, vec![JobId(0), JobId(1)]);
    }
}
