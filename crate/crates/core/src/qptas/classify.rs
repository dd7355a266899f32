use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::laminar::{feasible_window, Interval, Pins};
use crate::model::{Instance, JobId};

use super::edf::TopWindow;

/// Split of a call's jobs by the guessed partition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Classification {
    /// Per cell, the non-pinned jobs whose window lies inside it.
    pub bottom: Vec<Vec<JobId>>,
    /// Per cell, the newly pinned jobs whose slot lies inside it.
    pub pinned: Vec<Vec<JobId>>,
    /// Non-pinned jobs whose window meets two or more cells.
    pub top: Vec<JobId>,
}

/// Classifies `jobs` under `pins` (old and new guesses together). `cells`
/// must be non-empty and tile the call interval in order; windows are
/// clipped to that interval. An empty window means the guess is
/// inconsistent and is reported as an error.
pub fn classify(
    inst: &Instance,
    jobs: &[JobId],
    pins: &Pins,
    cells: &[Interval],
) -> Result<Classification> {
    let (start, end) = (cells[0].start, cells[cells.len() - 1].end);
    let mut c = Classification {
        bottom: vec![Vec::new(); cells.len()],
        pinned: vec![Vec::new(); cells.len()],
        top: Vec::new(),
    };
    let cell_of = |t: usize| cells.partition_point(|iv| iv.end <= t);
    for &j in jobs {
        if let Some(t) = pins.get(j) {
            c.pinned[cell_of(t)].push(j);
            continue;
        }
        let w = feasible_window(inst, j, pins, end)?;
        let lo = w.lo.max(start);
        if lo >= w.hi {
            return Err(Error::EmptyWindow {
                job: j,
                lo,
                hi: w.hi,
            });
        }
        let k = cell_of(lo);
        if k < cells.len() && w.hi <= cells[k].end {
            c.bottom[k].push(j);
        } else {
            c.top.push(j);
        }
    }
    Ok(c)
}

/// Release and deadline of each top job, snapped to cell boundaries:
/// `r` is the earliest boundary at or after the completion of every placed
/// predecessor, `d` the latest boundary at or before the start of every
/// placed successor. Without such neighbours they default to the interval
/// ends. When a placed predecessor and successor leave no boundary between
/// them, `d` is raised to `r` and the job is degenerate.
pub fn windows_for_top(
    inst: &Instance,
    top: &[JobId],
    cells: &[Interval],
    interval: Interval,
    placed: &BTreeMap<JobId, usize>,
) -> Vec<TopWindow> {
    let mut bounds: Vec<usize> = cells.iter().map(|c| c.start).collect();
    bounds.push(interval.end);
    top.iter()
        .map(|&j| {
            let done = inst
                .preds_of(j)
                .iter()
                .filter_map(|p| placed.get(p))
                .map(|&t| t + 1)
                .max()
                .unwrap_or(interval.start);
            let first = inst
                .succs_of(j)
                .iter()
                .filter_map(|s| placed.get(s))
                .copied()
                .min()
                .unwrap_or(interval.end);
            let r = bounds
                .iter()
                .copied()
                .find(|&b| b >= done)
                .unwrap_or(interval.end);
            let d = bounds
                .iter()
                .rev()
                .copied()
                .find(|&b| b <= first)
                .unwrap_or(interval.start);
            TopWindow {
                job: j,
                r,
                d: d.max(r),
            }
        })
        .collect()
}
