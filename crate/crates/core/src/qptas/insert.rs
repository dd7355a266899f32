use crate::error::{Error, Result};
use crate::model::{Instance, JobId, Schedule};

/// Puts each discarded job back, in ascending id order, into a freshly
/// inserted slot. The slot goes at the smallest `t` by which every scheduled
/// predecessor has finished and before which no scheduled successor starts;
/// jobs starting at or after `t` move right by one. Each insertion grows the
/// horizon by one.
pub fn insert_discarded(
    sched: &Schedule,
    discards: impl IntoIterator<Item = JobId>,
    inst: &Instance,
) -> Result<Schedule> {
    let mut out = sched.clone();
    let mut order: Vec<JobId> = discards.into_iter().collect();
    order.sort_unstable();
    order.dedup();
    for j in order {
        let t = inst
            .preds_of(j)
            .iter()
            .filter_map(|&p| out.start(p))
            .map(|s| s + 1)
            .max()
            .unwrap_or(0);
        let first_succ = inst.succs_of(j).iter().filter_map(|&s| out.start(s)).min();
        if first_succ.is_some_and(|s| s < t) || out.contains(j) {
            return Err(Error::NoSlot(j));
        }
        let shifted: Vec<(JobId, usize)> = out.iter().filter(|&(_, s)| s >= t).collect();
        for (k, s) in shifted {
            out.insert(k, s + 1);
        }
        out.insert(j, t);
        out.set_horizon(out.horizon() + 1);
    }
    Ok(out)
}
