use std::ops::ControlFlow;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::laminar::{Interval, LaminarFamily, Pins};
use crate::model::{Instance, JobId};

use super::{GuessConfig, JobGuessing, PartitionMode, RecursionInput};

/// One branch of a call: jobs pinned to slots, a partition of the call
/// interval into cells, and the level offset it commits to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guess {
    pub pins: Vec<(JobId, usize)>,
    pub cells: Vec<Interval>,
    pub offset: Option<usize>,
}

/// All guesses of a call, in the order the solver tries them.
pub fn enumerate_guesses(
    inst: &Instance,
    horizon: usize,
    input: &RecursionInput,
    cfg: &GuessConfig,
) -> Result<Vec<Guess>> {
    let fam = LaminarFamily::build(horizon, inst.n(), cfg.eps)?;
    let e = Enumerator::new(inst, cfg, &fam)?;
    let mut out = Vec::new();
    let _ = e.visit(input, &mut |g| {
        out.push(g);
        ControlFlow::Continue(())
    });
    Ok(out)
}

pub(super) struct Enumerator<'a> {
    inst: &'a Instance,
    cfg: &'a GuessConfig,
    fam: &'a LaminarFamily,
    /// Offsets are counted modulo `m/ε` levels.
    period: usize,
    topo_pos: Vec<usize>,
}

type Visit<'f, T> = &'f mut dyn FnMut(T) -> ControlFlow<()>;
type PinVisit<'f> = &'f mut dyn FnMut(&[(JobId, usize)]) -> ControlFlow<()>;

impl<'a> Enumerator<'a> {
    pub(super) fn new(
        inst: &'a Instance,
        cfg: &'a GuessConfig,
        fam: &'a LaminarFamily,
    ) -> Result<Self> {
        let period = match cfg.eps.machines_over(inst.machines()) {
            Some(q) => q,
            None if cfg.partition_mode == PartitionMode::Exhaustive => 1,
            None => {
                return Err(Error::BadEps(format!(
                    "m/ε = {}/{} must be an integer in laminar mode",
                    inst.machines(),
                    cfg.eps
                )))
            }
        };
        let mut topo_pos = vec![0; inst.n()];
        for (i, j) in inst.topological_order().iter().enumerate() {
            topo_pos[j.index()] = i;
        }
        Ok(Enumerator {
            inst,
            cfg,
            fam,
            period,
            topo_pos,
        })
    }

    /// Feeds guesses to `f` until it breaks. Order: offset, then job guess,
    /// then partition.
    pub(super) fn visit(&self, input: &RecursionInput, f: Visit<'_, Guess>) -> ControlFlow<()> {
        let offsets: Vec<Option<usize>> =
            match (self.cfg.partition_mode, input.offset.or(self.cfg.offset)) {
                (_, Some(a)) => vec![Some(a)],
                (PartitionMode::Laminar, None) if input.depth == 0 => {
                    (0..self.period).map(Some).collect()
                }
                (PartitionMode::Laminar, None) => vec![Some(0)],
                (PartitionMode::Exhaustive, None) => vec![None],
            };
        for offset in offsets {
            self.visit_jobs(input, offset, &mut |pins| {
                self.visit_partitions(input, offset, &mut |cells| {
                    f(Guess {
                        pins: pins.to_vec(),
                        cells,
                        offset,
                    })
                })
            })?;
        }
        ControlFlow::Continue(())
    }

    /// Level the laminar partition of this call cuts at: `a + r·m/ε + 1` at
    /// depth `r`, strictly below the call's own level and at most the leaf.
    pub(super) fn partition_level(
        &self,
        iv: Interval,
        depth: usize,
        offset: usize,
    ) -> Option<usize> {
        let own = self.fam.level_of(iv)?;
        let leaf = self.fam.leaf_level();
        Some((offset + depth * self.period + 1).max(own + 1).min(leaf))
    }

    fn visit_partitions(
        &self,
        input: &RecursionInput,
        offset: Option<usize>,
        f: Visit<'_, Vec<Interval>>,
    ) -> ControlFlow<()> {
        let iv = input.interval;
        match self.cfg.partition_mode {
            PartitionMode::Laminar => {
                let level = self
                    .partition_level(iv, input.depth, offset.unwrap_or(0))
                    .expect("laminar calls run on family intervals");
                f(self.fam.cells_within(iv, level))
            }
            PartitionMode::Exhaustive => {
                let most = self
                    .cfg
                    .max_cells
                    .unwrap_or(self.cfg.k_max.max(1))
                    .clamp(1, iv.len().max(1));
                for parts in 1..=most {
                    let mut cuts = Vec::with_capacity(parts + 1);
                    cuts.push(iv.start);
                    compositions(iv.start, iv.end, parts, &mut cuts, f)?;
                }
                ControlFlow::Continue(())
            }
        }
    }

    fn visit_jobs(
        &self,
        input: &RecursionInput,
        offset: Option<usize>,
        f: PinVisit<'_>,
    ) -> ControlFlow<()> {
        let k = self.cfg.k_max.min(input.jobs.len());
        match &self.cfg.job_guessing {
            JobGuessing::Nothing => f(&[]),
            JobGuessing::Exhaustive => {
                let base = self.base_load(input);
                for size in (0..=k).rev() {
                    let mut idx: Vec<usize> = (0..size).collect();
                    loop {
                        let mut subset: Vec<JobId> = idx.iter().map(|&i| input.jobs[i]).collect();
                        subset.sort_by_key(|j| self.topo_pos[j.index()]);
                        let mut load = base.clone();
                        let mut chosen = Vec::with_capacity(size);
                        self.assign_slots(input, &subset, &mut load, &mut chosen, f)?;
                        if !next_combination(&mut idx, input.jobs.len()) {
                            break;
                        }
                    }
                }
                ControlFlow::Continue(())
            }
            JobGuessing::Reference(assign) => {
                let levels = offset
                    .and_then(|a| {
                        let own = self.fam.level_of(input.interval)?;
                        let cut = self.partition_level(input.interval, input.depth, a)?;
                        Some(own..=cut - 1)
                    })
                    .unwrap_or(0..=self.fam.leaf_level());
                let mut pins: Vec<(JobId, usize)> = assign
                    .guesses_in(levels, input.interval)
                    .into_iter()
                    .filter(|(j, _)| input.jobs.binary_search(j).is_ok())
                    .collect();
                pins.truncate(k);
                f(&pins)
            }
            JobGuessing::Sampled { samples, seed } => {
                f(&[])?;
                if k == 0 {
                    return ControlFlow::Continue(());
                }
                let mix = (input.depth as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    ^ (input.interval.start as u64).rotate_left(32);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ mix);
                let base = self.base_load(input);
                for _ in 0..*samples {
                    let size = rng.gen_range(1..=k);
                    let mut subset: Vec<JobId> = index::sample(&mut rng, input.jobs.len(), size)
                        .into_iter()
                        .map(|i| input.jobs[i])
                        .collect();
                    subset.sort_by_key(|j| self.topo_pos[j.index()]);
                    let mut load = base.clone();
                    let mut chosen = Vec::with_capacity(size);
                    for j in subset {
                        let (lo, hi) = self.slot_range(input, j, &chosen);
                        let free: Vec<usize> = (lo..hi)
                            .filter(|&t| load[t - input.interval.start] < self.inst.machines())
                            .collect();
                        if free.is_empty() {
                            continue;
                        }
                        let t = free[rng.gen_range(0..free.len())];
                        load[t - input.interval.start] += 1;
                        chosen.push((j, t));
                    }
                    f(&chosen)?;
                }
                ControlFlow::Continue(())
            }
        }
    }

    /// Per-slot load of the call interval from pins made by enclosing calls.
    fn base_load(&self, input: &RecursionInput) -> Vec<usize> {
        let iv = input.interval;
        let mut load = vec![0; iv.len()];
        for (_, t) in input.pins.iter() {
            if iv.contains(t) {
                load[t - iv.start] += 1;
            }
        }
        load
    }

    /// Slots where `j` may be pinned given old pins and the jobs chosen so far.
    fn slot_range(
        &self,
        input: &RecursionInput,
        j: JobId,
        chosen: &[(JobId, usize)],
    ) -> (usize, usize) {
        let slot = |p: JobId, pins: &Pins| {
            pins.get(p)
                .or_else(|| chosen.iter().find(|c| c.0 == p).map(|c| c.1))
        };
        let lo = self
            .inst
            .preds_of(j)
            .iter()
            .filter_map(|&p| slot(p, &input.pins))
            .map(|t| t + 1)
            .fold(input.interval.start, usize::max);
        let hi = self
            .inst
            .succs_of(j)
            .iter()
            .filter_map(|&s| slot(s, &input.pins))
            .fold(input.interval.end, usize::min);
        (lo, hi.max(lo))
    }

    fn assign_slots(
        &self,
        input: &RecursionInput,
        subset: &[JobId],
        load: &mut [usize],
        chosen: &mut Vec<(JobId, usize)>,
        f: PinVisit<'_>,
    ) -> ControlFlow<()> {
        let Some(&j) = subset.get(chosen.len()) else {
            let mut pins = chosen.clone();
            pins.sort();
            return f(&pins);
        };
        let (lo, hi) = self.slot_range(input, j, chosen);
        let start = input.interval.start;
        for t in lo..hi {
            if load[t - start] >= self.inst.machines() {
                continue;
            }
            load[t - start] += 1;
            chosen.push((j, t));
            let flow = self.assign_slots(input, subset, load, chosen, f);
            chosen.pop();
            load[t - start] -= 1;
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// Advances `idx` to the next `idx.len()`-subset of `[0, n)` in lex order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for l in i + 1..k {
                idx[l] = idx[l - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Splits `[cuts.last(), end)` into `parts` non-empty cells, cut points in
/// lex order.
fn compositions(
    from: usize,
    end: usize,
    parts: usize,
    cuts: &mut Vec<usize>,
    f: Visit<'_, Vec<Interval>>,
) -> ControlFlow<()> {
    if parts == 1 {
        cuts.push(end);
        let cells = cuts.windows(2).map(|w| Interval::new(w[0], w[1])).collect();
        cuts.pop();
        return f(cells);
    }
    for cut in from + 1..=end - (parts - 1) {
        cuts.push(cut);
        let flow = compositions(cut, end, parts - 1, cuts, f);
        cuts.pop();
        flow?;
    }
    ControlFlow::Continue(())
}
