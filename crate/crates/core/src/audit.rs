//! Empirical checks of the quantities the approximation analysis bounds,
//! run on instances whose optimum the exact solver knows.
//!
//! Contractual checks hold on every instance; advisory checks compare
//! against bounds proved only for the full guess budget and are recorded
//! rather than enforced.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::eps::Eps;
use crate::error::{Error, Result};
use crate::laminar::{best_offset, offset_buckets, LaminarFamily, LevelAssignment};
use crate::model::{Instance, JobId, JobSet, Schedule};
use crate::oracle;
use crate::params::{self, ChainThreshold};
use crate::qptas::{self, CallTrace, EdfTrace, GuessConfig, JobGuessing, TopWindow};

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub name: String,
    pub instance: String,
    /// Number of items checked.
    pub population: usize,
    pub violations: usize,
    /// Worst observed value of the audited quantity.
    pub worst: f64,
    /// Bound evaluated at the instance's parameters.
    pub bound: f64,
}

impl AuditReport {
    fn new(name: &str) -> Self {
        AuditReport {
            name: name.to_string(),
            instance: String::new(),
            population: 0,
            violations: 0,
            worst: 0.0,
            bound: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Folds `other` into `self`: sums populations and violations, keeps the
    /// worst value relative to its bound.
    pub fn merge(&mut self, other: &AuditReport) {
        if self.population == 0 || other.worst - other.bound > self.worst - self.bound {
            self.worst = other.worst;
            self.bound = other.bound;
        }
        self.population += other.population;
        self.violations += other.violations;
    }
}

/// Every job of `0..n` lies in exactly one guess or top set.
pub fn check_unique_level(assign: &LevelAssignment, n: usize) -> AuditReport {
    let mut count = vec![0usize; n];
    let mut stray = 0;
    for sets in assign.levels.iter().flatten() {
        for j in sets.guess.iter().chain(sets.top.iter()) {
            match count.get_mut(j.index()) {
                Some(c) => *c += 1,
                None => stray += 1,
            }
        }
    }
    let mut r = AuditReport::new("unique_level");
    r.population = n;
    r.violations = count.iter().filter(|&&c| c != 1).count() + stray;
    r.worst = count.iter().copied().max().unwrap_or(0) as f64;
    r.bound = 1.0;
    r
}

/// The smallest offset bucket of top jobs holds at most `εT` jobs, and the
/// buckets are disjoint.
pub fn check_shift_bound(
    assign: &LevelAssignment,
    m: usize,
    eps: Eps,
    horizon: usize,
) -> Result<AuditReport> {
    let (_, smallest) = best_offset(assign, m, eps)?;
    let q = eps.machines_over(m).expect("checked by best_offset");
    let buckets = offset_buckets(assign, q);
    let mut below_root = JobSet::new();
    for l in 1..assign.num_levels() {
        below_root.extend(assign.top_at(l));
    }
    let bound = eps.as_f64() * horizon as f64;
    let mut r = AuditReport::new("shift_bound");
    r.population = q;
    r.worst = smallest as f64;
    r.bound = bound;
    r.violations = usize::from(smallest as f64 > bound + 1e-9)
        + usize::from(buckets.iter().sum::<usize>() > below_root.len());
    Ok(r)
}

/// The reference start of every windowed job lies in `[r − λ, d + λ)`.
/// `pins` must agree with `opt`.
pub fn check_window_slack(
    opt: &Schedule,
    pins: &[(JobId, usize)],
    windows: &[TopWindow],
    lambda: usize,
) -> Result<AuditReport> {
    for &(j, t) in pins {
        if opt.start(j) != Some(t) {
            return Err(Error::PreconditionUnmet(format!(
                "{j} pinned at {t} but the reference has it elsewhere"
            )));
        }
    }
    let mut r = AuditReport::new("window_slack");
    for w in windows {
        let Some(s) = opt.start(w.job) else {
            return Err(Error::PreconditionUnmet(format!(
                "{} has no reference slot",
                w.job
            )));
        };
        let lo = w.r.saturating_sub(lambda);
        let hi = w.d + lambda;
        let miss = if s < lo {
            lo - s
        } else if s >= hi {
            s + 1 - hi
        } else {
            0
        };
        r.population += 1;
        r.violations += usize::from(miss > 0);
        r.worst = r.worst.max(miss as f64);
    }
    Ok(r)
}

/// Degenerate windows against `2 m ε |Ī| / log n`.
pub fn count_degenerate(
    windows: &[TopWindow],
    m: usize,
    eps: Eps,
    n: usize,
    interval_len: usize,
) -> AuditReport {
    let count = windows.iter().filter(|w| w.is_degenerate()).count();
    let bound = params::degenerate_bound(m, eps, interval_len, n);
    let mut r = AuditReport::new("degenerate");
    r.population = windows.len();
    r.worst = count as f64;
    r.bound = bound;
    r.violations = usize::from(count as f64 > bound + 1e-9);
    r
}

/// Maximal runs of slots `[start, end)` at which some top job is pending.
pub fn meta_intervals(trace: &EdfTrace) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    for s in &trace.slots {
        match (open, s.pending.is_empty()) {
            (None, false) => open = Some(s.t),
            (Some(a), true) => {
                out.push((a, s.t));
                open = None;
            }
            _ => {}
        }
    }
    if let (Some(a), Some(last)) = (open, trace.slots.last()) {
        out.push((a, last.t + 1));
    }
    out
}

/// Slots inside each meta-interval where a machine idles while a released
/// top job is left waiting, against `|Î| ε / (m log n)`.
pub fn audit_idle_slots(trace: &EdfTrace, m: usize, eps: Eps, n: usize) -> AuditReport {
    let mut r = AuditReport::new("idle_slots");
    let mut first = true;
    for (a, b) in meta_intervals(trace) {
        let idle = trace
            .slots
            .iter()
            .filter(|s| a <= s.t && s.t < b && s.idle > 0 && s.pending.len() > s.placed.len())
            .count();
        let bound = params::idle_slot_bound(b - a, m, eps, n);
        r.population += 1;
        r.violations += usize::from(idle as f64 > bound + 1e-9);
        if first || idle as f64 - bound > r.worst - r.bound {
            r.worst = idle as f64;
            r.bound = bound;
            first = false;
        }
    }
    r
}

/// Level count of the family against `log n / log(log n / ε) + 1`.
pub fn check_level_count(fam: &LaminarFamily, n: usize, eps: Eps) -> AuditReport {
    let bound = params::level_count_bound(n, eps);
    let levels = fam.num_levels();
    let mut r = AuditReport::new("level_count");
    r.population = 1;
    r.worst = levels as f64;
    r.bound = bound;
    r.violations = usize::from(levels as f64 > bound + 1e-9);
    r
}

/// Depth cap used by the solver next to the analysis' recursion bound;
/// informational only.
pub fn depth_parameters(n: usize, m: usize, eps: Eps) -> AuditReport {
    let mut r = AuditReport::new("depth_cap");
    r.population = 1;
    r.worst = params::default_depth_max(n, m, eps) as f64;
    r.bound = params::r_max(n, m, eps).map_or(f64::INFINITY, |x| x as f64);
    r
}

/// Settings of an audit run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditConfig {
    pub eps: Eps,
    /// Guess cap per call of the reference run.
    pub k_max: usize,
    pub threshold: ChainThreshold,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            eps: Eps::ONE,
            k_max: 4,
            threshold: ChainThreshold::PerMachine,
        }
    }
}

/// Everything the audits need from one instance.
#[derive(Debug, Clone)]
pub struct ReferenceRun {
    pub padded: Instance,
    pub horizon: usize,
    pub opt: Schedule,
    pub family: LaminarFamily,
    pub assign: Arc<LevelAssignment>,
    pub offset: usize,
    pub trace: Vec<CallTrace>,
}

/// Solves `inst` exactly, pads it, assigns levels against the padded optimum
/// and runs the scheme with reference guesses at the best offset.
pub fn reference_run(inst: &Instance, cfg: &AuditConfig) -> Result<ReferenceRun> {
    let opt = oracle::optimal_schedule(inst)?;
    let (padded, horizon, popt) = qptas::pad_schedule(inst, &opt, opt.makespan())?;
    let family = LaminarFamily::build(horizon, padded.n(), cfg.eps)?;
    let assign = Arc::new(crate::laminar::assign_levels(
        &padded,
        &popt,
        &family,
        cfg.eps,
        cfg.threshold,
    ));
    let (offset, _) = best_offset(&assign, padded.machines(), cfg.eps)?;
    let gcfg = GuessConfig {
        k_max: cfg.k_max,
        job_guessing: JobGuessing::Reference(Arc::clone(&assign)),
        offset: Some(offset),
        record_trace: true,
        ..GuessConfig::new(cfg.eps).with_default_depth(padded.n(), padded.machines())
    };
    let solved = qptas::solve(&padded, horizon, &gcfg)?;
    Ok(ReferenceRun {
        padded,
        horizon,
        opt: popt,
        family,
        assign,
        offset,
        trace: solved.trace,
    })
}

/// All audits of one reference run, one report per claim.
pub fn audit_run(name: &str, run: &ReferenceRun, eps: Eps) -> Result<Vec<AuditReport>> {
    let n = run.padded.n();
    let m = run.padded.machines();
    let mut slack = AuditReport::new("window_slack");
    let mut degenerate = AuditReport::new("degenerate");
    let mut idle = AuditReport::new("idle_slots");
    // Pins of enclosing calls are pins of this one too.
    let mut pinned: BTreeMap<JobId, usize> = BTreeMap::new();
    for call in &run.trace {
        pinned.extend(call.pinned.iter().copied());
        let lambda = call.cells.iter().map(|c| c.len()).max().unwrap_or(1);
        let pins: Vec<_> = pinned.iter().map(|(&j, &t)| (j, t)).collect();
        slack.merge(&check_window_slack(&run.opt, &pins, &call.windows, lambda)?);
        degenerate.merge(&count_degenerate(
            &call.windows,
            m,
            eps,
            n,
            call.interval.len(),
        ));
        idle.merge(&audit_idle_slots(&call.edf, m, eps, n));
    }
    let mut out = vec![
        check_unique_level(&run.assign, n),
        check_shift_bound(&run.assign, m, eps, run.horizon)?,
        slack,
        check_level_count(&run.family, n, eps),
        degenerate,
        idle,
        depth_parameters(n, m, eps),
    ];
    for r in &mut out {
        r.instance = name.to_string();
    }
    Ok(out)
}

pub fn is_contractual(claim: &str) -> bool {
    matches!(
        claim,
        "unique_level" | "shift_bound" | "window_slack" | "level_count"
    )
}

pub fn is_advisory(claim: &str) -> bool {
    matches!(claim, "degenerate" | "idle_slots")
}

/// Writes reports as CSV with columns
/// `claim,instance,population,violations,observed,bound`.
pub fn write_csv<W: std::io::Write>(out: W, reports: &[AuditReport]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "claim",
        "instance",
        "population",
        "violations",
        "observed",
        "bound",
    ])?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            r.instance.clone(),
            r.population.to_string(),
            r.violations.to_string(),
            fmt_num(r.worst),
            fmt_num(r.bound),
        ])?;
    }
    w.flush()
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.4}")
    }
}
