//! Line-based text formats for instances and schedules.
//!
//! Instance:
//! ```text
//! jobs 3
//! machines 2
//! edge 0 1
//! edge 1 2
//! ```
//! Schedule:
//! ```text
//! makespan 3
//! job 0 0
//! job 1 1
//! ```
//! Lines starting with `#` and blank lines are ignored.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Instance, JobId, Schedule};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Significant lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            None
        } else {
            Some((i + 1, l.split_whitespace().collect()))
        }
    })
}

fn number(line: usize, tok: &str) -> Result<usize> {
    tok.parse().map_err(|_| {
        parse_err(
            line,
            format!("expected a non-negative integer, got `{tok}`"),
        )
    })
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut it = lines(text);

    let (l1, n) = header(&mut it, "jobs", 0)?;
    let (_, m) = header(&mut it, "machines", l1)?;
    if m == 0 {
        return Err(Error::BadMachineCount);
    }
    let mut edges = Vec::new();
    for (line, toks) in it {
        match toks.as_slice() {
            ["edge", u, v] => {
                let (u, v) = (number(line, u)?, number(line, v)?);
                for j in [u, v] {
                    if j >= n {
                        return Err(parse_err(line, format!("job {j} out of range (jobs {n})")));
                    }
                }
                edges.push((JobId(u), JobId(v)));
            }
            _ => return Err(parse_err(line, "expected `edge <u> <v>`")),
        }
    }
    Instance::new(n, m, &edges)
}

fn header<'a>(
    it: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
    key: &str,
    last_line: usize,
) -> Result<(usize, usize)> {
    let (line, toks) = it
        .next()
        .ok_or_else(|| parse_err(last_line + 1, format!("missing `{key}` line")))?;
    match toks.as_slice() {
        [k, v] if *k == key => Ok((line, number(line, v)?)),
        _ => Err(parse_err(line, format!("expected `{key} <count>`"))),
    }
}

/// Canonical text: every pair of the closed relation, sorted.
pub fn emit_instance(inst: &Instance) -> String {
    let mut out = format!("jobs {}\nmachines {}\n", inst.n(), inst.machines());
    for (a, b) in inst.prec().pairs() {
        writeln!(out, "edge {a} {b}").unwrap();
    }
    out
}

pub fn parse_schedule(text: &str) -> Result<Schedule> {
    let mut it = lines(text);
    let (_, horizon) = header(&mut it, "makespan", 0)?;
    let mut sched = Schedule::new(horizon);
    let mut seen = BTreeSet::new();
    for (line, toks) in it {
        match toks.as_slice() {
            ["job", j, t] => {
                let j = JobId(number(line, j)?);
                if !seen.insert(j) {
                    return Err(parse_err(line, format!("duplicate job {j}")));
                }
                sched.insert(j, number(line, t)?);
            }
            _ => return Err(parse_err(line, "expected `job <j> <t>`")),
        }
    }
    Ok(sched)
}

pub fn emit_schedule(sched: &Schedule) -> String {
    let mut out = format!("makespan {}\n", sched.horizon());
    for (j, t) in sched.iter() {
        writeln!(out, "job {j} {t}").unwrap();
    }
    out
}
