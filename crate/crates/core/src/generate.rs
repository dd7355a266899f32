//! Seeded random instance generators.
//!
//! Randomness comes from ChaCha8 seeded with `seed` through
//! `SeedableRng::seed_from_u64`, drawn in a fixed order, so a spec always
//! yields the same instance.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Instance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    Antichain,
    Chain,
    /// `layers` rows of `width` jobs; each pair in consecutive rows is an
    /// edge with probability `edge_prob`.
    Layered {
        layers: usize,
        width: usize,
        edge_prob: f64,
    },
    /// A random permutation; each forward pair is an edge with probability
    /// `edge_prob`.
    RandomOrder {
        edge_prob: f64,
    },
    /// `depth × depth` grid, edges right and down.
    DiamondMesh {
        depth: usize,
    },
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GeneratorKind::Antichain => write!(f, "antichain"),
            GeneratorKind::Chain => write!(f, "chain"),
            GeneratorKind::Layered {
                layers,
                width,
                edge_prob,
            } => write!(f, "layered:{layers}:{width}:{edge_prob}"),
            GeneratorKind::RandomOrder { edge_prob } => write!(f, "random:{edge_prob}"),
            GeneratorKind::DiamondMesh { depth } => write!(f, "diamond:{depth}"),
        }
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    /// `antichain`, `chain`, `layered:L:W:P`, `random:P` or `diamond:D`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadSpec(format!("unknown generator `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| {
            parts
                .get(i)
                .ok_or_else(bad)?
                .parse::<usize>()
                .map_err(|_| bad())
        };
        let prob = |i: usize| {
            parts
                .get(i)
                .ok_or_else(bad)?
                .parse::<f64>()
                .map_err(|_| bad())
        };
        let kind = match (parts[0], parts.len()) {
            ("antichain", 1) => GeneratorKind::Antichain,
            ("chain", 1) => GeneratorKind::Chain,
            ("layered", 4) => GeneratorKind::Layered {
                layers: num(1)?,
                width: num(2)?,
                edge_prob: prob(3)?,
            },
            ("random", 2) => GeneratorKind::RandomOrder {
                edge_prob: prob(1)?,
            },
            ("diamond", 2) => GeneratorKind::DiamondMesh { depth: num(1)? },
            _ => return Err(bad()),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, m: usize, seed: u64) -> Self {
        GeneratorSpec { kind, n, m, seed }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadSpec(msg));
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        match self.kind {
            GeneratorKind::Layered {
                layers,
                width,
                edge_prob,
            } => {
                if layers * width != self.n {
                    return bad(format!(
                        "layered needs n = layers·width, got {} ≠ {layers}·{width}",
                        self.n
                    ));
                }
                check_prob(edge_prob)
            }
            GeneratorKind::RandomOrder { edge_prob } => check_prob(edge_prob),
            GeneratorKind::DiamondMesh { depth } if depth * depth != self.n => bad(format!(
                "diamond needs n = depth², got {} ≠ {depth}²",
                self.n
            )),
            _ => Ok(()),
        }
    }
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::BadSpec(format!(
            "edge probability {p} outside [0, 1]"
        )))
    }
}

/// Base edges before closure.
pub fn generate_edges(spec: &GeneratorSpec) -> Result<Vec<(usize, usize)>> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let mut edges = Vec::new();
    match spec.kind {
        GeneratorKind::Antichain => {}
        GeneratorKind::Chain => edges.extend((1..n).map(|j| (j - 1, j))),
        GeneratorKind::Layered {
            layers,
            width,
            edge_prob,
        } => {
            for l in 1..layers {
                for a in 0..width {
                    for b in 0..width {
                        if rng.gen_bool(edge_prob) {
                            edges.push(((l - 1) * width + a, l * width + b));
                        }
                    }
                }
            }
        }
        GeneratorKind::RandomOrder { edge_prob } => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            for i in 0..n {
                for k in i + 1..n {
                    if rng.gen_bool(edge_prob) {
                        edges.push((perm[i], perm[k]));
                    }
                }
            }
        }
        GeneratorKind::DiamondMesh { depth } => {
            for r in 0..depth {
                for c in 0..depth {
                    let id = r * depth + c;
                    if c + 1 < depth {
                        edges.push((id, id + 1));
                    }
                    if r + 1 < depth {
                        edges.push((id, id + depth));
                    }
                }
            }
        }
    }
    Ok(edges)
}

pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    Instance::from_edges(spec.n, spec.m, &generate_edges(spec)?)
}
