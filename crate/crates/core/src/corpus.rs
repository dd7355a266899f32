//! The standard corpus and corpus directories.
//!
//! A corpus directory holds one instance per `*.inst` file; instances are
//! named by file stem and visited in name order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::generate::{generate, GeneratorKind, GeneratorSpec};
use crate::io::{emit_instance, parse_instance};
use crate::model::Instance;

pub const EXTENSION: &str = "inst";

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub instance: Instance,
}

/// Small instances of every generator family on one to three machines,
/// all within reach of the exact solver. Sorted by name.
pub fn standard_corpus() -> Vec<CorpusEntry> {
    use GeneratorKind::*;
    let layered = |layers, width, edge_prob| Layered {
        layers,
        width,
        edge_prob,
    };
    let specs: Vec<(GeneratorKind, usize, usize, u64)> = vec![
        (Antichain, 5, 2, 0),
        (Antichain, 7, 3, 0),
        (Antichain, 8, 2, 0),
        (Chain, 5, 2, 0),
        (Chain, 6, 1, 0),
        (DiamondMesh { depth: 2 }, 4, 2, 0),
        (DiamondMesh { depth: 3 }, 9, 2, 0),
        (DiamondMesh { depth: 3 }, 9, 3, 0),
        (layered(2, 3, 0.6), 6, 2, 1),
        (layered(2, 4, 0.7), 8, 1, 2),
        (layered(3, 3, 0.5), 9, 2, 3),
        (layered(3, 3, 0.5), 9, 3, 4),
        (layered(4, 3, 0.5), 12, 2, 5),
        (layered(3, 4, 0.4), 12, 3, 6),
        (layered(4, 4, 0.3), 16, 2, 7),
        (RandomOrder { edge_prob: 0.3 }, 7, 2, 11),
        (RandomOrder { edge_prob: 0.4 }, 9, 1, 12),
        (RandomOrder { edge_prob: 0.25 }, 9, 2, 13),
        (RandomOrder { edge_prob: 0.2 }, 10, 3, 14),
        (RandomOrder { edge_prob: 0.25 }, 12, 2, 15),
        (RandomOrder { edge_prob: 0.15 }, 14, 3, 16),
        (RandomOrder { edge_prob: 0.2 }, 16, 2, 17),
    ];
    let mut out: Vec<CorpusEntry> = specs
        .into_iter()
        .map(|(kind, n, m, seed)| {
            let spec = GeneratorSpec::new(kind, n, m, seed);
            CorpusEntry {
                name: entry_name(&spec),
                instance: generate(&spec).expect("standard specs are valid"),
            }
        })
        .collect();
    // A chain of three next to three free jobs on two machines: list order
    // decides whether the chain starts late.
    out.push(CorpusEntry {
        name: "graham-n6-m2".into(),
        instance: Instance::from_edges(6, 2, &[(3, 4), (4, 5)]).expect("valid"),
    });
    out.sort_by(|a, b| a.name.cmp(&b.name));
    out
}

fn entry_name(spec: &GeneratorSpec) -> String {
    let kind = match spec.kind {
        GeneratorKind::Antichain => "antichain".to_string(),
        GeneratorKind::Chain => "chain".to_string(),
        GeneratorKind::Layered { layers, width, .. } => format!("layered{layers}x{width}"),
        GeneratorKind::RandomOrder { .. } => "random".to_string(),
        GeneratorKind::DiamondMesh { depth } => format!("diamond{depth}"),
    };
    format!("{kind}-n{:02}-m{}-s{}", spec.n, spec.m, spec.seed)
}

pub fn write_corpus(dir: &Path, entries: &[CorpusEntry]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for e in entries {
        let path = dir.join(format!("{}.{EXTENSION}", e.name));
        fs::write(&path, emit_instance(&e.instance)).map_err(|err| io_err(&path, err))?;
    }
    Ok(())
}

/// Reads every `*.inst` file of `dir`, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == EXTENSION))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
            let name = p
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let instance = parse_instance(&text).map_err(|e| io_err(&p, e))?;
            Ok(CorpusEntry { name, instance })
        })
        .collect()
}

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_corpus_is_sorted_and_small() {
        let c = standard_corpus();
        assert!(c.windows(2).all(|w| w[0].name < w[1].name));
        assert!(c.iter().all(|e| e.instance.n() <= 16));
        assert_eq!(c, standard_corpus());
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = standard_corpus();
        write_corpus(dir.path(), &c).unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        assert_eq!(load_corpus(dir.path()).unwrap(), c);
    }
}
