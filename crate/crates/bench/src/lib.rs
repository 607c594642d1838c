//! Corpus loading shared by the benchmarks.

use std::path::{Path, PathBuf};

use ebv_core::frontend::SourceUnit;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Every `.eb` model in the corpus, sorted by file name.
pub fn corpus_units() -> Vec<SourceUnit> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("directory entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "eb"))
        .collect();
    paths.sort();
    paths.iter().map(|p| SourceUnit::read(p).expect("readable model")).collect()
}
