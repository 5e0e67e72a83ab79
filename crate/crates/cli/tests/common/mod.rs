#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use morphforge::pipeline::{run_pipeline, PipelineConfig};
use morphforge::synth::{write_corpus, CorpusSpec};

pub struct Fixture {
    _dir: tempfile::TempDir,
    pub root: PathBuf,
    pub config: PathBuf,
}

/// Desk-scale corpus (64 px faces) with one pipeline run under `out/`.
pub fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let spec = CorpusSpec {
            size: 64,
            ..CorpusSpec::default()
        };
        let config = write_corpus(&root, &spec).unwrap();
        run_pipeline(&PipelineConfig::load(&config).unwrap()).unwrap();
        Fixture { _dir: dir, root, config }
    })
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

/// Private copy of the train split output; returns the manifest path.
pub fn train_split_copy(into: &Path) -> PathBuf {
    copy_dir(&fixture().root.join("out/train"), into);
    into.join("manifest.json")
}
