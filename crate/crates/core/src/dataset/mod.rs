//! On-disk train/test corpora: PGM images plus a JSON-lines manifest.
//!
//! Every image is a pure function of its per-image seed, so the same
//! config always produces byte-identical directories.

pub mod pgm;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::geometry::Bitmap;
use crate::problems::{ClassLabel, ProblemId, ProblemSpec, SceneSpec, VariantKind};
use crate::{Error, Result};

pub const SUPPORTED_SIZES: [u32; 3] = [64, 128, 224];
pub const MANIFEST: &str = "manifest.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidArgument(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub problem: ProblemId,
    pub variant: VariantKind,
    /// Images per class in the training split.
    pub n_train: usize,
    /// Images per class in the test split.
    pub n_test: usize,
    pub image_size: u32,
    pub master_seed: u64,
    pub output_path: PathBuf,
}

impl DatasetConfig {
    /// Desk-scale defaults: 2000 train and 1000 test images per class at 64 px.
    pub fn new(problem: ProblemId, variant: VariantKind) -> Self {
        Self {
            problem,
            variant,
            n_train: 2000,
            n_test: 1000,
            image_size: 64,
            master_seed: 0,
            output_path: PathBuf::from("data"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::InvalidArgument(
                "n_train and n_test must be at least 1".into(),
            ));
        }
        if !SUPPORTED_SIZES.contains(&self.image_size) {
            return Err(Error::InvalidArgument(format!(
                "image size must be one of 64, 128, 224; got {}",
                self.image_size
            )));
        }
        ProblemSpec::with_variant(self.problem, self.variant)?;
        Ok(())
    }

    pub fn spec(&self) -> Result<ProblemSpec> {
        ProblemSpec::with_variant(self.problem, self.variant)
    }

    pub fn count(&self, split: Split) -> usize {
        match split {
            Split::Train => self.n_train,
            Split::Test => self.n_test,
        }
    }

    /// `<out>/p<ID>/<variant>`.
    pub fn dataset_dir(&self) -> PathBuf {
        dataset_dir(&self.output_path, self.problem, self.variant)
    }
}

pub fn dataset_dir(out: &Path, problem: ProblemId, variant: VariantKind) -> PathBuf {
    out.join(format!("p{}", problem.get())).join(variant.name())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    /// Path relative to the dataset directory.
    pub file_name: String,
    pub problem: ProblemId,
    pub variant: VariantKind,
    pub label: ClassLabel,
    pub per_image_seed: u64,
    pub split: Split,
}

/// Stable per-image seed. The top bit encodes the split, so train and test
/// seeds never collide.
pub fn per_image_seed(master_seed: u64, split: Split, label: ClassLabel, index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(b"svrt-image-seed");
    h.update(master_seed.to_le_bytes());
    h.update([split as u8, label.get()]);
    h.update((index as u64).to_le_bytes());
    let digest = h.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    let v = u64::from_le_bytes(head) & !(1 << 63);
    match split {
        Split::Train => v,
        Split::Test => v | (1 << 63),
    }
}

/// Manifest order: split, then index, then label, so each prefix is balanced.
pub fn manifest_records(cfg: &DatasetConfig) -> Vec<ManifestRecord> {
    let mut out = Vec::with_capacity(2 * (cfg.n_train + cfg.n_test));
    for split in [Split::Train, Split::Test] {
        for index in 0..cfg.count(split) {
            for label in ClassLabel::both() {
                out.push(ManifestRecord {
                    file_name: format!("{split}/{}_{index}.pgm", label.get()),
                    problem: cfg.problem,
                    variant: cfg.variant,
                    label,
                    per_image_seed: per_image_seed(cfg.master_seed, split, label, index),
                    split,
                });
            }
        }
    }
    out
}

fn index_of(record: &ManifestRecord) -> usize {
    record
        .file_name
        .rsplit(['_', '/'])
        .next()
        .and_then(|s| s.trim_end_matches(".pgm").parse().ok())
        .unwrap_or(0)
}

/// Sample the scene behind one manifest record.
pub fn scene_for(spec: &ProblemSpec, record: &ManifestRecord, image_size: u32) -> Result<SceneSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(record.per_image_seed);
    spec.sample(record.label, &mut rng, image_size)
        .map_err(|e| Error::Generation {
            problem: spec.id.get(),
            label: record.label.get(),
            split: record.split.to_string(),
            index: index_of(record),
            source: Box::new(e),
        })
}

fn render_record(spec: &ProblemSpec, record: &ManifestRecord, image_size: u32) -> Result<Bitmap> {
    scene_for(spec, record, image_size)?.render()
}

/// Write images and manifest under `cfg.dataset_dir()`.
pub fn generate_dataset(cfg: &DatasetConfig) -> Result<Vec<ManifestRecord>> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    let dir = cfg.dataset_dir();
    for split in [Split::Train, Split::Test] {
        fs::create_dir_all(dir.join(split.as_str()))?;
    }
    let records = manifest_records(cfg);
    let mut manifest = BufWriter::new(fs::File::create(dir.join(MANIFEST))?);
    for r in &records {
        let bitmap = render_record(&spec, r, cfg.image_size)?;
        fs::write(dir.join(&r.file_name), pgm::encode(&bitmap))?;
        serde_json::to_writer(&mut manifest, r)?;
        manifest.write_all(b"\n")?;
    }
    manifest.flush()?;
    Ok(records)
}

/// Images of one split rendered in memory, in manifest order. Identical to
/// what `generate_dataset` writes for the same config.
pub fn materialize(cfg: &DatasetConfig, split: Split) -> Result<Vec<(Bitmap, ClassLabel)>> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    manifest_records(cfg)
        .into_iter()
        .filter(|r| r.split == split)
        .map(|r| Ok((render_record(&spec, &r, cfg.image_size)?, r.label)))
        .collect()
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestRecord>> {
    let path = dir.join(MANIFEST);
    let file = fs::File::open(&path).map_err(|e| Error::Record {
        file: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Record {
            file: format!("{}:{}", path.display(), i + 1),
            reason: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

/// Decode every image of `split` (or all splits) in manifest order.
pub fn load_dataset(dir: &Path, split: Option<Split>) -> Result<Vec<(Bitmap, ClassLabel)>> {
    read_manifest(dir)?
        .into_iter()
        .filter(|r| split.is_none_or(|s| r.split == s))
        .map(|r| {
            let bad = |reason: String| Error::Record {
                file: r.file_name.clone(),
                reason,
            };
            let bytes = fs::read(dir.join(&r.file_name)).map_err(|e| bad(e.to_string()))?;
            let bitmap = pgm::decode(&bytes).map_err(bad)?;
            if !bitmap.is_binary() {
                return Err(bad("pixel values other than 0 and 255".into()));
            }
            Ok((bitmap, r.label))
        })
        .collect()
}

/// SHA-256 over every file under `dir`, visited in sorted path order.
pub fn directory_hash(dir: &Path) -> Result<String> {
    fn walk(dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
        for entry in fs::read_dir(dir)? {
            let p = entry?.path();
            if p.is_dir() {
                walk(&p, files)?;
            } else {
                files.push(p);
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(dir, &mut files)?;
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        let rel = f.strip_prefix(dir).unwrap_or(&f);
        h.update(rel.to_string_lossy().as_bytes());
        h.update([0]);
        h.update(fs::read(&f)?);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
