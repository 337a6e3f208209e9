use serde::{Deserialize, Serialize};
use std::time::Instant;

use super::report::ResultRow;
use crate::dataset::{load_dataset, manifest_records, materialize, read_manifest, DatasetConfig, Split};
use crate::geometry::Bitmap;
use crate::nn::{evaluate, train_observed, LogEntry, Network, TrainingConfig};
use crate::problems::{category_of, LeakKind, ProblemId, VariantKind, CONTROL_IDS};
use crate::{Error, Result};

pub type Labeled = Vec<(Bitmap, crate::problems::ClassLabel)>;

/// Accuracy above which a dataset that should be unlearnable is flagged.
pub const LEAK_THRESHOLD: f64 = 0.6;

/// Train and test images for a config. A dataset already on disk under
/// `cfg.dataset_dir()` is reused when its manifest matches exactly;
/// otherwise the images are rendered in memory.
pub fn load_or_generate(cfg: &DatasetConfig) -> Result<(Labeled, Labeled)> {
    cfg.validate()?;
    let dir = cfg.dataset_dir();
    if let Ok(existing) = read_manifest(&dir) {
        if existing == manifest_records(cfg) {
            return Ok((load_dataset(&dir, Some(Split::Train))?, load_dataset(&dir, Some(Split::Test))?));
        }
    }
    Ok((materialize(cfg, Split::Train)?, materialize(cfg, Split::Test)?))
}

/// Generate (or reuse), train, evaluate. `observe` sees the training log.
pub fn run_one_observed(
    dataset: &DatasetConfig,
    training: &TrainingConfig,
    observe: impl FnMut(&LogEntry),
) -> Result<(ResultRow, Network<f32>)> {
    let start = Instant::now();
    let (train_set, test_set) = load_or_generate(dataset)?;
    let (net, _) = train_observed::<f32>(training, &train_set, observe)?;
    let accuracy = evaluate(&net, &test_set)?;
    let row = ResultRow {
        problem: dataset.problem,
        variant: dataset.variant,
        image_size: dataset.image_size,
        n_train: dataset.n_train,
        accuracy,
        category: category_of(dataset.problem),
        seed: training.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((row, net))
}

pub fn run_one(dataset: &DatasetConfig, training: &TrainingConfig) -> Result<ResultRow> {
    Ok(run_one_observed(dataset, training, |_| {})?.0)
}

fn with_problem(template: &DatasetConfig, problem: ProblemId, variant: VariantKind) -> DatasetConfig {
    DatasetConfig {
        problem,
        variant,
        ..template.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub problem: ProblemId,
    pub variant: VariantKind,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOutcome {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<Failure>,
}

/// One row per problem, using the template's variant, sizes and seed.
/// A failing problem is recorded and the run continues.
pub fn run_benchmark(
    problems: &[ProblemId],
    template: &DatasetConfig,
    training: &TrainingConfig,
    mut progress: impl FnMut(&std::result::Result<ResultRow, Failure>),
) -> BenchmarkOutcome {
    let mut out = BenchmarkOutcome::default();
    for &problem in problems {
        let cfg = with_problem(template, problem, template.variant);
        let result = run_one(&cfg, training).map_err(|e| Failure {
            problem,
            variant: template.variant,
            error: e.to_string(),
        });
        progress(&result);
        match result {
            Ok(row) => out.rows.push(row),
            Err(f) => out.failures.push(f),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Clean,
    Leak,
}

pub fn flag_for(accuracy: f64) -> Flag {
    if accuracy > LEAK_THRESHOLD {
        Flag::Leak
    } else {
        Flag::Clean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub variant: VariantKind,
    pub accuracy: f64,
    pub flag: Flag,
    /// True for variants with an injected bias, where a LEAK flag shows the
    /// auditor can see it.
    pub injected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub problem: ProblemId,
    pub threshold: f64,
    pub entries: Vec<AuditEntry>,
    pub rows: Vec<ResultRow>,
}

impl AuditReport {
    pub fn entry(&self, variant: VariantKind) -> Option<&AuditEntry> {
        self.entries.iter().find(|e| e.variant == variant)
    }

    /// A control or null dataset was learnable: the generator leaks.
    pub fn generator_leaks(&self) -> bool {
        self.entries.iter().any(|e| !e.injected && e.flag == Flag::Leak)
    }

    /// Every injected bias was picked up.
    pub fn sensitive(&self) -> bool {
        self.entries.iter().filter(|e| e.injected).all(|e| e.flag == Flag::Leak)
    }
}

/// Variants the audit trains on by default: the identical-shape control
/// (where one exists), each injected leak, and the null dataset.
pub fn default_audit_variants(problem: ProblemId) -> Vec<VariantKind> {
    let mut v = Vec::new();
    if CONTROL_IDS.contains(&problem.get()) {
        v.push(VariantKind::IdenticalControl);
    }
    v.extend(LeakKind::ALL.map(VariantKind::Leak));
    v.push(VariantKind::Null);
    v
}

pub fn audit_leakage(
    problem: ProblemId,
    variants: &[VariantKind],
    template: &DatasetConfig,
    training: &TrainingConfig,
    mut progress: impl FnMut(&AuditEntry),
) -> Result<AuditReport> {
    if variants.is_empty() {
        return Err(Error::InvalidArgument("audit needs at least one variant".into()));
    }
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for &variant in variants {
        match variant {
            VariantKind::Original => {
                return Err(Error::InvalidArgument(
                    "the original variant is not an audit dataset".into(),
                ))
            }
            VariantKind::IdenticalControl if !CONTROL_IDS.contains(&problem.get()) => {
                return Err(Error::NoControlVariant(problem.get()))
            }
            _ => {}
        }
        let row = run_one(&with_problem(template, problem, variant), training)?;
        let entry = AuditEntry {
            variant,
            accuracy: row.accuracy,
            flag: flag_for(row.accuracy),
            injected: matches!(variant, VariantKind::Leak(_)),
        };
        progress(&entry);
        entries.push(entry);
        rows.push(row);
    }
    Ok(AuditReport {
        problem,
        threshold: LEAK_THRESHOLD,
        entries,
        rows,
    })
}

/// The same problem and training budget at several resolutions.
pub fn resolution_ablation(
    problem: ProblemId,
    sizes: &[u32],
    template: &DatasetConfig,
    training: &TrainingConfig,
) -> Result<Vec<ResultRow>> {
    if sizes.is_empty() || sizes.iter().any(|s| ![64, 128].contains(s)) {
        return Err(Error::InvalidArgument("ablation sizes must be drawn from {64, 128}".into()));
    }
    sizes
        .iter()
        .map(|&image_size| {
            let cfg = DatasetConfig {
                image_size,
                ..with_problem(template, problem, template.variant)
            };
            run_one(&cfg, training)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub problem: ProblemId,
    pub threshold: f64,
    /// (training images per class, test accuracy) for every grid point.
    pub curve: Vec<(usize, f64)>,
    /// Smallest grid point reaching the threshold.
    pub first_reaching: Option<usize>,
}

/// Accuracy as a function of training-set size. Each grid point is a
/// separate dataset and model; the test split is the same throughout.
pub fn sample_efficiency(
    problem: ProblemId,
    grid: &[usize],
    threshold: f64,
    template: &DatasetConfig,
    training: &TrainingConfig,
    mut progress: impl FnMut(usize, f64),
) -> Result<SweepReport> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
        return Err(Error::InvalidArgument("grid must be non-empty, positive and ascending".into()));
    }
    let mut curve = Vec::with_capacity(grid.len());
    for &n in grid {
        let cfg = DatasetConfig {
            n_train: n,
            ..with_problem(template, problem, template.variant)
        };
        let row = run_one(&cfg, training)?;
        progress(n, row.accuracy);
        curve.push((n, row.accuracy));
    }
    let first_reaching = curve.iter().find(|(_, a)| *a >= threshold).map(|(n, _)| *n);
    Ok(SweepReport {
        problem,
        threshold,
        curve,
        first_reaching,
    })
}
