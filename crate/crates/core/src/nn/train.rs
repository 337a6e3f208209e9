use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use super::adam::{AdamConfig, AdamState};
use super::network::{architecture, InputSpec, Network};
use super::tensor::{Real, Tensor};
use crate::geometry::Bitmap;
use crate::problems::ClassLabel;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub iterations: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub weight_decay: f64,
    pub learning_rate: f64,
    pub architecture: String,
}

impl Default for TrainingConfig {
    /// Desk-scale defaults: 5000 iterations of batch 32.
    fn default() -> Self {
        Self {
            iterations: 5000,
            batch_size: 32,
            seed: 0,
            weight_decay: 0.00005,
            learning_rate: 0.001,
            architecture: super::network::LENET64.to_string(),
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument(
                "iterations and batch size must be at least 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.weight_decay >= 0.0) {
            return Err(Error::InvalidArgument(
                "learning rate must be positive and weight decay non-negative".into(),
            ));
        }
        architecture(&self.architecture)?;
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            ..AdamConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub iteration: usize,
    pub loss: f64,
}

/// Pixels scaled to [0, 1]; background is 1.
pub fn image_values<T: Real>(bitmap: &Bitmap) -> impl Iterator<Item = T> + '_ {
    let scale = 1.0 / 255.0;
    bitmap.pixels.iter().map(move |&p| T::from_f64(f64::from(p) * scale))
}

/// Stack bitmaps of equal size into an `(N, 1, H, W)` tensor.
pub fn to_batch<T: Real>(images: &[&Bitmap]) -> Result<Tensor<T>> {
    let first = images
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty batch".into()))?;
    let (w, h) = (first.width as usize, first.height as usize);
    let mut data = Vec::with_capacity(images.len() * w * h);
    for b in images {
        if (b.width as usize, b.height as usize) != (w, h) {
            return Err(Error::ShapeMismatch("images of different sizes in one batch".into()));
        }
        data.extend(image_values::<T>(b));
    }
    Tensor::from_vec(&[images.len(), 1, h, w], data)
}

fn check_data(input: InputSpec, data: &[(Bitmap, ClassLabel)]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("no training data".into()));
    }
    for (b, _) in data {
        if (b.height as usize, b.width as usize) != (input.height, input.width) {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} image for a {}x{} network",
                b.width, b.height, input.width, input.height
            )));
        }
    }
    Ok(())
}

/// Mini-batch ADAM with a seeded reshuffle every epoch. `observe` sees every
/// log entry as it is produced.
pub fn train_observed<T: Real>(
    cfg: &TrainingConfig,
    data: &[(Bitmap, ClassLabel)],
    mut observe: impl FnMut(&LogEntry),
) -> Result<(Network<T>, Vec<LogEntry>)> {
    cfg.validate()?;
    let first = data
        .first()
        .ok_or_else(|| Error::InvalidArgument("no training data".into()))?;
    if first.0.width != first.0.height {
        return Err(Error::InvalidArgument("images must be square".into()));
    }
    if !ClassLabel::both().iter().all(|l| data.iter().any(|(_, d)| d == l)) {
        return Err(Error::InvalidArgument(
            "training data must contain both classes".into(),
        ));
    }
    let mut net = Network::<T>::new(
        &cfg.architecture,
        InputSpec::gray(first.0.width as usize),
        architecture(&cfg.architecture)?,
        cfg.seed,
    )?;
    check_data(net.input(), data)?;
    let per_image = net.input().len();
    let values: Vec<T> = data.iter().flat_map(|(b, _)| image_values::<T>(b)).collect();
    let labels: Vec<usize> = data.iter().map(|(_, l)| l.index()).collect();

    let mut adam = AdamState::new(net.params(), cfg.adam());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let mut cursor = 0;
    let bs = cfg.batch_size;
    let input = net.input();
    let mut log = Vec::with_capacity(cfg.iterations);
    let mut last_good = 0;
    let mut batch_data = Vec::with_capacity(bs * per_image);
    let mut batch_labels = Vec::with_capacity(bs);
    for iteration in 1..=cfg.iterations {
        batch_data.clear();
        batch_labels.clear();
        for _ in 0..bs {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            let i = order[cursor];
            cursor += 1;
            batch_data.extend_from_slice(&values[i * per_image..][..per_image]);
            batch_labels.push(labels[i]);
        }
        let batch = Tensor::from_vec(
            &[bs, input.channels, input.height, input.width],
            std::mem::take(&mut batch_data),
        )?;
        let (_, cache) = net.forward(&batch)?;
        batch_data = batch.into_data();
        let (loss, grads) = net.backward(&cache, &batch_labels)?;
        drop(cache);
        let loss = loss.as_f64();
        if !loss.is_finite() {
            return Err(Error::Diverged {
                iteration,
                last_good,
            });
        }
        match adam.step(net.params_mut(), &grads) {
            Ok(()) => {}
            Err(Error::NonFiniteGradient(_)) => {
                return Err(Error::Diverged {
                    iteration,
                    last_good,
                })
            }
            Err(e) => return Err(e),
        }
        last_good = iteration;
        let entry = LogEntry { iteration, loss };
        observe(&entry);
        log.push(entry);
    }
    Ok((net, log))
}

pub fn train<T: Real>(cfg: &TrainingConfig, data: &[(Bitmap, ClassLabel)]) -> Result<(Network<T>, Vec<LogEntry>)> {
    train_observed(cfg, data, |_| {})
}

const EVAL_CHUNK: usize = 100;

/// Predicted class per image, in order.
pub fn predict_all<T: Real>(net: &Network<T>, data: &[(Bitmap, ClassLabel)]) -> Result<Vec<usize>> {
    check_data(net.input(), data)?;
    let mut out = Vec::with_capacity(data.len());
    for chunk in data.chunks(EVAL_CHUNK) {
        let refs: Vec<&Bitmap> = chunk.iter().map(|(b, _)| b).collect();
        out.extend(net.predict(&to_batch::<T>(&refs)?)?);
    }
    Ok(out)
}

/// Fraction of images whose arg-max prediction equals the label.
pub fn evaluate<T: Real>(net: &Network<T>, data: &[(Bitmap, ClassLabel)]) -> Result<f64> {
    let predictions = predict_all(net, data)?;
    let correct = predictions
        .iter()
        .zip(data)
        .filter(|(&p, (_, l))| p == l.index())
        .count();
    Ok(correct as f64 / data.len() as f64)
}

pub fn write_log(path: &Path, log: &[LogEntry]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for e in log {
        serde_json::to_writer(&mut f, e)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}
