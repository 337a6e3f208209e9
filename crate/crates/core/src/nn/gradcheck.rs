use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::Network;
use super::tensor::Tensor;
use crate::Result;

/// Gradients smaller than this are compared absolutely rather than
/// relatively, so rounding noise on near-zero entries is not amplified.
pub const RELATIVE_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCheck {
    /// Weight tensor name, e.g. `conv2.weight`.
    pub layer: String,
    pub checked: usize,
    pub max_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub layers: Vec<LayerCheck>,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

/// Compare analytic gradients with central differences on up to
/// `per_layer` sampled parameters of every parametric layer (weights and
/// bias together). The network is restored before returning.
pub fn gradient_check(
    net: &mut Network<f64>,
    batch: &Tensor<f64>,
    labels: &[usize],
    step: f64,
    per_layer: usize,
    seed: u64,
) -> Result<GradCheckReport> {
    let (_, cache) = net.forward(batch)?;
    let (_, grads) = net.backward(&cache, labels)?;
    drop(cache);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::new();
    for (w, b) in net.param_layers() {
        let (nw, nb) = (net.params()[w].len(), net.params()[b].len());
        let total = nw + nb;
        let picks: Vec<usize> = if total <= per_layer {
            (0..total).collect()
        } else {
            // A quarter of the budget (at most) goes to biases.
            let from_bias = nb.min(per_layer / 4);
            let mut v: Vec<usize> = sample(&mut rng, nb, from_bias).into_iter().map(|i| nw + i).collect();
            v.extend(sample(&mut rng, nw, per_layer - from_bias));
            v
        };
        let mut worst: f64 = 0.0;
        for &flat in &picks {
            let (tensor, index) = if flat < nw { (w, flat) } else { (b, flat - nw) };
            let original = net.params()[tensor].data()[index];
            net.params_mut()[tensor].data_mut()[index] = original + step;
            let plus = net.loss(batch, labels)?;
            net.params_mut()[tensor].data_mut()[index] = original - step;
            let minus = net.loss(batch, labels)?;
            net.params_mut()[tensor].data_mut()[index] = original;
            let numeric = (plus - minus) / (2.0 * step);
            let analytic = grads[tensor].data()[index];
            worst = worst.max(relative_error(analytic, numeric));
        }
        layers.push(LayerCheck {
            layer: net.param_names()[w].clone(),
            checked: picks.len(),
            max_relative_error: worst,
        });
    }
    Ok(GradCheckReport {
        max_relative_error: layers.iter().map(|l| l.max_relative_error).fold(0.0, f64::max),
        layers,
    })
}
