use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{self, ConvGeom, PoolGeom};
use super::tensor::{Real, Tensor};
use crate::{Error, Result};

pub const LENET64: &str = "lenet64";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv {
        out_channels: usize,
        kernel: usize,
        stride: usize,
    },
    MaxPool {
        window: usize,
        stride: usize,
    },
    FullyConnected {
        out_units: usize,
    },
    Relu,
    SoftmaxCrossEntropy,
}

/// conv 20@5x5, pool 2, conv 50@5x5, pool 2, fc 500, relu, fc 2.
pub fn lenet64() -> Vec<LayerSpec> {
    vec![
        LayerSpec::Conv {
            out_channels: 20,
            kernel: 5,
            stride: 1,
        },
        LayerSpec::MaxPool { window: 2, stride: 2 },
        LayerSpec::Conv {
            out_channels: 50,
            kernel: 5,
            stride: 1,
        },
        LayerSpec::MaxPool { window: 2, stride: 2 },
        LayerSpec::FullyConnected { out_units: 500 },
        LayerSpec::Relu,
        LayerSpec::FullyConnected { out_units: 2 },
        LayerSpec::SoftmaxCrossEntropy,
    ]
}

/// Layer list for a named architecture.
pub fn architecture(name: &str) -> Result<Vec<LayerSpec>> {
    match name {
        LENET64 => Ok(lenet64()),
        other => Err(Error::InvalidArgument(format!("unknown architecture `{other}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSpec {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl InputSpec {
    pub fn gray(size: usize) -> Self {
        Self {
            channels: 1,
            height: size,
            width: size,
        }
    }

    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
enum Step {
    Conv { geom: ConvGeom, param: usize },
    Pool { geom: PoolGeom },
    Dense { inputs: usize, outputs: usize, param: usize },
    Relu,
    Loss { classes: usize },
}

#[derive(Debug, Clone)]
pub struct Network<T> {
    architecture: String,
    input: InputSpec,
    specs: Vec<LayerSpec>,
    steps: Vec<Step>,
    /// Weight and bias tensors of every parametric layer, in layer order.
    params: Vec<Tensor<T>>,
    names: Vec<String>,
    /// Bumped on every parameter mutation; caches record the value they saw.
    version: u64,
}

enum Saved<T> {
    Argmax(Vec<u32>, usize),
    Input(Vec<T>),
    Output(Vec<T>),
    None,
}

/// Activations kept by `forward` for the matching `backward`.
pub struct Cache<T> {
    version: u64,
    batch: usize,
    saved: Vec<Saved<T>>,
    logits: Vec<T>,
}

#[derive(Debug, Clone, Copy)]
enum Dims {
    Spatial(usize, usize, usize),
    Flat(usize),
}

impl Dims {
    fn len(self) -> usize {
        match self {
            Dims::Spatial(c, h, w) => c * h * w,
            Dims::Flat(f) => f,
        }
    }
}

fn plan(input: InputSpec, specs: &[LayerSpec]) -> Result<(Vec<Step>, Vec<Vec<usize>>, Vec<String>)> {
    let bad = |i: usize, why: &str| Error::InvalidArgument(format!("layer {i}: {why}"));
    let mut dims = Dims::Spatial(input.channels, input.height, input.width);
    let mut steps = Vec::new();
    let mut shapes = Vec::new();
    let mut names = Vec::new();
    let (mut n_conv, mut n_fc) = (0, 0);
    for (i, spec) in specs.iter().enumerate() {
        if matches!(steps.last(), Some(Step::Loss { .. })) {
            return Err(bad(i, "nothing may follow the loss layer"));
        }
        match *spec {
            LayerSpec::Conv {
                out_channels,
                kernel,
                stride,
            } => {
                let Dims::Spatial(c, h, w) = dims else {
                    return Err(bad(i, "convolution after a flattening layer"));
                };
                if out_channels == 0 {
                    return Err(bad(i, "zero output channels"));
                }
                let geom = ConvGeom::new(c, h, w, out_channels, kernel, stride)
                    .ok_or_else(|| bad(i, "kernel does not fit the input"))?;
                n_conv += 1;
                names.push(format!("conv{n_conv}.weight"));
                names.push(format!("conv{n_conv}.bias"));
                shapes.push(vec![out_channels, c, kernel, kernel]);
                shapes.push(vec![out_channels]);
                steps.push(Step::Conv {
                    geom,
                    param: shapes.len() - 2,
                });
                dims = Dims::Spatial(out_channels, geom.oh, geom.ow);
            }
            LayerSpec::MaxPool { window, stride } => {
                let Dims::Spatial(c, h, w) = dims else {
                    return Err(bad(i, "pooling after a flattening layer"));
                };
                let geom = PoolGeom::new(c, h, w, window, stride)
                    .ok_or_else(|| bad(i, "window does not fit the input"))?;
                steps.push(Step::Pool { geom });
                dims = Dims::Spatial(c, geom.oh, geom.ow);
            }
            LayerSpec::FullyConnected { out_units } => {
                if out_units == 0 {
                    return Err(bad(i, "zero output units"));
                }
                let inputs = dims.len();
                n_fc += 1;
                names.push(format!("fc{n_fc}.weight"));
                names.push(format!("fc{n_fc}.bias"));
                shapes.push(vec![out_units, inputs]);
                shapes.push(vec![out_units]);
                steps.push(Step::Dense {
                    inputs,
                    outputs: out_units,
                    param: shapes.len() - 2,
                });
                dims = Dims::Flat(out_units);
            }
            LayerSpec::Relu => steps.push(Step::Relu),
            LayerSpec::SoftmaxCrossEntropy => {
                if !matches!(steps.last(), Some(Step::Dense { outputs: 2, .. })) {
                    return Err(bad(i, "the loss must follow a 2-unit fully connected layer"));
                }
                steps.push(Step::Loss { classes: 2 });
            }
        }
    }
    if !matches!(steps.last(), Some(Step::Loss { .. })) {
        return Err(Error::InvalidArgument(
            "the last layer must be softmax cross-entropy".into(),
        ));
    }
    Ok((steps, shapes, names))
}

impl<T: Real> Network<T> {
    /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
    pub fn new(architecture: &str, input: InputSpec, specs: Vec<LayerSpec>, seed: u64) -> Result<Self> {
        let (steps, shapes, names) = plan(input, &specs)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = shapes
            .iter()
            .map(|shape| {
                let mut t = Tensor::zeros(shape);
                if shape.len() > 1 {
                    let receptive: usize = shape[2..].iter().product();
                    let fan_in = shape[1] * receptive;
                    let fan_out = shape[0] * receptive;
                    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                    for v in t.data_mut() {
                        *v = T::from_f64(rng.gen_range(-limit..limit));
                    }
                }
                t
            })
            .collect();
        Ok(Self {
            architecture: architecture.to_string(),
            input,
            specs,
            steps,
            params,
            names,
            version: 0,
        })
    }

    pub fn lenet64(image_size: usize, seed: u64) -> Result<Self> {
        Self::new(LENET64, InputSpec::gray(image_size), lenet64(), seed)
    }

    pub fn architecture(&self) -> &str {
        &self.architecture
    }

    pub fn input(&self) -> InputSpec {
        self.input
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn params(&self) -> &[Tensor<T>] {
        &self.params
    }

    /// Mutable parameters. Invalidates outstanding caches.
    pub fn params_mut(&mut self) -> &mut [Tensor<T>] {
        self.version += 1;
        &mut self.params
    }

    /// `conv1.weight`, `conv1.bias`, ..., aligned with `params()`.
    pub fn param_names(&self) -> &[String] {
        &self.names
    }

    /// Parametric layers as (weight index, bias index) pairs.
    pub fn param_layers(&self) -> Vec<(usize, usize)> {
        (0..self.params.len() / 2).map(|i| (2 * i, 2 * i + 1)).collect()
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    pub fn cast<U: Real>(&self) -> Network<U> {
        Network {
            architecture: self.architecture.clone(),
            input: self.input,
            specs: self.specs.clone(),
            steps: self.steps.clone(),
            params: self.params.iter().map(Tensor::cast).collect(),
            names: self.names.clone(),
            version: 0,
        }
    }

    pub(crate) fn from_parts(
        architecture: String,
        input: InputSpec,
        specs: Vec<LayerSpec>,
        params: Vec<Tensor<T>>,
    ) -> Result<Self> {
        let (steps, shapes, names) = plan(input, &specs)?;
        if shapes.len() != params.len() || shapes.iter().zip(&params).any(|(s, p)| s.as_slice() != p.shape()) {
            return Err(Error::ShapeMismatch(
                "parameter tensors do not match the layer list".into(),
            ));
        }
        Ok(Self {
            architecture,
            input,
            specs,
            steps,
            params,
            names,
            version: 0,
        })
    }

    fn check_batch(&self, batch: &Tensor<T>) -> Result<usize> {
        let s = batch.shape();
        let want = [self.input.channels, self.input.height, self.input.width];
        if s.len() != 4 || s[1..] != want || s[0] == 0 {
            return Err(Error::ShapeMismatch(format!(
                "batch shape {s:?}, network expects (N, {}, {}, {})",
                want[0], want[1], want[2]
            )));
        }
        Ok(s[0])
    }

    /// Logits `(N, 2)` plus the activations needed by `backward`.
    pub fn forward(&self, batch: &Tensor<T>) -> Result<(Tensor<T>, Cache<T>)> {
        let n = self.check_batch(batch)?;
        let mut x = batch.data().to_vec();
        let mut saved = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            match step {
                Step::Conv { geom, param } => {
                    let y = layers::conv_forward(
                        &x,
                        n,
                        geom,
                        self.params[*param].data(),
                        self.params[param + 1].data(),
                    );
                    saved.push(Saved::Input(std::mem::replace(&mut x, y)));
                }
                Step::Pool { geom } => {
                    let (y, arg) = layers::pool_forward(&x, n, geom);
                    saved.push(Saved::Argmax(arg, x.len()));
                    x = y;
                }
                Step::Dense { inputs, param, .. } => {
                    let y = layers::dense_forward(
                        &x,
                        n,
                        *inputs,
                        self.params[*param].data(),
                        self.params[param + 1].data(),
                    );
                    saved.push(Saved::Input(std::mem::replace(&mut x, y)));
                }
                Step::Relu => {
                    x = layers::relu_forward(&x);
                    saved.push(Saved::Output(x.clone()));
                }
                Step::Loss { .. } => saved.push(Saved::None),
            }
        }
        let logits = Tensor::from_vec(&[n, 2], x)?;
        Ok((
            logits.clone(),
            Cache {
                version: self.version,
                batch: n,
                saved,
                logits: logits.into_data(),
            },
        ))
    }

    /// Mean cross-entropy and its gradient for every parameter tensor.
    pub fn backward(&self, cache: &Cache<T>, labels: &[usize]) -> Result<(T, Vec<Tensor<T>>)> {
        if cache.version != self.version || cache.saved.len() != self.steps.len() {
            return Err(Error::StaleCache(
                "parameters changed since the forward pass".into(),
            ));
        }
        if labels.len() != cache.batch || labels.iter().any(|&l| l > 1) {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for a batch of {}",
                labels.len(),
                cache.batch
            )));
        }
        let n = cache.batch;
        let mut grads: Vec<Tensor<T>> = self.params.iter().map(|p| Tensor::zeros(p.shape())).collect();
        let first_param_step = self
            .steps
            .iter()
            .position(|s| matches!(s, Step::Conv { .. } | Step::Dense { .. }))
            .unwrap_or(0);
        let mut loss = T::zero();
        let mut dy: Vec<T> = Vec::new();
        for (i, (step, saved)) in self.steps.iter().zip(&cache.saved).enumerate().rev() {
            let need_input = i > first_param_step;
            match (step, saved) {
                (Step::Loss { classes }, _) => {
                    let (l, g) = layers::softmax_cross_entropy(&cache.logits, labels, *classes);
                    loss = l;
                    dy = g;
                }
                (Step::Dense { inputs, outputs, param }, Saved::Input(x)) => {
                    let (dw, db, dx) =
                        layers::dense_backward(&dy, x, n, *inputs, self.params[*param].data(), *outputs);
                    grads[*param].data_mut().copy_from_slice(&dw);
                    grads[param + 1].data_mut().copy_from_slice(&db);
                    dy = dx;
                }
                (Step::Relu, Saved::Output(y)) => dy = layers::relu_backward(&dy, y),
                (Step::Pool { .. }, Saved::Argmax(arg, len)) => dy = layers::pool_backward(&dy, arg, *len),
                (Step::Conv { geom, param }, Saved::Input(x)) => {
                    let g = layers::conv_backward(&dy, x, n, geom, self.params[*param].data(), need_input);
                    grads[*param].data_mut().copy_from_slice(&g.weights);
                    grads[param + 1].data_mut().copy_from_slice(&g.bias);
                    dy = g.input.unwrap_or_default();
                }
                _ => return Err(Error::StaleCache("cache does not match the layer list".into())),
            }
        }
        Ok((loss, grads))
    }

    /// Mean cross-entropy without gradients.
    pub fn loss(&self, batch: &Tensor<T>, labels: &[usize]) -> Result<f64> {
        let (logits, _) = self.forward(batch)?;
        Ok(layers::softmax_cross_entropy(logits.data(), labels, 2).0.as_f64())
    }

    /// Arg-max class per image.
    pub fn predict(&self, batch: &Tensor<T>) -> Result<Vec<usize>> {
        let (logits, _) = self.forward(batch)?;
        Ok(logits
            .data()
            .chunks_exact(2)
            .map(|r| usize::from(r[1] > r[0]))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lenet64_shapes() {
        let net = Network::<f32>::lenet64(64, 1).unwrap();
        let shapes: Vec<&[usize]> = net.params().iter().map(Tensor::shape).collect();
        assert_eq!(
            shapes,
            vec![&[20, 1, 5, 5][..], &[20], &[50, 20, 5, 5], &[50], &[500, 50 * 13 * 13], &[500], &[2, 500], &[2]]
        );
        assert_eq!(net.param_names()[4], "fc1.weight");
        let big = Network::<f32>::lenet64(128, 1).unwrap();
        assert_eq!(big.params()[4].shape(), &[500, 50 * 29 * 29]);
    }

    #[test]
    fn init_is_bounded_and_seeded() {
        let a = Network::<f64>::lenet64(64, 3).unwrap();
        let b = Network::<f64>::lenet64(64, 3).unwrap();
        let c = Network::<f64>::lenet64(64, 4).unwrap();
        assert_eq!(a.params(), b.params());
        assert_ne!(a.params(), c.params());
        let limit = (6.0f64 / (25.0 + 500.0)).sqrt();
        assert!(a.params()[0].data().iter().all(|v| v.abs() <= limit));
        assert!(a.params()[1].data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn invalid_layer_lists_are_rejected() {
        let input = InputSpec::gray(8);
        let fc = |u| LayerSpec::FullyConnected { out_units: u };
        assert!(Network::<f32>::new("t", input, vec![fc(3), LayerSpec::SoftmaxCrossEntropy], 0).is_err());
        assert!(Network::<f32>::new("t", input, vec![fc(2)], 0).is_err());
        let conv = LayerSpec::Conv {
            out_channels: 2,
            kernel: 9,
            stride: 1,
        };
        assert!(Network::<f32>::new("t", input, vec![conv, fc(2), LayerSpec::SoftmaxCrossEntropy], 0).is_err());
        assert!(architecture("googlenet").is_err());
    }

    #[test]
    fn forward_rejects_wrong_batch_shape() {
        let net = Network::<f32>::lenet64(64, 0).unwrap();
        let bad = Tensor::zeros(&[2, 1, 32, 32]);
        assert!(matches!(net.forward(&bad), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn stale_cache_is_rejected() {
        let mut net = Network::<f64>::lenet64(64, 0).unwrap();
        let batch = Tensor::from_vec(&[1, 1, 64, 64], vec![1.0; 4096]).unwrap();
        let (_, cache) = net.forward(&batch).unwrap();
        assert!(net.backward(&cache, &[0]).is_ok());
        net.params_mut()[1].data_mut()[0] = 0.5;
        assert!(matches!(net.backward(&cache, &[0]), Err(Error::StaleCache(_))));
    }

    #[test]
    fn zero_logits_give_uniform_gradient() {
        let input = InputSpec::gray(2);
        let mut net =
            Network::<f64>::new("t", input, vec![LayerSpec::FullyConnected { out_units: 2 }, LayerSpec::SoftmaxCrossEntropy], 0)
                .unwrap();
        net.params_mut()[0].data_mut().fill(0.0);
        let batch = Tensor::from_vec(&[1, 1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (logits, cache) = net.forward(&batch).unwrap();
        assert_eq!(logits.data(), &[0.0, 0.0]);
        let (loss, grads) = net.backward(&cache, &[0]).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        // Bias gradient equals the logit gradient.
        assert_eq!(grads[1].data(), &[-0.5, 0.5]);
        assert_eq!(grads[0].data(), &[-0.5, -1.0, -1.5, -2.0, 0.5, 1.0, 1.5, 2.0]);
    }
}
