//! Layer kernels on flat row-major buffers. Activations are `N x C x H x W`.

use super::tensor::{matmul, Mat, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ConvGeom {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub out: usize,
    pub k: usize,
    pub stride: usize,
    pub oh: usize,
    pub ow: usize,
}

impl ConvGeom {
    pub fn new(c: usize, h: usize, w: usize, out: usize, k: usize, stride: usize) -> Option<Self> {
        if k == 0 || stride == 0 || k > h || k > w {
            return None;
        }
        Some(Self {
            c,
            h,
            w,
            out,
            k,
            stride,
            oh: (h - k) / stride + 1,
            ow: (w - k) / stride + 1,
        })
    }

    pub fn patch(&self) -> usize {
        self.c * self.k * self.k
    }

    pub fn positions(&self) -> usize {
        self.oh * self.ow
    }
}

/// Unfold one sample into a `(C*k*k) x P` matrix.
fn im2col<T: Real>(x: &[T], g: &ConvGeom, col: &mut [T]) {
    let p = g.positions();
    for c in 0..g.c {
        let src = &x[c * g.h * g.w..][..g.h * g.w];
        for ki in 0..g.k {
            for kj in 0..g.k {
                let row = (c * g.k + ki) * g.k + kj;
                let dst = &mut col[row * p..][..p];
                for oy in 0..g.oh {
                    let line = &src[(oy * g.stride + ki) * g.w + kj..];
                    let out = &mut dst[oy * g.ow..][..g.ow];
                    if g.stride == 1 {
                        out.copy_from_slice(&line[..g.ow]);
                    } else {
                        for (ox, v) in out.iter_mut().enumerate() {
                            *v = line[ox * g.stride];
                        }
                    }
                }
            }
        }
    }
}

/// Adjoint of `im2col`: accumulate columns back into one sample.
fn col2im<T: Real>(col: &[T], g: &ConvGeom, x: &mut [T]) {
    let p = g.positions();
    for c in 0..g.c {
        let dst = &mut x[c * g.h * g.w..][..g.h * g.w];
        for ki in 0..g.k {
            for kj in 0..g.k {
                let row = (c * g.k + ki) * g.k + kj;
                let src = &col[row * p..][..p];
                for oy in 0..g.oh {
                    let base = (oy * g.stride + ki) * g.w + kj;
                    let line = &src[oy * g.ow..][..g.ow];
                    if g.stride == 1 {
                        for (d, &v) in dst[base..][..g.ow].iter_mut().zip(line) {
                            *d += v;
                        }
                    } else {
                        for (ox, &v) in line.iter().enumerate() {
                            dst[base + ox * g.stride] += v;
                        }
                    }
                }
            }
        }
    }
}

/// One GEMM per sample over a reused column buffer; the `out x P` product
/// is already the sample's `C x H x W` output slice.
pub(crate) fn conv_forward<T: Real>(x: &[T], n: usize, g: &ConvGeom, weights: &[T], bias: &[T]) -> Vec<T> {
    let p = g.positions();
    let (in_len, out_len) = (g.c * g.h * g.w, g.out * p);
    let mut col = vec![T::zero(); g.patch() * p];
    let mut y = vec![T::zero(); n * out_len];
    for b in 0..n {
        im2col(&x[b * in_len..][..in_len], g, &mut col);
        let yb = &mut y[b * out_len..][..out_len];
        for (o, row) in yb.chunks_exact_mut(p).enumerate() {
            row.fill(bias[o]);
        }
        matmul(Mat::new(weights, g.out, g.patch()), Mat::new(&col, g.patch(), p), T::one(), yb);
    }
    y
}

pub(crate) struct ConvGrads<T> {
    pub weights: Vec<T>,
    pub bias: Vec<T>,
    pub input: Option<Vec<T>>,
}

/// `x` is the forward input; its columns are rebuilt rather than cached.
pub(crate) fn conv_backward<T: Real>(
    dy: &[T],
    x: &[T],
    n: usize,
    g: &ConvGeom,
    weights: &[T],
    need_input: bool,
) -> ConvGrads<T> {
    let p = g.positions();
    let (in_len, out_len) = (g.c * g.h * g.w, g.out * p);
    let mut col = vec![T::zero(); g.patch() * p];
    let mut dcol = vec![T::zero(); if need_input { g.patch() * p } else { 0 }];
    let mut dw = vec![T::zero(); g.out * g.patch()];
    let mut bias = vec![T::zero(); g.out];
    let mut dx = vec![T::zero(); if need_input { n * in_len } else { 0 }];
    for b in 0..n {
        let dyb = &dy[b * out_len..][..out_len];
        for (o, row) in dyb.chunks_exact(p).enumerate() {
            let mut s = T::zero();
            for &v in row {
                s += v;
            }
            bias[o] += s;
        }
        im2col(&x[b * in_len..][..in_len], g, &mut col);
        matmul(Mat::new(dyb, g.out, p), Mat::t(&col, p, g.patch()), T::one(), &mut dw);
        if need_input {
            matmul(Mat::t(weights, g.patch(), g.out), Mat::new(dyb, g.out, p), T::zero(), &mut dcol);
            col2im(&dcol, g, &mut dx[b * in_len..][..in_len]);
        }
    }
    ConvGrads {
        weights: dw,
        bias,
        input: need_input.then_some(dx),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct PoolGeom {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub window: usize,
    pub stride: usize,
    pub oh: usize,
    pub ow: usize,
}

impl PoolGeom {
    pub fn new(c: usize, h: usize, w: usize, window: usize, stride: usize) -> Option<Self> {
        if window == 0 || stride == 0 || window > h || window > w {
            return None;
        }
        Some(Self {
            c,
            h,
            w,
            window,
            stride,
            oh: (h - window) / stride + 1,
            ow: (w - window) / stride + 1,
        })
    }
}

/// Max pooling; ties go to the first position in row-major window order.
/// Returns the output and, per output, the flat index of the chosen input.
pub(crate) fn pool_forward<T: Real>(x: &[T], n: usize, g: &PoolGeom) -> (Vec<T>, Vec<u32>) {
    let planes = n * g.c;
    let mut y = Vec::with_capacity(planes * g.oh * g.ow);
    let mut arg = Vec::with_capacity(planes * g.oh * g.ow);
    for plane in 0..planes {
        let base = plane * g.h * g.w;
        for oy in 0..g.oh {
            for ox in 0..g.ow {
                let mut best = base + oy * g.stride * g.w + ox * g.stride;
                for dy in 0..g.window {
                    for dx in 0..g.window {
                        let i = base + (oy * g.stride + dy) * g.w + ox * g.stride + dx;
                        if x[i] > x[best] {
                            best = i;
                        }
                    }
                }
                y.push(x[best]);
                arg.push(best as u32);
            }
        }
    }
    (y, arg)
}

pub(crate) fn pool_backward<T: Real>(dy: &[T], arg: &[u32], input_len: usize) -> Vec<T> {
    let mut dx = vec![T::zero(); input_len];
    for (&g, &i) in dy.iter().zip(arg) {
        dx[i as usize] += g;
    }
    dx
}

/// `y = x W^T + b` with `x: N x F`, `W: O x F`.
pub(crate) fn dense_forward<T: Real>(x: &[T], n: usize, f: usize, weights: &[T], bias: &[T]) -> Vec<T> {
    let o = bias.len();
    let mut y = Vec::with_capacity(n * o);
    for _ in 0..n {
        y.extend_from_slice(bias);
    }
    matmul(Mat::new(x, n, f), Mat::t(weights, f, o), T::one(), &mut y);
    y
}

/// Returns (dW, db, dx).
pub(crate) fn dense_backward<T: Real>(
    dy: &[T],
    x: &[T],
    n: usize,
    f: usize,
    weights: &[T],
    o: usize,
) -> (Vec<T>, Vec<T>, Vec<T>) {
    let mut dw = vec![T::zero(); o * f];
    matmul(Mat::t(dy, o, n), Mat::new(x, n, f), T::zero(), &mut dw);
    let mut db = vec![T::zero(); o];
    for row in dy.chunks_exact(o) {
        for (d, &v) in db.iter_mut().zip(row) {
            *d += v;
        }
    }
    let mut dx = vec![T::zero(); n * f];
    matmul(Mat::new(dy, n, o), Mat::new(weights, o, f), T::zero(), &mut dx);
    (dw, db, dx)
}

pub(crate) fn relu_forward<T: Real>(x: &[T]) -> Vec<T> {
    x.iter().map(|&v| if v > T::zero() { v } else { T::zero() }).collect()
}

/// Uses the forward output: the gradient passes where the output is positive.
pub(crate) fn relu_backward<T: Real>(dy: &[T], y: &[T]) -> Vec<T> {
    dy.iter()
        .zip(y)
        .map(|(&g, &v)| if v > T::zero() { g } else { T::zero() })
        .collect()
}

/// Row-wise softmax with the usual max shift.
pub fn softmax<T: Real>(logits: &[T], classes: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(logits.len());
    for row in logits.chunks_exact(classes) {
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        let e: Vec<T> = row.iter().map(|&v| (v - m).exp()).collect();
        let mut s = T::zero();
        for &v in &e {
            s += v;
        }
        out.extend(e.into_iter().map(|v| v / s));
    }
    out
}

/// Mean cross-entropy and its gradient with respect to the logits,
/// `(softmax - onehot) / N`.
pub(crate) fn softmax_cross_entropy<T: Real>(logits: &[T], labels: &[usize], classes: usize) -> (T, Vec<T>) {
    let n = labels.len();
    let inv_n = T::from_f64(1.0 / n as f64);
    let mut grad = softmax(logits, classes);
    let mut loss = 0.0f64;
    for (i, &l) in labels.iter().enumerate() {
        let row = &logits[i * classes..][..classes];
        let m = row.iter().copied().fold(T::neg_infinity(), T::max).as_f64();
        let lse = m + row.iter().map(|v| (v.as_f64() - m).exp()).sum::<f64>().ln();
        loss += lse - row[l].as_f64();
        grad[i * classes + l] -= T::one();
    }
    for g in &mut grad {
        *g *= inv_n;
    }
    (T::from_f64(loss / n as f64), grad)
}
