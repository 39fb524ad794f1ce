//! Dense row-major tensors and the layer kernels built on them.
//!
//! Image-like tensors use `H×W×C` layout, convolution kernels `Kh×Kw×Cin×Cout`
//! and dense weights `N×M`. Convolutions are valid-padded with stride 1;
//! pooling uses a 2×2 window with stride 2.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::Dimension(format!("shape {shape:?} has a zero axis")));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Dimension(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, T::zero())
    }

    pub fn full(shape: &[usize], value: T) -> Self {
        assert!(shape.iter().all(|&d| d > 0), "shape {shape:?} has a zero axis");
        let len = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![value; len],
        }
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(usize) -> T) -> Self {
        assert!(shape.iter().all(|&d| d > 0), "shape {shape:?} has a zero axis");
        let len: usize = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: (0..len).map(&mut f).collect(),
        }
    }

    pub fn vector(data: Vec<T>) -> Self {
        let n = data.len();
        Self::new(vec![n], data).expect("non-empty vector")
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn reshape(self, shape: &[usize]) -> Result<Self> {
        Self::new(shape.to_vec(), self.data)
    }

    fn offset(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.shape.len(), "index rank");
        index.iter().zip(&self.shape).fold(0, |acc, (&i, &d)| {
            assert!(i < d, "index {index:?} out of bounds for {:?}", self.shape);
            acc * d + i
        })
    }

    pub fn get(&self, index: &[usize]) -> T {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: T) {
        let o = self.offset(index);
        self.data[o] = value;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| U::of(v.to_f64_lossless())).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sum_squares(&self) -> T {
        self.data.iter().map(|&v| v * v).sum()
    }

    /// Elementwise `self += other * scale`.
    pub fn add_scaled(&mut self, other: &Tensor<T>, scale: T) {
        assert_eq!(self.shape, other.shape, "add_scaled shape");
        axpy(&mut self.data, scale, &other.data);
    }

    pub fn fill(&mut self, value: T) {
        self.data.iter_mut().for_each(|v| *v = value);
    }
}

/// `y += a * x`.
#[inline]
pub(crate) fn axpy<T: Scalar>(y: &mut [T], a: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

/// Dot product with eight independent partial sums. The fixed reduction
/// order keeps results deterministic while letting the compiler vectorise.
#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] = acc[l] + x[l] * y[l];
        }
    }
    let mut tail = T::zero();
    for (&x, &y) in ra.iter().zip(rb) {
        tail = tail + x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

fn expect_rank<T: Scalar>(t: &Tensor<T>, rank: usize, what: &str) -> Result<()> {
    if t.rank() != rank {
        return Err(Error::Dimension(format!(
            "{what} must have rank {rank}, got shape {:?}",
            t.shape()
        )));
    }
    Ok(())
}

/// Valid-padded, stride-1 2-D convolution.
pub fn conv2d_forward<T: Scalar>(
    input: &Tensor<T>,
    kernels: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    expect_rank(input, 3, "conv input")?;
    expect_rank(kernels, 4, "conv kernels")?;
    expect_rank(bias, 1, "conv bias")?;
    let (h, w, cin) = (input.shape[0], input.shape[1], input.shape[2]);
    let (kh, kw, kcin, cout) = (
        kernels.shape[0],
        kernels.shape[1],
        kernels.shape[2],
        kernels.shape[3],
    );
    if kcin != cin {
        return Err(Error::Dimension(format!(
            "conv input channel axis is {cin} but kernel input-channel axis is {kcin}"
        )));
    }
    if bias.shape[0] != cout {
        return Err(Error::Dimension(format!(
            "conv bias axis is {} but kernel output-channel axis is {cout}",
            bias.shape[0]
        )));
    }
    if h < kh || w < kw {
        return Err(Error::Dimension(format!(
            "conv input height/width {h}×{w} smaller than kernel {kh}×{kw}"
        )));
    }
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    let mut out = vec![T::zero(); oh * ow * cout];
    let row_span = kw * cin;
    for y in 0..oh {
        for x in 0..ow {
            let o = &mut out[(y * ow + x) * cout..][..cout];
            o.copy_from_slice(&bias.data);
            for dy in 0..kh {
                let patch = &input.data[((y + dy) * w + x) * cin..][..row_span];
                let krows = &kernels.data[dy * row_span * cout..][..row_span * cout];
                for (j, &v) in patch.iter().enumerate() {
                    axpy(o, v, &krows[j * cout..][..cout]);
                }
            }
        }
    }
    Tensor::new(vec![oh, ow, cout], out)
}

/// Gradients of a convolution with respect to its input (optional), kernels
/// and bias, given the gradient at its output.
pub struct ConvGrads<T> {
    pub input: Option<Tensor<T>>,
    pub kernels: Tensor<T>,
    pub bias: Tensor<T>,
}

pub fn conv2d_backward<T: Scalar>(
    input: &Tensor<T>,
    kernels: &Tensor<T>,
    grad_out: &Tensor<T>,
    want_input_grad: bool,
) -> Result<ConvGrads<T>> {
    let mut gk = Tensor::zeros(kernels.shape());
    let mut gb = Tensor::zeros(&[kernels.shape()[3]]);
    let mut gi = want_input_grad.then(|| Tensor::zeros(input.shape()));
    conv2d_backward_into(input, kernels, grad_out, gi.as_mut(), &mut gk, &mut gb)?;
    Ok(ConvGrads {
        input: gi,
        kernels: gk,
        bias: gb,
    })
}

/// Accumulating form of [`conv2d_backward`]: parameter gradients are added to
/// `grad_kernels`/`grad_bias`, the input gradient (if requested) is added to
/// `grad_input`.
pub fn conv2d_backward_into<T: Scalar>(
    input: &Tensor<T>,
    kernels: &Tensor<T>,
    grad_out: &Tensor<T>,
    grad_input: Option<&mut Tensor<T>>,
    grad_kernels: &mut Tensor<T>,
    grad_bias: &mut Tensor<T>,
) -> Result<()> {
    expect_rank(input, 3, "conv input")?;
    expect_rank(kernels, 4, "conv kernels")?;
    expect_rank(grad_out, 3, "conv output gradient")?;
    let (w, cin) = (input.shape[1], input.shape[2]);
    let (kh, kw, cout) = (kernels.shape[0], kernels.shape[1], kernels.shape[3]);
    let (oh, ow) = (grad_out.shape[0], grad_out.shape[1]);
    if input.shape[0] + 1 != oh + kh || w + 1 != ow + kw || grad_out.shape[2] != cout {
        return Err(Error::Dimension(format!(
            "conv output gradient {:?} inconsistent with input {:?} and kernels {:?}",
            grad_out.shape, input.shape, kernels.shape
        )));
    }
    let row_span = kw * cin;
    let mut grad_input = grad_input;
    for y in 0..oh {
        for x in 0..ow {
            let g = &grad_out.data[(y * ow + x) * cout..][..cout];
            axpy(&mut grad_bias.data, T::one(), g);
            for dy in 0..kh {
                let base = ((y + dy) * w + x) * cin;
                let patch = &input.data[base..][..row_span];
                let gk = &mut grad_kernels.data[dy * row_span * cout..][..row_span * cout];
                for (j, &v) in patch.iter().enumerate() {
                    axpy(&mut gk[j * cout..][..cout], v, g);
                }
                if let Some(gi) = grad_input.as_deref_mut() {
                    let krows = &kernels.data[dy * row_span * cout..][..row_span * cout];
                    let gi = &mut gi.data[base..][..row_span];
                    for (j, slot) in gi.iter_mut().enumerate() {
                        *slot = *slot + dot(&krows[j * cout..][..cout], g);
                    }
                }
            }
        }
    }
    Ok(())
}

/// Output of 2×2/stride-2 max pooling plus the flat input index of each
/// selected maximum.
#[derive(Clone, Debug)]
pub struct Pooled<T> {
    pub output: Tensor<T>,
    pub argmax: Vec<usize>,
}

pub fn maxpool2d_forward<T: Scalar>(input: &Tensor<T>) -> Result<Pooled<T>> {
    expect_rank(input, 3, "pool input")?;
    let (h, w, c) = (input.shape[0], input.shape[1], input.shape[2]);
    if h < 2 || w < 2 {
        return Err(Error::Dimension(format!(
            "pool input height/width {h}×{w} below the 2×2 window"
        )));
    }
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(oh * ow * c);
    let mut argmax = Vec::with_capacity(oh * ow * c);
    for y in 0..oh {
        for x in 0..ow {
            for ch in 0..c {
                let mut best = ((2 * y) * w + 2 * x) * c + ch;
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let idx = ((2 * y + dy) * w + 2 * x + dx) * c + ch;
                    // strict comparison keeps the first maximum in scan order
                    if input.data[idx] > input.data[best] {
                        best = idx;
                    }
                }
                out.push(input.data[best]);
                argmax.push(best);
            }
        }
    }
    Ok(Pooled {
        output: Tensor::new(vec![oh, ow, c], out)?,
        argmax,
    })
}

pub fn maxpool2d_backward<T: Scalar>(
    input_shape: &[usize],
    argmax: &[usize],
    grad_out: &Tensor<T>,
) -> Result<Tensor<T>> {
    if argmax.len() != grad_out.len() {
        return Err(Error::Dimension(format!(
            "pool output gradient has {} values but {} argmax indices",
            grad_out.len(),
            argmax.len()
        )));
    }
    let mut gi = Tensor::zeros(input_shape);
    for (&idx, &g) in argmax.iter().zip(&grad_out.data) {
        gi.data[idx] = gi.data[idx] + g;
    }
    Ok(gi)
}

/// `out = inputᵀ·W + b` for a vector input.
pub fn dense_forward<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    expect_rank(weights, 2, "dense weights")?;
    let (n, m) = (weights.shape[0], weights.shape[1]);
    if input.len() != n {
        return Err(Error::Dimension(format!(
            "dense input has {} values but weight row axis is {n}",
            input.len()
        )));
    }
    if bias.len() != m {
        return Err(Error::Dimension(format!(
            "dense bias has {} values but weight column axis is {m}",
            bias.len()
        )));
    }
    let mut out = bias.data.clone();
    for (i, &v) in input.data.iter().enumerate() {
        axpy(&mut out, v, &weights.data[i * m..][..m]);
    }
    Tensor::new(vec![m], out)
}

/// Accumulates dense-layer gradients; returns the input gradient when asked.
pub fn dense_backward_into<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    grad_out: &Tensor<T>,
    want_input_grad: bool,
    grad_weights: &mut Tensor<T>,
    grad_bias: &mut Tensor<T>,
) -> Result<Option<Tensor<T>>> {
    let (n, m) = (weights.shape[0], weights.shape[1]);
    if input.len() != n || grad_out.len() != m {
        return Err(Error::Dimension(format!(
            "dense gradient shapes: input {}, output gradient {}, weights {n}×{m}",
            input.len(),
            grad_out.len()
        )));
    }
    axpy(&mut grad_bias.data, T::one(), &grad_out.data);
    for (i, &v) in input.data.iter().enumerate() {
        axpy(&mut grad_weights.data[i * m..][..m], v, &grad_out.data);
    }
    if !want_input_grad {
        return Ok(None);
    }
    let gi = (0..n)
        .map(|i| dot(&weights.data[i * m..][..m], &grad_out.data))
        .collect();
    Ok(Some(Tensor::new(input.shape.clone(), gi)?))
}

pub fn relu<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| v.max(T::zero()))
}

/// Gradient through a ReLU given its output.
pub fn relu_backward<T: Scalar>(output: &Tensor<T>, grad: &mut Tensor<T>) {
    for (g, &o) in grad.data.iter_mut().zip(&output.data) {
        if o <= T::zero() {
            *g = T::zero();
        }
    }
}

/// Numerically stable softmax over a vector.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Tensor<T> {
    let max = logits
        .data
        .iter()
        .copied()
        .fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.data.iter().map(|&z| (z - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    Tensor {
        shape: logits.shape.clone(),
        data: exps.into_iter().map(|e| e / total).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    fn random(shape: &[usize], rng: &mut Rng) -> Tensor<f64> {
        Tensor::from_fn(shape, |_| rng.uniform_range(-1.0, 1.0))
    }

    fn naive_conv(input: &Tensor<f64>, k: &Tensor<f64>, b: &Tensor<f64>) -> Tensor<f64> {
        let (h, w, cin) = (input.shape()[0], input.shape()[1], input.shape()[2]);
        let (kh, kw, cout) = (k.shape()[0], k.shape()[1], k.shape()[3]);
        let (oh, ow) = (h - kh + 1, w - kw + 1);
        let mut out = Tensor::zeros(&[oh, ow, cout]);
        for y in 0..oh {
            for x in 0..ow {
                for co in 0..cout {
                    let mut s = b.get(&[co]);
                    for dy in 0..kh {
                        for dx in 0..kw {
                            for ci in 0..cin {
                                s += input.get(&[y + dy, x + dx, ci]) * k.get(&[dy, dx, ci, co]);
                            }
                        }
                    }
                    out.set(&[y, x, co], s);
                }
            }
        }
        out
    }

    fn naive_pool(input: &Tensor<f64>) -> Tensor<f64> {
        let (h, w, c) = (input.shape()[0], input.shape()[1], input.shape()[2]);
        let mut out = Tensor::zeros(&[h / 2, w / 2, c]);
        for y in 0..h / 2 {
            for x in 0..w / 2 {
                for ch in 0..c {
                    let mut m = f64::NEG_INFINITY;
                    for dy in 0..2 {
                        for dx in 0..2 {
                            m = m.max(input.get(&[2 * y + dy, 2 * x + dx, ch]));
                        }
                    }
                    out.set(&[y, x, ch], m);
                }
            }
        }
        out
    }

    fn assert_close(a: &Tensor<f64>, b: &Tensor<f64>, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn new_rejects_length_mismatch() {
        assert!(Tensor::<f64>::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::<f64>::new(vec![2, 0], vec![]).is_err());
    }

    #[test]
    fn conv_rice_first_layer_shape() {
        let x = Tensor::<f32>::zeros(&[50, 50, 3]);
        let k = Tensor::zeros(&[3, 3, 3, 32]);
        let b = Tensor::zeros(&[32]);
        assert_eq!(conv2d_forward(&x, &k, &b).unwrap().shape(), &[48, 48, 32]);
    }

    #[test]
    fn conv_identity_case() {
        let x = Tensor::new(vec![1, 1, 1], vec![2.5]).unwrap();
        let k = Tensor::new(vec![1, 1, 1, 1], vec![-3.0]).unwrap();
        let b = Tensor::vector(vec![0.75]);
        let out = conv2d_forward(&x, &k, &b).unwrap();
        assert_eq!(out.data(), &[-3.0 * 2.5 + 0.75]);
    }

    #[test]
    fn conv_matches_naive_loops() {
        let mut rng = Rng::new(11);
        let x = random(&[5, 5, 2], &mut rng);
        let k = random(&[3, 3, 2, 4], &mut rng);
        let b = random(&[4], &mut rng);
        assert_close(&conv2d_forward(&x, &k, &b).unwrap(), &naive_conv(&x, &k, &b), 1e-12);
    }

    #[test]
    fn conv_shape_errors_name_axes() {
        let x = Tensor::<f64>::zeros(&[5, 5, 2]);
        let k = Tensor::zeros(&[3, 3, 3, 4]);
        let b = Tensor::zeros(&[4]);
        let err = conv2d_forward(&x, &k, &b).unwrap_err().to_string();
        assert!(err.contains("channel"), "{err}");
        let k = Tensor::zeros(&[3, 3, 2, 4]);
        let err = conv2d_forward(&x, &k, &Tensor::zeros(&[3])).unwrap_err().to_string();
        assert!(err.contains("bias"), "{err}");
        let small = Tensor::zeros(&[2, 5, 2]);
        assert!(conv2d_forward(&small, &k, &b).is_err());
    }

    #[test]
    fn pool_shapes_and_constant() {
        let x = Tensor::<f32>::full(&[48, 48, 32], 0.3);
        let p = maxpool2d_forward(&x).unwrap();
        assert_eq!(p.output.shape(), &[24, 24, 32]);
        assert!(p.output.data().iter().all(|&v| v == 0.3));
        let odd = Tensor::<f32>::zeros(&[11, 7, 1]);
        assert_eq!(maxpool2d_forward(&odd).unwrap().output.shape(), &[5, 3, 1]);
    }

    #[test]
    fn pool_matches_window_scan() {
        let mut rng = Rng::new(5);
        let x = random(&[6, 6, 1], &mut rng);
        let p = maxpool2d_forward(&x).unwrap();
        assert_eq!(p.output, naive_pool(&x));
        for (&i, &v) in p.argmax.iter().zip(p.output.data()) {
            assert_eq!(x.data()[i], v);
        }
    }

    #[test]
    fn dense_shapes_identity_and_oracle() {
        let x = Tensor::<f32>::zeros(&[7744]);
        let w = Tensor::zeros(&[7744, 32]);
        let b = Tensor::zeros(&[32]);
        assert_eq!(dense_forward(&x, &w, &b).unwrap().shape(), &[32]);

        let x = Tensor::vector(vec![1.0, -2.0, 3.5]);
        let eye = Tensor::from_fn(&[3, 3], |i| if i % 4 == 0 { 1.0 } else { 0.0 });
        let out = dense_forward(&x, &eye, &Tensor::zeros(&[3])).unwrap();
        assert_eq!(out.data(), x.data());

        let mut rng = Rng::new(9);
        let x = random(&[8], &mut rng);
        let w = random(&[8, 3], &mut rng);
        let b = random(&[3], &mut rng);
        let out = dense_forward(&x, &w, &b).unwrap();
        for m in 0..3 {
            let mut s = b.get(&[m]);
            for n in 0..8 {
                s += x.get(&[n]) * w.get(&[n, m]);
            }
            assert!((out.get(&[m]) - s).abs() < 1e-12);
        }
        assert!(dense_forward(&Tensor::zeros(&[7]), &w, &b).is_err());
    }

    #[test]
    fn relu_and_softmax_examples() {
        let r = relu(&Tensor::vector(vec![-2.0, 0.0, 3.0]));
        assert_eq!(r.data(), &[0.0, 0.0, 3.0]);
        let s = softmax(&Tensor::vector(vec![1.7f64; 5]));
        for &p in s.data() {
            assert!((p - 0.2).abs() < 1e-15);
        }
        let big = softmax(&Tensor::vector(vec![1000.0f64, 0.0, -1000.0]));
        assert!(big.is_finite());
    }

    #[test]
    fn dot_matches_sequential_sum() {
        let mut rng = Rng::new(3);
        for n in [0, 1, 7, 8, 9, 31, 64, 100] {
            let a: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            let s: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            assert!((dot(&a, &b) - s).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kernels_match_oracles_on_small_shapes(
            h in 3usize..=8, w in 3usize..=8, cin in 1usize..=3, cout in 1usize..=3,
            kh in 1usize..=3, kw in 1usize..=3, seed in any::<u64>(),
        ) {
            let mut rng = Rng::new(seed);
            let x = random(&[h, w, cin], &mut rng);
            let k = random(&[kh, kw, cin, cout], &mut rng);
            let b = random(&[cout], &mut rng);
            assert_close(&conv2d_forward(&x, &k, &b).unwrap(), &naive_conv(&x, &k, &b), 1e-12);
            prop_assert_eq!(maxpool2d_forward(&x).unwrap().output, naive_pool(&x));
        }

        #[test]
        fn conv_is_linear_without_bias(a in -3.0f64..3.0, c in -3.0f64..3.0, seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            let x1 = random(&[6, 5, 2], &mut rng);
            let x2 = random(&[6, 5, 2], &mut rng);
            let k = random(&[3, 3, 2, 3], &mut rng);
            let zero = Tensor::zeros(&[3]);
            let mut mix = x1.clone();
            mix.data_mut().iter_mut().zip(x2.data()).for_each(|(m, &v)| *m = a * *m + c * v);
            let lhs = conv2d_forward(&mix, &k, &zero).unwrap();
            let y1 = conv2d_forward(&x1, &k, &zero).unwrap();
            let y2 = conv2d_forward(&x2, &k, &zero).unwrap();
            for ((l, p), q) in lhs.data().iter().zip(y1.data()).zip(y2.data()) {
                prop_assert!((l - (a * p + c * q)).abs() < 1e-10);
            }
        }

        #[test]
        fn softmax_is_shift_invariant_probability(
            z in proptest::collection::vec(-20.0f64..20.0, 2..10), c in -50.0f64..50.0,
        ) {
            let p = softmax(&Tensor::vector(z.clone()));
            let q = softmax(&Tensor::vector(z.iter().map(|v| v + c).collect()));
            let total: f64 = p.data().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            for (a, b) in p.data().iter().zip(q.data()) {
                prop_assert!(*a > 0.0 && *a < 1.0);
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
