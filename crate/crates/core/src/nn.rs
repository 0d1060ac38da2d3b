//! Fixed-graph MLP: ReLU hidden layers, linear output, softmax cross-entropy.
//!
//! Parameters are stored as `(weight, bias)` pairs with `weight` shaped
//! `fan_in x fan_out` and `bias` shaped `1 x fan_out`, so a batch flows as
//! `h_next = relu(h · W + b)`. Gradients share the exact same structure,
//! which lets the federation engine treat models, deltas and momenta as
//! one vector space.

use std::io::{Read, Write};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::seed::Rng;
use crate::tensor::Tensor2;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Tensor2,
    pub bias: Tensor2,
}

impl Layer {
    pub fn fan_in(&self) -> usize {
        self.weight.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    layers: Vec<Layer>,
}

/// Gradients, deltas and momenta live in the same space as the model.
pub type Gradient = ModelParams;

impl ModelParams {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Dimension("model needs at least one layer".into()));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.bias.rows() != 1 || layer.bias.cols() != layer.fan_out() {
                return Err(Error::Dimension(format!(
                    "layer {i}: bias {:?} for weight {:?}",
                    layer.bias.shape(),
                    layer.weight.shape()
                )));
            }
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].fan_out() != pair[1].fan_in() {
                return Err(Error::Dimension(format!(
                    "layer {i} outputs {} but layer {} expects {}",
                    pair[0].fan_out(),
                    i + 1,
                    pair[1].fan_in()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// All-zero parameters for the given layer widths (`[input, hidden.., classes]`).
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Dimension("need input and output widths".into()));
        }
        let layers = sizes
            .windows(2)
            .map(|w| Layer {
                weight: Tensor2::zeros(w[0], w[1]),
                bias: Tensor2::zeros(1, w[1]),
            })
            .collect();
        Self::new(layers)
    }

    /// Per-layer uniform init in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn init(sizes: &[usize], rng: &mut Rng) -> Result<Self> {
        let mut model = Self::zeros(sizes)?;
        for layer in &mut model.layers {
            let bound = 1.0 / (layer.fan_in() as f64).sqrt();
            for v in layer.weight.data_mut() {
                *v = rng.random_range(-bound..=bound);
            }
            for v in layer.bias.data_mut() {
                *v = rng.random_range(-bound..=bound);
            }
        }
        Ok(model)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    weight: Tensor2::zeros(l.weight.rows(), l.weight.cols()),
                    bias: Tensor2::zeros(1, l.bias.cols()),
                })
                .collect(),
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].fan_out()
    }

    /// Layer widths `[input, hidden.., output]`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_dim()];
        sizes.extend(self.layers.iter().map(Layer::fan_out));
        sizes
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.data().len() + l.bias.data().len())
            .sum()
    }

    pub fn same_shape(&self, other: &ModelParams) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.weight.shape() == b.weight.shape() && a.bias.shape() == b.bias.shape()
            })
    }

    fn check_congruent(&self, other: &ModelParams) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "parameter shapes {:?} vs {:?}",
                self.sizes(),
                other.sizes()
            )))
        }
    }

    fn tensors(&self) -> impl Iterator<Item = &Tensor2> {
        self.layers.iter().flat_map(|l| [&l.weight, &l.bias])
    }

    fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor2> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
    }

    /// Flat view in layer order (weight then bias).
    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors()
            .flat_map(|t| t.data().iter().copied())
            .collect()
    }

    pub fn flat_get(&self, mut index: usize) -> f64 {
        for t in self.tensors() {
            if index < t.data().len() {
                return t.data()[index];
            }
            index -= t.data().len();
        }
        panic!("flat index out of range");
    }

    pub fn flat_set(&mut self, mut index: usize, value: f64) {
        for t in self.tensors_mut() {
            let len = t.data().len();
            if index < len {
                t.data_mut()[index] = value;
                return;
            }
            index -= len;
        }
        panic!("flat index out of range");
    }

    /// `self += a · x`.
    pub fn axpy_inplace(&mut self, a: f64, x: &ModelParams) -> Result<()> {
        self.check_congruent(x)?;
        for (y, xt) in self.tensors_mut().zip(x.tensors()) {
            y.axpy_inplace(a, xt)?;
        }
        Ok(())
    }

    pub fn scale_inplace(&mut self, a: f64) {
        for t in self.tensors_mut() {
            t.scale_inplace(a);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale_inplace(a);
        out
    }

    /// `self - other`.
    pub fn sub(&self, other: &ModelParams) -> Result<Self> {
        let mut out = self.clone();
        out.axpy_inplace(-1.0, other)?;
        Ok(out)
    }

    pub fn norm_l2(&self) -> f64 {
        self.tensors()
            .flat_map(|t| t.data().iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().all(Tensor2::is_finite)
    }

    /// Little-endian checkpoint: `u32` layer count, then `u32` rows/cols for
    /// each layer's weight and bias, then every value as `f64` in layer order.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&(self.layers.len() as u32).to_le_bytes())?;
        for t in self.tensors() {
            w.write_all(&(t.rows() as u32).to_le_bytes())?;
            w.write_all(&(t.cols() as u32).to_le_bytes())?;
        }
        for t in self.tensors() {
            for v in t.data() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Self> {
        fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
            let mut buf = [0u8; 4];
            r.read_exact(&mut buf)
                .map_err(|e| Error::Serialization(format!("checkpoint header: {e}")))?;
            Ok(u32::from_le_bytes(buf))
        }
        let count = read_u32(&mut r)? as usize;
        let mut shapes = Vec::with_capacity(count * 2);
        for _ in 0..count * 2 {
            let rows = read_u32(&mut r)? as usize;
            let cols = read_u32(&mut r)? as usize;
            shapes.push((rows, cols));
        }
        let mut tensors = Vec::with_capacity(shapes.len());
        for (rows, cols) in shapes {
            let mut data = vec![0.0; rows * cols];
            let mut buf = [0u8; 8];
            for v in &mut data {
                r.read_exact(&mut buf)
                    .map_err(|e| Error::Serialization(format!("checkpoint body: {e}")))?;
                *v = f64::from_le_bytes(buf);
            }
            tensors.push(Tensor2::from_vec(rows, cols, data)?);
        }
        let mut it = tensors.into_iter();
        let mut layers = Vec::with_capacity(count);
        while let (Some(weight), Some(bias)) = (it.next(), it.next()) {
            layers.push(Layer { weight, bias });
        }
        Self::new(layers)
    }
}

/// Returns `a · x + y`.
pub fn axpy(a: f64, x: &ModelParams, y: &ModelParams) -> Result<ModelParams> {
    let mut out = y.clone();
    out.axpy_inplace(a, x)?;
    Ok(out)
}

/// Pre-activations and post-ReLU activations of every layer for one batch.
#[derive(Debug, Clone)]
pub struct Trace {
    /// `pre[l]` is `h_{l-1} · W_l + b_l`; the last entry holds the logits.
    pub pre: Vec<Tensor2>,
    /// `post[l]` is `relu(pre[l])` for hidden layers only.
    pub post: Vec<Tensor2>,
}

impl Trace {
    pub fn logits(&self) -> &Tensor2 {
        &self.pre[self.pre.len() - 1]
    }
}

pub fn forward_trace(model: &ModelParams, batch_x: &Tensor2) -> Result<Trace> {
    if batch_x.cols() != model.input_dim() {
        return Err(Error::Dimension(format!(
            "batch has {} features, model expects {}",
            batch_x.cols(),
            model.input_dim()
        )));
    }
    let last = model.layers.len() - 1;
    let mut pre = Vec::with_capacity(model.layers.len());
    let mut post = Vec::with_capacity(last);
    for (l, layer) in model.layers.iter().enumerate() {
        let input = if l == 0 { batch_x } else { &post[l - 1] };
        let mut z = input.matmul(&layer.weight)?;
        z.add_row_broadcast(&layer.bias)?;
        if l < last {
            let mut h = z.clone();
            h.map_inplace(|v| v.max(0.0));
            post.push(h);
        }
        pre.push(z);
    }
    Ok(Trace { pre, post })
}

/// Logits for a batch.
pub fn forward(model: &ModelParams, batch_x: &Tensor2) -> Result<Tensor2> {
    let mut trace = forward_trace(model, batch_x)?;
    Ok(trace.pre.pop().expect("model has at least one layer"))
}

fn check_labels(labels: &[usize], rows: usize, classes: usize) -> Result<()> {
    if labels.len() != rows {
        return Err(Error::Dimension(format!(
            "{} labels for {rows} rows",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
        return Err(Error::Input(format!("label {bad} outside [0, {classes})")));
    }
    if rows == 0 {
        return Err(Error::Input("empty batch".into()));
    }
    Ok(())
}

/// Row-wise log-sum-exp with max shift.
fn log_sum_exp(row: &[f64]) -> f64 {
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Mean softmax cross-entropy of the batch.
pub fn loss(model: &ModelParams, batch_x: &Tensor2, batch_y: &[usize]) -> Result<f64> {
    let logits = forward(model, batch_x)?;
    check_labels(batch_y, logits.rows(), logits.cols())?;
    let total: f64 = (0..logits.rows())
        .map(|i| {
            let row = logits.row(i);
            log_sum_exp(row) - row[batch_y[i]]
        })
        .sum();
    Ok(total / logits.rows() as f64)
}

/// Mean softmax cross-entropy and its exact gradient.
pub fn loss_and_grad(
    model: &ModelParams,
    batch_x: &Tensor2,
    batch_y: &[usize],
) -> Result<(f64, Gradient)> {
    let trace = forward_trace(model, batch_x)?;
    let logits = trace.logits();
    let (n, classes) = logits.shape();
    check_labels(batch_y, n, classes)?;

    let inv_n = 1.0 / n as f64;
    let mut total = 0.0;
    let mut d_pre = Tensor2::zeros(n, classes);
    for i in 0..n {
        let row = logits.row(i);
        let lse = log_sum_exp(row);
        total += lse - row[batch_y[i]];
        for (c, &z) in row.iter().enumerate() {
            let p = (z - lse).exp();
            let target = if c == batch_y[i] { 1.0 } else { 0.0 };
            d_pre.set(i, c, (p - target) * inv_n);
        }
    }

    let mut grad = model.zeros_like();
    for l in (0..model.layers.len()).rev() {
        let input = if l == 0 { batch_x } else { &trace.post[l - 1] };
        grad.layers[l].weight = input.t_matmul(&d_pre)?;
        grad.layers[l].bias = d_pre.sum_rows();
        if l > 0 {
            let mut d_post = d_pre.matmul_t(&model.layers[l].weight)?;
            let pre_prev = &trace.pre[l - 1];
            for (d, &z) in d_post.data_mut().iter_mut().zip(pre_prev.data()) {
                if z <= 0.0 {
                    *d = 0.0;
                }
            }
            d_pre = d_post;
        }
    }
    Ok((total * inv_n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn tiny_model() -> ModelParams {
        // 2 -> 2 (relu) -> 2
        ModelParams::new(vec![
            Layer {
                weight: Tensor2::from_rows(&[vec![1.0, -1.0], vec![0.5, 2.0]]).unwrap(),
                bias: Tensor2::from_vec(1, 2, vec![0.1, -0.2]).unwrap(),
            },
            Layer {
                weight: Tensor2::from_rows(&[vec![2.0, 0.0], vec![-1.0, 1.0]]).unwrap(),
                bias: Tensor2::from_vec(1, 2, vec![0.0, 0.5]).unwrap(),
            },
        ])
        .unwrap()
    }

    #[test]
    fn zero_model_gives_zero_logits() {
        let model = ModelParams::zeros(&[3, 4, 5]).unwrap();
        let x = Tensor2::from_rows(&[vec![1.0, -2.0, 3.0], vec![7.0, 0.0, 1.0]]).unwrap();
        let logits = forward(&model, &x).unwrap();
        assert_eq!(logits.shape(), (2, 5));
        assert!(logits.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let model = ModelParams::new(vec![Layer {
            weight: Tensor2::identity(3),
            bias: Tensor2::zeros(1, 3),
        }])
        .unwrap();
        let x = Tensor2::from_rows(&[vec![1.5, -2.0, 0.25]]).unwrap();
        assert_eq!(forward(&model, &x).unwrap(), x);
    }

    #[test]
    fn hand_computed_forward() {
        // x = (1, 2): pre1 = (1 + 1 + 0.1, -1 + 4 - 0.2) = (2.1, 2.8), relu same.
        // logits = (2*2.1 - 2.8, 2.8 + 0.5) = (1.4, 3.3)
        let x = Tensor2::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let logits = forward(&tiny_model(), &x).unwrap();
        assert!((logits.get(0, 0) - 1.4).abs() < 1e-12);
        assert!((logits.get(0, 1) - 3.3).abs() < 1e-12);

        // x = (-1, 0): pre1 = (-0.9, 0.8) -> relu (0, 0.8); logits = (-0.8, 1.3)
        let x = Tensor2::from_rows(&[vec![-1.0, 0.0]]).unwrap();
        let logits = forward(&tiny_model(), &x).unwrap();
        assert!((logits.get(0, 0) + 0.8).abs() < 1e-12);
        assert!((logits.get(0, 1) - 1.3).abs() < 1e-12);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let x = Tensor2::zeros(1, 3);
        assert!(matches!(
            forward(&tiny_model(), &x),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn uniform_logits_give_ln_c() {
        let model = ModelParams::zeros(&[4, 7]).unwrap();
        let x = Tensor2::from_rows(&[vec![1.0; 4], vec![-3.0; 4]]).unwrap();
        let l = loss(&model, &x, &[0, 6]).unwrap();
        assert!((l - 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn confident_correct_prediction_has_near_zero_loss() {
        let model = ModelParams::new(vec![Layer {
            weight: Tensor2::from_rows(&[vec![100.0, -100.0]]).unwrap(),
            bias: Tensor2::zeros(1, 2),
        }])
        .unwrap();
        let x = Tensor2::from_rows(&[vec![1.0]]).unwrap();
        let (l, _) = loss_and_grad(&model, &x, &[0]).unwrap();
        assert!(l < 1e-80);
    }

    #[test]
    fn out_of_range_label_is_input_error() {
        let x = Tensor2::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            loss_and_grad(&tiny_model(), &x, &[2]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn large_inputs_stay_finite() {
        let mut rng = seed::rng(3);
        let model = ModelParams::init(&[5, 8, 4], &mut rng).unwrap();
        let x = Tensor2::from_vec(
            2,
            5,
            vec![1e3, -1e3, 1e3, -1e3, 1e3, 1e3, 1e3, 1e3, 1e3, 1e3],
        )
        .unwrap();
        let (l, g) = loss_and_grad(&model, &x, &[0, 3]).unwrap();
        assert!(l.is_finite());
        assert!(g.is_finite());
    }

    #[test]
    fn axpy_hand_values() {
        let x = ModelParams::new(vec![Layer {
            weight: Tensor2::from_vec(1, 1, vec![1.0]).unwrap(),
            bias: Tensor2::from_vec(1, 1, vec![2.0]).unwrap(),
        }])
        .unwrap();
        let y = ModelParams::new(vec![Layer {
            weight: Tensor2::from_vec(1, 1, vec![3.0]).unwrap(),
            bias: Tensor2::from_vec(1, 1, vec![4.0]).unwrap(),
        }])
        .unwrap();
        assert_eq!(axpy(2.0, &x, &y).unwrap().to_flat(), vec![5.0, 8.0]);
        assert_eq!(axpy(0.0, &x, &y).unwrap(), y);
        assert_eq!(axpy(1.0, &x, &x.zeros_like()).unwrap(), x);
    }

    #[test]
    fn axpy_rejects_shape_mismatch() {
        let a = ModelParams::zeros(&[2, 3]).unwrap();
        let b = ModelParams::zeros(&[3, 2]).unwrap();
        assert!(matches!(axpy(1.0, &a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn new_rejects_non_composing_layers() {
        let err = ModelParams::new(vec![
            Layer {
                weight: Tensor2::zeros(2, 3),
                bias: Tensor2::zeros(1, 3),
            },
            Layer {
                weight: Tensor2::zeros(4, 1),
                bias: Tensor2::zeros(1, 1),
            },
        ]);
        assert!(err.is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = seed::rng(11);
        let model = ModelParams::init(&[3, 5, 2], &mut rng).unwrap();
        let mut buf = Vec::new();
        model.write_checkpoint(&mut buf).unwrap();
        // header: count + 4 shape pairs
        assert_eq!(buf.len(), 4 + 4 * 8 + 8 * model.num_params());
        let back = ModelParams::read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = ModelParams::init(&[4, 6, 3], &mut seed::rng(5)).unwrap();
        let b = ModelParams::init(&[4, 6, 3], &mut seed::rng(5)).unwrap();
        assert_eq!(a, b);
        for layer in a.layers() {
            let bound = 1.0 / (layer.fan_in() as f64).sqrt();
            assert!(layer.weight.data().iter().all(|v| v.abs() <= bound));
        }
    }
}
