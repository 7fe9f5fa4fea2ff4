//! Feedforward ReLU network with a flat parameter vector, batched forward
//! and backward passes, optional layer normalization and dropout.
//!
//! Parameters of layer `l` are laid out as `W` (column-major, out×in), then
//! `b`, then for normalized hidden layers `gain` and `shift`.

use nalgebra::{DMatrix, DMatrixView, DVector, DVectorView};
use rand::Rng;

use crate::bandit::Observation;
use crate::error::{Error, Result};

const LAYER_NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerLayout {
    fan_in: usize,
    fan_out: usize,
    weights: usize,
    bias: usize,
    /// Offsets of gain and shift when the layer is normalized.
    norm: Option<(usize, usize)>,
}

/// Layer sizes and parameter layout. Parameters live outside so the same
/// architecture can evaluate perturbed or sampled weight vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    input: usize,
    hidden: Vec<usize>,
    output: usize,
    layer_norm: bool,
    layers: Vec<LayerLayout>,
    num_params: usize,
}

impl Architecture {
    pub fn new(input: usize, hidden: &[usize], output: usize, layer_norm: bool) -> Result<Self> {
        if input == 0 || output == 0 || hidden.contains(&0) {
            return Err(Error::param("network layer widths must be positive"));
        }
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut offset = 0;
        let mut fan_in = input;
        for (i, &fan_out) in hidden.iter().chain(std::iter::once(&output)).enumerate() {
            let weights = offset;
            let bias = weights + fan_in * fan_out;
            offset = bias + fan_out;
            let norm = if layer_norm && i < hidden.len() {
                let gain = offset;
                offset += 2 * fan_out;
                Some((gain, gain + fan_out))
            } else {
                None
            };
            layers.push(LayerLayout {
                fan_in,
                fan_out,
                weights,
                bias,
                norm,
            });
            fan_in = fan_out;
        }
        Ok(Architecture {
            input,
            hidden: hidden.to_vec(),
            output,
            layer_norm,
            layers,
            num_params: offset,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input
    }
    pub fn output_dim(&self) -> usize {
        self.output
    }
    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }
    pub fn has_layer_norm(&self) -> bool {
        self.layer_norm
    }
    pub fn num_params(&self) -> usize {
        self.num_params
    }
    /// Width of the last hidden layer (the representation).
    pub fn representation_dim(&self) -> usize {
        *self.hidden.last().unwrap_or(&self.input)
    }

    /// Glorot-uniform weights, zero biases, unit gains and zero shifts.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut params = vec![0.0; self.num_params];
        for layer in &self.layers {
            let limit = (6.0 / (layer.fan_in + layer.fan_out) as f64).sqrt();
            for w in &mut params[layer.weights..layer.bias] {
                *w = rng.random_range(-limit..limit);
            }
            if let Some((gain, shift)) = layer.norm {
                params[gain..shift].fill(1.0);
            }
        }
        params
    }

    fn weights<'a>(&self, params: &'a [f64], layer: &LayerLayout) -> DMatrixView<'a, f64> {
        DMatrixView::from_slice(
            &params[layer.weights..layer.bias],
            layer.fan_out,
            layer.fan_in,
        )
    }

    fn vector<'a>(&self, params: &'a [f64], offset: usize, len: usize) -> DVectorView<'a, f64> {
        DVectorView::from_slice(&params[offset..offset + len], len)
    }

    /// Runs the network on the columns of `inputs` (d×B).
    pub fn forward(
        &self,
        params: &[f64],
        inputs: &DMatrix<f64>,
        masks: Option<&DropoutMasks>,
    ) -> ForwardPass {
        debug_assert_eq!(params.len(), self.num_params);
        debug_assert_eq!(inputs.nrows(), self.input);
        let batch = inputs.ncols();
        let mut hidden = Vec::with_capacity(self.hidden.len());
        let mut prev = inputs.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            let w = self.weights(params, layer);
            let b = self.vector(params, layer.bias, layer.fan_out);
            let mut z = w * &prev;
            for mut col in z.column_iter_mut() {
                col += &b;
            }
            if l == self.hidden.len() {
                return ForwardPass {
                    input: inputs.clone(),
                    hidden,
                    output: z,
                };
            }
            let norm = layer.norm.map(|(gain, shift)| {
                let gain = self.vector(params, gain, layer.fan_out);
                let shift = self.vector(params, shift, layer.fan_out);
                let mut normalized = z.clone();
                let mut inv_std = DVector::zeros(batch);
                for (j, mut col) in normalized.column_iter_mut().enumerate() {
                    let mean = col.mean();
                    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64;
                    let s = 1.0 / (var + LAYER_NORM_EPS).sqrt();
                    col.apply(|v| *v = (*v - mean) * s);
                    inv_std[j] = s;
                }
                for (mut zc, nc) in z.column_iter_mut().zip(normalized.column_iter()) {
                    zc.copy_from(&(nc.component_mul(&gain) + &shift));
                }
                NormCache {
                    normalized,
                    inv_std,
                }
            });
            let mut activation = z.map(|v| v.max(0.0));
            if let Some(masks) = masks {
                activation.component_mul_assign(&masks.layers[l]);
            }
            hidden.push(HiddenCache {
                pre_activation: z,
                norm,
                activation: activation.clone(),
            });
            prev = activation;
        }
        unreachable!("the output layer returns")
    }

    /// Predicted reward for every action at one context.
    pub fn predict(&self, params: &[f64], x: &[f64]) -> DVector<f64> {
        let pass = self.forward(params, &DMatrix::from_column_slice(x.len(), 1, x), None);
        pass.output.column(0).into_owned()
    }

    /// Last hidden activations for the columns of `inputs`.
    pub fn representation(&self, params: &[f64], inputs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut pass = self.forward(params, inputs, None);
        match pass.hidden.pop() {
            Some(h) => h.activation,
            None => inputs.clone(),
        }
    }

    /// Masked squared-error loss on the observed actions and its gradient.
    ///
    /// `loss = mean_i (output[a_i, i] - y_i)²`. Outputs of unobserved actions
    /// contribute nothing. With `fisher` set, also returns the mean over the
    /// batch of squared per-example gradients (plain networks only).
    pub fn loss_and_gradient(
        &self,
        params: &[f64],
        batch: &Batch,
        masks: Option<&DropoutMasks>,
        fisher: bool,
    ) -> Gradient {
        assert!(!batch.is_empty(), "gradient of an empty batch");
        assert!(
            !(fisher && self.layer_norm),
            "per-example Fisher is only tracked for networks without layer norm"
        );
        let n = batch.len() as f64;
        let pass = self.forward(params, &batch.inputs, masks);

        let mut loss = 0.0;
        let mut delta = DMatrix::zeros(self.output, batch.len());
        for (i, (&a, &y)) in batch.actions.iter().zip(&batch.rewards).enumerate() {
            let r = pass.output[(a, i)] - y;
            loss += r * r;
            delta[(a, i)] = 2.0 * r / n;
        }
        loss /= n;

        let mut grad = vec![0.0; self.num_params];
        let mut sq = fisher.then(|| vec![0.0; self.num_params]);

        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let prev = if l == 0 {
                &pass.input
            } else {
                &pass.hidden[l - 1].activation
            };
            // delta holds dL/dz for this layer's affine output.
            let dw = &delta * prev.transpose();
            grad[layer.weights..layer.bias].copy_from_slice(dw.as_slice());
            for (r, g) in grad[layer.bias..layer.bias + layer.fan_out].iter_mut().enumerate() {
                *g = delta.row(r).sum();
            }
            if let Some(sq) = sq.as_mut() {
                // Per-example gradient of W is (n·δ_i) a_iᵀ; the batch mean of
                // its square is n · (δ∘δ)(a∘a)ᵀ.
                let d2 = delta.map(|v| v * v);
                let a2 = prev.map(|v| v * v);
                let sw = (&d2 * a2.transpose()) * n;
                sq[layer.weights..layer.bias].copy_from_slice(sw.as_slice());
                for (r, s) in sq[layer.bias..layer.bias + layer.fan_out].iter_mut().enumerate() {
                    *s = d2.row(r).sum() * n;
                }
            }
            if l == 0 {
                break;
            }

            // Back through the previous hidden layer.
            let w = self.weights(params, layer).transpose();
            let mut d_act = w * &delta;
            let below = &pass.hidden[l - 1];
            let below_layout = &self.layers[l - 1];
            if let Some(masks) = masks {
                d_act.component_mul_assign(&masks.layers[l - 1]);
            }
            d_act.zip_apply(&below.pre_activation, |d, z| {
                if z <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = match (&below.norm, below_layout.norm) {
                (Some(cache), Some((gain_off, shift_off))) => {
                    let gain = self.vector(params, gain_off, below_layout.fan_out);
                    let fan = below_layout.fan_out;
                    for r in 0..fan {
                        let row_y = d_act.row(r);
                        grad[gain_off + r] = row_y.dot(&cache.normalized.row(r));
                        grad[shift_off + r] = row_y.sum();
                    }
                    let mut d_norm = d_act;
                    for mut col in d_norm.column_iter_mut() {
                        col.component_mul_assign(&gain);
                    }
                    let mut dz = DMatrix::zeros(fan, d_norm.ncols());
                    for j in 0..d_norm.ncols() {
                        let g = d_norm.column(j);
                        let xh = cache.normalized.column(j);
                        let mean_g = g.mean();
                        let mean_gx = g.dot(&xh) / fan as f64;
                        let s = cache.inv_std[j];
                        for r in 0..fan {
                            dz[(r, j)] = s * (g[r] - mean_g - xh[r] * mean_gx);
                        }
                    }
                    dz
                }
                _ => d_act,
            };
        }

        Gradient {
            loss,
            grad,
            fisher: sq,
        }
    }
}

#[derive(Debug, Clone)]
struct NormCache {
    normalized: DMatrix<f64>,
    inv_std: DVector<f64>,
}

#[derive(Debug, Clone)]
struct HiddenCache {
    /// Input to the ReLU (after normalization when enabled).
    pre_activation: DMatrix<f64>,
    norm: Option<NormCache>,
    activation: DMatrix<f64>,
}

/// Intermediate values of a batched forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    input: DMatrix<f64>,
    hidden: Vec<HiddenCache>,
    pub output: DMatrix<f64>,
}

impl ForwardPass {
    pub fn hidden_activation(&self, layer: usize) -> &DMatrix<f64> {
        &self.hidden[layer].activation
    }
}

/// Inverted-dropout masks: each entry is 0 or `1 / p_keep`.
#[derive(Debug, Clone)]
pub struct DropoutMasks {
    layers: Vec<DMatrix<f64>>,
}

impl DropoutMasks {
    pub fn sample<R: Rng + ?Sized>(arch: &Architecture, batch: usize, p_keep: f64, rng: &mut R) -> Self {
        let scale = 1.0 / p_keep;
        let layers = arch
            .hidden
            .iter()
            .map(|&h| {
                DMatrix::from_fn(h, batch, |_, _| {
                    if rng.random::<f64>() < p_keep {
                        scale
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        DropoutMasks { layers }
    }
}

/// Loss value, gradient and optional per-example squared-gradient mean.
#[derive(Debug, Clone)]
pub struct Gradient {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub fisher: Option<Vec<f64>>,
}

/// Training examples as columns of an input matrix.
#[derive(Debug, Clone)]
pub struct Batch {
    pub inputs: DMatrix<f64>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
}

impl Batch {
    pub fn from_observations<'a>(dim: usize, obs: impl IntoIterator<Item = &'a Observation>) -> Self {
        let obs: Vec<&Observation> = obs.into_iter().collect();
        let mut inputs = DMatrix::zeros(dim, obs.len());
        for (j, o) in obs.iter().enumerate() {
            inputs.column_mut(j).copy_from_slice(o.context.as_slice());
        }
        Batch {
            inputs,
            actions: obs.iter().map(|o| o.action).collect(),
            rewards: obs.iter().map(|o| o.reward).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// A network with its own parameters.
#[derive(Debug, Clone)]
pub struct Mlp {
    arch: Architecture,
    params: Vec<f64>,
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(arch: Architecture, rng: &mut R) -> Self {
        let params = arch.init_params(rng);
        Mlp { arch, params }
    }

    pub fn zeros(arch: Architecture) -> Self {
        let params = vec![0.0; arch.num_params()];
        Mlp { arch, params }
    }

    pub fn from_params(arch: Architecture, params: Vec<f64>) -> Result<Self> {
        if params.len() != arch.num_params() {
            return Err(Error::DimensionMismatch {
                expected: arch.num_params(),
                actual: params.len(),
            });
        }
        Ok(Mlp { arch, params })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }
    pub fn params(&self) -> &[f64] {
        &self.params
    }
    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn predict(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.arch.input {
            return Err(Error::DimensionMismatch {
                expected: self.arch.input,
                actual: x.len(),
            });
        }
        Ok(self.arch.predict(&self.params, x))
    }

    pub fn loss_and_gradient(&self, batch: &Batch, masks: Option<&DropoutMasks>) -> Gradient {
        self.arch.loss_and_gradient(&self.params, batch, masks, false)
    }
}
