use rand::Rng as _;

use super::ParamVector;
use crate::error::{Error, Result};
use crate::Rng;

/// Output-layer activation. Hidden layers are always tanh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Tanh,
    Softmax,
    Sigmoid,
}

impl Activation {
    /// Checkpoint wire code.
    pub fn code(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Tanh => 1,
            Activation::Softmax => 2,
            Activation::Sigmoid => 3,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => Activation::Identity,
            1 => Activation::Tanh,
            2 => Activation::Softmax,
            3 => Activation::Sigmoid,
            _ => return Err(Error::Format(format!("unknown activation code {code}"))),
        })
    }

    /// Applies the activation in place.
    pub fn apply(self, z: &mut [f64]) {
        match self {
            Activation::Identity => {}
            Activation::Tanh => {
                for v in z.iter_mut() {
                    *v = v.tanh();
                }
            }
            Activation::Sigmoid => {
                for v in z.iter_mut() {
                    *v = 1.0 / (1.0 + (-*v).exp());
                }
            }
            Activation::Softmax => {
                let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = 0.0;
                for v in z.iter_mut() {
                    *v = (*v - max).exp();
                    sum += *v;
                }
                for v in z.iter_mut() {
                    *v /= sum;
                }
            }
        }
    }

    /// Given post-activation outputs `y` and upstream gradient `dy`,
    /// returns the gradient with respect to the pre-activation `z`.
    pub fn backward(self, y: &[f64], dy: &[f64]) -> Vec<f64> {
        match self {
            Activation::Identity => dy.to_vec(),
            Activation::Tanh => y
                .iter()
                .zip(dy)
                .map(|(&y, &g)| g * (1.0 - y * y))
                .collect(),
            Activation::Sigmoid => y.iter().zip(dy).map(|(&y, &g)| g * y * (1.0 - y)).collect(),
            Activation::Softmax => {
                let inner: f64 = y.iter().zip(dy).map(|(&y, &g)| y * g).sum();
                y.iter().zip(dy).map(|(&y, &g)| y * (g - inner)).collect()
            }
        }
    }
}

/// Multilayer perceptron with tanh hidden layers and flat parameter storage.
///
/// Parameter layout (also the checkpoint layout): for each layer, weights in
/// row-major (out_dim x in_dim) order, then biases.
#[derive(Debug, Clone)]
pub struct Mlp {
    layer_dims: Vec<usize>,
    output_activation: Activation,
    params: ParamVector,
}

impl Mlp {
    /// Builds a net with weights and biases drawn uniformly from
    /// ±sqrt(1/fan_in) per layer, in layer order, weights before biases.
    pub fn new(layer_dims: &[usize], output_activation: Activation, rng: &mut Rng) -> Self {
        assert!(
            layer_dims.len() >= 2 && layer_dims.iter().all(|&d| d > 0),
            "layer_dims must list at least input and output sizes, all positive"
        );
        let mut net = Self::zeros(layer_dims, output_activation);
        let dims = net.layer_dims.clone();
        let values = net.params.values_mut();
        let mut off = 0;
        for l in 0..dims.len() - 1 {
            let (in_d, out_d) = (dims[l], dims[l + 1]);
            let bound = (1.0 / in_d as f64).sqrt();
            for _ in 0..out_d * in_d + out_d {
                values[off] = rng.random_range(-bound..bound);
                off += 1;
            }
        }
        net
    }

    /// All-zero parameters.
    pub fn zeros(layer_dims: &[usize], output_activation: Activation) -> Self {
        assert!(layer_dims.len() >= 2 && layer_dims.iter().all(|&d| d > 0));
        let n: usize = (0..layer_dims.len() - 1)
            .map(|l| layer_dims[l + 1] * layer_dims[l] + layer_dims[l + 1])
            .sum();
        Self {
            layer_dims: layer_dims.to_vec(),
            output_activation,
            params: ParamVector::zeros(n),
        }
    }

    pub fn from_params(
        layer_dims: &[usize],
        output_activation: Activation,
        values: Vec<f64>,
    ) -> Result<Self> {
        let mut net = Self::zeros(layer_dims, output_activation);
        if values.len() != net.params.len() {
            return Err(Error::InputShape(format!(
                "expected {} parameters for dims {:?}, got {}",
                net.params.len(),
                layer_dims,
                values.len()
            )));
        }
        net.params.values_mut().copy_from_slice(&values);
        Ok(net)
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn n_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    pub fn in_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn out_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    pub fn params(&self) -> &ParamVector {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamVector {
        &mut self.params
    }

    /// Offset of layer `l`'s weight block in the flat parameter vector.
    pub fn weight_offset(&self, l: usize) -> usize {
        let mut off = 0;
        for k in 0..l {
            off += self.layer_dims[k + 1] * self.layer_dims[k] + self.layer_dims[k + 1];
        }
        off
    }

    /// Offset of layer `l`'s bias block.
    pub fn bias_offset(&self, l: usize) -> usize {
        self.weight_offset(l) + self.layer_dims[l + 1] * self.layer_dims[l]
    }

    fn activation_for(&self, l: usize) -> Activation {
        if l == self.n_layers() - 1 {
            self.output_activation
        } else {
            Activation::Tanh
        }
    }

    /// Offset of layer `l`'s post-activation block in the flat
    /// activation buffer used by the tape.
    pub(crate) fn act_offset(&self, l: usize) -> usize {
        self.layer_dims[1..=l].iter().sum()
    }

    pub(crate) fn acts_len(&self) -> usize {
        self.layer_dims[1..].iter().sum()
    }

    /// Single forward pass. Errors on an input length mismatch.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.in_dim() {
            return Err(Error::InputShape(format!(
                "mlp expects input of length {}, got {}",
                self.in_dim(),
                input.len()
            )));
        }
        let acts = self.forward_layers(input);
        Ok(acts[self.act_offset(self.n_layers() - 1)..].to_vec())
    }

    /// Forward pass keeping every layer's post-activation output in one
    /// flat buffer (needed by the tape's backward pass).
    pub(crate) fn forward_layers(&self, input: &[f64]) -> Vec<f64> {
        debug_assert_eq!(input.len(), self.in_dim());
        let values = self.params.values();
        let mut acts = vec![0.0; self.acts_len()];
        for l in 0..self.n_layers() {
            let (in_d, out_d) = (self.layer_dims[l], self.layer_dims[l + 1]);
            let w_off = self.weight_offset(l);
            let b_off = self.bias_offset(l);
            let out_off = self.act_offset(l);
            for o in 0..out_d {
                let row = &values[w_off + o * in_d..w_off + (o + 1) * in_d];
                let mut acc = values[b_off + o];
                if l == 0 {
                    for (w, x) in row.iter().zip(input) {
                        acc += w * x;
                    }
                } else {
                    let in_off = self.act_offset(l - 1);
                    for (w, x) in row.iter().zip(&acts[in_off..in_off + in_d]) {
                        acc += w * x;
                    }
                }
                acts[out_off + o] = acc;
            }
            self.activation_for(l)
                .apply(&mut acts[out_off..out_off + out_d]);
        }
        acts
    }

    /// Backpropagates `d_out` through the net given the recorded flat
    /// activations, accumulating into the parameter gradients and
    /// returning the gradient with respect to the input.
    pub(crate) fn backprop(&mut self, input: &[f64], acts: &[f64], d_out: &[f64]) -> Vec<f64> {
        let n_layers = self.n_layers();
        debug_assert_eq!(acts.len(), self.acts_len());
        let mut d_upstream = d_out.to_vec();
        for l in (0..n_layers).rev() {
            let (in_d, out_d) = (self.layer_dims[l], self.layer_dims[l + 1]);
            let w_off = self.weight_offset(l);
            let b_off = self.bias_offset(l);
            let out_off = self.act_offset(l);
            let d_z = self
                .activation_for(l)
                .backward(&acts[out_off..out_off + out_d], &d_upstream);
            let in_v: &[f64] = if l == 0 {
                input
            } else {
                let in_off = self.act_offset(l - 1);
                &acts[in_off..in_off + in_d]
            };
            let mut d_in = vec![0.0; in_d];
            {
                let grads = self.params.grads_mut();
                for o in 0..out_d {
                    let dz = d_z[o];
                    grads[b_off + o] += dz;
                    let row = &mut grads[w_off + o * in_d..w_off + (o + 1) * in_d];
                    for (g, x) in row.iter_mut().zip(in_v) {
                        *g += x * dz;
                    }
                }
            }
            let values = self.params.values();
            for o in 0..out_d {
                let dz = d_z[o];
                let row = &values[w_off + o * in_d..w_off + (o + 1) * in_d];
                for (d, w) in d_in.iter_mut().zip(row) {
                    *d += w * dz;
                }
            }
            d_upstream = d_in;
        }
        d_upstream
    }

    /// Copies parameter values (not gradients) from another net of the
    /// same shape.
    pub fn copy_params_from(&mut self, other: &Mlp) {
        assert_eq!(self.layer_dims, other.layer_dims);
        self.params
            .values_mut()
            .copy_from_slice(other.params.values());
    }

    /// Polyak blend: target <- (1-tau)*target + tau*online.
    /// tau=1 copies bitwise, tau=0 leaves the target bitwise unchanged.
    pub fn polyak_from(&mut self, online: &Mlp, tau: f64) {
        assert_eq!(self.layer_dims, online.layer_dims);
        if tau == 0.0 {
            return;
        }
        if tau == 1.0 {
            self.copy_params_from(online);
            return;
        }
        for (t, o) in self
            .params
            .values_mut()
            .iter_mut()
            .zip(online.params.values())
        {
            *t = (1.0 - tau) * *t + tau * *o;
        }
    }
}
