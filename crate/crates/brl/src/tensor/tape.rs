//! Per-step reverse-mode tape.
//!
//! Forward values are computed eagerly as ops are pushed, so callers can
//! branch on intermediate values while building (e.g. picking the smaller
//! of two critic outputs). `backward` consumes the tape, walks the ops in
//! reverse, and accumulates parameter gradients straight into the
//! registered networks' `ParamVector`s.

use super::Mlp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetId(usize);

enum Op {
    Input,
    Apply {
        net: usize,
        input: NodeId,
        /// Flat per-layer post-activations (layout from the net).
        acts: Vec<f64>,
    },
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    AddConst(NodeId, f64),
    MulConstVec(NodeId, Vec<f64>),
    AddConstVec(NodeId, Vec<f64>),
    Tanh(NodeId),
    Exp(NodeId),
    Ln(NodeId),
    Clamp(NodeId, f64, f64),
    ClampVec(NodeId, Vec<f64>, Vec<f64>),
    Concat(NodeId, NodeId),
    Slice(NodeId, usize),
    Sum(NodeId),
    Dot(NodeId, NodeId),
    Norm(NodeId),
    Pick(NodeId, usize),
    MulBroadcast(NodeId, NodeId),
}

struct Node {
    value: Vec<f64>,
    grad: Vec<f64>,
    op: Op,
}

pub struct Tape<'a> {
    nets: Vec<&'a mut Mlp>,
    nodes: Vec<Node>,
}

const LN_FLOOR: f64 = 1e-12;

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Self {
            nets: Vec::new(),
            nodes: Vec::new(),
        }
    }

    /// Registers a network for gradient accumulation and zeroes its grads.
    pub fn register(&mut self, net: &'a mut Mlp) -> NetId {
        net.params_mut().zero_grads();
        self.nets.push(net);
        NetId(self.nets.len() - 1)
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> NodeId {
        let grad = vec![0.0; value.len()];
        self.nodes.push(Node { value, grad, op });
        NodeId(self.nodes.len() - 1)
    }

    pub fn input(&mut self, v: &[f64]) -> NodeId {
        self.push(v.to_vec(), Op::Input)
    }

    pub fn scalar_input(&mut self, v: f64) -> NodeId {
        self.push(vec![v], Op::Input)
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        debug_assert_eq!(self.nodes[id.0].value.len(), 1);
        self.nodes[id.0].value[0]
    }

    /// Full network forward pass recorded as a single op.
    pub fn apply(&mut self, net: NetId, input: NodeId) -> NodeId {
        let x = &self.nodes[input.0].value;
        assert_eq!(
            x.len(),
            self.nets[net.0].in_dim(),
            "tape apply: input length mismatch"
        );
        let mlp = &self.nets[net.0];
        let acts = mlp.forward_layers(x);
        let out = acts[mlp.act_offset(mlp.n_layers() - 1)..].to_vec();
        self.push(
            out,
            Op::Apply {
                net: net.0,
                input,
                acts,
            },
        )
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = zip_vals(&self.nodes[a.0].value, &self.nodes[b.0].value, |x, y| x + y);
        self.push(v, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = zip_vals(&self.nodes[a.0].value, &self.nodes[b.0].value, |x, y| x - y);
        self.push(v, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = zip_vals(&self.nodes[a.0].value, &self.nodes[b.0].value, |x, y| x * y);
        self.push(v, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let v = self.nodes[a.0].value.iter().map(|x| x * c).collect();
        self.push(v, Op::Scale(a, c))
    }

    pub fn add_const(&mut self, a: NodeId, c: f64) -> NodeId {
        let v = self.nodes[a.0].value.iter().map(|x| x + c).collect();
        self.push(v, Op::AddConst(a, c))
    }

    pub fn mul_const_vec(&mut self, a: NodeId, c: &[f64]) -> NodeId {
        let v = zip_vals(&self.nodes[a.0].value, c, |x, y| x * y);
        self.push(v, Op::MulConstVec(a, c.to_vec()))
    }

    pub fn add_const_vec(&mut self, a: NodeId, c: &[f64]) -> NodeId {
        let v = zip_vals(&self.nodes[a.0].value, c, |x, y| x + y);
        self.push(v, Op::AddConstVec(a, c.to_vec()))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let v = self.nodes[a.0].value.iter().map(|x| x.tanh()).collect();
        self.push(v, Op::Tanh(a))
    }

    pub fn exp(&mut self, a: NodeId) -> NodeId {
        let v = self.nodes[a.0].value.iter().map(|x| x.exp()).collect();
        self.push(v, Op::Exp(a))
    }

    /// Natural log with inputs floored at 1e-12; the floored region is flat.
    pub fn ln(&mut self, a: NodeId) -> NodeId {
        let v = self.nodes[a.0]
            .value
            .iter()
            .map(|x| x.max(LN_FLOOR).ln())
            .collect();
        self.push(v, Op::Ln(a))
    }

    /// Hard clamp; gradient passes only where the input was in range.
    pub fn clamp(&mut self, a: NodeId, lo: f64, hi: f64) -> NodeId {
        let v = self.nodes[a.0].value.iter().map(|x| x.clamp(lo, hi)).collect();
        self.push(v, Op::Clamp(a, lo, hi))
    }

    /// Per-dimension hard clamp.
    pub fn clamp_vec(&mut self, a: NodeId, lo: &[f64], hi: &[f64]) -> NodeId {
        let v = self.nodes[a.0]
            .value
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(x, (l, h))| x.clamp(*l, *h))
            .collect();
        self.push(v, Op::ClampVec(a, lo.to_vec(), hi.to_vec()))
    }

    pub fn concat(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let mut v = self.nodes[a.0].value.clone();
        v.extend_from_slice(&self.nodes[b.0].value);
        self.push(v, Op::Concat(a, b))
    }

    pub fn slice(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let v = self.nodes[a.0].value[start..start + len].to_vec();
        self.push(v, Op::Slice(a, start))
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let s: f64 = self.nodes[a.0].value.iter().sum();
        self.push(vec![s], Op::Sum(a))
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let s: f64 = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| x * y)
            .sum();
        self.push(vec![s], Op::Dot(a, b))
    }

    /// Euclidean norm; the gradient at the origin is defined as 0.
    pub fn norm(&mut self, a: NodeId) -> NodeId {
        let s = self.nodes[a.0].value.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.push(vec![s], Op::Norm(a))
    }

    pub fn pick(&mut self, a: NodeId, idx: usize) -> NodeId {
        let v = self.nodes[a.0].value[idx];
        self.push(vec![v], Op::Pick(a, idx))
    }

    /// Vector times a scalar node.
    pub fn mul_broadcast(&mut self, vec: NodeId, scalar: NodeId) -> NodeId {
        debug_assert_eq!(self.nodes[scalar.0].value.len(), 1);
        let s = self.nodes[scalar.0].value[0];
        let v = self.nodes[vec.0].value.iter().map(|x| x * s).collect();
        self.push(v, Op::MulBroadcast(vec, scalar))
    }

    /// Mean squared error against a constant target, as a scalar node.
    pub fn mse(&mut self, pred: NodeId, target: &[f64]) -> NodeId {
        let n = self.nodes[pred.0].value.len();
        let t = self.input(target);
        let d = self.sub(pred, t);
        let ss = self.dot(d, d);
        self.scale(ss, 1.0 / n as f64)
    }

    /// Sum of squared errors against a constant target (no averaging).
    pub fn sq_err(&mut self, pred: NodeId, target: &[f64]) -> NodeId {
        let t = self.input(target);
        let d = self.sub(pred, t);
        self.dot(d, d)
    }

    /// Reverse pass from a scalar loss. Consumes the tape; parameter
    /// gradients land in the registered networks.
    pub fn backward(mut self, loss: NodeId) -> Result<()> {
        let node = &self.nodes[loss.0];
        if node.value.len() != 1 {
            return Err(Error::InputShape(
                "backward requires a scalar loss".to_string(),
            ));
        }
        if !node.value[0].is_finite() {
            return Err(Error::Divergence {
                step: 0,
                what: format!("non-finite loss {}", node.value[0]),
            });
        }
        self.nodes[loss.0].grad[0] = 1.0;

        while let Some(node) = self.nodes.pop() {
            let g = node.grad;
            if g.iter().all(|x| *x == 0.0) {
                continue;
            }
            match node.op {
                Op::Input => {}
                Op::Apply { net, input, acts } => {
                    let d_in = self.nets[net].backprop(&self.nodes[input.0].value, &acts, &g);
                    accumulate(&mut self.nodes[input.0].grad, &d_in);
                }
                Op::Add(a, b) => {
                    accumulate(&mut self.nodes[a.0].grad, &g);
                    accumulate(&mut self.nodes[b.0].grad, &g);
                }
                Op::Sub(a, b) => {
                    accumulate(&mut self.nodes[a.0].grad, &g);
                    for (gb, gi) in self.nodes[b.0].grad.iter_mut().zip(&g) {
                        *gb -= gi;
                    }
                }
                Op::Mul(a, b) => {
                    if a.0 == b.0 {
                        // x*x: d = 2*x*g
                        let av: Vec<f64> = self.nodes[a.0].value.clone();
                        for ((ga, x), gi) in self.nodes[a.0].grad.iter_mut().zip(&av).zip(&g) {
                            *ga += 2.0 * x * gi;
                        }
                    } else {
                        let (an, bn) = two_nodes(&mut self.nodes, a.0, b.0);
                        for i in 0..g.len() {
                            an.grad[i] += bn.value[i] * g[i];
                            bn.grad[i] += an.value[i] * g[i];
                        }
                    }
                }
                Op::Scale(a, c) => {
                    for (ga, gi) in self.nodes[a.0].grad.iter_mut().zip(&g) {
                        *ga += c * gi;
                    }
                }
                Op::AddConst(a, _) => accumulate(&mut self.nodes[a.0].grad, &g),
                Op::MulConstVec(a, c) => {
                    for ((ga, ci), gi) in self.nodes[a.0].grad.iter_mut().zip(&c).zip(&g) {
                        *ga += ci * gi;
                    }
                }
                Op::AddConstVec(a, _) => accumulate(&mut self.nodes[a.0].grad, &g),
                Op::Tanh(a) => {
                    for ((ga, y), gi) in self.nodes[a.0].grad.iter_mut().zip(&node.value).zip(&g) {
                        *ga += (1.0 - y * y) * gi;
                    }
                }
                Op::Exp(a) => {
                    for ((ga, y), gi) in self.nodes[a.0].grad.iter_mut().zip(&node.value).zip(&g) {
                        *ga += y * gi;
                    }
                }
                Op::Ln(a) => {
                    let xs: Vec<f64> = self.nodes[a.0].value.clone();
                    for ((ga, x), gi) in self.nodes[a.0].grad.iter_mut().zip(&xs).zip(&g) {
                        if *x > LN_FLOOR {
                            *ga += gi / x;
                        }
                    }
                }
                Op::Clamp(a, lo, hi) => {
                    let xs: Vec<f64> = self.nodes[a.0].value.clone();
                    for ((ga, x), gi) in self.nodes[a.0].grad.iter_mut().zip(&xs).zip(&g) {
                        if *x >= lo && *x <= hi {
                            *ga += gi;
                        }
                    }
                }
                Op::ClampVec(a, lo, hi) => {
                    let xs: Vec<f64> = self.nodes[a.0].value.clone();
                    for (i, (ga, x)) in self.nodes[a.0].grad.iter_mut().zip(&xs).enumerate() {
                        if *x >= lo[i] && *x <= hi[i] {
                            *ga += g[i];
                        }
                    }
                }
                Op::Concat(a, b) => {
                    let alen = self.nodes[a.0].value.len();
                    accumulate(&mut self.nodes[a.0].grad, &g[..alen]);
                    accumulate(&mut self.nodes[b.0].grad, &g[alen..]);
                }
                Op::Slice(a, start) => {
                    accumulate(&mut self.nodes[a.0].grad[start..start + g.len()], &g);
                }
                Op::Sum(a) => {
                    for ga in self.nodes[a.0].grad.iter_mut() {
                        *ga += g[0];
                    }
                }
                Op::Dot(a, b) => {
                    if a.0 == b.0 {
                        let av: Vec<f64> = self.nodes[a.0].value.clone();
                        for (ga, x) in self.nodes[a.0].grad.iter_mut().zip(&av) {
                            *ga += 2.0 * x * g[0];
                        }
                    } else {
                        let (an, bn) = two_nodes(&mut self.nodes, a.0, b.0);
                        for i in 0..an.value.len() {
                            an.grad[i] += bn.value[i] * g[0];
                            bn.grad[i] += an.value[i] * g[0];
                        }
                    }
                }
                Op::Norm(a) => {
                    let n = node.value[0];
                    if n > 0.0 {
                        let scale = g[0] / n;
                        let av: Vec<f64> = self.nodes[a.0].value.clone();
                        for (ga, x) in self.nodes[a.0].grad.iter_mut().zip(&av) {
                            *ga += scale * x;
                        }
                    }
                }
                Op::Pick(a, idx) => {
                    self.nodes[a.0].grad[idx] += g[0];
                }
                Op::MulBroadcast(vecn, scalarn) => {
                    let s = self.nodes[scalarn.0].value[0];
                    let vv: Vec<f64> = self.nodes[vecn.0].value.clone();
                    for (gv, gi) in self.nodes[vecn.0].grad.iter_mut().zip(&g) {
                        *gv += s * gi;
                    }
                    let ds: f64 = vv.iter().zip(&g).map(|(x, gi)| x * gi).sum();
                    self.nodes[scalarn.0].grad[0] += ds;
                }
            }
        }
        Ok(())
    }
}

impl Default for Tape<'_> {
    fn default() -> Self {
        Self::new()
    }
}

fn zip_vals(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "tape op: length mismatch");
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

fn accumulate(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Disjoint mutable access to two nodes.
fn two_nodes(nodes: &mut [Node], a: usize, b: usize) -> (&mut Node, &mut Node) {
    debug_assert_ne!(a, b);
    if a < b {
        let (lo, hi) = nodes.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = nodes.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Activation, Mlp};
    use crate::rng_from_seed;

    #[test]
    fn zero_loss_gives_zero_grads() {
        let mut rng = rng_from_seed(1);
        let mut net = Mlp::new(&[2, 3, 2], Activation::Tanh, &mut rng);
        let mut tape = Tape::new();
        let n = tape.register(&mut net);
        let x = tape.input(&[0.4, -0.2]);
        let y = tape.apply(n, x);
        let loss = tape.scale(y, 0.0);
        let loss = tape.sum(loss);
        tape.backward(loss).unwrap();
        assert!(net.params().grads().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn linear_net_gradient_is_the_input() {
        // f(w) = w * x with x = 3: dLoss/dw = 3.
        let mut net = Mlp::zeros(&[1, 1], Activation::Identity);
        let mut tape = Tape::new();
        let n = tape.register(&mut net);
        let x = tape.input(&[3.0]);
        let y = tape.apply(n, x);
        let loss = tape.sum(y);
        tape.backward(loss).unwrap();
        // params: [w, b]; dL/dw = x = 3, dL/db = 1.
        assert_eq!(net.params().grads(), &[3.0, 1.0]);
    }

    #[test]
    fn backprop_matches_central_finite_differences() {
        let mut rng = rng_from_seed(11);
        let mut net = Mlp::new(&[2, 8, 2], Activation::Identity, &mut rng);
        let input = [0.3, -0.9];
        let target = [0.5, 0.25];

        let mut tape = Tape::new();
        let n = tape.register(&mut net);
        let x = tape.input(&input);
        let y = tape.apply(n, x);
        let loss = tape.mse(y, &target);
        tape.backward(loss).unwrap();
        let analytic: Vec<f64> = net.params().grads().to_vec();

        let h = 1e-4;
        for p in 0..net.params().len() {
            let orig = net.params().values()[p];
            net.params_mut().values_mut()[p] = orig + h;
            let up = mse_of(&net, &input, &target);
            net.params_mut().values_mut()[p] = orig - h;
            let dn = mse_of(&net, &input, &target);
            net.params_mut().values_mut()[p] = orig;
            let fd = (up - dn) / (2.0 * h);
            let denom = analytic[p].abs().max(fd.abs()).max(1e-3);
            assert!(
                ((analytic[p] - fd) / denom).abs() < 1e-4,
                "param {p}: bp {} vs fd {fd}",
                analytic[p]
            );
        }
    }

    fn mse_of(net: &Mlp, input: &[f64], target: &[f64]) -> f64 {
        let out = net.forward(input).unwrap();
        out.iter()
            .zip(target)
            .map(|(o, t)| (o - t) * (o - t))
            .sum::<f64>()
            / target.len() as f64
    }

    #[test]
    fn backward_rejects_non_finite_loss() {
        let mut tape = Tape::new();
        let a = tape.scalar_input(f64::NAN);
        assert!(matches!(
            tape.backward(a),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn norm_gradient_at_origin_is_zero() {
        let mut tape = Tape::new();
        let a = tape.input(&[0.0, 0.0]);
        let n = tape.norm(a);
        assert_eq!(tape.scalar(n), 0.0);
        tape.backward(n).unwrap();
    }

    #[test]
    fn gradient_flows_through_composed_nets() {
        // d/dw_actor of critic(actor(x)) must be nonzero.
        let mut rng = rng_from_seed(5);
        let mut actor = Mlp::new(&[2, 4, 1], Activation::Tanh, &mut rng);
        let mut critic = Mlp::new(&[3, 4, 1], Activation::Identity, &mut rng);
        let mut tape = Tape::new();
        let a_id = tape.register(&mut actor);
        let c_id = tape.register(&mut critic);
        let x = tape.input(&[0.7, -0.3]);
        let act = tape.apply(a_id, x);
        let xa = tape.concat(x, act);
        let q = tape.apply(c_id, xa);
        let loss = tape.sum(q);
        tape.backward(loss).unwrap();
        assert!(actor.params().grads().iter().any(|g| *g != 0.0));
        assert!(critic.params().grads().iter().any(|g| *g != 0.0));
    }
}
