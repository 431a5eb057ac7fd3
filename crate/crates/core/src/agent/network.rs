use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fully connected layer; `weights` is `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.inputs)
                .zip(&self.biases)
                .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b),
        );
    }
}

/// Feed-forward Q-value approximator: rectified hidden layers and a linear
/// output with one value per action.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    layers: Vec<Dense>,
}

/// Parameter gradients, laid out like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    fn zeros_like(net: &QNetwork) -> Self {
        Self {
            layers: net.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.iter_mut().zip(&b.weights).for_each(|(x, y)| *x += y);
            a.biases.iter_mut().zip(&b.biases).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|x| *x *= s);
            l.biases.iter_mut().for_each(|x| *x *= s);
        }
    }

    /// All gradient entries in the same order as [`QNetwork::params`].
    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }
}

impl QNetwork {
    /// Uniform initialization in `[-l, l]`, `l = sqrt(6 / (fan_in + fan_out))`,
    /// drawn layer by layer in row-major order; biases start at zero.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        for layer in &mut net.layers {
            let limit = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..=limit);
            }
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Config(format!("invalid layer sizes {sizes:?}")));
        }
        Ok(Self {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        })
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs || l.inputs == 0 {
                return Err(Error::Format(format!("layer {i} has inconsistent shapes")));
            }
            if i > 0 && layers[i - 1].outputs != l.inputs {
                return Err(Error::Format(format!("layer {i} input does not match previous output")));
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(Error::Format(format!("layer {i} has non-finite parameters")));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].inputs];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_len(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_len() {
            return Err(Error::LengthMismatch {
                expected: self.input_len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine(&cur, &mut next);
            if i < last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Gradients of `(Q(x)[action] - target)^2` with respect to every parameter.
    pub fn backward(&self, x: &[f64], action: usize, target: f64) -> Result<Gradients> {
        self.check_input(x)?;
        if action >= self.output_len() {
            return Err(Error::Domain(format!("action index {action} out of range")));
        }
        // activations[i] is the input to layer i; pre[i] its pre-activation
        let last = self.layers.len() - 1;
        let mut activations = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::new();
            layer.affine(&activations[i], &mut z);
            let a = if i < last {
                z.iter().map(|v| v.max(0.0)).collect()
            } else {
                z.clone()
            };
            pre.push(z);
            activations.push(a);
        }
        let q = &activations[last + 1];

        let mut grads = Gradients::zeros_like(self);
        let mut delta = vec![0.0; self.output_len()];
        delta[action] = 2.0 * (q[action] - target);

        for i in (0..=last).rev() {
            let layer = &self.layers[i];
            let input = &activations[i];
            let g = &mut grads.layers[i];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.biases[o] = d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                row.iter_mut().zip(input).for_each(|(gw, &v)| *gw = d * v);
            }
            if i == 0 {
                break;
            }
            let mut prev = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                prev.iter_mut().zip(row).for_each(|(p, &w)| *p += d * w);
            }
            // rectifier gate of the layer below
            for (p, &z) in prev.iter_mut().zip(&pre[i - 1]) {
                if z <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
        Ok(grads)
    }

    /// Gradient descent step: `theta -= lr * grads`.
    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        for (l, g) in self.layers.iter_mut().zip(&grads.layers) {
            l.weights.iter_mut().zip(&g.weights).for_each(|(w, d)| *w -= lr * d);
            l.biases.iter_mut().zip(&g.biases).for_each(|(b, d)| *b -= lr * d);
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Flat parameter view: per layer, weights then biases.
    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::LengthMismatch {
                expected: self.num_params(),
                got: flat.len(),
            });
        }
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            l.weights
                .iter_mut()
                .chain(l.biases.iter_mut())
                .for_each(|p| *p = it.next().unwrap());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = QNetwork::zeros(&[4, 3, 3]).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.0; 3]);
        assert!(matches!(net.forward(&[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn single_path_by_hand() {
        // x -> h = relu(2x + 1) -> q = [3h - 1, -h, 0.5]
        let l1 = Dense {
            inputs: 1,
            outputs: 1,
            weights: vec![2.0],
            biases: vec![1.0],
        };
        let l2 = Dense {
            inputs: 1,
            outputs: 3,
            weights: vec![3.0, -1.0, 0.0],
            biases: vec![-1.0, 0.0, 0.5],
        };
        let net = QNetwork::from_layers(vec![l1, l2]).unwrap();
        assert_eq!(net.forward(&[1.5]).unwrap(), vec![11.0, -4.0, 0.5]);
        // dead unit: 2 * -1 + 1 < 0
        assert_eq!(net.forward(&[-1.0]).unwrap(), vec![-1.0, 0.0, 0.5]);

        // L = (q0 - 10)^2 = 1 at x = 1.5, dL/dq0 = 2
        let g = net.backward(&[1.5], 0, 10.0).unwrap();
        assert_eq!(g.layers[1].weights, vec![2.0 * 4.0, 0.0, 0.0]);
        assert_eq!(g.layers[1].biases, vec![2.0, 0.0, 0.0]);
        assert_eq!(g.layers[0].biases, vec![2.0 * 3.0]);
        assert_eq!(g.layers[0].weights, vec![2.0 * 3.0 * 1.5]);

        let dead = net.backward(&[-1.0], 0, 10.0).unwrap();
        assert_eq!(dead.layers[0].weights, vec![0.0]);
        assert_eq!(dead.layers[0].biases, vec![0.0]);
    }

    #[test]
    fn doubling_output_layer_doubles_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = QNetwork::new(&[5, 8, 3], &mut rng).unwrap();
        let mut doubled = net.clone();
        let last = doubled.layers_mut().last_mut().unwrap();
        last.weights.iter_mut().for_each(|w| *w *= 2.0);
        last.biases.iter_mut().for_each(|b| *b += *b);
        let x = [0.3, -0.1, 2.0, 0.0, 1.0];
        let q = net.forward(&x).unwrap();
        let q2 = doubled.forward(&x).unwrap();
        for (a, b) in q.iter().zip(&q2) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn zero_residual_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = QNetwork::new(&[4, 6, 5, 3], &mut rng).unwrap();
        let x = [0.5, 1.0, -0.5, 0.25];
        let q = net.forward(&x).unwrap();
        let g = net.backward(&x, 1, q[1]).unwrap();
        assert!(g.flat().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unselected_outputs_get_no_final_layer_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = QNetwork::new(&[4, 6, 3], &mut rng).unwrap();
        let g = net.backward(&[1.0, 2.0, 3.0, 4.0], 2, -5.0).unwrap();
        let last = &g.layers[1];
        for o in 0..2 {
            assert!(last.weights[o * 6..(o + 1) * 6].iter().all(|&v| v == 0.0));
            assert_eq!(last.biases[o], 0.0);
        }
        assert!(last.biases[2] != 0.0);
    }

    #[test]
    fn init_limits_and_params_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = QNetwork::new(&[7, 5, 4, 3], &mut rng).unwrap();
        for l in net.layers() {
            let limit = (6.0 / (l.inputs + l.outputs) as f64).sqrt();
            assert!(l.weights.iter().all(|w| w.abs() <= limit));
            assert!(l.biases.iter().all(|&b| b == 0.0));
        }
        assert_eq!(net.num_params(), 7 * 5 + 5 + 5 * 4 + 4 + 4 * 3 + 3);
        let mut other = QNetwork::zeros(&net.sizes()).unwrap();
        other.set_params(&net.params()).unwrap();
        assert_eq!(other, net);
    }
}
