//! Randomly initialised fully connected network used as a splitting function.
//!
//! Hidden layers use `tanh`; the output layer is a single linear unit. The
//! input gradient is obtained with a reverse pass over the cached activations.

use rand::Rng;
use rand_distr::StandardNormal;

/// One affine layer, `out = W·in + b`, with `W` stored row-major (`out_dim × in_dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn sample<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let bias = (0..out_dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self {
            in_dim,
            out_dim,
            weights,
            bias,
        }
    }

    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.bias.iter().enumerate().map(|(o, b)| {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            b + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>()
        }));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

impl Mlp {
    /// Samples weights from N(0, 1) and biases from U([-1, 1]).
    pub fn sample<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], rng: &mut R) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut prev = input_dim;
        for &width in hidden {
            layers.push(Dense::sample(prev, width, rng));
            prev = width;
        }
        layers.push(Dense::sample(prev, 1, rng));
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.out_dim)
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.forward(&cur, &mut next);
            if i < last {
                next.iter_mut().for_each(|z| *z = z.tanh());
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur[0]
    }

    /// Gradient of the scalar output with respect to the input.
    pub fn input_gradient(&self, x: &[f64]) -> Vec<f64> {
        // activations[i] is the input to layer i
        let last = self.layers.len() - 1;
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        activations.push(x.to_vec());
        let mut buf = Vec::new();
        for layer in &self.layers[..last] {
            layer.forward(activations.last().unwrap(), &mut buf);
            activations.push(buf.iter().map(|z| z.tanh()).collect());
        }

        // d(output)/d(output pre-activation) = 1 for the linear head
        let mut upstream = vec![1.0];
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let mut grad_in = vec![0.0; layer.in_dim];
            for (o, &g) in upstream.iter().enumerate() {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (gi, w) in grad_in.iter_mut().zip(row) {
                    *gi += g * w;
                }
            }
            if i > 0 {
                // input to layer i is tanh(z); dtanh = 1 - tanh²
                for (gi, a) in grad_in.iter_mut().zip(&activations[i]) {
                    *gi *= 1.0 - a * a;
                }
            }
            upstream = grad_in;
        }
        upstream
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes_follow_requested_widths() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::sample(5, &[8, 4], &mut rng);
        assert_eq!(net.layers.len(), 3);
        assert_eq!(net.input_dim(), 5);
        assert_eq!(net.hidden_widths(), vec![8, 4]);
        assert_eq!(net.layers[2].out_dim, 1);
        assert!(net.layers.iter().all(|l| l.bias.iter().all(|b| (-1.0..=1.0).contains(b))));
    }

    #[test]
    fn single_linear_layer_gradient_is_weights() {
        let net = Mlp {
            layers: vec![Dense {
                in_dim: 3,
                out_dim: 1,
                weights: vec![0.5, -2.0, 3.0],
                bias: vec![0.1],
            }],
        };
        assert_eq!(net.input_gradient(&[9.0, 9.0, 9.0]), vec![0.5, -2.0, 3.0]);
        assert!((net.forward(&[1.0, 1.0, 1.0]) - 1.6).abs() < 1e-15);
    }
}
