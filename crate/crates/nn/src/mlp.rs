//! The network itself: weights, forward evaluation, backward pass.

use crate::NnError;
use serde::{Deserialize, Serialize};
use tvae_core::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    /// Derivative as a function of the pre-activation. The relu kink at 0
    /// takes the subgradient 0.
    fn slope(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Fully-connected network. Layer l maps `widths[l]` values to
/// `widths[l+1]` through an affine map and `activations[l]`. Weights are
/// stored row-major: `weights[l][r * widths[l] + c]` connects input c to
/// output r.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    widths: Vec<usize>,
    activations: Vec<Activation>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Per-layer pre-activations and activations recorded by a forward pass,
/// owned by exactly one backward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
}

/// Parameter-shaped gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Gradients {
            weights: mlp.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: mlp.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for x in w {
                *x *= factor;
            }
        }
        for b in &mut self.biases {
            for x in b {
                *x *= factor;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(&self.biases)
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

impl Mlp {
    /// Random initialization: each weight uniform in
    /// [-scale/sqrt(fan_in), +scale/sqrt(fan_in)], biases zero.
    pub fn init(
        widths: &[usize],
        activations: &[Activation],
        scale: f64,
        rng: &mut Rng,
    ) -> Result<Self, NnError> {
        if widths.len() < 2 {
            return Err(NnError::BadSpec(format!(
                "need at least input and output widths, got {widths:?}"
            )));
        }
        if widths.contains(&0) {
            return Err(NnError::BadSpec(format!("zero-width layer in {widths:?}")));
        }
        if activations.len() != widths.len() - 1 {
            return Err(NnError::BadSpec(format!(
                "{} layers need {} activations, got {}",
                widths.len() - 1,
                widths.len() - 1,
                activations.len()
            )));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(NnError::BadSpec(format!("bad init scale {scale}")));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..widths.len() - 1 {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let bound = scale / (fan_in as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.uniform(-bound, bound))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Mlp {
            widths: widths.to_vec(),
            activations: activations.to_vec(),
            weights,
            biases,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    /// Number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub fn check_finite(&self) -> Result<(), NnError> {
        let ok = self
            .weights
            .iter()
            .chain(&self.biases)
            .all(|v| v.iter().all(|x| x.is_finite()));
        if ok {
            Ok(())
        } else {
            Err(NnError::NonFinite("parameter"))
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        Ok(self.run(x)?.0)
    }

    /// Forward pass that also records what backward needs.
    pub fn forward_recorded(&self, x: &[f64]) -> Result<(Vec<f64>, Tape), NnError> {
        let (y, pre) = self.run(x)?;
        Ok((
            y,
            Tape {
                input: x.to_vec(),
                pre,
            },
        ))
    }

    fn run(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>), NnError> {
        if x.len() != self.input_dim() {
            return Err(NnError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut act = x.to_vec();
        let mut pre_layers = Vec::with_capacity(self.activations.len());
        for l in 0..self.activations.len() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let mut pre = self.biases[l].clone();
            let w = &self.weights[l];
            for r in 0..n_out {
                let row = &w[r * n_in..(r + 1) * n_in];
                let mut sum = 0.0;
                for (wv, av) in row.iter().zip(&act) {
                    sum += wv * av;
                }
                pre[r] += sum;
            }
            act = pre.iter().map(|&z| self.activations[l].apply(z)).collect();
            pre_layers.push(pre);
        }
        Ok((act, pre_layers))
    }

    /// Exact gradients of whatever scalar the caller differentiated to get
    /// `upstream` = dL/d(output). Returns parameter gradients and
    /// dL/d(input). The tape is consumed; it matches one forward pass.
    pub fn backward(&self, tape: Tape, upstream: &[f64]) -> Result<(Gradients, Vec<f64>), NnError> {
        let layers = self.activations.len();
        if tape.pre.len() != layers
            || tape.input.len() != self.input_dim()
            || tape
                .pre
                .iter()
                .zip(self.widths.iter().skip(1))
                .any(|(p, &w)| p.len() != w)
        {
            return Err(NnError::TapeMismatch);
        }
        if upstream.len() != self.output_dim() {
            return Err(NnError::DimensionMismatch {
                expected: self.output_dim(),
                got: upstream.len(),
            });
        }

        let mut grads = Gradients::zeros_like(self);
        let mut d_act = upstream.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let pre = &tape.pre[l];
            let below: &[f64] = if l == 0 {
                &tape.input
            } else {
                // activations of the layer below, recomputed from its
                // recorded pre-activations
                &tape.pre[l - 1]
            };
            let act_below: Vec<f64> = if l == 0 {
                below.to_vec()
            } else {
                below
                    .iter()
                    .map(|&z| self.activations[l - 1].apply(z))
                    .collect()
            };

            let d_pre: Vec<f64> = d_act
                .iter()
                .zip(pre)
                .map(|(&da, &z)| da * self.activations[l].slope(z))
                .collect();

            let gw = &mut grads.weights[l];
            for r in 0..n_out {
                let row = &mut gw[r * n_in..(r + 1) * n_in];
                for (c, g) in row.iter_mut().enumerate() {
                    *g += d_pre[r] * act_below[c];
                }
                grads.biases[l][r] += d_pre[r];
            }

            let w = &self.weights[l];
            let mut d_below = vec![0.0; n_in];
            for r in 0..n_out {
                let row = &w[r * n_in..(r + 1) * n_in];
                for (c, dv) in d_below.iter_mut().enumerate() {
                    *dv += row[c] * d_pre[r];
                }
            }
            d_act = d_below;
        }
        Ok((grads, d_act))
    }

    /// Flattened view of all parameters, weights before biases, layer by
    /// layer. Used by gradient checks and the optimizer tests.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in 0..self.weights.len() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
        out
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn load_flat(&mut self, flat: &[f64]) -> Result<(), NnError> {
        if flat.len() != self.param_count() {
            return Err(NnError::DimensionMismatch {
                expected: self.param_count(),
                got: flat.len(),
            });
        }
        let mut it = flat.iter();
        for l in 0..self.weights.len() {
            for w in &mut self.weights[l] {
                *w = *it.next().unwrap();
            }
            for b in &mut self.biases[l] {
                *b = *it.next().unwrap();
            }
        }
        Ok(())
    }

    pub(crate) fn params_mut(&mut self) -> (&mut Vec<Vec<f64>>, &mut Vec<Vec<f64>>) {
        (&mut self.weights, &mut self.biases)
    }

    /// Gradient counterpart of [`flatten`](Self::flatten), same layout.
    pub fn grads_flat(grads: &Gradients) -> Vec<f64> {
        let mut out = Vec::new();
        for l in 0..grads.weights.len() {
            out.extend_from_slice(&grads.weights[l]);
            out.extend_from_slice(&grads.biases[l]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff;

    fn small_random(widths: &[usize], acts: &[Activation], seed: u64) -> Mlp {
        let mut rng = Rng::stream(seed, "mlp-test");
        Mlp::init(widths, acts, 1.0, &mut rng).unwrap()
    }

    #[test]
    fn init_shapes_and_bounds() {
        let mlp = small_random(
            &[3, 20, 20, 2],
            &[Activation::Tanh, Activation::Tanh, Activation::Identity],
            1,
        );
        assert_eq!(mlp.weights[0].len(), 20 * 3);
        assert_eq!(mlp.weights[1].len(), 20 * 20);
        assert_eq!(mlp.weights[2].len(), 2 * 20);
        assert_eq!(mlp.param_count(), 60 + 20 + 400 + 20 + 40 + 2);
        for (l, w) in mlp.weights.iter().enumerate() {
            let bound = 1.0 / (mlp.widths[l] as f64).sqrt();
            assert!(w.iter().all(|x| x.abs() <= bound));
        }
        assert!(mlp.biases.iter().all(|b| b.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn init_is_deterministic() {
        let a = small_random(&[4, 8, 2], &[Activation::Relu, Activation::Identity], 7);
        let b = small_random(&[4, 8, 2], &[Activation::Relu, Activation::Identity], 7);
        assert_eq!(a, b);
    }

    #[test]
    fn init_rejects_bad_specs() {
        let mut rng = Rng::stream(0, "mlp-test");
        assert!(Mlp::init(&[3], &[], 1.0, &mut rng).is_err());
        assert!(Mlp::init(&[3, 0, 2], &[Activation::Tanh; 2], 1.0, &mut rng).is_err());
        assert!(Mlp::init(&[3, 2], &[], 1.0, &mut rng).is_err());
    }

    #[test]
    fn zero_network_maps_everything_to_zero() {
        let mut mlp = small_random(&[3, 5, 2], &[Activation::Tanh, Activation::Identity], 2);
        let zeros = vec![0.0; mlp.param_count()];
        mlp.load_flat(&zeros).unwrap();
        assert_eq!(mlp.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer_with_unit_weights_is_the_identity() {
        let mut mlp = small_random(&[3, 3], &[Activation::Identity], 3);
        let mut flat = vec![0.0; mlp.param_count()];
        for i in 0..3 {
            flat[i * 3 + i] = 1.0;
        }
        mlp.load_flat(&flat).unwrap();
        let x = [0.5, -1.5, 2.0];
        assert_eq!(mlp.forward(&x).unwrap(), x.to_vec());

        let (_, tape) = mlp.forward_recorded(&x).unwrap();
        let (_, dx) = mlp.backward(tape, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(dx, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn tanh_outputs_are_bounded_even_when_saturated() {
        let mlp = small_random(&[2, 16], &[Activation::Tanh], 4);
        let y = mlp.forward(&[100.0, -100.0]).unwrap();
        assert!(y.iter().all(|&v| v.abs() <= 1.0));
    }

    #[test]
    fn relu_blocks_gradient_at_negative_preactivations() {
        let mut mlp = small_random(&[1, 1], &[Activation::Relu], 5);
        mlp.load_flat(&[1.0, -2.0]).unwrap(); // w=1, b=-2: pre = x - 2
        let (y, tape) = mlp.forward_recorded(&[1.0]).unwrap();
        assert_eq!(y, vec![0.0]);
        let (grads, dx) = mlp.backward(tape, &[1.0]).unwrap();
        assert_eq!(dx, vec![0.0]);
        assert!(grads.weights[0].iter().all(|&g| g == 0.0));
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let mlp = small_random(&[3, 2], &[Activation::Identity], 6);
        assert!(matches!(
            mlp.forward(&[1.0, 2.0]),
            Err(NnError::DimensionMismatch { expected: 3, got: 2 })
        ));
        let (_, tape) = mlp.forward_recorded(&[1.0, 2.0, 3.0]).unwrap();
        assert!(mlp.backward(tape, &[1.0]).is_err());
    }

    #[test]
    fn foreign_tape_is_rejected() {
        let a = small_random(&[3, 4, 2], &[Activation::Tanh, Activation::Identity], 7);
        let b = small_random(&[3, 5, 2], &[Activation::Tanh, Activation::Identity], 8);
        let (_, tape) = a.forward_recorded(&[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(b.backward(tape, &[1.0, 1.0]), Err(NnError::TapeMismatch)));
    }

    // Scalar test loss: L(y) = sum_i c_i * y_i + 0.5 * sum_i y_i^2, whose
    // gradient in y is c + y.
    fn loss_and_upstream(y: &[f64], c: &[f64]) -> (f64, Vec<f64>) {
        let loss = y
            .iter()
            .zip(c)
            .map(|(&yi, &ci)| ci * yi + 0.5 * yi * yi)
            .sum();
        (loss, y.iter().zip(c).map(|(&yi, &ci)| ci + yi).collect())
    }

    #[test]
    fn gradients_match_central_differences() {
        let specs: [(&[usize], &[Activation]); 3] = [
            (&[3, 7, 2], &[Activation::Tanh, Activation::Identity]),
            (&[2, 5, 5, 1], &[Activation::Relu, Activation::Tanh, Activation::Identity]),
            (&[4, 6, 3], &[Activation::Tanh, Activation::Tanh]),
        ];
        let mut rng = Rng::stream(100, "mlp-grad-test");
        for round in 0..20 {
            let (widths, acts) = specs[round % specs.len()];
            let mlp = small_random(widths, acts, round as u64);
            let x: Vec<f64> = (0..widths[0]).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let c: Vec<f64> = (0..*widths.last().unwrap())
                .map(|_| rng.uniform(-1.0, 1.0))
                .collect();

            let (y, tape) = mlp.forward_recorded(&x).unwrap();
            let (_, upstream) = loss_and_upstream(&y, &c);
            let (grads, dx) = mlp.backward(tape, &upstream).unwrap();

            let analytic: Vec<f64> = Mlp::grads_flat(&grads)
                .into_iter()
                .chain(dx.iter().copied())
                .collect();

            let mut probe = mlp.clone();
            let flat = mlp.flatten();
            let joined: Vec<f64> = flat.iter().chain(x.iter()).copied().collect();
            let numeric = numdiff::gradient(
                |v| {
                    probe.load_flat(&v[..flat.len()]).unwrap();
                    let y = probe.forward(&v[flat.len()..]).unwrap();
                    loss_and_upstream(&y, &c).0
                },
                &joined,
                1e-5,
            );

            let err = numdiff::max_rel_error(&analytic, &numeric, 1e-6);
            assert!(err < 1e-4, "round {round}: relative error {err}");
        }
    }

    #[test]
    fn batch_gradient_equals_mean_of_sample_gradients() {
        let mlp = small_random(&[3, 8, 2], &[Activation::Tanh, Activation::Identity], 9);
        let mut rng = Rng::stream(101, "mlp-batch-test");
        let batch: Vec<Vec<f64>> = (0..16)
            .map(|_| (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .collect();
        let c = [0.3, -0.7];

        let mut summed = Gradients::zeros_like(&mlp);
        for x in &batch {
            let (y, tape) = mlp.forward_recorded(x).unwrap();
            let (_, upstream) = loss_and_upstream(&y, &c);
            let (g, _) = mlp.backward(tape, &upstream).unwrap();
            summed.accumulate(&g);
        }
        summed.scale(1.0 / batch.len() as f64);

        // against a single accumulation pass with pre-scaled upstreams
        let mut direct = Gradients::zeros_like(&mlp);
        for x in &batch {
            let (y, tape) = mlp.forward_recorded(x).unwrap();
            let (_, mut upstream) = loss_and_upstream(&y, &c);
            for u in &mut upstream {
                *u /= batch.len() as f64;
            }
            let (g, _) = mlp.backward(tape, &upstream).unwrap();
            direct.accumulate(&g);
        }

        let a = Mlp::grads_flat(&summed);
        let b = Mlp::grads_flat(&direct);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
