use rand::Rng;

use super::{Layer, Model, NetworkSpec, NnError, OUTPUTS};
use crate::features::DatasetVariant;
use crate::ingest::AdlLabel;
use crate::scaler::ScalerParams;
use crate::{rng, Real};

/// Gradient of one layer, same shapes as [`Layer`].
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient<T> {
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<LayerGradient<T>>,
}

impl<T: Real> Gradients<T> {
    /// Parameters flattened layer by layer, weights before biases.
    pub fn flatten(&self) -> Vec<T> {
        self.layers
            .iter()
            .flat_map(|g| g.weights.iter().chain(&g.biases).copied())
            .collect()
    }
}

/// Glorot-uniform weights from the spec's seed, zero biases.
pub fn init_model<T: Real>(spec: NetworkSpec<T>) -> Result<Model<T>, NnError> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed);
    let widths = spec.widths();
    let layers = widths
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights = (0..fan_in * fan_out)
                .map(|_| T::lit(rng.random_range(-bound..=bound)))
                .collect();
            Layer { inputs: fan_in, outputs: fan_out, weights, biases: vec![T::zero(); fan_out] }
        })
        .collect();
    let variant = DatasetVariant::ALL.iter().copied().find(|v| v.arity() == spec.input_arity);
    Ok(Model { scaler: ScalerParams::identity(spec.input_arity), spec, layers, variant })
}

fn dense<T: Real>(layer: &Layer<T>, input: &[T]) -> Vec<T> {
    let mut z = layer.biases.clone();
    for (i, &a) in input.iter().enumerate() {
        let row = &layer.weights[i * layer.outputs..(i + 1) * layer.outputs];
        for (zj, &w) in z.iter_mut().zip(row) {
            *zj = *zj + a * w;
        }
    }
    z
}

fn log_sum_exp<T: Real>(z: &[T]) -> T {
    let m = z.iter().copied().fold(T::neg_infinity(), T::max);
    m + z.iter().map(|&v| (v - m).exp()).sum::<T>().ln()
}

fn softmax<T: Real>(z: &[T]) -> Vec<T> {
    let m = z.iter().copied().fold(T::neg_infinity(), T::max);
    let e: Vec<T> = z.iter().map(|&v| (v - m).exp()).collect();
    let s: T = e.iter().copied().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Hidden activations (input first) and output logits.
struct Trace<T> {
    activations: Vec<Vec<T>>,
    logits: Vec<T>,
}

impl<T: Real> Model<T> {
    fn check_arity(&self, x: &[T]) -> Result<(), NnError> {
        if x.len() != self.spec.input_arity {
            return Err(NnError::ArityMismatch { expected: self.spec.input_arity, found: x.len() });
        }
        Ok(())
    }

    fn trace(&self, x: &[T]) -> Trace<T> {
        let (out_layer, hidden) = self.layers.split_last().expect("model has an output layer");
        let mut activations = Vec::with_capacity(self.layers.len());
        activations.push(x.to_vec());
        for (layer, act) in hidden.iter().zip(&self.spec.activations) {
            let z = dense(layer, activations.last().unwrap());
            activations.push(z.into_iter().map(|v| act.apply(v)).collect());
        }
        let logits = dense(out_layer, activations.last().unwrap());
        Trace { activations, logits }
    }

    /// Class probabilities for an already-scaled input.
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>, NnError> {
        self.check_arity(x)?;
        Ok(softmax(&self.trace(x).logits))
    }

    /// Most probable class; ties go to the smaller class code.
    pub fn predict(&self, x: &[T]) -> Result<AdlLabel, NnError> {
        Ok(argmax_label(&self.forward(x)?))
    }

    /// Applies the embedded scaler, then predicts.
    pub fn predict_raw(&self, raw: &[T]) -> Result<AdlLabel, NnError> {
        let x = self
            .scaler
            .apply(raw)
            .map_err(|_| NnError::ArityMismatch { expected: self.scaler.arity(), found: raw.len() })?;
        self.predict(&x)
    }

    /// Squared norm of all weights (biases excluded).
    pub fn weight_norm_sq(&self) -> T {
        self.layers.iter().flat_map(|l| l.weights.iter()).map(|&w| w * w).sum()
    }

    /// Cross-entropy of the true class plus `(lambda / 2) * sum(w^2)`.
    pub fn loss(&self, x: &[T], y: AdlLabel) -> Result<T, NnError> {
        self.check_arity(x)?;
        let logits = self.trace(x).logits;
        let data = log_sum_exp(&logits) - logits[y.code()];
        Ok(data + self.spec.l2_lambda * T::lit(0.5) * self.weight_norm_sq())
    }

    /// Analytic gradient of [`Model::loss`] and the loss itself.
    pub fn gradients(&self, x: &[T], y: AdlLabel) -> Result<(Gradients<T>, T), NnError> {
        self.check_arity(x)?;
        let Trace { activations, logits } = self.trace(x);
        let lambda = self.spec.l2_lambda;
        let loss = log_sum_exp(&logits) - logits[y.code()] + lambda * T::lit(0.5) * self.weight_norm_sq();

        // d loss / d logits = p - onehot(y)
        let mut delta = softmax(&logits);
        delta[y.code()] = delta[y.code()] - T::one();

        let mut grads = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let input = &activations[l];
            let mut gw = Vec::with_capacity(layer.weights.len());
            for (i, &a) in input.iter().enumerate() {
                for (j, &d) in delta.iter().enumerate() {
                    gw.push(a * d + lambda * layer.weight(i, j));
                }
            }
            let gb = delta.clone();
            if l > 0 {
                let act = self.spec.activations[l - 1];
                delta = (0..layer.inputs)
                    .map(|i| {
                        let back: T = (0..layer.outputs).map(|j| layer.weight(i, j) * delta[j]).sum();
                        back * act.derivative_from_output(input[i])
                    })
                    .collect();
            }
            grads.push(LayerGradient { weights: gw, biases: gb });
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, loss))
    }

    /// One SGD update in place; returns the loss before the update.
    pub fn step(&mut self, x: &[T], y: AdlLabel) -> Result<T, NnError> {
        let (grads, loss) = self.gradients(x, y)?;
        if !loss.is_finite() {
            return Err(NnError::NonFiniteLoss);
        }
        let lr = self.spec.learning_rate;
        for (layer, g) in self.layers.iter_mut().zip(&grads.layers) {
            for (w, &d) in layer.weights.iter_mut().zip(&g.weights) {
                *w = *w - lr * d;
            }
            for (b, &d) in layer.biases.iter_mut().zip(&g.biases) {
                *b = *b - lr * d;
            }
        }
        Ok(loss)
    }

    /// Parameter at a flat index, counting layer by layer with weights
    /// before biases (the [`Gradients::flatten`] order).
    pub(crate) fn param_mut(&mut self, mut k: usize) -> Option<&mut T> {
        for l in &mut self.layers {
            if k < l.weights.len() {
                return Some(&mut l.weights[k]);
            }
            k -= l.weights.len();
            if k < l.biases.len() {
                return Some(&mut l.biases[k]);
            }
            k -= l.biases.len();
        }
        None
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }
}

/// Returns the updated model and the pre-update loss.
pub fn backprop_step<T: Real>(m: &Model<T>, x: &[T], y: AdlLabel) -> Result<(Model<T>, T), NnError> {
    let mut next = m.clone();
    let loss = next.step(x, y)?;
    Ok((next, loss))
}

pub(crate) fn argmax_label<T: Real>(p: &[T]) -> AdlLabel {
    debug_assert_eq!(p.len(), OUTPUTS);
    let mut best = 0;
    for (i, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = i;
        }
    }
    AdlLabel::from_code(best).expect("five outputs")
}
