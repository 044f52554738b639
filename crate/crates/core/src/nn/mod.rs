//! Dense feed-forward classifiers trained by single-example SGD.
//!
//! Three presets cover a one-hidden-layer sigmoid MLP, a two-hidden-layer
//! sigmoid feed-forward net and a deeper ReLU net with L2 weight decay. All
//! end in a five-way softmax trained on cross-entropy.

mod gradcheck;
mod io;
mod network;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::features::DatasetVariant;
use crate::scaler::ScalerParams;
use crate::Real;

pub use gradcheck::{
    check_random_trials, grad_check, grad_check_with, relative_error, TrialSummary, FD_STEP, GRAD_CHECK_TOLERANCE,
};
pub use io::{load_model, save_model, ModelIoError, MODEL_MAGIC, MODEL_VERSION};
pub use network::{backprop_step, init_model, Gradients, LayerGradient};

/// Number of output classes.
pub const OUTPUTS: usize = crate::ingest::AdlLabel::COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Preset {
    /// One sigmoid hidden layer of width `2 * arity`.
    MlpBp,
    /// Sigmoid hidden layers `(2 * arity, arity)`.
    FfBp,
    /// ReLU hidden layers `(32, 16, 8)` with L2 decay.
    Deep,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::MlpBp, Preset::FfBp, Preset::Deep];

    pub fn name(self) -> &'static str {
        match self {
            Preset::MlpBp => "mlp-bp",
            Preset::FfBp => "ff-bp",
            Preset::Deep => "deep",
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Self::ALL.get(c as usize).copied()
    }

    pub fn activation(self) -> Activation {
        match self {
            Preset::MlpBp | Preset::FfBp => Activation::Sigmoid,
            Preset::Deep => Activation::Relu,
        }
    }

    pub fn default_hidden(self, input_arity: usize) -> Vec<usize> {
        match self {
            Preset::MlpBp => vec![2 * input_arity],
            Preset::FfBp => vec![2 * input_arity, input_arity],
            Preset::Deep => vec![32, 16, 8],
        }
    }

    pub fn default_learning_rate(self) -> f64 {
        match self {
            Preset::MlpBp | Preset::FfBp => 0.01,
            Preset::Deep => 0.005,
        }
    }

    pub fn default_l2(self) -> f64 {
        match self {
            Preset::MlpBp | Preset::FfBp => 0.0,
            Preset::Deep => 1e-4,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "mlp-bp" | "mlpbp" | "mlp" => Ok(Preset::MlpBp),
            "ff-bp" | "ffbp" | "ff" => Ok(Preset::FfBp),
            "deep" => Ok(Preset::Deep),
            _ => Err(format!("unknown preset `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Sigmoid,
    Relu,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Sigmoid => 0,
            Activation::Relu => 1,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Activation::Sigmoid),
            1 => Some(Activation::Relu),
            _ => None,
        }
    }

    #[inline]
    pub fn apply<T: Real>(self, z: T) -> T {
        match self {
            Activation::Sigmoid => T::one() / (T::one() + (-z).exp()),
            Activation::Relu => z.max(T::zero()),
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    pub fn derivative_from_output<T: Real>(self, a: T) -> T {
        match self {
            Activation::Sigmoid => a * (T::one() - a),
            Activation::Relu => {
                if a > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Architecture and optimiser settings of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec<T> {
    pub preset: Preset,
    pub input_arity: usize,
    pub hidden_layers: Vec<usize>,
    /// One activation per hidden layer.
    pub activations: Vec<Activation>,
    pub learning_rate: T,
    pub l2_lambda: T,
    pub seed: u64,
}

impl<T: Real> NetworkSpec<T> {
    /// The preset's default topology and hyper-parameters.
    pub fn from_preset(preset: Preset, input_arity: usize, seed: u64) -> Self {
        let hidden_layers = preset.default_hidden(input_arity);
        NetworkSpec {
            preset,
            input_arity,
            activations: vec![preset.activation(); hidden_layers.len()],
            hidden_layers,
            learning_rate: T::lit(preset.default_learning_rate()),
            l2_lambda: T::lit(preset.default_l2()),
            seed,
        }
    }

    /// Layer widths from input to output.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden_layers.len() + 2);
        w.push(self.input_arity);
        w.extend_from_slice(&self.hidden_layers);
        w.push(OUTPUTS);
        w
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let fail = |m: &str| Err(NnError::InvalidSpec(m.to_string()));
        if self.input_arity == 0 {
            return fail("input arity must be positive");
        }
        if self.hidden_layers.contains(&0) {
            return fail("hidden widths must be at least 1");
        }
        if self.activations.len() != self.hidden_layers.len() {
            return fail("need exactly one activation per hidden layer");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= T::zero()) {
            return fail("learning rate must be finite and non-negative");
        }
        if !(self.l2_lambda.is_finite() && self.l2_lambda >= T::zero()) {
            return fail("l2 lambda must be finite and non-negative");
        }
        if self.l2_lambda > T::zero() && self.preset != Preset::Deep {
            return fail("l2 regularisation is only available for the deep preset");
        }
        Ok(())
    }
}

/// Dense layer; `weights` is row-major `inputs x outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

impl<T: Real> Layer<T> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer { inputs, outputs, weights: vec![T::zero(); inputs * outputs], biases: vec![T::zero(); outputs] }
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> T {
        self.weights[i * self.outputs + j]
    }
}

/// A network together with the scaler its inputs must pass through.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    pub spec: NetworkSpec<T>,
    pub layers: Vec<Layer<T>>,
    pub scaler: ScalerParams<T>,
    pub variant: Option<DatasetVariant>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NnError {
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("input has {found} values, network expects {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("loss became non-finite")]
    NonFiniteLoss,
}

impl NnError {
    pub fn kind(&self) -> &'static str {
        match self {
            NnError::InvalidSpec(_) => "InvalidSpec",
            NnError::ArityMismatch { .. } => "ArityMismatch",
            NnError::NonFiniteLoss => "NonFiniteLoss",
        }
    }
}
