use rand::Rng;
use rand_distr::StandardNormal;

use super::{init_model, Gradients, Model, NetworkSpec, NnError, Preset};
use crate::features::DatasetVariant;
use crate::ingest::AdlLabel;
use crate::{rng, Real};

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Largest acceptable relative error for 64-bit arithmetic.
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-4;
/// Denominator floor, keeps pairs of near-zero derivatives from reporting
/// rounding noise as a large relative error.
const RELATIVE_FLOOR: f64 = 1e-6;

/// `|a - n| / max(|a| + |n|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(RELATIVE_FLOOR)
}

/// Worst relative error between [`Model::gradients`] and central finite
/// differences of [`Model::loss`] over every parameter.
pub fn grad_check<T: Real>(m: &Model<T>, x: &[T], y: AdlLabel) -> Result<f64, NnError> {
    grad_check_with(m, x, y, |m, x, y| m.gradients(x, y).map(|(g, _)| g))
}

/// As [`grad_check`], with the analytic gradient supplied by the caller.
pub fn grad_check_with<T, F>(m: &Model<T>, x: &[T], y: AdlLabel, analytic: F) -> Result<f64, NnError>
where
    T: Real,
    F: Fn(&Model<T>, &[T], AdlLabel) -> Result<Gradients<T>, NnError>,
{
    let analytic = analytic(m, x, y)?.flatten();
    let h = T::lit(FD_STEP);
    let mut probe = m.clone();
    let mut worst = 0.0f64;
    for (k, &a) in analytic.iter().enumerate() {
        let orig = *probe.param_mut(k).expect("parameter index");
        *probe.param_mut(k).unwrap() = orig + h;
        let plus = probe.loss(x, y)?;
        *probe.param_mut(k).unwrap() = orig - h;
        let minus = probe.loss(x, y)?;
        *probe.param_mut(k).unwrap() = orig;
        let numeric = (plus - minus) / (h + h);
        let err = relative_error(a.as_f64(), numeric.as_f64());
        if err.is_nan() || err > worst {
            worst = err;
        }
    }
    Ok(worst)
}

/// Outcome of [`check_random_trials`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSummary {
    pub trials: usize,
    pub worst: f64,
    pub worst_trial: usize,
}

impl TrialSummary {
    pub fn passed(&self) -> bool {
        self.worst < GRAD_CHECK_TOLERANCE
    }
}

/// Gradient-checks `trials` random `(model, input, label)` triples of a
/// preset: input arity drawn from the five dataset variants, Glorot weights,
/// biases drawn from N(0, 0.1), inputs from N(0, 1).
pub fn check_random_trials(preset: Preset, trials: usize, seed: u64) -> Result<TrialSummary, NnError> {
    let mut summary = TrialSummary { trials, worst: 0.0, worst_trial: 0 };
    for t in 0..trials {
        let mut r = rng::seeded(rng::derive_seed(seed, &[preset.code() as u64, t as u64]));
        let arity = DatasetVariant::ALL[r.random_range(0..DatasetVariant::ALL.len())].arity();
        let mut m = init_model(NetworkSpec::<f64>::from_preset(preset, arity, r.random()))?;
        for l in &mut m.layers {
            for b in &mut l.biases {
                *b = 0.1 * r.sample::<f64, _>(StandardNormal);
            }
        }
        let x: Vec<f64> = (0..arity).map(|_| r.sample(StandardNormal)).collect();
        let y = AdlLabel::ALL[r.random_range(0..AdlLabel::COUNT)];
        let err = grad_check(&m, &x, y)?;
        if err > summary.worst {
            summary.worst = err;
            summary.worst_trial = t;
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_input(n: usize, seed: u64) -> Vec<f64> {
        let mut r = rng::seeded(seed);
        (0..n).map(|_| r.random_range(-2.0..2.0)).collect()
    }

    #[test]
    fn linear_model() {
        let spec = NetworkSpec {
            preset: Preset::MlpBp,
            input_arity: 6,
            hidden_layers: vec![],
            activations: vec![],
            learning_rate: 0.01,
            l2_lambda: 0.0,
            seed: 5,
        };
        let m = init_model(spec).unwrap();
        let err = grad_check(&m, &random_input(6, 1), AdlLabel::Walking).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn deep_preset() {
        let m = init_model(NetworkSpec::<f64>::from_preset(Preset::Deep, 15, 9)).unwrap();
        let err = grad_check(&m, &random_input(15, 2), AdlLabel::Standing).unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn sign_flip_is_caught() {
        let m = init_model(NetworkSpec::<f64>::from_preset(Preset::FfBp, 4, 9)).unwrap();
        let x = random_input(4, 3);
        let err = grad_check_with(&m, &x, AdlLabel::Running, |m, x, y| {
            let (mut g, _) = m.gradients(x, y)?;
            for v in g.layers.iter_mut().flat_map(|l| l.weights.iter_mut()) {
                *v = -*v;
            }
            Ok(g)
        })
        .unwrap();
        assert!(err > 0.1, "{err}");
    }

    #[test]
    fn random_trials_each_preset() {
        for p in Preset::ALL {
            let s = check_random_trials(p, 5, 1).unwrap();
            assert!(s.passed(), "{p}: {s:?}");
        }
    }
}
