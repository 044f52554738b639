//! Scalar-series conditioning and peak picking.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::ingest::Capture;
use crate::{stats, Real};

/// Smoothing factor used when none is configured (about 1.7 Hz cutoff at
/// 100 Hz).
pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_MIN_SEPARATION_MS: f64 = 250.0;
pub const DEFAULT_PROMINENCE_FLOOR: f64 = 0.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DspError {
    #[error("low-pass alpha must lie in (0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("minimum peak separation must be non-negative, got {0}")]
    NegativeSeparation(f64),
    #[error("series needs at least 2 finite values")]
    InvalidSeries,
}

impl DspError {
    pub fn kind(&self) -> &'static str {
        match self {
            DspError::AlphaOutOfRange(_) => "AlphaOutOfRange",
            DspError::NegativeSeparation(_) => "NegativeSeparation",
            DspError::InvalidSeries => "InvalidSeries",
        }
    }
}

/// Uniformly sampled scalar signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSeries<T> {
    pub rate_hz: f64,
    pub values: Vec<T>,
}

impl<T: Real> ScalarSeries<T> {
    pub fn new(rate_hz: f64, values: Vec<T>) -> Result<Self, DspError> {
        if !(rate_hz.is_finite() && rate_hz > 0.0)
            || values.len() < 2
            || values.iter().any(|v| !v.is_finite())
        {
            return Err(DspError::InvalidSeries);
        }
        Ok(ScalarSeries { rate_hz, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Milliseconds between consecutive samples.
    pub fn period_ms(&self) -> f64 {
        1000.0 / self.rate_hz
    }
}

/// Retained peaks: indices strictly increasing, one value per index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakSet<T> {
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T> PeakSet<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Euclidean norm of each tri-axial sample.
pub fn magnitude<T: Real>(c: &Capture) -> ScalarSeries<T> {
    let values = c
        .samples
        .iter()
        .map(|s| {
            let (x, y, z) = (T::lit(s.x), T::lit(s.y), T::lit(s.z));
            (x * x + y * y + z * z).sqrt()
        })
        .collect();
    ScalarSeries { rate_hz: c.rate_hz, values }
}

/// Single-pole recursive smoother: `y[0] = x[0]`,
/// `y[i] = alpha * x[i] + (1 - alpha) * y[i-1]`.
pub fn lowpass<T: Real>(s: &ScalarSeries<T>, alpha: T) -> Result<ScalarSeries<T>, DspError> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(DspError::AlphaOutOfRange(alpha.as_f64()));
    }
    let keep = T::one() - alpha;
    let mut out = Vec::with_capacity(s.values.len());
    let mut prev = match s.values.first() {
        Some(&v) => v,
        None => return Ok(s.clone()),
    };
    out.push(prev);
    for &x in &s.values[1..] {
        prev = alpha * x + keep * prev;
        out.push(prev);
    }
    Ok(ScalarSeries { rate_hz: s.rate_hz, values: out })
}

/// Indices of strict local maxima. A flat top counts once, at its leftmost
/// sample, and only if the signal falls on both sides. Endpoints never
/// qualify.
pub fn local_maxima<T: Real>(values: &[T]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Local maxima above `mean + prominence_floor * std`, thinned greedily from
/// the highest down so that retained peaks are at least `min_separation_ms`
/// apart. Equal heights prefer the earlier index.
pub fn detect_peaks<T: Real>(
    s: &ScalarSeries<T>,
    min_separation_ms: f64,
    prominence_floor: T,
) -> Result<PeakSet<T>, DspError> {
    if min_separation_ms.is_nan() || min_separation_ms < 0.0 {
        return Err(DspError::NegativeSeparation(min_separation_ms));
    }
    let v = &s.values;
    let threshold = stats::mean(v) + prominence_floor * stats::std_dev(v);
    let mut candidates: Vec<usize> = local_maxima(v).into_iter().filter(|&i| v[i] > threshold).collect();
    candidates.sort_by(|&a, &b| match v[b].partial_cmp(&v[a]) {
        Some(Ordering::Equal) | None => a.cmp(&b),
        Some(o) => o,
    });

    let period = s.period_ms();
    let too_close = |a: usize, b: usize| (a.abs_diff(b) as f64) * period < min_separation_ms;
    let mut kept = BTreeSet::new();
    for i in candidates {
        let left = kept.range(..i).next_back().copied();
        let right = kept.range(i..).next().copied();
        if left.is_some_and(|k| too_close(i, k)) || right.is_some_and(|k| too_close(i, k)) {
            continue;
        }
        kept.insert(i);
    }
    let indices: Vec<usize> = kept.into_iter().collect();
    let values = indices.iter().map(|&i| v[i]).collect();
    Ok(PeakSet { indices, values })
}
