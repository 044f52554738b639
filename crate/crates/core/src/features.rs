//! Per-capture feature vector and the five nested dataset projections.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dsp::{self, DspError, PeakSet, ScalarSeries};
use crate::ingest::{AdlLabel, Capture};
use crate::{stats, Real};

/// Column names in storage order.
pub const FEATURE_COLUMNS: [&str; 15] = [
    "d1", "d2", "d3", "d4", "d5", "pk_avg", "pk_std", "pk_var", "pk_med", "raw_std", "raw_avg",
    "raw_max", "raw_min", "raw_var", "raw_med",
];

const PK_AVG: usize = 5;
const RAW_STD: usize = 9;
const RAW_AVG: usize = 10;
const RAW_VAR: usize = 13;
const RAW_MED: usize = 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("cannot extract features from an empty series")]
    EmptySeries,
    #[error("peak index {0} outside series")]
    PeakOutOfRange(usize),
    #[error(transparent)]
    Dsp(#[from] DspError),
}

impl FeatureError {
    pub fn kind(&self) -> &'static str {
        match self {
            FeatureError::EmptySeries => "EmptySeries",
            FeatureError::PeakOutOfRange(_) => "PeakOutOfRange",
            FeatureError::Dsp(e) => e.kind(),
        }
    }
}

/// Cleaning and peak-picking settings applied before feature extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureSettings {
    pub alpha: f64,
    pub min_separation_ms: f64,
    pub prominence_floor: f64,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        FeatureSettings {
            alpha: dsp::DEFAULT_ALPHA,
            min_separation_ms: dsp::DEFAULT_MIN_SEPARATION_MS,
            prominence_floor: dsp::DEFAULT_PROMINENCE_FLOOR,
        }
    }
}

/// Magnitude, low-pass, peaks, features.
pub fn featurize<T: Real>(c: &Capture, settings: &FeatureSettings) -> Result<FeatureVector<T>, FeatureError> {
    let cleaned = dsp::lowpass(&dsp::magnitude::<T>(c), T::lit(settings.alpha))?;
    let peaks = dsp::detect_peaks(&cleaned, settings.min_separation_ms, T::lit(settings.prominence_floor))?;
    extract_features(&cleaned, &peaks, c.label)
}

/// Fifteen scalar features of one capture.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    /// Five largest gaps between consecutive peaks, ms, descending.
    pub distances: [T; 5],
    pub pk_avg: T,
    pub pk_std: T,
    pub pk_var: T,
    pub pk_med: T,
    pub raw_std: T,
    pub raw_avg: T,
    pub raw_max: T,
    pub raw_min: T,
    pub raw_var: T,
    pub raw_med: T,
    pub label: AdlLabel,
}

impl<T: Real> FeatureVector<T> {
    /// All fifteen values in [`FEATURE_COLUMNS`] order.
    pub fn values(&self) -> [T; 15] {
        let d = &self.distances;
        [
            d[0], d[1], d[2], d[3], d[4], self.pk_avg, self.pk_std, self.pk_var, self.pk_med,
            self.raw_std, self.raw_avg, self.raw_max, self.raw_min, self.raw_var, self.raw_med,
        ]
    }

    pub fn from_values(v: [T; 15], label: AdlLabel) -> Self {
        FeatureVector {
            distances: [v[0], v[1], v[2], v[3], v[4]],
            pk_avg: v[5],
            pk_std: v[6],
            pk_var: v[7],
            pk_med: v[8],
            raw_std: v[9],
            raw_avg: v[10],
            raw_max: v[11],
            raw_min: v[12],
            raw_var: v[13],
            raw_med: v[14],
            label,
        }
    }
}

/// One of the five nested feature subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DatasetVariant {
    /// All fifteen features.
    D1,
    /// Peak and raw statistics, no distances.
    D2,
    /// The six raw-signal statistics.
    D3,
    /// Raw std, mean, variance, median.
    D4,
    /// Raw std and mean.
    D5,
}

impl DatasetVariant {
    pub const ALL: [DatasetVariant; 5] = [
        DatasetVariant::D1,
        DatasetVariant::D2,
        DatasetVariant::D3,
        DatasetVariant::D4,
        DatasetVariant::D5,
    ];

    /// Column indices into [`FEATURE_COLUMNS`], in output order.
    pub fn columns(self) -> &'static [usize] {
        const D1: [usize; 15] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14];
        const D4: [usize; 4] = [RAW_STD, RAW_AVG, RAW_VAR, RAW_MED];
        const D5: [usize; 2] = [RAW_STD, RAW_AVG];
        match self {
            DatasetVariant::D1 => &D1,
            DatasetVariant::D2 => &D1[PK_AVG..],
            DatasetVariant::D3 => &D1[RAW_STD..],
            DatasetVariant::D4 => &D4,
            DatasetVariant::D5 => &D5,
        }
    }

    pub fn arity(self) -> usize {
        self.columns().len()
    }

    /// 0-based position in D1..D5.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["D1", "D2", "D3", "D4", "D5"][self.index()]
    }
}

impl fmt::Display for DatasetVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for DatasetVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "D1" | "1" => Ok(DatasetVariant::D1),
            "D2" | "2" => Ok(DatasetVariant::D2),
            "D3" | "3" => Ok(DatasetVariant::D3),
            "D4" | "4" => Ok(DatasetVariant::D4),
            "D5" | "5" => Ok(DatasetVariant::D5),
            _ => Err(format!("unknown dataset variant `{s}`")),
        }
    }
}

/// Computes the feature vector of a cleaned series and its peaks.
///
/// Missing distances (fewer than six peaks) are zero-filled, and all peak
/// statistics are zero when there are no peaks. Variances are population
/// variances.
pub fn extract_features<T: Real>(
    s: &ScalarSeries<T>,
    p: &PeakSet<T>,
    label: AdlLabel,
) -> Result<FeatureVector<T>, FeatureError> {
    let raw = &s.values;
    if raw.is_empty() {
        return Err(FeatureError::EmptySeries);
    }
    if let Some(&bad) = p.indices.iter().find(|&&i| i >= raw.len()) {
        return Err(FeatureError::PeakOutOfRange(bad));
    }

    let period = T::lit(s.period_ms());
    let mut gaps: Vec<T> = p
        .indices
        .windows(2)
        .map(|w| T::lit((w[1] - w[0]) as f64) * period)
        .collect();
    gaps.sort_by(|a, b| b.partial_cmp(a).expect("finite gaps"));
    let mut distances = [T::zero(); 5];
    for (d, g) in distances.iter_mut().zip(gaps) {
        *d = g;
    }

    let pk_var = stats::variance(&p.values);
    let raw_var = stats::variance(raw);
    Ok(FeatureVector {
        distances,
        pk_avg: stats::mean(&p.values),
        pk_std: pk_var.sqrt(),
        pk_var,
        pk_med: stats::median(&p.values),
        raw_std: raw_var.sqrt(),
        raw_avg: stats::mean(raw),
        raw_max: stats::max(raw),
        raw_min: stats::min(raw),
        raw_var,
        raw_med: stats::median(raw),
        label,
    })
}

/// Selects the variant's columns from a feature vector.
pub fn project<T: Real>(f: &FeatureVector<T>, v: DatasetVariant) -> Vec<T> {
    let all = f.values();
    v.columns().iter().map(|&i| all[i]).collect()
}
