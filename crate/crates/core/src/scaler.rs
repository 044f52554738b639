//! Per-column normalisation fitted on training rows.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::{stats, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalerKind {
    Identity,
    MinMax,
    ZScore,
}

impl ScalerKind {
    pub fn code(self) -> u8 {
        match self {
            ScalerKind::Identity => 0,
            ScalerKind::MinMax => 1,
            ScalerKind::ZScore => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(ScalerKind::Identity),
            1 => Some(ScalerKind::MinMax),
            2 => Some(ScalerKind::ZScore),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalerKind::Identity => "identity",
            ScalerKind::MinMax => "minmax",
            ScalerKind::ZScore => "zscore",
        }
    }
}

impl fmt::Display for ScalerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for ScalerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" | "none" => Ok(ScalerKind::Identity),
            "minmax" => Ok(ScalerKind::MinMax),
            "zscore" => Ok(ScalerKind::ZScore),
            _ => Err(format!("unknown scaler `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalerError {
    #[error("cannot fit a scaler on zero rows")]
    EmptyFitSet,
    #[error("expected {expected} columns, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("non-finite scaler parameter in column {0}")]
    NonFinite(usize),
}

/// Frozen per-column parameters. For `MinMax` each pair is `(min, max)`, for
/// `ZScore` it is `(mean, std)`; `Identity` keeps pairs only for arity.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerParams<T> {
    pub kind: ScalerKind,
    pub columns: Vec<(T, T)>,
}

impl<T: Real> ScalerParams<T> {
    pub fn identity(arity: usize) -> Self {
        ScalerParams { kind: ScalerKind::Identity, columns: vec![(T::zero(), T::one()); arity] }
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    /// Fits per-column statistics. All rows must share the first row's arity.
    pub fn fit<R: AsRef<[T]>>(kind: ScalerKind, rows: &[R]) -> Result<Self, ScalerError> {
        let first = rows.first().ok_or(ScalerError::EmptyFitSet)?;
        let arity = first.as_ref().len();
        if let Some(bad) = rows.iter().find(|r| r.as_ref().len() != arity) {
            return Err(ScalerError::ArityMismatch { expected: arity, found: bad.as_ref().len() });
        }
        let column = |j: usize| rows.iter().map(|r| r.as_ref()[j]).collect::<Vec<T>>();
        let columns = (0..arity)
            .map(|j| match kind {
                ScalerKind::Identity => (T::zero(), T::one()),
                ScalerKind::MinMax => {
                    let c = column(j);
                    (stats::min(&c), stats::max(&c))
                }
                ScalerKind::ZScore => {
                    let c = column(j);
                    (stats::mean(&c), stats::std_dev(&c))
                }
            })
            .collect::<Vec<_>>();
        if let Some(j) = columns.iter().position(|(a, b)| !(a.is_finite() && b.is_finite())) {
            return Err(ScalerError::NonFinite(j));
        }
        Ok(ScalerParams { kind, columns })
    }

    /// Maps one row. Degenerate columns (zero range or zero std) map to 0;
    /// values outside the training range are not clamped.
    pub fn apply(&self, v: &[T]) -> Result<Vec<T>, ScalerError> {
        if v.len() != self.arity() {
            return Err(ScalerError::ArityMismatch { expected: self.arity(), found: v.len() });
        }
        let out = v
            .iter()
            .zip(&self.columns)
            .map(|(&x, &(a, b))| match self.kind {
                ScalerKind::Identity => x,
                ScalerKind::MinMax if b == a => T::zero(),
                ScalerKind::MinMax => (x - a) / (b - a),
                ScalerKind::ZScore if b == T::zero() => T::zero(),
                ScalerKind::ZScore => (x - a) / b,
            })
            .collect();
        Ok(out)
    }
}
