//! Capture files and feature tables.
//!
//! A capture file is a one-line header followed by `t_ms,x,y,z` rows:
//!
//! ```text
//! # adl=walking rate_hz=100
//! 0,0.12,-0.4,9.83
//! 10,0.10,-0.38,9.90
//! ```
//!
//! Reals are written with the shortest representation that parses back to
//! the same `f64`, so `parse_capture(serialize_capture(c)) == c` exactly.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::features::{FeatureVector, FEATURE_COLUMNS};
use crate::Real;

/// Nominal capture length in milliseconds.
pub const NOMINAL_DURATION_MS: f64 = 5000.0;
/// Accepted relative deviation from [`NOMINAL_DURATION_MS`].
pub const DURATION_TOLERANCE: f64 = 0.10;
/// Accepted relative deviation of the median sample gap from `1000 / rate_hz`.
pub const GAP_TOLERANCE: f64 = 0.20;

/// The five recognised activities. Codes 0..=4 follow declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AdlLabel {
    Running,
    Walking,
    GoingUpstairs,
    GoingDownstairs,
    Standing,
}

impl AdlLabel {
    pub const ALL: [AdlLabel; 5] = [
        AdlLabel::Running,
        AdlLabel::Walking,
        AdlLabel::GoingUpstairs,
        AdlLabel::GoingDownstairs,
        AdlLabel::Standing,
    ];
    pub const COUNT: usize = 5;

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            AdlLabel::Running => "running",
            AdlLabel::Walking => "walking",
            AdlLabel::GoingUpstairs => "going_upstairs",
            AdlLabel::GoingDownstairs => "going_downstairs",
            AdlLabel::Standing => "standing",
        }
    }
}

impl fmt::Display for AdlLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for AdlLabel {
    type Err = IngestError;

    /// Accepts the snake_case name or the integer code.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(l) = Self::ALL.iter().find(|l| l.name() == s) {
            return Ok(*l);
        }
        s.parse::<usize>()
            .ok()
            .and_then(Self::from_code)
            .ok_or_else(|| IngestError::UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t_ms: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// One labelled tri-axial recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Capture {
    pub label: AdlLabel,
    pub rate_hz: f64,
    pub samples: Vec<Sample>,
}

impl Capture {
    /// Builds a capture, enforcing the structural invariants (positive rate,
    /// at least two samples, strictly increasing non-negative timestamps).
    pub fn new(label: AdlLabel, rate_hz: f64, samples: Vec<Sample>) -> Result<Self, IngestError> {
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(IngestError::InvalidRate(rate_hz));
        }
        if samples.len() < 2 {
            return Err(IngestError::TooFewSamples(samples.len()));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if w[1].t_ms <= w[0].t_ms {
                // header is line 1, sample k sits on line k + 2
                return Err(IngestError::NonMonotonicTimestamp(i + 3));
            }
        }
        Ok(Capture { label, rate_hz, samples })
    }

    pub fn duration_ms(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t_ms - a.t_ms,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("missing or malformed header on line 1")]
    MissingHeader,
    #[error("unknown ADL label `{0}`")]
    UnknownLabel(String),
    #[error("malformed line {0}")]
    MalformedLine(usize),
    #[error("timestamp not strictly increasing on line {0}")]
    NonMonotonicTimestamp(usize),
    #[error("sample rate must be positive, got {0}")]
    InvalidRate(f64),
    #[error("capture needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("capture duration {0} ms outside 5000 ms ±10%")]
    DurationOutOfRange(f64),
    #[error("median sample gap {median_ms} ms too far from nominal {nominal_ms} ms")]
    IrregularSampling { median_ms: f64, nominal_ms: f64 },
    #[error("feature table header mismatch")]
    HeaderMismatch,
    #[error("row on line {line} has {found} fields, expected {expected}")]
    RowArityMismatch { line: usize, found: usize, expected: usize },
    #[error("bad value on line {0}")]
    BadValue(usize),
    #[error("input is not valid UTF-8")]
    NotUtf8,
}

impl IngestError {
    pub fn kind(&self) -> &'static str {
        match self {
            IngestError::MissingHeader => "MissingHeader",
            IngestError::UnknownLabel(_) => "UnknownLabel",
            IngestError::MalformedLine(_) => "MalformedLine",
            IngestError::NonMonotonicTimestamp(_) => "NonMonotonicTimestamp",
            IngestError::InvalidRate(_) => "InvalidRate",
            IngestError::TooFewSamples(_) => "TooFewSamples",
            IngestError::DurationOutOfRange(_) => "DurationOutOfRange",
            IngestError::IrregularSampling { .. } => "IrregularSampling",
            IngestError::HeaderMismatch => "HeaderMismatch",
            IngestError::RowArityMismatch { .. } => "RowArityMismatch",
            IngestError::BadValue(_) => "BadValue",
            IngestError::NotUtf8 => "NotUtf8",
        }
    }
}

fn parse_header(line: &str) -> Result<(AdlLabel, f64), IngestError> {
    let rest = line.trim().strip_prefix('#').ok_or(IngestError::MissingHeader)?;
    let mut label = None;
    let mut rate = None;
    for tok in rest.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or(IngestError::MissingHeader)?;
        match k {
            "adl" => label = Some(v.parse::<AdlLabel>()?),
            "rate_hz" => rate = Some(v.parse::<f64>().map_err(|_| IngestError::MalformedLine(1))?),
            _ => {}
        }
    }
    match (label, rate) {
        (Some(l), Some(r)) => Ok((l, r)),
        _ => Err(IngestError::MissingHeader),
    }
}

/// Parses a capture file. Blank lines are skipped; error line numbers are
/// 1-based.
pub fn parse_capture(bytes: &[u8]) -> Result<Capture, IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::NotUtf8)?;
    let mut lines = text.lines();
    let (label, rate_hz) = parse_header(lines.next().ok_or(IngestError::MissingHeader)?)?;
    if !(rate_hz.is_finite() && rate_hz > 0.0) {
        return Err(IngestError::InvalidRate(rate_hz));
    }

    let mut samples: Vec<Sample> = Vec::new();
    for (idx, raw) in lines.enumerate() {
        let line_no = idx + 2;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut vals = [0.0f64; 4];
        let mut n = 0;
        for field in line.split(',') {
            if n == 4 {
                return Err(IngestError::MalformedLine(line_no));
            }
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| IngestError::MalformedLine(line_no))?;
            if !v.is_finite() {
                return Err(IngestError::MalformedLine(line_no));
            }
            vals[n] = v;
            n += 1;
        }
        if n != 4 || vals[0] < 0.0 {
            return Err(IngestError::MalformedLine(line_no));
        }
        if let Some(prev) = samples.last() {
            if vals[0] <= prev.t_ms {
                return Err(IngestError::NonMonotonicTimestamp(line_no));
            }
        }
        samples.push(Sample { t_ms: vals[0], x: vals[1], y: vals[2], z: vals[3] });
    }
    if samples.len() < 2 {
        return Err(IngestError::TooFewSamples(samples.len()));
    }
    Ok(Capture { label, rate_hz, samples })
}

pub fn serialize_capture(c: &Capture) -> Vec<u8> {
    let mut out = String::with_capacity(32 + c.samples.len() * 48);
    writeln!(out, "# adl={} rate_hz={}", c.label.name(), c.rate_hz).unwrap();
    for s in &c.samples {
        writeln!(out, "{},{},{},{}", s.t_ms, s.x, s.y, s.z).unwrap();
    }
    out.into_bytes()
}

/// Checks duration and sampling regularity of a parsed capture.
pub fn validate_capture(c: Capture) -> Result<Capture, IngestError> {
    let duration = c.duration_ms();
    if (duration - NOMINAL_DURATION_MS).abs() > DURATION_TOLERANCE * NOMINAL_DURATION_MS {
        return Err(IngestError::DurationOutOfRange(duration));
    }
    let gaps: Vec<f64> = c.samples.windows(2).map(|w| w[1].t_ms - w[0].t_ms).collect();
    let median_ms = crate::stats::median(&gaps);
    let nominal_ms = 1000.0 / c.rate_hz;
    if (median_ms - nominal_ms).abs() > GAP_TOLERANCE * nominal_ms {
        return Err(IngestError::IrregularSampling { median_ms, nominal_ms });
    }
    Ok(c)
}

pub fn feature_table_header() -> String {
    let mut h = FEATURE_COLUMNS.join(",");
    h.push_str(",label");
    h
}

/// Writes feature rows as CSV with the fixed 16-column header.
pub fn write_feature_table<T: Real>(rows: &[FeatureVector<T>]) -> Vec<u8> {
    let mut out = feature_table_header();
    out.push('\n');
    for r in rows {
        for v in r.values() {
            write!(out, "{},", v.as_f64()).unwrap();
        }
        out.push_str(r.label.name());
        out.push('\n');
    }
    out.into_bytes()
}

pub fn read_feature_table<T: Real>(bytes: &[u8]) -> Result<Vec<FeatureVector<T>>, IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::NotUtf8)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let (_, header) = lines.next().ok_or(IngestError::HeaderMismatch)?;
    if header.trim() != feature_table_header() {
        return Err(IngestError::HeaderMismatch);
    }
    let expected = FEATURE_COLUMNS.len() + 1;
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != expected {
            return Err(IngestError::RowArityMismatch { line: line_no, found: fields.len(), expected });
        }
        let mut values = [T::zero(); 15];
        for (slot, f) in values.iter_mut().zip(&fields) {
            let v: f64 = f.trim().parse().map_err(|_| IngestError::BadValue(line_no))?;
            if !v.is_finite() {
                return Err(IngestError::BadValue(line_no));
            }
            *slot = T::lit(v);
        }
        let label: AdlLabel = fields[expected - 1].parse()?;
        rows.push(FeatureVector::from_values(values, label));
    }
    Ok(rows)
}
