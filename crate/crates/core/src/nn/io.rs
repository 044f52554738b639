//! Binary model files.
//!
//! Little-endian throughout, reals stored as `f64`:
//!
//! ```text
//! magic    8 bytes  "ADLMODEL"
//! version  u32
//! preset   u8
//! arity    u32
//! hidden   u32 count, then per layer: width u32, activation u8
//! lr       f64
//! lambda   f64
//! seed     u64
//! variant  u8       0 = none, 1..=5 = D1..D5
//! scaler   u8 kind, u32 columns, then (a f64, b f64) per column
//! layers   u32 count, then per layer: inputs u32, outputs u32,
//!          inputs*outputs weights f64 (row-major), outputs biases f64
//! ```

use thiserror::Error;

use super::{Activation, Layer, Model, NetworkSpec, Preset};
use crate::features::DatasetVariant;
use crate::scaler::{ScalerKind, ScalerParams};
use crate::Real;

pub const MODEL_MAGIC: [u8; 8] = *b"ADLMODEL";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelIoError {
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model version {0}")]
    VersionMismatch(u32),
    #[error("model file truncated")]
    TruncatedFile,
    #[error("corrupt model file: {0}")]
    Corrupt(String),
}

impl ModelIoError {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelIoError::BadMagic => "BadMagic",
            ModelIoError::VersionMismatch(_) => "VersionMismatch",
            ModelIoError::TruncatedFile => "TruncatedFile",
            ModelIoError::Corrupt(_) => "Corrupt",
        }
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&u32::try_from(v).expect("dimension fits u32").to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn real<T: Real>(&mut self, v: T) {
        self.0.extend_from_slice(&v.as_f64().to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], ModelIoError> {
        if self.buf.len() < N {
            return Err(ModelIoError::TruncatedFile);
        }
        let (head, rest) = self.buf.split_at(N);
        self.buf = rest;
        Ok(head.try_into().unwrap())
    }
    fn u8(&mut self) -> Result<u8, ModelIoError> {
        Ok(self.take::<1>()?[0])
    }
    fn u32(&mut self) -> Result<usize, ModelIoError> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }
    fn u64(&mut self) -> Result<u64, ModelIoError> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn real<T: Real>(&mut self) -> Result<T, ModelIoError> {
        let v = f64::from_le_bytes(self.take()?);
        if !v.is_finite() {
            return Err(ModelIoError::Corrupt("non-finite parameter".into()));
        }
        Ok(T::lit(v))
    }
    /// Guards a declared element count against the bytes actually left.
    fn expect_at_least(&self, count: usize, width: usize) -> Result<(), ModelIoError> {
        match count.checked_mul(width) {
            Some(n) if n <= self.buf.len() => Ok(()),
            _ => Err(ModelIoError::TruncatedFile),
        }
    }
}

pub fn save_model<T: Real>(m: &Model<T>) -> Vec<u8> {
    let mut w = Writer(Vec::with_capacity(64 + m.parameter_count() * 8));
    w.0.extend_from_slice(&MODEL_MAGIC);
    w.0.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    let s = &m.spec;
    w.u8(s.preset.code());
    w.u32(s.input_arity);
    w.u32(s.hidden_layers.len());
    for (&width, act) in s.hidden_layers.iter().zip(&s.activations) {
        w.u32(width);
        w.u8(act.code());
    }
    w.real(s.learning_rate);
    w.real(s.l2_lambda);
    w.u64(s.seed);
    w.u8(m.variant.map_or(0, |v| v.index() as u8 + 1));
    w.u8(m.scaler.kind.code());
    w.u32(m.scaler.columns.len());
    for &(a, b) in &m.scaler.columns {
        w.real(a);
        w.real(b);
    }
    w.u32(m.layers.len());
    for l in &m.layers {
        w.u32(l.inputs);
        w.u32(l.outputs);
        l.weights.iter().for_each(|&v| w.real(v));
        l.biases.iter().for_each(|&v| w.real(v));
    }
    w.0
}

pub fn load_model<T: Real>(bytes: &[u8]) -> Result<Model<T>, ModelIoError> {
    let corrupt = |m: &str| ModelIoError::Corrupt(m.to_string());
    let mut r = Reader { buf: bytes };
    if r.take::<8>().map_err(|_| ModelIoError::BadMagic)? != MODEL_MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    let version = u32::from_le_bytes(r.take()?);
    if version != MODEL_VERSION {
        return Err(ModelIoError::VersionMismatch(version));
    }

    let preset = Preset::from_code(r.u8()?).ok_or_else(|| corrupt("unknown preset"))?;
    let input_arity = r.u32()?;
    let n_hidden = r.u32()?;
    r.expect_at_least(n_hidden, 5)?;
    let mut hidden_layers = Vec::with_capacity(n_hidden);
    let mut activations = Vec::with_capacity(n_hidden);
    for _ in 0..n_hidden {
        hidden_layers.push(r.u32()?);
        activations.push(Activation::from_code(r.u8()?).ok_or_else(|| corrupt("unknown activation"))?);
    }
    let spec = NetworkSpec {
        preset,
        input_arity,
        hidden_layers,
        activations,
        learning_rate: r.real()?,
        l2_lambda: r.real()?,
        seed: r.u64()?,
    };
    spec.validate().map_err(|e| ModelIoError::Corrupt(e.to_string()))?;

    let variant = match r.u8()? {
        0 => None,
        c @ 1..=5 => Some(DatasetVariant::ALL[c as usize - 1]),
        _ => return Err(corrupt("unknown dataset variant")),
    };
    let kind = ScalerKind::from_code(r.u8()?).ok_or_else(|| corrupt("unknown scaler kind"))?;
    let n_cols = r.u32()?;
    r.expect_at_least(n_cols, 16)?;
    let columns = (0..n_cols)
        .map(|_| Ok((r.real()?, r.real()?)))
        .collect::<Result<Vec<_>, ModelIoError>>()?;
    if n_cols != input_arity {
        return Err(corrupt("scaler arity differs from network input"));
    }

    let widths = spec.widths();
    let n_layers = r.u32()?;
    if n_layers != widths.len() - 1 {
        return Err(corrupt("layer count does not match spec"));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for w in widths.windows(2) {
        let (inputs, outputs) = (r.u32()?, r.u32()?);
        if (inputs, outputs) != (w[0], w[1]) {
            return Err(corrupt("layer shape does not chain"));
        }
        r.expect_at_least(inputs * outputs + outputs, 8)?;
        let mut layer = Layer::zeros(inputs, outputs);
        for v in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
            *v = r.real()?;
        }
        layers.push(layer);
    }
    if !r.buf.is_empty() {
        return Err(corrupt("trailing bytes"));
    }
    Ok(Model { spec, layers, scaler: ScalerParams { kind, columns }, variant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_model;

    fn sample_model() -> Model<f64> {
        let mut m = init_model(NetworkSpec::from_preset(Preset::Deep, 6, 77)).unwrap();
        m.scaler = ScalerParams { kind: ScalerKind::ZScore, columns: (0..6).map(|i| (i as f64, 0.5)).collect() };
        m.layers[1].biases[3] = -0.125;
        m
    }

    #[test]
    fn roundtrip_is_bit_identical() {
        let m = sample_model();
        let bytes = save_model(&m);
        let back: Model<f64> = load_model(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(save_model(&back), bytes);
    }

    #[test]
    fn truncated() {
        let bytes = save_model(&sample_model());
        for cut in [9, 13, 40, bytes.len() - 1] {
            assert_eq!(load_model::<f64>(&bytes[..cut]).unwrap_err(), ModelIoError::TruncatedFile, "cut {cut}");
        }
    }

    #[test]
    fn bad_magic_and_version() {
        let mut bytes = save_model(&sample_model());
        bytes[8] = 2;
        assert_eq!(load_model::<f64>(&bytes).unwrap_err(), ModelIoError::VersionMismatch(2));
        bytes[0] = b'X';
        assert_eq!(load_model::<f64>(&bytes).unwrap_err(), ModelIoError::BadMagic);
        assert_eq!(load_model::<f64>(b"ADL").unwrap_err(), ModelIoError::BadMagic);
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut bytes = save_model(&sample_model());
        bytes.push(0);
        assert!(matches!(load_model::<f64>(&bytes), Err(ModelIoError::Corrupt(_))));
    }
}
