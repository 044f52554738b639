//! Straightforward reference implementations used as test oracles.
//!
//! Nothing here calls into the crate's numeric code: each routine is
//! recomputed from the definition with plain loops.

#![allow(dead_code)]

use adl_core::ingest::AdlLabel;
use adl_core::nn::{Activation, Model};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn naive_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut s = 0.0;
    for &x in xs {
        s += x;
    }
    s / xs.len() as f64
}

pub fn naive_var(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = naive_mean(xs);
    let mut s = 0.0;
    for &x in xs {
        s += (x - m) * (x - m);
    }
    s / xs.len() as f64
}

pub fn naive_median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    // insertion sort keeps this independent of the library's sort call
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            j -= 1;
        }
    }
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Peak detection by exhaustive scan.
///
/// A candidate is the first sample of a run of equal values that is strictly
/// higher than the sample before the run and strictly higher than the sample
/// after it. Candidates are visited highest first (earlier index on ties) by
/// repeated linear selection, and each is kept only if no already kept peak
/// lies closer than `min_sep_ms`.
pub fn oracle_peaks(v: &[f64], rate_hz: f64, min_sep_ms: f64, floor: f64) -> Vec<usize> {
    let n = v.len();
    let threshold = naive_mean(v) + floor * naive_var(v).sqrt();
    let mut cand = Vec::new();
    for i in 1..n {
        if v[i] <= v[i - 1] {
            continue;
        }
        let mut j = i;
        while j + 1 < n && v[j + 1] == v[i] {
            j += 1;
        }
        if j + 1 < n && v[j + 1] < v[i] && v[i] > threshold {
            cand.push(i);
        }
    }
    let period = 1000.0 / rate_hz;
    let mut used = vec![false; cand.len()];
    let mut kept: Vec<usize> = Vec::new();
    for _ in 0..cand.len() {
        let mut pick: Option<usize> = None;
        for (c, &i) in cand.iter().enumerate() {
            if used[c] {
                continue;
            }
            pick = match pick {
                None => Some(c),
                Some(p) if v[i] > v[cand[p]] => Some(c),
                Some(p) if v[i] == v[cand[p]] && i < cand[p] => Some(c),
                keep => keep,
            };
        }
        let c = pick.unwrap();
        used[c] = true;
        let i = cand[c];
        let clash = kept.iter().any(|&k| (i.abs_diff(k) as f64) * period < min_sep_ms);
        if !clash {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

/// Fifteen features recomputed from their definitions, in column order.
pub fn oracle_features(v: &[f64], rate_hz: f64, peaks: &[usize]) -> [f64; 15] {
    let period = 1000.0 / rate_hz;
    let mut gaps: Vec<f64> = Vec::new();
    for k in 1..peaks.len() {
        gaps.push((peaks[k] - peaks[k - 1]) as f64 * period);
    }
    let mut d = [0.0; 5];
    for slot in d.iter_mut() {
        // take the largest remaining gap
        let mut best: Option<usize> = None;
        for (g, &val) in gaps.iter().enumerate() {
            if best.is_none_or(|b| val > gaps[b]) {
                best = Some(g);
            }
        }
        if let Some(b) = best {
            *slot = gaps.remove(b);
        }
    }
    let pv: Vec<f64> = peaks.iter().map(|&i| v[i]).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    [
        d[0],
        d[1],
        d[2],
        d[3],
        d[4],
        naive_mean(&pv),
        naive_var(&pv).sqrt(),
        naive_var(&pv),
        naive_median(&pv),
        naive_var(v).sqrt(),
        naive_mean(v),
        hi,
        lo,
        naive_var(v),
        naive_median(v),
    ]
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Softmax output of a model computed with explicit loops.
pub fn oracle_forward(m: &Model<f64>, x: &[f64]) -> Vec<f64> {
    let mut a = x.to_vec();
    let last = m.layers.len() - 1;
    for (l, layer) in m.layers.iter().enumerate() {
        let mut z = vec![0.0; layer.outputs];
        for (j, zj) in z.iter_mut().enumerate() {
            let mut s = layer.biases[j];
            for (i, &ai) in a.iter().enumerate() {
                s += ai * layer.weights[i * layer.outputs + j];
            }
            *zj = s;
        }
        if l < last {
            for zj in z.iter_mut() {
                *zj = match m.spec.activations[l] {
                    Activation::Sigmoid => 1.0 / (1.0 + (-*zj).exp()),
                    Activation::Relu => zj.max(0.0),
                };
            }
        }
        a = z;
    }
    let top = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = a.iter().map(|z| (z - top).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

/// Random series on a coarse grid of levels so that ties and flat tops are
/// common.
pub fn quantized_series(rng: &mut ChaCha8Rng, n: usize, levels: u32) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0..levels) as f64 * 0.5).collect()
}

pub fn smooth_series(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(n);
    let mut x: f64 = 9.81;
    for _ in 0..n {
        x += rng.random_range(-1.0..1.0);
        v.push(x);
    }
    v
}

pub fn random_label(rng: &mut ChaCha8Rng) -> AdlLabel {
    AdlLabel::from_code(rng.random_range(0..AdlLabel::COUNT)).unwrap()
}
