//! Population statistics over slices.

use crate::Real;

pub fn mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.iter().copied().sum::<T>() / T::lit(xs.len() as f64)
}

/// Population variance (divides by n).
pub fn variance<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::lit(xs.len() as f64)
}

pub fn std_dev<T: Real>(xs: &[T]) -> T {
    variance(xs).sqrt()
}

/// Median; even-length inputs average the two central values.
pub fn median<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

pub fn min<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().fold(T::infinity(), T::min)
}

pub fn max<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().fold(T::neg_infinity(), T::max)
}
