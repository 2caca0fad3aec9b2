//! Composite Newton–Cotes rules on uniform grids.
//!
//! All rules take the sampled values `f_0..f_n` (n + 1 samples, n intervals)
//! and the spacing `h`. Summation is always in ascending index order so
//! results are bit-reproducible.

use std::ops::{Add, Mul};

/// Values that can be integrated: real or complex samples.
pub trait Integrand: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {}

impl<T> Integrand for T where T: Copy + Default + Add<Output = T> + Mul<f64, Output = T> {}

/// Composite trapezoid rule.
pub fn trapezoid<T: Integrand>(values: &[T], h: f64) -> T {
    match values.len() {
        0 | 1 => T::default(),
        n => {
            let mut acc = (values[0] + values[n - 1]) * 0.5;
            for &v in &values[1..n - 1] {
                acc = acc + v;
            }
            acc * h
        }
    }
}

/// Running trapezoid integral on a (possibly non-uniform) time grid.
/// `out[k] = ∫_{t_0}^{t_k} f`.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for k in 0..values.len() {
        if k > 0 {
            acc += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// Running integral on a uniform grid with per-panel cubic interpolation
/// (fourth order). Falls back to the trapezoid below four samples.
pub fn cumulative_cubic(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    if n < 4 {
        let times: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
        return cumulative_trapezoid(&times, values);
    }
    let f = values;
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 0..n - 1 {
        let panel = if k == 0 {
            (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) / 24.0
        } else if k == n - 2 {
            (f[k - 2] - 5.0 * f[k - 1] + 19.0 * f[k] + 9.0 * f[k + 1]) / 24.0
        } else {
            (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2]) / 24.0
        };
        acc += h * panel;
        out.push(acc);
    }
    out
}

/// Composite Simpson rule. An odd number of intervals closes with the
/// 3/8 rule on the last three; a single interval falls back to the trapezoid.
pub fn simpson<T: Integrand>(values: &[T], h: f64) -> T {
    let n = values.len().saturating_sub(1);
    if n < 2 {
        return trapezoid(values, h);
    }
    let even = if n % 2 == 0 { n } else { n - 3 };
    let mut acc = T::default();
    if even > 0 {
        acc = values[0] + values[even];
        for (i, &v) in values.iter().enumerate().take(even).skip(1) {
            acc = acc + v * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc = acc * (h / 3.0);
    }
    if even != n {
        let v = &values[even..];
        let tail = (v[0] + v[1] * 3.0 + v[2] * 3.0 + v[3]) * (3.0 * h / 8.0);
        acc = acc + tail;
    }
    acc
}

/// Simpson rule for a function on `[a, b]` with `intervals` panels
/// (rounded up to an even count).
pub fn simpson_fn<T: Integrand>(f: impl Fn(f64) -> T, a: f64, b: f64, intervals: usize) -> T {
    let n = even_at_least(intervals.max(2));
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc = acc + f(a + i as f64 * h) * w;
    }
    acc * (h / 3.0)
}

/// Smallest even number ≥ n.
pub fn even_at_least(n: usize) -> usize {
    n + n % 2
}

/// Uniform grid of `n + 1` points on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / n as f64;
    (0..=n).map(|i| if i == n { b } else { a + i as f64 * h }).collect()
}
