//! Series types, z-score normalization, returns and correlation utilities.
//!
//! Normalization uses the sample standard deviation (divisor `n - 1`) everywhere
//! in the crate.

use crate::error::{Error, Result};

/// A labeled sequence of finite reals with at least two observations.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    label: String,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if values.len() < 2 {
            return Err(Error::TooShort { label, len: values.len(), min: 2 });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { label, index });
        }
        Ok(Self { label, values })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same values, new label.
    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn negated(&self) -> Self {
        Self { label: format!("-{}", self.label), values: self.values.iter().map(|v| -v).collect() }
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// First differences `r[j] = x[j + 1] - x[j]` of a [`TimeSeries`].
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnSeries {
    values: Vec<f64>,
}

impl ReturnSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Wraps raw return values directly; used by tests and tools that already hold returns.
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn padded(&self, pad: usize) -> PaddedReturnSeries {
        PaddedReturnSeries::new(self.clone(), pad)
    }
}

/// A return series with `pad` zeros appended at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct PaddedReturnSeries {
    inner: ReturnSeries,
    pad: usize,
    buf: Vec<f64>,
}

impl PaddedReturnSeries {
    pub fn new(inner: ReturnSeries, pad: usize) -> Self {
        let mut buf = vec![0.0; inner.len() + 2 * pad];
        buf[pad..pad + inner.len()].copy_from_slice(inner.values());
        Self { inner, pad, buf }
    }

    pub fn inner(&self) -> &ReturnSeries {
        &self.inner
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    pub fn padded_len(&self) -> usize {
        self.buf.len()
    }

    /// Value at unpadded index `i`; zero anywhere outside the inner range.
    pub fn at(&self, i: isize) -> f64 {
        if i < 0 || i as usize >= self.inner.len() {
            0.0
        } else {
            self.inner.values[i as usize]
        }
    }

    /// The full padded buffer, inner values starting at offset `pad`.
    pub fn as_padded_slice(&self) -> &[f64] {
        &self.buf
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (divisor `n - 1`).
pub fn sample_std(v: &[f64]) -> f64 {
    let m = mean(v);
    let ss: f64 = v.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (v.len() as f64 - 1.0)).sqrt()
}

/// Z-score a series: sample mean 0, sample standard deviation 1.
pub fn normalize(raw: &TimeSeries) -> Result<TimeSeries> {
    let v = raw.values();
    let m = mean(v);
    let sd = sample_std(v);
    if sd == 0.0 || !sd.is_finite() {
        return Err(Error::ZeroVariance(raw.label.clone()));
    }
    Ok(TimeSeries { label: raw.label.clone(), values: v.iter().map(|x| (x - m) / sd).collect() })
}

pub fn returns(x: &TimeSeries) -> Result<ReturnSeries> {
    if x.len() < 2 {
        return Err(Error::TooShort { label: x.label.clone(), len: x.len(), min: 2 });
    }
    Ok(ReturnSeries { values: x.values.windows(2).map(|w| w[1] - w[0]).collect() })
}

/// Centered Pearson correlation.
pub fn pearson(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch { left: u.len(), right: v.len() });
    }
    if u.len() < 2 {
        return Err(Error::TooShort { label: "pearson input".into(), len: u.len(), min: 2 });
    }
    let (mu, mv) = (mean(u), mean(v));
    let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (da, db) = (a - mu, b - mv);
        suv += da * db;
        suu += da * da;
        svv += db * db;
    }
    if suu == 0.0 {
        return Err(Error::ZeroVariance("pearson lhs".into()));
    }
    if svv == 0.0 {
        return Err(Error::ZeroVariance("pearson rhs".into()));
    }
    Ok((suv / (suu.sqrt() * svv.sqrt())).clamp(-1.0, 1.0))
}

/// Cosine similarity: correlation without mean-centering.
pub fn uncentered_corr(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch { left: u.len(), right: v.len() });
    }
    let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        suv += a * b;
        suu += a * a;
        svv += b * b;
    }
    if suu == 0.0 || svv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((suv / (suu.sqrt() * svv.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new("t", v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_short_and_non_finite() {
        assert!(matches!(TimeSeries::new("a", vec![1.0]), Err(Error::TooShort { .. })));
        assert!(matches!(TimeSeries::new("a", vec![1.0, f64::NAN]), Err(Error::NonFinite { index: 1, .. })));
    }

    #[test]
    fn normalize_affine_example() {
        let z = normalize(&ts(&[1.0, 2.0, 3.0])).unwrap();
        for (a, b) in z.values().iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn normalize_constant_is_error() {
        assert!(matches!(normalize(&ts(&[5.0, 5.0, 5.0])), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn returns_examples() {
        assert_eq!(returns(&ts(&[0.0, 1.0, 3.0])).unwrap().values(), &[1.0, 2.0]);
        assert!(returns(&ts(&[4.0; 6])).unwrap().values().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn padding_reads_zero_outside() {
        let p = ReturnSeries::from_values(vec![1.0, 2.0, 3.0]).padded(2);
        assert_eq!(p.padded_len(), 7);
        assert_eq!(p.as_padded_slice(), &[0.0, 0.0, 1.0, 2.0, 3.0, 0.0, 0.0]);
        assert_eq!(p.at(-1), 0.0);
        assert_eq!(p.at(3), 0.0);
        assert_eq!(p.at(1), 2.0);
    }

    #[test]
    fn pearson_examples() {
        let u = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        assert!((pearson(&u, &neg).unwrap() + 1.0).abs() < 1e-15);
        // Hand computation: centered u = (-1.5,-.5,.5,1.5), v = (-1.75,-.75,.25,2.25);
        // Σuv = 6.5, Σu² = 5, Σv² = 8.75  ⇒ 6.5 / √43.75.
        let expected = 6.5 / 43.75f64.sqrt();
        assert!((pearson(&u, &[1.0, 2.0, 3.0, 5.0]).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.982_707_629_823_990_8).abs() < 1e-15);
        assert!(matches!(pearson(&u, &[2.0; 4]), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn uncentered_examples() {
        assert_eq!(uncentered_corr(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(uncentered_corr(&[1.0, 1.0], &[1.0, -1.0]).unwrap(), 0.0);
        assert!((uncentered_corr(&[3.0, -1.0], &[3.0, -1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(uncentered_corr(&[0.0, 0.0], &[1.0, 2.0]), Err(Error::ZeroNorm)));
    }

    fn finite_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-100.0f64..100.0, len)
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(v in finite_vec(12)) {
            let s = ts(&v);
            if let Ok(z) = normalize(&s) {
                let zz = normalize(&z).unwrap();
                for (a, b) in z.values().iter().zip(zz.values()) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn returns_shift_invariant_and_telescoping(v in finite_vec(10), c in -50.0f64..50.0) {
            let r = returns(&ts(&v)).unwrap();
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let rs = returns(&ts(&shifted)).unwrap();
            for (a, b) in r.values().iter().zip(rs.values()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            let total: f64 = r.values().iter().sum();
            prop_assert!((total - (v[9] - v[0])).abs() < 1e-9);
        }

        #[test]
        fn uncentered_is_symmetric_and_bounded(u in finite_vec(8), v in finite_vec(8)) {
            if let (Ok(a), Ok(b)) = (uncentered_corr(&u, &v), uncentered_corr(&v, &u)) {
                prop_assert_eq!(a, b);
                prop_assert!(a.abs() <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn pearson_equals_uncentered_for_zero_mean(u in finite_vec(9), v in finite_vec(9)) {
            let center = |w: &[f64]| { let m = mean(w); w.iter().map(|x| x - m).collect::<Vec<_>>() };
            let (cu, cv) = (center(&u), center(&v));
            if let (Ok(p), Ok(c)) = (pearson(&cu, &cv), uncentered_corr(&cu, &cv)) {
                prop_assert!((p - c).abs() < 1e-12);
            }
        }
    }
}
