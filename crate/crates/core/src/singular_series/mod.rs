//! Certified singular series and the subset averages built on them.
//!
//! 𝔖(H) = Π_p (1 − 1/p)^{−K} (1 − ν_p/p). Primes up to the cutoff are
//! multiplied in (log space, compensated); primes above it all have ν_p = K
//! and are enclosed by an explicit bound. For p > span(H) the factor depends
//! on K alone, so the engine keeps one prefix table of those factors per K.

mod average;
mod density;

pub use average::{
    average_b, average_b_with_budget, check_monotone, s_star, AverageRecord, MonotoneReport,
    SUBSET_BUDGET,
};
pub use density::{quasiprime_density, MAX_DENSITY_Z};

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::prime_engine::sieve_range;
use crate::sum::CompensatedSum;
use crate::tuple_core::TupleH;

/// Spans above this are not factored when locating the largest prime of Δ.
const MAX_FACTOR_SPAN: u64 = 1 << 40;

/// A value known to lie in `[mid − rad, mid + rad]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularValue {
    pub mid: f64,
    pub rad: f64,
    /// Largest prime multiplied in exactly.
    pub cutoff: u64,
}

impl SingularValue {
    pub fn zero(cutoff: u64) -> Self {
        SingularValue { mid: 0.0, rad: 0.0, cutoff }
    }

    pub fn lo(&self) -> f64 {
        self.mid - self.rad
    }

    pub fn hi(&self) -> f64 {
        self.mid + self.rad
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo() <= x && x <= self.hi()
    }

    pub fn is_zero(&self) -> bool {
        self.mid == 0.0 && self.rad == 0.0
    }
}

/// max(10^5, 10·K², largest prime factor of Δ).
pub fn default_cutoff(h: &TupleH) -> Result<u64> {
    let k = h.len() as u64;
    Ok(100_000u64.max(10 * k * k).max(largest_discriminant_prime(h)?))
}

/// Largest prime dividing Δ(H), or 1 when |H| < 2.
pub fn largest_discriminant_prime(h: &TupleH) -> Result<u64> {
    if h.span() > MAX_FACTOR_SPAN {
        return Err(Error::capacity(format!(
            "span {} too large to factor the discriminant",
            h.span()
        )));
    }
    let s = h.shifts();
    let mut diffs = BTreeSet::new();
    for j in 1..s.len() {
        for i in 0..j {
            diffs.insert(s[j] - s[i]);
        }
    }
    Ok(diffs
        .into_iter()
        .filter_map(|d| factorize(d).last().map(|&(p, _)| p))
        .max()
        .unwrap_or(1))
}

/// log of (1 − 1/p)^{−k}(1 − ν/p); −∞ when ν = p.
#[inline]
pub(crate) fn log_factor(p: u64, nu: u64, k: usize) -> f64 {
    if nu >= p {
        return f64::NEG_INFINITY;
    }
    let pf = p as f64;
    (-(nu as f64) / pf).ln_1p() - k as f64 * (-1.0 / pf).ln_1p()
}

/// Bound on Σ_{p > c} |log f_K(p)| when every such p has ν_p = K.
///
/// Per prime |log f| ≤ K(K−1)/p² · (1/2 + κ/(1−κ)), κ = K/c, and primes above
/// 3 avoid 0 mod 2 and mod 3, so Σ 1/n² over n > c coprime to 6 is at most
/// 2/c² + 1/(3c).
pub(crate) fn tail_log_bound(k: usize, c: u64) -> f64 {
    let kf = k as f64;
    let cf = c as f64;
    let kappa = kf / cf;
    kf * (kf - 1.0) * (0.5 + kappa / (1.0 - kappa)) * (2.0 / (cf * cf) + 1.0 / (3.0 * cf))
}

/// Relative error allowance for an exponentiated sum of `terms` logs.
pub(crate) fn rounding_rel(terms: usize, log_mag: f64) -> f64 {
    (terms as f64 + 16.0) * f64::EPSILON * 4.0 * (1.0 + log_mag.abs())
}

/// Shared prime list and per-K generic prefix tables for one cutoff.
pub struct SingularEngine {
    cutoff: u64,
    primes: Vec<u64>,
    generic: RwLock<HashMap<usize, Arc<Vec<f64>>>>,
}

impl SingularEngine {
    pub fn new(cutoff: u64) -> Result<Self> {
        if cutoff < 100 {
            return Err(Error::domain("cutoff must be >= 100"));
        }
        let primes = sieve_range(1, cutoff)?.primes().to_vec();
        Ok(SingularEngine { cutoff, primes, generic: RwLock::new(HashMap::new()) })
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub(crate) fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// prefix[i] = Σ_{j < i} log f_K(p_j) with ν = K, skipping p ≤ K (those
    /// primes are always handled exactly by the callers).
    pub(crate) fn generic_prefix(&self, k: usize) -> Arc<Vec<f64>> {
        if let Some(t) = self.generic.read().expect("poisoned").get(&k) {
            return Arc::clone(t);
        }
        let mut acc = CompensatedSum::new();
        let mut prefix = Vec::with_capacity(self.primes.len() + 1);
        prefix.push(0.0);
        for &p in &self.primes {
            if p > k as u64 {
                acc.add(log_factor(p, k as u64, k));
            }
            prefix.push(acc.value());
        }
        let t = Arc::new(prefix);
        self.generic.write().expect("poisoned").insert(k, Arc::clone(&t));
        t
    }

    /// Σ log f_K(p) over primes in (lo, cutoff].
    pub(crate) fn generic_log_above(&self, k: usize, lo: u64) -> f64 {
        let prefix = self.generic_prefix(k);
        let i = self.primes.partition_point(|&p| p <= lo);
        prefix[self.primes.len()] - prefix[i]
    }

    pub(crate) fn check_cutoff(&self, h: &TupleH) -> Result<()> {
        let k = h.len() as u64;
        let lpf = largest_discriminant_prime(h)?;
        if self.cutoff < k.max(lpf) || self.cutoff < 2 * k {
            return Err(Error::domain(format!(
                "cutoff {} below max(|H|, 2|H|, largest prime of the discriminant = {lpf})",
                self.cutoff
            )));
        }
        Ok(())
    }

    /// 𝔖(H) with a certified radius.
    pub fn value(&self, h: &TupleH) -> Result<SingularValue> {
        self.check_cutoff(h)?;
        let k = h.len();
        let split = h.span().max(k as u64).min(self.cutoff);
        let n_exact = self.primes.partition_point(|&p| p <= split);
        let mut acc = CompensatedSum::new();
        for &p in &self.primes[..n_exact] {
            let lf = log_factor(p, h.nu(p), k);
            if lf == f64::NEG_INFINITY {
                return Ok(SingularValue::zero(self.cutoff));
            }
            acc.add(lf);
        }
        acc.add(self.generic_log_above(k, split));
        let l = acc.value();
        let mid = l.exp();
        let tail = tail_log_bound(k, self.cutoff);
        let rad = mid * tail.exp_m1() + mid * rounding_rel(self.primes.len(), l);
        Ok(SingularValue { mid, rad, cutoff: self.cutoff })
    }
}

/// 𝔖(H) at the given cutoff.
pub fn singular_series(h: &TupleH, cutoff: u64) -> Result<SingularValue> {
    SingularEngine::new(cutoff)?.value(h)
}

/// 𝔖(H ∪ {h0}).
pub fn singular_series_extended(h: &TupleH, h0: u64, cutoff: u64) -> Result<SingularValue> {
    singular_series(&h.with_shift(h0), cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::small_primes;
    use crate::tuple_core::is_admissible;
    use proptest::prelude::*;

    fn t(v: &[u64]) -> TupleH {
        TupleH::new(v.iter().copied()).unwrap()
    }

    // Hardy–Littlewood twin prime constant 2·C_2.
    const TWIN: f64 = 1.320_323_631_693_739;

    #[test]
    fn trivial_cases() {
        assert!(singular_series(&t(&[0, 1]), 1000).unwrap().is_zero());
        let s = singular_series(&t(&[17]), 1000).unwrap();
        assert_eq!(s.mid, 1.0);
        assert!(s.rad < 1e-12);
    }

    #[test]
    fn twin_constant() {
        let s = singular_series(&t(&[0, 2]), 1_000_000).unwrap();
        assert!(s.contains(TWIN), "{s:?}");
        assert!(s.rad < 1e-6);
    }

    #[test]
    fn nested_intervals_for_pairs() {
        let coarse = singular_series(&t(&[0, 2]), 1_000_000).unwrap();
        let fine = singular_series(&t(&[0, 2]), 10_000_000).unwrap();
        assert!(coarse.lo() <= fine.lo() && fine.hi() <= coarse.hi());
        assert!(coarse.contains(fine.mid));
    }

    #[test]
    fn nested_intervals_for_larger_tuple() {
        let h = t(&[0, 2, 6, 8, 12]);
        let a = singular_series(&h, 1000).unwrap();
        let b = singular_series(&h, 100_000).unwrap();
        assert!(a.lo() <= b.lo() && b.hi() <= a.hi(), "{a:?} {b:?}");
    }

    /// Independent oracle: plain product over every prime, no span split.
    fn naive(h: &TupleH, cutoff: u64) -> f64 {
        let k = h.len() as i32;
        small_primes(cutoff)
            .into_iter()
            .map(|p| {
                let nu = h.shifts().iter().map(|x| x % p).collect::<BTreeSet<_>>().len() as f64;
                let pf = p as f64;
                (1.0 - nu / pf) / (1.0 - 1.0 / pf).powi(k)
            })
            .product()
    }

    #[test]
    fn matches_naive_product() {
        for v in [&[0u64, 2, 6][..], &[0, 4, 6, 10], &[0, 6], &[0, 2, 8, 12, 14]] {
            let h = t(v);
            let s = singular_series(&h, 20_000).unwrap();
            let n = naive(&h, 20_000);
            assert!((s.mid - n).abs() <= 1e-11 * n, "{v:?}: {} vs {n}", s.mid);
        }
    }

    #[test]
    fn extended() {
        let a = singular_series_extended(&t(&[0, 2]), 2, 1000).unwrap();
        assert_eq!(a, singular_series(&t(&[0, 2]), 1000).unwrap());
        let b = singular_series_extended(&t(&[0]), 2, 1000).unwrap();
        assert_eq!(b, singular_series(&t(&[0, 2]), 1000).unwrap());
        assert!(singular_series_extended(&t(&[0, 2]), 1, 1000).unwrap().is_zero());
    }

    #[test]
    fn cutoff_errors() {
        assert!(matches!(singular_series(&t(&[0, 2]), 50), Err(Error::Domain(_))));
        assert!(matches!(singular_series(&t(&[0, 202]), 100), Err(Error::Domain(_))));
        assert!(singular_series(&t(&[0, 202]), 101).is_ok());
        assert_eq!(default_cutoff(&t(&[0, 2])).unwrap(), 100_000);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn zero_iff_inadmissible(s in proptest::collection::btree_set(0u64..60, 1..=6)) {
            let h = TupleH::new(s).unwrap();
            let v = singular_series(&h, 1000).unwrap();
            prop_assert_eq!(v.is_zero(), !is_admissible(&h));
        }

        #[test]
        fn translation_invariant(
            s in proptest::collection::btree_set(0u64..60, 1..=5),
            shift in 0u64..10_000,
        ) {
            let h = TupleH::new(s).unwrap();
            let a = singular_series(&h, 1000).unwrap();
            let b = singular_series(&h.translate(shift).unwrap(), 1000).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
