use crate::arith::small_primes;
use crate::error::{Error, Result};
use crate::par;

/// Odd entries per sieve segment; each segment spans twice as many integers.
pub const SEGMENT_ENTRIES: u64 = 1 << 18;
/// Integers covered by one segment.
pub const SEGMENT_SPAN: u64 = 2 * SEGMENT_ENTRIES;
/// Largest supported upper bound. Base primes up to its square root are
/// sieved in memory.
pub const MAX_SIEVE_HI: u64 = 1 << 50;

/// The primes of an inclusive range `[lo, hi]`, in increasing order.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    lo: u64,
    hi: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub(crate) fn from_parts(lo: u64, hi: u64, primes: Vec<u64>) -> Self {
        debug_assert!(primes.windows(2).all(|w| w[0] < w[1]));
        PrimeTable { lo, hi, primes }
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Membership for `n` inside `[lo, hi]`; `None` outside the table range.
    pub fn contains(&self, n: u64) -> Option<bool> {
        if n < self.lo || n > self.hi {
            return None;
        }
        Some(self.primes.binary_search(&n).is_ok())
    }

    /// Primes `<= x` in the table.
    pub fn up_to(&self, x: u64) -> &[u64] {
        let end = self.primes.partition_point(|&p| p <= x);
        &self.primes[..end]
    }
}

pub(crate) fn check_range(lo: u64, hi: u64) -> Result<()> {
    if hi < lo {
        return Err(Error::domain(format!("empty range: hi={hi} < lo={lo}")));
    }
    if hi > MAX_SIEVE_HI {
        return Err(Error::capacity(format!(
            "hi={hi} exceeds supported sieve bound {MAX_SIEVE_HI}"
        )));
    }
    Ok(())
}

/// Odd base primes up to `sqrt(hi)`.
pub(crate) fn base_primes(hi: u64) -> Vec<u64> {
    let r = hi.isqrt();
    small_primes(r).into_iter().filter(|&p| p > 2).collect()
}

/// Sieve one segment `[a, b]` with the given odd base primes (which must
/// cover `sqrt(b)`).
pub(crate) fn sieve_segment(a: u64, b: u64, base: &[u64]) -> Vec<u64> {
    let mut out = Vec::new();
    if a <= 2 && 2 <= b {
        out.push(2);
    }
    let first_odd = if a.is_multiple_of(2) { a + 1 } else { a };
    if first_odd > b {
        return out;
    }
    let count = ((b - first_odd) / 2 + 1) as usize;
    let mut is_candidate = vec![true; count];
    for &p in base {
        let pp = p * p;
        if pp > b {
            break;
        }
        let mut start = if pp >= first_odd {
            pp
        } else {
            let m = first_odd.div_ceil(p) * p;
            if m % 2 == 0 {
                m + p
            } else {
                m
            }
        };
        if start < pp {
            start = pp;
        }
        if start > b {
            continue;
        }
        let mut i = ((start - first_odd) / 2) as usize;
        let step = p as usize;
        while i < count {
            is_candidate[i] = false;
            i += step;
        }
    }
    out.extend(
        is_candidate
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c)
            .map(|(i, _)| first_odd + 2 * i as u64)
            .filter(|&n| n > 1),
    );
    out
}

/// Apply `f` to every sieve segment of `[lo, hi]` and return the results in
/// segment order. Segments are processed in parallel when enabled; the
/// segmentation itself only depends on `lo` and `hi`.
pub fn map_segments<R, F>(lo: u64, hi: u64, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(u64, u64, &[u64]) -> R + Sync + Send,
{
    check_range(lo, hi)?;
    let base = base_primes(hi);
    let segs = par::chunks(lo, hi, SEGMENT_SPAN);
    Ok(par::map_ordered(&segs, |&(a, b)| {
        let ps = sieve_segment(a, b, &base);
        f(a, b, &ps)
    }))
}

/// All primes in `[lo, hi]`.
pub fn sieve_range(lo: u64, hi: u64) -> Result<PrimeTable> {
    let parts = map_segments(lo, hi, |_, _, ps| ps.to_vec())?;
    let mut primes = Vec::with_capacity(parts.iter().map(Vec::len).sum());
    for p in parts {
        primes.extend(p);
    }
    Ok(PrimeTable::from_parts(lo, hi, primes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;
    use proptest::prelude::*;

    #[test]
    fn first_primes() {
        assert_eq!(sieve_range(1, 10).unwrap().primes(), &[2, 3, 5, 7]);
        assert!(sieve_range(1, 1).unwrap().is_empty());
        assert!(sieve_range(0, 0).unwrap().is_empty());
        assert_eq!(sieve_range(2, 2).unwrap().primes(), &[2]);
    }

    #[test]
    fn window_above_a_million_matches_trial_division() {
        let lo = 1_000_000;
        let t = sieve_range(lo, lo + 100).unwrap();
        let oracle: Vec<u64> = (lo..=lo + 100).filter(|&n| is_prime(n)).collect();
        assert_eq!(t.primes(), oracle.as_slice());
        assert_eq!(t.primes(), &[1_000_003, 1_000_033, 1_000_037, 1_000_039, 1_000_081, 1_000_099]);
    }

    #[test]
    fn errors() {
        assert!(matches!(sieve_range(10, 9), Err(Error::Domain(_))));
        assert!(matches!(
            sieve_range(0, MAX_SIEVE_HI + 1),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn multi_segment_count() {
        // pi(2*10^6) = 148933
        let t = sieve_range(0, 2_000_000).unwrap();
        assert_eq!(t.len(), 148_933);
        assert_eq!(t.contains(1_999_993), Some(true));
        assert_eq!(t.contains(1_999_995), Some(false));
        assert_eq!(t.contains(2_000_001), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn segmented_equals_trial_division(lo in 0u64..1_000_000, len in 0u64..3000) {
            let hi = (lo + len).min(1_000_000);
            let t = sieve_range(lo, hi).unwrap();
            let oracle: Vec<u64> = (lo..=hi).filter(|&n| is_prime(n)).collect();
            prop_assert_eq!(t.primes(), oracle.as_slice());
        }
    }
}
