use std::collections::HashMap;

use super::sieve::{map_segments, PrimeTable};
use crate::arith::{euler_phi, gcd};
use crate::error::{Error, Result};
use crate::par;
use crate::sum::CompensatedSum;

/// Chebyshev's θ(x) = Σ_{p ≤ x} log p.
///
/// Each sieve segment is summed with compensation and the segment partials
/// are merged left to right, so the result does not depend on scheduling.
pub fn theta_sum(x: u64) -> Result<f64> {
    if x < 2 {
        return Ok(0.0);
    }
    let parts = map_segments(0, x, |_, _, ps| {
        ps.iter().map(|&p| (p as f64).ln()).collect::<CompensatedSum>()
    })?;
    let mut total = CompensatedSum::new();
    for s in &parts {
        total.merge(s);
    }
    Ok(total.value())
}

fn check_progression(q: u64, a: u64) -> Result<()> {
    if q == 0 {
        return Err(Error::domain("modulus q must be >= 1"));
    }
    if a >= q {
        return Err(Error::domain(format!("residue a={a} not in [0, {q})")));
    }
    Ok(())
}

/// θ(x; q, a) = Σ_{p ≤ x, p ≡ a (mod q)} log p.
pub fn theta_progression(x: u64, q: u64, a: u64) -> Result<f64> {
    check_progression(q, a)?;
    if x < 2 {
        return Ok(0.0);
    }
    let parts = map_segments(0, x, |_, _, ps| {
        ps.iter()
            .filter(|&&p| p % q == a)
            .map(|&p| (p as f64).ln())
            .collect::<CompensatedSum>()
    })?;
    let mut total = CompensatedSum::new();
    for s in &parts {
        total.merge(s);
    }
    Ok(total.value())
}

/// θ(x; q, a) for every residue `a` in `0..q` from one sieve pass.
pub fn theta_all_classes(x: u64, q: u64) -> Result<Vec<f64>> {
    check_progression(q, 0)?;
    let q_len = usize::try_from(q).map_err(|_| Error::capacity("modulus too large"))?;
    if q_len > 1 << 26 {
        return Err(Error::capacity(format!("q={q} too large for dense class table")));
    }
    if x < 2 {
        return Ok(vec![0.0; q_len]);
    }
    let parts = map_segments(0, x, |_, _, ps| {
        let mut acc = vec![CompensatedSum::new(); q_len];
        for &p in ps {
            acc[(p % q) as usize].add((p as f64).ln());
        }
        acc
    })?;
    let mut total = vec![CompensatedSum::new(); q_len];
    for part in &parts {
        for (t, s) in total.iter_mut().zip(part) {
            t.merge(s);
        }
    }
    Ok(total.iter().map(CompensatedSum::value).collect())
}

/// E(x; q, a) = θ(x; q, a) − [gcd(a, q) = 1]·x/φ(q).
pub fn ap_error(x: u64, q: u64, a: u64) -> Result<f64> {
    let theta = theta_progression(x, q, a)?;
    Ok(theta - expected_share(x, q, a))
}

fn expected_share(x: u64, q: u64, a: u64) -> f64 {
    if gcd(a, q) == 1 {
        x as f64 / euler_phi(q) as f64
    } else {
        0.0
    }
}

#[derive(Clone, Copy)]
struct ClassScan {
    theta: CompensatedSum,
    max_abs: f64,
}

/// E*(X, q) = max_{1 ≤ x ≤ X} max_{gcd(a,q)=1} |E(x; q, a)| over integer x,
/// scanned over an existing prime table covering `[0, X]` (or more).
///
/// For a fixed class, E(x) decreases between consecutive primes of the
/// class, so the maximum of |E| over integers is attained at x = p − 1,
/// x = p, or x = X. A class containing no prime ≤ X contributes X/φ(q).
pub fn ap_error_star_with(table: &PrimeTable, big_x: u64, q: u64) -> Result<f64> {
    if q == 0 {
        return Err(Error::domain("modulus q must be >= 1"));
    }
    if big_x < 2 {
        return Err(Error::domain("X must be >= 2"));
    }
    if table.lo() > 2 || table.hi() < big_x {
        return Err(Error::domain("prime table does not cover [2, X]"));
    }
    let phi = euler_phi(q) as f64;
    let lin = |x: u64| x as f64 / phi;
    let mut classes: HashMap<u64, ClassScan> = HashMap::new();
    for &p in table.up_to(big_x) {
        if gcd(p, q) != 1 {
            continue;
        }
        let st = classes.entry(p % q).or_insert(ClassScan {
            theta: CompensatedSum::new(),
            max_abs: 0.0,
        });
        let before = st.theta.value() - lin(p - 1);
        st.theta.add((p as f64).ln());
        let after = st.theta.value() - lin(p);
        st.max_abs = st.max_abs.max(before.abs()).max(after.abs());
    }
    let mut best = 0.0f64;
    for st in classes.values() {
        let end = st.theta.value() - lin(big_x);
        best = best.max(st.max_abs).max(end.abs());
    }
    if (classes.len() as u64) < euler_phi(q) {
        best = best.max(lin(big_x));
    }
    Ok(best)
}

/// E*(X, q); sieves `[0, X]` first.
pub fn ap_error_star(big_x: u64, q: u64) -> Result<f64> {
    if big_x < 2 {
        return Err(Error::domain("X must be >= 2"));
    }
    let table = super::sieve_range(0, big_x)?;
    ap_error_star_with(&table, big_x, q)
}

/// E*(X, q) for many moduli from one prime table; moduli are processed in
/// parallel.
pub fn ap_error_star_many(table: &PrimeTable, big_x: u64, moduli: &[u64]) -> Result<Vec<f64>> {
    let res = par::map_ordered(moduli, |&q| ap_error_star_with(table, big_x, q));
    res.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;
    use crate::prime_engine::sieve_range;
    use proptest::prelude::*;

    fn ln(x: u64) -> f64 {
        (x as f64).ln()
    }

    #[test]
    fn theta_small_values() {
        assert_eq!(theta_sum(1).unwrap(), 0.0);
        let t10 = ln(2) + ln(3) + ln(5) + ln(7);
        assert!((theta_sum(10).unwrap() - t10).abs() < 1e-14);
    }

    #[test]
    fn progression_examples() {
        let v = theta_progression(10, 2, 1).unwrap();
        assert!((v - (ln(3) + ln(5) + ln(7))).abs() < 1e-14);
        assert_eq!(theta_progression(10, 4, 0).unwrap(), 0.0);
        assert_eq!(
            theta_progression(12345, 1, 0).unwrap(),
            theta_sum(12345).unwrap()
        );
        assert!(matches!(theta_progression(10, 0, 0), Err(Error::Domain(_))));
        assert!(matches!(theta_progression(10, 3, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn ap_error_bracket_convention() {
        // gcd(2, 4) = 2: bracket vanishes, E = θ exactly.
        assert_eq!(ap_error(1000, 4, 2).unwrap(), theta_progression(1000, 4, 2).unwrap());
        let e = ap_error(5000, 1, 0).unwrap();
        assert!((e - (theta_sum(5000).unwrap() - 5000.0)).abs() < 1e-9);
    }

    #[test]
    fn ap_error_mod3_matches_direct_recomputation() {
        let x = 1_000_000u64;
        let direct: f64 = crate::arith::small_primes(x)
            .into_iter()
            .filter(|p| p % 3 == 1)
            .map(ln)
            .sum::<f64>()
            - x as f64 / 2.0;
        let e = ap_error(x, 3, 1).unwrap();
        assert!((e - direct).abs() < 1e-6, "{e} vs {direct}");
    }

    fn estar_brute(big_x: u64, q: u64) -> f64 {
        let phi = euler_phi(q) as f64;
        let mut best = 0.0f64;
        for a in (0..q).filter(|&a| gcd(a, q) == 1) {
            let mut th = 0.0;
            for x in 1..=big_x {
                if is_prime(x) && x % q == a {
                    th += ln(x);
                }
                best = best.max((th - x as f64 / phi).abs());
            }
        }
        best
    }

    #[test]
    fn estar_matches_brute_force_small() {
        let e = ap_error_star(100, 4).unwrap();
        assert!((e - estar_brute(100, 4)).abs() < 1e-10);
        // q > X: classes without primes contribute X/φ(q).
        let e = ap_error_star(10, 50).unwrap();
        assert!((e - estar_brute(10, 50)).abs() < 1e-12);
    }

    #[test]
    fn estar_single_class() {
        let t = sieve_range(0, 2000).unwrap();
        let e = ap_error_star_with(&t, 2000, 1).unwrap();
        assert!((e - estar_brute(2000, 1)).abs() < 1e-9);
    }

    #[test]
    fn estar_grid_q_up_to_20() {
        let big_x = 10_000;
        let t = sieve_range(0, big_x).unwrap();
        for q in 1..=20 {
            let e = ap_error_star_with(&t, big_x, q).unwrap();
            let b = estar_brute(big_x, q);
            assert!((e - b).abs() < 1e-8 * b.max(1.0), "q={q}: {e} vs {b}");
            let phi = euler_phi(q) as f64;
            for a in (0..q).filter(|&a| gcd(a, q) == 1) {
                let end = theta_progression(big_x, q, a).unwrap() - big_x as f64 / phi;
                assert!(e >= end.abs() - 1e-9);
            }
        }
    }

    #[test]
    fn all_classes_partition() {
        for q in [1, 2, 7, 30, 49, 50] {
            let classes = theta_all_classes(100_000, q).unwrap();
            let total: f64 = classes.iter().sum();
            let th = theta_sum(100_000).unwrap();
            assert!((total - th).abs() <= 1e-9 * th, "q={q}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn partition_identity(x in 0u64..100_000, q in 1u64..=50) {
            let th = theta_sum(x).unwrap();
            let mut s = CompensatedSum::new();
            for a in 0..q {
                s.add(theta_progression(x, q, a).unwrap());
            }
            prop_assert!((s.value() - th).abs() <= 1e-9 * th.max(1.0));
        }

        #[test]
        fn theta_monotone(x1 in 0u64..200_000, dx in 0u64..5_000) {
            prop_assert!(theta_sum(x1).unwrap() <= theta_sum(x1 + dx).unwrap());
        }
    }
}
