//! Bombieri–Vinogradov-type statistics at desk scale.
//!
//! All three sums go through one sweep: primes are sieved in batches, and
//! every modulus keeps its own dense table of per-class accumulators, fed in
//! increasing prime order. Moduli are updated in parallel, but no
//! accumulator is ever shared, so the result does not depend on scheduling.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, factorize, gcd, is_squarefree, primorial};
use crate::error::{Error, Result};
use crate::par;
use crate::prime_engine::sieve_range;
use crate::sum::CompensatedSum;

pub const MAX_BV_N: u64 = 1_000_000_000;
/// Ceiling on Σ modulus over all moduli of one run (dense class tables).
pub const MAX_CLASS_ENTRIES: u64 = 20_000_000;
/// Ceiling on the estimated prime × modulus update count.
pub const MAX_UPDATES: f64 = 2e11;
const BATCH: u64 = 1 << 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BvConfig {
    pub n: u64,
    /// Ceiling for the varying modulus factor q.
    pub q: u64,
    /// Fixed base modulus; 1 for the classical sum.
    pub m: u64,
    /// Max over x ≤ X (true) or the endpoint only (false).
    pub use_estar: bool,
    /// Restrict q to squarefree values.
    pub squarefree_only: bool,
}

impl BvConfig {
    pub fn new(n: u64, q: u64, m: u64) -> Result<Self> {
        let cfg = BvConfig { n, q, m, use_estar: false, squarefree_only: false };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 1 || self.m < 1 {
            return Err(Error::domain("Q and M must be >= 1"));
        }
        if self.n < 100 {
            return Err(Error::domain("N must be >= 100"));
        }
        if self.m.checked_mul(self.q).is_none_or(|mq| mq > self.n) {
            return Err(Error::domain(format!("M·Q = {}·{} exceeds N = {}", self.m, self.q, self.n)));
        }
        if self.n > MAX_BV_N {
            return Err(Error::capacity(format!("N must be <= {MAX_BV_N}")));
        }
        Ok(())
    }
}

/// ⌊√N / (log N)^5⌋, clamped to at least 1.
pub fn default_q(n: u64) -> u64 {
    let nf = n as f64;
    ((nf.sqrt() / nf.ln().powi(5)).floor() as u64).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvRow {
    pub q: u64,
    /// φ of the modulus actually used (M·q).
    pub phi_q: u64,
    pub max_a_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvReport {
    pub config: BvConfig,
    pub rows: Vec<BvRow>,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvSummary {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "Q")]
    pub q: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub sum: f64,
    pub normalized: f64,
}

impl BvReport {
    pub fn normalized(&self) -> f64 {
        self.sum / self.config.n as f64
    }

    pub fn summary(&self) -> BvSummary {
        BvSummary {
            n: self.config.n,
            q: self.config.q,
            m: self.config.m,
            sum: self.sum,
            normalized: self.normalized(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "q,phi_q,max_a_deviation")?;
        for r in &self.rows {
            writeln!(w, "{},{},{:e}", r.q, r.phi_q, r.max_a_deviation)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Default)]
struct ClassScan {
    theta: CompensatedSum,
    max_abs: f64,
}

struct ModState {
    modulus: u64,
    phi: f64,
    classes: Vec<ClassScan>,
}

/// Per-modulus max over coprime classes of |θ(x; m, a) − (x − base)/φ(m)|,
/// θ summing primes in (base, hi]. With `track_max` the max also runs over
/// every integer x in [base, hi]; otherwise x = hi only.
fn sweep(base: u64, hi: u64, moduli: &[u64], track_max: bool) -> Result<Vec<f64>> {
    let entries: u64 = moduli.iter().sum();
    if entries > MAX_CLASS_ENTRIES {
        return Err(Error::capacity(format!(
            "{entries} class accumulators exceed the ceiling {MAX_CLASS_ENTRIES}"
        )));
    }
    let span = (hi - base) as f64;
    let est = span / (base.max(3) as f64).ln() * 1.3 * moduli.len() as f64;
    if est > MAX_UPDATES {
        return Err(Error::capacity(format!("about {est:.2e} class updates exceed {MAX_UPDATES:.0e}")));
    }
    let mut states: Vec<ModState> = moduli
        .iter()
        .map(|&m| ModState {
            modulus: m,
            phi: euler_phi(m) as f64,
            classes: vec![ClassScan::default(); m as usize],
        })
        .collect();
    for (a, b) in par::chunks(base + 1, hi, BATCH) {
        let table = sieve_range(a, b)?;
        let primes = table.primes();
        par::for_each_mut(&mut states, |st| {
            let m = st.modulus;
            let lin = |x: u64| (x - base) as f64 / st.phi;
            for &p in primes {
                if m % p == 0 {
                    continue;
                }
                let c = &mut st.classes[(p % m) as usize];
                if track_max {
                    let before = c.theta.value() - lin(p - 1);
                    c.theta.add((p as f64).ln());
                    let after = c.theta.value() - lin(p);
                    c.max_abs = c.max_abs.max(before.abs()).max(after.abs());
                } else {
                    c.theta.add((p as f64).ln());
                }
            }
        });
    }
    Ok(states
        .iter()
        .map(|st| {
            let end = (hi - base) as f64 / st.phi;
            (0..st.modulus)
                .filter(|&a| gcd(a, st.modulus) == 1)
                .map(|a| {
                    let c = &st.classes[a as usize];
                    (c.theta.value() - end).abs().max(c.max_abs)
                })
                .fold(0.0, f64::max)
        })
        .collect())
}

fn report(cfg: BvConfig, qs: Vec<u64>, devs: Vec<f64>) -> BvReport {
    let rows: Vec<BvRow> = qs
        .iter()
        .zip(&devs)
        .map(|(&q, &d)| BvRow { q, phi_q: euler_phi(cfg.m * q), max_a_deviation: d })
        .collect();
    let sum = rows.iter().map(|r| r.max_a_deviation).collect::<CompensatedSum>().value();
    BvReport { config: cfg, rows, sum }
}

/// Σ_{q ≤ Q} max_{(a,q)=1} |θ(N; q, a) − N/φ(q)|.
pub fn bv_sum(cfg: &BvConfig) -> Result<BvReport> {
    cfg.validate()?;
    if cfg.m != 1 {
        return Err(Error::domain("the classical sum needs M = 1"));
    }
    let qs: Vec<u64> = (1..=cfg.q).collect();
    let devs = sweep(0, cfg.n, &qs, false)?;
    Ok(report(*cfg, qs, devs))
}

/// Σ_{q ≤ Q, (q,P)=1} max_{(a,Pq)=1} |Σ_{N<p≤2N, p≡a (Pq)} log p − N/φ(Pq)|,
/// with M = P the product of all primes up to some V.
pub fn bv_sum_restricted(cfg: &BvConfig) -> Result<BvReport> {
    cfg.validate()?;
    let top = factorize(cfg.m).last().map_or(1, |&(p, _)| p);
    if cfg.m < 2 || primorial(top) != Some(cfg.m) {
        return Err(Error::domain(format!("M = {} is not a primorial Π_{{p ≤ V}} p", cfg.m)));
    }
    let qs: Vec<u64> = (1..=cfg.q).filter(|&q| gcd(q, cfg.m) == 1).collect();
    let moduli: Vec<u64> = qs.iter().map(|&q| cfg.m * q).collect();
    let devs = sweep(cfg.n, 2 * cfg.n, &moduli, false)?;
    Ok(report(*cfg, qs, devs))
}

/// Σ_{q ≤ Q, (q,M)=1} E*(X, Mq) with X = N, where
/// E*(X, k) = max_{x ≤ X} max_{(a,k)=1} |θ(x; k, a) − x/φ(k)|.
/// With `use_estar = false` the max over x is replaced by x = X.
pub fn estar_aggregate(cfg: &BvConfig) -> Result<BvReport> {
    cfg.validate()?;
    let qs: Vec<u64> = (1..=cfg.q)
        .filter(|&q| gcd(q, cfg.m) == 1 && (!cfg.squarefree_only || is_squarefree(q)))
        .collect();
    let moduli: Vec<u64> = qs.iter().map(|&q| cfg.m * q).collect();
    let devs = sweep(0, cfg.n, &moduli, cfg.use_estar)?;
    Ok(report(*cfg, qs, devs))
}

/// sum / (X/M · (log X)^15 · exp(−c·log X / log Y)).
pub fn theorem6_ratio(sum: f64, x: u64, m: u64, c: f64, y: f64) -> f64 {
    let lx = (x as f64).ln();
    sum / (x as f64 / m as f64 * lx.powi(15) * (-c * lx / y.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;
    use crate::prime_engine::{ap_error_star, theta_sum};
    use proptest::prelude::*;

    fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
        (lo..=hi).filter(|&n| is_prime(n)).collect()
    }

    /// Per-modulus recomputation, classes visited in reverse.
    fn naive(base: u64, hi: u64, m: u64, star: bool, ps: &[u64]) -> f64 {
        let phi = euler_phi(m) as f64;
        let mut best = 0.0f64;
        for a in (0..m).rev().filter(|&a| gcd(a, m) == 1) {
            let mut th = 0.0;
            let mut dev = |x: u64, th: f64| best = best.max((th - (x - base) as f64 / phi).abs());
            if star {
                for x in base..=hi {
                    if x > base && ps.binary_search(&x).is_ok() && x % m == a {
                        th += (x as f64).ln();
                    }
                    dev(x, th);
                }
            } else {
                th = ps.iter().filter(|&&p| p > base && p % m == a).map(|&p| (p as f64).ln()).sum();
                dev(hi, th);
            }
        }
        best
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn config_validation() {
        assert!(BvConfig::new(99, 1, 1).is_err());
        assert!(BvConfig::new(1000, 0, 1).is_err());
        assert!(BvConfig::new(1000, 500, 3).is_err());
        assert!(matches!(BvConfig::new(MAX_BV_N + 1, 1, 1), Err(Error::Capacity(_))));
        assert!(BvConfig::new(1000, 10, 6).is_ok());
    }

    #[test]
    fn q_one_is_theta_deviation() {
        let cfg = BvConfig::new(100_000, 1, 1).unwrap();
        let r = bv_sum(&cfg).unwrap();
        let th = theta_sum(100_000).unwrap();
        assert!(close(r.sum, (th - 100_000.0).abs()));
    }

    #[test]
    fn classical_matches_per_q_oracle() {
        let n = 100_000;
        let ps = primes_in(2, n);
        let r = bv_sum(&BvConfig::new(n, 30, 1).unwrap()).unwrap();
        assert_eq!(r.rows.len(), 30);
        for row in &r.rows {
            assert!(close(row.max_a_deviation, naive(0, n, row.q, false, &ps)), "q={}", row.q);
            assert_eq!(row.phi_q, euler_phi(row.q));
        }
    }

    #[test]
    fn restricted_matches_naive() {
        let n = 1_000_000;
        let ps = primes_in(n + 1, 2 * n);
        let r = bv_sum_restricted(&BvConfig::new(n, 50, 6).unwrap()).unwrap();
        assert!(r.rows.iter().all(|row| gcd(row.q, 6) == 1));
        assert_eq!(r.rows.len(), 17);
        for row in &r.rows {
            assert!(close(row.max_a_deviation, naive(n, 2 * n, 6 * row.q, false, &ps)), "q={}", row.q);
        }
        assert!(bv_sum_restricted(&BvConfig::new(n, 5, 4).unwrap()).is_err());
    }

    #[test]
    fn restricted_v2_single_modulus() {
        let n = 10_000;
        let r = bv_sum_restricted(&BvConfig::new(n, 1, 2).unwrap()).unwrap();
        let odd: f64 = primes_in(n + 1, 2 * n).iter().map(|&p| (p as f64).ln()).sum();
        assert!(close(r.sum, (odd - n as f64).abs()));
    }

    #[test]
    fn larger_v_admits_fewer_q() {
        let mut last = usize::MAX;
        for m in [2, 6, 30, 210] {
            let r = bv_sum_restricted(&BvConfig::new(100_000, 100, m).unwrap()).unwrap();
            assert!(r.rows.len() <= last);
            last = r.rows.len();
        }
    }

    #[test]
    fn estar_matches_direct() {
        let x = 100_000;
        let mut cfg = BvConfig::new(x, 20, 6).unwrap();
        cfg.use_estar = true;
        let r = estar_aggregate(&cfg).unwrap();
        for row in &r.rows {
            let direct = ap_error_star(x, 6 * row.q).unwrap();
            assert!(close(row.max_a_deviation, direct), "q={}", row.q);
        }
        let ps = primes_in(2, 3000);
        let mut small = BvConfig::new(3000, 5, 1).unwrap();
        small.use_estar = true;
        let r = estar_aggregate(&small).unwrap();
        for row in &r.rows {
            assert!(close(row.max_a_deviation, naive(0, 3000, row.q, true, &ps)));
        }
    }

    #[test]
    fn estar_q1_m1() {
        let mut cfg = BvConfig::new(10_000, 1, 1).unwrap();
        cfg.use_estar = true;
        let r = estar_aggregate(&cfg).unwrap();
        let ps = primes_in(2, 10_000);
        assert!(close(r.sum, naive(0, 10_000, 1, true, &ps)));
    }

    #[test]
    fn endpoint_mode_and_squarefree_flag() {
        let mut cfg = BvConfig::new(50_000, 40, 1).unwrap();
        let endpoint = estar_aggregate(&cfg).unwrap();
        assert_eq!(endpoint.sum, bv_sum(&cfg).unwrap().sum);
        cfg.use_estar = true;
        let star = estar_aggregate(&cfg).unwrap();
        for (s, e) in star.rows.iter().zip(&endpoint.rows) {
            assert!(s.max_a_deviation >= e.max_a_deviation);
        }
        cfg.squarefree_only = true;
        let sf = estar_aggregate(&cfg).unwrap();
        assert!(sf.rows.iter().all(|r| is_squarefree(r.q)));
        assert!(sf.rows.len() < star.rows.len());
    }

    #[test]
    fn sequential_equals_parallel() {
        let cfg = BvConfig::new(200_000, 25, 1).unwrap();
        let a = bv_sum(&cfg).unwrap();
        par::force_sequential(true);
        let b = bv_sum(&cfg).unwrap();
        par::force_sequential(false);
        assert_eq!(a, b);
    }

    #[test]
    fn csv_and_summary() {
        let r = bv_sum(&BvConfig::new(1000, 3, 1).unwrap()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("q,phi_q,max_a_deviation\n1,1,"));
        assert_eq!(r.summary().normalized, r.sum / 1000.0);
        assert_eq!(default_q(100_000), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn monotone_in_q(n in 1_000u64..20_000, q in 1u64..20) {
            let a = bv_sum(&BvConfig::new(n, q, 1).unwrap()).unwrap().sum;
            let b = bv_sum(&BvConfig::new(n, q + 1, 1).unwrap()).unwrap().sum;
            prop_assert!(b >= a);
        }
    }
}
