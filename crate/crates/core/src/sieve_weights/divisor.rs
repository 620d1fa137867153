//! Divisor-pair expansion of the pair sum.
//!
//! Σ_n Λ1Λ2 = Σ_{d,e} μ(d)μ(e) w1(d) w2(e) · #{n : n regular, d | P_H1(n),
//! e | P_H2(n)}. Regular n make every prime ≤ V coprime to P_H(n), so d and e
//! run over squarefree numbers ≤ R built from primes above V. Each count is
//! exact: the admissible classes mod P·[d, e] are listed by CRT and counted
//! in (N, 2N].

use crate::arith::{crt_pair, gcd};
use crate::error::{Error, Result};
use crate::par;
use crate::sum::CompensatedSum;
use crate::tuple_core::{regular_classes, TupleH};

use super::{pair_job, Weight, WeightParams};

/// Ceiling on ⌊R⌋², the number of (d, e) pairs considered.
pub const MAX_DIVISOR_PAIRS: u64 = 100_000_000;

struct Divisor {
    d: u64,
    mu: f64,
    primes: Vec<u64>,
}

fn squarefree_above(v: u64, limit: u64) -> Vec<Divisor> {
    let mut spf = vec![0u64; limit as usize + 1];
    for i in 2..=limit {
        if spf[i as usize] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j as usize] == 0 {
                    spf[j as usize] = i;
                }
                j += i;
            }
        }
    }
    let mut out = vec![Divisor { d: 1, mu: 1.0, primes: Vec::new() }];
    'outer: for d in 2..=limit {
        let mut m = d;
        let mut primes = Vec::new();
        while m > 1 {
            let p = spf[m as usize];
            m /= p;
            if m % p == 0 || p <= v {
                continue 'outer;
            }
            primes.push(p);
        }
        let mu = if primes.len() % 2 == 0 { 1.0 } else { -1.0 };
        out.push(Divisor { d, mu, primes });
    }
    out
}

fn roots(h: &TupleH, p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = h.shifts().iter().map(|&s| (p - s % p) % p).collect();
    r.sort_unstable();
    r.dedup();
    r
}

struct Counter<'a> {
    h1: &'a TupleH,
    h2: &'a TupleH,
    base: Vec<u64>,
    modulus: u64,
    n: u64,
}

impl Counter<'_> {
    fn count(&self, d: &Divisor, e: &Divisor, cur: &mut Vec<u64>, next: &mut Vec<u64>) -> u64 {
        cur.clear();
        cur.extend_from_slice(&self.base);
        let mut m = self.modulus;
        let g = gcd(d.d, e.d);
        let lcm_primes = d.primes.iter().chain(e.primes.iter().filter(|&&p| !g.is_multiple_of(p)));
        for &p in lcm_primes {
            let in_d = d.d.is_multiple_of(p);
            let in_e = e.d.is_multiple_of(p);
            let allowed: Vec<u64> = match (in_d, in_e) {
                (true, true) => {
                    let r2 = roots(self.h2, p);
                    roots(self.h1, p).into_iter().filter(|r| r2.contains(r)).collect()
                }
                (true, false) => roots(self.h1, p),
                _ => roots(self.h2, p),
            };
            if allowed.is_empty() {
                return 0;
            }
            next.clear();
            for &x in cur.iter() {
                for &r in &allowed {
                    next.push(crt_pair(x, m, r, p));
                }
            }
            std::mem::swap(cur, next);
            m *= p;
        }
        let (lo, hi) = (self.n as i128, 2 * self.n as i128);
        let mm = m as i128;
        cur.iter()
            .map(|&s| {
                let s = s as i128;
                ((hi - s).div_euclid(mm) - (lo - s).div_euclid(mm)) as u64
            })
            .sum()
    }
}

/// The pair sum of [`super::pair_sum_direct`] evaluated through the
/// divisor-pair expansion with exact class counts.
pub fn pair_sum_divisor(
    h1: &TupleH,
    h2: &TupleH,
    ell1: usize,
    ell2: usize,
    params: &WeightParams,
) -> Result<f64> {
    let job = pair_job(h1, h2, ell1, ell2, params, None, None)?;
    let r_floor = job.w1.r_floor();
    if r_floor.saturating_mul(r_floor) > MAX_DIVISOR_PAIRS {
        return Err(Error::capacity(format!(
            "⌊R⌋² = {} exceeds {MAX_DIVISOR_PAIRS}",
            r_floor.saturating_mul(r_floor)
        )));
    }
    if job.modulus.checked_mul(r_floor.saturating_mul(r_floor).max(1)).is_none() {
        return Err(Error::capacity("P·R² overflows the class modulus"));
    }
    let union = h1.union(h2);
    let base: Vec<u64> = regular_classes(&union, params.v)?
        .members()
        .iter()
        .map(|&a| a % job.modulus)
        .collect();
    let divisors = squarefree_above(params.v, r_floor);
    let counter = Counter { h1, h2, base, modulus: job.modulus, n: params.n };
    let w1: Weight = job.w1;
    let w2: Weight = job.w2;
    let strata = par::map_ordered(&divisors, |d| {
        let wd = w1.at(d.d);
        let mut acc = CompensatedSum::new();
        if wd == 0.0 {
            return acc;
        }
        let (mut cur, mut next) = (Vec::new(), Vec::new());
        for e in &divisors {
            let we = w2.at(e.d);
            if we == 0.0 {
                continue;
            }
            let c = counter.count(d, e, &mut cur, &mut next);
            if c > 0 {
                acc.add(d.mu * e.mu * wd * we * c as f64);
            }
        }
        acc
    });
    let mut total = CompensatedSum::new();
    for s in &strata {
        total.merge(s);
    }
    Ok(total.value())
}
