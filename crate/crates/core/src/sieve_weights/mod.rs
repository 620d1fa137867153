//! The GPY weight Λ_R(n; H, ℓ) and the empirical sums built from it.
//!
//! Every sum runs over N < n ≤ 2N restricted to regular n (no prime ≤ V
//! divides P_H(n)). The "direct" strategy walks n and factors P_H(n) with a
//! window sieve; the "divisor" strategy expands the product of the two
//! weights over divisor pairs and counts residue classes exactly.

mod divisor;
mod window;

pub use divisor::{pair_sum_divisor, MAX_DIVISOR_PAIRS};

use std::io::{self, Write};

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, small_primes};
use crate::error::{Error, Result};
use crate::par;
use crate::prime_engine::{sieve_range, PrimeTable};
use crate::sum::CompensatedSum;
use crate::tuple_core::{is_admissible, small_prime_product, TupleH};
use window::Window;

const CHUNK: u64 = 1 << 15;
/// Largest N accepted by the window sums.
pub const MAX_WINDOW_N: u64 = 1_000_000_000_000;
/// Ceiling on (number of K-subsets) × N for the detector.
pub const DETECTOR_BUDGET: u64 = 2_000_000_000;

/// The GPY parameter bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub k: usize,
    pub ell: usize,
    pub r: f64,
    pub v: u64,
    pub n: u64,
}

impl WeightParams {
    pub fn new(k: usize, ell: usize, r: f64, v: u64, n: u64) -> Result<Self> {
        let p = WeightParams { k, ell, r, v, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 1.0) || !self.r.is_finite() {
            return Err(Error::domain(format!("R must be a finite real > 1, got {}", self.r)));
        }
        if self.k < 1 {
            return Err(Error::domain("K must be >= 1"));
        }
        if self.v < 2 {
            return Err(Error::domain("V must be >= 2"));
        }
        if self.n < 1 {
            return Err(Error::domain("N must be >= 1"));
        }
        if self.n > MAX_WINDOW_N {
            return Err(Error::capacity(format!("N must be <= {MAX_WINDOW_N}")));
        }
        Ok(())
    }

    /// R = (3N)^{1/4 − ξ}, V = ⌊√(log N)⌋ (at least 2), ℓ + 1 = √K/4 and
    /// h = 100·log R / K. K must be 16(ℓ+1)² up to rounding of √K/4.
    pub fn standard_recipe(k: usize, n: u64, xi: f64) -> Result<StandardRecipe> {
        let quarter_root = (k as f64).sqrt() / 4.0;
        let ell_plus_one = quarter_root.round();
        if ell_plus_one < 1.0 {
            return Err(Error::domain("standard recipe needs K >= 16 (ℓ + 1 = √K/4 >= 1)"));
        }
        if !(0.0..0.25).contains(&xi) {
            return Err(Error::domain("ξ must lie in [0, 1/4)"));
        }
        let r = (3.0 * n as f64).powf(0.25 - xi);
        let v = ((n as f64).ln().sqrt().floor() as u64).max(2);
        let params = WeightParams::new(k, ell_plus_one as usize - 1, r, v, n)?;
        let h = 100.0 * r.ln() / k as f64;
        Ok(StandardRecipe { params, h, xi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardRecipe {
    pub params: WeightParams,
    pub h: f64,
    pub xi: f64,
}

impl StandardRecipe {
    /// Whether `params`, `h` and `xi` satisfy the recipe up to rounding.
    pub fn check(params: &WeightParams, h: f64, xi: f64) -> bool {
        let r = (3.0 * params.n as f64).powf(0.25 - xi);
        let ell_ok = ((params.ell + 1) as f64 - (params.k as f64).sqrt() / 4.0).abs() <= 0.5;
        let r_ok = (params.r - r).abs() <= 1e-9 * r;
        let h_ok = (h - 100.0 * params.r.ln() / params.k as f64).abs() <= 0.5;
        ell_ok && r_ok && h_ok
    }
}

/// P_H(n) = Π_{h ∈ H} (n + h).
pub fn polynomial_value(n: u64, h: &TupleH) -> Result<BigUint> {
    if n < 1 {
        return Err(Error::domain("n must be >= 1"));
    }
    Ok(h.shifts().iter().fold(BigUint::one(), |acc, &s| acc * (BigUint::from(n) + s)))
}

/// d ↦ (log R/d)^e / e!, the truncated-divisor weight.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Weight {
    r: f64,
    r_floor: u64,
    exp: i32,
    inv_fact: f64,
}

impl Weight {
    pub(crate) fn new(r: f64, exp: usize) -> Self {
        let fact: f64 = (1..=exp).map(|i| i as f64).product();
        Weight { r, r_floor: r.floor() as u64, exp: exp as i32, inv_fact: 1.0 / fact }
    }

    pub(crate) fn r_floor(&self) -> u64 {
        self.r_floor
    }

    #[inline]
    pub(crate) fn at(&self, d: u64) -> f64 {
        let x = (self.r / d as f64).ln().max(0.0);
        x.powi(self.exp) * self.inv_fact
    }

    /// Σ μ(d)·w(d) over squarefree d ≤ R built from `primes` (ascending).
    pub(crate) fn divisor_sum(&self, primes: &[u64]) -> f64 {
        let mut acc = self.at(1);
        self.descend(primes, 1, -1.0, &mut acc);
        acc
    }

    fn descend(&self, primes: &[u64], d: u64, sign: f64, acc: &mut f64) {
        for (i, &p) in primes.iter().enumerate() {
            let dp = d * p;
            if dp > self.r_floor {
                break;
            }
            *acc += sign * self.at(dp);
            self.descend(&primes[i + 1..], dp, -sign, acc);
        }
    }
}

/// Λ_R(n; H, ℓ), factoring each n + h by trial division.
pub fn lambda_r(n: u64, h: &TupleH, ell: usize, r: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("n must be >= 1"));
    }
    if !(r > 1.0) {
        return Err(Error::domain("R must be > 1"));
    }
    let w = Weight::new(r, h.len() + ell);
    let mut primes: Vec<u64> = h
        .shifts()
        .iter()
        .flat_map(|&s| factorize(n + s).into_iter().map(|(p, _)| p))
        .filter(|&p| p <= w.r_floor())
        .collect();
    primes.sort_unstable();
    primes.dedup();
    Ok(w.divisor_sum(&primes))
}

/// Membership test for A(H) modulo P = Π_{p ≤ V} p.
pub(crate) struct Regularity {
    primes: Vec<u64>,
    blocked: Vec<u64>,
}

impl Regularity {
    pub(crate) fn new(h: &TupleH, v: u64) -> Result<Self> {
        small_prime_product(v)?;
        let primes = small_primes(v);
        let blocked = primes
            .iter()
            .map(|&p| h.shifts().iter().fold(0u64, |m, &s| m | 1 << ((p - s % p) % p)))
            .collect();
        Ok(Regularity { primes, blocked })
    }

    #[inline]
    pub(crate) fn contains(&self, n: u64) -> bool {
        self.primes
            .iter()
            .zip(&self.blocked)
            .all(|(&p, &b)| b >> (n % p) & 1 == 0)
    }
}

fn require_admissible(h: &TupleH, name: &str) -> Result<()> {
    if is_admissible(h) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {h} is not admissible")))
    }
}

/// One window of the n-range and its partial sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentPartial {
    pub segment_lo: u64,
    pub segment_hi: u64,
    pub partial: f64,
}

pub fn write_partials_csv<W: Write>(mut w: W, partials: &[SegmentPartial]) -> io::Result<()> {
    writeln!(w, "segment_lo,segment_hi,partial")?;
    for s in partials {
        writeln!(w, "{},{},{:e}", s.segment_lo, s.segment_hi, s.partial)?;
    }
    Ok(())
}

fn total(partials: &[SegmentPartial]) -> f64 {
    partials.iter().map(|s| s.partial).collect::<CompensatedSum>().value()
}

struct PairJob<'a> {
    shifts: Vec<u64>,
    mask1: u64,
    mask2: u64,
    w1: Weight,
    w2: Weight,
    sieve_primes: Vec<u64>,
    regular: Regularity,
    modulus: u64,
    class: Option<u64>,
    theta: Option<(u64, &'a PrimeTable)>,
}

impl PairJob<'_> {
    fn segment(&self, lo: u64, hi: u64) -> SegmentPartial {
        let win = Window::build(lo, hi, &self.shifts, &self.sieve_primes);
        let mut acc = CompensatedSum::new();
        let mut buf = Vec::new();
        let (start, step) = match self.class {
            Some(a) => (lo + (a % self.modulus + self.modulus - lo % self.modulus) % self.modulus, self.modulus),
            None => (lo, 1),
        };
        let mut n = start;
        while n <= hi {
            if self.regular.contains(n) {
                let log_p = match self.theta {
                    Some((h0, table)) => match table.contains(n + h0) {
                        Some(true) => ((n + h0) as f64).ln(),
                        _ => 0.0,
                    },
                    None => 1.0,
                };
                if log_p != 0.0 {
                    win.primes_for(n, self.mask1, &mut buf);
                    let l1 = self.w1.divisor_sum(&buf);
                    win.primes_for(n, self.mask2, &mut buf);
                    let l2 = self.w2.divisor_sum(&buf);
                    acc.add(l1 * l2 * log_p);
                }
            }
            n += step;
        }
        SegmentPartial { segment_lo: lo, segment_hi: hi, partial: acc.value() }
    }
}

fn pair_job<'a>(
    h1: &TupleH,
    h2: &TupleH,
    ell1: usize,
    ell2: usize,
    params: &WeightParams,
    per_class: Option<u64>,
    theta: Option<(u64, &'a PrimeTable)>,
) -> Result<PairJob<'a>> {
    params.validate()?;
    require_admissible(h1, "H1")?;
    require_admissible(h2, "H2")?;
    let union = h1.union(h2);
    if union.len() > 64 {
        return Err(Error::capacity("H1 ∪ H2 may hold at most 64 shifts"));
    }
    let modulus = small_prime_product(params.v)?;
    let regular = Regularity::new(&union, params.v)?;
    if let Some(a) = per_class {
        if a == 0 || a > modulus || !regular.contains(a) {
            return Err(Error::domain(format!("{a} is not a regular class mod {modulus}")));
        }
    }
    let shifts = union.shifts().to_vec();
    let mask_of = |h: &TupleH| {
        shifts
            .iter()
            .enumerate()
            .filter(|(_, s)| h.contains(**s))
            .fold(0u64, |m, (i, _)| m | 1 << i)
    };
    let (mask1, mask2) = (mask_of(h1), mask_of(h2));
    let w1 = Weight::new(params.r, h1.len() + ell1);
    let w2 = Weight::new(params.r, h2.len() + ell2);
    Ok(PairJob {
        mask1,
        mask2,
        sieve_primes: small_primes(w1.r_floor()),
        shifts,
        w1,
        w2,
        regular,
        modulus,
        class: per_class,
        theta,
    })
}

/// Per-window partials of Σ Λ_R(n;H1,ℓ1)Λ_R(n;H2,ℓ2) over regular n.
pub fn pair_sum_direct_partials(
    h1: &TupleH,
    h2: &TupleH,
    ell1: usize,
    ell2: usize,
    params: &WeightParams,
    per_class: Option<u64>,
) -> Result<Vec<SegmentPartial>> {
    let job = pair_job(h1, h2, ell1, ell2, params, per_class, None)?;
    let segs = par::chunks(params.n + 1, 2 * params.n, CHUNK);
    Ok(par::map_ordered(&segs, |&(lo, hi)| job.segment(lo, hi)))
}

/// Σ_{N < n ≤ 2N, n ∈ A(H1) ∩ A(H2)} Λ_R(n;H1,ℓ1)Λ_R(n;H2,ℓ2), optionally
/// restricted to the single class `per_class` mod P.
pub fn pair_sum_direct(
    h1: &TupleH,
    h2: &TupleH,
    ell1: usize,
    ell2: usize,
    params: &WeightParams,
    per_class: Option<u64>,
) -> Result<f64> {
    Ok(total(&pair_sum_direct_partials(h1, h2, ell1, ell2, params, per_class)?))
}

/// The same sum weighted by θ(n + h0).
pub fn pair_sum_theta(
    h1: &TupleH,
    h2: &TupleH,
    ell1: usize,
    ell2: usize,
    h0: u64,
    params: &WeightParams,
) -> Result<f64> {
    pair_sum_theta_class(h1, h2, ell1, ell2, h0, params, None)
}

pub fn pair_sum_theta_class(
    h1: &TupleH,
    h2: &TupleH,
    ell1: usize,
    ell2: usize,
    h0: u64,
    params: &WeightParams,
    per_class: Option<u64>,
) -> Result<f64> {
    params.validate()?;
    let table = sieve_range(params.n + 1 + h0, 2 * params.n + h0)?;
    let job = pair_job(h1, h2, ell1, ell2, params, per_class, Some((h0, &table)))?;
    let segs = par::chunks(params.n + 1, 2 * params.n, CHUNK);
    Ok(total(&par::map_ordered(&segs, |&(lo, hi)| job.segment(lo, hi))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    /// S'_R(N, K, ℓ, P).
    pub value: f64,
    /// 1/(N·h^{2K+1}).
    pub prefactor: f64,
    /// The n-sum before the prefactor.
    pub raw_sum: f64,
    pub h: u64,
    pub subsets: u64,
    pub positive: bool,
}

/// 1/(N·h^{2K+1}).
pub fn detector_prefactor(n: u64, h: u64, k: usize) -> f64 {
    1.0 / (n as f64 * (h as f64).powi(2 * k as i32 + 1))
}

/// S'_R(N,K,ℓ,P) for 𝒜 ⊂ [1, h], h = max 𝒜: Σ_n (Σ_{p ∈ n+𝒜, p ≤ 3N} log p
/// − log 3N)·Ψ'_R(n)², with Ψ'_R(n) summing Λ_R(n;H,ℓ) over ordered K-tuples
/// H ⊂ 𝒜 of distinct elements with n ∈ A(H).
pub fn detector_sum(a: &TupleH, params: &WeightParams) -> Result<DetectorReport> {
    params.validate()?;
    let k = params.k;
    if k > a.len() {
        return Err(Error::domain(format!("K = {k} exceeds |A| = {}", a.len())));
    }
    if a.len() > 64 {
        return Err(Error::capacity("A may hold at most 64 shifts"));
    }
    let count = binomial(a.len() as u64, k as u64);
    if count.saturating_mul(params.n) > DETECTOR_BUDGET {
        return Err(Error::capacity(format!(
            "{count} subsets × N exceeds the budget {DETECTOR_BUDGET}"
        )));
    }
    let subsets = subset_masks(a.len(), k);
    small_prime_product(params.v)?;
    let small = small_primes(params.v);
    let shifts = a.shifts().to_vec();
    let three_n = 3 * params.n;
    let table = sieve_range(params.n + 1 + a.min(), 2 * params.n + a.max())?;
    let w = Weight::new(params.r, k + params.ell);
    let sieve_primes = small_primes(w.r_floor());
    let ordered: f64 = (1..=k).map(|i| i as f64).product();
    let log3n = (three_n as f64).ln();

    let segs = par::chunks(params.n + 1, 2 * params.n, CHUNK);
    let partials = par::map_ordered(&segs, |&(lo, hi)| {
        let win = Window::build(lo, hi, &shifts, &sieve_primes);
        let mut acc = CompensatedSum::new();
        let mut buf = Vec::new();
        for n in lo..=hi {
            let mut irregular = 0u64;
            for &p in &small {
                for (i, &s) in shifts.iter().enumerate() {
                    if (n + s) % p == 0 {
                        irregular |= 1 << i;
                    }
                }
            }
            let mut psi = 0.0;
            for &m in &subsets {
                if m & irregular == 0 {
                    win.primes_for(n, m, &mut buf);
                    psi += w.divisor_sum(&buf);
                }
            }
            if psi == 0.0 {
                continue;
            }
            psi *= ordered;
            let mut theta = 0.0;
            for &s in &shifts {
                let m = n + s;
                if m <= three_n && table.contains(m) == Some(true) {
                    theta += (m as f64).ln();
                }
            }
            acc.add((theta - log3n) * psi * psi);
        }
        acc
    });
    let mut raw = CompensatedSum::new();
    for p in &partials {
        raw.merge(p);
    }
    let raw_sum = raw.value();
    let h = a.max().max(1);
    let prefactor = detector_prefactor(params.n, h, k);
    let value = raw_sum * prefactor;
    Ok(DetectorReport {
        value,
        prefactor,
        raw_sum,
        h,
        subsets: subsets.len() as u64,
        positive: value > 0.0,
    })
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k.min(n)).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn subset_masks(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    fn go(start: usize, n: usize, left: usize, mask: u64, out: &mut Vec<u64>) {
        if left == 0 {
            out.push(mask);
            return;
        }
        for i in start..=n - left {
            go(i + 1, n, left - 1, mask | 1 << i, out);
        }
    }
    go(0, n, k, 0, &mut out);
    out
}
