//! Exact rational kernels: Z(d, u, y), the coefficients A_{j,ν} and their
//! ratio bounds, and the squarefree divisor function d_m(q) = m^{ω(q)}.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::par;

const FACT_CACHE: usize = 256;

fn factorial(n: u64) -> BigInt {
    static TABLE: OnceLock<Vec<BigInt>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(FACT_CACHE);
        t.push(BigInt::one());
        for i in 1..FACT_CACHE {
            let next = &t[i - 1] * BigInt::from(i);
            t.push(next);
        }
        t
    });
    match table.get(n as usize) {
        Some(f) => f.clone(),
        None => (FACT_CACHE as u64..=n).fold(table[FACT_CACHE - 1].clone(), |acc, i| acc * i),
    }
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// a(a+1)⋯(a+m−1), the rising factorial; 1 for m = 0.
fn rising(a: i64, m: u64) -> BigInt {
    (0..m as i64).fold(BigInt::one(), |acc, i| acc * BigInt::from(a + i))
}

/// x/n! with the convention x/n! = 0 for n < 0.
fn over_factorial(x: BigInt, n: i64) -> BigRational {
    if n < 0 {
        BigRational::zero()
    } else {
        BigRational::new(x, factorial(n as u64))
    }
}

fn ratio(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

/// (d, u, y) with d ≥ 0, u ≥ 0, y + u ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SuitableTriplet {
    d: u64,
    u: u64,
    y: i64,
}

impl SuitableTriplet {
    pub fn new(d: u64, u: u64, y: i64) -> Result<Self> {
        if y + (u as i64) < 0 {
            return Err(Error::domain(format!("({d}, {u}, {y}) is not suitable: y + u < 0")));
        }
        Ok(SuitableTriplet { d, u, y })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn u(&self) -> u64 {
        self.u
    }

    pub fn y(&self) -> i64 {
        self.y
    }
}

/// Z(d,u,y) = (1/u!) Σ_{0 ≤ m ≤ u, m ≥ −y} C(u,m)(−1)^m d(d+1)⋯(d+m−1)/(y+m)!.
pub fn z_sum(t: SuitableTriplet) -> BigRational {
    let mut acc = BigRational::zero();
    for m in 0..=t.u {
        let term = over_factorial(binomial(t.u, m) * rising(t.d as i64, m), t.y + m as i64);
        if m % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc / BigRational::from_integer(factorial(t.u))
}

/// (y−d+1)(y−d+2)⋯(y−d+u) / (u!·(y+u)!).
pub fn z_closed(t: SuitableTriplet) -> BigRational {
    let num = rising(t.y - t.d as i64 + 1, t.u);
    ratio(num, factorial(t.u) * factorial((t.y + t.u as i64) as u64))
}

fn check_coeff_domain(j: u64, nu: u64, d: u64, u: u64, v: u64) -> Result<()> {
    if j > u || nu + j > v + d + u {
        return Err(Error::domain(format!(
            "need 0 <= j <= u and 0 <= nu <= v + d + u - j, got j={j} nu={nu} d={d} u={u} v={v}"
        )));
    }
    Ok(())
}

/// A_{j,ν} from its defining sum:
/// (j!ν!/u!) Σ_m C(u,m+j)(−1)^m C(m+j,j) d(d+1)⋯(d+m−1)/((v+d+m−ν)! ν!).
pub fn coeff_a_sum(j: u64, nu: u64, d: u64, u: u64, v: u64) -> Result<BigRational> {
    check_coeff_domain(j, nu, d, u, v)?;
    let y = (v + d) as i64 - nu as i64;
    let mut acc = BigRational::zero();
    for m in 0..=(u - j) {
        let num = binomial(u, m + j) * binomial(m + j, j) * rising(d as i64, m);
        let term = over_factorial(num, y + m as i64) / BigRational::from_integer(factorial(nu));
        if m % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc * ratio(factorial(j) * factorial(nu), factorial(u)))
}

/// A_{j,ν} = Z(d, u−j, v+d−ν) in closed form.
pub fn coeff_a(j: u64, nu: u64, d: u64, u: u64, v: u64) -> Result<BigRational> {
    check_coeff_domain(j, nu, d, u, v)?;
    let t = SuitableTriplet::new(d, u - j, (v + d) as i64 - nu as i64)?;
    Ok(z_closed(t))
}

/// A''_{j,ν} = |(v−ν+1)⋯(v−ν+u−j)| / ((v+1)⋯(v+u−j)).
pub fn coeff_a2(j: u64, nu: u64, u: u64, v: u64) -> BigRational {
    let len = u - j;
    let num = rising(v as i64 - nu as i64 + 1, len).abs();
    ratio(num, rising(v as i64 + 1, len))
}

/// A'_{j,ν} via the factorised form
/// (d+v+u)!/(d+v+u−ν−j)! · (u−j+1)⋯u/((v+u−j+1)⋯(v+u)) · A''_{j,ν}.
pub fn coeff_a1(j: u64, nu: u64, d: u64, u: u64, v: u64) -> Result<BigRational> {
    check_coeff_domain(j, nu, d, u, v)?;
    let s = d + v + u;
    let head = ratio(factorial(s), factorial(s - nu - j));
    let mid = ratio(rising((u - j + 1) as i64, j), rising((v + u - j + 1) as i64, j));
    Ok(head * mid * coeff_a2(j, nu, u, v))
}

/// Exact-check report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub grid: BTreeMap<String, i64>,
    pub checked: u64,
    pub violations: Vec<String>,
    /// Largest ratio observed, as an exact rational "p/q".
    pub max_ratio: String,
}

impl CheckReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

fn grid(entries: &[(&str, i64)]) -> BTreeMap<String, i64> {
    entries.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn max_rational(values: impl IntoIterator<Item = BigRational>) -> Option<BigRational> {
    values.into_iter().reduce(|a, b| if b > a { b } else { a })
}

/// Z_sum = Z_closed and Z(d,u,y) = ((y+1−d)/u)·Z(d,u−1,y+1) on d,u ≤ `max_du`,
/// −u ≤ y ≤ `max_y`.
pub fn lemma2_check(max_du: u64, max_y: i64) -> CheckReport {
    let ds: Vec<u64> = (0..=max_du).collect();
    let per_d = par::map_ordered(&ds, |&d| {
        let mut violations = Vec::new();
        let mut checked = 0u64;
        for u in 0..=max_du {
            for y in -(u as i64)..=max_y {
                let t = SuitableTriplet { d, u, y };
                let s = z_sum(t);
                let c = z_closed(t);
                checked += 1;
                if s != c {
                    violations.push(format!("Z_sum({d},{u},{y}) = {s} != {c}"));
                }
                if u >= 1 {
                    let prev = z_closed(SuitableTriplet { d, u: u - 1, y: y + 1 });
                    let step = ratio(BigInt::from(y + 1 - d as i64), BigInt::from(u)) * prev;
                    if step != s {
                        violations.push(format!("induction step fails at ({d},{u},{y})"));
                    }
                }
            }
        }
        (checked, violations)
    });
    let mut report = CheckReport {
        check: "lemma2".into(),
        grid: grid(&[("max_du", max_du as i64), ("max_y", max_y)]),
        checked: 0,
        violations: Vec::new(),
        max_ratio: "1".into(),
    };
    for (c, v) in per_d {
        report.checked += c;
        report.violations.extend(v);
    }
    report
}

/// Both routes for A_{j,ν}, A'_{j,ν} = A_{j,ν}/A_{0,0}, and the A'' bounds on
/// every (j, ν, d, u, v) with d, u, v, ν ≤ `max`.
///
/// The A'' bounds are the ones the ratio argument needs: A'' ≤ 1 for
/// ν ≤ 2(v+1), and A'' < 2^ν for ν ≥ 1 when u ≤ v. At ν = 0, A'' = 1 = 2^0.
pub fn coeff_identity_check(max: u64) -> CheckReport {
    let ds: Vec<u64> = (0..=max).collect();
    let per_d = par::map_ordered(&ds, |&d| {
        let mut violations = Vec::new();
        let mut checked = 0u64;
        let mut worst: Option<BigRational> = None;
        for u in 0..=max {
            for v in 0..=max {
                let a00 = coeff_a(0, 0, d, u, v).expect("in domain");
                for j in 0..=u {
                    for nu in 0..=max.min(v + d + u - j) {
                        checked += 1;
                        let closed = coeff_a(j, nu, d, u, v).expect("in domain");
                        let sum = coeff_a_sum(j, nu, d, u, v).expect("in domain");
                        if closed != sum {
                            violations.push(format!("A({j},{nu}; {d},{u},{v}): {sum} != {closed}"));
                        }
                        let a1 = coeff_a1(j, nu, d, u, v).expect("in domain");
                        if (&closed / &a00).abs() != a1 {
                            violations.push(format!("A'({j},{nu}; {d},{u},{v}) mismatch"));
                        }
                        let a2 = coeff_a2(j, nu, u, v);
                        if nu <= 2 * (v + 1) && a2 > BigRational::one() {
                            violations.push(format!("A''({j},{nu}; {u},{v}) = {a2} > 1"));
                        }
                        let pow = BigRational::from_integer(BigInt::one() << nu as usize);
                        if u <= v && nu >= 1 && a2 >= pow {
                            violations.push(format!("A''({j},{nu}; {u},{v}) = {a2} >= 2^{nu}"));
                        }
                        if u <= v {
                            let r = a2 / pow;
                            worst = max_rational(worst.into_iter().chain([r]));
                        }
                    }
                }
            }
        }
        (checked, violations, worst)
    });
    let mut report = CheckReport {
        check: "coeff_identity".into(),
        grid: grid(&[("max", max as i64)]),
        checked: 0,
        violations: Vec::new(),
        max_ratio: String::new(),
    };
    let mut worst = None;
    for (c, v, w) in per_d {
        report.checked += c;
        report.violations.extend(v);
        worst = max_rational(worst.into_iter().chain(w));
    }
    report.max_ratio = worst.map(|w| w.to_string()).unwrap_or_default();
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub d: u64,
    pub u: u64,
    pub v: u64,
    pub checked: u64,
    pub violations: Vec<String>,
    /// max A''_{j,ν}·2^{−ν}, exact.
    pub max_ratio: String,
    /// Smallest c with |A'_{j,ν}| ≤ (c·K)^{j+ν}, K = max(d, u, v), over j+ν ≥ 1.
    pub min_c: f64,
}

/// A''_{j,ν} for all 0 ≤ j ≤ u, 0 ≤ ν ≤ v+d+u−j, checked against A'' ≤ 1 for
/// ν ≤ 2(v+1) and A'' < 2^ν for ν ≥ 1. Requires u ≤ v.
pub fn coeff_ratio_check(d: u64, u: u64, v: u64) -> Result<RatioReport> {
    if u > v {
        return Err(Error::domain(format!("need u <= v, got u={u} v={v}")));
    }
    let k = d.max(u).max(v) as f64;
    let mut violations = Vec::new();
    let mut worst: Option<BigRational> = None;
    let mut min_c: f64 = 0.0;
    let mut checked = 0;
    for j in 0..=u {
        for nu in 0..=(v + d + u - j) {
            checked += 1;
            let a2 = coeff_a2(j, nu, u, v);
            let pow = BigRational::from_integer(BigInt::one() << nu as usize);
            if nu <= 2 * (v + 1) && a2 > BigRational::one() {
                violations.push(format!("A''({j},{nu}) = {a2} > 1"));
            }
            if nu >= 1 && a2 >= pow {
                violations.push(format!("A''({j},{nu}) = {a2} >= 2^{nu}"));
            }
            if j + nu >= 1 && k > 0.0 {
                let a1 = coeff_a1(j, nu, d, u, v)?.to_f64().unwrap_or(f64::INFINITY);
                if a1 > 0.0 {
                    min_c = min_c.max(a1.powf(1.0 / (j + nu) as f64) / k);
                }
            }
            worst = max_rational(worst.into_iter().chain([a2 / pow]));
        }
    }
    Ok(RatioReport {
        d,
        u,
        v,
        checked,
        violations,
        max_ratio: worst.map(|w| w.to_string()).unwrap_or_default(),
        min_c,
    })
}

/// d_m(q) = m^{ω(q)} for squarefree q.
pub fn divisor_m(q: u64, m: u64) -> Result<BigUint> {
    if q == 0 {
        return Err(Error::domain("q must be >= 1"));
    }
    let f = factorize(q);
    if f.iter().any(|&(_, e)| e > 1) {
        return Err(Error::domain(format!("{q} is not squarefree")));
    }
    Ok(num_traits::pow(BigUint::from(m), f.len()))
}

/// ω(q) for q ≤ x, with `u8::MAX` marking non-squarefree q.
fn omega_table(x: u64) -> Vec<u8> {
    let n = x as usize;
    let mut omega = vec![0u8; n + 1];
    let mut composite = vec![false; n + 1];
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        let mut j = 2 * p;
        while j <= n {
            composite[j] = true;
            j += p;
        }
        let mut j = p;
        while j <= n {
            omega[j] = omega[j].saturating_add(1);
            j += p;
        }
        if let Some(pp) = p.checked_mul(p) {
            let mut j = pp;
            while j <= n {
                omega[j] = u8::MAX;
                j += pp;
            }
        }
    }
    omega
}

pub const MAX_DIVISOR_MEAN_X: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorMeanReport {
    pub x: u64,
    pub m: u64,
    /// Σ over squarefree q ≤ x of m^{ω(q)}, exact decimal.
    pub lhs: String,
    /// x·(1 + log x)^{⌈m⌉}.
    pub rhs: f64,
    pub holds: bool,
}

/// Σ♭_{q ≤ x} d_m(q) against x(1 + log x)^{⌈m⌉}.
pub fn divisor_mean_check(x: u64, m: u64) -> Result<DivisorMeanReport> {
    if x < 1 || m < 1 {
        return Err(Error::domain("need x >= 1 and m >= 1"));
    }
    if x > MAX_DIVISOR_MEAN_X {
        return Err(Error::capacity(format!("x must be <= {MAX_DIVISOR_MEAN_X}")));
    }
    let omega = omega_table(x);
    let mut by_omega = [0u64; 16];
    for &w in &omega[1..] {
        if w != u8::MAX {
            by_omega[w as usize] += 1;
        }
    }
    let lhs: BigUint = by_omega
        .iter()
        .enumerate()
        .map(|(w, &c)| BigUint::from(c) * num_traits::pow(BigUint::from(m), w))
        .sum();
    let rhs = x as f64 * (1.0 + (x as f64).ln()).powi(m as i32);
    let holds = lhs.to_f64().unwrap_or(f64::INFINITY) <= rhs;
    Ok(DivisorMeanReport { x, m, lhs: lhs.to_string(), rhs, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uj413Report {
    pub x: u64,
    pub k: u64,
    pub nu: f64,
    /// Σ♭_{q ≤ x} d_{3K}(q)^{1+1/ν}/q.
    pub lhs: f64,
    /// log(lhs) / (K·log(1 + log x)): the smallest constant C' that works.
    pub implied_c: f64,
}

/// The second divisor-mean inequality, reported as the implied constant.
pub fn uj413_report(x: u64, k: u64, nu: f64) -> Result<Uj413Report> {
    if x < 2 || k < 1 || !(nu >= 1.0) {
        return Err(Error::domain("need x >= 2, K >= 1 and ν >= 1"));
    }
    if x > MAX_DIVISOR_MEAN_X {
        return Err(Error::capacity(format!("x must be <= {MAX_DIVISOR_MEAN_X}")));
    }
    let omega = omega_table(x);
    let base = (3 * k) as f64;
    let expo = 1.0 + 1.0 / nu;
    let mut acc = crate::sum::CompensatedSum::new();
    for (q, &w) in omega.iter().enumerate().skip(1) {
        if w != u8::MAX {
            acc.add(base.powf(w as f64 * expo) / q as f64);
        }
    }
    let lhs = acc.value();
    let implied_c = lhs.ln() / (k as f64 * (1.0 + (x as f64).ln()).ln());
    Ok(Uj413Report { x, k, nu, lhs, implied_c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_squarefree;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn st(d: u64, u: u64, y: i64) -> SuitableTriplet {
        SuitableTriplet::new(d, u, y).unwrap()
    }

    #[test]
    fn z_examples() {
        assert_eq!(z_sum(st(1, 1, 1)), q(1, 2));
        assert_eq!(z_closed(st(1, 1, 1)), q(1, 2));
        for d in 0..5 {
            for y in 0..6 {
                let want = q(1, 1) / BigRational::from_integer(factorial(y as u64));
                assert_eq!(z_sum(st(d, 0, y)), want);
                assert_eq!(z_closed(st(d, 0, y)), want);
            }
        }
        // d = 0 kills every m ≥ 1 term.
        assert_eq!(z_sum(st(0, 3, 2)), q(1, 6 * 2));
        assert_eq!(z_sum(st(0, 3, 2)), z_closed(st(0, 3, 2)));
        assert!(SuitableTriplet::new(1, 2, -3).is_err());
    }

    #[test]
    fn negative_y_guard() {
        // y = −2, u = 3: only m ≥ 2 contribute.
        let t = st(2, 3, -2);
        let want = (q(3, 1) * q(6, 1) / q(1, 1) - q(1, 1) * q(24, 1)) / q(6, 1);
        assert_eq!(z_sum(t), want);
        assert_eq!(z_closed(t), want);
    }

    #[test]
    fn lemma2_small_grid() {
        let r = lemma2_check(8, 8);
        assert!(r.passes(), "{:?}", &r.violations[..r.violations.len().min(3)]);
        assert_eq!(r.checked, (0..=8u64).map(|u| 9 + u).sum::<u64>() * 9);
    }

    #[test]
    fn coeff_examples() {
        for (d, u, v) in [(0, 0, 0), (2, 3, 4), (5, 1, 2)] {
            let a00 = coeff_a(0, 0, d, u, v).unwrap();
            let want = ratio(rising(v as i64 + 1, u), factorial(u) * factorial(d + v + u));
            assert_eq!(a00, want);
            for nu in 0..=(v + d) {
                let a = coeff_a(u, nu, d, u, v).unwrap();
                assert_eq!(a, ratio(BigInt::one(), factorial(v + d - nu)));
            }
        }
        assert!(coeff_a(3, 0, 1, 2, 1).is_err());
        assert!(coeff_a(0, 9, 1, 2, 1).is_err());
    }

    #[test]
    fn coeff_routes_agree_small() {
        let r = coeff_identity_check(6);
        assert!(r.passes(), "{:?}", &r.violations[..r.violations.len().min(3)]);
        assert_eq!(r.max_ratio, "1");
    }

    #[test]
    fn ratio_check_examples() {
        let r = coeff_ratio_check(3, 4, 4).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert_eq!(r.max_ratio, "1");
        assert!(r.min_c > 0.0 && r.min_c.is_finite());
        // ν = 1 with v − ν + 1 = 0 gives a zero numerator.
        assert!(coeff_a2(0, 1, 2, 0).is_zero());
        assert!(coeff_ratio_check(0, 3, 2).is_err());
    }

    #[test]
    fn divisor_function() {
        assert_eq!(divisor_m(1, 7).unwrap(), BigUint::from(1u32));
        assert_eq!(divisor_m(6, 3).unwrap(), BigUint::from(9u32));
        assert_eq!(
            divisor_m(35, 4).unwrap(),
            divisor_m(5, 4).unwrap() * divisor_m(7, 4).unwrap()
        );
        assert!(divisor_m(12, 2).is_err());
    }

    #[test]
    fn divisor_mean_examples() {
        let r = divisor_mean_check(1, 5).unwrap();
        assert_eq!(r.lhs, "1");
        assert!(r.holds);
        let r = divisor_mean_check(1000, 1).unwrap();
        let count = (1..=1000u64).filter(|&q| is_squarefree(q)).count();
        assert_eq!(r.lhs, count.to_string());
        let r = divisor_mean_check(100_000, 3).unwrap();
        let direct: u64 = (1..=100_000u64)
            .filter(|&q| is_squarefree(q))
            .map(|q| 3u64.pow(factorize(q).len() as u32))
            .sum();
        assert_eq!(r.lhs, direct.to_string());
        assert!(r.holds);
    }

    #[test]
    fn uj413_reports_finite_constant() {
        let r = uj413_report(10_000, 2, 2.0).unwrap();
        assert!(r.lhs > 1.0 && r.implied_c.is_finite() && r.implied_c > 0.0);
    }

    proptest! {
        #[test]
        fn closed_equals_sum(d in 0u64..30, u in 0u64..30, y in -30i64..30) {
            prop_assume!(y + u as i64 >= 0);
            let t = st(d, u, y);
            prop_assert_eq!(z_sum(t), z_closed(t));
        }

        #[test]
        fn divisor_multiplicative(a in 1u64..2000, b in 1u64..2000, m in 0u64..8) {
            prop_assume!(is_squarefree(a) && is_squarefree(b) && crate::arith::gcd(a, b) == 1);
            prop_assert_eq!(
                divisor_m(a * b, m).unwrap(),
                divisor_m(a, m).unwrap() * divisor_m(b, m).unwrap()
            );
        }
    }
}
