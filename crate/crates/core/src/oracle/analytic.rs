//! W(it) = it·ζ(1+it) and the prime product J(t, X).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::prime_engine::map_segments;
use crate::sum::CompensatedSum;

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Stieltjes constants γ_0 … γ_5 (ζ(1+s) = 1/s + Σ (−1)^n γ_n s^n / n!).
const STIELTJES: [f64; 6] = [
    0.577_215_664_901_532_9,
    -0.072_815_845_483_676_72,
    -0.009_690_363_192_872_318,
    0.002_053_834_420_303_346,
    0.002_325_370_065_467_3,
    0.000_793_323_817_301_062_7,
];

/// B_2, B_4, …, B_16.
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

const EM_TERMS: usize = 8;
const SERIES_RADIUS: f64 = 0.05;
pub const MAX_W_T: f64 = 1000.0;

/// W(it) = it·ζ(1+it).
///
/// For |t| ≤ 0.05 the Taylor series of W at 0 is used (coefficients through
/// γ_5, remainder below 10^-15). Otherwise ζ(1+it) comes from Euler–Maclaurin
/// with 8 correction terms and cutoff max(50, 10|t|); the pole term
/// N^{−it}/(it) is multiplied through by it before adding, so nothing is
/// divided by t.
pub fn w_function(t: f64) -> Result<Complex64> {
    if !t.is_finite() || t.abs() > MAX_W_T {
        return Err(Error::domain(format!("|t| must be <= {MAX_W_T}")));
    }
    if t.abs() <= SERIES_RADIUS {
        return Ok(w_series(t));
    }
    let s = Complex64::new(1.0, t);
    let it = Complex64::new(0.0, t);
    let n = (10.0 * t.abs()).ceil().max(50.0) as u64;
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for k in 1..n {
        let z = (-s * (k as f64).ln()).exp();
        re.add(z.re);
        im.add(z.im);
    }
    let ln_n = (n as f64).ln();
    let n_pow = (-s * ln_n).exp();
    let mut zeta_part = Complex64::new(re.value(), im.value()) + n_pow * 0.5;
    // B_{2k}/(2k)! · s(s+1)⋯(s+2k−2) · N^{−s−2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = n_pow / n as f64;
    for (k, b) in BERNOULLI.iter().take(EM_TERMS).enumerate() {
        zeta_part += rising * npow * (b / fact);
        let a = 2.0 * k as f64 + 1.0;
        rising = rising * (s + a) * (s + a + 1.0);
        fact *= (2.0 * k as f64 + 3.0) * (2.0 * k as f64 + 4.0);
        npow /= (n * n) as f64;
    }
    Ok(it * zeta_part + (-it * ln_n).exp())
}

fn w_series(t: f64) -> Complex64 {
    let s = Complex64::new(0.0, t);
    let mut acc = Complex64::new(1.0, 0.0);
    let mut pow = s;
    let mut fact = 1.0;
    for (n, g) in STIELTJES.iter().enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        acc += pow * (sign * g / fact);
        pow *= s;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WScanReport {
    pub t_max: f64,
    pub step: f64,
    pub points: usize,
    /// Largest grid t0 with |W(it)| ≥ e^{t²/6} at every grid point of (0, t0].
    pub t0: Option<f64>,
    /// Smallest grid t1 ≥ 1 with |W(it)| ≥ t^{2/3} at every grid point of
    /// [t1, t_max].
    pub t1: Option<f64>,
    /// min over the first grid points of |W(it)| − e^{t²/6}.
    pub near_zero_margin: f64,
    /// γ² − 2γ_1, the t² coefficient of |W(it)|².
    pub quadratic_coefficient: f64,
}

impl WScanReport {
    pub fn both_exist(&self) -> bool {
        self.t0.is_some() && self.t1.is_some()
    }
}

fn grid(lo_index: u64, hi_index: u64, step: f64) -> Vec<f64> {
    (lo_index..=hi_index).map(|k| k as f64 * step).collect()
}

/// Scan t = step, 2·step, …, ≤ t_max for the two lower bounds on |W(it)|.
pub fn verify_w_bounds(t_max: f64, step: f64) -> Result<WScanReport> {
    if !(step > 0.0) || !(t_max >= step) {
        return Err(Error::domain("need step > 0 and t_max >= step"));
    }
    let count = (t_max / step + 1e-9).floor() as u64;
    let ts = grid(1, count, step);
    let mags = par::map_ordered(&ts, |&t| w_function(t).map(|w| w.norm()));
    let mags: Vec<f64> = mags.into_iter().collect::<Result<_>>()?;

    let small_ok = |i: usize| mags[i] >= (ts[i] * ts[i] / 6.0).exp();
    let prefix = (0..ts.len()).take_while(|&i| small_ok(i)).count();
    let t0 = (prefix > 0).then(|| ts[prefix - 1]);

    let large_ok = |i: usize| mags[i] >= ts[i].powf(2.0 / 3.0);
    let mut t1 = None;
    for i in (0..ts.len()).rev() {
        if ts[i] < 1.0 || !large_ok(i) {
            break;
        }
        t1 = Some(ts[i]);
    }
    let near_zero_margin = (0..ts.len().min(10))
        .map(|i| mags[i] - (ts[i] * ts[i] / 6.0).exp())
        .fold(f64::INFINITY, f64::min);
    let g1 = -STIELTJES[1];
    Ok(WScanReport {
        t_max,
        step,
        points: ts.len(),
        t0,
        t1,
        near_zero_margin,
        quadratic_coefficient: EULER_GAMMA * EULER_GAMMA - 2.0 * g1,
    })
}

/// Whether |W(it)| ≥ t^{2/3} at every grid point t = k·step in [lo, hi];
/// also returns the smallest |W(it)|/t^{2/3} seen.
pub fn w_power_bound_on(lo: f64, hi: f64, step: f64) -> Result<(bool, f64)> {
    if !(step > 0.0) || !(hi >= lo) || !(lo > 0.0) {
        return Err(Error::domain("need 0 < lo <= hi and step > 0"));
    }
    let first = (lo / step - 1e-9).ceil() as u64;
    let last = (hi / step + 1e-9).floor() as u64;
    let ts = grid(first, last, step);
    let ratios = par::map_ordered(&ts, |&t| w_function(t).map(|w| w.norm() / t.powf(2.0 / 3.0)));
    let min = ratios.into_iter().collect::<Result<Vec<_>>>()?.into_iter().fold(f64::INFINITY, f64::min);
    Ok((min >= 1.0, min))
}

pub const MAX_J_X: u64 = 100_000_000;

/// J(t, X) = Π_{p ≤ X} |1 − p^{−1−it}| / (1 − p^{−1}), in log space.
pub fn j_product(t: f64, x: u64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain("t must be > 0"));
    }
    if x > MAX_J_X {
        return Err(Error::capacity(format!("X must be <= {MAX_J_X}")));
    }
    if x < 2 {
        return Ok(1.0);
    }
    let parts = map_segments(2, x, |_, _, primes| {
        let mut acc = CompensatedSum::new();
        for &p in primes {
            let pf = p as f64;
            let c = (t * pf.ln()).cos();
            acc.add(0.5 * (-2.0 * c / pf + 1.0 / (pf * pf)).ln_1p() - (-1.0 / pf).ln_1p());
        }
        acc
    })?;
    let mut total = CompensatedSum::new();
    for p in &parts {
        total.merge(p);
    }
    Ok(total.value().exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JTrend {
    pub t: f64,
    pub xs: Vec<u64>,
    pub values: Vec<f64>,
    pub strictly_increasing: bool,
    /// Least-squares slope of log J against log log X.
    pub loglog_slope: f64,
}

/// J(t, X) over the given X values, with the trend summary.
pub fn j_trend(t: f64, xs: &[u64]) -> Result<JTrend> {
    let values = xs.iter().map(|&x| j_product(t, x)).collect::<Result<Vec<_>>>()?;
    let strictly_increasing = values.windows(2).all(|w| w[1] > w[0]);
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(&values)
        .filter(|(&x, _)| x >= 3)
        .map(|(&x, &v)| ((x as f64).ln().ln(), v.ln()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    let loglog_slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    Ok(JTrend { t, xs: xs.to_vec(), values, strictly_increasing, loglog_slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::small_primes;

    /// Independent ζ(s): Euler–Maclaurin with 14 correction terms whose
    /// Bernoulli numbers come from the standard recurrence, and a larger
    /// cutoff.
    fn zeta_oracle(s: Complex64, n: u64) -> Complex64 {
        let m = 14;
        let mut b = vec![1.0f64];
        for k in 1..=2 * m {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for (j, bj) in b.iter().enumerate() {
                acc += binom * bj;
                binom = binom * (k + 1 - j) as f64 / (j + 1) as f64;
            }
            b.push(-acc / (k + 1) as f64);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 1..n {
            sum += Complex64::new(k as f64, 0.0).powc(-s);
        }
        let nn = Complex64::new(n as f64, 0.0);
        sum += nn.powc(1.0 - s) / (s - 1.0) + nn.powc(-s) * 0.5;
        let mut fact = 1.0;
        for k in 1..=m {
            fact *= ((2 * k - 1) * (2 * k)) as f64;
            let mut rising = Complex64::new(1.0, 0.0);
            for i in 0..(2 * k - 1) {
                rising *= s + i as f64;
            }
            sum += rising * nn.powc(-s - (2 * k - 1) as f64) * (b[2 * k] / fact);
        }
        sum
    }

    fn w_oracle(t: f64) -> Complex64 {
        let s = Complex64::new(1.0, t);
        Complex64::new(0.0, t) * zeta_oracle(s, 400 + 30 * t.abs() as u64)
    }

    #[test]
    fn w_at_zero_is_one() {
        assert_eq!(w_function(0.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn w_matches_oracle() {
        for t in [0.06, 0.5, 1.0, 2.5, 8.0, 14.134_725, 50.0, 321.7, 999.0] {
            let a = w_function(t).unwrap();
            let b = w_oracle(t);
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0), "t={t}: {a} vs {b}");
        }
        let d = (w_function(1.0).unwrap().norm() - w_oracle(1.0).norm()).abs();
        assert!(d < 1e-8);
    }

    #[test]
    fn series_and_euler_maclaurin_agree_at_the_seam() {
        for t in [0.04, 0.05] {
            let a = w_series(t);
            let b = w_oracle(t);
            assert!((a - b).norm() < 1e-12, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn quadratic_behaviour_near_zero() {
        let c = EULER_GAMMA * EULER_GAMMA - 2.0 * 0.07281;
        for t in [0.01, 0.02, 0.04] {
            let m2 = w_function(t).unwrap().norm_sqr();
            assert!((m2 - 1.0 - c * t * t).abs() < 0.2 * t * t * t + 1e-7, "t={t}");
        }
    }

    #[test]
    fn conjugate_symmetry() {
        for t in [0.03, 0.3, 3.0, 30.0, 300.0] {
            let a = w_function(-t).unwrap();
            let b = w_function(t).unwrap().conj();
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn scan_shape() {
        let r = verify_w_bounds(20.0, 0.5).unwrap();
        assert_eq!(r.points, 40);
        assert!(r.t1.is_some());
        assert!((r.quadratic_coefficient - 0.1876).abs() < 1e-3);
        let (_, min) = w_power_bound_on(10.0, 10.0, 1.0).unwrap();
        let direct = w_function(10.0).unwrap().norm() / 10f64.powf(2.0 / 3.0);
        assert_eq!(min, direct);
    }

    #[test]
    fn j_product_direct() {
        assert_eq!(j_product(1.0, 1).unwrap(), 1.0);
        let direct: f64 = small_primes(10_000)
            .into_iter()
            .map(|p| {
                let z = Complex64::new(p as f64, 0.0).powc(Complex64::new(-1.0, -1.0));
                (Complex64::new(1.0, 0.0) - z).norm() / (1.0 - 1.0 / p as f64)
            })
            .product();
        let j = j_product(1.0, 10_000).unwrap();
        assert!((j - direct).abs() < 1e-11 * direct);
        assert!(j_product(0.0, 10).is_err());
    }

    #[test]
    fn j_trend_shape() {
        let r = j_trend(1.0, &[100, 1000, 10_000]).unwrap();
        assert_eq!(r.values.len(), 3);
        assert!(r.loglog_slope.is_finite());
    }
}
