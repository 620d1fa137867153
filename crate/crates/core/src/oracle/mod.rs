//! Predicted main terms for the weighted pair sums, the constant
//! G(0,0) = 𝔖(H)·P/|A(H)|, and numerical checks on W(s) = s·ζ(1+s).

mod analytic;

pub use analytic::{
    j_product, j_trend, verify_w_bounds, w_function, w_power_bound_on, JTrend, WScanReport,
    EULER_GAMMA, MAX_J_X, MAX_W_T,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::singular_series::{default_cutoff, singular_series, SingularValue};
use crate::tuple_core::{is_admissible, regular_class_count, small_prime_product, TupleH};

/// A prediction with an absolute radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mid: f64,
    pub rad: f64,
}

impl Estimate {
    pub fn exact(mid: f64) -> Self {
        Estimate { mid, rad: 0.0 }
    }

    fn scaled(v: &SingularValue, factor: f64) -> Self {
        Estimate { mid: v.mid * factor, rad: v.rad * factor.abs() }
    }

    pub fn lo(&self) -> f64 {
        self.mid - self.rad
    }

    pub fn hi(&self) -> f64 {
        self.mid + self.rad
    }
}

/// Where the extra shift h0 sits relative to H1 and H2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftCase {
    NotInH,
    InH1Only,
    InH2Only,
    InBoth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// One regular class modulo P.
    PerClass,
    /// Summed over all of A(H).
    Aggregate,
}

/// Parameters of a main-term prediction. `r = |H1 ∩ H2|` and the shift case
/// are derived, never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MainTermParams {
    pub h1: TupleH,
    pub h2: TupleH,
    pub ell1: usize,
    pub ell2: usize,
    pub big_r: f64,
    pub n: u64,
    pub v: u64,
    pub h0: Option<u64>,
    /// Singular-series cutoff; `None` picks the default for H (or H⁰).
    pub cutoff: Option<u64>,
}

impl MainTermParams {
    pub fn new(h1: TupleH, h2: TupleH, ell1: usize, ell2: usize, big_r: f64, n: u64, v: u64) -> Result<Self> {
        if !(big_r > 1.0) || !big_r.is_finite() {
            return Err(Error::domain("R must be a finite real > 1"));
        }
        if n < 1 {
            return Err(Error::domain("N must be >= 1"));
        }
        small_prime_product(v)?;
        Ok(MainTermParams { h1, h2, ell1, ell2, big_r, n, v, h0: None, cutoff: None })
    }

    pub fn with_h0(mut self, h0: u64) -> Self {
        self.h0 = Some(h0);
        self
    }

    pub fn with_cutoff(mut self, cutoff: u64) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    /// |H1 ∩ H2|.
    pub fn r(&self) -> usize {
        self.h1.intersection(&self.h2).len()
    }

    pub fn union(&self) -> TupleH {
        self.h1.union(&self.h2)
    }

    pub fn case(&self) -> Option<ShiftCase> {
        let h0 = self.h0?;
        Some(match (self.h1.contains(h0), self.h2.contains(h0)) {
            (false, false) => ShiftCase::NotInH,
            (true, false) => ShiftCase::InH1Only,
            (false, true) => ShiftCase::InH2Only,
            (true, true) => ShiftCase::InBoth,
        })
    }

    fn log_r(&self) -> f64 {
        self.big_r.ln()
    }

    fn cutoff_for(&self, h: &TupleH) -> Result<u64> {
        match self.cutoff {
            Some(c) => Ok(c),
            None => default_cutoff(h),
        }
    }
}

fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|i| (i as f64).ln()).sum()
}

/// ln binom(a + b, a).
fn ln_binom(a: usize, b: usize) -> f64 {
    ln_factorial(a + b) - ln_factorial(a) - ln_factorial(b)
}

/// binom(a + b, a) · L^m / m!, for L = log R.
fn shape(a: usize, b: usize, m: usize, log_r: f64) -> f64 {
    (ln_binom(a, b) + m as f64 * log_r.ln() - ln_factorial(m)).exp()
}

/// G(0,0) = 𝔖(H)·P/|A(H)| = Π_{p>V}(1 − ν_p/p)(1 − 1/p)^{−|H|}.
pub fn g00(h: &TupleH, v: u64, cutoff: u64) -> Result<Estimate> {
    if !is_admissible(h) {
        return Err(Error::domain(format!("H = {{{h}}} is not admissible")));
    }
    let p = small_prime_product(v)?;
    let a = regular_class_count(h, v)?;
    let s = singular_series(h, cutoff)?;
    Ok(Estimate::scaled(&s, p as f64 / a as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainTerm {
    pub value: Estimate,
    pub scope: Scope,
    /// K·r̄*·log log N / log R, the stated relative size of the error term
    /// (K = |H|, r̄* = max(√K, K − r)). Reported, not used.
    pub error_scale: f64,
}

fn check_pair(p: &MainTermParams) -> Result<TupleH> {
    for (name, h) in [("H1", &p.h1), ("H2", &p.h2)] {
        if !is_admissible(h) {
            return Err(Error::domain(format!("{name} = {{{h}}} is not admissible")));
        }
    }
    let h = p.union();
    if !is_admissible(&h) {
        return Err(Error::domain(format!("H1 ∪ H2 = {{{h}}} is not admissible")));
    }
    Ok(h)
}

fn error_scale(p: &MainTermParams, k: usize) -> f64 {
    let r_bar = (k as f64).sqrt().max((k - p.r()) as f64);
    let lln = (p.n as f64).ln().max(1.0).ln().max(0.0);
    k as f64 * r_bar * lln / p.log_r()
}

/// Predicted Σ_{N<n≤2N} Λ_R(n;H1,ℓ1)Λ_R(n;H2,ℓ2), either for one regular
/// class or over all of them.
pub fn main_term_t4(p: &MainTermParams, scope: Scope) -> Result<MainTerm> {
    let h = check_pair(p)?;
    let r = p.r();
    let m = r + p.ell1 + p.ell2;
    let base = p.n as f64 * shape(p.ell1, p.ell2, m, p.log_r());
    let cutoff = p.cutoff_for(&h)?;
    let value = match scope {
        Scope::Aggregate => Estimate::scaled(&singular_series(&h, cutoff)?, base),
        Scope::PerClass => {
            let g = g00(&h, p.v, cutoff)?;
            let per = base / small_prime_product(p.v)? as f64;
            Estimate { mid: g.mid * per, rad: g.rad * per }
        }
    };
    Ok(MainTerm { value, scope, error_scale: error_scale(p, h.len()) })
}

/// The case factor C_R for the position of h0.
pub fn c_r(p: &MainTermParams) -> Result<f64> {
    let case = p.case().ok_or_else(|| Error::domain("h0 is required"))?;
    let (l1, l2, r) = (p.ell1 as f64, p.ell2 as f64, p.r() as f64);
    let lr = p.log_r();
    Ok(match case {
        ShiftCase::NotInH => 1.0,
        ShiftCase::InH1Only => (l1 + l2 + 1.0) * lr / ((l1 + 1.0) * (r + l1 + l2 + 1.0)),
        ShiftCase::InH2Only => (l1 + l2 + 1.0) * lr / ((l2 + 1.0) * (r + l1 + l2 + 1.0)),
        ShiftCase::InBoth => {
            (l1 + l2 + 2.0) * (l1 + l2 + 1.0) * lr / ((l1 + 1.0) * (l2 + 1.0) * (r + l1 + l2 + 1.0))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaMainTerm {
    pub value: Estimate,
    pub case: ShiftCase,
    pub c_r: f64,
    /// 𝔖(H ∪ {h0}); zero when H ∪ {h0} is inadmissible.
    pub singular: SingularValue,
    pub error_scale: f64,
}

/// Predicted Σ_{N<n≤2N} Λ_R(n;H1,ℓ1)Λ_R(n;H2,ℓ2)·θ(n + h0), aggregated over
/// all regular classes.
pub fn main_term_t5(p: &MainTermParams) -> Result<ThetaMainTerm> {
    let h0 = p.h0.ok_or_else(|| Error::domain("h0 is required"))?;
    let h = check_pair(p)?;
    let case = p.case().expect("h0 present");
    let c = c_r(p)?;
    let h_ext = h.with_shift(h0);
    let singular = if is_admissible(&h_ext) {
        singular_series(&h_ext, p.cutoff_for(&h_ext)?)?
    } else {
        SingularValue::zero(p.cutoff.unwrap_or(0))
    };
    let m = p.r() + p.ell1 + p.ell2;
    let factor = p.n as f64 * c * shape(p.ell1, p.ell2, m, p.log_r());
    Ok(ThetaMainTerm {
        value: Estimate::scaled(&singular, factor),
        case,
        c_r: c,
        singular,
        error_scale: error_scale(p, h.len()),
    })
}

/// The θ main term rewritten through H1⁰ = H1 ∪ {h0}, H2⁰ = H2 ∪ {h0}:
/// binom(v+u, u)·(log R)^{d+u+v}/(d+u+v)!·N·𝔖(H⁰) with
/// u = |H1| + ℓ1 + 1 − |H1⁰|, v = |H2| + ℓ2 + 1 − |H2⁰|, d = |H1⁰ ∩ H2⁰| − 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Substituted {
    pub u: usize,
    pub v: usize,
    pub d: usize,
    pub value: Estimate,
}

pub fn main_term_t5_substituted(p: &MainTermParams) -> Result<Substituted> {
    let t5 = main_term_t5(p)?;
    let h0 = p.h0.expect("checked by main_term_t5");
    let h1o = p.h1.with_shift(h0);
    let h2o = p.h2.with_shift(h0);
    let u = p.h1.len() + p.ell1 + 1 - h1o.len();
    let v = p.h2.len() + p.ell2 + 1 - h2o.len();
    let d = h1o.intersection(&h2o).len() - 1;
    let factor = p.n as f64 * shape(u, v, d + u + v, p.log_r());
    Ok(Substituted { u, v, d, value: Estimate::scaled(&t5.singular, factor) })
}

/// An empirical value against a prediction with radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub empirical: f64,
    pub predicted: Estimate,
    /// empirical / predicted midpoint; `None` when not comparable.
    pub ratio: Option<f64>,
    pub ratio_lo: Option<f64>,
    pub ratio_hi: Option<f64>,
    /// False when the predicted interval contains 0.
    pub comparable: bool,
}

pub fn compare(empirical: f64, predicted: Estimate) -> Comparison {
    let comparable = predicted.mid != 0.0 && (predicted.lo() > 0.0 || predicted.hi() < 0.0);
    if !comparable {
        return Comparison { empirical, predicted, ratio: None, ratio_lo: None, ratio_hi: None, comparable };
    }
    let a = empirical / predicted.lo();
    let b = empirical / predicted.hi();
    Comparison {
        empirical,
        predicted,
        ratio: Some(empirical / predicted.mid),
        ratio_lo: Some(a.min(b)),
        ratio_hi: Some(a.max(b)),
        comparable,
    }
}

/// Write `param,empirical,predicted_mid,predicted_rad,ratio` rows.
pub fn write_ratio_csv<W: std::io::Write>(mut w: W, rows: &[(String, Comparison)]) -> std::io::Result<()> {
    writeln!(w, "param,empirical,predicted_mid,predicted_rad,ratio")?;
    for (param, c) in rows {
        let ratio = c.ratio.map(|x| format!("{x:e}")).unwrap_or_default();
        writeln!(
            w,
            "{param},{:e},{:e},{:e},{ratio}",
            c.empirical, c.predicted.mid, c.predicted.rad
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const C: u64 = 20_000;

    fn t(v: &[u64]) -> TupleH {
        TupleH::new(v.iter().copied()).unwrap()
    }

    fn params(h1: &[u64], h2: &[u64], l1: usize, l2: usize) -> MainTermParams {
        MainTermParams::new(t(h1), t(h2), l1, l2, 1e7f64.powf(0.2), 10_000_000, 5)
            .unwrap()
            .with_cutoff(C)
    }

    #[test]
    fn g00_small_v() {
        let h = t(&[0, 2]);
        let s = singular_series(&h, C).unwrap();
        let g = g00(&h, 2, C).unwrap();
        assert!((g.mid - 2.0 * s.mid).abs() < 1e-15);
        assert!(g00(&t(&[0, 1]), 2, C).is_err());
    }

    #[test]
    fn g00_times_density_is_singular_series() {
        for v in [2, 3, 5, 7, 11, 13] {
            for h in [t(&[0, 2]), t(&[0, 2, 6]), t(&[0, 4, 6, 10, 12])] {
                let g = g00(&h, v, C).unwrap();
                let s = singular_series(&h, C).unwrap();
                let back = g.mid * regular_class_count(&h, v).unwrap() as f64
                    / small_prime_product(v).unwrap() as f64;
                assert!((back - s.mid).abs() <= s.rad + 1e-15 * s.mid);
            }
        }
    }

    #[test]
    fn diagonal_aggregate() {
        let p = params(&[0, 2, 6], &[0, 2, 6], 0, 0);
        let m = main_term_t4(&p, Scope::Aggregate).unwrap();
        let s = singular_series(&t(&[0, 2, 6]), C).unwrap();
        let lr = p.big_r.ln();
        let expect = 1e7 * lr.powi(3) / 6.0 * s.mid;
        assert!((m.value.mid - expect).abs() < 1e-12 * expect);
        assert_eq!(p.r(), 3);
    }

    #[test]
    fn hand_assembled_pair() {
        let p = params(&[0, 2], &[0, 6], 1, 1);
        let m = main_term_t4(&p, Scope::Aggregate).unwrap();
        let s = singular_series(&t(&[0, 2, 6]), C).unwrap();
        let lr = (1e7f64).ln() * 0.2;
        // r = 1, binom(2,1) = 2, (log R)^3 / 3!
        let expect = 1e7 * 2.0 * lr.powi(3) / 6.0 * s.mid;
        assert!(m.value.mid > 0.0);
        assert!((m.value.mid - expect).abs() < 1e-12 * expect);
        let per = main_term_t4(&p, Scope::PerClass).unwrap();
        let a = regular_class_count(&t(&[0, 2, 6]), 5).unwrap() as f64;
        assert!((per.value.mid * a - m.value.mid).abs() < 1e-12 * m.value.mid);
    }

    #[test]
    fn swapping_ells_is_symmetric() {
        let a = main_term_t4(&params(&[0, 2], &[0, 6], 1, 3), Scope::Aggregate).unwrap();
        let b = main_term_t4(&params(&[0, 2], &[0, 6], 3, 1), Scope::Aggregate).unwrap();
        assert!((a.value.mid - b.value.mid).abs() < 1e-12 * a.value.mid);
    }

    #[test]
    fn doubling_n_doubles_the_aggregate() {
        let p = params(&[0, 2], &[0, 6], 1, 1);
        let mut q = p.clone();
        q.n *= 2;
        let a = main_term_t4(&p, Scope::Aggregate).unwrap().value.mid;
        let b = main_term_t4(&q, Scope::Aggregate).unwrap().value.mid;
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn inadmissible_pairs_rejected() {
        assert!(main_term_t4(&params(&[0, 2], &[0, 4], 0, 0), Scope::Aggregate).is_err());
        assert!(main_term_t5(&params(&[0, 2], &[0, 2], 0, 0)).is_err());
    }

    #[test]
    fn c_r_cases() {
        let lr = 1e7f64.ln() * 0.2;
        let p = params(&[0, 2, 6], &[0, 6, 8], 1, 2);
        assert_eq!(c_r(&p.clone().with_h0(12)).unwrap(), 1.0);
        // r = 2 (shifts 0 and 6)
        let c = c_r(&p.clone().with_h0(2)).unwrap();
        assert!((c - 4.0 * lr / (2.0 * 6.0)).abs() < 1e-14);
        let c = c_r(&p.clone().with_h0(8)).unwrap();
        assert!((c - 4.0 * lr / (3.0 * 6.0)).abs() < 1e-14);
        let c = c_r(&p.clone().with_h0(6)).unwrap();
        assert!((c - 5.0 * 4.0 * lr / (2.0 * 3.0 * 6.0)).abs() < 1e-14);
        assert_eq!(p.clone().with_h0(6).case(), Some(ShiftCase::InBoth));
    }

    #[test]
    fn inadmissible_extension_predicts_zero() {
        let p = params(&[0, 2], &[0, 2], 0, 0).with_h0(4);
        let t5 = main_term_t5(&p).unwrap();
        assert_eq!(t5.value.mid, 0.0);
        assert!(!compare(5.0, t5.value).comparable);
    }

    #[test]
    fn compare_basics() {
        let c = compare(3.0, Estimate::exact(3.0));
        assert_eq!(c.ratio, Some(1.0));
        assert_eq!(c.ratio_lo, c.ratio_hi);
        let c = compare(3.0, Estimate { mid: 1.0, rad: 2.0 });
        assert!(!c.comparable);
        let c = compare(2.0, Estimate { mid: 1.0, rad: 0.5 });
        assert_eq!((c.ratio_lo, c.ratio_hi), (Some(2.0 / 1.5), Some(4.0)));
        let mut buf = Vec::new();
        write_ratio_csv(&mut buf, &[("N=1e6".into(), c)]).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("param,empirical"));
    }

    fn random_tuple() -> impl Strategy<Value = Vec<u64>> {
        proptest::collection::btree_set(0u64..15, 1..4)
            .prop_map(|s| s.into_iter().map(|x| 2 * x).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn substituted_form_agrees(
            h1 in random_tuple(), h2 in random_tuple(),
            l1 in 0usize..4, l2 in 0usize..4, h0 in (0u64..20).prop_map(|x| 2 * x),
        ) {
            let p = MainTermParams::new(t(&h1), t(&h2), l1, l2, 1e3, 1_000_000, 3)
                .unwrap()
                .with_cutoff(2_000)
                .with_h0(h0);
            prop_assume!(is_admissible(&p.union()));
            let a = main_term_t5(&p).unwrap().value.mid;
            let b = main_term_t5_substituted(&p).unwrap().value.mid;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()), "{a} vs {b}");
        }
    }
}
