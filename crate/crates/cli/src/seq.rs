//! Test sets 𝒜 ∩ [1, N] for the sequence families the method applies to.

use std::collections::BTreeSet;

use gpy_core::{Error, Result};
use serde::Serialize;

use crate::args::SeqKind;

/// Generated elements must not exceed this many.
pub const MAX_ELEMENTS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sequence {
    pub kind: SeqKind,
    pub bound: u64,
    pub elements: Vec<u64>,
    pub count: usize,
    /// C·√(log N)·(log log N)².
    pub threshold: f64,
    pub meets_threshold: bool,
}

fn powers_of(k: u64, exponents: impl IntoIterator<Item = u64>, n: u64) -> Vec<u64> {
    let set: BTreeSet<u64> = exponents
        .into_iter()
        .filter_map(|r| k.checked_pow(u32::try_from(r).ok()?))
        .filter(|&v| v >= 1 && v <= n)
        .collect();
    set.into_iter().collect()
}

/// Largest m with k^m ≤ n.
fn max_exponent(k: u64, n: u64) -> u64 {
    let mut m = 0;
    let mut v = 1u64;
    while let Some(next) = v.checked_mul(k) {
        if next > n {
            break;
        }
        v = next;
        m += 1;
    }
    m
}

pub fn threshold(c: f64, n: u64) -> f64 {
    let l = (n as f64).ln().max(0.0);
    let ll = l.ln().max(0.0);
    c * l.sqrt() * ll * ll
}

pub fn generate_sequence(
    kind: SeqKind,
    h: Option<u64>,
    k: Option<u64>,
    n: Option<u64>,
    exponents: &[u64],
    c: f64,
) -> Result<Sequence> {
    let need = |v: Option<u64>, name: &str| v.ok_or_else(|| Error::Domain(format!("--{name} is required for this kind")));
    let base = || -> Result<u64> {
        let k = need(k, "k")?;
        if k < 2 {
            return Err(Error::Domain("k must be >= 2".into()));
        }
        Ok(k)
    };
    let (bound, elements) = match kind {
        SeqKind::Interval => {
            let h = need(h, "h")?;
            if h as usize > MAX_ELEMENTS {
                return Err(Error::Capacity(format!("h must be <= {MAX_ELEMENTS}")));
            }
            (n.unwrap_or(h), (1..=h).collect())
        }
        SeqKind::PowersK => {
            let (k, n) = (base()?, need(n, "n")?);
            (n, powers_of(k, 1..=max_exponent(k, n), n))
        }
        SeqKind::PowersKSumTwoSquares => {
            let (k, n) = (base()?, need(n, "n")?);
            let top = max_exponent(k, n);
            let mut rs = Vec::new();
            let mut x = 1;
            while x * x < top {
                let mut y = 1;
                while x * x + y * y <= top {
                    rs.push(x * x + y * y);
                    y += 1;
                }
                x += 1;
            }
            (n, powers_of(k, rs, n))
        }
        SeqKind::CustomExponents => {
            let (k, n) = (base()?, need(n, "n")?);
            if exponents.is_empty() {
                return Err(Error::Domain("--exponents is required for custom_exponents".into()));
            }
            (n, powers_of(k, exponents.iter().copied(), n))
        }
    };
    let t = threshold(c, bound);
    Ok(Sequence {
        kind,
        bound,
        count: elements.len(),
        meets_threshold: elements.len() as f64 > t,
        elements,
        threshold: t,
    })
}
