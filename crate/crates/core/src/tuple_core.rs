//! Shift sets ("tuples") and their residue structure.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::arith::{factorize, is_prime, primorial, small_primes};
use crate::error::{Error, Result};

/// Largest V accepted by [`regular_classes`]; the primorial of 43 is the
/// last one we treat as an exact machine product.
pub const MAX_REGULAR_V: u64 = 43;
/// Above this many members the regular classes are only available through
/// [`RegularClassIter`].
pub const MAX_MATERIALIZED_CLASSES: u64 = 10_000_000;
const NU_CACHE_LIMIT: u64 = 1 << 16;

/// A finite set of distinct non-negative shifts h_1 < … < h_K, K ≥ 1.
///
/// ν_p is cached for every prime `p <= min(span, 2^16)`; for `p > span` all
/// shifts are distinct mod p and ν_p = K.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TupleH {
    shifts: Vec<u64>,
    nu_cache: Vec<(u64, u32)>,
}

impl fmt::Debug for TupleH {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("TupleH").field(&self.shifts).finish()
    }
}

impl fmt::Display for TupleH {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.shifts.iter().map(u64::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl TupleH {
    /// Build from shifts in any order. Duplicates and the empty set are
    /// domain errors.
    pub fn new(shifts: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut v: Vec<u64> = shifts.into_iter().collect();
        let n = v.len();
        v.sort_unstable();
        v.dedup();
        if v.len() != n {
            return Err(Error::domain("tuple shifts must be distinct"));
        }
        Self::from_sorted(v)
    }

    /// Build from shifts, silently merging duplicates.
    pub fn from_set(shifts: impl IntoIterator<Item = u64>) -> Result<Self> {
        let v: BTreeSet<u64> = shifts.into_iter().collect();
        Self::from_sorted(v.into_iter().collect())
    }

    fn from_sorted(shifts: Vec<u64>) -> Result<Self> {
        if shifts.is_empty() {
            return Err(Error::domain("tuple must contain at least one shift"));
        }
        let span = shifts[shifts.len() - 1] - shifts[0];
        let limit = span.min(NU_CACHE_LIMIT);
        let nu_cache = small_primes(limit)
            .into_iter()
            .map(|p| (p, count_classes(&shifts, p) as u32))
            .collect();
        Ok(TupleH { shifts, nu_cache })
    }

    pub fn shifts(&self) -> &[u64] {
        &self.shifts
    }

    /// K = |H|.
    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> u64 {
        self.shifts[0]
    }

    pub fn max(&self) -> u64 {
        self.shifts[self.shifts.len() - 1]
    }

    /// max − min; every prime above it sees all K shifts in distinct classes.
    pub fn span(&self) -> u64 {
        self.max() - self.min()
    }

    pub fn contains(&self, h: u64) -> bool {
        self.shifts.binary_search(&h).is_ok()
    }

    pub fn union(&self, other: &TupleH) -> TupleH {
        TupleH::from_set(self.shifts.iter().chain(other.shifts.iter()).copied())
            .expect("union of non-empty sets")
    }

    pub fn intersection(&self, other: &TupleH) -> Vec<u64> {
        self.shifts
            .iter()
            .copied()
            .filter(|&h| other.contains(h))
            .collect()
    }

    /// H ∪ {h0}.
    pub fn with_shift(&self, h0: u64) -> TupleH {
        TupleH::from_set(self.shifts.iter().copied().chain([h0])).expect("non-empty")
    }

    /// H + t.
    pub fn translate(&self, t: u64) -> Result<TupleH> {
        let v: Option<Vec<u64>> = self.shifts.iter().map(|h| h.checked_add(t)).collect();
        let v = v.ok_or_else(|| Error::capacity("translated shift overflows u64"))?;
        TupleH::from_sorted(v)
    }

    /// ν_p for a prime `p`, without checking primality.
    pub(crate) fn nu(&self, p: u64) -> u64 {
        if p > self.span() {
            return self.len() as u64;
        }
        if p <= NU_CACHE_LIMIT {
            if let Ok(i) = self.nu_cache.binary_search_by_key(&p, |&(q, _)| q) {
                return self.nu_cache[i].1 as u64;
            }
        }
        count_classes(&self.shifts, p)
    }

    /// The residue set H(p) with representatives in `[1, p]`.
    pub fn residues(&self, p: u64) -> Vec<u64> {
        let s: BTreeSet<u64> = self
            .shifts
            .iter()
            .map(|h| match h % p {
                0 => p,
                r => r,
            })
            .collect();
        s.into_iter().collect()
    }

    /// ν_d for squarefree `d`, assembled from the cached ν_p.
    pub fn nu_d(&self, d: u64) -> Result<u64> {
        let f = factorize(d);
        if d == 0 || f.iter().any(|&(_, e)| e > 1) {
            return Err(Error::domain(format!("d={d} is not squarefree")));
        }
        Ok(f.iter().map(|&(p, _)| self.nu(p)).product())
    }
}

fn count_classes(shifts: &[u64], p: u64) -> u64 {
    if (p as usize) <= 4096 {
        let mut seen = [0u64; 64];
        let mut n = 0;
        for h in shifts {
            let r = (h % p) as usize;
            let (w, b) = (r / 64, r % 64);
            if seen[w] & (1 << b) == 0 {
                seen[w] |= 1 << b;
                n += 1;
            }
        }
        n
    } else {
        let s: BTreeSet<u64> = shifts.iter().map(|h| h % p).collect();
        s.len() as u64
    }
}

fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::domain(format!("{p} is not prime")))
    }
}

/// ν_p(H): the number of residue classes mod `p` occupied by H.
pub fn nu_p(h: &TupleH, p: u64) -> Result<u64> {
    require_prime(p)?;
    Ok(h.nu(p))
}

/// H is admissible iff ν_p(H) < p for every prime p; only p ≤ |H| can fail.
pub fn is_admissible(h: &TupleH) -> bool {
    small_primes(h.len() as u64)
        .into_iter()
        .all(|p| h.nu(p) < p)
}

/// Δ = |Π_{i<j} (h_i − h_j)|, with Δ = 1 for |H| < 2.
pub fn discriminant(h: &TupleH) -> BigUint {
    let s = h.shifts();
    let mut acc = BigUint::one();
    for j in 1..s.len() {
        for i in 0..j {
            acc *= BigUint::from(s[j] - s[i]);
        }
    }
    acc
}

/// ν̄_p(H1, H2) = |H1(p) ∩ H2(p)|.
pub fn nu_bar_p(h1: &TupleH, h2: &TupleH, p: u64) -> Result<u64> {
    require_prime(p)?;
    Ok(nu_bar(h1, h2, p))
}

pub(crate) fn nu_bar(h1: &TupleH, h2: &TupleH, p: u64) -> u64 {
    let a: BTreeSet<u64> = h1.shifts().iter().map(|x| x % p).collect();
    h2.shifts()
        .iter()
        .map(|x| x % p)
        .collect::<BTreeSet<u64>>()
        .intersection(&a)
        .count() as u64
}

/// ν*_p(G) = ν_p(G ∪ {h0}) − 1.
pub fn nu_star_p(g: &TupleH, h0: u64, p: u64) -> Result<u64> {
    require_prime(p)?;
    let hit = g.shifts().iter().any(|h| h % p == h0 % p);
    Ok(if hit { g.nu(p) - 1 } else { g.nu(p) })
}

/// A set of residues modulo `modulus`, with representatives in
/// `[1, modulus]`, sorted and distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueSet {
    modulus: u64,
    members: Vec<u64>,
}

impl ResidueSet {
    pub fn new(modulus: u64, mut members: Vec<u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::domain("modulus must be >= 1"));
        }
        members.sort_unstable();
        let n = members.len();
        members.dedup();
        if members.len() != n || members.iter().any(|&m| m == 0 || m > modulus) {
            return Err(Error::domain("residues must be distinct and lie in [1, modulus]"));
        }
        Ok(ResidueSet { modulus, members })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Whether the class of `n` belongs to the set.
    pub fn contains_class(&self, n: u64) -> bool {
        let r = match n % self.modulus {
            0 => self.modulus,
            r => r,
        };
        self.members.binary_search(&r).is_ok()
    }

    pub fn intersect(&self, other: &ResidueSet) -> Result<ResidueSet> {
        if self.modulus != other.modulus {
            return Err(Error::domain("moduli differ"));
        }
        let members = self
            .members
            .iter()
            .copied()
            .filter(|&m| other.members.binary_search(&m).is_ok())
            .collect();
        Ok(ResidueSet { modulus: self.modulus, members })
    }
}

/// P = Π_{p ≤ V} p, with the documented ceiling V ≤ 43.
pub fn small_prime_product(v: u64) -> Result<u64> {
    if v < 2 {
        return Err(Error::domain("V must be >= 2"));
    }
    if v > MAX_REGULAR_V {
        return Err(Error::capacity(format!(
            "V={v} exceeds the exact-product ceiling V <= {MAX_REGULAR_V}"
        )));
    }
    primorial(v).ok_or_else(|| Error::capacity("primorial overflow"))
}

/// |A(H)| = Π_{p ≤ V} (p − ν_p(H)).
pub fn regular_class_count(h: &TupleH, v: u64) -> Result<u64> {
    small_prime_product(v)?;
    Ok(small_primes(v).into_iter().map(|p| p - h.nu(p)).product())
}

/// Lazy CRT enumeration of A(H) (unsorted, representatives in `[1, P]`).
pub struct RegularClassIter {
    modulus: u64,
    basis: Vec<u128>,
    allowed: Vec<Vec<u64>>,
    idx: Vec<usize>,
    done: bool,
}

impl RegularClassIter {
    pub fn new(h: &TupleH, v: u64) -> Result<Self> {
        let modulus = small_prime_product(v)?;
        let primes = small_primes(v);
        let allowed: Vec<Vec<u64>> = primes
            .iter()
            .map(|&p| {
                let blocked: BTreeSet<u64> = h.shifts().iter().map(|x| (p - x % p) % p).collect();
                (0..p).filter(|r| !blocked.contains(r)).collect()
            })
            .collect();
        let basis = primes
            .iter()
            .map(|&p| {
                let m = modulus / p;
                let inv = crate::arith::mod_inverse(m % p, p).expect("coprime");
                m as u128 * inv as u128
            })
            .collect();
        let done = allowed.iter().any(Vec::is_empty);
        Ok(RegularClassIter {
            modulus,
            basis,
            idx: vec![0; allowed.len()],
            allowed,
            done,
        })
    }
}

impl Iterator for RegularClassIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done {
            return None;
        }
        let m = self.modulus as u128;
        let mut x: u128 = 0;
        for (i, &j) in self.idx.iter().enumerate() {
            x = (x + self.allowed[i][j] as u128 * self.basis[i]) % m;
        }
        // odometer
        let mut k = 0;
        loop {
            if k == self.idx.len() {
                self.done = true;
                break;
            }
            self.idx[k] += 1;
            if self.idx[k] < self.allowed[k].len() {
                break;
            }
            self.idx[k] = 0;
            k += 1;
        }
        Some(if x == 0 { self.modulus } else { x as u64 })
    }
}

/// A(H) = {a ∈ [1, P] : gcd(P, P_H(a)) = 1} for P = Π_{p ≤ V} p.
pub fn regular_classes(h: &TupleH, v: u64) -> Result<ResidueSet> {
    let count = regular_class_count(h, v)?;
    if count > MAX_MATERIALIZED_CLASSES {
        return Err(Error::capacity(format!(
            "{count} regular classes; use RegularClassIter above {MAX_MATERIALIZED_CLASSES}"
        )));
    }
    let modulus = small_prime_product(v)?;
    let mut members: Vec<u64> = RegularClassIter::new(h, v)?.collect();
    members.sort_unstable();
    Ok(ResidueSet { modulus, members })
}

/// Parse the tuple file format: one tuple per line, comma-separated
/// non-negative integers, `#` starts a comment.
pub fn parse_tuple_file(text: &str) -> Result<Vec<TupleH>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut vals = Vec::new();
        for tok in line.split(',') {
            let tok = tok.trim();
            let v: u64 = tok.parse().map_err(|_| {
                Error::domain(format!("line {}: invalid shift {tok:?}", lineno + 1))
            })?;
            vals.push(v);
        }
        let t = TupleH::new(vals)
            .map_err(|e| Error::domain(format!("line {}: {e}", lineno + 1)))?;
        out.push(t);
    }
    Ok(out)
}

pub fn format_tuple_file(tuples: &[TupleH]) -> String {
    let mut s = String::new();
    for t in tuples {
        s.push_str(&t.to_string());
        s.push('\n');
    }
    s
}
