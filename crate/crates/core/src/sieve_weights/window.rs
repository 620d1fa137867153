//! Prime-divisor lists for P_H(n) over a window of consecutive n.

/// For each n in `[lo, hi]`, the primes `p <= R` dividing some `n + s_i`,
/// in increasing order, each tagged with the bitmask of shift indices `i`
/// for which `p | n + s_i`.
pub(crate) struct Window {
    lo: u64,
    offsets: Vec<u32>,
    primes: Vec<u64>,
    masks: Vec<u64>,
}

impl Window {
    pub(crate) fn build(lo: u64, hi: u64, shifts: &[u64], sieve_primes: &[u64]) -> Window {
        debug_assert!(shifts.len() <= 64);
        let len = (hi - lo + 1) as usize;
        let mut groups: Vec<(u64, u64)> = Vec::with_capacity(shifts.len());
        let mut counts = vec![0u32; len + 1];
        let mut plan: Vec<(u64, u64, u64)> = Vec::new();
        for &p in sieve_primes {
            groups.clear();
            for (i, &s) in shifts.iter().enumerate() {
                let r = (p - s % p) % p;
                match groups.iter_mut().find(|g| g.0 == r) {
                    Some(g) => g.1 |= 1 << i,
                    None => groups.push((r, 1 << i)),
                }
            }
            for &(r, mask) in &groups {
                let first = lo + (r + p - lo % p) % p;
                if first <= hi {
                    plan.push((p, first, mask));
                }
            }
        }
        // Primes appear in increasing order in `plan`, so filling in plan
        // order keeps every per-n list sorted.
        for &(p, first, _) in &plan {
            let mut n = first;
            while n <= hi {
                counts[(n - lo) as usize + 1] += 1;
                n += p;
            }
        }
        for i in 0..len {
            counts[i + 1] += counts[i];
        }
        let total = counts[len] as usize;
        let mut fill = counts.clone();
        let mut primes = vec![0u64; total];
        let mut masks = vec![0u64; total];
        for &(p, first, mask) in &plan {
            let mut n = first;
            while n <= hi {
                let slot = &mut fill[(n - lo) as usize];
                primes[*slot as usize] = p;
                masks[*slot as usize] = mask;
                *slot += 1;
                n += p;
            }
        }
        Window { lo, offsets: counts, primes, masks }
    }

    /// Primes dividing Π_{i in `select`} (n + s_i), ascending.
    pub(crate) fn primes_for(&self, n: u64, select: u64, out: &mut Vec<u64>) {
        out.clear();
        let i = (n - self.lo) as usize;
        let (a, b) = (self.offsets[i] as usize, self.offsets[i + 1] as usize);
        for k in a..b {
            if self.masks[k] & select != 0 {
                out.push(self.primes[k]);
            }
        }
    }
}
