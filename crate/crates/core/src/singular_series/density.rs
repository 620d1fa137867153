//! Density of z-quasi-prime tuples.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::arith::small_primes;
use crate::error::{Error, Result};
use crate::tuple_core::TupleH;

pub const MAX_DENSITY_Z: u64 = 100;

/// R(H) = Π_{p ≤ z} (1 − ν_p(H)/p), exactly.
pub fn quasiprime_density(h: &TupleH, z: u64) -> Result<BigRational> {
    if z < 2 {
        return Err(Error::domain("z must be >= 2"));
    }
    if z > MAX_DENSITY_Z {
        return Err(Error::capacity(format!("z = {z} exceeds {MAX_DENSITY_Z}")));
    }
    let mut r = BigRational::one();
    for p in small_primes(z) {
        let nu = h.nu(p);
        r *= BigRational::new(BigInt::from(p - nu), BigInt::from(p));
    }
    Ok(r)
}
