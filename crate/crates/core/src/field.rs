//! Arithmetic in the prime field F_q.
//!
//! The field is identified with the integers {0, …, q−1} under arithmetic
//! mod q. Only prime moduli are supported; extension fields would need a
//! polynomial basis and are out of scope.

use crate::error::{Error, Result};

/// Deterministic trial-division primality test. The moduli used by the
/// geometry are tiny, so nothing fancier is warranted.
pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    if q % 2 == 0 {
        return q == 2;
    }
    let mut f = 3u32;
    while (f as u64) * (f as u64) <= q as u64 {
        if q % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

/// An element of F_q, stored as its canonical representative in [0, q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    modulus: u32,
}

impl FieldElement {
    /// Creates an element of F_q, reducing `value` mod q.
    ///
    /// Fails if `modulus` is not prime.
    pub fn new(value: u32, modulus: u32) -> Result<Self> {
        if !is_prime(modulus) {
            return Err(Error::NotPrime(modulus));
        }
        Ok(Self {
            value: value % modulus,
            modulus,
        })
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    fn same_field(self, other: Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus, other.modulus));
        }
        Ok(())
    }

    pub fn add(self, other: Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self {
            value: ((self.value as u64 + other.value as u64) % self.modulus as u64) as u32,
            modulus: self.modulus,
        })
    }

    pub fn sub(self, other: Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self {
            value: ((self.value as u64 + (self.modulus - other.value) as u64)
                % self.modulus as u64) as u32,
            modulus: self.modulus,
        })
    }

    pub fn mul(self, other: Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self {
            value: ((self.value as u64 * other.value as u64) % self.modulus as u64) as u32,
            modulus: self.modulus,
        })
    }

    /// Multiplicative inverse via Fermat's little theorem (a^(q−2) mod q).
    pub fn inv(self) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(self.modulus - 2))
    }

    fn pow(self, mut exp: u32) -> Self {
        let q = self.modulus as u64;
        let mut base = self.value as u64;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % q;
            }
            base = base * base % q;
            exp >>= 1;
        }
        Self {
            value: acc as u32,
            modulus: self.modulus,
        }
    }
}
