//! The coefficient field F_q, q = p^e.
//!
//! An element is a vector of e entries in [0, p), the coefficients of its
//! representative modulo the defining polynomial, lowest degree first.
//! For e = 1 the modulus is the placeholder u and never consulted.

use serde::{Deserialize, Serialize};

use super::{poly, FfError, Poly};

pub type FqElt = Vec<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FqCtx {
    pub p: u64,
    pub e: usize,
    /// Monic irreducible over F_p of degree e, lowest degree first, length e + 1.
    pub modulus: Vec<u64>,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FqCtx {
    pub fn prime(p: u64) -> Result<FqCtx, FfError> {
        if !is_prime(p) {
            return Err(FfError::NotPrime(p));
        }
        if p >= 1 << 31 {
            return Err(FfError::CapacityExceeded(format!("characteristic {p} too large")));
        }
        Ok(FqCtx { p, e: 1, modulus: vec![0, 1] })
    }

    /// F_{p^e} with the lexicographically first monic irreducible modulus.
    pub fn prime_power(p: u64, e: usize) -> Result<FqCtx, FfError> {
        let base = FqCtx::prime(p)?;
        if e == 0 {
            return Err(FfError::CapacityExceeded("extension degree 0".into()));
        }
        if e == 1 {
            return Ok(base);
        }
        base.q_checked_for(e)?;
        let m = poly::find_irreducible(&base, e);
        let modulus: Vec<u64> = m.c.iter().map(|c| c[0]).collect();
        Ok(FqCtx { p, e, modulus })
    }

    /// F_q for q = p^e given only q; rejects anything that is not a
    /// prime power.
    pub fn of_order(q: u64) -> Result<FqCtx, FfError> {
        if q < 2 {
            return Err(FfError::NotPrime(q));
        }
        let mut p = q;
        for cand in 2..=q {
            if cand * cand > q {
                break;
            }
            if q % cand == 0 {
                p = cand;
                break;
            }
        }
        let mut e = 0usize;
        let mut rest = q;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        if rest != 1 {
            return Err(FfError::NotPrime(q));
        }
        FqCtx::prime_power(p, e)
    }

    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<FqCtx, FfError> {
        let base = FqCtx::prime(p)?;
        let e = modulus.len().saturating_sub(1);
        if e == 0 || modulus[e] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(FfError::NotMonic(format!("{modulus:?}")));
        }
        let lifted = Poly { c: modulus.iter().map(|&c| vec![c]).collect() };
        if e > 1 && !poly::is_irreducible(&base, &lifted) {
            return Err(FfError::NotIrreducible { q: p, poly: format!("{modulus:?}") });
        }
        Ok(FqCtx { p, e, modulus })
    }

    pub fn q(&self) -> u64 {
        let mut q: u64 = 1;
        for _ in 0..self.e {
            q *= self.p;
        }
        q
    }

    fn q_checked_for(&self, e: usize) -> Result<u64, FfError> {
        let mut q: u64 = 1;
        for _ in 0..e {
            q = q
                .checked_mul(self.p)
                .filter(|&v| v <= 1 << 32)
                .ok_or_else(|| FfError::CapacityExceeded(format!("field size {}^{} too large", self.p, e)))?;
        }
        Ok(q)
    }

    pub fn zero(&self) -> FqElt {
        vec![0; self.e]
    }

    pub fn one(&self) -> FqElt {
        let mut v = vec![0; self.e];
        v[0] = 1;
        v
    }

    pub fn is_zero(&self, a: &FqElt) -> bool {
        a.iter().all(|&c| c == 0)
    }

    /// Mixed-radix index in [0, q); the canonical enumeration order.
    pub fn index(&self, a: &FqElt) -> u64 {
        let mut k = 0u64;
        for &c in a.iter().rev() {
            k = k * self.p + c;
        }
        k
    }

    pub fn from_index(&self, mut k: u64) -> FqElt {
        let mut v = vec![0; self.e];
        for d in v.iter_mut() {
            *d = k % self.p;
            k /= self.p;
        }
        v
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElt> + '_ {
        (0..self.q()).map(|k| self.from_index(k))
    }

    pub fn add(&self, a: &FqElt, b: &FqElt) -> FqElt {
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.p).collect()
    }

    pub fn sub(&self, a: &FqElt, b: &FqElt) -> FqElt {
        a.iter().zip(b).map(|(&x, &y)| (x + self.p - y) % self.p).collect()
    }

    pub fn neg(&self, a: &FqElt) -> FqElt {
        a.iter().map(|&x| (self.p - x) % self.p).collect()
    }

    pub fn mul(&self, a: &FqElt, b: &FqElt) -> FqElt {
        if self.e == 1 {
            return vec![(a[0] as u128 * b[0] as u128 % self.p as u128) as u64];
        }
        let mut conv = vec![0u128; 2 * self.e - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                conv[i + j] += x as u128 * y as u128;
            }
        }
        let p = self.p as u128;
        for c in conv.iter_mut() {
            *c %= p;
        }
        // Reduce by the monic modulus: u^e = -(lower part).
        for k in (self.e..conv.len()).rev() {
            let top = conv[k];
            if top == 0 {
                continue;
            }
            conv[k] = 0;
            for i in 0..self.e {
                let m = self.modulus[i] as u128;
                if m != 0 {
                    let idx = k - self.e + i;
                    conv[idx] = (conv[idx] + p - top * m % p) % p;
                }
            }
        }
        conv[..self.e].iter().map(|&c| c as u64).collect()
    }

    pub fn mul_scalar(&self, a: &FqElt, s: u64) -> FqElt {
        a.iter().map(|&x| (x as u128 * s as u128 % self.p as u128) as u64).collect()
    }

    pub fn pow(&self, a: &FqElt, mut k: u64) -> FqElt {
        let mut base = a.clone();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// Inverse via x^(q-2); None for zero.
    pub fn inv(&self, a: &FqElt) -> Option<FqElt> {
        if self.is_zero(a) {
            return None;
        }
        Some(self.pow(a, self.q() - 2))
    }

    /// The absolute Frobenius x -> x^p.
    pub fn frob(&self, a: &FqElt) -> FqElt {
        self.pow(a, self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_multiplication_table() {
        let f4 = FqCtx::prime_power(2, 2).unwrap();
        assert_eq!(f4.modulus, vec![1, 1, 1]);
        let u = f4.from_index(2);
        let u1 = f4.from_index(3);
        assert_eq!(f4.mul(&u, &u), u1);
        assert_eq!(f4.mul(&u, &u1), f4.one());
        assert_eq!(f4.mul(&u1, &u1), u);
        for a in f4.elements() {
            if !f4.is_zero(&a) {
                assert_eq!(f4.pow(&a, 3), f4.one());
                assert_eq!(f4.mul(&a, &f4.inv(&a).unwrap()), f4.one());
            }
        }
    }

    #[test]
    fn frobenius_fixes_exactly_the_prime_field() {
        let f9 = FqCtx::prime_power(3, 2).unwrap();
        let fixed = f9.elements().filter(|a| f9.frob(a) == *a).count();
        assert_eq!(fixed, 3);
    }

    #[test]
    fn index_roundtrip() {
        let f8 = FqCtx::prime_power(2, 3).unwrap();
        for k in 0..8 {
            assert_eq!(f8.index(&f8.from_index(k)), k);
        }
    }

    #[test]
    fn field_arithmetic_laws_hold() {
        let f9 = FqCtx::prime_power(3, 2).unwrap();
        let elts: Vec<FqElt> = f9.elements().collect();
        for a in &elts {
            for b in &elts {
                assert_eq!(f9.mul(a, b), f9.mul(b, a));
                assert_eq!(f9.add(&f9.sub(a, b), b), *a);
                for c in &elts {
                    let lhs = f9.mul(a, &f9.add(b, c));
                    let rhs = f9.add(&f9.mul(a, b), &f9.mul(a, c));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(FqCtx::prime(6).unwrap_err(), FfError::NotPrime(6));
        assert!(matches!(
            FqCtx::with_modulus(2, vec![1, 0, 1]),
            Err(FfError::NotIrreducible { .. })
        ));
        assert!(matches!(FqCtx::with_modulus(2, vec![1, 1, 0]), Err(FfError::NotMonic(_))));
    }
}
