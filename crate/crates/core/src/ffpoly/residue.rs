//! The local rings A/p^n. Elements are canonical representatives of degree
//! < n*delta; the valuation and digit decomposition are with respect to the
//! uniformizer p itself.

use serde::{Deserialize, Serialize};

use super::poly::Poly;
use super::prime::PrimeInfo;
use super::FfError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResCtx {
    pub prime: PrimeInfo,
    pub n: u32,
    /// p^n
    pub modulus: Poly,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResElt(pub Poly);

impl ResCtx {
    pub fn new(prime: &PrimeInfo, n: u32) -> Result<ResCtx, FfError> {
        if n == 0 {
            return Err(FfError::CapacityExceeded("residue ring needs level n >= 1".into()));
        }
        let mut size: u64 = 1;
        let mut modulus = Poly::one(&prime.fq);
        for _ in 0..n {
            size = size
                .checked_mul(prime.q_wp)
                .filter(|&v| v <= 1 << 40)
                .ok_or_else(|| FfError::CapacityExceeded(format!("ring of size q_p^{n}")))?;
            modulus = modulus.mul(&prime.fq, &prime.p);
        }
        Ok(ResCtx { prime: prime.clone(), n, modulus })
    }

    pub fn size(&self) -> u64 {
        self.prime.q_wp.pow(self.n)
    }

    pub fn unit_count(&self) -> u64 {
        self.prime.q_wp.pow(self.n - 1) * (self.prime.q_wp - 1)
    }

    pub fn reduce(&self, f: &Poly) -> ResElt {
        ResElt(f.rem(&self.prime.fq, &self.modulus))
    }

    pub fn zero(&self) -> ResElt {
        ResElt(Poly::zero())
    }

    pub fn one(&self) -> ResElt {
        self.reduce(&Poly::one(&self.prime.fq))
    }

    pub fn is_zero(&self, a: &ResElt) -> bool {
        a.0.is_zero()
    }

    pub fn add(&self, a: &ResElt, b: &ResElt) -> ResElt {
        ResElt(a.0.add(&self.prime.fq, &b.0))
    }

    pub fn sub(&self, a: &ResElt, b: &ResElt) -> ResElt {
        ResElt(a.0.sub(&self.prime.fq, &b.0))
    }

    pub fn neg(&self, a: &ResElt) -> ResElt {
        ResElt(a.0.neg(&self.prime.fq))
    }

    pub fn mul(&self, a: &ResElt, b: &ResElt) -> ResElt {
        self.reduce(&a.0.mul(&self.prime.fq, &b.0))
    }

    pub fn pow(&self, a: &ResElt, mut k: u64) -> ResElt {
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

    /// p-adic valuation of a nonzero class, in 0..n. None for zero.
    pub fn val(&self, a: &ResElt) -> Option<u32> {
        if a.0.is_zero() {
            return None;
        }
        let mut rep = a.0.clone();
        let mut v = 0;
        loop {
            let (q, r) = rep.divrem(&self.prime.fq, &self.prime.p);
            if !r.is_zero() {
                return Some(v);
            }
            v += 1;
            rep = q;
        }
    }

    pub fn is_unit(&self, a: &ResElt) -> bool {
        self.val(a) == Some(0)
    }

    pub fn inv(&self, a: &ResElt) -> Result<ResElt, FfError> {
        let (g, s, _) = Poly::exgcd(&self.prime.fq, &a.0, &self.modulus);
        if g.deg() != Some(0) {
            return Err(FfError::NonUnitInverse { val: self.val(a) });
        }
        Ok(self.reduce(&s))
    }

    /// The class of p^k (zero once k >= n).
    pub fn pi_pow(&self, k: u32) -> ResElt {
        if k >= self.n {
            return self.zero();
        }
        let mut f = Poly::one(&self.prime.fq);
        for _ in 0..k {
            f = f.mul(&self.prime.fq, &self.prime.p);
        }
        ResElt(f)
    }

    /// Digits c_0..c_{n-1} with a = sum c_i p^i, each deg c_i < delta.
    pub fn digits(&self, a: &ResElt) -> Vec<Poly> {
        let mut rep = a.0.clone();
        let mut out = Vec::with_capacity(self.n as usize);
        for _ in 0..self.n {
            let (q, r) = rep.divrem(&self.prime.fq, &self.prime.p);
            out.push(r);
            rep = q;
        }
        debug_assert!(rep.is_zero());
        out
    }

    pub fn from_digits(&self, digits: &[Poly]) -> ResElt {
        let fq = &self.prime.fq;
        let mut acc = Poly::zero();
        let mut pk = Poly::one(fq);
        for d in digits.iter().take(self.n as usize) {
            acc = acc.add(fq, &d.mul(fq, &pk));
            pk = pk.mul(fq, &self.prime.p);
        }
        self.reduce(&acc)
    }

    /// Mixed-radix index over the n*delta coefficient slots; the canonical
    /// enumeration order.
    pub fn index(&self, a: &ResElt) -> u64 {
        let fq = &self.prime.fq;
        let q = fq.q();
        let slots = self.n as usize * self.prime.delta;
        let mut k = 0u64;
        for i in (0..slots).rev() {
            k = k * q + fq.index(&a.0.coeff(fq, i));
        }
        k
    }

    pub fn from_index(&self, mut k: u64) -> ResElt {
        let fq = &self.prime.fq;
        let q = fq.q();
        let slots = self.n as usize * self.prime.delta;
        let mut c = Vec::with_capacity(slots);
        for _ in 0..slots {
            c.push(fq.from_index(k % q));
            k /= q;
        }
        let mut p = Poly { c };
        while p.c.last().map_or(false, |x| fq.is_zero(x)) {
            p.c.pop();
        }
        ResElt(p)
    }

    pub fn elements(&self) -> impl Iterator<Item = ResElt> + '_ {
        let n = self.size();
        assert!(n <= 1 << 26, "enumeration of ring with {n} elements is too large");
        (0..n).map(|k| self.from_index(k))
    }

    /// Reduce into a lower-precision ring over the same prime.
    pub fn reduce_precision(&self, target: &ResCtx, a: &ResElt) -> ResElt {
        debug_assert_eq!(self.prime.p, target.prime.p);
        debug_assert!(target.n <= self.n);
        target.reduce(&a.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::prime::prime_data;
    use super::super::FqCtx;

    fn ring(pq: u64, p_idx: &[u64], n: u32) -> ResCtx {
        let fq = FqCtx::prime(pq).unwrap();
        let p = Poly::from_indices(&fq, p_idx);
        ResCtx::new(&prime_data(&fq, &p).unwrap(), n).unwrap()
    }

    #[test]
    fn sizes_units_and_valuations() {
        // A/(t)^2 over F_2
        let r = ring(2, &[0, 1], 2);
        assert_eq!(r.size(), 4);
        assert_eq!(r.unit_count(), 2);
        let fq = &r.prime.fq;
        let t = r.reduce(&Poly::t(fq));
        let t1 = r.reduce(&Poly::from_indices(fq, &[1, 1]));
        assert_eq!(r.val(&t), Some(1));
        assert_eq!(r.val(&t1), Some(0));
        assert_eq!(r.val(&r.zero()), None);
        assert_eq!(r.inv(&t1).unwrap(), t1);
        assert!(matches!(r.inv(&t), Err(FfError::NonUnitInverse { val: Some(1) })));
        assert!(matches!(r.inv(&r.zero()), Err(FfError::NonUnitInverse { val: None })));
        assert_eq!(r.mul(&t, &t), r.zero());
    }

    #[test]
    fn quadratic_prime_at_level_two() {
        let r = ring(2, &[1, 1, 1], 2);
        assert_eq!(r.size(), 16);
        assert_eq!(r.unit_count(), 12);
        let units = r.elements().filter(|a| r.is_unit(a)).count();
        assert_eq!(units as u64, r.unit_count());
        let pi = r.pi_pow(1);
        assert_eq!(r.val(&pi), Some(1));
        assert_eq!(r.pi_pow(2), r.zero());
        for a in r.elements() {
            // Canonical representatives stay below degree n*delta.
            assert!(a.0.deg().map_or(true, |d| d < 4));
            if r.is_unit(&a) {
                assert_eq!(r.mul(&a, &r.inv(&a).unwrap()), r.one());
            }
            assert_eq!(r.from_index(r.index(&a)), a);
            assert_eq!(r.from_digits(&r.digits(&a)), a);
        }
    }

    #[test]
    fn valuation_is_additive_within_range() {
        let r = ring(3, &[1, 1], 3);
        for a in r.elements() {
            for b in [r.pi_pow(1), r.reduce(&Poly::from_indices(&r.prime.fq, &[2, 1, 1]))] {
                let prod = r.mul(&a, &b);
                match (r.val(&a), r.val(&b)) {
                    (Some(va), Some(vb)) if va + vb < 3 => {
                        assert_eq!(r.val(&prod), Some(va + vb));
                    }
                    _ => assert!(r.is_zero(&prod)),
                }
            }
        }
    }

    #[test]
    fn digit_expansion_matches_definition() {
        let r = ring(2, &[1, 1, 1], 3);
        let fq = &r.prime.fq;
        let a = r.reduce(&Poly::from_indices(fq, &[1, 0, 1, 1, 0, 1]));
        let digits = r.digits(&a);
        assert_eq!(digits.len(), 3);
        for d in &digits {
            assert!(d.deg().map_or(true, |k| k < 2));
        }
        assert_eq!(r.from_digits(&digits), a);
        let v = r.val(&a);
        let first_nonzero = digits.iter().position(|d| !d.is_zero()).map(|k| k as u32);
        assert_eq!(v, first_nonzero);
    }
}
