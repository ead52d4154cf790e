//! Finite extensions of F_q presented as F_q[x]/(h), h monic irreducible.
//!
//! Elements are `Poly` values of degree < m. The residue field of a prime p
//! of A is the special case modulus = p, so residue-class representatives
//! and field elements coincide there.

use serde::{Deserialize, Serialize};

use super::linalg::solve_first_dependency;
use super::poly::{self, Poly};
use super::{FfError, FqCtx, FqElt};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldCtx {
    pub base: FqCtx,
    pub m: usize,
    pub modulus: Poly,
}

impl FieldCtx {
    /// Degree-m extension with the first monic irreducible modulus.
    pub fn new(base: &FqCtx, m: usize) -> FieldCtx {
        assert!(m >= 1);
        let modulus = poly::find_irreducible(base, m);
        FieldCtx { base: base.clone(), m, modulus }
    }

    pub fn with_modulus(base: &FqCtx, h: Poly) -> Result<FieldCtx, FfError> {
        if !h.is_monic(base) {
            return Err(FfError::NotMonic(h.show(base)));
        }
        let m = h.deg().unwrap();
        if m == 0 || !poly::is_irreducible(base, &h) {
            return Err(FfError::NotIrreducible { q: base.q(), poly: h.show(base) });
        }
        Ok(FieldCtx { base: base.clone(), m, modulus: h })
    }

    /// F_q itself, as the degree-1 extension F_q[x]/(x).
    pub fn trivial(base: &FqCtx) -> FieldCtx {
        FieldCtx { base: base.clone(), m: 1, modulus: Poly::t(base) }
    }

    pub fn size(&self) -> u128 {
        (self.base.q() as u128).pow(self.m as u32)
    }

    pub fn size_u64(&self) -> Result<u64, FfError> {
        u64::try_from(self.size())
            .map_err(|_| FfError::CapacityExceeded(format!("field of size q^{}", self.m)))
    }

    pub fn zero(&self) -> Poly {
        Poly::zero()
    }

    pub fn one(&self) -> Poly {
        Poly::one(&self.base)
    }

    pub fn reduce(&self, f: &Poly) -> Poly {
        f.rem(&self.base, &self.modulus)
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        a.add(&self.base, b)
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        a.sub(&self.base, b)
    }

    pub fn neg(&self, a: &Poly) -> Poly {
        a.neg(&self.base)
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        self.reduce(&a.mul(&self.base, b))
    }

    pub fn inv(&self, a: &Poly) -> Option<Poly> {
        if a.is_zero() {
            return None;
        }
        let (g, s, _) = Poly::exgcd(&self.base, a, &self.modulus);
        debug_assert_eq!(g.deg(), Some(0));
        Some(self.reduce(&s))
    }

    pub fn pow(&self, a: &Poly, mut k: u128) -> Poly {
        let mut base = self.reduce(a);
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

    /// The q-power Frobenius, the identity on the prime field F_q.
    pub fn frob_q(&self, a: &Poly) -> Poly {
        self.pow(a, self.base.q() as u128)
    }

    pub fn embed_scalar(&self, a: &FqElt) -> Poly {
        Poly::constant(&self.base, a.clone())
    }

    /// Coefficient vector over F_q in the basis 1, x, ..., x^{m-1}.
    pub fn coords(&self, a: &Poly) -> Vec<FqElt> {
        (0..self.m).map(|i| a.coeff(&self.base, i)).collect()
    }

    pub fn from_coords(&self, v: &[FqElt]) -> Poly {
        assert_eq!(v.len(), self.m);
        let mut p = Poly { c: v.to_vec() };
        while p.c.last().map_or(false, |a| self.base.is_zero(a)) {
            p.c.pop();
        }
        p
    }

    pub fn index(&self, a: &Poly) -> u64 {
        let q = self.base.q();
        let mut k = 0u64;
        for i in (0..self.m).rev() {
            k = k * q + self.base.index(&a.coeff(&self.base, i));
        }
        k
    }

    pub fn from_index(&self, mut k: u64) -> Poly {
        let q = self.base.q();
        let mut v = Vec::with_capacity(self.m);
        for _ in 0..self.m {
            v.push(self.base.from_index(k % q));
            k /= q;
        }
        self.from_coords(&v)
    }

    pub fn elements(&self) -> impl Iterator<Item = Poly> + '_ {
        let n = self.size();
        assert!(n <= 1 << 26, "enumeration of field with {n} elements is too large");
        (0..n as u64).map(|k| self.from_index(k))
    }

    /// Evaluate f in F_q[t] at a point of this field (Horner).
    pub fn eval_poly(&self, f: &Poly, x: &Poly) -> Poly {
        let mut acc = self.zero();
        for a in f.c.iter().rev() {
            acc = self.add(&self.mul(&acc, x), &self.embed_scalar(a));
        }
        acc
    }

    /// Monic minimal polynomial over F_q, found as the first linear
    /// dependency among the powers 1, a, a^2, ...
    pub fn minimal_poly(&self, a: &Poly) -> Poly {
        let mut powers = Vec::with_capacity(self.m + 1);
        let mut cur = self.one();
        for _ in 0..=self.m {
            powers.push(self.coords(&cur));
            cur = self.mul(&cur, a);
        }
        let (_, combo) = solve_first_dependency(&self.base, &powers)
            .expect("powers of a field element are dependent by degree m+1");
        let mut p = Poly { c: combo };
        while p.c.last().map_or(false, |x| self.base.is_zero(x)) {
            p.c.pop();
        }
        p
    }
}

/// An F_q-algebra embedding of one extension into another, pinned down by
/// the image of the source generator.
#[derive(Debug, Clone)]
pub struct EmbedMap {
    pub src: FieldCtx,
    pub dst: FieldCtx,
    pub image_of_gen: Poly,
}

impl EmbedMap {
    /// Finds the canonical (smallest-image) embedding. The candidate roots
    /// live in the fixed field of Frob^{src.m}, recovered by linear algebra,
    /// so only q^{src.m} points are scanned no matter how large dst is.
    pub fn new(src: &FieldCtx, dst: &FieldCtx) -> Result<EmbedMap, FfError> {
        assert_eq!(src.base, dst.base, "embeddings require a common base field");
        let fq = &src.base;
        if src.m == 1 {
            // x + c has the single root -c.
            let c = src.modulus.coeff(fq, 0);
            let root = Poly::constant(fq, fq.neg(&c));
            return Ok(EmbedMap { src: src.clone(), dst: dst.clone(), image_of_gen: root });
        }
        if dst.m % src.m != 0 {
            return Err(FfError::NoEmbedding { src: src.m, dst: dst.m });
        }
        // Matrix of Frob^{src.m} - id on dst as an F_q-space.
        let mut cols: Vec<Vec<FqElt>> = Vec::with_capacity(dst.m);
        for j in 0..dst.m {
            let mut basis_elt = Poly::zero();
            basis_elt.c = vec![fq.zero(); j + 1];
            basis_elt.c[j] = fq.one();
            let mut img = basis_elt.clone();
            for _ in 0..src.m {
                img = dst.frob_q(&img);
            }
            let mut col = dst.coords(&img);
            for (i, c) in col.iter_mut().enumerate() {
                if i == j {
                    *c = fq.sub(c, &fq.one());
                }
            }
            cols.push(col);
        }
        let rows: Vec<Vec<FqElt>> =
            (0..dst.m).map(|i| (0..dst.m).map(|j| cols[j][i].clone()).collect()).collect();
        let kernel = super::linalg::kernel_basis(fq, dst.m, &rows);
        // Scan the fixed subfield for roots of the source modulus.
        let q = fq.q();
        let mut total: u64 = 1;
        for _ in 0..kernel.len() {
            total = total.saturating_mul(q);
        }
        let mut best: Option<Poly> = None;
        for mut k in 0..total {
            let mut coords = vec![fq.zero(); dst.m];
            for basis_vec in &kernel {
                let digit = fq.from_index(k % q);
                k /= q;
                for (c, b) in coords.iter_mut().zip(basis_vec) {
                    *c = fq.add(c, &fq.mul(&digit, b));
                }
            }
            let cand = dst.from_coords(&coords);
            if dst.eval_poly(&src.modulus, &cand).is_zero() {
                if best.as_ref().map_or(true, |b| cand < *b) {
                    best = Some(cand);
                }
            }
        }
        match best {
            Some(image_of_gen) => Ok(EmbedMap { src: src.clone(), dst: dst.clone(), image_of_gen }),
            None => Err(FfError::NoEmbedding { src: src.m, dst: dst.m }),
        }
    }

    pub fn map(&self, a: &Poly) -> Poly {
        self.dst.eval_poly(a, &self.image_of_gen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_as_extension_of_f2() {
        let f2 = FqCtx::prime(2).unwrap();
        let f4 = FieldCtx::new(&f2, 2);
        assert_eq!(f4.modulus, Poly::from_indices(&f2, &[1, 1, 1]));
        assert_eq!(f4.size(), 4);
        let x = Poly::t(&f2);
        assert_eq!(f4.pow(&x, 3), f4.one());
        let xi = f4.inv(&x).unwrap();
        assert_eq!(f4.mul(&x, &xi), f4.one());
        assert_eq!(f4.minimal_poly(&x), f4.modulus);
        assert_eq!(f4.minimal_poly(&f4.one()), Poly::from_indices(&f2, &[1, 1]));
        // t^2 + t sends x to x^2 + x = 1.
        let f = Poly::from_indices(&f2, &[0, 1, 1]);
        assert_eq!(f4.eval_poly(&f, &x), f4.one());
    }

    #[test]
    fn trivial_extension_is_the_base_field() {
        let f3 = FqCtx::prime(3).unwrap();
        let k = FieldCtx::trivial(&f3);
        assert_eq!(k.size(), 3);
        let two = k.from_index(2);
        assert_eq!(k.mul(&two, &two), k.one());
        assert_eq!(k.elements().count(), 3);
    }

    #[test]
    fn multiplicative_group_is_cyclic_of_full_order() {
        let f2 = FqCtx::prime(2).unwrap();
        let f16 = FieldCtx::new(&f2, 4);
        for a in f16.elements() {
            if !a.is_zero() {
                assert_eq!(f16.pow(&a, 15), f16.one());
            }
        }
        let orders: Vec<u128> = f16
            .elements()
            .filter(|a| !a.is_zero())
            .map(|a| (1..=15u128).find(|&k| f16.pow(&a, k) == f16.one()).unwrap())
            .collect();
        assert_eq!(orders.iter().filter(|&&k| k == 15).count(), 8);
    }

    #[test]
    fn embedding_is_a_field_homomorphism() {
        let f2 = FqCtx::prime(2).unwrap();
        let f4 = FieldCtx::new(&f2, 2);
        let f16 = FieldCtx::new(&f2, 4);
        let emb = EmbedMap::new(&f4, &f16).unwrap();
        assert!(f16.eval_poly(&f4.modulus, &emb.image_of_gen).is_zero());
        let elts: Vec<Poly> = f4.elements().collect();
        for a in &elts {
            for b in &elts {
                assert_eq!(emb.map(&f4.add(a, b)), f16.add(&emb.map(a), &emb.map(b)));
                assert_eq!(emb.map(&f4.mul(a, b)), f16.mul(&emb.map(a), &emb.map(b)));
            }
        }
        assert_eq!(emb.map(&f4.one()), f16.one());
        // No embedding of F_4 into F_8.
        let f8 = FieldCtx::new(&f2, 3);
        assert!(matches!(EmbedMap::new(&f4, &f8), Err(FfError::NoEmbedding { src: 2, dst: 3 })));
    }

    #[test]
    fn residue_field_of_a_prime_embeds_in_a_splitting_field() {
        // kappa for p = t^2 + t + 1 over F_2 is F_4 presented mod p itself.
        let f2 = FqCtx::prime(2).unwrap();
        let p = Poly::from_indices(&f2, &[1, 1, 1]);
        let kappa = FieldCtx::with_modulus(&f2, p.clone()).unwrap();
        let f16 = FieldCtx::new(&f2, 4);
        let emb = EmbedMap::new(&kappa, &f16).unwrap();
        assert!(f16.eval_poly(&p, &emb.image_of_gen).is_zero());
    }
}
