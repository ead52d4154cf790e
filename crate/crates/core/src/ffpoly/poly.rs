//! Dense univariate polynomials over F_q, coefficients lowest degree first.
//!
//! The same type serves two roles: elements of the ring A = F_q[t], and
//! representatives of residue classes or extension-field elements (variable x).
//! A `Poly` is always trimmed, so `c.last()` is nonzero unless the vector is
//! empty (the zero polynomial).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{FfError, FqCtx, FqElt};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Poly {
    pub c: Vec<FqElt>,
}

fn cmp_elt(a: &FqElt, b: &FqElt) -> Ordering {
    // Digits are little-endian in p, so numeric order is reversed lex.
    a.iter().rev().cmp(b.iter().rev())
}

impl Ord for Poly {
    fn cmp(&self, other: &Poly) -> Ordering {
        self.c.len().cmp(&other.c.len()).then_with(|| {
            for i in (0..self.c.len()).rev() {
                match cmp_elt(&self.c[i], &other.c[i]) {
                    Ordering::Equal => {}
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Poly) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { c: Vec::new() }
    }

    pub fn constant(ctx: &FqCtx, a: FqElt) -> Poly {
        if ctx.is_zero(&a) {
            Poly::zero()
        } else {
            Poly { c: vec![a] }
        }
    }

    pub fn one(ctx: &FqCtx) -> Poly {
        Poly { c: vec![ctx.one()] }
    }

    pub fn t(ctx: &FqCtx) -> Poly {
        Poly { c: vec![ctx.zero(), ctx.one()] }
    }

    /// Build from per-degree F_q indices, lowest first.
    pub fn from_indices(ctx: &FqCtx, idx: &[u64]) -> Poly {
        let mut p = Poly { c: idx.iter().map(|&k| ctx.from_index(k)).collect() };
        p.trim(ctx);
        p
    }

    pub fn indices(&self, ctx: &FqCtx) -> Vec<u64> {
        self.c.iter().map(|a| ctx.index(a)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeff(&self, ctx: &FqCtx, i: usize) -> FqElt {
        self.c.get(i).cloned().unwrap_or_else(|| ctx.zero())
    }

    pub fn lc(&self) -> Option<&FqElt> {
        self.c.last()
    }

    pub fn is_monic(&self, ctx: &FqCtx) -> bool {
        self.lc() == Some(&ctx.one())
    }

    fn trim(&mut self, ctx: &FqCtx) {
        while self.c.last().map_or(false, |a| ctx.is_zero(a)) {
            self.c.pop();
        }
    }

    pub fn add(&self, ctx: &FqCtx, other: &Poly) -> Poly {
        let n = self.c.len().max(other.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(ctx.add(&self.coeff(ctx, i), &other.coeff(ctx, i)));
        }
        let mut p = Poly { c };
        p.trim(ctx);
        p
    }

    pub fn sub(&self, ctx: &FqCtx, other: &Poly) -> Poly {
        let n = self.c.len().max(other.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(ctx.sub(&self.coeff(ctx, i), &other.coeff(ctx, i)));
        }
        let mut p = Poly { c };
        p.trim(ctx);
        p
    }

    pub fn neg(&self, ctx: &FqCtx) -> Poly {
        Poly { c: self.c.iter().map(|a| ctx.neg(a)).collect() }
    }

    pub fn mul(&self, ctx: &FqCtx, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![ctx.zero(); self.c.len() + other.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if ctx.is_zero(a) {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                c[i + j] = ctx.add(&c[i + j], &ctx.mul(a, b));
            }
        }
        let mut p = Poly { c };
        p.trim(ctx);
        p
    }

    pub fn mul_elt(&self, ctx: &FqCtx, a: &FqElt) -> Poly {
        let mut p = Poly { c: self.c.iter().map(|b| ctx.mul(a, b)).collect() };
        p.trim(ctx);
        p
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn divrem(&self, ctx: &FqCtx, d: &Poly) -> (Poly, Poly) {
        let dd = d.deg().expect("division by zero polynomial");
        let lc_inv = ctx.inv(d.lc().unwrap()).unwrap();
        let mut rem = self.clone();
        if rem.c.len() <= dd {
            return (Poly::zero(), rem);
        }
        let mut quot = vec![ctx.zero(); rem.c.len() - dd];
        while let Some(rd) = rem.deg() {
            if rd < dd {
                break;
            }
            let factor = ctx.mul(rem.lc().unwrap(), &lc_inv);
            let shift = rd - dd;
            quot[shift] = factor.clone();
            for (i, b) in d.c.iter().enumerate() {
                let k = shift + i;
                rem.c[k] = ctx.sub(&rem.c[k], &ctx.mul(&factor, b));
            }
            rem.trim(ctx);
        }
        let mut q = Poly { c: quot };
        q.trim(ctx);
        (q, rem)
    }

    pub fn rem(&self, ctx: &FqCtx, d: &Poly) -> Poly {
        self.divrem(ctx, d).1
    }

    pub fn divides(&self, ctx: &FqCtx, target: &Poly) -> bool {
        target.rem(ctx, self).is_zero()
    }

    pub fn make_monic(&self, ctx: &FqCtx) -> Poly {
        match self.lc() {
            None => Poly::zero(),
            Some(l) => self.mul_elt(ctx, &ctx.inv(l).unwrap()),
        }
    }

    pub fn gcd(ctx: &FqCtx, a: &Poly, b: &Poly) -> Poly {
        let mut a = a.clone();
        let mut b = b.clone();
        while !b.is_zero() {
            let r = a.rem(ctx, &b);
            a = b;
            b = r;
        }
        a.make_monic(ctx)
    }

    /// Returns (g, s, u) with s*a + u*b = g and g the monic gcd.
    pub fn exgcd(ctx: &FqCtx, a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
        let mut r0 = a.clone();
        let mut r1 = b.clone();
        let mut s0 = Poly::one(ctx);
        let mut s1 = Poly::zero();
        let mut u0 = Poly::zero();
        let mut u1 = Poly::one(ctx);
        while !r1.is_zero() {
            let (q, r) = r0.divrem(ctx, &r1);
            let s = s0.sub(ctx, &q.mul(ctx, &s1));
            let u = u0.sub(ctx, &q.mul(ctx, &u1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            u0 = u1;
            u1 = u;
        }
        match r0.lc() {
            None => (r0, s0, u0),
            Some(l) => {
                let li = ctx.inv(l).unwrap();
                (r0.mul_elt(ctx, &li), s0.mul_elt(ctx, &li), u0.mul_elt(ctx, &li))
            }
        }
    }

    pub fn powmod(ctx: &FqCtx, base: &Poly, mut exp: u64, modulus: &Poly) -> Poly {
        let mut b = base.rem(ctx, modulus);
        let mut acc = Poly::one(ctx).rem(ctx, modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(ctx, &b).rem(ctx, modulus);
            }
            b = b.mul(ctx, &b).rem(ctx, modulus);
            exp >>= 1;
        }
        acc
    }

    pub fn eval_fq(&self, ctx: &FqCtx, x: &FqElt) -> FqElt {
        let mut acc = ctx.zero();
        for a in self.c.iter().rev() {
            acc = ctx.add(&ctx.mul(&acc, x), a);
        }
        acc
    }

    pub fn show(&self, ctx: &FqCtx) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut terms = Vec::new();
        for (i, a) in self.c.iter().enumerate().rev() {
            if ctx.is_zero(a) {
                continue;
            }
            let k = ctx.index(a);
            let coeff = if k == 1 && i > 0 { String::new() } else { format!("{k}") };
            let var = match i {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            };
            let sep = if coeff.is_empty() || var.is_empty() { "" } else { "*" };
            terms.push(format!("{coeff}{sep}{var}"));
        }
        terms.join(" + ")
    }
}

/// t^{q^i} mod f, computed by iterating the q-power Frobenius i times.
fn frob_iterate(ctx: &FqCtx, f: &Poly, i: usize) -> Poly {
    let q = ctx.q();
    let mut x = Poly::t(ctx).rem(ctx, f);
    for _ in 0..i {
        x = Poly::powmod(ctx, &x, q, f);
    }
    x
}

/// A polynomial of degree n >= 1 is irreducible exactly when it shares no
/// root with any extension of degree up to n/2, i.e. gcd(f, t^{q^i} - t) = 1
/// for 1 <= i <= n/2.
pub fn is_irreducible(ctx: &FqCtx, f: &Poly) -> bool {
    let n = match f.deg() {
        Some(n) if n >= 1 => n,
        _ => return false,
    };
    let f = f.make_monic(ctx);
    let q = ctx.q();
    let t = Poly::t(ctx).rem(ctx, &f);
    let mut x = t.clone();
    for _ in 1..=n / 2 {
        x = Poly::powmod(ctx, &x, q, &f);
        let g = Poly::gcd(ctx, &f, &x.sub(ctx, &t));
        if g.deg() != Some(0) {
            return false;
        }
    }
    true
}

/// All monic polynomials of degree d, in increasing canonical order.
pub fn monic_of_degree(ctx: &FqCtx, d: usize) -> impl Iterator<Item = Poly> + '_ {
    let q = ctx.q() as u128;
    let count = q.checked_pow(d as u32).expect("degree too large to enumerate");
    assert!(count <= 1 << 26, "enumeration of {count} monic polynomials is too large");
    (0..count as u64).map(move |mut k| {
        let mut c = Vec::with_capacity(d + 1);
        for _ in 0..d {
            c.push(ctx.from_index(k % q as u64));
            k /= q as u64;
        }
        c.push(ctx.one());
        Poly { c }
    })
}

/// First monic irreducible of degree d in canonical order.
pub fn find_irreducible(ctx: &FqCtx, d: usize) -> Poly {
    monic_of_degree(ctx, d)
        .find(|f| is_irreducible(ctx, f))
        .expect("an irreducible of every degree exists")
}

/// Factor a monic polynomial into monic irreducibles with multiplicities,
/// sorted in canonical order. Works degree by degree: after all factors of
/// degree < d are stripped, gcd with t^{q^d} - t isolates the degree-d part.
pub fn factor_monic(ctx: &FqCtx, f: &Poly) -> Result<Vec<(Poly, u32)>, FfError> {
    if !f.is_monic(ctx) {
        return Err(FfError::NotMonic(f.show(ctx)));
    }
    let mut remaining = f.clone();
    let mut factors: Vec<(Poly, u32)> = Vec::new();
    let mut strip = |rem: &mut Poly, pi: &Poly| {
        let mut mult = 0u32;
        loop {
            let (q, r) = rem.divrem(ctx, pi);
            if !r.is_zero() {
                break;
            }
            *rem = q;
            mult += 1;
        }
        debug_assert!(mult > 0);
        factors.push((pi.clone(), mult));
    };
    let mut d = 1;
    while remaining.deg().unwrap_or(0) > 0 {
        let n = remaining.deg().unwrap();
        if 2 * d > n {
            let last = remaining.clone();
            strip(&mut remaining, &last);
            break;
        }
        let t = Poly::t(ctx).rem(ctx, &remaining);
        let frob = frob_iterate(ctx, &remaining, d);
        let g = Poly::gcd(ctx, &remaining, &frob.sub(ctx, &t));
        match g.deg() {
            Some(gd) if gd > 0 => {
                // All irreducible factors of g have degree exactly d.
                if gd == d {
                    strip(&mut remaining, &g);
                } else {
                    let mut left = gd / d;
                    for cand in monic_of_degree(ctx, d) {
                        if left == 0 {
                            break;
                        }
                        if cand.divides(ctx, &g) {
                            strip(&mut remaining, &cand);
                            left -= 1;
                        }
                    }
                }
            }
            _ => {}
        }
        d += 1;
    }
    factors.sort();
    Ok(factors)
}
