//! Sparse multivariate polynomials over a finite field, with optional
//! truncation at a total-degree bound.
//!
//! A `SeriesCtx` with `trunc = Some(p)` models the quotient of a formal
//! power-series ring in `nvars` variables by the p-th power of the maximal
//! ideal: every operation drops terms of total degree >= p.  With
//! `trunc = None` the arithmetic is exact polynomial arithmetic.  The same
//! type therefore serves both the exact invariant-theory computations and
//! the truncated local-ring ones.

use std::collections::BTreeMap;

use crate::ffpoly::{FieldCtx, Poly};

/// Coefficient field plus variable count plus optional truncation order.
#[derive(Clone, Debug)]
pub struct SeriesCtx {
    pub field: FieldCtx,
    pub nvars: usize,
    /// Work modulo the `p`-th power of the maximal ideal when `Some(p)`.
    pub trunc: Option<u32>,
}

/// Multivariate polynomial: exponent vector (length `nvars`) to nonzero
/// coefficient.  The map never stores zero coefficients, so derived
/// equality is semantic equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MPoly {
    terms: BTreeMap<Vec<u16>, Poly>,
}

impl MPoly {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u32).sum())
            .max()
    }

    /// Minimal total degree among terms, or None for zero.  This is the
    /// maximal-ideal valuation when the polynomial represents a series.
    pub fn valuation(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u32).sum())
            .min()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &Poly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Sum of the terms of total degree exactly `d`.
    pub fn homogeneous_component(&self, d: u32) -> MPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.iter().map(|&x| x as u32).sum::<u32>() == d)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        MPoly { terms }
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.degree() {
            None => true,
            Some(d) => self.valuation() == Some(d),
        }
    }
}

fn total_deg(e: &[u16]) -> u32 {
    e.iter().map(|&x| x as u32).sum()
}

impl SeriesCtx {
    pub fn new(field: &FieldCtx, nvars: usize, trunc: Option<u32>) -> SeriesCtx {
        SeriesCtx {
            field: field.clone(),
            nvars,
            trunc,
        }
    }

    fn keeps(&self, e: &[u16]) -> bool {
        match self.trunc {
            None => true,
            Some(p) => total_deg(e) < p,
        }
    }

    /// Drop truncated-away and zero terms.  All constructors funnel
    /// through here so `MPoly` values are always normalized.
    fn normalize(&self, terms: BTreeMap<Vec<u16>, Poly>) -> MPoly {
        let terms = terms
            .into_iter()
            .filter(|(e, c)| !c.is_zero() && self.keeps(e))
            .collect();
        MPoly { terms }
    }

    pub fn zero(&self) -> MPoly {
        MPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(&self, exps: Vec<u16>, coeff: &Poly) -> MPoly {
        assert_eq!(exps.len(), self.nvars);
        let c = self.field.reduce(coeff);
        let mut terms = BTreeMap::new();
        terms.insert(exps, c);
        self.normalize(terms)
    }

    pub fn scalar(&self, c: &Poly) -> MPoly {
        self.monomial(vec![0; self.nvars], c)
    }

    pub fn one(&self) -> MPoly {
        self.scalar(&self.field.one())
    }

    pub fn var(&self, i: usize) -> MPoly {
        assert!(i < self.nvars);
        let mut exps = vec![0u16; self.nvars];
        exps[i] = 1;
        self.monomial(exps, &self.field.one())
    }

    pub fn coeff(&self, f: &MPoly, exps: &[u16]) -> Poly {
        f.terms.get(exps).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn add(&self, a: &MPoly, b: &MPoly) -> MPoly {
        let mut terms = a.terms.clone();
        for (e, c) in &b.terms {
            let cur = terms.entry(e.clone()).or_insert_with(|| self.field.zero());
            *cur = self.field.add(cur, c);
        }
        self.normalize(terms)
    }

    pub fn neg(&self, a: &MPoly) -> MPoly {
        let terms = a
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), self.field.neg(c)))
            .collect();
        MPoly { terms }
    }

    pub fn sub(&self, a: &MPoly, b: &MPoly) -> MPoly {
        self.add(a, &self.neg(b))
    }

    pub fn mul_scalar(&self, a: &MPoly, s: &Poly) -> MPoly {
        let s = self.field.reduce(s);
        let terms = a
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), self.field.mul(c, &s)))
            .collect();
        self.normalize(terms)
    }

    pub fn mul(&self, a: &MPoly, b: &MPoly) -> MPoly {
        let mut terms: BTreeMap<Vec<u16>, Poly> = BTreeMap::new();
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Vec<u16> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                if !self.keeps(&e) {
                    continue;
                }
                let prod = self.field.mul(ca, cb);
                let cur = terms.entry(e).or_insert_with(|| self.field.zero());
                *cur = self.field.add(cur, &prod);
            }
        }
        self.normalize(terms)
    }

    pub fn pow(&self, a: &MPoly, mut k: u32) -> MPoly {
        let mut acc = self.one();
        let mut base = a.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Substitute `images[i]` for variable `i`.  Under truncation the
    /// result is only meaningful when every substituted image has
    /// positive valuation (the callers here substitute homogeneous
    /// linear forms, which always qualify).
    pub fn subst(&self, f: &MPoly, images: &[MPoly]) -> MPoly {
        assert_eq!(images.len(), self.nvars);
        let mut out = self.zero();
        for (e, c) in &f.terms {
            let mut term = self.scalar(c);
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    term = self.mul(&term, &self.pow(&images[i], ei as u32));
                }
            }
            out = self.add(&out, &term);
        }
        out
    }

    /// Image of `f` with the listed variables set to zero.
    pub fn kill_vars(&self, f: &MPoly, vars: &[usize]) -> MPoly {
        let terms = f
            .terms
            .iter()
            .filter(|(e, _)| vars.iter().all(|&v| e[v] == 0))
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        MPoly { terms }
    }

    /// Reinterpret an exact polynomial inside this (possibly truncated)
    /// context.
    pub fn reduce(&self, f: &MPoly) -> MPoly {
        self.normalize(f.terms.clone())
    }

    /// Exact division, for exact contexts: returns the quotient when
    /// `b` divides `a` with zero remainder, None otherwise.  Uses the
    /// lexicographic leading term; for an exact multiple the greedy
    /// reduction terminates with remainder zero.
    pub fn div_exact(&self, a: &MPoly, b: &MPoly) -> Option<MPoly> {
        assert!(self.trunc.is_none(), "exact division needs an exact context");
        let (lb, cb) = b.terms.iter().next_back()?;
        let cb_inv = self.field.inv(cb)?;
        let mut rem = a.clone();
        let mut quot = self.zero();
        while let Some((la, ca)) = rem.terms.iter().next_back() {
            if !la.iter().zip(lb).all(|(x, y)| x >= y) {
                return None;
            }
            let e: Vec<u16> = la.iter().zip(lb).map(|(x, y)| x - y).collect();
            let c = self.field.mul(&ca.clone(), &cb_inv);
            let t = self.monomial(e, &c);
            quot = self.add(&quot, &t);
            rem = self.sub(&rem, &self.mul(&t, b));
        }
        Some(quot)
    }

    /// Human-readable rendering, mostly for error payloads and reports.
    /// Coefficients in a nontrivial extension print as `(c)` with the
    /// carrier-polynomial digits low to high.
    pub fn render(&self, f: &MPoly, names: &[&str]) -> String {
        assert_eq!(names.len(), self.nvars);
        if f.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (e, c) in f.terms.iter().rev() {
            let mut factors = Vec::new();
            let coeff = self.field.index(c);
            let one = self.field.index(&self.field.one());
            if coeff != one || e.iter().all(|&x| x == 0) {
                factors.push(format!("{}", coeff));
            }
            for (i, &ei) in e.iter().enumerate() {
                match ei {
                    0 => {}
                    1 => factors.push(names[i].to_string()),
                    _ => factors.push(format!("{}^{}", names[i], ei)),
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

/// All exponent vectors of length `nvars` with total degree exactly `d`,
/// in lexicographic order.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Vec<u16>> {
    assert!(d <= u16::MAX as u32);
    let mut out = Vec::new();
    let mut cur = vec![0u16; nvars];
    fn rec(cur: &mut Vec<u16>, pos: usize, left: u16, out: &mut Vec<Vec<u16>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for take in 0..=left {
            cur[pos] = take;
            rec(cur, pos + 1, left - take, out);
        }
    }
    if nvars == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(&mut cur, 0, d as u16, &mut out);
    out
}

/// C(n, k) as u128; panics on overflow, which the desk-scale callers
/// never reach.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128).expect("binomial overflow") / (i as u128 + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::FqCtx;

    fn ctx(p: u64, nvars: usize, trunc: Option<u32>) -> SeriesCtx {
        let fq = FqCtx::prime(p).unwrap();
        SeriesCtx::new(&FieldCtx::trivial(&fq), nvars, trunc)
    }

    fn sample_polys(s: &SeriesCtx) -> Vec<MPoly> {
        let x = s.var(0);
        let y = s.var(1);
        let one = s.one();
        let xy = s.mul(&x, &y);
        let x2 = s.mul(&x, &x);
        vec![
            s.zero(),
            one.clone(),
            x.clone(),
            y.clone(),
            s.add(&x, &y),
            s.add(&one, &xy),
            s.add(&x2, &s.add(&y, &one)),
            s.sub(&x2, &xy),
        ]
    }

    #[test]
    fn ring_axioms_hold_under_truncation() {
        for p in [2u64, 3] {
            let s = ctx(p, 2, Some(4));
            let polys = sample_polys(&s);
            for a in &polys {
                for b in &polys {
                    assert_eq!(s.mul(a, b), s.mul(b, a));
                    assert_eq!(s.add(a, b), s.add(b, a));
                    for c in &polys {
                        assert_eq!(s.mul(&s.mul(a, b), c), s.mul(a, &s.mul(b, c)));
                        assert_eq!(
                            s.mul(a, &s.add(b, c)),
                            s.add(&s.mul(a, b), &s.mul(a, c))
                        );
                    }
                    assert!(s.sub(a, a).is_zero());
                    assert_eq!(s.mul(a, &s.one()), *a);
                }
            }
        }
    }

    #[test]
    fn truncated_product_agrees_with_truncation_of_exact_product() {
        let exact = ctx(3, 2, None);
        let t = ctx(3, 2, Some(3));
        let polys = sample_polys(&exact);
        for a in &polys {
            for b in &polys {
                let full = exact.mul(a, b);
                let via_exact = t.reduce(&full);
                let via_trunc = t.mul(&t.reduce(a), &t.reduce(b));
                assert_eq!(via_exact, via_trunc);
            }
        }
    }

    #[test]
    fn subst_by_inverse_linear_maps_round_trips() {
        let s = ctx(3, 2, Some(5));
        let x = s.var(0);
        let y = s.var(1);
        // g: x -> x + y, y -> y; inverse: x -> x - y, y -> y.
        let fwd = [s.add(&x, &y), y.clone()];
        let bwd = [s.sub(&x, &y), y.clone()];
        for f in sample_polys(&s) {
            let there = s.subst(&f, &fwd);
            let back = s.subst(&there, &bwd);
            assert_eq!(back, f);
        }
    }

    #[test]
    fn division_recovers_exact_factors() {
        let s = ctx(3, 2, None);
        let x = s.var(0);
        let y = s.var(1);
        let a = s.add(&x, &y);
        let b = s.add(&s.mul(&x, &x), &s.mul_scalar(&y, &s.field.from_index(2)));
        let prod = s.mul(&a, &b);
        assert_eq!(s.div_exact(&prod, &a), Some(b.clone()));
        assert_eq!(s.div_exact(&prod, &b), Some(a.clone()));
        // x + y does not divide x^2 + 2y exactly.
        assert_eq!(s.div_exact(&b, &a), None);
        assert_eq!(s.div_exact(&s.zero(), &a), Some(s.zero()));
    }

    #[test]
    fn monomial_listing_matches_binomial_count() {
        for nvars in 1..=4usize {
            for d in 0..=6u32 {
                let mono = monomials_of_degree(nvars, d);
                assert_eq!(
                    mono.len() as u128,
                    binomial((d as u64) + (nvars as u64) - 1, (nvars as u64) - 1)
                );
                for e in &mono {
                    assert_eq!(total_deg(e), d);
                }
                let mut sorted = mono.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(sorted.len(), mono.len());
            }
        }
    }

    #[test]
    fn homogeneous_components_sum_back() {
        let s = ctx(2, 3, None);
        let x = s.var(0);
        let y = s.var(1);
        let z = s.var(2);
        let f = s.add(
            &s.add(&s.mul(&x, &s.mul(&y, &z)), &s.mul(&x, &y)),
            &s.add(&z, &s.one()),
        );
        let dmax = f.degree().unwrap();
        let mut acc = s.zero();
        for d in 0..=dmax {
            let comp = f.homogeneous_component(d);
            assert!(comp.is_homogeneous());
            acc = s.add(&acc, &comp);
        }
        assert_eq!(acc, f);
        assert_eq!(f.valuation(), Some(0));
        assert_eq!(s.mul(&x, &y).valuation(), Some(2));
    }

    #[test]
    fn pow_matches_iterated_mul() {
        let s = ctx(2, 2, Some(6));
        let f = s.add(&s.var(0), &s.add(&s.var(1), &s.one()));
        let mut acc = s.one();
        for k in 0..5u32 {
            assert_eq!(s.pow(&f, k), acc);
            acc = s.mul(&acc, &f);
        }
    }

    #[test]
    fn kill_vars_is_evaluation_at_zero() {
        let s = ctx(3, 2, None);
        let x = s.var(0);
        let y = s.var(1);
        // f = x^2 + xy + y + 2
        let f = s.add(
            &s.add(&s.mul(&x, &x), &s.mul(&x, &y)),
            &s.add(&y, &s.scalar(&s.field.from_index(2))),
        );
        let fx0 = s.kill_vars(&f, &[0]);
        let expect = s.add(&y, &s.scalar(&s.field.from_index(2)));
        assert_eq!(fx0, expect);
        let subst = s.subst(&f, &[s.zero(), y.clone()]);
        assert_eq!(subst, fx0);
    }
}
