//! Modular invariant theory at desk scale: the classical generators of
//! the GL_d(F_q)-invariant polynomial ring, a degree-wise brute-force
//! invariant-dimension oracle to validate them, and a checker for the
//! regularity/freeness criterion used on quotients of truncated local
//! rings by finite linear group actions.
//!
//! Characteristic divides the group order everywhere here, so there is
//! no averaging operator; every dimension is an exact kernel
//! computation over the coefficient field.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::ffpoly::{kernel_basis, rank, FfError, FieldCtx, FqCtx, Poly};
use crate::series::{binomial, monomials_of_degree, MPoly, SeriesCtx};

#[derive(Debug, Error)]
pub enum DickError {
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error("group element {element} violates a hypothesis: {condition}")]
    HypothesisViolated { element: usize, condition: String },
    #[error("generator matrix {0} is singular")]
    SingularGenerator(usize),
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Ff(#[from] FfError),
}

pub const DEFAULT_ACTION_CAP: usize = 1 << 14;
pub const DEFAULT_DEGREE_CAP: u64 = 1 << 16;

pub type Mat = Vec<Vec<Poly>>;

/// A finite matrix group acting on polynomials by linear substitution
/// of variables.  Construction closes the generating set under
/// products, so `elements` is the full group.
#[derive(Clone, Debug)]
pub struct MatrixGroupAction {
    pub series: SeriesCtx,
    pub gens: Vec<Mat>,
    pub elements: Vec<Mat>,
}

fn mat_mul(f: &FieldCtx, a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![f.zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = f.zero();
            for k in 0..n {
                acc = f.add(&acc, &f.mul(&a[i][k], &b[k][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

fn identity_mat(f: &FieldCtx, n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { f.one() } else { f.zero() }).collect())
        .collect()
}

impl MatrixGroupAction {
    /// `ctx` fixes the coefficient field, variable count, and (for the
    /// truncated callers) the truncation order; the same group can act
    /// on exact or truncated polynomials through it.
    pub fn new(ctx: &SeriesCtx, gens: Vec<Mat>, cap: usize) -> Result<MatrixGroupAction, DickError> {
        let n = ctx.nvars;
        let f = &ctx.field;
        let mut clean = Vec::new();
        for (idx, g) in gens.into_iter().enumerate() {
            if g.len() != n || g.iter().any(|row| row.len() != n) {
                return Err(DickError::ShapeMismatch(format!(
                    "generator {idx} is not {n}x{n}"
                )));
            }
            let g: Mat = g.iter().map(|row| row.iter().map(|c| f.reduce(c)).collect()).collect();
            if rank(f, &g) != n {
                return Err(DickError::SingularGenerator(idx));
            }
            clean.push(g);
        }
        let mut seen: BTreeSet<Mat> = BTreeSet::new();
        seen.insert(identity_mat(f, n));
        let mut frontier: Vec<Mat> = seen.iter().cloned().collect();
        while let Some(g) = frontier.pop() {
            for s in &clean {
                let h = mat_mul(f, &g, s);
                if seen.insert(h.clone()) {
                    if seen.len() > cap {
                        return Err(DickError::CapacityExceeded(format!(
                            "group closure exceeds {cap} elements"
                        )));
                    }
                    frontier.push(h);
                }
            }
        }
        Ok(MatrixGroupAction {
            series: ctx.clone(),
            gens: clean,
            elements: seen.into_iter().collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Variable images of `g`: variable i maps to the linear form with
    /// coefficients in row i.
    pub fn images(&self, g: &Mat) -> Vec<MPoly> {
        let s = &self.series;
        (0..s.nvars)
            .map(|i| {
                let mut form = s.zero();
                for (j, c) in g[i].iter().enumerate() {
                    form = s.add(&form, &s.mul_scalar(&s.var(j), c));
                }
                form
            })
            .collect()
    }

    pub fn act(&self, g: &Mat, fpoly: &MPoly) -> MPoly {
        self.series.subst(fpoly, &self.images(g))
    }
}

/// Basis of the subspace of degree-`d` homogeneous polynomials fixed by
/// every generator (equivalently by the whole group).
fn fixed_subspace(action: &MatrixGroupAction, d: u32) -> Vec<MPoly> {
    let s = &action.series;
    let f = &s.field;
    let monos = monomials_of_degree(s.nvars, d);
    let ncols = monos.len();
    let index: std::collections::BTreeMap<&Vec<u16>, usize> =
        monos.iter().enumerate().map(|(k, e)| (e, k)).collect();
    // displacement[k] = coefficients of g.m_k - m_k over the monomial
    // basis; a coefficient vector v is fixed iff every functional
    // sum_k v_k (g.m_k - m_k)_t vanishes, so kernel rows are indexed by
    // (generator, target monomial t).
    let mut stacked: Vec<Vec<Poly>> = Vec::new();
    for g in &action.gens {
        let mut displacement = Vec::with_capacity(ncols);
        for e in &monos {
            let m = s.monomial(e.clone(), &f.one());
            let diff = s.sub(&action.act(g, &m), &m);
            let mut row = vec![f.zero(); ncols];
            for (te, tc) in diff.terms() {
                row[index[te]] = tc.clone();
            }
            displacement.push(row);
        }
        for t in 0..ncols {
            stacked.push((0..ncols).map(|k| displacement[k][t].clone()).collect());
        }
    }
    kernel_basis(f, ncols, &stacked)
        .into_iter()
        .map(|v| {
            let mut p = s.zero();
            for (k, c) in v.iter().enumerate() {
                p = s.add(&p, &s.monomial(monos[k].clone(), c));
            }
            p
        })
        .collect()
}

/// Dimension of the degree-`d` fixed subspace, by exact linear algebra.
pub fn invariant_dimension(action: &MatrixGroupAction, d: u32, cap: u64) -> Result<u64, DickError> {
    let n = action.series.nvars as u64;
    let count = binomial(d as u64 + n - 1, n - 1);
    if count > cap as u128 {
        return Err(DickError::CapacityExceeded(format!(
            "degree-{d} component has {count} monomials, cap {cap}"
        )));
    }
    Ok(fixed_subspace(action, d).len() as u64)
}

fn perm_sign(perm: &[usize]) -> bool {
    let mut inv = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    inv % 2 == 0
}

/// Determinant of the matrix whose (i, j) entry is x_j^(q^exps[i]).
/// Every permutation term is a single monomial, so the expansion stays
/// sparse.
fn moore_det(s: &SeriesCtx, q: u64, exps: &[u32]) -> MPoly {
    let d = exps.len();
    let f = &s.field;
    let mut out = s.zero();
    for perm in (0..d).permutations(d) {
        let mut e = vec![0u16; s.nvars];
        for (i, &j) in perm.iter().enumerate() {
            let pw = q.checked_pow(exps[i]).expect("q-power exponent overflow");
            assert!(pw <= u16::MAX as u64, "monomial exponent beyond u16");
            e[j] += pw as u16;
        }
        let c = if perm_sign(&perm) { f.one() } else { f.neg(&f.one()) };
        out = s.add(&out, &s.monomial(e, &c));
    }
    out
}

/// Generating matrices for GL_d(F_q): a primitive scaling on the first
/// variable, the cyclic coordinate permutation, and one transvection.
/// For d = 1 only the scaling survives; for q = 2 the scaling is the
/// identity and is dropped.
pub fn gl_generators(f: &FieldCtx, d: usize) -> Vec<Mat> {
    let mut gens = Vec::new();
    let mut primitive = None;
    let order = f.size() - 1;
    for a in f.elements() {
        if a.is_zero() {
            continue;
        }
        let mut pow = a.clone();
        let mut k = 1u128;
        while pow != f.one() {
            pow = f.mul(&pow, &a);
            k += 1;
        }
        if k == order {
            primitive = Some(a);
            break;
        }
    }
    let prim = primitive.expect("finite field has a primitive element");
    if prim != f.one() {
        let mut m = identity_mat(f, d);
        m[0][0] = prim;
        gens.push(m);
    }
    if d >= 2 {
        let mut cyc = vec![vec![f.zero(); d]; d];
        for i in 0..d {
            cyc[i][(i + 1) % d] = f.one();
        }
        gens.push(cyc);
        let mut trans = identity_mat(f, d);
        trans[0][1] = f.one();
        gens.push(trans);
    }
    if gens.is_empty() {
        gens.push(identity_mat(f, d));
    }
    gens
}

/// The d fundamental invariants of GL_d(F_q) acting on d variables,
/// via ratios of Moore determinants, listed by ascending degree
/// q^d - q^i for i = d-1, ..., 0.  The construction is cross-checked
/// here against the generator action (exact substitution), and
/// independently against the dimension oracle in `verify_dickson`.
pub fn dickson_generators(q: u64, d: usize) -> Result<(SeriesCtx, Vec<MPoly>), DickError> {
    if d == 0 {
        return Err(DickError::BadInput("need at least one variable".into()));
    }
    let fq = FqCtx::of_order(q)?;
    let field = FieldCtx::trivial(&fq);
    let s = SeriesCtx::new(&field, d, None);
    let base_exps: Vec<u32> = (0..d as u32).collect();
    let delta = moore_det(&s, q, &base_exps);
    let mut gens = Vec::new();
    for i in (0..d as u32).rev() {
        let exps: Vec<u32> = (0..=d as u32).filter(|&k| k != i).collect();
        let minor = moore_det(&s, q, &exps);
        let c = s
            .div_exact(&minor, &delta)
            .expect("Moore minor is a multiple of the ground determinant");
        gens.push(c);
    }
    // cross-check: exact invariance under the group generators, and the
    // expected degrees.
    let action = MatrixGroupAction::new(&s, gl_generators(&field, d), DEFAULT_ACTION_CAP)?;
    for (k, c) in gens.iter().enumerate() {
        let i = (d - 1 - k) as u32;
        let want = q.pow(d as u32) - q.pow(i);
        assert_eq!(c.degree(), Some(want as u32), "generator degree drifted");
        for g in &action.gens {
            assert_eq!(&action.act(g, c), c, "generator not invariant");
        }
    }
    Ok((s, gens))
}

#[derive(Debug, Clone, Serialize)]
pub struct DicksonReport {
    pub q: u64,
    pub d: usize,
    pub dmax: u32,
    pub group_order: u128,
    pub generator_degrees: Vec<u64>,
    /// dimension of exact degree-D invariants, D = 0..=dmax
    pub invariant_dims: Vec<u64>,
    /// number of degree-D monomials in the generators, D = 0..=dmax
    pub monomial_counts: Vec<u64>,
    pub series_equal: bool,
}

/// Count monomials in independent generators of the listed degrees with
/// total degree exactly D, for every D <= dmax.
fn generator_monomial_counts(degrees: &[u64], dmax: u32) -> Vec<u64> {
    let mut ways = vec![0u64; dmax as usize + 1];
    ways[0] = 1;
    for &g in degrees {
        let g = g as usize;
        for t in g..=dmax as usize {
            ways[t] += ways[t - g];
        }
    }
    ways
}

/// Degree-wise comparison of the brute-force invariant dimensions with
/// the free-polynomial-algebra count on the explicit generators.
pub fn verify_dickson(q: u64, d: usize, dmax: u32, cap: u64) -> Result<DicksonReport, DickError> {
    let (s, gens) = dickson_generators(q, d)?;
    let action = MatrixGroupAction::new(&s, gl_generators(&s.field, d), DEFAULT_ACTION_CAP)?;
    let degrees: Vec<u64> = gens.iter().map(|c| c.degree().unwrap() as u64).collect();
    let mut invariant_dims = Vec::new();
    for dd in 0..=dmax {
        invariant_dims.push(invariant_dimension(&action, dd, cap)?);
    }
    let monomial_counts = generator_monomial_counts(&degrees, dmax);
    let series_equal = invariant_dims == monomial_counts;
    Ok(DicksonReport {
        q,
        d,
        dmax,
        group_order: action.order() as u128,
        generator_degrees: degrees,
        invariant_dims,
        monomial_counts,
        series_equal,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KmReport {
    pub group_order: usize,
    pub trunc: u32,
    /// the norm of the distinguished last variable, rendered with
    /// variables x1, ..., x_{n-1}, y
    pub norm: String,
    /// dim of the degree-D fixed subspace, D = 0..trunc
    pub fixed_dims: Vec<u64>,
    /// dim of the full degree-D component
    pub component_dims: Vec<u64>,
    pub free_basis_ok: bool,
    pub params_ok: bool,
    #[serde(skip)]
    pub norm_poly: MPoly,
}

fn var_names(n: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..n).map(|i| format!("x{i}")).collect();
    names.push("y".to_string());
    names
}

/// Span rank of a list of homogeneous degree-`d` polynomials inside the
/// degree-`d` component.
fn span_rank(s: &SeriesCtx, polys: &[MPoly], d: u32) -> usize {
    let monos = monomials_of_degree(s.nvars, d);
    let index: std::collections::BTreeMap<&Vec<u16>, usize> =
        monos.iter().enumerate().map(|(k, e)| (e, k)).collect();
    let rows: Vec<Vec<Poly>> = polys
        .iter()
        .map(|p| {
            let mut row = vec![s.field.zero(); monos.len()];
            for (e, c) in p.terms() {
                row[index[e]] = c.clone();
            }
            row
        })
        .collect();
    rank(&s.field, &rows)
}

/// Freeness-and-parameters check for a finite linear action on a
/// truncated local ring in variables (x_1, ..., x_{n-1}, y).
///
/// Verifies, for every element of the generated group: the x_i are
/// fixed exactly, and the image of y is y times a unit modulo the x's.
/// Then computes the norm of y over the group and checks to the
/// truncation order that (a) 1, y, ..., y^(#G-1) are a free module
/// basis over the fixed subring and (b) the x's together with the norm
/// generate the maximal ideal of the fixed subring.
///
/// The action must be linear (matrices); the degree-graded structure
/// this buys makes every check exact on the truncated ring.
pub fn km_check(ring: &SeriesCtx, gens: Vec<Mat>, cap: usize) -> Result<KmReport, DickError> {
    let p_trunc = ring
        .trunc
        .ok_or_else(|| DickError::BadInput("km_check needs a truncated ring".into()))?;
    let n = ring.nvars;
    if n == 0 {
        return Err(DickError::BadInput("need at least the distinguished variable".into()));
    }
    let action = MatrixGroupAction::new(ring, gens, cap)?;
    let f = &ring.field;
    // hypothesis check on every group element, not only the generators
    for (idx, g) in action.elements.iter().enumerate() {
        for i in 0..n - 1 {
            for j in 0..n {
                let want = if i == j { f.one() } else { f.zero() };
                if g[i][j] != want {
                    return Err(DickError::HypothesisViolated {
                        element: idx,
                        condition: format!("must fix x{} exactly", i + 1),
                    });
                }
            }
        }
        if g[n - 1][n - 1].is_zero() {
            return Err(DickError::HypothesisViolated {
                element: idx,
                condition: "image of y must be y times a unit modulo (x_1, ..., x_{n-1})"
                    .to_string(),
            });
        }
    }
    let m = action.order();
    if m as u64 >= p_trunc as u64 {
        return Err(DickError::CapacityExceeded(format!(
            "truncation order {p_trunc} must exceed the group order {m} for the norm to survive"
        )));
    }
    let y = ring.var(n - 1);
    let mut norm = ring.one();
    for g in &action.elements {
        norm = ring.mul(&norm, &action.act(g, &y));
    }
    // graded data
    let mut fixed: Vec<Vec<MPoly>> = Vec::new();
    for d in 0..p_trunc {
        fixed.push(fixed_subspace(&action, d));
    }
    let component_dims: Vec<u64> = (0..p_trunc)
        .map(|d| binomial(d as u64 + n as u64 - 1, n as u64 - 1) as u64)
        .collect();
    let fixed_dims: Vec<u64> = fixed.iter().map(|b| b.len() as u64).collect();
    // freeness: in each degree D the products f * y^i with f fixed of
    // degree D - i must span the whole component, and the dimension
    // count must match exactly (spanning + counting = free direct sum).
    let mut free_basis_ok = true;
    let ypows: Vec<MPoly> = (0..m as u32).map(|i| ring.pow(&y, i)).collect();
    for dd in 0..p_trunc {
        let mut span = Vec::new();
        let mut count = 0u64;
        for i in 0..m {
            if (dd as usize) < i {
                continue;
            }
            let fd = dd - i as u32;
            for b in &fixed[fd as usize] {
                span.push(ring.mul(b, &ypows[i]));
                count += 1;
            }
        }
        let r = span_rank(ring, &span, dd) as u64;
        if r != component_dims[dd as usize] || count != component_dims[dd as usize] {
            free_basis_ok = false;
        }
    }
    // parameters: degree-D part of the ideal (x_1, ..., x_{n-1}, N(y))
    // inside the fixed subring must be all of the degree-D fixed space,
    // for every 1 <= D < P.
    let mut params_ok = true;
    let norm_deg = m as u32;
    for dd in 1..p_trunc {
        let mut span = Vec::new();
        for xi in 0..n - 1 {
            let xv = ring.var(xi);
            for b in &fixed[(dd - 1) as usize] {
                span.push(ring.mul(&xv, b));
            }
        }
        if dd >= norm_deg {
            for b in &fixed[(dd - norm_deg) as usize] {
                span.push(ring.mul(&norm, b));
            }
        }
        if span_rank(ring, &span, dd) as u64 != fixed_dims[dd as usize] {
            params_ok = false;
        }
    }
    let names = var_names(n);
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    Ok(KmReport {
        group_order: m,
        trunc: p_trunc,
        norm: ring.render(&norm, &name_refs),
        fixed_dims,
        component_dims,
        free_basis_ok,
        params_ok,
        norm_poly: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissible::gl_order;

    fn prime_series(p: u64, nvars: usize, trunc: Option<u32>) -> SeriesCtx {
        let fq = FqCtx::prime(p).unwrap();
        SeriesCtx::new(&FieldCtx::trivial(&fq), nvars, trunc)
    }

    fn c(s: &SeriesCtx, k: u64) -> Poly {
        s.field.from_index(k)
    }

    #[test]
    fn gl_generators_generate_the_whole_group() {
        for (q, d) in [(2u64, 1usize), (3, 1), (2, 2), (3, 2), (4, 2)] {
            let fq = FqCtx::of_order(q).unwrap();
            let field = FieldCtx::trivial(&fq);
            let s = SeriesCtx::new(&field, d, None);
            let action = MatrixGroupAction::new(&s, gl_generators(&field, d), 1 << 14).unwrap();
            assert_eq!(action.order() as u128, gl_order(q, d));
        }
    }

    #[test]
    fn action_is_multiplicative_on_substitution_side() {
        let s = prime_series(3, 2, None);
        let action =
            MatrixGroupAction::new(&s, gl_generators(&s.field, 2), 1 << 14).unwrap();
        let x = s.var(0);
        let y = s.var(1);
        let fpoly = s.add(&s.mul(&x, &s.mul(&x, &y)), &s.add(&y, &x));
        // substitution composes contravariantly: acting by g then h
        // equals acting by the matrix product g*h.
        for g in action.elements.iter().take(6) {
            for h in action.elements.iter().take(6) {
                let lhs = action.act(h, &action.act(g, &fpoly));
                let rhs = action.act(&mat_mul(&s.field, &g, &h), &fpoly);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn singular_generators_are_rejected() {
        let s = prime_series(2, 2, None);
        let z = s.field.zero();
        let o = s.field.one();
        let bad = vec![vec![o.clone(), o.clone()], vec![o.clone(), o.clone()]];
        match MatrixGroupAction::new(&s, vec![bad], 64) {
            Err(DickError::SingularGenerator(0)) => {}
            other => panic!("expected singular rejection, got {other:?}"),
        }
        let _ = z;
    }

    #[test]
    fn dickson_generators_match_worked_examples() {
        // q=2, d=1: trivial group, generator x
        let (s, g) = dickson_generators(2, 1).unwrap();
        assert_eq!(g, vec![s.var(0)]);

        // q=3, d=1: scaling by -1, generator x^2
        let (s, g) = dickson_generators(3, 1).unwrap();
        let x2 = s.mul(&s.var(0), &s.var(0));
        assert_eq!(g, vec![x2]);

        // q=2, d=2: degrees 2 and 3
        let (s, g) = dickson_generators(2, 2).unwrap();
        let x = s.var(0);
        let y = s.var(1);
        let xy = s.mul(&x, &y);
        let want_c1 = s.add(&s.add(&s.mul(&x, &x), &xy), &s.mul(&y, &y));
        let want_c0 = s.mul(&xy, &s.add(&x, &y));
        assert_eq!(g, vec![want_c1, want_c0]);
        assert_eq!(g[0].degree(), Some(2));
        assert_eq!(g[1].degree(), Some(3));
    }

    #[test]
    fn invariant_dimension_examples() {
        // trivial group on 2 variables: everything is invariant
        let s = prime_series(5, 2, None);
        let trivial =
            MatrixGroupAction::new(&s, vec![identity_mat(&s.field, 2)], 8).unwrap();
        for dd in 0..6u32 {
            assert_eq!(
                invariant_dimension(&trivial, dd, 1 << 16).unwrap() as u128,
                binomial(dd as u64 + 1, 1)
            );
        }

        // GL_2(F_2): no linear invariants, one quadratic
        let s = prime_series(2, 2, None);
        let full = MatrixGroupAction::new(&s, gl_generators(&s.field, 2), 64).unwrap();
        assert_eq!(invariant_dimension(&full, 1, 1 << 16).unwrap(), 0);
        assert_eq!(invariant_dimension(&full, 2, 1 << 16).unwrap(), 1);
        // degree 6: c1^3 and c0^2
        assert_eq!(invariant_dimension(&full, 6, 1 << 16).unwrap(), 2);

        // the unique quadratic invariant is x^2+xy+y^2
        let basis = fixed_subspace(&full, 2);
        let x = s.var(0);
        let y = s.var(1);
        let want = s.add(&s.add(&s.mul(&x, &x), &s.mul(&x, &y)), &s.mul(&y, &y));
        assert_eq!(basis, vec![want]);
    }

    #[test]
    fn invariant_dimension_respects_caps() {
        let s = prime_series(2, 2, None);
        let full = MatrixGroupAction::new(&s, gl_generators(&s.field, 2), 64).unwrap();
        match invariant_dimension(&full, 9, 4) {
            Err(DickError::CapacityExceeded(_)) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn dimension_series_match_for_all_small_cases() {
        for (q, d, dmax) in [(2u64, 1usize, 8u32), (3, 1, 8), (2, 2, 12), (3, 2, 12)] {
            let rep = verify_dickson(q, d, dmax, 1 << 16).unwrap();
            assert!(rep.series_equal, "series mismatch for q={q} d={d}: {rep:?}");
            assert_eq!(rep.group_order, gl_order(q, d));
        }
    }

    #[test]
    fn scaling_action_has_even_degree_invariants_only() {
        let rep = verify_dickson(3, 1, 8, 1 << 16).unwrap();
        let want: Vec<u64> = (0..=8).map(|dd| if dd % 2 == 0 { 1 } else { 0 }).collect();
        assert_eq!(rep.invariant_dims, want);
    }

    #[test]
    fn invariance_is_monotone_under_group_inclusion() {
        // subgroup generated by the transvection inside GL_2(F_2), and
        // the trivial subgroup inside the scaling group of GL_1(F_3)
        let s = prime_series(2, 2, None);
        let full = MatrixGroupAction::new(&s, gl_generators(&s.field, 2), 64).unwrap();
        let mut trans = identity_mat(&s.field, 2);
        trans[0][1] = s.field.one();
        let sub = MatrixGroupAction::new(&s, vec![trans], 64).unwrap();
        assert!(sub.order() < full.order());
        for dd in 0..=8u32 {
            let big = invariant_dimension(&full, dd, 1 << 16).unwrap();
            let small = invariant_dimension(&sub, dd, 1 << 16).unwrap();
            assert!(big <= small, "degree {dd}: {big} > {small}");
        }

        let s1 = prime_series(3, 1, None);
        let scaling = MatrixGroupAction::new(
            &s1,
            vec![vec![vec![c(&s1, 2)]]],
            8,
        )
        .unwrap();
        let trivial = MatrixGroupAction::new(&s1, vec![], 8).unwrap();
        for dd in 0..=6u32 {
            assert!(
                invariant_dimension(&scaling, dd, 1 << 16).unwrap()
                    <= invariant_dimension(&trivial, dd, 1 << 16).unwrap()
            );
        }
    }

    #[test]
    fn km_scaling_action_passes_with_predicted_norm() {
        // y -> zeta*y with zeta = -1 in F_3, x fixed; norm is
        // zeta^(m(m-1)/2) y^m = 2 y^2
        let ring = prime_series(3, 2, Some(10));
        let g = vec![
            vec![ring.field.one(), ring.field.zero()],
            vec![ring.field.zero(), c(&ring, 2)],
        ];
        let rep = km_check(&ring, vec![g], 64).unwrap();
        assert_eq!(rep.group_order, 2);
        assert!(rep.free_basis_ok, "{rep:?}");
        assert!(rep.params_ok, "{rep:?}");
        let y2 = ring.mul(&ring.var(1), &ring.var(1));
        assert_eq!(rep.norm_poly, ring.mul_scalar(&y2, &c(&ring, 2)));
    }

    #[test]
    fn km_translation_action_gives_artin_schreier_norm() {
        // y -> y + x over F_2: norm y(y+x) = y^2 + xy
        let ring = prime_series(2, 2, Some(10));
        let g = vec![
            vec![ring.field.one(), ring.field.zero()],
            vec![ring.field.one(), ring.field.one()],
        ];
        let rep = km_check(&ring, vec![g], 64).unwrap();
        assert_eq!(rep.group_order, 2);
        assert!(rep.free_basis_ok && rep.params_ok, "{rep:?}");
        let x = ring.var(0);
        let y = ring.var(1);
        let want = ring.add(&ring.mul(&y, &y), &ring.mul(&x, &y));
        assert_eq!(rep.norm_poly, want);
    }

    #[test]
    fn km_trivial_group_norm_is_y() {
        let ring = prime_series(2, 2, Some(6));
        let rep = km_check(&ring, vec![], 8).unwrap();
        assert_eq!(rep.group_order, 1);
        assert_eq!(rep.norm_poly, ring.var(1));
        assert!(rep.free_basis_ok && rep.params_ok);
    }

    #[test]
    fn km_rejects_actions_that_move_the_fixed_variables() {
        let ring = prime_series(2, 2, Some(8));
        let swap = vec![
            vec![ring.field.zero(), ring.field.one()],
            vec![ring.field.one(), ring.field.zero()],
        ];
        match km_check(&ring, vec![swap], 8) {
            Err(DickError::HypothesisViolated { condition, .. }) => {
                assert!(condition.contains("x1"));
            }
            other => panic!("expected hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn km_requires_headroom_above_the_group_order() {
        // order-3 scaling group over F_4 would need trunc > 3; give 3
        let fq = FqCtx::prime_power(2, 2).unwrap();
        let field = FieldCtx::trivial(&fq);
        let ring = SeriesCtx::new(&field, 1, Some(3));
        // any generator of F_4^* has order 3
        let gen = field
            .elements()
            .find(|a| !a.is_zero() && *a != field.one())
            .unwrap();
        match km_check(&ring, vec![vec![vec![gen]]], 8) {
            Err(DickError::CapacityExceeded(_)) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
