//! Gaussian elimination over any of our field contexts.
//!
//! Vectors are `Vec<El>`, matrices are slices of rows acting on column
//! vectors. Everything is exact; pivoting picks the first nonzero entry, so
//! results are deterministic.

use super::field::FieldCtx;
use super::fq::{FqCtx, FqElt};
use super::poly::Poly;

pub trait LinCtx {
    type El: Clone + PartialEq;
    fn zero(&self) -> Self::El;
    fn one(&self) -> Self::El;
    fn is_zero(&self, a: &Self::El) -> bool;
    fn add(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn sub(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn inv(&self, a: &Self::El) -> Option<Self::El>;
}

impl LinCtx for FqCtx {
    type El = FqElt;
    fn zero(&self) -> FqElt {
        FqCtx::zero(self)
    }
    fn one(&self) -> FqElt {
        FqCtx::one(self)
    }
    fn is_zero(&self, a: &FqElt) -> bool {
        FqCtx::is_zero(self, a)
    }
    fn add(&self, a: &FqElt, b: &FqElt) -> FqElt {
        FqCtx::add(self, a, b)
    }
    fn sub(&self, a: &FqElt, b: &FqElt) -> FqElt {
        FqCtx::sub(self, a, b)
    }
    fn mul(&self, a: &FqElt, b: &FqElt) -> FqElt {
        FqCtx::mul(self, a, b)
    }
    fn inv(&self, a: &FqElt) -> Option<FqElt> {
        FqCtx::inv(self, a)
    }
}

impl LinCtx for FieldCtx {
    type El = Poly;
    fn zero(&self) -> Poly {
        FieldCtx::zero(self)
    }
    fn one(&self) -> Poly {
        FieldCtx::one(self)
    }
    fn is_zero(&self, a: &Poly) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Poly, b: &Poly) -> Poly {
        FieldCtx::add(self, a, b)
    }
    fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        FieldCtx::sub(self, a, b)
    }
    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        FieldCtx::mul(self, a, b)
    }
    fn inv(&self, a: &Poly) -> Option<Poly> {
        FieldCtx::inv(self, a)
    }
}

/// Reduce rows in place to row echelon form; returns (pivot col per kept row).
fn echelon<L: LinCtx>(l: &L, rows: &mut Vec<Vec<L::El>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| !l.is_zero(&rows[i][col])) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = l.inv(&rows[r][col]).unwrap();
        for c in col..ncols {
            rows[r][c] = l.mul(&rows[r][c], &inv);
        }
        for i in 0..rows.len() {
            if i != r && !l.is_zero(&rows[i][col]) {
                let f = rows[i][col].clone();
                for c in col..ncols {
                    let s = l.mul(&f, &rows[r][c]);
                    rows[i][c] = l.sub(&rows[i][c], &s);
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank<L: LinCtx>(l: &L, mat: &[Vec<L::El>]) -> usize {
    if mat.is_empty() {
        return 0;
    }
    let ncols = mat[0].len();
    let mut rows: Vec<Vec<L::El>> = mat.to_vec();
    echelon(l, &mut rows, ncols).len()
}

/// Basis of the right kernel {v : mat v = 0}, one vector per free column,
/// in increasing free-column order with a 1 in that column.
pub fn kernel_basis<L: LinCtx>(l: &L, ncols: usize, mat: &[Vec<L::El>]) -> Vec<Vec<L::El>> {
    let mut rows: Vec<Vec<L::El>> = mat.to_vec();
    for row in &rows {
        assert_eq!(row.len(), ncols);
    }
    let pivots = echelon(l, &mut rows, ncols);
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![l.zero(); ncols];
        v[free] = l.one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = l.sub(&l.zero(), &rows[i][free]);
        }
        basis.push(v);
    }
    basis
}

/// Feed vectors in order; at the first v_j lying in the span of its
/// predecessors, return (j, c) with c_j = 1 and sum_i c_i v_i = 0.
pub fn solve_first_dependency<L: LinCtx>(
    l: &L,
    vecs: &[Vec<L::El>],
) -> Option<(usize, Vec<L::El>)> {
    let mut stored: Vec<(usize, Vec<L::El>, Vec<L::El>)> = Vec::new();
    for (j, v) in vecs.iter().enumerate() {
        let mut row = v.clone();
        let mut combo = vec![l.zero(); j + 1];
        combo[j] = l.one();
        for (pc, prow, pcombo) in &stored {
            if l.is_zero(&row[*pc]) {
                continue;
            }
            let f = row[*pc].clone();
            for (rc, pr) in row.iter_mut().zip(prow) {
                let s = l.mul(&f, pr);
                *rc = l.sub(rc, &s);
            }
            for (cc, pcb) in combo.iter_mut().zip(pcombo) {
                let s = l.mul(&f, pcb);
                *cc = l.sub(cc, &s);
            }
        }
        match row.iter().position(|a| !l.is_zero(a)) {
            None => return Some((j, combo)),
            Some(pc) => {
                let inv = l.inv(&row[pc]).unwrap();
                for a in row.iter_mut() {
                    *a = l.mul(a, &inv);
                }
                for a in combo.iter_mut() {
                    *a = l.mul(a, &inv);
                }
                combo.resize(vecs.len(), l.zero());
                stored.push((pc, row, combo));
            }
        }
    }
    None
}

/// One solution of mat x = rhs, or None if inconsistent.
pub fn solve<L: LinCtx>(l: &L, mat: &[Vec<L::El>], rhs: &[L::El]) -> Option<Vec<L::El>> {
    assert_eq!(mat.len(), rhs.len());
    if mat.is_empty() {
        return Some(Vec::new());
    }
    let ncols = mat[0].len();
    let mut rows: Vec<Vec<L::El>> = mat
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let pivots = echelon(l, &mut rows, ncols + 1);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![l.zero(); ncols];
    for (i, &pc) in pivots.iter().enumerate() {
        x[pc] = rows[i][ncols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> FqCtx {
        FqCtx::prime(3).unwrap()
    }

    fn m(ctx: &FqCtx, rows: &[&[u64]]) -> Vec<Vec<FqElt>> {
        rows.iter().map(|r| r.iter().map(|&k| ctx.from_index(k)).collect()).collect()
    }

    #[test]
    fn rank_and_kernel() {
        let ctx = f3();
        let a = m(&ctx, &[&[1, 2, 0], &[0, 1, 1], &[0, 0, 0]]);
        assert_eq!(rank(&ctx, &a), 2);
        let ker = kernel_basis(&ctx, 3, &a);
        assert_eq!(ker.len(), 1);
        for row in &a {
            let mut acc = ctx.zero();
            for (x, v) in row.iter().zip(&ker[0]) {
                acc = ctx.add(&acc, &ctx.mul(x, v));
            }
            assert!(ctx.is_zero(&acc));
        }
        // Singular matrix: rows sum to zero.
        let b = m(&ctx, &[&[1, 1], &[2, 2]]);
        assert_eq!(rank(&ctx, &b), 1);
        assert_eq!(kernel_basis(&ctx, 2, &b).len(), 1);
        assert_eq!(kernel_basis(&ctx, 4, &[]).len(), 4);
    }

    #[test]
    fn solve_finds_solutions_and_detects_inconsistency() {
        let ctx = f3();
        let a = m(&ctx, &[&[1, 1], &[0, 1]]);
        let rhs: Vec<FqElt> = vec![ctx.from_index(2), ctx.from_index(1)];
        let x = solve(&ctx, &a, &rhs).unwrap();
        assert_eq!(x, vec![ctx.from_index(1), ctx.from_index(1)]);
        let bad = m(&ctx, &[&[1, 1], &[2, 2]]);
        let rhs2: Vec<FqElt> = vec![ctx.from_index(1), ctx.from_index(1)];
        assert!(solve(&ctx, &bad, &rhs2).is_none());
    }

    #[test]
    fn first_dependency_has_unit_last_coefficient() {
        let ctx = f3();
        let vecs = m(&ctx, &[&[1, 0], &[0, 1], &[1, 2]]);
        let (j, combo) = solve_first_dependency(&ctx, &vecs).unwrap();
        assert_eq!(j, 2);
        assert_eq!(combo.len(), 3);
        assert_eq!(combo[2], ctx.one());
        let mut acc = vec![ctx.zero(); 2];
        for (c, v) in combo.iter().zip(&vecs) {
            for (a, x) in acc.iter_mut().zip(v) {
                *a = ctx.add(a, &ctx.mul(c, x));
            }
        }
        assert!(acc.iter().all(|a| ctx.is_zero(a)));
        // Independent family: no dependency at all.
        let indep = m(&ctx, &[&[1, 0], &[0, 1]]);
        assert!(solve_first_dependency(&ctx, &indep).is_none());
        // A zero vector is dependent immediately.
        let zero_first = m(&ctx, &[&[0, 0]]);
        assert_eq!(solve_first_dependency(&ctx, &zero_first).unwrap().0, 0);
    }
}
