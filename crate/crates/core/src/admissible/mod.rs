//! Congruence subgroups of Aut_A(N) for a primary torsion module
//! N = A/p^{n_1} x ... x A/p^{n_r}, cut out by entrywise valuation
//! conditions val(g_{ij} - delta_{ij}) >= m_{ij}.
//!
//! A matrix of exponents is *admissible* when the resulting set of
//! invertible matrices is closed under products, hence a group. Closure
//! is certified either by the triangle inequality on the canonicalized
//! exponents or, failing that, by exhaustive enumeration. The module
//! also computes the block/flag structure of the induced action on the
//! socle N[p] and the standard constructions (Borel-type gamma0,
//! principal-type gamma1, parabolic).

use serde::Serialize;
use thiserror::Error;

use crate::ffpoly::{FfError, Poly, PrimeInfo};
use crate::tormod::{ModAut, PrimaryModule, TorError};

pub mod jchain;

/// Default budget for enumerating a congruence set.
pub const DEFAULT_ENUM_CAP: u128 = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdmError {
    #[error("exponent m[{i}][{j}] = {got} exceeds the precision {max} of summand {j}")]
    BoundViolation { i: usize, j: usize, got: u32, max: u32 },
    #[error("rank bound d = {d} is smaller than the number of summands r = {r}")]
    RankBoundTooSmall { d: usize, r: usize },
    #[error("congruence set is not closed under products")]
    NotClosedUnderProduct,
    #[error("matrix dimensions do not match the module rank")]
    ShapeMismatch,
    #[error("partition must be nonempty with positive parts")]
    BadPartition,
    #[error("operation requires a standard shape (n, ..., n)")]
    NotStandardShape,
    #[error("block order is inconsistent (cycle between distinct blocks)")]
    InconsistentOrder,
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error(transparent)]
    Tor(#[from] TorError),
    #[error(transparent)]
    Ff(#[from] FfError),
}

/// How closure under products was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClosureCert {
    /// m_eff[i][k] <= m_eff[i][j] + m_eff[j][k] for all triples.
    Triangle,
    /// Verified by enumerating all products.
    Enumerated,
}

/// An admissible exponent matrix over a primary module, with the rank
/// bound d of the ambient problem and a closure certificate.
#[derive(Debug, Clone)]
pub struct CongruenceDatum {
    pub module: PrimaryModule,
    /// Exponents as given.
    pub m_given: Vec<Vec<u32>>,
    /// Canonicalized exponents: entry (i,j) raised to the valuation
    /// max(0, n_j - n_i) that every homomorphism already satisfies.
    pub m_eff: Vec<Vec<u32>>,
    pub d: usize,
    pub cert: ClosureCert,
}

/// Structure of the image K of H in Aut(N[p]): the set S of saturated
/// positions, its equivalence blocks in topological order, the stable
/// coordinate flag, and exactness of the image in the Levi quotient.
/// All indices are 0-based.
#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    /// Pairs (i,j) with m_eff[i][j] = n_j - n_i as signed integers.
    pub s_pairs: Vec<(usize, usize)>,
    pub s_transitive: bool,
    /// Equivalence classes under i ~ j iff i = j or both (i,j),(j,i) in S,
    /// listed with their elements sorted.
    pub classes: Vec<Vec<usize>>,
    /// Classes in increasing block order R_1 < ... < R_u.
    pub blocks: Vec<Vec<usize>>,
    pub block_sizes: Vec<usize>,
    /// Concatenation of blocks: position -> original coordinate.
    pub permutation: Vec<usize>,
    /// dim F_0 < dim F_1 < ... < dim F_u for the stable flag; F_s is
    /// spanned by the socle coordinates of the last s blocks.
    pub filtration_dims: Vec<usize>,
    /// Blocks s with (i,j) in S for all i,j in R_s; on these the Levi
    /// image is the full general linear group.
    pub r_blocks: Vec<usize>,
    pub group_order: u128,
    pub k_order: u128,
    pub levi_image_order: u128,
    /// Every matrix in K preserves every F_s.
    pub flag_preserved: bool,
    /// The image of K in the product of Levi factors equals the full
    /// product of GL_{d_s}(kappa) over s in r_blocks, identity elsewhere.
    pub levi_exact: bool,
}

/// Block data derived from the exponents alone (no enumeration).
struct BlockData {
    s_pairs: Vec<(usize, usize)>,
    transitive: bool,
    classes: Vec<Vec<usize>>,
    blocks: Vec<Vec<usize>>,
}

fn effective_exponents(module: &PrimaryModule, m: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let r = module.rank();
    (0..r)
        .map(|i| (0..r).map(|j| m[i][j].max(module.hom_exp(i, j))).collect())
        .collect()
}

/// Triangle inequality m_eff[i][k] <= m_eff[i][j] + m_eff[j][k] on the
/// canonicalization of m, for all triples including repeats.
pub fn triangle_inequality(module: &PrimaryModule, m: &[Vec<u32>]) -> bool {
    let m_eff = effective_exponents(module, m);
    let r = module.rank();
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                if m_eff[i][j] + m_eff[j][k] < m_eff[i][k] {
                    return false;
                }
            }
        }
    }
    true
}

/// All invertible matrices satisfying the congruences, unsorted.
fn congruence_set(
    module: &PrimaryModule,
    m_eff: &[Vec<u32>],
    cap: u128,
) -> Result<Vec<ModAut>, AdmError> {
    let r = module.rank();
    let q = module.prime.q_wp as u128;
    // Per-entry coset representatives delta_ij + p^e * w.
    let mut cosets: Vec<Vec<Vec<crate::ffpoly::ResElt>>> = Vec::with_capacity(r);
    let mut total: u128 = 1;
    for i in 0..r {
        let mut row = Vec::with_capacity(r);
        for j in 0..r {
            let ring = &module.rings[j];
            let e = m_eff[i][j];
            let free = module.shape[j] - e;
            let count = q
                .checked_pow(free)
                .ok_or_else(|| AdmError::CapacityExceeded("coset count overflows".into()))?;
            total = total
                .checked_mul(count)
                .ok_or_else(|| AdmError::CapacityExceeded("candidate count overflows".into()))?;
            let delta = if i == j { ring.one() } else { ring.zero() };
            let pe = ring.pi_pow(e);
            let mut reps = Vec::with_capacity(count as usize);
            for k in 0..count as u64 {
                let w = ring.from_index(k);
                reps.push(ring.add(&delta, &ring.mul(&pe, &w)));
            }
            row.push(reps);
        }
        cosets.push(row);
    }
    if total > cap {
        return Err(AdmError::CapacityExceeded(format!(
            "congruence set has {total} candidates, cap is {cap}"
        )));
    }
    let mut out = Vec::new();
    let mut odo = vec![0usize; r * r];
    loop {
        let rows: Vec<Vec<crate::ffpoly::ResElt>> = (0..r)
            .map(|i| (0..r).map(|j| cosets[i][j][odo[i * r + j]].clone()).collect())
            .collect();
        let g = ModAut { m: rows };
        if module.is_automorphism(&g) {
            out.push(g);
        }
        let mut pos = 0;
        loop {
            if pos == r * r {
                return Ok(out);
            }
            odo[pos] += 1;
            if odo[pos] < cosets[pos / r][pos % r].len() {
                break;
            }
            odo[pos] = 0;
            pos += 1;
        }
    }
}

fn closed_under_products(module: &PrimaryModule, list: &[ModAut]) -> bool {
    let set: std::collections::HashSet<&ModAut> = list.iter().collect();
    for g in list {
        for h in list {
            if !set.contains(&module.compose(g, h)) {
                return false;
            }
        }
    }
    true
}

impl CongruenceDatum {
    /// Validate exponents against the shape, canonicalize, and certify
    /// closure: by the triangle inequality when it holds, otherwise by
    /// enumerating all products within the given cap.
    pub fn build(
        prime: &PrimeInfo,
        shape: &[u32],
        m: Vec<Vec<u32>>,
        d: usize,
        cap: u128,
    ) -> Result<CongruenceDatum, AdmError> {
        let module = PrimaryModule::new(prime, shape)?;
        let r = module.rank();
        if d < r {
            return Err(AdmError::RankBoundTooSmall { d, r });
        }
        if m.len() != r || m.iter().any(|row| row.len() != r) {
            return Err(AdmError::ShapeMismatch);
        }
        for (i, row) in m.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                if e > shape[j] {
                    return Err(AdmError::BoundViolation { i, j, got: e, max: shape[j] });
                }
            }
        }
        let m_eff = effective_exponents(&module, &m);
        let cert = if triangle_inequality(&module, &m) {
            ClosureCert::Triangle
        } else {
            let list = congruence_set(&module, &m_eff, cap)?;
            if !closed_under_products(&module, &list) {
                return Err(AdmError::NotClosedUnderProduct);
            }
            ClosureCert::Enumerated
        };
        Ok(CongruenceDatum { module, m_given: m, m_eff, d, cert })
    }

    pub fn rank(&self) -> usize {
        self.module.rank()
    }

    /// Number of elements, as the product of coset sizes over the
    /// entries intersected with the invertibility condition; computed by
    /// enumeration.
    pub fn order(&self, cap: u128) -> Result<u128, AdmError> {
        Ok(self.enumerate(cap)?.len() as u128)
    }

    /// Membership test: entrywise congruences plus invertibility.
    pub fn contains(&self, g: &ModAut) -> Result<bool, AdmError> {
        let r = self.rank();
        if g.m.len() != r || g.m.iter().any(|row| row.len() != r) {
            return Err(AdmError::ShapeMismatch);
        }
        for i in 0..r {
            for j in 0..r {
                let ring = &self.module.rings[j];
                let delta = if i == j { ring.one() } else { ring.zero() };
                let diff = ring.sub(&g.m[i][j], &delta);
                if let Some(v) = ring.val(&diff) {
                    if v < self.m_eff[i][j] {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(self.module.is_automorphism(g))
    }

    /// All elements in canonical order (lexicographic on the entries,
    /// row-major, entries ordered by their ring index).
    pub fn enumerate(&self, cap: u128) -> Result<Vec<ModAut>, AdmError> {
        let mut list = congruence_set(&self.module, &self.m_eff, cap)?;
        list.sort();
        Ok(list)
    }

    /// Rows of the canonicalized exponents with the diagonal bumped to 1
    /// at positions where the entry and its mirror both vanish; these
    /// are the congruence exponents of the kernel of the Levi projection.
    pub fn m_prime(&self) -> Result<Vec<Vec<u32>>, AdmError> {
        if !self.is_standard_shape() {
            return Err(AdmError::NotStandardShape);
        }
        let r = self.rank();
        let mp = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| {
                        if self.m_eff[i][j] == 0 && self.m_eff[j][i] == 0 {
                            1
                        } else {
                            self.m_eff[i][j]
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(mp)
    }

    pub fn is_standard_shape(&self) -> bool {
        self.module.shape.windows(2).all(|w| w[0] == w[1])
    }

    /// Matrix of the action on the socle N[p] in the basis p^{n_i - 1} e_i,
    /// with entries in the residue field.
    pub fn socle_matrix(&self, g: &ModAut) -> Vec<Vec<Poly>> {
        let r = self.rank();
        (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| {
                        let ring = &self.module.rings[j];
                        let x = ring.mul(&g.m[i][j], &ring.pi_pow(self.module.shape[i] - 1));
                        let digits = ring.digits(&x);
                        digits[self.module.shape[j] as usize - 1].clone()
                    })
                    .collect()
            })
            .collect()
    }

    /// Block, flag and Levi structure of the socle image. Enumerates the
    /// group, so subject to the cap.
    pub fn analyze(&self, cap: u128) -> Result<StructureReport, AdmError> {
        let bd = block_structure(&self.module, &self.m_eff)?;
        let r = self.rank();
        let u = bd.blocks.len();
        let kappa = &self.module.prime.kappa;
        let q = self.module.prime.q_wp;

        let block_sizes: Vec<usize> = bd.blocks.iter().map(|b| b.len()).collect();
        let permutation: Vec<usize> = bd.blocks.iter().flatten().copied().collect();
        let mut filtration_dims = vec![0usize];
        for s in 1..=u {
            filtration_dims.push(filtration_dims[s - 1] + block_sizes[u - s]);
        }
        let in_s = |i: usize, j: usize| bd.s_pairs.binary_search(&(i, j)).is_ok();
        let r_blocks: Vec<usize> = (0..u)
            .filter(|&s| {
                bd.blocks[s].iter().all(|&i| bd.blocks[s].iter().all(|&j| in_s(i, j)))
            })
            .collect();

        let list = self.enumerate(cap)?;
        let group_order = list.len() as u128;

        // F_s as a coordinate membership mask, s = 1..u.
        let mut masks: Vec<Vec<bool>> = Vec::with_capacity(u);
        let mut mask = vec![false; r];
        for s in 1..=u {
            for &i in &bd.blocks[u - s] {
                mask[i] = true;
            }
            masks.push(mask.clone());
        }

        let mut k_set: Vec<Vec<Vec<Poly>>> = list.iter().map(|g| self.socle_matrix(g)).collect();
        k_set.sort();
        k_set.dedup();
        let k_order = k_set.len() as u128;

        let mut flag_preserved = true;
        for b in &k_set {
            for m in &masks {
                for i in 0..r {
                    if !m[i] {
                        continue;
                    }
                    for j in 0..r {
                        if !m[j] && !b[i][j].is_zero() {
                            flag_preserved = false;
                        }
                    }
                }
            }
        }

        // Tuple of diagonal blocks, in block order.
        let mut tuples: Vec<Vec<Vec<Poly>>> = k_set
            .iter()
            .map(|b| {
                bd.blocks
                    .iter()
                    .map(|blk| {
                        let mut flat = Vec::with_capacity(blk.len() * blk.len());
                        for &i in blk {
                            for &j in blk {
                                flat.push(b[i][j].clone());
                            }
                        }
                        flat
                    })
                    .collect()
            })
            .collect();
        tuples.sort();
        tuples.dedup();
        let levi_image_order = tuples.len() as u128;

        let is_r = |s: usize| r_blocks.binary_search(&s).is_ok();
        let mut off_r_trivial = true;
        for t in &tuples {
            for s in 0..u {
                if is_r(s) {
                    continue;
                }
                let k = block_sizes[s];
                for a in 0..k {
                    for b in 0..k {
                        let want = if a == b { kappa.one() } else { kappa.zero() };
                        if t[s][a * k + b] != want {
                            off_r_trivial = false;
                        }
                    }
                }
            }
        }
        let expected: u128 = r_blocks.iter().map(|&s| gl_order(q, block_sizes[s])).product();
        let levi_exact = off_r_trivial && levi_image_order == expected;

        Ok(StructureReport {
            s_pairs: bd.s_pairs,
            s_transitive: bd.transitive,
            classes: bd.classes,
            blocks: bd.blocks,
            block_sizes,
            permutation,
            filtration_dims,
            r_blocks,
            group_order,
            k_order,
            levi_image_order,
            flag_preserved,
            levi_exact,
        })
    }

    /// Whether the rows of m_prime agree within every block.
    pub fn block_row_constancy(&self) -> Result<bool, AdmError> {
        let mp = self.m_prime()?;
        let bd = block_structure(&self.module, &self.m_eff)?;
        for blk in &bd.blocks {
            for w in blk.windows(2) {
                if mp[w[0]] != mp[w[1]] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Extend the congruence data through the embedding of N into
    /// (A/p^n)^d that scales coordinate i by p^{n - n_i}: the subgroup of
    /// matrices that stabilize the image of N and restrict to an element
    /// of H on it.
    pub fn tilde_lift(&self, n: u32, d: usize, cap: u128) -> Result<CongruenceDatum, AdmError> {
        let r = self.rank();
        let shape = &self.module.shape;
        if d < self.d || d < r {
            return Err(AdmError::RankBoundTooSmall { d, r: self.d.max(r) });
        }
        if shape.iter().any(|&ni| ni > n) {
            return Err(AdmError::BoundViolation {
                i: 0,
                j: 0,
                got: *shape.iter().max().unwrap(),
                max: n,
            });
        }
        let mut mt = vec![vec![0u32; d]; d];
        for i in 0..d {
            for j in 0..d {
                mt[i][j] = if i < r && j < r {
                    let s = self.m_eff[i][j] as i64 + shape[i] as i64 - shape[j] as i64;
                    s.max(0) as u32
                } else if i < r {
                    shape[i]
                } else {
                    0
                };
            }
        }
        CongruenceDatum::build(&self.module.prime, &vec![n; d], mt, d, cap)
    }
}

/// Order of GL_k over a field with q elements.
pub fn gl_order(q: u64, k: usize) -> u128 {
    let qk = (0..k).fold(1u128, |a, _| a * q as u128);
    let mut qi = 1u128;
    let mut out = 1u128;
    for _ in 0..k {
        out *= qk - qi;
        qi *= q as u128;
    }
    out
}

fn block_structure(module: &PrimaryModule, m_eff: &[Vec<u32>]) -> Result<BlockData, AdmError> {
    let r = module.rank();
    let shape = &module.shape;
    let mut s_pairs = Vec::new();
    for i in 0..r {
        for j in 0..r {
            if m_eff[i][j] as i64 == shape[j] as i64 - shape[i] as i64 {
                s_pairs.push((i, j));
            }
        }
    }
    let in_s = |i: usize, j: usize| s_pairs.binary_search(&(i, j)).is_ok();
    let mut transitive = true;
    for &(i, j) in &s_pairs {
        for &(j2, k) in &s_pairs {
            if j == j2 && !in_s(i, k) {
                transitive = false;
            }
        }
    }

    // Union-find for i ~ j iff both directions are in S.
    let mut parent: Vec<usize> = (0..r).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..r {
        for j in 0..r {
            if i != j && in_s(i, j) && in_s(j, i) {
                let a = find(&mut parent, i);
                let b = find(&mut parent, j);
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    {
        let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..r {
            let root = find(&mut parent, i);
            by_root.entry(root).or_default().push(i);
        }
        classes.extend(by_root.into_values());
    }

    // Order classes by S-edges; stable topological sort, preferring the
    // smallest original index among the available classes.
    let c = classes.len();
    let class_of = {
        let mut v = vec![0usize; r];
        for (ci, blk) in classes.iter().enumerate() {
            for &i in blk {
                v[i] = ci;
            }
        }
        v
    };
    let mut edges = vec![vec![false; c]; c];
    for &(i, j) in &s_pairs {
        let (a, b) = (class_of[i], class_of[j]);
        if a != b {
            edges[a][b] = true;
        }
    }
    let mut placed = vec![false; c];
    let mut blocks = Vec::with_capacity(c);
    for _ in 0..c {
        let mut pick = None;
        for a in 0..c {
            if placed[a] {
                continue;
            }
            if (0..c).any(|b| !placed[b] && b != a && edges[b][a]) {
                continue;
            }
            if pick.map_or(true, |p: usize| classes[a][0] < classes[p][0]) {
                pick = Some(a);
            }
        }
        let a = pick.ok_or(AdmError::InconsistentOrder)?;
        placed[a] = true;
        blocks.push(classes[a].clone());
    }
    Ok(BlockData { s_pairs, transitive, classes, blocks })
}

/// Matrices congruent to the identity below the last row, with the last
/// row free modulo p^n off the diagonal is forbidden: concretely, on
/// (A/p^n)^d the exponents are m[d-1][j] = n for j < d-1 and 0 elsewhere.
pub fn gamma0(prime: &PrimeInfo, d: usize, n: u32) -> Result<CongruenceDatum, AdmError> {
    if d == 0 || n == 0 {
        return Err(AdmError::BadPartition);
    }
    let mut m = vec![vec![0u32; d]; d];
    for j in 0..d - 1 {
        m[d - 1][j] = n;
    }
    CongruenceDatum::build(prime, &vec![n; d], m, d, DEFAULT_ENUM_CAP)
}

/// gamma0 with the additional congruence g[d-1][d-1] = 1 mod p^n.
pub fn gamma1(prime: &PrimeInfo, d: usize, n: u32) -> Result<CongruenceDatum, AdmError> {
    if d == 0 || n == 0 {
        return Err(AdmError::BadPartition);
    }
    let mut m = vec![vec![0u32; d]; d];
    for j in 0..d {
        m[d - 1][j] = n;
    }
    CongruenceDatum::build(prime, &vec![n; d], m, d, DEFAULT_ENUM_CAP)
}

/// Block upper-triangular matrices mod p^n for the given composition of
/// d: m[i][j] = n whenever the block of i is later than the block of j.
pub fn parabolic(prime: &PrimeInfo, partition: &[usize], n: u32) -> Result<CongruenceDatum, AdmError> {
    if partition.is_empty() || partition.iter().any(|&k| k == 0) || n == 0 {
        return Err(AdmError::BadPartition);
    }
    let d: usize = partition.iter().sum();
    let mut block = vec![0usize; d];
    let mut pos = 0;
    for (b, &k) in partition.iter().enumerate() {
        for _ in 0..k {
            block[pos] = b;
            pos += 1;
        }
    }
    let mut m = vec![vec![0u32; d]; d];
    for i in 0..d {
        for j in 0..d {
            if block[i] > block[j] {
                m[i][j] = n;
            }
        }
    }
    CongruenceDatum::build(prime, &vec![n; d], m, d, DEFAULT_ENUM_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::{prime_data, FqCtx, Poly};

    fn t_prime(q: u64) -> PrimeInfo {
        let fq = FqCtx::prime(q).unwrap();
        prime_data(&fq, &Poly::t(&fq)).unwrap()
    }

    fn quad_prime_q2() -> PrimeInfo {
        // t^2 + t + 1 over F_2, residue field of size 4
        let fq = FqCtx::prime(2).unwrap();
        prime_data(&fq, &Poly::from_indices(&fq, &[1, 1, 1])).unwrap()
    }

    fn borel(q: u64, n: u32) -> CongruenceDatum {
        gamma0(&t_prime(q), 2, n).unwrap()
    }

    #[test]
    fn borel_orders_match_counting() {
        // Upper-triangular invertibles over F_q: (q-1)^2 q.
        let h2 = borel(2, 1);
        assert_eq!(h2.cert, ClosureCert::Triangle);
        let list = h2.enumerate(1 << 12).unwrap();
        assert_eq!(list.len(), 2);
        let h3 = borel(3, 1);
        assert_eq!(h3.order(1 << 12).unwrap(), 12);
        // Residue field of size 4: (4-1)^2 * 4.
        let h4 = gamma0(&quad_prime_q2(), 2, 1).unwrap();
        assert_eq!(h4.order(1 << 12).unwrap(), 36);
    }

    #[test]
    fn full_aut_order_is_gl2() {
        for q in [2u64, 3] {
            let pr = t_prime(q);
            let h = CongruenceDatum::build(&pr, &[1, 1], vec![vec![0; 2]; 2], 2, 1 << 12).unwrap();
            assert_eq!(h.order(1 << 12).unwrap(), gl_order(q, 2));
        }
    }

    #[test]
    fn build_rejects_bad_input() {
        let pr = t_prime(2);
        let e = CongruenceDatum::build(&pr, &[1, 1], vec![vec![0, 2], vec![0, 0]], 2, 1 << 12);
        assert_eq!(e.unwrap_err(), AdmError::BoundViolation { i: 0, j: 1, got: 2, max: 1 });
        let e = CongruenceDatum::build(&pr, &[1, 1, 1], vec![vec![0; 3]; 3], 2, 1 << 12);
        assert_eq!(e.unwrap_err(), AdmError::RankBoundTooSmall { d: 2, r: 3 });
        let e = CongruenceDatum::build(&pr, &[1, 1], vec![vec![0; 2]; 3], 2, 1 << 12);
        assert_eq!(e.unwrap_err(), AdmError::ShapeMismatch);
    }

    #[test]
    fn nonclosed_exponents_are_rejected() {
        // On (A/p^2)^2 the set 1 + [[p^2, p], [1, p^2]] contains
        // 1 + p E_12 and 1 + E_21 but not their product.
        let pr = t_prime(2);
        let e = CongruenceDatum::build(&pr, &[2, 2], vec![vec![2, 1], vec![0, 2]], 2, 1 << 12);
        assert_eq!(e.unwrap_err(), AdmError::NotClosedUnderProduct);
    }

    #[test]
    fn closure_matches_triangle_on_small_sweep() {
        // All exponent matrices on (A/p^2)^2 over F_2: the certificate
        // route and brute-force closure of the congruence set agree.
        let pr = t_prime(2);
        let module = PrimaryModule::new(&pr, &[2, 2]).unwrap();
        for code in 0..81u32 {
            let mut c = code;
            let mut m = vec![vec![0u32; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] = c % 3;
                    c /= 3;
                }
            }
            let tri = triangle_inequality(&module, &m);
            let m_eff = effective_exponents(&module, &m);
            let list = congruence_set(&module, &m_eff, 1 << 12).unwrap();
            let closed = closed_under_products(&module, &list);
            assert_eq!(tri, closed, "m = {m:?}");
            let built = CongruenceDatum::build(&pr, &[2, 2], m.clone(), 2, 1 << 12);
            assert_eq!(built.is_ok(), closed, "m = {m:?}");
            if let Ok(h) = built {
                assert_eq!(h.cert, ClosureCert::Triangle);
                assert!(h.block_row_constancy().unwrap(), "m = {m:?}");
            }
        }
    }

    #[test]
    fn enumerate_is_sorted_and_group_closed() {
        let h = borel(3, 1);
        let list = h.enumerate(1 << 12).unwrap();
        assert!(list.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(list[0], h.module.identity());
        for g in &list {
            assert!(h.contains(g).unwrap());
            let inv = h.module.inverse(g).unwrap();
            assert!(h.contains(&inv).unwrap());
            for k in &list {
                assert!(h.contains(&h.module.compose(g, k)).unwrap());
            }
        }
    }

    #[test]
    fn contains_checks_congruences() {
        let h = borel(2, 1);
        let module = &h.module;
        let ring = &module.rings[0];
        let upper = ModAut {
            m: vec![vec![ring.one(), ring.one()], vec![ring.zero(), ring.one()]],
        };
        let lower = ModAut {
            m: vec![vec![ring.one(), ring.zero()], vec![ring.one(), ring.one()]],
        };
        assert!(h.contains(&upper).unwrap());
        assert!(!h.contains(&lower).unwrap());
        let bad = ModAut { m: vec![vec![ring.one()]] };
        assert_eq!(h.contains(&bad).unwrap_err(), AdmError::ShapeMismatch);
        // Non-invertible matrix satisfying every congruence.
        let sing = ModAut {
            m: vec![vec![ring.one(), ring.one()], vec![ring.zero(), ring.zero()]],
        };
        assert!(!h.contains(&sing).unwrap());
    }

    #[test]
    fn gamma1_is_normal_in_gamma0_with_unit_group_quotient() {
        for (q, n) in [(2u64, 2u32), (3, 1)] {
            let pr = t_prime(q);
            let g0 = gamma0(&pr, 2, n).unwrap();
            let g1 = gamma1(&pr, 2, n).unwrap();
            let l0 = g0.enumerate(1 << 16).unwrap();
            let l1 = g1.enumerate(1 << 16).unwrap();
            let qn = (q as u128).pow(n - 1) * (q as u128 - 1);
            assert_eq!(l0.len() as u128 / l1.len() as u128, qn);
            for g in &l0 {
                let gi = g0.module.inverse(g).unwrap();
                for h in &l1 {
                    let conj = g0.module.compose(&g0.module.compose(&gi, h), g);
                    assert!(g1.contains(&conj).unwrap());
                }
            }
        }
    }

    #[test]
    fn parabolic_agrees_with_gamma0_and_full_group() {
        let pr = t_prime(2);
        let p11 = parabolic(&pr, &[1, 1], 1).unwrap();
        let g0 = gamma0(&pr, 2, 1).unwrap();
        assert_eq!(p11.enumerate(1 << 12).unwrap(), g0.enumerate(1 << 12).unwrap());
        let pd = parabolic(&pr, &[2], 1).unwrap();
        assert_eq!(pd.order(1 << 12).unwrap(), gl_order(2, 2));
        assert_eq!(parabolic(&pr, &[], 1).unwrap_err(), AdmError::BadPartition);
        assert_eq!(parabolic(&pr, &[1, 0], 1).unwrap_err(), AdmError::BadPartition);
    }

    #[test]
    fn analyze_gamma0_borel() {
        let h = borel(2, 1);
        let rep = h.analyze(1 << 12).unwrap();
        assert_eq!(rep.s_pairs, vec![(0, 0), (0, 1), (1, 1)]);
        assert!(rep.s_transitive);
        assert_eq!(rep.blocks, vec![vec![0], vec![1]]);
        assert_eq!(rep.permutation, vec![0, 1]);
        assert_eq!(rep.filtration_dims, vec![0, 1, 2]);
        assert_eq!(rep.r_blocks, vec![0, 1]);
        assert_eq!(rep.group_order, 2);
        assert_eq!(rep.k_order, 2);
        assert_eq!(rep.levi_image_order, 1);
        assert!(rep.flag_preserved);
        assert!(rep.levi_exact);
    }

    #[test]
    fn analyze_gamma1_excludes_last_block_from_r() {
        let pr = t_prime(2);
        let h = gamma1(&pr, 2, 2).unwrap();
        let rep = h.analyze(1 << 16).unwrap();
        assert_eq!(rep.s_pairs, vec![(0, 0), (0, 1)]);
        assert_eq!(rep.blocks, vec![vec![0], vec![1]]);
        assert_eq!(rep.r_blocks, vec![0]);
        assert_eq!(rep.group_order, 8);
        assert_eq!(rep.k_order, 2);
        assert_eq!(rep.levi_image_order, 1);
        assert!(rep.flag_preserved);
        assert!(rep.levi_exact);
    }

    #[test]
    fn analyze_full_aut_on_mixed_shape() {
        // Aut(A/p + A/p^2): the socle image is block upper triangular
        // with both Levi factors full.
        let pr = t_prime(3);
        let h = CongruenceDatum::build(&pr, &[1, 2], vec![vec![0; 2]; 2], 2, 1 << 16).unwrap();
        let rep = h.analyze(1 << 16).unwrap();
        assert_eq!(rep.s_pairs, vec![(0, 0), (0, 1), (1, 1)]);
        assert_eq!(rep.blocks, vec![vec![0], vec![1]]);
        assert_eq!(rep.filtration_dims, vec![0, 1, 2]);
        assert_eq!(rep.r_blocks, vec![0, 1]);
        assert_eq!(rep.k_order, 12);
        assert_eq!(rep.levi_image_order, 4);
        assert!(rep.flag_preserved);
        assert!(rep.levi_exact);
        assert!(rep.s_transitive);
    }

    #[test]
    fn analyze_merges_symmetric_pairs_into_one_block() {
        let pr = t_prime(2);
        let h = CongruenceDatum::build(&pr, &[1, 1], vec![vec![0; 2]; 2], 2, 1 << 12).unwrap();
        let rep = h.analyze(1 << 12).unwrap();
        assert_eq!(rep.blocks, vec![vec![0, 1]]);
        assert_eq!(rep.block_sizes, vec![2]);
        assert_eq!(rep.filtration_dims, vec![0, 2]);
        assert_eq!(rep.r_blocks, vec![0]);
        assert_eq!(rep.k_order, 6);
        assert_eq!(rep.levi_image_order, 6);
        assert!(rep.levi_exact);
    }

    fn embed_point(
        tilde: &PrimaryModule,
        small: &PrimaryModule,
        x: &crate::tormod::TorElt,
    ) -> crate::tormod::TorElt {
        let n = tilde.shape[0];
        let d = tilde.rank();
        let r = small.rank();
        let mut c = Vec::with_capacity(d);
        for j in 0..d {
            let ring = &tilde.rings[j];
            if j < r {
                let scaled = ring.mul(&ring.pi_pow(n - small.shape[j]), &ring.reduce(&x.c[j].0));
                c.push(scaled);
            } else {
                c.push(ring.zero());
            }
        }
        crate::tormod::TorElt { c }
    }

    fn restriction_in(
        h: &CongruenceDatum,
        tilde: &PrimaryModule,
        g: &ModAut,
    ) -> bool {
        // g must map the embedded copy of N into itself; if so, read off
        // the restriction matrix and test membership in H.
        let small = &h.module;
        let n = tilde.shape[0];
        let r = small.rank();
        let d = tilde.rank();
        let mut rows = Vec::with_capacity(r);
        for i in 0..r {
            let gen = embed_point(tilde, small, &small.generator(i));
            let img = tilde.apply(g, &gen);
            let mut row = Vec::with_capacity(r);
            for j in 0..d {
                let ring = &tilde.rings[j];
                let digits = ring.digits(&img.c[j]);
                if j < r {
                    let lead = n - small.shape[j];
                    if digits[..lead as usize].iter().any(|p| !p.is_zero()) {
                        return false;
                    }
                    let sring = &small.rings[j];
                    row.push(sring.from_digits(&digits[lead as usize..]));
                } else if !ring.is_zero(&img.c[j]) {
                    return false;
                }
            }
            rows.push(row);
        }
        match small.hom_from_rows(rows) {
            Ok(res) => small.is_automorphism(&res) && h.contains(&res).unwrap(),
            Err(_) => false,
        }
    }

    #[test]
    fn tilde_lift_matches_stabilizer_enumeration() {
        let pr = t_prime(2);
        // Trivial subgroup of Aut(A/p) inside (A/p)^2.
        let triv = CongruenceDatum::build(&pr, &[1], vec![vec![1]], 2, 1 << 12).unwrap();
        let lift = triv.tilde_lift(1, 2, 1 << 12).unwrap();
        assert_eq!(lift.m_eff, vec![vec![1, 1], vec![0, 0]]);
        assert_eq!(lift.order(1 << 12).unwrap(), 2);

        // Full automorphisms of A/p + A/p^2 inside (A/p^2)^2.
        let full = CongruenceDatum::build(&pr, &[1, 2], vec![vec![0; 2]; 2], 2, 1 << 16).unwrap();
        let lift2 = full.tilde_lift(2, 2, 1 << 16).unwrap();
        assert_eq!(lift2.m_eff, vec![vec![0, 0], vec![1, 0]]);

        for (h, lifted, n, d) in [(&triv, &lift, 1u32, 2usize), (&full, &lift2, 2, 2)] {
            let tilde = PrimaryModule::new(&pr, &vec![n; d]).unwrap();
            let ambient =
                CongruenceDatum::build(&pr, &vec![n; d], vec![vec![0; d]; d], d, 1 << 16).unwrap();
            let all = ambient.enumerate(1 << 16).unwrap();
            let stab: Vec<&ModAut> =
                all.iter().filter(|g| restriction_in(h, &tilde, g)).collect();
            let listed = lifted.enumerate(1 << 16).unwrap();
            assert_eq!(stab.len(), listed.len());
            for g in stab {
                assert!(lifted.contains(g).unwrap());
            }
        }
    }

    #[test]
    fn tilde_lift_with_identical_ambient_is_identity() {
        let pr = t_prime(2);
        let h = gamma0(&pr, 2, 2).unwrap();
        let lift = h.tilde_lift(2, 2, 1 << 16).unwrap();
        assert_eq!(lift.m_eff, h.m_eff);
        assert_eq!(lift.cert, ClosureCert::Triangle);
    }

    #[test]
    fn triangle_examples() {
        let pr = t_prime(2);
        let module = PrimaryModule::new(&pr, &[2, 2]).unwrap();
        assert!(!triangle_inequality(&module, &[vec![2, 1], vec![0, 2]]));
        assert!(triangle_inequality(&module, &[vec![0, 0], vec![2, 0]]));
        let mixed = PrimaryModule::new(&pr, &[1, 2]).unwrap();
        assert!(triangle_inequality(&mixed, &[vec![0, 0], vec![0, 0]]));
    }

    #[test]
    fn block_row_constancy_on_parabolic() {
        let pr = t_prime(2);
        let p = parabolic(&pr, &[2, 1], 1).unwrap();
        assert!(p.block_row_constancy().unwrap());
        let mixed = CongruenceDatum::build(&pr, &[1, 2], vec![vec![0; 2]; 2], 2, 1 << 12).unwrap();
        assert_eq!(mixed.m_prime().unwrap_err(), AdmError::NotStandardShape);
    }

    #[test]
    fn socle_matrix_reduces_correctly_on_standard_shape() {
        let pr = t_prime(2);
        let h = gamma0(&pr, 2, 2).unwrap();
        for g in h.enumerate(1 << 16).unwrap() {
            let b = h.socle_matrix(&g);
            let red = h.module.reduction_matrix(&g);
            assert_eq!(b, red);
        }
    }
}
