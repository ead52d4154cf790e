//! Finite torsion A-modules N = ⊕_p ⊕_i A/p^{n_i}, their submodules, and
//! the right action of module automorphisms on row vectors.
//!
//! Everything is desk scale by design: submodules keep explicit element sets
//! when |N| <= 2^16 and fall back to a rectangular per-coordinate ideal
//! description when they can; operations that genuinely need enumeration
//! reject larger inputs with CapacityExceeded instead of approximating.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffpoly::{
    factor_monic, prime_data, rank, FfError, FqCtx, Poly, PrimeInfo, ResCtx, ResElt,
};

pub const EXPLICIT_CAP: u128 = 1 << 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TorError {
    #[error("constant divisor has no torsion quotient")]
    ConstantDivisor,
    #[error("prime is not in the support of the module")]
    PrimeNotInSupport,
    #[error("entry ({i},{j}) is not a homomorphism: valuation {got:?}, need >= {need}")]
    NotAHomomorphism { i: usize, j: usize, got: Option<u32>, need: u32 },
    #[error("module map is not invertible")]
    NotInvertible,
    #[error("shape mismatch between operands")]
    ShapeMismatch,
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error(transparent)]
    Ff(#[from] FfError),
}

/// One p-primary block ⊕_i A/p^{n_i}. The shape may be in any order here;
/// `TorsionModule` normalizes its components to ascending shapes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimaryModule {
    pub prime: PrimeInfo,
    pub shape: Vec<u32>,
    pub rings: Vec<ResCtx>,
}

/// Element of a primary module: one residue class per coordinate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TorElt {
    pub c: Vec<ResElt>,
}

/// Element of a full torsion module: one part per primary component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModElt {
    pub parts: Vec<TorElt>,
}

/// A-linear endomorphism as a matrix (m[i][j]) acting on row vectors from
/// the right; entry (i,j) is the image of the i-th generator's j-th
/// coordinate, a class in ring j with valuation >= max(0, n_j - n_i).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModAut {
    pub m: Vec<Vec<ResElt>>,
}

impl PrimaryModule {
    pub fn new(prime: &PrimeInfo, shape: &[u32]) -> Result<PrimaryModule, TorError> {
        if shape.is_empty() || shape.iter().any(|&n| n == 0) {
            return Err(TorError::CapacityExceeded("shape entries must be >= 1".into()));
        }
        let rings = shape
            .iter()
            .map(|&n| ResCtx::new(prime, n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PrimaryModule { prime: prime.clone(), shape: shape.to_vec(), rings })
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn size(&self) -> u128 {
        self.shape.iter().map(|&n| (self.prime.q_wp as u128).pow(n)).product()
    }

    /// Hom exponent: images of the i-th generator in coordinate j must have
    /// valuation at least this.
    pub fn hom_exp(&self, i: usize, j: usize) -> u32 {
        self.shape[j].saturating_sub(self.shape[i])
    }

    pub fn zero(&self) -> TorElt {
        TorElt { c: self.rings.iter().map(|r| r.zero()).collect() }
    }

    pub fn generator(&self, i: usize) -> TorElt {
        let mut x = self.zero();
        x.c[i] = self.rings[i].one();
        x
    }

    pub fn add(&self, a: &TorElt, b: &TorElt) -> TorElt {
        TorElt {
            c: self
                .rings
                .iter()
                .zip(a.c.iter().zip(&b.c))
                .map(|(r, (x, y))| r.add(x, y))
                .collect(),
        }
    }

    pub fn sub(&self, a: &TorElt, b: &TorElt) -> TorElt {
        TorElt {
            c: self
                .rings
                .iter()
                .zip(a.c.iter().zip(&b.c))
                .map(|(r, (x, y))| r.sub(x, y))
                .collect(),
        }
    }

    pub fn neg(&self, a: &TorElt) -> TorElt {
        TorElt { c: self.rings.iter().zip(&a.c).map(|(r, x)| r.neg(x)).collect() }
    }

    pub fn is_zero(&self, a: &TorElt) -> bool {
        a.c.iter().all(|x| x.0.is_zero())
    }

    pub fn scalar_mul(&self, f: &Poly, a: &TorElt) -> TorElt {
        TorElt {
            c: self
                .rings
                .iter()
                .zip(&a.c)
                .map(|(r, x)| r.reduce(&f.mul(&self.prime.fq, &x.0)))
                .collect(),
        }
    }

    pub fn index(&self, a: &TorElt) -> u128 {
        let mut k: u128 = 0;
        for (r, x) in self.rings.iter().zip(&a.c).rev() {
            k = k * r.size() as u128 + r.index(x) as u128;
        }
        k
    }

    pub fn from_index(&self, mut k: u128) -> TorElt {
        let c = self
            .rings
            .iter()
            .map(|r| {
                let s = r.size() as u128;
                let x = r.from_index((k % s) as u64);
                k /= s;
                x
            })
            .collect();
        TorElt { c }
    }

    pub fn elements(&self) -> Result<Vec<TorElt>, TorError> {
        let n = self.size();
        if n > EXPLICIT_CAP {
            return Err(TorError::CapacityExceeded(format!("module of size {n}")));
        }
        let mut out: Vec<TorElt> = (0..n).map(|k| self.from_index(k)).collect();
        out.sort();
        Ok(out)
    }

    /// All elements with val(x_j) >= bounds[j], in canonical order.
    pub fn rect_elements(&self, bounds: &[u32]) -> Result<Vec<TorElt>, TorError> {
        let count: u128 = self
            .rings
            .iter()
            .zip(bounds)
            .map(|(r, &a)| (self.prime.q_wp as u128).pow(r.n - a.min(r.n)))
            .product();
        if count > EXPLICIT_CAP {
            return Err(TorError::CapacityExceeded(format!("rectangle of size {count}")));
        }
        let mut out = Vec::with_capacity(count as usize);
        for mut k in 0..count {
            let mut c = Vec::with_capacity(self.rank());
            for (r, &a) in self.rings.iter().zip(bounds) {
                let a = a.min(r.n);
                let s = (self.prime.q_wp as u128).pow(r.n - a);
                let sub = r.from_index((k % s) as u64);
                k /= s;
                // Scale into p^a; representatives of p^a W for W = A/p^{n-a}
                // are exactly p^a * (reps of degree < (n-a)delta).
                c.push(r.reduce(&sub.0.mul(&self.prime.fq, &r.pi_pow(a).0)));
            }
            out.push(TorElt { c });
        }
        out.sort();
        Ok(out)
    }

    /// Valuation-bound description of N[p^m].
    pub fn kernel_bounds(&self, m: u32) -> Vec<u32> {
        self.shape.iter().map(|&n| n.saturating_sub(m)).collect()
    }

    pub fn identity(&self) -> ModAut {
        let r = self.rank();
        let m = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| if i == j { self.rings[j].one() } else { self.rings[j].zero() })
                    .collect()
            })
            .collect();
        ModAut { m }
    }

    /// Validate that each entry lies in Hom_A(A_i, A_j).
    pub fn hom_from_rows(&self, rows: Vec<Vec<ResElt>>) -> Result<ModAut, TorError> {
        let r = self.rank();
        if rows.len() != r || rows.iter().any(|row| row.len() != r) {
            return Err(TorError::ShapeMismatch);
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let need = self.hom_exp(i, j);
                if need > 0 {
                    let got = self.rings[j].val(e);
                    if got.map_or(false, |v| v < need) {
                        return Err(TorError::NotAHomomorphism { i, j, got, need });
                    }
                }
            }
        }
        Ok(ModAut { m: rows })
    }

    pub fn apply(&self, g: &ModAut, x: &TorElt) -> TorElt {
        let fq = &self.prime.fq;
        let c = (0..self.rank())
            .map(|j| {
                let mut acc = self.rings[j].zero();
                for i in 0..self.rank() {
                    let prod = x.c[i].0.mul(fq, &g.m[i][j].0);
                    acc = self.rings[j].add(&acc, &self.rings[j].reduce(&prod));
                }
                acc
            })
            .collect();
        TorElt { c }
    }

    /// Matrix product so that x (g * h) = (x g) h.
    pub fn compose(&self, g: &ModAut, h: &ModAut) -> ModAut {
        let fq = &self.prime.fq;
        let r = self.rank();
        let m = (0..r)
            .map(|i| {
                (0..r)
                    .map(|k| {
                        let mut acc = self.rings[k].zero();
                        for j in 0..r {
                            let prod = g.m[i][j].0.mul(fq, &h.m[j][k].0);
                            acc = self.rings[k].add(&acc, &self.rings[k].reduce(&prod));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        ModAut { m }
    }

    /// Reduction mod p as a kappa-matrix (entries are representatives of
    /// degree < delta).
    pub fn reduction_matrix(&self, g: &ModAut) -> Vec<Vec<Poly>> {
        g.m.iter()
            .map(|row| row.iter().map(|e| e.0.rem(&self.prime.fq, &self.prime.p)).collect())
            .collect()
    }

    /// Nakayama: an endomorphism is invertible iff its mod-p reduction is an
    /// invertible kappa-matrix.
    pub fn is_automorphism(&self, g: &ModAut) -> bool {
        let red = self.reduction_matrix(g);
        rank(&self.prime.kappa, &red) == self.rank()
    }

    /// Inverse by cycling: g has finite order in Aut, so some power is the
    /// identity and the previous power is the inverse.
    pub fn inverse(&self, g: &ModAut) -> Result<ModAut, TorError> {
        if !self.is_automorphism(g) {
            return Err(TorError::NotInvertible);
        }
        let id = self.identity();
        let mut prev = id.clone();
        let mut cur = g.clone();
        let mut steps: u64 = 0;
        while cur != id {
            prev = cur.clone();
            cur = self.compose(&cur, g);
            steps += 1;
            if steps > 1 << 24 {
                return Err(TorError::CapacityExceeded("element order too large".into()));
            }
        }
        Ok(prev)
    }

    /// Every A-linear endomorphism, by enumerating each Hom entry space.
    pub fn end_elements(&self, cap: u128) -> Result<Vec<ModAut>, TorError> {
        let r = self.rank();
        let mut sizes = Vec::new();
        let mut total: u128 = 1;
        for i in 0..r {
            for j in 0..r {
                let s = (self.prime.q_wp as u128).pow(self.rings[j].n - self.hom_exp(i, j));
                sizes.push(s);
                total = total.saturating_mul(s);
            }
        }
        if total > cap {
            return Err(TorError::CapacityExceeded(format!("{total} endomorphisms")));
        }
        let mut out = Vec::with_capacity(total as usize);
        for mut k in 0..total {
            let mut rows = Vec::with_capacity(r);
            for i in 0..r {
                let mut row = Vec::with_capacity(r);
                for j in 0..r {
                    let s = sizes[i * r + j];
                    let idx = (k % s) as u64;
                    k /= s;
                    let need = self.hom_exp(i, j);
                    let ring = &self.rings[j];
                    let base = ring.from_index(idx);
                    // Entries of valuation >= need are p^need times a class
                    // of the smaller ring.
                    let e = if need == 0 {
                        base
                    } else {
                        ring.reduce(&base.0.mul(&self.prime.fq, &ring.pi_pow(need).0))
                    };
                    row.push(e);
                }
                rows.push(row);
            }
            out.push(ModAut { m: rows });
        }
        Ok(out)
    }

    pub fn aut_elements(&self, cap: u128) -> Result<Vec<ModAut>, TorError> {
        Ok(self
            .end_elements(cap)?
            .into_iter()
            .filter(|g| self.is_automorphism(g))
            .collect())
    }
}

/// A finite torsion module with its primary components sorted by prime and
/// each shape sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionModule {
    pub fq: FqCtx,
    pub components: Vec<PrimaryModule>,
}

impl TorsionModule {
    pub fn from_shapes(fq: &FqCtx, parts: &[(Poly, Vec<u32>)]) -> Result<TorsionModule, TorError> {
        let mut sorted: Vec<(Poly, Vec<u32>)> = parts.to_vec();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        let mut components = Vec::new();
        for (p, shape) in &sorted {
            if components
                .iter()
                .any(|c: &PrimaryModule| c.prime.p == *p)
            {
                return Err(TorError::ShapeMismatch);
            }
            let info = prime_data(fq, p)?;
            let mut shape = shape.clone();
            shape.sort();
            components.push(PrimaryModule::new(&info, &shape)?);
        }
        Ok(TorsionModule { fq: fq.clone(), components })
    }

    pub fn primary(prime: &PrimeInfo, shape: &[u32]) -> Result<TorsionModule, TorError> {
        let mut shape = shape.to_vec();
        shape.sort();
        let pm = PrimaryModule::new(prime, &shape)?;
        Ok(TorsionModule { fq: prime.fq.clone(), components: vec![pm] })
    }

    pub fn size(&self) -> u128 {
        self.components.iter().map(|c| c.size()).product()
    }

    pub fn component(&self, p: &Poly) -> Option<&PrimaryModule> {
        self.components.iter().find(|c| c.prime.p == *p)
    }

    pub fn zero(&self) -> ModElt {
        ModElt { parts: self.components.iter().map(|c| c.zero()).collect() }
    }

    pub fn add(&self, a: &ModElt, b: &ModElt) -> ModElt {
        ModElt {
            parts: self
                .components
                .iter()
                .zip(a.parts.iter().zip(&b.parts))
                .map(|(c, (x, y))| c.add(x, y))
                .collect(),
        }
    }

    pub fn neg(&self, a: &ModElt) -> ModElt {
        ModElt {
            parts: self.components.iter().zip(&a.parts).map(|(c, x)| c.neg(x)).collect(),
        }
    }

    pub fn scalar_mul(&self, f: &Poly, a: &ModElt) -> ModElt {
        ModElt {
            parts: self
                .components
                .iter()
                .zip(&a.parts)
                .map(|(c, x)| c.scalar_mul(f, x))
                .collect(),
        }
    }

    pub fn is_zero(&self, a: &ModElt) -> bool {
        self.components.iter().zip(&a.parts).all(|(c, x)| c.is_zero(x))
    }

    pub fn index(&self, a: &ModElt) -> u128 {
        let mut k: u128 = 0;
        for (c, x) in self.components.iter().zip(&a.parts).rev() {
            k = k * c.size() + c.index(x);
        }
        k
    }

    pub fn from_index(&self, mut k: u128) -> ModElt {
        let parts = self
            .components
            .iter()
            .map(|c| {
                let s = c.size();
                let x = c.from_index(k % s);
                k /= s;
                x
            })
            .collect();
        ModElt { parts }
    }

    pub fn elements(&self) -> Result<Vec<ModElt>, TorError> {
        let n = self.size();
        if n > EXPLICIT_CAP {
            return Err(TorError::CapacityExceeded(format!("module of size {n}")));
        }
        let mut out: Vec<ModElt> = (0..n).map(|k| self.from_index(k)).collect();
        out.sort();
        Ok(out)
    }
}

/// Re-express ⊕ A/(d_i) as a sum of prime-power quotients.
pub fn primary_decomposition(fq: &FqCtx, divisors: &[Poly]) -> Result<TorsionModule, TorError> {
    let mut by_prime: Vec<(Poly, Vec<u32>)> = Vec::new();
    for d in divisors {
        if d.deg().map_or(true, |k| k == 0) {
            return Err(TorError::ConstantDivisor);
        }
        let monic = d.make_monic(fq);
        for (p, e) in factor_monic(fq, &monic)? {
            match by_prime.iter_mut().find(|(q, _)| *q == p) {
                Some((_, list)) => list.push(e),
                None => by_prime.push((p, vec![e])),
            }
        }
    }
    TorsionModule::from_shapes(fq, &by_prime)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubData {
    /// Per component, per coordinate: all x with val(x_j) >= a_j.
    Rect(Vec<Vec<u32>>),
    /// Sorted explicit element list.
    Explicit(Vec<ModElt>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submodule {
    pub ambient: TorsionModule,
    pub generators: Vec<ModElt>,
    pub data: SubData,
}

impl Submodule {
    pub fn size(&self) -> u128 {
        match &self.data {
            SubData::Explicit(v) => v.len() as u128,
            SubData::Rect(bounds) => self
                .ambient
                .components
                .iter()
                .zip(bounds)
                .map(|(c, bs)| {
                    c.rings
                        .iter()
                        .zip(bs)
                        .map(|(r, &a)| (c.prime.q_wp as u128).pow(r.n - a.min(r.n)))
                        .product::<u128>()
                })
                .product(),
        }
    }

    pub fn contains(&self, x: &ModElt) -> bool {
        match &self.data {
            SubData::Explicit(v) => v.binary_search(x).is_ok(),
            SubData::Rect(bounds) => self
                .ambient
                .components
                .iter()
                .zip(x.parts.iter().zip(bounds))
                .all(|(c, (part, bs))| {
                    part.c.iter().zip(c.rings.iter().zip(bs)).all(|(e, (r, &a))| {
                        r.val(e).map_or(true, |v| v >= a.min(r.n))
                    })
                }),
        }
    }

    pub fn elements(&self) -> Result<Vec<ModElt>, TorError> {
        match &self.data {
            SubData::Explicit(v) => Ok(v.clone()),
            SubData::Rect(bounds) => {
                if self.size() > EXPLICIT_CAP {
                    return Err(TorError::CapacityExceeded(format!(
                        "rectangle of size {}",
                        self.size()
                    )));
                }
                let per: Vec<Vec<TorElt>> = self
                    .ambient
                    .components
                    .iter()
                    .zip(bounds)
                    .map(|(c, bs)| c.rect_elements(bs))
                    .collect::<Result<_, _>>()?;
                let mut out = vec![self.ambient.zero()];
                for (ci, choices) in per.iter().enumerate() {
                    let mut next = Vec::with_capacity(out.len() * choices.len());
                    for base in &out {
                        for ch in choices {
                            let mut e = base.clone();
                            e.parts[ci] = ch.clone();
                            next.push(e);
                        }
                    }
                    out = next;
                }
                out.sort();
                Ok(out)
            }
        }
    }

    pub fn same_elements(&self, other: &Submodule) -> Result<bool, TorError> {
        Ok(self.elements()? == other.elements()?)
    }

    fn rect(ambient: &TorsionModule, bounds: Vec<Vec<u32>>) -> Submodule {
        // Generators: p^{a_j} e_j wherever the coordinate is not dead.
        let mut generators = Vec::new();
        for (ci, (c, bs)) in ambient.components.iter().zip(&bounds).enumerate() {
            for (j, (r, &a)) in c.rings.iter().zip(bs).enumerate() {
                if a < r.n {
                    let mut g = ambient.zero();
                    g.parts[ci].c[j] = r.pi_pow(a);
                    generators.push(g);
                }
            }
        }
        Submodule { ambient: ambient.clone(), generators, data: SubData::Rect(bounds) }
    }

    /// A-span of a generating set, by additive closure over all A-multiples.
    pub fn from_generators(
        ambient: &TorsionModule,
        gens: &[ModElt],
        cap: u128,
    ) -> Result<Submodule, TorError> {
        let mut multiples: Vec<ModElt> = Vec::new();
        for g in gens {
            // A surjects onto ⊕_p A/p^{top_p}, so the A-multiples of g are
            // exactly the tuples of independent per-component multiples.
            let mut combos: Vec<ModElt> = vec![ambient.zero()];
            for (ci, c) in ambient.components.iter().enumerate() {
                let top = *c.shape.iter().max().unwrap();
                let ring = ResCtx::new(&c.prime, top)?;
                if ring.size() as u128 > EXPLICIT_CAP {
                    return Err(TorError::CapacityExceeded("scalar ring too large".into()));
                }
                let part_multiples: Vec<TorElt> =
                    ring.elements().map(|s| c.scalar_mul(&s.0, &g.parts[ci])).collect();
                let mut next = Vec::with_capacity(combos.len() * part_multiples.len());
                for base in &combos {
                    for pm in &part_multiples {
                        let mut e = base.clone();
                        e.parts[ci] = pm.clone();
                        next.push(e);
                    }
                }
                combos = next;
                combos.sort();
                combos.dedup();
            }
            multiples.extend(combos);
        }
        multiples.sort();
        multiples.dedup();
        // Additive closure.
        let mut set: Vec<ModElt> = vec![ambient.zero()];
        set.extend(multiples.iter().cloned());
        set.sort();
        set.dedup();
        loop {
            let mut new_elts = Vec::new();
            for a in &set {
                for b in &multiples {
                    let s = ambient.add(a, b);
                    if set.binary_search(&s).is_err() {
                        new_elts.push(s);
                    }
                }
            }
            if new_elts.is_empty() {
                break;
            }
            set.extend(new_elts);
            set.sort();
            set.dedup();
            if set.len() as u128 > cap {
                return Err(TorError::CapacityExceeded(format!(
                    "submodule closure exceeded {cap}"
                )));
            }
        }
        Ok(Submodule {
            ambient: ambient.clone(),
            generators: gens.to_vec(),
            data: SubData::Explicit(set),
        })
    }
}

/// N[a] = {x : a x = 0}, always a rectangle.
pub fn kernel_of(a: &Poly, n: &TorsionModule) -> Result<Submodule, TorError> {
    if a.is_zero() {
        let bounds = n.components.iter().map(|c| vec![0; c.rank()]).collect();
        return Ok(Submodule::rect(n, bounds));
    }
    let monic = a.make_monic(&n.fq);
    let factors = if monic.deg() == Some(0) { Vec::new() } else { factor_monic(&n.fq, &monic)? };
    let bounds = n
        .components
        .iter()
        .map(|c| {
            let m = factors
                .iter()
                .find(|(p, _)| *p == c.prime.p)
                .map_or(0, |(_, e)| *e);
            c.kernel_bounds(m)
        })
        .collect();
    Ok(Submodule::rect(n, bounds))
}

/// N[p] together with its kappa-dimension r_p.
pub fn socle(n: &TorsionModule, p: &Poly) -> Result<(Submodule, usize), TorError> {
    let comp = n.component(p).ok_or(TorError::PrimeNotInSupport)?;
    let dim = comp.rank();
    let bounds = n
        .components
        .iter()
        .map(|c| {
            if c.prime.p == *p {
                c.shape.iter().map(|&k| k - 1).collect()
            } else {
                c.shape.clone()
            }
        })
        .collect();
    Ok((Submodule::rect(n, bounds), dim))
}

/// Minimal number of generators of the p-part: the socle dimension.
pub fn min_generators(n: &TorsionModule, p: &Poly) -> Result<usize, TorError> {
    Ok(socle(n, p)?.1)
}

/// Image Mg of a submodule under a tuple of per-component automorphisms.
pub fn act(m: &Submodule, g: &[ModAut]) -> Result<Submodule, TorError> {
    let n = &m.ambient;
    if g.len() != n.components.len() {
        return Err(TorError::ShapeMismatch);
    }
    for (c, gc) in n.components.iter().zip(g) {
        if !c.is_automorphism(gc) {
            return Err(TorError::NotInvertible);
        }
    }
    let mut out: Vec<ModElt> = m
        .elements()?
        .into_iter()
        .map(|x| ModElt {
            parts: n
                .components
                .iter()
                .zip(x.parts.iter().zip(g))
                .map(|(c, (part, gc))| c.apply(gc, part))
                .collect(),
        })
        .collect();
    out.sort();
    out.dedup();
    let generators = m
        .generators
        .iter()
        .map(|x| ModElt {
            parts: n
                .components
                .iter()
                .zip(x.parts.iter().zip(g))
                .map(|(c, (part, gc))| c.apply(gc, part))
                .collect(),
        })
        .collect();
    Ok(Submodule { ambient: n.clone(), generators, data: SubData::Explicit(out) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FqCtx {
        FqCtx::prime(2).unwrap()
    }

    fn prime(fq: &FqCtx, idx: &[u64]) -> PrimeInfo {
        prime_data(fq, &Poly::from_indices(fq, idx)).unwrap()
    }

    #[test]
    fn primary_decomposition_splits_by_crt() {
        let fq = f2();
        // t(t+1) splits into two primes
        let d = Poly::from_indices(&fq, &[0, 1, 1]);
        let n = primary_decomposition(&fq, &[d]).unwrap();
        assert_eq!(n.components.len(), 2);
        assert_eq!(n.components[0].prime.p, Poly::t(&fq));
        assert_eq!(n.components[0].shape, vec![1]);
        assert_eq!(n.components[1].prime.p, Poly::from_indices(&fq, &[1, 1]));
        assert_eq!(n.components[1].shape, vec![1]);
        assert_eq!(n.size(), 4);

        let t = Poly::t(&fq);
        let two = primary_decomposition(&fq, &[t.clone(), t.clone()]).unwrap();
        assert_eq!(two.components.len(), 1);
        assert_eq!(two.components[0].shape, vec![1, 1]);

        let t2 = t.mul(&fq, &t);
        let sq = primary_decomposition(&fq, &[t2]).unwrap();
        assert_eq!(sq.components[0].shape, vec![2]);

        assert_eq!(
            primary_decomposition(&fq, &[Poly::one(&fq)]).unwrap_err(),
            TorError::ConstantDivisor
        );
    }

    #[test]
    fn kernel_of_matches_enumeration() {
        let fq = f2();
        let info = prime(&fq, &[0, 1]);
        let n = TorsionModule::primary(&info, &[2, 2]).unwrap();
        let ker = kernel_of(&info.p, &n).unwrap();
        assert_eq!(ker.size(), 4);
        // Independent oracle: elements annihilated by p.
        let by_hand: Vec<ModElt> = n
            .elements()
            .unwrap()
            .into_iter()
            .filter(|x| n.is_zero(&n.scalar_mul(&info.p, x)))
            .collect();
        assert_eq!(by_hand.len(), 4);
        let listed = ker.elements().unwrap();
        assert_eq!(listed, by_hand);
        for x in &listed {
            assert!(ker.contains(x));
        }

        // a = 1 kills nothing; a = p^2 kills everything.
        let one = kernel_of(&Poly::one(&fq), &n).unwrap();
        assert_eq!(one.size(), 1);
        let p2 = info.p.mul(&fq, &info.p);
        let all = kernel_of(&p2, &n).unwrap();
        assert_eq!(all.size(), n.size());
        let zero = kernel_of(&Poly::zero(), &n).unwrap();
        assert_eq!(zero.size(), n.size());
    }

    #[test]
    fn kernel_times_image_equals_module_size() {
        let fq = f2();
        let info = prime(&fq, &[1, 1]);
        for shape in [vec![1u32], vec![2], vec![1, 1], vec![1, 2], vec![2, 2], vec![1, 1, 2]] {
            let n = TorsionModule::primary(&info, &shape).unwrap();
            if n.size() > EXPLICIT_CAP {
                continue;
            }
            let mut pm = Poly::one(&fq);
            for m in 0..=3u32 {
                let ker = kernel_of(&pm, &n).unwrap();
                let mut image: Vec<ModElt> =
                    n.elements().unwrap().iter().map(|x| n.scalar_mul(&pm, x)).collect();
                image.sort();
                image.dedup();
                assert_eq!(ker.size() * image.len() as u128, n.size(), "shape {shape:?} m {m}");
                pm = pm.mul(&fq, &info.p);
            }
        }
    }

    #[test]
    fn socle_dimension_counts_summands() {
        let fq = f2();
        let info = prime(&fq, &[0, 1]);
        for shape in [vec![1u32], vec![1, 3], vec![2, 2, 2], vec![1, 2]] {
            let n = TorsionModule::primary(&info, &shape).unwrap();
            let (sub, dim) = socle(&n, &info.p).unwrap();
            assert_eq!(dim, shape.len());
            assert_eq!(sub.size(), (info.q_wp as u128).pow(dim as u32));
            assert_eq!(min_generators(&n, &info.p).unwrap(), dim);
            // Oracle: p-killed count.
            if n.size() <= EXPLICIT_CAP {
                let killed = n
                    .elements()
                    .unwrap()
                    .into_iter()
                    .filter(|x| n.is_zero(&n.scalar_mul(&info.p, x)))
                    .count();
                assert_eq!(killed as u128, sub.size());
            }
        }
        let other = prime(&fq, &[1, 1]);
        let n = TorsionModule::primary(&info, &[1]).unwrap();
        assert_eq!(socle(&n, &other.p).unwrap_err(), TorError::PrimeNotInSupport);
    }

    #[test]
    fn multi_prime_socle_zeroes_other_components() {
        let fq = f2();
        let d = Poly::from_indices(&fq, &[0, 1, 1]);
        let n = primary_decomposition(&fq, &[d]).unwrap();
        let (sub, dim) = socle(&n, &Poly::t(&fq)).unwrap();
        assert_eq!(dim, 1);
        assert_eq!(sub.size(), 2);
        for x in sub.elements().unwrap() {
            assert!(n.components[1].is_zero(&x.parts[1]));
        }
    }

    #[test]
    fn hom_validation_and_application() {
        let fq = f2();
        let info = prime(&fq, &[0, 1]);
        // shape (1, 2): maps from coordinate 1 into coordinate 2 must land in p.
        let pm = PrimaryModule::new(&info, &[1, 2]).unwrap();
        let bad = vec![
            vec![pm.rings[0].one(), pm.rings[1].one()],
            vec![pm.rings[0].zero(), pm.rings[1].one()],
        ];
        assert!(matches!(
            pm.hom_from_rows(bad),
            Err(TorError::NotAHomomorphism { i: 0, j: 1, need: 1, .. })
        ));
        let good = vec![
            vec![pm.rings[0].one(), pm.rings[1].pi_pow(1)],
            vec![pm.rings[0].one(), pm.rings[1].one()],
        ];
        let g = pm.hom_from_rows(good).unwrap();
        // A-linearity of the action.
        for x in pm.elements().unwrap() {
            for y in pm.elements().unwrap() {
                assert_eq!(
                    pm.apply(&g, &pm.add(&x, &y)),
                    pm.add(&pm.apply(&g, &x), &pm.apply(&g, &y))
                );
            }
            let tx = pm.scalar_mul(&Poly::t(&fq), &x);
            assert_eq!(pm.apply(&g, &tx), pm.scalar_mul(&Poly::t(&fq), &pm.apply(&g, &x)));
        }
    }

    #[test]
    fn automorphism_criterion_matches_bijectivity() {
        let fq = f2();
        let info = prime(&fq, &[0, 1]);
        let pm = PrimaryModule::new(&info, &[1, 2]).unwrap();
        let elts = pm.elements().unwrap();
        let mut aut_count = 0u32;
        for g in pm.end_elements(1 << 16).unwrap() {
            let mut images: Vec<TorElt> = elts.iter().map(|x| pm.apply(&g, x)).collect();
            images.sort();
            images.dedup();
            let bijective = images.len() == elts.len();
            assert_eq!(pm.is_automorphism(&g), bijective);
            if bijective {
                aut_count += 1;
                let inv = pm.inverse(&g).unwrap();
                assert_eq!(pm.compose(&g, &inv), pm.identity());
                assert_eq!(pm.compose(&inv, &g), pm.identity());
            }
        }
        assert_eq!(aut_count as usize, pm.aut_elements(1 << 16).unwrap().len());
    }

    #[test]
    fn action_laws_on_submodules() {
        let fq = f2();
        let info = prime(&fq, &[0, 1]);
        let n = TorsionModule::primary(&info, &[1, 1]).unwrap();
        let pm = &n.components[0];
        let auts = pm.aut_elements(1 << 12).unwrap();
        // |GL_2(F_2)| = 6
        assert_eq!(auts.len(), 6);

        // span{e1} sent to span{e2} by the swap.
        let e1 = ModElt { parts: vec![pm.generator(0)] };
        let e2 = ModElt { parts: vec![pm.generator(1)] };
        let m1 = Submodule::from_generators(&n, &[e1.clone()], 1 << 16).unwrap();
        assert_eq!(m1.size(), 2);
        let swap = pm
            .hom_from_rows(vec![
                vec![pm.rings[0].zero(), pm.rings[1].one()],
                vec![pm.rings[0].one(), pm.rings[1].zero()],
            ])
            .unwrap();
        let m2 = act(&m1, &[swap.clone()]).unwrap();
        let span_e2 = Submodule::from_generators(&n, &[e2], 1 << 16).unwrap();
        assert!(m2.same_elements(&span_e2).unwrap());

        // Identity action and compatibility (Mg)h = M(gh).
        let id = pm.identity();
        assert!(act(&m1, &[id.clone()]).unwrap().same_elements(&m1).unwrap());
        for g in &auts {
            for h in &auts {
                let lhs = act(&act(&m1, &[g.clone()]).unwrap(), &[h.clone()]).unwrap();
                let rhs = act(&m1, &[pm.compose(g, h)]).unwrap();
                assert!(lhs.same_elements(&rhs).unwrap());
            }
            // The socle is characteristic.
            let (soc, _) = socle(&n, &info.p).unwrap();
            let moved = act(&soc, &[g.clone()]).unwrap();
            assert!(moved.same_elements(&soc).unwrap());
            assert_eq!(moved.size(), soc.size());
        }

        // Non-invertible maps are rejected.
        let zero_map = pm
            .hom_from_rows(vec![
                vec![pm.rings[0].zero(), pm.rings[1].zero()],
                vec![pm.rings[0].zero(), pm.rings[1].zero()],
            ])
            .unwrap();
        assert_eq!(act(&m1, &[zero_map]).unwrap_err(), TorError::NotInvertible);
    }

    #[test]
    fn rect_and_explicit_agree() {
        let fq = f2();
        let info = prime(&fq, &[1, 1]);
        let n = TorsionModule::primary(&info, &[1, 2]).unwrap();
        let ker = kernel_of(&info.p, &n).unwrap();
        let gens = ker.generators.clone();
        let spanned = Submodule::from_generators(&n, &gens, 1 << 16).unwrap();
        assert!(ker.same_elements(&spanned).unwrap());
        assert_eq!(ker.size(), spanned.size());
    }

    #[test]
    fn kernel_root_set_identity_for_constant_shape() {
        // N[p^m] = (p^{n-m})^d as element sets, for N = (A/p^n)^d.
        let fq = f2();
        let info = prime(&fq, &[0, 1]);
        let (n_exp, d) = (3u32, 2usize);
        let n = TorsionModule::primary(&info, &[n_exp; 2]).unwrap();
        for m in 0..=n_exp {
            let ker = kernel_of(
                &(0..m).fold(Poly::one(&fq), |acc, _| acc.mul(&fq, &info.p)),
                &n,
            )
            .unwrap();
            let expect: Vec<ModElt> = n
                .elements()
                .unwrap()
                .into_iter()
                .filter(|x| {
                    x.parts[0]
                        .c
                        .iter()
                        .all(|e| n.components[0].rings[0].val(e).map_or(true, |v| v + m >= n_exp))
                })
                .collect();
            assert_eq!(ker.elements().unwrap(), expect, "m = {m}, d = {d}");
        }
    }
}
