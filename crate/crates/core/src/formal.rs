//! Local module structures over truncated series rings: one-parameter
//! operator data f_pi with its fiber height, level divisibility over a
//! truncated local ring, uniformizer towers built from division points,
//! and expanded root polynomials of finite submodules checked against
//! an independent splitting model.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::drinfeld::{
    check_level_structure, make_drinfeld_indices, torsion_points, DriError, LevelStructureMap,
};
use crate::ffpoly::{prime_data, FfError, FieldCtx, FqCtx, Poly};
use crate::series::{MPoly, SeriesCtx};
use crate::tormod::{ModElt, Submodule, TorElt, TorError, TorsionModule};

#[derive(Debug, Error)]
pub enum FormError {
    #[error("map is not O-linear: {0}")]
    NotLinear(String),
    #[error("truncation too coarse: {0}")]
    TruncationTooCoarse(String),
    #[error("needs truncation order above {needed}, have {have}")]
    PrecisionExceeded { needed: u64, have: u64 },
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Ff(#[from] FfError),
    #[error(transparent)]
    Tor(#[from] TorError),
    #[error(transparent)]
    Dri(#[from] DriError),
}

/// Polynomial in one outer variable X with coefficients in a series
/// ring, little-endian.  The series variables play the role of
/// deformation parameters; X is the module variable.
pub type XPoly = Vec<MPoly>;

pub fn x_is_zero(f: &[MPoly]) -> bool {
    f.iter().all(|c| c.is_zero())
}

fn x_trim(f: &mut XPoly) {
    while f.last().map_or(false, |c| c.is_zero()) {
        f.pop();
    }
}

pub fn x_add(s: &SeriesCtx, a: &[MPoly], b: &[MPoly]) -> XPoly {
    let mut out = vec![s.zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] = s.add(&out[i], c);
    }
    for (i, c) in b.iter().enumerate() {
        out[i] = s.add(&out[i], c);
    }
    x_trim(&mut out);
    out
}

pub fn x_mul(s: &SeriesCtx, a: &[MPoly], b: &[MPoly]) -> XPoly {
    if x_is_zero(a) || x_is_zero(b) {
        return vec![];
    }
    let mut out = vec![s.zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            if cb.is_zero() {
                continue;
            }
            out[i + j] = s.add(&out[i + j], &s.mul(ca, cb));
        }
    }
    x_trim(&mut out);
    out
}

pub fn x_eval(s: &SeriesCtx, f: &[MPoly], v: &MPoly) -> MPoly {
    let mut acc = s.zero();
    for c in f.iter().rev() {
        acc = s.add(&s.mul(&acc, v), c);
    }
    acc
}

/// Division with remainder by a monic divisor.  Coefficient arithmetic
/// happens in the series ring, so in a truncated ring the result is the
/// exact image of the untruncated division.
pub fn x_divrem_monic(s: &SeriesCtx, num: &[MPoly], den: &[MPoly]) -> (XPoly, XPoly) {
    let mut den = den.to_vec();
    x_trim(&mut den);
    assert!(
        den.last() == Some(&s.one()),
        "divisor must be monic after trimming"
    );
    let e = den.len() - 1;
    let mut rem = num.to_vec();
    x_trim(&mut rem);
    if rem.len() <= e {
        return (vec![], rem);
    }
    let mut quo = vec![s.zero(); rem.len() - e];
    for i in (e..rem.len()).rev() {
        let c = rem[i].clone();
        if c.is_zero() {
            continue;
        }
        quo[i - e] = c.clone();
        for (j, dj) in den.iter().enumerate() {
            rem[i - e + j] = s.sub(&rem[i - e + j], &s.mul(&c, dj));
        }
    }
    x_trim(&mut quo);
    x_trim(&mut rem);
    (quo, rem)
}

/// One-parameter module data over a truncated local series ring: the
/// distinguished operator acts by
///   f_pi(X) = pi X + t_1 X^q + ... + t_{d-1} X^{q^{d-1}} + X^{q^d}
/// with q the order of the residue constants (the base field of the
/// coefficient field), pi in the maximal ideal, top coefficient exactly
/// 1, and support only at the exponents q^i.  Residue constants c act
/// by f_c(X) = cX.
#[derive(Clone, Debug)]
pub struct FormalOModule {
    pub ring: SeriesCtx,
    pub pi: MPoly,
    pub t: Vec<MPoly>,
}

impl FormalOModule {
    pub fn new(ring: &SeriesCtx, pi: MPoly, t: Vec<MPoly>) -> Result<FormalOModule, FormError> {
        if ring.nvars == 0 {
            return Err(FormError::BadInput(
                "the ring needs at least the uniformizer variable".into(),
            ));
        }
        let pi = ring.reduce(&pi);
        if pi.valuation() == Some(0) {
            return Err(FormError::BadInput(
                "pi must lie in the maximal ideal".into(),
            ));
        }
        let d = t.len() as u32 + 1;
        let q = ring.field.base.q();
        if (q as u128).pow(d) > (1 << 20) {
            return Err(FormError::CapacityExceeded(format!(
                "operator degree q^d = {}^{} too large",
                q, d
            )));
        }
        let t = t.iter().map(|c| ring.reduce(c)).collect();
        Ok(FormalOModule {
            ring: ring.clone(),
            pi,
            t,
        })
    }

    pub fn d(&self) -> usize {
        self.t.len() + 1
    }

    pub fn q(&self) -> u64 {
        self.ring.field.base.q()
    }

    /// f_pi as an X-polynomial over the series ring.
    pub fn f_pi(&self) -> XPoly {
        let q = self.q() as usize;
        let top = q.pow(self.d() as u32);
        let mut out = vec![self.ring.zero(); top + 1];
        out[1] = self.pi.clone();
        let mut e = 1usize;
        for ti in &self.t {
            e *= q;
            out[e] = ti.clone();
        }
        out[top] = self.ring.one();
        out
    }

    /// Value of f_pi at a ring element.
    pub fn apply(&self, x: &MPoly) -> MPoly {
        let s = &self.ring;
        let q = self.q() as u32;
        let mut acc = s.mul(&self.pi, x);
        let mut pw = x.clone();
        for ti in &self.t {
            pw = s.pow(&pw, q);
            acc = s.add(&acc, &s.mul(ti, &pw));
        }
        pw = s.pow(&pw, q);
        s.add(&acc, &pw)
    }
}

/// Height of the closed-fiber specialization: all variables (the
/// uniformizer included) are sent to zero, leaving the constant terms
/// of the t_i, and the height is the least i with t_i a unit, the top
/// coefficient counting as t_d = 1.  Parameters inside the maximal
/// ideal therefore give exactly d.
pub fn formal_height(f: &FormalOModule) -> u32 {
    for (i, ti) in f.t.iter().enumerate() {
        if !ti.homogeneous_component(0).is_zero() {
            return i as u32 + 1;
        }
    }
    f.d() as u32
}

/// Divisor condition for a level map on a local module with cyclic
/// factor exponents `shape` (the module is the direct sum of O/pi^{n_k}
/// with residue constants of order q): images[k] is the value of the
/// k-th generator, the map extends through digits of the t-adic
/// expansion by iterating f_pi, and the monic product of (X - value)
/// over the pi-kernel must divide f_pi to the ring's truncation.  The
/// empty shape is the zero module, vacuously fine.
///
/// A nonzero remainder reports false.  TruncationTooCoarse signals
/// inputs that degenerate at this truncation order instead: pi itself
/// vanishing, or the divisor collapsing to a bare power of X although
/// the map is nonzero on the kernel.
pub fn check_formal_level(
    f: &FormalOModule,
    shape: &[u32],
    images: &[MPoly],
) -> Result<bool, FormError> {
    let s = &f.ring;
    if images.len() != shape.len() {
        return Err(FormError::NotLinear(format!(
            "{} generator images for {} cyclic factors",
            images.len(),
            shape.len()
        )));
    }
    if shape.iter().any(|&n| n == 0) {
        return Err(FormError::BadInput("shape exponents must be >= 1".into()));
    }
    if f.pi.is_zero() {
        return Err(FormError::TruncationTooCoarse(
            "pi vanishes at this truncation order".into(),
        ));
    }
    let images: Vec<MPoly> = images.iter().map(|v| s.reduce(v)).collect();
    for (k, v) in images.iter().enumerate() {
        if v.valuation() == Some(0) {
            return Err(FormError::NotLinear(format!(
                "image of generator {k} is a unit, not in the maximal ideal"
            )));
        }
    }
    // iterates[k][j] = f_pi applied j times to images[k]; linearity
    // over O needs the annihilator pi^{n_k} to kill the k-th generator
    let mut iterates: Vec<Vec<MPoly>> = Vec::with_capacity(shape.len());
    for (k, v) in images.iter().enumerate() {
        let mut row = vec![v.clone()];
        for _ in 0..shape[k] {
            let next = f.apply(row.last().unwrap());
            row.push(next);
        }
        if !row[shape[k] as usize].is_zero() {
            return Err(FormError::NotLinear(format!(
                "generator {k} is not killed by its annihilator"
            )));
        }
        iterates.push(row);
    }
    // the pi-kernel is the span of the last surviving iterates over the
    // residue constants
    let q = f.q();
    let count = (q as u128).pow(shape.len() as u32);
    if count > (1 << 16) {
        return Err(FormError::CapacityExceeded(format!(
            "pi-kernel of size {count}"
        )));
    }
    let mut values = Vec::with_capacity(count as usize);
    for mut idx in 0..count {
        let mut acc = s.zero();
        for (k, &nk) in shape.iter().enumerate() {
            let c = s.field.base.from_index((idx % q as u128) as u64);
            idx /= q as u128;
            let top = &iterates[k][nk as usize - 1];
            acc = s.add(&acc, &s.mul_scalar(top, &s.field.embed_scalar(&c)));
        }
        values.push(acc);
    }
    let mut div: XPoly = vec![s.one()];
    for v in &values {
        div = x_mul(s, &div, &[s.neg(v), s.one()]);
    }
    if values.iter().any(|v| !v.is_zero()) && div[..div.len() - 1].iter().all(|c| c.is_zero()) {
        return Err(FormError::TruncationTooCoarse(
            "divisor collapses to a power of X although the map is nonzero on the kernel".into(),
        ));
    }
    let (_, rem) = x_divrem_monic(s, &f.f_pi(), &div);
    Ok(x_is_zero(&rem))
}

#[derive(Debug, Serialize)]
pub struct LubinTateReport {
    pub q: u64,
    pub n: u32,
    pub trunc: u32,
    pub pi: String,
    pub val_pi: u64,
    /// valuations of theta_1 .. theta_n
    pub theta_vals: Vec<u32>,
    pub ram_index: u64,
    pub expected_index: u64,
    pub chain_ok: bool,
    pub theta_generates: bool,
}

pub struct LubinTateChain {
    pub module: FormalOModule,
    /// theta_1 .. theta_n; theta_n is the series variable itself
    pub thetas: Vec<MPoly>,
    pub report: LubinTateReport,
}

/// Tower of division points of the one-dimensional module over
/// F_q[[v]]/(v^trunc): theta_n = v, f_pi(theta_j) = theta_{j-1}, down
/// to theta_0 = 0 with every higher theta nonzero.  pi is recovered as
/// the fixed point of pi = -(f_pi^(n-1)(v))^(q-1), and the report
/// compares the ramification index val(pi)/val(theta_n) against
/// q^{n-1}(q-1), the unit-group order of O/pi^n.
pub fn lubin_tate_chain(q: u64, n: u32, trunc: u32) -> Result<LubinTateChain, FormError> {
    if n == 0 {
        return Err(FormError::BadInput("tower needs n >= 1".into()));
    }
    let expected: u64 = q.pow(n - 1) * (q - 1);
    if expected >= trunc as u64 {
        return Err(FormError::PrecisionExceeded {
            needed: expected,
            have: trunc as u64,
        });
    }
    let base = FqCtx::of_order(q)?;
    let field = FieldCtx::trivial(&base);
    let s = SeriesCtx::new(&field, 1, Some(trunc));
    let v = s.var(0);
    let mut pi = s.neg(&s.pow(&v, expected as u32));
    let mut module = FormalOModule::new(&s, pi.clone(), vec![])?;
    let mut settled = false;
    for _ in 0..(trunc as usize + 16) {
        let mut th = v.clone();
        for _ in 1..n {
            th = module.apply(&th);
        }
        let next = s.neg(&s.pow(&th, q as u32 - 1));
        if next == pi {
            settled = true;
            break;
        }
        pi = next;
        module = FormalOModule::new(&s, pi.clone(), vec![])?;
    }
    if !settled {
        return Err(FormError::CapacityExceeded(
            "uniformizer iteration did not stabilize".into(),
        ));
    }
    // descend the chain: [theta_n, theta_{n-1}, ..., theta_0]
    let mut desc = vec![v.clone()];
    for _ in 0..n {
        desc.push(module.apply(desc.last().unwrap()));
    }
    let theta0 = desc.pop().unwrap();
    desc.reverse();
    let thetas = desc;
    let chain_ok = theta0.is_zero()
        && thetas.iter().enumerate().all(|(idx, th)| {
            th.valuation() == Some(q.pow(n - 1 - idx as u32) as u32)
        });
    let val_pi = pi.valuation().map_or(0, u64::from);
    let val_tn = thetas.last().and_then(|t| t.valuation()).unwrap_or(0);
    let report = LubinTateReport {
        q,
        n,
        trunc,
        pi: s.render(&pi, &["v"]),
        val_pi,
        theta_vals: thetas.iter().map(|t| t.valuation().unwrap_or(0)).collect(),
        ram_index: if val_tn > 0 { val_pi / val_tn as u64 } else { 0 },
        expected_index: expected,
        chain_ok,
        theta_generates: val_tn == 1,
    };
    Ok(LubinTateChain {
        module,
        thetas,
        report,
    })
}

/// Expanded monic product of (X - value) over every element of a
/// finite submodule image.  When the value multiset is a subspace over
/// the residue constants the expansion is additive: support only at
/// exponents q^i.
#[derive(Clone, Debug)]
pub struct AdditiveRootPolynomial {
    pub ring: SeriesCtx,
    pub coeffs: XPoly,
}

impl AdditiveRootPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Every nonzero coefficient sits at an exponent q^i.
    pub fn q_power_support(&self, q: u64) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| c.is_zero() || is_q_power(i as u128, q))
    }
}

fn is_q_power(mut e: u128, q: u64) -> bool {
    if e == 0 {
        return false;
    }
    while e % q as u128 == 0 {
        e /= q as u128;
    }
    e == 1
}

/// Root polynomial of a submodule through a value map: the monic
/// product of (X - psi(alpha)) over the listed elements.  The list
/// must carry every element of the submodule, zero included, so the
/// result has degree |M|.
pub fn additive_from_submodule<F>(
    s: &SeriesCtx,
    elements: &[TorElt],
    psi: F,
) -> AdditiveRootPolynomial
where
    F: Fn(&TorElt) -> MPoly,
{
    let mut coeffs: XPoly = vec![s.one()];
    for el in elements {
        let val = psi(el);
        coeffs = x_mul(s, &coeffs, &[s.neg(&val), s.one()]);
    }
    AdditiveRootPolynomial {
        ring: s.clone(),
        coeffs,
    }
}

#[derive(Debug, Serialize)]
pub struct FmReport {
    pub q_wp: u64,
    pub n: u32,
    pub d: usize,
    pub ext_deg: usize,
    pub aut_count: usize,
    pub transport_checks: u64,
    pub scalar_checks: u64,
    pub kernel_checks: u64,
    pub transport_failures: Vec<String>,
    pub scalar_failures: Vec<String>,
    pub kernel_failures: Vec<String>,
}

impl FmReport {
    pub fn all_clear(&self) -> bool {
        self.transport_failures.is_empty()
            && self.scalar_failures.is_empty()
            && self.kernel_failures.is_empty()
    }
}

fn tpow(fq: &FqCtx, m: u32) -> Poly {
    let mut out = Poly::one(fq);
    for _ in 0..m {
        out = out.mul(fq, &Poly::t(fq));
    }
    out
}

/// Exercises the defining identities of submodule root polynomials in
/// a splitting model: a rank-2 module structure on the additive group
/// whose t^n-torsion splits over a finite extension, with psi a valid
/// level map on N = (O/pi^n)^d.  For every kernel level m <= n:
///  (i) transport: enumerating the g-image of the kernel submodule and
///      mapping through psi gives the same value multiset as
///      transporting the values elementwise, for every automorphism g;
///  (ii) scalar rule: the expanded root polynomial has q-power support
///      and f(c x) = c f(x) for every residue constant c;
///  (iii) kernel rule: the pi^m-kernel equals the submodule of
///      pi^{n-m}-multiples, and at full rank the root polynomial of
///      that kernel is the monic X-form of the t^m action.
/// The report lists counterexamples; all three lists stay empty.
pub fn verify_fm_identities(
    q_wp: u64,
    n: u32,
    d: usize,
    cap: u128,
) -> Result<FmReport, FormError> {
    if n == 0 || d == 0 || d > 2 {
        return Err(FormError::BadInput(
            "supported module shapes: n >= 1, 1 <= d <= 2".into(),
        ));
    }
    let phi = make_drinfeld_indices(q_wp, 1, &[1, 0, 1])?;
    let fq = phi.base().clone();
    let tvar = Poly::t(&fq);
    let prime = prime_data(&fq, &tvar)?;
    let nmod = TorsionModule::primary(&prime, &vec![n; d])?;
    let tn = tpow(&fq, n);
    // smallest extension that splits the full t^n-torsion of the
    // rank-2 model
    let full = (q_wp as u128).pow(2 * n);
    let mut found = None;
    for md in 1..=12usize {
        if let Ok(ts) = torsion_points(&phi, &tn, md) {
            if ts.points.len() as u128 == full {
                found = Some((ts, md));
                break;
            }
        }
    }
    let (tor, ext_deg) =
        found.ok_or_else(|| FormError::CapacityExceeded("no splitting extension within degree 12".into()))?;
    let ext = tor.ext.clone();
    let embed = tor.embed.clone();
    // first valid level map in image-lex order
    let mut psi = None;
    if d == 1 {
        for x in &tor.points {
            let cand = LevelStructureMap::new(&nmod, ext_deg, vec![vec![x.clone()]]);
            if check_level_structure(&phi, &cand)? {
                psi = Some(cand);
                break;
            }
        }
    } else {
        'outer: for x in &tor.points {
            for y in &tor.points {
                let cand = LevelStructureMap::new(&nmod, ext_deg, vec![vec![x.clone(), y.clone()]]);
                if check_level_structure(&phi, &cand)? {
                    psi = Some(cand);
                    break 'outer;
                }
            }
        }
    }
    let psi = psi.ok_or_else(|| {
        FormError::BadInput("no valid level map exists in the splitting model".into())
    })?;
    let elements = nmod.elements()?;
    let mut table: BTreeMap<ModElt, Poly> = BTreeMap::new();
    for x in &elements {
        table.insert(x.clone(), psi.eval_in(&phi, &ext, &embed, x));
    }
    let s = SeriesCtx::new(&ext, 0, None);
    let comp = &nmod.components[0];
    let wrap = |el: &TorElt| {
        let key = ModElt {
            parts: vec![el.clone()],
        };
        s.scalar(&table[&key])
    };
    // kernel levels: elements and root polynomials per m
    let mut level_elts: Vec<Vec<TorElt>> = Vec::new();
    let mut level_polys: Vec<AdditiveRootPolynomial> = Vec::new();
    for m in 0..=n {
        let elts = comp.rect_elements(&comp.kernel_bounds(m))?;
        level_polys.push(additive_from_submodule(&s, &elts, wrap));
        level_elts.push(elts);
    }
    let auts = comp.aut_elements(cap)?;
    let mut report = FmReport {
        q_wp,
        n,
        d,
        ext_deg,
        aut_count: auts.len(),
        transport_checks: 0,
        scalar_checks: 0,
        kernel_checks: 0,
        transport_failures: vec![],
        scalar_failures: vec![],
        kernel_failures: vec![],
    };
    // (i) transport
    for (gi, g) in auts.iter().enumerate() {
        for m in 0..=n {
            let elts = &level_elts[m as usize];
            let mut direct: Vec<Poly> = elts
                .iter()
                .map(|a| {
                    let key = ModElt {
                        parts: vec![comp.apply(g, a)],
                    };
                    table[&key].clone()
                })
                .collect();
            direct.sort();
            let gens: Vec<ModElt> = (0..d)
                .map(|k| {
                    let gen = comp.scalar_mul(&tpow(&fq, n - m), &comp.generator(k));
                    ModElt {
                        parts: vec![comp.apply(g, &gen)],
                    }
                })
                .collect();
            let sub = Submodule::from_generators(&nmod, &gens, cap)?;
            let mut transported: Vec<Poly> =
                sub.elements()?.iter().map(|x| table[x].clone()).collect();
            transported.sort();
            report.transport_checks += 1;
            if direct != transported {
                report.transport_failures.push(format!("g#{gi} m={m}"));
            }
        }
    }
    // (ii) scalar rule
    for m in 0..=n {
        let fm = &level_polys[m as usize];
        if !fm.q_power_support(q_wp) {
            report
                .scalar_failures
                .push(format!("m={m} support is not q-power"));
        }
        for zi in 0..q_wp {
            let z = fq.from_index(zi);
            let zconst = Poly::constant(&fq, z.clone());
            let zext = s.scalar(&ext.embed_scalar(&z));
            for x in &elements {
                let zx = nmod.scalar_mul(&zconst, x);
                let lhs = x_eval(&s, &fm.coeffs, &s.scalar(&table[&zx]));
                let rhs = s.mul(&zext, &x_eval(&s, &fm.coeffs, &s.scalar(&table[x])));
                report.scalar_checks += 1;
                if lhs != rhs {
                    report
                        .scalar_failures
                        .push(format!("m={m} z={zi} x={}", nmod.index(x)));
                }
            }
        }
    }
    // (iii) kernel rule
    for m in 0..=n {
        report.kernel_checks += 1;
        let gens: Vec<ModElt> = (0..d)
            .map(|k| ModElt {
                parts: vec![comp.scalar_mul(&tpow(&fq, n - m), &comp.generator(k))],
            })
            .collect();
        let sub = Submodule::from_generators(&nmod, &gens, cap)?;
        let from_mult: Vec<TorElt> = sub.elements()?.into_iter().map(|x| x.parts[0].clone()).collect();
        if from_mult != level_elts[m as usize] {
            report
                .kernel_failures
                .push(format!("m={m} kernel differs from multiple submodule"));
        }
        if d == 2 {
            // full rank: the root polynomial is the monic X-form of t^m
            let tw = phi.phi_a(&tpow(&fq, m));
            let deg = (q_wp as usize).pow(tw.c.len() as u32 - 1);
            let mut expect: XPoly = vec![s.zero(); deg + 1];
            for (i, c) in tw.c.iter().enumerate() {
                expect[(q_wp as usize).pow(i as u32)] = s.scalar(&embed.map(c));
            }
            x_trim(&mut expect);
            let mut have = level_polys[m as usize].coeffs.clone();
            x_trim(&mut have);
            if expect != have {
                report
                    .kernel_failures
                    .push(format!("m={m} root polynomial differs from the t^{m} action"));
            }
        }
    }
    Ok(report)
}
