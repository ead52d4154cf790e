//! Principal congruence filtration of the kernel of the Levi projection.
//!
//! For an admissible subgroup H on a standard-shape module (A/p^n)^d,
//! the kernel J of the composite map from H to the product of Levi
//! factors of its socle image is again a congruence set, with exponents
//! m' obtained from the canonicalized exponents by bumping to 1 every
//! position whose entry and mirror both vanish. Intersecting J with the
//! matrices congruent to the identity mod p^k, and refining one row at
//! a time, yields a chain
//!
//!   J = J^{0,0} >= J^{0,1} >= ... >= J^{0,d} = J^1 >= J^{1,1} >= ...
//!
//! whose successive quotients Q^{k,l} are elementary abelian with
//! explicit representatives supported on one row. Everything here is
//! verified by enumeration at desk scale and reported level by level.

use std::collections::HashSet;

use serde::Serialize;

use super::{block_structure, congruence_set, AdmError, CongruenceDatum};
use crate::tormod::ModAut;

/// One group in the chain, identified by (k, l): matrices in J congruent
/// to the identity mod p^{k+1} in the first l rows and mod p^k below.
#[derive(Debug, Clone, Serialize)]
pub struct JLevel {
    pub k: u32,
    pub l: usize,
    /// Entrywise congruence exponents, capped at n.
    pub exponents: Vec<Vec<u32>>,
    /// Enumerated order.
    pub order: u128,
    /// Product of coset sizes q^(n - e) over the entries.
    pub predicted_order: u128,
    /// Order of the quotient by the next level in the chain.
    pub quotient_order: u128,
    /// q to the number of free positions in row l at depth k.
    pub quotient_formula: u128,
}

/// Outcome of the enumeration checks on the chain.
#[derive(Debug, Clone, Serialize)]
pub struct JChainReport {
    /// J coincides with the kernel of the Levi projection of H.
    pub j_equals_levi_kernel: bool,
    /// Every level's order matches the coset-count prediction.
    pub counts_match: bool,
    /// J^k is exactly the matrices of J congruent to 1 mod p^k, and
    /// J^{k,l} is cut out inside J^k by the first l rows mod p^{k+1}.
    pub kernel_descriptions_match: bool,
    /// Each level contains the next.
    pub chain_descending: bool,
    /// J^{k+1} is normal in J^k for all k, and J^{k,l+1} is normal in
    /// J^{k,l} for k >= 1.
    pub normality_holds: bool,
    /// J^k/J^{k+1} is abelian for k >= 1 (commutators land in J^{k+1}).
    pub abelian_quotients: bool,
    /// The row-supported representatives hit every coset of J^{k,l+1}
    /// in J^{k,l} exactly once.
    pub representatives_complete: bool,
    /// The image of the representative set in J^{k,l}/J^{k+1} is closed
    /// under products.
    pub representative_image_subgroup: bool,
    /// The last group J^n is trivial.
    pub chain_terminates: bool,
}

impl JChainReport {
    pub fn all_ok(&self) -> bool {
        self.j_equals_levi_kernel
            && self.counts_match
            && self.kernel_descriptions_match
            && self.chain_descending
            && self.normality_holds
            && self.abelian_quotients
            && self.representatives_complete
            && self.representative_image_subgroup
            && self.chain_terminates
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JChain {
    pub n: u32,
    pub d: usize,
    pub m_prime: Vec<Vec<u32>>,
    pub levels: Vec<JLevel>,
    pub report: JChainReport,
}

fn level_exponents(mp: &[Vec<u32>], n: u32, k: u32, l: usize) -> Vec<Vec<u32>> {
    let d = mp.len();
    (0..d)
        .map(|i| {
            let depth = if i < l { k + 1 } else { k };
            (0..d).map(|j| mp[i][j].max(depth).min(n)).collect()
        })
        .collect()
}

fn predicted(q: u64, n: u32, exps: &[Vec<u32>]) -> u128 {
    exps.iter()
        .flatten()
        .map(|&e| (q as u128).pow(n - e))
        .product()
}

/// Row-l representatives of J^{k,l}/J^{k,l+1}: identity plus a p^k
/// multiple of a residue-field digit in every free position of row l.
fn quotient_reps(
    h: &CongruenceDatum,
    mp: &[Vec<u32>],
    k: u32,
    l: usize,
) -> Vec<ModAut> {
    let d = mp.len();
    let n = h.module.shape[0];
    let q = h.module.prime.q_wp;
    let free: Vec<usize> = (0..d).filter(|&j| mp[l][j] <= k && k < n).collect();
    let mut out = Vec::new();
    let mut odo = vec![0u64; free.len()];
    loop {
        let mut g = h.module.identity();
        for (pos, &j) in free.iter().enumerate() {
            let ring = &h.module.rings[j];
            let digit = ring.from_index(odo[pos]);
            let term = ring.mul(&digit, &ring.pi_pow(k));
            g.m[l][j] = ring.add(&g.m[l][j], &term);
        }
        out.push(g);
        let mut pos = 0;
        loop {
            if pos == free.len() {
                return out;
            }
            odo[pos] += 1;
            if odo[pos] < q {
                break;
            }
            odo[pos] = 0;
            pos += 1;
        }
    }
}

/// The minimal element of the coset x * S, used as a canonical form for
/// quotient comparisons.
fn coset_min(module: &crate::tormod::PrimaryModule, x: &ModAut, s: &[ModAut]) -> ModAut {
    s.iter().map(|g| module.compose(x, g)).min().unwrap()
}

/// Compute the chain and run every enumeration check. Requires a
/// standard shape; every enumeration is bounded by the cap.
pub fn j_chain(h: &CongruenceDatum, cap: u128) -> Result<JChain, AdmError> {
    let mp = h.m_prime()?;
    let module = &h.module;
    let d = module.rank();
    let n = module.shape[0];
    let q = module.prime.q_wp;

    // Enumerate every level, plus the terminal J^n.
    let mut sets: Vec<Vec<Vec<ModAut>>> = Vec::new();
    for k in 0..n {
        let mut row = Vec::with_capacity(d);
        for l in 0..d {
            let exps = level_exponents(&mp, n, k, l);
            let mut list = congruence_set(module, &exps, cap)?;
            list.sort();
            row.push(list);
        }
        sets.push(row);
    }
    let terminal = {
        let exps = level_exponents(&mp, n, n, 0);
        let mut list = congruence_set(module, &exps, cap)?;
        list.sort();
        list
    };
    let chain_terminates = terminal.len() == 1 && terminal[0] == module.identity();

    // Successor of (k, l) in the chain.
    let next_of = |k: u32, l: usize| -> &Vec<ModAut> {
        if l + 1 < d {
            &sets[k as usize][l + 1]
        } else if k + 1 < n {
            &sets[k as usize + 1][0]
        } else {
            &terminal
        }
    };

    let mut levels = Vec::new();
    let mut counts_match = true;
    for k in 0..n {
        for l in 0..d {
            let exps = level_exponents(&mp, n, k, l);
            let order = sets[k as usize][l].len() as u128;
            let pred = predicted(q, n, &exps);
            if order != pred {
                counts_match = false;
            }
            let nxt = next_of(k, l).len() as u128;
            let free = (0..d).filter(|&j| mp[l][j] <= k).count() as u32;
            levels.push(JLevel {
                k,
                l,
                exponents: exps,
                order,
                predicted_order: pred,
                quotient_order: order / nxt,
                quotient_formula: (q as u128).pow(free),
            });
        }
    }

    // J as the kernel of the Levi projection of H.
    let bd = block_structure(module, &h.m_eff)?;
    let kappa = &module.prime.kappa;
    let hs = h.enumerate(cap)?;
    let mut kernel: Vec<ModAut> = hs
        .into_iter()
        .filter(|g| {
            let b = h.socle_matrix(g);
            bd.blocks.iter().all(|blk| {
                blk.iter().enumerate().all(|(ai, &i)| {
                    blk.iter().enumerate().all(|(aj, &j)| {
                        let want = if ai == aj { kappa.one() } else { kappa.zero() };
                        b[i][j] == want
                    })
                })
            })
        })
        .collect();
    kernel.sort();
    let j_equals_levi_kernel = kernel == sets[0][0];

    // Membership descriptions: J^k by reduction mod p^k, J^{k,l} by the
    // first l rows mod p^{k+1}.
    let congruent_to_identity = |g: &ModAut, rows: usize, depth: u32| -> bool {
        (0..rows).all(|i| {
            (0..d).all(|j| {
                let ring = &module.rings[j];
                let delta = if i == j { ring.one() } else { ring.zero() };
                let diff = ring.sub(&g.m[i][j], &delta);
                ring.val(&diff).map_or(true, |v| v >= depth)
            })
        })
    };
    let mut kernel_descriptions_match = true;
    for k in 0..n {
        let jk: Vec<&ModAut> =
            sets[0][0].iter().filter(|g| congruent_to_identity(g, d, k)).collect();
        if !jk.iter().map(|g| (*g).clone()).eq(sets[k as usize][0].iter().cloned()) {
            kernel_descriptions_match = false;
        }
        for l in 0..d {
            let jkl: Vec<&ModAut> = sets[k as usize][0]
                .iter()
                .filter(|g| congruent_to_identity(g, l, k + 1))
                .collect();
            if !jkl.iter().map(|g| (*g).clone()).eq(sets[k as usize][l].iter().cloned()) {
                kernel_descriptions_match = false;
            }
        }
    }

    // Inclusions, normality, abelian quotients.
    let mut chain_descending = true;
    let mut normality_holds = true;
    let mut abelian_quotients = true;
    for k in 0..n {
        for l in 0..d {
            let cur = &sets[k as usize][l];
            let nxt = next_of(k, l);
            if !nxt.iter().all(|g| cur.binary_search(g).is_ok()) {
                chain_descending = false;
            }
            // J^{k,l+1} normal in J^{k,l} for k >= 1; the l = 0 case is
            // the normality of J^{k+1}-style kernels in J^k and is
            // checked for every k.
            if k >= 1 || l == 0 {
                let target: &Vec<ModAut> = if l == 0 {
                    if (k + 1) < n { &sets[k as usize + 1][0] } else { &terminal }
                } else {
                    nxt
                };
                let target_set: HashSet<&ModAut> = target.iter().collect();
                'conj: for g in cur {
                    let gi = module.inverse(g).map_err(AdmError::Tor)?;
                    for x in target {
                        let y = module.compose(&module.compose(&gi, x), g);
                        if !target_set.contains(&y) {
                            normality_holds = false;
                            break 'conj;
                        }
                    }
                }
            }
            if l == 0 && k >= 1 {
                let nxt_k: &Vec<ModAut> =
                    if (k + 1) < n { &sets[k as usize + 1][0] } else { &terminal };
                let nxt_k_set: HashSet<&ModAut> = nxt_k.iter().collect();
                'comm: for g in cur {
                    let gi = module.inverse(g).map_err(AdmError::Tor)?;
                    for x in cur {
                        let xi = module.inverse(x).map_err(AdmError::Tor)?;
                        let c = module
                            .compose(&module.compose(&gi, &xi), &module.compose(g, x));
                        if !nxt_k_set.contains(&c) {
                            abelian_quotients = false;
                            break 'comm;
                        }
                    }
                }
            }
        }
    }

    // Representatives of Q^{k,l}.
    let mut representatives_complete = true;
    let mut representative_image_subgroup = true;
    for k in 0..n {
        for l in 0..d {
            let cur = &sets[k as usize][l];
            let nxt = next_of(k, l);
            let reps = quotient_reps(h, &mp, k, l);
            let mut covered: Vec<ModAut> = Vec::with_capacity(reps.len() * nxt.len());
            for rep in &reps {
                for g in nxt {
                    covered.push(module.compose(rep, g));
                }
            }
            covered.sort();
            let distinct = covered.windows(2).all(|w| w[0] != w[1]);
            if !(distinct && covered == *cur) {
                representatives_complete = false;
            }
            // Closure of the representative image in J^{k,l}/J^{k+1}.
            let jk1: &Vec<ModAut> =
                if (k + 1) < n { &sets[k as usize + 1][0] } else { &terminal };
            let canon: HashSet<ModAut> =
                reps.iter().map(|r| coset_min(module, r, jk1)).collect();
            for a in &reps {
                for b in &reps {
                    let prod = module.compose(a, b);
                    if !canon.contains(&coset_min(module, &prod, jk1)) {
                        representative_image_subgroup = false;
                    }
                }
            }
        }
    }

    Ok(JChain {
        n,
        d,
        m_prime: mp,
        levels,
        report: JChainReport {
            j_equals_levi_kernel,
            counts_match,
            kernel_descriptions_match,
            chain_descending,
            normality_holds,
            abelian_quotients,
            representatives_complete,
            representative_image_subgroup,
            chain_terminates,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissible::{gamma0, gamma1, parabolic, CongruenceDatum};
    use crate::ffpoly::{prime_data, FqCtx, Poly, PrimeInfo};

    fn t_prime(q: u64) -> PrimeInfo {
        let fq = FqCtx::prime(q).unwrap();
        prime_data(&fq, &Poly::t(&fq)).unwrap()
    }

    fn assert_all_checks(c: &JChain) {
        let r = &c.report;
        assert!(r.j_equals_levi_kernel);
        assert!(r.counts_match);
        assert!(r.kernel_descriptions_match);
        assert!(r.chain_descending);
        assert!(r.normality_holds);
        assert!(r.abelian_quotients);
        assert!(r.representatives_complete);
        assert!(r.representative_image_subgroup);
        assert!(r.chain_terminates);
    }

    #[test]
    fn gamma0_chain_at_level_two() {
        let h = gamma0(&t_prime(2), 2, 2).unwrap();
        let c = j_chain(&h, 1 << 16).unwrap();
        assert_eq!(c.m_prime, vec![vec![1, 0], vec![2, 1]]);
        assert_all_checks(&c);
        // |J| = q^4; J^{0,1} already equals J^1 since row 1 of m' is
        // saturated at depth 0.
        let orders: Vec<u128> = c.levels.iter().map(|lv| lv.order).collect();
        assert_eq!(orders, vec![16, 8, 8, 2]);
        let quots: Vec<u128> = c.levels.iter().map(|lv| lv.quotient_order).collect();
        assert_eq!(quots, vec![2, 1, 4, 2]);
        for lv in &c.levels {
            assert_eq!(lv.quotient_order, lv.quotient_formula);
        }
    }

    #[test]
    fn full_group_chain_is_principal_congruence_filtration() {
        let pr = t_prime(2);
        let h = CongruenceDatum::build(&pr, &[2, 2], vec![vec![0; 2]; 2], 2, 1 << 16).unwrap();
        let c = j_chain(&h, 1 << 16).unwrap();
        assert_eq!(c.m_prime, vec![vec![1, 1], vec![1, 1]]);
        assert_all_checks(&c);
        // J = 1 + p M_2 has order q^4 and J^1 = J: the k = 0 quotients
        // are trivial.
        let orders: Vec<u128> = c.levels.iter().map(|lv| lv.order).collect();
        assert_eq!(orders, vec![16, 16, 16, 4]);
    }

    #[test]
    fn gamma1_chain_checks_pass() {
        let h = gamma1(&t_prime(2), 2, 2).unwrap();
        let c = j_chain(&h, 1 << 16).unwrap();
        assert_eq!(c.m_prime, vec![vec![1, 0], vec![2, 2]]);
        assert_all_checks(&c);
    }

    #[test]
    fn parabolic_chain_checks_pass() {
        let h = parabolic(&t_prime(3), &[1, 1], 1).unwrap();
        let c = j_chain(&h, 1 << 16).unwrap();
        assert_all_checks(&c);
        // J is the unipotent radical 1 + E_01 kappa.
        assert_eq!(c.levels[0].order, 3);
    }

    #[test]
    fn requires_standard_shape() {
        let pr = t_prime(2);
        let h = CongruenceDatum::build(&pr, &[1, 2], vec![vec![0; 2]; 2], 2, 1 << 12).unwrap();
        assert_eq!(j_chain(&h, 1 << 12).unwrap_err(), AdmError::NotStandardShape);
    }
}
