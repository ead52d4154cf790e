//! Primes of A = F_q[t] and their residue fields.

use serde::{Deserialize, Serialize};

use super::field::FieldCtx;
use super::poly::{self, Poly};
use super::{FfError, FqCtx};

/// A monic irreducible p together with the derived constants the rest of
/// the crate keeps reaching for: delta = deg p, q_p = |A/p|, and the residue
/// field kappa = F_q[t]/(p).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeInfo {
    pub fq: FqCtx,
    pub p: Poly,
    pub delta: usize,
    pub q_wp: u64,
    pub kappa: FieldCtx,
}

pub fn prime_data(fq: &FqCtx, p: &Poly) -> Result<PrimeInfo, FfError> {
    if !p.is_monic(fq) {
        return Err(FfError::NotMonic(p.show(fq)));
    }
    let delta = p.deg().unwrap();
    if delta == 0 || !poly::is_irreducible(fq, p) {
        return Err(FfError::NotIrreducible { q: fq.q(), poly: p.show(fq) });
    }
    let mut q_wp: u64 = 1;
    for _ in 0..delta {
        q_wp = q_wp
            .checked_mul(fq.q())
            .filter(|&v| v <= 1 << 32)
            .ok_or_else(|| FfError::CapacityExceeded(format!("residue field size q^{delta}")))?;
    }
    let kappa = FieldCtx { base: fq.clone(), m: delta, modulus: p.clone() };
    Ok(PrimeInfo { fq: fq.clone(), p: p.clone(), delta, q_wp, kappa })
}

/// |a| = q^{deg a} for nonzero a; the zero element has no absolute value.
pub fn absolute_value(fq: &FqCtx, a: &Poly) -> Result<u64, FfError> {
    let deg = a.deg().ok_or(FfError::ZeroElement)?;
    let mut v: u64 = 1;
    for _ in 0..deg {
        v = v
            .checked_mul(fq.q())
            .ok_or_else(|| FfError::CapacityExceeded(format!("absolute value q^{deg}")))?;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_data_accepts_and_rejects() {
        let f2 = FqCtx::prime(2).unwrap();
        let info = prime_data(&f2, &Poly::from_indices(&f2, &[1, 1, 1])).unwrap();
        assert_eq!(info.delta, 2);
        assert_eq!(info.q_wp, 4);
        assert_eq!(info.kappa.size(), 4);
        let lin = prime_data(&f2, &Poly::t(&f2)).unwrap();
        assert_eq!(lin.delta, 1);
        assert_eq!(lin.q_wp, 2);
        assert!(matches!(
            prime_data(&f2, &Poly::from_indices(&f2, &[1, 0, 1])),
            Err(FfError::NotIrreducible { q: 2, .. })
        ));
        let f3 = FqCtx::prime(3).unwrap();
        assert!(matches!(
            prime_data(&f3, &Poly::from_indices(&f3, &[1, 2])),
            Err(FfError::NotMonic(_))
        ));
    }

    #[test]
    fn absolute_value_is_q_to_the_degree() {
        let f3 = FqCtx::prime(3).unwrap();
        assert_eq!(absolute_value(&f3, &Poly::one(&f3)).unwrap(), 1);
        assert_eq!(absolute_value(&f3, &Poly::t(&f3)).unwrap(), 3);
        let cubic = Poly::from_indices(&f3, &[2, 0, 0, 1]);
        assert_eq!(absolute_value(&f3, &cubic).unwrap(), 27);
        assert_eq!(absolute_value(&f3, &Poly::zero()).unwrap_err(), FfError::ZeroElement);
    }
}
