use super::{SupOracle, SupResult};
use crate::error::{Error, Result};

/// Default cap on `n_total`: at most `2^22` sign vectors are enumerated.
pub const DEFAULT_EXACT_SIGN_BITS: u32 = 22;

/// Exact expectation of an oracle over all `2^n` Rademacher sign vectors.
///
/// Bit `i` of the enumeration counter set means `ε_i = −1`. Bracketed oracles
/// yield the averages of both ends; `exact` holds only if every evaluation was exact.
pub fn exact_expectation<O: SupOracle + ?Sized>(oracle: &O, max_bits: u32) -> Result<SupResult> {
    let n = oracle.sign_count();
    if n as u32 > max_bits || n >= 63 {
        return Err(Error::ResourceLimit {
            what: "exact sign enumeration",
            needed: 1u128 << n.min(127),
            budget: 1u64 << max_bits.min(63),
        });
    }
    let count = 1u64 << n;
    let mut signs = vec![1.0; n];
    let (mut lo, mut hi) = (0.0, 0.0);
    let (mut chunk_lo, mut chunk_hi) = (0.0, 0.0);
    let mut exact = true;
    for mask in 0..count {
        for (i, s) in signs.iter_mut().enumerate() {
            *s = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
        }
        let r = oracle.evaluate(&signs);
        chunk_lo += r.value;
        chunk_hi += r.upper;
        exact &= r.exact;
        if mask % 4096 == 4095 {
            lo += chunk_lo;
            hi += chunk_hi;
            chunk_lo = 0.0;
            chunk_hi = 0.0;
        }
    }
    lo += chunk_lo;
    hi += chunk_hi;
    let c = count as f64;
    Ok(SupResult {
        value: lo / c,
        upper: hi / c,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::FiniteClass;

    #[test]
    fn odd_linear_functional_averages_to_zero() {
        let z = [0.3, -1.2, 2.0, 0.7];
        let oracle = (4usize, |e: &[f64]| e.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>());
        let r = exact_expectation(&oracle, 22).unwrap();
        assert!(r.value.abs() < 1e-15);
    }

    #[test]
    fn symmetric_pair_gives_abs_coordinate() {
        let a = FiniteClass::new(vec![vec![1.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(exact_expectation(&a, 22).unwrap().value, 1.0);
    }

    #[test]
    fn budget_exceeded() {
        let oracle = (30usize, |_: &[f64]| 0.0);
        assert!(matches!(
            exact_expectation(&oracle, DEFAULT_EXACT_SIGN_BITS),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
