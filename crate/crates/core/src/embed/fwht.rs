use crate::error::{Error, Result};

/// In-place unnormalized fast Walsh–Hadamard transform, `v <- H v`.
///
/// `H` is the Sylvester-ordered Hadamard matrix with `±1` entries,
/// `H[a, b] = (-1)^popcount(a & b)`, so `Hᵀ H = len · I`.
pub fn fwht(v: &mut [f64]) -> Result<()> {
    let n = v.len();
    if !n.is_power_of_two() {
        return Err(Error::invalid(format!(
            "Walsh-Hadamard transform needs a power-of-two length, got {n}"
        )));
    }
    let mut h = 1;
    while h < n {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    Ok(())
}

/// Entry `H[a, b]` of the Sylvester Hadamard matrix.
#[inline]
pub fn hadamard_entry(a: usize, b: usize) -> f64 {
    if (a & b).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_basis_vector_gives_first_column() {
        let mut v = [1.0, 0.0, 0.0, 0.0];
        fwht(&mut v).unwrap();
        assert_eq!(v, [1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn matches_explicit_matrix() {
        let x = [0.5, -1.0, 2.0, 3.0, 0.0, 1.5, -2.5, 4.0];
        let mut v = x;
        fwht(&mut v).unwrap();
        for (a, va) in v.iter().enumerate() {
            let want: f64 = x.iter().enumerate().map(|(b, xb)| hadamard_entry(a, b) * xb).sum();
            assert_eq!(*va, want);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(fwht(&mut [1.0, 2.0, 3.0]).is_err());
        assert!(fwht(&mut []).is_err());
    }

    proptest! {
        #[test]
        fn twice_is_scaled_identity(x in prop::collection::vec(-1e3f64..1e3, 4)) {
            let mut v = x.clone();
            fwht(&mut v).unwrap();
            let e: f64 = v.iter().map(|a| a * a).sum();
            let e0: f64 = x.iter().map(|a| a * a).sum();
            prop_assert!((e - 4.0 * e0).abs() <= 1e-12 * (1.0 + e));
            fwht(&mut v).unwrap();
            for (a, b) in v.iter().zip(&x) {
                prop_assert!((a - 4.0 * b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }
}
