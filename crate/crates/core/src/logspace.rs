//! Log-space probability arithmetic.

/// `ln(e^a + e^b)` via the max-shift identity; `-inf` is the identity.
pub fn log_sum(a: f64, b: f64) -> f64 {
    let z = a.max(b);
    if z == f64::NEG_INFINITY {
        return z;
    }
    z + ((a - z).exp() + (b - z).exp()).ln()
}

/// Log-sum over an iterator; empty input gives `-inf`.
pub fn log_sum_all<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let z = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if z == f64::NEG_INFINITY {
        return z;
    }
    z + xs.iter().map(|x| (x - z).exp()).sum::<f64>().ln()
}

/// Natural log that maps 0 to `-inf` without warnings.
pub fn ln(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else {
        p.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn halves_sum_to_one() {
        assert!(log_sum(0.5f64.ln(), 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn neg_infinity_is_identity() {
        let p = 0.3f64.ln();
        assert_eq!(log_sum(f64::NEG_INFINITY, p), p);
        assert_eq!(log_sum(p, f64::NEG_INFINITY), p);
        assert_eq!(log_sum(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(log_sum_all(std::iter::empty()), f64::NEG_INFINITY);
    }

    #[test]
    fn tiny_values_do_not_underflow() {
        let a = 1e-300f64.ln();
        let got = log_sum(a, a);
        let want = 2f64.ln() + a;
        assert!((got - want).abs() < 1e-12);
        assert!(got.is_finite());
    }

    proptest! {
        #[test]
        fn matches_direct_sum(a in 1e-6f64..1.0, b in 1e-6f64..1.0) {
            let got = log_sum(a.ln(), b.ln());
            prop_assert!((got - (a + b).ln()).abs() < 1e-12);
        }

        #[test]
        fn commutative(a in -700f64..0.0, b in -700f64..0.0) {
            prop_assert_eq!(log_sum(a, b), log_sum(b, a));
        }
    }
}
