//! Experimental orders of convergence.

use crate::error::VerificationError;

/// Pairwise rates `log(e/e') / log(h/h')` of consecutive levels.
pub fn eoc(levels: &[(f64, f64)]) -> Result<Vec<f64>, VerificationError> {
    if levels.len() < 2 {
        return Err(VerificationError::TooFewLevels { needed: 2, got: levels.len() });
    }
    for (level, &(h, e)) in levels.iter().enumerate() {
        if !(e > 0.0 && e.is_finite()) {
            return Err(VerificationError::NonPositiveError { level, value: e });
        }
        if !(h > 0.0) || (level > 0 && h == levels[level - 1].0) {
            return Err(VerificationError::BadMeshSize { level });
        }
    }
    Ok(levels.windows(2).map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert!((eoc(&[(1.0, 0.4), (0.5, 0.2)]).unwrap()[0] - 1.0).abs() < 1e-15);
        let r = eoc(&[(0.5, 1.5e-3), (0.25, 3.1e-4)]).unwrap()[0];
        assert!((r - 2.274_622).abs() < 1e-5, "{r}");
        assert_eq!(eoc(&[(1.0, 0.3), (0.5, 0.3)]).unwrap()[0], 0.0);
        assert!(eoc(&[(1.0, 0.3)]).is_err());
        assert!(eoc(&[(1.0, 0.3), (0.5, 0.0)]).is_err());
    }

    proptest! {
        #[test]
        fn power_law_recovers_exponent(c in 0.01f64..100.0, m in 0.1f64..4.0, h0 in 0.05f64..1.0) {
            let levels: Vec<_> = (0..4).map(|i| {
                let h = h0 / 2f64.powi(i);
                (h, c * h.powf(m))
            }).collect();
            for r in eoc(&levels).unwrap() {
                prop_assert!((r - m).abs() < 1e-9);
            }
        }
    }
}
