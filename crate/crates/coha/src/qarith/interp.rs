//! Polynomial interpolation with holdout verification.
//!
//! Point counts over finite fields are only trusted when they are honestly
//! polynomial in `q`: the interpolant through the first `degree_bound + 1`
//! samples must reproduce every remaining sample exactly, otherwise the
//! caller has to refuse to normalize.

use num::Zero;
use std::collections::BTreeSet;

use super::half_laurent::{HalfLaurent, Rat};
use super::QArithError;

/// The unique polynomial in `q` of degree <= `degree_bound` through the
/// first `degree_bound + 1` samples, checked against all remaining samples.
/// Returned as an exact Laurent object in even half-units.
pub fn interpolate_polynomial(
    samples: &[(Rat, Rat)],
    degree_bound: usize,
) -> Result<HalfLaurent, QArithError> {
    let needed = degree_bound + 2;
    if samples.len() < needed {
        return Err(QArithError::NotEnoughSamples {
            needed,
            got: samples.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for (x, _) in samples {
        if !seen.insert(x.clone()) {
            return Err(QArithError::DuplicateSamplePoint {
                point: x.to_string(),
            });
        }
    }

    // Newton divided differences on the first degree_bound + 1 nodes.
    let n = degree_bound + 1;
    let nodes: Vec<Rat> = samples[..n].iter().map(|(x, _)| x.clone()).collect();
    let mut dd: Vec<Rat> = samples[..n].iter().map(|(_, y)| y.clone()).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            let denom = nodes[i].clone() - nodes[i - level].clone();
            dd[i] = (dd[i].clone() - dd[i - 1].clone()) / denom;
        }
    }

    // Expand sum_k dd[k] * prod_{j<k} (q - x_j) into dense coefficients.
    let mut coeffs: Vec<Rat> = vec![Rat::zero(); n];
    let mut basis: Vec<Rat> = vec![Rat::zero(); n];
    basis[0] = Rat::from_integer(1.into());
    let mut basis_deg = 0usize;
    for (k, d) in dd.iter().enumerate() {
        if k > 0 {
            // basis *= (q - nodes[k-1])
            let x = nodes[k - 1].clone();
            for i in (0..=basis_deg).rev() {
                let c = basis[i].clone();
                basis[i + 1] += c.clone();
                basis[i] = -x.clone() * c;
            }
            basis_deg += 1;
        }
        for i in 0..=basis_deg {
            coeffs[i] += d.clone() * basis[i].clone();
        }
    }

    let poly = HalfLaurent::from_terms(
        coeffs
            .into_iter()
            .enumerate()
            .map(|(k, c)| (2 * k as i64, c)),
    );

    // Every sample, holdouts included, must match exactly.
    for (x, y) in samples {
        let got = poly.eval_q(x)?;
        if &got != y {
            return Err(QArithError::HoldoutMismatch {
                point: x.to_string(),
                expected: y.to_string(),
                got: got.to_string(),
            });
        }
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::super::half_laurent::rat_i;
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<(Rat, Rat)> {
        v.iter().map(|&(x, y)| (rat_i(x), rat_i(y))).collect()
    }

    #[test]
    fn fits_marginal_count() {
        // 3q^2 - 2q through five points
        let p = interpolate_polynomial(&pts(&[(2, 8), (3, 21), (5, 65), (7, 133), (11, 341)]), 2)
            .unwrap();
        assert_eq!(p.coeff(4), rat_i(3));
        assert_eq!(p.coeff(2), rat_i(-2));
        assert_eq!(p.coeff(0), rat_i(0));
    }

    #[test]
    fn fits_pure_power() {
        let p = interpolate_polynomial(
            &pts(&[
                (2, 16),
                (3, 81),
                (5, 625),
                (7, 2401),
                (11, 14641),
                (13, 28561),
            ]),
            4,
        )
        .unwrap();
        assert_eq!(p, HalfLaurent::monomial(8, rat_i(1)));
    }

    #[test]
    fn fits_square() {
        // (2q-1)^2 = 4q^2 - 4q + 1
        let p = interpolate_polynomial(&pts(&[(2, 9), (3, 25), (5, 81), (7, 169), (11, 441)]), 2)
            .unwrap();
        assert_eq!(p.coeff(4), rat_i(4));
        assert_eq!(p.coeff(2), rat_i(-4));
        assert_eq!(p.coeff(0), rat_i(1));
    }

    #[test]
    fn holdout_detects_non_polynomial() {
        // 2^q is not polynomial of degree 2
        let err = interpolate_polynomial(&pts(&[(1, 2), (2, 4), (3, 8), (4, 16), (5, 32)]), 2);
        assert!(matches!(err, Err(QArithError::HoldoutMismatch { .. })));
    }

    #[test]
    fn refuses_short_or_duplicate_input() {
        assert!(matches!(
            interpolate_polynomial(&pts(&[(2, 8), (3, 21), (5, 65)]), 2),
            Err(QArithError::NotEnoughSamples { .. })
        ));
        assert!(matches!(
            interpolate_polynomial(&pts(&[(2, 8), (2, 8), (5, 65), (7, 133)]), 2),
            Err(QArithError::DuplicateSamplePoint { .. })
        ));
    }

    #[test]
    fn reproduces_every_sample_point() {
        let samples = pts(&[(2, 8), (3, 21), (5, 65), (7, 133), (11, 341)]);
        let p = interpolate_polynomial(&samples, 2).unwrap();
        for (x, y) in &samples {
            assert_eq!(&p.eval_q(x).unwrap(), y);
        }
    }
}
