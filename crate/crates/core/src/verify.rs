//! Numerical certification of masking schemes, per-step leakage analysis of
//! circuit states, and the dimension-bound comparison.
//!
//! # Random inputs
//!
//! [`verify_scheme`] draws inputs from a ChaCha20 stream seeded with
//! `ChaCha20Rng::seed_from_u64(seed)`. Each input takes `2w` standard normal
//! samples in order (real part then imaginary part for `k = 0..w`) and is
//! normalized, which is Haar-distributed on the unit sphere of `C^w`. The
//! same `(scheme, n_samples, seed)` always produces the same report.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{MaskError, Result};
use crate::masker::{mask, masking_bound, min_parties, MaskingScheme};
use crate::tensor::{distance_to_maximally_mixed, marginal, DensityMatrix, StateVector};
use crate::{GRAM_TOL, MARGINAL_TOL};

/// Haar-random pure state on a single `dim`-level party.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::from_amplitudes(amps)
        .and_then(|s| s.normalized())
        .expect("a Gaussian vector is nonzero with probability one")
}

/// Seeded generator used by [`verify_scheme`].
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub marginal: f64,
    pub gram: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            marginal: MARGINAL_TOL,
            gram: GRAM_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    /// Every marginal of every tested input is within threshold of `I/d`.
    pub maximally_mixed: bool,
    /// Marginals agree across inputs, party by party. This alone is the
    /// masking condition; a scheme can pass it without being maximally mixed.
    pub input_independent: bool,
    /// Images are orthonormal.
    pub isometry: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaskingReport {
    pub w: usize,
    pub d: usize,
    pub m: usize,
    pub n_samples: usize,
    pub seed: u64,
    /// Number of masked inputs checked: all `w` basis states plus the samples.
    pub n_inputs: usize,
    pub within_bound: bool,
    pub per_party_max_deviation: Vec<f64>,
    pub cross_input_max_variation: Vec<f64>,
    pub isometry_gram_deviation: f64,
    pub thresholds: Thresholds,
    pub verdict: Verdict,
}

impl MaskingReport {
    pub fn passed(&self) -> bool {
        self.verdict.pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization is infallible")
    }
}

pub fn verify_scheme(scheme: &MaskingScheme, n_samples: usize, seed: u64) -> Result<MaskingReport> {
    if n_samples < 2 {
        return Err(MaskError::Argument(format!(
            "need at least 2 random samples, got {n_samples}"
        )));
    }
    let (w, m) = (scheme.w(), scheme.m());
    let mut rng = seeded_rng(seed);
    let inputs = (0..w)
        .map(|k| StateVector::basis(vec![w], k).expect("k < w"))
        .chain((0..n_samples).map(|_| random_state(w, &mut rng)));

    let mut deviation = vec![0.0f64; m];
    let mut variation = vec![0.0f64; m];
    let mut reference: Vec<DensityMatrix> = Vec::with_capacity(m);
    let mut n_inputs = 0;
    for input in inputs {
        let out = mask(scheme, &input)?;
        for party in 0..m {
            let rho = marginal(&out, party)?;
            deviation[party] = deviation[party].max(distance_to_maximally_mixed(&rho));
            match reference.get(party) {
                Some(first) => {
                    variation[party] = variation[party].max(rho.max_abs_diff(first)?);
                }
                None => reference.push(rho),
            }
        }
        n_inputs += 1;
    }

    let gram = scheme.gram_deviation();
    let thresholds = Thresholds::default();
    let maximally_mixed = deviation.iter().all(|&x| x <= thresholds.marginal);
    let input_independent = variation.iter().all(|&x| x <= thresholds.marginal);
    let isometry = gram <= thresholds.gram;
    Ok(MaskingReport {
        w,
        d: scheme.d(),
        m,
        n_samples,
        seed,
        n_inputs,
        within_bound: scheme.within_bound(),
        per_party_max_deviation: deviation,
        cross_input_max_variation: variation,
        isometry_gram_deviation: gram,
        thresholds,
        verdict: Verdict {
            maximally_mixed,
            input_independent,
            isometry,
            pass: maximally_mixed && input_independent && isometry,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartyLeakage {
    pub party: usize,
    pub marginal: DensityMatrix,
    /// Largest off-diagonal modulus of the marginal.
    pub off_diagonal_leak: f64,
    /// Largest `|ρ_ii − 1/d|`.
    pub diagonal_leak: f64,
}

impl PartyLeakage {
    pub fn is_masked(&self, tol: f64) -> bool {
        self.off_diagonal_leak <= tol && self.diagonal_leak <= tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeakageProfile {
    pub parties: Vec<PartyLeakage>,
}

impl LeakageProfile {
    /// Parties whose marginal is `I/d` within `tol`.
    pub fn masked_parties(&self, tol: f64) -> Vec<usize> {
        self.parties
            .iter()
            .filter(|p| p.is_masked(tol))
            .map(|p| p.party)
            .collect()
    }
}

pub fn leakage_profile(state: &StateVector) -> Result<LeakageProfile> {
    let parties = (0..state.n_parties())
        .map(|party| {
            let rho = marginal(state, party)?;
            Ok(PartyLeakage {
                party,
                off_diagonal_leak: rho.max_off_diagonal(),
                diagonal_leak: rho.max_diagonal_deviation(),
                marginal: rho,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LeakageProfile { parties })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinPartiesRow {
    pub w: usize,
    pub min_parties: usize,
    /// The lower bound is below 4, where no scheme is constructed.
    pub needs_m4: bool,
    /// `w ≤ d^⌊m/2⌋` for the report's `m`.
    pub constructible: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub d: usize,
    pub m: usize,
    /// `d^⌊m/2⌋`.
    pub masking_bound: u128,
    /// Quantum Singleton bound `d^{m−2}` for an `((m, w, 2))_d` code.
    pub singleton_bound: u128,
    pub tighter: bool,
    pub min_parties_table: Vec<MinPartiesRow>,
}

impl BoundsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization is infallible")
    }
}

pub fn bounds_report(d: usize, m: usize, w_list: &[usize]) -> Result<BoundsReport> {
    if d < 2 {
        return Err(MaskError::Argument(format!(
            "local dimension {d} is below 2"
        )));
    }
    if m < 4 {
        return Err(MaskError::Unsupported { m });
    }
    let pow = |e: usize| {
        (d as u128)
            .checked_pow(e as u32)
            .ok_or_else(|| MaskError::Argument(format!("{d}^{e} does not fit in 128 bits")))
    };
    let masking = pow(m / 2)?;
    let singleton = pow(m - 2)?;
    let min_parties_table = w_list
        .iter()
        .map(|&w| {
            if w < 2 {
                return Err(MaskError::Argument(format!(
                    "input dimension {w} is below 2"
                )));
            }
            let min = min_parties(w, d);
            Ok(MinPartiesRow {
                w,
                min_parties: min,
                needs_m4: min < 4,
                constructible: w <= masking_bound(d, m),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundsReport {
        d,
        m,
        masking_bound: masking,
        singleton_bound: singleton,
        tighter: masking <= singleton,
        min_parties_table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masker::build_scheme;

    #[test]
    fn example_schemes_pass() {
        for (w, d, m) in [(4, 2, 4), (8, 2, 6)] {
            let report = verify_scheme(&build_scheme(w, d, m).unwrap(), 20, 7).unwrap();
            assert!(report.passed(), "{report:?}");
            assert!(report.per_party_max_deviation.iter().all(|&x| x <= 1e-10));
            assert_eq!(report.n_inputs, w + 20);
        }
    }

    #[test]
    fn corrupted_scheme_fails() {
        let mut images = build_scheme(4, 2, 4).unwrap().images().to_vec();
        images[0] = StateVector::basis(vec![2; 4], 0).unwrap();
        let scheme = MaskingScheme::custom(2, 4, images).unwrap();
        let report = verify_scheme(&scheme, 10, 0).unwrap();
        assert!(!report.passed());
        assert!(!report.verdict.isometry);
        assert!(!report.verdict.maximally_mixed);
        assert_eq!(report.per_party_max_deviation[0], 0.5);
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let scheme = build_scheme(4, 2, 4).unwrap();
        assert!(verify_scheme(&scheme, 1, 0).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let scheme = build_scheme(9, 3, 4).unwrap();
        let a = verify_scheme(&scheme, 5, 42).unwrap().to_json();
        let b = verify_scheme(&scheme, 5, 42).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn random_states_are_normalized() {
        let mut rng = seeded_rng(3);
        for dim in 2..10 {
            assert!(random_state(dim, &mut rng).is_normalized());
        }
    }

    #[test]
    fn bounds_examples() {
        let r = bounds_report(2, 6, &[]).unwrap();
        assert_eq!(
            (r.masking_bound, r.singleton_bound, r.tighter),
            (8, 16, true)
        );
        let r = bounds_report(3, 4, &[]).unwrap();
        assert_eq!((r.masking_bound, r.singleton_bound), (9, 9));
        let r = bounds_report(2, 4, &[2, 3, 4]).unwrap();
        let mins: Vec<usize> = r
            .min_parties_table
            .iter()
            .map(|row| row.min_parties)
            .collect();
        assert_eq!(mins, vec![2, 4, 4]);
        let flagged: Vec<bool> = r.min_parties_table.iter().map(|row| row.needs_m4).collect();
        assert_eq!(flagged, vec![true, false, false]);
        assert!(bounds_report(2, 3, &[]).is_err());
        assert!(bounds_report(2, 4, &[1]).is_err());
    }
}
