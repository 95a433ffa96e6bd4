//! Maximum entangled bases: orthonormal bases of `(C^d)^{⊗n}` whose every
//! element has all single-party reductions equal to `I/d`.
//!
//! Two families are provided:
//!
//! * [`two_qudit_meb`]: `|ψ_k⟩ = d^{-1/2} Σ_j ω^{j(k mod d)} |j⟩|(j + ⌊k/d⌋) mod d⟩`,
//!   labelled by `k` with the phase index `k mod d` running fastest.
//! * [`ghz_basis`]: `|g⟩ = d^{-1/2} Σ_j ω^{js} |j, j+t₁, …, j+t_{n-1}⟩` (shifts mod `d`),
//!   labelled by the big-endian base-`d` number with digits `(s, t₁, …, t_{n-1})`,
//!   so the phase index `s` runs slowest.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{MaskError, Result};
use crate::gates::roots_of_unity;
use crate::tensor::{digits_of, distance_to_maximally_mixed, inner_product, marginal, StateVector};
use crate::GRAM_TOL;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MebFamily {
    d: usize,
    n_parties: usize,
    labels: Vec<usize>,
    states: Vec<StateVector>,
}

/// Outcome of [`certify_meb`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MebCertificate {
    /// `max |G − I|` over the Gram matrix of the family.
    pub gram_deviation: f64,
    /// Largest single-party distance from `I/d` over all states and parties.
    pub marginal_deviation: f64,
    pub orthonormal: bool,
    pub maximally_mixed: bool,
    /// The family has exactly `d^n` members.
    pub complete: bool,
}

impl MebCertificate {
    pub fn passed(&self) -> bool {
        self.orthonormal && self.maximally_mixed && self.complete
    }
}

impl MebFamily {
    /// Wraps an arbitrary list of states; only shapes are checked.
    pub fn from_states(
        d: usize,
        n_parties: usize,
        labels: Vec<usize>,
        states: Vec<StateVector>,
    ) -> Result<Self> {
        if labels.len() != states.len() {
            return Err(MaskError::shape(
                format!("{} labels", states.len()),
                labels.len(),
            ));
        }
        let dims = vec![d; n_parties];
        if let Some(bad) = states.iter().find(|s| s.dims() != dims.as_slice()) {
            return Err(MaskError::shape(
                format!("{dims:?}"),
                format!("{:?}", bad.dims()),
            ));
        }
        Ok(Self {
            d,
            n_parties,
            labels,
            states,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Family with the member at `index` dropped.
    pub fn without(&self, index: usize) -> Self {
        let mut out = self.clone();
        out.labels.remove(index);
        out.states.remove(index);
        out
    }

    /// JSON document `{d, n_parties, labels, states}`, amplitudes as `[re, im]`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("MEB serialization is infallible")
    }
}

pub fn two_qudit_meb(d: usize) -> Result<MebFamily> {
    check_params(d, 2)?;
    let roots = roots_of_unity(d);
    let scale = 1.0 / (d as f64).sqrt();
    let states = (0..d * d)
        .map(|k| {
            let (phase, shift) = (k % d, k / d);
            let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
            for j in 0..d {
                amps[j * d + (j + shift) % d] = roots[(j * phase) % d] * scale;
            }
            StateVector::from_parts(vec![d, d], amps)
        })
        .collect();
    Ok(MebFamily {
        d,
        n_parties: 2,
        labels: (0..d * d).collect(),
        states,
    })
}

pub fn ghz_basis(d: usize, n_parties: usize) -> Result<MebFamily> {
    check_params(d, n_parties)?;
    let count = d.pow(n_parties as u32);
    let states = (0..count)
        .map(|label| ghz_state(d, n_parties, label))
        .collect::<Result<Vec<_>>>()?;
    Ok(MebFamily {
        d,
        n_parties,
        labels: (0..count).collect(),
        states,
    })
}

/// Member `label` of [`ghz_basis`] without building the whole family.
pub fn ghz_state(d: usize, n_parties: usize, label: usize) -> Result<StateVector> {
    check_params(d, n_parties)?;
    let dims = vec![d; n_parties];
    let count: usize = dims.iter().product();
    if label >= count {
        return Err(MaskError::Argument(format!(
            "label {label} out of range for a basis of {count} states"
        )));
    }
    let digits = digits_of(&dims, label);
    let (phase, shifts) = (digits[0], &digits[1..]);
    let roots = roots_of_unity(d);
    let scale = 1.0 / (d as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); count];
    for j in 0..d {
        let index = shifts.iter().fold(j, |acc, t| acc * d + (j + t) % d);
        amps[index] = roots[(j * phase) % d] * scale;
    }
    Ok(StateVector::from_parts(dims, amps))
}

/// The eight three-qubit GHZ-type states with the ordering and signs of the
/// `C^8 → (C^2)^{⊗6}` example: `k < 4` are `|x⟩ + |x̄⟩` and `k ≥ 4` the
/// matching `|x⟩ − |x̄⟩`, with `x ∈ {000, 001, 010, 100}`.
pub fn ghz8_example_basis() -> MebFamily {
    const HEADS: [usize; 4] = [0b000, 0b001, 0b010, 0b100];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let states = (0..8)
        .map(|k| {
            let head = HEADS[k % 4];
            let sign = if k < 4 { 1.0 } else { -1.0 };
            let mut amps = vec![Complex64::new(0.0, 0.0); 8];
            amps[head] = Complex64::new(h, 0.0);
            amps[head ^ 0b111] = Complex64::new(sign * h, 0.0);
            StateVector::from_parts(vec![2, 2, 2], amps)
        })
        .collect();
    MebFamily {
        d: 2,
        n_parties: 3,
        labels: (0..8).collect(),
        states,
    }
}

pub fn certify_meb(family: &MebFamily) -> MebCertificate {
    let mut gram_deviation = 0.0f64;
    for (i, a) in family.states.iter().enumerate() {
        for (j, b) in family.states.iter().enumerate().skip(i) {
            let g = inner_product(a, b).expect("family states share dims");
            let target = if i == j { 1.0 } else { 0.0 };
            gram_deviation = gram_deviation.max((g - target).norm());
        }
    }
    let mut marginal_deviation = 0.0f64;
    for state in &family.states {
        for party in 0..family.n_parties {
            let rho = marginal(state, party).expect("party index in range");
            marginal_deviation = marginal_deviation.max(distance_to_maximally_mixed(&rho));
        }
    }
    let complete = family.d.checked_pow(family.n_parties as u32) == Some(family.states.len());
    MebCertificate {
        gram_deviation,
        marginal_deviation,
        orthonormal: gram_deviation <= GRAM_TOL,
        maximally_mixed: marginal_deviation <= GRAM_TOL,
        complete,
    }
}

fn check_params(d: usize, n_parties: usize) -> Result<()> {
    if d < 2 {
        return Err(MaskError::Argument(format!(
            "local dimension {d} is below 2"
        )));
    }
    if n_parties < 2 {
        return Err(MaskError::Argument(format!(
            "an MEB needs at least 2 parties, got {n_parties}"
        )));
    }
    Ok(())
}
