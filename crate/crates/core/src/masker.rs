//! Masking schemes as column maps `|k⟩ ↦ |Ψ_k⟩`, plus the four-party
//! controlled-gate realizations.
//!
//! A scheme on `m` qudits splits the register into a left half of
//! `⌊m/2⌋` parties and a right half of `⌈m/2⌉` parties and sends
//! `|k⟩ ↦ |ψ_k⟩ ⊗ |υ_k⟩` with `ψ`, `υ` drawn from maximum entangled bases of
//! the two halves. Orthonormality of the `ψ_k` alone makes the map an
//! isometry and forces every single-party marginal to `I/d`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{MaskError, Result};
use crate::gates::{append_ancilla, controlled_power_gate, fourier_gate, Circuit};
use crate::meb::{ghz8_example_basis, ghz_state, two_qudit_meb};
use crate::tensor::{inner_product, tensor_product, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// `C^4 → (C^2)^{⊗4}` with Bell-pair images.
    Example1,
    /// `C^8 → (C^2)^{⊗6}` with GHZ-pair images.
    Example2,
    /// `C^h → (C^d)^{⊗4}` for `h ≤ d²`.
    Theorem1,
    /// `C^w → (C^d)^{⊗m}` for `w ≤ d^⌊m/2⌋`.
    Theorem2,
    Custom,
}

/// Ordered orthonormal images of the input basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaskingScheme {
    w: usize,
    d: usize,
    m: usize,
    provenance: Provenance,
    images: Vec<StateVector>,
}

impl MaskingScheme {
    /// Scheme from arbitrary images on `[d; m]`. Only shapes are checked, so
    /// the result may violate the masking invariants.
    pub fn custom(d: usize, m: usize, images: Vec<StateVector>) -> Result<Self> {
        let dims = vec![d; m];
        if images.is_empty() {
            return Err(MaskError::Argument(
                "a scheme needs at least one image".into(),
            ));
        }
        if let Some(bad) = images.iter().find(|s| s.dims() != dims.as_slice()) {
            return Err(MaskError::shape(
                format!("{dims:?}"),
                format!("{:?}", bad.dims()),
            ));
        }
        Ok(Self {
            w: images.len(),
            d,
            m,
            provenance: Provenance::Custom,
            images,
        })
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn images(&self) -> &[StateVector] {
        &self.images
    }

    /// `max |⟨Ψ_i|Ψ_j⟩ − δ_ij|`.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.images.iter().enumerate() {
            for (j, b) in self.images.iter().enumerate().skip(i) {
                let g = inner_product(a, b).expect("images share dims");
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    /// `w ≤ d^⌊m/2⌋`.
    pub fn within_bound(&self) -> bool {
        self.w <= masking_bound(self.d, self.m)
    }

    /// JSON document `{w, d, m, provenance, images}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scheme serialization is infallible")
    }
}

/// `d^⌊m/2⌋`, saturating at `usize::MAX`.
pub fn masking_bound(d: usize, m: usize) -> usize {
    d.checked_pow((m / 2) as u32).unwrap_or(usize::MAX)
}

pub fn build_scheme(w: usize, d: usize, m: usize) -> Result<MaskingScheme> {
    if d < 2 {
        return Err(MaskError::Argument(format!(
            "local dimension {d} is below 2"
        )));
    }
    if w < 2 {
        return Err(MaskError::Argument(format!(
            "input dimension {w} is below 2"
        )));
    }
    if m < 4 {
        return Err(MaskError::Unsupported { m });
    }
    let bound = masking_bound(d, m);
    if w > bound {
        return Err(MaskError::BoundViolation { w, d, m, bound });
    }

    let images = if m == 4 {
        let meb = two_qudit_meb(d)?;
        meb.states()[..w]
            .iter()
            .map(|psi| tensor_product(psi, psi))
            .collect()
    } else {
        let (left, right) = (m / 2, m - m / 2);
        (0..w)
            .map(|k| {
                Ok(tensor_product(
                    &ghz_state(d, left, k)?,
                    &ghz_state(d, right, k)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let provenance = match (w, d, m) {
        (4, 2, 4) => Provenance::Example1,
        (8, 2, 6) => Provenance::Example2,
        (_, _, 4) => Provenance::Theorem1,
        _ => Provenance::Theorem2,
    };
    Ok(MaskingScheme {
        w,
        d,
        m,
        provenance,
        images,
    })
}

/// The four Bell-pair images `½(|00⟩±|11⟩)^{⊗2}`, `½(|01⟩±|10⟩)^{⊗2}`,
/// written out ket by ket.
pub fn example1_scheme() -> MaskingScheme {
    const IMAGES: [[(usize, f64); 4]; 4] = [
        [(0b0000, 0.5), (0b0011, 0.5), (0b1100, 0.5), (0b1111, 0.5)],
        [(0b0000, 0.5), (0b0011, -0.5), (0b1100, -0.5), (0b1111, 0.5)],
        [(0b0101, 0.5), (0b0110, 0.5), (0b1001, 0.5), (0b1010, 0.5)],
        [(0b0101, 0.5), (0b0110, -0.5), (0b1001, -0.5), (0b1010, 0.5)],
    ];
    let images = IMAGES
        .iter()
        .map(|terms| {
            let mut amps = vec![Complex64::new(0.0, 0.0); 16];
            for &(index, a) in terms {
                amps[index] = Complex64::new(a, 0.0);
            }
            StateVector::from_parts(vec![2; 4], amps)
        })
        .collect();
    MaskingScheme {
        w: 4,
        d: 2,
        m: 4,
        provenance: Provenance::Example1,
        images,
    }
}

/// GHZ-pair images with the ordering and signs of the eight-level example.
pub fn example2_scheme() -> MaskingScheme {
    let basis = ghz8_example_basis();
    let images = basis
        .states()
        .iter()
        .map(|g| tensor_product(g, g))
        .collect();
    MaskingScheme {
        w: 8,
        d: 2,
        m: 6,
        provenance: Provenance::Example2,
        images,
    }
}

/// `Σ_k a_k |Ψ_k⟩` for an input `Σ_k a_k |k⟩` on a single `w`-level party.
pub fn mask(scheme: &MaskingScheme, input: &StateVector) -> Result<StateVector> {
    if input.dims() != [scheme.w] {
        return Err(MaskError::shape(
            format!("single party of dimension {}", scheme.w),
            format!("{:?}", input.dims()),
        ));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); scheme.images[0].len()];
    for (a, image) in input.amps().iter().zip(&scheme.images) {
        if *a == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (slot, b) in out.iter_mut().zip(image.amps()) {
            *slot += a * b;
        }
    }
    StateVector::new(vec![scheme.d; scheme.m], out)
}

/// Writes `Σ_k a_k |k⟩` (with `w ≤ d²`) as `Σ_k a_k |k mod d⟩|⌊k/d⌋⟩` on two qudits.
pub fn encode_digits(input: &StateVector, d: usize) -> Result<StateVector> {
    let w = match input.dims() {
        [w] if *w <= d * d => *w,
        other => {
            return Err(MaskError::shape(
                format!("single party of dimension at most {}", d * d),
                format!("{other:?}"),
            ))
        }
    };
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for (k, a) in input.amps().iter().enumerate().take(w) {
        amps[(k % d) * d + k / d] = *a;
    }
    StateVector::new(vec![d, d], amps)
}

/// Digit-encoded input followed by two `|0⟩` ancillas, the state the
/// four-party circuits start from.
pub fn circuit_input(input: &StateVector, d: usize) -> Result<StateVector> {
    append_ancilla(&encode_digits(input, d)?, d, 2)
}

/// The qubit masker as four stages:
/// `C(0→2)`, `C(1→3)`, `H(0) C(0→1)`, `H(2) C(2→3)`.
pub fn qubit4_stages() -> Vec<Circuit> {
    let stage = |gates: Vec<crate::gates::Gate>| {
        Circuit::from_gates(vec![2; 4], gates).expect("qubit stage is well formed")
    };
    let cnot = |c, t| controlled_power_gate(2, c, t).expect("distinct parties");
    let h = |p| fourier_gate(2, p).expect("d = 2");
    vec![
        stage(vec![cnot(0, 2)]),
        stage(vec![cnot(1, 3)]),
        stage(vec![h(0), cnot(0, 1)]),
        stage(vec![h(2), cnot(2, 3)]),
    ]
}

pub fn qubit4_circuit() -> Circuit {
    concat(vec![2; 4], &qubit4_stages())
}

/// The qudit masker as four stages:
/// `C(0→2)`, `C(1→3)`, `F(0) F(2)`, `C(0→1) C(2→3)`.
pub fn qudit4_stages(d: usize) -> Result<Vec<Circuit>> {
    let dims = vec![d; 4];
    Ok(vec![
        Circuit::from_gates(dims.clone(), vec![controlled_power_gate(d, 0, 2)?])?,
        Circuit::from_gates(dims.clone(), vec![controlled_power_gate(d, 1, 3)?])?,
        Circuit::from_gates(dims.clone(), vec![fourier_gate(d, 0)?, fourier_gate(d, 2)?])?,
        Circuit::from_gates(
            dims,
            vec![
                controlled_power_gate(d, 0, 1)?,
                controlled_power_gate(d, 2, 3)?,
            ],
        )?,
    ])
}

pub fn qudit4_circuit(d: usize) -> Result<Circuit> {
    Ok(concat(vec![d; 4], &qudit4_stages(d)?))
}

fn concat(dims: Vec<usize>, stages: &[Circuit]) -> Circuit {
    let mut circuit = Circuit::new(dims).expect("valid register");
    for stage in stages {
        circuit.extend(stage).expect("stages share the register");
    }
    circuit
}

/// `2⌈log_d w⌉`, computed with integer arithmetic.
pub fn min_parties(w: usize, d: usize) -> usize {
    assert!(d >= 2, "local dimension must be at least 2");
    let mut t = 0;
    let mut capacity: usize = 1;
    while capacity < w {
        t += 1;
        capacity = match capacity.checked_mul(d) {
            Some(c) => c,
            None => break,
        };
    }
    2 * t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn built_example1_matches_transcription() {
        let built = build_scheme(4, 2, 4).unwrap();
        let written = example1_scheme();
        assert_eq!(built.provenance(), Provenance::Example1);
        for (a, b) in built.images().iter().zip(written.images()) {
            assert!(a.max_abs_diff(b).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn built_example2_matches_transcription() {
        let built = build_scheme(8, 2, 6).unwrap();
        let written = example2_scheme();
        for (a, b) in built.images().iter().zip(written.images()) {
            assert!(a.max_abs_diff(b).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn bound_and_party_errors() {
        assert_eq!(
            build_scheme(9, 2, 4).unwrap_err(),
            MaskError::BoundViolation {
                w: 9,
                d: 2,
                m: 4,
                bound: 4
            }
        );
        assert_eq!(
            build_scheme(2, 2, 3).unwrap_err(),
            MaskError::Unsupported { m: 3 }
        );
        assert!(matches!(build_scheme(1, 2, 4), Err(MaskError::Argument(_))));
        assert!(matches!(build_scheme(2, 1, 4), Err(MaskError::Argument(_))));
    }

    #[test]
    fn mask_basis_zero() {
        let scheme = build_scheme(4, 2, 4).unwrap();
        let out = mask(&scheme, &StateVector::basis(vec![4], 0).unwrap()).unwrap();
        assert_eq!(&out, &scheme.images()[0]);
        assert!(mask(&scheme, &StateVector::basis(vec![8], 0).unwrap()).is_err());
    }

    #[test]
    fn mask_general_input_expands_by_linearity() {
        // Coefficients (a0±a1)/2 on |0000⟩+|1111⟩ / |0011⟩+|1100⟩ and
        // (a2±a3)/2 on |0101⟩+|1010⟩ / |0110⟩+|1001⟩.
        let a = [
            c(0.1),
            Complex64::new(0.3, 0.4),
            c(-0.5),
            Complex64::new(0.0, 0.7),
        ];
        let input = StateVector::from_amplitudes(a.to_vec())
            .unwrap()
            .normalized()
            .unwrap();
        let a = input.amps();
        let out = mask(&build_scheme(4, 2, 4).unwrap(), &input).unwrap();
        let mut want = vec![c(0.0); 16];
        for i in [0b0000, 0b1111] {
            want[i] = (a[0] + a[1]) * 0.5;
        }
        for i in [0b0011, 0b1100] {
            want[i] = (a[0] - a[1]) * 0.5;
        }
        for i in [0b0101, 0b1010] {
            want[i] = (a[2] + a[3]) * 0.5;
        }
        for i in [0b0110, 0b1001] {
            want[i] = (a[2] - a[3]) * 0.5;
        }
        let want = StateVector::new(vec![2; 4], want).unwrap();
        assert!(out.max_abs_diff(&want).unwrap() <= 1e-15);
        assert!((out.norm_sqr() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn encode_digits_puts_low_digit_first() {
        // k = 5, d = 3: |5 mod 3⟩|⌊5/3⌋⟩ = |2⟩|1⟩
        let input = StateVector::basis(vec![9], 5).unwrap();
        let enc = encode_digits(&input, 3).unwrap();
        assert_eq!(enc, StateVector::from_digits(vec![3, 3], &[2, 1]).unwrap());
        // short inputs pad with zero columns
        let enc = encode_digits(&StateVector::basis(vec![3], 2).unwrap(), 2).unwrap();
        assert_eq!(enc, StateVector::from_digits(vec![2, 2], &[0, 1]).unwrap());
        assert!(encode_digits(&StateVector::basis(vec![10], 0).unwrap(), 3).is_err());
    }

    #[test]
    fn qubit_circuit_gate_list() {
        let text = qubit4_circuit().to_text();
        assert_eq!(
            text,
            "DIMS 2 2 2 2\nCPOW d=2 c=0 t=2\nCPOW d=2 c=1 t=3\nF d=2 p=0\n\
             CPOW d=2 c=0 t=1\nF d=2 p=2\nCPOW d=2 c=2 t=3\n"
        );
    }

    #[test]
    fn qubit_circuit_on_zero_input() {
        let input = circuit_input(&StateVector::basis(vec![4], 0).unwrap(), 2).unwrap();
        let out = qubit4_circuit().apply(&input).unwrap();
        let mut want = vec![c(0.0); 16];
        for i in [0b0000, 0b1111, 0b0011, 0b1100] {
            want[i] = c(0.5);
        }
        assert!(
            out.max_abs_diff(&StateVector::new(vec![2; 4], want).unwrap())
                .unwrap()
                <= 1e-15
        );
    }

    #[test]
    fn min_parties_examples() {
        assert_eq!(min_parties(4, 2), 4);
        assert_eq!(min_parties(8, 2), 6);
        assert_eq!(min_parties(3, 3), 2);
        assert_eq!(min_parties(9, 3), 4);
        assert_eq!(min_parties(10, 3), 6);
        assert_eq!(min_parties(2, 2), 2);
        assert_eq!(min_parties(usize::MAX, 2), 2 * 64);
    }

    #[test]
    fn custom_scheme_checks_shapes() {
        let img = StateVector::basis(vec![2; 4], 0).unwrap();
        let s = MaskingScheme::custom(2, 4, vec![img.clone()]).unwrap();
        assert_eq!(s.provenance(), Provenance::Custom);
        assert_eq!(s.w(), 1);
        assert!(MaskingScheme::custom(3, 4, vec![img]).is_err());
        assert!(MaskingScheme::custom(2, 4, vec![]).is_err());
    }

    #[test]
    fn scheme_json_fields() {
        let v: serde_json::Value =
            serde_json::from_str(&build_scheme(4, 2, 4).unwrap().to_json()).unwrap();
        assert_eq!(v["w"], 4);
        assert_eq!(v["provenance"], "example1");
        assert_eq!(v["images"].as_array().unwrap().len(), 4);
        let first = v["images"][0][0].as_array().unwrap();
        assert!((first[0].as_f64().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(first[1], 0.0);
    }
}
