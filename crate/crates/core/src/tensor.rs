//! Dense state vectors and density matrices over multi-qudit registers.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{MaskError, Result};
use crate::STRUCTURAL_TOL;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pure state on a register with explicit per-party dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        check_dims(&dims)?;
        let total: usize = dims.iter().product();
        if amps.len() != total {
            return Err(MaskError::shape(
                format!("{total} amplitudes for dims {dims:?}"),
                amps.len(),
            ));
        }
        Ok(Self { dims, amps })
    }

    /// Single-party state from a list of amplitudes; the party dimension is
    /// the list length.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        Self::new(vec![amps.len()], amps)
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let total = dims.iter().product();
        Ok(Self {
            dims,
            amps: vec![ZERO; total],
        })
    }

    /// Computational basis state `|index⟩` in flat (big-endian) numbering.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let mut state = Self::zeros(dims)?;
        if index >= state.amps.len() {
            return Err(MaskError::Argument(format!(
                "basis index {index} out of range for dimension {}",
                state.amps.len()
            )));
        }
        state.amps[index] = ONE;
        Ok(state)
    }

    /// Computational basis state given one digit per party.
    pub fn from_digits(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        let index = flat_index(&dims, digits)?;
        Self::basis(dims, index)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, digits: &[usize]) -> Result<Complex64> {
        Ok(self.amps[flat_index(&self.dims, digits)?])
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= STRUCTURAL_TOL
    }

    /// Returns the state rescaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(MaskError::Argument(
                "cannot normalize the zero vector".into(),
            ));
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        same_dims(self, other)?;
        Ok(Self {
            dims: self.dims.clone(),
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        same_dims(self, other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `|⟨self|other⟩|`, the overlap used to compare states up to global phase.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(inner_product(self, other)?.norm())
    }

    pub(crate) fn from_parts(dims: Vec<usize>, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), amps.len());
        Self { dims, amps }
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }
}

impl Serialize for StateVector {
    /// Serialized as a list of `[re, im]` pairs.
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.amps.len()))?;
        for a in &self.amps {
            seq.serialize_element(&[a.re, a.im])?;
        }
        seq.end()
    }
}

impl fmt::Display for StateVector {
    /// Nonzero kets in digit notation, e.g. `(0.5+0i)|0011⟩`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() <= STRUCTURAL_TOL {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let digits = digits_of(&self.dims, i);
            let ket: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
            let sep = if self.dims.iter().any(|&d| d > 10) {
                ","
            } else {
                ""
            };
            write!(
                f,
                "({:.6}{:+.6}i)|{}⟩",
                tidy(a.re),
                tidy(a.im),
                ket.join(sep)
            )?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Flushes roundoff-sized values to +0 for display.
fn tidy(x: f64) -> f64 {
    if x.abs() < 5e-7 {
        0.0
    } else {
        x
    }
}

/// Reduced (or full) density matrix, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    mat: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn new(dim: usize, mat: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || mat.len() != dim * dim {
            return Err(MaskError::shape(format!("{dim}x{dim} matrix"), mat.len()));
        }
        Ok(Self { dim, mat })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut mat = vec![ZERO; dim * dim];
        for i in 0..dim {
            mat[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { dim, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.mat[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.mat
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ_ij ρ_ij ρ_ji, and ρ_ji = conj(ρ_ij) for Hermitian ρ.
        let mut acc = ZERO;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += self.get(i, j) * self.get(j, i);
            }
        }
        acc.re
    }

    /// `‖ρ − ρ†‖_max`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_fn(self.dim, self.dim, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        });
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks hermiticity and positivity within the crate tolerances.
    pub fn is_valid_state(&self) -> bool {
        self.hermiticity_error() <= STRUCTURAL_TOL
            && self.min_eigenvalue() >= -crate::PSD_TOL
            && (self.trace() - ONE).norm() <= STRUCTURAL_TOL
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(MaskError::shape(self.dim, other.dim));
        }
        Ok(self
            .mat
            .iter()
            .zip(&other.mat)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest off-diagonal modulus.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    worst = worst.max(self.get(i, j).norm());
                }
            }
        }
        worst
    }

    /// Largest `|ρ_ii − 1/dim|`.
    pub fn max_diagonal_deviation(&self) -> f64 {
        let uniform = 1.0 / self.dim as f64;
        (0..self.dim)
            .map(|i| (self.get(i, i) - uniform).norm())
            .fold(0.0, f64::max)
    }
}

impl Serialize for DensityMatrix {
    /// Serialized as rows of `[re, im]` pairs.
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .mat
            .chunks(self.dim)
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

/// Sorted, duplicate-free set of 0-based party indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartySet {
    indices: Vec<usize>,
}

impl PartySet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn single(party: usize) -> Self {
        Self {
            indices: vec![party],
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, party: usize) -> bool {
        self.indices.binary_search(&party).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Parties of an `m`-party register not in this set.
    pub fn complement(&self, m: usize) -> Self {
        Self {
            indices: (0..m).filter(|p| !self.contains(*p)).collect(),
        }
    }
}

impl FromIterator<usize> for PartySet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::new(iter)
    }
}

/// Kronecker product; `a`'s parties come first.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> StateVector {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    let mut amps = Vec::with_capacity(a.amps.len() * b.amps.len());
    for x in &a.amps {
        amps.extend(b.amps.iter().map(|y| x * y));
    }
    StateVector { dims, amps }
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    same_dims(a, b)?;
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// `|ψ⟩⟨ψ|` on the full register.
pub fn density_of(state: &StateVector) -> DensityMatrix {
    let n = state.amps.len();
    let mut mat = Vec::with_capacity(n * n);
    for x in &state.amps {
        mat.extend(state.amps.iter().map(|y| x * y.conj()));
    }
    DensityMatrix { dim: n, mat }
}

/// Reduced density matrix on `keep`, tracing out every other party.
///
/// Kept parties retain their relative order, so the result is indexed
/// big-endian over `keep` in ascending party order.
pub fn partial_trace(state: &StateVector, keep: &PartySet) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(MaskError::Argument("keep-set must be non-empty".into()));
    }
    let m = state.n_parties();
    if let Some(&bad) = keep.indices().iter().find(|&&p| p >= m) {
        return Err(MaskError::Argument(format!(
            "party {bad} out of range for a {m}-party register"
        )));
    }

    // Place value of each party inside the kept or traced sub-register.
    let mut kept_place = vec![0usize; m];
    let mut traced_place = vec![0usize; m];
    let (mut kept_dim, mut traced_dim) = (1usize, 1usize);
    for p in (0..m).rev() {
        if keep.contains(p) {
            kept_place[p] = kept_dim;
            kept_dim *= state.dims[p];
        } else {
            traced_place[p] = traced_dim;
            traced_dim *= state.dims[p];
        }
    }

    // Reshape into a kept_dim × traced_dim matrix, then ρ = M M†.
    let mut reshaped = vec![ZERO; kept_dim * traced_dim];
    let mut digits = vec![0usize; m];
    for amp in &state.amps {
        let (mut k, mut t) = (0, 0);
        for p in 0..m {
            k += digits[p] * kept_place[p];
            t += digits[p] * traced_place[p];
        }
        reshaped[k * traced_dim + t] = *amp;
        increment(&mut digits, &state.dims);
    }

    let mut mat = vec![ZERO; kept_dim * kept_dim];
    for a in 0..kept_dim {
        let row_a = &reshaped[a * traced_dim..(a + 1) * traced_dim];
        for b in a..kept_dim {
            let row_b = &reshaped[b * traced_dim..(b + 1) * traced_dim];
            let v: Complex64 = row_a.iter().zip(row_b).map(|(x, y)| x * y.conj()).sum();
            mat[a * kept_dim + b] = v;
            mat[b * kept_dim + a] = v.conj();
        }
    }
    Ok(DensityMatrix { dim: kept_dim, mat })
}

/// Single-party marginal `Tr_{all but party}|ψ⟩⟨ψ|`.
pub fn marginal(state: &StateVector, party: usize) -> Result<DensityMatrix> {
    partial_trace(state, &PartySet::single(party))
}

/// `‖ρ − I/dim‖_max`.
pub fn distance_to_maximally_mixed(rho: &DensityMatrix) -> f64 {
    let uniform = 1.0 / rho.dim as f64;
    let mut worst = 0.0f64;
    for i in 0..rho.dim {
        for j in 0..rho.dim {
            let target = if i == j { uniform } else { 0.0 };
            worst = worst.max((rho.get(i, j) - target).norm());
        }
    }
    worst
}

/// Flat big-endian index of a digit string.
pub fn flat_index(dims: &[usize], digits: &[usize]) -> Result<usize> {
    if digits.len() != dims.len() {
        return Err(MaskError::shape(
            format!("{} digits", dims.len()),
            digits.len(),
        ));
    }
    let mut index = 0;
    for (&digit, &d) in digits.iter().zip(dims) {
        if digit >= d {
            return Err(MaskError::Argument(format!(
                "digit {digit} out of range for dimension {d}"
            )));
        }
        index = index * d + digit;
    }
    Ok(index)
}

/// Inverse of [`flat_index`].
pub fn digits_of(dims: &[usize], mut index: usize) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &d) in digits.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

/// Odometer step over big-endian digits.
fn increment(digits: &mut [usize], dims: &[usize]) {
    for p in (0..digits.len()).rev() {
        digits[p] += 1;
        if digits[p] < dims[p] {
            return;
        }
        digits[p] = 0;
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(MaskError::Argument(
            "register needs at least one party".into(),
        ));
    }
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(MaskError::Argument(format!(
            "party dimension {d} is below 2"
        )));
    }
    Ok(())
}

fn same_dims(a: &StateVector, b: &StateVector) -> Result<()> {
    if a.dims != b.dims {
        return Err(MaskError::shape(
            format!("{:?}", a.dims),
            format!("{:?}", b.dims),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell_phi_plus() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![2, 2], vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)]).unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = StateVector::basis(vec![2], 0).unwrap();
        let out = tensor_product(&zero, &zero);
        assert_eq!(out.dims(), &[2, 2]);
        assert_eq!(out.amps(), &[ONE, ZERO, ZERO, ZERO]);
    }

    #[test]
    fn tensor_of_two_bell_pairs() {
        let out = tensor_product(&bell_phi_plus(), &bell_phi_plus());
        // ½(|00⟩+|11⟩)⊗(|00⟩+|11⟩)
        for (i, a) in out.amps().iter().enumerate() {
            let expected = if [0b0000, 0b0011, 0b1100, 0b1111].contains(&i) {
                0.5
            } else {
                0.0
            };
            assert!((a - c(expected, 0.0)).norm() < 1e-15, "index {i}");
        }
    }

    #[test]
    fn inner_product_of_orthogonal_basis_states() {
        let a = StateVector::basis(vec![2], 0).unwrap();
        let b = StateVector::basis(vec![2], 1).unwrap();
        assert_eq!(inner_product(&a, &b).unwrap(), ZERO);
        assert_eq!(inner_product(&a, &a).unwrap(), ONE);
    }

    #[test]
    fn inner_product_rejects_mismatched_dims() {
        let a = StateVector::basis(vec![2], 0).unwrap();
        let b = StateVector::basis(vec![3], 0).unwrap();
        assert!(matches!(
            inner_product(&a, &b),
            Err(MaskError::Shape { .. })
        ));
    }

    #[test]
    fn density_of_plus_state() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_amplitudes(vec![c(h, 0.0), c(h, 0.0)]).unwrap();
        let rho = density_of(&plus);
        for z in rho.entries() {
            assert!((z - c(0.5, 0.0)).norm() < 1e-15);
        }
        assert!((rho.purity() - 1.0).abs() < 1e-15);

        let zero = StateVector::basis(vec![2], 0).unwrap();
        assert_eq!(density_of(&zero).entries(), &[ONE, ZERO, ZERO, ZERO]);
    }

    #[test]
    fn partial_trace_rejects_empty_keep() {
        let err = partial_trace(&bell_phi_plus(), &PartySet::new([])).unwrap_err();
        assert!(matches!(err, MaskError::Argument(_)));
        let err = partial_trace(&bell_phi_plus(), &PartySet::single(2)).unwrap_err();
        assert!(matches!(err, MaskError::Argument(_)));
    }

    #[test]
    fn partial_trace_of_bell_pair_is_maximally_mixed() {
        let rho = marginal(&bell_phi_plus(), 1).unwrap();
        assert!(distance_to_maximally_mixed(&rho) < 1e-15);
        assert!(rho.is_valid_state());
    }

    #[test]
    fn keeping_everything_returns_the_projector() {
        let psi = bell_phi_plus();
        let rho = partial_trace(&psi, &PartySet::new([0, 1])).unwrap();
        assert!(rho.max_abs_diff(&density_of(&psi)).unwrap() < 1e-15);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            distance_to_maximally_mixed(&DensityMatrix::maximally_mixed(2)),
            0.0
        );
        let pure = DensityMatrix::new(2, vec![ONE, ZERO, ZERO, ZERO]).unwrap();
        assert_eq!(distance_to_maximally_mixed(&pure), 0.5);
    }

    #[test]
    fn mixed_dimension_register() {
        // |1⟩ ⊗ |2⟩ on dims [2, 3]
        let s = StateVector::from_digits(vec![2, 3], &[1, 2]).unwrap();
        assert_eq!(s.amps().iter().position(|a| *a == ONE), Some(5));
        let rho = marginal(&s, 1).unwrap();
        assert_eq!(rho.dim(), 3);
        assert_eq!(rho.get(2, 2), ONE);
        assert_eq!(digits_of(&[2, 3], 5), vec![1, 2]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(StateVector::new(vec![2, 2], vec![ZERO; 3]).is_err());
        assert!(StateVector::new(vec![1, 2], vec![ZERO; 2]).is_err());
        assert!(StateVector::basis(vec![2], 2).is_err());
        assert!(StateVector::zeros(vec![2]).unwrap().normalized().is_err());
    }

    #[test]
    fn density_checks() {
        let rho = DensityMatrix::new(2, vec![c(0.5, 0.0), c(0.0, 0.2), c(0.0, -0.2), c(0.5, 0.0)])
            .unwrap();
        assert!(rho.hermiticity_error() < 1e-15);
        assert!((rho.min_eigenvalue() - 0.3).abs() < 1e-12);
        assert!(rho.is_valid_state());
        let bad = DensityMatrix::new(2, vec![ZERO, ONE, ZERO, ONE]).unwrap();
        assert!(bad.hermiticity_error() > 0.5);
    }
}
