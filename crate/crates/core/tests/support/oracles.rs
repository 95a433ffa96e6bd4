//! Brute-force reference computations shared by the integration suites.
//!
//! Nothing here calls into the library's tensor or gate code paths; states
//! enter and leave as plain amplitude slices.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Big-endian digits of `index`, party `p` carrying weight `∏ dims[p+1..]`.
pub fn digits(dims: &[usize], index: usize) -> Vec<usize> {
    (0..dims.len())
        .map(|p| {
            let weight: usize = dims[p + 1..].iter().product();
            (index / weight) % dims[p]
        })
        .collect()
}

fn sub_index(dims: &[usize], digits: &[usize], parties: &[usize]) -> usize {
    parties.iter().fold(0, |acc, &p| acc * dims[p] + digits[p])
}

/// Reduced density matrix on `keep` (ascending) by forming the full
/// `|ψ⟩⟨ψ|` and summing every entry whose traced-out digits agree.
pub fn dense_partial_trace(
    dims: &[usize],
    amps: &[Complex64],
    keep: &[usize],
) -> (usize, Vec<Complex64>) {
    let n = amps.len();
    let full: Vec<Complex64> = (0..n * n)
        .map(|ij| amps[ij / n] * amps[ij % n].conj())
        .collect();
    let kept_dim: usize = keep.iter().map(|&p| dims[p]).product();
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !keep.contains(p)).collect();
    let all_digits: Vec<Vec<usize>> = (0..n).map(|i| digits(dims, i)).collect();
    let mut out = vec![cz(0.0, 0.0); kept_dim * kept_dim];
    for i in 0..n {
        for j in 0..n {
            if traced.iter().all(|&p| all_digits[i][p] == all_digits[j][p]) {
                let a = sub_index(dims, &all_digits[i], keep);
                let b = sub_index(dims, &all_digits[j], keep);
                out[a * kept_dim + b] += full[i * n + j];
            }
        }
    }
    (kept_dim, out)
}

/// Full-register matrix of a local operator `local` (row-major, indexed
/// big-endian over `parties` in the given order).
pub fn embed(dims: &[usize], parties: &[usize], local: &[Complex64]) -> Vec<Complex64> {
    let n: usize = dims.iter().product();
    let local_dim: usize = parties.iter().map(|&p| dims[p]).product();
    assert_eq!(local.len(), local_dim * local_dim);
    let all_digits: Vec<Vec<usize>> = (0..n).map(|i| digits(dims, i)).collect();
    let spectators: Vec<usize> = (0..dims.len()).filter(|p| !parties.contains(p)).collect();
    let mut out = vec![cz(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            if spectators
                .iter()
                .all(|&p| all_digits[i][p] == all_digits[j][p])
            {
                let r = sub_index(dims, &all_digits[i], parties);
                let c = sub_index(dims, &all_digits[j], parties);
                out[i * n + j] = local[r * local_dim + c];
            }
        }
    }
    out
}

pub fn mat_vec(mat: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|j| mat[i * n + j] * v[j]).sum())
        .collect()
}

/// `(1/d) Σ_i Σ_j ω^{(i+j)(k mod d)} |j⟩|(j+⌊k/d⌋) mod d⟩|i⟩|(i+⌊k/d⌋) mod d⟩`.
pub fn qudit_final_state(d: usize, k: usize) -> Vec<Complex64> {
    let (phase, shift) = (k % d, k / d);
    let mut out = vec![cz(0.0, 0.0); d.pow(4)];
    for i in 0..d {
        for j in 0..d {
            let angle = 2.0 * PI * ((i + j) * phase) as f64 / d as f64;
            let idx = ((j * d + (j + shift) % d) * d + i) * d + (i + shift) % d;
            out[idx] += Complex64::from_polar(1.0 / d as f64, angle);
        }
    }
    out
}

/// `2t` for the least `t` with `d^t ≥ w`.
pub fn min_parties_oracle(w: usize, d: usize) -> usize {
    let t = (0u32..).find(|&t| (d as u128).pow(t) >= w as u128).unwrap();
    2 * t as usize
}

/// Amplitude vector from `(bitstring, coefficient)` terms on `n` qubits.
pub fn qubit_kets(n: usize, terms: &[(&str, Complex64)]) -> Vec<Complex64> {
    let mut out = vec![cz(0.0, 0.0); 1 << n];
    for (bits, a) in terms {
        assert_eq!(bits.len(), n);
        out[usize::from_str_radix(bits, 2).unwrap()] += *a;
    }
    out
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Every ordered list of factors ≥ 2 whose product is at most `limit`.
pub fn registers_up_to(limit: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, product: usize, limit: usize, out: &mut Vec<Vec<usize>>) {
        for f in 2..=limit / product {
            prefix.push(f);
            out.push(prefix.clone());
            extend(prefix, product * f, limit, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 1, limit, &mut out);
    out
}
