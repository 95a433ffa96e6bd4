//! Qudit gates and circuits applied by index arithmetic.
//!
//! Gates never materialize a full-register matrix. [`Gate::matrix`] gives the
//! local dense realization for checking purposes only.
//!
//! # Text format
//!
//! A circuit serializes to one line per item. The first line fixes the
//! register, each following line is one gate, parties are 0-based:
//!
//! ```text
//! DIMS 3 3 3 3
//! CPOW d=3 c=0 t=2
//! F d=3 p=0
//! X^k d=3 p=2 k=1
//! PERM map=0,2,1,3
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{MaskError, Result};
use crate::tensor::{tensor_product, StateVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GateKind {
    /// `U^power` with `U|j⟩ = |(j+1) mod dim⟩`; `power` is kept reduced mod `dim`.
    Shift { dim: usize, power: usize },
    /// Discrete Fourier gate `F|j⟩ = d^{-1/2} Σ_l ω^{jl} |l⟩`.
    Fourier { dim: usize },
    /// `Σ_j |j⟩⟨j| ⊗ U^j`: `|j⟩|t⟩ ↦ |j⟩|(t+j) mod target_dim⟩`.
    ControlledPower {
        control_dim: usize,
        target_dim: usize,
    },
    /// Permutation of the whole register's flat basis: `|i⟩ ↦ |map[i]⟩`.
    Relabel { map: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    kind: GateKind,
    parties: Vec<usize>,
}

pub fn shift_gate(dim: usize, power: i64, party: usize) -> Result<Gate> {
    check_local_dim(dim)?;
    let power = power.rem_euclid(dim as i64) as usize;
    Ok(Gate {
        kind: GateKind::Shift { dim, power },
        parties: vec![party],
    })
}

pub fn fourier_gate(dim: usize, party: usize) -> Result<Gate> {
    check_local_dim(dim)?;
    Ok(Gate {
        kind: GateKind::Fourier { dim },
        parties: vec![party],
    })
}

pub fn controlled_power_gate(dim: usize, control: usize, target: usize) -> Result<Gate> {
    check_local_dim(dim)?;
    if control == target {
        return Err(MaskError::Argument(format!(
            "control and target are both party {control}"
        )));
    }
    Ok(Gate {
        kind: GateKind::ControlledPower {
            control_dim: dim,
            target_dim: dim,
        },
        parties: vec![control, target],
    })
}

/// Basis relabeling of an `n_parties` register; `map` must be a permutation.
pub fn relabel_gate(map: Vec<usize>, n_parties: usize) -> Result<Gate> {
    let mut seen = vec![false; map.len()];
    for &target in &map {
        if target >= map.len() || std::mem::replace(&mut seen[target], true) {
            return Err(MaskError::Argument(format!(
                "relabel map is not a permutation of 0..{}",
                map.len()
            )));
        }
    }
    Ok(Gate {
        kind: GateKind::Relabel { map },
        parties: (0..n_parties).collect(),
    })
}

impl Gate {
    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn parties(&self) -> &[usize] {
        &self.parties
    }

    /// Dense matrix on the gate's own parties (control first for
    /// controlled gates, the whole register for relabels).
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match &self.kind {
            GateKind::Shift { dim, power } => DMatrix::from_fn(*dim, *dim, |row, col| {
                if row == (col + power) % dim {
                    one
                } else {
                    zero
                }
            }),
            GateKind::Fourier { dim } => {
                let roots = roots_of_unity(*dim);
                let scale = 1.0 / (*dim as f64).sqrt();
                DMatrix::from_fn(*dim, *dim, |row, col| roots[(row * col) % dim] * scale)
            }
            GateKind::ControlledPower {
                control_dim,
                target_dim,
            } => {
                let n = control_dim * target_dim;
                DMatrix::from_fn(n, n, |row, col| {
                    let (c, t) = (col / target_dim, col % target_dim);
                    if row == c * target_dim + (t + c) % target_dim {
                        one
                    } else {
                        zero
                    }
                })
            }
            GateKind::Relabel { map } => DMatrix::from_fn(map.len(), map.len(), |row, col| {
                if map[col] == row {
                    one
                } else {
                    zero
                }
            }),
        }
    }

    /// Checks the gate against a register.
    fn validate(&self, dims: &[usize]) -> Result<()> {
        if let Some(&p) = self.parties.iter().find(|&&p| p >= dims.len()) {
            return Err(MaskError::Argument(format!(
                "gate party {p} out of range for a {}-party register",
                dims.len()
            )));
        }
        let mismatch = |party: usize, want: usize| {
            MaskError::shape(
                format!("party {party} of dimension {want}"),
                format!("dimension {}", dims[party]),
            )
        };
        match &self.kind {
            GateKind::Shift { dim, .. } | GateKind::Fourier { dim } => {
                let p = self.parties[0];
                if dims[p] != *dim {
                    return Err(mismatch(p, *dim));
                }
            }
            GateKind::ControlledPower {
                control_dim,
                target_dim,
            } => {
                let (c, t) = (self.parties[0], self.parties[1]);
                if dims[c] != *control_dim {
                    return Err(mismatch(c, *control_dim));
                }
                if dims[t] != *target_dim {
                    return Err(mismatch(t, *target_dim));
                }
            }
            GateKind::Relabel { map } => {
                let total: usize = dims.iter().product();
                if map.len() != total || self.parties.len() != dims.len() {
                    return Err(MaskError::shape(
                        format!("relabel of {total} basis states"),
                        map.len(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Applies the gate in place; assumes [`Gate::validate`] passed.
    fn act(&self, dims: &[usize], amps: &mut [Complex64]) {
        match &self.kind {
            GateKind::Shift { dim, power } => {
                let power = *power;
                act_local(dims, self.parties[0], amps, |inp, out| {
                    for (j, a) in inp.iter().enumerate() {
                        out[(j + power) % dim] = *a;
                    }
                });
            }
            GateKind::Fourier { dim } => {
                let roots = roots_of_unity(*dim);
                let scale = 1.0 / (*dim as f64).sqrt();
                act_local(dims, self.parties[0], amps, |inp, out| {
                    for (l, slot) in out.iter_mut().enumerate() {
                        let acc: Complex64 = inp
                            .iter()
                            .enumerate()
                            .map(|(j, a)| roots[(j * l) % dim] * a)
                            .sum();
                        *slot = acc * scale;
                    }
                });
            }
            GateKind::ControlledPower { target_dim, .. } => {
                let (c, t) = (self.parties[0], self.parties[1]);
                let c_stride: usize = dims[c + 1..].iter().product();
                let t_stride: usize = dims[t + 1..].iter().product();
                let (c_dim, t_dim) = (dims[c], *target_dim);
                let input = amps.to_vec();
                for (i, a) in input.into_iter().enumerate() {
                    let control = (i / c_stride) % c_dim;
                    let target = (i / t_stride) % t_dim;
                    let shifted = (target + control) % t_dim;
                    amps[i + shifted * t_stride - target * t_stride] = a;
                }
            }
            GateKind::Relabel { map } => {
                let input = amps.to_vec();
                for (i, a) in input.into_iter().enumerate() {
                    amps[map[i]] = a;
                }
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GateKind::Shift { dim, power } => {
                write!(f, "X^k d={dim} p={} k={power}", self.parties[0])
            }
            GateKind::Fourier { dim } => write!(f, "F d={dim} p={}", self.parties[0]),
            GateKind::ControlledPower {
                control_dim,
                target_dim,
            } => {
                let (c, t) = (self.parties[0], self.parties[1]);
                if control_dim == target_dim {
                    write!(f, "CPOW d={control_dim} c={c} t={t}")
                } else {
                    write!(f, "CPOW dc={control_dim} dt={target_dim} c={c} t={t}")
                }
            }
            GateKind::Relabel { map } => {
                let joined: Vec<String> = map.iter().map(usize::to_string).collect();
                write!(f, "PERM map={}", joined.join(","))
            }
        }
    }
}

/// Ordered gate list on a fixed register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    dims: Vec<usize>,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        StateVector::zeros(dims.clone())?;
        Ok(Self {
            dims,
            gates: Vec::new(),
        })
    }

    pub fn from_gates(dims: Vec<usize>, gates: Vec<Gate>) -> Result<Self> {
        let mut circuit = Self::new(dims)?;
        for gate in gates {
            circuit.push(gate)?;
        }
        Ok(circuit)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(&self.dims)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends every gate of `other`, which must act on the same register.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.dims != self.dims {
            return Err(MaskError::shape(
                format!("{:?}", self.dims),
                format!("{:?}", other.dims),
            ));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Runs the gates in order on `input`.
    pub fn apply(&self, input: &StateVector) -> Result<StateVector> {
        if input.dims() != self.dims.as_slice() {
            return Err(MaskError::shape(
                format!("{:?}", self.dims),
                format!("{:?}", input.dims()),
            ));
        }
        let mut state = input.clone();
        for gate in &self.gates {
            gate.act(&self.dims, state.amps_mut());
        }
        Ok(state)
    }

    /// Serializes to the line format described in the module docs.
    pub fn to_text(&self) -> String {
        let dims: Vec<String> = self.dims.iter().map(usize::to_string).collect();
        let mut out = format!("DIMS {}\n", dims.join(" "));
        for gate in &self.gates {
            out.push_str(&gate.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut circuit: Option<Circuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| MaskError::Parse {
                line: line_no,
                message,
            };
            let mut tokens = line.split_whitespace();
            let head = tokens.next().unwrap_or_default();
            if head == "DIMS" {
                if circuit.is_some() {
                    return Err(parse_err("duplicate DIMS line".into()));
                }
                let dims = tokens
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|e| parse_err(format!("bad dimension {t:?}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                circuit = Some(Circuit::new(dims).map_err(|e| parse_err(e.to_string()))?);
                continue;
            }
            let Some(current) = circuit.as_mut() else {
                return Err(parse_err("gate before DIMS line".into()));
            };
            let gate = parse_gate(head, tokens, current.dims.len()).map_err(parse_err)?;
            current.push(gate).map_err(|e| parse_err(e.to_string()))?;
        }
        circuit.ok_or(MaskError::Parse {
            line: 0,
            message: "missing DIMS line".into(),
        })
    }
}

impl FromStr for Circuit {
    type Err = MaskError;

    fn from_str(s: &str) -> Result<Self> {
        Circuit::parse(s)
    }
}

fn parse_gate<'a>(
    head: &str,
    tokens: impl Iterator<Item = &'a str>,
    n_parties: usize,
) -> std::result::Result<Gate, String> {
    let mut fields = std::collections::BTreeMap::new();
    for token in tokens {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {token:?}"))?;
        if fields.insert(key, value).is_some() {
            return Err(format!("duplicate field {key:?}"));
        }
    }
    let mut take = |key: &str| -> std::result::Result<usize, String> {
        let value = fields
            .remove(key)
            .ok_or_else(|| format!("{head} needs {key}="))?;
        value
            .parse::<usize>()
            .map_err(|e| format!("bad value for {key}: {value:?} ({e})"))
    };
    let gate = match head {
        "X^k" => {
            let (d, p, k) = (take("d")?, take("p")?, take("k")?);
            shift_gate(d, k as i64, p)
        }
        "F" => {
            let (d, p) = (take("d")?, take("p")?);
            fourier_gate(d, p)
        }
        "CPOW" => {
            let (c, t) = (take("c")?, take("t")?);
            let (dc, dt) = match take("d") {
                Ok(d) => (d, d),
                Err(_) => (take("dc")?, take("dt")?),
            };
            controlled_power_gate(dc, c, t).map(|mut g| {
                g.kind = GateKind::ControlledPower {
                    control_dim: dc,
                    target_dim: dt,
                };
                g
            })
        }
        "PERM" => {
            let raw = fields.remove("map").ok_or("PERM needs map=")?;
            let map = raw
                .split(',')
                .map(|v| {
                    v.parse::<usize>()
                        .map_err(|e| format!("bad map entry {v:?}: {e}"))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            relabel_gate(map, n_parties)
        }
        other => return Err(format!("unknown gate {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    if let Some(key) = fields.keys().next() {
        return Err(format!("unexpected field {key:?}"));
    }
    Ok(gate)
}

/// `state ⊗ |0⟩^{⊗count}` with ancillas of dimension `dim`.
pub fn append_ancilla(state: &StateVector, dim: usize, count: usize) -> Result<StateVector> {
    check_local_dim(dim)?;
    if count == 0 {
        return Err(MaskError::Argument(
            "ancilla count must be at least 1".into(),
        ));
    }
    let ancilla = StateVector::basis(vec![dim; count], 0)?;
    Ok(tensor_product(state, &ancilla))
}

/// `ω^k = e^{2πik/d}` for `k = 0..d`.
pub(crate) fn roots_of_unity(dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / dim as f64))
        .collect()
}

fn check_local_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(MaskError::Argument(format!(
            "local dimension {dim} is below 2"
        )));
    }
    Ok(())
}

/// Runs `op(input_fiber, output_fiber)` over every fiber of `party`.
fn act_local<F>(dims: &[usize], party: usize, amps: &mut [Complex64], mut op: F)
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    let dim = dims[party];
    let stride: usize = dims[party + 1..].iter().product();
    let block = dim * stride;
    let mut fiber_in = vec![Complex64::new(0.0, 0.0); dim];
    let mut fiber_out = fiber_in.clone();
    for base in (0..amps.len()).step_by(block) {
        for offset in 0..stride {
            for j in 0..dim {
                fiber_in[j] = amps[base + offset + j * stride];
            }
            op(&fiber_in, &mut fiber_out);
            for j in 0..dim {
                amps[base + offset + j * stride] = fiber_out[j];
            }
        }
    }
}
