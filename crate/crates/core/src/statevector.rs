//! Deterministic statevector simulator with the gate set the circuits need.
//!
//! Qubit 0 is the least-significant bit of a basis-state index. The register
//! layout, from least to most significant, is `x | y | z | velocity | ancilla`,
//! so for a fixed ancilla and velocity value the spatial amplitudes are a
//! contiguous block in node order.

use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit {bit} out of range for a {n}-qubit state")]
    BitOutOfRange { bit: usize, n: usize },
    #[error("qubit {0} used more than once in a gate")]
    DuplicateBit(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cannot encode an all-zero vector")]
    ZeroVector,
    #[error("diagonal entry {index} has modulus {modulus}, expected 1")]
    NotUnitModulus { index: usize, modulus: f64 },
    #[error("amplitude-load vector has norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("amplitude load requires the target register in |0>; basis state {0} is populated")]
    NotInZeroState(usize),
    #[error("register value {value} does not fit in {width} qubits")]
    PatternOutOfRange { value: usize, width: usize },
    #[error("{0} qubits exceed the simulator limit")]
    TooManyQubits(usize),
    #[error("I/O error: {0}")]
    Io(String),
}

/// Largest supported register, 2^30 amplitudes.
pub const MAX_QUBITS: usize = 30;

/// Named registers of the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Register {
    X,
    Y,
    Z,
    Velocity,
    Ancilla,
}

/// Qubit counts per register and their bit positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub n_x: usize,
    pub n_y: usize,
    pub n_z: usize,
    pub n_q: usize,
    pub n_a: usize,
}

impl RegisterLayout {
    pub fn new(spatial: [usize; 3], n_q: usize, n_a: usize) -> Result<Self, SimError> {
        let l = Self {
            n_x: spatial[0],
            n_y: spatial[1],
            n_z: spatial[2],
            n_q,
            n_a,
        };
        if l.total() > MAX_QUBITS {
            return Err(SimError::TooManyQubits(l.total()));
        }
        Ok(l)
    }

    pub fn total(&self) -> usize {
        self.n_x + self.n_y + self.n_z + self.n_q + self.n_a
    }

    pub fn spatial_qubits(&self) -> usize {
        self.n_x + self.n_y + self.n_z
    }

    /// Number of spatial basis states.
    pub fn sites(&self) -> usize {
        1 << self.spatial_qubits()
    }

    pub fn width(&self, reg: Register) -> usize {
        match reg {
            Register::X => self.n_x,
            Register::Y => self.n_y,
            Register::Z => self.n_z,
            Register::Velocity => self.n_q,
            Register::Ancilla => self.n_a,
        }
    }

    /// Position of the register's least-significant qubit.
    pub fn offset(&self, reg: Register) -> usize {
        match reg {
            Register::X => 0,
            Register::Y => self.n_x,
            Register::Z => self.n_x + self.n_y,
            Register::Velocity => self.spatial_qubits(),
            Register::Ancilla => self.spatial_qubits() + self.n_q,
        }
    }

    /// Qubit indices of a register, least significant first.
    pub fn bits(&self, reg: Register) -> Vec<usize> {
        let o = self.offset(reg);
        (o..o + self.width(reg)).collect()
    }

    pub fn spatial_bits(&self) -> Vec<usize> {
        (0..self.spatial_qubits()).collect()
    }

    pub fn ancilla_bit(&self) -> usize {
        self.offset(Register::Ancilla)
    }
}

/// A control qubit with polarity: `on_one = false` triggers on |0>.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub bit: usize,
    pub on_one: bool,
}

impl Control {
    pub fn one(bit: usize) -> Self {
        Self { bit, on_one: true }
    }

    pub fn zero(bit: usize) -> Self {
        Self { bit, on_one: false }
    }
}

/// Controls that fix `bits` to the binary representation of `value`.
pub fn controls_for_value(bits: &[usize], value: usize) -> Vec<Control> {
    bits.iter()
        .enumerate()
        .map(|(j, &bit)| Control {
            bit,
            on_one: (value >> j) & 1 == 1,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate<T> {
    Hadamard {
        target: usize,
    },
    ControlledHadamard {
        controls: Vec<Control>,
        target: usize,
    },
    PauliX {
        target: usize,
    },
    MultiControlledX {
        controls: Vec<Control>,
        target: usize,
    },
    Swap {
        a: usize,
        b: usize,
    },
    /// Diagonal over `targets` (entry index bit `j` = qubit `targets[j]`), optionally controlled.
    DiagonalUnitary {
        targets: Vec<usize>,
        entries: Vec<Complex<T>>,
        controls: Vec<Control>,
    },
    /// Maps |0>_targets to sum_j data_j |j>_targets for every configuration of the other qubits.
    AmplitudeLoad {
        targets: Vec<usize>,
        data: Vec<T>,
    },
}

impl<T: Real> Gate<T> {
    pub fn diagonal(targets: Vec<usize>, entries: Vec<Complex<T>>, controls: Vec<Control>) -> Result<Self, SimError> {
        if entries.len() != 1usize << targets.len() {
            return Err(SimError::LengthMismatch {
                expected: 1 << targets.len(),
                got: entries.len(),
            });
        }
        for (index, e) in entries.iter().enumerate() {
            let m = e.norm();
            if (m - T::one()).abs() > T::tolerance() {
                return Err(SimError::NotUnitModulus {
                    index,
                    modulus: m.as_f64(),
                });
            }
        }
        Ok(Gate::DiagonalUnitary {
            targets,
            entries,
            controls,
        })
    }

    pub fn amplitude_load(targets: Vec<usize>, data: Vec<T>) -> Result<Self, SimError> {
        if data.len() != 1usize << targets.len() {
            return Err(SimError::LengthMismatch {
                expected: 1 << targets.len(),
                got: data.len(),
            });
        }
        let norm = data.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if (norm - T::one()).abs() > T::tolerance() {
            return Err(SimError::NotNormalized(norm.as_f64()));
        }
        Ok(Gate::AmplitudeLoad { targets, data })
    }

    /// All qubits the gate touches, controls included.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Hadamard { target } | Gate::PauliX { target } => vec![*target],
            Gate::ControlledHadamard { controls, target } | Gate::MultiControlledX { controls, target } => {
                controls.iter().map(|c| c.bit).chain([*target]).collect()
            }
            Gate::Swap { a, b } => vec![*a, *b],
            Gate::DiagonalUnitary { targets, controls, .. } => {
                controls.iter().map(|c| c.bit).chain(targets.iter().copied()).collect()
            }
            Gate::AmplitudeLoad { targets, .. } => targets.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::Hadamard { .. } => "h",
            Gate::ControlledHadamard { .. } => "ch",
            Gate::PauliX { .. } => "x",
            Gate::MultiControlledX { .. } => "mcx",
            Gate::Swap { .. } => "swap",
            Gate::DiagonalUnitary { .. } => "diagonal",
            Gate::AmplitudeLoad { .. } => "amplitude_load",
        }
    }
}

/// Known factor divided out of the amplitudes and kept outside the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScaleKind {
    /// Euclidean norm of the encoded data.
    FieldNorm,
    /// `sqrt(2)^{n_Q}` from the moment-summing Hadamards.
    MomentSum,
    /// LCU normalisation `s`.
    LcuScale,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleEntry<T> {
    pub kind: ScaleKind,
    pub value: T,
}

#[derive(Debug, Clone)]
pub struct StateVector<T> {
    amps: Vec<Complex<T>>,
    layout: RegisterLayout,
    scale_log: Vec<ScaleEntry<T>>,
}

/// Below this many basis states, kernels run serially.
const PAR_THRESHOLD: usize = 1 << 14;

impl<T: Real> StateVector<T> {
    /// The all-zero basis state.
    pub fn zero(layout: RegisterLayout) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1usize << layout.total()];
        amps[0] = Complex::new(T::one(), T::zero());
        Self {
            amps,
            layout,
            scale_log: Vec::new(),
        }
    }

    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<Complex<T>>) -> Result<Self, SimError> {
        if amps.len() != 1usize << layout.total() {
            return Err(SimError::LengthMismatch {
                expected: 1 << layout.total(),
                got: amps.len(),
            });
        }
        Ok(Self {
            amps,
            layout,
            scale_log: Vec::new(),
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn n_qubits(&self) -> usize {
        self.layout.total()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex<T> {
        self.amps[index]
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale_log(&self) -> &[ScaleEntry<T>] {
        &self.scale_log
    }

    pub fn push_scale(&mut self, kind: ScaleKind, value: T) {
        self.scale_log.push(ScaleEntry { kind, value });
    }

    /// Product of every recorded scale factor.
    pub fn total_scale(&self) -> T {
        self.scale_log.iter().fold(T::one(), |acc, s| acc * s.value)
    }

    /// Amplitude-encodes `data / |data|` into `bits`; the norm goes to the scale log.
    pub fn encode_amplitudes(&mut self, bits: &[usize], data: &[T]) -> Result<T, SimError> {
        if data.len() != 1usize << bits.len() {
            return Err(SimError::LengthMismatch {
                expected: 1 << bits.len(),
                got: data.len(),
            });
        }
        let norm = data.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if !(norm > T::zero()) {
            return Err(SimError::ZeroVector);
        }
        let unit = data.iter().map(|v| *v / norm).collect();
        self.apply_gate(&Gate::AmplitudeLoad {
            targets: bits.to_vec(),
            data: unit,
        })?;
        self.push_scale(ScaleKind::FieldNorm, norm);
        Ok(norm)
    }

    fn check_bits(&self, bits: &[usize]) -> Result<(), SimError> {
        let n = self.n_qubits();
        let mut seen = 0usize;
        for &bit in bits {
            if bit >= n {
                return Err(SimError::BitOutOfRange { bit, n });
            }
            if seen & (1 << bit) != 0 {
                return Err(SimError::DuplicateBit(bit));
            }
            seen |= 1 << bit;
        }
        Ok(())
    }

    pub fn apply_gates<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate<T>>) -> Result<(), SimError> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate<T>) -> Result<(), SimError> {
        self.check_bits(&gate.qubits())?;
        match gate {
            Gate::Hadamard { target } => self.hadamard(&[], *target),
            Gate::ControlledHadamard { controls, target } => self.hadamard(controls, *target),
            Gate::PauliX { target } => self.mcx(&[], *target),
            Gate::MultiControlledX { controls, target } => self.mcx(controls, *target),
            Gate::Swap { a, b } => self.swap(*a, *b),
            Gate::DiagonalUnitary {
                targets,
                entries,
                controls,
            } => {
                if entries.len() != 1usize << targets.len() {
                    return Err(SimError::LengthMismatch {
                        expected: 1 << targets.len(),
                        got: entries.len(),
                    });
                }
                self.diagonal(targets, entries, controls)
            }
            Gate::AmplitudeLoad { targets, data } => self.amplitude_load(targets, data)?,
        }
        Ok(())
    }

    fn hadamard(&mut self, controls: &[Control], target: usize) {
        let h = T::FRAC_1_SQRT_2();
        let tbit = 1usize << target;
        if controls.is_empty() {
            let block = tbit << 1;
            let kernel = |chunk: &mut [Complex<T>]| {
                let (lo, hi) = chunk.split_at_mut(tbit);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * h;
                    *b = (x - y) * h;
                }
            };
            if self.amps.len() >= PAR_THRESHOLD {
                self.amps.par_chunks_mut(block).for_each(kernel);
            } else {
                self.amps.chunks_mut(block).for_each(kernel);
            }
            return;
        }
        let (mask, value) = control_mask(controls);
        let amps = &mut self.amps;
        for_each_matching(self.layout.total(), mask | tbit, value, |i| {
            let j = i | tbit;
            let (x, y) = (amps[i], amps[j]);
            amps[i] = (x + y) * h;
            amps[j] = (x - y) * h;
        });
    }

    fn mcx(&mut self, controls: &[Control], target: usize) {
        let tbit = 1usize << target;
        let (mask, value) = control_mask(controls);
        if controls.is_empty() && self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_chunks_mut(tbit << 1).for_each(|chunk| {
                let (lo, hi) = chunk.split_at_mut(tbit);
                lo.swap_with_slice(hi);
            });
            return;
        }
        let amps = &mut self.amps;
        for_each_matching(self.layout.total(), mask | tbit, value, |i| amps.swap(i, i | tbit));
    }

    fn swap(&mut self, a: usize, b: usize) {
        let (ba, bb) = (1usize << a, 1usize << b);
        let amps = &mut self.amps;
        for_each_matching(self.layout.total(), ba | bb, ba, |i| amps.swap(i, i ^ ba ^ bb));
    }

    fn diagonal(&mut self, targets: &[usize], entries: &[Complex<T>], controls: &[Control]) {
        let (mask, value) = control_mask(controls);
        let contiguous = targets.windows(2).all(|w| w[1] == w[0] + 1);
        let lo = targets.first().copied().unwrap_or(0);
        let width_mask = (1usize << targets.len()) - 1;
        let gather = |i: usize| -> usize {
            if contiguous {
                (i >> lo) & width_mask
            } else {
                targets
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (j, &t)| acc | (((i >> t) & 1) << j))
            }
        };
        let kernel = |(i, a): (usize, &mut Complex<T>)| {
            if i & mask == value {
                *a = *a * entries[gather(i)];
            }
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter_mut().enumerate().for_each(kernel);
        } else {
            self.amps.iter_mut().enumerate().for_each(kernel);
        }
    }

    fn amplitude_load(&mut self, targets: &[usize], data: &[T]) -> Result<(), SimError> {
        if data.len() != 1usize << targets.len() {
            return Err(SimError::LengthMismatch {
                expected: 1 << targets.len(),
                got: data.len(),
            });
        }
        let tmask = targets.iter().fold(0usize, |m, &t| m | (1 << t));
        let deposit = |j: usize| -> usize {
            targets
                .iter()
                .enumerate()
                .fold(0, |acc, (b, &t)| acc | (((j >> b) & 1) << t))
        };
        let offsets: Vec<usize> = (0..data.len()).map(deposit).collect();
        let n = self.layout.total();
        let mut err = None;
        let amps = &mut self.amps;
        for_each_matching(n, tmask, 0, |base| {
            if err.is_some() {
                return;
            }
            for &off in &offsets[1..] {
                if amps[base | off] != Complex::new(T::zero(), T::zero()) {
                    err = Some(base | off);
                    return;
                }
            }
            let a = amps[base];
            for (&off, &d) in offsets.iter().zip(data) {
                amps[base | off] = a * d;
            }
        });
        match err {
            Some(i) => Err(SimError::NotInZeroState(i)),
            None => Ok(()),
        }
    }

    /// Zeroes the ancilla-|1> branch without renormalising.
    /// Returns the probability the ancilla was in |0>.
    pub fn project_ancilla_zero(&mut self) -> T {
        let total = self.norm_sqr();
        let abit = 1usize << self.layout.ancilla_bit();
        let zero = Complex::new(T::zero(), T::zero());
        let mut kept = T::zero();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & abit == 0 {
                kept = kept + a.norm_sqr();
            } else {
                *a = zero;
            }
        }
        if total > T::zero() {
            kept / total
        } else {
            T::zero()
        }
    }

    /// Amplitudes of every basis state whose fixed registers hold the given values,
    /// in increasing basis-index order.
    pub fn read_subspace(&self, fixed: &[(Register, usize)]) -> Result<Vec<Complex<T>>, SimError> {
        let mut mask = 0usize;
        let mut value = 0usize;
        for &(reg, v) in fixed {
            let w = self.layout.width(reg);
            if v >> w != 0 {
                return Err(SimError::PatternOutOfRange { value: v, width: w });
            }
            let o = self.layout.offset(reg);
            let m = ((1usize << w) - 1) << o;
            mask |= m;
            value = (value & !m) | (v << o);
        }
        let mut out = Vec::with_capacity(self.amps.len() >> mask.count_ones());
        for_each_matching(self.layout.total(), mask, value, |i| out.push(self.amps[i]));
        Ok(out)
    }

    /// Writes `basis_index,re,im` rows with round-trip precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), SimError> {
        let io = |e: std::io::Error| SimError::Io(e.to_string());
        writeln!(w, "basis_index,re,im").map_err(io)?;
        for (i, a) in self.amps.iter().enumerate() {
            writeln!(w, "{i},{:.16e},{:.16e}", a.re, a.im).map_err(io)?;
        }
        Ok(())
    }
}

fn control_mask(controls: &[Control]) -> (usize, usize) {
    controls.iter().fold((0, 0), |(m, v), c| {
        (m | (1 << c.bit), if c.on_one { v | (1 << c.bit) } else { v })
    })
}

/// Calls `f` on every `n`-bit index `i` with `i & mask == value`, in increasing order.
fn for_each_matching(n: usize, mask: usize, value: usize, mut f: impl FnMut(usize)) {
    let all = (1usize << n) - 1;
    let free = all & !mask;
    let mut sub = 0usize;
    loop {
        f(sub | value);
        if sub == free {
            break;
        }
        sub = ((sub | !free).wrapping_add(1)) & free;
    }
}
