//! Hybrid quantum-circuit lattice kinetic scheme.
//!
//! Each time step runs `1 + D` circuits with identical architecture (density and
//! one per momentum component): amplitude-encode the density, duplicate it over
//! the velocity register, apply the collision diagonal through a two-unitary
//! LCU with one ancilla, stream with controlled cyclic shifts, sum the velocity
//! subspaces with Hadamards and rescale the ancilla-|0> amplitudes back to
//! macroscopic values. Gradients and wall values stay classical.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use num_complex::Complex;

use crate::classical::{apply_dirichlet, compute_gradients, Boundary, MacroFields, Mesh, SolverError, Stepper};
use crate::lattice::{normalized_core, FlowParams, LatticeModel, VelocityGradient, VelocitySet};
use crate::scalar::{sqrt2_pow, Real};
use crate::statevector::{controls_for_value, Control, Gate, Register, RegisterLayout, ScaleKind, SimError, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("mesh axis {axis} has {nodes} nodes; the quantum backend needs powers of two")]
    NotPowerOfTwo { axis: usize, nodes: usize },
    #[error("lattice {0:?} does not match a {1}D mesh")]
    DimensionMismatch(LatticeModel, usize),
    #[error("non-finite equilibrium for direction {alpha} at node {node}")]
    NonFinite { alpha: usize, node: usize },
    #[error("collision entry {index} has |d/s| = {value} > 1")]
    Admissibility { index: usize, value: f64 },
    #[error("momentum component {0} exceeds the lattice dimension")]
    BadMoment(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl From<PipelineError> for SolverError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Solver(s) => s,
            other => SolverError::Boundary(format!("quantum pipeline: {other}")),
        }
    }
}

/// Which macroscopic moment a circuit extracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    Density,
    Momentum(usize),
}

impl Moment {
    pub fn all(dim: usize) -> Vec<Moment> {
        std::iter::once(Moment::Density).chain((0..dim).map(Moment::Momentum)).collect()
    }

    pub fn label(&self) -> String {
        match self {
            Moment::Density => "density".into(),
            Moment::Momentum(d) => format!("momentum_{}", ["x", "y", "z"][*d]),
        }
    }
}

/// Hadamard counts per velocity subspace after duplication; amplitude is `2^(-h/2)`.
const D2Q9_HADAMARDS: [u32; 9] = [2, 3, 3, 3, 4, 4, 4, 4, 3];
const D3Q27_HADAMARDS: [u32; 27] = [
    3, 3, 3, 3, 5, 5, 5, 5, 5, 5, 5, 5, 6, 6, 6, 6, 5, 5, 5, 5, 6, 6, 7, 7, 8, 8, 7,
];

/// Amplitudes produced on the velocity register by the duplication cascade.
#[derive(Debug, Clone)]
pub struct DuplicationLayout<T> {
    pub model: LatticeModel,
    pub n_q: usize,
    /// Hadamard count `h` per direction.
    pub hadamard_counts: Vec<u32>,
    /// `c_a = sqrt(2)^(-h_a)`.
    pub amplitudes: Vec<T>,
    /// `C_a = sqrt(2)^(h_a) = 1 / c_a`.
    pub compensation: Vec<T>,
    /// Velocity-register subspace holding direction `a` (identity map).
    pub subspace: Vec<usize>,
    pub unused: Vec<usize>,
}

impl<T: Real> DuplicationLayout<T> {
    pub fn new(model: LatticeModel) -> Self {
        let h: Vec<u32> = match model {
            LatticeModel::D2Q9 => D2Q9_HADAMARDS.to_vec(),
            LatticeModel::D3Q27 => D3Q27_HADAMARDS.to_vec(),
        };
        let q = h.len();
        let n_q = velocity_qubits(q);
        Self {
            model,
            n_q,
            amplitudes: h.iter().map(|&h| T::one() / sqrt2_pow::<T>(h)).collect(),
            compensation: h.iter().map(|&h| sqrt2_pow(h)).collect(),
            hadamard_counts: h,
            subspace: (0..q).collect(),
            unused: (q..1 << n_q).collect(),
        }
    }
}

/// `ceil(log2 q)`.
pub fn velocity_qubits(q: usize) -> usize {
    q.next_power_of_two().trailing_zeros() as usize
}

/// Duplication layout and the gate list preparing it on `velocity_bits` from |0>.
///
/// The list uses controlled Hadamards that always act on a |0> target (so every
/// amplitude stays positive) plus multi-controlled X transpositions relabelling
/// subspaces.
pub fn build_duplication<T: Real>(set: &VelocitySet<T>, velocity_bits: &[usize]) -> (DuplicationLayout<T>, Vec<Gate<T>>) {
    let dup = DuplicationLayout::new(set.model());
    assert_eq!(velocity_bits.len(), dup.n_q, "velocity register width");
    let tree = SplitTree::build(&dup.hadamard_counts);
    let mut gates = Vec::new();
    let mut occupied = vec![false; 1 << dup.n_q];
    occupied[0] = true;
    emit_splits(&tree.root, velocity_bits, &mut occupied, &mut gates);
    (dup, gates)
}

#[derive(Debug)]
enum SplitNode {
    Leaf(usize),
    Split(Box<SplitNode>, Box<SplitNode>),
}

impl SplitNode {
    fn rep(&self) -> usize {
        match self {
            SplitNode::Leaf(i) => *i,
            SplitNode::Split(l, _) => l.rep(),
        }
    }
}

struct SplitTree {
    root: SplitNode,
}

impl SplitTree {
    /// Binary tree whose leaf `a` sits at depth `h[a]`; requires `sum 2^-h = 1`.
    /// Each subtree is represented by its smallest leaf index.
    fn build(h: &[u32]) -> Self {
        let mut nodes: Vec<(u32, SplitNode)> = h.iter().enumerate().map(|(a, &d)| (d, SplitNode::Leaf(a))).collect();
        while nodes.len() > 1 {
            let deepest = nodes.iter().map(|n| n.0).max().unwrap();
            let (mut level, rest): (Vec<_>, Vec<_>) = nodes.into_iter().partition(|n| n.0 == deepest);
            assert!(level.len() % 2 == 0, "Hadamard counts violate sum 2^-h = 1");
            level.sort_by_key(|n| n.1.rep());
            nodes = rest;
            let mut it = level.into_iter();
            while let (Some(a), Some(b)) = (it.next(), it.next()) {
                nodes.push((deepest - 1, SplitNode::Split(Box::new(a.1), Box::new(b.1))));
            }
        }
        let (depth, root) = nodes.pop().unwrap();
        assert_eq!(depth, 0);
        assert_eq!(root.rep(), 0);
        Self { root }
    }
}

fn emit_splits<T: Real>(node: &SplitNode, bits: &[usize], occupied: &mut [bool], gates: &mut Vec<Gate<T>>) {
    let SplitNode::Split(left, right) = node else {
        return;
    };
    let i = left.rep();
    let j = right.rep();
    let n = bits.len();
    let zero_bits: Vec<usize> = (0..n).filter(|t| (i >> t) & 1 == 0).collect();
    assert!(!zero_bits.is_empty(), "cannot split the all-ones subspace");
    let t = zero_bits
        .iter()
        .copied()
        .find(|&t| i | (1 << t) == j)
        .or_else(|| zero_bits.iter().copied().find(|&t| !occupied[i | (1 << t)]))
        .unwrap_or(zero_bits[0]);
    let k = i | (1 << t);
    let split = Gate::ControlledHadamard {
        controls: other_bit_controls(bits, i, t),
        target: bits[t],
    };
    if occupied[k] {
        transposition(bits, k, j, gates);
        gates.push(split);
        transposition(bits, k, j, gates);
    } else {
        gates.push(split);
        if k != j {
            transposition(bits, k, j, gates);
        }
    }
    occupied[j] = true;
    emit_splits(left, bits, occupied, gates);
    emit_splits(right, bits, occupied, gates);
}

/// Controls fixing every register bit except `skip` to the value in `pattern`.
fn other_bit_controls(bits: &[usize], pattern: usize, skip: usize) -> Vec<Control> {
    bits.iter()
        .enumerate()
        .filter(|(b, _)| *b != skip)
        .map(|(b, &bit)| Control {
            bit,
            on_one: (pattern >> b) & 1 == 1,
        })
        .collect()
}

/// Exchanges register values `a` and `b` with a Gray-code chain of multi-controlled X gates.
fn transposition<T: Real>(bits: &[usize], a: usize, b: usize, gates: &mut Vec<Gate<T>>) {
    let diff: Vec<usize> = (0..bits.len()).filter(|t| ((a ^ b) >> t) & 1 == 1).collect();
    if diff.is_empty() {
        return;
    }
    let mut path = vec![a];
    for &d in &diff {
        path.push(path.last().unwrap() ^ (1 << d));
    }
    let step = |r: usize| Gate::MultiControlledX {
        controls: other_bit_controls(bits, path[r], diff[r]),
        target: bits[diff[r]],
    };
    let m = diff.len();
    for r in 0..m {
        gates.push(step(r));
    }
    for r in (0..m - 1).rev() {
        gates.push(step(r));
    }
}

/// Collision coefficients `d_{a,k}` for one circuit; index `a * M + k`.
#[derive(Debug, Clone)]
pub struct CollisionDiagonal<T> {
    pub entries: Vec<T>,
    pub lcu_scale: T,
    pub moment: Moment,
    pub sites: usize,
}

/// `d_{a,k} = C_a * fhat_a(x_k)` (density) or `e_{a,d} * C_a * fhat_a(x_k)` (momentum `d`).
/// Unused subspaces get `s`, so they are left untouched after scaling.
pub fn build_collision_diagonal<T: Real>(
    fields: &MacroFields<T>,
    grads: &[VelocityGradient<T>],
    set: &VelocitySet<T>,
    params: &FlowParams<T>,
    dup: &DuplicationLayout<T>,
    moment: Moment,
) -> Result<CollisionDiagonal<T>, PipelineError> {
    if let Moment::Momentum(d) = moment {
        if d >= set.dimension() {
            return Err(PipelineError::BadMoment(d));
        }
    }
    let m = fields.mesh.len();
    let q = set.q();
    let a_dt = params.a_coeff * params.dt;
    let mut entries = vec![T::zero(); (1 << dup.n_q) * m];
    for alpha in 0..q {
        let factor = match moment {
            Moment::Density => T::one(),
            Moment::Momentum(d) => T::int(set.velocity(alpha)[d] as i64),
        };
        let c = dup.compensation[alpha];
        let row = &mut entries[alpha * m..(alpha + 1) * m];
        if factor == T::zero() {
            continue;
        }
        for (k, slot) in row.iter_mut().enumerate() {
            let fhat = normalized_core(fields.vel[k], &grads[k], set, a_dt, alpha);
            if !fhat.is_finite() || !grads[k].is_finite() {
                return Err(PipelineError::NonFinite { alpha, node: k });
            }
            *slot = factor * c * fhat;
        }
    }
    let max = entries.iter().fold(T::zero(), |acc, d| acc.max(d.abs()));
    let mut s = T::one();
    while s < max {
        s = s * T::int(2);
    }
    for slot in &mut entries[q * m..] {
        *slot = s;
    }
    Ok(CollisionDiagonal {
        entries,
        lcu_scale: s,
        moment,
        sites: m,
    })
}

/// `B1 = D/s + i sqrt(1 - (D/s)^2)` controlled on ancilla |0>, `B2` its conjugate controlled on |1>.
pub fn lcu_unitaries<T: Real>(diag: &CollisionDiagonal<T>, layout: &RegisterLayout) -> Result<(Gate<T>, Gate<T>), PipelineError> {
    let targets: Vec<usize> = (0..layout.spatial_qubits() + layout.n_q).collect();
    let expected = 1usize << targets.len();
    if diag.entries.len() != expected {
        return Err(SimError::LengthMismatch {
            expected,
            got: diag.entries.len(),
        }
        .into());
    }
    let mut b1 = Vec::with_capacity(expected);
    let mut b2 = Vec::with_capacity(expected);
    for (index, &d) in diag.entries.iter().enumerate() {
        let x = d / diag.lcu_scale;
        if x.abs() > T::one() + T::epsilon() {
            return Err(PipelineError::Admissibility {
                index,
                value: x.abs().as_f64(),
            });
        }
        let x = x.max(-T::one()).min(T::one());
        let y = (T::one() - x * x).sqrt();
        b1.push(Complex::new(x, y));
        b2.push(Complex::new(x, -y));
    }
    let anc = layout.ancilla_bit();
    Ok((
        Gate::DiagonalUnitary {
            targets: targets.clone(),
            entries: b1,
            controls: vec![Control::zero(anc)],
        },
        Gate::DiagonalUnitary {
            targets,
            entries: b2,
            controls: vec![Control::one(anc)],
        },
    ))
}

/// `H_a (|0><0| B1 + |1><1| B2) H_a`, then post-selection on ancilla |0>.
/// Returns the success probability; `lcu_scale` goes to the scale log.
pub fn apply_lcu_collision<T: Real>(state: &mut StateVector<T>, b1: &Gate<T>, b2: &Gate<T>, lcu_scale: T) -> Result<T, PipelineError> {
    let anc = state.layout().ancilla_bit();
    state.apply_gate(&Gate::Hadamard { target: anc })?;
    state.apply_gate(b1)?;
    state.apply_gate(b2)?;
    state.apply_gate(&Gate::Hadamard { target: anc })?;
    let p = state.project_ancilla_zero();
    state.push_scale(ScaleKind::LcuScale, lcu_scale);
    Ok(p)
}

/// Cyclic `+1` (`R`) or `-1` (`L`) shift of the register on `bits`, with extra controls.
pub fn shift_gates<T: Real>(bits: &[usize], forward: bool, extra: &[Control]) -> Vec<Gate<T>> {
    (0..bits.len())
        .rev()
        .map(|j| {
            let mut controls = extra.to_vec();
            controls.extend(bits[..j].iter().map(|&b| Control { bit: b, on_one: forward }));
            Gate::MultiControlledX {
                controls,
                target: bits[j],
            }
        })
        .collect()
}

/// Streaming: for each moving direction, shift every axis with a nonzero velocity
/// component, controlled on the direction's velocity subspace.
pub fn build_streaming<T: Real>(set: &VelocitySet<T>, layout: &RegisterLayout) -> Vec<Gate<T>> {
    let vbits = layout.bits(Register::Velocity);
    let axes = [Register::X, Register::Y, Register::Z];
    let mut gates = Vec::new();
    for alpha in 0..set.q() {
        let e = set.velocity(alpha);
        let ctrl = controls_for_value(&vbits, alpha);
        for (axis, reg) in axes.iter().enumerate() {
            if e[axis] != 0 {
                gates.extend(shift_gates(&layout.bits(*reg), e[axis] > 0, &ctrl));
            }
        }
    }
    gates
}

/// Hadamard on every velocity qubit: the |0> velocity component becomes
/// `2^(-n_Q/2) * sum_a` of the subspace amplitudes.
pub fn moment_extraction_gates<T: Real>(layout: &RegisterLayout) -> Vec<Gate<T>> {
    layout
        .bits(Register::Velocity)
        .into_iter()
        .map(|target| Gate::Hadamard { target })
        .collect()
}

pub fn apply_moment_extraction<T: Real>(state: &mut StateVector<T>) -> Result<(), PipelineError> {
    let layout = *state.layout();
    state.apply_gates(&moment_extraction_gates(&layout))?;
    state.push_scale(ScaleKind::MomentSum, sqrt2_pow(layout.n_q as u32));
    Ok(())
}

/// Macroscopic field from the ancilla-|0>, velocity-|0> amplitudes times every recorded scale.
pub fn readout_field<T: Real>(state: &StateVector<T>) -> Result<Vec<T>, PipelineError> {
    let scale = state.total_scale();
    let amps = state.read_subspace(&[(Register::Ancilla, 0), (Register::Velocity, 0)])?;
    Ok(amps.into_iter().map(|a| a.re * scale).collect())
}

/// Register layout for a mesh and lattice.
pub fn register_layout(set_model: LatticeModel, mesh: &Mesh) -> Result<RegisterLayout, PipelineError> {
    if set_model.dimension() != mesh.dim {
        return Err(PipelineError::DimensionMismatch(set_model, mesh.dim));
    }
    let mut spatial = [0usize; 3];
    for (axis, &n) in mesh.sizes().iter().enumerate().take(mesh.dim) {
        if !n.is_power_of_two() {
            return Err(PipelineError::NotPowerOfTwo { axis, nodes: n });
        }
        spatial[axis] = n.trailing_zeros() as usize;
    }
    Ok(RegisterLayout::new(spatial, velocity_qubits(set_model.q()), 1)?)
}

/// Gate counts per stage, by gate kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub h: usize,
    pub ch: usize,
    pub x: usize,
    pub mcx: usize,
    pub swap: usize,
    pub diagonal: usize,
    pub amplitude_load: usize,
}

impl GateCounts {
    pub fn of<T: Real>(gates: &[Gate<T>]) -> Self {
        let mut c = Self::default();
        for g in gates {
            match g {
                Gate::Hadamard { .. } => c.h += 1,
                Gate::ControlledHadamard { .. } => c.ch += 1,
                Gate::PauliX { .. } => c.x += 1,
                Gate::MultiControlledX { .. } => c.mcx += 1,
                Gate::Swap { .. } => c.swap += 1,
                Gate::DiagonalUnitary { .. } => c.diagonal += 1,
                Gate::AmplitudeLoad { .. } => c.amplitude_load += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.h + self.ch + self.x + self.mcx + self.swap + self.diagonal + self.amplitude_load
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub initialization: GateCounts,
    pub collision: GateCounts,
    pub streaming: GateCounts,
    pub moments: GateCounts,
}

/// Per-step diagnostics of the hybrid backend, one entry per circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub circuits: Vec<Moment>,
    pub success_prob_collision: Vec<f64>,
    pub field_norms: Vec<f64>,
    pub lcu_scale: Vec<f64>,
    pub gate_counts: StageCounts,
}

/// Prebuilt circuits for one mesh and lattice.
#[derive(Debug, Clone)]
pub struct QuantumLks<T> {
    pub set: VelocitySet<T>,
    pub params: FlowParams<T>,
    pub bc: Boundary<T>,
    pub mesh: Mesh,
    pub layout: RegisterLayout,
    pub duplication: DuplicationLayout<T>,
    duplication_gates: Vec<Gate<T>>,
    streaming_gates: Vec<Gate<T>>,
    counts: StageCounts,
    pub reports: Vec<StepReport>,
    /// Keep a report per step in `reports`.
    pub keep_reports: bool,
}

/// Outcome of one circuit.
#[derive(Debug, Clone)]
pub struct CircuitOutput<T> {
    pub moment: Moment,
    pub field: Vec<T>,
    pub success_prob: T,
    pub field_norm: T,
    pub lcu_scale: T,
}

impl<T: Real> QuantumLks<T> {
    pub fn new(set: VelocitySet<T>, params: FlowParams<T>, bc: Boundary<T>, mesh: Mesh) -> Result<Self, PipelineError> {
        let layout = register_layout(set.model(), &mesh)?;
        let (duplication, duplication_gates) = build_duplication(&set, &layout.bits(Register::Velocity));
        let streaming_gates = build_streaming(&set, &layout);
        let mut init = vec![Gate::AmplitudeLoad {
            targets: layout.spatial_bits(),
            data: Vec::new(),
        }];
        init.extend(duplication_gates.iter().cloned());
        let counts = StageCounts {
            initialization: GateCounts::of(&init),
            collision: GateCounts {
                h: 2,
                diagonal: 2,
                ..Default::default()
            },
            streaming: GateCounts::of(&streaming_gates),
            moments: GateCounts::of(&moment_extraction_gates::<T>(&layout)),
        };
        Ok(Self {
            set,
            params,
            bc,
            mesh,
            layout,
            duplication,
            duplication_gates,
            streaming_gates,
            counts,
            reports: Vec::new(),
            keep_reports: true,
        })
    }

    pub fn duplication_gates(&self) -> &[Gate<T>] {
        &self.duplication_gates
    }

    pub fn streaming_gates(&self) -> &[Gate<T>] {
        &self.streaming_gates
    }

    pub fn stage_counts(&self) -> &StageCounts {
        &self.counts
    }

    /// Encoded and duplicated state `|psi_B>` for a density field.
    pub fn prepare_state(&self, rho: &[T]) -> Result<StateVector<T>, PipelineError> {
        let mut state = StateVector::zero(self.layout);
        state.encode_amplitudes(&self.layout.spatial_bits(), rho)?;
        state.apply_gates(&self.duplication_gates)?;
        Ok(state)
    }

    /// Runs one circuit end to end.
    pub fn run_circuit(
        &self,
        fields: &MacroFields<T>,
        grads: &[VelocityGradient<T>],
        moment: Moment,
    ) -> Result<CircuitOutput<T>, PipelineError> {
        let mut state = self.prepare_state(&fields.rho)?;
        let field_norm = state.total_scale();
        let diag = build_collision_diagonal(fields, grads, &self.set, &self.params, &self.duplication, moment)?;
        let (b1, b2) = lcu_unitaries(&diag, &self.layout)?;
        let success_prob = apply_lcu_collision(&mut state, &b1, &b2, diag.lcu_scale)?;
        state.apply_gates(&self.streaming_gates)?;
        apply_moment_extraction(&mut state)?;
        Ok(CircuitOutput {
            moment,
            field: readout_field(&state)?,
            success_prob,
            field_norm,
            lcu_scale: diag.lcu_scale,
        })
    }

    /// One hybrid step with caller-supplied gradients.
    pub fn step_with_gradients(
        &self,
        fields: &MacroFields<T>,
        grads: &[VelocityGradient<T>],
        step: usize,
    ) -> Result<(MacroFields<T>, StepReport), PipelineError> {
        if fields.mesh != self.mesh {
            return Err(SolverError::ShapeMismatch {
                expected: self.mesh.len(),
                got: fields.mesh.len(),
            }
            .into());
        }
        let moments = Moment::all(self.set.dimension());
        let outputs = moments
            .par_iter()
            .map(|&m| self.run_circuit(fields, grads, m))
            .collect::<Result<Vec<_>, _>>()?;

        let rho = outputs[0].field.clone();
        let mut vel = vec![[T::zero(); 3]; rho.len()];
        for (node, &r) in rho.iter().enumerate() {
            if !(r > T::zero()) || !r.is_finite() {
                return Err(SolverError::Instability {
                    step,
                    node,
                    value: r.as_f64(),
                }
                .into());
            }
            for out in &outputs[1..] {
                if let Moment::Momentum(d) = out.moment {
                    vel[node][d] = out.field[node] / r;
                }
            }
        }
        let mut next = MacroFields {
            mesh: self.mesh,
            rho,
            vel,
        };
        if let Boundary::Cavity { .. } = self.bc {
            next = apply_dirichlet(&next, &self.bc)?;
        }
        let report = StepReport {
            step,
            circuits: moments,
            success_prob_collision: outputs.iter().map(|o| o.success_prob.as_f64()).collect(),
            field_norms: outputs.iter().map(|o| o.field_norm.as_f64()).collect(),
            lcu_scale: outputs.iter().map(|o| o.lcu_scale.as_f64()).collect(),
            gate_counts: self.counts.clone(),
        };
        Ok((next, report))
    }

    /// One hybrid step; gradients are computed classically from `fields`.
    pub fn qlks_step(&self, fields: &MacroFields<T>, step: usize) -> Result<(MacroFields<T>, StepReport), PipelineError> {
        let grads = compute_gradients(fields, &self.bc)?;
        self.step_with_gradients(fields, &grads, step)
    }
}

impl<T: Real> Stepper<T> for QuantumLks<T> {
    fn step(&mut self, fields: &MacroFields<T>, step: usize) -> Result<MacroFields<T>, SolverError> {
        let (next, report) = self.qlks_step(fields, step)?;
        if self.keep_reports {
            self.reports.push(report);
        }
        Ok(next)
    }
}

/// Closed-form stage costs and the gates this implementation emits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub lattice: LatticeModel,
    pub mesh: [usize; 3],
    pub n_total: usize,
    pub n_spatial: usize,
    pub n_q: usize,
    pub q: usize,
    /// Moving directions.
    pub sigma: usize,
    pub formula: FormulaCounts,
    pub emitted: StageCounts,
    /// Two-qubit-gate units of an elementary amplitude encoder for the spatial register.
    pub encoder_elementary_units: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaCounts {
    /// `2^(n_x+n_y+n_z)`.
    pub initialization: usize,
    /// `Q 2^(n_x+n_y+n_z+1)`.
    pub collision: usize,
    /// `sigma n_x`.
    pub streaming: usize,
    /// `2 n_Q`.
    pub moments: usize,
    /// `(2Q+1) 2^(n_x+n_y+n_z) + sigma n_x + 2 n_Q`.
    pub total: usize,
}

pub fn resource_estimate<T: Real>(set: &VelocitySet<T>, mesh: &Mesh) -> Result<ResourceReport, PipelineError> {
    let layout = register_layout(set.model(), mesh)?;
    let ns = layout.spatial_qubits();
    let q = set.q();
    let sigma = set.moving_directions();
    let sites = 1usize << ns;
    let formula = FormulaCounts {
        initialization: sites,
        collision: q * (sites << 1),
        streaming: sigma * layout.n_x,
        moments: 2 * layout.n_q,
        total: (2 * q + 1) * sites + sigma * layout.n_x + 2 * layout.n_q,
    };
    let (_, dup) = build_duplication(set, &layout.bits(Register::Velocity));
    let mut init: Vec<Gate<T>> = vec![Gate::AmplitudeLoad {
        targets: layout.spatial_bits(),
        data: Vec::new(),
    }];
    init.extend(dup);
    let emitted = StageCounts {
        initialization: GateCounts::of(&init),
        collision: GateCounts {
            h: 2,
            diagonal: 2,
            ..Default::default()
        },
        streaming: GateCounts::of(&build_streaming(set, &layout)),
        moments: GateCounts::of(&moment_extraction_gates::<T>(&layout)),
    };
    Ok(ResourceReport {
        lattice: set.model(),
        mesh: mesh.sizes(),
        n_total: layout.total(),
        n_spatial: ns,
        n_q: layout.n_q,
        q,
        sigma,
        formula,
        emitted,
        encoder_elementary_units: sites,
    })
}
