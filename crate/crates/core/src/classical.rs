//! Classical lattice kinetic scheme: macroscopic fields are advanced directly
//! from the streamed equilibria, without storing distribution functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{mach_check, normalized_core, FlowParams, LatticeError, VelocityGradient, VelocitySet};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("mesh axis {axis} has {nodes} nodes; at least 3 are needed to differentiate")]
    MeshTooSmall { axis: usize, nodes: usize },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("non-positive or non-finite density {value} at node {node} (step {step})")]
    Instability { step: usize, node: usize, value: f64 },
    #[error("boundary condition mismatch: {0}")]
    Boundary(String),
    #[error("field shape mismatch: expected {expected} nodes, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Uniform node grid. Node `(i, j, k)` has linear index `i + nx * (j + ny * k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub dim: usize,
}

impl Mesh {
    pub fn new_2d(nx: usize, ny: usize) -> Result<Self, SolverError> {
        Self::new(2, [nx, ny, 1])
    }

    pub fn new_3d(nx: usize, ny: usize, nz: usize) -> Result<Self, SolverError> {
        Self::new(3, [nx, ny, nz])
    }

    pub fn new(dim: usize, sizes: [usize; 3]) -> Result<Self, SolverError> {
        if !(dim == 2 || dim == 3) {
            return Err(SolverError::InvalidMesh(format!("dimension must be 2 or 3, got {dim}")));
        }
        if dim == 2 && sizes[2] != 1 {
            return Err(SolverError::InvalidMesh("2D meshes have nz = 1".into()));
        }
        if sizes[..dim].contains(&0) {
            return Err(SolverError::InvalidMesh("node counts must be positive".into()));
        }
        Ok(Self {
            nx: sizes[0],
            ny: sizes[1],
            nz: sizes[2],
            dim,
        })
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        [idx % self.nx, (idx / self.nx) % self.ny, idx / (self.nx * self.ny)]
    }

    /// Index of the node at `coords + offset` with periodic wrap on every axis.
    #[inline]
    pub fn wrapped(&self, c: [usize; 3], offset: [i32; 3]) -> usize {
        let s = self.sizes();
        let mut w = [0usize; 3];
        for a in 0..3 {
            let n = s[a] as i64;
            w[a] = ((c[a] as i64 + offset[a] as i64).rem_euclid(n)) as usize;
        }
        self.index(w[0], w[1], w[2])
    }

    pub fn is_power_of_two(&self) -> bool {
        self.sizes()[..self.dim].iter().all(|n| n.is_power_of_two())
    }
}

/// Density and velocity on every node.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroFields<T> {
    pub mesh: Mesh,
    pub rho: Vec<T>,
    pub vel: Vec<[T; 3]>,
}

impl<T: Real> MacroFields<T> {
    pub fn uniform(mesh: Mesh, rho: T, vel: [T; 3]) -> Self {
        Self {
            mesh,
            rho: vec![rho; mesh.len()],
            vel: vec![vel; mesh.len()],
        }
    }

    pub fn from_parts(mesh: Mesh, rho: Vec<T>, vel: Vec<[T; 3]>) -> Result<Self, SolverError> {
        for got in [rho.len(), vel.len()] {
            if got != mesh.len() {
                return Err(SolverError::ShapeMismatch {
                    expected: mesh.len(),
                    got,
                });
            }
        }
        Ok(Self { mesh, rho, vel })
    }

    /// Checks positivity and finiteness of the density and finiteness of the velocity.
    pub fn validate(&self, step: usize) -> Result<(), SolverError> {
        for (node, (&r, v)) in self.rho.iter().zip(&self.vel).enumerate() {
            if !(r > T::zero()) || !r.is_finite() || v.iter().any(|c| !c.is_finite()) {
                return Err(SolverError::Instability {
                    step,
                    node,
                    value: r.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Velocity component `d` on every node.
    pub fn component(&self, d: usize) -> Vec<T> {
        self.vel.iter().map(|v| v[d]).collect()
    }

    pub fn max_speed(&self) -> T {
        self.vel
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(T::zero(), T::max)
    }

    pub fn total_mass(&self) -> T {
        self.rho.iter().copied().sum()
    }

    /// Largest absolute difference over density and all velocity components.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let dr = self
            .rho
            .iter()
            .zip(&other.rho)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        let dv = self
            .vel
            .iter()
            .zip(&other.vel)
            .flat_map(|(a, b)| (0..3).map(move |d| (a[d] - b[d]).abs()))
            .fold(T::zero(), T::max);
        dr.max(dv)
    }
}

/// Boundary treatment. Streaming is periodic in both cases; cavity walls are
/// imposed on the macroscopic fields after each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary<T> {
    Periodic,
    /// Lid-driven cavity. The lid is the top plane of the last axis (y in 2D, z in 3D).
    Cavity { lid_velocity: [T; 3] },
}

impl<T: Real> Boundary<T> {
    pub fn cavity(mesh: &Mesh, lid_velocity: [T; 3]) -> Result<Self, SolverError> {
        let normal = lid_axis(mesh);
        if lid_velocity[normal] != T::zero() {
            return Err(SolverError::Boundary(format!(
                "lid velocity must be tangential to the lid (component {normal} is nonzero)"
            )));
        }
        Ok(Boundary::Cavity { lid_velocity })
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Boundary::Periodic)
    }
}

/// Axis normal to the cavity lid.
pub fn lid_axis(mesh: &Mesh) -> usize {
    mesh.dim - 1
}

/// Velocity gradients by second-order finite differences.
///
/// Periodic boundaries use wrapped central differences. Cavity boundaries use
/// central differences in the interior and one-sided second-order stencils on wall nodes.
pub fn compute_gradients<T: Real>(
    fields: &MacroFields<T>,
    bc: &Boundary<T>,
) -> Result<Vec<VelocityGradient<T>>, SolverError> {
    let mesh = fields.mesh;
    let sizes = mesh.sizes();
    for (axis, &n) in sizes.iter().enumerate().take(mesh.dim) {
        if n < 3 {
            return Err(SolverError::MeshTooSmall { axis, nodes: n });
        }
    }
    let periodic = bc.is_periodic();
    let half = T::ratio(1, 2);
    let three = T::int(3);
    let four = T::int(4);
    let vel = &fields.vel;

    let grads = (0..mesh.len())
        .into_par_iter()
        .map(|idx| {
            let c = mesh.coords(idx);
            let mut g = VelocityGradient::zero();
            for axis in 0..mesh.dim {
                let n = sizes[axis];
                let at = |shift: i32| {
                    let mut off = [0i32; 3];
                    off[axis] = shift;
                    &vel[mesh.wrapped(c, off)]
                };
                for comp in 0..mesh.dim {
                    let d = if periodic || (c[axis] > 0 && c[axis] + 1 < n) {
                        (at(1)[comp] - at(-1)[comp]) * half
                    } else if c[axis] == 0 {
                        (-three * at(0)[comp] + four * at(1)[comp] - at(2)[comp]) * half
                    } else {
                        (three * at(0)[comp] - four * at(-1)[comp] + at(-2)[comp]) * half
                    };
                    g.grad[comp][axis] = d;
                }
            }
            g
        })
        .collect();
    Ok(grads)
}

/// One lattice-kinetic step with caller-supplied gradients.
///
/// `rho(x) = sum_a f_a^eq(x - e_a)`, `rho u(x) = sum_a e_a f_a^eq(x - e_a)` with
/// periodic wrap, followed by wall enforcement for cavity boundaries.
pub fn lks_step_with_gradients<T: Real>(
    fields: &MacroFields<T>,
    grads: &[VelocityGradient<T>],
    set: &VelocitySet<T>,
    params: &FlowParams<T>,
    bc: &Boundary<T>,
    step: usize,
) -> Result<MacroFields<T>, SolverError> {
    let mesh = fields.mesh;
    if grads.len() != mesh.len() {
        return Err(SolverError::ShapeMismatch {
            expected: mesh.len(),
            got: grads.len(),
        });
    }
    let a_dt = params.a_coeff * params.dt;
    let q = set.q();

    let moments: Vec<(T, [T; 3])> = (0..mesh.len())
        .into_par_iter()
        .map(|idx| {
            let c = mesh.coords(idx);
            let mut rho = T::zero();
            let mut mom = [T::zero(); 3];
            for alpha in 0..q {
                let e = set.velocity(alpha);
                let src = mesh.wrapped(c, [-e[0], -e[1], -e[2]]);
                let f = fields.rho[src] * normalized_core(fields.vel[src], &grads[src], set, a_dt, alpha);
                rho = rho + f;
                for d in 0..3 {
                    if e[d] != 0 {
                        mom[d] = mom[d] + T::int(e[d] as i64) * f;
                    }
                }
            }
            (rho, mom)
        })
        .collect();

    let mut rho = Vec::with_capacity(mesh.len());
    let mut vel = Vec::with_capacity(mesh.len());
    for (node, (r, m)) in moments.into_iter().enumerate() {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(SolverError::Instability {
                step,
                node,
                value: r.as_f64(),
            });
        }
        rho.push(r);
        vel.push([m[0] / r, m[1] / r, m[2] / r]);
    }
    let next = MacroFields { mesh, rho, vel };
    match bc {
        Boundary::Periodic => Ok(next),
        Boundary::Cavity { .. } => apply_dirichlet(&next, bc),
    }
}

/// One lattice-kinetic step; gradients are taken from the current fields.
pub fn lks_step<T: Real>(
    fields: &MacroFields<T>,
    set: &VelocitySet<T>,
    params: &FlowParams<T>,
    bc: &Boundary<T>,
) -> Result<MacroFields<T>, SolverError> {
    let grads = compute_gradients(fields, bc)?;
    lks_step_with_gradients(fields, &grads, set, params, bc, 0)
}

/// Overwrites wall velocities with their prescribed values and copies wall
/// densities from the nearest interior node.
pub fn apply_dirichlet<T: Real>(fields: &MacroFields<T>, bc: &Boundary<T>) -> Result<MacroFields<T>, SolverError> {
    let lid = match bc {
        Boundary::Cavity { lid_velocity } => *lid_velocity,
        Boundary::Periodic => {
            return Err(SolverError::Boundary(
                "wall enforcement requested for a periodic boundary".into(),
            ))
        }
    };
    let mesh = fields.mesh;
    let sizes = mesh.sizes();
    let top = lid_axis(&mesh);
    let mut out = fields.clone();
    for idx in 0..mesh.len() {
        let c = mesh.coords(idx);
        let on_wall = (0..mesh.dim).any(|a| c[a] == 0 || c[a] + 1 == sizes[a]);
        if !on_wall {
            continue;
        }
        out.vel[idx] = if c[top] + 1 == sizes[top] { lid } else { [T::zero(); 3] };
        let mut inner = c;
        for a in 0..mesh.dim {
            inner[a] = inner[a].clamp(1, sizes[a].saturating_sub(2).max(1));
        }
        out.rho[idx] = fields.rho[mesh.index(inner[0], inner[1], inner[2])];
    }
    Ok(out)
}

/// `sqrt(sum |u^n - u^{n-1}|^2) / (u0 sqrt(N))`.
pub fn residual<T: Real>(current: &MacroFields<T>, previous: &MacroFields<T>, u0: T) -> T {
    let sum: T = current
        .vel
        .iter()
        .zip(&previous.vel)
        .map(|(a, b)| (0..3).map(|d| (a[d] - b[d]) * (a[d] - b[d])).sum::<T>())
        .sum();
    sum.sqrt() / (u0 * T::int(current.mesh.len() as i64).sqrt())
}

/// Anything that advances macroscopic fields by one time step.
pub trait Stepper<T: Real> {
    fn step(&mut self, fields: &MacroFields<T>, step: usize) -> Result<MacroFields<T>, SolverError>;
}

/// Classical backend.
#[derive(Debug, Clone)]
pub struct ClassicalLks<T> {
    pub set: VelocitySet<T>,
    pub params: FlowParams<T>,
    pub bc: Boundary<T>,
}

impl<T: Real> ClassicalLks<T> {
    pub fn new(set: VelocitySet<T>, params: FlowParams<T>, bc: Boundary<T>) -> Self {
        Self { set, params, bc }
    }
}

impl<T: Real> Stepper<T> for ClassicalLks<T> {
    fn step(&mut self, fields: &MacroFields<T>, step: usize) -> Result<MacroFields<T>, SolverError> {
        let grads = compute_gradients(fields, &self.bc)?;
        lks_step_with_gradients(fields, &grads, &self.set, &self.params, &self.bc, step)
    }
}

/// Stopping rule for [`run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunControl<T> {
    pub max_steps: usize,
    /// Stop early once the residual falls below this value.
    pub residual_threshold: Option<T>,
    /// Keep a copy of the fields every this many steps.
    pub snapshot_every: Option<usize>,
    pub u0: T,
}

impl<T: Real> RunControl<T> {
    pub fn steps(max_steps: usize, u0: T) -> Self {
        Self {
            max_steps,
            residual_threshold: None,
            snapshot_every: None,
            u0,
        }
    }
}

/// Default steady-state residual threshold.
pub const STEADY_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub fields: MacroFields<T>,
    pub steps: usize,
    /// Residual after each step; entry `n` belongs to step `n + 1`.
    pub residuals: Vec<T>,
    pub snapshots: Vec<(usize, MacroFields<T>)>,
    pub converged: bool,
}

/// Advances `initial` with `stepper` until the step budget or the residual threshold is reached.
/// `observer` sees every new state with its step number.
pub fn run<T: Real, S: Stepper<T> + ?Sized>(
    stepper: &mut S,
    initial: MacroFields<T>,
    control: &RunControl<T>,
    mut observer: impl FnMut(usize, &MacroFields<T>),
) -> Result<RunOutput<T>, SolverError> {
    initial.validate(0)?;
    let cs = T::ratio(1, 3);
    mach_check(initial.max_speed().max(control.u0), cs);
    let mut fields = initial;
    let mut residuals = Vec::new();
    let mut snapshots = Vec::new();
    let mut converged = false;
    let mut steps = 0;
    while steps < control.max_steps {
        let next = stepper.step(&fields, steps + 1)?;
        next.validate(steps + 1)?;
        steps += 1;
        let r = residual(&next, &fields, control.u0);
        residuals.push(r);
        fields = next;
        observer(steps, &fields);
        if let Some(every) = control.snapshot_every {
            if every > 0 && steps % every == 0 {
                snapshots.push((steps, fields.clone()));
            }
        }
        if let Some(th) = control.residual_threshold {
            if r < th {
                converged = true;
                break;
            }
        }
    }
    Ok(RunOutput {
        fields,
        steps,
        residuals,
        snapshots,
        converged,
    })
}
