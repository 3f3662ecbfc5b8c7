//! Lattice kinetic scheme flow solver.
//!
//! The classical backend advances macroscopic density and velocity directly
//! from a gradient-corrected equilibrium. The quantum backend runs the same
//! update as a set of statevector-simulated circuits.

// `!(x > 0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod classical;
pub mod io;
pub mod lattice;
pub mod quantum;
pub mod scalar;
pub mod statevector;

pub use benchmarks::{AnalyticCase, AnalyticKind, InitialDensity, ReferenceProfile};
pub use classical::{Boundary, ClassicalLks, MacroFields, Mesh, RunControl, RunOutput, SolverError, Stepper};
pub use lattice::{FlowParams, LatticeError, LatticeModel, VelocityGradient, VelocitySet};
pub use quantum::{Moment, PipelineError, QuantumLks, ResourceReport, StepReport};
pub use scalar::Real;
pub use statevector::{Gate, RegisterLayout, SimError, StateVector};

pub type Fields64 = MacroFields<f64>;
pub type Fields32 = MacroFields<f32>;
pub type VelocitySet64 = VelocitySet<f64>;
pub type FlowParams64 = FlowParams<f64>;
pub type StateVector64 = StateVector<f64>;
pub type ClassicalLks64 = ClassicalLks<f64>;
pub type QuantumLks64 = QuantumLks<f64>;
