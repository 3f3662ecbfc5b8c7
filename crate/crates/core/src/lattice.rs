//! Lattice models, the gradient-augmented equilibrium distribution and the
//! viscosity relations of the lattice kinetic scheme (relaxation time fixed to 1).

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("density is zero; normalized equilibrium undefined")]
    ZeroDensity,
    #[error("time step must be positive, got {0}")]
    NonPositiveTimeStep(f64),
    #[error("squared sound speed must be positive, got {0}")]
    NonPositiveSoundSpeed(f64),
    #[error("viscosity must be positive, got {0} (EDF constant A must stay below 1/(4 c_s^2))")]
    NonPositiveViscosity(f64),
    #[error("invalid flow parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
}

/// Supported lattice models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeModel {
    D2Q9,
    D3Q27,
}

impl LatticeModel {
    pub fn dimension(self) -> usize {
        match self {
            LatticeModel::D2Q9 => 2,
            LatticeModel::D3Q27 => 3,
        }
    }

    pub fn q(self) -> usize {
        match self {
            LatticeModel::D2Q9 => 9,
            LatticeModel::D3Q27 => 27,
        }
    }

    /// Lattice used for a given spatial dimension.
    pub fn for_dimension(dim: usize) -> Option<Self> {
        match dim {
            2 => Some(LatticeModel::D2Q9),
            3 => Some(LatticeModel::D3Q27),
            _ => None,
        }
    }
}

// Direction tables. Index 0 is the rest velocity. The quantum pipeline maps
// direction `a` to velocity-register subspace `a`, so these orders are frozen.

const D2Q9_E: [[i32; 3]; 9] = [
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [-1, 0, 0],
    [0, -1, 0],
    [1, 1, 0],
    [-1, 1, 0],
    [-1, -1, 0],
    [1, -1, 0],
];

const D2Q9_W: [(i64, i64); 9] = [
    (4, 9),
    (1, 9),
    (1, 9),
    (1, 9),
    (1, 9),
    (1, 36),
    (1, 36),
    (1, 36),
    (1, 36),
];

const D3Q27_E: [[i32; 3]; 27] = [
    [0, 0, 0],
    // faces
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
    // edges
    [1, 1, 0],
    [-1, -1, 0],
    [-1, 0, 1],
    [1, 0, -1],
    [0, 1, 1],
    [0, -1, -1],
    [1, -1, 0],
    [-1, 1, 0],
    [1, 0, 1],
    [-1, 0, -1],
    [0, 1, -1],
    [0, -1, 1],
    // corners
    [1, 1, 1],
    [-1, -1, -1],
    [1, 1, -1],
    [-1, -1, 1],
    [1, -1, 1],
    [-1, 1, -1],
    [-1, 1, 1],
    [1, -1, -1],
];

fn d3q27_weight(e: [i32; 3]) -> (i64, i64) {
    match e.iter().map(|c| c.abs()).sum::<i32>() {
        0 => (8, 27),
        1 => (2, 27),
        2 => (1, 54),
        _ => (1, 216),
    }
}

/// A discrete velocity set with its quadrature weights.
///
/// Velocities are stored as 3-vectors; the z component is zero for D2Q9.
#[derive(Debug, Clone)]
pub struct VelocitySet<T> {
    model: LatticeModel,
    velocities: Vec<[i32; 3]>,
    exact_weights: Vec<Ratio<i64>>,
    weights: Vec<T>,
    cs2: T,
}

impl<T: Real> VelocitySet<T> {
    pub fn new(model: LatticeModel) -> Self {
        let (velocities, raw): (Vec<[i32; 3]>, Vec<(i64, i64)>) = match model {
            LatticeModel::D2Q9 => (D2Q9_E.to_vec(), D2Q9_W.to_vec()),
            LatticeModel::D3Q27 => (
                D3Q27_E.to_vec(),
                D3Q27_E.iter().map(|&e| d3q27_weight(e)).collect(),
            ),
        };
        let exact_weights = raw.iter().map(|&(n, d)| Ratio::new(n, d)).collect();
        let weights = raw.iter().map(|&(n, d)| T::ratio(n, d)).collect();
        Self {
            model,
            velocities,
            exact_weights,
            weights,
            cs2: T::ratio(1, 3),
        }
    }

    pub fn model(&self) -> LatticeModel {
        self.model
    }

    pub fn dimension(&self) -> usize {
        self.model.dimension()
    }

    pub fn q(&self) -> usize {
        self.velocities.len()
    }

    pub fn velocity(&self, alpha: usize) -> [i32; 3] {
        self.velocities[alpha]
    }

    pub fn velocities(&self) -> &[[i32; 3]] {
        &self.velocities
    }

    pub fn weight(&self, alpha: usize) -> T {
        self.weights[alpha]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Weights as exact rationals, for identity checks that must hold without rounding.
    pub fn exact_weights(&self) -> &[Ratio<i64>] {
        &self.exact_weights
    }

    /// Squared lattice sound speed, 1/3.
    pub fn cs2(&self) -> T {
        self.cs2
    }

    pub fn exact_cs2(&self) -> Ratio<i64> {
        Ratio::new(1, 3)
    }

    /// Index of the direction opposite to `alpha`.
    pub fn opposite(&self, alpha: usize) -> usize {
        let e = self.velocities[alpha];
        let neg = [-e[0], -e[1], -e[2]];
        self.velocities
            .iter()
            .position(|&v| v == neg)
            .expect("velocity sets are symmetric")
    }

    /// Number of moving (non-rest) directions.
    pub fn moving_directions(&self) -> usize {
        self.velocities.iter().filter(|e| **e != [0, 0, 0]).count()
    }
}

/// Flow parameters in lattice units. The relaxation time is fixed to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams<T> {
    pub dt: T,
    pub dx: T,
    pub rho0: T,
    pub u0: T,
    pub nu: T,
    pub re: T,
    /// Constant of the velocity-gradient term in the equilibrium.
    pub a_coeff: T,
    pub tau: T,
    /// Characteristic length used in the Reynolds number.
    pub length: T,
}

impl<T: Real> FlowParams<T> {
    /// Builds parameters from a Reynolds number: `nu = u0 * length / re`, `A` from the viscosity relation.
    pub fn from_reynolds(rho0: T, u0: T, re: T, length: T, cs2: T) -> Result<Self, LatticeError> {
        if !(re > T::zero()) || !re.is_finite() {
            return Err(LatticeError::InvalidParam {
                field: "re",
                reason: format!("must be positive and finite, got {re}"),
            });
        }
        if !(length > T::zero()) {
            return Err(LatticeError::InvalidParam {
                field: "length",
                reason: format!("must be positive, got {length}"),
            });
        }
        let nu = u0 * length / re;
        Self::from_viscosity(rho0, u0, nu, length, cs2)
    }

    pub fn from_viscosity(rho0: T, u0: T, nu: T, length: T, cs2: T) -> Result<Self, LatticeError> {
        if !(rho0 > T::zero()) {
            return Err(LatticeError::InvalidParam {
                field: "rho0",
                reason: format!("must be positive, got {rho0}"),
            });
        }
        if !(u0 > T::zero()) || !u0.is_finite() {
            return Err(LatticeError::InvalidParam {
                field: "u0",
                reason: format!("must be positive and finite, got {u0}"),
            });
        }
        if !(nu > T::zero()) {
            return Err(LatticeError::NonPositiveViscosity(nu.as_f64()));
        }
        let dt = T::one();
        let a_coeff = a_from_viscosity(nu, dt, cs2)?;
        Ok(Self {
            dt,
            dx: T::one(),
            rho0,
            u0,
            nu,
            re: u0 * length / nu,
            a_coeff,
            tau: T::one(),
            length,
        })
    }

    /// Parameters with an explicit `A`; the viscosity follows from the viscosity relation.
    pub fn from_a(rho0: T, u0: T, a_coeff: T, length: T, cs2: T) -> Result<Self, LatticeError> {
        let nu = viscosity_from_a(a_coeff, T::one(), cs2);
        if !(nu > T::zero()) {
            return Err(LatticeError::NonPositiveViscosity(nu.as_f64()));
        }
        let mut p = Self::from_viscosity(rho0, u0, nu, length, cs2)?;
        p.a_coeff = a_coeff;
        Ok(p)
    }
}

/// Velocity gradient tensor at a node, `grad[i][j] = d u_i / d x_j`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VelocityGradient<T> {
    pub grad: [[T; 3]; 3],
}

impl<T: Real> VelocityGradient<T> {
    pub fn zero() -> Self {
        Self {
            grad: [[T::zero(); 3]; 3],
        }
    }

    pub fn from_matrix(grad: [[T; 3]; 3]) -> Self {
        Self { grad }
    }

    /// `S = grad + grad^T`.
    pub fn symmetric(&self) -> [[T; 3]; 3] {
        let mut s = [[T::zero(); 3]; 3];
        for (i, row) in s.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.grad[i][j] + self.grad[j][i];
            }
        }
        s
    }

    /// `e^T S e`.
    #[inline]
    pub fn contract(&self, e: [i32; 3]) -> T {
        let mut acc = T::zero();
        for i in 0..3 {
            if e[i] == 0 {
                continue;
            }
            for j in 0..3 {
                if e[j] == 0 {
                    continue;
                }
                acc = acc + T::int((e[i] * e[j]) as i64) * (self.grad[i][j] + self.grad[j][i]);
            }
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.grad.iter().flatten().all(|v| v.is_finite())
    }
}

/// Equilibrium distribution for direction `alpha`, including the `A dt e^T S e` term.
///
/// With `a_coeff = 0` this is the standard second-order equilibrium.
#[inline]
pub fn equilibrium<T: Real>(
    rho: T,
    u: [T; 3],
    grad: &VelocityGradient<T>,
    set: &VelocitySet<T>,
    params: &FlowParams<T>,
    alpha: usize,
) -> T {
    rho * normalized_core(u, grad, set, params.a_coeff * params.dt, alpha)
}

/// Equilibrium divided by density. Errors on zero density.
pub fn normalized_equilibrium<T: Real>(
    rho: T,
    u: [T; 3],
    grad: &VelocityGradient<T>,
    set: &VelocitySet<T>,
    params: &FlowParams<T>,
    alpha: usize,
) -> Result<T, LatticeError> {
    if rho == T::zero() {
        return Err(LatticeError::ZeroDensity);
    }
    Ok(equilibrium(rho, u, grad, set, params, alpha) / rho)
}

/// `w_a (1 + e.u/cs2 + (e.u)^2/(2 cs4) - u.u/(2 cs2) + a_dt e^T S e)`.
#[inline]
pub(crate) fn normalized_core<T: Real>(
    u: [T; 3],
    grad: &VelocityGradient<T>,
    set: &VelocitySet<T>,
    a_dt: T,
    alpha: usize,
) -> T {
    let e = set.velocity(alpha);
    let cs2 = set.cs2();
    let two = T::int(2);
    let eu = T::int(e[0] as i64) * u[0] + T::int(e[1] as i64) * u[1] + T::int(e[2] as i64) * u[2];
    let uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let mut bracket = T::one() + eu / cs2 + eu * eu / (two * cs2 * cs2) - uu / (two * cs2);
    if a_dt != T::zero() {
        bracket = bracket + a_dt * grad.contract(e);
    }
    set.weight(alpha) * bracket
}

/// `A = (1/2 - nu/(cs2 dt)) / (2 cs2)`, the inverse of [`viscosity_from_a`].
pub fn a_from_viscosity<T: Real>(nu: T, dt: T, cs2: T) -> Result<T, LatticeError> {
    if !(dt > T::zero()) {
        return Err(LatticeError::NonPositiveTimeStep(dt.as_f64()));
    }
    if !(cs2 > T::zero()) {
        return Err(LatticeError::NonPositiveSoundSpeed(cs2.as_f64()));
    }
    let half = T::ratio(1, 2);
    Ok((half - nu / (cs2 * dt)) / (T::int(2) * cs2))
}

/// `nu = (tau - 1/2 - 2 A cs2) cs2 dt` with `tau = 1`.
pub fn viscosity_from_a<T: Real>(a: T, dt: T, cs2: T) -> T {
    let half = T::ratio(1, 2);
    (T::one() - half - T::int(2) * a * cs2) * cs2 * dt
}

/// Lattice equation of state `p = rho cs2`.
pub fn pressure<T: Real>(rho: T, cs2: T) -> T {
    rho * cs2
}

/// Largest `|u| / c_s` above which the low-Mach expansion is considered unreliable.
pub const MACH_WARN_THRESHOLD: f64 = 0.3;

/// Emits a warning when the Mach number exceeds [`MACH_WARN_THRESHOLD`]. Returns the Mach number.
pub fn mach_check<T: Real>(max_speed: T, cs2: T) -> T {
    let mach = max_speed / cs2.sqrt();
    if mach.as_f64() > MACH_WARN_THRESHOLD {
        log::warn!(
            "Mach number {:.3} exceeds {MACH_WARN_THRESHOLD}; the low-Mach equilibrium is inaccurate",
            mach.as_f64()
        );
    }
    mach
}
