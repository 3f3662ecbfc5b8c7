//! Analytic Taylor-Green solutions, reference profiles and error diagnostics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::{MacroFields, Mesh};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("shape mismatch: {0} vs {1} samples")]
    ShapeMismatch(usize, usize),
    #[error("characteristic velocity must be positive, got {0}")]
    NonPositiveVelocity(f64),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("non-positive amplitude {value} at sample {index}")]
    NonPositiveAmplitude { index: usize, value: f64 },
    #[error("empty reference profile")]
    EmptyReference,
    #[error("reference profile line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("no shipped reference for {0}")]
    MissingReference(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnalyticKind {
    TG2D,
    TG3D,
}

/// Taylor-Green vortex on `[-L, L]^D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCase<T> {
    pub kind: AnalyticKind,
    /// Half-domain length.
    pub l: T,
    pub u0: T,
    pub rho0: T,
    pub re: T,
    pub cs2: T,
}

impl<T: Real> AnalyticCase<T> {
    /// Case on an `N`-node periodic axis with `L = N / 2`.
    pub fn on_mesh(kind: AnalyticKind, n: usize, u0: T, re: T, rho0: T, cs2: T) -> Self {
        Self {
            kind,
            l: T::int(n as i64) / T::int(2),
            u0,
            rho0,
            re,
            cs2,
        }
    }

    pub fn nu(&self) -> T {
        self.u0 * self.l / self.re
    }

    /// Velocity decay factor `exp(-2 pi^2 u0 t / (Re L))`.
    pub fn decay(&self, t: T) -> T {
        let two_pi2 = T::int(2) * T::PI() * T::PI();
        (-two_pi2 * self.u0 * t / (self.re * self.l)).exp()
    }
}

/// `(u, v, rho)` of the 2D vortex.
pub fn taylor_green_2d<T: Real>(x: T, y: T, t: T, case: &AnalyticCase<T>) -> (T, T, T) {
    let k = T::PI() / case.l;
    let g = case.decay(t);
    let u = -case.u0 * (k * x).cos() * (k * y).sin() * g;
    let v = case.u0 * (k * x).sin() * (k * y).cos() * g;
    let two = T::int(2);
    let amp = case.rho0 * case.u0 * case.u0 / (T::int(4) * case.cs2);
    let rho = case.rho0 - amp * ((two * k * x).cos() + (two * k * y).cos()) * g * g;
    (u, v, rho)
}

/// `(u, v, w, rho)` of the 3D vortex: the 2D field extruded along `z`, `w = 0`.
pub fn taylor_green_3d<T: Real>(x: T, y: T, _z: T, t: T, case: &AnalyticCase<T>) -> (T, T, T, T) {
    let (u, v, rho) = taylor_green_2d(x, y, t, case);
    (u, v, T::zero(), rho)
}

/// Initial density of a Taylor-Green run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialDensity {
    /// `rho = rho0` everywhere.
    #[default]
    Uniform,
    /// Analytic pressure field.
    Analytic,
}

impl FromStr for InitialDensity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "analytic" => Ok(Self::Analytic),
            other => Err(format!("unknown initial density `{other}` (uniform | analytic)")),
        }
    }
}

/// Node coordinate `-L + i` on a periodic axis.
pub fn node_coord<T: Real>(i: usize, l: T) -> T {
    T::int(i as i64) - l
}

/// Analytic fields at time `t`; density per `density`.
pub fn taylor_green_fields<T: Real>(mesh: Mesh, case: &AnalyticCase<T>, t: T, density: InitialDensity) -> MacroFields<T> {
    let mut f = MacroFields::uniform(mesh, case.rho0, [T::zero(); 3]);
    for k in 0..mesh.len() {
        let [i, j, _] = mesh.coords(k);
        let (u, v, rho) = taylor_green_2d(node_coord(i, case.l), node_coord(j, case.l), t, case);
        f.vel[k] = [u, v, T::zero()];
        if density == InitialDensity::Analytic {
            f.rho[k] = rho;
        }
    }
    f
}

/// Steps for dimensionless time `t* = u0 t / L`.
pub fn tstar_steps<T: Real>(tstar: T, l: T, u0: T) -> usize {
    (tstar * l / u0).round().to_usize().unwrap_or(0)
}

/// `sqrt(mean(((num - exact) / u0)^2))`.
pub fn l2_relative_error<T: Real>(numerical: &[T], exact: &[T], u0: T) -> Result<T, BenchError> {
    if numerical.len() != exact.len() {
        return Err(BenchError::ShapeMismatch(numerical.len(), exact.len()));
    }
    if !(u0 > T::zero()) {
        return Err(BenchError::NonPositiveVelocity(u0.as_f64()));
    }
    if numerical.is_empty() {
        return Err(BenchError::Degenerate("no samples".into()));
    }
    let sum: T = numerical.iter().zip(exact).map(|(&a, &b)| ((a - b) / u0).powi(2)).sum();
    Ok((sum / T::int(numerical.len() as i64)).sqrt())
}

/// Relative L2 error of every velocity component against the analytic solution at `t`.
pub fn taylor_green_errors<T: Real>(fields: &MacroFields<T>, case: &AnalyticCase<T>, t: T) -> Result<Vec<T>, BenchError> {
    let exact = taylor_green_fields(fields.mesh, case, t, InitialDensity::Analytic);
    (0..fields.mesh.dim)
        .map(|d| l2_relative_error(&fields.component(d), &exact.component(d), case.u0))
        .collect()
}

fn least_squares_slope<T: Real>(x: &[T], y: &[T]) -> T {
    let n = T::int(x.len() as i64);
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let sxy: T = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let sxx: T = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Least-squares slope of `log(error)` against `log(1/N)`.
pub fn convergence_order<T: Real>(mesh_sizes: &[usize], errors: &[T]) -> Result<T, BenchError> {
    if mesh_sizes.len() != errors.len() {
        return Err(BenchError::ShapeMismatch(mesh_sizes.len(), errors.len()));
    }
    if mesh_sizes.len() < 2 {
        return Err(BenchError::Degenerate("need at least two meshes".into()));
    }
    if errors.iter().any(|e| !(*e > T::zero())) || mesh_sizes.contains(&0) {
        return Err(BenchError::Degenerate("errors and mesh sizes must be positive".into()));
    }
    let x: Vec<T> = mesh_sizes.iter().map(|&n| -T::int(n as i64).ln()).collect();
    if x.iter().all(|v| *v == x[0]) {
        return Err(BenchError::Degenerate("all mesh sizes equal".into()));
    }
    let y: Vec<T> = errors.iter().map(|e| e.ln()).collect();
    Ok(least_squares_slope(&x, &y))
}

/// `nu = -L^2 / (2 pi^2) * d log(amplitude) / dt`, least squares over the samples.
pub fn measured_viscosity<T: Real>(times: &[T], amplitudes: &[T], l: T) -> Result<T, BenchError> {
    if times.len() != amplitudes.len() {
        return Err(BenchError::ShapeMismatch(times.len(), amplitudes.len()));
    }
    if times.len() < 2 {
        return Err(BenchError::Degenerate("need at least two samples".into()));
    }
    if let Some((index, a)) = amplitudes.iter().enumerate().find(|(_, a)| !(**a > T::zero())) {
        return Err(BenchError::NonPositiveAmplitude { index, value: a.as_f64() });
    }
    let y: Vec<T> = amplitudes.iter().map(|a| a.ln()).collect();
    let slope = least_squares_slope(times, &y);
    Ok(-slope * l * l / (T::int(2) * T::PI() * T::PI()))
}

/// Error table row: relative L2 per velocity component and the fitted order across rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub mesh: usize,
    pub u0: f64,
    pub l2: Vec<f64>,
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceSource {
    Ghia,
    WongBaker,
    Jiang,
}

impl fmt::Display for ReferenceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ghia => "Ghia",
            Self::WongBaker => "Wong-Baker",
            Self::Jiang => "Jiang",
        })
    }
}

impl FromStr for ReferenceSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Ghia" => Ok(Self::Ghia),
            "Wong-Baker" => Ok(Self::WongBaker),
            "Jiang" => Ok(Self::Jiang),
            other => Err(format!("unknown source tag `{other}`")),
        }
    }
}

/// Centerline velocity samples normalised by the lid speed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceProfile {
    pub source: ReferenceSource,
    pub re: u32,
    /// Velocity component sampled (`u`, `v` or `w`).
    pub component: char,
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
}

const GHIA: [(u32, char, &str); 6] = [
    (100, 'u', include_str!("../assets/ghia_re100_u.csv")),
    (100, 'v', include_str!("../assets/ghia_re100_v.csv")),
    (400, 'u', include_str!("../assets/ghia_re400_u.csv")),
    (400, 'v', include_str!("../assets/ghia_re400_v.csv")),
    (1000, 'u', include_str!("../assets/ghia_re1000_u.csv")),
    (1000, 'v', include_str!("../assets/ghia_re1000_v.csv")),
];

impl ReferenceProfile {
    /// Parses `# source=TAG re=RE component=C ...` followed by a `coord,value` table.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut source = None;
        let mut re = None;
        let mut component = None;
        let mut coords = Vec::new();
        let mut values = Vec::new();
        let mut seen_header = false;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |reason: String| BenchError::Parse { line, reason };
            let row = raw.trim();
            if row.is_empty() {
                continue;
            }
            if let Some(meta) = row.strip_prefix('#') {
                for kv in meta.split_whitespace() {
                    let Some((k, v)) = kv.split_once('=') else { continue };
                    match k {
                        "source" => source = Some(v.parse().map_err(err)?),
                        "re" => re = Some(v.parse::<u32>().map_err(|e| err(e.to_string()))?),
                        "component" => component = v.chars().next(),
                        _ => {}
                    }
                }
                continue;
            }
            if !seen_header {
                if row != "coord,value" {
                    return Err(err(format!("expected `coord,value` header, got `{row}`")));
                }
                seen_header = true;
                continue;
            }
            let (c, v) = row.split_once(',').ok_or_else(|| err("expected two columns".into()))?;
            let c: f64 = c.trim().parse().map_err(|e| err(format!("coord: {e}")))?;
            let v: f64 = v.trim().parse().map_err(|e| err(format!("value: {e}")))?;
            if !(0.0..=1.0).contains(&c) {
                return Err(err(format!("coordinate {c} outside [0, 1]")));
            }
            if coords.last().is_some_and(|&p| c <= p) {
                return Err(err("coordinates must increase".into()));
            }
            coords.push(c);
            values.push(v);
        }
        if coords.is_empty() {
            return Err(BenchError::EmptyReference);
        }
        let missing = |what: &str| BenchError::Parse {
            line: 1,
            reason: format!("header lacks {what}"),
        };
        Ok(Self {
            source: source.ok_or_else(|| missing("source"))?,
            re: re.ok_or_else(|| missing("re"))?,
            component: component.ok_or_else(|| missing("component"))?,
            coords,
            values,
        })
    }

    /// Shipped Ghia centerline table (`u` on the vertical, `v` on the horizontal centerline).
    pub fn ghia(re: u32, component: char) -> Result<Self, BenchError> {
        GHIA.iter()
            .find(|(r, c, _)| *r == re && *c == component)
            .ok_or_else(|| BenchError::MissingReference(format!("Ghia re={re} component={component}")))
            .and_then(|(_, _, text)| Self::parse(text))
    }
}

/// Linear interpolation of `(xs, ys)` at `x`; `xs` increasing, clamped at the ends.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let hi = xs.partition_point(|&p| p < x);
    if hi == 0 {
        return ys[0];
    }
    if hi == xs.len() {
        return ys[xs.len() - 1];
    }
    let (x0, x1) = (xs[hi - 1], xs[hi]);
    let w = (x - x0) / (x1 - x0);
    ys[hi - 1] * (1.0 - w) + ys[hi] * w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileDeviation {
    pub max: f64,
    pub rms: f64,
}

/// Deviation of a solution profile (physical units) from a normalised reference.
pub fn compare_profile(coords: &[f64], values: &[f64], reference: &ReferenceProfile, u0: f64) -> Result<ProfileDeviation, BenchError> {
    if reference.coords.is_empty() {
        return Err(BenchError::EmptyReference);
    }
    if coords.len() != values.len() {
        return Err(BenchError::ShapeMismatch(coords.len(), values.len()));
    }
    if coords.is_empty() {
        return Err(BenchError::Degenerate("empty solution profile".into()));
    }
    if !(u0 > 0.0) {
        return Err(BenchError::NonPositiveVelocity(u0));
    }
    let d: Vec<f64> = reference
        .coords
        .iter()
        .zip(&reference.values)
        .map(|(&c, &r)| (interpolate(coords, values, c) / u0 - r).abs())
        .collect();
    Ok(ProfileDeviation {
        max: d.iter().copied().fold(0.0, f64::max),
        rms: (d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64).sqrt(),
    })
}

/// Velocity component `component` along the line through the cavity centre parallel to `along`.
///
/// Coordinates run wall to wall on `[0, 1]`; the remaining axes are sampled at
/// the centre, averaging the two middle nodes on even meshes.
pub fn centerline<T: Real>(fields: &MacroFields<T>, component: usize, along: usize) -> (Vec<f64>, Vec<f64>) {
    let mesh = fields.mesh;
    let sizes = mesh.sizes();
    let n = sizes[along];
    let mid = |axis: usize| -> Vec<usize> {
        let m = sizes[axis];
        if m.is_multiple_of(2) {
            vec![m / 2 - 1, m / 2]
        } else {
            vec![m / 2]
        }
    };
    let others: Vec<usize> = (0..mesh.dim).filter(|&a| a != along).collect();
    let mut coords = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let mut sum = 0.0;
        let mut count = 0usize;
        let a0 = mid(others[0]);
        let a1 = if others.len() > 1 { mid(others[1]) } else { vec![0] };
        for &p in &a0 {
            for &q in &a1 {
                let mut c = [0usize; 3];
                c[along] = i;
                c[others[0]] = p;
                if others.len() > 1 {
                    c[others[1]] = q;
                }
                sum += fields.vel[mesh.index(c[0], c[1], c[2])][component].as_f64();
                count += 1;
            }
        }
        coords.push(i as f64 / (n - 1) as f64);
        values.push(sum / count as f64);
    }
    (coords, values)
}

/// Stream function on the `x`-`y` plane `z = k`: `psi(i, j) = int_0^y u dy` (trapezoid,
/// lattice units).
pub fn stream_function<T: Real>(fields: &MacroFields<T>, k: usize) -> Vec<f64> {
    let mesh = fields.mesh;
    let mut psi = vec![0.0; mesh.nx * mesh.ny];
    for i in 0..mesh.nx {
        for j in 1..mesh.ny {
            let a = fields.vel[mesh.index(i, j - 1, k)][0].as_f64();
            let b = fields.vel[mesh.index(i, j, k)][0].as_f64();
            psi[i + mesh.nx * j] = psi[i + mesh.nx * (j - 1)] + 0.5 * (a + b);
        }
    }
    psi
}

/// Corner eddies counter-rotating against the primary vortex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerVortices {
    /// Primary-vortex extremum of the stream function.
    pub primary: f64,
    /// Strongest opposite-sign value in the bottom-left and bottom-right corners.
    pub bottom_left: f64,
    pub bottom_right: f64,
}

impl CornerVortices {
    /// Both corner eddies exceed `1e-9` of the primary vortex strength.
    pub fn both_present(&self) -> bool {
        let floor = 1e-9 * self.primary.abs();
        self.bottom_left > floor && self.bottom_right > floor
    }
}

/// Looks for opposite-sign stream function in the lower corner quarters of the mid plane.
pub fn detect_corner_vortices<T: Real>(fields: &MacroFields<T>) -> CornerVortices {
    let mesh = fields.mesh;
    let k = if mesh.dim == 3 { mesh.nz / 2 } else { 0 };
    let psi = stream_function(fields, k);
    let primary = psi.iter().copied().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
    let sign = if primary < 0.0 { -1.0 } else { 1.0 };
    let (qx, qy) = (mesh.nx / 4, mesh.ny / 4);
    let corner = |xs: std::ops::Range<usize>| {
        let mut best = f64::NEG_INFINITY;
        for i in xs {
            for j in 1..qy {
                best = best.max(-sign * psi[i + mesh.nx * j]);
            }
        }
        best
    };
    CornerVortices {
        primary,
        bottom_left: corner(1..qx),
        bottom_right: corner(mesh.nx - qx..mesh.nx - 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(n: usize, u0: f64) -> AnalyticCase<f64> {
        AnalyticCase::on_mesh(AnalyticKind::TG2D, n, u0, 10.0, 1.0, 1.0 / 3.0)
    }

    #[test]
    fn taylor_green_origin() {
        let c = case(8, 0.2);
        let (u, v, rho) = taylor_green_2d(0.0, 0.0, 0.0, &c);
        assert_eq!((u, v), (0.0, 0.0));
        assert!((rho - (1.0 - 0.04 / (2.0 / 3.0))).abs() < 1e-15);
        let (u, v, rho) = taylor_green_2d(1.3, -0.7, 1e7, &c);
        assert!(u.abs() < 1e-300 && v.abs() < 1e-300 && (rho - 1.0).abs() < 1e-15);
    }

    #[test]
    fn taylor_green_divergence_free() {
        let c = case(16, 0.1);
        let h = 1e-4;
        for &(x, y) in &[(0.3, 1.7), (-5.0, 2.2), (7.9, -7.9)] {
            let du = (taylor_green_2d(x + h, y, 3.0, &c).0 - taylor_green_2d(x - h, y, 3.0, &c).0) / (2.0 * h);
            let dv = (taylor_green_2d(x, y + h, 3.0, &c).1 - taylor_green_2d(x, y - h, 3.0, &c).1) / (2.0 * h);
            assert!((du + dv).abs() < 1e-9);
        }
    }

    #[test]
    fn taylor_green_3d_extrudes() {
        let c = AnalyticCase { kind: AnalyticKind::TG3D, ..case(16, 0.02) };
        let a = taylor_green_3d(1.0, 2.0, -3.0, 5.0, &c);
        let b = taylor_green_3d(1.0, 2.0, 6.0, 5.0, &c);
        assert_eq!(a, b);
        assert_eq!(a.2, 0.0);
        let (u, v, rho) = taylor_green_2d(1.0, 2.0, 5.0, &c);
        assert_eq!((a.0, a.1, a.3), (u, v, rho));
    }

    #[test]
    fn decay_ratio() {
        let c = case(32, 0.05);
        let r = taylor_green_2d(1.0, 3.0, 40.0, &c).0 / taylor_green_2d(1.0, 3.0, 10.0, &c).0;
        let want = (-2.0 * std::f64::consts::PI.powi(2) * 0.05 * 30.0 / (10.0 * 16.0)).exp();
        assert!((r - want).abs() < 1e-14);
    }

    #[test]
    fn l2_metric() {
        let a = [0.1, -0.2, 0.3];
        assert_eq!(l2_relative_error(&a, &a, 0.1).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|x| x + 0.1 * 0.2).collect();
        assert!((l2_relative_error(&b, &a, 0.2).unwrap() - 0.1).abs() < 1e-14);
        assert_eq!(l2_relative_error(&b, &a, 0.2), l2_relative_error(&a, &b, 0.2));
        assert!(matches!(l2_relative_error(&a[..2], &a, 0.1), Err(BenchError::ShapeMismatch(2, 3))));
        assert!(l2_relative_error(&a, &a, 0.0).is_err());
    }

    #[test]
    fn order_fit() {
        assert!((convergence_order::<f64>(&[8, 16], &[1e-2, 2.5e-3]).unwrap() - 2.0).abs() < 1e-12);
        assert!(convergence_order::<f64>(&[8, 16, 32], &[0.1, 0.1, 0.1]).unwrap().abs() < 1e-12);
        let e = [1e-2, 2.5e-3, 6.25e-4];
        let s = convergence_order(&[8, 16, 32], &e).unwrap();
        let scaled: Vec<f64> = e.iter().map(|x| x * 7.0).collect();
        assert!((convergence_order(&[8, 16, 32], &scaled).unwrap() - s).abs() < 1e-12);
        assert!(convergence_order(&[8], &[1e-2]).is_err());
        assert!(convergence_order(&[8, 16], &[1e-2, 0.0]).is_err());
    }

    #[test]
    fn viscosity_from_exact_decay() {
        let l = 32.0;
        let nu = 0.08;
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 50.0).collect();
        let amps: Vec<f64> = times
            .iter()
            .map(|t| 0.025 * (-2.0 * nu * std::f64::consts::PI.powi(2) * t / (l * l)).exp())
            .collect();
        assert!((measured_viscosity(&times, &amps, l).unwrap() - nu).abs() < 1e-10);
        assert!(matches!(
            measured_viscosity(&[0.0, 1.0], &[1.0, 0.0], l),
            Err(BenchError::NonPositiveAmplitude { index: 1, .. })
        ));
    }

    #[test]
    fn ghia_assets_parse() {
        for (re, c, _) in GHIA {
            let p = ReferenceProfile::ghia(re, c).unwrap();
            assert_eq!(p.coords.len(), 17);
            assert_eq!(p.source, ReferenceSource::Ghia);
            assert_eq!(p.component, c);
        }
        let u = ReferenceProfile::ghia(100, 'u').unwrap();
        assert_eq!(*u.values.last().unwrap(), 1.0);
        assert_eq!(u.values[8], -0.20581);
        assert!(ReferenceProfile::ghia(5000, 'u').is_err());
    }

    #[test]
    fn reference_parse_errors() {
        let bad = "# source=Ghia re=100 component=u\ncoord,value\n0.5,1\n0.4,2\n";
        assert!(matches!(ReferenceProfile::parse(bad), Err(BenchError::Parse { line: 4, .. })));
        let empty = "# source=Ghia re=100 component=u\ncoord,value\n";
        assert_eq!(ReferenceProfile::parse(empty), Err(BenchError::EmptyReference));
        let out = "# source=Jiang re=100 component=u\ncoord,value\n1.5,0\n";
        assert!(ReferenceProfile::parse(out).is_err());
        let ok = "# source=Wong-Baker re=100 component=u\ncoord,value\n0.0,0\n1.0,1\n";
        assert_eq!(ReferenceProfile::parse(ok).unwrap().source, ReferenceSource::WongBaker);
    }

    #[test]
    fn profile_comparison() {
        let r = ReferenceProfile::ghia(100, 'u').unwrap();
        let u0 = 0.1;
        let values: Vec<f64> = r.values.iter().map(|v| v * u0).collect();
        let d = compare_profile(&r.coords, &values, &r, u0).unwrap();
        assert!(d.max < 1e-15 && d.rms < 1e-15);
        let shifted: Vec<f64> = values.iter().map(|v| v + 0.05 * u0).collect();
        let d = compare_profile(&r.coords, &shifted, &r, u0).unwrap();
        assert!((d.rms - 0.05).abs() < 1e-12 && (d.max - 0.05).abs() < 1e-12);
    }

    #[test]
    fn interpolation() {
        let xs = [0.0, 0.5, 1.0];
        let ys = [0.0, 1.0, 3.0];
        assert_eq!(interpolate(&xs, &ys, 0.25), 0.5);
        assert_eq!(interpolate(&xs, &ys, 0.75), 2.0);
        assert_eq!(interpolate(&xs, &ys, 1.0), 3.0);
        assert_eq!(interpolate(&xs, &ys, -1.0), 0.0);
    }

    #[test]
    fn tstar_to_steps() {
        assert_eq!(tstar_steps(1.0, 4.0, 0.2), 20);
        assert_eq!(tstar_steps(1.0, 32.0, 0.025), 1280);
        assert_eq!(tstar_steps(0.2, 8.0, 0.02), 80);
    }

    #[test]
    fn centerline_of_linear_field() {
        let mesh = Mesh::new_2d(4, 5).unwrap();
        let mut f = MacroFields::uniform(mesh, 1.0, [0.0; 3]);
        for k in 0..mesh.len() {
            let [i, j, _] = mesh.coords(k);
            f.vel[k] = [j as f64, i as f64, 0.0];
        }
        let (c, u) = centerline(&f, 0, 1);
        assert_eq!(c, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(u, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        let (_, v) = centerline(&f, 1, 0);
        assert_eq!(v, vec![0.0, 1.0, 2.0, 3.0]);
    }
}
