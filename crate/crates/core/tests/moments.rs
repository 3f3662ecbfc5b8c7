#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use qlks_core::benchmarks::{taylor_green_fields, taylor_green_2d, AnalyticCase, AnalyticKind, InitialDensity};
use qlks_core::classical::{lks_step, Boundary, MacroFields, Mesh};
use qlks_core::lattice::{a_from_viscosity, equilibrium, viscosity_from_a, FlowParams, LatticeModel, VelocityGradient, VelocitySet};

fn params(a: f64) -> FlowParams<f64> {
    FlowParams::from_a(1.0, 0.1, a, 8.0, 1.0 / 3.0).unwrap()
}

struct Moments {
    zeroth: f64,
    first: [f64; 3],
    second: [[f64; 3]; 3],
}

fn moments(rho: f64, u: [f64; 3], g: &VelocityGradient<f64>, set: &VelocitySet<f64>, p: &FlowParams<f64>) -> Moments {
    let mut m = Moments {
        zeroth: 0.0,
        first: [0.0; 3],
        second: [[0.0; 3]; 3],
    };
    for alpha in 0..set.q() {
        let f = equilibrium(rho, u, g, set, p, alpha);
        let e = set.velocity(alpha).map(f64::from);
        m.zeroth += f;
        for i in 0..3 {
            m.first[i] += e[i] * f;
            for j in 0..3 {
                m.second[i][j] += e[i] * e[j] * f;
            }
        }
    }
    m
}

fn grad_in(dim: usize) -> impl Strategy<Value = VelocityGradient<f64>> {
    proptest::collection::vec(-0.05f64..0.05, 9).prop_map(move |v| {
        let mut g = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                g[i][j] = v[3 * i + j];
            }
        }
        VelocityGradient::from_matrix(g)
    })
}

fn vel_in(dim: usize) -> impl Strategy<Value = [f64; 3]> {
    proptest::collection::vec(-0.15f64..0.15, 3).prop_map(move |v| {
        let mut u = [0.0; 3];
        u[..dim].copy_from_slice(&v[..dim]);
        u
    })
}

fn case() -> impl Strategy<Value = (LatticeModel, f64, [f64; 3], VelocityGradient<f64>, f64)> {
    prop_oneof![Just(LatticeModel::D2Q9), Just(LatticeModel::D3Q27)].prop_flat_map(|m| {
        let d = m.dimension();
        (Just(m), 0.5f64..2.0, vel_in(d), grad_in(d), -0.5f64..0.74)
    })
}

const TOL: f64 = 1e-14;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zeroth_moment((model, rho, u, g, a) in case()) {
        let set = VelocitySet::new(model);
        let p = params(a);
        let s = g.symmetric();
        let tr = s[0][0] + s[1][1] + s[2][2];
        let m = moments(rho, u, &g, &set, &p);
        prop_assert!((m.zeroth - rho * (1.0 + a * p.dt * set.cs2() * tr)).abs() < TOL);
        let traceless = {
            let mut t = g.grad;
            let d = model.dimension();
            let mean = (0..d).map(|i| t[i][i]).sum::<f64>() / d as f64;
            for i in 0..d {
                t[i][i] -= mean;
            }
            VelocityGradient::from_matrix(t)
        };
        prop_assert!((moments(rho, u, &traceless, &set, &p).zeroth - rho).abs() < TOL);
    }

    #[test]
    fn first_moment((model, rho, u, g, a) in case()) {
        let set = VelocitySet::new(model);
        let m = moments(rho, u, &g, &set, &params(a));
        for i in 0..3 {
            prop_assert!((m.first[i] - rho * u[i]).abs() < TOL);
        }
    }

    #[test]
    fn second_moment_without_gradient_term((model, rho, u, g, _a) in case()) {
        let set = VelocitySet::new(model);
        let d = model.dimension();
        let m = moments(rho, u, &g, &set, &params(0.0));
        for i in 0..d {
            for j in 0..d {
                let want = rho * u[i] * u[j] + if i == j { rho / 3.0 } else { 0.0 };
                prop_assert!((m.second[i][j] - want).abs() < TOL, "{} {}: {} vs {}", i, j, m.second[i][j], want);
            }
        }
    }

    #[test]
    fn second_moment_of_gradient_term((model, rho, u, g, a) in case()) {
        let set = VelocitySet::new(model);
        let d = model.dimension();
        let p = params(a);
        let full = moments(rho, u, &g, &set, &p);
        let base = moments(rho, u, &g, &set, &params(0.0));
        let s = g.symmetric();
        let tr = s[0][0] + s[1][1] + s[2][2];
        let cs4 = 1.0 / 9.0;
        for i in 0..d {
            for j in 0..d {
                let want = rho * a * p.dt * cs4 * (2.0 * s[i][j] + if i == j { tr } else { 0.0 });
                prop_assert!((full.second[i][j] - base.second[i][j] - want).abs() < TOL);
            }
        }
    }

    #[test]
    fn viscosity_round_trip(a in -2.0f64..0.749) {
        let nu = viscosity_from_a(a, 1.0, 1.0 / 3.0);
        let back = a_from_viscosity(nu, 1.0, 1.0 / 3.0).unwrap();
        prop_assert!((back - a).abs() <= 1e-14 * a.abs().max(1.0));
    }
}

fn tg(n: usize, u0: f64, density: InitialDensity) -> (MacroFields<f64>, AnalyticCase<f64>) {
    let case = AnalyticCase::on_mesh(AnalyticKind::TG2D, n, u0, 10.0, 1.0, 1.0 / 3.0);
    (taylor_green_fields(Mesh::new_2d(n, n).unwrap(), &case, 0.0, density), case)
}

#[test]
fn mass_is_conserved_without_gradient_term() {
    let set = VelocitySet::new(LatticeModel::D2Q9);
    let p = FlowParams::from_a(1.0, 0.05, 0.0, 8.0, set.cs2()).unwrap();
    let (mut f, _) = tg(16, 0.05, InitialDensity::Analytic);
    let m0 = f.total_mass();
    for _ in 0..50 {
        f = lks_step(&f, &set, &p, &Boundary::Periodic).unwrap();
        assert!((f.total_mass() - m0).abs() <= 1e-12 * m0);
    }
}

#[test]
fn one_step_is_local() {
    let set = VelocitySet::new(LatticeModel::D2Q9);
    let p = params(0.39);
    let mesh = Mesh::new_2d(12, 12).unwrap();
    let base = MacroFields::uniform(mesh, 1.0, [0.02, -0.01, 0.0]);
    let mut bumped = base.clone();
    let centre = mesh.index(6, 6, 0);
    bumped.rho[centre] = 1.01;
    let a = lks_step(&base, &set, &p, &Boundary::Periodic).unwrap();
    let b = lks_step(&bumped, &set, &p, &Boundary::Periodic).unwrap();
    for k in 0..mesh.len() {
        let [i, j, _] = mesh.coords(k);
        let far = (i as i32 - 6).abs() > 1 || (j as i32 - 6).abs() > 1;
        if far {
            assert_eq!(a.rho[k], b.rho[k], "node ({i}, {j})");
        }
    }
    assert_ne!(a.rho[centre], b.rho[centre]);
}

#[test]
fn one_taylor_green_step_tracks_analytic_solution() {
    let set = VelocitySet::new(LatticeModel::D2Q9);
    let mut errs = Vec::new();
    for n in [16usize, 32, 64] {
        let u0 = 0.8 / n as f64;
        let (f, case) = tg(n, u0, InitialDensity::Analytic);
        let p = FlowParams::from_reynolds(1.0, u0, 10.0, case.l, set.cs2()).unwrap();
        let next = lks_step(&f, &set, &p, &Boundary::Periodic).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..f.mesh.len() {
            let [i, j, _] = f.mesh.coords(k);
            let (u, v, _) = taylor_green_2d(i as f64 - case.l, j as f64 - case.l, 1.0, &case);
            worst = worst.max((next.vel[k][0] - u).abs()).max((next.vel[k][1] - v).abs());
        }
        errs.push(worst / u0);
    }
    // Relative one-step error shrinks at least quadratically in the mesh spacing.
    assert!(errs[0] < 1e-2, "{errs:?}");
    assert!(errs[1] < errs[0] / 3.5 && errs[2] < errs[1] / 3.5, "{errs:?}");
}
