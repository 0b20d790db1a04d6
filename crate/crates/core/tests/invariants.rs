mod common;

use std::f64::consts::PI;

use common::*;
use ideal_patterns::curvature::{calabi_energy, calabi_gradient, curvature_map, curvatures, jacobian, ricci_potential};
use ideal_patterns::flow::{run, FlowConfig, FlowKind};
use ideal_patterns::geometry::{angle_partials, edge_length, inner_angle, At, TwoCircleConfig};
use ideal_patterns::{Geometry, PatternState};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn geometry() -> impl Strategy<Value = Geometry> {
    prop_oneof![Just(Geometry::Euclidean), Just(Geometry::Hyperbolic)]
}

fn two_circle() -> impl Strategy<Value = TwoCircleConfig> {
    (geometry(), 0.05f64..10.0, 0.05f64..10.0, 0.01f64..PI - 0.01)
        .prop_map(|(g, ri, rj, th)| TwoCircleConfig::new(g, ri, rj, th).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn with_radii(cfg: &TwoCircleConfig, ri: f64, rj: f64) -> TwoCircleConfig {
    TwoCircleConfig { r_i: ri, r_j: rj, ..*cfg }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sine_law(cfg in two_circle()) {
        let l = edge_length(&cfg);
        let (ti, tj) = (inner_angle(&cfg, At::I), inner_angle(&cfg, At::J));
        let (sl, si, sj) = match cfg.geometry {
            Geometry::Hyperbolic => (l.sinh(), cfg.r_i.sinh(), cfg.r_j.sinh()),
            Geometry::Euclidean => (l, cfg.r_i, cfg.r_j),
        };
        prop_assert!(rel(sl * ti.sin(), sj * cfg.theta.sin()) < 1e-12);
        prop_assert!(rel(sl * tj.sin(), si * cfg.theta.sin()) < 1e-12);
    }

    #[test]
    fn angle_sum_of_the_triangle(cfg in two_circle()) {
        let total = inner_angle(&cfg, At::I) + inner_angle(&cfg, At::J) + PI - cfg.theta;
        match cfg.geometry {
            Geometry::Euclidean => prop_assert!((total - PI).abs() < 1e-12),
            Geometry::Hyperbolic => prop_assert!(total < PI),
        }
    }

    #[test]
    fn derivative_signs_and_symmetry(cfg in two_circle()) {
        let p = angle_partials(&cfg);
        prop_assert!(p.di_dri < 0.0 && p.dj_drj < 0.0);
        prop_assert!(p.di_drj > 0.0 && p.dj_dri > 0.0);
        let (si, sj) = match cfg.geometry {
            Geometry::Hyperbolic => (cfg.r_i.sinh(), cfg.r_j.sinh()),
            Geometry::Euclidean => (cfg.r_i, cfg.r_j),
        };
        prop_assert!(rel(sj * p.di_drj, si * p.dj_dri) < 1e-12);
    }

    #[test]
    fn partials_match_finite_differences(cfg in two_circle()) {
        // Five-point stencil with a step relative to the radius. Angles lie
        // in (0, pi), so no stencil resolves derivatives below ~ eps * pi / h;
        // that rounding floor is added to the relative tolerance.
        let p = angle_partials(&cfg);
        let check = |dri: f64, drj: f64, at: At, exact: f64| {
            let h = 1e-3 * if dri != 0.0 { cfg.r_i } else { cfg.r_j };
            let angle = |k: f64| inner_angle(&with_radii(&cfg, cfg.r_i + k * dri * h, cfg.r_j + k * drj * h), at);
            let fd = (angle(-2.0) - 8.0 * angle(-1.0) + 8.0 * angle(1.0) - angle(2.0)) / (12.0 * h);
            let floor = 16.0 * f64::EPSILON * PI / h;
            ((fd - exact).abs() <= 1e-5 * exact.abs() + floor, fd)
        };
        for (dri, drj, at, exact) in [
            (1.0, 0.0, At::I, p.di_dri),
            (0.0, 1.0, At::I, p.di_drj),
            (1.0, 0.0, At::J, p.dj_dri),
            (0.0, 1.0, At::J, p.dj_drj),
        ] {
            let (ok, fd) = check(dri, drj, at, exact);
            prop_assert!(ok, "{:?}: {} vs {}", at, fd, exact);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobian_symmetric_and_matches_finite_differences(seed in any::<u64>(), g in geometry()) {
        let mut rng = StdRng::seed_from_u64(seed);
        for fx in [cube(), genus2_five()] {
            let s = random_state(&mut rng, g, fx.complex.num_vertices());
            let jac = jacobian(&fx.tri, &s).unwrap();
            prop_assert!(jac.asymmetry() < 1e-12);
            let fd = fd_jacobian(&fx.tri, &s, 1e-6);
            for (a, b) in jac.l.iter().zip(fd.iter()) {
                prop_assert!((a - b).abs() <= 1e-5 * a.abs().max(1.0), "{}: {} vs {}", fx.name, a, b);
            }
            if g == Geometry::Hyperbolic {
                let split = jac.a_diag.as_ref().unwrap();
                let rebuilt = &jac.l_b + nalgebra::DMatrix::from_diagonal(split);
                prop_assert!((rebuilt - &jac.l).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn gauss_bonnet_on_random_states(seed in any::<u64>(), g in geometry()) {
        let mut rng = StdRng::seed_from_u64(seed);
        for fx in [torus(), octagon(), cube(), genus2_five()] {
            let s = random_state(&mut rng, g, fx.complex.num_vertices());
            let report = curvature_map(&fx.tri, &s).unwrap();
            prop_assert!(report.gauss_bonnet_residual.abs() < 1e-9);
            prop_assert_eq!(report.total_area.is_some(), g == Geometry::Hyperbolic);
        }
    }

    #[test]
    fn euclidean_scale_invariance(seed in any::<u64>(), lambda in 0.1f64..10.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        for fx in [torus(), cube(), genus2_five()] {
            let s = random_state(&mut rng, Geometry::Euclidean, fx.complex.num_vertices());
            let scaled = PatternState::from_radii(Geometry::Euclidean, s.r().iter().map(|r| r * lambda).collect()).unwrap();
            let (k, ks) = (curvatures(&fx.tri, &s).unwrap(), curvatures(&fx.tri, &scaled).unwrap());
            prop_assert!(max_abs(k.iter().zip(&ks).map(|(a, b)| a - b)) < 1e-12);
        }
    }

    #[test]
    fn calabi_gradient_is_two_l_k(seed in any::<u64>(), g in geometry()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let fx = genus2_five();
        let s = random_state(&mut rng, g, 5);
        let k = curvatures(&fx.tri, &s).unwrap();
        let grad = calabi_gradient(&jacobian(&fx.tri, &s).unwrap(), &k);
        let h = 1e-6;
        for j in 0..5 {
            let energy_at = |d: f64| {
                let mut u = s.u().to_vec();
                u[j] += d;
                calabi_energy(&curvatures(&fx.tri, &PatternState::from_u(g, u).unwrap()).unwrap())
            };
            let fd = (energy_at(h) - energy_at(-h)) / (2.0 * h);
            prop_assert!((fd - grad[j]).abs() <= 1e-5 * grad[j].abs().max(1.0), "{} vs {}", fd, grad[j]);
        }
    }

    #[test]
    fn euclidean_curvature_bounds(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        for fx in [torus(), octagon(), cube(), genus2_five()] {
            let s = random_state(&mut rng, Geometry::Euclidean, fx.complex.num_vertices());
            let k = curvatures(&fx.tri, &s).unwrap();
            for (ki, corners) in k.iter().zip(fx.tri.corner_degrees()) {
                let d = corners as f64 / 2.0;
                prop_assert!(*ki < 2.0 * PI && *ki > (2.0 - 2.0 * d) * PI);
            }
        }
    }
}

#[test]
fn ricci_potential_is_path_independent_on_the_cube() {
    let fx = cube();
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..5 {
        let [a, b, c] = [0, 1, 2].map(|_| random_state(&mut rng, Geometry::Hyperbolic, 8).u().to_vec());
        let direct = ricci_potential(&fx.tri, Geometry::Hyperbolic, &a, &c).unwrap();
        let two_legs = ricci_potential(&fx.tri, Geometry::Hyperbolic, &a, &b).unwrap()
            + ricci_potential(&fx.tri, Geometry::Hyperbolic, &b, &c).unwrap();
        assert!((direct - two_legs).abs() < 1e-8, "{direct} vs {two_legs}");
    }
}

#[test]
fn ricci_potential_gradient_is_curvature() {
    let fx = genus2_five();
    let mut rng = StdRng::seed_from_u64(12);
    let base = random_state(&mut rng, Geometry::Hyperbolic, 5);
    let s = random_state(&mut rng, Geometry::Hyperbolic, 5);
    let k = curvatures(&fx.tri, &s).unwrap();
    let h = 1e-4;
    for j in 0..5 {
        let at = |d: f64| {
            let mut u = s.u().to_vec();
            u[j] += d;
            ricci_potential(&fx.tri, Geometry::Hyperbolic, base.u(), &u).unwrap()
        };
        let fd = (at(h) - at(-h)) / (2.0 * h);
        assert!((fd - k[j]).abs() < 1e-6, "{fd} vs {}", k[j]);
    }
}

#[test]
fn ricci_potential_decreases_along_calabi_flow() {
    let fx = genus2_five();
    let mut rng = StdRng::seed_from_u64(13);
    let s0 = PatternState::from_radii(Geometry::Hyperbolic, random_radii(&mut rng, 5, 0.5, 2.0)).unwrap();
    let cfg = FlowConfig { record_every: 20, ..FlowConfig::new(FlowKind::CalabiHyperbolic) };
    let traj = run(&cfg, &fx.tri, &s0).unwrap();
    assert!(traj.converged());
    let values: Vec<f64> = traj
        .samples
        .iter()
        .map(|smp| {
            let u = PatternState::from_radii(Geometry::Hyperbolic, smp.r.clone()).unwrap().u().to_vec();
            ricci_potential(&fx.tri, Geometry::Hyperbolic, s0.u(), &u).unwrap()
        })
        .collect();
    assert!(values.len() > 5);
    for w in values.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{} then {}", w[0], w[1]);
    }
}
