mod common;

use std::f64::consts::PI;

use common::{circle, smooth_coeffs, sup, sup_diff, trig_field, trillium};
use curveflow::curve_geometry::{make_named_curve, NamedCurve, ParamGrid};
use curveflow::energies::{
    default_nodal_model, CurvatureEnergy, EnergyModel, LengthEnergy, PhaseSepEnergy, PhaseSepParams,
};
use curveflow::kinematics::{
    apply_m, apply_m_adjoint, gauge_scaled_arclength, gradient_normal_velocity, material_derivative,
    pip_residual, rigid_kernel_adjoint, rigid_motions, ExtrinsicVelocity,
};
use curveflow::surface_calculus::grad_s;
use proptest::prelude::*;

fn phase_sep_energy() -> PhaseSepEnergy {
    PhaseSepEnergy {
        params: PhaseSepParams {
            epsilon: 0.1,
            delta: 0.2,
            beta: 3.0,
            sigma1_len: 1.2,
            gamma0_length: 2.0 * PI,
        },
        nodal: default_nodal_model(),
    }
}

fn smooth_density(n: usize) -> Vec<f64> {
    trig_field(n, &[(0.5, 0.0), (0.1, 0.05), (0.0, 0.0), (0.08, -0.03)])
}

#[test]
fn constant_normal_velocity_on_unit_circle() {
    let c = 0.7;
    let u = circle(64, 1.0);
    let out = apply_m(&u, &ExtrinsicVelocity { v: vec![c; 64], w: vec![0.0; 64] });
    assert!(out.dkappa_dt.iter().all(|x| (x + c).abs() < 1e-12));
    assert!(out.dg_dt.iter().all(|x| (x - 2.0 * PI * c).abs() < 1e-12));

    let rest = apply_m(&u, &ExtrinsicVelocity { v: vec![0.0; 64], w: vec![0.0; 64] });
    assert!(sup(&rest.dkappa_dt) == 0.0 && sup(&rest.dg_dt) == 0.0);
}

#[test]
fn rigid_motions_lie_in_kernel_under_refinement() {
    let mut worst = Vec::new();
    for n in [64, 128, 256] {
        let u = trillium(n);
        let m = rigid_motions(&u)
            .iter()
            .map(|vel| {
                let out = apply_m(&u, vel);
                sup(&out.dkappa_dt).max(sup(&out.dg_dt))
            })
            .fold(0.0_f64, f64::max);
        worst.push(m);
    }
    assert!(worst[2] < 1e-3, "{worst:?}");
    for w in worst.windows(2) {
        assert!((w[0] / w[1]).log2() > 2.0, "{worst:?}");
    }
}

#[test]
fn rotation_kernel_field_is_constant_on_circle() {
    let u = circle(64, 1.0);
    let [_, _, third] = rigid_kernel_adjoint(&u);
    assert!(third.0.iter().all(|x| *x == 1.0));
    assert!(third.1.iter().all(|x| (x - 1.0 / (2.0 * PI)).abs() < 1e-15));
    for (a, b) in rigid_kernel_adjoint(&trillium(64)).iter() {
        assert!(a.iter().chain(b).all(|x| x.is_finite()));
    }
}

#[test]
fn material_derivative_trivial_cases() {
    let u = trillium(64);
    let rho = smooth_density(64);
    let rate = trig_field(64, &[(0.0, 0.0), (0.3, 0.2)]);
    let still = ExtrinsicVelocity { v: vec![0.0; 64], w: vec![0.0; 64] };
    assert_eq!(material_derivative(&u, &still, &rho, &rate), rate);
    let sliding = ExtrinsicVelocity { v: vec![0.0; 64], w: trig_field(64, &[(0.2, 0.0), (1.0, -0.5)]) };
    let d = material_derivative(&u, &sliding, &vec![1.3; 64], &rate);
    assert!(sup_diff(&d, &rate) < 1e-12);
}

#[test]
fn transported_density_has_zero_material_derivative() {
    // With V = 0 a density carried along the tangential flow satisfies
    // ρ(s, t) = ρ₀(X(s, t)) where dX/dτ = W(X)/g, X(0) = s.
    let n = 256;
    let u = circle(n, 1.0);
    let g = 2.0 * PI;
    let w_of = |s: f64| 0.5 + 0.3 * (2.0 * PI * s).sin();
    let rho0 = |s: f64| 1.0 + 0.4 * (2.0 * PI * s).cos() + 0.1 * (6.0 * PI * s).sin();
    let foot = |s: f64, t: f64| {
        let steps = 64;
        let h = t / steps as f64;
        let mut x = s;
        for _ in 0..steps {
            let k1 = w_of(x) / g;
            let k2 = w_of(x + 0.5 * h * k1) / g;
            let k3 = w_of(x + 0.5 * h * k2) / g;
            let k4 = w_of(x + h * k3) / g;
            x += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        x
    };
    let dt = 1e-4;
    let s = u.grid().s_values();
    let rho: Vec<f64> = s.iter().map(|&x| rho0(x)).collect();
    let rate: Vec<f64> = s
        .iter()
        .map(|&x| (rho0(foot(x, dt)) - rho0(foot(x, -dt))) / (2.0 * dt))
        .collect();
    let vel = ExtrinsicVelocity { v: vec![0.0; n], w: s.iter().map(|&x| w_of(x)).collect() };
    let d = material_derivative(&u, &vel, &rho, &rate);
    assert!(sup(&d) < 1e-6, "{}", sup(&d));
}

#[test]
fn gauge_velocity_on_circles() {
    let n = 256;
    let u = circle(n, 1.0);
    let w = gauge_scaled_arclength(&u, &vec![0.4; n]);
    assert!(sup(&w) < 1e-12);

    // ∮κV dσ = 0, so W is minus the running integral: -∫₀^s cos(2πσ) 2π dσ = -sin(2πs).
    let v = trig_field(n, &[(0.0, 0.0), (1.0, 0.0)]);
    let w = gauge_scaled_arclength(&u, &v);
    let expect = trig_field(n, &[(0.0, 0.0), (0.0, -1.0)]);
    assert!(sup_diff(&w, &expect) < 1e-7, "{}", sup_diff(&w, &expect));
}

#[test]
fn gauge_velocity_keeps_metric_uniform() {
    let mut errs = Vec::new();
    for n in [64, 128, 256] {
        let u = trillium(n);
        let v = trig_field(n, &[(0.1, 0.0), (0.4, -0.2), (0.0, 0.3), (0.2, 0.1)]);
        let w = gauge_scaled_arclength(&u, &v);
        assert!(w[0].abs() < 1e-14);
        let kv: Vec<f64> = (0..n).map(|j| u.kappa()[j] * v[j]).collect();
        let mean = u.arc_mean(&kv);
        let dw = grad_s(&w, &u);
        errs.push((0..n).fold(0.0_f64, |m, j| m.max((dw[j] + kv[j] - mean).abs())));
    }
    // The running integral inverts the discrete derivative, so the relation is exact.
    assert!(errs.iter().all(|e| *e < 1e-12), "{errs:?}");
}

#[test]
fn pip_residual_vanishes_exactly_where_expected() {
    let willmore = CurvatureEnergy::willmore();
    assert!(sup(&pip_residual(&circle(64, 1.0), None, &willmore)) < 1e-12);
    assert!(sup(&pip_residual(&trillium(64), None, &LengthEnergy)) < 1e-12);
}

#[test]
fn phase_sep_pip_residual_converges() {
    let energy = phase_sep_energy();
    let errs: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| {
            let u = make_named_curve(&NamedCurve::trillium(), &ParamGrid::fd4(n).unwrap()).unwrap();
            let rho = smooth_density(n);
            sup(&pip_residual(&u, Some(&rho), &energy))
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 4.0, "{errs:?}");
    }
}

#[test]
fn gradient_velocity_is_first_row_of_adjoint() {
    let u = trillium(128);
    let rho = smooth_density(128);
    let energy = phase_sep_energy();
    let var = energy.variations(&u, Some(&rho));
    let d_rho = var.d_rho.as_deref().unwrap();
    let v = gradient_normal_velocity(&u, Some(&rho), &var.d_kappa, &var.d_g, Some(d_rho));
    let (first, _) = apply_m_adjoint(&u, &var.d_kappa, &var.d_g);
    let expect: Vec<f64> = (0..128).map(|j| -first[j] + u.kappa()[j] * rho[j] * d_rho[j]).collect();
    assert!(sup_diff(&v, &expect) < 1e-12 * (1.0 + sup(&v)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn adjoint_identity_holds(cv in smooth_coeffs(), cw in smooth_coeffs(), ca in smooth_coeffs(), cb in smooth_coeffs()) {
        let n = 128;
        let u = trillium(n);
        let vel = ExtrinsicVelocity { v: trig_field(n, &cv), w: trig_field(n, &cw) };
        let (a, b) = (trig_field(n, &ca), trig_field(n, &cb));
        let m = apply_m(&u, &vel);
        let lhs = u.inner(&m.dkappa_dt, &a) + u.inner(&m.dg_dt, &b);
        let (p, q) = apply_m_adjoint(&u, &a, &b);
        let rhs = u.inner(&vel.v, &p) + u.inner(&vel.w, &q);
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn adjoint_kernel_annihilates_every_velocity(cv in smooth_coeffs(), cw in smooth_coeffs()) {
        let n = 256;
        let u = trillium(n);
        let vel = ExtrinsicVelocity { v: trig_field(n, &cv), w: trig_field(n, &cw) };
        let m = apply_m(&u, &vel);
        let scale = u.l2_norm(&m.dkappa_dt) + u.l2_norm(&m.dg_dt);
        for (a, b) in rigid_kernel_adjoint(&u).iter() {
            let pairing = u.inner(&m.dkappa_dt, a) + u.inner(&m.dg_dt, b);
            prop_assert!(pairing.abs() < 1e-6 * scale, "{}", pairing);
        }
    }
}
