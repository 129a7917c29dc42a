use super::*;
use crate::imcf_hawking::{energy_limit, flow_trace};
use crate::initial_data::hairy::{build_areal, ArealSpec};
use crate::initial_data::synthetic::{flat_annulus, ConstantK};
use crate::initial_data::{build_family, penrose_bound, BlackHoleFamily, FamilyOptions};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn schw(n: usize, m: f64) -> InitialDataSet {
    build_family(BlackHoleFamily::Schwarzschild { n, m }).unwrap()
}

#[test]
fn harmonic_function_on_a_flat_annulus() {
    let d = flat_annulus(1, 1.0, 400.0, 801, ConstantK::default()).unwrap();
    let flow = ConformalFlow::new(&d, &tol()).unwrap();
    let st = flow.unit_state(0.0, 0.0).unwrap();
    let v = flow.harmonic_radial(&st);
    for s in [0.0, 0.3, 1.0, 7.25, 60.0, 399.9] {
        let rho: f64 = 1.0 + s;
        let exact = -(1.0 - 1.0 / (rho * rho));
        let got = v.eval(s);
        assert!((got.v - exact).abs() < 1e-12, "s = {s}: {} vs {exact}", got.v);
        assert!((got.d1 + 2.0 / rho.powi(3)).abs() < 1e-12);
    }
    assert_eq!(v.value(0.0), 0.0);
}

#[test]
fn harmonic_function_vanishes_inside_and_tends_to_minus_e_to_minus_t() {
    let d = flat_annulus(1, 1.0, 400.0, 801, ConstantK::default()).unwrap();
    let flow = ConformalFlow::new(&d, &tol()).unwrap();
    let st = flow.unit_state(0.7, 2.0).unwrap();
    let v = flow.harmonic_radial(&st);
    assert_eq!(v.value(1.0), 0.0);
    assert!(v.value(2.0).abs() < 1e-15);
    // v(S) = −e^{−t}(1 − (ρ_t/ρ_S)²) in flat space.
    let expected = -(-0.7f64).exp() * (1.0 - (3.0f64 / 401.0).powi(2));
    assert!((v.value(400.0) - expected).abs() < 1e-12);
}

#[test]
fn zero_step_is_the_identity_and_large_steps_are_refused() {
    let d = schw(1, 1.0);
    let flow = ConformalFlow::new(&d, &tol()).unwrap();
    let st = flow.initial_state(1e-9).unwrap();
    assert_eq!(flow.step(&st, 0.0).unwrap(), st);
    assert!(matches!(flow.step(&st, 0.05), Err(Error::Domain(_))));
}

#[test]
fn unhalved_step_is_rejected_on_mismatch() {
    let d = schw(1, 1.0);
    let mut strict = tol();
    strict.conformal_step = 1e-9;
    let flow = ConformalFlow::new(&d, &strict).unwrap();
    let st = flow.initial_state(1e-9).unwrap();
    let err = flow.step(&st, 1e-2).unwrap_err();
    assert!(err.to_string().contains("mismatch"), "{err}");
}

#[test]
fn schwarzschild_run_keeps_area_and_mass() {
    let d = schw(1, 1.0);
    let run = run_conformal(&d, &ConformalOptions::default(), &tol()).unwrap();
    assert_eq!(run.states.len(), 101);
    assert!((run.last().t - 1.0).abs() < 1e-12);
    assert!(run.area_drift() < 1e-4, "{:e}", run.area_drift());
    assert!(run.max_mass_increase() < 1e-6, "{:e}", run.max_mass_increase());
    assert!(run.states.windows(2).all(|w| w[1].s_t > w[0].s_t));
    assert!((run.last().alpha - (-1.0f64).exp()).abs() < 1e-14);
    for st in &run.states {
        assert!(
            (st.mass_estimate - 1.0).abs() < 1e-5,
            "t = {}: {}",
            st.t,
            st.mass_estimate
        );
    }
}

#[test]
fn schwarzschild_horizon_follows_the_isotropic_solution() {
    // In isotropic form the flow keeps Schwarzschild with horizon at
    // r_t^{d−2} = r_0^{d−2} e^{2t}, r_0^{d−2} = m/2; its base areal radius is
    // r(1 + m/(2r^{d−2}))^{2/(d−2)}.
    for (n, m) in [(1usize, 1.0f64), (2, 0.5)] {
        let d = schw(n, m);
        let dim = (2 * n + 2) as f64;
        let opts = ConformalOptions {
            t_stop: 0.5,
            ..ConformalOptions::default()
        };
        let run = run_conformal(&d, &opts, &tol()).unwrap();
        let flow = ConformalFlow::new(&d, &tol()).unwrap();
        for st in run.states.iter().step_by(10) {
            let r0 = (0.5 * m).powf(1.0 / (dim - 2.0));
            let r = r0 * (2.0 * st.t / (dim - 2.0)).exp();
            let areal = r * (1.0 + m / (2.0 * r.powf(dim - 2.0))).powf(2.0 / (dim - 2.0));
            let got = flow.base().radius.value(st.s_t);
            assert!(
                (got - areal).abs() < 1e-5 * areal,
                "n = {n}, t = {}: {got} vs {areal}",
                st.t
            );
        }
    }
}

#[test]
fn harmonicity_residual_is_small() {
    let d = schw(1, 1.0);
    let flow = ConformalFlow::new(&d, &tol()).unwrap();
    let mut st = flow.initial_state(1e-9).unwrap();
    for _ in 0..5 {
        st = flow.advance(&st, 1e-2, 8).unwrap();
        let r = flow.harmonicity_residual(&st);
        assert!(r < 1e-6, "{r:e}");
    }
}

#[test]
fn fitted_mass_matches_the_hawking_mass_limit_of_the_flowed_metric() {
    let d = schw(1, 1.0);
    let flow = ConformalFlow::new(&d, &tol()).unwrap();
    let mut st = flow.initial_state(1e-9).unwrap();
    for _ in 0..20 {
        st = flow.advance(&st, 1e-2, 8).unwrap();
    }
    let g_t = flow.conformal_data(&st).unwrap();
    let tr = flow_trace(&g_t).unwrap();
    let m = energy_limit(&tr, 1e-3).unwrap();
    assert!((m - st.mass_estimate).abs() < 1e-6, "{m} vs {}", st.mass_estimate);
    let bound = penrose_bound(4, st.area, false);
    assert!((tr.horizon().hawking_mass - bound).abs() < 1e-9 * bound);
    assert!((g_t.horizon_area() - st.area).abs() < 1e-12 * st.area);
}

#[test]
fn inputs_are_checked() {
    let annulus = flat_annulus(1, 1.0, 100.0, 201, ConstantK::default()).unwrap();
    let flow = ConformalFlow::new(&annulus, &tol()).unwrap();
    assert!(matches!(flow.initial_state(1e-9), Err(Error::Precondition(_))));
    let ads = build_family(BlackHoleFamily::SchwarzschildAdS { n: 1, m: 1.0 }).unwrap();
    assert!(matches!(ConformalFlow::new(&ads, &tol()), Err(Error::Flow(_))));
    let mp = build_family(BlackHoleFamily::MyersPerry { n: 1, m: 1.0, a: 0.5 }).unwrap();
    assert!(matches!(ConformalFlow::new(&mp, &tol()), Err(Error::Precondition(_))));
}

#[test]
fn zero_length_run_is_the_initial_state() {
    let d = schw(1, 1.0);
    let opts = ConformalOptions {
        t_stop: 0.0,
        ..ConformalOptions::default()
    };
    let run = run_conformal(&d, &opts, &tol()).unwrap();
    assert_eq!(run.states.len(), 1);
    assert_eq!(run.states[0].s_t, 0.0);
}

#[test]
fn defect_threshold_locates_the_nonnegative_region() {
    assert_eq!(defect_threshold(&schw(1, 1.0), 0.0).unwrap(), 0.0);
    let spin9 = build_areal(
        ArealSpec::spin9_collapse(),
        &FamilyOptions {
            quad_rel: 1e-11,
            ..FamilyOptions::default()
        },
    )
    .unwrap();
    let s0 = defect_threshold(&spin9, 0.0).unwrap();
    assert!(s0 > 0.0);
    for &s in spin9.grid.iter().filter(|&&s| s >= s0) {
        assert!(monotonicity_defect(&spin9, s).unwrap() >= 0.0);
    }
    let i = spin9.grid.partition_point(|&x| x < s0);
    assert!(monotonicity_defect(&spin9, spin9.grid[i - 1]).unwrap() < 0.0);
}

#[test]
fn run_reports_the_first_crossing_of_a_target() {
    let d = schw(1, 1.0);
    let opts = ConformalOptions {
        t_stop: 1.0,
        target: Some(0.5),
        stop_at_target: true,
        ..ConformalOptions::default()
    };
    let run = run_conformal(&d, &opts, &tol()).unwrap();
    let t = run.reached.unwrap();
    assert_eq!(run.last().t, t);
    assert!(run.last().s_t >= 0.5);
    assert!(run.states[run.states.len() - 2].s_t < 0.5);
}

#[test]
fn run_table_layout() {
    let d = schw(1, 1.0);
    let opts = ConformalOptions {
        t_stop: 0.05,
        ..ConformalOptions::default()
    };
    let run = run_conformal(&d, &opts, &tol()).unwrap();
    let mut buf = Vec::new();
    run.write_table(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[2], "# t s_t area mass");
    assert_eq!(lines.len(), 3 + run.states.len());
    assert_eq!(lines[3].split_whitespace().count(), 4);
}
