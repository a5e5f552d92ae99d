use papsim_core::dynamics::branching_from_fc;
use papsim_core::ensemble::{thermal_average, ThermalQuadrature};
use papsim_core::franckcondon::bound_bound_fc;
use papsim_core::potentials::{parse_potential, synthetic_x_curve, Harmonic, HardSphere, LoadedPotential};
use papsim_core::scattering::{continuum_wave, scattering_length, ContinuumOptions};
use papsim_core::spectrum::{bound_levels, SolverOptions};
use papsim_core::units::{microkelvin, REDUCED_MASS_RB85};
use papsim_core::Potential;
use proptest::prelude::*;

#[test]
fn displaced_oscillator_overlap() {
    // <0|0'> = exp(-m w d^2 / 4) for equal frequencies
    let m = REDUCED_MASS_RB85;
    let w = 1e-3;
    let o = SolverOptions::default();
    let g = &bound_levels(&Harmonic { omega: w, r0: 10.0, mass: m }, 0, (0.0, 1e-3), &o).unwrap()[0];
    for d in [0.02, 0.05, 0.1] {
        let e = &bound_levels(&Harmonic { omega: w, r0: 10.0 + d, mass: m }, 0, (0.0, 1e-3), &o).unwrap()[0];
        let want = (-m * w * d * d / 4.0).exp();
        let got = bound_bound_fc(g, e).unwrap().value.abs();
        assert!((got - want).abs() < 1e-6, "d = {d}: {got} vs {want}");
    }
}

#[test]
fn hard_sphere_phase_is_minus_kr() {
    let p = HardSphere { radius: 50.0 };
    let o = ContinuumOptions::default();
    for t in [1.0, 10.0, 100.0] {
        let s = continuum_wave(&p, microkelvin(t), 0, &o).unwrap();
        let want = -s.k * 50.0;
        assert!((s.phase_shift - want).abs() < 1e-6 * want.abs().max(1e-3), "{t} uK: {} vs {want}", s.phase_shift);
    }
}

#[test]
fn file_potential_matches_table() {
    let p = synthetic_x_curve(42.0).unwrap();
    let (r, v) = p.table();
    let mut text = format!("# ground curve\nc6 = {:e}\nr_interp = 42\nblend_halfwidth = {}\n", p.c6, p.blend_halfwidth);
    for (r, v) in r.iter().zip(v) {
        text.push_str(&format!("{r:.17e} {v:.17e}\n"));
    }
    let LoadedPotential::Single(q) = parse_potential(&text).unwrap() else { panic!("expected one channel") };
    for x in [5.0, 8.0, 20.0, 41.5, 42.0, 43.0, 100.0, 1e4] {
        assert!((q.value(x) - p.value(x)).abs() <= 1e-14 * p.value(x).abs().max(1e-12), "r = {x}");
    }
    let (a, b) = (scattering_length(&p).unwrap().value, scattering_length(&q).unwrap().value);
    assert!((a - b).abs() < 1e-9 * a.abs(), "{a} vs {b}");
}

#[test]
fn malformed_files_report_lines() {
    let e = parse_potential("c6 = 4426\n10 -0.01\n11 x\n").unwrap_err();
    assert!(e.to_string().contains("line 3"), "{e}");
    let e = parse_potential("c6 = 4426\n10 -0.01\n9 -0.02\n").unwrap_err();
    assert!(e.to_string().contains("line 3"), "{e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn branching_sums_to_one(fc in prop::collection::vec(-1.0f64..1.0, 1..40), scale in 0.1f64..10.0) {
        prop_assume!(fc.iter().any(|f| f.abs() > 1e-3));
        let rows: Vec<(String, f64)> = fc.iter().enumerate().map(|(i, f)| (format!("v={i}"), *f)).collect();
        let b = branching_from_fc(&rows).unwrap();
        let total: f64 = b.fractions.iter().map(|f| f.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let scaled: Vec<(String, f64)> = rows.iter().map(|(l, f)| (l.clone(), -scale * f)).collect();
        let c = branching_from_fc(&scaled).unwrap();
        for (x, y) in b.fractions.iter().zip(&c.fractions) {
            prop_assert!((x.1 - y.1).abs() < 1e-12);
        }
    }

    #[test]
    fn thermal_average_is_linear(a in 0.0f64..5.0, b in 0.0f64..5.0, t in 1.0f64..1000.0) {
        let kt = microkelvin(t);
        // non-negative integrands, as for probabilities; tight tolerance so both sides are converged
        let q = ThermalQuadrature { rel_tol: 1e-11, ..Default::default() };
        let f = |e: f64| (-e / kt).exp();
        let lhs = thermal_average(|e| Ok(a * f(e) + b), kt, &q).unwrap().value;
        let rhs = a * thermal_average(|e| Ok(f(e)), kt, &q).unwrap().value + b;
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + a.abs() + b.abs()));
        // <exp(-E/kT)> = 2^(-3/2)
        let m = thermal_average(|e| Ok(f(e)), kt, &q).unwrap().value;
        prop_assert!((m - 2f64.powf(-1.5)).abs() < 1e-9);
    }
}
