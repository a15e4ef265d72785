use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use nirgas::atomsys::*;
use nirgas::response::*;
use nirgas::steady::{solve_steady, SolverSettings};
use nirgas::Error;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: C64, b: C64, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm().max(a.norm()).max(f64::MIN_POSITIVE)
}

#[test]
fn no_drives_no_probe_no_coherence() {
    let mut cfg = SystemConfig::default();
    cfg.drives.omega31 = C64::new(0.0, 0.0);
    cfg.drives.omega42 = C64::new(0.0, 0.0);
    cfg.drives.effective_gap = -cfg.levels.gap;
    cfg.probe.w_b = 0.0;
    let model = Model::new(&cfg, 0.0).unwrap();
    let res = solve_steady(&model, &SolverSettings::default()).unwrap();
    for j in 0..5 {
        for k in 0..5 {
            if j != k {
                assert_eq!(res.rho.get(j + 1, k + 1).norm(), 0.0);
            }
        }
    }
}

#[test]
fn noisy_regression_recovers_slope() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let m = C64::new(2.0, 1.0);
    let b = C64::new(0.5, -0.25);
    let pts: Vec<(f64, C64)> = (0..20)
        .map(|i| {
            let x = 0.05 * (i + 1) as f64;
            let noise = C64::new(rng.gen_range(-1e-6..1e-6), rng.gen_range(-1e-6..1e-6));
            (x, m * x + b + noise)
        })
        .collect();
    let fit = regress_linear(&pts).unwrap();
    assert!((fit.slope - m).norm() < 1e-4);
    assert!(fit.r_squared > 0.999999);
    for &(x, y) in &pts {
        assert!((fit.eval(x) - y).norm() <= fit.residual_norm);
    }
}

#[test]
fn regression_rejects_bad_input() {
    let one = C64::new(1.0, 0.0);
    assert!(regress_linear(&[(0.0, one), (1.0, one)]).is_err());
    assert!(regress_linear(&[(1.0, one), (1.0, one), (1.0, one)]).is_err());
}

/// Forward synthesis P = χ_EE·E + ξ_EH·H/4π, M = χ_HH·H + ξ_HE·E/4π with
/// E = w_E·ħγ/d43 and H = phase·w_B·ħγ/μ21, then fit and invert.
#[test]
fn response_round_trip() {
    let medium = SystemConfig::default().medium_constants().unwrap();
    let presets = [
        (C64::new(-0.08, 0.003), C64::new(0.02, -0.3), C64::new(1e-3, 2e-4), C64::new(-4e-3, 1e-3)),
        (C64::new(1e-3, -2e-5), C64::new(-0.16, 0.01), C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
    ];
    let w_b = 1e-4;
    for pol in [Polarization::SigmaMinus, Polarization::SigmaPlus] {
        for &(chi_ee, chi_hh, xi_eh, xi_he) in &presets {
            let hg = medium.hbar_gamma;
            let h = pol.magnetic_phase() * w_b * hg / medium.mu21;
            let grid: Vec<f64> = (1..=20).map(|i| 1e-4 * i as f64).collect();
            let p: Vec<(f64, C64)> = grid
                .iter()
                .map(|&w| {
                    let e = w * hg / medium.d43;
                    (w, chi_ee * e + xi_eh * h / (4.0 * PI))
                })
                .collect();
            let m: Vec<(f64, C64)> = grid
                .iter()
                .map(|&w| {
                    let e = w * hg / medium.d43;
                    (w, chi_hh * h + xi_he * e / (4.0 * PI))
                })
                .collect();
            let rc = response_from_fits(&regress_linear(&p).unwrap(), &regress_linear(&m).unwrap(), &medium, w_b, pol)
                .unwrap();
            let tol = 1e-10;
            for (got, want) in [(rc.chi_ee, chi_ee), (rc.chi_hh, chi_hh), (rc.xi_eh, xi_eh), (rc.xi_he, xi_he)] {
                let scale = want.norm().max(chi_ee.norm());
                assert!((got - want).norm() <= tol * scale, "{got} vs {want}");
            }
            assert_eq!(rc.eps, 1.0 + 4.0 * PI * rc.chi_ee);
            assert_eq!(rc.mu, 1.0 + 4.0 * PI * rc.chi_hh);
        }
    }
}

/// Exponents of (g, cm, s) doubled so that esu has integer entries.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Dim([i32; 3]);

impl std::ops::Mul for Dim {
    type Output = Dim;
    fn mul(self, o: Dim) -> Dim {
        Dim([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl std::ops::Div for Dim {
    type Output = Dim;
    fn div(self, o: Dim) -> Dim {
        Dim([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

#[test]
fn susceptibility_is_dimensionless() {
    let cm = Dim([0, 2, 0]);
    let esu = Dim([1, 3, -2]);
    let erg = Dim([2, 4, -4]);
    let dipole = esu * cm;
    let field = esu / (cm * cm);
    let chi = dipole * field / erg;
    assert_eq!(chi, Dim([0, 0, 0]));
    // P = 2N·d·ρ has the units of a field.
    let polarization = Dim([0, -6, 0]) * dipole;
    assert_eq!(polarization, field);
}

#[test]
fn doubling_the_grid_doubles_the_linear_part() {
    let cfg = SystemConfig::default();
    let s = SolverSettings::default();
    let slope = |c: &SystemConfig| {
        let samples = extract_coherences(c, &s, 0.0).unwrap();
        let pts: Vec<(f64, C64)> = samples.iter().map(|x| (x.w_e, x.rho43)).collect();
        regress_linear(&pts).unwrap().slope
    };
    let base = slope(&cfg);
    let mut doubled = cfg.clone();
    doubled.probe.w_e = cfg.probe.w_e.iter().map(|w| 2.0 * w).collect();
    let samples = extract_coherences(&cfg, &s, 0.0).unwrap();
    let samples2 = extract_coherences(&doubled, &s, 0.0).unwrap();
    let b = regress_linear(&samples.iter().map(|x| (x.w_e, x.rho43)).collect::<Vec<_>>()).unwrap().intercept;
    for (a, c) in samples.iter().zip(&samples2) {
        assert!(close(c.rho43 - b, 2.0 * (a.rho43 - b), 1e-3));
    }
    assert!(close(slope(&doubled), base, 1e-3));
}

#[test]
fn fitted_lines_reproduce_samples() {
    let cfg = SystemConfig::default().with_pump(1.799e-2).with_phase(1.1);
    let medium = cfg.medium_constants().unwrap();
    let samples = extract_coherences(&cfg, &SolverSettings::default(), 1.1).unwrap();
    let (p, m) = polarization_samples(&samples, &medium);
    for pts in [p, m] {
        let fit = regress_linear(&pts).unwrap();
        assert!(fit.r_squared >= LINEAR_REGIME_R2);
        for &(x, y) in &pts {
            assert!((fit.eval(x) - y).norm() <= fit.residual_norm * (1.0 + 1e-12));
        }
    }
}

#[test]
fn response_is_linear_in_density_when_dilute() {
    let s = SolverSettings::default();
    let at = |n: f64| response_at_phase(&SystemConfig::default().with_density(n).with_pump(1e-2), &s, 0.7).unwrap();
    let full = at(1e12);
    let half = at(5e11);
    for (a, b) in [
        (full.chi_ee, half.chi_ee),
        (full.chi_hh, half.chi_hh),
        (full.xi_eh, half.xi_eh),
        (full.xi_he, half.xi_he),
    ] {
        assert_relative_eq!(a.norm() / b.norm(), 2.0, epsilon = 1e-3);
    }
}

#[test]
fn zero_density_gives_vacuum() {
    let rc = phase_averaged_response(&SystemConfig::default().with_density(0.0), &SolverSettings::default(), 4).unwrap();
    assert_eq!(rc.eps, C64::new(1.0, 0.0));
    assert_eq!(rc.mu, C64::new(1.0, 0.0));
    assert_eq!(rc.xi_eh.norm() + rc.xi_he.norm(), 0.0);
}

#[test]
fn single_phase_average_is_plain_extraction() {
    let cfg = SystemConfig::default().with_detuning(5.0);
    let s = SolverSettings::default();
    let avg = phase_averaged_response(&cfg, &s, 1).unwrap();
    let one = response_at_phase(&cfg, &s, 0.0).unwrap();
    assert!(close(avg.eps, one.eps, 1e-14));
    assert!(close(avg.mu, one.mu, 1e-14));
    assert!(close(avg.xi_eh, one.xi_eh, 1e-14));
    assert!(close(avg.xi_he, one.xi_he, 1e-14));
}

#[test]
fn phase_average_properties() {
    let s = SolverSettings::default();
    for &(d, r) in &[(0.0, 0.0), (0.0, 1.799e-2), (-30.0, 1e-2)] {
        let cfg = SystemConfig::default().with_detuning(d).with_pump(r);
        let per_phase = phase_resolved_responses(&cfg, &s, 16, 0.0).unwrap();
        let avg = average_responses(&per_phase);
        let max_eh = per_phase.iter().map(|x| x.xi_eh.norm()).fold(0.0, f64::max);
        let max_he = per_phase.iter().map(|x| x.xi_he.norm()).fold(0.0, f64::max);
        assert!(avg.xi_eh.norm() <= 1e-2 * max_eh, "δ={d} r={r}");
        assert!(avg.xi_he.norm() <= 1e-2 * max_he, "δ={d} r={r}");
        assert_eq!(avg.diagnostics.phase_samples, 16);
        assert_eq!(avg.diagnostics.max_single_phase_xi_eh, max_eh);

        let k8 = phase_averaged_response(&cfg, &s, 8).unwrap();
        assert!(close(k8.eps, avg.eps, 1e-2));

        let shifted = phase_averaged_response_with_offset(&cfg, &s, 16, 3.0 * TAU / 16.0).unwrap();
        assert!(close(shifted.eps, avg.eps, 1e-12));
        assert!(close(shifted.mu, avg.mu, 1e-12));
        let again = average_responses(&vec![avg.clone(); 16]);
        assert!(close(again.eps, avg.eps, 1e-15));
        assert!(close(again.xi_eh, avg.xi_eh, 1e-14));
    }
}

#[test]
fn unconverged_grid_point_names_amplitude() {
    let cfg = SystemConfig::default();
    let mut s = SolverSettings::default();
    s.max_iterations = 1;
    match extract_coherences(&cfg, &s, 0.4).unwrap_err() {
        Error::GridPoint { w_e, phase, .. } => {
            assert!(cfg.probe.w_e.contains(&w_e));
            assert_eq!(phase, 0.4);
        }
        other => panic!("unexpected {other:?}"),
    }
    match phase_averaged_response(&cfg, &s, 4).unwrap_err() {
        Error::GridPoint { phase, .. } => {
            assert!((0..4).any(|k| phase == TAU * k as f64 / 4.0));
        }
        other => panic!("unexpected {other:?}"),
    }
}
