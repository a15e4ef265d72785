//! Linear response coefficients from steady-state coherences.
//!
//! P(w_E) = 2N d34 ρ̃43 and M(w_E) = 2N μ12 ρ̃21 are fitted as straight
//! lines in the electric expansion parameter at fixed magnetic amplitude; the
//! slopes give χ_EE and ξ_HE, the intercepts ξ_EH and χ_HH.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atomsys::{MediumConstants, Model, Polarization, SystemConfig};
use crate::error::{Error, Result};
use crate::steady::{solve_steady, SolverSettings};

/// Fits with R² below this are flagged as outside the linear regime.
pub const LINEAR_REGIME_R2: f64 = 0.999;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub slope: C64,
    pub intercept: C64,
    /// Minimum of the real-part and imaginary-part coefficients of
    /// determination.
    pub r_squared: f64,
    /// Euclidean norm of the complex residuals.
    pub residual_norm: f64,
}

impl RegressionFit {
    pub fn zero() -> Self {
        Self {
            slope: C64::new(0.0, 0.0),
            intercept: C64::new(0.0, 0.0),
            r_squared: 1.0,
            residual_norm: 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.slope * x + self.intercept
    }
}

struct RealFit {
    slope: f64,
    intercept: f64,
    ss_res: f64,
    r_squared: f64,
}

fn fit_real(xs: &[f64], ys: &[f64], x_mean: f64, sxx: f64) -> RealFit {
    let n = ys.len() as f64;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        // Constant data is reproduced exactly by the horizontal line.
        1.0
    };
    RealFit {
        slope,
        intercept,
        ss_res,
        r_squared,
    }
}

/// Least-squares line y = m·x + b through complex data at real abscissae.
pub fn regress_linear(points: &[(f64, C64)]) -> Result<RegressionFit> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "linear regression needs at least 3 points, got {}",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    if xs.iter().any(|x| !x.is_finite()) || points.iter().any(|p| !p.1.re.is_finite() || !p.1.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite regression data".into()));
    }
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidInput(
            "linear regression needs distinct abscissae".into(),
        ));
    }
    let re: Vec<f64> = points.iter().map(|p| p.1.re).collect();
    let im: Vec<f64> = points.iter().map(|p| p.1.im).collect();
    let fr = fit_real(&xs, &re, x_mean, sxx);
    let fi = fit_real(&xs, &im, x_mean, sxx);
    Ok(RegressionFit {
        slope: C64::new(fr.slope, fi.slope),
        intercept: C64::new(fr.intercept, fi.intercept),
        r_squared: fr.r_squared.min(fi.r_squared),
        residual_norm: (fr.ss_res + fi.ss_res).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ResponseDiagnostics {
    pub r2_e: f64,
    pub r2_m: f64,
    pub phase_samples: usize,
    /// Either fit fell below [`LINEAR_REGIME_R2`].
    pub nonlinear_regime: bool,
    /// max_k |ε_k − ⟨ε⟩| / |⟨ε⟩| over the phase samples.
    pub eps_phase_spread: f64,
    pub mu_phase_spread: f64,
    /// Largest single-phase |ξ_EH| and |ξ_HE|.
    pub max_single_phase_xi_eh: f64,
    pub max_single_phase_xi_he: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponseCoefficients {
    pub chi_ee: C64,
    pub chi_hh: C64,
    pub xi_eh: C64,
    pub xi_he: C64,
    pub eps: C64,
    pub mu: C64,
    pub diagnostics: ResponseDiagnostics,
}

impl ResponseCoefficients {
    /// ε = 1 + 4πχ_EE, μ = 1 + 4πχ_HH.
    pub fn from_susceptibilities(chi_ee: C64, chi_hh: C64, xi_eh: C64, xi_he: C64) -> Self {
        Self {
            chi_ee,
            chi_hh,
            xi_eh,
            xi_he,
            eps: 1.0 + 4.0 * PI * chi_ee,
            mu: 1.0 + 4.0 * PI * chi_hh,
            diagnostics: ResponseDiagnostics::default(),
        }
    }

    /// Coefficients built from ε, μ and the chiralities.
    pub fn from_eps_mu(eps: C64, mu: C64, xi_eh: C64, xi_he: C64) -> Self {
        Self {
            chi_ee: (eps - 1.0) / (4.0 * PI),
            chi_hh: (mu - 1.0) / (4.0 * PI),
            xi_eh,
            xi_he,
            eps,
            mu,
            diagnostics: ResponseDiagnostics::default(),
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.eps, self.mu, self.xi_eh, self.xi_he]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// One steady state on the probe-amplitude grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSample {
    pub w_e: f64,
    pub rho21: C64,
    pub rho43: C64,
}

fn solve_sample(cfg: &SystemConfig, settings: &SolverSettings, w_e: f64, phase: f64) -> Result<CoherenceSample> {
    let model = Model::new(cfg, w_e)?;
    let res = solve_steady(&model, settings)?;
    if !res.converged {
        return Err(Error::GridPoint {
            w_e,
            phase,
            residual: res.residual,
        });
    }
    Ok(CoherenceSample {
        w_e,
        rho21: res.rho.rho21(),
        rho43: res.rho.rho43(),
    })
}

/// Steady-state coherences over the electric probe grid at loop phase `phase`.
pub fn extract_coherences(
    cfg: &SystemConfig,
    settings: &SolverSettings,
    phase: f64,
) -> Result<Vec<CoherenceSample>> {
    cfg.probe.validate()?;
    let cfg = cfg.clone().with_phase(phase);
    cfg.probe
        .w_e
        .par_iter()
        .map(|&w| solve_sample(&cfg, settings, w, phase))
        .collect()
}

/// Inverts the fitted lines into response coefficients.
pub fn response_from_fits(
    fit_p: &RegressionFit,
    fit_m: &RegressionFit,
    medium: &MediumConstants,
    w_b: f64,
    polarization: Polarization,
) -> Result<ResponseCoefficients> {
    if !(w_b > 0.0) {
        return Err(Error::InvalidInput(format!(
            "magnetic expansion parameter must be positive, got {w_b}"
        )));
    }
    let hg = medium.hbar_gamma;
    // H_b = phase·ħγ·w_B/μ21, phase = ±i for σ∓.
    let h_unit = polarization.magnetic_phase() * (hg * w_b);
    let chi_ee = medium.d43 * fit_p.slope / hg;
    let xi_eh = 4.0 * PI * medium.mu21 * fit_p.intercept / h_unit;
    let chi_hh = medium.mu21 * fit_m.intercept / h_unit;
    let xi_he = 4.0 * PI * medium.d43 * fit_m.slope / hg;
    let mut rc = ResponseCoefficients::from_susceptibilities(chi_ee, chi_hh, xi_eh, xi_he);
    rc.diagnostics = ResponseDiagnostics {
        r2_e: fit_p.r_squared,
        r2_m: fit_m.r_squared,
        phase_samples: 1,
        nonlinear_regime: fit_p.r_squared < LINEAR_REGIME_R2 || fit_m.r_squared < LINEAR_REGIME_R2,
        eps_phase_spread: 0.0,
        mu_phase_spread: 0.0,
        max_single_phase_xi_eh: xi_eh.norm(),
        max_single_phase_xi_he: xi_he.norm(),
    };
    Ok(rc)
}

/// Polarization and magnetization samples P(w_E), M(w_E) in Gaussian units.
pub fn polarization_samples(
    samples: &[CoherenceSample],
    medium: &MediumConstants,
) -> (Vec<(f64, C64)>, Vec<(f64, C64)>) {
    let n2 = 2.0 * medium.density;
    samples
        .iter()
        .map(|s| {
            (
                (s.w_e, n2 * medium.d43 * s.rho43),
                (s.w_e, n2 * medium.mu21 * s.rho21),
            )
        })
        .unzip()
}

fn response_from_samples(cfg: &SystemConfig, samples: &[CoherenceSample]) -> Result<ResponseCoefficients> {
    let medium = cfg.medium_constants()?;
    let (p, m) = polarization_samples(samples, &medium);
    if medium.density == 0.0 {
        // No medium: P and M vanish identically.
        return response_from_fits(
            &RegressionFit::zero(),
            &RegressionFit::zero(),
            &medium,
            cfg.probe.w_b,
            cfg.drives.polarization,
        );
    }
    let fit_p = regress_linear(&p)?;
    let fit_m = regress_linear(&m)?;
    response_from_fits(&fit_p, &fit_m, &medium, cfg.probe.w_b, cfg.drives.polarization)
}

/// Response coefficients at one fixed loop phase.
pub fn response_at_phase(
    cfg: &SystemConfig,
    settings: &SolverSettings,
    phase: f64,
) -> Result<ResponseCoefficients> {
    let samples = extract_coherences(cfg, settings, phase)?;
    response_from_samples(cfg, &samples)
}

/// Arithmetic mean over φ_k = 2πk/K, k = 0..K.
pub fn phase_averaged_response(
    cfg: &SystemConfig,
    settings: &SolverSettings,
    phases: usize,
) -> Result<ResponseCoefficients> {
    phase_averaged_response_with_offset(cfg, settings, phases, 0.0)
}

/// As [`phase_averaged_response`] on the shifted grid φ_k = offset + 2πk/K.
pub fn phase_averaged_response_with_offset(
    cfg: &SystemConfig,
    settings: &SolverSettings,
    phases: usize,
    offset: f64,
) -> Result<ResponseCoefficients> {
    if phases == 0 {
        return Err(Error::InvalidInput("phase-sample count must be at least 1".into()));
    }
    cfg.probe.validate()?;
    let per_phase = phase_resolved_responses(cfg, settings, phases, offset)?;
    Ok(average_responses(&per_phase))
}

/// Responses at every phase of the grid φ_k = offset + 2πk/K.
pub fn phase_resolved_responses(
    cfg: &SystemConfig,
    settings: &SolverSettings,
    phases: usize,
    offset: f64,
) -> Result<Vec<ResponseCoefficients>> {
    let grid: Vec<f64> = (0..phases).map(|k| offset + TAU * k as f64 / phases as f64).collect();
    let nw = cfg.probe.w_e.len();
    let jobs: Vec<(usize, usize)> = (0..phases).flat_map(|k| (0..nw).map(move |i| (k, i))).collect();
    let samples: Vec<CoherenceSample> = jobs
        .par_iter()
        .map(|&(k, i)| {
            let phase = grid[k];
            let c = cfg.clone().with_phase(phase);
            solve_sample(&c, settings, cfg.probe.w_e[i], phase)
        })
        .collect::<Result<_>>()?;
    samples
        .chunks(nw)
        .map(|chunk| response_from_samples(cfg, chunk))
        .collect()
}

/// Averages χ and ξ over phase samples, then shifts by one for ε and μ.
pub fn average_responses(per_phase: &[ResponseCoefficients]) -> ResponseCoefficients {
    let k = per_phase.len() as f64;
    let mean = |f: fn(&ResponseCoefficients) -> C64| per_phase.iter().map(f).sum::<C64>() / k;
    let mut rc = ResponseCoefficients::from_susceptibilities(
        mean(|r| r.chi_ee),
        mean(|r| r.chi_hh),
        mean(|r| r.xi_eh),
        mean(|r| r.xi_he),
    );
    let spread = |f: fn(&ResponseCoefficients) -> C64, avg: C64| {
        per_phase
            .iter()
            .map(|r| (f(r) - avg).norm() / avg.norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };
    let min_of = |f: fn(&ResponseCoefficients) -> f64| per_phase.iter().map(f).fold(f64::INFINITY, f64::min);
    let max_of = |f: fn(&ResponseCoefficients) -> f64| per_phase.iter().map(f).fold(0.0, f64::max);
    let r2_e = min_of(|r| r.diagnostics.r2_e);
    let r2_m = min_of(|r| r.diagnostics.r2_m);
    rc.diagnostics = ResponseDiagnostics {
        r2_e,
        r2_m,
        phase_samples: per_phase.len(),
        nonlinear_regime: per_phase.iter().any(|r| r.diagnostics.nonlinear_regime),
        eps_phase_spread: spread(|r| r.eps, rc.eps),
        mu_phase_spread: spread(|r| r.mu, rc.mu),
        max_single_phase_xi_eh: max_of(|r| r.xi_eh.norm()),
        max_single_phase_xi_he: max_of(|r| r.xi_he.norm()),
    };
    rc
}
