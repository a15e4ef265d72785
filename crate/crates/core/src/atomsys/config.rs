//! Physical description of the five-level medium.
//!
//! Levels are labelled 1..=5 in configuration files and 0..=4 in arrays.
//! Every rate and detuning is dimensionless, in units of the reference decay
//! rate γ (angular).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{self, ALPHA, HBAR};

pub const LEVELS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionClass {
    E1,
    M1,
    E2,
    None,
}

impl TransitionClass {
    /// Spontaneous decay rate (units γ) assigned to a transition of this class.
    pub fn default_rate(self) -> f64 {
        match self {
            TransitionClass::E1 => 1.0,
            TransitionClass::M1 | TransitionClass::E2 => ALPHA * ALPHA,
            TransitionClass::None => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Upper level, 1-based.
    pub upper: usize,
    /// Lower level, 1-based.
    pub lower: usize,
    pub class: TransitionClass,
    pub wavelength_um: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelScheme {
    /// Offset between the electric (3-4) and magnetic (1-2) probe
    /// transitions, angular, units γ.
    pub gap: f64,
    pub transitions: Vec<Transition>,
}

impl Default for LevelScheme {
    fn default() -> Self {
        let t = |upper, lower, class, wavelength_um| Transition {
            upper,
            lower,
            class,
            wavelength_um,
        };
        Self {
            gap: 2.0 * std::f64::consts::PI * 1e4,
            transitions: vec![
                t(2, 1, TransitionClass::M1, 5.4),
                t(4, 3, TransitionClass::E1, 5.4),
                t(3, 1, TransitionClass::E1, 0.704),
                t(4, 2, TransitionClass::E1, 0.352),
                t(5, 4, TransitionClass::E1, 1.05),
            ],
        }
    }
}

impl LevelScheme {
    const REQUIRED: [(usize, usize, TransitionClass); 5] = [
        (2, 1, TransitionClass::M1),
        (4, 3, TransitionClass::E1),
        (3, 1, TransitionClass::E1),
        (4, 2, TransitionClass::E1),
        (5, 4, TransitionClass::E1),
    ];

    pub fn class_of(&self, a: usize, b: usize) -> TransitionClass {
        self.transitions
            .iter()
            .find(|t| (t.upper, t.lower) == (a, b) || (t.upper, t.lower) == (b, a))
            .map(|t| t.class)
            .unwrap_or(TransitionClass::None)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gap > 0.0) || !self.gap.is_finite() {
            return Err(Error::validation("levels.gap", "must be positive and finite"));
        }
        for t in &self.transitions {
            if !(1..=LEVELS).contains(&t.upper) || !(1..=LEVELS).contains(&t.lower) || t.upper == t.lower {
                return Err(Error::validation(
                    "levels.transitions",
                    format!("bad level pair ({}, {})", t.upper, t.lower),
                ));
            }
            if !(t.wavelength_um > 0.0) {
                return Err(Error::validation(
                    "levels.transitions.wavelength_um",
                    "must be positive",
                ));
            }
        }
        let listed: Vec<_> = self
            .transitions
            .iter()
            .filter(|t| t.class != TransitionClass::None)
            .collect();
        let graph_ok = listed.len() == Self::REQUIRED.len()
            && Self::REQUIRED
                .iter()
                .all(|&(u, l, c)| self.class_of(u, l) == c);
        if !graph_ok {
            return Err(Error::validation(
                "levels.transitions",
                "graph must be exactly (1,2,M1), (3,4,E1), (1,3,E1), (2,4,E1), (4,5,E1)",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Polarization {
    #[serde(rename = "sigma+")]
    SigmaPlus,
    #[default]
    #[serde(rename = "sigma-")]
    SigmaMinus,
}

impl Polarization {
    /// Phase of the magnetic probe amplitude relative to the electric one
    /// (`H_b = B_b = ∓i E_b` for σ±).
    pub fn magnetic_phase(self) -> C64 {
        match self {
            Polarization::SigmaPlus => -C64::i(),
            Polarization::SigmaMinus => C64::i(),
        }
    }

    /// Sign in front of the chirality term of the circular index.
    pub fn chirality_sign(self) -> f64 {
        match self {
            Polarization::SigmaPlus => 1.0,
            Polarization::SigmaMinus => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveConfig {
    pub omega31: C64,
    pub omega42: C64,
    /// Δ′ = −Δ + Ω54/2; fixes the magnitude of Ω54.
    pub effective_gap: f64,
    pub delta31: f64,
    pub delta54: f64,
    pub delta21: f64,
    /// Relative phase of the closed loop 1→3→4→2→1, placed on Ω31 (radians).
    pub loop_phase: f64,
    pub polarization: Polarization,
    /// ω_a − ω_c in units γ. Only zero is supported.
    pub coupling_frequency_offset: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self {
            omega31: C64::new(6.3e-3, 0.0),
            omega42: C64::new(5.6, 0.0),
            effective_gap: 560.0,
            delta31: -1e-2,
            delta54: 0.0,
            delta21: 0.0,
            loop_phase: 0.0,
            polarization: Polarization::SigmaMinus,
            coupling_frequency_offset: 0.0,
        }
    }
}

impl DriveConfig {
    /// Ω54 = 2(Δ + Δ′).
    pub fn omega54(&self, gap: f64) -> f64 {
        2.0 * (gap + self.effective_gap)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("drives.omega31", self.omega31.norm()),
            ("drives.omega42", self.omega42.norm()),
            ("drives.effective_gap", self.effective_gap),
            ("drives.delta31", self.delta31),
            ("drives.delta54", self.delta54),
            ("drives.delta21", self.delta21),
            ("drives.loop_phase", self.loop_phase),
            ("drives.coupling_frequency_offset", self.coupling_frequency_offset),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(Error::validation(field, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Population decay rates γ_jk (j → k), collisional dephasing and the
/// incoherent 3↔4 pump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayNetwork {
    /// `rates[j][k]` is the decay rate from level j+1 to level k+1.
    pub rates: [[f64; LEVELS]; LEVELS],
    pub collisional: f64,
    pub pump: f64,
}

impl Default for DecayNetwork {
    fn default() -> Self {
        let mut rates = [[0.0; LEVELS]; LEVELS];
        let e1 = TransitionClass::E1.default_rate();
        rates[2][0] = e1; // 3 → 1
        rates[3][1] = e1; // 4 → 2
        rates[3][2] = e1; // 4 → 3
        rates[4][3] = e1; // 5 → 4
        rates[1][0] = TransitionClass::M1.default_rate(); // 2 → 1
        Self {
            rates,
            collisional: 1.0,
            pump: 0.0,
        }
    }
}

impl DecayNetwork {
    pub fn with_pump(mut self, pump: f64) -> Self {
        self.pump = pump;
        self
    }

    /// Rates with the pump folded in symmetrically on 3→4 and 4→3.
    pub fn effective_rates(&self) -> [[f64; LEVELS]; LEVELS] {
        let mut rates = self.rates;
        rates[2][3] += self.pump;
        rates[3][2] += self.pump;
        rates
    }

    /// Total population loss rate out of every level.
    pub fn outflow(&self) -> [f64; LEVELS] {
        let rates = self.effective_rates();
        let mut out = [0.0; LEVELS];
        for (j, row) in rates.iter().enumerate() {
            out[j] = row.iter().sum();
        }
        out
    }

    /// Off-diagonal decoherence rates γ̃_xy = Σ_j (γ_xj + γ_yj)/2 + γ_C.
    pub fn coherence_rates(&self) -> [[f64; LEVELS]; LEVELS] {
        let out = self.outflow();
        let mut tilde = [[0.0; LEVELS]; LEVELS];
        for x in 0..LEVELS {
            for y in 0..LEVELS {
                if x != y {
                    tilde[x][y] = 0.5 * (out[x] + out[y]) + self.collisional;
                }
            }
        }
        tilde
    }

    pub fn validate(&self) -> Result<()> {
        for (j, row) in self.rates.iter().enumerate() {
            for (k, &g) in row.iter().enumerate() {
                if !(g >= 0.0) || !g.is_finite() {
                    return Err(Error::validation(
                        &format!("decay.rates[{}][{}]", j + 1, k + 1),
                        "must be non-negative and finite",
                    ));
                }
                if j == k && g != 0.0 {
                    return Err(Error::validation(
                        &format!("decay.rates[{}][{}]", j + 1, k + 1),
                        "diagonal rates must be zero",
                    ));
                }
            }
        }
        if !(self.collisional >= 0.0) || !self.collisional.is_finite() {
            return Err(Error::validation("decay.collisional", "must be non-negative"));
        }
        if !(self.pump >= 0.0) || !self.pump.is_finite() {
            return Err(Error::validation("decay.pump", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MediumConfig {
    /// Number density N, cm⁻³.
    pub density: f64,
    /// Probe wavelength λ_b, µm.
    pub probe_wavelength_um: f64,
    /// Absolute value of γ, rad/s.
    pub gamma_abs: f64,
}

impl Default for MediumConfig {
    fn default() -> Self {
        Self {
            density: 2.5e17,
            probe_wavelength_um: 5.0,
            gamma_abs: 1e7,
        }
    }
}

impl MediumConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.density >= 0.0) || !self.density.is_finite() {
            return Err(Error::validation("medium.density", "N must be non-negative"));
        }
        if !(self.probe_wavelength_um > 0.0) || !self.probe_wavelength_um.is_finite() {
            return Err(Error::validation(
                "medium.probe_wavelength_um",
                "must be positive",
            ));
        }
        if !(self.gamma_abs > 0.0) || !self.gamma_abs.is_finite() {
            return Err(Error::validation("medium.gamma_abs", "must be positive"));
        }
        Ok(())
    }

    pub fn probe_omega(&self) -> f64 {
        units::angular_frequency_from_wavelength_um(self.probe_wavelength_um)
    }

    /// Dipole moments and Lorentz-Lorenz couplings for the given decay network.
    pub fn constants(&self, decay: &DecayNetwork) -> Result<MediumConstants> {
        let omega = self.probe_omega();
        let d43 = units::dipole_from_decay(decay.rates[3][2] * self.gamma_abs, omega)?;
        let mu21 = units::dipole_from_decay(decay.rates[1][0] * self.gamma_abs, omega)?;
        let hbar_gamma = HBAR * self.gamma_abs;
        let pref = 2.0 * units::LORENTZ_LORENZ * self.density / hbar_gamma;
        Ok(MediumConstants {
            density: self.density,
            d43,
            mu21,
            hbar_gamma,
            g_e: pref * d43 * d43,
            g_b: pref * mu21 * mu21,
        })
    }
}

/// Derived Gaussian-unit quantities of the medium.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumConstants {
    pub density: f64,
    /// Electric dipole of the 3-4 probe transition, esu·cm.
    pub d43: f64,
    /// Magnetic dipole of the 1-2 probe transition, esu·cm.
    pub mu21: f64,
    /// ħγ in erg.
    pub hbar_gamma: f64,
    /// (8π/3)·N·d43²/(ħγ).
    pub g_e: f64,
    /// (8π/3)·N·μ21²/(ħγ).
    pub g_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    /// Electric expansion parameters w_E = d43·E_b/(ħγ), strictly increasing.
    pub w_e: Vec<f64>,
    /// Magnetic expansion parameter w_B = μ21·|B_b|/(ħγ).
    pub w_b: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            w_e: linspace(1e-4, 2e-3, 20),
            w_b: 1e-4,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.w_e.is_empty() {
            return Err(Error::validation("probe.w_e", "grid must not be empty"));
        }
        if self.w_e.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::validation("probe.w_e", "all amplitudes must be positive"));
        }
        if self.w_e.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::validation("probe.w_e", "must be strictly increasing"));
        }
        if !(self.w_b > 0.0) || !self.w_b.is_finite() {
            return Err(Error::validation("probe.w_b", "must be positive"));
        }
        Ok(())
    }
}

pub(crate) fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|k| if k + 1 == count { stop } else { start + step * k as f64 })
                .collect()
        }
    }
}

/// Complete physical description of one operating point family.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub levels: LevelScheme,
    pub drives: DriveConfig,
    pub decay: DecayNetwork,
    pub medium: MediumConfig,
    pub probe: ProbeConfig,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        self.levels.validate()?;
        self.drives.validate()?;
        self.decay.validate()?;
        self.medium.validate()?;
        self.probe.validate()
    }

    pub fn medium_constants(&self) -> Result<MediumConstants> {
        self.medium.constants(&self.decay)
    }

    pub fn omega54(&self) -> f64 {
        self.drives.omega54(self.levels.gap)
    }

    pub fn with_pump(mut self, pump: f64) -> Self {
        self.decay.pump = pump;
        self
    }

    pub fn with_detuning(mut self, delta21: f64) -> Self {
        self.drives.delta21 = delta21;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.drives.loop_phase = phase;
        self
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.medium.density = density;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_network_follows_class_rule() {
        let d = DecayNetwork::default();
        let levels = LevelScheme::default();
        for j in 0..LEVELS {
            for k in 0..LEVELS {
                let g = d.rates[j][k];
                if g > 0.0 {
                    assert_eq!(g, levels.class_of(j + 1, k + 1).default_rate());
                }
            }
        }
        assert_eq!(d.rates[1][0], 1.0 / (137.0 * 137.0));
    }

    #[test]
    fn coherence_rate_of_magnetic_pair() {
        // γ̃21 = (γ21 + 0)/2 + γ_C
        let d = DecayNetwork::default();
        let t = d.coherence_rates();
        assert!((t[1][0] - (0.5 / (137.0f64 * 137.0) + 1.0)).abs() < 1e-15);
        assert_eq!(t[1][0], t[0][1]);
    }

    #[test]
    fn pump_is_symmetric() {
        let d = DecayNetwork::default().with_pump(0.3);
        let r = d.effective_rates();
        assert_eq!(r[2][3], 0.3);
        assert_eq!(r[3][2], 1.3);
    }

    #[test]
    fn omega54_from_effective_gap() {
        let cfg = SystemConfig::default();
        let gap = cfg.levels.gap;
        assert_eq!(cfg.omega54(), 2.0 * (gap + 560.0));
        assert!((-gap + cfg.omega54() / 2.0 - cfg.drives.effective_gap).abs() < 1e-9);
    }

    #[test]
    fn default_probe_grid() {
        let p = ProbeConfig::default();
        assert_eq!(p.w_e.len(), 20);
        assert_eq!(p.w_e[0], 1e-4);
        assert_eq!(*p.w_e.last().unwrap(), 2e-3);
        p.validate().unwrap();
    }

    #[test]
    fn rejects_negative_density() {
        let cfg = SystemConfig::default().with_density(-1.0);
        match cfg.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "medium.density"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_broken_graph() {
        let mut cfg = SystemConfig::default();
        cfg.levels.transitions.pop();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_density_zero_coupling() {
        let c = SystemConfig::default().with_density(0.0).medium_constants().unwrap();
        assert_eq!(c.g_e, 0.0);
        assert_eq!(c.g_b, 0.0);
        assert!(c.d43 > 0.0 && c.mu21 > 0.0);
    }
}
