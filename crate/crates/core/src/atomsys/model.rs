//! Nonlinear rotating-frame generator and master-equation right-hand side.
//!
//! The Lorentz-Lorenz local fields enter the Hamiltonian directly, so the
//! generator depends on the current coherences ρ̃43 and ρ̃21.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64 as C64;

use super::config::{MediumConstants, SystemConfig, LEVELS};
use super::density::{CMatrix5, DensityMatrix};
use crate::error::{Error, Result};
use crate::units::LORENTZ_LORENZ;

pub const DIM: usize = LEVELS * LEVELS;
pub type Superop = SMatrix<C64, DIM, DIM>;
pub type StateVec = SVector<C64, DIM>;

const HALF: C64 = C64::new(0.5, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Row-major flattening index of ρ_jk (0-based).
#[inline]
pub fn vec_index(j: usize, k: usize) -> usize {
    j * LEVELS + k
}

pub fn vectorize(m: &CMatrix5) -> StateVec {
    StateVec::from_fn(|i, _| m[(i / LEVELS, i % LEVELS)])
}

pub fn unvectorize(v: &StateVec) -> CMatrix5 {
    CMatrix5::from_fn(|j, k| v[vec_index(j, k)])
}

/// Probe field amplitudes (co-rotating complex amplitudes, Gaussian units).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeFields {
    pub electric: C64,
    pub magnetic: C64,
}

/// E_L = E_b + (4π/3)·2N·d34·ρ̃43 and B_L = B_b + (4π/3)·2N·μ12·ρ̃21.
pub fn local_fields(
    rho: &DensityMatrix,
    medium: &MediumConstants,
    probe: ProbeFields,
) -> ProbeFields {
    let p = 2.0 * medium.density * medium.d43 * rho.rho43();
    let m = 2.0 * medium.density * medium.mu21 * rho.rho21();
    ProbeFields {
        electric: probe.electric + LORENTZ_LORENZ * p,
        magnetic: probe.magnetic + LORENTZ_LORENZ * m,
    }
}

/// Probe couplings in units of γ: `electric = d43·E_L/ħγ`,
/// `magnetic = μ21·B_L/ħγ`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Couplings {
    pub electric: C64,
    pub magnetic: C64,
}

impl Couplings {
    pub fn distance(&self, other: &Couplings) -> f64 {
        (self.electric - other.electric)
            .norm()
            .max((self.magnetic - other.magnetic).norm())
    }
}

/// A [`SystemConfig`] compiled at one electric probe amplitude.
#[derive(Clone, Debug)]
pub struct Model {
    energies: [f64; LEVELS],
    omega31: C64,
    omega42: C64,
    omega54: C64,
    external: Couplings,
    g_e: f64,
    g_b: f64,
    rates: [[f64; LEVELS]; LEVELS],
    outflow: [f64; LEVELS],
    coherence_rates: [[f64; LEVELS]; LEVELS],
    constants: MediumConstants,
}

impl Model {
    pub fn new(cfg: &SystemConfig, w_e: f64) -> Result<Self> {
        let d = &cfg.drives;
        if d.coupling_frequency_offset != 0.0 {
            return Err(Error::Unsupported(format!(
                "coupling lasers must share one frequency (ω_a − ω_c = {} γ); \
                 the rotating frame is stationary only for ω_a = ω_c",
                d.coupling_frequency_offset
            )));
        }
        let constants = cfg.medium_constants()?;
        let gap = cfg.levels.gap;
        let e4 = d.delta31 + d.delta21 + gap;
        let energies = [0.0, d.delta21, d.delta31, e4, e4 + d.delta54];
        Ok(Self {
            energies,
            omega31: d.omega31 * C64::from_polar(1.0, d.loop_phase),
            omega42: d.omega42,
            omega54: C64::new(cfg.omega54(), 0.0),
            external: Couplings {
                electric: C64::new(w_e, 0.0),
                magnetic: d.polarization.magnetic_phase() * cfg.probe.w_b,
            },
            g_e: constants.g_e,
            g_b: constants.g_b,
            rates: cfg.decay.effective_rates(),
            outflow: cfg.decay.outflow(),
            coherence_rates: cfg.decay.coherence_rates(),
            constants,
        })
    }

    pub fn constants(&self) -> &MediumConstants {
        &self.constants
    }

    pub fn external(&self) -> Couplings {
        self.external
    }

    /// Lorentz-Lorenz feedback strengths (g_E, g_B).
    pub fn feedback(&self) -> (f64, f64) {
        (self.g_e, self.g_b)
    }

    pub fn has_feedback(&self) -> bool {
        self.g_e != 0.0 || self.g_b != 0.0
    }

    /// Rotating-frame level energies in units ħγ (level 1 at zero).
    pub fn energies(&self) -> [f64; LEVELS] {
        self.energies
    }

    /// Local-field couplings for the state `rho`.
    pub fn couplings(&self, rho: &CMatrix5) -> Couplings {
        Couplings {
            electric: self.external.electric + self.g_e * rho[(3, 2)],
            magnetic: self.external.magnetic + self.g_b * rho[(1, 0)],
        }
    }

    /// Hamiltonian (units ħγ) for frozen probe couplings. Exactly Hermitian.
    pub fn hamiltonian(&self, c: Couplings) -> CMatrix5 {
        let mut h = CMatrix5::zeros();
        for (j, &e) in self.energies.iter().enumerate() {
            h[(j, j)] = C64::new(e, 0.0);
        }
        let mut set = |j: usize, k: usize, v: C64| {
            h[(j, k)] = -HALF * v;
            h[(k, j)] = (-HALF * v).conj();
        };
        set(1, 0, c.magnetic);
        set(3, 2, c.electric);
        set(2, 0, self.omega31);
        set(3, 1, self.omega42);
        set(4, 3, self.omega54);
        h
    }

    pub fn generator(&self, rho: &CMatrix5) -> CMatrix5 {
        self.hamiltonian(self.couplings(rho))
    }

    pub fn dissipator(&self, rho: &CMatrix5) -> CMatrix5 {
        let mut d = CMatrix5::zeros();
        for x in 0..LEVELS {
            for y in 0..LEVELS {
                if x != y {
                    d[(x, y)] = -self.coherence_rates[x][y] * rho[(x, y)];
                }
            }
        }
        for j in 0..LEVELS {
            let pj = rho[(j, j)];
            d[(j, j)] -= self.outflow[j] * pj;
            for k in 0..LEVELS {
                if self.rates[j][k] != 0.0 {
                    d[(k, k)] += self.rates[j][k] * pj;
                }
            }
        }
        d
    }

    /// dρ/dt = −i[H(ρ), ρ] + D(ρ), units γ.
    pub fn rhs(&self, rho: &CMatrix5) -> CMatrix5 {
        let h = self.generator(rho);
        (h * rho - rho * h) * (-I) + self.dissipator(rho)
    }

    /// Linear superoperator for frozen probe couplings, acting on
    /// [`vectorize`]d states.
    pub fn superoperator(&self, c: Couplings) -> Superop {
        let h = self.hamiltonian(c);
        let mut s = Superop::zeros();
        for j in 0..LEVELS {
            for k in 0..LEVELS {
                let row = vec_index(j, k);
                for a in 0..LEVELS {
                    s[(row, vec_index(a, k))] += -I * h[(j, a)];
                    s[(row, vec_index(j, a))] += I * h[(a, k)];
                }
                if j != k {
                    s[(row, row)] -= self.coherence_rates[j][k];
                }
            }
        }
        for j in 0..LEVELS {
            let jj = vec_index(j, j);
            s[(jj, jj)] -= self.outflow[j];
            for k in 0..LEVELS {
                s[(vec_index(k, k), jj)] += self.rates[j][k];
            }
        }
        s
    }

    /// Derivative of the superoperator action with respect to the probe
    /// couplings: returns −i[∂H, ρ] for a unit change along `direction`.
    pub fn coupling_derivative(&self, rho: &CMatrix5, direction: CouplingDirection) -> CMatrix5 {
        let mut dh = CMatrix5::zeros();
        let (j, k, v) = match direction {
            CouplingDirection::ElectricRe => (3, 2, C64::new(1.0, 0.0)),
            CouplingDirection::ElectricIm => (3, 2, I),
            CouplingDirection::MagneticRe => (1, 0, C64::new(1.0, 0.0)),
            CouplingDirection::MagneticIm => (1, 0, I),
        };
        dh[(j, k)] = -HALF * v;
        dh[(k, j)] = (-HALF * v).conj();
        (dh * rho - rho * dh) * (-I)
    }

    /// Jacobian of [`Model::rhs`] with respect to the 25 entries of ρ,
    /// treating ρ_jk and ρ_kj as independent (complex-analytic extension).
    pub fn jacobian(&self, rho: &CMatrix5) -> Superop {
        let mut jac = self.superoperator(self.couplings(rho));
        let sources = [(3, 2, self.g_e), (2, 3, self.g_e), (1, 0, self.g_b), (0, 1, self.g_b)];
        for (j, k, g) in sources {
            if g == 0.0 {
                continue;
            }
            let mut dh = CMatrix5::zeros();
            dh[(j, k)] = C64::new(-0.5 * g, 0.0);
            let col = vectorize(&((dh * rho - rho * dh) * (-I)));
            let idx = vec_index(j, k);
            for r in 0..DIM {
                jac[(r, idx)] += col[r];
            }
        }
        jac
    }

    /// Largest frequency scale of the generator, units γ.
    pub fn frequency_scale(&self) -> f64 {
        let h = self.hamiltonian(self.external);
        let offdiag = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let emin = self.energies.iter().cloned().fold(f64::INFINITY, f64::min);
        let emax = self.energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let rates = self
            .coherence_rates
            .iter()
            .flatten()
            .chain(self.outflow.iter())
            .cloned()
            .fold(0.0, f64::max);
        offdiag.max(emax - emin).max(rates).max(1.0)
    }

    pub fn omega54(&self) -> f64 {
        self.omega54.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingDirection {
    ElectricRe,
    ElectricIm,
    MagneticRe,
    MagneticIm,
}

impl CouplingDirection {
    pub const ALL: [CouplingDirection; 4] = [
        CouplingDirection::ElectricRe,
        CouplingDirection::ElectricIm,
        CouplingDirection::MagneticRe,
        CouplingDirection::MagneticIm,
    ];
}

/// Rotating-frame Hamiltonian including the local-field feedback, units ħγ.
pub fn rotating_frame_generator(rho: &DensityMatrix, model: &Model) -> CMatrix5 {
    model.generator(rho.matrix())
}

/// Master-equation right-hand side dρ/dt in units γ.
pub fn liouvillian_rhs(rho: &DensityMatrix, model: &Model) -> CMatrix5 {
    model.rhs(rho.matrix())
}
