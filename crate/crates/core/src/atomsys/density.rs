use nalgebra::{Matrix5, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::config::LEVELS;

pub type CMatrix5 = Matrix5<C64>;

/// Rotating-frame density matrix ρ̃ of one atom.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DensityMatrix(pub CMatrix5);

impl DensityMatrix {
    /// Pure population in `level` (1-based).
    pub fn ground(level: usize) -> Self {
        assert!((1..=LEVELS).contains(&level), "level {level} out of range");
        let mut m = CMatrix5::zeros();
        m[(level - 1, level - 1)] = C64::new(1.0, 0.0);
        Self(m)
    }

    pub fn maximally_mixed() -> Self {
        Self(CMatrix5::identity() / C64::new(LEVELS as f64, 0.0))
    }

    pub fn from_matrix(m: CMatrix5) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &CMatrix5 {
        &self.0
    }

    /// Element ρ_jk with 1-based labels.
    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.0[(j - 1, k - 1)]
    }

    /// Slowly varying magnetic-probe coherence ρ̃21.
    pub fn rho21(&self) -> C64 {
        self.0[(1, 0)]
    }

    /// Slowly varying electric-probe coherence ρ̃43.
    pub fn rho43(&self) -> C64 {
        self.0[(3, 2)]
    }

    pub fn population(&self, level: usize) -> f64 {
        self.0[(level - 1, level - 1)].re
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Replace with (ρ + ρ†)/2.
    pub fn hermitize(&mut self) {
        self.0 = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
    }

    pub fn eigenvalues(&self) -> [f64; LEVELS] {
        let mut h = self.0;
        // Exact Hermitian input for the eigen-solver.
        h = (h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let mut out = [0.0; LEVELS];
        for (o, v) in out.iter_mut().zip(eig.eigenvalues.iter()) {
            *o = *v;
        }
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Largest entrywise modulus difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Checks the documented invariants; `positivity` additionally enforces
    /// eigenvalues ≥ −1e-8.
    pub fn check(&self, positivity: bool) -> Result<(), String> {
        let herm = self.hermiticity_error();
        if herm > 1e-12 {
            return Err(format!("not Hermitian (max |ρ − ρ†| = {herm:e})"));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(format!("trace {tr} differs from 1"));
        }
        if positivity {
            let min = self.min_eigenvalue();
            if min < -1e-8 {
                return Err(format!("negative eigenvalue {min:e}"));
            }
        }
        Ok(())
    }
}

impl Default for DensityMatrix {
    fn default() -> Self {
        Self::ground(1)
    }
}

pub(crate) fn frobenius(m: &CMatrix5) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
