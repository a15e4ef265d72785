//! Circular-polarization refractive index and square-root branch tracking.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::atomsys::Polarization;
use crate::error::{Error, Result};
use crate::response::ResponseCoefficients;

/// |n²| below this is treated as a branch point.
pub const BRANCH_POINT_TOL: f64 = 1e-14;

/// Which root of n² (before the chirality shift) was selected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The principal square root (Re ≥ 0).
    Principal,
    Negated,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Principal => "principal",
            Branch::Negated => "negated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "principal" => Some(Branch::Principal),
            "negated" => Some(Branch::Negated),
            _ => None,
        }
    }
}

/// |Re(n)/Im(n)|, infinite when Im(n) = 0.
pub fn figure_of_merit(n: C64) -> f64 {
    if n.im == 0.0 {
        f64::INFINITY
    } else {
        (n.re / n.im).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexPoint {
    pub n: C64,
    /// εμ − (ξ_EH + ξ_HE)²/4.
    pub n_squared: C64,
    pub branch: Branch,
    pub fom: f64,
    pub polarization: Polarization,
    pub delta21: f64,
    pub pump: f64,
    /// Both roots coincide; the selection is arbitrary.
    pub branch_point: bool,
}

impl IndexPoint {
    pub fn with_coordinates(mut self, delta21: f64, pump: f64) -> Self {
        self.delta21 = delta21;
        self.pump = pump;
        self
    }

    /// The selected root of n² without the chirality term.
    pub fn root(&self) -> C64 {
        let s = self.n_squared.sqrt();
        match self.branch {
            Branch::Principal => s,
            Branch::Negated => -s,
        }
    }
}

pub fn index_squared(rc: &ResponseCoefficients) -> C64 {
    let xs = rc.xi_eh + rc.xi_he;
    rc.eps * rc.mu - xs * xs / 4.0
}

/// n± = ±√(εμ − (ξ_EH + ξ_HE)²/4) ± (i/2)(ξ_HE − ξ_EH).
///
/// Without `prev` the root with positive imaginary part is taken; otherwise
/// the root nearest to `prev` (compared after the chirality shift).
pub fn refractive_index(
    rc: &ResponseCoefficients,
    polarization: Polarization,
    prev: Option<C64>,
) -> Result<IndexPoint> {
    if !rc.is_finite() {
        return Err(Error::InvalidInput("response coefficients are not finite".into()));
    }
    let s = index_squared(rc);
    let principal = s.sqrt();
    let chirality = C64::new(0.0, 0.5 * polarization.chirality_sign()) * (rc.xi_he - rc.xi_eh);
    let branch = match prev {
        None => {
            if principal.im > 0.0 || (principal.im == 0.0 && principal.re >= 0.0) {
                Branch::Principal
            } else {
                Branch::Negated
            }
        }
        Some(p) => {
            let d_plus = (principal + chirality - p).norm();
            let d_minus = (-principal + chirality - p).norm();
            if d_plus <= d_minus {
                Branch::Principal
            } else {
                Branch::Negated
            }
        }
    };
    let root = match branch {
        Branch::Principal => principal,
        Branch::Negated => -principal,
    };
    let n = root + chirality;
    Ok(IndexPoint {
        n,
        n_squared: s,
        branch,
        fom: figure_of_merit(n),
        polarization,
        delta21: 0.0,
        pump: 0.0,
        branch_point: s.norm() < BRANCH_POINT_TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchStep {
    pub pump: f64,
    pub response: ResponseCoefficients,
    pub point: IndexPoint,
    /// |n_k − n_{k−1}|; zero for the first point.
    pub jump: f64,
    /// Jump exceeds ten times |n²_k − n²_{k−1}|^{1/2}.
    pub suspicious: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchPath {
    pub steps: Vec<BranchStep>,
}

impl BranchPath {
    pub fn indices(&self) -> Vec<C64> {
        self.steps.iter().map(|s| s.point.n).collect()
    }

    pub fn has_suspicious_steps(&self) -> bool {
        self.steps.iter().any(|s| s.suspicious)
    }
}

/// Threads the branch choice along a path sorted by ascending pump rate.
pub fn track_branch(
    path: &[(f64, ResponseCoefficients)],
    polarization: Polarization,
) -> Result<BranchPath> {
    if path.windows(2).any(|w| !(w[1].0 >= w[0].0)) {
        return Err(Error::InvalidInput(
            "branch path must be sorted by ascending pump rate".into(),
        ));
    }
    let mut steps: Vec<BranchStep> = Vec::with_capacity(path.len());
    for (pump, rc) in path {
        let prev = steps.last().map(|s| s.point.n);
        let point = refractive_index(rc, polarization, prev)?.with_coordinates(0.0, *pump);
        let (jump, suspicious) = match steps.last() {
            Some(last) => {
                let jump = (point.n - last.point.n).norm();
                let scale = (point.n_squared - last.point.n_squared).norm().sqrt();
                (jump, jump > 10.0 * scale)
            }
            None => (0.0, false),
        };
        steps.push(BranchStep {
            pump: *pump,
            response: rc.clone(),
            point,
            jump,
            suspicious,
        });
    }
    Ok(BranchPath { steps })
}
