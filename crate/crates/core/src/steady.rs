//! Steady states of the nonlinear master equation.
//!
//! Two independent routes: time integration of dρ/dt until the residual
//! vanishes, and a self-consistent iteration over the local probe fields in
//! which each inner step is an exact linear steady-state solve.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::atomsys::{
    frobenius, unvectorize, vec_index, vectorize, CMatrix5, CouplingDirection, Couplings,
    DensityMatrix, Model, StateVec, Superop, DIM, LEVELS,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "integrate")]
    TimeIntegration,
    #[default]
    #[serde(rename = "scf")]
    SelfConsistent,
}

/// Time stepper used by [`integrate_to_steady`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    /// Six-stage L-stable, stiffly accurate Rosenbrock scheme of order four
    /// (Rodas4) with an embedded third-order estimate.
    #[default]
    Rosenbrock,
    /// Explicit Dormand-Prince 5(4), step ceiling 0.1 over the largest
    /// frequency of the generator.
    DormandPrince,
}

/// Update rule of the self-consistent field iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointScheme {
    /// Newton steps on the local-field residual with the exact Jacobian.
    #[default]
    Newton,
    /// Relaxed Picard iteration with [`SolverSettings::damping`].
    Damped,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// All population in the given level (1-based).
    Level(usize),
    MaximallyMixed,
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Level(1)
    }
}

impl InitialState {
    pub fn density_matrix(self) -> DensityMatrix {
        match self {
            InitialState::Level(l) => DensityMatrix::ground(l),
            InitialState::MaximallyMixed => DensityMatrix::maximally_mixed(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub method: Method,
    /// Absolute local-error tolerance on matrix entries.
    pub abs_tol: f64,
    /// Steady-state threshold η on the Frobenius norm of dρ/dt (units γ).
    pub residual_tol: f64,
    /// Integration time limit, units 1/γ.
    pub t_max: f64,
    pub max_steps: usize,
    pub max_iterations: usize,
    pub damping: f64,
    pub stepper: Stepper,
    pub fixed_point: FixedPointScheme,
    /// Relative tolerance on the self-consistent probe couplings.
    pub field_rtol: f64,
    pub initial: InitialState,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            method: Method::SelfConsistent,
            abs_tol: 1e-10,
            residual_tol: 1e-9,
            t_max: 1e6,
            max_steps: 2_000_000,
            max_iterations: 500,
            damping: 0.5,
            stepper: Stepper::Rosenbrock,
            fixed_point: FixedPointScheme::Newton,
            field_rtol: 1e-10,
            initial: InitialState::Level(1),
        }
    }
}

impl SolverSettings {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("solver.abs_tol", self.abs_tol),
            ("solver.residual_tol", self.residual_tol),
            ("solver.t_max", self.t_max),
            ("solver.field_rtol", self.field_rtol),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(field, "must be positive"));
            }
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::validation("solver.damping", "must lie in (0, 1]"));
        }
        if self.max_iterations == 0 || self.max_steps == 0 {
            return Err(Error::validation("solver.max_iterations", "must be at least 1"));
        }
        if let InitialState::Level(l) = self.initial {
            if !(1..=LEVELS).contains(&l) {
                return Err(Error::validation("solver.initial", "level must be 1..=5"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyResult {
    pub rho: DensityMatrix,
    pub converged: bool,
    /// ‖dρ/dt‖_F at `rho`, units γ.
    pub residual: f64,
    /// Accepted steps or fixed-point iterations.
    pub iterations: usize,
    pub method: Method,
}

/// Dispatches on [`SolverSettings::method`], starting from
/// [`SolverSettings::initial`].
pub fn solve_steady(model: &Model, settings: &SolverSettings) -> Result<SteadyResult> {
    let rho0 = settings.initial.density_matrix();
    match settings.method {
        Method::TimeIntegration => integrate_to_steady(&rho0, model, settings),
        Method::SelfConsistent => self_consistent_steady(&rho0, model, settings),
    }
}

pub fn residual_norm(model: &Model, rho: &CMatrix5) -> f64 {
    frobenius(&model.rhs(rho))
}

fn trace_drift(rho: &CMatrix5) -> f64 {
    (rho.trace() - C64::new(1.0, 0.0)).norm()
}

fn hermitize(m: &mut CMatrix5) {
    *m = (*m + m.adjoint()) * C64::new(0.5, 0.0);
}

fn max_abs(m: &CMatrix5) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Time integration

/// Integrates dρ/dt = L[ρ] until ‖dρ/dt‖_F < η or `t_max` is reached.
pub fn integrate_to_steady(
    rho0: &DensityMatrix,
    model: &Model,
    settings: &SolverSettings,
) -> Result<SteadyResult> {
    match settings.stepper {
        Stepper::Rosenbrock => integrate_rosenbrock(rho0, model, settings),
        Stepper::DormandPrince => integrate_dopri(rho0, model, settings),
    }
}

fn finish_step(y: &mut CMatrix5) -> Result<()> {
    hermitize(y);
    let drift = trace_drift(y);
    if drift > 1e-8 {
        return Err(Error::NumericalFailure(format!(
            "trace drifted by {drift:e} during integration"
        )));
    }
    Ok(())
}

/// Estimated distance max|ρ* − ρ| to the fixed point from one linearized
/// solve with the trace row bordered in. `None` if the bordered Jacobian is
/// singular.
fn distance_to_steady(model: &Model, y: &CMatrix5, f: &CMatrix5) -> Option<f64> {
    let mut jac = model.jacobian(y);
    for col in 0..DIM {
        jac[(TRACE_ROW, col)] = C64::new(0.0, 0.0);
    }
    for j in 0..LEVELS {
        jac[(TRACE_ROW, vec_index(j, j))] = C64::new(1.0, 0.0);
    }
    let mut b = vectorize(f);
    b[TRACE_ROW] = C64::new(0.0, 0.0);
    let dx = jac.lu().solve(&b)?;
    let d = dx.iter().map(|z| z.norm()).fold(0.0, f64::max);
    d.is_finite().then_some(d)
}

/// Converged when the residual is below η and, where the linearization is
/// regular, the estimated distance to the fixed point is below `abs_tol`.
fn at_steady_state(model: &Model, y: &CMatrix5, f: &CMatrix5, residual: f64, s: &SolverSettings) -> bool {
    residual < s.residual_tol
        && (residual == 0.0 || distance_to_steady(model, y, f).map_or(true, |d| d <= s.abs_tol))
}

// Rodas4 coefficients (Hairer-Wanner transformed form, γ = 1/4).
const RODAS_GAMMA: f64 = 0.25;
const RODAS_A: [[f64; 4]; 5] = [
    [0.0; 4],
    [1.544, 0.0, 0.0, 0.0],
    [0.946_678_528_081_582_6, 0.255_701_169_898_328_4, 0.0, 0.0],
    [3.314_825_187_068_521, 2.896_124_015_972_201, 0.998_641_913_997_781_7, 0.0],
    [1.221_224_509_226_641, 6.019_134_481_288_629, 12.537_083_329_320_87, -0.687_886_036_105_895],
];
const RODAS_C: [[f64; 5]; 6] = [
    [0.0; 5],
    [-5.6688, 0.0, 0.0, 0.0, 0.0],
    [-2.430_093_356_833_875, -0.206_359_915_709_191_5, 0.0, 0.0, 0.0],
    [-0.107_352_905_815_137_5, -9.594_562_251_023_355, -20.470_286_148_096_16, 0.0, 0.0],
    [7.496_443_313_967_647, -10.246_804_314_643_52, -33.999_903_528_199_05, 11.708_908_932_061_6, 0.0],
    [8.083_246_795_921_522, -7.981_132_988_064_893, -31.521_594_328_743_71, 16.319_305_431_231_36, -6.058_818_238_834_054],
];

/// One Rodas4 step of size `h` from `y` with `f = rhs(y)`. Returns the new
/// state and the embedded error estimate.
fn rodas_step(model: &Model, y: &CMatrix5, f: &CMatrix5, h: f64) -> Result<(CMatrix5, CMatrix5)> {
    let m = Superop::identity() * C64::new(1.0 / (RODAS_GAMMA * h), 0.0) - model.jacobian(y);
    let lu = m.lu();
    let mut k = [CMatrix5::zeros(); 6];
    for i in 0..6 {
        let yi = if i == 0 {
            *y
        } else if i < 5 {
            let mut yi = *y;
            for j in 0..i {
                yi += k[j] * C64::new(RODAS_A[i][j], 0.0);
            }
            yi
        } else {
            let mut yi = *y + k[4];
            for j in 0..4 {
                yi += k[j] * C64::new(RODAS_A[4][j], 0.0);
            }
            yi
        };
        let mut rhs = if i == 0 { *f } else { model.rhs(&yi) };
        for j in 0..i {
            rhs += k[j] * C64::new(RODAS_C[i][j] / h, 0.0);
        }
        let sol = lu
            .solve(&vectorize(&rhs))
            .ok_or_else(|| Error::NumericalFailure("singular Rosenbrock matrix".into()))?;
        k[i] = unvectorize(&sol);
    }
    let mut y_new = *y + k[4] + k[5];
    for j in 0..4 {
        y_new += k[j] * C64::new(RODAS_A[4][j], 0.0);
    }
    Ok((y_new, k[5]))
}

fn integrate_rosenbrock(
    rho0: &DensityMatrix,
    model: &Model,
    s: &SolverSettings,
) -> Result<SteadyResult> {
    let mut y = *rho0.matrix();
    let mut t = 0.0;
    let mut h = 1e-2 / model.frequency_scale();
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let mut f = model.rhs(&y);

    loop {
        let residual = frobenius(&f);
        if at_steady_state(model, &y, &f, residual, s) {
            return Ok(SteadyResult {
                rho: DensityMatrix(y),
                converged: true,
                residual,
                iterations: accepted,
                method: Method::TimeIntegration,
            });
        }
        if t >= s.t_max || attempts >= s.max_steps {
            return Ok(SteadyResult {
                rho: DensityMatrix(y),
                converged: residual < s.residual_tol,
                residual,
                iterations: accepted,
                method: Method::TimeIntegration,
            });
        }
        attempts += 1;
        h = h.min(s.t_max - t).max(f64::MIN_POSITIVE);

        let (mut y_new, err_mat) = rodas_step(model, &y, &f, h)?;
        let err = max_abs(&err_mat) / s.abs_tol;
        if !err.is_finite() {
            h *= 0.1;
            continue;
        }
        if err <= 1.0 {
            finish_step(&mut y_new)?;
            y = y_new;
            t += h;
            accepted += 1;
            f = model.rhs(&y);
        }
        let factor = if err == 0.0 { 6.0 } else { (0.9 * err.powf(-0.25)).clamp(0.2, 6.0) };
        h *= factor;
    }
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn integrate_dopri(
    rho0: &DensityMatrix,
    model: &Model,
    s: &SolverSettings,
) -> Result<SteadyResult> {
    debug_assert_eq!(DP_C.len(), 7);
    let h_max = 0.1 / model.frequency_scale();
    let mut y = *rho0.matrix();
    let mut t = 0.0;
    let mut h = h_max;
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let mut k = [CMatrix5::zeros(); 7];
    k[0] = model.rhs(&y);

    loop {
        let residual = frobenius(&k[0]);
        if at_steady_state(model, &y, &k[0], residual, s) || t >= s.t_max || attempts >= s.max_steps {
            return Ok(SteadyResult {
                rho: DensityMatrix(y),
                converged: residual < s.residual_tol,
                residual,
                iterations: accepted,
                method: Method::TimeIntegration,
            });
        }
        attempts += 1;
        h = h.min(h_max).min(s.t_max - t);

        for stage in 1..7 {
            let mut ys = y;
            for (j, a) in DP_A[stage].iter().enumerate().take(stage) {
                if *a != 0.0 {
                    ys += k[j] * C64::new(h * a, 0.0);
                }
            }
            k[stage] = model.rhs(&ys);
        }
        let mut y_new = y;
        let mut err_mat = CMatrix5::zeros();
        for j in 0..7 {
            if DP_B[j] != 0.0 {
                y_new += k[j] * C64::new(h * DP_B[j], 0.0);
            }
            err_mat += k[j] * C64::new(h * DP_E[j], 0.0);
        }
        let err = max_abs(&err_mat) / s.abs_tol;
        if err <= 1.0 {
            finish_step(&mut y_new)?;
            y = y_new;
            t += h;
            accepted += 1;
            // FSAL: the last stage is f(y_new) up to the Hermitian projection.
            k[0] = model.rhs(&y);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
}

// ---------------------------------------------------------------------------
// Self-consistent field iteration

/// Exact steady state of the master equation with the probe couplings frozen.
pub struct LinearSteady {
    lu: nalgebra::LU<C64, nalgebra::Const<DIM>, nalgebra::Const<DIM>>,
    pub rho: CMatrix5,
}

const TRACE_ROW: usize = 0;

impl LinearSteady {
    /// Null vector of the superoperator with the ρ11 equation replaced by
    /// the trace-one condition.
    pub fn solve(model: &Model, couplings: Couplings) -> Result<Self> {
        debug_assert_eq!(TRACE_ROW, vec_index(0, 0));
        let mut a = model.superoperator(couplings);
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for col in 0..DIM {
            a[(TRACE_ROW, col)] = C64::new(0.0, 0.0);
        }
        for j in 0..LEVELS {
            a[(TRACE_ROW, vec_index(j, j))] = C64::new(1.0, 0.0);
        }
        let lu = a.lu();
        let pivots: Vec<f64> = (0..DIM).map(|i| lu.u()[(i, i)].norm()).collect();
        let pmin = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(pmin > 1e-13 * scale.max(1.0)) {
            return Err(Error::NumericalFailure(format!(
                "steady-state system is singular (smallest pivot {pmin:e}, scale {scale:e}); \
                 the null space is degenerate"
            )));
        }
        let mut b = StateVec::zeros();
        b[TRACE_ROW] = C64::new(1.0, 0.0);
        let mut x = lu
            .solve(&b)
            .ok_or_else(|| Error::NumericalFailure("singular steady-state system".into()))?;
        // One step of iterative refinement.
        let r = b - a * x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
        let mut rho = unvectorize(&x);
        hermitize(&mut rho);
        Ok(Self { lu, rho })
    }

    /// Sensitivity dρ of the frozen-field steady state to a unit change of
    /// the couplings along `direction`.
    pub fn sensitivity(&self, model: &Model, direction: CouplingDirection) -> CMatrix5 {
        let mut rhs = -vectorize(&model.coupling_derivative(&self.rho, direction));
        rhs[TRACE_ROW] = C64::new(0.0, 0.0);
        self.lu
            .solve(&rhs)
            .map(|v| unvectorize(&v))
            .unwrap_or_else(CMatrix5::zeros)
    }
}

fn couplings_to_real(c: &Couplings) -> Vector4<f64> {
    Vector4::new(c.electric.re, c.electric.im, c.magnetic.re, c.magnetic.im)
}

fn real_to_couplings(v: &Vector4<f64>) -> Couplings {
    Couplings {
        electric: C64::new(v[0], v[1]),
        magnetic: C64::new(v[2], v[3]),
    }
}

/// Fixed point ρ = S(E_L(ρ), B_L(ρ)) where S is the exact linear steady
/// state at frozen local fields.
pub fn self_consistent_steady(
    rho0: &DensityMatrix,
    model: &Model,
    s: &SolverSettings,
) -> Result<SteadyResult> {
    let ext = model.external();
    let scale = ext.electric.norm().max(ext.magnetic.norm()).max(f64::MIN_POSITIVE);
    let field_tol = s.field_rtol * scale;
    let (g_e, g_b) = model.feedback();

    let mut c = model.couplings(rho0.matrix());
    let mut rho_prev = *rho0.matrix();
    let mut last = f64::INFINITY;
    let mut stalls = 0usize;

    for iteration in 1..=s.max_iterations {
        let lin = LinearSteady::solve(model, c)?;
        let target = model.couplings(&lin.rho);
        let mismatch = c.distance(&target);
        rho_prev = lin.rho;

        // Newton stagnates at the round-off floor of the linear solve.
        if mismatch >= 0.5 * last && mismatch < 1e3 * field_tol {
            stalls += 1;
        }
        if mismatch <= field_tol || stalls >= 2 {
            let residual = residual_norm(model, &lin.rho);
            return Ok(SteadyResult {
                rho: DensityMatrix(lin.rho),
                converged: residual < s.residual_tol,
                residual,
                iterations: iteration,
                method: Method::SelfConsistent,
            });
        }
        last = mismatch;

        c = match s.fixed_point {
            FixedPointScheme::Damped => Couplings {
                electric: c.electric + s.damping * (target.electric - c.electric),
                magnetic: c.magnetic + s.damping * (target.magnetic - c.magnetic),
            },
            FixedPointScheme::Newton => {
                // F(c) = c − c_ext − G(ρ(c)); J = I − ∂G/∂c.
                let mut jac = Matrix4::<f64>::identity();
                for (col, dir) in CouplingDirection::ALL.iter().enumerate() {
                    let d = lin.sensitivity(model, *dir);
                    let dg = Couplings {
                        electric: g_e * d[(3, 2)],
                        magnetic: g_b * d[(1, 0)],
                    };
                    let dg = couplings_to_real(&dg);
                    for row in 0..4 {
                        jac[(row, col)] -= dg[row];
                    }
                }
                let f = couplings_to_real(&c) - couplings_to_real(&target);
                match jac.lu().solve(&(-f)) {
                    Some(step) => real_to_couplings(&(couplings_to_real(&c) + step)),
                    None => target,
                }
            }
        };
    }

    let residual = residual_norm(model, &rho_prev);
    Ok(SteadyResult {
        rho: DensityMatrix(rho_prev),
        converged: false,
        residual,
        iterations: s.max_iterations,
        method: Method::SelfConsistent,
    })
}

/// Outcome of comparing steady states reached from two initial conditions.
#[derive(Clone, Debug, PartialEq)]
pub enum Uniqueness {
    Unique { max_difference: f64 },
    Multistable { max_difference: f64 },
}

/// Solves from |1⟩⟨1| and from the maximally mixed state and compares.
pub fn check_uniqueness(model: &Model, settings: &SolverSettings) -> Result<Uniqueness> {
    let solve = |rho0: DensityMatrix| match settings.method {
        Method::TimeIntegration => integrate_to_steady(&rho0, model, settings),
        Method::SelfConsistent => self_consistent_steady(&rho0, model, settings),
    };
    let a = solve(DensityMatrix::ground(1))?;
    let b = solve(DensityMatrix::maximally_mixed())?;
    let diff = a.rho.max_abs_diff(&b.rho);
    Ok(if diff <= 1e-8 {
        Uniqueness::Unique { max_difference: diff }
    } else {
        Uniqueness::Multistable { max_difference: diff }
    })
}
