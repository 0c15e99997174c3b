//! Minimization of the regularized energy
//! `F_eps(u) = sum L_eps(grad u) + u f` over fields with Dirichlet data.

mod discrete;
pub mod io;
mod linalg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plap_math::{lagrangian, PLapParams};
use crate::tensorfield::{Grid, ScalarField};
use discrete::Discretization;

/// Dirichlet problem for the regularized energy. `g` is read on boundary nodes only.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub params: PLapParams,
    pub f: ScalarField,
    pub g: ScalarField,
}

impl ProblemSpec {
    pub fn new(params: PLapParams, f: ScalarField, g: ScalarField) -> Result<Self> {
        if f.grid() != g.grid() {
            return Err(Error::InvalidParameter("f and g live on different grids".into()));
        }
        if !(params.p >= 2.0 && params.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p = {} must be >= 2", params.p)));
        }
        Ok(Self { params, f, g })
    }

    pub fn grid(&self) -> &Grid {
        self.f.grid()
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        let mut out = self.clone();
        out.params.eps = eps;
        out
    }

    /// Problem whose minimizer is `lambda` times this one's:
    /// data `(lambda g, lambda^(p-1) f)` and regularization `lambda eps`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let p = self.params.p;
        let mut params = self.params;
        params.eps *= lambda;
        Self::new(
            params,
            self.f.map(|v| lambda.powf(p - 1.0) * v)?,
            self.g.map(|v| lambda * v)?,
        )
    }

    /// `tol_res = 1e-6 * rms_interior(f) + 1e-10`.
    pub fn residual_tolerance(&self, opts: &SolverOptions) -> f64 {
        let grid = self.grid();
        let interior: Vec<f64> = (0..grid.len())
            .filter(|&i| !grid.is_boundary(i))
            .map(|i| self.f.values()[i])
            .collect();
        let rms = (interior.iter().map(|v| v * v).sum::<f64>() / interior.len() as f64).sqrt();
        opts.res_rel_tol * rms + opts.res_abs_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Gradient-norm tolerance relative to `1 + |energy|`.
    pub grad_rel_tol: f64,
    pub res_rel_tol: f64,
    pub res_abs_tol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub max_backtracks: usize,
    pub cg_rel_tol: f64,
    pub cg_max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            grad_rel_tol: 1e-10,
            res_rel_tol: 1e-6,
            res_abs_tol: 1e-10,
            armijo: 1e-4,
            max_backtracks: 60,
            cg_rel_tol: 1e-11,
            cg_max_iterations: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: ScalarField,
    pub energy: f64,
    /// Root-mean-square of `div(grad L_eps(grad u)) - f` over interior nodes.
    pub el_residual: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
    pub tol_res: f64,
    pub tol_grad: f64,
}

fn check_shape(spec: &ProblemSpec, u: &ScalarField) -> Result<()> {
    if u.grid() != spec.grid() {
        return Err(Error::ShapeMismatch {
            expected: spec.grid().len(),
            got: u.values().len(),
        });
    }
    Ok(())
}

fn check_boundary(spec: &ProblemSpec, u: &ScalarField) -> Result<()> {
    check_shape(spec, u)?;
    let grid = spec.grid();
    for i in (0..grid.len()).filter(|&i| grid.is_boundary(i)) {
        let (a, b) = (u.values()[i], spec.g.values()[i]);
        if (a - b).abs() > 1e-12 * (1.0 + b.abs()) {
            return Err(Error::BoundaryMismatch { node: i });
        }
    }
    Ok(())
}

fn discrete_energy(disc: &Discretization, spec: &ProblemSpec, u: &[f64]) -> f64 {
    let (eps, p) = (spec.params.eps, spec.params.p);
    disc.element_sum(u, |g| lagrangian(g, eps, p)) + disc.source_term(u, spec.f.values())
}

/// Full energy gradient, zeroed on boundary nodes.
fn energy_gradient(disc: &Discretization, spec: &ProblemSpec, u: &[f64]) -> Vec<f64> {
    let mut grad = disc.flux_gradient(u, spec.params.eps, spec.params.p);
    let f = spec.f.values();
    for i in 0..grad.len() {
        grad[i] = if disc.free[i] {
            grad[i] + disc.node_weights[i] * f[i]
        } else {
            0.0
        };
    }
    grad
}

fn residual_rms(disc: &Discretization, grad: &[f64]) -> f64 {
    let (sum, count) = grad
        .iter()
        .zip(&disc.node_weights)
        .zip(&disc.free)
        .filter(|(_, &free)| free)
        .fold((0.0, 0usize), |(s, c), ((g, m), _)| {
            let r = g / m;
            (s + r * r, c + 1)
        });
    (sum / count as f64).sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Discrete energy of an admissible field (`u = g` on the boundary).
pub fn energy(spec: &ProblemSpec, u: &ScalarField) -> Result<f64> {
    check_boundary(spec, u)?;
    Ok(discrete_energy(&Discretization::new(spec.grid()), spec, u.values()))
}

/// Root-mean-square Euler–Lagrange residual over interior nodes.
pub fn el_residual(spec: &ProblemSpec, u: &ScalarField) -> Result<f64> {
    check_shape(spec, u)?;
    let disc = Discretization::new(spec.grid());
    Ok(residual_rms(&disc, &energy_gradient(&disc, spec, u.values())))
}

/// Energy-comparison bound `sum (1 + |grad u0|^2)^(p/2) / p + u0 f`, valid for
/// `eps <= 1` and admissible `u0`.
pub fn energy_upper_bound(spec: &ProblemSpec, u0: &ScalarField) -> Result<f64> {
    if spec.params.eps > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "energy bound requires eps <= 1, got {}",
            spec.params.eps
        )));
    }
    check_boundary(spec, u0)?;
    let disc = Discretization::new(spec.grid());
    let p = spec.params.p;
    Ok(disc.element_sum(u0.values(), |g| lagrangian(g, 1.0, p)) + disc.source_term(u0.values(), spec.f.values()))
}

/// Discrete harmonic extension of the boundary values of `g`.
pub fn harmonic_extension(g: &ScalarField) -> Result<ScalarField> {
    let grid = g.grid();
    let disc = Discretization::new(grid);
    let mut u: Vec<f64> = (0..grid.len())
        .map(|i| if disc.free[i] { 0.0 } else { g.values()[i] })
        .collect();
    // one Newton step on the Dirichlet energy is exact
    let curv = disc.curvatures(&u, 1.0, 2.0);
    let rhs: Vec<f64> = disc
        .flux_gradient(&u, 1.0, 2.0)
        .iter()
        .zip(&disc.free)
        .map(|(r, &free)| if free { -r } else { 0.0 })
        .collect();
    let step = match newton_step(&disc, &curv, &rhs, &SolverOptions::default()) {
        Some((step, true)) => step,
        _ => return Err(Error::Solver("harmonic extension: linear solve failed".into())),
    };
    for (ui, si) in u.iter_mut().zip(&step) {
        *ui += si;
    }
    ScalarField::new(grid.clone(), u)
}

/// Solves `H d = rhs` on free nodes, `d = 0` on the boundary. The flag is
/// false when the iterative solver stopped early.
fn newton_step(
    disc: &Discretization,
    curv: &[discrete::ElementCurvature],
    rhs: &[f64],
    opts: &SolverOptions,
) -> Option<(Vec<f64>, bool)> {
    if disc.dim() == 1 {
        let (mut lo, mut di, mut up) = disc.tridiagonal(curv);
        for i in 0..di.len() {
            if !disc.free[i] {
                lo[i] = 0.0;
                up[i] = 0.0;
                di[i] = 1.0;
            }
        }
        linalg::solve_tridiagonal(&lo, &di, &up, rhs).map(|d| (d, true))
    } else {
        let mask = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .zip(&disc.free)
                .map(|(x, &free)| if free { *x } else { 0.0 })
                .collect()
        };
        let diag: Vec<f64> = disc
            .hess_diag(curv)
            .iter()
            .zip(&disc.free)
            .map(|(d, &free)| if free { *d } else { 1.0 })
            .collect();
        let apply = |v: &[f64]| {
            let hv = disc.hess_vec(curv, &mask(v));
            hv.iter()
                .zip(v)
                .zip(&disc.free)
                .map(|((h, x), &free)| if free { *h } else { *x })
                .collect()
        };
        let out = linalg::pcg(apply, &diag, rhs, opts.cg_rel_tol, opts.cg_max_iterations);
        // an inexact step is still a descent direction; the line search decides
        let converged = out.converged;
        out.x.iter().all(|v| v.is_finite()).then_some((out.x, converged))
    }
}

pub fn solve(spec: &ProblemSpec) -> Result<SolveResult> {
    solve_with(spec, &SolverOptions::default(), None)
}

/// Damped Newton on the interior unknowns with an Armijo backtracking line
/// search; falls back to a lumped-mass scaled gradient step whenever the
/// Newton direction does not decrease the energy. Starts from `init` or from
/// the harmonic extension of `g`.
pub fn solve_with(spec: &ProblemSpec, opts: &SolverOptions, init: Option<&ScalarField>) -> Result<SolveResult> {
    let (eps, p) = (spec.params.eps, spec.params.p);
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("solve requires eps > 0, got {eps}")));
    }
    let grid = spec.grid();
    let disc = Discretization::new(grid);
    let start = match init {
        Some(u0) => {
            check_shape(spec, u0)?;
            u0.clone()
        }
        None => harmonic_extension(&spec.g)?,
    };
    let mut u: Vec<f64> = (0..grid.len())
        .map(|i| {
            if disc.free[i] {
                start.values()[i]
            } else {
                spec.g.values()[i]
            }
        })
        .collect();

    let tol_res = spec.residual_tolerance(opts);
    let mut trace = Vec::new();
    let mut e = discrete_energy(&disc, spec, &u);
    let mut grad = energy_gradient(&disc, spec, &u);
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let grad_norm = norm(&grad);
        trace.push(TraceRow {
            iteration: iterations,
            energy: e,
            grad_norm,
        });
        let tol_grad = opts.grad_rel_tol * (1.0 + e.abs());
        if grad_norm <= tol_grad && residual_rms(&disc, &grad) <= tol_res {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        let curv = disc.curvatures(&u, eps, p);
        let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
        let newton = newton_step(&disc, &curv, &rhs, opts).map(|(d, _)| d);
        let scaled_grad: Vec<f64> = rhs.iter().zip(&disc.node_weights).map(|(r, m)| r / m).collect();
        let mut accepted = None;
        for dir in newton.iter().chain(std::iter::once(&scaled_grad)) {
            let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
            if !(slope < 0.0) {
                continue;
            }
            if let Some(step) = line_search(&disc, spec, &u, e, &grad, dir, slope, opts) {
                accepted = Some(step);
                break;
            }
        }
        match accepted {
            Some((u_next, e_next, grad_next)) => {
                u = u_next;
                e = e_next;
                grad = grad_next;
            }
            None => break,
        }
    }

    let grad_norm = norm(&grad);
    let el_residual = residual_rms(&disc, &grad);
    Ok(SolveResult {
        u: ScalarField::new(grid.clone(), u)?,
        energy: e,
        el_residual,
        grad_norm,
        iterations,
        converged,
        trace,
        tol_res,
        tol_grad: opts.grad_rel_tol * (1.0 + e.abs()),
    })
}

type Step = (Vec<f64>, f64, Vec<f64>);

#[allow(clippy::too_many_arguments)]
fn line_search(
    disc: &Discretization,
    spec: &ProblemSpec,
    u: &[f64],
    e: f64,
    grad: &[f64],
    dir: &[f64],
    slope: f64,
    opts: &SolverOptions,
) -> Option<Step> {
    // energy differences below this are rounding noise of the element sum
    let noise = 16.0 * f64::EPSILON * (disc.elements.len() as f64).sqrt() * (1.0 + e.abs());
    let grad_norm = norm(grad);
    let mut t = 1.0;
    for _ in 0..=opts.max_backtracks {
        let trial: Vec<f64> = u.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        let e_trial = discrete_energy(disc, spec, &trial);
        if e_trial.is_finite() {
            if e_trial <= e + opts.armijo * t * slope {
                let g = energy_gradient(disc, spec, &trial);
                return Some((trial, e_trial, g));
            }
            if t == 1.0 && e_trial <= e + noise && -slope <= noise {
                // predicted decrease is invisible in the energy; accept if the gradient shrinks
                let g = energy_gradient(disc, spec, &trial);
                if norm(&g) < grad_norm {
                    return Some((trial, e_trial.min(e), g));
                }
            }
        }
        t *= 0.5;
    }
    None
}
