//! Maximum-entropy fitting under moment constraints on a finite space.
//!
//! The primal problem maximizes `H(p)` subject to `E_p f^α = ν_α` for
//! `α ∈ A`. Its solution has the exponential form
//! `p(ω) = exp(Σ_α λ_α f^α(ω))` with `λ_0 = -ψ(λ)`, and is found by damped
//! Newton iterations on the convex dual `ψ(λ) - λ·ν`.
//!
//! Internally the constraint columns are centered, scaled and
//! orthonormalized under the uniform measure; the Hessian of the dual is
//! then the covariance of the orthonormal features, which equals the
//! identity at the uniform distribution.

mod info;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use info::{entropy, kl, moments, InfoError};

use crate::distribution::Distribution;
use crate::features::Term;
use crate::span::{OrthoBasis, DEFAULT_PIVOT_TOL};

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("column 0 must be the all-ones normalization constraint with target 1")]
    BadNormalization,
    #[error("constraint column {column} ({term}) is linearly dependent on earlier columns")]
    RankDeficient { column: usize, term: String },
    #[error("targets are not realizable by a strictly positive distribution (dual norm {dual_norm:.3e}, min cell {min_cell:.3e})")]
    NotRealizable { dual_norm: f64, min_cell: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    MaxIterations { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Bound on the ∞-norm of the standardized moment residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative pivot threshold for the column-independence check.
    pub pivot_tol: f64,
    /// Largest dual norm (orthonormal coordinates) before the targets are
    /// declared to lie on the boundary of the moment polytope.
    pub dual_bound: f64,
    /// A converged density with a cell below this mass is treated as a
    /// boundary solution.
    pub boundary_mass: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            pivot_tol: DEFAULT_PIVOT_TOL,
            dual_bound: 1e3,
            boundary_mass: 1e-13,
        }
    }
}

/// Moment constraints `E_p f^α = ν_α` for `α ∈ A`; entry 0 is normalization.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    terms: Vec<Term>,
    columns: Vec<Vec<f64>>,
    targets: Vec<f64>,
    target: Option<Distribution>,
}

impl ConstraintSet {
    pub fn new(terms: Vec<Term>, columns: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self, SolveError> {
        if terms.is_empty() || terms.len() != columns.len() || terms.len() != targets.len() {
            return Err(SolveError::ShapeMismatch(format!(
                "{} terms, {} columns, {} targets",
                terms.len(),
                columns.len(),
                targets.len()
            )));
        }
        let k = columns[0].len();
        if k == 0 || columns.iter().any(|c| c.len() != k) {
            return Err(SolveError::ShapeMismatch("columns differ in length".into()));
        }
        if columns[0].iter().any(|&v| v != 1.0) || (targets[0] - 1.0).abs() > 1e-12 {
            return Err(SolveError::BadNormalization);
        }
        Ok(Self {
            terms,
            columns,
            targets,
            target: None,
        })
    }

    /// Targets taken as the moments of `target`, which is kept for KL
    /// reporting.
    pub fn from_target(terms: Vec<Term>, columns: Vec<Vec<f64>>, target: &Distribution) -> Result<Self, SolveError> {
        let targets = moments(target, &columns).map_err(|e| SolveError::ShapeMismatch(e.to_string()))?;
        let mut cs = Self::new(terms, columns, targets)?;
        cs.targets[0] = 1.0;
        cs.target = Some(target.clone());
        Ok(cs)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn target_distribution(&self) -> Option<&Distribution> {
        self.target.as_ref()
    }

    pub fn space_len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A fitted exponential-family density.
#[derive(Debug, Clone, Serialize)]
pub struct MaxEntModel {
    pub terms: Vec<Term>,
    /// Raw coefficients; `lambda[0] = -psi`.
    pub lambda: Vec<f64>,
    /// Log-partition of the non-constant terms.
    pub psi: f64,
    #[serde(skip)]
    pub density: Distribution,
    #[serde(skip)]
    log_density: Vec<f64>,
    /// Fitted moments `s_α`.
    pub moments: Vec<f64>,
    /// ∞-norm of the standardized moment residual.
    pub residual_inf: f64,
    /// ∞-norm of the raw moment residual.
    pub raw_residual_inf: f64,
    pub iterations: usize,
    /// Dual objective after each accepted Newton step.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl MaxEntModel {
    pub fn log_density(&self) -> &[f64] {
        &self.log_density
    }

    pub fn entropy(&self) -> f64 {
        -self
            .density
            .probs()
            .iter()
            .zip(&self.log_density)
            .map(|(p, lp)| if *p > 0.0 { p * lp } else { 0.0 })
            .sum::<f64>()
    }

    /// `D(target ‖ model)` computed from the exact log-density.
    pub fn kl_from(&self, target: &Distribution) -> f64 {
        target
            .probs()
            .iter()
            .zip(&self.log_density)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, lq)| p * (p.ln() - lq))
            .sum::<f64>()
            .max(0.0)
    }

    /// Raw coefficients for the non-constant terms, for warm starts.
    pub fn coefficients(&self) -> &[f64] {
        &self.lambda[1..]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    /// `D(P̂‖P_A)` when the target distribution is known.
    pub kl_to_target: Option<f64>,
    pub entropy: f64,
    pub residual_inf: f64,
    pub iterations: usize,
    pub moments: Vec<f64>,
}

pub fn solve_maxent(cs: &ConstraintSet, opts: &SolverOptions) -> Result<(MaxEntModel, FitReport), SolveError> {
    solve_maxent_warm(cs, opts, None)
}

fn lse(s: &DVector<f64>) -> f64 {
    let m = s.max();
    m + s.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Like [`solve_maxent`], starting from raw coefficients `init` for the
/// non-constant terms (missing trailing entries are zero).
pub fn solve_maxent_warm(
    cs: &ConstraintSet,
    opts: &SolverOptions,
    init: Option<&[f64]>,
) -> Result<(MaxEntModel, FitReport), SolveError> {
    let k = cs.space_len();
    let mut basis = OrthoBasis::new(k, opts.pivot_tol);
    for (j, col) in cs.columns.iter().enumerate().skip(1) {
        if !basis.push(col) {
            return Err(SolveError::RankDeficient {
                column: j,
                term: cs.terms[j].tuple_notation(),
            });
        }
    }
    let d = cs.len() - 1;
    let stds: Vec<_> = basis.standardizations().collect();
    // upper-triangular r[i][j] with z_j = Σ_i r[i][j] q_i
    let mut r = DMatrix::<f64>::zeros(d, d);
    for (j, col) in basis.r_columns().iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            r[(i, j)] = v;
        }
    }
    let mut qmat = DMatrix::<f64>::zeros(k, d);
    for (j, q) in basis.directions().iter().enumerate() {
        qmat.column_mut(j).copy_from_slice(q);
    }

    let nu_std = DVector::from_iterator(
        d,
        (0..d).map(|j| (cs.targets[j + 1] - stds[j].mean) / stds[j].sd),
    );
    let t = r
        .tr_solve_upper_triangular(&nu_std)
        .ok_or_else(|| SolveError::RankDeficient {
            column: 1,
            term: "triangular factor".into(),
        })?;

    let mut mu = match init {
        Some(lam) => {
            let beta = DVector::from_iterator(
                d,
                (0..d).map(|j| lam.get(j).copied().unwrap_or(0.0) * stds[j].sd),
            );
            &r * beta
        }
        None => DVector::zeros(d),
    };

    let objective = |mu: &DVector<f64>| -> (f64, DVector<f64>) {
        let s = &qmat * mu;
        (lse(&s) - mu.dot(&t), s)
    };

    let (mut phi, mut s) = objective(&mu);
    let mut trace = vec![phi];
    let mut iterations = 0;
    let (density, log_density, residual) = loop {
        let psi = lse(&s);
        let logp: Vec<f64> = s.iter().map(|v| v - psi).collect();
        let p = DVector::from_iterator(k, logp.iter().map(|v| v.exp()));
        let m = qmat.tr_mul(&p);
        let g = &m - &t;
        let resid_std = r.tr_mul(&g);
        let residual = resid_std.amax();
        if residual <= opts.tol {
            break (p, logp, residual);
        }
        if iterations >= opts.max_iter {
            let min_cell = p.min();
            if min_cell < opts.boundary_mass {
                return Err(SolveError::NotRealizable {
                    dual_norm: mu.amax(),
                    min_cell,
                });
            }
            return Err(SolveError::MaxIterations { iterations, residual });
        }
        if mu.amax() > opts.dual_bound {
            return Err(SolveError::NotRealizable {
                dual_norm: mu.amax(),
                min_cell: p.min(),
            });
        }
        iterations += 1;

        let mut qp = qmat.clone();
        for (kk, &pk) in p.iter().enumerate() {
            qp.row_mut(kk).scale_mut(pk);
        }
        let mut h = qmat.tr_mul(&qp) - &m * m.transpose();
        let step = loop {
            if let Some(ch) = h.clone().cholesky() {
                break -ch.solve(&g);
            }
            let ridge = 1e-12 * h.trace().abs().max(1e-300);
            for i in 0..d {
                h[(i, i)] += ridge;
            }
        };

        let slope = g.dot(&step);
        let mut alpha = 1.0;
        let accepted = loop {
            let cand = &mu + alpha * &step;
            let (phi_new, s_new) = objective(&cand);
            if phi_new <= phi + 1e-4 * alpha * slope + 1e-15 * phi.abs().max(1.0) {
                break Some((cand, phi_new, s_new));
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                break None;
            }
        };
        match accepted {
            Some((cand, phi_new, s_new)) => {
                mu = cand;
                phi = phi_new;
                s = s_new;
                trace.push(phi);
            }
            None => {
                // no representable decrease left
                let min_cell = p.min();
                if min_cell < opts.boundary_mass {
                    return Err(SolveError::NotRealizable {
                        dual_norm: mu.amax(),
                        min_cell,
                    });
                }
                return Err(SolveError::MaxIterations { iterations, residual });
            }
        }
    };

    let min_cell = density.min();
    if min_cell < opts.boundary_mass {
        return Err(SolveError::NotRealizable {
            dual_norm: mu.amax(),
            min_cell,
        });
    }

    // back to raw coefficients
    let beta = r
        .solve_upper_triangular(&mu)
        .expect("nonsingular triangular factor");
    let psi_orth = lse(&s);
    let mut lambda = Vec::with_capacity(d + 1);
    let mut intercept = -psi_orth;
    for j in 0..d {
        intercept -= beta[j] * stds[j].mean / stds[j].sd;
    }
    lambda.push(intercept);
    lambda.extend((0..d).map(|j| beta[j] / stds[j].sd));

    let density = Distribution::from_weights(density.as_slice()).expect("softmax output");
    let fitted = moments(&density, &cs.columns).expect("shapes checked");
    let raw_residual_inf = fitted
        .iter()
        .zip(&cs.targets)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let model = MaxEntModel {
        terms: cs.terms.clone(),
        lambda,
        psi: -intercept,
        density,
        log_density,
        moments: fitted,
        residual_inf: residual,
        raw_residual_inf,
        iterations,
        objective_trace: trace,
    };
    let report = FitReport {
        kl_to_target: cs.target.as_ref().map(|t| model.kl_from(t)),
        entropy: model.entropy(),
        residual_inf: model.residual_inf,
        iterations: model.iterations,
        moments: model.moments.clone(),
    };
    Ok((model, report))
}

/// Score-equation check for the multinomial likelihood `Σ_k n_k log p_k(λ)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GradientCheck {
    /// `‖∇_λ ll‖_∞`
    pub abs_inf: f64,
    /// `abs_inf / (N · max_α max_k |f^α(ω_k)|)`
    pub relative: f64,
    pub total: u64,
}

/// Gradient of the log-likelihood of `counts` at the model's `λ`:
/// `∂ll/∂λ_α = Σ_k n_k f^α(ω_k) - N E_p f^α`.
pub fn loglik_gradient_check(
    model: &MaxEntModel,
    columns: &[Vec<f64>],
    counts: &[u64],
) -> Result<GradientCheck, SolveError> {
    let k = model.density.len();
    if counts.len() != k || columns.len() != model.terms.len() || columns.iter().any(|c| c.len() != k) {
        return Err(SolveError::ShapeMismatch("counts/columns do not match the model".into()));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(SolveError::ShapeMismatch("counts sum to zero".into()));
    }
    let n = total as f64;
    let mut abs_inf: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for col in columns {
        let observed: f64 = counts.iter().zip(col).map(|(&c, v)| c as f64 * v).sum();
        let expected: f64 = model.density.probs().iter().zip(col).map(|(p, v)| p * v).sum();
        abs_inf = abs_inf.max((observed - n * expected).abs());
        scale = scale.max(col.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    }
    Ok(GradientCheck {
        abs_inf,
        relative: abs_inf / (n * scale.max(f64::MIN_POSITIVE)),
        total,
    })
}

/// Evaluates `exp(Σ_α λ_α f^α)` for given raw coefficients of the
/// non-constant columns, normalizing to a distribution.
pub fn density_from_coefficients(columns: &[Vec<f64>], coefficients: &[f64]) -> Distribution {
    let k = columns[0].len();
    let s: Vec<f64> = (0..k)
        .map(|x| {
            columns[1..]
                .iter()
                .zip(coefficients)
                .map(|(c, l)| c[x] * l)
                .sum()
        })
        .collect();
    let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = s.iter().map(|v| (v - m).exp()).collect();
    Distribution::from_weights(&w).expect("positive weights")
}
