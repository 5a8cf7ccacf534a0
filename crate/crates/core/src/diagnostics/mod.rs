//! Conditioning and backward-stability reports for computed expectations.

mod perturb;

pub use perturb::{empirical_perturbation_check, PerturbationOptions, PerturbationReport};

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::engine::{ExpectationResult, SetupCache, TransientSystem};
use crate::linalg::{norm2, SolverKind};
use crate::masks::Mask;
use crate::{Error, Result};

/// Systems up to this size get an exact singular value decomposition.
pub const EXACT_SVD_LIMIT: usize = 64;
/// Default constant in `gamma~_k = c k u / (1 - c k u)`.
pub const DEFAULT_GAMMA_CONSTANT: f64 = 12.0;

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub(crate) fn float_or_tag<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// `||(I - A_T)^{-1}||_2`. Exact through an SVD for small systems, power
/// iteration otherwise.
pub fn inverse_norm_2(setup: &SetupCache) -> Result<f64> {
    let system = setup.system();
    if system.t() == 0 {
        return Err(Error::NoTransientStates);
    }
    if system.t() <= EXACT_SVD_LIMIT {
        inverse_norm_2_exact(system)
    } else {
        inverse_norm_2_power(system, 1e-6, 200)
    }
}

/// Reciprocal of the smallest singular value of `I - A_T`.
pub fn inverse_norm_2_exact(system: &TransientSystem) -> Result<f64> {
    let t = system.t();
    if t == 0 {
        return Err(Error::NoTransientStates);
    }
    let a = system.blocks().identity_minus_transient();
    let m = DMatrix::from_column_slice(t, t, a.as_slice());
    let sv = m.singular_values();
    let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(1.0 / smallest)
}

/// Power iteration on `x -> (I - A_T)^{-1} (I - A_T)^{-T} x`, two triangular
/// solves per step, until the estimate moves by less than `rel_tol`.
pub fn inverse_norm_2_power(system: &TransientSystem, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let t = system.t();
    if t == 0 {
        return Err(Error::NoTransientStates);
    }
    let mut x = vec![1.0 / (t as f64).sqrt(); t];
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        system.solve_transpose(&mut x);
        system.solve(&mut x);
        let lambda = norm2(&x);
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Internal("power iteration broke down".into()));
        }
        for v in x.iter_mut() {
            *v /= lambda;
        }
        let next = lambda.sqrt();
        let done = (next - estimate).abs() <= rel_tol * next;
        estimate = next;
        if done {
            break;
        }
    }
    Ok(estimate)
}

/// Relative condition numbers of `psi = tr(M D T*)` with respect to `M`, `T`
/// and `mu`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub expectation: f64,
    #[serde(serialize_with = "float_or_tag")]
    pub kappa: f64,
    #[serde(serialize_with = "float_or_tag")]
    pub kappa_m_bound: f64,
    #[serde(serialize_with = "float_or_tag")]
    pub kappa_t_bound: f64,
    #[serde(serialize_with = "float_or_tag")]
    pub kappa_mu_bound: f64,
    pub inv_norm_2: f64,
    pub frob_m: f64,
    pub frob_t: f64,
    #[serde(serialize_with = "float_or_tag")]
    pub cos_theta: f64,
    /// Set when `psi == 0`, making every relative condition number infinite.
    pub zero_expectation: bool,
    pub solver: Option<SolverKind>,
}

/// Assembles the condition report for an expectation computed from `setup`.
pub fn condition_bounds(
    setup: &SetupCache,
    mask: &Mask,
    expectation: &ExpectationResult,
) -> Result<ConditionReport> {
    if expectation.chain_id != setup.chain_id() {
        return Err(Error::ChainMismatch);
    }
    let chain = setup.chain();
    let psi = expectation.value;
    let inv = inverse_norm_2(setup)?;
    let frob_m = mask.frobenius_norm(chain)?;
    let frob_t = chain.frobenius_norm();
    let zero = psi == 0.0;
    let kappa = if zero {
        f64::INFINITY
    } else {
        frob_m * frob_t * inv / psi.abs()
    };
    let td = setup.scaled_frobenius_norm();
    let cos_theta = if td == 0.0 || frob_m == 0.0 {
        0.0
    } else {
        psi / (td * frob_m)
    };
    Ok(ConditionReport {
        expectation: psi,
        kappa,
        kappa_m_bound: kappa,
        kappa_t_bound: kappa * (1.0 + frob_t * inv),
        kappa_mu_bound: kappa,
        inv_norm_2: inv,
        frob_m,
        frob_t,
        cos_theta,
        zero_expectation: zero,
        solver: setup.solver(),
    })
}

/// Unit roundoff of IEEE double precision.
pub const DOUBLE_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Componentwise backward-error bounds for the orthogonal-triangular
/// algorithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub n: usize,
    pub t: usize,
    pub u: f64,
    pub c: f64,
    #[serde(serialize_with = "float_or_tag")]
    pub gamma_n2: f64,
    #[serde(serialize_with = "float_or_tag")]
    pub gamma_tilde_n2: f64,
    /// Relative per-column bound on the backward error in `T`.
    #[serde(serialize_with = "float_or_tag")]
    pub delta_t_bound: f64,
    /// Relative per-column bound on the backward error in `M`.
    #[serde(serialize_with = "float_or_tag")]
    pub delta_m_bound: f64,
    pub applicable: bool,
    /// Solver the report refers to. The bounds are derived for the
    /// orthogonal-triangular solver; with pivot-free elimination they are
    /// indicative only.
    pub solver: Option<SolverKind>,
}

impl StabilityReport {
    pub fn with_solver(mut self, solver: Option<SolverKind>) -> Self {
        self.solver = solver;
        self
    }

    /// True when the bounds were derived for the solver in use.
    pub fn solver_covered(&self) -> bool {
        !matches!(self.solver, Some(SolverKind::PivotFreeLu))
    }
}

/// `gamma_k = k u / (1 - k u)`, infinite once `k u >= 1`.
pub fn gamma(k: f64, u: f64) -> f64 {
    let ku = k * u;
    if ku >= 1.0 {
        f64::INFINITY
    } else {
        ku / (1.0 - ku)
    }
}

/// Bounds for an `n`-state chain with `t` transient states, constant `c` and
/// unit roundoff `u`. Outside the bounds' range of validity `applicable` is
/// false and both bounds are infinite.
pub fn stability_bounds(n: usize, t: usize, c: f64, u: f64) -> StabilityReport {
    let n2 = (n as f64) * (n as f64);
    let sqrt_n = (n as f64).sqrt();
    let gamma_n2 = gamma(n2, u);
    let gt = gamma(c * n2, u);
    let margin = 1.0 - 4.0 * sqrt_n * gt;
    let applicable = gt.is_finite() && margin > 0.0;
    let (delta_t_bound, delta_m_bound) = if applicable {
        (2.0 * sqrt_n * gt, (1.0 + 2.0 * sqrt_n) * gt / margin.sqrt())
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    StabilityReport {
        n,
        t,
        u,
        c,
        gamma_n2,
        gamma_tilde_n2: gt,
        delta_t_bound,
        delta_m_bound,
        applicable,
        solver: None,
    }
}
