//! Multi-product formulas `M(τ) = Σ_j c_j T_p(τ/k_j)^{k_j}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::dense::{spectral_norm, DenseOperator};
use crate::error::{Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::hamiltonian::HamiltonianSpec;
use crate::trotter::{ProductFormulaPlan, TrotterEvaluator};

/// Largest J accepted by the plain linear solve.
pub const LINEAR_SOLVE_MAX_TERMS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientSource {
    /// Coefficients solve the Richardson system for a symmetric base formula.
    Richardson,
    /// Externally supplied coefficients and order.
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MpfSpec {
    base_order: usize,
    k_values: Vec<u32>,
    c_values: Vec<f64>,
    order: usize,
    source: CoefficientSource,
}

fn validate_steps(k: &[u32]) -> Result<()> {
    if k.is_empty() {
        return Err(Error::InvalidInput("at least one step multiplier is required".into()));
    }
    if k[0] == 0 {
        return Err(Error::InvalidInput("step multipliers must be positive".into()));
    }
    for w in k.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidInput(format!("duplicate step multiplier {}", w[0])));
        }
        if w[0] > w[1] {
            return Err(Error::InvalidInput(format!(
                "step multipliers must be strictly increasing, got {} before {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// `c_j = ∏_{i≠j} k_j² / (k_j² − k_i²)`.
pub fn solve_coefficients(k: &[u32]) -> Result<Vec<f64>> {
    validate_steps(k)?;
    Ok(k.iter()
        .enumerate()
        .map(|(j, &kj)| {
            let kj2 = (kj as f64).powi(2);
            k.iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, &ki)| kj2 / (kj2 - (ki as f64).powi(2)))
                .product()
        })
        .collect())
}

/// The same coefficients from an LU solve of the Vandermonde system in
/// `x_j = k_j^{-2}`: `Σ_j c_j x_j^i = δ_{i0}` for `i = 0..J−1`.
pub fn solve_coefficients_linear(k: &[u32]) -> Result<Vec<f64>> {
    validate_steps(k)?;
    let j = k.len();
    if j > LINEAR_SOLVE_MAX_TERMS {
        return Err(Error::InvalidInput(format!(
            "linear solve limited to J <= {LINEAR_SOLVE_MAX_TERMS}, got {j}"
        )));
    }
    let a = DMatrix::from_fn(j, j, |row, col| (k[col] as f64).powi(-2 * row as i32));
    let mut b = DVector::zeros(j);
    b[0] = 1.0;
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::InvalidInput("Vandermonde system is singular".into()))?;
    Ok(sol.iter().copied().collect())
}

impl MpfSpec {
    /// Richardson coefficients for a symmetric order-`base_order` formula;
    /// the resulting order is `2J`.
    pub fn richardson(base_order: usize, k_values: &[u32]) -> Result<Self> {
        if base_order == 0 || base_order % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "Richardson extrapolation needs an even base order, got {base_order}"
            )));
        }
        let c_values = solve_coefficients(k_values)?;
        Ok(Self {
            base_order,
            order: 2 * k_values.len(),
            k_values: k_values.to_vec(),
            c_values,
            source: CoefficientSource::Richardson,
        })
    }

    /// `k_j = j` for `j = 1..=J`.
    pub fn richardson_consecutive(base_order: usize, terms: usize) -> Result<Self> {
        let k: Vec<u32> = (1..=terms as u32).collect();
        Self::richardson(base_order, &k)
    }

    pub fn custom(base_order: usize, order: usize, k_values: &[u32], c_values: &[f64]) -> Result<Self> {
        validate_steps(k_values)?;
        if k_values.len() != c_values.len() {
            return Err(Error::InvalidInput(format!(
                "{} multipliers but {} coefficients",
                k_values.len(),
                c_values.len()
            )));
        }
        if c_values.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("coefficients must be finite".into()));
        }
        Ok(Self {
            base_order,
            order,
            k_values: k_values.to_vec(),
            c_values: c_values.to_vec(),
            source: CoefficientSource::Custom,
        })
    }

    pub fn base_order(&self) -> usize {
        self.base_order
    }

    /// m: the order of the combined formula.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> usize {
        self.k_values.len()
    }

    pub fn k_values(&self) -> &[u32] {
        &self.k_values
    }

    pub fn c_values(&self) -> &[f64] {
        &self.c_values
    }

    pub fn source(&self) -> CoefficientSource {
        self.source
    }

    pub fn c_norm(&self) -> f64 {
        self.c_values.iter().map(|c| c.abs()).sum()
    }

    pub fn k_norm(&self) -> f64 {
        self.k_values.iter().map(|&k| k as f64).sum()
    }

    /// Residuals of `Σ c_j = 1` and `Σ c_j k_j^{-2i} = 0`, `i = 1..J−1`.
    pub fn residuals(&self) -> Vec<f64> {
        (0..self.terms())
            .map(|i| {
                let s: f64 = self
                    .c_values
                    .iter()
                    .zip(&self.k_values)
                    .map(|(c, &k)| c * (k as f64).powi(-2 * i as i32))
                    .sum();
                if i == 0 {
                    s - 1.0
                } else {
                    s
                }
            })
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().iter().fold(0.0_f64, |m, r| m.max(r.abs()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub terms: usize,
    pub k_values: Vec<u32>,
    pub c_values: Vec<f64>,
    pub c_norm: f64,
    pub k_norm: f64,
    pub max_residual: f64,
    /// Largest difference between closed-form and linear-solve coefficients,
    /// when the linear solve is within its size guard.
    pub linear_solve_deviation: Option<f64>,
}

pub fn condition_report(spec: &MpfSpec) -> ConditionReport {
    let linear_solve_deviation = solve_coefficients_linear(spec.k_values()).ok().map(|lin| {
        lin.iter()
            .zip(spec.c_values())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    });
    ConditionReport {
        terms: spec.terms(),
        k_values: spec.k_values().to_vec(),
        c_values: spec.c_values().to_vec(),
        c_norm: spec.c_norm(),
        k_norm: spec.k_norm(),
        max_residual: spec.max_residual(),
        linear_solve_deviation,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionSweep {
    pub rows: Vec<ConditionReport>,
    /// Fit of ln ‖c‖₁ against ln J.
    pub c_norm_fit: Option<LinearFit>,
    /// Fit of ln ‖k‖₁ against ln J.
    pub k_norm_fit: Option<LinearFit>,
    /// Local log-log exponents of ‖c‖₁ between consecutive J.
    pub c_norm_local_exponents: Vec<f64>,
    /// True when the local exponents of ‖c‖₁ never increase along the sweep,
    /// the behaviour of a sub-polynomial sequence.
    pub c_norm_subpolynomial: bool,
}

/// Coefficient norms across J for a multiplier scheme.
pub fn condition_sweep<F>(scheme: F, terms: &[usize]) -> Result<ConditionSweep>
where
    F: Fn(usize) -> Vec<u32>,
{
    let mut rows = Vec::new();
    for &j in terms {
        let k = scheme(j);
        if k.len() != j {
            return Err(Error::InvalidInput(format!("scheme returned {} multipliers for J = {j}", k.len())));
        }
        rows.push(condition_report(&MpfSpec::richardson(2, &k)?));
    }
    let lj: Vec<f64> = rows.iter().map(|r| (r.terms as f64).ln()).collect();
    let lc: Vec<f64> = rows.iter().map(|r| r.c_norm.ln()).collect();
    let lk: Vec<f64> = rows.iter().map(|r| r.k_norm.ln()).collect();
    let local: Vec<f64> = (1..rows.len())
        .map(|i| (lc[i] - lc[i - 1]) / (lj[i] - lj[i - 1]))
        .collect();
    Ok(ConditionSweep {
        c_norm_fit: linear_fit(&lj, &lc).ok(),
        k_norm_fit: linear_fit(&lj, &lk).ok(),
        c_norm_subpolynomial: local.windows(2).all(|w| w[1] <= w[0] + 1e-12),
        c_norm_local_exponents: local,
        rows,
    })
}

/// Dense evaluation of an MPF over a cached product-formula evaluator.
pub struct MpfEvaluator {
    spec: MpfSpec,
    trotter: TrotterEvaluator,
}

impl MpfEvaluator {
    pub fn new(spec: &MpfSpec, plan: &ProductFormulaPlan, ham: &HamiltonianSpec, dense_cap: usize) -> Result<Self> {
        if spec.source() == CoefficientSource::Richardson {
            if plan.order() != spec.base_order() {
                return Err(Error::InvalidInput(format!(
                    "MPF built for base order {}, plan has order {}",
                    spec.base_order(),
                    plan.order()
                )));
            }
            if !plan.is_symmetric() {
                return Err(Error::InvalidInput(
                    "Richardson coefficients require a symmetric even-order plan".into(),
                ));
            }
        }
        Ok(Self {
            spec: spec.clone(),
            trotter: TrotterEvaluator::new(plan, ham, dense_cap)?,
        })
    }

    pub fn spec(&self) -> &MpfSpec {
        &self.spec
    }

    pub fn trotter(&self) -> &TrotterEvaluator {
        &self.trotter
    }

    /// `Σ_j c_j T_p(τ/k_j)^{k_j}`.
    pub fn evaluate(&self, tau: f64) -> DenseOperator {
        let mut out = DenseOperator::zeros(self.trotter.n_sites());
        for (&c, &k) in self.spec.c_values().iter().zip(self.spec.k_values()) {
            let step = self.trotter.evaluate(tau / k as f64);
            out = out.add(&step.pow(k as u64).scale(Complex64::new(c, 0.0)));
        }
        out
    }

    /// `‖exp(−iHτ) − M(τ)‖`.
    pub fn error(&self, tau: f64) -> f64 {
        spectral_norm(&self.trotter.exact(tau).sub(&self.evaluate(tau)))
    }

    /// `‖exp(−iHt) − M(t/r)^r‖`.
    pub fn long_time_error(&self, t: f64, r: u64) -> Result<f64> {
        if r == 0 {
            return Err(Error::InvalidInput("r must be positive".into()));
        }
        let step = self.evaluate(t / r as f64);
        Ok(spectral_norm(&self.trotter.exact(t).sub(&step.pow(r))))
    }

    /// `r · ‖exp(−iHt/r) − M(t/r)‖`, the per-step triangle-inequality estimate.
    pub fn extrapolated_error(&self, t: f64, r: u64) -> f64 {
        r as f64 * self.error(t / r as f64)
    }
}
