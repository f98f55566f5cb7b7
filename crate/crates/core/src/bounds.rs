//! Closed-form error and cost formulas: BCH truncation order and time step,
//! the MPF error bound, the MPF step count `r`, its self-consistency checks,
//! and gate-count tables.

use std::f64::consts::E;

use serde::Serialize;

use crate::commutators::{factorial_bound, mu_untruncated_candidates, one_norm_power_bound};
use crate::error::{Error, Result};

/// Relative distance below which a ceiling argument is treated as integral.
const CEIL_SNAP: f64 = 1e-12;

/// `⌈x⌉`, except that values within rounding of an integer map to it.
pub fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= CEIL_SNAP * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// `p0 = ⌈ln(3N/ε)⌉`, required to exceed 1.
pub fn truncation_order(n_sites: f64, eps: f64) -> Result<usize> {
    positive("N", n_sites)?;
    positive("epsilon", eps)?;
    if eps >= 3.0 * n_sites {
        return Err(Error::InvalidInput(format!(
            "epsilon = {eps} >= 3N = {} gives a degenerate truncation order",
            3.0 * n_sites
        )));
    }
    let p0 = ceil_snapped((3.0 * n_sites / eps).ln());
    if p0 < 2.0 {
        return Err(Error::InvalidInput(format!(
            "truncation order {p0} < 2 at N = {n_sites}, epsilon = {eps}"
        )));
    }
    Ok(p0 as usize)
}

/// `1 / (8 e³ c_p p0 k g)` with `p0` given directly.
pub fn bch_time_step(p0: usize, repetition: usize, k: usize, g: f64) -> Result<f64> {
    positive("g", g)?;
    if k == 0 || repetition == 0 || p0 == 0 {
        return Err(Error::InvalidInput("k, c_p and p0 must be positive".into()));
    }
    Ok(1.0 / (8.0 * E.powi(3) * repetition as f64 * p0 as f64 * k as f64 * g))
}

/// `1 / (8 e³ c_p p0(N, ε) k g)`.
pub fn bch_time_condition(n_sites: f64, eps: f64, repetition: usize, k: usize, g: f64) -> Result<f64> {
    bch_time_step(truncation_order(n_sites, eps)?, repetition, k, g)
}

/// `4 max((p+1) N^{1/(p+1)}, e³ p0) k g`.
pub fn mu_lemma_bound(n_sites: f64, p: usize, p0: usize, k: usize, g: f64) -> f64 {
    let a = (p as f64 + 1.0) * n_sites.powf(1.0 / (p as f64 + 1.0));
    let b = E.powi(3) * p0 as f64;
    4.0 * a.max(b) * k as f64 * g
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MpfErrorBound {
    pub value: f64,
    /// `min(τ_bch, 1/(2 c_p μ))`.
    pub tau_limit: f64,
    pub admissible: bool,
}

/// `2 e^{1/2} ‖c‖₁ (c_p μ τ)^{m+1} + ‖c‖₁ ‖k‖₁ ε`, with the time-step
/// condition evaluated against `tau_bch`.
#[allow(clippy::too_many_arguments)]
pub fn mpf_error_bound(
    tau: f64,
    c_norm: f64,
    k_norm: f64,
    repetition: usize,
    mu: f64,
    m: usize,
    eps_step: f64,
    tau_bch: f64,
) -> MpfErrorBound {
    let cp = repetition as f64;
    let mu_limit = if mu > 0.0 { 1.0 / (2.0 * cp * mu) } else { f64::INFINITY };
    let tau_limit = tau_bch.min(mu_limit);
    let value = 2.0 * E.sqrt() * c_norm * (cp * mu * tau.abs()).powi(m as i32 + 1) + c_norm * k_norm * eps_step;
    MpfErrorBound {
        value,
        tau_limit,
        admissible: tau.abs() <= tau_limit,
    }
}

/// `m = ⌈ln(N g t / ε)⌉`.
pub fn select_m(n_sites: f64, g: f64, t: f64, eps: f64) -> Result<usize> {
    for (n, v) in [("N", n_sites), ("g", g), ("t", t), ("epsilon", eps)] {
        positive(n, v)?;
    }
    let x = n_sites * g * t / eps;
    if x <= 1.0 {
        return Err(Error::InvalidInput(format!("N g t / epsilon = {x} must exceed 1")));
    }
    Ok((ceil_snapped(x.ln()) as usize).max(1))
}

/// Inputs shared by the step-count formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct CostInputs {
    pub n_sites: f64,
    pub k: usize,
    pub g: f64,
    pub t: f64,
    pub eps: f64,
    pub p: usize,
    pub repetition: usize,
    pub m: usize,
    pub c_norm: f64,
    pub k_norm: f64,
}

impl CostInputs {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [
            ("N", self.n_sites),
            ("g", self.g),
            ("t", self.t),
            ("epsilon", self.eps),
            ("||c||_1", self.c_norm),
            ("||k||_1", self.k_norm),
        ] {
            positive(n, v)?;
        }
        if self.k == 0 || self.p == 0 || self.repetition == 0 || self.m == 0 {
            return Err(Error::InvalidInput("k, p, c_p and m must be positive".into()));
        }
        Ok(())
    }

    fn kgt(&self) -> f64 {
        self.k as f64 * self.g * self.t
    }

    fn n_root(&self) -> f64 {
        self.n_sites.powf(1.0 / (self.p as f64 + 1.0))
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepCount {
    pub r1: f64,
    pub r2: f64,
    pub r: u64,
    /// Per-step BCH accuracy `ε / (4 ‖c‖₁ ‖k‖₁ r)`.
    pub eps_step: f64,
}

/// The size-driven step count `r1` and the truncation-driven `r2`, with
/// `r = ⌈max(r1, r2)⌉`.
pub fn trotter_number(inp: &CostInputs) -> Result<StepCount> {
    inp.validate()?;
    let cp = inp.repetition as f64;
    let p1 = inp.p as f64 + 1.0;
    let inv_m = 1.0 / inp.m as f64;
    let base1 = cp * p1 * inp.kgt() * inp.n_root();
    let r1 = 8.0 * base1 * (32.0 * base1 * inp.c_norm / inp.eps).powf(inv_m);
    let e3 = E.powi(3);
    let log_arg = (8.0 * e3 * cp * inp.kgt()) * (12.0 * inp.c_norm * inp.k_norm * inp.n_sites) / inp.eps;
    let r2 = 40.0
        * E.powi(4)
        * cp
        * inp.kgt()
        * (inp.m as f64 + 1.0)
        * (160.0 * e3 * inp.c_norm * cp * inp.kgt() / inp.eps).powf(inv_m)
        * log_arg.ln().max(0.0).powf(1.0 + inv_m);
    let r = ceil_snapped(r1.max(r2)).max(1.0);
    if !r.is_finite() || r > u64::MAX as f64 {
        return Err(Error::InvalidInput(format!("step count {r} is not representable")));
    }
    let r = r as u64;
    Ok(StepCount {
        r1,
        r2,
        r,
        eps_step: inp.eps / (4.0 * inp.c_norm * inp.k_norm * r as f64),
    })
}

/// Both per-step inequalities the step count must satisfy, evaluated at `r`,
/// plus the time-step admissibility of `t/r`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepCountCheck {
    pub r: u64,
    /// Left side of the size-driven inequality.
    pub size_lhs: f64,
    /// Left side of the truncation-driven inequality.
    pub truncation_lhs: f64,
    /// Common right side `ε / (2r)`.
    pub rhs: f64,
    pub size_holds: bool,
    pub truncation_holds: bool,
    pub tau: f64,
    pub tau_bch: f64,
    pub tau_mu: f64,
    pub tau_holds: bool,
    /// The `a` parameter of the logarithmic inequality used to derive r2;
    /// the derivation assumes `a ≤ 1/5`.
    pub log_parameter: f64,
}

impl StepCountCheck {
    pub fn all_hold(&self) -> bool {
        self.size_holds && self.truncation_holds && self.tau_holds
    }
}

pub fn check_step_count(inp: &CostInputs, r: u64) -> Result<StepCountCheck> {
    inp.validate()?;
    if r == 0 {
        return Err(Error::InvalidInput("r must be positive".into()));
    }
    let rf = r as f64;
    let cp = inp.repetition as f64;
    let m = inp.m as i32;
    let tau = inp.t / rf;
    let eps_step = inp.eps / (4.0 * inp.c_norm * inp.k_norm * rf);
    let p0 = truncation_order(inp.n_sites, eps_step)?;
    let lead = 2.0 * 2f64.powi(m) * inp.c_norm;
    let extra = inp.c_norm * inp.k_norm * eps_step;
    let size_lhs = lead * (4.0 * cp * (inp.p as f64 + 1.0) * inp.n_root() * inp.k as f64 * inp.g * tau).powi(m + 1) + extra;
    let truncation_lhs = lead * (4.0 * E.powi(3) * cp * p0 as f64 * inp.k as f64 * inp.g * tau).powi(m + 1) + extra;
    let rhs = inp.eps / (2.0 * rf);
    let tau_bch = bch_time_step(p0, inp.repetition, inp.k, inp.g)?;
    let mu = mu_lemma_bound(inp.n_sites, inp.p, p0, inp.k, inp.g);
    let tau_mu = 1.0 / (2.0 * cp * mu);
    let e3 = E.powi(3);
    let log_parameter = inp.eps / (4.0 * inp.c_norm * (8.0 * e3 * cp * inp.kgt()).powi(m + 1))
        * (inp.eps / (12.0 * inp.c_norm * inp.k_norm * inp.n_sites)).powi(m);
    let tol = 1.0 + 1e-12;
    Ok(StepCountCheck {
        r,
        size_lhs,
        truncation_lhs,
        rhs,
        size_holds: size_lhs <= rhs * tol,
        truncation_holds: truncation_lhs <= rhs * tol,
        tau,
        tau_bch,
        tau_mu,
        tau_holds: tau <= tau_bch.min(tau_mu) * tol,
        log_parameter,
    })
}

/// `(ln x + 1)^{m+1} / x^m`.
pub fn log_ratio(x: f64, m: usize) -> f64 {
    (x.ln() + 1.0).powi(m as i32 + 1) / x.powi(m as i32)
}

/// `5^{1+1/m} a^{−1/m} ln^{1+1/m}(1/a)`.
pub fn log_ratio_threshold(a: f64, m: usize) -> f64 {
    let e = 1.0 + 1.0 / m as f64;
    5f64.powf(e) * a.powf(-1.0 / m as f64) * (1.0 / a).ln().powf(e)
}

/// Query count `‖c‖₁ ‖k‖₁ r` with symbolic scalings for comparison.
#[derive(Clone, Debug, Serialize)]
pub struct QueryComplexity {
    pub queries: f64,
    pub scaling: String,
    /// Dominant term `{N^{1/(p+1)} + ln²(Ngt/ε)} g t` without the polylog factor.
    pub dominant_term: f64,
    pub prior_scaling: String,
    /// `N^{1/(p+1)} g t` without the polylog factor.
    pub prior_dominant_term: f64,
}

pub fn query_complexity(inp: &CostInputs, r: u64) -> Result<QueryComplexity> {
    inp.validate()?;
    let ngt = inp.n_sites * inp.g * inp.t / inp.eps;
    let root = inp.n_root();
    Ok(QueryComplexity {
        queries: inp.c_norm * inp.k_norm * r as f64,
        scaling: format!(
            "O({{N^(1/{}) + log^2(Ngt/eps)}} g t * polylog(Ngt/eps))",
            inp.p + 1
        ),
        dominant_term: (root + ngt.ln().max(0.0).powi(2)) * inp.g * inp.t,
        prior_scaling: format!("O(N^(1/{}) g t * polylog(Ngt/eps))", inp.p + 1),
        prior_dominant_term: root * inp.g * inp.t,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangeClass {
    FiniteRange,
    LongRange,
}

impl std::str::FromStr for RangeClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finite-range" | "finite" => Ok(Self::FiniteRange),
            "long-range" | "long" => Ok(Self::LongRange),
            other => Err(Error::InvalidInput(format!("unknown range class {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, serde::Deserialize)]
pub struct TableInputs {
    pub n_sites: f64,
    pub g: f64,
    pub t: f64,
    pub eps: f64,
    pub k: usize,
    pub p: usize,
    /// Decay exponent of long-range couplings.
    pub decay: f64,
    pub dimension: f64,
    pub range_class: RangeClass,
}

/// One gate-count row: the evaluated expression with any unstated polylog
/// factor left symbolic.
#[derive(Clone, Debug, Serialize)]
pub struct GateCountRow {
    pub algorithm: String,
    pub expression: String,
    pub value: f64,
    pub polylog_factor: Option<String>,
}

pub fn table1_costs(inp: &TableInputs) -> Result<Vec<GateCountRow>> {
    for (n, v) in [("N", inp.n_sites), ("g", inp.g), ("t", inp.t), ("epsilon", inp.eps)] {
        positive(n, v)?;
    }
    if inp.p == 0 || inp.k == 0 {
        return Err(Error::InvalidInput("p and k must be positive".into()));
    }
    let n = inp.n_sites;
    let ngt = n * inp.g * inp.t;
    let x = ngt / inp.eps;
    let lx = x.ln();
    let l_eps = (1.0 / inp.eps).ln();
    let (pref, pref_s) = match inp.range_class {
        RangeClass::FiniteRange => (n, "N".to_string()),
        RangeClass::LongRange => (n.powi(inp.k as i32), format!("N^{}", inp.k)),
    };
    let p = inp.p as f64;
    let polylog = Some("polylog(Ngt/eps)".to_string());
    let mut rows = vec![
        GateCountRow {
            algorithm: "trotter".into(),
            expression: format!("{pref_s} g t (Ngt/eps)^(1/{})", inp.p),
            value: pref * inp.g * inp.t * x.powf(1.0 / p),
            polylog_factor: None,
        },
        GateCountRow {
            algorithm: "lcu".into(),
            expression: format!("{pref_s} N g t log(Ngt/eps)/log log(Ngt/eps)"),
            value: pref * ngt * lx / lx.ln(),
            polylog_factor: None,
        },
        GateCountRow {
            algorithm: "qsvt".into(),
            expression: format!("{pref_s} (Ngt + log(1/eps)/log log(1/eps))"),
            value: pref * (ngt + l_eps / l_eps.ln()),
            polylog_factor: None,
        },
        GateCountRow {
            algorithm: "mpf".into(),
            expression: format!("{pref_s} {{N^(1/{}) + log^2(Ngt/eps)}} g t polylog(Ngt/eps)", inp.p + 1),
            value: pref * (n.powf(1.0 / (p + 1.0)) + lx * lx) * inp.g * inp.t,
            polylog_factor: polylog.clone(),
        },
    ];
    match inp.range_class {
        RangeClass::FiniteRange => rows.push(GateCountRow {
            algorithm: "hhkl".into(),
            expression: "N g t polylog(Ngt/eps)".into(),
            value: ngt,
            polylog_factor: polylog,
        }),
        RangeClass::LongRange => {
            if inp.decay > 2.0 * inp.dimension {
                let expo = 2.0 * inp.dimension / (inp.decay - inp.dimension);
                rows.push(GateCountRow {
                    algorithm: "hhkl".into(),
                    expression: format!("N g t (Ngt/eps)^({expo})"),
                    value: ngt * x.powf(expo),
                    polylog_factor: None,
                });
            }
        }
    }
    Ok(rows)
}

pub fn table1_csv(rows: &[GateCountRow]) -> String {
    let mut out = String::from("algorithm,value,expression,polylog_factor\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.12e},\"{}\",{}\n",
            r.algorithm,
            r.value,
            r.expression,
            r.polylog_factor.clone().unwrap_or_default()
        ));
    }
    out
}

/// Candidate sequences of the untruncated growth rate over a finite window.
#[derive(Clone, Debug, Serialize)]
pub struct UntruncatedDiagnostics {
    pub rows: Vec<UntruncatedRow>,
    /// Largest τ with `α_q τ^q < 1` on the window, per source.
    pub tau_limit_factorial: f64,
    pub tau_limit_one_norm: f64,
    pub tau_limit_exact: Option<f64>,
    /// Sup candidates over (q, n) without a part cap, per q.
    pub mu_candidates_factorial: Vec<(usize, f64)>,
    pub mu_candidates_one_norm: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UntruncatedRow {
    pub q: usize,
    /// `α_q^{1/q}` from the factorial bound.
    pub factorial: f64,
    /// `α_q^{1/q}` from the one-norm power bound.
    pub one_norm: f64,
    pub exact: Option<f64>,
}

/// Reports `α_q^{1/q}` across `q_window` from both analytic sources (and
/// exact values where provided). The factorial source grows without bound;
/// the one-norm source stays at `2 Σ‖h‖`.
#[allow(clippy::too_many_arguments)]
pub fn untruncated_diagnostics(
    n_sites: usize,
    k: usize,
    g: f64,
    total_one_norm: f64,
    p: usize,
    m: usize,
    q_window: std::ops::RangeInclusive<usize>,
    exact: Option<&std::collections::BTreeMap<usize, f64>>,
) -> UntruncatedDiagnostics {
    let mut rows = Vec::new();
    let mut lim_f = f64::INFINITY;
    let mut lim_o = f64::INFINITY;
    let mut lim_e = exact.map(|_| f64::INFINITY);
    let root = |a: f64, q: usize| if a > 0.0 { a.powf(1.0 / q as f64) } else { 0.0 };
    for q in q_window.clone() {
        let f = root(factorial_bound(q, n_sites, k, g), q);
        let o = root(one_norm_power_bound(q, total_one_norm), q);
        let e = exact.and_then(|m| m.get(&q)).map(|a| root(*a, q));
        if f > 0.0 {
            lim_f = lim_f.min(1.0 / f);
        }
        if o > 0.0 {
            lim_o = lim_o.min(1.0 / o);
        }
        if let (Some(l), Some(v)) = (lim_e.as_mut(), e) {
            if v > 0.0 {
                *l = l.min(1.0 / v);
            }
        }
        rows.push(UntruncatedRow {
            q,
            factorial: f,
            one_norm: o,
            exact: e,
        });
    }
    let fact_src = |q: usize| factorial_bound(q, n_sites, k, g);
    let one_src = |q: usize| one_norm_power_bound(q, total_one_norm);
    UntruncatedDiagnostics {
        rows,
        tau_limit_factorial: lim_f,
        tau_limit_one_norm: lim_o,
        tau_limit_exact: lim_e,
        mu_candidates_factorial: mu_untruncated_candidates(&fact_src, p, m, q_window.clone(), 4),
        mu_candidates_one_norm: mu_untruncated_candidates(&one_src, p, m, q_window, 4),
    }
}

/// Full cost report for one parameter point.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub inputs: CostInputs,
    pub gamma_count: usize,
    pub richardson_terms: usize,
    /// Truncation order at the per-step accuracy.
    pub p0: usize,
    pub tau_max_bch: f64,
    pub tau_max_mpf: f64,
    /// μ from enumeration when supplied; otherwise the closed-form bound.
    pub mu_value: f64,
    pub mu_from_enumeration: bool,
    pub mu_lemma_bound: f64,
    pub r1: f64,
    pub r2: f64,
    pub r: u64,
    pub eps_step: f64,
    pub m_selected: usize,
    pub query: QueryComplexity,
    pub step_check: StepCountCheck,
    pub table1: Vec<GateCountRow>,
}

impl BoundReport {
    pub fn build(
        inputs: CostInputs,
        gamma_count: usize,
        richardson_terms: usize,
        mu_enumerated: Option<f64>,
        table: &TableInputs,
    ) -> Result<Self> {
        let steps = trotter_number(&inputs)?;
        let p0 = truncation_order(inputs.n_sites, steps.eps_step)?;
        let tau_max_bch = bch_time_step(p0, inputs.repetition, inputs.k, inputs.g)?;
        let mu_lemma = mu_lemma_bound(inputs.n_sites, inputs.p, p0, inputs.k, inputs.g);
        let mu_value = mu_enumerated.unwrap_or(mu_lemma);
        let mu_tau = if mu_value > 0.0 {
            1.0 / (2.0 * inputs.repetition as f64 * mu_value)
        } else {
            f64::INFINITY
        };
        Ok(Self {
            inputs,
            gamma_count,
            richardson_terms,
            p0,
            tau_max_bch,
            tau_max_mpf: tau_max_bch.min(mu_tau),
            mu_value,
            mu_from_enumeration: mu_enumerated.is_some(),
            mu_lemma_bound: mu_lemma,
            r1: steps.r1,
            r2: steps.r2,
            r: steps.r,
            eps_step: steps.eps_step,
            m_selected: select_m(inputs.n_sites, inputs.g, inputs.t, inputs.eps)?,
            query: query_complexity(&inputs, steps.r)?,
            step_check: check_step_count(&inputs, steps.r)?,
            table1: table1_costs(table)?,
        })
    }
}
