//! Order-by-order BCH expansion of a product formula,
//! `T_p(τ) = exp(−iHτ − i Σ_{q≥2} Φ_q τ^q)`, and its truncations.
//!
//! `Φ_q` is assembled from the multilinear BCH polynomial
//! `φ_q(X_1..X_q) = q^{-2} Σ_σ (−1)^{d_σ} / C(q−1, d_σ) [X_σ1, [X_σ2, …, X_σq]]`
//! applied to stage generators, leftmost factor first. Since stage 1 acts
//! first, the leftmost factor of the product is the last stage.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::Serialize;

use crate::bounds::{bch_time_step, truncation_order};
use crate::commutators::alpha_com;
use crate::dense::{expm_hermitian_times_minus_i, spectral_norm, DenseOperator};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::pauli::{i_pow, NormConfig, NormMode, PauliSum};
use crate::trotter::{ProductFormulaPlan, TrotterEvaluator};

pub const DEFAULT_Q_MAX: usize = 6;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BchOptions {
    pub q_max: usize,
    pub norm: NormConfig,
    pub budget: u128,
}

impl Default for BchOptions {
    fn default() -> Self {
        Self {
            q_max: DEFAULT_Q_MAX,
            norm: NormConfig::default(),
            budget: crate::commutators::DEFAULT_NESTED_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BchCoefficient {
    pub order: usize,
    #[serde(skip)]
    pub operator: PauliSum,
    /// Spectral norm; absent in one-norm mode.
    pub norm_exact: Option<f64>,
    pub norm_one: f64,
    /// `c_p^q α_com,q / q²` with α in the configured norm mode.
    pub norm_bound: f64,
    pub alpha_com: f64,
    pub extensiveness: f64,
    pub locality: usize,
    pub hermiticity_defect: f64,
}

/// `((q−1)!/q) (2 c_p k g)^{q−1} c_p g`.
pub fn extensiveness_bound(q: usize, repetition: usize, k: usize, g: f64) -> f64 {
    let fact: f64 = (1..q).map(|i| i as f64).product();
    let cp = repetition as f64;
    fact / q as f64 * (2.0 * cp * k as f64 * g).powi(q as i32 - 1) * cp * g
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All permutations of `0..q` with their φ_q weights
/// `(−1)^{d_σ} / (q² C(q−1, d_σ))`.
fn permutation_weights(q: usize) -> Vec<(Vec<usize>, f64)> {
    let mut perm: Vec<usize> = (0..q).collect();
    let mut out = Vec::new();
    loop {
        let descents = perm.windows(2).filter(|w| w[0] > w[1]).count();
        let sign = if descents % 2 == 0 { 1.0 } else { -1.0 };
        out.push((perm.clone(), sign / (binomial(q - 1, descents) * (q * q) as f64)));
        // next lexicographic permutation
        let Some(i) = (0..q.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            break;
        };
        let j = (i + 1..q).rev().find(|&j| perm[j] > perm[i]).expect("successor exists");
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    out
}

/// Weights of group-label sequences of length q: the sum over stage
/// compositions of `∏ α_v^{q_v} / q_v!`, stages taken last-to-first.
fn label_sequence_weights(plan: &ProductFormulaPlan, q: usize) -> BTreeMap<Vec<u16>, f64> {
    let mut cur: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
    cur.insert(Vec::new(), 1.0);
    for stage in plan.stages().iter().rev() {
        let mut next: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
        for (seq, w) in &cur {
            let mut s = seq.clone();
            let mut factor = 1.0;
            for j in 0..=(q - seq.len()) {
                if j > 0 {
                    s.push(stage.group as u16);
                    factor *= stage.weight / j as f64;
                }
                *next.entry(s.clone()).or_default() += w * factor;
            }
        }
        cur = next;
    }
    cur.into_iter().filter(|(s, _)| s.len() == q).collect()
}

/// Σ_w W(w) [H_{w1}, [H_{w2}, …, H_{wq}]] over lexicographically sorted words,
/// sharing work across common prefixes.
fn nested_word_sum(spec: &HamiltonianSpec, words: &[(Vec<u16>, f64)], depth: usize) -> Result<PauliSum> {
    let n = spec.n_sites();
    let q = words[0].0.len();
    let mut out = PauliSum::zero(n);
    let mut start = 0;
    while start < words.len() {
        let label = words[start].0[depth];
        let mut end = start;
        while end < words.len() && words[end].0[depth] == label {
            end += 1;
        }
        let h = spec.group(label as usize);
        if depth == q - 1 {
            let w: f64 = words[start..end].iter().map(|(_, w)| w).sum();
            out.add_scaled(h, Complex64::new(w, 0.0))?;
        } else {
            let inner = nested_word_sum(spec, &words[start..end], depth + 1)?;
            let c = h.commutator(&inner)?;
            out.add_scaled(&c, Complex64::new(1.0, 0.0))?;
        }
        start = end;
    }
    Ok(out)
}

/// The Hermitian order-q coefficient Φ_q of the plan, as a Pauli sum.
pub fn phi_operator(plan: &ProductFormulaPlan, spec: &HamiltonianSpec, q: usize) -> Result<PauliSum> {
    if q < 2 {
        return Err(Error::InvalidInput(format!("BCH order must be >= 2, got {q}")));
    }
    if plan.gamma_count() != spec.gamma_count() {
        return Err(Error::InvalidInput(format!(
            "plan built for {} groups, Hamiltonian has {}",
            plan.gamma_count(),
            spec.gamma_count()
        )));
    }
    if spec.gamma_count() > u16::MAX as usize {
        return Err(Error::InvalidInput("too many groups for BCH expansion".into()));
    }
    let labels = label_sequence_weights(plan, q);
    let perms = permutation_weights(q);
    let mut words: HashMap<Vec<u16>, f64> = HashMap::new();
    let mut w = vec![0u16; q];
    for (seq, a) in &labels {
        if *a == 0.0 {
            continue;
        }
        for (perm, c) in &perms {
            for (slot, &src) in w.iter_mut().zip(perm) {
                *slot = seq[src];
            }
            *words.entry(w.clone()).or_default() += a * c;
        }
    }
    let scale = words.values().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut words: Vec<(Vec<u16>, f64)> = words
        .into_iter()
        .filter(|(_, v)| v.abs() > 1e-15 * scale)
        .collect();
    if words.is_empty() {
        return Ok(PauliSum::zero(spec.n_sites()));
    }
    words.sort_by(|a, b| a.0.cmp(&b.0));
    let nested = nested_word_sum(spec, &words, 0)?;
    // (−i)^{q−1}
    let phase = i_pow(((3 * (q - 1)) % 4) as u8);
    Ok(nested.scale(phase))
}

/// Φ_q with its norms, analytic bound and locality/extensiveness.
pub fn compute_phi(
    plan: &ProductFormulaPlan,
    spec: &HamiltonianSpec,
    q: usize,
    opts: &BchOptions,
) -> Result<BchCoefficient> {
    if q > opts.q_max {
        return Err(Error::OrderTooHigh { q, q_max: opts.q_max });
    }
    let operator = phi_operator(plan, spec, q)?;
    let norm_exact = match opts.norm.mode {
        NormMode::ExactDense => Some(opts.norm.norm(&operator)?),
        NormMode::OneNormBound => None,
    };
    let alpha = alpha_com(spec, q, opts.norm, opts.budget)?;
    let cp = plan.repetition_count() as f64;
    Ok(BchCoefficient {
        order: q,
        norm_one: operator.one_norm(),
        norm_exact,
        norm_bound: cp.powi(q as i32) * alpha / (q * q) as f64,
        alpha_com: alpha,
        extensiveness: operator.extensiveness(),
        locality: operator.locality(),
        hermiticity_defect: operator.hermiticity_defect(),
        operator,
    })
}

/// Dense `exp(−iHτ − i Σ_{q=2}^{p0} Φ_q τ^q)` for precomputed Φ_q.
#[derive(Clone, Debug)]
pub struct TruncatedBch {
    hamiltonian: DenseOperator,
    /// Dense Φ_q for q = 2, 3, …
    phis: Vec<DenseOperator>,
}

impl TruncatedBch {
    pub fn new(plan: &ProductFormulaPlan, spec: &HamiltonianSpec, max_order: usize, dense_cap: usize) -> Result<Self> {
        let hamiltonian = DenseOperator::from_pauli_sum(spec.hamiltonian(), dense_cap)?;
        let phis = (2..=max_order)
            .map(|q| DenseOperator::from_pauli_sum(&phi_operator(plan, spec, q)?, dense_cap))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { hamiltonian, phis })
    }

    pub fn max_order(&self) -> usize {
        self.phis.len() + 1
    }

    /// Effective Hermitian generator `H + Σ_{q=2}^{p0} Φ_q τ^{q−1}`.
    pub fn generator(&self, tau: f64, p0: usize) -> Result<DenseOperator> {
        if p0 > self.max_order() {
            return Err(Error::OrderTooHigh {
                q: p0,
                q_max: self.max_order(),
            });
        }
        let mut gen = self.hamiltonian.clone();
        for q in 2..=p0 {
            gen = gen.add(&self.phis[q - 2].scale(Complex64::new(tau.powi(q as i32 - 1), 0.0)));
        }
        Ok(gen)
    }

    pub fn unitary(&self, tau: f64, p0: usize) -> Result<DenseOperator> {
        expm_hermitian_times_minus_i(&self.generator(tau, p0)?, tau)
    }
}

/// `T_p(τ)` and its truncated expansion evaluated side by side.
pub struct TruncationProbe {
    trotter: TrotterEvaluator,
    truncated: TruncatedBch,
}

impl TruncationProbe {
    pub fn new(plan: &ProductFormulaPlan, spec: &HamiltonianSpec, max_order: usize, dense_cap: usize) -> Result<Self> {
        Ok(Self {
            trotter: TrotterEvaluator::new(plan, spec, dense_cap)?,
            truncated: TruncatedBch::new(plan, spec, max_order, dense_cap)?,
        })
    }

    /// `‖T_p(τ) − exp(−iHτ − i Σ_{q≤p0} Φ_q τ^q)‖`.
    pub fn error(&self, tau: f64, p0: usize) -> Result<f64> {
        let u = self.truncated.unitary(tau, p0)?;
        Ok(spectral_norm(&self.trotter.evaluate(tau).sub(&u)))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationSample {
    pub tau: f64,
    pub error: f64,
    /// `ε − error`.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TruncationCheck {
    Checked {
        p0: usize,
        eps: f64,
        tau_boundary: f64,
        samples: Vec<TruncationSample>,
        holds: bool,
    },
    /// The truncation order exceeds the configured maximum BCH order.
    Untestable { p0: usize, q_max: usize },
}

impl TruncationCheck {
    pub fn holds(&self) -> Option<bool> {
        match self {
            TruncationCheck::Checked { holds, .. } => Some(*holds),
            TruncationCheck::Untestable { .. } => None,
        }
    }
}

/// Fractions of the boundary time step at which the truncation is probed.
pub const BOUNDARY_FRACTIONS: [f64; 5] = [1.0, 0.75, 0.5, 0.25, 0.1];

/// With `p0 = ⌈ln(3N/ε)⌉`, checks `‖T_p(τ) − truncated(τ, p0)‖ ≤ ε` at and
/// below `τ = 1/(8e³ c_p p0 k g)`.
pub fn verify_truncation(
    plan: &ProductFormulaPlan,
    spec: &HamiltonianSpec,
    eps: f64,
    opts: &BchOptions,
) -> Result<TruncationCheck> {
    let p0 = truncation_order(spec.n_sites() as f64, eps)?;
    if p0 > opts.q_max {
        return Ok(TruncationCheck::Untestable { p0, q_max: opts.q_max });
    }
    let tau_boundary = bch_time_step(p0, plan.repetition_count(), spec.locality().max(1), spec.extensiveness())?;
    let probe = TruncationProbe::new(plan, spec, p0, opts.norm.dense_cap)?;
    let mut samples = Vec::new();
    for f in BOUNDARY_FRACTIONS {
        let tau = tau_boundary * f;
        let error = probe.error(tau, p0)?;
        samples.push(TruncationSample {
            tau,
            error,
            margin: eps - error,
        });
    }
    let holds = samples.iter().all(|s| s.error <= eps);
    Ok(TruncationCheck::Checked {
        p0,
        eps,
        tau_boundary,
        samples,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{heisenberg_chain, long_range_chain};

    fn two_group_spec() -> HamiltonianSpec {
        HamiltonianSpec::from_groups(vec![
            PauliSum::from_labels(&[("XX", 0.8), ("YI", -0.3)]).unwrap(),
            PauliSum::from_labels(&[("ZI", 0.5), ("IZ", 1.1), ("XZ", 0.4)]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn permutation_weights_sum() {
        // the descent-weighted sum for q = 2 gives [X1, X2]/4 − [X2, X1]/4 = [X1, X2]/2
        let w = permutation_weights(2);
        assert_eq!(w.len(), 2);
        assert_eq!(w[0], (vec![0, 1], 0.25));
        assert_eq!(w[1], (vec![1, 0], -0.25));
        assert_eq!(permutation_weights(4).len(), 24);
    }

    #[test]
    fn first_order_phi2_is_half_commutator() {
        let spec = two_group_spec();
        let plan = ProductFormulaPlan::for_spec(&spec, 1).unwrap();
        let phi = phi_operator(&plan, &spec, 2).unwrap();
        let want = spec
            .group(1)
            .commutator(spec.group(0))
            .unwrap()
            .scale(Complex64::new(0.0, -0.5));
        assert!(phi.sub(&want).unwrap().max_abs_coeff() < 1e-14);
        assert!(phi.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn symmetric_formula_has_no_even_terms() {
        let spec = two_group_spec();
        let plan = ProductFormulaPlan::for_spec(&spec, 2).unwrap();
        assert!(phi_operator(&plan, &spec, 2).unwrap().max_abs_coeff() < 1e-12);
        assert!(phi_operator(&plan, &spec, 4).unwrap().max_abs_coeff() < 1e-12);
        assert!(phi_operator(&plan, &spec, 3).unwrap().max_abs_coeff() > 1e-3);
    }

    #[test]
    fn order_limit_is_enforced() {
        let spec = two_group_spec();
        let plan = ProductFormulaPlan::for_spec(&spec, 1).unwrap();
        let opts = BchOptions {
            q_max: 3,
            ..BchOptions::default()
        };
        assert!(matches!(
            compute_phi(&plan, &spec, 4, &opts),
            Err(Error::OrderTooHigh { q: 4, q_max: 3 })
        ));
    }

    #[test]
    fn truncated_at_formula_order_is_exact_evolution() {
        let spec = heisenberg_chain(4, 1.0, 0.0, true).unwrap();
        let plan = ProductFormulaPlan::for_spec(&spec, 2).unwrap();
        let tb = TruncatedBch::new(&plan, &spec, 2, 12).unwrap();
        let ev = TrotterEvaluator::new(&plan, &spec, 12).unwrap();
        let u = tb.unitary(0.3, 2).unwrap();
        assert!(spectral_norm(&u.sub(&ev.exact(0.3))) < 1e-12);
    }

    #[test]
    fn commuting_spec_truncation_is_exact() {
        let spec = long_range_chain(4, 1.0, 1.0).unwrap();
        let plan = ProductFormulaPlan::for_spec(&spec, 1).unwrap();
        let probe = TruncationProbe::new(&plan, &spec, 4, 12).unwrap();
        for p0 in 2..=4 {
            assert!(probe.error(0.4, p0).unwrap() < 1e-12);
        }
        let check = verify_truncation(&plan, &spec, 0.5, &BchOptions::default()).unwrap();
        assert_eq!(check.holds(), Some(true));
    }

    #[test]
    fn truncation_error_decreases_with_order() {
        let spec = heisenberg_chain(4, 1.0, 0.0, true).unwrap();
        let plan = ProductFormulaPlan::for_spec(&spec, 1).unwrap();
        let probe = TruncationProbe::new(&plan, &spec, 4, 12).unwrap();
        let tau = 0.01;
        let e: Vec<f64> = (2..=4).map(|p0| probe.error(tau, p0).unwrap()).collect();
        assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
    }

    #[test]
    fn untestable_and_degenerate_inputs() {
        let spec = heisenberg_chain(4, 1.0, 0.0, true).unwrap();
        let plan = ProductFormulaPlan::for_spec(&spec, 1).unwrap();
        let opts = BchOptions {
            q_max: 3,
            ..BchOptions::default()
        };
        let c = verify_truncation(&plan, &spec, 1e-3, &opts).unwrap();
        assert!(matches!(c, TruncationCheck::Untestable { q_max: 3, .. }));
        assert!(verify_truncation(&plan, &spec, 12.0, &opts).is_err());
    }

    #[test]
    fn extensiveness_bound_values() {
        assert_eq!(extensiveness_bound(2, 1, 2, 6.0), 0.5 * 24.0 * 6.0);
        assert_eq!(extensiveness_bound(3, 2, 1, 1.0), 2.0 / 3.0 * 16.0 * 2.0);
    }
}
