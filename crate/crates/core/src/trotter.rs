//! Product formulas `T_p(τ) = U_V ⋯ U_2 U_1` with stage unitaries
//! `U_v = exp(−i α_v τ H_{γ_v})`. Stage 1 acts first.

use serde::Serialize;

use crate::dense::{check_cap, expm_hermitian_times_minus_i, spectral_norm, DenseOperator, HermitianEigen};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;

/// One factor of a product formula: group index (0-based) and time weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stage {
    pub group: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductFormulaPlan {
    order: usize,
    gamma_count: usize,
    stages: Vec<Stage>,
    symmetric: bool,
}

impl ProductFormulaPlan {
    /// Builds the order-`p` formula for `gamma_count` groups: a forward sweep
    /// for `p = 1`, the symmetric sweep for `p = 2`, and Suzuki's fractal
    /// recursion `T_p(τ) = T_{p−2}(uτ)² T_{p−2}((1−4u)τ) T_{p−2}(uτ)²` above.
    pub fn new(gamma_count: usize, order: usize) -> Result<Self> {
        if gamma_count == 0 {
            return Err(Error::InvalidInput("a product formula needs at least one group".into()));
        }
        let stages = match order {
            1 => (0..gamma_count)
                .map(|group| Stage { group, weight: 1.0 })
                .collect(),
            2 | 4 | 6 => suzuki(gamma_count, order),
            other => return Err(Error::UnsupportedOrder(other)),
        };
        Ok(Self::from_stages(order, gamma_count, stages))
    }

    pub fn for_spec(spec: &HamiltonianSpec, order: usize) -> Result<Self> {
        Self::new(spec.gamma_count(), order)
    }

    /// A plan from an explicit stage list. `order` is recorded as given.
    pub fn from_stages(order: usize, gamma_count: usize, stages: Vec<Stage>) -> Self {
        let palindromic = stages
            .iter()
            .zip(stages.iter().rev())
            .all(|(a, b)| a.group == b.group && (a.weight - b.weight).abs() <= 1e-14);
        Self {
            order,
            gamma_count,
            symmetric: order % 2 == 0 && palindromic,
            stages,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn gamma_count(&self) -> usize {
        self.gamma_count
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// c_p: stage count divided by Γ.
    pub fn repetition_count(&self) -> usize {
        self.stages.len() / self.gamma_count
    }

    /// Σ of stage weights per group; all ones for a consistent formula.
    pub fn weight_totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.gamma_count];
        for s in &self.stages {
            totals[s.group] += s.weight;
        }
        totals
    }
}

fn suzuki(gamma_count: usize, order: usize) -> Vec<Stage> {
    if order == 2 {
        let forward = (0..gamma_count).map(|group| Stage { group, weight: 0.5 });
        let backward = (0..gamma_count).rev().map(|group| Stage { group, weight: 0.5 });
        return forward.chain(backward).collect();
    }
    let inner = suzuki(gamma_count, order - 2);
    let u = 1.0 / (4.0 - 4f64.powf(1.0 / (order as f64 - 1.0)));
    let mut out = Vec::with_capacity(5 * inner.len());
    for scale in [u, u, 1.0 - 4.0 * u, u, u] {
        out.extend(inner.iter().map(|s| Stage {
            group: s.group,
            weight: s.weight * scale,
        }));
    }
    out
}

/// Dense evaluator with each group's eigendecomposition computed once.
#[derive(Clone, Debug)]
pub struct TrotterEvaluator {
    plan: ProductFormulaPlan,
    groups: Vec<DenseOperator>,
    group_eigs: Vec<HermitianEigen>,
    full_eig: HermitianEigen,
    n_sites: usize,
}

impl TrotterEvaluator {
    pub fn new(plan: &ProductFormulaPlan, spec: &HamiltonianSpec, dense_cap: usize) -> Result<Self> {
        check_cap(spec.n_sites(), dense_cap)?;
        if plan.gamma_count() != spec.gamma_count() {
            return Err(Error::InvalidInput(format!(
                "plan built for {} groups, Hamiltonian has {}",
                plan.gamma_count(),
                spec.gamma_count()
            )));
        }
        let groups = spec
            .groups()
            .iter()
            .map(|g| DenseOperator::from_pauli_sum(g, dense_cap))
            .collect::<Result<Vec<_>>>()?;
        let group_eigs = groups.iter().map(HermitianEigen::new).collect::<Result<Vec<_>>>()?;
        let full = DenseOperator::from_pauli_sum(spec.hamiltonian(), dense_cap)?;
        Ok(Self {
            plan: plan.clone(),
            groups,
            group_eigs,
            full_eig: HermitianEigen::new(&full)?,
            n_sites: spec.n_sites(),
        })
    }

    pub fn plan(&self) -> &ProductFormulaPlan {
        &self.plan
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// `T_p(τ)` from cached group factorizations.
    pub fn evaluate(&self, tau: f64) -> DenseOperator {
        let mut u = DenseOperator::identity(self.n_sites);
        for s in self.plan.stages() {
            u = self.group_eigs[s.group].exp_minus_i(s.weight * tau).mul(&u);
        }
        u
    }

    /// `T_p(τ)` refactorizing every stage; reference for the cached path.
    pub fn evaluate_uncached(&self, tau: f64) -> Result<DenseOperator> {
        let mut u = DenseOperator::identity(self.n_sites);
        for s in self.plan.stages() {
            u = expm_hermitian_times_minus_i(&self.groups[s.group], s.weight * tau)?.mul(&u);
        }
        Ok(u)
    }

    /// `exp(−iHτ)`.
    pub fn exact(&self, tau: f64) -> DenseOperator {
        self.full_eig.exp_minus_i(tau)
    }

    /// `‖exp(−iHτ) − T_p(τ)‖`.
    pub fn trotter_error(&self, tau: f64) -> f64 {
        spectral_norm(&self.exact(tau).sub(&self.evaluate(tau)))
    }
}
