//! Nested-commutator sums over group tuples, their analytic ceilings, the
//! inserted-operator variant, and the composition-weighted growth rate μ.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::pauli::{NormConfig, NormMode, PauliSum};

/// Default cap on the number of nested commutators evaluated per call.
pub const DEFAULT_NESTED_BUDGET: u128 = 1_000_000;

/// Γ^q, saturating.
fn tuple_count(gamma: usize, q: usize) -> u128 {
    (0..q).fold(1u128, |acc, _| acc.saturating_mul(gamma as u128))
}

fn check_budget(gamma: usize, q: usize, budget: u128) -> Result<()> {
    let needed = tuple_count(gamma, q);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// Visits every right-nested commutator `[H_{γ_q}, …, [H_{γ_2}, H_{γ_1}]]`
/// with the inner prefix shared across tuples. Zero prefixes are skipped.
fn for_each_nested(
    spec: &HamiltonianSpec,
    q: usize,
    visit: &mut dyn FnMut(&PauliSum) -> Result<()>,
) -> Result<()> {
    fn rec(
        spec: &HamiltonianSpec,
        inner: &PauliSum,
        depth: usize,
        q: usize,
        visit: &mut dyn FnMut(&PauliSum) -> Result<()>,
    ) -> Result<()> {
        if inner.is_empty() {
            return Ok(());
        }
        if depth == q {
            return visit(inner);
        }
        for h in spec.groups() {
            let next = h.commutator(inner)?;
            rec(spec, &next, depth + 1, q, visit)?;
        }
        Ok(())
    }
    for h in spec.groups() {
        rec(spec, h, 1, q, visit)?;
    }
    Ok(())
}

/// α_com,q: Σ over group tuples of the norm of the right-nested commutator.
pub fn alpha_com(spec: &HamiltonianSpec, q: usize, norm: NormConfig, budget: u128) -> Result<f64> {
    if q < 2 {
        return Err(Error::InvalidInput(format!("nested commutator order must be >= 2, got {q}")));
    }
    check_budget(spec.gamma_count(), q, budget)?;
    let mut total = 0.0;
    for_each_nested(spec, q, &mut |c| {
        total += norm.norm(c)?;
        Ok(())
    })?;
    Ok(total)
}

/// `(q−1)! (2kg)^{q−1} N g`.
pub fn factorial_bound(q: usize, n_sites: usize, k: usize, g: f64) -> f64 {
    let fact: f64 = (1..q).map(|i| i as f64).product();
    fact * (2.0 * k as f64 * g).powi(q as i32 - 1) * n_sites as f64 * g
}

/// `(2 Σ_γ Σ_X |h_X^γ|)^q`.
pub fn one_norm_power_bound(q: usize, total_one_norm: f64) -> f64 {
    (2.0 * total_one_norm).powi(q as i32)
}

/// α_com,q across a range of orders together with both analytic ceilings.
#[derive(Clone, Debug, Serialize)]
pub struct CommutatorTable {
    pub n_sites: usize,
    pub locality: usize,
    pub extensiveness: f64,
    pub orders: Vec<usize>,
    /// Spectral-norm sums; absent when built in one-norm mode.
    pub alpha_exact: Option<BTreeMap<usize, f64>>,
    /// Coefficient-1-norm sums.
    pub alpha_one_norm: BTreeMap<usize, f64>,
    pub factorial_bound: BTreeMap<usize, f64>,
    pub one_norm_power_bound: BTreeMap<usize, f64>,
}

impl CommutatorTable {
    pub fn build(
        spec: &HamiltonianSpec,
        orders: RangeInclusive<usize>,
        norm: NormConfig,
        budget: u128,
    ) -> Result<Self> {
        let exact = norm.mode == NormMode::ExactDense;
        let mut alpha_exact = BTreeMap::new();
        let mut alpha_one_norm = BTreeMap::new();
        let mut fb = BTreeMap::new();
        let mut ob = BTreeMap::new();
        let mut qs = Vec::new();
        for q in orders {
            if q < 2 {
                return Err(Error::InvalidInput(format!(
                    "nested commutator order must be >= 2, got {q}"
                )));
            }
            check_budget(spec.gamma_count(), q, budget)?;
            let mut ex = 0.0;
            let mut one = 0.0;
            for_each_nested(spec, q, &mut |c| {
                one += c.one_norm();
                if exact {
                    ex += norm.norm(c)?;
                }
                Ok(())
            })?;
            if exact {
                alpha_exact.insert(q, ex);
            }
            alpha_one_norm.insert(q, one);
            fb.insert(
                q,
                factorial_bound(q, spec.n_sites(), spec.locality(), spec.extensiveness()),
            );
            ob.insert(q, one_norm_power_bound(q, spec.total_one_norm()));
            qs.push(q);
        }
        Ok(Self {
            n_sites: spec.n_sites(),
            locality: spec.locality(),
            extensiveness: spec.extensiveness(),
            orders: qs,
            alpha_exact: exact.then_some(alpha_exact),
            alpha_one_norm,
            factorial_bound: fb,
            one_norm_power_bound: ob,
        })
    }

    /// The tightest available α per order: exact if present, else one-norm.
    pub fn best_alpha(&self) -> &BTreeMap<usize, f64> {
        self.alpha_exact.as_ref().unwrap_or(&self.alpha_one_norm)
    }

    /// Orders where the table's own ordering constraints fail.
    pub fn violations(&self) -> Vec<usize> {
        self.orders
            .iter()
            .copied()
            .filter(|q| {
                let one = self.alpha_one_norm[q];
                let pow = self.one_norm_power_bound[q];
                let fact = self.factorial_bound[q];
                let slack = 1e-12 * pow.max(1.0);
                let mut bad = one > pow + slack;
                if let Some(ex) = &self.alpha_exact {
                    let e = ex[q];
                    bad |= e > one * (1.0 + 1e-12) + 1e-12 || e > fact * (1.0 + 1e-12);
                }
                bad
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,alpha_exact,alpha_one_norm,factorial_bound,one_norm_power_bound\n");
        for q in &self.orders {
            let ex = self
                .alpha_exact
                .as_ref()
                .map(|m| format!("{:.12e}", m[q]))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{q},{ex},{:.12e},{:.12e},{:.12e}",
                self.alpha_one_norm[q], self.factorial_bound[q], self.one_norm_power_bound[q]
            );
        }
        out
    }
}

/// Σ over group tuples of `‖[H_{γ_q}, …, [H_{γ_{q'+1}}, [O, [H_{γ_{q'}}, …, [H_{γ_2}, H_{γ_1}]]]]]‖`.
pub fn inserted_nested_sum(
    spec: &HamiltonianSpec,
    op: &PauliSum,
    q: usize,
    position: usize,
    norm: NormConfig,
    budget: u128,
) -> Result<f64> {
    if q == 0 || position == 0 || position > q {
        return Err(Error::InvalidInput(format!(
            "insertion position {position} outside 1..={q}"
        )));
    }
    if op.n_sites() != spec.n_sites() {
        return Err(Error::SiteMismatch {
            left: spec.n_sites(),
            right: op.n_sites(),
        });
    }
    check_budget(spec.gamma_count(), q, budget)?;

    fn outer(
        spec: &HamiltonianSpec,
        inner: &PauliSum,
        placed: usize,
        q: usize,
        norm: NormConfig,
        total: &mut f64,
    ) -> Result<()> {
        if inner.is_empty() {
            return Ok(());
        }
        if placed == q {
            *total += norm.norm(inner)?;
            return Ok(());
        }
        for h in spec.groups() {
            let next = h.commutator(inner)?;
            outer(spec, &next, placed + 1, q, norm, total)?;
        }
        Ok(())
    }

    let mut total = 0.0;
    for h in spec.groups() {
        let mut stack: Vec<(PauliSum, usize)> = vec![(h.clone(), 1)];
        while let Some((inner, placed)) = stack.pop() {
            if inner.is_empty() {
                continue;
            }
            if placed == position {
                let wrapped = op.commutator(&inner)?;
                outer(spec, &wrapped, placed, q, norm, &mut total)?;
                continue;
            }
            for g in spec.groups() {
                stack.push((g.commutator(&inner)?, placed + 1));
            }
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize)]
pub struct InsertionCheck {
    pub position: usize,
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Checks `Σ ‖…[O, …]…‖ ≤ q! (2kg)^q ‖O‖` at every insertion position.
pub fn inserted_operator_check(
    spec: &HamiltonianSpec,
    op: &PauliSum,
    q: usize,
    norm: NormConfig,
    budget: u128,
) -> Result<Vec<InsertionCheck>> {
    if op.locality() > spec.locality() {
        return Err(Error::InvalidInput(format!(
            "inserted operator acts on {} sites, more than the Hamiltonian locality {}",
            op.locality(),
            spec.locality()
        )));
    }
    let fact: f64 = (1..=q).map(|i| i as f64).product();
    let bound = fact
        * (2.0 * spec.locality() as f64 * spec.extensiveness()).powi(q as i32)
        * norm.norm(op)?;
    (1..=q)
        .map(|position| {
            let value = inserted_nested_sum(spec, op, q, position, norm, budget)?;
            Ok(InsertionCheck {
                position,
                value,
                bound,
                holds: value <= bound * (1.0 + 1e-12),
            })
        })
        .collect()
}

/// Search window for μ.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MuSearch {
    pub n_max: usize,
}

impl Default for MuSearch {
    fn default() -> Self {
        Self { n_max: 8 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MuResult {
    pub value: f64,
    /// (q, n) attaining the maximum; lexicographically smallest on ties.
    pub witness: Option<(usize, usize)>,
    /// False when no (q, n) in the window is feasible.
    pub feasible: bool,
    /// The value with `n_max + 2`.
    pub extended_value: f64,
    /// True when widening the window leaves the value unchanged to 1e-9
    /// relative and the witness is strictly inside the window.
    pub converged: bool,
    /// `1/x*` with `Σ_j α_j x*^j = 1`: an upper bound over all n.
    pub ceiling: f64,
}

/// For each n in 1..=n_max, sums over compositions of every total into n
/// parts from `parts`, weighting each part by `alpha`.
fn composition_sums(alpha: &BTreeMap<usize, f64>, parts: RangeInclusive<usize>, n_max: usize) -> Vec<Vec<f64>> {
    let hi = *parts.end();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    out.push(vec![1.0]);
    for n in 1..=n_max {
        let prev = &out[n - 1];
        let mut cur = vec![0.0; n * hi + 1];
        for (s, w) in prev.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            for j in parts.clone() {
                cur[s + j] += w * alpha[&j];
            }
        }
        out.push(cur);
    }
    out
}

fn mu_window(
    alpha: &BTreeMap<usize, f64>,
    p: usize,
    m: usize,
    p0: usize,
    n_max: usize,
) -> (f64, Option<(usize, usize)>) {
    if p0 < p + 1 {
        return (0.0, None);
    }
    let sums = composition_sums(alpha, p + 1..=p0, n_max);
    let mut best = 0.0;
    let mut witness: Option<(usize, usize)> = None;
    for n in 1..=n_max {
        let q_lo = (m + 1).max(p * n + 1);
        let q_hi = n * (p0 - 1) + 1;
        for q in q_lo..=q_hi {
            let s = q + n - 1;
            let val = sums[n][s].max(0.0).powf(1.0 / s as f64);
            let better = match witness {
                None => true,
                Some(w) => val > best || (val == best && (q, n) < w),
            };
            if better {
                best = val;
                witness = Some((q, n));
            }
        }
    }
    (best, witness)
}

/// μ with composition parts confined to `[p+1, p0]`, searched over
/// `n ≤ n_max`.
pub fn mu_truncated(
    alpha: &BTreeMap<usize, f64>,
    p: usize,
    m: usize,
    p0: usize,
    search: MuSearch,
) -> Result<MuResult> {
    if search.n_max == 0 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    for q in p + 1..=p0 {
        if !alpha.contains_key(&q) {
            return Err(Error::InvalidInput(format!("alpha table is missing order {q}")));
        }
    }
    let (value, witness) = mu_window(alpha, p, m, p0, search.n_max);
    let (extended_value, _) = mu_window(alpha, p, m, p0, search.n_max + 2);
    let converged = witness.is_some_and(|(_, n)| n < search.n_max) && extended_value <= value * (1.0 + 1e-9);
    Ok(MuResult {
        value,
        witness,
        feasible: witness.is_some(),
        extended_value,
        converged,
        ceiling: composition_ceiling(alpha, p + 1..=p0),
    })
}

/// `1/x*` where `Σ_{j ∈ parts} α_j x*^j = 1`. Rounded upward.
pub fn composition_ceiling(alpha: &BTreeMap<usize, f64>, parts: RangeInclusive<usize>) -> f64 {
    let weights: Vec<(i32, f64)> = parts
        .map(|j| (j as i32, alpha.get(&j).copied().unwrap_or(0.0).max(0.0)))
        .filter(|(_, a)| *a > 0.0)
        .collect();
    if weights.is_empty() {
        return 0.0;
    }
    let f = |x: f64| weights.iter().map(|(j, a)| a * x.powi(*j)).sum::<f64>();
    let mut hi = 1.0;
    while f(hi) < 1.0 {
        hi *= 2.0;
    }
    while f(hi * 0.5) >= 1.0 {
        hi *= 0.5;
    }
    let mut lo = hi * 0.5;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // f(lo) < 1 so lo < x* and 1/lo over-estimates the ceiling
    1.0 / lo
}

/// Per-order candidates of the untruncated sup: for each q in the window,
/// the largest composition-weighted value over n, with parts uncapped.
/// `alpha` may be any source, e.g. an analytic bound.
pub fn mu_untruncated_candidates(
    alpha: &dyn Fn(usize) -> f64,
    p: usize,
    m: usize,
    q_window: RangeInclusive<usize>,
    n_max: usize,
) -> Vec<(usize, f64)> {
    let q_top = *q_window.end();
    // a part never exceeds q when the remaining n−1 parts are ≥ p+1
    let table: BTreeMap<usize, f64> = (p + 1..=q_top.max(p + 1)).map(|j| (j, alpha(j))).collect();
    let sums = composition_sums(&table, p + 1..=q_top.max(p + 1), n_max);
    q_window
        .filter(|q| *q >= m + 1)
        .map(|q| {
            let mut best = 0.0f64;
            for n in 1..=n_max {
                if n * p + 1 > q {
                    break;
                }
                let s = q + n - 1;
                if s < sums[n].len() {
                    best = best.max(sums[n][s].max(0.0).powf(1.0 / s as f64));
                }
            }
            (q, best)
        })
        .collect()
}
