//! Partitioned Hamiltonians `H = Σ_γ H_γ` over Pauli strings, their
//! locality/extensiveness constants, a JSON document format and built-in
//! lattice families.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{linear_fit, loglog_fit, LinearFit};
use crate::pauli::{Pauli, PauliString, PauliSum};

const HERMITIAN_TOL: f64 = 1e-12;

/// A Hamiltonian split into groups. Group indices are 0-based in the API
/// and 1-based in documents.
#[derive(Clone, Debug)]
pub struct HamiltonianSpec {
    n_sites: usize,
    groups: Vec<PauliSum>,
    full: PauliSum,
    locality: usize,
    extensiveness: f64,
    total_one_norm: f64,
    non_commuting_groups: bool,
}

impl HamiltonianSpec {
    pub fn from_groups(groups: Vec<PauliSum>) -> Result<Self> {
        let Some(first) = groups.first() else {
            return Err(Error::InvalidInput("a Hamiltonian needs at least one group".into()));
        };
        let n_sites = first.n_sites();
        if n_sites == 0 {
            return Err(Error::InvalidInput("n_sites must be positive".into()));
        }
        let mut full = PauliSum::zero(n_sites);
        let mut non_commuting = false;
        for g in &groups {
            let defect = g.hermiticity_defect();
            if defect > HERMITIAN_TOL {
                return Err(Error::NotHermitian { deviation: defect });
            }
            full.add_scaled(g, Complex64::new(1.0, 0.0))?;
            if !group_commutes(g) {
                non_commuting = true;
            }
        }
        let total_one_norm = groups.iter().map(|g| g.one_norm()).sum();
        Ok(Self {
            n_sites,
            locality: full.locality(),
            extensiveness: full.extensiveness(),
            groups,
            full,
            total_one_norm,
            non_commuting_groups: non_commuting,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Number of groups Γ.
    pub fn gamma_count(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[PauliSum] {
        &self.groups
    }

    pub fn group(&self, idx: usize) -> &PauliSum {
        &self.groups[idx]
    }

    /// The full sum `H`.
    pub fn hamiltonian(&self) -> &PauliSum {
        &self.full
    }

    /// k: largest term support.
    pub fn locality(&self) -> usize {
        self.locality
    }

    /// g: largest per-site sum of term magnitudes.
    pub fn extensiveness(&self) -> f64 {
        self.extensiveness
    }

    /// Σ_γ Σ_X |h_X^γ|.
    pub fn total_one_norm(&self) -> f64 {
        self.total_one_norm
    }

    pub fn non_commuting_groups(&self) -> bool {
        self.non_commuting_groups
    }

    /// True when every pair of groups commutes, so any product formula is exact.
    pub fn groups_commute(&self) -> bool {
        for (i, a) in self.groups.iter().enumerate() {
            for b in &self.groups[i + 1..] {
                if !sums_commute(a, b) {
                    return false;
                }
            }
        }
        true
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: HamiltonianDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }

    pub fn from_document(doc: &HamiltonianDocument) -> Result<Self> {
        if doc.n_sites == 0 {
            return Err(Error::Schema("n_sites must be positive".into()));
        }
        if doc.terms.is_empty() {
            return Err(Error::Schema("terms must not be empty".into()));
        }
        let mut by_group: BTreeMap<usize, PauliSum> = BTreeMap::new();
        for (i, t) in doc.terms.iter().enumerate() {
            if t.pauli.chars().count() != doc.n_sites {
                return Err(Error::SiteMismatch {
                    left: doc.n_sites,
                    right: t.pauli.chars().count(),
                });
            }
            if t.group == 0 {
                return Err(Error::Schema(format!("term {i}: group labels start at 1")));
            }
            if !t.coeff.is_finite() {
                return Err(Error::Schema(format!("term {i}: coefficient is not finite")));
            }
            let s = PauliString::from_label(&t.pauli)?;
            by_group
                .entry(t.group)
                .or_insert_with(|| PauliSum::zero(doc.n_sites))
                .add_term(s, Complex64::new(t.coeff, 0.0));
        }
        let gamma = *by_group.keys().next_back().expect("nonempty");
        for label in 1..=gamma {
            if !by_group.contains_key(&label) {
                return Err(Error::Schema(format!(
                    "group {label} has no terms (labels must cover 1..={gamma})"
                )));
            }
        }
        Self::from_groups(by_group.into_values().collect())
    }

    pub fn to_document(&self) -> HamiltonianDocument {
        let mut terms = Vec::new();
        for (gi, g) in self.groups.iter().enumerate() {
            for (s, c) in g.iter() {
                terms.push(TermRecord {
                    pauli: s.label(self.n_sites),
                    coeff: c.re,
                    group: gi + 1,
                });
            }
        }
        HamiltonianDocument {
            n_sites: self.n_sites,
            terms,
        }
    }
}

fn group_commutes(g: &PauliSum) -> bool {
    let single_axis = |words: fn(&PauliString) -> &[u64]| g.iter().all(|(s, _)| words(s).iter().all(|w| *w == 0));
    if single_axis(PauliString::x_words) || single_axis(PauliString::z_words) {
        return true;
    }
    let strings: Vec<&PauliString> = g.iter().map(|(s, _)| s).collect();
    for (i, a) in strings.iter().enumerate() {
        for b in &strings[i + 1..] {
            if !a.commutes_with(b) {
                return false;
            }
        }
    }
    true
}

fn sums_commute(a: &PauliSum, b: &PauliSum) -> bool {
    a.commutator(b).map(|c| c.is_empty()).unwrap_or(false)
}

/// On-disk Hamiltonian format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianDocument {
    pub n_sites: usize,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub pauli: String,
    pub coeff: f64,
    pub group: usize,
}

/// Nearest-neighbour Heisenberg chain `Σ J (XX + YY + ZZ) + Σ h Z`, grouped as
/// even bonds, odd bonds and the field. Empty groups are dropped. On a
/// periodic chain of odd length the wrap bond gets its own group.
pub fn heisenberg_chain(n: usize, coupling: f64, field: f64, open_boundary: bool) -> Result<HamiltonianSpec> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("Heisenberg chain needs n >= 2, got {n}")));
    }
    let mut even = PauliSum::zero(n);
    let mut odd = PauliSum::zero(n);
    let mut wrap = PauliSum::zero(n);
    let mut bonds: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if !open_boundary && n > 2 {
        bonds.push((n - 1, 0));
    }
    for (a, b) in bonds {
        let target = if b == 0 && n % 2 == 1 {
            &mut wrap
        } else if a % 2 == 0 {
            &mut even
        } else {
            &mut odd
        };
        for op in [Pauli::X, Pauli::Y, Pauli::Z] {
            target.add_term(
                PauliString::from_sparse(n, &[(a, op), (b, op)]),
                Complex64::new(coupling, 0.0),
            );
        }
    }
    let mut fld = PauliSum::zero(n);
    for i in 0..n {
        fld.add_term(PauliString::single(n, i, Pauli::Z), Complex64::new(field, 0.0));
    }
    let groups: Vec<PauliSum> = [even, odd, wrap, fld]
        .into_iter()
        .filter(|g| !g.is_empty())
        .collect();
    if groups.is_empty() {
        return Err(Error::InvalidInput("coupling and field are both zero".into()));
    }
    HamiltonianSpec::from_groups(groups)
}

/// `Σ_{i<j} base / |i−j|^ν Z_i Z_j` on an open chain, one group per distance.
pub fn long_range_chain(n: usize, exponent: f64, base: f64) -> Result<HamiltonianSpec> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("long-range chain needs n >= 2, got {n}")));
    }
    if !(exponent > 0.0) {
        return Err(Error::InvalidInput(format!("decay exponent must be positive, got {exponent}")));
    }
    if base == 0.0 {
        return Err(Error::InvalidInput("coupling base must be nonzero".into()));
    }
    let groups = (1..n)
        .map(|d| {
            let c = base / (d as f64).powf(exponent);
            let mut g = PauliSum::zero(n);
            for i in 0..n - d {
                g.add_term(
                    PauliString::from_sparse(n, &[(i, Pauli::Z), (i + d, Pauli::Z)]),
                    Complex64::new(c, 0.0),
                );
            }
            g
        })
        .collect();
    HamiltonianSpec::from_groups(groups)
}

/// How g grows with the number of sites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Regime {
    /// g bounded independently of N.
    Constant,
    /// g ∝ ln N.
    Logarithmic,
    /// g ∝ N^exponent.
    Power { exponent: f64 },
}

impl Regime {
    /// The regime predicted for couplings decaying as `1/r^ν` in `d` dimensions.
    pub fn for_decay(exponent: f64, dimension: f64) -> Self {
        if exponent > dimension {
            Regime::Constant
        } else if exponent == dimension {
            Regime::Logarithmic
        } else {
            Regime::Power {
                exponent: 1.0 - exponent / dimension,
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GScalingReport {
    pub rows: Vec<(usize, f64)>,
    /// Fit of ln g against ln N.
    pub power_fit: LinearFit,
    /// Fit of g against ln N.
    pub log_fit: LinearFit,
    pub regime: Regime,
}

impl GScalingReport {
    /// Whether the measured growth agrees with `expected` within `tol`.
    /// Power regimes compare the log-log slope; the constant regime requires
    /// a log-log slope below `tol`; the logarithmic regime requires the
    /// g-vs-ln N fit to explain all but `tol` of the variance.
    pub fn matches(&self, expected: Regime, tol: f64) -> bool {
        match expected {
            Regime::Constant => self.power_fit.slope.abs() <= tol,
            Regime::Logarithmic => self.log_fit.r_squared >= 1.0 - tol,
            Regime::Power { exponent } => (self.power_fit.slope - exponent).abs() <= tol,
        }
    }
}

pub fn g_scaling_report<F>(family: F, sizes: &[usize]) -> Result<GScalingReport>
where
    F: Fn(usize) -> Result<HamiltonianSpec>,
{
    if sizes.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "g-scaling fit needs at least 3 sizes, got {}",
            sizes.len()
        )));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        rows.push((n, family(n)?.extensiveness()));
    }
    let ns: Vec<f64> = rows.iter().map(|(n, _)| *n as f64).collect();
    let gs: Vec<f64> = rows.iter().map(|(_, g)| *g).collect();
    let power_fit = loglog_fit(&ns, &gs, f64::MIN_POSITIVE)
        .ok_or_else(|| Error::InvalidInput("g vanishes at every size".into()))?;
    let ln_ns: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let log_fit = linear_fit(&ln_ns, &gs)?;
    let spread = gs.iter().cloned().fold(f64::MIN, f64::max) - gs.iter().cloned().fold(f64::MAX, f64::min);
    let regime = if spread <= 1e-12 * gs.iter().cloned().fold(0.0, f64::max) {
        Regime::Constant
    } else if power_fit.slope < 0.05 {
        Regime::Constant
    } else if log_fit.r_squared > power_fit.r_squared {
        Regime::Logarithmic
    } else {
        Regime::Power {
            exponent: power_fit.slope,
        }
    };
    Ok(GScalingReport {
        rows,
        power_fit,
        log_fit,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(n: usize, terms: &[(&str, f64, usize)]) -> String {
        let terms: Vec<String> = terms
            .iter()
            .map(|(p, c, g)| format!(r#"{{"pauli":"{p}","coeff":{c},"group":{g}}}"#))
            .collect();
        format!(r#"{{"n_sites":{n},"terms":[{}]}}"#, terms.join(","))
    }

    #[test]
    fn load_two_site_document() {
        let spec = HamiltonianSpec::from_json(&doc(
            2,
            &[("XX", 1.0, 1), ("ZI", 1.0, 2), ("IZ", 1.0, 2)],
        ))
        .unwrap();
        assert_eq!(spec.gamma_count(), 2);
        assert_eq!(spec.locality(), 2);
        assert_eq!(spec.extensiveness(), 2.0);
        assert_eq!(spec.total_one_norm(), 3.0);
        assert!(!spec.non_commuting_groups());
    }

    #[test]
    fn single_term_document() {
        let spec = HamiltonianSpec::from_json(&doc(3, &[("XYZ", 0.5, 1)])).unwrap();
        assert_eq!(spec.gamma_count(), 1);
        assert!(spec.groups_commute());
    }

    #[test]
    fn document_validation() {
        assert!(matches!(
            HamiltonianSpec::from_json(&doc(2, &[("XX", 1.0, 1), ("ZI", 1.0, 3)])),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            HamiltonianSpec::from_json(&doc(2, &[("XXX", 1.0, 1)])),
            Err(Error::SiteMismatch { .. })
        ));
        assert!(matches!(
            HamiltonianSpec::from_json(&doc(2, &[("XX", 1.0, 0)])),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            HamiltonianSpec::from_json(&doc(2, &[("XQ", 1.0, 1)])),
            Err(Error::InvalidPauli(_))
        ));
        assert!(matches!(
            HamiltonianSpec::from_json(r#"{"n_sites":2,"terms":[],"extra":1}"#),
            Err(Error::Json(_))
        ));
    }

    #[test]
    fn document_round_trip() {
        let spec = heisenberg_chain(4, 1.0, 0.3, true).unwrap();
        let back = HamiltonianSpec::from_document(&spec.to_document()).unwrap();
        assert_eq!(back.gamma_count(), spec.gamma_count());
        for (a, b) in back.groups().iter().zip(spec.groups()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn non_commuting_group_is_flagged() {
        let spec = HamiltonianSpec::from_json(&doc(1, &[("X", 1.0, 1), ("Z", 1.0, 1)])).unwrap();
        assert!(spec.non_commuting_groups());
    }

    #[test]
    fn heisenberg_constants() {
        let spec = heisenberg_chain(4, 1.0, 0.0, true).unwrap();
        assert_eq!(spec.gamma_count(), 2);
        assert_eq!(spec.locality(), 2);
        assert_eq!(spec.extensiveness(), 6.0);
        assert!(!spec.non_commuting_groups());
        assert!(!spec.groups_commute());

        let two = heisenberg_chain(2, 1.0, 0.0, true).unwrap();
        assert_eq!(two.gamma_count(), 1);
        let two_field = heisenberg_chain(2, 1.0, 0.5, true).unwrap();
        assert_eq!(two_field.gamma_count(), 2);

        let with_field = heisenberg_chain(5, 1.0, 0.5, true).unwrap();
        assert_eq!(with_field.gamma_count(), 3);
        assert_eq!(with_field.extensiveness(), 6.5);

        let g: Vec<f64> = (3..9)
            .map(|n| heisenberg_chain(n, 0.7, 0.2, true).unwrap().extensiveness())
            .collect();
        assert!(g.iter().all(|x| (x - g[0]).abs() < 1e-12));

        assert!(heisenberg_chain(1, 1.0, 0.0, true).is_err());
    }

    #[test]
    fn periodic_heisenberg_groups_commute_internally() {
        for n in 3..8 {
            let spec = heisenberg_chain(n, 1.0, 0.0, false).unwrap();
            assert!(!spec.non_commuting_groups(), "n = {n}");
            assert_eq!(spec.gamma_count(), if n % 2 == 1 { 3 } else { 2 });
            assert_eq!(spec.hamiltonian().len(), 3 * n);
        }
    }

    #[test]
    fn field_only_chain_commutes() {
        let spec = heisenberg_chain(4, 0.0, 1.0, true).unwrap();
        assert!(spec.groups_commute());
    }

    #[test]
    fn long_range_constants() {
        let spec = long_range_chain(4, 2.0, 1.0).unwrap();
        assert_eq!(spec.gamma_count(), 3);
        // end site: 1 + 1/4 + 1/9; second site: 1 + 1 + 1/4
        let ends: f64 = 1.0 + 0.25 + 1.0 / 9.0;
        let inner = 2.25;
        assert!((spec.extensiveness() - ends.max(inner)).abs() < 1e-14);

        let two = long_range_chain(2, 1.3, 0.8).unwrap();
        assert!((two.extensiveness() - 0.8).abs() < 1e-15);

        let steep = long_range_chain(6, 50.0, 1.0).unwrap();
        let nn: f64 = 2.0;
        assert!((steep.extensiveness() - nn).abs() < 1e-10);

        assert!(long_range_chain(4, 0.0, 1.0).is_err());
        assert!(long_range_chain(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn reconstruction_matches_full_sum() {
        let spec = heisenberg_chain(5, 0.9, -0.4, false).unwrap();
        let mut sum = PauliSum::zero(5);
        for g in spec.groups() {
            sum = sum.add(g).unwrap();
        }
        assert_eq!(&sum, spec.hamiltonian());
    }

    #[test]
    fn g_scaling_needs_three_sizes() {
        assert!(g_scaling_report(|n| heisenberg_chain(n, 1.0, 0.0, true), &[4, 8]).is_err());
    }

    #[test]
    fn g_scaling_finite_range_is_constant() {
        let r = g_scaling_report(|n| heisenberg_chain(n, 1.0, 0.5, true), &[4, 8, 16, 32]).unwrap();
        assert_eq!(r.regime, Regime::Constant);
        assert!(r.matches(Regime::Constant, 0.1));
    }
}
