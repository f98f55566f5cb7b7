//! Sums of Pauli strings with exact phase bookkeeping.
//!
//! A Pauli string on `n` sites is stored in symplectic form as a pair of
//! bitsets `(x, z)`. Site `j` carries `I, X, Z, Y` for `(x_j, z_j) = (0,0),
//! (1,0), (0,1), (1,1)`. With `Y = iXZ` the string equals
//! `i^{|x & z|} X^x Z^z`, which gives the product rule
//!
//! ```text
//! P(x1,z1) P(x2,z2) = i^{|x1&z1| + |x2&z2| + 2|z1&x2| - |x3&z3|} P(x3,z3),
//! x3 = x1 ^ x2,  z3 = z1 ^ z2
//! ```
//!
//! so every product phase is an exact power of `i`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::dense::{self, DenseOperator};
use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped after every operation.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-14;

type Words = SmallVec<[u64; 1]>;

fn word_count(n_sites: usize) -> usize {
    n_sites.div_ceil(64).max(1)
}

fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// Single-site Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Phase-free Pauli string in symplectic form. The number of sites is
/// carried by the owning [`PauliTerm`] or [`PauliSum`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    x: Words,
    z: Words,
}

impl PauliString {
    pub fn identity(n_sites: usize) -> Self {
        let w = word_count(n_sites);
        Self {
            x: SmallVec::from_elem(0, w),
            z: SmallVec::from_elem(0, w),
        }
    }

    /// Parses a label such as `"XIZY"`; character `j` acts on site `j`.
    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.chars().count();
        if n == 0 {
            return Err(Error::InvalidPauli(label.to_string()));
        }
        let mut s = Self::identity(n);
        for (site, c) in label.chars().enumerate() {
            let p = Pauli::from_char(c).ok_or_else(|| Error::InvalidPauli(label.to_string()))?;
            s.set(site, p);
        }
        Ok(s)
    }

    /// `op` on `site`, identity elsewhere.
    pub fn single(n_sites: usize, site: usize, op: Pauli) -> Self {
        let mut s = Self::identity(n_sites);
        s.set(site, op);
        s
    }

    /// Tensor product of the given single-site operators, identity elsewhere.
    pub fn from_sparse(n_sites: usize, ops: &[(usize, Pauli)]) -> Self {
        let mut s = Self::identity(n_sites);
        for &(site, op) in ops {
            s.set(site, op);
        }
        s
    }

    pub fn set(&mut self, site: usize, op: Pauli) {
        let (w, b) = (site / 64, site % 64);
        let (xb, zb) = op.bits();
        let mask = 1u64 << b;
        if xb {
            self.x[w] |= mask;
        } else {
            self.x[w] &= !mask;
        }
        if zb {
            self.z[w] |= mask;
        } else {
            self.z[w] &= !mask;
        }
    }

    pub fn get(&self, site: usize) -> Pauli {
        let (w, b) = (site / 64, site % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&w| w == 0)
    }

    /// Number of sites acted on nontrivially.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Sites acted on nontrivially, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, (x, z)) in self.x.iter().zip(&self.z).enumerate() {
            let mut bits = x | z;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(w * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        (popcount_and(&self.x, &other.z) + popcount_and(&self.z, &other.x)) % 2 == 0
    }

    /// Returns `(k, s)` with `self * other = i^k s`, `k` in `0..4`.
    pub fn mul(&self, other: &Self) -> (u8, PauliString) {
        let x: Words = self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect();
        let z: Words = self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect();
        let k = popcount_and(&self.x, &self.z) as i64
            + popcount_and(&other.x, &other.z) as i64
            + 2 * popcount_and(&self.z, &other.x) as i64
            - popcount_and(&x, &z) as i64;
        (k.rem_euclid(4) as u8, PauliString { x, z })
    }

    pub fn label(&self, n_sites: usize) -> String {
        (0..n_sites).map(|s| self.get(s).as_char()).collect()
    }
}

/// `i^k`.
pub fn i_pow(k: u8) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// A Pauli string with a complex coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub n_sites: usize,
    pub string: PauliString,
    pub coeff: Complex64,
}

impl PauliTerm {
    pub fn new(n_sites: usize, string: PauliString, coeff: Complex64) -> Self {
        Self {
            n_sites,
            string,
            coeff,
        }
    }

    pub fn from_label(label: &str, coeff: f64) -> Result<Self> {
        let string = PauliString::from_label(label)?;
        Ok(Self::new(label.chars().count(), string, Complex64::new(coeff, 0.0)))
    }

    pub fn support(&self) -> Vec<usize> {
        self.string.support()
    }

    pub fn mul(&self, other: &Self) -> Result<PauliTerm> {
        check_sites(self.n_sites, other.n_sites)?;
        let (k, s) = self.string.mul(&other.string);
        Ok(PauliTerm::new(self.n_sites, s, self.coeff * other.coeff * i_pow(k)))
    }
}

fn check_sites(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::SiteMismatch { left: a, right: b });
    }
    Ok(())
}

/// How to evaluate an operator norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMode {
    /// Spectral norm of the dense matrix.
    ExactDense,
    /// Sum of coefficient magnitudes; each Pauli string has unit norm.
    OneNormBound,
}

/// Norm mode plus the dense-evaluation site limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct NormConfig {
    pub mode: NormMode,
    pub dense_cap: usize,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            mode: NormMode::ExactDense,
            dense_cap: crate::dense::DEFAULT_DENSE_CAP,
        }
    }
}

impl NormConfig {
    pub fn one_norm() -> Self {
        Self {
            mode: NormMode::OneNormBound,
            ..Self::default()
        }
    }

    pub fn norm(&self, s: &PauliSum) -> Result<f64> {
        s.operator_norm(self.mode, self.dense_cap)
    }
}

/// Canonical sum of Pauli strings: one entry per string, no coefficient
/// smaller than the prune tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_sites: usize,
    terms: BTreeMap<PauliString, Complex64>,
    prune_tol: f64,
}

impl PauliSum {
    pub fn zero(n_sites: usize) -> Self {
        Self::with_tolerance(n_sites, DEFAULT_PRUNE_TOL)
    }

    pub fn with_tolerance(n_sites: usize, prune_tol: f64) -> Self {
        Self {
            n_sites,
            terms: BTreeMap::new(),
            prune_tol,
        }
    }

    pub fn identity(n_sites: usize) -> Self {
        let mut s = Self::zero(n_sites);
        s.add_term(PauliString::identity(n_sites), Complex64::new(1.0, 0.0));
        s
    }

    pub fn from_term(term: &PauliTerm) -> Self {
        let mut s = Self::zero(term.n_sites);
        s.add_term(term.string.clone(), term.coeff);
        s
    }

    /// Builds a sum from `(label, real coefficient)` pairs.
    pub fn from_labels(pairs: &[(&str, f64)]) -> Result<Self> {
        let n = pairs
            .first()
            .map(|(l, _)| l.chars().count())
            .ok_or_else(|| Error::InvalidInput("empty label list; use PauliSum::zero".into()))?;
        let mut s = Self::zero(n);
        for (label, c) in pairs {
            let t = PauliTerm::from_label(label, *c)?;
            check_sites(n, t.n_sites)?;
            s.add_term(t.string, t.coeff);
        }
        Ok(s)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn prune_tol(&self) -> f64 {
        self.prune_tol
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, s: &PauliString) -> Complex64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> Vec<PauliTerm> {
        self.terms
            .iter()
            .map(|(s, c)| PauliTerm::new(self.n_sites, s.clone(), *c))
            .collect()
    }

    /// Adds `c * s`, dropping the entry if the result falls below tolerance.
    pub fn add_term(&mut self, s: PauliString, c: Complex64) {
        let entry = self.terms.entry(s.clone()).or_default();
        *entry += c;
        if entry.norm() < self.prune_tol {
            self.terms.remove(&s);
        }
    }

    fn accumulate(&mut self, s: PauliString, c: Complex64) {
        *self.terms.entry(s).or_default() += c;
    }

    fn pruned(mut self) -> Self {
        let tol = self.prune_tol;
        self.terms.retain(|_, c| c.norm() >= tol);
        self
    }

    pub fn scale(&self, f: Complex64) -> Self {
        let mut out = Self::with_tolerance(self.n_sites, self.prune_tol);
        for (s, c) in &self.terms {
            out.accumulate(s.clone(), c * f);
        }
        out.pruned()
    }

    pub fn scale_real(&self, f: f64) -> Self {
        self.scale(Complex64::new(f, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_sites(self.n_sites, other.n_sites)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.accumulate(s.clone(), *c);
        }
        Ok(out.pruned())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_real(-1.0))
    }

    /// `self += f * other`.
    pub fn add_scaled(&mut self, other: &Self, f: Complex64) -> Result<()> {
        check_sites(self.n_sites, other.n_sites)?;
        let tol = self.prune_tol;
        for (s, c) in &other.terms {
            let entry = self.terms.entry(s.clone()).or_default();
            *entry += c * f;
            if entry.norm() < tol {
                self.terms.remove(s);
            }
        }
        Ok(())
    }

    /// Operator product `self * other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        check_sites(self.n_sites, other.n_sites)?;
        let mut out = Self::with_tolerance(self.n_sites, self.prune_tol);
        for (sa, ca) in &self.terms {
            for (sb, cb) in &other.terms {
                let (k, s) = sa.mul(sb);
                out.accumulate(s, ca * cb * i_pow(k));
            }
        }
        Ok(out.pruned())
    }

    /// `self * other - other * self`. Commuting string pairs are skipped;
    /// anticommuting pairs contribute `2 * a * b`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        check_sites(self.n_sites, other.n_sites)?;
        let mut out = Self::with_tolerance(self.n_sites, self.prune_tol);
        for (sa, ca) in &self.terms {
            for (sb, cb) in &other.terms {
                if sa.commutes_with(sb) {
                    continue;
                }
                let (k, s) = sa.mul(sb);
                out.accumulate(s, 2.0 * ca * cb * i_pow(k));
            }
        }
        Ok(out.pruned())
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.conj();
        }
        out
    }

    /// Largest |imaginary part| of any coefficient; zero for Hermitian sums.
    pub fn hermiticity_defect(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Largest |real part| of any coefficient; zero for anti-Hermitian sums.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        self.terms.values().map(|c| c.re.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Σ|coeff|, a certified upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Max over sites of the summed |coeff| of strings touching that site.
    pub fn extensiveness(&self) -> f64 {
        let mut per_site = vec![0.0; self.n_sites];
        for (s, c) in &self.terms {
            let w = c.norm();
            for site in s.support() {
                per_site[site] += w;
            }
        }
        per_site.into_iter().fold(0.0, f64::max)
    }

    /// Max support size over strings; 0 for the empty or identity-only sum.
    pub fn locality(&self) -> usize {
        self.terms.keys().map(|s| s.weight()).max().unwrap_or(0)
    }

    pub fn operator_norm(&self, mode: NormMode, dense_cap: usize) -> Result<f64> {
        match mode {
            NormMode::OneNormBound => Ok(self.one_norm()),
            NormMode::ExactDense => {
                if self.is_empty() {
                    return Ok(0.0);
                }
                let m = DenseOperator::from_pauli_sum(self, dense_cap)?;
                Ok(if self.hermiticity_defect() == 0.0 {
                    dense::hermitian_norm(m.matrix())
                } else if self.anti_hermiticity_defect() == 0.0 {
                    dense::hermitian_norm(&(m.matrix() * Complex64::new(0.0, 1.0)))
                } else {
                    dense::spectral_norm(&m)
                })
            }
        }
    }

    /// Deviation from the zero operator measured coefficient-wise.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (s, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i){}", c.re, c.im, s.label(self.n_sites))?;
        }
        Ok(())
    }
}
