//! Dense complex linear algebra on `2^n`-dimensional operators.
//!
//! Exponentials are built from Hermitian eigendecompositions, so
//! `exp(-i H tau)` is unitary to rounding and one factorization serves a
//! whole sweep over `tau`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{i_pow, PauliString, PauliSum};

/// Default limit on the number of sites for dense evaluation.
pub const DEFAULT_DENSE_CAP: usize = 12;

/// Tolerance for accepting an input as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A `2^n x 2^n` complex matrix. Site 0 is the most significant qubit of the
/// basis index, so `X ⊗ Z` on sites (0, 1) is `kron(X, Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    n_sites: usize,
    mat: CMatrix,
}

impl DenseOperator {
    pub fn from_matrix(n_sites: usize, mat: CMatrix) -> Result<Self> {
        let dim = 1usize << n_sites;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::InvalidInput(format!(
                "matrix of shape {}x{} is not 2^{n_sites}-dimensional",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { n_sites, mat })
    }

    pub fn identity(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        Self {
            n_sites,
            mat: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        Self {
            n_sites,
            mat: CMatrix::zeros(dim, dim),
        }
    }

    pub fn from_pauli_sum(s: &PauliSum, cap: usize) -> Result<Self> {
        let n = s.n_sites();
        check_cap(n, cap)?;
        let dim = 1usize << n;
        let mut mat = CMatrix::zeros(dim, dim);
        for (string, c) in s.iter() {
            let (xm, zm) = dense_masks(string, n);
            let phase = c * i_pow(((xm & zm).count_ones() % 4) as u8);
            // X^x Z^z |b> = (-1)^{|z & b|} |b ^ x>
            for b in 0..dim {
                let sign = if (zm & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                mat[(b ^ xm, b)] += phase * sign;
            }
        }
        Ok(Self { n_sites: n, mat })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_sites: self.n_sites,
            mat: self.mat.adjoint(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            n_sites: self.n_sites,
            mat: complex_product(&self.mat, &other.mat),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n_sites: self.n_sites,
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            n_sites: self.n_sites,
            mat: &self.mat - &other.mat,
        }
    }

    pub fn scale(&self, f: Complex64) -> Self {
        Self {
            n_sites: self.n_sites,
            mat: &self.mat * f,
        }
    }

    /// `self^k` by binary powering.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut result = Self::identity(self.n_sites);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Max |A - A^†| entry.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.mat - self.mat.adjoint()))
    }

    /// ‖A^† A − I‖ in max-entry norm.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.dim();
        max_abs(&(self.mat.adjoint() * &self.mat - CMatrix::identity(dim, dim)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Pauli decomposition `Σ_P Tr(P A) / 2^n · P`.
    pub fn to_pauli_sum(&self) -> PauliSum {
        let n = self.n_sites;
        let dim = self.dim();
        let mut out = PauliSum::zero(n);
        for code in 0..(1usize << (2 * n)) {
            let mut s = PauliString::identity(n);
            for site in 0..n {
                let op = match (code >> (2 * site)) & 3 {
                    0 => crate::pauli::Pauli::I,
                    1 => crate::pauli::Pauli::X,
                    2 => crate::pauli::Pauli::Z,
                    _ => crate::pauli::Pauli::Y,
                };
                s.set(site, op);
            }
            let (xm, zm) = dense_masks(&s, n);
            let phase = i_pow(((xm & zm).count_ones() % 4) as u8);
            // Tr(P A) = Σ_b <b|P A|b>, P^† = P, <b|P = (P|b>)^† with P|b> = phase (-1)^{|z&b|} |b^x>
            let mut tr = ZERO;
            for b in 0..dim {
                let sign = if (zm & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                tr += (phase * sign).conj() * self.mat[(b ^ xm, b)];
            }
            let coeff = tr / dim as f64;
            if coeff.norm() >= out.prune_tol() {
                out.add_term(s, coeff);
            }
        }
        out
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub(crate) fn check_cap(n_sites: usize, cap: usize) -> Result<()> {
    if n_sites > cap {
        return Err(Error::DenseCapExceeded { n_sites, cap });
    }
    Ok(())
}

fn dense_masks(s: &PauliString, n: usize) -> (usize, usize) {
    let mut xm = 0usize;
    let mut zm = 0usize;
    for site in 0..n {
        let bit = 1usize << (n - 1 - site);
        let (w, b) = (site / 64, site % 64);
        if (s.x_words()[w] >> b) & 1 == 1 {
            xm |= bit;
        }
        if (s.z_words()[w] >> b) & 1 == 1 {
            zm |= bit;
        }
    }
    (xm, zm)
}

/// Below this dimension the generic complex product is fast enough.
const SPLIT_PRODUCT_DIM: usize = 64;

/// `a * b`. Large products go through real and imaginary parts, which
/// reach the optimized real matrix kernels.
pub(crate) fn complex_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    if a.nrows().max(a.ncols()).max(b.ncols()) < SPLIT_PRODUCT_DIM {
        return a * b;
    }
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

/// Eigendecomposition `H = V diag(λ) V^†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
    n_sites: usize,
}

impl HermitianEigen {
    pub fn new(h: &DenseOperator) -> Result<Self> {
        let defect = h.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: defect });
        }
        // symmetrize away rounding before factorizing
        let sym = (h.matrix() + h.matrix().adjoint()) * Complex64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        Ok(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
            n_sites: h.n_sites(),
        })
    }

    /// `exp(-i H tau)`.
    pub fn exp_minus_i(&self, tau: f64) -> DenseOperator {
        if tau == 0.0 {
            return DenseOperator::identity(self.n_sites);
        }
        self.apply_diag(|l| Complex64::from_polar(1.0, -l * tau))
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn apply_diag(&self, f: impl Fn(f64) -> Complex64) -> DenseOperator {
        let mut scaled = self.vectors.clone();
        for (j, l) in self.values.iter().enumerate() {
            let d = f(*l);
            for v in scaled.column_mut(j).iter_mut() {
                *v *= d;
            }
        }
        DenseOperator {
            n_sites: self.n_sites,
            mat: complex_product(&scaled, &self.vectors.adjoint()),
        }
    }
}

/// `exp(-i h tau)` for Hermitian `h`.
pub fn expm_hermitian_times_minus_i(h: &DenseOperator, tau: f64) -> Result<DenseOperator> {
    Ok(HermitianEigen::new(h)?.exp_minus_i(tau))
}

/// Largest |eigenvalue| of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    sym.symmetric_eigenvalues()
        .iter()
        .fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Spectral norm (largest singular value). Hermitian and anti-Hermitian
/// inputs take the eigenvalue path; everything else uses `λ_max(A^† A)`.
pub fn spectral_norm(a: &DenseOperator) -> f64 {
    let m = a.matrix();
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    let herm = max_abs(&(m - m.adjoint()));
    if herm <= 1e-14 * scale {
        return hermitian_norm(m);
    }
    let anti = max_abs(&(m + m.adjoint()));
    if anti <= 1e-14 * scale {
        return hermitian_norm(&(m * Complex64::new(0.0, 1.0)));
    }
    let gram = complex_product(&m.adjoint(), m);
    hermitian_norm(&gram).sqrt()
}

/// Principal logarithm of a unitary through its Schur form. Fails when an
/// eigenphase lies within `branch_margin` of ±π.
pub fn unitary_log(u: &DenseOperator, tau: f64, branch_margin: f64) -> Result<DenseOperator> {
    let (q, t) = u.matrix().clone().schur().unpack();
    let dim = u.dim();
    let mut d = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let z = t[(j, j)];
        let phase = z.arg();
        if phase.abs() > std::f64::consts::PI - branch_margin {
            return Err(Error::LogBranch { tau, phase });
        }
        d[(j, j)] = Complex64::new(z.norm().ln(), phase);
    }
    DenseOperator::from_matrix(u.n_sites(), &q * d * q.adjoint())
}

/// Fits `i log U(tau) = Σ_{q=1}^{degree} G_q tau^q` by least squares over the
/// samples and returns the Pauli decompositions of `G_1 .. G_degree`.
///
/// For `U(tau) = exp(-i H tau - i Σ Φ_q tau^q)` this recovers `G_1 = H` and
/// `G_q = Φ_q`.
pub fn log_series_fit(samples: &[(f64, DenseOperator)], degree: usize) -> Result<Vec<PauliSum>> {
    if samples.len() < degree {
        return Err(Error::InvalidInput(format!(
            "{} samples cannot determine {degree} coefficients",
            samples.len()
        )));
    }
    if degree == 0 {
        return Err(Error::InvalidInput("fit degree must be positive".into()));
    }
    let dim = samples[0].1.dim();
    if dim > 16 {
        return Err(Error::InvalidInput(format!(
            "log-series fit is limited to dimension 16, got {dim}"
        )));
    }
    let n_sites = samples[0].1.n_sites();
    let h = samples
        .iter()
        .map(|(t, _)| t.abs())
        .fold(0.0, f64::max);
    if h == 0.0 {
        return Err(Error::InvalidInput("all samples at tau = 0".into()));
    }
    let mut seen: Vec<f64> = Vec::new();
    for (t, _) in samples {
        if seen.iter().any(|s| (s - t).abs() < 1e-15 * h) {
            return Err(Error::InvalidInput(format!("duplicate sample tau = {t}")));
        }
        seen.push(*t);
    }

    let rows = samples.len();
    let cols = 2 * dim * dim;
    let mut design = DMatrix::<f64>::zeros(rows, degree);
    let mut rhs = DMatrix::<f64>::zeros(rows, cols);
    for (r, (tau, u)) in samples.iter().enumerate() {
        // scaled variable s = tau / h keeps the design matrix well conditioned
        let s = tau / h;
        for q in 0..degree {
            design[(r, q)] = s.powi(q as i32 + 1);
        }
        let gen = unitary_log(u, *tau, 0.1 * std::f64::consts::PI)?
            .scale(Complex64::new(0.0, 1.0));
        for (idx, v) in gen.matrix().iter().enumerate() {
            rhs[(r, 2 * idx)] = v.re;
            rhs[(r, 2 * idx + 1)] = v.im;
        }
    }
    let svd = design.svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidInput(format!("least-squares solve failed: {e}")))?;

    let mut out = Vec::with_capacity(degree);
    for q in 0..degree {
        let unscale = h.powi(q as i32 + 1);
        let mut m = CMatrix::zeros(dim, dim);
        for (idx, v) in m.iter_mut().enumerate() {
            *v = Complex64::new(sol[(q, 2 * idx)], sol[(q, 2 * idx + 1)]) / unscale;
        }
        out.push(DenseOperator::from_matrix(n_sites, m)?.to_pauli_sum());
    }
    Ok(out)
}
