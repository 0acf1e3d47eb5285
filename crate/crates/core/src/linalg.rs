//! Dense complex linear algebra: Hermitian eigendecomposition, functional
//! calculus, tensor products, partial traces and state metrics.
//!
//! All spectral work goes through [`eigh`]. Matrices are plain
//! [`nalgebra::DMatrix`] values over [`C64`]; the state/unitary/Hermitian
//! invariants are enforced by the `check_*` validators at API boundaries.
//!
//! Tensor products use the Kronecker convention where the left factor carries
//! the slow (outer) index: `(a ⊗ b)[(i,k),(j,l)] = a[i,j] · b[k,l]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Structural tolerance for Hermiticity and unitarity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOL, 0)` are treated as round-off and clamped.
pub const PSD_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff used for ranks and supports.
pub const RANK_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn zeros(d: usize) -> CMat {
    CMat::zeros(d, d)
}

/// Builds a square matrix from real row-major entries.
pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let d = rows.len();
    CMat::from_fn(d, d, |i, j| c(rows[i][j], 0.0))
}

pub fn diag_real(values: &[f64]) -> CMat {
    let d = values.len();
    CMat::from_fn(d, d, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

/// Computational basis ket `|i⟩` in dimension `d`.
pub fn ket(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = ONE;
    v
}

/// Outer product `|u⟩⟨v|`.
pub fn outer(u: &CVec, v: &CVec) -> CMat {
    u * v.adjoint()
}

/// Rank-one projector `|v⟩⟨v|`.
pub fn projector(v: &CVec) -> CMat {
    outer(v, v)
}

/// Matrix unit `|i⟩⟨j|`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMat {
    let mut m = zeros(d);
    m[(i, j)] = ONE;
    m
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Largest absolute entry, `‖m‖_max`.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `‖a − b‖_max`, or infinity when the shapes differ.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// `(m + m†)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && hermiticity_defect(m) <= tol
}

pub fn unitarity_defect(u: &CMat) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    unitarity_defect(u) <= tol
}

pub fn check_square(m: &CMat, what: &str) -> Result<usize> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "{what} must be a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn check_dim(m: &CMat, d: usize, what: &str) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::Dimension(format!(
            "{what} must be {d}x{d}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub fn check_hermitian(m: &CMat, tol: f64) -> Result<()> {
    check_square(m, "Hermitian matrix")?;
    let defect = hermiticity_defect(m);
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

pub fn check_unitary(u: &CMat, tol: f64) -> Result<()> {
    check_square(u, "unitary")?;
    let defect = unitarity_defect(u);
    if defect > tol {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

/// Validates a density matrix: Hermitian, eigenvalues ≥ −`PSD_TOL`, unit trace.
pub fn check_density(rho: &CMat) -> Result<()> {
    check_hermitian(rho, HERMITIAN_TOL)?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
    }
    let min = eigh(rho).values[0];
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    Ok(())
}

pub fn check_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMat,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> CVec {
        self.vectors.column(k).into_owned()
    }

    /// Rebuilds `Σ f(λ_k) |v_k⟩⟨v_k|`.
    pub fn map<F: Fn(f64) -> C64>(&self, f: F) -> CMat {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for k in 0..d {
            let w = f(self.values[k]);
            scaled.column_mut(k).scale_mut_complex(w);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Absolute cutoff below which an eigenvalue counts as zero.
    pub fn support_cutoff(&self, rel_tol: f64) -> f64 {
        let scale = self
            .values
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        rel_tol * scale.max(1e-300)
    }
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, w: C64);
}

impl<S> ScaleComplex for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, w: C64) {
        for z in self.iter_mut() {
            *z *= w;
        }
    }
}

/// Hermitian eigendecomposition. The input is symmetrized first, so tiny
/// anti-Hermitian round-off is ignored.
pub fn eigh(m: &CMat) -> Eigh {
    let h = hermitian_part(m);
    let d = h.nrows();
    if d == 0 {
        return Eigh {
            values: vec![],
            vectors: zeros(0),
        };
    }
    let se = nalgebra::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(d, d, |i, j| se.eigenvectors[(i, order[j])]);
    Eigh { values, vectors }
}

pub fn eigenvalues(m: &CMat) -> Vec<f64> {
    eigh(m).values
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn func_calc<F: Fn(f64) -> f64>(a: &CMat, f: F) -> CMat {
    eigh(a).map(|l| c(f(l), 0.0))
}

/// `exp(x)` for Hermitian `x`.
pub fn expm_hermitian(x: &CMat) -> CMat {
    func_calc(x, f64::exp)
}

/// `exp(−i t h)` for Hermitian `h`.
pub fn unitary_from_hamiltonian(h: &CMat, t: f64) -> CMat {
    eigh(h).map(|l| C64::from_polar(1.0, -t * l))
}

/// Spectral data of a positive semi-definite matrix with the support cut
/// fixed once, for repeated real powers.
#[derive(Clone, Debug)]
pub struct PsdCalculus {
    eig: Eigh,
    cutoff: f64,
}

impl PsdCalculus {
    /// Fails when an eigenvalue lies below `−tol · max(1, λ_max)`.
    pub fn new(a: &CMat, tol: f64) -> Result<Self> {
        check_hermitian(a, HERMITIAN_TOL.max(tol))?;
        let eig = eigh(a);
        let scale = eig.max_value().abs().max(1.0);
        if let Some(&min) = eig.values.first() {
            if min < -tol * scale {
                return Err(Error::NotPsd(min));
            }
        }
        let cutoff = tol * scale;
        Ok(Self { eig, cutoff })
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    /// Number of eigenvalues above the support cutoff.
    pub fn rank(&self) -> usize {
        self.eig.values.iter().filter(|&&l| l > self.cutoff).count()
    }

    /// `a^s` with `0^s = 0` for every `s`, including `s = 0`.
    pub fn power(&self, s: f64) -> CMat {
        let cut = self.cutoff;
        self.eig
            .map(|l| if l > cut { c(l.powf(s), 0.0) } else { ZERO })
    }

    /// `a^s · ln a` on the support, zero on the kernel.
    pub fn power_log(&self, s: f64) -> CMat {
        let cut = self.cutoff;
        self.eig.map(|l| {
            if l > cut {
                c(l.powf(s) * l.ln(), 0.0)
            } else {
                ZERO
            }
        })
    }
}

/// Real power of a PSD matrix by functional calculus with `0^s = 0`.
pub fn hermitian_power(a: &CMat, s: f64) -> Result<CMat> {
    Ok(PsdCalculus::new(a, PSD_TOL)?.power(s))
}

/// Square root of a PSD matrix; eigenvalues within round-off of zero are clamped.
pub fn sqrt_psd(a: &CMat) -> CMat {
    func_calc(a, |l| l.max(0.0).sqrt())
}

/// Orthogonal projector onto the support of a Hermitian matrix.
pub fn support_projector(a: &CMat, rel_tol: f64) -> CMat {
    let e = eigh(a);
    let cut = e.support_cutoff(rel_tol);
    e.map(|l| if l.abs() > cut { ONE } else { ZERO })
}

/// Positive part `max(a, 0)` of a Hermitian matrix.
pub fn positive_part(a: &CMat) -> CMat {
    func_calc(a, |l| l.max(0.0))
}

/// Rank with eigenvalue cutoff `rel_tol` relative to the largest magnitude.
pub fn rank(a: &CMat, rel_tol: f64) -> usize {
    let e = eigh(a);
    let cut = e.support_cutoff(rel_tol);
    e.values.iter().filter(|l| l.abs() > cut).count()
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm_hermitian(a: &CMat) -> f64 {
    eigh(a).values.iter().map(|l| l.abs()).sum()
}

/// Trace norm of an arbitrary square matrix (sum of singular values).
pub fn trace_norm(a: &CMat) -> f64 {
    a.clone().singular_values().iter().sum()
}

/// Largest singular value.
pub fn operator_norm(a: &CMat) -> f64 {
    a.clone().singular_values().iter().fold(0.0, |m, &s| m.max(s))
}

/// Kronecker product with `a` as the outer factor.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn tensor_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

/// Kronecker product of a list, left to right. An empty list gives `[1]`.
pub fn tensor_all(factors: &[&CMat]) -> CMat {
    factors
        .iter()
        .fold(identity(1), |acc, f| tensor(&acc, f))
}

/// Reduced matrix on the factors listed in `keep` (in increasing factor order).
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Dimension("factor dimensions must be positive".into()));
    }
    if !m.is_square() || m.nrows() != total {
        return Err(Error::Dimension(format!(
            "matrix is {}x{} but factor dimensions {dims:?} multiply to {total}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::Dimension(format!(
                "factor index {k} out of range for {} factors",
                dims.len()
            )));
        }
        kept[k] = true;
    }
    // strides for the full row-major index
    let mut strides = vec![1usize; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * dims[f + 1];
    }
    let kept_factors: Vec<usize> = (0..dims.len()).filter(|&f| kept[f]).collect();
    let traced_factors: Vec<usize> = (0..dims.len()).filter(|&f| !kept[f]).collect();
    let offsets = |factors: &[usize]| -> Vec<usize> {
        let n: usize = factors.iter().map(|&f| dims[f]).product();
        (0..n)
            .map(|mut idx| {
                let mut off = 0;
                for &f in factors.iter().rev() {
                    off += (idx % dims[f]) * strides[f];
                    idx /= dims[f];
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&kept_factors);
    let traced_off = offsets(&traced_factors);
    let dk = kept_off.len();
    Ok(CMat::from_fn(dk, dk, |r, s| {
        traced_off
            .iter()
            .map(|&t| m[(kept_off[r] + t, kept_off[s] + t)])
            .sum()
    }))
}

/// Trace over the second factor of a bipartite `d1 × d2` operator.
pub fn ptrace_second(m: &CMat, d1: usize, d2: usize) -> Result<CMat> {
    partial_trace(m, &[d1, d2], &[0])
}

/// Trace over the first factor of a bipartite `d1 × d2` operator.
pub fn ptrace_first(m: &CMat, d1: usize, d2: usize) -> Result<CMat> {
    partial_trace(m, &[d1, d2], &[1])
}

fn check_same_dim(a: &CMat, b: &CMat) -> Result<()> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::Dimension(format!(
            "operands are {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Trace distance `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &CMat, sigma: &CMat) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    Ok(0.5 * trace_norm_hermitian(&(rho - sigma)))
}

/// Uhlmann fidelity `Tr √(√ρ σ √ρ)` (not squared).
pub fn fidelity(rho: &CMat, sigma: &CMat) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    // ‖√ρ √σ‖₁ keeps round-off linear; the √ of √ρσ√ρ would amplify it
    let root = |m: &CMat| {
        let e = eigh(m);
        let cut = e.support_cutoff(1e-14);
        e.map(|l| if l > cut { c(l.sqrt(), 0.0) } else { ZERO })
    };
    Ok(trace_norm(&(root(rho) * root(sigma))))
}

/// Von Neumann entropy in nats, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &CMat) -> f64 {
    eigh(rho)
        .values
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum()
}

/// Samples a Haar-random unitary (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { ONE };
        for i in 0..d {
            u[(i, k)] *= phase;
        }
    }
    u
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im) / std::f64::consts::SQRT_2
    })
}

pub fn random_pure_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let g = ginibre(d, 1, rng);
    let n = g.norm();
    g.column(0).into_owned().unscale(n)
}

pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    projector(&random_pure_vector(d, rng))
}

/// Density matrix from the Hilbert–Schmidt measure (`G G† / Tr`).
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    random_density_rank(d, d, rng)
}

/// Random density matrix of rank at most `k` (induced measure).
pub fn random_density_rank<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> CMat {
    let g = ginibre(d, k, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    hermitian_part(&m.unscale(tr))
}

/// Hermitian matrix from the GUE-like ensemble `(G + G†)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    hermitian_part(&ginibre(d, d, rng))
}

/// Vectorization stacking rows: `vec(X)[i·d + j] = X[i,j]`.
pub fn vec_rows(m: &CMat) -> CVec {
    CVec::from_iterator(m.nrows() * m.ncols(), m.transpose().iter().copied())
}

pub fn unvec_rows(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Polar factor `Q` of `x = Q P` with `Q` unitary.
pub fn polar_unitary(x: &CMat) -> CMat {
    let svd = x.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    u * v_t
}

/// Completes `v` (unit norm) to a unitary whose first column is `v`.
pub fn unitary_with_first_column(v: &CVec) -> CMat {
    let d = v.len();
    let mut cols: Vec<CVec> = vec![v.normalize()];
    for k in 0..d {
        if cols.len() == d {
            break;
        }
        let mut e = ket(d, k);
        for q in &cols {
            let proj = q.dotc(&e);
            e -= q * proj;
        }
        let n = e.norm();
        if n > 1e-8 {
            cols.push(e.unscale(n));
        }
    }
    CMat::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn sx() -> CMat {
        from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }
    fn sz() -> CMat {
        diag_real(&[1.0, -1.0])
    }

    #[test]
    fn tensor_identity_and_diagonal() {
        assert_eq!(tensor(&identity(2), &identity(3)), identity(6));
        let t = tensor(&diag_real(&[1.0, 2.0]), &diag_real(&[3.0, 4.0]));
        assert_eq!(t, diag_real(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn tensor_matches_index_formula() {
        let (a, b) = (sx(), sz());
        let t = tensor(&a, &b);
        for i in 0..2 {
            for k in 0..2 {
                for j in 0..2 {
                    for l in 0..2 {
                        assert_eq!(t[(i * 2 + k, j * 2 + l)], a[(i, j)] * b[(k, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_product_and_full() {
        let mut r = rng();
        let rho = random_density(2, &mut r);
        let sigma = random_density(3, &mut r).scale(2.5);
        let m = tensor(&rho, &sigma);
        let red = partial_trace(&m, &[2, 3], &[0]).unwrap();
        assert!(max_abs_diff(&red, &rho.scale(2.5)) < 1e-12);
        let red1 = partial_trace(&m, &[2, 3], &[1]).unwrap();
        assert!(max_abs_diff(&red1, &sigma) < 1e-12);
        let none = partial_trace(&m, &[2, 3], &[]).unwrap();
        assert_eq!(none.shape(), (1, 1));
        assert!((none[(0, 0)] - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_projector() {
        let s = 1.0 / 2f64.sqrt();
        let omega = CVec::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]);
        let red = ptrace_second(&projector(&omega), 2, 2).unwrap();
        assert!(max_abs_diff(&red, &identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_middle_factor() {
        let mut r = rng();
        let (a, b, cc) = (
            random_density(2, &mut r),
            random_density(3, &mut r),
            random_density(2, &mut r),
        );
        let m = tensor_all(&[&a, &b, &cc]);
        let red = partial_trace(&m, &[2, 3, 2], &[0, 2]).unwrap();
        assert!(max_abs_diff(&red, &tensor(&a, &cc)) < 1e-12);
        assert!(partial_trace(&m, &[2, 2, 2], &[0]).is_err());
    }

    #[test]
    fn power_examples() {
        let p = hermitian_power(&diag_real(&[4.0, 9.0]), 0.5).unwrap();
        assert!(max_abs_diff(&p, &diag_real(&[2.0, 3.0])) < 1e-12);
        let p0 = hermitian_power(&diag_real(&[1.0, 0.0]), 0.0).unwrap();
        assert!(max_abs_diff(&p0, &diag_real(&[1.0, 0.0])) < 1e-15);
        let full = hermitian_power(&diag_real(&[2.0, 0.5]), 0.0).unwrap();
        assert!(max_abs_diff(&full, &identity(2)) < 1e-15);
        assert!(matches!(
            hermitian_power(&diag_real(&[1.0, -0.1]), 0.5),
            Err(Error::NotPsd(_))
        ));
        // round-off negatives are clamped
        assert!(hermitian_power(&diag_real(&[1.0, -1e-13]), 0.5).is_ok());
    }

    #[test]
    fn power_round_trip_on_support() {
        let mut r = rng();
        let a = random_density_rank(4, 3, &mut r);
        let s = 0.37;
        let back = hermitian_power(&hermitian_power(&a, s).unwrap(), 1.0 / s).unwrap();
        assert!(max_abs_diff(&back, &a) < 1e-10);
    }

    #[test]
    fn func_calc_examples() {
        let e = func_calc(&zeros(3), |x| (-x).exp());
        assert!(max_abs_diff(&e, &identity(3)) < 1e-15);
        let e = func_calc(&diag_real(&[0.0, 2f64.ln()]), |x| (-x).exp());
        assert!(max_abs_diff(&e, &diag_real(&[1.0, 0.5])) < 1e-15);
    }

    /// Taylor series with scaling and squaring, independent of `eigh`.
    fn expm_series(a: &CMat) -> CMat {
        let norm = max_abs(a) * a.nrows() as f64;
        let k = (norm.log2().ceil().max(0.0) as i32) + 4;
        let scaled = a.unscale(2f64.powi(k));
        let mut term = identity(a.nrows());
        let mut sum = identity(a.nrows());
        for n in 1..30 {
            term = &term * &scaled / c(n as f64, 0.0);
            sum += &term;
        }
        for _ in 0..k {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn exp_matches_series_oracle() {
        let mut r = rng();
        for _ in 0..5 {
            let x = random_hermitian(4, &mut r);
            let via_eig = func_calc(&x, |l| (-l).exp());
            let via_series = expm_series(&(-x.clone()));
            assert!(max_abs_diff(&via_eig, &via_series) < 1e-10);
        }
    }

    #[test]
    fn trace_distance_examples() {
        let mut r = rng();
        let rho = random_density(3, &mut r);
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-15);
        let d = trace_distance(&diag_real(&[1.0, 0.0]), &diag_real(&[0.0, 1.0])).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        assert!(trace_distance(&identity(2), &identity(3)).is_err());
    }

    #[test]
    fn trace_distance_against_closed_form_for_qubits() {
        // for qubits D = |r − s| / 2 in Bloch coordinates
        let mut r = rng();
        for _ in 0..10 {
            let a = random_density(2, &mut r);
            let b = random_density(2, &mut r);
            let bloch = |m: &CMat| {
                [
                    2.0 * m[(0, 1)].re,
                    -2.0 * m[(0, 1)].im,
                    (m[(0, 0)] - m[(1, 1)]).re,
                ]
            };
            let (ra, rb) = (bloch(&a), bloch(&b));
            let expect = 0.5
                * ((ra[0] - rb[0]).powi(2) + (ra[1] - rb[1]).powi(2) + (ra[2] - rb[2]).powi(2))
                    .sqrt();
            assert!((trace_distance(&a, &b).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_examples() {
        let mut r = rng();
        let rho = random_density(3, &mut r);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        let f = fidelity(&diag_real(&[1.0, 0.0]), &identity(2).scale(0.5)).unwrap();
        assert!((f - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        let psi = random_pure_vector(3, &mut r);
        let sigma = random_density(3, &mut r);
        let f = fidelity(&projector(&psi), &sigma).unwrap();
        let overlap = psi.dotc(&(&sigma * &psi)).re;
        assert!((f * f - overlap).abs() < 1e-10);
    }

    #[test]
    fn entropy_examples() {
        let mut r = rng();
        assert!(von_neumann_entropy(&random_pure_state(4, &mut r)).abs() < 1e-12);
        let h = von_neumann_entropy(&identity(5).scale(0.2));
        assert!((h - 5f64.ln()).abs() < 1e-12);
        let rho = random_density(4, &mut r);
        let u = haar_unitary(4, &mut r);
        let rot = &u * &rho * u.adjoint();
        assert!((von_neumann_entropy(&rot) - von_neumann_entropy(&rho)).abs() < 1e-10);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut r = rng();
        for d in 1..6 {
            assert!(is_unitary(&haar_unitary(d, &mut r), 1e-12));
        }
    }

    #[test]
    fn unitary_completion() {
        let mut r = rng();
        let v = random_pure_vector(4, &mut r);
        let u = unitary_with_first_column(&v);
        assert!(is_unitary(&u, 1e-12));
        assert!((u.column(0) - &v).norm() < 1e-12);
    }

    #[test]
    fn density_validation() {
        assert!(check_density(&identity(2).scale(0.5)).is_ok());
        assert!(check_density(&identity(2)).is_err());
        assert!(check_density(&diag_real(&[1.5, -0.5])).is_err());
    }
}
