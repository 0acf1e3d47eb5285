//! Unitary dilations `ρ ↦ Tr_E[U(ρ ⊗ ω_E)U†]` and covariance certificates
//! for them.

use rand::Rng;

use super::{Channel, Symmetry, CHOI_CUTOFF};
use crate::linalg::{
    check_density, check_unitary, commutator, eigh, haar_unitary, max_abs, max_abs_diff, CMat,
    HERMITIAN_TOL, ZERO,
};
use crate::repr::{gibbs_state, kronecker_sum};
use crate::{Error, Result};

/// Which factor of `S ⊗ E` is traced out after the unitary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Discard {
    #[default]
    Environment,
    System,
}

#[derive(Clone, Debug)]
pub struct DilationSpec {
    pub d_s: usize,
    pub d_e: usize,
    pub omega_e: CMat,
    pub u: CMat,
    pub discard: Discard,
}

impl DilationSpec {
    pub fn new(d_s: usize, omega_e: CMat, u: CMat) -> Result<Self> {
        let d_e = omega_e.nrows();
        check_density(&omega_e)?;
        check_unitary(&u, HERMITIAN_TOL)?;
        if u.nrows() != d_s * d_e {
            return Err(Error::Dimension(format!(
                "unitary has dimension {}, expected {d_s}·{d_e}",
                u.nrows()
            )));
        }
        Ok(Self {
            d_s,
            d_e,
            omega_e,
            u,
            discard: Discard::Environment,
        })
    }

    pub fn discarding(mut self, discard: Discard) -> Self {
        self.discard = discard;
        self
    }
}

/// Kraus form `K_{m,l} = √q_l (1 ⊗ ⟨m|) U (1 ⊗ |e_l⟩)` for `ω_E = Σ q_l |e_l⟩⟨e_l|`
/// (with the roles of the factors swapped on the output side when the system
/// is discarded).
pub fn dilation_to_channel(d: &DilationSpec) -> Result<Channel> {
    let (ds, de) = (d.d_s, d.d_e);
    let e = eigh(&d.omega_e);
    let mut kraus = Vec::new();
    for (l, &q) in e.values.iter().enumerate() {
        if q <= CHOI_CUTOFF {
            continue;
        }
        let v = e.vector(l).scale(q.sqrt());
        // U (1 ⊗ |v⟩): (ds·de) × ds
        let uv = CMat::from_fn(ds * de, ds, |r, a| {
            (0..de).map(|b| d.u[(r, a * de + b)] * v[b]).sum()
        });
        match d.discard {
            Discard::Environment => {
                for m in 0..de {
                    kraus.push(CMat::from_fn(ds, ds, |r, a| uv[(r * de + m, a)]));
                }
            }
            Discard::System => {
                for m in 0..ds {
                    kraus.push(CMat::from_fn(de, ds, |r, a| uv[(m * de + r, a)]));
                }
            }
        }
    }
    let d_out = match d.discard {
        Discard::Environment => ds,
        Discard::System => de,
    };
    Ok(Channel::new(ds, d_out, kraus)?.simplify())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DilationReport {
    pub unitary_covariant: bool,
    pub unitary_violation: f64,
    pub environment_symmetric: bool,
    pub environment_violation: f64,
    pub environment_pure: bool,
    /// Both conditions hold, which certifies covariance of the channel.
    pub certified: bool,
}

/// Checks that `U` commutes with the joint action on `S ⊗ E` and that `ω_E`
/// is symmetric.
pub fn verify_covariant_dilation(
    d: &DilationSpec,
    sym_s: &Symmetry,
    sym_e: &Symmetry,
    tol: f64,
) -> Result<DilationReport> {
    if sym_s.dim() != Some(d.d_s) || sym_e.dim() != Some(d.d_e) {
        return Err(Error::Dimension(
            "symmetry dimensions do not match the dilation".into(),
        ));
    }
    let joint = sym_s.tensor(sym_e)?;
    let ops: &[CMat] = match &joint {
        Symmetry::Generators(g) => g,
        Symmetry::Group(rep) => rep.images(),
    };
    let uv = ops
        .iter()
        .map(|x| max_abs(&commutator(&d.u, x)))
        .fold(0.0, f64::max);
    let ev = sym_e.state_violation(&d.omega_e);
    let purity = (&d.omega_e * &d.omega_e).trace().re;
    Ok(DilationReport {
        unitary_covariant: uv <= tol,
        unitary_violation: uv,
        environment_symmetric: ev <= tol,
        environment_violation: ev,
        environment_pure: (purity - 1.0).abs() <= tol,
        certified: uv <= tol && ev <= tol,
    })
}

/// Thermal operation: `ω_E` the Gibbs state of `h_e` at `beta` and `U`
/// commuting with `h_s ⊗ 1 + 1 ⊗ h_e`.
pub fn thermal_operation(h_s: &CMat, h_e: &CMat, beta: f64, u: &CMat) -> Result<DilationSpec> {
    let total = kronecker_sum(&[h_s, h_e]);
    let defect = max_abs(&commutator(u, &total));
    if defect > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "unitary does not conserve the total energy (‖[U, H]‖_max = {defect:e})"
        )));
    }
    DilationSpec::new(h_s.nrows(), gibbs_state(h_e, beta)?, u.clone())
}

/// Haar-random unitary block-diagonal in the eigenspaces of `h`, so that
/// `[U, h] = 0`. Eigenvalues closer than `1e-9` share a block.
pub fn random_symmetric_unitary<R: Rng + ?Sized>(h: &CMat, rng: &mut R) -> Result<CMat> {
    crate::linalg::check_hermitian(h, HERMITIAN_TOL)?;
    let e = eigh(h);
    let d = e.dim();
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=d {
        if k == d || e.values[k] - e.values[k - 1] > 1e-9 {
            blocks.push((start, k - start));
            start = k;
        }
    }
    let mut inner = CMat::from_element(d, d, ZERO);
    for (s, len) in blocks {
        let v = haar_unitary(len, rng);
        inner.view_mut((s, s), (len, len)).copy_from(&v);
    }
    let u = &e.vectors * inner * e.vectors.adjoint();
    debug_assert!(max_abs_diff(&(&u * u.adjoint()), &crate::linalg::identity(d)) < 1e-9);
    Ok(u)
}
