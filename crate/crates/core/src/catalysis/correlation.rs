//! Entropy bookkeeping for a catalyst that ends up correlated with the rest.

use serde::Serialize;

use crate::linalg::{
    check_density, check_dim, check_unitary, max_abs_diff, partial_trace, rank, tensor,
    von_neumann_entropy, CMat, HERMITIAN_TOL, RANK_TOL,
};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationReport {
    /// `I(C : SE)` of the final state, in nats.
    pub mutual_information: f64,
    /// `H(ρ′_SE) − H(ρ_SE)`, in nats.
    pub entropy_change: f64,
    pub rank_before: usize,
    pub rank_after: usize,
    /// `‖Tr_SE[final] − σ_C‖_max`
    pub marginal_deviation: f64,
    pub marginal_preserved: bool,
    /// `|I − ΔH|`; equal to zero up to round-off whenever the marginal is preserved.
    pub balance_residual: f64,
}

/// Compares the correlation built up between `C` and `SE` with the entropy
/// change of `SE` under `U` acting on `(SE) ⊗ C`.
pub fn correlation_balance(
    u: &CMat,
    rho_se: &CMat,
    sigma_c: &CMat,
    tol: f64,
) -> Result<CorrelationReport> {
    check_density(rho_se)?;
    check_density(sigma_c)?;
    let (d_se, d_c) = (rho_se.nrows(), sigma_c.nrows());
    check_dim(u, d_se * d_c, "unitary")?;
    check_unitary(u, HERMITIAN_TOL)?;
    let fin = u * tensor(rho_se, sigma_c) * u.adjoint();
    let se_after = partial_trace(&fin, &[d_se, d_c], &[0])?;
    let c_after = partial_trace(&fin, &[d_se, d_c], &[1])?;
    // the global entropy is invariant under U
    let h_total = von_neumann_entropy(rho_se) + von_neumann_entropy(sigma_c);
    let (h_se0, h_se1) = (von_neumann_entropy(rho_se), von_neumann_entropy(&se_after));
    let mutual_information = von_neumann_entropy(&c_after) + h_se1 - h_total;
    let entropy_change = h_se1 - h_se0;
    let marginal_deviation = max_abs_diff(&c_after, sigma_c);
    Ok(CorrelationReport {
        mutual_information,
        entropy_change,
        rank_before: rank(rho_se, RANK_TOL),
        rank_after: rank(&se_after, RANK_TOL),
        marginal_deviation,
        marginal_preserved: marginal_deviation <= tol,
        balance_residual: (mutual_information - entropy_change).abs(),
    })
}

/// `Σ_c U_c ⊗ |c⟩⟨c|`: a unitary on `X ⊗ C` controlled by the `C` basis. It
/// leaves any `C`-diagonal marginal unchanged.
pub fn controlled_unitary(blocks: &[CMat]) -> Result<CMat> {
    let d_c = blocks.len();
    let d = blocks
        .first()
        .ok_or_else(|| Error::InvalidInput("no control blocks".into()))?
        .nrows();
    let mut out = CMat::zeros(d * d_c, d * d_c);
    for (k, b) in blocks.iter().enumerate() {
        check_dim(b, d, "control block")?;
        check_unitary(b, HERMITIAN_TOL)?;
        out += tensor(b, &crate::linalg::matrix_unit(d_c, k, k));
    }
    Ok(out)
}
