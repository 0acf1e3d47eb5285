use serde::Serialize;

use super::{catalytic_channel, Dynamics, FrameConfig, FrameScenario};
use crate::channel::Symmetry;
use crate::linalg::{c, diag_real, CMat, CVec};
use crate::par::{self, Exec};
use crate::{Error, Result};

/// Qubit `S` with charge `diag(0, 1)` and an `N`-level ladder `C` with charge
/// `diag(0, …, N−1)` prepared in the uniform superposition.
///
/// `U` rotates every sector `span{|1,n⟩, |0,n+1⟩}` the way
/// `exp(−iθσ_x/2)` rotates `span{|1⟩, |0⟩}` and acts trivially on the two
/// one-dimensional boundary sectors `|0,0⟩` and `|1,N−1⟩`; those are
/// what keep `ε > 0` at finite `N`.
pub fn phase_reference_scenario(n: usize, theta: f64) -> Result<FrameScenario> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("ladder needs at least 2 levels, got {n}")));
    }
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut u = crate::linalg::identity(2 * n);
    for k in 0..n - 1 {
        // |1,k⟩ = index n + k, |0,k+1⟩ = index k + 1
        let (a, b) = (n + k, k + 1);
        u[(a, a)] = c(co, 0.0);
        u[(b, b)] = c(co, 0.0);
        u[(a, b)] = c(0.0, -si);
        u[(b, a)] = c(0.0, -si);
    }
    let phi = CVec::from_element(n, c(1.0 / (n as f64).sqrt(), 0.0));
    let sigma = crate::linalg::projector(&phi);
    let target = CMat::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -si), c(0.0, -si), c(co, 0.0)]);
    let ladder: Vec<f64> = (0..n).map(|k| k as f64).collect();
    FrameScenario::new(
        Dynamics::Unitary(u),
        sigma,
        target,
        Symmetry::Generators(vec![diag_real(&[0.0, 1.0])]),
        Symmetry::Generators(vec![diag_real(&ladder)]),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub theta: f64,
    pub epsilon: f64,
    pub bound: f64,
    pub worst_distance: f64,
    pub mean_distance: f64,
    pub status: String,
}

/// Runs [`catalytic_channel`] on [`phase_reference_scenario`] for every `N`.
/// A row is `pass` when every check of the report holds and `failed`
/// otherwise; an unconverged diamond norm is flagged with `(bounds)` and the
/// upper bound is used for `ε`.
pub fn degradation_sweep(ns: &[usize], theta: f64, cfg: &FrameConfig, exec: Exec) -> Result<Vec<SweepRow>> {
    par::map(exec, ns, |&n| {
        let sc = phase_reference_scenario(n, theta)?;
        let r = catalytic_channel(&sc, cfg, exec)?.report;
        let mut status = if r.passed { "pass" } else { "failed" }.to_string();
        if !r.diamond.converged() {
            status.push_str(" (bounds)");
        }
        Ok(SweepRow {
            n,
            theta,
            epsilon: r.epsilon,
            bound: r.bound,
            worst_distance: r.worst_distance,
            mean_distance: r.mean_distance,
            status,
        })
    })
    .into_iter()
    .collect()
}

/// `N,theta,epsilon,bound,worst_distance,mean_distance,status`
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(["N", "theta", "epsilon", "bound", "worst_distance", "mean_distance", "status"])
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
