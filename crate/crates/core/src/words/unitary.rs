//! Constructive search for a unitary `U` with `U Aᵢ U† = Bᵢ` for all `i`.

use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::check_tuple_dims;
use crate::linalg::{
    c, check_hermitian, eigh, haar_unitary, identity, max_abs, max_abs_diff, polar_unitary,
    unitary_from_hamiltonian, CMat, C64, HERMITIAN_TOL, ONE,
};
use crate::par::{self, Exec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnitarySearchConfig {
    pub seed: u64,
    pub restarts: usize,
    pub tol: f64,
    /// Gradient steps per restart.
    pub max_iter: usize,
    /// Coefficient redraws in the spectral stage.
    pub spectral_draws: usize,
}

impl Default for UnitarySearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 8,
            tol: 1e-8,
            max_iter: 4000,
            spectral_draws: 20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStage {
    Identity,
    Spectral,
    Optimization,
}

#[derive(Clone, Debug)]
pub struct UnitarySearch {
    /// Best unitary found; meaningful as a solution only when `success`.
    pub unitary: CMat,
    pub residual: f64,
    pub success: bool,
    pub stage: SearchStage,
}

/// `maxᵢ ‖U Aᵢ U† − Bᵢ‖_max`.
pub fn tuple_residual(u: &CMat, a: &[CMat], b: &[CMat]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| max_abs_diff(&(u * x * u.adjoint()), y))
        .fold(0.0, f64::max)
}

/// Spectral matching first, then gradient descent on the unitary group.
/// Failure is reported with the best residual; it does not certify that no
/// unitary exists.
pub fn find_simultaneous_unitary(
    a: &[CMat],
    b: &[CMat],
    cfg: &UnitarySearchConfig,
    exec: Exec,
) -> Result<UnitarySearch> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "tuples have {} and {} elements",
            a.len(),
            b.len()
        )));
    }
    let d = check_tuple_dims(a)?;
    if check_tuple_dims(b)? != d {
        return Err(Error::Dimension("tuples act on different dimensions".into()));
    }
    for m in a.iter().chain(b) {
        check_hermitian(m, HERMITIAN_TOL)?;
    }

    let id = identity(d);
    let r0 = tuple_residual(&id, a, b);
    if r0 <= cfg.tol {
        return Ok(UnitarySearch {
            unitary: id,
            residual: r0,
            success: true,
            stage: SearchStage::Identity,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(CMat, f64)> = None;
    for _ in 0..cfg.spectral_draws {
        let coeffs: Vec<f64> = (0..a.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let Some(u) = spectral_candidate(a, b, &coeffs) else {
            continue;
        };
        let u = refine(&u, a, b);
        let r = tuple_residual(&u, a, b);
        if r <= cfg.tol {
            return Ok(UnitarySearch {
                unitary: u,
                residual: r,
                success: true,
                stage: SearchStage::Spectral,
            });
        }
        if best.as_ref().is_none_or(|(_, br)| r < *br) {
            best = Some((u, r));
        }
    }

    let start = best.as_ref().map(|(u, _)| u.clone());
    let runs: Vec<(CMat, f64)> = par::map_range(exec, cfg.restarts.max(1), |k| {
        let init = match (&start, k) {
            (Some(u), 0) => u.clone(),
            _ => {
                let mut r = ChaCha8Rng::seed_from_u64(cfg.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k as u64 + 1)));
                haar_unitary(d, &mut r)
            }
        };
        let u = descend(init, a, b, cfg.max_iter, cfg.tol);
        let u = refine(&u, a, b);
        let r = tuple_residual(&u, a, b);
        (u, r)
    });
    // lowest residual, ties to the lowest restart index
    let (u, r) = runs
        .into_iter()
        .chain(best)
        .reduce(|acc, x| if x.1 < acc.1 { x } else { acc })
        .expect("at least one restart");
    Ok(UnitarySearch {
        success: r <= cfg.tol,
        unitary: u,
        residual: r,
        stage: SearchStage::Optimization,
    })
}

/// Diagonalizes `Σ cᵢAᵢ` and `Σ cᵢBᵢ`; when both spectra agree and are
/// simple, matches eigenvectors and fixes the free phases from off-diagonal
/// entries of the tuple in the matched bases.
fn spectral_candidate(a: &[CMat], b: &[CMat], coeffs: &[f64]) -> Option<CMat> {
    let d = a[0].nrows();
    let comb = |t: &[CMat]| {
        t.iter()
            .zip(coeffs)
            .fold(CMat::zeros(d, d), |acc, (m, &cf)| acc + m.scale(cf))
    };
    let (ea, eb) = (eigh(&comb(a)), eigh(&comb(b)));
    let scale = ea
        .values
        .iter()
        .chain(&eb.values)
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let spectra_match = ea
        .values
        .iter()
        .zip(&eb.values)
        .all(|(x, y)| (x - y).abs() <= 1e-8 * scale);
    let simple = ea.values.windows(2).all(|w| w[1] - w[0] > 1e-6 * scale);
    if !spectra_match || !simple {
        return None;
    }
    let (p, q) = (&ea.vectors, &eb.vectors);
    let ta: Vec<CMat> = a.iter().map(|m| p.adjoint() * m * p).collect();
    let tb: Vec<CMat> = b.iter().map(|m| q.adjoint() * m * q).collect();

    // maximum spanning forest over off-diagonal weights (Prim), so every
    // phase is fixed through the strongest available entry
    let mut phase = vec![ONE; d];
    let mut done = vec![false; d];
    for root in 0..d {
        if done[root] {
            continue;
        }
        done[root] = true;
        let mut heap: BinaryHeap<Edge> = BinaryHeap::new();
        push_edges(&mut heap, root, &ta, &done);
        while let Some(e) = heap.pop() {
            if done[e.to] {
                continue;
            }
            let (x, y) = (ta[e.elem][(e.from, e.to)], tb[e.elem][(e.from, e.to)]);
            // b_kl = φ_k a_kl φ̄_l  ⇒  φ_l = φ_k · conj(b_kl) / conj(a_kl)
            let z = phase[e.from] * y.conj() / x.conj();
            phase[e.to] = if z.norm() > 0.0 { z / z.norm() } else { ONE };
            done[e.to] = true;
            push_edges(&mut heap, e.to, &ta, &done);
        }
    }
    let mut qp = q.clone();
    for (k, ph) in phase.iter().enumerate() {
        for i in 0..d {
            qp[(i, k)] *= *ph;
        }
    }
    Some(qp * p.adjoint())
}

struct Edge {
    weight: f64,
    elem: usize,
    from: usize,
    to: usize,
}

impl PartialEq for Edge {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == std::cmp::Ordering::Equal
    }
}
impl Eq for Edge {}
impl PartialOrd for Edge {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Edge {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.weight
            .total_cmp(&o.weight)
            .then_with(|| o.elem.cmp(&self.elem))
            .then_with(|| o.to.cmp(&self.to))
    }
}

fn push_edges(heap: &mut BinaryHeap<Edge>, from: usize, ta: &[CMat], done: &[bool]) {
    let d = done.len();
    for (elem, m) in ta.iter().enumerate() {
        for to in 0..d {
            if !done[to] {
                let weight = m[(from, to)].norm();
                if weight > 1e-9 {
                    heap.push(Edge {
                        weight,
                        elem,
                        from,
                        to,
                    });
                }
            }
        }
    }
}

fn objective(u: &CMat, a: &[CMat], b: &[CMat]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (u * x - y * u).norm_squared())
        .sum()
}

/// Riemannian gradient descent on `Σ‖UAᵢ − BᵢU‖²_F` with the exponential
/// retraction and Armijo backtracking.
fn descend(mut u: CMat, a: &[CMat], b: &[CMat], max_iter: usize, tol: f64) -> CMat {
    let mut f = objective(&u, a, b);
    let mut step = 0.1;
    for _ in 0..max_iter {
        if tuple_residual(&u, a, b) <= 0.1 * tol {
            break;
        }
        let mut g = CMat::zeros(u.nrows(), u.ncols());
        for (x, y) in a.iter().zip(b) {
            let e = &u * x - y * &u;
            g += (&e * x - y * &e).scale(2.0);
        }
        let gamma = &g * u.adjoint();
        let omega = (&gamma - gamma.adjoint()).scale(0.5);
        let gnorm2 = omega.norm_squared();
        if gnorm2 < 1e-30 {
            break;
        }
        // exp(−ηΩ) = exp(−iηH) with H = −iΩ Hermitian
        let h = omega.map(|z| z * c(0.0, -1.0));
        let mut accepted = false;
        step *= 2.0;
        for _ in 0..60 {
            let cand = unitary_from_hamiltonian(&h, step) * &u;
            let fc = objective(&cand, a, b);
            if fc <= f - 1e-4 * step * gnorm2 {
                u = cand;
                f = fc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    u
}

/// Replaces `u` by the polar factor of its projection onto the intertwiner
/// space `{X : XAᵢ = BᵢX}`, when that lowers the residual.
fn refine(u: &CMat, a: &[CMat], b: &[CMat]) -> CMat {
    match intertwiner_polish(u, a, b) {
        Some(p) if tuple_residual(&p, a, b) < tuple_residual(u, a, b) => p,
        _ => u.clone(),
    }
}

/// Projects `u` onto the numerical null space of `X ↦ (XAᵢ − BᵢX)ᵢ` and
/// returns the unitary polar factor, or `None` if the projection vanishes.
pub fn intertwiner_polish(u: &CMat, a: &[CMat], b: &[CMat]) -> Option<CMat> {
    let d = u.nrows();
    let n = d * d;
    // Gram matrix of the stacked linear map, acting on row-major vec(X):
    // vec(XA) = (1 ⊗ Aᵀ) vec X, vec(BX) = (B ⊗ 1) vec X
    let id = identity(d);
    let mut gram = CMat::zeros(n, n);
    for (x, y) in a.iter().zip(b) {
        let l = crate::linalg::tensor(&id, &x.transpose()) - crate::linalg::tensor(y, &id);
        gram += l.adjoint() * &l;
    }
    let e = eigh(&gram);
    let top = e.max_value().max(1e-300);
    let null: Vec<usize> = (0..n).filter(|&k| e.values[k] <= 1e-16 * top.max(1.0)).collect();
    if null.is_empty() {
        return None;
    }
    let v = crate::linalg::vec_rows(u);
    let mut proj = crate::linalg::CVec::zeros(n);
    for &k in &null {
        let col = e.vectors.column(k);
        let coef: C64 = col.dotc(&v);
        proj += col * coef;
    }
    let x = crate::linalg::unvec_rows(&proj, d, d);
    if max_abs(&x) < 1e-12 {
        return None;
    }
    Some(polar_unitary(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, random_hermitian, tensor};

    #[test]
    fn identical_tuples_give_identity() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let a: Vec<CMat> = (0..2).map(|_| random_hermitian(3, &mut r)).collect();
        let res = find_simultaneous_unitary(&a, &a, &Default::default(), Exec::default()).unwrap();
        assert!(res.success);
        assert_eq!(res.residual, 0.0);
        assert_eq!(res.unitary, identity(3));
    }

    #[test]
    fn planted_unitary_is_recovered() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        for d in [2, 3, 5] {
            let a: Vec<CMat> = (0..3).map(|_| random_hermitian(d, &mut r)).collect();
            let v = haar_unitary(d, &mut r);
            let b: Vec<CMat> = a.iter().map(|m| &v * m * v.adjoint()).collect();
            let res = find_simultaneous_unitary(&a, &b, &Default::default(), Exec::default()).unwrap();
            assert!(res.success && res.residual < 1e-8, "d={d}: {}", res.residual);
            assert_eq!(res.stage, SearchStage::Spectral);
        }
    }

    #[test]
    fn degenerate_tuples_fall_back_to_optimization() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        // every combination has a doubly degenerate eigenvalue
        let a = vec![
            tensor(&diag_real(&[1.0, 2.0]), &identity(2)),
            tensor(&random_hermitian(2, &mut r), &identity(2)),
        ];
        let v = haar_unitary(4, &mut r);
        let b: Vec<CMat> = a.iter().map(|m| &v * m * v.adjoint()).collect();
        let res = find_simultaneous_unitary(&a, &b, &Default::default(), Exec::default()).unwrap();
        assert!(res.success, "residual {}", res.residual);
        assert_eq!(res.stage, SearchStage::Optimization);
    }

    #[test]
    fn inequivalent_tuples_fail_with_residual() {
        let a = vec![diag_real(&[0.0, 1.0])];
        let b = vec![diag_real(&[0.0, 2.0])];
        let cfg = UnitarySearchConfig {
            restarts: 2,
            max_iter: 200,
            ..Default::default()
        };
        let res = find_simultaneous_unitary(&a, &b, &cfg, Exec::Sequential).unwrap();
        assert!(!res.success);
        assert!(res.residual > 0.5);
    }

    #[test]
    fn same_seed_same_answer() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let a = vec![
            tensor(&diag_real(&[1.0, 2.0]), &identity(2)),
            tensor(&random_hermitian(2, &mut r), &identity(2)),
        ];
        let v = haar_unitary(4, &mut r);
        let b: Vec<CMat> = a.iter().map(|m| &v * m * v.adjoint()).collect();
        let cfg = UnitarySearchConfig::default();
        let s = find_simultaneous_unitary(&a, &b, &cfg, Exec::Sequential).unwrap();
        let p = find_simultaneous_unitary(&a, &b, &cfg, Exec::Parallel).unwrap();
        assert_eq!(s.unitary, p.unitary);
    }
}
