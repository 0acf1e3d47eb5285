//! Diamond norm of a difference of channels.
//!
//! For a Hermiticity-preserving `Φ` with `Tr_out J(Φ) = 0`,
//!
//! ```text
//! ½‖Φ‖⋄ = max ⟨J, W⟩  s.t.  0 ⪯ W ⪯ ρ ⊗ 1,  ρ ⪰ 0,  Tr ρ = 1
//!       = min λ_max(Tr_out Z)  s.t.  Z ⪰ J,  Z ⪰ 0.
//! ```
//!
//! The primal is put in standard form over `X = diag(W, S, R)` with
//! `W + S − R ⊗ 1 = 0`, `Tr R = 1`, and solved with an alternating-direction
//! augmented Lagrangian method on the dual. The linear system `AA*` has a
//! closed-form inverse for this constraint map, so each iteration costs three
//! Hermitian eigendecompositions. Every few iterations the iterates are
//! rounded to feasible points of both problems, which gives certified lower
//! and upper bounds; the solver stops once they agree to the tolerance.

use serde::{Deserialize, Serialize};

use super::Channel;
use crate::linalg::{
    eigh, eigenvalues, hermitian_part, identity, operator_norm, positive_part, ptrace_second,
    sqrt_psd, tensor, trace_norm_hermitian, CMat,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiamondStatus {
    Converged,
    Bounds,
}

/// `value` is the midpoint of `[lower, upper]`; the bracket is always valid,
/// and for `Converged` its width is at most the requested accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiamondResult {
    pub value: f64,
    pub status: DiamondStatus,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

impl DiamondResult {
    pub fn converged(&self) -> bool {
        self.status == DiamondStatus::Converged
    }

    /// The value when converged, the upper bound otherwise.
    pub fn conservative(&self) -> f64 {
        match self.status {
            DiamondStatus::Converged => self.value,
            DiamondStatus::Bounds => self.upper,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DiamondOptions {
    /// Absolute accuracy on `‖Φ‖⋄`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DiamondOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 200_000,
        }
    }
}

const BOUND_EVERY: usize = 25;
const MU_EVERY: usize = 10;
const OVER_RELAX: f64 = 1.6;

/// `‖T₁ − T₂‖⋄`.
pub fn diamond_distance(t1: &Channel, t2: &Channel) -> Result<DiamondResult> {
    if t1.d_in() != t2.d_in() || t1.d_out() != t2.d_out() {
        return Err(Error::Dimension(format!(
            "channels {}→{} and {}→{} are not comparable",
            t1.d_in(),
            t1.d_out(),
            t2.d_in(),
            t2.d_out()
        )));
    }
    let j = t1.choi() - t2.choi();
    // two channels are never further apart than 2
    solve(&j, t1.d_in(), t1.d_out(), DiamondOptions::default(), 1.0)
}

/// Diamond norm of the map with Choi matrix `j`; requires `Tr_out j = 0`
/// (a difference of trace-preserving maps).
pub fn diamond_norm_choi(j: &CMat, d_in: usize, d_out: usize) -> Result<DiamondResult> {
    diamond_norm_choi_with(j, d_in, d_out, DiamondOptions::default())
}

pub fn diamond_norm_choi_with(
    j: &CMat,
    d_in: usize,
    d_out: usize,
    opts: DiamondOptions,
) -> Result<DiamondResult> {
    solve(j, d_in, d_out, opts, f64::INFINITY)
}

fn solve(
    j: &CMat,
    d_in: usize,
    d_out: usize,
    opts: DiamondOptions,
    half_cap: f64,
) -> Result<DiamondResult> {
    crate::linalg::check_dim(j, d_in * d_out, "Choi matrix")?;
    crate::linalg::check_hermitian(j, 1e-9)?;
    let j = hermitian_part(j);
    let marginal = ptrace_second(&j, d_in, d_out)?;
    let scale = operator_norm(&j);
    if crate::linalg::max_abs(&marginal) > 1e-8 * scale.max(1.0) {
        return Err(Error::InvalidChannel(
            "diamond norm SDP needs the Choi matrix of a difference of trace-preserving maps"
                .into(),
        ));
    }
    let mut solver = Admm::new(&j, d_in, d_out);
    solver.best_upper = solver.best_upper.min(half_cap);
    Ok(solver.run(opts))
}

struct Admm<'a> {
    j: &'a CMat,
    /// `j / scale`, the objective the iterates see
    c: CMat,
    scale: f64,
    n: usize,
    m: usize,
    w: CMat,
    s1: CMat,
    r: CMat,
    sw: CMat,
    ss1: CMat,
    sr: CMat,
    y: CMat,
    mu: f64,
    best_lower: f64,
    best_upper: f64,
}

impl<'a> Admm<'a> {
    fn new(j: &'a CMat, n: usize, m: usize) -> Self {
        let big = n * m;
        let scale = operator_norm(j);
        let c = if scale > 0.0 { j.unscale(scale) } else { j.clone() };
        // crude bracket from the maximally entangled input: ‖J‖₁/n ≤ ‖Φ‖⋄ ≤ ‖J‖₁
        let t1 = trace_norm_hermitian(j);
        let jp_upper = eigenvalues(&ptrace_second(&positive_part(j), n, m).expect("dims"))
            .last()
            .copied()
            .unwrap_or(0.0);
        Self {
            j,
            c,
            scale,
            n,
            m,
            w: CMat::zeros(big, big),
            s1: CMat::zeros(big, big),
            r: CMat::zeros(n, n),
            sw: CMat::zeros(big, big),
            ss1: CMat::zeros(big, big),
            sr: CMat::zeros(n, n),
            y: CMat::zeros(big, big),
            mu: 1.0,
            best_lower: 0.5 * t1 / n as f64,
            best_upper: (0.5 * t1).min(jp_upper),
        }
    }

    fn lift(&self, a: &CMat) -> CMat {
        tensor(a, &identity(self.m))
    }

    fn ptrace_out(&self, a: &CMat) -> CMat {
        ptrace_second(a, self.n, self.m).expect("dims")
    }

    /// `Tr[((√ρ ⊗ 1) J (√ρ ⊗ 1))₊]` for the density closest to the `R` block.
    fn lower_bound(&self) -> f64 {
        let p = positive_part(&self.r);
        let tr = p.trace().re;
        let rho = if tr > 1e-12 {
            p.unscale(tr)
        } else {
            identity(self.n).unscale(self.n as f64)
        };
        let s = self.lift(&sqrt_psd(&rho));
        let mm = &s * self.j * &s;
        eigenvalues(&mm).iter().filter(|&&l| l > 0.0).sum()
    }

    /// `λ_max(Tr_out Z′)` for `Z′` the dual iterate shifted into `{Z ⪰ J, Z ⪰ 0}`.
    fn upper_bound(&self) -> f64 {
        let z = hermitian_part(&(-&self.y)).scale(self.scale);
        let gap_j = eigenvalues(&(&z - self.j))[0];
        let gap_0 = eigenvalues(&z)[0];
        let shift = 0.0f64.max(-gap_j).max(-gap_0);
        let top = eigenvalues(&self.ptrace_out(&z))
            .last()
            .copied()
            .unwrap_or(0.0);
        top + shift * self.m as f64
    }

    fn result(&self, status: DiamondStatus, iterations: usize) -> DiamondResult {
        let (lower, upper) = (2.0 * self.best_lower, 2.0 * self.best_upper.max(self.best_lower));
        DiamondResult {
            value: 0.5 * (lower + upper),
            status,
            lower,
            upper,
            iterations,
        }
    }

    fn certify(&mut self) {
        self.best_lower = self.best_lower.max(self.lower_bound());
        self.best_upper = self.best_upper.min(self.upper_bound());
    }

    fn run(&mut self, opts: DiamondOptions) -> DiamondResult {
        if 2.0 * (self.best_upper - self.best_lower) <= opts.tol {
            return self.result(DiamondStatus::Converged, 0);
        }
        let n = self.n;
        let c_norm = self.c.norm();
        for it in 1..=opts.max_iter {
            // y = −(AA*)⁻¹ (μ(A(X) − b) + A(S − C))
            let rm = (&self.w + &self.s1 - self.lift(&self.r)).scale(self.mu)
                + (&self.sw + &self.c + &self.ss1 - self.lift(&self.sr));
            let rt = self.mu * (self.r.trace().re - 1.0) + self.sr.trace().re;
            let (y, t) = self.solve_normal(&rm, rt);
            let (y, t) = (-y, -t);

            // V = C − A*y − μX, blocked
            let vw = -&self.c - &y - self.w.scale(self.mu);
            let vs1 = -&y - self.s1.scale(self.mu);
            let vr = self.ptrace_out(&y) - identity(n).scale(t) - self.r.scale(self.mu);

            let (sw, xw) = split(&vw);
            let (ss1, xs1) = split(&vs1);
            let (sr, xr) = split(&vr);
            let relax = |old: &CMat, new: &CMat, mu: f64| {
                old.scale(1.0 - OVER_RELAX) + new.scale(OVER_RELAX / mu)
            };
            self.w = relax(&self.w, &xw, self.mu);
            self.s1 = relax(&self.s1, &xs1, self.mu);
            self.r = relax(&self.r, &xr, self.mu);
            self.sw = sw;
            self.ss1 = ss1;
            self.sr = sr;
            self.y = y;

            if it % MU_EVERY == 0 {
                let pinf = {
                    let e = &self.w + &self.s1 - self.lift(&self.r);
                    let et = self.r.trace().re - 1.0;
                    (e.norm_squared() + et * et).sqrt() / 2.0
                };
                let dinf = {
                    let dw = &self.y + &self.sw + &self.c;
                    let ds = &self.y + &self.ss1;
                    let dr = -self.ptrace_out(&self.y) + identity(n).scale(t) + &self.sr;
                    (dw.norm_squared() + ds.norm_squared() + dr.norm_squared()).sqrt()
                        / (1.0 + c_norm)
                };
                if pinf > 5.0 * dinf {
                    self.mu = (self.mu * 1.3).min(1e4);
                } else if dinf > 5.0 * pinf {
                    self.mu = (self.mu / 1.3).max(1e-4);
                }
            }
            if it % BOUND_EVERY == 0 || it == opts.max_iter {
                self.certify();
                if 2.0 * (self.best_upper - self.best_lower) <= opts.tol {
                    return self.result(DiamondStatus::Converged, it);
                }
            }
        }
        self.result(DiamondStatus::Bounds, opts.max_iter)
    }

    /// Solves `AA*(Y, t) = (rm, rt)` in closed form.
    fn solve_normal(&self, rm: &CMat, rt: f64) -> (CMat, f64) {
        let (n, m) = (self.n as f64, self.m as f64);
        let pr = self.ptrace_out(rm);
        let t = ((2.0 + m) * rt + pr.trace().re) / (2.0 * n);
        let p = (pr + identity(self.n).scale(t * m)).unscale(2.0 + m);
        let y = (rm - self.lift(&p) + identity(self.n * self.m).scale(t)).scale(0.5);
        (y, t)
    }
}

/// Splits a Hermitian `v` into `(v₊, (−v)₊)`.
fn split(v: &CMat) -> (CMat, CMat) {
    let e = eigh(v);
    let pos = e.map(|l| crate::linalg::c(l.max(0.0), 0.0));
    let neg = e.map(|l| crate::linalg::c((-l).max(0.0), 0.0));
    (pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag_real, haar_unitary, max_abs_diff, random_density};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normal_equation_inverse() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let (n, m) = (2, 3);
        let j = crate::linalg::random_hermitian(6, &mut r);
        let solver = Admm::new(&j, n, m);
        let y = crate::linalg::random_hermitian(6, &mut r);
        let t = 0.37;
        // AA*(Y, t) = (2Y + Tr_out(Y) ⊗ 1 − t 1, −Tr Y + n t)
        let rm = y.scale(2.0) + solver.lift(&solver.ptrace_out(&y)) - identity(6).scale(t);
        let rt = -y.trace().re + n as f64 * t;
        let (y2, t2) = solver.solve_normal(&rm, rt);
        assert!(max_abs_diff(&y, &y2) < 1e-12);
        assert!((t - t2).abs() < 1e-12);
    }

    #[test]
    fn identical_channels_give_zero() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let t = Channel::unitary(&haar_unitary(3, &mut r)).unwrap();
        let res = diamond_distance(&t, &t).unwrap();
        assert!(res.converged());
        assert!(res.value.abs() < 1e-9);
    }

    #[test]
    fn phase_gate_distance() {
        for &theta in &[0.3, 1.0, 2.0, std::f64::consts::PI] {
            let u = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                c(1.0, 0.0),
                c(theta.cos(), theta.sin()),
            ]));
            let res =
                diamond_distance(&Channel::identity(2), &Channel::unitary(&u).unwrap()).unwrap();
            assert!(res.converged(), "{res:?}");
            assert!((res.value - 2.0 * (theta / 2.0).sin()).abs() < 1e-6, "{res:?}");
        }
    }

    #[test]
    fn rejects_non_difference() {
        let j = diag_real(&[1.0, 0.0, 0.0, 1.0]);
        assert!(diamond_norm_choi(&j, 2, 2).is_err());
    }

    #[test]
    fn replacement_channels() {
        let mut r = ChaCha8Rng::seed_from_u64(9);
        let (a, b) = (random_density(2, &mut r), random_density(2, &mut r));
        let res = diamond_distance(
            &Channel::replacement(2, &a).unwrap(),
            &Channel::replacement(2, &b).unwrap(),
        )
        .unwrap();
        // constant channels: the input is irrelevant
        let expect = 2.0 * crate::linalg::trace_distance(&a, &b).unwrap();
        assert!(res.converged());
        assert!((res.value - expect).abs() < 1e-6);
    }
}
