//! Back-action of a quantum reference frame.
//!
//! A covariant channel `T` on `S ⊗ C` with frame state `σ_C` induces a
//! channel `T_S` on the system that is `ε`-close in diamond norm to a
//! unitary `V`. The recovery channel `R` built here gives a covariant
//! `T′ = (Id_S ⊗ R) ∘ T` with the same induced dynamics whose frame comes
//! back within trace distance `2√(2ε)` of `σ_C`.
//!
//! Mixed frames and non-unitary dynamics go through one pipeline: `σ_C` is
//! purified on `C ⊗ C′`, `T` is dilated to a unitary on `S ⊗ C ⊗ E` with
//! `ω_E` purified on `E ⊗ E′`, and the construction runs on the pure frame
//! `C ⊗ E ⊗ C′ ⊗ E′`. The recovery only touches `C ⊗ E`. A pure frame with
//! unitary dynamics is the case `d_E = rank σ_C = 1`.

mod sweep;

pub use sweep::{degradation_sweep, phase_reference_scenario, sweep_csv, SweepRow};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{
    diamond_distance, dilation_to_channel, env_channel, induced_channel, is_covariant,
    is_doubly_stochastic, verify_covariant_dilation, Channel, DiamondResult, DilationSpec,
    KrausMap, Symmetry, CHOI_CUTOFF,
};
use crate::linalg::{
    check_density, check_unitary, commutator, eigh, fidelity, identity, ket, max_abs,
    max_abs_diff, partial_trace, projector, random_density, random_pure_vector, tensor,
    trace_distance, unitary_with_first_column, CMat, CVec, HERMITIAN_TOL, ZERO,
};
use crate::par::{self, Exec};
use crate::repr::FiniteGroupRep;
use crate::{Error, Result};

/// Slack on assertions that inherit the diamond-norm solver accuracy.
pub const DIAMOND_SLACK: f64 = 1e-5;
/// Slack on assertions between state metrics.
pub const METRIC_SLACK: f64 = 1e-6;
/// Covariance tolerance for the dynamics and the constructed channels.
pub const COVARIANCE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum Dynamics {
    Unitary(CMat),
    /// `T[ρ_SC] = Tr_E[U(ρ_SC ⊗ ω_E)U†]`, `U` acting on `S ⊗ C ⊗ E`.
    Dilated { dilation: DilationSpec, sym_e: Symmetry },
}

#[derive(Clone, Debug)]
pub struct FrameScenario {
    pub d_s: usize,
    pub d_c: usize,
    pub dynamics: Dynamics,
    pub sigma_c: CMat,
    pub target: CMat,
    pub sym_s: Symmetry,
    pub sym_c: Symmetry,
}

fn symmetry_ops(sym: &Symmetry) -> &[CMat] {
    match sym {
        Symmetry::Generators(g) => g,
        Symmetry::Group(rep) => rep.images(),
    }
}

fn trivial_symmetry(like: &Symmetry, dim: usize) -> Symmetry {
    match like {
        Symmetry::Generators(g) => Symmetry::Generators(vec![CMat::zeros(dim, dim); g.len()]),
        Symmetry::Group(rep) => Symmetry::Group(FiniteGroupRep::trivial(rep.group().clone(), dim)),
    }
}

impl FrameScenario {
    pub fn new(
        dynamics: Dynamics,
        sigma_c: CMat,
        target: CMat,
        sym_s: Symmetry,
        sym_c: Symmetry,
    ) -> Result<Self> {
        check_density(&sigma_c)?;
        check_unitary(&target, HERMITIAN_TOL)?;
        let d_s = target.nrows();
        let d_c = sigma_c.nrows();
        if sym_s.dim() != Some(d_s) || sym_c.dim() != Some(d_c) {
            return Err(Error::Dimension(format!(
                "symmetries act on {:?} and {:?}, expected {d_s} and {d_c}",
                sym_s.dim(),
                sym_c.dim()
            )));
        }
        let joint = sym_s.tensor(&sym_c)?;
        match &dynamics {
            Dynamics::Unitary(u) => {
                check_unitary(u, HERMITIAN_TOL)?;
                crate::linalg::check_dim(u, d_s * d_c, "global unitary")?;
                let v = symmetry_ops(&joint)
                    .iter()
                    .map(|x| max_abs(&commutator(u, x)))
                    .fold(0.0, f64::max);
                if v > COVARIANCE_TOL {
                    return Err(Error::InvalidInput(format!(
                        "global unitary is not covariant (violation {v:e})"
                    )));
                }
            }
            Dynamics::Dilated { dilation, sym_e } => {
                if dilation.d_s != d_s * d_c {
                    return Err(Error::Dimension(format!(
                        "dilation acts on a {}-dimensional system, expected {}",
                        dilation.d_s,
                        d_s * d_c
                    )));
                }
                if dilation.discard != crate::channel::Discard::Environment {
                    return Err(Error::InvalidInput(
                        "the dilation must discard the environment".into(),
                    ));
                }
                let rep = verify_covariant_dilation(dilation, &joint, sym_e, COVARIANCE_TOL)?;
                if !rep.certified {
                    return Err(Error::InvalidInput(format!(
                        "dilation is not covariant (unitary {:e}, environment {:e})",
                        rep.unitary_violation, rep.environment_violation
                    )));
                }
            }
        }
        Ok(Self {
            d_s,
            d_c,
            dynamics,
            sigma_c,
            target,
            sym_s,
            sym_c,
        })
    }

    /// The global channel `T` on `S ⊗ C`.
    pub fn channel(&self) -> Result<Channel> {
        match &self.dynamics {
            Dynamics::Unitary(u) => Channel::unitary(u),
            Dynamics::Dilated { dilation, .. } => dilation_to_channel(dilation),
        }
    }

    /// `T_S[ρ] = Tr_C[T(ρ ⊗ σ_C)]`.
    pub fn induced(&self) -> Result<Channel> {
        induced_channel(&self.channel()?, &self.sigma_c, self.d_c)
    }

    /// Dilating unitary on `S ⊗ C ⊗ E`, the environment state and its symmetry.
    fn dilation_parts(&self) -> (CMat, CMat, Symmetry) {
        match &self.dynamics {
            Dynamics::Unitary(u) => (
                u.clone(),
                identity(1),
                trivial_symmetry(&self.sym_c, 1),
            ),
            Dynamics::Dilated { dilation, sym_e } => {
                (dilation.u.clone(), dilation.omega_e.clone(), sym_e.clone())
            }
        }
    }
}

/// `ε = ‖T_S − V·V†‖_◇` (full norm, at most 2).
pub fn implementation_error(sc: &FrameScenario) -> Result<DiamondResult> {
    diamond_distance(&sc.induced()?, &Channel::unitary(&sc.target)?)
}

/// Eigen-decomposition purification `Σ_k √p_k |v_k⟩|k⟩` with rank-many
/// ancilla levels.
fn purify(rho: &CMat) -> (Vec<(f64, CVec)>, usize) {
    let e = eigh(rho);
    let parts: Vec<(f64, CVec)> = e
        .values
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > CHOI_CUTOFF)
        .map(|(l, &p)| (p, e.vector(l)))
        .collect();
    let r = parts.len();
    (parts, r)
}

/// The construction on the pure frame `F = C ⊗ E ⊗ C′ ⊗ E′`.
struct PureFrame {
    d_s: usize,
    d_f: usize,
    /// `U_{SCE} ⊗ 1_{C′E′}`
    u: CMat,
    phi: CVec,
}

impl PureFrame {
    fn build(u_sce: &CMat, d_s: usize, sigma_c: &CMat, omega_e: &CMat) -> Self {
        let (d_c, d_e) = (sigma_c.nrows(), omega_e.nrows());
        let (pc, r_c) = purify(sigma_c);
        let (pe, r_e) = purify(omega_e);
        let d_f = d_c * d_e * r_c * r_e;
        let mut phi = CVec::zeros(d_f);
        for (k, (p, v)) in pc.iter().enumerate() {
            for (l, (q, w)) in pe.iter().enumerate() {
                let s = (p * q).sqrt();
                for c in 0..d_c {
                    for e in 0..d_e {
                        phi[((c * d_e + e) * r_c + k) * r_e + l] += v[c] * w[e] * s;
                    }
                }
            }
        }
        Self {
            d_s,
            d_f,
            u: tensor(u_sce, &identity(r_c * r_e)),
            phi,
        }
    }

    /// `U(|ψ⟩ ⊗ |Φ⟩)`
    fn evolve(&self, psi: &CVec) -> CVec {
        &self.u * crate::linalg::tensor_vec(psi, &self.phi)
    }

    fn reduce(&self, x: &CVec) -> CMat {
        let d_f = self.d_f;
        CMat::from_fn(d_f, d_f, |i, j| {
            (0..self.d_s).map(|s| x[s * d_f + i] * x[s * d_f + j].conj()).sum()
        })
    }

    /// `T̂_ρ[Φ] = Tr_S[U(ρ ⊗ Φ)U†]`
    fn frame_image(&self, rho: &CMat) -> CMat {
        let e = eigh(rho);
        let mut out = CMat::zeros(self.d_f, self.d_f);
        for (l, &p) in e.values.iter().enumerate() {
            if p > CHOI_CUTOFF {
                out += self.reduce(&self.evolve(&e.vector(l))).scale(p);
            }
        }
        out
    }

    fn maximally_mixed_image(&self) -> CMat {
        let mut out = CMat::zeros(self.d_f, self.d_f);
        for s in 0..self.d_s {
            out += self.reduce(&self.evolve(&ket(self.d_s, s)));
        }
        out.unscale(self.d_s as f64)
    }

    /// Top eigenvector of `T̂_{1/d}[Φ]`, phased so that the overlap of
    /// `V ⊗ W` with `U` on a maximally entangled reference input is positive.
    fn drift(&self, target: &CMat) -> Drift {
        let e = eigh(&self.maximally_mixed_image());
        let n = e.dim();
        let mut chi = e.vector(n - 1);
        let degenerate = n > 1 && e.values[n - 1] - e.values[n - 2] <= 1e-9;
        // Σ_s ⟨V s, χ| U |s, Φ⟩
        let mut z = ZERO;
        for s in 0..self.d_s {
            let x = self.evolve(&ket(self.d_s, s));
            let y = crate::linalg::tensor_vec(&target.column(s).into_owned(), &chi);
            z += y.dotc(&x);
        }
        if z.norm() > 1e-12 {
            chi *= z / z.norm();
        }
        let w = unitary_with_first_column(&chi) * unitary_with_first_column(&self.phi).adjoint();
        Drift { chi, w, degenerate }
    }

    /// `‖U|ψ⟩|Φ⟩ − V|ψ⟩ ⊗ χ‖`
    fn deviation(&self, psi: &CVec, target: &CMat, chi: &CVec) -> f64 {
        let y = crate::linalg::tensor_vec(&(target * psi), chi);
        (self.evolve(psi) - y).norm()
    }
}

struct Drift {
    chi: CVec,
    w: CMat,
    degenerate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftResult {
    #[serde(serialize_with = "crate::io::ser_matrix")]
    pub w: CMat,
    /// Largest `‖U|ψ⟩|φ⟩ − V|ψ⟩W|φ⟩‖` over the sampled pure inputs.
    pub deviation: f64,
    /// The top eigenvalue was not separated; the first eigenvector in the
    /// solver's order was used.
    pub degenerate: bool,
}

fn pure_frame_of(sc: &FrameScenario) -> PureFrame {
    let (u, omega, _) = sc.dilation_parts();
    PureFrame::build(&u, sc.d_s, &sc.sigma_c, &omega)
}

/// Drift unitary `W` on `C` for unitary dynamics and a pure frame.
pub fn drift_unitary(sc: &FrameScenario, samples: usize, seed: u64) -> Result<DriftResult> {
    if !matches!(sc.dynamics, Dynamics::Unitary(_)) {
        return Err(Error::InvalidInput("drift unitary needs unitary dynamics".into()));
    }
    if crate::linalg::rank(&sc.sigma_c, 1e-10) != 1 {
        return Err(Error::InvalidInput("drift unitary needs a pure frame state".into()));
    }
    let f = pure_frame_of(sc);
    let d = f.drift(&sc.target);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deviation = (0..samples)
        .map(|_| f.deviation(&random_pure_vector(sc.d_s, &mut rng), &sc.target, &d.chi))
        .fold(0.0, f64::max);
    Ok(DriftResult {
        w: d.w,
        deviation,
        degenerate: d.degenerate,
    })
}

/// `R_{CE} = (T̂_{1/d})*` together with the frame symmetry on `C ⊗ E`.
fn recovery_parts(sc: &FrameScenario) -> Result<(Channel, Symmetry)> {
    let (u, _, sym_e) = sc.dilation_parts();
    let env = env_channel(&u, &identity(sc.d_s).unscale(sc.d_s as f64))?;
    if !is_doubly_stochastic(&env, 1e-9)? {
        return Err(Error::InvalidChannel(
            "environment channel at the maximally mixed input is not unital".into(),
        ));
    }
    let r = env.hs_dual().into_channel()?;
    Ok((r, sc.sym_c.tensor(&sym_e)?))
}

/// Recovery channel on `C` for unitary dynamics.
pub fn recovery_channel(sc: &FrameScenario) -> Result<Channel> {
    if !matches!(sc.dynamics, Dynamics::Unitary(_)) {
        return Err(Error::InvalidInput(
            "the recovery on C alone needs unitary dynamics; use catalytic_channel".into(),
        ));
    }
    let (r, sym) = recovery_parts(sc)?;
    let cov = is_covariant(r.map(), &sym, &sym, COVARIANCE_TOL)?;
    if !cov.covariant {
        return Err(Error::InvalidChannel(format!(
            "recovery is not covariant (violation {:e})",
            cov.max_violation
        )));
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameConfig {
    pub pure_samples: usize,
    pub mixed_samples: usize,
    pub seed: u64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            pure_samples: 64,
            mixed_samples: 36,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Pure,
    Mixed,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRow {
    pub kind: SampleKind,
    /// `D(Tr_S T′[ρ ⊗ σ_C], σ_C)`
    pub distance: f64,
    /// The same distance on the purified frame.
    pub frame_distance: f64,
    /// `F(T̂_ρ[Φ], WΦW†)`
    pub fidelity: f64,
    /// `D(T̂_ρ[Φ], WΦW†)`
    pub drift_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub passed: bool,
    pub failures: Vec<String>,
    pub epsilon: f64,
    pub diamond: DiamondResult,
    /// `2√(2ε)`
    pub bound: f64,
    pub worst_distance: f64,
    pub mean_distance: f64,
    pub min_fidelity: f64,
    pub max_drift_distance: f64,
    /// `D(Φ, R[WΦW†])`
    pub recovery_distance: f64,
    /// `|F(Φ, R[WΦW†]) − F(T̂_{1/d}[Φ], WΦW†)|`
    pub pullback_defect: f64,
    pub drift_deviation: f64,
    pub degenerate_drift: bool,
    /// `‖J(T′_S) − J(T_S)‖_max`
    pub induced_deviation: f64,
    pub covariance_violation: f64,
    pub recovery_covariance_violation: f64,
    pub frame_dim: usize,
    #[serde(serialize_with = "crate::io::ser_matrix")]
    pub w: CMat,
    #[serde(serialize_with = "crate::io::ser_channel")]
    pub recovery: Channel,
    pub samples: Vec<SampleRow>,
}

pub struct CatalyticOutcome {
    pub channel: Channel,
    pub report: RecoveryReport,
}

/// `T′[ρ_SC] = Tr_E[(Id_S ⊗ R_{CE})(U(ρ_SC ⊗ ω_E)U†)]`
fn assemble(u: &CMat, omega: &CMat, r: &Channel, d_s: usize, d_c: usize) -> Result<Channel> {
    let d_e = omega.nrows();
    let d_sc = d_s * d_c;
    let e = eigh(omega);
    let append: Vec<CMat> = e
        .values
        .iter()
        .enumerate()
        .filter(|(_, &q)| q > CHOI_CUTOFF)
        .map(|(l, &q)| tensor(&identity(d_sc), &CMat::from_column_slice(d_e, 1, e.vector(l).scale(q.sqrt()).as_slice())))
        .collect();
    let discard: Vec<CMat> = (0..d_e)
        .map(|m| tensor(&identity(d_sc), &CMat::from_row_slice(1, d_e, ket(d_e, m).as_slice())))
        .collect();
    let n = d_sc * d_e;
    let map = KrausMap::new(d_sc, n, append)?;
    let map = KrausMap::new(n, n, vec![u.clone()])?.compose(&map)?;
    let map = Channel::identity(d_s).tensor(r).map().compose(&map)?;
    let map = KrausMap::new(n, d_sc, discard)?.compose(&map)?;
    Ok(map.simplify().into_channel()?.simplify())
}

/// Builds `T′` and checks every step of the back-action bound on sampled inputs.
pub fn catalytic_channel(sc: &FrameScenario, cfg: &FrameConfig, exec: Exec) -> Result<CatalyticOutcome> {
    let diamond = implementation_error(sc)?;
    let eps = diamond.conservative();
    let bound = 2.0 * (2.0 * eps).sqrt();
    let (u, omega, _) = sc.dilation_parts();
    let frame = pure_frame_of(sc);
    let (r_ce, sym_ce) = recovery_parts(sc)?;
    let r_cov = is_covariant(r_ce.map(), &sym_ce, &sym_ce, COVARIANCE_TOL)?;
    let t_prime = assemble(&u, &omega, &r_ce, sc.d_s, sc.d_c)?;
    let sym_sc = sc.sym_s.tensor(&sc.sym_c)?;
    let t_cov = is_covariant(t_prime.map(), &sym_sc, &sym_sc, COVARIANCE_TOL)?;
    let induced_prime = induced_channel(&t_prime, &sc.sigma_c, sc.d_c)?;
    let induced_deviation = max_abs_diff(&induced_prime.choi(), &sc.induced()?.choi());

    // recovery on the whole pure frame acts trivially on C′E′
    let anc = frame.d_f / r_ce.d_in();
    let r_frame = r_ce.tensor(&Channel::identity(anc));
    let drift = frame.drift(&sc.target);
    let chi_state = projector(&drift.chi);
    let phi_state = projector(&frame.phi);
    let pulled = r_frame.apply(&chi_state)?;
    let recovery_distance = trace_distance(&phi_state, &pulled)?;
    let pullback_defect = (fidelity(&phi_state, &pulled)?
        - fidelity(&frame.maximally_mixed_image(), &chi_state)?)
    .abs();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut inputs: Vec<(SampleKind, CMat, Option<CVec>)> = Vec::new();
    for _ in 0..cfg.pure_samples {
        let v = random_pure_vector(sc.d_s, &mut rng);
        inputs.push((SampleKind::Pure, projector(&v), Some(v)));
    }
    for _ in 0..cfg.mixed_samples {
        inputs.push((SampleKind::Mixed, random_density(sc.d_s, &mut rng), None));
    }
    let rows: Vec<Result<SampleRow>> = par::map(exec, &inputs, |(kind, rho, psi)| {
        let img = frame.frame_image(rho);
        let final_sc = t_prime.apply(&tensor(rho, &sc.sigma_c))?;
        let final_c = partial_trace(&final_sc, &[sc.d_s, sc.d_c], &[1])?;
        Ok(SampleRow {
            kind: *kind,
            distance: trace_distance(&final_c, &sc.sigma_c)?,
            frame_distance: trace_distance(&r_frame.apply(&img)?, &phi_state)?,
            fidelity: fidelity(&img, &chi_state)?,
            drift_distance: trace_distance(&img, &chi_state)?,
            deviation: psi.as_ref().map(|p| frame.deviation(p, &sc.target, &drift.chi)),
        })
    });
    let samples = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let worst_distance = samples.iter().map(|s| s.distance).fold(0.0, f64::max);
    let mean_distance = if samples.is_empty() {
        0.0
    } else {
        samples.iter().map(|s| s.distance).sum::<f64>() / samples.len() as f64
    };
    let min_fidelity = samples.iter().map(|s| s.fidelity).fold(1.0, f64::min);
    let max_drift_distance = samples.iter().map(|s| s.drift_distance).fold(0.0, f64::max);
    let drift_deviation = samples.iter().filter_map(|s| s.deviation).fold(0.0, f64::max);

    let root = (2.0 * eps).sqrt();
    let mut failures = Vec::new();
    let mut require = |ok: bool, msg: String| {
        if !ok {
            failures.push(msg);
        }
    };
    require(
        worst_distance <= bound + DIAMOND_SLACK,
        format!("final distance {worst_distance:.3e} exceeds 2√(2ε) = {bound:.3e}"),
    );
    require(
        min_fidelity >= 1.0 - eps - METRIC_SLACK,
        format!("fidelity {min_fidelity:.9} below 1 − ε = {:.9}", 1.0 - eps),
    );
    require(
        max_drift_distance <= root + METRIC_SLACK,
        format!("drift distance {max_drift_distance:.3e} exceeds √(2ε) = {root:.3e}"),
    );
    require(
        recovery_distance <= root + METRIC_SLACK,
        format!("recovery distance {recovery_distance:.3e} exceeds √(2ε) = {root:.3e}"),
    );
    require(pullback_defect <= 1e-9, format!("fidelity pullback defect {pullback_defect:.3e}"));
    require(induced_deviation <= 1e-8, format!("induced dynamics changed by {induced_deviation:.3e}"));
    require(t_cov.covariant, format!("T′ covariance violation {:.3e}", t_cov.max_violation));
    require(r_cov.covariant, format!("recovery covariance violation {:.3e}", r_cov.max_violation));
    if let Some(s) = samples.iter().find(|s| s.distance > s.frame_distance + 1e-10) {
        require(
            false,
            format!(
                "distance on C ({:.3e}) exceeds distance on the purified frame ({:.3e})",
                s.distance, s.frame_distance
            ),
        );
    }

    let report = RecoveryReport {
        passed: failures.is_empty(),
        failures,
        epsilon: eps,
        diamond,
        bound,
        worst_distance,
        mean_distance,
        min_fidelity,
        max_drift_distance,
        recovery_distance,
        pullback_defect,
        drift_deviation,
        degenerate_drift: drift.degenerate,
        induced_deviation,
        covariance_violation: t_cov.max_violation,
        recovery_covariance_violation: r_cov.max_violation,
        frame_dim: frame.d_f,
        w: drift.w,
        recovery: r_ce,
        samples,
    };
    Ok(CatalyticOutcome {
        channel: t_prime,
        report,
    })
}
