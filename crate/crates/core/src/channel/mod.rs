//! Completely positive maps in Kraus form, their Choi matrices, covariance
//! tests and the derived channels used by the catalysis and reference-frame
//! layers.
//!
//! Choi convention: `J(T) = Σ_{ij} |i⟩⟨j| ⊗ T(|i⟩⟨j|)` with the input factor
//! first. With this ordering `T(ρ) = Tr_in[(ρᵀ ⊗ 1) J]`.

mod diamond;
mod dilation;

pub use diamond::{
    diamond_distance, diamond_norm_choi, diamond_norm_choi_with, DiamondOptions, DiamondResult,
    DiamondStatus,
};
pub use dilation::{
    dilation_to_channel, random_symmetric_unitary, thermal_operation, verify_covariant_dilation,
    Discard, DilationReport, DilationSpec,
};

use rand::Rng;

use crate::linalg::{
    self, check_density, check_dim, check_finite, check_unitary, commutator, eigh, haar_unitary,
    identity, max_abs, max_abs_diff, matrix_unit, tensor, CMat, CVec, HERMITIAN_TOL,
};
use crate::repr::FiniteGroupRep;
use crate::{Error, Result};

/// Trace-preservation tolerance for validated channels.
pub const TP_TOL: f64 = 1e-9;
/// Eigenvalue cutoff when reading Kraus operators off a Choi matrix.
pub const CHOI_CUTOFF: f64 = 1e-12;

/// A completely positive map `ρ ↦ Σ K ρ K†`, not necessarily trace preserving.
#[derive(Clone, Debug)]
pub struct KrausMap {
    d_in: usize,
    d_out: usize,
    kraus: Vec<CMat>,
}

impl KrausMap {
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<CMat>) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::Dimension("channel dimensions must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("empty Kraus list".into()));
        }
        for (k, op) in kraus.iter().enumerate() {
            if op.nrows() != d_out || op.ncols() != d_in {
                return Err(Error::Dimension(format!(
                    "Kraus operator {k} is {}x{}, expected {d_out}x{d_in}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            check_finite(op)?;
        }
        Ok(Self { d_in, d_out, kraus })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// `Σ K x K†` for any `d_in × d_in` operator `x`.
    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        check_dim(x, self.d_in, "channel input")?;
        Ok(self.apply_unchecked(x))
    }

    fn apply_unchecked(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        out
    }

    /// `Σ K† K`; equals the identity iff the map is trace preserving.
    pub fn kraus_sum(&self) -> CMat {
        let mut s = CMat::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            s += k.adjoint() * k;
        }
        s
    }

    pub fn tp_defect(&self) -> f64 {
        max_abs_diff(&self.kraus_sum(), &identity(self.d_in))
    }

    /// Choi matrix, built as `Σ_k |K_k⟩⟩⟨⟨K_k|` with `|K⟩⟩ = Σ_i |i⟩ ⊗ K|i⟩`.
    pub fn choi(&self) -> CMat {
        let n = self.d_in * self.d_out;
        let mut j = CMat::zeros(n, n);
        for k in &self.kraus {
            let v = CVec::from_fn(n, |r, _| k[(r % self.d_out, r / self.d_out)]);
            j += &v * v.adjoint();
        }
        j
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &KrausMap) -> Result<KrausMap> {
        if first.d_out != self.d_in {
            return Err(Error::Dimension(format!(
                "cannot compose a {}-dimensional output with a {}-dimensional input",
                first.d_out, self.d_in
            )));
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| first.kraus.iter().map(move |b| a * b))
            .collect();
        KrausMap::new(first.d_in, self.d_out, kraus)
    }

    pub fn tensor(&self, other: &KrausMap) -> KrausMap {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| tensor(a, b)))
            .collect();
        KrausMap {
            d_in: self.d_in * other.d_in,
            d_out: self.d_out * other.d_out,
            kraus,
        }
    }

    /// Hilbert–Schmidt dual: `Tr[A T(B)] = Tr[T*(A) B]`.
    pub fn hs_dual(&self) -> KrausMap {
        KrausMap {
            d_in: self.d_out,
            d_out: self.d_in,
            kraus: self.kraus.iter().map(|k| k.adjoint()).collect(),
        }
    }

    /// Minimal, mutually orthogonal Kraus form. The nonzero spectrum of the
    /// Choi matrix `M M†` is that of the Gram matrix `M† M` of the Kraus
    /// operators, which is the smaller of the two whenever there are fewer
    /// Kraus operators than `d_in·d_out`.
    pub fn simplify(&self) -> KrausMap {
        let r = self.kraus.len();
        if r > self.d_in * self.d_out {
            return kraus_from_psd_choi(&self.choi(), self.d_in, self.d_out);
        }
        let gram = CMat::from_fn(r, r, |k, l| self.kraus[k].dotc(&self.kraus[l]));
        let e = eigh(&crate::linalg::hermitian_part(&gram));
        let mut kraus: Vec<CMat> = e
            .values
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &l)| l > CHOI_CUTOFF)
            .map(|(m, _)| {
                let mut k = CMat::zeros(self.d_out, self.d_in);
                for (q, kq) in self.kraus.iter().enumerate() {
                    k += kq * e.vectors[(q, m)];
                }
                k
            })
            .collect();
        if kraus.is_empty() {
            kraus.push(CMat::zeros(self.d_out, self.d_in));
        }
        KrausMap {
            d_in: self.d_in,
            d_out: self.d_out,
            kraus,
        }
    }

    /// Validates trace preservation.
    pub fn into_channel(self) -> Result<Channel> {
        Channel::from_map(self)
    }
}

fn kraus_from_psd_choi(j: &CMat, d_in: usize, d_out: usize) -> KrausMap {
    let e = eigh(j);
    let mut kraus: Vec<CMat> = e
        .values
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &l)| l > CHOI_CUTOFF)
        .map(|(k, &l)| {
            let s = l.sqrt();
            CMat::from_fn(d_out, d_in, |a, i| e.vectors[(i * d_out + a, k)] * s)
        })
        .collect();
    if kraus.is_empty() {
        kraus.push(CMat::zeros(d_out, d_in));
    }
    KrausMap { d_in, d_out, kraus }
}

/// A trace-preserving completely positive map.
#[derive(Clone, Debug)]
pub struct Channel {
    map: KrausMap,
}

impl Channel {
    /// Validates `Σ K†K = 1` within [`TP_TOL`].
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<CMat>) -> Result<Self> {
        Self::from_map(KrausMap::new(d_in, d_out, kraus)?)
    }

    pub fn from_map(map: KrausMap) -> Result<Self> {
        let defect = map.tp_defect();
        if defect > TP_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not trace preserving (‖ΣK†K − 1‖_max = {defect:e})"
            )));
        }
        Ok(Self { map })
    }

    /// Reads a channel off a Choi matrix; requires `J ⪰ 0` and `Tr_out J = 1`
    /// within [`TP_TOL`].
    pub fn from_choi(j: &CMat, d_in: usize, d_out: usize) -> Result<Self> {
        check_dim(j, d_in * d_out, "Choi matrix")?;
        linalg::check_hermitian(j, TP_TOL)?;
        let e = eigh(j);
        let min = e.values.first().copied().unwrap_or(0.0);
        if min < -TP_TOL {
            return Err(Error::NotPsd(min));
        }
        let marginal = linalg::ptrace_second(j, d_in, d_out)?;
        let defect = max_abs_diff(&marginal, &identity(d_in));
        if defect > TP_TOL {
            return Err(Error::InvalidChannel(format!(
                "Choi marginal differs from the identity by {defect:e}"
            )));
        }
        Ok(Self {
            map: kraus_from_psd_choi(j, d_in, d_out),
        })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            map: KrausMap {
                d_in: d,
                d_out: d,
                kraus: vec![identity(d)],
            },
        }
    }

    pub fn unitary(u: &CMat) -> Result<Self> {
        check_unitary(u, HERMITIAN_TOL)?;
        let d = u.nrows();
        Ok(Self {
            map: KrausMap {
                d_in: d,
                d_out: d,
                kraus: vec![u.clone()],
            },
        })
    }

    /// `ρ ↦ Tr[ρ] · 1/d` with Kraus operators `|i⟩⟨j|/√d`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let kraus = (0..d)
            .flat_map(|i| (0..d).map(move |j| matrix_unit(d, i, j).scale(s)))
            .collect();
        Self {
            map: KrausMap {
                d_in: d,
                d_out: d,
                kraus,
            },
        }
    }

    /// Random channel with `r` Kraus operators: a Haar isometry
    /// `d_in → d_out·r` sliced into blocks. Needs `d_out·r ≥ d_in`.
    pub fn random<R: Rng + ?Sized>(d_in: usize, d_out: usize, r: usize, rng: &mut R) -> Result<Self> {
        if d_out * r < d_in {
            return Err(Error::Dimension(format!(
                "{r} Kraus operators into dimension {d_out} cannot preserve the trace of dimension {d_in}"
            )));
        }
        let u = haar_unitary(d_out * r, rng);
        let kraus = (0..r)
            .map(|k| CMat::from_fn(d_out, d_in, |a, i| u[(a * r + k, i)]))
            .collect();
        Self::new(d_in, d_out, kraus)
    }

    /// Replacement channel `ρ ↦ Tr[ρ] σ`.
    pub fn replacement(d_in: usize, sigma: &CMat) -> Result<Self> {
        check_density(sigma)?;
        let e = eigh(sigma);
        let d_out = sigma.nrows();
        let kraus: Vec<CMat> = e
            .values
            .iter()
            .enumerate()
            .filter(|(_, &q)| q > CHOI_CUTOFF)
            .flat_map(|(l, &q)| {
                let v = e.vector(l).scale(q.sqrt());
                (0..d_in).map(move |j| {
                    let mut k = CMat::zeros(d_out, d_in);
                    k.set_column(j, &v);
                    k
                })
            })
            .collect();
        Channel::new(d_in, d_out, kraus)
    }

    pub fn map(&self) -> &KrausMap {
        &self.map
    }

    pub fn d_in(&self) -> usize {
        self.map.d_in
    }

    pub fn d_out(&self) -> usize {
        self.map.d_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.map.kraus
    }

    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        self.map.apply(rho)
    }

    pub fn choi(&self) -> CMat {
        self.map.choi()
    }

    pub fn compose(&self, first: &Channel) -> Result<Channel> {
        Ok(Channel {
            map: self.map.compose(&first.map)?,
        })
    }

    pub fn tensor(&self, other: &Channel) -> Channel {
        Channel {
            map: self.map.tensor(&other.map),
        }
    }

    pub fn simplify(&self) -> Channel {
        Channel {
            map: self.map.simplify(),
        }
    }

    pub fn hs_dual(&self) -> KrausMap {
        self.map.hs_dual()
    }
}

/// Hilbert–Schmidt dual of a channel; trace preserving iff `t` is unital.
pub fn hs_dual(t: &Channel) -> KrausMap {
    t.hs_dual()
}

/// `‖T(1) − 1‖_max ≤ tol`.
pub fn is_doubly_stochastic(t: &Channel, tol: f64) -> Result<bool> {
    if t.d_in() != t.d_out() {
        return Err(Error::Dimension(format!(
            "doubly stochastic test needs d_in = d_out, got {} and {}",
            t.d_in(),
            t.d_out()
        )));
    }
    let img = t.apply(&identity(t.d_in()))?;
    Ok(max_abs_diff(&img, &identity(t.d_out())) <= tol)
}

/// A symmetry action on one system, either through Lie-algebra generators or
/// through the images of a finite group.
#[derive(Clone, Debug)]
pub enum Symmetry {
    Generators(Vec<CMat>),
    Group(FiniteGroupRep),
}

impl Symmetry {
    pub fn dim(&self) -> Option<usize> {
        match self {
            Symmetry::Generators(g) => g.first().map(|x| x.nrows()),
            Symmetry::Group(rep) => Some(rep.dim()),
        }
    }

    /// Representation on a bipartite system: Kronecker sums of generators or
    /// tensor products of group images.
    pub fn tensor(&self, other: &Symmetry) -> Result<Symmetry> {
        match (self, other) {
            (Symmetry::Generators(a), Symmetry::Generators(b)) => {
                if a.len() != b.len() {
                    return Err(Error::InvalidRepresentation(format!(
                        "{} versus {} generators",
                        a.len(),
                        b.len()
                    )));
                }
                Ok(Symmetry::Generators(
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| crate::repr::kronecker_sum(&[x, y]))
                        .collect(),
                ))
            }
            (Symmetry::Group(a), Symmetry::Group(b)) => Ok(Symmetry::Group(a.tensor(b)?)),
            _ => Err(Error::InvalidRepresentation(
                "cannot combine generator and finite-group symmetries".into(),
            )),
        }
    }

    /// Largest `‖[ρ, X]‖_max` (generators) or `‖[ρ, W(g)]‖_max` (group).
    pub fn state_violation(&self, rho: &CMat) -> f64 {
        let ops: &[CMat] = match self {
            Symmetry::Generators(g) => g,
            Symmetry::Group(rep) => rep.images(),
        };
        ops.iter()
            .map(|x| max_abs(&commutator(rho, x)))
            .fold(0.0, f64::max)
    }
}

/// Verdict of a covariance check together with the worst residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceCheck {
    pub covariant: bool,
    pub max_violation: f64,
}

/// `maxᵢⱼ ‖Σ_t L_t|i⟩⟨j|R_t†‖_max`: the residual of a covariance identity on
/// the matrix unit `|i⟩⟨j|`, written as a sum of rank-one terms.
fn worst_rank_one_sum(terms: &[(CMat, CMat)], d_in: usize, d_out: usize) -> f64 {
    let mut worst: f64 = 0.0;
    let mut acc = CMat::zeros(d_out, d_out);
    for i in 0..d_in {
        for j in 0..d_in {
            acc.fill(crate::linalg::ZERO);
            for (l, r) in terms {
                let (li, rj) = (l.column(i), r.column(j));
                for b in 0..d_out {
                    let rb = rj[b].conj();
                    for a in 0..d_out {
                        acc[(a, b)] += li[a] * rb;
                    }
                }
            }
            worst = worst.max(max_abs(&acc));
        }
    }
    worst
}

/// Checks `T` against the symmetry on a full basis of matrix units.
///
/// Generators: `T[Xρ − ρX] = X′T[ρ] − T[ρ]X′`. Groups:
/// `T[WρW†] = W′T[ρ]W′†` for every element.
pub fn is_covariant(
    t: &KrausMap,
    rep_in: &Symmetry,
    rep_out: &Symmetry,
    tol: f64,
) -> Result<CovarianceCheck> {
    let (d_in, d_out) = (t.d_in(), t.d_out());
    let mut worst: f64 = 0.0;
    match (rep_in, rep_out) {
        (Symmetry::Generators(a), Symmetry::Generators(b)) => {
            if a.len() != b.len() {
                return Err(Error::InvalidRepresentation(format!(
                    "{} input versus {} output generators",
                    a.len(),
                    b.len()
                )));
            }
            for (x, y) in a.iter().zip(b) {
                check_dim(x, d_in, "input generator")?;
                check_dim(y, d_out, "output generator")?;
                // T[X E] − T[E X] − Y T[E] + T[E] Y, with E = |i⟩⟨j|
                let mut terms = Vec::with_capacity(2 * t.kraus().len());
                for k in t.kraus() {
                    terms.push((k * x - y * k, k.clone()));
                    terms.push((-k, k * x.adjoint() - y.adjoint() * k));
                }
                worst = worst.max(worst_rank_one_sum(&terms, d_in, d_out));
            }
        }
        (Symmetry::Group(a), Symmetry::Group(b)) => {
            if a.group() != b.group() {
                return Err(Error::InvalidRepresentation(
                    "input and output representations belong to different groups".into(),
                ));
            }
            check_dim(&a.images()[0], d_in, "input representation")?;
            check_dim(&b.images()[0], d_out, "output representation")?;
            for (w, v) in a.images().iter().zip(b.images()) {
                let mut terms = Vec::with_capacity(2 * t.kraus().len());
                for k in t.kraus() {
                    terms.push((k * w, k * w));
                    terms.push((-(v * k), v * k));
                }
                worst = worst.max(worst_rank_one_sum(&terms, d_in, d_out));
            }
        }
        _ => {
            return Err(Error::InvalidRepresentation(
                "input and output symmetries must be of the same kind".into(),
            ))
        }
    }
    Ok(CovarianceCheck {
        covariant: worst <= tol,
        max_violation: worst,
    })
}

/// Group average `(1/|G|) Σ_g W′(g)† T[W(g) · W(g)†] W′(g)`; always covariant.
pub fn twirl(t: &Channel, rep_in: &FiniteGroupRep, rep_out: &FiniteGroupRep) -> Result<Channel> {
    if rep_in.group() != rep_out.group() {
        return Err(Error::InvalidRepresentation(
            "twirl needs representations of one group".into(),
        ));
    }
    check_dim(&rep_in.images()[0], t.d_in(), "input representation")?;
    check_dim(&rep_out.images()[0], t.d_out(), "output representation")?;
    let s = 1.0 / (rep_in.group().order() as f64).sqrt();
    let kraus = rep_in
        .images()
        .iter()
        .zip(rep_out.images())
        .flat_map(|(w, v)| t.kraus().iter().map(move |k| (v.adjoint() * k * w).scale(s)))
        .collect();
    Ok(Channel::new(t.d_in(), t.d_out(), kraus)?.simplify())
}

/// `ρ_S ↦ Tr_C[T(ρ_S ⊗ σ_C)]` for `T` acting on `S ⊗ C`; `d_c_out` is the
/// dimension of the output catalyst factor.
pub fn induced_channel(t: &Channel, sigma_c: &CMat, d_c_out: usize) -> Result<Channel> {
    check_density(sigma_c)?;
    let d_c = sigma_c.nrows();
    if !t.d_in().is_multiple_of(d_c) || !t.d_out().is_multiple_of(d_c_out) {
        return Err(Error::Dimension(format!(
            "channel {}→{} does not factor through catalyst dimensions {d_c}→{d_c_out}",
            t.d_in(),
            t.d_out()
        )));
    }
    let (d_s, d_s_out) = (t.d_in() / d_c, t.d_out() / d_c_out);
    let e = eigh(sigma_c);
    let mut kraus = Vec::new();
    for (l, &p) in e.values.iter().enumerate() {
        if p <= CHOI_CUTOFF {
            continue;
        }
        let phi = e.vector(l).scale(p.sqrt());
        for k in t.kraus() {
            // (1 ⊗ ⟨m|) K (1 ⊗ |φ⟩)
            let kphi = CMat::from_fn(t.d_out(), d_s, |r, a| {
                (0..d_c).map(|q| k[(r, a * d_c + q)] * phi[q]).sum()
            });
            for m in 0..d_c_out {
                kraus.push(CMat::from_fn(d_s_out, d_s, |b, a| kphi[(b * d_c_out + m, a)]));
            }
        }
    }
    Ok(Channel::new(d_s, d_s_out, kraus)?.simplify())
}

/// `σ_C ↦ Tr_S[U(ρ_S ⊗ σ_C)U†]` for a unitary `U` on `S ⊗ C`.
pub fn env_channel(u: &CMat, rho_s: &CMat) -> Result<Channel> {
    check_unitary(u, HERMITIAN_TOL)?;
    check_density(rho_s)?;
    let d_s = rho_s.nrows();
    let n = u.nrows();
    if !n.is_multiple_of(d_s) {
        return Err(Error::Dimension(format!(
            "unitary of dimension {n} does not factor through system dimension {d_s}"
        )));
    }
    let d_c = n / d_s;
    let e = eigh(rho_s);
    let mut kraus = Vec::new();
    for (l, &p) in e.values.iter().enumerate() {
        if p <= CHOI_CUTOFF {
            continue;
        }
        let psi = e.vector(l).scale(p.sqrt());
        // U (|ψ⟩ ⊗ 1): n × d_c
        let upsi = CMat::from_fn(n, d_c, |r, q| {
            (0..d_s).map(|a| u[(r, a * d_c + q)] * psi[a]).sum()
        });
        for m in 0..d_s {
            kraus.push(CMat::from_fn(d_c, d_c, |r, q| upsi[(m * d_c + r, q)]));
        }
    }
    Ok(Channel::new(d_c, d_c, kraus)?.simplify())
}
