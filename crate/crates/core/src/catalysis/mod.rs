//! Exact catalysis under a connected symmetry: scenario checks, the
//! reduction to Gibbs-operator tuples and the construction of an intertwiner
//! acting on the system alone.
//!
//! A scenario is a unitary `U` on `S ⊗ C` with
//!
//! ```text
//! U (ρ_S ⊗ σ_C) U† = ρ′_S ⊗ σ_C
//! U (X⁽ⁱ⁾_S ⊗ 1 + 1 ⊗ X⁽ⁱ⁾_C) = (Y⁽ⁱ⁾_S ⊗ 1 + 1 ⊗ X⁽ⁱ⁾_C) U     for every generator i.
//! ```
//!
//! Exponentiating the generators turns this into a simultaneous unitary
//! equivalence of product tuples, which factors down to `S` and is solved by
//! [`crate::words::find_simultaneous_unitary`].

mod pairwise;
mod correlation;
mod finite;

pub use pairwise::{pairwise_fixture, pairwise_report, PairwiseFixture, PairwiseReport, PairCheck};
pub use correlation::{controlled_unitary, correlation_balance, CorrelationReport};
pub use finite::{finite_group_check, regular_rep_channel, state_swap_channel, FiniteGroupCheck};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{
    c, check_density, check_dim, check_unitary, diag_real, eigh, haar_unitary, identity,
    max_abs_diff, random_density, tensor, CMat, HERMITIAN_TOL,
};
use crate::par::{self, Exec};
use crate::repr::{gibbs_operator, kronecker_sum, LieSymmetry};
use crate::words::{find_simultaneous_unitary, SearchStage, UnitarySearchConfig};
use crate::{Error, Result};

/// Tolerance for the structural equalities of a scenario.
pub const ADMISSIBLE_TOL: f64 = 1e-9;
/// Acceptance tolerance for a constructed intertwiner.
pub const INTERTWINER_TOL: f64 = 1e-7;

/// System labels used in the symmetry of a scenario.
pub const SYSTEM_IN: &str = "S";
pub const SYSTEM_OUT: &str = "S'";
pub const CATALYST: &str = "C";

#[derive(Clone, Debug)]
pub struct CatalysisScenario {
    /// Generators on `S` (input), `S'` (output, same dimension) and `C`.
    pub symmetry: LieSymmetry,
    pub u: CMat,
    pub rho_s: CMat,
    pub rho_s_prime: CMat,
    pub sigma_c: CMat,
    pub tol: f64,
}

impl CatalysisScenario {
    pub fn new(
        symmetry: LieSymmetry,
        u: CMat,
        rho_s: CMat,
        rho_s_prime: CMat,
        sigma_c: CMat,
    ) -> Result<Self> {
        let d_s = symmetry.system(SYSTEM_IN)?.dim;
        let d_s2 = symmetry.system(SYSTEM_OUT)?.dim;
        let d_c = symmetry.system(CATALYST)?.dim;
        if d_s != d_s2 {
            return Err(Error::Dimension(format!(
                "input and output system dimensions differ ({d_s} vs {d_s2})"
            )));
        }
        check_density(&rho_s)?;
        check_density(&rho_s_prime)?;
        check_density(&sigma_c)?;
        check_dim(&rho_s, d_s, "rho_s")?;
        check_dim(&rho_s_prime, d_s, "rho_s_prime")?;
        check_dim(&sigma_c, d_c, "sigma_c")?;
        check_dim(&u, d_s * d_c, "unitary")?;
        check_unitary(&u, HERMITIAN_TOL)?;
        Ok(Self {
            symmetry,
            u,
            rho_s,
            rho_s_prime,
            sigma_c,
            tol: ADMISSIBLE_TOL,
        })
    }

    pub fn d_s(&self) -> usize {
        self.rho_s.nrows()
    }

    pub fn d_c(&self) -> usize {
        self.sigma_c.nrows()
    }

    pub fn num_generators(&self) -> usize {
        self.symmetry.num_generators()
    }

    fn gens(&self, label: &str) -> &[CMat] {
        self.symmetry
            .generators(label)
            .expect("validated at construction")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub state_residual: f64,
    pub generator_residuals: Vec<f64>,
    pub admissible: bool,
}

pub fn verify_scenario(sc: &CatalysisScenario) -> ScenarioReport {
    let u = &sc.u;
    let lhs = u * tensor(&sc.rho_s, &sc.sigma_c) * u.adjoint();
    let state_residual = max_abs_diff(&lhs, &tensor(&sc.rho_s_prime, &sc.sigma_c));
    let generator_residuals: Vec<f64> = (0..sc.num_generators())
        .map(|i| {
            let xs = &sc.gens(SYSTEM_IN)[i];
            let ys = &sc.gens(SYSTEM_OUT)[i];
            let xc = &sc.gens(CATALYST)[i];
            let before = kronecker_sum(&[xs, xc]);
            let after = kronecker_sum(&[ys, xc]);
            max_abs_diff(&(u * before), &(after * u))
        })
        .collect();
    let admissible =
        state_residual <= sc.tol && generator_residuals.iter().all(|&r| r <= sc.tol);
    ScenarioReport {
        state_residual,
        generator_residuals,
        admissible,
    }
}

/// Factor tuples of the product equations: slot 0 carries the states, slots
/// `1..=m` the Gibbs operators `exp(−X)`.
#[derive(Clone, Debug)]
pub struct ReducedTuples {
    /// `(ρ_S, exp(−X⁽¹⁾_S), …)`
    pub a: Vec<CMat>,
    /// `(ρ′_S, exp(−Y⁽¹⁾_S), …)`
    pub b: Vec<CMat>,
    /// `(σ_C, exp(−X⁽¹⁾_C), …)`
    pub c: Vec<CMat>,
}

pub fn reduce_to_tuples(sc: &CatalysisScenario) -> Result<ReducedTuples> {
    let report = verify_scenario(sc);
    if !report.admissible {
        return Err(Error::NotAdmissible(format!(
            "state residual {:e}, generator residuals {:?}",
            report.state_residual, report.generator_residuals
        )));
    }
    let mut a = vec![sc.rho_s.clone()];
    let mut b = vec![sc.rho_s_prime.clone()];
    let mut cc = vec![sc.sigma_c.clone()];
    for (label, out) in [(SYSTEM_IN, &mut a), (SYSTEM_OUT, &mut b), (CATALYST, &mut cc)] {
        for x in sc.gens(label) {
            let w = gibbs_operator(x)?.matrix;
            let min = eigh(&w).values[0];
            if min <= 1e-12 {
                return Err(Error::NotAdmissible(format!(
                    "Gibbs operator of a `{label}` generator is numerically singular (λ_min = {min:e})"
                )));
            }
            out.push(w);
        }
    }
    Ok(ReducedTuples { a, b, c: cc })
}

#[derive(Clone, Debug, Serialize)]
pub struct IntertwinerResult {
    #[serde(serialize_with = "crate::io::ser_matrix")]
    pub v: CMat,
    /// `‖V ρ_S V† − ρ′_S‖_max`
    pub state_residual: f64,
    /// `maxᵢ ‖V X⁽ⁱ⁾_S − Y⁽ⁱ⁾_S V‖_max`
    pub intertwining_residual: f64,
    pub success: bool,
    pub stage: SearchStage,
    pub seed: u64,
    pub restarts: usize,
}

/// Builds `V` on `S` with `V ρ_S V† = ρ′_S` and `V X⁽ⁱ⁾_S = Y⁽ⁱ⁾_S V`.
pub fn find_intertwiner(
    sc: &CatalysisScenario,
    cfg: &UnitarySearchConfig,
    exec: Exec,
) -> Result<IntertwinerResult> {
    let t = reduce_to_tuples(sc)?;
    let search = find_simultaneous_unitary(&t.a, &t.b, cfg, exec)?;
    let v = search.unitary;
    let state_residual = max_abs_diff(&(&v * &sc.rho_s * v.adjoint()), &sc.rho_s_prime);
    let intertwining_residual = sc
        .gens(SYSTEM_IN)
        .iter()
        .zip(sc.gens(SYSTEM_OUT))
        .map(|(x, y)| max_abs_diff(&(&v * x), &(y * &v)))
        .fold(0.0, f64::max);
    let success = state_residual <= INTERTWINER_TOL && intertwining_residual <= INTERTWINER_TOL;
    Ok(IntertwinerResult {
        v,
        state_residual,
        intertwining_residual,
        success,
        stage: search.stage,
        seed: cfg.seed,
        restarts: cfg.restarts,
    })
}

/// Random admissible scenario built from integer charges in `{−1, 0, 1}`.
///
/// `V₀` is Haar on `S`, `Y⁽ⁱ⁾ = V₀ X⁽ⁱ⁾ V₀†` and `ρ′_S = V₀ ρ_S V₀†`. For even
/// seeds `U = (V₀ ⊗ 1) D` with `D` a random phase on each joint charge sector,
/// `ρ_S` block-diagonal in the charge sectors of `S` and `σ_C` diagonal, which
/// makes `U` entangling. For odd seeds `U = V₀ ⊗ 1` with generic states.
pub fn generate_admissible_scenario(
    d_s: usize,
    d_c: usize,
    m: usize,
    seed: u64,
) -> Result<CatalysisScenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let charges = |d: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-1i32..=1) as f64).collect()
    };
    let qs: Vec<Vec<f64>> = (0..m).map(|_| charges(d_s, &mut rng)).collect();
    let qc: Vec<Vec<f64>> = (0..m).map(|_| charges(d_c, &mut rng)).collect();
    let v0 = haar_unitary(d_s, &mut rng);
    let xs: Vec<CMat> = qs.iter().map(|q| diag_real(q)).collect();
    let ys: Vec<CMat> = xs.iter().map(|x| &v0 * x * v0.adjoint()).collect();
    let xc: Vec<CMat> = qc.iter().map(|q| diag_real(q)).collect();

    let entangling = seed.is_multiple_of(2) && m > 0;
    let (rho_s, sigma_c, d) = if entangling {
        // S basis states grouped by their charge vectors
        let sectors = group_by_key(&(0..d_s).map(|k| key(&qs, k)).collect::<Vec<_>>());
        let mut rho = CMat::zeros(d_s, d_s);
        for idx in &sectors {
            let block = random_density(idx.len(), &mut rng).scale(rng.random_range(0.1..1.0));
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    rho[(i, j)] = block[(a, b)];
                }
            }
        }
        let rho = rho.unscale(rho.trace().re);
        let p: Vec<f64> = (0..d_c).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = p.iter().sum();
        let sigma = diag_real(&p.iter().map(|x| x / total).collect::<Vec<_>>());
        // one random phase per joint charge vector
        let joint: Vec<Vec<i64>> = (0..d_s * d_c)
            .map(|r| {
                (0..m)
                    .map(|i| (qs[i][r / d_c] + qc[i][r % d_c]).round() as i64)
                    .collect()
            })
            .collect();
        let groups = group_by_key(&joint);
        let mut phases = vec![c(1.0, 0.0); d_s * d_c];
        for idx in groups {
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            for i in idx {
                phases[i] = c(phi.cos(), phi.sin());
            }
        }
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(phases));
        (rho, sigma, d)
    } else {
        (
            random_density(d_s, &mut rng),
            random_density(d_c, &mut rng),
            identity(d_s * d_c),
        )
    };
    let u = tensor(&v0, &identity(d_c)) * d;
    let rho_s_prime = &v0 * &rho_s * v0.adjoint();
    let symmetry = LieSymmetry::new(m)
        .with_system(SYSTEM_IN, d_s, xs)?
        .with_system(SYSTEM_OUT, d_s, ys)?
        .with_system(CATALYST, d_c, xc)?;
    CatalysisScenario::new(symmetry, u, rho_s, rho_s_prime, sigma_c)
}

fn key(qs: &[Vec<f64>], k: usize) -> Vec<i64> {
    qs.iter().map(|q| q[k].round() as i64).collect()
}

/// Index groups of equal keys, in order of first appearance.
fn group_by_key(keys: &[Vec<i64>]) -> Vec<Vec<usize>> {
    let mut groups: Vec<(Vec<i64>, Vec<usize>)> = Vec::new();
    for (i, k) in keys.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| g == k) {
            Some((_, v)) => v.push(i),
            None => groups.push((k.clone(), vec![i])),
        }
    }
    groups.into_iter().map(|(_, v)| v).collect()
}

/// One scenario of a batch run.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub d_s: usize,
    pub d_c: usize,
    pub m: usize,
    pub seed: u64,
    pub scenario: ScenarioReport,
    pub intertwiner: Option<IntertwinerResult>,
    pub correlation: Option<CorrelationReport>,
    pub error: Option<String>,
}

impl SuiteEntry {
    pub fn passed(&self) -> bool {
        self.scenario.state_residual <= 1e-10
            && self.scenario.generator_residuals.iter().all(|&r| r <= 1e-10)
            && self.intertwiner.as_ref().is_some_and(|r| r.success)
    }
}

/// Parameters of scenario `k` in a batch: dimensions cycle through
/// `{2,3} × {2,3,4}`, generator counts through `{1, 2}`.
pub fn suite_parameters(k: usize) -> (usize, usize, usize) {
    const DIMS: [(usize, usize); 6] = [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4)];
    let (d_s, d_c) = DIMS[k % 6];
    let m = 1 + (k / 6) % 2;
    (d_s, d_c, m)
}

/// Generates and solves `count` scenarios with seeds `seed, seed + 1, …`.
pub fn run_suite(count: usize, seed: u64, cfg: &UnitarySearchConfig, exec: Exec) -> Vec<SuiteEntry> {
    par::map_range(exec, count, |k| {
        let (d_s, d_c, m) = suite_parameters(k);
        let s = seed.wrapping_add(k as u64);
        let sc = match generate_admissible_scenario(d_s, d_c, m, s) {
            Ok(sc) => sc,
            Err(e) => {
                return SuiteEntry {
                    d_s,
                    d_c,
                    m,
                    seed: s,
                    scenario: ScenarioReport {
                        state_residual: f64::NAN,
                        generator_residuals: vec![],
                        admissible: false,
                    },
                    intertwiner: None,
                    correlation: None,
                    error: Some(e.to_string()),
                }
            }
        };
        let scenario = verify_scenario(&sc);
        // inner searches stay sequential; the batch is the parallel unit
        let cfg = UnitarySearchConfig { seed: s, ..cfg.clone() };
        let (intertwiner, mut error) = match find_intertwiner(&sc, &cfg, Exec::Sequential) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let correlation = match correlation_balance(&sc.u, &sc.rho_s, &sc.sigma_c, ADMISSIBLE_TOL) {
            Ok(r) => Some(r),
            Err(e) => {
                error.get_or_insert(e.to_string());
                None
            }
        };
        SuiteEntry {
            d_s,
            d_c,
            m,
            seed: s,
            scenario,
            intertwiner,
            correlation,
            error,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, random_hermitian};

    fn qubit_sym(xs: CMat, ys: CMat, xc: CMat) -> LieSymmetry {
        LieSymmetry::new(1)
            .with_system(SYSTEM_IN, 2, vec![xs])
            .unwrap()
            .with_system(SYSTEM_OUT, 2, vec![ys])
            .unwrap()
            .with_system(CATALYST, 2, vec![xc])
            .unwrap()
    }

    #[test]
    fn product_construction_is_admissible() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let v0 = haar_unitary(2, &mut r);
        let x = random_hermitian(2, &mut r);
        let sym = qubit_sym(x.clone(), &v0 * &x * v0.adjoint(), random_hermitian(2, &mut r));
        let rho = random_density(2, &mut r);
        let sc = CatalysisScenario::new(
            sym,
            tensor(&v0, &identity(2)),
            rho.clone(),
            &v0 * &rho * v0.adjoint(),
            random_density(2, &mut r),
        )
        .unwrap();
        let rep = verify_scenario(&sc);
        assert!(rep.admissible);
        assert!(rep.state_residual < 1e-12 && rep.generator_residuals[0] < 1e-12);
        let res = find_intertwiner(&sc, &Default::default(), Exec::default()).unwrap();
        assert!(res.success);
        assert!(res.state_residual < 1e-8 && res.intertwining_residual < 1e-8);
    }

    #[test]
    fn swap_breaks_the_catalyst() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let swap = from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ]);
        let z = CMat::zeros(2, 2);
        let (rho, sigma) = (random_density(2, &mut r), random_density(2, &mut r));
        let sc = CatalysisScenario::new(qubit_sym(z.clone(), z.clone(), z), swap, rho.clone(), rho, sigma)
            .unwrap();
        let rep = verify_scenario(&sc);
        assert!(!rep.admissible && rep.state_residual > 1e-3);
        assert!(matches!(reduce_to_tuples(&sc), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn identity_scenario_gives_identity_intertwiner() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let x = diag_real(&[1.0, -1.0]);
        let rho = random_density(2, &mut r);
        let sc = CatalysisScenario::new(
            qubit_sym(x.clone(), x.clone(), diag_real(&[0.0, 1.0])),
            identity(4),
            rho.clone(),
            rho,
            random_density(2, &mut r),
        )
        .unwrap();
        let res = find_intertwiner(&sc, &Default::default(), Exec::default()).unwrap();
        assert!(res.state_residual < 1e-10 && res.intertwining_residual < 1e-10);
        assert_eq!(res.stage, SearchStage::Identity);
    }

    #[test]
    fn reduction_examples() {
        let sym = LieSymmetry::new(0)
            .with_system(SYSTEM_IN, 2, vec![])
            .unwrap()
            .with_system(SYSTEM_OUT, 2, vec![])
            .unwrap()
            .with_system(CATALYST, 3, vec![])
            .unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let v0 = haar_unitary(2, &mut r);
        let rho = random_density(2, &mut r);
        let sigma = random_density(3, &mut r);
        let sc = CatalysisScenario::new(
            sym,
            tensor(&v0, &identity(3)),
            rho.clone(),
            &v0 * &rho * v0.adjoint(),
            sigma.clone(),
        )
        .unwrap();
        let t = reduce_to_tuples(&sc).unwrap();
        assert_eq!((t.a.len(), t.b.len(), t.c.len()), (1, 1, 1));
        assert_eq!(t.c[0], sigma);

        let sc = generate_admissible_scenario(3, 2, 2, 10).unwrap();
        let t = reduce_to_tuples(&sc).unwrap();
        for (x, w) in sc.gens(SYSTEM_IN).iter().zip(&t.a[1..]) {
            let mut expect: Vec<f64> = crate::linalg::eigenvalues(x).iter().map(|l| (-l).exp()).collect();
            expect.sort_by(f64::total_cmp);
            let got = crate::linalg::eigenvalues(w);
            for (p, q) in expect.iter().zip(&got) {
                assert!((p - q).abs() < 1e-12);
            }
        }
        let sym = LieSymmetry::new(1)
            .with_system(SYSTEM_IN, 2, vec![CMat::zeros(2, 2)])
            .unwrap()
            .with_system(SYSTEM_OUT, 2, vec![CMat::zeros(2, 2)])
            .unwrap()
            .with_system(CATALYST, 2, vec![CMat::zeros(2, 2)])
            .unwrap();
        let rho = random_density(2, &mut r);
        let sc = CatalysisScenario::new(sym, identity(4), rho.clone(), rho, random_density(2, &mut r)).unwrap();
        assert_eq!(reduce_to_tuples(&sc).unwrap().a[1], identity(2));
    }

    #[test]
    fn generator_is_admissible_and_deterministic() {
        for seed in 0..12u64 {
            let (d_s, d_c, m) = suite_parameters(seed as usize);
            let sc = generate_admissible_scenario(d_s, d_c, m, seed).unwrap();
            let rep = verify_scenario(&sc);
            assert!(rep.state_residual < 1e-12, "{rep:?}");
            assert!(rep.generator_residuals.iter().all(|&x| x < 1e-12));
            let again = generate_admissible_scenario(d_s, d_c, m, seed).unwrap();
            assert_eq!(sc.u, again.u);
            assert_eq!(sc.rho_s, again.rho_s);
        }
        let sc = generate_admissible_scenario(2, 2, 0, 7).unwrap();
        assert!(verify_scenario(&sc).admissible);
    }

    /// Operator-Schmidt rank of `U` on `S ⊗ C` via realignment.
    fn schmidt_rank(u: &CMat, d_s: usize, d_c: usize) -> usize {
        let r = CMat::from_fn(d_s * d_s, d_c * d_c, |row, col| {
            let (i, j) = (row / d_s, row % d_s);
            let (k, l) = (col / d_c, col % d_c);
            u[(i * d_c + k, j * d_c + l)]
        });
        crate::linalg::rank(&(r.adjoint() * &r), 1e-10)
    }

    #[test]
    fn even_seeds_give_entangling_unitaries() {
        let ranks: Vec<usize> = (0..12u64)
            .map(|k| {
                let (d_s, d_c, m) = suite_parameters(k as usize);
                let sc = generate_admissible_scenario(d_s, d_c, m, 2 * k).unwrap();
                schmidt_rank(&sc.u, d_s, d_c)
            })
            .collect();
        assert!(ranks.iter().filter(|&&r| r > 1).count() >= 6, "{ranks:?}");
        let odd = generate_admissible_scenario(3, 3, 2, 5).unwrap();
        assert_eq!(schmidt_rank(&odd.u, 3, 3), 1);
    }

    #[test]
    fn small_suite_passes() {
        let entries = run_suite(12, 100, &Default::default(), Exec::default());
        for e in &entries {
            assert!(e.passed(), "{e:?}");
        }
    }
}
