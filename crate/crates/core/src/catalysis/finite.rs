//! Covariant channels that use the regular representation of a finite group
//! as a perfect reference frame.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{is_covariant, Channel, Symmetry, CHOI_CUTOFF};
use crate::linalg::{
    check_density, check_dim, eigh, matrix_unit, max_abs_diff, partial_trace, random_density,
    tensor, CMat,
};
use crate::repr::{left_regular_representation, FiniteGroupRep};
use crate::{Error, Result};

/// Channel on `S ⊗ C`, `C` carrying the left regular representation, with
/// Kraus operators `W_S(y) K W_S(y)† ⊗ |y⟩⟨y|` for every Kraus operator `K`
/// of `target`. It is covariant for `W_S ⊗ L` and acts as `target` when the
/// pointer sits at the identity element.
pub fn regular_rep_channel(rep_s: &FiniteGroupRep, target: &Channel) -> Result<Channel> {
    let d = rep_s.dim();
    if target.d_in() != d || target.d_out() != d {
        return Err(Error::Dimension(format!(
            "target channel {}→{} does not act on the {d}-dimensional system",
            target.d_in(),
            target.d_out()
        )));
    }
    let n = rep_s.group().order();
    let mut kraus = Vec::with_capacity(n * target.kraus().len());
    for y in 0..n {
        let w = rep_s.image(y);
        let pointer = matrix_unit(n, y, y);
        for k in target.kraus() {
            kraus.push(tensor(&(w * k * w.adjoint()), &pointer));
        }
    }
    Channel::new(d * n, d * n, kraus)
}

/// Measure-and-prepare channel on `S ⊗ C`: reads the pointer `y` and prepares
/// `W_S(y x⁻¹) σ W_S(y x⁻¹)† ⊗ |y⟩⟨y|`. It is covariant and maps
/// `ρ ⊗ |x⟩⟨x|` to `σ ⊗ |x⟩⟨x|` for every `ρ`.
pub fn state_swap_channel(rep_s: &FiniteGroupRep, sigma: &CMat, x: usize) -> Result<Channel> {
    check_density(sigma)?;
    let d = rep_s.dim();
    check_dim(sigma, d, "target state")?;
    let g = rep_s.group();
    let n = g.order();
    if x >= n {
        return Err(Error::InvalidGroup(format!(
            "element {x} out of range for a group of order {n}"
        )));
    }
    let e = eigh(sigma);
    let mut kraus = Vec::new();
    for y in 0..n {
        let w = rep_s.image(g.mul(y, g.inv(x)));
        for (l, &q) in e.values.iter().enumerate() {
            if q <= CHOI_CUTOFF {
                continue;
            }
            let v = w * e.vector(l).scale(q.sqrt());
            for i in 0..d {
                // |v⟩⟨i| ⊗ |y⟩⟨y|
                let mut op = CMat::zeros(d, d);
                op.set_column(i, &v);
                kraus.push(tensor(&op, &matrix_unit(n, y, y)));
            }
        }
    }
    Channel::new(d * n, d * n, kraus)
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteGroupCheck {
    pub group: String,
    pub order: usize,
    pub dim: usize,
    pub targets: usize,
    /// `‖ℰ[ρ ⊗ |e⟩⟨e|] − T[ρ] ⊗ |e⟩⟨e|‖_max` at the identity pointer.
    pub identity_deviation: f64,
    pub covariance_violation: f64,
    pub tp_defect: f64,
    /// `‖Tr_C ℰ_swap[ρ ⊗ |x⟩⟨x|] − σ‖_max` and the pointer leak, over random `x`.
    pub swap_deviation: f64,
    pub passed: bool,
}

/// Runs both constructions on `targets` random channels and state pairs.
pub fn finite_group_check(
    name: &str,
    rep_s: &FiniteGroupRep,
    targets: usize,
    seed: u64,
    tol: f64,
) -> Result<FiniteGroupCheck> {
    let g = rep_s.group();
    let (n, d) = (g.order(), rep_s.dim());
    let joint = Symmetry::Group(rep_s.tensor(&left_regular_representation(g))?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = matrix_unit(n, g.identity(), g.identity());
    let (mut id_dev, mut cov, mut tp, mut swap): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..targets {
        let r = rng.random_range(1..=d);
        let t = Channel::random(d, d, r, &mut rng)?;
        let ch = regular_rep_channel(rep_s, &t)?;
        let rho = random_density(d, &mut rng);
        let out = ch.apply(&tensor(&rho, &e))?;
        id_dev = id_dev.max(max_abs_diff(&out, &tensor(&t.apply(&rho)?, &e)));
        cov = cov.max(is_covariant(ch.map(), &joint, &joint, tol)?.max_violation);
        tp = tp.max(ch.map().tp_defect());

        let sigma = random_density(d, &mut rng);
        let x = rng.random_range(0..n);
        let px = matrix_unit(n, x, x);
        let sw = state_swap_channel(rep_s, &sigma, x)?;
        let out = sw.apply(&tensor(&rho, &px))?;
        swap = swap.max(max_abs_diff(&out, &tensor(&sigma, &px)));
        let s_part = partial_trace(&out, &[d, n], &[0])?;
        swap = swap.max(max_abs_diff(&s_part, &sigma));
        cov = cov.max(is_covariant(sw.map(), &joint, &joint, tol)?.max_violation);
        tp = tp.max(sw.map().tp_defect());
    }
    Ok(FiniteGroupCheck {
        group: name.to_string(),
        order: n,
        dim: d,
        targets,
        identity_deviation: id_dev,
        covariance_violation: cov,
        tp_defect: tp,
        swap_deviation: swap,
        passed: id_dev <= 1e-10 && cov <= tol && tp <= 1e-10 && swap <= 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, from_real_rows, identity};
    use crate::repr::FiniteGroup;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_group_gives_target() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let g = FiniteGroup::trivial();
        let rep = FiniteGroupRep::trivial(g, 2);
        let t = Channel::unitary(&crate::linalg::haar_unitary(2, &mut r)).unwrap();
        let e = regular_rep_channel(&rep, &t).unwrap();
        let rho = random_density(2, &mut r);
        assert!(max_abs_diff(&e.apply(&rho).unwrap(), &t.apply(&rho).unwrap()) < 1e-12);
    }

    #[test]
    fn z2_hadamard_through_covariant_channel() {
        let g = FiniteGroup::cyclic(2);
        let z = diag_real(&[1.0, -1.0]);
        let rep_s = FiniteGroupRep::new(g.clone(), vec![identity(2), z]).unwrap();
        let h = from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]]).scale(0.5f64.sqrt());
        let target = Channel::unitary(&h).unwrap();
        let sym_s = Symmetry::Group(rep_s.clone());
        assert!(!is_covariant(target.map(), &sym_s, &sym_s, 1e-9).unwrap().covariant);

        let e = regular_rep_channel(&rep_s, &target).unwrap();
        let joint = Symmetry::Group(rep_s.tensor(&left_regular_representation(&g)).unwrap());
        assert!(is_covariant(e.map(), &joint, &joint, 1e-9).unwrap().covariant);
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(2, &mut r);
        let p = matrix_unit(2, 0, 0);
        let out = e.apply(&tensor(&rho, &p)).unwrap();
        assert!(max_abs_diff(&out, &tensor(&(&h * &rho * &h), &p)) < 1e-10);
    }

    #[test]
    fn swap_channel_examples() {
        let g = FiniteGroup::cyclic(2);
        let sx = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let rep_s = FiniteGroupRep::new(g.clone(), vec![identity(2), sx]).unwrap();
        let (rho, sigma) = (diag_real(&[1.0, 0.0]), diag_real(&[0.0, 1.0]));
        for x in 0..2 {
            let e = state_swap_channel(&rep_s, &sigma, x).unwrap();
            let p = matrix_unit(2, x, x);
            let out = e.apply(&tensor(&rho, &p)).unwrap();
            assert!(max_abs_diff(&out, &tensor(&sigma, &p)) < 1e-10);
            let same = e.apply(&tensor(&sigma, &p)).unwrap();
            assert!(max_abs_diff(&same, &tensor(&sigma, &p)) < 1e-10);
            let joint = Symmetry::Group(rep_s.tensor(&left_regular_representation(&g)).unwrap());
            assert!(is_covariant(e.map(), &joint, &joint, 1e-10).unwrap().covariant);
            assert!(e.map().tp_defect() < 1e-10);
        }
    }
}

#[cfg(test)]
mod check_tests {
    use super::*;
    use crate::repr::{symmetric_defining_representation, FiniteGroup};

    #[test]
    fn s3_defining_and_z2_checks_pass() {
        let r = finite_group_check("S3", &symmetric_defining_representation(3), 3, 1, 1e-9).unwrap();
        assert!(r.passed, "{r:?}");
        let g = FiniteGroup::cyclic(2);
        let z = crate::linalg::diag_real(&[1.0, -1.0]);
        let rep = FiniteGroupRep::new(g, vec![crate::linalg::identity(2), z]).unwrap();
        let r = finite_group_check("Z2", &rep, 5, 2, 1e-9).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
