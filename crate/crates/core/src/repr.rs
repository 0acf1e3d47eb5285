//! Group symmetries: Lie-type symmetries given by Hermitian generator lists,
//! finite groups given by multiplication tables, and their unitary
//! representations.

use std::collections::BTreeMap;

use crate::linalg::{
    self, c, check_dim, check_hermitian, check_unitary, commutator, identity, max_abs,
    max_abs_diff, tensor, trace_distance, CMat, HERMITIAN_TOL,
};
use crate::{Error, Result};

/// Generators of one system.
#[derive(Clone, Debug)]
pub struct SystemGenerators {
    pub dim: usize,
    pub generators: Vec<CMat>,
}

/// A Lie-type symmetry: for each system label, the Hermitian representatives
/// `X⁽¹⁾ … X⁽ᵐ⁾` of one fixed basis of the Lie algebra.
#[derive(Clone, Debug, Default)]
pub struct LieSymmetry {
    num_generators: usize,
    systems: BTreeMap<String, SystemGenerators>,
}

impl LieSymmetry {
    pub fn new(num_generators: usize) -> Self {
        Self {
            num_generators,
            systems: BTreeMap::new(),
        }
    }

    pub fn num_generators(&self) -> usize {
        self.num_generators
    }

    /// Registers a system. All generators must be Hermitian and `dim × dim`.
    pub fn add_system(&mut self, label: &str, dim: usize, generators: Vec<CMat>) -> Result<()> {
        if generators.len() != self.num_generators {
            return Err(Error::InvalidRepresentation(format!(
                "system `{label}` has {} generators, expected {}",
                generators.len(),
                self.num_generators
            )));
        }
        for g in &generators {
            check_dim(g, dim, "generator")?;
            check_hermitian(g, HERMITIAN_TOL)?;
        }
        self.systems
            .insert(label.to_string(), SystemGenerators { dim, generators });
        Ok(())
    }

    pub fn with_system(mut self, label: &str, dim: usize, generators: Vec<CMat>) -> Result<Self> {
        self.add_system(label, dim, generators)?;
        Ok(self)
    }

    pub fn system(&self, label: &str) -> Result<&SystemGenerators> {
        self.systems
            .get(label)
            .ok_or_else(|| Error::UnknownSystem(label.to_string()))
    }

    pub fn systems(&self) -> impl Iterator<Item = (&String, &SystemGenerators)> {
        self.systems.iter()
    }

    pub fn generators(&self, label: &str) -> Result<&[CMat]> {
        Ok(&self.system(label)?.generators)
    }
}

/// Kronecker sum of single-system generators over an ordered list of systems.
pub fn compose_generators(sym: &LieSymmetry, systems: &[&str]) -> Result<Vec<CMat>> {
    let parts: Vec<&SystemGenerators> = systems
        .iter()
        .map(|s| sym.system(s))
        .collect::<Result<_>>()?;
    Ok((0..sym.num_generators)
        .map(|i| {
            let lists: Vec<&CMat> = parts.iter().map(|p| &p.generators[i]).collect();
            kronecker_sum(&lists)
        })
        .collect())
}

/// `Σ_k 1 ⊗ … ⊗ X_k ⊗ … ⊗ 1`.
pub fn kronecker_sum(ops: &[&CMat]) -> CMat {
    let dims: Vec<usize> = ops.iter().map(|o| o.nrows()).collect();
    let total: usize = dims.iter().product();
    let mut out = CMat::zeros(total, total);
    for (k, op) in ops.iter().enumerate() {
        let left: usize = dims[..k].iter().product();
        let right: usize = dims[k + 1..].iter().product();
        out += tensor(&tensor(&identity(left), op), &identity(right));
    }
    out
}

/// Outcome of a symmetry test: the verdict and the largest commutator entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    pub max_commutator: f64,
}

/// Tests `[ρ, X⁽ⁱ⁾] = 0` for all generators.
pub fn is_symmetric_state(rho: &CMat, generators: &[CMat], tol: f64) -> Result<SymmetryCheck> {
    let d = linalg::check_square(rho, "state")?;
    let mut worst: f64 = 0.0;
    for g in generators {
        check_dim(g, d, "generator")?;
        worst = worst.max(max_abs(&commutator(rho, g)));
    }
    Ok(SymmetryCheck {
        symmetric: worst <= tol,
        max_commutator: worst,
    })
}

/// Tests `[ρ, W(g)] = 0` for every group element.
pub fn is_symmetric_under_group(rho: &CMat, rep: &FiniteGroupRep, tol: f64) -> Result<SymmetryCheck> {
    check_dim(rho, rep.dim(), "state")?;
    let worst = rep
        .images()
        .iter()
        .map(|w| max_abs(&commutator(rho, w)))
        .fold(0.0, f64::max);
    Ok(SymmetryCheck {
        symmetric: worst <= tol,
        max_commutator: worst,
    })
}

/// `exp(−X)` for a conserved quantity `X`; always positive definite.
#[derive(Clone, Debug)]
pub struct GibbsOperator {
    pub matrix: CMat,
    pub generator: CMat,
}

pub fn gibbs_operator(x: &CMat) -> Result<GibbsOperator> {
    check_hermitian(x, HERMITIAN_TOL)?;
    Ok(GibbsOperator {
        matrix: linalg::func_calc(x, |l| (-l).exp()),
        generator: x.clone(),
    })
}

/// Thermal state `exp(−βH)/Z`.
pub fn gibbs_state(h: &CMat, beta: f64) -> Result<CMat> {
    check_hermitian(h, HERMITIAN_TOL)?;
    let e = linalg::eigh(h);
    // shift by the ground energy so large β does not underflow
    let e0 = e.values.first().copied().unwrap_or(0.0);
    let z: f64 = e.values.iter().map(|l| (-beta * (l - e0)).exp()).sum();
    Ok(e.map(|l| c((-beta * (l - e0)).exp() / z, 0.0)))
}

/// A finite group given by its multiplication table, `table[x][y] = x·y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
    labels: Vec<String>,
}

impl FiniteGroup {
    /// Validates the Latin-square property, associativity, identity and inverses.
    pub fn new(table: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty multiplication table".into()));
        }
        for (x, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGroup(format!("row {x} has length {}", row.len())));
            }
            let mut seen = vec![false; n];
            for &v in row {
                if v >= n || seen[v] {
                    return Err(Error::InvalidGroup(format!("row {x} is not a permutation")));
                }
                seen[v] = true;
            }
        }
        for y in 0..n {
            let mut seen = vec![false; n];
            for row in &table {
                if seen[row[y]] {
                    return Err(Error::InvalidGroup(format!("column {y} is not a permutation")));
                }
                seen[row[y]] = true;
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if table[table[x][y]][z] != table[x][table[y][z]] {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({x}, {y}, {z})"
                        )));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let inverse = (0..n)
            .map(|x| {
                (0..n)
                    .find(|&y| table[x][y] == identity && table[y][x] == identity)
                    .ok_or_else(|| Error::InvalidGroup(format!("element {x} has no inverse")))
            })
            .collect::<Result<Vec<_>>>()?;
        let labels = match labels {
            Some(l) if l.len() == n => l,
            Some(l) => {
                return Err(Error::InvalidGroup(format!(
                    "{} labels for a group of order {n}",
                    l.len()
                )))
            }
            None => (0..n).map(|x| format!("g{x}")).collect(),
        };
        Ok(Self {
            table,
            identity,
            inverse,
            labels,
        })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// `ℤ_n` with elements `0..n` under addition.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|x| (0..n).map(|y| (x + y) % n).collect()).collect();
        let labels = (0..n).map(|x| x.to_string()).collect();
        Self::new(table, Some(labels)).expect("cyclic group table is valid")
    }

    /// Symmetric group on `k` letters; elements are permutations in
    /// lexicographic order, composed as `(p·q)(i) = p(q(i))`.
    pub fn symmetric(k: usize) -> Self {
        let perms = permutations(k);
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed");
        let table = perms
            .iter()
            .map(|p| {
                perms
                    .iter()
                    .map(|q| index(&q.iter().map(|&i| p[i]).collect()))
                    .collect()
            })
            .collect();
        let labels = perms
            .iter()
            .map(|p| p.iter().map(|i| i.to_string()).collect::<String>())
            .collect();
        Self::new(table, Some(labels)).expect("symmetric group table is valid")
    }

    /// Dihedral group of order `2n`: element `(k, f)` is `r^k s^f`, stored at `2k + f`.
    pub fn dihedral(n: usize) -> Self {
        let mul = |(k1, f1): (usize, usize), (k2, f2): (usize, usize)| {
            let k = if f1 == 0 { (k1 + k2) % n } else { (k1 + n - k2) % n };
            (k, f1 ^ f2)
        };
        let elems: Vec<(usize, usize)> = (0..n).flat_map(|k| [(k, 0), (k, 1)]).collect();
        let table = elems
            .iter()
            .map(|&a| {
                elems
                    .iter()
                    .map(|&b| {
                        let (k, f) = mul(a, b);
                        2 * k + f
                    })
                    .collect()
            })
            .collect();
        let labels = elems
            .iter()
            .map(|&(k, f)| if f == 0 { format!("r{k}") } else { format!("r{k}s") })
            .collect();
        Self::new(table, Some(labels)).expect("dihedral group table is valid")
    }

    /// Direct product; element `(a, b)` is stored at `a · |H| + b`.
    pub fn direct_product(&self, other: &FiniteGroup) -> Self {
        let (n, m) = (self.order(), other.order());
        let table = (0..n * m)
            .map(|x| {
                (0..n * m)
                    .map(|y| self.mul(x / m, y / m) * m + other.mul(x % m, y % m))
                    .collect()
            })
            .collect();
        let labels = (0..n * m)
            .map(|x| format!("({},{})", self.labels[x / m], other.labels[x % m]))
            .collect();
        Self::new(table, Some(labels)).expect("direct product table is valid")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let k = used.len();
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// A unitary representation of a finite group (genuine, not projective).
#[derive(Clone, Debug)]
pub struct FiniteGroupRep {
    group: FiniteGroup,
    images: Vec<CMat>,
}

impl FiniteGroupRep {
    /// Checks unitarity of every image and `W(x)W(y) = W(xy)` to `1e-10`.
    pub fn new(group: FiniteGroup, images: Vec<CMat>) -> Result<Self> {
        if images.len() != group.order() {
            return Err(Error::InvalidRepresentation(format!(
                "{} images for a group of order {}",
                images.len(),
                group.order()
            )));
        }
        let d = linalg::check_square(&images[0], "representation image")?;
        for w in &images {
            check_dim(w, d, "representation image")?;
            check_unitary(w, HERMITIAN_TOL)?;
        }
        for x in 0..group.order() {
            for y in 0..group.order() {
                let lhs = &images[x] * &images[y];
                let defect = max_abs_diff(&lhs, &images[group.mul(x, y)]);
                if defect > HERMITIAN_TOL {
                    return Err(Error::InvalidRepresentation(format!(
                        "W({x})W({y}) differs from W({x}{y}) by {defect:e}; projective phases are not supported"
                    )));
                }
            }
        }
        Ok(Self { group, images })
    }

    /// The representation sending every element to the identity.
    pub fn trivial(group: FiniteGroup, dim: usize) -> Self {
        let images = vec![identity(dim); group.order()];
        Self { group, images }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.images[0].nrows()
    }

    pub fn images(&self) -> &[CMat] {
        &self.images
    }

    pub fn image(&self, x: usize) -> &CMat {
        &self.images[x]
    }

    /// `x ↦ W₁(x) ⊗ W₂(x)`.
    pub fn tensor(&self, other: &FiniteGroupRep) -> Result<FiniteGroupRep> {
        if self.group != other.group {
            return Err(Error::InvalidRepresentation(
                "tensor product needs representations of the same group".into(),
            ));
        }
        let images = self
            .images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| tensor(a, b))
            .collect();
        Ok(Self {
            group: self.group.clone(),
            images,
        })
    }
}

/// Defining representation of the symmetric group on `k` letters,
/// `W(p)|i⟩ = |p(i)⟩`, with elements indexed as in [`FiniteGroup::symmetric`].
pub fn symmetric_defining_representation(k: usize) -> FiniteGroupRep {
    let images = permutations(k)
        .iter()
        .map(|p| {
            let mut m = CMat::zeros(k, k);
            for (i, &pi) in p.iter().enumerate() {
                m[(pi, i)] = crate::linalg::ONE;
            }
            m
        })
        .collect();
    FiniteGroupRep::new(FiniteGroup::symmetric(k), images).expect("permutation matrices form a representation")
}

/// Left regular representation `W(x)|y⟩ = |xy⟩`.
pub fn left_regular_representation(g: &FiniteGroup) -> FiniteGroupRep {
    let n = g.order();
    let images = (0..n)
        .map(|x| {
            let mut w = CMat::zeros(n, n);
            for y in 0..n {
                w[(g.mul(x, y), y)] = linalg::ONE;
            }
            w
        })
        .collect();
    FiniteGroupRep {
        group: g.clone(),
        images,
    }
}

/// `x ↦ D(W(x) ρ W(x)†, ρ)` over all group elements.
pub fn asymmetry_profile(rho: &CMat, rep: &FiniteGroupRep) -> Result<Vec<f64>> {
    check_dim(rho, rep.dim(), "state")?;
    (0..rep.group().order())
        .map(|x| {
            if x == rep.group().identity() {
                return Ok(0.0);
            }
            let w = rep.image(x);
            trace_distance(&(w * rho * w.adjoint()), rho)
        })
        .collect()
}

/// `t ↦ D(e^{−itX} ρ e^{itX}, ρ)` for a one-parameter family.
pub fn asymmetry_profile_generator(rho: &CMat, generator: &CMat, ts: &[f64]) -> Result<Vec<f64>> {
    check_dim(generator, rho.nrows(), "generator")?;
    let eig = linalg::eigh(generator);
    ts.iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(0.0);
            }
            let u = eig.map(|l| num_complex::Complex64::from_polar(1.0, -t * l));
            trace_distance(&(&u * rho * u.adjoint()), rho)
        })
        .collect()
}
