//! Three Hermitian 3×3 matrices whose pairs are jointly unitarily equivalent
//! to the corresponding pairs of a second triple while the triples are not.
//! Tensoring with supports `C⁽ⁱ⁾` that never overlap all at once repairs the
//! equivalence, so a factor of the catalyst cannot simply be dropped.

use serde::Serialize;

use crate::linalg::{c, commutator, identity, max_abs, tensor, CMat, ZERO};
use crate::par::Exec;
use crate::words::{
    find_simultaneous_unitary, wiegmann_equivalent, word_trace, SearchStage, UnitarySearchConfig,
    WiegmannConfig, WiegmannVerdict, Word,
};
use crate::Result;

#[derive(Clone, Debug)]
pub struct PairwiseFixture {
    pub a: [CMat; 3],
    pub b: [CMat; 3],
    pub c: [CMat; 3],
    pub v: CMat,
    pub w: CMat,
    /// `|Tr[B⁽¹⁾B⁽²⁾B⁽³⁾] − Tr[A⁽¹⁾A⁽²⁾A⁽³⁾]|`
    pub gap: f64,
}

fn perm(p: [usize; 3]) -> CMat {
    let mut m = CMat::zeros(3, 3);
    for (col, &row) in p.iter().enumerate() {
        m[(row, col)] = c(1.0, 0.0);
    }
    m
}

pub fn pairwise_fixture() -> PairwiseFixture {
    let s = 3f64.sqrt();
    let a1 = crate::linalg::diag_real(&[0.0, 0.0, 1.0]);
    let a2 = crate::linalg::from_real_rows(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
    let a3 = CMat::from_row_slice(
        3,
        3,
        &[ZERO, c(0.0, s), c(0.0, -s), c(0.0, -s), ZERO, c(0.0, s), c(0.0, s), c(0.0, -s), ZERO],
    );
    let v = perm([1, 0, 2]);
    let w = perm([2, 1, 0]);
    let b3 = &v * &a3 * v.adjoint();
    let cs = [
        crate::linalg::diag_real(&[1.0, 1.0, 0.0]),
        crate::linalg::diag_real(&[0.0, 1.0, 1.0]),
        crate::linalg::diag_real(&[1.0, 0.0, 1.0]),
    ];
    let ta = (&a1 * &a2 * &a3).trace();
    let tb = (&a1 * &a2 * &b3).trace();
    PairwiseFixture {
        b: [a1.clone(), a2.clone(), b3],
        a: [a1, a2, a3],
        c: cs,
        v,
        w,
        gap: (tb - ta).norm(),
    }
}

impl PairwiseFixture {
    /// `‖[A⁽¹⁾,V]‖`, `‖[A⁽²⁾,W]‖`, `‖[A⁽³⁾,V†W]‖`: the relations that make
    /// `V` intertwine the pair (1,3) and `W` the pair (2,3).
    pub fn commutator_norms(&self) -> [f64; 3] {
        let vw = self.v.adjoint() * &self.w;
        [
            max_abs(&commutator(&self.a[0], &self.v)),
            max_abs(&commutator(&self.a[1], &self.w)),
            max_abs(&commutator(&self.a[2], &vw)),
        ]
    }

    pub fn tensored(&self) -> (Vec<CMat>, Vec<CMat>) {
        let a = self.a.iter().zip(&self.c).map(|(x, y)| tensor(x, y)).collect();
        let b = self.b.iter().zip(&self.c).map(|(x, y)| tensor(x, y)).collect();
        (a, b)
    }

    /// The unitary `V ⊗ |0⟩⟨0| + 1 ⊗ |1⟩⟨1| + W ⊗ |2⟩⟨2|` that intertwines the tensored tuples.
    pub fn tensored_intertwiner(&self) -> CMat {
        let e = |k| crate::linalg::matrix_unit(3, k, k);
        tensor(&self.v, &e(0)) + tensor(&identity(3), &e(1)) + tensor(&self.w, &e(2))
    }
}

/// Canonical words over three variables with exponents `1..=max_exp`, up to
/// `max_len` letters, in which every variable occurs.
fn all_participating_words(max_len: usize, max_exp: u32) -> Vec<Word> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<(usize, u32)>> = vec![vec![]];
    while let Some(w) = stack.pop() {
        if (0..3).all(|v| w.iter().any(|l| l.0 == v)) {
            out.push(Word::new(&w, 3).expect("canonical"));
        }
        if w.len() == max_len {
            continue;
        }
        for v in 0..3 {
            if w.last().is_some_and(|l| l.0 == v) {
                continue;
            }
            for e in 1..=max_exp {
                let mut n = w.clone();
                n.push((v, e));
                stack.push(n);
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub pair: [usize; 2],
    pub wiegmann: WiegmannVerdict,
    pub residual: f64,
    pub success: bool,
    pub stage: SearchStage,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairwiseReport {
    pub gap: f64,
    pub commutator_norms: [f64; 3],
    /// Largest `|Tr w(C)|` over words in which all three supports take part.
    pub participating_trace_max: f64,
    pub pairs: Vec<PairCheck>,
    pub triple: WiegmannVerdict,
    pub tensored_residual: f64,
    pub tensored_success: bool,
    pub tensored_stage: SearchStage,
}

impl PairwiseReport {
    pub fn passed(&self, tol: f64) -> bool {
        (self.gap - 2.0 * 3f64.sqrt()).abs() <= 1e-9
            && self.commutator_norms.iter().all(|&n| n <= 1e-12)
            && self.participating_trace_max <= 1e-12
            && self.pairs.iter().all(|p| p.success && p.residual < tol)
            && matches!(&self.triple, WiegmannVerdict::Distinguished { word, .. } if word.to_string() == "x0 x1 x2")
            && self.tensored_success
            && self.tensored_residual < tol
    }
}

pub fn pairwise_report(
    wcfg: &WiegmannConfig,
    ucfg: &UnitarySearchConfig,
    exec: Exec,
) -> Result<PairwiseReport> {
    let f = pairwise_fixture();
    let mut participating_trace_max = 0.0f64;
    for w in all_participating_words(5, 3) {
        participating_trace_max = participating_trace_max.max(word_trace(&w, &f.c)?.norm());
    }
    let mut pairs = Vec::new();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let a = [f.a[i].clone(), f.a[j].clone()];
        let b = [f.b[i].clone(), f.b[j].clone()];
        let wiegmann = wiegmann_equivalent(&a, &b, wcfg, exec)?;
        let s = find_simultaneous_unitary(&a, &b, ucfg, exec)?;
        pairs.push(PairCheck {
            pair: [i, j],
            wiegmann,
            residual: s.residual,
            success: s.success,
            stage: s.stage,
        });
    }
    let triple = wiegmann_equivalent(&f.a, &f.b, wcfg, exec)?;
    let (ta, tb) = f.tensored();
    let s = find_simultaneous_unitary(&ta, &tb, ucfg, exec)?;
    Ok(PairwiseReport {
        gap: f.gap,
        commutator_norms: f.commutator_norms(),
        participating_trace_max,
        pairs,
        triple,
        tensored_residual: s.residual,
        tensored_success: s.success,
        tensored_stage: s.stage,
    })
}
