//! Bounded search for a word whose traces separate two matrix tuples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_tuple_dims, PowerTable, Word};
use crate::linalg::{check_hermitian, identity, operator_norm, CMat, C64, HERMITIAN_TOL};
use crate::par::{self, Exec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WiegmannConfig {
    pub max_length: usize,
    pub max_exponent: u32,
    pub num_random_words: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for WiegmannConfig {
    fn default() -> Self {
        Self {
            max_length: 6,
            max_exponent: 3,
            num_random_words: 1000,
            seed: 0,
            tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum WiegmannVerdict {
    /// No word within the search bound separates the tuples.
    EquivalentUpToBound { words_checked: usize },
    /// Conclusive: the tuples are not simultaneously unitarily equivalent.
    Distinguished {
        word: Word,
        trace_a: [f64; 2],
        trace_b: [f64; 2],
        gap: f64,
    },
}

impl WiegmannVerdict {
    pub fn is_distinguished(&self) -> bool {
        matches!(self, WiegmannVerdict::Distinguished { .. })
    }
}

fn differs(ta: C64, tb: C64, tol: f64) -> bool {
    (ta - tb).norm() > tol * 1f64.max(ta.norm()).max(tb.norm())
}

struct Search<'a> {
    pa: &'a [PowerTable],
    pb: &'a [PowerTable],
    num_vars: usize,
    exps: Vec<u32>,
    tol: f64,
}

type Hit = (Vec<(usize, u32)>, C64, C64);

impl Search<'_> {
    /// Depth-first over canonical words of exactly `target` letters whose
    /// first letter is fixed; prefix products are shared along the path.
    fn dfs(
        &self,
        word: &mut Vec<(usize, u32)>,
        pref_a: &CMat,
        pref_b: &CMat,
        target: usize,
    ) -> Option<Hit> {
        if word.len() == target {
            let (ta, tb) = (pref_a.trace(), pref_b.trace());
            return differs(ta, tb, self.tol).then(|| (word.clone(), ta, tb));
        }
        let last = word.last().map(|l| l.0);
        let at_leaf = word.len() + 1 == target;
        for v in 0..self.num_vars {
            if Some(v) == last {
                continue;
            }
            for &e in &self.exps {
                word.push((v, e));
                let hit = if at_leaf {
                    // Tr[P X] without forming P X
                    let ta = trace_product(pref_a, self.pa[v].get(e));
                    let tb = trace_product(pref_b, self.pb[v].get(e));
                    differs(ta, tb, self.tol).then(|| (word.clone(), ta, tb))
                } else {
                    let na = pref_a * self.pa[v].get(e);
                    let nb = pref_b * self.pb[v].get(e);
                    self.dfs(word, &na, &nb, target)
                };
                word.pop();
                if hit.is_some() {
                    return hit;
                }
            }
        }
        None
    }
}

fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let d = a.nrows();
    let mut t = C64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

fn count_words(num_vars: usize, num_exps: usize, len: usize) -> usize {
    if len == 0 || num_vars == 0 {
        return 0;
    }
    let mut n = num_vars * num_exps;
    for _ in 1..len {
        n = n.saturating_mul(num_vars.saturating_sub(1) * num_exps);
    }
    n
}

/// Compares word traces of two tuples: every canonical word up to
/// `max_length` letters with exponents `≤ max_exponent`, then seeded random
/// words of length up to `2d²` on spectrally rescaled copies.
///
/// Enumeration order is by length, then variables ascending, then exponents
/// in the order `1, 2, …, max, 0`; the first separating word in that order is
/// reported regardless of the execution mode.
pub fn wiegmann_equivalent(
    a: &[CMat],
    b: &[CMat],
    cfg: &WiegmannConfig,
    exec: Exec,
) -> Result<WiegmannVerdict> {
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
    let k = a.len();
    let pa: Vec<PowerTable> = a.iter().map(|m| PowerTable::new(m, cfg.max_exponent)).collect();
    let pb: Vec<PowerTable> = b.iter().map(|m| PowerTable::new(m, cfg.max_exponent)).collect();
    let mut exps: Vec<u32> = (1..=cfg.max_exponent).collect();
    exps.push(0);
    let search = Search {
        pa: &pa,
        pb: &pb,
        num_vars: k,
        exps,
        tol: cfg.tol,
    };
    let roots: Vec<(usize, u32)> = (0..k)
        .flat_map(|v| search.exps.iter().map(move |&e| (v, e)))
        .collect();
    let mut checked = 0usize;
    for len in 1..=cfg.max_length {
        let hit = par::find_first(exec, roots.len(), |r| {
            let (v, e) = roots[r];
            let mut word = vec![(v, e)];
            if len == 1 {
                let (ta, tb) = (pa[v].get(e).trace(), pb[v].get(e).trace());
                return differs(ta, tb, cfg.tol).then_some((word, ta, tb));
            }
            search.dfs(&mut word, pa[v].get(e), pb[v].get(e), len)
        });
        if let Some((letters, ta, tb)) = hit {
            return distinguished(&letters, k, ta, tb);
        }
        checked += count_words(k, search.exps.len(), len);
    }

    if cfg.num_random_words > 0 {
        let scales: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let n = operator_norm(x).max(operator_norm(y));
                if n > 0.0 {
                    1.0 / n
                } else {
                    1.0
                }
            })
            .collect();
        let na: Vec<CMat> = a.iter().zip(&scales).map(|(m, s)| m.scale(*s)).collect();
        let nb: Vec<CMat> = b.iter().zip(&scales).map(|(m, s)| m.scale(*s)).collect();
        let qa: Vec<PowerTable> = na.iter().map(|m| PowerTable::new(m, cfg.max_exponent)).collect();
        let qb: Vec<PowerTable> = nb.iter().map(|m| PowerTable::new(m, cfg.max_exponent)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let max_len = (2 * d * d).max(cfg.max_length + 1);
        let words: Vec<Vec<(usize, u32)>> = (0..cfg.num_random_words)
            .map(|_| random_word(&mut rng, k, cfg.max_exponent, cfg.max_length + 1, max_len))
            .collect();
        let hit = par::find_first(exec, words.len(), |i| {
            let w = &words[i];
            let (mut x, mut y) = (identity(d), identity(d));
            for &(v, e) in w {
                x *= qa[v].get(e);
                y *= qb[v].get(e);
            }
            let (ta, tb) = (x.trace(), y.trace());
            differs(ta, tb, cfg.tol).then(|| (w.clone(), ta, tb))
        });
        if let Some((letters, ta, tb)) = hit {
            // report traces of the original tuples
            let factor: f64 = letters
                .iter()
                .map(|&(v, e)| scales[v].powi(-(e as i32)))
                .product();
            return distinguished(&letters, k, ta * factor, tb * factor);
        }
        checked += cfg.num_random_words;
    }
    Ok(WiegmannVerdict::EquivalentUpToBound {
        words_checked: checked,
    })
}

fn random_word(
    rng: &mut ChaCha8Rng,
    num_vars: usize,
    max_exp: u32,
    min_len: usize,
    max_len: usize,
) -> Vec<(usize, u32)> {
    let len = rng.random_range(min_len..=max_len);
    let mut w: Vec<(usize, u32)> = Vec::with_capacity(len);
    for _ in 0..len {
        let v = match w.last() {
            Some(&(prev, _)) if num_vars > 1 => {
                let v = rng.random_range(0..num_vars - 1);
                if v >= prev {
                    v + 1
                } else {
                    v
                }
            }
            Some(_) => break,
            None => rng.random_range(0..num_vars),
        };
        w.push((v, rng.random_range(0..=max_exp)));
    }
    w
}

fn distinguished(letters: &[(usize, u32)], k: usize, ta: C64, tb: C64) -> Result<WiegmannVerdict> {
    Ok(WiegmannVerdict::Distinguished {
        word: Word::new(letters, k)?,
        trace_a: [ta.re, ta.im],
        trace_b: [tb.re, tb.im],
        gap: (ta - tb).norm(),
    })
}
