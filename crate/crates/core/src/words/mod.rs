//! Words in non-commuting matrix variables and their trace fingerprints.
//!
//! A word `x_{v1}^{n1} … x_{vL}^{nL}` is evaluated on a tuple of Hermitian
//! matrices with the convention `0⁰ = 0`, so `x^0` is the support projector
//! of the substituted matrix rather than the identity.

mod unitary;
mod wiegmann;

pub use unitary::{
    find_simultaneous_unitary, intertwiner_polish, tuple_residual, SearchStage, UnitarySearch,
    UnitarySearchConfig,
};
pub use wiegmann::{wiegmann_equivalent, WiegmannConfig, WiegmannVerdict};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{
    check_hermitian, identity, support_projector, CMat, PsdCalculus, C64, HERMITIAN_TOL,
    PSD_TOL, RANK_TOL,
};
use crate::{Error, Result};

/// One factor `x_var^exp` of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub var: usize,
    pub exp: u32,
}

/// A canonical word: non-empty, no two adjacent letters share a variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Letter>,
    num_variables: usize,
}

impl Word {
    /// Builds the canonical form, merging adjacent letters of one variable.
    pub fn new(letters: &[(usize, u32)], num_variables: usize) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidInput("empty word".into()));
        }
        let mut merged: Vec<Letter> = Vec::with_capacity(letters.len());
        for &(var, exp) in letters {
            if var >= num_variables {
                return Err(Error::InvalidInput(format!(
                    "variable x{var} out of range for {num_variables} variables"
                )));
            }
            match merged.last_mut() {
                Some(last) if last.var == var => last.exp += exp,
                _ => merged.push(Letter { var, exp }),
            }
        }
        Ok(Self {
            letters: merged,
            num_variables,
        })
    }

    pub fn parse(text: &str, num_variables: usize) -> Result<Self> {
        parse_word(text, num_variables)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Number of letters after merging.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn num_variables(&self) -> usize {
        self.num_variables
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.letters.iter().map(|l| l.exp as f64).collect()
    }

    /// Whether variable `var` occurs in the word.
    pub fn uses(&self, var: usize) -> bool {
        self.letters.iter().any(|l| l.var == var)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            if l.exp == 1 {
                write!(f, "x{}", l.var)?;
            } else {
                write!(f, "x{}^{}", l.var, l.exp)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses with the number of variables inferred from the largest index.
    fn from_str(s: &str) -> Result<Self> {
        parse_word(s, usize::MAX).and_then(|w| {
            let m = w.letters.iter().map(|l| l.var).max().unwrap_or(0) + 1;
            Word::new(
                &w.letters.iter().map(|l| (l.var, l.exp)).collect::<Vec<_>>(),
                m,
            )
        })
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `word := term (WS term)*`, `term := "x" INDEX ("^" UINT)?`.
pub fn parse_word(text: &str, num_variables: usize) -> Result<Word> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut letters = Vec::new();
    let err = |pos: usize, msg: &str| Error::Parse {
        pos,
        msg: msg.to_string(),
    };
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let number = |pos: &mut usize| -> Option<(usize, &str)> {
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        (*pos > start).then(|| (start, &text[start..*pos]))
    };
    skip_ws(&mut pos);
    if pos == bytes.len() {
        return Err(err(pos, "empty word"));
    }
    while pos < bytes.len() {
        if bytes[pos] != b'x' {
            return Err(err(pos, "expected `x`"));
        }
        pos += 1;
        let (start, digits) = number(&mut pos).ok_or_else(|| err(pos, "expected variable index"))?;
        let var: usize = digits
            .parse()
            .map_err(|_| err(start, "variable index too large"))?;
        if var >= num_variables {
            return Err(err(
                start,
                &format!("variable x{var} out of range for {num_variables} variables"),
            ));
        }
        let mut exp = 1u32;
        if pos < bytes.len() && bytes[pos] == b'^' {
            pos += 1;
            let (start, digits) = number(&mut pos).ok_or_else(|| err(pos, "expected exponent"))?;
            exp = digits
                .parse()
                .map_err(|_| err(start, "exponent too large"))?;
        }
        letters.push((var, exp));
        if pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            return Err(err(pos, "expected whitespace between terms"));
        }
        skip_ws(&mut pos);
    }
    Word::new(&letters, num_variables)
}

fn check_tuple(w: &Word, tuple: &[CMat]) -> Result<usize> {
    if tuple.len() != w.num_variables {
        return Err(Error::Dimension(format!(
            "word has {} variables but the tuple has {} matrices",
            w.num_variables,
            tuple.len()
        )));
    }
    check_tuple_dims(tuple)
}

/// Common dimension of a non-empty tuple of square matrices.
pub fn check_tuple_dims(tuple: &[CMat]) -> Result<usize> {
    let d = tuple
        .first()
        .ok_or_else(|| Error::Dimension("empty tuple".into()))?
        .nrows();
    for m in tuple {
        crate::linalg::check_dim(m, d, "tuple element")?;
    }
    Ok(d)
}

/// Integer powers `A^0 … A^max` of one matrix, `A^0` being the support projector.
#[derive(Clone, Debug)]
pub(crate) struct PowerTable {
    powers: Vec<CMat>,
}

impl PowerTable {
    pub(crate) fn new(a: &CMat, max_exp: u32) -> Self {
        let mut powers = vec![support_projector(a, RANK_TOL)];
        if max_exp >= 1 {
            powers.push(a.clone());
        }
        for _ in 2..=max_exp {
            let next = powers.last().expect("non-empty") * a;
            powers.push(next);
        }
        Self { powers }
    }

    pub(crate) fn get(&self, exp: u32) -> &CMat {
        &self.powers[exp as usize]
    }
}

fn integer_power(a: &CMat, exp: u32) -> CMat {
    if exp == 0 {
        return support_projector(a, RANK_TOL);
    }
    let mut out = a.clone();
    for _ in 1..exp {
        out = &out * a;
    }
    out
}

/// `Tr[w(A₀, …, A_m)]` with integer matrix powers.
///
/// Inputs must be Hermitian; positivity is not required for integer powers.
pub fn word_trace(w: &Word, tuple: &[CMat]) -> Result<C64> {
    let d = check_tuple(w, tuple)?;
    for a in tuple {
        check_hermitian(a, HERMITIAN_TOL)?;
    }
    let mut prod = identity(d);
    for l in &w.letters {
        prod *= integer_power(&tuple[l.var], l.exp);
    }
    Ok(prod.trace())
}

/// Spectral data for every tuple element, shared by `f_w` and its gradient.
pub struct PsdTuple {
    calc: Vec<PsdCalculus>,
}

impl PsdTuple {
    /// Fails unless every element is positive semi-definite.
    pub fn new(tuple: &[CMat]) -> Result<Self> {
        check_tuple_dims(tuple)?;
        let calc = tuple
            .iter()
            .map(|a| PsdCalculus::new(a, PSD_TOL))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { calc })
    }

    pub fn f_w(&self, w: &Word, s: &[f64]) -> Result<C64> {
        self.check(w, s)?;
        let d = self.calc[0].dim();
        let mut prod = identity(d);
        for (l, &sj) in w.letters.iter().zip(s) {
            prod *= self.calc[l.var].power(sj);
        }
        Ok(prod.trace())
    }

    /// `∂f_w/∂s_j`, replacing the `j`-th factor by `A^{s_j} ln A` on the support.
    pub fn gradient(&self, w: &Word, s: &[f64]) -> Result<Vec<C64>> {
        self.check(w, s)?;
        let d = self.calc[0].dim();
        let factors: Vec<CMat> = w
            .letters
            .iter()
            .zip(s)
            .map(|(l, &sj)| self.calc[l.var].power(sj))
            .collect();
        // prefix[j] = F_0 … F_{j−1}, suffix[j] = F_{j+1} … F_{L−1}
        let n = factors.len();
        let mut prefix = vec![identity(d)];
        for f in &factors {
            let next = prefix.last().expect("non-empty") * f;
            prefix.push(next);
        }
        let mut suffix = vec![identity(d); n + 1];
        for j in (0..n).rev() {
            suffix[j] = &factors[j] * &suffix[j + 1];
        }
        Ok((0..n)
            .map(|j| {
                let l = w.letters[j];
                let dj = self.calc[l.var].power_log(s[j]);
                (&prefix[j] * dj * &suffix[j + 1]).trace()
            })
            .collect())
    }

    fn check(&self, w: &Word, s: &[f64]) -> Result<()> {
        if self.calc.len() != w.num_variables {
            return Err(Error::Dimension(format!(
                "word has {} variables but the tuple has {} matrices",
                w.num_variables,
                self.calc.len()
            )));
        }
        if s.len() != w.len() {
            return Err(Error::Dimension(format!(
                "exponent vector has length {}, word has {} letters",
                s.len(),
                w.len()
            )));
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite exponent".into()));
        }
        Ok(())
    }
}

/// `f_w(s | A₀, …, A_m) = Tr[A_{v1}^{s1} ⋯ A_{vL}^{sL}]` for PSD inputs.
pub fn f_w(w: &Word, s: &[f64], tuple: &[CMat]) -> Result<C64> {
    check_tuple(w, tuple)?;
    PsdTuple::new(tuple)?.f_w(w, s)
}

pub fn f_w_gradient(w: &Word, s: &[f64], tuple: &[CMat]) -> Result<Vec<C64>> {
    check_tuple(w, tuple)?;
    PsdTuple::new(tuple)?.gradient(w, s)
}
