//! JSON encodings shared by every module and the command-line front end.
//!
//! A matrix is `{"dim": n, "data": [[re, im], ...]}` with `n²` entries in
//! row-major order. Kraus operators of a channel between different
//! dimensions use `{"rows": r, "cols": c, "data": ...}` instead. Every reader
//! rejects unknown keys, wrong entry counts and non-finite numbers.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalysis::CatalysisScenario;
use crate::channel::{Channel, DilationSpec, Symmetry};
use crate::linalg::{c, CMat};
use crate::refframe::{Dynamics, FrameConfig, FrameScenario};
use crate::repr::{FiniteGroup, FiniteGroupRep, LieSymmetry};
use crate::words::UnitarySearchConfig;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let (r, k) = m.shape();
        let (dim, rows, cols) = if r == k { (Some(r), None, None) } else { (None, Some(r), Some(k)) };
        let mut data = Vec::with_capacity(r * k);
        for i in 0..r {
            for j in 0..k {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        Self { dim, rows, cols, data }
    }

    fn shape(&self) -> Result<(usize, usize)> {
        match (self.dim, self.rows, self.cols) {
            (Some(n), None, None) => Ok((n, n)),
            (None, Some(r), Some(k)) => Ok((r, k)),
            _ => Err(Error::InvalidInput(
                "matrix needs either `dim` or both `rows` and `cols`".into(),
            )),
        }
    }

    /// Reads a matrix of any shape.
    pub fn to_rect(&self) -> Result<CMat> {
        let (r, k) = self.shape()?;
        if self.data.len() != r * k {
            return Err(Error::InvalidInput(format!(
                "{r}×{k} matrix needs {} entries, found {}",
                r * k,
                self.data.len()
            )));
        }
        if let Some(p) = self.data.iter().position(|z| !z[0].is_finite() || !z[1].is_finite()) {
            return Err(Error::InvalidInput(format!("entry {p} is not finite")));
        }
        Ok(CMat::from_row_iterator(r, k, self.data.iter().map(|z| c(z[0], z[1]))))
    }

    /// Reads a square matrix; `rows`/`cols` payloads are rejected.
    pub fn to_matrix(&self) -> Result<CMat> {
        if self.dim.is_none() {
            return Err(Error::InvalidInput("expected a square matrix with `dim`".into()));
        }
        self.to_rect()
    }
}

pub fn ser_matrix<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from_matrix(m).serialize(s)
}

pub fn de_matrix<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
    MatrixJson::deserialize(d)?.to_matrix().map_err(serde::de::Error::custom)
}

pub fn ser_matrices<S: Serializer>(ms: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(ms.iter().map(MatrixJson::from_matrix))
}

pub fn de_matrices<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMat>, D::Error> {
    Vec::<MatrixJson>::deserialize(d)?
        .iter()
        .map(|m| m.to_matrix().map_err(serde::de::Error::custom))
        .collect()
}

pub fn ser_opt_matrix<S: Serializer>(m: &Option<CMat>, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.as_ref().map(MatrixJson::from_matrix).serialize(s)
}

pub fn de_opt_matrix<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<CMat>, D::Error> {
    Option::<MatrixJson>::deserialize(d)?
        .map(|m| m.to_matrix().map_err(serde::de::Error::custom))
        .transpose()
}

pub fn matrix_from_str(text: &str) -> Result<CMat> {
    from_str::<MatrixJson>(text)?.to_matrix()
}

pub fn matrix_to_string(m: &CMat) -> String {
    to_string(&MatrixJson::from_matrix(m))
}

/// Strict JSON parsing with the crate error type.
pub fn from_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupJson {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl GroupJson {
    pub fn from_group(g: &FiniteGroup) -> Self {
        Self {
            order: g.order(),
            table: g.table().to_vec(),
            labels: Some(g.labels().to_vec()),
        }
    }

    pub fn to_group(&self) -> Result<FiniteGroup> {
        if self.table.len() != self.order {
            return Err(Error::InvalidGroup(format!(
                "order {} but the table has {} rows",
                self.order,
                self.table.len()
            )));
        }
        FiniteGroup::new(self.table.clone(), self.labels.clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationJson {
    pub group: GroupJson,
    #[serde(serialize_with = "ser_matrices", deserialize_with = "de_matrices")]
    pub images: Vec<CMat>,
}

impl RepresentationJson {
    pub fn from_rep(rep: &FiniteGroupRep) -> Self {
        Self {
            group: GroupJson::from_group(rep.group()),
            images: rep.images().to_vec(),
        }
    }

    pub fn to_rep(&self) -> Result<FiniteGroupRep> {
        FiniteGroupRep::new(self.group.to_group()?, self.images.clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemJson {
    pub dim: usize,
    #[serde(serialize_with = "ser_matrices", deserialize_with = "de_matrices")]
    pub generators: Vec<CMat>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieSymmetryJson {
    pub systems: BTreeMap<String, SystemJson>,
}

impl LieSymmetryJson {
    pub fn from_symmetry(sym: &LieSymmetry) -> Self {
        let systems = sym
            .systems()
            .map(|(k, s)| {
                let sys = SystemJson {
                    dim: s.dim,
                    generators: s.generators.clone(),
                };
                (k.clone(), sys)
            })
            .collect();
        Self { systems }
    }

    pub fn to_symmetry(&self) -> Result<LieSymmetry> {
        let m = self.systems.values().next().map_or(0, |s| s.generators.len());
        let mut sym = LieSymmetry::new(m);
        for (label, s) in &self.systems {
            sym.add_system(label, s.dim, s.generators.clone())?;
        }
        Ok(sym)
    }
}

/// Either a Lie symmetry given by generators or a finite-group representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum SymmetryJson {
    Generators(#[serde(serialize_with = "ser_matrices", deserialize_with = "de_matrices")] Vec<CMat>),
    Group(RepresentationJson),
}

impl SymmetryJson {
    pub fn from_symmetry(sym: &Symmetry) -> Self {
        match sym {
            Symmetry::Generators(g) => SymmetryJson::Generators(g.clone()),
            Symmetry::Group(r) => SymmetryJson::Group(RepresentationJson::from_rep(r)),
        }
    }

    pub fn to_symmetry(&self) -> Result<Symmetry> {
        Ok(match self {
            SymmetryJson::Generators(g) => Symmetry::Generators(g.clone()),
            SymmetryJson::Group(r) => Symmetry::Group(r.to_rep()?),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelJson {
    pub fn from_channel(t: &Channel) -> Self {
        Self {
            d_in: t.d_in(),
            d_out: t.d_out(),
            kraus: t.kraus().iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_channel(&self) -> Result<Channel> {
        let kraus = self.kraus.iter().map(MatrixJson::to_rect).collect::<Result<Vec<_>>>()?;
        Channel::new(self.d_in, self.d_out, kraus)
    }
}

pub fn ser_channel<S: Serializer>(t: &Channel, s: S) -> std::result::Result<S::Ok, S::Error> {
    ChannelJson::from_channel(t).serialize(s)
}

pub fn de_channel<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Channel, D::Error> {
    ChannelJson::deserialize(d)?.to_channel().map_err(serde::de::Error::custom)
}

/// Exact-catalysis scenario: generators for `S`, `S'` and `C` plus the
/// unitary and the states.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalysisScenarioJson {
    pub symmetry: LieSymmetryJson,
    #[serde(serialize_with = "ser_matrix", deserialize_with = "de_matrix")]
    pub u: CMat,
    #[serde(serialize_with = "ser_matrix", deserialize_with = "de_matrix")]
    pub rho_s: CMat,
    #[serde(serialize_with = "ser_matrix", deserialize_with = "de_matrix")]
    pub rho_s_prime: CMat,
    #[serde(serialize_with = "ser_matrix", deserialize_with = "de_matrix")]
    pub sigma_c: CMat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<UnitarySearchConfig>,
}

impl CatalysisScenarioJson {
    pub fn from_scenario(sc: &CatalysisScenario) -> Self {
        Self {
            symmetry: LieSymmetryJson::from_symmetry(&sc.symmetry),
            u: sc.u.clone(),
            rho_s: sc.rho_s.clone(),
            rho_s_prime: sc.rho_s_prime.clone(),
            sigma_c: sc.sigma_c.clone(),
            search: None,
        }
    }

    pub fn to_scenario(&self) -> Result<CatalysisScenario> {
        CatalysisScenario::new(
            self.symmetry.to_symmetry()?,
            self.u.clone(),
            self.rho_s.clone(),
            self.rho_s_prime.clone(),
            self.sigma_c.clone(),
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum DynamicsJson {
    Unitary(#[serde(serialize_with = "ser_matrix", deserialize_with = "de_matrix")] CMat),
    /// Unitary on `S ⊗ C ⊗ E` with environment state `ω_E`.
    Dilated {
        #[serde(serialize_with = "ser_matrix", deserialize_with = "de_matrix")]
        u: CMat,
        #[serde(serialize_with = "ser_matrix", deserialize_with = "de_matrix")]
        omega_e: CMat,
        symmetry_e: SymmetryJson,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameScenarioJson {
    pub dynamics: DynamicsJson,
    #[serde(serialize_with = "ser_matrix", deserialize_with = "de_matrix")]
    pub sigma_c: CMat,
    #[serde(serialize_with = "ser_matrix", deserialize_with = "de_matrix")]
    pub target: CMat,
    pub symmetry_s: SymmetryJson,
    pub symmetry_c: SymmetryJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<FrameConfig>,
}

impl FrameScenarioJson {
    pub fn to_scenario(&self) -> Result<FrameScenario> {
        let sym_s = self.symmetry_s.to_symmetry()?;
        let sym_c = self.symmetry_c.to_symmetry()?;
        let d_sc = self.target.nrows() * self.sigma_c.nrows();
        let dynamics = match &self.dynamics {
            DynamicsJson::Unitary(u) => Dynamics::Unitary(u.clone()),
            DynamicsJson::Dilated { u, omega_e, symmetry_e } => Dynamics::Dilated {
                dilation: DilationSpec::new(d_sc, omega_e.clone(), u.clone())?,
                sym_e: symmetry_e.to_symmetry()?,
            },
        };
        FrameScenario::new(dynamics, self.sigma_c.clone(), self.target.clone(), sym_s, sym_c)
    }
}
