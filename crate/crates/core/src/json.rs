//! Wire formats. Field and Witt elements serialise as little-endian
//! coefficient vectors of least non-negative residues, collapsed to a bare
//! integer when `r = 1`; matrices are row-major arrays of entry encodings;
//! the precision `m` and the ring data ride along at the top level of each
//! document.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cocycle::FiniteGroupData;
use crate::cohom::LocalModule;
use crate::error::{Error, Result};
use crate::linalg::{MatK, MatW};
use crate::rings::{FieldElem, FieldSpec, QOrbit, WittElem, WittSpec};
use crate::tame::{TamePair, TamePairW, TypeFunction, TypePart};

/// One ring element: an integer when `r = 1`, a coefficient vector
/// otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffJson {
    Scalar(u64),
    Vector(Vec<u64>),
}

impl CoeffJson {
    pub fn coeffs(&self) -> Vec<u64> {
        match self {
            CoeffJson::Scalar(v) => vec![*v],
            CoeffJson::Vector(v) => v.clone(),
        }
    }

    pub fn of_field(e: &FieldElem) -> CoeffJson {
        if e.spec().r() == 1 {
            CoeffJson::Scalar(e.coeffs()[0])
        } else {
            CoeffJson::Vector(e.coeffs().to_vec())
        }
    }

    pub fn of_witt(e: &WittElem) -> CoeffJson {
        if e.spec().r() == 1 {
            CoeffJson::Scalar(e.coeffs()[0])
        } else {
            CoeffJson::Vector(e.coeffs().to_vec())
        }
    }

    pub fn to_field(&self, spec: &Arc<FieldSpec>) -> FieldElem {
        FieldElem::new(spec, self.coeffs())
    }

    pub fn to_witt(&self, spec: &Arc<WittSpec>) -> WittElem {
        WittElem::new(spec, self.coeffs())
    }
}

pub fn mat_k_json(m: &MatK) -> Vec<Vec<CoeffJson>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| CoeffJson::of_field(m.at(i, j)))
                .collect()
        })
        .collect()
}

pub fn mat_w_json(m: &MatW) -> Vec<Vec<CoeffJson>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| CoeffJson::of_witt(m.at(i, j)))
                .collect()
        })
        .collect()
}

fn mat_k_from(spec: &Arc<FieldSpec>, rows: &[Vec<CoeffJson>]) -> Result<MatK> {
    let r = rows.len();
    let c = rows.first().map(|row| row.len()).unwrap_or(0);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::BadInput("ragged matrix".into()));
    }
    let mut data = Vec::with_capacity(r * c);
    for row in rows {
        for e in row {
            data.push(e.to_field(spec));
        }
    }
    Ok(MatK::new(spec, r, c, data))
}

fn mat_w_from(spec: &Arc<WittSpec>, rows: &[Vec<CoeffJson>]) -> Result<MatW> {
    let r = rows.len();
    let c = rows.first().map(|row| row.len()).unwrap_or(0);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::BadInput("ragged matrix".into()));
    }
    let mut data = Vec::with_capacity(r * c);
    for row in rows {
        for e in row {
            data.push(e.to_witt(spec));
        }
    }
    Ok(MatW::new(spec, r, c, data))
}

/// Ring header shared by every document: `ℓ`, `r`, the modulus when
/// `r > 1`, and the precision `m` (`1` means the residue field).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RingJson {
    pub ell: u64,
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
    #[serde(default = "one")]
    pub m: u32,
}

fn one() -> u32 {
    1
}

impl RingJson {
    pub fn of_field(spec: &Arc<FieldSpec>) -> RingJson {
        RingJson {
            ell: spec.ell(),
            r: spec.r(),
            modulus: (spec.r() > 1).then(|| spec.modulus().to_vec()),
            m: 1,
        }
    }

    pub fn of_witt(spec: &Arc<WittSpec>) -> RingJson {
        RingJson {
            ell: spec.ell(),
            r: spec.r(),
            modulus: (spec.r() > 1).then(|| spec.field().modulus().to_vec()),
            m: spec.m(),
        }
    }

    pub fn field_spec(&self) -> Result<Arc<FieldSpec>> {
        FieldSpec::new(self.ell, self.r, self.modulus.clone())
    }

    pub fn witt_spec(&self) -> Result<Arc<WittSpec>> {
        WittSpec::new(&self.field_spec()?, self.m)
    }
}

/// A tame pair over `k` (`m = 1`) or over `W(k)/ℓ^m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairJson {
    #[serde(flatten)]
    pub ring: RingJson,
    pub q: u64,
    pub tau: Vec<Vec<CoeffJson>>,
    pub sigma: Vec<Vec<CoeffJson>>,
}

impl PairJson {
    pub fn of_pair_k(p: &TamePair) -> PairJson {
        PairJson {
            ring: RingJson::of_field(p.spec()),
            q: p.q(),
            tau: mat_k_json(p.tau()),
            sigma: mat_k_json(p.sigma()),
        }
    }

    pub fn of_pair_w(p: &TamePairW) -> PairJson {
        PairJson {
            ring: RingJson::of_witt(p.spec()),
            q: p.q(),
            tau: mat_w_json(p.tau()),
            sigma: mat_w_json(p.sigma()),
        }
    }

    pub fn to_pair_k(&self) -> Result<TamePair> {
        if self.ring.m != 1 {
            return Err(Error::BadInput(format!(
                "expected a residual pair (m = 1), got m = {}",
                self.ring.m
            )));
        }
        let spec = self.ring.field_spec()?;
        TamePair::new(
            self.q,
            mat_k_from(&spec, &self.tau)?,
            mat_k_from(&spec, &self.sigma)?,
        )
    }

    pub fn to_pair_w(&self) -> Result<TamePairW> {
        let spec = self.ring.witt_spec()?;
        TamePairW::new(
            self.q,
            mat_w_from(&spec, &self.tau)?,
            mat_w_from(&spec, &self.sigma)?,
        )
    }

    /// Raw matrices without the relation check, for `validate`.
    pub fn raw_matrices_k(&self) -> Result<(MatK, MatK)> {
        let spec = self.ring.field_spec()?;
        Ok((
            mat_k_from(&spec, &self.tau)?,
            mat_k_from(&spec, &self.sigma)?,
        ))
    }

    pub fn raw_matrices_w(&self) -> Result<(MatW, MatW)> {
        let spec = self.ring.witt_spec()?;
        Ok((
            mat_w_from(&spec, &self.tau)?,
            mat_w_from(&spec, &self.sigma)?,
        ))
    }
}

/// Type function: one record per orbit, the orbit listed as its full cycle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TypePartJson {
    pub orbit: Vec<CoeffJson>,
    pub exponents: Vec<u32>,
}

pub fn type_function_json(t: &TypeFunction) -> Vec<TypePartJson> {
    t.parts()
        .iter()
        .map(|p| TypePartJson {
            orbit: p.orbit.elements().iter().map(CoeffJson::of_field).collect(),
            exponents: p.exponents.clone(),
        })
        .collect()
}

pub fn type_function_from_json(
    parts: &[TypePartJson],
    spec: &Arc<FieldSpec>,
    q: u64,
) -> Result<TypeFunction> {
    let mut out = vec![];
    for p in parts {
        if p.orbit.is_empty() {
            return Err(Error::BadInput("empty orbit".into()));
        }
        let rep = p.orbit[0].to_field(spec);
        let orbit = QOrbit::of_element(&rep, q)?;
        let given: Vec<FieldElem> = p.orbit.iter().map(|c| c.to_field(spec)).collect();
        if given.len() != orbit.len() || given.iter().any(|e| !orbit.contains(e)) {
            return Err(Error::BadInput(
                "orbit entries are not one q-power cycle".into(),
            ));
        }
        out.push(TypePart {
            orbit,
            exponents: p.exponents.clone(),
        });
    }
    TypeFunction::new(out)
}

/// A local Galois module, mirroring the pair encoding, with an optional
/// provenance note.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalModuleJson {
    #[serde(flatten)]
    pub ring: RingJson,
    pub q: u64,
    pub phi: Vec<Vec<CoeffJson>>,
    pub iota: Vec<Vec<CoeffJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived_from: Option<String>,
}

impl LocalModuleJson {
    pub fn of_module(m: &LocalModule, derived_from: Option<String>) -> LocalModuleJson {
        LocalModuleJson {
            ring: RingJson::of_field(m.spec()),
            q: m.q(),
            phi: mat_k_json(m.phi()),
            iota: mat_k_json(m.iota()),
            derived_from,
        }
    }

    pub fn to_module(&self) -> Result<LocalModule> {
        let spec = self.ring.field_spec()?;
        LocalModule::new(
            self.q,
            mat_k_from(&spec, &self.phi)?,
            mat_k_from(&spec, &self.iota)?,
        )
    }
}

/// Finite group model with its module action, the number of copies, the
/// base element to lift, and the classes to separate (ψ-basis rows).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupModuleJson {
    #[serde(flatten)]
    pub ring: RingJson,
    pub mul: Vec<Vec<usize>>,
    pub action: Vec<Vec<Vec<CoeffJson>>>,
    pub copies: usize,
    pub g: usize,
    pub classes: Vec<Vec<CoeffJson>>,
}

impl GroupModuleJson {
    pub fn to_parts(&self) -> Result<(FiniteGroupData, usize, usize, Vec<Vec<FieldElem>>)> {
        let spec = self.ring.field_spec()?;
        let action: Result<Vec<MatK>> = self.action.iter().map(|m| mat_k_from(&spec, m)).collect();
        let group = FiniteGroupData::new(self.mul.clone(), action?)?;
        let classes: Vec<Vec<FieldElem>> = self
            .classes
            .iter()
            .map(|row| row.iter().map(|c| c.to_field(&spec)).collect())
            .collect();
        for row in &classes {
            if row.len() != self.copies {
                return Err(Error::BadInput("class row width must equal copies".into()));
            }
        }
        Ok((group, self.copies, self.g, classes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tame::build_ramakrishna_pair;

    #[test]
    fn pair_round_trip() {
        let k5 = FieldSpec::new(5, 1, None).unwrap();
        let p = build_ramakrishna_pair(2, 2, &k5).unwrap();
        let j = PairJson::of_pair_k(&p);
        let text = serde_json::to_string(&j).unwrap();
        let back: PairJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_pair_k().unwrap(), p);

        let (pw, _) = crate::tame::lift_tame(&p, 3).unwrap();
        let j = PairJson::of_pair_w(&pw);
        let text = serde_json::to_string(&j).unwrap();
        let back: PairJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_pair_w().unwrap(), pw);
        // scalar encoding for r = 1
        assert!(text.contains("\"tau\":[["));
        assert!(!text.contains("[[["));
    }

    #[test]
    fn pair_round_trip_extension_field() {
        let k25 = FieldSpec::generate(5, 2).unwrap();
        let one = MatK::identity(&k25, 1);
        let s = MatK::new(&k25, 1, 1, vec![FieldElem::new(&k25, vec![2, 3])]);
        let p = TamePair::new(2, one, s).unwrap();
        let j = PairJson::of_pair_k(&p);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"modulus\""));
        let back: PairJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_pair_k().unwrap(), p);
    }

    #[test]
    fn type_function_round_trip() {
        let k7 = FieldSpec::new(7, 1, None).unwrap();
        let t = MatK::from_ints(&k7, &[&[0, -1], &[1, -1]]);
        let s = crate::tame::frobenius_for_tau(&t, 2, 0).unwrap();
        let p = TamePair::new(2, t, s).unwrap();
        let (tf, _) = crate::tame::type_of(&p).unwrap();
        let j = type_function_json(&tf);
        let text = serde_json::to_string(&j).unwrap();
        let back: Vec<TypePartJson> = serde_json::from_str(&text).unwrap();
        let tf2 = type_function_from_json(&back, &k7, 2).unwrap();
        assert_eq!(tf, tf2);
    }
}
