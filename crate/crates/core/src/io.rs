//! JSON forms of tables, certificates, coordinates and CompRep instances.
//!
//! Matrices are lists of rows of field element codes. Module elements inside
//! submodule bases are embedded residues mod `N` (factor `j` scaled by `N/d_j`).

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::comprep::ClonoidCoords;
use crate::error::{Error, Result};
use crate::funcspace::{FuncTable, ModuleSpec};
use crate::linalg::{Mat, Subspace};
use crate::scalars::{field_make, Field, Submodule};
use crate::theta::ThetaCertificate;
use crate::unifgen::{Certificate, MinorOperator, Provenance, Scope};

fn schema(e: impl std::fmt::Display) -> Error {
    Error::Schema(e.to_string())
}

pub fn from_str<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(schema)
}

pub fn to_string<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FieldJson {
    pub p: u64,
    pub e: u32,
}

pub fn matrix_json(m: &Mat) -> Vec<Vec<u8>> {
    m.to_rows()
}

pub fn matrix_from_json(field: &Field, rows: &[Vec<u8>], shape: (usize, usize)) -> Result<Mat> {
    Mat::from_rows_shaped(field, rows, shape.0, shape.1)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FuncTableJson {
    pub field: FieldJson,
    pub k: usize,
    pub m: usize,
    pub module: Vec<u64>,
    /// One entry per point in code order: a number when `B` is cyclic, else a list.
    pub values: Vec<Value>,
}

pub fn table_to_json(f: &FuncTable) -> FuncTableJson {
    let r = f.module.r();
    let values = (0..f.len())
        .map(|c| {
            let b = f.get(c);
            if r == 1 {
                Value::from(b[0])
            } else {
                Value::from(b.to_vec())
            }
        })
        .collect();
    FuncTableJson {
        field: FieldJson {
            p: f.field.p,
            e: f.field.e,
        },
        k: f.k,
        m: f.m,
        module: f.module.factors.clone(),
        values,
    }
}

pub fn table_from_json(j: &FuncTableJson) -> Result<FuncTable> {
    let field = field_make(j.field.p, j.field.e)?;
    let module = ModuleSpec::new(&j.module)?;
    let mut t = FuncTable::zero(&field, j.k, j.m, &module)?;
    if j.values.len() != t.len() {
        return Err(Error::Schema(format!(
            "{} values for {} points",
            j.values.len(),
            t.len()
        )));
    }
    for (c, v) in j.values.iter().enumerate() {
        let b: Vec<u64> = match v {
            Value::Number(_) => vec![v.as_u64().ok_or_else(|| schema("negative or fractional value"))?],
            Value::Array(a) => a
                .iter()
                .map(|x| x.as_u64().ok_or_else(|| schema("negative or fractional value")))
                .collect::<Result<_>>()?,
            _ => return Err(schema("value must be a number or a list")),
        };
        if b.len() != module.r() {
            return Err(Error::Schema(format!("value with {} components", b.len())));
        }
        if b.iter().zip(&module.factors).any(|(&x, &d)| x >= d) {
            return Err(Error::Schema(format!("value {b:?} outside {:?}", module.factors)));
        }
        t.set(c, &b);
    }
    Ok(t)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub matrix: Vec<Vec<u8>>,
    pub coeff: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateJson {
    pub q: usize,
    pub p: u64,
    pub e: u32,
    pub k: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub arity: usize,
    pub rank_bound: usize,
    pub scope: String,
    /// Rank parameter of `rank<=i` and `J_n` scopes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    /// RREF basis rows of `H` for the `J_H` scope.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<Vec<Vec<u8>>>,
    pub provenance: String,
    pub terms: Vec<TermJson>,
}

pub fn certificate_to_json(c: &Certificate) -> CertificateJson {
    let op = &c.op;
    let (i, subspace) = match &c.scope {
        Scope::RankAtMost(i) | Scope::RankLocus(i) => (Some(*i), None),
        Scope::Fiber(h) => (None, Some(h.basis.to_rows())),
        _ => (None, None),
    };
    CertificateJson {
        q: op.field.q,
        p: op.field.p,
        e: op.field.e,
        k: c.k,
        n: op.modulus,
        arity: op.arity,
        rank_bound: op.rank_bound,
        scope: c.scope.tag().to_string(),
        i,
        subspace,
        provenance: c.provenance.tag().to_string(),
        terms: op
            .matrices()
            .into_iter()
            .map(|(m, a)| TermJson {
                matrix: matrix_json(&m),
                coeff: a,
            })
            .collect(),
    }
}

/// Parses without verifying; call `Certificate::verify` on the result.
pub fn certificate_from_json(j: &CertificateJson) -> Result<Certificate> {
    let field = field_make(j.p, j.e)?;
    if field.q != j.q {
        return Err(Error::Schema(format!("q = {} but p^e = {}", j.q, field.q)));
    }
    if j.n < 2 {
        return Err(Error::Schema(format!("modulus {} < 2", j.n)));
    }
    if j.subspace.as_ref().is_some_and(|r| r.iter().any(|v| v.len() != j.arity)) {
        return Err(schema("subspace rows must have arity length"));
    }
    let scope = match (j.scope.as_str(), j.i, &j.subspace) {
        ("full-level", _, _) => Scope::FullLevel,
        ("delta", _, _) => Scope::Delta,
        ("rank<=i", Some(i), _) => Scope::RankAtMost(i),
        ("J_n", Some(i), _) => Scope::RankLocus(i),
        ("J_H", _, Some(rows)) => Scope::Fiber(Subspace::span(&field, j.arity, rows)),
        (s, _, _) => return Err(Error::Schema(format!("scope {s:?} with missing or unknown parameters"))),
    };
    let provenance = match j.provenance.as_str() {
        "constructive" => Provenance::Constructive,
        "solver" => Provenance::Solver,
        s => return Err(Error::Schema(format!("provenance {s:?}"))),
    };
    let terms = j
        .terms
        .iter()
        .map(|t| Ok((matrix_from_json(&field, &t.matrix, (j.arity, j.arity))?, t.coeff)))
        .collect::<Result<Vec<_>>>()?;
    if terms.iter().any(|t| t.1 >= j.n) {
        return Err(schema("coefficient not reduced mod N"));
    }
    let op = MinorOperator::from_matrices(&field, j.arity, j.n, j.rank_bound, &terms)?;
    Ok(Certificate {
        op,
        k: j.k,
        scope,
        provenance,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThetaCertificateJson {
    pub q: usize,
    pub p: u64,
    pub e: u32,
    pub k: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub alpha: Vec<u64>,
    pub theta_counts: Vec<usize>,
    pub terms: Vec<TermJson>,
}

pub fn theta_certificate_to_json(c: &ThetaCertificate) -> ThetaCertificateJson {
    ThetaCertificateJson {
        q: c.field.q,
        p: c.field.p,
        e: c.field.e,
        k: c.k,
        n: c.n,
        alpha: c.alpha.clone(),
        theta_counts: c.theta_counts(),
        terms: c
            .terms
            .iter()
            .map(|(m, a)| TermJson {
                matrix: matrix_json(m),
                coeff: *a,
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelJson {
    pub i: usize,
    pub basis: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoordsJson {
    pub q: usize,
    pub p: u64,
    pub e: u32,
    pub k: usize,
    pub module: Vec<u64>,
    pub levels: Vec<LevelJson>,
}

pub fn coords_to_json(c: &ClonoidCoords) -> CoordsJson {
    CoordsJson {
        q: c.field.q,
        p: c.field.p,
        e: c.field.e,
        k: c.k,
        module: c.module.factors.clone(),
        levels: c
            .levels
            .iter()
            .enumerate()
            .map(|(i, s)| LevelJson {
                i,
                basis: s.rows.clone(),
            })
            .collect(),
    }
}

/// Parses and validates (shapes and `GL_i`-invariance).
pub fn coords_from_json(j: &CoordsJson) -> Result<ClonoidCoords> {
    let field = field_make(j.p, j.e)?;
    if field.q != j.q {
        return Err(Error::Schema(format!("q = {} but p^e = {}", j.q, field.q)));
    }
    let module = ModuleSpec::new(&j.module)?;
    let mut coords = ClonoidCoords::zero(&field, j.k, &module)?;
    let mut seen = vec![false; j.k + 1];
    for l in &j.levels {
        if l.i > j.k || seen[l.i] {
            return Err(Error::InvalidCoords(format!("level index {} repeated or above k", l.i)));
        }
        seen[l.i] = true;
        let dim = coords.levels[l.i].dim;
        if l.basis.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidCoords(format!("level {} rows must have length {dim}", l.i)));
        }
        coords.levels[l.i] = Submodule::from_generators(module.n, dim, l.basis.clone());
    }
    coords.validate()?;
    Ok(coords)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComprepInstanceJson {
    pub inputs: Vec<Vec<Vec<u8>>>,
}

pub fn inputs_from_json(field: &Field, k: usize, j: &ComprepInstanceJson) -> Result<Vec<Mat>> {
    j.inputs
        .iter()
        .map(|rows| {
            let m = rows.len();
            matrix_from_json(field, rows, (m, k))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct BasisJson {
    pub basis: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorsJson {
    pub generators: Vec<FuncTableJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MemberJson {
    pub generators: Vec<FuncTableJson>,
    pub candidate: FuncTableJson,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unifgen::build_level_certificate;

    #[test]
    fn table_round_trip() {
        let f = field_make(2, 1).unwrap();
        let b = ModuleSpec::new(&[2, 3]).unwrap();
        let t = FuncTable::from_fn(&f, 1, 2, &b, |c| vec![c as u64 % 2, c as u64 % 3]).unwrap();
        let s = to_string(&table_to_json(&t));
        let back = table_from_json(&from_str(&s).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn scalar_values_accepted() {
        let s = r#"{"field":{"p":2,"e":1},"k":1,"m":1,"module":[3],"values":[0,2]}"#;
        let t = table_from_json(&from_str(s).unwrap()).unwrap();
        assert_eq!(t.get(1), &[2]);
        let bad = r#"{"field":{"p":2,"e":1},"k":1,"m":1,"module":[3],"values":[0,3]}"#;
        assert!(table_from_json(&from_str(bad).unwrap()).is_err());
    }

    #[test]
    fn certificate_round_trip() {
        let f = field_make(2, 1).unwrap();
        let c = build_level_certificate(&f, 1, 3).unwrap();
        let s = to_string(&certificate_to_json(&c));
        let back = certificate_from_json(&from_str(&s).unwrap()).unwrap();
        assert_eq!(back, *c);
        back.verify().unwrap();
    }

    #[test]
    fn unknown_scope_rejected() {
        let s = r#"{"q":2,"p":2,"e":1,"k":1,"N":3,"arity":2,"rank_bound":1,"scope":"rank<=i","provenance":"solver","terms":[]}"#;
        assert!(matches!(certificate_from_json(&from_str(s).unwrap()), Err(Error::Schema(_))));
    }
}
