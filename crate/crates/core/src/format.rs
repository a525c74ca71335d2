//! JSON instance files.
//!
//! ```json
//! {
//!   "model": { "k0": 1, "l0": 1, "m": 1, "lambda": ["1"] },
//!   "bivector": { "g": [ { "i": 1, "j": 1, "value": "1" } ] },
//!   "metadata": { "name": "example" }
//! }
//! ```
//!
//! `lambda` is row-major. Rationals are strings `"p"` or `"p/q"`. All
//! indices are 1-based. The optional `cocycle` lists coefficients
//! `{ "x", "i", "j", "value" }` of `ξ(e_x)` on `e_i ∧ e_j` (`i < j`) over the
//! model basis `s, z, d`; it describes a cocycle that need not be a
//! coboundary, and excludes `bivector`. Unknown keys are rejected.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bialgebra::{Block, StructuredBivector};
use crate::cocycle::Cocycle;
use crate::exterior::Multivector;
use crate::flat::FlatModel;
use crate::linalg::Matrix;
use crate::scalar::{self, Scalar};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Field {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub model: ModelDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bivector: Option<BivectorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cocycle: Option<Vec<CocycleEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub k0: usize,
    pub l0: usize,
    pub m: usize,
    pub lambda: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleEntry {
    pub x: usize,
    pub i: usize,
    pub j: usize,
    pub value: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BivectorDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub a: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub c: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub e: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub f: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub g: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p: Vec<Entry>,
}

impl BivectorDoc {
    fn block(&self, b: Block) -> &[Entry] {
        match b {
            Block::A => &self.a,
            Block::B => &self.b,
            Block::C => &self.c,
            Block::E => &self.e,
            Block::F => &self.f,
            Block::G => &self.g,
            Block::H => &self.h,
            Block::M => &self.m,
            Block::N => &self.n,
            Block::P => &self.p,
        }
    }

    fn block_mut(&mut self, b: Block) -> &mut Vec<Entry> {
        match b {
            Block::A => &mut self.a,
            Block::B => &mut self.b,
            Block::C => &mut self.c,
            Block::E => &mut self.e,
            Block::F => &mut self.f,
            Block::G => &mut self.g,
            Block::H => &mut self.h,
            Block::M => &mut self.m,
            Block::N => &mut self.n,
            Block::P => &mut self.p,
        }
    }
}

/// A decoded instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub model: FlatModel,
    pub bivector: Option<StructuredBivector>,
    /// `ξ(e_x)` for every basis vector of the model, when the file gives a cocycle.
    pub cocycle: Option<Vec<Multivector>>,
    pub metadata: Option<serde_json::Value>,
}

impl Instance {
    pub fn new(model: FlatModel) -> Self {
        Self {
            model,
            bivector: None,
            cocycle: None,
            metadata: None,
        }
    }

    /// The bivector, or zero when the file has none.
    pub fn bivector_or_zero(&self) -> StructuredBivector {
        self.bivector
            .clone()
            .unwrap_or_else(|| StructuredBivector::for_model(&self.model))
    }

    pub fn to_file(&self) -> InstanceFile {
        let model = ModelDoc {
            k0: self.model.k0(),
            l0: self.model.l0(),
            m: self.model.m(),
            lambda: (0..self.model.k0())
                .flat_map(|i| (0..self.model.m()).map(move |j| (i, j)))
                .map(|(i, j)| scalar::format(self.model.lam(i, j)))
                .collect(),
        };
        let bivector = self.bivector.as_ref().map(|r| {
            let mut doc = BivectorDoc::default();
            for (b, i, j, v) in r.entries() {
                doc.block_mut(b).push(Entry {
                    i: external(i),
                    j: external(j),
                    value: scalar::format(v),
                });
            }
            doc
        });
        let cocycle = self.cocycle.as_ref().map(|images| {
            let mut out = Vec::new();
            for (x, img) in images.iter().enumerate() {
                for (b, c) in img.terms() {
                    let idx = b.indices();
                    out.push(CocycleEntry {
                        x: external(x),
                        i: external(idx[0]),
                        j: external(idx[1]),
                        value: scalar::format(c),
                    });
                }
            }
            out
        });
        InstanceFile {
            model,
            bivector,
            cocycle,
            metadata: self.metadata.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable") + "\n"
    }

    /// Attaches the stored cocycle images to `model.expand()`.
    pub fn cocycle_on(&self, algebra: std::sync::Arc<crate::lie::LieAlgebra>) -> Option<Cocycle> {
        self.cocycle
            .as_ref()
            .map(|imgs| Cocycle::from_images(algebra, imgs).expect("validated on parse"))
    }
}

/// File index (1-based) to internal index (0-based), checked against `limit`.
fn internal(one_based: usize, limit: usize, field: &str) -> Result<usize, FormatError> {
    if one_based == 0 || one_based > limit {
        return Err(field_err(field, format!("index {one_based} outside 1..={limit}")));
    }
    Ok(one_based - 1)
}

fn external(zero_based: usize) -> usize {
    zero_based + 1
}

fn parse_value(s: &str, field: &str) -> Result<Scalar, FormatError> {
    scalar::parse(s).map_err(|e| field_err(field, format!("{e}: {s:?}")))
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| FormatError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    decode(&file)
}

pub fn read_instance(path: &Path) -> Result<Instance, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance(&text)
}

pub fn decode(file: &InstanceFile) -> Result<Instance, FormatError> {
    let ModelDoc { k0, l0, m, lambda } = &file.model;
    let (k0, l0, m) = (*k0, *l0, *m);
    if lambda.len() != k0 * m {
        return Err(field_err(
            "model.lambda",
            format!("expected {} entries (k0·m), found {}", k0 * m, lambda.len()),
        ));
    }
    let values = lambda
        .iter()
        .enumerate()
        .map(|(p, s)| parse_value(s, &format!("model.lambda[{p}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let matrix = Matrix::from_fn(k0, m, |i, j| values[i * m + j].clone());
    let model = FlatModel::new(k0, l0, m, matrix).map_err(|e| field_err("model.lambda", e.to_string()))?;
    if model.dim() > crate::exterior::MAX_DIM {
        return Err(field_err("model", format!("dimension {} too large", model.dim())));
    }

    let bivector = match &file.bivector {
        None => None,
        Some(doc) => {
            let mut r = StructuredBivector::for_model(&model);
            for b in Block::ALL {
                let (rows, cols) = b.shape(k0, l0, m);
                let mut seen = BTreeSet::new();
                for (p, e) in doc.block(b).iter().enumerate() {
                    let f = format!("bivector.{b}[{p}]");
                    let i = internal(e.i, rows, &format!("{f}.i"))?;
                    let j = internal(e.j, cols, &format!("{f}.j"))?;
                    if b.is_strict() && i >= j {
                        return Err(field_err(f, "this block needs i < j"));
                    }
                    if !seen.insert((i, j)) {
                        return Err(field_err(f, format!("duplicate entry ({}, {})", e.i, e.j)));
                    }
                    r.set(b, i, j, parse_value(&e.value, &format!("{f}.value"))?)
                        .expect("checked");
                }
            }
            Some(r)
        }
    };

    let cocycle = match &file.cocycle {
        None => None,
        Some(entries) => {
            if bivector.is_some() {
                return Err(field_err("cocycle", "cannot be combined with `bivector`"));
            }
            let n = model.dim();
            let mut images = vec![Multivector::zero(n, 2); n];
            let mut seen = BTreeSet::new();
            for (p, e) in entries.iter().enumerate() {
                let f = format!("cocycle[{p}]");
                let x = internal(e.x, n, &format!("{f}.x"))?;
                let i = internal(e.i, n, &format!("{f}.i"))?;
                let j = internal(e.j, n, &format!("{f}.j"))?;
                if i >= j {
                    return Err(field_err(f, "needs i < j"));
                }
                if !seen.insert((x, i, j)) {
                    return Err(field_err(f, "duplicate entry"));
                }
                let v = parse_value(&e.value, &format!("{f}.value"))?;
                images[x] += &Multivector::monomial(n, &[i, j], v).expect("in range");
            }
            Some(images)
        }
    };

    Ok(Instance {
        model,
        bivector,
        cocycle,
        metadata: file.metadata.clone(),
    })
}
