//! JSON file formats. Vertices are written with their original labels
//! (signed integers, tree words, loop positions) rather than internal indices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::boundary::{BoundaryModel, BoundarySymbol, Edge, InferenceMode, Provenance, SymbolSource};
use crate::error::{Error, Result};
use crate::gallery::{GalleryEntry, GalleryOracles, GalleryParams};
use crate::metric::VertexMetric;
use crate::potential::{Formula, Potential, PotentialKind};
use crate::pressure::NodeSymbol;
use crate::shift::{ExplicitGraph, Generator, Label, LoopCounts, ShiftSpec, VertexId};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<LoopCounts>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecFile {
    Generator {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<GeneratorParams>,
    },
    Explicit {
        n: u64,
        /// Edges between labels; labels default to 1..=n.
        edges: Vec<[Label; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<Label>>,
    },
}

impl SpecFile {
    pub fn to_spec(&self) -> Result<ShiftSpec> {
        match self {
            SpecFile::Generator { name, params } => {
                let counts = params.as_ref().and_then(|p| p.counts.clone());
                if counts.is_some() && name != "loop_system" {
                    return Err(Error::Malformed(format!("field `params.counts` is only valid for loop_system, not `{name}`")));
                }
                let g = match name.as_str() {
                    "renewal" => Generator::Renewal,
                    "backwards_renewal" => Generator::BackwardsRenewal,
                    "random_walk" | "random_walk_1side" => Generator::RandomWalk,
                    "double_renewal" => Generator::DoubleRenewal,
                    "dyadic_tree" => Generator::DyadicTree,
                    "loop_system" => Generator::LoopSystem {
                        counts: counts.unwrap_or(LoopCounts::Linear),
                    },
                    "birth_death" => Generator::BirthDeath,
                    other => return Err(Error::Malformed(format!("field `name`: unknown generator `{other}`"))),
                };
                Ok(ShiftSpec::Generator(g))
            }
            SpecFile::Explicit { n, edges, labels } => {
                let labels = labels.clone().unwrap_or_else(|| (1..=*n as i64).map(Label::Int).collect());
                if labels.len() as u64 != *n {
                    return Err(Error::Malformed(format!("field `labels`: {} labels for n = {n}", labels.len())));
                }
                let index = |l: &Label| {
                    labels
                        .iter()
                        .position(|x| x == l)
                        .map(|p| p as u64 + 1)
                        .ok_or_else(|| Error::Malformed(format!("field `edges`: unknown label `{l}`")))
                };
                let e = edges
                    .iter()
                    .map(|[a, b]| Ok((index(a)?, index(b)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ShiftSpec::Explicit(ExplicitGraph::with_labels(*n, &e, labels)?))
            }
        }
    }

    pub fn from_spec(spec: &ShiftSpec) -> Self {
        match spec {
            ShiftSpec::Generator(g) => SpecFile::Generator {
                name: g.name().to_string(),
                params: match g {
                    Generator::LoopSystem { counts } => Some(GeneratorParams {
                        counts: Some(counts.clone()),
                    }),
                    _ => None,
                },
            },
            ShiftSpec::Explicit(g) => {
                let l = g.labels();
                SpecFile::Explicit {
                    n: g.n(),
                    edges: g
                        .edges()
                        .into_iter()
                        .map(|(a, b)| [l[a as usize - 1].clone(), l[b as usize - 1].clone()])
                        .collect(),
                    labels: Some(l.to_vec()),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricFile {
    #[serde(flatten)]
    pub metric: VertexMetric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FormulaFile {
    Reciprocal,
    Sign,
    Indicator { vertex: Label },
    Constant { value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineTerm {
    pub coef: f64,
    pub potential: PotentialFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialFile {
    /// Keys are comma-separated label words of length `depth`.
    LocallyConstant {
        depth: usize,
        table: BTreeMap<String, f64>,
        #[serde(default)]
        default: f64,
    },
    VertexFormula {
        #[serde(flatten)]
        formula: FormulaFile,
        #[serde(default)]
        boundary_limits: BTreeMap<String, f64>,
    },
    Affine {
        terms: Vec<AffineTerm>,
        #[serde(default)]
        constant: f64,
    },
}

/// Splits a table key on commas outside brackets, so loop labels like
/// `b[3,1,2]` stay whole.
fn split_key(key: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in key.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(key[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(key[start..].trim());
    parts
}

impl PotentialFile {
    pub fn to_potential(&self, spec: &ShiftSpec) -> Result<Potential> {
        match self {
            PotentialFile::LocallyConstant { depth, table, default } => {
                let mut t = BTreeMap::new();
                for (k, &v) in table {
                    let word = split_key(k)
                        .into_iter()
                        .map(|l| spec.vertex_of(&Label::parse(l)))
                        .collect::<Result<Vec<VertexId>>>()
                        .map_err(|e| Error::Malformed(format!("field `table` key `{k}`: {e}")))?;
                    if word.len() != *depth {
                        return Err(Error::Malformed(format!("field `table` key `{k}` does not have depth {depth}")));
                    }
                    t.insert(word, v);
                }
                Potential::locally_constant(*depth, t, *default)
            }
            PotentialFile::VertexFormula { formula, boundary_limits } => {
                let f = match formula {
                    FormulaFile::Reciprocal => Formula::Reciprocal,
                    FormulaFile::Sign => Formula::Sign,
                    FormulaFile::Indicator { vertex } => Formula::Indicator {
                        vertex: spec
                            .vertex_of(vertex)
                            .map_err(|e| Error::Malformed(format!("field `formula.vertex`: {e}")))?,
                    },
                    FormulaFile::Constant { value } => Formula::Constant { value: *value },
                };
                Ok(Potential::formula(f, boundary_limits.clone()))
            }
            PotentialFile::Affine { terms, constant } => {
                let t = terms
                    .iter()
                    .map(|t| Ok((t.coef, t.potential.to_potential(spec)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Potential::affine(t, *constant))
            }
        }
    }

    pub fn from_potential(p: &Potential, spec: &ShiftSpec) -> Self {
        match p.kind() {
            PotentialKind::LocallyConstant { depth, table, default } => PotentialFile::LocallyConstant {
                depth: *depth,
                table: table
                    .iter()
                    .map(|(w, &v)| {
                        let key: Vec<String> = w.iter().map(|&x| spec.label(x).to_string()).collect();
                        (key.join(","), v)
                    })
                    .collect(),
                default: *default,
            },
            PotentialKind::VertexFormula { formula, boundary_limits } => PotentialFile::VertexFormula {
                formula: match formula {
                    Formula::Reciprocal => FormulaFile::Reciprocal,
                    Formula::Sign => FormulaFile::Sign,
                    Formula::Indicator { vertex } => FormulaFile::Indicator {
                        vertex: spec.label(*vertex),
                    },
                    Formula::Constant { value } => FormulaFile::Constant { value: *value },
                },
                boundary_limits: boundary_limits.clone(),
            },
            PotentialKind::Affine { terms, constant } => PotentialFile::Affine {
                terms: terms
                    .iter()
                    .map(|(c, p)| AffineTerm {
                        coef: *c,
                        potential: PotentialFile::from_potential(p, spec),
                    })
                    .collect(),
                constant: *constant,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolFile {
    pub id: String,
    pub source: SymbolSource,
    pub anchor: Label,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeFile {
    pub from: String,
    pub to: String,
    pub provenance: Provenance,
}

/// Boundary model with vertices written as labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFile {
    pub mode: InferenceMode,
    pub symbols: Vec<SymbolFile>,
    pub to_boundary: Vec<EdgeFile>,
    pub from_boundary: Vec<EdgeFile>,
    pub within_boundary: Vec<EdgeFile>,
}

impl BoundaryFile {
    pub fn from_model(m: &BoundaryModel, spec: &ShiftSpec) -> Self {
        let l = |v: VertexId| spec.label(v).to_string();
        let e = |from: String, to: String, provenance: Provenance| EdgeFile { from, to, provenance };
        BoundaryFile {
            mode: m.mode,
            symbols: m
                .symbols
                .iter()
                .map(|s| SymbolFile {
                    id: s.id.clone(),
                    source: s.source.clone(),
                    anchor: spec.label(s.anchor),
                })
                .collect(),
            to_boundary: m.to_boundary.iter().map(|x| e(l(x.from), x.to.clone(), x.provenance)).collect(),
            from_boundary: m.from_boundary.iter().map(|x| e(x.from.clone(), l(x.to), x.provenance)).collect(),
            within_boundary: m
                .within_boundary
                .iter()
                .map(|x| e(x.from.clone(), x.to.clone(), x.provenance))
                .collect(),
        }
    }

    pub fn to_model(&self, spec: &ShiftSpec) -> Result<BoundaryModel> {
        let v = |s: &str| {
            spec.vertex_of(&Label::parse(s))
                .map_err(|e| Error::Malformed(format!("boundary edge vertex `{s}`: {e}")))
        };
        let m = BoundaryModel {
            mode: self.mode,
            symbols: self
                .symbols
                .iter()
                .map(|s| {
                    Ok(BoundarySymbol {
                        id: s.id.clone(),
                        source: s.source.clone(),
                        anchor: spec
                            .vertex_of(&s.anchor)
                            .map_err(|e| Error::Malformed(format!("field `anchor` of `{}`: {e}", s.id)))?,
                    })
                })
                .collect::<Result<_>>()?,
            to_boundary: self
                .to_boundary
                .iter()
                .map(|x| Ok(Edge { from: v(&x.from)?, to: x.to.clone(), provenance: x.provenance }))
                .collect::<Result<_>>()?,
            from_boundary: self
                .from_boundary
                .iter()
                .map(|x| Ok(Edge { from: x.from.clone(), to: v(&x.to)?, provenance: x.provenance }))
                .collect::<Result<_>>()?,
            within_boundary: self
                .within_boundary
                .iter()
                .map(|x| Edge {
                    from: x.from.clone(),
                    to: x.to.clone(),
                    provenance: x.provenance,
                })
                .collect(),
        };
        m.validate()?;
        Ok(m)
    }
}

/// A gallery entry as written by `gallery export`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalleryBundle {
    pub name: String,
    #[serde(default)]
    pub params: GalleryParams,
    pub spec: SpecFile,
    pub metric: MetricFile,
    pub cutoffs: Vec<u64>,
    pub n_max: u64,
    pub boundary: BoundaryFile,
    pub oracles: GalleryOracles,
}

impl GalleryBundle {
    pub fn from_entry(e: &GalleryEntry) -> Self {
        GalleryBundle {
            name: e.name.clone(),
            params: e.params.clone(),
            spec: SpecFile::from_spec(&e.spec),
            metric: MetricFile {
                metric: e.metric.clone(),
                theta: Some(e.theta),
            },
            cutoffs: e.cutoffs.clone(),
            n_max: e.n_max,
            boundary: BoundaryFile::from_model(&e.boundary, &e.spec),
            oracles: e.oracles.clone(),
        }
    }

    pub fn to_entry(&self) -> Result<GalleryEntry> {
        let spec = self.spec.to_spec()?;
        Ok(GalleryEntry {
            name: self.name.clone(),
            params: self.params.clone(),
            boundary: self.boundary.to_model(&spec)?,
            metric: self.metric.metric.clone(),
            theta: self.metric.theta.unwrap_or(0.5),
            cutoffs: self.cutoffs.clone(),
            n_max: self.n_max,
            oracles: self.oracles.clone(),
            spec,
        })
    }
}

fn parse(json: &str) -> Result<Value> {
    serde_json::from_str(json).map_err(Error::from)
}

/// Pulls `key` out of a gallery bundle, or returns the document unchanged.
fn unwrap_bundle(v: Value, key: &str) -> Value {
    match v {
        Value::Object(mut m) if m.contains_key("oracles") && m.contains_key(key) => m.remove(key).unwrap(),
        v => v,
    }
}

/// Reads a spec file or the spec of a gallery bundle.
pub fn load_spec(json: &str) -> Result<ShiftSpec> {
    let f: SpecFile = serde_json::from_value(unwrap_bundle(parse(json)?, "spec"))?;
    f.to_spec()
}

/// Reads a metric file or the metric of a gallery bundle.
pub fn load_metric(json: &str) -> Result<MetricFile> {
    Ok(serde_json::from_value(unwrap_bundle(parse(json)?, "metric"))?)
}

pub fn load_potential(json: &str, spec: &ShiftSpec) -> Result<Potential> {
    let f: PotentialFile = serde_json::from_str(json)?;
    f.to_potential(spec)
}

/// Reads a boundary file, a boundary report (key `model`) or a gallery bundle.
pub fn load_boundary(json: &str, spec: &ShiftSpec) -> Result<BoundaryModel> {
    let v = match parse(json)? {
        Value::Object(mut m) if m.contains_key("model") => m.remove("model").unwrap(),
        v => unwrap_bundle(v, "boundary"),
    };
    let f: BoundaryFile = serde_json::from_value(v)?;
    f.to_model(spec)
}

/// Label form of a node of a compactified graph.
pub fn node_label(n: &NodeSymbol, spec: &ShiftSpec) -> String {
    match n {
        NodeSymbol::Vertex(v) => spec.label(*v).to_string(),
        NodeSymbol::Boundary(b) => b.clone(),
    }
}
