//! Named example systems, each wired with its vertex metric, analytic
//! boundary model and expected values.

use serde::{Deserialize, Serialize};

use crate::boundary::{build_boundary_model, BoundaryModel, BoundaryOptions, BoundarySource};
use crate::error::{Error, Result};
use crate::metric::{classify, VertexMetric};
use crate::shift::{Generator, LoopCounts, ShiftSpec};

pub const CATALOGUE: [&str; 10] = [
    "renewal",
    "backwards_renewal",
    "random_walk_1side",
    "double_renewal",
    "dyadic_tree",
    "loop_system",
    "zigzag_2",
    "zigzag_3",
    "circle_loops",
    "birth_death_parity",
];

/// Where an expected value comes from: stated for the example in the
/// literature, derived by an independent closed-form computation, or
/// immediate from the construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleSource {
    Stated,
    Derived,
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Oracle<T> {
    pub value: T,
    pub source: OracleSource,
    pub note: String,
}

fn oracle<T>(value: T, source: OracleSource, note: &str) -> Option<Oracle<T>> {
    Some(Oracle {
        value,
        source,
        note: note.to_string(),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GalleryOracles {
    pub entropy: Option<Oracle<f64>>,
    pub boundary_entropy: Option<Oracle<f64>>,
    pub sectorial: Option<Oracle<bool>>,
    pub interior_rich: Option<Oracle<bool>>,
    pub boundary_symbols: Option<Oracle<usize>>,
}

/// Optional parameters of the loop-system entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GalleryParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<LoopCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GalleryEntry {
    pub name: String,
    pub params: GalleryParams,
    pub spec: ShiftSpec,
    pub metric: VertexMetric,
    pub theta: f64,
    /// Default sector cutoffs and working truncation.
    pub cutoffs: Vec<u64>,
    pub n_max: u64,
    pub boundary: BoundaryModel,
    pub oracles: GalleryOracles,
}

pub fn instantiate(name: &str) -> Result<GalleryEntry> {
    instantiate_with(name, &GalleryParams::default())
}

pub fn instantiate_with(name: &str, params: &GalleryParams) -> Result<GalleryEntry> {
    use OracleSource::*;
    let ln2 = std::f64::consts::LN_2;
    let gen = |g: Generator| ShiftSpec::Generator(g);
    let mut o = GalleryOracles::default();
    let tails = vec![4, 16, 64];
    if (params.counts.is_some() || params.radii.is_some()) && !matches!(name, "loop_system" | "circle_loops") {
        return Err(Error::invalid(format!("gallery entry `{name}` takes no parameters")));
    }
    let (spec, metric, cutoffs, n_max) = match name {
        "renewal" => {
            o.entropy = oracle(ln2, Stated, "h_top = log 2");
            o.boundary_symbols = oracle(1, Stated, "the vertex boundary is a single point");
            o.sectorial = oracle(true, Derived, "vanishing metric");
            o.interior_rich = oracle(true, Stated, "renewal shift is interior rich");
            o.boundary_entropy = oracle(0.0, Derived, "identity boundary dynamics");
            (gen(Generator::Renewal), VertexMetric::Zargaryan, tails, 1024)
        }
        "backwards_renewal" => {
            o.entropy = oracle(ln2, Derived, "same closed-orbit counts as the renewal shift");
            o.boundary_symbols = oracle(1, Stated, "single point at infinity");
            o.sectorial = oracle(true, Derived, "vanishing metric");
            o.boundary_entropy = oracle(0.0, Derived, "identity boundary dynamics");
            (gen(Generator::BackwardsRenewal), VertexMetric::Zargaryan, tails, 1024)
        }
        "random_walk_1side" => {
            o.entropy = oracle(ln2, Derived, "limit of log 2cos(pi/(N+1))");
            o.boundary_symbols = oracle(1, Stated, "single point at infinity");
            o.sectorial = oracle(true, Derived, "vanishing metric");
            o.boundary_entropy = oracle(0.0, Derived, "identity boundary dynamics");
            (gen(Generator::RandomWalk), VertexMetric::Zargaryan, tails, 1024)
        }
        "double_renewal" => {
            o.entropy = oracle((1.0 + 2f64.sqrt()).ln(), Derived, "root of z + 2z^2/(1-z) = 1");
            o.boundary_symbols = oracle(2, Stated, "two infinities");
            o.sectorial = oracle(true, Stated, "positive and negative tails");
            o.boundary_entropy = oracle(0.0, Derived, "identity boundary dynamics");
            o.interior_rich = oracle(true, Derived, "sectorial");
            (gen(Generator::DoubleRenewal), VertexMetric::DoubleRenewal, tails, 1024)
        }
        "dyadic_tree" => {
            o.entropy = oracle(3f64.ln(), Derived, "root of sum 2^l z^(l+1) = 1");
            o.sectorial = oracle(true, Derived, "suffix classes");
            o.boundary_entropy = oracle(0.0, Stated, "the boundary dynamics fixes every point");
            o.interior_rich = oracle(true, Derived, "sectorial");
            (gen(Generator::DyadicTree), VertexMetric::TreeBackward, vec![1, 3, 7, 15], 1023)
        }
        "loop_system" | "circle_loops" => {
            let default = if name == "loop_system" {
                LoopCounts::Linear
            } else {
                LoopCounts::Constant { value: 1 }
            };
            let counts = params.counts.clone().unwrap_or(default);
            if counts == LoopCounts::Linear {
                let golden = (1.0 + 5f64.sqrt()) / 2.0;
                o.entropy = oracle(2.0 * golden.ln(), Derived, "root of z/(1-z)^2 = 1");
            } else if counts == (LoopCounts::Constant { value: 1 }) {
                o.entropy = oracle(ln2, Derived, "root of z/(1-z) = 1");
            }
            o.sectorial = oracle(false, Derived, "every tail component is a finite loop segment");
            o.boundary_entropy = oracle(0.0, Stated, "the dynamics extends to the circle fixing each point");
            o.interior_rich = oracle(true, Stated, "embedding examples are interior rich");
            let metric = VertexMetric::Circle {
                counts: counts.clone(),
                radii: params.radii.clone(),
            };
            (gen(Generator::LoopSystem { counts }), metric, vec![4, 16], 1024)
        }
        "zigzag_2" => {
            o.entropy = oracle(ln2, Derived, "renewal adjacency");
            o.boundary_symbols = oracle(2, Stated, "two infinities");
            o.sectorial = oracle(false, Stated, "not sectorially arranged");
            o.boundary_entropy = oracle(0.0, Derived, "boundary dynamics swaps the two points");
            o.interior_rich = oracle(true, Stated, "embedding examples are interior rich");
            (gen(Generator::Renewal), VertexMetric::ZigZag2, tails, 1024)
        }
        "zigzag_3" => {
            o.entropy = oracle(ln2, Derived, "renewal adjacency");
            o.sectorial = oracle(false, Stated, "not sectorially arranged");
            o.boundary_entropy = oracle(0.0, Stated, "dynamics on the boundary is periodic");
            o.interior_rich = oracle(true, Stated, "embedding examples are interior rich");
            (gen(Generator::Renewal), VertexMetric::ZigZag3, tails, 1024)
        }
        "birth_death_parity" => {
            o.entropy = oracle(3f64.ln(), Derived, "tridiagonal all-ones matrices have radius 1 + 2cos(pi/(N+1))");
            o.boundary_symbols = oracle(2, Stated, "odd and even infinities");
            o.sectorial = oracle(false, Stated, "cannot be sectorially arranged");
            o.boundary_entropy = oracle(2f64.ln(), Stated, "h_top of the boundary is log 2");
            o.interior_rich = oracle(true, Stated, "full shift on {n, n+1} is a subset");
            (gen(Generator::BirthDeath), VertexMetric::BirthDeathParity, tails, 1024)
        }
        _ => {
            return Err(Error::UnknownGalleryEntry {
                name: name.to_string(),
                catalogue: CATALOGUE.join(", "),
            })
        }
    };
    let class = classify(&metric, 64, &[0.5])?;
    let boundary = build_boundary_model(
        &spec,
        &metric,
        BoundarySource::Classification(&class),
        &BoundaryOptions {
            n_max,
            ..BoundaryOptions::default()
        },
    )?;
    Ok(GalleryEntry {
        name: name.to_string(),
        params: params.clone(),
        spec,
        metric,
        theta: 0.5,
        cutoffs,
        n_max,
        boundary,
        oracles: o,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_instantiates() {
        for name in CATALOGUE {
            let e = instantiate(name).unwrap();
            assert_eq!(e.name, name);
            assert!(!e.boundary.symbols.is_empty(), "{name}");
            if let Some(k) = &e.oracles.boundary_symbols {
                assert_eq!(e.boundary.symbols.len(), k.value, "{name}");
            }
        }
    }

    #[test]
    fn unknown_names_list_the_catalogue() {
        match instantiate("horseshoe") {
            Err(Error::UnknownGalleryEntry { catalogue, .. }) => assert!(catalogue.contains("birth_death_parity")),
            r => panic!("{r:?}"),
        }
        let p = GalleryParams {
            counts: Some(LoopCounts::Linear),
            radii: None,
        };
        assert!(instantiate_with("renewal", &p).is_err());
        assert!(instantiate_with("circle_loops", &p).is_ok());
    }
}
