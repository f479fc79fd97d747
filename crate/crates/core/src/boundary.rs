//! Boundary symbols of the compactification, their transitions to and from
//! ordinary vertices, and the compactified shift built on a truncation.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricClassification, Verdict, VertexMetric};
use crate::potential::Potential;
use crate::pressure::{graph_pressure, Method, NodeSymbol, SymbolGraph};
use crate::sectors::{boundary_chains, verify, SectorChain, SectorDecomposition};
use crate::shift::{
    encode_integer, loop_position, probe_finite_entropy, tree_index, Generator, ShiftSpec, TruncatedSFT, VertexId,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolSource {
    VanishingPoint,
    SectorChain { index: usize },
    Declared { label: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySymbol {
    pub id: String,
    pub source: SymbolSource,
    /// A deep vertex close to the boundary point, used where distances are needed.
    pub anchor: VertexId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Heuristic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceMode {
    #[default]
    Analytic,
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge<A, B> {
    pub from: A,
    pub to: B,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryModel {
    pub mode: InferenceMode,
    pub symbols: Vec<BoundarySymbol>,
    pub to_boundary: Vec<Edge<VertexId, String>>,
    pub from_boundary: Vec<Edge<String, VertexId>>,
    pub within_boundary: Vec<Edge<String, String>>,
}

impl BoundaryModel {
    /// Model with no boundary symbols, as for a finite alphabet.
    pub fn empty(mode: InferenceMode) -> Self {
        BoundaryModel {
            mode,
            symbols: Vec::new(),
            to_boundary: Vec::new(),
            from_boundary: Vec::new(),
            within_boundary: Vec::new(),
        }
    }

    pub fn symbol_ids(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(|s| s.id.as_str())
    }

    fn position(&self, id: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.id == id)
    }

    /// Checks that every edge names a declared symbol and ids are distinct.
    pub fn validate(&self) -> Result<()> {
        let ids: BTreeSet<&str> = self.symbol_ids().collect();
        if ids.len() != self.symbols.len() {
            return Err(Error::Malformed("duplicate boundary symbol id".into()));
        }
        let known = |s: &str| {
            if ids.contains(s) {
                Ok(())
            } else {
                Err(Error::Malformed(format!("edge references unknown boundary symbol `{s}`")))
            }
        };
        for e in &self.to_boundary {
            known(&e.to)?;
        }
        for e in &self.from_boundary {
            known(&e.from)?;
        }
        for e in &self.within_boundary {
            known(&e.from)?;
            known(&e.to)?;
        }
        Ok(())
    }

    /// True when `within_boundary` is exactly the identity on symbols.
    pub fn within_is_identity(&self) -> bool {
        let pairs: BTreeSet<(&str, &str)> =
            self.within_boundary.iter().map(|e| (e.from.as_str(), e.to.as_str())).collect();
        let id: BTreeSet<(&str, &str)> = self.symbol_ids().map(|s| (s, s)).collect();
        pairs == id
    }

    pub fn heuristic_edge_count(&self) -> usize {
        let h = |p: Provenance| usize::from(p == Provenance::Heuristic);
        self.to_boundary.iter().map(|e| h(e.provenance)).sum::<usize>()
            + self.from_boundary.iter().map(|e| h(e.provenance)).sum::<usize>()
            + self.within_boundary.iter().map(|e| h(e.provenance)).sum::<usize>()
    }

    fn normalize(mut self) -> Self {
        self.to_boundary.sort();
        self.to_boundary.dedup();
        self.from_boundary.sort();
        self.from_boundary.dedup();
        self.within_boundary.sort();
        self.within_boundary.dedup();
        self
    }
}

/// What the boundary symbols are read from.
#[derive(Clone, Copy, Debug)]
pub enum BoundarySource<'a> {
    Sectors(&'a SectorDecomposition),
    Classification(&'a MetricClassification),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryOptions {
    pub mode: InferenceMode,
    /// Working truncation for anchors, probes and heuristic accumulation.
    pub n_max: u64,
    /// Suffix length naming tree boundary points when no sector chains are given.
    pub tree_depth: usize,
    /// Heuristic levels used with a classification source.
    pub heuristic_cutoffs: Vec<u64>,
    pub probe_finite_entropy: bool,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        BoundaryOptions {
            mode: InferenceMode::Analytic,
            n_max: 4096,
            tree_depth: 2,
            heuristic_cutoffs: vec![64, 128, 256],
            probe_finite_entropy: true,
        }
    }
}

/// Builds the boundary model of `spec` under `vm`.
pub fn build_boundary_model(
    spec: &ShiftSpec,
    vm: &VertexMetric,
    source: BoundarySource<'_>,
    opts: &BoundaryOptions,
) -> Result<BoundaryModel> {
    vm.check_compatible(spec)?;
    if spec.finite_size().is_some() {
        return Ok(BoundaryModel::empty(opts.mode));
    }
    if opts.probe_finite_entropy {
        let large = opts.n_max.clamp(64, 1024);
        probe_finite_entropy(spec, VertexId::from_index(1), large / 4, large, 6)?;
    }
    let model = match opts.mode {
        InferenceMode::Analytic => {
            let chains = match source {
                BoundarySource::Sectors(dec) if verify(dec).is_sectorial() => Some(boundary_chains(dec)?),
                _ => None,
            };
            let vanishing = matches!(source, BoundarySource::Classification(c) if c.vanishing.verdict == Verdict::Yes);
            analytic(spec, vm, chains.as_deref(), vanishing, opts)?
        }
        InferenceMode::Heuristic => heuristic(spec, source, opts)?,
    };
    model.validate()?;
    Ok(model.normalize())
}

fn declared(id: &str, anchor: u64) -> BoundarySymbol {
    BoundarySymbol {
        id: id.to_string(),
        source: SymbolSource::Declared { label: id.to_string() },
        anchor: VertexId::from_index(anchor.max(1)),
    }
}

fn analytic_edge<A, B>(from: A, to: B) -> Edge<A, B> {
    Edge {
        from,
        to,
        provenance: Provenance::Analytic,
    }
}

fn identity(symbols: &[BoundarySymbol]) -> Vec<Edge<String, String>> {
    symbols.iter().map(|s| analytic_edge(s.id.clone(), s.id.clone())).collect()
}

fn analytic(
    spec: &ShiftSpec,
    vm: &VertexMetric,
    chains: Option<&[SectorChain]>,
    vanishing: bool,
    opts: &BoundaryOptions,
) -> Result<BoundaryModel> {
    let gen = spec.generator().expect("infinite alphabets are generator-backed");
    let n = opts.n_max.max(8);
    let one = VertexId::from_index(1);
    let mut m = BoundaryModel::empty(InferenceMode::Analytic);
    let point = |id: &str, anchor: u64| BoundarySymbol {
        id: id.to_string(),
        source: match chains.and_then(|c| c.iter().position(|c| c.name == id)) {
            Some(index) => SymbolSource::SectorChain { index },
            None if vanishing => SymbolSource::VanishingPoint,
            None => SymbolSource::Declared { label: id.to_string() },
        },
        anchor: chains
            .and_then(|c| c.iter().find(|c| c.name == id))
            .map_or(VertexId::from_index(anchor), |c| c.anchor),
    };
    match (gen, vm) {
        (Generator::Renewal, VertexMetric::Zargaryan) => {
            m.symbols = vec![point("inf", n)];
            m.to_boundary = vec![analytic_edge(one, "inf".into())];
            m.within_boundary = identity(&m.symbols);
        }
        (Generator::BackwardsRenewal, VertexMetric::Zargaryan) => {
            m.symbols = vec![point("inf", n)];
            m.from_boundary = vec![analytic_edge("inf".into(), one)];
            m.within_boundary = identity(&m.symbols);
        }
        (Generator::RandomWalk | Generator::BirthDeath, VertexMetric::Zargaryan) => {
            m.symbols = vec![point("inf", n)];
            m.within_boundary = identity(&m.symbols);
        }
        (Generator::DoubleRenewal, VertexMetric::Zargaryan) => {
            m.symbols = vec![point("inf", n)];
            m.to_boundary = vec![analytic_edge(one, "inf".into())];
            m.within_boundary = identity(&m.symbols);
        }
        (Generator::DoubleRenewal, VertexMetric::DoubleRenewal) => {
            let z = (n / 2) as i64;
            m.symbols = vec![point("+inf", encode_integer(z)), point("-inf", encode_integer(-z))];
            m.to_boundary = vec![analytic_edge(one, "+inf".into()), analytic_edge(one, "-inf".into())];
            m.within_boundary = identity(&m.symbols);
        }
        (Generator::DyadicTree, VertexMetric::TreeBackward) => {
            let suffixes: Vec<String> = match chains {
                Some(c) => c.iter().map(|c| c.name.trim_start_matches("..").to_string()).collect(),
                None => (0..1u32 << opts.tree_depth)
                    .map(|bits| {
                        (0..opts.tree_depth)
                            .rev()
                            .map(|b| if (bits >> b) & 1 == 1 { '3' } else { '1' })
                            .collect()
                    })
                    .collect(),
            };
            for s in suffixes {
                // deep word: a run of 1s followed by the suffix
                let mut word = vec![1u8; 40];
                word.extend(s.bytes().map(|b| b - b'0'));
                let id = format!("..{s}");
                m.symbols.push(point(&id, tree_index(&word)?));
                m.to_boundary.push(analytic_edge(one, id));
            }
            m.within_boundary = identity(&m.symbols);
        }
        (Generator::BirthDeath, VertexMetric::BirthDeathParity) => {
            let odd = n | 1;
            m.symbols = vec![declared("inf_o", odd), declared("inf_e", odd + 1)];
            for a in ["inf_o", "inf_e"] {
                for b in ["inf_o", "inf_e"] {
                    m.within_boundary.push(analytic_edge(a.into(), b.into()));
                }
            }
        }
        (Generator::Renewal, VertexMetric::ZigZag2) => {
            // x1 collects odd indices (x = 0), x2 even ones (x = 1); i → i−1 flips parity
            let odd = n | 1;
            m.symbols = vec![declared("x1", odd), declared("x2", odd + 1)];
            m.to_boundary = vec![analytic_edge(one, "x1".into()), analytic_edge(one, "x2".into())];
            m.within_boundary = vec![
                analytic_edge("x1".into(), "x2".into()),
                analytic_edge("x2".into(), "x1".into()),
            ];
        }
        (Generator::Renewal, VertexMetric::ZigZag3) => {
            let names: Vec<String> = (0..6).map(zigzag3_phase_name).collect();
            let base = n - n % 6;
            m.symbols = (0..6).map(|p| declared(&names[p], base + p as u64 + 1)).collect();
            for p in 0..6 {
                m.to_boundary.push(analytic_edge(one, names[p].clone()));
                m.within_boundary
                    .push(analytic_edge(names[p].clone(), names[(p + 5) % 6].clone()));
            }
        }
        (Generator::LoopSystem { counts }, VertexMetric::Circle { counts: c2, .. }) if counts == c2 => {
            let Some(lp) = loop_position(counts, n).filter(|p| p.length >= 3) else {
                return Err(Error::invalid("loop system has no long loops to accumulate on the circle"));
            };
            let at = |frac: f64| lp.first_index + (frac * (lp.length - 1) as f64).round() as u64;
            m.symbols = vec![declared("entry", lp.first_index), declared("exit", lp.first_index + lp.length - 2)];
            for (id, f) in [("circle@90", 0.25), ("circle@180", 0.5), ("circle@270", 0.75)] {
                m.symbols.push(declared(id, at(f).min(lp.first_index + lp.length - 2)));
            }
            m.to_boundary = vec![analytic_edge(one, "entry".into())];
            m.from_boundary = vec![analytic_edge("exit".into(), one)];
            m.within_boundary = identity(&m.symbols);
        }
        _ => {
            return Err(Error::invalid(format!(
                "no analytic boundary certificate for {} with metric `{}`; use heuristic mode",
                spec.describe(),
                vm.name()
            )))
        }
    }
    Ok(m)
}

/// Boundary point names of the four-curve zig-zag. Phase p holds the vertices
/// i with (i − 1) mod 6 = p; points are numbered x1 (x = 0), x2 (x = 1/2), x3 (x = 1).
fn zigzag3_phase_name(p: usize) -> String {
    const POINT: [u8; 6] = [1, 3, 1, 2, 3, 2];
    format!("x{}/{p}", POINT[p])
}

/// Boundary point (without phase) of a zig-zag symbol id.
pub fn point_of(id: &str) -> &str {
    id.split('/').next().unwrap_or(id)
}

/// Heuristic chains: nested sets of deep vertices, one per probed level.
fn heuristic_chains(spec: &ShiftSpec, source: BoundarySource<'_>, opts: &BoundaryOptions) -> Result<(Vec<String>, Vec<Vec<BTreeSet<u64>>>, u64)> {
    match source {
        BoundarySource::Sectors(dec) => {
            let last = dec.levels.len() - 1;
            let mut names = Vec::new();
            let mut sets = Vec::new();
            for i in 0..dec.levels[last].sectors.len() {
                let mut idx = vec![i];
                for k in (1..=last).rev() {
                    let Some(&p) = dec.levels[k].parents[*idx.last().unwrap()].first() else {
                        break;
                    };
                    idx.push(p);
                }
                idx.reverse();
                let off = dec.levels.len() - idx.len();
                names.push(format!("h{i}"));
                sets.push(
                    idx.iter()
                        .enumerate()
                        .map(|(k, &j)| dec.levels[k + off].sectors[j].members.iter().map(|v| v.get()).collect())
                        .collect(),
                );
            }
            let head = dec.levels[0].cutoff;
            Ok((names, sets, head))
        }
        BoundarySource::Classification(c) => {
            if c.vanishing.verdict != Verdict::Yes {
                return Err(Error::invalid(
                    "heuristic mode needs a vanishing classification or a sector decomposition",
                ));
            }
            let n_max = spec.finite_size().map_or(opts.n_max, |s| s.min(opts.n_max));
            let levels: Vec<BTreeSet<u64>> = opts
                .heuristic_cutoffs
                .iter()
                .filter(|&&c| c < n_max)
                .map(|&c| (c + 1..=n_max).collect())
                .collect();
            if levels.is_empty() {
                return Err(Error::invalid("heuristic cutoffs must lie below N_max"));
            }
            let head = opts.heuristic_cutoffs[0];
            Ok((vec!["inf".into()], vec![levels], head))
        }
    }
}

fn heuristic(spec: &ShiftSpec, source: BoundarySource<'_>, opts: &BoundaryOptions) -> Result<BoundaryModel> {
    let (names, chains, head) = heuristic_chains(spec, source, opts)?;
    let bound = chains
        .iter()
        .flatten()
        .flat_map(|s| s.iter().next_back())
        .copied()
        .max()
        .unwrap_or(head)
        .max(head);
    let succ = |i: u64| -> Vec<u64> {
        spec.successors_upto(VertexId::from_index(i), bound)
            .into_iter()
            .map(|v| v.get())
            .collect()
    };
    fn h<A, B>(from: A, to: B) -> Edge<A, B> {
        Edge {
            from,
            to,
            provenance: Provenance::Heuristic,
        }
    }
    let mut m = BoundaryModel::empty(InferenceMode::Heuristic);
    for (c, levels) in chains.iter().enumerate() {
        let anchor = levels.last().and_then(|s| s.iter().next_back()).copied().unwrap_or(bound);
        m.symbols.push(BoundarySymbol {
            id: names[c].clone(),
            source: match source {
                BoundarySource::Sectors(_) => SymbolSource::SectorChain { index: c },
                BoundarySource::Classification(_) => SymbolSource::VanishingPoint,
            },
            anchor: VertexId::from_index(anchor),
        });
        m.within_boundary.push(h(names[c].clone(), names[c].clone()));
        for n in 1..=head {
            let out = succ(n);
            if levels.iter().all(|s| out.iter().any(|j| s.contains(j))) {
                m.to_boundary.push(h(VertexId::from_index(n), names[c].clone()));
            }
            if levels.iter().all(|s| s.iter().any(|&u| succ(u).contains(&n))) {
                m.from_boundary.push(h(names[c].clone(), VertexId::from_index(n)));
            }
        }
        for (d, other) in chains.iter().enumerate() {
            if d != c
                && levels
                    .iter()
                    .zip(other)
                    .all(|(s, t)| s.iter().any(|&u| succ(u).iter().any(|j| t.contains(j))))
            {
                m.within_boundary.push(h(names[c].clone(), names[d].clone()));
            }
        }
    }
    Ok(m)
}

/// The base truncation with boundary symbols attached.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactifiedShift {
    base: TruncatedSFT,
    boundary: BoundaryModel,
    graph: SymbolGraph,
}

impl CompactifiedShift {
    pub fn new(base: TruncatedSFT, boundary: BoundaryModel) -> Result<Self> {
        boundary.validate()?;
        let mut g = SymbolGraph::from_truncation(&base);
        let nb = base.len();
        for s in &boundary.symbols {
            g.symbols.push(NodeSymbol::Boundary(s.id.clone()));
            g.proxy.push(s.anchor);
            g.succ.push(Vec::new());
        }
        let sym = |id: &str| nb + boundary.position(id).expect("validated");
        for e in &boundary.to_boundary {
            if let Some(u) = base.local_index(e.from) {
                g.succ[u].push(sym(&e.to));
            }
        }
        for e in &boundary.from_boundary {
            if let Some(v) = base.local_index(e.to) {
                g.succ[sym(&e.from)].push(v);
            }
        }
        for e in &boundary.within_boundary {
            g.succ[sym(&e.from)].push(sym(&e.to));
        }
        for s in &mut g.succ {
            s.sort_unstable();
            s.dedup();
        }
        Ok(CompactifiedShift {
            base,
            boundary,
            graph: g.pruned(),
        })
    }

    pub fn base(&self) -> &TruncatedSFT {
        &self.base
    }

    pub fn boundary(&self) -> &BoundaryModel {
        &self.boundary
    }

    /// Nodes of the merged graph after pruning.
    pub fn symbols(&self) -> &[NodeSymbol] {
        &self.graph.symbols
    }

    pub fn successors(&self, u: usize) -> &[usize] {
        &self.graph.succ[u]
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.len() == 0
    }

    pub(crate) fn graph(&self) -> &SymbolGraph {
        &self.graph
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcursionReport {
    pub passed: bool,
    pub m_max: usize,
    /// i, b₁, …, b_m, j for the shortest excursion found.
    pub witness: Option<Vec<NodeSymbol>>,
}

/// Searches for paths i → b₁ → … → b_m → j with i, j base vertices, b's
/// boundary symbols and m ≤ m_max.
pub fn check_no_excursion(cs: &CompactifiedShift, m_max: usize) -> Result<ExcursionReport> {
    if m_max == 0 {
        return Err(Error::invalid("m_max must be at least 1"));
    }
    let b = &cs.boundary;
    let k = b.symbols.len();
    let mut dist = vec![usize::MAX; k];
    let mut prev: Vec<Option<usize>> = vec![None; k];
    let mut entry: Vec<Option<VertexId>> = vec![None; k];
    let mut queue = VecDeque::new();
    for e in &b.to_boundary {
        let s = b.position(&e.to).expect("validated");
        if cs.base.contains(e.from) && dist[s] == usize::MAX {
            dist[s] = 1;
            entry[s] = Some(e.from);
            queue.push_back(s);
        }
    }
    let mut within = vec![Vec::new(); k];
    for e in &b.within_boundary {
        within[b.position(&e.from).unwrap()].push(b.position(&e.to).unwrap());
    }
    while let Some(s) = queue.pop_front() {
        if dist[s] > m_max {
            break;
        }
        if let Some(e) = b.from_boundary.iter().find(|e| e.from == b.symbols[s].id && cs.base.contains(e.to)) {
            let mut path = vec![NodeSymbol::Vertex(e.to)];
            let mut cur = s;
            loop {
                path.push(NodeSymbol::Boundary(b.symbols[cur].id.clone()));
                match prev[cur] {
                    Some(p) => cur = p,
                    None => break,
                }
            }
            path.push(NodeSymbol::Vertex(entry[cur].unwrap()));
            path.reverse();
            return Ok(ExcursionReport {
                passed: false,
                m_max,
                witness: Some(path),
            });
        }
        for &t in &within[s] {
            if dist[t] == usize::MAX {
                dist[t] = dist[s] + 1;
                prev[t] = Some(s);
                queue.push_back(t);
            }
        }
    }
    Ok(ExcursionReport {
        passed: true,
        m_max,
        witness: None,
    })
}

/// log spectral radius of the within-boundary adjacency.
pub fn boundary_entropy(cs: &CompactifiedShift) -> Result<f64> {
    let b = &cs.boundary;
    if b.symbols.is_empty() {
        return Err(Error::invalid("empty boundary"));
    }
    let mut succ = vec![Vec::new(); b.symbols.len()];
    for e in &b.within_boundary {
        succ[b.position(&e.from).unwrap()].push(b.position(&e.to).unwrap());
    }
    for s in &mut succ {
        s.sort_unstable();
        s.dedup();
    }
    let g = SymbolGraph {
        symbols: b.symbols.iter().map(|s| NodeSymbol::Boundary(s.id.clone())).collect(),
        proxy: b.symbols.iter().map(|s| s.anchor).collect(),
        succ,
    };
    Ok(graph_pressure(&g, &Potential::zero(), Method::Spectral)?.value)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub no_excursion: ExcursionReport,
    pub within_nonempty: bool,
    /// Whether the identity assertion applies (sectorial certificate present).
    pub identity_required: bool,
    pub within_identity: bool,
    pub passed: bool,
}

/// Structural checks on a compactified shift: no finite-boundary-finite
/// excursion, a non-empty boundary self-relation, and identity boundary
/// dynamics when the vertex set is sectorial.
pub fn check_lemmas(cs: &CompactifiedShift, sectorial: bool) -> Result<LemmaReport> {
    let b = &cs.boundary;
    let no_excursion = check_no_excursion(cs, b.symbols.len() + 2)?;
    let within_nonempty = !b.within_boundary.is_empty();
    let within_identity = b.within_is_identity();
    let passed = no_excursion.passed
        && (within_nonempty || b.symbols.is_empty())
        && (!sectorial || within_identity);
    Ok(LemmaReport {
        no_excursion,
        within_nonempty,
        identity_required: sectorial,
        within_identity,
        passed,
    })
}
