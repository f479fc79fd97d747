//! Countable Markov shifts given by a directed graph on ℕ, their finite
//! truncations, words and periodic orbits.
//!
//! Generator-backed shifts answer transition queries lazily, so the countable
//! alphabet is never materialised; only [`truncate`] builds finite adjacency.
//! Alphabets that are naturally signed (ℤ) or word-labelled (tree nodes, loop
//! positions) are normalised to ℕ by a fixed bijection and keep their original
//! labels for reporting.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph;

/// A vertex of the shift, normalised to ℕ = {1, 2, …}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct VertexId(u64);

impl VertexId {
    pub fn new(index: u64) -> Result<Self> {
        if index == 0 {
            return Err(Error::invalid("vertex indices start at 1"));
        }
        Ok(VertexId(index))
    }

    /// Panics on 0; for literals in tests and internal code paths.
    pub const fn from_index(index: u64) -> Self {
        assert!(index >= 1);
        VertexId(index)
    }

    pub const fn get(self) -> u64 {
        self.0
    }
}

impl TryFrom<u64> for VertexId {
    type Error = Error;
    fn try_from(value: u64) -> Result<Self> {
        VertexId::new(value)
    }
}

impl From<VertexId> for u64 {
    fn from(v: VertexId) -> u64 {
        v.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Original (user-facing) label of a vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Text(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(i) => write!(f, "{i}"),
            Label::Text(s) => f.write_str(s),
        }
    }
}

impl Label {
    /// Parses a label as written in a table key: integers stay integers.
    pub fn parse(s: &str) -> Label {
        let s = s.trim();
        match s.parse::<i64>() {
            Ok(i) => Label::Int(i),
            Err(_) => Label::Text(s.to_string()),
        }
    }
}

/// Number of loops of each length in a loop system; `count(1)` is the self-loop
/// at the base vertex and is capped at 1.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoopCounts {
    /// `p(n) = value` for every `n ≥ 1`.
    Constant { value: u64 },
    /// `p(n) = n`.
    #[default]
    Linear,
    /// `p(1), p(2), …` listed explicitly, zero afterwards.
    Table { values: Vec<u64> },
}

impl LoopCounts {
    pub fn count(&self, n: u64) -> u64 {
        if n == 0 {
            return 0;
        }
        let raw = match self {
            LoopCounts::Constant { value } => *value,
            LoopCounts::Linear => n,
            LoopCounts::Table { values } => values.get(n as usize - 1).copied().unwrap_or(0),
        };
        if n == 1 {
            raw.min(1)
        } else {
            raw
        }
    }

    /// Largest loop length with a nonzero count, if the table is finite.
    fn max_length(&self) -> Option<u64> {
        match self {
            LoopCounts::Table { values } => Some(
                values
                    .iter()
                    .rposition(|&c| c > 0)
                    .map_or(0, |i| i as u64 + 1),
            ),
            LoopCounts::Constant { value: 0 } => Some(1),
            _ => None,
        }
    }

    /// Sequence `p(1..=cutoff)` as used by loop generating functions.
    pub fn sequence(&self, cutoff: usize) -> Vec<u64> {
        (1..=cutoff as u64).map(|n| self.count(n)).collect()
    }
}

/// Position of a non-base vertex inside a loop system: the `step`-th vertex
/// (1-based) of copy `copy` of the loops of length `length`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoopPosition {
    pub length: u64,
    pub copy: u64,
    pub step: u64,
    /// 1-based number of the loop in the global enumeration.
    pub ordinal: u64,
    /// Index of the loop's first vertex.
    pub first_index: u64,
}

/// Locates vertex `index ≥ 2` of a loop system; `None` for the base vertex or
/// indices past the end of a finite system.
pub fn loop_position(counts: &LoopCounts, index: u64) -> Option<LoopPosition> {
    if index < 2 {
        return None;
    }
    let mut offset = index - 2;
    let mut ordinal = 0u64;
    let mut first = 2u64;
    let max_len = counts.max_length();
    let mut n = 2u64;
    loop {
        if let Some(m) = max_len {
            if n > m {
                return None;
            }
        }
        let p = counts.count(n);
        let block = (n - 1).saturating_mul(p);
        if offset < block {
            let copy = offset / (n - 1);
            let step = offset % (n - 1) + 1;
            return Some(LoopPosition {
                length: n,
                copy: copy + 1,
                step,
                ordinal: ordinal + copy + 1,
                first_index: first + copy * (n - 1),
            });
        }
        offset -= block;
        first += block;
        ordinal += p;
        n += 1;
    }
}

fn loop_index(counts: &LoopCounts, length: u64, copy: u64, step: u64) -> Option<u64> {
    if length < 2 || copy == 0 || copy > counts.count(length) || step == 0 || step >= length {
        return None;
    }
    let mut first = 2u64;
    for n in 2..length {
        first += (n - 1) * counts.count(n);
    }
    Some(first + (copy - 1) * (length - 1) + step - 1)
}

/// Loop-first vertex indices not exceeding `bound`.
fn loop_first_indices(counts: &LoopCounts, bound: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut first = 2u64;
    let max_len = counts.max_length();
    let mut n = 2u64;
    while first <= bound {
        if let Some(m) = max_len {
            if n > m {
                break;
            }
        }
        for _ in 0..counts.count(n) {
            if first > bound {
                break;
            }
            out.push(first);
            first += n - 1;
        }
        n += 1;
    }
    out
}

/// ℤ → ℕ: 0 ↦ 1, z > 0 ↦ 2z, z < 0 ↦ 2|z| + 1.
pub fn encode_integer(z: i64) -> u64 {
    match z {
        0 => 1,
        z if z > 0 => 2 * z as u64,
        z => 2 * z.unsigned_abs() + 1,
    }
}

/// Inverse of [`encode_integer`].
pub fn decode_integer(index: u64) -> i64 {
    if index == 1 {
        0
    } else if index.is_multiple_of(2) {
        (index / 2) as i64
    } else {
        -((index / 2) as i64)
    }
}

/// Symbols of the finite word `w` over {1, 3} naming tree vertex `<w2>`;
/// breadth-first numbering with the root `<2>` at index 1.
pub fn tree_word(index: u64) -> Vec<u8> {
    let len = 63 - index.leading_zeros() as u64;
    (0..len)
        .rev()
        .map(|bit| if (index >> bit) & 1 == 1 { 3 } else { 1 })
        .collect()
}

pub fn tree_index(word: &[u8]) -> Result<u64> {
    if word.len() > 62 {
        return Err(Error::invalid("tree word too long for 64-bit indexing"));
    }
    let mut index = 1u64;
    for &s in word {
        index = match s {
            1 => index << 1,
            3 => (index << 1) | 1,
            _ => return Err(Error::invalid(format!("tree symbol {s} not in {{1,3}}"))),
        };
    }
    Ok(index)
}

/// Named countable-alphabet shifts whose transitions are computed on demand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Generator {
    /// `1 → j` for all j, `i → i−1` for i ≥ 2.
    Renewal,
    /// `i → 1` for all i, `i → i+1`.
    BackwardsRenewal,
    /// `1 → 1, 2`; `i → i±1` for i ≥ 2.
    RandomWalk,
    /// Alphabet ℤ: `0 → j` for all j, `i → i−1` for i ≥ 1, `i → i+1` for i ≤ −1.
    DoubleRenewal,
    /// Vertices `<w2>`, w ∈ {1,3}*: root `<2>` reaches every vertex,
    /// `<w2> → <w'2>` where w' drops the first symbol of w.
    DyadicTree,
    /// Base vertex `v` with `p(n)` loops of length n.
    LoopSystem { counts: LoopCounts },
    /// `1 → 1, 2`; `i → i−1, i, i+1` for i ≥ 2.
    BirthDeath,
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Renewal => "renewal",
            Generator::BackwardsRenewal => "backwards_renewal",
            Generator::RandomWalk => "random_walk",
            Generator::DoubleRenewal => "double_renewal",
            Generator::DyadicTree => "dyadic_tree",
            Generator::LoopSystem { .. } => "loop_system",
            Generator::BirthDeath => "birth_death",
        }
    }

    fn exists(&self, i: u64) -> bool {
        match self {
            Generator::LoopSystem { counts } => i == 1 || loop_position(counts, i).is_some(),
            _ => i >= 1,
        }
    }

    pub fn allows(&self, i: u64, j: u64) -> bool {
        if !self.exists(i) || !self.exists(j) {
            return false;
        }
        match self {
            Generator::Renewal => i == 1 || j + 1 == i,
            Generator::BackwardsRenewal => j == 1 || j == i + 1,
            Generator::RandomWalk => {
                if i == 1 {
                    j <= 2
                } else {
                    j + 1 == i || j == i + 1
                }
            }
            Generator::BirthDeath => {
                if i == 1 {
                    j <= 2
                } else {
                    j + 1 == i || j == i || j == i + 1
                }
            }
            Generator::DoubleRenewal => {
                let (a, b) = (decode_integer(i), decode_integer(j));
                a == 0 || (a >= 1 && b == a - 1) || (a <= -1 && b == a + 1)
            }
            Generator::DyadicTree => i == 1 || tree_parent(i) == j,
            Generator::LoopSystem { counts } => match loop_position(counts, i) {
                None => {
                    (j == 1 && counts.count(1) == 1)
                        || loop_position(counts, j).is_some_and(|p| p.step == 1)
                }
                Some(p) if p.step + 1 == p.length => j == 1,
                Some(_) => j == i + 1,
            },
        }
    }

    /// Sorted successors of `i` with index ≤ `bound`.
    pub fn successors_upto(&self, i: u64, bound: u64) -> Vec<u64> {
        if i == 0 || !self.exists(i) {
            return Vec::new();
        }
        let mut out: Vec<u64> = match self {
            Generator::Renewal => {
                if i == 1 {
                    (1..=bound).collect()
                } else {
                    vec![i - 1]
                }
            }
            Generator::BackwardsRenewal => vec![1, i + 1],
            Generator::RandomWalk => {
                if i == 1 {
                    vec![1, 2]
                } else {
                    vec![i - 1, i + 1]
                }
            }
            Generator::BirthDeath => {
                if i == 1 {
                    vec![1, 2]
                } else {
                    vec![i - 1, i, i + 1]
                }
            }
            Generator::DoubleRenewal => {
                let a = decode_integer(i);
                if a == 0 {
                    (1..=bound).collect()
                } else if a >= 1 {
                    vec![encode_integer(a - 1)]
                } else {
                    vec![encode_integer(a + 1)]
                }
            }
            Generator::DyadicTree => {
                if i == 1 {
                    (1..=bound).collect()
                } else {
                    vec![tree_parent(i)]
                }
            }
            Generator::LoopSystem { counts } => match loop_position(counts, i) {
                None => {
                    let mut v = Vec::new();
                    if counts.count(1) == 1 {
                        v.push(1);
                    }
                    v.extend(loop_first_indices(counts, bound));
                    v
                }
                Some(p) if p.step + 1 == p.length => vec![1],
                Some(_) => vec![i + 1],
            },
        };
        out.retain(|&j| j <= bound && self.exists(j));
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn label(&self, i: u64) -> Label {
        match self {
            Generator::DoubleRenewal => Label::Int(decode_integer(i)),
            Generator::DyadicTree => {
                let mut s: String = tree_word(i).iter().map(|d| char::from(b'0' + d)).collect();
                s.push('2');
                Label::Text(s)
            }
            Generator::LoopSystem { counts } => match loop_position(counts, i) {
                None => Label::Text("v".into()),
                Some(p) => Label::Text(format!("b[{},{},{}]", p.length, p.copy, p.step)),
            },
            _ => Label::Int(i as i64),
        }
    }

    pub fn vertex_of(&self, label: &Label) -> Result<u64> {
        let bad = || Error::UnknownLabel(label.to_string());
        let idx = match (self, label) {
            (Generator::DoubleRenewal, Label::Int(z)) => encode_integer(*z),
            (Generator::DyadicTree, Label::Text(s)) => {
                let body = s.strip_suffix('2').ok_or_else(bad)?;
                let word = body
                    .bytes()
                    .map(|b| b.wrapping_sub(b'0'))
                    .collect::<Vec<_>>();
                tree_index(&word).map_err(|_| bad())?
            }
            (Generator::DyadicTree, Label::Int(i)) => {
                // "2", "12", "312": integer-looking tree labels
                return self.vertex_of(&Label::Text(i.to_string()));
            }
            (Generator::LoopSystem { counts }, Label::Text(s)) => {
                if s == "v" {
                    1
                } else {
                    let inner = s
                        .strip_prefix("b[")
                        .and_then(|r| r.strip_suffix(']'))
                        .ok_or_else(bad)?;
                    let parts: Vec<u64> = inner
                        .split(',')
                        .map(|p| p.trim().parse::<u64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad())?;
                    if parts.len() != 3 {
                        return Err(bad());
                    }
                    loop_index(counts, parts[0], parts[1], parts[2]).ok_or_else(bad)?
                }
            }
            (Generator::LoopSystem { .. }, Label::Int(_)) => return Err(bad()),
            (_, Label::Int(i)) if *i >= 1 => *i as u64,
            _ => return Err(bad()),
        };
        if !self.exists(idx) {
            return Err(bad());
        }
        Ok(idx)
    }
}

/// Parent of a non-root tree vertex: drop the first symbol of its word.
pub(crate) fn tree_parent(i: u64) -> u64 {
    let len = 63 - i.leading_zeros();
    debug_assert!(len >= 1);
    let low = i & ((1u64 << (len - 1)) - 1);
    (1u64 << (len - 1)) | low
}

/// A finite graph given explicitly by adjacency lists on {1..n}.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitGraph {
    n: u64,
    succ: Vec<Vec<u64>>,
    labels: Vec<Label>,
}

impl ExplicitGraph {
    pub fn new(n: u64, edges: &[(u64, u64)]) -> Result<Self> {
        let labels = (1..=n as i64).map(Label::Int).collect();
        Self::with_labels(n, edges, labels)
    }

    pub fn with_labels(n: u64, edges: &[(u64, u64)], labels: Vec<Label>) -> Result<Self> {
        if labels.len() as u64 != n {
            return Err(Error::invalid(format!(
                "{} labels given for {n} vertices",
                labels.len()
            )));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(Error::invalid("vertex labels must be distinct"));
        }
        let mut succ = vec![Vec::new(); n as usize];
        for &(a, b) in edges {
            if a == 0 || b == 0 || a > n || b > n {
                return Err(Error::invalid(format!(
                    "edge ({a},{b}) outside vertex range 1..={n}"
                )));
            }
            succ[a as usize - 1].push(b);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        Ok(ExplicitGraph { n, succ, labels })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn edges(&self) -> Vec<(u64, u64)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&j| (i as u64 + 1, j)))
            .collect()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
}

/// A countable-vertex directed-graph shift.
#[derive(Clone, Debug, PartialEq)]
pub enum ShiftSpec {
    Explicit(ExplicitGraph),
    Generator(Generator),
}

impl From<Generator> for ShiftSpec {
    fn from(g: Generator) -> Self {
        ShiftSpec::Generator(g)
    }
}

impl ShiftSpec {
    /// The full shift on `k` symbols.
    pub fn full_shift(k: u64) -> Self {
        let edges: Vec<_> = (1..=k).flat_map(|a| (1..=k).map(move |b| (a, b))).collect();
        ShiftSpec::Explicit(ExplicitGraph::new(k, &edges).expect("valid full shift"))
    }

    pub fn explicit(n: u64, edges: &[(u64, u64)]) -> Result<Self> {
        Ok(ShiftSpec::Explicit(ExplicitGraph::new(n, edges)?))
    }

    pub fn allows(&self, i: VertexId, j: VertexId) -> bool {
        match self {
            ShiftSpec::Explicit(g) => {
                i.0 <= g.n && g.succ[i.0 as usize - 1].binary_search(&j.0).is_ok()
            }
            ShiftSpec::Generator(gen) => gen.allows(i.0, j.0),
        }
    }

    /// Sorted successors of `i` with index at most `bound`.
    pub fn successors_upto(&self, i: VertexId, bound: u64) -> Vec<VertexId> {
        let raw = match self {
            ShiftSpec::Explicit(g) => {
                if i.0 > g.n {
                    Vec::new()
                } else {
                    g.succ[i.0 as usize - 1]
                        .iter()
                        .copied()
                        .filter(|&j| j <= bound)
                        .collect()
                }
            }
            ShiftSpec::Generator(gen) => gen.successors_upto(i.0, bound),
        };
        raw.into_iter().map(VertexId).collect()
    }

    /// Number of vertices if the alphabet is finite.
    pub fn finite_size(&self) -> Option<u64> {
        match self {
            ShiftSpec::Explicit(g) => Some(g.n),
            ShiftSpec::Generator(Generator::LoopSystem { counts }) => {
                counts.max_length().map(|m| {
                    1 + (2..=m).map(|n| (n - 1) * counts.count(n)).sum::<u64>()
                })
            }
            ShiftSpec::Generator(_) => None,
        }
    }

    pub fn generator(&self) -> Option<&Generator> {
        match self {
            ShiftSpec::Generator(g) => Some(g),
            ShiftSpec::Explicit(_) => None,
        }
    }

    pub fn label(&self, v: VertexId) -> Label {
        match self {
            ShiftSpec::Explicit(g) => g
                .labels
                .get(v.0 as usize - 1)
                .cloned()
                .unwrap_or(Label::Int(v.0 as i64)),
            ShiftSpec::Generator(gen) => gen.label(v.0),
        }
    }

    pub fn vertex_of(&self, label: &Label) -> Result<VertexId> {
        match self {
            ShiftSpec::Explicit(g) => g
                .labels
                .iter()
                .position(|l| l == label)
                .map(|p| VertexId(p as u64 + 1))
                .ok_or_else(|| Error::UnknownLabel(label.to_string())),
            ShiftSpec::Generator(gen) => gen.vertex_of(label).map(VertexId),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ShiftSpec::Explicit(g) => format!("explicit({} vertices)", g.n),
            ShiftSpec::Generator(gen) => gen.name().to_string(),
        }
    }
}

/// The maximal subshift supported on a finite vertex set.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSFT {
    bound: u64,
    vertices: Vec<VertexId>,
    labels: Vec<Label>,
    succ: Vec<Vec<usize>>,
}

impl TruncatedSFT {
    /// Prunes the graph on `candidates` (sorted, distinct) to its maximal
    /// subshift: vertices without in- or out-edges are removed until fixpoint.
    fn prune(
        bound: u64,
        candidates: Vec<VertexId>,
        labels: Vec<Label>,
        mut succ: Vec<Vec<usize>>,
    ) -> Self {
        let n = candidates.len();
        let mut alive = vec![true; n];
        let mut indeg = vec![0usize; n];
        let mut pred = vec![Vec::new(); n];
        for (u, out) in succ.iter().enumerate() {
            for &v in out {
                indeg[v] += 1;
                pred[v].push(u);
            }
        }
        let mut outdeg: Vec<usize> = succ.iter().map(Vec::len).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&u| indeg[u] == 0 || outdeg[u] == 0).collect();
        while let Some(u) = stack.pop() {
            if !alive[u] {
                continue;
            }
            alive[u] = false;
            for &v in &succ[u] {
                if alive[v] {
                    indeg[v] -= 1;
                    if indeg[v] == 0 {
                        stack.push(v);
                    }
                }
            }
            for &w in &pred[u] {
                if alive[w] {
                    outdeg[w] -= 1;
                    if outdeg[w] == 0 {
                        stack.push(w);
                    }
                }
            }
        }
        let mut remap = vec![usize::MAX; n];
        let mut vertices = Vec::new();
        let mut kept_labels = Vec::new();
        for u in 0..n {
            if alive[u] {
                remap[u] = vertices.len();
                vertices.push(candidates[u]);
                kept_labels.push(labels[u].clone());
            }
        }
        let mut new_succ = Vec::with_capacity(vertices.len());
        for u in 0..n {
            if alive[u] {
                let mut s: Vec<usize> = std::mem::take(&mut succ[u])
                    .into_iter()
                    .filter(|&v| alive[v])
                    .map(|v| remap[v])
                    .collect();
                s.sort_unstable();
                new_succ.push(s);
            }
        }
        TruncatedSFT {
            bound,
            vertices,
            labels: kept_labels,
            succ: new_succ,
        }
    }

    /// Maximal subshift of `spec` on an arbitrary finite vertex set.
    pub fn induced(spec: &ShiftSpec, vertices: &[VertexId]) -> Self {
        let mut cand: Vec<VertexId> = vertices.to_vec();
        cand.sort_unstable();
        cand.dedup();
        let bound = cand.last().map_or(0, |v| v.0);
        let succ = cand
            .iter()
            .map(|&u| {
                spec.successors_upto(u, bound)
                    .into_iter()
                    .filter_map(|v| cand.binary_search(&v).ok())
                    .collect()
            })
            .collect();
        let labels = cand.iter().map(|&v| spec.label(v)).collect();
        Self::prune(bound, cand, labels, succ)
    }

    /// Subshift on {1..n} with explicit edges, pruned.
    pub fn from_edges(n: u64, edges: &[(u64, u64)]) -> Result<Self> {
        Ok(truncate(&ShiftSpec::explicit(n, edges)?, n))
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Successors of the local vertex `u` as local indices.
    pub fn successors(&self, u: usize) -> &[usize] {
        &self.succ[u]
    }

    pub(crate) fn succ_lists(&self) -> &[Vec<usize>] {
        &self.succ
    }

    pub fn local_index(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.local_index(v).is_some()
    }

    pub fn allows(&self, a: VertexId, b: VertexId) -> bool {
        match (self.local_index(a), self.local_index(b)) {
            (Some(u), Some(v)) => self.succ[u].binary_search(&v).is_ok(),
            _ => false,
        }
    }

    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, s)| s.iter().map(move |&v| (self.vertices[u], self.vertices[v])))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Dense 0/1 matrix in local indexing.
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.len();
        let mut m = vec![vec![0u8; n]; n];
        for (u, s) in self.succ.iter().enumerate() {
            for &v in s {
                m[u][v] = 1;
            }
        }
        m
    }

    /// The truncation as an explicit spec on {1..bound}.
    pub fn to_spec(&self) -> ShiftSpec {
        let edges: Vec<(u64, u64)> = self
            .edges()
            .into_iter()
            .map(|(a, b)| (a.0, b.0))
            .collect();
        ShiftSpec::explicit(self.bound, &edges).expect("edges lie inside the bound")
    }

    /// True if every vertex can reach every other.
    pub fn is_irreducible(&self) -> bool {
        !self.is_empty() && graph::strongly_connected_components(&self.succ).len() == 1
    }
}

/// Maximal subshift of `spec` on {1..n}; possibly empty.
pub fn truncate(spec: &ShiftSpec, n: u64) -> TruncatedSFT {
    let cand: Vec<VertexId> = (1..=n).map(VertexId).collect();
    let succ = cand
        .iter()
        .map(|&u| {
            spec.successors_upto(u, n)
                .into_iter()
                .map(|v| v.0 as usize - 1)
                .collect()
        })
        .collect();
    let labels = cand.iter().map(|&v| spec.label(v)).collect();
    TruncatedSFT::prune(n, cand, labels, succ)
}

/// Primitivity of the adjacency matrix: irreducible with aperiodic cycles.
pub fn is_topologically_mixing(t: &TruncatedSFT) -> Result<bool> {
    if t.is_empty() {
        return Err(Error::EmptySubshift);
    }
    Ok(graph::period(&t.succ) == Some(1))
}

/// Least `M` such that every ordered pair of vertices (including `u → u`) is
/// joined by a path of length between 1 and `M`.
pub fn mixing_bound(t: &TruncatedSFT) -> Result<usize> {
    if !is_topologically_mixing(t)? {
        return Err(Error::NotMixing);
    }
    let mut worst = 0;
    for u in 0..t.len() {
        let dist = graph::positive_distances(&t.succ, u);
        for d in dist {
            worst = worst.max(d.ok_or(Error::NotMixing)?);
        }
    }
    Ok(worst)
}

/// A finite admissible word.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<VertexId>);

impl Word {
    /// Builds a word, checking every transition against `spec`.
    pub fn new(spec: &ShiftSpec, symbols: Vec<VertexId>) -> Result<Self> {
        for pair in symbols.windows(2) {
            if !spec.allows(pair[0], pair[1]) {
                return Err(Error::invalid(format!(
                    "transition {} -> {} not allowed",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Word(symbols))
    }

    /// Builds a word without checking transitions (e.g. for metric-only use).
    pub fn from_symbols(symbols: Vec<VertexId>) -> Self {
        Word(symbols)
    }

    pub fn from_indices(indices: &[u64]) -> Self {
        Word(indices.iter().map(|&i| VertexId::from_index(i)).collect())
    }

    pub fn symbols(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> Vec<u64> {
        self.0.iter().map(|v| v.0).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A closed word: the last symbol may be followed by the first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    word: Word,
}

impl PeriodicOrbit {
    pub fn new(spec: &ShiftSpec, symbols: Vec<VertexId>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::invalid("periodic orbit needs at least one symbol"));
        }
        let first = symbols[0];
        let last = *symbols.last().unwrap();
        let word = Word::new(spec, symbols)?;
        if !spec.allows(last, first) {
            return Err(Error::invalid(format!(
                "closing transition {last} -> {first} not allowed"
            )));
        }
        Ok(PeriodicOrbit { word })
    }

    pub(crate) fn from_word_unchecked(word: Word) -> Self {
        PeriodicOrbit { word }
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn period(&self) -> usize {
        self.word.len()
    }

    /// Symbol at position `i` read cyclically.
    pub fn symbol(&self, i: usize) -> VertexId {
        self.word.0[i % self.word.0.len()]
    }

    /// True if the orbit is not a repetition of a shorter closed word.
    pub fn is_primitive(&self) -> bool {
        let n = self.period();
        (1..n)
            .filter(|&d| n.is_multiple_of(d))
            .all(|d| (0..n).any(|i| self.word.0[i] != self.word.0[(i + d) % n]))
    }
}

/// All admissible words of length `n` in lexicographic order.
pub fn enumerate_words(t: &TruncatedSFT, n: usize) -> Result<Vec<Word>> {
    if n == 0 {
        return Err(Error::invalid("word length must be at least 1"));
    }
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(n);
    for start in 0..t.len() {
        path.clear();
        path.push(start);
        extend_words(t, n, &mut path, &mut |p| {
            out.push(Word(p.iter().map(|&u| t.vertices[u]).collect()));
        });
    }
    Ok(out)
}

fn extend_words(t: &TruncatedSFT, n: usize, path: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize])) {
    if path.len() == n {
        emit(path);
        return;
    }
    let last = *path.last().unwrap();
    for &v in &t.succ[last] {
        path.push(v);
        extend_words(t, n, path, emit);
        path.pop();
    }
}

/// Closed words of length `n` (not necessarily primitive), optionally only
/// those starting at `base`. Lexicographic order.
pub fn periodic_orbits(
    t: &TruncatedSFT,
    n: usize,
    base: Option<VertexId>,
) -> Result<Vec<PeriodicOrbit>> {
    if n == 0 {
        return Err(Error::invalid("period must be at least 1"));
    }
    let starts: Vec<usize> = match base {
        Some(b) => t.local_index(b).into_iter().collect(),
        None => (0..t.len()).collect(),
    };
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(n);
    for start in starts {
        path.clear();
        path.push(start);
        extend_words(t, n, &mut path, &mut |p| {
            let last = *p.last().unwrap();
            if t.succ[last].binary_search(&p[0]).is_ok() {
                out.push(PeriodicOrbit::from_word_unchecked(Word(
                    p.iter().map(|&u| t.vertices[u]).collect(),
                )));
            }
        });
    }
    Ok(out)
}

/// Like [`periodic_orbits`] but keeping only primitive closed words.
pub fn primitive_periodic_orbits(
    t: &TruncatedSFT,
    n: usize,
    base: Option<VertexId>,
) -> Result<Vec<PeriodicOrbit>> {
    Ok(periodic_orbits(t, n, base)?
        .into_iter()
        .filter(PeriodicOrbit::is_primitive)
        .collect())
}

/// Number of closed words of length `n` through `base`, computed by dynamic
/// programming rather than enumeration.
pub fn closed_word_count(t: &TruncatedSFT, n: usize, base: VertexId) -> u128 {
    let Some(b) = t.local_index(base) else {
        return 0;
    };
    let mut cur = vec![0u128; t.len()];
    cur[b] = 1;
    for _ in 0..n {
        let mut next = vec![0u128; t.len()];
        for (u, &c) in cur.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &v in &t.succ[u] {
                next[v] = next[v].saturating_add(c);
            }
        }
        cur = next;
    }
    cur[b]
}

/// Probes the finite-entropy precondition: the number of closed words through
/// `base` of each period up to `max_period` must not change between the
/// truncations at `small` and `large`.
pub fn probe_finite_entropy(
    spec: &ShiftSpec,
    base: VertexId,
    small: u64,
    large: u64,
    max_period: usize,
) -> Result<()> {
    let a = truncate(spec, small);
    let b = truncate(spec, large);
    for p in 1..=max_period {
        let (ca, cb) = (closed_word_count(&a, p, base), closed_word_count(&b, p, base));
        if ca != cb {
            return Err(Error::InfiniteEntropy(format!(
                "closed words of period {p} through {base}: {ca} at N={small}, {cb} at N={large}"
            )));
        }
    }
    Ok(())
}
