//! Pressure estimators, equilibrium measures and variational witnesses.
//!
//! Potentials of depth m are handled by recoding the graph to its m-block
//! presentation, where φ becomes a weight on states and the pressure is the
//! log spectral radius of `L_{ab} = A_{ab} e^{φ(a)}`.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph;
use crate::linalg::{self, Rows};
use crate::metric::ShiftMetric;
use crate::potential::{Potential, Symbol};
use crate::boundary::CompactifiedShift;
use crate::sectors::{boundary_chains, SectorDecomposition};
use crate::shift::{is_topologically_mixing, mixing_bound, truncate, PeriodicOrbit, ShiftSpec, TruncatedSFT, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spectral,
    SeparatedSets,
    Gurevich,
    LoopGf,
    InteriorSup,
    Compactified,
}

/// One row of a convergence trace: the estimate after processing `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulePoint {
    pub n: u64,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Change from the previous point; `None` for the first.
    pub increment: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub params: BTreeMap<String, f64>,
    pub trace: Vec<SchedulePoint>,
}

/// Symbol of a graph node, owned.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeSymbol {
    Vertex(VertexId),
    Boundary(String),
}

impl NodeSymbol {
    pub fn as_symbol(&self) -> Symbol<'_> {
        match self {
            NodeSymbol::Vertex(v) => Symbol::Vertex(*v),
            NodeSymbol::Boundary(b) => Symbol::Boundary(b),
        }
    }
}

/// A finite graph whose nodes are vertices or boundary symbols. `proxy` is
/// the vertex standing in for a node when distances are measured.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SymbolGraph {
    pub symbols: Vec<NodeSymbol>,
    pub proxy: Vec<VertexId>,
    pub succ: Vec<Vec<usize>>,
}

impl SymbolGraph {
    pub fn from_truncation(t: &TruncatedSFT) -> Self {
        SymbolGraph {
            symbols: t.vertices().iter().map(|&v| NodeSymbol::Vertex(v)).collect(),
            proxy: t.vertices().to_vec(),
            succ: t.succ_lists().to_vec(),
        }
    }

    /// Restriction to nodes lying on bi-infinite paths.
    pub fn pruned(self) -> Self {
        let n = self.symbols.len();
        let mut alive = vec![true; n];
        loop {
            let mut indeg = vec![0usize; n];
            let mut changed = false;
            for u in (0..n).filter(|&u| alive[u]) {
                for &v in &self.succ[u] {
                    if alive[v] {
                        indeg[v] += 1;
                    }
                }
            }
            for u in 0..n {
                if alive[u] && (indeg[u] == 0 || !self.succ[u].iter().any(|&v| alive[v])) {
                    alive[u] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut remap = vec![usize::MAX; n];
        let mut out = SymbolGraph {
            symbols: Vec::new(),
            proxy: Vec::new(),
            succ: Vec::new(),
        };
        for u in (0..n).filter(|&u| alive[u]) {
            remap[u] = out.symbols.len();
            out.symbols.push(self.symbols[u].clone());
            out.proxy.push(self.proxy[u]);
        }
        for u in (0..n).filter(|&u| alive[u]) {
            let mut s: Vec<usize> = self.succ[u].iter().filter(|&&v| alive[v]).map(|&v| remap[v]).collect();
            s.sort_unstable();
            out.succ.push(s);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }
}

/// m-block presentation: states are admissible node paths of length m.
pub(crate) struct BlockGraph {
    pub states: Vec<Vec<usize>>,
    pub succ: Vec<Vec<usize>>,
}

const MAX_STATES: usize = 2_000_000;

pub(crate) fn block_graph(g: &SymbolGraph, m: usize) -> Result<BlockGraph> {
    let m = m.max(1);
    let mut states = Vec::new();
    let mut path = Vec::with_capacity(m);
    for s in 0..g.len() {
        path.clear();
        path.push(s);
        collect_paths(g, m, &mut path, &mut states)?;
    }
    let index: HashMap<&[usize], usize> = states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let mut key = vec![0usize; m];
    let succ = states
        .iter()
        .map(|s| {
            key[..m - 1].copy_from_slice(&s[1..]);
            g.succ[s[m - 1]]
                .iter()
                .filter_map(|&x| {
                    key[m - 1] = x;
                    index.get(key.as_slice()).copied()
                })
                .collect()
        })
        .collect();
    Ok(BlockGraph { states, succ })
}

fn collect_paths(g: &SymbolGraph, m: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) -> Result<()> {
    if path.len() == m {
        if out.len() >= MAX_STATES {
            return Err(Error::invalid("block recoding exceeds the state limit"));
        }
        out.push(path.clone());
        return Ok(());
    }
    let last = *path.last().unwrap();
    for &x in &g.succ[last] {
        path.push(x);
        collect_paths(g, m, path, out)?;
        path.pop();
    }
    Ok(())
}

/// φ on each block state.
fn state_values(g: &SymbolGraph, b: &BlockGraph, p: &Potential) -> Result<Vec<f64>> {
    let mut window = Vec::new();
    b.states
        .iter()
        .map(|s| {
            window.clear();
            window.extend(s.iter().map(|&u| g.symbols[u].as_symbol()));
            p.eval_symbols(&window)
        })
        .collect()
}

fn weighted_rows(b: &BlockGraph, phi: &[f64]) -> Rows {
    b.succ
        .iter()
        .enumerate()
        .map(|(u, s)| {
            let w = phi[u].exp();
            s.iter().map(|&v| (v, w)).collect()
        })
        .collect()
}

fn restrict(rows: &Rows, members: &[usize]) -> Rows {
    members
        .iter()
        .map(|&u| {
            rows[u]
                .iter()
                .filter_map(|&(v, w)| members.binary_search(&v).ok().map(|k| (k, w)))
                .collect()
        })
        .collect()
}

struct Spectral {
    value: f64,
    lower: f64,
    upper: f64,
    iterations: usize,
    states: usize,
}

/// log spectral radius of a weighted block graph: max over its nontrivial
/// strongly connected components.
fn spectral(b: &BlockGraph, phi: &[f64]) -> Result<Spectral> {
    let rows = weighted_rows(b, phi);
    let mut best: Option<Spectral> = None;
    let mut iterations = 0;
    for comp in graph::strongly_connected_components(&b.succ) {
        if !graph::has_internal_edge(&b.succ, &comp) {
            continue;
        }
        let pf = linalg::perron(&restrict(&rows, &comp))?;
        iterations += pf.iterations;
        let cand = Spectral {
            value: pf.lambda.ln(),
            lower: pf.lower.ln(),
            upper: pf.upper.ln(),
            iterations: 0,
            states: b.states.len(),
        };
        best = Some(match best {
            None => cand,
            Some(cur) => Spectral {
                value: cur.value.max(cand.value),
                lower: cur.lower.max(cand.lower),
                upper: cur.upper.max(cand.upper),
                ..cur
            },
        });
    }
    let mut s = best.ok_or(Error::EmptySubshift)?;
    s.iterations = iterations;
    Ok(s)
}

pub(crate) fn graph_pressure(g: &SymbolGraph, p: &Potential, method: Method) -> Result<PressureEstimate> {
    if g.len() == 0 {
        return Err(Error::EmptySubshift);
    }
    let b = block_graph(g, p.depth())?;
    let phi = state_values(g, &b, p)?;
    let s = spectral(&b, &phi)?;
    Ok(PressureEstimate {
        value: s.value,
        lower: s.lower,
        upper: s.upper,
        method,
        params: BTreeMap::from([
            ("states".into(), s.states as f64),
            ("iterations".into(), s.iterations as f64),
            ("depth".into(), p.depth() as f64),
        ]),
        trace: Vec::new(),
    })
}

/// Pressure of a finite subshift: log Perron root of the weighted block matrix.
pub fn sft_pressure(t: &TruncatedSFT, p: &Potential) -> Result<PressureEstimate> {
    if t.is_empty() {
        return Err(Error::EmptySubshift);
    }
    let mut est = graph_pressure(&SymbolGraph::from_truncation(t), p, Method::Spectral)?;
    est.params.insert("N".into(), t.bound() as f64);
    Ok(est)
}

/// Extra coordinates appended (by least continuation) to each word when
/// distances between representatives are bounded from below.
const SEPARATION_LOOKAHEAD: usize = 48;
const MAX_SEPARATED_WORDS: usize = 400_000;

pub(crate) fn graph_separated_pressure(
    g: &SymbolGraph,
    p: &Potential,
    sm: &ShiftMetric,
    n: usize,
    eps: f64,
) -> Result<PressureEstimate> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    if g.len() == 0 {
        return Err(Error::EmptySubshift);
    }
    let k = g.len();
    let mut rho = vec![0.0; k * k];
    for a in 0..k {
        for b in a + 1..k {
            let r = sm.vm.rho(g.proxy[a], g.proxy[b])?;
            rho[a * k + b] = r;
            rho[b * k + a] = r;
        }
    }

    // every n-path, continued by least successors
    let len = n + SEPARATION_LOOKAHEAD.max(p.depth());
    let mut words: Vec<Vec<usize>> = Vec::new();
    let mut path = Vec::with_capacity(len);
    for s in 0..k {
        path.clear();
        path.push(s);
        collect_words(g, n, &mut path, &mut words)?;
    }
    for w in &mut words {
        while w.len() < len {
            let next = g.succ[*w.last().unwrap()][0];
            w.push(next);
        }
    }
    let mut window = Vec::with_capacity(p.depth());
    let mut weighted: Vec<(f64, Vec<usize>)> = Vec::with_capacity(words.len());
    for w in words {
        let mut s = 0.0;
        for i in 0..n {
            window.clear();
            window.extend(w[i..i + p.depth()].iter().map(|&u| g.symbols[u].as_symbol()));
            s += p.eval_symbols(&window)?;
        }
        weighted.push((s, w));
    }
    weighted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let theta = sm.theta;
    let separated = |x: &[usize], y: &[usize]| {
        if (0..n).any(|j| rho[x[j] * k + y[j]] > eps) {
            return true;
        }
        let mut tail = 0.0;
        for j in (0..len).rev() {
            tail = rho[x[j] * k + y[j]] + theta * tail;
            if j < n && tail > eps {
                return true;
            }
        }
        false
    };
    let mut chosen: Vec<usize> = Vec::new();
    for (i, (_, w)) in weighted.iter().enumerate() {
        if chosen.iter().all(|&c| separated(&weighted[c].1, w)) {
            chosen.push(i);
        }
    }
    let top = weighted[chosen[0]].0;
    let sum: f64 = chosen.iter().map(|&c| (weighted[c].0 - top).exp()).sum();
    let value = (top + sum.ln()) / n as f64;
    Ok(PressureEstimate {
        value,
        lower: value,
        upper: f64::INFINITY,
        method: Method::SeparatedSets,
        params: BTreeMap::from([
            ("n".into(), n as f64),
            ("eps".into(), eps),
            ("theta".into(), theta),
            ("separated_points".into(), chosen.len() as f64),
            ("words".into(), weighted.len() as f64),
        ]),
        trace: Vec::new(),
    })
}

fn collect_words(g: &SymbolGraph, n: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) -> Result<()> {
    if path.len() == n {
        if out.len() >= MAX_SEPARATED_WORDS {
            return Err(Error::invalid(format!(
                "more than {MAX_SEPARATED_WORDS} words of length {n}; reduce n or the truncation"
            )));
        }
        out.push(path.clone());
        return Ok(());
    }
    let last = *path.last().unwrap();
    for &x in &g.succ[last] {
        path.push(x);
        collect_words(g, n, path, out)?;
        path.pop();
    }
    Ok(())
}

/// (1/n) log of the weighted sum over a greedily built family of points that
/// is certified (n, ε)-separated; a lower bound for Q_n.
pub fn separated_set_pressure(
    t: &TruncatedSFT,
    p: &Potential,
    sm: &ShiftMetric,
    n: usize,
    eps: f64,
) -> Result<PressureEstimate> {
    graph_separated_pressure(&SymbolGraph::from_truncation(t), p, sm, n, eps)
}

fn check_schedule(schedule: &[u64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::invalid("empty schedule"));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) || schedule[0] == 0 {
        return Err(Error::invalid("schedule must be positive and strictly increasing"));
    }
    Ok(())
}

/// Supremum of truncation pressures along an increasing schedule.
pub fn interior_pressure(spec: &ShiftSpec, p: &Potential, schedule: &[u64]) -> Result<PressureEstimate> {
    interior_pressure_threaded(spec, p, schedule, 1)
}

/// As [`interior_pressure`], evaluating truncations on up to `threads` threads.
pub fn interior_pressure_threaded(
    spec: &ShiftSpec,
    p: &Potential,
    schedule: &[u64],
    threads: usize,
) -> Result<PressureEstimate> {
    check_schedule(schedule)?;
    let eval = |n: u64| -> Result<Option<PressureEstimate>> {
        let t = truncate(spec, n);
        if t.is_empty() {
            Ok(None)
        } else {
            sft_pressure(&t, p).map(Some)
        }
    };
    let results: Vec<Result<Option<PressureEstimate>>> = parallel_map(schedule, threads.max(1), eval);

    let mut trace = Vec::new();
    let mut best: Option<(f64, f64, f64)> = None;
    let mut iterations = 0.0;
    for (&n, r) in schedule.iter().zip(results) {
        let Some(est) = r? else { continue };
        iterations += est.params.get("iterations").copied().unwrap_or(0.0);
        let prev = best.map(|b| b.0);
        let cur = match best {
            None => (est.value, est.lower, est.upper),
            Some((v, l, u)) => (v.max(est.value), l.max(est.lower), u.max(est.upper)),
        };
        best = Some(cur);
        trace.push(SchedulePoint {
            n,
            value: cur.0,
            lower: cur.1,
            upper: cur.2,
            increment: prev.map(|pv| cur.0 - pv),
        });
    }
    let (value, lower, upper) = best.ok_or(Error::EmptySubshift)?;
    let last = trace.last().unwrap();
    Ok(PressureEstimate {
        value,
        lower,
        upper,
        method: Method::InteriorSup,
        params: BTreeMap::from([
            ("N".into(), last.n as f64),
            ("last_increment".into(), last.increment.unwrap_or(f64::NAN)),
            ("iterations".into(), iterations),
        ]),
        trace,
    })
}

/// Order-preserving map over a slice using scoped threads.
pub(crate) fn parallel_map<T: Copy + Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(T) -> R + Sync) -> Vec<R> {
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(|&x| f(x)).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| {
                let f = &f;
                s.spawn(move || c.iter().map(|&x| f(x)).collect::<Vec<R>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Growth rates g_n = (1/n) log Σ e^{S_nφ} over closed words of period n
/// through `base` within {1..N_max}; the value is the largest g_n.
pub fn gurevich_pressure(
    spec: &ShiftSpec,
    p: &Potential,
    base: VertexId,
    n_max: usize,
    big_n: u64,
) -> Result<PressureEstimate> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let t = truncate(spec, big_n);
    if !t.contains(base) {
        return Err(Error::NoClosedOrbits(base.get()));
    }
    let g = SymbolGraph::from_truncation(&t);
    let b = block_graph(&g, p.depth())?;
    let phi = state_values(&g, &b, p)?;
    let rows = weighted_rows(&b, &phi);
    let starts: Vec<usize> = (0..b.states.len())
        .filter(|&s| g.proxy[b.states[s][0]] == base)
        .collect();

    // log Z_n accumulated over start states
    let mut log_z = vec![f64::NEG_INFINITY; n_max + 1];
    for &s in &starts {
        let mut x = vec![0.0; b.states.len()];
        x[s] = 1.0;
        let mut scale = 0.0;
        for n in 1..=n_max {
            let mut y = vec![0.0; x.len()];
            for (u, r) in rows.iter().enumerate() {
                if x[u] != 0.0 {
                    for &(v, w) in r {
                        y[v] += x[u] * w;
                    }
                }
            }
            let m = y.iter().cloned().fold(0.0, f64::max);
            if m == 0.0 {
                break;
            }
            y.iter_mut().for_each(|a| *a /= m);
            scale += m.ln();
            x = y;
            if x[s] > 0.0 {
                log_z[n] = log_add(log_z[n], x[s].ln() + scale);
            }
        }
    }
    let mut trace = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for (n, &lz) in log_z.iter().enumerate().skip(1) {
        if lz.is_finite() {
            let g_n = lz / n as f64;
            let prev = best.map(|b| b.1);
            if best.is_none_or(|b| g_n > b.1) {
                best = Some((n, g_n));
            }
            trace.push(SchedulePoint {
                n: n as u64,
                value: g_n,
                lower: g_n,
                upper: g_n,
                increment: prev.map(|pv| g_n - pv),
            });
        }
    }
    let (n_star, value) = best.ok_or(Error::NoClosedOrbits(base.get()))?;
    // (Lⁿ)_{ss} ≤ λⁿ for every state, so g_n ≤ P(truncation) + log(#starts)/n
    let trunc = spectral(&b, &phi)?;
    let upper = (trunc.upper + (starts.len() as f64).ln() / n_star as f64).max(value);
    Ok(PressureEstimate {
        value,
        lower: value,
        upper,
        method: Method::Gurevich,
        params: BTreeMap::from([
            ("n_max".into(), n_max as f64),
            ("N".into(), big_n as f64),
            ("base".into(), base.get() as f64),
            ("argmax_n".into(), n_star as f64),
        ]),
        trace,
    })
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Entropy of a loop system from its loop counts: log(1/z*) where z* solves
/// Σ_{n ≤ cutoff} p(n) zⁿ = 1. `p_seq[0]` is p(1).
pub fn loop_entropy(p_seq: &[u64], cutoff: usize) -> Result<f64> {
    if cutoff == 0 || p_seq.is_empty() {
        return Err(Error::invalid("loop counts must be non-empty with cutoff >= 1"));
    }
    if p_seq.iter().all(|&c| c == 0) {
        return Err(Error::invalid("loop counts are all zero"));
    }
    let coeffs = &p_seq[..cutoff.min(p_seq.len())];
    let f = |z: f64| -> f64 {
        let mut s = 0.0;
        let mut zn = 1.0;
        for &c in coeffs {
            zn *= z;
            s += c as f64 * zn;
        }
        s - 1.0
    };
    let at_one = f(1.0);
    if at_one < 0.0 {
        return Err(Error::CutoffTooSmall);
    }
    if at_one == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok(-(0.5 * (lo + hi)).ln())
}

/// Stationary Markov measure on block states of length `states[i].len()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovMeasure {
    pub states: Vec<Vec<VertexId>>,
    pub pi: Vec<f64>,
    /// Row-stochastic transitions `(target, probability)` per state.
    pub transitions: Vec<Vec<(usize, f64)>>,
}

impl MarkovMeasure {
    /// Dense transition matrix.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let n = self.states.len();
        let mut m = vec![vec![0.0; n]; n];
        for (u, r) in self.transitions.iter().enumerate() {
            for &(v, w) in r {
                m[u][v] += w;
            }
        }
        m
    }

    /// Largest deviations from stationarity and row-stochasticity.
    pub fn residuals(&self) -> (f64, f64) {
        let n = self.states.len();
        let mut pi_p = vec![0.0; n];
        let mut row_err = 0.0f64;
        for (u, r) in self.transitions.iter().enumerate() {
            let mut s = 0.0;
            for &(v, w) in r {
                pi_p[v] += self.pi[u] * w;
                s += w;
            }
            row_err = row_err.max((s - 1.0).abs());
        }
        let stat = pi_p.iter().zip(&self.pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        (stat, row_err)
    }

    /// Uniform measure on a periodic orbit, as a one-step chain on its symbols.
    pub fn periodic(symbols: &[VertexId]) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::invalid("empty orbit"));
        }
        let n = symbols.len();
        Ok(MarkovMeasure {
            states: symbols.iter().map(|&s| vec![s]).collect(),
            pi: vec![1.0 / n as f64; n],
            transitions: (0..n).map(|i| vec![((i + 1) % n, 1.0)]).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumData {
    pub measure: MarkovMeasure,
    pub pressure: f64,
    pub lambda: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

struct BlockSystem {
    g: SymbolGraph,
    b: BlockGraph,
}

impl BlockSystem {
    fn new(t: &TruncatedSFT, m: usize) -> Result<Self> {
        let g = SymbolGraph::from_truncation(t);
        let b = block_graph(&g, m)?;
        Ok(BlockSystem { g, b })
    }

    fn state_words(&self) -> Vec<Vec<VertexId>> {
        self.b.states.iter().map(|s| s.iter().map(|&u| self.g.proxy[u]).collect()).collect()
    }

    fn irreducible(&self) -> bool {
        !self.b.states.is_empty() && graph::period(&self.b.succ).is_some()
    }
}

/// Perron data of an irreducible truncation; mixing is not required.
fn perron_measure(t: &TruncatedSFT, p: &Potential) -> Result<EquilibriumData> {
    let sys = BlockSystem::new(t, p.depth())?;
    if !sys.irreducible() {
        return Err(Error::NotMixing);
    }
    let phi = state_values(&sys.g, &sys.b, p)?;
    let rows = weighted_rows(&sys.b, &phi);
    let right = linalg::perron(&rows)?;
    let left = linalg::perron(&linalg::transpose(&rows))?;
    let lambda = right.lambda;
    let r = &right.right;
    let l = &left.right;
    let transitions: Rows = rows
        .iter()
        .enumerate()
        .map(|(u, row)| {
            let mut out: Vec<(usize, f64)> = row.iter().map(|&(v, w)| (v, w * r[v] / (lambda * r[u]))).collect();
            let s: f64 = out.iter().map(|x| x.1).sum();
            out.iter_mut().for_each(|x| x.1 /= s);
            out
        })
        .collect();
    let mut pi: Vec<f64> = l.iter().zip(r).map(|(a, b)| a * b).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= s);
    Ok(EquilibriumData {
        measure: MarkovMeasure {
            states: sys.state_words(),
            pi,
            transitions,
        },
        pressure: lambda.ln(),
        lambda,
        left: l.clone(),
        right: r.clone(),
    })
}

/// Equilibrium (Parry–Gibbs) measure of a locally constant potential on a
/// mixing truncation.
pub fn equilibrium_measure(t: &TruncatedSFT, p: &Potential) -> Result<EquilibriumData> {
    if !is_topologically_mixing(t)? {
        return Err(Error::NotMixing);
    }
    perron_measure(t, p)
}

/// Entropy and integral of `p` for a stationary Markov measure. Potentials
/// deeper than the state length are integrated over measure-weighted paths.
pub fn measure_free_energy(m: &MarkovMeasure, p: &Potential) -> Result<(f64, f64)> {
    let mut entropy = 0.0;
    for (u, r) in m.transitions.iter().enumerate() {
        for &(_, w) in r {
            if w > 0.0 {
                entropy -= m.pi[u] * w * w.ln();
            }
        }
    }
    let k = m.states.first().map_or(1, Vec::len);
    let extra = p.depth().saturating_sub(k);
    let mut integral = 0.0;
    let mut word = Vec::new();
    for (u, s) in m.states.iter().enumerate() {
        if m.pi[u] == 0.0 {
            continue;
        }
        word.clear();
        word.extend_from_slice(s);
        integral += m.pi[u] * path_integral(m, p, u, extra, &mut word)?;
    }
    Ok((entropy, integral))
}

fn path_integral(m: &MarkovMeasure, p: &Potential, u: usize, extra: usize, word: &mut Vec<VertexId>) -> Result<f64> {
    if extra == 0 {
        return p.eval_vertices(word);
    }
    let mut s = 0.0;
    for &(v, w) in &m.transitions[u] {
        if w == 0.0 {
            continue;
        }
        word.push(*m.states[v].last().unwrap());
        s += w * path_integral(m, p, v, extra - 1, word)?;
        word.pop();
    }
    Ok(s)
}

/// Outcome of sampling random Markov measures against the pressure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalReport {
    pub pressure: f64,
    pub samples: usize,
    /// Largest sampled h(μ) + ∫φ dμ.
    pub max_free_energy: f64,
    /// Largest sampled excess over the pressure (≤ 1e-9 expected).
    pub max_excess: f64,
    pub equilibrium_free_energy: f64,
    pub equilibrium_gap: f64,
    pub passed: bool,
}

/// Samples Markov measures with Dirichlet(1, …, 1) rows on the allowed
/// transitions and checks h + ∫φ ≤ P, with equality at the equilibrium measure.
pub fn variational_witness_check(t: &TruncatedSFT, p: &Potential, samples: usize, seed: u64) -> Result<VariationalReport> {
    let eq = perron_measure(t, p)?;
    let pressure = eq.pressure;
    let (h, i) = measure_free_energy(&eq.measure, p)?;
    let eq_free = h + i;
    let sys = BlockSystem::new(t, p.depth())?;
    let states = sys.state_words();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Gamma::new(1.0, 1.0).expect("valid gamma parameters");
    let mut max_free = f64::NEG_INFINITY;
    for _ in 0..samples {
        let transitions: Rows = sys
            .b
            .succ
            .iter()
            .map(|s| {
                let mut row: Vec<(usize, f64)> = s.iter().map(|&v| (v, gamma.sample(&mut rng))).collect();
                let total: f64 = row.iter().map(|x| x.1).sum();
                row.iter_mut().for_each(|x| x.1 /= total);
                row
            })
            .collect();
        let pi = linalg::stationary(&transitions)?;
        let m = MarkovMeasure {
            states: states.clone(),
            pi,
            transitions,
        };
        let (h, i) = measure_free_energy(&m, p)?;
        max_free = max_free.max(h + i);
    }
    let max_excess = max_free - pressure;
    let equilibrium_gap = (eq_free - pressure).abs();
    Ok(VariationalReport {
        pressure,
        samples,
        max_free_energy: max_free,
        max_excess,
        equilibrium_free_energy: eq_free,
        equilibrium_gap,
        passed: (samples == 0 || max_excess <= 1e-9) && equilibrium_gap <= 1e-8,
    })
}

/// Pressure of the compactified shift: the merged finite graph with φ read
/// at boundary symbols through its declared limits.
pub fn compactified_pressure(cs: &CompactifiedShift, p: &Potential) -> Result<PressureEstimate> {
    p.check_boundary_limits(cs.boundary().symbol_ids())?;
    let mut est = graph_pressure(cs.graph(), p, Method::Compactified)?;
    est.params.insert("N".into(), cs.base().bound() as f64);
    est.params.insert("boundary_symbols".into(), cs.boundary().symbols.len() as f64);
    est.params.insert("heuristic_edges".into(), cs.boundary().heuristic_edge_count() as f64);
    Ok(est)
}

/// Periodic orbit approximating a boundary point and the check of its
/// Birkhoff average against the limit value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistributionReport {
    pub chain: String,
    pub level: usize,
    pub n: usize,
    pub orbit: Vec<VertexId>,
    pub head_iterates: usize,
    pub sector_iterates: usize,
    pub measure: MarkovMeasure,
    pub integral: f64,
    pub boundary_value: f64,
    pub deviation: f64,
    /// sup over the sector of |φ − φ̄|.
    pub oscillation: f64,
    pub mixing_bound: usize,
    pub sup_norm: f64,
    /// ε_k + (M_k + 2)/n ‖φ‖∞.
    pub bound: f64,
    pub bound_holds: bool,
    /// ε_k + 2(M_k + 1)/n ‖φ‖∞, which also covers |φ − φ̄| ≤ 2‖φ‖∞ on the head.
    pub conservative_bound: f64,
    pub conservative_holds: bool,
}

/// Builds a periodic orbit spending `n` consecutive iterates in the level-`k`
/// sector of `chain` and returning through the head {1..N_k} along a
/// shortest path, then compares its average of `p` with the boundary value.
pub fn boundary_equidistribution(
    spec: &ShiftSpec,
    dec: &SectorDecomposition,
    chain: usize,
    k: usize,
    n: usize,
    p: &Potential,
) -> Result<EquidistributionReport> {
    let chains = boundary_chains(dec)?;
    let ch = chains
        .get(chain)
        .ok_or_else(|| Error::invalid(format!("chain {chain} out of range ({} chains)", chains.len())))?;
    let level = dec
        .levels
        .get(k)
        .ok_or_else(|| Error::invalid(format!("level {k} out of range")))?;
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if p.depth() != 1 {
        return Err(Error::invalid("equidistribution check needs a first-coordinate potential"));
    }
    let sector = &level.sectors[ch.sectors[k]];
    let head = truncate(spec, level.cutoff);
    if !is_topologically_mixing(&head)? {
        return Err(Error::NotMixing);
    }
    let m_k = mixing_bound(&head)?;
    let phi_bar = p.eval_symbols(&[Symbol::Boundary(&ch.name)])?;
    let phi = |v: VertexId| p.eval_vertices(&[v]);

    let members = &sector.members;
    let mut oscillation = 0.0f64;
    for &v in members {
        oscillation = oscillation.max((phi(v)? - phi_bar).abs());
    }
    let local = |v: VertexId| members.binary_search(&v).ok();
    let inner: Vec<Vec<usize>> = members
        .iter()
        .map(|&v| spec.successors_upto(v, dec.n_max).into_iter().filter_map(local).collect())
        .collect();
    let mut entry = vec![false; members.len()];
    for &a in head.vertices() {
        for w in spec.successors_upto(a, dec.n_max) {
            if let Some(i) = local(w) {
                entry[i] = true;
            }
        }
    }
    let exit_to = |i: usize| {
        spec.successors_upto(members[i], dec.n_max)
            .into_iter()
            .find(|&w| head.contains(w))
    };

    // layer j holds the smallest predecessor of every member reachable by a
    // walk of j + 1 sector vertices starting at an entry vertex
    const NONE: u32 = u32::MAX;
    let mut pred: Vec<Vec<u32>> = Vec::with_capacity(n);
    let mut alive: Vec<bool> = entry.clone();
    for _ in 1..n {
        let mut layer = vec![NONE; members.len()];
        for (s, next) in inner.iter().enumerate() {
            if alive[s] {
                for &t in next {
                    if layer[t] == NONE || (s as u32) < layer[t] {
                        layer[t] = s as u32;
                    }
                }
            }
        }
        alive = layer.iter().map(|&x| x != NONE).collect();
        pred.push(layer);
    }
    let (last, b) = (0..members.len())
        .filter(|&i| alive[i])
        .find_map(|i| exit_to(i).map(|b| (i, b)))
        .ok_or_else(|| {
            Error::NoConnectingPath(format!(
                "no walk of {n} vertices inside sector {} of level {k} leaves to the head",
                ch.name
            ))
        })?;
    let mut walk = vec![last];
    for layer in pred.iter().rev() {
        walk.push(layer[*walk.last().unwrap()] as usize);
    }
    walk.reverse();
    let first = members[walk[0]];

    let bi = head.local_index(b).expect("exit target lies in the head");
    let dist = graph::distances(head.succ_lists(), bi);
    let a = head
        .vertices()
        .iter()
        .enumerate()
        .filter(|&(ai, &a)| dist[ai].is_some() && spec.allows(a, first))
        .min_by_key(|&(ai, _)| dist[ai].unwrap())
        .map(|(ai, _)| ai)
        .ok_or_else(|| Error::NoConnectingPath(format!("head cannot return from {b} to the sector entry {first}")))?;
    let head_path = shortest_path(head.succ_lists(), bi, a);

    let mut orbit: Vec<VertexId> = head_path.iter().map(|&u| head.vertices()[u]).collect();
    let head_iterates = orbit.len();
    orbit.extend(walk.iter().map(|&i| members[i]));
    PeriodicOrbit::new(spec, orbit.clone())?;

    let mut total = 0.0;
    for &v in &orbit {
        total += phi(v)?;
    }
    let integral = total / orbit.len() as f64;
    let deviation = (integral - phi_bar).abs();
    let sup = p.sup_norm();
    let bound = oscillation + (m_k + 2) as f64 / n as f64 * sup;
    let conservative_bound = oscillation + 2.0 * (m_k + 1) as f64 / n as f64 * sup;
    Ok(EquidistributionReport {
        chain: ch.name.clone(),
        level: k,
        n,
        measure: MarkovMeasure::periodic(&orbit)?,
        orbit,
        head_iterates,
        sector_iterates: n,
        integral,
        boundary_value: phi_bar,
        deviation,
        oscillation,
        mixing_bound: m_k,
        sup_norm: sup,
        bound,
        bound_holds: deviation <= bound,
        conservative_bound,
        conservative_holds: deviation <= conservative_bound,
    })
}

/// Vertices of a shortest path from `s` to `t` (just `[s]` when equal).
fn shortest_path(succ: &[Vec<usize>], s: usize, t: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; succ.len()];
    let mut queue = std::collections::VecDeque::from([s]);
    prev[s] = s;
    while let Some(u) = queue.pop_front() {
        if u == t {
            break;
        }
        for &w in &succ[u] {
            if prev[w] == usize::MAX {
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![t];
    while *path.last().unwrap() != s {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    path
}
