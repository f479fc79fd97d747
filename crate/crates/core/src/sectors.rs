//! Sector decompositions of the vertex set and the boundary points they name.
//!
//! At each cutoff N_k the vertices above N_k (inside a working truncation
//! N_max) split into weakly connected components. Components the generator
//! certifies as finite are absorbed into the head; the rest are sectors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph;
use crate::metric::{vertex_set_diameter, VertexMetric};
use crate::pressure::parallel_map;
use crate::shift::{decode_integer, tree_word, Generator, ShiftSpec, VertexId};

/// Whether a component is infinite in the full alphabet, as certified by the
/// generator family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extent {
    Infinite,
    Finite,
    Unknown,
}

/// Generator-level description of an infinite sector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SectorShape {
    /// All vertices with index above `above`.
    Tail { above: u64 },
    /// Signed labels z with z ≥ min_abs (positive) or z ≤ −min_abs.
    SignedTail { positive: bool, min_abs: u64 },
    /// Tree vertices whose word ends with `suffix`.
    SuffixClass { suffix: String },
}

impl SectorShape {
    pub fn describe(&self) -> String {
        match self {
            SectorShape::Tail { above } => format!("{{n > {above}}}"),
            SectorShape::SignedTail { positive: true, min_abs } => format!("{{z >= {min_abs}}}"),
            SectorShape::SignedTail { positive: false, min_abs } => format!("{{z <= -{min_abs}}}"),
            SectorShape::SuffixClass { suffix } => format!("{{<w{suffix}2>}}"),
        }
    }

    /// Name of the boundary point reached by shrinking sectors of this shape.
    fn point_name(&self) -> String {
        match self {
            SectorShape::Tail { .. } => "inf".into(),
            SectorShape::SignedTail { positive: true, .. } => "+inf".into(),
            SectorShape::SignedTail { positive: false, .. } => "-inf".into(),
            SectorShape::SuffixClass { suffix } => format!("..{suffix}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sector {
    /// Members inside the working truncation, sorted.
    pub members: Vec<VertexId>,
    pub extent: Extent,
    pub shape: Option<SectorShape>,
    pub diameter: f64,
    /// Strict upper bound on the diameter of the full (untruncated) sector.
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorLevel {
    pub k: usize,
    /// Effective cutoff after absorbing finite components.
    pub cutoff: u64,
    pub requested_cutoff: u64,
    pub delta: f64,
    /// True when `delta` comes from family bounds rather than measured diameters.
    pub delta_certified: bool,
    pub sectors: Vec<Sector>,
    /// Number of vertices moved into the head by absorption.
    pub absorbed: u64,
    /// Absorption swallowed the whole working truncation of an infinite alphabet.
    pub finite_residual: bool,
    /// Level-(k−1) sectors meeting each sector; a single entry when nesting is sound.
    pub parents: Vec<Vec<usize>>,
    /// Number of non-finite components when the truncation is halved.
    pub count_at_half: Option<usize>,
}

impl SectorLevel {
    pub fn count_grows(&self) -> bool {
        self.count_at_half.is_some_and(|c| c < self.sectors.len())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorDecomposition {
    #[serde(skip)]
    spec: ShiftSpec,
    #[serde(skip)]
    vm: VertexMetric,
    pub n_max: u64,
    pub levels: Vec<SectorLevel>,
}

impl SectorDecomposition {
    pub fn spec(&self) -> &ShiftSpec {
        &self.spec
    }

    pub fn metric(&self) -> &VertexMetric {
        &self.vm
    }

    /// Parent of each sector at level `k ≥ 1`, when unique.
    pub fn nesting(&self, k: usize) -> Vec<Option<usize>> {
        self.levels[k]
            .parents
            .iter()
            .map(|p| (p.len() == 1).then(|| p[0]))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorVerdict {
    Sectorial,
    NotSectorial,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectorWitness {
    CrossSectorEdge { level: usize, from: VertexId, to: VertexId },
    DiameterExcess { level: usize, sector: usize, diameter: f64, delta: f64 },
    NonUniqueParent { level: usize, sector: usize, parents: Vec<usize> },
    FiniteResidual { level: usize, requested_cutoff: u64, absorbed_to: u64 },
    /// At every level the tail is one connected sector containing a pair at
    /// distance ≥ `floor`.
    NonShrinkingDiameter { floor: f64, pairs: Vec<(usize, VertexId, VertexId, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorCertificate {
    pub verdict: SectorVerdict,
    pub witness: Option<SectorWitness>,
    pub reason: Option<String>,
}

impl SectorCertificate {
    fn fail(w: SectorWitness) -> Self {
        SectorCertificate {
            verdict: SectorVerdict::NotSectorial,
            witness: Some(w),
            reason: None,
        }
    }

    fn inconclusive(reason: impl Into<String>) -> Self {
        SectorCertificate {
            verdict: SectorVerdict::Inconclusive,
            witness: None,
            reason: Some(reason.into()),
        }
    }

    pub fn is_sectorial(&self) -> bool {
        self.verdict == SectorVerdict::Sectorial
    }
}

/// A nested sequence of sectors, one per level, naming one boundary point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorChain {
    pub name: String,
    /// Sector index at each level.
    pub sectors: Vec<usize>,
    pub diameters: Vec<f64>,
    /// Deepest member, used as a stand-in for the boundary point.
    pub anchor: VertexId,
}

/// Successor lists of vertices 1..=n_max, zero-based.
fn raw_graph(spec: &ShiftSpec, n_max: u64) -> Vec<Vec<usize>> {
    (1..=n_max)
        .map(|i| {
            spec.successors_upto(VertexId::from_index(i), n_max)
                .into_iter()
                .map(|v| v.get() as usize - 1)
                .collect()
        })
        .collect()
}

fn contiguous(members: &[VertexId], lo: u64, hi: u64) -> bool {
    members.len() as u64 == hi + 1 - lo && members.first().map(|v| v.get()) == Some(lo)
}

/// Generator certificate for one component of the tail above `cutoff`.
fn certify(spec: &ShiftSpec, members: &[VertexId], cutoff: u64, n_max: u64) -> (Extent, Option<SectorShape>) {
    let Some(gen) = spec.generator() else {
        return (Extent::Finite, None);
    };
    if spec.finite_size().is_some() {
        return (Extent::Finite, None);
    }
    match gen {
        Generator::Renewal | Generator::BackwardsRenewal | Generator::RandomWalk | Generator::BirthDeath => {
            if contiguous(members, cutoff + 1, n_max) {
                (Extent::Infinite, Some(SectorShape::Tail { above: cutoff }))
            } else {
                (Extent::Unknown, None)
            }
        }
        Generator::DoubleRenewal => {
            let z: Vec<i64> = members.iter().map(|v| decode_integer(v.get())).collect();
            let positive = z[0] > 0;
            if z.iter().any(|&x| (x > 0) != positive || x == 0) {
                return (Extent::Unknown, None);
            }
            let mut a: Vec<u64> = z.iter().map(|x| x.unsigned_abs()).collect();
            a.sort_unstable();
            let lo = a[0];
            // largest |z| of this sign inside the truncation
            let hi = if positive { n_max / 2 } else { (n_max - 1) / 2 };
            let ok = a.len() as u64 == hi + 1 - lo && a.windows(2).all(|w| w[1] == w[0] + 1);
            if ok {
                (Extent::Infinite, Some(SectorShape::SignedTail { positive, min_abs: lo }))
            } else {
                (Extent::Unknown, None)
            }
        }
        Generator::DyadicTree => {
            let suffix = tree_word(members[0].get());
            let ends = |v: &VertexId| tree_word(v.get()).ends_with(&suffix);
            if !suffix.is_empty() && members.iter().all(ends) {
                let s: String = suffix.iter().map(|d| char::from(b'0' + d)).collect();
                (Extent::Infinite, Some(SectorShape::SuffixClass { suffix: s }))
            } else {
                (Extent::Unknown, None)
            }
        }
        Generator::LoopSystem { .. } => {
            // the base vertex is index 1; without it only loop segments remain
            if members[0].get() > 1 {
                (Extent::Finite, None)
            } else {
                (Extent::Unknown, None)
            }
        }
    }
}

fn certified_bound(vm: &VertexMetric, shape: &SectorShape, members: &[VertexId]) -> Option<f64> {
    match (vm, shape) {
        (VertexMetric::Zargaryan, _) => Some(1.0 / members[0].get() as f64),
        (VertexMetric::DoubleRenewal, SectorShape::SignedTail { min_abs, .. }) => Some(1.0 / *min_abs as f64),
        (VertexMetric::TreeBackward, SectorShape::SuffixClass { suffix }) => Some(1.0 / suffix.len() as f64),
        _ => None,
    }
}

fn components(succ: &[Vec<usize>], cutoff: u64) -> Vec<Vec<VertexId>> {
    let keep: Vec<bool> = (1..=succ.len() as u64).map(|i| i > cutoff).collect();
    let mut comps: Vec<Vec<VertexId>> = graph::weak_components(succ, &keep)
        .into_iter()
        .map(|c| {
            let mut m: Vec<VertexId> = c.into_iter().map(|u| VertexId::from_index(u as u64 + 1)).collect();
            m.sort_unstable();
            m
        })
        .collect();
    comps.sort();
    comps
}

fn build_level(
    spec: &ShiftSpec,
    vm: &VertexMetric,
    succ: &[Vec<usize>],
    k: usize,
    requested: u64,
    n_max: u64,
) -> Result<SectorLevel> {
    let mut cutoff = requested;
    let mut comps;
    loop {
        comps = components(succ, cutoff)
            .into_iter()
            .map(|m| {
                let (e, s) = certify(spec, &m, cutoff, n_max);
                (m, e, s)
            })
            .collect::<Vec<_>>();
        let top = comps
            .iter()
            .filter(|c| c.1 == Extent::Finite)
            .filter_map(|c| c.0.last())
            .max()
            .map(|v| v.get());
        match top {
            Some(t) if t > cutoff => cutoff = t,
            _ => break,
        }
    }
    comps.retain(|c| c.1 != Extent::Finite);
    let finite_residual = cutoff >= n_max && spec.finite_size().is_none();

    let mut sectors = Vec::with_capacity(comps.len());
    for (members, extent, shape) in comps {
        let diameter = vertex_set_diameter(vm, &members)?;
        let bound = shape.as_ref().and_then(|s| certified_bound(vm, s, &members));
        sectors.push(Sector {
            members,
            extent,
            shape,
            diameter,
            bound,
        });
    }
    let delta_certified = !sectors.is_empty() && sectors.iter().all(|s| s.bound.is_some());
    let delta = if delta_certified {
        sectors.iter().filter_map(|s| s.bound).fold(0.0, f64::max)
    } else {
        sectors.iter().map(|s| s.diameter).fold(0.0, f64::max)
    };

    let count_at_half = (requested < n_max / 2).then(|| {
        let half = n_max / 2;
        let sub: Vec<Vec<usize>> = succ[..half as usize]
            .iter()
            .map(|s| s.iter().copied().filter(|&v| (v as u64) < half).collect())
            .collect();
        components(&sub, requested)
            .iter()
            .filter(|m| certify(spec, m, requested, half).0 != Extent::Finite)
            .count()
    });

    Ok(SectorLevel {
        k,
        cutoff,
        requested_cutoff: requested,
        delta,
        delta_certified,
        sectors,
        absorbed: cutoff - requested,
        finite_residual,
        parents: Vec::new(),
        count_at_half,
    })
}

/// Sector levels at the given cutoffs inside the truncation {1..n_max}.
pub fn decompose(spec: &ShiftSpec, vm: &VertexMetric, cutoffs: &[u64], n_max: u64) -> Result<SectorDecomposition> {
    decompose_threaded(spec, vm, cutoffs, n_max, 1)
}

pub fn decompose_threaded(
    spec: &ShiftSpec,
    vm: &VertexMetric,
    cutoffs: &[u64],
    n_max: u64,
    threads: usize,
) -> Result<SectorDecomposition> {
    if cutoffs.is_empty() {
        return Err(Error::invalid("at least one cutoff is required"));
    }
    if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("cutoffs must be strictly increasing"));
    }
    let n_max = spec.finite_size().map_or(n_max, |n| n.min(n_max));
    if *cutoffs.last().unwrap() >= n_max {
        return Err(Error::invalid(format!("largest cutoff must be below N_max = {n_max}")));
    }
    vm.check_compatible(spec)?;
    let succ = raw_graph(spec, n_max);
    let indexed: Vec<(usize, u64)> = cutoffs.iter().copied().enumerate().collect();
    let mut levels = parallel_map(&indexed, threads, |(k, c)| build_level(spec, vm, &succ, k, c, n_max))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut owner = vec![usize::MAX; n_max as usize + 1];
    for k in 0..levels.len() {
        if k > 0 {
            let parents = levels[k]
                .sectors
                .iter()
                .map(|s| {
                    let mut p: Vec<usize> = s
                        .members
                        .iter()
                        .map(|v| owner[v.get() as usize])
                        .filter(|&o| o != usize::MAX)
                        .collect();
                    p.sort_unstable();
                    p.dedup();
                    p
                })
                .collect();
            levels[k].parents = parents;
        }
        owner.fill(usize::MAX);
        for (i, s) in levels[k].sectors.iter().enumerate() {
            for v in &s.members {
                owner[v.get() as usize] = i;
            }
        }
    }
    Ok(SectorDecomposition {
        spec: spec.clone(),
        vm: vm.clone(),
        n_max,
        levels,
    })
}

/// Checks every clause of the sector definition at desk scale.
pub fn verify(dec: &SectorDecomposition) -> SectorCertificate {
    let succ = raw_graph(&dec.spec, dec.n_max);
    let n = dec.n_max as usize;

    for level in &dec.levels {
        if level.finite_residual {
            return SectorCertificate::fail(SectorWitness::FiniteResidual {
                level: level.k,
                requested_cutoff: level.requested_cutoff,
                absorbed_to: level.cutoff,
            });
        }
        let mut owner = vec![usize::MAX; n];
        for (i, s) in level.sectors.iter().enumerate() {
            for v in &s.members {
                owner[v.get() as usize - 1] = i;
            }
        }
        for u in level.cutoff as usize..n {
            for &w in &succ[u] {
                if w >= level.cutoff as usize && owner[u] != owner[w] {
                    return SectorCertificate::fail(SectorWitness::CrossSectorEdge {
                        level: level.k,
                        from: VertexId::from_index(u as u64 + 1),
                        to: VertexId::from_index(w as u64 + 1),
                    });
                }
            }
        }
        if level.delta_certified {
            for (i, s) in level.sectors.iter().enumerate() {
                if s.diameter >= level.delta {
                    return SectorCertificate::fail(SectorWitness::DiameterExcess {
                        level: level.k,
                        sector: i,
                        diameter: s.diameter,
                        delta: level.delta,
                    });
                }
            }
        }
        if level.k > 0 {
            for (i, p) in level.parents.iter().enumerate() {
                if p.len() != 1 {
                    return SectorCertificate::fail(SectorWitness::NonUniqueParent {
                        level: level.k,
                        sector: i,
                        parents: p.clone(),
                    });
                }
            }
        }
    }

    if dec.levels.windows(2).any(|w| w[0].cutoff >= w[1].cutoff) {
        return SectorCertificate::inconclusive("effective cutoffs are not strictly increasing after absorption");
    }

    let shrinking = dec.levels.iter().all(|l| l.delta_certified)
        && dec.levels.windows(2).all(|w| w[1].delta < w[0].delta);
    if !shrinking {
        if let Some(w) = non_shrinking_witness(dec) {
            return SectorCertificate::fail(w);
        }
        return SectorCertificate::inconclusive("no certified diameter bound tending to 0");
    }
    if dec.levels.iter().any(|l| l.sectors.is_empty()) {
        return SectorCertificate::inconclusive("a level has no sectors");
    }
    if dec
        .levels
        .iter()
        .flat_map(|l| &l.sectors)
        .any(|s| s.extent != Extent::Infinite)
    {
        return SectorCertificate::inconclusive("a sector lacks an infiniteness certificate");
    }
    SectorCertificate {
        verdict: SectorVerdict::Sectorial,
        witness: None,
        reason: None,
    }
}

/// Every level's tail is one sector and the metric keeps a pair of distant
/// vertices beyond every cutoff, so no choice of cutoffs can shrink it.
fn non_shrinking_witness(dec: &SectorDecomposition) -> Option<SectorWitness> {
    let mut floor = f64::INFINITY;
    let mut pairs = Vec::new();
    for level in &dec.levels {
        let [s] = level.sectors.as_slice() else {
            return None;
        };
        if !matches!(s.shape, Some(SectorShape::Tail { .. })) {
            return None;
        }
        let (c, a, b) = dec.vm.non_vanishing_witness(level.cutoff + 1)?;
        if a.get() > dec.n_max || b.get() > dec.n_max {
            return None;
        }
        let r = dec.vm.rho(a, b).ok()?;
        if r < c {
            return None;
        }
        floor = floor.min(c);
        pairs.push((level.k, a, b, r));
    }
    (!pairs.is_empty()).then_some(SectorWitness::NonShrinkingDiameter { floor, pairs })
}

/// One chain per sector of the last level, followed up through the nesting.
pub fn boundary_chains(dec: &SectorDecomposition) -> Result<Vec<SectorChain>> {
    if !verify(dec).is_sectorial() {
        return Err(Error::Unverified);
    }
    let last = dec.levels.len() - 1;
    let mut chains: Vec<SectorChain> = (0..dec.levels[last].sectors.len())
        .map(|i| {
            let mut idx = vec![i];
            for k in (1..=last).rev() {
                let parent = dec.levels[k].parents[*idx.last().unwrap()][0];
                idx.push(parent);
            }
            idx.reverse();
            let deepest = &dec.levels[last].sectors[i];
            SectorChain {
                name: deepest.shape.as_ref().map(|s| s.point_name()).unwrap_or_default(),
                diameters: idx
                    .iter()
                    .enumerate()
                    .map(|(k, &j)| dec.levels[k].sectors[j].diameter)
                    .collect(),
                sectors: idx,
                anchor: *deepest.members.last().unwrap(),
            }
        })
        .collect();
    for i in 0..chains.len() {
        let clash = chains.iter().filter(|c| c.name == chains[i].name).count() > 1;
        if chains[i].name.is_empty() || clash {
            chains[i].name = format!("{}#{i}", chains[i].name);
        }
    }
    Ok(chains)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::{encode_integer, LoopCounts};

    fn gen(g: Generator) -> ShiftSpec {
        ShiftSpec::Generator(g)
    }

    #[test]
    fn renewal_has_one_shrinking_tail() {
        let dec = decompose(&gen(Generator::Renewal), &VertexMetric::Zargaryan, &[4, 16, 64], 512).unwrap();
        for l in &dec.levels {
            assert_eq!(l.sectors.len(), 1);
            assert_eq!(l.sectors[0].members.len() as u64, 512 - l.cutoff);
            // independent: sup of |1/i − 1/j| over the tail is 1/(N+1) − 1/512
            let d = 1.0 / (l.cutoff + 1) as f64 - 1.0 / 512.0;
            assert!((l.sectors[0].diameter - d).abs() < 1e-15);
            assert!(l.sectors[0].diameter < l.delta);
        }
        assert!(verify(&dec).is_sectorial());
        let chains = boundary_chains(&dec).unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].name, "inf");
    }

    #[test]
    fn double_renewal_has_two_signed_tails() {
        let dec = decompose(&gen(Generator::DoubleRenewal), &VertexMetric::DoubleRenewal, &[2, 4, 8], 200).unwrap();
        for l in &dec.levels {
            assert_eq!(l.sectors.len(), 2);
            for s in &l.sectors {
                let z: Vec<i64> = s.members.iter().map(|v| decode_integer(v.get())).collect();
                assert!(z.iter().all(|&x| x > 0) || z.iter().all(|&x| x < 0));
                assert!(s.members.iter().all(|v| v.get() > l.cutoff));
            }
        }
        assert_eq!(dec.nesting(1), vec![Some(0), Some(1)]);
        let cert = verify(&dec);
        assert!(cert.is_sectorial(), "{cert:?}");
        let mut names: Vec<String> = boundary_chains(&dec).unwrap().into_iter().map(|c| c.name).collect();
        names.sort();
        assert_eq!(names, ["+inf", "-inf"]);
    }

    #[test]
    fn tree_levels_are_suffix_classes() {
        let dec = decompose(&gen(Generator::DyadicTree), &VertexMetric::TreeBackward, &[1, 3, 7], 1023).unwrap();
        for (k, l) in dec.levels.iter().enumerate() {
            assert_eq!(l.sectors.len(), 1 << (k + 1));
            for s in &l.sectors {
                let suffix = tree_word(s.members[0].get());
                assert_eq!(suffix.len(), k + 1);
                assert!(s.members.iter().all(|v| tree_word(v.get()).ends_with(&suffix)));
            }
        }
        assert!(verify(&dec).is_sectorial());
        assert_eq!(boundary_chains(&dec).unwrap().len(), 8);
    }

    #[test]
    fn birth_death_parity_is_not_sectorial() {
        let dec = decompose(&gen(Generator::BirthDeath), &VertexMetric::BirthDeathParity, &[4, 16, 64], 256).unwrap();
        let cert = verify(&dec);
        assert_eq!(cert.verdict, SectorVerdict::NotSectorial);
        match cert.witness {
            Some(SectorWitness::NonShrinkingDiameter { floor, pairs }) => {
                assert_eq!(floor, 1.0);
                assert_eq!(pairs.len(), 3);
                for (_, a, b, r) in pairs {
                    assert_eq!(a.get().abs_diff(b.get()) % 2, 1);
                    assert_eq!(r, 1.0);
                }
            }
            w => panic!("unexpected witness {w:?}"),
        }
        assert_eq!(boundary_chains(&dec), Err(Error::Unverified));
    }

    #[test]
    fn loop_system_leaves_only_finite_residue() {
        let spec = gen(Generator::LoopSystem {
            counts: LoopCounts::Linear,
        });
        let vm = VertexMetric::Circle {
            counts: LoopCounts::Linear,
            radii: None,
        };
        let dec = decompose(&spec, &vm, &[4, 16], 256).unwrap();
        assert!(dec.levels.iter().all(|l| l.finite_residual && l.sectors.is_empty()));
        assert!(matches!(
            verify(&dec).witness,
            Some(SectorWitness::FiniteResidual { .. })
        ));
    }

    #[test]
    fn discrete_metric_on_renewal_is_not_sectorial() {
        let dec = decompose(&gen(Generator::Renewal), &VertexMetric::Discrete, &[4, 8], 64).unwrap();
        assert_eq!(verify(&dec).verdict, SectorVerdict::NotSectorial);
    }

    #[test]
    fn rejects_bad_cutoffs() {
        let r = gen(Generator::Renewal);
        assert!(decompose(&r, &VertexMetric::Zargaryan, &[4, 4], 64).is_err());
        assert!(decompose(&r, &VertexMetric::Zargaryan, &[4, 64], 64).is_err());
        assert!(decompose(&r, &VertexMetric::Zargaryan, &[], 64).is_err());
    }

    #[test]
    fn signed_tails_are_certified_only_when_complete() {
        let spec = gen(Generator::DoubleRenewal);
        let pos: Vec<VertexId> = (3..=5).map(|z| VertexId::from_index(encode_integer(z))).collect();
        assert_eq!(certify(&spec, &pos, 4, 10).0, Extent::Infinite);
        assert_eq!(certify(&spec, &pos, 4, 20).0, Extent::Unknown);
    }
}
