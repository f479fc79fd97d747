//! Vertex metrics ρ, their classification, and the induced shift metric
//! d_{ρ,θ}(x, y) = Σ θⁿ ρ(xₙ, yₙ).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift::{decode_integer, loop_position, tree_word, Generator, LoopCounts, ShiftSpec, VertexId, Word};

/// Built-in vertex metric families. Every family takes values in [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum VertexMetric {
    /// ρ(a, b) = |1/a − 1/b|.
    Zargaryan,
    /// ρ(a, b) = 1 for a ≠ b.
    Discrete,
    /// Tree vertices `<w2>`: 1 / (1 + first disagreement counted from the end).
    TreeBackward,
    /// Signed alphabet: 1 across the sign change, |1/a − 1/b| on each side.
    DoubleRenewal,
    /// 1 if |a − b| is odd, |1/a − 1/b| otherwise.
    BirthDeathParity,
    /// Explicit planar placement of vertices 1..=n, ρ = min(1, Euclidean).
    Embedding { points: Vec<[f64; 2]> },
    /// Renewal vertices placed on a two-sided zig-zag accumulating on a segment.
    #[serde(rename = "zigzag_2")]
    ZigZag2,
    /// Renewal vertices placed on the periodic four-curve zig-zag.
    #[serde(rename = "zigzag_3")]
    ZigZag3,
    /// Loop system with each loop equidistributed on its own circle.
    Circle {
        #[serde(default)]
        counts: LoopCounts,
        /// Radii of the circles by loop ordinal; default `1 − 2^{−ℓ}`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radii: Option<Vec<f64>>,
    },
}

/// x-coordinates of the four-curve zig-zag pattern, indexed by vertex mod 6.
const ZIGZAG3_PATTERN: [f64; 6] = [0.0, 1.0, 0.0, 0.5, 1.0, 0.5];

impl VertexMetric {
    pub fn name(&self) -> &'static str {
        match self {
            VertexMetric::Zargaryan => "zargaryan",
            VertexMetric::Discrete => "discrete",
            VertexMetric::TreeBackward => "tree_backward",
            VertexMetric::DoubleRenewal => "double_renewal",
            VertexMetric::BirthDeathParity => "birth_death_parity",
            VertexMetric::Embedding { .. } => "embedding",
            VertexMetric::ZigZag2 => "zigzag_2",
            VertexMetric::ZigZag3 => "zigzag_3",
            VertexMetric::Circle { .. } => "circle",
        }
    }

    /// Number of vertices the family is defined on, if finite.
    pub fn domain_size(&self) -> Option<u64> {
        match self {
            VertexMetric::Embedding { points } => Some(points.len() as u64),
            VertexMetric::Circle { counts, radii } => {
                let spec = ShiftSpec::Generator(Generator::LoopSystem {
                    counts: counts.clone(),
                });
                let by_counts = spec.finite_size();
                match radii {
                    // base vertex plus every loop whose ordinal has a radius
                    Some(r) => {
                        let mut last = 1u64;
                        let mut i = 2u64;
                        while let Some(p) = loop_position(counts, i) {
                            if p.ordinal > r.len() as u64 {
                                break;
                            }
                            last = i;
                            i += 1;
                            if by_counts.is_some_and(|n| i > n) {
                                break;
                            }
                        }
                        Some(last)
                    }
                    None => by_counts,
                }
            }
            _ => None,
        }
    }

    fn outside(&self, v: VertexId) -> Error {
        Error::LabelOutsideFamily {
            family: self.name().to_string(),
            label: v.to_string(),
        }
    }

    fn check(&self, v: VertexId) -> Result<()> {
        match self.domain_size() {
            Some(n) if v.get() > n => Err(self.outside(v)),
            _ => Ok(()),
        }
    }

    /// Planar position of a vertex for the embedding-based families.
    pub fn position(&self, v: VertexId) -> Result<Option<[f64; 2]>> {
        self.check(v)?;
        let i = v.get();
        Ok(match self {
            VertexMetric::Embedding { points } => Some(points[i as usize - 1]),
            VertexMetric::ZigZag2 => Some([((i - 1) % 2) as f64, -1.0 / i as f64]),
            VertexMetric::ZigZag3 => Some([ZIGZAG3_PATTERN[((i - 1) % 6) as usize], -1.0 / i as f64]),
            VertexMetric::Circle { counts, radii } => Some(match loop_position(counts, i) {
                None => [0.0, 0.0],
                Some(p) => {
                    let r = circle_radius(radii.as_deref(), p.ordinal).ok_or_else(|| self.outside(v))?;
                    let a = loop_angle(p.length, p.step);
                    [r * a.cos(), r * a.sin()]
                }
            }),
            _ => None,
        })
    }

    /// ρ(a, b).
    pub fn rho(&self, a: VertexId, b: VertexId) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Ok(0.0);
        }
        let (i, j) = (a.get(), b.get());
        let recip = |x: i64, y: i64| (1.0 / x as f64 - 1.0 / y as f64).abs();
        Ok(match self {
            VertexMetric::Zargaryan => recip(i as i64, j as i64),
            VertexMetric::Discrete => 1.0,
            VertexMetric::TreeBackward => tree_rho(&tree_word(i), &tree_word(j)),
            VertexMetric::DoubleRenewal => {
                let (x, y) = (decode_integer(i), decode_integer(j));
                if x.signum() * y.signum() <= 0 {
                    1.0
                } else {
                    recip(x, y)
                }
            }
            VertexMetric::BirthDeathParity => {
                if i.abs_diff(j) % 2 == 1 {
                    1.0
                } else {
                    recip(i as i64, j as i64)
                }
            }
            VertexMetric::Circle { counts, radii } => {
                circle_distance(counts, radii.as_deref(), i, j).ok_or_else(|| self.outside(b))?.min(1.0)
            }
            VertexMetric::Embedding { .. } | VertexMetric::ZigZag2 | VertexMetric::ZigZag3 => {
                let p = self.position(a)?.expect("embedding family");
                let q = self.position(b)?.expect("embedding family");
                (p[0] - q[0]).hypot(p[1] - q[1]).min(1.0)
            }
        })
    }

    /// Rejects metric/spec pairs whose vertex labels the family cannot read.
    pub fn check_compatible(&self, spec: &ShiftSpec) -> Result<()> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "metric family `{}` requires a {what} shift, got {}",
                    self.name(),
                    spec.describe()
                )))
            }
        };
        match self {
            VertexMetric::TreeBackward => need(matches!(spec.generator(), Some(Generator::DyadicTree)), "dyadic tree"),
            VertexMetric::DoubleRenewal => {
                need(matches!(spec.generator(), Some(Generator::DoubleRenewal)), "double renewal")
            }
            VertexMetric::Circle { counts, .. } => need(
                matches!(spec.generator(), Some(Generator::LoopSystem { counts: c }) if c == counts),
                "loop system with the same loop counts",
            ),
            _ => match (self.domain_size(), spec.finite_size()) {
                (Some(m), Some(n)) if n > m => Err(Error::invalid(format!(
                    "metric family `{}` covers {m} vertices but the shift has {n}",
                    self.name()
                ))),
                (Some(m), None) => Err(Error::invalid(format!(
                    "metric family `{}` covers only {m} vertices of an infinite alphabet",
                    self.name()
                ))),
                _ => Ok(()),
            },
        }
    }

    /// Upper bound on sup_{i,j ≥ n} ρ(i, j), if the family certifies one.
    pub fn vanishing_bound(&self, n: u64) -> Option<f64> {
        match self {
            VertexMetric::Zargaryan => Some(1.0 / n.max(1) as f64),
            VertexMetric::Embedding { points } if n > points.len() as u64 => Some(0.0),
            _ => None,
        }
    }

    /// A constant c > 0 and, for each n, a pair i, j ≥ n with ρ(i, j) ≥ c.
    /// Certifies that the family is not of vanishing type.
    pub fn non_vanishing_witness(&self, n: u64) -> Option<(f64, VertexId, VertexId)> {
        let n = n.max(1);
        let v = VertexId::from_index;
        match self {
            VertexMetric::Discrete | VertexMetric::BirthDeathParity | VertexMetric::ZigZag2 => {
                Some((1.0, v(n), v(n + 1)))
            }
            VertexMetric::TreeBackward => {
                let depth = 64 - n.leading_zeros() as u64;
                let a = 1u64 << depth;
                Some((1.0, v(a), v(a + 1)))
            }
            VertexMetric::DoubleRenewal => {
                let m = n as i64;
                Some((1.0, v(crate::shift::encode_integer(m)), v(crate::shift::encode_integer(-m))))
            }
            VertexMetric::ZigZag3 => {
                // next vertex at least n with x = 0, then the following x = 1
                let mut i = n;
                while ZIGZAG3_PATTERN[((i - 1) % 6) as usize] != 0.0 {
                    i += 1;
                }
                Some((1.0, v(i), v(i + 1)))
            }
            VertexMetric::Circle { counts, radii } => {
                if self.domain_size().is_some() {
                    return None;
                }
                // first loop at or beyond n with at least two vertices, on a circle of radius ≥ 1/2
                let mut i = n.max(2);
                loop {
                    let p = loop_position(counts, i)?;
                    let r = circle_radius(radii.as_deref(), p.ordinal)?;
                    if p.length >= 3 && p.step == 1 && r >= 0.5 {
                        let far = p.first_index + (p.length - 1) / 2;
                        return Some((0.5, v(i), v(far)));
                    }
                    i += 1;
                    if i > n.saturating_mul(64).max(1 << 16) {
                        return None;
                    }
                }
            }
            VertexMetric::Zargaryan | VertexMetric::Embedding { .. } => None,
        }
    }

    /// Family-level total-boundedness certificate.
    pub fn totally_bounded_certificate(&self) -> Option<bool> {
        Some(!matches!(self, VertexMetric::Discrete))
    }
}

fn tree_rho(w: &[u8], w2: &[u8]) -> f64 {
    if w == w2 {
        return 0.0;
    }
    let (n, m) = (w.len(), w2.len());
    let mut i = 0;
    loop {
        // symbols read from the end; missing positions are the padding ε
        let a = (i < n).then(|| w[n - 1 - i]);
        let b = (i < m).then(|| w2[m - 1 - i]);
        if a != b {
            return 1.0 / (1.0 + i as f64);
        }
        i += 1;
    }
}

/// Radius of circle number `ordinal`, or `None` past the end of a given list.
fn circle_radius(radii: Option<&[f64]>, ordinal: u64) -> Option<f64> {
    match radii {
        Some(r) => r.get(ordinal as usize - 1).copied(),
        None => Some(1.0 - 0.5f64.powi(ordinal.min(1100) as i32)),
    }
}

/// 1 − radius, computed without cancellation for the default radii.
fn circle_gap(radii: Option<&[f64]>, ordinal: u64) -> Option<f64> {
    match radii {
        Some(r) => r.get(ordinal as usize - 1).map(|x| 1.0 - x),
        None => Some(0.5f64.powi(ordinal.min(1100) as i32)),
    }
}

fn loop_angle(length: u64, step: u64) -> f64 {
    2.0 * PI * (step - 1) as f64 / (length - 1) as f64
}

fn circle_distance(counts: &LoopCounts, radii: Option<&[f64]>, i: u64, j: u64) -> Option<f64> {
    match (loop_position(counts, i), loop_position(counts, j)) {
        (None, None) => Some(0.0),
        (None, Some(p)) | (Some(p), None) => circle_radius(radii, p.ordinal),
        (Some(p), Some(q)) => {
            let (ra, rb) = (circle_radius(radii, p.ordinal)?, circle_radius(radii, q.ordinal)?);
            let dr = circle_gap(radii, q.ordinal)? - circle_gap(radii, p.ordinal)?;
            let half = 0.5 * (loop_angle(p.length, p.step) - loop_angle(q.length, q.step));
            let chord = 2.0 * (ra * rb).sqrt() * half.sin().abs();
            Some(dr.hypot(chord))
        }
    }
}

/// Three-valued verdict of a desk-scale probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub verdict: Verdict,
    pub witness: String,
    /// (n, s(n)) with s(n) = sup_{n ≤ i,j ≤ N_max} ρ(i, j).
    pub probes: Vec<(u64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetProbe {
    pub eps: f64,
    pub n: u64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TotalBoundednessReport {
    pub verdict: Verdict,
    pub witness: String,
    pub nets: Vec<NetProbe>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricClassification {
    pub vanishing: VanishingReport,
    pub totally_bounded: TotalBoundednessReport,
}

/// Probe grid 1, 2, 4, … capped at `n_max`, always ending at `n_max`.
fn doubling_grid(n_max: u64) -> Vec<u64> {
    let mut g = Vec::new();
    let mut n = 1u64;
    while n < n_max {
        g.push(n);
        n *= 2;
    }
    g.push(n_max);
    g
}

/// Greedy first-fit ε-net over {1..n}: a vertex joins the net unless it is
/// already within ε of a net point.
pub fn greedy_net(vm: &VertexMetric, n: u64, eps: f64) -> Result<Vec<VertexId>> {
    let mut net: Vec<VertexId> = Vec::new();
    for i in 1..=n {
        let v = VertexId::from_index(i);
        let mut covered = false;
        for &c in &net {
            if vm.rho(v, c)? <= eps {
                covered = true;
                break;
            }
        }
        if !covered {
            net.push(v);
        }
    }
    Ok(net)
}

/// Desk-scale classification: vanishing type and total boundedness.
pub fn classify(vm: &VertexMetric, n_max: u64, eps_grid: &[f64]) -> Result<MetricClassification> {
    if n_max < 2 {
        return Err(Error::invalid("classification needs N_max >= 2"));
    }
    if eps_grid.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::invalid("epsilon grid must be positive"));
    }
    let n_max = vm.domain_size().map_or(n_max, |d| d.min(n_max)).max(1);
    let grid = doubling_grid(n_max);

    let mut probes = Vec::with_capacity(grid.len());
    for &n in &grid {
        let mut s = 0.0f64;
        for i in n..=n_max {
            for j in i + 1..=n_max {
                s = s.max(vm.rho(VertexId::from_index(i), VertexId::from_index(j))?);
            }
        }
        probes.push((n, s));
    }

    let finite = vm.domain_size();
    let vanishing = if let Some(d) = finite {
        VanishingReport {
            verdict: Verdict::Yes,
            witness: format!("finite alphabet of {d} vertices"),
            probes,
        }
    } else if vm.vanishing_bound(1).is_some() {
        let violated = probes
            .iter()
            .find(|&&(n, s)| s > vm.vanishing_bound(n).unwrap() + 1e-15);
        match violated {
            None => VanishingReport {
                verdict: Verdict::Yes,
                witness: "sup over i,j >= n bounded by the family bound 1/n".into(),
                probes,
            },
            Some(&(n, s)) => VanishingReport {
                verdict: Verdict::Inconclusive,
                witness: format!("family bound violated numerically at n={n}: s(n)={s}"),
                probes,
            },
        }
    } else if let Some(c) = non_vanishing_floor(vm, &grid)? {
        VanishingReport {
            verdict: Verdict::No,
            witness: c,
            probes,
        }
    } else {
        VanishingReport {
            verdict: Verdict::Inconclusive,
            witness: "no family certificate; numeric trend only".into(),
            probes,
        }
    };

    let mut nets = Vec::new();
    for &eps in eps_grid {
        for &n in &grid {
            nets.push(NetProbe {
                eps,
                n,
                size: greedy_net(vm, n, eps)?.len(),
            });
        }
    }
    let totally_bounded = match (vanishing.verdict, vm.totally_bounded_certificate()) {
        (Verdict::Yes, _) => TotalBoundednessReport {
            verdict: Verdict::Yes,
            witness: if finite.is_some() {
                "finite alphabet".into()
            } else {
                "vanishing type implies totally bounded".into()
            },
            nets,
        },
        (_, Some(true)) => TotalBoundednessReport {
            verdict: Verdict::Yes,
            witness: format!("family `{}` has a finite cover at every scale", vm.name()),
            nets,
        },
        (_, Some(false)) => TotalBoundednessReport {
            verdict: Verdict::No,
            witness: "distinct vertices are at distance 1, so an eps-net of {1..N} has N points for eps < 1"
                .into(),
            nets,
        },
        (_, None) => {
            // stabilisation of the last two net sizes for every eps
            let stable = eps_grid.iter().all(|&e| {
                let sizes: Vec<usize> = nets.iter().filter(|p| p.eps == e).map(|p| p.size).collect();
                sizes.len() >= 2 && sizes[sizes.len() - 1] == sizes[sizes.len() - 2]
            });
            TotalBoundednessReport {
                verdict: if stable { Verdict::Yes } else { Verdict::Inconclusive },
                witness: if stable {
                    "net sizes stabilised across N".into()
                } else {
                    "net sizes still growing at N_max".into()
                },
                nets,
            }
        }
    };
    debug_assert!(vanishing.verdict != Verdict::Yes || totally_bounded.verdict == Verdict::Yes);
    Ok(MetricClassification {
        vanishing,
        totally_bounded,
    })
}

fn non_vanishing_floor(vm: &VertexMetric, grid: &[u64]) -> Result<Option<String>> {
    let mut floor = None;
    for &n in grid {
        let Some((c, a, b)) = vm.non_vanishing_witness(n) else {
            return Ok(None);
        };
        if a.get() < n || b.get() < n || vm.rho(a, b)? < c {
            return Ok(None);
        }
        floor = Some(c);
    }
    Ok(floor.map(|c| format!("pairs beyond every probed n at distance >= {c}")))
}

/// ρ together with the weight θ of the induced sequence metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftMetric {
    pub vm: VertexMetric,
    pub theta: f64,
}

impl ShiftMetric {
    pub fn new(vm: VertexMetric, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::invalid(format!("theta must lie in (0,1), got {theta}")));
        }
        Ok(ShiftMetric { vm, theta })
    }

    /// θᴺ / (1 − θ): bound on the contribution of coordinates N, N+1, ….
    pub fn tail_bound(&self, n: usize) -> f64 {
        self.theta.powi(n as i32) / (1.0 - self.theta)
    }
}

/// Partial sum of d_{ρ,θ} over the first `n` coordinates and the tail bound;
/// the true distance of any extensions lies in [value, value + tail].
pub fn shift_distance(sm: &ShiftMetric, x: &Word, y: &Word, n: usize) -> Result<(f64, f64)> {
    let got = x.len().min(y.len());
    if got < n {
        return Err(Error::WordTooShort { needed: n, got });
    }
    let mut value = 0.0;
    let mut w = 1.0;
    for k in 0..n {
        value += w * sm.vm.rho(x.symbols()[k], y.symbols()[k])?;
        w *= sm.theta;
    }
    Ok((value, sm.tail_bound(n)))
}

/// Largest pairwise distance in a finite vertex set.
pub fn vertex_set_diameter(vm: &VertexMetric, set: &[VertexId]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::invalid("diameter of an empty vertex set"));
    }
    let mut d = 0.0f64;
    for (k, &a) in set.iter().enumerate() {
        for &b in &set[k + 1..] {
            d = d.max(vm.rho(a, b)?);
        }
    }
    Ok(d)
}
