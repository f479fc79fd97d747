//! Pressure along lines φ + tψ: one-sided derivatives, kink detection and the
//! basic axioms of the pressure functional.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph;
use crate::potential::Potential;
use crate::pressure::{parallel_map, sft_pressure, Method};
use crate::shift::{enumerate_words, TruncatedSFT};

/// Uniform grid `from, from + step, …` up to `to` (inclusive within rounding).
pub fn uniform_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !from.is_finite() || !to.is_finite() || to < from {
        return Err(Error::invalid("grid needs finite from <= to and a positive step"));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + i as f64 * step).collect())
}

/// Parses `from:to:step`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(Error::invalid(format!("grid `{s}` is not of the form from:to:step")));
    };
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("grid `{s}`: `{x}` is not a number")))
    };
    uniform_grid(num(a)?, num(b)?, num(c)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PressureCurve {
    pub phi: Potential,
    pub psi: Potential,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub backend: Method,
    pub params: BTreeMap<String, f64>,
}

impl PressureCurve {
    /// P(t+Δ) − 2P(t) + P(t−Δ) at interior grid points; `None` at the ends.
    pub fn second_differences(&self) -> Vec<Option<f64>> {
        let v = &self.values;
        (0..v.len())
            .map(|i| (i > 0 && i + 1 < v.len()).then(|| v[i + 1] - 2.0 * v[i] + v[i - 1]))
            .collect()
    }
}

/// P(φ + tψ) at each grid point.
pub fn pressure_curve(t: &TruncatedSFT, phi: &Potential, psi: &Potential, grid: &[f64]) -> Result<PressureCurve> {
    pressure_curve_threaded(t, phi, psi, grid, 1)
}

pub fn pressure_curve_threaded(
    t: &TruncatedSFT,
    phi: &Potential,
    psi: &Potential,
    grid: &[f64],
    threads: usize,
) -> Result<PressureCurve> {
    if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("grid must be non-empty and finite"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("grid must be strictly increasing"));
    }
    let values = parallel_map(grid, threads, |s| sft_pressure(t, &phi.plus_scaled(s, psi)).map(|e| e.value))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(PressureCurve {
        phi: phi.clone(),
        psi: psi.clone(),
        grid: grid.to_vec(),
        values,
        backend: Method::Spectral,
        params: BTreeMap::from([("N".to_string(), t.bound() as f64)]),
    })
}

/// One-sided difference quotients of t ↦ P(φ + tψ) at t = 0.
pub fn gateaux_derivative(t: &TruncatedSFT, phi: &Potential, psi: &Potential, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) {
        return Err(Error::invalid("step h must be positive"));
    }
    let p = |s: f64| sft_pressure(t, &phi.plus_scaled(s, psi)).map(|e| e.value);
    let (lo, mid, hi) = (p(-h)?, p(0.0)?, p(h)?);
    Ok(((mid - lo) / h, (hi - mid) / h))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinkReport {
    pub tol: f64,
    pub locations: Vec<f64>,
    /// (left, right) slopes at each location.
    pub slopes: Vec<(f64, f64)>,
}

/// Grid points where the slope jumps. A point is reported when its second
/// difference exceeds tol·Δ, the slope gap exceeds tol, and the gap stands
/// out from its neighbours by more than tol; smooth curvature raises
/// neighbouring gaps together and fails the last test.
pub fn kink_scan(c: &PressureCurve, tol: f64) -> Result<KinkReport> {
    let g = &c.grid;
    let v = &c.values;
    let mut report = KinkReport {
        tol,
        locations: Vec::new(),
        slopes: Vec::new(),
    };
    if g.len() < 3 {
        return Ok(report);
    }
    let step = g[1] - g[0];
    if g.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1.0)) {
        return Err(Error::invalid("kink scan needs a uniform grid"));
    }
    let slope = |i: usize| (v[i + 1] - v[i]) / step;
    let gap = |i: usize| slope(i) - slope(i - 1);
    let last = g.len() - 2;
    for i in 1..=last {
        let d2 = v[i + 1] - 2.0 * v[i] + v[i - 1];
        let gi = gap(i);
        if d2 <= tol * step || gi <= tol {
            continue;
        }
        let neighbours: Vec<f64> = [i.checked_sub(1).filter(|&j| j >= 1), (i < last).then_some(i + 1)]
            .into_iter()
            .flatten()
            .map(gap)
            .collect();
        let local_max = neighbours.iter().all(|&x| gi >= x);
        let floor = neighbours.iter().copied().fold(f64::INFINITY, f64::min);
        let stands_out = neighbours.is_empty() || gi - floor > tol;
        if local_max && stands_out {
            report.locations.push(g[i]);
            report.slopes.push((slope(i - 1), slope(i)));
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AxiomTally {
    pub checked: usize,
    pub failures: usize,
    pub max_violation: f64,
}

impl AxiomTally {
    fn record(&mut self, violation: f64, tol: f64) {
        self.checked += 1;
        self.max_violation = self.max_violation.max(violation);
        if violation > tol {
            self.failures += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub trials: usize,
    pub tol: f64,
    pub translation: AxiomTally,
    pub monotonicity: AxiomTally,
    pub lipschitz: AxiomTally,
    pub convexity: AxiomTally,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        [&self.translation, &self.monotonicity, &self.lipschitz, &self.convexity]
            .iter()
            .all(|a| a.failures == 0)
    }
}

/// Random locally constant potential of depth 1 or 2 with values in
/// [−scale, scale] on admissible words.
pub fn random_potential(t: &TruncatedSFT, scale: f64, rng: &mut impl Rng) -> Result<Potential> {
    let depth = rng.random_range(1..=2usize);
    random_table(t, depth, -scale, scale, rng)
}

fn random_table(t: &TruncatedSFT, depth: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Result<Potential> {
    let table = enumerate_words(t, depth)?
        .into_iter()
        .map(|w| (w.symbols().to_vec(), rng.random_range(lo..=hi)))
        .collect();
    Potential::locally_constant(depth, table, 0.0)
}

/// sup over admissible 2-words of |φ − ψ|; exact for potentials of depth ≤ 2.
fn sup_distance(t: &TruncatedSFT, a: &Potential, b: &Potential) -> Result<f64> {
    let mut d = 0.0f64;
    for w in enumerate_words(t, 2)? {
        d = d.max((a.eval_vertices(w.symbols())? - b.eval_vertices(w.symbols())?).abs());
    }
    Ok(d)
}

/// Translation, monotonicity, Lipschitz and midpoint convexity over random
/// locally constant potentials.
pub fn check_pressure_axioms(t: &TruncatedSFT, trials: usize, tol: f64, seed: u64) -> Result<AxiomReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = AxiomReport {
        trials,
        tol,
        translation: AxiomTally::default(),
        monotonicity: AxiomTally::default(),
        lipschitz: AxiomTally::default(),
        convexity: AxiomTally::default(),
    };
    let p = |q: &Potential| sft_pressure(t, q).map(|e| e.value);
    for _ in 0..trials {
        let phi = random_potential(t, 1.0, &mut rng)?;
        let psi = random_potential(t, 1.0, &mut rng)?;
        let c = rng.random_range(-2.0..=2.0);
        let (pp, ps) = (p(&phi)?, p(&psi)?);

        r.translation.record((p(&phi.shifted(c))? - pp - c).abs(), tol);

        let bump_depth = rng.random_range(1..=2usize);
        let bump = random_table(t, bump_depth, 0.0, 1.0, &mut rng)?;
        let above = phi.plus_scaled(1.0, &bump);
        r.monotonicity.record(pp - p(&above)?, tol);

        let d = sup_distance(t, &phi, &psi)?;
        r.lipschitz.record((pp - ps).abs() - d, tol);

        let mid = Potential::affine(vec![(0.5, phi.clone()), (0.5, psi.clone())], 0.0);
        r.convexity.record(p(&mid)? - 0.5 * (pp + ps), tol);
    }
    Ok(r)
}

/// A random primitive 0/1 matrix on `k` vertices, as a truncated SFT.
pub fn random_mixing_sft(k: u64, seed: u64) -> Result<TruncatedSFT> {
    if k == 0 {
        return Err(Error::invalid("need at least one vertex"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let edges: Vec<(u64, u64)> = (1..=k)
            .flat_map(|i| (1..=k).map(move |j| (i, j)))
            .filter(|_| rng.random_bool(0.5))
            .collect();
        let t = TruncatedSFT::from_edges(k, &edges)?;
        if t.len() as u64 == k && t.is_irreducible() && graph::period(t.succ_lists()) == Some(1) {
            return Ok(t);
        }
    }
    Err(Error::invalid("no primitive matrix found"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure::{equilibrium_measure, measure_free_energy};
    use crate::shift::{truncate, ShiftSpec};
    use std::f64::consts::LN_2;

    fn full2() -> TruncatedSFT {
        truncate(&ShiftSpec::full_shift(2), 2)
    }

    fn indicator(i: u64) -> Potential {
        Potential::depth_one(&[(i, 1.0)], 0.0).unwrap()
    }

    fn two_loops() -> TruncatedSFT {
        TruncatedSFT::from_edges(2, &[(1, 1), (2, 2)]).unwrap()
    }

    #[test]
    fn grids() {
        let g = parse_grid("-1:1:0.5").unwrap();
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("-1:1:0.01").unwrap().len(), 201);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn curves_with_closed_forms() {
        let t = full2();
        let c = pressure_curve(&t, &Potential::zero(), &Potential::constant(1.0), &[-1.0, 0.0, 1.0]).unwrap();
        for (x, p) in c.grid.iter().zip(&c.values) {
            assert!((p - (LN_2 + x)).abs() < 1e-12);
        }
        let grid = uniform_grid(-2.0, 2.0, 0.25).unwrap();
        let c = pressure_curve(&t, &Potential::zero(), &indicator(1), &grid).unwrap();
        for (x, p) in c.grid.iter().zip(&c.values) {
            assert!((p - (x.exp() + 1.0).ln()).abs() < 1e-12);
        }
        assert!(c.second_differences().iter().flatten().all(|&d| d >= -1e-9));
        let loops = pressure_curve(&two_loops(), &Potential::zero(), &indicator(1), &grid).unwrap();
        for (x, p) in loops.grid.iter().zip(&loops.values) {
            assert!((p - x.max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivatives() {
        let t = full2();
        let (l, r) = gateaux_derivative(&t, &indicator(2), &Potential::constant(1.0), 1e-4).unwrap();
        assert!((l - 1.0).abs() < 1e-12 && (r - 1.0).abs() < 1e-12);
        let (l, r) = gateaux_derivative(&two_loops(), &Potential::zero(), &indicator(1), 1e-4).unwrap();
        assert!(l.abs() < 1e-9 && (r - 1.0).abs() < 1e-9);
        // d/dt log(e^t + 1) at 0 is 1/2
        let (l, r) = gateaux_derivative(&t, &Potential::zero(), &indicator(1), 1e-4).unwrap();
        assert!((l - 0.5).abs() < 1e-4 && (r - 0.5).abs() < 1e-4);
        assert!(gateaux_derivative(&t, &Potential::zero(), &indicator(1), 0.0).is_err());
    }

    #[test]
    fn kinks() {
        let grid = parse_grid("-1:1:0.01").unwrap();
        let loops = pressure_curve(&two_loops(), &Potential::zero(), &indicator(1), &grid).unwrap();
        let k = kink_scan(&loops, 1e-6).unwrap();
        assert_eq!(k.locations.len(), 1);
        assert!(k.locations[0].abs() < 1e-9);
        let (l, r) = k.slopes[0];
        assert!(l.abs() < 1e-6 && (r - 1.0).abs() < 1e-6 && l <= r);

        let smooth = pressure_curve(&full2(), &Potential::zero(), &indicator(1), &grid).unwrap();
        assert!(kink_scan(&smooth, 1e-6).unwrap().locations.is_empty());
        let flat = pressure_curve(&full2(), &Potential::zero(), &Potential::constant(1.0), &grid).unwrap();
        assert!(kink_scan(&flat, 1e-6).unwrap().locations.is_empty());

        // kink between grid points
        let off = parse_grid("-0.995:1.005:0.01").unwrap();
        let c = pressure_curve(&two_loops(), &Potential::zero(), &indicator(1), &off).unwrap();
        assert_eq!(kink_scan(&c, 1e-6).unwrap().locations.len(), 1);
    }

    #[test]
    fn axioms_on_small_systems() {
        let r = check_pressure_axioms(&full2(), 50, 1e-9, 3).unwrap();
        assert!(r.passed(), "{r:?}");
        let t = random_mixing_sft(3, 11).unwrap();
        let r = check_pressure_axioms(&t, 50, 1e-9, 4).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn derivative_matches_equilibrium_integral() {
        let t = random_mixing_sft(4, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let phi = random_potential(&t, 1.0, &mut rng).unwrap();
            let psi = random_potential(&t, 1.0, &mut rng).unwrap();
            let eq = equilibrium_measure(&t, &phi).unwrap();
            let integral = measure_free_energy(&eq.measure, &psi).unwrap().1;
            let h = 1e-4;
            let (l, r) = gateaux_derivative(&t, &phi, &psi, h).unwrap();
            assert!((r - integral).abs() <= 10.0 * h && (l - integral).abs() <= 10.0 * h);
            // tangent functional inequality
            let gain = sft_pressure(&t, &phi.plus_scaled(1.0, &psi)).unwrap().value - eq.pressure;
            assert!(gain >= integral - 1e-9);
        }
    }

    #[test]
    fn random_sft_is_primitive() {
        for seed in 0..5 {
            let t = random_mixing_sft(4, seed).unwrap();
            assert!(crate::shift::is_topologically_mixing(&t).unwrap());
        }
    }
}
