//! Potentials φ on the shift space: locally constant tables, vertex formulas
//! with declared limits at boundary symbols, and affine combinations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift::{decode_integer, enumerate_words, PeriodicOrbit, TruncatedSFT, VertexId, Word};

/// A symbol of a compactified alphabet: an ordinary vertex or a named
/// boundary point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol<'a> {
    Vertex(VertexId),
    Boundary(&'a str),
}

/// Functions of the first coordinate only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Formula {
    /// f(i) = 1/i.
    Reciprocal,
    /// Sign of the signed label of a double-renewal vertex.
    Sign,
    /// 1 at one vertex, 0 elsewhere.
    Indicator { vertex: VertexId },
    Constant { value: f64 },
}

impl Formula {
    fn at(&self, v: VertexId) -> f64 {
        match self {
            Formula::Reciprocal => 1.0 / v.get() as f64,
            Formula::Sign => decode_integer(v.get()).signum() as f64,
            Formula::Indicator { vertex } => f64::from(u8::from(*vertex == v)),
            Formula::Constant { value } => *value,
        }
    }

    fn sup(&self) -> f64 {
        match self {
            Formula::Constant { value } => value.abs(),
            _ => 1.0,
        }
    }

    /// Limit at infinity that holds regardless of the compactification.
    fn intrinsic_limit(&self) -> Option<f64> {
        match self {
            Formula::Constant { value } => Some(*value),
            Formula::Indicator { .. } => Some(0.0),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    /// Depends on the first `depth` symbols; unlisted words take `default`.
    LocallyConstant {
        depth: usize,
        table: BTreeMap<Vec<VertexId>, f64>,
        default: f64,
    },
    VertexFormula {
        formula: Formula,
        boundary_limits: BTreeMap<String, f64>,
    },
    Affine {
        terms: Vec<(f64, Potential)>,
        constant: f64,
    },
}

/// A bounded potential of finite depth.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    sup_norm: f64,
}

impl Potential {
    fn from_kind(kind: PotentialKind) -> Self {
        let sup_norm = match &kind {
            PotentialKind::LocallyConstant { table, default, .. } => {
                table.values().fold(default.abs(), |m, x| m.max(x.abs()))
            }
            PotentialKind::VertexFormula {
                formula,
                boundary_limits,
            } => boundary_limits.values().fold(formula.sup(), |m, x| m.max(x.abs())),
            PotentialKind::Affine { terms, constant } => {
                terms.iter().map(|(a, p)| a.abs() * p.sup_norm).sum::<f64>() + constant.abs()
            }
        };
        Potential { kind, sup_norm }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self::formula(Formula::Constant { value }, BTreeMap::new())
    }

    pub fn formula(formula: Formula, boundary_limits: BTreeMap<String, f64>) -> Self {
        Self::from_kind(PotentialKind::VertexFormula {
            formula,
            boundary_limits,
        })
    }

    /// Shorthand for a formula with a single named limit.
    pub fn formula_with_limit(formula: Formula, symbol: &str, limit: f64) -> Self {
        Self::formula(formula, BTreeMap::from([(symbol.to_string(), limit)]))
    }

    pub fn locally_constant(
        depth: usize,
        table: BTreeMap<Vec<VertexId>, f64>,
        default: f64,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::invalid("locally constant potentials need depth >= 1"));
        }
        if let Some(k) = table.keys().find(|k| k.len() != depth) {
            return Err(Error::invalid(format!(
                "table key of length {} in a depth-{depth} potential",
                k.len()
            )));
        }
        if table.values().chain([&default]).any(|x| !x.is_finite()) {
            return Err(Error::invalid("potential values must be finite"));
        }
        Ok(Self::from_kind(PotentialKind::LocallyConstant {
            depth,
            table,
            default,
        }))
    }

    /// Depth-1 table from `(vertex index, value)` pairs.
    pub fn depth_one(values: &[(u64, f64)], default: f64) -> Result<Self> {
        let mut table = BTreeMap::new();
        for &(i, x) in values {
            table.insert(vec![VertexId::new(i)?], x);
        }
        Self::locally_constant(1, table, default)
    }

    pub fn affine(terms: Vec<(f64, Potential)>, constant: f64) -> Self {
        Self::from_kind(PotentialKind::Affine { terms, constant })
    }

    /// φ + t·ψ.
    pub fn plus_scaled(&self, t: f64, other: &Potential) -> Potential {
        Self::affine(vec![(1.0, self.clone()), (t, other.clone())], 0.0)
    }

    pub fn shifted(&self, c: f64) -> Potential {
        Self::affine(vec![(1.0, self.clone())], c)
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Number of leading coordinates the potential depends on (at least 1).
    pub fn depth(&self) -> usize {
        match &self.kind {
            PotentialKind::LocallyConstant { depth, .. } => *depth,
            PotentialKind::VertexFormula { .. } => 1,
            PotentialKind::Affine { terms, .. } => {
                terms.iter().map(|(_, p)| p.depth()).max().unwrap_or(1)
            }
        }
    }

    pub fn is_locally_constant(&self) -> bool {
        matches!(self.kind, PotentialKind::LocallyConstant { .. })
    }

    /// Value on the cylinder of the given vertex word (at least `depth` long).
    pub fn eval_vertices(&self, w: &[VertexId]) -> Result<f64> {
        let needed = self.depth();
        if w.len() < needed {
            return Err(Error::WordTooShort {
                needed,
                got: w.len(),
            });
        }
        Ok(match &self.kind {
            PotentialKind::LocallyConstant {
                depth,
                table,
                default,
            } => *table.get(&w[..*depth]).unwrap_or(default),
            PotentialKind::VertexFormula { formula, .. } => formula.at(w[0]),
            PotentialKind::Affine { terms, constant } => {
                let mut s = *constant;
                for (a, p) in terms {
                    s += a * p.eval_vertices(w)?;
                }
                s
            }
        })
    }

    /// Value on a window of a compactified alphabet. Tables are finite, so
    /// windows containing a boundary symbol take the table default; formulas
    /// starting at a boundary symbol take its declared limit.
    pub fn eval_symbols(&self, w: &[Symbol<'_>]) -> Result<f64> {
        let needed = self.depth();
        if w.len() < needed {
            return Err(Error::WordTooShort {
                needed,
                got: w.len(),
            });
        }
        match &self.kind {
            PotentialKind::LocallyConstant {
                depth,
                table,
                default,
            } => {
                let mut key = Vec::with_capacity(*depth);
                for s in &w[..*depth] {
                    match s {
                        Symbol::Vertex(v) => key.push(*v),
                        Symbol::Boundary(_) => return Ok(*default),
                    }
                }
                Ok(*table.get(&key).unwrap_or(default))
            }
            PotentialKind::VertexFormula {
                formula,
                boundary_limits,
            } => match w[0] {
                Symbol::Vertex(v) => Ok(formula.at(v)),
                Symbol::Boundary(b) => boundary_limits
                    .get(b)
                    .copied()
                    .or_else(|| formula.intrinsic_limit())
                    .ok_or_else(|| Error::MissingBoundaryLimit(b.to_string())),
            },
            PotentialKind::Affine { terms, constant } => {
                let mut s = *constant;
                for (a, p) in terms {
                    s += a * p.eval_symbols(w)?;
                }
                Ok(s)
            }
        }
    }

    /// Checks that the potential has a value at every listed boundary symbol.
    pub fn check_boundary_limits<'a>(&self, symbols: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for b in symbols {
            self.eval_symbols(&vec![Symbol::Boundary(b); self.depth()])?;
        }
        Ok(())
    }
}

/// Value of `p` on the cylinder of `w` together with the oscillation bound on
/// that cylinder (0 once the word covers the potential's depth).
pub fn eval(p: &Potential, w: &Word) -> Result<(f64, f64)> {
    Ok((p.eval_vertices(w.symbols())?, 0.0))
}

/// n-th variation over the truncation: largest oscillation of `p` on an
/// n-cylinder of `t`. `n = 0` gives the global oscillation.
pub fn variation(p: &Potential, n: usize, t: &TruncatedSFT) -> Result<f64> {
    let m = p.depth();
    if n >= m || t.is_empty() {
        return Ok(0.0);
    }
    let mut ranges: BTreeMap<Vec<VertexId>, (f64, f64)> = BTreeMap::new();
    for w in enumerate_words(t, m)? {
        let x = p.eval_vertices(w.symbols())?;
        let e = ranges
            .entry(w.symbols()[..n].to_vec())
            .or_insert((f64::INFINITY, f64::NEG_INFINITY));
        e.0 = e.0.min(x);
        e.1 = e.1.max(x);
    }
    Ok(ranges.values().map(|(lo, hi)| hi - lo).fold(0.0, f64::max))
}

/// Variations V_1..V_n and a summability verdict (finite depth ⇒ summable).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationProfile {
    pub values: Vec<f64>,
    pub summable: bool,
}

pub fn variation_profile(p: &Potential, n: usize, t: &TruncatedSFT) -> Result<VariationProfile> {
    let values = (1..=n).map(|k| variation(p, k, t)).collect::<Result<Vec<_>>>()?;
    debug_assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    Ok(VariationProfile {
        values,
        summable: true,
    })
}

/// Lexicographically least admissible continuation of `w` to length `len`.
fn least_extension(t: &TruncatedSFT, w: &[VertexId], len: usize) -> Option<Vec<VertexId>> {
    let mut out = w.to_vec();
    let mut cur = t.local_index(*out.last()?)?;
    while out.len() < len {
        cur = *t.successors(cur).first()?;
        out.push(t.vertices()[cur]);
    }
    Some(out)
}

/// Depth-n locally constant approximation on `t`; each n-cylinder takes the
/// value at its lexicographically least extension.
pub fn discretize(p: &Potential, n: usize, t: &TruncatedSFT) -> Result<Potential> {
    if n == 0 {
        return Err(Error::invalid("discretization depth must be at least 1"));
    }
    if let PotentialKind::LocallyConstant { depth, .. } = p.kind {
        if n >= depth {
            return Ok(p.clone());
        }
    }
    let m = p.depth();
    let mut table = BTreeMap::new();
    for w in enumerate_words(t, n)? {
        let ext = least_extension(t, w.symbols(), m.max(n)).expect("pruned truncations extend every word");
        table.insert(w.symbols().to_vec(), p.eval_vertices(&ext)?);
    }
    Potential::locally_constant(n, table, 0.0)
}

/// S_nφ(w) = Σ_{i<n} φ(σⁱw); needs `n + depth − 1` symbols.
pub fn birkhoff_sum(p: &Potential, w: &Word, n: usize) -> Result<f64> {
    let needed = n + p.depth() - 1;
    if w.len() < needed {
        return Err(Error::WordTooShort {
            needed,
            got: w.len(),
        });
    }
    let s = w.symbols();
    let mut sum = 0.0;
    for i in 0..n {
        sum += p.eval_vertices(&s[i..])?;
    }
    Ok(sum)
}

/// Birkhoff sum over one period of a periodic orbit, reading it cyclically.
pub fn orbit_sum(p: &Potential, orbit: &PeriodicOrbit) -> Result<f64> {
    let n = orbit.period();
    let m = p.depth();
    let mut window = Vec::with_capacity(m);
    let mut sum = 0.0;
    for i in 0..n {
        window.clear();
        window.extend((0..m).map(|k| orbit.symbol(i + k)));
        sum += p.eval_vertices(&window)?;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::{truncate, Generator, ShiftSpec};

    fn v(i: u64) -> VertexId {
        VertexId::from_index(i)
    }

    #[test]
    fn eval_examples() {
        let p = Potential::depth_one(&[(1, 0.3), (2, -1.5)], 0.0).unwrap();
        assert_eq!(eval(&p, &Word::from_indices(&[2, 1])).unwrap(), (-1.5, 0.0));
        let f = Potential::formula(Formula::Reciprocal, BTreeMap::new());
        assert_eq!(eval(&f, &Word::from_indices(&[4])).unwrap(), (0.25, 0.0));
        let a = Potential::affine(vec![(2.0, p.clone()), (1.0, f.clone())], 0.0);
        let w = Word::from_indices(&[2, 1]);
        assert!((eval(&a, &w).unwrap().0 - (2.0 * -1.5 + 0.5)).abs() < 1e-15);
        let deep = Potential::locally_constant(2, BTreeMap::new(), 0.0).unwrap();
        assert!(matches!(
            eval(&deep, &Word::from_indices(&[1])),
            Err(Error::WordTooShort { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn variation_examples() {
        let t = truncate(&ShiftSpec::full_shift(3), 3);
        let mut table = BTreeMap::new();
        table.insert(vec![v(1), v(2)], 1.0);
        let p = Potential::locally_constant(2, table, 0.0).unwrap();
        assert_eq!(variation(&p, 3, &t).unwrap(), 0.0);
        assert_eq!(variation(&p, 1, &t).unwrap(), 1.0);
        assert_eq!(variation(&Potential::constant(2.0), 1, &t).unwrap(), 0.0);
        let f = Potential::formula(Formula::Reciprocal, BTreeMap::new());
        assert_eq!(variation(&f, 1, &t).unwrap(), 0.0);
        let full4 = truncate(&ShiftSpec::full_shift(4), 4);
        assert!((variation(&f, 0, &full4).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn discretize_examples() {
        let t = truncate(&ShiftSpec::full_shift(4), 4);
        let f = Potential::formula(Formula::Reciprocal, BTreeMap::new());
        let d = discretize(&f, 1, &t).unwrap();
        for i in 1..=4u64 {
            assert_eq!(d.eval_vertices(&[v(i)]).unwrap(), 1.0 / i as f64);
        }
        let p = Potential::depth_one(&[(1, 0.5)], 0.0).unwrap();
        assert_eq!(discretize(&p, 3, &t).unwrap(), p);
    }

    #[test]
    fn discretize_deep_table_uses_least_extension() {
        let t = truncate(&Generator::Renewal.into(), 3);
        let mut table = BTreeMap::new();
        table.insert(vec![v(2), v(1)], 5.0);
        table.insert(vec![v(1), v(1)], 7.0);
        let p = Potential::locally_constant(2, table, 0.0).unwrap();
        let d = discretize(&p, 1, &t).unwrap();
        // 1 extends to 11, 2 to 21, 3 to 32
        assert_eq!(d.eval_vertices(&[v(1)]).unwrap(), 7.0);
        assert_eq!(d.eval_vertices(&[v(2)]).unwrap(), 5.0);
        assert_eq!(d.eval_vertices(&[v(3)]).unwrap(), 0.0);
    }

    #[test]
    fn birkhoff_examples() {
        let c = Potential::constant(0.7);
        assert!((birkhoff_sum(&c, &Word::from_indices(&[1, 2, 1, 1]), 4).unwrap() - 2.8).abs() < 1e-15);
        let spec = ShiftSpec::full_shift(2);
        let f = Potential::formula(Formula::Reciprocal, BTreeMap::new());
        let orbit = PeriodicOrbit::new(&spec, vec![v(1), v(2)]).unwrap();
        assert!((orbit_sum(&f, &orbit).unwrap() - 1.5).abs() < 1e-15);
        let ren: ShiftSpec = Generator::Renewal.into();
        let o = PeriodicOrbit::new(&ren, vec![v(1), v(3), v(2)]).unwrap();
        let tab = Potential::depth_one(&[(1, 0.1), (2, 0.2), (3, 0.4)], 0.0).unwrap();
        assert!((orbit_sum(&tab, &o).unwrap() - 0.7).abs() < 1e-15);
        assert!(birkhoff_sum(&tab, &Word::from_indices(&[1, 1]), 3).is_err());
    }

    #[test]
    fn boundary_evaluation() {
        let f = Potential::formula_with_limit(Formula::Reciprocal, "inf", 0.0);
        assert_eq!(f.eval_symbols(&[Symbol::Boundary("inf")]).unwrap(), 0.0);
        assert_eq!(
            f.eval_symbols(&[Symbol::Boundary("+inf")]),
            Err(Error::MissingBoundaryLimit("+inf".into()))
        );
        let t = Potential::depth_one(&[(1, 3.0)], -1.0).unwrap();
        assert_eq!(t.eval_symbols(&[Symbol::Boundary("inf")]).unwrap(), -1.0);
        assert_eq!(Potential::constant(2.0).eval_symbols(&[Symbol::Boundary("x")]).unwrap(), 2.0);
    }
}
