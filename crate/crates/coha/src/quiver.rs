//! Quivers, dimension vectors, potentials, and stability data.
//!
//! Cycle words are stored as printed: the leftmost arrow is applied last,
//! so `[c1, b1, a1]` is the path `a1` then `b1` then `c1`. Potentials are
//! kept in a canonical form — each cycle rotated to its lexicographically
//! minimal representative, like terms merged — so that equality of
//! potentials is structural.

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

use crate::qarith::{rat_i, Rat};

#[derive(Debug, Clone, Error)]
pub enum QuiverError {
    #[error("duplicate arrow name `{0}`")]
    DuplicateArrow(String),
    #[error("arrow `{arrow}` references unknown vertex `{vertex}`")]
    UnknownVertex { arrow: String, vertex: String },
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("duplicate vertex name `{0}`")]
    DuplicateVertex(String),
    #[error("word {0:?} is not a composable cycle")]
    NotACycle(Vec<String>),
    #[error("empty cycle")]
    EmptyCycle,
    #[error("cannot parse rational `{0}`")]
    BadRational(String),
    #[error("stability condition missing vertex `{0}`")]
    StabilityMissingVertex(String),
    #[error("dimension vector has {got} entries, quiver has {want} vertices")]
    DimensionMismatch { got: usize, want: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub source: usize,
    pub target: usize,
}

/// A finite directed multigraph with named vertices and arrows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
}

impl Quiver {
    pub fn new<V, A>(vertices: V, arrows: A) -> Result<Self, QuiverError>
    where
        V: IntoIterator<Item = String>,
        A: IntoIterator<Item = (String, String, String)>,
    {
        let vertices: Vec<String> = vertices.into_iter().collect();
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !seen.insert(v.clone()) {
                return Err(QuiverError::DuplicateVertex(v.clone()));
            }
        }
        let index = |name: &str, arrow: &str| -> Result<usize, QuiverError> {
            vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| QuiverError::UnknownVertex {
                    arrow: arrow.to_string(),
                    vertex: name.to_string(),
                })
        };
        let mut out = Vec::new();
        let mut names = BTreeSet::new();
        for (name, from, to) in arrows {
            if !names.insert(name.clone()) {
                return Err(QuiverError::DuplicateArrow(name));
            }
            let source = index(&from, &name)?;
            let target = index(&to, &name)?;
            out.push(Arrow {
                name,
                source,
                target,
            });
        }
        Ok(Quiver {
            vertices,
            arrows: out,
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow(&self, name: &str) -> Result<&Arrow, QuiverError> {
        self.arrows
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| QuiverError::UnknownArrow(name.to_string()))
    }

    pub fn has_arrow(&self, name: &str) -> bool {
        self.arrows.iter().any(|a| a.name == name)
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn has_loop_at(&self, vertex: usize) -> bool {
        self.arrows
            .iter()
            .any(|a| a.source == vertex && a.target == vertex)
    }

    /// Number of arrows from `i` to `j`.
    pub fn arrow_count(&self, i: usize, j: usize) -> usize {
        self.arrows
            .iter()
            .filter(|a| a.source == i && a.target == j)
            .count()
    }

    /// First pair of opposite arrows between distinct vertices, if any.
    pub fn two_cycle_witness(&self) -> Option<(String, String)> {
        for a in &self.arrows {
            if a.source == a.target {
                continue;
            }
            for b in &self.arrows {
                if b.source == a.target && b.target == a.source {
                    return Some((a.name.clone(), b.name.clone()));
                }
            }
        }
        None
    }
}

/// A dimension vector, entries aligned with the quiver's vertex order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DimVector(pub Vec<u32>);

impl DimVector {
    pub fn zero(n: usize) -> Self {
        DimVector(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        DimVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn leq(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &Self) -> Self {
        DimVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if other.leq(self) {
            Some(DimVector(
                self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
            ))
        } else {
            None
        }
    }

    pub fn scaled(&self, k: u32) -> Self {
        DimVector(self.0.iter().map(|a| a * k).collect())
    }

    /// All vectors `<= bound`, sorted by total degree then lexicographically.
    pub fn box_below(bound: &DimVector) -> Vec<DimVector> {
        let mut out = vec![DimVector::zero(bound.len())];
        for i in 0..bound.len() {
            let mut next = Vec::new();
            for v in &out {
                for k in 0..=bound.0[i] {
                    let mut w = v.clone();
                    w.0[i] = k;
                    next.push(w);
                }
            }
            out = next;
        }
        out.sort_by_key(|d| (d.total(), d.clone()));
        out
    }
}

impl fmt::Display for DimVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Euler form of the quiver: sum_i d_i e_i - sum_{a} d_{s(a)} e_{t(a)}.
pub fn euler_form(q: &Quiver, d: &DimVector, e: &DimVector) -> i64 {
    assert_eq!(
        d.len(),
        q.n_vertices(),
        "dimension vector does not match quiver"
    );
    assert_eq!(
        e.len(),
        q.n_vertices(),
        "dimension vector does not match quiver"
    );
    let mut acc: i64 = 0;
    for i in 0..q.n_vertices() {
        acc += d.0[i] as i64 * e.0[i] as i64;
    }
    for a in q.arrows() {
        acc -= d.0[a.source] as i64 * e.0[a.target] as i64;
    }
    acc
}

/// Antisymmetrized Euler pairing `chi(d,e) - chi(e,d)`.
pub fn euler_antisym(q: &Quiver, d: &DimVector, e: &DimVector) -> i64 {
    euler_form(q, d, e) - euler_form(q, e, d)
}

/// A stability condition: one rational weight per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stability {
    pub zeta: Vec<Rat>,
}

impl Stability {
    pub fn new(zeta: Vec<Rat>) -> Self {
        Stability { zeta }
    }

    /// Slope `(d . zeta) / sum_i d_i`; the zero vector has no slope.
    pub fn slope(&self, d: &DimVector) -> Rat {
        assert!(!d.is_zero(), "slope of the zero dimension vector");
        assert_eq!(d.len(), self.zeta.len(), "stability/vector size mismatch");
        let mut num = Rat::zero();
        for (i, &di) in d.0.iter().enumerate() {
            num += self.zeta[i].clone() * rat_i(di as i64);
        }
        num / rat_i(d.total() as i64)
    }
}

/// Outcome of a genericity check over a finite box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Genericity {
    Generic,
    Violation {
        d: DimVector,
        e: DimVector,
        chi_de: i64,
        chi_ed: i64,
    },
}

impl Genericity {
    pub fn is_generic(&self) -> bool {
        matches!(self, Genericity::Generic)
    }
}

/// Checks that equal-slope vectors in the box pair symmetrically under the
/// Euler form. Returns the first violating pair otherwise.
pub fn is_generic(q: &Quiver, zeta: &Stability, bound: &DimVector) -> Genericity {
    let vectors: Vec<DimVector> = DimVector::box_below(bound)
        .into_iter()
        .filter(|v| !v.is_zero())
        .collect();
    for d in &vectors {
        for e in &vectors {
            if d == e {
                continue;
            }
            if zeta.slope(d) == zeta.slope(e) {
                let chi_de = euler_form(q, d, e);
                let chi_ed = euler_form(q, e, d);
                if chi_de != chi_ed {
                    return Genericity::Violation {
                        d: d.clone(),
                        e: e.clone(),
                        chi_de,
                        chi_ed,
                    };
                }
            }
        }
    }
    Genericity::Generic
}

/// A potential: rational combination of cyclic words, canonically rotated.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Potential {
    terms: BTreeMap<Vec<String>, Rat>,
}

/// Rotates a cycle to its lexicographically minimal representative.
fn canonical_rotation(cycle: &[String]) -> Vec<String> {
    let n = cycle.len();
    let mut best: Option<Vec<String>> = None;
    for r in 0..n {
        let rotated: Vec<String> = (0..n).map(|i| cycle[(r + i) % n].clone()).collect();
        if best.as_ref().map_or(true, |b| &rotated < b) {
            best = Some(rotated);
        }
    }
    best.unwrap_or_default()
}

impl Potential {
    pub fn empty() -> Self {
        Potential::default()
    }

    /// Validates every word as a composable cycle on `q` and canonicalizes.
    pub fn new<I>(q: &Quiver, terms: I) -> Result<Self, QuiverError>
    where
        I: IntoIterator<Item = (Rat, Vec<String>)>,
    {
        let mut p = Potential::default();
        for (coeff, cycle) in terms {
            validate_cycle(q, &cycle)?;
            p.add_term(&coeff, &cycle);
        }
        Ok(p)
    }

    /// Adds `coeff * cycle` without re-validating; callers guarantee shape.
    pub fn add_term(&mut self, coeff: &Rat, cycle: &[String]) {
        if coeff.is_zero() || cycle.is_empty() {
            return;
        }
        let key = canonical_rotation(cycle);
        let entry = self.terms.entry(key).or_insert_with(Rat::zero);
        *entry += coeff.clone();
        if entry.is_zero() {
            self.terms.remove(&canonical_rotation(cycle));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<String>, &Rat)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, cycle: &[String]) -> Rat {
        self.terms
            .get(&canonical_rotation(cycle))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn max_len(&self) -> usize {
        self.terms.keys().map(|c| c.len()).max().unwrap_or(0)
    }

    /// Terms of cycle length exactly 2.
    pub fn quadratic_terms(&self) -> Vec<(Vec<String>, Rat)> {
        self.terms
            .iter()
            .filter(|(c, _)| c.len() == 2)
            .map(|(c, r)| (c.clone(), r.clone()))
            .collect()
    }

    pub fn scaled(&self, s: &Rat) -> Self {
        let mut out = Potential::default();
        for (c, r) in &self.terms {
            out.add_term(&(r.clone() * s.clone()), c);
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (c, r) in &other.terms {
            out.add_term(r, c);
        }
        out
    }

    /// Cyclic derivative with respect to one arrow: for each occurrence,
    /// the complementary path starting right after the occurrence.
    pub fn cyclic_derivative(&self, arrow: &str) -> Vec<(Rat, Vec<String>)> {
        let mut acc: BTreeMap<Vec<String>, Rat> = BTreeMap::new();
        for (cycle, coeff) in &self.terms {
            for (i, w) in cycle.iter().enumerate() {
                if w == arrow {
                    let mut path: Vec<String> = cycle[i + 1..].to_vec();
                    path.extend_from_slice(&cycle[..i]);
                    let entry = acc.entry(path).or_insert_with(Rat::zero);
                    *entry += coeff.clone();
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        acc.into_iter().map(|(p, c)| (c, p)).collect()
    }

    pub fn pretty(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (cycle, coeff)) in self.terms.iter().enumerate() {
            let neg = coeff.is_negative();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let a = coeff.abs();
            if !a.is_one() {
                out.push_str(&format!("{} ", a));
            }
            out.push_str(&cycle.join("."));
        }
        out
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

pub fn validate_cycle(q: &Quiver, cycle: &[String]) -> Result<(), QuiverError> {
    if cycle.is_empty() {
        return Err(QuiverError::EmptyCycle);
    }
    for name in cycle {
        q.arrow(name)?;
    }
    let n = cycle.len();
    for i in 0..n {
        // printed order: cycle[i] is applied after cycle[i+1]
        let later = q.arrow(&cycle[i])?;
        let earlier = q.arrow(&cycle[(i + 1) % n])?;
        if earlier.target != later.source {
            return Err(QuiverError::NotACycle(cycle.to_vec()));
        }
    }
    Ok(())
}

/// A validated path: consecutive arrows compose (printed order, rightmost
/// applied first).
pub fn validate_path(q: &Quiver, path: &[String]) -> Result<(usize, usize), QuiverError> {
    if path.is_empty() {
        return Err(QuiverError::EmptyCycle);
    }
    for i in 0..path.len() - 1 {
        let later = q.arrow(&path[i])?;
        let earlier = q.arrow(&path[i + 1])?;
        if earlier.target != later.source {
            return Err(QuiverError::NotACycle(path.to_vec()));
        }
    }
    let start = q.arrow(&path[path.len() - 1])?.source;
    let end = q.arrow(&path[0])?.target;
    Ok((start, end))
}

/// An integer arrow grading under which all potential terms share one
/// positive total degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grading {
    pub weights: BTreeMap<String, u64>,
    pub degree: u64,
}

/// Searches for a nonnegative rational grading giving every cycle of `w`
/// the same total degree >= 1, scaled to integers. Homogeneous potentials
/// short-circuit to the path-length grading.
pub fn is_quasihomogeneous(q: &Quiver, w: &Potential) -> Option<Grading> {
    if w.is_zero() {
        return None;
    }
    let lens: BTreeSet<usize> = w.terms().map(|(c, _)| c.len()).collect();
    if lens.len() == 1 {
        let degree = *lens.iter().next().unwrap() as u64;
        let weights = q.arrows().iter().map(|a| (a.name.clone(), 1)).collect();
        return Some(Grading { weights, degree });
    }

    // General case: solve sum_{a in cycle} p_a = 1, p >= 0 by phase-1 simplex,
    // then scale to integers.
    let arrow_names: Vec<String> = q.arrows().iter().map(|a| a.name.clone()).collect();
    let n = arrow_names.len();
    let rows: Vec<Vec<Rat>> = w
        .terms()
        .map(|(cycle, _)| {
            let mut row = vec![Rat::zero(); n];
            for name in cycle {
                let j = arrow_names.iter().position(|a| a == name).unwrap();
                row[j] += Rat::one();
            }
            row
        })
        .collect();
    let b = vec![Rat::one(); rows.len()];
    let p = lp_feasible_eq_nonneg(&rows, &b)?;

    let mut lcm = num::BigInt::one();
    for x in &p {
        lcm = num::integer::lcm(lcm, x.denom().clone());
    }
    let scale = Rat::from_integer(lcm);
    let weights: BTreeMap<String, u64> = arrow_names
        .iter()
        .zip(&p)
        .map(|(name, x)| {
            let v = x.clone() * scale.clone();
            (name.clone(), v.to_integer().try_into().unwrap_or(0))
        })
        .collect();
    let degree: u64 = {
        let (cycle, _) = w.terms().next().unwrap();
        cycle.iter().map(|a| weights[a]).sum()
    };
    if degree == 0 {
        return None;
    }
    Some(Grading { weights, degree })
}

/// Exact phase-1 simplex for `Ax = b, x >= 0` with `b >= 0`; returns a
/// feasible point if one exists. Bland's rule, so it terminates.
fn lp_feasible_eq_nonneg(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let m = a.len();
    if m == 0 {
        return Some(Vec::new());
    }
    let n = a[0].len();
    let width = n + m;
    // tableau rows: [A | I | b], basis starts at the artificials
    let mut t: Vec<Vec<Rat>> = (0..m)
        .map(|i| {
            let mut row = Vec::with_capacity(width + 1);
            row.extend(a[i].iter().cloned());
            for j in 0..m {
                row.push(if i == j { Rat::one() } else { Rat::zero() });
            }
            row.push(b[i].clone());
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..width).collect();
    // phase-1 objective row: sum of constraint rows on original columns
    let mut z: Vec<Rat> = vec![Rat::zero(); width + 1];
    for row in &t {
        for (j, v) in row.iter().enumerate() {
            z[j] += v.clone();
        }
    }
    for j in n..width {
        z[j] = Rat::zero();
    }
    loop {
        let enter = (0..width).find(|&j| z[j].is_positive() && !basis.contains(&j));
        let enter = match enter {
            Some(j) => j,
            None => break,
        };
        let mut pivot: Option<(usize, Rat)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = row[width].clone() / row[enter].clone();
                let better = match &pivot {
                    None => true,
                    Some((pi, pr)) => ratio < *pr || (ratio == *pr && basis[i] < basis[*pi]),
                };
                if better {
                    pivot = Some((i, ratio));
                }
            }
        }
        let (pi, _) = pivot?;
        let pv = t[pi][enter].clone();
        for v in t[pi].iter_mut() {
            *v = v.clone() / pv.clone();
        }
        let prow = t[pi].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != pi && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (j, v) in row.iter_mut().enumerate() {
                    *v = v.clone() - f.clone() * prow[j].clone();
                }
            }
        }
        if !z[enter].is_zero() {
            let f = z[enter].clone();
            for (j, v) in z.iter_mut().enumerate() {
                *v = v.clone() - f.clone() * prow[j].clone();
            }
        }
        basis[pi] = enter;
    }
    // feasible iff every artificial carries value zero
    let mut x = vec![Rat::zero(); n];
    for (i, &bj) in basis.iter().enumerate() {
        let val = t[i][width].clone();
        if bj < n {
            x[bj] = val;
        } else if !val.is_zero() {
            return None;
        }
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// JSON file schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrowSpec {
    pub name: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSpec {
    pub coeff: String,
    pub cycle: Vec<String>,
}

/// On-disk quiver description: vertices, arrows, optional potential and
/// stability. Rationals are strings (`"1"`, `"-3/2"`), cycles are printed
/// left-to-right with the rightmost arrow applied first.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuiverFile {
    pub vertices: Vec<String>,
    pub arrows: Vec<ArrowSpec>,
    #[serde(default)]
    pub potential: Vec<TermSpec>,
    #[serde(default)]
    pub stability: BTreeMap<String, String>,
}

fn parse_rat(s: &str) -> Result<Rat, QuiverError> {
    s.trim()
        .parse::<Rat>()
        .map_err(|_| QuiverError::BadRational(s.to_string()))
}

impl QuiverFile {
    pub fn into_parts(self) -> Result<(Quiver, Potential, Option<Stability>), QuiverError> {
        let quiver = Quiver::new(
            self.vertices.clone(),
            self.arrows
                .iter()
                .map(|a| (a.name.clone(), a.from.clone(), a.to.clone())),
        )?;
        let mut terms = Vec::new();
        for t in &self.potential {
            terms.push((parse_rat(&t.coeff)?, t.cycle.clone()));
        }
        let potential = Potential::new(&quiver, terms)?;
        let stability = if self.stability.is_empty() {
            None
        } else {
            let mut zeta = Vec::with_capacity(self.vertices.len());
            for v in &self.vertices {
                let s = self
                    .stability
                    .get(v)
                    .ok_or_else(|| QuiverError::StabilityMissingVertex(v.clone()))?;
                zeta.push(parse_rat(s)?);
            }
            Some(Stability::new(zeta))
        };
        Ok((quiver, potential, stability))
    }

    pub fn from_parts(q: &Quiver, w: &Potential, zeta: Option<&Stability>) -> Self {
        QuiverFile {
            vertices: q.vertices().to_vec(),
            arrows: q
                .arrows()
                .iter()
                .map(|a| ArrowSpec {
                    name: a.name.clone(),
                    from: q.vertices()[a.source].clone(),
                    to: q.vertices()[a.target].clone(),
                })
                .collect(),
            potential: w
                .terms()
                .map(|(cycle, coeff)| TermSpec {
                    coeff: coeff.to_string(),
                    cycle: cycle.clone(),
                })
                .collect(),
            stability: zeta
                .map(|z| {
                    q.vertices()
                        .iter()
                        .zip(&z.zeta)
                        .map(|(v, r)| (v.clone(), r.to_string()))
                        .collect()
                })
                .unwrap_or_default(),
        }
    }
}
