//! The zero-potential shuffle-algebra model: symmetric-polynomial
//! representatives, the shuffle product, and graded dimensions of the
//! subalgebra generated by the unit-dimension-vector lines.
//!
//! An element of degree `d` is a polynomial in variables `z_{i,1..d_i}`,
//! one group per vertex, symmetric within each group. The cohomological
//! degree of a homogeneous element is `2 deg + chi(d,d)`.
//!
//! Kernel orientation: an arrow `i -> j` contributes factors
//! `(z_{j,s} - z_{i,r})` with `r` running over the FIRST factor's slots at
//! the source and `s` over the second factor's slots at the target. The
//! alternative orientation pushes the degree-1 products of three generators
//! to cohomological degree 5, which contradicts the pinned span in degree 1,
//! so this one is forced.

use num::{BigInt, One, Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::qarith::{HalfLaurent, Int, Rat};
use crate::quiver::{euler_form, DimVector, Quiver, Stability};
use crate::qtorus::{self, BpsTable, TorusElement, TorusError, Twist};

#[derive(Debug, Clone, Error)]
pub enum ShuffleError {
    #[error("operands live on different vertex sets")]
    DimMismatch,
    #[error("kernel denominator does not divide the shuffle sum (orientation bug)")]
    NonExactDivision,
    #[error("coefficient at q^{{{h}/2}} is {value}: not a graded dimension")]
    BadDimensionSeries { h: i64, value: String },
    #[error(transparent)]
    Torus(#[from] TorusError),
}

type Monomial = Vec<u16>;
type Poly = BTreeMap<Monomial, Rat>;

/// A per-vertex-symmetric polynomial at a dimension vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymPoly {
    pub dim: DimVector,
    pub terms: Poly,
}

fn offsets(d: &DimVector) -> Vec<usize> {
    let mut off = Vec::with_capacity(d.len());
    let mut acc = 0usize;
    for &x in &d.0 {
        off.push(acc);
        acc += x as usize;
    }
    off
}

fn poly_add_term(p: &mut Poly, m: Monomial, c: Rat) {
    if c.is_zero() {
        return;
    }
    let entry = p.entry(m).or_insert_with(Rat::zero);
    *entry += c;
}

fn poly_prune(p: &mut Poly) {
    p.retain(|_, c| !c.is_zero());
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m: Monomial = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
            poly_add_term(&mut out, m, ca.clone() * cb.clone());
        }
    }
    poly_prune(&mut out);
    out
}

/// `z_a - z_b` in `n` variables.
fn linear_factor(n: usize, a: usize, b: usize) -> Poly {
    let mut p = Poly::new();
    let mut ma = vec![0u16; n];
    ma[a] = 1;
    p.insert(ma, Rat::one());
    let mut mb = vec![0u16; n];
    mb[b] = 1;
    p.insert(mb, -Rat::one());
    p
}

/// Exact division by `z_a - z_b`; the remainder (substitute `z_a = z_b`)
/// must vanish.
fn divide_linear(p: &Poly, a: usize, b: usize) -> Result<Poly, ShuffleError> {
    if p.is_empty() {
        return Ok(Poly::new());
    }
    let maxdeg = p.keys().map(|m| m[a]).max().unwrap_or(0);
    let mut slices: Vec<Poly> = vec![Poly::new(); maxdeg as usize + 1];
    for (m, c) in p {
        let k = m[a] as usize;
        let mut rest = m.clone();
        rest[a] = 0;
        poly_add_term(&mut slices[k], rest, c.clone());
    }
    let shift_b = |q: &Poly| -> Poly {
        q.iter()
            .map(|(m, c)| {
                let mut m2 = m.clone();
                m2[b] += 1;
                (m2, c.clone())
            })
            .collect()
    };
    // Q_{k-1} = A_k + z_b Q_k, remainder R = A_0 + z_b Q_0
    let mut quo_slices: Vec<Poly> = vec![Poly::new(); maxdeg as usize];
    let mut carry = Poly::new();
    for k in (1..=maxdeg as usize).rev() {
        let mut qk = slices[k].clone();
        for (m, c) in shift_b(&carry) {
            poly_add_term(&mut qk, m, c);
        }
        poly_prune(&mut qk);
        quo_slices[k - 1] = qk.clone();
        carry = qk;
    }
    let mut remainder = slices[0].clone();
    for (m, c) in shift_b(&carry) {
        poly_add_term(&mut remainder, m, c);
    }
    poly_prune(&mut remainder);
    if !remainder.is_empty() {
        return Err(ShuffleError::NonExactDivision);
    }
    let mut out = Poly::new();
    for (k, slice) in quo_slices.iter().enumerate() {
        for (m, c) in slice {
            let mut m2 = m.clone();
            m2[a] = k as u16;
            poly_add_term(&mut out, m2, c.clone());
        }
    }
    poly_prune(&mut out);
    Ok(out)
}

fn subsets(n: u32, k: u32) -> Vec<Vec<usize>> {
    fn rec(start: u32, n: u32, k: u32, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=(n - k) {
            cur.push(i as usize);
            rec(i + 1, n, k - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur = Vec::new();
    rec(0, n, k, &mut cur, &mut out);
    out
}

impl SymPoly {
    pub fn constant(dim: DimVector, c: Rat) -> Self {
        let n: usize = dim.total() as usize;
        let mut terms = Poly::new();
        if !c.is_zero() {
            terms.insert(vec![0u16; n], c);
        }
        SymPoly { dim, terms }
    }

    /// The generator `z_i^k` in the one-dimensional line at vertex `i`.
    pub fn generator(n_vertices: usize, vertex: usize, k: u16) -> Self {
        let dim = DimVector::unit(n_vertices, vertex);
        let mut terms = Poly::new();
        terms.insert(vec![k], Rat::one());
        SymPoly { dim, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total polynomial degree, defined for homogeneous elements.
    pub fn homogeneous_degree(&self) -> Option<u16> {
        let degs: std::collections::BTreeSet<u16> =
            self.terms.keys().map(|m| m.iter().sum::<u16>()).collect();
        match degs.len() {
            0 => Some(0),
            1 => degs.into_iter().next(),
            _ => None,
        }
    }

    /// Cohomological degree `2 deg + chi(d,d)` of a homogeneous element.
    pub fn cohomological_degree(&self, q: &Quiver) -> Option<i64> {
        let p = self.homogeneous_degree()?;
        Some(2 * p as i64 + euler_form(q, &self.dim, &self.dim))
    }

    /// Invariance under each vertex group's permutations (adjacent
    /// transpositions generate them).
    pub fn is_symmetric(&self) -> bool {
        let off = offsets(&self.dim);
        for (m, c) in &self.terms {
            for (i, &d) in self.dim.0.iter().enumerate() {
                for r in 0..d.saturating_sub(1) as usize {
                    let a = off[i] + r;
                    let b = a + 1;
                    let mut swapped = m.clone();
                    swapped.swap(a, b);
                    if self.terms.get(&swapped).cloned().unwrap_or_else(Rat::zero) != *c {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// The shuffle product. Sums `f(z_S) g(z_{S^c}) K(S)` over per-vertex
/// shuffles; the same-vertex kernel denominators combine into one global
/// Vandermonde division, which must be exact.
pub fn shuffle_product(q: &Quiver, f: &SymPoly, g: &SymPoly) -> Result<SymPoly, ShuffleError> {
    if f.dim.len() != g.dim.len() || f.dim.len() != q.n_vertices() {
        return Err(ShuffleError::DimMismatch);
    }
    let dim = f.dim.add(&g.dim);
    let n: usize = dim.total() as usize;
    let off = offsets(&dim);

    let choices: Vec<Vec<Vec<usize>>> = (0..dim.len())
        .map(|i| subsets(dim.0[i], f.dim.0[i]))
        .collect();
    let mut selectors = vec![0usize; dim.len()];
    let mut total = Poly::new();
    'shuffles: loop {
        let mut sign = 1i64;
        let mut f_map: Vec<usize> = Vec::with_capacity(f.dim.total() as usize);
        let mut g_map: Vec<usize> = Vec::with_capacity(g.dim.total() as usize);
        let mut s_slots: Vec<Vec<usize>> = Vec::with_capacity(dim.len());
        let mut c_slots: Vec<Vec<usize>> = Vec::with_capacity(dim.len());
        for i in 0..dim.len() {
            let s = &choices[i][selectors[i]];
            let sc: Vec<usize> = (0..dim.0[i] as usize).filter(|r| !s.contains(r)).collect();
            for &qq in s {
                if sc.iter().filter(|&&p| p < qq).count() % 2 == 1 {
                    sign = -sign;
                }
            }
            for &r in s {
                f_map.push(off[i] + r);
            }
            for &r in &sc {
                g_map.push(off[i] + r);
            }
            s_slots.push(s.iter().map(|&r| off[i] + r).collect());
            c_slots.push(sc.iter().map(|&r| off[i] + r).collect());
        }

        let remap = |p: &Poly, map: &[usize]| -> Poly {
            p.iter()
                .map(|(m, c)| {
                    let mut out = vec![0u16; n];
                    for (v, &e) in m.iter().enumerate() {
                        out[map[v]] = e;
                    }
                    (out, c.clone())
                })
                .collect()
        };
        let f_re = remap(&f.terms, &f_map);
        let g_re = remap(&g.terms, &g_map);

        let mut term = poly_mul(&f_re, &g_re);
        // kernel numerator: one factor per arrow per (source slot, target slot)
        for a in q.arrows() {
            for &r in &s_slots[a.source] {
                for &s in &c_slots[a.target] {
                    term = poly_mul(&term, &linear_factor(n, s, r));
                }
            }
        }
        // complementary Vandermondes lift each term to the common denominator
        for slots in s_slots.iter().chain(c_slots.iter()) {
            for t in 0..slots.len() {
                for u in 0..t {
                    term = poly_mul(&term, &linear_factor(n, slots[t], slots[u]));
                }
            }
        }
        let signed = Rat::from_integer(sign.into());
        for (m, c) in term {
            poly_add_term(&mut total, m, c * signed.clone());
        }
        poly_prune(&mut total);

        // advance to the next shuffle
        for i in 0..=dim.len() {
            if i == dim.len() {
                break 'shuffles;
            }
            selectors[i] += 1;
            if selectors[i] < choices[i].len() {
                continue 'shuffles;
            }
            selectors[i] = 0;
        }
    }

    // divide by the full Vandermonde of every vertex group
    for v in 0..dim.len() {
        let d = dim.0[v] as usize;
        for t in 0..d {
            for u in 0..t {
                total = divide_linear(&total, off[v] + t, off[v] + u)?;
            }
        }
    }
    let out = SymPoly { dim, terms: total };
    debug_assert!(out.is_symmetric(), "shuffle product lost symmetry");
    Ok(out)
}

/// Left fold of shuffle products over a sequence of `(vertex, exponent)`
/// generators.
pub fn product_of_generators(q: &Quiver, seq: &[(usize, u16)]) -> Result<SymPoly, ShuffleError> {
    let mut acc: Option<SymPoly> = None;
    for &(vertex, k) in seq {
        let g = SymPoly::generator(q.n_vertices(), vertex, k);
        acc = Some(match acc {
            None => g,
            Some(a) => shuffle_product(q, &a, &g)?,
        });
    }
    Ok(acc.unwrap_or_else(|| SymPoly::constant(DimVector::zero(q.n_vertices()), Rat::one())))
}

/// Graded dimensions by cohomological degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedDims {
    pub dim: DimVector,
    pub dims: BTreeMap<i64, usize>,
}

impl GradedDims {
    pub fn get(&self, n: i64) -> usize {
        self.dims.get(&n).copied().unwrap_or(0)
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.dims.keys().next_back().copied()
    }
}

/// Result of a spanning-set rank computation; `complete` is false when the
/// enumeration hit the ordering cap.
#[derive(Debug, Clone)]
pub struct SphericalResult {
    pub graded: GradedDims,
    pub complete: bool,
}

pub const DEFAULT_ORDERINGS_CAP: usize = 10_000;

fn distinct_orderings(d: &DimVector, cap: usize) -> (Vec<Vec<usize>>, bool) {
    fn rec(
        counts: &mut Vec<u32>,
        cur: &mut Vec<usize>,
        total: usize,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
        complete: &mut bool,
    ) {
        if out.len() >= cap {
            *complete = false;
            return;
        }
        if cur.len() == total {
            out.push(cur.clone());
            return;
        }
        for i in 0..counts.len() {
            if counts[i] > 0 {
                counts[i] -= 1;
                cur.push(i);
                rec(counts, cur, total, out, cap, complete);
                cur.pop();
                counts[i] += 1;
            }
        }
    }
    let mut counts: Vec<u32> = d.0.clone();
    let total = d.total() as usize;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(total);
    let mut complete = true;
    rec(&mut counts, &mut cur, total, &mut out, cap, &mut complete);
    (out, complete)
}

/// Exact rank over the rationals: clear denominators per row, then
/// fraction-free (Bareiss) elimination over the integers.
pub fn rational_rank(rows: Vec<Vec<Rat>>) -> usize {
    let mut m: Vec<Vec<Int>> = rows
        .into_iter()
        .map(|row| {
            let mut lcm = BigInt::one();
            for x in &row {
                lcm = num::integer::lcm(lcm, x.denom().clone());
            }
            row.into_iter()
                .map(|x| (x * Rat::from_integer(lcm.clone())).to_integer())
                .collect()
        })
        .collect();
    let nrows = m.len();
    let ncols = if nrows == 0 { 0 } else { m[0].len() };
    let mut rank = 0usize;
    let mut prev = Int::one();
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let pivot = (rank..nrows).find(|&r| !m[r][col].is_zero());
        let Some(pr) = pivot else { continue };
        m.swap(rank, pr);
        for r in rank + 1..nrows {
            for c in col + 1..ncols {
                let v = (&m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
            m[r][col] = Int::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Graded dimensions of the span of all ordered products of one-line
/// generators with vertex multiset `d`, per cohomological degree `<= n_max`.
pub fn spherical_dimensions(
    q: &Quiver,
    d: &DimVector,
    n_max: i64,
    orderings_cap: usize,
) -> Result<SphericalResult, ShuffleError> {
    let chi = euler_form(q, d, d);
    let (orderings, complete) = distinct_orderings(d, orderings_cap);
    let p_max = (n_max - chi).div_euclid(2);
    let mut by_degree: BTreeMap<u16, Vec<Poly>> = BTreeMap::new();
    if p_max >= 0 {
        for ordering in &orderings {
            // the kernel degree of an ordering is fixed; exponents only add
            let mut kdeg: i64 = 0;
            for u in 0..ordering.len() {
                for v in u + 1..ordering.len() {
                    kdeg += q.arrow_count(ordering[u], ordering[v]) as i64;
                }
            }
            let budget = p_max - kdeg;
            if budget < 0 {
                continue;
            }
            let m = ordering.len();
            let mut expo = vec![0u16; m];
            'tuples: loop {
                let seq: Vec<(usize, u16)> = ordering
                    .iter()
                    .zip(&expo)
                    .map(|(&v, &k)| (v, k))
                    .collect();
                let prod = product_of_generators(q, &seq)?;
                if !prod.is_zero() {
                    let deg = prod.homogeneous_degree().expect("products are homogeneous");
                    by_degree.entry(deg).or_default().push(prod.terms);
                }
                for i in 0..=m {
                    if i == m {
                        break 'tuples;
                    }
                    expo[i] += 1;
                    if expo.iter().map(|&x| x as i64).sum::<i64>() <= budget {
                        continue 'tuples;
                    }
                    expo[i] = 0;
                }
            }
        }
    }
    let mut dims: BTreeMap<i64, usize> = BTreeMap::new();
    let mut p = 0i64;
    while p <= p_max {
        dims.insert(chi + 2 * p, 0);
        p += 1;
    }
    for (deg, polys) in by_degree {
        let n = chi + 2 * deg as i64;
        if n > n_max {
            continue;
        }
        let basis: Vec<Monomial> = {
            let mut s = std::collections::BTreeSet::new();
            for p in &polys {
                for m in p.keys() {
                    s.insert(m.clone());
                }
            }
            s.into_iter().collect()
        };
        let rows: Vec<Vec<Rat>> = polys
            .iter()
            .map(|p| {
                basis
                    .iter()
                    .map(|m| p.get(m).cloned().unwrap_or_else(Rat::zero))
                    .collect()
            })
            .collect();
        dims.insert(n, rational_rank(rows));
    }
    Ok(SphericalResult {
        graded: GradedDims {
            dim: d.clone(),
            dims,
        },
        complete,
    })
}

/// Graded dimensions of the full per-vertex symmetric polynomial space:
/// Hilbert series `prod_i prod_{j=1}^{d_i} (1 - t^j)^{-1}` in the
/// cohomological grading.
pub fn coha_w0_dimensions(q: &Quiver, d: &DimVector, n_max: i64) -> GradedDims {
    let chi = euler_form(q, d, d);
    let p_max = (n_max - chi).div_euclid(2);
    let mut dims: BTreeMap<i64, usize> = BTreeMap::new();
    if p_max < 0 {
        return GradedDims {
            dim: d.clone(),
            dims,
        };
    }
    let mut counts = vec![0usize; p_max as usize + 1];
    counts[0] = 1;
    for &n in &d.0 {
        for j in 1..=n as usize {
            for deg in j..=p_max as usize {
                counts[deg] += counts[deg - j];
            }
        }
    }
    for (p, &c) in counts.iter().enumerate() {
        dims.insert(chi + 2 * p as i64, c);
    }
    GradedDims {
        dim: d.clone(),
        dims,
    }
}

/// Degree-by-degree comparison of a dimension series against computed
/// spherical dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SphericalVerdict {
    Equal { through: i64 },
    CohaLarger { n: i64, coha: usize, spherical: usize },
    Inconsistent { n: i64, coha: usize, spherical: usize },
}

/// Reads graded dimensions off a partition-function coefficient
/// (`dim^n = (-1)^n [q^{n/2}]`) and compares with `sph` through the
/// common window.
pub fn compare_spherical(
    zcoeff: &HalfLaurent,
    sph: &GradedDims,
) -> Result<SphericalVerdict, ShuffleError> {
    let limit = match (zcoeff.known_through(), sph.max_degree()) {
        (Some(hi), Some(s)) => hi.min(s),
        (None, Some(s)) => s,
        (_, None) => return Ok(SphericalVerdict::Equal { through: i64::MIN }),
    };
    let mut implied: BTreeMap<i64, usize> = BTreeMap::new();
    for (h, c) in zcoeff.terms() {
        if h > limit {
            continue;
        }
        let signed = if h.rem_euclid(2) == 0 {
            c.clone()
        } else {
            -c.clone()
        };
        if !signed.is_integer() || signed.is_negative() {
            return Err(ShuffleError::BadDimensionSeries {
                h,
                value: c.to_string(),
            });
        }
        let v: usize =
            signed
                .to_integer()
                .try_into()
                .map_err(|_| ShuffleError::BadDimensionSeries {
                    h,
                    value: c.to_string(),
                })?;
        if v > 0 {
            implied.insert(h, v);
        }
    }
    let min_n = implied
        .keys()
        .copied()
        .chain(sph.dims.keys().copied())
        .min()
        .unwrap_or(0);
    for n in min_n..=limit {
        let coha = implied.get(&n).copied().unwrap_or(0);
        let spherical = sph.get(n);
        if coha > spherical {
            return Ok(SphericalVerdict::CohaLarger { n, coha, spherical });
        }
        if coha < spherical {
            return Ok(SphericalVerdict::Inconsistent { n, coha, spherical });
        }
    }
    Ok(SphericalVerdict::Equal { through: limit })
}

/// Recombines a partition function from a BPS table with the invariant-part
/// value substituted at the top vector; plain delegation to the torus.
pub fn g_invariant_series(
    omegas: &BpsTable,
    quiver: &Quiver,
    bound: &DimVector,
    zeta: &Stability,
    order: i64,
    twist: Twist,
) -> Result<TorusElement, ShuffleError> {
    Ok(qtorus::recombine(omegas, quiver, bound, zeta, order, twist)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::qarith::rat_i;

    fn markov() -> Quiver {
        presets::markov_quiver()
    }

    fn mono(v: &[u16]) -> Monomial {
        v.to_vec()
    }

    #[test]
    fn product_with_no_kernel_is_plain() {
        // z_1^0 . z_3^0 -> 1 at (1,0,1)
        let q = markov();
        let p = product_of_generators(&q, &[(0, 0), (2, 0)]).unwrap();
        assert_eq!(p.dim, DimVector(vec![1, 0, 1]));
        assert_eq!(p.terms.len(), 1);
        assert_eq!(p.terms[&mono(&[0, 0])], rat_i(1));
    }

    #[test]
    fn pinned_degree_one_products() {
        let q = markov();
        // (z_1^0 . z_3^0) . z_2^0 -> (z_2 - z_1)^2, variables ordered (1,2,3)
        let p = product_of_generators(&q, &[(0, 0), (2, 0), (1, 0)]).unwrap();
        assert_eq!(p.dim, DimVector(vec![1, 1, 1]));
        assert_eq!(p.terms[&mono(&[0, 2, 0])], rat_i(1));
        assert_eq!(p.terms[&mono(&[1, 1, 0])], rat_i(-2));
        assert_eq!(p.terms[&mono(&[2, 0, 0])], rat_i(1));

        // z_3^0 . z_2^0 . z_1^0 -> (z_1 - z_3)^2
        let p = product_of_generators(&q, &[(2, 0), (1, 0), (0, 0)]).unwrap();
        assert_eq!(p.terms[&mono(&[2, 0, 0])], rat_i(1));
        assert_eq!(p.terms[&mono(&[1, 0, 1])], rat_i(-2));
        assert_eq!(p.terms[&mono(&[0, 0, 2])], rat_i(1));

        // z_2^0 . z_1^0 . z_3^0 -> (z_3 - z_2)^2
        let p = product_of_generators(&q, &[(1, 0), (0, 0), (2, 0)]).unwrap();
        assert_eq!(p.terms[&mono(&[0, 2, 0])], rat_i(1));
        assert_eq!(p.terms[&mono(&[0, 1, 1])], rat_i(-2));
        assert_eq!(p.terms[&mono(&[0, 0, 2])], rat_i(1));
    }

    #[test]
    fn degree_jump_matches_antisymmetrized_pairing() {
        // |f.g| - |f| - |g| = chi(e,d) - chi(d,e) for f at d, g at e
        let q = markov();
        let f = SymPoly::generator(3, 2, 1);
        let g = SymPoly::generator(3, 1, 0);
        let p = shuffle_product(&q, &f, &g).unwrap();
        let jump = p.cohomological_degree(&q).unwrap()
            - f.cohomological_degree(&q).unwrap()
            - g.cohomological_degree(&q).unwrap();
        let chi_de = euler_form(&q, &f.dim, &g.dim);
        let chi_ed = euler_form(&q, &g.dim, &f.dim);
        assert_eq!(jump, chi_ed - chi_de);
    }

    #[test]
    fn shuffle_is_associative_on_samples() {
        let q = markov();
        let a = SymPoly::generator(3, 0, 1);
        let b = SymPoly::generator(3, 1, 0);
        let c = SymPoly::generator(3, 2, 2);
        let left = shuffle_product(&q, &shuffle_product(&q, &a, &b).unwrap(), &c).unwrap();
        let right = shuffle_product(&q, &a, &shuffle_product(&q, &b, &c).unwrap()).unwrap();
        assert_eq!(left, right);

        // a repeated-vertex triple exercises the Vandermonde division
        let a = SymPoly::generator(3, 0, 0);
        let b = SymPoly::generator(3, 0, 1);
        let c = SymPoly::generator(3, 1, 0);
        let left = shuffle_product(&q, &shuffle_product(&q, &a, &b).unwrap(), &c).unwrap();
        let right = shuffle_product(&q, &a, &shuffle_product(&q, &b, &c).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn same_vertex_products_are_symmetric() {
        let q = markov();
        let a = SymPoly::generator(3, 0, 2);
        let b = SymPoly::generator(3, 0, 0);
        let p = shuffle_product(&q, &a, &b).unwrap();
        assert!(p.is_symmetric());
        assert_eq!(p.dim, DimVector(vec![2, 0, 0]));
    }

    #[test]
    fn spherical_dims_at_111() {
        let q = markov();
        let d = DimVector(vec![1, 1, 1]);
        let r = spherical_dimensions(&q, &d, 5, DEFAULT_ORDERINGS_CAP).unwrap();
        assert!(r.complete);
        assert_eq!(r.graded.get(-3), 0);
        assert_eq!(r.graded.get(-1), 0);
        assert_eq!(r.graded.get(1), 3);
        assert_eq!(r.graded.get(3), 7);
        assert_eq!(r.graded.get(5), 12);
    }

    #[test]
    fn full_w0_dims_at_111() {
        let q = markov();
        let d = DimVector(vec![1, 1, 1]);
        let g = coha_w0_dimensions(&q, &d, 5);
        assert_eq!(g.get(-3), 1);
        assert_eq!(g.get(-1), 3);
        assert_eq!(g.get(1), 6);
    }

    #[test]
    fn spherical_bounded_by_full_space() {
        let q = markov();
        for d in [DimVector(vec![1, 1, 1]), DimVector(vec![1, 1, 2])] {
            let n_max = 5;
            let sph = spherical_dimensions(&q, &d, n_max, DEFAULT_ORDERINGS_CAP).unwrap();
            let full = coha_w0_dimensions(&q, &d, n_max);
            for (&n, &dim) in &sph.graded.dims {
                assert!(
                    dim <= full.get(n),
                    "spherical dim exceeds full space at {} in degree {}",
                    d,
                    n
                );
            }
        }
    }

    #[test]
    fn unit_line_is_all_of_the_space() {
        // at d = delta_i: one dimension in each degree 1, 3, 5, ...
        let q = markov();
        let d = DimVector::unit(3, 1);
        let sph = spherical_dimensions(&q, &d, 7, DEFAULT_ORDERINGS_CAP).unwrap();
        let full = coha_w0_dimensions(&q, &d, 7);
        for n in [1, 3, 5, 7] {
            assert_eq!(sph.graded.get(n), 1);
            assert_eq!(full.get(n), 1);
        }
    }

    #[test]
    fn compare_detects_gap_and_equality() {
        let q = markov();
        let d = DimVector(vec![1, 1, 1]);
        let sph = spherical_dimensions(&q, &d, 5, DEFAULT_ORDERINGS_CAP)
            .unwrap()
            .graded;
        // -q^{1/2}(4-4q+q^2)/(1-q)^3 has dims 4, 8, 13, ...
        let gen_coeff = HalfLaurent::from_terms([(1, rat_i(-4)), (3, rat_i(4)), (5, rat_i(-1))])
            .mul(
                &HalfLaurent::from_terms([(0, rat_i(1)), (2, rat_i(-1))])
                    .pow(3)
                    .inverse_series(40)
                    .unwrap(),
            );
        match compare_spherical(&gen_coeff, &sph).unwrap() {
            SphericalVerdict::CohaLarger { n, coha, spherical } => {
                assert_eq!((n, coha, spherical), (1, 4, 3));
            }
            v => panic!("expected a gap, got {:?}", v),
        }
        // -q^{1/2}(3-2q)/(1-q)^3 has dims 3, 7, 12, ...
        let marg_coeff = HalfLaurent::from_terms([(1, rat_i(-3)), (3, rat_i(2))]).mul(
            &HalfLaurent::from_terms([(0, rat_i(1)), (2, rat_i(-1))])
                .pow(3)
                .inverse_series(40)
                .unwrap(),
        );
        match compare_spherical(&marg_coeff, &sph).unwrap() {
            SphericalVerdict::Equal { through } => assert!(through >= 5),
            v => panic!("expected equality, got {:?}", v),
        }
    }

    #[test]
    fn compare_rejects_non_dimension_series() {
        let q = markov();
        let d = DimVector(vec![1, 1, 1]);
        let sph = spherical_dimensions(&q, &d, 3, DEFAULT_ORDERINGS_CAP)
            .unwrap()
            .graded;
        // +q^{1/2} would be dimension -1 in degree 1
        let bad = HalfLaurent::monomial(1, rat_i(1));
        assert!(matches!(
            compare_spherical(&bad, &sph),
            Err(ShuffleError::BadDimensionSeries { .. })
        ));
    }

    #[test]
    fn w0_closed_form_matches_symmetric_dimensions() {
        // the zero-potential coefficient is the dimension series of the
        // full symmetric space, degree by degree
        let q = markov();
        let z = crate::dimred::zseries_w0(&q, &DimVector(vec![1, 1, 1]), 40);
        for d in DimVector::box_below(&DimVector(vec![1, 1, 1])) {
            if d.is_zero() {
                continue;
            }
            let full = coha_w0_dimensions(&q, &d, 15);
            match compare_spherical(&z.coeff(&d), &full).unwrap() {
                SphericalVerdict::Equal { .. } => {}
                v => panic!("closed form disagrees at {}: {:?}", d, v),
            }
        }
    }
}
