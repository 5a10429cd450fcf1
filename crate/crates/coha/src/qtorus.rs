//! The quantum torus truncated to a dimension-vector box.
//!
//! Elements are coefficient tables over dimension vectors `d <= box` with
//! windowed Laurent coefficients. The twisted product multiplies symbols by
//! `x^d x^e = (-q^{1/2})^{chi(d,e) - chi(e,d)} x^{d+e}`; dropping vectors
//! outside the box is consistent because their complement is an ideal.
//!
//! On a commutative (symmetric-pairing) support the plethystic exponential
//! and logarithm are computed through Adams operations:
//! `Exp(f) = exp(sum_m psi_m(f)/m)` and its Moebius inversion. Slope
//! factorization runs by induction on total degree, and refined BPS
//! invariants come out of the slope factors through the logarithm.

use num::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

use crate::qarith::{rat_i, HalfLaurent, Rat};
use crate::quiver::{
    euler_antisym, euler_form, is_generic, DimVector, Genericity, Quiver, Stability,
};

/// Exponent convention for the product twist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Twist {
    /// `(-q^{1/2})^{chi(d,e) - chi(e,d)}`; the convention pinned by the
    /// low-degree factorization identities.
    #[default]
    Antisymmetrized,
    /// `(-q^{1/2})^{chi(d,e)}`. Kept as a debug mode: enabling it must make
    /// the coefficient identities fail, which is what pins the default.
    PlainChi,
}

impl Twist {
    pub fn exponent(&self, q: &Quiver, d: &DimVector, e: &DimVector) -> i64 {
        match self {
            Twist::Antisymmetrized => euler_antisym(q, d, e),
            Twist::PlainChi => euler_form(q, d, e),
        }
    }

    /// The twist as a Laurent monomial `(-q^{1/2})^k`.
    pub fn factor(&self, q: &Quiver, d: &DimVector, e: &DimVector) -> HalfLaurent {
        let k = self.exponent(q, d, e);
        let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        HalfLaurent::monomial(k, rat_i(sign))
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Twist::Antisymmetrized => "(-q^{1/2})^{chi(d,e)-chi(e,d)}",
            Twist::PlainChi => "(-q^{1/2})^{chi(d,e)} [debug perturbation]",
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum TorusError {
    #[error("elements live on different quivers")]
    QuiverMismatch,
    #[error("elements have different truncation boxes")]
    BoxMismatch,
    #[error("constant term must be 1")]
    ConstantTermNotOne,
    #[error("support is not commutative: chi({d},{e}) != chi({e},{d}); spans more than one slope class")]
    MixedSlopeSupport { d: String, e: String },
    #[error("stability is not generic on the box: chi at ({d},{e}) is asymmetric for equal slopes")]
    NonGenericStability { d: String, e: String },
    #[error("integrality failure at {d}: nonzero coefficients at the window edge of {series}")]
    IntegralityFailure { d: String, series: String },
    #[error("BPS invariant at {d} has non-integer coefficients: {series}")]
    NonIntegralBps { d: String, series: String },
}

/// A truncated quantum-torus element: coefficients indexed by dimension
/// vectors inside the box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusElement {
    pub quiver: Quiver,
    pub bound: DimVector,
    pub coeffs: BTreeMap<DimVector, HalfLaurent>,
}

impl TorusElement {
    pub fn zero(quiver: Quiver, bound: DimVector) -> Self {
        TorusElement {
            quiver,
            bound,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn unit(quiver: Quiver, bound: DimVector) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(DimVector::zero(bound.len()), HalfLaurent::one());
        TorusElement {
            quiver,
            bound,
            coeffs,
        }
    }

    pub fn coeff(&self, d: &DimVector) -> HalfLaurent {
        self.coeffs.get(d).cloned().unwrap_or_else(HalfLaurent::zero)
    }

    pub fn set_coeff(&mut self, d: DimVector, c: HalfLaurent) {
        assert!(d.leq(&self.bound), "vector outside the truncation box");
        if c.is_zero() && c.is_exact() {
            self.coeffs.remove(&d);
        } else {
            self.coeffs.insert(d, c);
        }
    }

    /// Nonzero support, zero vector excluded.
    pub fn support(&self) -> Vec<DimVector> {
        self.coeffs
            .iter()
            .filter(|(d, c)| !d.is_zero() && !c.is_zero())
            .map(|(d, _)| d.clone())
            .collect()
    }

    pub fn constant_term(&self) -> HalfLaurent {
        self.coeff(&DimVector::zero(self.bound.len()))
    }

    pub fn is_one(&self) -> bool {
        self.constant_term() == HalfLaurent::one() && self.support().is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self, TorusError> {
        check_compatible(self, other)?;
        let mut out = self.clone();
        for (d, c) in &other.coeffs {
            let sum = out.coeff(d).add(c);
            out.set_coeff(d.clone(), sum);
        }
        Ok(out)
    }

    pub fn scalar_mul(&self, s: &HalfLaurent) -> Self {
        let mut out = TorusElement::zero(self.quiver.clone(), self.bound.clone());
        for (d, c) in &self.coeffs {
            out.set_coeff(d.clone(), c.mul(s));
        }
        out
    }

    fn check_commutative_support(&self) -> Result<(), TorusError> {
        let supp = self.support();
        for d in &supp {
            for e in &supp {
                if euler_form(&self.quiver, d, e) != euler_form(&self.quiver, e, d) {
                    return Err(TorusError::MixedSlopeSupport {
                        d: d.to_string(),
                        e: e.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn check_compatible(x: &TorusElement, y: &TorusElement) -> Result<(), TorusError> {
    if x.quiver != y.quiver {
        return Err(TorusError::QuiverMismatch);
    }
    if x.bound != y.bound {
        return Err(TorusError::BoxMismatch);
    }
    Ok(())
}

/// Twisted product, truncated to the common box.
pub fn twisted_mul(
    x: &TorusElement,
    y: &TorusElement,
    twist: Twist,
) -> Result<TorusElement, TorusError> {
    check_compatible(x, y)?;
    let mut out = TorusElement::zero(x.quiver.clone(), x.bound.clone());
    for (d, cd) in &x.coeffs {
        for (e, ce) in &y.coeffs {
            let f = d.add(e);
            if !f.leq(&x.bound) {
                continue;
            }
            let t = twist.factor(&x.quiver, d, e);
            let term = cd.mul(ce).mul(&t);
            let acc = out.coeff(&f).add(&term);
            out.set_coeff(f, acc);
        }
    }
    Ok(out)
}

/// Untwisted convolution; only correct on commuting supports, where the
/// twist is trivial anyway. This is the ring the plethystic operations
/// live in.
fn plain_mul(x: &TorusElement, y: &TorusElement) -> TorusElement {
    let mut out = TorusElement::zero(x.quiver.clone(), x.bound.clone());
    for (d, cd) in &x.coeffs {
        for (e, ce) in &y.coeffs {
            let f = d.add(e);
            if !f.leq(&x.bound) {
                continue;
            }
            let term = cd.mul(ce);
            let acc = out.coeff(&f).add(&term);
            out.set_coeff(f, acc);
        }
    }
    out
}

/// Adams operation: `x^d -> x^{m d}`, `q^{1/2} -> q^{m/2}` on coefficients.
/// Vectors pushed outside the box are dropped.
fn adams(x: &TorusElement, m: u32) -> TorusElement {
    let mut out = TorusElement::zero(x.quiver.clone(), x.bound.clone());
    for (d, c) in &x.coeffs {
        let md = d.scaled(m);
        if md.leq(&x.bound) {
            out.set_coeff(md, c.adams(m as i64));
        }
    }
    out
}

/// exp of a constant-term-free element in the commutative support ring.
fn exp_series(g: &TorusElement) -> TorusElement {
    let mut out = TorusElement::unit(g.quiver.clone(), g.bound.clone());
    let mut power = TorusElement::unit(g.quiver.clone(), g.bound.clone());
    let mut factorial = rat_i(1);
    let max_k = g.bound.total().max(1);
    for k in 1..=max_k {
        power = plain_mul(&power, g);
        if power.coeffs.is_empty() {
            break;
        }
        factorial *= rat_i(k as i64);
        let inv = HalfLaurent::monomial(0, rat_i(1) / factorial.clone());
        out = out.add(&power.scalar_mul(&inv)).expect("same box");
    }
    out
}

/// log of a constant-term-1 element in the commutative support ring.
fn log_series(f: &TorusElement) -> TorusElement {
    let mut u = f.clone();
    u.set_coeff(DimVector::zero(f.bound.len()), HalfLaurent::zero());
    let mut out = TorusElement::zero(f.quiver.clone(), f.bound.clone());
    let mut power = TorusElement::unit(f.quiver.clone(), f.bound.clone());
    let max_k = f.bound.total().max(1);
    for k in 1..=max_k {
        power = plain_mul(&power, &u);
        if power.coeffs.is_empty() {
            break;
        }
        let sign = if k % 2 == 1 { 1 } else { -1 };
        let scale = HalfLaurent::monomial(0, Rat::new(sign.into(), (k as i64).into()));
        out = out.add(&power.scalar_mul(&scale)).expect("same box");
    }
    out
}

fn moebius(n: u32) -> i64 {
    let mut n = n;
    let mut mu = 1i64;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            mu = -mu;
        }
        p += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Plethystic exponential of an element with zero constant term and
/// commuting (single-slope) support.
pub fn pleth_exp(f: &TorusElement) -> Result<TorusElement, TorusError> {
    if !f.constant_term().is_zero() {
        return Err(TorusError::ConstantTermNotOne);
    }
    f.check_commutative_support()?;
    let mut acc = TorusElement::zero(f.quiver.clone(), f.bound.clone());
    let max_m = f.bound.total().max(1);
    for m in 1..=max_m {
        let a = adams(f, m);
        if a.coeffs.is_empty() {
            if m > 1 {
                break;
            }
            continue;
        }
        let scale = HalfLaurent::monomial(0, Rat::new(1.into(), (m as i64).into()));
        acc = acc.add(&a.scalar_mul(&scale)).expect("same box");
    }
    Ok(exp_series(&acc))
}

/// Plethystic logarithm: exact inverse of [`pleth_exp`] on the box.
pub fn pleth_log(f: &TorusElement) -> Result<TorusElement, TorusError> {
    if f.constant_term() != HalfLaurent::one() {
        return Err(TorusError::ConstantTermNotOne);
    }
    f.check_commutative_support()?;
    let l = log_series(f);
    let mut out = TorusElement::zero(f.quiver.clone(), f.bound.clone());
    let max_m = f.bound.total().max(1);
    for m in 1..=max_m {
        let mu = moebius(m);
        if mu == 0 {
            continue;
        }
        let a = adams(&l, m);
        if a.coeffs.is_empty() {
            continue;
        }
        let scale = HalfLaurent::monomial(0, Rat::new(mu.into(), (m as i64).into()));
        out = out.add(&a.scalar_mul(&scale)).expect("same box");
    }
    Ok(out)
}

/// Slope factors keyed by ascending slope.
pub type SlopeFactors = BTreeMap<Rat, TorusElement>;

/// Ordered product of the factors, slope ascending left to right.
pub fn ordered_product(factors: &SlopeFactors, twist: Twist) -> Option<TorusElement> {
    let mut acc: Option<TorusElement> = None;
    for f in factors.values() {
        acc = Some(match acc {
            None => f.clone(),
            Some(a) => twisted_mul(&a, f, twist).expect("factors share box"),
        });
    }
    acc
}

/// Factorizes a constant-term-1 series as an ascending-slope twisted
/// product of single-slope factors, by induction on total degree: the
/// `x^d` coefficient identity has a single unknown, the slope-`mu(d)`
/// factor's own `x^d` term.
pub fn factorize_by_slope(
    z: &TorusElement,
    zeta: &Stability,
    twist: Twist,
) -> Result<SlopeFactors, TorusError> {
    if z.constant_term() != HalfLaurent::one() {
        return Err(TorusError::ConstantTermNotOne);
    }
    if let Genericity::Violation { d, e, .. } = is_generic(&z.quiver, zeta, &z.bound) {
        return Err(TorusError::NonGenericStability {
            d: d.to_string(),
            e: e.to_string(),
        });
    }
    let vectors: Vec<DimVector> = DimVector::box_below(&z.bound)
        .into_iter()
        .filter(|d| !d.is_zero())
        .collect();
    let mut factors: SlopeFactors = BTreeMap::new();
    for d in &vectors {
        factors
            .entry(zeta.slope(d))
            .or_insert_with(|| TorusElement::unit(z.quiver.clone(), z.bound.clone()));
    }
    for d in &vectors {
        let partial = ordered_product(&factors, twist)
            .unwrap_or_else(|| TorusElement::unit(z.quiver.clone(), z.bound.clone()));
        let cross = partial.coeff(d);
        let residual = z.coeff(d).sub(&cross);
        let slope = zeta.slope(d);
        let factor = factors.get_mut(&slope).expect("slope preseeded");
        factor.set_coeff(d.clone(), residual);
    }
    Ok(factors)
}

/// Refined BPS table: Laurent polynomials indexed by dimension vector.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BpsTable {
    pub omega: BTreeMap<DimVector, HalfLaurent>,
}

impl BpsTable {
    pub fn get(&self, d: &DimVector) -> HalfLaurent {
        self.omega.get(d).cloned().unwrap_or_else(HalfLaurent::zero)
    }

    pub fn set(&mut self, d: DimVector, omega: HalfLaurent) {
        assert!(!d.is_zero(), "no BPS invariant at the zero vector");
        self.omega.insert(d, omega);
    }
}

/// Half-unit width of the guard band at the window's upper edge: a series
/// with nonzero coefficients inside the band cannot be certified to be a
/// Laurent polynomial (denominators up to `1 - q^3` leave no gap this wide).
pub const EDGE_MARGIN: i64 = 6;

/// Reads refined BPS invariants off a single-slope factor:
/// `Omega_d = [Log factor]_d * (1-q)/(-q^{1/2})`, asserting each result is
/// an integer Laurent polynomial well inside its window.
pub fn extract_bps(factor: &TorusElement) -> Result<BpsTable, TorusError> {
    let log = pleth_log(factor)?;
    // (1-q)/(-q^{1/2}) = -q^{-1/2} + q^{1/2}
    let unkernel = HalfLaurent::from_terms([(-1, rat_i(-1)), (1, rat_i(1))]);
    let mut out = BpsTable::default();
    for d in factor.support() {
        let omega = log.coeff(&d).mul(&unkernel);
        if let Some((_, hi)) = omega.window() {
            let edge_occupied = omega
                .terms()
                .any(|(h, c)| h > hi - EDGE_MARGIN && !c.is_zero());
            if edge_occupied {
                return Err(TorusError::IntegralityFailure {
                    d: d.to_string(),
                    series: omega.pretty(),
                });
            }
        }
        let omega = omega.into_polynomial();
        if !omega.has_integer_coeffs() {
            return Err(TorusError::NonIntegralBps {
                d: d.to_string(),
                series: omega.pretty(),
            });
        }
        out.set(d, omega);
    }
    Ok(out)
}

/// Factorizes and extracts the full BPS table of a partition function.
pub fn bps_of_partition_function(
    z: &TorusElement,
    zeta: &Stability,
    twist: Twist,
) -> Result<BpsTable, TorusError> {
    let factors = factorize_by_slope(z, zeta, twist)?;
    let mut out = BpsTable::default();
    for factor in factors.values() {
        let part = extract_bps(factor)?;
        for (d, omega) in part.omega {
            out.set(d, omega);
        }
    }
    // vectors never reached by any factor still deserve an explicit zero
    for d in DimVector::box_below(&z.bound) {
        if !d.is_zero() {
            out.omega.entry(d).or_insert_with(HalfLaurent::zero);
        }
    }
    Ok(out)
}

/// Rebuilds the partition function from a BPS table: the ascending-slope
/// twisted product of plethystic exponentials. Exact inverse of
/// factorize-then-extract.
pub fn recombine(
    omegas: &BpsTable,
    quiver: &Quiver,
    bound: &DimVector,
    zeta: &Stability,
    order: i64,
    twist: Twist,
) -> Result<TorusElement, TorusError> {
    if let Genericity::Violation { d, e, .. } = is_generic(quiver, zeta, bound) {
        return Err(TorusError::NonGenericStability {
            d: d.to_string(),
            e: e.to_string(),
        });
    }
    // -q^{1/2}/(1-q) as a window
    let kernel = HalfLaurent::from_terms([(0, rat_i(1)), (2, rat_i(-1))])
        .inverse_series(order - 1)
        .expect("1-q invertible")
        .mul(&HalfLaurent::monomial(1, rat_i(-1)));
    let mut by_slope: BTreeMap<Rat, TorusElement> = BTreeMap::new();
    for (d, omega) in &omegas.omega {
        if omega.is_zero() || !d.leq(bound) {
            continue;
        }
        let slot = by_slope
            .entry(zeta.slope(d))
            .or_insert_with(|| TorusElement::zero(quiver.clone(), bound.clone()));
        slot.set_coeff(d.clone(), omega.mul(&kernel));
    }
    let mut acc = TorusElement::unit(quiver.clone(), bound.clone());
    for (_, inner) in by_slope {
        let factor = pleth_exp(&inner)?;
        acc = twisted_mul(&acc, &factor, twist)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    const ORDER: i64 = 40;

    fn markov_unit() -> TorusElement {
        TorusElement::unit(presets::markov_quiver(), DimVector(vec![1, 1, 1]))
    }

    fn minus_q_half_over_one_minus_q() -> HalfLaurent {
        HalfLaurent::from_terms([(0, rat_i(1)), (2, rat_i(-1))])
            .inverse_series(ORDER - 1)
            .unwrap()
            .mul(&HalfLaurent::monomial(1, rat_i(-1)))
    }

    #[test]
    fn twist_on_unit_vectors() {
        let q = presets::markov_quiver();
        let b = DimVector(vec![1, 1, 1]);
        let d3 = DimVector::unit(3, 2);
        let d2 = DimVector::unit(3, 1);
        let mut x = TorusElement::zero(q.clone(), b.clone());
        x.set_coeff(d3.clone(), HalfLaurent::one());
        let mut y = TorusElement::zero(q.clone(), b.clone());
        y.set_coeff(d2.clone(), HalfLaurent::one());
        // x^{d3} x^{d2} = q x^{(0,1,1)}
        let p = twisted_mul(&x, &y, Twist::default()).unwrap();
        assert_eq!(
            p.coeff(&DimVector(vec![0, 1, 1])),
            HalfLaurent::monomial(2, rat_i(1))
        );
        // the other order picks up q^{-1}
        let p = twisted_mul(&y, &x, Twist::default()).unwrap();
        assert_eq!(
            p.coeff(&DimVector(vec![0, 1, 1])),
            HalfLaurent::monomial(-2, rat_i(1))
        );
    }

    #[test]
    fn equal_vectors_have_no_twist() {
        let q = presets::markov_quiver();
        let b = DimVector(vec![2, 2, 2]);
        let d = DimVector(vec![1, 1, 1]);
        let mut x = TorusElement::zero(q, b);
        x.set_coeff(d.clone(), HalfLaurent::one());
        let p = twisted_mul(&x, &x, Twist::default()).unwrap();
        assert_eq!(p.coeff(&DimVector(vec![2, 2, 2])), HalfLaurent::one());
    }

    #[test]
    fn twisted_mul_rejects_mismatched_boxes() {
        let q = presets::markov_quiver();
        let x = TorusElement::unit(q.clone(), DimVector(vec![1, 1, 1]));
        let y = TorusElement::unit(q, DimVector(vec![2, 2, 2]));
        assert!(matches!(
            twisted_mul(&x, &y, Twist::default()),
            Err(TorusError::BoxMismatch)
        ));
    }

    #[test]
    fn exp_of_zero_is_one() {
        let z = TorusElement::zero(presets::markov_quiver(), DimVector(vec![1, 1, 1]));
        assert!(pleth_exp(&z).unwrap().is_one());
    }

    #[test]
    fn exp_line_matches_gl_stack_series() {
        // Exp(-q^{1/2}/(1-q) x^{d1}) on the box 2*d1
        let q = presets::markov_quiver();
        let bound = DimVector(vec![2, 0, 0]);
        let d1 = DimVector::unit(3, 0);
        let mut f = TorusElement::zero(q, bound);
        f.set_coeff(d1.clone(), minus_q_half_over_one_minus_q());
        let e = pleth_exp(&f).unwrap();
        assert!(e.coeff(&d1).agrees_with(&minus_q_half_over_one_minus_q(), 30));
        // x^{2 d1} coefficient: q^2/((1-q)(1-q^2))
        let num = HalfLaurent::monomial(4, rat_i(1));
        let den = HalfLaurent::from_terms([(0, rat_i(1)), (2, rat_i(-1))])
            .mul(&HalfLaurent::from_terms([(0, rat_i(1)), (4, rat_i(-1))]));
        let expected = num.mul(&den.inverse_series(40).unwrap());
        assert!(e.coeff(&DimVector(vec![2, 0, 0])).agrees_with(&expected, 30));
    }

    #[test]
    fn log_inverts_exp() {
        let q = presets::markov_quiver();
        let bound = DimVector(vec![2, 0, 0]);
        let d1 = DimVector::unit(3, 0);
        let mut f = TorusElement::zero(q, bound.clone());
        f.set_coeff(d1, minus_q_half_over_one_minus_q());
        f.set_coeff(
            DimVector(vec![2, 0, 0]),
            HalfLaurent::monomial(3, rat_i(5)).add(&minus_q_half_over_one_minus_q()),
        );
        let e = pleth_exp(&f).unwrap();
        let g = pleth_log(&e).unwrap();
        for (d, c) in &f.coeffs {
            assert!(g.coeff(d).agrees_with(c, 30), "mismatch at {}", d);
        }
        // the single-line log has no 2*d1 component
        let mut line = TorusElement::zero(presets::markov_quiver(), bound);
        line.set_coeff(DimVector::unit(3, 0), minus_q_half_over_one_minus_q());
        let back = pleth_log(&pleth_exp(&line).unwrap()).unwrap();
        assert!(back
            .coeff(&DimVector(vec![2, 0, 0]))
            .agrees_with(&HalfLaurent::zero(), 30));
    }

    #[test]
    fn exp_rejects_noncommutative_support() {
        let q = presets::markov_quiver();
        let bound = DimVector(vec![1, 1, 1]);
        let mut f = TorusElement::zero(q, bound);
        f.set_coeff(DimVector::unit(3, 0), HalfLaurent::one());
        f.set_coeff(DimVector::unit(3, 1), HalfLaurent::one());
        assert!(matches!(
            pleth_exp(&f),
            Err(TorusError::MixedSlopeSupport { .. })
        ));
    }

    #[test]
    fn log_of_first_order_line() {
        let q = presets::markov_quiver();
        let bound = DimVector(vec![1, 1, 1]);
        let d = DimVector(vec![1, 1, 1]);
        let mut f = TorusElement::unit(q, bound);
        let a = HalfLaurent::monomial(1, rat_i(7));
        f.set_coeff(d.clone(), a.clone());
        let g = pleth_log(&f).unwrap();
        assert_eq!(g.coeff(&d), a);
    }

    #[test]
    fn unit_is_multiplicative_identity() {
        let one = markov_unit();
        let mut x = markov_unit();
        x.set_coeff(DimVector(vec![1, 0, 1]), HalfLaurent::monomial(2, rat_i(3)));
        let p = twisted_mul(&one, &x, Twist::default()).unwrap();
        assert_eq!(p, x);
        let p = twisted_mul(&x, &one, Twist::default()).unwrap();
        assert_eq!(p, x);
    }
}
