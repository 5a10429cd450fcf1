//! Rational functions in `q`, stored canonically.
//!
//! Internally a fraction of dense polynomials in `t = q^{1/2}` (so that a
//! stray half-power prefactor in a numerator is representable), normalized
//! so that the denominator is monic and coprime to the numerator. Equal
//! values therefore have identical representations and `==` is semantic
//! equality. In every pipeline here the numerator and denominator are
//! honest polynomials in `q` (even powers of `t`).

use num::{One, Zero};
use std::fmt;

use super::half_laurent::{rat_pow, HalfLaurent, Rat};
use super::QArithError;

/// Dense polynomial in `t`, index = half-unit exponent.
type TPoly = Vec<Rat>;

fn tp_trim(p: &mut TPoly) {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

fn tp_is_zero(p: &TPoly) -> bool {
    p.is_empty()
}

fn tp_add(a: &TPoly, b: &TPoly) -> TPoly {
    let mut out = vec![Rat::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c.clone();
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c.clone();
    }
    tp_trim(&mut out);
    out
}

fn tp_neg(a: &TPoly) -> TPoly {
    a.iter().map(|c| -c.clone()).collect()
}

fn tp_mul(a: &TPoly, b: &TPoly) -> TPoly {
    if tp_is_zero(a) || tp_is_zero(b) {
        return Vec::new();
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            if !cb.is_zero() {
                out[i + j] += ca.clone() * cb.clone();
            }
        }
    }
    tp_trim(&mut out);
    out
}

/// Euclidean remainder of `a` by nonzero `b`.
fn tp_rem(a: &TPoly, b: &TPoly) -> TPoly {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() >= b.len() && !tp_is_zero(&r) {
        let dr = r.len() - 1;
        let f = r[dr].clone() / lead.clone();
        let shift = dr - db;
        for (j, cb) in b.iter().enumerate() {
            let v = r[shift + j].clone() - f.clone() * cb.clone();
            r[shift + j] = v;
        }
        tp_trim(&mut r);
    }
    r
}

/// Monic gcd over the rationals.
fn tp_gcd(a: &TPoly, b: &TPoly) -> TPoly {
    let mut x = a.clone();
    let mut y = b.clone();
    while !tp_is_zero(&y) {
        let r = tp_rem(&x, &y);
        x = y;
        y = r;
    }
    if let Some(lead) = x.last().cloned() {
        for c in &mut x {
            *c = c.clone() / lead.clone();
        }
    }
    x
}

fn tp_divexact(a: &TPoly, b: &TPoly) -> TPoly {
    // exact division, used only with gcd factors
    let mut r = a.clone();
    let mut q = vec![Rat::zero(); a.len().saturating_sub(b.len()) + 1];
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() >= b.len() && !tp_is_zero(&r) {
        let dr = r.len() - 1;
        let f = r[dr].clone() / lead.clone();
        let shift = dr - db;
        q[shift] = f.clone();
        for (j, cb) in b.iter().enumerate() {
            let v = r[shift + j].clone() - f.clone() * cb.clone();
            r[shift + j] = v;
        }
        tp_trim(&mut r);
    }
    debug_assert!(tp_is_zero(&r), "inexact polynomial division");
    tp_trim(&mut q);
    q
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QRational {
    num: TPoly,
    den: TPoly,
}

impl QRational {
    fn normalized(mut num: TPoly, mut den: TPoly) -> Result<Self, QArithError> {
        tp_trim(&mut num);
        tp_trim(&mut den);
        if tp_is_zero(&den) {
            return Err(QArithError::DivisionByZero);
        }
        if tp_is_zero(&num) {
            return Ok(QRational {
                num: Vec::new(),
                den: vec![Rat::one()],
            });
        }
        let g = tp_gcd(&num, &den);
        if g.len() > 1 {
            num = tp_divexact(&num, &g);
            den = tp_divexact(&den, &g);
        }
        let lead = den.last().cloned().expect("nonzero denominator");
        for c in num.iter_mut().chain(den.iter_mut()) {
            *c = c.clone() / lead.clone();
        }
        Ok(QRational { num, den })
    }

    /// Builds from exact Laurent numerator and denominator; negative
    /// exponents are cleared by a common shift.
    pub fn from_laurents(num: &HalfLaurent, den: &HalfLaurent) -> Result<Self, QArithError> {
        if !num.is_exact() || !den.is_exact() {
            return Err(QArithError::WindowedInput);
        }
        if den.is_zero() {
            return Err(QArithError::DivisionByZero);
        }
        let low = num.min_exp().unwrap_or(0).min(den.min_exp().unwrap_or(0)).min(0);
        let shift = -low;
        let to_dense = |x: &HalfLaurent| -> TPoly {
            let mut v = vec![Rat::zero(); (x.max_exp().unwrap_or(0) + shift + 1).max(0) as usize];
            for (h, c) in x.terms() {
                v[(h + shift) as usize] = c.clone();
            }
            v
        };
        Self::normalized(to_dense(num), to_dense(den))
    }

    pub fn from_polynomial(p: &HalfLaurent) -> Result<Self, QArithError> {
        Self::from_laurents(p, &HalfLaurent::one())
    }

    pub fn zero() -> Self {
        QRational {
            num: Vec::new(),
            den: vec![Rat::one()],
        }
    }

    pub fn one() -> Self {
        QRational {
            num: vec![Rat::one()],
            den: vec![Rat::one()],
        }
    }

    pub fn from_rat(c: Rat) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            QRational {
                num: vec![c],
                den: vec![Rat::one()],
            }
        }
    }

    /// `q^k` for any integer `k`.
    pub fn q_pow(k: i64) -> Self {
        let h = 2 * k;
        if h >= 0 {
            let mut num = vec![Rat::zero(); h as usize + 1];
            num[h as usize] = Rat::one();
            QRational {
                num,
                den: vec![Rat::one()],
            }
        } else {
            let mut den = vec![Rat::zero(); (-h) as usize + 1];
            den[(-h) as usize] = Rat::one();
            QRational {
                num: vec![Rat::one()],
                den,
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        tp_is_zero(&self.num)
    }

    pub fn num_laurent(&self) -> HalfLaurent {
        HalfLaurent::from_terms(
            self.num
                .iter()
                .enumerate()
                .map(|(h, c)| (h as i64, c.clone())),
        )
    }

    pub fn den_laurent(&self) -> HalfLaurent {
        HalfLaurent::from_terms(
            self.den
                .iter()
                .enumerate()
                .map(|(h, c)| (h as i64, c.clone())),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = tp_add(
            &tp_mul(&self.num, &other.den),
            &tp_mul(&other.num, &self.den),
        );
        let den = tp_mul(&self.den, &other.den);
        Self::normalized(num, den).expect("denominators nonzero")
    }

    pub fn neg(&self) -> Self {
        QRational {
            num: tp_neg(&self.num),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::normalized(
            tp_mul(&self.num, &other.num),
            tp_mul(&self.den, &other.den),
        )
        .expect("denominators nonzero")
    }

    pub fn div(&self, other: &Self) -> Result<Self, QArithError> {
        if other.is_zero() {
            return Err(QArithError::DivisionByZero);
        }
        Self::normalized(
            tp_mul(&self.num, &other.den),
            tp_mul(&self.den, &other.num),
        )
    }

    pub fn pow(&self, k: i64) -> Result<Self, QArithError> {
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(self);
        }
        if k < 0 {
            acc = Self::one().div(&acc)?;
        }
        Ok(acc)
    }

    /// Substitutes `q -> 1/q` (equivalently `t -> 1/t`) and re-clears
    /// denominators. Involutive.
    pub fn invert_q(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let l = self.num.len().max(self.den.len()) - 1;
        let rev = |p: &TPoly| -> TPoly {
            let mut out = vec![Rat::zero(); l + 1];
            for (i, c) in p.iter().enumerate() {
                out[l - i] = c.clone();
            }
            tp_trim(&mut out);
            out
        };
        Self::normalized(rev(&self.num), rev(&self.den)).expect("nonzero denominator")
    }

    /// Laurent expansion around `q = 0` through half-exponent `order_hi`.
    /// The window's lower edge is the exact order of the pole or zero.
    pub fn series(&self, order_hi: i64) -> Result<HalfLaurent, QArithError> {
        if self.is_zero() {
            return Ok(HalfLaurent::zero());
        }
        let num = self.num_laurent();
        let den = self.den_laurent();
        let num_min = num.min_exp().expect("nonzero numerator");
        let inv = den.inverse_series(order_hi - num_min)?;
        Ok(num.mul(&inv))
    }

    /// Evaluates at a rational `q`-value; requires integer powers.
    pub fn eval(&self, x: &Rat) -> Result<Rat, QArithError> {
        let eval_tp = |p: &TPoly| -> Result<Rat, QArithError> {
            let mut acc = Rat::zero();
            for (h, c) in p.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if h % 2 != 0 {
                    return Err(QArithError::OddHalfPower);
                }
                acc += c.clone() * rat_pow(x, (h / 2) as i64)?;
            }
            Ok(acc)
        };
        let d = eval_tp(&self.den)?;
        if d.is_zero() {
            return Err(QArithError::EvalAtPole);
        }
        Ok(eval_tp(&self.num)? / d)
    }
}

impl fmt::Display for QRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.num_laurent();
        if self.den == vec![Rat::one()] {
            return f.write_str(&num.pretty());
        }
        let den = self.den_laurent();
        write!(f, "({})/({})", num.pretty(), den.pretty())
    }
}

#[cfg(test)]
mod tests {
    use super::super::half_laurent::{rat_i, HalfLaurent};
    use super::*;

    fn poly(terms: &[(i64, i64)]) -> HalfLaurent {
        HalfLaurent::from_terms(terms.iter().map(|&(h, c)| (h, rat_i(c))))
    }

    /// (3q^2-2q)/(q-1)^3 in canonical form.
    fn marg_count_series() -> QRational {
        let num = poly(&[(4, 3), (2, -2)]);
        let q_minus_1 = poly(&[(2, 1), (0, -1)]);
        let den = q_minus_1.mul(&q_minus_1).mul(&q_minus_1);
        QRational::from_laurents(&num, &den).unwrap()
    }

    #[test]
    fn canonical_form_is_unique() {
        // (6q^2-4q)/(2(q-1)^3) reduces to the same representation
        let num = poly(&[(4, 6), (2, -4)]);
        let q_minus_1 = poly(&[(2, 1), (0, -1)]);
        let den = q_minus_1.pow(3).scalar_mul(&rat_i(2));
        let a = QRational::from_laurents(&num, &den).unwrap();
        assert_eq!(a, marg_count_series());
    }

    #[test]
    fn invert_q_matches_hand_computation() {
        // (3q^2-2q)/(q-1)^3 under q -> 1/q equals q(3-2q)/(1-q)^3
        let inv = marg_count_series().invert_q();
        let num = poly(&[(2, 3), (4, -2)]);
        let one_minus_q = poly(&[(0, 1), (2, -1)]);
        let expected = QRational::from_laurents(&num, &one_minus_q.pow(3)).unwrap();
        assert_eq!(inv, expected);
        assert_eq!(inv.invert_q(), marg_count_series());
    }

    #[test]
    fn geometric_expansion() {
        // 1/(1-q) through q^3
        let r = QRational::from_laurents(&poly(&[(0, 1)]), &poly(&[(0, 1), (2, -1)])).unwrap();
        let s = r.series(6).unwrap();
        assert_eq!(s.window(), Some((0, 6)));
        for h in [0, 2, 4, 6] {
            assert_eq!(s.coeff(h), rat_i(1));
        }
    }

    #[test]
    fn two_factor_expansion() {
        // q^2/((1-q)(1-q^2)) through q^4 -> q^2 + q^3 + 2q^4
        let num = poly(&[(4, 1)]);
        let den = poly(&[(0, 1), (2, -1)]).mul(&poly(&[(0, 1), (4, -1)]));
        let s = QRational::from_laurents(&num, &den)
            .unwrap()
            .series(8)
            .unwrap();
        assert_eq!(s.coeff(4), rat_i(1));
        assert_eq!(s.coeff(6), rat_i(1));
        assert_eq!(s.coeff(8), rat_i(2));
        assert_eq!(s.window(), Some((4, 8)));
    }

    #[test]
    fn pole_order_is_window_lower_edge() {
        // -q^{1/2}(3-2q)/(1-q)^3: valuation 1 in half units
        let num = poly(&[(1, -3), (3, 2)]);
        let den = poly(&[(0, 1), (2, -1)]).pow(3);
        let s = QRational::from_laurents(&num, &den)
            .unwrap()
            .series(5)
            .unwrap();
        assert_eq!(s.window(), Some((1, 5)));
        assert_eq!(s.coeff(1), rat_i(-3));
        assert_eq!(s.coeff(3), rat_i(-7));
        assert_eq!(s.coeff(5), rat_i(-12));
    }

    #[test]
    fn eval_simple() {
        let r = marg_count_series();
        // at q=2: (12-4)/1 = 8
        assert_eq!(r.eval(&rat_i(2)).unwrap(), rat_i(8));
        let pole = QRational::from_laurents(&poly(&[(0, 1)]), &poly(&[(0, -1), (2, 1)])).unwrap();
        assert!(pole.eval(&rat_i(1)).is_err());
    }

    #[test]
    fn field_ops() {
        let a = marg_count_series();
        let b = QRational::q_pow(-1);
        let c = a.mul(&b).div(&b).unwrap();
        assert_eq!(c, a);
        assert_eq!(a.sub(&a), QRational::zero());
        assert_eq!(
            a.add(&QRational::one()).sub(&QRational::one()),
            a
        );
    }
}
