//! Laurent objects in the half-power variable.
//!
//! Exponents are integers in half-units: key `h` means `q^{h/2}`, so every
//! quantity that mixes integer and half-integer powers of `q` stays
//! integer-indexed. A value is either an exact Laurent polynomial
//! (`window == None`) or a truncated series with `window == Some((lo, hi))`,
//! meaning: every coefficient below `lo` is zero, coefficients up to `hi`
//! are stored exactly, and nothing is known above `hi`.
//!
//! Arithmetic never silently extends precision: the window of a sum is the
//! intersection of the windows, the window of a product is shifted by the
//! other factor's valuation and capped accordingly.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

use super::QArithError;

pub type Rat = BigRational;
pub type Int = BigInt;

/// The integer `n` as an exact rational.
pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

/// The fraction `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfLaurent {
    /// Nonzero coefficients, keyed by half-unit exponent.
    coeffs: BTreeMap<i64, Rat>,
    /// `Some((lo, hi))` marks a truncated series; `None` an exact polynomial.
    window: Option<(i64, i64)>,
}

impl HalfLaurent {
    pub fn zero() -> Self {
        HalfLaurent {
            coeffs: BTreeMap::new(),
            window: None,
        }
    }

    pub fn one() -> Self {
        Self::monomial(0, rat_i(1))
    }

    /// The single term `c * q^{h/2}`.
    pub fn monomial(h: i64, c: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(h, c);
        }
        HalfLaurent {
            coeffs,
            window: None,
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Rat)>>(terms: I) -> Self {
        let mut coeffs: BTreeMap<i64, Rat> = BTreeMap::new();
        for (h, c) in terms {
            let entry = coeffs.entry(h).or_insert_with(Rat::zero);
            *entry += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        HalfLaurent {
            coeffs,
            window: None,
        }
    }

    /// Clips coefficients to `[lo, hi]` and marks the object as a series
    /// known exactly on that range.
    pub fn with_window(mut self, lo: i64, hi: i64) -> Self {
        self.coeffs.retain(|&h, _| h >= lo && h <= hi);
        self.window = Some((lo, hi));
        self
    }

    /// Forgets the window, asserting the stored terms are the whole value.
    /// Only meaningful after an external polynomiality check.
    pub fn into_polynomial(mut self) -> Self {
        self.window = None;
        self
    }

    pub fn window(&self) -> Option<(i64, i64)> {
        self.window
    }

    pub fn is_exact(&self) -> bool {
        self.window.is_none()
    }

    /// Largest exponent through which coefficients are known; `None` = all.
    pub fn known_through(&self) -> Option<i64> {
        self.window.map(|(_, hi)| hi)
    }

    pub fn coeff(&self, h: i64) -> Rat {
        self.coeffs.get(&h).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rat)> {
        self.coeffs.iter().map(|(&h, c)| (h, c))
    }

    /// True when the stored value is zero (for a windowed object: zero
    /// through the window).
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// True if all exponents are even, i.e. the value lives in integer
    /// powers of `q`.
    pub fn is_integer_powers(&self) -> bool {
        self.coeffs.keys().all(|h| h % 2 == 0)
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.coeffs.values().all(|c| c.is_integer())
    }

    pub fn neg(&self) -> Self {
        HalfLaurent {
            coeffs: self.coeffs.iter().map(|(&h, c)| (h, -c.clone())).collect(),
            window: self.window,
        }
    }

    pub fn scalar_mul(&self, s: &Rat) -> Self {
        if s.is_zero() {
            // zero times an unknown tail is still exactly zero
            return Self::zero();
        }
        HalfLaurent {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&h, c)| (h, c.clone() * s.clone()))
                .collect(),
            window: self.window,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let window = match (self.window, other.window) {
            (None, None) => None,
            (None, Some((lo, hi))) => Some((lo.min(self.min_exp().unwrap_or(lo)), hi)),
            (Some((lo, hi)), None) => Some((lo.min(other.min_exp().unwrap_or(lo)), hi)),
            (Some((lo1, hi1)), Some((lo2, hi2))) => Some((lo1.min(lo2), hi1.min(hi2))),
        };
        let mut coeffs = self.coeffs.clone();
        for (&h, c) in &other.coeffs {
            let entry = coeffs.entry(h).or_insert_with(Rat::zero);
            *entry += c.clone();
        }
        coeffs.retain(|_, c| !c.is_zero());
        if let Some((_, hi)) = window {
            coeffs.retain(|&h, _| h <= hi);
        }
        HalfLaurent { coeffs, window }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        // An exact zero annihilates even unknown tails.
        if (self.is_zero() && self.is_exact()) || (other.is_zero() && other.is_exact()) {
            return Self::zero();
        }
        let window = match (self.window, other.window) {
            (None, None) => None,
            (None, Some((lo, hi))) => {
                let m = self.min_exp().expect("nonzero");
                Some((m + lo, m + hi))
            }
            (Some((lo, hi)), None) => {
                let m = other.min_exp().expect("nonzero");
                Some((m + lo, m + hi))
            }
            (Some((lo1, hi1)), Some((lo2, hi2))) => {
                Some((lo1 + lo2, (hi1 + lo2).min(hi2 + lo1)))
            }
        };
        let cap = window.map(|(_, hi)| hi);
        let mut coeffs: BTreeMap<i64, Rat> = BTreeMap::new();
        for (&h1, c1) in &self.coeffs {
            for (&h2, c2) in &other.coeffs {
                let h = h1 + h2;
                if let Some(hi) = cap {
                    if h > hi {
                        continue;
                    }
                }
                let entry = coeffs.entry(h).or_insert_with(Rat::zero);
                *entry += c1.clone() * c2.clone();
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        HalfLaurent { coeffs, window }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplies by the monomial `q^{h/2}` (exponent shift).
    pub fn shifted(&self, h: i64) -> Self {
        self.mul(&Self::monomial(h, rat_i(1)))
    }

    /// Intersects the window with `(-inf, hi]`.
    pub fn truncated(&self, hi: i64) -> Self {
        let lo = match self.window {
            Some((lo, _)) => lo,
            None => self.min_exp().unwrap_or(hi),
        };
        let new_hi = match self.window {
            Some((_, old_hi)) => old_hi.min(hi),
            None => hi,
        };
        self.clone().with_window(lo.min(new_hi), new_hi)
    }

    /// Substitutes `q^{1/2} -> q^{-1/2}`. Involutive on exact objects;
    /// rejected on windows since the truncated tail would land on the
    /// known side.
    pub fn invert_q(&self) -> Result<Self, QArithError> {
        if !self.is_exact() {
            return Err(QArithError::WindowedInput);
        }
        Ok(HalfLaurent {
            coeffs: self.coeffs.iter().map(|(&h, c)| (-h, c.clone())).collect(),
            window: None,
        })
    }

    /// Reindexes exponents `h -> m*h` (the Adams operation on coefficients).
    pub fn adams(&self, m: i64) -> Self {
        debug_assert!(m >= 1);
        HalfLaurent {
            coeffs: self.coeffs.iter().map(|(&h, c)| (m * h, c.clone())).collect(),
            window: self.window.map(|(lo, hi)| (m * lo, m * hi)),
        }
    }

    /// Multiplicative inverse as a Laurent series around `q = 0`, computed
    /// through exponent `want_hi` or as far as the input's window allows.
    pub fn inverse_series(&self, want_hi: i64) -> Result<Self, QArithError> {
        let v = match self.min_exp() {
            Some(v) => v,
            None => return Err(QArithError::DivisionByZero),
        };
        let lead = self.coeff(v);
        // A single exact monomial inverts exactly.
        if self.is_exact() && self.coeffs.len() == 1 {
            return Ok(Self::monomial(-v, Rat::one() / lead));
        }
        let eff_hi = match self.window {
            None => want_hi,
            Some((_, hi)) => want_hi.min(hi - 2 * v),
        };
        if eff_hi < -v {
            return Err(QArithError::InsufficientPrecision);
        }
        // Normalize to 1 + n with val(n) >= 1, run the standard recurrence.
        let span = (eff_hi + v) as usize;
        let mut norm = vec![Rat::zero(); span + 1];
        for (&h, c) in &self.coeffs {
            let k = (h - v) as usize;
            if k <= span {
                norm[k] = c.clone() / lead.clone();
            }
        }
        let mut r = vec![Rat::zero(); span + 1];
        r[0] = Rat::one();
        for h in 1..=span {
            let mut acc = Rat::zero();
            for j in 1..=h {
                if !norm[j].is_zero() {
                    acc += norm[j].clone() * r[h - j].clone();
                }
            }
            r[h] = -acc;
        }
        let mut coeffs = BTreeMap::new();
        for (k, c) in r.into_iter().enumerate() {
            if !c.is_zero() {
                coeffs.insert(k as i64 - v, c / lead.clone());
            }
        }
        Ok(HalfLaurent {
            coeffs,
            window: Some((-v, eff_hi)),
        })
    }

    /// Evaluates at a rational point; requires integer powers of `q`.
    pub fn eval_q(&self, x: &Rat) -> Result<Rat, QArithError> {
        if !self.is_integer_powers() {
            return Err(QArithError::OddHalfPower);
        }
        let mut acc = Rat::zero();
        for (&h, c) in &self.coeffs {
            acc += c.clone() * rat_pow(x, h / 2)?;
        }
        Ok(acc)
    }

    /// True when both sides are known through `through` and agree there.
    pub fn agrees_with(&self, other: &Self, through: i64) -> bool {
        let covered = |x: &Self| x.known_through().map_or(true, |hi| hi >= through);
        if !covered(self) || !covered(other) {
            return false;
        }
        let keys: std::collections::BTreeSet<i64> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .filter(|&h| h <= through)
            .collect();
        keys.into_iter().all(|h| self.coeff(h) == other.coeff(h))
    }

    /// Compact human-readable form, e.g. `-q^{-1/2}-q^{1/2}`.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        if self.coeffs.is_empty() {
            out.push('0');
        }
        for (i, (&h, c)) in self.coeffs.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push('-');
            } else {
                out.push('+');
            }
            let a = c.abs();
            let show_coeff = h == 0 || !a.is_one();
            if show_coeff {
                if a.is_integer() {
                    out.push_str(&a.to_string());
                } else {
                    out.push_str(&format!("({})", a));
                }
            }
            if h != 0 {
                out.push_str(&exp_str(h));
            }
        }
        if let Some((_, hi)) = self.window {
            out.push_str(&format!("+O({})", exp_str_plain(hi + 1)));
        }
        out
    }

    /// JSON form: half-exponent-keyed coefficient map plus the pretty string.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (&h, c) in &self.coeffs {
            map.insert(format!("h:{}", h), serde_json::Value::String(c.to_string()));
        }
        let mut obj = serde_json::Map::new();
        obj.insert("coeffs".into(), serde_json::Value::Object(map));
        if let Some((lo, hi)) = self.window {
            obj.insert("window".into(), serde_json::json!([lo, hi]));
        }
        obj.insert(
            "pretty".into(),
            serde_json::Value::String(self.pretty()),
        );
        serde_json::Value::Object(obj)
    }
}

/// `q^{h/2}` rendered with integer or half-integer exponent.
fn exp_str(h: i64) -> String {
    match h {
        2 => "q".to_string(),
        _ => exp_str_plain(h),
    }
}

fn exp_str_plain(h: i64) -> String {
    if h % 2 == 0 {
        format!("q^{{{}}}", h / 2)
    } else {
        format!("q^{{{}/2}}", h)
    }
}

pub(crate) fn rat_pow(x: &Rat, k: i64) -> Result<Rat, QArithError> {
    if x.is_zero() && k < 0 {
        return Err(QArithError::DivisionByZero);
    }
    let mut acc = Rat::one();
    for _ in 0..k.unsigned_abs() {
        acc *= x.clone();
    }
    if k < 0 {
        acc = Rat::one() / acc;
    }
    Ok(acc)
}

impl fmt::Display for HalfLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(hi: i64) -> HalfLaurent {
        // 1/(1-q) as a window through hi
        HalfLaurent::from_terms([(0, rat_i(1)), (2, rat_i(-1))])
            .inverse_series(hi)
            .unwrap()
    }

    #[test]
    fn monomials_multiply() {
        let a = HalfLaurent::monomial(1, rat_i(-1));
        let b = HalfLaurent::monomial(-3, rat_i(2));
        let c = a.mul(&b);
        assert_eq!(c, HalfLaurent::monomial(-2, rat_i(-2)));
    }

    #[test]
    fn geometric_series() {
        let g = geom(7);
        assert_eq!(g.coeff(0), rat_i(1));
        assert_eq!(g.coeff(2), rat_i(1));
        assert_eq!(g.coeff(6), rat_i(1));
        assert_eq!(g.coeff(1), rat_i(0));
        assert_eq!(g.window(), Some((0, 7)));
    }

    #[test]
    fn window_intersection_on_add() {
        let a = geom(10);
        let b = geom(6);
        assert_eq!(a.add(&b).window(), Some((0, 6)));
    }

    #[test]
    fn product_window_shifts_by_valuation() {
        let a = geom(10).shifted(3); // window (3, 13)
        let b = geom(6); // window (0, 6)
        let c = a.mul(&b);
        // hi = min(13 + 0, 6 + 3) = 9
        assert_eq!(c.window(), Some((3, 9)));
    }

    #[test]
    fn invert_q_involutive() {
        let a = HalfLaurent::from_terms([(-1, rat_i(-1)), (1, rat_i(-1)), (4, rat(3, 2))]);
        let b = a.invert_q().unwrap().invert_q().unwrap();
        assert_eq!(a, b);
        assert!(geom(5).invert_q().is_err());
    }

    #[test]
    fn palindromic_fixed_by_inversion() {
        let a = HalfLaurent::from_terms([(-1, rat_i(-1)), (1, rat_i(-1))]);
        assert_eq!(a.invert_q().unwrap(), a);
    }

    #[test]
    fn series_inverse_of_exact_monomial_is_exact() {
        let a = HalfLaurent::monomial(4, rat_i(2));
        let inv = a.inverse_series(100).unwrap();
        assert!(inv.is_exact());
        assert_eq!(inv, HalfLaurent::monomial(-4, rat(1, 2)));
    }

    #[test]
    fn pretty_forms() {
        let a = HalfLaurent::from_terms([(-1, rat_i(-1)), (1, rat_i(-1))]);
        assert_eq!(a.pretty(), "-q^{-1/2}-q^{1/2}");
        let b = HalfLaurent::from_terms([(0, rat_i(1)), (2, rat_i(3))]);
        assert_eq!(b.pretty(), "1+3q");
        assert_eq!(HalfLaurent::zero().pretty(), "0");
    }

    #[test]
    fn eval_integer_powers_only() {
        let a = HalfLaurent::from_terms([(2, rat_i(3)), (4, rat_i(-2))]);
        // 3q - 2q^2 at q = 5
        assert_eq!(a.eval_q(&rat_i(5)).unwrap(), rat_i(-35));
        let odd = HalfLaurent::monomial(1, rat_i(1));
        assert!(odd.eval_q(&rat_i(2)).is_err());
    }
}
