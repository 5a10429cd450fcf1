//! End-to-end pipelines: partition function, slope factorization, BPS
//! table, dependence comparison, and the invariant-part recombination.
//!
//! Every report records the convention set it was computed under (twist
//! exponent, factor ordering, normalization exponent) so outputs are
//! auditable against a different choice.

use std::collections::BTreeSet;
use thiserror::Error;

use crate::dimred::{self, CountError, CutData, NormMode};
use crate::germ::{self, GermError};
use crate::presets::{self, Preset};
use crate::qarith::{HalfLaurent, Rat};
use crate::quiver::{DimVector, Potential, Quiver, QuiverError, Stability};
use crate::qtorus::{self, BpsTable, SlopeFactors, TorusElement, TorusError, Twist};
use crate::shuffle::{self, GradedDims, ShuffleError, SphericalVerdict};

#[derive(Debug, Clone, Error)]
pub enum PipelineError {
    #[error("no stability condition given and none in the input file")]
    MissingStability,
    #[error("no arrow subset cuts the potential (every cycle must contain exactly one cut arrow)")]
    NoCutFound,
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Shuffle(#[from] ShuffleError),
    #[error(transparent)]
    Germ(#[from] GermError),
}

/// The convention set every pipeline runs under.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Conventions {
    pub twist: Twist,
    pub norm: NormMode,
}

impl Conventions {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "twist": self.twist.describe(),
            "factor_order": "slope ascending left to right",
            "normalization": self.norm.describe(),
            "z_coefficient": "(-q^{1/2})^{chi(d,d)} times the point-count stack series at q^{-1}",
        })
    }
}

/// Default truncation window in half-units (`q^{20}`).
pub const DEFAULT_ORDER: i64 = 40;

/// A fully specified computation input.
#[derive(Debug, Clone)]
pub struct ProblemInput {
    pub name: String,
    pub quiver: Quiver,
    pub potential: Potential,
    pub stability: Stability,
    pub cut: BTreeSet<String>,
    /// Point counts certified to agree with the graded-dimension series;
    /// true for the built-in presets only.
    pub certified: bool,
}

impl ProblemInput {
    pub fn from_preset(p: Preset) -> Self {
        ProblemInput {
            name: p.name().to_string(),
            quiver: presets::markov_quiver(),
            potential: presets::markov_potential(p),
            stability: presets::markov_stability(),
            cut: presets::markov_cut(p),
            certified: true,
        }
    }

    pub fn from_parts(
        name: String,
        quiver: Quiver,
        potential: Potential,
        stability: Option<Stability>,
        cut: Option<BTreeSet<String>>,
    ) -> Result<Self, PipelineError> {
        let stability = stability.ok_or(PipelineError::MissingStability)?;
        let cut = match cut {
            Some(c) => c,
            None => find_cut(&quiver, &potential).ok_or(PipelineError::NoCutFound)?,
        };
        Ok(ProblemInput {
            name,
            quiver,
            potential,
            stability,
            cut,
            certified: false,
        })
    }
}

/// Smallest arrow subset (size, then lexicographic) such that every
/// potential cycle contains exactly one of its arrows once. The empty set
/// cuts the zero potential.
pub fn find_cut(q: &Quiver, w: &Potential) -> Option<BTreeSet<String>> {
    let names: Vec<String> = q.arrows().iter().map(|a| a.name.clone()).collect();
    if names.len() > 20 {
        return None;
    }
    let mut candidates: Vec<BTreeSet<String>> = (0u32..(1 << names.len()))
        .map(|mask| {
            names
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, n)| n.clone())
                .collect()
        })
        .collect();
    candidates.sort_by_key(|s: &BTreeSet<String>| (s.len(), s.iter().cloned().collect::<Vec<_>>()));
    candidates.into_iter().find(|cut| {
        w.terms()
            .all(|(cycle, _)| cycle.iter().filter(|a| cut.contains(*a)).count() == 1)
    })
}

/// The truncated partition function of an input: the exact closed form for
/// a zero potential, the point-count pipeline otherwise.
pub fn build_z(
    input: &ProblemInput,
    bound: &DimVector,
    order: i64,
    conv: &Conventions,
) -> Result<TorusElement, PipelineError> {
    if input.potential.is_zero() {
        return Ok(dimred::zseries_w0(&input.quiver, bound, order));
    }
    let cd = dimred::cut_reduce(&input.quiver, &input.potential, &input.cut)?;
    Ok(dimred::z_from_counts(
        &cd,
        bound,
        order,
        conv.norm,
        dimred::DEFAULT_BUDGET,
    )?)
}

pub fn cut_data(input: &ProblemInput) -> Result<CutData, PipelineError> {
    Ok(dimred::cut_reduce(
        &input.quiver,
        &input.potential,
        &input.cut,
    )?)
}

fn series_json(x: &HalfLaurent) -> serde_json::Value {
    x.to_json()
}

/// Full BPS run: partition function, slope factorization, invariant table.
#[derive(Debug, Clone)]
pub struct BpsReport {
    pub input_name: String,
    pub bound: DimVector,
    pub order: i64,
    pub stability: Stability,
    pub conventions: Conventions,
    pub z: TorusElement,
    pub factors: SlopeFactors,
    pub omega: BpsTable,
    pub notes: Vec<String>,
}

pub fn run_bps(
    input: &ProblemInput,
    bound: &DimVector,
    order: i64,
    conv: &Conventions,
) -> Result<BpsReport, PipelineError> {
    let z = build_z(input, bound, order, conv)?;
    let factors = qtorus::factorize_by_slope(&z, &input.stability, conv.twist)?;
    let mut omega = BpsTable::default();
    for factor in factors.values() {
        let part = qtorus::extract_bps(factor)?;
        for (d, o) in part.omega {
            omega.set(d, o);
        }
    }
    for d in DimVector::box_below(bound) {
        if !d.is_zero() {
            omega.omega.entry(d).or_insert_with(HalfLaurent::zero);
        }
    }
    let mut notes = Vec::new();
    if !input.certified {
        notes.push(
            "point counts give the E-series avatar of the dimension series (purity assumed)"
                .to_string(),
        );
    }
    Ok(BpsReport {
        input_name: input.name.clone(),
        bound: bound.clone(),
        order,
        stability: input.stability.clone(),
        conventions: *conv,
        z,
        factors,
        omega,
        notes,
    })
}

impl BpsReport {
    pub fn to_json(&self) -> serde_json::Value {
        let zeta: serde_json::Map<String, serde_json::Value> = self
            .z
            .quiver
            .vertices()
            .iter()
            .zip(&self.stability.zeta)
            .map(|(v, r)| (v.clone(), serde_json::Value::String(r.to_string())))
            .collect();
        let z: serde_json::Map<String, serde_json::Value> = self
            .z
            .coeffs
            .iter()
            .map(|(d, c)| (d.to_string(), series_json(c)))
            .collect();
        let omega: serde_json::Map<String, serde_json::Value> = self
            .omega
            .omega
            .iter()
            .map(|(d, c)| (d.to_string(), series_json(c)))
            .collect();
        let factors: Vec<serde_json::Value> = self
            .factors
            .iter()
            .map(|(slope, f)| {
                let coeffs: serde_json::Map<String, serde_json::Value> = f
                    .coeffs
                    .iter()
                    .map(|(d, c)| (d.to_string(), series_json(c)))
                    .collect();
                serde_json::json!({ "slope": slope.to_string(), "coefficients": coeffs })
            })
            .collect();
        serde_json::json!({
            "input": self.input_name,
            "box": self.bound.to_string(),
            "order": self.order,
            "stability": zeta,
            "conventions": self.conventions.to_json(),
            "z": z,
            "factors": factors,
            "omega": omega,
            "notes": self.notes,
        })
    }

    pub fn pretty(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "BPS table for {} on box {} (window order {}):\n",
            self.input_name, self.bound, self.order
        ));
        for (d, omega) in &self.omega.omega {
            out.push_str(&format!("  Omega{} = {}\n", d, omega.pretty()));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {}\n", n));
        }
        out
    }
}

/// Comparison of two inputs at the top vector of the box.
#[derive(Debug, Clone)]
pub struct DependenceReport {
    pub left: String,
    pub right: String,
    pub at: DimVector,
    pub coefficient_difference: HalfLaurent,
    pub omega_left: HalfLaurent,
    pub omega_right: HalfLaurent,
    pub omega_difference: HalfLaurent,
}

pub fn run_dependence_check(
    left: &ProblemInput,
    right: &ProblemInput,
    bound: &DimVector,
    order: i64,
    conv: &Conventions,
) -> Result<DependenceReport, PipelineError> {
    let za = build_z(left, bound, order, conv)?;
    let zb = build_z(right, bound, order, conv)?;
    let ra = run_bps(left, bound, order, conv)?;
    let rb = run_bps(right, bound, order, conv)?;
    let at = bound.clone();
    Ok(DependenceReport {
        left: left.name.clone(),
        right: right.name.clone(),
        at: at.clone(),
        coefficient_difference: za.coeff(&at).sub(&zb.coeff(&at)),
        omega_left: ra.omega.get(&at),
        omega_right: rb.omega.get(&at),
        omega_difference: ra.omega.get(&at).sub(&rb.omega.get(&at)),
    })
}

impl DependenceReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "left": self.left,
            "right": self.right,
            "at": self.at.to_string(),
            "coefficient_difference": series_json(&self.coefficient_difference),
            "omega_left": series_json(&self.omega_left),
            "omega_right": series_json(&self.omega_right),
            "omega_difference": series_json(&self.omega_difference),
        })
    }

    pub fn pretty(&self) -> String {
        format!(
            "{} vs {} at {}:\n  coefficient difference = {}\n  Omega {} = {}\n  Omega {} = {}\n  Omega difference = {}\n",
            self.left,
            self.right,
            self.at,
            self.coefficient_difference.pretty(),
            self.left,
            self.omega_left.pretty(),
            self.right,
            self.omega_right.pretty(),
            self.omega_difference.pretty(),
        )
    }
}

/// The coefficient of `x^top` in the ordered product of the slope factors
/// with the top factor's own `x^top` entry removed: the cross-term part of
/// the factorization identity at `top`.
pub fn cross_term_coefficient(
    factors: &SlopeFactors,
    zeta: &Stability,
    twist: Twist,
    top: &DimVector,
) -> Result<HalfLaurent, PipelineError> {
    let mut trimmed = factors.clone();
    let slope = zeta.slope(top);
    if let Some(f) = trimmed.get_mut(&slope) {
        f.set_coeff(top.clone(), HalfLaurent::zero());
    }
    let product = qtorus::ordered_product(&trimmed, twist);
    Ok(product.map(|p| p.coeff(top)).unwrap_or_else(HalfLaurent::zero))
}

/// Recombination with the invariant-part value at the top vector, compared
/// against the spherical dimensions.
#[derive(Debug, Clone)]
pub struct GinvReport {
    pub top: DimVector,
    pub omega_top: HalfLaurent,
    pub coefficient: HalfLaurent,
    pub spherical: GradedDims,
    pub verdict: SphericalVerdict,
}

pub fn run_ginv(
    bound: &DimVector,
    order: i64,
    conv: &Conventions,
    n_max: i64,
) -> Result<GinvReport, PipelineError> {
    let input = ProblemInput::from_preset(Preset::MarkovGen);
    let report = run_bps(&input, bound, order, conv)?;
    let top = bound.clone();
    let mut omegas = report.omega.clone();
    omegas.set(top.clone(), HalfLaurent::one());
    let z = shuffle::g_invariant_series(
        &omegas,
        &input.quiver,
        bound,
        &input.stability,
        order,
        conv.twist,
    )?;
    let coefficient = z.coeff(&top);
    let spherical =
        shuffle::spherical_dimensions(&input.quiver, &top, n_max, shuffle::DEFAULT_ORDERINGS_CAP)?
            .graded;
    let verdict = shuffle::compare_spherical(&coefficient, &spherical)?;
    Ok(GinvReport {
        top,
        omega_top: HalfLaurent::one(),
        coefficient,
        spherical,
        verdict,
    })
}

impl GinvReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "top": self.top.to_string(),
            "omega_top": series_json(&self.omega_top),
            "coefficient": series_json(&self.coefficient),
            "spherical_dims": self.spherical.dims.iter()
                .map(|(n, d)| (n.to_string(), serde_json::json!(d)))
                .collect::<serde_json::Map<String, serde_json::Value>>(),
            "verdict": format!("{:?}", self.verdict),
        })
    }
}

/// Classifies the cubic part of an input potential, when the quiver has
/// the doubled-3-cycle shape.
pub fn classify_input(input: &ProblemInput) -> Result<germ::GermType, PipelineError> {
    Ok(germ::classify_potential(&input.quiver, &input.potential)?)
}

/// Slope of every nonzero vector in the box, ascending; a readable summary
/// of the factor ordering.
pub fn slope_table(zeta: &Stability, bound: &DimVector) -> Vec<(Rat, DimVector)> {
    let mut rows: Vec<(Rat, DimVector)> = DimVector::box_below(bound)
        .into_iter()
        .filter(|d| !d.is_zero())
        .map(|d| (zeta.slope(&d), d))
        .collect();
    rows.sort();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::rat_i;

    const ORDER: i64 = DEFAULT_ORDER;

    fn series(num: &[(i64, i64)], den_pow: u32) -> HalfLaurent {
        let n = HalfLaurent::from_terms(num.iter().map(|&(h, c)| (h, rat_i(c))));
        let d = HalfLaurent::from_terms([(0, rat_i(1)), (2, rat_i(-1))]).pow(den_pow);
        n.mul(&d.inverse_series(ORDER).unwrap())
    }

    fn b111() -> DimVector {
        DimVector(vec![1, 1, 1])
    }

    #[test]
    fn find_cut_prefers_small_sets() {
        let q = presets::markov_quiver();
        let w = presets::markov_potential(Preset::MarkovGen);
        let cut = find_cut(&q, &w).unwrap();
        // the smallest valid cuts have two arrows; lexicographically first
        // is {a1, a2}
        let v: Vec<String> = cut.into_iter().collect();
        assert_eq!(v, vec!["a1".to_string(), "a2".to_string()]);
        // zero potential is cut by the empty set
        assert!(find_cut(&q, &Potential::empty()).unwrap().is_empty());
    }

    #[test]
    fn gen_bps_low_degrees() {
        let input = ProblemInput::from_preset(Preset::MarkovGen);
        let r = run_bps(&input, &b111(), ORDER, &Conventions::default()).unwrap();
        for i in 0..3 {
            assert_eq!(
                r.omega.get(&DimVector::unit(3, i)),
                HalfLaurent::one(),
                "unit vector {}",
                i
            );
        }
        let p1 = HalfLaurent::from_terms([(-1, rat_i(-1)), (1, rat_i(-1))]);
        assert_eq!(r.omega.get(&DimVector(vec![1, 1, 0])), p1);
        assert_eq!(r.omega.get(&DimVector(vec![0, 1, 1])), p1);
        assert!(r.omega.get(&DimVector(vec![1, 0, 1])).is_zero());
        assert_eq!(
            r.omega.get(&b111()),
            HalfLaurent::monomial(0, rat_i(2)),
            "generic top invariant"
        );
    }

    #[test]
    fn marg_bps_top_invariant() {
        let input = ProblemInput::from_preset(Preset::MarkovMarg);
        let r = run_bps(&input, &b111(), ORDER, &Conventions::default()).unwrap();
        assert_eq!(r.omega.get(&b111()), HalfLaurent::one());
    }

    #[test]
    fn cross_terms_reproduce_lower_numerator() {
        // sum of the cross terms at (1,1,1) = -q^{1/2}(2-q^2)/(1-q)^3
        let input = ProblemInput::from_preset(Preset::MarkovGen);
        let conv = Conventions::default();
        let z = build_z(&input, &b111(), ORDER, &conv).unwrap();
        let factors = qtorus::factorize_by_slope(&z, &input.stability, conv.twist).unwrap();
        let cross =
            cross_term_coefficient(&factors, &input.stability, conv.twist, &b111()).unwrap();
        let expected = series(&[(1, -2), (5, 1)], 3);
        assert!(cross.agrees_with(&expected, 30));
    }

    #[test]
    fn cross_terms_fail_under_perturbed_twist() {
        let input = ProblemInput::from_preset(Preset::MarkovGen);
        let conv = Conventions {
            twist: Twist::PlainChi,
            norm: NormMode::default(),
        };
        let z = build_z(&input, &b111(), ORDER, &conv).unwrap();
        let factors = qtorus::factorize_by_slope(&z, &input.stability, conv.twist).unwrap();
        let cross =
            cross_term_coefficient(&factors, &input.stability, conv.twist, &b111()).unwrap();
        let expected = series(&[(1, -2), (5, 1)], 3);
        assert!(!cross.agrees_with(&expected, 30));
    }

    #[test]
    fn factorization_recombines_to_z() {
        let input = ProblemInput::from_preset(Preset::MarkovGen);
        let conv = Conventions::default();
        let r = run_bps(&input, &b111(), ORDER, &conv).unwrap();
        let z2 = qtorus::recombine(
            &r.omega,
            &input.quiver,
            &b111(),
            &input.stability,
            ORDER,
            conv.twist,
        )
        .unwrap();
        for (d, c) in &r.z.coeffs {
            assert!(z2.coeff(d).agrees_with(c, 30), "mismatch at {}", d);
        }
    }

    #[test]
    fn dependence_between_gen_and_marg() {
        let gen = ProblemInput::from_preset(Preset::MarkovGen);
        let marg = ProblemInput::from_preset(Preset::MarkovMarg);
        let r = run_dependence_check(&gen, &marg, &b111(), ORDER, &Conventions::default()).unwrap();
        let expected = series(&[(1, -1)], 1);
        assert!(r.coefficient_difference.agrees_with(&expected, 30));
        assert_eq!(r.omega_difference, HalfLaurent::one());
        // an input against itself vanishes
        let same = run_dependence_check(&gen, &gen, &b111(), ORDER, &Conventions::default()).unwrap();
        assert!(same.coefficient_difference.is_zero());
        assert!(same.omega_difference.is_zero());
    }

    #[test]
    fn ginv_matches_spherical() {
        let r = run_ginv(&b111(), ORDER, &Conventions::default(), 5).unwrap();
        let expected = series(&[(1, -3), (3, 2)], 3);
        assert!(r.coefficient.agrees_with(&expected, 30));
        match r.verdict {
            SphericalVerdict::Equal { through } => assert!(through >= 5),
            v => panic!("expected equality, got {:?}", v),
        }
    }

    #[test]
    fn w0_preset_bps_runs() {
        let input = ProblemInput::from_preset(Preset::MarkovW0);
        let r = run_bps(&input, &b111(), ORDER, &Conventions::default()).unwrap();
        // unit lines still carry invariant 1
        assert_eq!(r.omega.get(&DimVector::unit(3, 0)), HalfLaurent::one());
        // (1,0,1) is fully explained by the unit factors
        assert!(r.omega.get(&DimVector(vec![1, 0, 1])).is_zero());
    }
}
