//! Classification of cubic potentials on the doubled triangle quiver.
//!
//! The cubic part of a potential is a 2x2x2 coefficient tensor
//! `t[i][j][k]` = coefficient of `c_i b_j a_k`. Under the group of graded
//! linear isomorphisms (one invertible 2x2 matrix per arrow pair, plus the
//! quiver's rotation) there are exactly five orbits, separated by the three
//! flattening ranks and the hyperdeterminant:
//!
//! | type | rank profile        | hyperdet |
//! |------|---------------------|----------|
//! | T1   | (0,0,0)             | 0        |
//! | T2   | (1,1,1)             | 0        |
//! | T3   | rotation of (1,2,2) | 0        |
//! | T4   | (2,2,2)             | 0        |
//! | T5   | (2,2,2)             | nonzero  |
//!
//! The hyperdeterminant is computed as the discriminant of the slice-pencil
//! determinant `det(x T_1 + y T_2)`; its relative invariance under
//! transforms is a property test, which makes the implementation
//! self-checking.

use num::{One, Zero};
use std::fmt;
use thiserror::Error;

use crate::qarith::Rat;
use crate::quiver::{Potential, Quiver};

#[derive(Debug, Clone, Error)]
pub enum GermError {
    #[error("quiver is not a doubled 3-cycle")]
    NotMarkovShaped,
    #[error("length-3 term {0:?} does not respect the arrow grouping")]
    BadCubicTerm(Vec<String>),
    #[error("transformation matrix is singular")]
    SingularMatrix,
    #[error("rank profile {0:?} is not realizable by any 2x2x2 tensor")]
    ImpossibleProfile([usize; 3]),
}

/// The five normal forms of a cubic potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GermType {
    T1,
    T2,
    T3,
    T4,
    T5,
}

impl fmt::Display for GermType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GermType::T1 => "type 1 (zero cubic part)",
            GermType::T2 => "type 2 (single cycle)",
            GermType::T3 => "type 3 (rank-degenerate pair)",
            GermType::T4 => "type 4 (marginal)",
            GermType::T5 => "type 5 (generic)",
        };
        f.write_str(s)
    }
}

/// Coefficient tensor of a cubic potential: `t[i][j][k]` multiplies
/// `c_{i+1} b_{j+1} a_{k+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicTensor {
    pub t: [[[Rat; 2]; 2]; 2],
}

impl CubicTensor {
    pub fn zero() -> Self {
        CubicTensor {
            t: Default::default(),
        }
    }

    pub fn from_entries(entries: &[((usize, usize, usize), Rat)]) -> Self {
        let mut out = Self::zero();
        for ((i, j, k), c) in entries {
            out.t[*i][*j][*k] = c.clone();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.t
            .iter()
            .flatten()
            .flatten()
            .all(|c| c.is_zero())
    }

    /// Cyclic rotation of the three modes (the quiver rotation action).
    pub fn rotated(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    // c b a -> rotate arrow roles
                    out.t[j][k][i] = self.t[i][j][k].clone();
                }
            }
        }
        out
    }
}

/// Identification of a quiver with the doubled 3-cycle shape: a vertex
/// cycle `v0 -> v1 -> v2 -> v0` and the three doubled arrow groups, each
/// sorted by name.
#[derive(Debug, Clone)]
pub struct MarkovShape {
    pub vertex_cycle: [usize; 3],
    /// `groups[0]` = arrows `v0 -> v1` (the `a` role), `groups[1]` the `b`
    /// role, `groups[2]` the `c` role.
    pub groups: [[String; 2]; 3],
}

/// Recognizes a doubled 3-cycle: three vertices, two arrows along each edge
/// of one oriented triangle, nothing else.
pub fn markov_shape(q: &Quiver) -> Option<MarkovShape> {
    if q.n_vertices() != 3 || q.arrows().len() != 6 {
        return None;
    }
    let v0 = 0usize;
    let targets: Vec<usize> = q
        .arrows()
        .iter()
        .filter(|a| a.source == v0)
        .map(|a| a.target)
        .collect();
    if targets.len() != 2 || targets[0] != targets[1] || targets[0] == v0 {
        return None;
    }
    let v1 = targets[0];
    let v2 = 3 - v0 - v1;
    for (s, t) in [(v0, v1), (v1, v2), (v2, v0)] {
        if q.arrow_count(s, t) != 2 {
            return None;
        }
    }
    // all six arrows are accounted for by the three doubled edges
    let mut group = |s: usize, t: usize| -> [String; 2] {
        let mut names: Vec<String> = q
            .arrows()
            .iter()
            .filter(|a| a.source == s && a.target == t)
            .map(|a| a.name.clone())
            .collect();
        names.sort();
        [names[0].clone(), names[1].clone()]
    };
    Some(MarkovShape {
        vertex_cycle: [v0, v1, v2],
        groups: [group(v0, v1), group(v1, v2), group(v2, v0)],
    })
}

/// Extracts the cubic coefficient tensor of a potential on a
/// doubled-3-cycle quiver. Terms of other lengths are ignored.
pub fn cubic_tensor(q: &Quiver, w: &Potential) -> Result<CubicTensor, GermError> {
    let shape = markov_shape(q).ok_or(GermError::NotMarkovShaped)?;
    let role_of = |name: &str| -> Option<(usize, usize)> {
        for (role, group) in shape.groups.iter().enumerate() {
            if let Some(idx) = group.iter().position(|g| g == name) {
                return Some((role, idx));
            }
        }
        None
    };
    let mut out = CubicTensor::zero();
    for (cycle, coeff) in w.terms() {
        if cycle.len() != 3 {
            continue;
        }
        // rotate the printed cycle so it reads (c-role, b-role, a-role)
        let roles: Vec<(usize, usize)> = cycle
            .iter()
            .map(|name| role_of(name).ok_or_else(|| GermError::BadCubicTerm(cycle.clone())))
            .collect::<Result<_, _>>()?;
        let c_pos = roles
            .iter()
            .position(|&(role, _)| role == 2)
            .ok_or_else(|| GermError::BadCubicTerm(cycle.clone()))?;
        let rot = |off: usize| roles[(c_pos + off) % 3];
        let (rc, ic) = rot(0);
        let (rb, ib) = rot(1);
        let (ra, ia) = rot(2);
        if (rc, rb, ra) != (2, 1, 0) {
            return Err(GermError::BadCubicTerm(cycle.clone()));
        }
        out.t[ic][ib][ia] = out.t[ic][ib][ia].clone() + coeff.clone();
    }
    Ok(out)
}

fn rank_2x4(rows: [[Rat; 4]; 2]) -> usize {
    let r0_zero = rows[0].iter().all(|c| c.is_zero());
    let r1_zero = rows[1].iter().all(|c| c.is_zero());
    if r0_zero && r1_zero {
        return 0;
    }
    if r0_zero || r1_zero {
        return 1;
    }
    // 2x2 minors
    for p in 0..4 {
        for s in p + 1..4 {
            let det = rows[0][p].clone() * rows[1][s].clone()
                - rows[0][s].clone() * rows[1][p].clone();
            if !det.is_zero() {
                return 2;
            }
        }
    }
    1
}

/// Ranks of the three 2x4 flattenings, over the `c`, `b`, `a` indices.
pub fn mode_rank_profile(t: &CubicTensor) -> [usize; 3] {
    let g = |i: usize, j: usize, k: usize| t.t[i][j][k].clone();
    let c_rows = |i: usize| [g(i, 0, 0), g(i, 0, 1), g(i, 1, 0), g(i, 1, 1)];
    let b_rows = |j: usize| [g(0, j, 0), g(0, j, 1), g(1, j, 0), g(1, j, 1)];
    let a_rows = |k: usize| [g(0, 0, k), g(0, 1, k), g(1, 0, k), g(1, 1, k)];
    [
        rank_2x4([c_rows(0), c_rows(1)]),
        rank_2x4([b_rows(0), b_rows(1)]),
        rank_2x4([a_rows(0), a_rows(1)]),
    ]
}

fn det2(m: [[Rat; 2]; 2]) -> Rat {
    m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone()
}

/// Hyperdeterminant via the slice pencil: the discriminant `b^2 - 4ac` of
/// `det(x T_1 + y T_2) = a x^2 + b xy + c y^2` where `T_i` are the
/// `c`-index slices.
pub fn hyperdet(t: &CubicTensor) -> Rat {
    let slice = |i: usize| {
        [
            [t.t[i][0][0].clone(), t.t[i][0][1].clone()],
            [t.t[i][1][0].clone(), t.t[i][1][1].clone()],
        ]
    };
    let t1 = slice(0);
    let t2 = slice(1);
    let a = det2(t1.clone());
    let c = det2(t2.clone());
    let sum = [
        [
            t1[0][0].clone() + t2[0][0].clone(),
            t1[0][1].clone() + t2[0][1].clone(),
        ],
        [
            t1[1][0].clone() + t2[1][0].clone(),
            t1[1][1].clone() + t2[1][1].clone(),
        ],
    ];
    let b = det2(sum) - a.clone() - c.clone();
    b.clone() * b - Rat::from_integer(4.into()) * a * c
}

/// Orbit classification from the rank profile and the hyperdeterminant.
/// Rotations of the degenerate profile are identified because graded
/// isomorphisms include the quiver rotation.
pub fn classify(t: &CubicTensor) -> Result<GermType, GermError> {
    let profile = mode_rank_profile(t);
    let mut sorted = profile;
    sorted.sort_unstable();
    match sorted {
        [0, 0, 0] => Ok(GermType::T1),
        [1, 1, 1] => Ok(GermType::T2),
        [1, 2, 2] => Ok(GermType::T3),
        [2, 2, 2] => {
            if hyperdet(t).is_zero() {
                Ok(GermType::T4)
            } else {
                Ok(GermType::T5)
            }
        }
        _ => Err(GermError::ImpossibleProfile(profile)),
    }
}

/// Classifies the cubic part of a potential on a doubled-3-cycle quiver.
pub fn classify_potential(q: &Quiver, w: &Potential) -> Result<GermType, GermError> {
    classify(&cubic_tensor(q, w)?)
}

/// Simultaneous base change: one invertible 2x2 matrix per arrow group.
pub fn transform(
    t: &CubicTensor,
    m_a: &[[Rat; 2]; 2],
    m_b: &[[Rat; 2]; 2],
    m_c: &[[Rat; 2]; 2],
) -> Result<CubicTensor, GermError> {
    for m in [m_a, m_b, m_c] {
        if det2(m.clone()).is_zero() {
            return Err(GermError::SingularMatrix);
        }
    }
    let mut out = CubicTensor::zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let mut acc = Rat::zero();
                for ii in 0..2 {
                    for jj in 0..2 {
                        for kk in 0..2 {
                            acc += m_c[i][ii].clone()
                                * m_b[j][jj].clone()
                                * m_a[k][kk].clone()
                                * t.t[ii][jj][kk].clone();
                        }
                    }
                }
                out.t[i][j][k] = acc;
            }
        }
    }
    Ok(out)
}

/// The five canonical tensors, indexed by type.
pub fn canonical_tensor(ty: GermType) -> CubicTensor {
    let one = Rat::one;
    match ty {
        GermType::T1 => CubicTensor::zero(),
        GermType::T2 => CubicTensor::from_entries(&[((0, 0, 0), one())]),
        GermType::T3 => CubicTensor::from_entries(&[((0, 0, 0), one()), ((0, 1, 1), one())]),
        GermType::T4 => CubicTensor::from_entries(&[
            ((0, 0, 1), one()),
            ((0, 1, 0), one()),
            ((1, 0, 0), one()),
        ]),
        GermType::T5 => CubicTensor::from_entries(&[((0, 0, 0), one()), ((1, 1, 1), one())]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{self, Preset};
    use crate::qarith::rat_i;

    #[test]
    fn preset_tensors() {
        let q = presets::markov_quiver();
        let gen = cubic_tensor(&q, &presets::markov_potential(Preset::MarkovGen)).unwrap();
        assert_eq!(gen, canonical_tensor(GermType::T5));
        let marg = cubic_tensor(&q, &presets::markov_potential(Preset::MarkovMarg)).unwrap();
        assert_eq!(marg, canonical_tensor(GermType::T4));
        let zero = cubic_tensor(&q, &presets::markov_potential(Preset::MarkovCase1)).unwrap();
        assert!(zero.is_zero());
    }

    #[test]
    fn canonical_types_classify_to_themselves() {
        for ty in [
            GermType::T1,
            GermType::T2,
            GermType::T3,
            GermType::T4,
            GermType::T5,
        ] {
            assert_eq!(classify(&canonical_tensor(ty)).unwrap(), ty);
        }
    }

    #[test]
    fn rank_profiles() {
        assert_eq!(mode_rank_profile(&canonical_tensor(GermType::T1)), [0, 0, 0]);
        assert_eq!(mode_rank_profile(&canonical_tensor(GermType::T2)), [1, 1, 1]);
        assert_eq!(mode_rank_profile(&canonical_tensor(GermType::T3)), [1, 2, 2]);
        assert_eq!(mode_rank_profile(&canonical_tensor(GermType::T4)), [2, 2, 2]);
        assert_eq!(mode_rank_profile(&canonical_tensor(GermType::T5)), [2, 2, 2]);
    }

    #[test]
    fn hyperdet_values() {
        // generic slices give det = xy, discriminant 1
        assert_eq!(hyperdet(&canonical_tensor(GermType::T5)), rat_i(1));
        // marginal slices give det = -x^2, discriminant 0
        assert_eq!(hyperdet(&canonical_tensor(GermType::T4)), rat_i(0));
        assert_eq!(hyperdet(&CubicTensor::zero()), rat_i(0));
    }

    #[test]
    fn identity_transform_is_identity() {
        let id = [[rat_i(1), rat_i(0)], [rat_i(0), rat_i(1)]];
        let t = canonical_tensor(GermType::T4);
        assert_eq!(transform(&t, &id, &id, &id).unwrap(), t);
    }

    #[test]
    fn swap_fixes_generic_tensor() {
        let swap = [[rat_i(0), rat_i(1)], [rat_i(1), rat_i(0)]];
        let t = canonical_tensor(GermType::T5);
        assert_eq!(transform(&t, &swap, &swap, &swap).unwrap(), t);
    }

    #[test]
    fn singular_transforms_rejected() {
        let id = [[rat_i(1), rat_i(0)], [rat_i(0), rat_i(1)]];
        let bad = [[rat_i(1), rat_i(1)], [rat_i(1), rat_i(1)]];
        assert!(matches!(
            transform(&canonical_tensor(GermType::T5), &bad, &id, &id),
            Err(GermError::SingularMatrix)
        ));
    }

    #[test]
    fn rotation_preserves_type() {
        for ty in [
            GermType::T1,
            GermType::T2,
            GermType::T3,
            GermType::T4,
            GermType::T5,
        ] {
            let t = canonical_tensor(ty);
            assert_eq!(classify(&t.rotated()).unwrap(), ty);
            assert_eq!(classify(&t.rotated().rotated()).unwrap(), ty);
        }
    }

    #[test]
    fn shape_detection() {
        let q = presets::markov_quiver();
        let shape = markov_shape(&q).unwrap();
        assert_eq!(shape.vertex_cycle, [0, 1, 2]);
        assert_eq!(shape.groups[0], ["a1".to_string(), "a2".to_string()]);
        // a quiver with a 2-cycle is not this shape
        let other = Quiver::new(
            ["1", "2", "3"].map(String::from),
            [
                ("x1", "1", "2"),
                ("x2", "1", "2"),
                ("y1", "2", "1"),
                ("y2", "2", "3"),
                ("z1", "3", "1"),
                ("z2", "3", "1"),
            ]
            .map(|(n, f, t)| (n.to_string(), f.to_string(), t.to_string())),
        )
        .unwrap();
        assert!(markov_shape(&other).is_none());
    }
}
