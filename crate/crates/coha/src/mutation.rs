//! Mutation of quivers with potential: premutation (arrow reversal and
//! composite creation), formal reduction (elimination of quadratic 2-cycle
//! terms by iterated substitution), and a bounded search for 2-cycle
//! obstructions under iterated mutation.
//!
//! Potentials are truncated at cycle length `trunc`. Substitutions only
//! replace an arrow by itself plus longer paths, so a dropped overlong term
//! can never feed back into shorter ones: the part of the potential up to
//! the truncation length stays exact, which is what `valid_to` records.

use num::Zero;
use std::collections::BTreeSet;
use thiserror::Error;

use crate::qarith::Rat;
use crate::quiver::{Potential, Quiver, QuiverError};

#[derive(Debug, Clone, Error)]
pub enum MutationError {
    #[error("cannot mutate at vertex `{0}`: loop present")]
    LoopAtVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("reduction did not converge within {limit} substitution rounds (cycle {cycle:?})")]
    NonConvergence { limit: usize, cycle: Vec<String> },
    #[error("2-cycle term {cycle:?} lost its coefficient mid-reduction")]
    DegenerateQuadratic { cycle: Vec<String> },
    #[error(transparent)]
    Quiver(#[from] QuiverError),
}

/// A quiver with potential under mutation, with truncation bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QpState {
    pub quiver: Quiver,
    pub potential: Potential,
    /// Maximum retained cycle length.
    pub trunc: usize,
    /// Length up to which the potential is exact.
    pub valid_to: usize,
}

pub const DEFAULT_TRUNC: usize = 9;

impl QpState {
    pub fn new(quiver: Quiver, potential: Potential, trunc: usize) -> Self {
        QpState {
            quiver,
            potential,
            trunc,
            valid_to: trunc,
        }
    }

    /// Arrow counts between ordered vertex pairs, the mutation-invariant
    /// shadow of the quiver.
    pub fn arrow_count_matrix(&self) -> Vec<Vec<usize>> {
        let n = self.quiver.n_vertices();
        (0..n)
            .map(|i| (0..n).map(|j| self.quiver.arrow_count(i, j)).collect())
            .collect()
    }
}

fn composite_name(later: &str, earlier: &str) -> String {
    format!("[{}.{}]", later, earlier)
}

fn star_name(name: &str) -> String {
    format!("{}*", name)
}

/// Premutation at a vertex: arrows through `k` are reversed, a composite
/// `[b.a]` is added for every in/out pair, passes of potential cycles
/// through `k` are contracted to composites, and the cubic correction term
/// `[b.a] a* b*` is added for every pair.
pub fn premutate(s: &QpState, k: &str) -> Result<QpState, MutationError> {
    let q = &s.quiver;
    let kv = q
        .vertex_index(k)
        .ok_or_else(|| MutationError::UnknownVertex(k.to_string()))?;
    if q.has_loop_at(kv) {
        return Err(MutationError::LoopAtVertex(k.to_string()));
    }
    let incoming: Vec<String> = q
        .arrows()
        .iter()
        .filter(|a| a.target == kv)
        .map(|a| a.name.clone())
        .collect();
    let outgoing: Vec<String> = q
        .arrows()
        .iter()
        .filter(|a| a.source == kv)
        .map(|a| a.name.clone())
        .collect();

    let vname = |i: usize| q.vertices()[i].clone();
    let mut arrows: Vec<(String, String, String)> = Vec::new();
    for a in q.arrows() {
        if a.target == kv {
            // a: i -> k becomes a*: k -> i
            arrows.push((star_name(&a.name), vname(kv), vname(a.source)));
        } else if a.source == kv {
            // b: k -> j becomes b*: j -> k
            arrows.push((star_name(&a.name), vname(a.target), vname(kv)));
        } else {
            arrows.push((a.name.clone(), vname(a.source), vname(a.target)));
        }
    }
    for b in &outgoing {
        for a in &incoming {
            let src = q.arrow(a)?.source;
            let tgt = q.arrow(b)?.target;
            arrows.push((composite_name(b, a), vname(src), vname(tgt)));
        }
    }
    let quiver = Quiver::new(q.vertices().to_vec(), arrows)?;

    let mut potential = Potential::empty();
    // [W]: contract each pass through k into the composite arrow
    for (cycle, coeff) in s.potential.terms() {
        // applied order, rotated so the cycle does not start at k
        let mut applied: Vec<String> = cycle.iter().rev().cloned().collect();
        let starts_at_k = |w: &str| q.arrow(w).map(|a| a.source == kv).unwrap_or(false);
        let mut rot = 0;
        while starts_at_k(&applied[0]) {
            applied.rotate_left(1);
            rot += 1;
            if rot > applied.len() {
                // cycle lives entirely at k; excluded by the no-loop check
                return Err(MutationError::LoopAtVertex(k.to_string()));
            }
        }
        let mut contracted: Vec<String> = Vec::with_capacity(applied.len());
        let mut i = 0;
        while i < applied.len() {
            let w = &applied[i];
            let ends_at_k = q.arrow(w)?.target == kv;
            if ends_at_k {
                // paired with the next arrow, which leaves k
                let b = &applied[(i + 1) % applied.len()];
                contracted.push(composite_name(b, w));
                i += 2;
            } else {
                contracted.push(w.clone());
                i += 1;
            }
        }
        if contracted.len() <= s.trunc {
            let printed: Vec<String> = contracted.into_iter().rev().collect();
            potential.add_term(coeff, &printed);
        }
    }
    // correction terms [b.a] a* b*
    for b in &outgoing {
        for a in &incoming {
            let cycle = vec![composite_name(b, a), star_name(a), star_name(b)];
            potential.add_term(&Rat::from_integer(1.into()), &cycle);
        }
    }
    Ok(QpState {
        quiver,
        potential,
        trunc: s.trunc,
        valid_to: s.valid_to,
    })
}

/// Applies an arrow substitution `name -> name + correction` to every term,
/// truncating expanded cycles at `trunc`.
fn substitute(
    potential: &Potential,
    name: &str,
    correction: &[(Rat, Vec<String>)],
    trunc: usize,
) -> Potential {
    let mut out = Potential::empty();
    for (cycle, coeff) in potential.terms() {
        let positions: Vec<usize> = (0..cycle.len()).filter(|&i| cycle[i] == name).collect();
        if positions.is_empty() {
            out.add_term(coeff, cycle);
            continue;
        }
        // expand the product over occurrences: each picks the arrow itself
        // or one correction path
        let n_choices = correction.len() + 1;
        let mut selector = vec![0usize; positions.len()];
        'expansion: loop {
            let mut c = coeff.clone();
            let mut word: Vec<String> = Vec::with_capacity(cycle.len());
            for (i, arrow) in cycle.iter().enumerate() {
                match positions.iter().position(|&p| p == i) {
                    None => word.push(arrow.clone()),
                    Some(slot) => {
                        let choice = selector[slot];
                        if choice == 0 {
                            word.push(arrow.clone());
                        } else {
                            let (cc, path) = &correction[choice - 1];
                            c *= cc.clone();
                            word.extend(path.iter().cloned());
                        }
                    }
                }
            }
            if !c.is_zero() && word.len() <= trunc {
                out.add_term(&c, &word);
            }
            for i in 0..=selector.len() {
                if i == selector.len() {
                    break 'expansion;
                }
                selector[i] += 1;
                if selector[i] < n_choices {
                    continue 'expansion;
                }
                selector[i] = 0;
            }
        }
    }
    out
}

fn delete_arrows(q: &Quiver, names: &[&str]) -> Result<Quiver, QuiverError> {
    Quiver::new(
        q.vertices().to_vec(),
        q.arrows()
            .iter()
            .filter(|a| !names.contains(&a.name.as_str()))
            .map(|a| {
                (
                    a.name.clone(),
                    q.vertices()[a.source].clone(),
                    q.vertices()[a.target].clone(),
                )
            }),
    )
}

/// Reduction: repeatedly pick the lexicographically smallest quadratic
/// (2-cycle) term `c * u v` between distinct vertices, substitute
/// `u -> u - dW/dv / c` and `v -> v - dW/du / c` until no other term
/// mentions `u` or `v`, then delete the pair and the term. Ends when the
/// quadratic part between distinct vertices is zero.
pub fn reduce(s: &QpState) -> Result<QpState, MutationError> {
    let mut quiver = s.quiver.clone();
    let mut potential = s.potential.clone();
    let max_outer = quiver.arrows().len() + 1;
    for _ in 0..max_outer {
        let quad = potential
            .quadratic_terms()
            .into_iter()
            .find(|(cycle, _)| {
                let u = quiver.arrow(&cycle[0]).expect("term arrows exist");
                u.source != u.target
            });
        let Some((cycle, _)) = quad else {
            let mut out = s.clone();
            out.quiver = quiver;
            out.potential = potential;
            return Ok(out);
        };
        let u = cycle[0].clone();
        let v = cycle[1].clone();
        let limit = s.trunc + 3;
        let mut converged = false;
        for _ in 0..limit {
            let c = potential.coeff(&cycle);
            if c.is_zero() {
                return Err(MutationError::DegenerateQuadratic { cycle });
            }
            let mut rest = potential.clone();
            rest.add_term(&-c.clone(), &cycle);
            let r_u = rest.cyclic_derivative(&u);
            let r_v = rest.cyclic_derivative(&v);
            if r_u.is_empty() && r_v.is_empty() {
                potential = rest;
                quiver = delete_arrows(&quiver, &[&u, &v])?;
                converged = true;
                break;
            }
            let neg_scale = |paths: Vec<(Rat, Vec<String>)>| -> Vec<(Rat, Vec<String>)> {
                paths
                    .into_iter()
                    .map(|(cc, path)| (-cc / c.clone(), path))
                    .collect()
            };
            // v absorbs the u-occurrences and vice versa
            let v_corr = neg_scale(r_u);
            let u_corr = neg_scale(r_v);
            if !v_corr.is_empty() {
                potential = substitute(&potential, &v, &v_corr, s.trunc);
            }
            if !u_corr.is_empty() {
                potential = substitute(&potential, &u, &u_corr, s.trunc);
            }
        }
        if !converged {
            return Err(MutationError::NonConvergence {
                limit,
                cycle,
            });
        }
    }
    Err(MutationError::NonConvergence {
        limit: max_outer,
        cycle: vec![],
    })
}

/// Mutation at a vertex: premutation followed by reduction.
pub fn mutate(s: &QpState, k: &str) -> Result<QpState, MutationError> {
    reduce(&premutate(s, k)?)
}

/// Outcome of the bounded obstruction search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    /// The first mutation word (depth-first, vertices in order, immediate
    /// repeats pruned) whose reduced result contains a 2-cycle.
    Obstructed { word: Vec<String> },
    /// No 2-cycle up to the depth; states visited.
    Clear { depth: usize, visited: usize },
}

/// Depth-first search for a 2-cycle obstruction under iterated mutation.
pub fn mutability_search(s: &QpState, depth: usize) -> Result<SearchOutcome, MutationError> {
    assert!(depth >= 1, "search depth must be at least 1");
    let mut visited = 0usize;
    fn rec(
        s: &QpState,
        word: &mut Vec<String>,
        depth: usize,
        visited: &mut usize,
    ) -> Result<Option<Vec<String>>, MutationError> {
        if word.len() == depth {
            return Ok(None);
        }
        let vertices: Vec<String> = s.quiver.vertices().to_vec();
        for k in vertices {
            if word.last() == Some(&k) {
                continue;
            }
            word.push(k.clone());
            let next = mutate(s, &k).map_err(|e| match e {
                MutationError::NonConvergence { limit, cycle } => {
                    MutationError::NonConvergence { limit, cycle }
                }
                other => other,
            })?;
            *visited += 1;
            if next.quiver.two_cycle_witness().is_some() {
                return Ok(Some(word.clone()));
            }
            if let Some(w) = rec(&next, word, depth, visited)? {
                return Ok(Some(w));
            }
            word.pop();
        }
        Ok(None)
    }
    let mut word = Vec::new();
    match rec(s, &mut word, depth, &mut visited)? {
        Some(word) => Ok(SearchOutcome::Obstructed { word }),
        None => Ok(SearchOutcome::Clear { depth, visited }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::{classify_potential, markov_shape, GermType};
    use crate::presets::{self, Preset};

    fn state(preset: Preset) -> QpState {
        QpState::new(
            presets::markov_quiver(),
            presets::markov_potential(preset),
            DEFAULT_TRUNC,
        )
    }

    #[test]
    fn premutation_arrow_counts() {
        let s = state(Preset::MarkovMarg);
        let p = premutate(&s, "2").unwrap();
        let q = &p.quiver;
        let idx = |v: &str| q.vertex_index(v).unwrap();
        // 1 -> 3: four composites; 2 -> 1, 3 -> 2: stars; 3 -> 1: old c's
        assert_eq!(q.arrow_count(idx("1"), idx("3")), 4);
        assert_eq!(q.arrow_count(idx("2"), idx("1")), 2);
        assert_eq!(q.arrow_count(idx("3"), idx("2")), 2);
        assert_eq!(q.arrow_count(idx("3"), idx("1")), 2);
        // the contracted potential has three quadratic terms
        assert_eq!(p.potential.quadratic_terms().len(), 3);
        // composites against their stars: 2-cycles before reduction
        assert!(q.two_cycle_witness().is_some());
    }

    #[test]
    fn premutation_of_zero_potential() {
        let s = state(Preset::MarkovW0);
        let p = premutate(&s, "2").unwrap();
        // only the correction terms
        assert_eq!(p.potential.n_terms(), 4);
        assert!(p.potential.terms().all(|(c, _)| c.len() == 3));
    }

    #[test]
    fn marginal_mutation_returns_marginal() {
        let s = state(Preset::MarkovMarg);
        for k in ["1", "2", "3"] {
            let m = mutate(&s, k).unwrap();
            assert!(
                m.quiver.two_cycle_witness().is_none(),
                "2-cycle after mutating at {}",
                k
            );
            assert!(markov_shape(&m.quiver).is_some(), "shape lost at {}", k);
            assert_eq!(
                classify_potential(&m.quiver, &m.potential).unwrap(),
                GermType::T4,
                "germ type changed at {}",
                k
            );
        }
    }

    #[test]
    fn generic_mutation_stays_generic() {
        let s = state(Preset::MarkovGen);
        for k in ["1", "2", "3"] {
            let m = mutate(&s, k).unwrap();
            assert!(m.quiver.two_cycle_witness().is_none());
            assert!(markov_shape(&m.quiver).is_some());
            assert_eq!(
                classify_potential(&m.quiver, &m.potential).unwrap(),
                GermType::T5
            );
        }
    }

    #[test]
    fn double_mutation_restores_shape_and_type() {
        for preset in [Preset::MarkovGen, Preset::MarkovMarg] {
            let s = state(preset);
            let ty0 = classify_potential(&s.quiver, &s.potential).unwrap();
            for k in ["1", "2", "3"] {
                let twice = mutate(&mutate(&s, k).unwrap(), k).unwrap();
                assert_eq!(
                    twice.arrow_count_matrix(),
                    s.arrow_count_matrix(),
                    "arrow counts after double mutation at {} for {:?}",
                    k,
                    preset
                );
                assert_eq!(
                    classify_potential(&twice.quiver, &twice.potential).unwrap(),
                    ty0
                );
            }
        }
    }

    #[test]
    fn degenerate_cases_obstruct_at_depth_one() {
        for preset in [Preset::MarkovCase1, Preset::MarkovCase2, Preset::MarkovCase3] {
            let s = state(preset);
            match mutability_search(&s, 1).unwrap() {
                SearchOutcome::Obstructed { word } => {
                    assert_eq!(word.len(), 1, "{:?}", preset);
                }
                SearchOutcome::Clear { .. } => panic!("{:?} should obstruct", preset),
            }
            // the paper's witness: a single mutation at vertex 2 leaves
            // at least two 2-cycles
            let m = mutate(&s, "2").unwrap();
            let q = &m.quiver;
            let mut pairs = 0;
            for a in q.arrows() {
                for b in q.arrows() {
                    if a.name < b.name && a.source == b.target && a.target == b.source && a.source != a.target {
                        pairs += 1;
                    }
                }
            }
            assert!(pairs >= 2, "{:?}: expected at least two 2-cycles, got {}", preset, pairs);
        }
    }

    #[test]
    fn infinitely_mutable_cases_clear_at_depth_four() {
        for preset in [Preset::MarkovGen, Preset::MarkovMarg] {
            let s = state(preset);
            match mutability_search(&s, 4).unwrap() {
                SearchOutcome::Clear { visited, .. } => {
                    // 3 + 6 + 12 + 24 mutation words with repeats pruned
                    assert_eq!(visited, 45, "{:?}", preset);
                }
                SearchOutcome::Obstructed { word } => {
                    panic!("{:?} obstructed at {:?}", preset, word)
                }
            }
        }
    }

    #[test]
    fn reduce_without_quadratics_is_identity() {
        let s = state(Preset::MarkovGen);
        let r = reduce(&s).unwrap();
        assert_eq!(r.quiver, s.quiver);
        assert_eq!(r.potential, s.potential);
    }

    #[test]
    fn premutate_rejects_loops() {
        let q = Quiver::new(
            ["1", "2"].map(String::from),
            [
                ("l", "1", "1"),
                ("x", "1", "2"),
            ]
            .map(|(n, f, t)| (n.to_string(), f.to_string(), t.to_string())),
        )
        .unwrap();
        let s = QpState::new(q, Potential::empty(), DEFAULT_TRUNC);
        assert!(matches!(
            premutate(&s, "1"),
            Err(MutationError::LoopAtVertex(_))
        ));
    }
}
