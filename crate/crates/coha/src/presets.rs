//! Built-in inputs: the triangle quiver with doubled arrows and the five
//! cubic normal-form potentials on it.

use std::collections::BTreeSet;
use std::str::FromStr;

use crate::qarith::{rat, rat_i};
use crate::quiver::{Potential, Quiver, Stability};

/// Named preset inputs for the command-line driver and the test suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Generic cubic `c1 b1 a1 + c2 b2 a2`.
    MarkovGen,
    /// Marginal cubic `c1 b1 a2 + c1 b2 a1 + c2 b1 a1`.
    MarkovMarg,
    /// Zero cubic part (normal form 1).
    MarkovCase1,
    /// Single cycle `c1 b1 a1` (normal form 2).
    MarkovCase2,
    /// `c1 b1 a1 + c1 b2 a2` (normal form 3).
    MarkovCase3,
    /// Zero potential, driving the shuffle-algebra partition function.
    MarkovW0,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::MarkovGen,
        Preset::MarkovMarg,
        Preset::MarkovCase1,
        Preset::MarkovCase2,
        Preset::MarkovCase3,
        Preset::MarkovW0,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::MarkovGen => "markov-gen",
            Preset::MarkovMarg => "markov-marg",
            Preset::MarkovCase1 => "markov-case1",
            Preset::MarkovCase2 => "markov-case2",
            Preset::MarkovCase3 => "markov-case3",
            Preset::MarkovW0 => "markov-w0",
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                format!("unknown preset `{}` (expected one of {})", s, names.join(", "))
            })
    }
}

/// Vertices 1,2,3 with doubled arrows `a: 1->2`, `b: 2->3`, `c: 3->1`.
pub fn markov_quiver() -> Quiver {
    Quiver::new(
        ["1", "2", "3"].map(String::from),
        [
            ("a1", "1", "2"),
            ("a2", "1", "2"),
            ("b1", "2", "3"),
            ("b2", "2", "3"),
            ("c1", "3", "1"),
            ("c2", "3", "1"),
        ]
        .map(|(n, f, t)| (n.to_string(), f.to_string(), t.to_string())),
    )
    .expect("static quiver is valid")
}

/// The fixed stability `zeta = (1, 1/100, -1)`.
pub fn markov_stability() -> Stability {
    Stability::new(vec![rat_i(1), rat(1, 100), rat_i(-1)])
}

fn cycle(names: [&str; 3]) -> Vec<String> {
    names.map(String::from).to_vec()
}

pub fn markov_potential(preset: Preset) -> Potential {
    let q = markov_quiver();
    let terms: Vec<[&str; 3]> = match preset {
        Preset::MarkovGen => vec![["c1", "b1", "a1"], ["c2", "b2", "a2"]],
        Preset::MarkovMarg => vec![["c1", "b1", "a2"], ["c1", "b2", "a1"], ["c2", "b1", "a1"]],
        Preset::MarkovCase1 | Preset::MarkovW0 => vec![],
        Preset::MarkovCase2 => vec![["c1", "b1", "a1"]],
        Preset::MarkovCase3 => vec![["c1", "b1", "a1"], ["c1", "b2", "a2"]],
    };
    Potential::new(&q, terms.into_iter().map(|c| (rat_i(1), cycle(c))))
        .expect("static potentials are valid")
}

/// The arrow set removed for dimensional reduction of the cubic presets.
pub fn markov_cut(preset: Preset) -> BTreeSet<String> {
    match preset {
        Preset::MarkovCase1 | Preset::MarkovW0 => BTreeSet::new(),
        _ => ["c1", "c2"].map(String::from).into_iter().collect(),
    }
}
