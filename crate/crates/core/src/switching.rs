//! Brute-force decision procedures over generalized switchings.
//!
//! A switching keeps, for every negative pole, its anchor edge and at most
//! one conclusion edge (the chosen port, if it is linked). Positive poles and
//! blobs keep all their edges. Everything here is exponential in the number
//! of multi-conclusion poles and serves as ground truth for the rewriting
//! engines.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::Module;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SwitchingError {
    #[error("module has pending ports; DR-correctness needs a closed module")]
    NotClosed,
}

/// Vertex-level view shared by modules and contracted graphs.
///
/// Vertices `0..positives` are positive poles (cells or blobs); negative pole
/// `k` is vertex `positives + k`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SwitchStructure {
    pub positives: usize,
    pub poles: Vec<SwitchPole>,
    /// Edges between positive vertices that every switching keeps.
    pub fixed: Vec<(usize, usize)>,
    /// Positive vertices carrying a pending hypothesis, one entry per port.
    pub pending_hypotheses: Vec<usize>,
    /// Positive vertices carrying a pending conclusion, one entry per port.
    pub pending_conclusions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchPole {
    pub anchor: usize,
    /// Target positive vertex of each conclusion port; `None` if pending.
    pub ports: Vec<Option<usize>>,
}

impl SwitchStructure {
    pub fn vertex_count(&self) -> usize {
        self.positives + self.poles.len()
    }

    pub fn is_closed(&self) -> bool {
        self.pending_hypotheses.is_empty()
            && self.pending_conclusions.is_empty()
            && self
                .poles
                .iter()
                .all(|p| p.ports.iter().all(Option::is_some))
    }

    /// The structure linked to its full connector: a fresh positive vertex
    /// consuming every pending conclusion, with one single-port pole per
    /// pending hypothesis (or one empty pole if there is none). A closed
    /// structure is returned unchanged.
    pub fn with_full_connector(&self) -> SwitchStructure {
        if self.is_closed() {
            return self.clone();
        }
        let f = self.positives;
        let mut poles: Vec<SwitchPole> = self
            .poles
            .iter()
            .map(|p| SwitchPole {
                anchor: p.anchor,
                ports: p.ports.iter().map(|t| Some(t.unwrap_or(f))).collect(),
            })
            .collect();
        if self.pending_hypotheses.is_empty() {
            poles.push(SwitchPole {
                anchor: f,
                ports: Vec::new(),
            });
        }
        for &v in &self.pending_hypotheses {
            poles.push(SwitchPole {
                anchor: f,
                ports: vec![Some(v)],
            });
        }
        let mut fixed = self.fixed.clone();
        fixed.extend(self.pending_conclusions.iter().map(|&v| (v, f)));
        SwitchStructure {
            positives: f + 1,
            poles,
            fixed,
            pending_hypotheses: Vec::new(),
            pending_conclusions: Vec::new(),
        }
    }
}

/// Anything the oracle can switch.
pub trait Switchable {
    fn switch_structure(&self) -> SwitchStructure;
}

impl Switchable for Module {
    fn switch_structure(&self) -> SwitchStructure {
        let index = |id| {
            self.cells()
                .binary_search_by_key(&id, |c| c.id)
                .expect("link target is a cell of the module")
        };
        let mut s = SwitchStructure {
            positives: self.cells().len(),
            ..SwitchStructure::default()
        };
        for (i, cell) in self.cells().iter().enumerate() {
            for h in &cell.hypotheses {
                if self.conclusion_owner(h).is_none() {
                    s.pending_hypotheses.push(i);
                }
            }
            for pole in &cell.poles {
                s.poles.push(SwitchPole {
                    anchor: i,
                    ports: pole
                        .conclusions
                        .iter()
                        .map(|c| self.hypothesis_owner(c).map(index))
                        .collect(),
                });
            }
        }
        s
    }
}

impl Switchable for SwitchStructure {
    fn switch_structure(&self) -> SwitchStructure {
        self.clone()
    }
}

/// One chosen port index per negative pole, in pole order. Poles without
/// ports carry the trivial choice 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Switching(pub Vec<usize>);

/// Undirected multigraph; a repeated edge is a cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchedGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl SwitchedGraph {
    pub fn is_acyclic(&self) -> bool {
        let mut uf = UnionFind::new(self.vertices);
        self.edges.iter().all(|&(a, b)| uf.union(a, b))
    }

    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.vertices);
        let merged = self.edges.iter().filter(|&&(a, b)| uf.union(a, b)).count();
        self.vertices - merged
    }

    pub fn is_connected(&self) -> bool {
        self.components() <= 1
    }
}

/// All switchings in lexicographic order, the first pole varying slowest.
pub fn switchings(x: &impl Switchable) -> impl Iterator<Item = Switching> {
    let radices: Vec<usize> = x
        .switch_structure()
        .poles
        .iter()
        .map(|p| p.ports.len().max(1))
        .collect();
    let mut next = Some(vec![0; radices.len()]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for i in (0..succ.len()).rev() {
            succ[i] += 1;
            if succ[i] < radices[i] {
                next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(Switching(current))
    })
}

pub fn switching_count(x: &impl Switchable) -> u128 {
    x.switch_structure()
        .poles
        .iter()
        .map(|p| p.ports.len().max(1) as u128)
        .product()
}

pub fn switched_graph(x: &impl Switchable, s: &Switching) -> SwitchedGraph {
    let st = x.switch_structure();
    assert_eq!(s.0.len(), st.poles.len(), "switching must cover every pole");
    let mut edges = st.fixed.clone();
    for (k, (pole, &choice)) in st.poles.iter().zip(&s.0).enumerate() {
        let v = st.positives + k;
        edges.push((v, pole.anchor));
        if let Some(Some(target)) = pole.ports.get(choice) {
            edges.push((v, *target));
        }
    }
    SwitchedGraph {
        vertices: st.vertex_count(),
        edges,
    }
}

#[derive(Clone)]
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

const PARALLEL_THRESHOLD: u128 = 1 << 14;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    Acyclic,
    Connected,
}

/// A pole's choices up to the graph they induce, each with a representative
/// port index. For acyclicity a pending choice is dominated by any linked
/// one; for connectedness it dominates every other choice.
fn effective_choices(pole: &SwitchPole, goal: Goal) -> Vec<(usize, Option<usize>)> {
    let has_pending = pole.ports.is_empty() || pole.ports.iter().any(Option::is_none);
    if goal == Goal::Connected && has_pending {
        let port = pole.ports.iter().position(Option::is_none).unwrap_or(0);
        return vec![(port, None)];
    }
    let mut seen = BTreeSet::new();
    let choices: Vec<_> = pole
        .ports
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.filter(|t| seen.insert(*t)).map(|t| (i, Some(t))))
        .collect();
    if choices.is_empty() {
        vec![(0, None)]
    } else {
        choices
    }
}

/// Finds the first switching (in enumeration order of effective choices)
/// whose graph violates `goal`.
fn find_violation(st: &SwitchStructure, goal: Goal) -> Option<Switching> {
    let mut base = UnionFind::new(st.vertex_count());
    let mut merged = 0;
    for &(a, b) in &st.fixed {
        if base.union(a, b) {
            merged += 1;
        } else if goal == Goal::Acyclic {
            return Some(Switching(vec![0; st.poles.len()]));
        }
    }
    for (k, pole) in st.poles.iter().enumerate() {
        base.union(st.positives + k, pole.anchor);
        merged += 1;
    }
    let choices: Vec<_> = st
        .poles
        .iter()
        .map(|p| effective_choices(p, goal))
        .collect();
    let total: u128 = choices.iter().map(|c| c.len() as u128).product();
    let vertices = st.vertex_count();

    let violates = |index: u128| -> bool {
        let mut uf = base.clone();
        let mut merged = merged;
        let mut rest = index;
        for (k, options) in choices.iter().enumerate().rev() {
            let n = options.len() as u128;
            let (_, target) = options[(rest % n) as usize];
            rest /= n;
            if let Some(t) = target {
                if uf.union(st.positives + k, t) {
                    merged += 1;
                } else if goal == Goal::Acyclic {
                    return true;
                }
            }
        }
        goal == Goal::Connected && vertices - merged > 1
    };

    let found = if total > PARALLEL_THRESHOLD {
        let total = u64::try_from(total).expect("switching space too large to enumerate");
        (0..total)
            .into_par_iter()
            .find_first(|&i| violates(i as u128))
            .map(u128::from)
    } else {
        (0..total).find(|&i| violates(i))
    };
    found.map(|index| {
        let mut rest = index;
        let mut picks = vec![0; choices.len()];
        for (k, options) in choices.iter().enumerate().rev() {
            let n = options.len() as u128;
            picks[k] = options[(rest % n) as usize].0;
            rest /= n;
        }
        Switching(picks)
    })
}

/// A switching whose graph contains a cycle, if any.
pub fn find_cyclic_switching(x: &impl Switchable) -> Option<Switching> {
    find_violation(&x.switch_structure(), Goal::Acyclic)
}

/// A switching whose graph is disconnected, if any.
pub fn find_disconnected_switching(x: &impl Switchable) -> Option<Switching> {
    find_violation(&x.switch_structure(), Goal::Connected)
}

pub fn acyclic_oracle(x: &impl Switchable) -> bool {
    find_cyclic_switching(x).is_none()
}

pub fn all_switchings_connected(x: &impl Switchable) -> bool {
    find_disconnected_switching(x).is_none()
}

pub fn dr_correct(x: &impl Switchable) -> Result<bool, SwitchingError> {
    let st = x.switch_structure();
    if !st.is_closed() {
        return Err(SwitchingError::NotClosed);
    }
    Ok(acyclic_oracle(&st) && all_switchings_connected(&st))
}

/// Every switching of the structure linked to its full connector is
/// connected. A closed structure is judged alone.
pub fn connectable_oracle(x: &impl Switchable) -> bool {
    all_switchings_connected(&x.switch_structure().with_full_connector())
}

pub fn o_correct_oracle(x: &impl Switchable) -> bool {
    acyclic_oracle(x) && connectable_oracle(x)
}
