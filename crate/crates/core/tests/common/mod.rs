//! Shared fixtures and a deliberately naive switching checker.
//!
//! The checker rebuilds every switched graph from scratch as an adjacency
//! list and walks it with a plain DFS. It shares no code with the library's
//! union-find enumeration.

#![allow(dead_code)]

use std::collections::BTreeMap;

use bipolar::generate::{gen_random, GenParams};
use bipolar::switching::switching_count;
use bipolar::{compose_chain, Ebm, Module};

pub fn ebm(s: &str) -> Ebm {
    s.parse().unwrap()
}

pub fn chain(parts: &[&str]) -> Module {
    let ebms: Vec<Ebm> = parts.iter().map(|s| ebm(s)).collect();
    compose_chain(&ebms).unwrap()
}

pub const ALPHA: &str = "[a -o (b c)]";
pub const BETA: &str = "[b -o (d)(e f)]";
pub const GAMMA: &str = "[f -o (i)(g h)]";
pub const DELTA: &str = "[c g -o (j)]";
pub const EPS: &str = "[d e -o (k)]";
pub const TBOT: &str = "[-o ()]";

/// The named corpus: every module the golden suite runs on.
pub fn corpus() -> Vec<(&'static str, Module)> {
    vec![
        ("alpha", chain(&[ALPHA])),
        ("beta", chain(&[BETA])),
        ("gamma", chain(&[GAMMA])),
        ("delta", chain(&[DELTA])),
        ("eps", chain(&[EPS])),
        ("tbot", chain(&[TBOT])),
        ("init_fin", chain(&["[-o (a)]", "[a -o ()]"])),
        ("fin_init", chain(&["[a -o ()]", "[-o (a)]"])),
        ("alpha_beta", chain(&[ALPHA, BETA])),
        ("abgd", chain(&[ALPHA, BETA, GAMMA, DELTA])),
        ("beta_eps", chain(&[BETA, EPS])),
        ("ab_fin", chain(&["[-o (a b)]", "[a -o ()]"])),
        (
            "a_b_fin_fin",
            chain(&["[-o (a)(b)]", "[a -o ()]", "[b -o ()]"]),
        ),
    ]
}

/// Independent ground truth for a module.
pub struct Naive {
    vertices: usize,
    fixed: Vec<(usize, usize)>,
    /// Per negative pole: its vertex and, per port, the target vertex if
    /// linked.
    poles: Vec<(usize, Vec<Option<usize>>)>,
}

impl Naive {
    pub fn of(m: &Module) -> Naive {
        let cells = m.cells();
        let mut consumer: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, c) in cells.iter().enumerate() {
            for h in &c.hypotheses {
                consumer.insert(h.as_str(), i);
            }
        }
        let mut vertices = cells.len();
        let mut fixed = Vec::new();
        let mut poles = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            for p in &c.poles {
                let v = vertices;
                vertices += 1;
                fixed.push((i, v));
                let ports = p
                    .conclusions
                    .iter()
                    .map(|l| consumer.get(l.as_str()).copied())
                    .collect();
                poles.push((v, ports));
            }
        }
        Naive {
            vertices,
            fixed,
            poles,
        }
    }

    /// The module plus its full connector, built by hand.
    pub fn with_connector(m: &Module) -> Naive {
        if m.is_closed() {
            return Naive::of(m);
        }
        let mut n = Naive::of(m);
        let f = n.vertices;
        n.vertices += 1;
        // Pending conclusions now end in f.
        for (_, ports) in &mut n.poles {
            for t in ports.iter_mut() {
                if t.is_none() {
                    *t = Some(f);
                }
            }
        }
        let border = m.border();
        let owners: Vec<usize> = border
            .hypotheses
            .iter()
            .map(|h| {
                m.cells()
                    .iter()
                    .position(|c| c.hypotheses.contains(h))
                    .unwrap()
            })
            .collect();
        if owners.is_empty() {
            let v = n.vertices;
            n.vertices += 1;
            n.fixed.push((f, v));
            n.poles.push((v, Vec::new()));
        }
        for owner in owners {
            let v = n.vertices;
            n.vertices += 1;
            n.fixed.push((f, v));
            n.poles.push((v, vec![Some(owner)]));
        }
        n
    }

    fn graphs(&self) -> Vec<Vec<Vec<usize>>> {
        let mut choices: Vec<Vec<Option<usize>>> = vec![Vec::new()];
        for (_, ports) in &self.poles {
            let opts: Vec<Option<usize>> = if ports.is_empty() {
                vec![None]
            } else {
                ports.clone()
            };
            choices = choices
                .into_iter()
                .flat_map(|c| {
                    opts.iter().map(move |o| {
                        let mut c = c.clone();
                        c.push(*o);
                        c
                    })
                })
                .collect();
        }
        choices
            .into_iter()
            .map(|pick| {
                let mut adj = vec![Vec::new(); self.vertices];
                let mut add = |a: usize, b: usize| {
                    adj[a].push(b);
                    adj[b].push(a);
                };
                for &(a, b) in &self.fixed {
                    add(a, b);
                }
                for ((v, _), t) in self.poles.iter().zip(pick) {
                    if let Some(t) = t {
                        add(*v, t);
                    }
                }
                adj
            })
            .collect()
    }

    pub fn all_acyclic(&self) -> bool {
        self.graphs().iter().all(|g| {
            let edges: usize = g.iter().map(Vec::len).sum::<usize>() / 2;
            edges + components(g) == g.len()
        })
    }

    pub fn all_connected(&self) -> bool {
        self.graphs().iter().all(|g| components(g) <= 1)
    }
}

fn components(adj: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut count = 0;
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    count
}

pub fn naive_acyclic(m: &Module) -> bool {
    Naive::of(m).all_acyclic()
}

pub fn naive_dr(m: &Module) -> Option<bool> {
    m.is_closed().then(|| {
        let n = Naive::of(m);
        n.all_acyclic() && n.all_connected()
    })
}

pub fn naive_connectable(m: &Module) -> bool {
    Naive::with_connector(m).all_connected()
}

pub fn naive_o_correct(m: &Module) -> bool {
    naive_acyclic(m) && naive_connectable(m)
}

/// Random module small enough for the naive checker.
pub fn small_module(seed: u64, max_cells: usize) -> Option<Module> {
    let m = gen_random(&GenParams {
        seed,
        cells: 1 + (seed as usize % max_cells),
        ..GenParams::default()
    });
    (switching_count(&m) <= 1 << 12).then_some(m)
}
