//! Seeded random modules, built by repeated composition.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Ebm, Label, Module};

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub cells: usize,
    pub max_poles: usize,
    pub max_conclusions: usize,
    /// Chance that the result is closed by restricting it to the empty
    /// border.
    pub closure_probability: f64,
    /// Bottom-up composition only: no initial or final EBMs, every pole has a
    /// conclusion.
    pub transitory: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            cells: 4,
            max_poles: 3,
            max_conclusions: 3,
            closure_probability: 0.3,
            transitory: false,
        }
    }
}

struct Fresh(usize);

impl Fresh {
    fn next(&mut self, prefix: &str) -> Label {
        self.0 += 1;
        Label::new(format!("{prefix}{}", self.0)).expect("generated labels are identifiers")
    }
}

fn take_random(rng: &mut ChaCha8Rng, pool: &mut Vec<Label>) -> Label {
    let i = rng.gen_range(0..pool.len());
    pool.swap_remove(i)
}

/// Cells with a directed path of links to the producers of `hypotheses`,
/// producers included.
fn reaching(m: &Module, hypotheses: &[Label]) -> BTreeSet<usize> {
    let links = m.links();
    let mut out = BTreeSet::new();
    let mut todo: Vec<usize> = hypotheses
        .iter()
        .filter_map(|h| m.conclusion_owner(h))
        .map(|at| at.cell.0 as usize)
        .collect();
    while let Some(c) = todo.pop() {
        if out.insert(c) {
            todo.extend(
                links
                    .iter()
                    .filter(|l| l.to.0 as usize == c)
                    .map(|l| l.from.cell.0 as usize),
            );
        }
    }
    out
}

pub fn gen_random(p: &GenParams) -> Module {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut fresh = Fresh(0);
    let cells = p.cells.max(1);
    let max_poles = p.max_poles.max(1);
    // Pending conclusions and pending hypotheses so far.
    let mut open_concl: Vec<Label> = Vec::new();
    // Pending hypotheses with the index of their cell.
    let mut open_hyp: Vec<(Label, usize)> = Vec::new();
    let mut module: Option<Module> = None;

    for i in 0..cells {
        let mut hypotheses = Vec::new();
        let mut fresh_hyps = Vec::new();
        if p.transitory {
            if i == 0 || open_concl.is_empty() {
                hypotheses.push(fresh.next("h"));
            } else {
                let k = rng.gen_range(1..=open_concl.len().min(3));
                for _ in 0..k {
                    hypotheses.push(take_random(&mut rng, &mut open_concl));
                }
            }
        } else {
            for _ in 0..rng.gen_range(0..=3) {
                if !open_concl.is_empty() && rng.gen_bool(0.7) {
                    hypotheses.push(take_random(&mut rng, &mut open_concl));
                } else {
                    let h = fresh.next("h");
                    fresh_hyps.push(h.clone());
                    hypotheses.push(h);
                }
            }
        }
        // Cells already reaching this one: linking back to them would close
        // a directed cycle, which no sequence of forward compositions builds.
        let ancestors = module
            .as_ref()
            .map(|m| reaching(m, &hypotheses))
            .unwrap_or_default();
        let mut back_targets: Vec<(Label, usize)> = open_hyp
            .iter()
            .filter(|(_, cell)| !ancestors.contains(cell))
            .cloned()
            .collect();
        let min_conclusions = usize::from(p.transitory);
        let mut poles = Vec::new();
        let mut produced = Vec::new();
        for _ in 0..rng.gen_range(1..=max_poles) {
            let mut pole = Vec::new();
            let n = rng.gen_range(min_conclusions..=p.max_conclusions.max(min_conclusions));
            for _ in 0..n {
                if !p.transitory && !back_targets.is_empty() && rng.gen_bool(0.15) {
                    let k = rng.gen_range(0..back_targets.len());
                    let (h, _) = back_targets.swap_remove(k);
                    open_hyp.retain(|(l, _)| *l != h);
                    pole.push(h);
                } else {
                    let c = fresh.next("c");
                    produced.push(c.clone());
                    pole.push(c);
                }
            }
            poles.push(pole);
        }
        open_hyp.extend(fresh_hyps.into_iter().map(|h| (h, i)));
        open_concl.extend(produced);
        open_concl.shuffle(&mut rng);
        let ebm = Ebm::new(hypotheses, poles).expect("generated labels are fresh");
        module = Some(match module {
            None => Module::from(ebm),
            Some(m) => m
                .compose(&ebm)
                .expect("generated labels respect the discipline"),
        });
    }
    let module = module.expect("at least one cell");
    if !p.transitory && rng.gen_bool(p.closure_probability.clamp(0.0, 1.0)) {
        module.restrict_empty()
    } else {
        module
    }
}

/// A random EBM to compose onto `m`: it consumes some pending conclusions of
/// `m`, may produce some of its pending hypotheses, and uses fresh labels
/// otherwise. Only `max_poles` and `max_conclusions` of `p` are read.
pub fn gen_extension(m: &Module, seed: u64, p: &GenParams) -> Ebm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let taken = m.labels();
    let mut counter = 0usize;
    let mut fresh = |prefix: &str| loop {
        counter += 1;
        let l = Label::new(format!("{prefix}{counter}")).expect("generated labels are identifiers");
        if !taken.contains(&l) {
            break l;
        }
    };
    let border = m.border();
    let mut concl: Vec<Label> = border.conclusions.into_iter().collect();
    let mut hyps: Vec<Label> = border.hypotheses.into_iter().collect();
    let mut hypotheses = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        if !concl.is_empty() && rng.gen_bool(0.8) {
            hypotheses.push(take_random(&mut rng, &mut concl));
        } else {
            hypotheses.push(fresh("u"));
        }
    }
    let mut poles = Vec::new();
    for _ in 0..rng.gen_range(1..=p.max_poles.max(1)) {
        let mut pole = Vec::new();
        for _ in 0..rng.gen_range(0..=p.max_conclusions) {
            if !hyps.is_empty() && rng.gen_bool(0.15) {
                pole.push(take_random(&mut rng, &mut hyps));
            } else {
                pole.push(fresh("v"));
            }
        }
        poles.push(pole);
    }
    Ebm::new(hypotheses, poles).expect("generated labels are fresh")
}
