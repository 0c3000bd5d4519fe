//! Big-step rewriting on modules.
//!
//! The rules fuse two cells across a link whenever that cannot change
//! correctness, and delete neutral empty poles:
//!
//! * `R1`: every conclusion of a pole is linked into one other cell `B`. The
//!   pole disappears and `B` is fused into the pole's cell.
//! * `R2`: every hypothesis of a single-pole cell `B` comes from one pole
//!   `m` of another cell, and `m` has conclusions elsewhere. `B` is fused
//!   into `m`, whose conclusions become `(m \ I) ++ concl(B)`. `B`'s pole
//!   must have a linked conclusion: otherwise the switching of `m` away
//!   from `B` strands it.
//! * `NEUT`: an empty pole next to another pole is deleted.
//!
//! A closed module is correct iff it reduces to the terminal module. For
//! acyclicity the plain rules can get stuck on acyclic modules, so
//! [`acyclic_decide`] additionally prunes cells that are leaves in every
//! switching (`PRUNE`).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{Cell, CellId, Label, Module, Pole, PoleRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BigStepError {
    #[error("redex {0} does not apply to this module")]
    StaleRedex(Redex),
    #[error("module has pending ports; c-correctness needs a closed module")]
    NotClosed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Redex {
    R1 { pole: PoleRef, target: CellId },
    R2 { source: PoleRef, absorbed: CellId },
    Neut { pole: PoleRef },
    Prune { cell: CellId },
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Redex::R1 { pole, target } => write!(f, "R1 pole {pole} into cell {target}"),
            Redex::R2 { source, absorbed } => write!(f, "R2 cell {absorbed} into pole {source}"),
            Redex::Neut { pole } => write!(f, "NEUT pole {pole}"),
            Redex::Prune { cell } => write!(f, "PRUNE cell {cell}"),
        }
    }
}

fn r1_target(m: &Module, at: PoleRef) -> Option<CellId> {
    let pole = m.pole(at)?;
    let mut targets = pole.conclusions.iter().map(|c| m.hypothesis_owner(c));
    let first = targets.next()??;
    if first == at.cell {
        return None;
    }
    targets.all(|t| t == Some(first)).then_some(first)
}

fn r2_applies(m: &Module, source: PoleRef, absorbed: CellId) -> bool {
    if source.cell == absorbed {
        return false;
    }
    let (Some(b), Some(pole)) = (m.cell(absorbed), m.pole(source)) else {
        return false;
    };
    if b.hypotheses.is_empty() || b.poles.len() != 1 {
        return false;
    }
    if !b
        .hypotheses
        .iter()
        .all(|h| m.conclusion_owner(h) == Some(source))
    {
        return false;
    }
    // A pole lying wholly in the interface is an R1 redex with the same
    // result, so R2 only covers poles with conclusions elsewhere.
    let beyond = pole
        .conclusions
        .iter()
        .any(|c| m.hypothesis_owner(c) != Some(absorbed));
    beyond && b.poles[0].conclusions.iter().any(|c| m.is_linked(c))
}

fn neut_applies(m: &Module, at: PoleRef) -> bool {
    m.cell(at.cell)
        .is_some_and(|c| c.poles.len() >= 2 && c.poles.get(at.pole).is_some_and(Pole::is_empty))
}

/// Poles with at least one linked conclusion.
fn live_poles(m: &Module, cell: &Cell) -> usize {
    cell.poles
        .iter()
        .filter(|p| p.conclusions.iter().any(|c| m.is_linked(c)))
        .count()
}

/// Distinct poles feeding hypotheses of `cell`.
fn feeders(m: &Module, cell: &Cell) -> BTreeSet<PoleRef> {
    cell.hypotheses
        .iter()
        .filter_map(|h| m.conclusion_owner(h))
        .collect()
}

/// A cell is a leaf in every switching when it is attached to the rest by a
/// single pole: its own unique live pole, or the unique pole feeding it.
fn prune_applies(m: &Module, id: CellId) -> bool {
    let Some(cell) = m.cell(id) else {
        return false;
    };
    if !m.is_closed() {
        return false;
    }
    let labels = || cell.hypotheses.iter().chain(cell.conclusions());
    if !labels().any(|l| m.is_linked(l)) {
        return false;
    }
    if cell
        .conclusions()
        .any(|c| m.hypothesis_owner(c) == Some(id))
    {
        return false;
    }
    let fed = feeders(m, cell);
    match live_poles(m, cell) {
        0 => fed.len() == 1,
        1 => fed.is_empty(),
        _ => false,
    }
}

/// Whether `r` applies to `m` as it stands.
pub fn is_redex(m: &Module, r: &Redex) -> bool {
    match *r {
        Redex::R1 { pole, target } => r1_target(m, pole) == Some(target),
        Redex::R2 { source, absorbed } => r2_applies(m, source, absorbed),
        Redex::Neut { pole } => neut_applies(m, pole),
        Redex::Prune { cell } => prune_applies(m, cell),
    }
}

/// All R1, R2 and NEUT redexes, ordered by cell id then pole index. With
/// `extended`, PRUNE redexes of a closed module are listed when no other
/// redex exists.
pub fn find_redexes(m: &Module, extended: bool) -> Vec<Redex> {
    let mut out = Vec::new();
    for at in m.pole_refs() {
        if let Some(target) = r1_target(m, at) {
            out.push(Redex::R1 { pole: at, target });
        }
        let absorbed: BTreeSet<CellId> = m
            .pole(at)
            .into_iter()
            .flat_map(|p| p.conclusions.iter())
            .filter_map(|c| m.hypothesis_owner(c))
            .collect();
        for b in absorbed {
            if r2_applies(m, at, b) {
                out.push(Redex::R2 {
                    source: at,
                    absorbed: b,
                });
            }
        }
        if neut_applies(m, at) {
            out.push(Redex::Neut { pole: at });
        }
    }
    if extended && out.is_empty() {
        out.extend(
            m.cells()
                .iter()
                .filter(|c| prune_applies(m, c.id))
                .map(|c| Redex::Prune { cell: c.id }),
        );
    }
    out
}

fn fuse(m: &Module, a: CellId, b: CellId, fused: impl FnOnce(&Cell, &Cell) -> Cell) -> Module {
    let ca = m.cell(a).expect("checked redex");
    let cb = m.cell(b).expect("checked redex");
    let mut new = fused(ca, cb);
    new.id = a.min(b);
    let mut cells: Vec<Cell> = m
        .cells()
        .iter()
        .filter(|c| c.id != a && c.id != b)
        .cloned()
        .collect();
    cells.push(new);
    Module::assemble(cells)
}

pub fn apply_redex(m: &Module, r: &Redex) -> Result<Module, BigStepError> {
    if !is_redex(m, r) {
        return Err(BigStepError::StaleRedex(*r));
    }
    Ok(match *r {
        Redex::R1 { pole, target } => fuse(m, pole.cell, target, |a, b| {
            let interface = &a.poles[pole.pole].conclusions;
            let mut hypotheses = a.hypotheses.clone();
            hypotheses.extend(
                b.hypotheses
                    .iter()
                    .filter(|h| !interface.contains(h))
                    .cloned(),
            );
            let mut poles = a.poles.clone();
            poles.remove(pole.pole);
            poles.extend(b.poles.iter().cloned());
            Cell {
                id: a.id,
                hypotheses,
                poles,
            }
        }),
        Redex::R2 { source, absorbed } => fuse(m, source.cell, absorbed, |a, b| {
            let interface = &b.hypotheses;
            let mut poles = a.poles.clone();
            let merged = &mut poles[source.pole].conclusions;
            merged.retain(|c| !interface.contains(c));
            merged.extend(b.poles[0].conclusions.iter().cloned());
            Cell {
                id: a.id,
                hypotheses: a.hypotheses.clone(),
                poles,
            }
        }),
        Redex::Neut { pole } => {
            let mut cells = m.cells().to_vec();
            let cell = cells
                .iter_mut()
                .find(|c| c.id == pole.cell)
                .expect("checked redex");
            cell.poles.remove(pole.pole);
            Module::assemble(cells)
        }
        Redex::Prune { cell } => {
            let gone = m.cell(cell).expect("checked redex");
            let dead: BTreeSet<&Label> = gone.hypotheses.iter().chain(gone.conclusions()).collect();
            let cells = m
                .cells()
                .iter()
                .filter(|c| c.id != cell)
                .map(|c| Cell {
                    id: c.id,
                    hypotheses: c
                        .hypotheses
                        .iter()
                        .filter(|h| !dead.contains(h))
                        .cloned()
                        .collect(),
                    poles: c
                        .poles
                        .iter()
                        .map(|p| {
                            Pole::new(
                                p.conclusions
                                    .iter()
                                    .filter(|l| !dead.contains(l))
                                    .cloned()
                                    .collect(),
                            )
                        })
                        .collect(),
                })
                .collect();
            Module::assemble(cells)
        }
    })
}

/// Applied redexes, optionally with the module after each step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReductionTrace {
    pub steps: Vec<Redex>,
    pub snapshots: Option<Vec<Module>>,
}

impl ReductionTrace {
    pub fn with_snapshots() -> Self {
        ReductionTrace {
            steps: Vec::new(),
            snapshots: Some(Vec::new()),
        }
    }

    fn record(&mut self, r: Redex, after: &Module) {
        self.steps.push(r);
        if let Some(s) = &mut self.snapshots {
            s.push(after.clone());
        }
    }

    pub fn replay(&self, source: &Module) -> Result<Module, BigStepError> {
        self.steps
            .iter()
            .try_fold(source.clone(), |m, r| apply_redex(&m, r))
    }
}

fn reduce_into(mut m: Module, trace: &mut ReductionTrace) -> Module {
    while let Some(r) = find_redexes(&m, false).into_iter().next() {
        m = apply_redex(&m, &r).expect("found redexes apply");
        trace.record(r, &m);
    }
    m
}

/// Normal form under R1, R2 and NEUT, always firing the first redex.
pub fn bigstep_nf(m: &Module) -> Module {
    reduce_into(m.clone(), &mut ReductionTrace::default())
}

pub fn bigstep_nf_traced(m: &Module, snapshots: bool) -> (Module, ReductionTrace) {
    let mut trace = if snapshots {
        ReductionTrace::with_snapshots()
    } else {
        ReductionTrace::default()
    };
    let nf = reduce_into(m.clone(), &mut trace);
    (nf, trace)
}

pub fn is_terminal_module(m: &Module) -> bool {
    matches!(m.cells(), [c] if c.is_terminal())
}

pub fn c_correct(m: &Module) -> Result<bool, BigStepError> {
    if !m.is_closed() {
        return Err(BigStepError::NotClosed);
    }
    Ok(is_terminal_module(&bigstep_nf(m)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CycleEvidence {
    /// A pole linked into its own cell: the switching choosing that port
    /// closes a cycle through the anchor.
    SelfLink { pole: PoleRef, label: Label },
    /// No rule applies and the module is not all terminal cells.
    Stuck,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcyclicityReport {
    pub acyclic: bool,
    /// Steps applied to the restriction to the empty border.
    pub trace: ReductionTrace,
    pub normal_form: Module,
    pub evidence: Option<CycleEvidence>,
}

/// Decides acyclicity of `m` on its restriction to the empty border.
pub fn acyclic_report(m: &Module) -> AcyclicityReport {
    let mut trace = ReductionTrace::default();
    let mut current = m.restrict_empty();
    loop {
        current = reduce_into(current, &mut trace);
        if let Some((pole, label)) = current.self_links().into_iter().next() {
            return AcyclicityReport {
                acyclic: false,
                trace,
                normal_form: current,
                evidence: Some(CycleEvidence::SelfLink { pole, label }),
            };
        }
        if current.cells().iter().all(Cell::is_terminal) {
            return AcyclicityReport {
                acyclic: true,
                trace,
                normal_form: current,
                evidence: None,
            };
        }
        match find_redexes(&current, true).into_iter().next() {
            Some(r) => {
                current = apply_redex(&current, &r).expect("found redexes apply");
                trace.record(r, &current);
            }
            None => {
                return AcyclicityReport {
                    acyclic: false,
                    trace,
                    normal_form: current,
                    evidence: Some(CycleEvidence::Stuck),
                }
            }
        }
    }
}

pub fn acyclic_decide(m: &Module) -> bool {
    acyclic_report(m).acyclic
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{compose_chain, Ebm};

    fn chain(xs: &[&str]) -> Module {
        let ebms: Vec<Ebm> = xs.iter().map(|s| s.parse().unwrap()).collect();
        compose_chain(&ebms).unwrap()
    }

    fn cells(m: &Module) -> Vec<String> {
        m.cells().iter().map(ToString::to_string).collect()
    }

    #[test]
    fn r1_example() {
        let m = chain(&["[a -o (b c)]", "[b c -o (k)]"]);
        let rs = find_redexes(&m, false);
        assert_eq!(
            rs,
            vec![Redex::R1 {
                pole: PoleRef {
                    cell: CellId(0),
                    pole: 0
                },
                target: CellId(1)
            }]
        );
        assert_eq!(cells(&apply_redex(&m, &rs[0]).unwrap()), ["[a -o (k)]"]);
    }

    #[test]
    fn r2_example() {
        let m = chain(&["[a -o (b)]", "[b -o (d e)]"]);
        let rs = find_redexes(&m, false);
        assert_eq!(rs.len(), 1);
        assert!(matches!(rs[0], Redex::R1 { .. }));
        assert_eq!(cells(&apply_redex(&m, &rs[0]).unwrap()), ["[a -o (d e)]"]);
        let fed_on = chain(&["[a -o (b c)]", "[b -o (d e)]", "[d -o (x)]"]);
        let r = Redex::R2 {
            source: PoleRef {
                cell: CellId(0),
                pole: 0,
            },
            absorbed: CellId(1),
        };
        assert!(find_redexes(&fed_on, false).contains(&r));
        assert_eq!(
            cells(&apply_redex(&fed_on, &r).unwrap())[0],
            "[a -o (c d e)]"
        );
    }

    #[test]
    fn r2_guard_keeps_a_strandable_cell() {
        // Choosing c in [a -o (b c)] isolates [b -o (d e)] once d and e are
        // gone, so fusing them would lose that information.
        let m = chain(&["[a -o (b c)]", "[b -o (d e)]"]);
        assert!(find_redexes(&m, false).is_empty());
        let closed = chain(&["[-o (a b)]", "[a -o ()]", "[b -o ()]"]);
        assert!(find_redexes(&closed, false).is_empty());
    }

    #[test]
    fn neut_example() {
        let m = chain(&["[a -o ()(b)]"]);
        let rs = find_redexes(&m, false);
        assert_eq!(
            rs,
            vec![Redex::Neut {
                pole: PoleRef {
                    cell: CellId(0),
                    pole: 0
                }
            }]
        );
        assert_eq!(cells(&apply_redex(&m, &rs[0]).unwrap()), ["[a -o (b)]"]);
        assert!(find_redexes(&Module::from(Ebm::terminal()), true).is_empty());
    }

    #[test]
    fn stale_redex_is_rejected() {
        let m = chain(&["[a -o (b c)]", "[b c -o (k)]"]);
        let r = find_redexes(&m, false)[0];
        let n = apply_redex(&m, &r).unwrap();
        assert_eq!(apply_redex(&n, &r), Err(BigStepError::StaleRedex(r)));
    }

    #[test]
    fn normal_forms() {
        assert!(is_terminal_module(&bigstep_nf(&chain(&[
            "[-o (a)]",
            "[a -o ()]"
        ]))));
        let (nf, trace) =
            bigstep_nf_traced(&chain(&["[-o (a)(b)]", "[a -o ()]", "[b -o ()]"]), true);
        assert!(is_terminal_module(&nf));
        assert_eq!(trace.steps.len(), 3);
        assert_eq!(trace.snapshots.as_ref().unwrap().last(), Some(&nf));
        let beta = chain(&["[b -o (d)(e f)]"]);
        assert_eq!(bigstep_nf(&beta), beta);
    }

    #[test]
    fn c_correct_examples() {
        assert_eq!(c_correct(&chain(&["[-o (a)]", "[a -o ()]"])), Ok(true));
        assert_eq!(
            c_correct(&chain(&["[-o (a b)]", "[a -o ()]", "[b -o ()]"])),
            Ok(false)
        );
        let twice = chain(&["[-o (a)]", "[a -o ()]", "[-o (a')]", "[a' -o ()]"]);
        assert_eq!(c_correct(&twice), Ok(false));
        assert_eq!(bigstep_nf(&twice).cells().len(), 2);
        assert_eq!(
            c_correct(&chain(&["[a -o ()]"])),
            Err(BigStepError::NotClosed)
        );
    }

    #[test]
    fn acyclicity_examples() {
        let beta_eps = chain(&["[b -o (d)(e f)]", "[d e -o (k)]"]);
        let report = acyclic_report(&beta_eps);
        assert!(!report.acyclic);
        assert!(matches!(
            report.evidence,
            Some(CycleEvidence::SelfLink { ref label, .. }) if label.as_str() == "e"
        ));
        assert!(acyclic_decide(&chain(&["[a -o (b c)]"])));
        let crossed = chain(&["[-o (a b)]", "[-o (c d)]", "[a c -o ()]", "[b d -o ()]"]);
        let report = acyclic_report(&crossed);
        assert!(report.acyclic);
        assert!(report
            .trace
            .steps
            .iter()
            .any(|r| matches!(r, Redex::Prune { .. })));
    }

    #[test]
    fn trace_replays_to_normal_form() {
        let m = chain(&[
            "[a -o (b c)]",
            "[b -o (d)(e f)]",
            "[f -o (i)(g h)]",
            "[c g -o (j)]",
        ]);
        let (nf, trace) = bigstep_nf_traced(&m, false);
        assert_eq!(trace.replay(&m).unwrap(), nf);
    }
}
