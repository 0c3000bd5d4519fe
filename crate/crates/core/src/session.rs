//! Incremental composition of an o-correct module.
//!
//! A session keeps the module together with its big-step normal form `f` and
//! its weak contraction normal form `g`. A proposed EBM is tested against
//! `f` and `g` only: `f∘E` reduced and restricted decides acyclicity, `g∘E`
//! weakly contracted decides connectability.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::RwLock;

use thiserror::Error;

use crate::bigstep::{acyclic_decide, acyclic_report, bigstep_nf, AcyclicityReport, CycleEvidence};
use crate::contraction::{
    contract_nf, embed, graph_connectable, BlobId, CPort, ContractedGraph, ContractionError, System,
};
use crate::model::{Ebm, Label, ModelError, Module};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("module is not o-correct")]
    NotOCorrect,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
    #[error("proposal was made against generation {proposed}, session is at {current}")]
    StaleCandidate { proposed: u64, current: u64 },
    #[error("only accepted proposals can be committed")]
    NotAccepted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    RejectCyclic(AcyclicityReport),
    /// Blobs no closure can connect. Empty when the weak normal form has no
    /// witness but still fails to complete.
    RejectDisconnectable(Vec<BlobId>),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            Verdict::Accept => "accept",
            Verdict::RejectCyclic(_) => "reject-cyclic",
            Verdict::RejectDisconnectable(_) => "reject-disconnectable",
        }
    }
}

impl fmt::Display for Verdict {
    /// The single-line record `VERDICT <keyword> <details>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VERDICT {}", self.keyword())?;
        match self {
            Verdict::Accept => Ok(()),
            Verdict::RejectCyclic(report) => {
                let n = report.trace.steps.len();
                let steps = if n == 1 { "step" } else { "steps" };
                match &report.evidence {
                    Some(CycleEvidence::SelfLink { pole, label }) => {
                        write!(f, " self-link {label} on pole {pole} after {n} {steps}")
                    }
                    _ => write!(f, " stuck after {n} {steps}"),
                }
            }
            Verdict::RejectDisconnectable(blobs) if blobs.is_empty() => {
                f.write_str(" no connected completion")
            }
            Verdict::RejectDisconnectable(blobs) => {
                f.write_str(" notcc")?;
                for b in blobs {
                    write!(f, " {b}")?;
                }
                Ok(())
            }
        }
    }
}

/// Outcome of [`Session::propose`], with the candidate pair to commit.
#[derive(Debug, Clone)]
pub struct Proposal {
    pub ebm: Ebm,
    pub verdict: Verdict,
    pub module: Module,
    pub f: Module,
    pub g: ContractedGraph,
    pub generation: u64,
}

#[derive(Debug, Clone)]
pub struct Session {
    module: Module,
    f: Module,
    g: ContractedGraph,
    generation: u64,
}

impl Session {
    pub fn new(module: Module) -> Result<Self, SessionError> {
        let g = contract_nf(&embed(&module), System::Weak);
        if !acyclic_decide(&module) || !graph_connectable(&g, System::Weak) {
            return Err(SessionError::NotOCorrect);
        }
        Ok(Session {
            f: bigstep_nf(&module),
            g,
            module,
            generation: 0,
        })
    }

    pub fn module(&self) -> &Module {
        &self.module
    }

    pub fn f(&self) -> &Module {
        &self.f
    }

    pub fn g(&self) -> &ContractedGraph {
        &self.g
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn propose(&self, e: &Ebm) -> Result<Proposal, SessionError> {
        let module = self.module.compose(e)?;
        let f = bigstep_nf(&self.f.compose(e)?);
        let g = contract_nf(&self.g.compose(e)?, System::Weak);
        let witness = g.notcc_witness();
        let verdict = if !witness.is_empty() {
            Verdict::RejectDisconnectable(witness)
        } else if !graph_connectable(&g, System::Weak) {
            Verdict::RejectDisconnectable(Vec::new())
        } else {
            let report = acyclic_report(&f);
            if report.acyclic {
                Verdict::Accept
            } else {
                Verdict::RejectCyclic(report)
            }
        };
        Ok(Proposal {
            ebm: e.clone(),
            verdict,
            module,
            f,
            g,
            generation: self.generation,
        })
    }

    pub fn commit(&self, proposal: Proposal) -> Result<Session, SessionError> {
        if proposal.generation != self.generation {
            return Err(SessionError::StaleCandidate {
                proposed: proposal.generation,
                current: self.generation,
            });
        }
        if !proposal.verdict.is_accept() {
            return Err(SessionError::NotAccepted);
        }
        Ok(Session {
            module: proposal.module,
            f: proposal.f,
            g: proposal.g,
            generation: self.generation + 1,
        })
    }

    /// Labels a proposal of `e` may read: the interface with the module plus
    /// every label of the parts of `f` and `g` linked to it. Empty when `e`
    /// shares no pending label with the module.
    pub fn footprint(&self, e: &Ebm) -> BTreeSet<Label> {
        let interface = self.module.interface(e);
        if interface.is_empty() {
            return interface;
        }
        let mut out = interface.clone();
        out.extend(module_component_labels(&self.f, &interface));
        out.extend(graph_component_labels(&self.g, &interface));
        out
    }
}

/// Labels of the cells of `m` in link-connected components that carry one of
/// `seeds`.
fn module_component_labels(m: &Module, seeds: &BTreeSet<Label>) -> BTreeSet<Label> {
    let cells = m.cells();
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    let index = |id| cells.iter().position(|c| c.id == id).expect("cell exists");
    for link in m.links() {
        union(&mut parent, index(link.from.cell), index(link.to));
    }
    let cell_labels = |i: usize| -> BTreeSet<Label> {
        cells[i]
            .hypotheses
            .iter()
            .chain(cells[i].conclusions())
            .cloned()
            .collect()
    };
    let roots: BTreeSet<usize> = (0..cells.len())
        .filter(|&i| !cell_labels(i).is_disjoint(seeds))
        .map(|i| find(&mut parent, i))
        .collect();
    (0..cells.len())
        .filter(|&i| roots.contains(&find(&mut parent, i)))
        .flat_map(cell_labels)
        .collect()
}

/// Same for the blobs and poles of `g`, joined through anchors, ports and
/// blob edges.
fn graph_component_labels(g: &ContractedGraph, seeds: &BTreeSet<Label>) -> BTreeSet<Label> {
    let blobs: Vec<BlobId> = g.blobs().map(|b| b.id).collect();
    let index = |id: BlobId| blobs.binary_search(&id).expect("blob exists");
    let mut parent: Vec<usize> = (0..blobs.len()).collect();
    for pole in g.poles() {
        for b in pole.linked_blobs() {
            union(&mut parent, index(pole.anchor), index(b));
        }
    }
    for e in g.edges() {
        union(&mut parent, index(e.a), index(e.b));
    }
    let mut labels: Vec<BTreeSet<Label>> = g
        .blobs()
        .map(|b| b.pending.keys().cloned().collect())
        .collect();
    for pole in g.poles() {
        let at = index(pole.anchor);
        labels[at].extend(pole.ports.iter().map(|p| p.label().clone()));
        for port in &pole.ports {
            if let CPort::Linked { blob, label } = port {
                labels[index(*blob)].insert(label.clone());
            }
        }
    }
    for e in g.edges() {
        labels[index(e.a)].insert(e.label.clone());
    }
    let roots: BTreeSet<usize> = (0..blobs.len())
        .filter(|&i| !labels[i].is_disjoint(seeds))
        .map(|i| find(&mut parent, i))
        .collect();
    (0..blobs.len())
        .filter(|&i| roots.contains(&find(&mut parent, i)))
        .flat_map(|i| labels[i].clone())
        .collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    parent[ra] = rb;
}

/// A session shared between threads: proposals take a read lock, commits a
/// write lock and fail if another commit got there first.
#[derive(Debug)]
pub struct SharedSession {
    inner: RwLock<Session>,
}

impl SharedSession {
    pub fn new(session: Session) -> Self {
        SharedSession {
            inner: RwLock::new(session),
        }
    }

    pub fn propose(&self, e: &Ebm) -> Result<Proposal, SessionError> {
        self.inner.read().expect("session lock poisoned").propose(e)
    }

    pub fn commit(&self, proposal: Proposal) -> Result<u64, SessionError> {
        let mut guard = self.inner.write().expect("session lock poisoned");
        let next = guard.commit(proposal)?;
        *guard = next;
        Ok(guard.generation)
    }

    pub fn snapshot(&self) -> Session {
        self.inner.read().expect("session lock poisoned").clone()
    }
}
