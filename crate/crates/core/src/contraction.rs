//! Contraction of modules into blobs, deciding connectability.
//!
//! A blob stands for an already connected substructure and behaves like a
//! positive pole. Rules, in the order they are tried:
//!
//! * merge: two blobs joined by a blob edge become one.
//! * collapse: a pole without pending ports whose linked ports all reach one
//!   blob merges with its anchor and that blob.
//! * absorb: a pole without ports disappears into its anchor.
//! * complete (completion system only): a pole whose linked blobs all carry
//!   a pending port merges with its anchor and those blobs; its own pending
//!   ports move onto the merged blob as conclusions.
//!
//! The weak system stops before completion. Its normal forms expose
//! "notcc" blobs (no pending port, no anchored pole) that no closure can
//! connect.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{Ebm, Label, Module};
use crate::switching::{SwitchPole, SwitchStructure, Switchable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractionError {
    #[error("label `{0}` would occur twice on the same side of the graph")]
    LabelClash(Label),
    #[error("graph is not in weak contraction normal form")]
    NotNormalForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlobId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PoleId(pub u32);

impl fmt::Display for BlobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

impl fmt::Display for PoleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Hypothesis,
    Conclusion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blob {
    pub id: BlobId,
    pub pending: BTreeMap<Label, Side>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CPort {
    Pending(Label),
    Linked { blob: BlobId, label: Label },
}

impl CPort {
    pub fn label(&self) -> &Label {
        match self {
            CPort::Pending(l) | CPort::Linked { label: l, .. } => l,
        }
    }

    pub fn blob(&self) -> Option<BlobId> {
        match self {
            CPort::Pending(_) => None,
            CPort::Linked { blob, .. } => Some(*blob),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CNegPole {
    pub id: PoleId,
    pub anchor: BlobId,
    pub ports: Vec<CPort>,
}

impl CNegPole {
    /// Pending ports of the pole.
    pub fn alpha(&self) -> impl Iterator<Item = &Label> {
        self.ports.iter().filter_map(|p| match p {
            CPort::Pending(l) => Some(l),
            CPort::Linked { .. } => None,
        })
    }

    /// Distinct blobs the pole is linked to.
    pub fn linked_blobs(&self) -> BTreeSet<BlobId> {
        self.ports.iter().filter_map(CPort::blob).collect()
    }
}

/// Link created when a blob's pending conclusion is consumed by a new cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlobEdge {
    pub a: BlobId,
    pub b: BlobId,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractedGraph {
    blobs: BTreeMap<BlobId, Blob>,
    poles: BTreeMap<PoleId, CNegPole>,
    edges: Vec<BlobEdge>,
    next_blob: u32,
    next_pole: u32,
    // Every label ever seen on each side, for clash detection.
    hyp_labels: BTreeSet<Label>,
    concl_labels: BTreeSet<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    /// Merge, collapse and absorb only.
    Weak,
    /// The weak rules plus completion.
    Completion,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Contraction {
    Merge(BlobEdge),
    Collapse(PoleId),
    Absorb(PoleId),
    Complete(PoleId),
}

impl fmt::Display for Contraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Contraction::Merge(e) => write!(f, "merge {} {} via {}", e.a, e.b, e.label),
            Contraction::Collapse(p) => write!(f, "collapse {p}"),
            Contraction::Absorb(p) => write!(f, "absorb {p}"),
            Contraction::Complete(p) => write!(f, "complete {p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    Cc,
    NotccWitness(Vec<BlobId>),
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphBorder {
    pub hypotheses: BTreeSet<Label>,
    pub conclusions: BTreeSet<Label>,
}

/// One blob per cell, one pole per negative pole.
pub fn embed(m: &Module) -> ContractedGraph {
    let mut g = ContractedGraph::empty();
    for cell in m.cells() {
        let id = BlobId(cell.id.0);
        g.blobs.insert(
            id,
            Blob {
                id,
                pending: cell
                    .hypotheses
                    .iter()
                    .filter(|h| m.conclusion_owner(h).is_none())
                    .map(|h| (h.clone(), Side::Hypothesis))
                    .collect(),
            },
        );
        g.hyp_labels.extend(cell.hypotheses.iter().cloned());
        g.concl_labels.extend(cell.conclusions().cloned());
        g.next_blob = g.next_blob.max(cell.id.0 + 1);
    }
    for cell in m.cells() {
        for pole in &cell.poles {
            let ports = pole
                .conclusions
                .iter()
                .map(|c| match m.hypothesis_owner(c) {
                    Some(owner) => CPort::Linked {
                        blob: BlobId(owner.0),
                        label: c.clone(),
                    },
                    None => CPort::Pending(c.clone()),
                })
                .collect();
            g.add_pole(BlobId(cell.id.0), ports);
        }
    }
    g
}

impl ContractedGraph {
    fn empty() -> Self {
        ContractedGraph {
            blobs: BTreeMap::new(),
            poles: BTreeMap::new(),
            edges: Vec::new(),
            next_blob: 0,
            next_pole: 0,
            hyp_labels: BTreeSet::new(),
            concl_labels: BTreeSet::new(),
        }
    }

    fn add_pole(&mut self, anchor: BlobId, ports: Vec<CPort>) {
        let id = PoleId(self.next_pole);
        self.next_pole += 1;
        self.poles.insert(id, CNegPole { id, anchor, ports });
    }

    pub fn blobs(&self) -> impl Iterator<Item = &Blob> {
        self.blobs.values()
    }

    pub fn poles(&self) -> impl Iterator<Item = &CNegPole> {
        self.poles.values()
    }

    pub fn edges(&self) -> &[BlobEdge] {
        &self.edges
    }

    pub fn blob(&self, id: BlobId) -> Option<&Blob> {
        self.blobs.get(&id)
    }

    pub fn pole(&self, id: PoleId) -> Option<&CNegPole> {
        self.poles.get(&id)
    }

    pub fn blob_count(&self) -> usize {
        self.blobs.len()
    }

    pub fn pole_count(&self) -> usize {
        self.poles.len()
    }

    pub fn border(&self) -> GraphBorder {
        let mut border = GraphBorder {
            hypotheses: BTreeSet::new(),
            conclusions: BTreeSet::new(),
        };
        for blob in self.blobs.values() {
            for (label, side) in &blob.pending {
                match side {
                    Side::Hypothesis => border.hypotheses.insert(label.clone()),
                    Side::Conclusion => border.conclusions.insert(label.clone()),
                };
            }
        }
        for pole in self.poles.values() {
            border.conclusions.extend(pole.alpha().cloned());
        }
        border
    }

    /// Poles anchored on `blob`, ignoring those linked back into it: such a
    /// pole can always be switched into the blob itself.
    fn anchors_outward(&self, blob: BlobId) -> bool {
        self.poles
            .values()
            .any(|p| p.anchor == blob && !p.linked_blobs().contains(&blob))
    }

    /// Blobs with no pending port and no outward anchored pole, in a graph
    /// with at least two nodes.
    pub fn notcc_witness(&self) -> Vec<BlobId> {
        if self.blobs.len() + self.poles.len() < 2 {
            return Vec::new();
        }
        self.blobs
            .values()
            .filter(|b| b.pending.is_empty() && !self.anchors_outward(b.id))
            .map(|b| b.id)
            .collect()
    }

    /// Merges `others` into `keep`, retargeting anchors, ports and edges.
    /// Edges turned into loops disappear.
    fn merge_into(&mut self, keep: BlobId, others: &BTreeSet<BlobId>) {
        for &o in others {
            if o == keep {
                continue;
            }
            let gone = self.blobs.remove(&o).expect("merged blob exists");
            self.blobs
                .get_mut(&keep)
                .expect("kept blob exists")
                .pending
                .extend(gone.pending);
        }
        let retarget = |b: &mut BlobId| {
            if others.contains(b) {
                *b = keep;
            }
        };
        for pole in self.poles.values_mut() {
            retarget(&mut pole.anchor);
            for port in &mut pole.ports {
                if let CPort::Linked { blob, .. } = port {
                    retarget(blob);
                }
            }
        }
        for e in &mut self.edges {
            retarget(&mut e.a);
            retarget(&mut e.b);
        }
        self.edges.retain(|e| e.a != e.b);
    }

    fn redex_for_pole(&self, pole: &CNegPole, system: System) -> Vec<Contraction> {
        let mut out = Vec::new();
        if pole.ports.is_empty() {
            out.push(Contraction::Absorb(pole.id));
            return out;
        }
        let linked = pole.linked_blobs();
        if pole.alpha().next().is_none() && linked.len() == 1 {
            out.push(Contraction::Collapse(pole.id));
        }
        if system == System::Completion && linked.iter().all(|b| !self.blobs[b].pending.is_empty())
        {
            out.push(Contraction::Complete(pole.id));
        }
        out
    }

    /// Every applicable contraction, in rule order.
    pub fn redexes(&self, system: System) -> Vec<Contraction> {
        let mut out: Vec<Contraction> =
            self.edges.iter().cloned().map(Contraction::Merge).collect();
        let per_pole: Vec<Vec<Contraction>> = self
            .poles
            .values()
            .map(|p| self.redex_for_pole(p, system))
            .collect();
        let (completions, weak): (Vec<_>, Vec<_>) = per_pole
            .into_iter()
            .flatten()
            .partition(|c| matches!(c, Contraction::Complete(_)));
        out.extend(weak);
        out.extend(completions);
        out
    }

    pub fn apply(&self, c: &Contraction, system: System) -> Option<ContractedGraph> {
        if !self.redexes(system).contains(c) {
            return None;
        }
        let mut g = self.clone();
        match c {
            Contraction::Merge(edge) => {
                let keep = edge.a.min(edge.b);
                g.merge_into(keep, &BTreeSet::from([edge.a, edge.b]));
            }
            Contraction::Absorb(p) => {
                g.poles.remove(p);
            }
            Contraction::Collapse(p) | Contraction::Complete(p) => {
                let pole = g.poles.remove(p).expect("checked redex");
                let mut group = pole.linked_blobs();
                group.insert(pole.anchor);
                let keep = *group.iter().next().expect("group holds the anchor");
                g.merge_into(keep, &group);
                let blob = g.blobs.get_mut(&keep).expect("kept blob exists");
                for label in pole.alpha() {
                    blob.pending.insert(label.clone(), Side::Conclusion);
                }
            }
        }
        Some(g)
    }

    /// Every one-step result, paired with the contraction producing it.
    pub fn successors(&self, system: System) -> Vec<(Contraction, ContractedGraph)> {
        self.redexes(system)
            .into_iter()
            .map(|c| {
                let g = self.apply(&c, system).expect("listed redexes apply");
                (c, g)
            })
            .collect()
    }

    pub fn classify(&self) -> Result<Classification, ContractionError> {
        if !self.redexes(System::Weak).is_empty() {
            return Err(ContractionError::NotNormalForm);
        }
        if self.poles.is_empty()
            && (self.blobs.len() == 1 || self.blobs.values().all(|b| !b.pending.is_empty()))
        {
            return Ok(Classification::Cc);
        }
        let witness = self.notcc_witness();
        if witness.is_empty() {
            Ok(Classification::Incomplete)
        } else {
            Ok(Classification::NotccWitness(witness))
        }
    }

    /// Checks the shape of a weak normal form: no blob edges, and every
    /// pole either has a pending port or reaches at least two blobs.
    pub fn check_observations(&self) -> Result<(), String> {
        if let Some(e) = self.edges.first() {
            return Err(format!("blob edge {} between {} and {}", e.label, e.a, e.b));
        }
        for p in self.poles.values() {
            let alpha = p.alpha().count();
            let linked = p.linked_blobs().len();
            if linked == 0 && alpha == 0 {
                return Err(format!("pole {} has neither links nor pending ports", p.id));
            }
            if linked == 1 && alpha == 0 {
                return Err(format!("pole {} reaches a single blob only", p.id));
            }
            if linked > 0 && p.ports.len() < 2 {
                return Err(format!(
                    "pole {} feeds a blob with no other conclusion",
                    p.id
                ));
            }
        }
        Ok(())
    }

    /// Id-free form: blobs are described by their pending ports and by the
    /// labels of every port and edge touching them.
    pub fn canonical(&self) -> CanonicalGraph {
        let blob_key = |id: BlobId| -> CanonicalBlob {
            let blob = &self.blobs[&id];
            let mut incoming: Vec<Label> = self
                .poles
                .values()
                .flat_map(|p| p.ports.iter())
                .filter(|port| port.blob() == Some(id))
                .map(|port| port.label().clone())
                .collect();
            incoming.sort();
            let mut anchored: Vec<Label> = self
                .poles
                .values()
                .filter(|p| p.anchor == id)
                .flat_map(|p| p.ports.iter().map(|port| port.label().clone()))
                .collect();
            anchored.sort();
            let mut edges: Vec<Label> = self
                .edges
                .iter()
                .filter(|e| e.a == id || e.b == id)
                .map(|e| e.label.clone())
                .collect();
            edges.sort();
            CanonicalBlob {
                pending: blob.pending.iter().map(|(l, s)| (l.clone(), *s)).collect(),
                incoming,
                anchored,
                edges,
            }
        };
        let mut blobs: Vec<CanonicalBlob> = self.blobs.keys().map(|&b| blob_key(b)).collect();
        blobs.sort();
        let mut poles: Vec<CanonicalPole> = self
            .poles
            .values()
            .map(|p| {
                let mut ports: Vec<(Label, bool)> = p
                    .ports
                    .iter()
                    .map(|port| (port.label().clone(), port.blob().is_some()))
                    .collect();
                ports.sort();
                CanonicalPole {
                    anchor: blob_key(p.anchor),
                    ports,
                }
            })
            .collect();
        poles.sort();
        CanonicalGraph { blobs, poles }
    }

    /// Links `e` to the graph: its hypotheses consume pending conclusions
    /// (of poles, or of blobs through a blob edge), its conclusions consume
    /// pending hypotheses of blobs.
    pub fn compose(&self, e: &Ebm) -> Result<ContractedGraph, ContractionError> {
        for h in e.hypotheses() {
            if self.hyp_labels.contains(h) {
                return Err(ContractionError::LabelClash(h.clone()));
            }
        }
        for c in e.conclusions() {
            if self.concl_labels.contains(c) {
                return Err(ContractionError::LabelClash(c.clone()));
            }
        }
        let mut g = self.clone();
        let new = BlobId(g.next_blob);
        g.next_blob += 1;
        let mut pending = BTreeMap::new();
        for h in e.hypotheses() {
            let mut consumed = false;
            for pole in g.poles.values_mut() {
                for port in &mut pole.ports {
                    if matches!(port, CPort::Pending(l) if l == h) {
                        *port = CPort::Linked {
                            blob: new,
                            label: h.clone(),
                        };
                        consumed = true;
                    }
                }
            }
            for blob in g.blobs.values_mut() {
                if blob.pending.get(h) == Some(&Side::Conclusion) {
                    blob.pending.remove(h);
                    g.edges.push(BlobEdge {
                        a: blob.id,
                        b: new,
                        label: h.clone(),
                    });
                    consumed = true;
                }
            }
            if !consumed {
                pending.insert(h.clone(), Side::Hypothesis);
            }
        }
        g.blobs.insert(new, Blob { id: new, pending });
        for pole in e.poles() {
            let mut ports = Vec::new();
            for c in &pole.conclusions {
                let owner = g
                    .blobs
                    .values()
                    .find(|b| b.id != new && b.pending.get(c) == Some(&Side::Hypothesis))
                    .map(|b| b.id);
                ports.push(match owner {
                    Some(b) => {
                        g.blobs.get_mut(&b).expect("owner exists").pending.remove(c);
                        CPort::Linked {
                            blob: b,
                            label: c.clone(),
                        }
                    }
                    None => CPort::Pending(c.clone()),
                });
            }
            g.add_pole(new, ports);
        }
        g.hyp_labels.extend(e.hypotheses().iter().cloned());
        g.concl_labels.extend(e.conclusions().cloned());
        Ok(g)
    }

    /// All labels of the graph: pending ports, port labels and edge labels.
    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out: BTreeSet<Label> = self
            .blobs
            .values()
            .flat_map(|b| b.pending.keys().cloned())
            .collect();
        out.extend(
            self.poles
                .values()
                .flat_map(|p| p.ports.iter().map(|x| x.label().clone())),
        );
        out.extend(self.edges.iter().map(|e| e.label.clone()));
        out
    }
}

/// One line per blob, pole and edge:
/// `blob b0 in:a out:b`, `pole p0 @b0 -> b1:x y`, `edge b0 b1 z`.
impl fmt::Display for ContractedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for blob in self.blobs.values() {
            write!(f, "blob {}", blob.id)?;
            for (label, side) in &blob.pending {
                match side {
                    Side::Hypothesis => write!(f, " in:{label}")?,
                    Side::Conclusion => write!(f, " out:{label}")?,
                }
            }
            writeln!(f)?;
        }
        for pole in self.poles.values() {
            write!(f, "pole {} @{} ->", pole.id, pole.anchor)?;
            for port in &pole.ports {
                match port {
                    CPort::Pending(l) => write!(f, " {l}")?,
                    CPort::Linked { blob, label } => write!(f, " {blob}:{label}")?,
                }
            }
            writeln!(f)?;
        }
        for e in &self.edges {
            writeln!(f, "edge {} {} {}", e.a, e.b, e.label)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonicalBlob {
    pub pending: Vec<(Label, Side)>,
    pub incoming: Vec<Label>,
    pub anchored: Vec<Label>,
    pub edges: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonicalPole {
    pub anchor: CanonicalBlob,
    pub ports: Vec<(Label, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonicalGraph {
    pub blobs: Vec<CanonicalBlob>,
    pub poles: Vec<CanonicalPole>,
}

impl Switchable for ContractedGraph {
    fn switch_structure(&self) -> SwitchStructure {
        let index: BTreeMap<BlobId, usize> = self
            .blobs
            .keys()
            .enumerate()
            .map(|(i, &b)| (b, i))
            .collect();
        let mut s = SwitchStructure {
            positives: self.blobs.len(),
            ..SwitchStructure::default()
        };
        for (i, blob) in self.blobs.values().enumerate() {
            for side in blob.pending.values() {
                match side {
                    Side::Hypothesis => s.pending_hypotheses.push(i),
                    Side::Conclusion => s.pending_conclusions.push(i),
                }
            }
        }
        s.fixed = self
            .edges
            .iter()
            .map(|e| (index[&e.a], index[&e.b]))
            .collect();
        s.poles = self
            .poles
            .values()
            .map(|p| SwitchPole {
                anchor: index[&p.anchor],
                ports: p
                    .ports
                    .iter()
                    .map(|port| port.blob().map(|b| index[&b]))
                    .collect(),
            })
            .collect();
        s
    }
}

pub fn contract_step(g: &ContractedGraph, system: System) -> Option<ContractedGraph> {
    let first = g.redexes(system).into_iter().next()?;
    g.apply(&first, system)
}

pub fn contract_nf(g: &ContractedGraph, system: System) -> ContractedGraph {
    let mut current = g.clone();
    while let Some(next) = contract_step(&current, system) {
        current = next;
    }
    current
}

pub fn compose_cg(g: &ContractedGraph, e: &Ebm) -> Result<ContractedGraph, ContractionError> {
    g.compose(e)
}

/// Connectability of an already contracted graph. The weak system rejects
/// on a notcc witness and otherwise completes its normal form: isolated
/// cycles of pendingless blobs carry no single-blob witness.
pub fn graph_connectable(g: &ContractedGraph, system: System) -> bool {
    let nf = contract_nf(g, system);
    if system == System::Weak && !nf.notcc_witness().is_empty() {
        return false;
    }
    let complete = contract_nf(&nf, System::Completion);
    complete.classify() == Ok(Classification::Cc)
}

pub fn connectable_decide(m: &Module, system: System) -> bool {
    graph_connectable(&embed(m), system)
}
