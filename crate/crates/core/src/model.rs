//! Elementary bipolar modules, composed modules, borders and restriction.
//!
//! A module is a set of cells. Each cell has one positive pole carrying the
//! hypothesis ports and one or more negative poles carrying conclusion
//! ports. Ports are identified by their label: a label that occurs once as a
//! conclusion and once as a hypothesis is a link, a label that occurs only
//! once is pending and belongs to the border.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid label {0:?}: expected [A-Za-z][A-Za-z0-9_']*")]
    InvalidLabel(String),
    #[error("label `{0}` occurs twice in one elementary module")]
    DuplicateLabel(Label),
    #[error("an elementary module needs at least one negative pole")]
    NoPoles,
    #[error("label `{0}` would occur twice on the same side of the module")]
    LabelClash(Label),
    #[error("label `{0}` is not a pending port of the module")]
    NotPending(Label),
    #[error("label `{0}` links a pole to its own cell")]
    SelfLink(Label),
    #[error("cell {0} appears twice")]
    DuplicateCell(CellId),
    #[error("cannot compose an empty chain")]
    EmptyChain,
    #[error("malformed module notation: {0}")]
    Notation(String),
}

/// Propositional variable naming a port.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(name: impl AsRef<str>) -> Result<Self, ModelError> {
        let name = name.as_ref();
        if is_identifier(name) {
            Ok(Label(Arc::from(name)))
        } else {
            Err(ModelError::InvalidLabel(name.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Label {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::new(s)
    }
}

/// Negative pole: a Par over its conclusion ports. No conclusion means ⊥.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Pole {
    pub conclusions: Vec<Label>,
}

impl Pole {
    pub fn new(conclusions: Vec<Label>) -> Self {
        Pole { conclusions }
    }

    pub fn is_empty(&self) -> bool {
        self.conclusions.is_empty()
    }
}

/// Elementary bipolar module: `(⊗ h_i) ⊸ ⅋_k (⊗ c_k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ebm {
    hypotheses: Vec<Label>,
    poles: Vec<Pole>,
}

impl Ebm {
    pub fn new(hypotheses: Vec<Label>, poles: Vec<Vec<Label>>) -> Result<Self, ModelError> {
        if poles.is_empty() {
            return Err(ModelError::NoPoles);
        }
        let mut seen = BTreeSet::new();
        for label in hypotheses.iter().chain(poles.iter().flatten()) {
            if !seen.insert(label) {
                return Err(ModelError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Ebm {
            hypotheses,
            poles: poles.into_iter().map(Pole::new).collect(),
        })
    }

    /// The terminal module `1 ⊸ ⊥`.
    pub fn terminal() -> Self {
        Ebm {
            hypotheses: Vec::new(),
            poles: vec![Pole::default()],
        }
    }

    /// `[-o (x)]`
    pub fn initial(label: Label) -> Self {
        Ebm {
            hypotheses: Vec::new(),
            poles: vec![Pole::new(vec![label])],
        }
    }

    /// `[x -o ()]`
    pub fn final_of(label: Label) -> Self {
        Ebm {
            hypotheses: vec![label],
            poles: vec![Pole::default()],
        }
    }

    pub fn hypotheses(&self) -> &[Label] {
        &self.hypotheses
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn conclusions(&self) -> impl Iterator<Item = &Label> {
        self.poles.iter().flat_map(|p| p.conclusions.iter())
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.hypotheses.iter().chain(self.conclusions())
    }

    pub fn is_initial(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn is_final(&self) -> bool {
        self.poles.iter().all(Pole::is_empty)
    }

    pub fn type_formula(&self) -> String {
        cell_type(&self.hypotheses, &self.poles)
    }
}

impl fmt::Display for Ebm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bracket(f, &self.hypotheses, &self.poles)
    }
}

/// Parses the bracket notation `[h1 h2 -o (c1 c2)(c3)]`.
impl FromStr for Ebm {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::Notation(s.to_owned());
        let body = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        let (hyps, rest) = body.split_once("-o").ok_or_else(bad)?;
        let hypotheses = hyps
            .split_whitespace()
            .map(Label::new)
            .collect::<Result<Vec<_>, _>>()?;
        let mut poles = Vec::new();
        let mut rest = rest.trim();
        while !rest.is_empty() {
            let inner = rest.strip_prefix('(').ok_or_else(bad)?;
            let (pole, tail) = inner.split_once(')').ok_or_else(bad)?;
            poles.push(
                pole.split_whitespace()
                    .map(Label::new)
                    .collect::<Result<Vec<_>, _>>()?,
            );
            rest = tail.trim_start();
        }
        Ebm::new(hypotheses, poles)
    }
}

fn write_bracket(f: &mut fmt::Formatter<'_>, hyps: &[Label], poles: &[Pole]) -> fmt::Result {
    f.write_str("[")?;
    for h in hyps {
        write!(f, "{h} ")?;
    }
    f.write_str("-o ")?;
    for pole in poles {
        f.write_str("(")?;
        for (i, c) in pole.conclusions.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")?;
    }
    f.write_str("]")
}

fn cell_type(hyps: &[Label], poles: &[Pole]) -> String {
    let antecedent = if hyps.is_empty() {
        "1".to_owned()
    } else {
        join(hyps, "*")
    };
    let consequent = poles
        .iter()
        .map(|p| {
            if p.is_empty() {
                "bot".to_owned()
            } else {
                format!("({})", join(&p.conclusions, "*"))
            }
        })
        .collect::<Vec<_>>()
        .join(" | ");
    format!("{antecedent} -o ({consequent})")
}

fn join(labels: &[Label], sep: &str) -> String {
    labels
        .iter()
        .map(Label::as_str)
        .collect::<Vec<_>>()
        .join(sep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(pub u32);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A negative pole inside a module, addressed by its cell and index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PoleRef {
    pub cell: CellId,
    pub pole: usize,
}

impl fmt::Display for PoleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.cell, self.pole)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub id: CellId,
    pub hypotheses: Vec<Label>,
    pub poles: Vec<Pole>,
}

impl Cell {
    pub fn type_formula(&self) -> String {
        cell_type(&self.hypotheses, &self.poles)
    }

    pub fn conclusions(&self) -> impl Iterator<Item = &Label> {
        self.poles.iter().flat_map(|p| p.conclusions.iter())
    }

    pub fn is_terminal(&self) -> bool {
        self.hypotheses.is_empty() && self.poles.len() == 1 && self.poles[0].is_empty()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bracket(f, &self.hypotheses, &self.poles)
    }
}

/// A link: the conclusion port of `from` carries the same label as a
/// hypothesis port of cell `to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub label: Label,
    pub from: PoleRef,
    pub to: CellId,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Border {
    pub hypotheses: BTreeSet<Label>,
    pub conclusions: BTreeSet<Label>,
}

impl Border {
    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty() && self.conclusions.is_empty()
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        self.hypotheses.union(&self.conclusions).cloned().collect()
    }
}

/// Whether a module may carry links from a pole into its own cell. Only
/// rewriting produces those.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfLinks {
    Forbid,
    Allow,
}

/// Bipolar module. Immutable; every constructor checks the label discipline.
#[derive(Clone)]
pub struct Module {
    cells: Vec<Cell>,
    hyp_owner: BTreeMap<Label, CellId>,
    concl_owner: BTreeMap<Label, PoleRef>,
}

impl PartialEq for Module {
    fn eq(&self, other: &Self) -> bool {
        self.cells == other.cells
    }
}

impl Eq for Module {}

impl fmt::Debug for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Module(")?;
        for (i, cell) in self.cells.iter().enumerate() {
            if i > 0 {
                f.write_str(" . ")?;
            }
            write!(f, "{}{}", cell.id, cell)?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, cell) in self.cells.iter().enumerate() {
            if i > 0 {
                f.write_str(" . ")?;
            }
            write!(f, "{cell}")?;
        }
        Ok(())
    }
}

impl From<&Ebm> for Module {
    fn from(ebm: &Ebm) -> Self {
        Module::from_ebm(ebm)
    }
}

impl From<Ebm> for Module {
    fn from(ebm: Ebm) -> Self {
        Module::from_ebm(&ebm)
    }
}

impl Module {
    pub fn from_ebm(ebm: &Ebm) -> Self {
        Module::from_cells(
            vec![Cell {
                id: CellId(0),
                hypotheses: ebm.hypotheses.clone(),
                poles: ebm.poles.clone(),
            }],
            SelfLinks::Forbid,
        )
        .expect("an elementary module has distinct labels")
    }

    /// Builds a module from raw cells, enforcing the label discipline.
    pub fn from_cells(mut cells: Vec<Cell>, self_links: SelfLinks) -> Result<Self, ModelError> {
        cells.sort_by_key(|c| c.id);
        let mut hyp_owner = BTreeMap::new();
        let mut concl_owner = BTreeMap::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 && cells[i - 1].id == cell.id {
                return Err(ModelError::DuplicateCell(cell.id));
            }
            if cell.poles.is_empty() {
                return Err(ModelError::NoPoles);
            }
            for h in &cell.hypotheses {
                if hyp_owner.insert(h.clone(), cell.id).is_some() {
                    return Err(ModelError::LabelClash(h.clone()));
                }
            }
            for (k, pole) in cell.poles.iter().enumerate() {
                for c in &pole.conclusions {
                    let at = PoleRef {
                        cell: cell.id,
                        pole: k,
                    };
                    if concl_owner.insert(c.clone(), at).is_some() {
                        return Err(ModelError::LabelClash(c.clone()));
                    }
                }
            }
        }
        if self_links == SelfLinks::Forbid {
            for (label, at) in &concl_owner {
                if hyp_owner.get(label) == Some(&at.cell) {
                    return Err(ModelError::SelfLink(label.clone()));
                }
            }
        }
        Ok(Module {
            cells,
            hyp_owner,
            concl_owner,
        })
    }

    /// Rebuilds the label indices of engine-produced cells.
    pub(crate) fn assemble(cells: Vec<Cell>) -> Self {
        Module::from_cells(cells, SelfLinks::Allow)
            .expect("rewriting preserves the label discipline")
    }

    /// Re-checks every module invariant.
    pub fn validate(&self, self_links: SelfLinks) -> Result<(), ModelError> {
        Module::from_cells(self.cells.clone(), self_links).map(|_| ())
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<Cell> {
        self.cells
    }

    pub fn cell(&self, id: CellId) -> Option<&Cell> {
        self.cells
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(|i| &self.cells[i])
    }

    pub fn pole(&self, at: PoleRef) -> Option<&Pole> {
        self.cell(at.cell).and_then(|c| c.poles.get(at.pole))
    }

    pub fn pole_refs(&self) -> impl Iterator<Item = PoleRef> + '_ {
        self.cells.iter().flat_map(|c| {
            (0..c.poles.len()).map(move |k| PoleRef {
                cell: c.id,
                pole: k,
            })
        })
    }

    pub fn pole_count(&self) -> usize {
        self.cells.iter().map(|c| c.poles.len()).sum()
    }

    /// Cell whose positive pole carries `label` as a hypothesis.
    pub fn hypothesis_owner(&self, label: &Label) -> Option<CellId> {
        self.hyp_owner.get(label).copied()
    }

    /// Negative pole carrying `label` as a conclusion.
    pub fn conclusion_owner(&self, label: &Label) -> Option<PoleRef> {
        self.concl_owner.get(label).copied()
    }

    pub fn is_linked(&self, label: &Label) -> bool {
        self.hyp_owner.contains_key(label) && self.concl_owner.contains_key(label)
    }

    pub fn links(&self) -> Vec<Link> {
        self.concl_owner
            .iter()
            .filter_map(|(label, &from)| {
                self.hyp_owner.get(label).map(|&to| Link {
                    label: label.clone(),
                    from,
                    to,
                })
            })
            .collect()
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        self.hyp_owner
            .keys()
            .chain(self.concl_owner.keys())
            .cloned()
            .collect()
    }

    pub fn border(&self) -> Border {
        Border {
            hypotheses: self
                .hyp_owner
                .keys()
                .filter(|l| !self.concl_owner.contains_key(*l))
                .cloned()
                .collect(),
            conclusions: self
                .concl_owner
                .keys()
                .filter(|l| !self.hyp_owner.contains_key(*l))
                .cloned()
                .collect(),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.border().is_empty()
    }

    /// Labels linking a pole to its own cell.
    pub fn self_links(&self) -> Vec<(PoleRef, Label)> {
        self.concl_owner
            .iter()
            .filter(|(label, at)| self.hyp_owner.get(*label) == Some(&at.cell))
            .map(|(label, &at)| (at, label.clone()))
            .collect()
    }

    pub fn type_formula(&self) -> String {
        match self.cells.as_slice() {
            [single] => single.type_formula(),
            cells => cells
                .iter()
                .map(|c| format!("({})", c.type_formula()))
                .collect::<Vec<_>>()
                .join(" * "),
        }
    }

    fn next_cell_id(&self) -> CellId {
        CellId(self.cells.last().map_or(0, |c| c.id.0 + 1))
    }

    /// Links `ebm` to this module through every label the two share: pending
    /// conclusions of `self` feeding hypotheses of `ebm`, and conclusions of
    /// `ebm` feeding pending hypotheses of `self`.
    pub fn compose(&self, ebm: &Ebm) -> Result<Module, ModelError> {
        for h in &ebm.hypotheses {
            if self.hyp_owner.contains_key(h) {
                return Err(ModelError::LabelClash(h.clone()));
            }
        }
        for c in ebm.conclusions() {
            if self.concl_owner.contains_key(c) {
                return Err(ModelError::LabelClash(c.clone()));
            }
        }
        let mut cells = self.cells.clone();
        cells.push(Cell {
            id: self.next_cell_id(),
            hypotheses: ebm.hypotheses.clone(),
            poles: ebm.poles.clone(),
        });
        // The new cell has distinct labels, so no new self-link can appear.
        Module::from_cells(cells, SelfLinks::Allow)
    }

    /// Labels `compose(self, ebm)` would turn into links.
    pub fn interface(&self, ebm: &Ebm) -> BTreeSet<Label> {
        let border = self.border();
        ebm.hypotheses
            .iter()
            .filter(|h| border.conclusions.contains(*h))
            .chain(ebm.conclusions().filter(|c| border.hypotheses.contains(*c)))
            .cloned()
            .collect()
    }

    /// Deletes every pending port whose label is not in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<Label>) -> Result<Module, ModelError> {
        let border = self.border();
        if let Some(bad) = keep
            .iter()
            .find(|l| !border.hypotheses.contains(*l) && !border.conclusions.contains(*l))
        {
            return Err(ModelError::NotPending(bad.clone()));
        }
        let drop = |l: &Label, pending: &BTreeSet<Label>| pending.contains(l) && !keep.contains(l);
        let cells = self
            .cells
            .iter()
            .map(|cell| Cell {
                id: cell.id,
                hypotheses: cell
                    .hypotheses
                    .iter()
                    .filter(|h| !drop(h, &border.hypotheses))
                    .cloned()
                    .collect(),
                poles: cell
                    .poles
                    .iter()
                    .map(|p| {
                        Pole::new(
                            p.conclusions
                                .iter()
                                .filter(|c| !drop(c, &border.conclusions))
                                .cloned()
                                .collect(),
                        )
                    })
                    .collect(),
            })
            .collect();
        Ok(Module::assemble(cells))
    }

    /// `M|∅`: the closed module obtained by deleting the whole border.
    pub fn restrict_empty(&self) -> Module {
        self.restrict(&BTreeSet::new())
            .expect("the empty set is always a sub-border")
    }

    /// The elementary module consuming every pending conclusion and producing
    /// each pending hypothesis on a pole of its own.
    pub fn full_connector(&self) -> Ebm {
        let border = self.border();
        let poles = if border.hypotheses.is_empty() {
            vec![Pole::default()]
        } else {
            border
                .hypotheses
                .into_iter()
                .map(|h| Pole::new(vec![h]))
                .collect()
        };
        Ebm {
            hypotheses: border.conclusions.into_iter().collect(),
            poles,
        }
    }

    /// The module up to cell ids, port order, the names of links and the
    /// multiplicity of parallel links (several conclusions of one pole
    /// feeding the same cell, which every switching treats as one port).
    /// Two modules have equal canonical forms iff they are isomorphic in
    /// that sense with the same border. Used to compare normal forms reached
    /// along different rewrite paths.
    ///
    /// Self-links are dropped and a pole only records whether it had any:
    /// they are internal to one cell and only witness a cycle.
    pub fn canonical(&self) -> CanonicalModule {
        let shapes = self.cell_shapes();
        let n = shapes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, shape) in shapes.iter().enumerate() {
            for j in shape.neighbours() {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a] = b;
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            groups.entry(root(&mut parent, i)).or_default().push(i);
        }
        let mut components: Vec<Vec<CanonicalCell>> = groups
            .into_values()
            .map(|members| canonical_component(&shapes, &members))
            .collect();
        components.sort();
        let mut cells = Vec::with_capacity(n);
        for component in components {
            let offset = cells.len();
            let shift = |p: CanonicalPort| match p {
                CanonicalPort::Cell(k) => CanonicalPort::Cell(k + offset),
                border => border,
            };
            cells.extend(component.into_iter().map(|c| {
                CanonicalCell {
                    hypotheses: c.hypotheses.into_iter().map(shift).collect(),
                    poles: c
                        .poles
                        .into_iter()
                        .map(|p| CanonicalPole {
                            ports: p.ports.into_iter().map(shift).collect(),
                            self_linked: p.self_linked,
                        })
                        .collect(),
                }
            }));
        }
        CanonicalModule { cells }
    }

    fn cell_shapes(&self) -> Vec<CellShape> {
        let index: BTreeMap<CellId, usize> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id, i))
            .collect();
        self.cells
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                let hypotheses = cell
                    .hypotheses
                    .iter()
                    .filter_map(|h| match self.concl_owner.get(h) {
                        None => Some(CanonicalPort::Border(h.clone())),
                        Some(at) if at.cell == cell.id => None,
                        Some(at) => Some(CanonicalPort::Cell(index[&at.cell])),
                    })
                    .collect();
                let poles = cell
                    .poles
                    .iter()
                    .map(|p| {
                        let mut self_linked = false;
                        let ports = p
                            .conclusions
                            .iter()
                            .filter_map(|c| match self.hyp_owner.get(c) {
                                None => Some(CanonicalPort::Border(c.clone())),
                                Some(&to) if index[&to] == i => {
                                    self_linked = true;
                                    None
                                }
                                Some(to) => Some(CanonicalPort::Cell(index[to])),
                            })
                            .collect();
                        (ports, self_linked)
                    })
                    .collect();
                CellShape { hypotheses, poles }
            })
            .collect()
    }
}

/// A cell with its links given by cell index, self-links removed.
struct CellShape {
    hypotheses: Vec<CanonicalPort>,
    poles: Vec<(Vec<CanonicalPort>, bool)>,
}

impl CellShape {
    fn neighbours(&self) -> impl Iterator<Item = usize> + '_ {
        self.hypotheses
            .iter()
            .chain(self.poles.iter().flat_map(|(ports, _)| ports))
            .filter_map(|p| match p {
                CanonicalPort::Cell(j) => Some(*j),
                CanonicalPort::Border(_) => None,
            })
    }

    /// This cell with every linked cell `j` renamed to `name(j)`.
    fn encode(&self, name: impl Fn(usize) -> usize) -> CanonicalCell {
        let rename = |p: &CanonicalPort| match p {
            CanonicalPort::Cell(j) => CanonicalPort::Cell(name(*j)),
            border => border.clone(),
        };
        let mut hypotheses: Vec<CanonicalPort> = self.hypotheses.iter().map(rename).collect();
        hypotheses.sort();
        hypotheses.dedup();
        let mut poles: Vec<CanonicalPole> = self
            .poles
            .iter()
            .map(|(ports, self_linked)| {
                let mut ports: Vec<CanonicalPort> = ports.iter().map(rename).collect();
                ports.sort();
                ports.dedup();
                CanonicalPole {
                    ports,
                    self_linked: *self_linked,
                }
            })
            .collect();
        poles.sort();
        CanonicalCell { hypotheses, poles }
    }
}

/// Dense ranks of `keys`, equal keys sharing a rank.
fn ranks<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<&K> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(&k).expect("key is present"))
        .collect()
}

/// Canonical cell list of one connected component: colour refinement, then
/// the least encoding over individualisations of the remaining ties.
fn canonical_component(shapes: &[CellShape], members: &[usize]) -> Vec<CanonicalCell> {
    let local: BTreeMap<usize, usize> = members.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let cells: Vec<&CellShape> = members.iter().map(|i| &shapes[*i]).collect();
    let refine = |mut colours: Vec<usize>| loop {
        let keys: Vec<(usize, CanonicalCell)> = cells
            .iter()
            .enumerate()
            .map(|(k, c)| (colours[k], c.encode(|j| colours[local[&j]])))
            .collect();
        let next = ranks(&keys);
        let classes = |v: &[usize]| v.iter().max().map_or(0, |m| m + 1);
        if classes(&next) == classes(&colours) {
            break next;
        }
        colours = next;
    };
    fn search(
        colours: Vec<usize>,
        cells: &[&CellShape],
        local: &BTreeMap<usize, usize>,
        refine: &dyn Fn(Vec<usize>) -> Vec<usize>,
    ) -> Vec<CanonicalCell> {
        let colours = refine(colours);
        let mut count = vec![0usize; cells.len()];
        for &c in &colours {
            count[c] += 1;
        }
        let Some(tied) = (0..cells.len()).find(|&c| count[c] > 1) else {
            let mut out: Vec<(usize, CanonicalCell)> = cells
                .iter()
                .enumerate()
                .map(|(k, c)| (colours[k], c.encode(|j| colours[local[&j]])))
                .collect();
            out.sort();
            return out.into_iter().map(|(_, c)| c).collect();
        };
        (0..cells.len())
            .filter(|&k| colours[k] == tied)
            .map(|k| {
                let split: Vec<usize> = colours
                    .iter()
                    .enumerate()
                    .map(|(u, &c)| 2 * c + usize::from(u != k))
                    .collect();
                search(ranks(&split), cells, local, refine)
            })
            .min()
            .expect("a tied class has members")
    }
    let start = vec![0; cells.len()];
    search(start, &cells, &local, &refine)
}

/// A port in a canonical form: a border label, or the position of the cell
/// at the other end of a link.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CanonicalPort {
    Border(Label),
    Cell(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalPole {
    pub ports: Vec<CanonicalPort>,
    pub self_linked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCell {
    pub hypotheses: Vec<CanonicalPort>,
    pub poles: Vec<CanonicalPole>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalModule {
    pub cells: Vec<CanonicalCell>,
}

/// Left fold of [`Module::compose`].
pub fn compose_chain<'a>(chain: impl IntoIterator<Item = &'a Ebm>) -> Result<Module, ModelError> {
    let mut iter = chain.into_iter();
    let first = iter.next().ok_or(ModelError::EmptyChain)?;
    iter.try_fold(Module::from_ebm(first), |m, e| m.compose(e))
}
