//! Finite level-1, level <=2 and level-3 trees, their partial forms,
//! completions and branch towers, plus the named example trees.

use crate::ord::bk_cmp;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

/// A node of omega^<omega (always nonempty when stored in a tree).
pub type Node1 = Vec<u32>;
/// A node of dom of the 2-part of a level <=2 tree: a nonempty sequence of
/// level-1 nodes (the root of the 2-part is the empty sequence).
pub type Node2 = Vec<Node1>;
/// A node of the domain of a level-3 tree: like the 2-part domain nodes, a
/// nonempty sequence of tuples of naturals.
pub type Node3 = Vec<Node1>;

pub fn bk1(a: &Node1, b: &Node1) -> Ordering {
    bk_cmp(a, b)
}

pub fn bk2(a: &Node2, b: &Node2) -> Ordering {
    crate::ord::bk_cmp_by(a, b, |x, y| Some(bk1(x, y))).unwrap()
}

pub fn bk3(a: &Node3, b: &Node3) -> Ordering {
    bk2(a, b)
}

/// Sort key wrappers so BTree containers order by Brouwer-Kleene.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct Bk1(pub Node1);
impl PartialOrd for Bk1 {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(bk1(&self.0, &o.0))
    }
}
impl Ord for Bk1 {
    fn cmp(&self, o: &Self) -> Ordering {
        bk1(&self.0, &o.0)
    }
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct Bk2(pub Node2);
impl PartialOrd for Bk2 {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(bk2(&self.0, &o.0))
    }
}
impl Ord for Bk2 {
    fn cmp(&self, o: &Self) -> Ordering {
        bk2(&self.0, &o.0)
    }
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct Bk3(pub Node3);
impl PartialOrd for Bk3 {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(bk3(&self.0, &o.0))
    }
}
impl Ord for Bk3 {
    fn cmp(&self, o: &Self) -> Ordering {
        bk3(&self.0, &o.0)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq, Clone)]
pub enum TreeError {
    #[error("validation failed: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("node not in domain: {0}")]
    NoSuchNode(String),
    #[error("degree-0 partial tree has no extension")]
    NoExtension,
    #[error("unknown fixture name: {0}")]
    UnknownFixture(String),
    #[error("{0}")]
    Other(String),
}

/// A named rule violation at a named node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub node: String,
    pub rule: String,
}

impl Violation {
    pub fn new(node: impl fmt::Debug, rule: &str) -> Self {
        Violation {
            node: format!("{node:?}"),
            rule: rule.to_string(),
        }
    }
}

// ---------------------------------------------------------------------------
// level 1
// ---------------------------------------------------------------------------

/// A finite set of nonempty sequences of naturals, closed under nonempty
/// initial segments. In regular form, child indices at each position form an
/// initial segment of the naturals.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Level1Tree {
    nodes: BTreeSet<Bk1>,
}

impl fmt::Debug for Level1Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Level1Tree {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_nodes<I: IntoIterator<Item = Node1>>(nodes: I) -> Self {
        Level1Tree {
            nodes: nodes.into_iter().map(Bk1).collect(),
        }
    }

    /// The chain (0), (0,0), ..., of the given length.
    pub fn chain(len: usize) -> Self {
        Self::from_nodes((1..=len).map(|k| vec![0; k]))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, n: &Node1) -> bool {
        self.nodes.contains(&Bk1(n.clone()))
    }

    /// Nodes in BK-ascending order.
    pub fn iter(&self) -> impl Iterator<Item = &Node1> {
        self.nodes.iter().map(|b| &b.0)
    }

    pub fn insert(&mut self, n: Node1) {
        assert!(!n.is_empty());
        self.nodes.insert(Bk1(n));
    }

    pub fn union_with(&self, n: &Node1) -> Level1Tree {
        let mut t = self.clone();
        t.insert(n.clone());
        t
    }

    /// BK rank of a node within the tree (0 = least).
    pub fn rank(&self, n: &Node1) -> Option<usize> {
        self.iter().position(|m| m == n)
    }

    pub fn node_at_rank(&self, r: usize) -> Option<&Node1> {
        self.iter().nth(r)
    }

    pub fn is_subtree_of(&self, other: &Level1Tree) -> bool {
        self.iter().all(|n| other.contains(n))
    }

    /// Children components present under `parent` (empty parent = root).
    pub fn children(&self, parent: &Node1) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .iter()
            .filter(|n| n.len() == parent.len() + 1 && n[..parent.len()] == parent[..])
            .map(|n| n[parent.len()])
            .collect();
        out.sort_unstable();
        out
    }

    pub fn validate(&self, regular: bool) -> Vec<Violation> {
        let mut out = Vec::new();
        for n in self.iter() {
            if n.is_empty() {
                out.push(Violation::new(n, "empty sequence stored as node"));
                continue;
            }
            if n.len() > 1 && !self.contains(&n[..n.len() - 1].to_vec()) {
                out.push(Violation::new(n, "missing initial segment"));
            }
        }
        if regular {
            let mut parents: Vec<Node1> = vec![vec![]];
            parents.extend(self.iter().cloned());
            for p in parents {
                let ch = self.children(&p);
                for (i, c) in ch.iter().enumerate() {
                    if *c != i as u32 {
                        out.push(Violation::new(&p, "non-contiguous child"));
                        break;
                    }
                }
            }
        }
        out
    }

    /// All legal new nodes p with immediate predecessor in the tree or root,
    /// in regular form (next child index at each position).
    pub fn regular_extensions(&self) -> Vec<Node1> {
        let mut parents: Vec<Node1> = vec![vec![]];
        parents.extend(self.iter().cloned());
        let mut out = Vec::new();
        for p in parents {
            let next = self.children(&p).len() as u32;
            let mut n = p.clone();
            n.push(next);
            out.push(n);
        }
        out.sort_by(|a, b| bk1(a, b));
        out
    }
}

/// A partial level <=1 tree: a tree plus a pending node (None encodes -1).
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct PartialLevel1 {
    pub tree: Level1Tree,
    pub node: Option<Node1>,
}

impl PartialLevel1 {
    pub fn new(tree: Level1Tree, node: Option<Node1>) -> Self {
        PartialLevel1 { tree, node }
    }

    pub fn degree(&self) -> u8 {
        if self.node.is_some() {
            1
        } else {
            0
        }
    }

    /// The completion: tree plus the pending node.
    pub fn completion(&self) -> Result<Level1Tree, TreeError> {
        match &self.node {
            Some(p) => Ok(self.tree.union_with(p)),
            None => Err(TreeError::NoExtension),
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.tree.validate(false);
        if let Some(p) = &self.node {
            if p.is_empty() {
                out.push(Violation::new(p, "pending node empty"));
            } else if self.tree.contains(p) {
                out.push(Violation::new(p, "pending node already in tree"));
            } else if p.len() > 1 && !self.tree.contains(&p[..p.len() - 1].to_vec()) {
                out.push(Violation::new(p, "pending node has no predecessor"));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// level <= 2
// ---------------------------------------------------------------------------

/// A level <=2 tree: a level-1 part and a finite map from a tree of
/// sequences (containing the empty sequence) to partial level-1 trees.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level2Tree {
    pub t1: Level1Tree,
    t2: Vec<(Node2, PartialLevel1)>, // BK-sorted by node
}

impl fmt::Debug for Level2Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Level2Tree{{t1:{:?}, t2:{:?}}}", self.t1, self.t2)
    }
}

impl Level2Tree {
    /// The tree with empty level-1 part and only the root entry.
    pub fn q0() -> Self {
        Level2Tree {
            t1: Level1Tree::empty(),
            t2: vec![(vec![], PartialLevel1::new(Level1Tree::empty(), Some(vec![0])))],
        }
    }

    pub fn from_parts<I: IntoIterator<Item = (Node2, PartialLevel1)>>(
        t1: Level1Tree,
        entries: I,
    ) -> Self {
        let mut t2: Vec<(Node2, PartialLevel1)> = entries.into_iter().collect();
        if !t2.iter().any(|(q, _)| q.is_empty()) {
            t2.push((vec![], PartialLevel1::new(Level1Tree::empty(), Some(vec![0]))));
        }
        t2.sort_by(|a, b| bk2(&a.0, &b.0));
        Level2Tree { t1, t2 }
    }

    /// Number of nodes (level-1 nodes plus 2-part domain including the root).
    pub fn card(&self) -> usize {
        self.t1.len() + self.t2.len()
    }

    pub fn dom2(&self) -> impl Iterator<Item = &Node2> {
        self.t2.iter().map(|(q, _)| q)
    }

    pub fn dom2_nonroot(&self) -> impl Iterator<Item = &Node2> {
        self.dom2().filter(|q| !q.is_empty())
    }

    pub fn entry(&self, q: &Node2) -> Option<&PartialLevel1> {
        self.t2.iter().find(|(n, _)| n == q).map(|(_, e)| e)
    }

    pub fn tree_at(&self, q: &Node2) -> Option<&Level1Tree> {
        self.entry(q).map(|e| &e.tree)
    }

    pub fn node_at(&self, q: &Node2) -> Option<&Option<Node1>> {
        self.entry(q).map(|e| &e.node)
    }

    pub fn contains2(&self, q: &Node2) -> bool {
        self.entry(q).is_some()
    }

    /// Degree of an entry (1 iff the pending node is a real node).
    pub fn degree2(&self, q: &Node2) -> Option<u8> {
        self.entry(q).map(PartialLevel1::degree)
    }

    /// Children components of q within dom of the 2-part, BK-ascending.
    pub fn children2(&self, q: &Node2) -> Vec<Node1> {
        let mut out: Vec<Node1> = self
            .dom2()
            .filter(|n| n.len() == q.len() + 1 && n[..q.len()] == q[..])
            .map(|n| n[q.len()].clone())
            .collect();
        out.sort_by(|a, b| bk1(a, b));
        out
    }

    /// dom as (d, node) pairs in BK order: all (1,·) precede all (2,·).
    pub fn dom_pairs(&self) -> Vec<DomNode> {
        let mut out: Vec<DomNode> = self.t1.iter().map(|n| DomNode::L1(n.clone())).collect();
        let mut two: Vec<Node2> = self.dom2().cloned().collect();
        two.sort_by(|a, b| bk2(a, b));
        out.extend(two.into_iter().map(DomNode::L2));
        out
    }

    /// The branch tower at q: the tree component together with the node
    /// components along the branch (root included), final entry pending.
    pub fn tower_at(&self, q: &Node2) -> Option<TowerL1> {
        let entry = self.entry(q)?;
        let mut comps = Vec::new();
        for l in 0..=q.len() {
            comps.push(self.entry(&q[..l].to_vec())?.node.clone());
        }
        // components at proper prefixes must be real nodes
        let mut absorbed = Vec::new();
        for c in &comps[..q.len()] {
            absorbed.push(c.clone()?);
        }
        Some(TowerL1 {
            tree: entry.tree.clone(),
            absorbed,
            pending: comps[q.len()].clone(),
            continuous: false,
        })
    }

    /// The continuous tower at q-with-(-1): all components absorbed, tree is
    /// the completion of the entry at q (degree 1 required).
    pub fn tower_at_cont(&self, q: &Node2) -> Option<TowerL1> {
        let entry = self.entry(q)?;
        let p = entry.node.clone()?;
        let mut t = self.tower_at(q)?;
        t.tree = entry.tree.union_with(&p);
        t.absorbed.push(p);
        t.pending = None;
        t.continuous = true;
        Some(t)
    }

    pub fn validate(&self, regular: bool) -> Vec<Violation> {
        let mut out = self.t1.validate(regular);
        let root = self.entry(&vec![]);
        match root {
            None => out.push(Violation::new("()", "missing root entry")),
            Some(e) => {
                if !e.tree.is_empty() || e.node != Some(vec![0]) {
                    out.push(Violation::new("()", "root entry must be (empty tree, (0))"));
                }
            }
        }
        for (q, e) in &self.t2 {
            out.extend(e.validate().into_iter().map(|mut v| {
                v.node = format!("{q:?}:{}", v.node);
                v
            }));
            if q.is_empty() {
                continue;
            }
            let parent = q[..q.len() - 1].to_vec();
            match self.entry(&parent) {
                None => out.push(Violation::new(q, "missing initial segment")),
                Some(pe) => match &pe.node {
                    None => out.push(Violation::new(q, "parent entry has degree 0")),
                    Some(p) => {
                        let completed = pe.tree.union_with(p);
                        if e.tree != completed {
                            out.push(Violation::new(
                                q,
                                "tree component is not the completion of the parent entry",
                            ));
                        }
                    }
                },
            }
        }
        if regular {
            // the children components at each node form a regular level-1
            // tree
            let doms: Vec<Node2> = self.dom2().cloned().collect();
            for q in &doms {
                let comp = Level1Tree::from_nodes(self.children2(q));
                if !comp.validate(true).is_empty() {
                    out.push(Violation::new(q, "non-contiguous child"));
                }
            }
        }
        out
    }

    pub fn is_subtree_of(&self, other: &Level2Tree) -> bool {
        self.t1.is_subtree_of(&other.t1)
            && self
                .t2
                .iter()
                .all(|(q, e)| other.entry(q).map_or(false, |f| f == e))
    }
}

/// A node of dom(Q) for a level <=2 tree Q: degree 1 or 2.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug, Hash)]
pub enum DomNode {
    L1(Node1),
    L2(Node2),
}

impl DomNode {
    pub fn degree(&self) -> u8 {
        match self {
            DomNode::L1(_) => 1,
            DomNode::L2(_) => 2,
        }
    }
}

pub fn bk_dom(a: &DomNode, b: &DomNode) -> Ordering {
    match (a, b) {
        (DomNode::L1(x), DomNode::L1(y)) => bk1(x, y),
        (DomNode::L2(x), DomNode::L2(y)) => bk2(x, y),
        (DomNode::L1(_), DomNode::L2(_)) => Ordering::Less,
        (DomNode::L2(_), DomNode::L1(_)) => Ordering::Greater,
    }
}

/// The delta of a partial level <=2 tree: what a one-node extension adds.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub enum Delta2 {
    /// degree 0: no extension
    Deg0,
    /// degree 1: a fresh level-1 node q outside the 1-part
    Deg1 { q: Node1 },
    /// degree 2: a fresh 2-part node q with tree component P
    Deg2 { q: Node2, tree: Level1Tree },
}

impl Delta2 {
    pub fn degree(&self) -> u8 {
        match self {
            Delta2::Deg0 => 0,
            Delta2::Deg1 { .. } => 1,
            Delta2::Deg2 { .. } => 2,
        }
    }
}

/// A partial level <=2 tree.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct PartialLevel2 {
    pub base: Level2Tree,
    pub delta: Delta2,
}

impl PartialLevel2 {
    pub fn new(base: Level2Tree, delta: Delta2) -> Self {
        PartialLevel2 { base, delta }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.base.validate(false);
        match &self.delta {
            Delta2::Deg0 => {}
            Delta2::Deg1 { q } => {
                if q.is_empty() || self.base.t1.contains(q) {
                    out.push(Violation::new(q, "degree-1 delta node not fresh"));
                } else if q.len() > 1 && !self.base.t1.contains(&q[..q.len() - 1].to_vec()) {
                    out.push(Violation::new(q, "degree-1 delta node has no predecessor"));
                }
            }
            Delta2::Deg2 { q, tree } => {
                if q.is_empty() || self.base.contains2(q) {
                    out.push(Violation::new(q, "degree-2 delta node not fresh"));
                    return out;
                }
                let parent = q[..q.len() - 1].to_vec();
                match self.base.entry(&parent) {
                    None => out.push(Violation::new(q, "degree-2 delta node has no predecessor")),
                    Some(pe) => match &pe.node {
                        None => out.push(Violation::new(q, "parent entry has degree 0")),
                        Some(p) => {
                            if *tree != pe.tree.union_with(p) {
                                out.push(Violation::new(
                                    q,
                                    "delta tree is not the completion of the parent entry",
                                ));
                            }
                        }
                    },
                }
            }
        }
        out
    }

    /// All completions: one per admissible node component, BK order of the
    /// component with -1 (None) first.
    pub fn completions(&self) -> Result<Vec<Level2Tree>, TreeError> {
        match &self.delta {
            Delta2::Deg0 => Err(TreeError::NoExtension),
            Delta2::Deg1 { q } => {
                let mut t = self.base.clone();
                t.t1.insert(q.clone());
                Ok(vec![t])
            }
            Delta2::Deg2 { q, tree } => {
                let mut comps: Vec<Option<Node1>> = vec![None];
                comps.extend(
                    tree.regular_extensions()
                        .into_iter()
                        .filter(|p| p.len() >= 2)
                        .map(Some),
                );
                Ok(comps
                    .into_iter()
                    .map(|c| self.complete_with(q, tree, c))
                    .collect())
            }
        }
    }

    /// The completion choosing a specific node component for the new entry.
    pub fn complete_with(
        &self,
        q: &Node2,
        tree: &Level1Tree,
        component: Option<Node1>,
    ) -> Level2Tree {
        let mut entries: Vec<(Node2, PartialLevel1)> = self
            .base
            .t2
            .iter()
            .cloned()
            .collect();
        entries.push((q.clone(), PartialLevel1::new(tree.clone(), component)));
        Level2Tree::from_parts(self.base.t1.clone(), entries)
    }
}

/// A potential partial level <=1 tower: tree, absorbed node components along
/// the branch, pending component (discontinuous) or none (continuous).
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct TowerL1 {
    pub tree: Level1Tree,
    pub absorbed: Vec<Node1>,
    pub pending: Option<Node1>,
    pub continuous: bool,
}

impl TowerL1 {
    /// The root tower: empty tree, pending (0).
    pub fn root() -> Self {
        TowerL1 {
            tree: Level1Tree::empty(),
            absorbed: Vec::new(),
            pending: Some(vec![0]),
            continuous: false,
        }
    }

    /// Uniform cofinality designator of the tower: None = cofinality omega;
    /// Some(node-or-root) otherwise (empty vec denotes the level-1 root).
    pub fn ucf(&self) -> Option<Node1> {
        if self.continuous {
            self.absorbed.last().cloned()
        } else {
            match &self.pending {
                None => None,
                Some(p) => Some(p[..p.len() - 1].to_vec()),
            }
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        // replay: start from empty tree, absorb components one at a time
        let mut t = Level1Tree::empty();
        for (i, p) in self.absorbed.iter().enumerate() {
            let legal = p.len() == 1 && t.children(&vec![]).len() as u32 >= p[0]
                || p.len() > 1 && t.contains(&p[..p.len() - 1].to_vec());
            let fresh = !t.contains(p) && !p.is_empty();
            if !(fresh && (p.len() == 1 || legal)) {
                out.push(Violation::new(p, &format!("absorbed component {i} illegal")));
            }
            t.insert(p.clone());
        }
        if self.continuous {
            if self.tree != t {
                out.push(Violation::new(&self.tree, "continuous tower tree mismatch"));
            }
            if self.pending.is_some() {
                out.push(Violation::new(&self.pending, "continuous tower has pending node"));
            }
        } else {
            if self.tree != t {
                out.push(Violation::new(&self.tree, "tower tree must absorb all components"));
            }
            if let Some(p) = &self.pending {
                if t.contains(p) || (p.len() > 1 && !t.contains(&p[..p.len() - 1].to_vec())) {
                    out.push(Violation::new(p, "pending component illegal"));
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// level 3
// ---------------------------------------------------------------------------

/// A level-3 tree: a finite map from nonempty sequences of 2-part nodes,
/// closed under nonempty initial segments, to partial level <=2 trees.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level3Tree {
    entries: Vec<(Node3, PartialLevel2)>, // BK-sorted
}

impl fmt::Debug for Level3Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Level3Tree{{{} nodes}}", self.entries.len())
    }
}

impl Level3Tree {
    pub fn from_entries<I: IntoIterator<Item = (Node3, PartialLevel2)>>(entries: I) -> Self {
        let mut entries: Vec<(Node3, PartialLevel2)> = entries.into_iter().collect();
        entries.sort_by(|a, b| bk3(&a.0, &b.0));
        Level3Tree { entries }
    }

    pub fn empty() -> Self {
        Level3Tree { entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dom(&self) -> impl Iterator<Item = &Node3> {
        self.entries.iter().map(|(r, _)| r)
    }

    pub fn entry(&self, r: &Node3) -> Option<&PartialLevel2> {
        self.entries.iter().find(|(n, _)| n == r).map(|(_, e)| e)
    }

    pub fn tree_at(&self, r: &Node3) -> Option<&Level2Tree> {
        self.entry(r).map(|e| &e.base)
    }

    pub fn delta_at(&self, r: &Node3) -> Option<&Delta2> {
        self.entry(r).map(|e| &e.delta)
    }

    pub fn contains(&self, r: &Node3) -> bool {
        self.entry(r).is_some()
    }

    pub fn children(&self, r: &Node3) -> Vec<Node1> {
        let mut out: Vec<Node1> = self
            .dom()
            .filter(|n| n.len() == r.len() + 1 && n[..r.len()] == r[..])
            .map(|n| n[r.len()].clone())
            .collect();
        out.sort_by(|a, b| bk1(a, b));
        out
    }

    pub fn roots(&self) -> Vec<Node1> {
        self.children(&vec![])
    }

    /// The branch tower at r: base tree plus the deltas along the branch,
    /// with the final delta pending.
    pub fn tower_at(&self, r: &Node3) -> Option<TowerL2> {
        if r.is_empty() || !self.contains(r) {
            return None;
        }
        let mut deltas = Vec::new();
        for l in 1..=r.len() {
            deltas.push(self.entry(&r[..l].to_vec())?.delta.clone());
        }
        Some(TowerL2 {
            tree: self.tree_at(r)?.clone(),
            deltas,
            continuous: false,
        })
    }

    /// The continuous tower at r-with-(-1) given a chosen completion of the
    /// entry at r.
    pub fn tower_at_cont(&self, r: &Node3, completion: Level2Tree) -> Option<TowerL2> {
        let mut t = self.tower_at(r)?;
        t.tree = completion;
        t.continuous = true;
        Some(t)
    }

    pub fn validate(&self, regular: bool) -> Vec<Violation> {
        let mut out = Vec::new();
        for (r, e) in &self.entries {
            if r.is_empty() {
                out.push(Violation::new(r, "empty sequence stored as level-3 node"));
                continue;
            }
            out.extend(e.validate().into_iter().map(|mut v| {
                v.node = format!("{r:?}:{}", v.node);
                v
            }));
            if r.len() == 1 {
                if e.base != Level2Tree::q0() {
                    out.push(Violation::new(r, "length-1 node must sit over the one-node tree"));
                }
            } else {
                let parent = r[..r.len() - 1].to_vec();
                match self.entry(&parent) {
                    None => out.push(Violation::new(r, "missing initial segment")),
                    Some(pe) => {
                        let completions = match pe.completions() {
                            Ok(cs) => cs,
                            Err(_) => {
                                out.push(Violation::new(r, "parent entry has degree 0"));
                                continue;
                            }
                        };
                        if !completions.iter().any(|c| *c == e.base) {
                            out.push(Violation::new(
                                r,
                                "tree component is not a completion of the parent entry",
                            ));
                        }
                    }
                }
            }
        }
        if regular {
            let mut doms: Vec<Node3> = vec![vec![]];
            doms.extend(self.dom().cloned());
            for r in &doms {
                let ch = self.children(r);
                for (i, c) in ch.iter().enumerate() {
                    if c.len() == 1 && c[0] != i as u32 {
                        out.push(Violation::new(r, "non-contiguous child"));
                        break;
                    }
                }
            }
        }
        out
    }

    /// Restrict to the nodes whose position is below the cut node
    /// (everything BK-strictly-below t at the first coordinate chain).
    pub fn restrict_below(&self, cut: &Node3) -> Level3Tree {
        Level3Tree::from_entries(
            self.entries
                .iter()
                .filter(|(r, _)| {
                    // keep r iff r <_0 cut: compare first coordinates only
                    if cut.is_empty() {
                        return false;
                    }
                    bk1(&r[0], &cut[0]) == Ordering::Less
                })
                .cloned(),
        )
    }
}

/// A potential partial level <=2 tower.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct TowerL2 {
    /// The final tree: all deltas absorbed (continuous) or all but the last
    /// (discontinuous, the last delta pending).
    pub tree: Level2Tree,
    pub deltas: Vec<Delta2>,
    pub continuous: bool,
}

impl TowerL2 {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.deltas.is_empty() {
            if !self.continuous || self.tree != Level2Tree::q0() {
                out.push(Violation::new("tower", "empty tower must be continuous over the one-node tree"));
            }
            return out;
        }
        let mut t = Level2Tree::q0();
        let absorb = if self.continuous {
            self.deltas.len()
        } else {
            self.deltas.len() - 1
        };
        for (i, d) in self.deltas.iter().take(absorb).enumerate() {
            let p = PartialLevel2::new(t.clone(), d.clone());
            let vs = p.validate();
            if !vs.is_empty() {
                out.push(Violation::new(i, "illegal delta in tower"));
                return out;
            }
            match p.completions() {
                Err(_) => {
                    out.push(Violation::new(i, "degree-0 delta absorbed in tower"));
                    return out;
                }
                Ok(cs) => {
                    // the final tree must be reachable: pick the completion
                    // consistent with the recorded final tree
                    match cs.into_iter().find(|c| c.is_subtree_of(&self.tree)) {
                        Some(c) => t = c,
                        None => {
                            out.push(Violation::new(i, "tower completion not consistent with final tree"));
                            return out;
                        }
                    }
                }
            }
        }
        if self.continuous {
            if t != self.tree {
                out.push(Violation::new("tower", "continuous tower tree mismatch"));
            }
        } else {
            if t != self.tree {
                out.push(Violation::new("tower", "discontinuous tower tree mismatch"));
            }
            let p = PartialLevel2::new(t, self.deltas.last().unwrap().clone());
            if !p.validate().is_empty() {
                out.push(Violation::new("tower", "pending delta illegal"));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// fixtures
// ---------------------------------------------------------------------------

/// Fixture values for level <=2 trees.
pub mod fixtures {
    use super::*;

    fn p(tree: Vec<Node1>, node: Option<Node1>) -> PartialLevel1 {
        PartialLevel1::new(Level1Tree::from_nodes(tree), node)
    }

    /// The unique level <=2 tree of cardinality 1.
    pub fn q0() -> Level2Tree {
        Level2Tree::q0()
    }

    /// Best-guess reconstruction: one level-1 node, 2-part root only.
    pub fn q1() -> Level2Tree {
        Level2Tree::from_parts(Level1Tree::from_nodes(vec![vec![0]]), vec![])
    }

    /// 2-part {(), ((0))} with entry ({(0)}, -1).
    pub fn q20() -> Level2Tree {
        Level2Tree::from_parts(
            Level1Tree::empty(),
            vec![(vec![vec![0]], p(vec![vec![0]], None))],
        )
    }

    /// 2-part {(), ((0))} with entry ({(0)}, (0,0)).
    pub fn q21() -> Level2Tree {
        Level2Tree::from_parts(
            Level1Tree::empty(),
            vec![(vec![vec![0]], p(vec![vec![0]], Some(vec![0, 0])))],
        )
    }

    /// The guide example S: a ten-node level-1 tree.
    pub fn s21() -> Level1Tree {
        Level1Tree::from_nodes(vec![
            vec![3],
            vec![3, 0],
            vec![3, 0, 0],
            vec![2],
            vec![1],
            vec![1, 2],
            vec![1, 2, 0],
            vec![1, 1],
            vec![1, 0],
            vec![0],
        ])
    }

    /// The guide example Q used with S and W: empty 1-part,
    /// dom = {(), ((1)), ((0)), ((0),(0))}.
    pub fn q21_guide() -> Level2Tree {
        Level2Tree::from_parts(
            Level1Tree::empty(),
            vec![
                (vec![vec![1]], p(vec![vec![0]], Some(vec![0, 0]))),
                (vec![vec![0]], p(vec![vec![0]], Some(vec![0, 0]))),
                (
                    vec![vec![0], vec![0]],
                    p(vec![vec![0], vec![0, 0]], None),
                ),
            ],
        )
    }

    /// The guide example W: the level-1 tree {(2),(1),(0)}.
    pub fn w21() -> Level1Tree {
        Level1Tree::from_nodes(vec![vec![2], vec![1], vec![0]])
    }

    /// The level <=2 tree X of the level-(2,2,2) example.
    pub fn x22() -> Level2Tree {
        Level2Tree::from_parts(
            Level1Tree::from_nodes(vec![vec![0], vec![1]]),
            vec![
                (vec![vec![0]], p(vec![vec![0]], Some(vec![0, 0]))),
                (
                    vec![vec![0], vec![0]],
                    p(vec![vec![0], vec![0, 0]], Some(vec![0, 0, 0])),
                ),
                (
                    vec![vec![0], vec![1]],
                    p(vec![vec![0], vec![0, 0]], Some(vec![0, 0, 0])),
                ),
            ],
        )
    }

    /// The level <=2 tree T of the level-(2,2,2) example.
    pub fn t22() -> Level2Tree {
        Level2Tree::from_parts(
            Level1Tree::from_nodes(vec![vec![0]]),
            vec![
                (vec![vec![1]], p(vec![vec![0]], Some(vec![0, 0]))),
                (
                    vec![vec![1], vec![0]],
                    p(vec![vec![0], vec![0, 0]], Some(vec![0, 1])),
                ),
                (vec![vec![0]], p(vec![vec![0]], None)),
            ],
        )
    }

    /// The level <=2 tree Q of the level-(2,2,2) example.
    pub fn q22() -> Level2Tree {
        Level2Tree::from_parts(
            Level1Tree::from_nodes(vec![vec![0]]),
            vec![(vec![vec![0]], p(vec![vec![0]], Some(vec![0, 0])))],
        )
    }

    /// The level <=2 tree T of the level-(3,3,2) example.
    pub fn t23() -> Level2Tree {
        Level2Tree::from_parts(
            Level1Tree::empty(),
            vec![
                (vec![vec![0]], p(vec![vec![0]], Some(vec![0, 0]))),
                (
                    vec![vec![0], vec![0]],
                    p(vec![vec![0], vec![0, 0]], None),
                ),
            ],
        )
    }

    fn d2(q: Node2, tree: Vec<Node1>) -> Delta2 {
        Delta2::Deg2 {
            q,
            tree: Level1Tree::from_nodes(tree),
        }
    }

    /// The one-node level-3 tree of the given degree.
    pub fn rd(d: u8) -> Level3Tree {
        let delta = match d {
            0 => Delta2::Deg0,
            1 => Delta2::Deg1 { q: vec![0] },
            2 => d2(vec![vec![0]], vec![vec![0]]),
            _ => panic!("degree must be 0, 1 or 2"),
        };
        Level3Tree::from_entries(vec![(
            vec![vec![0]],
            PartialLevel2::new(Level2Tree::q0(), delta),
        )])
    }

    /// The level-3 tree R of the level-(3,3,2) example.
    pub fn r23() -> Level3Tree {
        let qstar = {
            // unique completion of (q20, (1,(0))): add level-1 node (0)
            let p2 = PartialLevel2::new(q20(), Delta2::Deg1 { q: vec![0] });
            p2.completions().unwrap().pop().unwrap()
        };
        Level3Tree::from_entries(vec![
            (
                vec![vec![0]],
                PartialLevel2::new(Level2Tree::q0(), d2(vec![vec![0]], vec![vec![0]])),
            ),
            (
                vec![vec![0], vec![1]],
                PartialLevel2::new(q21(), d2(vec![vec![1]], vec![vec![0]])),
            ),
            (
                vec![vec![0], vec![0]],
                PartialLevel2::new(q20(), Delta2::Deg1 { q: vec![0] }),
            ),
            (
                vec![vec![0], vec![0], vec![0]],
                PartialLevel2::new(qstar, Delta2::Deg0),
            ),
        ])
    }

    /// The level-3 tree Y of the level-(3,3,2) example.
    pub fn y23() -> Level3Tree {
        Level3Tree::from_entries(vec![
            (
                vec![vec![3]],
                PartialLevel2::new(Level2Tree::q0(), Delta2::Deg0),
            ),
            (
                vec![vec![2]],
                PartialLevel2::new(Level2Tree::q0(), Delta2::Deg1 { q: vec![0] }),
            ),
            (
                vec![vec![1]],
                PartialLevel2::new(Level2Tree::q0(), d2(vec![vec![0]], vec![vec![0]])),
            ),
            (
                vec![vec![1], vec![0]],
                PartialLevel2::new(
                    q21(),
                    d2(vec![vec![0], vec![0]], vec![vec![0], vec![0, 0]]),
                ),
            ),
            (
                vec![vec![0]],
                PartialLevel2::new(Level2Tree::q0(), Delta2::Deg0),
            ),
        ])
    }

    /// Look a fixture up by name.
    pub fn level2_by_name(name: &str) -> Option<Level2Tree> {
        Some(match name {
            "Q0" => q0(),
            "Q1" => q1(),
            "Q20" => q20(),
            "Q21" => q21(),
            "Q21§2.1" | "Q21guide" => q21_guide(),
            "X22" => x22(),
            "T22" => t22(),
            "Q22" => q22(),
            "T23" => t23(),
            _ => return None,
        })
    }

    pub fn level1_by_name(name: &str) -> Option<Level1Tree> {
        Some(match name {
            "S21" => s21(),
            "W21" => w21(),
            "W4" => Level1Tree::from_nodes(vec![vec![0], vec![1], vec![2], vec![3]]),
            _ => return None,
        })
    }

    pub fn level3_by_name(name: &str) -> Option<Level3Tree> {
        Some(match name {
            "R0" => rd(0),
            "R1" => rd(1),
            "R2" => rd(2),
            "R23" => r23(),
            "Y23" => y23(),
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        for name in ["Q0", "Q1", "Q20", "Q21", "Q21guide", "X22", "T22", "Q22", "T23"] {
            let t = fixtures::level2_by_name(name).unwrap();
            assert!(t.validate(true).is_empty(), "{name}: {:?}", t.validate(true));
        }
        for name in ["S21", "W21", "W4"] {
            let t = fixtures::level1_by_name(name).unwrap();
            assert!(t.validate(true).is_empty(), "{name}");
        }
        for name in ["R0", "R1", "R2", "R23", "Y23"] {
            let t = fixtures::level3_by_name(name).unwrap();
            assert!(t.validate(true).is_empty(), "{name}: {:?}", t.validate(true));
        }
    }

    #[test]
    fn regularity_violation_detected() {
        let t = Level1Tree::from_nodes(vec![vec![1]]);
        let vs = t.validate(true);
        assert!(vs.iter().any(|v| v.rule.contains("non-contiguous")));
        assert!(t.validate(false).is_empty());
    }

    #[test]
    fn completions_of_q21_style_partial() {
        // (Q^0, (2,((0)),{(0)})) has completions Q^20 (component -1) and
        // Q^21 (component (0,0))
        let p = PartialLevel2::new(
            Level2Tree::q0(),
            Delta2::Deg2 {
                q: vec![vec![0]],
                tree: Level1Tree::from_nodes(vec![vec![0]]),
            },
        );
        let cs = p.completions().unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0], fixtures::q20());
        assert_eq!(cs[1], fixtures::q21());
    }

    #[test]
    fn completions_degree1_unique_and_degree0_error() {
        let p = PartialLevel2::new(Level2Tree::q0(), Delta2::Deg1 { q: vec![0] });
        assert_eq!(p.completions().unwrap().len(), 1);
        let p0 = PartialLevel2::new(Level2Tree::q0(), Delta2::Deg0);
        assert!(matches!(p0.completions(), Err(TreeError::NoExtension)));
    }

    #[test]
    fn completions_of_extended_q21() {
        // (Q^21, (2,((0),(0)), {(0),(0,0)})): components from
        // {(0,0,0), (0,1), -1}
        let p = PartialLevel2::new(
            fixtures::q21(),
            Delta2::Deg2 {
                q: vec![vec![0], vec![0]],
                tree: Level1Tree::from_nodes(vec![vec![0], vec![0, 0]]),
            },
        );
        let cs = p.completions().unwrap();
        let comps: Vec<Option<Node1>> = cs
            .iter()
            .map(|c| c.node_at(&vec![vec![0], vec![0]]).unwrap().clone())
            .collect();
        // brute force oracle: all p with predecessor in P, filtered by
        // partial level-1 validity, plus -1
        let tree = Level1Tree::from_nodes(vec![vec![0], vec![0, 0]]);
        let mut expect: Vec<Option<Node1>> = vec![None];
        let mut all: Vec<Node1> = Vec::new();
        for len in 1..=3usize {
            fn gen(len: usize, acc: &mut Vec<Node1>, cur: &mut Node1) {
                if cur.len() == len {
                    acc.push(cur.clone());
                    return;
                }
                for a in 0..3u32 {
                    cur.push(a);
                    gen(len, acc, cur);
                    cur.pop();
                }
            }
            gen(len, &mut all, &mut Vec::new());
        }
        for p in all {
            let pl = PartialLevel1::new(tree.clone(), Some(p.clone()));
            if pl.validate().is_empty()
                && tree.regular_extensions().contains(&p)
                && p.len() >= 2
            {
                expect.push(Some(p));
            }
        }
        assert_eq!(comps.len(), expect.len());
        for c in &comps {
            assert!(expect.contains(c), "{c:?}");
        }
        assert!(comps.contains(&Some(vec![0, 0, 0])));
        assert!(comps.contains(&Some(vec![0, 1])));
        assert!(comps.contains(&None));
    }

    #[test]
    fn tower_at_examples() {
        // 2X[((0),(0))] = ({(0),(0,0)}, ((0),(0,0),(0,0,0)))
        let x = fixtures::x22();
        let t = x.tower_at(&vec![vec![0], vec![0]]).unwrap();
        assert_eq!(t.tree, Level1Tree::from_nodes(vec![vec![0], vec![0, 0]]));
        assert_eq!(t.absorbed, vec![vec![0], vec![0, 0]]);
        assert_eq!(t.pending, Some(vec![0, 0, 0]));
        // R^d[((0))] = (Q^0, single delta of degree d)
        for d in 0..=2u8 {
            let r = fixtures::rd(d);
            let t = r.tower_at(&vec![vec![0]]).unwrap();
            assert_eq!(t.tree, Level2Tree::q0());
            assert_eq!(t.deltas.len(), 1);
            assert_eq!(t.deltas[0].degree(), d);
        }
        // tower length grows one delta per branch step
        let r = fixtures::r23();
        let a = r.tower_at(&vec![vec![0]]).unwrap();
        let b = r.tower_at(&vec![vec![0], vec![0]]).unwrap();
        assert_eq!(b.deltas.len(), a.deltas.len() + 1);
        assert_eq!(b.deltas[..1], a.deltas[..]);
    }

    #[test]
    fn towers_validate() {
        let r = fixtures::r23();
        for node in r.dom() {
            let t = r.tower_at(node).unwrap();
            assert!(t.validate().is_empty(), "{node:?}: {:?}", t.validate());
        }
    }

    #[test]
    fn restrict_monotone_idempotent() {
        let r = fixtures::y23();
        let cut = vec![vec![2]];
        let s = r.restrict_below(&cut);
        assert!(s.len() < r.len());
        assert_eq!(s.restrict_below(&cut), s);
        // cut above everything keeps the whole tree
        let high = vec![vec![99]];
        assert_eq!(r.restrict_below(&high), r);
        // cut at the least length-1 node empties the domain
        let low = vec![vec![0]];
        assert!(r.restrict_below(&low).is_empty());
    }

    #[test]
    fn q21_fixture_entry() {
        let q = fixtures::q21();
        let e = q.entry(&vec![vec![0]]).unwrap();
        assert_eq!(e.tree, Level1Tree::from_nodes(vec![vec![0]]));
        assert_eq!(e.node, Some(vec![0, 0]));
        let q = fixtures::q20();
        let e = q.entry(&vec![vec![0]]).unwrap();
        assert_eq!(e.node, None);
    }

    #[test]
    fn t23_fixture_entries() {
        let t = fixtures::t23();
        assert_eq!(t.dom2().count(), 3);
        let e = t.entry(&vec![vec![0], vec![0]]).unwrap();
        assert_eq!(
            e.tree,
            Level1Tree::from_nodes(vec![vec![0], vec![0, 0]])
        );
        assert_eq!(e.node, None);
    }
}
