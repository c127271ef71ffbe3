//! Q-descriptions and (Q,W)-descriptions: enumeration, attributes, corners
//! and the ordering, restriction operators, (S,Q,W)-factoring, the tensor
//! product of a level <=2 tree with a level-1 tree, and contraction.

use crate::ord::{bk_cmp_by, UTerm};
use crate::tree::{bk1, DomNode, Level1Tree, Level2Tree, Node1, Node2, TreeError};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// A corner value: the flattened sequence encoding used for the ordering.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub enum CVal {
    /// -1 markers, degree tags and ranks.
    Int(i64),
    /// A tree coordinate or level-1 node.
    Node(Node1),
    /// An order-type atom (level-3 generalized corners).
    U(UTerm),
    /// A nested corner.
    Seq(Vec<CVal>),
}

pub fn cval_cmp(a: &CVal, b: &CVal) -> Ordering {
    use CVal::*;
    match (a, b) {
        (Int(x), Int(y)) => x.cmp(y),
        (Node(x), Node(y)) => bk1(x, y),
        (U(x), U(y)) => x.cmp(y),
        (Seq(x), Seq(y)) => bk_cmp_by(x, y, |p, q| Some(cval_cmp(p, q))).unwrap(),
        // -1 is minimal against any structured atom
        (Int(x), _) if *x < 0 => Ordering::Less,
        (_, Int(y)) if *y < 0 => Ordering::Greater,
        _ => panic!("corner shape mismatch: {a:?} vs {b:?}"),
    }
}

pub fn corner_cmp(a: &[CVal], b: &[CVal]) -> Ordering {
    bk_cmp_by(a, b, |p, q| Some(cval_cmp(p, q))).unwrap()
}

/// The kind of a level-2 description over the 2-part of a level <=2 tree.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub enum QDescKind {
    /// q itself is in the domain; the entry's node component is pending.
    Discontinuous,
    /// Formally q-with-(-1) appended; all components absorbed.
    Continuous,
    /// Not a description proper: the pending component absorbed into the
    /// tree (the j-pushed form used in extended description sets).
    Extended,
}

/// A description built on the 2-part of a level <=2 tree: (q, P, p-vector).
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct QDesc {
    /// The domain node this description is built on.
    pub q: Node2,
    pub kind: QDescKind,
    /// P: the level-1 tree the coordinates live on.
    pub tree: Level1Tree,
    /// Node components indexing the coordinates, in branch order.
    pub branch: Vec<Node1>,
    /// Discontinuous only: the entry's own node component (None = -1).
    pub pending: Option<Node1>,
}

impl QDesc {
    /// The discontinuous description of a domain node.
    pub fn disc(t: &Level2Tree, q: &Node2) -> Option<QDesc> {
        let tower = t.tower_at(q)?;
        Some(QDesc {
            q: q.clone(),
            kind: QDescKind::Discontinuous,
            tree: tower.tree,
            branch: tower.absorbed,
            pending: tower.pending,
        })
    }

    /// The continuous description built on a degree-1 domain node.
    pub fn cont(t: &Level2Tree, q: &Node2) -> Option<QDesc> {
        let tower = t.tower_at_cont(q)?;
        Some(QDesc {
            q: q.clone(),
            kind: QDescKind::Continuous,
            tree: tower.tree,
            branch: tower.absorbed,
            pending: None,
        })
    }

    /// The extended (non-description) form of a degree-1 domain node: the
    /// pending component absorbed into the tree.
    pub fn ext(t: &Level2Tree, q: &Node2) -> Option<QDesc> {
        let tower = t.tower_at(q)?;
        let p = tower.pending.clone()?;
        Some(QDesc {
            q: q.clone(),
            kind: QDescKind::Extended,
            tree: tower.tree.union_with(&p),
            branch: tower.absorbed.into_iter().chain([p]).collect(),
            pending: None,
        })
    }

    pub fn is_constant(&self) -> bool {
        self.q.is_empty() && self.kind == QDescKind::Discontinuous
    }

    /// Formal length of q (the -1 extension counts one).
    pub fn lh(&self) -> usize {
        match self.kind {
            QDescKind::Discontinuous => self.q.len(),
            QDescKind::Continuous => self.q.len() + 1,
            QDescKind::Extended => self.q.len(),
        }
    }

    /// The rank corner used for the ordering on extended description sets.
    pub fn rank_corner(&self) -> Vec<CVal> {
        let mut out = vec![CVal::Int(2)];
        let rank = |p: &Node1| CVal::Int(self.tree.rank(p).expect("branch node in tree") as i64);
        match self.kind {
            QDescKind::Discontinuous | QDescKind::Continuous => {
                // pairs over the domain node, then the -1 terminator; for the
                // continuous form the ranks are taken in the completed tree
                for (i, c) in self.q.iter().enumerate() {
                    out.push(rank(&self.branch[i]));
                    out.push(CVal::Node(c.clone()));
                }
                out.push(CVal::Int(-1));
            }
            QDescKind::Extended => {
                for (i, c) in self.q.iter().enumerate() {
                    out.push(rank(&self.branch[i]));
                    out.push(CVal::Node(c.clone()));
                }
                out.push(rank(self.branch.last().expect("extended branch nonempty")));
            }
        }
        out
    }

    /// Uniform cofinality designator of the underlying tower: None = omega;
    /// Some(node) with the empty node standing for the level-1 root.
    pub fn tower_ucf(&self) -> Option<Node1> {
        match self.kind {
            QDescKind::Continuous | QDescKind::Extended => self.branch.last().cloned(),
            QDescKind::Discontinuous => match &self.pending {
                None => None,
                Some(p) => Some(p[..p.len() - 1].to_vec()),
            },
        }
    }
}

/// A level-1 factor map: an order preserving injection of one level-1 tree
/// into another, with the root fixed. Images stored in domain BK order.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct SigmaL1 {
    pub dom: Level1Tree,
    pub images: Vec<Node1>, // one per dom node, in BK order of the domain
}

impl SigmaL1 {
    pub fn empty() -> Self {
        SigmaL1 {
            dom: Level1Tree::empty(),
            images: Vec::new(),
        }
    }

    pub fn identity(p: &Level1Tree) -> Self {
        SigmaL1 {
            dom: p.clone(),
            images: p.iter().cloned().collect(),
        }
    }

    /// sigma(node); the empty node (root) maps to itself.
    pub fn apply(&self, p: &Node1) -> Option<Node1> {
        if p.is_empty() {
            return Some(Vec::new());
        }
        let r = self.dom.rank(p)?;
        Some(self.images[r].clone())
    }

    pub fn range(&self) -> &[Node1] {
        &self.images
    }

    pub fn is_into(&self, w: &Level1Tree) -> bool {
        self.images.iter().all(|n| w.contains(n))
    }

    pub fn is_valid(&self) -> bool {
        self.images.len() == self.dom.len()
            && self
                .images
                .windows(2)
                .all(|p| bk1(&p[0], &p[1]) == Ordering::Less)
    }

    /// All order preserving injections of p into w.
    pub fn all(p: &Level1Tree, w: &Level1Tree) -> Vec<SigmaL1> {
        let wn: Vec<Node1> = w.iter().cloned().collect();
        let k = p.len();
        let mut out = Vec::new();
        if k > wn.len() {
            return out;
        }
        if k == 0 {
            return vec![SigmaL1::empty()];
        }
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(SigmaL1 {
                dom: p.clone(),
                images: idx.iter().map(|&i| wn[i].clone()).collect(),
            });
            // next k-subset of 0..wn.len()
            let mut i = k;
            let mut advanced = false;
            while i > 0 {
                i -= 1;
                if idx[i] != i + wn.len() - k {
                    idx[i] += 1;
                    for j in i + 1..k {
                        idx[j] = idx[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                return out;
            }
        }
    }
}

/// A (Q,W)-description.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub enum DescQW {
    /// Degree 1: a node of the level-1 part of Q.
    D1(Node1),
    /// Degree 2: a description on the 2-part plus a factor map into W.
    D2(QDesc, SigmaL1),
}

impl DescQW {
    pub fn constant() -> Self {
        DescQW::D2(
            QDesc {
                q: Vec::new(),
                kind: QDescKind::Discontinuous,
                tree: Level1Tree::empty(),
                branch: Vec::new(),
                pending: Some(vec![0]),
            },
            SigmaL1::empty(),
        )
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, DescQW::D2(q, _) if q.is_constant())
    }

    pub fn degree(&self) -> u8 {
        match self {
            DescQW::D1(_) => 1,
            DescQW::D2(..) => 2,
        }
    }

    /// The sigma-plus-q corner: (1, q) or (2, sigma(p_0), q(0), ...).
    pub fn corner(&self) -> Vec<CVal> {
        match self {
            DescQW::D1(q) => vec![CVal::Int(1), CVal::Node(q.clone())],
            DescQW::D2(qd, sigma) => {
                let mut out = vec![CVal::Int(2)];
                match qd.kind {
                    QDescKind::Discontinuous => {
                        for (i, c) in qd.q.iter().enumerate() {
                            out.push(CVal::Node(sigma.apply(&qd.branch[i]).unwrap()));
                            out.push(CVal::Node(c.clone()));
                        }
                    }
                    QDescKind::Continuous => {
                        for (i, c) in qd.q.iter().enumerate() {
                            out.push(CVal::Node(sigma.apply(&qd.branch[i]).unwrap()));
                            out.push(CVal::Node(c.clone()));
                        }
                        out.push(CVal::Node(
                            sigma.apply(qd.branch.last().unwrap()).unwrap(),
                        ));
                        out.push(CVal::Int(-1));
                    }
                    QDescKind::Extended => {
                        for (i, c) in qd.q.iter().enumerate() {
                            out.push(CVal::Node(sigma.apply(&qd.branch[i]).unwrap()));
                            out.push(CVal::Node(c.clone()));
                        }
                        out.push(CVal::Node(
                            sigma.apply(qd.branch.last().unwrap()).unwrap(),
                        ));
                    }
                }
                out
            }
        }
    }

    /// The signature: the sigma-images of the absorbed components.
    pub fn sign(&self) -> Vec<Node1> {
        match self {
            DescQW::D1(_) => Vec::new(),
            DescQW::D2(qd, sigma) => qd
                .branch
                .iter()
                .map(|p| sigma.apply(p).unwrap())
                .collect(),
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, DescQW::D2(q, _) if q.kind == QDescKind::Continuous)
    }

    /// The W-side uniform cofinality: None = omega, Some(w) with the empty
    /// node standing for the W-root.
    pub fn ucf_w(&self) -> Option<Node1> {
        match self {
            DescQW::D1(_) => None,
            DescQW::D2(qd, sigma) => qd.tower_ucf().map(|p| sigma.apply(&p).unwrap()),
        }
    }

    pub fn is_direct(&self) -> bool {
        match self {
            DescQW::D1(_) => true,
            DescQW::D2(qd, sigma) => {
                sigma.images.iter().zip(qd.tree.iter()).all(|(a, b)| a == b)
            }
        }
    }

    /// The star signature: the domain prefixes of q (as dom(Q) designators).
    pub fn sign_star(&self) -> Vec<DomNode> {
        match self {
            DescQW::D1(q) => vec![DomNode::L1(q.clone())],
            DescQW::D2(qd, _) => (1..=qd.q.len())
                .map(|i| DomNode::L2(qd.q[..i].to_vec()))
                .collect(),
        }
    }

    /// *-W-continuity: whether the push along sigma is continuous.
    pub fn star_w_continuous(&self, w: &Level1Tree) -> bool {
        match self {
            DescQW::D1(_) => true,
            DescQW::D2(qd, sigma) => {
                let ucf = match qd.tower_ucf() {
                    None => return true,
                    Some(u) => u,
                };
                let img = sigma.apply(&ucf).unwrap();
                if img.is_empty() {
                    // the W-root: below every node, no predecessor available
                    return false;
                }
                let r = w.rank(&img).expect("sigma image in W");
                if r == 0 {
                    return true;
                }
                let pred = w.node_at_rank(r - 1).unwrap().clone();
                sigma.images.contains(&pred)
            }
        }
    }

    /// The *-W uniform cofinality designator, as an extended description
    /// over Q (degree 2 only; degree 1 descriptions are their own
    /// designator).
    pub fn ucf_star_w(&self, t: &Level2Tree, w: &Level1Tree) -> Option<QDesc> {
        let qd = match self {
            DescQW::D1(_) => return None,
            DescQW::D2(qd, _) => qd,
        };
        let cont_star = self.star_w_continuous(w);
        Some(match (qd.kind.clone(), cont_star) {
            (QDescKind::Continuous, true) => QDesc::disc(t, &qd.q).unwrap(),
            (QDescKind::Continuous, false) => QDesc::ext(t, &qd.q).unwrap(),
            (QDescKind::Discontinuous, true) => qd.clone(),
            (QDescKind::Discontinuous, false) => QDesc::ext(t, &qd.q).unwrap(),
            (QDescKind::Extended, _) => panic!("extended form has no star ucf"),
        })
    }
}

pub fn prec_qw(a: &DescQW, b: &DescQW) -> Ordering {
    corner_cmp(&a.corner(), &b.corner())
}

/// All (Q,W)-descriptions, sorted ascending.
pub fn enum_desc_qw(q: &Level2Tree, w: &Level1Tree) -> Vec<DescQW> {
    let mut out = Vec::new();
    for n in q.t1.iter() {
        out.push(DescQW::D1(n.clone()));
    }
    for node in q.dom2().cloned().collect::<Vec<_>>() {
        let d = QDesc::disc(q, &node).unwrap();
        for sigma in SigmaL1::all(&d.tree, w) {
            out.push(DescQW::D2(d.clone(), sigma));
        }
        if q.degree2(&node) == Some(1) {
            let c = QDesc::cont(q, &node).unwrap();
            for sigma in SigmaL1::all(&c.tree, w) {
                out.push(DescQW::D2(c.clone(), sigma));
            }
        }
    }
    out.sort_by(prec_qw);
    out
}

/// The closed counting formula for the number of (Q,W)-descriptions.
pub fn count_desc_qw(q: &Level2Tree, w: &Level1Tree) -> u64 {
    fn binom(n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        let mut r = 1u64;
        for i in 0..k {
            r = r * (n - i) / (i + 1);
        }
        r
    }
    let wn = w.len() as u64;
    let mut total = q.t1.len() as u64;
    for node in q.dom2() {
        total += binom(wn, node.len() as u64);
        if q.degree2(node) == Some(1) {
            total += binom(wn, node.len() as u64 + 1);
        }
    }
    total
}

/// An element of the extended description set over a level <=2 tree.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub enum DescStar {
    D1(Node1),
    D2(QDesc),
}

impl DescStar {
    pub fn rank_corner(&self) -> Vec<CVal> {
        match self {
            DescStar::D1(q) => vec![CVal::Int(1), CVal::Node(q.clone())],
            DescStar::D2(qd) => qd.rank_corner(),
        }
    }

    /// Regular designators: degree 1, discontinuous, or extended.
    pub fn is_regular(&self) -> bool {
        match self {
            DescStar::D1(_) => true,
            DescStar::D2(q) => q.kind != QDescKind::Continuous,
        }
    }
}

pub fn prec_star(a: &DescStar, b: &DescStar) -> Ordering {
    corner_cmp(&a.rank_corner(), &b.rank_corner())
}

pub fn sim_star(a: &DescStar, b: &DescStar) -> bool {
    prec_star(a, b) == Ordering::Equal
}

/// All extended descriptions over Q, ascending.
pub fn enum_desc_star(q: &Level2Tree) -> Vec<DescStar> {
    let mut out = Vec::new();
    for n in q.t1.iter() {
        out.push(DescStar::D1(n.clone()));
    }
    for node in q.dom2().cloned().collect::<Vec<_>>() {
        out.push(DescStar::D2(QDesc::disc(q, &node).unwrap()));
        if q.degree2(&node) == Some(1) {
            out.push(DescStar::D2(QDesc::cont(q, &node).unwrap()));
            out.push(DescStar::D2(QDesc::ext(q, &node).unwrap()));
        }
    }
    out.sort_by(prec_star);
    out
}

/// w' restricted to a subtree W: the unique W-node (or root, encoded None)
/// immediately above w' with nothing strictly between.
pub fn restrict_node_to_tree(wp: &Node1, w: &Level1Tree) -> Option<Node1> {
    w.iter()
        .filter(|n| bk1(wp, n) == Ordering::Less)
        .min_by(|a, b| bk1(a, b))
        .cloned()
}

/// D' restricted to (Q,W): the immediate successor of D' within the target
/// description set (brute force over the finite target set).
pub fn restrict_qw(dp: &DescQW, q: &Level2Tree, w: &Level1Tree) -> Result<DescQW, TreeError> {
    let target = enum_desc_qw(q, w);
    if target.iter().any(|d| d == dp) {
        return Err(TreeError::Other(
            "description already in the target set".into(),
        ));
    }
    target
        .into_iter()
        .filter(|d| prec_qw(dp, d) == Ordering::Less)
        .min_by(prec_qw)
        .ok_or_else(|| TreeError::Other("no description above the input".into()))
}

/// (d',q') restricted to the extended description set over a subtree.
pub fn restrict_star(dp: &DescStar, q: &Level2Tree) -> Result<DescStar, TreeError> {
    let target = enum_desc_star(q);
    if target.iter().any(|d| sim_star(d, dp)) {
        return Err(TreeError::Other(
            "description already in the target set".into(),
        ));
    }
    target
        .into_iter()
        .filter(|d| prec_star(dp, d) == Ordering::Less)
        .min_by(prec_star)
        .ok_or_else(|| TreeError::Other("no description above the input".into()))
}

/// An (S,Q,W)-factoring map; the root implicitly maps to the constant.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct FactorSQW {
    /// Images of the S-nodes in BK order of S.
    pub images: Vec<DescQW>,
}

impl FactorSQW {
    pub fn apply(&self, s: &Level1Tree, node: &Node1) -> Option<&DescQW> {
        if node.is_empty() {
            return None;
        }
        self.images.get(s.rank(node)?)
    }

    pub fn check(&self, s: &Level1Tree, q: &Level2Tree, w: &Level1Tree) -> bool {
        if self.images.len() != s.len() {
            return false;
        }
        let all = enum_desc_qw(q, w);
        self.images.iter().all(|d| all.contains(d) && !d.is_constant())
            && self
                .images
                .windows(2)
                .all(|p| prec_qw(&p[0], &p[1]) == Ordering::Less)
    }
}

/// A representation of the tensor product of a level <=2 tree with a
/// level-1 tree: the flat level-1 tree whose k-th node carries the k-th
/// non-constant description in ascending order; the seed rank of the k-th
/// node is k+1.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct TensorQW {
    pub s: Level1Tree,
    pub tau: FactorSQW,
}

pub fn tensor_qw(q: &Level2Tree, w: &Level1Tree) -> TensorQW {
    let descs: Vec<DescQW> = enum_desc_qw(q, w)
        .into_iter()
        .filter(|d| !d.is_constant())
        .collect();
    let s = Level1Tree::from_nodes((0..descs.len()).map(|k| vec![k as u32]));
    TensorQW {
        s,
        tau: FactorSQW { images: descs },
    }
}

/// The contraction of a family of finite sequences: deduplicating union
/// ordered by first occurrence, with the monotone index map.
pub fn contraction<T: Clone + Eq>(seqs: &[Vec<T>]) -> (Vec<T>, Vec<(usize, usize)>) {
    let mut out = Vec::new();
    let mut idx = Vec::new();
    for (i, s) in seqs.iter().enumerate() {
        for (j, a) in s.iter().enumerate() {
            if !out.contains(a) {
                out.push(a.clone());
                idx.push((i, j));
            }
        }
    }
    (out, idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::fixtures;

    #[test]
    fn counting_formula_guide_examples() {
        // 19 (Q,W)-descriptions in the level-(1,2,1) guide example
        let q = fixtures::q21_guide();
        let w = fixtures::w21();
        assert_eq!(count_desc_qw(&q, &w), 19);
        assert_eq!(enum_desc_qw(&q, &w).len(), 19);
        // Q22 with a four-node W: 16 descriptions, 15 non-constant
        let q = fixtures::q22();
        let w4 = fixtures::level1_by_name("W4").unwrap();
        assert_eq!(count_desc_qw(&q, &w4), 16);
        assert_eq!(tensor_qw(&q, &w4).s.len(), 15);
        // (Q0, empty W): only the constant
        let q0 = fixtures::q0();
        let descs = enum_desc_qw(&q0, &Level1Tree::empty());
        assert_eq!(descs.len(), 1);
        assert!(descs[0].is_constant());
    }

    #[test]
    fn counting_formula_vs_generate_and_test() {
        let qs = ["Q0", "Q1", "Q20", "Q21", "Q22", "T22", "X22", "T23", "Q21guide"];
        let ws = [
            Level1Tree::empty(),
            Level1Tree::from_nodes(vec![vec![0]]),
            Level1Tree::from_nodes(vec![vec![0], vec![0, 0]]),
            Level1Tree::from_nodes(vec![vec![0], vec![1], vec![0, 0]]),
            fixtures::w21(),
        ];
        for qn in qs {
            let q = fixtures::level2_by_name(qn).unwrap();
            for w in &ws {
                assert_eq!(
                    count_desc_qw(&q, w),
                    enum_desc_qw(&q, w).len() as u64,
                    "{qn} with {w:?}"
                );
            }
        }
    }

    #[test]
    fn constant_is_maximum_and_dw_least_degree2() {
        let q = fixtures::q21_guide();
        let w = fixtures::w21();
        let descs = enum_desc_qw(&q, &w);
        assert!(descs.last().unwrap().is_constant());
        let least2 = descs.iter().find(|d| d.degree() == 2).unwrap();
        match least2 {
            DescQW::D2(qd, sigma) => {
                assert_eq!(qd.kind, QDescKind::Continuous);
                assert!(qd.q.is_empty());
                assert_eq!(sigma.images, vec![vec![0]]);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn prec_transitive_on_guide_descriptions() {
        let q = fixtures::q21_guide();
        let w = fixtures::w21();
        let descs = enum_desc_qw(&q, &w);
        for a in &descs {
            for b in &descs {
                for c in &descs {
                    if prec_qw(a, b) != Ordering::Greater && prec_qw(b, c) != Ordering::Greater {
                        assert_ne!(prec_qw(a, c), Ordering::Greater);
                    }
                }
            }
        }
    }

    #[test]
    fn sim_pair_on_desc_star() {
        // the unique nontrivial equal-corner pair: the root description and
        // the continuous root extension
        let q = fixtures::q21();
        let all = enum_desc_star(&q);
        let mut pairs = Vec::new();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if sim_star(&all[i], &all[j]) {
                    pairs.push((all[i].clone(), all[j].clone()));
                }
            }
        }
        assert_eq!(pairs.len(), 1, "{pairs:?}");
        let (a, b) = &pairs[0];
        let mut kinds = vec![];
        for d in [a, b] {
            match d {
                DescStar::D2(qd) => kinds.push((qd.q.clone(), qd.kind.clone())),
                _ => panic!(),
            }
        }
        assert!(kinds.contains(&(vec![], QDescKind::Discontinuous)));
        assert!(kinds.iter().any(|(_, k)| *k == QDescKind::Continuous));
    }

    #[test]
    fn restrict_matches_brute_force_clause() {
        let q = fixtures::q21_guide();
        let w = fixtures::w21();
        let w_small = Level1Tree::from_nodes(vec![vec![0], vec![1]]);
        let big = enum_desc_qw(&q, &w);
        let small = enum_desc_qw(&q, &w_small);
        for d in &big {
            if small.contains(d) {
                assert!(restrict_qw(d, &q, &w_small).is_err());
                continue;
            }
            let r = restrict_qw(d, &q, &w_small).unwrap();
            let expect = small
                .iter()
                .filter(|e| prec_qw(d, e) == Ordering::Less)
                .min_by(|a, b| prec_qw(a, b))
                .unwrap();
            assert_eq!(&r, expect);
        }
    }

    #[test]
    fn restrict_node_examples() {
        let w = fixtures::w21();
        assert_eq!(restrict_node_to_tree(&vec![0, 0], &w), Some(vec![0]));
        assert_eq!(restrict_node_to_tree(&vec![1, 5], &w), Some(vec![1]));
        assert_eq!(restrict_node_to_tree(&vec![5], &w), None);
    }

    #[test]
    fn contraction_examples() {
        let (c, _) = contraction(&[vec!['a']]);
        assert_eq!(c, vec!['a']);
        let (c, m) = contraction(&[vec!['a'], vec!['a', 'b'], vec!['b']]);
        assert_eq!(c, vec!['a', 'b']);
        assert_eq!(m, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn direct_descriptions_are_monotone_in_rank() {
        let q = fixtures::q21_guide();
        let w = fixtures::w21();
        let descs = enum_desc_qw(&q, &w);
        let direct: Vec<usize> = descs
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_direct() && !d.is_constant())
            .map(|(i, _)| i)
            .collect();
        for w in direct.windows(2) {
            assert!(w[0] < w[1]);
        }
    }
}
