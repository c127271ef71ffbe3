//! (T,Q,W)-descriptions over a pair of level <=2 trees, the tensor product
//! of two level <=2 trees, restriction operators, the associativity
//! isomorphisms, and factoring between level <=2 trees via descriptions.

use crate::desc2::{
    corner_cmp, enum_desc_qw, prec_qw, restrict_qw, CVal, DescQW, QDesc, QDescKind, SigmaL1,
};
use crate::tree::{
    bk1, bk2, bk_dom, DomNode, Level1Tree, Level2Tree, Node1, Node2, PartialLevel1, TowerL1,
    TreeError,
};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// A (T,Q,*)-description.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub enum DescTQ {
    /// Degree 1: a non-constant description of T into the level-1 part of Q.
    D1(DescQW),
    /// Degree 2: a description on the 2-part of T whose factor map sends the
    /// carrier into (Q,W)-descriptions, W the witness tower.
    D2 {
        t: QDesc,
        /// Images of the carrier nodes in BK order of the carrier.
        tau: Vec<DescQW>,
        /// The witness tower (absorbed part replays the sign contraction).
        tower: TowerL1,
    },
}

impl DescTQ {
    pub fn constant() -> Self {
        DescTQ::D2 {
            t: QDesc {
                q: Vec::new(),
                kind: QDescKind::Discontinuous,
                tree: Level1Tree::empty(),
                branch: Vec::new(),
                pending: Some(vec![0]),
            },
            tau: Vec::new(),
            tower: TowerL1::root(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, DescTQ::D2 { t, .. } if t.is_constant())
    }

    pub fn degree(&self) -> u8 {
        match self {
            DescTQ::D1(_) => 1,
            DescTQ::D2 { .. } => 2,
        }
    }

    /// tau applied to a carrier node (the root maps to the constant).
    pub fn tau_at(&self, s: &Node1) -> Option<DescQW> {
        match self {
            DescTQ::D1(_) => None,
            DescTQ::D2 { t, tau, .. } => {
                if s.is_empty() {
                    return Some(DescQW::constant());
                }
                Some(tau[t.tree.rank(s)?].clone())
            }
        }
    }

    /// The carrier images in branch order of the t-part.
    pub fn tau_branch(&self) -> Vec<DescQW> {
        match self {
            DescTQ::D1(_) => Vec::new(),
            DescTQ::D2 { t, tau, .. } => t
                .branch
                .iter()
                .map(|s| tau[t.tree.rank(s).unwrap()].clone())
                .collect(),
        }
    }

    /// The corner: (1, inner corner) or (2, tau + t interleaved).
    pub fn corner(&self) -> Vec<CVal> {
        match self {
            DescTQ::D1(d) => vec![CVal::Int(1), CVal::Seq(d.corner())],
            DescTQ::D2 { t, .. } => {
                let mut out = vec![CVal::Int(2)];
                let images = self.tau_branch();
                match t.kind {
                    QDescKind::Discontinuous => {
                        for (i, c) in t.q.iter().enumerate() {
                            out.push(CVal::Seq(images[i].corner()));
                            out.push(CVal::Node(c.clone()));
                        }
                    }
                    QDescKind::Continuous => {
                        for (i, c) in t.q.iter().enumerate() {
                            out.push(CVal::Seq(images[i].corner()));
                            out.push(CVal::Node(c.clone()));
                        }
                        out.push(CVal::Seq(images.last().unwrap().corner()));
                        out.push(CVal::Int(-1));
                    }
                    QDescKind::Extended => panic!("extended form is not a description"),
                }
                out
            }
        }
    }

    /// The signature: contraction of the star signatures of the images.
    pub fn sign(&self) -> Vec<DomNode> {
        match self {
            DescTQ::D1(d) => d
                .sign()
                .into_iter()
                .map(DomNode::L1)
                .collect(),
            DescTQ::D2 { .. } => {
                let seqs: Vec<Vec<DomNode>> = self
                    .tau_branch()
                    .iter()
                    .map(|d| d.sign_star())
                    .collect();
                crate::desc2::contraction(&seqs).0
            }
        }
    }

    /// The signature of the one-step carrier prefix: the contraction of the
    /// star signatures of all but the last branch image.
    pub fn sign_prefix(&self) -> Vec<DomNode> {
        match self {
            DescTQ::D1(d) => {
                let mut s: Vec<DomNode> = d.sign().into_iter().map(DomNode::L1).collect();
                s.pop();
                s
            }
            DescTQ::D2 { .. } => {
                let imgs = self.tau_branch();
                let seqs: Vec<Vec<DomNode>> = imgs[..imgs.len().saturating_sub(1)]
                    .iter()
                    .map(|d| d.sign_star())
                    .collect();
                crate::desc2::contraction(&seqs).0
            }
        }
    }

    /// Continuity type: continuous iff the t-part is continuous and the last
    /// image is of *-W-continuous type.
    pub fn is_continuous(&self, w: &Level1Tree) -> bool {
        match self {
            DescTQ::D1(_) => false,
            DescTQ::D2 { t, .. } => {
                t.kind == QDescKind::Continuous
                    && self
                        .tau_branch()
                        .last()
                        .map_or(false, |d| d.star_w_continuous(w))
            }
        }
    }

    /// Plus-discontinuous: the witness tower has a real pending node.
    pub fn is_plus_discontinuous(&self) -> bool {
        matches!(self, DescTQ::D2 { tower, .. } if tower.pending.is_some())
    }
}

pub fn prec_tq(a: &DescTQ, b: &DescTQ) -> Ordering {
    corner_cmp(&a.corner(), &b.corner())
}

/// Replayable absorbed parts of towers with at most `cap` nodes: sequences
/// of components starting (0), each later one a fresh regular child of an
/// earlier (non-root) node.
fn towers_upto(cap: usize) -> Vec<Vec<Node1>> {
    let mut out: Vec<Vec<Node1>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<Node1>> = vec![Vec::new()];
    for len in 0..cap {
        let mut next = Vec::new();
        for seq in &frontier {
            let tree = Level1Tree::from_nodes(seq.iter().cloned());
            let exts: Vec<Node1> = if len == 0 {
                vec![vec![0]]
            } else {
                tree.regular_extensions()
                    .into_iter()
                    .filter(|p| p.len() >= 2)
                    .collect()
            };
            for e in exts {
                let mut s = seq.clone();
                s.push(e);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// The pending component of the witness tower, per the uniform cofinality
/// matching clause: None when the t-part tower has cofinality omega or the
/// designated image has W-cofinality omega; otherwise the fresh regular
/// child of the image's W-side uniform cofinality node.
fn witness_pending(
    t: &QDesc,
    tau_at: &dyn Fn(&Node1) -> DescQW,
    w: &Level1Tree,
) -> Result<Option<Node1>, TreeError> {
    let star = match t.tower_ucf() {
        None => return Ok(None),
        Some(s) => s,
    };
    let img = tau_at(&star);
    match img.ucf_w() {
        None => Ok(None),
        Some(delta) => {
            let mut cand: Vec<Node1> = w
                .regular_extensions()
                .into_iter()
                .filter(|p| p[..p.len() - 1] == delta[..])
                .collect();
            if delta.is_empty() {
                // fresh root children never extend a witness tower
                return Err(TreeError::Other(
                    "uniform cofinality at the root cannot be witnessed".into(),
                ));
            }
            cand.pop()
                .ok_or_else(|| TreeError::Other("no fresh child below the designator".into()))
        }
        .map(Some),
    }
}

/// All (T,Q,*)-descriptions including the constant, ascending.
pub fn enum_desc_tq(t: &Level2Tree, q: &Level2Tree) -> Vec<DescTQ> {
    let mut out = vec![DescTQ::constant()];
    // degree 1: non-constant (T, level-1-part-of-Q)-descriptions
    for d in enum_desc_qw(t, &q.t1) {
        if !d.is_constant() {
            out.push(DescTQ::D1(d));
        }
    }
    // degree 2
    let mut tparts: Vec<QDesc> = Vec::new();
    for node in t.dom2().cloned().collect::<Vec<_>>() {
        if !node.is_empty() {
            tparts.push(QDesc::disc(t, &node).unwrap());
        }
        if t.degree2(&node) == Some(1) {
            tparts.push(QDesc::cont(t, &node).unwrap());
        }
    }
    // widest possible image signature: longest branch of a description
    // over the inner base
    let image_cap: usize = q
        .dom2()
        .map(|n| n.len() + 1)
        .max()
        .unwrap_or(1);
    for tp in &tparts {
        let capacity: usize = tp.branch.len() * image_cap;
        for absorbed in towers_upto(capacity) {
            if absorbed.is_empty() {
                continue; // all-degree-1 image maps are the degree-1 class
            }
            let w = Level1Tree::from_nodes(absorbed.iter().cloned());
            let cands = enum_desc_qw(q, &w);
            let cands: Vec<DescQW> = cands.into_iter().filter(|d| !d.is_constant()).collect();
            let k = tp.branch.len();
            let mut assignment: Vec<DescQW> = Vec::new();
            enum_tau(
                tp,
                &w,
                &absorbed,
                &cands,
                k,
                &mut assignment,
                &mut Vec::new(),
                &mut out,
            );
        }
    }
    out.sort_by(prec_tq);
    out
}

#[allow(clippy::too_many_arguments)]
fn enum_tau(
    tp: &QDesc,
    w: &Level1Tree,
    absorbed: &[Node1],
    cands: &[DescQW],
    k: usize,
    assignment: &mut Vec<DescQW>,
    contraction_so_far: &mut Vec<Node1>,
    out: &mut Vec<DescTQ>,
) {
    if assignment.len() == k {
        if contraction_so_far.len() != absorbed.len() {
            return;
        }
        // clause: the images must be strictly increasing along the BK order
        // of the carrier
        let carrier: Vec<&Node1> = tp.tree.iter().collect();
        let by_branch: std::collections::HashMap<&Node1, &DescQW> = tp
            .branch
            .iter()
            .zip(assignment.iter())
            .map(|(s, d)| (s, d))
            .collect();
        let images_bk: Vec<&DescQW> = carrier.iter().map(|s| by_branch[s]).collect();
        for p in images_bk.windows(2) {
            if prec_qw(p[0], p[1]) != Ordering::Less {
                return;
            }
        }
        // at least one degree-2 image (otherwise this is the degree-1 class)
        if assignment.iter().all(|d| d.degree() == 1) {
            return;
        }
        // continuity side condition on the final image
        let tau_images: Vec<DescQW> = carrier.iter().map(|s| by_branch[s].clone()).collect();
        let tau_at = |s: &Node1| -> DescQW {
            if s.is_empty() {
                DescQW::constant()
            } else {
                tau_images[tp.tree.rank(s).unwrap()].clone()
            }
        };
        if tp.kind == QDescKind::Continuous {
            let last = assignment.last().unwrap();
            let mut signs: Vec<Vec<Node1>> =
                assignment[..k - 1].iter().map(|d| d.sign()).collect();
            let mut last_sign = last.sign();
            if !last_sign.is_empty() {
                last_sign.pop();
            }
            signs.push(last_sign);
            let (c, _) = crate::desc2::contraction(&signs);
            let w_last = absorbed.last().unwrap();
            if !c.contains(w_last) && last.is_continuous() {
                return;
            }
        }
        let pending = match witness_pending(tp, &tau_at, w) {
            Ok(p) => p,
            Err(_) => return,
        };
        out.push(DescTQ::D2 {
            t: tp.clone(),
            tau: tau_images,
            tower: TowerL1 {
                tree: w.clone(),
                absorbed: absorbed.to_vec(),
                pending,
                continuous: false,
            },
        });
        return;
    }
    let i = assignment.len();
    let _ = i;
    for d in cands {
        let sign = d.sign();
        // incremental contraction check: new nodes must continue the
        // absorbed sequence in order
        let mut cs = contraction_so_far.clone();
        let mut ok = true;
        for n in &sign {
            if !cs.contains(n) {
                if cs.len() >= absorbed.len() || &absorbed[cs.len()] != n {
                    ok = false;
                    break;
                }
                cs.push(n.clone());
            }
        }
        if !ok {
            continue;
        }
        assignment.push(d.clone());
        let mut saved = std::mem::replace(contraction_so_far, cs);
        enum_tau(tp, w, absorbed, cands, k, assignment, contraction_so_far, out);
        std::mem::swap(contraction_so_far, &mut saved);
        assignment.pop();
    }
}

/// Unfiltered generate-and-test oracle: checks the defining clauses of a
/// candidate directly (used to validate the enumerator).
pub fn is_desc_tq(c: &DescTQ, t: &Level2Tree, q: &Level2Tree) -> bool {
    match c {
        DescTQ::D1(d) => {
            !d.is_constant() && enum_desc_qw(t, &q.t1).contains(d)
        }
        DescTQ::D2 { t: tp, tau, tower } => {
            if tp.is_constant() {
                return tau.is_empty() && *tower == TowerL1::root();
            }
            // the t-part must be a description of the 2-part of T
            let good_t = match tp.kind {
                QDescKind::Discontinuous => QDesc::disc(t, &tp.q).as_ref() == Some(tp),
                QDescKind::Continuous => QDesc::cont(t, &tp.q).as_ref() == Some(tp),
                QDescKind::Extended => false,
            };
            if !good_t {
                return false;
            }
            let w = &tower.tree;
            let all = enum_desc_qw(q, w);
            if tau.len() != tp.tree.len() {
                return false;
            }
            if !tau.iter().all(|d| all.contains(d) && !d.is_constant()) {
                return false;
            }
            let carrier: Vec<&Node1> = tp.tree.iter().collect();
            for p in carrier.windows(2) {
                let a = &tau[tp.tree.rank(p[0]).unwrap()];
                let b = &tau[tp.tree.rank(p[1]).unwrap()];
                if prec_qw(a, b) != Ordering::Less {
                    return false;
                }
            }
            if tau.iter().all(|d| d.degree() == 1) {
                return false;
            }
            // contraction of branch-order signatures = absorbed components
            let branch_imgs: Vec<DescQW> = tp
                .branch
                .iter()
                .map(|s| tau[tp.tree.rank(s).unwrap()].clone())
                .collect();
            let signs: Vec<Vec<Node1>> = branch_imgs.iter().map(|d| d.sign()).collect();
            let (cont, _) = crate::desc2::contraction(&signs);
            if cont != tower.absorbed {
                return false;
            }
            if Level1Tree::from_nodes(cont.iter().cloned()) != *w {
                return false;
            }
            // continuity side clause
            if tp.kind == QDescKind::Continuous {
                let last = branch_imgs.last().unwrap();
                let mut signs2: Vec<Vec<Node1>> = branch_imgs[..branch_imgs.len() - 1]
                    .iter()
                    .map(|d| d.sign())
                    .collect();
                let mut ls = last.sign();
                if !ls.is_empty() {
                    ls.pop();
                }
                signs2.push(ls);
                let (c2, _) = crate::desc2::contraction(&signs2);
                if !c2.contains(tower.absorbed.last().unwrap()) && last.is_continuous() {
                    return false;
                }
            }
            // uniform cofinality matching clause determines the pending
            let tau_at = |s: &Node1| -> DescQW {
                if s.is_empty() {
                    DescQW::constant()
                } else {
                    tau[tp.tree.rank(s).unwrap()].clone()
                }
            };
            match witness_pending(tp, &tau_at, w) {
                Ok(p) => p == tower.pending,
                Err(_) => false,
            }
        }
    }
}

/// Restriction of a degree-2 description to a shorter witness tower: the
/// clause-exact construction.
pub fn restrict_tq_tower(
    c: &DescTQ,
    t: &Level2Tree,
    q: &Level2Tree,
    wbar: &Level1Tree,
) -> Result<DescTQ, TreeError> {
    let (tp, _tau) = match c {
        DescTQ::D1(_) => return Err(TreeError::Other("degree-1 descriptions do not restrict".into())),
        DescTQ::D2 { t, tau, .. } => (t, tau),
    };
    if tp.is_constant() {
        return Err(TreeError::Other("the constant does not restrict".into()));
    }
    let branch_imgs = c.tau_branch();
    // least carrier index whose image leaves the smaller description set
    let small = enum_desc_qw(q, wbar);
    let l = branch_imgs
        .iter()
        .position(|d| !small.contains(d))
        .ok_or_else(|| TreeError::Other("description already over the smaller tower".into()))?;
    let d_restricted = restrict_qw(&branch_imgs[l], q, wbar)?;
    // compare against the image of the tree parent of the carrier node
    let s_l = &tp.branch[l];
    let parent_img = if s_l.len() <= 1 {
        DescQW::constant()
    } else {
        c.tau_at(&s_l[..s_l.len() - 1].to_vec())
            .ok_or_else(|| TreeError::Other("carrier parent missing".into()))?
    };
    let prefix: Vec<DescQW> = branch_imgs[..l].to_vec();
    if d_restricted != parent_img {
        // keep the carrier node s_l, image replaced by the restriction
        let tprefix = prefix_desc(t, tp, l, true)?;
        build_d2(t, q, &tprefix, prefix.into_iter().chain([d_restricted]).collect())
    } else {
        let tprefix = prefix_desc(t, tp, l, false)?;
        build_d2(t, q, &tprefix, prefix)
    }
}

/// The l-prefix of a t-part: continuous form keeps the carrier node at l.
fn prefix_desc(t: &Level2Tree, tp: &QDesc, l: usize, cont: bool) -> Result<QDesc, TreeError> {
    let qpref: Node2 = tp.q[..l.min(tp.q.len())].to_vec();
    if cont {
        QDesc::cont(t, &qpref).ok_or_else(|| TreeError::Other("no continuous prefix".into()))
    } else {
        QDesc::disc(t, &qpref).ok_or_else(|| TreeError::Other("no prefix".into()))
    }
}

/// Assemble a degree-2 description from a t-part and branch-order images,
/// recomputing the witness tower.
pub fn build_d2(
    t: &Level2Tree,
    q: &Level2Tree,
    tp: &QDesc,
    branch_images: Vec<DescQW>,
) -> Result<DescTQ, TreeError> {
    let _ = t;
    let signs: Vec<Vec<Node1>> = branch_images.iter().map(|d| d.sign()).collect();
    let (absorbed, _) = crate::desc2::contraction(&signs);
    let w = Level1Tree::from_nodes(absorbed.iter().cloned());
    // reorder branch images into BK order of the carrier
    let mut tau: Vec<DescQW> = Vec::with_capacity(branch_images.len());
    let by_branch: Vec<(&Node1, &DescQW)> =
        tp.branch.iter().zip(branch_images.iter()).collect();
    for s in tp.tree.iter() {
        let d = by_branch
            .iter()
            .find(|(n, _)| *n == s)
            .map(|(_, d)| (*d).clone())
            .ok_or_else(|| TreeError::Other("carrier node without image".into()))?;
        tau.push(d);
    }
    let tau_at = |s: &Node1| -> DescQW {
        if s.is_empty() {
            DescQW::constant()
        } else {
            tau[tp.tree.rank(s).unwrap()].clone()
        }
    };
    let pending = witness_pending(tp, &tau_at, &w)?;
    let _ = q;
    Ok(DescTQ::D2 {
        t: tp.clone(),
        tau,
        tower: TowerL1 {
            tree: w,
            absorbed,
            pending,
            continuous: false,
        },
    })
}

/// A representation of the tensor product of two level <=2 trees.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct TensorTQ {
    pub x: Level2Tree,
    /// Images of the level-1 nodes of x, BK order.
    pub pi1: Vec<DescTQ>,
    /// Images of the nonroot 2-part nodes of x, BK order.
    pub pi2: Vec<(Node2, DescTQ)>,
}

impl TensorTQ {
    pub fn image(&self, d: &DomNode) -> Option<&DescTQ> {
        match d {
            DomNode::L1(n) => self.x.t1.rank(n).map(|r| &self.pi1[r]),
            DomNode::L2(n) => self.pi2.iter().find(|(m, _)| m == n).map(|(_, d)| d),
        }
    }

    /// Total number of nodes: level-1 part plus 2-part domain with root.
    pub fn card(&self) -> usize {
        self.x.card()
    }
}

/// Tensor product of level <=2 trees: the tree of all non-constant
/// (T,Q,*)-descriptions with the canonical bijection.
pub fn tensor_tq(t: &Level2Tree, q: &Level2Tree) -> TensorTQ {
    let all = enum_desc_tq(t, q);
    let d1: Vec<DescTQ> = all
        .iter()
        .filter(|d| d.degree() == 1)
        .cloned()
        .collect();
    let mut d2: Vec<DescTQ> = all
        .into_iter()
        .filter(|d| d.degree() == 2 && !d.is_constant())
        .collect();
    d2.sort_by(prec_tq);
    // group degree-2 descriptions by tower length, then hang each on its
    // restriction one tower step down
    let x1 = Level1Tree::from_nodes((0..d1.len()).map(|k| vec![k as u32]));
    let mut nodes: Vec<(Node2, DescTQ)> = Vec::new();
    let mut assigned: Vec<(Vec<CVal>, Node2)> = Vec::new(); // corner -> node
    let maxlen = d2
        .iter()
        .map(|d| match d {
            DescTQ::D2 { tower, .. } => tower.absorbed.len(),
            _ => 0,
        })
        .max()
        .unwrap_or(0);
    for m in 1..=maxlen {
        let layer: Vec<&DescTQ> = d2
            .iter()
            .filter(|d| matches!(d, DescTQ::D2 { tower, .. } if tower.absorbed.len() == m))
            .collect();
        // layer is presorted ascending; attach to parents
        let mut per_parent: Vec<(Node2, Vec<&DescTQ>)> = Vec::new();
        for d in layer {
            let parent_node: Node2 = if m == 1 {
                Vec::new()
            } else {
                let wbar = match d {
                    DescTQ::D2 { tower, .. } => {
                        Level1Tree::from_nodes(tower.absorbed[..m - 1].iter().cloned())
                    }
                    _ => unreachable!(),
                };
                let r = restrict_tq_tower(d, t, q, &wbar).expect("restriction exists");
                let rc = r.corner();
                assigned
                    .iter()
                    .find(|(c, _)| corner_cmp(c, &rc) == Ordering::Equal)
                    .map(|(_, n)| n.clone())
                    .expect("parent description present in the previous layer")
            };
            match per_parent.iter_mut().find(|(p, _)| *p == parent_node) {
                Some((_, v)) => v.push(d),
                None => per_parent.push((parent_node, vec![d])),
            }
        }
        for (parent, ds) in per_parent {
            // ds ascending by construction; components by ascending rank
            for (i, d) in ds.iter().enumerate() {
                let mut node = parent.clone();
                node.push(vec![i as u32]);
                assigned.push((d.corner(), node.clone()));
                nodes.push((node, (*d).clone()));
            }
        }
    }
    // entries: the witness tower pair (W, pending)
    let entries: Vec<(Node2, PartialLevel1)> = nodes
        .iter()
        .map(|(n, d)| match d {
            DescTQ::D2 { tower, .. } => (
                n.clone(),
                PartialLevel1::new(tower.tree.clone(), tower.pending.clone()),
            ),
            _ => unreachable!(),
        })
        .collect();
    let x = Level2Tree::from_parts(x1, entries);
    let mut pi2: Vec<(Node2, DescTQ)> = nodes;
    pi2.sort_by(|a, b| bk2(&a.0, &b.0));
    TensorTQ { x, pi1: d1, pi2 }
}

/// Does pi factor (X,T,Q)? The factoring clauses checked directly.
pub fn factor_check_xtq(
    pi1: &[(Node1, DescTQ)],
    pi2: &[(Node2, DescTQ)],
    x: &Level2Tree,
    t: &Level2Tree,
    q: &Level2Tree,
) -> bool {
    let all = enum_desc_tq(t, q);
    let get = |d: &DomNode| -> Option<DescTQ> {
        match d {
            DomNode::L1(n) => pi1.iter().find(|(m, _)| m == n).map(|(_, v)| v.clone()),
            DomNode::L2(n) => pi2.iter().find(|(m, _)| m == n).map(|(_, v)| v.clone()),
        }
    };
    // image well-formedness and membership clauses
    for n in x.t1.iter() {
        let img = match get(&DomNode::L1(n.clone())) {
            Some(i) => i,
            None => return false,
        };
        let ok = match &img {
            DescTQ::D1(_) => all.contains(&img),
            DescTQ::D2 { tower, .. } => {
                all.contains(&img) && tower.absorbed.len() <= 1
            }
        };
        if !ok {
            return false;
        }
    }
    for node in x.dom2().cloned().collect::<Vec<_>>() {
        if node.is_empty() {
            continue;
        }
        let img = match get(&DomNode::L2(node.clone())) {
            Some(i) => i,
            None => return false,
        };
        match &img {
            DescTQ::D1(_) => return false,
            DescTQ::D2 { tower, .. } => {
                let xt = x.tower_at(&node).unwrap();
                if tower.tree != xt.tree
                    || tower.absorbed != xt.absorbed
                    || tower.pending != xt.pending
                {
                    return false;
                }
                if !all.contains(&img) {
                    return false;
                }
            }
        }
        // branch restriction clause
        let parent = node[..node.len() - 1].to_vec();
        let expect_parent: DescTQ = if parent.is_empty() {
            DescTQ::constant()
        } else {
            match get(&DomNode::L2(parent.clone())) {
                Some(i) => i,
                None => return false,
            }
        };
        let wbar = x.tree_at(&parent).unwrap();
        if parent.is_empty() {
            // restriction to the trivial tower is the constant by definition
            let _ = wbar;
        } else {
            match restrict_tq_tower(&img, t, q, wbar) {
                Ok(r) => {
                    if prec_tq(&r, &expect_parent) != Ordering::Equal {
                        return false;
                    }
                }
                Err(_) => return false,
            }
        }
    }
    // order preservation over the whole domain
    let mut dom: Vec<DomNode> = x.dom_pairs();
    dom.retain(|d| !matches!(d, DomNode::L2(n) if n.is_empty()));
    dom.sort_by(bk_dom);
    for p in dom.windows(2) {
        let a = get(&p[0]).unwrap();
        let b = get(&p[1]).unwrap();
        if prec_tq(&a, &b) != Ordering::Less {
            return false;
        }
    }
    true
}

/// The identity factoring of T into (T, T tensor Q0): each node to its own
/// direct description.
pub fn id_t_star(t: &Level2Tree) -> (Vec<(Node1, DescTQ)>, Vec<(Node2, DescTQ)>) {
    let q0 = Level2Tree::q0();
    let _ = &q0;
    let mut p1 = Vec::new();
    for n in t.t1.iter() {
        p1.push((n.clone(), DescTQ::D1(DescQW::D1(n.clone()))));
    }
    let mut p2 = Vec::new();
    for node in t.dom2().cloned().collect::<Vec<_>>() {
        if node.is_empty() {
            continue;
        }
        let tp = QDesc::disc(t, &node).unwrap();
        let tower = t.tower_at(&node).unwrap();
        let images: Vec<DescQW> = tp
            .tree
            .iter()
            .map(|s| {
                DescQW::D2(
                    QDesc {
                        q: Vec::new(),
                        kind: QDescKind::Continuous,
                        tree: Level1Tree::from_nodes(vec![vec![0]]),
                        branch: vec![vec![0]],
                        pending: None,
                    },
                    SigmaL1 {
                        dom: Level1Tree::from_nodes(vec![vec![0]]),
                        images: vec![s.clone()],
                    },
                )
            })
            .collect();
        p2.push((
            node.clone(),
            DescTQ::D2 {
                t: tp,
                tau: images,
                tower,
            },
        ));
    }
    (p1, p2)
}

// ---------------------------------------------------------------------------
// factor maps between level <=2 trees, tensored maps, associativity
// ---------------------------------------------------------------------------

/// A factor map between level <=2 trees: node maps preserving entries,
/// the BK order and the prefix relation.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct FactorL2 {
    pub m1: Vec<(Node1, Node1)>,
    pub m2: Vec<(Node2, Node2)>,
}

impl FactorL2 {
    pub fn identity(q: &Level2Tree) -> Self {
        FactorL2 {
            m1: q.t1.iter().map(|n| (n.clone(), n.clone())).collect(),
            m2: q
                .dom2_nonroot()
                .map(|n| (n.clone(), n.clone()))
                .collect(),
        }
    }

    pub fn apply1(&self, n: &Node1) -> Option<&Node1> {
        self.m1.iter().find(|(a, _)| a == n).map(|(_, b)| b)
    }

    pub fn apply2(&self, n: &Node2) -> Option<Node2> {
        if n.is_empty() {
            return Some(Vec::new());
        }
        self.m2.iter().find(|(a, _)| a == n).map(|(_, b)| b.clone())
    }

    /// Does this map factor (X,Q)?
    pub fn check(&self, x: &Level2Tree, q: &Level2Tree) -> bool {
        // level-1 part: order preserving injection
        let mut imgs = Vec::new();
        for n in x.t1.iter() {
            match self.apply1(n) {
                Some(m) if q.t1.contains(m) => imgs.push(m.clone()),
                _ => return false,
            }
        }
        for p in imgs.windows(2) {
            if bk1(&p[0], &p[1]) != Ordering::Less {
                return false;
            }
        }
        // 2-part: entry preservation, prefix and BK monotonicity
        let doms: Vec<Node2> = x.dom2_nonroot().cloned().collect();
        for n in &doms {
            let m = match self.apply2(n) {
                Some(m) => m,
                None => return false,
            };
            if x.entry(n) != q.entry(&m) {
                return false;
            }
        }
        for a in &doms {
            for b in &doms {
                let (ma, mb) = (self.apply2(a).unwrap(), self.apply2(b).unwrap());
                if bk2(a, b) == Ordering::Less && bk2(&ma, &mb) != Ordering::Less {
                    return false;
                }
                if a.len() <= b.len() && b[..a.len()] == a[..] && ma[..] != mb[..ma.len()] {
                    return false;
                }
            }
        }
        true
    }

    /// Push a 2-part description through the map.
    pub fn push_qdesc(&self, target: &Level2Tree, d: &QDesc) -> Option<QDesc> {
        match d.kind {
            QDescKind::Discontinuous => {
                if d.is_constant() {
                    return Some(d.clone());
                }
                QDesc::disc(target, &self.apply2(&d.q)?)
            }
            QDescKind::Continuous => QDesc::cont(target, &self.apply2(&d.q)?),
            QDescKind::Extended => QDesc::ext(target, &self.apply2(&d.q)?),
        }
    }
}

/// pi tensor Q: maps an (X,Q,*)-description to a (T,Q,*)-description by
/// pushing the carrier part through pi.
pub fn pi_tensor_q(
    pi: &FactorL2,
    x: &Level2Tree,
    t: &Level2Tree,
    _q: &Level2Tree,
    d: &DescTQ,
) -> Option<DescTQ> {
    let _ = x;
    match d {
        DescTQ::D1(inner) => Some(DescTQ::D1(match inner {
            DescQW::D1(n) => DescQW::D1(pi.apply1(n)?.clone()),
            DescQW::D2(qd, sigma) => DescQW::D2(pi.push_qdesc(t, qd)?, sigma.clone()),
        })),
        DescTQ::D2 { t: tp, tau, tower } => Some(DescTQ::D2 {
            t: pi.push_qdesc(t, tp)?,
            tau: tau.clone(),
            tower: tower.clone(),
        }),
    }
}

/// Q tensor pi: maps a (Q,X,*)-description to a (Q,T,*)-description by
/// pushing the inner carrier parts of the images through pi.
pub fn q_tensor_pi(
    pi: &FactorL2,
    _quter: &Level2Tree,
    xinner: &Level2Tree,
    tinner: &Level2Tree,
    d: &DescTQ,
) -> Option<DescTQ> {
    let push_img = |img: &DescQW| -> Option<DescQW> {
        Some(match img {
            DescQW::D1(n) => DescQW::D1(pi.apply1(n)?.clone()),
            DescQW::D2(qd, sigma) => DescQW::D2(pi.push_qdesc(tinner, qd)?, sigma.clone()),
        })
    };
    let _ = xinner;
    match d {
        DescTQ::D1(inner) => Some(DescTQ::D1(push_img(inner)?)),
        DescTQ::D2 { t: tp, tau, tower } => Some(DescTQ::D2 {
            t: tp.clone(),
            tau: tau.iter().map(|i| push_img(i)).collect::<Option<Vec<_>>>()?,
            tower: tower.clone(),
        }),
    }
}

/// The associativity pairing for (level <=2, level <=2, level-1): the two
/// enumerations in matching rank order. The pairing is the unique order
/// isomorphism.
pub fn assoc_l1(
    t: &Level2Tree,
    q: &Level2Tree,
    w: &Level1Tree,
) -> Result<Vec<(DescQW, DescQW)>, TreeError> {
    // side A: descriptions of (T tensor Q) with W
    let xrep = tensor_tq(t, q);
    let a: Vec<DescQW> = enum_desc_qw(&xrep.x, w)
        .into_iter()
        .filter(|d| !d.is_constant())
        .collect();
    // side B: descriptions of T with the level-1 tree Q tensor W
    let qw = crate::desc2::tensor_qw(q, w);
    let b: Vec<DescQW> = enum_desc_qw(t, &qw.s)
        .into_iter()
        .filter(|d| !d.is_constant())
        .collect();
    if a.len() != b.len() {
        return Err(TreeError::Other(format!(
            "associativity cardinality mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.into_iter().zip(b).collect())
}

/// The associativity pairing for three level <=2 trees: both tensor
/// representations produce the same canonical tree; per node the pair of
/// descriptions is returned (BK order of the common domain).
pub struct AssocL2 {
    pub n: Level2Tree,
    pub pairs1: Vec<(Node1, DescTQ, DescTQ)>,
    pub pairs2: Vec<(Node2, DescTQ, DescTQ)>,
}

pub fn assoc_l2(t: &Level2Tree, q: &Level2Tree, u: &Level2Tree) -> Result<AssocL2, TreeError> {
    let xrep = tensor_tq(t, q); // X = T tensor Q
    let mrep = tensor_tq(q, u); // M = Q tensor U
    let a = tensor_tq(&xrep.x, u); // (T tensor Q) tensor U
    let b = tensor_tq(t, &mrep.x); // T tensor (Q tensor U)
    if a.x != b.x {
        return Err(TreeError::Other(
            "associativity representations differ as trees".into(),
        ));
    }
    let mut pairs1 = Vec::new();
    for n in a.x.t1.iter() {
        let da = a.image(&DomNode::L1(n.clone())).unwrap().clone();
        let db = b.image(&DomNode::L1(n.clone())).unwrap().clone();
        pairs1.push((n.clone(), da, db));
    }
    let mut pairs2 = Vec::new();
    for n in a.x.dom2_nonroot() {
        let da = a.image(&DomNode::L2(n.clone())).unwrap().clone();
        let db = b.image(&DomNode::L2(n.clone())).unwrap().clone();
        pairs2.push((n.clone(), da, db));
    }
    Ok(AssocL2 {
        n: a.x,
        pairs1,
        pairs2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::fixtures;

    #[test]
    fn tensor_t22_q22_counts() {
        let t = fixtures::t22();
        let q = fixtures::q22();
        let rep = tensor_tq(&t, &q);
        assert_eq!(rep.x.t1.len(), 4, "level-1 part");
        assert_eq!(rep.x.dom2().count(), 156, "2-part with root");
        assert_eq!(rep.card(), 160);
        // per-length and per-degree counts of the §4.4 bookkeeping
        let mut by_len = std::collections::BTreeMap::new();
        let mut deg1_by_len = std::collections::BTreeMap::new();
        for n in rep.x.dom2() {
            *by_len.entry(n.len()).or_insert(0) += 1;
            if rep.x.degree2(n) == Some(1) {
                *deg1_by_len.entry(n.len()).or_insert(0) += 1;
            }
        }
        let lens: Vec<usize> = (0..=5).map(|l| *by_len.get(&l).unwrap_or(&0)).collect();
        assert_eq!(lens, vec![1, 12, 31, 52, 45, 15]);
        let degs: Vec<usize> = (0..=5)
            .map(|l| *deg1_by_len.get(&l).unwrap_or(&0))
            .collect();
        assert_eq!(degs, vec![1, 8, 29, 52, 45, 15]);
        assert!(rep.x.validate(true).is_empty(), "{:?}", rep.x.validate(true));
    }

    #[test]
    fn tensor_small_matches_unfiltered_oracle() {
        let t = fixtures::q21();
        let q = fixtures::q20();
        let all = enum_desc_tq(&t, &q);
        for d in &all {
            assert!(is_desc_tq(d, &t, &q), "{d:?}");
        }
        // order is strictly increasing
        for p in all.windows(2) {
            assert_eq!(prec_tq(&p[0], &p[1]), Ordering::Less);
        }
    }

    #[test]
    fn tensor_with_q0_is_isomorphic_to_t() {
        let t = fixtures::t22();
        let q0 = fixtures::q0();
        let rep = tensor_tq(&t, &q0);
        assert_eq!(rep.x.t1.len(), t.t1.len());
        assert_eq!(rep.x.dom2().count(), t.dom2().count());
        // entry structure carries over
        let mut by_entry_t: Vec<(usize, u8)> = t
            .dom2()
            .map(|n| (n.len(), t.degree2(n).unwrap()))
            .collect();
        let mut by_entry_x: Vec<(usize, u8)> = rep
            .x
            .dom2()
            .map(|n| (n.len(), rep.x.degree2(n).unwrap()))
            .collect();
        by_entry_t.sort();
        by_entry_x.sort();
        assert_eq!(by_entry_t, by_entry_x);
    }

    #[test]
    fn id_t_star_factors() {
        let t = fixtures::t22();
        let q0 = fixtures::q0();
        let (p1, p2) = id_t_star(&t);
        assert!(factor_check_xtq(&p1, &p2, &t, &t, &q0));
    }

    #[test]
    fn restriction_reproduces_parent_entries() {
        let t = fixtures::t22();
        let q = fixtures::q22();
        let rep = tensor_tq(&t, &q);
        for (node, d) in &rep.pi2 {
            if node.len() <= 1 {
                continue;
            }
            let parent = node[..node.len() - 1].to_vec();
            let wbar = rep.x.tree_at(&parent).unwrap();
            let r = restrict_tq_tower(d, &t, &q, wbar).unwrap();
            let expect = rep.image(&DomNode::L2(parent)).unwrap();
            assert_eq!(prec_tq(&r, expect), Ordering::Equal, "{node:?}");
        }
    }
}
