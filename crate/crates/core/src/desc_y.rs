//! The level-3 description calculus: descriptions of a level-3 tree, their
//! generalized forms with corners, (Y,T,Q)-descriptions, factoring of one
//! level-3 tree into another through a level <=2 tree, the tensor product,
//! and the shift relation.

use crate::analysis::{candidate_deltas, node_otype2, ucf_family, UcfStar};
use crate::desc2::{corner_cmp, CVal, DescQW, QDesc, QDescKind};
use crate::desc3::{enum_desc_tq, prec_tq, restrict_tq_tower, DescTQ, FactorL2};
use crate::tree::{
    bk1, bk_dom, Delta2, DomNode, Level1Tree, Level2Tree, Level3Tree, Node1, Node2, Node3,
    PartialLevel2, TowerL2, TreeError,
};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// A description of a level-3 tree: (r, Q, delta history).
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct RDesc {
    pub r: Node3,
    pub kind: QDescKind,
    pub tree: Level2Tree,
    pub deltas: Vec<Delta2>,
}

impl RDesc {
    pub fn disc(t: &Level3Tree, r: &Node3) -> Option<RDesc> {
        let tower = t.tower_at(r)?;
        Some(RDesc {
            r: r.clone(),
            kind: QDescKind::Discontinuous,
            tree: tower.tree,
            deltas: tower.deltas,
        })
    }

    /// All continuous descriptions over r (one per completion of its entry).
    pub fn conts(t: &Level3Tree, r: &Node3) -> Vec<RDesc> {
        let tower = match t.tower_at(r) {
            Some(t) => t,
            None => return Vec::new(),
        };
        let partial =
            PartialLevel2::new(tower.tree.clone(), tower.deltas.last().unwrap().clone());
        match partial.completions() {
            Ok(cs) => cs
                .into_iter()
                .map(|c| RDesc {
                    r: r.clone(),
                    kind: QDescKind::Continuous,
                    tree: c,
                    deltas: tower.deltas.clone(),
                })
                .collect(),
            Err(_) => Vec::new(),
        }
    }

    pub fn is_regular(&self) -> bool {
        self.kind != QDescKind::Continuous
    }

    /// The designator of the i-th branch delta (0-based).
    pub fn designator(&self, i: usize) -> Option<DomNode> {
        match &self.deltas[i] {
            Delta2::Deg1 { q } => Some(DomNode::L1(q.clone())),
            Delta2::Deg2 { q, .. } => Some(DomNode::L2(q.clone())),
            Delta2::Deg0 => None,
        }
    }
}

/// A generalized description: a description with a factor map of its tree
/// into another level <=2 tree; the constant is encoded by r = None.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct RDescGen {
    pub r: Option<RDesc>,
    pub pi: FactorL2,
    pub t: Level2Tree,
}

impl RDescGen {
    pub fn constant() -> Self {
        RDescGen {
            r: None,
            pi: FactorL2 {
                m1: Vec::new(),
                m2: Vec::new(),
            },
            t: Level2Tree::q0(),
        }
    }

    pub fn of(r: RDesc) -> Self {
        let pi = FactorL2::identity(&r.tree);
        let t = r.tree.clone();
        RDescGen { r: Some(r), pi, t }
    }
}

/// Is (pi, T) continuous at a designator over Q?
pub fn continuity_at(
    pi: &FactorL2,
    _q: &Level2Tree,
    t: &Level2Tree,
    d: &UcfStar,
) -> Result<bool, TreeError> {
    match d {
        UcfStar::CfOmega => Ok(true),
        UcfStar::D1(node) => {
            let img = pi
                .apply1(node)
                .ok_or_else(|| TreeError::NoSuchNode(format!("{node:?}")))?;
            let r = t.t1.rank(img).unwrap();
            if r == 0 {
                return Ok(true);
            }
            let pred = t.t1.node_at_rank(r - 1).unwrap().clone();
            Ok(pi.m1.iter().any(|(_, b)| *b == pred))
        }
        UcfStar::D2(qd) => {
            if qd.is_constant() {
                if t.t1.is_empty() {
                    return Ok(true);
                }
                let max = t.t1.iter().last().unwrap().clone();
                return Ok(pi.m1.iter().any(|(_, b)| *b == max));
            }
            match qd.kind {
                QDescKind::Discontinuous | QDescKind::Continuous => {
                    let img = pi
                        .apply2(&qd.q)
                        .ok_or_else(|| TreeError::NoSuchNode(format!("{:?}", qd.q)))?;
                    let parent = img[..img.len() - 1].to_vec();
                    let siblings = t.children2(&parent);
                    let below: Option<Node1> = siblings
                        .into_iter()
                        .filter(|a| bk1(a, &img[img.len() - 1]) == Ordering::Less)
                        .last();
                    match below {
                        None => Ok(true),
                        Some(a) => {
                            let node: Node2 =
                                parent.into_iter().chain([a]).collect();
                            Ok(pi.m2.iter().any(|(_, b)| *b == node))
                        }
                    }
                }
                QDescKind::Extended => {
                    let img = pi
                        .apply2(&qd.q)
                        .ok_or_else(|| TreeError::NoSuchNode(format!("{:?}", qd.q)))?;
                    let ch = t.children2(&img);
                    match ch.last() {
                        None => Ok(true),
                        Some(a) => {
                            let node: Node2 =
                                img.iter().cloned().chain([a.clone()]).collect();
                            Ok(pi.m2.iter().any(|(_, b)| *b == node))
                        }
                    }
                }
            }
        }
    }
}

/// The predecessor node in the target tree at a discontinuity point.
pub fn pred_node(
    pi: &FactorL2,
    q: &Level2Tree,
    t: &Level2Tree,
    d: &UcfStar,
) -> Result<DomNode, TreeError> {
    if continuity_at(pi, q, t, d)? {
        return Err(TreeError::Other("continuous at the designator".into()));
    }
    match d {
        UcfStar::CfOmega => Err(TreeError::Other(
            "cofinality omega has no predecessor".into(),
        )),
        UcfStar::D1(node) => {
            let img = pi.apply1(node).unwrap();
            let r = t.t1.rank(img).unwrap();
            Ok(DomNode::L1(t.t1.node_at_rank(r - 1).unwrap().clone()))
        }
        UcfStar::D2(qd) => {
            if qd.is_constant() {
                let max = t.t1.iter().last().unwrap().clone();
                return Ok(DomNode::L1(max));
            }
            match qd.kind {
                QDescKind::Discontinuous | QDescKind::Continuous => {
                    let img = pi.apply2(&qd.q).unwrap();
                    let parent = img[..img.len() - 1].to_vec();
                    let below = t
                        .children2(&parent)
                        .into_iter()
                        .filter(|a| bk1(a, &img[img.len() - 1]) == Ordering::Less)
                        .last()
                        .unwrap();
                    Ok(DomNode::L2(parent.into_iter().chain([below]).collect()))
                }
                QDescKind::Extended => {
                    let img = pi.apply2(&qd.q).unwrap();
                    let a = t.children2(&img).last().unwrap().clone();
                    Ok(DomNode::L2(img.into_iter().chain([a]).collect()))
                }
            }
        }
    }
}

/// The corner of a generalized description: node coordinates interleaved
/// with the order types of the factored designators.
pub fn corner3(a: &RDescGen) -> Result<Vec<CVal>, TreeError> {
    let rd = match &a.r {
        None => return Ok(Vec::new()),
        Some(rd) => rd,
    };
    let q = &rd.tree;
    let k = rd.r.len();
    let image_label = |dom: &DomNode| -> Result<crate::ord::UTerm, TreeError> {
        let img = match dom {
            DomNode::L1(n) => DomNode::L1(
                a.pi.apply1(n)
                    .ok_or_else(|| TreeError::NoSuchNode(format!("{n:?}")))?
                    .clone(),
            ),
            DomNode::L2(n) => DomNode::L2(
                a.pi.apply2(n)
                    .ok_or_else(|| TreeError::NoSuchNode(format!("{n:?}")))?,
            ),
        };
        node_otype2(&a.t, &img).ok_or_else(|| TreeError::Other("missing image label".into()))
    };
    let mut out = Vec::new();
    let (pairs, final_star): (usize, UcfStar) = match rd.kind {
        QDescKind::Continuous => {
            // pairs through r(k-2); the tail designator is the last
            // absorbed delta
            let star = match rd.designator(k - 1) {
                Some(d) => UcfStar::of_designator(&d, q),
                None => UcfStar::CfOmega,
            };
            (k.saturating_sub(1), star)
        }
        QDescKind::Discontinuous | QDescKind::Extended => {
            // pairs through r(k-1); the tail designator is the uniform
            // cofinality of the pending delta
            let fam = ucf_family(
                &tower_base(rd)?,
                rd.deltas.last().unwrap(),
            )?;
            (k, fam.star)
        }
    };
    for i in 0..pairs {
        out.push(CVal::Node(rd.r[i].clone()));
        if i + 1 < pairs {
            out.push(CVal::U(image_label(
                &rd.designator(i)
                    .ok_or_else(|| TreeError::Other("degree-0 delta inside a branch".into()))?,
            )?));
        }
    }
    if pairs >= 1 {
        // the label pair for the final printed coordinate
        if let Some(d) = rd.designator(pairs - 1) {
            if rd.kind != QDescKind::Continuous || pairs == k.saturating_sub(1) && pairs >= 1 {
                out.push(CVal::U(image_label(&d)?));
            }
        }
        // drop the label that was just pushed when it duplicates: rebuild
    }
    // rebuild cleanly: r(0), label(designator 0), r(1), ..., per the case
    out.clear();
    match rd.kind {
        QDescKind::Continuous => {
            for i in 0..k {
                out.push(CVal::Node(rd.r[i].clone()));
                if i + 1 < k {
                    out.push(CVal::U(image_label(
                        &rd.designator(i)
                            .ok_or_else(|| TreeError::Other("degree-0 inside branch".into()))?,
                    )?));
                }
            }
        }
        QDescKind::Discontinuous | QDescKind::Extended => {
            for i in 0..k {
                out.push(CVal::Node(rd.r[i].clone()));
                if let Some(d) = rd.designator(i) {
                    out.push(CVal::U(image_label(&d)?));
                } else if i + 1 < k {
                    return Err(TreeError::Other("degree-0 inside branch".into()));
                } else {
                    // degree-0 pending: tail is the omega marker
                    out.push(CVal::Int(-1));
                    return Ok(out);
                }
            }
        }
    }
    if continuity_at(&a.pi, q, &a.t, &final_star)? {
        out.push(CVal::Int(-1));
    } else {
        let p = pred_node(&a.pi, q, &a.t, &final_star)?;
        out.push(CVal::U(
            node_otype2(&a.t, &p)
                .ok_or_else(|| TreeError::Other("missing predecessor label".into()))?,
        ));
    }
    Ok(out)
}

/// The base tree in which the pending delta of a discontinuous description
/// lives (the tree before absorbing the last delta).
fn tower_base(rd: &RDesc) -> Result<Level2Tree, TreeError> {
    match rd.kind {
        QDescKind::Discontinuous => Ok(rd.tree.clone()),
        _ => Err(TreeError::Other("no pending delta".into())),
    }
}

pub fn prec3(a: &RDescGen, b: &RDescGen) -> Result<Ordering, TreeError> {
    Ok(corner_cmp(&corner3(a)?, &corner3(b)?))
}

pub fn sim3(a: &RDescGen, b: &RDescGen) -> Result<bool, TreeError> {
    Ok(prec3(a, b)? == Ordering::Equal)
}

// ---------------------------------------------------------------------------
// (Y,T,Q)-descriptions and the tensor product
// ---------------------------------------------------------------------------

/// A description of a level-3 tree into a level <=2 tree.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub enum DescYT {
    Constant,
    B {
        y: RDesc,
        pi1: Vec<(Node1, DescTQ)>,
        pi2: Vec<(Node2, DescTQ)>,
        /// The witness level <=2 tower (pending last).
        tower: TowerL2,
    },
}

impl DescYT {
    pub fn is_constant(&self) -> bool {
        matches!(self, DescYT::Constant)
    }

    pub fn image(&self, d: &DomNode) -> Option<&DescTQ> {
        match self {
            DescYT::Constant => None,
            DescYT::B { pi1, pi2, .. } => match d {
                DomNode::L1(n) => pi1.iter().find(|(m, _)| m == n).map(|(_, v)| v),
                DomNode::L2(n) => pi2.iter().find(|(m, _)| m == n).map(|(_, v)| v),
            },
        }
    }

    pub fn carrier(&self) -> Option<&RDesc> {
        match self {
            DescYT::Constant => None,
            DescYT::B { y, .. } => Some(y),
        }
    }

    pub fn tower(&self) -> Option<&TowerL2> {
        match self {
            DescYT::Constant => None,
            DescYT::B { tower, .. } => Some(tower),
        }
    }

    /// The corner: y-coordinates interleaved with the corners of the images
    /// of the branch designators.
    pub fn corner(&self) -> Vec<CVal> {
        match self {
            DescYT::Constant => Vec::new(),
            DescYT::B { y, .. } => {
                let mut out = Vec::new();
                let k = y.r.len();
                let imgs = match y.kind {
                    QDescKind::Continuous => k,
                    _ => k - 1,
                };
                for i in 0..k {
                    out.push(CVal::Node(y.r[i].clone()));
                    if i < imgs {
                        match y.designator(i).and_then(|d| self.image(&d).cloned()) {
                            Some(c) => out.push(CVal::Seq(c.corner())),
                            None => out.push(CVal::Int(-1)),
                        }
                    }
                }
                if y.kind == QDescKind::Continuous {
                    out.push(CVal::Int(-1));
                }
                out
            }
        }
    }
}

pub fn prec_yt(a: &DescYT, b: &DescYT) -> Ordering {
    corner_cmp(&a.corner(), &b.corner())
}

/// A representation of the tensor product of a level-3 tree with a
/// level <=2 tree.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize, Debug)]
pub struct TensorYT {
    pub r: Level3Tree,
    pub rho: Vec<(Node3, DescYT)>,
}

impl TensorYT {
    pub fn image(&self, n: &Node3) -> Option<&DescYT> {
        self.rho.iter().find(|(m, _)| m == n).map(|(_, d)| d)
    }
}

/// All carriers (descriptions of Y) usable in (Y,T,*)-descriptions.
fn carriers(y: &Level3Tree) -> Vec<RDesc> {
    let mut out = Vec::new();
    for r in y.dom().cloned().collect::<Vec<_>>() {
        out.push(RDesc::disc(y, &r).unwrap());
        if y.delta_at(&r).map(|d| d.degree()) != Some(0) {
            out.extend(RDesc::conts(y, &r));
        }
    }
    out
}

/// Enumerate the (Y,T,*)-descriptions over a fixed witness tower prefix
/// (tree q reached by the given absorbed deltas).
pub fn descs_over_tower(
    y: &Level3Tree,
    t: &Level2Tree,
    q: &Level2Tree,
    qdeltas: &[Delta2],
    cands: &[DescTQ],
    out: &mut Vec<DescYT>,
) {
    let targets: Vec<DomNode> = qdeltas
        .iter()
        .map(|d| match d {
            Delta2::Deg1 { q } => DomNode::L1(q.clone()),
            Delta2::Deg2 { q, .. } => DomNode::L2(q.clone()),
            Delta2::Deg0 => unreachable!("degree-0 deltas are never absorbed"),
        })
        .collect();
    for carrier in carriers(y) {
        let x = &carrier.tree;
        let mut dom: Vec<DomNode> = x.dom_pairs();
        dom.retain(|d| !matches!(d, DomNode::L2(n) if n.is_empty()));
        // per-node candidate lists: exact witness tower for 2-part nodes,
        // degree-1 images for level-1 nodes
        let mut lists: Vec<Vec<DescTQ>> = Vec::new();
        let mut feasible = true;
        for d in &dom {
            let list: Vec<DescTQ> = match d {
                DomNode::L1(_) => cands
                    .iter()
                    .filter(|c| matches!(c, DescTQ::D1(_)))
                    .cloned()
                    .collect(),
                DomNode::L2(n) => {
                    let xt = x.tower_at(n).unwrap();
                    cands
                        .iter()
                        .filter(|c| match c {
                            DescTQ::D2 { tower, .. } => {
                                tower.tree == xt.tree
                                    && tower.absorbed == xt.absorbed
                                    && tower.pending == xt.pending
                            }
                            _ => false,
                        })
                        .cloned()
                        .collect()
                }
            };
            if list.is_empty() {
                feasible = false;
                break;
            }
            lists.push(list);
        }
        if !feasible {
            continue;
        }
        let branch: Vec<DomNode> = (0..match carrier.kind {
            QDescKind::Discontinuous => carrier.deltas.len() - 1,
            _ => carrier.deltas.len(),
        })
            .map(|i| carrier.designator(i).expect("absorbed deltas have designators"))
            .collect();
        let mut assignment: Vec<DescTQ> = Vec::new();
        assign_pi(
            y, t, q, &carrier, &dom, &lists, &branch, &targets, &mut assignment, out,
        );
    }
}

#[allow(clippy::too_many_arguments)]
fn assign_pi(
    y: &Level3Tree,
    t: &Level2Tree,
    q: &Level2Tree,
    carrier: &RDesc,
    dom: &[DomNode],
    lists: &[Vec<DescTQ>],
    branch: &[DomNode],
    targets: &[DomNode],
    assignment: &mut Vec<DescTQ>,
    out: &mut Vec<DescYT>,
) {
    if assignment.len() == dom.len() {
        finish_desc(y, t, q, carrier, dom, branch, targets, assignment, out);
        return;
    }
    let i = assignment.len();
    for c in &lists[i] {
        if i > 0 && prec_tq(&assignment[i - 1], c) != Ordering::Less {
            continue;
        }
        assignment.push(c.clone());
        assign_pi(y, t, q, carrier, dom, lists, branch, targets, assignment, out);
        assignment.pop();
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_desc(
    y: &Level3Tree,
    t: &Level2Tree,
    q: &Level2Tree,
    carrier: &RDesc,
    dom: &[DomNode],
    branch: &[DomNode],
    targets: &[DomNode],
    assignment: &[DescTQ],
    out: &mut Vec<DescYT>,
) {
    let _ = y;
    let image_of = |d: &DomNode| -> Option<DescTQ> {
        dom.iter()
            .position(|e| e == d)
            .map(|i| assignment[i].clone())
    };
    // contraction clause
    let signs: Vec<Vec<DomNode>> = branch
        .iter()
        .map(|d| image_of(d).unwrap().sign())
        .collect();
    let (contr, _) = crate::desc2::contraction(&signs);
    if contr != *targets {
        if std::env::var("LTC_DBG").is_ok() {
            println!("reject contraction {:?} vs {:?}", contr, targets);
        }
        return;
    }
    // the continuity side clause for continuous carriers
    if carrier.kind == QDescKind::Continuous && !targets.is_empty() {
        let last = image_of(branch.last().unwrap()).unwrap();
        let mut signs2: Vec<Vec<DomNode>> = branch[..branch.len() - 1]
            .iter()
            .map(|d| image_of(d).unwrap().sign())
            .collect();
        signs2.push(last.sign_prefix());
        let (c2, _) = crate::desc2::contraction(&signs2);
        if !c2.contains(targets.last().unwrap()) {
            // the image at the final carrier node must be discontinuous
            let w = match &last {
                DescTQ::D2 { tower, .. } => tower.tree.clone(),
                DescTQ::D1(_) => Level1Tree::empty(),
            };
            if last.is_continuous(&w) {
                return;
            }
        }
    }
    // restriction coherence along the carrier branches
    for (i, d) in dom.iter().enumerate() {
        if let DomNode::L2(n) = d {
            if n.len() > 1 {
                let parent = n[..n.len() - 1].to_vec();
                let wbar = carrier.tree.tree_at(&parent).unwrap();
                let expect = image_of(&DomNode::L2(parent)).unwrap();
                match restrict_tq_tower(&assignment[i], t, q, wbar) {
                    Ok(r) => {
                        if prec_tq(&r, &expect) != Ordering::Equal {
                            return;
                        }
                    }
                    Err(_) => return,
                }
            }
        }
    }
    // uniform cofinality clause: compute the pending delta
    let pending = match witness_pending2(carrier, &image_of, t, q) {
        Ok(p) => p,
        Err(e) => {
            if std::env::var("LTC_DBG").is_ok() {
                println!("reject pending: {e}");
            }
            return;
        }
    };
    let mut pi1 = Vec::new();
    let mut pi2 = Vec::new();
    for (i, d) in dom.iter().enumerate() {
        match d {
            DomNode::L1(n) => pi1.push((n.clone(), assignment[i].clone())),
            DomNode::L2(n) => pi2.push((n.clone(), assignment[i].clone())),
        }
    }
    let mut deltas: Vec<Delta2> = targets
        .iter()
        .map(|d| designator_delta(q, d))
        .collect();
    deltas.push(pending);
    out.push(DescYT::B {
        y: carrier.clone(),
        pi1,
        pi2,
        tower: TowerL2 {
            tree: q.clone(),
            deltas,
            continuous: false,
        },
    });
}

/// Recover the delta that introduced a designator into the tower tree.
fn designator_delta(q: &Level2Tree, d: &DomNode) -> Delta2 {
    match d {
        DomNode::L1(n) => Delta2::Deg1 { q: n.clone() },
        DomNode::L2(n) => Delta2::Deg2 {
            q: n.clone(),
            tree: q.entry(n).expect("designator in tower tree").tree.clone(),
        },
    }
}

/// The pending delta of the witness tower per the uniform cofinality
/// matching clause.
fn witness_pending2(
    carrier: &RDesc,
    image_of: &dyn Fn(&DomNode) -> Option<DescTQ>,
    t: &Level2Tree,
    q: &Level2Tree,
) -> Result<Delta2, TreeError> {
    let star: UcfStar = match carrier.kind {
        QDescKind::Discontinuous => {
            let last = carrier.deltas.last().unwrap();
            if last.degree() == 0 {
                return Ok(Delta2::Deg0);
            }
            ucf_family(&carrier.tree, last)?.star
        }
        QDescKind::Continuous => match carrier.deltas.last().unwrap() {
            Delta2::Deg1 { q: n } => UcfStar::D1(n.clone()),
            Delta2::Deg2 { q: n, .. } => {
                UcfStar::of_designator(&DomNode::L2(n.clone()), &carrier.tree)
            }
            Delta2::Deg0 => return Ok(Delta2::Deg0),
        },
        QDescKind::Extended => return Err(TreeError::Other("extended carrier".into())),
    };
    let target: Option<UcfStar> = match &star {
        UcfStar::CfOmega => None,
        UcfStar::D1(n) => {
            let img = image_of(&DomNode::L1(n.clone()))
                .ok_or_else(|| TreeError::Other("missing image".into()))?;
            desc_tq_ucf(&img, t, q, false)?
        }
        UcfStar::D2(qd) => {
            // the root maps to the constant by convention
            let img = if qd.q.is_empty() {
                DescTQ::constant()
            } else {
                image_of(&DomNode::L2(qd.q.clone()))
                    .ok_or_else(|| TreeError::Other("missing image".into()))?
            };
            let plus = qd.kind == QDescKind::Extended;
            desc_tq_ucf(&img, t, q, plus)?
        }
    };
    match target {
        None => Ok(Delta2::Deg0),
        Some(u) => {
            for d in candidate_deltas(q) {
                if d.degree() == 0 {
                    continue;
                }
                let fam = ucf_family(q, &d)?;
                if std::env::var("LTC_DBG").is_ok() {
                    println!("  cand {:?} star {:?}", d, fam.star);
                }
                if fam.star == u {
                    return Ok(d);
                }
            }
            if std::env::var("LTC_DBG").is_ok() {
                println!("  target was {u:?}");
            }
            Err(TreeError::Other(
                "no pending delta with the required cofinality".into(),
            ))
        }
    }
}

/// The uniform cofinality attribute of a (T,Q,*)-description as a
/// designator over Q (None = cofinality omega); plus-form uses the
/// completed witness tower.
pub fn desc_tq_ucf(
    c: &DescTQ,
    _t: &Level2Tree,
    q: &Level2Tree,
    plus: bool,
) -> Result<Option<UcfStar>, TreeError> {
    match c {
        DescTQ::D1(inner) => Ok(inner.ucf_w().map(|w| {
            if w.is_empty() {
                UcfStar::D2(QDesc {
                    q: Vec::new(),
                    kind: QDescKind::Discontinuous,
                    tree: Level1Tree::empty(),
                    branch: Vec::new(),
                    pending: Some(vec![0]),
                })
            } else {
                UcfStar::D1(w)
            }
        })),
        DescTQ::D2 { t: tp, tower, .. } => {
            let star = match tp.tower_ucf() {
                None => return Ok(None),
                Some(s) => s,
            };
            let img = if star.is_empty() {
                DescQW::constant()
            } else {
                c.tau_at(&star)
                    .ok_or_else(|| TreeError::Other("missing tau image".into()))?
            };
            let w = if plus {
                match &tower.pending {
                    Some(p) => tower.tree.union_with(p),
                    None => tower.tree.clone(),
                }
            } else {
                tower.tree.clone()
            };
            match &img {
                DescQW::D1(n) => Ok(Some(UcfStar::D1(n.clone()))),
                DescQW::D2(..) => {
                    let qd = img
                        .ucf_star_w(q, &w)
                        .ok_or_else(|| TreeError::Other("no star ucf".into()))?;
                    Ok(Some(UcfStar::D2(qd)))
                }
            }
        }
    }
}

/// The restriction of a (Y,T,*)-description to a shorter witness tower: the
/// immediate predecessor characterization, via the clause construction.
pub fn restrict_yt(
    b: &DescYT,
    y: &Level3Tree,
    t: &Level2Tree,
    qbar: &Level2Tree,
    qbar_deltas: &[Delta2],
) -> Result<DescYT, TreeError> {
    let carrier = match b {
        DescYT::Constant => {
            return Err(TreeError::Other("the constant does not restrict".into()))
        }
        DescYT::B { y, .. } => y,
    };
    let small = enum_desc_tq(t, qbar);
    // least branch index (0-based) whose image leaves the smaller set
    let branch_len = match carrier.kind {
        QDescKind::Discontinuous => carrier.deltas.len() - 1,
        _ => carrier.deltas.len(),
    };
    let mut l0 = None;
    for i in 0..branch_len {
        let d = carrier.designator(i).unwrap();
        let img = b.image(&d).unwrap();
        if !small.contains(img) {
            l0 = Some(i);
            break;
        }
    }
    let l0 = l0.ok_or_else(|| TreeError::Other("already over the smaller tower".into()))?;
    let d_l = carrier.designator(l0).unwrap();
    let img_l = b.image(&d_l).unwrap();
    let c_restricted = restrict_tq_desc(img_l, t, qbar, &small)?;
    // the prefix keeps the node whose delta has the departing image
    let r_prefix: Node3 = carrier.r[..l0 + 1].to_vec();
    let prefix_tree = if r_prefix.is_empty() {
        Level2Tree::q0()
    } else {
        y.tree_at(&r_prefix)
            .cloned()
            .ok_or_else(|| TreeError::Other("missing prefix tree".into()))?
    };
    // the comparison image: the image of the uniform cofinality designator
    // of the prefix tower (the root designator maps to the constant)
    let star = ucf_family(&prefix_tree, &carrier.deltas[l0])?.star;
    let cmp_img: Option<DescTQ> = match &star {
        UcfStar::CfOmega => None,
        UcfStar::D1(n) => b.image(&DomNode::L1(n.clone())).cloned(),
        UcfStar::D2(qd) => {
            if qd.q.is_empty() {
                Some(DescTQ::constant())
            } else {
                b.image(&DomNode::L2(qd.q.clone())).cloned()
            }
        }
    };
    let matches_ucf = cmp_img
        .map(|c| prec_tq(&c, &c_restricted) == Ordering::Equal)
        .unwrap_or(false);
    if matches_ucf {
        // plain prefix: the discontinuous description of the prefix node
        let newcar = RDesc::disc(y, &r_prefix)
            .ok_or_else(|| TreeError::Other("missing prefix carrier".into()))?;
        rebuild_restricted(b, t, qbar, qbar_deltas, newcar, None)
    } else {
        // continuous prefix: the delta absorbed through the completion the
        // carrier actually passed, the departing image replaced
        let completion = if l0 + 1 < carrier.r.len() {
            y.tree_at(&carrier.r[..l0 + 2].to_vec())
                .cloned()
                .ok_or_else(|| TreeError::Other("missing carrier step".into()))?
        } else {
            carrier.tree.clone()
        };
        let cont = RDesc::conts(y, &r_prefix)
            .into_iter()
            .find(|c| c.tree == completion)
            .ok_or_else(|| TreeError::Other("missing continuous prefix".into()))?;
        rebuild_restricted(b, t, qbar, qbar_deltas, cont, Some((d_l, c_restricted)))
    }
}

fn restrict_tq_desc(
    c: &DescTQ,
    _t: &Level2Tree,
    _qbar: &Level2Tree,
    small: &[DescTQ],
) -> Result<DescTQ, TreeError> {
    small
        .iter()
        .filter(|d| prec_tq(c, d) == Ordering::Less)
        .min_by(|a, b| prec_tq(a, b))
        .cloned()
        .ok_or_else(|| TreeError::Other("no description above the input".into()))
}

fn rebuild_restricted(
    b: &DescYT,
    t: &Level2Tree,
    qbar: &Level2Tree,
    qbar_deltas: &[Delta2],
    newcar: RDesc,
    extra: Option<(DomNode, DescTQ)>,
) -> Result<DescYT, TreeError> {
    let x = &newcar.tree;
    let lookup = |d: &DomNode| -> Option<DescTQ> {
        if let Some((at, img)) = &extra {
            if at == d {
                return Some(img.clone());
            }
        }
        b.image(d).cloned()
    };
    let mut pi1 = Vec::new();
    let mut pi2 = Vec::new();
    for n in x.t1.iter() {
        let img = lookup(&DomNode::L1(n.clone()))
            .ok_or_else(|| TreeError::Other("missing restricted image".into()))?;
        pi1.push((n.clone(), img));
    }
    for n in x.dom2_nonroot().cloned().collect::<Vec<_>>() {
        let img = lookup(&DomNode::L2(n.clone()))
            .ok_or_else(|| TreeError::Other("missing restricted image".into()))?;
        pi2.push((n.clone(), img));
    }
    let image_of = |d: &DomNode| -> Option<DescTQ> {
        match d {
            DomNode::L1(n) => pi1.iter().find(|(m, _)| m == n).map(|(_, v)| v.clone()),
            DomNode::L2(n) => pi2.iter().find(|(m, _)| m == n).map(|(_, v)| v.clone()),
        }
    };
    let pending = witness_pending2(&newcar, &image_of, t, qbar)?;
    let mut deltas = qbar_deltas.to_vec();
    deltas.push(pending);
    Ok(DescYT::B {
        y: newcar,
        pi1,
        pi2,
        tower: TowerL2 {
            tree: qbar.clone(),
            deltas,
            continuous: false,
        },
    })
}

/// Tensor product of a level-3 tree with a level <=2 tree, built layer by
/// layer over the witness towers.
pub fn tensor_yt(y: &Level3Tree, t: &Level2Tree) -> Result<TensorYT, TreeError> {
    // layer 1: towers with a single pending delta over the one-node tree
    let q0 = Level2Tree::q0();
    let cands0 = enum_desc_tq(t, &q0);
    let cands0: Vec<DescTQ> = cands0.into_iter().filter(|d| !d.is_constant()).collect();
    let mut layer: Vec<DescYT> = Vec::new();
    descs_over_tower(y, t, &q0, &[], &cands0, &mut layer);
    layer.sort_by(prec_yt);
    let mut entries: Vec<(Node3, PartialLevel2)> = Vec::new();
    let mut rho: Vec<(Node3, DescYT)> = Vec::new();
    let mut named: Vec<(Node3, DescYT, Level2Tree, Vec<Delta2>)> = Vec::new();
    for (i, d) in layer.iter().enumerate() {
        let name: Node3 = vec![vec![i as u32]];
        let tower = d.tower().unwrap().clone();
        entries.push((
            name.clone(),
            PartialLevel2::new(tower.tree.clone(), tower.deltas.last().unwrap().clone()),
        ));
        rho.push((name.clone(), d.clone()));
        named.push((name, d.clone(), tower.tree.clone(), tower.deltas.clone()));
    }
    // deeper layers
    let mut frontier = named;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (pname, pdesc, ptree, pdeltas) in &frontier {
            let pending = pdeltas.last().unwrap().clone();
            if pending.degree() == 0 {
                continue;
            }
            let partial = PartialLevel2::new(ptree.clone(), pending.clone());
            for completion in partial.completions()? {
                let cands = enum_desc_tq(t, &completion);
                let cands: Vec<DescTQ> =
                    cands.into_iter().filter(|d| !d.is_constant()).collect();
                let mut found = Vec::new();
                let absorbed: Vec<Delta2> = pdeltas.clone();
                descs_over_tower(y, t, &completion, &absorbed, &cands, &mut found);
                found.sort_by(prec_yt);
                // keep the ones restricting to the parent
                let mut children = Vec::new();
                for f in found {
                    match restrict_yt(&f, y, t, ptree, &pdeltas[..pdeltas.len() - 1]) {
                        Ok(r) => {
                            if prec_yt(&r, pdesc) == Ordering::Equal {
                                children.push(f);
                            }
                        }
                        Err(_) => {}
                    }
                }
                for (i, c) in children.into_iter().enumerate() {
                    let mut name = pname.clone();
                    // component indices continue across completions
                    let prev = entries
                        .iter()
                        .filter(|(n, _)| n.len() == pname.len() + 1 && n[..pname.len()] == pname[..])
                        .count() as u32;
                    let _ = i;
                    name.push(vec![prev]);
                    let tower = c.tower().unwrap().clone();
                    entries.push((
                        name.clone(),
                        PartialLevel2::new(
                            tower.tree.clone(),
                            tower.deltas.last().unwrap().clone(),
                        ),
                    ));
                    rho.push((name.clone(), c.clone()));
                    next.push((name, c, tower.tree.clone(), tower.deltas.clone()));
                }
            }
        }
        frontier = next;
    }
    Ok(TensorYT {
        r: Level3Tree::from_entries(entries),
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::fixtures;

    #[test]
    fn tensor_r2_q21_shape() {
        // the level-3 tensor of the degree-2 singleton with the deep
        // two-node tree has six entries
        let y = fixtures::rd(2);
        let t = fixtures::q21();
        let rep = tensor_yt(&y, &t).unwrap();
        assert_eq!(rep.r.len(), 6, "{:?}", rep.r.dom().collect::<Vec<_>>());
    }

    #[test]
    fn tensor_y23_t23_count() {
        let y = fixtures::y23();
        let t = fixtures::t23();
        let rep = tensor_yt(&y, &t).unwrap();
        assert_eq!(rep.r.len(), 147);
        assert!(rep.r.validate(true).is_empty(), "{:?}", rep.r.validate(true));
    }
}
