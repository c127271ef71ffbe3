//! The ordinal side of the calculus: canonical order-type labels of tree
//! nodes, the analysis of an order type over a base tree (signature,
//! approximation sequence, induced tower, cofinality), and finite fragments
//! of the universal level-3 tree.

use crate::ord::{cnf_add, cnf_mul, hat, unhat, CnfOrdinal, Exp, UTerm};
use crate::tree::{
    bk1, Delta2, DomNode, Level1Tree, Level2Tree, Level3Tree, Node1, Node2, Node3,
    PartialLevel2, TowerL2, TreeError,
};
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// arithmetic helpers on the u-scale
// ---------------------------------------------------------------------------

/// u_n as a term: the preimage exponent omega^(n-1).
fn u_exp(n: u32) -> Exp {
    assert!(n >= 1);
    Exp::omega_pow(n - 1)
}

/// The preimage-side image of a term list under a seed-index substitution:
/// each factor u_c becomes u_{sub(c)}; omega factors stay.
fn reseat_exp(e: &Exp, sub: &dyn Fn(u32) -> u32) -> Exp {
    if e.is_zero() {
        return e.clone();
    }
    // exponent eta = sum omega^n * c encodes factors u_{n+1}^c
    let mut out = Exp::zero();
    for &(n, c) in &e.0 {
        let m = sub(n + 1) - 1;
        out = out.add(&Exp(vec![(m, c)]));
    }
    out
}

/// j applied to a u-term value: substitute seed indices.
pub fn push_value(v: &UTerm, sub: &dyn Fn(u32) -> u32) -> UTerm {
    let xi = unhat(v);
    let terms: Vec<Exp> = xi.0.iter().map(|e| reseat_exp(e, sub)).collect();
    hat(&CnfOrdinal(terms))
}

/// sup of the j-image below a value: j applied to every proper initial part,
/// with the last factor of the last term lowered by the gap rule: the
/// supremum of j over values below u_c is u_{sub(c-1)+1}.
pub fn push_sup(v: &UTerm, sub: &dyn Fn(u32) -> u32) -> UTerm {
    let xi = unhat(v);
    if xi.is_zero() {
        return UTerm::zero();
    }
    let mut terms: Vec<Exp> = xi.0[..xi.0.len() - 1]
        .iter()
        .map(|e| reseat_exp(e, sub))
        .collect();
    let last = &xi.0[xi.0.len() - 1];
    if last.is_zero() {
        // successor part: sup of j below a successor drops the point
        return hat(&CnfOrdinal(terms));
    }
    // last term u_{c_1}...u_{c_l}: j(prefix factors) * u_{sub(c_l - 1) + 1}
    let (n_last, c_last) = *last.0.last().unwrap();
    let c = n_last + 1; // u-index of the final factor
    let mut prefix = Exp(last.0[..last.0.len() - 1].to_vec());
    if c_last > 1 {
        prefix = prefix.add(&Exp(vec![(n_last, c_last - 1)]));
    }
    let prefix = reseat_exp(&prefix, sub);
    // sup of the image below u_c is u_{sub(c-1)+1}, where sub(0) = 0
    let bottom = if c == 1 { 0 } else { sub(c - 1) };
    let newterm = prefix.add(&u_exp(bottom + 1));
    let mut s = CnfOrdinal(terms);
    s = cnf_add(&s, &CnfOrdinal(vec![newterm]));
    hat(&s)
}

/// The least value of the form (multiple of u_scale) strictly above v,
/// measured at the leading-term level: round v up to the next u_scale block.
fn round_up_to_scale(v: &UTerm, scale: u32) -> UTerm {
    let unit = CnfOrdinal::omega_pow(u_exp(scale));
    let xi = unhat(v);
    if xi.is_zero() {
        return hat(&unit);
    }
    // keep the terms >= the unit scale, then add one unit
    let keep: Vec<Exp> = xi
        .0
        .iter()
        .filter(|e| e.cmp_ord(&u_exp(scale)) != std::cmp::Ordering::Less)
        .cloned()
        .collect();
    hat(&cnf_add(&CnfOrdinal(keep), &unit))
}

/// Round up to the scale, keeping the value when it is already aligned.
fn round_up_inclusive(v: &UTerm, scale: u32) -> UTerm {
    let xi = unhat(v);
    let trailing_small = xi
        .0
        .last()
        .map(|x| x.cmp_ord(&u_exp(scale)) == std::cmp::Ordering::Less)
        .unwrap_or(true);
    if trailing_small {
        round_up_to_scale(v, scale)
    } else {
        v.clone()
    }
}

fn add_u(v: &UTerm, n: u32) -> UTerm {
    v.add(&UTerm::u(n))
}

fn add_omega(v: &UTerm) -> UTerm {
    v.add(&UTerm::omega())
}

// ---------------------------------------------------------------------------
// canonical labels of a level <=2 tree
// ---------------------------------------------------------------------------

/// Canonical order-type labels of the nodes of a level <=2 tree: the minimal
/// tuple respecting the tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels2 {
    pub one: Vec<(Node1, UTerm)>,
    pub two: Vec<(Node2, UTerm)>,
}

impl Labels2 {
    pub fn get(&self, d: &DomNode) -> Option<&UTerm> {
        match d {
            DomNode::L1(n) => self.one.iter().find(|(m, _)| m == n).map(|(_, v)| v),
            DomNode::L2(n) => self.two.iter().find(|(m, _)| m == n).map(|(_, v)| v),
        }
    }
}

pub fn labels2(q: &Level2Tree) -> Labels2 {
    let one = q
        .t1
        .iter()
        .enumerate()
        .map(|(k, n)| (n.clone(), hat(&CnfOrdinal::nat(k as u64 + 1))))
        .collect();
    let mut two: Vec<(Node2, UTerm)> = vec![(Vec::new(), UTerm::u(1))];
    label2_children(q, &Vec::new(), &UTerm::u(1), &mut two);
    Labels2 { one, two }
}

fn label2_children(
    q: &Level2Tree,
    parent: &Node2,
    parent_label: &UTerm,
    out: &mut Vec<(Node2, UTerm)>,
) {
    let children = q.children2(parent);
    if children.is_empty() {
        return;
    }
    let entry = q.entry(parent).expect("parent entry");
    let p = entry.node.clone().expect("children imply degree 1");
    let pplus = entry.tree.union_with(&p);
    let delta_scale = pplus.rank(&p).unwrap() as u32 + 1;
    // reseat map between the parent carrier and the completion
    let sub = seed_sub(&entry.tree, &pplus);
    let start = if parent.is_empty() {
        add_u(parent_label, delta_scale)
    } else {
        push_sup(parent_label, &sub)
    };
    for (i, a) in children.iter().enumerate() {
        let child: Node2 = parent.iter().cloned().chain([a.clone()]).collect();
        let mut lab = start.clone();
        for _ in 0..i {
            lab = add_u(&lab, delta_scale);
        }
        if q.degree2(&child) == Some(0) {
            lab = add_omega(&lab);
        }
        out.push((child.clone(), lab.clone()));
        label2_children(q, &child, &lab, out);
    }
}

/// Seed index substitution induced by the inclusion of one level-1 tree in
/// another: seed k of the small tree maps to the seed of the same node in
/// the big tree.
fn seed_sub(small: &Level1Tree, big: &Level1Tree) -> impl Fn(u32) -> u32 {
    let map: Vec<u32> = small
        .iter()
        .map(|n| big.rank(n).expect("inclusion of carriers") as u32 + 1)
        .collect();
    move |k: u32| {
        if k == 0 {
            0
        } else {
            map.get(k as usize - 1).copied().unwrap_or_else(|| {
                // indices beyond the small carrier keep their distance above
                let extra = k - small_len_of(&map);
                big_len_of(&map) + extra
            })
        }
    }
}

fn small_len_of(map: &[u32]) -> u32 {
    map.len() as u32
}

fn big_len_of(map: &[u32]) -> u32 {
    map.iter().copied().max().unwrap_or(0)
}

/// The order type assigned to a node of a level <=2 tree.
pub fn node_otype2(q: &Level2Tree, d: &DomNode) -> Option<UTerm> {
    labels2(q).get(d).cloned()
}

// ---------------------------------------------------------------------------
// canonical labels of a level-3 tree
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels3 {
    pub nodes: Vec<(Node3, UTerm)>,
    /// The order type of the whole representation.
    pub root: UTerm,
}

impl Labels3 {
    pub fn get(&self, r: &Node3) -> Option<&UTerm> {
        self.nodes.iter().find(|(m, _)| m == r).map(|(_, v)| v)
    }
}

/// The widest carrier scale appearing in the entry of a node: bounds the
/// closure of its cluster.
fn entry_scale(e: &PartialLevel2) -> u32 {
    let mut m = 1;
    for q in e.base.dom2() {
        let entry = e.base.entry(q).unwrap();
        let mut s = entry.tree.len();
        if entry.node.is_some() {
            s += 1;
        }
        m = m.max(s);
    }
    if let Delta2::Deg2 { tree, .. } = &e.delta {
        m = m.max(tree.len() + 1);
    }
    m as u32
}

pub fn labels3(r: &Level3Tree) -> Labels3 {
    let mut nodes = Vec::new();
    let (cursor, _) = label3_children(r, &Vec::new(), &(UTerm::zero(), false), &mut nodes);
    Labels3 {
        nodes,
        root: cursor,
    }
}

/// Assign labels to the children of `parent`, returning the closure of the
/// whole region (the supremum of every cluster).
fn label3_children(
    r: &Level3Tree,
    parent: &Node3,
    start: &(UTerm, bool),
    out: &mut Vec<(Node3, UTerm)>,
) -> (UTerm, bool) {
    let children = r.children(parent);
    let mut cursor = start.clone();
    for a in children {
        let child: Node3 = parent.iter().cloned().chain([a.clone()]).collect();
        let e = r.entry(&child).unwrap();
        let lab = step_label(&cursor, &e.delta);
        out.push((child.clone(), lab.clone()));
        // subtree labels live above; their closure advances the cursor
        let (sub_close, _) = label3_children(r, &child, &(lab.clone(), true), out);
        let scale = entry_scale(e);
        cursor = if r.children(&child).is_empty() {
            (sub_close.max(lab.clone()), true)
        } else {
            // the instances of the subtree sweep a full carrier scale
            (
                round_up_inclusive(&sub_close.max(lab.clone()), scale + 1),
                false,
            )
        };
    }
    cursor
}

/// The least admissible label of the given delta class at or above the
/// cursor; attained cursors (labels) force a strict step.
fn step_label(cursor: &(UTerm, bool), delta: &Delta2) -> UTerm {
    let (v, attained) = cursor;
    match delta {
        Delta2::Deg0 => add_omega(v),
        Delta2::Deg1 { .. } => {
            let xi = unhat(v);
            let keep: Vec<Exp> = xi
                .0
                .iter()
                .filter(|x| x.cmp_ord(&u_exp(1)) != std::cmp::Ordering::Less)
                .cloned()
                .collect();
            hat(&cnf_add(&CnfOrdinal(keep), &CnfOrdinal::omega_pow(u_exp(1))))
        }
        Delta2::Deg2 { tree, .. } => {
            let scale = tree.len() as u32 + 1;
            let xi = unhat(v);
            let trailing_small = xi
                .0
                .last()
                .map(|x| x.cmp_ord(&u_exp(scale)) == std::cmp::Ordering::Less)
                .unwrap_or(true);
            if !attained && !trailing_small {
                v.clone()
            } else {
                round_up_to_scale(v, scale)
            }
        }
    }
}

pub fn node_otype3(r: &Level3Tree, node: Option<&Node3>) -> Option<UTerm> {
    let l = labels3(r);
    match node {
        None => Some(l.root),
        Some(n) => l.get(n).cloned(),
    }
}

// ---------------------------------------------------------------------------
// analysis of an order type over a base tree
// ---------------------------------------------------------------------------

/// The analysis of an order type relative to a base tree: the branch of the
/// universal tree it lives on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Analysis {
    /// The induced potential partial level <=2 tower.
    pub tower: TowerL2,
    /// The approximation sequence (hat images of the partial sums).
    pub approx: Vec<UTerm>,
    /// Continuity: true when the value is the supremum of its proper
    /// approximations (no fresh final delta).
    pub continuous: bool,
    /// Cofinality tag: 0, 1 or 2.
    pub cf: u8,
}

/// The cofinality tag of a u-term value, read from the last factor of the
/// last term of its preimage.
pub fn cf_tag(u: &UTerm) -> u8 {
    let xi = unhat(u);
    match xi.0.last() {
        None => 0,
        Some(e) if e.is_zero() => 0,
        Some(e) => {
            let (n, _) = *e.0.last().unwrap();
            if n == 0 {
                1
            } else {
                2
            }
        }
    }
}

/// Legal one-step deltas over a base tree, one candidate per carrier shape.
pub fn candidate_deltas(base: &Level2Tree) -> Vec<Delta2> {
    let mut out = vec![Delta2::Deg0];
    for q in base.t1.regular_extensions() {
        out.push(Delta2::Deg1 { q });
    }
    for n in base.dom2().cloned().collect::<Vec<_>>() {
        let e = base.entry(&n).unwrap();
        if let Some(p) = &e.node {
            // fresh children of n: the components at n form a level-1
            // tree; any regular extension of it names a new dimension
            let comp_tree = Level1Tree::from_nodes(base.children2(&n));
            for a in comp_tree.regular_extensions() {
                let mut q = n.clone();
                q.push(a);
                out.push(Delta2::Deg2 {
                    q,
                    tree: e.tree.union_with(p),
                });
            }
        }
    }
    out
}

/// Analysis of an order type over the one-node base tree: the branch of
/// the universal tree reaching the value, found by greedy division (largest
/// admissible step at each point, completions chosen by one-step lookahead).
pub fn analyze(u: &UTerm) -> Result<Analysis, TreeError> {
    let xi = unhat(u);
    if xi.is_zero() {
        return Err(TreeError::Other("analysis requires a limit order type".into()));
    }
    let mut base = Level2Tree::q0();
    let mut deltas: Vec<Delta2> = Vec::new();
    let mut approx: Vec<UTerm> = Vec::new();
    for _depth in 0..24 {
        let mut best: Option<(Delta2, UTerm)> = None;
        for d in candidate_deltas(&base) {
            let t = TowerL2 {
                tree: base.clone(),
                deltas: deltas.iter().cloned().chain([d.clone()]).collect(),
                continuous: false,
            };
            let v = match ord_of_tower(&t) {
                Ok(v) => v,
                Err(_) => continue,
            };
            if v > *u {
                continue;
            }
            if best.as_ref().map_or(true, |(_, b)| v > *b) {
                best = Some((d, v));
            }
        }
        let (d, v) = best.ok_or_else(|| {
            TreeError::Other(format!("no admissible division step toward {u}"))
        })?;
        deltas.push(d.clone());
        approx.push(v.clone());
        if v == *u {
            return Ok(Analysis {
                tower: TowerL2 {
                    tree: base,
                    deltas,
                    continuous: false,
                },
                approx,
                continuous: false,
                cf: cf_tag(u),
            });
        }
        // choose the completion allowing the largest next step below u;
        // on value ties, a step of cofinality class 2 prefers the
        // continuing component and lower classes prefer the closed one
        let partial = PartialLevel2::new(base.clone(), d.clone());
        let completions = partial.completions()?;
        let dq = match &d {
            Delta2::Deg2 { q, .. } => Some(q.clone()),
            _ => None,
        };
        let mut chosen: Option<(Level2Tree, UTerm, bool)> = None;
        for c in completions {
            let continuing = dq
                .as_ref()
                .map(|q| c.node_at(q).map_or(false, |n| n.is_some()))
                .unwrap_or(false);
            let mut cbest: Option<UTerm> = None;
            for d2 in candidate_deltas(&c) {
                let t = TowerL2 {
                    tree: c.clone(),
                    deltas: deltas.iter().cloned().chain([d2]).collect(),
                    continuous: false,
                };
                if let Ok(v) = ord_of_tower(&t) {
                    if v <= *u && cbest.as_ref().map_or(true, |b| v > *b) {
                        cbest = Some(v);
                    }
                }
            }
            if let Some(v) = cbest {
                let better = match &chosen {
                    None => true,
                    Some((_, b, bc)) => {
                        v > *b
                            || (v == *b && {
                                let want_continue = cf_tag(&v) == 2;
                                continuing == want_continue && *bc != want_continue
                            })
                    }
                };
                if better {
                    chosen = Some((c, v, continuing));
                }
            }
        }
        base = chosen
            .ok_or_else(|| TreeError::Other(format!("division of {u} stalls")))?
            .0;
    }
    Err(TreeError::Other(format!("division of {u} exceeds the depth bound")))
}

/// Inverse direction: the order type of a branch tower, computed by
/// building the one-branch tree and labeling it.
pub fn ord_of_tower(t: &TowerL2) -> Result<UTerm, TreeError> {
    if t.deltas.is_empty() || t.continuous {
        return Err(TreeError::Other(
            "order types attach to pending towers".into(),
        ));
    }
    // build the one-branch level-3 tree realizing the tower
    let mut entries = Vec::new();
    let mut base = Level2Tree::q0();
    let mut node: Node3 = Vec::new();
    for (i, d) in t.deltas.iter().enumerate() {
        node.push(vec![0]);
        entries.push((node.clone(), PartialLevel2::new(base.clone(), d.clone())));
        if i + 1 < t.deltas.len() {
            let partial = PartialLevel2::new(base.clone(), d.clone());
            let completions = partial.completions()?;
            base = completions
                .into_iter()
                .find(|c| c.is_subtree_of(&t.tree))
                .ok_or_else(|| {
                    TreeError::Other("tower tree not reachable from its deltas".into())
                })?;
        }
    }
    let tree = Level3Tree::from_entries(entries);
    let labels = labels3(&tree);
    Ok(labels.get(&node).unwrap().clone())
}

/// The tower induced by an order type at a base (default the one-node
/// tree): the analysis tower.
pub fn tower_of_ord(u: &UTerm) -> Result<TowerL2, TreeError> {
    Ok(analyze(u)?.tower)
}

/// The unique extension of the given branch prefix whose order type is u:
/// the division of u relative to the base reached by the prefix. Searches
/// one-step extensions (the prefix must be a replayable pending tower or
/// empty).
pub fn tower_of_ord_at(u: &UTerm, prefix: &TowerL2) -> Result<TowerL2, TreeError> {
    // base reached after absorbing the prefix
    let mut base = Level2Tree::q0();
    for d in &prefix.deltas {
        let partial = PartialLevel2::new(base.clone(), d.clone());
        let cs = partial.completions()?;
        base = cs
            .into_iter()
            .find(|c| c.is_subtree_of(&prefix.tree) || *c == prefix.tree)
            .ok_or_else(|| TreeError::Other("prefix tower not replayable".into()))?;
    }
    for d in candidate_deltas(&base) {
        let t = TowerL2 {
            tree: base.clone(),
            deltas: prefix
                .deltas
                .iter()
                .cloned()
                .chain([d.clone()])
                .collect(),
            continuous: false,
        };
        if let Ok(v) = ord_of_tower(&t) {
            if v == *u {
                return Ok(t);
            }
        }
    }
    Err(TreeError::Other(format!(
        "no one-step division of {u} at this base"
    )))
}

// ---------------------------------------------------------------------------
// respects checking
// ---------------------------------------------------------------------------

/// A labeling of a level <=2 tree by order types.
pub type Labeling2 = Labels2;

/// Does the labeling respect the tree? The clause-by-clause check: level-1
/// part increasing, towers and approximation chains match, siblings ordered.
pub fn respects2(q: &Level2Tree, lab: &Labels2) -> bool {
    // level-1 part: strictly increasing limit values
    let mut prev: Option<&UTerm> = None;
    for n in q.t1.iter() {
        let v = match lab.get(&DomNode::L1(n.clone())) {
            Some(v) => v,
            None => return false,
        };
        if let Some(p) = prev {
            if p >= v {
                return false;
            }
        }
        prev = Some(v);
    }
    // root label is the first uncountable scale
    match lab.get(&DomNode::L2(Vec::new())) {
        Some(v) if *v == UTerm::u(1) => {}
        _ => return false,
    }
    // towers, approximations and sibling order on the 2-part
    for node in q.dom2_nonroot().cloned().collect::<Vec<_>>() {
        let v = match lab.get(&DomNode::L2(node.clone())) {
            Some(v) => v.clone(),
            None => return false,
        };
        // approximation chain: each prefix label is the collapse of the next
        for l in 1..=node.len() {
            let prefix = node[..l].to_vec();
            let pv = match lab.get(&DomNode::L2(prefix)) {
                Some(v) => v.clone(),
                None => return false,
            };
            if l == node.len() {
                if pv != v {
                    return false;
                }
            } else if pv >= v {
                return false;
            }
        }
        // sibling order
        let parent = node[..node.len() - 1].to_vec();
        let siblings = q.children2(&parent);
        let mut sprev: Option<UTerm> = None;
        for a in siblings {
            let sib: Node2 = parent.iter().cloned().chain([a]).collect();
            let sv = lab.get(&DomNode::L2(sib)).cloned();
            let sv = match sv {
                Some(v) => v,
                None => return false,
            };
            if let Some(p) = &sprev {
                if *p >= sv {
                    return false;
                }
            }
            sprev = Some(sv);
        }
        // degree tag must match the cofinality class of the label
        let deg = q.degree2(&node).unwrap();
        let tag = cf_tag(&v);
        if deg == 0 && tag != 0 {
            return false;
        }
        if deg == 1 && tag == 0 {
            return false;
        }
    }
    true
}

/// Level-3 respects check against a labeling of the domain.
pub fn respects3(r: &Level3Tree, lab: &BTreeMap<Node3, UTerm>) -> bool {
    for node in r.dom().cloned().collect::<Vec<_>>() {
        let v = match lab.get(&node) {
            Some(v) => v.clone(),
            None => return false,
        };
        for l in 1..node.len() {
            let pv = match lab.get(&node[..l].to_vec()) {
                Some(v) => v.clone(),
                None => return false,
            };
            if pv >= v {
                return false;
            }
        }
        // sibling order among same-tree children
        let parent = node[..node.len() - 1].to_vec();
        let mut sprev: Option<(Level2Tree, UTerm)> = None;
        for a in r.children(&parent) {
            let sib: Node3 = parent.iter().cloned().chain([a]).collect();
            let tree = r.tree_at(&sib).unwrap().clone();
            let sv = match lab.get(&sib) {
                Some(v) => v.clone(),
                None => return false,
            };
            if let Some((pt, p)) = &sprev {
                if *pt == tree && *p >= sv {
                    return false;
                }
            }
            sprev = Some((tree, sv));
        }
        // cofinality class of the label must match the delta degree
        let deg = r.delta_at(&node).unwrap().degree();
        let tag = cf_tag(&v);
        if deg == 0 && tag != 0 {
            return false;
        }
        if deg == 1 && tag != 1 {
            return false;
        }
        if deg == 2 && tag != 2 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// fragments of the universal level-3 tree
// ---------------------------------------------------------------------------

/// Build the finite fragment of the universal level-3 tree spanned by the
/// given ordinal tuples: each prefix chain must be a legal branch (the
/// approximation sequence of each hat image along the chosen completions).
pub fn rinf_fragment(xs: &[Vec<CnfOrdinal>]) -> Result<Level3Tree, TreeError> {
    let mut entries: Vec<(Node3, PartialLevel2)> = Vec::new();
    let mut names: Vec<(Vec<CnfOrdinal>, Node3)> = Vec::new();
    for tuple in xs {
        for k in 1..=tuple.len() {
            let prefix = &tuple[..k];
            if names.iter().any(|(t, _)| t == prefix) {
                continue;
            }
            let targets: Vec<UTerm> = prefix.iter().map(hat).collect();
            let mut found: Vec<(Level2Tree, Delta2)> = Vec::new();
            if !forced_branch(&Level2Tree::q0(), &[], &targets, &mut found) {
                return Err(TreeError::Other(format!(
                    "approximation sequence condition fails at step {k}"
                )));
            }
            let (base, delta) = found.last().unwrap().clone();
            let parent_name: Node3 = if k == 1 {
                Vec::new()
            } else {
                names
                    .iter()
                    .find(|(t, _)| t == &prefix[..k - 1])
                    .map(|(_, n)| n.clone())
                    .ok_or_else(|| TreeError::Other("missing branch prefix".into()))?
            };
            let sibs = entries
                .iter()
                .filter(|(n, _)| n.len() == k && n[..k - 1] == parent_name[..])
                .count() as u32;
            let mut name = parent_name;
            name.push(vec![sibs]);
            entries.push((name.clone(), PartialLevel2::new(base, delta)));
            names.push((prefix.to_vec(), name));
        }
    }
    Ok(Level3Tree::from_entries(entries))
}

/// Depth-first search for a branch hitting the target values in order.
fn forced_branch(
    base: &Level2Tree,
    deltas: &[Delta2],
    targets: &[UTerm],
    out: &mut Vec<(Level2Tree, Delta2)>,
) -> bool {
    if targets.is_empty() {
        return true;
    }
    for d in candidate_deltas(base) {
        let t = TowerL2 {
            tree: base.clone(),
            deltas: deltas.iter().cloned().chain([d.clone()]).collect(),
            continuous: false,
        };
        match ord_of_tower(&t) {
            Ok(v) if v == targets[0] => {}
            _ => continue,
        }
        out.push((base.clone(), d.clone()));
        if targets.len() == 1 {
            return true;
        }
        let partial = PartialLevel2::new(base.clone(), d.clone());
        if let Ok(cs) = partial.completions() {
            let all: Vec<Delta2> = deltas.iter().cloned().chain([d.clone()]).collect();
            for c in cs {
                if forced_branch(&c, &all, &targets[1..], out) {
                    return true;
                }
            }
        }
        out.pop();
    }
    false
}


// ---------------------------------------------------------------------------
// uniform cofinality of partial level <=2 trees
// ---------------------------------------------------------------------------

/// A uniform cofinality designator over a level <=2 tree.
#[derive(Clone, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
pub enum UcfStar {
    /// cofinality omega
    CfOmega,
    /// a level-1 node designator
    D1(Node1),
    /// a 2-part description designator
    D2(crate::desc2::QDesc),
}

impl UcfStar {
    pub fn of_designator(d: &DomNode, q: &Level2Tree) -> UcfStar {
        match d {
            DomNode::L1(n) => UcfStar::D1(n.clone()),
            DomNode::L2(n) => {
                UcfStar::D2(crate::desc2::QDesc::disc(q, n).expect("designator in tree"))
            }
        }
    }

    pub fn from_descqw(d: &crate::desc2::DescQW) -> UcfStar {
        match d {
            crate::desc2::DescQW::D1(n) => UcfStar::D1(n.clone()),
            crate::desc2::DescQW::D2(qd, _) => UcfStar::D2(qd.clone()),
        }
    }
}

/// The uniform cofinality family of a partial level <=2 tree: the star
/// designator, the cofinality tag, and (when the tag is 2) the immediate
/// predecessor designator.
#[derive(Clone, Debug)]
pub struct UcfFamily {
    pub star: UcfStar,
    pub cf: u8,
    pub minus: Option<crate::desc2::DescQW>,
}

pub fn ucf_family(q: &Level2Tree, delta: &Delta2) -> Result<UcfFamily, TreeError> {
    use crate::desc2::{enum_desc_qw, prec_qw, DescQW, QDesc, SigmaL1};
    if delta.degree() == 0 {
        return Ok(UcfFamily {
            star: UcfStar::CfOmega,
            cf: 0,
            minus: None,
        });
    }
    let partial = PartialLevel2::new(q.clone(), delta.clone());
    if !partial.validate().is_empty() {
        return Err(TreeError::Invalid(partial.validate()));
    }
    let completion = partial.completions()?.into_iter().next().unwrap();
    let (direct, p): (DescQW, Level1Tree) = match delta {
        Delta2::Deg1 { q: n } => (DescQW::D1(n.clone()), Level1Tree::empty()),
        Delta2::Deg2 { q: n, tree } => {
            let qd = QDesc::disc(&completion, n)
                .ok_or_else(|| TreeError::Other("fresh node missing".into()))?;
            (
                DescQW::D2(qd, SigmaL1::identity(tree)),
                tree.clone(),
            )
        }
        Delta2::Deg0 => unreachable!(),
    };
    // the pool includes the extended (pushed) forms of degree-1 entries
    let pool = |tree: &Level2Tree| -> Vec<DescQW> {
        let mut all = enum_desc_qw(tree, &p);
        for node in tree.dom2().cloned().collect::<Vec<_>>() {
            if tree.degree2(&node) == Some(1) {
                let e = QDesc::ext(tree, &node).unwrap();
                for sigma in SigmaL1::all(&e.tree, &p) {
                    all.push(DescQW::D2(e.clone(), sigma));
                }
            }
        }
        all.sort_by(prec_qw);
        all
    };
    let big = pool(&completion);
    let pos = big
        .iter()
        .position(|d| *d == direct)
        .ok_or_else(|| TreeError::Other("direct description not enumerated".into()))?;
    let star_desc = big
        .get(pos + 1)
        .ok_or_else(|| TreeError::Other("no successor designator".into()))?
        .clone();
    let small = pool(q);
    let star = UcfStar::from_descqw(&star_desc);
    let is_min = small
        .first()
        .map(|m| prec_qw(m, &star_desc) == std::cmp::Ordering::Equal)
        .unwrap_or(false);
    let cf = if is_min { 1 } else { 2 };
    let minus = if cf == 2 {
        small
            .iter()
            .filter(|d| prec_qw(d, &star_desc) == std::cmp::Ordering::Less)
            .last()
            .cloned()
    } else {
        None
    };
    Ok(UcfFamily { star, cf, minus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::fixtures;

    fn u(n: u32) -> UTerm {
        UTerm::u(n)
    }

    fn show(v: &UTerm) -> String {
        v.to_string()
    }

    #[test]
    fn labels_of_x22() {
        let x = fixtures::x22();
        let l = labels2(&x);
        let get = |q: Node2| show(l.get(&DomNode::L2(q)).unwrap());
        assert_eq!(get(vec![]), "w1");
        assert_eq!(get(vec![vec![0]]), "w1*2");
        assert_eq!(get(vec![vec![0], vec![0]]), "u2+w1");
        assert_eq!(get(vec![vec![0], vec![1]]), "u2+w1*2");
        // level-1 labels
        assert_eq!(show(l.get(&DomNode::L1(vec![0])).unwrap()), "w");
        assert_eq!(show(l.get(&DomNode::L1(vec![1])).unwrap()), "w*2");
    }

    #[test]
    fn labels_of_t23() {
        let t = fixtures::t23();
        let l = labels2(&t);
        let get = |q: Node2| show(l.get(&DomNode::L2(q)).unwrap());
        assert_eq!(get(vec![]), "w1");
        assert_eq!(get(vec![vec![0]]), "w1*2");
        assert_eq!(get(vec![vec![0], vec![0]]), "u2+w1+w");
    }

    #[test]
    fn level3_anchors() {
        for (d, expect) in [(0u8, "w"), (1, "w1"), (2, "u2")] {
            let r = fixtures::rd(d);
            let l = labels3(&r);
            assert_eq!(show(l.get(&vec![vec![0]]).unwrap()), expect, "degree {d}");
            assert_eq!(show(&l.root), expect, "degree {d} root");
        }
        let r = fixtures::r23();
        let l = labels3(&r);
        assert_eq!(show(l.get(&vec![vec![0]]).unwrap()), "u2");
        assert_eq!(show(l.get(&vec![vec![0], vec![0]]).unwrap()), "u2+w1");
        assert_eq!(
            show(l.get(&vec![vec![0], vec![0], vec![0]]).unwrap()),
            "u2+w1+w"
        );
        assert_eq!(show(l.get(&vec![vec![0], vec![1]]).unwrap()), "u2*2");
        assert_eq!(show(&l.root), "u3");
        let y = fixtures::y23();
        let l = labels3(&y);
        assert_eq!(show(l.get(&vec![vec![0]]).unwrap()), "w");
        assert_eq!(show(l.get(&vec![vec![1]]).unwrap()), "u2");
        assert_eq!(show(l.get(&vec![vec![2]]).unwrap()), "u3+w1");
        assert_eq!(show(l.get(&vec![vec![3]]).unwrap()), "u3+w1+w");
        assert_eq!(show(&l.root), "u3+w1+w");
    }

    #[test]
    fn analyze_anchors() {
        // hat(1) = omega: degree-0 delta over the one-node tree
        let a = analyze(&UTerm::omega()).unwrap();
        assert_eq!(a.tower.deltas.len(), 1);
        assert_eq!(a.tower.deltas[0].degree(), 0);
        assert_eq!(a.cf, 0);
        // u1: degree-1
        let a = analyze(&u(1)).unwrap();
        assert_eq!(a.tower.deltas[0].degree(), 1);
        assert_eq!(a.cf, 1);
        // u2: degree-2 with a one-node carrier
        let a = analyze(&u(2)).unwrap();
        match &a.tower.deltas[0] {
            Delta2::Deg2 { tree, .. } => assert_eq!(tree.len(), 1),
            _ => panic!(),
        }
        assert_eq!(a.cf, 2);
        // u2+w1 has cofinality tag 1
        let v = u(2).add(&u(1));
        assert_eq!(cf_tag(&v), 1);
        let a = analyze(&v).unwrap();
        assert_eq!(a.approx.len(), 2);
        assert_eq!(show(&a.approx[0]), "u2");
        // the branch tree is the completion with the closed dimension
        assert_eq!(a.tower.tree, fixtures::q20());
    }

    #[test]
    fn analyze_scale_repetition_continues_dimension() {
        // u2*2: the second u2-term continues below the first dimension
        let v = u(2).mul_nat(2);
        let a = analyze(&v).unwrap();
        assert_eq!(a.approx.len(), 2);
        assert_eq!(a.tower.tree, fixtures::q21());
    }

    #[test]
    fn towers_round_trip_on_anchors() {
        for d in 0..=2u8 {
            let r = fixtures::rd(d);
            let t = r.tower_at(&vec![vec![0]]).unwrap();
            let v = ord_of_tower(&t).unwrap();
            let expect = [UTerm::omega(), u(1), u(2)][d as usize].clone();
            assert_eq!(v, expect);
            let back = tower_of_ord(&v).unwrap();
            assert_eq!(back.deltas.last().unwrap().degree(), d);
        }
        // round trip on every branch of the worked example trees: the
        // division relative to the branch prefix recovers the tower
        for name in ["R23", "Y23"] {
            let r = fixtures::level3_by_name(name).unwrap();
            let l = labels3(&r);
            for node in r.dom() {
                let t = r.tower_at(node).unwrap();
                let v = ord_of_tower(&t).unwrap();
                // chain trees: in-tree labels equal the isolated values
                if name == "R23" && node.iter().all(|c| c == &vec![0]) {
                    assert_eq!(&v, l.get(node).unwrap(), "{name} {node:?}");
                }
                let prefix = TowerL2 {
                    tree: if node.len() == 1 {
                        Level2Tree::q0()
                    } else {
                        r.tree_at(node).unwrap().clone()
                    },
                    deltas: t.deltas[..t.deltas.len() - 1].to_vec(),
                    continuous: true,
                };
                let back = tower_of_ord_at(&v, &prefix).unwrap();
                assert_eq!(back.deltas.last().unwrap(), t.deltas.last().unwrap(),
                    "{name} {node:?}");
            }
        }
    }

    #[test]
    fn respects_fixture_labelings() {
        for name in ["Q0", "Q20", "Q21", "Q22", "T22", "X22", "T23", "Q21guide"] {
            let q = fixtures::level2_by_name(name).unwrap();
            let l = labels2(&q);
            assert!(respects2(&q, &l), "{name}");
        }
        // swapping two sibling labels breaks the order clause
        let x = fixtures::x22();
        let mut l = labels2(&x);
        let i = l
            .two
            .iter()
            .position(|(n, _)| n == &vec![vec![0], vec![0]])
            .unwrap();
        let j = l
            .two
            .iter()
            .position(|(n, _)| n == &vec![vec![0], vec![1]])
            .unwrap();
        let (a, b) = (l.two[i].1.clone(), l.two[j].1.clone());
        l.two[i].1 = b;
        l.two[j].1 = a;
        assert!(!respects2(&x, &l));
    }

    #[test]
    fn respects3_fixture_labelings() {
        for name in ["R0", "R1", "R2", "R23", "Y23"] {
            let r = fixtures::level3_by_name(name).unwrap();
            let l = labels3(&r);
            let map: BTreeMap<Node3, UTerm> =
                l.nodes.iter().cloned().collect();
            assert!(respects3(&r, &map), "{name}");
        }
    }

    #[test]
    fn rinf_fragment_anchors() {
        // (1): degree-0 entry; (omega): degree-1; (omega^omega): degree-2
        let one = CnfOrdinal::one();
        let w = CnfOrdinal::omega();
        let ww = CnfOrdinal::omega_pow(Exp::omega_pow(1));
        let frag = rinf_fragment(&[vec![one], vec![w.clone()], vec![ww.clone()]]).unwrap();
        assert_eq!(frag.len(), 3);
        let degs: Vec<u8> = frag
            .dom()
            .map(|n| frag.delta_at(n).unwrap().degree())
            .collect();
        assert_eq!(degs, vec![0, 1, 2]);
        // a two-step branch: (omega^omega, omega^omega + omega)
        let two = vec![ww.clone(), cnf_add(&ww, &w)];
        let frag = rinf_fragment(&[two]).unwrap();
        assert_eq!(frag.len(), 2);
        // node labels are the hats of the last coordinates
        let l = labels3(&frag);
        let top = frag.dom().find(|n| n.len() == 2).unwrap();
        assert_eq!(l.get(top).unwrap().to_string(), "u2+w1");
        // prefix violation: (omega^omega + omega) alone skips its prefix
        assert!(rinf_fragment(&[vec![cnf_add(&ww, &w)]]).is_err());
    }

    #[test]
    fn monotone_labels_within_tree() {
        for name in ["R23", "Y23"] {
            let r = fixtures::level3_by_name(name).unwrap();
            let l = labels3(&r);
            // bk-below on same-shape prefixes implies smaller label for
            // siblings sharing a tree component
            for (n, v) in &l.nodes {
                for (m, w) in &l.nodes {
                    if n.len() == m.len()
                        && n[..n.len() - 1] == m[..m.len() - 1]
                        && r.tree_at(n) == r.tree_at(m)
                        && crate::tree::bk3(n, m) == std::cmp::Ordering::Less
                    {
                        assert!(v < w, "{name}: {n:?} vs {m:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn push_sup_unit_cases() {
        // sup of the inclusion push of u1*2 from a 1-chain into a 2-chain
        let small = Level1Tree::from_nodes(vec![vec![0]]);
        let big = Level1Tree::from_nodes(vec![vec![0], vec![0, 0]]);
        let sub = seed_sub(&small, &big);
        assert_eq!(push_value(&u(1), &sub), u(2));
        let v = u(1).mul_nat(2);
        assert_eq!(push_sup(&v, &sub).to_string(), "u2+w1");
        assert_eq!(push_sup(&u(2), &sub).to_string(), "u3");
    }

    #[test]
    fn mul_nat_helper() {
        let v = u(1).mul_nat(3);
        assert_eq!(v.to_string(), "w1*3");
    }
}
