use ltc_core::desc3::{enum_desc_tq, DescTQ};
use ltc_core::tree::{fixtures, Level2Tree, PartialLevel2, Delta2, Level1Tree};

#[test]
fn dbg_cands() {
    let t = fixtures::q21();
    let pending = Delta2::Deg2 { q: vec![vec![0]], tree: Level1Tree::from_nodes(vec![vec![0]]) };
    let partial = PartialLevel2::new(Level2Tree::q0(), pending.clone());
    for completion in partial.completions().unwrap() {
        println!("== completion node {:?}", completion.node_at(&vec![vec![0]]));
        for c in enum_desc_tq(&t, &completion) {
            if let DescTQ::D2 { t: tp, tower, .. } = &c {
                if tp.is_constant() { continue; }
                println!("  t-part {:?}/{:?} tower abs {:?} pend {:?}", tp.q, tp.kind, tower.absorbed, tower.pending);
            }
        }
    }
}
