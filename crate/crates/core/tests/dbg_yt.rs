use ltc_core::desc_y::*;
use ltc_core::desc3::enum_desc_tq;
use ltc_core::tree::{fixtures, Level2Tree, PartialLevel2, Delta2};

#[test]
fn dbg_layer2() {
    let y = fixtures::rd(2);
    let t = fixtures::q21();
    // the degree-2 length-1 node: pending (2,((0)),{(0)}) over Q0
    let q0 = Level2Tree::q0();
    let pending = Delta2::Deg2 { q: vec![vec![0]], tree: ltc_core::tree::Level1Tree::from_nodes(vec![vec![0]]) };
    let partial = PartialLevel2::new(q0.clone(), pending.clone());
    for completion in partial.completions().unwrap() {
        println!("== completion {:?}", completion);
        let cands = enum_desc_tq(&t, &completion);
        println!("   cands {}", cands.len());
        let mut found = Vec::new();
        descs_over_tower(&y, &t, &completion, &[pending.clone()], &cands, &mut found);
        println!("   found {}", found.len());
    }
}
