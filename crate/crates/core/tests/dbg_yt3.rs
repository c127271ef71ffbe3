use ltc_core::desc_y::*;
use ltc_core::desc3::enum_desc_tq;
use ltc_core::tree::{fixtures, Level2Tree, PartialLevel2, Delta2, Level1Tree};

#[test]
fn dbg_restrict() {
    let y = fixtures::rd(2);
    let t = fixtures::q21();
    let q0 = Level2Tree::q0();
    // layer 1
    let c0 = enum_desc_tq(&t, &q0);
    let mut layer = Vec::new();
    descs_over_tower(&y, &t, &q0, &[], &c0, &mut layer);
    layer.sort_by(prec_yt);
    for (i, d) in layer.iter().enumerate() {
        println!("L1[{i}]: corner {:?}", d.corner());
    }
    let parent = &layer[1]; // expect the degree-2 one
    let ptower = parent.tower().unwrap().clone();
    println!("parent tower pend {:?}", ptower.deltas.last());
    let partial = PartialLevel2::new(ptower.tree.clone(), ptower.deltas.last().unwrap().clone());
    for completion in partial.completions().unwrap() {
        let cands = enum_desc_tq(&t, &completion);
        let mut found = Vec::new();
        descs_over_tower(&y, &t, &completion, &ptower.deltas, &cands, &mut found);
        println!("== completion {:?}: found {}", completion.node_at(&vec![vec![0]]), found.len());
        for f in &found {
            match restrict_yt(&f, &y, &t, &ptower.tree, &ptower.deltas[..ptower.deltas.len()-1]) {
                Ok(r) => {
                    println!("  restriction corner {:?}", r.corner());
                    println!("  equals parent: {}", prec_yt(&r, parent) == std::cmp::Ordering::Equal);
                }
                Err(e) => println!("  restrict ERR {e}"),
            }
        }
    }
}
