use ltc_core::desc_y::*;
use ltc_core::tree::fixtures;
#[test]
fn shape() {
    let y = fixtures::y23();
    let t = fixtures::t23();
    let rep = tensor_yt(&y, &t).unwrap();
    let mut by_len = std::collections::BTreeMap::new();
    for n in rep.r.dom() { *by_len.entry(n.len()).or_insert(0) += 1; }
    println!("by length: {:?}", by_len);
    for n in rep.r.dom().filter(|n| n.len() == 2) {
        println!("len2 {:?} -> {:?}", n, rep.r.delta_at(n).unwrap());
    }
}
