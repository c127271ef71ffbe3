use ltc_core::desc2::enum_desc_qw;
use ltc_core::desc3::*;
use ltc_core::tree::{fixtures, Level1Tree, Level2Tree, PartialLevel1};

#[test]
fn assoc_711() {
    let t = fixtures::t22();
    let q = fixtures::q22();
    let w4 = fixtures::level1_by_name("W4").unwrap();
    let pairs = assoc_l1(&t, &q, &w4).unwrap();
    println!("711? {}", pairs.len());
    assert_eq!(pairs.len(), 711);
}

#[test]
fn assoc_n_fixture_shape() {
    // T with level-1 part {(0)} and 2-part of Q20; Q = U = Q21
    let t = Level2Tree::from_parts(
        Level1Tree::from_nodes(vec![vec![0]]),
        vec![(vec![vec![0]], PartialLevel1::new(Level1Tree::from_nodes(vec![vec![0]]), None))],
    );
    let q = fixtures::q21();
    let x = tensor_tq(&t, &q);
    println!("X: 1-part {} 2-part {}", x.x.t1.len(), x.x.dom2().count());
    let m = tensor_tq(&q, &q);
    println!("M: 1-part {} 2-part {}", m.x.t1.len(), m.x.dom2().count());
    let a = assoc_l2(&t, &q, &q).unwrap();
    println!("N: 1-part {} 2-part {}", a.n.t1.len(), a.n.dom2().count());
    for (n, _, _) in &a.pairs2 { println!("N2 node {:?}", n); }
    for (n, _, _) in &a.pairs1 { println!("N1 node {:?}", n); }
}
