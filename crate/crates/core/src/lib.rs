//! Symbolic combinatorics of level <=3 trees: finite labeled trees with
//! partial-tree entries, the description calculi over them, tensor products
//! with their canonical factoring maps, order-type assignments valued in the
//! u_n hierarchy, and minimal-factoring comparison.

pub mod ord;
pub mod tree;
pub mod desc2;
pub mod desc3;
pub mod desc_y;
pub mod analysis;
pub mod compare;
pub mod render;
pub mod json;

pub use ord::{bk_cmp, bk_cmp_by, cnf_add, cnf_cmp, cnf_mul, hat, unhat, CnfOrdinal, Exp, UTerm};
