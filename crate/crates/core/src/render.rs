//! Text renderers for descriptions and listings: the representation-scheme
//! expressions of the worked examples and the nested corner notation.

use crate::desc2::{DescQW, QDescKind, SigmaL1};
use crate::tree::Node1;

pub fn node1(n: &Node1) -> String {
    let inner = n
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    format!("({inner})")
}

/// Coordinate position: a node or -1.
pub fn coord(c: Option<&Node1>) -> String {
    match c {
        Some(n) => node1(n),
        None => "-1".to_string(),
    }
}

/// How degree-1 inner descriptions print their node argument.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum D1Style {
    /// (1, ((0))) - the node wrapped as a singleton tuple
    DoubleParen,
    /// (1, (0)) - the node printed directly
    SingleParen,
}

/// The alternating sigma-image / coordinate body of a degree-2 description.
fn qw_body(qd: &crate::desc2::QDesc, sigma: &SigmaL1, atom: &dyn Fn(&Node1) -> String) -> String {
    let mut parts = Vec::new();
    match qd.kind {
        QDescKind::Discontinuous => {
            for (i, c) in qd.q.iter().enumerate() {
                parts.push(atom(&sigma.apply(&qd.branch[i]).unwrap()));
                parts.push(node1(c));
            }
        }
        QDescKind::Continuous => {
            for (i, c) in qd.q.iter().enumerate() {
                parts.push(atom(&sigma.apply(&qd.branch[i]).unwrap()));
                parts.push(node1(c));
            }
            parts.push(atom(&sigma.apply(qd.branch.last().unwrap()).unwrap()));
            parts.push("-1".to_string());
        }
        QDescKind::Extended => panic!("extended form is not rendered"),
    }
    parts.join(", ")
}

/// The representation-scheme expression of a (Q,W)-description, with the
/// W-coordinates printed as subscripted variables: (2, (a_{(2)}, (1))).
pub fn qw_expr(d: &DescQW, d1: D1Style) -> String {
    match d {
        DescQW::D1(q) => match d1 {
            D1Style::DoubleParen => format!("(1, ({}))", node1(q)),
            D1Style::SingleParen => format!("(1, {})", node1(q)),
        },
        DescQW::D2(qd, sigma) => {
            let atom = |w: &Node1| format!("a_{{{}}}", node1(w));
            if qd.is_constant() {
                return "(2, $\\emptyset$)".to_string();
            }
            format!("(2, ({}))", qw_body(qd, sigma, &atom))
        }
    }
}

/// The corner of a (Q,W)-description as a plain tuple: (2, ((2), (1))).
pub fn qw_corner(d: &DescQW) -> String {
    match d {
        DescQW::D1(q) => format!("(1, {})", node1(q)),
        DescQW::D2(qd, sigma) => {
            if qd.is_constant() {
                return "(2, )".to_string();
            }
            let atom = |w: &Node1| node1(w);
            format!("(2, ({}))", qw_body(qd, sigma, &atom))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desc2::enum_desc_qw;
    use crate::tree::fixtures;

    #[test]
    fn guide_expressions_render() {
        let q = fixtures::q21_guide();
        let w = fixtures::w21();
        let descs = enum_desc_qw(&q, &w);
        let texts: Vec<String> = descs
            .iter()
            .filter(|d| !d.is_constant())
            .map(|d| qw_expr(d, D1Style::DoubleParen))
            .collect();
        assert_eq!(texts.len(), 18);
        assert_eq!(texts[0], "(2, (a_{(0)}, -1))");
        assert_eq!(texts[17], "(2, (a_{(2)}, (1)))");
    }
}
