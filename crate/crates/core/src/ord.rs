//! Exact arithmetic for ordinals below omega^(omega^omega), their images in the
//! u_n hierarchy, and the Brouwer-Kleene comparison of finite sequences.
//!
//! An ordinal below omega^(omega^omega) is kept in iterated Cantor normal form:
//! a weakly descending list of exponents, each exponent an ordinal below
//! omega^omega stored as a strictly descending polynomial in omega.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// An ordinal below omega^omega: sum of omega^power * coeff with strictly
/// descending powers and positive coefficients.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Exp(pub Vec<(u32, u64)>);

impl Exp {
    pub fn zero() -> Self {
        Exp(Vec::new())
    }

    pub fn nat(n: u64) -> Self {
        if n == 0 {
            Exp::zero()
        } else {
            Exp(vec![(0, n)])
        }
    }

    pub fn omega_pow(p: u32) -> Self {
        Exp(vec![(p, 1)])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|&(_, c)| c > 0)
            && self.0.windows(2).all(|w| w[0].0 > w[1].0)
    }

    pub fn cmp_ord(&self, other: &Exp) -> Ordering {
        // CNF comparison: lexicographic on the (power, coeff) term lists.
        let mut i = 0;
        loop {
            match (self.0.get(i), other.0.get(i)) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(a), Some(b)) => {
                    match a.0.cmp(&b.0).then(a.1.cmp(&b.1)) {
                        Ordering::Equal => i += 1,
                        o => return o,
                    }
                }
            }
        }
    }

    pub fn add(&self, other: &Exp) -> Exp {
        if other.is_zero() {
            return self.clone();
        }
        let lead = other.0[0].0;
        let mut terms: Vec<(u32, u64)> =
            self.0.iter().copied().filter(|&(p, _)| p > lead).collect();
        // absorb: the part of self with power == lead merges coefficients
        let extra: u64 = self
            .0
            .iter()
            .filter(|&&(p, _)| p == lead)
            .map(|&(_, c)| c)
            .sum();
        let mut rest = other.0.clone();
        rest[0].1 += extra;
        terms.extend(rest);
        Exp(terms)
    }

    /// Natural successor structure: last term has power 0?
    pub fn is_successor(&self) -> bool {
        self.0.last().map_or(false, |&(p, _)| p == 0)
    }
}

impl fmt::Debug for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(p, c)| match (p, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "w".to_string(),
                (1, c) => format!("w*{c}"),
                (p, 1) => format!("w^{p}"),
                (p, c) => format!("w^{p}*{c}"),
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// An ordinal below omega^(omega^omega): weakly descending exponent list,
/// one entry per omega^exp summand (multiplicities by repetition).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct CnfOrdinal(pub Vec<Exp>);

impl CnfOrdinal {
    pub fn zero() -> Self {
        CnfOrdinal(Vec::new())
    }

    pub fn one() -> Self {
        CnfOrdinal(vec![Exp::zero()])
    }

    pub fn nat(n: u64) -> Self {
        CnfOrdinal(vec![Exp::zero(); n as usize])
    }

    pub fn omega() -> Self {
        CnfOrdinal(vec![Exp::nat(1)])
    }

    /// omega^e as a single-term ordinal.
    pub fn omega_pow(e: Exp) -> Self {
        CnfOrdinal(vec![e])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(Exp::is_valid)
            && self
                .0
                .windows(2)
                .all(|w| w[0].cmp_ord(&w[1]) != Ordering::Less)
    }

    /// A nonzero ordinal is a limit iff its last exponent is nonzero.
    pub fn is_limit(&self) -> bool {
        self.0.last().map_or(false, |e| !e.is_zero())
    }

    pub fn is_successor(&self) -> bool {
        self.0.last().map_or(false, |e| e.is_zero())
    }

    pub fn leading_exp(&self) -> Option<&Exp> {
        self.0.first()
    }

    pub fn last_exp(&self) -> Option<&Exp> {
        self.0.last()
    }

    /// The partial sums omega^{e_1}+...+omega^{e_j} for 1 <= j <= len.
    pub fn partial_sums(&self) -> Vec<CnfOrdinal> {
        (1..=self.0.len())
            .map(|j| CnfOrdinal(self.0[..j].to_vec()))
            .collect()
    }
}

pub fn cnf_cmp(a: &CnfOrdinal, b: &CnfOrdinal) -> Ordering {
    let mut i = 0;
    loop {
        match (a.0.get(i), b.0.get(i)) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => match x.cmp_ord(y) {
                Ordering::Equal => i += 1,
                o => return o,
            },
        }
    }
}

impl PartialOrd for CnfOrdinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(cnf_cmp(self, other))
    }
}

impl Ord for CnfOrdinal {
    fn cmp(&self, other: &Self) -> Ordering {
        cnf_cmp(self, other)
    }
}

pub fn cnf_add(a: &CnfOrdinal, b: &CnfOrdinal) -> CnfOrdinal {
    if b.is_zero() {
        return a.clone();
    }
    let lead = &b.0[0];
    let mut terms: Vec<Exp> = a
        .0
        .iter()
        .filter(|e| e.cmp_ord(lead) != Ordering::Less)
        .cloned()
        .collect();
    terms.extend(b.0.iter().cloned());
    CnfOrdinal(terms)
}

pub fn cnf_mul(a: &CnfOrdinal, b: &CnfOrdinal) -> CnfOrdinal {
    if a.is_zero() || b.is_zero() {
        return CnfOrdinal::zero();
    }
    let lead_a = a.0[0].clone();
    let mut out = CnfOrdinal::zero();
    for e in &b.0 {
        if e.is_zero() {
            // multiply by one more finite unit: append a fresh copy of a
            out = cnf_add(&out, a);
        } else {
            out = cnf_add(&out, &CnfOrdinal(vec![lead_a.add(e)]));
        }
    }
    out
}

impl fmt::Debug for CnfOrdinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|e| {
                if e.is_zero() {
                    "1".to_string()
                } else if *e == Exp::nat(1) {
                    "w".to_string()
                } else {
                    format!("w^({:?})", e)
                }
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// The image of an ordinal below omega^(omega^omega) under the order
/// embedding into the u_n hierarchy. Stored as the preimage; all arithmetic
/// is pullback through the embedding.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct UTerm(CnfOrdinal);

impl UTerm {
    pub fn zero() -> Self {
        UTerm(CnfOrdinal::zero())
    }

    pub fn omega() -> Self {
        hat(&CnfOrdinal::one())
    }

    /// u_n for n >= 1 (u_1 = omega_1).
    pub fn u(n: u32) -> Self {
        assert!(n >= 1);
        hat(&CnfOrdinal::omega_pow(Exp::omega_pow(n - 1)))
    }

    pub fn preimage(&self) -> &CnfOrdinal {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, other: &UTerm) -> UTerm {
        UTerm(cnf_add(&self.0, &other.0))
    }

    pub fn mul_nat(&self, n: u64) -> UTerm {
        UTerm(cnf_mul(&self.0, &CnfOrdinal::nat(n)))
    }

    /// The u-polynomial term list: for each summand omega^eta of the
    /// preimage, the factor list of hat(omega^eta). A factor index 0 denotes
    /// omega itself; k >= 1 denotes u_k.
    pub fn factor_terms(&self) -> Vec<Vec<u32>> {
        self.0
             .0
            .iter()
            .map(|eta| {
                if eta.is_zero() {
                    vec![0]
                } else {
                    let mut fs = Vec::new();
                    for &(n, c) in &eta.0 {
                        for _ in 0..c {
                            fs.push(n + 1);
                        }
                    }
                    fs
                }
            })
            .collect()
    }
}

impl PartialOrd for UTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.0.cmp(&other.0))
    }
}

impl Ord for UTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

/// The order embedding of ordinals below omega^(omega^omega) into formal
/// sums of products of uniform indiscernibles.
pub fn hat(xi: &CnfOrdinal) -> UTerm {
    UTerm(xi.clone())
}

/// Inverse of `hat` on its image.
pub fn unhat(u: &UTerm) -> CnfOrdinal {
    u.0.clone()
}

impl fmt::Display for UTerm {
    /// Grammar: "w" for omega, "w1" for u_1, "u2","u3",... for higher
    /// indiscernibles, "*" for products and finite coefficients, "+" for sums.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        fn sym(k: u32) -> String {
            match k {
                0 => "w".to_string(),
                1 => "w1".to_string(),
                k => format!("u{k}"),
            }
        }
        // group equal consecutive preimage exponents into coefficients
        let mut parts: Vec<String> = Vec::new();
        let terms = self.factor_terms();
        let mut i = 0;
        while i < terms.len() {
            let mut j = i;
            while j < terms.len() && terms[j] == terms[i] {
                j += 1;
            }
            let count = (j - i) as u64;
            let base = terms[i]
                .iter()
                .map(|&k| sym(k))
                .collect::<Vec<_>>()
                .join("*");
            if count == 1 {
                parts.push(base);
            } else {
                parts.push(format!("{base}*{count}"));
            }
            i = j;
        }
        write!(f, "{}", parts.join("+"))
    }
}

impl fmt::Debug for UTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Result of a Brouwer-Kleene comparison where atoms may be incomparable.
#[derive(Debug, thiserror::Error)]
#[error("incomparable atoms at position {0}")]
pub struct IncomparableAtoms(pub usize);

/// Brouwer-Kleene order on finite sequences: a proper extension is smaller;
/// otherwise the first differing entry decides via the atom order.
pub fn bk_cmp_by<A, F>(s: &[A], t: &[A], mut atoms: F) -> Result<Ordering, IncomparableAtoms>
where
    F: FnMut(&A, &A) -> Option<Ordering>,
{
    let n = s.len().min(t.len());
    for i in 0..n {
        match atoms(&s[i], &t[i]) {
            Some(Ordering::Equal) => continue,
            Some(o) => return Ok(o),
            None => return Err(IncomparableAtoms(i)),
        }
    }
    // one is a prefix of the other: the longer (proper extension) is smaller
    Ok(t.len().cmp(&s.len()))
}

/// Brouwer-Kleene order for totally ordered atoms.
pub fn bk_cmp<A: Ord>(s: &[A], t: &[A]) -> Ordering {
    bk_cmp_by(s, t, |a, b| Some(a.cmp(b))).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w_pow(e: Exp) -> CnfOrdinal {
        CnfOrdinal::omega_pow(e)
    }

    #[test]
    fn cmp_basics() {
        assert_eq!(cnf_cmp(&CnfOrdinal::zero(), &CnfOrdinal::zero()), Ordering::Equal);
        // omega vs omega^omega
        let w = CnfOrdinal::omega();
        let ww = w_pow(Exp::omega_pow(1));
        assert_eq!(cnf_cmp(&w, &ww), Ordering::Less);
    }

    #[test]
    fn cmp_against_rank_oracle() {
        // Independent oracle: enumerate all ordinals below omega^omega*3 that
        // our small sample can produce, via an order-preserving encoding into
        // (count of omega^omega summands, then reversed coefficient vector).
        // omega^omega*k + omega^{m}*c_m + ... + c_0 encodes as
        // (k, c_max..c_0) compared lexicographically with padding.
        fn encode(x: &CnfOrdinal) -> (usize, Vec<u64>) {
            let k = x.0.iter().filter(|e| **e == Exp::omega_pow(1)).count();
            let mut coeffs = vec![0u64; 8];
            for e in &x.0 {
                if *e == Exp::omega_pow(1) {
                    continue;
                }
                // e is a natural-number exponent: omega^n-term of x
                let n = if e.is_zero() { 0 } else { e.0[0].1 as usize };
                coeffs[n] += 1;
            }
            coeffs.reverse();
            (k, coeffs)
        }
        // sample ordinals below omega^omega*3 with exponents < omega (powers < 8)
        let mut sample = Vec::new();
        for k in 0..3usize {
            for p in 0..4u64 {
                for c in 0..3u64 {
                    let mut terms = vec![Exp::omega_pow(1); k];
                    for _ in 0..c {
                        terms.push(Exp::nat(3 - p.min(3)));
                    }
                    // ensure weakly descending: powers as exponents nat(p+1) are below omega_pow(1)
                    let x = CnfOrdinal(terms);
                    assert!(x.is_valid(), "{x:?}");
                    sample.push(x);
                }
            }
        }
        for a in &sample {
            for b in &sample {
                assert_eq!(cnf_cmp(a, b), encode(a).cmp(&encode(b)), "{a:?} vs {b:?}");
            }
        }
        // spec example: omega^omega*2+1 > omega^omega*2
        let a = CnfOrdinal(vec![Exp::omega_pow(1), Exp::omega_pow(1), Exp::zero()]);
        let b = CnfOrdinal(vec![Exp::omega_pow(1), Exp::omega_pow(1)]);
        assert_eq!(cnf_cmp(&a, &b), Ordering::Greater);
    }

    #[test]
    fn add_basics() {
        let one = CnfOrdinal::one();
        let w = CnfOrdinal::omega();
        assert_eq!(cnf_add(&one, &w), w);
        let w_plus_1 = cnf_add(&w, &one);
        assert_eq!(w_plus_1.0, vec![Exp::nat(1), Exp::zero()]);
    }

    #[test]
    fn mul_matches_repeated_addition() {
        // oracle: a * n must equal a + a + ... + a (n times)
        let w = CnfOrdinal::omega();
        let samples = vec![
            CnfOrdinal::one(),
            CnfOrdinal::nat(3),
            w.clone(),
            cnf_add(&w, &CnfOrdinal::one()),
            CnfOrdinal::omega_pow(Exp::omega_pow(1)),
            cnf_add(&CnfOrdinal::omega_pow(Exp::omega_pow(1)), &w),
        ];
        for a in &samples {
            let mut acc = CnfOrdinal::zero();
            for n in 1..6u64 {
                acc = cnf_add(&acc, a);
                assert_eq!(cnf_mul(a, &CnfOrdinal::nat(n)), acc, "{a:?} * {n}");
            }
        }
        // mul by omega^omega: omega^omega * omega^omega = omega^(omega*2)
        let ww = CnfOrdinal::omega_pow(Exp::omega_pow(1));
        let expect = CnfOrdinal::omega_pow(Exp(vec![(1, 2)]));
        assert_eq!(cnf_mul(&ww, &ww), expect);
    }

    #[test]
    fn mul_left_distributes_over_add() {
        let w = CnfOrdinal::omega();
        let ww = CnfOrdinal::omega_pow(Exp::omega_pow(1));
        let samples = vec![CnfOrdinal::one(), CnfOrdinal::nat(2), w, ww];
        for a in &samples {
            for b in &samples {
                for c in &samples {
                    let lhs = cnf_mul(a, &cnf_add(b, c));
                    let rhs = cnf_add(&cnf_mul(a, b), &cnf_mul(a, c));
                    assert_eq!(lhs, rhs, "{a:?} * ({b:?} + {c:?})");
                }
            }
        }
    }

    #[test]
    fn hat_anchors() {
        assert_eq!(hat(&CnfOrdinal::zero()).to_string(), "0");
        assert_eq!(hat(&CnfOrdinal::one()).to_string(), "w");
        assert_eq!(UTerm::u(2).to_string(), "u2");
        // omega^omega*2 + omega + 3  ->  u2*2 + w1 + w*3
        let xi = CnfOrdinal(vec![
            Exp::omega_pow(1),
            Exp::omega_pow(1),
            Exp::nat(1),
            Exp::zero(),
            Exp::zero(),
            Exp::zero(),
        ]);
        assert_eq!(hat(&xi).to_string(), "u2*2+w1+w*3");
    }

    #[test]
    fn hat_strictly_increasing_and_inverse() {
        // exhaustive below omega*5-ish plus structured samples
        let mut sample = Vec::new();
        for a in 0..5u64 {
            for b in 0..5u64 {
                let mut x = cnf_mul(&CnfOrdinal::omega(), &CnfOrdinal::nat(a));
                x = cnf_add(&x, &CnfOrdinal::nat(b));
                sample.push(x);
            }
        }
        sample.push(CnfOrdinal::omega_pow(Exp::omega_pow(2)));
        sample.push(CnfOrdinal::omega_pow(Exp(vec![(2, 1), (0, 1)])));
        sample.sort();
        sample.dedup();
        for a in &sample {
            assert_eq!(&unhat(&hat(a)), a);
            for b in &sample {
                assert_eq!(hat(a).cmp(&hat(b)), cnf_cmp(a, b));
            }
        }
    }

    #[test]
    fn unhat_examples() {
        // u1 -> omega ; u3 + w1 + w -> omega^(omega^2) + omega + 1
        assert_eq!(unhat(&UTerm::u(1)), CnfOrdinal::omega());
        let u3 = CnfOrdinal::omega_pow(Exp::omega_pow(2));
        let expect = cnf_add(&cnf_add(&u3, &CnfOrdinal::omega()), &CnfOrdinal::one());
        let v = hat(&expect);
        assert_eq!(v.to_string(), "u3+w1+w");
        assert_eq!(unhat(&v), expect);
    }

    #[test]
    fn bk_order_basics() {
        assert_eq!(bk_cmp(&[0], &[1]), Ordering::Less);
        assert_eq!(bk_cmp(&[1, 0], &[1]), Ordering::Less);
        assert_eq!(bk_cmp::<u32>(&[], &[]), Ordering::Equal);
    }

    #[test]
    fn bk_matches_literal_definition_on_small_sequences() {
        // literal-definition oracle over sequences from {0,1,2} with length <= 3
        fn oracle(s: &[u8], t: &[u8]) -> Ordering {
            if s == t {
                return Ordering::Equal;
            }
            if s.len() > t.len() && &s[..t.len()] == t {
                return Ordering::Less;
            }
            if t.len() > s.len() && &t[..s.len()] == s {
                return Ordering::Greater;
            }
            let i = (0..).find(|&i| s[i] != t[i]).unwrap();
            s[i].cmp(&t[i])
        }
        let mut seqs: Vec<Vec<u8>> = vec![vec![]];
        for len in 1..=3 {
            let mut next = Vec::new();
            for s in seqs.iter().filter(|s| s.len() == len - 1) {
                for a in 0..3u8 {
                    let mut t = s.clone();
                    t.push(a);
                    next.push(t);
                }
            }
            seqs.extend(next);
        }
        for s in &seqs {
            for t in &seqs {
                assert_eq!(bk_cmp(s, t), oracle(s, t), "{s:?} vs {t:?}");
            }
        }
        // spec example: (1,2,0) vs (1,1) -> gt
        assert_eq!(bk_cmp(&[1, 2, 0], &[1, 1]), Ordering::Greater);
    }

    #[test]
    fn bk_total_order_sorting_idempotent() {
        let mut seqs: Vec<Vec<u8>> = vec![
            vec![],
            vec![0],
            vec![1],
            vec![0, 1],
            vec![1, 0],
            vec![2, 2, 2],
        ];
        seqs.sort_by(|a, b| bk_cmp(a, b));
        let once = seqs.clone();
        seqs.sort_by(|a, b| bk_cmp(a, b));
        assert_eq!(seqs, once);
        for w in once.windows(2) {
            assert_ne!(bk_cmp(&w[0], &w[1]), Ordering::Greater);
        }
    }
}
