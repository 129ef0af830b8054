//! Independent oracles and random generators shared by the test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;

use cdgl::free_lie::{FreeLie, LieElem, Word};
use cdgl::graded::linalg::{Echelon, SVec};
use cdgl::graded::scalar::{q, Q};
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_q(r: &mut ChaCha8Rng) -> Q {
    let n = r.gen_range(-4i64..=4);
    let d = r.gen_range(1i64..=3);
    let n = if n == 0 { 1 } else { n };
    Q::new(n.into(), d.into())
}

/// Random sparse combination of at most `terms` basis elements of a degree.
pub fn random_elem(l: &FreeLie, degree: i64, r: &mut ChaCha8Rng, terms: usize) -> LieElem {
    let mut e = LieElem::zero(degree);
    let dim = l.dim(degree);
    if dim == 0 {
        return e;
    }
    for _ in 0..r.gen_range(1..=terms) {
        let i = r.gen_range(0..dim);
        e.add_scaled(l.basis_elem(degree, i), &small_q(r));
    }
    e
}

/// Random element built only from brackets of length at least `min_len`.
pub fn random_elem_min_len(l: &FreeLie, degree: i64, min_len: usize, r: &mut ChaCha8Rng, terms: usize) -> LieElem {
    let mut e = LieElem::zero(degree);
    let Some(b) = l.basis(degree) else { return e };
    let idx: Vec<usize> = (0..b.len()).filter(|&i| b.seqs[i].len() >= min_len).collect();
    if idx.is_empty() {
        return e;
    }
    for _ in 0..r.gen_range(1..=terms) {
        let i = idx[r.gen_range(0..idx.len())];
        e.add_scaled(&b.elems[i], &small_q(r));
    }
    e
}

/// Degrees of L that have a nonzero basis.
pub fn nonzero_degrees(l: &FreeLie) -> Vec<i64> {
    l.degrees().filter(|&d| l.dim(d) > 0).collect()
}

/// All words of a given length and degree.
fn words(l: &FreeLie, len: usize, degree: i64) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &out {
            for g in 0..l.ngens() as u16 {
                let mut w2: Word = w.clone();
                w2.push(g);
                next.push(w2);
            }
        }
        out = next;
    }
    out.retain(|w| w.iter().map(|&g| l.gen_degree(g as usize)).sum::<i64>() == degree);
    out
}

/// Dimension of the primitive elements of given word length and degree in
/// the tensor algebra: kernel of the reduced graded shuffle coproduct.
/// By Friedrichs' criterion this is the dimension of the free Lie algebra
/// in that bidegree.
pub fn primitive_dim(l: &FreeLie, degree: i64, len: usize) -> usize {
    let ws = words(l, len, degree);
    if ws.is_empty() {
        return 0;
    }
    let deg = |g: u16| l.gen_degree(g as usize);
    // column for each word: its reduced coproduct, keyed by (left word, right word)
    let mut cols: Vec<SVec<(Word, Word)>> = Vec::new();
    for w in &ws {
        let mut v = SVec::new();
        for mask in 1u32..((1u32 << len) - 1) {
            let mut left = Vec::new();
            let mut right = Vec::new();
            let mut s = 0i64;
            for i in 0..len {
                if mask & (1 << i) != 0 {
                    // moving w[i] left past the letters already sent right
                    for &r in &right {
                        s += deg(r) * deg(w[i]);
                    }
                    left.push(w[i]);
                } else {
                    right.push(w[i]);
                }
            }
            let c = if s.rem_euclid(2) == 0 { Q::one() } else { -Q::one() };
            v.add_term((left, right), c);
        }
        cols.push(v);
    }
    let mut e: Echelon<(Word, Word)> = Echelon::new(false);
    let mut rank = 0;
    for c in cols {
        if e.insert(c, None).is_ok() {
            rank += 1;
        }
    }
    ws.len() - rank
}

/// Truncated tensor-algebra series keyed by words.
pub type Series = BTreeMap<Word, Q>;

pub fn series_mul(a: &Series, b: &Series, n: usize) -> Series {
    let mut out = Series::new();
    for (u, x) in a {
        for (v, y) in b {
            if u.len() + v.len() > n {
                continue;
            }
            let mut w = u.clone();
            w.extend_from_slice(v);
            *out.entry(w).or_insert_with(Q::zero) += x * y;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

pub fn series_of(e: &LieElem) -> Series {
    e.terms.iter().map(|(w, c)| (w.clone(), c.clone())).collect()
}

pub fn series_exp(x: &Series, n: usize) -> Series {
    let mut out = Series::new();
    out.insert(Vec::new(), Q::one());
    let mut term = out.clone();
    for k in 1..=n {
        term = series_mul(&term, x, n);
        let kinv = Q::one() / q(k as i64);
        for v in term.values_mut() {
            *v *= &kinv;
        }
        for (w, v) in &term {
            *out.entry(w.clone()).or_insert_with(Q::zero) += v;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// log of a series with constant term 1.
pub fn series_log(x: &Series, n: usize) -> Series {
    let mut z = x.clone();
    assert_eq!(z.remove(&Vec::new()), Some(Q::one()));
    let mut out = Series::new();
    let mut p = z.clone();
    for k in 1..=n {
        let c = if k % 2 == 1 { Q::one() } else { -Q::one() } / q(k as i64);
        for (w, v) in &p {
            *out.entry(w.clone()).or_insert_with(Q::zero) += v * &c;
        }
        p = series_mul(&p, &z, n);
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// log(e^x e^y) computed directly in the truncated tensor algebra of `l`.
pub fn tensor_bch(l: &FreeLie, x: &LieElem, y: &LieElem) -> LieElem {
    let n = l.n();
    let s = series_log(&series_mul(&series_exp(&series_of(x), n), &series_exp(&series_of(y), n), n), n);
    let mut terms = SVec::new();
    for (w, c) in s {
        terms.add_term(w, c);
    }
    LieElem { degree: 0, terms }
}
