//! BCH products on nilpotent Lie algebras.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};

use super::linalg::SVec;
use super::scalar::{factorial, q, Q};
use crate::error::{Error, Result};

/// Minimal Lie algebra interface used by the BCH series.
pub trait LieOps {
    type E: Clone + PartialEq;
    fn zero(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn scale(&self, a: &Self::E, c: &Q) -> Self::E;
    fn bracket(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
}

/// Word in two letters, 0 = X, 1 = Y.
type Word2 = Vec<u8>;

fn series_mul(a: &BTreeMap<Word2, Q>, b: &BTreeMap<Word2, Q>, n: usize) -> BTreeMap<Word2, Q> {
    let mut out: BTreeMap<Word2, Q> = BTreeMap::new();
    for (u, x) in a {
        for (v, y) in b {
            if u.len() + v.len() > n {
                continue;
            }
            let mut w = u.clone();
            w.extend_from_slice(v);
            let e = out.entry(w).or_insert_with(Q::zero);
            *e += x * y;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Coefficients of log(e^X e^Y) in the free associative algebra, grouped by
/// word length, up to length `n`.
fn bch_coefficients(n: usize) -> Arc<Vec<BTreeMap<Word2, Q>>> {
    static CACHE: OnceLock<Mutex<BTreeMap<usize, Arc<Vec<BTreeMap<Word2, Q>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(c) = cache.lock().unwrap().get(&n) {
        return c.clone();
    }
    let exp1 = |letter: u8| {
        let mut s = BTreeMap::new();
        for k in 0..=n {
            s.insert(vec![letter; k], Q::one() / factorial(k));
        }
        s
    };
    let mut z = series_mul(&exp1(0), &exp1(1), n);
    z.remove(&Vec::new());
    let mut log: BTreeMap<Word2, Q> = BTreeMap::new();
    let mut power = z.clone();
    for k in 1..=n {
        let c = if k % 2 == 1 { Q::one() } else { -Q::one() } / q(k as i64);
        for (w, v) in &power {
            *log.entry(w.clone()).or_insert_with(Q::zero) += v * &c;
        }
        power = series_mul(&power, &z, n);
    }
    let mut by_len = vec![BTreeMap::new(); n + 1];
    for (w, v) in log {
        if !v.is_zero() {
            by_len[w.len()].insert(w, v);
        }
    }
    let r = Arc::new(by_len);
    cache.lock().unwrap().insert(n, r.clone());
    r
}

/// BCH(x, y) = log(e^x e^y) for degree-0 elements of a nilpotent Lie algebra.
/// Homogeneous parts use the Dynkin–Specht–Wever projection
/// Z_n = (1/n) Σ_w c_w [w1,[w2,…,wn]]. The series stops at the first order
/// where every nested bracket of x and y vanishes.
pub fn bch_series<L: LieOps>(ops: &L, x: &L::E, y: &L::E, max_order: usize) -> Result<L::E> {
    let mut total = ops.add(x, y);
    let mut order = 2;
    loop {
        // right-normed brackets of all words of this order, built from suffixes
        let mut level: BTreeMap<Word2, L::E> = BTreeMap::new();
        level.insert(vec![0], x.clone());
        level.insert(vec![1], y.clone());
        for _ in 1..order {
            let mut next = BTreeMap::new();
            for (w, e) in &level {
                if ops.is_zero(e) {
                    continue;
                }
                for (letter, g) in [(0u8, x), (1u8, y)] {
                    let b = ops.bracket(g, e);
                    if !ops.is_zero(&b) {
                        let mut w2 = vec![letter];
                        w2.extend_from_slice(w);
                        next.insert(w2, b);
                    }
                }
            }
            level = next;
        }
        if level.is_empty() {
            return Ok(total);
        }
        if order > max_order {
            return Err(Error::NotNilpotent(max_order));
        }
        let coeffs = bch_coefficients(order);
        let inv = Q::one() / q(order as i64);
        for (w, c) in coeffs[order].iter() {
            if let Some(e) = level.get(w) {
                total = ops.add(&total, &ops.scale(e, &(c * &inv)));
            }
        }
        order += 1;
    }
}

/// A finite-dimensional Lie algebra given by structure constants.
#[derive(Debug)]
pub struct NilpotentLie {
    pub name: String,
    pub dim: usize,
    /// structure[i][j] = [e_i, e_j]
    pub structure: Vec<Vec<SVec<usize>>>,
}

impl LieOps for NilpotentLie {
    type E = SVec<usize>;
    fn zero(&self) -> SVec<usize> {
        SVec::new()
    }
    fn add(&self, a: &SVec<usize>, b: &SVec<usize>) -> SVec<usize> {
        a.plus(b)
    }
    fn scale(&self, a: &SVec<usize>, c: &Q) -> SVec<usize> {
        a.scaled(c)
    }
    fn bracket(&self, a: &SVec<usize>, b: &SVec<usize>) -> SVec<usize> {
        let mut r = SVec::new();
        for (i, x) in a.iter() {
            for (j, y) in b.iter() {
                r.add_scaled(&self.structure[*i][*j], &(x * y));
            }
        }
        r
    }
    fn is_zero(&self, a: &SVec<usize>) -> bool {
        a.is_zero()
    }
}

impl NilpotentLie {
    pub fn abelian(name: &str, dim: usize) -> Arc<Self> {
        Arc::new(NilpotentLie { name: name.into(), dim, structure: vec![vec![SVec::new(); dim]; dim] })
    }

    /// Dimensions of the lower central series γ_1 ⊃ γ_2 ⊃ … down to 0,
    /// or an error if it does not reach 0 within `dim + 1` steps.
    pub fn lower_central_series(&self) -> Result<Vec<usize>> {
        use super::linalg::Echelon;
        let mut dims = vec![self.dim];
        let mut current: Vec<SVec<usize>> = (0..self.dim).map(SVec::unit).collect();
        for _ in 0..=self.dim {
            if current.is_empty() {
                return Ok(dims);
            }
            let mut e: Echelon<usize> = Echelon::new(false);
            let mut next = Vec::new();
            for i in 0..self.dim {
                for c in &current {
                    let b = self.bracket(&SVec::unit(i), c);
                    if e.insert(b.clone(), None).is_ok() {
                        next.push(b);
                    }
                }
            }
            dims.push(next.len());
            current = next;
        }
        Err(Error::NotNilpotent(self.dim))
    }

    /// Nilpotency class: number of nonzero terms of the lower central series.
    pub fn nilpotency_class(&self) -> Result<usize> {
        let lcs = self.lower_central_series()?;
        Ok(lcs.iter().filter(|&&d| d > 0).count())
    }
}

#[derive(Clone, Debug)]
pub struct BCHGroupElement {
    pub algebra: Arc<NilpotentLie>,
    pub coords: SVec<usize>,
}

impl PartialEq for BCHGroupElement {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.algebra, &o.algebra) && self.coords == o.coords
    }
}

impl BCHGroupElement {
    pub fn new(algebra: &Arc<NilpotentLie>, coords: SVec<usize>) -> Self {
        BCHGroupElement { algebra: algebra.clone(), coords }
    }

    pub fn identity(algebra: &Arc<NilpotentLie>) -> Self {
        BCHGroupElement::new(algebra, SVec::new())
    }

    pub fn inverse(&self) -> Self {
        BCHGroupElement::new(&self.algebra, self.coords.scaled(&-Q::one()))
    }
}

pub fn bch_group_mul(a: &BCHGroupElement, b: &BCHGroupElement) -> Result<BCHGroupElement> {
    if !Arc::ptr_eq(&a.algebra, &b.algebra) {
        return Err(Error::AlgebraMismatch);
    }
    let alg = &a.algebra;
    let c = bch_series(alg.as_ref(), &a.coords, &b.coords, alg.dim + 2)?;
    Ok(BCHGroupElement::new(alg, c))
}
