//! Sparse exact linear algebra.
//!
//! Vectors are ordered maps from keys to nonzero rationals. Everything is
//! deterministic: keys are ordered and no hashing is involved.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::scalar::{fmt_q, Q};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SVec<K: Ord>(pub BTreeMap<K, Q>);

impl<K: Ord + Clone> Default for SVec<K> {
    fn default() -> Self {
        SVec(BTreeMap::new())
    }
}

impl<K: Ord + Clone> SVec<K> {
    pub fn new() -> Self {
        SVec(BTreeMap::new())
    }

    pub fn unit(k: K) -> Self {
        let mut m = BTreeMap::new();
        m.insert(k, Q::one());
        SVec(m)
    }

    pub fn single(k: K, c: Q) -> Self {
        let mut v = SVec::new();
        v.add_term(k, c);
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, k: &K) -> Option<&Q> {
        self.0.get(k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Q)> {
        self.0.iter()
    }

    pub fn add_term(&mut self, k: K, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.0.entry(k) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// self += c * other
    pub fn add_scaled(&mut self, other: &SVec<K>, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (k, v) in other.0.iter() {
            self.add_term(k.clone(), v * c);
        }
    }

    pub fn scaled(&self, c: &Q) -> SVec<K> {
        if c.is_zero() {
            return SVec::new();
        }
        SVec(self.0.iter().map(|(k, v)| (k.clone(), v * c)).collect())
    }

    pub fn plus(&self, other: &SVec<K>) -> SVec<K> {
        let mut r = self.clone();
        r.add_scaled(other, &Q::one());
        r
    }

    pub fn minus(&self, other: &SVec<K>) -> SVec<K> {
        let mut r = self.clone();
        r.add_scaled(other, &-Q::one());
        r
    }

    pub fn leading(&self) -> Option<(&K, &Q)> {
        self.0.iter().next()
    }

    pub fn map_keys<K2: Ord + Clone>(&self, f: impl Fn(&K) -> K2) -> SVec<K2> {
        let mut r = SVec::new();
        for (k, v) in self.0.iter() {
            r.add_term(f(k), v.clone());
        }
        r
    }
}

impl SVec<usize> {
    pub fn to_dense(&self, n: usize) -> Vec<Q> {
        let mut d = vec![Q::zero(); n];
        for (k, v) in self.0.iter() {
            d[*k] = v.clone();
        }
        d
    }

    pub fn from_dense(d: &[Q]) -> Self {
        let mut v = SVec::new();
        for (i, c) in d.iter().enumerate() {
            v.add_term(i, c.clone());
        }
        v
    }
}

/// Column-stored sparse matrix. Column `j` is the image of basis vector `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    columns: Vec<SVec<usize>>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, columns: vec![SVec::new(); cols] }
    }

    pub fn from_columns(rows: usize, columns: Vec<SVec<usize>>) -> Self {
        debug_assert!(columns.iter().all(|c| c.0.keys().all(|&r| r < rows)));
        SparseMatrix { rows, cols: columns.len(), columns }
    }

    pub fn from_dense(d: &[Vec<Q>]) -> Self {
        let rows = d.len();
        let cols = d.first().map(|r| r.len()).unwrap_or(0);
        let mut m = SparseMatrix::zero(rows, cols);
        for (i, r) in d.iter().enumerate() {
            for (j, c) in r.iter().enumerate() {
                m.columns[j].add_term(i, c.clone());
            }
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, e: impl IntoIterator<Item = ((usize, usize), Q)>) -> Self {
        let mut m = SparseMatrix::zero(rows, cols);
        for ((r, c), v) in e {
            m.columns[c].add_term(r, v);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix::from_columns(n, (0..n).map(SVec::unit).collect())
    }

    pub fn column(&self, j: usize) -> &SVec<usize> {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SVec<usize>] {
        &self.columns
    }

    pub fn get(&self, r: usize, c: usize) -> Q {
        self.columns[c].get(&r).cloned().unwrap_or_else(Q::zero)
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> BTreeMap<(usize, usize), Q> {
        let mut m = BTreeMap::new();
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col.iter() {
                m.insert((*i, j), v.clone());
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_zero())
    }

    pub fn apply(&self, v: &SVec<usize>) -> SVec<usize> {
        let mut r = SVec::new();
        for (j, c) in v.iter() {
            r.add_scaled(&self.columns[*j], c);
        }
        r
    }

    /// self ∘ other
    pub fn compose(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows);
        SparseMatrix::from_columns(self.rows, other.columns.iter().map(|c| self.apply(c)).collect())
    }

    pub fn to_dense(&self) -> Vec<Vec<Q>> {
        let mut d = vec![vec![Q::zero(); self.cols]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col.iter() {
                d[*i][j] = v.clone();
            }
        }
        d
    }

    pub fn render(&self) -> Vec<Vec<String>> {
        self.to_dense().iter().map(|r| r.iter().map(fmt_q).collect()).collect()
    }

    pub fn rank(&self) -> usize {
        let mut e: Echelon<usize> = Echelon::new(false);
        for c in &self.columns {
            let _ = e.insert(c.clone(), None);
        }
        e.rank()
    }
}

/// Incrementally built echelon basis. Each stored row has a distinct leading
/// key with coefficient 1. With tracking on, every row remembers how it was
/// combined from the inserted vectors (indexed by caller-supplied tags).
#[derive(Clone, Debug)]
pub struct Echelon<K: Ord + Clone> {
    rows: BTreeMap<K, (SVec<K>, SVec<usize>)>,
    track: bool,
}

pub struct Reduction<K: Ord + Clone> {
    pub remainder: SVec<K>,
    /// input = remainder + Σ combo[i] · inserted[i]
    pub combo: SVec<usize>,
}

impl<K: Ord + Clone> Echelon<K> {
    pub fn new(track: bool) -> Self {
        Echelon { rows: BTreeMap::new(), track }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> {
        self.rows.keys()
    }

    pub fn reduce(&self, v: &SVec<K>) -> Reduction<K> {
        let mut work = v.0.clone();
        let mut rem = SVec::new();
        let mut combo = SVec::new();
        while let Some((k, c)) = work.pop_first() {
            match self.rows.get(&k) {
                Some((row, rc)) => {
                    for (k2, v2) in row.0.iter().skip(1) {
                        let delta = -(v2 * &c);
                        match work.entry(k2.clone()) {
                            std::collections::btree_map::Entry::Vacant(e) => {
                                e.insert(delta);
                            }
                            std::collections::btree_map::Entry::Occupied(mut e) => {
                                *e.get_mut() += delta;
                                if e.get().is_zero() {
                                    e.remove();
                                }
                            }
                        }
                    }
                    if self.track {
                        combo.add_scaled(rc, &c);
                    }
                }
                None => {
                    rem.0.insert(k, c);
                }
            }
        }
        Reduction { remainder: rem, combo }
    }

    pub fn contains(&self, v: &SVec<K>) -> bool {
        self.reduce(v).remainder.is_zero()
    }

    /// Inserts `v` under `tag`. Returns `Ok(())` if it enlarged the span,
    /// otherwise `Err(relation)` where `relation` is a combination of tags
    /// (including `tag` with coefficient 1) mapping to zero.
    pub fn insert(&mut self, v: SVec<K>, tag: Option<usize>) -> Result<(), SVec<usize>> {
        let red = self.reduce(&v);
        let mut combo = SVec::new();
        if self.track {
            if let Some(t) = tag {
                combo.add_term(t, Q::one());
            }
            combo.add_scaled(&red.combo, &-Q::one());
        }
        if red.remainder.is_zero() {
            return Err(combo);
        }
        let (lead, lc) = {
            let (k, c) = red.remainder.leading().unwrap();
            (k.clone(), c.clone())
        };
        let inv = Q::one() / lc;
        let row = red.remainder.scaled(&inv);
        let rc = combo.scaled(&inv);
        self.rows.insert(lead, (row, rc));
        Ok(())
    }
}

/// Reduced row echelon form by Gauss–Jordan elimination.
pub fn rref(m: &SparseMatrix) -> (SparseMatrix, usize, Vec<usize>) {
    let mut rows: Vec<BTreeMap<usize, Q>> = vec![BTreeMap::new(); m.rows];
    for (j, col) in m.columns.iter().enumerate() {
        for (i, v) in col.iter() {
            rows[*i].insert(j, v.clone());
        }
    }
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| rows[i].contains_key(&c)) else { continue };
        rows.swap(r, p);
        let inv = Q::one() / rows[r][&c].clone();
        for v in rows[r].values_mut() {
            *v *= &inv;
        }
        let prow = rows[r].clone();
        for i in 0..m.rows {
            if i == r {
                continue;
            }
            if let Some(f) = rows[i].get(&c).cloned() {
                for (k, v) in prow.iter() {
                    let e = rows[i].entry(*k).or_insert_with(Q::zero);
                    *e -= v * &f;
                    if e.is_zero() {
                        rows[i].remove(k);
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let out = SparseMatrix::from_entries(
        m.rows,
        m.cols,
        rows.into_iter().enumerate().flat_map(|(i, row)| row.into_iter().map(move |(j, v)| ((i, j), v))),
    );
    (out, r, pivots)
}

/// One solution of `m x = b`, free variables zero in column order.
pub fn solve(m: &SparseMatrix, b: &SVec<usize>) -> Option<SVec<usize>> {
    let mut e: Echelon<usize> = Echelon::new(true);
    for (j, c) in m.columns.iter().enumerate() {
        let _ = e.insert(c.clone(), Some(j));
    }
    let red = e.reduce(b);
    if red.remainder.is_zero() {
        Some(red.combo)
    } else {
        None
    }
}

/// Basis of the kernel of `m`, one vector per non-pivot column.
pub fn kernel(m: &SparseMatrix) -> Vec<SVec<usize>> {
    let mut e: Echelon<usize> = Echelon::new(true);
    let mut out = Vec::new();
    for (j, c) in m.columns.iter().enumerate() {
        if let Err(rel) = e.insert(c.clone(), Some(j)) {
            out.push(rel);
        }
    }
    out
}
