//! Chain complexes over a finite degree window and their homology.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::linalg::{Echelon, SVec, SparseMatrix};
use super::scalar::Q;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeWindow {
    pub min: i64,
    pub max: i64,
}

impl DegreeWindow {
    pub fn new(min: i64, max: i64) -> Result<Self> {
        if min > max {
            return Err(Error::Input(format!("empty window {min}..{max}")));
        }
        Ok(DegreeWindow { min, max })
    }

    pub fn contains(&self, n: i64) -> bool {
        self.min <= n && n <= self.max
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> {
        self.min..=self.max
    }

    /// Degrees whose homology is computable (one step of margin on each side).
    pub fn homology_degrees(&self) -> impl Iterator<Item = i64> {
        (self.min + 1)..=(self.max - 1)
    }

    pub fn check_margin(&self, n: i64) -> Result<()> {
        if n - 1 < self.min || n + 1 > self.max {
            return Err(Error::WindowTooNarrow { degree: n, min: self.min, max: self.max });
        }
        Ok(())
    }
}

impl std::fmt::Display for DegreeWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.min, self.max)
    }
}

/// `boundary[n]` maps degree `n` coordinates to degree `n-1` coordinates.
/// It is present for every `n` in the window with `n-1` also in the window.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    pub window: DegreeWindow,
    pub labels: BTreeMap<i64, Vec<String>>,
    pub boundary: BTreeMap<i64, SparseMatrix>,
}

impl ChainComplex {
    /// Builds a complex from per-degree dimensions and a boundary function
    /// giving the image of basis vector `i` in degree `n`.
    pub fn build(
        window: DegreeWindow,
        labels: BTreeMap<i64, Vec<String>>,
        mut bd: impl FnMut(i64, usize) -> SVec<usize>,
    ) -> Self {
        let mut boundary = BTreeMap::new();
        for n in (window.min + 1)..=window.max {
            let cols = labels.get(&n).map(|l| l.len()).unwrap_or(0);
            let rows = labels.get(&(n - 1)).map(|l| l.len()).unwrap_or(0);
            let columns = (0..cols).map(|i| bd(n, i)).collect();
            boundary.insert(n, SparseMatrix::from_columns(rows, columns));
        }
        ChainComplex { window, labels, boundary }
    }

    pub fn dim(&self, n: i64) -> usize {
        self.labels.get(&n).map(|l| l.len()).unwrap_or(0)
    }

    pub fn dims(&self) -> BTreeMap<i64, usize> {
        self.window.degrees().map(|n| (n, self.dim(n))).collect()
    }

    pub fn boundary_matrix(&self, n: i64) -> SparseMatrix {
        match self.boundary.get(&n) {
            Some(m) => m.clone(),
            None => SparseMatrix::zero(self.dim(n - 1), self.dim(n)),
        }
    }

    /// First degree where ∂∘∂ ≠ 0, if any.
    pub fn square_zero_failure(&self) -> Option<i64> {
        for n in (self.window.min + 2)..=self.window.max {
            let a = &self.boundary[&n];
            let b = &self.boundary[&(n - 1)];
            if !b.compose(a).is_zero() {
                return Some(n);
            }
        }
        None
    }

    pub fn betti_table(&self) -> BTreeMap<i64, usize> {
        self.window.homology_degrees().map(|n| (n, homology(self, n).unwrap().betti)).collect()
    }
}

/// Homology in one degree together with enough data to coordinatize classes.
#[derive(Clone, Debug)]
pub struct Homology {
    pub degree: i64,
    pub betti: usize,
    pub cycles: Vec<SVec<usize>>,
    pub boundaries: Vec<SVec<usize>>,
    /// Cycles representing a basis of homology.
    pub representatives: Vec<SVec<usize>>,
    bd_echelon: Echelon<usize>,
    rep_echelon: Echelon<usize>,
}

impl Homology {
    /// Coordinates of the class of a cycle in the representative basis.
    /// `None` if `z` is not in the span of cycles.
    pub fn class_of(&self, z: &SVec<usize>) -> Option<Vec<Q>> {
        let r = self.bd_echelon.reduce(z).remainder;
        let red = self.rep_echelon.reduce(&r);
        if !red.remainder.is_zero() {
            return None;
        }
        let mut out = vec![Q::zero(); self.betti];
        for (i, c) in red.combo.iter() {
            out[*i] = c.clone();
        }
        Some(out)
    }

    pub fn is_boundary(&self, z: &SVec<usize>) -> bool {
        self.bd_echelon.contains(z)
    }
}

pub fn homology(c: &ChainComplex, n: i64) -> Result<Homology> {
    c.window.check_margin(n)?;
    let dn = c.boundary_matrix(n);
    let dn1 = c.boundary_matrix(n + 1);
    let cycles = super::linalg::kernel(&dn);
    let mut bd_echelon: Echelon<usize> = Echelon::new(false);
    let mut boundaries = Vec::new();
    for col in dn1.columns() {
        if bd_echelon.insert(col.clone(), None).is_ok() {
            boundaries.push(col.clone());
        }
    }
    let mut rep_echelon: Echelon<usize> = Echelon::new(true);
    let mut representatives = Vec::new();
    for z in &cycles {
        let r = bd_echelon.reduce(z).remainder;
        if r.is_zero() {
            continue;
        }
        let tag = representatives.len();
        if rep_echelon.insert(r, Some(tag)).is_ok() {
            representatives.push(z.clone());
        }
    }
    Ok(Homology {
        degree: n,
        betti: representatives.len(),
        cycles,
        boundaries,
        representatives,
        bd_echelon,
        rep_echelon,
    })
}

/// Matrix of the map induced on homology by a chain map given on basis
/// vectors. Columns index classes of `src`, rows classes of `dst`.
pub fn induced_map(
    src: &Homology,
    dst: &Homology,
    f: impl Fn(&SVec<usize>) -> SVec<usize>,
) -> Result<SparseMatrix> {
    let mut cols = Vec::new();
    for z in &src.representatives {
        let img = f(z);
        let c = dst.class_of(&img).ok_or_else(|| {
            Error::Certificate(format!("image of a degree {} cycle is not a cycle", src.degree))
        })?;
        cols.push(SVec::from_dense(&c));
    }
    Ok(SparseMatrix::from_columns(dst.betti, cols))
}
