//! Maurer–Cartan elements, the gauge action and BCH on degree 0.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::One;
use serde::Serialize;

use crate::derivations::{exp_derivation, DerLie, DerSpace, Derivation};
use crate::error::{Error, Result};
use crate::free_lie::{FreeLie, LieElem, Morphism};
use crate::graded::complex::{ChainComplex, DegreeWindow};
use crate::graded::group::{bch_series, LieOps};
use crate::graded::linalg::{kernel, solve, SVec, SparseMatrix};
use crate::graded::scalar::{q, Q};

/// da + ½[a,a]
pub fn mc_residual(l: &FreeLie, a: &LieElem) -> Result<LieElem> {
    if !a.is_zero() && a.degree != -1 {
        return Err(Error::Degree(format!("MC element must have degree -1, got {}", a.degree)));
    }
    let a = LieElem { degree: -1, terms: a.terms.clone() };
    let mut r = l.differential(&a);
    r.add_scaled(&l.bracket(&a, &a), &Q::new(1.into(), 2.into()));
    r.degree = -2;
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MCElement {
    pub value: LieElem,
    pub residual: LieElem,
}

impl MCElement {
    pub fn new(l: &FreeLie, a: LieElem) -> Result<Self> {
        let residual = mc_residual(l, &a)?;
        if !residual.is_zero() {
            return Err(Error::ResidualNonzero);
        }
        Ok(MCElement { value: LieElem { degree: -1, terms: a.terms }, residual })
    }

    pub fn zero() -> Self {
        MCElement { value: LieElem::zero(-1), residual: LieElem::zero(-2) }
    }
}

fn check_degree_zero(x: &LieElem) -> Result<()> {
    if !x.is_zero() && x.degree != 0 {
        return Err(Error::Degree(format!("expected a degree 0 element, got degree {}", x.degree)));
    }
    Ok(())
}

/// Σ_{k≥0} c_k ad_x^k(a), stopping once the terms vanish.
fn ad_series(l: &FreeLie, x: &LieElem, a: &LieElem, coef: impl Fn(usize) -> Q) -> LieElem {
    let mut out = a.scaled(&coef(0));
    let mut t = a.clone();
    for k in 1.. {
        t = l.bracket(x, &t);
        if t.is_zero() {
            break;
        }
        out.add_scaled(&t, &coef(k));
    }
    out
}

fn inv_factorial(k: usize) -> Q {
    let mut f = Q::one();
    for i in 2..=k {
        f /= q(i as i64);
    }
    f
}

/// x 𝒢 a = e^{ad_x}(a) − ((e^{ad_x} − 1)/ad_x)(dx)
pub fn gauge_act(l: &FreeLie, x: &LieElem, a: &MCElement) -> Result<MCElement> {
    check_degree_zero(x)?;
    let x = LieElem { degree: 0, terms: x.terms.clone() };
    let mut out = ad_series(l, &x, &a.value, inv_factorial);
    let dx = l.differential(&x);
    out = out.minus(&ad_series(l, &x, &dx, |k| inv_factorial(k + 1)));
    out.degree = -1;
    let residual = mc_residual(l, &out)?;
    Ok(MCElement { value: out, residual })
}

/// Degree-0 Lie operations of a truncated free Lie algebra.
pub struct DegreeZero<'a>(pub &'a FreeLie);

impl LieOps for DegreeZero<'_> {
    type E = LieElem;
    fn zero(&self) -> LieElem {
        LieElem::zero(0)
    }
    fn add(&self, a: &LieElem, b: &LieElem) -> LieElem {
        a.plus(b)
    }
    fn scale(&self, a: &LieElem, c: &Q) -> LieElem {
        a.scaled(c)
    }
    fn bracket(&self, a: &LieElem, b: &LieElem) -> LieElem {
        self.0.bracket(a, b)
    }
    fn is_zero(&self, a: &LieElem) -> bool {
        a.is_zero()
    }
}

pub fn bch(l: &FreeLie, x: &LieElem, y: &LieElem) -> Result<LieElem> {
    check_degree_zero(x)?;
    check_degree_zero(y)?;
    let x = LieElem { degree: 0, terms: x.terms.clone() };
    let y = LieElem { degree: 0, terms: y.terms.clone() };
    let mut z = bch_series(&DegreeZero(l), &x, &y, l.n())?;
    z.degree = 0;
    Ok(z)
}

/// BCH of degree-0 derivations of one algebra.
pub fn bch_derivations(space: &DerSpace, a: &Derivation, b: &Derivation) -> Result<Derivation> {
    bch_series(&DerLie(space), a, b, 4 * space.target().n() + 8)
}

/// d_a = d + ad_a
#[derive(Clone, Debug)]
pub struct PerturbedDifferential {
    pub algebra: Arc<FreeLie>,
    pub mc: MCElement,
}

impl PerturbedDifferential {
    pub fn new(l: &Arc<FreeLie>, a: &MCElement) -> Self {
        PerturbedDifferential { algebra: l.clone(), mc: a.clone() }
    }

    pub fn apply(&self, x: &LieElem) -> LieElem {
        let l = &self.algebra;
        let mut out = l.differential(x).plus(&l.bracket(&self.mc.value, x));
        out.degree = x.degree - 1;
        out
    }
}

/// L^a: the perturbed complex with degree 0 replaced by ker d_a.
#[derive(Clone, Debug)]
pub struct ComponentDgl {
    pub differential: PerturbedDifferential,
    /// Basis of ker d_a ∩ L_0 in coordinates of L_0.
    pub zero_cycles: Vec<SVec<usize>>,
}

pub fn component_dgl(l: &Arc<FreeLie>, a: &MCElement) -> ComponentDgl {
    let pd = PerturbedDifferential::new(l, a);
    let cols: Vec<SVec<usize>> =
        (0..l.dim(0)).map(|i| l.coords_or_panic(&pd.apply(l.basis_elem(0, i)))).collect();
    let zero_cycles = kernel(&SparseMatrix::from_columns(l.dim(-1), cols));
    ComponentDgl { differential: pd, zero_cycles }
}

impl ComponentDgl {
    pub fn algebra(&self) -> &Arc<FreeLie> {
        &self.differential.algebra
    }

    pub fn contains(&self, x: &LieElem) -> bool {
        x.degree > 0 || (x.degree == 0 && self.differential.apply(x).is_zero()) || x.is_zero()
    }

    /// Chain complex in degrees 0..=max, with an empty degree −1 so H_0 is computable.
    pub fn chain_complex(&self, max: i64) -> Result<ChainComplex> {
        let l = self.algebra().clone();
        let window = DegreeWindow::new(-1, max)?;
        let mut labels = BTreeMap::new();
        labels.insert(-1, Vec::new());
        labels.insert(0, (0..self.zero_cycles.len()).map(|i| format!("z{i}")).collect::<Vec<_>>());
        for k in 1..=max {
            labels.insert(k, l.basis(k).map(|b| b.labels.clone()).unwrap_or_default());
        }
        let z = self.zero_cycles.clone();
        let mut ech = crate::graded::linalg::Echelon::new(true);
        for (i, v) in z.iter().enumerate() {
            let _ = ech.insert(v.clone(), Some(i));
        }
        Ok(ChainComplex::build(window, labels, |k, i| {
            if k == 0 {
                return SVec::new();
            }
            let img = self.differential.apply(l.basis_elem(k, i));
            let c = l.coords_or_panic(&img);
            if k == 1 {
                ech.reduce(&c).combo
            } else {
                c
            }
        }))
    }
}

/// Outcome of the stagewise witness search.
#[derive(Clone, Debug, Serialize)]
pub enum GaugeSearch {
    Witness(#[serde(skip)] LieElem),
    /// The length-`stage` system has no solution; `obstruction` is its
    /// right-hand side rendered in L.
    NotEquivalentAt { truncation: usize, stage: usize, obstruction: String },
}

impl GaugeSearch {
    pub fn witness(&self) -> Option<&LieElem> {
        match self {
            GaugeSearch::Witness(x) => Some(x),
            _ => None,
        }
    }
}

/// Length-preserving part of d on length-k degree-0 basis elements.
fn linear_stage_matrix(l: &FreeLie, k: usize) -> (Vec<usize>, SparseMatrix) {
    let idx: Vec<usize> = l
        .basis(0)
        .map(|b| (0..b.len()).filter(|&i| b.seqs[i].len() == k).collect())
        .unwrap_or_default();
    let cols = idx
        .iter()
        .map(|&i| l.coords_or_panic(&l.differential(l.basis_elem(0, i)).lcs_component(k)))
        .collect();
    (idx, SparseMatrix::from_columns(l.dim(-1), cols))
}

pub fn find_gauge_witness(l: &FreeLie, a: &MCElement, b: &MCElement, max_length: usize) -> Result<GaugeSearch> {
    let max_length = max_length.min(l.n());
    let mut x = LieElem::zero(0);
    for k in 1..=max_length {
        let cur = gauge_act(l, &x, a)?;
        let r = cur.value.minus(&b.value).lcs_component(k);
        if r.is_zero() {
            continue;
        }
        let (idx, m) = linear_stage_matrix(l, k);
        let rhs = l.coords_or_panic(&r);
        match solve(&m, &rhs) {
            Some(sol) => {
                for (j, c) in sol.iter() {
                    x.add_scaled(l.basis_elem(0, idx[*j]), c);
                }
                x.degree = 0;
            }
            None => {
                return Ok(GaugeSearch::NotEquivalentAt { truncation: l.n(), stage: k, obstruction: l.render(&r) })
            }
        }
    }
    let fin = gauge_act(l, &x, a)?;
    if fin.value != b.value {
        let r = fin.value.minus(&b.value);
        let stage = r.min_length().unwrap_or(0);
        return Ok(GaugeSearch::NotEquivalentAt { truncation: l.n(), stage, obstruction: l.render(&r) });
    }
    Ok(GaugeSearch::Witness(x))
}

/// e^{ad_x} as an automorphism given on generators.
pub fn exp_ad(l: &Arc<FreeLie>, x: &LieElem) -> Result<Morphism> {
    check_degree_zero(x)?;
    let space = DerSpace::full(l);
    let x = LieElem { degree: 0, terms: x.terms.clone() };
    exp_derivation(&space, &space.adjoint(&x))
}

/// e^θ for a degree-0 derivation of L.
pub fn exp_aut(space: &DerSpace, theta: &Derivation) -> Result<Morphism> {
    exp_derivation(space, theta)
}

/// φ∘ψ on generators.
pub fn compose(phi: &Morphism, psi: &Morphism) -> Result<Morphism> {
    if !Arc::ptr_eq(&psi.target, &phi.source) {
        return Err(Error::AlgebraMismatch);
    }
    Morphism::new(psi.source.clone(), phi.target.clone(), psi.images.iter().map(|v| phi.apply(v)).collect())
}
