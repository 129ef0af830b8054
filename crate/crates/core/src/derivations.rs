//! Derivations of truncated free dgl's and their complexes.
//!
//! A derivation is stored by its values on the generators of its source.
//! Along a carrier morphism f it is extended by
//! θ[a,b] = [θa, f b] + (-1)^{|θ||a|}[f a, θ b].

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_lie::{FreeLie, LieElem, Morphism, SubDglInclusion, Word};
use crate::graded::complex::{homology, ChainComplex, DegreeWindow, Homology};
use crate::graded::group::{LieOps, NilpotentLie};
use crate::graded::linalg::{solve, Echelon, SVec, SparseMatrix};
use crate::graded::scalar::{odd, sign, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub degree: i64,
    /// One value per source generator, in the target algebra.
    pub values: Vec<LieElem>,
}

impl Derivation {
    pub fn zero(space: &DerSpace, degree: i64) -> Self {
        let src = &space.carrier.source;
        Derivation { degree, values: (0..src.ngens()).map(|g| LieElem::zero(src.gen_degree(g) + degree)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn plus(&self, o: &Derivation) -> Derivation {
        Derivation { degree: self.degree, values: self.values.iter().zip(&o.values).map(|(a, b)| a.plus(b)).collect() }
    }

    pub fn scaled(&self, c: &Q) -> Derivation {
        Derivation { degree: self.degree, values: self.values.iter().map(|a| a.scaled(c)).collect() }
    }

    pub fn minus(&self, o: &Derivation) -> Derivation {
        self.plus(&o.scaled(&-Q::one()))
    }
}

/// Where derivations live: a carrier f: source → target and the source
/// generators on which they must vanish.
#[derive(Clone, Debug)]
pub struct DerSpace {
    pub carrier: Morphism,
    pub vanishing: Vec<usize>,
}

impl DerSpace {
    /// Der L
    pub fn full(l: &Arc<FreeLie>) -> Self {
        DerSpace { carrier: Morphism::identity(l), vanishing: Vec::new() }
    }

    /// Der^M L: derivations of L vanishing on U.
    pub fn relative(inc: &SubDglInclusion) -> Self {
        DerSpace { carrier: Morphism::identity(&inc.ambient), vanishing: inc.sub_generators.clone() }
    }

    /// Der_f(M, L) along a morphism.
    pub fn along(f: &Morphism) -> Self {
        DerSpace { carrier: f.clone(), vanishing: Vec::new() }
    }

    pub fn source(&self) -> &Arc<FreeLie> {
        &self.carrier.source
    }

    pub fn target(&self) -> &Arc<FreeLie> {
        &self.carrier.target
    }

    pub fn is_endo(&self) -> bool {
        self.carrier.is_identity()
    }

    /// Generators carrying a free value.
    pub fn slots(&self) -> Vec<usize> {
        (0..self.source().ngens()).filter(|g| !self.vanishing.contains(g)).collect()
    }

    pub fn from_values(&self, degree: i64, values: BTreeMap<usize, LieElem>) -> Result<Derivation> {
        let mut d = Derivation::zero(self, degree);
        for (g, v) in values {
            if self.vanishing.contains(&g) && !v.is_zero() {
                return Err(Error::Shape(format!("derivation must vanish on {}", self.source().pres.generators[g].name)));
            }
            if !v.is_zero() && v.degree != self.source().gen_degree(g) + degree {
                return Err(Error::Degree(format!("value on generator {g} has degree {}", v.degree)));
            }
            d.values[g] = LieElem { degree: self.source().gen_degree(g) + degree, terms: v.terms };
        }
        Ok(d)
    }

    /// The value of θ on a source word.
    fn apply_word(&self, theta: &Derivation, w: &[u16]) -> SVec<Word> {
        let tgt = self.target();
        let src = self.source();
        let mut out = SVec::new();
        if self.is_endo() {
            let mut prefix_deg = 0i64;
            for i in 0..w.len() {
                let v = &theta.values[w[i] as usize];
                if !v.is_zero() {
                    let s = sign(theta.degree * prefix_deg);
                    for (u, c) in v.terms.iter() {
                        if w.len() - 1 + u.len() > tgt.n() {
                            continue;
                        }
                        let mut nw = Vec::with_capacity(w.len() - 1 + u.len());
                        nw.extend_from_slice(&w[..i]);
                        nw.extend_from_slice(u);
                        nw.extend_from_slice(&w[i + 1..]);
                        out.add_term(nw, &s * c);
                    }
                }
                prefix_deg += src.gen_degree(w[i] as usize);
            }
            return out;
        }
        let f = &self.carrier;
        // suffix products f(w_{i+1}) … f(w_k)
        let mut suffix = vec![SVec::unit(Vec::new()); w.len() + 1];
        for i in (0..w.len()).rev() {
            suffix[i] = tgt.mul_terms(&f.images[w[i] as usize].terms, &suffix[i + 1]);
        }
        let mut prefix: SVec<Word> = SVec::unit(Vec::new());
        let mut prefix_deg = 0i64;
        for i in 0..w.len() {
            let v = &theta.values[w[i] as usize];
            if !v.is_zero() {
                let t = tgt.mul_terms(&tgt.mul_terms(&prefix, &v.terms), &suffix[i + 1]);
                out.add_scaled(&t, &sign(theta.degree * prefix_deg));
            }
            prefix = tgt.mul_terms(&prefix, &f.images[w[i] as usize].terms);
            prefix_deg += src.gen_degree(w[i] as usize);
        }
        out
    }

    pub fn apply(&self, theta: &Derivation, a: &LieElem) -> LieElem {
        let mut out = SVec::new();
        for (w, c) in a.terms.iter() {
            out.add_scaled(&self.apply_word(theta, w), c);
        }
        LieElem { degree: a.degree + theta.degree, terms: out }
    }

    /// Dθ = d∘θ − (−1)^{|θ|} θ∘d
    pub fn differential(&self, theta: &Derivation) -> Derivation {
        let src = self.source();
        let tgt = self.target();
        let s = sign(theta.degree);
        let values = (0..src.ngens())
            .map(|g| {
                let a = tgt.differential(&theta.values[g]);
                let b = self.apply(theta, &src.pres.differential[g]);
                let mut v = a.minus(&b.scaled(&s));
                v.degree = src.gen_degree(g) + theta.degree - 1;
                v
            })
            .collect();
        Derivation { degree: theta.degree - 1, values }
    }

    /// [θ, η] = θ∘η − (−1)^{|θ||η|} η∘θ, for derivations of one algebra.
    pub fn bracket(&self, theta: &Derivation, eta: &Derivation) -> Derivation {
        assert!(self.is_endo(), "bracket needs derivations of a single algebra");
        let src = self.source();
        let s = sign(theta.degree * eta.degree);
        let values = (0..src.ngens())
            .map(|g| {
                let a = self.apply(theta, &eta.values[g]);
                let b = self.apply(eta, &theta.values[g]);
                let mut v = a.minus(&b.scaled(&s));
                v.degree = src.gen_degree(g) + theta.degree + eta.degree;
                v
            })
            .collect();
        Derivation { degree: theta.degree + eta.degree, values }
    }

    /// ad_x as a derivation of L.
    pub fn adjoint(&self, x: &LieElem) -> Derivation {
        let l = self.target();
        Derivation {
            degree: x.degree,
            values: (0..self.source().ngens())
                .map(|g| {
                    if self.vanishing.contains(&g) {
                        LieElem::zero(self.source().gen_degree(g) + x.degree)
                    } else {
                        l.bracket(x, &self.carrier.images[g])
                    }
                })
                .collect(),
        }
    }

    /// Slots (generator, basis index) of degree-k derivations.
    pub fn slot_basis(&self, k: i64) -> Vec<(usize, usize)> {
        let tgt = self.target();
        let mut out = Vec::new();
        for g in self.slots() {
            let d = self.source().gen_degree(g) + k;
            for i in 0..tgt.dim(d) {
                out.push((g, i));
            }
        }
        out
    }

    pub fn slot_label(&self, k: i64, slot: (usize, usize)) -> String {
        let (g, i) = slot;
        let d = self.source().gen_degree(g) + k;
        format!("{} ↦ {}", self.source().pres.generators[g].name, self.target().basis(d).unwrap().labels[i])
    }

    pub fn slot_derivation(&self, k: i64, slot: (usize, usize)) -> Derivation {
        let (g, i) = slot;
        let mut d = Derivation::zero(self, k);
        let deg = self.source().gen_degree(g) + k;
        d.values[g] = self.target().basis_elem(deg, i).clone();
        d
    }

    /// Coordinates in the slot basis of degree |θ|.
    pub fn coords(&self, theta: &Derivation) -> SVec<usize> {
        let tgt = self.target();
        let mut out = SVec::new();
        let mut offset = 0;
        for g in self.slots() {
            let d = self.source().gen_degree(g) + theta.degree;
            let c = tgt.coords(&theta.values[g]).expect("derivation value outside the Lie span");
            for (i, v) in c.iter() {
                out.add_term(offset + i, v.clone());
            }
            offset += tgt.dim(d);
        }
        out
    }

    pub fn from_coords(&self, k: i64, c: &SVec<usize>) -> Derivation {
        let basis = self.slot_basis(k);
        let mut d = Derivation::zero(self, k);
        for (j, v) in c.iter() {
            let (g, i) = basis[*j];
            let deg = self.source().gen_degree(g) + k;
            d.values[g].add_scaled(self.target().basis_elem(deg, i), v);
            d.values[g].degree = deg;
        }
        d
    }

    pub fn respects_vanishing(&self, theta: &Derivation) -> bool {
        self.vanishing.iter().all(|&g| theta.values[g].is_zero())
    }
}

/// Linear-part conditions on degree-0 derivations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum GCondition {
    /// θ(V^i) ⊂ V^{i+1} ⊕ L^{≥2} for the presentation's filtration.
    Full,
    /// The two-step flag V ⊃ U ⊃ 0 of a cell attachment: θ₁(V) ⊂ U.
    Gamma,
    /// Each constraint is a functional on linear-part coefficients,
    /// keyed by (generator, generator): coefficient of h in θ₁(g).
    Custom(Vec<Vec<((usize, usize), (i64, i64))>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DerKind {
    Der,
    DerRelative,
    DerAlong,
    CalDer,
    CalDerRelative,
}

impl DerKind {
    pub fn is_cal(&self) -> bool {
        matches!(self, DerKind::CalDer | DerKind::CalDerRelative)
    }

    pub fn name(&self) -> &'static str {
        match self {
            DerKind::Der => "Der L",
            DerKind::DerRelative => "Der^M L",
            DerKind::DerAlong => "Der_f(M,L)",
            DerKind::CalDer => "cal-Der L",
            DerKind::CalDerRelative => "cal-Der^M L",
        }
    }
}

/// A derivation complex on bases. For the connected kinds the degree-0
/// part is the subspace `zero_part` of slot coordinates, negative degrees
/// are zero.
#[derive(Clone, Debug)]
pub struct DerivationComplex {
    pub kind: DerKind,
    pub space: DerSpace,
    pub window: DegreeWindow,
    pub condition: Option<GCondition>,
    /// Basis of the degree-0 part in slot coordinates (connected kinds).
    pub zero_part: Option<Vec<SVec<usize>>>,
    /// Whether D(degree 1) lands in the degree-0 part cut out by the
    /// condition. When false the degree-0 part also contains those boundaries.
    pub closed: bool,
    pub complex: ChainComplex,
    zero_echelon: Option<Echelon<usize>>,
}

/// Allowed linear-part coefficients as (generator, generator) pairs that must vanish,
/// plus custom functionals.
fn linear_constraints(space: &DerSpace, cond: &GCondition) -> Result<Vec<SVec<(usize, usize)>>> {
    let l = space.source();
    let ng = l.ngens();
    let level: Vec<usize> = match cond {
        GCondition::Full => l.pres.filtration.clone().ok_or(Error::MissingFiltration)?,
        GCondition::Gamma => {
            (0..ng).map(|g| if space.vanishing.contains(&g) { 1 } else { 0 }).collect()
        }
        GCondition::Custom(cs) => {
            return Ok(cs
                .iter()
                .map(|c| {
                    let mut v = SVec::new();
                    for &((g, h), (n, d)) in c {
                        v.add_term((g, h), Q::new(n.into(), d.into()));
                    }
                    v
                })
                .collect())
        }
    };
    let mut out = Vec::new();
    for g in 0..ng {
        for h in 0..ng {
            if l.gen_degree(g) == l.gen_degree(h) && level[h] < level[g] + 1 {
                out.push(SVec::unit((g, h)));
            }
        }
    }
    Ok(out)
}

/// Coefficient functional "coefficient of h in θ₁(g)" in slot coordinates.
fn linear_coefficient_functional(space: &DerSpace, g: usize, h: usize) -> Option<usize> {
    let tgt = space.target();
    let mut offset = 0;
    for s in space.slots() {
        let d = space.source().gen_degree(s);
        if s == g {
            let b = tgt.basis(d)?;
            return b.seqs.iter().position(|seq| seq.len() == 1 && seq[0] as usize == h).map(|i| offset + i);
        }
        offset += tgt.dim(d);
    }
    None
}

impl DerivationComplex {
    pub fn build(space: DerSpace, kind: DerKind, cond: Option<GCondition>, window: DegreeWindow) -> Result<Self> {
        let cal = kind.is_cal();
        let zero_part = if cal {
            let cond = cond.clone().unwrap_or(GCondition::Full);
            let cons = linear_constraints(&space, &cond)?;
            // kernel of D on Der_0 intersected with the linear-part constraints
            let basis0 = space.slot_basis(0);
            let n0 = basis0.len();
            let basism1 = space.slot_basis(-1);
            let mut rows_off = basism1.len();
            let mut cols = Vec::with_capacity(n0);
            let funcs: Vec<SVec<usize>> = cons
                .iter()
                .map(|c| {
                    let mut f = SVec::new();
                    for ((g, h), v) in c.iter() {
                        if let Some(j) = linear_coefficient_functional(&space, *g, *h) {
                            f.add_term(j, v.clone());
                        }
                    }
                    f
                })
                .collect();
            for (j, slot) in basis0.iter().enumerate() {
                let th = space.slot_derivation(0, *slot);
                let mut col = space.coords(&space.differential(&th));
                for (r, f) in funcs.iter().enumerate() {
                    if let Some(v) = f.get(&j) {
                        col.add_term(basism1.len() + r, v.clone());
                    }
                }
                cols.push(col);
            }
            rows_off += funcs.len();
            let m = SparseMatrix::from_columns(rows_off, cols);
            Some(crate::graded::linalg::kernel(&m))
        } else {
            None
        };
        // On non-minimal presentations D(degree 1) can violate the linear-part
        // condition; the degree-0 part is then enlarged by those boundaries
        // so that the result is still a complex, and `closed` records it.
        let mut closed = true;
        let mut zero_part = zero_part;
        let zero_echelon = zero_part.as_mut().map(|z| {
            let mut e = Echelon::new(true);
            for (i, v) in z.iter().enumerate() {
                e.insert(v.clone(), Some(i)).expect("kernel basis is independent");
            }
            if window.contains(1) {
                for s in space.slot_basis(1) {
                    let b = space.coords(&space.differential(&space.slot_derivation(1, s)));
                    if e.insert(b.clone(), Some(z.len())).is_ok() {
                        z.push(b);
                        closed = false;
                    }
                }
            }
            e
        });
        let mut labels: BTreeMap<i64, Vec<String>> = BTreeMap::new();
        for k in window.degrees() {
            if cal && k < 0 {
                labels.insert(k, Vec::new());
            } else if cal && k == 0 {
                let z = zero_part.as_ref().unwrap();
                labels.insert(
                    0,
                    z.iter()
                        .enumerate()
                        .map(|(i, v)| {
                            let th = space.from_coords(0, v);
                            format!("z{}: {}", i, render_derivation(&space, &th))
                        })
                        .collect(),
                );
            } else {
                labels.insert(k, space.slot_basis(k).into_iter().map(|s| space.slot_label(k, s)).collect());
            }
        }
        let slot_bases: BTreeMap<i64, Vec<(usize, usize)>> =
            window.degrees().map(|k| (k, space.slot_basis(k))).collect();
        let complex = ChainComplex::build(window, labels, |k, i| {
            if cal && k <= 0 {
                return SVec::new();
            }
            let th = space.slot_derivation(k, slot_bases[&k][i]);
            let dth = space.differential(&th);
            let c = space.coords(&dth);
            if cal && k == 1 {
                zero_echelon.as_ref().unwrap().reduce(&c).combo
            } else {
                c
            }
        });
        Ok(DerivationComplex { kind, space, window, condition: cond, zero_part, closed, complex, zero_echelon })
    }

    /// Coordinates of a derivation in the complex's basis of its degree.
    pub fn coords(&self, theta: &Derivation) -> Option<SVec<usize>> {
        let c = self.space.coords(theta);
        if self.kind.is_cal() && theta.degree == 0 {
            let red = self.zero_echelon.as_ref().unwrap().reduce(&c);
            return if red.remainder.is_zero() { Some(red.combo) } else { None };
        }
        if self.kind.is_cal() && theta.degree < 0 {
            return if theta.is_zero() { Some(SVec::new()) } else { None };
        }
        Some(c)
    }

    pub fn from_coords(&self, k: i64, c: &SVec<usize>) -> Derivation {
        if self.kind.is_cal() && k == 0 {
            let z = self.zero_part.as_ref().unwrap();
            let mut v = SVec::new();
            for (i, x) in c.iter() {
                v.add_scaled(&z[*i], x);
            }
            return self.space.from_coords(0, &v);
        }
        self.space.from_coords(k, c)
    }

    pub fn basis_derivation(&self, k: i64, i: usize) -> Derivation {
        self.from_coords(k, &SVec::unit(i))
    }

    pub fn dim(&self, k: i64) -> usize {
        self.complex.dim(k)
    }

    /// Membership of a degree-0 derivation in the connected part.
    pub fn contains_degree_zero(&self, theta: &Derivation) -> bool {
        self.coords(theta).is_some()
    }
}

pub fn render_derivation(space: &DerSpace, th: &Derivation) -> String {
    let parts: Vec<String> = space
        .slots()
        .into_iter()
        .filter(|&g| !th.values[g].is_zero())
        .map(|g| format!("{} ↦ {}", space.source().pres.generators[g].name, space.target().render(&th.values[g])))
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join("; ")
    }
}

/// ad^M_x: vanishes on U and is ad_x on the other generators.
pub fn relative_adjoint(inc: &SubDglInclusion, x: &LieElem) -> Derivation {
    DerSpace::relative(inc).adjoint(x)
}

/// Homology of a derivation complex in degree k; for k = 0 also the Lie
/// algebra structure of H₀ under the bracket of derivations.
pub struct DerHomology {
    pub degree: i64,
    pub homology: Homology,
    pub h0_algebra: Option<Arc<NilpotentLie>>,
}

pub fn der_homology(c: &DerivationComplex, k: i64) -> Result<DerHomology> {
    let h = homology(&c.complex, k)?;
    let mut h0 = None;
    if k == 0 && c.space.is_endo() {
        let reps: Vec<Derivation> = h.representatives.iter().map(|z| c.from_coords(0, z)).collect();
        let mut structure = vec![vec![SVec::new(); reps.len()]; reps.len()];
        for i in 0..reps.len() {
            for j in 0..reps.len() {
                let b = c.space.bracket(&reps[i], &reps[j]);
                let z = c.coords(&b).ok_or_else(|| {
                    Error::Certificate("bracket of degree-0 cycles leaves the degree-0 part".into())
                })?;
                let cls = h.class_of(&z).ok_or_else(|| Error::Certificate("bracket of cycles is not a cycle".into()))?;
                structure[i][j] = SVec::from_dense(&cls);
            }
        }
        h0 = Some(Arc::new(NilpotentLie { name: format!("H0({})", c.kind.name()), dim: reps.len(), structure }));
    }
    Ok(DerHomology { degree: k, homology: h, h0_algebra: h0 })
}

/// Lie operations on degree-0 derivations of one algebra.
pub struct DerLie<'a>(pub &'a DerSpace);

impl LieOps for DerLie<'_> {
    type E = Derivation;
    fn zero(&self) -> Derivation {
        Derivation::zero(self.0, 0)
    }
    fn add(&self, a: &Derivation, b: &Derivation) -> Derivation {
        a.plus(b)
    }
    fn scale(&self, a: &Derivation, c: &Q) -> Derivation {
        a.scaled(c)
    }
    fn bracket(&self, a: &Derivation, b: &Derivation) -> Derivation {
        self.0.bracket(a, b)
    }
    fn is_zero(&self, a: &Derivation) -> bool {
        a.is_zero()
    }
}

/// η of degree |θ|+1 with Dη = θ. Columns of the linear system are the
/// optional ansatz derivations first, then the slot basis, so the
/// deterministic solver prefers the ansatz.
pub fn solve_primitive(space: &DerSpace, theta: &Derivation, ansatz: &[Derivation]) -> Result<Option<Derivation>> {
    if !space.differential(theta).is_zero() {
        return Err(Error::Certificate("θ is not a D-cycle".into()));
    }
    let k = theta.degree + 1;
    let mut gens: Vec<Derivation> = ansatz.to_vec();
    for s in space.slot_basis(k) {
        gens.push(space.slot_derivation(k, s));
    }
    let rows = space.slot_basis(theta.degree).len();
    let cols: Vec<SVec<usize>> = gens.iter().map(|g| space.coords(&space.differential(g))).collect();
    let m = SparseMatrix::from_columns(rows, cols);
    let b = space.coords(theta);
    Ok(solve(&m, &b).map(|x| {
        let mut eta = Derivation::zero(space, k);
        for (j, c) in x.iter() {
            eta = eta.plus(&gens[*j].scaled(c));
        }
        eta
    }))
}

/// Coefficients of η on the ansatz, recovered by solving in the ansatz span.
pub fn ansatz_coefficients(space: &DerSpace, eta: &Derivation, ansatz: &[Derivation]) -> Option<Vec<Q>> {
    let mut e: Echelon<usize> = Echelon::new(true);
    for (i, a) in ansatz.iter().enumerate() {
        let _ = e.insert(space.coords(a), Some(i));
    }
    let red = e.reduce(&space.coords(eta));
    if !red.remainder.is_zero() {
        return None;
    }
    Some((0..ansatz.len()).map(|i| red.combo.get(&i).cloned().unwrap_or_else(Q::zero)).collect())
}

/// The single-cell shape M ⊔ (x, dx = ω).
#[derive(Clone, Debug)]
pub struct CellShape {
    pub inc: SubDglInclusion,
    pub x: usize,
    pub n: i64,
    pub omega: LieElem,
}

impl CellShape {
    pub fn new(inc: &SubDglInclusion) -> Result<Self> {
        let l = &inc.ambient;
        let rest = l.complement(&inc.sub_generators);
        if rest.len() != 1 {
            return Err(Error::Shape(format!(
                "a single-cell attachment needs exactly one generator outside U, found {}",
                rest.len()
            )));
        }
        let x = rest[0];
        Ok(CellShape { inc: inc.clone(), x, n: l.gen_degree(x), omega: l.pres.differential[x].clone() })
    }
}

/// ψ: Der^M_k L → L_{k+n}, θ ↦ θ(x), with its certificate.
#[derive(Clone, Debug, Serialize)]
pub struct PsiCertificate {
    pub window: (i64, i64),
    pub degrees: Vec<PsiDegree>,
    pub bijective: bool,
    pub chain_map: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PsiDegree {
    pub k: i64,
    pub der_dim: usize,
    pub lie_dim: usize,
    pub rank: usize,
    pub commutes: bool,
}

pub fn psi(shape: &CellShape, theta: &Derivation) -> LieElem {
    theta.values[shape.x].clone()
}

pub fn psi_iso(shape: &CellShape, window: DegreeWindow) -> PsiCertificate {
    let space = DerSpace::relative(&shape.inc);
    let l = &shape.inc.ambient;
    let mut degrees = Vec::new();
    let mut bijective = true;
    let mut chain = true;
    for k in window.degrees() {
        let basis = space.slot_basis(k);
        let lie_dim = l.dim(k + shape.n);
        let cols: Vec<SVec<usize>> =
            basis.iter().map(|s| l.coords_or_panic(&psi(shape, &space.slot_derivation(k, *s)))).collect();
        let rank = SparseMatrix::from_columns(lie_dim, cols).rank();
        let mut commutes = true;
        for s in &basis {
            let th = space.slot_derivation(k, *s);
            if psi(shape, &space.differential(&th)) != l.differential(&psi(shape, &th)) {
                commutes = false;
            }
        }
        bijective &= rank == basis.len() && rank == lie_dim;
        chain &= commutes;
        degrees.push(PsiDegree { k, der_dim: basis.len(), lie_dim, rank, commutes });
    }
    PsiCertificate { window: (window.min, window.max), degrees, bijective, chain_map: chain }
}

/// Checks that the degree-0 condition is closed under brackets on the basis.
pub fn degree_zero_bracket_closure(c: &DerivationComplex) -> Option<(usize, usize)> {
    let n = c.dim(0);
    for i in 0..n {
        for j in 0..n {
            let b = c.space.bracket(&c.basis_derivation(0, i), &c.basis_derivation(0, j));
            if !c.contains_degree_zero(&b) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Linear part of θ: coefficient of generator h in θ(g), keyed (g, h).
pub fn linear_part_matrix(space: &DerSpace, th: &Derivation) -> BTreeMap<(usize, usize), Q> {
    let mut m = BTreeMap::new();
    for g in space.slots() {
        for (w, c) in th.values[g].terms.iter() {
            if w.len() == 1 {
                m.insert((g, w[0] as usize), c.clone());
            }
        }
    }
    m
}

/// e^θ for a degree-0 derivation: values Σ θ^k(g)/k! on generators.
pub fn exp_derivation(space: &DerSpace, theta: &Derivation) -> Result<Morphism> {
    if theta.degree != 0 {
        return Err(Error::Degree(format!("exponential of a degree {} derivation", theta.degree)));
    }
    assert!(space.is_endo());
    let l = space.target();
    let bound = 4 * l.n() + 8;
    let mut images = Vec::new();
    for g in 0..l.ngens() {
        let mut term = l.generator(g);
        let mut total = term.clone();
        let mut k = 0usize;
        loop {
            k += 1;
            if k > bound {
                return Err(Error::NotNilpotent(bound));
            }
            term = space.apply(theta, &term).scaled(&(Q::one() / crate::graded::scalar::q(k as i64)));
            if term.is_zero() {
                break;
            }
            total = total.plus(&term);
        }
        images.push(total);
    }
    Morphism::new(l.clone(), l.clone(), images)
}

/// The sign (−1)^{|a|} used throughout; kept for readability at call sites.
pub fn koszul(a: i64) -> Q {
    if odd(a) {
        -Q::one()
    } else {
        Q::one()
    }
}

/// M ↪ L for the sub-dgl declared in the presentation.
pub fn declared_inclusion(l: &Arc<FreeLie>) -> Result<SubDglInclusion> {
    let u = l.sub_generators().ok_or_else(|| Error::Shape("presentation declares no sub-dgl".into()))?.to_vec();
    l.sub_algebra(&u)
}

/// The complex of the given kind over the presentation's own window; the
/// relative kinds use the declared sub-dgl.
pub fn build_derivation_complex(l: &Arc<FreeLie>, kind: DerKind, cond: Option<GCondition>) -> Result<DerivationComplex> {
    let space = match kind {
        DerKind::Der | DerKind::CalDer => DerSpace::full(l),
        DerKind::DerRelative | DerKind::CalDerRelative => DerSpace::relative(&declared_inclusion(l)?),
        DerKind::DerAlong => DerSpace::along(&declared_inclusion(l)?.inclusion),
    };
    DerivationComplex::build(space, kind, cond, l.pres.window)
}
