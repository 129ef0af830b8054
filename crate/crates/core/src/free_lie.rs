//! Truncated free graded Lie algebras with differentials.
//!
//! Elements live in the tensor algebra on the generators, modulo words longer
//! than the truncation order N. Brackets are graded commutators. Bases are
//! recovered from left-normed bracket monomials by elimination.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graded::linalg::{Echelon, SVec};
use crate::graded::scalar::{fmt_q, odd, sign, Q};
use crate::graded::DegreeWindow;

pub type Word = Vec<u16>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Generator {
    pub name: String,
    pub degree: i64,
}

/// A homogeneous element of the truncated free Lie algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LieElem {
    pub degree: i64,
    pub terms: SVec<Word>,
}

impl LieElem {
    pub fn zero(degree: i64) -> Self {
        LieElem { degree, terms: SVec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    pub fn plus(&self, o: &LieElem) -> LieElem {
        debug_assert!(self.is_zero() || o.is_zero() || self.degree == o.degree);
        let degree = if self.is_zero() { o.degree } else { self.degree };
        LieElem { degree, terms: self.terms.plus(&o.terms) }
    }

    pub fn minus(&self, o: &LieElem) -> LieElem {
        self.plus(&o.scaled(&-Q::one()))
    }

    pub fn scaled(&self, c: &Q) -> LieElem {
        LieElem { degree: self.degree, terms: self.terms.scaled(c) }
    }

    pub fn add_scaled(&mut self, o: &LieElem, c: &Q) {
        if self.is_zero() {
            self.degree = o.degree;
        }
        self.terms.add_scaled(&o.terms, c);
    }

    /// Part of bracket length exactly `n`.
    pub fn lcs_component(&self, n: usize) -> LieElem {
        LieElem {
            degree: self.degree,
            terms: SVec(self.terms.iter().filter(|(w, _)| w.len() == n).map(|(w, c)| (w.clone(), c.clone())).collect()),
        }
    }

    /// Part of bracket length at least `n`.
    pub fn lcs_tail(&self, n: usize) -> LieElem {
        LieElem {
            degree: self.degree,
            terms: SVec(self.terms.iter().filter(|(w, _)| w.len() >= n).map(|(w, c)| (w.clone(), c.clone())).collect()),
        }
    }

    pub fn min_length(&self) -> Option<usize> {
        self.terms.iter().map(|(w, _)| w.len()).min()
    }

    pub fn letters(&self) -> impl Iterator<Item = u16> + '_ {
        self.terms.iter().flat_map(|(w, _)| w.iter().copied())
    }
}

#[derive(Clone, Debug)]
pub struct Presentation {
    pub name: String,
    pub generators: Vec<Generator>,
    /// d of each generator, degree |g| - 1.
    pub differential: Vec<LieElem>,
    pub truncation: usize,
    pub wedge: usize,
    pub window: DegreeWindow,
    /// Filtration level of each generator: g ∈ V^i iff i ≤ level[g].
    pub filtration: Option<Vec<usize>>,
    /// Generators of the sub-dgl M, if declared.
    pub sub: Option<Vec<usize>>,
}

impl Presentation {
    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }
}

/// Basis of one degree of the truncated free Lie algebra.
#[derive(Clone, Debug)]
pub struct DegreeBasis {
    pub degree: i64,
    pub elems: Vec<LieElem>,
    pub labels: Vec<String>,
    pub seqs: Vec<Vec<u16>>,
    echelon: Echelon<Word>,
}

impl DegreeBasis {
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.seqs.iter().map(|s| s.len())
    }
}

/// A validated presentation with its bases computed.
#[derive(Debug)]
pub struct FreeLie {
    pub pres: Presentation,
    bases: BTreeMap<i64, DegreeBasis>,
    /// Set when d has a nonzero linear part (presentation not minimal).
    pub non_minimal: bool,
}

impl FreeLie {
    pub fn new(mut pres: Presentation) -> Result<Arc<FreeLie>> {
        let n = pres.truncation;
        if n == 0 {
            return Err(Error::Validation("truncation order must be at least 1".into()));
        }
        if pres.generators.len() > u16::MAX as usize {
            return Err(Error::Validation("too many generators".into()));
        }
        for (i, g) in pres.generators.iter().enumerate() {
            if pres.generators[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::Validation(format!("duplicate generator `{}`", g.name)));
            }
        }
        let degs: Vec<i64> = pres.generators.iter().map(|g| g.degree).collect();
        if pres.differential.len() != degs.len() {
            return Err(Error::Validation("differential must be given for every generator".into()));
        }
        for (i, dg) in pres.differential.iter_mut().enumerate() {
            dg.terms.0.retain(|w, _| w.len() <= n);
            for (w, _) in dg.terms.iter() {
                if w.iter().any(|&l| l as usize >= degs.len()) {
                    return Err(Error::PresentationMismatch);
                }
                let wd: i64 = w.iter().map(|&l| degs[l as usize]).sum();
                if wd != degs[i] - 1 {
                    return Err(Error::Validation(format!(
                        "d {} has degree {} but must have degree {}",
                        pres.generators[i].name,
                        wd,
                        degs[i] - 1
                    )));
                }
            }
            dg.degree = degs[i] - 1;
        }
        if let Some(f) = &pres.filtration {
            if f.len() != degs.len() {
                return Err(Error::Validation("filtration must assign a level to every generator".into()));
            }
            if !f.iter().any(|&l| l == 0) && !degs.is_empty() {
                // V⁰ = V: every generator has level ≥ 0 automatically
            }
        }
        if let Some(s) = &pres.sub {
            for &u in s {
                if u >= degs.len() {
                    return Err(Error::PresentationMismatch);
                }
            }
            for &u in s {
                if pres.differential[u].letters().any(|l| !s.contains(&(l as usize))) {
                    return Err(Error::Validation(format!(
                        "d {} leaves the sub-dgl",
                        pres.generators[u].name
                    )));
                }
            }
        }
        let non_minimal = pres.differential.iter().any(|d| d.min_length() == Some(1));
        let bases = compute_bases(&pres);
        Ok(Arc::new(FreeLie { pres, bases, non_minimal }))
    }

    pub fn ngens(&self) -> usize {
        self.pres.generators.len()
    }

    pub fn n(&self) -> usize {
        self.pres.truncation
    }

    pub fn gen_degree(&self, g: usize) -> i64 {
        self.pres.generators[g].degree
    }

    pub fn word_degree(&self, w: &[u16]) -> i64 {
        w.iter().map(|&l| self.gen_degree(l as usize)).sum()
    }

    pub fn generator(&self, g: usize) -> LieElem {
        LieElem { degree: self.gen_degree(g), terms: SVec::unit(vec![g as u16]) }
    }

    pub fn gen_by_name(&self, name: &str) -> Option<LieElem> {
        self.pres.gen_index(name).map(|g| self.generator(g))
    }

    /// Truncated product in the tensor algebra.
    pub fn mul_terms(&self, a: &SVec<Word>, b: &SVec<Word>) -> SVec<Word> {
        mul_trunc(a, b, self.n())
    }

    pub fn bracket(&self, a: &LieElem, b: &LieElem) -> LieElem {
        let degree = a.degree + b.degree;
        if a.is_zero() || b.is_zero() {
            return LieElem::zero(degree);
        }
        let mut t = self.mul_terms(&a.terms, &b.terms);
        let ba = self.mul_terms(&b.terms, &a.terms);
        t.add_scaled(&ba, &-sign(a.degree * b.degree));
        LieElem { degree, terms: t }
    }

    /// Checked bracket: both inputs must use only this presentation's letters.
    pub fn try_bracket(&self, a: &LieElem, b: &LieElem) -> Result<LieElem> {
        let ng = self.ngens() as u16;
        if a.letters().chain(b.letters()).any(|l| l >= ng) {
            return Err(Error::PresentationMismatch);
        }
        Ok(self.bracket(a, b))
    }

    pub fn ad_power(&self, x: &LieElem, k: usize, a: &LieElem) -> LieElem {
        let mut r = a.clone();
        for _ in 0..k {
            r = self.bracket(x, &r);
        }
        r
    }

    pub fn differential(&self, a: &LieElem) -> LieElem {
        let d = &self.pres.differential;
        let mut out = SVec::new();
        for (w, c) in a.terms.iter() {
            let mut prefix_deg = 0i64;
            for i in 0..w.len() {
                let dg = &d[w[i] as usize];
                let s = if odd(prefix_deg) { -c.clone() } else { c.clone() };
                for (u, e) in dg.terms.iter() {
                    if w.len() - 1 + u.len() > self.n() {
                        continue;
                    }
                    let mut nw = Vec::with_capacity(w.len() - 1 + u.len());
                    nw.extend_from_slice(&w[..i]);
                    nw.extend_from_slice(u);
                    nw.extend_from_slice(&w[i + 1..]);
                    out.add_term(nw, &s * e);
                }
                prefix_deg += self.gen_degree(w[i] as usize);
            }
        }
        LieElem { degree: a.degree - 1, terms: out }
    }

    /// First generator g with d²g ≠ 0 in the truncation, with the residue.
    pub fn check_square_zero(&self) -> SquareZeroReport {
        for g in 0..self.ngens() {
            let dd = self.differential(&self.pres.differential[g]);
            if !dd.is_zero() {
                return SquareZeroReport {
                    pass: false,
                    failure: Some((self.pres.generators[g].name.clone(), self.render(&dd))),
                };
            }
        }
        SquareZeroReport { pass: true, failure: None }
    }

    /// The underlying chain complex of L over a degree window.
    pub fn chain_complex(&self, window: DegreeWindow) -> crate::graded::complex::ChainComplex {
        let labels = window
            .degrees()
            .map(|k| (k, self.basis(k).map_or_else(Vec::new, |b| b.labels.clone())))
            .collect();
        crate::graded::complex::ChainComplex::build(window, labels, |k, i| {
            self.coords_or_panic(&self.differential(self.basis_elem(k, i)))
        })
    }

    pub fn basis(&self, degree: i64) -> Option<&DegreeBasis> {
        self.bases.get(&degree)
    }

    pub fn dim(&self, degree: i64) -> usize {
        self.bases.get(&degree).map(|b| b.len()).unwrap_or(0)
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.bases.keys().copied()
    }

    pub fn basis_elem(&self, degree: i64, i: usize) -> &LieElem {
        &self.bases[&degree].elems[i]
    }

    /// Basis of the span of left-normed brackets of length ≤ `max_length`.
    pub fn lie_basis(&self, degree: i64, max_length: usize) -> Vec<LieElem> {
        match self.bases.get(&degree) {
            Some(b) => b
                .elems
                .iter()
                .zip(b.seqs.iter())
                .filter(|(_, s)| s.len() <= max_length)
                .map(|(e, _)| e.clone())
                .collect(),
            None => Vec::new(),
        }
    }

    /// Coordinates in the degree basis; `None` if `a` is not in the span.
    pub fn coords(&self, a: &LieElem) -> Option<SVec<usize>> {
        if a.is_zero() {
            return Some(SVec::new());
        }
        let b = self.bases.get(&a.degree)?;
        let red = b.echelon.reduce(&a.terms);
        if red.remainder.is_zero() {
            Some(red.combo)
        } else {
            None
        }
    }

    pub fn coords_or_panic(&self, a: &LieElem) -> SVec<usize> {
        self.coords(a).unwrap_or_else(|| panic!("element of degree {} is not in the Lie span", a.degree))
    }

    pub fn from_coords(&self, degree: i64, c: &SVec<usize>) -> LieElem {
        let mut r = LieElem::zero(degree);
        if let Some(b) = self.bases.get(&degree) {
            for (i, v) in c.iter() {
                r.add_scaled(&b.elems[*i], v);
            }
        }
        r
    }

    /// Renders an element as a combination of basis brackets.
    pub fn render(&self, a: &LieElem) -> String {
        if a.is_zero() {
            return "0".into();
        }
        match self.coords(a) {
            Some(c) => {
                let b = &self.bases[&a.degree];
                render_combination(c.iter().map(|(i, v)| (b.labels[*i].clone(), v.clone())))
            }
            None => render_combination(a.terms.iter().map(|(w, v)| {
                (w.iter().map(|&l| self.pres.generators[l as usize].name.clone()).collect::<Vec<_>>().join("⊗"), v.clone())
            })),
        }
    }

    pub fn is_minimal(&self) -> bool {
        !self.non_minimal
    }

    pub fn sub_generators(&self) -> Option<&[usize]> {
        self.pres.sub.as_deref()
    }

    /// The sub-dgl generated by `u`, as its own presentation, with the
    /// generators in the same relative order.
    pub fn sub_algebra(self: &Arc<Self>, u: &[usize]) -> Result<SubDglInclusion> {
        let mut u = u.to_vec();
        u.sort_unstable();
        u.dedup();
        for &g in &u {
            if g >= self.ngens() {
                return Err(Error::PresentationMismatch);
            }
            if self.pres.differential[g].letters().any(|l| !u.contains(&(l as usize))) {
                return Err(Error::Validation(format!(
                    "d {} leaves the sub-dgl",
                    self.pres.generators[g].name
                )));
            }
        }
        let pos = |l: u16| u.iter().position(|&g| g == l as usize).unwrap() as u16;
        let pres = Presentation {
            name: format!("{}/sub", self.pres.name),
            generators: u.iter().map(|&g| self.pres.generators[g].clone()).collect(),
            differential: u
                .iter()
                .map(|&g| {
                    let d = &self.pres.differential[g];
                    LieElem { degree: d.degree, terms: d.terms.map_keys(|w| w.iter().map(|&l| pos(l)).collect()) }
                })
                .collect(),
            truncation: self.pres.truncation,
            wedge: self.pres.wedge,
            window: self.pres.window,
            filtration: self.pres.filtration.as_ref().map(|f| u.iter().map(|&g| f[g]).collect()),
            sub: None,
        };
        let sub = FreeLie::new(pres)?;
        let images = u.iter().map(|&g| self.generator(g)).collect();
        let inclusion = Morphism::new(sub.clone(), self.clone(), images)?;
        Ok(SubDglInclusion { ambient: self.clone(), sub, sub_generators: u, inclusion })
    }

    /// Generators outside the declared sub-dgl.
    pub fn complement(&self, u: &[usize]) -> Vec<usize> {
        (0..self.ngens()).filter(|g| !u.contains(g)).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SquareZeroReport {
    pub pass: bool,
    pub failure: Option<(String, String)>,
}

/// M = (L̂(U), d) ↪ L. `sub` has its own generator numbering; `inclusion`
/// maps it into the ambient algebra.
#[derive(Clone, Debug)]
pub struct SubDglInclusion {
    pub ambient: Arc<FreeLie>,
    pub sub: Arc<FreeLie>,
    pub sub_generators: Vec<usize>,
    pub inclusion: Morphism,
}

impl SubDglInclusion {
    pub fn contains_generator(&self, g: usize) -> bool {
        self.sub_generators.contains(&g)
    }

    /// Whether an ambient element only uses letters from U.
    pub fn in_sub(&self, a: &LieElem) -> bool {
        a.letters().all(|l| self.contains_generator(l as usize))
    }
}

/// A dgl morphism between free presentations, given on generators.
#[derive(Clone, Debug)]
pub struct Morphism {
    pub source: Arc<FreeLie>,
    pub target: Arc<FreeLie>,
    pub images: Vec<LieElem>,
}

impl Morphism {
    pub fn new(source: Arc<FreeLie>, target: Arc<FreeLie>, images: Vec<LieElem>) -> Result<Self> {
        if images.len() != source.ngens() {
            return Err(Error::Shape("one image per source generator is required".into()));
        }
        for (g, im) in images.iter().enumerate() {
            if !im.is_zero() && im.degree != source.gen_degree(g) {
                return Err(Error::Degree(format!(
                    "image of {} has degree {}",
                    source.pres.generators[g].name, im.degree
                )));
            }
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(g, mut im)| {
                im.degree = source.gen_degree(g);
                im
            })
            .collect();
        Ok(Morphism { source, target, images })
    }

    pub fn identity(l: &Arc<FreeLie>) -> Self {
        let images = (0..l.ngens()).map(|g| l.generator(g)).collect();
        Morphism { source: l.clone(), target: l.clone(), images }
    }

    pub fn zero(source: &Arc<FreeLie>, target: &Arc<FreeLie>) -> Self {
        let images = (0..source.ngens()).map(|g| LieElem::zero(source.gen_degree(g))).collect();
        Morphism { source: source.clone(), target: target.clone(), images }
    }

    pub fn is_identity(&self) -> bool {
        Arc::ptr_eq(&self.source, &self.target)
            && self.images.iter().enumerate().all(|(g, im)| *im == self.source.generator(g))
    }

    pub fn apply_word(&self, w: &[u16]) -> SVec<Word> {
        let mut acc = SVec::unit(Vec::new());
        for &l in w {
            acc = self.target.mul_terms(&acc, &self.images[l as usize].terms);
            if acc.is_zero() {
                break;
            }
        }
        acc
    }

    pub fn apply(&self, a: &LieElem) -> LieElem {
        let mut out = SVec::new();
        for (w, c) in a.terms.iter() {
            out.add_scaled(&self.apply_word(w), c);
        }
        LieElem { degree: a.degree, terms: out }
    }

    /// First generator where φ∘d ≠ d∘φ.
    pub fn check_chain(&self) -> Result<()> {
        for g in 0..self.source.ngens() {
            let lhs = self.apply(&self.source.pres.differential[g]);
            let rhs = self.target.differential(&self.images[g]);
            if lhs != rhs {
                return Err(Error::NotAMorphism(format!(
                    "φ(d {}) ≠ d φ({})",
                    self.source.pres.generators[g].name, self.source.pres.generators[g].name
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn mul_trunc(a: &SVec<Word>, b: &SVec<Word>, n: usize) -> SVec<Word> {
    let mut out = SVec::new();
    for (u, x) in a.iter() {
        for (v, y) in b.iter() {
            if u.len() + v.len() > n {
                continue;
            }
            let mut w = Vec::with_capacity(u.len() + v.len());
            w.extend_from_slice(u);
            w.extend_from_slice(v);
            out.add_term(w, x * y);
        }
    }
    out
}

pub fn render_combination(terms: impl Iterator<Item = (String, Q)>) -> String {
    let mut s = String::new();
    for (label, c) in terms {
        let neg = c < Q::zero();
        let a = if neg { -c } else { c };
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        if !a.is_one() {
            s.push_str(&fmt_q(&a));
            s.push(' ');
        }
        s.push_str(&label);
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn compute_bases(pres: &Presentation) -> BTreeMap<i64, DegreeBasis> {
    let n = pres.truncation;
    let ng = pres.generators.len();
    let degs: Vec<i64> = pres.generators.iter().map(|g| g.degree).collect();
    let names: Vec<&str> = pres.generators.iter().map(|g| g.name.as_str()).collect();
    let mut bases: BTreeMap<i64, DegreeBasis> = BTreeMap::new();
    // (sequence, element, label) of picked brackets at the current length
    let mut level: Vec<(Vec<u16>, LieElem, String)> = Vec::new();
    for g in 0..ng {
        let e = LieElem { degree: degs[g], terms: SVec::unit(vec![g as u16]) };
        level.push((vec![g as u16], e, names[g].to_string()));
    }
    for len in 1..=n {
        let mut picked = Vec::new();
        for (seq, e, label) in level {
            if e.is_zero() {
                continue;
            }
            let b = bases.entry(e.degree).or_insert_with(|| DegreeBasis {
                degree: e.degree,
                elems: Vec::new(),
                labels: Vec::new(),
                seqs: Vec::new(),
                echelon: Echelon::new(true),
            });
            let tag = b.elems.len();
            if b.echelon.insert(e.terms.clone(), Some(tag)).is_ok() {
                b.elems.push(e.clone());
                b.labels.push(label.clone());
                b.seqs.push(seq.clone());
                picked.push((seq, e, label));
            }
        }
        if len == n {
            break;
        }
        let mut next = Vec::new();
        for (seq, e, label) in &picked {
            for g in 0..ng {
                let ge = LieElem { degree: degs[g], terms: SVec::unit(vec![g as u16]) };
                let mut t = mul_trunc(&e.terms, &ge.terms, n);
                let back = mul_trunc(&ge.terms, &e.terms, n);
                t.add_scaled(&back, &-sign(e.degree * degs[g]));
                let b = LieElem { degree: e.degree + degs[g], terms: t };
                let mut s2 = seq.clone();
                s2.push(g as u16);
                next.push((s2, b, format!("[{}, {}]", label, names[g])));
            }
        }
        level = next;
    }
    bases
}
