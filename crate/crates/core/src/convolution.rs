//! The truncated Chevalley–Eilenberg coalgebra 𝒞(L) = Λ(sL) and
//! convolution Lie algebras Hom(𝒞(L′), L).
//!
//! Signs are fixed in docs/SIGNS.md. In short: d₁(sv) = −s dv,
//! d₂(sv∧sw) = (−1)^{|v|} s[v,w], Δ is the unshuffle diagonal with Koszul
//! signs, [f,g](c) = Σ (−1)^{|g||c′|}[f c′, g c″] and Df = d∘f − (−1)^{|f|} f∘d.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_lie::{FreeLie, LieElem, Morphism, SubDglInclusion};
use crate::graded::complex::{ChainComplex, DegreeWindow};
use crate::graded::linalg::{Echelon, SVec, SparseMatrix};
use crate::graded::scalar::{odd, sign, Q};

/// Index of a suspended basis element s b.
pub type Elem = usize;
/// Sorted multiset of suspended basis elements; the empty word is 1.
pub type CWord = Vec<Elem>;

#[derive(Debug)]
pub struct CoalgebraBasis {
    pub source: Arc<FreeLie>,
    pub wedge: usize,
    pub max_degree: i64,
    /// (L-degree, basis index) of each suspended element.
    pub elems: Vec<(i64, usize)>,
    elem_index: BTreeMap<(i64, usize), Elem>,
    pub words: Vec<CWord>,
    pub word_degree: Vec<i64>,
    index: BTreeMap<CWord, usize>,
    by_degree: BTreeMap<i64, Vec<usize>>,
    /// Elements lying in the declared sub-dgl (U-letters only).
    pub elem_in_sub: Vec<bool>,
    diff: Vec<SVec<usize>>,
    delta: Vec<Vec<(usize, usize, Q)>>,
}

/// Product of suspended elements, sorted into a basis word with its Koszul
/// sign; `None` if an odd element repeats.
fn sort_word(mut w: Vec<Elem>, sdeg: impl Fn(Elem) -> i64) -> Option<(CWord, Q)> {
    let mut s = 0i64;
    // insertion sort, tracking transpositions of adjacent elements
    for i in 1..w.len() {
        let mut j = i;
        while j > 0 && w[j - 1] > w[j] {
            s += sdeg(w[j - 1]) * sdeg(w[j]);
            w.swap(j - 1, j);
            j -= 1;
        }
    }
    for i in 1..w.len() {
        if w[i] == w[i - 1] && odd(sdeg(w[i])) {
            return None;
        }
    }
    Some((w, sign(s)))
}

impl CoalgebraBasis {
    /// 𝒞(L) with words of length ≤ `wedge` and degree ≤ `max_degree`.
    pub fn new(l: &Arc<FreeLie>, wedge: usize, max_degree: i64) -> Result<Arc<Self>> {
        if l.degrees().any(|d| d < -1 && l.dim(d) > 0) {
            return Err(Error::Degree(
                "the coalgebra needs sL concentrated in non-negative degrees (L_{≤-2} = 0)".into(),
            ));
        }
        let mut elems = Vec::new();
        for d in l.degrees() {
            if d + 1 > max_degree {
                continue;
            }
            for i in 0..l.dim(d) {
                elems.push((d, i));
            }
        }
        let elem_index: BTreeMap<(i64, usize), Elem> = elems.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let sub = l.sub_generators().map(|u| u.to_vec());
        let elem_in_sub: Vec<bool> = elems
            .iter()
            .map(|&(d, i)| match &sub {
                Some(u) => l.basis(d).unwrap().seqs[i].iter().all(|&g| u.contains(&(g as usize))),
                None => false,
            })
            .collect();
        let sdeg: Vec<i64> = elems.iter().map(|e| e.0 + 1).collect();

        let mut words: Vec<CWord> = vec![Vec::new()];
        let mut word_degree = vec![0i64];
        fn extend(
            cur: &mut Vec<Elem>,
            deg: i64,
            start: usize,
            sdeg: &[i64],
            wedge: usize,
            max: i64,
            out: &mut Vec<(CWord, i64)>,
        ) {
            if cur.len() == wedge {
                return;
            }
            for e in start..sdeg.len() {
                if deg + sdeg[e] > max {
                    continue;
                }
                if cur.last() == Some(&e) && odd(sdeg[e]) {
                    continue;
                }
                cur.push(e);
                out.push((cur.clone(), deg + sdeg[e]));
                extend(cur, deg + sdeg[e], e, sdeg, wedge, max, out);
                cur.pop();
            }
        }
        let mut found = Vec::new();
        extend(&mut Vec::new(), 0, 0, &sdeg, wedge, max_degree, &mut found);
        found.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.len().cmp(&b.0.len())).then(a.0.cmp(&b.0)));
        for (w, d) in found {
            words.push(w);
            word_degree.push(d);
        }
        let index: BTreeMap<CWord, usize> = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let mut by_degree: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, d) in word_degree.iter().enumerate() {
            by_degree.entry(*d).or_default().push(i);
        }
        let mut c = CoalgebraBasis {
            source: l.clone(),
            wedge,
            max_degree,
            elems,
            elem_index,
            words,
            word_degree,
            index,
            by_degree,
            elem_in_sub,
            diff: Vec::new(),
            delta: Vec::new(),
        };
        c.diff = (0..c.words.len()).map(|i| c.compute_diff(i)).collect();
        c.delta = (0..c.words.len()).map(|i| c.compute_delta(i)).collect();
        Ok(Arc::new(c))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn sdeg(&self, e: Elem) -> i64 {
        self.elems[e].0 + 1
    }

    pub fn word_index(&self, w: &[Elem]) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn words_of_degree(&self, d: i64) -> &[usize] {
        self.by_degree.get(&d).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.by_degree.keys().copied()
    }

    /// Suspension of a Lie element as a combination of elements.
    pub fn suspend(&self, a: &LieElem) -> SVec<Elem> {
        let mut out = SVec::new();
        if a.is_zero() {
            return out;
        }
        let c = self.source.coords_or_panic(a);
        for (i, v) in c.iter() {
            if let Some(&e) = self.elem_index.get(&(a.degree, *i)) {
                out.add_term(e, v.clone());
            }
        }
        out
    }

    pub fn elem_of_generator(&self, g: usize) -> Option<Elem> {
        let l = &self.source;
        let d = l.gen_degree(g);
        let b = l.basis(d)?;
        let i = b.seqs.iter().position(|s| s.len() == 1 && s[0] as usize == g)?;
        self.elem_index.get(&(d, i)).copied()
    }

    /// The Lie element v with s v = e.
    pub fn desuspend(&self, e: Elem) -> &LieElem {
        let (d, i) = self.elems[e];
        self.source.basis_elem(d, i)
    }

    pub fn is_one(&self, w: usize) -> bool {
        self.words[w].is_empty()
    }

    /// Whether a word lies in 𝒞(M) for the declared sub-dgl.
    pub fn in_sub(&self, w: usize) -> bool {
        self.words[w].iter().all(|&e| self.elem_in_sub[e])
    }

    /// Word index of an unsorted product, with sign; zero products and
    /// words outside the truncation give `None`.
    pub fn product(&self, w: Vec<Elem>) -> Option<(usize, Q)> {
        let (w, s) = sort_word(w, |e| self.sdeg(e))?;
        self.index.get(&w).map(|&i| (i, s))
    }

    /// Multilinear product of combinations of elements.
    pub fn wedge_combination(&self, factors: &[SVec<Elem>]) -> SVec<usize> {
        let mut partial: Vec<(Vec<Elem>, Q)> = vec![(Vec::new(), Q::one())];
        for f in factors {
            let mut next = Vec::new();
            for (w, c) in &partial {
                for (e, x) in f.iter() {
                    let mut w2 = w.clone();
                    w2.push(*e);
                    next.push((w2, c * x));
                }
            }
            partial = next;
        }
        let mut out = SVec::new();
        for (w, c) in partial {
            if let Some((i, s)) = self.product(w) {
                out.add_term(i, s * c);
            }
        }
        out
    }

    fn compute_diff(&self, wi: usize) -> SVec<usize> {
        let w = &self.words[wi];
        let l = &self.source;
        let mut out = SVec::new();
        // d₁(sv) = −s dv, applied with the Koszul sign of the prefix
        let mut prefix = 0i64;
        for i in 0..w.len() {
            let v = self.desuspend(w[i]);
            let dv = self.suspend(&l.differential(v));
            let s = -sign(prefix);
            for (e, c) in dv.iter() {
                let mut w2 = w.clone();
                w2[i] = *e;
                if let Some((j, t)) = self.product(w2) {
                    out.add_term(j, &s * c * t);
                }
            }
            prefix += self.sdeg(w[i]);
        }
        // d₂(sv∧sw) = (−1)^{|v|} s[v,w] after moving the pair to the front
        for i in 0..w.len() {
            for j in (i + 1)..w.len() {
                let before_i: i64 = w[..i].iter().map(|&e| self.sdeg(e)).sum();
                let before_j: i64 = w[..j].iter().map(|&e| self.sdeg(e)).sum::<i64>() - self.sdeg(w[i]);
                let s = sign(self.sdeg(w[i]) * before_i + self.sdeg(w[j]) * before_j + self.elems[w[i]].0);
                let br = l.bracket(self.desuspend(w[i]), self.desuspend(w[j]));
                if br.is_zero() {
                    continue;
                }
                let sb = self.suspend(&br);
                let rest: Vec<Elem> = w.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, &e)| e).collect();
                for (e, c) in sb.iter() {
                    let mut w2 = vec![*e];
                    w2.extend_from_slice(&rest);
                    if let Some((k, t)) = self.product(w2) {
                        out.add_term(k, &s * c * t);
                    }
                }
            }
        }
        out
    }

    fn compute_delta(&self, wi: usize) -> Vec<(usize, usize, Q)> {
        let w = &self.words[wi];
        let k = w.len();
        let mut acc: BTreeMap<(usize, usize), Q> = BTreeMap::new();
        for mask in 0u32..(1u32 << k) {
            let mut left = Vec::new();
            let mut right = Vec::new();
            let mut s = 0i64;
            for i in 0..k {
                if mask & (1 << i) != 0 {
                    for &r in &right {
                        s += self.sdeg(r) * self.sdeg(w[i]);
                    }
                    left.push(w[i]);
                } else {
                    right.push(w[i]);
                }
            }
            let (Some(&a), Some(&b)) = (self.index.get(&left), self.index.get(&right)) else { continue };
            *acc.entry((a, b)).or_insert_with(Q::zero) += sign(s);
        }
        acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|((a, b), v)| (a, b, v)).collect()
    }

    pub fn differential(&self, w: usize) -> &SVec<usize> {
        &self.diff[w]
    }

    pub fn diagonal(&self, w: usize) -> &[(usize, usize, Q)] {
        &self.delta[w]
    }

    pub fn label(&self, w: usize) -> String {
        if self.words[w].is_empty() {
            return "1".into();
        }
        self.words[w]
            .iter()
            .map(|&e| {
                let (d, i) = self.elems[e];
                format!("s({})", self.source.basis(d).unwrap().labels[i])
            })
            .collect::<Vec<_>>()
            .join("∧")
    }

    /// 𝒞(φ) on a word: s φ(v₁) ∧ … ∧ s φ(v_k) in `target`.
    pub fn map_word(&self, phi: &Morphism, target: &CoalgebraBasis, w: usize) -> SVec<usize> {
        let factors: Vec<SVec<Elem>> =
            self.words[w].iter().map(|&e| target.suspend(&phi.apply(self.desuspend(e)))).collect();
        target.wedge_combination(&factors)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// Hom(𝒞(L′), L)
    Full,
    /// Hom(𝒞̄(L′), L): vanishing on 1
    Reduced,
    /// Hom^M: vanishing on 𝒞(M)
    HomM,
    /// Hom^{𝒞̄(M)}: vanishing on 𝒞̄(M)
    HomCbarM,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Full => "Hom(C,L)",
            Variant::Reduced => "Hom(C̄,L)",
            Variant::HomM => "Hom^M(C,L)",
            Variant::HomCbarM => "Hom^{C̄M}(C,L)",
        }
    }
}

/// A convolution element: values on coalgebra words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvElem {
    pub degree: i64,
    pub values: BTreeMap<usize, LieElem>,
}

impl ConvElem {
    pub fn zero(degree: i64) -> Self {
        ConvElem { degree, values: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(|v| v.is_zero())
    }

    pub fn get(&self, w: usize) -> Option<&LieElem> {
        self.values.get(&w)
    }

    pub fn add_value(&mut self, w: usize, v: &LieElem, c: &Q) {
        if v.is_zero() || c.is_zero() {
            return;
        }
        let e = self.values.entry(w).or_insert_with(|| LieElem::zero(v.degree));
        e.add_scaled(v, c);
        e.degree = v.degree;
        if e.is_zero() {
            self.values.remove(&w);
        }
    }

    pub fn plus(&self, o: &ConvElem) -> ConvElem {
        let mut r = self.clone();
        for (w, v) in &o.values {
            r.add_value(*w, v, &Q::one());
        }
        r
    }

    pub fn scaled(&self, c: &Q) -> ConvElem {
        if c.is_zero() {
            return ConvElem::zero(self.degree);
        }
        ConvElem { degree: self.degree, values: self.values.iter().map(|(w, v)| (*w, v.scaled(c))).collect() }
    }

    pub fn minus(&self, o: &ConvElem) -> ConvElem {
        self.plus(&o.scaled(&-Q::one()))
    }
}

/// Hom(𝒞(L′), L) in one variant, optionally perturbed by an MC element.
#[derive(Clone, Debug)]
pub struct ConvAlgebra {
    pub coalg: Arc<CoalgebraBasis>,
    pub target: Arc<FreeLie>,
    pub variant: Variant,
    pub perturbation: Option<ConvElem>,
}

impl ConvAlgebra {
    pub fn new(coalg: &Arc<CoalgebraBasis>, target: &Arc<FreeLie>, variant: Variant) -> Result<Self> {
        if matches!(variant, Variant::HomM | Variant::HomCbarM) && coalg.source.sub_generators().is_none() {
            return Err(Error::Shape("relative variants need a declared sub-dgl".into()));
        }
        Ok(ConvAlgebra { coalg: coalg.clone(), target: target.clone(), variant, perturbation: None })
    }

    pub fn perturbed(&self, a: &ConvElem) -> Result<Self> {
        if a.degree != -1 {
            return Err(Error::Degree("perturbations have degree -1".into()));
        }
        Ok(ConvAlgebra { perturbation: Some(a.clone()), ..self.clone() })
    }

    pub fn allowed(&self, w: usize) -> bool {
        let c = &self.coalg;
        match self.variant {
            Variant::Full => true,
            Variant::Reduced => !c.is_one(w),
            Variant::HomM => !c.in_sub(w),
            Variant::HomCbarM => c.is_one(w) || !c.in_sub(w),
        }
    }

    pub fn respects_variant(&self, f: &ConvElem) -> bool {
        f.values.iter().all(|(w, v)| v.is_zero() || self.allowed(*w))
    }

    /// Forgets values on words the variant kills.
    pub fn project(&self, f: &ConvElem) -> ConvElem {
        ConvElem { degree: f.degree, values: f.values.iter().filter(|(w, _)| self.allowed(**w)).map(|(w, v)| (*w, v.clone())).collect() }
    }

    /// [f,g](c) = Σ (−1)^{|g||c′|}[f c′, g c″]
    pub fn raw_bracket(&self, f: &ConvElem, g: &ConvElem) -> ConvElem {
        let c = &self.coalg;
        let l = &self.target;
        let mut out = ConvElem::zero(f.degree + g.degree);
        if f.values.is_empty() || g.values.is_empty() {
            return out;
        }
        for w in 0..c.len() {
            let mut acc = LieElem::zero(c.word_degree[w] + f.degree + g.degree);
            for (a, b, s) in c.diagonal(w) {
                let (Some(fa), Some(gb)) = (f.values.get(a), g.values.get(b)) else { continue };
                let t = l.bracket(fa, gb);
                if !t.is_zero() {
                    acc.add_scaled(&t, &(s * sign(g.degree * c.word_degree[*a])));
                }
            }
            if !acc.is_zero() {
                out.values.insert(w, acc);
            }
        }
        out
    }

    pub fn bracket(&self, f: &ConvElem, g: &ConvElem) -> ConvElem {
        self.raw_bracket(f, g)
    }

    /// Df = d∘f − (−1)^{|f|} f∘d
    pub fn plain_differential(&self, f: &ConvElem) -> ConvElem {
        let c = &self.coalg;
        let l = &self.target;
        let mut out = ConvElem::zero(f.degree - 1);
        for (w, v) in &f.values {
            out.add_value(*w, &l.differential(v), &Q::one());
        }
        let s = -sign(f.degree);
        for w in 0..c.len() {
            for (w2, x) in c.differential(w).iter() {
                if let Some(v) = f.values.get(w2) {
                    out.add_value(w, v, &(&s * x));
                }
            }
        }
        out
    }

    /// D_a f = Df + [a, f] for the stored perturbation a.
    pub fn differential(&self, f: &ConvElem) -> ConvElem {
        let mut d = self.plain_differential(f);
        if let Some(a) = &self.perturbation {
            d = d.plus(&self.raw_bracket(a, f));
        }
        d
    }

    /// Da + ½[a,a] for the current differential.
    pub fn mc_residual(&self, a: &ConvElem) -> ConvElem {
        self.differential(a).plus(&self.raw_bracket(a, a).scaled(&Q::new(1.into(), 2.into())))
    }

    /// Value slots (word, Lie basis index) of degree k in this variant.
    pub fn slot_basis(&self, k: i64) -> Vec<(usize, usize)> {
        let c = &self.coalg;
        let mut out = Vec::new();
        for w in 0..c.len() {
            if !self.allowed(w) {
                continue;
            }
            let d = c.word_degree[w] + k;
            for i in 0..self.target.dim(d) {
                out.push((w, i));
            }
        }
        out
    }

    fn slot_offsets(&self, k: i64) -> BTreeMap<usize, usize> {
        let c = &self.coalg;
        let mut off = BTreeMap::new();
        let mut n = 0;
        for w in 0..c.len() {
            if !self.allowed(w) {
                continue;
            }
            off.insert(w, n);
            n += self.target.dim(c.word_degree[w] + k);
        }
        off
    }

    pub fn dim(&self, k: i64) -> usize {
        let c = &self.coalg;
        (0..c.len()).filter(|&w| self.allowed(w)).map(|w| self.target.dim(c.word_degree[w] + k)).sum()
    }

    pub fn slot_elem(&self, k: i64, slot: (usize, usize)) -> ConvElem {
        let (w, i) = slot;
        let mut f = ConvElem::zero(k);
        f.values.insert(w, self.target.basis_elem(self.coalg.word_degree[w] + k, i).clone());
        f
    }

    /// Coordinates in the slot basis; values on killed words are an error.
    pub fn coords(&self, f: &ConvElem) -> Result<SVec<usize>> {
        let off = self.slot_offsets(f.degree);
        let mut out = SVec::new();
        for (w, v) in &f.values {
            if v.is_zero() {
                continue;
            }
            let Some(o) = off.get(w) else {
                return Err(Error::VariantMismatch);
            };
            for (i, x) in self.target.coords_or_panic(v).iter() {
                out.add_term(o + i, x.clone());
            }
        }
        Ok(out)
    }

    pub fn from_coords(&self, k: i64, c: &SVec<usize>) -> ConvElem {
        let basis = self.slot_basis(k);
        let mut f = ConvElem::zero(k);
        for (j, x) in c.iter() {
            let (w, i) = basis[*j];
            let e = self.target.basis_elem(self.coalg.word_degree[w] + k, i);
            f.add_value(w, e, x);
        }
        f
    }

    pub fn slot_label(&self, k: i64, slot: (usize, usize)) -> String {
        let (w, i) = slot;
        let d = self.coalg.word_degree[w] + k;
        format!("{} ↦ {}", self.coalg.label(w), self.target.basis(d).unwrap().labels[i])
    }

    /// The complex over a degree window with the current differential.
    pub fn chain_complex(&self, window: DegreeWindow) -> Result<ChainComplex> {
        let mut labels = BTreeMap::new();
        let mut bases = BTreeMap::new();
        for k in window.degrees() {
            let b = self.slot_basis(k);
            labels.insert(k, b.iter().map(|s| self.slot_label(k, *s)).collect());
            bases.insert(k, b);
        }
        let mut err = None;
        let c = ChainComplex::build(window, labels, |k, i| {
            let d = self.differential(&self.slot_elem(k, bases[&k][i]));
            match self.coords(&d) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    SVec::new()
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(c),
        }
    }

    /// Splitting Hom(C,L) ≅ L ×̃ Hom(C̄,L): x as the element supported on 1.
    pub fn constant(&self, x: &LieElem) -> ConvElem {
        let mut f = ConvElem::zero(x.degree);
        if !x.is_zero() {
            f.values.insert(0, x.clone());
        }
        f
    }

    pub fn split(&self, f: &ConvElem) -> (LieElem, ConvElem) {
        let mut rest = f.clone();
        let x = rest.values.remove(&0).unwrap_or_else(|| LieElem::zero(f.degree));
        (x, rest)
    }
}

/// q ∈ Hom_{-1}(𝒞(L), L): q(sx) = x, zero on 1 and on wedge length ≥ 2.
pub fn q_map(c: &CoalgebraBasis) -> ConvElem {
    phi_q_on(c, |v| v.clone())
}

fn phi_q_on(c: &CoalgebraBasis, f: impl Fn(&LieElem) -> LieElem) -> ConvElem {
    let mut out = ConvElem::zero(-1);
    for w in 0..c.len() {
        if c.words[w].len() == 1 {
            let v = f(c.desuspend(c.words[w][0]));
            if !v.is_zero() {
                out.values.insert(w, v);
            }
        }
    }
    out
}

/// φq for a morphism φ: L′ → L whose source is the coalgebra's algebra.
pub fn morphism_to_mc(c: &CoalgebraBasis, phi: &Morphism) -> Result<ConvElem> {
    if !Arc::ptr_eq(&phi.source, &c.source) {
        return Err(Error::AlgebraMismatch);
    }
    phi.check_chain()?;
    Ok(phi_q_on(c, |v| phi.apply(v)))
}

/// The morphism γ = φ + a(s −) on generators encoded by an MC element of
/// (Hom^M(𝒞(L),L′), D_{φq}).
pub fn mc_to_relative_morphism_set(alg: &ConvAlgebra, phi: &Morphism, a: &ConvElem) -> Result<Morphism> {
    let c = &alg.coalg;
    if !alg.mc_residual(a).is_zero() {
        return Err(Error::ResidualNonzero);
    }
    let l = &c.source;
    let mut images = Vec::new();
    for g in 0..l.ngens() {
        let mut v = phi.images[g].clone();
        if let Some(e) = c.elem_of_generator(g) {
            let w = c.word_index(&[e]).unwrap();
            if let Some(x) = a.values.get(&w) {
                v = v.plus(x);
            }
        }
        images.push(v);
    }
    let gamma = Morphism::new(phi.source.clone(), phi.target.clone(), images)?;
    gamma.check_chain()?;
    Ok(gamma)
}

/// Hom(𝒞̄(L),L′) → Hom(𝒞̄(M),L′) by restriction along 𝒞(j), on bases.
#[derive(Clone, Debug, Serialize)]
pub struct RestrictionSequence {
    pub degrees: Vec<RestrictionDegree>,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionDegree {
    pub k: i64,
    pub total: usize,
    pub image_rank: usize,
    pub sub_dim: usize,
    pub kernel_dim: usize,
    pub relative_dim: usize,
}

pub struct RestrictionData {
    pub sub_coalg: Arc<CoalgebraBasis>,
    pub full: ConvAlgebra,
    pub sub: ConvAlgebra,
    pub relative: ConvAlgebra,
    pub inc: SubDglInclusion,
}

impl RestrictionData {
    pub fn new(inc: &SubDglInclusion, coalg: &Arc<CoalgebraBasis>, target: &Arc<FreeLie>) -> Result<Self> {
        let sub_coalg = CoalgebraBasis::new(&inc.sub, coalg.wedge, coalg.max_degree)?;
        Ok(RestrictionData {
            full: ConvAlgebra::new(coalg, target, Variant::Reduced)?,
            sub: ConvAlgebra::new(&sub_coalg, target, Variant::Reduced)?,
            relative: ConvAlgebra::new(coalg, target, Variant::HomM)?,
            sub_coalg,
            inc: inc.clone(),
        })
    }

    /// (f ∘ 𝒞(j))
    pub fn restrict(&self, f: &ConvElem) -> ConvElem {
        let mut out = ConvElem::zero(f.degree);
        for w in 0..self.sub_coalg.len() {
            let img = self.sub_coalg.map_word(&self.inc.inclusion, &self.full.coalg, w);
            for (w2, x) in img.iter() {
                if let Some(v) = f.values.get(w2) {
                    out.add_value(w, v, x);
                }
            }
        }
        out
    }
}

pub fn restriction_sequence(data: &RestrictionData, window: DegreeWindow) -> Result<RestrictionSequence> {
    let mut degrees = Vec::new();
    let mut exact = true;
    for k in window.degrees() {
        let basis = data.full.slot_basis(k);
        let sub_dim = data.sub.dim(k);
        let mut cols = Vec::new();
        let mut ker: Echelon<usize> = Echelon::new(false);
        let mut kernel_dim = 0;
        for s in &basis {
            let f = data.full.slot_elem(k, *s);
            cols.push(data.sub.coords(&data.restrict(&f))?);
        }
        let m = SparseMatrix::from_columns(sub_dim, cols);
        let image_rank = m.rank();
        for v in crate::graded::linalg::kernel(&m) {
            let f = data.full.from_coords(k, &v);
            // kernel elements must vanish on 𝒞(M)
            if !data.relative.respects_variant(&f) {
                exact = false;
            }
            if ker.insert(v, None).is_ok() {
                kernel_dim += 1;
            }
        }
        let relative_dim = data.relative.dim(k);
        exact &= image_rank == sub_dim && kernel_dim == relative_dim && kernel_dim + image_rank == basis.len();
        degrees.push(RestrictionDegree { k, total: basis.len(), image_rank, sub_dim, kernel_dim, relative_dim });
    }
    Ok(RestrictionSequence { degrees, exact })
}
