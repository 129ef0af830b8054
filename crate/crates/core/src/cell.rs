//! Single-cell attachments L = M ⊔ (x, dx = ω): triviality of [ω], the
//! ψ-transported homology of 𝒟er^M L, the degree-0 group data and the
//! family of relative automorphisms x ↦ λx + α.

use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::derivations::{
    declared_inclusion, der_homology, psi, psi_iso, CellShape, DerKind, DerSpace, DerivationComplex, GCondition,
    PsiCertificate,
};
use crate::error::{Error, Result};
use crate::free_lie::{FreeLie, LieElem, Morphism, SubDglInclusion};
use crate::graded::complex::{homology, DegreeWindow};
use crate::graded::linalg::{kernel, solve, Echelon, SVec, SparseMatrix};
use crate::graded::scalar::{fmt_q, q, Q};

#[derive(Clone, Debug)]
pub struct CellAttachment {
    pub shape: CellShape,
    pub l: Arc<FreeLie>,
}

impl CellAttachment {
    /// The declared sub-dgl must miss exactly one generator.
    pub fn new(l: &Arc<FreeLie>) -> Result<Self> {
        Self::from_inclusion(&declared_inclusion(l)?)
    }

    pub fn from_inclusion(inc: &SubDglInclusion) -> Result<Self> {
        let shape = CellShape::new(inc)?;
        let l = inc.ambient.clone();
        let sq = l.check_square_zero();
        if !sq.pass {
            let (g, r) = sq.failure.unwrap_or_default();
            return Err(Error::Validation(format!("d² ≠ 0 on {g}: {r}")));
        }
        if !l.differential(&shape.omega).is_zero() {
            return Err(Error::Validation("the attaching element is not a cycle".into()));
        }
        if !inc.in_sub(&shape.omega) {
            return Err(Error::Shape("the attaching element does not lie in M".into()));
        }
        Ok(CellAttachment { shape, l })
    }

    pub fn n(&self) -> i64 {
        self.shape.n
    }

    pub fn x_name(&self) -> &str {
        &self.l.pres.generators[self.shape.x].name
    }

    /// Index of x in the basis of L_n.
    fn x_index(&self) -> usize {
        let c = self.l.coords_or_panic(&self.l.generator(self.shape.x));
        let i = *c.iter().next().unwrap().0;
        i
    }

    /// Basis indices of L''_n, the complement of ℚx.
    fn complement_indices(&self) -> Vec<usize> {
        let xi = self.x_index();
        (0..self.l.dim(self.n())).filter(|&i| i != xi).collect()
    }

    fn d_matrix(&self, k: i64) -> SparseMatrix {
        let l = &self.l;
        let cols = (0..l.dim(k)).map(|i| l.coords_or_panic(&l.differential(l.basis_elem(k, i)))).collect();
        SparseMatrix::from_columns(l.dim(k - 1), cols)
    }
}

fn coef(v: &SVec<usize>, i: usize) -> Q {
    v.get(&i).cloned().unwrap_or_else(Q::zero)
}

fn span_contains(vectors: Vec<SVec<usize>>, v: &SVec<usize>) -> bool {
    let mut e: Echelon<usize> = Echelon::new(false);
    for w in vectors {
        let _ = e.insert(w, None);
    }
    e.contains(v)
}

fn span_rank(vectors: impl IntoIterator<Item = SVec<usize>>) -> usize {
    let mut e: Echelon<usize> = Echelon::new(false);
    let mut r = 0;
    for w in vectors {
        if e.insert(w, None).is_ok() {
            r += 1;
        }
    }
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct Triviality {
    pub omega: String,
    /// ω ∈ d(M_n): the attaching map is rationally trivial.
    pub boundary_in_m: bool,
    /// A primitive in M when one exists.
    pub primitive: Option<String>,
    /// ω ∈ d(L''_n), solved inside L.
    pub boundary_in_complement: bool,
    /// ker d ∩ L_n ⊂ L''_n.
    pub cycles_in_complement: bool,
    /// "ker d ⊂ L''_n iff dx is not a boundary on M".
    pub equivalence: Flag,
    /// Whether x is already a cycle; otherwise the substitution x ↦ x − β, dβ = ω, makes it one.
    pub x_is_cycle: bool,
}

pub fn triviality(c: &CellAttachment) -> Triviality {
    let l = &c.l;
    let n = c.n();
    let inc = &c.shape.inc;
    let omega = l.coords(&c.shape.omega).unwrap_or_default();
    // primitives inside M, pushed forward into L
    let m = &inc.sub;
    let m_elems: Vec<LieElem> = (0..m.dim(n)).map(|i| inc.inclusion.apply(m.basis_elem(n, i))).collect();
    let m_cols: Vec<SVec<usize>> = m_elems.iter().map(|e| l.coords_or_panic(&l.differential(e))).collect();
    let dm = SparseMatrix::from_columns(l.dim(n - 1), m_cols);
    let sol = solve(&dm, &omega);
    let primitive = sol.as_ref().map(|s| {
        let mut b = LieElem::zero(n);
        for (i, v) in s.iter() {
            b.add_scaled(&m_elems[*i], v);
        }
        l.render(&b)
    });
    let d = c.d_matrix(n);
    let comp = c.complement_indices();
    let comp_cols: Vec<SVec<usize>> = comp.iter().map(|&i| d.column(i).clone()).collect();
    let boundary_in_complement = span_contains(comp_cols, &omega);
    let xi = c.x_index();
    let cycles_in_complement = kernel(&d).iter().all(|z| coef(z, xi).is_zero());
    let boundary_in_m = sol.is_some();
    Triviality {
        omega: l.render(&c.shape.omega),
        boundary_in_m,
        primitive,
        boundary_in_complement,
        cycles_in_complement,
        equivalence: Flag::compare(
            "ker d ⊂ L''_n if and only if dx is not a boundary on M",
            "exact",
            (!boundary_in_m) as i64,
            cycles_in_complement as i64,
        ),
        x_is_cycle: c.shape.omega.is_zero(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Consistency {
    #[serde(rename = "CONSISTENT")]
    Consistent,
    #[serde(rename = "INCONSISTENT")]
    Inconsistent,
}

impl std::fmt::Display for Consistency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Consistency::Consistent => "CONSISTENT",
            Consistency::Inconsistent => "INCONSISTENT",
        })
    }
}

/// A claimed value set against the computed one.
#[derive(Clone, Debug, Serialize)]
pub struct Flag {
    pub claim: String,
    pub reading: String,
    pub predicted: i64,
    pub computed: i64,
    pub status: Consistency,
}

impl Flag {
    fn compare(claim: &str, reading: &str, predicted: i64, computed: i64) -> Flag {
        Flag {
            claim: claim.into(),
            reading: reading.into(),
            predicted,
            computed,
            status: if predicted == computed { Consistency::Consistent } else { Consistency::Inconsistent },
        }
    }
}

/// The flag H(V) ⊃ Γ ⊃ 0 on linear homology, Γ the image of U.
#[derive(Clone, Debug, Serialize)]
pub struct GammaFlag {
    /// dim H(V, d₁)
    pub total: usize,
    /// dim Γ
    pub gamma: usize,
    /// d₁x, the linear part of ω
    pub linear_omega: String,
    /// Generators of U that survive to Γ.
    pub spanning: Vec<String>,
}

pub fn gamma_flag(c: &CellAttachment) -> GammaFlag {
    let l = &c.l;
    let ng = l.ngens();
    // d₁ on generator coordinates
    let d1: Vec<SVec<usize>> = (0..ng)
        .map(|g| {
            let mut v = SVec::new();
            for (w, x) in l.pres.differential[g].terms.iter() {
                if w.len() == 1 {
                    v.add_term(w[0] as usize, x.clone());
                }
            }
            v
        })
        .collect();
    let d1m = SparseMatrix::from_columns(ng, d1.clone());
    let cycles = kernel(&d1m);
    let boundaries = d1.clone();
    let b_rank = span_rank(boundaries.clone());
    let total = cycles.len() - b_rank;
    let u: Vec<usize> = c.shape.inc.sub_generators.clone();
    // Γ = (Z ∩ U + B) / B
    let u_cycles: Vec<SVec<usize>> = kernel(&SparseMatrix::from_columns(ng, u.iter().map(|&g| d1[g].clone()).collect()))
        .into_iter()
        .map(|z| {
            let mut v = SVec::new();
            for (i, x) in z.iter() {
                v.add_term(u[*i], x.clone());
            }
            v
        })
        .collect();
    let gamma = span_rank(boundaries.iter().cloned().chain(u_cycles.iter().cloned())) - b_rank;
    let mut spanning = Vec::new();
    let mut e: Echelon<usize> = Echelon::new(false);
    for b in &boundaries {
        let _ = e.insert(b.clone(), None);
    }
    for &g in &u {
        let v = SVec::unit(g);
        if d1[g].is_zero() && e.insert(v, None).is_ok() {
            spanning.push(l.pres.generators[g].name.clone());
        }
    }
    let mut lin = LieElem::zero(c.n() - 1);
    for (g, x) in d1[c.shape.x].iter() {
        lin.add_scaled(&l.generator(*g), x);
    }
    GammaFlag { total, gamma, linear_omega: l.render(&lin), spanning }
}

#[derive(Clone, Debug, Serialize)]
pub struct HomologyComparison {
    pub k: i64,
    pub direct: usize,
    pub via_psi: usize,
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Transport {
    pub certificate: PsiCertificate,
    /// ψ(𝒟er^M_0 L) equals L''_n + d(L_{n+1}).
    pub degree_zero_matches: bool,
    pub degrees: Vec<HomologyComparison>,
    pub agree: bool,
}

/// ψ as a chain isomorphism Der^M_* L ≅ L_{*+n}; two-cell shapes are rejected
/// by [`CellShape::new`].
pub fn psi_transport(c: &CellAttachment, window: DegreeWindow) -> PsiCertificate {
    psi_iso(&c.shape, window)
}

/// H_k(𝒟er^M L) directly and through ψ, where degree 0 becomes the
/// subspace L''_n + d(L_{n+1}) of L_n and degree k ≥ 1 becomes L_{k+n}.
pub fn transported_homology(c: &CellAttachment, cal: &DerivationComplex, degrees: DegreeWindow) -> Result<Transport> {
    let l = &c.l;
    let n = c.n();
    for k in degrees.degrees() {
        cal.complex.window.check_margin(k)?;
    }
    let lw = DegreeWindow::new(degrees.min.max(0) + n - 1, degrees.max + n + 1)?;
    let lc = l.chain_complex(lw);
    // degree-0 subspace of L_n
    let d_up = c.d_matrix(n + 1);
    let mut t0: Vec<SVec<usize>> = c.complement_indices().into_iter().map(SVec::unit).collect();
    t0.extend((0..l.dim(n + 1)).map(|i| d_up.column(i).clone()));
    let t0_rank = span_rank(t0.clone());
    let psi0: Vec<SVec<usize>> = (0..cal.dim(0))
        .map(|i| l.coords_or_panic(&psi(&c.shape, &cal.basis_derivation(0, i))))
        .collect();
    let degree_zero_matches =
        span_rank(psi0.clone()) == t0_rank && span_rank(psi0.iter().cloned().chain(t0.iter().cloned())) == t0_rank;
    let mut out = Vec::new();
    let mut agree = degree_zero_matches;
    for k in degrees.degrees() {
        let direct = der_homology(cal, k)?.homology.betti;
        let via_psi = if k < 0 {
            0
        } else if k == 0 {
            // (ker d ∩ T₀) / d(L_{n+1})
            let d = c.d_matrix(n);
            let basis = independent(&t0);
            let image: Vec<SVec<usize>> = basis.iter().map(|v| d.apply(v)).collect();
            let ker = basis.len() - span_rank(image);
            ker - d_up.rank()
        } else {
            homology(&lc, k + n)?.betti
        };
        agree &= direct == via_psi;
        out.push(HomologyComparison { k, direct, via_psi, agree: direct == via_psi });
    }
    let certificate = psi_transport(c, DegreeWindow::new(degrees.min.max(1), degrees.max + 1)?);
    agree &= certificate.bijective && certificate.chain_map;
    Ok(Transport { certificate, degree_zero_matches, degrees: out, agree })
}

fn independent(vs: &[SVec<usize>]) -> Vec<SVec<usize>> {
    let mut e: Echelon<usize> = Echelon::new(false);
    vs.iter().filter(|v| e.insert((*v).clone(), None).is_ok()).cloned().collect()
}

/// H₀(𝒟er^M L) as a nilpotent Lie algebra under the commutator, with the
/// group law given by BCH at the truncation.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeZeroGroup {
    pub dim: usize,
    pub nilpotency_class: Option<usize>,
    pub lower_central_series: Vec<usize>,
    pub abelian: bool,
    pub representatives: Vec<String>,
}

fn degree_zero_group(cal: &DerivationComplex) -> Result<DegreeZeroGroup> {
    let h = der_homology(cal, 0)?;
    let reps = h
        .homology
        .representatives
        .iter()
        .map(|z| crate::derivations::render_derivation(&cal.space, &cal.from_coords(0, z)))
        .collect();
    let alg = h.h0_algebra.ok_or_else(|| Error::Certificate("no degree-0 algebra".into()))?;
    let lcs = alg.lower_central_series().ok();
    let abelian = alg.structure.iter().all(|r| r.iter().all(|v| v.is_zero()));
    Ok(DegreeZeroGroup {
        dim: alg.dim,
        nilpotency_class: lcs.as_ref().map(|s| s.iter().filter(|&&d| d > 0).count()),
        lower_central_series: lcs.unwrap_or_default(),
        abelian,
        representatives: reps,
    })
}

/// Relative automorphisms φ with φ|_M = id and φ(x) = λx + α, α ∈ L''_n:
/// the admissible (λ, α) solve λω + dα = ω.
#[derive(Clone, Debug, Serialize)]
pub struct AutomorphismFamily {
    /// Homogeneous solutions (μ, a) of μω + da = 0.
    pub directions: Vec<(String, String)>,
    pub lambda_forced_one: bool,
    /// dim (ker d ∩ L''_n), the α-space at λ = 1.
    pub alpha_dim: usize,
    pub alpha_basis: Vec<String>,
    /// Sample members x ↦ λx + α, each checked to be a relative automorphism.
    pub members: Vec<FamilyMember>,
    pub members_verified: bool,
    /// (λ, α) ↦ φ(x) has full rank on the parameters.
    pub parameters_injective: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyMember {
    pub lambda: String,
    pub image_of_x: String,
    pub chain_map: bool,
    pub fixes_m: bool,
}

pub fn automorphism_family(c: &CellAttachment) -> Result<AutomorphismFamily> {
    let l = &c.l;
    let n = c.n();
    let d = c.d_matrix(n);
    let comp = c.complement_indices();
    let omega = l.coords(&c.shape.omega).unwrap_or_default();
    // columns: ω, then d of the complement basis
    let mut cols = vec![omega.clone()];
    cols.extend(comp.iter().map(|&i| d.column(i).clone()));
    let a = SparseMatrix::from_columns(l.dim(n - 1), cols);
    let ker = kernel(&a);
    let to_elem = |v: &SVec<usize>| {
        let mut e = LieElem::zero(n);
        for (j, x) in v.iter() {
            if *j > 0 {
                e.add_scaled(l.basis_elem(n, comp[*j - 1]), x);
            }
        }
        e
    };
    let lambda_forced_one = ker.iter().all(|v| coef(v, 0).is_zero());
    let alpha_space = {
        // ker d ∩ L''_n, independent of the kernel basis chosen above
        let dc = SparseMatrix::from_columns(l.dim(n - 1), comp.iter().map(|&i| d.column(i).clone()).collect());
        kernel(&dc)
    };
    let directions = ker.iter().map(|v| (fmt_q(&coef(v, 0)), l.render(&to_elem(v)))).collect();
    let x = l.generator(c.shape.x);
    let mut members = Vec::new();
    let mut build = |lambda: Q, alpha: LieElem| -> Result<()> {
        let mut images: Vec<LieElem> = (0..l.ngens()).map(|g| l.generator(g)).collect();
        let img = x.scaled(&lambda).plus(&alpha);
        images[c.shape.x] = img.clone();
        let phi = Morphism::new(l.clone(), l.clone(), images)?;
        let chain_map = phi.check_chain().is_ok();
        let fixes_m = c.shape.inc.sub_generators.iter().all(|&g| phi.apply(&l.generator(g)) == l.generator(g));
        members.push(FamilyMember { lambda: fmt_q(&lambda), image_of_x: l.render(&img), chain_map, fixes_m });
        Ok(())
    };
    build(Q::one(), LieElem::zero(n))?;
    for v in &alpha_space {
        let mut e = LieElem::zero(n);
        for (j, s) in v.iter() {
            e.add_scaled(l.basis_elem(n, comp[*j]), s);
        }
        build(Q::one(), e)?;
    }
    if let Some(v) = ker.iter().find(|v| !coef(v, 0).is_zero()) {
        // normalise μ = 1: x ↦ λx + (λ − 1)a
        let a = to_elem(v).scaled(&(Q::one() / coef(v, 0)));
        for lambda in [q(2), q(-1), Q::new(1.into(), 3.into())] {
            build(lambda.clone(), a.scaled(&(lambda - Q::one())))?;
        }
    }
    let members_verified = members.iter().all(|m| m.chain_map && m.fixes_m);
    // parameters: λ (if free) and the α-space
    let mut param_cols: Vec<SVec<usize>> = Vec::new();
    let xi = c.x_index();
    if !lambda_forced_one {
        param_cols.push(SVec::unit(xi));
    }
    for v in &alpha_space {
        let mut w = SVec::new();
        for (j, s) in v.iter() {
            w.add_term(comp[*j], s.clone());
        }
        param_cols.push(w);
    }
    let parameters_injective = span_rank(param_cols.clone()) == param_cols.len();
    Ok(AutomorphismFamily {
        directions,
        lambda_forced_one,
        alpha_dim: alpha_space.len(),
        alpha_basis: alpha_space
            .iter()
            .map(|v| {
                let mut e = LieElem::zero(n);
                for (j, s) in v.iter() {
                    e.add_scaled(l.basis_elem(n, comp[*j]), s);
                }
                l.render(&e)
            })
            .collect(),
        members,
        members_verified,
        parameters_injective,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CellReport {
    pub model: String,
    pub truncation: usize,
    pub window: (i64, i64),
    pub n: i64,
    pub cell: String,
    pub triviality: Triviality,
    pub gamma: GammaFlag,
    pub closed: bool,
    pub transport: Transport,
    /// (k, dim π_k B aut) = (k, dim H_{k−1}(𝒟er^M L)) for k ≥ 1 in window.
    pub classifying_homotopy: Vec<(i64, usize)>,
    pub contractible_in_window: bool,
    pub h0: DegreeZeroGroup,
    pub h_n_full: usize,
    pub h_n_complement: usize,
    pub automorphisms: AutomorphismFamily,
    /// λ forced to 1 by the parameter solve iff [ω] ≠ 0 by the boundary test.
    pub lambda_oracle: Flag,
    pub flags: Vec<Flag>,
    pub group: String,
}

impl CellReport {
    /// Certificates only; the comparison flags are informational.
    pub fn pass(&self) -> bool {
        self.transport.agree
            && self.automorphisms.members_verified
            && self.automorphisms.parameters_injective
            && self.lambda_oracle.status == Consistency::Consistent
            && self.triviality.equivalence.status == Consistency::Consistent
    }
}

/// The full pipeline in homology degrees `degrees` of 𝒟er^M L.
pub fn classify_attachment(c: &CellAttachment, degrees: DegreeWindow) -> Result<CellReport> {
    let l = &c.l;
    let n = c.n();
    let cal = DerivationComplex::build(
        DerSpace::relative(&c.shape.inc),
        DerKind::CalDerRelative,
        Some(GCondition::Gamma),
        l.pres.window,
    )?;
    let triv = triviality(c);
    let transport = transported_homology(c, &cal, degrees)?;
    let h0 = degree_zero_group(&cal)?;
    let lw = DegreeWindow::new(n - 1, n + 1)?;
    let lc = l.chain_complex(lw);
    let h_n_full = homology(&lc, n)?.betti;
    // (ker d ∩ L''_n) / (im d ∩ L''_n)
    let d = c.d_matrix(n);
    let comp = c.complement_indices();
    let dc = SparseMatrix::from_columns(l.dim(n - 1), comp.iter().map(|&i| d.column(i).clone()).collect());
    let z = kernel(&dc).len();
    let xi = c.x_index();
    let d_up = c.d_matrix(n + 1);
    let im: Vec<SVec<usize>> = (0..l.dim(n + 1)).map(|i| d_up.column(i).clone()).collect();
    let im_rank = span_rank(im.clone());
    // im ∩ L''_n: boundaries with no x component
    let x_row: Vec<SVec<usize>> = im.iter().map(|v| SVec::single(0usize, coef(v, xi))).collect();
    let x_rank = span_rank(x_row);
    let h_n_complement = z - (im_rank - x_rank);
    let computed = h0.dim as i64;
    let nontrivial = !triv.boundary_in_m;
    let mut flags = Vec::new();
    for (interp, hn) in [("H_n of L", h_n_full as i64), ("H_n of L''", h_n_complement as i64)] {
        let (proof, remark) = if nontrivial { (hn - 1, hn) } else { (hn, hn - 1) };
        flags.push(Flag::compare(
            if nontrivial {
                "dim H_0(𝒟er^M L) = dim H_n(L) − 1 when [ω] ≠ 0"
            } else {
                "H_0(𝒟er^M L) ≅ H_n(L) when [ω] = 0"
            },
            &format!("proof, {interp}"),
            proof,
            computed,
        ));
        flags.push(Flag::compare(
            if nontrivial {
                "H_n(L) inherits the group structure of H_0 when [ω] ≠ 0"
            } else {
                "a codimension 1 subspace of H_n(L) inherits the group structure of H_0 when [ω] = 0"
            },
            &format!("remark, {interp}"),
            remark,
            computed,
        ));
    }
    for h in &transport.degrees {
        if h.k >= 1 {
            flags.push(Flag::compare(
                "π_k B aut^A(X) ≅ π_{n+k}(X) for k ≥ 2",
                &format!("k = {}", h.k + 1),
                h.via_psi as i64,
                h.direct as i64,
            ));
        }
    }
    let automorphisms = automorphism_family(c)?;
    let lambda_oracle = Flag::compare(
        "λ = 1 for every relative automorphism iff dx is not a boundary on M",
        "parameter solve against the boundary test",
        nontrivial as i64,
        automorphisms.lambda_forced_one as i64,
    );
    let classifying_homotopy: Vec<(i64, usize)> =
        transport.degrees.iter().filter(|h| h.k >= 0).map(|h| (h.k + 1, h.direct)).collect();
    // a free λ puts ℚ* into π_1
    let contractible_in_window = automorphisms.lambda_forced_one && classifying_homotopy.iter().all(|p| p.1 == 0);
    let group = if contractible_in_window {
        "trivial".to_string()
    } else if automorphisms.lambda_forced_one {
        format!("H_0 group of dimension {} under BCH", h0.dim)
    } else {
        format!("K → E → ℚ* with K the H_0 group of dimension {} under BCH", h0.dim)
    };
    Ok(CellReport {
        model: l.pres.name.clone(),
        truncation: l.n(),
        window: (degrees.min, degrees.max),
        n,
        cell: c.x_name().to_string(),
        triviality: triv,
        gamma: gamma_flag(c),
        closed: cal.closed,
        transport,
        classifying_homotopy,
        contractible_in_window,
        h0,
        h_n_full,
        h_n_complement,
        automorphisms,
        lambda_oracle,
        flags,
        group,
    })
}
