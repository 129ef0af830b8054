//! Scenario runner and the versioned structured report.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::cell::{classify_attachment, CellAttachment};
use crate::convolution::{morphism_to_mc, q_map, CoalgebraBasis, ConvAlgebra, Variant};
use crate::derivations::{build_derivation_complex, der_homology, DerKind, GCondition};
use crate::dsl::{parse_model, render_model, Overrides};
use crate::error::{Error, Result};
use crate::fixtures::fixture_text;
use crate::free_lie::{FreeLie, LieElem};
use crate::graded::complex::{homology, DegreeWindow};
use crate::mc_gauge::{bch, component_dgl, find_gauge_witness, gauge_act, mc_residual, MCElement};
use crate::models::{build_fibration_model, quasi_iso_suite, verify_fibration, MapCertificate, ModelContext};
use crate::suite::structural_suite;

pub const SCHEMA: &str = "cdgl-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Check,
    Homology,
    Derivations,
    Mc,
    Gauge,
    Fibration,
    ClassifyCell,
    QuasiIsoSuite,
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario::Check,
    Scenario::Homology,
    Scenario::Derivations,
    Scenario::Mc,
    Scenario::Gauge,
    Scenario::Fibration,
    Scenario::ClassifyCell,
    Scenario::QuasiIsoSuite,
];

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Check => "check",
            Scenario::Homology => "homology",
            Scenario::Derivations => "derivations",
            Scenario::Mc => "mc",
            Scenario::Gauge => "gauge",
            Scenario::Fibration => "fibration",
            Scenario::ClassifyCell => "classify-cell",
            Scenario::QuasiIsoSuite => "quasi-iso-suite",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SCENARIOS
            .iter()
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::Input(format!("unknown scenario `{s}`")))
    }
}

impl Error {
    /// Errors that mean the input was unusable, as opposed to a failed certificate.
    pub fn is_input(&self) -> bool {
        !matches!(self, Error::Certificate(_) | Error::ResidualNonzero | Error::NotAMorphism(_))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelHeader {
    pub name: String,
    pub input: String,
    pub source: Option<String>,
    pub truncation: usize,
    pub wedge: usize,
    pub window: String,
    pub canonical: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub scenario: Scenario,
    pub model: ModelHeader,
    pub pass: bool,
    pub result: Value,
    #[serde(skip)]
    pub text: String,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// `fixture:name` or a path to a model file.
pub fn load_input(spec: &str) -> Result<String> {
    match spec.strip_prefix("fixture:") {
        Some(name) => Ok(fixture_text(name)?.to_string()),
        None => std::fs::read_to_string(spec).map_err(|e| Error::Input(format!("{spec}: {e}"))),
    }
}

pub fn parse_window(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s.split_once("..").ok_or_else(|| Error::Input(format!("window `{s}` is not of the form a..b")))?;
    let p = |t: &str| t.trim().parse::<i64>().map_err(|_| Error::Input(format!("bad window bound `{t}`")));
    let (a, b) = (p(a)?, p(b)?);
    DegreeWindow::new(a, b)?;
    Ok((a, b))
}

pub fn run_scenario(scenario: Scenario, input: &str, text: &str, o: &Overrides) -> Result<Report> {
    let script = parse_model(text)?;
    let l = script.build(o)?;
    let model = ModelHeader {
        name: l.pres.name.clone(),
        input: input.to_string(),
        source: script.provenance.clone(),
        truncation: l.n(),
        wedge: l.pres.wedge,
        window: l.pres.window.to_string(),
        canonical: render_model(&l, script.provenance.as_deref()),
    };
    let (result, pass, body) = match scenario {
        Scenario::Check => check(&l)?,
        Scenario::Homology => homology_scenario(&l)?,
        Scenario::Derivations => derivations(&l)?,
        Scenario::Mc => mc(&l)?,
        Scenario::Gauge => gauge(&l)?,
        Scenario::Fibration => fibration(&l)?,
        Scenario::ClassifyCell => classify(&l)?,
        Scenario::QuasiIsoSuite => qis(&l)?,
    };
    let mut text = String::new();
    let _ = writeln!(text, "{} {} [{}]", SCHEMA, scenario.name(), model.input);
    let _ = writeln!(text, "model {} (N = {}, W = {}, window {})", model.name, model.truncation, model.wedge, model.window);
    if let Some(s) = &model.source {
        let _ = writeln!(text, "source {s}");
    }
    text.push_str(&body);
    let _ = writeln!(text, "{}", if pass { "PASS" } else { "FAIL" });
    Ok(Report { schema: SCHEMA, scenario, model, pass, result, text })
}

type Outcome = Result<(Value, bool, String)>;

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn yes(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

fn check(l: &Arc<FreeLie>) -> Outcome {
    let r = structural_suite(l, 200, 0x5eed);
    let mut t = String::new();
    let _ = writeln!(t, "d² on generators: {}", yes(r.generators.pass));
    for p in &r.properties {
        let _ = writeln!(t, "{}: {}/{} {}", p.property, p.cases - p.failures, p.cases, yes(p.failures == 0));
    }
    Ok((to_value(&r), r.pass(), t))
}

#[derive(Serialize)]
struct DegreeHomology {
    degree: i64,
    dim: usize,
    betti: usize,
    representatives: Vec<String>,
}

fn homology_scenario(l: &Arc<FreeLie>) -> Outcome {
    let w = l.pres.window;
    let c = l.chain_complex(w);
    let square_zero = c.square_zero_failure().is_none();
    let mut out = Vec::new();
    let mut t = String::new();
    for k in w.homology_degrees() {
        let h = homology(&c, k)?;
        let reps = h.representatives.iter().map(|z| l.render(&l.from_coords(k, z))).collect::<Vec<_>>();
        let _ = writeln!(t, "H_{k}: dim {} betti {} {}", c.dim(k), h.betti, reps.join(", "));
        out.push(DegreeHomology { degree: k, dim: c.dim(k), betti: h.betti, representatives: reps });
    }
    Ok((json!({ "window": w.to_string(), "square_zero": square_zero, "degrees": out }), square_zero, t))
}

fn derivations(l: &Arc<FreeLie>) -> Outcome {
    let has_sub = l.sub_generators().is_some();
    let cond = if l.pres.filtration.is_some() { GCondition::Full } else { GCondition::Gamma };
    let mut kinds = vec![(DerKind::Der, None)];
    if has_sub {
        kinds.push((DerKind::DerRelative, None));
        kinds.push((DerKind::DerAlong, None));
    }
    if l.pres.filtration.is_some() {
        kinds.push((DerKind::CalDer, Some(cond.clone())));
    }
    if has_sub {
        kinds.push((DerKind::CalDerRelative, Some(cond.clone())));
    }
    let mut out = Vec::new();
    let mut pass = true;
    let mut t = String::new();
    for (kind, cond) in kinds {
        let c = build_derivation_complex(l, kind, cond.clone())?;
        let sq = c.complex.square_zero_failure().is_none();
        pass &= sq;
        let mut betti = Vec::new();
        for k in c.window.homology_degrees() {
            betti.push((k, der_homology(&c, k)?.homology.betti));
        }
        let h0 = if c.window.homology_degrees().any(|k| k == 0) { der_homology(&c, 0)?.h0_algebra } else { None };
        let h0v = h0.as_ref().map(|a| json!({ "dim": a.dim, "nilpotency_class": a.nilpotency_class().ok() }));
        let _ = writeln!(
            t,
            "{}: D² {} betti {}",
            kind.name(),
            yes(sq),
            betti.iter().filter(|b| b.1 > 0).map(|(k, b)| format!("{k}:{b}")).collect::<Vec<_>>().join(" ")
        );
        out.push(json!({
            "kind": kind.name(),
            "condition": cond,
            "window": c.window.to_string(),
            "closed": c.closed,
            "square_zero": sq,
            "dims": c.complex.dims(),
            "betti": betti,
            "h0": h0v,
        }));
    }
    Ok((json!({ "complexes": out }), pass, t))
}

fn bracket_text(m: &MapCertificate) -> String {
    match m.bracket_map {
        Some(true) if m.pairs_checked == m.pairs_total => format!("ok [all {} pairs]", m.pairs_total),
        Some(true) => format!("ok [{} of {} pairs]", m.pairs_checked, m.pairs_total),
        Some(false) => "no".into(),
        None => "n/a".into(),
    }
}

/// Basis elements of L_{−1} that are Maurer–Cartan, plus 0.
fn mc_candidates(l: &FreeLie) -> Vec<(String, LieElem)> {
    let mut out = vec![("0".to_string(), LieElem::zero(-1))];
    for i in 0..l.dim(-1) {
        let e = l.basis_elem(-1, i).clone();
        if mc_residual(l, &e).map(|r| r.is_zero()).unwrap_or(false) {
            out.push((l.render(&e), e));
        }
    }
    out
}

fn mc(l: &Arc<FreeLie>) -> Outcome {
    let mut t = String::new();
    let mut elems = Vec::new();
    let mut pass = true;
    let top = l.pres.window.max.min(4);
    for (name, e) in mc_candidates(l) {
        let a = MCElement::new(l, e)?;
        let comp = component_dgl(l, &a);
        let c = comp.chain_complex(top)?;
        let betti: Vec<(i64, usize)> =
            (0..top).map(|k| homology(&c, k).map(|h| (k, h.betti))).collect::<Result<_>>()?;
        let _ = writeln!(t, "MC {name}: residual 0, H(L^a) {:?}", betti);
        elems.push(json!({ "element": name, "residual_zero": true, "component_betti": betti }));
    }
    // the universal element q ∈ Hom(𝒞L, L) when the coalgebra is defined
    let conv = match CoalgebraBasis::new(l, l.pres.wedge, l.n() as i64) {
        Ok(coalg) => {
            let alg = ConvAlgebra::new(&coalg, l, Variant::Full)?;
            let q = q_map(&coalg);
            let q_mc = alg.mc_residual(&q).is_zero();
            let mut v = json!({ "coalgebra_words": coalg.len(), "q_is_mc": q_mc });
            pass &= q_mc;
            let _ = writeln!(t, "q ∈ Hom(C,L): MC {}", yes(q_mc));
            if let Some(u) = l.sub_generators() {
                let inc = l.sub_algebra(&u.to_vec())?;
                let sub = CoalgebraBasis::new(&inc.sub, l.pres.wedge, l.n() as i64)?;
                let jq = morphism_to_mc(&sub, &inc.inclusion)?;
                let ok = ConvAlgebra::new(&sub, l, Variant::Full)?.mc_residual(&jq).is_zero();
                pass &= ok;
                let _ = writeln!(t, "jq ∈ Hom(CM,L): MC {}", yes(ok));
                v["jq_is_mc"] = json!(ok);
            }
            v
        }
        Err(e) => {
            let _ = writeln!(t, "convolution side skipped: {e}");
            json!({ "skipped": e.to_string() })
        }
    };
    Ok((json!({ "elements": elems, "convolution": conv }), pass, t))
}

fn gauge(l: &Arc<FreeLie>) -> Outcome {
    let mut t = String::new();
    let mcs = mc_candidates(l);
    let xs: Vec<LieElem> = (0..l.dim(0).min(4)).map(|i| l.basis_elem(0, i).clone()).collect();
    let mut cases = Vec::new();
    let mut pass = true;
    for (name, e) in &mcs {
        let a = MCElement::new(l, e.clone())?;
        for (i, x) in xs.iter().enumerate() {
            let b = gauge_act(l, x, &a)?;
            let residual_zero = b.residual.is_zero();
            let y = &xs[(i + 1) % xs.len()];
            let lhs = gauge_act(l, y, &b)?;
            let rhs = gauge_act(l, &bch(l, y, x)?, &a)?;
            let action = lhs.value == rhs.value;
            let search = find_gauge_witness(l, &a, &b, l.n())?;
            let witness_ok = match search.witness() {
                Some(w) => gauge_act(l, w, &a)?.value == b.value,
                None => false,
            };
            pass &= residual_zero && action && witness_ok;
            let _ = writeln!(
                t,
                "{} 𝒢 {name}: residual {} action {} witness {}",
                l.render(x),
                yes(residual_zero),
                yes(action),
                yes(witness_ok)
            );
            cases.push(json!({
                "x": l.render(x),
                "a": name,
                "result": l.render(&b.value),
                "residual_zero": residual_zero,
                "action_property": action,
                "witness_found": witness_ok,
            }));
        }
    }
    // distinct MC basis elements: equivalent or an obstruction
    let mut pairs = Vec::new();
    for i in 0..mcs.len() {
        for j in (i + 1)..mcs.len() {
            let a = MCElement::new(l, mcs[i].1.clone())?;
            let b = MCElement::new(l, mcs[j].1.clone())?;
            let s = find_gauge_witness(l, &a, &b, l.n())?;
            let _ = writeln!(t, "{} ~ {}: {}", mcs[i].0, mcs[j].0, if s.witness().is_some() { "equivalent" } else { "not equivalent" });
            pairs.push(json!({ "a": mcs[i].0, "b": mcs[j].0, "search": s, "witness": s.witness().map(|w| l.render(w)) }));
        }
    }
    if xs.is_empty() {
        let _ = writeln!(t, "L_0 = 0: the gauge action is trivial");
    }
    Ok((json!({ "cases": cases, "pairs": pairs }), pass, t))
}

fn fibration(l: &Arc<FreeLie>) -> Outcome {
    let ctx = ModelContext::new(l)?;
    let cond = if l.pres.filtration.is_some() { GCondition::Full } else { GCondition::Gamma };
    let m = build_fibration_model(&ctx, cond)?;
    let w = DegreeWindow::new(-1, (l.pres.window.max - 1).min(5))?;
    let c = verify_fibration(&m, w)?;
    let mut t = String::new();
    let _ = writeln!(t, "window {w}, base closed: {}", c.closed);
    let _ = writeln!(t, "L → L ×̃ cal-Der^M L → cal-Der^M L short exact: {}", yes(c.short_exact));
    let _ = writeln!(t, "projection onto the base in degrees ≥ 0: {}", yes(c.surjective_nonnegative));
    let _ = writeln!(t, "M-section injective: {}, section property: {}", yes(c.section_injective), yes(c.section_property));
    for m in c.maps.iter().chain(&c.classifying) {
        let _ = writeln!(t, "{}: chain {} bracket {}", m.map, yes(m.chain_map), bracket_text(m));
    }
    Ok((to_value(&c), c.pass(), t))
}

fn classify(l: &Arc<FreeLie>) -> Outcome {
    let c = CellAttachment::new(l)?;
    let w = DegreeWindow::new(0, (l.pres.window.max - 1).min(3))?;
    let r = classify_attachment(&c, w)?;
    let mut t = String::new();
    let _ = writeln!(t, "cell {} of degree {} attached along {}", r.cell, r.n, r.triviality.omega);
    let _ = writeln!(t, "[ω] = 0 in H(M): {}", r.triviality.boundary_in_m);
    for h in &r.transport.degrees {
        let _ = writeln!(t, "H_{}(cal-Der^M L) = {} direct, {} via ψ", h.k, h.direct, h.via_psi);
    }
    let _ = writeln!(t, "H_0 group: dim {} class {:?}", r.h0.dim, r.h0.nilpotency_class);
    let _ = writeln!(
        t,
        "automorphisms x ↦ λx + α: λ forced to 1: {}, α-space dim {}",
        r.automorphisms.lambda_forced_one, r.automorphisms.alpha_dim
    );
    for f in std::iter::once(&r.triviality.equivalence).chain(std::iter::once(&r.lambda_oracle)).chain(&r.flags) {
        let _ = writeln!(t, "{}: {} [{}] claimed {} computed {}", f.status, f.claim, f.reading, f.predicted, f.computed);
    }
    let _ = writeln!(t, "E^A(X): {}", r.group);
    Ok((to_value(&r), r.pass(), t))
}

fn qis(l: &Arc<FreeLie>) -> Outcome {
    let ctx = ModelContext::new(l)?;
    let s = quasi_iso_suite(&ctx, DegreeWindow::new(0, 3)?)?;
    let mut t = String::new();
    let _ = writeln!(t, "coalgebra: wedge {}, degree cap {}", s.coalgebra_wedge, s.coalgebra_max_degree);
    for m in &s.maps {
        let qi = m.quasi_iso.as_ref().map(|q| {
            q.degrees.iter().map(|d| format!("{}:{}→{} rk {}", d.k, d.source_betti, d.target_betti, d.rank)).collect::<Vec<_>>().join(" ")
        });
        let _ = writeln!(
            t,
            "{}: chain {} bracket {} quasi-iso {}",
            m.map,
            yes(m.chain_map),
            bracket_text(m),
            match (&m.quasi_iso, qi) {
                (Some(q), Some(d)) => format!("{} [{}]", yes(q.iso), d),
                _ => "n/a".into(),
            }
        );
    }
    let _ = writeln!(t, "η∘σ = id: {}", yes(s.eta_sigma_identity));
    let _ = writeln!(t, "E ↪ Hom(C,L) ×̃ Der L: chain {} bracket {}", yes(s.section_embedding.chain_map), bracket_text(&s.section_embedding));
    let _ = writeln!(t, "Φ without sign is a chain map: {}", s.phi_unsigned.chain_map);
    let _ = writeln!(t, "Φ ladder: commutes {} rows exact {}", yes(s.ladder.commutes), yes(s.ladder.top_exact && s.ladder.bottom_exact));
    match &s.literal_section_defect {
        Some((x, v)) => {
            let _ = writeln!(t, "literal section differential: D̃² ≠ 0 at {x}: {v}");
        }
        None => {
            let _ = writeln!(t, "literal section differential squares to zero");
        }
    }
    for a in &s.acyclic {
        let _ = writeln!(t, "{}: acyclic {} {:?}", a.complex, yes(a.acyclic), a.betti);
    }
    Ok((to_value(&s), s.pass(), t))
}
