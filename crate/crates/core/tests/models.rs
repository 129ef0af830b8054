mod common;

use std::sync::Arc;

use cdgl::convolution::Variant;
use cdgl::derivations::GCondition;
use cdgl::fixtures::{fixture, SHIPPED};
use cdgl::graded::complex::DegreeWindow;
use cdgl::models::*;

fn ctx(name: &str) -> ModelContext {
    ModelContext::new(&fixture(name).unwrap()).unwrap()
}

fn w(a: i64, b: i64) -> DegreeWindow {
    DegreeWindow::new(a, b).unwrap()
}

fn betti(c: &MapCertificate) -> Vec<(usize, usize, usize)> {
    c.quasi_iso.as_ref().unwrap().degrees.iter().map(|d| (d.source_betti, d.target_betti, d.rank)).collect()
}

#[test]
fn comparison_suite_disk_and_cp2() {
    for name in ["disk1", "cp2"] {
        let s = quasi_iso_suite(&ctx(name), w(0, 3)).unwrap();
        for m in &s.maps {
            assert!(m.chain_map, "{name}: {} is not a chain map: {:?}", m.map, m.failures);
            if let Some(q) = &m.quasi_iso {
                assert!(q.iso, "{name}: {} is not a quasi-isomorphism: {:?}", m.map, q);
            }
        }
        assert!(s.eta_sigma_identity);
        assert!(s.section_embedding.chain_map && s.section_embedding.bracket_map == Some(true));
        assert!(s.ladder.commutes && s.ladder.top_exact && s.ladder.bottom_exact);
        assert!(s.acyclic.iter().all(|a| a.acyclic), "{:?}", s.acyclic);
        assert!(s.pass(), "{name}");
    }
}

#[test]
fn cp2_homology_matches_known_values() {
    // H_*(Der L) of ℂP² in degrees 1..4 is ℚ in 1 and 3; Φ shifts by one.
    let c = ctx("cp2");
    let phi = certify(&c.phi(PhiKind::Identity).unwrap(), w(0, 3), true).unwrap();
    assert_eq!(betti(&phi), vec![(1, 1, 1), (0, 0, 0), (1, 1, 1), (0, 0, 0)]);
    // σ: H(L) = ℚ x1 in degree 1
    let sigma = certify(&c.sigma().unwrap(), w(0, 3), true).unwrap();
    assert_eq!(betti(&sigma), vec![(0, 0, 0), (1, 1, 1), (0, 0, 0), (0, 0, 0)]);
}

#[test]
fn unsigned_phi_is_not_a_chain_map() {
    for name in ["disk1", "cp2"] {
        let c = ctx(name);
        let (ok, fails) = verify_chain(&c.phi_unsigned(PhiKind::Identity).unwrap(), w(0, 3));
        assert!(!ok && !fails.is_empty(), "{name}");
    }
}

#[test]
fn literal_section_rule_does_not_square_to_zero() {
    for name in ["disk1", "cp2"] {
        assert!(ctx(name).literal_section_defect().unwrap().is_some(), "{name}");
    }
    // nothing to twist when M = L
    let script = cdgl::dsl::parse_model(
        "model m\ngenerator x : 1\nsub M = { x }\nfiltration { }\ntruncate 4\nwedge 4\nwindow -2..6\n",
    )
    .unwrap();
    let l = script.build(&Default::default()).unwrap();
    assert!(ModelContext::new(&l).unwrap().literal_section_defect().unwrap().is_none());
}

fn exhaustive_bracket(m: &DglMap) -> Option<bool> {
    verify_bracket(m, w(0, 3), usize::MAX).holds
}

#[test]
fn projections_are_chain_maps_but_not_lie() {
    // [θ, f] = θ∘f survives in the source and dies after restriction
    let c = ctx("cp2");
    assert_eq!(exhaustive_bracket(&c.rho(Variant::Full).unwrap()), Some(false));
    assert_eq!(exhaustive_bracket(&c.rho(Variant::Reduced).unwrap()), Some(false));
    // [θ, x] = θ(x) in E while [η θ, η x] = 0
    assert_eq!(exhaustive_bracket(&c.eta().unwrap()), Some(false));
    for m in [c.sigma().unwrap(), c.kappa().unwrap(), c.kappa_bar().unwrap(), c.varrho().unwrap()] {
        assert_eq!(exhaustive_bracket(&m), Some(true), "{}", m.name);
    }
}

#[test]
fn twisted_products_are_dgls() {
    for name in ["disk1", "cp2", "sphere2"] {
        let c = ctx(name);
        for t in [
            c.section_model().unwrap(),
            c.full_convolution().unwrap(),
            c.relative_kernel().unwrap(),
            c.kappa_bar_target().unwrap(),
            c.kappa_target().unwrap(),
            c.action_relative().unwrap(),
            c.rho_source(Variant::Reduced).unwrap(),
        ] {
            let s = verify_structure(&t, w(-1, 3), 5);
            assert!(s.pass(), "{name}: {}: {:?}", s.product, s.failures);
            assert!(s.pairs_checked > 0);
        }
        for t in [c.cone("cone", c.der_relative()), c.cone_l().unwrap()] {
            assert!(!t.is_lie());
            assert!(verify_structure(&t, w(-1, 3), 5).square_zero);
        }
    }
}

#[test]
fn mixed_brackets_by_hand() {
    // in L ×̃ Der^M L, [θ, x] = θ(x)
    let c = ctx("cp2");
    let t = c.action_relative().unwrap();
    let l = &c.l;
    let x1 = l.gen_by_name("x1").unwrap();
    let x2 = l.gen_by_name("x2").unwrap();
    let x12 = l.bracket(&x1, &x2);
    // θ: x2 ↦ [x1,x2], degree 1, vanishing on M = ⟨x1⟩
    let mut th = t.zero(1);
    th.der.values[1] = x12.clone();
    let x = TElem { l: x2.clone(), ..t.zero(3) };
    let b = t.bracket(&th, &x).unwrap();
    let expect = TElem { l: x12.clone(), ..t.zero(4) };
    assert_eq!(t.coords(&b).unwrap(), t.coords(&expect).unwrap());
    // and [x, θ] = −(−1)^{3·1} θ(x) = θ(x)
    let b2 = t.bracket(&x, &th).unwrap();
    assert_eq!(t.coords(&b2).unwrap(), t.coords(&expect).unwrap());
}

#[test]
fn products_reject_bad_shapes() {
    let c = ctx("cp2");
    assert!(c.cone_l().unwrap().bracket(&c.cone_l().unwrap().zero(0), &c.cone_l().unwrap().zero(0)).is_err());
    let bad = TwistedProduct::build("bad", Rule::Section, Some(c.l.clone()), None, Some(c.der_relative()), None, None);
    assert!(bad.is_err());
    let bad = TwistedProduct::build("bad", Rule::ClassifyingConv, None, Some(c.hom_m(Variant::Reduced).unwrap()), Some(c.der_full()), Some(c.l.clone()), None);
    assert!(bad.is_err());
}

#[test]
fn fibration_models_on_all_fixtures() {
    for name in SHIPPED {
        let c = ctx(name);
        let m = build_fibration_model(&c, GCondition::Full).unwrap();
        let cert = verify_fibration(&m, w(-1, 5)).unwrap();
        assert!(cert.short_exact, "{name}: {:?}", cert.degrees);
        assert!(cert.surjective_nonnegative && cert.section_injective && cert.section_property, "{name}");
        assert!(cert.maps.iter().all(|m| m.chain_map && m.bracket_map == Some(true)), "{name}: {:?}", cert.maps);
        assert!(cert.classifying.iter().all(|m| m.chain_map), "{name}");
        assert!(cert.classifying_injective, "{name}");
        assert!(cert.pass());
    }
}

#[test]
fn fibration_base_is_connected() {
    let c = ctx("cp2");
    let m = build_fibration_model(&c, GCondition::Full).unwrap();
    assert_eq!(m.base.dim(-1), 0);
    assert!(m.base.dim(0) <= c.der_relative().dim(0));
    let _ = Arc::clone(&m.total);
}
