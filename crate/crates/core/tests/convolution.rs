mod common;

use std::sync::Arc;

use cdgl::convolution::*;
use cdgl::derivations::declared_inclusion;
use cdgl::error::Error;
use cdgl::fixtures::fixture;
use cdgl::free_lie::{FreeLie, LieElem, Morphism};
use cdgl::graded::complex::DegreeWindow;
use cdgl::graded::scalar::{q, qf, sign, Q};
use cdgl::graded::SVec;
use common::*;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const MODELS: [&str; 8] = ["disk1", "disk2", "disk3", "sphere2", "sphere3", "cp2", "cp3", "wedge"];

fn coalg(l: &Arc<FreeLie>) -> Arc<CoalgebraBasis> {
    CoalgebraBasis::new(l, l.pres.wedge, l.pres.window.max).unwrap()
}

fn random_conv(alg: &ConvAlgebra, k: i64, r: &mut ChaCha8Rng, terms: usize) -> ConvElem {
    let basis = alg.slot_basis(k);
    let mut c = SVec::new();
    if !basis.is_empty() {
        for _ in 0..r.gen_range(1..=terms) {
            c.add_term(r.gen_range(0..basis.len()), small_q(r));
        }
    }
    alg.from_coords(k, &c)
}

#[test]
fn coalgebra_is_a_dg_coalgebra() {
    for name in MODELS {
        let l = fixture(name).unwrap();
        let c = coalg(&l);
        for w in 0..c.len() {
            // d² = 0
            let mut dd = SVec::new();
            for (w2, x) in c.differential(w).iter() {
                dd.add_scaled(c.differential(*w2), x);
            }
            assert!(dd.is_zero(), "{name}: d² ≠ 0 on {}", c.label(w));
            // Δd = (d⊗1 + 1⊗d)Δ
            let mut lhs: SVec<(usize, usize)> = SVec::new();
            for (w2, x) in c.differential(w).iter() {
                for (a, b, s) in c.diagonal(*w2) {
                    lhs.add_term((*a, *b), x * s);
                }
            }
            let mut rhs: SVec<(usize, usize)> = SVec::new();
            for (a, b, s) in c.diagonal(w) {
                for (a2, x) in c.differential(*a).iter() {
                    rhs.add_term((*a2, *b), s * x);
                }
                for (b2, x) in c.differential(*b).iter() {
                    rhs.add_term((*a, *b2), s * x * sign(c.word_degree[*a]));
                }
            }
            assert_eq!(lhs, rhs, "{name}: d is not a coderivation on {}", c.label(w));
            // coassociativity
            let mut left: SVec<(usize, usize, usize)> = SVec::new();
            let mut right: SVec<(usize, usize, usize)> = SVec::new();
            for (a, b, s) in c.diagonal(w) {
                for (a1, a2, t) in c.diagonal(*a) {
                    left.add_term((*a1, *a2, *b), s * t);
                }
                for (b1, b2, t) in c.diagonal(*b) {
                    right.add_term((*a, *b1, *b2), s * t);
                }
            }
            assert_eq!(left, right);
        }
    }
    assert!(matches!(CoalgebraBasis::new(&fixture("gauge").unwrap(), 3, 4), Err(Error::Degree(_))));
}

#[test]
fn coalgebra_examples() {
    let s3 = fixture("sphere3").unwrap();
    let c = coalg(&s3);
    assert_eq!(c.len(), 2);
    assert!(c.differential(1).is_zero());

    // d₂(sx∧sy) = (−1)^{|x|} s[x,y]
    for name in ["disk1", "disk2", "disk3"] {
        let l = fixture(name).unwrap();
        let c = coalg(&l);
        let (x, y) = (l.generator(0), l.generator(1));
        let (ex, ey) = (c.elem_of_generator(0).unwrap(), c.elem_of_generator(1).unwrap());
        let Some((w, s)) = c.product(vec![ex, ey]) else { continue };
        let mut expect = SVec::new();
        // d₁ part: −s dx ∧ sy ± sx ∧ (−s dy)
        let dy = c.suspend(&l.differential(&y));
        for (e, v) in dy.iter() {
            if let Some((w2, t)) = c.product(vec![ex, *e]) {
                expect.add_term(w2, -v * t * sign(c.sdeg(ex)));
            }
        }
        let sxy = c.suspend(&l.bracket(&x, &y));
        for (e, v) in sxy.iter() {
            expect.add_term(c.word_index(&[*e]).unwrap(), v * sign(x.degree));
        }
        assert_eq!(c.differential(w).scaled(&s), expect, "{name}");
    }

    let cp2 = fixture("cp2").unwrap();
    let c = coalg(&cp2);
    let (x1, x2) = (cp2.generator(0), cp2.generator(1));
    let e2 = c.elem_of_generator(1).unwrap();
    let w2 = c.word_index(&[e2]).unwrap();
    let mut expect = SVec::new();
    for (e, v) in c.suspend(&cp2.bracket(&x1, &x1)).iter() {
        expect.add_term(c.word_index(&[*e]).unwrap(), -v * qf(1, 2));
    }
    assert_eq!(c.differential(w2), &expect);
    let _ = x2;
}

#[test]
fn bracket_examples() {
    let l = fixture("cp2").unwrap();
    let c = coalg(&l);
    let alg = ConvAlgebra::new(&c, &l, Variant::Full).unwrap();
    let (x1, x2) = (l.generator(0), l.generator(1));
    let b = alg.bracket(&alg.constant(&x1), &alg.constant(&x2));
    assert_eq!(b, alg.constant(&l.bracket(&x1, &x2)));
    // [x, f] = ad_x ∘ f
    let mut r = rng(31);
    for _ in 0..30 {
        let x = random_elem(&l, r.gen_range(1..=4), &mut r, 2);
        let f = random_conv(&ConvAlgebra::new(&c, &l, Variant::Reduced).unwrap(), r.gen_range(-1..=2), &mut r, 3);
        let lhs = alg.bracket(&alg.constant(&x), &f);
        let mut rhs = ConvElem::zero(x.degree + f.degree);
        for (w, v) in &f.values {
            rhs.add_value(*w, &l.bracket(&x, v), &q(1));
        }
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn bracket_is_graded_lie() {
    let mut r = rng(32);
    for name in ["cp2", "disk1", "wedge"] {
        let l = fixture(name).unwrap();
        let c = coalg(&l);
        for variant in [Variant::Full, Variant::Reduced, Variant::HomM, Variant::HomCbarM] {
            let alg = ConvAlgebra::new(&c, &l, variant).unwrap();
            for _ in 0..25 {
                let (i, j, k) = (r.gen_range(-1..=1), r.gen_range(-1..=1), r.gen_range(-1..=1));
                let f = random_conv(&alg, i, &mut r, 3);
                let g = random_conv(&alg, j, &mut r, 3);
                let h = random_conv(&alg, k, &mut r, 3);
                let fg = alg.bracket(&f, &g);
                assert_eq!(fg, alg.bracket(&g, &f).scaled(&-sign(i * j)));
                assert!(alg.respects_variant(&fg), "{name} {variant:?}");
                // [f,[g,h]] = [[f,g],h] + (−1)^{|f||g|}[g,[f,h]]
                let lhs = alg.bracket(&f, &alg.bracket(&g, &h));
                let rhs = alg.bracket(&fg, &h).plus(&alg.bracket(&g, &alg.bracket(&f, &h)).scaled(&sign(i * j)));
                assert_eq!(lhs, rhs);
                // D is a derivation of the bracket
                let d_fg = alg.differential(&fg);
                let leib = alg.bracket(&alg.differential(&f), &g).plus(&alg.bracket(&f, &alg.differential(&g)).scaled(&sign(i)));
                assert_eq!(d_fg, leib);
                assert!(alg.differential(&alg.differential(&f)).is_zero());
                assert!(alg.respects_variant(&alg.differential(&f)));
            }
        }
    }
}

#[test]
fn relative_bracket_vanishes_on_sub_words() {
    let l = fixture("disk1").unwrap();
    let c = coalg(&l);
    let alg = ConvAlgebra::new(&c, &l, Variant::HomM).unwrap();
    let mut r = rng(33);
    for _ in 0..30 {
        let f = random_conv(&alg, r.gen_range(-1..=1), &mut r, 4);
        let g = random_conv(&alg, r.gen_range(-1..=1), &mut r, 4);
        let b = alg.bracket(&f, &g);
        for w in 0..c.len() {
            if c.in_sub(w) {
                assert!(b.get(w).map_or(true, |v| v.is_zero()));
            }
        }
    }
}

#[test]
fn differential_by_hand() {
    let l = fixture("disk1").unwrap();
    let c = coalg(&l);
    let alg = ConvAlgebra::new(&c, &l, Variant::Full).unwrap();
    assert!(alg.differential(&ConvElem::zero(0)).is_zero());
    let (x, y) = (l.generator(0), l.generator(1));
    let wx = c.word_index(&[c.elem_of_generator(0).unwrap()]).unwrap();
    let wy = c.word_index(&[c.elem_of_generator(1).unwrap()]).unwrap();
    let mut f = ConvElem::zero(0);
    f.add_value(wx, &y, &q(1));
    let mut expect = ConvElem::zero(-1);
    expect.add_value(wx, &x, &q(1));
    expect.add_value(wy, &y, &q(1));
    assert_eq!(alg.differential(&f), expect);
}

#[test]
fn morphisms_give_mc_elements() {
    for name in MODELS {
        let l = fixture(name).unwrap();
        let c = coalg(&l);
        let alg = ConvAlgebra::new(&c, &l, Variant::Full).unwrap();
        let qe = q_map(&c);
        assert!(alg.mc_residual(&qe).is_zero(), "{name}: q is not MC");
        assert_eq!(morphism_to_mc(&c, &Morphism::identity(&l)).unwrap(), qe);
        let z = morphism_to_mc(&c, &Morphism::zero(&l, &l)).unwrap();
        assert!(z.is_zero());
        let pert = alg.perturbed(&qe).unwrap();
        let mut r = rng(34);
        for _ in 0..10 {
            let f = random_conv(&pert, r.gen_range(-1..=2), &mut r, 3);
            assert!(pert.differential(&pert.differential(&f)).is_zero(), "{name}");
        }
        if l.sub_generators().is_some() {
            let inc = declared_inclusion(&l).unwrap();
            let cm = coalg(&inc.sub);
            let jq = morphism_to_mc(&cm, &inc.inclusion).unwrap();
            let alg_m = ConvAlgebra::new(&cm, &l, Variant::Full).unwrap();
            assert!(alg_m.mc_residual(&jq).is_zero(), "{name}: jq is not MC");
            let pert = alg_m.perturbed(&jq).unwrap();
            for _ in 0..10 {
                let f = random_conv(&pert, r.gen_range(-1..=2), &mut r, 3);
                assert!(pert.differential(&pert.differential(&f)).is_zero());
            }
        }
    }
    let cp2 = fixture("cp2").unwrap();
    let c = coalg(&cp2);
    let bad = Morphism::new(cp2.clone(), cp2.clone(), vec![cp2.generator(0), LieElem::zero(3)]).unwrap();
    assert!(matches!(morphism_to_mc(&c, &bad), Err(Error::NotAMorphism(_))));
}

#[test]
fn relative_morphism_dictionary() {
    let l = fixture("disk1").unwrap();
    let c = coalg(&l);
    let id = Morphism::identity(&l);
    let alg = ConvAlgebra::new(&c, &l, Variant::HomM).unwrap().perturbed(&q_map(&c)).unwrap();
    assert_eq!(mc_to_relative_morphism_set(&alg, &id, &ConvElem::zero(-1)).unwrap().images, id.images);
    let (x, y) = (l.generator(0), l.generator(1));
    let mut r = rng(35);
    for _ in 0..20 {
        let mut gy = y.clone();
        for i in 1..l.n() {
            gy.add_scaled(&l.ad_power(&x, i, &y), &small_q(&mut r));
        }
        let gamma = Morphism::new(l.clone(), l.clone(), vec![x.clone(), gy]).unwrap();
        let a = morphism_to_mc(&c, &gamma).unwrap().minus(&q_map(&c));
        assert!(alg.respects_variant(&a));
        assert!(alg.mc_residual(&a).is_zero());
        let back = mc_to_relative_morphism_set(&alg, &id, &a).unwrap();
        assert_eq!(back.images, gamma.images);
        assert_eq!(morphism_to_mc(&c, &back).unwrap().minus(&q_map(&c)), a);
    }
    let junk = random_conv(&alg, -1, &mut r, 4);
    assert!(matches!(mc_to_relative_morphism_set(&alg, &id, &junk), Err(Error::ResidualNonzero)));
}

#[test]
fn restriction_is_exact() {
    for name in ["disk1", "disk2", "cp2", "cp3", "wedge"] {
        let l = fixture(name).unwrap();
        let c = coalg(&l);
        let inc = declared_inclusion(&l).unwrap();
        let data = RestrictionData::new(&inc, &c, &l).unwrap();
        let seq = restriction_sequence(&data, DegreeWindow::new(-1, 3).unwrap()).unwrap();
        assert!(seq.exact, "{name}: {seq:?}");
        // q restricts to jq
        let jq = morphism_to_mc(&data.sub_coalg, &inc.inclusion).unwrap();
        assert_eq!(data.restrict(&q_map(&c)), jq);
    }
}

#[test]
fn coordinates_and_variants() {
    let l = fixture("cp2").unwrap();
    let c = coalg(&l);
    let full = ConvAlgebra::new(&c, &l, Variant::Full).unwrap();
    let rel = ConvAlgebra::new(&c, &l, Variant::HomM).unwrap();
    let mut r = rng(36);
    for _ in 0..20 {
        let k = r.gen_range(-1..=2);
        let f = random_conv(&full, k, &mut r, 4);
        assert_eq!(full.from_coords(k, &full.coords(&f).unwrap()), f);
    }
    let one = full.constant(&l.generator(0));
    assert!(matches!(rel.coords(&one), Err(Error::VariantMismatch)));
    let (x, rest) = full.split(&one);
    assert_eq!(x, l.generator(0));
    assert!(rest.is_zero());
    assert!(Q::zero().is_zero());
}
