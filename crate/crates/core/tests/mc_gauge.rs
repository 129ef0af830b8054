mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use cdgl::derivations::{DerSpace, Derivation};
use cdgl::dsl::Overrides;
use cdgl::error::Error;
use cdgl::fixtures::{fixture, fixture_with};
use cdgl::free_lie::{FreeLie, LieElem};
use cdgl::graded::scalar::{q, qf};
use cdgl::mc_gauge::*;
use common::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn gauge() -> Arc<FreeLie> {
    fixture("gauge").unwrap()
}

fn random_mc(l: &FreeLie, r: &mut ChaCha8Rng) -> MCElement {
    let base = if r.gen_bool(0.5) { MCElement::zero() } else { MCElement::new(l, l.gen_by_name("w").unwrap()).unwrap() };
    let x = random_elem(l, 0, r, 3);
    gauge_act(l, &x, &base).unwrap()
}

#[test]
fn residual_examples() {
    let l = gauge();
    assert!(mc_residual(&l, &LieElem::zero(-1)).unwrap().is_zero());
    assert!(mc_residual(&l, &l.gen_by_name("w").unwrap()).unwrap().is_zero());
    let u1 = l.gen_by_name("u1").unwrap();
    assert!(!mc_residual(&l, &u1).unwrap().is_zero());
    assert!(matches!(MCElement::new(&l, u1), Err(Error::ResidualNonzero)));
    assert!(matches!(mc_residual(&l, &l.gen_by_name("x1").unwrap()), Err(Error::Degree(_))));
}

#[test]
fn gauge_examples() {
    let l = gauge();
    let w = MCElement::new(&l, l.gen_by_name("w").unwrap()).unwrap();
    assert_eq!(gauge_act(&l, &LieElem::zero(0), &w).unwrap(), w);
    // a cycle of degree 0 acts by e^{ad_x}
    let dl = fixture("sphere3").unwrap();
    assert_eq!(dl.dim(0), 0);
    assert!(matches!(gauge_act(&l, &l.gen_by_name("u1").unwrap(), &w), Err(Error::Degree(_))));

    // length-2 expansion
    let o = Overrides { truncate: Some(2), wedge: Some(2), ..Default::default() };
    let l2 = fixture_with("gauge", &o).unwrap();
    let mut r = rng(7);
    for _ in 0..50 {
        let x = random_elem(&l2, 0, &mut r, 3);
        let a = MCElement::new(&l2, l2.gen_by_name("w").unwrap()).unwrap();
        let dx = l2.differential(&x);
        let mut expect = a.value.plus(&l2.bracket(&x, &a.value)).minus(&dx);
        expect.add_scaled(&l2.bracket(&x, &dx), &-qf(1, 2));
        assert_eq!(gauge_act(&l2, &x, &a).unwrap().value, expect);
    }
}

#[test]
fn gauge_preserves_mc() {
    let l = gauge();
    let mut r = rng(11);
    for _ in 0..120 {
        let a = random_mc(&l, &mut r);
        assert!(a.residual.is_zero());
        let x = random_elem(&l, 0, &mut r, 4);
        let b = gauge_act(&l, &x, &a).unwrap();
        assert!(mc_residual(&l, &b.value).unwrap().is_zero());
    }
}

#[test]
fn action_property() {
    let l = gauge();
    let mut r = rng(12);
    for _ in 0..120 {
        let a = random_mc(&l, &mut r);
        let x = random_elem(&l, 0, &mut r, 3);
        let y = random_elem(&l, 0, &mut r, 3);
        let lhs = gauge_act(&l, &y, &gauge_act(&l, &x, &a).unwrap()).unwrap();
        let rhs = gauge_act(&l, &bch(&l, &y, &x).unwrap(), &a).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn bch_examples_and_oracle() {
    let l = gauge();
    let x1 = l.gen_by_name("x1").unwrap();
    let x2 = l.gen_by_name("x2").unwrap();
    assert_eq!(bch(&l, &x1, &LieElem::zero(0)).unwrap(), x1);
    assert_eq!(bch(&l, &x1, &x1.scaled(&q(3))).unwrap(), x1.scaled(&q(4)));
    let z = bch(&l, &x1, &x2).unwrap();
    let mut low = x1.plus(&x2);
    low.add_scaled(&l.bracket(&x1, &x2), &qf(1, 2));
    assert_eq!(z.lcs_component(1).plus(&z.lcs_component(2)), low);
    let mut r = rng(13);
    for fx in ["gauge", "disk1"] {
        let l = fixture(fx).unwrap();
        for _ in 0..100 {
            let x = random_elem(&l, 0, &mut r, 3);
            let y = random_elem(&l, 0, &mut r, 3);
            assert_eq!(bch(&l, &x, &y).unwrap(), tensor_bch(&l, &x, &y));
        }
    }
}

#[test]
fn bch_associative_with_unit() {
    let l = gauge();
    let mut r = rng(14);
    let zero = LieElem::zero(0);
    for _ in 0..120 {
        let x = random_elem(&l, 0, &mut r, 3);
        let y = random_elem(&l, 0, &mut r, 3);
        let z = random_elem(&l, 0, &mut r, 3);
        assert_eq!(bch(&l, &zero, &x).unwrap(), x);
        let a = bch(&l, &bch(&l, &x, &y).unwrap(), &z).unwrap();
        let b = bch(&l, &x, &bch(&l, &y, &z).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn witness_round_trip() {
    let l = gauge();
    let mut r = rng(15);
    for _ in 0..100 {
        let a = random_mc(&l, &mut r);
        let x = random_elem(&l, 0, &mut r, 3);
        let b = gauge_act(&l, &x, &a).unwrap();
        let found = find_gauge_witness(&l, &a, &b, l.n()).unwrap();
        let w = found.witness().expect("orbit element without witness");
        assert_eq!(gauge_act(&l, w, &a).unwrap(), b);
    }
    let w = MCElement::new(&l, l.gen_by_name("w").unwrap()).unwrap();
    assert_eq!(find_gauge_witness(&l, &w, &w, 5).unwrap().witness(), Some(&LieElem::zero(0)));
    match find_gauge_witness(&l, &w, &MCElement::zero(), 5).unwrap() {
        GaugeSearch::NotEquivalentAt { stage, truncation, .. } => {
            assert_eq!(stage, 1);
            assert_eq!(truncation, 5);
        }
        _ => panic!("w and 0 have distinct length-1 classes"),
    }
}

#[test]
fn perturbed_differential_squares_to_zero() {
    let l = gauge();
    let mut r = rng(16);
    for _ in 0..100 {
        let a = random_mc(&l, &mut r);
        let pd = PerturbedDifferential::new(&l, &a);
        let deg = r.gen_range(-1..=2);
        let y = random_elem(&l, deg, &mut r, 3);
        assert!(pd.apply(&pd.apply(&y)).is_zero());
    }
    let a = random_mc(&l, &mut r);
    let c = component_dgl(&l, &a);
    let cc = c.chain_complex(2).unwrap();
    assert_eq!(cc.square_zero_failure(), None);
    for z in &c.zero_cycles {
        assert!(c.contains(&l.from_coords(0, z)));
    }
    // zero on a connected model: the non-negative truncation
    let cp2 = fixture("cp2").unwrap();
    let c0 = component_dgl(&cp2, &MCElement::zero());
    assert_eq!(c0.zero_cycles.len(), cp2.dim(0));
    let cc = c0.chain_complex(4).unwrap();
    for k in 1..=4 {
        assert_eq!(cc.dim(k), cp2.dim(k));
    }
}

fn random_der(space: &DerSpace, r: &mut ChaCha8Rng) -> Derivation {
    let l = space.target();
    let mut vals = BTreeMap::new();
    for g in space.slots() {
        vals.insert(g, random_elem_min_len(l, l.gen_degree(g), 2, r, 2));
    }
    space.from_values(0, vals).unwrap()
}

#[test]
fn exponential_examples() {
    let disk = fixture("disk1").unwrap();
    let space = DerSpace::full(&disk);
    let id = exp_aut(&space, &Derivation::zero(&space, 0)).unwrap();
    assert!(id.is_identity());
    let (x, y) = (disk.generator(0), disk.generator(1));
    let a1 = qf(3, 2);
    let mut vals = BTreeMap::new();
    vals.insert(1, disk.bracket(&x, &y).scaled(&a1));
    let th = space.from_values(0, vals).unwrap();
    let e = exp_aut(&space, &th).unwrap();
    let mut expect = y.clone();
    let mut coef = q(1);
    for k in 1..disk.n() {
        coef = &coef * &a1 / q(k as i64);
        expect.add_scaled(&disk.ad_power(&x, k, &y), &coef);
    }
    assert_eq!(e.images[1], expect);
    assert_eq!(e.images[0], x);
}

#[test]
fn exponential_of_bch() {
    let mut r = rng(17);
    for fx in ["cp2", "gauge", "wedge"] {
        let l = fixture(fx).unwrap();
        let space = DerSpace::full(&l);
        for _ in 0..40 {
            let th = random_der(&space, &mut r);
            let eta = random_der(&space, &mut r);
            let lhs = compose(&exp_aut(&space, &th).unwrap(), &exp_aut(&space, &eta).unwrap()).unwrap();
            let rhs = exp_aut(&space, &bch_derivations(&space, &th, &eta).unwrap()).unwrap();
            assert_eq!(lhs.images, rhs.images, "{fx}");
        }
    }
    // inner automorphisms compose by BCH
    let l = gauge();
    for _ in 0..20 {
        let x = random_elem(&l, 0, &mut r, 2);
        let y = random_elem(&l, 0, &mut r, 2);
        let lhs = compose(&exp_ad(&l, &x).unwrap(), &exp_ad(&l, &y).unwrap()).unwrap();
        let rhs = exp_ad(&l, &bch(&l, &x, &y).unwrap()).unwrap();
        assert_eq!(lhs.images, rhs.images);
    }
}
