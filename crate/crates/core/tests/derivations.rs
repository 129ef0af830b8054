mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use cdgl::derivations::*;
use cdgl::dsl::{parse_model, Overrides};
use cdgl::error::Error;
use cdgl::fixtures::{fixture, SHIPPED};
use cdgl::free_lie::{FreeLie, LieElem};
use cdgl::graded::complex::homology;
use cdgl::graded::scalar::{q, qf, sign};
use cdgl::graded::SVec;
use common::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn model(text: &str) -> Arc<FreeLie> {
    parse_model(text).unwrap().build(&Overrides::default()).unwrap()
}

fn random_der(space: &DerSpace, k: i64, r: &mut ChaCha8Rng) -> Derivation {
    let mut vals = BTreeMap::new();
    for g in space.slots() {
        let d = space.source().gen_degree(g) + k;
        vals.insert(g, random_elem(space.target(), d, r, 2));
    }
    space.from_values(k, vals).unwrap()
}

#[test]
fn apply_examples() {
    let disk = fixture("disk1").unwrap();
    let space = DerSpace::full(&disk);
    let (x, y) = (disk.generator(0), disk.generator(1));
    let xy = disk.bracket(&x, &y);
    let mut vals = BTreeMap::new();
    vals.insert(1, xy.clone());
    let th = space.from_values(0, vals).unwrap();
    assert_eq!(space.apply(&th, &xy), disk.bracket(&x, &xy));
    assert!(space.apply(&Derivation::zero(&space, 0), &xy).is_zero());
    let mut r = rng(21);
    for name in SHIPPED {
        let l = fixture(name).unwrap();
        let space = DerSpace::full(&l);
        for _ in 0..20 {
            let dx = *nonzero_degrees(&l).first().unwrap();
            let x = random_elem(&l, dx, &mut r, 2);
            let da = nonzero_degrees(&l)[r.gen_range(0..nonzero_degrees(&l).len())];
            let a = random_elem(&l, da, &mut r, 2);
            assert_eq!(space.apply(&space.adjoint(&x), &a), l.bracket(&x, &a));
        }
    }
}

#[test]
fn leibniz_and_bracket() {
    let mut r = rng(22);
    for name in ["cp2", "wedge", "gauge", "disk2"] {
        let l = fixture(name).unwrap();
        let space = DerSpace::full(&l);
        let degs = nonzero_degrees(&l);
        for _ in 0..40 {
            let k1 = r.gen_range(-1..=2);
            let k2 = r.gen_range(-1..=2);
            let th = random_der(&space, k1, &mut r);
            let eta = random_der(&space, k2, &mut r);
            let a = random_elem(&l, degs[r.gen_range(0..degs.len())], &mut r, 2);
            let b = random_elem(&l, degs[r.gen_range(0..degs.len())], &mut r, 2);
            let ab = l.bracket(&a, &b);
            // θ[a,b] = [θa,b] + (−1)^{|θ||a|}[a,θb]
            let mut rhs = l.bracket(&space.apply(&th, &a), &b);
            rhs.add_scaled(&l.bracket(&a, &space.apply(&th, &b)), &sign(k1 * a.degree));
            assert_eq!(space.apply(&th, &ab).terms, rhs.terms);
            // the bracket of derivations is the commutator on every element
            let br = space.bracket(&th, &eta);
            let mut comm = space.apply(&th, &space.apply(&eta, &ab));
            comm.add_scaled(&space.apply(&eta, &space.apply(&th, &ab)), &-sign(k1 * k2));
            assert_eq!(space.apply(&br, &ab).terms, comm.terms);
        }
    }
}

#[test]
fn differential_examples() {
    let disk = fixture("disk1").unwrap();
    let inc = declared_inclusion(&disk).unwrap();
    let space = DerSpace::relative(&inc);
    let (x, y) = (disk.generator(0), disk.generator(1));
    let bs = [qf(1, 3), q(2), qf(-5, 7), q(1), qf(1, 2)];
    let mut eta_y = LieElem::zero(2);
    let mut expect = disk.bracket(&x, &y).scaled(&(q(2) * &bs[0]));
    for (i, b) in bs.iter().enumerate() {
        eta_y.add_scaled(&disk.bracket(&y, &disk.ad_power(&x, i, &y)), b);
        if i >= 1 {
            expect.add_scaled(&disk.ad_power(&x, i + 1, &y), b);
        }
    }
    let mut vals = BTreeMap::new();
    vals.insert(1, eta_y);
    let eta = space.from_values(1, vals).unwrap();
    let d_eta = space.differential(&eta);
    assert_eq!(d_eta.values[1].terms, expect.terms);
    assert!(d_eta.values[0].is_zero());

    let mut r = rng(23);
    for name in SHIPPED.iter().chain(["gauge"].iter()) {
        let l = fixture(name).unwrap();
        let space = DerSpace::full(&l);
        for _ in 0..20 {
            let degs = nonzero_degrees(&l);
            let x = random_elem(&l, degs[r.gen_range(0..degs.len())], &mut r, 2);
            let lhs = space.differential(&space.adjoint(&x));
            let rhs = space.adjoint(&l.differential(&x));
            assert_eq!(lhs.values.iter().map(|v| &v.terms).collect::<Vec<_>>(), rhs.values.iter().map(|v| &v.terms).collect::<Vec<_>>());
            let th = random_der(&space, r.gen_range(-1..=3), &mut r);
            assert!(space.differential(&space.differential(&th)).is_zero());
        }
    }
}

#[test]
fn relative_adjoint_examples() {
    let disk = fixture("disk1").unwrap();
    let inc = declared_inclusion(&disk).unwrap();
    let (x, y) = (disk.generator(0), disk.generator(1));
    let ad = relative_adjoint(&inc, &x);
    assert!(ad.values[0].is_zero());
    assert_eq!(ad.values[1], disk.bracket(&x, &y));
    let cp3 = fixture("cp3").unwrap();
    let inc = declared_inclusion(&cp3).unwrap();
    let ad = relative_adjoint(&inc, &cp3.generator(1));
    assert!(ad.values[0].is_zero() && ad.values[1].is_zero());
    assert_eq!(ad.values[2], cp3.bracket(&cp3.generator(1), &cp3.generator(2)));
}

#[test]
fn complexes_square_to_zero() {
    for name in SHIPPED {
        let l = fixture(name).unwrap();
        for kind in [DerKind::Der, DerKind::DerRelative, DerKind::DerAlong, DerKind::CalDer, DerKind::CalDerRelative] {
            let c = build_derivation_complex(&l, kind, None).unwrap();
            assert_eq!(c.complex.square_zero_failure(), None, "{name} {kind:?}");
            if kind.is_cal() {
                // only the non-minimal disks can leave the condition
                assert_eq!(c.closed, l.is_minimal() || kind == DerKind::CalDerRelative, "{name} {kind:?}");
                assert_eq!(degree_zero_bracket_closure(&c), None, "{name} {kind:?}");
            }
        }
    }
}

#[test]
fn build_examples() {
    let disk = fixture("disk1").unwrap();
    let c = build_derivation_complex(&disk, DerKind::DerRelative, None).unwrap();
    for k in -1..=6 {
        assert_eq!(c.dim(k), disk.dim(k + 1));
    }
    let even = model("generator x : 2\nwindow -2..4");
    let c = build_derivation_complex(&even, DerKind::Der, None).unwrap();
    assert_eq!(c.dim(0), 1);
    let euler = c.basis_derivation(0, 0);
    assert_eq!(euler.values[0], even.generator(0));
    assert!(matches!(build_derivation_complex(&even, DerKind::CalDer, None), Err(Error::MissingFiltration)));

    // trivial filtration on the disk: every degree-0 D-cycle vanishing on x
    let c = build_derivation_complex(&disk, DerKind::CalDerRelative, None).unwrap();
    let all = build_derivation_complex(&disk, DerKind::DerRelative, None).unwrap();
    let h = homology(&all.complex, 0).unwrap();
    assert_eq!(c.dim(0), h.cycles.len());
    for i in 0..c.dim(0) {
        let th = c.basis_derivation(0, i);
        assert!(th.values[0].is_zero());
        assert!(c.space.differential(&th).is_zero());
    }
}

#[test]
fn psi_is_a_chain_isomorphism() {
    for name in ["disk1", "disk2", "disk3", "cp2", "cp3", "wedge"] {
        let l = fixture(name).unwrap();
        let shape = CellShape::new(&declared_inclusion(&l).unwrap()).unwrap();
        let cert = psi_iso(&shape, l.pres.window);
        assert!(cert.bijective && cert.chain_map, "{name}");
    }
    let disk = fixture("disk1").unwrap();
    let shape = CellShape::new(&declared_inclusion(&disk).unwrap()).unwrap();
    assert_eq!(shape.n, 1);
    let space = DerSpace::relative(&shape.inc);
    assert!(psi(&shape, &Derivation::zero(&space, 2)).is_zero());
    let two = model("generator a : 1\ngenerator b : 1\nsub M = { }");
    assert!(matches!(CellShape::new(&declared_inclusion(&two).unwrap()), Err(Error::Shape(_))));

    // ℂP²: H_1(Der^M L) and H_4(L) computed independently
    let cp2 = fixture("cp2").unwrap();
    let c = build_derivation_complex(&cp2, DerKind::DerRelative, None).unwrap();
    let lhs = homology(&c.complex, 1).unwrap().betti;
    let lc = cdgl::graded::complex::ChainComplex::build(
        cp2.pres.window,
        cp2.pres.window.degrees().map(|d| (d, cp2.basis(d).map(|b| b.labels.clone()).unwrap_or_default())).collect(),
        |d, i| cp2.coords_or_panic(&cp2.differential(cp2.basis_elem(d, i))),
    );
    assert_eq!(homology(&lc, 4).unwrap().betti, 1);
    assert_eq!(lhs, 1);
}

#[test]
fn homology_examples() {
    let disk = fixture("disk1").unwrap();
    let c = build_derivation_complex(&disk, DerKind::CalDerRelative, None).unwrap();
    for k in 0..=3 {
        assert_eq!(der_homology(&c, k).unwrap().homology.betti, 0, "degree {k}");
    }
    let cp2 = fixture("cp2").unwrap();
    let c = build_derivation_complex(&cp2, DerKind::CalDerRelative, None).unwrap();
    assert_eq!(der_homology(&c, 1).unwrap().homology.betti, 1);
    let h0 = der_homology(&c, 0).unwrap();
    assert_eq!(h0.h0_algebra.unwrap().dim, h0.homology.betti);
    // zero differential
    let s3 = fixture("sphere3").unwrap();
    let c = build_derivation_complex(&s3, DerKind::Der, None).unwrap();
    for k in 0..=4 {
        assert_eq!(der_homology(&c, k).unwrap().homology.betti, c.dim(k));
    }
    assert!(matches!(der_homology(&c, 8), Err(Error::WindowTooNarrow { .. })));
}

#[test]
fn h0_group_of_wedge() {
    // relative derivations of S² ∨ S³ rel S²: H₀ carries a BCH group
    let l = fixture("wedge").unwrap();
    let c = build_derivation_complex(&l, DerKind::CalDerRelative, Some(GCondition::Gamma)).unwrap();
    let h = der_homology(&c, 0).unwrap();
    let alg = h.h0_algebra.unwrap();
    assert!(alg.nilpotency_class().is_ok());
}

#[test]
fn disk_primitive_coefficients() {
    let disk = fixture("disk1").unwrap();
    let inc = declared_inclusion(&disk).unwrap();
    let space = DerSpace::relative(&inc);
    let (x, y) = (disk.generator(0), disk.generator(1));
    let ansatz: Vec<Derivation> = (0..5)
        .map(|i| {
            let mut v = BTreeMap::new();
            v.insert(1, disk.bracket(&y, &disk.ad_power(&x, i, &y)));
            space.from_values(1, v).unwrap()
        })
        .collect();
    let mut r = rng(24);
    for _ in 0..30 {
        let a: Vec<_> = (1..=5).map(|_| small_q(&mut r)).collect();
        let mut ty = LieElem::zero(1);
        for (i, ai) in a.iter().enumerate() {
            ty.add_scaled(&disk.ad_power(&x, i + 1, &y), ai);
        }
        let mut v = BTreeMap::new();
        v.insert(1, ty);
        let th = space.from_values(0, v).unwrap();
        let eta = solve_primitive(&space, &th, &ansatz).unwrap().unwrap();
        assert_eq!(space.differential(&eta), th);
        let b = ansatz_coefficients(&space, &eta, &ansatz).unwrap();
        assert_eq!(b[0], &a[0] / q(2));
        for i in 1..5 {
            assert_eq!(b[i], a[i]);
        }
    }
    let z = solve_primitive(&space, &Derivation::zero(&space, 0), &ansatz).unwrap().unwrap();
    assert!(z.is_zero());

    let cp2 = fixture("cp2").unwrap();
    let space = DerSpace::full(&cp2);
    let mut v = BTreeMap::new();
    v.insert(1, cp2.generator(1).scaled(&q(3)));
    let th = space.from_values(0, v).unwrap();
    assert!(matches!(solve_primitive(&space, &th, &[]), Err(Error::Certificate(_))));
}

#[test]
fn primitive_round_trip() {
    let mut r = rng(25);
    for name in ["cp2", "disk2", "wedge"] {
        let l = fixture(name).unwrap();
        let c = build_derivation_complex(&l, DerKind::DerRelative, None).unwrap();
        for _ in 0..20 {
            let k = r.gen_range(0..=3);
            let eta = random_der(&c.space, k + 1, &mut r);
            let th = c.space.differential(&eta);
            let p = solve_primitive(&c.space, &th, &[]).unwrap().expect("boundary without primitive");
            assert_eq!(c.space.differential(&p), th);
        }
    }
}

#[test]
fn coordinates_round_trip() {
    let mut r = rng(26);
    let l = fixture("cp3").unwrap();
    let c = build_derivation_complex(&l, DerKind::DerRelative, None).unwrap();
    for _ in 0..20 {
        let k = r.gen_range(-1..=4);
        let th = random_der(&c.space, k, &mut r);
        let co = c.coords(&th).unwrap();
        assert_eq!(c.from_coords(k, &co), th);
    }
    assert_eq!(c.coords(&Derivation::zero(&c.space, 1)), Some(SVec::new()));
}
