//! Seeded randomized property suites on a presentation and its derivations.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::derivations::{DerSpace, Derivation};
use crate::free_lie::{FreeLie, LieElem, SquareZeroReport};
use crate::graded::scalar::{sign, Q};

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub property: String,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl PropertyResult {
    fn new(property: &str) -> Self {
        PropertyResult { property: property.into(), cases: 0, failures: 0, first_failure: None }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StructuralReport {
    pub model: String,
    pub truncation: usize,
    pub window: (i64, i64),
    pub seed: u64,
    pub generators: SquareZeroReport,
    pub properties: Vec<PropertyResult>,
}

impl StructuralReport {
    pub fn pass(&self) -> bool {
        self.generators.pass && self.properties.iter().all(|p| p.failures == 0)
    }
}

fn small_q(r: &mut ChaCha8Rng) -> Q {
    let n = r.gen_range(1i64..=4) * if r.gen_bool(0.5) { 1 } else { -1 };
    Q::new(n.into(), r.gen_range(1i64..=3).into())
}

fn random_elem(l: &FreeLie, k: i64, r: &mut ChaCha8Rng) -> LieElem {
    let mut e = LieElem::zero(k);
    let n = l.dim(k);
    for _ in 0..r.gen_range(1..=3) {
        e.add_scaled(l.basis_elem(k, r.gen_range(0..n)), &small_q(r));
    }
    e.degree = k;
    e
}

fn random_der(space: &DerSpace, k: i64, r: &mut ChaCha8Rng) -> Derivation {
    let slots = space.slot_basis(k);
    let mut th = Derivation::zero(space, k);
    for _ in 0..r.gen_range(1..=3) {
        let s = slots[r.gen_range(0..slots.len())];
        th = th.plus(&space.slot_derivation(k, s).scaled(&small_q(r)));
    }
    th
}

/// `cases` random sparse instances of each axiom for L and for Der L.
pub fn structural_suite(l: &Arc<FreeLie>, cases: usize, seed: u64) -> StructuralReport {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let w = l.pres.window;
    let degs: Vec<i64> = w.degrees().filter(|&k| l.dim(k) > 0).collect();
    let mut props: Vec<PropertyResult> =
        ["d² = 0", "antisymmetry", "Jacobi", "Leibniz"].iter().map(|p| PropertyResult::new(p)).collect();
    if !degs.is_empty() {
        for _ in 0..cases {
            let (da, db, dc) = (
                degs[r.gen_range(0..degs.len())],
                degs[r.gen_range(0..degs.len())],
                degs[r.gen_range(0..degs.len())],
            );
            let (a, b, c) = (random_elem(l, da, &mut r), random_elem(l, db, &mut r), random_elem(l, dc, &mut r));
            let s = sign(da * db);
            let show = || format!("a = {}, b = {}, c = {}", l.render(&a), l.render(&b), l.render(&c));
            props[0].record(l.differential(&l.differential(&a)).is_zero(), show);
            let ab = l.bracket(&a, &b);
            props[1].record(ab.plus(&l.bracket(&b, &a).scaled(&s)).is_zero(), show);
            let lhs = l.bracket(&a, &l.bracket(&b, &c));
            let rhs = l.bracket(&ab, &c).plus(&l.bracket(&b, &l.bracket(&a, &c)).scaled(&s));
            props[2].record(lhs.minus(&rhs).is_zero(), show);
            let lhs = l.differential(&ab);
            let rhs = l.bracket(&l.differential(&a), &b).plus(&l.bracket(&a, &l.differential(&b)).scaled(&sign(da)));
            props[3].record(lhs.minus(&rhs).is_zero(), show);
        }
    }
    let space = DerSpace::full(l);
    let ddegs: Vec<i64> = w.degrees().filter(|&k| !space.slot_basis(k).is_empty()).collect();
    let mut dprops: Vec<PropertyResult> = ["D² = 0 on Der L", "antisymmetry on Der L", "Jacobi on Der L", "Leibniz on Der L"]
        .iter()
        .map(|p| PropertyResult::new(p))
        .collect();
    if !ddegs.is_empty() {
        for _ in 0..cases {
            let pick = |r: &mut ChaCha8Rng| ddegs[r.gen_range(0..ddegs.len())];
            let (da, db, dc) = (pick(&mut r), pick(&mut r), pick(&mut r));
            let (a, b, c) = (random_der(&space, da, &mut r), random_der(&space, db, &mut r), random_der(&space, dc, &mut r));
            let s = sign(da * db);
            let show = || format!("degrees {da}, {db}, {dc}");
            dprops[0].record(space.differential(&space.differential(&a)).is_zero(), show);
            let ab = space.bracket(&a, &b);
            dprops[1].record(ab.plus(&space.bracket(&b, &a).scaled(&s)).is_zero(), show);
            let lhs = space.bracket(&a, &space.bracket(&b, &c));
            let rhs = space.bracket(&ab, &c).plus(&space.bracket(&b, &space.bracket(&a, &c)).scaled(&s));
            dprops[2].record(lhs.minus(&rhs).is_zero(), show);
            let lhs = space.differential(&ab);
            let rhs = space
                .bracket(&space.differential(&a), &b)
                .plus(&space.bracket(&a, &space.differential(&b)).scaled(&sign(da)));
            dprops[3].record(lhs.minus(&rhs).is_zero(), show);
        }
    }
    props.extend(dprops);
    StructuralReport {
        model: l.pres.name.clone(),
        truncation: l.n(),
        window: (w.min, w.max),
        seed,
        generators: l.check_square_zero(),
        properties: props,
    }
}
