//! Built-in models.

use std::sync::Arc;

use crate::dsl::{parse_model, ModelScript, Overrides};
use crate::error::{Error, Result};
use crate::free_lie::FreeLie;

pub const FIXTURES: &[(&str, &str)] = &[
    ("disk1", include_str!("../fixtures/disk1.cdgl")),
    ("disk2", include_str!("../fixtures/disk2.cdgl")),
    ("disk3", include_str!("../fixtures/disk3.cdgl")),
    ("sphere2", include_str!("../fixtures/sphere2.cdgl")),
    ("sphere3", include_str!("../fixtures/sphere3.cdgl")),
    ("cp2", include_str!("../fixtures/cp2.cdgl")),
    ("cp3", include_str!("../fixtures/cp3.cdgl")),
    ("wedge", include_str!("../fixtures/wedge.cdgl")),
    ("gauge", include_str!("../fixtures/gauge.cdgl")),
];

/// The fixtures with a declared sub-dgl, used for the structural suites.
pub const SHIPPED: &[&str] = &["disk1", "disk2", "disk3", "sphere2", "sphere3", "cp2", "cp3", "wedge"];

pub fn fixture_text(name: &str) -> Result<&'static str> {
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Input(format!("unknown fixture `{name}`")))
}

pub fn fixture_script(name: &str) -> Result<ModelScript> {
    parse_model(fixture_text(name)?)
}

pub fn fixture(name: &str) -> Result<Arc<FreeLie>> {
    fixture_script(name)?.build(&Overrides::default())
}

pub fn fixture_with(name: &str, o: &Overrides) -> Result<Arc<FreeLie>> {
    fixture_script(name)?.build(o)
}
