//! Bundled example programs and data.

pub const TOY: &str = include_str!("../models/toy.ppl");
pub const TOY_OFFSET: &str = include_str!("../models/toy_offset.ppl");
pub const EQ1: &str = include_str!("../models/eq1.ppl");
pub const EQ3: &str = include_str!("../models/eq3.ppl");
pub const SIM: &str = include_str!("../models/sim.ppl");
pub const SSM: &str = include_str!("../models/ssm.ppl");
pub const PLUS: &str = include_str!("../models/plus.ppl");
/// Generated from the bundled tree at birth rate 0.2 and death rate 0.1.
pub const CRBD: &str = include_str!("../models/crbd.ppl");

/// Every bundled `.ppl` model as `(file name, source)`.
pub fn all() -> Vec<(&'static str, &'static str)> {
    vec![
        ("toy.ppl", TOY),
        ("toy_offset.ppl", TOY_OFFSET),
        ("eq1.ppl", EQ1),
        ("eq3.ppl", EQ3),
        ("sim.ppl", SIM),
        ("ssm.ppl", SSM),
        ("plus.ppl", PLUS),
        ("crbd.ppl", CRBD),
    ]
}
