//! Fixtures shared by the benches.

use newform_core::bessel::AddChar;
use newform_core::{character_table, CharacterTable, GroupContext};

pub fn group(n: usize, q: u64) -> (GroupContext, CharacterTable) {
    let ctx = GroupContext::from_order(n, q).expect("group");
    let t = character_table(&ctx, 0).expect("table");
    (ctx, t)
}

pub fn psi(ctx: &GroupContext) -> AddChar {
    AddChar::new(ctx, 1).expect("additive character")
}
