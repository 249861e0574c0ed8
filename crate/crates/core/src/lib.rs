#![allow(clippy::needless_range_loop)]

pub mod bessel;
pub mod cache;
pub mod characters;
pub mod cosets;
pub mod error;
pub mod field;
pub mod group;
pub mod local;
pub mod modp;
pub mod newform;
pub mod report;
pub mod selftest;
pub mod minimax;
pub mod whittaker;

pub use characters::{character_table, CharacterTable, GroupContext};
pub use error::{Error, Result};
pub use field::{Fe, FieldDescriptor, FieldSpec};
pub use group::{FqMatrix, GlGroup};
pub use modp::ComputationField;
