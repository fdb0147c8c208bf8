//! The guide in `book/` runs its snippets through rustdoc: every chapter is
//! included as the docs of an empty module, so `cargo test` checks them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/lattices.md")]
pub mod lattices {}
#[doc = include_str!("../../../book/src/billiard.md")]
pub mod billiard {}
#[doc = include_str!("../../../book/src/dyadic.md")]
pub mod dyadic {}
#[doc = include_str!("../../../book/src/arithmeticity.md")]
pub mod arithmeticity {}
#[doc = include_str!("../../../book/src/statistics.md")]
pub mod statistics {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
