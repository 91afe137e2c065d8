//! The `kappaloop` guide, compiled.
//!
//! Each module below embeds one chapter of the mdBook sources from `book/`
//! verbatim, so every code block in the guide is built and executed as a
//! doc-test by `cargo test --workspace`. The rendered book and the tested
//! snippets are the same bytes; the guide cannot drift from the library it
//! documents.

#[doc = include_str!("../../../README.md")]
pub mod readme {}

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/orbits.md")]
pub mod orbits {}

#[doc = include_str!("../../../book/src/isotopies.md")]
pub mod isotopies {}

#[doc = include_str!("../../../book/src/characters.md")]
pub mod characters {}

#[doc = include_str!("../../../book/src/kappa.md")]
pub mod kappa {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
