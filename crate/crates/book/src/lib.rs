//! The guide in `book/` is plain mdbook, which cannot run snippets that
//! depend on workspace crates. Each chapter is pulled in here as module
//! docs so `cargo test` runs its code blocks as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/estimator.md")]
pub mod estimator {}
#[doc = include_str!("../../../book/src/bias.md")]
pub mod bias {}
#[doc = include_str!("../../../book/src/variance.md")]
pub mod variance {}
#[doc = include_str!("../../../book/src/edof.md")]
pub mod edof {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
