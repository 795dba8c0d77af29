//! The guide's chapters, compiled so their examples run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/claims.md")]
pub mod claims {}

#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}

#[doc = include_str!("../../../book/src/proofs.md")]
pub mod proofs {}

#[doc = include_str!("../../../book/src/counterfactuals.md")]
pub mod counterfactuals {}

#[doc = include_str!("../../../book/src/fusion.md")]
pub mod fusion {}

#[doc = include_str!("../../../book/src/benchmarking.md")]
pub mod benchmarking {}
