//! Guide snippets, run as doc-tests.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}

#[doc = include_str!("../../../book/src/measurement.md")]
pub mod measurement {}

#[doc = include_str!("../../../book/src/global.md")]
pub mod global {}

#[doc = include_str!("../../../book/src/local.md")]
pub mod local {}

#[doc = include_str!("../../../book/src/realization.md")]
pub mod realization {}

#[doc = include_str!("../../../book/src/controllability.md")]
pub mod controllability {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
