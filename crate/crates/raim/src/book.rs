//! Compile-checks for the code blocks in the book and the README.
//!
//! Each chapter of the guide in `book/` is pulled in as a doc comment on a
//! hidden struct, so `cargo test --doc` runs every runnable snippet the book
//! shows. If a chapter drifts out of sync with the API, the doc-test build
//! breaks.

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct Readme;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub struct ChapterIntroduction;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/model.md")]
pub struct ChapterModel;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/mixtures.md")]
pub struct ChapterMixtures;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/posterior.md")]
pub struct ChapterPosterior;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/baseline.md")]
pub struct ChapterBaseline;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/montecarlo.md")]
pub struct ChapterMontecarlo;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub struct ChapterCli;
