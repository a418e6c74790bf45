//! Near-duplicate detection and duplication-bias auditing for source
//! code corpora.
//!
//! The crate covers the full pipeline:
//!
//! 1. [`lexer`] reduces source files to identifier/literal token streams;
//! 2. [`fingerprint`] builds per-file token fingerprints and decides
//!    near-duplication via dual Jaccard thresholds;
//! 3. [`detector`] runs the all-pairs similarity join (with exact
//!    pruning) and clusters pairs into duplicate groups;
//! 4. [`analysis`] computes duplication statistics, audits
//!    train/validation/test splits and derives test-set variants;
//! 5. [`bias`] decomposes any per-sample metric into its unbiased
//!    estimate and duplication bias, and produces down-weights;
//! 6. [`lab`] demonstrates the whole effect end to end on synthetic
//!    corpora with a nearest-neighbor memorization baseline.
//!
//! File formats live in [`corpus`]; the `dupaudit` binary (see the
//! [`cli`] module) fronts everything as subcommands. A narrative guide
//! with runnable examples is in the `book/` directory of the repository;
//! its code blocks compile as doctests of this crate.

pub mod analysis;
pub mod bias;
pub mod cli;
pub mod corpus;
pub mod detector;
pub mod error;
pub mod fingerprint;
pub mod lab;
pub mod lexer;

pub use error::{Error, Result};

// The book's code blocks are compiled and run with `cargo test --doc`,
// keeping the guide in sync with the library.
#[cfg(doctest)]
mod book {
    macro_rules! doc_check {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            #[allow(dead_code)]
            struct $name;
        };
    }

    doc_check!(Introduction, "../../../book/src/introduction.md");
    doc_check!(TokenCorpora, "../../../book/src/token-corpora.md");
    doc_check!(Fingerprints, "../../../book/src/fingerprints.md");
    doc_check!(Detection, "../../../book/src/detection.md");
    doc_check!(SplitAuditing, "../../../book/src/split-auditing.md");
    doc_check!(DuplicationBias, "../../../book/src/duplication-bias.md");
    doc_check!(MemorizationLab, "../../../book/src/memorization-lab.md");
    doc_check!(CliReference, "../../../book/src/cli-reference.md");
}
