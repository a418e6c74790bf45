//! Corpus duplication statistics, split auditing, test-set variants and
//! deduplication representatives.
//!
//! A duplicated file is classified relative to a train/validation/test
//! split by where its group-mates fall: "in-train" (train file with a
//! train mate), "in-test" (test file with a test mate) and "cross-set"
//! (test file with a train mate). The classes overlap: a test file can be
//! both in-test and cross-set, so the audit reports sets, not a partition.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Fold, SplitAssignment};
use crate::detector::DuplicationReport;
use crate::error::{Error, Result};

/// Corpus-level duplication statistics at a given train fraction.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusStats {
    /// Admitted files, |D|.
    pub num_files: usize,
    /// Near-duplicate groups.
    pub num_groups: usize,
    /// d = (|D| − |X|) / |D|.
    pub duplication_factor: f64,
    /// Mean group size (absent when there are no groups).
    pub group_size_mean: Option<f64>,
    /// Median group size, lower-middle convention (absent when there are
    /// no groups).
    pub group_size_median: Option<f64>,
    /// Expected fraction of test files with a group-mate in train, under
    /// i.i.d. fold assignment at the given train fraction.
    pub expected_cross_set_fraction: f64,
}

/// The duplication factor d = (|D| − |X|) / |D|, the proportion of the
/// corpus that is redundant. |X| counts unique items: one per group plus
/// one per singleton.
pub fn duplication_factor(report: &DuplicationReport) -> Result<f64> {
    let total = report.universe().len();
    if total == 0 {
        return Err(Error::InvalidParams(
            "duplication factor is undefined for an empty universe".into(),
        ));
    }
    let unique = report.unique_count();
    Ok((total - unique) as f64 / total as f64)
}

/// Mean and median of group sizes (singletons excluded). The median of an
/// even count is the lower-middle value.
pub fn group_size_stats(report: &DuplicationReport) -> Result<(f64, f64)> {
    if report.groups().is_empty() {
        return Err(Error::InvalidParams(
            "group size statistics need at least one group".into(),
        ));
    }
    let mut sizes: Vec<usize> = report.groups().iter().map(|g| g.len()).collect();
    sizes.sort_unstable();
    let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
    let median = sizes[(sizes.len() - 1) / 2] as f64;
    Ok((mean, median))
}

/// Analytic expectation of the cross-set fraction of the test fold under
/// i.i.d. file-level assignment (train with probability `train_fraction`,
/// test otherwise): Σ_g c_g · (1 − q^(c_g − 1)) / |D| with q = 1 − p.
///
/// This is the ratio of the expected number of test files with a
/// group-mate in train to the expected test size.
pub fn expected_cross_set_fraction(report: &DuplicationReport, train_fraction: f64) -> Result<f64> {
    check_fraction(train_fraction, "train fraction")?;
    let total = report.universe().len();
    if total == 0 {
        return Err(Error::InvalidParams(
            "expected cross-set fraction is undefined for an empty universe".into(),
        ));
    }
    let q = 1.0 - train_fraction;
    let sum: f64 = report
        .groups()
        .iter()
        .map(|g| {
            let c = g.len() as f64;
            c * (1.0 - q.powi(g.len() as i32 - 1))
        })
        .sum();
    Ok(sum / total as f64)
}

/// Monte Carlo estimate of the same quantity: simulates i.i.d. binary
/// fold assignment and averages the realized cross-set fraction over
/// `trials` draws. Trials with an empty test fold are resampled.
/// Deterministic for a fixed seed.
pub fn monte_carlo_cross_set(
    report: &DuplicationReport,
    train_fraction: f64,
    trials: u32,
    seed: u64,
) -> Result<f64> {
    check_fraction(train_fraction, "train fraction")?;
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let total = report.universe().len();
    if total == 0 {
        return Err(Error::InvalidParams(
            "cross-set simulation is undefined for an empty universe".into(),
        ));
    }

    // Universe positions per group; draws happen in lexicographic id
    // order so the stream is reproducible.
    let positions: std::collections::HashMap<&str, usize> = report
        .universe()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let groups: Vec<Vec<usize>> = report
        .groups()
        .iter()
        .map(|g| g.members().iter().map(|m| positions[m.as_str()]).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; total];
    let mut acc = 0.0;
    let mut done = 0u32;
    while done < trials {
        let mut test_total = 0usize;
        for slot in in_train.iter_mut() {
            *slot = rng.random::<f64>() < train_fraction;
            if !*slot {
                test_total += 1;
            }
        }
        if test_total == 0 {
            continue; // resample
        }
        let mut cross = 0usize;
        for members in &groups {
            if members.iter().any(|&m| in_train[m]) {
                cross += members.iter().filter(|&&m| !in_train[m]).count();
            }
        }
        acc += cross as f64 / test_total as f64;
        done += 1;
    }
    Ok(acc / f64::from(trials))
}

/// Classification of duplicated files against a split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitAudit {
    /// Train-fold files with at least one group-mate in train.
    pub in_train: BTreeSet<String>,
    /// Test-fold files with at least one group-mate in test.
    pub in_test: BTreeSet<String>,
    /// Test-fold files with at least one group-mate in train.
    pub cross_set: BTreeSet<String>,
    /// |cross_set| / |test fold ∩ universe| (0 when the test fold is
    /// empty).
    pub test_cross_set_fraction: f64,
}

fn check_split_covers(report: &DuplicationReport, split: &SplitAssignment) -> Result<()> {
    let missing: Vec<String> = report
        .universe()
        .iter()
        .filter(|id| split.get(id).is_none())
        .cloned()
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::IdMismatch {
            context: "split vs. universe",
            missing,
            unexpected: Vec::new(),
        })
    }
}

/// Classifies every duplicated file of the universe against `split`.
/// Split entries outside the universe are ignored; universe ids missing
/// from the split are an error.
pub fn audit_split(report: &DuplicationReport, split: &SplitAssignment) -> Result<SplitAudit> {
    check_split_covers(report, split)?;

    let mut in_train = BTreeSet::new();
    let mut in_test = BTreeSet::new();
    let mut cross_set = BTreeSet::new();
    for group in report.groups() {
        let folds: Vec<Fold> = group
            .members()
            .iter()
            .map(|m| split.get(m).expect("coverage checked above"))
            .collect();
        let train_count = folds.iter().filter(|f| **f == Fold::Train).count();
        let test_count = folds.iter().filter(|f| **f == Fold::Test).count();
        for (member, fold) in group.members().iter().zip(&folds) {
            match fold {
                Fold::Train if train_count >= 2 => {
                    in_train.insert(member.clone());
                }
                Fold::Test => {
                    if test_count >= 2 {
                        in_test.insert(member.clone());
                    }
                    if train_count >= 1 {
                        cross_set.insert(member.clone());
                    }
                }
                _ => {}
            }
        }
    }

    let test_universe = report
        .universe()
        .iter()
        .filter(|id| split.get(id) == Some(Fold::Test))
        .count();
    let test_cross_set_fraction = if test_universe == 0 {
        0.0
    } else {
        cross_set.len() as f64 / test_universe as f64
    };
    Ok(SplitAudit {
        in_train,
        in_test,
        cross_set,
        test_cross_set_fraction,
    })
}

/// The three test-set variants derived from a split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestVariant {
    /// Cross-set members removed, in-test duplication collapsed to one
    /// representative per group: the unbiased, user-facing test set.
    NoDups,
    /// In-test duplication collapsed, cross-set members all kept.
    CrossSetOnly,
    /// The test fold unchanged: the fully biased test set.
    AllDups,
}

/// Derives a test-set variant. The representative kept when collapsing
/// in-test duplication is the lexicographically smallest test-fold member
/// of the group.
pub fn derive_test_variant(
    report: &DuplicationReport,
    split: &SplitAssignment,
    variant: TestVariant,
) -> Result<BTreeSet<String>> {
    check_split_covers(report, split)?;

    let mut kept = BTreeSet::new();
    for id in report.universe() {
        if split.get(id) != Some(Fold::Test) {
            continue;
        }
        match report.group_of(id) {
            None => {
                kept.insert(id.clone()); // singletons survive every variant
            }
            Some(group) => {
                let has_train_mate = group
                    .members()
                    .iter()
                    .any(|m| split.get(m) == Some(Fold::Train));
                let keep = match variant {
                    TestVariant::AllDups => true,
                    // Within one group either every test member has a
                    // train mate or none does, so "cross-set" is a
                    // group-level property here.
                    TestVariant::CrossSetOnly => {
                        has_train_mate || is_test_representative(group, split, id)
                    }
                    TestVariant::NoDups => {
                        !has_train_mate && is_test_representative(group, split, id)
                    }
                };
                if keep {
                    kept.insert(id.clone());
                }
            }
        }
    }
    Ok(kept)
}

fn is_test_representative(
    group: &crate::detector::DuplicateGroup,
    split: &SplitAssignment,
    id: &str,
) -> bool {
    group
        .members()
        .iter()
        .find(|m| split.get(m) == Some(Fold::Test))
        .map(|first| first.as_str() == id)
        .unwrap_or(false)
}

/// The deduplication keep-set: every singleton plus the lexicographically
/// smallest member of each group. Its size is |X|.
pub fn select_representatives(report: &DuplicationReport) -> BTreeSet<String> {
    let mut keep: BTreeSet<String> = report
        .universe()
        .iter()
        .filter(|id| report.group_of(id).is_none())
        .cloned()
        .collect();
    for group in report.groups() {
        keep.insert(group.representative().to_string());
    }
    keep
}

/// Bundles the Table-style corpus statistics at one train fraction.
pub fn corpus_stats(report: &DuplicationReport, train_fraction: f64) -> Result<CorpusStats> {
    let duplication = duplication_factor(report)?;
    let (mean, median) = if report.groups().is_empty() {
        (None, None)
    } else {
        let (m, md) = group_size_stats(report)?;
        (Some(m), Some(md))
    };
    Ok(CorpusStats {
        num_files: report.universe().len(),
        num_groups: report.groups().len(),
        duplication_factor: duplication,
        group_size_mean: mean,
        group_size_median: median,
        expected_cross_set_fraction: expected_cross_set_fraction(report, train_fraction)?,
    })
}

fn check_fraction(value: f64, name: &str) -> Result<()> {
    if value.is_finite() && 0.0 < value && value < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "{name} must lie strictly between 0 and 1, got {value}"
        )))
    }
}
