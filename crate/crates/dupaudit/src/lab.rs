//! Synthetic corpora with planted duplicate groups, and a nearest-neighbor
//! memorization baseline that demonstrates how cross-set duplicates
//! inflate measured accuracy.
//!
//! Base documents get pairwise-disjoint vocabularies (each base draws its
//! tokens from a private slice of the vocabulary, every token used once),
//! so unrelated documents share nothing and detection cannot produce
//! false positives. Copies replace a fixed fraction of positions with
//! fresh lexemes: a copy at perturbation rate r of an L-token document
//! has both Jaccard similarities exactly (L − rL)/(L + rL), which keeps
//! planted duplicates above the default thresholds for r ≤ 0.05, L = 100.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    audit_split, derive_test_variant, duplication_factor, select_representatives, TestVariant,
};
use crate::corpus::{Fold, SplitAssignment, TokenDocument};
use crate::detector::{detect, DuplicateGroup, DuplicationReport};
use crate::error::{Error, Result};
use crate::fingerprint::{jaccard_set, DetectionParams};

/// Distribution over the number of extra copies a duplicated base
/// document receives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CopiesDist {
    /// Geometric on {1, 2, …} truncated at `cap`; mean 1/success_prob
    /// before truncation.
    Geometric { success_prob: f64, cap: u32 },
    /// Exactly this many extra copies.
    Fixed(u32),
}

impl Default for CopiesDist {
    fn default() -> Self {
        CopiesDist::Geometric {
            success_prob: 0.5,
            cap: 10,
        }
    }
}

/// Configuration of the synthetic corpus generator.
#[derive(Debug, Clone, PartialEq)]
pub struct LabGenConfig {
    pub seed: u64,
    /// Number of base documents.
    pub n_base: usize,
    /// Total vocabulary budget; must cover `n_base · doc_len` so base
    /// vocabularies can stay disjoint.
    pub vocab_size: usize,
    /// Tokens per document.
    pub doc_len: usize,
    /// Fraction of base documents that receive copies.
    pub dup_rate: f64,
    pub copies_dist: CopiesDist,
    /// Fraction of token positions replaced by fresh lexemes per copy.
    pub perturb_rate: f64,
    /// Number of class labels.
    pub n_labels: u32,
}

impl LabGenConfig {
    /// Defaults: 200 base documents of 100 tokens, 30% duplicated with
    /// geometric copies, 2% perturbation, 10 labels.
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            n_base: 200,
            vocab_size: 20_000,
            doc_len: 100,
            dup_rate: 0.3,
            copies_dist: CopiesDist::default(),
            perturb_rate: 0.02,
            n_labels: 10,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_base == 0 || self.doc_len == 0 || self.n_labels == 0 {
            return Err(Error::InvalidParams(
                "n_base, doc_len and n_labels must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.dup_rate) || !(0.0..=1.0).contains(&self.perturb_rate) {
            return Err(Error::InvalidParams(
                "dup_rate and perturb_rate must lie in [0, 1]".into(),
            ));
        }
        if let CopiesDist::Geometric { success_prob, .. } = self.copies_dist {
            if !(success_prob > 0.0 && success_prob <= 1.0) {
                return Err(Error::InvalidParams(
                    "geometric success probability must lie in (0, 1]".into(),
                ));
            }
        }
        let needed = self.n_base.saturating_mul(self.doc_len);
        if self.vocab_size < needed {
            return Err(Error::InvalidParams(format!(
                "vocab_size {} cannot give {} base documents disjoint \
                 {}-token vocabularies (need at least {})",
                self.vocab_size, self.n_base, self.doc_len, needed
            )));
        }
        Ok(())
    }
}

/// A generated document with its class label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDocument {
    pub doc: TokenDocument,
    pub label: u32,
}

/// Generates the corpus and its ground-truth duplication report.
/// Deterministic in `cfg.seed`.
pub fn generate_corpus(cfg: &LabGenConfig) -> Result<(Vec<LabeledDocument>, DuplicationReport)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut docs: Vec<LabeledDocument> = Vec::new();
    for i in 0..cfg.n_base {
        let label = rng.random_range(0..cfg.n_labels);
        let mut tokens: Vec<String> = (i * cfg.doc_len..(i + 1) * cfg.doc_len)
            .map(|t| format!("t{t}"))
            .collect();
        tokens.shuffle(&mut rng);
        docs.push(LabeledDocument {
            doc: TokenDocument::new(format!("d{i:05}"), tokens),
            label,
        });
    }

    let n_dup = ((cfg.dup_rate * cfg.n_base as f64).round() as usize).min(cfg.n_base);
    let mut selected = rand::seq::index::sample(&mut rng, cfg.n_base, n_dup).into_vec();
    selected.sort_unstable();

    let replacements = ((cfg.perturb_rate * cfg.doc_len as f64).round() as usize).min(cfg.doc_len);
    let mut fresh = 0usize;
    let mut groups: Vec<DuplicateGroup> = Vec::new();
    let mut copies: Vec<LabeledDocument> = Vec::new();
    for &base_index in &selected {
        let extra = match cfg.copies_dist {
            CopiesDist::Fixed(k) => k,
            CopiesDist::Geometric { success_prob, cap } => {
                let mut k = 1u32;
                while k < cap && rng.random::<f64>() >= success_prob {
                    k += 1;
                }
                k
            }
        };
        if extra == 0 {
            continue;
        }
        let base = docs[base_index].clone();
        let mut member_ids = vec![base.doc.id.clone()];
        for copy_no in 1..=extra {
            let mut tokens = base.doc.tokens.clone();
            for pos in rand::seq::index::sample(&mut rng, cfg.doc_len, replacements) {
                tokens[pos] = format!("f{fresh}");
                fresh += 1;
            }
            let id = format!("{}.c{copy_no}", base.doc.id);
            member_ids.push(id.clone());
            copies.push(LabeledDocument {
                doc: TokenDocument::new(id, tokens),
                label: base.label,
            });
        }
        groups.push(DuplicateGroup::new(member_ids)?);
    }
    docs.extend(copies);

    let report = DuplicationReport::new(docs.iter().map(|d| d.doc.id.clone()), groups)?;
    Ok((docs, report))
}

/// 1-nearest-neighbor classifier over distinct-token sets: the label of
/// the training document with the highest set Jaccard wins; ties go to
/// the lexicographically smallest training id.
pub struct Memorizer {
    examples: Vec<(String, u32, HashSet<String>)>,
}

impl Memorizer {
    pub fn fit<'a, I>(training: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a TokenDocument, u32)>,
    {
        let mut examples: Vec<(String, u32, HashSet<String>)> = training
            .into_iter()
            .map(|(doc, label)| {
                let set: HashSet<String> = doc.tokens.iter().cloned().collect();
                (doc.id.clone(), label, set)
            })
            .collect();
        if examples.is_empty() {
            return Err(Error::InvalidParams(
                "memorizer needs a non-empty training set".into(),
            ));
        }
        examples.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self { examples })
    }

    pub fn predict(&self, query: &TokenDocument) -> u32 {
        let set: HashSet<String> = query.tokens.iter().cloned().collect();
        self.predict_set(&set)
    }

    pub fn predict_set(&self, query: &HashSet<String>) -> u32 {
        let mut best_label = self.examples[0].1;
        let mut best_sim = f64::NEG_INFINITY;
        for (_, label, set) in &self.examples {
            let sim = jaccard_set(query, set);
            if sim > best_sim {
                best_sim = sim;
                best_label = *label;
            }
        }
        best_label
    }
}

/// The four accuracies of one experiment plus the detected duplication
/// factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabResult {
    /// Representatives-only training, duplicate-free test set.
    pub fully_unbiased_acc: f64,
    /// Biased training, duplicate-free test set: what a user of the
    /// model experiences.
    pub unbiased_test_acc: f64,
    /// Biased training, test set keeping only cross-set duplicates.
    pub cross_set_biased_acc: f64,
    /// Biased training, test fold unchanged: what a naive evaluation
    /// reports.
    pub fully_biased_acc: f64,
    /// Duplication factor of the detected report.
    pub d: f64,
}

/// [`LabResult`] plus diagnostics about the run.
#[derive(Debug, Clone, PartialEq)]
pub struct LabOutcome {
    pub result: LabResult,
    /// Accuracy restricted to the cross-set test files (absent when
    /// there are none).
    pub cross_set_subset_acc: Option<f64>,
    pub corpus_size: usize,
    pub detected_groups: usize,
    pub train_size: usize,
    pub valid_size: usize,
    pub test_size: usize,
    pub test_no_dups: usize,
    pub test_cross_set_only: usize,
    pub test_all_dups: usize,
}

/// Runs the full experiment: generate, split i.i.d. by file, detect
/// duplicates (detection, not ground truth), then evaluate the memorizer
/// on the three test variants with biased training and on the
/// duplicate-free variant with representatives-only training.
///
/// `seed` drives the split; `cfg.seed` drives generation. The validation
/// fold is held out untouched, mirroring how model selection would use
/// it; the memorizer trains on the train fold only.
pub fn run_experiment(
    cfg: &LabGenConfig,
    train_fraction: f64,
    valid_fraction: f64,
    seed: u64,
) -> Result<LabOutcome> {
    // The negated form also rejects NaN fractions.
    let fractions_ok =
        train_fraction > 0.0 && valid_fraction > 0.0 && train_fraction + valid_fraction < 1.0;
    if !fractions_ok {
        return Err(Error::InvalidParams(format!(
            "fractions must be positive with train + valid < 1, \
             got train={train_fraction} valid={valid_fraction}"
        )));
    }

    let (docs, _ground_truth) = generate_corpus(cfg)?;
    let by_id: HashMap<&str, &LabeledDocument> =
        docs.iter().map(|d| (d.doc.id.as_str(), d)).collect();

    let token_docs: Vec<TokenDocument> = docs.iter().map(|d| d.doc.clone()).collect();
    let (report, _undersized) = detect(&token_docs, &DetectionParams::default())?;
    if report.universe().is_empty() {
        return Err(Error::InvalidParams(
            "no documents admitted to detection; increase doc_len".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let split = SplitAssignment::from_pairs(docs.iter().map(|d| {
        let u: f64 = rng.random();
        let fold = if u < train_fraction {
            Fold::Train
        } else if u < train_fraction + valid_fraction {
            Fold::Valid
        } else {
            Fold::Test
        };
        (d.doc.id.clone(), fold)
    }))?;

    let no_dups = derive_test_variant(&report, &split, TestVariant::NoDups)?;
    let cross_only = derive_test_variant(&report, &split, TestVariant::CrossSetOnly)?;
    let all_dups = derive_test_variant(&report, &split, TestVariant::AllDups)?;
    for (name, variant) in [
        ("no_dups", &no_dups),
        ("cross_set_only", &cross_only),
        ("all_dups", &all_dups),
    ] {
        if variant.is_empty() {
            return Err(Error::InvalidParams(format!(
                "the {name} test variant is empty; increase n_base or rebalance the split"
            )));
        }
    }

    let train_docs: Vec<(&TokenDocument, u32)> = docs
        .iter()
        .filter(|d| split.get(&d.doc.id) == Some(Fold::Train))
        .map(|d| (&d.doc, d.label))
        .collect();
    let keep = select_representatives(&report);
    let dedup_train_docs: Vec<(&TokenDocument, u32)> = train_docs
        .iter()
        .filter(|(doc, _)| keep.contains(&doc.id))
        .copied()
        .collect();

    let biased = Memorizer::fit(train_docs.iter().copied())?;
    let unbiased = Memorizer::fit(dedup_train_docs.iter().copied())?;

    let accuracy = |model: &Memorizer, ids: &BTreeSet<String>| -> f64 {
        let correct = ids
            .iter()
            .filter(|id| {
                let doc = by_id[id.as_str()];
                model.predict(&doc.doc) == doc.label
            })
            .count();
        correct as f64 / ids.len() as f64
    };

    let audit = audit_split(&report, &split)?;
    let cross_set_subset_acc = if audit.cross_set.is_empty() {
        None
    } else {
        Some(accuracy(&biased, &audit.cross_set))
    };

    let result = LabResult {
        fully_unbiased_acc: accuracy(&unbiased, &no_dups),
        unbiased_test_acc: accuracy(&biased, &no_dups),
        cross_set_biased_acc: accuracy(&biased, &cross_only),
        fully_biased_acc: accuracy(&biased, &all_dups),
        d: duplication_factor(&report)?,
    };
    Ok(LabOutcome {
        result,
        cross_set_subset_acc,
        corpus_size: docs.len(),
        detected_groups: report.groups().len(),
        train_size: train_docs.len(),
        valid_size: split.ids_in(Fold::Valid).count(),
        test_size: split.ids_in(Fold::Test).count(),
        test_no_dups: no_dups.len(),
        test_cross_set_only: cross_only.len(),
        test_all_dups: all_dups.len(),
    })
}
