//! The duplication-bias decomposition of a per-sample metric.
//!
//! For a metric f over a corpus D whose duplicate structure is known, the
//! plain mean f̂ decomposes exactly as
//!
//! ```text
//! f̂ = (1 − d)·f̄ + d·β
//! ```
//!
//! where d is the duplication factor, f̄ the unbiased estimate (each
//! duplicate group contributes once) and β the duplication bias (the
//! contribution of the redundant copies). Near-duplicates within one
//! group may carry different metric values; each group enters through its
//! group mean, which is the unique convention under which the identity
//! holds exactly.
//!
//! Sums run in a fixed order (lexicographic by id, pairwise summation) so
//! results are reproducible across platforms and runs.

use serde::Serialize;

use crate::analysis::duplication_factor;
use crate::corpus::MetricRecord;
use crate::detector::DuplicationReport;
use crate::error::{Error, Result};

/// The exact decomposition of a biased mean.
#[derive(Debug, Clone, Serialize)]
pub struct BiasDecomposition {
    /// Duplication factor d ∈ [0, 1).
    pub d: f64,
    /// Biased mean over the full corpus (what a naive evaluation reports).
    pub f_hat: f64,
    /// Unbiased estimate: mean over unique items.
    pub f_bar: f64,
    /// Duplication bias; absent when d = 0 (its denominator |D| − |X|
    /// vanishes, so no bias is measurable).
    pub beta: Option<f64>,
}

/// A per-sample down-weight 1/c_i, where c_i is the size of the sample's
/// duplicate group (1 for singletons).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedSample {
    pub id: String,
    pub weight: f64,
}

/// Pairwise (tree) summation: error grows with log(n) rather than n.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1..=8 => values.iter().sum(),
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

/// Plain arithmetic mean of the metric values, summed in lexicographic id
/// order. Errors on empty input.
pub fn estimate_mean(metrics: &[MetricRecord]) -> Result<f64> {
    if metrics.is_empty() {
        return Err(Error::InvalidParams(
            "cannot average an empty metric set".into(),
        ));
    }
    let mut ordered: Vec<&MetricRecord> = metrics.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));
    let values: Vec<f64> = ordered.iter().map(|r| r.value).collect();
    Ok(pairwise_sum(&values) / values.len() as f64)
}

// Metric values grouped into units: one entry per duplicate group plus
// one per singleton, ordered by the unit's smallest id.
struct Units {
    /// (group size, member values sorted by id) per unit.
    entries: Vec<(usize, Vec<f64>)>,
    total: usize,
}

fn collect_units(metrics: &[MetricRecord], report: &DuplicationReport) -> Result<Units> {
    let mut by_id: std::collections::HashMap<&str, f64> =
        std::collections::HashMap::with_capacity(metrics.len());
    let mut unexpected = Vec::new();
    for rec in metrics {
        if !report.universe().contains(&rec.id) {
            unexpected.push(rec.id.clone());
        } else if by_id.insert(rec.id.as_str(), rec.value).is_some() {
            return Err(Error::InvalidParams(format!(
                "metric id {:?} appears more than once",
                rec.id
            )));
        }
    }
    let missing: Vec<String> = report
        .universe()
        .iter()
        .filter(|id| !by_id.contains_key(id.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() || !unexpected.is_empty() {
        unexpected.sort();
        return Err(Error::IdMismatch {
            context: "metrics vs. universe",
            missing,
            unexpected,
        });
    }

    // Universe iteration is lexicographic; groups contribute at their
    // smallest member, singletons at themselves.
    let mut entries = Vec::new();
    for id in report.universe() {
        match report.group_of(id) {
            None => entries.push((1, vec![by_id[id.as_str()]])),
            Some(group) => {
                if group.representative() == id {
                    let values: Vec<f64> =
                        group.members().iter().map(|m| by_id[m.as_str()]).collect();
                    entries.push((group.len(), values));
                }
            }
        }
    }
    Ok(Units {
        entries,
        total: report.universe().len(),
    })
}

/// Decomposes the biased mean of `metrics` against the duplicate
/// structure in `report`. Every metric id must be in the universe and
/// every universe id must carry exactly one metric.
pub fn decompose(
    metrics: &[MetricRecord],
    report: &DuplicationReport,
) -> Result<BiasDecomposition> {
    let units = collect_units(metrics, report)?;
    if units.total == 0 {
        return Err(Error::InvalidParams(
            "cannot decompose over an empty universe".into(),
        ));
    }
    let d = duplication_factor(report)?;

    let mut hat_terms = Vec::with_capacity(units.entries.len());
    let mut bar_terms = Vec::with_capacity(units.entries.len());
    let mut beta_terms = Vec::with_capacity(units.entries.len());
    for (size, values) in &units.entries {
        let mean = pairwise_sum(values) / *size as f64;
        hat_terms.push(*size as f64 * mean);
        bar_terms.push(mean);
        beta_terms.push((*size as f64 - 1.0) * mean);
    }

    let unique = units.entries.len();
    let f_hat = pairwise_sum(&hat_terms) / units.total as f64;
    let f_bar = pairwise_sum(&bar_terms) / unique as f64;
    let beta = if units.total == unique {
        None
    } else {
        Some(pairwise_sum(&beta_terms) / (units.total - unique) as f64)
    };
    Ok(BiasDecomposition {
        d,
        f_hat,
        f_bar,
        beta,
    })
}

/// The down-weighted mean (1/|X|) Σ_i f(x_i)/c_i, computed directly over
/// samples in lexicographic id order. Algebraically identical to
/// [`decompose`]'s f̄; the two are used to cross-check each other.
pub fn down_weighted_mean(metrics: &[MetricRecord], report: &DuplicationReport) -> Result<f64> {
    let units = collect_units(metrics, report)?;
    if units.total == 0 {
        return Err(Error::InvalidParams(
            "cannot average over an empty universe".into(),
        ));
    }
    // Re-expand units into per-sample weighted terms; unit order is by
    // smallest id, member values are already id-sorted within each unit.
    let mut terms = Vec::with_capacity(units.total);
    for (size, values) in &units.entries {
        let weight = 1.0 / *size as f64;
        for v in values {
            terms.push(weight * v);
        }
    }
    let unique = units.entries.len();
    Ok(pairwise_sum(&terms) / unique as f64)
}

/// Per-sample weights 1/c_i for every universe member, in lexicographic
/// id order. Singletons weigh 1.
pub fn sample_weights(report: &DuplicationReport) -> Vec<WeightedSample> {
    report
        .universe()
        .iter()
        .map(|id| {
            let size = report.group_size_of(id).expect("universe member");
            WeightedSample {
                id: id.clone(),
                weight: 1.0 / size as f64,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::DuplicateGroup;
    use proptest::prelude::*;

    fn metric(id: &str, value: f64) -> MetricRecord {
        MetricRecord {
            id: id.into(),
            value,
        }
    }

    fn group(ids: &[&str]) -> DuplicateGroup {
        DuplicateGroup::new(ids.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn report(ids: &[&str], groups: Vec<DuplicateGroup>) -> DuplicationReport {
        DuplicationReport::new(ids.iter().map(|s| s.to_string()), groups).unwrap()
    }

    #[test]
    fn estimate_mean_examples() {
        assert_eq!(
            estimate_mean(&[
                metric("a", 1.0),
                metric("b", 0.0),
                metric("c", 1.0),
                metric("d", 0.0)
            ])
            .unwrap(),
            0.5
        );
        assert_eq!(estimate_mean(&[metric("a", 0.7)]).unwrap(), 0.7);
        assert!(
            (estimate_mean(&[metric("a", 0.2), metric("b", 0.4), metric("c", 0.9)]).unwrap() - 0.5)
                .abs()
                < 1e-15
        );
        assert!(estimate_mean(&[]).is_err());
    }

    #[test]
    fn decompose_exact_copy_fixture() {
        // Group of three copies with f = 1, singleton with f = 0.
        let r = report(&["a1", "a2", "a3", "b"], vec![group(&["a1", "a2", "a3"])]);
        let metrics = vec![
            metric("a1", 1.0),
            metric("a2", 1.0),
            metric("a3", 1.0),
            metric("b", 0.0),
        ];
        let dec = decompose(&metrics, &r).unwrap();
        assert_eq!(dec.d, 0.5);
        assert_eq!(dec.f_hat, 0.75);
        assert_eq!(dec.f_bar, 0.5);
        assert_eq!(dec.beta, Some(1.0));
        let identity = (1.0 - dec.d) * dec.f_bar + dec.d * dec.beta.unwrap();
        assert!((identity - dec.f_hat).abs() < 1e-12);
    }

    #[test]
    fn decompose_without_duplicates_has_no_beta() {
        let r = report(&["a", "b"], vec![]);
        let dec = decompose(&[metric("a", 0.25), metric("b", 0.75)], &r).unwrap();
        assert_eq!(dec.d, 0.0);
        assert_eq!(dec.beta, None);
        assert_eq!(dec.f_hat, dec.f_bar);
    }

    #[test]
    fn decompose_uses_group_means_for_unequal_values() {
        let r = report(&["x1", "x2", "y"], vec![group(&["x1", "x2"])]);
        let metrics = vec![metric("x1", 0.6), metric("x2", 1.0), metric("y", 0.0)];
        let dec = decompose(&metrics, &r).unwrap();
        assert!((dec.d - 1.0 / 3.0).abs() < 1e-15);
        assert!((dec.f_hat - 1.6 / 3.0).abs() < 1e-15);
        assert!((dec.f_bar - 0.4).abs() < 1e-15);
        assert!((dec.beta.unwrap() - 0.8).abs() < 1e-15);
        let identity = (1.0 - dec.d) * dec.f_bar + dec.d * dec.beta.unwrap();
        assert!((identity - dec.f_hat).abs() < 1e-12);
    }

    #[test]
    fn decompose_rejects_id_mismatches() {
        let r = report(&["a", "b"], vec![]);
        assert!(matches!(
            decompose(&[metric("a", 1.0)], &r),
            Err(Error::IdMismatch { .. })
        ));
        assert!(matches!(
            decompose(&[metric("a", 1.0), metric("b", 1.0), metric("z", 1.0)], &r),
            Err(Error::IdMismatch { .. })
        ));
    }

    #[test]
    fn down_weighted_mean_examples() {
        let r = report(&["a1", "a2", "a3", "b"], vec![group(&["a1", "a2", "a3"])]);
        let metrics = vec![
            metric("a1", 1.0),
            metric("a2", 1.0),
            metric("a3", 1.0),
            metric("b", 0.0),
        ];
        assert_eq!(down_weighted_mean(&metrics, &r).unwrap(), 0.5);

        let clean = report(&["a", "b"], vec![]);
        let plain = vec![metric("a", 0.2), metric("b", 0.8)];
        assert_eq!(
            down_weighted_mean(&plain, &clean).unwrap(),
            estimate_mean(&plain).unwrap()
        );

        let r = report(&["x1", "x2", "y"], vec![group(&["x1", "x2"])]);
        let metrics = vec![metric("x1", 0.6), metric("x2", 1.0), metric("y", 0.0)];
        let dwm = down_weighted_mean(&metrics, &r).unwrap();
        assert!((dwm - 0.4).abs() < 1e-15);
        assert!((dwm - decompose(&metrics, &r).unwrap().f_bar).abs() < 1e-12);
    }

    #[test]
    fn weights_follow_group_sizes() {
        let r = report(&["a1", "a2", "a3", "b"], vec![group(&["a1", "a2", "a3"])]);
        let weights = sample_weights(&r);
        let expected: Vec<(&str, f64)> = vec![
            ("a1", 1.0 / 3.0),
            ("a2", 1.0 / 3.0),
            ("a3", 1.0 / 3.0),
            ("b", 1.0),
        ];
        assert_eq!(
            weights
                .iter()
                .map(|w| (w.id.as_str(), w.weight))
                .collect::<Vec<_>>(),
            expected
        );

        let clean = report(&["a", "b"], vec![]);
        assert!(sample_weights(&clean).iter().all(|w| w.weight == 1.0));

        let r = report(
            &["p1", "p2", "q1", "q2", "q3", "q4", "q5"],
            vec![group(&["p1", "p2"]), group(&["q1", "q2", "q3", "q4", "q5"])],
        );
        let weights = sample_weights(&r);
        assert_eq!(weights[0].weight, 0.5);
        assert_eq!(weights[6].weight, 0.2);
    }

    /// Random corpora with arbitrary group structures and values in
    /// [−1000, 1000], mirroring the fuzz suite used for acceptance.
    fn fuzz_corpus() -> impl Strategy<Value = (Vec<MetricRecord>, DuplicationReport)> {
        (
            proptest::collection::vec(2usize..8, 0..6),
            1usize..30,
            proptest::collection::vec(-1000.0f64..1000.0, 1..80),
        )
            .prop_map(|(sizes, singletons, values)| {
                let total: usize = sizes.iter().sum::<usize>() + singletons;
                let ids: Vec<String> = (0..total).map(|i| format!("s{i:04}")).collect();
                let mut groups = Vec::new();
                let mut next = 0;
                for size in sizes {
                    groups.push(DuplicateGroup::new(ids[next..next + size].to_vec()).unwrap());
                    next += size;
                }
                let report = DuplicationReport::new(ids.clone(), groups).unwrap();
                let metrics: Vec<MetricRecord> = ids
                    .iter()
                    .enumerate()
                    .map(|(i, id)| metric(id, values[i % values.len()]))
                    .collect();
                (metrics, report)
            })
    }

    proptest! {
        #[test]
        fn decomposition_identity_holds((metrics, report) in fuzz_corpus()) {
            let dec = decompose(&metrics, &report).unwrap();
            let beta = dec.beta.unwrap_or(0.0);
            let recomposed = (1.0 - dec.d) * dec.f_bar + dec.d * beta;
            prop_assert!((dec.f_hat - recomposed).abs() < 1e-9);
        }

        #[test]
        fn down_weighting_matches_f_bar((metrics, report) in fuzz_corpus()) {
            let dec = decompose(&metrics, &report).unwrap();
            let dwm = down_weighted_mean(&metrics, &report).unwrap();
            prop_assert!((dec.f_bar - dwm).abs() < 1e-12);
        }

        #[test]
        fn scaling_is_linear((metrics, report) in fuzz_corpus(), scale in -4.0f64..4.0) {
            let dec = decompose(&metrics, &report).unwrap();
            let scaled: Vec<MetricRecord> = metrics
                .iter()
                .map(|r| metric(&r.id, r.value * scale))
                .collect();
            let dec2 = decompose(&scaled, &report).unwrap();
            let tol = 1e-9 * (1.0 + scale.abs());
            prop_assert!((dec2.f_hat - scale * dec.f_hat).abs() < tol);
            prop_assert!((dec2.f_bar - scale * dec.f_bar).abs() < tol);
            if let (Some(b2), Some(b)) = (dec2.beta, dec.beta) {
                prop_assert!((b2 - scale * b).abs() < tol);
            }
        }

        #[test]
        fn constant_groups_make_f_bar_the_deduplicated_mean(
            (metrics, report) in fuzz_corpus()
        ) {
            // Force every group to share one value.
            let equalized: Vec<MetricRecord> = metrics
                .iter()
                .map(|r| {
                    let value = match report.group_of(&r.id) {
                        Some(g) => {
                            let rep = g.representative();
                            metrics.iter().find(|m| m.id == rep).unwrap().value
                        }
                        None => r.value,
                    };
                    metric(&r.id, value)
                })
                .collect();
            let dec = decompose(&equalized, &report).unwrap();

            let keep = crate::analysis::select_representatives(&report);
            let kept: Vec<MetricRecord> = equalized
                .iter()
                .filter(|m| keep.contains(&m.id))
                .cloned()
                .collect();
            let dedup_mean = estimate_mean(&kept).unwrap();
            prop_assert!((dec.f_bar - dedup_mean).abs() < 1e-9);
        }
    }
}
