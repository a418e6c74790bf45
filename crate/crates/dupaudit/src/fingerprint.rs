//! Per-document fingerprints and the dual-threshold near-duplicate test.
//!
//! A fingerprint holds the distinct-token set `T0` and the token multiset
//! `T1` of one document. Two admitted documents are near-duplicates when
//! the set Jaccard meets `t0_threshold` and the multiset Jaccard meets
//! `t1_threshold`, both inclusively.
//!
//! Threshold comparisons never go through floating point: similarities are
//! exact integer ratios, and thresholds are converted once to exact
//! rationals (`0.8` compares as `4/5`, not as the nearest `f64`, which is
//! slightly above it). A document pair sitting exactly on a threshold is
//! therefore kept deterministically.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;

use crate::corpus::TokenDocument;
use crate::error::{Error, Result};

/// Detection thresholds and the admission size floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    t0: Threshold,
    t1: Threshold,
    min_tokens: usize,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self::new(0.8, 0.7, 20).expect("default params are valid")
    }
}

impl DetectionParams {
    /// `t0_threshold` and `t1_threshold` must lie in (0, 1]; `min_tokens`
    /// must be at least 1.
    pub fn new(t0_threshold: f64, t1_threshold: f64, min_tokens: usize) -> Result<Self> {
        if min_tokens == 0 {
            return Err(Error::InvalidParams("min_tokens must be at least 1".into()));
        }
        Ok(Self {
            t0: Threshold::new(t0_threshold, "t0_threshold")?,
            t1: Threshold::new(t1_threshold, "t1_threshold")?,
            min_tokens,
        })
    }

    pub fn t0_threshold(&self) -> f64 {
        self.t0.value
    }

    pub fn t1_threshold(&self) -> f64 {
        self.t1.value
    }

    pub fn min_tokens(&self) -> usize {
        self.min_tokens
    }

    /// Does `num/den ≥ t0_threshold` hold exactly?
    pub(crate) fn meets_t0(&self, num: u64, den: u64) -> bool {
        self.t0.le_ratio(num, den)
    }

    /// Does `num/den ≥ t1_threshold` hold exactly?
    pub(crate) fn meets_t1(&self, num: u64, den: u64) -> bool {
        self.t1.le_ratio(num, den)
    }
}

/// A threshold value with an exact rational representation.
///
/// The rational is recovered from the shortest decimal form of the `f64`
/// (what the user actually typed), falling back to the binary mantissa for
/// values with no short decimal form. `den == 0` encodes a threshold too
/// small to represent, which every positive ratio satisfies.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Threshold {
    value: f64,
    num: u128,
    den: u128,
}

impl Threshold {
    fn new(value: f64, name: &str) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 || value > 1.0 {
            return Err(Error::InvalidParams(format!(
                "{name} must lie in (0, 1], got {value}"
            )));
        }
        let (num, den) = decimal_rational(value)
            .or_else(|| binary_rational(value))
            .unwrap_or((0, 0));
        Ok(Self { value, num, den })
    }

    /// `self.value ≤ num/den`, computed without rounding.
    fn le_ratio(&self, num: u64, den: u64) -> bool {
        debug_assert!(den > 0);
        if self.den == 0 {
            return num > 0;
        }
        let rhs = self.num * u128::from(den);
        match u128::from(num).checked_mul(self.den) {
            Some(lhs) => lhs >= rhs,
            // Overflow means the left side exceeds 2^128 while the right
            // side cannot; the ratio clears the threshold.
            None => true,
        }
    }
}

/// Exact rational from the shortest round-trip decimal form, when the
/// denominator stays within 10^18.
fn decimal_rational(value: f64) -> Option<(u128, u128)> {
    let text = format!("{value}");
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text.as_str(), ""),
    };
    if frac_part.len() > 18 || int_part.starts_with('-') {
        return None;
    }
    let mut num: u128 = int_part.parse().ok()?;
    let mut den: u128 = 1;
    for ch in frac_part.chars() {
        num = num * 10 + ch.to_digit(10)? as u128;
        den *= 10;
    }
    let g = gcd(num, den);
    Some((num / g, den / g))
}

/// Exact rational from the binary mantissa: `value = m · 2^e`.
fn binary_rational(value: f64) -> Option<(u128, u128)> {
    let bits = value.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i32;
    if exp_field == 0 {
        return None; // subnormal: treat as tiny-positive
    }
    let mut mant = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    let mut exp = exp_field - 1075;
    while mant.is_multiple_of(2) && exp < 0 {
        mant /= 2;
        exp += 1;
    }
    if exp >= 0 {
        Some(((mant as u128) << exp, 1))
    } else if -exp <= 100 {
        Some((mant as u128, 1u128 << (-exp)))
    } else {
        None
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// The `(T0, T1)` fingerprint of one admitted document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    doc_id: String,
    counts: BTreeMap<String, u32>,
    total: usize,
}

impl Fingerprint {
    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    /// Total token count `n` (with multiplicity).
    pub fn token_count(&self) -> usize {
        self.total
    }

    /// `|T0|`, the number of distinct lexemes.
    pub fn distinct_count(&self) -> usize {
        self.counts.len()
    }

    /// Multiplicity of `lexeme` in `T1` (0 when absent).
    pub fn multiplicity(&self, lexeme: &str) -> u32 {
        self.counts.get(lexeme).copied().unwrap_or(0)
    }

    /// The multiset `T1` as a sorted lexeme → multiplicity map.
    pub fn counts(&self) -> &BTreeMap<String, u32> {
        &self.counts
    }

    /// The set `T0`, in lexicographic order.
    pub fn distinct_tokens(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    /// Jaccard similarity of the two `T0` sets.
    pub fn set_similarity(&self, other: &Fingerprint) -> f64 {
        let c = joint_counts(self, other);
        ratio(c.set_inter, c.set_union)
    }

    /// Jaccard similarity of the two `T1` multisets (Σ min / Σ max).
    pub fn multiset_similarity(&self, other: &Fingerprint) -> f64 {
        let c = joint_counts(self, other);
        ratio(c.multiset_min, c.multiset_max)
    }
}

/// A document excluded from detection by the size floor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Undersized {
    pub doc_id: String,
    pub token_count: usize,
}

/// Counts multiplicities into `T1` and projects `T0`. Documents with fewer
/// than `params.min_tokens()` tokens are rejected as [`Undersized`] and
/// take no further part in detection or duplication statistics.
pub fn build_fingerprint(
    doc: &TokenDocument,
    params: &DetectionParams,
) -> std::result::Result<Fingerprint, Undersized> {
    let total = doc.tokens.len();
    if total < params.min_tokens() {
        return Err(Undersized {
            doc_id: doc.id.clone(),
            token_count: total,
        });
    }
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    for token in &doc.tokens {
        *counts.entry(token.clone()).or_insert(0) += 1;
    }
    Ok(Fingerprint {
        doc_id: doc.id.clone(),
        counts,
        total,
    })
}

pub(crate) struct JaccardCounts {
    pub set_inter: u64,
    pub set_union: u64,
    pub multiset_min: u64,
    pub multiset_max: u64,
}

/// Single merge-join over the two sorted count maps, producing the exact
/// integer numerators and denominators of both similarities.
pub(crate) fn joint_counts(a: &Fingerprint, b: &Fingerprint) -> JaccardCounts {
    let mut ia = a.counts.iter();
    let mut ib = b.counts.iter();
    let mut x = ia.next();
    let mut y = ib.next();
    let mut inter = 0u64;
    let mut sum_min = 0u64;
    while let (Some((ka, ca)), Some((kb, cb))) = (x, y) {
        match ka.cmp(kb) {
            std::cmp::Ordering::Less => x = ia.next(),
            std::cmp::Ordering::Greater => y = ib.next(),
            std::cmp::Ordering::Equal => {
                inter += 1;
                sum_min += u64::from(*ca.min(cb));
                x = ia.next();
                y = ib.next();
            }
        }
    }
    let union = a.counts.len() as u64 + b.counts.len() as u64 - inter;
    let sum_max = a.total as u64 + b.total as u64 - sum_min;
    JaccardCounts {
        set_inter: inter,
        set_union: union,
        multiset_min: sum_min,
        multiset_max: sum_max,
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        1.0 // J(∅, ∅) := 1
    } else {
        num as f64 / den as f64
    }
}

/// Jaccard similarity |A ∩ B| / |A ∪ B| of two sets, with J(∅, ∅) := 1.
pub fn jaccard_set<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    let inter = a.iter().filter(|t| b.contains(*t)).count() as u64;
    let union = a.len() as u64 + b.len() as u64 - inter;
    ratio(inter, union)
}

/// Multiset Jaccard Σ min(A(t), B(t)) / Σ max(A(t), B(t)), with
/// J(∅, ∅) := 1. Zero multiplicities are treated as absent entries.
/// Coincides with [`jaccard_set`] when every multiplicity is 1.
pub fn jaccard_multiset<T: Eq + Hash>(a: &HashMap<T, u64>, b: &HashMap<T, u64>) -> f64 {
    let mut sum_min = 0u64;
    let mut sum_max = 0u64;
    for (t, &ca) in a {
        let cb = b.get(t).copied().unwrap_or(0);
        sum_min += ca.min(cb);
        sum_max += ca.max(cb);
    }
    for (t, &cb) in b {
        if !a.contains_key(t) {
            sum_max += cb;
        }
    }
    ratio(sum_min, sum_max)
}

/// The dual-threshold test: true iff the set Jaccard meets `t0_threshold`
/// and the multiset Jaccard meets `t1_threshold`, both inclusively and
/// compared exactly. Symmetric. Callers must pass admitted fingerprints of
/// distinct documents.
pub fn is_near_duplicate(a: &Fingerprint, b: &Fingerprint, params: &DetectionParams) -> bool {
    let c = joint_counts(a, b);
    let set_ok = c.set_union == 0 || params.meets_t0(c.set_inter, c.set_union);
    let ms_ok = c.multiset_max == 0 || params.meets_t1(c.multiset_min, c.multiset_max);
    set_ok && ms_ok
}
