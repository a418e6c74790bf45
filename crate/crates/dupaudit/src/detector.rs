//! The all-pairs near-duplicate join and transitive clustering.
//!
//! The join compares every admissible fingerprint pair and keeps the pairs
//! passing [`is_near_duplicate`](crate::fingerprint::is_near_duplicate).
//! Two exact prunings keep the pair space
//! small without changing the result:
//!
//! * size filtering — `J(T1_i, T1_j) ≤ min(n_i, n_j) / max(n_i, n_j)`, so
//!   documents whose token counts are too far apart can be skipped, and
//!   the analogous bound on `|T0|` prunes individual candidates;
//! * token indexing — a pair sharing zero tokens has Jaccard 0, so
//!   candidates only come from an inverted token → document index.
//!
//! Both are sound: they only discard pairs that provably fail the
//! thresholds. Groups are the connected components of the surviving pair
//! graph (similarity is assumed transitive), computed with a disjoint-set
//! union. The report is canonically ordered, so the output is identical
//! for any worker count.

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use crate::corpus::TokenDocument;
use crate::error::{Error, Result};
use crate::fingerprint::{build_fingerprint, DetectionParams, Fingerprint, Undersized};

/// A set of mutually near-duplicate file ids, size ≥ 2, members sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicateGroup {
    members: Vec<String>,
}

impl DuplicateGroup {
    /// Builds a group from at least two distinct ids; members are sorted.
    pub fn new(mut members: Vec<String>) -> Result<Self> {
        members.sort();
        members.dedup();
        if members.len() < 2 {
            return Err(Error::InvalidReport(format!(
                "duplicate group needs at least two distinct members, got {members:?}"
            )));
        }
        Ok(Self { members })
    }

    /// Members in lexicographic order.
    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a group always has at least two members
    }

    pub fn contains(&self, id: &str) -> bool {
        self.members
            .binary_search_by(|m| m.as_str().cmp(id))
            .is_ok()
    }

    /// The lexicographically smallest member, the group's representative.
    pub fn representative(&self) -> &str {
        &self.members[0]
    }
}

/// The admitted universe plus its disjoint near-duplicate groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicationReport {
    universe: BTreeSet<String>,
    groups: Vec<DuplicateGroup>,
    group_of: HashMap<String, usize>,
}

impl DuplicationReport {
    /// Validates that groups are pairwise disjoint and contained in the
    /// universe, and stores them sorted by smallest member.
    pub fn new<I, S>(universe: I, mut groups: Vec<DuplicateGroup>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let universe: BTreeSet<String> = universe.into_iter().map(Into::into).collect();
        groups.sort_by(|a, b| a.representative().cmp(b.representative()));
        let mut group_of = HashMap::new();
        for (idx, group) in groups.iter().enumerate() {
            for id in group.members() {
                if !universe.contains(id) {
                    return Err(Error::InvalidReport(format!(
                        "group member {id:?} is not in the universe"
                    )));
                }
                if group_of.insert(id.clone(), idx).is_some() {
                    return Err(Error::InvalidReport(format!(
                        "id {id:?} appears in more than one group"
                    )));
                }
            }
        }
        Ok(Self {
            universe,
            groups,
            group_of,
        })
    }

    /// All admitted ids in lexicographic order.
    pub fn universe(&self) -> &BTreeSet<String> {
        &self.universe
    }

    /// Groups sorted by their smallest member.
    pub fn groups(&self) -> &[DuplicateGroup] {
        &self.groups
    }

    /// The group containing `id`, if it is duplicated.
    pub fn group_of(&self, id: &str) -> Option<&DuplicateGroup> {
        self.group_of.get(id).map(|&idx| &self.groups[idx])
    }

    /// Size of the group containing `id` (1 for singletons in the
    /// universe, `None` for unknown ids).
    pub fn group_size_of(&self, id: &str) -> Option<usize> {
        if let Some(g) = self.group_of(id) {
            Some(g.len())
        } else if self.universe.contains(id) {
            Some(1)
        } else {
            None
        }
    }

    /// Number of duplicated files, Σ over groups of the group size.
    pub fn duplicated_file_count(&self) -> usize {
        self.groups.iter().map(DuplicateGroup::len).sum()
    }

    /// `|X|`: the number of unique items — groups count once, singletons
    /// count once each.
    pub fn unique_count(&self) -> usize {
        self.universe.len() - self.duplicated_file_count() + self.groups.len()
    }
}

/// Which exact prunings the join applies. Disabling both degrades to the
/// brute-force all-pairs scan used as the test oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JoinOptions {
    pub size_pruning: bool,
    pub token_index: bool,
}

impl Default for JoinOptions {
    fn default() -> Self {
        Self {
            size_pruning: true,
            token_index: true,
        }
    }
}

/// Sound candidate pruning: false only when the pair provably fails
/// [`is_near_duplicate`](crate::fingerprint::is_near_duplicate) by the size bounds
/// `J_set ≤ min(|T0_i|,|T0_j|)/max(|T0_i|,|T0_j|)` and
/// `J_multiset ≤ min(n_i,n_j)/max(n_i,n_j)`. Bounds compare inclusively.
pub fn candidate_admissible(a: &Fingerprint, b: &Fingerprint, params: &DetectionParams) -> bool {
    let (da, db) = (a.distinct_count() as u64, b.distinct_count() as u64);
    let (na, nb) = (a.token_count() as u64, b.token_count() as u64);
    let set_bound = if da.max(db) == 0 {
        true
    } else {
        params.meets_t0(da.min(db), da.max(db))
    };
    let ms_bound = if na.max(nb) == 0 {
        true
    } else {
        params.meets_t1(na.min(nb), na.max(nb))
    };
    set_bound && ms_bound
}

// Interned view of a fingerprint used inside the join: token symbols
// sorted, so pair verification is a merge join over u32s.
struct CompactPrint {
    fp_index: usize,
    syms: Vec<(u32, u32)>,
    total: u64,
}

impl CompactPrint {
    fn distinct(&self) -> u64 {
        self.syms.len() as u64
    }
}

fn verify(a: &CompactPrint, b: &CompactPrint, params: &DetectionParams) -> bool {
    let mut ia = a.syms.iter();
    let mut ib = b.syms.iter();
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
    let union = a.distinct() + b.distinct() - inter;
    let sum_max = a.total + b.total - sum_min;
    let set_ok = union == 0 || params.meets_t0(inter, union);
    let ms_ok = sum_max == 0 || params.meets_t1(sum_min, sum_max);
    set_ok && ms_ok
}

/// All unordered near-duplicate pairs under the default prunings,
/// canonically ordered: each pair is `(min_id, max_id)` and the list is
/// sorted. Runs data-parallel on the current rayon pool; the result does
/// not depend on the worker count.
pub fn detect_pairs(
    fingerprints: &[Fingerprint],
    params: &DetectionParams,
) -> Vec<(String, String)> {
    detect_pairs_with(fingerprints, params, &JoinOptions::default())
}

/// [`detect_pairs`] with explicit pruning options; all option combinations
/// produce identical pairs.
pub fn detect_pairs_with(
    fingerprints: &[Fingerprint],
    params: &DetectionParams,
    options: &JoinOptions,
) -> Vec<(String, String)> {
    if fingerprints.len() < 2 {
        return Vec::new();
    }

    // Intern token lexemes so the hot loop never touches strings.
    let mut symbols: HashMap<&str, u32> = HashMap::new();
    let mut prints: Vec<CompactPrint> = fingerprints
        .iter()
        .enumerate()
        .map(|(fp_index, fp)| {
            let mut syms: Vec<(u32, u32)> = fp
                .counts()
                .iter()
                .map(|(token, &count)| {
                    let next = symbols.len() as u32;
                    let sym = *symbols.entry(token.as_str()).or_insert(next);
                    (sym, count)
                })
                .collect();
            syms.sort_unstable();
            CompactPrint {
                fp_index,
                syms,
                total: fp.token_count() as u64,
            }
        })
        .collect();

    // Ascending token count; ties broken by doc id so the scan order is
    // deterministic.
    prints.sort_by(|a, b| {
        a.total.cmp(&b.total).then_with(|| {
            fingerprints[a.fp_index]
                .doc_id()
                .cmp(fingerprints[b.fp_index].doc_id())
        })
    });

    // Inverted index over positions in the sorted order; postings are
    // ascending by construction.
    let postings: HashMap<u32, Vec<u32>> = if options.token_index {
        let mut map: HashMap<u32, Vec<u32>> = HashMap::new();
        for (pos, print) in prints.iter().enumerate() {
            for &(sym, _) in &print.syms {
                map.entry(sym).or_default().push(pos as u32);
            }
        }
        map
    } else {
        HashMap::new()
    };

    let mut pairs: Vec<(String, String)> = (0..prints.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = &prints[i];
            // Largest position whose token count still satisfies the
            // multiset size bound against `a` (everything, if size
            // pruning is off).
            let upper = if options.size_pruning {
                let mut lo = i + 1;
                let mut hi = prints.len();
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if params.meets_t1(a.total, prints[mid].total) {
                        lo = mid + 1;
                    } else {
                        hi = mid;
                    }
                }
                lo
            } else {
                prints.len()
            };

            let candidates: Vec<usize> = if options.token_index {
                let mut seen: Vec<usize> = Vec::new();
                for &(sym, _) in &a.syms {
                    let posting = &postings[&sym];
                    let start = posting.partition_point(|&p| p as usize <= i);
                    for &p in &posting[start..] {
                        let p = p as usize;
                        if p >= upper {
                            break;
                        }
                        seen.push(p);
                    }
                }
                seen.sort_unstable();
                seen.dedup();
                seen
            } else {
                (i + 1..upper).collect()
            };

            let mut found: Vec<(String, String)> = Vec::new();
            for j in candidates {
                let b = &prints[j];
                if options.size_pruning {
                    let (da, db) = (a.distinct(), b.distinct());
                    if !params.meets_t0(da.min(db), da.max(db)) {
                        continue;
                    }
                }
                if verify(a, b, params) {
                    let ida = fingerprints[a.fp_index].doc_id();
                    let idb = fingerprints[b.fp_index].doc_id();
                    let (lo, hi) = if ida <= idb { (ida, idb) } else { (idb, ida) };
                    found.push((lo.to_string(), hi.to_string()));
                }
            }
            found
        })
        .collect();

    pairs.sort();
    pairs
}

// Disjoint-set union with path halving and union by size.
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, x: usize, y: usize) {
        let (mut rx, mut ry) = (self.find(x), self.find(y));
        if rx == ry {
            return;
        }
        if self.size[rx] < self.size[ry] {
            std::mem::swap(&mut rx, &mut ry);
        }
        self.parent[ry] = rx;
        self.size[rx] += self.size[ry];
    }
}

/// Connected components of the pair graph with at least two nodes, under
/// the transitivity assumption. Pair endpoints must lie in `universe`.
pub fn cluster<I, S>(pairs: &[(String, String)], universe: I) -> Result<DuplicationReport>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let universe: BTreeSet<String> = universe.into_iter().map(Into::into).collect();
    let index: HashMap<&str, usize> = universe
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let mut uf = UnionFind::new(universe.len());
    for (a, b) in pairs {
        let (ia, ib) = match (index.get(a.as_str()), index.get(b.as_str())) {
            (Some(&ia), Some(&ib)) => (ia, ib),
            _ => {
                let missing = if index.contains_key(a.as_str()) { b } else { a };
                return Err(Error::InvalidReport(format!(
                    "pair endpoint {missing:?} is not in the universe"
                )));
            }
        };
        uf.union(ia, ib);
    }

    let ids: Vec<&String> = universe.iter().collect();
    let mut components: HashMap<usize, Vec<String>> = HashMap::new();
    for (i, id) in ids.iter().enumerate() {
        let root = uf.find(i);
        components.entry(root).or_default().push((*id).clone());
    }
    let groups: Vec<DuplicateGroup> = components
        .into_values()
        .filter(|members| members.len() >= 2)
        .map(DuplicateGroup::new)
        .collect::<Result<_>>()?;

    DuplicationReport::new(universe, groups)
}

/// End-to-end detection: fingerprint, join, cluster. The universe is the
/// set of admitted ids; undersized documents are returned alongside, in
/// input order. Ids must be unique.
pub fn detect(
    corpus: &[TokenDocument],
    params: &DetectionParams,
) -> Result<(DuplicationReport, Vec<Undersized>)> {
    detect_with(corpus, params, &JoinOptions::default())
}

/// [`detect`] with explicit join options.
pub fn detect_with(
    corpus: &[TokenDocument],
    params: &DetectionParams,
    options: &JoinOptions,
) -> Result<(DuplicationReport, Vec<Undersized>)> {
    let mut seen: HashSet<&str> = HashSet::with_capacity(corpus.len());
    for doc in corpus {
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::InvalidParams(format!(
                "duplicate document id {:?} in corpus",
                doc.id
            )));
        }
    }

    let mut admitted = Vec::new();
    let mut undersized = Vec::new();
    for doc in corpus {
        match build_fingerprint(doc, params) {
            Ok(fp) => admitted.push(fp),
            Err(u) => undersized.push(u),
        }
    }

    let pairs = detect_pairs_with(&admitted, params, options);
    let report = cluster(&pairs, admitted.iter().map(|fp| fp.doc_id().to_string()))?;
    Ok((report, undersized))
}

/// Brute-force all-pairs detection without any pruning. Same contract as
/// [`detect_pairs`]; kept public so equivalence can be checked end to end.
pub fn detect_pairs_brute_force(
    fingerprints: &[Fingerprint],
    params: &DetectionParams,
) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    for i in 0..fingerprints.len() {
        for j in i + 1..fingerprints.len() {
            if crate::fingerprint::is_near_duplicate(&fingerprints[i], &fingerprints[j], params) {
                let (a, b) = (fingerprints[i].doc_id(), fingerprints[j].doc_id());
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                pairs.push((lo.to_string(), hi.to_string()));
            }
        }
    }
    pairs.sort();
    pairs
}
