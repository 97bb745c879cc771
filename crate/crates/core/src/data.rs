//! Click-log domain model shared by every pipeline stage.
//!
//! All types here are immutable after construction: constructors validate and
//! return new values, so a [`ClickLog`] can be shared read-only across
//! workers without further synchronization.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CLICK_NODE, REL_NODE};
use crate::rng::stream_rng;

/// Column names with fixed meaning in the log format; feature names must not
/// collide with these.
pub const RESERVED_COLUMNS: [&str; 7] = [
    "query_id",
    "doc_id",
    "rank_position",
    "click",
    "true_relevance",
    "freq_bucket",
    "doc_features",
];

/// Data type of a presentation feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    /// Integer levels `1..=cardinality`, where level 1 is the best (as for
    /// ranking position).
    Ordinal,
    /// Integer classes `0..cardinality` with no order.
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub name: String,
    pub kind: FeatureKind,
    /// Number of levels/classes; present iff ordinal or categorical.
    pub cardinality: Option<u32>,
}

/// Ordered, validated set of presentation-feature declarations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    entries: Vec<FeatureEntry>,
}

impl FeatureSchema {
    pub fn new(entries: Vec<FeatureEntry>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for e in &entries {
            if e.name.is_empty() {
                return Err(Error::Schema("feature name must be non-empty".into()));
            }
            if !seen.insert(e.name.clone()) {
                return Err(Error::Schema(format!("duplicate feature name `{}`", e.name)));
            }
            if e.name == REL_NODE || e.name == CLICK_NODE {
                return Err(Error::Schema(format!(
                    "feature name `{}` collides with a reserved graph node",
                    e.name
                )));
            }
            if RESERVED_COLUMNS.contains(&e.name.as_str()) {
                return Err(Error::Schema(format!(
                    "feature name `{}` collides with a reserved column",
                    e.name
                )));
            }
            match e.kind {
                FeatureKind::Continuous => {
                    if e.cardinality.is_some() {
                        return Err(Error::Schema(format!(
                            "continuous feature `{}` must not declare cardinality",
                            e.name
                        )));
                    }
                }
                FeatureKind::Ordinal | FeatureKind::Categorical => match e.cardinality {
                    Some(c) if c >= 2 => {}
                    _ => {
                        return Err(Error::Schema(format!(
                            "feature `{}` must declare cardinality >= 2",
                            e.name
                        )))
                    }
                },
            }
        }
        Ok(FeatureSchema { entries })
    }

    pub fn entries(&self) -> &[FeatureEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }
}

/// One displayed document: identifiers, presentation features, scorer input
/// and the observed click.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpressionRecord {
    pub query_id: String,
    pub doc_id: String,
    /// 1-based display position within the query's result page.
    pub rank_position: u32,
    /// Presentation-feature values, positionally aligned with the schema.
    /// Ordinal/categorical values are stored as their integer level/class.
    pub sepp: Vec<f64>,
    /// Fixed-length input vector for the ranking model.
    pub doc_features: Vec<f64>,
    /// 0 or 1.
    pub click: u8,
    /// Expert grade in `0..=4`; `None` for unannotated training logs
    /// (distinct from grade 0).
    pub true_relevance: Option<u8>,
    /// Query-frequency bucket in `0..=9`; `None` until assigned.
    pub freq_bucket: Option<u8>,
}

/// A named rule broken by a record (or by the log as a whole).
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Index into the log's record list; `None` for log-level rules.
    pub record: Option<usize>,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.record {
            Some(i) => write!(f, "record {}: {}", i, self.rule),
            None => write!(f, "log: {}", self.rule),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryGroup {
    pub query_id: String,
    pub start: usize,
    pub len: usize,
}

/// A validated, query-grouped click log. Within each group records are
/// sorted by `rank_position`; groups keep first-appearance order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClickLog {
    schema: FeatureSchema,
    records: Vec<ImpressionRecord>,
    groups: Vec<QueryGroup>,
}

impl ClickLog {
    /// Groups `records` by query id (stable, first appearance order) and
    /// sorts each group by rank position. Total record count is preserved.
    pub fn group_queries(schema: FeatureSchema, records: Vec<ImpressionRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if r.sepp.len() != schema.len() {
                return Err(Error::Schema(format!(
                    "record {} has {} feature values but the schema declares {}",
                    i,
                    r.sepp.len(),
                    schema.len()
                )));
            }
        }
        let mut order: HashMap<String, usize> = HashMap::new();
        let mut buckets: Vec<Vec<ImpressionRecord>> = Vec::new();
        for r in records {
            let idx = *order.entry(r.query_id.clone()).or_insert_with(|| {
                buckets.push(Vec::new());
                buckets.len() - 1
            });
            buckets[idx].push(r);
        }
        let mut out = Vec::new();
        let mut groups = Vec::new();
        for mut bucket in buckets {
            bucket.sort_by_key(|r| r.rank_position);
            groups.push(QueryGroup {
                query_id: bucket[0].query_id.clone(),
                start: out.len(),
                len: bucket.len(),
            });
            out.extend(bucket);
        }
        Ok(ClickLog {
            schema,
            records: out,
            groups,
        })
    }

    pub fn empty(schema: FeatureSchema) -> Self {
        ClickLog {
            schema,
            records: Vec::new(),
            groups: Vec::new(),
        }
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn records(&self) -> &[ImpressionRecord] {
        &self.records
    }

    pub fn groups(&self) -> &[QueryGroup] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn group_records(&self, g: &QueryGroup) -> &[ImpressionRecord] {
        &self.records[g.start..g.start + g.len]
    }

    /// Dimension of `doc_features`, taken from the first record (0 if empty).
    pub fn doc_feature_dim(&self) -> usize {
        self.records.first().map_or(0, |r| r.doc_features.len())
    }

    /// Returns a new log with the same records but `freq_bucket` replaced.
    /// `assignment` maps query_id -> bucket.
    pub fn with_freq_buckets(&self, assignment: &HashMap<String, u8>) -> Self {
        let mut records = self.records.clone();
        for r in &mut records {
            r.freq_bucket = assignment.get(&r.query_id).copied();
        }
        ClickLog {
            schema: self.schema.clone(),
            records,
            groups: self.groups.clone(),
        }
    }

    /// Deterministically splits queries into (train, eval) parts with
    /// approximately `eval_fraction` of the queries in the eval part.
    pub fn partition_queries(&self, eval_fraction: f64, seed: u64) -> (ClickLog, ClickLog) {
        use rand::seq::SliceRandom;
        let mut idx: Vec<usize> = (0..self.groups.len()).collect();
        idx.shuffle(&mut stream_rng(seed, 0x5e_17));
        let n_eval = ((self.groups.len() as f64) * eval_fraction).round() as usize;
        let eval_set: std::collections::HashSet<usize> = idx.into_iter().take(n_eval).collect();
        let mut train = Vec::new();
        let mut eval = Vec::new();
        for (gi, g) in self.groups.iter().enumerate() {
            let dst = if eval_set.contains(&gi) { &mut eval } else { &mut train };
            dst.extend(self.group_records(g).iter().cloned());
        }
        (
            ClickLog::group_queries(self.schema.clone(), train).expect("schema unchanged"),
            ClickLog::group_queries(self.schema.clone(), eval).expect("schema unchanged"),
        )
    }
}

/// Checks every record-level and log-level invariant, returning one
/// [`Violation`] per broken rule. An empty result means the log is valid.
pub fn validate_log(log: &ClickLog) -> Vec<Violation> {
    let mut out = Vec::new();
    let schema = log.schema();
    let dim = log.doc_feature_dim();
    for (i, r) in log.records().iter().enumerate() {
        if r.rank_position < 1 {
            out.push(Violation {
                record: Some(i),
                rule: "rank_position >= 1".into(),
            });
        }
        if r.click > 1 {
            out.push(Violation {
                record: Some(i),
                rule: "click must be 0 or 1".into(),
            });
        }
        if let Some(g) = r.true_relevance {
            if g > 4 {
                out.push(Violation {
                    record: Some(i),
                    rule: "true_relevance grade must be in 0..=4".into(),
                });
            }
        }
        if let Some(b) = r.freq_bucket {
            if b > 9 {
                out.push(Violation {
                    record: Some(i),
                    rule: "freq_bucket must be in 0..=9".into(),
                });
            }
        }
        if r.doc_features.len() != dim {
            out.push(Violation {
                record: Some(i),
                rule: format!("doc_features length {} != {}", r.doc_features.len(), dim),
            });
        }
        if r.sepp.len() != schema.len() {
            out.push(Violation {
                record: Some(i),
                rule: "sepp values must match the schema".into(),
            });
            continue;
        }
        for (e, &v) in schema.entries().iter().zip(&r.sepp) {
            match e.kind {
                FeatureKind::Continuous => {
                    if !v.is_finite() {
                        out.push(Violation {
                            record: Some(i),
                            rule: format!("feature `{}` must be finite", e.name),
                        });
                    }
                }
                FeatureKind::Ordinal => {
                    let c = e.cardinality.unwrap() as f64;
                    if v.fract() != 0.0 || v < 1.0 || v > c {
                        out.push(Violation {
                            record: Some(i),
                            rule: format!("ordinal feature `{}` must be an integer in 1..={}", e.name, c),
                        });
                    }
                }
                FeatureKind::Categorical => {
                    let c = e.cardinality.unwrap() as f64;
                    if v.fract() != 0.0 || v < 0.0 || v >= c {
                        out.push(Violation {
                            record: Some(i),
                            rule: format!(
                                "categorical feature `{}` must be an integer in 0..{}",
                                e.name, c
                            ),
                        });
                    }
                }
            }
        }
    }
    // Per-group rules: uniqueness of positions, contiguity, sortedness.
    for g in log.groups() {
        let recs = log.group_records(g);
        let mut seen = std::collections::HashSet::new();
        for (off, r) in recs.iter().enumerate() {
            if r.query_id != g.query_id {
                out.push(Violation {
                    record: Some(g.start + off),
                    rule: "query groups must be contiguous".into(),
                });
            }
            if !seen.insert(r.rank_position) {
                out.push(Violation {
                    record: Some(g.start + off),
                    rule: format!(
                        "rank_position {} duplicated within query `{}`",
                        r.rank_position, g.query_id
                    ),
                });
            }
        }
        for w in recs.windows(2) {
            if w[0].rank_position > w[1].rank_position {
                out.push(Violation {
                    record: None,
                    rule: format!("query `{}` not sorted by rank_position", g.query_id),
                });
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_schema() -> FeatureSchema {
        FeatureSchema::new(vec![
            FeatureEntry {
                name: "position".into(),
                kind: FeatureKind::Ordinal,
                cardinality: Some(10),
            },
            FeatureEntry {
                name: "media".into(),
                kind: FeatureKind::Categorical,
                cardinality: Some(3),
            },
            FeatureEntry {
                name: "height".into(),
                kind: FeatureKind::Continuous,
                cardinality: None,
            },
        ])
        .unwrap()
    }

    fn rec(q: &str, d: &str, pos: u32) -> ImpressionRecord {
        ImpressionRecord {
            query_id: q.into(),
            doc_id: d.into(),
            rank_position: pos,
            sepp: vec![pos as f64, 1.0, 100.0],
            doc_features: vec![0.5, -0.5],
            click: 0,
            true_relevance: None,
            freq_bucket: None,
        }
    }

    #[test]
    fn empty_log_has_no_violations() {
        let log = ClickLog::empty(tiny_schema());
        assert!(validate_log(&log).is_empty());
    }

    #[test]
    fn zero_rank_position_flagged() {
        let mut r = rec("q1", "d1", 1);
        r.rank_position = 0;
        r.sepp[0] = 1.0; // keep the ordinal feature itself valid
        let log = ClickLog::group_queries(tiny_schema(), vec![r]).unwrap();
        let v = validate_log(&log);
        assert_eq!(v.len(), 1);
        assert!(v[0].rule.contains("rank_position >= 1"), "{}", v[0]);
    }

    #[test]
    fn duplicate_position_flagged_once() {
        let log =
            ClickLog::group_queries(tiny_schema(), vec![rec("q1", "d1", 2), rec("q1", "d2", 2)])
                .unwrap();
        let v = validate_log(&log);
        assert_eq!(v.len(), 1);
        assert!(v[0].rule.contains("duplicated"));
    }

    #[test]
    fn grouping_counts_and_sizes() {
        let log = ClickLog::group_queries(
            tiny_schema(),
            vec![rec("a", "d1", 2), rec("b", "d2", 1), rec("a", "d3", 1)],
        )
        .unwrap();
        assert_eq!(log.len(), 3);
        assert_eq!(log.groups().len(), 2);
        let sizes: Vec<usize> = log.groups().iter().map(|g| g.len).collect();
        assert_eq!(sizes, vec![2, 1]);
        // within-group sort by position
        assert_eq!(log.records()[0].doc_id, "d3");
        assert_eq!(log.records()[1].doc_id, "d1");
    }

    #[test]
    fn grouping_zero_records() {
        let log = ClickLog::group_queries(tiny_schema(), vec![]).unwrap();
        assert!(log.is_empty());
        assert!(log.groups().is_empty());
    }

    #[test]
    fn grouping_is_idempotent_and_order_insensitive_within_query() {
        let sorted = ClickLog::group_queries(
            tiny_schema(),
            vec![rec("a", "d1", 1), rec("a", "d2", 2), rec("b", "d3", 1)],
        )
        .unwrap();
        let shuffled = ClickLog::group_queries(
            tiny_schema(),
            vec![rec("a", "d2", 2), rec("a", "d1", 1), rec("b", "d3", 1)],
        )
        .unwrap();
        assert_eq!(sorted, shuffled);
        let regrouped =
            ClickLog::group_queries(sorted.schema().clone(), sorted.records().to_vec()).unwrap();
        assert_eq!(sorted, regrouped);
    }

    #[test]
    fn schema_rejects_duplicates_and_bad_cardinality() {
        assert!(FeatureSchema::new(vec![
            FeatureEntry {
                name: "x".into(),
                kind: FeatureKind::Continuous,
                cardinality: None
            },
            FeatureEntry {
                name: "x".into(),
                kind: FeatureKind::Continuous,
                cardinality: None
            },
        ])
        .is_err());
        assert!(FeatureSchema::new(vec![FeatureEntry {
            name: "m".into(),
            kind: FeatureKind::Categorical,
            cardinality: Some(1),
        }])
        .is_err());
        assert!(FeatureSchema::new(vec![FeatureEntry {
            name: "REL".into(),
            kind: FeatureKind::Continuous,
            cardinality: None,
        }])
        .is_err());
    }

    #[test]
    fn categorical_out_of_range_flagged() {
        let mut r = rec("q", "d", 1);
        r.sepp[1] = 3.0; // cardinality is 3, classes are 0..3
        let log = ClickLog::group_queries(tiny_schema(), vec![r]).unwrap();
        let v = validate_log(&log);
        assert_eq!(v.len(), 1);
        assert!(v[0].rule.contains("categorical"));
    }
}
