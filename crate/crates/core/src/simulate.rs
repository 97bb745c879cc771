//! Synthetic biased click logs from a structural causal model with known
//! ground truth.
//!
//! Per query, the generator samples in a fixed order: true relevance grade
//! `r` per document, logged score `score = r + Normal(0, score_noise_sd)`,
//! display position by descending score, multimedia type from a
//! score-bin-conditional table, snippet height from a per-media Gaussian, a
//! running maximum of heights, and finally a Bernoulli click whose logit is
//!
//! ```text
//! a_rel * r + b_pos / log2(rank + 1) + d_media[m] + e_height * z(height) + b0
//! ```
//!
//! Score bins and the height standardization use the *theoretical* population
//! distribution implied by the config, so per-query generation is independent
//! and parallel generation reproduces the serial output exactly.
//!
//! The scorer input `doc_features` is built so that part of the logging
//! noise is visible to the ranker (dimension 0 is the logged score itself,
//! dimensions 3-4 correlate with the logging error). A naive click-trained
//! ranker is thereby rewarded for chasing presentation exposure; this is the
//! failure the debiasing loop exists to correct.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};
use std::collections::HashMap;

use crate::data::{ClickLog, FeatureEntry, FeatureKind, FeatureSchema, ImpressionRecord};
use crate::error::{Error, Result};
use crate::graph::{CausalGraph, CLICK_NODE, REL_NODE};
use crate::rng::stream_rng;

/// Number of equal-probability score bins driving the media-type table.
pub const SCORE_BINS: usize = 5;
/// Dimension of the generated `doc_features` vectors.
pub const DOC_FEATURE_DIM: usize = 8;

pub const POSITION_FEATURE: &str = "position";
pub const MEDIA_FEATURE: &str = "media";
pub const HEIGHT_FEATURE: &str = "height";
pub const MAX_HEIGHT_FEATURE: &str = "max_height";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClickCoeffs {
    pub a_rel: f64,
    pub b_pos: f64,
    pub d_media: Vec<f64>,
    pub e_height: f64,
    pub b0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmConfig {
    pub n_queries: usize,
    pub docs_per_query: usize,
    /// Probability of each grade 0..=4; must sum to 1.
    pub relevance_prior: Vec<f64>,
    /// Noise linking true relevance to the logged score.
    pub score_noise_sd: f64,
    /// Row-stochastic `SCORE_BINS x n_media` table.
    pub media_given_score: Vec<Vec<f64>>,
    /// Per-media (mean, sd) of snippet height.
    pub height_given_media: Vec<(f64, f64)>,
    pub click_coeffs: ClickCoeffs,
    pub seed: u64,
}

impl ScmConfig {
    pub fn n_media(&self) -> usize {
        self.height_given_media.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.docs_per_query < 2 {
            return Err(Error::Config("docs_per_query must be >= 2".into()));
        }
        if self.relevance_prior.len() != 5 {
            return Err(Error::Config("relevance_prior must cover grades 0..=4".into()));
        }
        let sum: f64 = self.relevance_prior.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.relevance_prior.iter().any(|&p| p < 0.0) {
            return Err(Error::Config("relevance_prior must be a probability vector".into()));
        }
        if self.score_noise_sd < 0.0 {
            return Err(Error::Config("score_noise_sd must be >= 0".into()));
        }
        if self.media_given_score.len() != SCORE_BINS {
            return Err(Error::Config(format!(
                "media_given_score must have {SCORE_BINS} rows"
            )));
        }
        let m = self.n_media();
        if m < 2 {
            return Err(Error::Config("at least two media types required".into()));
        }
        for row in &self.media_given_score {
            if row.len() != m {
                return Err(Error::Config(
                    "media_given_score rows must match height_given_media length".into(),
                ));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 || row.iter().any(|&p| p < 0.0) {
                return Err(Error::Config("media_given_score rows must sum to 1".into()));
            }
        }
        if self.height_given_media.iter().any(|&(_, sd)| sd < 0.0) {
            return Err(Error::Config("height sd must be >= 0".into()));
        }
        if self.click_coeffs.d_media.len() != m {
            return Err(Error::Config("d_media length must match media count".into()));
        }
        Ok(())
    }

    pub fn schema(&self) -> FeatureSchema {
        FeatureSchema::new(vec![
            FeatureEntry {
                name: POSITION_FEATURE.into(),
                kind: FeatureKind::Ordinal,
                cardinality: Some(self.docs_per_query as u32),
            },
            FeatureEntry {
                name: MEDIA_FEATURE.into(),
                kind: FeatureKind::Categorical,
                cardinality: Some(self.n_media() as u32),
            },
            FeatureEntry {
                name: HEIGHT_FEATURE.into(),
                kind: FeatureKind::Continuous,
                cardinality: None,
            },
            FeatureEntry {
                name: MAX_HEIGHT_FEATURE.into(),
                kind: FeatureKind::Continuous,
                cardinality: None,
            },
        ])
        .expect("simulator schema is valid")
    }
}

/// A workable default: position and media-type click biases on, height bias
/// off, matching the graph shape targeted by the discovery tests.
pub fn default_config(seed: u64) -> ScmConfig {
    ScmConfig {
        n_queries: 2000,
        docs_per_query: 10,
        relevance_prior: vec![0.30, 0.25, 0.20, 0.15, 0.10],
        score_noise_sd: 1.0,
        media_given_score: vec![
            vec![0.70, 0.15, 0.10, 0.05],
            vec![0.55, 0.20, 0.15, 0.10],
            vec![0.35, 0.25, 0.25, 0.15],
            vec![0.20, 0.25, 0.30, 0.25],
            vec![0.10, 0.20, 0.30, 0.40],
        ],
        height_given_media: vec![(120.0, 15.0), (220.0, 25.0), (320.0, 30.0), (180.0, 20.0)],
        click_coeffs: ClickCoeffs {
            a_rel: 1.0,
            b_pos: 1.2,
            d_media: vec![0.0, 0.35, 0.70, -0.40],
            e_height: 0.0,
            b0: -3.0,
        },
        seed,
    }
}

/// Same mechanism with every presentation effect on the click switched off.
pub fn unconfounded_config(seed: u64) -> ScmConfig {
    let mut cfg = default_config(seed);
    cfg.click_coeffs.b_pos = 0.0;
    cfg.click_coeffs.d_media = vec![0.0; cfg.n_media()];
    cfg.click_coeffs.e_height = 0.0;
    cfg.click_coeffs.b0 = -2.0;
    cfg
}

/// Everything the generator knows that a real log would hide.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub graph: CausalGraph,
    /// Grade per record, aligned with the log's record order.
    pub true_relevance: Vec<u8>,
    /// Closed-form click probability per record.
    pub click_probs: Vec<f64>,
    /// Human-readable description of the click-probability function.
    pub click_model: String,
}

/// Fixed decreasing exposure curve over display ranks.
pub fn position_exposure(rank: u32) -> f64 {
    1.0 / ((rank as f64) + 1.0).log2()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Theoretical CDF of the logged score `r + Normal(0, sd)` under the grade
/// prior.
fn score_cdf(cfg: &ScmConfig, t: f64) -> f64 {
    if cfg.score_noise_sd > 0.0 {
        let n = NormalDist::new(0.0, 1.0).unwrap();
        cfg.relevance_prior
            .iter()
            .enumerate()
            .map(|(g, &p)| p * n.cdf((t - g as f64) / cfg.score_noise_sd))
            .sum()
    } else {
        cfg.relevance_prior
            .iter()
            .enumerate()
            .filter(|&(g, _)| (g as f64) <= t)
            .map(|(_, &p)| p)
            .sum()
    }
}

/// Cut points splitting the score population into `SCORE_BINS`
/// equal-probability bins.
pub fn score_bin_cuts(cfg: &ScmConfig) -> Vec<f64> {
    (1..SCORE_BINS)
        .map(|k| {
            let q = k as f64 / SCORE_BINS as f64;
            let (mut lo, mut hi) = (-12.0, 16.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if score_cdf(cfg, mid) < q {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

fn score_bin(cuts: &[f64], score: f64) -> usize {
    cuts.iter().filter(|&&c| score > c).count()
}

/// Theoretical (mean, sd) of height under the config's media marginal.
fn height_population_moments(cfg: &ScmConfig) -> (f64, f64) {
    let m = cfg.n_media();
    let mut p_media = vec![0.0; m];
    for row in &cfg.media_given_score {
        for (j, &p) in row.iter().enumerate() {
            p_media[j] += p / SCORE_BINS as f64;
        }
    }
    let mean: f64 = p_media
        .iter()
        .zip(&cfg.height_given_media)
        .map(|(&p, &(mu, _))| p * mu)
        .sum();
    let second: f64 = p_media
        .iter()
        .zip(&cfg.height_given_media)
        .map(|(&p, &(mu, sd))| p * (sd * sd + mu * mu))
        .sum();
    let var = (second - mean * mean).max(0.0);
    (mean, var.sqrt())
}

struct QueryOutput {
    records: Vec<ImpressionRecord>,
    grades: Vec<u8>,
    probs: Vec<f64>,
}

fn generate_query(cfg: &ScmConfig, cuts: &[f64], height_mean: f64, height_sd: f64, qi: usize) -> QueryOutput {
    let mut rng = stream_rng(cfg.seed, qi as u64);
    let k = cfg.docs_per_query;
    let mut grades = Vec::with_capacity(k);
    let mut scores = Vec::with_capacity(k);
    let mut features = Vec::with_capacity(k);

    let cum: Vec<f64> = cfg
        .relevance_prior
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect();

    for _ in 0..k {
        let u: f64 = rng.random();
        let grade = cum.iter().position(|&c| u < c).unwrap_or(4) as u8;
        let z: f64 = StandardNormal.sample(&mut rng);
        let eps = cfg.score_noise_sd * z;
        let score = grade as f64 + eps;
        let r = grade as f64;
        // Dimension 0 carries the logged score itself; 1-2 refine relevance;
        // 3-4 leak the logging error; 5-7 are pure noise.
        let noise = |rng: &mut rand_chacha::ChaCha8Rng, sd: f64| -> f64 {
            let z: f64 = StandardNormal.sample(rng);
            sd * z
        };
        let f = vec![
            score,
            r + noise(&mut rng, 0.7),
            r + noise(&mut rng, 1.2),
            eps + noise(&mut rng, 0.5),
            eps + noise(&mut rng, 1.0),
            noise(&mut rng, 1.0),
            noise(&mut rng, 1.0),
            noise(&mut rng, 1.0),
        ];
        debug_assert_eq!(f.len(), DOC_FEATURE_DIM);
        grades.push(grade);
        scores.push(score);
        features.push(f);
    }

    // Rank by descending logged score, ties by document index.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut media = vec![0usize; k];
    let mut height = vec![0.0f64; k];
    let mut max_height = vec![0.0f64; k];
    let mut running = f64::NEG_INFINITY;
    for (rank0, &doc) in order.iter().enumerate() {
        let bin = score_bin(cuts, scores[doc]);
        let row = &cfg.media_given_score[bin];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut m = row.len() - 1;
        for (j, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                m = j;
                break;
            }
        }
        let (mu, sd) = cfg.height_given_media[m];
        let z: f64 = StandardNormal.sample(&mut rng);
        let h = mu + sd * z;
        running = running.max(h);
        media[rank0] = m;
        height[rank0] = h;
        max_height[rank0] = running;
    }

    let mut records = Vec::with_capacity(k);
    let mut out_grades = Vec::with_capacity(k);
    let mut probs = Vec::with_capacity(k);
    for (rank0, &doc) in order.iter().enumerate() {
        let rank = (rank0 + 1) as u32;
        let c = &cfg.click_coeffs;
        let hz = if height_sd > 0.0 {
            (height[rank0] - height_mean) / height_sd
        } else {
            0.0
        };
        let logit = c.a_rel * grades[doc] as f64
            + c.b_pos * position_exposure(rank)
            + c.d_media[media[rank0]]
            + c.e_height * hz
            + c.b0;
        let p = sigmoid(logit);
        let u: f64 = rng.random();
        let click = u8::from(u < p);
        records.push(ImpressionRecord {
            query_id: format!("q{qi:06}"),
            doc_id: format!("q{qi:06}d{doc:02}"),
            rank_position: rank,
            sepp: vec![
                rank as f64,
                media[rank0] as f64,
                height[rank0],
                max_height[rank0],
            ],
            doc_features: features[doc].clone(),
            click,
            true_relevance: Some(grades[doc]),
            freq_bucket: None,
        });
        out_grades.push(grades[doc]);
        probs.push(p);
    }
    QueryOutput {
        records,
        grades: out_grades,
        probs,
    }
}

/// Generates a biased click log plus the ground truth behind it.
/// Deterministic for a given config; per-query streams make parallel and
/// serial generation identical.
pub fn generate(cfg: &ScmConfig) -> Result<(ClickLog, GroundTruth)> {
    cfg.validate()?;
    let cuts = score_bin_cuts(cfg);
    let (hm, hs) = height_population_moments(cfg);
    let outputs: Vec<QueryOutput> = (0..cfg.n_queries)
        .into_par_iter()
        .map(|qi| generate_query(cfg, &cuts, hm, hs, qi))
        .collect();
    let mut records = Vec::with_capacity(cfg.n_queries * cfg.docs_per_query);
    let mut grades = Vec::new();
    let mut probs = Vec::new();
    for q in outputs {
        records.extend(q.records);
        grades.extend(q.grades);
        probs.extend(q.probs);
    }
    let log = ClickLog::group_queries(cfg.schema(), records)?;
    let truth = GroundTruth {
        graph: ground_truth_graph(cfg)?,
        true_relevance: grades,
        click_probs: probs,
        click_model: format!(
            "sigmoid({}*r + {}/log2(rank+1) + d_media[m] + {}*z(height) + {})",
            cfg.click_coeffs.a_rel, cfg.click_coeffs.b_pos, cfg.click_coeffs.e_height, cfg.click_coeffs.b0
        ),
    };
    Ok((log, truth))
}

/// The generating DAG. Edges into CLICK appear only when the corresponding
/// coefficient actually moves the click probability.
pub fn ground_truth_graph(cfg: &ScmConfig) -> Result<CausalGraph> {
    cfg.validate()?;
    let mut g = CausalGraph::new(vec![
        REL_NODE.into(),
        CLICK_NODE.into(),
        POSITION_FEATURE.into(),
        MEDIA_FEATURE.into(),
        HEIGHT_FEATURE.into(),
        MAX_HEIGHT_FEATURE.into(),
    ])?;
    g.add_directed(REL_NODE, CLICK_NODE)?;
    g.add_directed(REL_NODE, POSITION_FEATURE)?;
    g.add_directed(REL_NODE, MEDIA_FEATURE)?;
    g.add_directed(MEDIA_FEATURE, HEIGHT_FEATURE)?;
    g.add_directed(HEIGHT_FEATURE, MAX_HEIGHT_FEATURE)?;
    let c = &cfg.click_coeffs;
    if c.b_pos != 0.0 {
        g.add_directed(POSITION_FEATURE, CLICK_NODE)?;
    }
    let spread = c.d_media.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - c.d_media.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread > 0.0 {
        g.add_directed(MEDIA_FEATURE, CLICK_NODE)?;
    }
    if c.e_height != 0.0 {
        g.add_directed(HEIGHT_FEATURE, CLICK_NODE)?;
    }
    Ok(g)
}

/// Ranks queries by impression count (descending, ties by query id) and
/// splits the ranking into `n_buckets` equal slices; bucket 0 holds the most
/// frequent queries.
pub fn assign_frequency_buckets(log: &ClickLog, n_buckets: usize) -> Result<ClickLog> {
    if n_buckets < 1 || n_buckets > 10 {
        return Err(Error::Config("n_buckets must be in 1..=10".into()));
    }
    let mut counts: Vec<(&str, usize)> = log
        .groups()
        .iter()
        .map(|g| (g.query_id.as_str(), g.len))
        .collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let n = counts.len().max(1);
    let assignment: HashMap<String, u8> = counts
        .iter()
        .enumerate()
        .map(|(i, &(q, _))| (q.to_string(), ((i * n_buckets) / n) as u8))
        .collect();
    Ok(log.with_freq_buckets(&assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::validate_log;

    #[test]
    fn empty_log_still_emits_ground_truth() {
        let mut cfg = default_config(1);
        cfg.n_queries = 0;
        let (log, truth) = generate(&cfg).unwrap();
        assert!(log.is_empty());
        assert!(truth.graph.has_directed(REL_NODE, CLICK_NODE));
    }

    #[test]
    fn rejects_negative_noise() {
        let mut cfg = default_config(1);
        cfg.score_noise_sd = -0.1;
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = default_config(99);
        let (a, ta) = generate(&cfg).unwrap();
        let (b, tb) = generate(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta.click_probs, tb.click_probs);
    }

    #[test]
    fn generated_log_validates() {
        let mut cfg = default_config(5);
        cfg.n_queries = 50;
        let (log, _) = generate(&cfg).unwrap();
        assert!(validate_log(&log).is_empty());
    }

    #[test]
    fn symmetric_click_rate_is_half() {
        // With a_rel=1, b0=-2 and a uniform grade prior, logits are
        // {-2,-1,0,1,2}; sigmoid symmetry makes the population rate exactly
        // one half.
        let mut cfg = default_config(7);
        cfg.n_queries = 2000;
        cfg.relevance_prior = vec![0.2; 5];
        cfg.click_coeffs = ClickCoeffs {
            a_rel: 1.0,
            b_pos: 0.0,
            d_media: vec![0.0; 4],
            e_height: 0.0,
            b0: -2.0,
        };
        let analytic: f64 = (0..5).map(|g| sigmoid(g as f64 - 2.0)).sum::<f64>() / 5.0;
        assert!((analytic - 0.5).abs() < 1e-12);
        let (log, _) = generate(&cfg).unwrap();
        let n = log.len() as f64;
        let rate = log.records().iter().map(|r| r.click as f64).sum::<f64>() / n;
        let se = (0.25 / n).sqrt();
        assert!((rate - 0.5).abs() < 3.0 * se, "rate {rate}");
    }

    #[test]
    fn per_rank_ctr_matches_closed_form_and_decays() {
        let mut cfg = default_config(11);
        cfg.n_queries = 5000; // 50k impressions
        let (log, truth) = generate(&cfg).unwrap();
        let k = cfg.docs_per_query;
        let mut clicks = vec![0.0; k];
        let mut expect = vec![0.0; k];
        let mut var = vec![0.0; k];
        let mut n = vec![0.0; k];
        for (r, &p) in log.records().iter().zip(&truth.click_probs) {
            let i = (r.rank_position - 1) as usize;
            clicks[i] += r.click as f64;
            expect[i] += p;
            var[i] += p * (1.0 - p);
            n[i] += 1.0;
        }
        for i in 0..k {
            let se = var[i].sqrt() / n[i];
            let diff = (clicks[i] - expect[i]).abs() / n[i];
            assert!(diff < 3.0 * se + 1e-12, "rank {} off by {diff}", i + 1);
        }
        assert!(
            clicks[0] / n[0] > clicks[k - 1] / n[k - 1],
            "CTR must decay from rank 1 to rank {k}"
        );
    }

    #[test]
    fn grade_marginal_matches_prior() {
        let mut cfg = default_config(13);
        cfg.n_queries = 2000;
        let (log, _) = generate(&cfg).unwrap();
        let n = log.len() as f64;
        for g in 0..5u8 {
            let freq = log
                .records()
                .iter()
                .filter(|r| r.true_relevance == Some(g))
                .count() as f64
                / n;
            let p = cfg.relevance_prior[g as usize];
            let se = (p * (1.0 - p) / n).sqrt();
            assert!((freq - p).abs() < 3.0 * se + 1e-12, "grade {g}: {freq} vs {p}");
        }
    }

    #[test]
    fn logged_score_correlates_with_exposure() {
        let mut cfg = default_config(17);
        cfg.n_queries = 1000;
        let (log, _) = generate(&cfg).unwrap();
        let xs: Vec<f64> = log.records().iter().map(|r| r.doc_features[0]).collect();
        let ys: Vec<f64> = log
            .records()
            .iter()
            .map(|r| position_exposure(r.rank_position))
            .collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut cov = 0.0;
        let mut vx = 0.0;
        let mut vy = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            cov += (x - mx) * (y - my);
            vx += (x - mx) * (x - mx);
            vy += (y - my) * (y - my);
        }
        let rho = cov / (vx.sqrt() * vy.sqrt());
        assert!(rho.abs() > 0.3, "confounding correlation too weak: {rho}");
    }

    #[test]
    fn running_max_dominates_height() {
        let mut cfg = default_config(19);
        cfg.n_queries = 200;
        let (log, _) = generate(&cfg).unwrap();
        let hi = log.schema().index_of(HEIGHT_FEATURE).unwrap();
        let mi = log.schema().index_of(MAX_HEIGHT_FEATURE).unwrap();
        for g in log.groups() {
            let recs = log.group_records(g);
            assert!(recs.iter().all(|r| r.sepp[mi] >= r.sepp[hi] - 1e-12));
            assert!(recs.iter().any(|r| (r.sepp[mi] - r.sepp[hi]).abs() < 1e-12));
        }
    }

    #[test]
    fn ground_truth_gates_follow_coefficients() {
        let mut cfg = default_config(1);
        let g = ground_truth_graph(&cfg).unwrap();
        assert!(g.has_directed(POSITION_FEATURE, CLICK_NODE));
        assert!(g.has_directed(MEDIA_FEATURE, CLICK_NODE));
        assert!(!g.has_directed(HEIGHT_FEATURE, CLICK_NODE));

        cfg.click_coeffs.e_height = 0.5;
        let g = ground_truth_graph(&cfg).unwrap();
        assert!(g.has_directed(HEIGHT_FEATURE, CLICK_NODE));

        let zero = unconfounded_config(1);
        let g = ground_truth_graph(&zero).unwrap();
        assert_eq!(g.parents(CLICK_NODE), vec![REL_NODE]);
    }

    #[test]
    fn single_query_lands_in_bucket_zero() {
        let mut cfg = default_config(2);
        cfg.n_queries = 1;
        let (log, _) = generate(&cfg).unwrap();
        let bucketed = assign_frequency_buckets(&log, 10).unwrap();
        assert!(bucketed.records().iter().all(|r| r.freq_bucket == Some(0)));
    }

    #[test]
    fn distinct_counts_map_bijectively() {
        // 10 queries with impression counts 10, 9, ..., 1.
        let schema = default_config(0).schema();
        let mut records = Vec::new();
        for q in 0..10 {
            for pos in 0..(10 - q) {
                records.push(ImpressionRecord {
                    query_id: format!("q{q}"),
                    doc_id: format!("q{q}d{pos}"),
                    rank_position: (pos + 1) as u32,
                    sepp: vec![(pos + 1) as f64, 0.0, 100.0, 100.0],
                    doc_features: vec![0.0; DOC_FEATURE_DIM],
                    click: 0,
                    true_relevance: None,
                    freq_bucket: None,
                });
            }
        }
        let log = ClickLog::group_queries(schema, records).unwrap();
        let bucketed = assign_frequency_buckets(&log, 10).unwrap();
        for r in bucketed.records() {
            let q: usize = r.query_id[1..].parse().unwrap();
            assert_eq!(r.freq_bucket, Some(q as u8), "query {q}");
        }
    }

    #[test]
    fn two_buckets_split_at_median_rank() {
        // Power-law-ish counts; brute-force oracle: sort by (count desc, id),
        // first half -> bucket 0.
        let schema = default_config(0).schema();
        let counts = [13usize, 8, 5, 3, 2, 2, 1, 1];
        let mut records = Vec::new();
        for (q, &c) in counts.iter().enumerate() {
            for pos in 0..c {
                records.push(ImpressionRecord {
                    query_id: format!("q{q}"),
                    doc_id: format!("q{q}d{pos}"),
                    rank_position: (pos + 1) as u32,
                    sepp: vec![((pos % 10) + 1) as f64, 0.0, 1.0, 1.0],
                    doc_features: vec![0.0; DOC_FEATURE_DIM],
                    click: 0,
                    true_relevance: None,
                    freq_bucket: None,
                });
            }
        }
        let log = ClickLog::group_queries(schema, records).unwrap();
        let bucketed = assign_frequency_buckets(&log, 2).unwrap();

        let mut oracle: Vec<(usize, usize)> = counts.iter().cloned().enumerate().collect();
        oracle.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut expected = std::collections::HashMap::new();
        for (i, (q, _)) in oracle.iter().enumerate() {
            expected.insert(format!("q{q}"), ((i * 2) / oracle.len()) as u8);
        }
        for r in bucketed.records() {
            assert_eq!(r.freq_bucket, Some(expected[&r.query_id]));
        }
    }
}
