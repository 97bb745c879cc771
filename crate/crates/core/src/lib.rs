//! Whole-page unbiased learning to rank.
//!
//! Click logs from a search engine are biased by how results were presented:
//! position, multimedia type, snippet height and so on. This crate discovers
//! the user-behavior model behind such logs as a causal graph (PC search with
//! kernel conditional-independence tests), removes confounding between the
//! relevance score and presentation features via importance reweighting, and
//! trains a ranking model whose updates flow only through the
//! relevance-to-click path.
//!
//! The pipeline, end to end:
//!
//! 1. [`simulate`] — generate biased click logs from a structural causal
//!    model with known ground truth (stand-in for a production log).
//! 2. [`ingest`] — read/write logs in a stable TSV format.
//! 3. [`preprocess`] — turn presentation features into continuous inputs
//!    (Bradley-Terry scores for ordinals, embeddings for categoricals,
//!    standardization for continuous features).
//! 4. [`causal`] — discover the user-behavior graph and classify biases.
//! 5. [`density`] — fit masked-input conditional estimators
//!    `p(x_i | parents)` used both for influence scores and the click model.
//! 6. [`unbias`] — compute backdoor-removing importance weights and run the
//!    full debiasing training loop with gradient blocking.
//! 7. [`baselines`] — naive click training and inverse-propensity weighting
//!    for comparison.
//! 8. [`eval`] — DCG/ERR/nDCG/Kendall-tau metrics, frequency-bucket and
//!    re-rank position analyses.

pub mod baselines;
pub mod causal;
pub mod data;
pub mod density;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ingest;
pub mod kci;
pub mod nn;
pub mod preprocess;
pub mod ranker;
pub mod rng;
pub mod simulate;
pub mod unbias;

pub use data::{ClickLog, FeatureKind, FeatureSchema, ImpressionRecord};
pub use error::{Error, Result};
pub use graph::{CausalGraph, EdgeMark, CLICK_NODE, REL_NODE};
