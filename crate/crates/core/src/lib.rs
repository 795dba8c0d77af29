//! Verification of factual claims in generated text.
//!
//! A response is split into atomic claims, each claim is checked against a
//! query-scoped knowledge graph by a resolution prover, the response is
//! regenerated under counterfactual knowledge states to measure how much each
//! claim depends on what the generator knows, and the signals are fused into
//! a single score with an accept, flag or reject verdict.
//!
//! ```
//! use claimguard::extraction::ClaimGrammar;
//! use claimguard::kgraph::{KnowledgeBase, RuleSet};
//! use claimguard::model::Verdict;
//! use claimguard::pipeline::Pipeline;
//!
//! let kb = KnowledgeBase::parse(
//!     "#!functional born_in\neinstein\tborn_in\tulm\nulm\tlocated_in\tgermany\n",
//!     "kb",
//! )?;
//! let pipeline = Pipeline::new(kb, RuleSet::new(), ClaimGrammar::default());
//! let ctx = pipeline.context("Where was Einstein born?");
//!
//! let good = pipeline.verify(&ctx, "Einstein was born in Ulm.")?;
//! assert_eq!(good.report.verdict, Verdict::Accept);
//!
//! let bad = pipeline.verify(&ctx, "Einstein was born in Paris.")?;
//! assert_eq!(bad.report.verdict, Verdict::Reject);
//! # Ok::<(), claimguard::Error>(())
//! ```

pub mod causal;
pub mod config;
pub mod error;
pub mod extraction;
pub mod fusion;
pub mod generator;
pub mod harness;
pub mod intervene;
pub mod kgraph;
pub mod logic;
pub mod model;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
