//! Two-track research ethics review engine.
//!
//! One library covers the full workflow: forging a supervised QA corpus from
//! normative texts, extracting an executable rule base from regulatory
//! documents, organizing rules into a scenario-partitioned graph, running
//! rule-grounded expedited review and simulated committee deliberation over
//! submitted dossiers, and scoring review outputs against gold annotations.
//! Every model interaction goes through the [`gateway`], which can be backed
//! by live HTTP endpoints or a deterministic mock playbook.

pub mod clustering;
pub mod config;
pub mod embedding;
pub mod error;
pub mod fsutil;
pub mod gateway;
pub mod subjects;
pub mod text;

pub use embedding::EmbeddingVector;
pub use error::{Error, Result};
pub use gateway::{ChatMessage, ChatRequest, Gateway, MockPlaybook, RerankScore, Role};
