//! Task drivers on top of the engine.

pub mod causal;
pub mod classify;
pub mod plan;
pub mod proof;
pub mod query;
pub mod relevance;
pub mod structure;

pub use causal::{parse_intervention, run_causal, CausalQueryResult};
pub use classify::{classify_scene, two_pairs_oracle, two_pairs_rules, Classification};
pub use plan::{plan, validate_plan, Action, GridScene, PlanResult, SceneObject};
pub use proof::{extract_proof, extract_proofs, ProofTree, PROOF_THRESHOLD};
pub use query::{answers, solve_depth_limited, Answer};
pub use relevance::{relevance, relevance_engine, RelevanceReport};
