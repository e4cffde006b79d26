//! Building blocks for a biomedical exact-answer question answering system.
//!
//! The crate covers everything around an extractive QA model except the
//! model itself:
//!
//! - [`conllu`] and [`lat`]: read dependency-parsed questions and derive the
//!   question word and lexical answer type (LAT) with a small rule set.
//! - [`bioasq`], [`preprocess`], [`squad`] and [`fetch`]: turn BioASQ
//!   questions into extractive-QA examples with grounded answer offsets.
//! - [`nbest`] and [`listpost`]: validate ranked model predictions and turn
//!   them into list answers.
//! - [`yesno`]: decide yes/no questions from contradiction scores.
//! - [`eval`]: BioASQ exact-answer metrics.
//! - [`pipeline`]: per-batch configurations and the orchestration that ties
//!   the modules to an external model adapter.
//!
//! ```
//! use bioqa::listpost::split_answer_text;
//!
//! let items = split_answer_text("neutrophils, macrophages and distinct subtypes of dendritic cells");
//! assert_eq!(items, ["neutrophils", "macrophages", "distinct subtypes of dendritic cells"]);
//! ```

pub mod bioasq;
pub mod conllu;
pub mod error;
pub mod eval;
pub mod fetch;
pub mod lat;
pub mod listpost;
pub mod nbest;
pub mod pipeline;
pub mod preprocess;
pub mod squad;
pub mod submission;
pub mod yesno;

pub use error::{Error, Result};
