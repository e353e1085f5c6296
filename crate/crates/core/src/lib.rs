//! Extraction of economic events from news text and selection of the best
//! structured description of each event.

pub mod annotate;
pub mod config;
pub mod corpus;
pub mod entities;
pub mod evaluation;
pub mod events;
pub mod jsonl;
pub mod learning;
pub mod ontology;
pub mod pipeline;
pub mod selection;

pub use rust_decimal::Decimal;
