//! Behavioral troll detection for online discussions.
//!
//! The library turns a dump of discussion comments into per-user
//! behavioral/emotional feature vectors (message count, mean message length,
//! and pooled frequencies of ten emotionally loaded symbols), clusters users
//! with a Kohonen self-organizing map, and flags clusters of unusually heavy
//! posters as likely trolls.
//!
//! Typical flow:
//!
//! ```no_run
//! use trollmap::corpus::InputFormat;
//! use trollmap::pipeline::{run_pipeline, PipelineConfig};
//!
//! let config = PipelineConfig::new(
//!     "comments.jsonl".into(),
//!     InputFormat::Jsonl,
//!     "out".into(),
//! );
//! let report = run_pipeline(&config).unwrap();
//! for user in report.users.iter().filter(|u| u.troll) {
//!     println!("{} (cluster {})", user.user_id, user.cluster);
//! }
//! ```
//!
//! See the `examples/` directory for one runnable example per capability:
//! feature extraction, SOM training, automatic cluster-count selection,
//! component-plane export, and end-to-end detection.

pub mod clustering;
pub mod corpus;
pub mod detect;
pub mod error;
pub mod features;
pub mod pipeline;
pub mod planes;
pub mod som;
pub mod synth;

pub use error::{Error, Result};
