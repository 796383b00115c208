//! A self-stabilizing topic-based publish-subscribe system built on skip
//! rings, together with a deterministic simulator to run it.
//!
//! * [`labels`]: label algebra and rank arithmetic
//! * [`topology`]: the target skip ring and the legitimacy oracle
//! * [`supervisor`]: the label database and its repair
//! * [`subscriber`]: ring, label and shortcut maintenance per subscriber
//! * [`pubsub`]: Patricia tries, trie reconciliation and flooding
//! * [`simnet`]: scheduler, initial-state generation and metrics
//! * [`cli`]: scenario files, CSV metrics and DOT snapshots
//!
//! The `examples/` directory walks through each of these.

pub mod cli;
pub mod labels;
pub mod message;
pub mod pubsub;
pub mod simnet;
pub mod subscriber;
pub mod supervisor;
pub mod topology;
