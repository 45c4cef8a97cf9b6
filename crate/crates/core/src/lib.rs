//! Parse, validate, evaluate and compare SaaS pricings written in Yaml4SaaS.
//!
//! * [`model`]: plans, add-ons, features and usage limits.
//! * [`yaml`]: reading and writing Yaml4SaaS documents.
//! * [`validator`]: pricing validity rules.
//! * [`evaluator`]: subscriptions, feature availability and usage accounting.
//! * [`diff`]: changes between two pricing versions and their impact.
//! * [`cli`]: the `saas-pricing` command.

pub mod cli;
pub mod diff;
pub mod evaluator;
pub mod model;
pub mod validator;
pub mod yaml;

pub use evaluator::{EvalError, EvaluationResult, Subscription, Timestamp};
pub use model::{Amount, Pricing};
pub use validator::{validate, ValidationReport};
pub use yaml::{parse, serialize, ParseError};
