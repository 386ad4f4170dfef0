//! Exact verification of tree-ensemble and additive classifiers.
//!
//! Models are sums of piecewise-constant trees over a bounded box of
//! binary32 inputs. Specifications are either threshold implications
//! (`premise => logit <= c`) or monotonicity statements. Every check is
//! exhaustive: a proof covers every binary32 input in the box, and every
//! counterexample is re-evaluated exactly before it is reported.
//!
//! ```
//! use forestcheck::spec::{parse_specs, SpecBody};
//! use forestcheck::testing::{worked_example, worked_space};
//! use forestcheck::verify::{check_threshold_spec, Limits, Status};
//!
//! let specs = parse_specs(
//!     r#"{"specs": [{"id": "A", "kind": "implication", "premise": ["g > 5.0"]}]}"#,
//!     &worked_space(),
//! )
//! .unwrap();
//! let SpecBody::Implication(spec) = &specs[0].body else { unreachable!() };
//! let verdict = check_threshold_spec(&worked_example(), spec, &Limits::default()).unwrap();
//! assert_eq!(verdict.status, Status::Violated);
//! assert_eq!(verdict.witness.unwrap().logit().to_string(), "1/4");
//! ```

pub mod audit;
pub mod error;
pub mod explain;
pub mod ingest;
pub mod model;
pub mod spec;
pub mod testing;
pub mod verify;

pub use error::{Error, Result};
