//! Off-policy evaluation for slate bandits with factored logging policies.
//!
//! The crate covers the whole loop of a simulation study:
//!
//! - [`slate`]: slate geometry, factored policies, sampling and the
//!   slot-level divergences `α_k = Σ_a π_k(a)² / μ_k(a) − 1`.
//! - [`reward`]: elementwise and pairwise additive Bernoulli rate models.
//! - [`estimators`]: IPS, the pseudoinverse (PI) estimator and PI++, the PI
//!   estimator with an optimally weighted slot-level control variate.
//! - [`oracle`]: exact variance and bias by enumeration, plus closed-form
//!   risk-improvement predictions.
//! - [`harness`]: replicated experiments measuring bias, variance and
//!   `N·MSE` per estimator.
//! - [`report`]: flat key-value configuration, CSV results and run
//!   manifests used by the `slate-ope` binary.
//!
//! ```
//! use slate_ope::estimators::{optimal_cv_weights};
//! use slate_ope::slate::{compute_divergences, FactoredPolicy, Slate, SlateSpec};
//!
//! let spec = SlateSpec::new(vec![2, 4]).unwrap();
//! let logging = FactoredPolicy::uniform(&spec);
//! let target = FactoredPolicy::deterministic(&spec, &Slate::new(vec![0, 0])).unwrap();
//! let divs = compute_divergences(&target, &logging).unwrap();
//! assert_eq!(divs.alphas(), &[1.0, 3.0]);
//! let cv = optimal_cv_weights(&divs, 0.5).unwrap();
//! assert_eq!(cv.weights(), &[-0.25, 0.25]);
//! ```

pub mod crosscheck;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod oracle;
pub mod report;
pub mod reward;
pub mod rng;
pub mod slate;
pub mod stats;

pub use error::{Error, Result};

/// Upper bound on the number of slates any brute-force enumeration visits.
pub const ENUMERATION_CAP: u64 = 1_000_000;
