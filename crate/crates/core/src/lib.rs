//! Exact density computations for systems of congruences.
//!
//! A [`ResidueSystem`] is a finite multiset of classes `r (mod n)`. Its
//! uncovered density `δ(C)` is always rational; every engine here returns it
//! (or a lower bound for it) as an exact [`ExactRational`].
//!
//! ```
//! use covset_core::{density, ResidueSystem};
//!
//! let c = ResidueSystem::from_pairs([(2, 0), (3, 0), (4, 1), (6, 1), (12, 11)]);
//! let report = density::exact_density(&c, density::DEFAULT_SIEVE_GUARD).unwrap();
//! assert_eq!(covset_core::rational::format(&report.value), "0/1");
//! ```

pub mod arith;
pub mod bounds;
pub mod construct;
pub mod decompose;
pub mod density;
pub mod document;
pub mod error;
pub mod rational;
pub mod sieve;
pub mod stats;
pub mod system;

pub use arith::{factorize, primes_in, smooth_split, Factorization, LeastPrime};
pub use bounds::{BoundCertificate, BoundKind, Conclusion};
pub use decompose::Decomposition;
pub use density::{DensityMethod, DensityReport};
pub use document::SystemDocument;
pub use error::{Error, Result};
pub use rational::ExactRational;
pub use stats::{MomentMethod, MomentReport, RandomModel};
pub use system::{ModuliSet, ResidueClass, ResidueSystem};
