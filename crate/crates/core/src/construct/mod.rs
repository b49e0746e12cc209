//! Explicit constructions: greedy near-covers, exact covers with large
//! squarefree moduli, Haight moduli sets and uncovered-integer witnesses.

pub mod exact;
pub mod greedy;
pub mod haight;
pub mod witness;

pub use exact::{exact_cover_construct, xineq_check, ExactCoverPlan, Schedule, XineqCheck};
pub use greedy::{greedy_cover, greedy_step_invariant, GreedyStep, GreedyTrace, StepInvariant};
pub use haight::{haight_moduli, HaightReport};
pub use witness::{extend_witness, WitnessReport};
