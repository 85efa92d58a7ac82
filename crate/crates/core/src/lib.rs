//! Angular momentum-energy states of planar motion under a central force.
//!
//! Given a force function per unit mass `U(r)`, a pair `(J, E)` of angular
//! momentum and energy per unit mass is admissible when some motion under `U`
//! carries exactly those invariants. The crate decides admissibility
//! numerically ([`space::classify`]), locates circular orbits, checks the
//! result against closed forms ([`oracles`]), integrates orbits
//! ([`dynamics`]) and renders scans of the `(J, E)` plane ([`scanio`]).

pub mod dynamics;
pub mod effective;
pub mod forcelaw;
pub mod oracles;
pub mod scanio;
pub mod space;

pub use effective::{Bracket, JEState, SearchOptions};
pub use forcelaw::{builtin, parse_law, AsymTag, Builtin, ForceLaw};
pub use space::{classify, classify_via_w, ClassifyOptions, Membership};
