//! Numerical construction, certification, and Lyapunov-exponent measurement
//! for two explicit families of area-preserving Anosov diffeomorphisms of the
//! 2-torus.
//!
//! The crate builds two deformation families of a hyperbolic toral
//! automorphism `L_A`:
//!
//! * **Twist family** ([`twist`]): a shear-twist supported in a vertical
//!   strip, with a slow band of slope `1 - β` and a narrow fast band,
//!   optionally mollified to a smooth map.
//! * **Slow-down family** ([`slowdown`]): a Hamiltonian-like local
//!   deceleration of the automorphism inside a small disk around the fixed
//!   point, glued to a twist map outside.
//!
//! For both families the crate measures the Lebesgue-typical Lyapunov
//! exponent and the exponent of the measure of maximal entropy, certifies
//! hyperbolicity through invariant cone fields ([`cones`]), evaluates the
//! analytic upper/lower bounds that separate the two exponents ([`bounds`]),
//! and builds exact-arithmetic Markov partitions for the piecewise-linear
//! members ([`markov`]).

pub mod bounds;
pub mod cones;
pub mod error;
pub mod exponents;
pub mod map;
pub mod markov;
pub mod matrix;
pub mod mollifier;
pub mod ode;
pub mod periodic;
pub mod profile;
pub mod quadrature;
pub mod slowdown;
pub mod torus;
pub mod twist;

pub use error::{Error, Result};
pub use matrix::{EigenBasis, HyperbolicMatrix};
pub use torus::{Mat2, TorusPoint, Vec2};
