//! Solvers for interdiction with packing constraints: a leader removes items
//! under a multi-dimensional budget, then a follower packs a
//! multi-dimensional knapsack from what is left. The leader minimizes the
//! follower's best profit.
//!
//! All arithmetic is exact. The modules are generic over [`Scalar`]; the
//! aliases below fix it to arbitrary-precision rationals.

pub mod approx;
pub mod bench;
pub mod bicriteria;
pub mod exact;
pub mod follower;
pub mod general;
pub mod instance;
pub mod lp;
pub mod ptas;
pub mod scalar;

pub use scalar::Scalar;

pub type Rational = num_rational::BigRational;
pub type Instance = instance::Instance<Rational>;
pub type Item = instance::Item<Rational>;
pub type ScaledInstance = instance::ScaledInstance<Rational>;
pub type FollowerSolution = follower::FollowerSolution<Rational>;
pub type BilevelResult = exact::BilevelResult<Rational>;
pub type LinearProgram = lp::LinearProgram<Rational>;
pub type LpSolution = lp::LpSolution<Rational>;
pub type ApproxOutcome = approx::ApproxOutcome<Rational>;
pub type BicriteriaResult = bicriteria::BicriteriaResult<Rational>;
