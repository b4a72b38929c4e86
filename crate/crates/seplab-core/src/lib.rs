//! Exact-series and high-precision machinery for the separatrix splitting of
//! the Nystrom-discretized logistic equation `y_{n+1} = y_{n-1} + 2e(1-y_n^2)`.
//!
//! The crate has two halves. The exact half builds the formal power-series
//! solution of the conjugated difference equation with rational polynomial
//! coefficients, derives the series E = C(G) and extracts the splitting
//! constant `alpha` from its leading tau-coefficients. The floating half
//! iterates the plane map at configurable precision, constructs local
//! invariant-manifold charts at the saddles and measures the exponentially
//! small vertical distance between them.

pub mod numeric;
pub mod poly;
pub mod series;
pub mod alpha;
pub mod splitting;
pub mod acceptance;

pub use numeric::{BigFloat, PrecisionContext, Rational};
