//! Entropy differentials, degree detection and approximation of minimal
//! surfaces given by Weierstrass data.

pub mod approx;
pub mod degree;
pub mod differentials;
pub mod exec;
pub mod expr;
pub mod numfmt;
pub mod quadrature;
pub mod registry;
pub mod series;
pub mod surface;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub use degree::Rect;
pub use differentials::{Differential, WeierstrassData};
pub use exec::Exec;
pub use expr::{Expr, ExprError};
pub use series::{LaurentSeries, SeriesError, DEFAULT_ORDER};
