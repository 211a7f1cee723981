//! The Heisenberg Poisson algebra of the mode symbols `α_n`, its field
//! generating series, flows and Hirota derivatives.

mod algebra;
mod fields;
mod mono;
mod poly;

pub use algebra::{bracket_box, PoissonAlgebra};
pub use fields::{limit_degree, Comparison, FieldSeries, Flow, Side, Sign, Z};
pub use mono::{Mono, MAX_DEGREE, MAX_MODE};
pub use poly::{AlphaPoly, ModeBox, Trunc, UNBOUNDED};
