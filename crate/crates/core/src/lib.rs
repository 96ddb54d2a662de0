//! Jump-diffusion option pricing on a bivariate (diffusion × jump) lattice,
//! with jump-level truncation and closed-form Merton prices for reference.

pub mod engine;
pub mod error;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod tables;
pub mod truncation;
pub mod validation;

pub use engine::{PriceResult, PricingMethod};
pub use error::{PricingError, Result};
pub use lattice::{build_lattice, LatticeSpec};
pub use model::{Exercise, MarketParams, OptionKind, OptionSpec};
pub use truncation::{BoundMethod, TruncationBounds};
