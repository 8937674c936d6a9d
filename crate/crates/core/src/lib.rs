//! Matrix-exponential (ME) distributions and the link-level metrics built on them.
//!
//! An ME distribution is a triple `(x, Y, z)` with density `x e^{tY} z` on `t >= 0`.
//! Fading SNRs with rational Laplace transforms fit this form exactly, and sums,
//! maxima and minima of independent ME variables stay inside the family.

pub mod algebra;
pub mod bivariate;
pub mod channel;
pub mod error;
pub mod infoq;
pub mod matfun;
pub mod medist;
pub mod metrics;
pub mod oracle;
pub mod special;

pub use error::{Error, Result};
pub use matfun::{Matrix, C64};
pub use medist::{MeDist, RationalLt};
