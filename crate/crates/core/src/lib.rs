pub mod algebra;
pub mod error;
pub mod groupoid;
pub mod growth;
pub mod numeric;
pub mod prime_shift;
pub mod shift;

pub use error::{Error, ErrorKind, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/shifts.md")]
    pub struct Shifts;
    #[doc = include_str!("../../../book/src/prime-shift.md")]
    pub struct PrimeShift;
    #[doc = include_str!("../../../book/src/groupoid.md")]
    pub struct Groupoid;
    #[doc = include_str!("../../../book/src/algebra.md")]
    pub struct Algebra;
    #[doc = include_str!("../../../book/src/growth.md")]
    pub struct Growth;
}
