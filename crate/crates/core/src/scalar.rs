//! Scalar abstractions for the algebraic side of the crate.
//!
//! Forms and Gram matrices are generic over their entry type. Exact types
//! (`i64`, `Rational64`) keep the coefficient identities exact; floating types
//! (`f32`, `f64`) are used for evaluation, eigenvalues and spectrahedron probes.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_rational::{Ratio, Rational64};
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Entry type of a coefficient tensor or a Gram matrix.
pub trait Coefficient:
    nalgebra::Scalar + Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync
{
    /// True when the value is an integer (exactly).
    fn is_integral(&self) -> bool;

    fn from_usize_exact(v: usize) -> Self {
        Self::from_usize(v).expect("small integer fits every coefficient type")
    }
}

macro_rules! int_coefficient {
    ($($t:ty),*) => {$(
        impl Coefficient for $t {
            fn is_integral(&self) -> bool {
                true
            }
        }
    )*};
}

int_coefficient!(i32, i64, i128);

impl Coefficient for f32 {
    fn is_integral(&self) -> bool {
        self.is_finite() && self.fract() == 0.0
    }
}

impl Coefficient for f64 {
    fn is_integral(&self) -> bool {
        self.is_finite() && self.fract() == 0.0
    }
}

impl Coefficient for Ratio<i64> {
    fn is_integral(&self) -> bool {
        self.is_integer()
    }
}

impl Coefficient for Ratio<i128> {
    fn is_integral(&self) -> bool {
        self.is_integer()
    }
}

/// Floating-point entry type: everything numeric (eigenvalues, projections).
pub trait Real: Coefficient + RealField {
    fn from_f64_lossy(v: f64) -> Self {
        nalgebra::convert(v)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Exact rational entries.
pub type Rational = Rational64;

/// Lossy conversion between coefficient types, going through `f64` unless
/// both sides are integral.
pub fn convert_coefficient<A: Coefficient, B: Coefficient>(a: A) -> Option<B> {
    if a.is_integral() {
        if let Some(v) = a.to_i64() {
            return B::from_i64(v);
        }
    }
    a.to_f64().and_then(B::from_f64)
}
