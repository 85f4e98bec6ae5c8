use std::fmt::Debug;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

/// Flow arithmetic: exact integer units or floating point.
pub trait Amount:
    Copy
    + PartialOrd
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const ZERO: Self;

    /// Values at or below this threshold count as zero.
    fn tolerance(max_capacity: Self) -> Self;

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn abs_val(self) -> Self {
        if self < Self::ZERO {
            -self
        } else {
            self
        }
    }

    fn to_f64(self) -> f64;

    fn from_i64(v: i64) -> Self;
}

impl Amount for i64 {
    const ZERO: Self = 0;

    fn tolerance(_: Self) -> Self {
        0
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn from_i64(v: i64) -> Self {
        v
    }
}

impl Amount for f64 {
    const ZERO: Self = 0.0;

    fn tolerance(max_capacity: Self) -> Self {
        1e-12 * max_capacity.max(1.0)
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }
}
