//! Scalar abstraction for the analytic modules.
//!
//! Everything in [`crate::logcomb`], [`crate::thermo`], [`crate::counting`]
//! and [`crate::mixing`] is written against the [`Real`] trait so the same
//! formulas run in `f32` or `f64`. The Monte Carlo simulator and the quantum
//! demonstrations are pinned to `f64`; their tolerances are sized for it.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

use crate::logcomb::LnFactorialTable;

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// The process-wide cumulative `ln n!` table for this scalar type.
    /// Built once on first use; concurrent readers share it.
    fn ln_factorial_table() -> &'static LnFactorialTable<Self>;

    fn of_f64(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts into any Real scalar")
    }

    fn of_u64(n: u64) -> Self {
        Self::from_u64(n).expect("u64 converts into any Real scalar")
    }
}

impl Real for f64 {
    fn ln_factorial_table() -> &'static LnFactorialTable<f64> {
        static TABLE: LnFactorialTable<f64> = LnFactorialTable::new();
        &TABLE
    }
}

impl Real for f32 {
    fn ln_factorial_table() -> &'static LnFactorialTable<f32> {
        static TABLE: LnFactorialTable<f32> = LnFactorialTable::new();
        &TABLE
    }
}
