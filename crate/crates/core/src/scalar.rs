//! Scalar abstraction for the continuous algorithms.
//!
//! Everything that does linear algebra (Forster transforms, the margin
//! learner, the halfspace PQ learner) is written against [`Real`] so it can
//! run in `f64` (the default) or `f32`. Numerical tolerances live on the
//! trait because a single absolute constant cannot serve both widths.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Allowed deviation of `‖x‖` from 1 for inputs that must be unit vectors.
    fn unit_tol() -> Self;
    /// Distance (relative to `‖x‖`) under which a point counts as lying in a subspace.
    fn subspace_tol() -> Self;
    /// Norms below this are treated as zero.
    fn tiny_norm() -> Self;
    /// Eigenvalue floor for the normalized iterate of the Forster iteration.
    fn eig_floor() -> Self;
    /// Convergence threshold for the Jacobi eigen-solver.
    fn jacobi_eps() -> Self;

    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to every Real")
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize converts to every Real")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn unit_tol() -> Self {
        1e-9
    }
    fn subspace_tol() -> Self {
        1e-9
    }
    fn tiny_norm() -> Self {
        1e-12
    }
    fn eig_floor() -> Self {
        1e-8
    }
    fn jacobi_eps() -> Self {
        1e-15
    }
}

impl Real for f32 {
    fn unit_tol() -> Self {
        1e-5
    }
    fn subspace_tol() -> Self {
        1e-4
    }
    fn tiny_norm() -> Self {
        1e-6
    }
    fn eig_floor() -> Self {
        1e-4
    }
    fn jacobi_eps() -> Self {
        1e-7
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry = self.carry + ((self.sum - t) + v);
        } else {
            self.carry = self.carry + ((v - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::<f64>::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn tolerances_are_ordered() {
        assert!(f64::tiny_norm() < f64::eig_floor());
        assert!(f32::tiny_norm() < f32::eig_floor());
        assert!(f64::unit_tol() < f32::unit_tol() as f64);
    }
}
