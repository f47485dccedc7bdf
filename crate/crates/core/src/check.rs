//! Numeric comparisons shared by the verification routines.

use crate::numeric::C64;

/// Outcome of comparing two numbers that should agree.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs|`, or the modulus of the difference for complex values.
    pub abs_err: f64,
    pub tail: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Comparison {
    /// Passes if `|lhs - rhs| <= rel_tol * max(|lhs|,|rhs|) + tail`.
    pub fn new(lhs: f64, rhs: f64, rel_tol: f64, tail: f64) -> Self {
        let abs_err = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs());
        let pass = abs_err <= rel_tol * scale + tail && lhs.is_finite() && rhs.is_finite();
        Self {
            lhs,
            rhs,
            abs_err,
            tail,
            tolerance: rel_tol,
            pass,
        }
    }

    /// Passes if `|lhs - rhs| <= abs_tol + tail`.
    pub fn absolute(lhs: f64, rhs: f64, abs_tol: f64, tail: f64) -> Self {
        let abs_err = (lhs - rhs).abs();
        let pass = abs_err <= abs_tol + tail && lhs.is_finite() && rhs.is_finite();
        Self {
            lhs,
            rhs,
            abs_err,
            tail,
            tolerance: abs_tol,
            pass,
        }
    }

    /// Complex values; `lhs`/`rhs` record the moduli, the error is `|lhs - rhs|`.
    /// Passes if the error is at most `rel_tol * scale + tail`.
    pub fn complex(lhs: C64, rhs: C64, rel_tol: f64, scale: f64, tail: f64) -> Self {
        let abs_err = (lhs - rhs).norm();
        let pass = abs_err <= rel_tol * scale + tail && abs_err.is_finite();
        Self {
            lhs: lhs.norm(),
            rhs: rhs.norm(),
            abs_err,
            tail,
            tolerance: rel_tol,
            pass,
        }
    }

    pub fn rel_err(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            self.abs_err
        } else {
            self.abs_err / scale
        }
    }
}
