//! Complex numbers stored as (real, imag) pairs of `f64`.
//!
//! Every learnable filter in the neural frontend is complex-valued, but all
//! gradients are taken with respect to the real and imaginary parts
//! separately, so complex multiplication is spelled out as the equivalent
//! real 2x2 matrix product. Keeping the type this small (two plain floats,
//! `Copy`) lets tensors of complex values live in flat `Vec<f64>` buffers
//! with a deterministic `[re, im]` interleaving.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cpx {
    pub re: f64,
    pub im: f64,
}

impl Cpx {
    pub const ZERO: Cpx = Cpx { re: 0.0, im: 0.0 };
    pub const ONE: Cpx = Cpx { re: 1.0, im: 0.0 };
    pub const I: Cpx = Cpx { re: 0.0, im: 1.0 };

    #[inline]
    pub fn new(re: f64, im: f64) -> Self {
        Cpx { re, im }
    }

    /// e^{i*theta}
    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        Cpx {
            re: theta.cos(),
            im: theta.sin(),
        }
    }

    #[inline]
    pub fn conj(self) -> Self {
        Cpx {
            re: self.re,
            im: -self.im,
        }
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    #[inline]
    pub fn abs_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Cpx {
            re: self.re * s,
            im: self.im * s,
        }
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Complex product written out over real pairs:
/// `(a_r b_r - a_i b_i, a_r b_i + a_i b_r)`.
///
/// Identical to applying the real 2x2 matrix `[[b_r, -b_i], [b_i, b_r]]`
/// to the vector `(a_r, a_i)`, which is what keeps every gradient in the
/// frontend real-valued.
#[inline]
pub fn complex_mul_as_real(a: Cpx, b: Cpx) -> Cpx {
    Cpx {
        re: a.re * b.re - a.im * b.im,
        im: a.re * b.im + a.im * b.re,
    }
}

/// Log-compressed magnitude: `ln(|z| + eps)`.
///
/// The floor `eps` keeps the value (and its gradient) finite on silent
/// frames where `|z| = 0`.
#[inline]
pub fn log_magnitude(z: Cpx, eps: f64) -> f64 {
    (z.abs() + eps).ln()
}

impl Add for Cpx {
    type Output = Cpx;
    #[inline]
    fn add(self, rhs: Cpx) -> Cpx {
        Cpx {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl AddAssign for Cpx {
    #[inline]
    fn add_assign(&mut self, rhs: Cpx) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for Cpx {
    type Output = Cpx;
    #[inline]
    fn sub(self, rhs: Cpx) -> Cpx {
        Cpx {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for Cpx {
    type Output = Cpx;
    #[inline]
    fn mul(self, rhs: Cpx) -> Cpx {
        complex_mul_as_real(self, rhs)
    }
}

impl Neg for Cpx {
    type Output = Cpx;
    #[inline]
    fn neg(self) -> Cpx {
        Cpx {
            re: -self.re,
            im: -self.im,
        }
    }
}
