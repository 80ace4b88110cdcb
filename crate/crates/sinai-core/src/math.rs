//! Small planar-geometry and numerics helpers shared across the crate.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};
use num_traits::Float;

/// A plain 2D vector. Kept deliberately minimal; the collision kernel is the
/// hottest loop in the crate and everything here must inline to registers.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product (signed parallelogram area).
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }

    #[inline]
    pub fn unit(self) -> Vec2 {
        self.scale(1.0 / self.norm())
    }

    /// Rotate by +90 degrees.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn from_angle(theta: f64) -> Vec2 {
        Vec2::new(theta.cos(), theta.sin())
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        self.scale(s)
    }
}

/// `x` reduced to `[0, p)`. `p > 0`.
#[inline]
pub fn wrap(x: f64, p: f64) -> f64 {
    let w = x - (x / p).floor() * p;
    // floor can land exactly on p after rounding when x is a tiny negative
    if w >= p {
        w - p
    } else {
        w
    }
}

/// Angle reduced to `[0, 2π)`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    wrap(a, core::f64::consts::TAU)
}

/// Signed angular difference `a - b` reduced to `(-π, π]`.
#[inline]
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = wrap(a - b, core::f64::consts::TAU);
    if d > core::f64::consts::PI {
        d - core::f64::consts::TAU
    } else {
        d
    }
}

/// Ordinary least squares fit `y ≈ a + b x`, returning `(a, b, r_squared)`.
///
/// Weights are optional; `None` means uniform. Degenerate inputs (fewer than
/// two distinct abscissas) return `b = 0` and `r_squared = 0`.
pub fn linear_fit(xs: &[f64], ys: &[f64], weights: Option<&[f64]>) -> (f64, f64, f64) {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return (ys.first().copied().unwrap_or(0.0), 0.0, 0.0);
    }
    let w_at = |i: usize| weights.map_or(1.0, |w| w[i]);
    let mut sw = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for i in 0..n {
        let w = w_at(i);
        sw += w;
        sx += w * xs[i];
        sy += w * ys[i];
    }
    if sw <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let mx = sx / sw;
    let my = sy / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let w = w_at(i);
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    if sxx <= 0.0 {
        return (my, 0.0, 0.0);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (a, b, r2)
}

/// Root of `f` on `[lo, hi]` by bisection, assuming `f(lo)` and `f(hi)` have
/// opposite signs. Runs until the bracket is shorter than `tol`.
pub fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let mut sign_lo = flo > 0.0;
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == sign_lo {
            lo = mid;
            sign_lo = fm > 0.0;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wrap_basics() {
        assert_relative_eq!(wrap(1.3, 1.0), 0.3, epsilon = 1e-12);
        assert_relative_eq!(wrap(-0.2, 1.0), 0.8, epsilon = 1e-12);
        assert_eq!(wrap(0.0, 1.0), 0.0);
        assert!(wrap(-1e-18, 1.0) < 1.0);
    }

    #[test]
    fn fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (a, b, r2) = linear_fit(&xs, &ys, None);
        assert_relative_eq!(a, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b, 2.0, epsilon = 1e-12);
        assert_relative_eq!(r2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(0.0, 2.0, 1e-14, |x| x * x - 2.0);
        assert_relative_eq!(r, core::f64::consts::SQRT_2, epsilon = 1e-12);
    }
}
