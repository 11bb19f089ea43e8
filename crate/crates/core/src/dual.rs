//! Forward-mode dual numbers.
//!
//! `Dual<f64>` carries one directional derivative; nesting it as
//! `Dual<Dual<f64>>` (aliased [`Dual2`]) yields mixed second derivatives
//! from a single evaluation seeded along two directions. User-supplied
//! densities are written once against [`Dual2`] and every lower-order
//! quantity is read off the relevant component.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed by densities evaluated under automatic differentiation.
pub trait Scalar:
    Copy
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(value: f64) -> Self;
    fn real(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::constant(1.0);
        }
        let base = if n < 0 { Self::constant(1.0) / self } else { self };
        let mut acc = base;
        for _ in 1..n.unsigned_abs() {
            acc = acc * base;
        }
        acc
    }

    fn scale(self, k: f64) -> Self {
        self * Self::constant(k)
    }
}

impl Scalar for f64 {
    fn constant(value: f64) -> Self {
        value
    }
    fn real(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

/// Second-order dual: `re.re` value, `re.eps`/`eps.re` first partials along
/// the inner/outer seeds, `eps.eps` the mixed second partial.
pub type Dual2 = Dual<Dual<f64>>;

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    pub fn variable(re: T) -> Self {
        Self { re, eps: T::constant(1.0) }
    }
}

impl Dual2 {
    /// Seeds `x` with unit tangents in the inner (`inner`) and outer
    /// (`outer`) directions.
    pub fn seeded(x: f64, inner: f64, outer: f64) -> Self {
        Dual::new(Dual::new(x, inner), Dual::new(outer, 0.0))
    }

    pub fn value(self) -> f64 {
        self.re.re
    }

    pub fn inner_derivative(self) -> f64 {
        self.re.eps
    }

    pub fn outer_derivative(self) -> f64 {
        self.eps.re
    }

    pub fn second_derivative(self) -> f64 {
        self.eps.eps
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = T::constant(1.0) / rhs.re;
        Self::new(self.re * inv, (self.eps * rhs.re - self.re * rhs.eps) * inv * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn constant(value: f64) -> Self {
        Self::new(T::constant(value), T::constant(0.0))
    }
    fn real(self) -> f64 {
        self.re.real()
    }
    fn sin(self) -> Self {
        Self::new(self.re.sin(), self.eps * self.re.cos())
    }
    fn cos(self) -> Self {
        Self::new(self.re.cos(), -(self.eps * self.re.sin()))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Self::new(e, self.eps * e)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Self::new(s, self.eps / (s + s))
    }
}

/// Gradient and Hessian of a three-argument function written against
/// [`Dual2`], by seeding every ordered pair of directions.
pub fn gradient_hessian3<F>(f: F, x: [f64; 3]) -> (f64, [f64; 3], [[f64; 3]; 3])
where
    F: Fn(Dual2, Dual2, Dual2) -> Dual2,
{
    let mut value = 0.0;
    let mut grad = [0.0; 3];
    let mut hess = [[0.0; 3]; 3];
    for j in 0..3 {
        for k in j..3 {
            let arg = |m: usize| Dual2::seeded(x[m], if m == k { 1.0 } else { 0.0 }, if m == j { 1.0 } else { 0.0 });
            let out = f(arg(0), arg(1), arg(2));
            value = out.value();
            grad[k] = out.inner_derivative();
            grad[j] = out.outer_derivative();
            hess[j][k] = out.second_derivative();
            hess[k][j] = hess[j][k];
        }
    }
    (value, grad, hess)
}

/// Two-argument counterpart of [`gradient_hessian3`].
pub fn gradient_hessian2<F>(f: F, x: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2])
where
    F: Fn(Dual2, Dual2) -> Dual2,
{
    let mut value = 0.0;
    let mut grad = [0.0; 2];
    let mut hess = [[0.0; 2]; 2];
    for j in 0..2 {
        for k in j..2 {
            let arg = |m: usize| Dual2::seeded(x[m], if m == k { 1.0 } else { 0.0 }, if m == j { 1.0 } else { 0.0 });
            let out = f(arg(0), arg(1));
            value = out.value();
            grad[k] = out.inner_derivative();
            grad[j] = out.outer_derivative();
            hess[j][k] = out.second_derivative();
            hess[k][j] = hess[j][k];
        }
    }
    (value, grad, hess)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = Dual::variable(3.0);
        let y = x * x * x;
        assert_eq!(y.re, 27.0);
        assert_eq!(y.eps, 27.0);
    }

    #[test]
    fn nested_second_derivative() {
        // f(x, y) = x^2 y + sin(y)
        let f = |x: Dual2, y: Dual2| x * x * y + y.sin();
        let (v, g, h) = gradient_hessian2(f, [1.5, 0.3]);
        assert!((v - (2.25 * 0.3 + 0.3f64.sin())).abs() < 1e-15);
        assert!((g[0] - 2.0 * 1.5 * 0.3).abs() < 1e-15);
        assert!((g[1] - (2.25 + 0.3f64.cos())).abs() < 1e-15);
        assert!((h[0][0] - 0.6).abs() < 1e-15);
        assert!((h[0][1] - 3.0).abs() < 1e-15);
        assert!((h[1][1] + 0.3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn division_and_powi() {
        let x = Dual::variable(2.0);
        let y = Dual::constant(1.0) / x.powi(2);
        assert!((y.re - 0.25).abs() < 1e-15);
        assert!((y.eps + 0.25).abs() < 1e-15);
        let z = x.powi(-1);
        assert!((z.eps + 0.25).abs() < 1e-15);
    }
}
