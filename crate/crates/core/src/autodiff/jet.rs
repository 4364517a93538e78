use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Real;

/// Nested first-order dual number.
///
/// A jet of depth `k` carries `k` independent infinitesimal tags
/// `ε_0 .. ε_{k-1}` with `ε_i² = 0`. Coefficients are indexed by tag bitmask,
/// so `coeffs[0b101]` multiplies `ε_0 ε_2`. Nesting `k` first-order duals is
/// exactly this algebra, which is what repeated Lie differentiation needs:
/// every application of `L_f` introduces one new tag.
///
/// Evaluating a smooth expression on depth-0 jets is plain evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T> {
    coeffs: Vec<T>,
    fault: Option<&'static str>,
}

impl<T: Real> Jet<T> {
    pub fn constant(value: T) -> Self {
        Jet {
            coeffs: vec![value],
            fault: None,
        }
    }

    pub fn lit(value: f64) -> Self {
        Self::constant(T::lit(value))
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    /// Builds `lo + ε_k hi` where `k` is the common depth of the two parts.
    pub fn with_tangent(lo: &Jet<T>, hi: &Jet<T>) -> Self {
        let depth = lo.depth().max(hi.depth());
        let mut coeffs = padded(&lo.coeffs, depth);
        coeffs.extend(padded(&hi.coeffs, depth));
        Jet {
            coeffs,
            fault: lo.fault.or(hi.fault),
        }
    }

    pub(crate) fn from_parts(coeffs: Vec<T>, fault: Option<&'static str>) -> Self {
        debug_assert!(coeffs.len().is_power_of_two());
        Jet { coeffs, fault }
    }

    /// Same jet viewed at a larger depth (new tags have zero coefficients).
    pub fn promoted(&self, depth: usize) -> Self {
        if self.depth() >= depth {
            return self.clone();
        }
        Jet {
            coeffs: padded(&self.coeffs, depth),
            fault: self.fault,
        }
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.coeffs.len().trailing_zeros() as usize
    }

    #[inline]
    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    /// Coefficient of the tag product selected by `mask` (zero if beyond depth).
    pub fn coeff(&self, mask: usize) -> T {
        self.coeffs.get(mask).copied().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Name of the first primitive that produced a non-finite coefficient.
    pub fn fault(&self) -> Option<&'static str> {
        self.fault
    }

    pub fn is_finite(&self) -> bool {
        self.fault.is_none() && self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Splits off the highest tag of a jet promoted to `depth`:
    /// returns `(lo, hi)` with `self = lo + ε_{depth-1} hi`.
    pub fn split_top(&self, depth: usize) -> (Jet<T>, Jet<T>) {
        assert!(depth >= 1, "cannot split a depth-0 jet");
        let full = padded(&self.coeffs, depth);
        let half = full.len() / 2;
        let lo = Jet::from_parts(full[..half].to_vec(), self.fault);
        let hi = Jet::from_parts(full[half..].to_vec(), self.fault);
        (lo, hi)
    }

    pub fn sin(&self) -> Self {
        self.unary("sin", &sin_raw)
    }

    pub fn cos(&self) -> Self {
        self.unary("cos", &cos_raw)
    }

    pub fn exp(&self) -> Self {
        self.unary("exp", &exp_raw)
    }

    pub fn ln(&self) -> Self {
        self.unary("ln", &ln_raw)
    }

    pub fn sqrt(&self) -> Self {
        self.unary("sqrt", &sqrt_raw)
    }

    pub fn recip(&self) -> Self {
        self.unary("recip", &recip_raw)
    }

    pub fn tanh(&self) -> Self {
        self.unary("tanh", &tanh_raw)
    }

    pub fn atan(&self) -> Self {
        self.unary("atan", &atan_raw)
    }

    pub fn powi(&self, n: i32) -> Self {
        self.unary("powi", &|a: &[T]| powi_raw(a, n))
    }

    pub fn powf(&self, p: T) -> Self {
        self.unary("powf", &|a: &[T]| powf_raw(a, p))
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Four-quadrant arctangent of `self / x`.
    pub fn atan2(&self, x: &Jet<T>) -> Self {
        let depth = self.depth().max(x.depth());
        let coeffs = atan2_raw(&padded(&self.coeffs, depth), &padded(&x.coeffs, depth));
        Self::finish(coeffs, self.fault.or(x.fault), "atan2")
    }

    fn unary(&self, name: &'static str, op: &dyn Fn(&[T]) -> Vec<T>) -> Self {
        Self::finish(op(&self.coeffs), self.fault, name)
    }

    fn finish(coeffs: Vec<T>, fault: Option<&'static str>, name: &'static str) -> Self {
        let fault = fault.or_else(|| (!coeffs.iter().all(|c| c.is_finite())).then_some(name));
        Jet { coeffs, fault }
    }
}

impl<T: Real> From<T> for Jet<T> {
    fn from(value: T) -> Self {
        Jet::constant(value)
    }
}

fn padded<T: Real>(coeffs: &[T], depth: usize) -> Vec<T> {
    let len = 1usize << depth;
    debug_assert!(coeffs.len() <= len);
    let mut out = Vec::with_capacity(len);
    out.extend_from_slice(coeffs);
    out.resize(len, T::zero());
    out
}

fn add_raw<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = long.to_vec();
    for (o, s) in out.iter_mut().zip(short) {
        *o = *o + *s;
    }
    out
}

fn sub_raw<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or_else(T::zero);
            let y = b.get(i).copied().unwrap_or_else(T::zero);
            x - y
        })
        .collect()
}

fn scale_raw<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&c| c * s).collect()
}

/// Subset convolution: `c[m] = Σ_{s ⊆ m} a[s] b[m \ s]`.
fn mul_raw<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    if a.len() == 1 {
        return scale_raw(b, a[0]);
    }
    if b.len() == 1 {
        return scale_raw(a, b[0]);
    }
    let len = a.len().max(b.len());
    let mut out = vec![T::zero(); len];
    for (m, slot) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        let mut s = m;
        loop {
            let x = a.get(s).copied().unwrap_or_else(T::zero);
            let y = b.get(m ^ s).copied().unwrap_or_else(T::zero);
            acc = acc + x * y;
            if s == 0 {
                break;
            }
            s = (s - 1) & m;
        }
        *slot = acc;
    }
    out
}

/// Lifts a scalar function with known derivative to the jet algebra:
/// `φ(lo + ε hi) = φ(lo) + ε φ'(lo) hi`, applied recursively on the top tag.
fn chain_raw<T: Real>(
    a: &[T],
    value: impl Fn(T) -> T,
    deriv: &dyn Fn(&[T]) -> Vec<T>,
) -> Vec<T> {
    if a.len() == 1 {
        return vec![value(a[0])];
    }
    let half = a.len() / 2;
    let (lo, hi) = a.split_at(half);
    let mut out = chain_raw(lo, value, deriv);
    out.extend(mul_raw(&deriv(lo), hi));
    out
}

fn sin_raw<T: Real>(a: &[T]) -> Vec<T> {
    chain_raw(a, T::sin, &cos_raw)
}

fn cos_raw<T: Real>(a: &[T]) -> Vec<T> {
    chain_raw(a, T::cos, &|lo| scale_raw(&sin_raw(lo), -T::one()))
}

fn exp_raw<T: Real>(a: &[T]) -> Vec<T> {
    chain_raw(a, T::exp, &exp_raw)
}

fn ln_raw<T: Real>(a: &[T]) -> Vec<T> {
    chain_raw(a, T::ln, &recip_raw)
}

fn recip_raw<T: Real>(a: &[T]) -> Vec<T> {
    chain_raw(a, T::recip, &|lo| {
        let r = recip_raw(lo);
        scale_raw(&mul_raw(&r, &r), -T::one())
    })
}

fn sqrt_raw<T: Real>(a: &[T]) -> Vec<T> {
    chain_raw(a, T::sqrt, &|lo| {
        scale_raw(&recip_raw(&sqrt_raw(lo)), T::lit(0.5))
    })
}

fn tanh_raw<T: Real>(a: &[T]) -> Vec<T> {
    chain_raw(a, T::tanh, &|lo| {
        let t = tanh_raw(lo);
        let t2 = mul_raw(&t, &t);
        let mut one = vec![T::zero(); t2.len()];
        one[0] = T::one();
        sub_raw(&one, &t2)
    })
}

fn atan_raw<T: Real>(a: &[T]) -> Vec<T> {
    chain_raw(a, T::atan, &|lo| {
        let mut d = mul_raw(lo, lo);
        d[0] = d[0] + T::one();
        recip_raw(&d)
    })
}

fn powi_raw<T: Real>(a: &[T], n: i32) -> Vec<T> {
    if n == 0 {
        let mut out = vec![T::zero(); a.len()];
        out[0] = T::one();
        return out;
    }
    let nf = T::from_i32(n).expect("small integer exponent");
    chain_raw(a, |v| v.powi(n), &|lo| scale_raw(&powi_raw(lo, n - 1), nf))
}

fn powf_raw<T: Real>(a: &[T], p: T) -> Vec<T> {
    chain_raw(a, |v| v.powf(p), &|lo| {
        scale_raw(&powf_raw(lo, p - T::one()), p)
    })
}

fn atan2_raw<T: Real>(y: &[T], x: &[T]) -> Vec<T> {
    if y.len() == 1 {
        return vec![y[0].atan2(x[0])];
    }
    let half = y.len() / 2;
    let (ylo, yhi) = y.split_at(half);
    let (xlo, xhi) = x.split_at(half);
    let mut out = atan2_raw(ylo, xlo);
    // d atan2(y, x) = (x dy - y dx) / (x² + y²)
    let num = sub_raw(&mul_raw(xlo, yhi), &mul_raw(ylo, xhi));
    let den = add_raw(&mul_raw(xlo, xlo), &mul_raw(ylo, ylo));
    out.extend(mul_raw(&num, &recip_raw(&den)));
    out
}

macro_rules! binary_ops {
    ($trait:ident, $method:ident, $raw:expr, $name:literal) => {
        impl<T: Real> $trait<&Jet<T>> for &Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: &Jet<T>) -> Jet<T> {
                Jet::finish($raw(&self.coeffs, &rhs.coeffs), self.fault.or(rhs.fault), $name)
            }
        }
        impl<T: Real> $trait<Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: Jet<T>) -> Jet<T> {
                (&self).$method(&rhs)
            }
        }
        impl<T: Real> $trait<&Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: &Jet<T>) -> Jet<T> {
                (&self).$method(rhs)
            }
        }
        impl<T: Real> $trait<Jet<T>> for &Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: Jet<T>) -> Jet<T> {
                self.$method(&rhs)
            }
        }
        impl<T: Real> $trait<T> for Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: T) -> Jet<T> {
                (&self).$method(&Jet::constant(rhs))
            }
        }
        impl<T: Real> $trait<T> for &Jet<T> {
            type Output = Jet<T>;
            fn $method(self, rhs: T) -> Jet<T> {
                self.$method(&Jet::constant(rhs))
            }
        }
    };
}

fn div_raw<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    mul_raw(a, &recip_raw(b))
}

binary_ops!(Add, add, add_raw, "add");
binary_ops!(Sub, sub, sub_raw, "sub");
binary_ops!(Mul, mul, mul_raw, "mul");
binary_ops!(Div, div, div_raw, "div");

impl<T: Real> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        -&self
    }
}

impl<T: Real> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        Jet {
            coeffs: scale_raw(&self.coeffs, -T::one()),
            fault: self.fault,
        }
    }
}

macro_rules! scalar_lhs {
    ($($t:ty),*) => {$(
        impl Add<Jet<$t>> for $t {
            type Output = Jet<$t>;
            fn add(self, rhs: Jet<$t>) -> Jet<$t> { rhs + self }
        }
        impl Add<&Jet<$t>> for $t {
            type Output = Jet<$t>;
            fn add(self, rhs: &Jet<$t>) -> Jet<$t> { rhs + self }
        }
        impl Sub<Jet<$t>> for $t {
            type Output = Jet<$t>;
            fn sub(self, rhs: Jet<$t>) -> Jet<$t> { Jet::constant(self) - rhs }
        }
        impl Sub<&Jet<$t>> for $t {
            type Output = Jet<$t>;
            fn sub(self, rhs: &Jet<$t>) -> Jet<$t> { Jet::constant(self) - rhs }
        }
        impl Mul<Jet<$t>> for $t {
            type Output = Jet<$t>;
            fn mul(self, rhs: Jet<$t>) -> Jet<$t> { rhs * self }
        }
        impl Mul<&Jet<$t>> for $t {
            type Output = Jet<$t>;
            fn mul(self, rhs: &Jet<$t>) -> Jet<$t> { rhs * self }
        }
        impl Div<Jet<$t>> for $t {
            type Output = Jet<$t>;
            fn div(self, rhs: Jet<$t>) -> Jet<$t> { Jet::constant(self) / rhs }
        }
        impl Div<&Jet<$t>> for $t {
            type Output = Jet<$t>;
            fn div(self, rhs: &Jet<$t>) -> Jet<$t> { Jet::constant(self) / rhs }
        }
    )*};
}

scalar_lhs!(f32, f64);
