//! Scalar abstraction shared by the floating-point layers.
//!
//! Exact computations (marks, spectra, candidate sets) use [`Rational`];
//! everything that touches matrices or quadrature is generic over [`Real`].

use nalgebra::RealField;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive};

/// Arbitrary-precision rational used for all exact bookkeeping.
pub type Rational = BigRational;

/// Floating point scalar: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Machine epsilon as an `f64`.
    const EPS: f64;

    /// Converts an `f64` literal. Never fails for the implementing types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// A tolerance pinned for `f64` arithmetic, widened to stay meaningful
    /// when the scalar carries fewer digits.
    fn tol(base: f64) -> Self {
        Self::lit(base.max(Self::EPS * 1.0e3))
    }
}

impl Real for f32 {
    const EPS: f64 = f32::EPSILON as f64;
}

impl Real for f64 {
    const EPS: f64 = f64::EPSILON;
}

/// Converts an exact rational into a float of the requested precision.
pub fn rational_to_real<T: Real>(q: &Rational) -> T {
    T::lit(rational_to_f64(q))
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    // BigRational::to_f64 handles huge numerators/denominators correctly.
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite `f64` (every finite double is a dyadic rational).
pub fn f64_to_rational(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.3"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Ok(n) = t.parse::<BigInt>() {
        return Some(BigRational::from_integer(n));
    }
    parse_decimal(t)
}

fn parse_decimal(t: &str) -> Option<Rational> {
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let negative = mantissa.starts_with('-');
    let body = mantissa.trim_start_matches(['+', '-']);
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = BigRational::from_integer(digits);
    if scale >= 0 {
        q *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -q } else { q })
}

/// Renders a rational as `"p/q"` (or `"p"` when integral).
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Recovers a small-denominator rational from a float, if one lies within
/// `rel_tol` (relative to `max(1, |x|)`).
pub fn recognize_rational(x: f64, max_denominator: u64, rel_tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let scale = x.abs().max(1.0);
    // Continued-fraction convergents.
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 as u64 > max_denominator {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= rel_tol * scale {
            return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = rest - a;
        if frac.abs() < 1e-300 {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}
