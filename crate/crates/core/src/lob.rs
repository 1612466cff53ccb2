//! Milnor's Lobachevsky function `Л(x) = -∫₀ˣ log|2 sin ξ| dξ` and its derivatives.
//!
//! The argument is reduced into `[-π/2, π/2]` using π-periodicity and
//! oddness, then the series
//!
//! ```text
//! Л(θ) = θ − θ log|2θ| + Σ_{n≥1} ζ(2n) θ^{2n+1} / (n (2n+1) π^{2n})
//! ```
//!
//! is summed with Neumaier compensation. On the reduced interval the ratio of
//! consecutive terms is at most 1/4, so about 25 terms reach double precision.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LobError {
    #[error("Lobachevsky function argument is not finite: {0}")]
    NonFinite(f64),
    #[error("log|2 sin x| is singular at integer multiples of pi (x = {0})")]
    Singular(f64),
}

/// ζ(2n) for n = 1..=40, 21 significant digits.
const ZETA_EVEN: [f64; 40] = [
    1.64493406684822643647,
    1.08232323371113819152,
    1.01734306198444913971,
    1.00407735619794433938,
    1.00099457512781808534,
    1.0002460865533080483,
    1.00006124813505870483,
    1.00001528225940865187,
    1.00000381729326499984,
    1.0000009539620338728,
    1.00000023845050272773,
    1.00000005960818905126,
    1.00000001490155482837,
    1.00000000372533402479,
    1.00000000093132743242,
    1.00000000023283118337,
    1.00000000005820772088,
    1.00000000001455192189,
    1.00000000000363797955,
    1.00000000000090949478,
    1.00000000000022737368,
    1.00000000000005684342,
    1.00000000000001421085,
    1.00000000000000355271,
    1.00000000000000088818,
    1.00000000000000022204,
    1.00000000000000005551,
    1.00000000000000001388,
    1.00000000000000000347,
    1.00000000000000000087,
    1.00000000000000000022,
    1.00000000000000000005,
    1.00000000000000000001,
    1.0,
    1.0,
    1.0,
    1.0,
    1.0,
    1.0,
    1.0,
];

/// Low-order correction of `T::PI()` towards the true π (Cody–Waite split).
fn pi_lo<T: Real>() -> T {
    let hi_as_f64 = T::PI().to_f64().unwrap_or(std::f64::consts::PI);
    T::lit(std::f64::consts::PI - hi_as_f64) + T::lit(1.2246467991473532e-16)
}

/// Reduces `x` to `x - kπ` with the result in roughly `[-π/2, π/2]`.
pub(crate) fn reduce_mod_pi<T: Real>(x: T) -> T {
    let k = (x / T::PI()).round();
    if k == T::zero() {
        return x;
    }
    (x - k * T::PI()) - k * pi_lo::<T>()
}

/// True when `x` is exactly (in `T` arithmetic) an integer multiple of π/2.
fn is_half_pi_multiple<T: Real>(x: T) -> bool {
    let m = (x / T::FRAC_PI_2()).round();
    m * T::FRAC_PI_2() == x
}

struct Neumaier<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Neumaier<T> {
    fn new() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }

    fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp = self.comp + ((self.sum - t) + v);
        } else {
            self.comp = self.comp + ((v - t) + self.sum);
        }
        self.sum = t;
    }

    fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// Series evaluation for `0 < θ ≤ ~π/2`.
fn lob_reduced<T: Real>(theta: T) -> T {
    let two = T::lit(2.0);
    let mut acc = Neumaier::new();
    acc.add(theta);
    acc.add(-theta * (two * theta).ln());

    let u = (theta / T::PI()).powi(2);
    let cutoff = T::lit(1e-16).min(T::epsilon() * T::lit(1e-3));
    let mut power = theta;
    for (i, zeta) in ZETA_EVEN.iter().enumerate() {
        let n = T::lit((i + 1) as f64);
        power = power * u;
        let term = T::lit(*zeta) * power / (n * (two * n + T::one()));
        acc.add(term);
        if term < cutoff {
            break;
        }
    }
    acc.value()
}

/// Milnor's Lobachevsky function.
///
/// Exactly zero at integer multiples of π/2 (as represented in `T`).
pub fn lob<T: Real>(x: T) -> Result<T, LobError> {
    if !x.is_finite() {
        return Err(LobError::NonFinite(x.to_f64().unwrap_or(f64::NAN)));
    }
    if is_half_pi_multiple(x) {
        return Ok(T::zero());
    }
    let r = reduce_mod_pi(x);
    if r == T::zero() {
        return Ok(T::zero());
    }
    let value = lob_reduced(r.abs());
    Ok(if r < T::zero() { -value } else { value })
}

/// Panicking convenience wrapper for arguments known to be finite.
pub(crate) fn lob_unchecked<T: Real>(x: T) -> T {
    lob(x).expect("finite Lobachevsky argument")
}

fn check_regular<T: Real>(x: T) -> Result<T, LobError> {
    if !x.is_finite() {
        return Err(LobError::NonFinite(x.to_f64().unwrap_or(f64::NAN)));
    }
    let r = reduce_mod_pi(x);
    let scale = T::one() + x.abs();
    if r.abs() <= T::epsilon() * T::lit(4.0) * scale {
        return Err(LobError::Singular(x.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(r)
}

/// `Л'(x) = -log|2 sin x|`.
pub fn lob_deriv<T: Real>(x: T) -> Result<T, LobError> {
    let r = check_regular(x)?;
    Ok(-(T::lit(2.0) * r.sin().abs()).ln())
}

/// `Л''(x) = -cot x`.
pub fn lob_second_deriv<T: Real>(x: T) -> Result<T, LobError> {
    let r = check_regular(x)?;
    Ok(-r.cos() / r.sin())
}
