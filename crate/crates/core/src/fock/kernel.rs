//! The exponential-vector kernel `<exp g, exp h> = e^{<g,h>}` and its
//! vacuum-filtered variants, evaluated in a log-scaled form so that coherent
//! amplitudes of any size can be paired without overflow.

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::hilbert::{ModeVector, Region};
use crate::linalg::{cexpm1, ln_expm1};

use super::Factor;

/// `e^{<g,h>}`.
pub fn kernel(g: &ModeVector, h: &ModeVector) -> Result<C64> {
    Ok(g.inner(h)?.exp())
}

/// `e^{<g,h> - ||g||^2/2 - ||h||^2/2}`, the overlap of normalized coherent
/// vectors. Bounded by one in modulus.
pub fn normalized_kernel(g: &ModeVector, h: &ModeVector) -> Result<C64> {
    let z = g.inner(h)?;
    Ok((z - C64::from(0.5 * (g.norm_sqr() + h.norm_sqr()))).exp())
}

/// A complex number stored as `mantissa * e^{log_scale}`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Scaled {
    mantissa: C64,
    log_scale: f64,
}

impl Scaled {
    fn exp(z: C64) -> Self {
        Scaled { mantissa: C64::from_polar(1.0, z.im), log_scale: z.re }
    }

    fn expm1(z: C64) -> Self {
        if z.re > 0.5 {
            Scaled { mantissa: C64::from_polar(1.0, z.im) * (C64::from(1.0) - (-z).exp()), log_scale: z.re }
        } else {
            Scaled { mantissa: cexpm1(z), log_scale: 0.0 }
        }
    }

    fn mul(self, other: Scaled) -> Self {
        Scaled { mantissa: self.mantissa * other.mantissa, log_scale: self.log_scale + other.log_scale }
    }

    fn add(self, other: Scaled) -> Self {
        let s = self.log_scale.max(other.log_scale);
        Scaled {
            mantissa: self.mantissa * (self.log_scale - s).exp() + other.mantissa * (other.log_scale - s).exp(),
            log_scale: s,
        }
    }

    /// `value * e^{-shift}`.
    pub(crate) fn shifted(self, shift: f64) -> C64 {
        if self.mantissa == C64::new(0.0, 0.0) {
            return self.mantissa;
        }
        self.mantissa * (self.log_scale - shift).exp()
    }
}

/// `ln ||F_X exp h||^2` (or `ln ||exp h||^2` without a filter); `-inf` when
/// the filtered vector vanishes.
pub(crate) fn log_norm_sqr(vector: &ModeVector, filter: Option<&Region>) -> f64 {
    match filter {
        None => vector.norm_sqr(),
        Some(x) => {
            let inside = vector.norm_sqr_on(x);
            let outside = vector.norm_sqr_on(&x.complement());
            outside + ln_expm1(inside)
        }
    }
}

/// `1 - e^{-z}` in scaled form.
fn one_minus_exp_neg(z: C64) -> Scaled {
    let e = Scaled::expm1(-z);
    Scaled { mantissa: -e.mantissa, log_scale: e.log_scale }
}

/// `e^{||h||^2/2} / ||F_X exp h||`, equal to `(1 - e^{-||h chi_X||^2})^{-1/2}`.
fn filter_norm_ratio(h: &ModeVector, filter: Option<&Region>) -> f64 {
    match filter {
        None => 1.0,
        Some(x) => 1.0 / (-(-h.norm_sqr_on(x)).exp_m1()).sqrt(),
    }
}

/// Overlap of two unit-normalized factors `|F_X exp g>`, `|F_Y exp h>`.
///
/// With `F_X = 1 - Gamma(P_{X^c})` the unnormalized overlap is
/// `e^{<g,h>}` times a filter correction built from `1 - e^{-z}` of partial
/// inner products. The Gaussian part `e^{<g,h> - |g|^2/2 - |h|^2/2}` is
/// evaluated as `e^{-|g-h|^2/2 + i Im<g,h>}`, which avoids subtracting
/// large exponents when the vectors are long.
pub(crate) fn factor_overlap(a: &Factor, b: &Factor) -> C64 {
    let (g, h) = (&a.vector, &b.vector);
    let full = Region::full(g.dim());
    let z = g.inner_on(h, &full);
    let distance = g.coeffs().iter().zip(h.coeffs().iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>();
    let gaussian = Scaled::exp(C64::new(-0.5 * distance, z.im));
    let correction = match (a.filter.as_ref(), b.filter.as_ref()) {
        (None, None) => Scaled::exp(C64::new(0.0, 0.0)),
        (Some(r), None) | (None, Some(r)) => one_minus_exp_neg(g.inner_on(h, r)),
        (Some(x), Some(y)) => {
            // (1 - e^{-z_A}) + e^{-z_A} (1 - e^{-z_B}) (1 - e^{-z_C})
            let za = g.inner_on(h, &x.intersect(y));
            let zb = g.inner_on(h, &x.minus(y));
            let zc = g.inner_on(h, &y.minus(x));
            let cross = Scaled::exp(-za).mul(one_minus_exp_neg(zb)).mul(one_minus_exp_neg(zc));
            one_minus_exp_neg(za).add(cross)
        }
    };
    let scale = filter_norm_ratio(g, a.filter.as_ref()) * filter_norm_ratio(h, b.filter.as_ref());
    gaussian.mul(correction).shifted(0.0) * scale
}
