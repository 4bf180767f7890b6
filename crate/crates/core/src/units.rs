//! Conversions between the linear units used at the API boundary and the
//! angular units used inside Hamiltonians and propagators.

use std::f64::consts::TAU;

/// Linear frequency in GHz to angular frequency in rad/ns.
#[inline]
pub fn ghz_to_rad_per_ns(f: f64) -> f64 {
    TAU * f
}

/// Angular frequency in rad/ns to linear GHz.
#[inline]
pub fn rad_per_ns_to_ghz(w: f64) -> f64 {
    w / TAU
}

#[inline]
pub fn mhz_to_ghz(f: f64) -> f64 {
    f * 1e-3
}

#[inline]
pub fn ghz_to_mhz(f: f64) -> f64 {
    f * 1e3
}

#[inline]
pub fn us_to_ns(t: f64) -> f64 {
    t * 1e3
}
