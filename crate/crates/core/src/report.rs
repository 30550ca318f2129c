//! JSON rendering helpers for CLI reports.
//!
//! Exact rationals are emitted as `{"num": .., "den": .., "float": ..}`.
//! Numerator and denominator are JSON integers while they fit in 64 bits
//! and decimal strings beyond that, so reports stay loss-free.

use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::ToPrimitive;
use serde_json::{json, Value};

pub fn bigint_value(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn biguint_value(x: &BigUint) -> Value {
    match x.to_u64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn rational_value(r: &BigRational) -> Value {
    json!({
        "num": bigint_value(r.numer()),
        "den": bigint_value(r.denom()),
        "float": rational_to_f64(r),
    })
}

/// Nearest f64 to an exact rational; falls back to the string route only
/// for magnitudes beyond f64 range.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
