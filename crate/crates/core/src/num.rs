//! Exact counting scalars.
//!
//! Every count in this crate is an unsigned exact integer. The engine is
//! generic over the concrete type so that small tables can run on machine
//! words while the default surface uses [`num_bigint::BigUint`].

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, Num, ToPrimitive, Unsigned};

use crate::error::{Error, Result};

/// An exact, unsigned counting scalar (`u32`, `u64`, `u128`, `BigUint`, ...).
pub trait Count:
    Clone
    + Ord
    + Debug
    + Display
    + FromStr
    + Num
    + Unsigned
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
}

impl<T> Count for T where
    T: Clone
        + Ord
        + Debug
        + Display
        + FromStr
        + Num
        + Unsigned
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

pub fn from_u64<T: Count>(value: u64) -> Result<T> {
    T::from_u64(value).ok_or(Error::Overflow)
}

pub fn from_u128<T: Count>(value: u128) -> Result<T> {
    T::from_u128(value).ok_or(Error::Overflow)
}

pub fn add<T: Count>(a: &T, b: &T) -> Result<T> {
    a.checked_add(b).ok_or(Error::Overflow)
}

pub fn mul<T: Count>(a: &T, b: &T) -> Result<T> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

/// `a - b`, or `None` when the result would be negative.
pub fn sub<T: Count>(a: &T, b: &T) -> Option<T> {
    a.checked_sub(b)
}

pub fn pow<T: Count>(base: u64, exp: u32) -> Result<T> {
    let base: T = from_u64(base)?;
    let mut acc = T::one();
    for _ in 0..exp {
        acc = mul(&acc, &base)?;
    }
    Ok(acc)
}

pub fn sum<'a, T: Count, I: IntoIterator<Item = &'a T>>(items: I) -> Result<T> {
    items.into_iter().try_fold(T::zero(), |acc, x| add(&acc, x))
}

/// Parse a decimal-string count.
pub fn parse_decimal<T: Count>(s: &str) -> Result<T> {
    T::from_str_radix(s, 10).map_err(|_| Error::Parse(format!("not a decimal count: {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn pow_matches_machine_arithmetic() {
        assert_eq!(pow::<u64>(3, 5).unwrap(), 243);
        assert_eq!(
            pow::<BigUint>(2, 100).unwrap().to_string(),
            "1267650600228229401496703205376"
        );
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(pow::<u32>(2, 40), Err(Error::Overflow)));
        assert_eq!(sub(&3u64, &5u64), None);
    }

    #[test]
    fn decimal_parse() {
        assert_eq!(parse_decimal::<u64>("162").unwrap(), 162);
        assert!(parse_decimal::<u64>("1.5").is_err());
    }
}
