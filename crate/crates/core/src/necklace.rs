//! Primitive proper necklaces.
//!
//! A proper cyclic word of length `n` over `q` letters has no equal adjacent
//! symbols, including the wrap-around pair. The rotation classes of the
//! aperiodic ones are counted here two ways: by a Möbius divisor sum and by
//! brute-force enumeration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{self, Count};
use crate::words::EnumerationCap;

/// Divisors of `n` in ascending order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut j = 1;
    while j * j <= n {
        if n.is_multiple_of(j) {
            small.push(j);
            if j * j != n {
                large.push(n / j);
            }
        }
        j += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// The Möbius function, by trial-division factorization.
pub fn mobius(j: u64) -> Result<i8> {
    if j == 0 {
        return Err(Error::Domain("μ(j) needs j ≥ 1".into()));
    }
    let mut rest = j;
    let mut sign = 1i8;
    let mut p = 2;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            rest /= p;
            if rest.is_multiple_of(p) {
                return Ok(0);
            }
            sign = -sign;
        }
        p += 1;
    }
    if rest > 1 {
        sign = -sign;
    }
    Ok(sign)
}

/// `Σ_{j | n} μ(j) (q - 1)^(n / j)`, valid for every `n ≥ 1`.
///
/// Positive and negative terms are accumulated separately so the sum stays
/// in unsigned arithmetic.
pub fn mobius_divisor_sum<T: Count>(n: u64, q: u64) -> Result<T> {
    if n == 0 || q < 2 {
        return Err(Error::Domain(format!(
            "need n ≥ 1 and q ≥ 2 (got n = {n}, q = {q})"
        )));
    }
    let mut plus = T::zero();
    let mut minus = T::zero();
    for j in divisors(n) {
        let term: T = num::pow(q - 1, (n / j) as u32)?;
        match mobius(j)? {
            1 => plus = num::add(&plus, &term)?,
            -1 => minus = num::add(&minus, &term)?,
            _ => {}
        }
    }
    num::sub(&plus, &minus)
        .ok_or_else(|| Error::NegativeResult(format!("divisor sum for n = {n}, q = {q}")))
}

/// `Σ_{j | n} μ(j) (-1)^(n / j)`. Multiplied by `q - 1` this is the term the
/// divisor-sum formula drops relative to the exact proper-coloring count; it
/// vanishes for every `n ≥ 3`.
pub fn wrap_correction(n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::Domain("n must be ≥ 1".into()));
    }
    divisors(n).into_iter().try_fold(0i64, |acc, j| {
        let sign = if (n / j).is_multiple_of(2) { 1 } else { -1 };
        Ok(acc + i64::from(mobius(j)?) * sign)
    })
}

/// `N_prim(n; q) = (1/n) Σ_{j | n} μ(j) (q - 1)^(n / j)`.
///
/// Gated to `n ≥ 3`: at `n = 2` the divisor sum gives 1 while the true class
/// count is `q (q - 1) / 2`.
pub fn primitive_count_formula<T: Count>(n: u64, q: u64) -> Result<T> {
    if q < 3 {
        return Err(Error::Domain(format!("q must be ≥ 3 (got {q})")));
    }
    if n <= 2 {
        return Err(Error::NotApplicable(format!(
            "the divisor-sum formula does not count proper necklaces of length {n}; use enumeration"
        )));
    }
    let total: T = mobius_divisor_sum(n, q)?;
    let n_t: T = num::from_u64(n)?;
    if !(total.clone() % n_t.clone()).is_zero() {
        return Err(Error::Domain(format!(
            "divisor sum {total} is not divisible by {n}"
        )));
    }
    Ok(total / n_t)
}

fn is_cyclically_proper(w: &[u8]) -> bool {
    let n = w.len();
    (0..n).all(|i| w[i] != w[(i + 1) % n])
}

/// True iff `w` is strictly smaller than each of its nontrivial rotations,
/// i.e. it is aperiodic and the canonical representative of its class.
fn is_strict_min_rotation(w: &[u8]) -> bool {
    let n = w.len();
    (1..n).all(|s| {
        let rotated = w[s..].iter().chain(&w[..s]);
        w.iter().lt(rotated)
    })
}

/// Rotation classes of aperiodic proper cyclic words of length `n` over `q`
/// letters, by visiting every proper linear word.
pub fn enumerate_primitive_colorings(n: usize, q: u8, cap: &EnumerationCap) -> Result<u64> {
    if n == 0 || q < 2 {
        return Err(Error::Domain(format!(
            "need n ≥ 1 and q ≥ 2 (got n = {n}, q = {q})"
        )));
    }
    let visited = u128::from(q).saturating_mul(u128::from(q - 1).saturating_pow(n as u32 - 1));
    EnumerationCap::check("word", visited, cap.words)?;

    fn walk(w: &mut Vec<u8>, n: usize, q: u8, count: &mut u64) {
        if w.len() == n {
            if is_cyclically_proper(w) && is_strict_min_rotation(w) {
                *count += 1;
            }
            return;
        }
        for s in 0..q {
            if w.last() != Some(&s) {
                w.push(s);
                walk(w, n, q, count);
                w.pop();
            }
        }
    }

    let mut count = 0;
    let mut w = Vec::with_capacity(n);
    if n == 1 {
        // A single letter is adjacent to itself around the wrap.
        return Ok(0);
    }
    walk(&mut w, n, q, &mut count);
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecklaceCount<T> {
    pub n: u64,
    pub q: u64,
    pub primitive_count: T,
    /// `n · primitive_count`: oriented edges on those cycles.
    pub oriented_edge_count: T,
}

impl<T: Count> NecklaceCount<T> {
    pub fn new(n: u64, q: u64, primitive_count: T) -> Result<Self> {
        let oriented_edge_count = num::mul(&num::from_u64(n)?, &primitive_count)?;
        Ok(NecklaceCount {
            n,
            q,
            primitive_count,
            oriented_edge_count,
        })
    }
}

/// Closed form for the top count: `Σ_{j | D+1} μ(j) d^((D+1)/j)`.
///
/// This counts the edges lying on primitive `(D+1)`-cycles. It coincides
/// with the census `ρ_D` only while `D ≤ 3`; for larger `D` a primitive
/// cycle can still carry edges that also lie on a shorter cycle.
pub fn rho_top_closed_form<T: Count>(d: u32, diameter: usize) -> Result<T> {
    if d < 2 {
        return Err(Error::Domain(format!("d must be ≥ 2 (got {d})")));
    }
    if diameter < 2 {
        return Err(Error::NotApplicable(
            "closed form needs D ≥ 2; use the census for D = 1".into(),
        ));
    }
    mobius_divisor_sum((diameter + 1) as u64, u64::from(d) + 1)
}
