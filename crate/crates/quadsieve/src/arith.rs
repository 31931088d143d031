//! Exact integer arithmetic primitives shared by the other modules.
//!
//! Everything here is deterministic integer arithmetic: floor/ceiling
//! division with correct behaviour on negative operands, the Kronecker
//! symbol, squarefreeness by trial division, discrete logarithms by
//! enumeration (the group orders in play never exceed a few thousand)
//! and CRT combination of residue constraints.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("input {0} exceeds the supported trial-division bound {1}")]
    UnsupportedSize(u64, u64),
    #[error("gcd({0}, {1}) > 1: argument is not a unit")]
    NotAUnit(u64, u64),
    #[error("{0} is not in the subgroup generated by {1} mod {2}")]
    NoDiscreteLog(u64, u64, u64),
    #[error("inconsistent residue constraints: {0} mod {1} vs {2} mod {3}")]
    InconsistentResidues(u64, u64, u64, u64),
    #[error("modulus must be >= 2, got {0}")]
    BadModulus(u64),
}

/// A residue class `value mod modulus` with `0 <= value < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    pub value: u64,
    pub modulus: u64,
}

impl Residue {
    pub fn new(value: i64, modulus: u64) -> Residue {
        assert!(modulus >= 2, "modulus must be >= 2");
        Residue {
            value: value.rem_euclid(modulus as i64) as u64,
            modulus,
        }
    }
}

impl std::fmt::Display for Residue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

/// Floor division for i64 (rounds towards negative infinity).
pub fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b) + if b < 0 && a.rem_euclid(b) != 0 { 1 } else { 0 }
}

/// Ceiling division a/b for b > 0, exact for negative numerators.
pub fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

/// Floor of `n / d` for big integers, rounding towards negative infinity.
pub fn floor_div_big(n: &BigInt, d: &BigInt) -> BigInt {
    n.div_floor(d)
}

/// Integer square root: the unique r with r^2 <= n < (r+1)^2.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "isqrt of negative input");
    n.sqrt()
}

/// Integer square root for machine words.
pub fn isqrt_u64(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    // f64 sqrt can be off by one in either direction near 2^53
    while r > 0 && r.checked_mul(r).map_or(true, |rr| rr > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |rr| rr <= n) {
        r += 1;
    }
    r
}

/// True iff n is a perfect square.
pub fn is_square_u64(n: u64) -> bool {
    let r = isqrt_u64(n);
    r * r == n
}

/// Kronecker symbol (a/n), extended to all integer pairs.
///
/// Agrees with the Jacobi symbol for odd positive n and with the Legendre
/// symbol for odd prime n. By convention (a/0) = 1 iff a = +-1, else 0.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut a = a as i128;
    let mut n = n as i128;
    let mut sign = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -1;
        }
    }
    // factor out twos from n; (a/2) = 0 for even a, else (2/a) by reciprocity convention
    let mut t = 0u32;
    while n % 2 == 0 {
        n /= 2;
        t += 1;
    }
    if t > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if t % 2 == 1 {
            let am8 = a.rem_euclid(8);
            if am8 == 3 || am8 == 5 {
                sign = -sign;
            }
        }
    }
    // Jacobi symbol (a/n) for odd n > 0 by binary reciprocity
    a = a.rem_euclid(n);
    let mut res = sign;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let nm8 = n % 8;
            if nm8 == 3 || nm8 == 5 {
                res = -res;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            res = -res;
        }
        a %= n;
    }
    if n == 1 {
        res
    } else {
        0
    }
}

/// Maximum input for the trial-division squarefreeness test.
pub const SQUAREFREE_BOUND: u64 = 1_000_000_000_000;

/// True iff no prime square divides n. Trial division up to sqrt(n);
/// inputs beyond [`SQUAREFREE_BOUND`] are rejected.
pub fn is_squarefree(n: u64) -> Result<bool, ArithError> {
    if n == 0 {
        return Ok(false);
    }
    if n > SQUAREFREE_BOUND {
        return Err(ArithError::UnsupportedSize(n, SQUAREFREE_BOUND));
    }
    let mut m = n;
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            m /= d;
            if m % d == 0 {
                return Ok(false);
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    Ok(true)
}

/// Prime divisors of n (each listed once), by trial division.
pub fn prime_divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m = n;
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Primality by trial division; fine for the moduli this toolkit uses.
pub fn is_prime(n: u64) -> bool {
    n >= 2 && prime_divisors(n) == [n]
}

/// Modular exponentiation base^exp mod m.
pub fn pow_mod(base: u64, exp: u64, m: u64) -> u64 {
    let mut result = 1u128;
    let mut b = (base % m) as u128;
    let mut e = exp;
    let m = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    result as u64
}

/// Multiplicative order of a mod m; requires gcd(a, m) = 1.
pub fn mult_order(a: u64, m: u64) -> Result<u64, ArithError> {
    if gcd_u64(a, m) != 1 {
        return Err(ArithError::NotAUnit(a, m));
    }
    let mut cur = a % m;
    let mut ord = 1u64;
    while cur != 1 {
        cur = (cur as u128 * a as u128 % m as u128) as u64;
        ord += 1;
        if ord > m {
            return Err(ArithError::BadModulus(m));
        }
    }
    Ok(ord)
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Modular inverse of a mod m via extended gcd; requires gcd(a, m) = 1.
pub fn inv_mod(a: u64, m: u64) -> Result<u64, ArithError> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return Err(ArithError::NotAUnit(a, m));
    }
    Ok(t.rem_euclid(m as i128) as u64)
}

/// Smallest b >= 0 with g^b = a (mod m), by direct enumeration.
///
/// Errors if a is not a unit mod m or not in the subgroup generated by g.
pub fn discrete_log(g: u64, a: u64, m: u64) -> Result<u64, ArithError> {
    if m < 2 {
        return Err(ArithError::BadModulus(m));
    }
    let a = a % m;
    if gcd_u64(a, m) != 1 {
        return Err(ArithError::NotAUnit(a, m));
    }
    let mut cur = 1u64 % m;
    for b in 0..m {
        if cur == a {
            return Ok(b);
        }
        cur = (cur as u128 * g as u128 % m as u128) as u64;
    }
    Err(ArithError::NoDiscreteLog(a, g, m))
}

/// Merge residue constraints into a single constraint mod the lcm.
///
/// Non-coprime moduli are accepted when the constraints agree on the
/// common factor; disagreement is an error.
pub fn crt_combine(constraints: &[Residue]) -> Result<Residue, ArithError> {
    let mut acc = match constraints.first() {
        Some(r) => *r,
        None => return Err(ArithError::BadModulus(0)),
    };
    for c in &constraints[1..] {
        acc = crt_pair(acc, *c)?;
    }
    Ok(acc)
}

fn crt_pair(a: Residue, b: Residue) -> Result<Residue, ArithError> {
    let g = gcd_u64(a.modulus, b.modulus);
    if (a.value % g) != (b.value % g) {
        return Err(ArithError::InconsistentResidues(
            a.value, a.modulus, b.value, b.modulus,
        ));
    }
    let lcm = a.modulus / g * b.modulus;
    // x = a.value + a.modulus * k, need a.modulus * k = b.value - a.value (mod b.modulus)
    let m1 = (a.modulus / g) as u128;
    let m2 = (b.modulus / g) as u128;
    let diff = ((b.value as i128 - a.value as i128) / g as i128).rem_euclid(m2 as i128) as u128;
    let inv = inv_mod((m1 % m2) as u64, m2 as u64)? as u128;
    let k = diff * inv % m2;
    let x = (a.value as u128 + a.modulus as u128 * k) % lcm as u128;
    Ok(Residue {
        value: x as u64,
        modulus: lcm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;
    use proptest::prelude::*;

    #[test]
    fn isqrt_small_values() {
        assert_eq!(isqrt(&BigInt::from(0)), BigInt::from(0));
        assert_eq!(isqrt(&BigInt::from(361)), BigInt::from(19));
        assert_eq!(isqrt(&BigInt::from(130)), BigInt::from(11));
        assert_eq!(isqrt_u64(0), 0);
        assert_eq!(isqrt_u64(361), 19);
        assert_eq!(isqrt_u64(130), 11);
    }

    #[test]
    fn kronecker_paper_values() {
        // Appendix-style checks: (17/61) = -1, 61 | 2501 gives 0
        assert_eq!(kronecker(17, 61), -1);
        assert_eq!(kronecker(2501, 61), 0);
        assert_eq!(2501 % 61, 0);
        for a in -20..20 {
            assert_eq!(kronecker(a, 1), 1);
        }
    }

    #[test]
    fn kronecker_prime_matches_square_enumeration() {
        for &p in &[3i64, 5, 7, 11, 13, 61, 41, 197, 199] {
            let squares: std::collections::HashSet<i64> =
                (1..p).map(|x| x * x % p).collect();
            for a in 0..p {
                let expect = if a == 0 {
                    0
                } else if squares.contains(&a) {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(a, p), expect, "a={} p={}", a, p);
            }
        }
    }

    #[test]
    fn squarefree_examples() {
        assert_eq!(is_squarefree(130), Ok(true));
        assert_eq!(is_squarefree(18), Ok(false));
        assert_eq!(is_squarefree(1), Ok(true));
        assert!(matches!(
            is_squarefree(SQUAREFREE_BOUND + 1),
            Err(ArithError::UnsupportedSize(_, _))
        ));
    }

    #[test]
    fn discrete_log_examples() {
        assert_eq!(discrete_log(2, 8, 25), Ok(3));
        assert_eq!(discrete_log(3, 5, 7), Ok(5));
        assert_eq!(discrete_log(2, 1, 25), Ok(0));
        assert!(matches!(
            discrete_log(2, 5, 25),
            Err(ArithError::NotAUnit(5, 25))
        ));
        // 4 generates only squares mod 7; 3 is not among them
        assert!(matches!(
            discrete_log(4, 3, 7),
            Err(ArithError::NoDiscreteLog(3, 4, 7))
        ));
    }

    #[test]
    fn crt_examples() {
        let r = crt_combine(&[Residue::new(2, 25), Residue::new(3, 7)]).unwrap();
        assert_eq!((r.value, r.modulus), (52, 175));
        let r = crt_combine(&[Residue::new(9, 14)]).unwrap();
        assert_eq!((r.value, r.modulus), (9, 14));
        let r = crt_combine(&[Residue::new(1, 3), Residue::new(1, 5)]).unwrap();
        assert_eq!((r.value, r.modulus), (1, 15));
        // non-coprime, consistent
        let r = crt_combine(&[Residue::new(2, 6), Residue::new(5, 9)]).unwrap();
        assert_eq!((r.value, r.modulus), (14, 18));
        // non-coprime, inconsistent
        assert!(crt_combine(&[Residue::new(2, 6), Residue::new(4, 9)]).is_err());
    }

    #[test]
    fn order_and_inverse() {
        assert_eq!(mult_order(2, 25), Ok(20));
        assert_eq!(mult_order(10, 61), Ok(60));
        assert_eq!(inv_mod(27, 61), Ok(52));
        assert_eq!(is_prime(1861), true);
        assert_eq!(is_prime(175), false);
        assert_eq!(prime_divisors(175), vec![5, 7]);
    }

    proptest! {
        #[test]
        fn isqrt_contract(n in any::<u128>()) {
            let big = BigInt::from_u128(n).unwrap();
            let r = isqrt(&big);
            prop_assert!(&r * &r <= big);
            let r1 = &r + 1;
            prop_assert!(&r1 * &r1 > big);
        }

        #[test]
        fn kronecker_multiplicative(a in -500i64..500, b in -500i64..500, n in (1i64..300).prop_map(|k| 2*k+1)) {
            prop_assert_eq!(
                kronecker(a, n) * kronecker(b, n),
                kronecker(a.wrapping_mul(b), n)
            );
        }

        #[test]
        fn discrete_log_round_trip(b in 0u64..20) {
            // 2 generates (Z/25)*; round-trip through pow_mod
            let a = pow_mod(2, b, 25);
            let l = discrete_log(2, a, 25).unwrap();
            prop_assert_eq!(pow_mod(2, l, 25), a);
            prop_assert_eq!(l, b % 20);
        }
    }
}
