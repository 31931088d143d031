//! quadsieve: a verification toolkit for class numbers of the real
//! quadratic fields Q(sqrt(n^2+1)) and the family D(b,s,k) = tau^k + (b tau^k + s)^2
//! with tau = 4bs+1.
//!
//! The crate is organised around the verification artifacts:
//!
//! * [`arith`] — exact integer primitives (Kronecker symbol, isqrt, CRT, ...).
//! * [`charmod`] — Dirichlet characters reduced through a prime-ideal residue
//!   map into Z/r, and the character sums m, A, B driving the sieve.
//! * [`sieve`] — the residue-class elimination pipeline over the four
//!   configured character stages.
//! * [`contfrac`] — exact continued fractions of quadratic irrationals,
//!   closed-form family expansions, fundamental units, convergent bounds.
//! * [`quadfield`] — class-number oracles (form-class cycles and the analytic
//!   class number formula) and the family scans.
//! * [`zeta`] — high-precision verification of the L-function and zeta
//!   identities relating the character sums to special values.

pub mod arith;
pub mod charmod;
pub mod contfrac;
pub mod hp;
pub mod quadfield;
pub mod sieve;
pub mod zeta;
