//! Dirichlet characters of composite odd conductor evaluated through a
//! residue map into Z/r, together with the character sums that drive the
//! residue-class sieve.
//!
//! A character is configured as a list of components (modulus, generator,
//! image): the modulus is a prime power, the generator a primitive root mod
//! that prime power, and the image the residue mod r assigned to the value of
//! the character on the generator. The prime ideal of the cyclotomic value
//! field never appears explicitly; it is realised operationally by these
//! images, so every computation happens in plain machine integers.
//!
//! The sums provided are
//!
//! ```text
//! m_chi    = sum_{a=1}^{q} a chi(a)
//! A_chi(n) = sum_{0<=C,D<q} chi(D^2 - C^2 - n C D) ceil((nC - D)/q) (C - q)
//! B_chi(a) = sum_{0<=C,D<q} chi(D^2 - C^2 - a C D) C (C - q)
//! ```
//!
//! all reduced mod r, and the grid transformation
//! `T(C,D) = (D - mult*C mod q, C)` under which the quadratic form
//! `Q(C,D) = D^2 - C^2 - mult*C*D` changes sign mod q.

use crate::arith::{
    self, ceil_div, discrete_log, gcd_u64, is_prime, mult_order, pow_mod, prime_divisors, Residue,
};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CharError {
    #[error("component modulus {0} is not a prime power >= 3")]
    BadComponentModulus(u64),
    #[error("{0} is not a unit mod {1}")]
    GeneratorNotUnit(u64, u64),
    #[error("{0} is not a primitive root mod {1} (order {2} < {3})")]
    GeneratorNotPrimitive(u64, u64, u64, u64),
    #[error("component image {0} mod {1} is trivial")]
    TrivialComponent(u64, u64),
    #[error("component (modulus {0}) factors through a smaller conductor: image order {1} divides phi of {2}")]
    ImprimitiveComponent(u64, u64, u64),
    #[error("image {0} has order not dividing the unit group order {1} mod r={2}")]
    ImageOrderInvalid(u64, u64, u64),
    #[error("component moduli are not pairwise coprime")]
    ModuliNotCoprime,
    #[error("conductor {0} is not the product {1} of the component moduli")]
    ConductorMismatch(u64, u64),
    #[error("conductor {0} must be odd")]
    EvenConductor(u64),
    #[error("target prime r={0} must be an odd prime")]
    BadTargetPrime(u64),
    #[error("character is not odd: chi(-1) = {0} mod {1}")]
    NotOdd(u64, u64),
    #[error("multiplicativity failed at a={0}, b={1}")]
    NotMultiplicative(u64, u64),
    #[error("config parse error at line {0}: {1}")]
    Config(usize, String),
    #[error(transparent)]
    Arith(#[from] arith::ArithError),
}

/// One prime-power component of a character: the value on `generator`
/// is represented by `image` mod the target prime r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharacterComponent {
    pub modulus: u64,
    pub generator: u64,
    pub image: u64,
}

/// A Dirichlet character of odd conductor q whose values are residues mod
/// an odd prime r (the image of a prime ideal of the value field).
#[derive(Debug, Clone)]
pub struct CharacterModI {
    pub label: String,
    pub conductor: u64,
    pub target_prime: u64,
    pub components: Vec<CharacterComponent>,
    /// documentation string for the ideal, carried through from the config
    pub ideal: String,
    /// chi(a) for a in [0, q), precomputed at validation
    table: Vec<u64>,
}

impl CharacterModI {
    /// Build and validate a character from its component data.
    pub fn new(
        label: &str,
        conductor: u64,
        target_prime: u64,
        components: Vec<CharacterComponent>,
        ideal: &str,
    ) -> Result<CharacterModI, CharError> {
        let mut chi = CharacterModI {
            label: label.to_string(),
            conductor,
            target_prime,
            components,
            ideal: ideal.to_string(),
            table: Vec::new(),
        };
        chi.validate()?;
        Ok(chi)
    }

    /// Run every construction-time check and fill the value table.
    ///
    /// Checks: each component modulus is a prime power >= 3 with a genuine
    /// primitive root, images are nontrivial with valid order (so each
    /// component is primitive of its prime-power conductor), the conductor is
    /// the odd product of the moduli, r is an odd prime, chi(-1) = -1, and
    /// complete multiplicativity holds (exhaustive for q <= 2000).
    pub fn validate(&mut self) -> Result<(), CharError> {
        let q = self.conductor;
        let r = self.target_prime;
        if q % 2 == 0 {
            return Err(CharError::EvenConductor(q));
        }
        if r < 3 || !is_prime(r) {
            return Err(CharError::BadTargetPrime(r));
        }
        let mut prod = 1u64;
        for c in &self.components {
            let ps = prime_divisors(c.modulus);
            if c.modulus < 3 || ps.len() != 1 {
                return Err(CharError::BadComponentModulus(c.modulus));
            }
            let p = ps[0];
            let group_order = c.modulus / p * (p - 1); // phi(p^k)
            if gcd_u64(c.generator, c.modulus) != 1 {
                return Err(CharError::GeneratorNotUnit(c.generator, c.modulus));
            }
            let g_ord = mult_order(c.generator, c.modulus)?;
            if g_ord != group_order {
                return Err(CharError::GeneratorNotPrimitive(
                    c.generator,
                    c.modulus,
                    g_ord,
                    group_order,
                ));
            }
            if c.image % r == 1 % r || c.image % r == 0 {
                return Err(CharError::TrivialComponent(c.image, c.modulus));
            }
            if pow_mod(c.image, g_ord, r) != 1 {
                return Err(CharError::ImageOrderInvalid(c.image, g_ord, r));
            }
            // primitivity of the component: its order must not divide
            // phi(p^(k-1)), else it factors through the smaller modulus
            let image_ord = mult_order(c.image % r, r)?;
            if c.modulus > p {
                let smaller = c.modulus / p;
                let phi_smaller = if smaller == 1 {
                    1
                } else {
                    smaller / p * (p - 1)
                };
                if phi_smaller % image_ord == 0 {
                    return Err(CharError::ImprimitiveComponent(
                        c.modulus, image_ord, smaller,
                    ));
                }
            }
            if gcd_u64(prod, c.modulus) != 1 {
                return Err(CharError::ModuliNotCoprime);
            }
            prod *= c.modulus;
        }
        if prod != q {
            return Err(CharError::ConductorMismatch(q, prod));
        }
        // value table
        let mut table = vec![0u64; q as usize];
        for a in 0..q {
            table[a as usize] = self.eval_slow(a)?;
        }
        self.table = table;
        // oddness
        let at_minus1 = self.table[(q - 1) as usize];
        if at_minus1 != r - 1 {
            return Err(CharError::NotOdd(at_minus1, r));
        }
        // complete multiplicativity, exhaustive for small conductors
        if q <= 2000 {
            for a in 0..q {
                for b in 0..q {
                    let lhs = self.table[(a * b % q) as usize];
                    let rhs = self.table[a as usize] * self.table[b as usize] % r;
                    if lhs != rhs {
                        return Err(CharError::NotMultiplicative(a, b));
                    }
                }
            }
        }
        Ok(())
    }

    fn eval_slow(&self, a: u64) -> Result<u64, CharError> {
        let r = self.target_prime;
        let mut v = 1u64;
        for c in &self.components {
            if gcd_u64(a % c.modulus, c.modulus) != 1 {
                return Ok(0);
            }
            let l = discrete_log(c.generator, a % c.modulus, c.modulus)?;
            v = v * pow_mod(c.image, l, r) % r;
        }
        Ok(v)
    }

    /// chi(a) as a residue mod r; 0 when gcd(a, q) > 1.
    pub fn evaluate(&self, a: i64) -> Residue {
        let idx = a.rem_euclid(self.conductor as i64) as usize;
        Residue {
            value: self.table[idx],
            modulus: self.target_prime,
        }
    }

    #[inline]
    pub(crate) fn value_at(&self, a: i64) -> u64 {
        self.table[a.rem_euclid(self.conductor as i64) as usize]
    }

    /// Order of the character (lcm of the component image orders mod r).
    pub fn order(&self) -> u64 {
        let r = self.target_prime;
        self.components
            .iter()
            .map(|c| mult_order(c.image % r, r).expect("validated image"))
            .fold(1, num_integer::lcm)
    }
}

/// m_chi = sum_{a=1}^{q} a chi(a) mod r.
pub fn m_char(chi: &CharacterModI) -> Residue {
    let q = chi.conductor;
    let r = chi.target_prime;
    let mut acc = 0u128;
    for a in 1..=q {
        acc += (a % r) as u128 * chi.value_at(a as i64) as u128;
    }
    Residue {
        value: (acc % r as u128) as u64,
        modulus: r,
    }
}

/// The quadratic form Q(C, D) = D^2 - C^2 - a*C*D.
pub fn q_form(a: i64, c: i64, d: i64) -> i64 {
    d * d - c * c - a * c * d
}

/// A_chi(n) = sum over the (C,D) grid of chi(Q(C,D)) ceil((nC-D)/q) (C-q), mod r.
pub fn a_sum(chi: &CharacterModI, n: i64) -> Residue {
    let q = chi.conductor as i64;
    let r = chi.target_prime;
    let mut acc = 0i128;
    for c in 0..q {
        for d in 0..q {
            let v = chi.value_at(q_form(n, c, d));
            if v != 0 {
                let w = ceil_div(n * c - d, q) % r as i64 * ((c - q) % r as i64) % r as i64;
                acc += v as i128 * w as i128;
            }
        }
    }
    Residue {
        value: acc.rem_euclid(r as i128) as u64,
        modulus: r,
    }
}

/// B_chi(a) = sum over the (C,D) grid of chi(Q(C,D)) C (C-q), mod r.
pub fn b_sum(chi: &CharacterModI, a: i64) -> Residue {
    let q = chi.conductor as i64;
    let r = chi.target_prime;
    let mut acc = 0i128;
    for c in 0..q {
        for d in 0..q {
            let v = chi.value_at(q_form(a, c, d));
            if v != 0 {
                acc += v as i128 * (c * (c - q)) as i128;
            }
        }
    }
    Residue {
        value: acc.rem_euclid(r as i128) as u64,
        modulus: r,
    }
}

/// The grid permutation T(C, D) = (D - mult*C - q*floor((D - mult*C)/q), C).
///
/// `mult` is the multiplier the caller pairs with the form Q (2n in the
/// sieve, 2s in the family congruences).
pub fn t_transform(mult: i64, q: u64, c: u64, d: u64) -> (u64, u64) {
    debug_assert!(c < q && d < q);
    let qc = (d as i64 - mult * c as i64).rem_euclid(q as i64) as u64;
    (qc, c)
}

/// Parsed stage description: a character plus its sieve target prime.
#[derive(Debug, Clone)]
pub struct StageConfig {
    pub chi: CharacterModI,
}

/// Parse the line-oriented stage config format:
///
/// ```text
/// [stage]
/// label = chi1
/// q = 175
/// r = 61
/// ideal = "(61, i*w*x - 10)"      # documentation only, not interpreted
/// component = 25 2 8              # modulus generator image
/// component = 7 3 47
/// ```
pub fn parse_stages(text: &str) -> Result<Vec<StageConfig>, CharError> {
    struct Raw {
        label: String,
        q: Option<u64>,
        r: Option<u64>,
        ideal: String,
        components: Vec<CharacterComponent>,
        line: usize,
    }
    let mut raws: Vec<Raw> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line == "[stage]" {
            raws.push(Raw {
                label: String::new(),
                q: None,
                r: None,
                ideal: String::new(),
                components: Vec::new(),
                line: lineno,
            });
            continue;
        }
        let cur = raws
            .last_mut()
            .ok_or_else(|| CharError::Config(lineno, "directive before [stage]".into()))?;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CharError::Config(lineno, format!("expected key = value: {line}")))?;
        let key = key.trim();
        let value = value.trim();
        let parse_u64 = |v: &str| {
            v.parse::<u64>()
                .map_err(|e| CharError::Config(lineno, format!("bad integer {v}: {e}")))
        };
        match key {
            "label" => cur.label = value.to_string(),
            "q" => cur.q = Some(parse_u64(value)?),
            "r" => cur.r = Some(parse_u64(value)?),
            "ideal" => cur.ideal = value.trim_matches('"').to_string(),
            "component" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(CharError::Config(
                        lineno,
                        format!("component needs 3 fields (modulus generator image): {value}"),
                    ));
                }
                cur.components.push(CharacterComponent {
                    modulus: parse_u64(parts[0])?,
                    generator: parse_u64(parts[1])?,
                    image: parse_u64(parts[2])?,
                });
            }
            other => {
                return Err(CharError::Config(lineno, format!("unknown key {other}")));
            }
        }
    }
    let mut out = Vec::new();
    for raw in raws {
        let q = raw
            .q
            .ok_or_else(|| CharError::Config(raw.line, "missing q".into()))?;
        let r = raw
            .r
            .ok_or_else(|| CharError::Config(raw.line, "missing r".into()))?;
        let chi = CharacterModI::new(&raw.label, q, r, raw.components, &raw.ideal)?;
        out.push(StageConfig { chi });
    }
    Ok(out)
}

/// Read and parse a stage config file.
pub fn load_stages(path: &Path) -> Result<Vec<StageConfig>, CharError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CharError::Config(0, format!("{}: {e}", path.display())))?;
    parse_stages(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn chi1() -> CharacterModI {
        CharacterModI::new(
            "chi1",
            175,
            61,
            vec![
                CharacterComponent { modulus: 25, generator: 2, image: 8 },
                CharacterComponent { modulus: 7, generator: 3, image: 47 },
            ],
            "(61, i*w*x - 10)",
        )
        .unwrap()
    }

    #[test]
    fn chi1_evaluation() {
        let chi = chi1();
        // chi1(52): 52 = 2 mod 25, 3 mod 7, so 8 * 47 = 376 = 10 mod 61
        assert_eq!(chi.evaluate(52).value, 10);
        // vanishes exactly on non-units, nonzero on units
        for a in 0..175i64 {
            let v = chi.evaluate(a).value;
            if gcd_u64(a as u64, 175) > 1 {
                assert_eq!(v, 0);
            } else {
                assert_ne!(v, 0);
            }
        }
        assert_eq!(chi.order(), 60);
        // the mod-25 component alone contributes 8 at a = 2 (exponent 1)
        let comp25 = CharacterModI::new(
            "c25",
            25,
            61,
            vec![CharacterComponent { modulus: 25, generator: 2, image: 8 }],
            "",
        )
        .unwrap();
        assert_eq!(comp25.evaluate(2).value, 8);
    }

    #[test]
    fn chi1_is_odd_and_m_vanishes() {
        let chi = chi1();
        assert_eq!(chi.evaluate(-1).value, 60);
        assert_eq!(m_char(&chi).value, 0);
    }

    #[test]
    fn m_char_hand_sum() {
        // odd quadratic character mod 3 with image -1 = 4 into Z/5:
        // m = 1*1 + 2*4 = 9 = 4 mod 5
        let chi = CharacterModI::new(
            "t3",
            3,
            5,
            vec![CharacterComponent { modulus: 3, generator: 2, image: 4 }],
            "",
        )
        .unwrap();
        assert_eq!(m_char(&chi).value, 4);
    }

    #[test]
    fn invalid_components_rejected() {
        // 5 is not a unit mod 25
        let e = CharacterModI::new(
            "bad",
            175,
            61,
            vec![
                CharacterComponent { modulus: 25, generator: 5, image: 8 },
                CharacterComponent { modulus: 7, generator: 3, image: 47 },
            ],
            "",
        );
        assert!(matches!(e, Err(CharError::GeneratorNotUnit(5, 25))));
        // trivial image
        let e = CharacterModI::new(
            "bad",
            175,
            61,
            vec![
                CharacterComponent { modulus: 25, generator: 2, image: 1 },
                CharacterComponent { modulus: 7, generator: 3, image: 47 },
            ],
            "",
        );
        assert!(matches!(e, Err(CharError::TrivialComponent(1, 25))));
        // image of order 4 mod 25-component factors through conductor 5
        // (order 4 divides phi(5) = 4): 11 has order 4 mod 61
        let e = CharacterModI::new(
            "bad",
            175,
            61,
            vec![
                CharacterComponent { modulus: 25, generator: 2, image: 11 },
                CharacterComponent { modulus: 7, generator: 3, image: 47 },
            ],
            "",
        );
        assert!(matches!(e, Err(CharError::ImprimitiveComponent(25, 4, 5))));
        // even conductor flagged
        let e = CharacterModI::new(
            "bad",
            4,
            5,
            vec![CharacterComponent { modulus: 4, generator: 3, image: 4 }],
            "",
        );
        assert!(matches!(e, Err(CharError::EvenConductor(4))));
    }

    #[test]
    fn q_form_values() {
        assert_eq!(q_form(0, 0, 1), 1);
        assert_eq!(q_form(2, 1, 1), -2);
        assert_eq!(q_form(8, 3, 5), -104);
    }

    #[test]
    fn a_b_sums_match_published_rows() {
        let chi = chi1();
        assert_eq!(a_sum(&chi, 2 * 4).value, 0);
        assert_eq!(b_sum(&chi, 2 * 4).value, 33);
        assert_eq!(a_sum(&chi, 2 * 9).value, 34);
        assert_eq!(b_sum(&chi, 2 * 9).value, 44);
    }

    #[test]
    fn t_transform_examples() {
        assert_eq!(t_transform(2, 5, 0, 3), (3, 0));
        assert_eq!(t_transform(8, 175, 4, 0), (143, 4));
        // second coordinate of T^2 reproduces the first coordinate of T
        let (c1, d1) = t_transform(8, 175, 23, 91);
        let (_c2, d2) = t_transform(8, 175, c1, d1);
        assert_eq!(d2, c1);
    }

    #[test]
    fn t_is_bijection_and_flips_sign() {
        let chi = chi1();
        let q = 175u64;
        let mult = 2 * 9;
        let mut seen = vec![false; (q * q) as usize];
        for c in 0..q {
            for d in 0..q {
                let (tc, td) = t_transform(mult, q, c, d);
                let idx = (tc * q + td) as usize;
                assert!(!seen[idx]);
                seen[idx] = true;
                let qv = q_form(mult, c as i64, d as i64);
                let before = chi.value_at(qv);
                let after = chi.value_at(q_form(mult, tc as i64, td as i64));
                assert_eq!(after, (61 - before) % 61, "sign flip at ({c},{d})");
            }
        }
        assert!(seen.iter().all(|&x| x));
    }

    #[test]
    fn shift_identity_small_sample() {
        let chi = chi1();
        let r = 61i64;
        for &n in &[176u64, 433, 1024, 9999] {
            let n0 = n % 175;
            let p = (n / 175) as i64;
            let lhs = a_sum(&chi, 2 * n as i64).value as i64;
            let a0 = a_sum(&chi, 2 * n0 as i64).value as i64;
            let b0 = b_sum(&chi, 2 * n0 as i64).value as i64;
            assert_eq!(lhs, (a0 + 2 * p * b0).rem_euclid(r));
        }
    }

    #[test]
    fn parse_roundtrip() {
        let text = r#"
[stage]
label = chi1
q = 175
r = 61
ideal = "(61, i*w*x - 10)"      # documentation only
component = 25 2 8              # modulus generator image
component = 7 3 47
"#;
        let stages = parse_stages(text).unwrap();
        assert_eq!(stages.len(), 1);
        assert_eq!(stages[0].chi.label, "chi1");
        assert_eq!(stages[0].chi.conductor, 175);
        assert_eq!(stages[0].chi.evaluate(52).value, 10);
        assert_eq!(stages[0].chi.ideal, "(61, i*w*x - 10)");
    }
}
