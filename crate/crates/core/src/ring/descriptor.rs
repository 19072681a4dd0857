//! Textual ring descriptors and their canonical form.
//!
//! Grammar:
//!
//! ```text
//! desc    := "F(" pp ")" | "Z(" pp ")" | "FU(" pp "," e ")" | "GR(" pp "," r ")"
//! pp      := p | p "^" k | q
//! ```
//!
//! `q` is a bare prime power: `F(4)` and `F(2^2)` describe the same field,
//! `Z(27)` and `Z(3^3)` the same ring.

use std::fmt;
use std::str::FromStr;

use super::poly;
use super::RingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingKind {
    PrimeField,
    ExtField,
    Modular,
    PolyChain,
    GaloisRing,
}

/// Canonical description of one of the supported finite chain rings.
///
/// Construct through [`RingDescriptor::parse`] or the `new_*` helpers; all of
/// them canonicalize, so two descriptors of the same ring compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingDescriptor {
    kind: RingKind,
    p: u64,
    /// Degree of the residue field over F_p (`k`, or `r` for Galois rings).
    degree: u32,
    e: u32,
    /// Monic modulus over F_p, constant term first. For prime fields and
    /// `Z(p^e)` this is the polynomial `x`.
    modulus: Vec<u64>,
}

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Returns `(p, k)` with `q = p^k` when `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q {
        if q % p == 0 {
            break;
        }
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let (mut rest, mut k) = (q, 0u32);
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

fn checked_pow(base: u64, exp: u32) -> Result<u64, RingError> {
    base.checked_pow(exp).ok_or(RingError::Overflow)
}

impl RingDescriptor {
    fn build(kind: RingKind, p: u64, degree: u32, e: u32) -> Result<Self, RingError> {
        if !is_prime(p) {
            return Err(RingError::NotPrime(p));
        }
        if degree == 0 || e == 0 {
            return Err(RingError::ZeroExponent);
        }
        // reject descriptors whose size cannot even be represented
        let q = checked_pow(p, degree)?;
        checked_pow(q, e)?;
        let modulus = poly::least_irreducible(p, degree as usize);
        Ok(RingDescriptor {
            kind,
            p,
            degree,
            e,
            modulus,
        })
    }

    /// The field with `p^k` elements.
    pub fn new_field(p: u64, k: u32) -> Result<Self, RingError> {
        let kind = if k == 1 {
            RingKind::PrimeField
        } else {
            RingKind::ExtField
        };
        Self::build(kind, p, k, 1)
    }

    /// `Z/p^e Z`.
    pub fn new_modular(p: u64, e: u32) -> Result<Self, RingError> {
        if e == 1 {
            return Self::new_field(p, 1);
        }
        Self::build(RingKind::Modular, p, 1, e)
    }

    /// `F_{p^k}[u]/(u^e)`.
    pub fn new_poly_chain(p: u64, k: u32, e: u32) -> Result<Self, RingError> {
        if e == 1 {
            return Self::new_field(p, k);
        }
        Self::build(RingKind::PolyChain, p, k, e)
    }

    /// Galois ring `GR(p^e, r) = Z_{p^e}[x]/(f)`.
    pub fn new_galois(p: u64, e: u32, r: u32) -> Result<Self, RingError> {
        if r == 1 {
            return Self::new_modular(p, e);
        }
        if e == 1 {
            return Self::new_field(p, r);
        }
        Self::build(RingKind::GaloisRing, p, r, e)
    }

    pub fn parse(text: &str) -> Result<Self, RingError> {
        let text = text.trim();
        let err = || RingError::Parse(text.to_string());
        let open = text.find('(').ok_or_else(err)?;
        let head = &text[..open];
        let body = text[open + 1..].strip_suffix(')').ok_or_else(err)?;

        let int = |s: &str| -> Result<u64, RingError> {
            if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            s.parse::<u64>().map_err(|_| err())
        };
        let small = |s: &str| -> Result<u32, RingError> {
            u32::try_from(int(s)?).map_err(|_| RingError::Overflow)
        };
        // "p" or "p^k"
        let power = |s: &str| -> Result<(u64, u32), RingError> {
            match s.split_once('^') {
                Some((b, x)) => Ok((int(b)?, small(x)?)),
                // a bare prime power: F(4) is the field with 4 elements, Z(9) = Z(3^2)
                None => {
                    let q = int(s)?;
                    Ok(prime_power(q).filter(|&(_, k)| k > 1).unwrap_or((q, 1)))
                }
            }
        };

        match head {
            "F" => {
                let (p, k) = power(body)?;
                Self::new_field(p, k)
            }
            "Z" => {
                let (p, e) = power(body)?;
                Self::new_modular(p, e)
            }
            "FU" => {
                let (base, e) = body.split_once(',').ok_or_else(err)?;
                let (p, k) = power(base)?;
                Self::new_poly_chain(p, k, small(e)?)
            }
            "GR" => {
                let (base, r) = body.split_once(',').ok_or_else(err)?;
                let (p, e) = power(base)?;
                Self::new_galois(p, e, small(r)?)
            }
            _ => Err(err()),
        }
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Extension degree of the residue field over F_p.
    pub fn residue_degree(&self) -> u32 {
        self.degree
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn is_field(&self) -> bool {
        self.e == 1
    }

    /// Residue field size `q`.
    pub fn q(&self) -> u64 {
        self.p.pow(self.degree)
    }

    /// `|R| = q^e`.
    pub fn size(&self) -> u64 {
        self.q().pow(self.e)
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Descriptor of `R / γ^t R`. Panics unless `1 <= t <= e`.
    pub fn quotient(&self, t: u32) -> RingDescriptor {
        assert!(t >= 1 && t <= self.e, "quotient index out of range");
        match self.kind {
            RingKind::PrimeField | RingKind::ExtField => self.clone(),
            RingKind::Modular => Self::new_modular(self.p, t).expect("valid quotient"),
            RingKind::PolyChain => {
                Self::new_poly_chain(self.p, self.degree, t).expect("valid quotient")
            }
            RingKind::GaloisRing => Self::new_galois(self.p, t, self.degree).expect("valid quotient"),
        }
    }

    /// Descriptor of the residue field `R / γR`.
    pub fn residue_field(&self) -> RingDescriptor {
        self.quotient(1)
    }
}

fn fmt_power(f: &mut fmt::Formatter<'_>, p: u64, k: u32) -> fmt::Result {
    if k == 1 {
        write!(f, "{p}")
    } else {
        write!(f, "{p}^{k}")
    }
}

impl fmt::Display for RingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RingKind::PrimeField | RingKind::ExtField => {
                f.write_str("F(")?;
                fmt_power(f, self.p, self.degree)?;
                f.write_str(")")
            }
            RingKind::Modular => write!(f, "Z({}^{})", self.p, self.e),
            RingKind::PolyChain => {
                f.write_str("FU(")?;
                fmt_power(f, self.p, self.degree)?;
                write!(f, ",{})", self.e)
            }
            RingKind::GaloisRing => write!(f, "GR({}^{},{})", self.p, self.e, self.degree),
        }
    }
}

impl FromStr for RingDescriptor {
    type Err = RingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}
