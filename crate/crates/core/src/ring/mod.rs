//! Finite chain rings: `F_q`, `Z_{p^e}`, `F_q[u]/(u^e)` and `GR(p^e, r)`.
//!
//! Every ring fixes an enumeration of its elements; a [`RingElement`] is an
//! index into that enumeration. Index 0 is always zero and index 1 is always
//! one. The encodings are:
//!
//! * `Z(p^e)`: the residue itself.
//! * `F(p^k)`: `sum c_i p^i`, where `c_i` is the coefficient of `x^i`.
//! * `FU(q,e)`: `sum idx(a_i) q^i`, where `a_i` is the `F_q` coefficient of `u^i`.
//! * `GR(p^e,r)`: `sum c_i (p^e)^i`, where `c_i` in `Z_{p^e}` is the coefficient of `x^i`.

mod descriptor;
mod poly;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use descriptor::{prime_power, RingDescriptor, RingKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("malformed ring descriptor {0:?}")]
    Parse(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("exponents must be at least 1")]
    ZeroExponent,
    #[error("ring order overflows")]
    Overflow,
    #[error("ring of order {size} exceeds the size cap {cap}")]
    TooLarge { size: u64, cap: u64 },
    #[error("element {index} is out of range for a ring of order {size}")]
    IndexOutOfRange { index: u32, size: u32 },
    #[error("element {0} is not a unit")]
    NotAUnit(u32),
    #[error("missing second operand for a binary operation")]
    MissingOperand,
    #[error("quotient index {t} must lie in 1..={e}")]
    QuotientOutOfRange { t: u32, e: u32 },
    #[error("layer {s} must lie in 0..={e}")]
    LayerOutOfRange { s: u32, e: u32 },
    #[error("the quadratic character is only defined for odd residue characteristic (ring {0})")]
    EvenResidueField(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RingElement(pub u32);

impl RingElement {
    pub const ZERO: RingElement = RingElement(0);
    pub const ONE: RingElement = RingElement(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SquareClass {
    QrUnit,
    NqrUnit,
    NonUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingOp {
    Add,
    Sub,
    Mul,
    Neg,
    Inv,
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Construction fails above this order.
    pub max_size: u64,
    /// Full addition and multiplication tables are kept up to this order.
    pub table_threshold: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_size: 1 << 20,
            table_threshold: 4096,
        }
    }
}

#[derive(Debug)]
enum Repr {
    /// `Z_{p^e}[x]/(f)`, digits base `p^e`. Covers fields (`e = 1`) and `Z(p^e)` (`r = 1`).
    Galois {
        p: u64,
        pe: u64,
        r: usize,
        modulus: Vec<u64>,
    },
    /// `F_q[u]/(u^e)`, digits base `q` holding field indices.
    Truncated { field: Box<Ring>, e: usize },
}

impl Repr {
    fn base(&self) -> u64 {
        match self {
            Repr::Galois { pe, .. } => *pe,
            Repr::Truncated { field, .. } => field.size as u64,
        }
    }

    fn width(&self) -> usize {
        match self {
            Repr::Galois { r, .. } => *r,
            Repr::Truncated { e, .. } => *e,
        }
    }

    fn decode(&self, x: u32) -> Vec<u64> {
        let base = self.base();
        let mut x = x as u64;
        (0..self.width())
            .map(|_| {
                let d = x % base;
                x /= base;
                d
            })
            .collect()
    }

    fn encode(&self, digits: &[u64]) -> u32 {
        let base = self.base();
        digits.iter().rev().fold(0u64, |acc, &d| acc * base + d) as u32
    }

    fn add(&self, x: u32, y: u32) -> u32 {
        match self {
            Repr::Galois { pe, r: 1, .. } => ((x as u64 + y as u64) % pe) as u32,
            Repr::Galois { pe, .. } => {
                let (a, b) = (self.decode(x), self.decode(y));
                let sum: Vec<u64> = a.iter().zip(&b).map(|(s, t)| (s + t) % pe).collect();
                self.encode(&sum)
            }
            Repr::Truncated { field, .. } => {
                let (a, b) = (self.decode(x), self.decode(y));
                let sum: Vec<u64> = a
                    .iter()
                    .zip(&b)
                    .map(|(&s, &t)| field.add_idx(s as u32, t as u32) as u64)
                    .collect();
                self.encode(&sum)
            }
        }
    }

    fn neg(&self, x: u32) -> u32 {
        match self {
            Repr::Galois { pe, r: 1, .. } => ((pe - x as u64) % pe) as u32,
            Repr::Galois { pe, .. } => {
                let a: Vec<u64> = self.decode(x).iter().map(|&d| (pe - d) % pe).collect();
                self.encode(&a)
            }
            Repr::Truncated { field, .. } => {
                let a: Vec<u64> = self
                    .decode(x)
                    .iter()
                    .map(|&d| field.neg_idx(d as u32) as u64)
                    .collect();
                self.encode(&a)
            }
        }
    }

    fn mul(&self, x: u32, y: u32) -> u32 {
        match self {
            Repr::Galois { pe, r: 1, .. } => ((x as u64 * y as u64) % pe) as u32,
            Repr::Galois { pe, r, modulus, .. } => {
                let (a, b) = (self.decode(x), self.decode(y));
                let mut prod = vec![0u64; 2 * r - 1];
                for (i, &s) in a.iter().enumerate() {
                    for (j, &t) in b.iter().enumerate() {
                        prod[i + j] = ((prod[i + j] as u128 + s as u128 * t as u128) % *pe as u128) as u64;
                    }
                }
                poly::rem_monic(&mut prod, modulus, *pe);
                prod.resize(*r, 0);
                self.encode(&prod)
            }
            Repr::Truncated { field, e } => {
                let (a, b) = (self.decode(x), self.decode(y));
                let mut prod = vec![0u64; *e];
                for (i, &s) in a.iter().enumerate() {
                    if s == 0 {
                        continue;
                    }
                    for (j, &t) in b.iter().enumerate().take(e - i) {
                        let term = field.mul_idx(s as u32, t as u32);
                        prod[i + j] = field.add_idx(prod[i + j] as u32, term) as u64;
                    }
                }
                self.encode(&prod)
            }
        }
    }

    fn valuation(&self, x: u32, e: u32) -> u32 {
        let digits = self.decode(x);
        match self {
            Repr::Galois { p, .. } => digits
                .iter()
                .filter(|&&d| d != 0)
                .map(|&d| {
                    let (mut d, mut v) = (d, 0u32);
                    while d % p == 0 {
                        d /= p;
                        v += 1;
                    }
                    v
                })
                .min()
                .unwrap_or(e),
            Repr::Truncated { .. } => digits.iter().position(|&d| d != 0).map_or(e, |i| i as u32),
        }
    }

    /// Index of the image in the residue field.
    fn residue(&self, x: u32) -> u32 {
        match self {
            Repr::Galois { p, .. } => {
                let digits: Vec<u64> = self.decode(x).iter().map(|d| d % p).collect();
                digits.iter().rev().fold(0u64, |acc, &d| acc * p + d) as u32
            }
            Repr::Truncated { field, .. } => (x as u64 % field.size as u64) as u32,
        }
    }
}

#[derive(Debug)]
struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
}

/// An immutable finite chain ring with a fixed element encoding.
///
/// All derived data (negation, valuations, square classes and, for small
/// rings, the operation tables) is computed at construction, so a `Ring` can
/// be shared freely between threads.
#[derive(Debug)]
pub struct Ring {
    desc: RingDescriptor,
    size: u32,
    q: u64,
    e: u32,
    repr: Repr,
    tables: Option<Tables>,
    neg: Vec<u32>,
    valuation: Vec<u8>,
    residue: Vec<u32>,
    class: Vec<SquareClass>,
    gamma: u32,
}

/// `R / γ^t R` together with the reduction map from `R`.
#[derive(Debug)]
pub struct Quotient {
    pub ring: Ring,
    map: Vec<u32>,
}

impl Quotient {
    pub fn reduce(&self, x: RingElement) -> RingElement {
        RingElement(self.map[x.index()])
    }
}

impl Ring {
    pub fn build(desc: &RingDescriptor) -> Result<Ring, RingError> {
        Self::build_with(desc, &BuildOptions::default())
    }

    pub fn parse(text: &str) -> Result<Ring, RingError> {
        Self::build(&RingDescriptor::parse(text)?)
    }

    pub fn build_with(desc: &RingDescriptor, opts: &BuildOptions) -> Result<Ring, RingError> {
        let size = desc.size();
        if size > opts.max_size || size > u32::MAX as u64 {
            return Err(RingError::TooLarge {
                size,
                cap: opts.max_size.min(u32::MAX as u64),
            });
        }
        let (q, e) = (desc.q(), desc.e());
        let repr = match desc.kind() {
            RingKind::PolyChain => Repr::Truncated {
                field: Box::new(Ring::build_with(&desc.residue_field(), opts)?),
                e: e as usize,
            },
            _ => Repr::Galois {
                p: desc.p(),
                pe: desc.p().pow(e),
                r: desc.residue_degree() as usize,
                modulus: desc.modulus().to_vec(),
            },
        };
        let n = size as u32;
        let tables = (size <= opts.table_threshold).then(|| {
            let mut add = Vec::with_capacity((size * size) as usize);
            let mut mul = Vec::with_capacity((size * size) as usize);
            for x in 0..n {
                for y in 0..n {
                    add.push(repr.add(x, y));
                    mul.push(repr.mul(x, y));
                }
            }
            Tables { add, mul }
        });
        let neg = (0..n).map(|x| repr.neg(x)).collect();
        let valuation = (0..n).map(|x| repr.valuation(x, e) as u8).collect();
        let residue = (0..n).map(|x| repr.residue(x)).collect();
        let gamma = match &repr {
            _ if e == 1 => 0,
            Repr::Galois { p, .. } => *p as u32,
            Repr::Truncated { field, .. } => field.size,
        };

        let mut ring = Ring {
            desc: desc.clone(),
            size: n,
            q,
            e,
            repr,
            tables,
            neg,
            valuation,
            residue,
            class: Vec::new(),
            gamma,
        };
        ring.class = ring.compute_classes(opts)?;
        Ok(ring)
    }

    fn compute_classes(&self, opts: &BuildOptions) -> Result<Vec<SquareClass>, RingError> {
        let mut class = vec![SquareClass::NonUnit; self.size as usize];
        if self.q % 2 == 1 {
            // Euler's criterion on the residue field
            let residue_classes = if self.e == 1 {
                self.euler_classes()
            } else {
                match &self.repr {
                    Repr::Truncated { field, .. } => field.euler_classes(),
                    Repr::Galois { .. } => {
                        Ring::build_with(&self.desc.residue_field(), opts)?.euler_classes()
                    }
                }
            };
            for x in 0..self.size as usize {
                if self.valuation[x] == 0 {
                    class[x] = residue_classes[self.residue[x] as usize];
                }
            }
        } else {
            // explicit square set of the unit group
            for x in 0..self.size as usize {
                if self.valuation[x] == 0 {
                    class[x] = SquareClass::NqrUnit;
                }
            }
            for y in 0..self.size {
                if self.valuation[y as usize] == 0 {
                    class[self.mul_idx(y, y) as usize] = SquareClass::QrUnit;
                }
            }
        }
        Ok(class)
    }

    /// Square classes of a field by Euler's criterion, indexed by element.
    fn euler_classes(&self) -> Vec<SquareClass> {
        debug_assert_eq!(self.e, 1);
        let half = (self.q - 1) / 2;
        (0..self.size)
            .map(|x| match x {
                0 => SquareClass::NonUnit,
                _ if self.pow_idx(x, half) == 1 => SquareClass::QrUnit,
                _ => SquareClass::NqrUnit,
            })
            .collect()
    }

    pub fn descriptor(&self) -> &RingDescriptor {
        &self.desc
    }

    /// `|R|`.
    pub fn size(&self) -> u32 {
        self.size
    }

    /// Order of the residue field.
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Nilpotency index.
    pub fn e(&self) -> u32 {
        self.e
    }

    /// The distinguished generator of the maximal ideal (zero for fields).
    pub fn gamma(&self) -> RingElement {
        RingElement(self.gamma)
    }

    pub fn has_tables(&self) -> bool {
        self.tables.is_some()
    }

    #[inline]
    pub(crate) fn add_idx(&self, x: u32, y: u32) -> u32 {
        match &self.tables {
            Some(t) => t.add[(x * self.size + y) as usize],
            None => self.repr.add(x, y),
        }
    }

    #[inline]
    pub(crate) fn mul_idx(&self, x: u32, y: u32) -> u32 {
        match &self.tables {
            Some(t) => t.mul[(x * self.size + y) as usize],
            None => self.repr.mul(x, y),
        }
    }

    #[inline]
    pub(crate) fn neg_idx(&self, x: u32) -> u32 {
        self.neg[x as usize]
    }

    fn pow_idx(&self, x: u32, mut exp: u64) -> u32 {
        let (mut base, mut acc) = (x, 1u32);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_idx(acc, base);
            }
            base = self.mul_idx(base, base);
            exp >>= 1;
        }
        acc
    }

    fn check(&self, x: RingElement) -> Result<u32, RingError> {
        if x.0 < self.size {
            Ok(x.0)
        } else {
            Err(RingError::IndexOutOfRange {
                index: x.0,
                size: self.size,
            })
        }
    }

    pub fn add(&self, x: RingElement, y: RingElement) -> RingElement {
        RingElement(self.add_idx(x.0, y.0))
    }

    pub fn sub(&self, x: RingElement, y: RingElement) -> RingElement {
        RingElement(self.add_idx(x.0, self.neg_idx(y.0)))
    }

    pub fn mul(&self, x: RingElement, y: RingElement) -> RingElement {
        RingElement(self.mul_idx(x.0, y.0))
    }

    pub fn neg(&self, x: RingElement) -> RingElement {
        RingElement(self.neg_idx(x.0))
    }

    pub fn pow(&self, x: RingElement, exp: u64) -> RingElement {
        RingElement(self.pow_idx(x.0, exp))
    }

    /// Multiplicative inverse; the unit group has order `(q-1) q^(e-1)`.
    pub fn inv(&self, x: RingElement) -> Result<RingElement, RingError> {
        let x = self.check(x)?;
        if self.valuation[x as usize] != 0 {
            return Err(RingError::NotAUnit(x));
        }
        Ok(RingElement(self.pow_idx(x, self.unit_count() - 1)))
    }

    /// Applies `op`; `y` is required for the binary operations.
    pub fn apply(
        &self,
        op: RingOp,
        x: RingElement,
        y: Option<RingElement>,
    ) -> Result<RingElement, RingError> {
        self.check(x)?;
        let second = || -> Result<RingElement, RingError> {
            let y = y.ok_or(RingError::MissingOperand)?;
            self.check(y).map(RingElement)
        };
        Ok(match op {
            RingOp::Add => self.add(x, second()?),
            RingOp::Sub => self.sub(x, second()?),
            RingOp::Mul => self.mul(x, second()?),
            RingOp::Neg => self.neg(x),
            RingOp::Inv => self.inv(x)?,
        })
    }

    /// Largest `s` with `x` in `γ^s R`; zero has valuation `e`.
    pub fn valuation(&self, x: RingElement) -> u32 {
        self.valuation[x.index()] as u32
    }

    pub fn is_unit(&self, x: RingElement) -> bool {
        self.valuation[x.index()] == 0
    }

    /// Index of the image of `x` in the residue field `F(q)`.
    pub fn residue(&self, x: RingElement) -> RingElement {
        RingElement(self.residue[x.index()])
    }

    pub fn square_class(&self, x: RingElement) -> SquareClass {
        self.class[x.index()]
    }

    /// Quadratic character pulled back through the residue map: 0 on
    /// non-units, `+1` on residues, `-1` on nonresidues.
    pub fn quadratic_character(&self, x: RingElement) -> Result<i8, RingError> {
        if self.q % 2 == 0 {
            return Err(RingError::EvenResidueField(self.desc.to_string()));
        }
        Ok(match self.square_class(x) {
            SquareClass::QrUnit => 1,
            SquareClass::NqrUnit => -1,
            SquareClass::NonUnit => 0,
        })
    }

    /// `|U(R)| = (q-1) q^(e-1)`.
    pub fn unit_count(&self) -> u64 {
        (self.q - 1) * self.q.pow(self.e - 1)
    }

    /// `γ^s`, which is zero for `s >= e`.
    pub fn gamma_power(&self, s: u32) -> RingElement {
        if s >= self.e {
            RingElement::ZERO
        } else {
            self.pow(self.gamma(), s as u64)
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = RingElement> + '_ {
        (0..self.size).map(RingElement)
    }

    pub fn units(&self) -> Vec<RingElement> {
        self.elements().filter(|&x| self.is_unit(x)).collect()
    }

    /// Elements of valuation exactly `s`: `γ^s U(R)` for `s < e`, `{0}` for `s = e`.
    pub fn layer(&self, s: u32) -> Result<Vec<RingElement>, RingError> {
        if s > self.e {
            return Err(RingError::LayerOutOfRange { s, e: self.e });
        }
        Ok(self.elements().filter(|&x| self.valuation(x) == s).collect())
    }

    /// Units whose square class is `class`.
    pub fn units_of_class(&self, class: SquareClass) -> Vec<RingElement> {
        self.elements()
            .filter(|&x| self.square_class(x) == class && class != SquareClass::NonUnit)
            .collect()
    }

    /// Squares with multiplicities: `(s, |{r : r^2 = s}|)`, ascending in `s`.
    pub fn square_multiplicities(&self) -> Vec<(RingElement, u64)> {
        let mut mult = vec![0u64; self.size as usize];
        for r in 0..self.size {
            mult[self.mul_idx(r, r) as usize] += 1;
        }
        mult.into_iter()
            .enumerate()
            .filter(|&(_, m)| m > 0)
            .map(|(s, m)| (RingElement(s as u32), m))
            .collect()
    }

    /// `R / γ^t R` with its reduction map; `t = e` gives `R` itself.
    pub fn quotient(&self, t: u32) -> Result<Quotient, RingError> {
        if t < 1 || t > self.e {
            return Err(RingError::QuotientOutOfRange { t, e: self.e });
        }
        let desc = self.desc.quotient(t);
        let ring = Ring::build(&desc)?;
        let map = match &self.repr {
            Repr::Galois { .. } => {
                let modulus = self.desc.p().pow(t);
                (0..self.size)
                    .map(|x| {
                        let digits: Vec<u64> =
                            self.repr.decode(x).iter().map(|d| d % modulus).collect();
                        digits.iter().rev().fold(0u64, |acc, &d| acc * modulus + d) as u32
                    })
                    .collect()
            }
            Repr::Truncated { .. } => {
                let cut = self.q.pow(t);
                (0..self.size).map(|x| (x as u64 % cut) as u32).collect()
            }
        };
        Ok(Quotient { ring, map })
    }

    /// Human-readable form of an element: an integer for `Z(p^e)` and prime
    /// fields, otherwise a polynomial in `x` (extensions) or `u` (chain rings)
    /// with ascending powers.
    pub fn display(&self, x: RingElement) -> String {
        let digits = self.repr.decode(x.0);
        match &self.repr {
            Repr::Galois { r: 1, .. } => digits[0].to_string(),
            Repr::Galois { .. } => poly_string(
                digits.iter().map(|d| (*d != 0).then(|| d.to_string())),
                "x",
            ),
            Repr::Truncated { field, .. } => poly_string(
                digits.iter().map(|&d| {
                    (d != 0).then(|| {
                        let s = field.display(RingElement(d as u32));
                        if s.contains('+') {
                            format!("({s})")
                        } else {
                            s
                        }
                    })
                }),
                "u",
            ),
        }
    }

    /// The construction modulus as a polynomial in `x`, highest power first.
    pub fn modulus_string(&self) -> String {
        let m = self.desc.modulus();
        let mut terms = Vec::new();
        for (i, &c) in m.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let coeff = if c == 1 && i > 0 { String::new() } else { c.to_string() };
            terms.push(match i {
                0 => coeff,
                1 => format!("{coeff}x"),
                _ => format!("{coeff}x^{i}"),
            });
        }
        terms.join(" + ")
    }
}

fn poly_string(coeffs: impl Iterator<Item = Option<String>>, var: &str) -> String {
    let terms: Vec<String> = coeffs
        .enumerate()
        .filter_map(|(i, c)| {
            let c = c?;
            Some(match i {
                0 => c,
                _ => {
                    let coeff = if c == "1" { String::new() } else { c };
                    if i == 1 {
                        format!("{coeff}{var}")
                    } else {
                        format!("{coeff}{var}^{i}")
                    }
                }
            })
        })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(s: &str) -> Ring {
        Ring::parse(s).unwrap()
    }

    fn el(x: u32) -> RingElement {
        RingElement(x)
    }

    #[test]
    fn z9_arithmetic() {
        let z9 = ring("Z(3^2)");
        assert_eq!(z9.mul(el(4), el(7)), el(1));
        assert_eq!(z9.inv(el(4)).unwrap(), el(7));
        assert_eq!(z9.inv(el(3)), Err(RingError::NotAUnit(3)));
        assert_eq!(z9.apply(RingOp::Add, el(5), Some(el(7))).unwrap(), el(3));
        assert_eq!(z9.apply(RingOp::Add, el(5), None), Err(RingError::MissingOperand));
        assert!(matches!(
            z9.apply(RingOp::Neg, el(9), None),
            Err(RingError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn f4_uses_least_modulus() {
        let f4 = ring("F(4)");
        assert_eq!(f4.size(), 4);
        assert_eq!(f4.descriptor().modulus(), &[1, 1, 1]);
        assert_eq!(f4.modulus_string(), "x^2 + x + 1");
        // x * x = x + 1
        assert_eq!(f4.mul(el(2), el(2)), el(3));
        assert_eq!(f4.display(el(3)), "1+x");
    }

    #[test]
    fn f4_modulus_is_least_by_exhaustion() {
        // every monic quadratic over F_2 in tuple order; only the last lacks roots
        let candidates = [[0u64, 0], [0, 1], [1, 0], [1, 1]];
        let first = candidates
            .iter()
            .find(|c| (0..2u64).all(|x| (c[0] + c[1] * x + x * x) % 2 != 0))
            .unwrap();
        assert_eq!(first, &[1, 1]);
    }

    #[test]
    fn additive_inverses() {
        for d in ["Z(2^3)", "F(3^2)", "FU(3,2)", "GR(2^2,2)"] {
            let r = ring(d);
            for a in r.elements() {
                assert_eq!(r.add(a, r.neg(a)), RingElement::ZERO, "{d} {a}");
            }
        }
    }

    #[test]
    fn gamma_and_size() {
        let z8 = ring("Z(2^3)");
        assert_eq!((z8.gamma(), z8.e(), z8.q()), (el(2), 3, 2));
        let gr = ring("GR(2^2,2)");
        assert_eq!((gr.size(), gr.q(), gr.e()), (16, 4, 2));
        assert_eq!(gr.elements().count(), 16);
        assert_eq!(gr.gamma(), el(2));
        let fu = ring("FU(3,2)");
        assert_eq!(fu.gamma(), el(3));
        assert_eq!(fu.display(el(3)), "u");
        assert_eq!(fu.display(el(7)), "1+2u");
        let f5 = ring("F(5)");
        assert_eq!(f5.gamma(), RingElement::ZERO);
    }

    #[test]
    fn valuations() {
        let z9 = ring("Z(3^2)");
        assert_eq!(z9.valuation(el(3)), 1);
        assert_eq!(z9.valuation(el(0)), 2);
        assert_eq!(z9.valuation(el(4)), 0);
    }

    #[test]
    fn square_classes() {
        let z9 = ring("Z(3^2)");
        assert_eq!(z9.square_class(el(4)), SquareClass::QrUnit);
        assert_eq!(z9.square_class(el(2)), SquareClass::NqrUnit);
        assert_eq!(z9.square_class(el(3)), SquareClass::NonUnit);
        // squares of the units of Z_9 never hit 2
        let sq: Vec<u32> = [1u32, 2, 4, 5, 7, 8].iter().map(|y| y * y % 9).collect();
        assert!(!sq.contains(&2));

        let fu = ring("FU(2,2)");
        // 1+u squares to 1, so 1+u is a nonresidue
        assert_eq!(fu.square_class(el(3)), SquareClass::NqrUnit);
        assert_eq!(fu.units_of_class(SquareClass::QrUnit), vec![el(1)]);
    }

    #[test]
    fn characters() {
        let f5 = ring("F(5)");
        assert_eq!(f5.quadratic_character(el(4)).unwrap(), 1);
        assert_eq!(f5.quadratic_character(el(2)).unwrap(), -1);
        assert_eq!(f5.quadratic_character(el(0)).unwrap(), 0);
        let z9 = ring("Z(3^2)");
        assert_eq!(z9.quadratic_character(el(2)).unwrap(), -1);
        assert!(ring("F(4)").quadratic_character(el(1)).is_err());
    }

    #[test]
    fn quotients() {
        let z27 = ring("Z(3^3)");
        let f3 = z27.quotient(1).unwrap();
        assert_eq!(f3.ring.descriptor().to_string(), "F(3)");
        for x in z27.elements() {
            assert_eq!(f3.reduce(x).0, x.0 % 3);
        }
        let z9 = z27.quotient(2).unwrap();
        assert_eq!(z9.ring.descriptor().to_string(), "Z(3^2)");
        assert!(matches!(z27.quotient(0), Err(RingError::QuotientOutOfRange { .. })));
        assert!(matches!(z27.quotient(4), Err(RingError::QuotientOutOfRange { .. })));
    }

    #[test]
    fn quotient_is_homomorphism_fu33() {
        let r = ring("FU(3,3)");
        let qt = r.quotient(2).unwrap();
        assert_eq!(qt.ring.descriptor().to_string(), "FU(3,2)");
        for x in r.elements() {
            for y in r.elements() {
                assert_eq!(qt.reduce(r.add(x, y)), qt.ring.add(qt.reduce(x), qt.reduce(y)));
                assert_eq!(qt.reduce(r.mul(x, y)), qt.ring.mul(qt.reduce(x), qt.reduce(y)));
            }
        }
        assert_eq!(qt.reduce(RingElement::ONE), RingElement::ONE);
    }

    #[test]
    fn enumeration_subsets() {
        let z9 = ring("Z(3^2)");
        assert_eq!(z9.units().len(), 6);
        assert_eq!(z9.layer(1).unwrap(), vec![el(3), el(6)]);
        assert_eq!(z9.layer(2).unwrap(), vec![el(0)]);
        assert!(z9.layer(3).is_err());
        let f4 = ring("F(4)");
        assert_eq!(f4.elements().map(|x| x.0).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn size_cap() {
        let d = RingDescriptor::parse("F(2^10)").unwrap();
        let opts = BuildOptions {
            max_size: 512,
            ..BuildOptions::default()
        };
        assert_eq!(
            Ring::build_with(&d, &opts).unwrap_err(),
            RingError::TooLarge { size: 1024, cap: 512 }
        );
    }

    #[test]
    fn untabled_arithmetic_matches_tables() {
        let d = RingDescriptor::parse("GR(3^2,2)").unwrap();
        let tabled = Ring::build(&d).unwrap();
        let plain = Ring::build_with(
            &d,
            &BuildOptions {
                table_threshold: 0,
                ..BuildOptions::default()
            },
        )
        .unwrap();
        assert!(tabled.has_tables() && !plain.has_tables());
        for x in tabled.elements() {
            for y in tabled.elements() {
                assert_eq!(tabled.mul(x, y), plain.mul(x, y));
                assert_eq!(tabled.add(x, y), plain.add(x, y));
            }
        }
    }
}
