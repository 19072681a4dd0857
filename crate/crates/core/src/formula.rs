//! Closed-form and recursive counting formulas for symmetric tridiagonal
//! matrices over `F_q` and over chain rings with residue field `F_q`.
//!
//! Every division is exact or an error: a non-integral "count" is evidence
//! against the formula, not something to round away. Two variants exist.
//! `Paper` evaluates each statement as written. `Errata` swaps in the
//! corrected `S_2` constant and the corrected nonsquare-layer denominator, and
//! withdraws the uniformity claims that the census refutes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ring::prime_power;
use crate::surd::QuadraticSurd;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("q = {0} is not a prime power")]
    NotPrimePower(u64),
    #[error("matrix dimension must be at least 1")]
    ZeroDimension,
    #[error("nilpotency index must be at least 1")]
    ZeroExponent,
    #[error("{what} needs odd q, got q = {q}")]
    EvenQ { what: &'static str, q: u64 },
    #[error("{what} needs even q, got q = {q}")]
    OddQ { what: &'static str, q: u64 },
    #[error("layer index s = {s} outside {lo}..={hi}")]
    LayerOutOfRange { s: u32, lo: u32, hi: u32 },
    #[error("zero-count profile has no entry for t = {0}")]
    MissingZeroCount(u32),
    #[error("zero-count profile is for n = {profile}, not n = {n}")]
    ProfileDimension { profile: u32, n: u32 },
    #[error("{what}: {numerator} is not divisible by {denominator}")]
    NotDivisible {
        what: &'static str,
        numerator: BigInt,
        denominator: BigInt,
    },
    #[error("closed form did not reduce to an integer: {0}")]
    NonIntegral(String),
    #[error("{what} disagrees with its own closed form: {left} vs {right}")]
    Inconsistent {
        what: &'static str,
        left: BigInt,
        right: BigInt,
    },
    #[error("{what} is withdrawn under the errata variant: {reason}")]
    ClaimWithdrawn {
        what: &'static str,
        reason: &'static str,
    },
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, FormulaError>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaVariant {
    #[default]
    Paper,
    Errata,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IstMethod {
    #[default]
    Recurrence,
    Closed,
}

/// Determinant class for prescribed-determinant counts over a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldClass {
    Zero,
    Qr,
    Nqr,
    Unit,
}

/// Unit class for prescribed-determinant counts over a chain ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RingUnitClass {
    Qr,
    Nqr,
    UnitEvenQ,
}

macro_rules! text_enum {
    ($ty:ty { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    other => Err(format!(
                        "unknown value {other:?}; expected one of: {}",
                        [$($text),+].join(", ")
                    )),
                }
            }
        }
    };
}

text_enum!(FormulaVariant { Paper => "paper", Errata => "errata" });
text_enum!(IstMethod { Recurrence => "recurrence", Closed => "closed" });
text_enum!(FieldClass { Zero => "zero", Qr => "qr", Nqr => "nqr", Unit => "unit" });
text_enum!(RingUnitClass { Qr => "qr", Nqr => "nqr", UnitEvenQ => "unit-even-q" });

/// Every formula the library evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaName {
    IstField,
    StFieldZero,
    SField,
    StFieldPrescribed,
    IstRing,
    SRing,
    StRingUnit,
    IdealLayer,
    PuncturedLayer,
    StRingGammaPower,
    StRingGammaPowerNonsquare,
    ZeroFiberIdentity,
}

text_enum!(FormulaName {
    IstField => "ist_field",
    StFieldZero => "st_field_zero",
    SField => "s_field",
    StFieldPrescribed => "st_field_prescribed",
    IstRing => "ist_ring",
    SRing => "s_ring",
    StRingUnit => "st_ring_unit",
    IdealLayer => "ideal_layer",
    PuncturedLayer => "punctured_layer",
    StRingGammaPower => "st_ring_gamma_power",
    StRingGammaPowerNonsquare => "st_ring_gamma_power_nonsquare",
    ZeroFiberIdentity => "zero_fiber_identity",
});

/// Catalog entry: which published result a formula evaluates, and the
/// expression it implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FormulaInfo {
    pub name: FormulaName,
    pub reference: &'static str,
    pub anchor: &'static str,
}

impl FormulaName {
    pub const ALL: [FormulaName; 12] = [
        FormulaName::IstField,
        FormulaName::StFieldZero,
        FormulaName::SField,
        FormulaName::StFieldPrescribed,
        FormulaName::IstRing,
        FormulaName::SRing,
        FormulaName::StRingUnit,
        FormulaName::IdealLayer,
        FormulaName::PuncturedLayer,
        FormulaName::StRingGammaPower,
        FormulaName::StRingGammaPowerNonsquare,
        FormulaName::ZeroFiberIdentity,
    ];

    pub fn info(self) -> FormulaInfo {
        use FormulaName::*;
        let (reference, anchor) = match self {
            IstField => (
                "nonsingular count over F_q (recurrence and closed form)",
                "|IST_n| = q(q-1)|IST_{n-1}| + q^2(q-1)|IST_{n-2}| = β1·λ1^n + β2·λ2^n",
            ),
            StFieldZero => (
                "singular count over F_q",
                "|ST_n(F_q,0)| = q^(2n-1) - β1·λ1^n - β2·λ2^n",
            ),
            SField => (
                "character sum over F_q",
                "S_n = q^2(q-1)χ(-1)·S_{n-2}, S_odd = 0, S_2 = (q-1)((2q-1)χ(-1) - (q-1))",
            ),
            StFieldPrescribed => (
                "prescribed unit determinant over F_q",
                "|ST_n(F_q,a)| = (|IST_n| ± S_n)/(q-1); uniform for even q or odd n",
            ),
            IstRing => (
                "nonsingular count over a chain ring",
                "|IST_n(R)| = q^((e-1)(2n-1))·|IST_n(F_q)|",
            ),
            SRing => (
                "character sum over a chain ring",
                "S_n(R) = q^((e-1)(2n-1))·S_n(F_q)",
            ),
            StRingUnit => (
                "prescribed unit determinant over a chain ring",
                "|ST_n(R,a)| = (|IST_n(R)| ± S_n(R)) / ((q-1)q^(e-1)); even q: |IST_n(R)| / ((q-1)q^(e-1))",
            ),
            IdealLayer => (
                "ideal determinant layer",
                "|{A : det A ∈ γ^s R}| = q^((e-s)(2n-1))·|ST_n(R/γ^s R, 0)|",
            ),
            PuncturedLayer => (
                "punctured determinant layer",
                "|{A : det A ∈ γ^s U(R)}| = q^((e-s)(2n-1))·z_s - q^((e-s-1)(2n-1))·z_{s+1}",
            ),
            StRingGammaPower => (
                "determinant equal to a power of γ",
                "|ST_n(R,γ^s)| = q^(2(e-s-1)(n-1)) / (q-1) · (q^(2n-1)·z_s - z_{s+1})",
            ),
            StRingGammaPowerNonsquare => (
                "determinant γ^s times a nonsquare unit",
                "|ST_n(R,uγ^s)| = 2/((q-1)q^(e-1)) · (punctured layer s) - |ST_n(R,γ^s)|",
            ),
            ZeroFiberIdentity => (
                "zero determinant by layers",
                "|ST_n(R,0)| = q^(e(2n-1)) - |IST_n(R)| - Σ_{s=1}^{e-1} (punctured layer s)",
            ),
        };
        FormulaInfo {
            name: self,
            reference,
            anchor,
        }
    }
}

/// Every catalog entry, in declaration order.
pub fn catalog() -> Vec<FormulaInfo> {
    FormulaName::ALL.iter().map(|f| f.info()).collect()
}

/// `t -> |ST_n(R / γ^t R, 0)|` for a base ring `R`, `t` in `1..=e`; entry `e`
/// is the zero count of `R` itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroCountProfile {
    pub n: u32,
    pub ring: String,
    pub provenance: String,
    pub entries: BTreeMap<u32, BigUint>,
}

impl ZeroCountProfile {
    pub fn new(ring: String, n: u32) -> Self {
        ZeroCountProfile {
            n,
            ring,
            provenance: String::new(),
            entries: BTreeMap::new(),
        }
    }

    /// Builds a profile from literal `(t, count)` pairs.
    pub fn from_entries(n: u32, entries: impl IntoIterator<Item = (u32, u64)>) -> Self {
        ZeroCountProfile {
            n,
            ring: String::new(),
            provenance: "given".into(),
            entries: entries
                .into_iter()
                .map(|(t, v)| (t, BigUint::from(v)))
                .collect(),
        }
    }

    pub fn insert(&mut self, t: u32, count: BigUint) {
        self.entries.insert(t, count);
    }

    pub fn set_provenance(&mut self, provenance: String) {
        self.provenance = provenance;
    }

    pub fn get(&self, t: u32) -> Result<BigInt> {
        self.entries
            .get(&t)
            .map(|v| BigInt::from(v.clone()))
            .ok_or(FormulaError::MissingZeroCount(t))
    }

    fn for_dimension(&self, n: u32) -> Result<&Self> {
        if self.n == n {
            Ok(self)
        } else {
            Err(FormulaError::ProfileDimension { profile: self.n, n })
        }
    }
}

fn check_q(q: u64) -> Result<()> {
    prime_power(q).map(|_| ()).ok_or(FormulaError::NotPrimePower(q))
}

fn check_qn(q: u64, n: u32) -> Result<()> {
    check_q(q)?;
    if n == 0 {
        return Err(FormulaError::ZeroDimension);
    }
    Ok(())
}

fn check_qen(q: u64, e: u32, n: u32) -> Result<()> {
    check_qn(q, n)?;
    if e == 0 {
        return Err(FormulaError::ZeroExponent);
    }
    Ok(())
}

fn need_odd(q: u64, what: &'static str) -> Result<()> {
    if q % 2 == 0 {
        Err(FormulaError::EvenQ { what, q })
    } else {
        Ok(())
    }
}

fn big(q: u64) -> BigInt {
    BigInt::from(q)
}

fn qpow(q: u64, k: u32) -> BigInt {
    Pow::pow(big(q), k)
}

fn exact_div(what: &'static str, numerator: BigInt, denominator: BigInt) -> Result<BigInt> {
    let (quot, rem) = numerator.div_rem(&denominator);
    if rem.is_zero() {
        Ok(quot)
    } else {
        Err(FormulaError::NotDivisible {
            what,
            numerator,
            denominator,
        })
    }
}

/// `χ(-1)` on `F_q`, `q` odd: `1` iff `q ≡ 1 (mod 4)`.
pub fn chi_minus_one(q: u64) -> i64 {
    if q % 4 == 1 {
        1
    } else {
        -1
    }
}

/// `|IST_n(F_q)|`, the number of nonsingular symmetric tridiagonal matrices.
pub fn ist_field(q: u64, n: u32, method: IstMethod) -> Result<BigInt> {
    check_qn(q, n)?;
    match method {
        IstMethod::Recurrence => {
            let step = big(q) * (q - 1);
            let (mut prev, mut cur) = (big(q - 1), qpow(q, 2) * (q - 1));
            if n == 1 {
                return Ok(prev);
            }
            for _ in 3..=n {
                let next = &step * &cur + &step * &prev * q;
                prev = std::mem::replace(&mut cur, next);
            }
            Ok(cur)
        }
        IstMethod::Closed => {
            let value = ist_field_surd(q, n)?;
            value
                .to_integer()
                .ok_or_else(|| FormulaError::NonIntegral(value.to_string()))
        }
    }
}

/// `β1·λ1^n + β2·λ2^n` evaluated in `Q(√D)`, `D = (q-1)(q+3)`, without
/// collapsing to an integer. The `b` part is zero when the closed form holds.
pub fn ist_field_surd(q: u64, n: u32) -> Result<QuadraticSurd> {
    check_qn(q, n)?;
    let d = big(q - 1) * (q + 3);
    let qi = q as i64;
    let int = |a: i64, b: i64| QuadraticSurd::from_ints(a, b, &d);
    let half = QuadraticSurd::rational(BigRational::new(1.into(), 2.into()), &d);
    let q_surd = int(qi, 0);

    let mut total = int(0, 0);
    for sign in [1i64, -1] {
        let beta = int(qi + 1, sign)
            .div(&(&q_surd * &int(qi + 3, sign)))
            .expect("(q+3) ± √D is nonzero");
        let lambda = &int(qi * (qi - 1), sign * qi) * &half;
        total = &total + &(&beta * &lambda.pow(n));
    }
    Ok(total)
}

/// `|ST_n(F_q, 0)| = q^(2n-1) - |IST_n(F_q)|`.
pub fn st_field_zero(q: u64, n: u32) -> Result<BigInt> {
    Ok(qpow(q, 2 * n - 1) - ist_field(q, n, IstMethod::Recurrence)?)
}

/// `S_2(F_q)` under the chosen variant.
pub fn s_two(q: u64, variant: FormulaVariant) -> Result<BigInt> {
    check_q(q)?;
    need_odd(q, "S_2")?;
    let chi = chi_minus_one(q);
    Ok(match variant {
        FormulaVariant::Paper => big(q - 1) * (BigInt::from(chi) * (2 * q - 1) - (q - 1)),
        // the inner sum Σ_r χ(t - r^2) over t ≠ 0 is -χ(-1), not -1
        FormulaVariant::Errata => BigInt::from(chi) * q * (q - 1),
    })
}

/// Closed forms of `S_{2m}(F_q)` by residue of `q` mod 4.
fn s_field_closed(q: u64, m: u32, variant: FormulaVariant) -> BigInt {
    let sign = |k: u32, chi: i64| if chi == -1 && k % 2 == 1 { -BigInt::one() } else { BigInt::one() };
    let tail = Pow::pow(big(q - 1), m);
    match (variant, q % 4) {
        (FormulaVariant::Paper, 1) => qpow(q, 2 * m - 1) * tail,
        (FormulaVariant::Paper, _) => sign(m, -1) * (3 * q - 2) * qpow(q, 2 * m - 2) * tail,
        (FormulaVariant::Errata, _) => sign(m, chi_minus_one(q)) * qpow(q, 2 * m - 1) * tail,
    }
}

/// `S_n(F_q) = Σ_a χ(a)|ST_n(F_q, a)|`, `q` odd.
pub fn s_field(q: u64, n: u32, variant: FormulaVariant) -> Result<BigInt> {
    check_qn(q, n)?;
    need_odd(q, "s_field")?;
    if n % 2 == 1 {
        return Ok(BigInt::zero());
    }
    let m = n / 2;
    let factor = qpow(q, 2) * (q - 1) * chi_minus_one(q);
    let value = Pow::pow(factor, m - 1) * s_two(q, variant)?;
    let closed = s_field_closed(q, m, variant);
    if closed != value {
        return Err(FormulaError::Inconsistent {
            what: "s_field",
            left: value,
            right: closed,
        });
    }
    Ok(value)
}

/// `|ST_n(F_q, a)|` for `a` in the given class (per value, not per class).
pub fn st_field_prescribed(q: u64, n: u32, class: FieldClass, variant: FormulaVariant) -> Result<BigInt> {
    check_qn(q, n)?;
    let ist = || ist_field(q, n, IstMethod::Recurrence);
    match class {
        FieldClass::Zero => st_field_zero(q, n),
        FieldClass::Unit => {
            if q % 2 == 1 && n % 2 == 0 {
                return Err(FormulaError::InvalidParameter(format!(
                    "unit class needs even q or odd n (q = {q}, n = {n}); use qr or nqr"
                )));
            }
            exact_div("st_field_prescribed", ist()?, big(q - 1))
        }
        FieldClass::Qr | FieldClass::Nqr => {
            need_odd(q, "qr/nqr classes")?;
            let s = s_field(q, n, variant)?;
            let num = if class == FieldClass::Qr { ist()? + s } else { ist()? - s };
            exact_div("st_field_prescribed", num, big(q - 1))
        }
    }
}

/// `|IST_n(R)| = q^((e-1)(2n-1)) |IST_n(F_q)|`.
pub fn ist_ring(q: u64, e: u32, n: u32) -> Result<BigInt> {
    check_qen(q, e, n)?;
    Ok(qpow(q, (e - 1) * (2 * n - 1)) * ist_field(q, n, IstMethod::Recurrence)?)
}

fn s_ring_closed(q: u64, e: u32, m: u32, variant: FormulaVariant) -> BigInt {
    let tail = Pow::pow(big(q - 1), m);
    let odd_m = m % 2 == 1;
    match (variant, q % 4) {
        (FormulaVariant::Paper, 1) => qpow(q, e * (4 * m - 1) - 2 * m) * tail,
        (FormulaVariant::Paper, _) => {
            let v = qpow(q, e * (4 * m - 1) - 2 * m - 1) * (3 * q - 2) * tail;
            if odd_m { -v } else { v }
        }
        (FormulaVariant::Errata, r) => {
            let v = qpow(q, e * (4 * m - 1) - 2 * m) * tail;
            if r == 3 && odd_m { -v } else { v }
        }
    }
}

/// `S_n(R) = Σ_a η(a)|ST_n(R, a)|`, `q` odd.
pub fn s_ring(q: u64, e: u32, n: u32, variant: FormulaVariant) -> Result<BigInt> {
    check_qen(q, e, n)?;
    need_odd(q, "s_ring")?;
    let lift = qpow(q, (e - 1) * (2 * n - 1)) * s_field(q, n, variant)?;
    if n % 2 == 0 {
        let closed = s_ring_closed(q, e, n / 2, variant);
        if closed != lift {
            return Err(FormulaError::Inconsistent {
                what: "s_ring",
                left: lift,
                right: closed,
            });
        }
    }
    Ok(lift)
}

/// `|ST_n(R, a)|` for a unit `a` in the given class.
pub fn st_ring_unit(q: u64, e: u32, n: u32, class: RingUnitClass, variant: FormulaVariant) -> Result<BigInt> {
    check_qen(q, e, n)?;
    let units = big(q - 1) * qpow(q, e - 1);
    let ist = ist_ring(q, e, n)?;
    match class {
        RingUnitClass::Qr | RingUnitClass::Nqr => {
            need_odd(q, "qr/nqr classes")?;
            let s = s_ring(q, e, n, variant)?;
            let num = if class == RingUnitClass::Qr { ist + s } else { ist - s };
            exact_div("st_ring_unit", num, units)
        }
        RingUnitClass::UnitEvenQ => {
            if q % 2 == 1 {
                return Err(FormulaError::OddQ { what: "unit-even-q class", q });
            }
            if variant == FormulaVariant::Errata && e >= 2 && n % 2 == 0 {
                return Err(FormulaError::ClaimWithdrawn {
                    what: "even-q unit uniformity",
                    reason: "for e >= 2 the unit squares do not exhaust U(R) and even-n unit counts differ",
                });
            }
            exact_div("st_ring_unit", ist, units)
        }
    }
}

fn check_layer(s: u32, lo: u32, hi: u32) -> Result<()> {
    if s < lo || s > hi {
        Err(FormulaError::LayerOutOfRange { s, lo, hi })
    } else {
        Ok(())
    }
}

/// `|{A : det A ∈ γ^s R}|`, `0 <= s <= e`; `s = e` is `|ST_n(R, 0)|`.
pub fn ideal_layer(q: u64, e: u32, n: u32, s: u32, zc: &ZeroCountProfile) -> Result<BigInt> {
    check_qen(q, e, n)?;
    check_layer(s, 0, e)?;
    if s == 0 {
        return Ok(qpow(q, e * (2 * n - 1)));
    }
    let zc = zc.for_dimension(n)?;
    Ok(qpow(q, (e - s) * (2 * n - 1)) * zc.get(s)?)
}

/// `|{A : det A ∈ γ^s U(R)}|`, `0 <= s <= e - 1`; `s = 0` is `|IST_n(R)|`.
pub fn punctured_layer(q: u64, e: u32, n: u32, s: u32, zc: &ZeroCountProfile) -> Result<BigInt> {
    check_qen(q, e, n)?;
    check_layer(s, 0, e - 1)?;
    if s == 0 {
        return ist_ring(q, e, n);
    }
    let zc = zc.for_dimension(n)?;
    Ok(qpow(q, (e - s) * (2 * n - 1)) * zc.get(s)? - qpow(q, (e - s - 1) * (2 * n - 1)) * zc.get(s + 1)?)
}

/// Whether the per-value formula at `γ^s` relies on a uniformity that fails:
/// for even `n` and even `s` the layer `γ^s U(R)` splits like the unit layer
/// does, except when `q` is even and `γ^s U(R)` is a single residue layer.
pub fn gamma_power_withdrawn(q: u64, e: u32, n: u32, s: u32) -> bool {
    n % 2 == 0 && s % 2 == 0 && !(q % 2 == 0 && e - s == 1)
}

/// `|ST_n(R, γ^s)|`, `1 <= s <= e - 1`.
pub fn st_ring_gamma_power(
    q: u64,
    e: u32,
    n: u32,
    s: u32,
    zc: &ZeroCountProfile,
    variant: FormulaVariant,
) -> Result<BigInt> {
    check_qen(q, e, n)?;
    check_layer(s, 1, e.saturating_sub(1))?;
    if variant == FormulaVariant::Errata && gamma_power_withdrawn(q, e, n, s) {
        return Err(FormulaError::ClaimWithdrawn {
            what: "γ^s count",
            reason: "for even n and even s the unit factors of γ^s U(R) are not equidistributed",
        });
    }
    let zc = zc.for_dimension(n)?;
    let num = qpow(q, 2 * (e - s - 1) * (n - 1)) * (qpow(q, 2 * n - 1) * zc.get(s)? - zc.get(s + 1)?);
    exact_div("st_ring_gamma_power", num, big(q - 1))
}

/// `|ST_n(R, bγ^s)|` for `b` a nonsquare unit, `q` odd, `1 <= s <= e - 1`.
///
/// As written, the layer total is shared among `(q-1)q^(e-1)/2` values per
/// class; `γ^s U(R)` only has `(q-1)q^(e-s-1)` distinct elements, which the
/// errata variant uses instead.
pub fn st_ring_gamma_power_nonsquare(
    q: u64,
    e: u32,
    n: u32,
    s: u32,
    zc: &ZeroCountProfile,
    variant: FormulaVariant,
) -> Result<BigInt> {
    check_qen(q, e, n)?;
    need_odd(q, "st_ring_gamma_power_nonsquare")?;
    check_layer(s, 1, e.saturating_sub(1))?;
    let gamma = st_ring_gamma_power(q, e, n, s, zc, variant)?;
    let layer = punctured_layer(q, e, n, s, zc)?;
    let spread = match variant {
        FormulaVariant::Paper => e - 1,
        FormulaVariant::Errata => e - s - 1,
    };
    let share = exact_div(
        "st_ring_gamma_power_nonsquare",
        layer * 2,
        big(q - 1) * qpow(q, spread),
    )?;
    Ok(share - gamma)
}

/// Right-hand side of the zero-by-layers identity minus the zero count `zc(e)`.
/// The sum telescopes, so the residual is
/// `q^(e(2n-1)) - |IST_n(R)| - q^((e-1)(2n-1)) zc(1)` and vanishes whenever
/// `zc(1)` is the field zero count.
pub fn zero_fiber_identity(q: u64, e: u32, n: u32, zc: &ZeroCountProfile, ist: &BigInt) -> Result<BigInt> {
    check_qen(q, e, n)?;
    let zc = zc.for_dimension(n)?;
    let mut rhs = qpow(q, e * (2 * n - 1)) - ist;
    for s in 1..e {
        rhs -= punctured_layer(q, e, n, s, zc)?;
    }
    Ok(rhs - zc.get(e)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use FormulaVariant::{Errata, Paper};

    fn int(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn ist_field_values() {
        assert_eq!(ist_field(5, 4, IstMethod::Recurrence).unwrap(), int(58_000));
        assert_eq!(ist_field(5, 4, IstMethod::Closed).unwrap(), int(58_000));
        // the recurrence, closed form and census all give this value for n = 10
        assert_eq!(ist_field(5, 10, IstMethod::Closed).unwrap(), int(11_482_000_000_000));
        assert_eq!(ist_field(5, 7, IstMethod::Closed).unwrap(), int(816_000_000));
        for q in [2, 3, 4, 7, 9] {
            assert_eq!(ist_field(q, 1, IstMethod::Closed).unwrap(), int(q as i64 - 1));
        }
        let two: Vec<_> = (1..=5).map(|n| ist_field(2, n, IstMethod::Closed).unwrap()).collect();
        assert_eq!(two, [1, 4, 12, 40, 128].map(int));
    }

    #[test]
    fn closed_form_surd_has_no_irrational_part() {
        for q in [2, 3, 11] {
            for n in 1..=12 {
                assert!(ist_field_surd(q, n).unwrap().b.is_zero(), "q={q} n={n}");
            }
        }
    }

    #[test]
    fn bad_inputs() {
        assert_eq!(ist_field(6, 2, IstMethod::Closed), Err(FormulaError::NotPrimePower(6)));
        assert_eq!(ist_field(5, 0, IstMethod::Closed), Err(FormulaError::ZeroDimension));
        assert!(matches!(s_field(4, 2, Paper), Err(FormulaError::EvenQ { .. })));
        assert!(matches!(
            st_field_prescribed(4, 2, FieldClass::Nqr, Paper),
            Err(FormulaError::EvenQ { .. })
        ));
        assert!(matches!(
            st_field_prescribed(5, 2, FieldClass::Unit, Paper),
            Err(FormulaError::InvalidParameter(_))
        ));
        assert!(matches!(ist_ring(5, 0, 2), Err(FormulaError::ZeroExponent)));
    }

    #[test]
    fn field_zero_counts() {
        assert_eq!(st_field_zero(5, 3).unwrap(), int(725));
        assert_eq!(st_field_zero(5, 7).unwrap(), int(404_703_125));
        assert_eq!(st_field_zero(5, 8).unwrap(), int(10_817_578_125));
        assert_eq!(st_field_zero(2, 2).unwrap(), int(4));
    }

    #[test]
    fn character_sums() {
        assert_eq!(s_field(5, 2, Paper).unwrap(), int(20));
        assert_eq!(s_field(5, 2, Errata).unwrap(), int(20));
        assert_eq!(s_field(7, 3, Paper).unwrap(), int(0));
        assert_eq!(s_field(3, 2, Paper).unwrap(), int(-14));
        assert_eq!(s_field(3, 2, Errata).unwrap(), int(-6));
        // variants agree whenever χ(-1) = 1
        for q in [5, 9, 13] {
            for n in 1..=8 {
                assert_eq!(s_field(q, n, Paper), s_field(q, n, Errata));
            }
        }
    }

    #[test]
    fn prescribed_field_counts() {
        assert_eq!(st_field_prescribed(5, 2, FieldClass::Qr, Paper).unwrap(), int(30));
        assert_eq!(st_field_prescribed(5, 2, FieldClass::Nqr, Paper).unwrap(), int(20));
        assert_eq!(st_field_prescribed(3, 2, FieldClass::Qr, Errata).unwrap(), int(6));
        assert_eq!(st_field_prescribed(3, 2, FieldClass::Qr, Paper).unwrap(), int(2));
        assert_eq!(st_field_prescribed(4, 2, FieldClass::Unit, Paper).unwrap(), int(16));
    }

    #[test]
    fn errata_splits_are_integral() {
        for q in [3u64, 5, 7, 9, 11] {
            for n in 1..=10 {
                let ist = ist_field(q, n, IstMethod::Recurrence).unwrap();
                let s = s_field(q, n, Errata).unwrap();
                assert!((&ist + &s).is_multiple_of(&big(q - 1)));
                assert!((&ist - &s).is_multiple_of(&big(q - 1)));
            }
        }
    }

    #[test]
    fn ring_counts() {
        assert_eq!(ist_ring(3, 2, 2).unwrap(), int(486));
        assert_eq!(ist_ring(2, 2, 2).unwrap(), int(32));
        assert_eq!(ist_ring(7, 1, 3).unwrap(), ist_field(7, 3, IstMethod::Recurrence).unwrap());
        assert_eq!(s_ring(3, 2, 2, Errata).unwrap(), int(-162));
        assert_eq!(s_ring(5, 2, 2, Paper).unwrap(), int(2500));
        assert_eq!(s_ring(3, 3, 5, Paper).unwrap(), int(0));
        assert_eq!(st_ring_unit(3, 2, 2, RingUnitClass::Qr, Errata).unwrap(), int(54));
        assert_eq!(st_ring_unit(2, 2, 2, RingUnitClass::UnitEvenQ, Paper).unwrap(), int(16));
        assert!(matches!(
            st_ring_unit(2, 2, 2, RingUnitClass::UnitEvenQ, Errata),
            Err(FormulaError::ClaimWithdrawn { .. })
        ));
        assert_eq!(st_ring_unit(2, 2, 3, RingUnitClass::UnitEvenQ, Errata).unwrap(), int(192));
    }

    #[test]
    fn ring_closed_forms_match_lift() {
        for variant in [Paper, Errata] {
            for q in [3, 5, 7, 9, 11] {
                for e in 1..=4 {
                    for n in (2..=10).step_by(2) {
                        s_ring(q, e, n, variant).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn layers_on_small_rings() {
        // FU(2,2), n = 2: zero counts 4 over F_2 and 20 over the ring itself
        let zc = ZeroCountProfile::from_entries(2, [(1, 4), (2, 20)]);
        assert_eq!(punctured_layer(2, 2, 2, 1, &zc).unwrap(), int(12));
        assert_eq!(st_ring_gamma_power(2, 2, 2, 1, &zc, Paper).unwrap(), int(12));
        assert_eq!(punctured_layer(2, 2, 2, 0, &zc).unwrap(), ist_ring(2, 2, 2).unwrap());
        assert_eq!(ideal_layer(2, 2, 2, 2, &zc).unwrap(), int(20));

        // Z(9), n = 2: zero counts 9 and 99
        let zc = ZeroCountProfile::from_entries(2, [(1, 9), (2, 99)]);
        assert_eq!(ideal_layer(3, 2, 2, 1, &zc).unwrap(), int(243));
        assert_eq!(st_ring_gamma_power(3, 2, 2, 1, &zc, Paper).unwrap(), int(72));
        assert_eq!(st_ring_gamma_power_nonsquare(3, 2, 2, 1, &zc, Errata).unwrap(), int(72));
        assert_eq!(st_ring_gamma_power_nonsquare(3, 2, 2, 1, &zc, Paper).unwrap(), int(-24));
        assert_eq!(zero_fiber_identity(3, 2, 2, &zc, &int(486)).unwrap(), int(0));
    }

    #[test]
    fn layer_nesting_and_class_weights() {
        let zc = ZeroCountProfile::from_entries(2, [(1, 9), (2, 99), (3, 891)]);
        let (q, e, n) = (3, 3, 2);
        for s in 0..e {
            let lhs = ideal_layer(q, e, n, s, &zc).unwrap();
            let rhs = punctured_layer(q, e, n, s, &zc).unwrap() + ideal_layer(q, e, n, s + 1, &zc).unwrap();
            if s > 0 {
                assert_eq!(lhs, rhs, "s={s}");
            }
        }
        // s = 1: each class holds (q-1)q^(e-s-1)/2 values under the errata split
        let s = 1;
        let g = st_ring_gamma_power(q, e, n, s, &zc, Errata).unwrap();
        let b = st_ring_gamma_power_nonsquare(q, e, n, s, &zc, Errata).unwrap();
        let half = big(q - 1) * qpow(q, e - s - 1) / 2;
        assert_eq!(half * (g + b), punctured_layer(q, e, n, s, &zc).unwrap());
        assert!(matches!(
            st_ring_gamma_power(q, e, n, 2, &zc, Errata),
            Err(FormulaError::ClaimWithdrawn { .. })
        ));
    }

    #[test]
    fn layer_ranges_and_profiles() {
        let zc = ZeroCountProfile::from_entries(2, [(1, 9)]);
        assert!(matches!(ideal_layer(3, 2, 2, 3, &zc), Err(FormulaError::LayerOutOfRange { .. })));
        assert!(matches!(st_ring_gamma_power(3, 2, 2, 0, &zc, Paper), Err(FormulaError::LayerOutOfRange { .. })));
        assert_eq!(punctured_layer(3, 2, 2, 1, &zc), Err(FormulaError::MissingZeroCount(2)));
        assert!(matches!(punctured_layer(3, 2, 3, 1, &zc), Err(FormulaError::ProfileDimension { .. })));
    }

    #[test]
    fn catalog_is_complete() {
        let names: Vec<String> = catalog().iter().map(|i| i.name.to_string()).collect();
        assert_eq!(names.len(), 12);
        for name in names {
            assert_eq!(name.parse::<FormulaName>().unwrap().to_string(), name);
        }
    }
}
