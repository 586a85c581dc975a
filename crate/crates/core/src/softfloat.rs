//! Floating-point encoding and the software reference model.
//!
//! A value is stored as sign | fraction | exponent (most-significant field
//! first): bit layout over `1 + M + E` bits, little-endian, is
//!
//! ```text
//!   [0 .. E)      exponent field, two's complement
//!   [E .. E+M)    fraction (mantissa with the implicit leading 1 dropped)
//!   [E + M]       sign
//! ```
//!
//! The exponent is two's complement rather than biased so that exponent
//! arithmetic can reuse the integer adder and sign reasoning stays direct.
//! The two extremal exponent rows are reserved: a field equal to the most
//! negative value decodes to zero and the most positive to infinity,
//! regardless of fraction bits, so special outcomes cost no extra qubits.
//! Normal values therefore carry exponents in `[EMIN+1, EMAX-1]`.
//!
//! `add` and `mul` here are the bit-exact reference the circuits are
//! verified against: alignment is skipped when the exponent difference
//! exceeds `M` (the wider operand is returned unchanged), intermediate
//! sums are exact over a `2M`-bit working window, and all rounding is
//! truncation toward zero. Infinity is absorbing; this is an extension,
//! since only infinity *outcomes* are otherwise required.

/// Floating-point format parameters: E exponent bits, M stored fraction
/// bits. The implicit leading 1 is not stored. Total width is `1 + M + E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FpFormat {
    exponent_bits: u32,
    mantissa_bits: u32,
}

/// Errors from format construction and encoding.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FpError {
    #[error("format requires E >= 2, M >= 1 and 1+M+E <= 64 (got E={0}, M={1})")]
    BadFormat(u32, u32),
    #[error("value not representable in the target format")]
    OutOfRange,
}

impl FpFormat {
    pub fn new(exponent_bits: u32, mantissa_bits: u32) -> Result<Self, FpError> {
        if exponent_bits < 2 || mantissa_bits < 1 || 1 + mantissa_bits + exponent_bits > 64 {
            return Err(FpError::BadFormat(exponent_bits, mantissa_bits));
        }
        Ok(FpFormat {
            exponent_bits,
            mantissa_bits,
        })
    }

    pub fn exponent_bits(&self) -> u32 {
        self.exponent_bits
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    /// Total encoded width: 1 sign + M fraction + E exponent bits.
    pub fn width(&self) -> u32 {
        1 + self.mantissa_bits + self.exponent_bits
    }

    /// Most negative exponent field value (reserved: zero row).
    pub fn emin(&self) -> i64 {
        -(1i64 << (self.exponent_bits - 1))
    }

    /// Most positive exponent field value (reserved: infinity row).
    pub fn emax(&self) -> i64 {
        (1i64 << (self.exponent_bits - 1)) - 1
    }

    /// Smallest exponent of a normal value.
    pub fn normal_min(&self) -> i64 {
        self.emin() + 1
    }

    /// Largest exponent of a normal value.
    pub fn normal_max(&self) -> i64 {
        self.emax() - 1
    }

    fn exponent_mask(&self) -> u64 {
        (1u64 << self.exponent_bits) - 1
    }

    fn fraction_mask(&self) -> u64 {
        (1u64 << self.mantissa_bits) - 1
    }
}

/// Classification of a decoded value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpClass {
    Normal,
    Zero,
    Infinity,
}

/// A decoded software-side floating-point value.
///
/// For normal values the mantissa carries the implicit leading 1 made
/// explicit, i.e. it lies in `[2^M, 2^{M+1})`, and the value is
/// `(-1)^sign * mantissa * 2^(exponent - M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FpValue {
    pub class: FpClass,
    pub sign: bool,
    pub mantissa: u64,
    pub exponent: i64,
}

impl FpValue {
    pub fn zero() -> Self {
        FpValue {
            class: FpClass::Zero,
            sign: false,
            mantissa: 0,
            exponent: 0,
        }
    }

    pub fn infinity(sign: bool) -> Self {
        FpValue {
            class: FpClass::Infinity,
            sign,
            mantissa: 0,
            exponent: 0,
        }
    }

    pub fn normal(sign: bool, mantissa: u64, exponent: i64) -> Self {
        FpValue {
            class: FpClass::Normal,
            sign,
            mantissa,
            exponent,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.class == FpClass::Zero
    }

    pub fn is_infinity(&self) -> bool {
        self.class == FpClass::Infinity
    }

    pub fn is_normal(&self) -> bool {
        self.class == FpClass::Normal
    }

    /// Approximate `f64` rendering for reports; infinities map to IEEE
    /// infinities.
    pub fn to_f64(&self, format: &FpFormat) -> f64 {
        match self.class {
            FpClass::Zero => 0.0,
            FpClass::Infinity => {
                if self.sign {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
            FpClass::Normal => {
                let sign = if self.sign { -1.0 } else { 1.0 };
                sign * self.mantissa as f64
                    * (self.exponent - format.mantissa_bits as i64).exp2()
            }
        }
    }
}

trait Exp2 {
    fn exp2(self) -> f64;
}

impl Exp2 for i64 {
    fn exp2(self) -> f64 {
        (self as f64).exp2()
    }
}

/// An encoded bit pattern in some [`FpFormat`] (low `width()` bits valid).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EncodedFp(pub u64);

/// Encode a value into its bit pattern.
///
/// Zero encodes with the most negative exponent field and cleared sign and
/// fraction; infinity with the most positive exponent field, cleared
/// fraction and its own sign.
pub fn encode(format: &FpFormat, value: &FpValue) -> Result<EncodedFp, FpError> {
    let e = format.exponent_bits;
    let m = format.mantissa_bits;
    let (sign, fraction, field) = match value.class {
        FpClass::Zero => (false, 0, format.emin()),
        FpClass::Infinity => (value.sign, 0, format.emax()),
        FpClass::Normal => {
            let implicit = 1u64 << m;
            if value.mantissa < implicit || value.mantissa >= implicit << 1 {
                return Err(FpError::OutOfRange);
            }
            if value.exponent < format.normal_min() || value.exponent > format.normal_max() {
                return Err(FpError::OutOfRange);
            }
            (value.sign, value.mantissa - implicit, value.exponent)
        }
    };
    let bits = (field as u64 & format.exponent_mask())
        | fraction << e
        | (sign as u64) << (e + m);
    Ok(EncodedFp(bits))
}

/// Decode a bit pattern. Total function: the reserved exponent rows map to
/// the zero and infinity classes (all zero-row patterns, including
/// negative-zero ones, normalize to the canonical zero).
pub fn decode(format: &FpFormat, encoded: EncodedFp) -> FpValue {
    let e = format.exponent_bits;
    let m = format.mantissa_bits;
    let bits = encoded.0;
    let field_raw = bits & format.exponent_mask();
    // sign-extend the two's-complement exponent field
    let field = if field_raw >> (e - 1) & 1 == 1 {
        field_raw as i64 - (1i64 << e)
    } else {
        field_raw as i64
    };
    let fraction = bits >> e & format.fraction_mask();
    let sign = bits >> (e + m) & 1 == 1;
    if field == format.emin() {
        FpValue::zero()
    } else if field == format.emax() {
        FpValue::infinity(sign)
    } else {
        FpValue::normal(sign, (1u64 << m) | fraction, field)
    }
}

/// Saturating constructor shared by the reference operations: exponents
/// below the normal range flush to zero, above it to infinity.
fn pack(format: &FpFormat, sign: bool, mantissa: u64, exponent: i64) -> FpValue {
    debug_assert!(mantissa >= 1 << format.mantissa_bits);
    debug_assert!(mantissa < 2 << format.mantissa_bits);
    if exponent < format.normal_min() {
        FpValue::zero()
    } else if exponent > format.normal_max() {
        FpValue::infinity(sign)
    } else {
        FpValue::normal(sign, mantissa, exponent)
    }
}

/// Exponent field as it appears in the encoding (zero row for zeros,
/// infinity row for infinities). Operand sorting uses this.
fn field_exponent(format: &FpFormat, v: &FpValue) -> i64 {
    match v.class {
        FpClass::Zero => format.emin(),
        FpClass::Infinity => format.emax(),
        FpClass::Normal => v.exponent,
    }
}

/// Reference floating-point addition with truncation toward zero.
///
/// Bit-exactly mirrors the adder circuit: operands are sorted by exponent
/// field, the smaller mantissa is aligned over a 2M-bit working window
/// (skipped entirely when the exponent difference exceeds M, in which case
/// the larger operand is the result), mantissas are combined exactly, and
/// the result is renormalized and truncated. Exponent underflow saturates
/// to zero and overflow to infinity. Infinity absorbs; for two infinities
/// the result is negative only when both are.
pub fn add(format: &FpFormat, a: &FpValue, b: &FpValue) -> FpValue {
    let m = format.mantissa_bits as i64;
    let swap = field_exponent(format, a) < field_exponent(format, b);
    let (x, y) = if swap { (b, a) } else { (a, b) };
    if x.is_infinity() {
        // y can only be infinite too when its field ties the maximum
        return if y.is_infinity() {
            FpValue::infinity(x.sign && y.sign)
        } else {
            FpValue::infinity(x.sign)
        };
    }
    let ex = field_exponent(format, x);
    let ey = field_exponent(format, y);
    let delta = ex - ey;
    debug_assert!(delta >= 0);
    let mx = if x.is_normal() { x.mantissa } else { 0 };
    let my = if y.is_normal() && delta <= m { y.mantissa } else { 0 };
    // Working frame: x sits M bits above a 2M-bit window base, the aligned
    // y keeps every shifted-out bit, so the sum is exact.
    let wx = (mx as i128) << m;
    let wy_signed = if x.sign != y.sign {
        -((my as i128) << m)
    } else {
        (my as i128) << m
    };
    let inner = wx + (wy_signed >> delta.min(2 * m));
    let sign_r = x.sign ^ (inner < 0);
    let mag = inner.unsigned_abs();
    if mag == 0 {
        return FpValue::zero();
    }
    let lead = 127 - mag.leading_zeros() as i64;
    let er = ex + lead - 2 * m;
    let mant = if lead >= m {
        (mag >> (lead - m)) as u64
    } else {
        (mag << (m - lead)) as u64
    };
    pack(format, sign_r, mant, er)
}

/// Reference floating-point multiplication with truncation toward zero.
///
/// The full double-width mantissa product is formed, renormalized by at
/// most one position, and truncated. The result sign is the XOR of the
/// input signs. Infinity absorbs (including infinity times zero, an
/// extension); otherwise a zero operand yields zero. Exponent underflow
/// saturates to zero, overflow to infinity.
pub fn mul(format: &FpFormat, a: &FpValue, b: &FpValue) -> FpValue {
    let m = format.mantissa_bits;
    let sign = a.sign ^ b.sign;
    if a.is_infinity() || b.is_infinity() {
        return FpValue::infinity(sign);
    }
    if a.is_zero() || b.is_zero() {
        return FpValue::zero();
    }
    let prod = a.mantissa as u128 * b.mantissa as u128;
    let ovf = (prod >> (2 * m + 1)) & 1 == 1;
    let mant = (prod >> (m + ovf as u32)) as u64;
    let er = a.exponent + b.exponent + ovf as i64;
    pack(format, sign, mant, er)
}

/// Parse a format flag of the form `e8m7`.
pub fn parse_format(s: &str) -> Result<FpFormat, FpError> {
    let parse = || -> Option<(u32, u32)> {
        let rest = s.strip_prefix('e')?;
        let m_pos = rest.find('m')?;
        let e: u32 = rest[..m_pos].parse().ok()?;
        let m: u32 = rest[m_pos + 1..].parse().ok()?;
        Some((e, m))
    };
    match parse() {
        Some((e, m)) => FpFormat::new(e, m),
        None => Err(FpError::BadFormat(0, 0)),
    }
}
