//! Finite fields GF(p^m), the vector spaces GF(q)^n over them, the trace map
//! and additive characters.
//!
//! Elements are encoded as integers in `[0, q)`: the polynomial
//! `c_0 + c_1 α + ... + c_{m-1} α^{m-1}` has code `Σ c_i p^i`. Vectors in
//! GF(q)^n are encoded by the little-endian base-q digits of their index, so
//! the index of a vector is also its little-endian base-p digit string of
//! length `n·m`, and vector addition is digit-wise addition mod p.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u64 = 1 << 16;

/// Largest supported vector space size q^n.
pub const MAX_SPACE_SIZE: u64 = 1 << 26;

const MUL_TABLE_LIMIT: u32 = 256;

/// Conway polynomials, constant coefficient first.
const CONWAY: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (5, 2, &[2, 4, 1]),
    (7, 2, &[3, 6, 1]),
];

/// Default modulus for GF(p^m), if the built-in table has one.
pub fn conway_polynomial(p: u32, m: u32) -> Option<&'static [u32]> {
    CONWAY
        .iter()
        .find(|(cp, cm, _)| *cp == p && *cm == m)
        .map(|(_, _, poly)| *poly)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` into `(p, m)` with `q = p^m`, if `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while !q.is_multiple_of(p) {
        p += 1;
    }
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p as u32, m))
}

struct FieldInner {
    p: u32,
    m: u32,
    q: u32,
    modulus: Vec<u32>,
    mul_table: Option<Vec<u32>>,
    trace: Vec<u32>,
    roots: Vec<Complex64>,
}

/// The finite field GF(p^m). Cheap to clone; immutable after construction.
#[derive(Clone)]
pub struct Field(Arc<FieldInner>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.m == other.0.m && self.0.modulus == other.0.modulus)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.spec())
    }
}

impl Field {
    /// Builds GF(p^m). `modulus` lists the coefficients of a monic degree-m
    /// polynomial, constant term first; it is ignored for prime fields.
    pub fn new(p: u32, m: u32, modulus: Option<&[u32]>) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if m == 0 {
            return Err(Error::OutOfRange {
                what: "m",
                value: 0,
            });
        }
        let q = (p as u64).checked_pow(m).filter(|&q| q <= MAX_FIELD_ORDER);
        let q = match q {
            Some(q) => q as u32,
            None => return Err(Error::FieldTooLarge((p as u64).saturating_pow(m))),
        };
        let modulus = if m == 1 {
            vec![0, 1]
        } else {
            let poly = match modulus {
                Some(poly) => poly.to_vec(),
                None => conway_polynomial(p, m)
                    .ok_or(Error::NoDefaultModulus(q as u64))?
                    .to_vec(),
            };
            check_modulus(p, m, &poly)?;
            if !is_irreducible(p, &poly) {
                return Err(Error::Reducible(poly));
            }
            poly
        };

        let mut inner = FieldInner {
            p,
            m,
            q,
            modulus,
            mul_table: None,
            trace: Vec::new(),
            roots: (0..p)
                .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / p as f64))
                .collect(),
        };
        if m > 1 && q <= MUL_TABLE_LIMIT {
            let table = (0..q * q)
                .map(|ab| poly_mul_mod(&inner, ab / q, ab % q))
                .collect();
            inner.mul_table = Some(table);
        }
        let mut field = Field(Arc::new(inner));
        let trace = (0..q).map(|a| field.compute_trace(a)).collect();
        Arc::get_mut(&mut field.0)
            .expect("field is not shared yet")
            .trace = trace;
        Ok(field)
    }

    /// The prime field GF(p).
    pub fn prime(p: u32) -> Result<Self> {
        Field::new(p, 1, None)
    }

    /// GF(q) with the default modulus when q is not prime.
    pub fn of_order(q: u64) -> Result<Self> {
        match prime_power(q) {
            Some((p, m)) => Field::new(p, m, None),
            None => Err(Error::NotPrime(q)),
        }
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn m(&self) -> u32 {
        self.0.m
    }

    pub fn q(&self) -> u32 {
        self.0.q
    }

    /// Modulus coefficients, constant term first. `[0, 1]` for prime fields.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.0.m == 1
    }

    /// Canonical field spec string: `q=5`, or `p=2,m=2,modulus=1+x+x^2`.
    pub fn spec(&self) -> String {
        if self.is_prime_field() {
            return format!("q={}", self.q());
        }
        let terms: Vec<String> = self
            .modulus()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "x".to_string(),
                (1, c) => format!("{c}x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}x^{i}"),
            })
            .collect();
        format!("p={},m={},modulus={}", self.p(), self.m(), terms.join("+"))
    }

    pub fn element(&self, code: u64) -> Result<FieldElement> {
        if code >= self.q() as u64 {
            return Err(Error::ElementOutOfRange { code, q: self.q() });
        }
        Ok(FieldElement {
            code: code as u32,
            field: self.clone(),
        })
    }

    /// Reduces an integer into the prime subfield.
    pub fn from_int(&self, value: i64) -> u32 {
        value.rem_euclid(self.p() as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let p = self.0.p;
        if self.0.m == 1 {
            let s = a + b;
            if s >= p {
                s - p
            } else {
                s
            }
        } else if p == 2 {
            a ^ b
        } else {
            digitwise(p, a as usize, b as usize, |x, y| (x + y) % p as usize) as u32
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        let p = self.0.p;
        if self.0.m == 1 {
            if a == 0 {
                0
            } else {
                p - a
            }
        } else if p == 2 {
            a
        } else {
            digitwise(p, a as usize, 0, |x, _| (p as usize - x) % p as usize) as u32
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.0.m == 1 {
            ((a as u64 * b as u64) % self.0.p as u64) as u32
        } else if let Some(table) = &self.0.mul_table {
            table[(a * self.0.q + b) as usize]
        } else {
            poly_mul_mod(&self.0, a, b)
        }
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.0.q as u64 - 2))
    }

    /// Absolute trace to the prime field, as an integer in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: u32) -> u32 {
        self.0.trace[a as usize]
    }

    /// `exp(2πi j / p)` from the precomputed table.
    #[inline]
    pub fn root_of_unity(&self, j: u32) -> Complex64 {
        self.0.roots[(j % self.0.p) as usize]
    }

    fn compute_trace(&self, a: u32) -> u32 {
        let mut acc = 0;
        let mut frob = a;
        for _ in 0..self.m() {
            acc = self.add(acc, frob);
            frob = self.pow(frob, self.p() as u64);
        }
        debug_assert!(acc < self.p(), "trace must land in the prime field");
        acc
    }
}

fn check_modulus(p: u32, m: u32, poly: &[u32]) -> Result<()> {
    if poly.len() != m as usize + 1 {
        return Err(Error::BadModulus(format!(
            "expected {} coefficients for degree {m}, got {}",
            m + 1,
            poly.len()
        )));
    }
    if poly[m as usize] != 1 {
        return Err(Error::BadModulus("modulus must be monic".into()));
    }
    if let Some(&c) = poly.iter().find(|&&c| c >= p) {
        return Err(Error::BadModulus(format!(
            "coefficient {c} is not reduced mod {p}"
        )));
    }
    Ok(())
}

/// Trial division by every monic polynomial of degree at most m/2.
fn is_irreducible(p: u32, poly: &[u32]) -> bool {
    let m = poly.len() - 1;
    for d in 1..=m / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut divisor = to_digits(p, code, d);
            divisor.push(1);
            if poly_rem(p, poly, &divisor).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn to_digits(p: u32, mut code: u64, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len + 1);
    for _ in 0..len {
        out.push((code % p as u64) as u32);
        code /= p as u64;
    }
    out
}

fn from_digits(p: u32, digits: &[u32]) -> u32 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Remainder of `a` modulo the monic polynomial `b`.
fn poly_rem(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let db = b.len() - 1;
    let mut r: Vec<u32> = a.to_vec();
    let p64 = p as u64;
    while r.len() > db {
        let lead = *r.last().unwrap() as u64;
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().enumerate() {
                let cur = r[shift + i] as u64;
                r[shift + i] = ((cur + p64 * p64 - lead * bc as u64) % p64) as u32;
            }
        }
        r.pop();
    }
    r
}

fn poly_mul_mod(inner: &FieldInner, a: u32, b: u32) -> u32 {
    let p = inner.p;
    let m = inner.m as usize;
    let da = to_digits(p, a as u64, m);
    let db = to_digits(p, b as u64, m);
    let mut prod = vec![0u64; 2 * m - 1];
    for (i, &x) in da.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] += x as u64 * y as u64;
        }
    }
    let prod: Vec<u32> = prod.iter().map(|&c| (c % p as u64) as u32).collect();
    let rem = poly_rem(p, &prod, &inner.modulus);
    from_digits(p, &rem)
}

/// Applies `op` to corresponding base-p digits of `a` and `b`.
#[inline]
fn digitwise(p: u32, mut a: usize, mut b: usize, op: impl Fn(usize, usize) -> usize) -> usize {
    let p = p as usize;
    let mut out = 0;
    let mut place = 1;
    while a > 0 || b > 0 {
        out += op(a % p, b % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

/// An element of a [`Field`], carrying its field for checked arithmetic.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    code: u32,
    field: Field,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code)
    }
}

impl FieldElement {
    pub fn code(&self) -> u32 {
        self.code
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.code == 0
    }

    fn same_field(&self, other: &FieldElement) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    fn with(&self, code: u32) -> FieldElement {
        FieldElement {
            code,
            field: self.field.clone(),
        }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(self.with(self.field.add(self.code, other.code)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(self.with(self.field.mul(self.code, other.code)))
    }

    pub fn neg(&self) -> FieldElement {
        self.with(self.field.neg(self.code))
    }

    pub fn inv(&self) -> Result<FieldElement> {
        Ok(self.with(self.field.inv(self.code)?))
    }

    pub fn trace(&self) -> u32 {
        self.field.trace(self.code)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Neg,
    Inv,
}

/// Field arithmetic with operand checks.
pub fn arith(op: ArithOp, a: &FieldElement, b: Option<&FieldElement>) -> Result<FieldElement> {
    match op {
        ArithOp::Add => a.add(b.ok_or(Error::MissingOperand)?),
        ArithOp::Mul => a.mul(b.ok_or(Error::MissingOperand)?),
        ArithOp::Neg => Ok(a.neg()),
        ArithOp::Inv => a.inv(),
    }
}

/// The group GF(q)^n with vectors addressed by index in `[0, q^n)`.
#[derive(Clone, PartialEq, Eq)]
pub struct Space {
    field: Field,
    n: usize,
    size: usize,
}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Space(n={}, {})", self.n, self.field.spec())
    }
}

impl Space {
    pub fn new(field: Field, n: usize) -> Result<Self> {
        let size = (field.q() as u64)
            .checked_pow(n as u32)
            .filter(|&s| s <= MAX_SPACE_SIZE)
            .ok_or(Error::OutOfRange {
                what: "q^n",
                value: n as i64,
            })?;
        Ok(Space {
            field,
            n,
            size: size as usize,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// q^n.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn coords(&self, index: usize) -> Vec<u32> {
        let q = self.field.q() as usize;
        let mut rest = index;
        (0..self.n)
            .map(|_| {
                let c = rest % q;
                rest /= q;
                c as u32
            })
            .collect()
    }

    pub fn index_of(&self, coords: &[u32]) -> Result<usize> {
        if coords.len() != self.n {
            return Err(Error::LengthMismatch(coords.len(), self.n));
        }
        let q = self.field.q();
        if let Some(&c) = coords.iter().find(|&&c| c >= q) {
            return Err(Error::ElementOutOfRange { code: c as u64, q });
        }
        Ok(coords
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * q as usize + c as usize))
    }

    pub fn vector(&self, index: usize) -> Result<GroupVector> {
        if index >= self.size {
            return Err(Error::IndexOutOfRange {
                index,
                size: self.size,
            });
        }
        Ok(GroupVector {
            field: self.field.clone(),
            coords: self.coords(index),
            index,
        })
    }

    /// The vector with first coordinate 1 and the rest 0.
    pub fn unit(&self) -> usize {
        usize::from(self.n > 0)
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        let p = self.field.p();
        if p == 2 {
            a ^ b
        } else if self.n == 1 && self.field.is_prime_field() {
            let s = a + b;
            if s >= p as usize {
                s - p as usize
            } else {
                s
            }
        } else {
            digitwise(p, a, b, |x, y| (x + y) % p as usize)
        }
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        let p = self.field.p();
        if p == 2 {
            a
        } else {
            digitwise(p, a, 0, |x, _| (p as usize - x) % p as usize)
        }
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// Scalar multiple `c · v`.
    pub fn scale(&self, c: u32, v: usize) -> usize {
        let q = self.field.q() as usize;
        let mut rest = v;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.n {
            let digit = (rest % q) as u32;
            rest /= q;
            out += self.field.mul(c, digit) as usize * place;
            place *= q;
        }
        out
    }

    /// Table of `c · v` for every index `v`.
    pub fn scale_map(&self, c: u32) -> Vec<usize> {
        (0..self.size).map(|v| self.scale(c, v)).collect()
    }

    /// Coordinatewise dot product, no conjugation.
    pub fn dot(&self, a: usize, b: usize) -> u32 {
        let q = self.field.q() as usize;
        let (mut a, mut b) = (a, b);
        let mut acc = 0;
        for _ in 0..self.n {
            acc = self
                .field
                .add(acc, self.field.mul((a % q) as u32, (b % q) as u32));
            a /= q;
            b /= q;
        }
        acc
    }

    /// `tr⟨x, y⟩`, so that `γ_y(x) = ω^{exponent}` with ω = exp(2πi/p).
    #[inline]
    pub fn character_exponent(&self, y: usize, x: usize) -> u32 {
        self.field.trace(self.dot(y, x))
    }

    #[inline]
    pub fn character(&self, y: usize, x: usize) -> Complex64 {
        self.field.root_of_unity(self.character_exponent(y, x))
    }
}

/// A vector of GF(q)^n with both its coordinates and its index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupVector {
    field: Field,
    coords: Vec<u32>,
    index: usize,
}

impl GroupVector {
    pub fn new(field: &Field, coords: Vec<u32>) -> Result<Self> {
        let space = Space::new(field.clone(), coords.len())?;
        let index = space.index_of(&coords)?;
        Ok(GroupVector {
            field: field.clone(),
            coords,
            index,
        })
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
}

/// `γ_y(x) = exp(2πi·tr⟨x, y⟩ / p)`.
pub fn character(y: &GroupVector, x: &GroupVector) -> Result<Complex64> {
    if y.field != x.field {
        return Err(Error::FieldMismatch);
    }
    if y.len() != x.len() {
        return Err(Error::LengthMismatch(y.len(), x.len()));
    }
    let field = &y.field;
    let dot = y
        .coords
        .iter()
        .zip(&x.coords)
        .fold(0, |acc, (&a, &b)| field.add(acc, field.mul(a, b)));
    Ok(field.root_of_unity(field.trace(dot)))
}
