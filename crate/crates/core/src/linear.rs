//! Linear equations `a_1 x_1 + ... + a_k x_k + 0·(ℓ free variables) = b` and
//! their classification into Sidorenko / common.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

/// Whether the right-hand side is zero or a fixed nonzero vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhsMode {
    Zero,
    #[serde(rename = "nonzero")]
    NonzeroB,
}

impl fmt::Display for RhsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RhsMode::Zero => "zero",
            RhsMode::NonzeroB => "nonzero",
        })
    }
}

/// A linear equation with nonzero coefficients `a_1..a_k` and `ℓ` free
/// variables (coefficient zero).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearEquation {
    field: Field,
    coeffs: Vec<u32>,
    free_count: usize,
    rhs: RhsMode,
}

impl LinearEquation {
    /// Builds an equation from nonzero coefficient codes.
    pub fn new(field: Field, coeffs: Vec<u32>, free_count: usize, rhs: RhsMode) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::AllZero);
        }
        for &c in &coeffs {
            if c == 0 {
                return Err(Error::NotApplicable(
                    "coefficients must be nonzero; use normalize to fold zeros into free variables"
                        .into(),
                ));
            }
            if c >= field.q() {
                return Err(Error::ElementOutOfRange {
                    code: c as u64,
                    q: field.q(),
                });
            }
        }
        Ok(LinearEquation {
            field,
            coeffs,
            free_count,
            rhs,
        })
    }

    /// Like [`normalize`] but from raw codes.
    pub fn from_codes(field: &Field, raw: &[u32], rhs: RhsMode) -> Result<Self> {
        let elements = raw
            .iter()
            .map(|&c| field.element(c as u64))
            .collect::<Result<Vec<_>>>()?;
        normalize(&elements, rhs)
    }

    /// Homogeneous equation over a prime field from signed integer coefficients.
    pub fn from_ints(field: &Field, raw: &[i64]) -> Result<Self> {
        let codes: Vec<u32> = raw.iter().map(|&c| field.from_int(c)).collect();
        Self::from_codes(field, &codes, RhsMode::Zero)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Number of nonzero coefficients.
    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    pub fn free_count(&self) -> usize {
        self.free_count
    }

    /// Total variable count `k + ℓ`.
    pub fn total_vars(&self) -> usize {
        self.coeffs.len() + self.free_count
    }

    pub fn rhs_mode(&self) -> RhsMode {
        self.rhs
    }

    pub fn is_homogeneous(&self) -> bool {
        self.rhs == RhsMode::Zero
    }

    /// Single-variable equations have the trivial solution set `{0}` (or `{a⁻¹b}`).
    pub fn is_degenerate(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn with_free_count(&self, free_count: usize) -> Self {
        LinearEquation {
            free_count,
            ..self.clone()
        }
    }

    pub fn with_rhs(&self, rhs: RhsMode) -> Self {
        LinearEquation {
            rhs,
            ..self.clone()
        }
    }

    /// `L=1,3,1; q=5; free=0; b=zero`
    pub fn to_spec(&self) -> String {
        let coeffs: Vec<String> = self.coeffs.iter().map(u32::to_string).collect();
        format!(
            "L={}; {}; free={}; b={}",
            coeffs.join(","),
            self.field.spec(),
            self.free_count,
            self.rhs
        )
    }
}

impl fmt::Display for LinearEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_spec())
    }
}

/// Drops zero coefficients into the free-variable count, keeping the order of
/// the nonzero ones.
pub fn normalize(raw: &[FieldElement], rhs: RhsMode) -> Result<LinearEquation> {
    let first = raw.first().ok_or(Error::AllZero)?;
    let field = first.field().clone();
    if raw.iter().any(|e| e.field() != &field) {
        return Err(Error::FieldMismatch);
    }
    let coeffs: Vec<u32> = raw
        .iter()
        .map(FieldElement::code)
        .filter(|&c| c != 0)
        .collect();
    if coeffs.is_empty() {
        return Err(Error::AllZero);
    }
    let free_count = raw.len() - coeffs.len();
    LinearEquation::new(field, coeffs, free_count, rhs)
}

/// Partitions the coefficients into pairs summing to zero, if possible.
///
/// A pairing exists iff every value `v` with `2v = 0` has even multiplicity
/// and every other value occurs as often as `-v`. Pairs are emitted by
/// matching the smallest unused index with the smallest unused partner.
pub fn canceling_pair_partition(field: &Field, coeffs: &[u32]) -> Option<Vec<(usize, usize)>> {
    if coeffs.len() % 2 == 1 {
        return None;
    }
    let mut tally: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in coeffs {
        *tally.entry(c).or_default() += 1;
    }
    for (&v, &count) in &tally {
        let neg = field.neg(v);
        let balanced = if neg == v {
            count % 2 == 0
        } else {
            tally.get(&neg).copied().unwrap_or(0) == count
        };
        if !balanced {
            return None;
        }
    }

    let mut used = vec![false; coeffs.len()];
    let mut pairs = Vec::with_capacity(coeffs.len() / 2);
    for i in 0..coeffs.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let want = field.neg(coeffs[i]);
        let j = (i + 1..coeffs.len())
            .find(|&j| !used[j] && coeffs[j] == want)
            .expect("multiplicity check guarantees a partner");
        used[j] = true;
        pairs.push((i, j));
    }
    Some(pairs)
}

/// Which case of the classification decided a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Coefficients split into canceling pairs, no free variables.
    CancelingPairs,
    /// Even arity without a canceling pairing.
    EvenUnpaired,
    /// Odd arity, no free variables.
    OddArity,
    /// At least one free variable; positive iff a pairing exists.
    FreeVariables,
    /// Nonzero right-hand side.
    Inhomogeneous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub sidorenko: bool,
    pub common: bool,
    pub basis: Basis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<(usize, usize)>>,
    /// Set for single-variable equations.
    pub degenerate: bool,
}

impl Verdict {
    /// Same classification, ignoring which pairing witnessed it.
    pub fn same_class(&self, other: &Verdict) -> bool {
        self.sidorenko == other.sidorenko
            && self.common == other.common
            && self.basis == other.basis
    }
}

/// Classifies a homogeneous equation.
pub fn classify(eq: &LinearEquation) -> Result<Verdict> {
    if !eq.is_homogeneous() {
        return Err(Error::WrongRhsMode);
    }
    let pairing = canceling_pair_partition(eq.field(), eq.coeffs());
    let degenerate = eq.is_degenerate();
    let free = eq.free_count() > 0;
    let verdict = match pairing {
        Some(pairs) => Verdict {
            sidorenko: true,
            common: true,
            basis: if free {
                Basis::FreeVariables
            } else {
                Basis::CancelingPairs
            },
            pairing: Some(pairs),
            degenerate,
        },
        None if free => Verdict {
            sidorenko: false,
            common: false,
            basis: Basis::FreeVariables,
            pairing: None,
            degenerate,
        },
        None if eq.k().is_multiple_of(2) => Verdict {
            sidorenko: false,
            common: false,
            basis: Basis::EvenUnpaired,
            pairing: None,
            degenerate,
        },
        None => Verdict {
            sidorenko: false,
            common: true,
            basis: Basis::OddArity,
            pairing: None,
            degenerate,
        },
    };
    Ok(verdict)
}

/// Classifies an equation with nonzero right-hand side: never Sidorenko,
/// common iff `k` is odd and there are no free variables.
pub fn classify_inhomogeneous(eq: &LinearEquation) -> Result<Verdict> {
    if eq.is_homogeneous() {
        return Err(Error::WrongRhsMode);
    }
    Ok(Verdict {
        sidorenko: false,
        common: eq.k() % 2 == 1 && eq.free_count() == 0,
        basis: Basis::Inhomogeneous,
        pairing: None,
        degenerate: eq.is_degenerate(),
    })
}

/// Dispatches on the rhs mode.
pub fn classify_any(eq: &LinearEquation) -> Result<Verdict> {
    match eq.rhs_mode() {
        RhsMode::Zero => classify(eq),
        RhsMode::NonzeroB => classify_inhomogeneous(eq),
    }
}

/// True iff the coefficients sum to zero.
pub fn is_translation_invariant(eq: &LinearEquation) -> bool {
    let field = eq.field();
    eq.coeffs().iter().fold(0, |acc, &c| field.add(acc, c)) == 0
}
