//! Exact enumeration of solutions in sets and colorings, the brute-force
//! solution average `Λ`, and the integer threshold predicates.
//!
//! Tuples with repeated coordinates are counted, as in the definitions of
//! the Sidorenko and common properties. Free variables range over the same
//! set independently, so they contribute a factor `|A|^ℓ`.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::budget::{saturating_pow, Budget};
use crate::error::{Error, Result};
use crate::field::Space;
use crate::fourier::{check_rhs, GroupFunction};
use crate::linear::LinearEquation;

/// A subset of GF(q)^n as a membership table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    space: Space,
    bits: Vec<bool>,
}

impl PointSet {
    pub fn empty(space: Space) -> Self {
        let bits = vec![false; space.size()];
        PointSet { space, bits }
    }

    pub fn full(space: Space) -> Self {
        let bits = vec![true; space.size()];
        PointSet { space, bits }
    }

    pub fn from_bits(space: Space, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != space.size() {
            return Err(Error::LengthMismatch(bits.len(), space.size()));
        }
        Ok(PointSet { space, bits })
    }

    pub fn from_indices(space: Space, indices: &[usize]) -> Result<Self> {
        let mut set = PointSet::empty(space);
        for &i in indices {
            if i >= set.bits.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    size: set.bits.len(),
                });
            }
            set.bits[i] = true;
        }
        Ok(set)
    }

    /// Bit `i` of `mask` is the membership of index `i`.
    pub fn from_mask(space: Space, mask: u128) -> Result<Self> {
        let size = space.size();
        if size < 128 && mask >> size != 0 {
            return Err(Error::IndexOutOfRange {
                index: 127 - mask.leading_zeros() as usize,
                size,
            });
        }
        let bits = (0..size).map(|i| i < 128 && (mask >> i) & 1 == 1).collect();
        Ok(PointSet { space, bits })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn contains(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn insert(&mut self, index: usize) {
        self.bits[index] = true;
    }

    pub fn remove(&mut self, index: usize) {
        self.bits[index] = false;
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&i| self.bits[i]).collect()
    }

    pub fn complement(&self) -> Self {
        PointSet {
            space: self.space.clone(),
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Mask with bit `i` set iff index `i` is a member; `None` past 128 cells.
    pub fn mask(&self) -> Option<u128> {
        (self.bits.len() <= 128).then(|| bits_to_mask(&self.bits))
    }

    /// Hex bitmask, little-endian index order: `{1,2,4}` is `0x16`.
    pub fn to_hex(&self) -> String {
        bits_to_hex(&self.bits)
    }

    pub fn from_hex(space: Space, hex: &str) -> Result<Self> {
        let bits = hex_to_bits(hex, space.size())?;
        Ok(PointSet { space, bits })
    }
}

/// A two-coloring of GF(q)^n; a set bit means color 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoColoring {
    space: Space,
    color: Vec<bool>,
}

impl TwoColoring {
    pub fn from_bits(space: Space, color: Vec<bool>) -> Result<Self> {
        if color.len() != space.size() {
            return Err(Error::LengthMismatch(color.len(), space.size()));
        }
        Ok(TwoColoring { space, color })
    }

    /// The coloring whose color-1 class is `set`.
    pub fn from_class(set: &PointSet) -> Self {
        TwoColoring {
            space: set.space().clone(),
            color: set.bits().to_vec(),
        }
    }

    pub fn monochrome(space: Space) -> Self {
        let color = vec![false; space.size()];
        TwoColoring { space, color }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn color(&self, index: usize) -> bool {
        self.color[index]
    }

    pub fn bits(&self) -> &[bool] {
        &self.color
    }

    /// The set of cells with the given color.
    pub fn class(&self, color: bool) -> PointSet {
        PointSet {
            space: self.space.clone(),
            bits: self.color.iter().map(|&c| c == color).collect(),
        }
    }

    pub fn complement(&self) -> Self {
        TwoColoring {
            space: self.space.clone(),
            color: self.color.iter().map(|c| !c).collect(),
        }
    }

    pub fn mask(&self) -> Option<u128> {
        (self.color.len() <= 128).then(|| bits_to_mask(&self.color))
    }

    pub fn to_hex(&self) -> String {
        bits_to_hex(&self.color)
    }

    pub fn from_hex(space: Space, hex: &str) -> Result<Self> {
        let color = hex_to_bits(hex, space.size())?;
        Ok(TwoColoring { space, color })
    }
}

fn bits_to_mask(bits: &[bool]) -> u128 {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0u128, |acc, (i, _)| acc | 1 << i)
}

pub(crate) fn bits_to_hex(bits: &[bool]) -> String {
    let digits: Vec<char> = bits
        .chunks(4)
        .map(|nibble| {
            let v = nibble
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &b)| acc | (u32::from(b) << i));
            char::from_digit(v, 16).unwrap()
        })
        .collect();
    let trimmed: String = digits.iter().rev().skip_while(|&&c| c == '0').collect();
    if trimmed.is_empty() {
        "0x0".to_string()
    } else {
        format!("0x{trimmed}")
    }
}

pub(crate) fn hex_to_bits(hex: &str, size: usize) -> Result<Vec<bool>> {
    let body = hex
        .trim()
        .strip_prefix("0x")
        .or_else(|| hex.trim().strip_prefix("0X"))
        .ok_or_else(|| Error::parse(0, "hex bitmask must start with 0x"))?;
    let mut bits = vec![false; size];
    for (j, ch) in body.chars().rev().enumerate() {
        let v = ch
            .to_digit(16)
            .ok_or_else(|| Error::parse(2 + body.len() - 1 - j, format!("bad hex digit {ch:?}")))?;
        for b in 0..4 {
            if (v >> b) & 1 == 1 {
                let index = 4 * j + b;
                if index >= size {
                    return Err(Error::IndexOutOfRange { index, size });
                }
                bits[index] = true;
            }
        }
    }
    Ok(bits)
}

fn check_set(eq: &LinearEquation, space: &Space, b: usize) -> Result<()> {
    check_rhs(eq, space, b)
}

/// Work estimate shared by the enumerators: `q^{n(k-1)}`.
fn enumeration_work(eq: &LinearEquation, space: &Space) -> u128 {
    saturating_pow(space.size() as u128, eq.k() - 1)
}

/// Enumerates `x_1..x_{k-1}` over `domain` and solves for `x_k`.
struct Enumerator<'a> {
    space: &'a Space,
    maps: Vec<Vec<usize>>,
    solve: Vec<usize>,
    b: usize,
}

impl<'a> Enumerator<'a> {
    fn new(eq: &LinearEquation, space: &'a Space, b: usize) -> Result<Self> {
        let k = eq.k();
        let field = space.field();
        let maps = eq.coeffs()[..k - 1]
            .iter()
            .map(|&a| space.scale_map(a))
            .collect();
        let last_inv = field.inv(eq.coeffs()[k - 1])?;
        Ok(Enumerator {
            space,
            maps,
            solve: space.scale_map(last_inv),
            b,
        })
    }

    fn last(&self, partial: usize) -> usize {
        self.solve[self.space.sub(self.b, partial)]
    }

    fn count(&self, members: &[usize], inside: &[bool]) -> u64 {
        if self.maps.is_empty() {
            return u64::from(inside[self.last(0)]);
        }
        members
            .par_iter()
            .map(|&x| self.count_from(1, self.maps[0][x], members, inside))
            .sum()
    }

    fn count_from(&self, depth: usize, partial: usize, members: &[usize], inside: &[bool]) -> u64 {
        if depth == self.maps.len() {
            return u64::from(inside[self.last(partial)]);
        }
        let map = &self.maps[depth];
        members
            .iter()
            .map(|&x| self.count_from(depth + 1, self.space.add(partial, map[x]), members, inside))
            .sum()
    }

    fn count_distinct(&self, members: &[usize], inside: &[bool]) -> u64 {
        let mut chosen = Vec::with_capacity(self.maps.len() + 1);
        self.distinct_from(0, 0, members, inside, &mut chosen)
    }

    fn distinct_from(
        &self,
        depth: usize,
        partial: usize,
        members: &[usize],
        inside: &[bool],
        chosen: &mut Vec<usize>,
    ) -> u64 {
        if depth == self.maps.len() {
            let x = self.last(partial);
            return u64::from(inside[x] && !chosen.contains(&x));
        }
        let mut total = 0;
        for &x in members {
            if chosen.contains(&x) {
                continue;
            }
            chosen.push(x);
            total += self.distinct_from(
                depth + 1,
                self.space.add(partial, self.maps[depth][x]),
                members,
                inside,
                chosen,
            );
            chosen.pop();
        }
        total
    }

    fn lambda_sum(&self, f: &[Complex64]) -> Complex64 {
        if self.maps.is_empty() {
            return f[self.last(0)];
        }
        (0..self.space.size())
            .into_par_iter()
            .map(|x| self.lambda_from(1, self.maps[0][x], f[x], f))
            .sum()
    }

    fn lambda_from(
        &self,
        depth: usize,
        partial: usize,
        prod: Complex64,
        f: &[Complex64],
    ) -> Complex64 {
        if depth == self.maps.len() {
            return prod * f[self.last(partial)];
        }
        let map = &self.maps[depth];
        (0..self.space.size())
            .map(|x| {
                let v = f[x];
                if v == Complex64::new(0.0, 0.0) {
                    v
                } else {
                    self.lambda_from(depth + 1, self.space.add(partial, map[x]), prod * v, f)
                }
            })
            .sum()
    }
}

/// Number of tuples in `A^{k+ℓ}` solving `L = b`.
pub fn count_solutions_in_set(
    eq: &LinearEquation,
    b: usize,
    set: &PointSet,
    budget: Budget,
) -> Result<BigUint> {
    check_set(eq, set.space(), b)?;
    budget.check(enumeration_work(eq, set.space()))?;
    let members = set.members();
    let core = Enumerator::new(eq, set.space(), b)?.count(&members, set.bits());
    let free = BigUint::from(members.len()).pow(eq.free_count() as u32);
    Ok(BigUint::from(core) * free)
}

/// Like [`count_solutions_in_set`] but only tuples whose `k+ℓ` coordinates are
/// pairwise distinct.
pub fn count_distinct_solutions_in_set(
    eq: &LinearEquation,
    b: usize,
    set: &PointSet,
    budget: Budget,
) -> Result<BigUint> {
    check_set(eq, set.space(), b)?;
    budget.check(enumeration_work(eq, set.space()))?;
    let members = set.members();
    let core = Enumerator::new(eq, set.space(), b)?.count_distinct(&members, set.bits());
    // free variables pick an ordered selection of the remaining members
    let mut free = BigUint::one();
    for j in 0..eq.free_count() {
        let left = members.len() as i64 - eq.k() as i64 - j as i64;
        if left <= 0 {
            return Ok(BigUint::zero());
        }
        free *= BigUint::from(left as u64);
    }
    Ok(BigUint::from(core) * free)
}

/// Solutions with all coordinates in one color class, summed over both classes.
pub fn monochromatic_count(
    eq: &LinearEquation,
    b: usize,
    coloring: &TwoColoring,
    budget: Budget,
) -> Result<BigUint> {
    let zero = count_solutions_in_set(eq, b, &coloring.class(false), budget)?;
    let one = count_solutions_in_set(eq, b, &coloring.class(true), budget)?;
    Ok(zero + one)
}

/// Total number of solutions of `L = b` in `(GF(q)^n)^{k+ℓ}`: `q^{n(k+ℓ-1)}`.
pub fn solution_space_size(eq: &LinearEquation, space: &Space) -> BigUint {
    BigUint::from(space.size()).pow(eq.total_vars() as u32 - 1)
}

/// `Λ_{L=b}(1_A)` as an exact rational.
pub fn solution_density(
    eq: &LinearEquation,
    b: usize,
    set: &PointSet,
    budget: Budget,
) -> Result<BigRational> {
    let count = count_solutions_in_set(eq, b, set, budget)?;
    Ok(BigRational::new(
        count.into(),
        solution_space_size(eq, set.space()).into(),
    ))
}

/// Average of `f(x_1)···f(x_{k+ℓ})` over solutions of `L = b`, by enumeration.
pub fn lambda_bruteforce(
    eq: &LinearEquation,
    b: usize,
    f: &GroupFunction,
    budget: Budget,
) -> Result<Complex64> {
    let space = f.space();
    check_set(eq, space, b)?;
    budget.check(enumeration_work(eq, space))?;
    let sum = Enumerator::new(eq, space, b)?.lambda_sum(f.values());
    let solutions = (space.size() as f64).powi(eq.k() as i32 - 1);
    Ok(sum / solutions * f.mean().powi(eq.free_count() as i32))
}

/// `q^n · #solutions ≥ |A|^{k+ℓ}`, decided in exact integers.
pub fn sidorenko_holds_exact(
    eq: &LinearEquation,
    b: usize,
    set: &PointSet,
    budget: Budget,
) -> Result<bool> {
    let count = count_solutions_in_set(eq, b, set, budget)?;
    let lhs = BigUint::from(set.space().size()) * count;
    let rhs = BigUint::from(set.len()).pow(eq.total_vars() as u32);
    Ok(lhs >= rhs)
}

/// `2^{K-1} · #monochromatic ≥ q^{n(K-1)}` with `K = k+ℓ`, in exact integers.
pub fn common_holds_exact(
    eq: &LinearEquation,
    b: usize,
    coloring: &TwoColoring,
    budget: Budget,
) -> Result<bool> {
    let mono = monochromatic_count(eq, b, coloring, budget)?;
    let lhs = (BigUint::one() << (eq.total_vars() - 1)) * mono;
    Ok(lhs >= solution_space_size(eq, coloring.space()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::linear::RhsMode;

    fn setup(q: u64, n: usize, coeffs: &[u32]) -> (Space, LinearEquation) {
        let field = Field::of_order(q).unwrap();
        let eq = LinearEquation::from_codes(&field, coeffs, RhsMode::Zero).unwrap();
        (Space::new(field, n).unwrap(), eq)
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn three_ap_counts_over_f5() {
        let (s, eq) = setup(5, 1, &[1, 3, 1]);
        let budget = Budget::default();
        let nonzero = PointSet::from_indices(s.clone(), &[1, 2, 3, 4]).unwrap();
        assert_eq!(
            count_solutions_in_set(&eq, 0, &nonzero, budget).unwrap(),
            big(12)
        );
        let a = PointSet::from_indices(s.clone(), &[1, 2, 4]).unwrap();
        assert_eq!(count_solutions_in_set(&eq, 0, &a, budget).unwrap(), big(5));
        assert!(!sidorenko_holds_exact(&eq, 0, &a, budget).unwrap());
        assert_eq!(
            count_solutions_in_set(&eq, 0, &PointSet::empty(s.clone()), budget).unwrap(),
            big(0)
        );
        assert_eq!(
            count_solutions_in_set(&eq, 0, &PointSet::full(s), budget).unwrap(),
            big(25)
        );
    }

    #[test]
    fn full_set_counts_fiber_size() {
        let (s, eq) = setup(3, 2, &[1, 2, 2]);
        let eq = eq.with_free_count(1);
        let count = count_solutions_in_set(&eq, 0, &PointSet::full(s), Budget::default()).unwrap();
        assert_eq!(count, big(9u64.pow(3)));
    }

    #[test]
    fn monochromatic_examples() {
        let (s, eq) = setup(3, 1, &[1, 1, 1]);
        let budget = Budget::default();
        let chi = TwoColoring::from_bits(s.clone(), vec![false, true, true]).unwrap();
        assert_eq!(monochromatic_count(&eq, 0, &chi, budget).unwrap(), big(3));
        assert!(common_holds_exact(&eq, 0, &chi, budget).unwrap());
        let chi = TwoColoring::from_bits(s.clone(), vec![true, false, true]).unwrap();
        assert_eq!(monochromatic_count(&eq, 0, &chi, budget).unwrap(), big(3));
        let mono = TwoColoring::monochrome(s);
        assert_eq!(monochromatic_count(&eq, 0, &mono, budget).unwrap(), big(9));
        assert!(common_holds_exact(&eq, 0, &mono, budget).unwrap());
    }

    #[test]
    fn inhomogeneous_parity_coloring() {
        let f2 = Field::prime(2).unwrap();
        let eq = LinearEquation::from_codes(&f2, &[1, 1], RhsMode::NonzeroB).unwrap();
        let s = Space::new(f2, 1).unwrap();
        let chi = TwoColoring::from_bits(s, vec![false, true]).unwrap();
        assert_eq!(
            monochromatic_count(&eq, 1, &chi, Budget::default()).unwrap(),
            big(0)
        );
        assert!(!common_holds_exact(&eq, 1, &chi, Budget::default()).unwrap());
    }

    #[test]
    fn lambda_examples() {
        let (s, eq) = setup(5, 1, &[1, 3, 1]);
        let budget = Budget::default();
        let f = GroupFunction::constant(s.clone(), 0.4);
        let v = lambda_bruteforce(&eq.with_free_count(2), 0, &f, budget).unwrap();
        assert!((v.re - 0.4f64.powi(5)).abs() < 1e-15 && v.im.abs() < 1e-15);

        let nonzero = PointSet::from_indices(s.clone(), &[1, 2, 3, 4]).unwrap();
        let v = lambda_bruteforce(&eq, 0, &GroupFunction::indicator(&nonzero), budget).unwrap();
        assert!((v.re - 0.48).abs() < 1e-15);

        let a = PointSet::from_indices(s, &[1, 2, 4]).unwrap();
        let v = lambda_bruteforce(&eq, 0, &GroupFunction::indicator(&a), budget).unwrap();
        assert!((v.re - 0.2).abs() < 1e-15);
    }

    #[test]
    fn exact_density_is_rational() {
        let (s, eq) = setup(5, 1, &[1, 3, 1]);
        let nonzero = PointSet::from_indices(s, &[1, 2, 3, 4]).unwrap();
        let d = solution_density(&eq, 0, &nonzero, Budget::default()).unwrap();
        assert_eq!(d, BigRational::new(12.into(), 25.into()));
    }

    #[test]
    fn distinct_coordinates_flag() {
        let (s, eq) = setup(5, 1, &[1, 3, 1]);
        let budget = Budget::default();
        // 3-APs with nonzero common difference in F_5: 5 · 4
        let full = PointSet::full(s.clone());
        assert_eq!(
            count_distinct_solutions_in_set(&eq, 0, &full, budget).unwrap(),
            big(20)
        );
        let eq1 = eq.with_free_count(1);
        assert_eq!(
            count_distinct_solutions_in_set(&eq1, 0, &full, budget).unwrap(),
            big(40)
        );
        let small = PointSet::from_indices(s, &[0, 1, 2]).unwrap();
        assert_eq!(
            count_distinct_solutions_in_set(&eq1, 0, &small, budget).unwrap(),
            big(0)
        );
    }

    #[test]
    fn hex_masks() {
        let (s, _) = setup(5, 1, &[1]);
        let a = PointSet::from_indices(s.clone(), &[1, 2, 4]).unwrap();
        assert_eq!(a.to_hex(), "0x16");
        assert_eq!(PointSet::from_hex(s.clone(), "0x16").unwrap(), a);
        assert_eq!(PointSet::empty(s.clone()).to_hex(), "0x0");
        assert!(PointSet::from_hex(s.clone(), "0x20").is_err());
        assert!(PointSet::from_hex(s, "16").is_err());
    }

    #[test]
    fn budget_and_rhs_checks() {
        let (s, eq) = setup(5, 2, &[1, 1, 1, 1]);
        let full = PointSet::full(s);
        assert!(matches!(
            count_solutions_in_set(&eq, 0, &full, Budget::new(1000)),
            Err(Error::BudgetExceeded { .. })
        ));
        assert_eq!(
            count_solutions_in_set(&eq, 3, &full, Budget::default()).unwrap_err(),
            Error::RhsMismatch
        );
    }
}
