//! Fourier analysis on GF(q)^n and spectral evaluation of solution densities.
//!
//! Conventions: `f̂(y) = E_x f(x)·conj(γ_y(x))` (an average) and
//! `f(x) = Σ_y f̂(y)·γ_y(x)` (a sum). The transform is computed as `n`
//! passes of the `q × q` character kernel, one per coordinate axis.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::budget::Budget;
use crate::counting::PointSet;
use crate::error::{Error, Result};
use crate::field::Space;
use crate::linear::LinearEquation;

/// Imaginary residue tolerated before a real result is declared inconsistent.
pub const IMAG_TOLERANCE: f64 = 1e-9;

/// Slack allowed when checking that a function takes values in `[0, 1]`.
pub const RANGE_TOLERANCE: f64 = 1e-9;

/// A complex-valued function on GF(q)^n, indexed by vector index.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFunction {
    space: Space,
    values: Vec<Complex64>,
}

impl GroupFunction {
    pub fn new(space: Space, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::LengthMismatch(values.len(), space.size()));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::NumericalInconsistency(format!(
                "non-finite value at index {i}"
            )));
        }
        Ok(GroupFunction { space, values })
    }

    pub fn from_real(space: Space, values: &[f64]) -> Result<Self> {
        Self::new(
            space,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn constant(space: Space, c: f64) -> Self {
        let values = vec![Complex64::new(c, 0.0); space.size()];
        GroupFunction { space, values }
    }

    pub fn indicator(set: &PointSet) -> Self {
        let values = (0..set.space().size())
            .map(|i| Complex64::new(if set.contains(i) { 1.0 } else { 0.0 }, 0.0))
            .collect();
        GroupFunction {
            space: set.space().clone(),
            values,
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, index: usize) -> Complex64 {
        self.values[index]
    }

    /// `1 - f`.
    pub fn complement(&self) -> Self {
        GroupFunction {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(1.0, 0.0) - v)
                .collect(),
        }
    }

    /// `x ↦ f(x + t)`.
    pub fn translate(&self, t: usize) -> Self {
        let values = (0..self.space.size())
            .map(|x| self.values[self.space.add(x, t)])
            .collect();
        GroupFunction {
            space: self.space.clone(),
            values,
        }
    }

    /// `E f`.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.space.size() as f64
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() <= tol)
    }

    /// Checks that `f` is real with values in `[0, 1]` up to `tol`.
    pub fn check_unit_range(&self, tol: f64) -> Result<()> {
        for (index, v) in self.values.iter().enumerate() {
            if v.im.abs() > tol || v.re < -tol || v.re > 1.0 + tol {
                return Err(Error::NotRealRange {
                    index,
                    value: format!("{v}"),
                });
            }
        }
        Ok(())
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

/// Fourier coefficients indexed by the dual label `y` of `γ_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    space: Space,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(space: Space, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::LengthMismatch(values.len(), space.size()));
        }
        Ok(Spectrum { space, values })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn coefficient(&self, y: usize) -> Complex64 {
        self.values[y]
    }
}

fn check_transform_budget(space: &Space, budget: Budget) -> Result<()> {
    let work = space.dim() as u128 * space.size() as u128 * space.field().q() as u128;
    budget.check(work)
}

/// `kernel[y·q + x] = γ_y(x)` on GF(q), conjugated for the forward direction.
fn axis_kernel(space: &Space, conjugate: bool) -> Vec<Complex64> {
    let field = space.field();
    let q = field.q();
    let p = field.p();
    let mut kernel = Vec::with_capacity((q * q) as usize);
    for y in 0..q {
        for x in 0..q {
            let e = field.trace(field.mul(y, x));
            let e = if conjugate { (p - e) % p } else { e };
            kernel.push(field.root_of_unity(e));
        }
    }
    kernel
}

fn tensor_transform(
    space: &Space,
    input: &[Complex64],
    conjugate: bool,
    scale: f64,
) -> Vec<Complex64> {
    let q = space.field().q() as usize;
    let kernel = axis_kernel(space, conjugate);
    let mut data = input.to_vec();
    let mut stride = 1;
    for _ in 0..space.dim() {
        let block = stride * q;
        data.par_chunks_mut(block).for_each(|chunk| {
            let mut column = vec![Complex64::new(0.0, 0.0); q];
            for offset in 0..stride {
                for (x, slot) in column.iter_mut().enumerate() {
                    *slot = chunk[offset + x * stride];
                }
                for y in 0..q {
                    let row = &kernel[y * q..(y + 1) * q];
                    let acc: Complex64 = row.iter().zip(&column).map(|(k, v)| k * v).sum();
                    chunk[offset + y * stride] = acc * scale;
                }
            }
        });
        stride = block;
    }
    data
}

/// `f̂(y) = q^{-n} Σ_x f(x)·conj(γ_y(x))`.
pub fn transform(f: &GroupFunction, budget: Budget) -> Result<Spectrum> {
    check_transform_budget(&f.space, budget)?;
    let q = f.space.field().q() as f64;
    let values = tensor_transform(&f.space, &f.values, true, 1.0 / q);
    Ok(Spectrum {
        space: f.space.clone(),
        values,
    })
}

/// `f(x) = Σ_y S(y)·γ_y(x)`.
pub fn inverse(spectrum: &Spectrum, budget: Budget) -> Result<GroupFunction> {
    check_transform_budget(&spectrum.space, budget)?;
    let values = tensor_transform(&spectrum.space, &spectrum.values, false, 1.0);
    Ok(GroupFunction {
        space: spectrum.space.clone(),
        values,
    })
}

pub(crate) fn check_rhs(eq: &LinearEquation, space: &Space, b: usize) -> Result<()> {
    if space.field() != eq.field() {
        return Err(Error::FieldMismatch);
    }
    if b >= space.size() {
        return Err(Error::IndexOutOfRange {
            index: b,
            size: space.size(),
        });
    }
    if eq.is_homogeneous() != (b == 0) {
        return Err(Error::RhsMismatch);
    }
    Ok(())
}

/// Distinct coefficients with multiplicities, each with its scale map.
fn grouped_scale_maps(eq: &LinearEquation, space: &Space) -> Vec<(Vec<usize>, i32)> {
    let mut groups: Vec<(u32, i32)> = Vec::new();
    for &a in eq.coeffs() {
        match groups.iter_mut().find(|(c, _)| *c == a) {
            Some((_, m)) => *m += 1,
            None => groups.push((a, 1)),
        }
    }
    groups
        .into_iter()
        .map(|(a, m)| (space.scale_map(a), m))
        .collect()
}

/// `Σ_y Π_i S(a_i y)·γ_y(b)`, over all `y` or over `y ≠ 0`.
fn twisted_sum(
    eq: &LinearEquation,
    spectrum: &Spectrum,
    b: usize,
    include_zero: bool,
) -> Complex64 {
    let space = &spectrum.space;
    let maps = grouped_scale_maps(eq, space);
    let start = usize::from(!include_zero);
    let total: Complex64 = (start..space.size())
        .into_par_iter()
        .map(|y| {
            let mut term = Complex64::new(1.0, 0.0);
            for (map, mult) in &maps {
                term *= spectrum.values[map[y]].powi(*mult);
            }
            if b != 0 {
                term *= space.character(y, b);
            }
            term
        })
        .sum();
    total
}

/// `Λ_{L=b}` from a precomputed spectrum: `f̂(0)^ℓ Σ_y Π f̂(a_i y)·γ_y(b)`.
pub fn lambda_from_spectrum(
    eq: &LinearEquation,
    b: usize,
    spectrum: &Spectrum,
) -> Result<Complex64> {
    check_rhs(eq, &spectrum.space, b)?;
    let core = twisted_sum(eq, spectrum, b, true);
    Ok(core * spectrum.values[0].powi(eq.free_count() as i32))
}

/// `Λ_{L=b}(f)` computed spectrally.
pub fn lambda_spectral(
    eq: &LinearEquation,
    b: usize,
    f: &GroupFunction,
    budget: Budget,
) -> Result<Complex64> {
    check_rhs(eq, &f.space, b)?;
    let spectrum = transform(f, budget)?;
    lambda_from_spectrum(eq, b, &spectrum)
}

/// `Λ(f) + Λ(1-f)` from the spectrum of a real `f`, using `(1-f)^(0) = 1 - E f`
/// and `(1-f)^(y) = -f̂(y)` for `y ≠ 0`.
pub fn commonness_from_spectrum(eq: &LinearEquation, b: usize, spectrum: &Spectrum) -> Result<f64> {
    check_rhs(eq, &spectrum.space, b)?;
    let mean = spectrum.values[0];
    let rest = Complex64::new(1.0, 0.0) - mean;
    let k = eq.k() as i32;
    let tail = twisted_sum(eq, spectrum, b, false);
    let lambda_f = mean.powi(k) + tail;
    let lambda_g = rest.powi(k) + if k % 2 == 0 { tail } else { -tail };
    let l = eq.free_count() as i32;
    let value = mean.powi(l) * lambda_f + rest.powi(l) * lambda_g;
    if value.im.abs() > IMAG_TOLERANCE {
        return Err(Error::NumericalInconsistency(format!(
            "commonness functional has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// `Λ(f) + Λ(1-f)` for a real `f: GF(q)^n → [0, 1]`, free variables weighted
/// as `(E f)^ℓ Λ(f) + (1 - E f)^ℓ Λ(1 - f)`.
pub fn commonness_functional(
    eq: &LinearEquation,
    b: usize,
    f: &GroupFunction,
    budget: Budget,
) -> Result<f64> {
    check_rhs(eq, &f.space, b)?;
    f.check_unit_range(RANGE_TOLERANCE)?;
    let spectrum = transform(f, budget)?;
    commonness_from_spectrum(eq, b, &spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn space(q: u64, n: usize) -> Space {
        Space::new(Field::of_order(q).unwrap(), n).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn transform_of_point_mass_is_flat() {
        let s = space(3, 1);
        let f = GroupFunction::from_real(s, &[1.0, 0.0, 0.0]).unwrap();
        let spec = transform(&f, Budget::default()).unwrap();
        for v in spec.values() {
            assert!(close(*v, Complex64::new(1.0 / 3.0, 0.0), 1e-15));
        }
    }

    #[test]
    fn transform_of_constant_is_delta() {
        let s = space(4, 2);
        let spec = transform(&GroupFunction::constant(s, 1.0), Budget::default()).unwrap();
        assert!(close(spec.coefficient(0), Complex64::new(1.0, 0.0), 1e-14));
        assert!(spec.values()[1..].iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn inverse_of_flat_nonzero_spectrum() {
        // S = 1/2 at 0, -1/10 elsewhere over F_5
        let s = space(5, 1);
        let mut values = vec![Complex64::new(-0.1, 0.0); 5];
        values[0] = Complex64::new(0.5, 0.0);
        let f = inverse(&Spectrum::new(s, values).unwrap(), Budget::default()).unwrap();
        assert!(close(f.value(0), Complex64::new(0.1, 0.0), 1e-14));
        for x in 1..5 {
            assert!(close(f.value(x), Complex64::new(0.6, 0.0), 1e-14));
        }
    }

    #[test]
    fn delta_spectrum_inverts_to_one() {
        let s = space(9, 1);
        let mut values = vec![Complex64::new(0.0, 0.0); 9];
        values[0] = Complex64::new(1.0, 0.0);
        let f = inverse(&Spectrum::new(s, values).unwrap(), Budget::default()).unwrap();
        assert!(f
            .values()
            .iter()
            .all(|v| close(*v, Complex64::new(1.0, 0.0), 1e-14)));
    }

    #[test]
    fn lambda_of_constant() {
        let s = space(5, 1);
        let eq = LinearEquation::from_codes(s.field(), &[1, 3, 1], crate::RhsMode::Zero)
            .unwrap()
            .with_free_count(1);
        let f = GroupFunction::constant(s, 0.3);
        let v = lambda_spectral(&eq, 0, &f, Budget::default()).unwrap();
        assert!(close(v, Complex64::new(0.3f64.powi(4), 0.0), 1e-14));
    }

    #[test]
    fn commonness_at_half() {
        let s = space(5, 1);
        let eq =
            LinearEquation::from_codes(s.field(), &[1, 2, 3, 4], crate::RhsMode::Zero).unwrap();
        let f = GroupFunction::constant(s, 0.5);
        let v = commonness_functional(&eq, 0, &f, Budget::default()).unwrap();
        assert!((v - 2.0 * 0.5f64.powi(4)).abs() < 1e-14);
    }

    #[test]
    fn commonness_rejects_out_of_range() {
        let s = space(3, 1);
        let eq = LinearEquation::from_codes(s.field(), &[1, 1], crate::RhsMode::Zero).unwrap();
        let f = GroupFunction::from_real(s, &[0.5, 1.5, 0.0]).unwrap();
        assert!(matches!(
            commonness_functional(&eq, 0, &f, Budget::default()),
            Err(Error::NotRealRange { index: 1, .. })
        ));
    }

    #[test]
    fn rhs_mode_is_checked() {
        let s = space(3, 1);
        let eq = LinearEquation::from_codes(s.field(), &[1, 1], crate::RhsMode::Zero).unwrap();
        let f = GroupFunction::constant(s, 0.5);
        assert_eq!(
            lambda_spectral(&eq, 1, &f, Budget::default()).unwrap_err(),
            Error::RhsMismatch
        );
    }

    #[test]
    fn budget_is_enforced() {
        let s = space(5, 2);
        let f = GroupFunction::constant(s, 0.5);
        assert!(matches!(
            transform(&f, Budget::new(10)),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
