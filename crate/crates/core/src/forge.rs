//! Explicit counterexample functions on GF(q) with re-verifiable certificates.
//!
//! Each forge designs a spectrum, inverts it to a witness `f: GF(q) → [0, 1]`
//! and evaluates the violated functional. A [`Certificate`] carries enough to
//! recompute everything from scratch via [`verify_certificate`].

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::counting::{count_solutions_in_set, lambda_bruteforce, solution_space_size, PointSet};
use crate::error::{Error, Result};
use crate::field::Space;
use crate::fourier::{
    commonness_from_spectrum, commonness_functional, inverse, lambda_spectral, GroupFunction,
    Spectrum,
};
use crate::linear::{canceling_pair_partition, LinearEquation};
use crate::notation::parse_equation_spec;

/// Margin demanded of sampled witnesses.
pub const SAMPLED_MARGIN_FLOOR: f64 = 1e-6;

/// Margin demanded of the deterministic small-`c` witnesses.
pub const DETERMINISTIC_MARGIN_FLOOR: f64 = 1e-9;

/// Agreement demanded between stored and recomputed values.
pub const VALUE_TOLERANCE: f64 = 1e-9;

/// Slack allowed on witness reality and range.
pub const WITNESS_TOLERANCE: f64 = 1e-12;

/// Number of times `c` is halved before giving up.
pub const C_HALVINGS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionalKind {
    /// `Λ(f)` against `(E f)^{k+ℓ}`.
    Sidorenko,
    /// `Λ(f) + Λ(1-f)` against `2^{1-k-ℓ}`.
    Common,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForgeParameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tries: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Unit phases indexed by frequency; entry 0 is unused and set to 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<Complex64>>,
}

/// A set `A` with `Λ(1_A) < (|A|/q)^k`, in exact rationals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetWitness {
    pub members: Vec<usize>,
    pub count: String,
    pub lambda: String,
    pub threshold: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub equation: LinearEquation,
    /// Index of the right-hand side `b` in GF(q).
    pub rhs: usize,
    pub witness: GroupFunction,
    pub kind: FunctionalKind,
    pub value: f64,
    pub threshold: f64,
    pub margin: f64,
    pub parameters: ForgeParameters,
    pub set_witness: Option<SetWitness>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateDoc {
    equation: String,
    rhs: usize,
    kind: FunctionalKind,
    witness: Vec<Complex64>,
    value: f64,
    threshold: f64,
    margin: f64,
    parameters: ForgeParameters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    set_witness: Option<SetWitness>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("certificate serializes")
    }

    pub fn to_value(&self) -> serde_json::Value {
        let doc = CertificateDoc {
            equation: self.equation.to_spec(),
            rhs: self.rhs,
            kind: self.kind,
            witness: self.witness.values().to_vec(),
            value: self.value,
            threshold: self.threshold,
            margin: self.margin,
            parameters: self.parameters.clone(),
            set_witness: self.set_witness.clone(),
        };
        serde_json::to_value(doc).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CertificateDoc =
            serde_json::from_str(text).map_err(|e| Error::parse(e.column(), e.to_string()))?;
        let equation = parse_equation_spec(&doc.equation)?;
        let space = Space::new(equation.field().clone(), 1)?;
        Ok(Certificate {
            witness: GroupFunction::new(space, doc.witness)?,
            equation,
            rhs: doc.rhs,
            kind: doc.kind,
            value: doc.value,
            threshold: doc.threshold,
            margin: doc.margin,
            parameters: doc.parameters,
            set_witness: doc.set_witness,
        })
    }
}

fn line(eq: &LinearEquation) -> Result<Space> {
    Space::new(eq.field().clone(), 1)
}

/// Inverts a designed spectrum and drops the rounding residue in the
/// imaginary parts.
fn witness_from_spectrum(spectrum: &Spectrum) -> Result<GroupFunction> {
    let f = inverse(spectrum, Budget::unlimited())?;
    if !f.is_real(WITNESS_TOLERANCE) {
        return Err(Error::NumericalInconsistency(
            "designed witness is not real".into(),
        ));
    }
    GroupFunction::from_real(f.space().clone(), &f.real_parts())
}

fn common_threshold(eq: &LinearEquation) -> f64 {
    0.5f64.powi(eq.total_vars() as i32 - 1)
}

fn common_certificate(
    eq: &LinearEquation,
    b: usize,
    witness: GroupFunction,
    parameters: ForgeParameters,
) -> Result<Certificate> {
    let value = commonness_functional(eq, b, &witness, Budget::unlimited())?;
    let threshold = common_threshold(eq);
    Ok(Certificate {
        equation: eq.clone(),
        rhs: b,
        witness,
        kind: FunctionalKind::Common,
        value,
        threshold,
        margin: threshold - value,
        parameters,
        set_witness: None,
    })
}

/// Draws `ξ` with `ξ_{-r} = conj(ξ_r)`; in characteristic 2 every `ξ_r = ±1`.
pub fn sample_xi<R: Rng>(space: &Space, rng: &mut R) -> Vec<Complex64> {
    let q = space.size();
    let mut xi = vec![Complex64::new(1.0, 0.0); q];
    for r in 1..q {
        let minus = space.neg(r);
        if minus == r {
            xi[r] = Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0);
        } else if r < minus {
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            xi[r] = Complex64::from_polar(1.0, theta);
            xi[minus] = xi[r].conj();
        }
    }
    xi
}

/// `f̂(0) = 1/2`, `f̂(r) = ξ_r/(2q)`.
pub fn xi_spectrum(space: &Space, xi: &[Complex64]) -> Result<Spectrum> {
    let q = space.size() as f64;
    let mut values: Vec<Complex64> = xi.iter().map(|x| x / (2.0 * q)).collect();
    values[0] = Complex64::new(0.5, 0.0);
    Spectrum::new(space.clone(), values)
}

/// Commonness functional of one random `ξ` sample.
pub fn sample_commonness<R: Rng>(eq: &LinearEquation, rng: &mut R) -> Result<f64> {
    let space = line(eq)?;
    let xi = sample_xi(&space, rng);
    commonness_from_spectrum(eq, 0, &xi_spectrum(&space, &xi)?)
}

/// Random-phase witness that an unpairable even-arity equation is not common.
pub fn forge_uncommon_even(eq: &LinearEquation, seed: u64, max_tries: u64) -> Result<Certificate> {
    if !eq.is_homogeneous() {
        return Err(Error::NotApplicable("equation is inhomogeneous".into()));
    }
    if eq.k() % 2 == 1 {
        return Err(Error::NotApplicable("arity is odd".into()));
    }
    if canceling_pair_partition(eq.field(), eq.coeffs()).is_some() {
        return Err(Error::NotApplicable(
            "coefficients admit a canceling pairing".into(),
        ));
    }
    let space = line(eq)?;
    let target = common_threshold(eq) - SAMPLED_MARGIN_FLOOR;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=max_tries {
        let xi = sample_xi(&space, &mut rng);
        let spectrum = xi_spectrum(&space, &xi)?;
        if commonness_from_spectrum(eq, 0, &spectrum)? >= target {
            continue;
        }
        let witness = witness_from_spectrum(&spectrum)?;
        let parameters = ForgeParameters {
            seed: Some(seed),
            tries: Some(attempt),
            xi: Some(xi),
            ..Default::default()
        };
        let cert = common_certificate(eq, 0, witness, parameters)?;
        if cert.value < target {
            return Ok(cert);
        }
    }
    Err(Error::ExhaustedTries(max_tries))
}

/// Witness with `f̂(0) = 1/2`, `f̂(r ≠ 0) = -1/(2q)` violating the Sidorenko
/// inequality for odd arity, plus the set witness `A = GF(q) \ {0}`.
pub fn forge_nonsidorenko_odd(eq: &LinearEquation) -> Result<Certificate> {
    if !eq.is_homogeneous() || eq.free_count() != 0 {
        return Err(Error::NotApplicable(
            "needs a homogeneous equation without free variables".into(),
        ));
    }
    if eq.k().is_multiple_of(2) {
        return Err(Error::NotApplicable("arity is even".into()));
    }
    let space = line(eq)?;
    let q = space.size() as f64;
    let mut values = vec![Complex64::new(-1.0 / (2.0 * q), 0.0); space.size()];
    values[0] = Complex64::new(0.5, 0.0);
    let witness = witness_from_spectrum(&Spectrum::new(space.clone(), values)?)?;
    let value = lambda_spectral(eq, 0, &witness, Budget::unlimited())?.re;
    let threshold = witness.mean().re.powi(eq.k() as i32);

    let mut set = PointSet::full(space);
    set.remove(0);
    Ok(Certificate {
        equation: eq.clone(),
        rhs: 0,
        witness,
        kind: FunctionalKind::Sidorenko,
        value,
        threshold,
        margin: threshold - value,
        parameters: ForgeParameters {
            beta: Some(1.0 / (2.0 * q)),
            ..Default::default()
        },
        set_witness: Some(set_witness(eq, &set)?),
    })
}

fn set_witness(eq: &LinearEquation, set: &PointSet) -> Result<SetWitness> {
    let count = count_solutions_in_set(eq, 0, set, Budget::unlimited())?;
    let lambda = BigRational::new(
        count.clone().into(),
        solution_space_size(eq, set.space()).into(),
    );
    let density = BigRational::new(
        BigUint::from(set.len()).into(),
        BigUint::from(set.space().size()).into(),
    );
    let threshold = num_traits::pow(density, eq.total_vars());
    Ok(SetWitness {
        members: set.members(),
        count: count.to_string(),
        lambda: lambda.to_string(),
        threshold: threshold.to_string(),
    })
}

/// `f(0) = 1/2 + c - (q-1)β`, `f(x ≠ 0) = 1/2 + c + β`, halving `c` until the
/// commonness functional drops below its threshold.
fn small_c_witness(eq: &LinearEquation, b: usize, beta: f64, c: f64) -> Result<Certificate> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::NotApplicable(format!(
            "c must be a nonnegative number, got {c}"
        )));
    }
    let space = line(eq)?;
    let q = space.size() as f64;
    let mut c = c;
    for _ in 0..=C_HALVINGS {
        let low = 0.5 + c - (q - 1.0) * beta;
        let high = 0.5 + c + beta;
        let inside = low.min(high) >= 0.0 && low.max(high) <= 1.0;
        if inside && c > 0.0 {
            let mut values = vec![high; space.size()];
            values[0] = low;
            let witness = GroupFunction::from_real(space.clone(), &values)?;
            let parameters = ForgeParameters {
                c: Some(c),
                beta: Some(beta),
                ..Default::default()
            };
            let cert = common_certificate(eq, b, witness, parameters)?;
            if cert.margin > DETERMINISTIC_MARGIN_FLOOR {
                return Ok(cert);
            }
        }
        c /= 2.0;
    }
    Err(Error::CSearchFailed(C_HALVINGS))
}

/// Default perturbation size `1/(100q)`.
pub fn default_c(eq: &LinearEquation) -> f64 {
    1.0 / (100.0 * eq.field().q() as f64)
}

/// Witness that an odd-arity equation with free variables is not common.
pub fn forge_freevar_odd(eq: &LinearEquation, c: f64) -> Result<Certificate> {
    if !eq.is_homogeneous() {
        return Err(Error::NotApplicable("equation is inhomogeneous".into()));
    }
    if eq.k().is_multiple_of(2) || eq.free_count() == 0 {
        return Err(Error::NotApplicable(
            "needs odd arity and at least one free variable".into(),
        ));
    }
    let beta = 1.0 / (2.0 * eq.field().q() as f64);
    small_c_witness(eq, 0, beta, c)
}

/// Witness that `L = b`, `b = 1`, is not common: flat spectrum `1/(2q)` for
/// even arity, the small-`c` witness with `β = -1/(2q)` for odd arity with
/// free variables.
pub fn forge_inhom(eq: &LinearEquation, c: f64) -> Result<Certificate> {
    if eq.is_homogeneous() {
        return Err(Error::NotApplicable("equation is homogeneous".into()));
    }
    let space = line(eq)?;
    let b = space.unit();
    let q = space.size() as f64;
    if eq.k().is_multiple_of(2) {
        let mut values = vec![Complex64::new(1.0 / (2.0 * q), 0.0); space.size()];
        values[0] = Complex64::new(0.5, 0.0);
        let witness = witness_from_spectrum(&Spectrum::new(space, values)?)?;
        let parameters = ForgeParameters {
            beta: Some(-1.0 / (2.0 * q)),
            ..Default::default()
        };
        return common_certificate(eq, b, witness, parameters);
    }
    if eq.free_count() == 0 {
        return Err(Error::NotApplicable(
            "odd arity without free variables is inhomogeneous-common".into(),
        ));
    }
    small_c_witness(eq, b, -1.0 / (2.0 * q), c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub ok: bool,
    pub spectral: Option<f64>,
    pub brute: Option<f64>,
    pub diagnostics: Vec<String>,
}

/// Recomputes a certificate along the spectral and the enumeration paths.
pub fn verify_certificate(cert: &Certificate) -> Verification {
    let mut diagnostics = Vec::new();
    let eq = &cert.equation;
    let f = &cert.witness;
    let b = cert.rhs;

    if !f.is_real(WITNESS_TOLERANCE) {
        diagnostics.push("witness is not real".to_string());
    }
    let values = f.real_parts();
    if values
        .iter()
        .any(|&v| !(-WITNESS_TOLERANCE..=1.0 + WITNESS_TOLERANCE).contains(&v))
    {
        diagnostics.push("witness leaves [0, 1]".to_string());
    }

    let budget = Budget::from_env();
    let (spectral, brute) = match cert.kind {
        FunctionalKind::Common => (
            commonness_functional(eq, b, f, budget),
            lambda_bruteforce(eq, b, f, budget)
                .and_then(|x| Ok(x + lambda_bruteforce(eq, b, &f.complement(), budget)?))
                .map(|z| z.re),
        ),
        FunctionalKind::Sidorenko => (
            lambda_spectral(eq, b, f, budget).map(|z| z.re),
            lambda_bruteforce(eq, b, f, budget).map(|z| z.re),
        ),
    };
    let mut check = |label: &str, r: &Result<f64>| match r {
        Ok(v) if (v - cert.value).abs() <= VALUE_TOLERANCE => {}
        Ok(v) => diagnostics.push(format!(
            "{label} value {v} differs from stored {}",
            cert.value
        )),
        Err(e) => diagnostics.push(format!("{label} evaluation failed: {e}")),
    };
    check("spectral", &spectral);
    check("brute-force", &brute);

    let threshold = match cert.kind {
        FunctionalKind::Common => common_threshold(eq),
        FunctionalKind::Sidorenko => f.mean().re.powi(eq.total_vars() as i32),
    };
    if (threshold - cert.threshold).abs() > WITNESS_TOLERANCE {
        diagnostics.push(format!(
            "threshold {} should be {threshold}",
            cert.threshold
        ));
    }
    if (cert.threshold - cert.value - cert.margin).abs() > VALUE_TOLERANCE {
        diagnostics.push("margin is not threshold minus value".to_string());
    }
    if cert.margin.is_nan() || cert.margin <= 0.0 {
        diagnostics.push(format!("margin {} is not positive", cert.margin));
    }
    if let Some(sw) = &cert.set_witness {
        if let Err(msg) = verify_set_witness(eq, f.space(), sw) {
            diagnostics.push(msg);
        }
    }

    Verification {
        ok: diagnostics.is_empty(),
        spectral: spectral.ok(),
        brute: brute.ok(),
        diagnostics,
    }
}

fn verify_set_witness(
    eq: &LinearEquation,
    space: &Space,
    sw: &SetWitness,
) -> std::result::Result<(), String> {
    let set = PointSet::from_indices(space.clone(), &sw.members).map_err(|e| e.to_string())?;
    let fresh = set_witness(eq, &set).map_err(|e| e.to_string())?;
    if &fresh != sw {
        return Err("set witness does not match a recount".to_string());
    }
    let parse = |s: &str| s.parse::<BigRational>().map_err(|e| e.to_string());
    if parse(&sw.lambda)? >= parse(&sw.threshold)? {
        return Err("set witness does not violate the inequality".to_string());
    }
    Ok(())
}

/// `2^{-k} + (q-1)(-1/(2q))^k`.
pub fn nonsidorenko_odd_value(q: u32, k: usize) -> f64 {
    let q = q as f64;
    0.5f64.powi(k as i32) + (q - 1.0) * (-1.0 / (2.0 * q)).powi(k as i32)
}

/// `(1 - 1/q)^k + (-1/q)^k (q - 1)` as an exact rational.
pub fn punctured_density(q: u32, k: usize) -> BigRational {
    let q = BigRational::from_integer(q.into());
    let one = BigRational::one();
    let inv = &one / &q;
    let minus = BigRational::zero() - &inv;
    num_traits::pow(&one - &inv, k) + num_traits::pow(minus, k) * (q - one)
}

/// `value` as a float, for reporting exact rationals.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::linear::RhsMode;

    fn eq(q: u64, coeffs: &[u32], free: usize, rhs: RhsMode) -> LinearEquation {
        LinearEquation::from_codes(&Field::of_order(q).unwrap(), coeffs, rhs)
            .unwrap()
            .with_free_count(free)
    }

    #[test]
    fn uncommon_even_examples() {
        for q in [5, 3] {
            let e = eq(q, &[1, 1, 1, 1], 0, RhsMode::Zero);
            let cert = forge_uncommon_even(&e, 7, 10_000).unwrap();
            assert!(cert.value < 0.125 - 1e-6);
            assert!(verify_certificate(&cert).ok);
        }
        let e = eq(2, &[1, 1, 1, 1], 0, RhsMode::Zero);
        assert!(matches!(
            forge_uncommon_even(&e, 7, 10),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn nonsidorenko_odd_examples() {
        let cert = forge_nonsidorenko_odd(&eq(5, &[1, 1, 1], 0, RhsMode::Zero)).unwrap();
        assert!((cert.value - 0.121).abs() < 1e-12);
        assert!((cert.threshold - 0.125).abs() < 1e-12);
        assert!(verify_certificate(&cert).ok);

        let cert = forge_nonsidorenko_odd(&eq(5, &[1, 3, 1], 0, RhsMode::Zero)).unwrap();
        let sw = cert.set_witness.as_ref().unwrap();
        assert_eq!(sw.lambda, "12/25");
        assert_eq!(sw.threshold, "64/125");

        assert!(forge_nonsidorenko_odd(&eq(5, &[1, 1], 0, RhsMode::Zero)).is_err());
    }

    /// `(1/2+c)^K + (1/2-c)^K + s(-β)^k [(1/2+c)^ℓ - (1/2-c)^ℓ]` for odd
    /// `k`, with the character sum over nonzero frequencies equal to `s`.
    fn small_c_value(k: i32, l: i32, beta: f64, c: f64, s: f64) -> f64 {
        let (hi, lo) = (0.5 + c, 0.5 - c);
        hi.powi(k + l) + lo.powi(k + l) + s * (-beta).powi(k) * (hi.powi(l) - lo.powi(l))
    }

    #[test]
    fn freevar_odd_examples() {
        let e = eq(3, &[1, 1, 1], 1, RhsMode::Zero);
        let cert = forge_freevar_odd(&e, 0.01).unwrap();
        let c = cert.parameters.c.unwrap();
        // at c = 0.01 the quadratic term still wins, one halving is needed
        assert_eq!(c, 0.005);
        assert_eq!(cert.threshold, 0.125);
        let expected = small_c_value(3, 1, 1.0 / 6.0, c, 2.0);
        assert!((cert.value - expected).abs() < 1e-15);
        assert!(cert.value < 0.125);
        assert!(verify_certificate(&cert).ok);

        assert_eq!(
            forge_freevar_odd(&e, 0.0).unwrap_err(),
            Error::CSearchFailed(20)
        );
        let e = eq(3, &[1, 1, 1, 1], 1, RhsMode::Zero);
        assert!(matches!(
            forge_freevar_odd(&e, 0.01),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn inhomogeneous_examples() {
        let cert = forge_inhom(&eq(3, &[1, 1], 0, RhsMode::NonzeroB), 0.01).unwrap();
        assert_eq!(cert.rhs, 1);
        assert!((cert.value - (0.5 - 1.0 / 18.0)).abs() < 1e-12);
        assert!(verify_certificate(&cert).ok);

        let cert = forge_inhom(&eq(3, &[1, 1, 1], 1, RhsMode::NonzeroB), 0.01).unwrap();
        let c = cert.parameters.c.unwrap();
        assert_eq!(c, 0.0025);
        let expected = small_c_value(3, 1, -1.0 / 6.0, c, -1.0);
        assert!((cert.value - expected).abs() < 1e-15);
        assert!(cert.value < 0.125);
        assert!(verify_certificate(&cert).ok);

        let e = eq(5, &[1, 1, 1], 0, RhsMode::NonzeroB);
        assert!(matches!(
            forge_inhom(&e, 0.01),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn tampering_is_detected() {
        let cert = forge_nonsidorenko_odd(&eq(5, &[1, 1, 1], 0, RhsMode::Zero)).unwrap();

        let mut bumped = cert.clone();
        let mut values = bumped.witness.real_parts();
        values[2] += 0.1;
        bumped.witness = GroupFunction::from_real(bumped.witness.space().clone(), &values).unwrap();
        assert!(!verify_certificate(&bumped).ok);

        let mut corrupted = cert;
        corrupted.threshold = 0.2;
        assert!(!verify_certificate(&corrupted).ok);
    }

    #[test]
    fn json_round_trip() {
        let e = eq(5, &[1, 2, 2, 4], 0, RhsMode::Zero);
        let cert = forge_uncommon_even(&e, 3, 10_000).unwrap();
        let back = Certificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
        assert!(verify_certificate(&back).ok);
    }

    #[test]
    fn punctured_density_closed_form() {
        assert_eq!(
            punctured_density(5, 3),
            BigRational::new(12.into(), 25.into())
        );
        assert!((nonsidorenko_odd_value(5, 3) - 0.121).abs() < 1e-15);
    }
}
