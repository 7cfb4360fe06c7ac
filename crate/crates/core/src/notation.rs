//! Text forms of fields and equations.
//!
//! Field spec: `q=5`, `q=9` (built-in modulus) or `p=2,m=2,modulus=1+x+x^2`.
//! Equation spec: `L=1,-2,1; q=5[; free=<int>][; b=zero|nonzero]`.
//!
//! Over prime fields coefficient literals are reduced mod p. Over extension
//! fields a literal `c ≥ 0` is the element with code `c` and `-c` is its
//! negative.

use crate::error::{Error, Result};
use crate::field::{prime_power, Field};
use crate::linear::{LinearEquation, RhsMode};

fn parse_int<T: std::str::FromStr>(text: &str, pos: usize, what: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::parse(pos, format!("expected {what}, found {:?}", text.trim())))
}

/// Offset of `inner` within `outer`; both must come from the same buffer.
fn offset(outer: &str, inner: &str) -> usize {
    inner.as_ptr() as usize - outer.as_ptr() as usize
}

pub fn parse_field_spec(spec: &str) -> Result<Field> {
    parse_field_at(spec, 0)
}

fn parse_field_at(spec: &str, base: usize) -> Result<Field> {
    let trimmed = spec.trim();
    let start = base + offset(spec, trimmed);
    if let Some(rest) = trimmed.strip_prefix("q=") {
        // `q=p=2,m=2,...` is accepted as an alias for the explicit form
        if rest.trim_start().starts_with("p=") {
            return parse_field_at(rest, start + 2);
        }
        let q: u64 = parse_int(rest, start + 2, "field order")?;
        return match prime_power(q) {
            Some((p, m)) => Field::new(p, m, None),
            None => Err(Error::NotPrime(q)),
        };
    }

    let mut p = None;
    let mut m = None;
    let mut modulus = None;
    for part in trimmed.split(',') {
        let pos = start + offset(trimmed, part);
        let (key, value) = part.split_once('=').ok_or_else(|| {
            Error::parse(pos, format!("expected key=value, found {:?}", part.trim()))
        })?;
        let vpos = pos + key.len() + 1;
        let slot = match key.trim() {
            "p" => &mut p,
            "m" => &mut m,
            "modulus" => {
                if modulus.is_some() {
                    return Err(Error::parse(pos, "duplicate key modulus"));
                }
                modulus = Some((value, vpos));
                continue;
            }
            other => return Err(Error::parse(pos, format!("unknown field key {other:?}"))),
        };
        if slot.is_some() {
            return Err(Error::parse(pos, format!("duplicate key {}", key.trim())));
        }
        *slot = Some(parse_int::<u32>(value, vpos, "integer")?);
    }
    let p = p.ok_or_else(|| Error::parse(start, "missing p"))?;
    let m = m.unwrap_or(1);
    match modulus {
        Some((text, pos)) => {
            let poly = parse_polynomial(text, pos, p, m)?;
            Field::new(p, m, Some(&poly))
        }
        None => Field::new(p, m, None),
    }
}

/// Parses `1+x+x^2`, `2+2x+x^2`, `3*x^2+1`, constant term first in the result.
fn parse_polynomial(text: &str, base: usize, p: u32, m: u32) -> Result<Vec<u32>> {
    let mut coeffs = vec![0u32; m as usize + 1];
    for term in text.split('+') {
        let pos = base + offset(text, term);
        let t = term.trim();
        if t.is_empty() {
            return Err(Error::parse(pos, "empty polynomial term"));
        }
        let (coef, exp) = match t.find('x') {
            None => (parse_int::<u64>(t, pos, "coefficient")?, 0usize),
            Some(ix) => {
                let head = t[..ix].trim().trim_end_matches('*');
                let coef = if head.is_empty() {
                    1
                } else {
                    parse_int::<u64>(head, pos, "coefficient")?
                };
                let tail = t[ix + 1..].trim();
                let exp = if tail.is_empty() {
                    1
                } else {
                    let e = tail
                        .strip_prefix('^')
                        .ok_or_else(|| Error::parse(pos, format!("bad term {t:?}")))?;
                    parse_int::<usize>(e, pos, "exponent")?
                };
                (coef, exp)
            }
        };
        if exp > m as usize {
            return Err(Error::parse(pos, format!("degree {exp} exceeds m = {m}")));
        }
        coeffs[exp] = ((coeffs[exp] as u64 + coef) % p as u64) as u32;
    }
    Ok(coeffs)
}

/// Parses an equation spec; zero coefficients become free variables.
pub fn parse_equation_spec(spec: &str) -> Result<LinearEquation> {
    let mut coeffs: Option<(&str, usize)> = None;
    let mut field: Option<Field> = None;
    let mut free: Option<usize> = None;
    let mut rhs: Option<RhsMode> = None;

    for segment in spec.split(';') {
        let pos = offset(spec, segment);
        let seg = segment.trim();
        if seg.is_empty() {
            continue;
        }
        let seg_pos = pos + offset(segment, seg);
        let (key, value) = seg
            .split_once('=')
            .ok_or_else(|| Error::parse(seg_pos, format!("expected key=value, found {seg:?}")))?;
        let vpos = seg_pos + key.len() + 1;
        let dup = |present: bool| {
            if present {
                Err(Error::parse(
                    seg_pos,
                    format!("duplicate key {}", key.trim()),
                ))
            } else {
                Ok(())
            }
        };
        match key.trim() {
            "L" => {
                dup(coeffs.is_some())?;
                coeffs = Some((value, vpos));
            }
            "q" | "p" => {
                dup(field.is_some())?;
                field = Some(parse_field_at(seg, seg_pos)?);
            }
            "free" => {
                dup(free.is_some())?;
                free = Some(parse_int(value, vpos, "free-variable count")?);
            }
            "b" => {
                dup(rhs.is_some())?;
                rhs = Some(match value.trim() {
                    "zero" | "0" => RhsMode::Zero,
                    "nonzero" => RhsMode::NonzeroB,
                    other => {
                        return Err(Error::parse(
                            vpos,
                            format!("expected zero or nonzero, found {other:?}"),
                        ))
                    }
                });
            }
            other => return Err(Error::parse(seg_pos, format!("unknown key {other:?}"))),
        }
    }

    let field = field.ok_or_else(|| Error::parse(spec.len(), "missing field (q=...)"))?;
    let (list, lpos) = coeffs.ok_or_else(|| Error::parse(0, "missing coefficient list (L=...)"))?;
    let mut codes = Vec::new();
    for item in list.split(',') {
        let pos = lpos + offset(list, item);
        let value: i64 = parse_int(item, pos, "integer coefficient")?;
        codes.push(coefficient_code(&field, value, pos)?);
    }
    let eq = LinearEquation::from_codes(&field, &codes, rhs.unwrap_or(RhsMode::Zero))?;
    let extra = free.unwrap_or(0);
    Ok(eq.with_free_count(eq.free_count() + extra))
}

fn coefficient_code(field: &Field, value: i64, pos: usize) -> Result<u32> {
    if field.is_prime_field() {
        return Ok(field.from_int(value));
    }
    let magnitude = value.unsigned_abs();
    if magnitude >= field.q() as u64 {
        return Err(Error::parse(
            pos,
            format!(
                "element code {magnitude} out of range for q = {}",
                field.q()
            ),
        ));
    }
    let code = magnitude as u32;
    Ok(if value < 0 { field.neg(code) } else { code })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_specs() {
        assert_eq!(parse_field_spec("q=5").unwrap().q(), 5);
        let gf4 = parse_field_spec("p=2,m=2,modulus=1+x+x^2").unwrap();
        assert_eq!(gf4.modulus(), &[1, 1, 1]);
        assert_eq!(parse_field_spec(&gf4.spec()).unwrap(), gf4);
        let gf9 = parse_field_spec("q=p=3,m=2,modulus=1+x^2").unwrap();
        assert_eq!(gf9.modulus(), &[1, 0, 1]);
        assert_eq!(parse_field_spec("q=6").unwrap_err(), Error::NotPrime(6));
        assert!(matches!(
            parse_field_spec("p=2,m=2,modulus=1+x^2"),
            Err(Error::Reducible(_))
        ));
        assert!(matches!(
            parse_field_spec("r=3"),
            Err(Error::Parse { pos: 0, .. })
        ));
    }

    #[test]
    fn equation_specs() {
        let eq = parse_equation_spec("L=1,-2,1; q=5").unwrap();
        assert_eq!(eq.coeffs(), &[1, 3, 1]);
        assert_eq!(eq.free_count(), 0);
        assert_eq!(eq.rhs_mode(), RhsMode::Zero);

        let eq = parse_equation_spec("L=1,1,1,1; q=3; b=nonzero").unwrap();
        assert_eq!(eq.rhs_mode(), RhsMode::NonzeroB);

        assert_eq!(
            parse_equation_spec("L=0,0; q=3").unwrap_err(),
            Error::AllZero
        );

        let eq = parse_equation_spec("L=1,0,2; q=3; free=2").unwrap();
        assert_eq!(eq.free_count(), 3);

        let eq = parse_equation_spec("L=3,-1; p=2,m=2,modulus=1+x+x^2").unwrap();
        assert_eq!(eq.coeffs(), &[3, 1]);
    }

    #[test]
    fn equation_spec_errors_carry_positions() {
        match parse_equation_spec("L=1,x,1; q=5") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        match parse_equation_spec("L=1,1; q=5; colour=red") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 12),
            other => panic!("{other:?}"),
        }
        assert!(parse_equation_spec("L=1,1; q=5; q=7").is_err());
        assert!(parse_equation_spec("L=1,1").is_err());
        assert!(parse_equation_spec("L=1,5; q=4").is_err());
    }

    #[test]
    fn round_trips_through_to_spec() {
        for spec in [
            "L=1,-2,1; q=5",
            "L=1,1,0; q=3; b=nonzero",
            "L=2,3,1; q=9; free=1",
            "L=1,1; p=2,m=2,modulus=1+x+x^2",
        ] {
            let eq = parse_equation_spec(spec).unwrap();
            assert_eq!(parse_equation_spec(&eq.to_spec()).unwrap(), eq, "{spec}");
        }
    }
}
