//! Text files for sets, colorings and functions.
//!
//! Every file starts with a header `n=<int> <field spec>`, e.g. `n=1 q=5`.
//! Sets and colorings follow with a hex bitmask (`0x16`) or a whitespace
//! list of member indices (color-1 cells for colorings). Functions follow
//! with `q^n` lines `index,re[,im]`.

use num_complex::Complex64;

use crate::counting::{bits_to_hex, hex_to_bits, PointSet, TwoColoring};
use crate::error::{Error, Result};
use crate::field::Space;
use crate::fourier::GroupFunction;
use crate::notation::parse_field_spec;

/// Splits off the header line and returns the space and the body offset.
fn parse_header(text: &str) -> Result<(Space, usize)> {
    let (line, rest_at) = match text.find('\n') {
        Some(i) => (&text[..i], i + 1),
        None => (text, text.len()),
    };
    let line = line.trim_end_matches('\r');
    let trimmed = line.trim_start();
    let lead = line.len() - trimmed.len();
    let (n_part, field_part) = trimmed
        .split_once(char::is_whitespace)
        .ok_or_else(|| Error::parse(lead, "header must be `n=<int> <field spec>`"))?;
    let n = n_part
        .strip_prefix("n=")
        .and_then(|v| v.parse::<usize>().ok())
        .ok_or_else(|| Error::parse(lead, format!("expected n=<int>, found {n_part:?}")))?;
    let field = parse_field_spec(field_part).map_err(|e| match e {
        Error::Parse { pos, msg } => Error::parse(lead + n_part.len() + 1 + pos, msg),
        other => other,
    })?;
    Ok((Space::new(field, n)?, rest_at))
}

fn header(space: &Space) -> String {
    format!("n={} {}", space.dim(), space.field().spec())
}

fn parse_membership(text: &str) -> Result<(Space, Vec<bool>)> {
    let (space, at) = parse_header(text)?;
    let body = &text[at..];
    let trimmed = body.trim();
    if trimmed.starts_with("0x") || trimmed.starts_with("0X") {
        let bits = hex_to_bits(trimmed, space.size()).map_err(|e| match e {
            Error::Parse { pos, msg } => {
                Error::parse(at + body.find(trimmed).unwrap_or(0) + pos, msg)
            }
            other => other,
        })?;
        return Ok((space, bits));
    }
    let mut bits = vec![false; space.size()];
    let mut offset = at;
    for token in body.split_whitespace() {
        let pos = offset + text[offset..].find(token).unwrap_or(0);
        offset = pos + token.len();
        let index: usize = token
            .parse()
            .map_err(|_| Error::parse(pos, format!("expected an index, found {token:?}")))?;
        if index >= bits.len() {
            return Err(Error::IndexOutOfRange {
                index,
                size: bits.len(),
            });
        }
        bits[index] = true;
    }
    Ok((space, bits))
}

pub fn parse_set(text: &str) -> Result<PointSet> {
    let (space, bits) = parse_membership(text)?;
    PointSet::from_bits(space, bits)
}

pub fn parse_coloring(text: &str) -> Result<TwoColoring> {
    let (space, bits) = parse_membership(text)?;
    TwoColoring::from_bits(space, bits)
}

pub fn format_set(set: &PointSet) -> String {
    format!("{}\n{}\n", header(set.space()), bits_to_hex(set.bits()))
}

pub fn format_coloring(coloring: &TwoColoring) -> String {
    format!(
        "{}\n{}\n",
        header(coloring.space()),
        bits_to_hex(coloring.bits())
    )
}

pub fn parse_function(text: &str) -> Result<GroupFunction> {
    let (space, at) = parse_header(text)?;
    let mut values = vec![None; space.size()];
    let mut offset = at;
    for raw in text[at..].split('\n') {
        let pos = offset;
        offset += raw.len() + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::parse(pos, "expected `index,re[,im]`"));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(pos, format!("bad index {:?}", fields[0])))?;
        let number = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(pos, format!("bad number {s:?}")))
        };
        let re = number(fields[1])?;
        let im = fields.get(2).map(|s| number(s)).transpose()?.unwrap_or(0.0);
        let slot = values.get_mut(index).ok_or(Error::IndexOutOfRange {
            index,
            size: space.size(),
        })?;
        if slot.replace(Complex64::new(re, im)).is_some() {
            return Err(Error::parse(pos, format!("index {index} given twice")));
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| Error::parse(text.len(), format!("missing value for index {i}")))
        })
        .collect::<Result<Vec<_>>>()?;
    GroupFunction::new(space, values)
}

/// Values are written with 17 significant digits so they read back exactly.
pub fn format_function(f: &GroupFunction) -> String {
    let mut out = header(f.space());
    out.push('\n');
    for (i, v) in f.values().iter().enumerate() {
        if v.im == 0.0 {
            out.push_str(&format!("{i},{:.16e}\n", v.re));
        } else {
            out.push_str(&format!("{i},{:.16e},{:.16e}\n", v.re, v.im));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    #[test]
    fn sets_in_both_notations() {
        let a = parse_set("n=1 q=5\n0x16\n").unwrap();
        assert_eq!(a.members(), vec![1, 2, 4]);
        assert_eq!(parse_set("n=1 q=5\n1 2\n4").unwrap(), a);
        assert_eq!(parse_set(&format_set(&a)).unwrap(), a);
        assert!(parse_set("n=1 q=5\n").unwrap().is_empty());
        let gf4 = parse_set("n=2 p=2,m=2,modulus=1+x+x^2\n15").unwrap();
        assert_eq!(gf4.space().size(), 16);
        assert!(matches!(
            parse_set("n=1 q=5\n7"),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(parse_set("q=5\n1"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_set("n=1 q=5\n1 x"),
            Err(Error::Parse { pos: 10, .. })
        ));
    }

    #[test]
    fn colorings() {
        let chi = parse_coloring("n=1 q=3\n1 2\n").unwrap();
        assert_eq!(chi.bits(), &[false, true, true]);
        assert_eq!(parse_coloring(&format_coloring(&chi)).unwrap(), chi);
    }

    #[test]
    fn functions_round_trip() {
        let space = Space::new(Field::of_order(4).unwrap(), 1).unwrap();
        let f = GroupFunction::new(
            space,
            vec![
                Complex64::new(0.1, 0.0),
                Complex64::new(1.0 / 3.0, -0.25),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        assert_eq!(parse_function(&format_function(&f)).unwrap(), f);
        let g = parse_function("n=1 q=3\n2,0.5\n0,0.25,0\n1,1\n").unwrap();
        assert_eq!(g.real_parts(), vec![0.25, 1.0, 0.5]);
        assert!(parse_function("n=1 q=3\n0,1\n1,1\n").is_err());
        assert!(parse_function("n=1 q=3\n0,1\n0,1\n1,1\n2,1").is_err());
    }
}
