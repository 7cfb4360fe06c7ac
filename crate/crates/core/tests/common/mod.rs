#![allow(dead_code)]

use linform_core::{Field, LinearEquation, RhsMode, Space};
use proptest::prelude::*;

pub fn field(q: u64) -> Field {
    Field::of_order(q).unwrap()
}

pub fn space(q: u64, n: usize) -> Space {
    Space::new(field(q), n).unwrap()
}

pub fn equation(q: u64, coeffs: &[u32], free: usize, rhs: RhsMode) -> LinearEquation {
    LinearEquation::new(field(q), coeffs.to_vec(), free, rhs).unwrap()
}

/// Nonzero coefficient codes of length `k` over GF(q).
pub fn coeffs(q: u32, k: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(1..q, k)
}

/// Every nonzero coefficient vector of length `k` over GF(q).
pub fn all_coeffs(q: u32, k: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| {
                (1..q).map(move |a| {
                    let mut w = v.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    out
}

/// Independent pairing check: search all perfect matchings.
pub fn has_pairing_bruteforce(field: &Field, coeffs: &[u32]) -> bool {
    fn go(field: &Field, coeffs: &[u32], used: &mut Vec<bool>) -> bool {
        let Some(i) = used.iter().position(|u| !u) else {
            return true;
        };
        used[i] = true;
        for j in i + 1..coeffs.len() {
            if !used[j] && field.add(coeffs[i], coeffs[j]) == 0 {
                used[j] = true;
                if go(field, coeffs, used) {
                    return true;
                }
                used[j] = false;
            }
        }
        used[i] = false;
        false
    }
    coeffs.len().is_multiple_of(2) && go(field, coeffs, &mut vec![false; coeffs.len()])
}
