//! Hilbert cubes and embeddings of an equation into the cube system.
//!
//! The cube of dimension `t` is the family `x + Σ_{i∈S} d_i` over subsets
//! `S ⊆ {1..t}`, indexed here by little-endian bitmasks. An embedding assigns
//! each variable a distinct subset so that `L` vanishes on every cube.

use serde::Serialize;

use crate::budget::{saturating_pow, Budget};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linear::{LinearEquation, RhsMode};

pub const MAX_CUBE_DIM: u32 = 10;

/// Default cap on search-tree nodes in [`find_cube_embedding`].
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Coefficients of the eight-variable cube example, before reduction.
pub const CUBE_EXAMPLE: [i64; 8] = [-6, 3, 1, 7, 2, -4, -2, -1];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CubeSystem {
    pub t: u32,
    /// Point `S` is `x + Σ_{i∈S} d_i`; entry `s` is the mask of `S`.
    pub points: Vec<u32>,
    /// `incidence[s][i]` is true iff `i+1 ∈ S`.
    pub incidence: Vec<Vec<bool>>,
}

pub fn cube_system(t: u32) -> Result<CubeSystem> {
    if !(1..=MAX_CUBE_DIM).contains(&t) {
        return Err(Error::OutOfRange {
            what: "cube dimension",
            value: t as i64,
        });
    }
    let points: Vec<u32> = (0..1u32 << t).collect();
    let incidence = points
        .iter()
        .map(|&s| (0..t).map(|i| (s >> i) & 1 == 1).collect())
        .collect();
    Ok(CubeSystem {
        t,
        points,
        incidence,
    })
}

/// Variable `i` is sent to the subset with mask `masks[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CubeEmbedding {
    pub t: u32,
    pub masks: Vec<u32>,
}

struct Search<'a> {
    field: &'a Field,
    coeffs: &'a [u32],
    t: u32,
    used: Vec<bool>,
    /// Unused masks containing each coordinate.
    open: Vec<usize>,
    sums: Vec<u32>,
    masks: Vec<u32>,
    nodes: u64,
    limit: u64,
}

impl Search<'_> {
    fn run(&mut self, var: usize) -> Result<bool> {
        if var == self.coeffs.len() {
            return Ok(self.sums.iter().all(|&s| s == 0));
        }
        let a = self.coeffs[var];
        for mask in 0..self.used.len() as u32 {
            if self.used[mask as usize] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.limit {
                return Err(Error::BudgetExceeded {
                    needed: self.nodes as u128,
                    budget: self.limit,
                });
            }
            self.place(mask, a, true);
            // a coordinate with no open masks left has its final sum
            let viable = (0..self.t as usize).all(|j| self.open[j] > 0 || self.sums[j] == 0);
            if viable {
                self.masks.push(mask);
                if self.run(var + 1)? {
                    return Ok(true);
                }
                self.masks.pop();
            }
            self.place(mask, a, false);
        }
        Ok(false)
    }

    fn place(&mut self, mask: u32, a: u32, on: bool) {
        self.used[mask as usize] = on;
        for j in 0..self.t as usize {
            if (mask >> j) & 1 == 1 {
                if on {
                    self.open[j] -= 1;
                    self.sums[j] = self.field.add(self.sums[j], a);
                } else {
                    self.open[j] += 1;
                    self.sums[j] = self.field.sub(self.sums[j], a);
                }
            }
        }
    }
}

fn check_arity(eq: &LinearEquation, t: u32) -> Result<()> {
    cube_system(t)?;
    if eq.free_count() != 0 || !eq.is_homogeneous() {
        return Err(Error::NotApplicable(
            "cube embeddings need a homogeneous equation without free variables".into(),
        ));
    }
    let needed = 1usize << t;
    if eq.k() != needed {
        return Err(Error::ArityMismatch {
            k: eq.k(),
            t,
            needed,
        });
    }
    Ok(())
}

/// The lexicographically least embedding of `L` into the dimension-`t` cube,
/// if any.
pub fn find_cube_embedding(eq: &LinearEquation, t: u32) -> Result<Option<CubeEmbedding>> {
    find_cube_embedding_with(eq, t, DEFAULT_NODE_BUDGET)
}

pub fn find_cube_embedding_with(
    eq: &LinearEquation,
    t: u32,
    node_budget: u64,
) -> Result<Option<CubeEmbedding>> {
    check_arity(eq, t)?;
    let field = eq.field();
    let total = eq.coeffs().iter().fold(0, |acc, &c| field.add(acc, c));
    if total != 0 {
        return Ok(None);
    }
    let mut search = Search {
        field,
        coeffs: eq.coeffs(),
        t,
        used: vec![false; 1 << t],
        open: vec![1 << (t - 1); t as usize],
        sums: vec![0; t as usize],
        masks: Vec::with_capacity(eq.k()),
        nodes: 0,
        limit: node_budget,
    };
    Ok(search.run(0)?.then_some(CubeEmbedding {
        t,
        masks: search.masks,
    }))
}

/// Evaluates `L` on every cube `(x, d_1..d_t) ∈ GF(q)^{t+1}` under the
/// embedding; true iff it always vanishes.
pub fn verify_cube_embedding(
    eq: &LinearEquation,
    embedding: &CubeEmbedding,
    budget: Budget,
) -> Result<bool> {
    let t = embedding.t;
    check_arity(eq, t)?;
    let mut seen = vec![false; 1 << t];
    for &m in &embedding.masks {
        if m as usize >= seen.len() || std::mem::replace(&mut seen[m as usize], true) {
            return Ok(false);
        }
    }
    let field = eq.field();
    let q = field.q() as u128;
    budget.check(saturating_pow(q, t as usize + 1))?;
    let mut point = vec![0u32; t as usize + 1];
    loop {
        let value = eq
            .coeffs()
            .iter()
            .zip(&embedding.masks)
            .fold(0, |acc, (&a, &mask)| {
                let mut v = point[0];
                for j in 0..t as usize {
                    if (mask >> j) & 1 == 1 {
                        v = field.add(v, point[j + 1]);
                    }
                }
                field.add(acc, field.mul(a, v))
            });
        if value != 0 {
            return Ok(false);
        }
        // odometer over GF(q)^{t+1}
        let mut i = 0;
        loop {
            if i == point.len() {
                return Ok(true);
            }
            point[i] += 1;
            if point[i] < field.q() {
                break;
            }
            point[i] = 0;
            i += 1;
        }
    }
}

/// The eight-variable cube example reduced into `field`; characteristics 2,
/// 3 and 7 kill a coefficient and are rejected.
pub fn cube_example_equation(field: &Field) -> Result<LinearEquation> {
    if matches!(field.p(), 2 | 3 | 7) {
        return Err(Error::NotApplicable(format!(
            "a coefficient vanishes in characteristic {}",
            field.p()
        )));
    }
    let coeffs: Vec<u32> = CUBE_EXAMPLE.iter().map(|&c| field.from_int(c)).collect();
    LinearEquation::new(field.clone(), coeffs, 0, RhsMode::Zero)
}
