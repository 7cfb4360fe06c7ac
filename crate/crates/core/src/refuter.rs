//! Searches for sets violating the Sidorenko inequality and colorings
//! violating the common inequality.
//!
//! The exhaustive searches walk all subsets (colorings) in Gray-code order.
//! Solutions are counted by splitting the coefficient variables into two
//! halves with sum distributions `P` and `Q`, so that the count is
//! `Σ_z P(z)·Q(b - z)`; a single-cell flip updates both distributions from the
//! tuples containing that cell. A search that finds nothing only says that no
//! witness exists at this `n`.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::counting::{
    bits_to_hex, common_holds_exact, count_solutions_in_set, monochromatic_count,
    sidorenko_holds_exact, PointSet, TwoColoring,
};
use crate::error::{Error, Result};
use crate::field::Space;
use crate::fourier::check_rhs;
use crate::linear::LinearEquation;

/// Default cap on `q^n` for exhaustive searches.
pub const DEFAULT_MAX_CELLS: usize = 24;

/// Hard cap: masks are carried in a `u64`.
pub const HARD_MAX_CELLS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchKind {
    Sidorenko,
    Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub max_cells: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

/// Outcome of a search. `slack = lhs - rhs`; a negative slack is a violation.
/// For exhaustive searches the reported object is the one of least slack,
/// ties broken by the smallest mask.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub kind: SearchKind,
    pub n: usize,
    pub found: bool,
    /// Hex bitmask of the reported set, or of the color-1 class.
    pub witness: String,
    #[serde(skip)]
    pub bits: Vec<bool>,
    /// Solutions in the set, or monochromatic solutions.
    pub count: u128,
    pub threshold_lhs: u128,
    pub threshold_rhs: u128,
    pub slack: i128,
    pub examined: u64,
}

impl SearchReport {
    pub fn set(&self, space: &Space) -> Result<PointSet> {
        PointSet::from_bits(space.clone(), self.bits.clone())
    }

    pub fn coloring(&self, space: &Space) -> Result<TwoColoring> {
        TwoColoring::from_bits(space.clone(), self.bits.clone())
    }
}

/// Sum distribution of `Σ a_i x_i` over tuples from the current set, for one
/// half of the coefficient variables.
struct Half {
    maps: Vec<Vec<usize>>,
    dist: Vec<i64>,
}

/// Shared lookup tables for one search.
struct Tables {
    add: Vec<usize>,
    b_minus: Vec<usize>,
    cells: usize,
}

impl Tables {
    fn new(space: &Space, b: usize) -> Self {
        let cells = space.size();
        let mut add = vec![0; cells * cells];
        for x in 0..cells {
            for y in 0..cells {
                add[x * cells + y] = space.add(x, y);
            }
        }
        let b_minus = (0..cells).map(|z| space.sub(b, z)).collect();
        Tables {
            add,
            b_minus,
            cells,
        }
    }

    fn add(&self, x: usize, y: usize) -> usize {
        self.add[x * self.cells + y]
    }
}

/// Incremental solution counter for one set.
struct SetState {
    members: Vec<usize>,
    slot: Vec<usize>,
    left: Half,
    right: Half,
    core: i64,
}

const ABSENT: usize = usize::MAX;

impl SetState {
    fn new(eq: &LinearEquation, space: &Space) -> Self {
        let cells = space.size();
        let maps: Vec<Vec<usize>> = eq.coeffs().iter().map(|&a| space.scale_map(a)).collect();
        let split = maps.len().div_ceil(2);
        let half = |maps: Vec<Vec<usize>>| {
            let mut dist = vec![0; cells];
            if maps.is_empty() {
                dist[0] = 1;
            }
            Half { maps, dist }
        };
        let right = half(maps[split..].to_vec());
        let left = half(maps[..split].to_vec());
        SetState {
            members: Vec::with_capacity(cells),
            slot: vec![ABSENT; cells],
            left,
            right,
            core: 0,
        }
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    /// Toggles `cell`. With `Δcount = Σ ΔP·Q_old + Σ P_new·ΔQ`, each changed
    /// tuple sum is folded into the count as it is produced.
    fn flip(&mut self, cell: usize, t: &Tables) {
        let adding = self.slot[cell] == ABSENT;
        if !adding {
            let i = self.slot[cell];
            self.members.swap_remove(i);
            if i < self.members.len() {
                self.slot[self.members[i]] = i;
            }
            self.slot[cell] = ABSENT;
        }
        self.members.push(cell);
        let sign = if adding { 1 } else { -1 };
        let with = &self.members[..];
        let without = &self.members[..with.len() - 1];

        let mut change = 0i64;
        let (left, right) = (&mut self.left, &mut self.right);
        changed_sums(&left.maps, cell, without, with, t, &mut |z| {
            change += right.dist[t.b_minus[z]];
            left.dist[z] += sign;
        });
        changed_sums(&right.maps, cell, without, with, t, &mut |w| {
            change += left.dist[t.b_minus[w]];
            right.dist[w] += sign;
        });
        self.core += sign * change;

        if adding {
            self.slot[cell] = self.members.len() - 1;
        } else {
            self.members.pop();
        }
    }
}

/// Calls `emit` with `Σ a_i x_i` for every tuple over `with` that contains
/// `cell`, enumerated by the position of its first occurrence: earlier
/// coordinates range over `without`, later ones over `with`.
fn changed_sums(
    maps: &[Vec<usize>],
    cell: usize,
    without: &[usize],
    with: &[usize],
    t: &Tables,
    emit: &mut impl FnMut(usize),
) {
    match maps {
        [] => {}
        [m0] => emit(m0[cell]),
        [m0, m1] => {
            let head = m0[cell];
            for &x in with {
                emit(t.add(head, m1[x]));
            }
            let tail = m1[cell];
            for &x in without {
                emit(t.add(m0[x], tail));
            }
        }
        _ => {
            for first in 0..maps.len() {
                walk(maps, 0, first, 0, cell, without, with, t, emit);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn walk(
    maps: &[Vec<usize>],
    pos: usize,
    first: usize,
    sum: usize,
    cell: usize,
    without: &[usize],
    with: &[usize],
    t: &Tables,
    emit: &mut impl FnMut(usize),
) {
    if pos == maps.len() {
        emit(sum);
        return;
    }
    let map = &maps[pos];
    if pos == first {
        walk(
            maps,
            pos + 1,
            first,
            t.add(sum, map[cell]),
            cell,
            without,
            with,
            t,
            emit,
        );
        return;
    }
    let pool = if pos < first { without } else { with };
    for &x in pool {
        walk(
            maps,
            pos + 1,
            first,
            t.add(sum, map[x]),
            cell,
            without,
            with,
            t,
            emit,
        );
    }
}

struct Scorer {
    kind: SearchKind,
    cells: i128,
    pow_free: Vec<i128>,
    pow_total: Vec<i128>,
    common_scale: i128,
    full_count: i128,
}

impl Scorer {
    fn new(eq: &LinearEquation, kind: SearchKind, cells: usize) -> Result<Self> {
        let overflow =
            || Error::NumericalInconsistency("search thresholds overflow 128 bits".into());
        let total = eq.total_vars() as u32;
        let pow = |e: u32| -> Result<Vec<i128>> {
            (0..=cells)
                .map(|s| (s as i128).checked_pow(e).ok_or_else(overflow))
                .collect()
        };
        let pow_total = pow(total)?;
        // lhs is at most cells · cells^{K-1} · 2^{K-1}
        (cells as i128)
            .checked_pow(total)
            .and_then(|v| v.checked_mul(1i128 << (total - 1).min(126)))
            .ok_or_else(overflow)?;
        Ok(Scorer {
            kind,
            cells: cells as i128,
            pow_free: pow(eq.free_count() as u32)?,
            pow_total,
            common_scale: 1i128 << (total - 1),
            full_count: (cells as i128).pow(total - 1),
        })
    }

    /// `(count, lhs, rhs)`.
    fn score(&self, states: &[SetState]) -> (i128, i128, i128) {
        match self.kind {
            SearchKind::Sidorenko => {
                let s = &states[0];
                let count = s.core as i128 * self.pow_free[s.len()];
                (count, self.cells * count, self.pow_total[s.len()])
            }
            SearchKind::Common => {
                let count: i128 = states
                    .iter()
                    .map(|s| s.core as i128 * self.pow_free[s.len()])
                    .sum();
                (count, self.common_scale * count, self.full_count)
            }
        }
    }
}

#[derive(Clone, Copy)]
struct Best {
    slack: i128,
    mask: u64,
    count: i128,
    lhs: i128,
    rhs: i128,
}

impl Best {
    fn better(self, other: Best) -> Best {
        if (other.slack, other.mask) < (self.slack, self.mask) {
            other
        } else {
            self
        }
    }
}

fn search_block(
    eq: &LinearEquation,
    space: &Space,
    tables: &Tables,
    scorer: &Scorer,
    prefix: u64,
    low_bits: usize,
) -> Best {
    let cells = space.size();
    let colors = match scorer.kind {
        SearchKind::Sidorenko => 1,
        SearchKind::Common => 2,
    };
    let mut states: Vec<SetState> = (0..colors).map(|_| SetState::new(eq, space)).collect();
    // state 0 holds the set bits; for colorings state 1 holds the clear bits
    for cell in 0..cells {
        let set = (prefix >> cell) & 1 == 1;
        if set {
            states[0].flip(cell, tables);
        } else if colors == 2 {
            states[1].flip(cell, tables);
        }
    }
    let mut mask = prefix;
    let evaluate = |states: &[SetState], mask: u64| {
        let (count, lhs, rhs) = scorer.score(states);
        Best {
            slack: lhs - rhs,
            mask,
            count,
            lhs,
            rhs,
        }
    };
    let mut best = evaluate(&states, mask);
    for i in 1u64..(1u64 << low_bits) {
        let cell = i.trailing_zeros() as usize;
        mask ^= 1 << cell;
        for s in states.iter_mut() {
            s.flip(cell, tables);
        }
        best = best.better(evaluate(&states, mask));
    }
    best
}

fn exhaustive(
    eq: &LinearEquation,
    b: usize,
    n: usize,
    kind: SearchKind,
    options: SearchOptions,
) -> Result<SearchReport> {
    let space = Space::new(eq.field().clone(), n)?;
    check_rhs(eq, &space, b)?;
    let cells = space.size();
    let cap = options.max_cells.min(HARD_MAX_CELLS);
    if cells > cap {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << cells.min(127),
            budget: 1u64 << cap,
        });
    }
    let scorer = Scorer::new(eq, kind, cells)?;
    let tables = Tables::new(&space, b);

    // complementing a coloring preserves the monochromatic count, so the top
    // cell stays in color 0
    let free_cells = match kind {
        SearchKind::Sidorenko => cells,
        SearchKind::Common => cells - 1,
    };
    let top_bits = free_cells.min(6).min(free_cells.saturating_sub(4));
    let low_bits = free_cells - top_bits;
    let best = (0u64..1 << top_bits)
        .into_par_iter()
        .map(|top| search_block(eq, &space, &tables, &scorer, top << low_bits, low_bits))
        .reduce_with(Best::better)
        .expect("at least one block");

    let bits: Vec<bool> = (0..cells).map(|i| (best.mask >> i) & 1 == 1).collect();
    let report = SearchReport {
        kind,
        n,
        found: best.slack < 0,
        witness: bits_to_hex(&bits),
        bits,
        count: best.count as u128,
        threshold_lhs: best.lhs as u128,
        threshold_rhs: best.rhs as u128,
        slack: best.slack,
        examined: 1u64 << free_cells,
    };
    reverify(eq, b, &space, &report)?;
    Ok(report)
}

/// Rechecks a report with the counting oracle.
fn reverify(eq: &LinearEquation, b: usize, space: &Space, report: &SearchReport) -> Result<()> {
    let budget = Budget::unlimited();
    let (count, holds) = match report.kind {
        SearchKind::Sidorenko => {
            let set = report.set(space)?;
            (
                count_solutions_in_set(eq, b, &set, budget)?,
                sidorenko_holds_exact(eq, b, &set, budget)?,
            )
        }
        SearchKind::Common => {
            let chi = report.coloring(space)?;
            (
                monochromatic_count(eq, b, &chi, budget)?,
                common_holds_exact(eq, b, &chi, budget)?,
            )
        }
    };
    if count != BigUint::from(report.count) || holds == report.found {
        return Err(Error::NumericalInconsistency(format!(
            "search result {} disagrees with the counting oracle",
            report.witness
        )));
    }
    Ok(())
}

/// Exhaustive search over all `A ⊆ GF(q)^n` for `q^n |sol(A)| < |A|^{k+ℓ}`.
pub fn exhaustive_sidorenko_search(
    eq: &LinearEquation,
    b: usize,
    n: usize,
    options: SearchOptions,
) -> Result<SearchReport> {
    exhaustive(eq, b, n, SearchKind::Sidorenko, options)
}

/// Exhaustive search over all 2-colorings of `GF(q)^n` for
/// `2^{K-1} |mono(χ)| < q^{n(K-1)}`.
pub fn exhaustive_common_search(
    eq: &LinearEquation,
    b: usize,
    n: usize,
    options: SearchOptions,
) -> Result<SearchReport> {
    exhaustive(eq, b, n, SearchKind::Common, options)
}

const RANDOM_BATCH: u64 = 256;

/// Random sets or colorings: even trials at density 1/2, odd trials at a
/// random density. Returns the first violation in trial order.
pub fn random_search(
    eq: &LinearEquation,
    b: usize,
    n: usize,
    trials: u64,
    seed: u64,
    kind: SearchKind,
    budget: Budget,
) -> Result<Option<SearchReport>> {
    let space = Space::new(eq.field().clone(), n)?;
    check_rhs(eq, &space, b)?;
    let cells = space.size();
    budget.check(crate::budget::saturating_pow(cells as u128, eq.k() - 1))?;
    let total = eq.total_vars() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    while done < trials {
        let batch = RANDOM_BATCH.min(trials - done);
        let samples: Vec<Vec<bool>> = (done..done + batch)
            .map(|trial| {
                let density = if trial % 2 == 0 {
                    0.5
                } else {
                    rng.random::<f64>()
                };
                (0..cells).map(|_| rng.random::<f64>() < density).collect()
            })
            .collect();
        let evaluated: Vec<Result<Option<SearchReport>>> = samples
            .into_par_iter()
            .map(|bits| evaluate_sample(eq, b, &space, bits, kind, total, n))
            .collect();
        for outcome in evaluated {
            if let Some(report) = outcome? {
                reverify(eq, b, &space, &report)?;
                return Ok(Some(report));
            }
        }
        done += batch;
    }
    Ok(None)
}

fn evaluate_sample(
    eq: &LinearEquation,
    b: usize,
    space: &Space,
    bits: Vec<bool>,
    kind: SearchKind,
    total: u32,
    n: usize,
) -> Result<Option<SearchReport>> {
    let budget = Budget::unlimited();
    let cells = BigUint::from(space.size());
    let (count, lhs, rhs) = match kind {
        SearchKind::Sidorenko => {
            let set = PointSet::from_bits(space.clone(), bits.clone())?;
            let count = count_solutions_in_set(eq, b, &set, budget)?;
            let lhs = &cells * &count;
            (count, lhs, BigUint::from(set.len()).pow(total))
        }
        SearchKind::Common => {
            let chi = TwoColoring::from_bits(space.clone(), bits.clone())?;
            let count = monochromatic_count(eq, b, &chi, budget)?;
            let lhs = (BigUint::from(1u8) << (total - 1)) * &count;
            (count, lhs, cells.pow(total - 1))
        }
    };
    if lhs >= rhs {
        return Ok(None);
    }
    let narrow = |v: &BigUint| -> Result<u128> {
        u128::try_from(v)
            .map_err(|_| Error::NumericalInconsistency("count exceeds 128 bits".into()))
    };
    let (count, lhs, rhs) = (narrow(&count)?, narrow(&lhs)?, narrow(&rhs)?);
    Ok(Some(SearchReport {
        kind,
        n,
        found: true,
        witness: bits_to_hex(&bits),
        bits,
        count,
        threshold_lhs: lhs,
        threshold_rhs: rhs,
        slack: lhs as i128 - rhs as i128,
        examined: 0,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::linear::RhsMode;

    fn eq(q: u64, coeffs: &[u32], rhs: RhsMode) -> LinearEquation {
        LinearEquation::from_codes(&Field::of_order(q).unwrap(), coeffs, rhs).unwrap()
    }

    fn opts() -> SearchOptions {
        SearchOptions::default()
    }

    #[test]
    fn three_ap_over_f5_has_a_set_witness() {
        let report =
            exhaustive_sidorenko_search(&eq(5, &[1, 3, 1], RhsMode::Zero), 0, 1, opts()).unwrap();
        assert!(report.found);
        assert!(report.slack < 0);
        let a = report
            .set(&Space::new(Field::prime(5).unwrap(), 1).unwrap())
            .unwrap();
        assert!(!sidorenko_holds_exact(
            &eq(5, &[1, 3, 1], RhsMode::Zero),
            0,
            &a,
            Budget::default()
        )
        .unwrap());
    }

    #[test]
    fn paired_equation_has_no_set_witness() {
        let report =
            exhaustive_sidorenko_search(&eq(5, &[1, 4], RhsMode::Zero), 0, 1, opts()).unwrap();
        assert!(!report.found);
        assert!(report.slack >= 0);
        assert_eq!(report.examined, 32);
    }

    #[test]
    fn common_searches() {
        let report =
            exhaustive_common_search(&eq(2, &[1, 1, 1], RhsMode::Zero), 0, 1, opts()).unwrap();
        assert!(!report.found);
        let report =
            exhaustive_common_search(&eq(2, &[1, 1], RhsMode::NonzeroB), 1, 1, opts()).unwrap();
        assert!(report.found);
        assert_eq!(report.count, 0);
        assert_eq!(report.witness, "0x1");
    }

    #[test]
    fn incremental_counts_match_the_oracle() {
        // every state along the Gray walk is checked against direct counting
        let e = eq(3, &[1, 2, 2, 1], RhsMode::Zero).with_free_count(1);
        let space = Space::new(e.field().clone(), 2).unwrap();
        let tables = Tables::new(&space, 0);
        let mut state = SetState::new(&e, &space);
        let mut mask = 0u64;
        for i in 1u64..(1 << 9) {
            let cell = i.trailing_zeros() as usize;
            mask ^= 1 << cell;
            state.flip(cell, &tables);
            let set = PointSet::from_mask(space.clone(), mask as u128).unwrap();
            let direct =
                count_solutions_in_set(&e.with_free_count(0), 0, &set, Budget::default()).unwrap();
            assert_eq!(BigUint::from(state.core as u64), direct, "mask {mask:#x}");
        }
    }

    #[test]
    fn too_many_cells() {
        let e = eq(5, &[1, 4], RhsMode::Zero);
        assert!(matches!(
            exhaustive_sidorenko_search(&e, 0, 2, opts()),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn random_search_examples() {
        let e = eq(5, &[1, 3, 1], RhsMode::Zero);
        assert_eq!(
            random_search(&e, 0, 2, 0, 1, SearchKind::Sidorenko, Budget::default()).unwrap(),
            None
        );
        let e = eq(5, &[1, 4], RhsMode::Zero);
        assert_eq!(
            random_search(&e, 0, 2, 300, 1, SearchKind::Sidorenko, Budget::default()).unwrap(),
            None
        );
        let e = eq(5, &[1, 3, 1], RhsMode::Zero);
        let a = random_search(&e, 0, 1, 500, 9, SearchKind::Sidorenko, Budget::default()).unwrap();
        let b = random_search(&e, 0, 1, 500, 9, SearchKind::Sidorenko, Budget::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.unwrap().slack < 0);
    }
}
