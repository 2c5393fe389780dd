//! Deterministic data-parallel enumeration.
//!
//! Index ranges are cut into blocks whose boundaries depend only on the
//! range and the block size, never on the thread count. Results come back
//! in block order, and the first error in block order wins.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub(crate) const DEFAULT_BLOCK: u64 = 4096;

pub(crate) fn blocks(range: Range<u64>, block: u64) -> Vec<Range<u64>> {
    let block = block.max(1);
    let mut out = Vec::new();
    let mut start = range.start;
    while start < range.end {
        let end = start.saturating_add(block).min(range.end);
        out.push(start..end);
        start = end;
    }
    out
}

pub(crate) fn map_blocks<T, F>(range: Range<u64>, block: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<u64>) -> Result<T> + Sync + Send,
{
    let results: Vec<Result<T>> = blocks(range, block).into_par_iter().map(f).collect();
    results.into_iter().collect()
}

/// Row-major odometer over `[lo, hi]^dims`, started at a flat index.
#[derive(Clone, Debug)]
pub(crate) struct Odometer {
    lo: i64,
    hi: i64,
    current: Vec<i64>,
}

impl Odometer {
    pub(crate) fn starting_at(lo: i64, hi: i64, dims: usize, mut index: u64) -> Self {
        let width = (hi - lo + 1) as u64;
        let mut current = vec![lo; dims];
        for slot in current.iter_mut().rev() {
            *slot = lo + (index % width) as i64;
            index /= width;
        }
        Odometer { lo, hi, current }
    }

    pub(crate) fn get(&self) -> &[i64] {
        &self.current
    }

    pub(crate) fn advance(&mut self) {
        for slot in self.current.iter_mut().rev() {
            if *slot < self.hi {
                *slot += 1;
                return;
            }
            *slot = self.lo;
        }
    }
}

/// `width^dims` if it fits in a u128.
pub(crate) fn cube_size(width: u64, dims: usize) -> Option<u128> {
    (width as u128).checked_pow(dims as u32)
}

/// Flat size and center index of the cube `[−j_max, j_max]^dims`. The
/// center is the zero vector; indices above it are exactly the vectors whose
/// first nonzero coordinate is positive.
pub(crate) fn centered_cube(j_max: u64, dims: usize) -> Result<(u64, u64)> {
    let width = 2 * j_max + 1;
    let size = cube_size(width, dims)
        .filter(|&s| s <= u64::MAX as u128)
        .ok_or(Error::BudgetExceeded {
            requested: u128::MAX,
            budget: u64::MAX,
        })? as u64;
    Ok((size, (size - 1) / 2))
}

pub(crate) fn sup_norm(j: &[i64]) -> u64 {
    j.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odometer_matches_flat_index() {
        let mut odo = Odometer::starting_at(-2, 2, 3, 0);
        for idx in 0..125u64 {
            let fresh = Odometer::starting_at(-2, 2, 3, idx);
            assert_eq!(odo.get(), fresh.get());
            odo.advance();
        }
        assert_eq!(Odometer::starting_at(-2, 2, 3, 62).get(), &[0, 0, 0]);
    }

    #[test]
    fn blocks_cover_range_in_order() {
        let b = blocks(3..20, 5);
        assert_eq!(b, vec![3..8, 8..13, 13..18, 18..20]);
        assert!(blocks(4..4, 5).is_empty());
    }

    #[test]
    fn first_error_in_block_order_wins() {
        use crate::error::Error;
        let r: Result<Vec<u64>> = map_blocks(0..100, 10, |r| {
            if r.start >= 30 {
                Err(Error::InvalidArgument(format!("{}", r.start)))
            } else {
                Ok(r.start)
            }
        });
        assert_eq!(r.unwrap_err(), Error::InvalidArgument("30".into()));
    }
}
