//! SOT-MTJ popcount bank and comparator.
//!
//! The bank has one SOT-MTJ per input bit. After a reset every element is in
//! the low-resistance state; a `1` on input `i` switches element `i` high.
//! The comparator starts high-resistance and trips low when enough bank
//! elements remain low-resistance to push the summed current over its
//! switching threshold. Both are modeled digitally.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PeripheralError {
    #[error("popcount bank needs at least one element")]
    EmptyBank,
    #[error("{bits} bits do not fit a bank of {capacity} elements")]
    OverCapacity { bits: usize, capacity: usize },
    #[error("comparator must be initialized to the high-resistance state before evaluation")]
    UninitializedComparator,
    #[error("cannot compare {compared} bits with {mismatches} mismatches")]
    InconsistentCount { compared: usize, mismatches: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopcountBank {
    states: Vec<bool>,
}

impl PopcountBank {
    pub fn new(n: usize) -> Result<Self, PeripheralError> {
        if n == 0 {
            return Err(PeripheralError::EmptyBank);
        }
        Ok(Self { states: vec![false; n] })
    }

    pub fn capacity(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[bool] {
        &self.states
    }

    /// Negative reset voltage on all elements: everything back to low resistance.
    pub fn reset(&mut self) {
        self.states.iter_mut().for_each(|s| *s = false);
    }

    pub fn accumulate(&mut self, bits: &[bool]) -> Result<(), PeripheralError> {
        if bits.len() > self.states.len() {
            return Err(PeripheralError::OverCapacity { bits: bits.len(), capacity: self.states.len() });
        }
        for (state, &bit) in self.states.iter_mut().zip(bits) {
            *state |= bit;
        }
        Ok(())
    }

    pub fn high_count(&self) -> usize {
        self.states.iter().filter(|&&s| s).count()
    }

    pub fn low_count(&self) -> usize {
        self.states.len() - self.high_count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComparatorCell {
    state: bool,
}

impl Default for ComparatorCell {
    fn default() -> Self {
        Self::new()
    }
}

impl ComparatorCell {
    pub fn new() -> Self {
        Self { state: true }
    }

    pub fn state(&self) -> bool {
        self.state
    }

    pub fn initialize(&mut self) {
        self.state = true;
    }

    /// Trips (1 → 0) iff `count >= threshold`; the sensed output is the
    /// inverted state. The cell must be re-initialized before the next use.
    pub fn evaluate(&mut self, count: usize, threshold: usize) -> Result<bool, PeripheralError> {
        if !self.state {
            return Err(PeripheralError::UninitializedComparator);
        }
        if count >= threshold {
            self.state = false;
        }
        Ok(!self.state)
    }
}

/// Matches-versus-threshold readout for a bank loaded with XOR mismatch bits:
/// returns 1 iff `n_bits_compared − popcount >= threshold`.
pub fn evaluate_and_read(
    bank: &PopcountBank,
    comp: &mut ComparatorCell,
    n_bits_compared: usize,
    threshold: usize,
) -> Result<bool, PeripheralError> {
    let mismatches = bank.high_count();
    let matches = n_bits_compared
        .checked_sub(mismatches)
        .ok_or(PeripheralError::InconsistentCount { compared: n_bits_compared, mismatches })?;
    comp.evaluate(matches, threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopcountParams {
    pub block_bits: usize,
    pub block_energy_pj: f64,
    pub block_latency_ns: f64,
}

impl Default for PopcountParams {
    fn default() -> Self {
        Self { block_bits: 100, block_energy_pj: 7.5, block_latency_ns: 10.0 }
    }
}

impl PopcountParams {
    pub fn blocks(&self, n_bits: usize) -> usize {
        n_bits.div_ceil(self.block_bits)
    }
}

/// Energy (pJ) and latency (ns) of one popcount over `n_bits`, serially
/// reusing a single bank; partial blocks are charged in full.
pub fn popcount_cost(n_bits: usize, p: &PopcountParams) -> (f64, f64) {
    let blocks = p.blocks(n_bits) as f64;
    (blocks * p.block_energy_pj, blocks * p.block_latency_ns)
}

/// A bank plus comparator that counts arbitrarily long bit strings block by
/// block, carrying the partial count digitally.
#[derive(Debug, Clone)]
pub struct PopcountUnit {
    bank: PopcountBank,
    comparator: ComparatorCell,
    blocks_used: u64,
    comparisons: u64,
}

impl PopcountUnit {
    pub fn new(block_bits: usize) -> Result<Self, PeripheralError> {
        Ok(Self { bank: PopcountBank::new(block_bits)?, comparator: ComparatorCell::new(), blocks_used: 0, comparisons: 0 })
    }

    pub fn count(&mut self, bits: &[bool]) -> Result<usize, PeripheralError> {
        let mut total = 0;
        for block in bits.chunks(self.bank.capacity()) {
            self.bank.reset();
            self.bank.accumulate(block)?;
            total += self.bank.high_count();
            self.blocks_used += 1;
        }
        Ok(total)
    }

    pub fn compare(&mut self, count: usize, threshold: usize) -> Result<bool, PeripheralError> {
        self.comparator.initialize();
        self.comparisons += 1;
        self.comparator.evaluate(count, threshold)
    }

    pub fn blocks_used(&self) -> u64 {
        self.blocks_used
    }

    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reset_clears_and_is_idempotent() {
        let mut bank = PopcountBank::new(8).unwrap();
        bank.accumulate(&[true, false, true, true]).unwrap();
        bank.reset();
        assert_eq!(bank.high_count(), 0);
        let before = bank.clone();
        bank.reset();
        assert_eq!(bank, before);
        assert_eq!(PopcountBank::new(0), Err(PeripheralError::EmptyBank));
    }

    #[test]
    fn accumulate_counts_ones() {
        let mut bank = PopcountBank::new(100).unwrap();
        let bits: Vec<bool> = (0..100).map(|i| i % 5 < 2).collect();
        bank.accumulate(&bits).unwrap();
        assert_eq!(bank.high_count(), 40);
        let snapshot = bank.clone();
        bank.accumulate(&[false; 100]).unwrap();
        assert_eq!(bank, snapshot);
        assert_eq!(
            bank.accumulate(&[false; 101]),
            Err(PeripheralError::OverCapacity { bits: 101, capacity: 100 })
        );
    }

    #[test]
    fn comparator_small_cases() {
        let mut bank = PopcountBank::new(9).unwrap();
        let mut comp = ComparatorCell::new();
        assert!(evaluate_and_read(&bank, &mut comp, 9, 5).unwrap());
        assert_eq!(evaluate_and_read(&bank, &mut comp, 9, 5), Err(PeripheralError::UninitializedComparator));

        bank.accumulate(&[true; 9]).unwrap();
        comp.initialize();
        assert!(!evaluate_and_read(&bank, &mut comp, 9, 5).unwrap());
    }

    #[test]
    fn comparator_full_grid_matches_definition() {
        for m in 0..=100usize {
            let mut bank = PopcountBank::new(100).unwrap();
            let bits: Vec<bool> = (0..100).map(|i| i < m).collect();
            bank.accumulate(&bits).unwrap();
            for t in 0..=100usize {
                let mut comp = ComparatorCell::new();
                let out = evaluate_and_read(&bank, &mut comp, 100, t).unwrap();
                assert_eq!(out, 100 - m >= t, "m={m} t={t}");
            }
        }
    }

    #[test]
    fn block_costs() {
        let p = PopcountParams::default();
        assert_eq!(popcount_cost(100, &p), (7.5, 10.0));
        assert_eq!(popcount_cost(1, &p), (7.5, 10.0));
        assert_eq!(popcount_cost(250, &p), (22.5, 30.0));
    }

    #[test]
    fn unit_counts_across_blocks() {
        let mut unit = PopcountUnit::new(100).unwrap();
        let bits: Vec<bool> = (0..257).map(|i| i % 3 == 0).collect();
        assert_eq!(unit.count(&bits).unwrap(), bits.iter().filter(|&&b| b).count());
        assert_eq!(unit.blocks_used(), 3);
        assert!(unit.compare(10, 10).unwrap());
        assert!(!unit.compare(9, 10).unwrap());
    }
}
