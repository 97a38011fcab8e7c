use serde::{Deserialize, Serialize};

use super::channel::bit_energy;

/// Running count of transmitted bits and the energy they cost.
///
/// Both fields only ever grow. A bit sent at crossover `c` adds
/// `bit_energy(c) = 4(c - 1/2)^2` to `energy`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub bits_sent: u64,
    pub energy: f64,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one bit transmitted over a channel with the given crossover.
    #[inline]
    pub fn charge(&mut self, crossover: f64) {
        self.bits_sent += 1;
        self.energy += bit_energy(crossover);
    }

    /// Records `count` bits at the same crossover.
    #[inline]
    pub fn charge_many(&mut self, count: u64, crossover: f64) {
        self.bits_sent += count;
        self.energy += count as f64 * bit_energy(crossover);
    }

    /// Records `count` bits over the noiseless channel (energy 1 each).
    #[inline]
    pub fn charge_noiseless(&mut self, count: u64) {
        self.charge_many(count, 0.0);
    }

    pub fn merge(&mut self, other: &CostLedger) {
        self.bits_sent += other.bits_sent;
        self.energy += other.energy;
    }

    /// Difference `self - earlier`, for measuring a sub-step.
    pub fn since(&self, earlier: &CostLedger) -> CostLedger {
        CostLedger {
            bits_sent: self.bits_sent - earlier.bits_sent,
            energy: self.energy - earlier.energy,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charges_accumulate() {
        let mut ledger = CostLedger::new();
        ledger.charge(0.5);
        ledger.charge(0.0);
        ledger.charge_many(3, 0.3);
        assert_eq!(ledger.bits_sent, 5);
        assert!((ledger.energy - (1.0 + 3.0 * 0.16)).abs() < 1e-12);

        let before = ledger;
        ledger.charge_noiseless(2);
        let delta = ledger.since(&before);
        assert_eq!(delta.bits_sent, 2);
        assert!((delta.energy - 2.0).abs() < 1e-12);
    }
}
