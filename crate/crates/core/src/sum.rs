//! Compensated (Kahan–Babuška–Neumaier) accumulation.

/// A running sum that carries its own rounding error.
///
/// Merging two accumulators keeps both compensation terms, so a tree of merges
/// loses no more than a sequential pass does.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub const ZERO: Self = Self { sum: 0.0, comp: 0.0 };

    pub fn new() -> Self {
        Self::ZERO
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::ZERO;
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

impl core::iter::Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        iter.collect()
    }
}

/// Compensated sum of a sequence.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    #[test]
    fn recovers_cancelled_digits() {
        let values = [1e16, 1.0, -1e16, 1.0];
        let naive: f64 = values.iter().sum();
        assert_eq!(naive, 1.0);
        assert_eq!(compensated_sum(values), 2.0);
    }

    #[test]
    fn merge_matches_sequential() {
        let values: Vec<f64> = (1..=1000).map(|i| 1.0 / i as f64).collect();
        let whole = compensated_sum(values.iter().copied());
        let mut left: CompensatedSum = values[..337].iter().copied().collect();
        let right: CompensatedSum = values[337..].iter().copied().collect();
        left.merge(&right);
        assert!((left.value() - whole).abs() <= 1e-15 * whole);
    }
}
