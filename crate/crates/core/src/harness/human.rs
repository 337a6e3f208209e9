use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Counts of participants who solved (`p_a`) and did not solve (`p_n`) a
/// problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HumanCohortStats {
    pub p_a: u64,
    pub p_n: u64,
    pub n: u64,
}

impl HumanCohortStats {
    pub fn new(p_a: u64, p_n: u64) -> Self {
        Self { p_a, p_n, n: p_a + p_n }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_a.checked_add(self.p_n) != Some(self.n) {
            return Err(Error::InvalidArgument(format!(
                "p_a + p_n must equal n ({} + {} != {})",
                self.p_a, self.p_n, self.n
            )));
        }
        Ok(())
    }
}

/// Expected group accuracy when solvers score 1 and non-solvers 0.5:
/// `(p_a + p_n / 2) / n`.
pub fn human_accuracy(stats: &HumanCohortStats) -> Result<f64> {
    if stats.n == 0 {
        return Err(Error::EmptyCohort);
    }
    stats.validate()?;
    // One division of exactly representable integers, so the result is the
    // correctly rounded value of the rational.
    Ok((2 * stats.p_a + stats.p_n) as f64 / (2 * stats.n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(human_accuracy(&HumanCohortStats::new(20, 0)).unwrap(), 1.0);
        assert_eq!(human_accuracy(&HumanCohortStats::new(0, 20)).unwrap(), 0.5);
        assert_eq!(human_accuracy(&HumanCohortStats::new(13, 7)).unwrap(), 0.825);
        assert_eq!(human_accuracy(&HumanCohortStats::new(3, 1)).unwrap(), 0.875);
    }

    #[test]
    fn empty_and_inconsistent_cohorts_are_errors() {
        assert!(matches!(human_accuracy(&HumanCohortStats::default()), Err(Error::EmptyCohort)));
        let bad = HumanCohortStats { p_a: 1, p_n: 1, n: 3 };
        assert!(matches!(human_accuracy(&bad), Err(Error::InvalidArgument(_))));
    }
}
