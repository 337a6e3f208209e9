//! Published accuracies, embedded so reports can show them next to
//! measured values.

use crate::problems::ProblemId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub problem: u8,
    pub lenet: f64,
    pub googlenet: f64,
    pub fleuret: f64,
    pub human: f64,
    pub difference: &'static str,
}

const fn r(problem: u8, lenet: f64, googlenet: f64, fleuret: f64, human: f64, difference: &'static str) -> Reference {
    Reference {
        problem,
        lenet,
        googlenet,
        fleuret,
        human,
        difference,
    }
}

/// Per-problem accuracies: LeNet, GoogLeNet, Fleuret boosting, humans.
pub const PUBLISHED: [Reference; 20] = [
    r(1, 0.57, 0.50, 0.98, 0.98, "Compare"),
    r(5, 0.54, 0.50, 0.87, 0.90, "Compare & grouping"),
    r(6, 0.76, 0.86, 0.76, 0.70, "Compare & grouping"),
    r(7, 0.53, 0.50, 0.76, 0.90, "Compare & grouping"),
    r(8, 0.94, 0.91, 0.90, 1.00, "Compare & relative position"),
    r(15, 0.52, 0.50, 1.00, 0.95, "Compare"),
    r(16, 0.98, 0.50, 1.00, 0.78, "Compare"),
    r(17, 0.75, 0.95, 0.67, 0.78, "Compare & relative position"),
    r(19, 0.51, 0.50, 0.61, 0.98, "Compare"),
    r(20, 0.55, 0.50, 0.70, 0.98, "Compare"),
    r(21, 0.51, 0.51, 0.50, 0.83, "Compare"),
    r(22, 0.59, 0.50, 0.97, 1.00, "Compare"),
    r(2, 1.00, 1.00, 0.98, 1.00, "Relative position"),
    r(4, 0.98, 1.00, 0.93, 1.00, "Relative position"),
    r(9, 0.93, 1.00, 0.68, 0.93, "Size & relative position"),
    r(10, 0.99, 1.00, 0.94, 0.98, "Relative position"),
    r(12, 0.97, 1.00, 0.84, 0.95, "Size & relative position"),
    r(14, 0.90, 1.00, 0.73, 0.98, "Alignment"),
    r(18, 0.99, 0.99, 0.99, 0.93, "Grouping"),
    r(23, 0.87, 1.00, 0.75, 1.00, "Relative position"),
];

/// Published column averages over all twenty problems.
pub const PUBLISHED_AVERAGE: [f64; 4] = [0.77, 0.76, 0.83, 0.93];

/// Accuracies of the original generator when every shape in a scene is
/// identical: (problem, LeNet, GoogLeNet).
pub const PUBLISHED_CONTROL: [(u8, f64, f64); 3] = [(6, 0.75, 0.85), (8, 0.95, 0.90), (17, 0.77, 0.93)];

/// Problem 16 with LeNet at 64 and 128 px.
pub const PUBLISHED_RESOLUTION: [(u32, f64); 2] = [(64, 0.98), (128, 0.5)];

/// Approximate training images GoogLeNet needed for accuracy >= 0.99.
pub const PUBLISHED_SAMPLE_EFFICIENCY: [(u8, usize); 8] = [
    (2, 400),
    (4, 4000),
    (9, 4000),
    (10, 4000),
    (12, 40000),
    (14, 40000),
    (18, 4000),
    (23, 4000),
];

pub fn published(problem: ProblemId) -> &'static Reference {
    PUBLISHED
        .iter()
        .find(|r| r.problem == problem.get())
        .expect("every problem has a published row")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::category_of;

    #[test]
    fn covers_every_problem_once() {
        for id in ProblemId::all() {
            assert_eq!(PUBLISHED.iter().filter(|r| r.problem == id.get()).count(), 1);
        }
    }

    #[test]
    fn first_twelve_rows_are_the_comparison_block() {
        for (i, r) in PUBLISHED.iter().enumerate() {
            let id = ProblemId::new(u32::from(r.problem)).unwrap();
            assert_eq!(category_of(id).is_comparison(), i < 12, "problem {}", r.problem);
            assert_eq!(r.difference.starts_with("Compare"), i < 12);
        }
    }

    #[test]
    fn column_averages_round_to_the_published_ones() {
        let cols: [fn(&Reference) -> f64; 4] = [|r| r.lenet, |r| r.googlenet, |r| r.fleuret, |r| r.human];
        for (col, want) in cols.iter().zip(PUBLISHED_AVERAGE) {
            let mean = PUBLISHED.iter().map(col).sum::<f64>() / 20.0;
            assert!((mean - want).abs() <= 0.005 + 1e-9, "{mean} vs {want}");
        }
    }
}
