//! Inputs shared by the criterion targets.

use modeq::{parse_eq, EqFormula};

/// Equality formulas of increasing modal and quantifier nesting.
pub fn eq_workload() -> Vec<(&'static str, EqFormula)> {
    [
        ("atom", "<> x0 = x1"),
        ("card", "[] <> card = 3"),
        ("exists", "E x2. <> (x2 = x0 & ~ x2 = x1)"),
        ("nested", "[] (<> card = 2 -> <> [] (x0 = x1 | card = 4))"),
        ("sigma", "<> [] A x2. (x2 = x0 | x2 = x1 | card = 5)"),
    ]
    .into_iter()
    .map(|(name, text)| (name, parse_eq(text).expect("workload parses")))
    .collect()
}
