//! Decision procedures for the modal logic of equality over categories of
//! sets, a finite Kripke frame engine, and the machinery that compares the
//! two on propositional validity questions.

pub mod control;
pub mod eqcard;
pub mod error;
pub mod formula;
pub mod frames;
pub mod partition;
pub mod validity;

pub use eqcard::{
    can_step, eliminate, evaluate, successors, threshold, to_normal_formula, AbstractState, CategoryKind, EqCardTable,
    Morphisms, Regime, Size, SizeClass, TruncatedState,
};
pub use error::{Error, ParseError, Result};
pub use frames::{
    axiom, frame_valid, frame_valid_at, mk_frame, model_check, Countermodel, Exactness, Family, FiniteFrame, Outcome,
    TheoryId, Valuation, Verdict, Witness,
};
pub use formula::{expand_sigma, parse_eq, parse_eq_with, parse_prop, EqFormula, ParseOptions, PropFormula, SigmaKind};
pub use partition::{coarsenings, enumerate_partitions, kernel_partition, refines, SetPartition};
pub use validity::{
    decide_in_theory, expected_theory, oracle_decide, oracle_state_frame, reproduce_table, Lang, TableReport, WorldSpec,
};
pub use control::{
    check_control, independent_buttons, labeling_substitution, verify_labeling, Certificate, ControlClaim, ControlKind,
    Labeling,
};
