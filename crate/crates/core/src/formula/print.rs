//! Canonical text form: binary connectives are always parenthesized, unary
//! operators are prefix with a trailing space.

use std::fmt;

use super::{EqFormula, PropFormula};

impl fmt::Display for EqFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EqFormula::Atom(i, j) => write!(f, "x{i} = x{j}"),
            EqFormula::CardExact(k) => write!(f, "card = {k}"),
            EqFormula::Not(a) => write!(f, "~ {a}"),
            EqFormula::And(a, b) => write!(f, "({a} & {b})"),
            EqFormula::Or(a, b) => write!(f, "({a} | {b})"),
            EqFormula::Implies(a, b) => write!(f, "({a} -> {b})"),
            EqFormula::Iff(a, b) => write!(f, "({a} <-> {b})"),
            EqFormula::Exists(v, a) => write!(f, "E x{v}. {a}"),
            EqFormula::Forall(v, a) => write!(f, "A x{v}. {a}"),
            EqFormula::Diamond(a) => write!(f, "<> {a}"),
            EqFormula::Box(a) => write!(f, "[] {a}"),
        }
    }
}

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropFormula::Var(p) => write!(f, "p{p}"),
            PropFormula::Not(a) => write!(f, "~ {a}"),
            PropFormula::And(a, b) => write!(f, "({a} & {b})"),
            PropFormula::Or(a, b) => write!(f, "({a} | {b})"),
            PropFormula::Implies(a, b) => write!(f, "({a} -> {b})"),
            PropFormula::Iff(a, b) => write!(f, "({a} <-> {b})"),
            PropFormula::Diamond(a) => write!(f, "<> {a}"),
            PropFormula::Box(a) => write!(f, "[] {a}"),
        }
    }
}
