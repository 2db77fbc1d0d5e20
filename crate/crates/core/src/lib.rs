//! Subtyping for recursive binary session types.
//!
//! Three decision procedures share one syntax layer:
//!
//! * [`inductive`]: Gay and Hole's proof-tree search, instrumented.
//! * [`memo`]: the same search memoized on whole judgements.
//! * [`oracle`]: a coinductive check by type simulation, polynomial in the
//!   input sizes and used as ground truth for the other two.
//!
//! [`subterms`] computes the top-down and bottom-up subterm sets that bound
//! the search space, and [`worstgen`] builds the input family on which both
//! inductive procedures blow up factorially.

pub mod cli;
pub mod graph;
pub mod inductive;
pub mod memo;
pub mod oracle;
pub mod random;
mod stack;
pub mod subterms;
pub mod syntax;
pub mod textio;
pub mod worstgen;

pub use inductive::{
    derive, derive_with, CheckError, CheckReport, Claim, Context, DerivationNode, DeriveOptions,
    Judgement, RuleName, Verdict,
};
pub use memo::{check_memo, check_memo_with, MemoOptions, MemoState};
pub use oracle::{check_oracle, coinductive_equal, simulates};
pub use subterms::{sub_bottom_up, sub_pair, sub_top_down, unfold, TypeSet};
pub use syntax::{
    alpha_canonical, alpha_equal, free_vars, nesting_depth, size, substitute, validate,
    validate_closed, Ident, Label, SessionType,
};
pub use textio::{encode_judgement, parse, print, ParseError};
pub use worstgen::{bench, gen_tk, gen_v, Algorithm, BenchRow, Measure};
