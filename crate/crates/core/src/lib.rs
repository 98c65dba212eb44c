//! Coinductive logic programming over rational and infinite trees.
//!
//! The crate provides first-order terms with truncation and the tree
//! metric, three flavours of unification, SLD/S-resolution, a
//! productivity checker, a coinductive engine (CoLP and the restricted
//! loop rule), decircularization of rational answers and a validation
//! harness tying them together.

pub mod answer;
pub mod coengine;
pub mod decirc;
pub mod derivation;
pub mod error;
pub mod models;
pub mod productivity;
pub mod program;
pub mod subst;
pub mod term;
pub mod testgen;
pub mod unify;
pub mod validation;

pub use error::{CircularSubstitution, Error, Result, Span};
pub use program::{check_universal, clause_instance, declared_query, parse_program, parse_query, parse_term, Clause, Program, Query};
pub use subst::Substitution;
pub use term::{distance, truncate, variant_distance, Distance, Symbol, Term, Var, VarGen};
pub use unify::{mgm, mgu, rational_unify, RationalStore, UnifierKind, UnifyOutcome};
pub use answer::{render_answer, render_substitution};
pub use coengine::{co_refute, preflight, CoAnswer, CoMode, CoRefutation, LoopFail};
pub use decirc::{decircularize, unfold, DecircStream};
pub use derivation::{refute, s_derive, Limits, Mode, Selector, Trace, TraceStatus};
pub use models::{gfp_local_check, lfp_enumerate, GroundAtomSet};
pub use productivity::{check_productive, check_productive_default, ProductivityStatus, ProductivityVerdict};
pub use validation::{build_loop_unrolling, check_lemma_4_1, check_theorem_5_1, ConvergenceReport, CorrespondenceReport};
