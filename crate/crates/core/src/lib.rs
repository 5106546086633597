//! Quantitative behavioural reasoning for call-by-push-value with algebraic
//! effects.
//!
//! Programs are evaluated by a CK machine into effect trees ([`machine`]).
//! Quantitative modalities ([`quant`]) collapse trees of truth values into a
//! single degree of satisfaction, which the formula evaluator ([`logic`])
//! uses to give every closed term a certified interval of satisfaction for
//! every formula. [`equiv`] builds bounded preorder checks, the relator and
//! simulation checks, and the randomized law suites on top.
//!
//! The crate is `no_std` (it needs `alloc`). File handling and the command
//! line live in the companion `cbpv-quant` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod effects;
pub mod equiv;
pub mod lang;
pub mod logic;
pub mod machine;
pub mod quant;

pub use effects::{Arity, EffectSignature, Op, OpDescriptor};
pub use lang::{ComType, Comp, Label, Name, Term, Type, ValType, Value};
pub use machine::{EffectTree, Tree};
pub use quant::{Interval, ModalitySpec, Truth, TruthSpace};
