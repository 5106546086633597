//! Truth spaces and quantitative modalities.
//!
//! A [`ModalitySpec`] turns a tree of truth values into one truth value. On
//! partially explored trees the result is an [`Interval`]: `Unknown` leaves
//! are read as `bot` for the lower bound and as `top` for the upper one.

mod denote;
mod modality;
mod space;

pub use denote::{denote, denote_at_depth, denote_interval, fold_interval, leaf_substitute, lift, Interval};
pub use modality::{make_error_lift, make_nondet_variants, Combinator, ModalityError, ModalitySpec, Rule};
pub use space::{NotInSpace, StateSet, StoreConfig, StoreError, Truth, TruthSpace};

#[cfg(test)]
mod laws;
