//! Execution-time opacity analysis for parametric timed automata.
//!
//! Durations of runs reaching a final location are synthesized either with
//! a zone-graph semi-algorithm (any number of clocks) or exactly, for one
//! clock, through an automaton whose transitions are labelled by parametric
//! zones. Opacity questions compare the durations of runs that visit a
//! private location with those of runs that avoid it.

pub mod geometry;
pub mod model;
pub mod oracle;
pub mod zonegraph;
pub mod arith;
pub mod pet;
pub mod opacity;
pub mod registry;
