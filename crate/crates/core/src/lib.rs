//! Construct, check and transform C-systems over finite windows.
//!
//! * [`kernel`]: the abstract interface, derived operations and axiom checks;
//! * [`instances`]: concrete instances and fragment enumeration;
//! * [`subsystems`]: windowed closure of `(B, B̃)` and morphism membership;
//! * [`congruence`]: regular congruences, extension to morphisms, quotients;
//! * [`checker`]: named suites with uniform reports;
//! * [`cli`]: the command-line front end.

pub mod checker;
pub mod cli;
pub mod congruence;
pub mod exec;
pub mod instances;
pub mod kernel;
pub mod subsystems;

pub use exec::Exec;
