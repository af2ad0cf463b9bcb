//! Few-photon Fock-basis simulation of linear-optical circuits, with exact
//! heralding statistics for quantum scissors and photonic qudit teleportation.
//!
//! The layers build on each other:
//!
//! * [`fock`]: sparse states, ladder operators, inner products.
//! * [`optics`]: beam splitters, phase shifters, mode permutations.
//! * [`measurement`]: number-resolving detectors with finite efficiency and
//!   heralded conditional ensembles.
//! * [`protocols`]: the scissors circuit, the d-path teleporter and its metrics.
//! * [`oracle`]: a dense brute-force engine used to cross-check everything.
//! * [`verify`]: the end-to-end check suite behind `scissorsim verify`.

pub mod error;
pub mod fock;
pub mod measurement;
pub mod optics;
pub mod oracle;
pub mod protocols;
pub mod verify;

pub use error::{Result, SimError};
pub use fock::{FockState, ModeId, ModeLabel, ModeRegistry, ModeRole, Occupation, QuditVector};
pub use measurement::{DetectionPattern, Detector, HeraldedEnsemble};
pub use optics::{BeamSplitter, Element, ModePermutation, PhaseShifter};
pub use protocols::{run_scissors, teleport_qudit, teleport_qudit_to_basis, TeleportationReport, Teleporter};
