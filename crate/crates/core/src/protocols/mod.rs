//! Quantum-scissors circuits and the qudit teleportation protocol built from them.

mod scissors;
mod teleport;

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::fock::{FockState, ModeId, ModeRegistry, ModeRole, QuditVector};
use crate::measurement::HeraldedEnsemble;
use crate::optics::ModePermutation;

pub use scissors::{run_scissors, ScissorsOutcome, ScissorsReport};
pub use teleport::{
    closed_form_fidelity, teleport_qudit, teleport_qudit_to_basis, PatternRecord, ScissorsSetup, TeleportationReport,
    Teleporter, TeleporterOptions,
};

/// Amplitudes outside the single-photon subspace above this make [`mix`] fail.
pub const SUBSPACE_TOL: f64 = 1e-10;

/// Σ_l γ_l m_l†|0⟩ over the given path modes.
pub fn transcribe(
    qudit: &QuditVector,
    registry: Arc<ModeRegistry>,
    modes: &[ModeId],
    cutoff: u32,
) -> Result<FockState> {
    if modes.len() != qudit.dim() {
        return Err(SimError::DimensionMismatch {
            expected: modes.len(),
            actual: qudit.dim(),
        });
    }
    for &m in modes {
        registry.check(m)?;
    }
    let n = registry.len();
    FockState::from_components(
        registry,
        cutoff.max(1),
        modes.iter().zip(qudit.gammas()).map(|(m, g)| {
            let mut occ = vec![0; n];
            occ[m.index()] = 1;
            (occ, *g)
        }),
    )
}

/// Reads the qudit back out of a single photon spread over `modes`. All other
/// modes must be empty.
pub fn mix(state: &FockState, modes: &[ModeId]) -> Result<QuditVector> {
    for &m in modes {
        state.registry().check(m)?;
    }
    let mut gammas = vec![Complex64::default(); modes.len()];
    for (occ, a) in state.components() {
        let slot = if occ.total() == 1 {
            modes.iter().position(|&m| occ.count(m) == 1)
        } else {
            None
        };
        match slot {
            Some(l) => gammas[l] += a,
            None if a.norm() > SUBSPACE_TOL => return Err(SimError::SubspaceViolation { amplitude: a.norm() }),
            None => {}
        }
    }
    QuditVector::from_unit(gammas, SUBSPACE_TOL)
}

/// Modes of a single beam `o` carrying `d` OAM species, plus the `d` separate
/// paths `c_l` a sorter routes them to.
pub fn sorter_registry(d: usize) -> Result<Arc<ModeRegistry>> {
    let mut reg = ModeRegistry::new();
    for l in 0..d {
        reg.add(format!("o{l}"), ModeRole::Other, "o", format!("OAM:{l}"))?;
    }
    for l in 0..d {
        reg.add(format!("c{l}"), ModeRole::InputC, format!("C{l}"), format!("OAM:{l}"))?;
    }
    Ok(Arc::new(reg))
}

/// Mode sorter on a [`sorter_registry`]: OAM species `l` of the beam goes to
/// path `c_l`. Its inverse is the mixer.
pub fn mode_sorter(d: usize) -> ModePermutation {
    let mapping = (0..2 * d).map(|k| if k < d { k + d } else { k - d }).collect();
    ModePermutation::new(mapping).expect("swap of two halves is a bijection")
}

/// Σ_l γ_l |1_l⟩ on the single beam of a [`sorter_registry`].
pub fn single_beam_qudit(qudit: &QuditVector) -> Result<FockState> {
    let d = qudit.dim();
    let reg = sorter_registry(d)?;
    let modes: Vec<ModeId> = (0..d).map(ModeId).collect();
    transcribe(qudit, reg, &modes, 1)
}

pub fn fidelity_against(ensemble: &HeraldedEnsemble, target: &FockState) -> Result<f64> {
    ensemble.fidelity(target)
}
