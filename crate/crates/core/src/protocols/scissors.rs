use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::fock::{FockState, ModeRegistry, ModeRole, NORM_TOL};
use crate::measurement::{herald_patterns, Detector, HeraldedEnsemble};
use crate::optics::{apply_all, BeamSplitter, Element, PhaseShifter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScissorsOutcome {
    pub clicks: BTreeMap<String, u32>,
    /// Whether a π shift was applied to the output mode for this pattern.
    pub corrected: bool,
    pub announcement_probability: f64,
    /// Probability that this pattern is reported with no photon lost.
    pub success_probability: f64,
    pub output: HeraldedEnsemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScissorsReport {
    pub eta: f64,
    pub alphas: Vec<Complex64>,
    pub patterns: Vec<ScissorsOutcome>,
    pub announcement_probability: f64,
    pub success_probability: f64,
    /// Amplitudes on |0⟩_b, |1⟩_b left by a loss-free D1 herald.
    pub output_amplitudes: Option<Vec<Complex64>>,
    pub output: HeraldedEnsemble,
}

/// One quantum scissors: the input photon-number superposition Σ α_n |n⟩ in
/// mode c, one photon in ancilla a, vacuum in b. Heralds on exactly one click
/// at D1 (on a) or D2 (on c) and corrects the D2 sign with a π shift on b.
pub fn run_scissors(alphas: &[Complex64], eta: f64) -> Result<ScissorsReport> {
    if alphas.is_empty() {
        return Err(SimError::InvalidParameter(
            "scissors input needs at least one amplitude".into(),
        ));
    }
    let n2: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(SimError::NotNormalized { norm_sqr: n2 });
    }
    let mut reg = ModeRegistry::new();
    let a = reg.add("a", ModeRole::AncillaA, "A", "")?;
    let b = reg.add("b", ModeRole::OutputB, "B", "")?;
    let c = reg.add("c", ModeRole::InputC, "C", "")?;
    let reg = Arc::new(reg);
    let cutoff = alphas.len() as u32;

    let input = FockState::from_components(
        reg,
        cutoff,
        alphas.iter().enumerate().map(|(n, &amp)| (vec![1, 0, n as u32], amp)),
    )?;
    let elements: [Element; 2] = [
        BeamSplitter::balanced(a, b)?.into(),
        BeamSplitter::balanced(a, c)?.into(),
    ];
    let evolved = apply_all(&input, &elements)?;

    let detectors = [Detector::new("D1", vec![a], eta)?, Detector::new("D2", vec![c], eta)?];
    let heralding = herald_patterns(&evolved, &detectors, |p| p.total() == 1)?;
    let b_rest = heralding.mode_map[b.index()].expect("output mode is never measured");

    let mut patterns = Vec::new();
    let mut output_amplitudes = None;
    for ph in &heralding.patterns {
        let corrected = ph.pattern.clicks(1) == 1;
        let ensemble = if corrected {
            let shift = PhaseShifter::new(b_rest, PI);
            ph.ensemble.map_states(|s| shift.apply(s))?
        } else {
            ph.ensemble.clone()
        };
        let loss_free = ensemble.branches.iter().filter(|br| br.true_counts == ph.pattern.0);
        let success_probability = loss_free.clone().map(|br| br.probability).fold(0.0, |acc, p| acc + p);
        if !corrected {
            if let Some(br) = loss_free.clone().next() {
                output_amplitudes = Some(vec![br.state.amplitude(&[0]), br.state.amplitude(&[1])]);
            }
        }
        patterns.push(ScissorsOutcome {
            clicks: ph.pattern.describe(&detectors),
            corrected,
            announcement_probability: ensemble.total_probability(),
            success_probability,
            output: ensemble,
        });
    }
    let output = HeraldedEnsemble::merge(patterns.iter().map(|p| &p.output));
    Ok(ScissorsReport {
        eta,
        alphas: alphas.to_vec(),
        announcement_probability: patterns
            .iter()
            .map(|p| p.announcement_probability)
            .fold(0.0, |acc, p| acc + p),
        success_probability: patterns
            .iter()
            .map(|p| p.success_probability)
            .fold(0.0, |acc, p| acc + p),
        patterns,
        output_amplitudes,
        output,
    })
}
