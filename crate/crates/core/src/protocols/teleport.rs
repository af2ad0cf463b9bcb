//! Qudit teleportation with one quantum scissors per path.
//!
//! Scissors `i` owns three spatial paths `A_i`, `B_i`, `C_i`. The transcribed
//! qudit photon enters on `C_i`, the ancilla photon on `A_i`. BS1 couples
//! `A_i`/`B_i`, then BS2 couples `A_i`/`C_i`. Detector D1 watches `A_i`, D2
//! watches `C_i`. A run is accepted when every scissors reports exactly one
//! click; a D2 click flips the sign of that branch, undone by a π shift on the
//! output mode.
//!
//! When the ancilla photons are prepared in a different transverse species
//! than the input, every path carries both species, splitters act on each
//! species separately and detectors count both without telling them apart.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::fock::{FockState, ModeId, ModeRegistry, ModeRole, QuditVector};
use crate::measurement::{herald_patterns, measure_distribution, DetectionPattern, Detector, HeraldedEnsemble};
use crate::optics::{apply_all, BeamSplitter, Element, PhaseShifter};

use super::transcribe;

/// 1 − η(1−η): the closed-form teleportation fidelity for efficiency η.
pub fn closed_form_fidelity(eta: f64) -> f64 {
    1.0 - eta * (1.0 - eta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScissorsSetup {
    /// Qudit path `c_i` (input species).
    pub input: ModeId,
    /// Ancilla photon mode on path `A_i` (target species).
    pub ancilla: ModeId,
    /// Output mode on path `B_i` (target species).
    pub output: ModeId,
    /// Index of D1 (path `A_i`) in the detector list.
    pub d1: usize,
    /// Index of D2 (path `C_i`) in the detector list.
    pub d2: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TeleporterOptions {
    /// Builds the first scissors' BS2 with the sign on the wrong port. Only
    /// useful to check that verification notices.
    pub flip_bs2_sign: bool,
}

#[derive(Debug, Clone)]
pub struct Teleporter {
    d: usize,
    registry: Arc<ModeRegistry>,
    setups: Vec<ScissorsSetup>,
    elements: Vec<Element>,
    detectors: Vec<Detector>,
    cutoff: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRecord {
    /// Clicks in detector declaration order.
    pub pattern: DetectionPattern,
    pub clicks: BTreeMap<String, u32>,
    /// Output modes that received a π shift.
    pub corrected_modes: Vec<String>,
    /// Probability of this report with no photon lost.
    pub success_probability: f64,
    pub announcement_probability: f64,
    /// Phase-corrected heralded output.
    pub output: HeraldedEnsemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportationReport {
    pub d: usize,
    pub eta: f64,
    pub gammas: Vec<Complex64>,
    /// Probability of an accepted report with every photon registered.
    pub success_probability: f64,
    /// Probability that the detectors report an accepted pattern at all.
    pub announcement_probability: f64,
    pub per_pattern: Vec<PatternRecord>,
    /// Overlap of the heralded output with the target, normalized by the
    /// announcement probability. `None` when nothing is ever announced.
    pub conditional_fidelity: Option<f64>,
    /// The closed-form 1 − η(1−η).
    pub paper_fidelity: f64,
    /// Announced runs that were not loss-free successes.
    pub false_announcement_probability: f64,
    /// Ideal-detector probability that some detector receives exactly two photons.
    pub two_photon_event_probability: f64,
    pub output: HeraldedEnsemble,
}

impl Teleporter {
    /// `d` scissors with ancillas in the input species.
    pub fn new(d: usize) -> Result<Self> {
        Self::with_options(d, None, TeleporterOptions::default())
    }

    /// `d` scissors whose ancilla photons (and hence outputs) carry
    /// `target_species[i]` on scissors `i`.
    pub fn with_target_species(d: usize, target_species: &[String]) -> Result<Self> {
        Self::with_options(d, Some(target_species), TeleporterOptions::default())
    }

    pub fn with_options(d: usize, target_species: Option<&[String]>, opts: TeleporterOptions) -> Result<Self> {
        if d == 0 {
            return Err(SimError::InvalidParameter("qudit dimension must be at least 1".into()));
        }
        if let Some(t) = target_species {
            if t.len() != d {
                return Err(SimError::DimensionMismatch {
                    expected: d,
                    actual: t.len(),
                });
            }
        }
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let bs2_good = [[h, h], [h, -h]];

        let mut reg = ModeRegistry::new();
        let mut setups = Vec::with_capacity(d);
        let mut elements = Vec::with_capacity(2 * d);
        let mut detectors = Vec::with_capacity(2 * d);
        for i in 0..d {
            let input_species = format!("OAM:{i}");
            let bs2_matrix = if opts.flip_bs2_sign && i == 0 {
                [[h, -h], [h, h]]
            } else {
                bs2_good
            };
            let target = target_species.map_or(input_species.clone(), |t| t[i].clone());
            let (pa, pb, pc) = (format!("A{i}"), format!("B{i}"), format!("C{i}"));

            let (ancilla, output, input, path_a, path_c);
            if target == input_species {
                ancilla = reg.add(format!("a{i}"), ModeRole::AncillaA, &pa, &input_species)?;
                output = reg.add(format!("b{i}"), ModeRole::OutputB, &pb, &input_species)?;
                input = reg.add(format!("c{i}"), ModeRole::InputC, &pc, &input_species)?;
                elements.push(BeamSplitter::balanced(ancilla, output)?.into());
                elements.push(BeamSplitter::new(ancilla, input, bs2_matrix)?.into());
                path_a = vec![ancilla];
                path_c = vec![input];
            } else {
                let a_in = reg.add(format!("a{i}"), ModeRole::Other, &pa, &input_species)?;
                ancilla = reg.add(format!("at{i}"), ModeRole::AncillaA, &pa, &target)?;
                let b_in = reg.add(format!("b{i}"), ModeRole::Other, &pb, &input_species)?;
                output = reg.add(format!("bt{i}"), ModeRole::OutputB, &pb, &target)?;
                input = reg.add(format!("c{i}"), ModeRole::InputC, &pc, &input_species)?;
                let c_t = reg.add(format!("ct{i}"), ModeRole::Other, &pc, &target)?;
                elements.push(BeamSplitter::balanced(ancilla, output)?.into());
                elements.push(BeamSplitter::balanced(a_in, b_in)?.into());
                elements.push(BeamSplitter::new(ancilla, c_t, bs2_matrix)?.into());
                elements.push(BeamSplitter::new(a_in, input, bs2_matrix)?.into());
                path_a = vec![a_in, ancilla];
                path_c = vec![input, c_t];
            }
            detectors.push(Detector::new(format!("D1_{i}"), path_a, 1.0)?);
            detectors.push(Detector::new(format!("D2_{i}"), path_c, 1.0)?);
            setups.push(ScissorsSetup {
                input,
                ancilla,
                output,
                d1: 2 * i,
                d2: 2 * i + 1,
            });
        }
        Ok(Self {
            d,
            registry: Arc::new(reg),
            setups,
            elements,
            detectors,
            cutoff: d as u32 + 2,
        })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn setups(&self) -> &[ScissorsSetup] {
        &self.setups
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn input_modes(&self) -> Vec<ModeId> {
        self.setups.iter().map(|s| s.input).collect()
    }

    /// Exactly one click per scissors, at either of its detectors.
    pub fn accepts(&self, pattern: &DetectionPattern) -> bool {
        pattern.0.len() == self.detectors.len()
            && self
                .setups
                .iter()
                .all(|s| pattern.clicks(s.d1) + pattern.clicks(s.d2) == 1)
    }

    /// All 2^d accepted patterns.
    pub fn accepted_patterns(&self) -> Vec<DetectionPattern> {
        (0..1usize << self.d)
            .map(|mask| {
                let mut clicks = vec![0; self.detectors.len()];
                for (i, s) in self.setups.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        clicks[s.d2] = 1;
                    } else {
                        clicks[s.d1] = 1;
                    }
                }
                DetectionPattern(clicks)
            })
            .collect()
    }

    /// Output modes needing a π shift after `pattern`: those whose D2 clicked.
    pub fn corrections(&self, pattern: &DetectionPattern) -> Vec<ModeId> {
        self.setups
            .iter()
            .filter(|s| pattern.clicks(s.d2) > 0)
            .map(|s| s.output)
            .collect()
    }

    /// Ancilla photons times the transcribed qudit: ∏ a_i† Σ γ_l c_l† |0⟩.
    pub fn initial_state(&self, qudit: &QuditVector) -> Result<FockState> {
        if qudit.dim() != self.d {
            return Err(SimError::DimensionMismatch {
                expected: self.d,
                actual: qudit.dim(),
            });
        }
        let mut state = transcribe(qudit, self.registry.clone(), &self.input_modes(), self.cutoff)?;
        for s in &self.setups {
            state = state.create(s.ancilla)?;
        }
        Ok(state)
    }

    pub fn evolve(&self, qudit: &QuditVector) -> Result<FockState> {
        apply_all(&self.initial_state(qudit)?, &self.elements)
    }

    fn detectors_at(&self, eta: f64) -> Result<Vec<Detector>> {
        self.detectors.iter().map(|d| d.with_efficiency(eta)).collect()
    }

    /// Reported click distribution over every pattern, accepted or not.
    pub fn click_distribution(&self, qudit: &QuditVector, eta: f64) -> Result<BTreeMap<DetectionPattern, f64>> {
        measure_distribution(&self.evolve(qudit)?, &self.detectors_at(eta)?)
    }

    pub fn run(&self, qudit: &QuditVector, eta: f64) -> Result<TeleportationReport> {
        let evolved = self.evolve(qudit)?;
        let detectors = self.detectors_at(eta)?;
        let heralding = herald_patterns(&evolved, &detectors, |p| self.accepts(p))?;
        let rest_id = |m: ModeId| heralding.mode_map[m.index()].expect("output modes are never measured");

        let mut per_pattern = Vec::with_capacity(heralding.patterns.len());
        for ph in &heralding.patterns {
            let shifts: Vec<PhaseShifter> = self
                .corrections(&ph.pattern)
                .into_iter()
                .map(|m| PhaseShifter::new(rest_id(m), PI))
                .collect();
            let output = ph
                .ensemble
                .map_states(|s| shifts.iter().try_fold(s.clone(), |acc, ps| ps.apply(&acc)))?;
            let success_probability = output
                .branches
                .iter()
                .filter(|b| b.true_counts == ph.pattern.0)
                .map(|b| b.probability)
                .fold(0.0, |acc, p| acc + p);
            per_pattern.push(PatternRecord {
                pattern: ph.pattern.clone(),
                clicks: ph.pattern.describe(&detectors),
                corrected_modes: shifts
                    .iter()
                    .map(|ps| heralding.registry.labels()[ps.mode.index()].name.clone())
                    .collect(),
                success_probability,
                announcement_probability: output.total_probability(),
                output,
            });
        }

        let output = HeraldedEnsemble::merge(per_pattern.iter().map(|p| &p.output));
        let target_modes: Vec<ModeId> = self.setups.iter().map(|s| rest_id(s.output)).collect();
        let target = transcribe(qudit, heralding.registry.clone(), &target_modes, self.cutoff)?;
        let announcement_probability: f64 = per_pattern
            .iter()
            .map(|p| p.announcement_probability)
            .fold(0.0, |acc, p| acc + p);
        let success_probability: f64 = per_pattern
            .iter()
            .map(|p| p.success_probability)
            .fold(0.0, |acc, p| acc + p);
        let conditional_fidelity = if output.is_empty() {
            None
        } else {
            Some(output.fidelity(&target)?)
        };

        let two_photon_event_probability = evolved
            .components()
            .filter(|(occ, _)| {
                self.detectors
                    .iter()
                    .any(|d| d.modes.iter().map(|&m| occ.count(m)).sum::<u32>() == 2)
            })
            .map(|(_, a)| a.norm_sqr())
            .fold(0.0, |acc, p| acc + p);

        Ok(TeleportationReport {
            d: self.d,
            eta,
            gammas: qudit.gammas().to_vec(),
            success_probability,
            announcement_probability,
            per_pattern,
            conditional_fidelity,
            paper_fidelity: closed_form_fidelity(eta),
            false_announcement_probability: (announcement_probability - success_probability).max(0.0),
            two_photon_event_probability,
            output,
        })
    }
}

impl TeleportationReport {
    /// Loss-free heralded output of each accepted pattern, as qudit amplitudes
    /// on the output modes (in scissors order).
    pub fn transferred_amplitudes(&self) -> Result<Vec<(BTreeMap<String, u32>, QuditVector)>> {
        let mut out = Vec::new();
        for p in &self.per_pattern {
            let Some(branch) = p.output.branches.iter().find(|b| b.true_counts == p.pattern.0) else {
                continue;
            };
            let reg = branch.state.registry();
            let modes = reg
                .labels()
                .iter()
                .filter(|l| l.role == ModeRole::OutputB)
                .map(|l| l.id)
                .collect::<Vec<_>>();
            out.push((p.clicks.clone(), super::mix(&branch.state, &modes)?));
        }
        Ok(out)
    }
}

pub fn teleport_qudit(qudit: &QuditVector, d: usize, eta: f64) -> Result<TeleportationReport> {
    if qudit.dim() != d {
        return Err(SimError::DimensionMismatch {
            expected: d,
            actual: qudit.dim(),
        });
    }
    Teleporter::new(d)?.run(qudit, eta)
}

pub fn teleport_qudit_to_basis(
    qudit: &QuditVector,
    d: usize,
    eta: f64,
    target_species: &[String],
) -> Result<TeleportationReport> {
    if qudit.dim() != d {
        return Err(SimError::DimensionMismatch {
            expected: d,
            actual: qudit.dim(),
        });
    }
    Teleporter::with_target_species(d, target_species)?.run(qudit, eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn layout_and_patterns() {
        let t = Teleporter::new(2).unwrap();
        assert_eq!(t.registry().len(), 6);
        assert_eq!(
            t.detectors().iter().map(|d| d.name.as_str()).collect::<Vec<_>>(),
            ["D1_0", "D2_0", "D1_1", "D2_1"]
        );
        assert_eq!(t.cutoff(), 4);
        let pats = t.accepted_patterns();
        assert_eq!(pats.len(), 4);
        assert!(pats.iter().all(|p| t.accepts(p)));
        assert!(!t.accepts(&DetectionPattern(vec![1, 1, 0, 0])));
        assert!(!t.accepts(&DetectionPattern(vec![0, 0, 1, 0])));
        assert_eq!(
            t.corrections(&DetectionPattern(vec![0, 1, 1, 0])),
            vec![t.setups()[0].output]
        );
    }

    #[test]
    fn single_path_example_at_eighty_percent() {
        let q = QuditVector::basis(1, 0).unwrap();
        let r = teleport_qudit(&q, 1, 0.8).unwrap();
        assert!((r.success_probability - 0.4).abs() < 1e-12);
        assert!((r.false_announcement_probability - 0.16).abs() < 1e-12);
        assert!((r.paper_fidelity - 0.84).abs() < 1e-12);
        assert!((r.conditional_fidelity.unwrap() - 0.4 / 0.56).abs() < 1e-12);
    }

    #[test]
    fn ideal_qubit_transfer() {
        let q = QuditVector::new(vec![c(0.6), Complex64::new(0.0, 0.8)]).unwrap();
        let r = teleport_qudit(&q, 2, 1.0).unwrap();
        assert!((r.success_probability - 0.25).abs() < 1e-12);
        assert!((r.conditional_fidelity.unwrap() - 1.0).abs() < 1e-12);
        for (_, out) in r.transferred_amplitudes().unwrap() {
            assert!(q.deviation_up_to_phase(out.gammas()) < 1e-12);
        }
    }

    #[test]
    fn nothing_announced_without_efficiency() {
        let r = teleport_qudit(&QuditVector::basis(2, 1).unwrap(), 2, 0.0).unwrap();
        assert_eq!(r.announcement_probability, 0.0);
        assert_eq!(r.conditional_fidelity, None);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(Teleporter::new(0).is_err());
        let q = QuditVector::basis(2, 0).unwrap();
        assert!(matches!(
            teleport_qudit(&q, 3, 1.0),
            Err(SimError::DimensionMismatch { .. })
        ));
        assert!(Teleporter::with_target_species(2, &["x".into()]).is_err());
    }

    #[test]
    fn distinct_species_doubles_the_modes() {
        let species = vec!["HG:0,1".to_string(), "HG:1,0".to_string()];
        let t = Teleporter::with_target_species(2, &species).unwrap();
        assert_eq!(t.registry().len(), 12);
        assert_eq!(t.elements().len(), 8);
        assert_eq!(t.detectors()[0].modes.len(), 2);
        let q = QuditVector::new(vec![c(0.8), c(-0.6)]).unwrap();
        let r = t.run(&q, 1.0).unwrap();
        assert!((r.conditional_fidelity.unwrap() - 1.0).abs() < 1e-12);
        assert!((r.success_probability - 0.25).abs() < 1e-12);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(closed_form_fidelity(1.0), 1.0);
        assert!((closed_form_fidelity(0.9) - 0.91).abs() < 1e-15);
        assert!((closed_form_fidelity(0.5) - 0.75).abs() < 1e-15);
    }
}
