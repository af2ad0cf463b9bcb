//! Photon-number-resolving detection with finite efficiency.
//!
//! A [`Detector`] covers one or more modes and reports the total photon count
//! across them, each photon being registered independently with probability
//! `efficiency`. There are no dark counts.
//!
//! Heralding conditions a state on reported click patterns. The resulting
//! [`HeraldedEnsemble`] keeps one branch per true photon-count configuration,
//! weighted by the probability that the configuration occurs *and* is reported
//! as the accepted pattern.
//!
//! Detectors covering several modes do not resolve which mode a photon came
//! from. The post-measurement remainder for a given total count is the coherent
//! sum over all covered-mode configurations with that total, which is exact
//! whenever those alternatives leave mutually orthogonal remainders. When they
//! do not, the branch is split per configuration instead so that probabilities
//! stay consistent.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::fock::{FockState, ModeId, ModeRegistry, Occupation};
use crate::optics::factorial;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub name: String,
    pub modes: Vec<ModeId>,
    pub efficiency: f64,
}

impl Detector {
    pub fn new(name: impl Into<String>, modes: Vec<ModeId>, efficiency: f64) -> Result<Self> {
        let name = name.into();
        if modes.is_empty() {
            return Err(SimError::EmptyDetector(name));
        }
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(SimError::InvalidEfficiency(efficiency));
        }
        Ok(Self {
            name,
            modes,
            efficiency,
        })
    }

    pub fn with_efficiency(&self, efficiency: f64) -> Result<Self> {
        Self::new(self.name.clone(), self.modes.clone(), efficiency)
    }

    /// P(k clicks | n photons) = C(n,k) η^k (1−η)^(n−k).
    pub fn click_probability(&self, photons: u32, clicks: u32) -> f64 {
        click_probability(self.efficiency, photons, clicks)
    }
}

pub fn click_probability(efficiency: f64, photons: u32, clicks: u32) -> f64 {
    if clicks > photons {
        return 0.0;
    }
    let c = factorial(photons) / (factorial(clicks) * factorial(photons - clicks));
    c * efficiency.powi(clicks as i32) * (1.0 - efficiency).powi((photons - clicks) as i32)
}

/// Reported clicks, one entry per detector in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DetectionPattern(pub Vec<u32>);

impl DetectionPattern {
    pub fn clicks(&self, detector: usize) -> u32 {
        self.0[detector]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn describe(&self, detectors: &[Detector]) -> BTreeMap<String, u32> {
        detectors
            .iter()
            .zip(&self.0)
            .map(|(d, &k)| (d.name.clone(), k))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub probability: f64,
    /// True photon count at each detector before losses.
    pub true_counts: Vec<u32>,
    /// Normalized state of the unmeasured modes.
    pub state: FockState,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HeraldedEnsemble {
    pub branches: Vec<Branch>,
}

impl HeraldedEnsemble {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).fold(0.0, |acc, p| acc + p)
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty() || self.total_probability() <= 0.0
    }

    /// Σ_branch (p / total) · |⟨target|branch⟩|².
    pub fn fidelity(&self, target: &FockState) -> Result<f64> {
        let total = self.total_probability();
        if self.branches.is_empty() || total <= 0.0 {
            return Err(SimError::EmptyEnsemble);
        }
        let mut acc = 0.0;
        for b in &self.branches {
            acc += b.probability * target.inner(&b.state)?.norm_sqr();
        }
        Ok(acc / total)
    }

    /// Applies `f` to every branch state.
    pub fn map_states<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&FockState) -> Result<FockState>,
    {
        let branches = self
            .branches
            .iter()
            .map(|b| {
                Ok(Branch {
                    probability: b.probability,
                    true_counts: b.true_counts.clone(),
                    state: f(&b.state)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { branches })
    }

    /// Concatenates ensembles, summing branches with equal true counts and
    /// equal states.
    pub fn merge<'a, I: IntoIterator<Item = &'a HeraldedEnsemble>>(parts: I) -> Self {
        let mut out: Vec<Branch> = Vec::new();
        for part in parts {
            for b in &part.branches {
                let same = out.iter_mut().find(|o| {
                    o.true_counts == b.true_counts && o.state.max_abs_diff(&b.state).map(|d| d < 1e-14).unwrap_or(false)
                });
                match same {
                    Some(o) => o.probability += b.probability,
                    None => out.push(b.clone()),
                }
            }
        }
        Self { branches: out }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// Normalized remainder on the unmeasured modes; `None` for a
    /// zero-probability outcome.
    pub state: Option<FockState>,
    pub probability: f64,
}

#[derive(Debug, Clone)]
pub struct PatternHerald {
    pub pattern: DetectionPattern,
    pub ensemble: HeraldedEnsemble,
}

/// Result of heralding: one ensemble per accepted reported pattern.
#[derive(Debug, Clone)]
pub struct Heralding {
    /// Registry of the unmeasured modes.
    pub registry: Arc<ModeRegistry>,
    /// Old mode id to id in `registry` (`None` for measured modes).
    pub mode_map: Vec<Option<ModeId>>,
    pub patterns: Vec<PatternHerald>,
}

impl Heralding {
    pub fn announcement_probability(&self) -> f64 {
        self.patterns.iter().map(|p| p.ensemble.total_probability()).sum()
    }

    pub fn merged(&self) -> HeraldedEnsemble {
        HeraldedEnsemble::merge(self.patterns.iter().map(|p| &p.ensemble))
    }
}

fn validate(state: &FockState, detectors: &[Detector]) -> Result<Vec<ModeId>> {
    let mut seen = vec![false; state.mode_count()];
    let mut measured = Vec::new();
    for d in detectors {
        if d.modes.is_empty() {
            return Err(SimError::EmptyDetector(d.name.clone()));
        }
        if !(0.0..=1.0).contains(&d.efficiency) {
            return Err(SimError::InvalidEfficiency(d.efficiency));
        }
        for &m in &d.modes {
            state.registry().check(m)?;
            if seen[m.index()] {
                return Err(SimError::OverlappingDetectors(m.index()));
            }
            seen[m.index()] = true;
            measured.push(m);
        }
    }
    Ok(measured)
}

fn detector_totals(occ: &Occupation, detectors: &[Detector]) -> Vec<u32> {
    detectors
        .iter()
        .map(|d| d.modes.iter().map(|&m| occ.count(m)).sum())
        .collect()
}

/// Every click vector `k` with `k[i] ≤ photons[i]`, with its probability.
fn click_patterns(photons: &[u32], detectors: &[Detector]) -> Vec<(DetectionPattern, f64)> {
    let mut out = vec![(Vec::with_capacity(photons.len()), 1.0)];
    for (d, &n) in detectors.iter().zip(photons) {
        let mut next = Vec::with_capacity(out.len() * (n as usize + 1));
        for (prefix, p) in &out {
            for k in 0..=n {
                let pk = d.click_probability(n, k);
                let mut v: Vec<u32> = prefix.clone();
                v.push(k);
                next.push((v, p * pk));
            }
        }
        out = next;
    }
    out.into_iter().map(|(v, p)| (DetectionPattern(v), p)).collect()
}

/// Exhaustive distribution of reported click patterns. Zero-probability
/// patterns are omitted.
pub fn measure_distribution(state: &FockState, detectors: &[Detector]) -> Result<BTreeMap<DetectionPattern, f64>> {
    validate(state, detectors)?;
    let mut by_totals: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for (occ, a) in state.components() {
        *by_totals.entry(detector_totals(occ, detectors)).or_default() += a.norm_sqr();
    }
    let mut dist = BTreeMap::new();
    for (totals, p) in by_totals {
        for (pattern, pk) in click_patterns(&totals, detectors) {
            if pk > 0.0 {
                *dist.entry(pattern).or_default() += p * pk;
            }
        }
    }
    Ok(dist)
}

/// Ideal projection onto exact photon numbers `counts` on `modes`.
pub fn project(state: &FockState, modes: &[ModeId], counts: &[u32]) -> Result<Projection> {
    if modes.len() != counts.len() {
        return Err(SimError::DimensionMismatch {
            expected: modes.len(),
            actual: counts.len(),
        });
    }
    for (i, &m) in modes.iter().enumerate() {
        state.registry().check(m)?;
        if modes[..i].contains(&m) {
            return Err(SimError::DuplicateMode(format!("mode {m} measured twice")));
        }
    }
    let (rest, map) = state.registry().without(modes);
    let mut kept: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ, a) in state.components() {
        if modes.iter().zip(counts).all(|(&m, &n)| occ.count(m) == n) {
            *kept.entry(strip(occ, &map, rest.len())).or_default() += a;
        }
    }
    let remainder = FockState::from_parts(Arc::new(rest), state.cutoff(), kept);
    if remainder.is_empty() {
        return Ok(Projection {
            state: None,
            probability: 0.0,
        });
    }
    let (normalized, p) = remainder.normalize()?;
    Ok(Projection {
        state: Some(normalized),
        probability: p,
    })
}

fn strip(occ: &Occupation, map: &[Option<ModeId>], rest_len: usize) -> Occupation {
    let mut v = vec![0; rest_len];
    for (i, n) in occ.0.iter().enumerate() {
        if let Some(j) = map[i] {
            v[j.index()] = *n;
        }
    }
    Occupation(v)
}

#[derive(Default)]
struct TotalsGroup {
    born: f64,
    coherent: BTreeMap<Occupation, Complex64>,
    fine: BTreeMap<Vec<u32>, BTreeMap<Occupation, Complex64>>,
}

/// Conditions `state` on every reported pattern satisfying `accept`.
pub fn herald_patterns<F>(state: &FockState, detectors: &[Detector], accept: F) -> Result<Heralding>
where
    F: Fn(&DetectionPattern) -> bool,
{
    let measured = validate(state, detectors)?;
    let (rest, map) = state.registry().without(&measured);
    let rest = Arc::new(rest);

    let mut groups: BTreeMap<Vec<u32>, TotalsGroup> = BTreeMap::new();
    for (occ, a) in state.components() {
        let g = groups.entry(detector_totals(occ, detectors)).or_default();
        let remainder = strip(occ, &map, rest.len());
        g.born += a.norm_sqr();
        *g.coherent.entry(remainder.clone()).or_default() += a;
        let fine: Vec<u32> = measured.iter().map(|&m| occ.count(m)).collect();
        *g.fine.entry(fine).or_default().entry(remainder).or_default() += a;
    }

    let mut by_pattern: BTreeMap<DetectionPattern, HeraldedEnsemble> = BTreeMap::new();
    for (totals, g) in groups {
        let conditional = conditional_states(&g, &rest, state.cutoff())?;
        for (pattern, pk) in click_patterns(&totals, detectors) {
            if pk <= 0.0 || !accept(&pattern) {
                continue;
            }
            let ens = by_pattern.entry(pattern).or_default();
            for (p, s) in &conditional {
                ens.branches.push(Branch {
                    probability: p * pk,
                    true_counts: totals.clone(),
                    state: s.clone(),
                });
            }
        }
    }
    Ok(Heralding {
        registry: rest,
        mode_map: map,
        patterns: by_pattern
            .into_iter()
            .map(|(pattern, ensemble)| PatternHerald { pattern, ensemble })
            .collect(),
    })
}

fn conditional_states(g: &TotalsGroup, rest: &Arc<ModeRegistry>, cutoff: u32) -> Result<Vec<(f64, FockState)>> {
    let coherent = FockState::from_parts(rest.clone(), cutoff, g.coherent.clone());
    let cn = coherent.norm_sqr();
    if (cn - g.born).abs() <= 1e-10 * g.born.max(1e-300) && !coherent.is_empty() {
        let (s, _) = coherent.normalize()?;
        return Ok(vec![(g.born, s)]);
    }
    g.fine
        .values()
        .map(|amps| {
            let (s, p) = FockState::from_parts(rest.clone(), cutoff, amps.clone()).normalize()?;
            Ok((p, s))
        })
        .collect()
}

/// Heralded mixture over all accepted patterns.
pub fn herald<F>(state: &FockState, detectors: &[Detector], accept: F) -> Result<HeraldedEnsemble>
where
    F: Fn(&DetectionPattern) -> bool,
{
    Ok(herald_patterns(state, detectors, accept)?.merged())
}
