//! Pure states of a finite set of bosonic modes in the photon-number basis.
//!
//! A [`FockState`] is a sparse map from occupation vectors to complex
//! amplitudes. Every operation returns a new value; nothing is mutated in
//! place once a state has been handed out.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Amplitudes with modulus at or below this are dropped after every operation.
pub const PRUNE_EPS: f64 = 1e-14;

/// Tolerance used when a caller claims a set of amplitudes is normalized.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeId(pub usize);

impl ModeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeRole {
    InputC,
    AncillaA,
    OutputB,
    Other,
}

/// A named light mode: a spatial path plus a transverse-mode species tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeLabel {
    pub id: ModeId,
    pub name: String,
    pub role: ModeRole,
    pub path: String,
    pub species: String,
}

/// Ordered set of modes. Ids are contiguous from zero and `(path, species)`
/// pairs are unique.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ModeLabel>", into = "Vec<ModeLabel>")]
pub struct ModeRegistry {
    modes: Vec<ModeLabel>,
}

impl ModeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(
        &mut self,
        name: impl Into<String>,
        role: ModeRole,
        path: impl Into<String>,
        species: impl Into<String>,
    ) -> Result<ModeId> {
        let name = name.into();
        let path = path.into();
        let species = species.into();
        if self.modes.iter().any(|m| m.name == name) {
            return Err(SimError::DuplicateMode(name));
        }
        if self.modes.iter().any(|m| m.path == path && m.species == species) {
            return Err(SimError::DuplicateMode(format!("{path}/{species}")));
        }
        let id = ModeId(self.modes.len());
        self.modes.push(ModeLabel {
            id,
            name,
            role,
            path,
            species,
        });
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn label(&self, id: ModeId) -> Result<&ModeLabel> {
        self.modes.get(id.0).ok_or(SimError::UnknownMode(id.0))
    }

    pub fn check(&self, id: ModeId) -> Result<()> {
        self.label(id).map(|_| ())
    }

    pub fn find(&self, name: &str) -> Option<ModeId> {
        self.modes.iter().find(|m| m.name == name).map(|m| m.id)
    }

    pub fn id_of(&self, name: &str) -> Result<ModeId> {
        self.find(name)
            .ok_or_else(|| SimError::UnknownModeName(name.to_owned()))
    }

    /// Registry of the modes not listed in `removed`, renumbered in order,
    /// together with the old-id to new-id map.
    pub fn without(&self, removed: &[ModeId]) -> (ModeRegistry, Vec<Option<ModeId>>) {
        let mut kept = ModeRegistry::new();
        let mut map = vec![None; self.modes.len()];
        for m in &self.modes {
            if removed.contains(&m.id) {
                continue;
            }
            let id = ModeId(kept.modes.len());
            kept.modes.push(ModeLabel { id, ..m.clone() });
            map[m.id.0] = Some(id);
        }
        (kept, map)
    }
}

impl TryFrom<Vec<ModeLabel>> for ModeRegistry {
    type Error = SimError;

    fn try_from(labels: Vec<ModeLabel>) -> Result<Self> {
        let mut reg = ModeRegistry::new();
        for (i, l) in labels.into_iter().enumerate() {
            if l.id.0 != i {
                return Err(SimError::InvalidParameter(format!(
                    "mode ids must be contiguous, found {} at position {i}",
                    l.id
                )));
            }
            reg.add(l.name, l.role, l.path, l.species)?;
        }
        Ok(reg)
    }
}

impl From<ModeRegistry> for Vec<ModeLabel> {
    fn from(reg: ModeRegistry) -> Self {
        reg.modes
    }
}

/// Photon counts per registered mode, in mode-id order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Occupation(pub Vec<u32>);

impl Occupation {
    pub fn vacuum(modes: usize) -> Self {
        Occupation(vec![0; modes])
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn count(&self, mode: ModeId) -> u32 {
        self.0[mode.0]
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StateRecord {
    modes: ModeRegistry,
    cutoff: u32,
    components: Vec<ComponentRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ComponentRecord {
    occupation: Vec<u32>,
    amplitude: Complex64,
}

/// Sparse pure state over a [`ModeRegistry`], bounded by a total photon cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateRecord", try_from = "StateRecord")]
pub struct FockState {
    registry: Arc<ModeRegistry>,
    cutoff: u32,
    amplitudes: BTreeMap<Occupation, Complex64>,
}

impl FockState {
    /// The empty (zero) vector.
    pub fn zero(registry: Arc<ModeRegistry>, cutoff: u32) -> Result<Self> {
        if registry.is_empty() {
            return Err(SimError::EmptyRegistry);
        }
        Ok(Self {
            registry,
            cutoff,
            amplitudes: BTreeMap::new(),
        })
    }

    pub fn vacuum(registry: Arc<ModeRegistry>, cutoff: u32) -> Result<Self> {
        let mut state = Self::zero(registry, cutoff)?;
        state
            .amplitudes
            .insert(Occupation::vacuum(state.registry.len()), Complex64::new(1.0, 0.0));
        Ok(state)
    }

    /// Builds a state from explicit `(occupation, amplitude)` pairs. Repeated
    /// occupations are summed.
    pub fn from_components<I>(registry: Arc<ModeRegistry>, cutoff: u32, components: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        let mut state = Self::zero(registry, cutoff)?;
        let modes = state.registry.len();
        for (counts, amp) in components {
            if counts.len() != modes {
                return Err(SimError::DimensionMismatch {
                    expected: modes,
                    actual: counts.len(),
                });
            }
            let occ = Occupation(counts);
            let total = occ.total();
            if total > cutoff {
                return Err(SimError::CutoffExceeded { total, cutoff });
            }
            *state.amplitudes.entry(occ).or_default() += amp;
        }
        state.prune();
        Ok(state)
    }

    /// Same registry and cutoff, new amplitudes. Callers guarantee the cutoff.
    pub(crate) fn with_amplitudes(&self, amplitudes: BTreeMap<Occupation, Complex64>) -> Self {
        let mut out = Self {
            registry: self.registry.clone(),
            cutoff: self.cutoff,
            amplitudes,
        };
        out.prune();
        out
    }

    pub(crate) fn from_parts(
        registry: Arc<ModeRegistry>,
        cutoff: u32,
        amplitudes: BTreeMap<Occupation, Complex64>,
    ) -> Self {
        let mut out = Self {
            registry,
            cutoff,
            amplitudes,
        };
        out.prune();
        out
    }

    fn prune(&mut self) {
        self.amplitudes.retain(|_, a| a.norm() > PRUNE_EPS);
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn mode_count(&self) -> usize {
        self.registry.len()
    }

    /// Non-zero components in canonical occupation order.
    pub fn components(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, counts: &[u32]) -> Complex64 {
        self.amplitudes
            .get(&Occupation(counts.to_vec()))
            .copied()
            .unwrap_or_default()
    }

    pub fn max_photons(&self) -> u32 {
        self.amplitudes.keys().map(Occupation::total).max().unwrap_or(0)
    }

    pub fn same_registry(&self, other: &FockState) -> bool {
        Arc::ptr_eq(&self.registry, &other.registry) || self.registry == other.registry
    }

    /// Applies the creation operator of `mode`.
    pub fn create(&self, mode: ModeId) -> Result<Self> {
        self.registry.check(mode)?;
        let mut out = BTreeMap::new();
        for (occ, amp) in &self.amplitudes {
            let total = occ.total() + 1;
            if total > self.cutoff {
                return Err(SimError::CutoffExceeded {
                    total,
                    cutoff: self.cutoff,
                });
            }
            let mut next = occ.clone();
            let n = next.0[mode.0];
            next.0[mode.0] = n + 1;
            *out.entry(next).or_default() += amp * f64::from(n + 1).sqrt();
        }
        Ok(self.with_amplitudes(out))
    }

    /// Applies the annihilation operator of `mode`. Components with no photon
    /// there vanish.
    pub fn annihilate(&self, mode: ModeId) -> Result<Self> {
        self.registry.check(mode)?;
        let mut out = BTreeMap::new();
        for (occ, amp) in &self.amplitudes {
            let n = occ.0[mode.0];
            if n == 0 {
                continue;
            }
            let mut next = occ.clone();
            next.0[mode.0] = n - 1;
            *out.entry(next).or_default() += amp * f64::from(n).sqrt();
        }
        Ok(self.with_amplitudes(out))
    }

    /// ⟨self|other⟩, conjugating `self`.
    pub fn inner(&self, other: &FockState) -> Result<Complex64> {
        if !self.same_registry(other) {
            return Err(SimError::RegistryMismatch);
        }
        // walk the smaller map
        let (small, large, conj_small) = if self.len() <= other.len() {
            (&self.amplitudes, &other.amplitudes, true)
        } else {
            (&other.amplitudes, &self.amplitudes, false)
        };
        let mut acc = Complex64::default();
        for (occ, a) in small {
            if let Some(b) = large.get(occ) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Returns the unit-norm state and the squared norm it had before.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        let n2 = self.norm_sqr();
        if n2 <= 0.0 || self.is_empty() {
            return Err(SimError::ZeroState);
        }
        Ok((self.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)), n2))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        self.with_amplitudes(self.amplitudes.iter().map(|(o, a)| (o.clone(), a * factor)).collect())
    }

    /// Vector sum. Both states must share a registry; the larger cutoff is kept.
    pub fn add(&self, other: &FockState) -> Result<Self> {
        if !self.same_registry(other) {
            return Err(SimError::RegistryMismatch);
        }
        let mut out = self.amplitudes.clone();
        for (occ, a) in &other.amplitudes {
            *out.entry(occ.clone()).or_default() += a;
        }
        Ok(Self::from_parts(
            self.registry.clone(),
            self.cutoff.max(other.cutoff),
            out,
        ))
    }

    /// Largest amplitude difference against `other`, component by component.
    pub fn max_abs_diff(&self, other: &FockState) -> Result<f64> {
        if !self.same_registry(other) {
            return Err(SimError::RegistryMismatch);
        }
        let mut worst = 0.0_f64;
        for (occ, a) in &self.amplitudes {
            let b = other.amplitudes.get(occ).copied().unwrap_or_default();
            worst = worst.max((a - b).norm());
        }
        for (occ, b) in &other.amplitudes {
            if !self.amplitudes.contains_key(occ) {
                worst = worst.max(b.norm());
            }
        }
        Ok(worst)
    }
}

impl From<FockState> for StateRecord {
    fn from(s: FockState) -> Self {
        StateRecord {
            modes: (*s.registry).clone(),
            cutoff: s.cutoff,
            components: s
                .amplitudes
                .into_iter()
                .map(|(o, amplitude)| ComponentRecord {
                    occupation: o.0,
                    amplitude,
                })
                .collect(),
        }
    }
}

impl TryFrom<StateRecord> for FockState {
    type Error = SimError;

    fn try_from(r: StateRecord) -> Result<Self> {
        FockState::from_components(
            Arc::new(r.modes),
            r.cutoff,
            r.components.into_iter().map(|c| (c.occupation, c.amplitude)),
        )
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        for (i, (occ, a)) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i){occ}", a.re, a.im)?;
        }
        Ok(())
    }
}

/// Amplitudes γ_0…γ_{d−1} of a single photon shared among d modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuditVector {
    gammas: Vec<Complex64>,
}

impl QuditVector {
    pub fn new(gammas: Vec<Complex64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(SimError::InvalidParameter("qudit dimension must be at least 1".into()));
        }
        let n2: f64 = gammas.iter().map(|g| g.norm_sqr()).sum();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized { norm_sqr: n2 });
        }
        Ok(Self { gammas })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm, returning the
    /// original squared norm alongside.
    pub fn normalized(gammas: Vec<Complex64>) -> Result<(Self, f64)> {
        if gammas.is_empty() {
            return Err(SimError::InvalidParameter("qudit dimension must be at least 1".into()));
        }
        let n2: f64 = gammas.iter().map(|g| g.norm_sqr()).sum();
        if n2 <= 0.0 {
            return Err(SimError::ZeroState);
        }
        let s = 1.0 / n2.sqrt();
        Ok((
            Self {
                gammas: gammas.into_iter().map(|g| g * s).collect(),
            },
            n2,
        ))
    }

    /// Accepts amplitudes whose squared norm is within `tol` of one, keeping
    /// them as given.
    pub fn from_unit(gammas: Vec<Complex64>, tol: f64) -> Result<Self> {
        let n2: f64 = gammas.iter().map(|g| g.norm_sqr()).sum();
        if gammas.is_empty() || (n2 - 1.0).abs() > tol {
            return Err(SimError::NotNormalized { norm_sqr: n2 });
        }
        Ok(Self { gammas })
    }

    /// Haar-uniform draw on the complex unit sphere via normalized Gaussians.
    pub fn haar<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        loop {
            let gammas: Vec<Complex64> = (0..d)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            match Self::normalized(gammas) {
                Ok((q, _)) => return Ok(q),
                Err(SimError::ZeroState) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn basis(d: usize, l: usize) -> Result<Self> {
        if l >= d {
            return Err(SimError::InvalidParameter(format!(
                "basis index {l} out of range for d={d}"
            )));
        }
        let mut gammas = vec![Complex64::default(); d];
        gammas[l] = Complex64::new(1.0, 0.0);
        Self::new(gammas)
    }

    pub fn dim(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[Complex64] {
        &self.gammas
    }

    /// Max componentwise deviation of `other` from `self` after removing the
    /// best global phase (fixed by the largest component of `self`).
    pub fn deviation_up_to_phase(&self, other: &[Complex64]) -> f64 {
        if other.len() != self.gammas.len() {
            return f64::INFINITY;
        }
        let (k, _) =
            self.gammas.iter().enumerate().fold(
                (0, -1.0),
                |best, (i, g)| if g.norm() > best.1 { (i, g.norm()) } else { best },
            );
        let phase = if other[k].norm() > 0.0 {
            let r = other[k] / self.gammas[k];
            r / r.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.gammas
            .iter()
            .zip(other)
            .map(|(g, o)| (o / phase - g).norm())
            .fold(0.0, f64::max)
    }
}
