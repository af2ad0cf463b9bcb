//! Passive linear-optical elements acting on [`FockState`]s.
//!
//! Elements are described by how they transform creation operators. A beam
//! splitter on modes `(p, q)` with matrix `U` maps
//! `p† → U[0][0] p† + U[1][0] q†` and `q† → U[0][1] p† + U[1][1] q†`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::fock::{FockState, ModeId, Occupation};

const UNITARY_TOL: f64 = 1e-12;

pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct BeamSplitter {
    first: ModeId,
    second: ModeId,
    matrix: Matrix2,
}

impl BeamSplitter {
    pub fn new(first: ModeId, second: ModeId, matrix: Matrix2) -> Result<Self> {
        if first == second {
            return Err(SimError::DegenerateBeamSplitter(first.index()));
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARY_TOL || !deviation.is_finite() {
            return Err(SimError::NonUnitary { deviation });
        }
        Ok(Self { first, second, matrix })
    }

    /// Real 50:50 splitter: `first† → (first† + second†)/√2`,
    /// `second† → (first† − second†)/√2`. Self-inverse.
    pub fn balanced(first: ModeId, second: ModeId) -> Result<Self> {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(first, second, [[h, h], [h, -h]])
    }

    /// General lossless splitter with transmission `cos θ` and phase `φ`.
    pub fn from_angles(first: ModeId, second: ModeId, theta: f64, phi: f64) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        let e = Complex64::from_polar(1.0, phi);
        Self::new(
            first,
            second,
            [[Complex64::new(c, 0.0), -e.conj() * s], [e * s, Complex64::new(c, 0.0)]],
        )
    }

    pub fn modes(&self) -> (ModeId, ModeId) {
        (self.first, self.second)
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.matrix
    }

    /// The splitter with conjugate-transposed matrix.
    pub fn inverse(&self) -> Self {
        let m = &self.matrix;
        Self {
            first: self.first,
            second: self.second,
            matrix: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        let reg = state.registry();
        reg.check(self.first)?;
        reg.check(self.second)?;
        let (p, q) = (self.first.index(), self.second.index());
        let [[u11, u12], [u21, u22]] = self.matrix;

        let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in state.components() {
            let (n, m) = (occ.0[p], occ.0[q]);
            if n == 0 && m == 0 {
                *out.entry(occ.clone()).or_default() += amp;
                continue;
            }
            let norm_in = (factorial(n) * factorial(m)).sqrt();
            for j in 0..=n {
                let from_first = binomial(n, j) * u11.powu(j) * u21.powu(n - j);
                for k in 0..=m {
                    let from_second = binomial(m, k) * u12.powu(k) * u22.powu(m - k);
                    let np = j + k;
                    let nq = n + m - np;
                    let coeff = from_first * from_second * (factorial(np) * factorial(nq)).sqrt() / norm_in;
                    let mut next = occ.clone();
                    next.0[p] = np;
                    next.0[q] = nq;
                    *out.entry(next).or_default() += amp * coeff;
                }
            }
        }
        Ok(state.with_amplitudes(out))
    }
}

/// Largest entry of `U†U − I`.
pub fn unitarity_deviation(m: &Matrix2) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            let mut acc: Complex64 = m.iter().map(|row| row[i].conj() * row[j]).sum();
            if i == j {
                acc -= 1.0;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShifter {
    pub mode: ModeId,
    pub phi: f64,
}

impl PhaseShifter {
    pub fn new(mode: ModeId, phi: f64) -> Self {
        Self { mode, phi }
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        state.registry().check(self.mode)?;
        let out = state
            .components()
            .map(|(occ, a)| {
                let n = occ.count(self.mode);
                (occ.clone(), a * Complex64::from_polar(1.0, f64::from(n) * self.phi))
            })
            .collect();
        Ok(state.with_amplitudes(out))
    }
}

/// Relocates photons: everything in mode `k` moves to mode `mapping[k]`.
/// Models mode sorters and their reverse, the mixers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModePermutation {
    mapping: Vec<usize>,
}

impl ModePermutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &t in &mapping {
            if t >= n || seen[t] {
                return Err(SimError::NotBijective { modes: n });
            }
            seen[t] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            mapping: (0..modes).collect(),
        }
    }

    pub fn swap(modes: usize, a: ModeId, b: ModeId) -> Result<Self> {
        if a.index() >= modes || b.index() >= modes {
            return Err(SimError::UnknownMode(a.index().max(b.index())));
        }
        let mut mapping: Vec<usize> = (0..modes).collect();
        mapping.swap(a.index(), b.index());
        Ok(Self { mapping })
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn target(&self, mode: ModeId) -> ModeId {
        ModeId(self.mapping[mode.index()])
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (src, &dst) in self.mapping.iter().enumerate() {
            inv[dst] = src;
        }
        Self { mapping: inv }
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        if self.mapping.len() != state.mode_count() {
            return Err(SimError::NotBijective {
                modes: state.mode_count(),
            });
        }
        let out = state
            .components()
            .map(|(occ, a)| {
                let mut next = vec![0; occ.0.len()];
                for (src, &n) in occ.0.iter().enumerate() {
                    next[self.mapping[src]] = n;
                }
                (Occupation(next), *a)
            })
            .collect();
        Ok(state.with_amplitudes(out))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    BeamSplitter(BeamSplitter),
    PhaseShift(PhaseShifter),
    Permutation(ModePermutation),
}

impl Element {
    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        match self {
            Element::BeamSplitter(bs) => bs.apply(state),
            Element::PhaseShift(ps) => ps.apply(state),
            Element::Permutation(p) => p.apply(state),
        }
    }
}

impl From<BeamSplitter> for Element {
    fn from(bs: BeamSplitter) -> Self {
        Element::BeamSplitter(bs)
    }
}

impl From<PhaseShifter> for Element {
    fn from(ps: PhaseShifter) -> Self {
        Element::PhaseShift(ps)
    }
}

impl From<ModePermutation> for Element {
    fn from(p: ModePermutation) -> Self {
        Element::Permutation(p)
    }
}

/// Applies `elements` left to right.
pub fn apply_all(state: &FockState, elements: &[Element]) -> Result<FockState> {
    elements.iter().try_fold(state.clone(), |s, e| e.apply(&s))
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}
