//! Brute-force reference engine used to cross-check the sparse simulator.
//!
//! Works on the full truncated Fock space. Element matrices are built by
//! expanding products of transformed creation operators as polynomials over
//! all modes, which shares no code path with the per-component binomial
//! transform in [`crate::optics`].

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::fock::{FockState, ModeId};
use crate::optics::Element;

pub const MAX_BASIS: usize = 1_000_000;
/// Dense matrices are basis² entries; keep them addressable.
pub const MAX_MATRIX_ENTRIES: usize = 1 << 24;

/// All occupation vectors over `modes` modes with at most `cutoff` photons,
/// graded by total photon number and lexicographic within a grade.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBasis {
    modes: usize,
    cutoff: u32,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl DenseBasis {
    pub fn new(modes: usize, cutoff: u32) -> Result<Self> {
        let size = basis_size(modes, cutoff);
        if size > MAX_BASIS {
            return Err(SimError::BasisTooLarge { size, limit: MAX_BASIS });
        }
        let mut states = Vec::with_capacity(size);
        for total in 0..=cutoff {
            let mut grade = Vec::new();
            compositions(modes, total, &mut vec![0; modes], 0, &mut grade);
            grade.sort();
            states.extend(grade);
        }
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self {
            modes,
            cutoff,
            states,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn index_of(&self, occ: &[u32]) -> Option<usize> {
        self.index.get(occ).copied()
    }
}

fn basis_size(modes: usize, cutoff: u32) -> usize {
    // C(modes + cutoff, cutoff), saturating
    let mut acc: u128 = 1;
    for k in 1..=u128::from(cutoff) {
        acc = acc * (modes as u128 + k) / k;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

fn compositions(modes: usize, remaining: u32, cur: &mut Vec<u32>, pos: usize, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == modes {
        cur[pos] = remaining;
        out.push(cur.clone());
        return;
    }
    if modes == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for n in 0..=remaining {
        cur[pos] = n;
        compositions(modes, remaining - n, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseStateVector {
    pub basis: DenseBasis,
    pub amplitudes: DVector<Complex64>,
}

impl DenseStateVector {
    pub fn from_fock(state: &FockState, basis: &DenseBasis) -> Result<Self> {
        if state.mode_count() != basis.modes {
            return Err(SimError::DimensionMismatch {
                expected: basis.modes,
                actual: state.mode_count(),
            });
        }
        let mut amplitudes = DVector::zeros(basis.len());
        for (occ, a) in state.components() {
            let i = basis.index_of(occ.counts()).ok_or(SimError::CutoffExceeded {
                total: occ.total(),
                cutoff: basis.cutoff,
            })?;
            amplitudes[i] = *a;
        }
        Ok(Self {
            basis: basis.clone(),
            amplitudes,
        })
    }

    pub fn amplitude(&self, occ: &[u32]) -> Complex64 {
        self.basis.index_of(occ).map(|i| self.amplitudes[i]).unwrap_or_default()
    }

    pub fn apply(&self, matrix: &DMatrix<Complex64>) -> Self {
        Self {
            basis: self.basis.clone(),
            amplitudes: matrix * &self.amplitudes,
        }
    }

    /// Largest difference against a sparse state over the same modes.
    pub fn max_abs_diff(&self, state: &FockState) -> f64 {
        let mut worst = 0.0_f64;
        for (i, occ) in self.basis.states.iter().enumerate() {
            worst = worst.max((self.amplitudes[i] - state.amplitude(occ)).norm());
        }
        // components of `state` outside the basis count fully
        for (occ, a) in state.components() {
            if self.basis.index_of(occ.counts()).is_none() {
                worst = worst.max(a.norm());
            }
        }
        worst
    }
}

/// Linear map on creation operators, column `k` being the image of `a_k†`.
fn mode_matrix(element: &Element, modes: usize) -> Result<Vec<Vec<Complex64>>> {
    let one = Complex64::new(1.0, 0.0);
    let mut m = vec![vec![Complex64::default(); modes]; modes];
    let check = |id: ModeId| {
        if id.index() < modes {
            Ok(())
        } else {
            Err(SimError::UnknownMode(id.index()))
        }
    };
    match element {
        Element::BeamSplitter(bs) => {
            let (p, q) = bs.modes();
            check(p)?;
            check(q)?;
            for (k, row) in m.iter_mut().enumerate() {
                row[k] = one;
            }
            let u = bs.matrix();
            let (p, q) = (p.index(), q.index());
            m[p][p] = u[0][0];
            m[q][p] = u[1][0];
            m[p][q] = u[0][1];
            m[q][q] = u[1][1];
        }
        Element::PhaseShift(ps) => {
            check(ps.mode)?;
            for (k, row) in m.iter_mut().enumerate() {
                row[k] = if k == ps.mode.index() {
                    Complex64::from_polar(1.0, ps.phi)
                } else {
                    one
                };
            }
        }
        Element::Permutation(perm) => {
            if perm.mapping().len() != modes {
                return Err(SimError::NotBijective { modes });
            }
            for (k, &t) in perm.mapping().iter().enumerate() {
                m[t][k] = one;
            }
        }
    }
    Ok(m)
}

type Poly = BTreeMap<Vec<u32>, Complex64>;

fn poly_mul_linear(poly: &Poly, column: &[(usize, Complex64)]) -> Poly {
    let mut out = Poly::new();
    for (mono, c) in poly {
        for &(j, u) in column {
            let mut next = mono.clone();
            next[j] += 1;
            *out.entry(next).or_default() += c * u;
        }
    }
    out
}

fn fact(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// Dense unitary of `element` on `basis`: column `|n⟩` is
/// ∏_k (Σ_j M_jk a_j†)^{n_k} / √(∏ n_k!) |0⟩ expanded monomial by monomial.
pub fn dense_element_matrix(element: &Element, basis: &DenseBasis) -> Result<DMatrix<Complex64>> {
    let dim = basis.len();
    if dim.saturating_mul(dim) > MAX_MATRIX_ENTRIES {
        return Err(SimError::BasisTooLarge {
            size: dim,
            limit: (MAX_MATRIX_ENTRIES as f64).sqrt() as usize,
        });
    }
    let m = mode_matrix(element, basis.modes)?;
    let columns: Vec<Vec<(usize, Complex64)>> = (0..basis.modes)
        .map(|k| {
            (0..basis.modes)
                .filter(|&j| m[j][k] != Complex64::default())
                .map(|j| (j, m[j][k]))
                .collect()
        })
        .collect();

    let mut out = DMatrix::zeros(dim, dim);
    for (col, occ) in basis.states.iter().enumerate() {
        let mut poly = Poly::new();
        poly.insert(vec![0; basis.modes], Complex64::new(1.0, 0.0));
        let mut norm = 1.0;
        for (k, &n) in occ.iter().enumerate() {
            for _ in 0..n {
                poly = poly_mul_linear(&poly, &columns[k]);
            }
            norm *= fact(n);
        }
        let scale = 1.0 / norm.sqrt();
        for (mono, c) in poly {
            let row = basis.index_of(&mono).expect("linear optics conserves photon number");
            let weight: f64 = mono.iter().map(|&n| fact(n)).product::<f64>().sqrt();
            out[(row, col)] += c * weight * scale;
        }
    }
    Ok(out)
}

/// max |U†U − I|.
pub fn unitarity_deviation(u: &DMatrix<Complex64>) -> f64 {
    let prod = u.adjoint() * u;
    let mut worst = 0.0_f64;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// Runs `elements` on the dense route.
pub fn dense_evolve(elements: &[Element], input: &FockState) -> Result<DenseStateVector> {
    let basis = DenseBasis::new(input.mode_count(), input.cutoff())?;
    let mut state = DenseStateVector::from_fock(input, &basis)?;
    for e in elements {
        state = state.apply(&dense_element_matrix(e, &basis)?);
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub probability: f64,
    /// Unnormalized amplitudes of the unmeasured modes, keyed by their
    /// occupation in mode-id order.
    pub conditional: BTreeMap<Vec<u32>, Complex64>,
}

/// Exact joint distribution of photon counts on `measured` after `elements`,
/// with the conditional remainder for every outcome.
pub fn enumerate_outcomes(
    elements: &[Element],
    input: &FockState,
    measured: &[ModeId],
) -> Result<BTreeMap<Vec<u32>, Outcome>> {
    let evolved = dense_evolve(elements, input)?;
    let mut table: BTreeMap<Vec<u32>, Outcome> = BTreeMap::new();
    for (i, occ) in evolved.basis.states.iter().enumerate() {
        let a = evolved.amplitudes[i];
        if a.norm() == 0.0 {
            continue;
        }
        let key: Vec<u32> = measured.iter().map(|m| occ[m.index()]).collect();
        let rest: Vec<u32> = occ
            .iter()
            .enumerate()
            .filter(|(k, _)| !measured.iter().any(|m| m.index() == *k))
            .map(|(_, &n)| n)
            .collect();
        let entry = table.entry(key).or_insert_with(|| Outcome {
            probability: 0.0,
            conditional: BTreeMap::new(),
        });
        entry.probability += a.norm_sqr();
        *entry.conditional.entry(rest).or_default() += a;
    }
    Ok(table)
}
