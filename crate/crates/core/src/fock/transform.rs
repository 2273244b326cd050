//! Linear maps on creation operators.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::mode::ModeLabel;
use super::FockError;

/// Tolerance on column orthonormality for transforms flagged unitary.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

/// A linear substitution `a_m^dagger -> sum_i c_i b_{m_i}^dagger`.
///
/// Each listed input mode owns a column of `(output mode, coefficient)`
/// pairs. Modes without a column pass through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransform {
    columns: BTreeMap<ModeLabel, Vec<(ModeLabel, C64)>>,
    unitary: bool,
}

impl ModeTransform {
    /// Builds a transform, rejecting non-finite coefficients and, when
    /// `unitary` is set, columns that are not orthonormal on their support.
    pub fn new(columns: BTreeMap<ModeLabel, Vec<(ModeLabel, C64)>>, unitary: bool) -> Result<Self, FockError> {
        let mut normalized = BTreeMap::new();
        for (input, column) in columns {
            let mut merged: BTreeMap<ModeLabel, C64> = BTreeMap::new();
            for (output, c) in column {
                if !c.re.is_finite() || !c.im.is_finite() {
                    return Err(FockError::NonFiniteCoefficient(input));
                }
                *merged.entry(output).or_default() += c;
            }
            let column: Vec<_> = merged.into_iter().filter(|(_, c)| *c != C64::new(0.0, 0.0)).collect();
            normalized.insert(input, column);
        }
        let t = ModeTransform {
            columns: normalized,
            unitary,
        };
        if unitary {
            let defect = t.orthonormality_defect();
            if defect > UNITARY_TOLERANCE {
                return Err(FockError::NotUnitary { defect });
            }
        }
        Ok(t)
    }

    pub fn identity() -> Self {
        ModeTransform {
            columns: BTreeMap::new(),
            unitary: true,
        }
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn inputs(&self) -> impl Iterator<Item = &ModeLabel> {
        self.columns.keys()
    }

    pub fn touches(&self, mode: &ModeLabel) -> bool {
        self.columns.contains_key(mode)
    }

    /// The image of `mode`; the identity column for unlisted modes.
    pub fn column(&self, mode: &ModeLabel) -> Vec<(ModeLabel, C64)> {
        match self.columns.get(mode) {
            Some(col) => col.clone(),
            None => vec![(*mode, C64::new(1.0, 0.0))],
        }
    }

    /// Largest deviation of the column Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let cols: Vec<BTreeMap<ModeLabel, C64>> = self.columns.values().map(|c| c.iter().copied().collect()).collect();
        let mut defect: f64 = 0.0;
        for (i, ci) in cols.iter().enumerate() {
            for (j, cj) in cols.iter().enumerate().skip(i) {
                let dot: C64 = ci.iter().filter_map(|(m, a)| cj.get(m).map(|b| a.conj() * b)).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((dot - expected).norm());
            }
        }
        defect
    }

    /// `self` followed by `next`, as a single transform.
    pub fn then(&self, next: &ModeTransform) -> ModeTransform {
        let mut columns = BTreeMap::new();
        let inputs: std::collections::BTreeSet<ModeLabel> =
            self.columns.keys().chain(next.columns.keys()).copied().collect();
        for input in inputs {
            let mut out: BTreeMap<ModeLabel, C64> = BTreeMap::new();
            for (mid, c) in self.column(&input) {
                for (dst, d) in next.column(&mid) {
                    *out.entry(dst).or_default() += c * d;
                }
            }
            columns.insert(input, out.into_iter().collect::<Vec<_>>());
        }
        ModeTransform {
            columns,
            unitary: self.unitary && next.unitary,
        }
    }

    /// Conjugate transpose of the listed block. Exact for transforms whose
    /// outputs stay inside their own input set (beam splitters, wave plates).
    pub fn adjoint(&self) -> ModeTransform {
        let mut columns: BTreeMap<ModeLabel, Vec<(ModeLabel, C64)>> = BTreeMap::new();
        for (input, col) in &self.columns {
            for (output, c) in col {
                columns.entry(*output).or_default().push((*input, c.conj()));
            }
        }
        ModeTransform {
            columns,
            unitary: self.unitary,
        }
    }
}
