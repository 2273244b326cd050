//! Sparse superpositions over occupation configurations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64 as C64;

use super::mode::{OccupationConfig, Rail};
use super::transform::ModeTransform;
use super::FockError;

/// Amplitudes with magnitude below this are dropped after every operation.
pub const DEFAULT_PRUNE_EPSILON: f64 = 1e-14;

/// A pure state of a fixed number of photons, stored as a sparse map from
/// occupation configuration to amplitude.
///
/// Iteration order is the canonical order of [`OccupationConfig`], so every
/// derived quantity is reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonicState {
    terms: BTreeMap<OccupationConfig, C64>,
    prune_epsilon: f64,
}

impl Default for PhotonicState {
    fn default() -> Self {
        PhotonicState::empty()
    }
}

impl PhotonicState {
    /// The zero vector.
    pub fn empty() -> Self {
        PhotonicState {
            terms: BTreeMap::new(),
            prune_epsilon: DEFAULT_PRUNE_EPSILON,
        }
    }

    /// The photon vacuum `|0>`, the unit of [`PhotonicState::tensor`].
    pub fn vacuum() -> Self {
        PhotonicState {
            terms: BTreeMap::from([(OccupationConfig::vacuum(), C64::new(1.0, 0.0))]),
            prune_epsilon: DEFAULT_PRUNE_EPSILON,
        }
    }

    pub fn single(config: OccupationConfig) -> Self {
        PhotonicState {
            terms: BTreeMap::from([(config, C64::new(1.0, 0.0))]),
            prune_epsilon: DEFAULT_PRUNE_EPSILON,
        }
    }

    /// Sums the given terms. Rejects non-finite amplitudes and configurations
    /// with differing photon numbers.
    pub fn from_terms<I>(terms: I) -> Result<Self, FockError>
    where
        I: IntoIterator<Item = (OccupationConfig, C64)>,
    {
        let mut state = PhotonicState::empty();
        let mut total: Option<u32> = None;
        for (config, amp) in terms {
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(FockError::NonFiniteAmplitude);
            }
            match total {
                None => total = Some(config.total()),
                Some(t) if t != config.total() => {
                    return Err(FockError::MixedPhotonTotals {
                        expected: t,
                        found: config.total(),
                    })
                }
                _ => {}
            }
            *state.terms.entry(config).or_default() += amp;
        }
        state.prune();
        Ok(state)
    }

    pub fn with_prune_epsilon(mut self, eps: f64) -> Self {
        self.prune_epsilon = eps;
        self.prune();
        self
    }

    pub fn prune_epsilon(&self) -> f64 {
        self.prune_epsilon
    }

    fn prune(&mut self) {
        let eps = self.prune_epsilon;
        self.terms.retain(|_, a| a.norm() >= eps && *a != C64::new(0.0, 0.0));
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OccupationConfig, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, config: &OccupationConfig) -> C64 {
        self.terms.get(config).copied().unwrap_or_default()
    }

    /// Photon number shared by all terms; `None` for the zero vector.
    pub fn photon_count(&self) -> Option<u32> {
        self.terms.keys().next().map(OccupationConfig::total)
    }

    pub fn rails(&self) -> BTreeSet<Rail> {
        self.terms.keys().flat_map(|c| c.rails()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(C64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescaled to unit norm; the zero vector stays zero.
    pub fn normalized(&self) -> PhotonicState {
        let n = self.norm();
        if n == 0.0 {
            return PhotonicState::empty().with_prune_epsilon(self.prune_epsilon);
        }
        self.scaled(C64::new(1.0 / n, 0.0))
    }

    pub fn scaled(&self, factor: C64) -> PhotonicState {
        let mut out = PhotonicState {
            terms: self.terms.iter().map(|(c, a)| (c.clone(), a * factor)).collect(),
            prune_epsilon: self.prune_epsilon,
        };
        out.prune();
        out
    }

    /// `<self|other>` in the orthonormal occupation basis.
    pub fn inner_product(&self, other: &PhotonicState) -> C64 {
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let dot: C64 = small
            .terms
            .iter()
            .filter_map(|(c, a)| large.terms.get(c).map(|b| a.conj() * b))
            .sum();
        if flip {
            dot.conj()
        } else {
            dot
        }
    }

    /// `|<a|b>|^2 / (<a|a><b|b>)`; zero if either vector is zero.
    pub fn fidelity(&self, other: &PhotonicState) -> f64 {
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom == 0.0 {
            return 0.0;
        }
        self.inner_product(other).norm_sqr() / denom
    }

    /// Product state on disjoint rails.
    pub fn tensor(&self, other: &PhotonicState) -> Result<PhotonicState, FockError> {
        let mine = self.rails();
        if let Some(rail) = other.rails().into_iter().find(|r| mine.contains(r)) {
            return Err(FockError::OverlappingRails(rail));
        }
        let mut out = PhotonicState {
            terms: BTreeMap::new(),
            prune_epsilon: self.prune_epsilon.min(other.prune_epsilon),
        };
        for (c1, a1) in &self.terms {
            for (c2, a2) in &other.terms {
                out.terms.insert(c1.merged(c2), a1 * a2);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Substitutes every creation operator by its image under `t` and
    /// re-expands in the normalized occupation basis.
    ///
    /// A basis state `prod_m (a_m^dagger)^{n_m} / sqrt(n_m!) |0>` is expanded
    /// photon by photon into monomials over output modes; a monomial with
    /// output occupations `k` contributes `coefficient * prod sqrt(k!)` to the
    /// normalized configuration `|k>`.
    pub fn apply(&self, t: &ModeTransform) -> Result<PhotonicState, FockError> {
        let mut total: Option<u32> = None;
        let mut out: BTreeMap<OccupationConfig, C64> = BTreeMap::new();
        for (config, amp) in &self.terms {
            match total {
                None => total = Some(config.total()),
                Some(n) if n != config.total() => {
                    return Err(FockError::MixedPhotonTotals {
                        expected: n,
                        found: config.total(),
                    })
                }
                _ => {}
            }
            let (touched, passive): (Vec<_>, Vec<_>) = config.iter().partition(|(m, _)| t.touches(m));
            let passive = OccupationConfig::from_counts(passive);
            let start = amp / config.monomial_norm();
            let mut monomials: BTreeMap<OccupationConfig, C64> = BTreeMap::from([(passive, start)]);
            for (mode, n) in touched {
                let column = t.column(&mode);
                for _ in 0..n {
                    let mut next: BTreeMap<OccupationConfig, C64> = BTreeMap::new();
                    for (mono, c) in &monomials {
                        for (dst, d) in &column {
                            let grown = mono.merged(&OccupationConfig::single(*dst));
                            *next.entry(grown).or_default() += c * d;
                        }
                    }
                    monomials = next;
                }
            }
            for (mono, c) in monomials {
                let factor = mono.monomial_norm();
                *out.entry(mono).or_default() += c * factor;
            }
        }
        let mut state = PhotonicState {
            terms: out,
            prune_epsilon: self.prune_epsilon,
        };
        state.prune();
        Ok(state)
    }

    /// Applies `f` to every configuration, adding amplitudes that land on
    /// the same image.
    pub fn map_configs<F>(&self, f: F) -> PhotonicState
    where
        F: Fn(&OccupationConfig) -> OccupationConfig,
    {
        let mut out: BTreeMap<OccupationConfig, C64> = BTreeMap::new();
        for (c, a) in &self.terms {
            *out.entry(f(c)).or_default() += a;
        }
        let mut state = PhotonicState {
            terms: out,
            prune_epsilon: self.prune_epsilon,
        };
        state.prune();
        state
    }

    /// Groups the state by its occupation of `rails`.
    ///
    /// Each key is a configuration of the measured rails and its value is the
    /// unnormalized component on the remaining rails, so
    /// `sum_k |component_k|^2 = |self|^2`.
    pub fn split_on(&self, rails: &BTreeSet<Rail>) -> BTreeMap<OccupationConfig, PhotonicState> {
        let mut groups: BTreeMap<OccupationConfig, PhotonicState> = BTreeMap::new();
        for (c, a) in &self.terms {
            let (measured, kept) = c.partition(rails);
            let group = groups.entry(measured).or_insert_with(|| PhotonicState {
                terms: BTreeMap::new(),
                prune_epsilon: self.prune_epsilon,
            });
            *group.terms.entry(kept).or_default() += a;
        }
        for g in groups.values_mut() {
            g.prune();
        }
        groups.retain(|_, g| !g.is_empty());
        groups
    }

    /// Projects the `measured` rails onto `fixed` and returns the normalized
    /// residual on the other rails together with the outcome probability.
    pub fn project_and_collapse(
        &self,
        measured: &BTreeSet<Rail>,
        fixed: &OccupationConfig,
    ) -> Result<(PhotonicState, f64), FockError> {
        if let Some(rail) = fixed.rails().into_iter().find(|r| !measured.contains(r)) {
            return Err(FockError::ProjectionOnKeptRail(rail));
        }
        let mut residual = PhotonicState {
            terms: BTreeMap::new(),
            prune_epsilon: self.prune_epsilon,
        };
        for (c, a) in &self.terms {
            let (m, kept) = c.partition(measured);
            if &m == fixed {
                *residual.terms.entry(kept).or_default() += a;
            }
        }
        residual.prune();
        let probability = residual.norm_sqr() / self.norm_sqr().max(f64::MIN_POSITIVE);
        Ok((residual.normalized(), probability))
    }
}

impl fmt::Display for PhotonicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if a.im.abs() < 1e-12 {
                write!(f, "{:+.4}{c}", a.re)?;
            } else {
                write!(f, "({:+.4}{:+.4}i){c}", a.re, a.im)?;
            }
        }
        Ok(())
    }
}
