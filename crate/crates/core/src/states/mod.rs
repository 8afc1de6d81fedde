//! Finite superpositions of multimode coherent states carrying qubit labels.
//!
//! A [`PureState`] is a list of [`CoherentTerm`]s over a fixed [`Registry`] of
//! modes. Each term fixes a computational-basis bit on every discrete-variable
//! (DV) mode and a coherent amplitude on every continuous-variable (CV) mode,
//! so the whole protocol stays in closed form: inner products and partial
//! traces reduce to products of coherent-state overlaps.
//!
//! Terms are never merged implicitly. [`PureState::compact`] is the only place
//! where amplitudes are compared.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

mod density;

pub use density::QubitDensity;

/// Complex amplitude used for coherent-state labels and term coefficients.
pub type ComplexAmp = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Dv,
    Cv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeId {
    pub name: &'static str,
    pub kind: ModeKind,
}

impl ModeId {
    pub const fn dv(name: &'static str) -> Self {
        ModeId {
            name,
            kind: ModeKind::Dv,
        }
    }

    pub const fn cv(name: &'static str) -> Self {
        ModeId {
            name,
            kind: ModeKind::Cv,
        }
    }

    pub fn is_cv(&self) -> bool {
        self.kind == ModeKind::Cv
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ModeKind::Dv => "DV",
            ModeKind::Cv => "CV",
        };
        write!(f, "{}:{}", self.name, kind)
    }
}

/// Ordered set of modes. DV and CV modes are indexed separately, in
/// registry order, by the bit and amplitude vectors of each term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    modes: Vec<ModeId>,
}

impl Registry {
    pub fn new(modes: Vec<ModeId>) -> Result<Self> {
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].iter().any(|o| o.name == m.name) {
                return Err(Error::DuplicateMode(*m));
            }
        }
        Ok(Registry { modes })
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn contains(&self, mode: ModeId) -> bool {
        self.modes.contains(&mode)
    }

    pub fn dv_modes(&self) -> impl Iterator<Item = ModeId> + '_ {
        self.modes.iter().copied().filter(|m| !m.is_cv())
    }

    pub fn cv_modes(&self) -> impl Iterator<Item = ModeId> + '_ {
        self.modes.iter().copied().filter(|m| m.is_cv())
    }

    pub fn dv_count(&self) -> usize {
        self.dv_modes().count()
    }

    pub fn cv_count(&self) -> usize {
        self.cv_modes().count()
    }

    /// Position of `mode` among the DV modes.
    pub fn dv_index(&self, mode: ModeId) -> Result<usize> {
        if mode.is_cv() {
            return Err(Error::WrongModeKind(mode));
        }
        self.dv_modes()
            .position(|m| m == mode)
            .ok_or(Error::UnknownMode(mode))
    }

    /// Position of `mode` among the CV modes.
    pub fn cv_index(&self, mode: ModeId) -> Result<usize> {
        if !mode.is_cv() {
            return Err(Error::WrongModeKind(mode));
        }
        self.cv_modes()
            .position(|m| m == mode)
            .ok_or(Error::UnknownMode(mode))
    }

    fn without(&self, mode: ModeId) -> Registry {
        Registry {
            modes: self.modes.iter().copied().filter(|&m| m != mode).collect(),
        }
    }
}

/// One branch of a superposition: `coeff · |bits⟩_DV ⊗ |amps⟩_CV`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentTerm {
    bits: Vec<u8>,
    amps: Vec<ComplexAmp>,
    coeff: ComplexAmp,
}

impl CoherentTerm {
    pub fn new(bits: Vec<u8>, amps: Vec<ComplexAmp>, coeff: ComplexAmp) -> Self {
        CoherentTerm { bits, amps, coeff }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn amps(&self) -> &[ComplexAmp] {
        &self.amps
    }

    pub fn coeff(&self) -> ComplexAmp {
        self.coeff
    }

    fn is_finite(&self) -> bool {
        self.coeff.is_finite() && self.amps.iter().all(|a| a.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    registry: Registry,
    terms: Vec<CoherentTerm>,
}

impl PureState {
    pub fn new(registry: Registry, terms: Vec<CoherentTerm>) -> Result<Self> {
        let (ndv, ncv) = (registry.dv_count(), registry.cv_count());
        for t in &terms {
            if t.bits.len() != ndv || t.amps.len() != ncv || t.bits.iter().any(|&b| b > 1) {
                return Err(Error::TermShape);
            }
            if !t.is_finite() {
                return Err(Error::Invariant("non-finite term".into()));
            }
        }
        Ok(PureState { registry, terms })
    }

    /// The zero vector over `registry` (no terms).
    pub fn zero(registry: Registry) -> Self {
        PureState {
            registry,
            terms: Vec::new(),
        }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn terms(&self) -> &[CoherentTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn squared_norm(&self) -> f64 {
        inner_product(self, self)
            .expect("a state shares its own registry")
            .re
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled(&self, factor: ComplexAmp) -> PureState {
        self.map_terms(|t| CoherentTerm {
            coeff: t.coeff * factor,
            ..t.clone()
        })
    }

    pub(crate) fn map_terms(&self, f: impl Fn(&CoherentTerm) -> CoherentTerm) -> PureState {
        PureState {
            registry: self.registry.clone(),
            terms: self.terms.iter().map(f).collect(),
        }
    }

    /// Tensor product; the registry of `other` is appended to ours.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let mut modes = self.registry.modes.clone();
        modes.extend_from_slice(&other.registry.modes);
        let registry = Registry::new(modes)?;
        let dv_from_self: Vec<bool> = registry
            .dv_modes()
            .map(|m| self.registry.contains(m))
            .collect();
        let cv_from_self: Vec<bool> = registry
            .cv_modes()
            .map(|m| self.registry.contains(m))
            .collect();

        let mut terms = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                let (mut ia, mut ib) = (a.bits.iter(), b.bits.iter());
                let bits = dv_from_self
                    .iter()
                    .map(|&s| *if s { ia.next() } else { ib.next() }.unwrap())
                    .collect();
                let (mut ja, mut jb) = (a.amps.iter(), b.amps.iter());
                let amps = cv_from_self
                    .iter()
                    .map(|&s| *if s { ja.next() } else { jb.next() }.unwrap())
                    .collect();
                terms.push(CoherentTerm {
                    bits,
                    amps,
                    coeff: a.coeff * b.coeff,
                });
            }
        }
        Ok(PureState { registry, terms })
    }

    /// Appends a CV mode in the vacuum to every term.
    pub fn with_vacuum_mode(&self, mode: ModeId) -> Result<PureState> {
        if !mode.is_cv() {
            return Err(Error::WrongModeKind(mode));
        }
        let mut modes = self.registry.modes.clone();
        modes.push(mode);
        let registry = Registry::new(modes)?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut amps = t.amps.clone();
                amps.push(ComplexAmp::new(0.0, 0.0));
                CoherentTerm { amps, ..t.clone() }
            })
            .collect();
        Ok(PureState { registry, terms })
    }

    /// Removes a CV mode after its amplitude has been folded into each
    /// coefficient by `weight`.
    pub(crate) fn contract_cv_mode(
        &self,
        mode: ModeId,
        weight: impl Fn(ComplexAmp) -> ComplexAmp,
    ) -> Result<PureState> {
        let idx = self.registry.cv_index(mode)?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut amps = t.amps.clone();
                let gamma = amps.remove(idx);
                CoherentTerm {
                    bits: t.bits.clone(),
                    amps,
                    coeff: t.coeff * weight(gamma),
                }
            })
            .collect();
        Ok(PureState {
            registry: self.registry.without(mode),
            terms,
        })
    }

    /// Merges terms whose bits agree and whose amplitudes agree within
    /// `tolerance`, then drops terms with |coeff| ≤ `tolerance`.
    pub fn compact(&self, tolerance: f64) -> PureState {
        let mut out: Vec<CoherentTerm> = Vec::new();
        for t in &self.terms {
            let same = out.iter_mut().find(|o| {
                o.bits == t.bits
                    && o.amps
                        .iter()
                        .zip(&t.amps)
                        .all(|(a, b)| (a - b).norm() <= tolerance)
            });
            match same {
                Some(o) => o.coeff += t.coeff,
                None => out.push(t.clone()),
            }
        }
        out.retain(|t| t.coeff.norm() > tolerance);
        PureState {
            registry: self.registry.clone(),
            terms: out,
        }
    }
}

/// `⟨β|γ⟩ = exp(−|β|²/2 − |γ|²/2 + β*γ)`.
pub fn coherent_overlap(beta: ComplexAmp, gamma: ComplexAmp) -> ComplexAmp {
    (-0.5 * beta.norm_sqr() - 0.5 * gamma.norm_sqr() + beta.conj() * gamma).exp()
}

fn term_overlap(a: &CoherentTerm, b: &CoherentTerm) -> ComplexAmp {
    if a.bits != b.bits {
        return ComplexAmp::new(0.0, 0.0);
    }
    let env: ComplexAmp = a
        .amps
        .iter()
        .zip(&b.amps)
        .map(|(&x, &y)| coherent_overlap(x, y))
        .product();
    a.coeff.conj() * b.coeff * env
}

/// `⟨s1|s2⟩`, antilinear in the first argument.
pub fn inner_product(s1: &PureState, s2: &PureState) -> Result<ComplexAmp> {
    if s1.registry != s2.registry {
        return Err(Error::RegistryMismatch);
    }
    Ok(s1
        .terms
        .iter()
        .flat_map(|a| s2.terms.iter().map(move |b| term_overlap(a, b)))
        .sum())
}

pub fn normalize(s: &PureState) -> Result<PureState> {
    let n2 = s.squared_norm();
    if !(n2 > 1e-300) {
        return Err(Error::ZeroState);
    }
    Ok(s.scaled(ComplexAmp::new(n2.sqrt().recip(), 0.0)))
}

/// Un-normalized reduced density matrix on the two `keep` qubits, tracing
/// every CV mode in `drop` against the coherent-state overlaps.
pub fn reduced_qubit_matrix(
    s: &PureState,
    keep: [ModeId; 2],
    drop: &[ModeId],
) -> Result<nalgebra::Matrix4<ComplexAmp>> {
    let reg = s.registry();
    if reg.dv_count() != 2 || keep[0] == keep[1] {
        return Err(Error::TraceModes);
    }
    let (k0, k1) = (reg.dv_index(keep[0])?, reg.dv_index(keep[1])?);
    let cv: Vec<ModeId> = reg.cv_modes().collect();
    if cv.len() != drop.len() || !cv.iter().all(|m| drop.contains(m)) {
        return Err(Error::TraceModes);
    }

    let index = |t: &CoherentTerm| 2 * t.bits[k0] as usize + t.bits[k1] as usize;
    let mut rho = nalgebra::Matrix4::<ComplexAmp>::zeros();
    for ti in s.terms() {
        let q = index(ti);
        for tj in s.terms() {
            let env: ComplexAmp = tj
                .amps
                .iter()
                .zip(&ti.amps)
                .map(|(&gj, &gi)| coherent_overlap(gj, gi))
                .product();
            rho[(q, index(tj))] += ti.coeff * tj.coeff.conj() * env;
        }
    }
    Ok(rho)
}

/// Reduced two-qubit state on `keep`, normalized to unit trace.
pub fn trace_to_qubits(s: &PureState, keep: [ModeId; 2], drop: &[ModeId]) -> Result<QubitDensity> {
    QubitDensity::normalized(reduced_qubit_matrix(s, keep, drop)?)
}

/// Hadamard on a DV mode. Doubles the term count.
pub fn apply_hadamard(s: &PureState, mode: ModeId) -> Result<PureState> {
    let k = s.registry().dv_index(mode)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut terms = Vec::with_capacity(2 * s.len());
    for t in s.terms() {
        let sign = if t.bits[k] == 0 { 1.0 } else { -1.0 };
        for (bit, c) in [(0u8, h), (1u8, sign * h)] {
            let mut bits = t.bits.clone();
            bits[k] = bit;
            terms.push(CoherentTerm {
                bits,
                amps: t.amps.clone(),
                coeff: t.coeff * c,
            });
        }
    }
    PureState::new(s.registry().clone(), terms)
}

/// Phase-space rotation `|β⟩ → |e^{iφ}β⟩` on `target`, applied only where
/// the `control` qubit is 1.
pub fn apply_controlled_rotation(
    s: &PureState,
    control: ModeId,
    target: ModeId,
    angle: f64,
) -> Result<PureState> {
    let k = s.registry().dv_index(control)?;
    let j = s.registry().cv_index(target)?;
    let phase = ComplexAmp::from_polar(1.0, angle);
    Ok(s.map_terms(|t| {
        let mut amps = t.amps.clone();
        if t.bits[k] == 1 {
            amps[j] *= phase;
        }
        CoherentTerm { amps, ..t.clone() }
    }))
}
