//! Linear-optics primitives acting on [`PureState`]s.
//!
//! Quadratures follow `x̂ = (â + â†)/2` (vacuum variance ¼) throughout. A
//! homodyne outcome `x` at angle `θ` projects onto the eigenstate of
//! `x̂_θ = (â e^{−iθ} + â† e^{iθ})/2`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureNodes;
use crate::states::{CoherentTerm, ComplexAmp, ModeId, PureState};

/// A finite-resolution homodyne outcome `[x0 − dx/2, x0 + dx/2]` at angle `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneWindow {
    theta: f64,
    x0: f64,
    dx: f64,
}

impl HomodyneWindow {
    /// `theta` is reduced into `[0, 2π)`.
    pub fn new(theta: f64, x0: f64, dx: f64) -> Result<Self> {
        if !(dx >= 0.0) || !dx.is_finite() {
            return Err(Error::InvalidWindow(format!("dx = {dx} must be >= 0")));
        }
        if !theta.is_finite() || !x0.is_finite() {
            return Err(Error::InvalidWindow("non-finite theta or x0".into()));
        }
        Ok(HomodyneWindow {
            theta: theta.rem_euclid(TAU),
            x0,
            dx,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn lower(&self) -> f64 {
        self.x0 - 0.5 * self.dx
    }

    pub fn upper(&self) -> f64 {
        self.x0 + 0.5 * self.dx
    }
}

fn cv_pair_check(s: &PureState, i: ModeId, j: ModeId) -> Result<(usize, usize)> {
    if i == j {
        return Err(Error::SameMode(i));
    }
    Ok((s.registry().cv_index(i)?, s.registry().cv_index(j)?))
}

/// Beam splitter of transmission `t` between `signal` and a vacuum `env`:
/// `|β⟩|0⟩ → |√T β⟩|√(1−T) β⟩`.
pub fn apply_lossy_bs(s: &PureState, signal: ModeId, env: ModeId, t: f64) -> Result<PureState> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TransmissionOutOfRange(t));
    }
    let (is, ie) = cv_pair_check(s, signal, env)?;
    if s.terms()
        .iter()
        .any(|term| term.amps()[ie] != ComplexAmp::new(0.0, 0.0))
    {
        return Err(Error::NonVacuumEnvironment(env));
    }
    let (tt, rr) = (t.sqrt(), (1.0 - t).sqrt());
    Ok(s.map_terms(|term| {
        let mut amps = term.amps().to_vec();
        let beta = amps[is];
        amps[is] = beta * tt;
        amps[ie] = beta * rr;
        CoherentTerm::new(term.bits().to_vec(), amps, term.coeff())
    }))
}

/// 50:50 beam splitter: `|β_i⟩|β_j⟩ → |(β_i − β_j)/√2⟩|(β_i + β_j)/√2⟩`.
pub fn apply_balanced_bs(s: &PureState, i: ModeId, j: ModeId) -> Result<PureState> {
    let (ii, jj) = cv_pair_check(s, i, j)?;
    Ok(s.map_terms(|term| {
        let mut amps = term.amps().to_vec();
        let (bi, bj) = (amps[ii], amps[jj]);
        amps[ii] = (bi - bj) * FRAC_1_SQRT_2;
        amps[jj] = (bi + bj) * FRAC_1_SQRT_2;
        CoherentTerm::new(term.bits().to_vec(), amps, term.coeff())
    }))
}

/// Projects `mode` onto the vacuum and removes it. The returned state is not
/// renormalized; `prob` is its squared norm.
pub fn project_vacuum(s: &PureState, mode: ModeId) -> Result<(PureState, f64)> {
    let out = s.contract_cv_mode(mode, |g| ComplexAmp::new((-0.5 * g.norm_sqr()).exp(), 0.0))?;
    let prob = out.squared_norm();
    Ok((out, prob))
}

/// `⟨x_θ|α⟩` for the coherent state `|α⟩ = ||α| e^{iφ}⟩`:
/// `(2/π)^{1/4} exp[−x² + 2e^{i(φ−θ)}|α|x − ½e^{2i(φ−θ)}|α|² − ½|α|²]`.
pub fn homodyne_amplitude(x: f64, theta: f64, alpha: ComplexAmp) -> ComplexAmp {
    let (r, phi) = alpha.to_polar();
    let rot = ComplexAmp::from_polar(1.0, phi - theta);
    let exponent = -x * x + rot * (2.0 * r * x) - rot * rot * (0.5 * r * r) - 0.5 * r * r;
    exponent.exp() * (2.0 / PI).powf(0.25)
}

/// Point homodyne projection `⟨x_θ|` on `mode`; not renormalized.
pub fn project_homodyne_point(
    s: &PureState,
    mode: ModeId,
    theta: f64,
    x: f64,
) -> Result<PureState> {
    s.contract_cv_mode(mode, |g| homodyne_amplitude(x, theta, g))
}

/// Incoherent mixture `∫ P(x)|s⟩⟨s|P(x) dx` over a homodyne window, held as
/// quadrature-weighted point projections.
#[derive(Debug, Clone)]
pub struct BandedProjection {
    /// `(weight, P(x_k)|s⟩)` per quadrature node, in ascending `x_k`.
    pub branches: Vec<(f64, PureState)>,
    /// `∫_window ‖P(x)|s⟩‖² dx`.
    pub prob: f64,
}

fn window_nodes(window: &HomodyneWindow, nodes: &QuadratureNodes) -> Result<Vec<(f64, f64)>> {
    if !(window.dx() > 0.0) {
        return Err(Error::InvalidWindow(format!(
            "banded projection needs dx > 0, got {}",
            window.dx()
        )));
    }
    if nodes.count() < QuadratureNodes::MIN {
        return Err(Error::NodeCount(nodes.count()));
    }
    Ok(nodes.on_interval(window.lower(), window.upper()))
}

pub fn project_homodyne_banded(
    s: &PureState,
    mode: ModeId,
    window: &HomodyneWindow,
    nodes: &QuadratureNodes,
) -> Result<BandedProjection> {
    let pts = window_nodes(window, nodes)?;
    let branches = pts
        .par_iter()
        .map(|&(x, w)| Ok((w, project_homodyne_point(s, mode, window.theta(), x)?)))
        .collect::<Result<Vec<_>>>()?;
    let prob = branches.iter().map(|(w, b)| w * b.squared_norm()).sum();
    Ok(BandedProjection { branches, prob })
}

/// The coherent reading of a banded projection, `∫ P(x)|s⟩ dx` as a single
/// ket. Kept for comparison against [`project_homodyne_banded`] only.
pub fn project_homodyne_banded_coherent(
    s: &PureState,
    mode: ModeId,
    window: &HomodyneWindow,
    nodes: &QuadratureNodes,
) -> Result<PureState> {
    let pts = window_nodes(window, nodes)?;
    let projected = pts
        .iter()
        .map(|&(x, w)| Ok((w, project_homodyne_point(s, mode, window.theta(), x)?)))
        .collect::<Result<Vec<_>>>()?;
    let first = &projected[0].1;
    let terms = first
        .terms()
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let coeff = projected
                .iter()
                .map(|(w, p)| p.terms()[k].coeff() * *w)
                .sum();
            CoherentTerm::new(t.bits().to_vec(), t.amps().to_vec(), coeff)
        })
        .collect();
    PureState::new(first.registry().clone(), terms)
}
