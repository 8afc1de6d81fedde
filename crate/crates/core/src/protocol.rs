//! The entanglement-swapping pipeline.
//!
//! Two hybrid pairs `|Ψ⟩_AB ⊗ |Ψ⟩_CD` lose photons from B and D into the
//! environment modes EB and ED, B and D are mixed on a 50:50 beam splitter,
//! B is projected onto the vacuum and D is measured by homodyne detection at
//! `θ = π/4`. Tracing out EB and ED leaves the heralded two-qubit state on
//! (A, C).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::optics::{
    apply_balanced_bs, apply_lossy_bs, project_homodyne_banded, project_homodyne_banded_coherent,
    project_homodyne_point, project_vacuum, HomodyneWindow,
};
use crate::quadrature::QuadratureNodes;
use crate::states::{
    apply_controlled_rotation, apply_hadamard, reduced_qubit_matrix, CoherentTerm, ComplexAmp,
    ModeId, PureState, QubitDensity, Registry,
};

/// Mode labels of the six-mode protocol registry.
pub mod modes {
    use crate::states::ModeId;

    pub const A: ModeId = ModeId::dv("A");
    pub const B: ModeId = ModeId::cv("B");
    pub const C: ModeId = ModeId::dv("C");
    pub const D: ModeId = ModeId::cv("D");
    pub const EB: ModeId = ModeId::cv("EB");
    pub const ED: ModeId = ModeId::cv("ED");
}

use modes::{A, B, C, D, EB, ED};

/// Homodyne angle that erases which-path information between the peaks.
pub const HOMODYNE_THETA: f64 = FRAC_PI_4;

/// Largest coherent amplitude accepted by [`ProtocolParams::validate`].
pub const ALPHA_MAX: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Peak {
    Plus,
    Minus,
    Both,
}

impl Peak {
    pub fn signs(self) -> &'static [f64] {
        match self {
            Peak::Plus => &[1.0],
            Peak::Minus => &[-1.0],
            Peak::Both => &[1.0, -1.0],
        }
    }
}

impl std::fmt::Display for Peak {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Peak::Plus => "plus",
            Peak::Minus => "minus",
            Peak::Both => "both",
        })
    }
}

impl std::str::FromStr for Peak {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(Peak::Plus),
            "minus" | "-" => Ok(Peak::Minus),
            "both" => Ok(Peak::Both),
            other => Err(format!("unknown peak '{other}' (plus, minus, both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HomodyneSpec {
    /// Point projection at the peak centre.
    Ideal,
    /// Finite window of width `dx` around the peak centre.
    Banded { dx: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Real coherent amplitude of both hybrid pairs.
    pub alpha: f64,
    /// Transmission of mode B, `T_B = T`.
    pub t: f64,
    /// Loss mismatch; mode D has `T_D = T − υ`.
    pub upsilon: f64,
    pub homodyne: HomodyneSpec,
    pub peak: Peak,
    pub nodes: QuadratureNodes,
}

impl ProtocolParams {
    /// Equal loss, ideal homodyne, plus peak.
    pub fn new(alpha: f64, t: f64) -> Self {
        ProtocolParams {
            alpha,
            t,
            upsilon: 0.0,
            homodyne: HomodyneSpec::Ideal,
            peak: Peak::Plus,
            nodes: QuadratureNodes::default(),
        }
    }

    pub fn with_upsilon(mut self, upsilon: f64) -> Self {
        self.upsilon = upsilon;
        self
    }

    pub fn with_homodyne(mut self, homodyne: HomodyneSpec) -> Self {
        self.homodyne = homodyne;
        self
    }

    pub fn with_dx(self, dx: f64) -> Self {
        self.with_homodyne(HomodyneSpec::Banded { dx })
    }

    pub fn with_peak(mut self, peak: Peak) -> Self {
        self.peak = peak;
        self
    }

    pub fn with_nodes(mut self, nodes: QuadratureNodes) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn t_b(&self) -> f64 {
        self.t
    }

    pub fn t_d(&self) -> f64 {
        self.t - self.upsilon
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=ALPHA_MAX).contains(&self.alpha) {
            return Err(invalid(
                "alpha",
                format!("{} not in [0, {ALPHA_MAX}]", self.alpha),
            ));
        }
        if !(0.0..=1.0).contains(&self.t) {
            return Err(invalid("T", format!("{} not in [0, 1]", self.t)));
        }
        if !(self.upsilon >= 0.0) || self.t - self.upsilon < 0.0 {
            return Err(invalid(
                "upsilon",
                format!("{} must satisfy 0 <= upsilon <= T", self.upsilon),
            ));
        }
        if let HomodyneSpec::Banded { dx } = self.homodyne {
            if !(dx > 0.0) || !dx.is_finite() {
                return Err(invalid("dx", format!("{dx} must be > 0")));
            }
        }
        Ok(())
    }
}

/// One-sided Gaussian ensemble over the loss mismatch υ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianLossSpec {
    /// Ensemble width Υ.
    pub width: f64,
    pub node_count: usize,
    /// Upper limit of the υ quadrature.
    pub upsilon_max: f64,
}

impl GaussianLossSpec {
    /// Truncates the υ support at `min(6Υ, T)`.
    pub fn new(width: f64, node_count: usize, t: f64) -> Self {
        GaussianLossSpec {
            width,
            node_count,
            upsilon_max: (6.0 * width).min(t),
        }
    }

    pub fn validate(&self, t: f64) -> Result<()> {
        if !(self.width > 1e-4) {
            return Err(invalid(
                "Upsilon",
                format!(
                    "{} too small; the one-sided Gaussian degenerates below 1e-4",
                    self.width
                ),
            ));
        }
        if self.node_count < 8 {
            return Err(invalid("node_count", format!("{} < 8", self.node_count)));
        }
        if !(self.upsilon_max > 0.0) || self.upsilon_max > t {
            return Err(invalid(
                "upsilon_max",
                format!("{} must lie in (0, T = {t}]", self.upsilon_max),
            ));
        }
        Ok(())
    }

    /// Quadrature nodes `(υ_k, w_k f(υ_k, Υ))`, with weights renormalized to
    /// sum to one over the truncated support.
    pub fn weighted_nodes(&self) -> Result<Vec<(f64, f64)>> {
        let q = QuadratureNodes::gauss_legendre(self.node_count)?;
        let mut pts: Vec<(f64, f64)> = q
            .on_interval(0.0, self.upsilon_max)
            .into_iter()
            .map(|(u, w)| (u, w * gaussian_weight(u, self.width)))
            .collect();
        let total: f64 = pts.iter().map(|p| p.1).sum();
        for p in &mut pts {
            p.1 /= total;
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedOutcome {
    pub rho: QubitDensity,
    /// Probability of the vacuum outcome on B.
    pub p_vacuum: f64,
    /// Probability of landing in the homodyne window(s), conditioned on the
    /// vacuum outcome. `None` for ideal (point) homodyne.
    pub p_homodyne: Option<f64>,
}

impl HeraldedOutcome {
    pub fn validate(&self) -> Result<()> {
        self.rho.validate()?;
        let in_unit = |p: f64| (-1e-12..=1.0 + 1e-12).contains(&p);
        if !in_unit(self.p_vacuum) {
            return Err(Error::Invariant(format!("p_vacuum = {}", self.p_vacuum)));
        }
        if let Some(p) = self.p_homodyne {
            if !in_unit(p) {
                return Err(Error::Invariant(format!("p_homodyne = {p}")));
            }
        }
        Ok(())
    }
}

fn cat_normalization(alpha: f64) -> f64 {
    1.0 / (2.0 + 2.0 * (-2.0 * alpha * alpha).exp()).sqrt()
}

/// Hybrid pair `(N⁺/√2)[|0⟩(|α⟩+|−α⟩) + |1⟩(|iα⟩+|−iα⟩)]` built by the
/// preparation circuit: even cat on `cv` with `dv` in |0⟩, Hadamard on `dv`,
/// then a `dv`-controlled π/2 phase-space rotation of `cv`.
pub fn prepare_hybrid_pair(alpha: f64, dv: ModeId, cv: ModeId) -> Result<PureState> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(invalid("alpha", format!("{alpha} must be >= 0")));
    }
    let n = ComplexAmp::new(cat_normalization(alpha), 0.0);
    let registry = Registry::new(vec![dv, cv])?;
    let cat = PureState::new(
        registry,
        vec![
            CoherentTerm::new(vec![0], vec![ComplexAmp::new(alpha, 0.0)], n),
            CoherentTerm::new(vec![0], vec![ComplexAmp::new(-alpha, 0.0)], n),
        ],
    )?;
    let h = apply_hadamard(&cat, dv)?;
    apply_controlled_rotation(&h, dv, cv, FRAC_PI_2)
}

/// Six-mode state after both lossy channels, registry `[A, B, C, D, EB, ED]`.
pub fn lossy_state(alpha: f64, t_b: f64, t_d: f64) -> Result<PureState> {
    let ab = prepare_hybrid_pair(alpha, A, B)?;
    let cd = prepare_hybrid_pair(alpha, C, D)?;
    let s = ab.tensor(&cd)?.with_vacuum_mode(EB)?.with_vacuum_mode(ED)?;
    let s = apply_lossy_bs(&s, B, EB, t_b)?;
    apply_lossy_bs(&s, D, ED, t_d)
}

/// State after the 50:50 beam splitter on (B, D).
pub fn mixed_state(alpha: f64, t_b: f64, t_d: f64) -> Result<PureState> {
    apply_balanced_bs(&lossy_state(alpha, t_b, t_d)?, B, D)
}

/// Vacuum-projected state on `[A, C, D, EB, ED]` (not renormalized) and the
/// vacuum probability.
pub fn post_vacuum_state(alpha: f64, t_b: f64, t_d: f64) -> Result<(PureState, f64)> {
    project_vacuum(&mixed_state(alpha, t_b, t_d)?, B)
}

/// Centre of the positive homodyne peak, `(√T_B + √T_D)|α|/2`.
pub fn peak_center(alpha: f64, t_b: f64, t_d: f64) -> f64 {
    0.5 * (t_b.sqrt() + t_d.sqrt()) * alpha.abs()
}

/// Homodyne windows selected by `peak`. Overlapping ± windows are merged
/// into one window (with twice the nodes) so no outcome is counted twice.
pub fn homodyne_windows(
    x0: f64,
    dx: f64,
    peak: Peak,
    nodes: QuadratureNodes,
) -> Result<Vec<(HomodyneWindow, QuadratureNodes)>> {
    if peak == Peak::Both && 2.0 * x0 < dx {
        let merged = HomodyneWindow::new(HOMODYNE_THETA, 0.0, 2.0 * x0 + dx)?;
        let n = QuadratureNodes::gauss_legendre((2 * nodes.count()).min(QuadratureNodes::MAX))?;
        return Ok(vec![(merged, n)]);
    }
    peak.signs()
        .iter()
        .map(|s| Ok((HomodyneWindow::new(HOMODYNE_THETA, s * x0, dx)?, nodes)))
        .collect()
}

/// Heralded density before normalization, for one mismatch value.
#[derive(Debug, Clone)]
pub struct RawHerald {
    /// `Tr_env[Π_D P⁰_B |Ψ⟩⟨Ψ| P⁰_B Π_D]`; trace = heralding weight.
    pub matrix: Matrix4<ComplexAmp>,
    pub p_vacuum: f64,
    /// Conditional window probability (banded homodyne only).
    pub p_homodyne: Option<f64>,
}

/// `(√T + √(T+υ))|α|/2`, the centre obtained when the mismatch is added to
/// the second arm instead of removed. Only used to compare against
/// [`peak_center`].
pub fn raised_arm_center(alpha: f64, t: f64, upsilon: f64) -> f64 {
    0.5 * (t.sqrt() + (t + upsilon).sqrt()) * alpha.abs()
}

/// Runs the pipeline at the exact mismatch in `params` without normalizing.
pub fn herald_raw(params: &ProtocolParams) -> Result<RawHerald> {
    params.validate()?;
    herald_raw_at(
        params,
        peak_center(params.alpha, params.t_b(), params.t_d()),
    )
}

/// [`herald_raw`] with the positive peak centred at `x0` instead.
pub fn herald_raw_at(params: &ProtocolParams, x0: f64) -> Result<RawHerald> {
    params.validate()?;
    if !x0.is_finite() || x0 < 0.0 {
        return Err(invalid("x0", format!("{x0} must be finite and ≥ 0")));
    }
    let (t_b, t_d) = (params.t_b(), params.t_d());
    let (vac, p_vacuum) = post_vacuum_state(params.alpha, t_b, t_d)?;
    let trace = |s: &PureState| reduced_qubit_matrix(s, [A, C], &[EB, ED]);

    let mut matrix = Matrix4::zeros();
    let p_homodyne = match params.homodyne {
        HomodyneSpec::Ideal => {
            for sign in params.peak.signs() {
                matrix += trace(&project_homodyne_point(&vac, D, HOMODYNE_THETA, sign * x0)?)?;
            }
            None
        }
        HomodyneSpec::Banded { dx } => {
            let mut prob = 0.0;
            for (window, nodes) in homodyne_windows(x0, dx, params.peak, params.nodes)? {
                let banded = project_homodyne_banded(&vac, D, &window, &nodes)?;
                for (w, branch) in &banded.branches {
                    matrix += trace(branch)?.scale(*w);
                }
                prob += banded.prob;
            }
            Some(if p_vacuum > 0.0 { prob / p_vacuum } else { 0.0 })
        }
    };
    Ok(RawHerald {
        matrix,
        p_vacuum,
        p_homodyne,
    })
}

/// Heralded state at a fixed mismatch υ.
pub fn run_es_fixed(params: &ProtocolParams) -> Result<HeraldedOutcome> {
    let raw = herald_raw(params)?;
    Ok(HeraldedOutcome {
        rho: QubitDensity::normalized(raw.matrix)?,
        p_vacuum: raw.p_vacuum,
        p_homodyne: raw.p_homodyne,
    })
}

/// Heralded state averaged over a one-sided Gaussian ensemble of mismatches.
/// `params.upsilon` is ignored. Un-normalized densities are averaged and the
/// result is normalized once.
pub fn run_es_averaged(
    params: &ProtocolParams,
    spec: &GaussianLossSpec,
) -> Result<HeraldedOutcome> {
    spec.validate(params.t)?;
    let nodes = spec.weighted_nodes()?;
    let raws = nodes
        .iter()
        .map(|&(u, _)| herald_raw(&params.with_upsilon(u)))
        .collect::<Result<Vec<_>>>()?;

    let mut matrix = Matrix4::zeros();
    let mut p_vacuum = 0.0;
    let mut p_homodyne = 0.0;
    for ((_, w), raw) in nodes.iter().zip(&raws) {
        matrix += raw.matrix.scale(*w);
        p_vacuum += w * raw.p_vacuum;
        p_homodyne += w * raw.p_homodyne.unwrap_or(0.0);
    }
    Ok(HeraldedOutcome {
        rho: QubitDensity::normalized(matrix)?,
        p_vacuum,
        p_homodyne: match params.homodyne {
            HomodyneSpec::Ideal => None,
            HomodyneSpec::Banded { .. } => Some(p_homodyne),
        },
    })
}

/// Heralded state under the coherent window reading, where each window
/// contributes the single ket `∫ P(x)|s⟩ dx`. For comparison with the
/// incoherent pipeline only; needs a banded homodyne spec.
pub fn run_es_coherent_window(params: &ProtocolParams) -> Result<QubitDensity> {
    params.validate()?;
    let HomodyneSpec::Banded { dx } = params.homodyne else {
        return Err(invalid(
            "dx",
            "coherent window reading needs a banded window",
        ));
    };
    let (t_b, t_d) = (params.t_b(), params.t_d());
    let (vac, _) = post_vacuum_state(params.alpha, t_b, t_d)?;
    let x0 = peak_center(params.alpha, t_b, t_d);
    let mut matrix = Matrix4::zeros();
    for (window, nodes) in homodyne_windows(x0, dx, params.peak, params.nodes)? {
        let ket = project_homodyne_banded_coherent(&vac, D, &window, &nodes)?;
        matrix += reduced_qubit_matrix(&ket, [A, C], &[EB, ED])?;
    }
    QubitDensity::normalized(matrix)
}

/// One-sided Gaussian `f(υ, Υ) = √(2/(πΥ²)) exp(−υ²/(2Υ²))`.
pub fn gaussian_weight(upsilon: f64, width: f64) -> f64 {
    (2.0 / (PI * width * width)).sqrt() * (-upsilon * upsilon / (2.0 * width * width)).exp()
}

/// `T = 10^(−dB/10)`.
pub fn db_to_transmission(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

pub fn transmission_to_db(t: f64) -> f64 {
    -10.0 * t.log10()
}

/// Fibre length giving transmission `t` at `atten_db_per_km`.
pub fn distance_for_t(t: f64, atten_db_per_km: f64) -> f64 {
    transmission_to_db(t) / atten_db_per_km
}
