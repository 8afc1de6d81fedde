//! Bell targets, fidelity and the two heralding probabilities.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::optics::project_homodyne_point;
use crate::protocol::modes::D;
use crate::protocol::{
    homodyne_windows, peak_center, post_vacuum_state, GaussianLossSpec, HomodyneSpec, Peak,
    ProtocolParams, HOMODYNE_THETA,
};
use crate::states::{ComplexAmp, QubitDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellSign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellTarget {
    pub alpha: f64,
    pub sign: BellSign,
}

impl BellTarget {
    pub fn vector(&self) -> [ComplexAmp; 4] {
        bell_state(self.alpha, self.sign)
    }
}

/// `(e^{−iα²}|00⟩ ± e^{+iα²}|11⟩)/√2`.
pub fn bell_state(alpha: f64, sign: BellSign) -> [ComplexAmp; 4] {
    let a2 = alpha * alpha;
    let s = match sign {
        BellSign::Plus => 1.0,
        BellSign::Minus => -1.0,
    };
    let zero = ComplexAmp::new(0.0, 0.0);
    [
        ComplexAmp::from_polar(FRAC_1_SQRT_2, -a2),
        zero,
        zero,
        ComplexAmp::from_polar(s * FRAC_1_SQRT_2, a2),
    ]
}

/// `⟨ψ|ρ|ψ⟩` for a unit-trace `ρ` and unit `target`.
pub fn fidelity(rho: &QubitDensity, target: &[ComplexAmp; 4]) -> Result<f64> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::Invariant(format!(
            "fidelity needs unit trace, got {tr}"
        )));
    }
    let norm: f64 = target.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Invariant(format!("target norm² {norm}")));
    }
    Ok(rho.expectation(target))
}

/// Probability of the vacuum outcome on B at the mismatch in `params`.
pub fn vacuum_success_probability(params: &ProtocolParams) -> Result<f64> {
    params.validate()?;
    Ok(post_vacuum_state(params.alpha, params.t_b(), params.t_d())?.1)
}

/// Conditional density of the π/4 quadrature of D given the vacuum outcome.
fn conditional_density(alpha: f64, t_b: f64, t_d: f64) -> Result<impl Fn(f64) -> Result<f64>> {
    let (vac, p0) = post_vacuum_state(alpha, t_b, t_d)?;
    if !(p0 > 0.0) {
        return Err(Error::NothingHeralded);
    }
    Ok(move |x: f64| Ok(project_homodyne_point(&vac, D, HOMODYNE_THETA, x)?.squared_norm() / p0))
}

fn windows_probability(params: &ProtocolParams, dx: f64, upsilon: f64) -> Result<f64> {
    let p = params.with_upsilon(upsilon);
    p.validate()?;
    let density = conditional_density(p.alpha, p.t_b(), p.t_d())?;
    let x0 = peak_center(p.alpha, p.t_b(), p.t_d());
    let mut total = 0.0;
    for (window, nodes) in homodyne_windows(x0, dx, Peak::Both, p.nodes)? {
        for (x, w) in nodes.on_interval(window.lower(), window.upper()) {
            total += w * density(x)?;
        }
    }
    Ok(total)
}

/// Probability that the post-selected D quadrature lands in either peak
/// window `±x0 ± dx/2`. Averaged over the mismatch ensemble when `spec` is
/// given, otherwise evaluated at `params.upsilon`.
pub fn homodyne_success_probability(
    params: &ProtocolParams,
    spec: Option<&GaussianLossSpec>,
) -> Result<f64> {
    let dx = match params.homodyne {
        HomodyneSpec::Banded { dx } if dx > 0.0 => dx,
        HomodyneSpec::Banded { dx } => return Err(invalid("dx", format!("{dx} must be > 0"))),
        HomodyneSpec::Ideal => {
            return Err(invalid(
                "dx",
                "homodyne success probability needs a banded window",
            ))
        }
    };
    match spec {
        None => windows_probability(params, dx, params.upsilon),
        Some(spec) => {
            spec.validate(params.t)?;
            let mut total = 0.0;
            for (u, w) in spec.weighted_nodes()? {
                total += w * windows_probability(params, dx, u)?;
            }
            Ok(total)
        }
    }
}

/// Conditional probability density of the π/4 quadrature of D, evaluated on
/// `xs`.
pub fn quadrature_distribution(params: &ProtocolParams, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    let density = conditional_density(params.alpha, params.t_b(), params.t_d())?;
    xs.iter().map(|&x| Ok((x, density(x)?))).collect()
}
