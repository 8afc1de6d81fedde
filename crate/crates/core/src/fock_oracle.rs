//! Brute-force re-run of the swapping protocol in a truncated Fock basis.
//!
//! Nothing here calls into the coherent-state engine. Every CV mode is a
//! vector of photon-number amplitudes, beam splitters act on two-mode Fock
//! states, and homodyne detection contracts with Hermite-function
//! wavefunctions. Only the parameter and outcome types are shared.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::protocol::{HeraldedOutcome, HomodyneSpec, ProtocolParams};
use crate::states::{ComplexAmp, QubitDensity};

const THETA: f64 = FRAC_PI_4;
const TAIL_LIMIT: f64 = 1e-10;
/// Largest factorial representable in f64.
const MAX_PHOTONS: usize = 170;

/// Multimode Fock amplitudes, row-major with the last mode fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    dims: Vec<usize>,
    amps: Vec<ComplexAmp>,
}

impl FockVector {
    pub fn new(dims: Vec<usize>, amps: Vec<ComplexAmp>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != amps.len() {
            return Err(Error::FockDimension);
        }
        Ok(FockVector { dims, amps })
    }

    pub fn single_mode(amps: Vec<ComplexAmp>) -> Result<Self> {
        FockVector::new(vec![amps.len()], amps)
    }

    /// `|0…0⟩` with photon cutoff `n_max` in each of `modes` modes.
    pub fn vacuum(modes: usize, n_max: usize) -> Result<Self> {
        let dims = vec![n_max + 1; modes];
        let mut amps = vec![ComplexAmp::new(0.0, 0.0); dims.iter().product()];
        if let Some(a) = amps.first_mut() {
            *a = ComplexAmp::new(1.0, 0.0);
        }
        FockVector::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn modes(&self) -> usize {
        self.dims.len()
    }

    pub fn amplitudes(&self) -> &[ComplexAmp] {
        &self.amps
    }

    pub fn amplitude(&self, photons: &[usize]) -> ComplexAmp {
        if photons.len() != self.dims.len() || photons.iter().zip(&self.dims).any(|(n, d)| n >= d) {
            return ComplexAmp::new(0.0, 0.0);
        }
        let idx = photons
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (n, d)| acc * d + n);
        self.amps[idx]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`; cutoffs may differ, missing entries count as zero.
    pub fn inner(&self, other: &FockVector) -> Result<ComplexAmp> {
        if self.modes() != other.modes() {
            return Err(Error::FockDimension);
        }
        let mut total = ComplexAmp::new(0.0, 0.0);
        let mut idx = vec![0usize; self.modes()];
        for a in &self.amps {
            total += a.conj() * other.amplitude(&idx);
            increment(&mut idx, &self.dims);
        }
        Ok(total)
    }

    pub fn tensor(&self, other: &FockVector) -> FockVector {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        FockVector { dims, amps }
    }
}

fn increment(idx: &mut [usize], dims: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Photon cutoff of every input mode.
    pub n_max: usize,
    /// Simpson grid spacing across a homodyne window.
    pub x_step: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_max: 40,
            x_step: 0.005,
        }
    }
}

impl OracleConfig {
    /// Rejects cutoffs below `⌈|β|² + 6|β|⌉` for the largest amplitude `β`.
    pub fn check_amplitude(&self, beta: f64) -> Result<()> {
        let need = (beta * beta + 6.0 * beta).ceil() as usize;
        if self.n_max < need || 2 * self.n_max > MAX_PHOTONS {
            return Err(Error::Truncation {
                n_max: self.n_max,
                beta,
            });
        }
        Ok(())
    }
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for k in 1..=n {
        f[k] = f[k - 1] * k as f64;
    }
    f
}

/// Coherent state `e^{−|β|²/2} Σ βⁿ/√n! |n⟩` up to `n_max`, rejected when the
/// dropped tail carries more than 1e-10 probability.
pub fn coherent_fock(beta: ComplexAmp, n_max: usize) -> Result<FockVector> {
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut c = ComplexAmp::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    amps.push(c);
    for n in 1..=n_max {
        c = c * beta / (n as f64).sqrt();
        amps.push(c);
    }
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        c = c * beta / (n as f64).sqrt();
        let p = c.norm_sqr();
        tail += p;
        if p < 1e-30 * tail.max(1e-300) || n > n_max + 2000 {
            break;
        }
        n += 1;
    }
    if tail > TAIL_LIMIT {
        return Err(Error::Truncation {
            n_max,
            beta: beta.norm(),
        });
    }
    FockVector::single_mode(amps)
}

/// Two-mode beam splitter with `a† → √T a† + √(1−T) b†` and
/// `b† → −√(1−T) a† + √T b†`, so that `|β, γ⟩ ↦ |√T β − √(1−T) γ, √(1−T) β + √T γ⟩`.
/// Output cutoffs grow to hold every photon of the input.
pub fn bs_unitary_apply(state: &FockVector, t: f64) -> Result<FockVector> {
    if state.modes() != 2 {
        return Err(Error::FockDimension);
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TransmissionOutOfRange(t));
    }
    let (d1, d2) = (state.dims[0], state.dims[1]);
    let dout = d1 + d2 - 1;
    if dout > MAX_PHOTONS + 1 {
        return Err(Error::FockDimension);
    }
    let fact = factorials(dout);
    let (c, s) = (t.sqrt(), (1.0 - t).sqrt());
    let pow = |x: f64, k: usize| if k == 0 { 1.0 } else { x.powi(k as i32) };
    let binom = |n: usize, k: usize| fact[n] / (fact[k] * fact[n - k]);

    let mut out = vec![ComplexAmp::new(0.0, 0.0); dout * dout];
    for m in 0..d1 {
        for n in 0..d2 {
            let amp = state.amps[m * d2 + n];
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let scale = 1.0 / (fact[m] * fact[n]).sqrt();
            // (c a† + s b†)^m (−s a† + c b†)^n |0⟩
            for j in 0..=m {
                let cj = binom(m, j) * pow(c, j) * pow(s, m - j);
                for k in 0..=n {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    let ck = sign * binom(n, k) * pow(s, k) * pow(c, n - k);
                    let (p, q) = (j + k, m + n - j - k);
                    out[p * dout + q] += amp * (cj * ck * scale * (fact[p] * fact[q]).sqrt());
                }
            }
        }
    }
    FockVector::new(vec![dout, dout], out)
}

/// `⟨0, m+n| U |m, n⟩` for the beam splitter of [`bs_unitary_apply`].
fn vacuum_first_output(m: usize, n: usize, t: f64, fact: &[f64]) -> f64 {
    let (c, s) = (t.sqrt(), (1.0 - t).sqrt());
    s.powi(m as i32) * c.powi(n as i32) * (fact[m + n] / (fact[m] * fact[n])).sqrt()
}

/// `ψ_n(x) e^{−inθ}` for `n = 0..=n_max`, with
/// `ψ_n(x) = (2/π)^{1/4} (2ⁿ n!)^{−1/2} H_n(√2 x) e^{−x²}`.
pub fn quadrature_wavefunctions(n_max: usize, x: f64, theta: f64) -> Vec<ComplexAmp> {
    let y = 2f64.sqrt() * x;
    let mut psi = Vec::with_capacity(n_max + 1);
    psi.push((2.0 / PI).powf(0.25) * (-x * x).exp());
    if n_max >= 1 {
        psi.push(2f64.sqrt() * y * psi[0]);
    }
    for n in 2..=n_max {
        let nf = n as f64;
        psi.push((2.0 / nf).sqrt() * y * psi[n - 1] - ((nf - 1.0) / nf).sqrt() * psi[n - 2]);
    }
    psi.into_iter()
        .enumerate()
        .map(|(n, p)| ComplexAmp::from_polar(p, -(n as f64) * theta))
        .collect()
}

pub fn quadrature_wavefunction(n: usize, x: f64, theta: f64) -> ComplexAmp {
    quadrature_wavefunctions(n, x, theta)[n]
}

/// One hybrid pair after its lossy channel: `out[q]` holds the
/// (signal, environment) Fock amplitudes of the branch with qubit value `q`.
fn lossy_pair(alpha: f64, t: f64, n_max: usize) -> Result<[FockVector; 2]> {
    let plus = coherent_fock(ComplexAmp::new(alpha, 0.0), n_max)?;
    let minus = coherent_fock(ComplexAmp::new(-alpha, 0.0), n_max)?;
    let cat: Vec<ComplexAmp> = plus
        .amps
        .iter()
        .zip(&minus.amps)
        .map(|(a, b)| a + b)
        .collect();
    let norm = cat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    // Hadamard on |0⟩, then e^{iπn/2} on the |1⟩ branch
    let h = std::f64::consts::FRAC_1_SQRT_2 / norm;
    let branch0: Vec<ComplexAmp> = cat.iter().map(|z| z * h).collect();
    let branch1: Vec<ComplexAmp> = cat
        .iter()
        .enumerate()
        .map(|(n, z)| z * h * ComplexAmp::from_polar(1.0, FRAC_PI_2 * n as f64))
        .collect();
    let env = FockVector::single_mode(vec![ComplexAmp::new(1.0, 0.0)])?;
    let lossy = |b: Vec<ComplexAmp>| -> Result<FockVector> {
        bs_unitary_apply(&FockVector::single_mode(b)?.tensor(&env), t)
    };
    Ok([lossy(branch0)?, lossy(branch1)?])
}

/// Post-vacuum amplitudes `V[a, c, e_B, e_D, k]` with `k` the photon number
/// left in D after the 50:50 beam splitter, flattened with `k` fastest.
struct PostVacuum {
    env: usize,
    kdim: usize,
    v: Vec<ComplexAmp>,
}

impl PostVacuum {
    fn build(alpha: f64, t_b: f64, t_d: f64, n_max: usize) -> Result<Self> {
        let pb = lossy_pair(alpha, t_b, n_max)?;
        let pd = lossy_pair(alpha, t_d, n_max)?;
        let d = pb[0].dims[0];
        let kdim = 2 * d - 1;
        let fact = factorials(kdim);
        let coef: Vec<f64> = (0..d * d)
            .map(|i| vacuum_first_output(i / d, i % d, 0.5, &fact))
            .collect();
        let mut v = vec![ComplexAmp::new(0.0, 0.0); 4 * d * d * kdim];
        for a in 0..2 {
            for c in 0..2 {
                let (sb, sd) = (&pb[a].amps, &pd[c].amps);
                for eb in 0..d {
                    for ed in 0..d {
                        let base = ((((a * 2 + c) * d + eb) * d) + ed) * kdim;
                        for m in 0..d {
                            let x = sb[m * d + eb];
                            if x.norm_sqr() == 0.0 {
                                continue;
                            }
                            for n in 0..d {
                                v[base + m + n] += x * sd[n * d + ed] * coef[m * d + n];
                            }
                        }
                    }
                }
            }
        }
        Ok(PostVacuum { env: d, kdim, v })
    }

    fn probability(&self) -> f64 {
        self.v.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Environment-traced `(A, C)` matrix after projecting D onto `⟨x_θ|`.
    fn heralded(&self, x: f64) -> Matrix4<ComplexAmp> {
        let psi = quadrature_wavefunctions(self.kdim - 1, x, THETA);
        let block = self.env * self.env;
        let mut r = vec![ComplexAmp::new(0.0, 0.0); 4 * block];
        for (slot, chunk) in r.iter_mut().zip(self.v.chunks_exact(self.kdim)) {
            *slot = chunk.iter().zip(&psi).map(|(v, p)| v * p).sum();
        }
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = (0..block)
                    .map(|e| r[i * block + e] * r[j * block + e].conj())
                    .sum();
            }
        }
        m
    }

    fn simpson(&self, lo: f64, hi: f64, step: f64) -> Matrix4<ComplexAmp> {
        let n = {
            let n = ((hi - lo) / step).ceil().max(2.0) as usize;
            n + n % 2
        };
        let h = (hi - lo) / n as f64;
        let mut total = Matrix4::zeros();
        for i in 0..=n {
            let w = match i {
                0 => 1.0,
                i if i == n => 1.0,
                i if i % 2 == 1 => 4.0,
                _ => 2.0,
            };
            total += self.heralded(lo + i as f64 * h).scale(w);
        }
        total.scale(h / 3.0)
    }
}

/// Homodyne intervals for the requested peaks; overlapping intervals are
/// replaced by their union.
fn oracle_windows(x0: f64, dx: f64, signs: &[f64]) -> Vec<(f64, f64)> {
    let mut w: Vec<(f64, f64)> = signs
        .iter()
        .map(|s| (s * x0 - dx / 2.0, s * x0 + dx / 2.0))
        .collect();
    w.sort_by(|a, b| a.0.total_cmp(&b.0));
    if w.len() == 2 && w[1].0 < w[0].1 {
        return vec![(w[0].0, w[0].1.max(w[1].1))];
    }
    w
}

/// Runs the full protocol at the fixed mismatch in `params` in Fock space.
pub fn oracle_run_es(params: &ProtocolParams, cfg: &OracleConfig) -> Result<HeraldedOutcome> {
    params.validate()?;
    if !(cfg.x_step > 0.0) {
        return Err(invalid("x_step", format!("{} must be > 0", cfg.x_step)));
    }
    cfg.check_amplitude(2f64.sqrt() * params.alpha)?;
    let (t_b, t_d) = (params.t, params.t - params.upsilon);
    let pv = PostVacuum::build(params.alpha, t_b, t_d, cfg.n_max)?;
    let p_vacuum = pv.probability();
    let x0 = 0.5 * (t_b.sqrt() + t_d.sqrt()) * params.alpha;
    let signs = params.peak.signs();

    let mut matrix = Matrix4::zeros();
    let p_homodyne = match params.homodyne {
        HomodyneSpec::Ideal => {
            for s in signs {
                matrix += pv.heralded(s * x0);
            }
            None
        }
        HomodyneSpec::Banded { dx } => {
            for (lo, hi) in oracle_windows(x0, dx, signs) {
                matrix += pv.simpson(lo, hi, cfg.x_step);
            }
            Some(if p_vacuum > 0.0 {
                matrix.trace().re / p_vacuum
            } else {
                0.0
            })
        }
    };
    Ok(HeraldedOutcome {
        rho: QubitDensity::normalized(matrix)?,
        p_vacuum,
        p_homodyne,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexAmp {
        ComplexAmp::new(re, im)
    }

    #[test]
    fn coherent_zero_is_vacuum() {
        let v = coherent_fock(c(0., 0.), 10).unwrap();
        assert_eq!(v.amplitude(&[0]), c(1., 0.));
        assert!(v.amplitudes()[1..].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn coherent_norm_and_truncation() {
        let v = coherent_fock(c(2.5, 0.), 40).unwrap();
        assert!((v.norm_sqr() - 1.0).abs() < 1e-10);
        assert!(matches!(
            coherent_fock(c(4.0, 0.), 10),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn identity_at_full_transmission() {
        let a = coherent_fock(c(0.7, -0.3), 12).unwrap();
        let b = coherent_fock(c(-0.2, 0.5), 12).unwrap();
        let s = a.tensor(&b);
        let out = bs_unitary_apply(&s, 1.0).unwrap();
        for m in 0..13 {
            for n in 0..13 {
                assert!((out.amplitude(&[m, n]) - s.amplitude(&[m, n])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn splits_coherent_input() {
        let s = coherent_fock(c(1.0, 0.), 30)
            .unwrap()
            .tensor(&FockVector::vacuum(1, 0).unwrap());
        let out = bs_unitary_apply(&s, 0.64).unwrap();
        let expect = coherent_fock(c(0.8, 0.), 30)
            .unwrap()
            .tensor(&coherent_fock(c(0.6, 0.), 30).unwrap());
        assert!((out.inner(&expect).unwrap().norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn one_photon_on_balanced_splitter() {
        // |1,0⟩ → (|1,0⟩ + |0,1⟩)/√2 and |0,1⟩ → (−|1,0⟩ + |0,1⟩)/√2
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let one =
            FockVector::new(vec![2, 2], vec![c(0., 0.), c(0., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        let out = bs_unitary_apply(&one, 0.5).unwrap();
        assert!((out.amplitude(&[1, 0]) - c(h, 0.)).norm() < 1e-15);
        assert!((out.amplitude(&[0, 1]) - c(h, 0.)).norm() < 1e-15);
        let two =
            FockVector::new(vec![2, 2], vec![c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        let out = bs_unitary_apply(&two, 0.5).unwrap();
        assert!((out.amplitude(&[1, 0]) - c(-h, 0.)).norm() < 1e-15);
        assert!((out.amplitude(&[0, 1]) - c(h, 0.)).norm() < 1e-15);
    }

    #[test]
    fn hong_ou_mandel_dip() {
        let s =
            FockVector::new(vec![2, 2], vec![c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]).unwrap();
        let out = bs_unitary_apply(&s, 0.5).unwrap();
        assert!(out.amplitude(&[1, 1]).norm() < 1e-15);
        assert!((out.amplitude(&[2, 0]).norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn vacuum_output_row_matches_full_transform() {
        let fact = factorials(20);
        for (m, n) in [(0, 0), (1, 0), (2, 3), (4, 1)] {
            let mut amps = vec![c(0., 0.); 36];
            amps[m * 6 + n] = c(1., 0.);
            let out = bs_unitary_apply(&FockVector::new(vec![6, 6], amps).unwrap(), 0.5).unwrap();
            let direct = vacuum_first_output(m, n, 0.5, &fact);
            assert!(
                (out.amplitude(&[0, m + n]) - c(direct, 0.)).norm() < 1e-14,
                "{m},{n}"
            );
        }
    }

    #[test]
    fn ground_wavefunction_at_origin() {
        assert!(
            (quadrature_wavefunction(0, 0.0, 0.0) - c((2.0 / PI).powf(0.25), 0.)).norm() < 1e-15
        );
    }

    #[test]
    fn first_hermite_functions_closed_form() {
        let x: f64 = 0.37;
        let g = (2.0 / PI).powf(0.25) * (-x * x).exp();
        let psi = quadrature_wavefunctions(2, x, 0.0);
        // H_1(y) = 2y, H_2(y) = 4y² − 2 with y = √2 x
        let y = 2f64.sqrt() * x;
        assert!((psi[1].re - g * 2.0 * y / 2f64.sqrt()).abs() < 1e-15);
        assert!((psi[2].re - g * (4.0 * y * y - 2.0) / 8f64.sqrt()).abs() < 1e-15);
        let rotated = quadrature_wavefunction(2, x, 0.3);
        assert!((rotated - psi[2] * ComplexAmp::from_polar(1.0, -0.6)).norm() < 1e-15);
    }

    #[test]
    fn windows_merge_when_overlapping() {
        assert_eq!(
            oracle_windows(1.0, 0.5, &[1.0, -1.0]),
            vec![(-1.25, -0.75), (0.75, 1.25)]
        );
        assert_eq!(oracle_windows(0.5, 2.0, &[1.0, -1.0]), vec![(-1.5, 1.5)]);
    }

    #[test]
    fn vacuum_probability_at_zero_amplitude() {
        let out = oracle_run_es(&ProtocolParams::new(0.0, 1.0), &OracleConfig::default()).unwrap();
        assert!((out.p_vacuum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn undersized_cutoff_rejected() {
        let cfg = OracleConfig {
            n_max: 10,
            ..OracleConfig::default()
        };
        assert!(matches!(
            oracle_run_es(&ProtocolParams::new(2.0, 1.0), &cfg),
            Err(Error::Truncation { .. })
        ));
    }
}
