use nalgebra::{Matrix4, Vector4};

use super::ComplexAmp;
use crate::error::{Error, Result};

/// Two-qubit density matrix on (A, C) in the basis |00⟩, |01⟩, |10⟩, |11⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitDensity {
    m: Matrix4<ComplexAmp>,
}

impl QubitDensity {
    /// Wraps a matrix as-is. Use [`QubitDensity::normalized`] for raw
    /// heralded matrices.
    pub fn from_matrix(m: Matrix4<ComplexAmp>) -> Self {
        QubitDensity { m }
    }

    /// Scales `m` to unit trace.
    pub fn normalized(m: Matrix4<ComplexAmp>) -> Result<Self> {
        let tr = m.trace().re;
        if !(tr > 1e-300) || !tr.is_finite() {
            return Err(Error::NothingHeralded);
        }
        Ok(QubitDensity { m: m.unscale(tr) })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn from_pure(psi: &[ComplexAmp; 4]) -> Self {
        let v = Vector4::from_column_slice(psi);
        QubitDensity { m: v * v.adjoint() }
    }

    pub fn maximally_mixed() -> Self {
        QubitDensity {
            m: Matrix4::identity().scale(0.25),
        }
    }

    pub fn matrix(&self) -> &Matrix4<ComplexAmp> {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> ComplexAmp {
        self.m[(row, col)]
    }

    pub fn trace(&self) -> ComplexAmp {
        self.m.trace()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        (self.m - self.m.adjoint()).camax()
    }

    fn hermitian_part(&self) -> Matrix4<ComplexAmp> {
        (self.m + self.m.adjoint()).scale(0.5)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let ev = self.hermitian_part().symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &QubitDensity) -> f64 {
        let d = QubitDensity {
            m: self.m - other.m,
        };
        0.5 * d.eigenvalues().iter().map(|l| l.abs()).sum::<f64>()
    }

    /// `⟨ψ|ρ|ψ⟩` (real part).
    pub fn expectation(&self, psi: &[ComplexAmp; 4]) -> f64 {
        let v = Vector4::from_column_slice(psi);
        (v.adjoint() * self.m * v)[(0, 0)].re
    }

    /// Wootters concurrence.
    pub fn concurrence(&self) -> f64 {
        let h = self.hermitian_part();
        let eig = h.symmetric_eigen();
        let sqrt_d = Matrix4::from_diagonal(
            &eig.eigenvalues
                .map(|l| ComplexAmp::new(l.max(0.0).sqrt(), 0.0)),
        );
        let sqrt_rho = eig.eigenvectors * sqrt_d * eig.eigenvectors.adjoint();
        // σy ⊗ σy in the computational basis
        let mut yy = Matrix4::<ComplexAmp>::zeros();
        yy[(0, 3)] = ComplexAmp::new(-1.0, 0.0);
        yy[(3, 0)] = ComplexAmp::new(-1.0, 0.0);
        yy[(1, 2)] = ComplexAmp::new(1.0, 0.0);
        yy[(2, 1)] = ComplexAmp::new(1.0, 0.0);
        let tilde = yy * h.conjugate() * yy;
        let r = sqrt_rho * tilde * sqrt_rho;
        let r = (r + r.adjoint()).scale(0.5);
        let mut l: Vec<f64> = r
            .symmetric_eigenvalues()
            .iter()
            .map(|x| x.max(0.0).sqrt())
            .collect();
        l.sort_by(|a, b| b.total_cmp(a));
        (l[0] - l[1] - l[2] - l[3]).max(0.0)
    }

    /// Checks Hermiticity (1e-12), unit trace (1e-10) and positivity (−1e-9).
    pub fn validate(&self) -> Result<()> {
        if !self.m.iter().all(|z| z.is_finite()) {
            return Err(Error::Invariant("non-finite density entry".into()));
        }
        let herm = self.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::Invariant(format!("hermiticity error {herm:e}")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::Invariant(format!("trace {tr}")));
        }
        let lmin = self.min_eigenvalue();
        if lmin < -1e-9 {
            return Err(Error::Invariant(format!("negative eigenvalue {lmin:e}")));
        }
        Ok(())
    }
}
