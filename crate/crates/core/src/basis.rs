//! Orthonormal time-dependent vector sets built from products of elementary
//! rotations, and the three-vector frame of the Lambda system.
//!
//! Frame vectors are stored in the fixed basis order (|g>, |a>, |e>).

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Unitarity tolerance for matrices built here.
pub const UNITARY_TOL: f64 = 1e-12;

/// Tolerance for deciding that two normalized vectors describe the same ray.
pub const RAY_TOL: f64 = 1e-10;

/// One elementary factor A^(k) of the product construction.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ElementaryRotation {
    pub dim: usize,
    pub stage: usize,
    pub theta: f64,
    pub chi: f64,
}

impl ElementaryRotation {
    pub fn new(dim: usize, stage: usize, theta: f64, chi: f64) -> Result<Self> {
        let max_stage = match dim {
            2 => 2,
            3 => 3,
            _ => {
                return Err(Error::Dimension(format!(
                    "elementary rotations are defined for dim 2 and 3, got {dim}"
                )))
            }
        };
        if stage == 0 || stage > max_stage {
            return Err(Error::Dimension(format!(
                "stage {stage} is not valid for dim {dim} (expected 1..={max_stage})"
            )));
        }
        Ok(Self { dim, stage, theta, chi })
    }

    pub fn matrix(&self) -> UnitaryMatrix {
        let (s, c) = self.theta.sin_cos();
        let ph = C64::from_polar(1.0, self.chi);
        let re = |x: f64| C64::new(x, 0.0);
        let m = match (self.dim, self.stage) {
            (2, _) => DMatrix::from_row_slice(2, 2, &[re(c), ph * s, re(s), -ph * c]),
            (3, 1) => DMatrix::from_row_slice(
                3,
                3,
                &[
                    re(c), ph * s, C64::ZERO,
                    re(s), -ph * c, C64::ZERO,
                    C64::ZERO, C64::ZERO, C64::ONE,
                ],
            ),
            // stages 2 and 3 share the exchanged layout
            (3, _) => DMatrix::from_row_slice(
                3,
                3,
                &[
                    C64::ZERO, ph * s, re(c),
                    C64::ZERO, -ph * c, re(s),
                    C64::ONE, C64::ZERO, C64::ZERO,
                ],
            ),
            _ => unreachable!("validated in ElementaryRotation::new"),
        };
        UnitaryMatrix(m)
    }
}

/// Square complex matrix expected to satisfy U U^dagger = 1.
///
/// Construction does not check unitarity; use [`UnitaryMatrix::unitarity_error`]
/// or [`basis_vectors`], which rejects inputs beyond [`UNITARY_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(DMatrix<C64>);

impl UnitaryMatrix {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    /// Largest entry of |U U^dagger - 1|.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        let prod = &self.0 * self.0.adjoint();
        (prod - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> C64 {
        self.0.determinant()
    }
}

pub fn elementary_matrix(dim: usize, stage: usize, theta: f64, chi: f64) -> Result<UnitaryMatrix> {
    Ok(ElementaryRotation::new(dim, stage, theta, chi)?.matrix())
}

/// Ordered product of the stages, listed in application order: `stages[0]`
/// is A^(1) and ends up rightmost, so `[a1, a2, a3]` yields A^(3) A^(2) A^(1).
pub fn compose(stages: &[UnitaryMatrix]) -> Result<UnitaryMatrix> {
    let first = stages
        .first()
        .ok_or_else(|| Error::Dimension("cannot compose an empty list of stages".into()))?;
    let dim = first.dim();
    let mut acc = DMatrix::<C64>::identity(dim, dim);
    for (k, stage) in stages.iter().enumerate() {
        if stage.dim() != dim {
            return Err(Error::Dimension(format!(
                "stage {} has dim {}, expected {dim}",
                k + 1,
                stage.dim()
            )));
        }
        acc = &stage.0 * acc;
    }
    Ok(UnitaryMatrix(acc))
}

/// Rows of `a` read as the vectors |zeta_n> = sum_m A_{n,m} |m>.
pub fn basis_vectors(a: &UnitaryMatrix) -> Result<Vec<DVector<C64>>> {
    let err = a.unitarity_error();
    if err > UNITARY_TOL {
        return Err(Error::InvariantViolation(format!(
            "matrix is not unitary (max |U U^dagger - 1| = {err:e})"
        )));
    }
    Ok(a.0.row_iter().map(|row| row.transpose()).collect())
}

/// Whether two normalized vectors agree up to a global phase.
pub fn same_ray(u: &[C64], v: &[C64]) -> bool {
    let overlap: C64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    (overlap.norm() - 1.0).abs() <= RAY_TOL
}

/// Rates of the frame parameters at the evaluation time.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct FrameRates {
    pub theta: f64,
    pub gamma: f64,
    pub phi1: f64,
    pub phi2: f64,
}

/// Frame of the Lambda system: the designed path |phi0> and its two
/// orthogonal partners, with their exact time derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameBasis {
    pub phi0: Vector3<C64>,
    pub phi1: Vector3<C64>,
    pub phi2: Vector3<C64>,
    pub dphi0: Vector3<C64>,
    pub dphi1: Vector3<C64>,
    pub dphi2: Vector3<C64>,
    pub theta: f64,
    pub gamma: f64,
    pub phase1: f64,
    pub phase2: f64,
    pub rates: FrameRates,
}

impl FrameBasis {
    pub fn vectors(&self) -> [&Vector3<C64>; 3] {
        [&self.phi0, &self.phi1, &self.phi2]
    }

    pub fn derivatives(&self) -> [&Vector3<C64>; 3] {
        [&self.dphi0, &self.dphi1, &self.dphi2]
    }
}

// Amplitude of one component before its phase factor, with partial
// derivatives in theta and gamma.
#[derive(Copy, Clone)]
struct Amp {
    v: C64,
    d_theta: C64,
    d_gamma: C64,
}

impl Amp {
    fn real(v: f64, d_theta: f64, d_gamma: f64) -> Self {
        Self { v: v.into(), d_theta: d_theta.into(), d_gamma: d_gamma.into() }
    }
}

fn assemble(amps: [Amp; 3], phases: [f64; 3], phase_rates: [f64; 3], rates: &FrameRates) -> (Vector3<C64>, Vector3<C64>) {
    let mut v = Vector3::zeros();
    let mut dv = Vector3::zeros();
    for k in 0..3 {
        let e = C64::from_polar(1.0, phases[k]);
        let a = amps[k];
        v[k] = a.v * e;
        dv[k] = (a.d_theta * rates.theta + a.d_gamma * rates.gamma + C64::i() * phase_rates[k] * a.v) * e;
    }
    (v, dv)
}

/// Frame vectors for path angles `theta`, `gamma` and phases `phi1`, `phi2`.
pub fn lambda_frame(theta: f64, gamma: f64, phi1: f64, phi2: f64, rates: FrameRates) -> FrameBasis {
    let (st, ct) = theta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    let i = C64::i();
    let phases = [phi1, 0.0, phi2];
    let phase_rates = [rates.phi1, 0.0, rates.phi2];

    let path = [
        Amp::real(ct * cg, -st * cg, -ct * sg),
        Amp::real(sg, 0.0, cg),
        Amp::real(st * cg, ct * cg, -st * sg),
    ];

    // Partners share everything but the sign of the imaginary theta terms.
    let partner = |sign: f64| {
        let k = -std::f64::consts::FRAC_1_SQRT_2;
        [
            Amp {
                v: k * (sg * ct + sign * i * st),
                d_theta: k * (-sg * st + sign * i * ct),
                d_gamma: (k * cg * ct).into(),
            },
            Amp::real(-k * cg, 0.0, k * sg),
            Amp {
                v: k * (sg * st - sign * i * ct),
                d_theta: k * (sg * ct + sign * i * st),
                d_gamma: (k * cg * st).into(),
            },
        ]
    };

    let (phi0, dphi0) = assemble(path, phases, phase_rates, &rates);
    let (v1, dv1) = assemble(partner(1.0), phases, phase_rates, &rates);
    let (v2, dv2) = assemble(partner(-1.0), phases, phase_rates, &rates);

    FrameBasis {
        phi0,
        phi1: v1,
        phi2: v2,
        dphi0,
        dphi1: dv1,
        dphi2: dv2,
        theta,
        gamma,
        phase1: phi1,
        phase2: phi2,
        rates,
    }
}
