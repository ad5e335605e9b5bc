//! Pointwise tensor algebra of the director–flow coupling.
//!
//! All tensors are embedded in 3x3: in two dimensions the rows and columns of
//! velocity gradients beyond `dim` are zero, while the director always has
//! three components. The velocity Jacobian convention is `jac[i][j] = d_j u_i`.

use crate::coefficients::LeslieCoefficients;
use crate::error::Result;
use crate::spectral::SpectralField;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Symmetric and antisymmetric parts of `jac`: `A = (J + J^T)/2`, `B = (J - J^T)/2`.
pub fn split(jac: &Mat3) -> (Mat3, Mat3) {
    let mut a = [[0.0; 3]; 3];
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = 0.5 * (jac[i][j] + jac[j][i]);
            b[i][j] = 0.5 * (jac[i][j] - jac[j][i]);
        }
    }
    (a, b)
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    }
    out
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `N = ddot - B d`.
pub fn corotational(b: &Mat3, d: &Vec3, ddot: &Vec3) -> Vec3 {
    let bd = mat_vec(b, d);
    [ddot[0] - bd[0], ddot[1] - bd[1], ddot[2] - bd[2]]
}

/// `g = lambda1 N + lambda2 A d`.
pub fn kinematic_transport(a: &Mat3, b: &Mat3, d: &Vec3, ddot: &Vec3, lambda1: f64, lambda2: f64) -> Vec3 {
    let n = corotational(b, d, ddot);
    let ad = mat_vec(a, d);
    [
        lambda1 * n[0] + lambda2 * ad[0],
        lambda1 * n[1] + lambda2 * ad[1],
        lambda1 * n[2] + lambda2 * ad[2],
    ]
}

/// Frobenius square `sum_{ik} (d_i d_k)^2` of a director gradient.
pub fn frobenius_sq(m: &Mat3) -> f64 {
    m.iter().flatten().map(|v| v * v).sum()
}

/// `gamma = -rho1 |ddot|^2 + |grad d|^2 - lambda2 d^T A d`, where
/// `grad_d[i][k] = d_i d_k`.
pub fn lagrange_multiplier(a: &Mat3, d: &Vec3, ddot: &Vec3, grad_d: &Mat3, rho1: f64, lambda2: f64) -> f64 {
    -rho1 * dot(ddot, ddot) + frobenius_sq(grad_d) - lambda2 * dot(d, &mat_vec(a, d))
}

/// Leslie stress, returned as `s[j][i] = sigma_ji` so that the momentum
/// forcing is `(div sigma)_i = sum_j d_j s[j][i]`.
pub fn leslie_stress(a: &Mat3, b: &Mat3, d: &Vec3, ddot: &Vec3, coef: &LeslieCoefficients) -> Mat3 {
    let [mu1, mu2, mu3, _, mu5, mu6] = coef.mu();
    let dad = dot(d, &mat_vec(a, d));
    // (B^T d)_i = B_ki d_k
    let mut btd = [0.0; 3];
    // (A^T d)_i = A_ki d_k
    let mut atd = [0.0; 3];
    for i in 0..3 {
        for k in 0..3 {
            btd[i] += b[k][i] * d[k];
            atd[i] += a[k][i] * d[k];
        }
    }
    let mut s = [[0.0; 3]; 3];
    for j in 0..3 {
        for i in 0..3 {
            s[j][i] = mu1 * dad * d[i] * d[j]
                + mu2 * d[j] * (ddot[i] + btd[i])
                + mu3 * d[i] * (ddot[j] + btd[j])
                + mu5 * d[j] * atd[i]
                + mu6 * d[i] * atd[j];
        }
    }
    s
}

/// `(grad d . grad d)_ij = sum_k d_i d_k d_j d_k`.
pub fn ericksen_stress(grad_d: &Mat3) -> Mat3 {
    let mut e = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            e[i][j] = dot(&grad_d[i], &grad_d[j]);
        }
    }
    e
}

/// Rate of strain `A` and vorticity tensor `B` sampled on a lattice.
#[derive(Debug, Clone)]
pub struct VelocityGradientSplit {
    pub a: Vec<Mat3>,
    pub b: Vec<Mat3>,
}

/// Director and its material derivative sampled on a lattice.
#[derive(Debug, Clone)]
pub struct DirectorState {
    pub d: Vec<Vec3>,
    pub ddot: Vec<Vec3>,
}

impl DirectorState {
    /// Samples both 3-component fields on an `m`-point lattice.
    pub fn sample(d: &SpectralField, ddot: &SpectralField, m: usize) -> Self {
        Self {
            d: to_vec3(&d.to_physical_on(m)),
            ddot: to_vec3(&ddot.to_physical_on(m)),
        }
    }

    /// `max | |d|^2 - 1 |`.
    pub fn constraint_deviation(&self) -> f64 {
        self.d.iter().map(|d| (dot(d, d) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `max |d . ddot|`.
    pub fn compatibility_deviation(&self) -> f64 {
        self.d
            .iter()
            .zip(&self.ddot)
            .map(|(d, w)| dot(d, w).abs())
            .fold(0.0, f64::max)
    }
}

/// Splits the velocity gradient of `u`, sampled on an `m`-point lattice.
pub fn strain_rotation(u: &SpectralField, m: usize) -> Result<VelocityGradientSplit> {
    let jac = jacobian_samples(u, m)?;
    let (a, b) = jac.iter().map(split).unzip();
    Ok(VelocityGradientSplit { a, b })
}

/// `jac[i][j] = d_j u_i` at each lattice point, embedded in 3x3.
pub fn jacobian_samples(u: &SpectralField, m: usize) -> Result<Vec<Mat3>> {
    let dim = u.grid().dim();
    if u.ncomp() != dim {
        return Err(crate::Error::ComponentMismatch {
            expected: dim,
            found: u.ncomp(),
        });
    }
    let g = u.gradient().to_physical_on(m);
    Ok(gradient_to_mat3(&g, dim, dim)
        .into_iter()
        .map(|gm| {
            // gm[j][i] = d_j u_i
            let mut jac = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    jac[i][j] = gm[j][i];
                }
            }
            jac
        })
        .collect())
}

/// `out[i][k] = d_i f_k` from gradient samples laid out as `[i * ncomp + k]`.
pub fn gradient_to_mat3(g: &[Vec<f64>], dim: usize, ncomp: usize) -> Vec<Mat3> {
    let len = g.first().map_or(0, |c| c.len());
    (0..len)
        .map(|p| {
            let mut m = [[0.0; 3]; 3];
            for i in 0..dim {
                for k in 0..ncomp {
                    m[i][k] = g[i * ncomp + k][p];
                }
            }
            m
        })
        .collect()
}

pub fn to_vec3(phys: &[Vec<f64>]) -> Vec<Vec3> {
    let len = phys.first().map_or(0, |c| c.len());
    (0..len)
        .map(|p| {
            let mut v = [0.0; 3];
            for (c, comp) in phys.iter().enumerate().take(3) {
                v[c] = comp[p];
            }
            v
        })
        .collect()
}

pub fn corotational_field(split: &VelocityGradientSplit, ds: &DirectorState) -> Vec<Vec3> {
    split
        .b
        .iter()
        .zip(ds.d.iter().zip(&ds.ddot))
        .map(|(b, (d, w))| corotational(b, d, w))
        .collect()
}

pub fn kinematic_transport_field(
    split: &VelocityGradientSplit,
    ds: &DirectorState,
    lambda1: f64,
    lambda2: f64,
) -> Vec<Vec3> {
    (0..ds.d.len())
        .map(|p| kinematic_transport(&split.a[p], &split.b[p], &ds.d[p], &ds.ddot[p], lambda1, lambda2))
        .collect()
}

pub fn lagrange_multiplier_field(
    split: &VelocityGradientSplit,
    ds: &DirectorState,
    grad_d: &[Mat3],
    rho1: f64,
    lambda2: f64,
) -> Vec<f64> {
    (0..ds.d.len())
        .map(|p| lagrange_multiplier(&split.a[p], &ds.d[p], &ds.ddot[p], &grad_d[p], rho1, lambda2))
        .collect()
}

pub fn leslie_stress_field(split: &VelocityGradientSplit, ds: &DirectorState, coef: &LeslieCoefficients) -> Vec<Mat3> {
    (0..ds.d.len())
        .map(|p| leslie_stress(&split.a[p], &split.b[p], &ds.d[p], &ds.ddot[p], coef))
        .collect()
}

pub fn ericksen_stress_field(grad_d: &[Mat3]) -> Vec<Mat3> {
    grad_d.iter().map(ericksen_stress).collect()
}
