//! Right-hand sides of the band-limited director–flow system and admissible
//! initial data.
//!
//! The state is `(u, d, ddot)` with `u` divergence free and all three fields
//! band-limited to a common radius `K`. Every nonlinear term is formed on a
//! padded lattice and truncated back to the band, so the tendency is exactly
//! the band-limited projection of the continuous right-hand side.

mod initial;

use num_complex::Complex64;

pub use initial::{make_initial_data, InitialData, Preset};

use crate::coefficients::LeslieCoefficients;
use crate::error::{Error, Result};
use crate::spectral::{dealiased_size, SpectralField, TorusGrid, Transformer};
use crate::tensorcalc::{self, Mat3};

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: SpectralField,
    pub d: SpectralField,
    pub ddot: SpectralField,
}

impl State {
    pub fn new(t: f64, u: SpectralField, d: SpectralField, ddot: SpectralField) -> Result<Self> {
        let grid = u.grid();
        let cutoff = u.cutoff();
        if u.ncomp() != grid.dim() {
            return Err(Error::ComponentMismatch {
                expected: grid.dim(),
                found: u.ncomp(),
            });
        }
        for f in [&d, &ddot] {
            if f.ncomp() != 3 {
                return Err(Error::ComponentMismatch {
                    expected: 3,
                    found: f.ncomp(),
                });
            }
            if f.grid() != grid {
                return Err(Error::InvalidGrid("state fields live on different grids".into()));
            }
            if f.cutoff() != cutoff {
                return Err(Error::CutoffMismatch(format!(
                    "state fields carry cutoffs {} and {}",
                    cutoff,
                    f.cutoff()
                )));
            }
        }
        Ok(Self { t, u, d, ddot })
    }

    pub fn zeros(grid: TorusGrid, cutoff: f64) -> Result<Self> {
        Ok(Self {
            t: 0.0,
            u: SpectralField::zeros(grid, grid.dim(), cutoff)?,
            d: SpectralField::zeros(grid, 3, cutoff)?,
            ddot: SpectralField::zeros(grid, 3, cutoff)?,
        })
    }

    pub fn grid(&self) -> TorusGrid {
        self.u.grid()
    }

    pub fn cutoff(&self) -> f64 {
        self.u.cutoff()
    }

    /// Mollifier parameter implied by the band limit.
    pub fn eps(&self) -> f64 {
        1.0 / self.cutoff()
    }

    /// `self + h * k`, with the clock advanced by `h`.
    pub fn advanced(&self, h: f64, k: &Tendency) -> Self {
        let mut out = self.clone();
        out.t += h;
        out.u.axpy(h, &k.du_dt);
        out.d.axpy(h, &k.dd_dt);
        out.ddot.axpy(h, &k.dddot_dt);
        out
    }

    /// Largest coefficient-wise difference over the three fields.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.u
            .max_coeff_diff(&other.u)
            .max(self.d.max_coeff_diff(&other.d))
            .max(self.ddot.max_coeff_diff(&other.ddot))
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.u.is_finite() && self.d.is_finite() && self.ddot.is_finite()
    }

    /// Restricts every field to a smaller band.
    pub fn truncate(&self, cutoff: f64) -> Result<Self> {
        Ok(Self {
            t: self.t,
            u: self.u.truncate(cutoff)?,
            d: self.d.truncate(cutoff)?,
            ddot: self.ddot.truncate(cutoff)?,
        })
    }

    /// `max | |d|^2 - 1 |` on the storage grid.
    pub fn constraint_deviation(&self) -> f64 {
        let d = tensorcalc::to_vec3(&self.d.to_physical());
        d.iter().map(|v| (tensorcalc::dot(v, v) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `max |d . ddot|` on the storage grid.
    pub fn compatibility_deviation(&self) -> f64 {
        let d = tensorcalc::to_vec3(&self.d.to_physical());
        let w = tensorcalc::to_vec3(&self.ddot.to_physical());
        d.iter().zip(&w).map(|(a, b)| tensorcalc::dot(a, b).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub du_dt: SpectralField,
    pub dddot_dt: SpectralField,
    pub dd_dt: SpectralField,
}

impl Tendency {
    pub fn zeros_like(s: &State) -> Self {
        Self {
            du_dt: s.u.scaled(0.0),
            dddot_dt: s.ddot.scaled(0.0),
            dd_dt: s.d.scaled(0.0),
        }
    }

    pub fn max_coeff(&self) -> f64 {
        self.du_dt
            .max_coeff()
            .max(self.dddot_dt.max_coeff())
            .max(self.dd_dt.max_coeff())
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.du_dt
            .max_coeff_diff(&other.du_dt)
            .max(self.dddot_dt.max_coeff_diff(&other.dddot_dt))
            .max(self.dd_dt.max_coeff_diff(&other.dd_dt))
    }
}

/// Individual terms of the tendency, each already band-limited.
///
/// `du_dt` is the sum of the first four, `dddot_dt` the sum of the next
/// five, and `dd_dt = ddot + advection_d`.
#[derive(Debug, Clone)]
pub struct TermBreakdown {
    /// `-P (u . grad) u`
    pub advection_u: SpectralField,
    /// `mu4/2 lap u`
    pub viscous: SpectralField,
    /// `-P div(grad d . grad d)`
    pub elastic: SpectralField,
    /// `P div sigma`
    pub leslie: SpectralField,
    /// `-(u . grad) ddot`
    pub advection_ddot: SpectralField,
    /// `lap d / rho1`
    pub laplacian_d: SpectralField,
    /// `gamma d / rho1`
    pub constraint: SpectralField,
    /// `lambda1 (ddot - B d) / rho1`
    pub corotational: SpectralField,
    /// `lambda2 A d / rho1`
    pub strain: SpectralField,
    /// `-(u . grad) d`
    pub advection_d: SpectralField,
}

impl TermBreakdown {
    pub fn total(&self, s: &State) -> Tendency {
        let du_dt = self
            .advection_u
            .add(&self.viscous)
            .add(&self.elastic)
            .add(&self.leslie);
        let dddot_dt = self
            .advection_ddot
            .add(&self.laplacian_d)
            .add(&self.constraint)
            .add(&self.corotational)
            .add(&self.strain);
        let dd_dt = s.ddot.add(&self.advection_d);
        Tendency { du_dt, dddot_dt, dd_dt }
    }
}

/// A band-limited right-hand side split as `du/dt = mu4/2 lap u + N(state)`.
pub trait Rhs: Send + Sync {
    /// Coefficient `mu4` of the linear viscous term.
    fn viscosity(&self) -> f64;

    fn rho1(&self) -> f64;

    /// Tendency without the viscous term.
    fn nonlinear(&self, s: &State) -> Result<Tendency>;

    fn eval(&self, s: &State) -> Result<Tendency> {
        let mut k = self.nonlinear(s)?;
        k.du_dt.axpy(0.5 * self.viscosity(), &s.u.laplacian());
        Ok(k)
    }
}

/// Polynomial degree of the highest product present for the coefficients.
fn product_degree(coef: &LeslieCoefficients) -> usize {
    if coef.mu1() != 0.0 {
        5
    } else if coef.lambda2() != 0.0 {
        4
    } else {
        3
    }
}

fn check_state(s: &State, grid: TorusGrid, cutoff: f64) -> Result<()> {
    if s.grid() != grid {
        return Err(Error::InvalidGrid("state grid differs from the system grid".into()));
    }
    if s.cutoff() != cutoff {
        return Err(Error::CutoffMismatch(format!(
            "state cutoff {} differs from the system cutoff {cutoff}",
            s.cutoff()
        )));
    }
    Ok(())
}

fn check_eps(s: &State, eps: f64) -> Result<()> {
    if !(eps > 0.0) || (1.0 / eps - s.cutoff()).abs() > 1e-9 * s.cutoff().max(1.0) {
        return Err(Error::CutoffMismatch(format!(
            "state cutoff {} does not match 1/eps = {}",
            s.cutoff(),
            1.0 / eps
        )));
    }
    Ok(())
}

/// Physical samples of `u`, `grad u`, `d`, `grad d`, `ddot`, `grad ddot`.
struct Samples {
    dim: usize,
    u: Vec<Vec<f64>>,
    gu: Vec<Vec<f64>>,
    d: Vec<Vec<f64>>,
    gd: Vec<Vec<f64>>,
    w: Vec<Vec<f64>>,
    gw: Vec<Vec<f64>>,
}

impl Samples {
    fn new(tr: &Transformer, s: &State) -> Self {
        let dim = s.grid().dim();
        let (gu, gd, gw) = (s.u.gradient(), s.d.gradient(), s.ddot.gradient());
        let mut refs: Vec<&[Complex64]> = Vec::new();
        for f in [&s.u, &gu, &s.d, &gd, &s.ddot, &gw] {
            refs.extend((0..f.ncomp()).map(|c| f.coeffs(c)));
        }
        let mut phys = tr.synthesize(&refs).into_iter();
        let mut take = |n: usize| (&mut phys).take(n).collect::<Vec<_>>();
        Self {
            dim,
            u: take(dim),
            gu: take(dim * dim),
            d: take(3),
            gd: take(3 * dim),
            w: take(3),
            gw: take(3 * dim),
        }
    }

    fn len(&self) -> usize {
        self.d[0].len()
    }

    /// `jac[i][j] = d_j u_i`.
    fn jacobian(&self, p: usize) -> Mat3 {
        let dim = self.dim;
        let mut jac = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                jac[i][j] = self.gu[j * dim + i][p];
            }
        }
        jac
    }

    /// `g[i][k] = d_i d_k`.
    fn grad_d(&self, p: usize) -> Mat3 {
        let mut g = [[0.0; 3]; 3];
        for i in 0..self.dim {
            for k in 0..3 {
                g[i][k] = self.gd[i * 3 + k][p];
            }
        }
        g
    }

    fn vec3(f: &[Vec<f64>], p: usize) -> [f64; 3] {
        [f[0][p], f[1][p], f[2][p]]
    }

    /// `(u . grad) f` for a 3-component field with gradient samples `g`.
    fn advect3(&self, g: &[Vec<f64>], p: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            for j in 0..self.dim {
                *o += self.u[j][p] * g[j * 3 + k][p];
            }
        }
        out
    }

    fn advect_u(&self, p: usize, i: usize) -> f64 {
        (0..self.dim).map(|j| self.u[j][p] * self.gu[j * self.dim + i][p]).sum()
    }
}

fn spectral(tr: &Transformer, cutoff: f64, values: &[Vec<f64>]) -> Vec<SpectralField> {
    let refs: Vec<&[f64]> = values.iter().map(|v| v.as_slice()).collect();
    tr.analyze(&refs)
        .into_iter()
        .map(|c| SpectralField::from_parts(tr.grid(), cutoff, vec![c]))
        .collect()
}

fn gather(parts: &[SpectralField]) -> SpectralField {
    let refs: Vec<&SpectralField> = parts.iter().collect();
    SpectralField::stack(&refs).expect("parts share grid and cutoff")
}

/// Full system with Leslie stress and director transport.
pub struct FullSystem {
    coef: LeslieCoefficients,
    grid: TorusGrid,
    cutoff: f64,
    tr: Transformer,
}

impl FullSystem {
    pub fn new(coef: LeslieCoefficients, grid: TorusGrid, cutoff: f64) -> Result<Self> {
        SpectralField::zeros(grid, 1, cutoff)?;
        let m = dealiased_size(cutoff, product_degree(&coef));
        Ok(Self {
            coef,
            grid,
            cutoff,
            tr: Transformer::new(grid, cutoff, m),
        })
    }

    pub fn coefficients(&self) -> &LeslieCoefficients {
        &self.coef
    }

    /// Padded lattice size used for products.
    pub fn lattice_size(&self) -> usize {
        self.tr.lattice_size()
    }

    pub fn breakdown(&self, s: &State) -> Result<TermBreakdown> {
        check_state(s, self.grid, self.cutoff)?;
        let c = &self.coef;
        let (rho1, l1, l2) = (c.rho1(), c.lambda1(), c.lambda2());
        let has_stress = c.mu().iter().enumerate().any(|(i, &m)| i != 3 && m != 0.0);
        let sm = Samples::new(&self.tr, s);
        let dim = sm.dim;
        let np = sm.len();
        let zeros = || vec![0.0; np];

        let mut adv_u: Vec<Vec<f64>> = (0..dim).map(|_| zeros()).collect();
        let mut eri: Vec<Vec<f64>> = (0..dim * dim).map(|_| zeros()).collect();
        let mut les: Vec<Vec<f64>> = (0..dim * dim).map(|_| zeros()).collect();
        let mut adv_w: Vec<Vec<f64>> = (0..3).map(|_| zeros()).collect();
        let mut adv_d: Vec<Vec<f64>> = (0..3).map(|_| zeros()).collect();
        let mut gam_d: Vec<Vec<f64>> = (0..3).map(|_| zeros()).collect();
        let mut b_d: Vec<Vec<f64>> = (0..3).map(|_| zeros()).collect();
        let mut a_d: Vec<Vec<f64>> = (0..3).map(|_| zeros()).collect();

        for p in 0..np {
            let (a, b) = tensorcalc::split(&sm.jacobian(p));
            let gd = sm.grad_d(p);
            let d = Samples::vec3(&sm.d, p);
            let w = Samples::vec3(&sm.w, p);
            for (i, v) in adv_u.iter_mut().enumerate() {
                v[p] = sm.advect_u(p, i);
            }
            let e = tensorcalc::ericksen_stress(&gd);
            let sig = if has_stress {
                tensorcalc::leslie_stress(&a, &b, &d, &w, c)
            } else {
                [[0.0; 3]; 3]
            };
            for j in 0..dim {
                for i in 0..dim {
                    eri[j * dim + i][p] = e[j][i];
                    les[j * dim + i][p] = sig[j][i];
                }
            }
            let aw = sm.advect3(&sm.gw, p);
            let ad_ = sm.advect3(&sm.gd, p);
            let gamma = tensorcalc::lagrange_multiplier(&a, &d, &w, &gd, rho1, l2);
            let bd = tensorcalc::mat_vec(&b, &d);
            let ad = tensorcalc::mat_vec(&a, &d);
            for k in 0..3 {
                adv_w[k][p] = aw[k];
                adv_d[k][p] = ad_[k];
                gam_d[k][p] = gamma * d[k];
                b_d[k][p] = bd[k];
                a_d[k][p] = ad[k];
            }
        }

        let mut phys = Vec::new();
        phys.extend(adv_u);
        phys.extend(eri);
        if has_stress {
            phys.extend(les);
        }
        phys.extend(adv_w);
        phys.extend(adv_d);
        phys.extend(gam_d);
        if l1 != 0.0 {
            phys.extend(b_d);
        }
        if l2 != 0.0 {
            phys.extend(a_d);
        }
        let spec = spectral(&self.tr, self.cutoff, &phys);
        let mut it = spec.into_iter();
        let mut take = |n: usize| gather(&(&mut it).take(n).collect::<Vec<_>>());

        let adv_u = take(dim);
        let eri = take(dim * dim);
        let les = if has_stress { Some(take(dim * dim)) } else { None };
        let adv_w = take(3);
        let adv_d = take(3);
        let gam_d = take(3);
        let b_d = if l1 != 0.0 { Some(take(3)) } else { None };
        let a_d = if l2 != 0.0 { Some(take(3)) } else { None };

        let leslie = match les {
            Some(t) => t.tensor_divergence()?.leray_project()?,
            None => s.u.scaled(0.0),
        };
        let corotational = match b_d {
            Some(bd) => s.ddot.sub(&bd).scaled(l1 / rho1),
            None => s.ddot.scaled(l1 / rho1),
        };
        let strain = match a_d {
            Some(ad) => ad.scaled(l2 / rho1),
            None => s.ddot.scaled(0.0),
        };
        Ok(TermBreakdown {
            advection_u: adv_u.leray_project()?.scaled(-1.0),
            viscous: s.u.laplacian().scaled(0.5 * c.mu4()),
            elastic: eri.tensor_divergence()?.leray_project()?.scaled(-1.0),
            leslie,
            advection_ddot: adv_w.scaled(-1.0),
            laplacian_d: s.d.laplacian().scaled(1.0 / rho1),
            constraint: gam_d.scaled(1.0 / rho1),
            corotational,
            strain,
            advection_d: adv_d.scaled(-1.0),
        })
    }
}

impl Rhs for FullSystem {
    fn viscosity(&self) -> f64 {
        self.coef.mu4()
    }

    fn rho1(&self) -> f64 {
        self.coef.rho1()
    }

    fn nonlinear(&self, s: &State) -> Result<Tendency> {
        let mut b = self.breakdown(s)?;
        b.viscous = s.u.scaled(0.0);
        Ok(b.total(s))
    }

    fn eval(&self, s: &State) -> Result<Tendency> {
        Ok(self.breakdown(s)?.total(s))
    }
}

/// Navier–Stokes coupled to a wave map into the sphere: no Leslie stress and
/// `gamma = -rho1 |ddot|^2 + |grad d|^2`.
pub struct WaveMapSystem {
    mu4: f64,
    rho1: f64,
    grid: TorusGrid,
    cutoff: f64,
    tr: Transformer,
}

impl WaveMapSystem {
    pub fn new(mu4: f64, rho1: f64, grid: TorusGrid, cutoff: f64) -> Result<Self> {
        LeslieCoefficients::wave_map(mu4, rho1)?;
        SpectralField::zeros(grid, 1, cutoff)?;
        Ok(Self {
            mu4,
            rho1,
            grid,
            cutoff,
            tr: Transformer::new(grid, cutoff, dealiased_size(cutoff, 3)),
        })
    }
}

impl Rhs for WaveMapSystem {
    fn viscosity(&self) -> f64 {
        self.mu4
    }

    fn rho1(&self) -> f64 {
        self.rho1
    }

    fn nonlinear(&self, s: &State) -> Result<Tendency> {
        check_state(s, self.grid, self.cutoff)?;
        let sm = Samples::new(&self.tr, s);
        let dim = sm.dim;
        let np = sm.len();
        // rows: u.grad u (dim), stress (dim^2), u.grad ddot (3), gamma d (3), u.grad d (3)
        let nrow = dim + dim * dim + 9;
        let mut phys = vec![vec![0.0; np]; nrow];
        for p in 0..np {
            let mut r = 0;
            for i in 0..dim {
                phys[r][p] = sm.advect_u(p, i);
                r += 1;
            }
            let mut grad_sq = 0.0;
            for j in 0..dim {
                for i in 0..dim {
                    phys[r][p] = (0..3).map(|k| sm.gd[j * 3 + k][p] * sm.gd[i * 3 + k][p]).sum();
                    r += 1;
                }
                grad_sq += (0..3).map(|k| sm.gd[j * 3 + k][p].powi(2)).sum::<f64>();
            }
            let w_sq: f64 = (0..3).map(|k| sm.w[k][p].powi(2)).sum();
            let gamma = grad_sq - self.rho1 * w_sq;
            let aw = sm.advect3(&sm.gw, p);
            let adv_d = sm.advect3(&sm.gd, p);
            for k in 0..3 {
                phys[r + k][p] = aw[k];
                phys[r + 3 + k][p] = gamma * sm.d[k][p];
                phys[r + 6 + k][p] = adv_d[k];
            }
        }
        let spec = spectral(&self.tr, self.cutoff, &phys);
        let adv_u = gather(&spec[..dim]);
        let stress = gather(&spec[dim..dim + dim * dim]);
        let r = dim + dim * dim;
        let adv_w = gather(&spec[r..r + 3]);
        let gam_d = gather(&spec[r + 3..r + 6]);
        let adv_d = gather(&spec[r + 6..r + 9]);

        let du_dt = adv_u.add(&stress.tensor_divergence()?).leray_project()?.scaled(-1.0);
        let mut dddot_dt = s.d.laplacian().add(&gam_d).scaled(1.0 / self.rho1);
        dddot_dt.axpy(-1.0, &adv_w);
        let dd_dt = s.ddot.sub(&adv_d);
        Ok(Tendency { du_dt, dddot_dt, dd_dt })
    }
}

/// The wave-map system for wave-map coefficients, the full system otherwise.
pub fn system(coef: &LeslieCoefficients, grid: TorusGrid, cutoff: f64) -> Result<Box<dyn Rhs>> {
    if coef.is_wave_map() {
        Ok(Box::new(WaveMapSystem::new(coef.mu4(), coef.rho1(), grid, cutoff)?))
    } else {
        Ok(Box::new(FullSystem::new(*coef, grid, cutoff)?))
    }
}

/// Tendency of the full system at mollifier parameter `eps`.
pub fn rhs_full(s: &State, coef: &LeslieCoefficients, eps: f64) -> Result<Tendency> {
    check_eps(s, eps)?;
    FullSystem::new(*coef, s.grid(), s.cutoff())?.eval(s)
}

/// Tendency of the wave-map system at mollifier parameter `eps`.
pub fn rhs_wavemap(s: &State, mu4: f64, rho1: f64, eps: f64) -> Result<Tendency> {
    check_eps(s, eps)?;
    WaveMapSystem::new(mu4, rho1, s.grid(), s.cutoff())?.eval(s)
}

#[cfg(test)]
mod tests;
