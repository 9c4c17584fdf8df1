//! Best constant over centered Gaussians.
//!
//! The objective `Phi = log det A - sum c_k log det A_k` is maximised over
//! the admissible cone.  A damped fixed point of the stationarity equation
//! `A_k^{-1} = B_k A^{-1} B_k^T` gives a warm start; the main loop is a
//! safeguarded Newton ascent in the coordinates `A_k^{1/2} e^{Y_k} A_k^{1/2}`,
//! along which `Phi` is concave in the non-degenerate case.

#[allow(unused_imports)]
use num_traits::Float;
use super::evaluate::{gram, objective, stationarity_residual, GaussTuple};
use crate::classify::{Case, Classification};
use crate::error::Result;
use crate::linalg::{inv_pd, spd_inv_sqrt, spd_log, spd_sqrt, sym_eigen, sym_exp, Mat};
use crate::problem::NormalizedProblem;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Unbounded,
    Infeasible,
    MaxIter,
}

impl SolveStatus {
    pub fn label(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::MaxIter => "max-iter",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol_stat: f64,
    pub max_iter: usize,
    /// Number of random starts used when `Phi` is not known to be concave.
    pub multistart: usize,
    pub seed: u64,
    /// Growth of `Phi` over its starting value that triggers a check for
    /// unboundedness.
    pub growth_threshold: f64,
    /// Minimal directional derivative required along a certified ray.
    pub certificate_slope: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_stat: 1e-9,
            max_iter: 10_000,
            multistart: 20,
            seed: 0x5eed,
            growth_threshold: 30.0,
            certificate_slope: 1e-3,
        }
    }
}

/// Ray `s -> A_k^{1/2} e^{s Y_k} A_k^{1/2}` along which `Phi` keeps
/// increasing; `slopes[i]` is the derivative at `s = 2^i`.
#[derive(Debug, Clone)]
pub struct UnboundedCertificate {
    pub base: GaussTuple,
    pub direction: Vec<Mat>,
    pub slopes: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Supremum of the determinant ratio; `+inf` when unbounded, `0` when
    /// the admissible cone is empty.
    pub d: f64,
    /// `D^{-1/2}`.
    pub inf_cg: f64,
    pub argmax: Option<GaussTuple>,
    pub residual: f64,
    pub iterations: usize,
    pub starts: usize,
    pub certificate: Option<UnboundedCertificate>,
}

impl SolveResult {
    fn infeasible() -> Self {
        SolveResult {
            status: SolveStatus::Infeasible,
            d: 0.0,
            inf_cg: f64::INFINITY,
            argmax: None,
            residual: f64::NAN,
            iterations: 0,
            starts: 0,
            certificate: None,
        }
    }
}

pub fn solve_d(np: &NormalizedProblem, cls: &Classification, opts: &SolveOptions) -> Result<SolveResult> {
    if matches!(cls.case, Case::Case00 | Case::Case01) {
        return Ok(SolveResult::infeasible());
    }
    let solver = Ascent::new(np, opts);
    let Some(start) = scaled_start(np, &GaussTuple::identity(np)) else {
        return Ok(SolveResult::infeasible());
    };
    let mut best = solver.run(start)?;
    let mut starts = 1;
    if cls.case == Case::Case101 && best.status != SolveStatus::Unbounded {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 1..opts.multistart.max(1) {
            let Some(start) = scaled_start(np, &random_tuple(np, &mut rng)) else {
                continue;
            };
            starts += 1;
            let r = solver.run(start)?;
            if r.status == SolveStatus::Unbounded {
                best = r;
                break;
            }
            if r.d > best.d || (r.d == best.d && r.status == SolveStatus::Optimal) {
                best = r;
            }
        }
    }
    best.starts = starts;
    Ok(best)
}

/// Wishart-type random positive definite tuple with a random overall scale.
pub(crate) fn random_tuple(np: &NormalizedProblem, rng: &mut ChaCha8Rng) -> GaussTuple {
    let mats = np
        .factors()
        .iter()
        .map(|f| {
            let d = f.target_dim();
            let g = Mat::from_fn(d, d + 1, |_, _| StandardNormal.sample(rng));
            let scale = (2.0 * rng.random::<f64>() - 1.0) * 3.0;
            (&g * g.transpose() / (d as f64 + 1.0) + Mat::identity(d, d) * 0.05) * scale.exp()
        })
        .collect();
    GaussTuple { mats }
}

/// Scales a tuple by `s` on positive factors and `1/s` on negative ones,
/// `s = 1, 10, 100, ...`, until it is admissible.
pub(crate) fn scaled_start(np: &NormalizedProblem, base: &GaussTuple) -> Option<GaussTuple> {
    let mut s = 1.0;
    for _ in 0..16 {
        let mats = np
            .factors()
            .iter()
            .zip(&base.mats)
            .map(|(f, a)| if f.exponent > 0.0 { a * s } else { a / s })
            .collect();
        let t = GaussTuple { mats };
        if let Ok(Some(_)) = objective(np, &t) {
            return Some(t);
        }
        s *= 10.0;
    }
    None
}

struct Ascent<'a> {
    np: &'a NormalizedProblem,
    opts: &'a SolveOptions,
    active: Vec<usize>,
    /// `(factor, row, col)` for an orthonormal basis of symmetric matrices.
    coords: Vec<(usize, usize, usize)>,
}

const WARM_START_ITERS: usize = 200;
const TRUST_RADIUS: f64 = 2.0;
const STAGNATION_WINDOW: usize = 200;
/// Bound on the predicted gain `g . step` required for optimality, on top
/// of the stationarity residual; suprema approached at infinity can have a
/// small residual long before the value settles.
const DECREMENT_TOL: f64 = 1e-13;

struct Direction {
    sqrt: Vec<Mat>,
    step: Vec<f64>,
    slope: f64,
}

impl<'a> Ascent<'a> {
    fn new(np: &'a NormalizedProblem, opts: &'a SolveOptions) -> Self {
        let active: Vec<usize> = (0..np.factors().len())
            .filter(|&k| np.factors()[k].exponent != 0.0 && np.factors()[k].target_dim() > 0)
            .collect();
        let mut coords = Vec::new();
        for &k in &active {
            let d = np.factors()[k].target_dim();
            for a in 0..d {
                for b in a..d {
                    coords.push((k, a, b));
                }
            }
        }
        Ascent { np, opts, active, coords }
    }

    fn phi(&self, t: &GaussTuple) -> Option<f64> {
        objective(self.np, t).ok().flatten().filter(|v| v.is_finite())
    }

    fn residual(&self, t: &GaussTuple) -> f64 {
        stationarity_residual(self.np, t).unwrap_or(f64::INFINITY)
    }

    /// `max_k |Id - A_k^{1/2} B_k A^{-1} B_k^T A_k^{1/2}|_F`, the residual in
    /// the exponential coordinates; unlike [`Self::residual`] it does not
    /// grow with `A_k^{-1}`.
    fn scaled_residual(&self, t: &GaussTuple) -> f64 {
        let Some(finv) = inv_pd(&gram(self.np, t)) else { return f64::INFINITY };
        self.active
            .iter()
            .map(|&k| {
                let c = spd_sqrt(&t.mats[k]) * &self.np.factors()[k].map;
                let d = c.nrows();
                (&c * &finv * c.transpose() - Mat::identity(d, d)).norm()
            })
            .fold(0.0, f64::max)
    }

    fn run(&self, start: GaussTuple) -> Result<SolveResult> {
        let np = self.np;
        let mut t = start.clone();
        let phi0 = self.phi(&t).expect("start is admissible");
        let mut phi = phi0;
        let mut next_check = phi0 + self.opts.growth_threshold;
        let mut iterations = 0;
        let mut history: Vec<f64> = Vec::new();
        let mut residual = self.residual(&t);

        let finish = |t: GaussTuple, phi: f64, residual: f64, it: usize, status: SolveStatus| SolveResult {
            status,
            d: phi.exp(),
            inf_cg: (-0.5 * phi).exp(),
            argmax: Some(t),
            residual,
            iterations: it,
            starts: 1,
            certificate: None,
        };

        // Damped fixed point.
        let mut eta = 1.0;
        while iterations < WARM_START_ITERS.min(self.opts.max_iter) && residual > self.opts.tol_stat {
            iterations += 1;
            let Some(ainv) = inv_pd(&gram(np, &t)) else { break };
            let mut cand = t.clone();
            let mut ok = true;
            for &k in &self.active {
                let b = &np.factors()[k].map;
                match inv_pd(&(b * &ainv * b.transpose())) {
                    Some(target) => cand.mats[k] = &t.mats[k] * (1.0 - eta) + target * eta,
                    None => ok = false,
                }
            }
            match self.phi(&cand).filter(|_| ok) {
                Some(p) if p >= phi => {
                    t = cand;
                    phi = p;
                    residual = self.residual(&t);
                }
                _ => {
                    eta *= 0.5;
                    if eta < 1e-3 {
                        break;
                    }
                }
            }
            if phi > next_check {
                break;
            }
        }

        loop {
            let dir = self.newton_direction(&t);
            let decrement = dir.as_ref().map_or(f64::INFINITY, |d| d.slope);
            let stationary = residual <= self.opts.tol_stat || self.scaled_residual(&t) <= self.opts.tol_stat;
            if stationary && decrement <= DECREMENT_TOL * (1.0 + phi.abs()) {
                return Ok(finish(t, phi, residual, iterations, SolveStatus::Optimal));
            }
            if phi > next_check {
                if let Some(cert) = self.certify(&start, &t) {
                    let mut r = finish(t, phi, residual, iterations, SolveStatus::Unbounded);
                    r.d = f64::INFINITY;
                    r.inf_cg = 0.0;
                    r.argmax = None;
                    r.certificate = Some(cert);
                    return Ok(r);
                }
                next_check = phi + self.opts.growth_threshold;
            }
            if iterations >= self.opts.max_iter {
                return Ok(finish(t, phi, residual, iterations, SolveStatus::MaxIter));
            }
            iterations += 1;
            match dir.and_then(|d| self.line_search(&t, phi, d)) {
                Some((nt, np_)) => {
                    t = nt;
                    phi = np_;
                    residual = self.residual(&t);
                }
                None => return Ok(finish(t, phi, residual, iterations, SolveStatus::MaxIter)),
            }
            history.push(phi);
            if history.len() > STAGNATION_WINDOW {
                let old = history[history.len() - 1 - STAGNATION_WINDOW];
                if phi - old <= 1e-14 * (1.0 + phi.abs()) {
                    return Ok(finish(t, phi, residual, iterations, SolveStatus::MaxIter));
                }
            }
        }
    }

    /// Gradient and Hessian of `Phi` in the exponential coordinates at `t`.
    fn derivatives(&self, t: &GaussTuple) -> Option<(Vec<Mat>, Vec<f64>, Mat)> {
        let np = self.np;
        let f = gram(np, t);
        let finv = inv_pd(&f)?;
        let sqrt: Vec<Mat> = t.mats.iter().map(spd_sqrt).collect();
        let c_mats: Vec<Mat> = (0..t.mats.len()).map(|k| &sqrt[k] * &np.factors()[k].map).collect();
        let m_mats: Vec<Mat> = c_mats.iter().map(|c| c * &finv * c.transpose()).collect();
        let p = self.coords.len();
        let basis = |&(k, a, b): &(usize, usize, usize)| {
            let d = np.factors()[k].target_dim();
            let mut e = Mat::zeros(d, d);
            if a == b {
                e[(a, a)] = 1.0;
            } else {
                let v = core::f64::consts::FRAC_1_SQRT_2;
                e[(a, b)] = v;
                e[(b, a)] = v;
            }
            e
        };
        let es: Vec<Mat> = self.coords.iter().map(basis).collect();
        let mut g = alloc::vec![0.0; p];
        let mut proj: Vec<Mat> = Vec::with_capacity(p);
        for (i, &(k, _, _)) in self.coords.iter().enumerate() {
            let c = np.factors()[k].exponent;
            let d = m_mats[k].nrows();
            g[i] = c * ((&m_mats[k] - Mat::identity(d, d)).component_mul(&es[i])).sum();
            proj.push(&finv * c_mats[k].transpose() * &es[i] * &c_mats[k] * c);
        }
        let mut h = Mat::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let (ki, _, _) = self.coords[i];
                let (kj, _, _) = self.coords[j];
                let mut v = -(&proj[i] * &proj[j]).trace();
                if ki == kj {
                    let c = np.factors()[ki].exponent;
                    let sym = &es[i] * &es[j] + &es[j] * &es[i];
                    v += 0.5 * c * (&m_mats[ki] * sym).trace();
                }
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        Some((sqrt, g, h))
    }

    fn newton_direction(&self, t: &GaussTuple) -> Option<Direction> {
        let (sqrt, g, h) = self.derivatives(t)?;
        let p = g.len();
        if p == 0 {
            return Some(Direction { sqrt, step: Vec::new(), slope: 0.0 });
        }
        let (vals, vecs) = sym_eigen(&(-h));
        let scale = vals.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let floor = 1e-10 * scale;
        let mut step = alloc::vec![0.0; p];
        for i in 0..p {
            let v = vecs.column(i);
            let gv: f64 = (0..p).map(|j| g[j] * v[j]).sum();
            let w = gv / vals[i].abs().max(floor);
            for j in 0..p {
                step[j] += w * v[j];
            }
        }
        let norm = step.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > TRUST_RADIUS {
            step.iter_mut().for_each(|x| *x *= TRUST_RADIUS / norm);
        }
        let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        Some(Direction { sqrt, step, slope })
    }

    fn line_search(&self, t: &GaussTuple, phi: f64, dir: Direction) -> Option<(GaussTuple, f64)> {
        let Direction { sqrt, step, slope } = dir;
        let mut s = 1.0;
        for _ in 0..60 {
            let cand = self.move_along(t, &sqrt, &step, s);
            if let Some(pc) = self.phi(&cand) {
                let armijo = phi + 1e-4 * s * slope;
                if pc >= armijo || (slope <= 1e-15 * (1.0 + phi.abs()) && pc >= phi) {
                    if pc > phi || self.residual(&cand) < self.residual(t) {
                        return Some((cand, pc.max(phi)));
                    }
                }
            }
            s *= 0.5;
        }
        None
    }

    fn move_along(&self, t: &GaussTuple, sqrt: &[Mat], step: &[f64], s: f64) -> GaussTuple {
        let mut y: Vec<Mat> = t.mats.iter().map(|a| Mat::zeros(a.nrows(), a.ncols())).collect();
        for (i, &(k, a, b)) in self.coords.iter().enumerate() {
            if a == b {
                y[k][(a, a)] += step[i] * s;
            } else {
                let v = step[i] * s * core::f64::consts::FRAC_1_SQRT_2;
                y[k][(a, b)] += v;
                y[k][(b, a)] += v;
            }
        }
        let mut out = t.clone();
        for &k in &self.active {
            let m = &sqrt[k] * sym_exp(&y[k]) * &sqrt[k];
            out.mats[k] = crate::linalg::symmetrize(&m);
        }
        out
    }

    /// Checks that the exponential ray from `base` through `t` has
    /// derivative at least the configured slope at `s = 1, 2, 4, 8, 16`.
    fn certify(&self, base: &GaussTuple, t: &GaussTuple) -> Option<UnboundedCertificate> {
        let np = self.np;
        let roots: Vec<Mat> = base.mats.iter().map(spd_sqrt).collect();
        let inv_roots: Vec<Mat> = base.mats.iter().map(spd_inv_sqrt).collect();
        let mut dir: Vec<Mat> = Vec::with_capacity(base.mats.len());
        for k in 0..base.mats.len() {
            let d = base.mats[k].nrows();
            if self.active.contains(&k) {
                dir.push(spd_log(&(&inv_roots[k] * &t.mats[k] * &inv_roots[k])));
            } else {
                dir.push(Mat::zeros(d, d));
            }
        }
        let mut slopes = Vec::new();
        let mut s = 1.0;
        for _ in 0..5 {
            let half: Vec<Mat> = (0..dir.len()).map(|k| &roots[k] * sym_exp(&(&dir[k] * (0.5 * s)))).collect();
            let point = GaussTuple {
                mats: half.iter().map(|g| crate::linalg::symmetrize(&(g * g.transpose()))).collect(),
            };
            let finv = inv_pd(&gram(np, &point))?;
            let mut slope = 0.0;
            for &k in &self.active {
                let f = &np.factors()[k];
                let gk = &f.map.transpose() * &half[k];
                let inner = gk.transpose() * &finv * &gk;
                slope += f.exponent * ((inner.component_mul(&dir[k])).sum() - dir[k].trace());
            }
            if !(slope >= self.opts.certificate_slope) {
                return None;
            }
            slopes.push(slope);
            s *= 2.0;
        }
        Some(UnboundedCertificate { base: base.clone(), direction: dir, slopes })
    }
}
