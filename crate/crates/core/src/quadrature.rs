//! Brute-force oracles: tensor-grid quadrature of the functional on
//! concrete test functions, a grid search for the Gaussian constant and
//! random Gaussian probes.

#[allow(unused_imports)]
use num_traits::Float;
use crate::error::{IblError, Result};
use crate::gaussian::{evaluate_gaussian, objective, random_tuple, scaled_start, GaussTuple};
use crate::linalg::{logdet_pd, Mat};
use crate::problem::NormalizedProblem;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum TestKind {
    /// Indicator of `[lo, hi]`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `exp(-pi <y, A y>)`.
    Gaussian { a: Mat },
    /// Product of Cauchy densities `lambda / (pi (lambda^2 + y_i^2))`.
    Cauchy { dim: usize, scale: f64 },
    /// `exp(-pi <y, A y>) + floor * prod_i 1 / (pi (1 + y_i^2))`.
    GaussianFloor { a: Mat, floor: f64 },
}

/// A test function `y -> g(y - shift)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub kind: TestKind,
    pub shift: Vec<f64>,
}

impl TestFunction {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(IblError::Precondition("box corners must satisfy lo < hi".into()));
        }
        let shift = vec![0.0; lo.len()];
        Ok(TestFunction { kind: TestKind::Box { lo, hi }, shift })
    }

    pub fn gaussian(a: Mat) -> Result<Self> {
        check_pd(&a)?;
        let shift = vec![0.0; a.nrows()];
        Ok(TestFunction { kind: TestKind::Gaussian { a }, shift })
    }

    pub fn cauchy(dim: usize, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(IblError::Precondition("Cauchy scale must be positive".into()));
        }
        Ok(TestFunction { kind: TestKind::Cauchy { dim, scale }, shift: vec![0.0; dim] })
    }

    pub fn gaussian_floor(a: Mat, floor: f64) -> Result<Self> {
        check_pd(&a)?;
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(IblError::Precondition("floor must be positive".into()));
        }
        let shift = vec![0.0; a.nrows()];
        Ok(TestFunction { kind: TestKind::GaussianFloor { a, floor }, shift })
    }

    pub fn shifted(mut self, shift: Vec<f64>) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(IblError::DimensionMismatch { what: "shift".into(), expected: self.dim(), found: shift.len() });
        }
        self.shift = shift;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            TestKind::Box { lo, .. } => lo.len(),
            TestKind::Gaussian { a } | TestKind::GaussianFloor { a, .. } => a.nrows(),
            TestKind::Cauchy { dim, .. } => *dim,
        }
    }

    /// Positive everywhere, with reciprocal of polynomial growth.
    pub fn is_strictly_positive(&self) -> bool {
        matches!(self.kind, TestKind::Cauchy { .. } | TestKind::GaussianFloor { .. })
    }

    /// Closed-form integral over the whole space.
    pub fn integral(&self) -> f64 {
        match &self.kind {
            TestKind::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            TestKind::Gaussian { a } => gaussian_mass(a),
            TestKind::Cauchy { .. } => 1.0,
            TestKind::GaussianFloor { a, floor } => gaussian_mass(a) + floor,
        }
    }

    /// `ln g(y - shift)`, `-inf` where `g` vanishes.
    pub fn ln_value(&self, y: &[f64]) -> f64 {
        let z = y.iter().zip(&self.shift).map(|(a, b)| a - b);
        match &self.kind {
            TestKind::Box { lo, hi } => {
                let inside = z.zip(lo.iter().zip(hi)).all(|(t, (l, h))| *l <= t && t <= *h);
                if inside {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            TestKind::Gaussian { a } => -PI * quad(a, &z.collect::<Vec<_>>()),
            TestKind::Cauchy { scale, .. } => z.map(|t| (scale / PI).ln() - (scale * scale + t * t).ln()).sum(),
            TestKind::GaussianFloor { a, floor } => {
                let z: Vec<f64> = z.collect();
                let cauchy: f64 = z.iter().map(|t| -(PI * (1.0 + t * t)).ln()).sum();
                let g = -PI * quad(a, &z);
                let (hi, lo) = if g > cauchy + floor.ln() { (g, cauchy + floor.ln()) } else { (cauchy + floor.ln(), g) };
                hi + (lo - hi).exp().ln_1p()
            }
        }
    }
}

fn check_pd(a: &Mat) -> Result<()> {
    if !a.is_square() || logdet_pd(a).is_none() {
        return Err(IblError::NotPositiveDefinite("test function matrix".into()));
    }
    Ok(())
}

fn gaussian_mass(a: &Mat) -> f64 {
    (-0.5 * logdet_pd(a).expect("checked positive definite")).exp()
}

fn quad(a: &Mat, z: &[f64]) -> f64 {
    let n = z.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += z[i] * a[(i, j)] * z[j];
        }
    }
    s
}

/// Box radius and points per axis; `None` picks the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Grid {
    pub radius: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// `|v_N - v_{N/2}|` plus the jump term for box edges.
    pub error_bound: f64,
    pub radius: f64,
    pub points: usize,
    pub numerator: f64,
    pub denominator: f64,
    /// Set when the value is `+inf` because the integrand overflowed.
    pub overflow: Option<String>,
    /// Set when the automatic radius hit its cap before the integrand
    /// decayed.
    pub radius_capped: bool,
}

/// Envelope decay required at the boundary of the box, relative to the peak.
const DECAY: f64 = 1e-12;
const MAX_RADIUS: f64 = 256.0;
const PROBE_POINTS: usize = 41;

struct Integrand<'a> {
    np: &'a NormalizedProblem,
    fs: &'a [TestFunction],
    maps: Vec<Vec<Vec<f64>>>,
}

impl Integrand<'_> {
    /// `exp(-pi <x, Q x>) prod f_k(B_k x)^{c_k}` with `0 * inf = 0`.
    fn value(&self, x: &[f64]) -> f64 {
        let q = self.np.kernel().matrix();
        let mut log = -PI * quad(q, x);
        let mut y = Vec::new();
        for ((f, map), tf) in self.np.factors().iter().zip(&self.maps).zip(self.fs) {
            if f.exponent == 0.0 {
                continue;
            }
            y.clear();
            y.extend(map.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()));
            let l = tf.ln_value(&y);
            if l == f64::NEG_INFINITY && f.exponent > 0.0 {
                return 0.0;
            }
            log += f.exponent * l;
        }
        log.exp()
    }

    /// Midpoint rule on `[-r, r]^n` with `points` nodes per axis, and a bound
    /// on the extra error from cells where the support of a box ends: the
    /// cell volume times the larger value across each zero/nonzero edge.
    fn integrate(&self, r: f64, points: usize) -> (f64, f64) {
        let n = self.np.dim();
        let h = 2.0 * r / points as f64;
        let node = |i: usize| -r + (i as f64 + 0.5) * h;
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        let mut values = Vec::with_capacity(points.pow(n as u32));
        loop {
            for (xi, i) in x.iter_mut().zip(&idx) {
                *xi = node(*i);
            }
            values.push(self.value(&x));
            if !advance(&mut idx, points) {
                break;
            }
        }
        let mut jump = 0.0;
        let mut stride = 1;
        for _ in 0..n {
            for (i, &v) in values.iter().enumerate() {
                if (i / stride) % points + 1 < points {
                    let w = values[i + stride];
                    if (v == 0.0) != (w == 0.0) {
                        jump += v.max(w);
                    }
                }
            }
            stride *= points;
        }
        let vol = h.powi(n as i32);
        (values.iter().sum::<f64>() * vol, jump * vol)
    }

    /// Largest integrand value on the boundary and in the interior of the
    /// cube on a coarse grid.
    fn envelope(&self, r: f64) -> (f64, f64) {
        let n = self.np.dim();
        let h = 2.0 * r / (PROBE_POINTS - 1) as f64;
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        let (mut edge, mut inner) = (0.0f64, 0.0f64);
        loop {
            for (xi, i) in x.iter_mut().zip(&idx) {
                *xi = -r + *i as f64 * h;
            }
            let v = self.value(&x);
            if idx.iter().any(|&i| i == 0 || i == PROBE_POINTS - 1) {
                edge = edge.max(v);
            }
            inner = inner.max(v);
            if !advance(&mut idx, PROBE_POINTS) {
                break;
            }
        }
        (edge, inner)
    }
}

fn advance(idx: &mut [usize], points: usize) -> bool {
    for i in idx.iter_mut() {
        *i += 1;
        if *i < points {
            return true;
        }
        *i = 0;
    }
    false
}

/// Tensor-grid approximation of `J(f_1, ..., f_m)` for `dim H <= 3`, with
/// closed-form denominators.
pub fn quadrature_j(np: &NormalizedProblem, fs: &[TestFunction], grid: &Grid) -> Result<QuadratureResult> {
    let n = np.dim();
    if n == 0 || n > 3 {
        return Err(IblError::Unsupported(format!("quadrature needs 1 <= dim H <= 3, got {n}")));
    }
    if fs.len() != np.factors().len() {
        return Err(IblError::DimensionMismatch { what: "test functions".into(), expected: np.factors().len(), found: fs.len() });
    }
    for (k, (f, tf)) in np.factors().iter().zip(fs).enumerate() {
        if tf.dim() != f.target_dim() {
            return Err(IblError::DimensionMismatch { what: format!("test function {}", k + 1), expected: f.target_dim(), found: tf.dim() });
        }
        if f.exponent < 0.0 && !tf.is_strictly_positive() {
            return Err(IblError::Precondition(format!(
                "factor {} has a negative exponent and needs a Cauchy or floored Gaussian test function",
                k + 1
            )));
        }
    }
    let points = grid.points.unwrap_or(if n <= 2 { 201 } else { 101 });
    if points < 2 {
        return Err(IblError::Precondition("at least two points per axis".into()));
    }
    let maps = np
        .factors()
        .iter()
        .map(|f| (0..f.map.nrows()).map(|i| f.map.row(i).iter().copied().collect()).collect())
        .collect();
    let integrand = Integrand { np, fs, maps };

    let mut radius_capped = false;
    let radius = match grid.radius {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(_) => return Err(IblError::Precondition("radius must be positive".into())),
        None => {
            let shift = fs.iter().flat_map(|f| f.shift.iter()).fold(0.0f64, |m, s| m.max(s.abs()));
            let mut r = 4.0 + 2.0 * shift;
            loop {
                let (edge, inner) = integrand.envelope(r);
                if edge <= DECAY * inner || !inner.is_finite() {
                    break r;
                }
                if r >= MAX_RADIUS {
                    radius_capped = true;
                    break r;
                }
                r *= 2.0;
            }
        }
    };

    let denominator: f64 = np
        .factors()
        .iter()
        .zip(fs)
        .filter(|(f, _)| f.exponent != 0.0)
        .map(|(f, tf)| f.exponent * tf.integral().ln())
        .sum::<f64>()
        .exp();
    let (fine, jump) = integrand.integrate(radius, points);
    let (coarse, _) = integrand.integrate(radius, points / 2);
    if !fine.is_finite() {
        return Ok(QuadratureResult {
            value: f64::INFINITY,
            error_bound: f64::INFINITY,
            radius,
            points,
            numerator: f64::INFINITY,
            denominator,
            overflow: Some("integrand overflow: a negative power is not dominated by the kernel".into()),
            radius_capped,
        });
    }
    Ok(QuadratureResult {
        value: fine / denominator,
        error_bound: ((fine - coarse).abs() + jump) / denominator,
        radius,
        points,
        numerator: fine,
        denominator,
        overflow: None,
        radius_capped,
    })
}

/// Log-spaced values per axis for the diagonal entries of `A_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearchOptions {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for GridSearchOptions {
    fn default() -> Self {
        GridSearchOptions { lo: 1e-3, hi: 1e3, points: 25 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    /// Largest determinant ratio seen; `0` when no grid point is admissible.
    pub best: f64,
    pub argmax: Option<GaussTuple>,
    pub evaluated: usize,
    pub feasible: usize,
}

pub const MAX_GRID_PARAMETERS: usize = 6;

/// Lower bound for the Gaussian constant from diagonal tuples on a grid.
pub fn grid_search_d(np: &NormalizedProblem, opts: &GridSearchOptions) -> Result<GridSearchResult> {
    let dims: Vec<usize> = np.factors().iter().map(|f| f.target_dim()).collect();
    let params: usize = dims.iter().sum();
    if params > MAX_GRID_PARAMETERS {
        return Err(IblError::Unsupported(format!("{params} diagonal parameters exceed {MAX_GRID_PARAMETERS}")));
    }
    if !(opts.lo > 0.0 && opts.lo <= opts.hi) || opts.points == 0 {
        return Err(IblError::Precondition("grid needs 0 < lo <= hi and points > 0".into()));
    }
    let values: Vec<f64> = (0..opts.points)
        .map(|i| {
            let t = if opts.points == 1 { 0.0 } else { i as f64 / (opts.points - 1) as f64 };
            (opts.lo.ln() + t * (opts.hi.ln() - opts.lo.ln())).exp()
        })
        .collect();
    let mut idx = vec![0usize; params];
    let mut out = GridSearchResult { best: 0.0, argmax: None, evaluated: 0, feasible: 0 };
    let mut best_phi = f64::NEG_INFINITY;
    loop {
        let mut it = idx.iter();
        let mats = dims
            .iter()
            .map(|&d| Mat::from_diagonal(&crate::linalg::Vector::from_iterator(d, (0..d).map(|_| values[*it.next().unwrap()]))))
            .collect();
        let t = GaussTuple { mats };
        out.evaluated += 1;
        if let Some(phi) = objective(np, &t)? {
            out.feasible += 1;
            if phi > best_phi {
                best_phi = phi;
                out.argmax = Some(t);
            }
        }
        if params == 0 || !advance(&mut idx, opts.points) {
            break;
        }
    }
    out.best = if out.feasible > 0 { best_phi.exp() } else { 0.0 };
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    /// Smallest Gaussian value among the admissible samples, `+inf` if none.
    pub min: f64,
    pub samples: usize,
    pub attempts: usize,
    /// No admissible sample within `100 n` attempts.
    pub suspect_infeasible: bool,
}

/// Minimum of the functional over `n` random admissible centered Gaussian
/// tuples.  Attempt `i` draws from stream `i` of the seeded generator.
pub fn random_probe(np: &NormalizedProblem, n: usize, seed: u64) -> Result<ProbeResult> {
    let mut out = ProbeResult { min: f64::INFINITY, samples: 0, attempts: 0, suspect_infeasible: false };
    let budget = 100 * n.max(1);
    while out.samples < n && out.attempts < budget {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(out.attempts as u64);
        out.attempts += 1;
        let raw = random_tuple(np, &mut rng);
        let Some(t) = scaled_start(np, &raw) else { continue };
        let v = evaluate_gaussian(np, &t)?;
        if v.is_finite() {
            out.samples += 1;
            out.min = out.min.min(v);
        }
    }
    out.suspect_infeasible = n > 0 && out.samples == 0;
    Ok(out)
}
