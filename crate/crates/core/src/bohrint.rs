//! Haar integration on the Bohr compactification.
//!
//! Characters at rationally independent frequencies are independent uniform
//! phases under Haar measure, so a functional of finitely many polynomials
//! integrates over the torus spanned by a reduced basis of their joint
//! support. The torus integral is computed either on a uniform tensor grid or
//! by seeded Monte Carlo. Real-line Cesàro means and interval averages are
//! computed by composite Gauss-Legendre quadrature.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::appoly::APPoly;
use crate::error::{Error, Result};
use crate::freqspace::{torus_reduce, Frequency};

/// Largest torus dimension handled by the tensor grid.
pub const MAX_TENSOR_DIM: usize = 4;
/// Minimum grid size per torus dimension.
pub const MIN_GRID: usize = 64;
/// Samples per Monte Carlo batch; each batch owns one RNG stream.
pub const MC_BATCH: u64 = 1 << 14;
/// Tensor grids above this many points are refused.
pub const MAX_TENSOR_POINTS: usize = 1 << 26;
/// `Budget::Auto` switches to Monte Carlo above this many grid points.
pub const AUTO_TENSOR_POINTS: usize = 1 << 22;

/// Exponent ranges up to this width get per-sample phase tables.
const TABLE_WIDTH: i64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TensorQuadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Budget {
    /// Uniform grid; `min_nodes` per dimension (raised to cover exponents).
    Tensor { min_nodes: usize },
    MonteCarlo { samples: u64, seed: u64 },
    /// Tensor grid when the torus is small enough, Monte Carlo otherwise.
    Auto { samples: u64, seed: u64 },
}

impl Budget {
    pub fn tensor() -> Self {
        Budget::Tensor {
            min_nodes: MIN_GRID,
        }
    }

    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        Budget::MonteCarlo { samples, seed }
    }

    pub fn auto(samples: u64, seed: u64) -> Self {
        Budget::Auto { samples, seed }
    }

    /// Same budget with the seed replaced by an independent child seed, for
    /// the `index`-th of several integrations in one analysis.
    pub fn derive(self, index: u64) -> Self {
        match self {
            Budget::Tensor { .. } => self,
            Budget::MonteCarlo { samples, seed } => Budget::MonteCarlo {
                samples,
                seed: child_seed(seed, index),
            },
            Budget::Auto { samples, seed } => Budget::Auto {
                samples,
                seed: child_seed(seed, index),
            },
        }
    }
}

/// Child seeds live on streams counted down from `u64::MAX`, away from the
/// batch streams.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    batch_rng(seed, u64::MAX - index).next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: Method,
    #[serde(rename = "n")]
    pub nodes_or_samples: u64,
    pub seed: Option<u64>,
    pub torus_dim: usize,
    /// `|value(n) - value(n/2)|` for tensor quadrature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement_delta: Option<f64>,
}

impl IntegralEstimate {
    /// Exact value, e.g. an empty product.
    pub fn exact(value: f64) -> Self {
        IntegralEstimate {
            value,
            std_error: 0.0,
            method: Method::TensorQuadrature,
            nodes_or_samples: 1,
            seed: None,
            torus_dim: 0,
            refinement_delta: Some(0.0),
        }
    }

    /// Statistical error, or the refinement delta for deterministic grids.
    pub fn uncertainty(&self) -> f64 {
        match self.method {
            Method::MonteCarlo => self.std_error,
            Method::TensorQuadrature => self.refinement_delta.unwrap_or(0.0),
        }
    }
}

/// Several integrals estimated from one set of torus points.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorEstimate {
    pub values: Vec<f64>,
    /// Covariance matrix of the estimates (zero for tensor quadrature).
    pub covariance: Vec<Vec<f64>>,
    pub method: Method,
    pub nodes_or_samples: u64,
    pub seed: Option<u64>,
    pub torus_dim: usize,
    pub refinement_delta: Option<Vec<f64>>,
}

impl VectorEstimate {
    pub fn component(&self, i: usize) -> IntegralEstimate {
        IntegralEstimate {
            value: self.values[i],
            std_error: self.covariance[i][i].max(0.0).sqrt(),
            method: self.method,
            nodes_or_samples: self.nodes_or_samples,
            seed: self.seed,
            torus_dim: self.torus_dim,
            refinement_delta: self.refinement_delta.as_ref().map(|d| d[i]),
        }
    }

    /// Standard error of a linear combination `sum w_i * value_i`, using the
    /// shared-sample covariance.
    pub fn combined_error(&self, weights: &[f64]) -> f64 {
        let mut var = 0.0;
        for (i, wi) in weights.iter().enumerate() {
            for (j, wj) in weights.iter().enumerate() {
                var += wi * wj * self.covariance[i][j];
            }
        }
        let stat = var.max(0.0).sqrt();
        let grid = self.refinement_delta.as_ref().map_or(0.0, |d| {
            weights.iter().zip(d).map(|(w, e)| w.abs() * e).sum()
        });
        stat + grid
    }
}

#[derive(Debug, Clone)]
struct TorusTerm {
    coeff: Complex64,
    exps: Vec<(usize, i64)>,
}

/// Polynomials rewritten as trigonometric polynomials on a finite torus.
#[derive(Debug, Clone)]
pub struct TorusProgram {
    dim: usize,
    polys: Vec<Vec<TorusTerm>>,
    exp_min: Vec<i64>,
    exp_max: Vec<i64>,
}

impl TorusProgram {
    /// Reduces the joint support of `polys` to integer exponents.
    pub fn from_polys(polys: &[APPoly]) -> Result<Self> {
        if let Some(first) = polys.first() {
            if polys.iter().any(|p| !crate::freqspace::same_basis(p.basis(), first.basis())) {
                return Err(Error::BasisMismatch);
            }
        }
        let mut index: BTreeMap<&Frequency, usize> = BTreeMap::new();
        let mut freqs: Vec<Frequency> = Vec::new();
        for p in polys {
            for f in p.support() {
                index.entry(f).or_insert_with(|| {
                    freqs.push(f.clone());
                    freqs.len() - 1
                });
            }
        }
        let (dim, rows) = if freqs.is_empty() {
            (0, Vec::new())
        } else {
            let red = torus_reduce(&freqs)?;
            (red.dim(), red.sparse_exponents_i64()?)
        };
        let programs = polys
            .iter()
            .map(|p| {
                p.terms()
                    .map(|(f, c)| TorusTerm {
                        coeff: *c,
                        exps: rows[index[f]].clone(),
                    })
                    .collect()
            })
            .collect();
        Ok(Self::assemble(dim, programs))
    }

    /// One polynomial `sum c_k e^{i theta_k}` whose characters are modelled
    /// as independent phases.
    pub fn independent_characters(coeffs: &[Complex64]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| TorusTerm {
                coeff: *c,
                exps: vec![(k, 1)],
            })
            .collect();
        Self::assemble(coeffs.len(), vec![terms])
    }

    fn assemble(dim: usize, polys: Vec<Vec<TorusTerm>>) -> Self {
        let mut exp_min = vec![0i64; dim];
        let mut exp_max = vec![0i64; dim];
        for term in polys.iter().flatten() {
            for &(j, e) in &term.exps {
                exp_min[j] = exp_min[j].min(e);
                exp_max[j] = exp_max[j].max(e);
            }
        }
        TorusProgram {
            dim,
            polys,
            exp_min,
            exp_max,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_polys(&self) -> usize {
        self.polys.len()
    }

    /// Grid size per dimension for tensor quadrature.
    pub fn grid_sizes(&self, min_nodes: usize) -> Vec<usize> {
        (0..self.dim)
            .map(|j| {
                let m = self.exp_min[j].unsigned_abs().max(self.exp_max[j].unsigned_abs());
                let mut n = 1usize;
                while (n as u64) <= 2 * m {
                    n *= 2;
                }
                n.max(min_nodes.next_power_of_two()).max(2)
            })
            .collect()
    }

    fn evaluator(&self) -> Evaluator<'_> {
        let tables = (0..self.dim)
            .map(|j| {
                if self.exp_max[j] - self.exp_min[j] < TABLE_WIDTH {
                    vec![Complex64::new(0.0, 0.0); (self.exp_max[j] - self.exp_min[j] + 1) as usize]
                } else {
                    Vec::new()
                }
            })
            .collect();
        Evaluator {
            program: self,
            tables,
        }
    }
}

struct Evaluator<'a> {
    program: &'a TorusProgram,
    tables: Vec<Vec<Complex64>>,
}

impl Evaluator<'_> {
    /// Values of every polynomial at the torus point `theta`.
    fn eval(&mut self, theta: &[f64], out: &mut [Complex64]) {
        let p = self.program;
        for (j, table) in self.tables.iter_mut().enumerate() {
            if table.is_empty() {
                continue;
            }
            let step = Complex64::cis(theta[j]);
            let mut z = Complex64::cis(p.exp_min[j] as f64 * theta[j]);
            for slot in table.iter_mut() {
                *slot = z;
                z *= step;
            }
        }
        for (poly, slot) in p.polys.iter().zip(out.iter_mut()) {
            let mut acc = Complex64::new(0.0, 0.0);
            for term in poly {
                let mut v = term.coeff;
                let mut angle = 0.0;
                for &(j, e) in &term.exps {
                    let table = &self.tables[j];
                    if table.is_empty() {
                        angle += e as f64 * theta[j];
                    } else {
                        v *= table[(e - p.exp_min[j]) as usize];
                    }
                }
                if angle != 0.0 {
                    v *= Complex64::cis(angle);
                }
                acc += v;
            }
            *slot = acc;
        }
    }
}

/// Running mean and co-moment matrix of vector samples.
#[derive(Debug, Clone)]
struct Moments {
    n: u64,
    mean: Vec<f64>,
    m2: Vec<Vec<f64>>,
}

impl Moments {
    fn new(k: usize) -> Self {
        Moments {
            n: 0,
            mean: vec![0.0; k],
            m2: vec![vec![0.0; k]; k],
        }
    }

    fn push(&mut self, x: &[f64], delta: &mut [f64]) {
        self.n += 1;
        let n = self.n as f64;
        for i in 0..x.len() {
            delta[i] = x[i] - self.mean[i];
            self.mean[i] += delta[i] / n;
        }
        for i in 0..x.len() {
            let after = x[i] - self.mean[i];
            for j in 0..x.len() {
                self.m2[i][j] += after * delta[j];
            }
        }
    }

    /// Chan et al. pairwise combination.
    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let k = self.mean.len();
        let delta: Vec<f64> = (0..k).map(|i| other.mean[i] - self.mean[i]).collect();
        for i in 0..k {
            for j in 0..k {
                self.m2[i][j] += other.m2[i][j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for i in 0..k {
            self.mean[i] += delta[i] * nb / n;
        }
        self.n += other.n;
    }
}

/// RNG for Monte Carlo batch `batch` under master seed `seed`.
pub fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

fn batch_sizes(samples: u64) -> Vec<u64> {
    let full = samples / MC_BATCH;
    let rest = samples % MC_BATCH;
    let mut sizes = vec![MC_BATCH; full as usize];
    if rest > 0 {
        sizes.push(rest);
    }
    sizes
}

/// Integrates the vector functional `g(P_1(w), ..., P_k(w)) -> R^outputs`
/// against Haar measure.
pub fn integrate_vector<G>(
    program: &TorusProgram,
    outputs: usize,
    g: G,
    budget: Budget,
) -> Result<VectorEstimate>
where
    G: Fn(&[Complex64], &mut [f64]) + Sync,
{
    let d = program.dim();
    match budget {
        Budget::Tensor { min_nodes } => tensor(program, outputs, &g, min_nodes),
        Budget::MonteCarlo { samples, seed } => monte_carlo(program, outputs, &g, samples, seed),
        Budget::Auto { samples, seed } => {
            let points = grid_points(&program.grid_sizes(MIN_GRID));
            if d <= MAX_TENSOR_DIM && points.is_some_and(|p| p <= AUTO_TENSOR_POINTS) {
                tensor(program, outputs, &g, MIN_GRID)
            } else {
                monte_carlo(program, outputs, &g, samples, seed)
            }
        }
    }
}

fn grid_points(sizes: &[usize]) -> Option<usize> {
    sizes.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n))
}

fn tensor<G>(program: &TorusProgram, outputs: usize, g: &G, min_nodes: usize) -> Result<VectorEstimate>
where
    G: Fn(&[Complex64], &mut [f64]) + Sync,
{
    let d = program.dim();
    if d > MAX_TENSOR_DIM {
        return Err(Error::TensorDimension {
            dim: d,
            max: MAX_TENSOR_DIM,
        });
    }
    let sizes = program.grid_sizes(min_nodes);
    let total = grid_points(&sizes)
        .filter(|&p| p <= MAX_TENSOR_POINTS)
        .ok_or_else(|| Error::Budget(format!("tensor grid {sizes:?} too large")))?;
    let slabs = sizes.first().copied().unwrap_or(1);
    let inner = total / slabs;

    let slab_sums = (0..slabs)
        .into_par_iter()
        .map(|first| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut ev = program.evaluator();
            let mut values = vec![Complex64::new(0.0, 0.0); program.num_polys()];
            let mut out = vec![0.0; outputs];
            let mut theta = vec![0.0; d];
            let mut idx = vec![0usize; d];
            let mut full = vec![0.0; outputs];
            let mut coarse = vec![0.0; outputs];
            for lin in 0..inner {
                let mut rem = lin;
                for j in (1..d).rev() {
                    idx[j] = rem % sizes[j];
                    rem /= sizes[j];
                }
                if d > 0 {
                    idx[0] = first;
                }
                for j in 0..d {
                    theta[j] = TAU * idx[j] as f64 / sizes[j] as f64;
                }
                ev.eval(&theta, &mut values);
                g(&values, &mut out);
                if out.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite);
                }
                let on_coarse = idx.iter().all(|i| i % 2 == 0);
                for i in 0..outputs {
                    full[i] += out[i];
                    if on_coarse {
                        coarse[i] += out[i];
                    }
                }
            }
            Ok((full, coarse))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut full = vec![0.0; outputs];
    let mut coarse = vec![0.0; outputs];
    for (f, c) in slab_sums {
        for i in 0..outputs {
            full[i] += f[i];
            coarse[i] += c[i];
        }
    }
    let coarse_points = (total >> d) as f64;
    let values: Vec<f64> = full.iter().map(|s| s / total as f64).collect();
    let delta = if d == 0 {
        vec![0.0; outputs]
    } else {
        values
            .iter()
            .zip(&coarse)
            .map(|(v, c)| (v - c / coarse_points).abs())
            .collect()
    };
    Ok(VectorEstimate {
        values,
        covariance: vec![vec![0.0; outputs]; outputs],
        method: Method::TensorQuadrature,
        nodes_or_samples: total as u64,
        seed: None,
        torus_dim: d,
        refinement_delta: Some(delta),
    })
}

fn monte_carlo<G>(
    program: &TorusProgram,
    outputs: usize,
    g: &G,
    samples: u64,
    seed: u64,
) -> Result<VectorEstimate>
where
    G: Fn(&[Complex64], &mut [f64]) + Sync,
{
    if samples == 0 {
        return Err(Error::Budget("Monte Carlo needs at least one sample".into()));
    }
    let d = program.dim();
    let batches = batch_sizes(samples);
    let partials = batches
        .par_iter()
        .enumerate()
        .map(|(b, &size)| -> Result<Moments> {
            let mut rng = batch_rng(seed, b as u64);
            let mut ev = program.evaluator();
            let mut values = vec![Complex64::new(0.0, 0.0); program.num_polys()];
            let mut out = vec![0.0; outputs];
            let mut scratch = vec![0.0; outputs];
            let mut theta = vec![0.0; d];
            let mut m = Moments::new(outputs);
            for _ in 0..size {
                for t in theta.iter_mut() {
                    *t = TAU * rng.random::<f64>();
                }
                ev.eval(&theta, &mut values);
                g(&values, &mut out);
                if out.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite);
                }
                m.push(&out, &mut scratch);
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = Moments::new(outputs);
    for m in &partials {
        total.merge(m);
    }
    let n = total.n as f64;
    let covariance = total
        .m2
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| if total.n > 1 { v / (n - 1.0) / n } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(VectorEstimate {
        values: total.mean,
        covariance,
        method: Method::MonteCarlo,
        nodes_or_samples: total.n,
        seed: Some(seed),
        torus_dim: d,
        refinement_delta: None,
    })
}

/// Minimum and maximum of `|P|` for the first polynomial of `program` over
/// the uniform grid with `sizes[j]` nodes in dimension `j`.
pub fn grid_abs_range(program: &TorusProgram, sizes: &[usize]) -> Result<(f64, f64)> {
    let d = program.dim();
    if sizes.len() != d || sizes.contains(&0) {
        return Err(Error::InvalidParams(format!(
            "grid sizes {sizes:?} do not match torus dimension {d}"
        )));
    }
    let total = grid_points(sizes)
        .filter(|&p| p <= MAX_TENSOR_POINTS)
        .ok_or_else(|| Error::Budget(format!("grid {sizes:?} too large")))?;
    let slabs = sizes.first().copied().unwrap_or(1);
    let inner = total / slabs;
    let ranges = (0..slabs)
        .into_par_iter()
        .map(|first| {
            let mut ev = program.evaluator();
            let mut values = vec![Complex64::new(0.0, 0.0); program.num_polys()];
            let mut theta = vec![0.0; d];
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for lin in 0..inner {
                let mut rem = lin;
                for j in (1..d).rev() {
                    theta[j] = TAU * (rem % sizes[j]) as f64 / sizes[j] as f64;
                    rem /= sizes[j];
                }
                if d > 0 {
                    theta[0] = TAU * first as f64 / sizes[0] as f64;
                }
                ev.eval(&theta, &mut values);
                let a = values[0].norm();
                lo = lo.min(a);
                hi = hi.max(a);
            }
            (lo, hi)
        })
        .collect::<Vec<_>>();
    Ok(ranges
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a), hi.max(b))))
}

/// Values of the first polynomial of `program` at `samples` Haar-random
/// torus points, in batch order.
pub fn sample_values(program: &TorusProgram, samples: u64, seed: u64) -> Vec<Complex64> {
    let d = program.dim();
    batch_sizes(samples)
        .par_iter()
        .enumerate()
        .map(|(b, &size)| {
            let mut rng = batch_rng(seed, b as u64);
            let mut ev = program.evaluator();
            let mut values = vec![Complex64::new(0.0, 0.0); program.num_polys()];
            let mut theta = vec![0.0; d];
            let mut out = Vec::with_capacity(size as usize);
            for _ in 0..size {
                for t in theta.iter_mut() {
                    *t = TAU * rng.random::<f64>();
                }
                ev.eval(&theta, &mut values);
                out.push(values[0]);
            }
            out
        })
        .collect::<Vec<_>>()
        .concat()
}

/// `∫ g(P_1, ..., P_k) dh` over the Bohr compactification.
pub fn bohr_integral<G>(g: G, polys: &[APPoly], budget: Budget) -> Result<IntegralEstimate>
where
    G: Fn(&[Complex64]) -> f64 + Sync,
{
    let program = TorusProgram::from_polys(polys)?;
    let est = integrate_vector(&program, 1, |v, out| out[0] = g(v), budget)?;
    Ok(est.component(0))
}

/// `‖P‖₁`, the Haar mean of `|P|`.
pub fn mean_abs(p: &APPoly, budget: Budget) -> Result<IntegralEstimate> {
    bohr_integral(|v| v[0].norm(), std::slice::from_ref(p), budget)
}

/// A trigonometric polynomial with floating-point frequencies, for real-line
/// quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLinePoly {
    terms: Vec<(f64, Complex64)>,
}

impl RealLinePoly {
    pub fn new(terms: Vec<(f64, Complex64)>) -> Self {
        RealLinePoly { terms }
    }

    pub fn from_poly(p: &APPoly) -> Self {
        Self::new(p.real_line_terms())
    }

    pub fn terms(&self) -> &[(f64, Complex64)] {
        &self.terms
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        crate::appoly::eval_terms(&self.terms, t)
    }

    fn max_abs_frequency(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w.abs()).fold(0.0, f64::max)
    }

    fn frequency_spread(&self) -> f64 {
        let (lo, hi) = self
            .terms
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (w, _)| (lo.min(*w), hi.max(*w)));
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }
}

/// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Composite Gauss-Legendre average of `f` over `[a, b]` with `panels` panels.
fn gl_average<T, F>(a: f64, b: f64, panels: usize, f: F) -> T
where
    T: Send + Copy + std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
    F: Fn(f64) -> T + Sync,
{
    let h = (b - a) / panels as f64;
    let panel_sum = |k: usize| -> T {
        let mid = a + (k as f64 + 0.5) * h;
        GL_NODES
            .iter()
            .zip(&GL_WEIGHTS)
            .map(|(x, w)| f(mid + 0.5 * h * x) * (*w))
            .sum()
    };
    // Chunked sum with a fixed partition keeps the result thread-count independent.
    const CHUNK: usize = 256;
    let chunks: Vec<T> = (0..panels.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(panels)).map(panel_sum).sum())
        .collect();
    chunks.into_iter().sum::<T>() * (0.5 / panels as f64)
}

/// `(1/2T) ∫_{-T}^{T} P(t) dt` by composite quadrature with `resolution`
/// panels per period of the fastest character (at least 2).
pub fn real_line_mean_of(p: &RealLinePoly, t: f64, resolution: usize) -> Result<Complex64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParams(format!("T must be positive, got {t}")));
    }
    let per_period = resolution.max(2) as f64;
    let periods = 2.0 * t * p.max_abs_frequency() / TAU;
    let panels = ((periods * per_period).ceil() as usize).max(16);
    Ok(gl_average(-t, t, panels, |x| p.eval(x)))
}

/// Real-line Cesàro mean of an exact-frequency polynomial.
pub fn real_line_mean(p: &APPoly, t: f64, resolution: usize) -> Result<Complex64> {
    real_line_mean_of(&RealLinePoly::from_poly(p), t, resolution)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureValue {
    pub value: f64,
    pub refinement_delta: f64,
    pub panels: usize,
}

/// Absolute tolerance on the refinement delta of `interval_l1_distortion`.
pub const DISTORTION_TOL: f64 = 1e-4;
const DISTORTION_MAX_DOUBLINGS: usize = 8;

/// `(1/(b-a)) ∫_a^b | |P(x)|^2 - 1 | dx`, doubling the panel count until
/// successive values agree to [`DISTORTION_TOL`].
pub fn interval_l1_distortion_of(
    p: &RealLinePoly,
    a: f64,
    b: f64,
    resolution: usize,
) -> Result<QuadratureValue> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParams(format!("need a < b, got [{a}, {b}]")));
    }
    let per_period = resolution.max(2) as f64;
    let periods = (b - a) * p.frequency_spread() / TAU;
    let mut panels = ((periods * per_period).ceil() as usize).max(16);
    let integrand = |x: f64| (p.eval(x).norm_sqr() - 1.0).abs();
    let mut value = gl_average(a, b, panels, integrand);
    let mut delta = f64::INFINITY;
    for _ in 0..DISTORTION_MAX_DOUBLINGS {
        panels *= 2;
        let refined = gl_average(a, b, panels, integrand);
        delta = (refined - value).abs();
        value = refined;
        if delta < DISTORTION_TOL {
            break;
        }
    }
    Ok(QuadratureValue {
        value,
        refinement_delta: delta,
        panels,
    })
}

pub fn interval_l1_distortion(p: &APPoly, a: f64, b: f64, resolution: usize) -> Result<QuadratureValue> {
    interval_l1_distortion_of(&RealLinePoly::from_poly(p), a, b, resolution)
}
