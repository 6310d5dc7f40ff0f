//! Numerical singularity criteria for generalized Riesz products: Bourgain
//! scans, the Cauchy-Schwarz subsequence bound, the Klemes-type inequality,
//! Guenais sums, Fejér-type factorization and Kac CLT diagnostics.
//!
//! Throughout, `Q = prod_i |P_{n_i}|` (moduli, not squares).

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::binomial;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::appoly::{APPoly, ExactPoly};
use crate::bohrint::{
    integrate_vector, mean_abs, sample_values, Budget, IntegralEstimate, Method, TorusProgram,
    VectorEstimate,
};
use crate::coeff::{Coefficient, ExactComplex};
use crate::error::{Error, Result};
use crate::freqspace::{rational_rank, Frequency, Rational, SymbolBasis};
use crate::riesz::RankOneParams;
use crate::stats::{ks_distance_normal, least_squares_slope, mean_and_std_error};

/// `sqrt(pi)/2`, the first absolute moment of a standard complex Gaussian.
pub const GAUSS_FIRST_MOMENT: f64 = 0.886_226_925_452_758;

/// `1 - pi/4`; `sqrt` of it is the limiting Guenais increment.
pub const GUENAIS_LIMIT_SQ: f64 = 1.0 - PI / 4.0;

/// Per-step contraction `sqrt(pi)/2 + eps` with `eps = sqrt(pi)/100`.
pub fn geometric_factor() -> f64 {
    51.0 * PI.sqrt() / 100.0
}

/// Evidence threshold on `I_k` for the singularity verdict.
pub const EVIDENCE_THRESHOLD: f64 = 0.1;

/// Confidence multiplier on error bars.
pub const SIGMAS: f64 = 3.0;

/// Estimated expansion sizes above this skip the exact symbolic checks.
pub const SYMBOLIC_TERM_CAP: usize = 200_000;

/// Absolute slack for deterministic grids whose error bars can be zero.
const FLOOR: f64 = 1e-12;

fn stage_polys(params: &RankOneParams, indices: &[usize]) -> Result<Vec<APPoly>> {
    indices.iter().map(|&k| params.build_polynomial(k)).collect()
}

fn check_increasing(indices: &[usize]) -> Result<()> {
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams(format!(
            "indices {indices:?} must be strictly increasing"
        )));
    }
    Ok(())
}

fn check_after(indices: &[usize], m: usize) -> Result<()> {
    check_increasing(indices)?;
    if indices.last().is_some_and(|&last| m <= last) {
        return Err(Error::InvalidParams(format!(
            "stage {m} must come after every index of {indices:?}"
        )));
    }
    Ok(())
}

fn prod_abs(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm()).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum ScanStrategy {
    /// Pick, among the next `window` stages, the one minimizing `∫Q|P_m|`.
    Greedy { window: usize },
    FixedStride { start: usize, stride: usize },
}

impl Default for ScanStrategy {
    fn default() -> Self {
        ScanStrategy::Greedy { window: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SingularityEvidence,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub step: usize,
    pub stage: usize,
    pub estimate: IntegralEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub strategy: ScanStrategy,
    pub k_max: usize,
    pub indices: Vec<usize>,
    /// `I_0 = 1, I_1, ..., I_{k_max}`.
    pub i_k: Vec<IntegralEstimate>,
    /// `I_{k+1} / I_k`, `None` where `I_k` is not positive.
    pub decay_ratios: Vec<Option<f64>>,
    /// `geometric_factor()^k`.
    pub geometric_bound: Vec<f64>,
    pub within_geometric_bound: Vec<bool>,
    /// Whether `I_k < 0.1` at 3 sigma, per `k`.
    pub evidence_by_k: Vec<bool>,
    pub verdict: Verdict,
    pub candidates: Vec<CandidateRecord>,
    pub budget: Budget,
}

/// Estimates `I_k = ∫ prod_{j<=k} |P_{n_j}| dh` along a chosen subsequence.
///
/// Each pass integrates the current `Q` together with `Q |P_m|` for every
/// candidate `m` on one sample set, so `I_k` itself is re-estimated on fresh
/// samples rather than taken from the selection pass.
pub fn bourgain_scan(
    params: &RankOneParams,
    strategy: ScanStrategy,
    k_max: usize,
    budget: Budget,
) -> Result<ScanReport> {
    if k_max == 0 {
        return Err(Error::InvalidParams("k_max must be at least 1".into()));
    }
    let n_stages = params.num_stages();
    let mut chosen: Vec<usize> = Vec::new();
    let mut chosen_polys: Vec<APPoly> = Vec::new();
    let mut i_k = vec![IntegralEstimate::exact(1.0)];
    let mut candidates = Vec::new();
    for step in 0..=k_max {
        let cands: Vec<usize> = if step == k_max {
            Vec::new()
        } else {
            let wanted: Vec<usize> = match strategy {
                ScanStrategy::Greedy { window } => {
                    if window == 0 {
                        return Err(Error::InvalidParams("greedy window must be at least 1".into()));
                    }
                    let next = chosen.last().map_or(0, |&l| l + 1);
                    (next..next + window).collect()
                }
                ScanStrategy::FixedStride { start, stride } => {
                    if stride == 0 {
                        return Err(Error::InvalidParams("stride must be at least 1".into()));
                    }
                    vec![start + step * stride]
                }
            };
            let avail: Vec<usize> = wanted.into_iter().filter(|&m| m < n_stages).collect();
            if avail.is_empty() {
                return Err(Error::Budget(format!(
                    "step {} needs a stage beyond {:?} but params have {n_stages} stages",
                    step + 1,
                    chosen
                )));
            }
            avail
        };
        let nq = chosen_polys.len();
        let mut polys = chosen_polys.clone();
        polys.extend(stage_polys(params, &cands)?);
        let nc = cands.len();
        let est = if polys.is_empty() {
            None
        } else {
            let program = TorusProgram::from_polys(&polys)?;
            Some(integrate_vector(
                &program,
                nc + 1,
                |v, out| {
                    let q = prod_abs(&v[..nq]);
                    for w in 0..nc {
                        out[w] = q * v[nq + w].norm();
                    }
                    out[nc] = q;
                },
                budget.derive(step as u64),
            )?)
        };
        if step > 0 {
            i_k.push(est.as_ref().expect("nonempty product").component(nc));
        }
        if step == k_max {
            break;
        }
        let est = est.expect("candidates present");
        let mut best = 0;
        for (w, &m) in cands.iter().enumerate() {
            candidates.push(CandidateRecord {
                step: step + 1,
                stage: m,
                estimate: est.component(w),
            });
            if est.values[w] < est.values[best] {
                best = w;
            }
        }
        chosen.push(cands[best]);
        chosen_polys.push(polys.swap_remove(nq + best));
    }
    let decay_ratios = i_k
        .windows(2)
        .map(|w| (w[0].value > 0.0).then(|| w[1].value / w[0].value))
        .collect();
    let factor = geometric_factor();
    let geometric_bound: Vec<f64> = (0..=k_max).map(|k| factor.powi(k as i32)).collect();
    let within_geometric_bound = i_k
        .iter()
        .zip(&geometric_bound)
        .map(|(e, g)| e.value <= g + SIGMAS * e.uncertainty() + FLOOR)
        .collect();
    let evidence_by_k: Vec<bool> = i_k
        .iter()
        .map(|e| e.value + SIGMAS * e.uncertainty() < EVIDENCE_THRESHOLD)
        .collect();
    let verdict = if evidence_by_k[k_max] {
        Verdict::SingularityEvidence
    } else {
        Verdict::Inconclusive
    };
    Ok(ScanReport {
        strategy,
        k_max,
        indices: chosen,
        i_k,
        decay_ratios,
        geometric_bound,
        within_geometric_bound,
        evidence_by_k,
        verdict,
        candidates,
        budget,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsBound {
    /// `∫ prod_{k<=N} |P_k|`.
    pub lhs: IntegralEstimate,
    /// `∫ prod_{k in indices} |P_k|`.
    pub subsequence: IntegralEstimate,
    /// Square root of `subsequence`.
    pub rhs: f64,
    /// Standard error of `lhs - rhs` from the shared samples.
    pub combined_error: f64,
    pub holds: bool,
}

/// `∫ prod_{k<=N} |P_k| <= (∫ prod_{k in indices} |P_k|)^{1/2}`.
pub fn cs_subsequence_bound(
    params: &RankOneParams,
    full_n: usize,
    indices: &[usize],
    budget: Budget,
) -> Result<CsBound> {
    check_increasing(indices)?;
    if indices.last().is_some_and(|&l| l > full_n) {
        return Err(Error::InvalidParams(format!(
            "indices {indices:?} must lie in 0..={full_n}"
        )));
    }
    let all: Vec<usize> = (0..=full_n).collect();
    let polys = stage_polys(params, &all)?;
    let program = TorusProgram::from_polys(&polys)?;
    let est = integrate_vector(
        &program,
        2,
        |v, out| {
            out[0] = prod_abs(v);
            out[1] = indices.iter().map(|&k| v[k].norm()).product();
        },
        budget,
    )?;
    let sub = est.values[1];
    let rhs = sub.max(0.0).sqrt();
    let slope = if rhs > 0.0 { 0.5 / rhs } else { 0.0 };
    let combined_error = est.combined_error(&[1.0, -slope]);
    let lhs = est.component(0);
    let holds = lhs.value <= rhs + SIGMAS * combined_error + FLOOR;
    Ok(CsBound {
        lhs,
        subsequence: est.component(1),
        rhs,
        combined_error,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlemesCheck {
    /// `∫Q|P_m|`.
    pub q_pm: IntegralEstimate,
    /// `∫Q`.
    pub q: IntegralEstimate,
    /// `∫Q|P_m|^2`.
    pub q_pm2: IntegralEstimate,
    /// `∫Q||P_m|^2 - 1|`.
    pub q_deviation: IntegralEstimate,
    pub lhs: f64,
    pub rhs: f64,
    pub combined_error: f64,
    pub holds: bool,
}

/// `∫Q|P_m| <= (∫Q + ∫Q|P_m|^2)/2 - (∫Q||P_m|^2-1|)^2 / 8`, all four
/// integrals from one sample set.
pub fn klemes_inequality_check(
    params: &RankOneParams,
    indices: &[usize],
    m: usize,
    budget: Budget,
) -> Result<KlemesCheck> {
    check_after(indices, m)?;
    let mut polys = stage_polys(params, indices)?;
    polys.push(params.build_polynomial(m)?);
    let nq = indices.len();
    let program = TorusProgram::from_polys(&polys)?;
    let est = integrate_vector(
        &program,
        4,
        |v, out| {
            let q = prod_abs(&v[..nq]);
            let a2 = v[nq].norm_sqr();
            out[0] = q * a2.sqrt();
            out[1] = q;
            out[2] = q * a2;
            out[3] = q * (a2 - 1.0).abs();
        },
        budget,
    )?;
    let [a, q, q2, dev] = [0, 1, 2, 3].map(|i| est.values[i]);
    let lhs = a;
    let rhs = 0.5 * (q + q2) - dev * dev / 8.0;
    let combined_error = est.combined_error(&[1.0, -0.5, -0.5, dev / 4.0]);
    let holds = lhs - rhs <= SIGMAS * combined_error + FLOOR;
    Ok(KlemesCheck {
        q_pm: est.component(0),
        q: est.component(1),
        q_pm2: est.component(2),
        q_deviation: est.component(3),
        lhs,
        rhs,
        combined_error,
        holds,
    })
}

fn exact_product(params: &RankOneParams, indices: &[usize]) -> Result<Option<ExactPoly>> {
    let mut size = 1usize;
    for &k in indices {
        let p = params.stage(k)?.p;
        size = size.saturating_mul(p * (p - 1) + 1);
    }
    if size > SYMBOLIC_TERM_CAP {
        return Ok(None);
    }
    let mut acc = ExactPoly::one(params.basis());
    for &k in indices {
        acc = acc.mul(&params.abs2_exact(k)?)?;
    }
    Ok(Some(acc))
}

/// `mean(A B) - mean(A) mean(B)` exactly, or `None` above the size cap.
fn factorization_gap(a: &ExactPoly, b: &ExactPoly) -> Result<Option<Rational>> {
    if a.len().saturating_mul(b.len()) > SYMBOLIC_TERM_CAP {
        return Ok(None);
    }
    let joint = a.mul(b)?.mean();
    let split = a.mean().mul(&b.mean());
    let gap = joint.add(&split.neg());
    if !gap.im.is_zero() {
        return Err(Error::Inconsistency("factorization gap has an imaginary part".into()));
    }
    Ok(Some(gap.re))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarRecord {
    pub m: usize,
    pub q: IntegralEstimate,
    pub q_pm2: IntegralEstimate,
    /// `∫Q|P_m|^2 - ∫Q`.
    pub deviation: f64,
    pub deviation_error: f64,
    /// Exact `mean(Q2 |P_m|^2) - mean(Q2) mean(|P_m|^2)` with
    /// `Q2 = prod_i |P_{n_i}|^2`, when small enough to expand.
    pub symbolic_gap: Option<String>,
}

/// Tracks `∫Q|P_m|^2 -> ∫Q` along `m_list`.
pub fn haar_weak_limit_check(
    params: &RankOneParams,
    q_indices: &[usize],
    m_list: &[usize],
    budget: Budget,
) -> Result<Vec<HaarRecord>> {
    let q_polys = stage_polys(params, q_indices)?;
    let q_exact = exact_product(params, q_indices)?;
    let nq = q_indices.len();
    m_list
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            check_after(q_indices, m)?;
            let mut polys = q_polys.clone();
            polys.push(params.build_polynomial(m)?);
            let program = TorusProgram::from_polys(&polys)?;
            let est = integrate_vector(
                &program,
                2,
                |v, out| {
                    let q = prod_abs(&v[..nq]);
                    out[0] = q;
                    out[1] = q * v[nq].norm_sqr();
                },
                budget.derive(i as u64),
            )?;
            let symbolic_gap = match &q_exact {
                Some(q2) => factorization_gap(q2, &params.abs2_exact(m)?)?.map(|g| g.to_string()),
                None => None,
            };
            Ok(HaarRecord {
                m,
                q: est.component(0),
                q_pm2: est.component(1),
                deviation: est.values[1] - est.values[0],
                deviation_error: est.combined_error(&[-1.0, 1.0]),
                symbolic_gap,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuenaisReport {
    pub mean_abs: Vec<IntegralEstimate>,
    /// `sqrt(max(0, 1 - ‖P_k‖₁²))`.
    pub increments: Vec<f64>,
    pub increment_errors: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub total: f64,
    /// Least-squares slope of `ln(increment_k)` against `k`.
    pub tail_slope: Option<f64>,
}

pub fn guenais_sum(params: &RankOneParams, k: usize, budget: Budget) -> Result<GuenaisReport> {
    let mut report = GuenaisReport {
        mean_abs: Vec::with_capacity(k),
        increments: Vec::with_capacity(k),
        increment_errors: Vec::with_capacity(k),
        partial_sums: Vec::with_capacity(k),
        total: 0.0,
        tail_slope: None,
    };
    for stage in 0..k {
        let est = mean_abs(&params.build_polynomial(stage)?, budget.derive(stage as u64))?;
        let v = est.value;
        let sq_err = 2.0 * v.abs() * est.uncertainty();
        if v * v > 1.0 + SIGMAS * sq_err + FLOOR {
            return Err(Error::Integration(format!(
                "stage {stage}: ‖P‖₁ estimate {v} exceeds 1 beyond {SIGMAS} sigma"
            )));
        }
        let inc = (1.0 - v * v).max(0.0).sqrt();
        let err = if inc > 0.0 { v * est.uncertainty() / inc } else { est.uncertainty().sqrt() };
        report.total += inc;
        report.mean_abs.push(est);
        report.increments.push(inc);
        report.increment_errors.push(err);
        report.partial_sums.push(report.total);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = report
        .increments
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0.0)
        .map(|(i, d)| (i as f64, d.ln()))
        .unzip();
    report.tail_slope = least_squares_slope(&xs, &ys);
    Ok(report)
}

fn rank(freqs: &[Frequency]) -> Result<usize> {
    if freqs.is_empty() {
        Ok(0)
    } else {
        rational_rank(freqs)
    }
}

fn nonzero_support(p: &APPoly) -> Vec<Frequency> {
    p.support().filter(|f| !f.is_zero()).cloned().collect()
}

/// Checks that the characters of `P_m` are rationally independent of those
/// of the `Q` stages, on top of the per-stage hypothesis.
pub fn validate_fejer_hypothesis(params: &RankOneParams, q_indices: &[usize], m: usize) -> Result<()> {
    check_after(q_indices, m)?;
    let mut stages = q_indices.to_vec();
    stages.push(m);
    params.validate_independence_hypothesis(&stages)?;
    let q_freqs: Vec<Frequency> = stage_polys(params, q_indices)?
        .iter()
        .flat_map(nonzero_support)
        .collect();
    let m_freqs = nonzero_support(&params.build_polynomial(m)?);
    let joint: Vec<Frequency> = q_freqs.iter().chain(&m_freqs).cloned().collect();
    if rank(&joint)? != rank(&q_freqs)? + rank(&m_freqs)? {
        return Err(Error::Hypothesis(format!(
            "frequencies of stage {m} are rationally dependent on those of {q_indices:?}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FejerCheck {
    /// `∫Q|P_m|`.
    pub joint: IntegralEstimate,
    pub q: IntegralEstimate,
    pub pm: IntegralEstimate,
    /// `∫Q · ∫|P_m|`.
    pub product: f64,
    pub relative_gap: f64,
    pub combined_error: f64,
    pub holds: bool,
    /// Exact `mean(Q2 |P_m|^4) = mean(Q2) mean(|P_m|^4)` with
    /// `Q2 = prod_i |P_{n_i}|^2`, when small enough to expand.
    pub symbolic_holds: Option<bool>,
}

/// `∫Q|P_m| = ∫Q · ∫|P_m|` under rational independence.
pub fn fejer_factorization_check(
    params: &RankOneParams,
    q_indices: &[usize],
    m: usize,
    budget: Budget,
) -> Result<FejerCheck> {
    validate_fejer_hypothesis(params, q_indices, m)?;
    let mut polys = stage_polys(params, q_indices)?;
    polys.push(params.build_polynomial(m)?);
    let nq = q_indices.len();
    let program = TorusProgram::from_polys(&polys)?;
    let est = integrate_vector(
        &program,
        3,
        |v, out| {
            let q = prod_abs(&v[..nq]);
            let a = v[nq].norm();
            out[0] = q * a;
            out[1] = q;
            out[2] = a;
        },
        budget,
    )?;
    let [joint, q, pm] = [0, 1, 2].map(|i| est.values[i]);
    let product = q * pm;
    let combined_error = est.combined_error(&[1.0, -pm, -q]);
    let gap = joint - product;
    let relative_gap = if product != 0.0 { gap / product } else { gap };
    let holds = gap.abs() <= SIGMAS * combined_error + FLOOR;
    let symbolic_holds = match exact_product(params, q_indices)? {
        Some(q2) => {
            let a2 = params.abs2_exact(m)?;
            let a4 = a2.mul(&a2)?;
            factorization_gap(&q2, &a4)?.map(|g| g.is_zero())
        }
        None => None,
    };
    Ok(FejerCheck {
        joint: est.component(0),
        q: est.component(1),
        pm: est.component(2),
        product,
        relative_gap,
        combined_error,
        holds,
        symbolic_holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KacCltReport {
    pub q: usize,
    pub samples: u64,
    pub seed: u64,
    pub ks_distance_re: f64,
    pub ks_distance_im: f64,
    pub mean_abs: IntegralEstimate,
    pub mean_abs2: IntegralEstimate,
}

/// Samples `Z = q^{-1/2} sum_k e^{i theta_k}` with independent uniform phases
/// and compares with the standard complex Gaussian.
pub fn kac_clt_diagnostics(q: usize, n_samples: u64, seed: u64) -> Result<KacCltReport> {
    if q == 0 || n_samples == 0 {
        return Err(Error::InvalidParams("q and the sample count must be positive".into()));
    }
    let c = Complex64::new(1.0 / (q as f64).sqrt(), 0.0);
    let program = TorusProgram::independent_characters(&vec![c; q]);
    let z = sample_values(&program, n_samples, seed);
    let re: Vec<f64> = z.iter().map(|z| z.re).collect();
    let im: Vec<f64> = z.iter().map(|z| z.im).collect();
    let abs: Vec<f64> = z.iter().map(|z| z.norm()).collect();
    let abs2: Vec<f64> = z.iter().map(|z| z.norm_sqr()).collect();
    let estimate = |values: &[f64]| {
        let (value, std_error) = mean_and_std_error(values);
        IntegralEstimate {
            value,
            std_error,
            method: Method::MonteCarlo,
            nodes_or_samples: n_samples,
            seed: Some(seed),
            torus_dim: q,
            refinement_delta: None,
        }
    };
    Ok(KacCltReport {
        q,
        samples: n_samples,
        seed,
        ks_distance_re: ks_distance_normal(&re, 0.5),
        ks_distance_im: ks_distance_normal(&im, 0.5),
        mean_abs: estimate(&abs),
        mean_abs2: estimate(&abs2),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KacMoment {
    pub formula: Rational,
    pub symbolic: Rational,
}

/// `prod_j 2^{-l_j} C(l_j, l_j/2)` if every `l_j` is even, else 0.
pub fn kac_moment_formula(l: &[u32]) -> Rational {
    l.iter().fold(Rational::from_integer(BigInt::from(1)), |acc, &lj| {
        if lj % 2 == 1 {
            return Rational::zero();
        }
        let c = binomial(BigInt::from(lj), BigInt::from(lj / 2));
        acc * Rational::new(c, BigInt::from(1) << lj)
    })
}

/// Mean of `prod_j cos^{l_j}(omega_j t)` for independent `omega_j`, by
/// expanding `cos = (e^{i.} + e^{-i.})/2` in the exact algebra.
pub fn kac_moment_symbolic(l: &[u32]) -> Result<Rational> {
    const VALUES: [f64; 8] = [1.414, 1.732, 2.236, 2.645, 3.316, 3.605, 4.123, 4.358];
    let basis = SymbolBasis::new(
        l.iter()
            .enumerate()
            .map(|(j, _)| crate::freqspace::Symbol::new(format!("w{j}"), VALUES[j % VALUES.len()] + j as f64))
            .collect(),
    )?;
    let half = ExactComplex::real(Rational::new(BigInt::from(1), BigInt::from(2)));
    let mut acc = ExactPoly::one(&basis);
    for (j, &lj) in l.iter().enumerate() {
        let w = Frequency::generator(&basis, j)?;
        let cos = ExactPoly::from_terms(&basis, [(w.clone(), half.clone()), (w.neg(), half.clone())])?;
        for _ in 0..lj {
            acc = acc.mul(&cos)?;
        }
    }
    let mean = acc.mean();
    if !mean.is_real() {
        return Err(Error::Inconsistency("cosine moment has an imaginary part".into()));
    }
    Ok(mean.re)
}

/// Both routes to the moment; errors if they disagree.
pub fn kac_moment_identity(l: &[u32]) -> Result<KacMoment> {
    let formula = kac_moment_formula(l);
    let symbolic = kac_moment_symbolic(l)?;
    if formula != symbolic {
        return Err(Error::Inconsistency(format!(
            "moment formula {formula} differs from expansion {symbolic} for l = {l:?}"
        )));
    }
    Ok(KacMoment { formula, symbolic })
}

/// Float view for reports.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Shared-sample values for a custom functional of the stage polynomials at
/// `indices`; exposed for callers composing their own checks.
pub fn integrate_stages<G>(
    params: &RankOneParams,
    indices: &[usize],
    outputs: usize,
    g: G,
    budget: Budget,
) -> Result<VectorEstimate>
where
    G: Fn(&[Complex64], &mut [f64]) + Sync,
{
    let polys = stage_polys(params, indices)?;
    let program = TorusProgram::from_polys(&polys)?;
    integrate_vector(&program, outputs, g, budget)
}
