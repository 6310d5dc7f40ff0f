//! Polynomial families and flatness measurements: `‖P‖₁/‖P‖₂`, uniform
//! deviation of `|P|/‖P‖₂` from 1, and local versus global L¹ distortion of
//! Prikhod'ko's exponentially spaced sums.

use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::appoly::APPoly;
use crate::bohrint::{
    grid_abs_range, integrate_vector, mean_abs, interval_l1_distortion_of, Budget,
    IntegralEstimate, QuadratureValue, RealLinePoly, TorusProgram, MAX_TENSOR_DIM,
    MAX_TENSOR_POINTS,
};
use crate::error::{Error, Result};
use crate::freqspace::{parse_rational, rational_rank, Frequency, SymbolBasis};
use crate::riesz::RankOneParams;

/// Successive grid maxima must agree to this before `ultraflat` stops.
pub const ULTRAFLAT_TOL: f64 = 1e-3;

fn default_symbol() -> String {
    "alpha".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolyFamilySpec {
    /// `sum_j signs[j] e^{i w_j t}` with signs in `{+1, -1}`.
    Littlewood {
        signs: Vec<i8>,
        /// Defaults to `w_j = j * symbol`.
        #[serde(default)]
        frequencies: Option<Vec<String>>,
        #[serde(default = "default_symbol")]
        symbol: String,
    },
    /// 0/1 coefficients with `indicators[0] = 1`.
    Newman {
        indicators: Vec<u8>,
        #[serde(default)]
        frequencies: Option<Vec<String>>,
        #[serde(default = "default_symbol")]
        symbol: String,
    },
    /// Coefficients `e^{i phases[j]}`.
    Unimodular {
        phases: Vec<f64>,
        #[serde(default)]
        frequencies: Option<Vec<String>>,
        #[serde(default = "default_symbol")]
        symbol: String,
    },
    /// `p^{-1/2} sum_{j<p} e^{i w(j) t}`, `w(j) = (m p / eps^2) e^{eps j / p}`.
    Prikhodko { m: u64, p: u64, epsilon: String },
    /// Stage polynomial `P_stage`, from independent-symbol parameters with
    /// the given cut numbers or from the caller's parameters.
    RankOne {
        stage: usize,
        #[serde(default)]
        independent: Option<Vec<usize>>,
    },
}

/// Exact-frequency polynomial, or float frequencies for the Prikhod'ko kind.
#[derive(Debug, Clone)]
pub enum FamilyPoly {
    Exact(APPoly),
    Float(RealLinePoly),
}

impl FamilyPoly {
    pub fn len(&self) -> usize {
        match self {
            FamilyPoly::Exact(p) => p.len(),
            FamilyPoly::Float(p) => p.terms().len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn l2_norm(&self) -> f64 {
        match self {
            FamilyPoly::Exact(p) => p.l2_norm(),
            FamilyPoly::Float(p) => p.terms().iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        match self {
            FamilyPoly::Exact(p) => p.terms().map(|(_, c)| *c).collect(),
            FamilyPoly::Float(p) => p.terms().iter().map(|(_, c)| *c).collect(),
        }
    }

    /// Real-line view, `(frequency value, coefficient)` pairs.
    pub fn real_line(&self) -> RealLinePoly {
        match self {
            FamilyPoly::Exact(p) => RealLinePoly::from_poly(p),
            FamilyPoly::Float(p) => p.clone(),
        }
    }
}

fn frequency_rule(
    basis: &Arc<SymbolBasis>,
    n: usize,
    frequencies: &Option<Vec<String>>,
    symbol: &str,
) -> Result<Vec<Frequency>> {
    match frequencies {
        Some(list) => {
            if list.len() != n {
                return Err(Error::InvalidParams(format!(
                    "{} frequencies given for {n} coefficients",
                    list.len()
                )));
            }
            list.iter().map(|s| Frequency::parse(basis, s)).collect()
        }
        None => {
            let alpha = Frequency::symbol(basis, symbol)
                .map_err(|_| Error::Config(format!("symbol `{symbol}` is not declared in the basis")))?;
            Ok((0..n).map(|j| alpha.scale_int(j as i64)).collect())
        }
    }
}

fn exact_family(
    basis: &Arc<SymbolBasis>,
    freqs: Vec<Frequency>,
    coeffs: Vec<Complex64>,
) -> Result<FamilyPoly> {
    let mut sorted = freqs.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::FrequencyCollision(format!("frequency {} repeats", w[0])));
    }
    let terms = freqs.into_iter().zip(coeffs).filter(|(_, c)| *c != Complex64::new(0.0, 0.0));
    Ok(FamilyPoly::Exact(APPoly::from_terms(basis, terms)?))
}

/// Prikhod'ko frequencies `(m p / eps^2) e^{eps j / p}`, `j < p`.
pub fn prikhodko_frequencies(m: u64, p: u64, epsilon: &str) -> Result<Vec<f64>> {
    let eps_r = parse_rational(epsilon)?;
    if !(eps_r.is_positive() && eps_r < crate::freqspace::Rational::one()) {
        return Err(Error::InvalidParams(format!("epsilon must lie in (0, 1), got {eps_r}")));
    }
    if m == 0 || p == 0 {
        return Err(Error::InvalidParams("m and p must be positive".into()));
    }
    let eps = eps_r.to_f64().unwrap_or(f64::NAN);
    let scale = m as f64 * p as f64 / (eps * eps);
    let freqs: Vec<f64> = (0..p).map(|j| scale * (eps * j as f64 / p as f64).exp()).collect();
    if let Some(w) = freqs.windows(2).find(|w| !(w[1] - w[0] > 1e-9 * w[1].abs())) {
        return Err(Error::FrequencyCollision(format!(
            "frequencies {} and {} are not separated",
            w[0], w[1]
        )));
    }
    Ok(freqs)
}

pub fn build_family(
    spec: &PolyFamilySpec,
    basis: &Arc<SymbolBasis>,
    rank_one: Option<&RankOneParams>,
) -> Result<FamilyPoly> {
    match spec {
        PolyFamilySpec::Littlewood { signs, frequencies, symbol } => {
            if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
                return Err(Error::InvalidParams(format!("littlewood sign {s} is not +1 or -1")));
            }
            let freqs = frequency_rule(basis, signs.len(), frequencies, symbol)?;
            let coeffs = signs.iter().map(|&s| Complex64::new(s as f64, 0.0)).collect();
            exact_family(basis, freqs, coeffs)
        }
        PolyFamilySpec::Newman { indicators, frequencies, symbol } => {
            if indicators.first() != Some(&1) {
                return Err(Error::InvalidParams("newman constant term must be 1".into()));
            }
            if let Some(s) = indicators.iter().find(|&&s| s > 1) {
                return Err(Error::InvalidParams(format!("newman coefficient {s} is not 0 or 1")));
            }
            let freqs = frequency_rule(basis, indicators.len(), frequencies, symbol)?;
            let coeffs = indicators.iter().map(|&s| Complex64::new(s as f64, 0.0)).collect();
            exact_family(basis, freqs, coeffs)
        }
        PolyFamilySpec::Unimodular { phases, frequencies, symbol } => {
            if phases.iter().any(|p| !p.is_finite()) {
                return Err(Error::NonFinite);
            }
            let freqs = frequency_rule(basis, phases.len(), frequencies, symbol)?;
            let coeffs = phases.iter().map(|&p| Complex64::cis(p)).collect();
            exact_family(basis, freqs, coeffs)
        }
        PolyFamilySpec::Prikhodko { m, p, epsilon } => {
            let freqs = prikhodko_frequencies(*m, *p, epsilon)?;
            let c = Complex64::new(1.0 / (*p as f64).sqrt(), 0.0);
            Ok(FamilyPoly::Float(RealLinePoly::new(freqs.into_iter().map(|w| (w, c)).collect())))
        }
        PolyFamilySpec::RankOne { stage, independent } => match (independent, rank_one) {
            (Some(ps), _) => Ok(FamilyPoly::Exact(RankOneParams::independent(ps)?.build_polynomial(*stage)?)),
            (None, Some(params)) => Ok(FamilyPoly::Exact(params.build_polynomial(*stage)?)),
            (None, None) => Err(Error::Config(
                "rank-one family needs rank-one parameters or an `independent` list".into(),
            )),
        },
    }
}

/// `‖P‖₁ / ‖P‖₂`. Float-frequency polynomials are integrated under the
/// independence model (each character an independent phase).
pub fn flatness_ratio(p: &FamilyPoly, budget: Budget) -> Result<IntegralEstimate> {
    let norm = p.l2_norm();
    if p.is_empty() || norm == 0.0 {
        return Err(Error::Empty("polynomial"));
    }
    let mut est = match p {
        FamilyPoly::Exact(q) => mean_abs(q, budget)?,
        FamilyPoly::Float(_) => independence_mean_abs(&p.coefficients(), budget)?,
    };
    est.value /= norm;
    est.std_error /= norm;
    est.refinement_delta = est.refinement_delta.map(|d| d / norm);
    Ok(est)
}

/// Haar mean of `|sum_k c_k e^{i theta_k}|` with independent phases.
pub fn independence_mean_abs(coeffs: &[Complex64], budget: Budget) -> Result<IntegralEstimate> {
    let program = TorusProgram::independent_characters(coeffs);
    Ok(integrate_vector(&program, 1, |v, out| out[0] = v[0].norm(), budget)?.component(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UltraflatMethod {
    /// Independent characters: the extremes of `|P|` are attained exactly.
    ClosedForm,
    TorusGrid,
    RealInterval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ultraflat {
    /// `max | |P|/‖P‖₂ - 1 |`.
    pub value: f64,
    /// `max |P|/‖P‖₂ - 1`.
    pub upper_excess: f64,
    /// `1 - min |P|/‖P‖₂`.
    pub lower_deficit: f64,
    pub refinement_delta: f64,
    pub points: usize,
    pub method: UltraflatMethod,
}

fn from_range(lo: f64, hi: f64, norm: f64, refinement_delta: f64, points: usize, method: UltraflatMethod) -> Ultraflat {
    let upper_excess = hi / norm - 1.0;
    let lower_deficit = 1.0 - lo / norm;
    Ultraflat {
        value: upper_excess.max(lower_deficit),
        upper_excess,
        lower_deficit,
        refinement_delta,
        points,
        method,
    }
}

pub fn ultraflat_deviation(p: &FamilyPoly) -> Result<f64> {
    Ok(ultraflat(p)?.value)
}

pub fn ultraflat(p: &FamilyPoly) -> Result<Ultraflat> {
    let norm = p.l2_norm();
    if p.is_empty() || norm == 0.0 {
        return Err(Error::Empty("polynomial"));
    }
    match p {
        FamilyPoly::Exact(q) => ultraflat_exact(q, norm),
        FamilyPoly::Float(q) => ultraflat_real(q, norm),
    }
}

fn ultraflat_exact(p: &APPoly, norm: f64) -> Result<Ultraflat> {
    let nonzero: Vec<Frequency> = p.support().filter(|f| !f.is_zero()).cloned().collect();
    let independent = nonzero.is_empty() || rational_rank(&nonzero)? == nonzero.len();
    if independent {
        // Kronecker: the phases of independent characters are jointly free,
        // so |P| ranges over [max(0, 2 max|c| - sum|c|), sum|c|]
        let mags: Vec<f64> = p.terms().map(|(_, c)| c.norm()).collect();
        let sum: f64 = mags.iter().sum();
        let top = mags.iter().cloned().fold(0.0, f64::max);
        let lo = (2.0 * top - sum).max(0.0);
        return Ok(from_range(lo, sum, norm, 0.0, 0, UltraflatMethod::ClosedForm));
    }
    let program = TorusProgram::from_polys(std::slice::from_ref(p))?;
    let d = program.dim();
    if d > MAX_TENSOR_DIM {
        return Err(Error::TensorDimension { dim: d, max: MAX_TENSOR_DIM });
    }
    let target = (64 * p.len()) as f64;
    let per_dim = target.powf(1.0 / d as f64).ceil() as usize;
    let mut sizes: Vec<usize> = program
        .grid_sizes(2)
        .into_iter()
        .map(|n| n.max(per_dim.next_power_of_two()))
        .collect();
    let mut prev: Option<(f64, f64)> = None;
    loop {
        let points: usize = sizes.iter().product();
        if points > MAX_TENSOR_POINTS {
            return Err(Error::Budget(format!(
                "ultraflat grid did not stabilise below {MAX_TENSOR_POINTS} points"
            )));
        }
        let (lo, hi) = grid_abs_range(&program, &sizes)?;
        if let Some((old_lo, old_hi)) = prev {
            let delta = ((hi - old_hi).abs()).max((lo - old_lo).abs()) / norm;
            if delta < ULTRAFLAT_TOL {
                return Ok(from_range(lo, hi, norm, delta, points, UltraflatMethod::TorusGrid));
            }
        }
        prev = Some((lo, hi));
        sizes.iter_mut().for_each(|n| *n *= 2);
    }
}

/// Grid on `[0, T]` with `T` spanning 64 beats of the closest frequency pair.
fn ultraflat_real(p: &RealLinePoly, norm: f64) -> Result<Ultraflat> {
    let mut freqs: Vec<f64> = p.terms().iter().map(|(w, _)| *w).collect();
    if freqs.len() == 1 {
        let a = p.terms()[0].1.norm();
        return Ok(from_range(a, a, norm, 0.0, 0, UltraflatMethod::RealInterval));
    }
    freqs.sort_by(f64::total_cmp);
    let min_gap = freqs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let spread = freqs[freqs.len() - 1] - freqs[0];
    let t_max = std::f64::consts::TAU * 64.0 / min_gap;
    let resolve = 8.0 * t_max * spread / std::f64::consts::TAU;
    let mut points = (resolve.ceil() as usize).max(64 * freqs.len());
    let work_cap = 1usize << 32;
    let mut prev: Option<(f64, f64)> = None;
    loop {
        if points.saturating_mul(freqs.len()) > work_cap {
            return Err(Error::Budget("ultraflat interval grid too fine".into()));
        }
        let step = t_max / points as f64;
        let (lo, hi) = (0..points)
            .map(|k| p.eval(k as f64 * step).norm())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| (lo.min(a), hi.max(a)));
        if let Some((old_lo, old_hi)) = prev {
            let delta = ((hi - old_hi).abs()).max((lo - old_lo).abs()) / norm;
            if delta < ULTRAFLAT_TOL {
                return Ok(from_range(lo, hi, norm, delta, points, UltraflatMethod::RealInterval));
            }
        }
        prev = Some((lo, hi));
        points *= 2;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalGlobal {
    /// `(1/(b-a)) ∫_a^b ||P|^2 - 1| dx`.
    pub local: QuadratureValue,
    /// `⨏|P|` with the frequencies treated as rationally independent.
    pub global_mean_abs: IntegralEstimate,
    pub model: String,
}

/// Panels per period of the fastest beat in the local quadrature.
pub const LOCAL_RESOLUTION: usize = 4;

pub fn local_vs_global_flatness(
    m: u64,
    p: u64,
    epsilon: &str,
    a: f64,
    b: f64,
    budget: Budget,
) -> Result<LocalGlobal> {
    let spec = PolyFamilySpec::Prikhodko { m, p, epsilon: epsilon.to_string() };
    let basis = SymbolBasis::with_unit(Vec::<(String, f64)>::new())?;
    let poly = build_family(&spec, &basis, None)?;
    let local = interval_l1_distortion_of(&poly.real_line(), a, b, LOCAL_RESOLUTION)?;
    let global_mean_abs = independence_mean_abs(&poly.coefficients(), budget)?;
    Ok(LocalGlobal {
        local,
        global_mean_abs,
        model: "independence".to_string(),
    })
}
