//! Rank-one parameters and generalized Riesz-product bookkeeping.
//!
//! Stage `k` has a cut number `p_k >= 2` and spacers `s_{k,0..=p_k}` with
//! `s_{k,0} = 0`. Heights follow `h_0 = 1`, `h_{k+1} = p_k h_k + sum_l s_{k,l}`
//! and the stage polynomial is
//! `P_k(t) = p_k^{-1/2} sum_{j<p_k} e^{i (j h_k + s_{k,0} + ... + s_{k,j-1}) t}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::appoly::{APPoly, ExactPoly};
use crate::coeff::{Coefficient, ExactComplex};
use crate::error::{Error, Result};
use crate::freqspace::{
    is_rationally_independent, same_basis, Frequency, Rational, Symbol, SymbolBasis,
};

/// Default ceiling on the number of terms of a partial product.
pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;

/// Relative tolerance of the floating degree comparisons.
pub const DEGREE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub p: usize,
    /// `s_{k,0}, ..., s_{k,p}`.
    pub spacers: Vec<Frequency>,
}

#[derive(Debug, Clone)]
pub struct RankOneParams {
    basis: Arc<SymbolBasis>,
    stages: Vec<Stage>,
    heights: Vec<Frequency>,
}

impl RankOneParams {
    pub fn new(basis: &Arc<SymbolBasis>, stages: Vec<Stage>) -> Result<Self> {
        let unit = Frequency::unit(basis)?;
        for (k, st) in stages.iter().enumerate() {
            if st.p < 2 {
                return Err(Error::InvalidParams(format!(
                    "stage {k}: cut number p = {} must be at least 2",
                    st.p
                )));
            }
            if st.spacers.len() != st.p + 1 {
                return Err(Error::InvalidParams(format!(
                    "stage {k}: expected {} spacers, got {}",
                    st.p + 1,
                    st.spacers.len()
                )));
            }
            for (j, s) in st.spacers.iter().enumerate() {
                if !same_basis(s.basis(), basis) {
                    return Err(Error::BasisMismatch);
                }
                if j == 0 && !s.is_zero() {
                    return Err(Error::InvalidParams(format!(
                        "stage {k}: spacer s_0 must be 0, got {s}"
                    )));
                }
                let v = s.real_value();
                if !(v >= 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "stage {k}: spacer s_{j} = {s} has negative value {v}"
                    )));
                }
            }
        }
        let mut heights = vec![unit];
        for st in &stages {
            let h = heights.last().expect("h_0");
            let mut next = h.scale_int(st.p as i64);
            for s in &st.spacers {
                next = next.add_unchecked(s);
            }
            heights.push(next);
        }
        Ok(RankOneParams {
            basis: basis.clone(),
            stages,
            heights,
        })
    }

    /// Every spacer `s_{k,j}`, `1 <= j <= p_k`, is its own symbol, so the
    /// characters of all stage polynomials are jointly independent.
    pub fn independent(ps: &[usize]) -> Result<Self> {
        let mut symbols = vec![Symbol::new(crate::freqspace::UNIT_SYMBOL, 1.0)];
        for (k, &p) in ps.iter().enumerate() {
            for j in 1..=p {
                symbols.push(Symbol::new(format!("s{k}_{j}"), spacer_value(k, j)));
            }
        }
        let basis = SymbolBasis::new(symbols)?;
        let mut next = 1;
        let stages = ps
            .iter()
            .map(|&p| {
                let mut spacers = vec![Frequency::zero(&basis)];
                for _ in 1..=p {
                    spacers.push(Frequency::generator(&basis, next)?);
                    next += 1;
                }
                Ok(Stage { p, spacers })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&basis, stages)
    }

    /// All spacers zero: `h_k = p_0 ... p_{k-1}`.
    pub fn without_spacers(ps: &[usize]) -> Result<Self> {
        let basis = SymbolBasis::with_unit(Vec::<(String, f64)>::new())?;
        let stages = ps
            .iter()
            .map(|&p| Stage {
                p,
                spacers: vec![Frequency::zero(&basis); p + 1],
            })
            .collect();
        Self::new(&basis, stages)
    }

    pub fn basis(&self) -> &Arc<SymbolBasis> {
        &self.basis
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn stage(&self, k: usize) -> Result<&Stage> {
        self.stages.get(k).ok_or(Error::IndexOutOfRange {
            what: "stage",
            index: k,
            limit: self.stages.len(),
        })
    }

    /// `h_k` for `0 <= k <= num_stages()`.
    pub fn height(&self, k: usize) -> Result<&Frequency> {
        self.heights.get(k).ok_or(Error::IndexOutOfRange {
            what: "height",
            index: k,
            limit: self.heights.len(),
        })
    }

    /// `s_{n,min(p,q)} + ... + s_{n,max(p,q)-1}`.
    pub fn spacer_sum(&self, n: usize, p: usize, q: usize) -> Result<Frequency> {
        let st = self.stage(n)?;
        for idx in [p, q] {
            if idx >= st.p {
                return Err(Error::IndexOutOfRange {
                    what: "spacer",
                    index: idx,
                    limit: st.p,
                });
            }
        }
        let mut acc = Frequency::zero(&self.basis);
        for s in &st.spacers[p.min(q)..p.max(q)] {
            acc = acc.add_unchecked(s);
        }
        Ok(acc)
    }

    /// Frequencies `j h_k + s_{k,0} + ... + s_{k,j-1}`, `j < p_k`.
    pub fn stage_frequencies(&self, k: usize) -> Result<Vec<Frequency>> {
        let st = self.stage(k)?;
        let h = &self.heights[k];
        let mut out = Vec::with_capacity(st.p);
        let mut offset = Frequency::zero(&self.basis);
        let mut jh = Frequency::zero(&self.basis);
        for j in 0..st.p {
            if j > 0 {
                offset = offset.add_unchecked(&st.spacers[j - 1]);
                jh = jh.add_unchecked(h);
            }
            out.push(jh.add_unchecked(&offset));
        }
        let mut sorted = out.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::FrequencyCollision(format!(
                "stage {k}: exponent {} repeats",
                w[0]
            )));
        }
        Ok(out)
    }

    /// `P_k` with coefficients `1/sqrt(p_k)`.
    pub fn build_polynomial(&self, k: usize) -> Result<APPoly> {
        let freqs = self.stage_frequencies(k)?;
        let c = Complex64::new(1.0 / (freqs.len() as f64).sqrt(), 0.0);
        APPoly::from_terms(&self.basis, freqs.into_iter().map(|f| (f, c)))
    }

    /// `|P_k|^2` with exact rational coefficients.
    pub fn abs2_exact(&self, k: usize) -> Result<ExactPoly> {
        let freqs = self.stage_frequencies(k)?;
        let p = freqs.len();
        let unnormalized =
            ExactPoly::from_terms(&self.basis, freqs.into_iter().map(|f| (f, ExactComplex::one())))?;
        Ok(unnormalized
            .abs2()
            .scale(&ExactComplex::real(ratio(1, p))))
    }

    /// `Delta_k = |P_k|^2 - 1`, assembled term by term from spacer sums:
    /// `(1/p) sum_{a != b} e^{i((a-b) h_k + sign(a-b) s_{k,a,b}) t}`.
    pub fn delta_exact(&self, k: usize) -> Result<ExactPoly> {
        let st = self.stage(k)?;
        let h = &self.heights[k];
        let c = ExactComplex::real(ratio(1, st.p));
        let mut terms = Vec::with_capacity(st.p * (st.p - 1));
        for a in 0..st.p {
            for b in 0..st.p {
                if a == b {
                    continue;
                }
                let diff = a as i64 - b as i64;
                let spacer = self.spacer_sum(k, a, b)?;
                let signed = if diff > 0 { spacer } else { spacer.neg() };
                terms.push((h.scale_int(diff).add_unchecked(&signed), c.clone()));
            }
        }
        ExactPoly::from_terms(&self.basis, terms)
    }

    pub fn delta(&self, k: usize) -> Result<APPoly> {
        Ok(self.delta_exact(k)?.to_complex_poly())
    }

    /// Checks the singularity hypothesis in the symbol model: for each listed
    /// stage, `h_m, s_{m,1}, ..., s_{m,p_m-1}` are rationally independent.
    pub fn validate_independence_hypothesis(&self, stages: &[usize]) -> Result<()> {
        for &m in stages {
            let st = self.stage(m)?;
            let mut set = vec![self.heights[m].clone()];
            set.extend(st.spacers[1..st.p].iter().cloned());
            if !is_rationally_independent(&set)? {
                return Err(Error::Hypothesis(format!(
                    "stage {m}: h and spacers s_1..s_{} are rationally dependent",
                    st.p - 1
                )));
            }
        }
        Ok(())
    }
}

fn ratio(n: usize, d: usize) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Deterministic positive values for generated spacer symbols.
fn spacer_value(k: usize, j: usize) -> f64 {
    let golden = 0.618_033_988_749_894_9;
    let x = (k as f64 * 2f64.sqrt() + j as f64 * golden).fract();
    0.05 + 0.9 * x
}

pub fn heights(params: &RankOneParams, k: usize) -> Result<Frequency> {
    params.height(k).cloned()
}

pub fn spacer_sum(params: &RankOneParams, n: usize, p: usize, q: usize) -> Result<Frequency> {
    params.spacer_sum(n, p, q)
}

pub fn build_polynomial(params: &RankOneParams, k: usize) -> Result<APPoly> {
    params.build_polynomial(k)
}

pub fn delta(params: &RankOneParams, k: usize) -> Result<APPoly> {
    params.delta(k)
}

/// Value of a Fourier-coefficient query on a partial product.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaHat {
    pub value: Rational,
    /// False when `lambda` is outside `supp(Q_n)`: the value is the partial
    /// coefficient 0, not the limit coefficient.
    pub on_support: bool,
}

/// Snapshot of the partial product after the first `stages` stages.
#[derive(Debug, Clone)]
pub struct RieszState {
    stages: usize,
    r: APPoly,
    q: ExactPoly,
    sigma_hat: BTreeMap<Frequency, Rational>,
    cap: usize,
}

impl RieszState {
    /// Empty product `R = 1`.
    pub fn new(params: &RankOneParams) -> Self {
        Self::with_cap(params, DEFAULT_SUPPORT_CAP)
    }

    pub fn with_cap(params: &RankOneParams, cap: usize) -> Self {
        let basis = params.basis();
        let q = ExactPoly::one(basis);
        let sigma_hat = sigma_table(&q);
        RieszState {
            stages: 0,
            r: APPoly::one(basis),
            q,
            sigma_hat,
            cap,
        }
    }

    /// Number of stage polynomials in the product.
    pub fn stages(&self) -> usize {
        self.stages
    }

    /// `R = P_0 ... P_{n}`.
    pub fn r(&self) -> &APPoly {
        &self.r
    }

    /// `Q = |R|^2`, exact.
    pub fn q(&self) -> &ExactPoly {
        &self.q
    }

    pub fn sigma_table(&self) -> &BTreeMap<Frequency, Rational> {
        &self.sigma_hat
    }

    pub fn sigma_hat(&self, lambda: &Frequency) -> SigmaHat {
        match self.sigma_hat.get(lambda) {
            Some(v) => SigmaHat {
                value: v.clone(),
                on_support: true,
            },
            None => SigmaHat {
                value: Rational::zero(),
                on_support: false,
            },
        }
    }

    /// Multiplies in stage `k`, which must be the next stage.
    pub fn extend(&self, params: &RankOneParams, k: usize) -> Result<RieszState> {
        if k != self.stages {
            return Err(Error::InvalidParams(format!(
                "extend expects stage {}, got {k}",
                self.stages
            )));
        }
        let p = params.stage(k)?.p;
        let r_bound = self.r.len().saturating_mul(p);
        let q_bound = self.q.len().saturating_mul(p * (p - 1) + 1);
        let requested = r_bound.max(q_bound);
        if requested > self.cap {
            return Err(Error::SupportCap {
                requested,
                cap: self.cap,
            });
        }
        let r = self.r.mul(&params.build_polynomial(k)?)?;
        let q = self.q.mul(&params.abs2_exact(k)?)?;
        let sigma_hat = sigma_table(&q);
        Ok(RieszState {
            stages: k + 1,
            r,
            q,
            sigma_hat,
            cap: self.cap,
        })
    }

    /// Frequencies of `supp(Q)` where `next` has a smaller coefficient.
    pub fn monotonicity_violations(&self, next: &RieszState) -> Vec<(Frequency, Rational, Rational)> {
        self.sigma_hat
            .iter()
            .filter_map(|(f, old)| {
                let new = next.sigma_hat(f).value;
                (new < *old).then(|| (f.clone(), old.clone(), new))
            })
            .collect()
    }

    /// `(frequency text, value)` rows of the coefficient table.
    pub fn sigma_csv(&self) -> String {
        let mut out = String::from("frequency,sigma_hat\n");
        for (f, v) in &self.sigma_hat {
            out.push_str(&format!("\"{}\",{}\n", f, v.to_f64().unwrap_or(f64::NAN)));
        }
        out
    }
}

fn sigma_table(q: &ExactPoly) -> BTreeMap<Frequency, Rational> {
    q.terms()
        .map(|(f, c)| {
            debug_assert!(c.is_real());
            (f.clone(), c.re.clone())
        })
        .collect()
}

/// Builds `R_{n}` for `n + 1 = stages` stages.
pub fn riesz_state(params: &RankOneParams, stages: usize) -> Result<RieszState> {
    let mut state = RieszState::new(params);
    for k in 0..stages {
        state = state.extend(params, k)?;
    }
    Ok(state)
}

fn check_indices(params: &RankOneParams, indices: &[usize]) -> Result<()> {
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams(format!(
            "indices {indices:?} must be strictly increasing"
        )));
    }
    if let Some(&last) = indices.last() {
        params.stage(last)?;
    }
    Ok(())
}

/// Exact mean of `prod_j |P_{n_j}|^2`.
pub fn riesz_property_check(params: &RankOneParams, indices: &[usize]) -> Result<Rational> {
    check_indices(params, indices)?;
    let mut acc = ExactPoly::one(params.basis());
    for &k in indices {
        acc = acc.mul(&params.abs2_exact(k)?)?;
    }
    Ok(acc.mean().re)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeEntry {
    pub stage: usize,
    pub degree: f64,
    pub height: f64,
    pub next_height: f64,
    /// `d_m < h_{m+1}`.
    pub degree_below_next_height: bool,
    /// `h_m <= h_{m+1} / 2`.
    pub height_at_most_half: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub entries: Vec<DegreeEntry>,
    /// Degree of `prod_j P_{n_j}`.
    pub q_degree: f64,
    /// Whether `q_degree` came from the expanded product's support (it is the
    /// sum of stage degrees otherwise).
    pub q_from_support: bool,
    pub q_bound: f64,
    /// `q_k < h_{n_k + 1}`.
    pub q_below_bound: bool,
    /// `q_k = sum_j d_{n_j}` within tolerance.
    pub q_is_sum_of_degrees: bool,
    pub all_hold: bool,
}

/// Product expansions above this many terms fall back to summing degrees.
const DEGREE_PRODUCT_CAP: usize = 100_000;

fn le_tol(a: f64, b: f64) -> bool {
    a <= b + DEGREE_TOL * a.abs().max(b.abs()).max(1.0)
}

pub fn degree_report(params: &RankOneParams, indices: &[usize]) -> Result<DegreeReport> {
    check_indices(params, indices)?;
    let mut entries = Vec::with_capacity(indices.len());
    let mut polys = Vec::with_capacity(indices.len());
    for &m in indices {
        let pm = params.build_polynomial(m)?;
        let degree = pm.degree()?;
        let height = params.height(m)?.real_value();
        let next_height = params.height(m + 1)?.real_value();
        entries.push(DegreeEntry {
            stage: m,
            degree,
            height,
            next_height,
            degree_below_next_height: degree < next_height,
            height_at_most_half: le_tol(height, next_height / 2.0),
        });
        polys.push(pm);
    }
    let sum: f64 = entries.iter().map(|e| e.degree).sum();
    let product_terms = polys
        .iter()
        .try_fold(1usize, |acc, p| acc.checked_mul(p.len()))
        .filter(|&n| n <= DEGREE_PRODUCT_CAP);
    let (q_degree, q_from_support) = match (product_terms, polys.first()) {
        (Some(_), Some(first)) => {
            let mut prod = first.clone();
            for p in &polys[1..] {
                prod = prod.mul(p)?;
            }
            (prod.degree()?, true)
        }
        _ => (sum, false),
    };
    let q_bound = match indices.last() {
        Some(&last) => params.height(last + 1)?.real_value(),
        None => params.height(0)?.real_value(),
    };
    let q_below_bound = q_degree < q_bound;
    let q_is_sum_of_degrees = (q_degree - sum).abs() <= DEGREE_TOL * sum.abs().max(1.0);
    let all_hold = q_below_bound
        && q_is_sum_of_degrees
        && entries
            .iter()
            .all(|e| e.degree_below_next_height && e.height_at_most_half);
    Ok(DegreeReport {
        entries,
        q_degree,
        q_from_support,
        q_bound,
        q_below_bound,
        q_is_sum_of_degrees,
        all_hold,
    })
}

/// Serialized rank-one parameters: stages of `{p, spacers}` with spacers in
/// the canonical frequency text form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    pub p: usize,
    pub spacers: Vec<String>,
}

impl RankOneParams {
    pub fn from_config(basis: &Arc<SymbolBasis>, stages: &[StageConfig]) -> Result<Self> {
        let stages = stages
            .iter()
            .enumerate()
            .map(|(k, st)| {
                let spacers = st
                    .spacers
                    .iter()
                    .map(|s| {
                        Frequency::parse(basis, s)
                            .map_err(|e| Error::Config(format!("stages[{k}].spacers: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Stage { p: st.p, spacers })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(basis, stages)
    }

    pub fn to_config(&self) -> Vec<StageConfig> {
        self.stages
            .iter()
            .map(|st| StageConfig {
                p: st.p,
                spacers: st.spacers.iter().map(|s| s.to_string()).collect(),
            })
            .collect()
    }
}
