use serde::Serialize;

use apriesz_core::bohrint::IntegralEstimate;
use apriesz_core::criteria::{
    bourgain_scan, fejer_factorization_check, guenais_sum, kac_clt_diagnostics, kac_moment_identity,
    rational_to_f64,
};
use apriesz_core::flatness::{build_family, flatness_ratio, local_vs_global_flatness, ultraflat, LocalGlobal, Ultraflat};
use apriesz_core::riesz::{degree_report, riesz_property_check, RieszState};
use apriesz_core::{Error, Rational};

use crate::config::ExperimentConfig;
use crate::output::{OutputDir, PlotRow};
use crate::Failure;

type Run = Result<(), Failure>;

#[derive(Serialize)]
struct StageCheck {
    stage: usize,
    p: usize,
    height: String,
    /// Exact `mean(|P_k|^2)`.
    mean_abs2: String,
    q_support: usize,
    monotonicity_violations: usize,
}

#[derive(Serialize)]
struct RieszCheck {
    stages: Vec<StageCheck>,
    subsequence: Vec<usize>,
    subsequence_mean: Option<String>,
    all_hold: bool,
}

#[derive(Serialize)]
struct MeanRow {
    stage: usize,
    p: usize,
    mean_abs2: String,
    equals_one: bool,
}

pub fn riesz_check(cfg: &ExperimentConfig, out: &mut OutputDir) -> Run {
    let params = cfg.rank_one_params()?;
    let n = cfg.analysis.stages.unwrap_or(params.num_stages());
    if n > params.num_stages() {
        return Err(Error::InvalidParams(format!(
            "analysis.stages = {n} exceeds the {} configured stages",
            params.num_stages()
        ))
        .into());
    }
    let one = Rational::from_integer(1.into());
    let mut state = RieszState::with_cap(&params, cfg.analysis.support_cap);
    let mut stages = Vec::new();
    let mut rows = Vec::new();
    for k in 0..n {
        let mean = params.abs2_exact(k)?.mean().re;
        let next = state.extend(&params, k).map_err(|e| context(e, format!("stage {k}")))?;
        let violations = state.monotonicity_violations(&next).len();
        rows.push(MeanRow {
            stage: k,
            p: params.stage(k)?.p,
            mean_abs2: mean.to_string(),
            equals_one: mean == one,
        });
        stages.push(StageCheck {
            stage: k,
            p: params.stage(k)?.p,
            height: params.height(k)?.to_string(),
            mean_abs2: mean.to_string(),
            q_support: next.q().len(),
            monotonicity_violations: violations,
        });
        state = next;
    }
    let indices = cfg.analysis.indices.clone();
    let subsequence_mean = if indices.is_empty() {
        None
    } else {
        Some(riesz_property_check(&params, &indices)?)
    };
    let all_hold = rows.iter().all(|r| r.equals_one)
        && stages.iter().all(|s| s.monotonicity_violations == 0)
        && subsequence_mean.as_ref().is_none_or(|m| *m == one);
    let report = RieszCheck {
        stages,
        subsequence: indices,
        subsequence_mean: subsequence_mean.map(|m| m.to_string()),
        all_hold,
    };
    let plot: Vec<PlotRow> = report
        .stages
        .iter()
        .flat_map(|s| {
            let mean = rows[s.stage].equals_one as u8 as f64;
            [
                PlotRow::new(s.stage as f64, "mean_abs2_is_one", mean, 0.0),
                PlotRow::new(s.stage as f64, "q_support", s.q_support as f64, 0.0),
            ]
        })
        .collect();
    out.write_rows("riesz_check.csv", &rows)?;
    out.write_bytes("sigma_hat.csv", state.sigma_csv().as_bytes())?;
    out.write_json("riesz_check.json", &report)?;
    out.write_plot(&plot)?;
    if !report.all_hold {
        return Err(Error::Inconsistency("an exact Riesz-product identity failed".into()).into());
    }
    Ok(())
}

pub fn bourgain(cfg: &ExperimentConfig, out: &mut OutputDir) -> Run {
    let params = cfg.rank_one_params()?;
    let report = bourgain_scan(&params, cfg.strategy(), cfg.analysis.k_max, cfg.budget())?;
    let mut plot = Vec::new();
    for (k, est) in report.i_k.iter().enumerate() {
        plot.push(PlotRow::new(k as f64, "i_k", est.value, est.uncertainty()));
        plot.push(PlotRow::new(k as f64, "geometric_bound", report.geometric_bound[k], 0.0));
    }
    out.write_json("bourgain_scan.json", &report)?;
    out.write_plot(&plot)?;
    Ok(())
}

pub fn guenais(cfg: &ExperimentConfig, out: &mut OutputDir) -> Run {
    let params = cfg.rank_one_params()?;
    let k = cfg.analysis.stages.unwrap_or(params.num_stages());
    let report = guenais_sum(&params, k, cfg.budget())?;
    let mut plot = Vec::new();
    for (i, est) in report.mean_abs.iter().enumerate() {
        plot.push(PlotRow::new(i as f64, "mean_abs", est.value, est.uncertainty()));
        plot.push(PlotRow::new(i as f64, "increment", report.increments[i], report.increment_errors[i]));
        plot.push(PlotRow::new(i as f64, "partial_sum", report.partial_sums[i], 0.0));
    }
    out.write_json("guenais.json", &report)?;
    out.write_plot(&plot)?;
    Ok(())
}

pub fn fejer(cfg: &ExperimentConfig, out: &mut OutputDir) -> Run {
    let params = cfg.rank_one_params()?;
    let m = cfg
        .analysis
        .m
        .ok_or_else(|| Error::Config("analysis.m is required for fejer".into()))?;
    let check = fejer_factorization_check(&params, &cfg.analysis.indices, m, cfg.budget())?;
    let x = m as f64;
    let plot = vec![
        PlotRow::new(x, "joint", check.joint.value, check.joint.uncertainty()),
        PlotRow::new(x, "product", check.product, check.combined_error),
    ];
    out.write_json("fejer.json", &check)?;
    out.write_plot(&plot)?;
    if check.symbolic_holds == Some(false) {
        return Err(Error::Inconsistency("exact factorization of the fourth moment failed".into()).into());
    }
    Ok(())
}

pub fn kac_clt(cfg: &ExperimentConfig, out: &mut OutputDir) -> Run {
    let a = &cfg.analysis;
    let report = kac_clt_diagnostics(a.q, a.samples, cfg.seed())?;
    let x = a.q as f64;
    let plot = vec![
        PlotRow::new(x, "ks_distance_re", report.ks_distance_re, 0.0),
        PlotRow::new(x, "ks_distance_im", report.ks_distance_im, 0.0),
        PlotRow::new(x, "mean_abs", report.mean_abs.value, report.mean_abs.uncertainty()),
        PlotRow::new(x, "mean_abs2", report.mean_abs2.value, report.mean_abs2.uncertainty()),
    ];
    out.write_json("kac_clt.json", &report)?;
    out.write_plot(&plot)?;
    Ok(())
}

#[derive(Serialize)]
struct MomentReport {
    l: Vec<u32>,
    formula: String,
    symbolic: String,
    value: f64,
}

pub fn kac_moments(cfg: &ExperimentConfig, out: &mut OutputDir) -> Run {
    let l = cfg.analysis.l.clone();
    if l.is_empty() || l.len() > 8 {
        return Err(Error::InvalidParams(format!("analysis.l must have 1 to 8 entries, got {}", l.len())).into());
    }
    let m = kac_moment_identity(&l)?;
    let report = MomentReport {
        value: rational_to_f64(&m.formula),
        formula: m.formula.to_string(),
        symbolic: m.symbolic.to_string(),
        l,
    };
    let total: u32 = report.l.iter().sum();
    out.write_json("kac_moments.json", &report)?;
    out.write_plot(&[PlotRow::new(total, "moment", report.value, 0.0)])?;
    Ok(())
}

#[derive(Serialize)]
struct FlatnessRow {
    n: usize,
    ratio: f64,
    error: f64,
    local: Option<f64>,
    global: Option<f64>,
}

#[derive(Serialize)]
struct FlatnessReport {
    terms: usize,
    l2_norm: f64,
    ratio: IntegralEstimate,
    ultraflat: Ultraflat,
}

pub fn flatness(cfg: &ExperimentConfig, out: &mut OutputDir) -> Run {
    let spec = cfg
        .family
        .as_ref()
        .ok_or_else(|| Error::Config("missing [family] section".into()))?;
    let params = match cfg.rank_one {
        Some(_) => Some(cfg.rank_one_params()?),
        None => None,
    };
    let poly = build_family(spec, &cfg.basis()?, params.as_ref())?;
    let ratio = flatness_ratio(&poly, cfg.budget())?;
    let report = FlatnessReport {
        terms: poly.len(),
        l2_norm: poly.l2_norm(),
        ultraflat: ultraflat(&poly)?,
        ratio,
    };
    let row = FlatnessRow {
        n: report.terms,
        ratio: report.ratio.value,
        error: report.ratio.uncertainty(),
        local: None,
        global: None,
    };
    let x = report.terms as f64;
    let plot = vec![
        PlotRow::new(x, "ratio", row.ratio, row.error),
        PlotRow::new(x, "ultraflat", report.ultraflat.value, report.ultraflat.refinement_delta),
    ];
    out.write_rows("flatness.csv", &[row])?;
    out.write_json("flatness.json", &report)?;
    out.write_plot(&plot)?;
    Ok(())
}

#[derive(Serialize)]
struct PrikhodkoEntry {
    p: u64,
    m: u64,
    epsilon: String,
    result: LocalGlobal,
}

pub fn prikhodko(cfg: &ExperimentConfig, out: &mut OutputDir) -> Run {
    let a = &cfg.analysis;
    if a.m_divisor == 0 || a.eps_numerator == 0 {
        return Err(Error::InvalidParams("analysis.m_divisor and analysis.eps_numerator must be positive".into()).into());
    }
    let budget = cfg.budget();
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    for (i, &p) in a.sizes.iter().enumerate() {
        let m = p / a.m_divisor;
        if m == 0 {
            return Err(Error::InvalidParams(format!(
                "analysis.sizes[{i}] = {p} is below analysis.m_divisor = {}",
                a.m_divisor
            ))
            .into());
        }
        let epsilon = format!("{}/{p}", a.eps_numerator);
        let result = local_vs_global_flatness(m, p, &epsilon, a.a, a.b, budget.derive(i as u64))
            .map_err(|e| context(e, format!("analysis.sizes[{i}] = {p}")))?;
        let g = &result.global_mean_abs;
        rows.push(FlatnessRow {
            n: p as usize,
            ratio: g.value,
            error: g.uncertainty(),
            local: Some(result.local.value),
            global: Some(g.value),
        });
        plot.push(PlotRow::new(p as f64, "local", result.local.value, result.local.refinement_delta));
        plot.push(PlotRow::new(p as f64, "global", g.value, g.uncertainty()));
        entries.push(PrikhodkoEntry { p, m, epsilon, result });
    }
    out.write_rows("prikhodko.csv", &rows)?;
    out.write_json("prikhodko.json", &entries)?;
    out.write_plot(&plot)?;
    Ok(())
}

pub fn degrees(cfg: &ExperimentConfig, out: &mut OutputDir) -> Run {
    let params = cfg.rank_one_params()?;
    let indices = if cfg.analysis.indices.is_empty() {
        (0..params.num_stages()).collect()
    } else {
        cfg.analysis.indices.clone()
    };
    let report = degree_report(&params, &indices)?;
    let mut plot = Vec::new();
    for e in &report.entries {
        let x = e.stage as f64;
        plot.push(PlotRow::new(x, "degree", e.degree, 0.0));
        plot.push(PlotRow::new(x, "next_height", e.next_height, 0.0));
    }
    out.write_json("degree_report.json", &report)?;
    out.write_plot(&plot)?;
    Ok(())
}

fn context(e: Error, what: String) -> Failure {
    Failure::Core(e, Some(what))
}
