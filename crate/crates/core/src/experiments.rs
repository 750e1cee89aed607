//! Desk-scale experiment drivers: trace asymptotics sweeps, cross-term growth,
//! quasi-commutator bound sweeps and the functional-calculus accuracy suite.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asym_coeffs::{predicted_w1, predicted_w1_jump};
use crate::ensembles::{self, instance_seed};
use crate::error::{Error, Result};
use crate::func_classes::{monomial, registry, SingularFunction};
use crate::hs_calculus::{hs_apply, spectral_apply, Method, QuadratureSpec, Scheme};
use crate::operator::DenseOperator;
use crate::qa_extension::build_extension;
use crate::schatten::{
    bks_check, bound_ratio_thm24, lipschitz_ratio, projection_bound_thm28, rank_truncated, schatten_from_values,
    unbounded_support_bound, BoundSetup,
};
use crate::wiener_hopf::{
    spectrum, symbol_registry, trace_d_power, CrossVariant, DomainSpec, IndicatorRule, SpectrumData,
    Symbol2, WHModel,
};

// ---------------------------------------------------------------------------
// Geometry

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub lambda: DomainSpec,
    pub omega: DomainSpec,
    /// Side of the periodic box; defaults to twice the diameter of `Λ`.
    pub box_side: Option<f64>,
    /// Points per axis are `grid_factor · α · L / 4`, rounded to even.
    pub grid_factor: f64,
    pub max_points: usize,
    pub omega_rule: IndicatorRule,
    /// Boundary mesh size for the predicted surface coefficient.
    pub mesh: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            lambda: DomainSpec::unit_disk(),
            omega: DomainSpec::unit_disk(),
            box_side: None,
            grid_factor: 6.0,
            max_points: 96,
            omega_rule: IndicatorRule::Sampled,
            mesh: 2048,
        }
    }
}

impl GeometryConfig {
    pub fn box_side(&self) -> f64 {
        self.box_side.unwrap_or(2.0 * self.lambda.diameter())
    }

    pub fn points(&self, alpha: f64) -> usize {
        let n = (self.grid_factor * alpha * self.box_side() / 8.0).round() as usize * 2;
        n.clamp(8, self.max_points.max(8))
    }

    pub fn model(&self, alpha: f64) -> Result<WHModel> {
        Ok(WHModel::new(
            self.lambda.clone(),
            self.omega.clone(),
            alpha,
            self.points(alpha),
            self.box_side(),
        )?
        .with_omega_rule(self.omega_rule))
    }

    pub fn dim(&self) -> usize {
        self.lambda.dim
    }
}

fn default_alphas() -> Vec<f64> {
    vec![4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0]
}

// ---------------------------------------------------------------------------
// Two-term fit

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub alpha_values: Vec<f64>,
    pub traces: Vec<f64>,
    /// Floating-point uncertainty of each trace.
    pub uncertainties: Vec<f64>,
    pub fitted_c1: f64,
    pub fitted_c2: f64,
    pub predicted_w1: f64,
    pub relative_gap: f64,
    pub fit_residual: f64,
}

impl SweepResult {
    /// `tr D_α / α^{d-1}` per α.
    pub fn normalized(&self, dim: usize) -> Vec<f64> {
        self.alpha_values
            .iter()
            .zip(&self.traces)
            .map(|(a, t)| t / a.powi(dim as i32 - 1))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TwoTermFit {
    pub c1: f64,
    pub c2: f64,
    /// RMS misfit of `tr/α^{d-1}` combined with the trace uncertainties in the same units.
    pub residual: f64,
}

/// Least-squares fit of `tr/α^{d-1} ≈ c₁ log α + c₂`.
pub fn fit_two_term(alphas: &[f64], traces: &[f64], uncertainties: &[f64], dim: usize) -> Result<TwoTermFit> {
    if alphas.len() != traces.len() || alphas.len() != uncertainties.len() {
        return Err(Error::Shape {
            expected: format!("{} traces and uncertainties", alphas.len()),
            got: format!("{} and {}", traces.len(), uncertainties.len()),
        });
    }
    let lo = alphas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = alphas.iter().cloned().fold(0.0, f64::max);
    if alphas.len() < 3 || hi < 2.0 * lo {
        return Err(Error::InvalidParameter(
            "fit needs at least 3 alpha values spanning a factor of at least 2".into(),
        ));
    }
    let k = dim as i32 - 1;
    let xs: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let ys: Vec<f64> = alphas.iter().zip(traces).map(|(a, t)| t / a.powi(k)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let c1 = sxy / sxx;
    let c2 = my - c1 * mx;
    let mis: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - c1 * x - c2).powi(2)).sum::<f64>() / n;
    let unc: f64 = alphas
        .iter()
        .zip(uncertainties)
        .map(|(a, u)| (u / a.powi(k)).powi(2))
        .sum::<f64>()
        / n;
    Ok(TwoTermFit {
        c1,
        c2,
        residual: (mis + unc).sqrt(),
    })
}

fn finish_sweep(alphas: Vec<f64>, traces: Vec<f64>, unc: Vec<f64>, predicted: f64, dim: usize) -> Result<SweepResult> {
    let fit = fit_two_term(&alphas, &traces, &unc, dim)?;
    let relative_gap = if predicted != 0.0 {
        (fit.c1 - predicted).abs() / predicted.abs()
    } else {
        fit.c1.abs()
    };
    Ok(SweepResult {
        alpha_values: alphas,
        traces,
        uncertainties: unc,
        fitted_c1: fit.c1,
        fitted_c2: fit.c2,
        predicted_w1: predicted,
        relative_gap,
        fit_residual: fit.residual,
    })
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("alpha values must be strictly ascending".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Szegő sweep

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SzegoConfig {
    pub alphas: Vec<f64>,
    pub g: String,
    pub symbol: String,
    pub geometry: GeometryConfig,
}

impl Default for SzegoConfig {
    fn default() -> Self {
        SzegoConfig {
            alphas: default_alphas(),
            g: "eta:1".into(),
            symbol: "one".into(),
            geometry: GeometryConfig::default(),
        }
    }
}

/// Spectra of `S_α` (or `H_α`) over the α list, computed in parallel.
pub fn sweep_spectra(geometry: &GeometryConfig, alphas: &[f64], a: &Symbol2, a1: Option<&Symbol2>) -> Result<Vec<SpectrumData>> {
    check_alphas(alphas)?;
    alphas
        .par_iter()
        .map(|&alpha| spectrum(&geometry.model(alpha)?, a, a1))
        .collect()
}

/// Fits traces of `g` from precomputed spectra against a prediction.
pub fn sweep_from_spectra(spectra: &[SpectrumData], g: &SingularFunction, predicted: f64, dim: usize) -> Result<SweepResult> {
    let mut alphas = Vec::new();
    let mut traces = Vec::new();
    let mut unc = Vec::new();
    for s in spectra {
        let t = s.trace_d(g)?;
        alphas.push(s.alpha);
        traces.push(t.value);
        unc.push(t.uncertainty);
    }
    finish_sweep(alphas, traces, unc, predicted, dim)
}

pub fn szego_sweep(cfg: &SzegoConfig) -> Result<SweepResult> {
    let g = registry(&cfg.g, 3)?;
    let a = symbol_registry(&cfg.symbol)?;
    let geo = &cfg.geometry;
    let predicted = predicted_w1(&g, &a, &geo.lambda, &geo.omega, geo.mesh)?.value.re;
    let spectra = sweep_spectra(geo, &cfg.alphas, &a, None)?;
    sweep_from_spectra(&spectra, &g, predicted, geo.dim())
}

// ---------------------------------------------------------------------------
// Jump sweep

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpPath {
    /// Self-adjoint `H_α` with the spectral calculus.
    H,
    /// Non-self-adjoint `V_α` with `g_p(V) = V^p`.
    V,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JumpConfig {
    pub alphas: Vec<f64>,
    pub g: String,
    pub symbol: String,
    pub symbol1: String,
    pub path: JumpPath,
    /// Power for the `V` path.
    pub power: u32,
    pub geometry: GeometryConfig,
}

impl Default for JumpConfig {
    fn default() -> Self {
        JumpConfig {
            alphas: default_alphas(),
            g: "poly:2".into(),
            symbol: "one".into(),
            symbol1: "half".into(),
            path: JumpPath::H,
            power: 2,
            geometry: GeometryConfig::default(),
        }
    }
}

pub fn jump_sweep(cfg: &JumpConfig) -> Result<SweepResult> {
    let a = symbol_registry(&cfg.symbol)?;
    let a1 = symbol_registry(&cfg.symbol1)?;
    let geo = &cfg.geometry;
    match cfg.path {
        JumpPath::H => {
            let g = registry(&cfg.g, 3)?;
            let predicted = predicted_w1_jump(&g, &a, &a1, &geo.lambda, &geo.omega, geo.mesh)?.value.re;
            let spectra = sweep_spectra(geo, &cfg.alphas, &a, Some(&a1))?;
            sweep_from_spectra(&spectra, &g, predicted, geo.dim())
        }
        JumpPath::V => {
            if cfg.power == 0 || cfg.power > 6 {
                return Err(Error::InvalidParameter("the V path supports powers 1..=6".into()));
            }
            check_alphas(&cfg.alphas)?;
            let g = monomial(cfg.power);
            let predicted = predicted_w1_jump(&g, &a, &a1, &geo.lambda, &geo.omega, geo.mesh)?.value.re;
            let rows: Vec<(f64, f64)> = cfg
                .alphas
                .par_iter()
                .map(|&alpha| {
                    let (v, u) = trace_d_power(&geo.model(alpha)?, &a, &a1, cfg.power)?;
                    Ok((v.re, u + v.im.abs()))
                })
                .collect::<Result<_>>()?;
            let (traces, unc) = rows.into_iter().unzip();
            finish_sweep(cfg.alphas.clone(), traces, unc, predicted, geo.dim())
        }
    }
}

// ---------------------------------------------------------------------------
// Cross-term growth

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossConfig {
    pub alphas: Vec<f64>,
    pub variant: CrossVariant,
    pub q: f64,
    pub symbol: String,
    pub geometry: GeometryConfig,
}

impl Default for CrossConfig {
    fn default() -> Self {
        CrossConfig {
            alphas: default_alphas(),
            variant: CrossVariant::Lemma47,
            q: 0.5,
            symbol: "one".into(),
            geometry: GeometryConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossRow {
    pub alpha: f64,
    pub points: usize,
    /// `‖·‖_q^q = Σ s_k^q`.
    pub quasi_norm_q: f64,
    pub normalized: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossGrowthTable {
    pub variant: CrossVariant,
    pub q: f64,
    pub rows: Vec<CrossRow>,
    /// `max/min` of the normalized column (1 when all are zero).
    pub band: f64,
}

/// `α^{d-1} log α` for the first cross term, `α^{d-1}` for the others.
pub fn cross_normalizer(variant: CrossVariant, alpha: f64, dim: usize) -> f64 {
    let base = alpha.powi(dim as i32 - 1);
    match variant {
        CrossVariant::Lemma47 => base * alpha.ln(),
        _ => base,
    }
}

pub fn cross_growth_sweep(cfg: &CrossConfig) -> Result<CrossGrowthTable> {
    if !(cfg.q > 0.0 && cfg.q <= 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0, 1], got {}", cfg.q)));
    }
    check_alphas(&cfg.alphas)?;
    let a = symbol_registry(&cfg.symbol)?;
    let geo = &cfg.geometry;
    let rows: Vec<CrossRow> = cfg
        .alphas
        .iter()
        .map(|&alpha| {
            let model = geo.model(alpha)?;
            let block = model.cross_block(&a, cfg.variant)?;
            let (r, c) = block.shape();
            let sv = rank_truncated(block.singular_values()?, r.max(c));
            let qq = if sv.is_empty() {
                0.0
            } else {
                schatten_from_values(&sv, cfg.q)?.value.powf(cfg.q)
            };
            Ok(CrossRow {
                alpha,
                points: model.grid.n,
                quasi_norm_q: qq,
                normalized: qq / cross_normalizer(cfg.variant, alpha, geo.dim()),
            })
        })
        .collect::<Result<_>>()?;
    let hi = rows.iter().map(|r| r.normalized).fold(0.0, f64::max);
    let lo = rows.iter().map(|r| r.normalized).fold(f64::INFINITY, f64::min);
    let band = if hi == 0.0 { 1.0 } else { hi / lo };
    Ok(CrossGrowthTable {
        variant: cfg.variant,
        q: cfg.q,
        rows,
        band,
    })
}

// ---------------------------------------------------------------------------
// Functional-calculus accuracy suite

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MatrixFamily {
    /// `scale ·` GUE, spectrum near `[-2 scale, 2 scale]`.
    Gue { scale: f64 },
    /// Haar-rotated uniform spectrum on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

impl MatrixFamily {
    pub fn sample(&self, m: usize, seed: u64) -> Result<DenseOperator> {
        let mut rng = ensembles::rng(seed);
        match *self {
            MatrixFamily::Gue { scale } => Ok(ensembles::gue(m, &mut rng).scale(scale)),
            MatrixFamily::Uniform { lo, hi } => ensembles::hermitian_uniform_spectrum(m, lo, hi, &mut rng),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsCaseConfig {
    pub function: String,
    /// Smoothness order of the extension.
    pub order: usize,
    pub tolerance: f64,
    /// Pass threshold on the operator-norm deviation.
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HsSuiteConfig {
    pub matrices: usize,
    pub dim: usize,
    pub seed: u64,
    pub family: MatrixFamily,
    pub scheme: Scheme,
    pub cases: Vec<HsCaseConfig>,
}

impl Default for HsSuiteConfig {
    fn default() -> Self {
        let smooth = ["bump", "bump_cos:3", "bump_exp", "bump_gauss", "bump_poly:2"];
        let mut cases: Vec<HsCaseConfig> = smooth
            .iter()
            .map(|f| HsCaseConfig {
                function: f.to_string(),
                order: 3,
                tolerance: 1e-7,
                threshold: 1e-6,
            })
            .collect();
        cases.push(HsCaseConfig {
            function: "abs_pow:0.5".into(),
            order: 2,
            tolerance: 1e-4,
            threshold: 1e-3,
        });
        HsSuiteConfig {
            matrices: 20,
            dim: 64,
            seed: 0,
            family: MatrixFamily::Gue { scale: 0.6 },
            scheme: Scheme::Eigen,
            cases,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HsCase {
    pub function: String,
    pub matrix: usize,
    pub deviation: f64,
    pub error_estimate: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip)]
    pub seconds: f64,
    /// Set when the quadrature itself failed.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HsSuiteReport {
    pub cases: Vec<HsCase>,
    pub all_pass: bool,
    pub max_deviation: f64,
    #[serde(skip)]
    pub seconds: f64,
}

pub fn hs_vs_spectral_suite(cfg: &HsSuiteConfig) -> Result<HsSuiteReport> {
    let start = Instant::now();
    let mats: Vec<DenseOperator> = (0..cfg.matrices)
        .map(|i| cfg.family.sample(cfg.dim, instance_seed(cfg.seed, i as u64)))
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for case in &cfg.cases {
        let f = registry(&case.function, case.order)?;
        let ext = build_extension(&f)?;
        for i in 0..mats.len() {
            jobs.push((case, f.clone(), ext.clone(), i));
        }
    }
    let cases: Vec<HsCase> = jobs
        .par_iter()
        .map(|(case, f, ext, i)| {
            let t0 = Instant::now();
            let a = &mats[*i];
            let spec = QuadratureSpec {
                target_tolerance: case.tolerance,
                scheme: cfg.scheme,
                ..Default::default()
            };
            let outcome = hs_apply(ext, a, &spec).and_then(|r| {
                let exact = spectral_apply(f, a)?;
                Ok((r.operator.sub(&exact)?.norm_op()?, r.error_estimate))
            });
            let (deviation, error_estimate, failure) = match outcome {
                Ok((d, e)) => (d, e, None),
                Err(e) => (f64::INFINITY, f64::INFINITY, Some(e.to_string())),
            };
            HsCase {
                function: case.function.clone(),
                matrix: *i,
                deviation,
                error_estimate,
                threshold: case.threshold,
                pass: deviation <= case.threshold,
                seconds: t0.elapsed().as_secs_f64(),
                failure,
            }
        })
        .collect();
    let all_pass = cases.iter().all(|c| c.pass);
    let max_deviation = cases.iter().map(|c| c.deviation).fold(0.0, f64::max);
    Ok(HsSuiteReport {
        cases,
        all_pass,
        max_deviation,
        seconds: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// Bound sweeps

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundTheorem {
    /// Quasi-commutator bound, `(A, B, J)` triples.
    #[serde(rename = "2.4")]
    Thm24,
    /// Projection case `J = P`.
    #[serde(rename = "2.8")]
    Thm28,
    /// Smooth functions with unbounded support.
    Gest,
    /// `‖|A-B|^γ‖_p - ‖A^γ - B^γ‖_p` for PSD pairs.
    Bks,
    /// `‖f(A) - f(B)‖_p / ‖A - B‖_p` for smooth compactly supported `f`.
    Ps,
}

impl std::str::FromStr for BoundTheorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2.4" | "thm24" => Ok(BoundTheorem::Thm24),
            "2.8" | "thm28" => Ok(BoundTheorem::Thm28),
            "gest" => Ok(BoundTheorem::Gest),
            "bks" => Ok(BoundTheorem::Bks),
            "ps" => Ok(BoundTheorem::Ps),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConfig {
    pub theorem: BoundTheorem,
    /// Instances per dimension.
    pub trials: usize,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub function: String,
    pub order: usize,
    pub sigma: f64,
    pub p: f64,
    /// Exponents for the PSD power inequality.
    pub gammas: Vec<f64>,
    /// Decay exponent for the unbounded-support case.
    pub beta: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            theorem: BoundTheorem::Thm24,
            trials: 20,
            seed: 0,
            dims: vec![8, 16, 24],
            function: "abs_pow:0.5".into(),
            order: 3,
            sigma: 0.4,
            p: 1.0,
            gammas: vec![0.25, 0.5, 0.75],
            beta: 2.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub instance: usize,
    pub dim: usize,
    pub params: String,
    /// Ratio for the bounds, slack for the PSD inequality.
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundSummary {
    pub max: f64,
    pub mean: f64,
    pub max_per_dim: Vec<(usize, f64)>,
    /// Largest ratio of consecutive per-dimension maxima.
    pub dimension_scaling: f64,
    /// Instances with slack below `-1e-10` (PSD inequality) or an infinite ratio.
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub theorem: BoundTheorem,
    pub rows: Vec<BoundRow>,
    pub summary: BoundSummary,
}

/// Random `(A, B, J)`: `A` a scaled GUE matrix, `B = A + δW`, `J` a random contraction.
pub fn random_triple(m: usize, seed: u64) -> (DenseOperator, DenseOperator, DenseOperator) {
    use rand::Rng;
    let mut rng = ensembles::rng(seed);
    let a = ensembles::gue(m, &mut rng).scale(0.4);
    let delta: f64 = rng.random_range(0.01..0.3);
    let b = a.add(&ensembles::gue(m, &mut rng).scale(delta)).unwrap().hermitian_part();
    let j0 = ensembles::general(m, m, &mut rng);
    let nrm = j0.norm_op().unwrap_or(1.0);
    (a, b, j0.scale(1.0 / nrm))
}

fn bound_instance(cfg: &BoundConfig, setup: Option<&BoundSetup>, m: usize, seed: u64) -> Result<Vec<(String, f64)>> {
    use rand::Rng;
    let method = Method::Spectral;
    match cfg.theorem {
        BoundTheorem::Thm24 => {
            let (a, b, j) = random_triple(m, seed);
            let r = bound_ratio_thm24(setup.unwrap(), &a, &b, &j, &method)?;
            Ok(vec![(format!("sigma={},p={}", cfg.sigma, cfg.p), r.ratio)])
        }
        BoundTheorem::Thm28 => {
            let mut rng = ensembles::rng(seed);
            let a = ensembles::gue(m, &mut rng).scale(0.4);
            let rank = rng.random_range(1..m);
            let p = ensembles::random_projection(m, rank, &mut rng)?;
            let r = projection_bound_thm28(setup.unwrap(), &a, &p, &method)?;
            Ok(vec![(format!("rank={rank}"), r.ratio)])
        }
        BoundTheorem::Gest => {
            let g = registry(&cfg.function, cfg.order)?;
            let (a, b, j) = random_triple(m, seed);
            let (a, b) = (a.scale(5.0), b.scale(5.0));
            let r = unbounded_support_bound(&g, cfg.beta, &a, &b, &j, cfg.sigma, cfg.p, &method)?;
            Ok(vec![(format!("beta={},pieces={}", cfg.beta, r.pieces), r.ratio)])
        }
        BoundTheorem::Bks => {
            let mut rng = ensembles::rng(seed);
            let k1 = rng.random_range(1..=m);
            let k2 = rng.random_range(1..=m);
            let a = ensembles::wishart(m, k1, &mut rng);
            let b = ensembles::wishart(m, k2, &mut rng);
            let mut out = Vec::new();
            for &gamma in &cfg.gammas {
                for p in [0.5, 1.0, 2.0] {
                    out.push((format!("gamma={gamma},p={p}"), bks_check(&a, &b, gamma, p)?));
                }
            }
            Ok(out)
        }
        BoundTheorem::Ps => {
            let f = registry(&cfg.function, cfg.order)?;
            let (a, b, _) = random_triple(m, seed);
            Ok(vec![(format!("p={}", cfg.p), lipschitz_ratio(&f, &a, &b, cfg.p, &method)?)])
        }
    }
}

pub fn bound_sweep(cfg: &BoundConfig) -> Result<BoundReport> {
    let setup = match cfg.theorem {
        BoundTheorem::Thm24 | BoundTheorem::Thm28 => Some(BoundSetup::new(&registry(&cfg.function, cfg.order)?, cfg.sigma, cfg.p)?),
        BoundTheorem::Ps if !(cfg.p > 1.0) => {
            return Err(Error::Constraint(format!("the Lipschitz regime needs p > 1, got {}", cfg.p)))
        }
        BoundTheorem::Gest if cfg.p.min(1.0) * cfg.beta <= 1.0 => {
            return Err(Error::Constraint(format!("need q*beta > 1, got p = {}, beta = {}", cfg.p, cfg.beta)))
        }
        _ => None,
    };
    let mut jobs = Vec::new();
    for (di, &m) in cfg.dims.iter().enumerate() {
        for t in 0..cfg.trials {
            jobs.push((m, (di * cfg.trials + t) as u64));
        }
    }
    let results: Vec<Vec<(String, f64)>> = jobs
        .par_iter()
        .map(|&(m, idx)| bound_instance(cfg, setup.as_ref(), m, instance_seed(cfg.seed, idx)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for ((m, idx), res) in jobs.iter().zip(results) {
        for (params, value) in res {
            rows.push(BoundRow {
                instance: *idx as usize,
                dim: *m,
                params,
                value,
            });
        }
    }
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    let max_per_dim: Vec<(usize, f64)> = cfg
        .dims
        .iter()
        .map(|&m| {
            let v = rows.iter().filter(|r| r.dim == m).map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
            (m, v)
        })
        .collect();
    let dimension_scaling = max_per_dim
        .windows(2)
        .map(|w| if w[0].1 > 0.0 { w[1].1 / w[0].1 } else { 1.0 })
        .fold(1.0, f64::max);
    let violations = rows
        .iter()
        .filter(|r| {
            if cfg.theorem == BoundTheorem::Bks {
                r.value < -1e-10
            } else {
                !r.value.is_finite()
            }
        })
        .count();
    Ok(BoundReport {
        theorem: cfg.theorem,
        rows,
        summary: BoundSummary {
            max,
            mean,
            max_per_dim,
            dimension_scaling,
            violations,
        },
    })
}

/// `𝔄(g; s)` samples for a report.
pub fn ga_samples(g: &SingularFunction, points: &[f64]) -> Result<Vec<(f64, f64)>> {
    points
        .iter()
        .map(|&s| Ok((s, crate::asym_coeffs::ga(g, Complex64::new(s, 0.0))?.value.re)))
        .collect()
}
