//! Damped least-squares fit of the interference intensity.
//!
//! The model is the three-term renormalized intensity
//!
//! `I(t) = s/|1+ε|² · (e^{−Γ_S t} + |ε|²e^{−Γ_L t} + 2|ε|e^{−Γ̄t}cos(Δm·t − arg ε))`,
//!
//! which is also proportional to the CP = +1 decay density, so it fits
//! binned Monte Carlo events directly. Widths and the scale are fitted in
//! log coordinates, `|ε|` is clamped at zero and `arg ε` is wrapped.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::model::wrap_phase;
use crate::montecarlo::Histogram;
use crate::temporal::{InterferenceCoefficient, InterferenceShape, IntensitySeries};
use crate::{Complex64, Error, Result};

const MAX_REWEIGHTING_ROUNDS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FitParam {
    DeltaM,
    EpsMod,
    EpsArg,
    GammaS,
    GammaL,
    Scale,
}

impl FitParam {
    pub const ALL: [FitParam; 6] = [
        FitParam::DeltaM,
        FitParam::EpsMod,
        FitParam::EpsArg,
        FitParam::GammaS,
        FitParam::GammaL,
        FitParam::Scale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitParam::DeltaM => "delta_m",
            FitParam::EpsMod => "eps_mod",
            FitParam::EpsArg => "eps_arg",
            FitParam::GammaS => "gamma_S",
            FitParam::GammaL => "gamma_L",
            FitParam::Scale => "scale",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        FitParam::ALL.into_iter().find(|p| p.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }

    fn is_log(self) -> bool {
        matches!(self, FitParam::GammaS | FitParam::GammaL | FitParam::Scale)
    }
}

/// A full parameter point of the intensity model. `eps_arg` is in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitValues {
    pub delta_m: f64,
    pub eps_mod: f64,
    pub eps_arg: f64,
    pub gamma_s: f64,
    pub gamma_l: f64,
    pub scale: f64,
}

impl FitValues {
    pub fn get(&self, p: FitParam) -> f64 {
        self.to_array()[p.index()]
    }

    pub fn set(&mut self, p: FitParam, v: f64) {
        let mut a = self.to_array();
        a[p.index()] = v;
        *self = Self::from_array(a);
    }

    fn to_array(self) -> [f64; 6] {
        [
            self.delta_m,
            self.eps_mod,
            self.eps_arg,
            self.gamma_s,
            self.gamma_l,
            self.scale,
        ]
    }

    fn from_array(a: [f64; 6]) -> Self {
        Self {
            delta_m: a[0],
            eps_mod: a[1],
            eps_arg: a[2],
            gamma_s: a[3],
            gamma_l: a[4],
            scale: a[5],
        }
    }

    pub fn shape(&self) -> InterferenceShape {
        InterferenceShape {
            gamma_s: self.gamma_s,
            gamma_l: self.gamma_l,
            delta_m: self.delta_m,
            epsilon: Complex64::from_polar(self.eps_mod, self.eps_arg),
            scale: self.scale,
            coefficient: InterferenceCoefficient::Exact,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.shape().eval(t)
    }

    fn validate(&self) -> Result<()> {
        if self.to_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::Fit("initial guess must be finite".into()));
        }
        if self.eps_mod < 0.0 {
            return Err(Error::Fit("eps_mod must be non-negative".into()));
        }
        if !(self.gamma_s > 0.0 && self.gamma_l > 0.0 && self.scale > 0.0) {
            return Err(Error::Fit("widths and scale must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub free_params: Vec<FitParam>,
    pub initial_guess: FitValues,
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the cost by less than this fraction.
    pub convergence_tol: f64,
    /// Additional starting values of `Δm`; the best of all starts is kept.
    pub delta_m_starts: Vec<f64>,
}

impl FitConfig {
    /// Frees `{Δm, |ε|, arg ε, scale}` and holds the widths at the guess.
    pub fn new(initial_guess: FitValues) -> Self {
        Self {
            free_params: vec![
                FitParam::DeltaM,
                FitParam::EpsMod,
                FitParam::EpsArg,
                FitParam::Scale,
            ],
            initial_guess,
            max_iterations: 200,
            convergence_tol: 1e-10,
            delta_m_starts: Vec::new(),
        }
    }

    pub fn with_free(mut self, free: &[FitParam]) -> Self {
        self.free_params = free.to_vec();
        self
    }

    pub fn with_delta_m_starts(mut self, starts: Vec<f64>) -> Self {
        self.delta_m_starts = starts;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub params: FitValues,
    pub free_params: Vec<FitParam>,
    /// Weighted sum of squared residuals at `params`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Covariance of the free parameters in natural units, in the order of
    /// `free_params`.
    pub covariance: DMatrix<f64>,
    /// The normal matrix at the solution is numerically singular.
    pub rank_deficient: bool,
    /// Cost after every accepted step, starting with the initial cost.
    pub cost_history: Vec<f64>,
    pub points: usize,
}

impl FitResult {
    pub fn stderr(&self, p: FitParam) -> Option<f64> {
        let k = self.free_params.iter().position(|q| *q == p)?;
        Some(self.covariance[(k, k)].max(0.0).sqrt())
    }

    pub fn correlation(&self) -> DMatrix<f64> {
        let n = self.free_params.len();
        DMatrix::from_fn(n, n, |i, j| {
            let d = (self.covariance[(i, i)] * self.covariance[(j, j)]).sqrt();
            if d > 0.0 {
                self.covariance[(i, j)] / d
            } else if i == j {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Key-value report: one `param.<name>` line per parameter, held ones
    /// marked `fixed`, then the correlation matrix of the free ones.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "converged = {}", self.converged);
        let _ = writeln!(out, "iterations = {}", self.iterations);
        let _ = writeln!(out, "cost = {}", self.cost);
        let _ = writeln!(out, "points = {}", self.points);
        let _ = writeln!(out, "rank_deficient = {}", self.rank_deficient);
        for p in FitParam::ALL {
            let v = self.params.get(p);
            match self.stderr(p) {
                Some(e) => {
                    let _ = writeln!(out, "param.{} = {} +- {}", p.name(), v, e);
                }
                None => {
                    let _ = writeln!(out, "param.{} = {} fixed", p.name(), v);
                }
            }
        }
        let _ = writeln!(out, "eps_arg_deg = {}", self.params.eps_arg.to_degrees());
        let corr = self.correlation();
        for (i, a) in self.free_params.iter().enumerate() {
            for (j, b) in self.free_params.iter().enumerate().skip(i + 1) {
                let _ = writeln!(out, "corr.{}.{} = {}", a.name(), b.name(), corr[(i, j)]);
            }
        }
        out
    }
}

/// Central differences with step `max(|θ_i|, 1)·10⁻⁶`; rows follow
/// `t_grid`, columns follow `theta`.
pub fn finite_difference_jacobian<F>(model: F, theta: &[f64], t_grid: &[f64]) -> DMatrix<f64>
where
    F: Fn(&[f64], f64) -> f64,
{
    let mut jac = DMatrix::zeros(t_grid.len(), theta.len());
    let mut probe = theta.to_vec();
    for i in 0..theta.len() {
        let h = theta[i].abs().max(1.0) * 1e-6;
        probe[i] = theta[i] + h;
        let up: Vec<f64> = t_grid.iter().map(|&t| model(&probe, t)).collect();
        probe[i] = theta[i] - h;
        for (k, &t) in t_grid.iter().enumerate() {
            jac[(k, i)] = (up[k] - model(&probe, t)) / (2.0 * h);
        }
        probe[i] = theta[i];
    }
    jac
}

/// Exact derivatives of the intensity model with respect to the six
/// natural parameters, columns in [`FitParam::ALL`] order.
pub fn analytic_jacobian(v: &FitValues, t_grid: &[f64]) -> DMatrix<f64> {
    let r = v.eps_mod;
    let phi = v.eps_arg;
    let s = v.scale;
    let mean = 0.5 * (v.gamma_s + v.gamma_l);
    let norm = 1.0 + 2.0 * r * phi.cos() + r * r;
    let norm_r = 2.0 * phi.cos() + 2.0 * r;
    let norm_phi = -2.0 * r * phi.sin();
    DMatrix::from_fn(t_grid.len(), 6, |k, col| {
        let t = t_grid[k];
        let es = (-v.gamma_s * t).exp();
        let el = (-v.gamma_l * t).exp();
        let em = (-mean * t).exp();
        let arg = v.delta_m * t - phi;
        let (c, sn) = (arg.cos(), arg.sin());
        let bracket = es + r * r * el + 2.0 * r * em * c;
        match col {
            0 => -s / norm * 2.0 * r * em * sn * t,
            1 => {
                let b_r = 2.0 * r * el + 2.0 * em * c;
                s * (b_r * norm - bracket * norm_r) / (norm * norm)
            }
            2 => {
                let b_phi = 2.0 * r * em * sn;
                s * (b_phi * norm - bracket * norm_phi) / (norm * norm)
            }
            3 => s / norm * (-t * es - r * t * em * c),
            4 => s / norm * (-r * r * t * el - r * t * em * c),
            _ => bracket / norm,
        }
    })
}

struct Problem<'a> {
    times: &'a [f64],
    values: &'a [f64],
    weights: Vec<f64>,
    free: &'a [FitParam],
    base: FitValues,
}

impl Problem<'_> {
    fn to_theta(&self, v: &FitValues) -> Vec<f64> {
        self.free
            .iter()
            .map(|p| {
                let x = v.get(*p);
                if p.is_log() {
                    x.ln()
                } else {
                    x
                }
            })
            .collect()
    }

    fn from_theta(&self, theta: &[f64]) -> FitValues {
        let mut v = self.base;
        for (p, x) in self.free.iter().zip(theta) {
            let value = if p.is_log() { x.exp() } else { *x };
            v.set(*p, value);
        }
        v
    }

    fn project(&self, theta: &mut [f64]) {
        for (p, x) in self.free.iter().zip(theta.iter_mut()) {
            match p {
                FitParam::EpsMod => *x = x.max(0.0),
                FitParam::EpsArg => *x = wrap_phase(*x),
                _ => {}
            }
        }
    }

    fn residuals(&self, theta: &[f64]) -> DVector<f64> {
        let v = self.from_theta(theta);
        let shape = v.shape();
        DVector::from_iterator(
            self.times.len(),
            self.times
                .iter()
                .zip(self.values)
                .zip(&self.weights)
                .map(|((t, y), w)| (y - shape.eval(*t)) * w),
        )
    }

    fn jacobian(&self, theta: &[f64]) -> DMatrix<f64> {
        let model = |th: &[f64], t: f64| self.from_theta(th).eval(t);
        let mut j = finite_difference_jacobian(model, theta, self.times);
        for (k, w) in self.weights.iter().enumerate() {
            j.row_mut(k).scale_mut(*w);
        }
        j
    }
}

struct Run {
    theta: Vec<f64>,
    cost: f64,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

fn levenberg_marquardt(problem: &Problem, start: Vec<f64>, cfg: &FitConfig) -> Run {
    let mut theta = start;
    problem.project(&mut theta);
    let mut res = problem.residuals(&theta);
    let mut cost = res.norm_squared();
    let reference = problem
        .values
        .iter()
        .zip(&problem.weights)
        .map(|(y, w)| (y * w).powi(2))
        .sum::<f64>();
    let mut history = vec![cost];
    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iterations {
        if !cost.is_finite() {
            break;
        }
        if cost <= 1e-28 * reference {
            converged = true;
            break;
        }
        iterations += 1;
        let jac = problem.jacobian(&theta);
        let jt = jac.transpose();
        let normal = &jt * &jac;
        let gradient = &jt * &res;
        let diag_floor = normal.diagonal().max() * 1e-12;
        let mut accepted = false;
        while mu < 1e16 {
            let mut damped = normal.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += mu * normal[(i, i)].max(diag_floor).max(f64::MIN_POSITIVE);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&gradient)) else {
                mu *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            problem.project(&mut trial);
            let trial_res = problem.residuals(&trial);
            let trial_cost = trial_res.norm_squared();
            if trial_cost.is_finite() && trial_cost <= cost {
                let decrease = cost - trial_cost;
                let step_small = step
                    .iter()
                    .zip(&theta)
                    .all(|(d, x)| d.abs() <= 1e-14 * x.abs().max(1.0));
                theta = trial;
                res = trial_res;
                cost = trial_cost;
                history.push(cost);
                mu = (mu / 10.0).max(1e-12);
                accepted = true;
                if decrease <= cfg.convergence_tol * (cost + decrease) || step_small {
                    converged = true;
                }
                break;
            }
            mu *= 10.0;
        }
        if !accepted {
            // no descent direction left at any damping: a numerical minimum
            converged = cost.is_finite();
            break;
        }
        if converged {
            break;
        }
    }
    Run {
        theta,
        cost,
        iterations,
        converged,
        history,
    }
}

/// Fits the intensity model to `data`, whose error bars must be positive.
pub fn fit_intensity(data: &IntensitySeries, cfg: &FitConfig) -> Result<FitResult> {
    let errors = data
        .errors
        .as_ref()
        .ok_or_else(|| Error::Fit("data carry no error bars".into()))?;
    if errors.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Fit("error bars must be positive".into()));
    }
    let mut free = cfg.free_params.clone();
    free.sort();
    free.dedup();
    if free.is_empty() {
        return Err(Error::Fit("no free parameters".into()));
    }
    if data.len() < free.len() + 1 {
        return Err(Error::Fit(format!(
            "{} points cannot constrain {} parameters",
            data.len(),
            free.len()
        )));
    }
    cfg.initial_guess.validate()?;
    if !cfg.convergence_tol.is_finite() || cfg.convergence_tol < 0.0 {
        return Err(Error::Fit("convergence tolerance must be non-negative".into()));
    }
    if cfg.delta_m_starts.iter().any(|x| !x.is_finite()) {
        return Err(Error::Fit("delta_m starts must be finite".into()));
    }

    let weights = errors.iter().map(|e| 1.0 / e).collect();
    Ok(fit_weighted(&data.times, &data.values, weights, &free, cfg, cfg.initial_guess, true))
}

fn fit_weighted(
    times: &[f64],
    values: &[f64],
    weights: Vec<f64>,
    free: &[FitParam],
    cfg: &FitConfig,
    guess: FitValues,
    multi_start: bool,
) -> FitResult {
    let problem = Problem {
        times,
        values,
        weights,
        free,
        base: guess,
    };

    let mut starts = vec![problem.to_theta(&guess)];
    if multi_start && free.contains(&FitParam::DeltaM) {
        for dm in &cfg.delta_m_starts {
            let mut v = guess;
            v.delta_m = *dm;
            starts.push(problem.to_theta(&v));
        }
    }
    let mut best: Option<Run> = None;
    for start in starts {
        let run = levenberg_marquardt(&problem, start, cfg);
        if best.as_ref().is_none_or(|b| run.cost < b.cost || !b.cost.is_finite()) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    let params = problem.from_theta(&best.theta);

    // covariance in natural units from the analytic Jacobian
    let full = analytic_jacobian(&params, times);
    let cols: Vec<usize> = free.iter().map(|p| p.index()).collect();
    let mut jac = full.select_columns(&cols);
    for (k, w) in problem.weights.iter().enumerate() {
        jac.row_mut(k).scale_mut(*w);
    }
    let normal = jac.transpose() * &jac;
    // equilibrate before inverting: natural units span many decades
    let d = normal.diagonal().map(|x| if x > 0.0 { 1.0 / x.sqrt() } else { 1.0 });
    let scaled = DMatrix::from_fn(free.len(), free.len(), |i, j| normal[(i, j)] * d[i] * d[j]);
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = smax * 1e-12;
    let rank_deficient = !(smax > 0.0) || svd.singular_values.iter().any(|s| *s <= cutoff);
    let inverse = svd
        .pseudo_inverse(cutoff.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DMatrix::zeros(free.len(), free.len()));
    let covariance = DMatrix::from_fn(free.len(), free.len(), |i, j| inverse[(i, j)] * d[i] * d[j]);
    let covariance = (&covariance + covariance.transpose()) * 0.5;

    FitResult {
        params,
        free_params: free.to_vec(),
        cost: best.cost,
        iterations: best.iterations,
        converged: best.converged,
        covariance,
        rank_deficient,
        cost_history: best.history,
        points: times.len(),
    }
}

/// Fits binned events. The first pass weights each bin by its observed
/// Poisson error; later passes weight by the variance the current model
/// predicts, `m_k/(n·width_k)`, until the parameters stop moving. The fixed
/// point of that reweighting is the Poisson maximum-likelihood estimate,
/// which stays unbiased when late bins hold less than one event.
pub fn fit_histogram(h: &Histogram, cfg: &FitConfig) -> Result<FitResult> {
    let mut result = fit_intensity(&h.series, cfg)?;
    if !result.cost.is_finite() {
        return Err(Error::Fit("cost is not finite".into()));
    }
    if h.total == 0 {
        return Ok(result);
    }
    let exposure: Vec<f64> = h
        .edges
        .windows(2)
        .map(|w| h.total as f64 * (w[1] - w[0]))
        .collect();
    let mut iterations = result.iterations;
    for _ in 0..MAX_REWEIGHTING_ROUNDS {
        let previous = result.params;
        let weights: Vec<f64> = h
            .series
            .times
            .iter()
            .zip(&exposure)
            .map(|(t, c)| (c / previous.eval(*t).max(f64::MIN_POSITIVE)).sqrt())
            .collect();
        result = fit_weighted(
            &h.series.times,
            &h.series.values,
            weights,
            &result.free_params,
            cfg,
            previous,
            false,
        );
        iterations += result.iterations;
        let settled = result.free_params.iter().all(|p| {
            let (a, b) = (previous.get(*p), result.params.get(*p));
            (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
        });
        if settled {
            break;
        }
    }
    if !result.cost.is_finite() {
        return Err(Error::Fit("cost is not finite".into()));
    }
    result.iterations = iterations;
    Ok(result)
}
