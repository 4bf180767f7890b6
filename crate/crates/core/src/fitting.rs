//! Least-squares extraction of decay times, oscillation frequencies and the
//! time-domain effective coupling.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::ChevronMap;
use crate::{Error, Result};

/// Fewest samples accepted by any fit.
pub const MIN_POINTS: usize = 8;

/// Fewest detected chevron columns needed for the hyperbola fit.
pub const MIN_CHEVRON_COLUMNS: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeTrace {
    times: Vec<f64>,
    values: Vec<f64>,
    sigma: Option<Vec<f64>>,
}

impl TimeTrace {
    pub fn new(times: Vec<f64>, values: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::config(format!(
                "trace has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if let Some(s) = &sigma {
            if s.len() != times.len() {
                return Err(Error::config(
                    "uncertainty column length differs from the trace",
                ));
            }
            if s.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                return Err(Error::config("uncertainties must be positive and finite"));
            }
        }
        if times.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::config("trace contains non-finite entries"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("trace times must be strictly increasing"));
        }
        Ok(Self {
            times,
            values,
            sigma,
        })
    }

    /// Two or three columns: time_ns, value[, uncertainty]. A leading
    /// non-numeric row is treated as a header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let (mut t, mut v, mut s) = (Vec::new(), Vec::new(), Vec::new());
        let mut columns = None;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                rec.iter().map(str::parse::<f64>).collect();
            let row = match parsed {
                Ok(row) => row,
                Err(_) if i == 0 => continue,
                Err(e) => return Err(Error::config(format!("trace row {}: {e}", i + 1))),
            };
            if !(2..=3).contains(&row.len()) {
                return Err(Error::config(format!(
                    "trace row {} has {} columns, expected 2 or 3",
                    i + 1,
                    row.len()
                )));
            }
            match columns {
                None => columns = Some(row.len()),
                Some(n) if n != row.len() => {
                    return Err(Error::config(format!(
                        "trace row {} changes the column count",
                        i + 1
                    )))
                }
                _ => {}
            }
            t.push(row[0]);
            v.push(row[1]);
            if row.len() == 3 {
                s.push(row[2]);
            }
        }
        let sigma = (columns == Some(3)).then_some(s);
        Self::new(t, v, sigma)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)
            .map_err(|e| Error::config(format!("cannot open trace {}: {e}", path.display())))?;
        Self::from_csv_reader(f)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sigma(&self) -> Option<&[f64]> {
        self.sigma.as_deref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn span(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    fn require_points(&self) -> Result<()> {
        if self.len() < MIN_POINTS {
            return Err(Error::config(format!(
                "fit needs at least {MIN_POINTS} points, trace has {}",
                self.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `A·exp(−t/T1) + c`
    ExpDecay,
    /// `A·exp(−(t − t₀)/τ_d)·cos(2πft + φ) + c`, `t₀` the first sample time.
    DampedCosine,
    /// `f(Δ) = √(4g² + s²(Δ − Δ₀)²)`
    Hyperbola,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitOutcome {
    pub model: FitModel,
    pub names: Vec<&'static str>,
    pub estimates: Vec<f64>,
    /// One-sigma uncertainties; infinite when the parameter is unconstrained.
    pub sigmas: Vec<f64>,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitOutcome {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.estimates[i])
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.sigmas[i])
    }

    /// JSON report: model name, estimates and sigmas keyed by parameter,
    /// residual RMS and the convergence flag. Non-finite numbers become null.
    pub fn report(&self) -> serde_json::Value {
        let finite = |x: f64| {
            if x.is_finite() {
                serde_json::json!(x)
            } else {
                serde_json::Value::Null
            }
        };
        let est: BTreeMap<&str, serde_json::Value> = self
            .names
            .iter()
            .zip(&self.estimates)
            .map(|(n, v)| (*n, finite(*v)))
            .collect();
        let sig: BTreeMap<&str, serde_json::Value> = self
            .names
            .iter()
            .zip(&self.sigmas)
            .map(|(n, v)| (*n, finite(*v)))
            .collect();
        serde_json::json!({
            "model": self.model,
            "estimates": est,
            "sigmas": sig,
            "residual_rms": finite(self.residual_rms),
            "converged": self.converged,
            "iterations": self.iterations,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmSettings {
    pub max_iterations: usize,
    pub relative_tolerance: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            relative_tolerance: 1e-10,
        }
    }
}

struct LmResult {
    params: Vec<f64>,
    /// `(JᵀWJ)⁻¹` at the solution, scaled to one-sigma variances.
    covariance: Option<DMatrix<f64>>,
    residual_rms: f64,
    cost: f64,
    converged: bool,
    iterations: usize,
}

/// Damped Gauss-Newton (Levenberg-Marquardt). `model(p, x, grad)` returns the
/// model value at `x` and writes ∂/∂p into `grad`.
fn levenberg_marquardt<F>(
    xs: &[f64],
    ys: &[f64],
    sigma: Option<&[f64]>,
    p0: &[f64],
    settings: LmSettings,
    model: F,
) -> LmResult
where
    F: Fn(&[f64], f64, &mut [f64]) -> f64,
{
    let n = xs.len();
    let m = p0.len();
    let w: Vec<f64> = match sigma {
        Some(s) => s.iter().map(|s| 1.0 / (s * s)).collect(),
        None => vec![1.0; n],
    };
    let mut grad = vec![0.0; m];
    let evaluate = |p: &[f64],
                    grad: &mut [f64],
                    jac: Option<&mut DMatrix<f64>>,
                    res: &mut DVector<f64>|
     -> f64 {
        let mut cost = 0.0;
        let mut jac = jac;
        for i in 0..n {
            let f = model(p, xs[i], grad);
            let r = ys[i] - f;
            res[i] = r;
            cost += w[i] * r * r;
            if let Some(j) = jac.as_deref_mut() {
                for k in 0..m {
                    j[(i, k)] = grad[k];
                }
            }
        }
        cost
    };

    let mut p = p0.to_vec();
    let mut jac = DMatrix::zeros(n, m);
    let mut res = DVector::zeros(n);
    let mut trial_res = DVector::zeros(n);
    let mut cost = evaluate(&p, &mut grad, Some(&mut jac), &mut res);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let wv = DVector::from_vec(w.clone());
    while iterations < settings.max_iterations {
        iterations += 1;
        let jw = DMatrix::from_fn(n, m, |i, k| jac[(i, k)] * wv[i]);
        let a = jw.transpose() * &jac;
        let b = jw.transpose() * &res;
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = a.clone();
            for k in 0..m {
                damped[(k, k)] += lambda * a[(k, k)].max(1e-300);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&b);
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(x, d)| x + d).collect();
            let trial_cost = evaluate(&trial, &mut grad, None, &mut trial_res);
            if trial_cost.is_finite() && trial_cost <= cost {
                let step = delta.norm();
                let scale = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                p = trial;
                cost = evaluate(&p, &mut grad, Some(&mut jac), &mut res);
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if step <= settings.relative_tolerance * (scale + settings.relative_tolerance) {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // No downhill step at any damping: the cost is stationary to
            // machine precision.
            converged = true;
        }
        if converged {
            break;
        }
    }
    let dof = n.saturating_sub(m).max(1) as f64;
    let jw = DMatrix::from_fn(n, m, |i, k| jac[(i, k)] * wv[i]);
    let a = jw.transpose() * &jac;
    let scale = if sigma.is_some() { 1.0 } else { cost / dof };
    let covariance = a.try_inverse().map(|inv| inv * scale);
    LmResult {
        params: p,
        covariance,
        residual_rms: (res.norm_squared() / n as f64).sqrt(),
        cost,
        converged,
        iterations,
    }
}

fn sigmas_from(cov: &Option<DMatrix<f64>>, m: usize) -> Vec<f64> {
    match cov {
        Some(c) => (0..m)
            .map(|k| {
                let v = c[(k, k)];
                if v.is_finite() && v >= 0.0 {
                    v.sqrt()
                } else {
                    f64::INFINITY
                }
            })
            .collect(),
        None => vec![f64::INFINITY; m],
    }
}

/// Fits `A·exp(−t/T1) + c`.
pub fn fit_exp_decay(trace: &TimeTrace) -> Result<FitOutcome> {
    trace.require_points()?;
    let (t, y) = (trace.times(), trace.values());
    let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = trace.span();
    if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1e-300) || span <= 0.0 {
        return Err(Error::numerical("no decay detected: trace is constant"));
    }
    // Seeds: offset from the tail, time constant from the 1/e crossing.
    let tail = (y.len() / 10).max(1);
    let c0 = y[y.len() - tail..].iter().sum::<f64>() / tail as f64;
    let a_first = y[0] - c0;
    let target = c0 + a_first / std::f64::consts::E;
    let t_e = t
        .iter()
        .zip(y)
        .find(|(_, &v)| (v - target) * a_first.signum() <= 0.0)
        .map(|(&ti, _)| ti - t[0])
        .unwrap_or(span / 3.0)
        .max(span / 50.0);
    let a0 = a_first * (t[0] / t_e).exp();
    let model = |p: &[f64], x: f64, g: &mut [f64]| {
        let e = (-x / p[1]).exp();
        g[0] = e;
        g[1] = p[0] * e * x / (p[1] * p[1]);
        g[2] = 1.0;
        p[0] * e + p[2]
    };
    let fit = levenberg_marquardt(
        t,
        y,
        trace.sigma(),
        &[a0, t_e, c0],
        LmSettings::default(),
        model,
    );
    let t1 = fit.params[1];
    let bound = 100.0 * span;
    if !(t1 > 0.0) || t1 >= bound || !t1.is_finite() {
        return Err(Error::numerical(format!(
            "no decay detected: T1 estimate {t1} ns is outside (0, {bound}] ns"
        )));
    }
    if !fit.converged {
        return Err(Error::numerical(format!(
            "exponential fit did not converge in {} iterations",
            fit.iterations
        )));
    }
    Ok(FitOutcome {
        model: FitModel::ExpDecay,
        names: vec!["amplitude", "t1", "offset"],
        sigmas: sigmas_from(&fit.covariance, 3),
        estimates: fit.params,
        residual_rms: fit.residual_rms,
        converged: fit.converged,
        iterations: fit.iterations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosineOptions {
    /// Smallest number of periods inside the trace for a frequency to count.
    pub min_periods: f64,
    /// False-alarm probability of the periodogram peak test.
    pub false_alarm: f64,
    /// Smallest accepted fitted amplitude.
    pub min_amplitude: f64,
}

impl Default for CosineOptions {
    fn default() -> Self {
        Self {
            min_periods: 2.0,
            false_alarm: 1e-3,
            min_amplitude: 0.0,
        }
    }
}

/// Periodogram of the mean-subtracted trace on an oversampled grid between
/// `f_lo` and the Nyquist frequency of the median sample spacing.
#[derive(Clone, Debug)]
pub struct Periodogram {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

pub fn periodogram(trace: &TimeTrace, f_lo: f64) -> Periodogram {
    let (t, y) = (trace.times(), trace.values());
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let mut dts: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    dts.sort_by(f64::total_cmp);
    let dt = dts[dts.len() / 2];
    let nyquist = 0.5 / dt;
    let df = 1.0 / (8.0 * trace.span());
    let count = ((nyquist - f_lo) / df).floor().max(0.0) as usize + 1;
    let freqs: Vec<f64> = (0..count).map(|k| f_lo + k as f64 * df).collect();
    let power = freqs
        .iter()
        .map(|&f| dft(t, y, mean, f).norm_sqr() / y.len() as f64)
        .collect();
    Periodogram { freqs, power }
}

fn dft(t: &[f64], y: &[f64], mean: f64, f: f64) -> Complex64 {
    t.iter()
        .zip(y)
        .map(|(&ti, &yi)| Complex64::from_polar(yi - mean, -TAU * f * ti))
        .sum()
}

/// Fits `A·exp(−(t − t₀)/τ_d)·cos(2πft + φ) + c` seeded from the periodogram.
pub fn fit_damped_cosine(trace: &TimeTrace) -> Result<FitOutcome> {
    fit_damped_cosine_with(trace, CosineOptions::default())
}

pub fn fit_damped_cosine_with(trace: &TimeTrace, options: CosineOptions) -> Result<FitOutcome> {
    trace.require_points()?;
    let span = trace.span();
    let f_min = options.min_periods / span;
    let pg = periodogram(trace, f_min);
    if pg.freqs.len() < 3 {
        return Err(Error::OscillationNotDetected(format!(
            "window of {span} ns cannot hold {} periods below the Nyquist frequency",
            options.min_periods
        )));
    }
    let k = pg
        .power
        .iter()
        .enumerate()
        .fold(0, |b, (i, &p)| if p > pg.power[b] { i } else { b });
    let mut sorted = pg.power.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    // Exponential noise statistics: mean = median / ln 2; roughly one
    // independent frequency per 8 oversampled grid points.
    let independent = (pg.freqs.len() as f64 / 8.0).max(1.0);
    let threshold = median / std::f64::consts::LN_2 * (independent / options.false_alarm).ln();
    if !(pg.power[k] > threshold) {
        return Err(Error::OscillationNotDetected(format!(
            "periodogram peak {:.3e} at {:.4} MHz is below the noise threshold {:.3e}",
            pg.power[k],
            pg.freqs[k] * 1e3,
            threshold
        )));
    }
    let f0 = if k > 0 && k + 1 < pg.freqs.len() {
        let (a, b, c) = (pg.power[k - 1], pg.power[k], pg.power[k + 1]);
        let denom = a - 2.0 * b + c;
        let shift = if denom < 0.0 {
            0.5 * (a - c) / denom
        } else {
            0.0
        };
        pg.freqs[k] + shift.clamp(-0.5, 0.5) * (pg.freqs[1] - pg.freqs[0])
    } else {
        pg.freqs[k]
    };

    let (t, y) = (trace.times(), trace.values());
    let t_ref = t[0];
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let s = dft(t, y, mean, f0);
    let a0 = 2.0 * s.norm() / y.len() as f64;
    let phi0 = s.arg();
    let model = move |p: &[f64], x: f64, g: &mut [f64]| {
        let (a, f, phi, gamma, _c) = (p[0], p[1], p[2], p[3], p[4]);
        let e = (-(x - t_ref) * gamma).exp();
        let arg = TAU * f * x + phi;
        let (sn, cs) = arg.sin_cos();
        g[0] = e * cs;
        g[1] = -a * e * sn * TAU * x;
        g[2] = -a * e * sn;
        g[3] = -a * e * cs * (x - t_ref);
        g[4] = 1.0;
        a * e * cs + p[4]
    };
    let mut best: Option<LmResult> = None;
    for gamma0 in [0.1 / span, 1.0 / span, 4.0 / span] {
        // Decay shrinks the DFT amplitude; compensate the seed.
        let envelope = if gamma0 * span > 1e-12 {
            (1.0 - (-gamma0 * span).exp()) / (gamma0 * span)
        } else {
            1.0
        };
        let p0 = [a0 / envelope, f0, phi0, gamma0, mean];
        let fit = levenberg_marquardt(t, y, trace.sigma(), &p0, LmSettings::default(), model);
        if best.as_ref().is_none_or(|b| fit.cost < b.cost) {
            best = Some(fit);
        }
    }
    let fit = best.expect("at least one seed");
    let mut p = fit.params.clone();
    let mut sig = sigmas_from(&fit.covariance, 5);
    if p[0] < 0.0 {
        p[0] = -p[0];
        p[2] += PI;
    }
    if p[1] < 0.0 {
        p[1] = -p[1];
        p[2] = -p[2];
    }
    p[2] = wrap_phase(p[2]);
    if !fit.converged {
        return Err(Error::numerical(format!(
            "damped-cosine fit did not converge in {} iterations",
            fit.iterations
        )));
    }
    if p[1] * span < options.min_periods {
        return Err(Error::OscillationNotDetected(format!(
            "fitted frequency {:.4} MHz gives fewer than {} periods in {span} ns",
            p[1] * 1e3,
            options.min_periods
        )));
    }
    if p[0] < options.min_amplitude {
        return Err(Error::OscillationNotDetected(format!(
            "fitted amplitude {:.3e} is below the floor {:.3e}",
            p[0], options.min_amplitude
        )));
    }
    // Report the decay time rather than the rate.
    let gamma = p[3];
    let (tau, tau_sigma) = if gamma > 0.0 {
        (1.0 / gamma, sig[3] / (gamma * gamma))
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    p[3] = tau;
    sig[3] = tau_sigma;
    Ok(FitOutcome {
        model: FitModel::DampedCosine,
        names: vec!["amplitude", "frequency", "phase", "decay_time", "offset"],
        estimates: p,
        sigmas: sig,
        residual_rms: fit.residual_rms,
        converged: fit.converged,
        iterations: fit.iterations,
    })
}

fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChevronFitOptions {
    pub cosine: CosineOptions,
}

impl Default for ChevronFitOptions {
    fn default() -> Self {
        Self {
            cosine: CosineOptions {
                min_amplitude: 0.02,
                ..CosineOptions::default()
            },
        }
    }
}

/// One chevron column's oscillation frequency.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColumnFrequency {
    pub detuning_mhz: f64,
    pub frequency_mhz: f64,
    pub sigma_mhz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeffEstimate {
    pub g_mhz: f64,
    pub g_sigma_mhz: f64,
    /// Detuning of the hyperbola vertex, MHz.
    pub offset_mhz: f64,
    /// Slope of the hyperbola asymptotes (1 for an ideal two-level exchange).
    pub detuning_scale: f64,
    /// Smallest |g| the time window can resolve, MHz.
    pub floor_mhz: f64,
    pub columns: Vec<ColumnFrequency>,
    pub fit: FitOutcome,
}

/// Smallest |g_eff| whose resonant exchange shows `min_periods` periods
/// within a window of `span_ns`.
pub fn sensitivity_floor_mhz(span_ns: f64, min_periods: f64) -> f64 {
    min_periods / (2.0 * span_ns) * 1e3
}

/// Fits `f(Δ) = √(4g² + s²(Δ − Δ₀)²)` to the per-column oscillation
/// frequencies of a chevron.
pub fn geff_from_chevron(chevron: &ChevronMap) -> Result<GeffEstimate> {
    geff_from_chevron_with(chevron, ChevronFitOptions::default())
}

pub fn geff_from_chevron_with(
    chevron: &ChevronMap,
    options: ChevronFitOptions,
) -> Result<GeffEstimate> {
    if chevron.taus_ns.len() < MIN_POINTS {
        return Err(Error::config(format!(
            "chevron needs at least {MIN_POINTS} interaction times"
        )));
    }
    let span = chevron.taus_ns[chevron.taus_ns.len() - 1] - chevron.taus_ns[0];
    let floor = sensitivity_floor_mhz(span, options.cosine.min_periods);
    let mut columns = Vec::new();
    for (i, &d) in chevron.detunings_mhz.iter().enumerate() {
        let trace = TimeTrace::new(chevron.taus_ns.clone(), chevron.p1[i].clone(), None)?;
        match fit_damped_cosine_with(&trace, options.cosine) {
            Ok(fit) => columns.push(ColumnFrequency {
                detuning_mhz: d,
                frequency_mhz: fit.get("frequency").unwrap_or(f64::NAN) * 1e3,
                sigma_mhz: fit.sigma("frequency").unwrap_or(f64::INFINITY) * 1e3,
            }),
            Err(Error::OscillationNotDetected(_)) | Err(Error::Numerical(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if columns.len() < MIN_CHEVRON_COLUMNS {
        return Err(Error::BelowSensitivityFloor {
            detected: columns.len(),
            required: MIN_CHEVRON_COLUMNS,
            floor_mhz: floor,
        });
    }
    let xs: Vec<f64> = columns.iter().map(|c| c.detuning_mhz).collect();
    let ys: Vec<f64> = columns.iter().map(|c| c.frequency_mhz).collect();
    let kmin = ys
        .iter()
        .enumerate()
        .fold(0, |b, (i, &y)| if y < ys[b] { i } else { b });
    let p0 = [ys[kmin] / 2.0, xs[kmin], 1.0];
    let model = |p: &[f64], x: f64, g: &mut [f64]| {
        let (gg, x0, s) = (p[0], p[1], p[2]);
        let dx = x - x0;
        let f = (4.0 * gg * gg + s * s * dx * dx).sqrt().max(1e-300);
        g[0] = 4.0 * gg / f;
        g[1] = -s * s * dx / f;
        g[2] = s * dx * dx / f;
        f
    };
    let fit = levenberg_marquardt(&xs, &ys, None, &p0, LmSettings::default(), model);
    let sig = sigmas_from(&fit.covariance, 3);
    let (g, x0, s) = (fit.params[0].abs(), fit.params[1], fit.params[2].abs());
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
            (l.min(x), h.max(x))
        });
    if !(lo < x0 && x0 < hi) {
        return Err(Error::domain(format!(
            "chevron does not cover the resonance: vertex at {x0:.3} MHz outside ({lo}, {hi}) MHz"
        )));
    }
    if g < floor {
        return Err(Error::BelowSensitivityFloor {
            detected: columns.len(),
            required: MIN_CHEVRON_COLUMNS,
            floor_mhz: floor,
        });
    }
    let outcome = FitOutcome {
        model: FitModel::Hyperbola,
        names: vec!["g_mhz", "offset_mhz", "detuning_scale"],
        estimates: vec![g, x0, s],
        sigmas: sig.clone(),
        residual_rms: fit.residual_rms,
        converged: fit.converged,
        iterations: fit.iterations,
    };
    Ok(GeffEstimate {
        g_mhz: g,
        g_sigma_mhz: sig[0],
        offset_mhz: x0,
        detuning_scale: s,
        floor_mhz: floor,
        columns,
        fit: outcome,
    })
}
