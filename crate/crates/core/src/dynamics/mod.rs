//! Open-system time evolution under piecewise-constant pulse schedules.

mod chevron;
mod propagator;

pub use chevron::{
    default_offsets_mhz, default_taus_ns, vacuum_rabi_chevron, ChevronConfig, ChevronMap, Frame,
    DEFAULT_BIAS,
};
pub use propagator::{
    from_coords, rk4_step_matrix, step_count, to_coords, Lindbladian, SUPEROPERATOR_MAX_DIM,
};

use serde::{Deserialize, Serialize};

use crate::device::{DeviceParams, HamiltonianTerms, OperatingPoint, Qubit, MODE_A, MODE_B};
use crate::fock::{
    eigendecompose_matrix, hermitian_defect, level_flip, lowering_operator, number_operator,
    CMatrix, CVector, HilbertSpace, C64,
};
use crate::units::us_to_ns;
use crate::{Error, Result};
use propagator::Evolver;

pub const TRACE_TOLERANCE: f64 = 1e-8;
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;
pub const POSITIVITY_TOLERANCE: f64 = 1e-8;

/// Upper bound on the default integration step, ns.
pub const MAX_DEFAULT_STEP_NS: f64 = 0.01;

#[derive(Clone, Debug)]
pub struct DensityState {
    space: HilbertSpace,
    rho: CMatrix,
}

impl DensityState {
    pub fn new(space: HilbertSpace, rho: CMatrix) -> Result<Self> {
        let n = space.total_dim();
        if rho.shape() != (n, n) {
            return Err(Error::config(format!(
                "density matrix is {}x{}, space has dimension {n}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let s = Self { space, rho };
        s.validate()?;
        Ok(s)
    }

    pub fn pure(space: HilbertSpace, psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::config(format!(
                "state vector norm is {norm}, expected 1"
            )));
        }
        let rho = psi * psi.adjoint();
        Self::new(space, rho)
    }

    /// Bare product state with the given occupations.
    pub fn basis(space: HilbertSpace, occupations: &[usize]) -> Result<Self> {
        let i = space.index_of(occupations)?;
        let mut psi = CVector::zeros(space.total_dim());
        psi[i] = C64::new(1.0, 0.0);
        Self::pure(space, &psi)
    }

    pub fn vacuum(space: HilbertSpace) -> Self {
        let occ = vec![0; space.mode_count()];
        Self::basis(space, &occ).expect("vacuum is always representable")
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    pub fn expectation(&self, op: &CMatrix) -> f64 {
        (op * &self.rho).trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = eigendecompose_matrix(&self.rho)?;
        Ok(eig.values[0])
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(Error::numerical(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let defect = hermitian_defect(&self.rho);
        if defect > HERMITICITY_TOLERANCE {
            return Err(Error::NotHermitian { asymmetry: defect });
        }
        let min = self.min_eigenvalue()?;
        if min < -POSITIVITY_TOLERANCE {
            return Err(Error::numerical(format!(
                "density matrix has eigenvalue {min}"
            )));
        }
        Ok(())
    }

    /// Instantaneous ideal π flip of one qubit (levels 0 and 1 exchanged).
    pub fn flipped(&self, qubit: Qubit) -> Result<Self> {
        let x = level_flip(&self.space, qubit.mode())?.into_matrix();
        Ok(Self {
            space: self.space.clone(),
            rho: &x * &self.rho * &x,
        })
    }
}

/// Collapse operator scaled by the square root of its rate.
#[derive(Clone, Debug)]
pub struct CollapseOperator {
    pub label: String,
    /// Rate in 1/ns.
    pub rate: f64,
    pub operator: CMatrix,
}

/// Qubit relaxation `√(1/T1)·a` and pure dephasing `√(2/T_φ)·n` for each
/// qubit, plus photon loss for resonators with a configured lifetime.
/// Infinite lifetimes produce no operator.
pub fn collapse_operators(
    params: &DeviceParams,
    space: &HilbertSpace,
) -> Result<Vec<CollapseOperator>> {
    params.validate()?;
    let mut out = Vec::new();
    for q in [Qubit::One, Qubit::Two] {
        let t1 = us_to_ns(params.t1(q));
        let t2 = us_to_ns(params.t2(q));
        let gamma1 = 1.0 / t1;
        let mut gamma_phi = 1.0 / t2 - 0.5 / t1;
        if gamma_phi.abs() <= 1e-12 / t2 {
            gamma_phi = 0.0;
        }
        if gamma1 > 0.0 {
            let a = lowering_operator(space, q.mode())?.into_matrix();
            out.push(CollapseOperator {
                label: format!("relax_q{q}"),
                rate: gamma1,
                operator: a * C64::new(gamma1.sqrt(), 0.0),
            });
        }
        if gamma_phi > 0.0 {
            let n = number_operator(space, q.mode())?.into_matrix();
            out.push(CollapseOperator {
                label: format!("dephase_q{q}"),
                rate: 2.0 * gamma_phi,
                operator: n * C64::new((2.0 * gamma_phi).sqrt(), 0.0),
            });
        }
    }
    for (mode, name, t) in [
        (MODE_A, "a", params.resonator_t1_a),
        (MODE_B, "b", params.resonator_t1_b),
    ] {
        if let Some(t) = t {
            let kappa = 1.0 / us_to_ns(t);
            if kappa > 0.0 {
                let a = lowering_operator(space, mode)?.into_matrix();
                out.push(CollapseOperator {
                    label: format!("loss_{name}"),
                    rate: kappa,
                    operator: a * C64::new(kappa.sqrt(), 0.0),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub duration_ns: f64,
    pub point: OperatingPoint,
    /// Ideal π flip applied at the start of the stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prep: Option<Qubit>,
}

/// Ordered stages; the readout happens after `readout_stage` (and the
/// optional padding). Later stages are not simulated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub stages: Vec<Stage>,
    pub readout_stage: usize,
    /// Fixed prep-to-readout interval, ns. The gap between the end of the
    /// readout stage and this interval is spent at the first stage's point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_interval_ns: Option<f64>,
}

impl PulseSchedule {
    /// Flip qubit 2 at `bias`, then hold `interaction` for `tau`.
    pub fn vacuum_rabi(
        bias: OperatingPoint,
        interaction: OperatingPoint,
        tau: f64,
        fixed_interval_ns: Option<f64>,
    ) -> Self {
        Self {
            stages: vec![
                Stage {
                    duration_ns: 0.0,
                    point: bias,
                    prep: Some(Qubit::Two),
                },
                Stage {
                    duration_ns: tau,
                    point: interaction,
                    prep: None,
                },
            ],
            readout_stage: 1,
            fixed_interval_ns,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::config("pulse schedule needs at least one stage"));
        }
        if self.readout_stage >= self.stages.len() {
            return Err(Error::config(format!(
                "readout stage {} out of range ({} stages)",
                self.readout_stage,
                self.stages.len()
            )));
        }
        for (i, s) in self.stages.iter().enumerate() {
            if !(s.duration_ns >= 0.0) || !s.duration_ns.is_finite() {
                return Err(Error::config(format!(
                    "stage {i} has invalid duration {}",
                    s.duration_ns
                )));
            }
            s.point.validate()?;
        }
        if let Some(fixed) = self.fixed_interval_ns {
            let used = self.active_duration();
            if !fixed.is_finite() || fixed < used - 1e-9 {
                return Err(Error::config(format!(
                    "fixed prep-to-readout interval {fixed} ns is shorter than the stages ({used} ns)"
                )));
            }
        }
        Ok(())
    }

    fn active_duration(&self) -> f64 {
        self.stages[..=self.readout_stage]
            .iter()
            .map(|s| s.duration_ns)
            .sum()
    }

    /// Stages actually simulated, padding included.
    pub fn resolved_stages(&self) -> Vec<Stage> {
        let mut out: Vec<Stage> = self.stages[..=self.readout_stage].to_vec();
        if let Some(fixed) = self.fixed_interval_ns {
            let pad = fixed - self.active_duration();
            if pad > 0.0 {
                out.push(Stage {
                    duration_ns: pad,
                    point: self.stages[0].point,
                    prep: None,
                });
            }
        }
        out
    }

    pub fn total_duration(&self) -> f64 {
        self.resolved_stages().iter().map(|s| s.duration_ns).sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    /// Largest RK4 step, ns. Defaults to `min(0.01 ns, 1/(200·f_max))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step_ns: Option<f64>,
    /// Spacing of the output samples, ns. Defaults to 1/200 of the schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_interval_ns: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Observable {
    pub name: String,
    pub operator: CMatrix,
}

impl Observable {
    pub fn new(name: impl Into<String>, operator: CMatrix) -> Self {
        Self {
            name: name.into(),
            operator,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub step_ns: f64,
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
    pub max_hermitian_defect: f64,
}

#[derive(Clone, Debug)]
pub struct TraceSeries {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `values[k][i]`: observable `k` at `times[i]`.
    pub values: Vec<Vec<f64>>,
    pub final_state: DensityState,
    pub diagnostics: Diagnostics,
}

impl TraceSeries {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.values[k].as_slice())
    }
}

/// Largest transition frequency of `h` (rad/ns), in GHz.
pub(crate) fn max_bohr_frequency(h: &CMatrix) -> Result<f64> {
    let eig = eigendecompose_matrix(h)?;
    let span = eig.values[eig.values.len() - 1] - eig.values[0];
    Ok(span / std::f64::consts::TAU)
}

pub(crate) fn default_step(f_max_ghz: f64) -> f64 {
    if f_max_ghz > 0.0 {
        MAX_DEFAULT_STEP_NS.min(1.0 / (200.0 * f_max_ghz))
    } else {
        MAX_DEFAULT_STEP_NS
    }
}

fn check_step(step: f64) -> Result<f64> {
    if step.is_finite() && step > 0.0 {
        Ok(step)
    } else {
        Err(Error::config(format!(
            "integration step must be positive, got {step}"
        )))
    }
}

/// Integrates the Lindblad equation through the schedule and samples the
/// observables on a uniform time grid (plus the final time).
pub fn evolve(
    params: &DeviceParams,
    schedule: &PulseSchedule,
    initial: &DensityState,
    space: &HilbertSpace,
    observables: &[Observable],
    settings: &IntegratorSettings,
) -> Result<TraceSeries> {
    params.validate()?;
    schedule.validate()?;
    if initial.space() != space {
        return Err(Error::config(
            "initial state lives in a different Hilbert space",
        ));
    }
    initial.validate()?;
    let n = space.total_dim();
    for o in observables {
        if o.operator.shape() != (n, n) {
            return Err(Error::config(format!(
                "observable '{}' has the wrong shape",
                o.name
            )));
        }
    }
    let terms = HamiltonianTerms::new(space)?;
    let jumps: Vec<CMatrix> = collapse_operators(params, space)?
        .into_iter()
        .map(|c| c.operator)
        .collect();
    let stages = schedule.resolved_stages();
    let hams: Vec<CMatrix> = stages
        .iter()
        .map(|s| Ok(terms.assemble(params, &s.point)?.into_matrix()))
        .collect::<Result<_>>()?;
    let step = match settings.max_step_ns {
        Some(h) => check_step(h)?,
        None => {
            let mut f = 0.0_f64;
            for h in &hams {
                f = f.max(max_bohr_frequency(h)?);
            }
            default_step(f)
        }
    };
    let total: f64 = stages.iter().map(|s| s.duration_ns).sum();
    let sample = match settings.sample_interval_ns {
        Some(s) if s.is_finite() && s > 0.0 => s,
        Some(s) => {
            return Err(Error::config(format!(
                "sample interval must be positive, got {s}"
            )))
        }
        None if total > 0.0 => total / 200.0,
        None => 1.0,
    };
    let mut times: Vec<f64> = (0..)
        .map(|k| k as f64 * sample)
        .take_while(|&t| t <= total * (1.0 + 1e-12))
        .collect();
    if times
        .last()
        .is_none_or(|&t| (t - total).abs() > 1e-9 * total.max(1.0))
    {
        times.push(total);
    }

    let mut rho = initial.matrix().clone();
    let mut values = vec![Vec::with_capacity(times.len()); observables.len()];
    let mut diag = Diagnostics {
        step_ns: step,
        max_trace_drift: 0.0,
        min_eigenvalue: f64::INFINITY,
        max_hermitian_defect: 0.0,
    };
    let mut record = |rho: &CMatrix, diag: &mut Diagnostics| -> Result<()> {
        let state = DensityState {
            space: space.clone(),
            rho: rho.clone(),
        };
        for (k, o) in observables.iter().enumerate() {
            values[k].push(state.expectation(&o.operator));
        }
        diag.max_trace_drift = diag.max_trace_drift.max((state.trace() - 1.0).abs());
        diag.max_hermitian_defect = diag.max_hermitian_defect.max(hermitian_defect(rho));
        diag.min_eigenvalue = diag.min_eigenvalue.min(state.min_eigenvalue()?);
        Ok(())
    };

    const EPS: f64 = 1e-9;
    let mut next = 0;
    let mut t = 0.0;
    for (si, (stage, h)) in stages.iter().zip(&hams).enumerate() {
        if let Some(q) = stage.prep {
            let x = level_flip(space, q.mode())?.into_matrix();
            rho = &x * &rho * &x;
        }
        let end = t + stage.duration_ns;
        let last = si + 1 == stages.len();
        let mut evolver = Evolver::new(Lindbladian::new(h, &jumps)?, step);
        loop {
            // A sample on a stage boundary sees the state after the next
            // stage's prep.
            while next < times.len() && times[next] <= t + EPS && (last || times[next] < end - EPS)
            {
                record(&rho, &mut diag)?;
                next += 1;
            }
            if t >= end - EPS {
                break;
            }
            let target = if next < times.len() && times[next] < end - EPS {
                times[next]
            } else {
                end
            };
            rho = evolver.advance(&rho, target - t);
            t = target;
        }
        t = end;
    }

    if diag.max_trace_drift > TRACE_TOLERANCE {
        return Err(Error::numerical(format!(
            "trace drift {:.3e} exceeds {TRACE_TOLERANCE:e} (step {step} ns)",
            diag.max_trace_drift
        )));
    }
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    Ok(TraceSeries {
        times,
        names: observables.iter().map(|o| o.name.clone()).collect(),
        values,
        final_state: DensityState {
            space: space.clone(),
            rho,
        },
        diagnostics: diag,
    })
}

/// Closed-form single-excitation exchange between two resonant-ish levels:
/// `4g²/(Δ²+4g²)·sin²(π√(4g²+Δ²)·t)`, with `g`, `Δ` in MHz and `t` in ns.
pub fn two_level_transfer(g_eff_mhz: f64, delta12_mhz: f64, t_ns: f64) -> f64 {
    let g = g_eff_mhz * 1e-3;
    let d = delta12_mhz * 1e-3;
    let w2 = 4.0 * g * g + d * d;
    if w2 == 0.0 {
        return 0.0;
    }
    let s = (std::f64::consts::PI * w2.sqrt() * t_ns).sin();
    4.0 * g * g / w2 * s * s
}

/// Affine readout model `scale·p1 + baseline`.
pub fn contrast_map(p1: &[f64], scale: f64, baseline: f64) -> Result<Vec<f64>> {
    if !scale.is_finite() || !baseline.is_finite() {
        return Err(Error::config("contrast scale and baseline must be finite"));
    }
    Ok(p1.iter().map(|p| scale * p + baseline).collect())
}

#[cfg(test)]
mod tests;
