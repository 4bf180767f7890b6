//! Vacuum-Rabi chevron: qubit-1 population versus interaction time and
//! qubit-qubit detuning after exciting qubit 2.

use std::io::Write;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::propagator::{to_coords, Evolver};
use super::{collapse_operators, default_step, max_bohr_frequency, DensityState, Lindbladian};
use crate::device::{DeviceParams, HamiltonianTerms, OperatingPoint, Qubit, MODE_Q1};
use crate::fock::{level_projector, CMatrix, CVector, HilbertSpace, C64};
use crate::spectroscopy::dressed_qubits;
use crate::{Error, Result};

/// Idle point used for state preparation and padding.
pub const DEFAULT_BIAS: OperatingPoint = OperatingPoint {
    qubit_freq_1: 4.637,
    qubit_freq_2: 4.691,
};

/// How the excitation is prepared and read out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Ideal flip of bare qubit 2 from the bare vacuum, sudden steps, and a
    /// projective readout of bare qubit 1.
    #[default]
    Bare,
    /// Start in the dressed qubit-2 state of the interaction point and read
    /// the dressed qubit-1 population, as with adiabatic flux edges.
    Dressed,
}

/// 41 offsets spanning ±20 MHz.
pub fn default_offsets_mhz() -> Vec<f64> {
    (0..41).map(|i| -20.0 + i as f64).collect()
}

/// 201 interaction times spanning 0..2000 ns.
pub fn default_taus_ns() -> Vec<f64> {
    (0..201).map(|i| 10.0 * i as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChevronConfig {
    pub bias: OperatingPoint,
    /// Interaction frequency of qubit 2, GHz.
    pub q2_target_ghz: f64,
    /// Qubit-1 interaction frequency relative to `q2_target_ghz`, MHz.
    pub q1_offsets_mhz: Vec<f64>,
    pub taus_ns: Vec<f64>,
    pub frame: Frame,
    /// Fixed prep-to-readout interval, ns; the remainder after the
    /// interaction is spent at `bias`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_interval_ns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step_ns: Option<f64>,
}

impl Default for ChevronConfig {
    fn default() -> Self {
        Self {
            bias: DEFAULT_BIAS,
            q2_target_ghz: 4.58,
            q1_offsets_mhz: default_offsets_mhz(),
            taus_ns: default_taus_ns(),
            frame: Frame::Bare,
            fixed_interval_ns: None,
            max_step_ns: None,
        }
    }
}

impl ChevronConfig {
    pub fn new(q2_target_ghz: f64) -> Self {
        Self {
            q2_target_ghz,
            ..Self::default()
        }
    }

    pub fn validate(&self, params: &DeviceParams) -> Result<()> {
        self.bias.validate()?;
        if !self.q2_target_ghz.is_finite() || self.q2_target_ghz <= 0.0 {
            return Err(Error::config(format!(
                "invalid qubit-2 target {}",
                self.q2_target_ghz
            )));
        }
        if self.q1_offsets_mhz.is_empty() || self.q1_offsets_mhz.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("detuning grid must be non-empty and finite"));
        }
        if self.taus_ns.is_empty() {
            return Err(Error::config("interaction-time grid is empty"));
        }
        if self.taus_ns.iter().any(|t| !t.is_finite() || *t < 0.0)
            || self.taus_ns.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::config(
                "interaction times must be non-negative and strictly increasing",
            ));
        }
        if let Some(h) = self.max_step_ns {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::config(format!(
                    "integration step must be positive, got {h}"
                )));
            }
        }
        if let Some(fixed) = self.fixed_interval_ns {
            let longest = self.taus_ns[self.taus_ns.len() - 1];
            if !fixed.is_finite() || fixed < longest {
                return Err(Error::config(format!(
                    "fixed prep-to-readout interval {fixed} ns is shorter than the longest interaction time {longest} ns"
                )));
            }
            if self.frame == Frame::Dressed {
                return Err(Error::config(
                    "padding to a fixed interval needs the bare frame",
                ));
            }
        }
        let guard = 3.0 * params.max_qubit_resonator_coupling();
        for (name, fr) in [
            ("a", params.resonator_freq_a),
            ("b", params.resonator_freq_b),
        ] {
            if (self.q2_target_ghz - fr).abs() < guard - 1e-12 {
                return Err(Error::domain(format!(
                    "qubit-2 target {} GHz is within {:.1} MHz of resonator {name} ({fr} GHz)",
                    self.q2_target_ghz,
                    guard * 1e3
                )));
            }
        }
        Ok(())
    }

    pub fn interaction_point(&self, offset_mhz: f64) -> Result<OperatingPoint> {
        OperatingPoint::new(self.q2_target_ghz + offset_mhz * 1e-3, self.q2_target_ghz)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChevronMap {
    pub detunings_mhz: Vec<f64>,
    pub taus_ns: Vec<f64>,
    /// `p1[i][k]`: qubit-1 excited population at `detunings_mhz[i]`, `taus_ns[k]`.
    pub p1: Vec<Vec<f64>>,
    pub step_ns: f64,
}

impl ChevronMap {
    pub fn column(&self, i: usize) -> &[f64] {
        &self.p1[i]
    }

    /// Rows ordered detuning-major. `contrast` adds an affine readout column.
    pub fn write_csv<W: Write>(&self, out: W, contrast: Option<(f64, f64)>) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["detuning_mhz", "tau_ns", "p1"];
        if contrast.is_some() {
            header.push("contrast");
        }
        w.write_record(&header)?;
        for (i, d) in self.detunings_mhz.iter().enumerate() {
            for (k, t) in self.taus_ns.iter().enumerate() {
                let p = self.p1[i][k];
                let mut row = vec![d.to_string(), t.to_string(), p.to_string()];
                if let Some((scale, baseline)) = contrast {
                    row.push((scale * p + baseline).to_string());
                }
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// JSON record of everything needed to regenerate this map.
    pub fn sidecar(
        &self,
        params: &DeviceParams,
        config: &ChevronConfig,
        space: &HilbertSpace,
    ) -> serde_json::Value {
        serde_json::json!({
            "device": params,
            "chevron": config,
            "dims": space.dims(),
            "integrator": {
                "method": "rk4",
                "step_ns": self.step_ns,
            },
        })
    }
}

/// Runs the prepare / interact / read sequence for every detuning and
/// interaction time. Columns are independent and run in parallel.
pub fn vacuum_rabi_chevron(
    params: &DeviceParams,
    config: &ChevronConfig,
    space: &HilbertSpace,
) -> Result<ChevronMap> {
    params.validate()?;
    config.validate(params)?;
    let terms = HamiltonianTerms::new(space)?;
    let jumps: Vec<CMatrix> = collapse_operators(params, space)?
        .into_iter()
        .map(|c| c.operator)
        .collect();
    let points: Vec<OperatingPoint> = config
        .q1_offsets_mhz
        .iter()
        .map(|&o| config.interaction_point(o))
        .collect::<Result<_>>()?;
    let bias_h = terms.assemble(params, &config.bias)?.into_matrix();
    let step = match config.max_step_ns {
        Some(h) => h,
        None => {
            let mut f = max_bohr_frequency(&bias_h)?;
            for p in &points {
                f = f.max(max_bohr_frequency(
                    &terms.assemble(params, p)?.into_matrix(),
                )?);
            }
            default_step(f)
        }
    };
    let p1 = points
        .par_iter()
        .map(|p| column(params, config, space, &terms, &jumps, &bias_h, step, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChevronMap {
        detunings_mhz: config.q1_offsets_mhz.clone(),
        taus_ns: config.taus_ns.clone(),
        p1,
        step_ns: step,
    })
}

#[allow(clippy::too_many_arguments)]
fn column(
    params: &DeviceParams,
    config: &ChevronConfig,
    space: &HilbertSpace,
    terms: &HamiltonianTerms,
    jumps: &[CMatrix],
    bias_h: &CMatrix,
    step: f64,
    point: &OperatingPoint,
) -> Result<Vec<f64>> {
    let (rho0, readout) = match config.frame {
        Frame::Bare => (
            DensityState::vacuum(space.clone()).flipped(Qubit::Two)?,
            level_projector(space, MODE_Q1, 1)?.into_matrix(),
        ),
        Frame::Dressed => {
            let dq = dressed_qubits(terms, params, point)?;
            let psi2: CVector = dq.qubit2.map(|x| C64::new(x, 0.0));
            let psi1: CVector = dq.qubit1.map(|x| C64::new(x, 0.0));
            (
                DensityState::pure(space.clone(), &psi2)?,
                &psi1 * psi1.adjoint(),
            )
        }
    };
    let h = terms.assemble(params, point)?.into_matrix();
    let mut interact = Evolver::new(Lindbladian::new(&h, jumps)?, step);
    let taus = &config.taus_ns;
    let increments: Vec<f64> = taus
        .iter()
        .scan(0.0, |prev, &t| {
            let d = t - *prev;
            *prev = t;
            Some(d)
        })
        .collect();

    match config.fixed_interval_ns {
        None if interact.uses_superoperator() => {
            let o = to_coords(&readout);
            let mut x = to_coords(rho0.matrix());
            Ok(increments
                .iter()
                .map(|&d| {
                    x = interact.advance_coords(&x, d);
                    o.dot(&x)
                })
                .collect())
        }
        None => {
            let mut rho = rho0.matrix().clone();
            Ok(increments
                .iter()
                .map(|&d| {
                    rho = interact.advance(&rho, d);
                    (&readout * &rho).trace().re
                })
                .collect())
        }
        Some(fixed) => {
            let mut idle = Evolver::new(Lindbladian::new(bias_h, jumps)?, step);
            if interact.uses_superoperator() {
                // Pull the readout back through the padding, longest τ
                // (shortest padding) first.
                let mut xs: Vec<DVector<f64>> = Vec::with_capacity(taus.len());
                let mut x = to_coords(rho0.matrix());
                for &d in &increments {
                    x = interact.advance_coords(&x, d);
                    xs.push(x.clone());
                }
                let n = taus.len();
                let mut out = vec![0.0; n];
                let mut v = idle.pull_back_coords(&to_coords(&readout), fixed - taus[n - 1]);
                out[n - 1] = v.dot(&xs[n - 1]);
                for k in (0..n - 1).rev() {
                    v = idle.pull_back_coords(&v, taus[k + 1] - taus[k]);
                    out[k] = v.dot(&xs[k]);
                }
                Ok(out)
            } else {
                let mut rho = rho0.matrix().clone();
                Ok(increments
                    .iter()
                    .zip(taus)
                    .map(|(&d, &t)| {
                        rho = interact.advance(&rho, d);
                        let padded = idle.advance(&rho, fixed - t);
                        (&readout * &padded).trace().re
                    })
                    .collect())
            }
        }
    }
}
