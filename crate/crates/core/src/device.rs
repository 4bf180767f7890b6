//! Device parameters, the four-mode Hamiltonian and the perturbative
//! effective coupling between the two qubits.
//!
//! Mode order on every device space is fixed: resonator a, resonator b,
//! qubit 1, qubit 2 (see [`MODE_A`] .. [`MODE_Q2`]).

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fock::{self, CMatrix, HilbertSpace, OperatorMatrix, C64};
use crate::units::ghz_to_rad_per_ns;
use crate::{Error, Result};

pub const MODE_A: usize = 0;
pub const MODE_B: usize = 1;
pub const MODE_Q1: usize = 2;
pub const MODE_Q2: usize = 3;
pub const MODE_NAMES: [&str; 4] = ["a", "b", "q1", "q2"];

/// Smallest |ω_β - ω_λ| (GHz) accepted by [`effective_coupling`].
pub const DEGENERACY_GUARD_GHZ: f64 = 1e-6;

/// Residual |g_eff| (GHz) at which [`find_switch_off`] stops.
pub const SWITCH_OFF_TOLERANCE_GHZ: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Qubit {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Qubit {
    pub fn mode(self) -> usize {
        match self {
            Qubit::One => MODE_Q1,
            Qubit::Two => MODE_Q2,
        }
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Qubit::One => f.write_str("1"),
            Qubit::Two => f.write_str("2"),
        }
    }
}

/// Everything needed to write down the device Hamiltonian.
///
/// Frequencies and couplings are linear GHz, coherence times µs, flux in the
/// control unit of the sweep (mA for DC bias, mV for pulse amplitude).
/// Missing keys in a JSON document fall back to [`DeviceParams::default`];
/// unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    pub resonator_freq_a: f64,
    pub resonator_freq_b: f64,
    pub qubit_max_freq_1: f64,
    pub qubit_max_freq_2: f64,
    pub anharmonicity_1: f64,
    pub anharmonicity_2: f64,
    pub g_a1: f64,
    pub g_a2: f64,
    pub g_b1: f64,
    pub g_b2: f64,
    pub g_ab: f64,
    pub g_12: f64,
    pub flux_period_1: f64,
    pub flux_period_2: f64,
    pub flux_offset_1: f64,
    pub flux_offset_2: f64,
    pub t1_qubit1: f64,
    pub t1_qubit2: f64,
    pub t2_qubit1: f64,
    pub t2_qubit2: f64,
    /// Photon lifetime of resonator a in µs; `None` leaves the mode lossless.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resonator_t1_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resonator_t1_b: Option<f64>,
}

impl Default for DeviceParams {
    /// The measured device: resonators at 4.47 / 4.80 GHz, qubit sweet spots
    /// at 4.641 / 4.91 GHz, 27 MHz (a) and 30 MHz (b) qubit-resonator
    /// couplings and a 0.88 MHz direct qubit-qubit coupling.
    ///
    /// Anharmonicity, coherence times and the flux calibration were not
    /// reported for this device; the values here are typical transmon
    /// placeholders.
    fn default() -> Self {
        Self {
            resonator_freq_a: 4.47,
            resonator_freq_b: 4.80,
            qubit_max_freq_1: 4.641,
            qubit_max_freq_2: 4.91,
            anharmonicity_1: -0.250,
            anharmonicity_2: -0.250,
            g_a1: 0.027,
            g_a2: 0.027,
            g_b1: 0.030,
            g_b2: 0.030,
            g_ab: 0.0,
            g_12: 0.00088,
            flux_period_1: 1.0,
            flux_period_2: 1.0,
            flux_offset_1: 0.0,
            flux_offset_2: 0.0,
            t1_qubit1: 10.0,
            t1_qubit2: 10.0,
            t2_qubit1: 1.5,
            t2_qubit2: 1.5,
            resonator_t1_a: None,
            resonator_t1_b: None,
        }
    }
}

impl DeviceParams {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: Self =
            serde_json::from_str(s).map_err(|e| Error::config(format!("device config: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(format!("cannot read device config {}: {e}", path.display()))
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Same device with every coherence time infinite.
    pub fn lossless(mut self) -> Self {
        self.t1_qubit1 = f64::INFINITY;
        self.t1_qubit2 = f64::INFINITY;
        self.t2_qubit1 = f64::INFINITY;
        self.t2_qubit2 = f64::INFINITY;
        self.resonator_t1_a = None;
        self.resonator_t1_b = None;
        self
    }

    pub fn max_freq(&self, q: Qubit) -> f64 {
        match q {
            Qubit::One => self.qubit_max_freq_1,
            Qubit::Two => self.qubit_max_freq_2,
        }
    }

    pub fn anharmonicity(&self, q: Qubit) -> f64 {
        match q {
            Qubit::One => self.anharmonicity_1,
            Qubit::Two => self.anharmonicity_2,
        }
    }

    pub fn t1(&self, q: Qubit) -> f64 {
        match q {
            Qubit::One => self.t1_qubit1,
            Qubit::Two => self.t1_qubit2,
        }
    }

    pub fn t2(&self, q: Qubit) -> f64 {
        match q {
            Qubit::One => self.t2_qubit1,
            Qubit::Two => self.t2_qubit2,
        }
    }

    fn flux_calibration(&self, q: Qubit) -> (f64, f64) {
        match q {
            Qubit::One => (self.flux_period_1, self.flux_offset_1),
            Qubit::Two => (self.flux_period_2, self.flux_offset_2),
        }
    }

    /// Couplings `(g_aβ, g_bβ)` of one qubit to the two resonators.
    pub fn resonator_couplings(&self, q: Qubit) -> (f64, f64) {
        match q {
            Qubit::One => (self.g_a1, self.g_b1),
            Qubit::Two => (self.g_a2, self.g_b2),
        }
    }

    pub fn max_qubit_resonator_coupling(&self) -> f64 {
        [self.g_a1, self.g_a2, self.g_b1, self.g_b2]
            .iter()
            .fold(0.0_f64, |m, g| m.max(g.abs()))
    }

    /// Hard invariants. Soft ones are reported by [`DeviceParams::warnings`].
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("resonator_freq_a", self.resonator_freq_a),
            ("resonator_freq_b", self.resonator_freq_b),
            ("qubit_max_freq_1", self.qubit_max_freq_1),
            ("qubit_max_freq_2", self.qubit_max_freq_2),
            ("anharmonicity_1", self.anharmonicity_1),
            ("anharmonicity_2", self.anharmonicity_2),
            ("g_a1", self.g_a1),
            ("g_a2", self.g_a2),
            ("g_b1", self.g_b1),
            ("g_b2", self.g_b2),
            ("g_ab", self.g_ab),
            ("g_12", self.g_12),
            ("flux_period_1", self.flux_period_1),
            ("flux_period_2", self.flux_period_2),
            ("flux_offset_1", self.flux_offset_1),
            ("flux_offset_2", self.flux_offset_2),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in [
            ("resonator_freq_a", self.resonator_freq_a),
            ("resonator_freq_b", self.resonator_freq_b),
            ("qubit_max_freq_1", self.qubit_max_freq_1),
            ("qubit_max_freq_2", self.qubit_max_freq_2),
        ] {
            if v <= 0.0 {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.resonator_freq_a >= self.resonator_freq_b {
            return Err(Error::config(format!(
                "resonator a must be the low-frequency resonator ({} >= {})",
                self.resonator_freq_a, self.resonator_freq_b
            )));
        }
        for q in [Qubit::One, Qubit::Two] {
            let (t1, t2) = (self.t1(q), self.t2(q));
            if t1.is_nan() || t2.is_nan() || t1 <= 0.0 || t2 <= 0.0 {
                return Err(Error::config(format!(
                    "qubit {q}: T1 and T2 must be positive"
                )));
            }
            if t2 > 2.0 * t1 {
                return Err(Error::config(format!(
                    "qubit {q}: T2 = {t2} µs exceeds 2·T1 = {} µs",
                    2.0 * t1
                )));
            }
        }
        for (name, t) in [
            ("resonator_t1_a", self.resonator_t1_a),
            ("resonator_t1_b", self.resonator_t1_b),
        ] {
            if let Some(t) = t {
                if t.is_nan() || t <= 0.0 {
                    return Err(Error::config(format!("{name} must be positive, got {t}")));
                }
            }
        }
        Ok(())
    }

    /// Soft sanity checks; the device is still usable when these fire.
    pub fn warnings(&self) -> Vec<String> {
        let min_mode = [
            self.resonator_freq_a,
            self.resonator_freq_b,
            self.qubit_max_freq_1,
            self.qubit_max_freq_2,
        ]
        .iter()
        .fold(f64::INFINITY, |m, &f| m.min(f));
        [
            ("g_a1", self.g_a1),
            ("g_a2", self.g_a2),
            ("g_b1", self.g_b1),
            ("g_b2", self.g_b2),
            ("g_ab", self.g_ab),
            ("g_12", self.g_12),
        ]
        .iter()
        .filter(|(_, g)| g.abs() >= min_mode / 10.0)
        .map(|(name, g)| {
            format!("coupling {name} = {g} GHz is not small against the lowest mode frequency {min_mode} GHz")
        })
        .collect()
    }
}

/// Instantaneous transition frequencies of the two qubits, GHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub qubit_freq_1: f64,
    pub qubit_freq_2: f64,
}

impl OperatingPoint {
    pub fn new(qubit_freq_1: f64, qubit_freq_2: f64) -> Result<Self> {
        let p = Self {
            qubit_freq_1,
            qubit_freq_2,
        };
        p.validate()?;
        Ok(p)
    }

    /// Both qubits at the same frequency.
    pub fn co_tuned(freq: f64) -> Result<Self> {
        Self::new(freq, freq)
    }

    pub fn validate(&self) -> Result<()> {
        for (q, f) in [(1, self.qubit_freq_1), (2, self.qubit_freq_2)] {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::config(format!(
                    "qubit {q} frequency must be positive and finite, got {f}"
                )));
            }
        }
        Ok(())
    }

    pub fn freq(&self, q: Qubit) -> f64 {
        match q {
            Qubit::One => self.qubit_freq_1,
            Qubit::Two => self.qubit_freq_2,
        }
    }

    pub fn with_freq(mut self, q: Qubit, f: f64) -> Self {
        match q {
            Qubit::One => self.qubit_freq_1 = f,
            Qubit::Two => self.qubit_freq_2 = f,
        }
        self
    }
}

/// Mode-resolved pieces of the device Hamiltonian on a fixed space.
///
/// Each piece is real and stored in units of its coefficient, so that a
/// sweep only re-weights precomputed matrices. `exchange(i, j)` holds
/// `c_i† c_j + c_i c_j† - c_i† c_j† - c_i c_j`.
#[derive(Clone, Debug)]
pub struct HamiltonianTerms {
    space: HilbertSpace,
    number: [DMatrix<f64>; 4],
    kerr: [DMatrix<f64>; 2],
    exchange: Vec<((usize, usize), DMatrix<f64>)>,
}

const COUPLED_PAIRS: [(usize, usize); 6] = [
    (MODE_A, MODE_Q1),
    (MODE_A, MODE_Q2),
    (MODE_B, MODE_Q1),
    (MODE_B, MODE_Q2),
    (MODE_A, MODE_B),
    (MODE_Q1, MODE_Q2),
];

fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

impl HamiltonianTerms {
    pub fn new(space: &HilbertSpace) -> Result<Self> {
        if space.mode_count() != 4 {
            return Err(Error::config(format!(
                "device Hamiltonian needs 4 modes (a, b, q1, q2), space has {}",
                space.mode_count()
            )));
        }
        let lower: Vec<DMatrix<f64>> = (0..4)
            .map(|m| fock::lowering_operator(space, m).map(|op| real_part(op.matrix())))
            .collect::<Result<_>>()?;
        let raise: Vec<DMatrix<f64>> = lower.iter().map(|a| a.transpose()).collect();
        let number = std::array::from_fn(|m| &raise[m] * &lower[m]);
        let kerr = [MODE_Q1, MODE_Q2].map(|m| &raise[m] * &raise[m] * &lower[m] * &lower[m]);
        let exchange = COUPLED_PAIRS
            .iter()
            .map(|&(i, j)| {
                let term = &raise[i] * &lower[j] + &lower[i] * &raise[j]
                    - &raise[i] * &raise[j]
                    - &lower[i] * &lower[j];
                ((i, j), term)
            })
            .collect();
        Ok(Self {
            space: space.clone(),
            number,
            kerr,
            exchange,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    /// `H/ħ` in rad/ns as a real symmetric matrix.
    pub fn assemble_real(
        &self,
        params: &DeviceParams,
        point: &OperatingPoint,
    ) -> Result<DMatrix<f64>> {
        params.validate()?;
        point.validate()?;
        let w = ghz_to_rad_per_ns;
        let mode_freqs = [
            params.resonator_freq_a,
            params.resonator_freq_b,
            point.qubit_freq_1,
            point.qubit_freq_2,
        ];
        let n = self.space.total_dim();
        let mut h = DMatrix::<f64>::zeros(n, n);
        for (m, f) in mode_freqs.iter().enumerate() {
            h += &self.number[m] * w(*f);
        }
        h += &self.kerr[0] * w(params.anharmonicity_1);
        h += &self.kerr[1] * w(params.anharmonicity_2);
        for ((i, j), term) in &self.exchange {
            let g = pair_coupling(params, *i, *j);
            if g != 0.0 {
                h += term * w(g);
            }
        }
        Ok(h)
    }

    pub fn assemble(
        &self,
        params: &DeviceParams,
        point: &OperatingPoint,
    ) -> Result<OperatorMatrix> {
        let h = self.assemble_real(params, point)?.map(|x| C64::new(x, 0.0));
        OperatorMatrix::new(self.space.clone(), h)
    }
}

fn pair_coupling(p: &DeviceParams, i: usize, j: usize) -> f64 {
    match (i, j) {
        (MODE_A, MODE_Q1) => p.g_a1,
        (MODE_A, MODE_Q2) => p.g_a2,
        (MODE_B, MODE_Q1) => p.g_b1,
        (MODE_B, MODE_Q2) => p.g_b2,
        (MODE_A, MODE_B) => p.g_ab,
        (MODE_Q1, MODE_Q2) => p.g_12,
        _ => unreachable!("no coupling between modes {i} and {j}"),
    }
}

/// Full device Hamiltonian `H/ħ` in rad/ns, counter-rotating terms included.
///
/// Mode transition frequencies enter with unit weight (`ω c†c`), so a bare
/// mode at `f` GHz sits at `2π f` rad/ns.
pub fn build_hamiltonian(
    params: &DeviceParams,
    point: &OperatingPoint,
    space: &HilbertSpace,
) -> Result<OperatorMatrix> {
    HamiltonianTerms::new(space)?.assemble(params, point)
}

/// Perturbative effective qubit-qubit coupling in GHz.
///
/// `g_eff = ½ Σ_{λ,β} (g_λ1 g_λ2 / Δ_λβ − g_λ1 g_λ2 / Σ_λβ) + g_12` with
/// `Δ_λβ = ω_β − ω_λ` and `Σ_λβ = ω_β + ω_λ`.
pub fn effective_coupling(params: &DeviceParams, point: &OperatingPoint) -> Result<f64> {
    let contributions = resonator_contributions(params, point)?;
    Ok(contributions.iter().sum::<f64>() + params.g_12)
}

/// The resonator-a and resonator-b parts of [`effective_coupling`], GHz.
pub fn resonator_contributions(params: &DeviceParams, point: &OperatingPoint) -> Result<[f64; 2]> {
    point.validate()?;
    let resonators = [
        ("a", params.resonator_freq_a, params.g_a1 * params.g_a2),
        ("b", params.resonator_freq_b, params.g_b1 * params.g_b2),
    ];
    let mut out = [0.0; 2];
    for (slot, (name, wr, gg)) in out.iter_mut().zip(resonators) {
        for q in [Qubit::One, Qubit::Two] {
            let wq = point.freq(q);
            let delta = wq - wr;
            if delta.abs() <= DEGENERACY_GUARD_GHZ {
                return Err(Error::domain(format!(
                    "Δ_{name}{q} = ω_{q} − ω_{name} vanishes ({delta:e} GHz): qubit {q} is degenerate with resonator {name}"
                )));
            }
            *slot += 0.5 * (gg / delta - gg / (wq + wr));
        }
    }
    Ok(out)
}

/// Co-tuned frequency at which [`effective_coupling`] vanishes, by bisection.
///
/// Inside `(ω_a, ω_b)` every `Δ` term is monotone in the common qubit
/// frequency, so a sign change brackets exactly one root.
pub fn find_switch_off(params: &DeviceParams, search_interval: (f64, f64)) -> Result<f64> {
    let (lo, hi) = search_interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::config(format!("bad search interval ({lo}, {hi})")));
    }
    if !(lo > params.resonator_freq_a && hi < params.resonator_freq_b) {
        return Err(Error::domain(format!(
            "no sign change: search interval ({lo}, {hi}) GHz must lie strictly inside ({}, {}) GHz",
            params.resonator_freq_a, params.resonator_freq_b
        )));
    }
    let g = |w: f64| effective_coupling(params, &OperatingPoint::co_tuned(w)?);
    let (mut a, mut b) = (lo, hi);
    let (mut ga, gb) = (g(a)?, g(b)?);
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(Error::domain(format!(
            "no sign change of g_eff on ({lo}, {hi}) GHz: g_eff({lo}) = {:.6} MHz, g_eff({hi}) = {:.6} MHz",
            ga * 1e3,
            gb * 1e3
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let gm = g(mid)?;
        if gm == 0.0 || (b - a) < 1e-13 {
            return Ok(mid);
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    let root = 0.5 * (a + b);
    if g(root)?.abs() >= SWITCH_OFF_TOLERANCE_GHZ {
        return Err(Error::numerical(format!("bisection stalled at {root} GHz")));
    }
    Ok(root)
}

/// Symmetric-transmon tuning law `ω(x) = ω_max √|cos(π (x − offset) / period)|`.
pub fn flux_to_frequency(params: &DeviceParams, qubit: Qubit, control_value: f64) -> Result<f64> {
    let (period, offset) = params.flux_calibration(qubit);
    if !control_value.is_finite() {
        return Err(Error::config(format!(
            "control value must be finite, got {control_value}"
        )));
    }
    if period == 0.0 || !period.is_finite() {
        return Err(Error::config(format!(
            "qubit {qubit}: flux period must be nonzero"
        )));
    }
    let phase = PI * (control_value - offset) / period;
    Ok(params.max_freq(qubit) * phase.cos().abs().sqrt())
}

/// Which side of the sweet spot [`frequency_to_flux`] lands on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Positive,
    Negative,
}

/// Inverse of [`flux_to_frequency`] within the first lobe around the sweet spot.
pub fn frequency_to_flux(
    params: &DeviceParams,
    qubit: Qubit,
    target: f64,
    branch: Branch,
) -> Result<f64> {
    let (period, offset) = params.flux_calibration(qubit);
    let wmax = params.max_freq(qubit);
    if period == 0.0 || !period.is_finite() {
        return Err(Error::config(format!(
            "qubit {qubit}: flux period must be nonzero"
        )));
    }
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::config(format!(
            "target frequency must be positive, got {target}"
        )));
    }
    if target > wmax {
        return Err(Error::domain(format!(
            "target {target} GHz is above the maximum frequency {wmax} GHz of qubit {qubit}"
        )));
    }
    let u = (target / wmax).powi(2).clamp(0.0, 1.0).acos() / PI;
    let sign = match branch {
        Branch::Positive => 1.0,
        Branch::Negative => -1.0,
    };
    Ok(offset + sign * u * period)
}
