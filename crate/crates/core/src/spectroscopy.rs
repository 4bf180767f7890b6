//! Frequency-domain emulation: exact-diagonalization sweeps, dressed-state
//! labels, avoided-crossing gaps and the dressed qubit pair.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{
    flux_to_frequency, DeviceParams, HamiltonianTerms, OperatingPoint, Qubit, MODE_NAMES, MODE_Q1,
    MODE_Q2,
};
use crate::fock::{eigh_real, HilbertSpace};
use crate::units::{ghz_to_mhz, rad_per_ns_to_ghz};
use crate::{Error, Result};

/// Tag given to a level whose best bare-state overlap² does not exceed ½.
pub const MIXED: &str = "mixed";

/// Tags of the four single-excitation bare states, in mode order.
pub const SINGLE_EXCITATION_TAGS: [&str; 4] = ["a", "b", "q1", "q2"];

/// Default number of grid points in a qubit-qubit gap scan.
pub const DEFAULT_GAP_POINTS: usize = 201;

/// Target width of the bracket around the minimum separation, GHz.
pub const GAP_LOCATION_TOLERANCE_GHZ: f64 = 1e-10;

/// Default half width of the qubit-1 scan around the qubit-2 setpoint, MHz.
pub const DEFAULT_GAP_HALF_WIDTH_MHZ: f64 = 15.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Flux1,
    Flux2,
    Freq1,
    Freq2,
}

impl SweepAxis {
    pub fn qubit(self) -> Qubit {
        match self {
            SweepAxis::Flux1 | SweepAxis::Freq1 => Qubit::One,
            SweepAxis::Flux2 | SweepAxis::Freq2 => Qubit::Two,
        }
    }

    pub fn is_flux(self) -> bool {
        matches!(self, SweepAxis::Flux1 | SweepAxis::Flux2)
    }

    /// Unit suffix used in column headers.
    pub fn unit(self) -> &'static str {
        if self.is_flux() {
            "ctrl"
        } else {
            "ghz"
        }
    }

    /// Operating point reached by setting this axis to `value`.
    pub fn apply(
        self,
        params: &DeviceParams,
        fixed: OperatingPoint,
        value: f64,
    ) -> Result<OperatingPoint> {
        let q = self.qubit();
        let f = if self.is_flux() {
            flux_to_frequency(params, q, value)?
        } else {
            value
        };
        let p = fixed.with_freq(q, f);
        p.validate()?;
        Ok(p)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Flux1 => "flux_1",
            SweepAxis::Flux2 => "flux_2",
            SweepAxis::Freq1 => "freq_1",
            SweepAxis::Freq2 => "freq_2",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flux_1" | "flux1" => Ok(SweepAxis::Flux1),
            "flux_2" | "flux2" => Ok(SweepAxis::Flux2),
            "freq_1" | "freq1" => Ok(SweepAxis::Freq1),
            "freq_2" | "freq2" => Ok(SweepAxis::Freq2),
            other => Err(Error::config(format!(
                "unknown sweep axis '{other}' (expected flux_1, flux_2, freq_1 or freq_2)"
            ))),
        }
    }
}

/// Dressed-level identity at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelLabel {
    /// Bare product-state tag with the largest overlap, or [`MIXED`].
    pub tag: String,
    /// Largest overlap magnitude |<bare|level>|.
    pub overlap: f64,
    /// Tag carried through mixed windows by eigenvector continuity.
    pub track: String,
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub operating_point: OperatingPoint,
    /// Eigenfrequencies relative to the ground state, GHz, ascending.
    pub levels: Vec<f64>,
    pub labels: Vec<LevelLabel>,
    /// Per level: weights on the bare single-excitation states (a, b, q1, q2).
    pub single_weights: Vec<[f64; 4]>,
}

#[derive(Clone, Debug)]
pub struct SpectrumSweep {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

/// Tag of a bare product state: "g" for vacuum, otherwise occupied modes
/// joined by '+', with the occupation prefixed when above one ("2q1").
pub fn bare_tag(space: &HilbertSpace, index: usize) -> String {
    let occ = space.occupations(index);
    let parts: Vec<String> = occ
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(m, &n)| {
            let name = MODE_NAMES.get(m).copied().unwrap_or("m");
            if n == 1 {
                name.to_string()
            } else {
                format!("{n}{name}")
            }
        })
        .collect();
    if parts.is_empty() {
        "g".to_string()
    } else {
        parts.join("+")
    }
}

/// Diagonalized device at one operating point.
struct Diagonal {
    /// Eigenvalues in rad/ns, ascending.
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

fn diagonalize(
    terms: &HamiltonianTerms,
    params: &DeviceParams,
    point: &OperatingPoint,
) -> Result<Diagonal> {
    let h = terms.assemble_real(params, point)?;
    let (values, vectors) = eigh_real(&h)?;
    Ok(Diagonal { values, vectors })
}

fn single_excitation_indices(space: &HilbertSpace) -> [usize; 4] {
    let mut out = [0; 4];
    for (m, slot) in out.iter_mut().enumerate() {
        let mut occ = [0usize; 4];
        occ[m] = 1;
        *slot = space
            .index_of(&occ)
            .expect("device spaces have 4 modes of dim >= 2");
    }
    out
}

impl Diagonal {
    fn levels_ghz(&self) -> Vec<f64> {
        let e0 = self.values[0];
        self.values
            .iter()
            .map(|&e| rad_per_ns_to_ghz(e - e0))
            .collect()
    }

    fn single_weights(&self, idx: &[usize; 4]) -> Vec<[f64; 4]> {
        (0..self.values.len())
            .map(|j| idx.map(|i| self.vectors[(i, j)].powi(2)))
            .collect()
    }

    /// The two levels with the largest combined weight on the given bare
    /// states, returned in ascending energy order.
    fn dominant_pair(&self, bare: [usize; 2]) -> (usize, usize) {
        let weight = |j: usize| {
            bare.iter()
                .map(|&i| self.vectors[(i, j)].powi(2))
                .sum::<f64>()
        };
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&x, &y| weight(y).total_cmp(&weight(x)).then(x.cmp(&y)));
        let (i, j) = (order[0], order[1]);
        (i.min(j), i.max(j))
    }
}

/// Diagonalizes the device at every sweep value and labels the levels.
///
/// Points are evaluated in parallel and assembled in input order.
pub fn sweep_spectrum(
    params: &DeviceParams,
    axis: SweepAxis,
    values: &[f64],
    fixed_other: OperatingPoint,
    space: &HilbertSpace,
) -> Result<SpectrumSweep> {
    params.validate()?;
    check_monotone(values)?;
    let terms = HamiltonianTerms::new(space)?;
    let idx = single_excitation_indices(space);
    let diagonals: Vec<(OperatingPoint, Diagonal)> = values
        .par_iter()
        .map(|&v| {
            let point = axis.apply(params, fixed_other, v)?;
            Ok((point, diagonalize(&terms, params, &point)?))
        })
        .collect::<Result<_>>()?;

    let n = space.total_dim();
    let tags: Vec<String> = (0..n).map(|i| bare_tag(space, i)).collect();
    let mut points = Vec::with_capacity(values.len());
    let mut previous: Option<(&DMatrix<f64>, Vec<LevelLabel>)> = None;
    for (&value, (point, diag)) in values.iter().zip(&diagonals) {
        let mut labels = Vec::with_capacity(n);
        for j in 0..n {
            let col = diag.vectors.column(j);
            let (best, overlap) = col.iter().enumerate().fold((0, -1.0), |(bi, bo), (i, x)| {
                if x.abs() > bo {
                    (i, x.abs())
                } else {
                    (bi, bo)
                }
            });
            let tag = if overlap * overlap > 0.5 {
                tags[best].clone()
            } else {
                MIXED.to_string()
            };
            let track = if tag != MIXED {
                tag.clone()
            } else if let Some((prev_vecs, prev_labels)) = &previous {
                let (k, _) = (0..n).fold((0, -1.0), |(bk, bo), k| {
                    let o = prev_vecs.column(k).dot(&col).abs();
                    if o > bo {
                        (k, o)
                    } else {
                        (bk, bo)
                    }
                });
                prev_labels[k].track.clone()
            } else {
                MIXED.to_string()
            };
            labels.push(LevelLabel {
                tag,
                overlap,
                track,
            });
        }
        points.push(SweepPoint {
            value,
            operating_point: *point,
            levels: diag.levels_ghz(),
            labels: labels.clone(),
            single_weights: diag.single_weights(&idx),
        });
        previous = Some((&diag.vectors, labels));
    }
    Ok(SpectrumSweep { axis, points })
}

fn check_monotone(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("sweep values must be finite"));
    }
    let inc = values.windows(2).all(|w| w[1] > w[0]);
    let dec = values.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(Error::config("sweep values must be strictly monotone"));
    }
    Ok(())
}

/// Minimum-separation point of an avoided crossing seen in a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Anticrossing {
    pub moving: String,
    pub partner: String,
    pub gap_mhz: f64,
    /// Sweep value at the minimum separation.
    pub location: f64,
    /// Level indices of the pair at the grid minimum.
    pub level_pair: (usize, usize),
}

impl SpectrumSweep {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Avoided crossings between the single-excitation state `moving` and
    /// every other single-excitation state it passes during the sweep.
    pub fn anticrossings(&self, moving: &str) -> Result<Vec<Anticrossing>> {
        let m = tag_slot(moving)?;
        let mut out = Vec::new();
        for (p, partner) in SINGLE_EXCITATION_TAGS.iter().enumerate() {
            if p == m {
                continue;
            }
            let pairs: Vec<(usize, usize)> = self
                .points
                .iter()
                .map(|pt| pt.dominant_pair(m, p))
                .collect();
            let seps: Vec<f64> = self
                .points
                .iter()
                .zip(&pairs)
                .map(|(pt, &(lo, hi))| pt.levels[hi] - pt.levels[lo])
                .collect();
            // Sign of (moving − partner) character of the lower level.
            let character: Vec<f64> = self
                .points
                .iter()
                .zip(&pairs)
                .map(|(pt, &(lo, _))| pt.single_weights[lo][m] - pt.single_weights[lo][p])
                .collect();
            let mut i = 0;
            while i + 1 < self.points.len() {
                if character[i].signum() != character[i + 1].signum() {
                    let k =
                        descend_to_minimum(&seps, if seps[i] <= seps[i + 1] { i } else { i + 1 });
                    let xs = self.values();
                    let (location, gap) = parabolic_minimum(&xs, &seps, k);
                    let crossing = Anticrossing {
                        moving: moving.to_string(),
                        partner: partner.to_string(),
                        gap_mhz: ghz_to_mhz(gap),
                        location,
                        level_pair: pairs[k],
                    };
                    if !out.iter().any(|c: &Anticrossing| {
                        c.partner == crossing.partner && c.location == crossing.location
                    }) {
                        out.push(crossing);
                    }
                    i = k.max(i + 1);
                } else {
                    i += 1;
                }
            }
        }
        out.sort_by(|a, b| a.location.total_cmp(&b.location));
        Ok(out)
    }

    /// Writes one row per (sweep value, level) for the lowest `max_levels`
    /// levels (all levels when `None`).
    pub fn write_csv<W: Write>(&self, out: W, max_levels: Option<usize>) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            format!("sweep_value_{}", self.axis.unit()),
            "level_index".to_string(),
            "freq_ghz".to_string(),
            "label".to_string(),
            "overlap".to_string(),
        ])?;
        for pt in &self.points {
            let n = max_levels.unwrap_or(pt.levels.len()).min(pt.levels.len());
            for j in 0..n {
                w.write_record([
                    pt.value.to_string(),
                    j.to_string(),
                    pt.levels[j].to_string(),
                    pt.labels[j].tag.clone(),
                    pt.labels[j].overlap.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl SweepPoint {
    fn dominant_pair(&self, m: usize, p: usize) -> (usize, usize) {
        let weight = |j: usize| self.single_weights[j][m] + self.single_weights[j][p];
        let mut order: Vec<usize> = (0..self.levels.len()).collect();
        order.sort_by(|&x, &y| weight(y).total_cmp(&weight(x)).then(x.cmp(&y)));
        let (i, j) = (order[0], order[1]);
        (i.min(j), i.max(j))
    }
}

fn tag_slot(tag: &str) -> Result<usize> {
    SINGLE_EXCITATION_TAGS
        .iter()
        .position(|t| *t == tag)
        .ok_or_else(|| {
            Error::config(format!(
                "'{tag}' is not a single-excitation tag (a, b, q1, q2)"
            ))
        })
}

fn descend_to_minimum(ys: &[f64], mut k: usize) -> usize {
    loop {
        if k > 0 && ys[k - 1] < ys[k] {
            k -= 1;
        } else if k + 1 < ys.len() && ys[k + 1] < ys[k] {
            k += 1;
        } else {
            return k;
        }
    }
}

/// Vertex of the parabola through the grid minimum and its two neighbours.
/// Falls back to the grid point at the ends of the grid.
fn parabolic_minimum(xs: &[f64], ys: &[f64], k: usize) -> (f64, f64) {
    if k == 0 || k + 1 >= xs.len() {
        return (xs[k], ys[k]);
    }
    let (x0, x1, x2) = (xs[k - 1], xs[k], xs[k + 1]);
    let (y0, y1, y2) = (ys[k - 1], ys[k], ys[k + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature <= 0.0 {
        return (x1, y1);
    }
    // y = y1 + d·(x − x1) + c·(x − x1)(x − x0) rewritten around the vertex.
    let slope_at_x1 = d01 + curvature * (x1 - x0);
    let xv = x1 - slope_at_x1 / (2.0 * curvature);
    let yv = y1 + slope_at_x1 * (xv - x1) + curvature * (xv - x1) * (xv - x1);
    (xv, yv.min(y1))
}

/// Minimum separation of the qubit-like dressed pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapResult {
    pub gap_mhz: f64,
    /// Qubit-1 frequency at the minimum, GHz.
    pub location_ghz: f64,
    pub level_pair: (usize, usize),
}

/// Grid for the qubit-1 sweep: `(lo, hi, count)` with frequencies in GHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapSweep {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GapSweep {
    pub fn around(center: f64, half_width_mhz: f64, count: usize) -> Self {
        Self {
            lo: center - half_width_mhz * 1e-3,
            hi: center + half_width_mhz * 1e-3,
            count,
        }
    }

    fn grid(&self) -> Result<Vec<f64>> {
        if self.count < 3 || !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::config(format!(
                "gap sweep needs lo < hi and at least 3 points, got ({}, {}, {})",
                self.lo, self.hi, self.count
            )));
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        Ok((0..self.count).map(|i| self.lo + step * i as f64).collect())
    }
}

/// Sweeps qubit 1 across qubit 2 and returns the minimum separation of the two
/// levels with dominant qubit character. Half the gap estimates |g_eff|.
///
/// Both qubits must stay at least three times the largest qubit-resonator
/// coupling away from both resonators.
pub fn qubit_qubit_gap(
    params: &DeviceParams,
    qubit2_freq: f64,
    sweep_1: GapSweep,
    space: &HilbertSpace,
) -> Result<GapResult> {
    let guard = 3.0 * params.max_qubit_resonator_coupling();
    for (what, f) in [
        ("qubit 2", qubit2_freq),
        ("sweep start", sweep_1.lo),
        ("sweep end", sweep_1.hi),
    ] {
        for (name, fr) in [
            ("a", params.resonator_freq_a),
            ("b", params.resonator_freq_b),
        ] {
            if (f - fr).abs() < guard - 1e-12 {
                return Err(Error::domain(format!(
                    "{what} at {f} GHz is within {:.1} MHz of resonator {name} ({fr} GHz)",
                    guard * 1e3
                )));
            }
        }
    }
    // The guard must also hold between the endpoints.
    for fr in [params.resonator_freq_a, params.resonator_freq_b] {
        if sweep_1.lo < fr && fr < sweep_1.hi {
            return Err(Error::domain(format!(
                "gap sweep crosses the resonator at {fr} GHz"
            )));
        }
    }
    scan_qubit_pair_gap(params, qubit2_freq, sweep_1, space)
}

/// [`qubit_qubit_gap`] without the distance-to-resonator guard.
pub fn scan_qubit_pair_gap(
    params: &DeviceParams,
    qubit2_freq: f64,
    sweep_1: GapSweep,
    space: &HilbertSpace,
) -> Result<GapResult> {
    params.validate()?;
    if !(sweep_1.lo < qubit2_freq && qubit2_freq < sweep_1.hi) {
        return Err(Error::config(format!(
            "qubit-1 sweep ({}, {}) does not bracket qubit 2 at {qubit2_freq} GHz",
            sweep_1.lo, sweep_1.hi
        )));
    }
    let xs = sweep_1.grid()?;
    let terms = HamiltonianTerms::new(space)?;
    let idx = single_excitation_indices(space);
    let bare = [idx[MODE_Q1], idx[MODE_Q2]];
    let separation = |w1: f64| -> Result<(f64, (usize, usize))> {
        let d = diagonalize(&terms, params, &OperatingPoint::new(w1, qubit2_freq)?)?;
        let (lo, hi) = d.dominant_pair(bare);
        Ok((rad_per_ns_to_ghz(d.values[hi] - d.values[lo]), (lo, hi)))
    };
    let seps: Vec<f64> = xs
        .par_iter()
        .map(|&w1| Ok(separation(w1)?.0))
        .collect::<Result<_>>()?;
    let k = seps
        .iter()
        .enumerate()
        .fold(0, |best, (i, &s)| if s < seps[best] { i } else { best });
    if k == 0 || k + 1 == seps.len() {
        return Err(Error::domain(format!(
            "bracket too narrow: minimum separation at sweep endpoint {} GHz",
            xs[k]
        )));
    }
    // Golden-section refinement between the neighbours of the grid minimum.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (xs[k - 1], xs[k + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (separation(c)?.0, separation(d)?.0);
    while b - a > GAP_LOCATION_TOLERANCE_GHZ {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = separation(c)?.0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = separation(d)?.0;
        }
    }
    let location = 0.5 * (a + b);
    let (gap, level_pair) = separation(location)?;
    let (gap, location, level_pair) = if gap <= seps[k] {
        (gap, location, level_pair)
    } else {
        (seps[k], xs[k], separation(xs[k])?.1)
    };
    Ok(GapResult {
        gap_mhz: ghz_to_mhz(gap),
        location_ghz: location,
        level_pair,
    })
}

/// [`qubit_qubit_gap`] at each setpoint; failures are collected per setpoint.
pub fn gap_vs_setpoint(
    params: &DeviceParams,
    setpoints: &[f64],
    half_width_mhz: f64,
    count: usize,
    space: &HilbertSpace,
) -> Vec<Result<GapResult>> {
    setpoints
        .iter()
        .map(|&f| qubit_qubit_gap(params, f, GapSweep::around(f, half_width_mhz, count), space))
        .collect()
}

/// The qubit-like dressed pair at one operating point.
///
/// The two eigenstates with the largest weight on the bare qubit states span
/// an invariant subspace; inside it the bare qubit states are projected and
/// symmetrically (Löwdin) orthonormalized. The result changes smoothly through
/// the qubit-qubit resonance, unlike max-overlap labels.
#[derive(Clone, Debug)]
pub struct DressedQubits {
    pub ground: DVector<f64>,
    pub qubit1: DVector<f64>,
    pub qubit2: DVector<f64>,
    /// Effective Hamiltonian in the (qubit1, qubit2) basis, GHz, relative to
    /// the dressed ground state.
    pub h_eff: Matrix2<f64>,
    pub level_pair: (usize, usize),
}

impl DressedQubits {
    /// Signed exchange coupling, GHz.
    pub fn coupling(&self) -> f64 {
        self.h_eff[(0, 1)]
    }

    /// Dressed detuning `ω̃_2 − ω̃_1`, GHz.
    pub fn detuning(&self) -> f64 {
        self.h_eff[(1, 1)] - self.h_eff[(0, 0)]
    }
}

pub fn dressed_qubits(
    terms: &HamiltonianTerms,
    params: &DeviceParams,
    point: &OperatingPoint,
) -> Result<DressedQubits> {
    let space = terms.space();
    let d = diagonalize(terms, params, point)?;
    let idx = single_excitation_indices(space);
    let (lo, hi) = d.dominant_pair([idx[MODE_Q1], idx[MODE_Q2]]);
    let s = DMatrix::from_columns(&[d.vectors.column(lo), d.vectors.column(hi)]);
    // overlaps[(k, j)] = <level_k | bare q_j>
    let overlaps = Matrix2::new(
        s[(idx[MODE_Q1], 0)],
        s[(idx[MODE_Q2], 0)],
        s[(idx[MODE_Q1], 1)],
        s[(idx[MODE_Q2], 1)],
    );
    if overlaps.determinant().abs() < 1e-6 {
        return Err(Error::domain(format!(
            "qubit character lost at ({}, {}) GHz: dressed pair does not span the bare qubits",
            point.qubit_freq_1, point.qubit_freq_2
        )));
    }
    let gram = overlaps.transpose() * overlaps;
    let eig = gram.symmetric_eigen();
    let inv_sqrt = eig.eigenvectors
        * Matrix2::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()))
        * eig.eigenvectors.transpose();
    let coeffs = overlaps * inv_sqrt;
    let w = &s * DMatrix::from_column_slice(2, 2, coeffs.as_slice());
    let e0 = d.values[0];
    let energies = Matrix2::new(d.values[lo] - e0, 0.0, 0.0, d.values[hi] - e0);
    let h_eff = (coeffs.transpose() * energies * coeffs).map(rad_per_ns_to_ghz);
    Ok(DressedQubits {
        ground: d.vectors.column(0).into_owned(),
        qubit1: w.column(0).into_owned(),
        qubit2: w.column(1).into_owned(),
        h_eff: 0.5 * (h_eff + h_eff.transpose()),
        level_pair: (lo, hi),
    })
}

/// Exact (non-perturbative) signed qubit-qubit coupling in GHz, from the
/// dressed pair. Compare with [`crate::device::effective_coupling`].
pub fn dressed_coupling(
    params: &DeviceParams,
    point: &OperatingPoint,
    space: &HilbertSpace,
) -> Result<f64> {
    let terms = HamiltonianTerms::new(space)?;
    Ok(dressed_qubits(&terms, params, point)?.coupling())
}

/// Co-tuned qubit frequency where the exact dressed coupling vanishes,
/// found by bisection on [`dressed_coupling`].
pub fn find_dressed_switch_off(
    params: &DeviceParams,
    search_interval: (f64, f64),
    space: &HilbertSpace,
) -> Result<f64> {
    let terms = HamiltonianTerms::new(space)?;
    let coupling = |w: f64| -> Result<f64> {
        Ok(dressed_qubits(&terms, params, &OperatingPoint::co_tuned(w)?)?.coupling())
    };
    let (mut lo, mut hi) = search_interval;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::config(format!(
            "invalid search interval ({lo}, {hi})"
        )));
    }
    let (mut f_lo, f_hi) = (coupling(lo)?, coupling(hi)?);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::domain(format!(
            "no sign change of the dressed coupling on ({lo}, {hi}) GHz"
        )));
    }
    while hi - lo > crate::device::SWITCH_OFF_TOLERANCE_GHZ {
        let mid = 0.5 * (lo + hi);
        let f = coupling(mid)?;
        if f == 0.0 {
            return Ok(mid);
        }
        if f.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
