//! Subcommand bodies. Each returns an [`Outcome`]; file writing and the
//! manifest are handled by the caller.

use dualres_core::device::{
    effective_coupling, find_switch_off, DeviceParams, OperatingPoint, Qubit,
};
use dualres_core::dynamics::{vacuum_rabi_chevron, ChevronConfig, ChevronMap, Frame};
use dualres_core::fitting::{fit_damped_cosine, fit_exp_decay, geff_from_chevron, TimeTrace};
use dualres_core::fock::HilbertSpace;
use dualres_core::spectroscopy::{
    dressed_coupling, gap_vs_setpoint, scan_qubit_pair_gap, sweep_spectrum, GapSweep, SweepAxis,
};
use dualres_core::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use serde_json::json;

use crate::grid::{parse_dims, parse_grid, parse_pair};
use crate::svg::{heatmap, line_plot, Series};
use crate::{
    Artifact, ChevronArgs, FitArgs, FrameArg, GapscanArgs, GeffArgs, ModelArg, Outcome,
    SpectrumArgs,
};

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn opt(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else {
        String::new()
    }
}

pub fn spectrum(params: &DeviceParams, args: &SpectrumArgs) -> Result<Outcome> {
    let axis: SweepAxis = args.axis.parse()?;
    let values = parse_grid(&args.sweep)?;
    if values.len() < 2 {
        return Err(Error::Config(
            "spectrum sweep needs at least 2 points".into(),
        ));
    }
    let space = HilbertSpace::new(&parse_dims(&args.dims)?)?;
    let moving = axis.qubit();
    let other = match moving {
        Qubit::One => Qubit::Two,
        Qubit::Two => Qubit::One,
    };
    let other_freq = args.other.unwrap_or_else(|| params.max_freq(other));
    let fixed = OperatingPoint::co_tuned(other_freq)?;
    let sweep = sweep_spectrum(params, axis, &values, fixed, &space)?;
    let tag = match moving {
        Qubit::One => "q1",
        Qubit::Two => "q2",
    };
    let crossings = sweep.anticrossings(tag)?;

    let levels = args.levels.min(space.total_dim() - 1);
    let csv = csv_bytes(|b| sweep.write_csv(b, Some(levels + 1)))?;
    let series: Vec<Series> = (1..=levels)
        .map(|j| {
            Series::line(
                format!("level {j}"),
                sweep
                    .points
                    .iter()
                    .map(|p| (p.value, p.levels[j]))
                    .collect(),
            )
        })
        .collect();
    let marks: Vec<(f64, String)> = crossings
        .iter()
        .map(|c| {
            (
                c.location,
                format!("{}-{} {:.1} MHz", c.moving, c.partner, c.gap_mhz),
            )
        })
        .collect();
    let xlabel = if axis.is_flux() {
        format!("{axis} (control units)")
    } else {
        format!("{axis} (GHz)")
    };
    let plot = line_plot(
        "Dressed spectrum",
        &xlabel,
        "frequency (GHz)",
        &series,
        &marks,
    );

    Ok(Outcome {
        resolved: json!({
            "axis": axis.to_string(),
            "sweep": values,
            "other_qubit_freq_ghz": other_freq,
            "dims": space.dims(),
            "levels": levels,
        }),
        artifacts: vec![
            Artifact::new("spectrum.csv", csv),
            Artifact::new("spectrum.svg", plot),
            Artifact::json(
                "anticrossings.json",
                &json!({ "moving": tag, "anticrossings": crossings }),
            )?,
        ],
        error: None,
    })
}

/// One row of the coupling table, all couplings in MHz.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeffRow {
    pub freq_ghz: f64,
    /// Perturbative (signed) coupling.
    pub geff_mhz: f64,
    /// Half the minimum dressed qubit-qubit separation; NaN if not resolved.
    pub ed_half_gap_mhz: f64,
    /// Signed exact coupling from the dressed qubit pair.
    pub ed_coupling_mhz: f64,
}

/// Perturbative coupling and its exact-diagonalization counterparts at each
/// co-tuned frequency. The qubit-1 scan widens until it brackets the minimum.
pub fn geff_table(
    params: &DeviceParams,
    freqs: &[f64],
    space: Option<&HilbertSpace>,
) -> Result<Vec<GeffRow>> {
    freqs
        .iter()
        .map(|&w| {
            let geff_mhz = effective_coupling(params, &OperatingPoint::co_tuned(w)?)? * 1e3;
            let (ed_half_gap_mhz, ed_coupling_mhz) = match space {
                None => (f64::NAN, f64::NAN),
                Some(space) => {
                    let mut half_width = (4.0 * geff_mhz.abs()).max(3.0);
                    let mut half_gap = f64::NAN;
                    for _ in 0..4 {
                        match scan_qubit_pair_gap(
                            params,
                            w,
                            GapSweep::around(w, half_width, 41),
                            space,
                        ) {
                            Ok(r) => {
                                half_gap = r.gap_mhz / 2.0;
                                break;
                            }
                            Err(Error::Domain(_)) => half_width *= 2.0,
                            Err(e) => return Err(e),
                        }
                    }
                    let c = dressed_coupling(params, &OperatingPoint::co_tuned(w)?, space)? * 1e3;
                    (half_gap, c)
                }
            };
            Ok(GeffRow {
                freq_ghz: w,
                geff_mhz,
                ed_half_gap_mhz,
                ed_coupling_mhz,
            })
        })
        .collect()
}

/// Inner 80% of the resonator interval.
pub fn default_search(params: &DeviceParams) -> (f64, f64) {
    let (a, b) = (params.resonator_freq_a, params.resonator_freq_b);
    let (lo, hi) = (a.min(b), a.max(b));
    (lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo))
}

pub fn geff(params: &DeviceParams, args: &GeffArgs) -> Result<Outcome> {
    let freqs = parse_grid(&args.range)?;
    let search = match &args.search {
        Some(s) => parse_pair(s)?,
        None => default_search(params),
    };
    let space = if args.no_ed {
        None
    } else {
        Some(HilbertSpace::new(&parse_dims(&args.dims)?)?)
    };
    let root = find_switch_off(params, search)?;
    let rows = geff_table(params, &freqs, space.as_ref())?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "freq_ghz",
        "geff_perturbative_mhz",
        "ed_half_gap_mhz",
        "ed_coupling_mhz",
    ])?;
    for r in &rows {
        w.write_record([
            r.freq_ghz.to_string(),
            r.geff_mhz.to_string(),
            opt(r.ed_half_gap_mhz),
            opt(r.ed_coupling_mhz),
        ])?;
    }
    let csv = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;

    let mut series = vec![Series::line(
        "perturbative g_eff",
        rows.iter().map(|r| (r.freq_ghz, r.geff_mhz)).collect(),
    )];
    if space.is_some() {
        series.push(Series::markers(
            "exact coupling",
            rows.iter()
                .map(|r| (r.freq_ghz, r.ed_coupling_mhz))
                .collect(),
        ));
        series.push(Series::markers(
            "half dressed gap",
            rows.iter()
                .map(|r| (r.freq_ghz, r.ed_half_gap_mhz))
                .collect(),
        ));
    }
    let plot = line_plot(
        "Effective qubit-qubit coupling",
        "co-tuned qubit frequency (GHz)",
        "coupling (MHz)",
        &series,
        &[(root, format!("switch-off {root:.4} GHz"))],
    );

    Ok(Outcome {
        resolved: json!({
            "range_ghz": freqs,
            "search_ghz": [search.0, search.1],
            "dims": space.as_ref().map(|s| s.dims().to_vec()),
        }),
        artifacts: vec![
            Artifact::new("geff.csv", csv),
            Artifact::new("geff.svg", plot),
            Artifact::json(
                "switch_off.json",
                &json!({ "switch_off_ghz": root, "search_ghz": [search.0, search.1] }),
            )?,
        ],
        error: None,
    })
}

pub fn gapscan(params: &DeviceParams, args: &GapscanArgs) -> Result<Outcome> {
    let setpoints = parse_grid(&args.setpoints)?;
    let space = HilbertSpace::new(&parse_dims(&args.dims)?)?;
    let results = gap_vs_setpoint(params, &setpoints, args.half_width, args.points, &space);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "setpoint_ghz",
        "gap_mhz",
        "location_ghz",
        "geff_perturbative_mhz",
        "status",
    ])?;
    let mut ok = Vec::new();
    let mut first_error = None;
    for (&f, r) in setpoints.iter().zip(results) {
        let g = effective_coupling(params, &OperatingPoint::co_tuned(f)?)? * 1e3;
        match r {
            Ok(r) => {
                w.write_record([
                    f.to_string(),
                    r.gap_mhz.to_string(),
                    r.location_ghz.to_string(),
                    g.to_string(),
                    "ok".into(),
                ])?;
                ok.push((f, r.gap_mhz, g));
            }
            Err(e) => {
                w.write_record([
                    f.to_string(),
                    String::new(),
                    String::new(),
                    g.to_string(),
                    e.to_string(),
                ])?;
                first_error.get_or_insert(e);
            }
        }
    }
    let csv = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let plot = line_plot(
        "Qubit-qubit gap versus setpoint",
        "qubit-2 setpoint (GHz)",
        "gap (MHz)",
        &[
            Series::markers("dressed gap", ok.iter().map(|p| (p.0, p.1)).collect()),
            Series::markers(
                "2|g_eff| perturbative",
                ok.iter().map(|p| (p.0, 2.0 * p.2.abs())).collect(),
            ),
        ],
        &[],
    );
    Ok(Outcome {
        resolved: json!({
            "setpoints_ghz": setpoints,
            "half_width_mhz": args.half_width,
            "points": args.points,
            "dims": space.dims(),
        }),
        artifacts: vec![
            Artifact::new("gaps.csv", csv),
            Artifact::new("gaps.svg", plot),
        ],
        // Only a total failure is an error.
        error: if ok.is_empty() { first_error } else { None },
    })
}

pub fn chevron_config(args: &ChevronArgs) -> Result<ChevronConfig> {
    let taus = parse_grid(&args.taus)?;
    if taus.len() < 2 {
        return Err(Error::Config(format!(
            "degenerate interaction-time grid: {} point(s)",
            taus.len()
        )));
    }
    let offsets = parse_grid(&args.offsets)?;
    let (b1, b2) = parse_pair(&args.bias)?;
    Ok(ChevronConfig {
        bias: OperatingPoint::new(b1, b2)?,
        q2_target_ghz: args.q2,
        q1_offsets_mhz: offsets,
        taus_ns: taus,
        frame: match args.frame {
            FrameArg::Bare => Frame::Bare,
            FrameArg::Dressed => Frame::Dressed,
        },
        fixed_interval_ns: args.fixed_interval,
        max_step_ns: args.max_step,
    })
}

/// Adds seeded Gaussian noise, detuning-major.
pub fn add_noise(map: &mut ChevronMap, sigma: f64, seed: u64) -> Result<()> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Config(format!("noise σ: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for col in &mut map.p1 {
        for p in col.iter_mut() {
            *p += normal.sample(&mut rng);
        }
    }
    Ok(())
}

pub fn chevron(params: &DeviceParams, args: &ChevronArgs) -> Result<Outcome> {
    let config = chevron_config(args)?;
    let contrast = args.contrast.as_deref().map(parse_pair).transpose()?;
    let noise = match (args.noise, args.seed) {
        (None, _) => None,
        (Some(s), Some(seed)) if s.is_finite() && s >= 0.0 => Some((s, seed)),
        (Some(s), Some(_)) => {
            return Err(Error::Config(format!(
                "noise σ must be non-negative, got {s}"
            )))
        }
        (Some(_), None) => return Err(Error::Config("--noise needs --seed".into())),
    };
    let space = HilbertSpace::new(&parse_dims(&args.dims)?)?;
    let mut map = vacuum_rabi_chevron(params, &config, &space)?;
    if let Some((s, seed)) = noise {
        add_noise(&mut map, s, seed)?;
    }
    let csv = csv_bytes(|b| map.write_csv(b, contrast))?;
    let mut sidecar = map.sidecar(params, &config, &space);
    sidecar["noise"] = json!(noise.map(|(s, seed)| json!({ "sigma": s, "seed": seed })));
    let plot = heatmap(
        "Vacuum-Rabi chevron, qubit-1 population",
        "qubit-1 detuning (MHz)",
        "interaction time (ns)",
        &map.detunings_mhz,
        &map.taus_ns,
        &map.p1,
    );

    let eq = effective_coupling(params, &OperatingPoint::co_tuned(config.q2_target_ghz)?)? * 1e3;
    let (estimate, error) = match geff_from_chevron(&map) {
        Ok(est) => (
            json!({
                "status": "ok",
                "g_eff_mhz": est.g_mhz,
                "g_eff_sigma_mhz": est.g_sigma_mhz,
                "vertex_offset_mhz": est.offset_mhz,
                "detuning_scale": est.detuning_scale,
                "floor_mhz": est.floor_mhz,
                "columns": est.columns,
                "fit": est.fit.report(),
                "perturbative_g_eff_mhz": eq,
            }),
            None,
        ),
        Err(Error::BelowSensitivityFloor {
            detected,
            required,
            floor_mhz,
        }) => (
            json!({
                "status": "below_sensitivity_floor",
                "detected_columns": detected,
                "required_columns": required,
                "floor_mhz": floor_mhz,
                "perturbative_g_eff_mhz": eq,
            }),
            None,
        ),
        Err(e) => (
            json!({ "status": "error", "message": e.to_string(), "perturbative_g_eff_mhz": eq }),
            Some(e),
        ),
    };

    Ok(Outcome {
        resolved: json!({
            "chevron": config,
            "dims": space.dims(),
            "contrast": contrast.map(|(s, b)| json!({ "scale": s, "baseline": b })),
            "noise": noise.map(|(s, seed)| json!({ "sigma": s, "seed": seed })),
        }),
        artifacts: vec![
            Artifact::new("chevron.csv", csv),
            Artifact::json("chevron.json", &sidecar)?,
            Artifact::new("chevron.svg", plot),
            Artifact::json("geff_time_domain.json", &estimate)?,
        ],
        error,
    })
}

pub fn fit(args: &FitArgs) -> Result<Outcome> {
    let trace = TimeTrace::from_csv_path(&args.trace)?;
    let outcome = match args.model {
        ModelArg::Exp => fit_exp_decay(&trace)?,
        ModelArg::Cosine => fit_damped_cosine(&trace)?,
    };
    let mut report = outcome.report();
    report["points"] = json!(trace.len());
    report["span_ns"] = json!(trace.span());
    Ok(Outcome {
        resolved: json!({
            "model": args.model,
            "trace": args.trace.display().to_string(),
        }),
        artifacts: vec![Artifact::json("fit.json", &report)?],
        error: None,
    })
}
