use std::path::Path;

use serde_json::{json, Map, Value};

use super::config::RunConfig;
use super::output::{Output, Table};
use crate::chain::{
    find_equilibrium, lowest_mode_scan, normal_modes, power_law_exponent, ModeDecomposition, SolverOptions,
};
use crate::constants::{angular_to_khz, khz_to_angular};
use crate::cooling::{crosstalk_rate, ELASTIC_SCATTERING_NOTE};
use crate::decoherence::{
    decay_parameters, rabi_trace, rabi_trace_monte_carlo, zero_point_spread, BeamProfile, Warning,
};
use crate::fitting::{
    binomial_sigma, fit_beam_profile, fit_rabi_trace, fit_theta_growth, fit_theta_power_law, DataSeries, FitOptions,
};
use crate::gates::{predict_fidelity_after_wait, SpamMatrix, ThetaGrowth, MEASURED_15_ION_SPAM};
use crate::heating::{gate_error_scaling, theta_rate, GateErrorReference, ModeSelection};
use crate::{Error, Result};

fn echo(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serialises")
}

fn output(command: &str, cfg: &RunConfig, tables: Vec<Table>, result: Option<Map<String, Value>>) -> Output {
    Output { command: command.into(), input: echo(cfg), tables, result, json_only: false }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

struct Chain {
    modes: ModeDecomposition,
    positions: Vec<f64>,
}

fn build_chain(cfg: &RunConfig) -> Result<Chain> {
    let species = cfg.species()?;
    let (potential, n) = cfg.potential()?;
    let chain = find_equilibrium(&species, &potential, n, SolverOptions::default())?;
    let modes = normal_modes(&chain)?;
    Ok(Chain { modes, positions: chain.positions })
}

fn pick_ion(ion: Option<usize>, n: usize) -> Result<usize> {
    let i = ion.unwrap_or(n / 2);
    if i >= n {
        return Err(Error::Input(format!("ion index {i} out of range for {n} ions")));
    }
    Ok(i)
}

fn warnings_json(warnings: &[Warning]) -> Value {
    serde_json::to_value(warnings).expect("warnings serialise")
}

pub fn modes(cfg: &RunConfig) -> Result<Output> {
    let chain = build_chain(cfg)?;
    let m = &chain.modes;
    let mut main = Table::new("modes", &["mode_index", "freq_khz", "participation_sum_sq"]);
    for k in 0..m.n_modes() {
        main.push(vec![k as f64, angular_to_khz(m.frequencies[k]), m.uniform_field_enhancement(k)]);
    }
    let n = m.participation.nrows();
    let headers: Vec<String> =
        std::iter::once("ion_index".to_string()).chain((0..m.n_modes()).map(|k| format!("mode_{k}"))).collect();
    let headers: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut part = Table::new("participation", &headers);
    let mut pos = Table::new("positions", &["ion_index", "x_um"]);
    for i in 0..n {
        part.push(std::iter::once(i as f64).chain(m.participation.row(i).iter().copied()).collect());
        pos.push(vec![i as f64, chain.positions[i] * 1e6]);
    }
    Ok(output("modes", cfg, vec![main, part, pos], None))
}

/// Decay parameters of ion `ion` with the beam in the ion's own frame.
fn ion_thetas(cfg: &RunConfig, chain: &Chain, beam: &BeamProfile, ion: usize) -> Result<(Vec<f64>, Vec<Warning>)> {
    let n = chain.positions.len();
    let species = cfg.species()?;
    let thermal = cfg.thermal(&chain.modes.frequencies)?;
    let mut beams = vec![None; n];
    beams[ion] = Some(beam.clone());
    let dp = decay_parameters(&species, &chain.modes, &thermal, &beams, &vec![0.0; n])?;
    Ok((dp.theta.row(ion).iter().copied().collect(), dp.warnings))
}

pub fn rabi(cfg: &RunConfig, monte_carlo: bool, seed: u64) -> Result<Output> {
    let rc = cfg.section(&cfg.rabi, "rabi")?;
    if rc.n_points == 0 || !(rc.t_max_us.is_finite() && rc.t_max_us >= 0.0) {
        return Err(Error::input("[rabi] needs n_points >= 1 and t_max_us >= 0"));
    }
    let times = linspace(0.0, rc.t_max_us * 1e-6, rc.n_points);

    let mut warnings = Vec::new();
    let (omega0, thetas) = match (rc.rabi_khz, &rc.theta) {
        (Some(r), Some(th)) => (khz_to_angular(r), th.clone()),
        (rabi_khz, theta) => {
            let chain = build_chain(cfg)?;
            let beam = cfg.beam()?;
            let ion = pick_ion(rc.ion, chain.positions.len())?;
            let omega0 = match rabi_khz {
                Some(r) => khz_to_angular(r),
                None => beam.rabi_at(0.0)?,
            };
            let thetas = match theta {
                Some(th) => th.clone(),
                None => {
                    let (th, w) = ion_thetas(cfg, &chain, &beam, ion)?;
                    warnings = w;
                    th
                }
            };
            (omega0, thetas)
        }
    };

    let t_us = |t: f64| t * 1e6;
    let table = if monte_carlo {
        let mc = rabi_trace_monte_carlo(omega0, &thetas, &times, rc.mc_samples, seed)?;
        let mut t = Table::new("rabi", &["t_us", "p1", "contrast", "phase_rad", "mc_stderr"]);
        for (k, &tk) in times.iter().enumerate() {
            t.push(vec![t_us(tk), mc.p1[k], mc.contrast[k], mc.phase[k], mc.stderr[k]]);
        }
        t
    } else {
        let tr = rabi_trace(omega0, &thetas, &times)?;
        let mut t = Table::new("rabi", &["t_us", "p1", "contrast", "phase_rad"]);
        for (k, &tk) in times.iter().enumerate() {
            t.push(vec![t_us(tk), tr.p1[k], tr.contrast[k], tr.phase[k]]);
        }
        t
    };
    let mut result = Map::new();
    result.insert(
        "derived".into(),
        json!({
            "rabi_rad_per_s": omega0,
            "theta": thetas,
            "method": if monte_carlo { "monte-carlo" } else { "closed-form" },
            "warnings": warnings_json(&warnings),
        }),
    );
    Ok(output("rabi", cfg, vec![table], Some(result)))
}

pub fn theta_scan(cfg: &RunConfig) -> Result<Output> {
    let sc = cfg.section(&cfg.theta_scan, "theta_scan")?;
    let chain = build_chain(cfg)?;
    let beam = cfg.beam()?;
    let species = cfg.species()?;
    let thermal = cfg.thermal(&chain.modes.frequencies)?;
    let ion = pick_ion(sc.ion, chain.positions.len())?;
    for w in thermal.warnings() {
        log::warn!("{w:?}: decay parameters assume n̄ ≫ 1");
    }
    // θ_i(x) = −Σ_m b_im² ξ_m² n̄_m (Ω''/Ω)(x)
    let weight: f64 = (0..chain.modes.n_modes())
        .map(|m| {
            let b = chain.modes.participation[(ion, m)];
            let xi = zero_point_spread(&species, chain.modes.frequencies[m])?;
            Ok(b * b * xi * xi * thermal.nbar[m])
        })
        .sum::<Result<f64>>()?;
    let mut table = Table::new("theta_scan", &["x_um", "theta"]);
    for x in linspace(sc.x_min_um, sc.x_max_um, sc.n_points) {
        table.push(vec![x, -weight * beam.curvature_ratio(x * 1e-6)?]);
    }
    let mut result = Map::new();
    result.insert("derived".into(), json!({ "ion": ion, "warnings": warnings_json(&thermal.warnings()) }));
    Ok(output("theta-scan", cfg, vec![table], Some(result)))
}

pub fn gate_fidelity(cfg: &RunConfig, tw_list_ms: Option<Vec<f64>>) -> Result<Output> {
    let g = cfg.section(&cfg.gate, "gate")?;
    let tw_list = tw_list_ms
        .or_else(|| g.tw_list_ms.clone())
        .ok_or_else(|| Error::input("no wait times: pass --tw-list or set gate.tw_list_ms"))?;
    let spam_error = match (g.spam_error, g.spam) {
        (Some(_), Some(_)) => return Err(Error::input("set either gate.spam_error or gate.spam, not both")),
        (Some(e), None) => e,
        (None, Some(_)) => SpamMatrix::new(MEASURED_15_ION_SPAM)?.mean_error(),
        (None, None) => 0.0,
    };
    let (gi, gj): (ThetaGrowth, ThetaGrowth) = match (&g.growth_i, &g.growth_j) {
        (Some(a), Some(b)) => (a.into(), b.into()),
        (None, None) => {
            let [i, j] =
                g.ions.ok_or_else(|| Error::input("gate.ions is needed to compute θ growth from the chain"))?;
            let chain = build_chain(cfg)?;
            let n = chain.positions.len();
            pick_ion(Some(i), n)?;
            pick_ion(Some(j), n)?;
            let beam = cfg.beam()?;
            let noise = cfg.noise()?;
            let species = cfg.species()?;
            let mut beams = vec![None; n];
            beams[i] = Some(beam.clone());
            beams[j] = Some(beam.clone());
            let thermal = cfg.thermal(&chain.modes.frequencies)?;
            let zeros = vec![0.0; n];
            let dp = decay_parameters(&species, &chain.modes, &thermal, &beams, &zeros)?;
            let rates = theta_rate(&noise, &species, &chain.modes, &beams, &zeros, ModeSelection::Lowest)?;
            let growth =
                |k: usize| ThetaGrowth { theta0: dp.theta[(k, 0)], rate: rates.rates[k], ..Default::default() };
            (growth(i), growth(j))
        }
        _ => return Err(Error::input("set both gate.growth_i and gate.growth_j, or neither")),
    };
    let mut table = Table::new("gate_fidelity", &["tw_ms", "F_bound", "F_spam", "F_err"]);
    for tw in tw_list {
        let p = predict_fidelity_after_wait(&gi, &gj, g.gate_count, spam_error, tw * 1e-3)?;
        table.push(vec![tw, p.f_bound, p.f_spam_adjusted, p.f_err]);
    }
    let mut result = Map::new();
    result.insert("derived".into(), json!({ "growth_i": gi, "growth_j": gj, "spam_error": spam_error }));
    Ok(output("gate-fidelity", cfg, vec![table], Some(result)))
}

pub fn scaling(cfg: &RunConfig, n_list: Option<Vec<usize>>, inverse_n: bool) -> Result<Output> {
    let s = cfg.section(&cfg.scaling, "scaling")?;
    let n_list = n_list
        .or_else(|| s.n_list.clone())
        .ok_or_else(|| Error::input("no chain lengths: pass --n-list or set scaling.n_list"))?;
    if n_list.is_empty() {
        return Err(Error::input("the N list is empty"));
    }
    let inverse_n = inverse_n || s.inverse_n;
    let species = cfg.species()?;
    let spacing = s.spacing_um * 1e-6;
    let reference = GateErrorReference {
        n_ions: s.reference_n_ions.unwrap_or(n_list[0]),
        wait_time: s.reference_wait_ms * 1e-3,
        error: s.reference_error,
    };
    let wait = s.wait_ms * 1e-3;
    if !(wait.is_finite() && wait >= 0.0) {
        return Err(Error::input("scaling.wait_ms must be >= 0"));
    }
    let scan = lowest_mode_scan(&species, spacing, &n_list)?;
    let omega_ref = match scan.iter().find(|p| p.n_ions == reference.n_ions) {
        Some(p) => p.omega0,
        None => lowest_mode_scan(&species, spacing, &[reference.n_ions])?[0].omega0,
    };
    let mut table = Table::new("scaling", &["n_ions", "omega0_khz", "rel_gate_error"]);
    for p in &scan {
        let err = if inverse_n {
            gate_error_scaling(p.n_ions, wait, s.alpha, &reference)?
        } else {
            // Gate error ∝ θ² ∝ (t_w ω₀^{−2−α})².
            gate_error_scaling(reference.n_ions, wait, s.alpha, &reference)?
                * (omega_ref / p.omega0).powf(4.0 + 2.0 * s.alpha)
        };
        table.push(vec![p.n_ions as f64, angular_to_khz(p.omega0), err]);
    }
    let mut result = Map::new();
    if scan.len() >= 2 {
        let pts: Vec<(f64, f64)> = scan.iter().map(|p| (p.n_ions as f64, p.omega0)).collect();
        let (k, _) = power_law_exponent(&pts)?;
        result.insert("derived".into(), json!({ "omega0_exponent": k, "inverse_n": inverse_n }));
    } else {
        result.insert("derived".into(), json!({ "inverse_n": inverse_n }));
    }
    Ok(output("scaling", cfg, vec![table], Some(result)))
}

pub fn cooling(cfg: &RunConfig) -> Result<Output> {
    let c = cfg.cooling()?;
    let rate = crosstalk_rate(&c)?;
    let mut result = Map::new();
    result.insert("R_per_s".into(), json!(rate));
    result.insert("inputs".into(), serde_json::to_value(&cfg.cooling).expect("inputs serialise"));
    result.insert("note".into(), json!(ELASTIC_SCATTERING_NOTE));
    let mut out = output("cooling", cfg, Vec::new(), Some(result));
    out.json_only = true;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FitKind {
    Beam,
    Rabi,
    ThetaGrowth,
    PowerLaw,
}

/// Read `x,y[,sigma]` columns after one header row.
pub fn read_series(path: &Path) -> Result<DataSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if !(2..=3).contains(&headers.len()) {
        return Err(Error::Input(format!(
            "{}: expected 2 or 3 columns (x, y[, sigma]), header has {}",
            path.display(),
            headers.len()
        )));
    }
    let (mut x, mut y, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| Error::Input(format!("{}: line {line}: {e}", path.display())))?;
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::Input(format!(
                    "{}: line {line}, column {} ({}): cannot parse {cell:?} as a number",
                    path.display(),
                    col + 1,
                    headers[col]
                ))
            })?;
            [&mut x, &mut y, &mut s][col].push(v);
        }
    }
    let series = if headers.len() == 3 { DataSeries::from_xy_sigma(&x, &y, &s)? } else { DataSeries::from_xy(&x, &y)? };
    Ok(series.with_labels(headers[0].clone(), headers[1].clone()))
}

pub fn fit(kind: FitKind, data_path: &Path, shots: Option<u64>, n_modes: usize, seed: u64) -> Result<Output> {
    let mut data = read_series(data_path)?;
    if let Some(n) = shots {
        if data.has_sigma() {
            return Err(Error::input("--shots conflicts with a sigma column in the data"));
        }
        for p in &mut data.points {
            p.sigma = Some(binomial_sigma(p.y.clamp(0.0, 1.0), n)?);
        }
    }
    let options = FitOptions { seed, ..FitOptions::default() };
    let (name, result) = match kind {
        FitKind::Beam => ("beam", fit_beam_profile(&data, &options)?),
        FitKind::Rabi => ("rabi", fit_rabi_trace(&data, n_modes, &options)?),
        FitKind::ThetaGrowth => ("theta-growth", fit_theta_growth(&data)?),
        FitKind::PowerLaw => ("power-law", fit_theta_power_law(&data, &options)?),
    };
    let mut residuals = Table::new("residuals", &["x", "y", "residual"]);
    for (p, r) in data.points.iter().zip(&result.residuals) {
        residuals.push(vec![p.x, p.y, *r]);
    }
    let mut map = Map::new();
    map.insert("fit".into(), serde_json::to_value(&result).expect("fit serialises"));
    Ok(Output {
        command: format!("fit {name}"),
        input: json!({
            "data": data_path.display().to_string(),
            "x_label": data.x_label,
            "y_label": data.y_label,
            "points": data.len(),
            "shots": shots,
            "n_modes": n_modes,
        }),
        tables: vec![residuals],
        result: Some(map),
        json_only: true,
    })
}
