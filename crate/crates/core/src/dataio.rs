//! Built-in meson datasets, parameter files and CSV files.
//!
//! Parameter files are UTF-8 text with one `key = value [unit]` per line
//! and `#` comments:
//!
//! ```text
//! particle = kaon
//! units = s
//! tau_S = 8.92e-11 s
//! tau_L = 5.17e-8 s
//! delta_m_times_tau_S = 0.5
//! ref.eps_exp_mod = 0.002232 +- 0.000007 | CPLEAR/KTeV average
//! ```
//!
//! Each of the widths may be given as a lifetime (`tau_S`, `tau_L`) or a
//! rate (`gamma_S`, `gamma_L`), the mass difference as `delta_m` or
//! `delta_m_times_tau_S`. Units tagged on a value are converted into the
//! file's `units`. Reference values follow `ref.<name> = value +- tolerance
//! | provenance`.
//!
//! CSV files use `,`, `.` decimals, LF endings and shortest round-trip
//! float formatting. Series carry the header `t,value` or
//! `t,value,stderr`; event samples carry `t,sector`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::model::MesonParams;
use crate::montecarlo::DecaySample;
use crate::temporal::{IntensitySeries, ModelKind, Sector};
use crate::{Error, Result};

/// `Δm·τ_S` used for the built-in kaon set.
pub const KAON_DM_TAU_S: f64 = 0.5;
/// The measured ratio, for users who prefer it to the rounded one.
pub const KAON_DM_TAU_S_MEASURED: f64 = 0.474;

pub const BUILTIN_NAMES: [&str; 3] = ["kaon", "Bs", "D"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeUnit {
    Seconds,
    Picoseconds,
}

impl TimeUnit {
    pub fn symbol(self) -> &'static str {
        match self {
            TimeUnit::Seconds => "s",
            TimeUnit::Picoseconds => "ps",
        }
    }

    fn in_seconds(self) -> f64 {
        match self {
            TimeUnit::Seconds => 1.0,
            TimeUnit::Picoseconds => 1e-12,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "s" => Some(TimeUnit::Seconds),
            "ps" => Some(TimeUnit::Picoseconds),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceValue {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleDataset {
    pub name: String,
    pub params: MesonParams,
    pub units: TimeUnit,
    pub reference_values: Vec<ReferenceValue>,
}

impl ParticleDataset {
    pub fn reference(&self, name: &str) -> Option<&ReferenceValue> {
        self.reference_values.iter().find(|r| r.name == name)
    }
}

fn reference(name: &str, value: f64, tolerance: f64, provenance: &str) -> ReferenceValue {
    ReferenceValue {
        name: name.into(),
        value,
        tolerance,
        provenance: provenance.into(),
    }
}

pub fn builtin_dataset(name: &str) -> Result<ParticleDataset> {
    match name {
        "kaon" => kaon_dataset(KAON_DM_TAU_S),
        "Bs" => {
            let y = 0.069;
            let tau = 1.470;
            let dm = 17.7;
            let params = MesonParams::from_mixing(1.0 / tau, y, dm * tau)?;
            Ok(ParticleDataset {
                name: "Bs".into(),
                params,
                units: TimeUnit::Picoseconds,
                reference_values: vec![
                    reference("tau", tau, 0.027, "B_s mean lifetime 1/Γ_s, PDG 2008"),
                    reference("y", y, 0.062, "ΔΓ_s/2Γ_s, PDG 2008"),
                    reference("delta_m", dm, 6.4, "Δm_s in ps⁻¹, PDG 2008"),
                    reference("a_sl_exp", -0.4e-3, 5.6e-3, "semileptonic asymmetry, PDG 2008"),
                    reference("qp_exp_mod", 1.0002, 0.0028, "|q/p| from A_SL, PDG 2008"),
                    reference("eps_th_re", 0.018, 0.003, "renormalized ε, Friedrichs-model estimate"),
                    reference("qp_th_mod", 0.96, 0.01, "|q/p| from ε^th, Friedrichs-model estimate"),
                ],
            })
        }
        "D" => {
            let y = 0.37;
            let x = 0.81;
            let tau = 0.4101;
            let params = MesonParams::from_mixing(1.0 / tau, y, x)?;
            Ok(ParticleDataset {
                name: "D".into(),
                params,
                units: TimeUnit::Picoseconds,
                reference_values: vec![
                    reference("tau", tau, 0.0015, "D⁰/D̄⁰ mean lifetime, PDG 2008"),
                    reference("y", y, 0.25, "ΔΓ/2Γ, Belle D⁰→K_S π⁺π⁻ Dalitz analysis"),
                    reference("x", x, 0.30, "Δm/Γ, Belle D⁰→K_S π⁺π⁻ Dalitz analysis"),
                    reference("qp_exp_mod", 0.86, 0.30, "|q/p|, Belle D⁰→K_S π⁺π⁻ Dalitz analysis"),
                    reference("qp_exp_phase_deg", -14.0, 18.0, "arg(q/p), Belle D⁰→K_S π⁺π⁻ Dalitz analysis"),
                    reference("eps_th_re", 0.077, 0.001, "renormalized ε, Friedrichs-model estimate"),
                    reference("eps_th_im", 0.035, 0.001, "renormalized ε, Friedrichs-model estimate"),
                    reference("qp_th_mod", 0.86, 0.005, "|q/p| from ε^th, Friedrichs-model estimate"),
                    reference("qp_th_phase_deg", -4.02, 0.05, "arg(q/p) from ε^th, Friedrichs-model estimate"),
                ],
            })
        }
        _ => Err(Error::UnknownDataset {
            name: name.into(),
            available: BUILTIN_NAMES.join(", "),
        }),
    }
}

/// The kaon set with a chosen `Δm·τ_S`.
pub fn kaon_dataset(delta_m_tau_s: f64) -> Result<ParticleDataset> {
    let tau_s = 8.92e-11;
    let tau_l = 5.17e-8;
    let params = MesonParams::from_lifetimes(tau_s, tau_l, delta_m_tau_s / tau_s)?;
    Ok(ParticleDataset {
        name: "kaon".into(),
        params,
        units: TimeUnit::Seconds,
        reference_values: vec![
            reference("tau_S", tau_s, 0.005e-11, "K_S lifetime, Perkins, Introduction to High Energy Physics"),
            reference("tau_L", tau_l, 0.04e-8, "K_L lifetime, Perkins, Introduction to High Energy Physics"),
            reference("delta_m_times_tau_S", delta_m_tau_s, 0.03, "rounded Δm·τ_S"),
            reference("eps_exp_mod", 2.232e-3, 0.007e-3, "|ε| world average, PDG 2008"),
            reference("eps_exp_arg_deg", 43.5, 0.7, "arg ε world average, PDG 2008"),
            reference("eps_th_mod", 1.82e-3 / std::f64::consts::SQRT_2, 0.129e-3, "renormalized ε, Friedrichs-model estimate"),
            reference("eps_th_arg_deg", 46.77, 2.5, "renormalized ε, Friedrichs-model estimate"),
        ],
    })
}

pub fn builtin_datasets() -> Vec<ParticleDataset> {
    BUILTIN_NAMES
        .iter()
        .map(|n| builtin_dataset(n).expect("built-in datasets are valid"))
        .collect()
}

/// Serializes a dataset as a parameter file. Rates are written as
/// `gamma_S`, `gamma_L` and `delta_m` so that loading restores them bit
/// for bit.
pub fn format_params(d: &ParticleDataset) -> String {
    let u = d.units.symbol();
    let mut out = String::new();
    let _ = writeln!(out, "particle = {}", d.name);
    let _ = writeln!(out, "units = {u}");
    let _ = writeln!(out, "gamma_S = {} 1/{u}", d.params.gamma_s);
    let _ = writeln!(out, "gamma_L = {} 1/{u}", d.params.gamma_l);
    let _ = writeln!(out, "delta_m = {} 1/{u}", d.params.delta_m());
    for r in &d.reference_values {
        let _ = writeln!(out, "ref.{} = {} +- {} | {}", r.name, r.value, r.tolerance, r.provenance);
    }
    out
}

pub fn save_params(path: &Path, d: &ParticleDataset) -> Result<()> {
    fs::write(path, format_params(d))?;
    Ok(())
}

pub fn load_params(path: &Path) -> Result<ParticleDataset> {
    parse_params(&fs::read_to_string(path)?)
}

struct Entry {
    line: usize,
    value: f64,
    unit: Option<String>,
}

fn parse_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        key: key.into(),
        message: message.into(),
    }
}

pub fn parse_params(text: &str) -> Result<ParticleDataset> {
    let mut particle: Option<(usize, String)> = None;
    let mut units: Option<(usize, TimeUnit)> = None;
    let mut numbers: Vec<(String, Entry)> = Vec::new();
    let mut refs = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(parse_error(line, content, "expected `key = value`"));
        };
        let key = key.trim();
        let value = value.trim();
        if let Some(name) = key.strip_prefix("ref.") {
            refs.push(parse_reference(line, name, value)?);
            continue;
        }
        let seen = particle.as_ref().is_some_and(|_| key == "particle")
            || units.as_ref().is_some_and(|_| key == "units")
            || numbers.iter().any(|(k, _)| k == key);
        if seen {
            return Err(parse_error(line, key, "duplicate key"));
        }
        match key {
            "particle" => {
                if value.is_empty() {
                    return Err(parse_error(line, key, "empty particle name"));
                }
                particle = Some((line, value.to_string()));
            }
            "units" => {
                let u = TimeUnit::parse(value)
                    .ok_or_else(|| parse_error(line, key, format!("unknown unit '{value}'")))?;
                units = Some((line, u));
            }
            "tau_S" | "tau_L" | "gamma_S" | "gamma_L" | "delta_m" | "delta_m_times_tau_S" => {
                let mut parts = value.split_whitespace();
                let number = parts.next().unwrap_or("");
                let parsed: f64 = number
                    .parse()
                    .map_err(|_| parse_error(line, key, format!("'{number}' is not a number")))?;
                if !parsed.is_finite() {
                    return Err(parse_error(line, key, "value must be finite"));
                }
                let unit = parts.next().map(str::to_string);
                if parts.next().is_some() {
                    return Err(parse_error(line, key, "trailing text after the unit"));
                }
                numbers.push((
                    key.to_string(),
                    Entry {
                        line,
                        value: parsed,
                        unit,
                    },
                ));
            }
            _ => return Err(parse_error(line, key, "unknown key")),
        }
    }

    let (_, name) = particle.ok_or_else(|| parse_error(0, "particle", "missing required key"))?;
    let (_, units) = units.ok_or_else(|| parse_error(0, "units", "missing required key"))?;
    let get = |key: &str| numbers.iter().find(|(k, _)| k == key).map(|(_, e)| e);

    let gamma_s = rate_from(get("gamma_S"), get("tau_S"), "gamma_S", "tau_S", units)?;
    let gamma_l = rate_from(get("gamma_L"), get("tau_L"), "gamma_L", "tau_L", units)?;
    let delta_m = match (get("delta_m"), get("delta_m_times_tau_S")) {
        (Some(_), Some(e)) => {
            return Err(parse_error(e.line, "delta_m_times_tau_S", "conflicts with delta_m"))
        }
        (Some(e), None) => convert_rate(e, "delta_m", units)?,
        (None, Some(e)) => {
            if e.unit.is_some() {
                return Err(parse_error(e.line, "delta_m_times_tau_S", "dimensionless value takes no unit"));
            }
            e.value * gamma_s
        }
        (None, None) => return Err(parse_error(0, "delta_m", "missing required key")),
    };
    let params = MesonParams::new(0.0, delta_m, gamma_s, gamma_l)
        .map_err(|e| parse_error(0, "params", e.to_string()))?;
    Ok(ParticleDataset {
        name,
        params,
        units,
        reference_values: refs,
    })
}

fn rate_from(
    rate: Option<&Entry>,
    lifetime: Option<&Entry>,
    rate_key: &str,
    life_key: &str,
    units: TimeUnit,
) -> Result<f64> {
    match (rate, lifetime) {
        (Some(_), Some(e)) => Err(parse_error(e.line, life_key, format!("conflicts with {rate_key}"))),
        (Some(e), None) => {
            let g = convert_rate(e, rate_key, units)?;
            if !(g > 0.0) {
                return Err(parse_error(e.line, rate_key, format!("{rate_key} must be positive")));
            }
            Ok(g)
        }
        (None, Some(e)) => {
            let tau = convert_time(e, life_key, units)?;
            if !(tau > 0.0) {
                return Err(parse_error(e.line, life_key, format!("{life_key} must be positive")));
            }
            Ok(1.0 / tau)
        }
        (None, None) => Err(parse_error(0, rate_key, format!("missing required key ({rate_key} or {life_key})"))),
    }
}

fn convert_time(e: &Entry, key: &str, units: TimeUnit) -> Result<f64> {
    match e.unit.as_deref() {
        None => Ok(e.value),
        Some(u) => {
            let from = TimeUnit::parse(u)
                .ok_or_else(|| parse_error(e.line, key, format!("unknown unit '{u}'")))?;
            if from == units {
                Ok(e.value)
            } else {
                Ok(e.value * from.in_seconds() / units.in_seconds())
            }
        }
    }
}

fn convert_rate(e: &Entry, key: &str, units: TimeUnit) -> Result<f64> {
    match e.unit.as_deref() {
        None => Ok(e.value),
        Some(u) => {
            let time = u
                .strip_prefix("1/")
                .or_else(|| u.strip_suffix("^-1"))
                .and_then(TimeUnit::parse)
                .ok_or_else(|| parse_error(e.line, key, format!("unknown unit '{u}'")))?;
            if time == units {
                Ok(e.value)
            } else {
                Ok(e.value * units.in_seconds() / time.in_seconds())
            }
        }
    }
}

fn parse_reference(line: usize, name: &str, value: &str) -> Result<ReferenceValue> {
    let key = format!("ref.{name}");
    if name.is_empty() {
        return Err(parse_error(line, &key, "empty reference name"));
    }
    let (numbers, provenance) = value
        .split_once('|')
        .ok_or_else(|| parse_error(line, &key, "missing `| provenance`"))?;
    let provenance = provenance.trim();
    if provenance.is_empty() {
        return Err(parse_error(line, &key, "empty provenance"));
    }
    let (v, tol) = numbers
        .split_once("+-")
        .ok_or_else(|| parse_error(line, &key, "expected `value +- tolerance`"))?;
    let parse = |s: &str| -> Result<f64> {
        let s = s.trim();
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| parse_error(line, &key, format!("'{s}' is not a number")))
    };
    let value = parse(v)?;
    let tolerance = parse(tol)?;
    if tolerance < 0.0 {
        return Err(parse_error(line, &key, "tolerance must be non-negative"));
    }
    Ok(ReferenceValue {
        name: name.into(),
        value,
        tolerance,
        provenance: provenance.into(),
    })
}

pub fn format_series(s: &IntensitySeries) -> String {
    let mut out = String::new();
    match &s.errors {
        Some(errors) => {
            out.push_str("t,value,stderr\n");
            for ((t, v), e) in s.times.iter().zip(&s.values).zip(errors) {
                let _ = writeln!(out, "{t},{v},{e}");
            }
        }
        None => {
            out.push_str("t,value\n");
            for (t, v) in s.times.iter().zip(&s.values) {
                let _ = writeln!(out, "{t},{v}");
            }
        }
    }
    out
}

pub fn save_series(path: &Path, s: &IntensitySeries) -> Result<()> {
    fs::write(path, format_series(s))?;
    Ok(())
}

/// Reads a series CSV; `kind` labels what the values are.
pub fn parse_series(text: &str, kind: ModelKind) -> Result<IntensitySeries> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_error(1, "header", "empty file"))?;
    let with_errors = match header.trim() {
        "t,value" => false,
        "t,value,stderr" => true,
        other => return Err(parse_error(1, "header", format!("unexpected header '{other}'"))),
    };
    let columns = if with_errors { 3 } else { 2 };
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for (k, l) in lines {
        let fields: Vec<&str> = l.trim().split(',').collect();
        if fields.len() != columns {
            return Err(parse_error(k + 1, "row", format!("expected {columns} columns")));
        }
        let num = |i: usize, key: &str| -> Result<f64> {
            fields[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| parse_error(k + 1, key, format!("'{}' is not a number", fields[i])))
        };
        times.push(num(0, "t")?);
        values.push(num(1, "value")?);
        if with_errors {
            errors.push(num(2, "stderr")?);
        }
    }
    IntensitySeries::new(times, values, with_errors.then_some(errors), kind)
}

pub fn load_series(path: &Path, kind: ModelKind) -> Result<IntensitySeries> {
    parse_series(&fs::read_to_string(path)?, kind)
}

pub fn format_events(s: &DecaySample) -> String {
    let mut out = String::with_capacity(24 * s.len() + 9);
    out.push_str("t,sector\n");
    for (t, sec) in s.times.iter().zip(&s.sectors) {
        let _ = writeln!(out, "{t},{}", sec.sign());
    }
    out
}

pub fn save_events(path: &Path, s: &DecaySample) -> Result<()> {
    fs::write(path, format_events(s))?;
    Ok(())
}

/// Reads an event CSV. The seed is not stored in the file; `seed` is
/// attached to the returned sample.
pub fn parse_events(text: &str, seed: u64) -> Result<DecaySample> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "t,sector" => {}
        Some((_, h)) => return Err(parse_error(1, "header", format!("unexpected header '{}'", h.trim()))),
        None => return Err(parse_error(1, "header", "empty file")),
    }
    let mut times = Vec::new();
    let mut sectors = Vec::new();
    for (k, l) in lines {
        let (t, s) = l
            .trim()
            .split_once(',')
            .ok_or_else(|| parse_error(k + 1, "row", "expected 2 columns"))?;
        let t: f64 = t
            .trim()
            .parse()
            .map_err(|_| parse_error(k + 1, "t", format!("'{t}' is not a number")))?;
        let sector = s
            .trim()
            .parse::<i32>()
            .ok()
            .and_then(Sector::from_sign)
            .ok_or_else(|| parse_error(k + 1, "sector", format!("'{s}' is not +1 or -1")))?;
        times.push(t);
        sectors.push(sector);
    }
    DecaySample::new(times, sectors, seed)
}

pub fn load_events(path: &Path, seed: u64) -> Result<DecaySample> {
    parse_events(&fs::read_to_string(path)?, seed)
}

/// Tells an event CSV from a series CSV by its header.
pub fn is_event_csv(text: &str) -> bool {
    text.lines().find(|l| !l.trim().is_empty()).map(str::trim) == Some("t,sector")
}
