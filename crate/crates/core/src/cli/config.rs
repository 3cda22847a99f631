//! `key=value` run configuration.
//!
//! ```text
//! # comments run to the end of the line
//! preset=neutron
//! d=1e-2          # explicit values win over the preset wherever they appear
//! method=quadrature
//! tol.c3_rel=1e-4
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::interferometer::{default_times, Method};
use crate::report::Tolerances;
use crate::units::PhysParams;

/// Keys accepted besides `tol.<name>`.
pub const KEYS: &[&str] = &[
    "preset", "m", "g", "hbar", "c", "G", "M", "d", "delta_h", "x", "sigma", "gauge_sigma", "t_start", "t_end",
    "t_count", "method", "grid_n", "grid_x_min", "grid_x_max", "accel", "dt", "out", "sweep_m",
];

/// Radius used by `gr` when `x` is not given: the mean Earth radius.
pub const DEFAULT_RADIUS: f64 = 6.371e6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, or `None` for problems not tied to one line.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Time samples `t_start..=t_end`, `count` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn samples(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.end];
        }
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.end
                } else {
                    self.start + (self.end - self.start) * i as f64 / (self.count - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: PhysParams,
    pub d: f64,
    pub delta_h: f64,
    /// Radius of the lower clock for `gr`.
    pub x: f64,
    /// Packet width for the interferometer; `d/50` by default.
    pub sigma: f64,
    /// Packet width for `gauge-check`; `d` by default.
    pub gauge_sigma: f64,
    pub times: TimeGrid,
    pub method: Method,
    pub grid_n: usize,
    pub grid_range: Option<(f64, f64)>,
    /// Acceleration for `rindler`; `g` by default.
    pub accel: f64,
    pub max_dt: Option<f64>,
    pub out: PathBuf,
    pub tol: Tolerances,
    /// Mass multipliers for `sweep`.
    pub sweep_m: Vec<f64>,
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(err(line, format!("expected key=value, found `{content}`")));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let known = KEYS.contains(&key)
            || key
                .strip_prefix("tol.")
                .is_some_and(|k| Tolerances::KEYS.contains(&k));
        if !known {
            errors.push(err(line, format!("unknown key `{key}`")));
            continue;
        }
        if let Some(prev) = entries.get(key) {
            errors.push(err(line, format!("`{key}` already set on line {}", prev.line)));
            continue;
        }
        entries.insert(key.to_string(), Entry { line, value });
    }

    let mut cx = Cx {
        entries: &entries,
        errors: &mut errors,
    };

    let mut params = PhysParams::dimensionless();
    if let Some(e) = entries.get("preset") {
        match PhysParams::preset(e.value) {
            Some(p) => params = p,
            None => cx.errors.push(err(
                e.line,
                format!("unknown preset `{}` (known: {})", e.value, PhysParams::PRESETS.join(", ")),
            )),
        }
    }
    let mut custom = false;
    for (key, slot, positive) in [
        ("m", &mut params.m, true),
        ("g", &mut params.g, false),
        ("hbar", &mut params.hbar, true),
        ("c", &mut params.c, true),
        ("G", &mut params.grav_const, false),
        ("M", &mut params.body_mass, false),
    ] {
        if let Some(v) = cx.number(key) {
            let ok = if positive { v > 0.0 } else { v >= 0.0 };
            if ok {
                *slot = v;
                custom = true;
            } else {
                cx.invalid(key, format!("{key} = {v} violates {key} {} 0", if positive { ">" } else { ">=" }));
            }
        }
    }
    if custom {
        params.label = format!("{} (modified)", params.label);
    }

    let d = cx.positive("d").unwrap_or(1.0);
    let delta_h = cx.number("delta_h").unwrap_or(0.1 * d);
    let x = cx.positive("x").unwrap_or(DEFAULT_RADIUS);
    let sigma = cx.positive("sigma").unwrap_or(d / 50.0);
    if sigma > d / 10.0 {
        cx.invalid("sigma", format!("sigma = {sigma} exceeds d/10 = {}", d / 10.0));
    }
    let gauge_sigma = cx.positive("gauge_sigma").unwrap_or(d);

    let method = match entries.get("method") {
        None => Method::Analytic,
        Some(e) => Method::parse(e.value).unwrap_or_else(|| {
            cx.errors.push(err(e.line, format!("unknown method `{}` (analytic, quadrature, wavepacket)", e.value)));
            Method::Analytic
        }),
    };

    let fall = params.fall_time(d);
    let window = default_times(&params, d, 2);
    let t_start = cx.positive("t_start");
    let t_end = cx.positive("t_end");
    let count = cx.integer("t_count").unwrap_or(20);
    if count == 0 {
        cx.invalid("t_count", "t_count must be at least 1".into());
    }
    let times = match (t_start.or(window.first().copied()), t_end.or(window.last().copied())) {
        (Some(start), Some(end)) if start.is_finite() && end.is_finite() => {
            if count > 1 && end <= start {
                cx.invalid("t_end", format!("t_end = {end} must exceed t_start = {start}"));
            }
            TimeGrid {
                start,
                end,
                count: count.max(1),
            }
        }
        _ => {
            if fall.is_infinite() {
                cx.errors.push(ConfigError {
                    line: None,
                    message: "g = 0 has no fall window: set t_start and t_end".into(),
                });
            }
            TimeGrid {
                start: 1.0,
                end: 1.0,
                count: 1,
            }
        }
    };

    let grid_n = cx.integer("grid_n").unwrap_or(4096);
    if grid_n < 16 || !grid_n.is_power_of_two() {
        cx.invalid("grid_n", format!("grid_n = {grid_n} must be a power of two >= 16"));
    }
    let grid_range = match (cx.number("grid_x_min"), cx.number("grid_x_max")) {
        (Some(lo), Some(hi)) if lo < hi => Some((lo, hi)),
        (Some(lo), Some(hi)) => {
            cx.invalid("grid_x_max", format!("grid_x_max = {hi} must exceed grid_x_min = {lo}"));
            None
        }
        (None, None) => None,
        (Some(_), None) => {
            cx.invalid("grid_x_min", "grid_x_min needs grid_x_max".into());
            None
        }
        (None, Some(_)) => {
            cx.invalid("grid_x_max", "grid_x_max needs grid_x_min".into());
            None
        }
    };

    let accel = match cx.number("accel") {
        Some(a) if a < 0.0 => {
            cx.invalid("accel", format!("accel = {a} violates accel >= 0"));
            params.g
        }
        Some(a) => a,
        None => params.g,
    };
    let max_dt = cx.positive("dt");
    let out = entries.get("out").map(|e| PathBuf::from(e.value)).unwrap_or_else(|| PathBuf::from("."));

    let sweep_m = match entries.get("sweep_m") {
        None => vec![1.0, 2.0],
        Some(e) => {
            let parsed: Result<Vec<f64>, _> = e.value.split(',').map(|s| s.trim().parse::<f64>()).collect();
            match parsed {
                Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite() && *x > 0.0) => v,
                _ => {
                    cx.errors.push(err(e.line, format!("sweep_m = `{}` must be a comma list of positive numbers", e.value)));
                    Vec::new()
                }
            }
        }
    };

    let mut tol = Tolerances::default();
    for (key, e) in &entries {
        if let Some(name) = key.strip_prefix("tol.") {
            match e.value.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    tol.set(name, v).expect("key checked above");
                }
                _ => errors.push(err(e.line, format!("`{}` is not a finite number", e.value))),
            }
        }
    }

    if errors.is_empty() {
        Ok(RunConfig {
            params,
            d,
            delta_h,
            x,
            sigma,
            gauge_sigma,
            times,
            method,
            grid_n,
            grid_range,
            accel,
            max_dt,
            out,
            tol,
            sweep_m,
        })
    } else {
        errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        Err(errors)
    }
}

fn err(line: usize, message: String) -> ConfigError {
    ConfigError {
        line: Some(line),
        message,
    }
}

struct Cx<'a, 'b> {
    entries: &'a BTreeMap<String, Entry<'b>>,
    errors: &'a mut Vec<ConfigError>,
}

impl Cx<'_, '_> {
    fn number(&mut self, key: &str) -> Option<f64> {
        let e = self.entries.get(key)?;
        match e.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.errors.push(err(e.line, format!("{key}: `{}` is not a finite number", e.value)));
                None
            }
        }
    }

    fn positive(&mut self, key: &str) -> Option<f64> {
        let v = self.number(key)?;
        if v > 0.0 {
            Some(v)
        } else {
            self.invalid(key, format!("{key} = {v} violates {key} > 0"));
            None
        }
    }

    fn integer(&mut self, key: &str) -> Option<usize> {
        let e = self.entries.get(key)?;
        match e.value.parse::<usize>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors.push(err(e.line, format!("{key}: `{}` is not a non-negative integer", e.value)));
                None
            }
        }
    }

    fn invalid(&mut self, key: &str, message: String) {
        let line = self.entries.get(key).map(|e| e.line);
        self.errors.push(ConfigError { line, message });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::codata;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config("preset=dimensionless\nd=1.0").unwrap();
        assert_eq!(cfg.params, PhysParams::dimensionless());
        assert_eq!(cfg.d, 1.0);
        assert_eq!(cfg.sigma, 0.02);
        assert_eq!(cfg.method, Method::Analytic);
        assert_eq!(cfg.times.count, 20);
        assert!((cfg.times.end - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(cfg.grid_n, 4096);
        assert_eq!(cfg.tol, Tolerances::default());
    }

    #[test]
    fn negative_field_cites_invariant_and_line() {
        let errs = parse_config("g=-1").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, Some(1));
        assert!(errs[0].message.contains("g >= 0"), "{}", errs[0]);
    }

    #[test]
    fn explicit_values_beat_preset_in_any_order() {
        let cfg = parse_config("d=1e-2\npreset=neutron").unwrap();
        assert_eq!(cfg.params.m, codata::NEUTRON_MASS);
        assert_eq!(cfg.d, 1e-2);
        let cfg = parse_config("m=3\npreset=neutron").unwrap();
        assert_eq!(cfg.params.m, 3.0);
        assert_eq!(cfg.params.hbar, codata::HBAR);
    }

    #[test]
    fn all_errors_are_reported() {
        let text = "# header\nfoo=1\nm=abc\npreset=moon\n\nbad line\ng=1 # fine\ntol.spot=x\ntol.nope=1\ngrid_n=1000";
        let errs = parse_config(text).unwrap_err();
        let lines: Vec<Option<usize>> = errs.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![Some(2), Some(3), Some(4), Some(6), Some(8), Some(9), Some(10)]);
    }

    #[test]
    fn duplicates_rejected() {
        let errs = parse_config("d=1\nd=2").unwrap_err();
        assert_eq!(errs[0].line, Some(2));
    }

    #[test]
    fn flat_space_needs_explicit_times() {
        assert!(parse_config("g=0").is_err());
        let cfg = parse_config("g=0\nt_start=0.5\nt_end=2\nt_count=4").unwrap();
        assert_eq!(cfg.times.samples(), vec![0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn tolerance_and_sweep_keys() {
        let cfg = parse_config("tol.c3_rel=1e-4\nsweep_m=1, 2,4\nmethod=wavepacket\ngrid_x_min=-5\ngrid_x_max=7").unwrap();
        assert_eq!(cfg.tol.c3_rel, 1e-4);
        assert_eq!(cfg.sweep_m, vec![1.0, 2.0, 4.0]);
        assert_eq!(cfg.method, Method::Wavepacket);
        assert_eq!(cfg.grid_range, Some((-5.0, 7.0)));
    }

    #[test]
    fn time_grid_ends_exactly() {
        let g = TimeGrid {
            start: 0.1,
            end: 1.0,
            count: 7,
        };
        let s = g.samples();
        assert_eq!(s[6], 1.0);
        assert_eq!(s[0], 0.1);
    }
}
