//! Parsers for the textual grid, time and probe specifications.

use std::f64::consts::PI;

use floquet_core::models::default_probe;
use floquet_core::{CVector64, Params64, C};

use crate::error::{CliError, Result};

/// A time value, either absolute or in units of `π` or of the clock period.
///
/// Accepted forms: `3.5`, `pi`, `2pi`, `T`, `0.25T`.
pub fn parse_time(input: &str, clock_period: f64) -> Result<f64> {
    let s = input.trim();
    let (num, unit) = if let Some(p) = s.strip_suffix("pi") {
        (p, PI)
    } else if let Some(p) = s.strip_suffix('T') {
        (p, clock_period)
    } else {
        (s, 1.0)
    };
    let factor = match num.trim() {
        "" => 1.0,
        n => n.parse::<f64>().map_err(|_| CliError::parse("a time", input))?,
    };
    let t = factor * unit;
    if !t.is_finite() || t < 0.0 {
        return Err(CliError::parse("a non-negative time", input));
    }
    Ok(t)
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn split3<'a>(input: &'a str, what: &'static str) -> Result<(&'a str, &'a str, usize)> {
    let parts: Vec<&str> = input.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::parse(what, input));
    }
    let n = parts[2].trim().parse::<usize>().map_err(|_| CliError::parse(what, input))?;
    Ok((parts[0], parts[1], n))
}

/// `start:stop:points`, inclusive.
pub fn parse_time_grid(input: &str, clock_period: f64) -> Result<Vec<f64>> {
    let (a, b, n) = split3(input, "a time grid start:stop:points")?;
    if n < 2 {
        return Err(CliError::Usage(format!("time grid `{input}` needs at least 2 points")));
    }
    Ok(linspace(parse_time(a, clock_period)?, parse_time(b, clock_period)?, n))
}

/// Log-uniform `min:max:points`, or a comma list.
pub fn parse_log_list(input: &str) -> Result<Vec<f64>> {
    if input.contains(':') {
        let (a, b, n) = split3(input, "a log grid min:max:points")?;
        let lo: f64 = a.trim().parse().map_err(|_| CliError::parse("a number", a))?;
        let hi: f64 = b.trim().parse().map_err(|_| CliError::parse("a number", b))?;
        if lo <= 0.0 || hi <= 0.0 || n < 2 {
            return Err(CliError::Usage(format!("log grid `{input}` needs positive bounds and 2+ points")));
        }
        return Ok(linspace(lo.log10(), hi.log10(), n).into_iter().map(|e| 10f64.powf(e)).collect());
    }
    parse_f64_list(input)
}

pub fn parse_f64_list(input: &str) -> Result<Vec<f64>> {
    input.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| CliError::parse("a number list", input))).collect()
}

pub fn parse_usize_list(input: &str) -> Result<Vec<usize>> {
    input.split(',').map(|s| s.trim().parse::<usize>().map_err(|_| CliError::parse("an integer list", input))).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Sweep {
    pub fn new(name: &str, min: f64, max: f64, points: usize) -> Self {
        Self { name: name.to_string(), min, max, points }
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.points)
    }
}

/// `name=min:max:points`.
pub fn parse_sweep(input: &str) -> Result<Sweep> {
    let (name, rest) = input.split_once('=').ok_or_else(|| CliError::parse("a sweep name=min:max:points", input))?;
    let (a, b, n) = split3(rest, "a sweep name=min:max:points")?;
    let min = a.trim().parse().map_err(|_| CliError::parse("a number", a))?;
    let max = b.trim().parse().map_err(|_| CliError::parse("a number", b))?;
    if n < 2 {
        return Err(CliError::Usage(format!("sweep `{input}` needs at least 2 points")));
    }
    Ok(Sweep { name: name.trim().to_string(), min, max, points: n })
}

/// `name=value`.
pub fn parse_assignment(input: &str) -> Result<(String, f64)> {
    let (name, value) = input.split_once('=').ok_or_else(|| CliError::parse("name=value", input))?;
    let v = value.trim().parse().map_err(|_| CliError::parse("a number", value))?;
    Ok((name.trim().to_string(), v))
}

/// `target=source`: the target parameter copies the source at every grid point.
pub fn parse_tie(input: &str) -> Result<(String, String)> {
    let (a, b) = input.split_once('=').ok_or_else(|| CliError::parse("a tie target=source", input))?;
    Ok((a.trim().to_string(), b.trim().to_string()))
}

/// Row-major Cartesian product of the sweeps over a base parameter set,
/// with ties applied after each assignment.
pub fn grid_points(base: &Params64, sweeps: &[Sweep], ties: &[(String, String)]) -> Result<Vec<Params64>> {
    let axes: Vec<Vec<f64>> = sweeps.iter().map(Sweep::values).collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut p = base.clone();
        let mut rem = flat;
        for (axis, sweep) in axes.iter().zip(sweeps).rev() {
            p.set(&sweep.name, axis[rem % axis.len()]);
            rem /= axis.len();
        }
        for (target, source) in ties {
            let v =
                p.get(source).ok_or_else(|| CliError::Usage(format!("tie source `{source}` is not a parameter")))?;
            p.set(target, v);
        }
        out.push(p);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProbeSpec {
    /// `(|0⟩ − |1⟩)/√2`.
    GroundH0,
    Basis(usize),
    Amplitudes(Vec<C<f64>>),
}

impl ProbeSpec {
    pub fn parse(input: &str) -> Result<Self> {
        let s = input.trim();
        if s == "gs-h0" {
            return Ok(ProbeSpec::GroundH0);
        }
        if let Some(k) = s.strip_prefix("basis:") {
            return k.trim().parse().map(ProbeSpec::Basis).map_err(|_| CliError::parse("a basis index", input));
        }
        if let Some(list) = s.strip_prefix("vec:") {
            let v = parse_f64_list(list)?;
            if v.len() % 2 != 0 || v.is_empty() {
                return Err(CliError::parse("re,im pairs", input));
            }
            return Ok(ProbeSpec::Amplitudes(v.chunks(2).map(|c| C::new(c[0], c[1])).collect()));
        }
        Err(CliError::parse("a probe (gs-h0, basis:k, vec:re,im,...)", input))
    }

    pub fn vector(&self, levels: usize) -> Result<CVector64> {
        let v = match self {
            ProbeSpec::GroundH0 => {
                if levels != 2 {
                    return Err(CliError::Usage("gs-h0 probe needs a two-level model".into()));
                }
                default_probe()
            }
            ProbeSpec::Basis(k) => {
                if *k >= levels {
                    return Err(CliError::Usage(format!("basis:{k} on a {levels}-level model")));
                }
                let mut v = CVector64::zeros(levels);
                v[*k] = C::new(1.0, 0.0);
                v
            }
            ProbeSpec::Amplitudes(a) => {
                if a.len() != levels {
                    return Err(CliError::Usage(format!(
                        "probe has {} amplitudes, model has {levels} levels",
                        a.len()
                    )));
                }
                CVector64::from_vec(a.clone())
            }
        };
        Ok(v)
    }

    /// Short identifier written to the provenance column.
    pub fn id(&self) -> String {
        match self {
            ProbeSpec::GroundH0 => "gs-h0".into(),
            ProbeSpec::Basis(k) => format!("basis:{k}"),
            ProbeSpec::Amplitudes(a) => {
                let parts: Vec<String> =
                    a.iter().flat_map(|z| [format!("{:e}", z.re), format!("{:e}", z.im)]).collect();
                format!("vec:{}", parts.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times() {
        let tp = 2.0 * PI;
        assert_eq!(parse_time("2pi", tp).unwrap(), 2.0 * PI);
        assert_eq!(parse_time("pi", tp).unwrap(), PI);
        assert_eq!(parse_time("T", tp).unwrap(), tp);
        assert_eq!(parse_time("0.25T", tp).unwrap(), 0.25 * tp);
        assert_eq!(parse_time("1.5", tp).unwrap(), 1.5);
        assert!(parse_time("-1", tp).is_err());
        assert!(parse_time("xT", tp).is_err());
        let g = parse_time_grid("0:T:5", tp).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g[4], tp);
    }

    #[test]
    fn sweeps_are_row_major_with_ties() {
        let base = Params64::new().with("b0", 0.0).with("b1", 0.0);
        let sweeps = [parse_sweep("b0=1:2:2").unwrap(), parse_sweep("b1=3:5:3").unwrap()];
        let pts = grid_points(&base, &sweeps, &[]).unwrap();
        let pairs: Vec<(f64, f64)> = pts.iter().map(|p| (p.get("b0").unwrap(), p.get("b1").unwrap())).collect();
        assert_eq!(pairs, vec![(1.0, 3.0), (1.0, 4.0), (1.0, 5.0), (2.0, 3.0), (2.0, 4.0), (2.0, 5.0)]);
        let tied = grid_points(&base, &sweeps[..1], &[parse_tie("b1=b0").unwrap()]).unwrap();
        assert!(tied.iter().all(|p| p.get("b0") == p.get("b1")));
        assert!(parse_sweep("b0=1:2:1").is_err());
    }

    #[test]
    fn log_lists() {
        let d = parse_log_list("1e-8:1e-4:5").unwrap();
        assert_eq!(d.len(), 5);
        assert!((d[2] - 1e-6).abs() < 1e-18);
        assert_eq!(parse_log_list("1,2").unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn probes() {
        assert_eq!(ProbeSpec::parse("gs-h0").unwrap(), ProbeSpec::GroundH0);
        assert_eq!(ProbeSpec::parse("basis:1").unwrap().vector(2).unwrap()[1], C::new(1.0, 0.0));
        let v = ProbeSpec::parse("vec:0.6,0,0,0.8").unwrap();
        assert_eq!(v.vector(2).unwrap()[1], C::new(0.0, 0.8));
        assert!(ProbeSpec::parse("basis:2").unwrap().vector(2).is_err());
        assert!(ProbeSpec::parse("nope").is_err());
    }
}
