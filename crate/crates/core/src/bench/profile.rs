use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use super::BenchRow;
use crate::error::{Error, Result};

/// Smallest metric value used in a ratio; keeps near-zero timings finite.
const METRIC_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMetric {
    Iters,
    #[serde(rename = "time_s")]
    Time,
}

impl ProfileMetric {
    pub fn id(self) -> &'static str {
        match self {
            ProfileMetric::Iters => "iters",
            ProfileMetric::Time => "time_s",
        }
    }

    fn value(self, row: &BenchRow) -> Option<f64> {
        match self {
            ProfileMetric::Iters => row.iters.map(|v| v as f64),
            ProfileMetric::Time => row.time_s,
        }
    }
}

impl fmt::Display for ProfileMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ProfileMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iters" => Ok(ProfileMetric::Iters),
            "time" | "time_s" => Ok(ProfileMetric::Time),
            other => Err(Error::InvalidParameter(format!("unknown profile metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileCurve {
    pub method: String,
    /// `(τ, ρ(τ))`, τ increasing from 1.
    pub points: Vec<(f64, f64)>,
    /// Fraction of problems the method solved at all.
    pub solve_rate: f64,
    /// `r_{p,m}` per problem, in the profile's problem order; `None` when
    /// unsolved.
    pub ratios: Vec<Option<f64>>,
}

impl ProfileCurve {
    /// `ρ(τ)`, the fraction of problems with ratio at most `tau`.
    pub fn fraction_at(&self, tau: f64) -> f64 {
        let hits = self.ratios.iter().filter(|r| r.is_some_and(|r| r <= tau)).count();
        hits as f64 / self.ratios.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceProfile {
    pub metric: ProfileMetric,
    /// Problem keys `name@alpha`.
    pub problems: Vec<String>,
    pub curves: Vec<ProfileCurve>,
}

impl PerformanceProfile {
    pub fn curve(&self, method: &str) -> Option<&ProfileCurve> {
        self.curves.iter().find(|c| c.method == method)
    }
}

/// Dolan-Moré profile over the problems `(problem, α)` found in `rows`.
///
/// `r_{p,m} = t_{p,m} / min_m t_{p,m}` over converged cells, `∞` otherwise,
/// and `ρ_m(τ) = |{p : r_{p,m} <= τ}| / |P|`. Each curve is sampled on
/// `grid_points` log-spaced values of τ between 1 and the largest finite
/// ratio, merged with every finite ratio (the curve's breakpoints).
pub fn performance_profile(rows: &[BenchRow], metric: ProfileMetric, grid_points: usize) -> Result<PerformanceProfile> {
    let mut problems: Vec<String> = Vec::new();
    let mut methods: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut values: HashMap<(usize, String), f64> = HashMap::new();

    for row in rows {
        let key = format!("{}@{}", row.problem, row.alpha);
        let p = *index.entry(key.clone()).or_insert_with(|| {
            problems.push(key);
            problems.len() - 1
        });
        if !methods.contains(&row.method) {
            methods.push(row.method.clone());
        }
        if row.converged() {
            if let Some(v) = metric.value(row).filter(|v| v.is_finite()) {
                values.insert((p, row.method.clone()), v.max(METRIC_FLOOR));
            }
        }
    }
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "no converged cells: a performance profile needs at least one solved problem".into(),
        ));
    }

    let best: Vec<Option<f64>> = (0..problems.len())
        .map(|p| {
            methods
                .iter()
                .filter_map(|m| values.get(&(p, m.clone())).copied())
                .reduce(f64::min)
        })
        .collect();

    let ratios: Vec<Vec<Option<f64>>> = methods
        .iter()
        .map(|m| {
            (0..problems.len())
                .map(|p| values.get(&(p, m.clone())).map(|v| v / best[p].unwrap()))
                .collect()
        })
        .collect();

    let tau_max = ratios
        .iter()
        .flatten()
        .flatten()
        .fold(1.0_f64, |a, &b| a.max(b));
    let mut grid: Vec<f64> = if grid_points >= 2 {
        (0..grid_points)
            .map(|i| tau_max.powf(i as f64 / (grid_points - 1) as f64))
            .collect()
    } else {
        vec![1.0]
    };
    grid.push(tau_max);
    grid.extend(ratios.iter().flatten().flatten().copied());
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let curves = methods
        .into_iter()
        .zip(ratios)
        .map(|(method, ratios)| {
            let mut curve = ProfileCurve {
                method,
                points: Vec::with_capacity(grid.len()),
                solve_rate: ratios.iter().filter(|r| r.is_some()).count() as f64 / ratios.len() as f64,
                ratios,
            };
            curve.points = grid.iter().map(|&t| (t, curve.fraction_at(t))).collect();
            curve
        })
        .collect();
    Ok(PerformanceProfile {
        metric,
        problems,
        curves,
    })
}

/// CSV with header `metric,method,tau,fraction`.
pub fn write_profile_csv<W: Write>(writer: W, profile: &PerformanceProfile) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["metric", "method", "tau", "fraction"])?;
    for c in &profile.curves {
        for &(tau, frac) in &c.points {
            w.write_record([profile.metric.id(), c.method.as_str(), &tau.to_string(), &frac.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
