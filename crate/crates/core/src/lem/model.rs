//! Stream-power landscape evolution: uplift, fluvial incision and linear diffusion.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lem::flow::{route_into, RoutingScratch};
use crate::lem::grid::GridTopography;
use crate::scalar::Real;

/// Free parameters of the forward model, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    Rainfall,
    Erodibility,
    MExponent,
    NExponent,
    CMarine,
    CSurface,
    Uplift,
}

impl ParamName {
    pub fn label(self) -> &'static str {
        match self {
            ParamName::Rainfall => "rainfall",
            ParamName::Erodibility => "erodibility",
            ParamName::MExponent => "m",
            ParamName::NExponent => "n",
            ParamName::CMarine => "c_marine",
            ParamName::CSurface => "c_surface",
            ParamName::Uplift => "uplift",
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Model parameters. Units: rainfall m/a, erodibility 1/a, diffusion m²/a, uplift mm/a.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector<T> {
    pub rainfall: T,
    pub erodibility: T,
    pub m_exponent: T,
    pub n_exponent: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_marine: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_surface: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uplift: Option<T>,
}

impl<T: Real> ParameterVector<T> {
    pub fn get(&self, name: ParamName) -> Option<T> {
        match name {
            ParamName::Rainfall => Some(self.rainfall),
            ParamName::Erodibility => Some(self.erodibility),
            ParamName::MExponent => Some(self.m_exponent),
            ParamName::NExponent => Some(self.n_exponent),
            ParamName::CMarine => self.c_marine,
            ParamName::CSurface => self.c_surface,
            ParamName::Uplift => self.uplift,
        }
    }

    /// Assembles a vector from values listed in the order of `names`.
    pub fn from_values(names: &[ParamName], values: &[T]) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::DimensionMismatch(format!("{} names for {} values", names.len(), values.len())));
        }
        let lookup = |n: ParamName| names.iter().position(|&x| x == n).map(|i| values[i]);
        let required = |n: ParamName| lookup(n).ok_or_else(|| Error::InvalidConfig(format!("missing parameter {n}")));
        let p = Self {
            rainfall: required(ParamName::Rainfall)?,
            erodibility: required(ParamName::Erodibility)?,
            m_exponent: required(ParamName::MExponent)?,
            n_exponent: required(ParamName::NExponent)?,
            c_marine: lookup(ParamName::CMarine),
            c_surface: lookup(ParamName::CSurface),
            uplift: lookup(ParamName::Uplift),
        };
        Ok(p)
    }

    pub fn to_values(&self, names: &[ParamName]) -> Result<Vec<T>> {
        names
            .iter()
            .map(|&n| self.get(n).ok_or_else(|| Error::InvalidConfig(format!("parameter {n} not set"))))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        [
            Some(self.rainfall),
            Some(self.erodibility),
            Some(self.m_exponent),
            Some(self.n_exponent),
            self.c_marine,
            self.c_surface,
            self.uplift,
        ]
        .iter()
        .flatten()
        .all(|v| v.is_finite())
    }

    fn uplift_rate_m_per_year(&self) -> T {
        self.uplift.map_or(T::zero(), |u| u * T::lit(1e-3))
    }
}

/// Run configuration: time stepping and where erosion/deposition is recorded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemConfig {
    /// Years.
    pub duration: f64,
    /// Years.
    pub time_step: f64,
    pub n_checkpoints: usize,
    /// (row, col) of every recorded site.
    pub sediment_sites: Vec<(usize, usize)>,
}

impl LemConfig {
    pub const DEFAULT_DURATION: f64 = 1.0e6;
    pub const DEFAULT_TIME_STEP: f64 = 1.0e4;
    pub const DEFAULT_CHECKPOINTS: usize = 4;
    pub const DEFAULT_SITES: usize = 10;

    /// Desk-scale defaults for a grid of the given shape.
    pub fn desk(rows: usize, cols: usize) -> Self {
        Self {
            duration: Self::DEFAULT_DURATION,
            time_step: Self::DEFAULT_TIME_STEP,
            n_checkpoints: Self::DEFAULT_CHECKPOINTS,
            sediment_sites: diagonal_sites(rows, cols, Self::DEFAULT_SITES),
        }
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.time_step).round() as usize
    }

    /// Step indices (1-based) at which the sediment record is sampled.
    pub fn checkpoint_steps(&self) -> Vec<usize> {
        let steps = self.steps();
        (1..=self.n_checkpoints).map(|k| k * steps / self.n_checkpoints).collect()
    }

    pub fn validate<T: Real>(&self, grid: &GridTopography<T>) -> Result<()> {
        if !(self.time_step > 0.0) || !self.time_step.is_finite() {
            return Err(Error::InvalidConfig("time step must be positive".into()));
        }
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidConfig("duration must be non-negative".into()));
        }
        let steps = self.duration / self.time_step;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::InvalidConfig("duration must be a multiple of the time step".into()));
        }
        if self.n_checkpoints == 0 {
            return Err(Error::InvalidConfig("at least one checkpoint is required".into()));
        }
        if self.steps() > 0 && self.steps() % self.n_checkpoints != 0 {
            return Err(Error::InvalidConfig("checkpoints must fall on whole time steps".into()));
        }
        if self.sediment_sites.is_empty() {
            return Err(Error::InvalidConfig("at least one sediment site is required".into()));
        }
        if let Some(&(r, c)) = self.sediment_sites.iter().find(|&&(r, c)| r >= grid.rows() || c >= grid.cols()) {
            return Err(Error::InvalidConfig(format!("sediment site ({r}, {c}) outside grid")));
        }
        Ok(())
    }
}

/// `count` sites evenly spaced along the interior main diagonal.
pub fn diagonal_sites(rows: usize, cols: usize, count: usize) -> Vec<(usize, usize)> {
    let count = count.min(rows.saturating_sub(2)).min(cols.saturating_sub(2)).max(1);
    let place = |n: usize, k: usize| {
        let span = n.saturating_sub(3) as f64;
        1 + ((k + 1) as f64 / (count + 1) as f64 * span).round() as usize
    };
    (0..count).map(|k| (place(rows, k), place(cols, k))).collect()
}

/// Cumulative elevation change (minus imposed uplift) per site and checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SedimentRecord<T> {
    pub sites: usize,
    pub times: usize,
    /// Row-major `sites x times`.
    pub values: Vec<T>,
}

impl<T: Real> SedimentRecord<T> {
    pub fn zeros(sites: usize, times: usize) -> Self {
        Self { sites, times, values: vec![T::zero(); sites * times] }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let times = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != times) {
            return Err(Error::DimensionMismatch("ragged sediment rows".into()));
        }
        Ok(Self { sites: rows.len(), times, values: rows.concat() })
    }

    #[inline]
    pub fn get(&self, site: usize, time: usize) -> T {
        self.values[site * self.times + time]
    }

    pub fn set(&mut self, site: usize, time: usize, value: T) {
        self.values[site * self.times + time] = value;
    }

    pub fn check_shape(&self, other: &Self) -> Result<()> {
        if self.sites == other.sites && self.times == other.times {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{}x{} sediment record vs {}x{}",
                self.sites, self.times, other.sites, other.times
            )))
        }
    }

    /// CSV with one row per site: `site,row,col,t1,...`, times in years as headers.
    pub fn write_csv<W: Write>(&self, out: W, sites: &[(usize, usize)], checkpoint_years: &[f64]) -> Result<()> {
        if sites.len() != self.sites || checkpoint_years.len() != self.times {
            return Err(Error::DimensionMismatch("site/time labels do not match record".into()));
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["site".to_string(), "row".into(), "col".into()];
        header.extend(checkpoint_years.iter().map(|t| format!("t{t}")));
        w.write_record(&header)?;
        for (j, &(r, c)) in sites.iter().enumerate() {
            let mut rec = vec![j.to_string(), r.to_string(), c.to_string()];
            rec.extend((0..self.times).map(|t| self.get(j, t).to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput<T> {
    pub final_topography: GridTopography<T>,
    pub sediment: SedimentRecord<T>,
}

/// Per-run state for repeated steps with fixed parameters.
struct Kernel<T> {
    params: ParameterVector<T>,
    dt: T,
    sea_level: T,
    rows: usize,
    cols: usize,
    cell_size: T,
    /// `(rainfall * k * cell_area)^m` indexed by upstream cell count `k`.
    discharge_pow: Vec<T>,
    routing: RoutingScratch,
    receiver: Vec<usize>,
    cells: Vec<usize>,
    order: Vec<usize>,
    buffer: Vec<T>,
}

impl<T: Real> Kernel<T> {
    fn new(params: &ParameterVector<T>, dt: T, sea_level: T, rows: usize, cols: usize, cell_size: T) -> Self {
        let cell_area = cell_size * cell_size;
        let discharge_pow = (0..=rows * cols)
            .map(|k| (params.rainfall * T::lit(k as f64) * cell_area).powf(params.m_exponent))
            .collect();
        Self {
            params: params.clone(),
            dt,
            sea_level,
            rows,
            cols,
            cell_size,
            discharge_pow,
            routing: RoutingScratch::default(),
            receiver: Vec::new(),
            cells: Vec::new(),
            order: Vec::new(),
            buffer: Vec::new(),
        }
    }

    fn is_interior(&self, i: usize) -> bool {
        let (r, c) = (i / self.cols, i % self.cols);
        r > 0 && c > 0 && r + 1 < self.rows && c + 1 < self.cols
    }

    fn step(&mut self, h: &mut [T], step_index: usize) -> Result<()> {
        let (rows, cols) = (self.rows, self.cols);

        if let Some(u) = self.params.uplift {
            let rise = u * T::lit(1e-3) * self.dt;
            for r in 1..rows.saturating_sub(1) {
                for x in &mut h[r * cols + 1..(r + 1) * cols - 1] {
                    *x += rise;
                }
            }
        }

        route_into(rows, cols, h, &mut self.routing, &mut self.receiver, &mut self.cells, &mut self.order);

        // Incision from the post-uplift surface, never cutting below the receiver.
        self.buffer.clear();
        self.buffer.extend_from_slice(h);
        let diag = self.cell_size * T::lit(std::f64::consts::SQRT_2);
        let k_dt = self.params.erodibility * self.dt;
        let n = self.params.n_exponent;
        for i in 0..h.len() {
            let rcv = self.receiver[i];
            if rcv == i || !self.is_interior(i) {
                continue;
            }
            let drop = h[i] - h[rcv];
            let dist = if i / cols == rcv / cols || i % cols == rcv % cols { self.cell_size } else { diag };
            let slope = drop / dist;
            let slope_n = if n == T::one() { slope } else { slope.powf(n) };
            let eroded = k_dt * self.discharge_pow[self.cells[i]] * slope_n;
            self.buffer[i] = if !(eroded < drop) {
                h[rcv]
            } else if eroded > T::zero() {
                h[i] - eroded
            } else {
                h[i]
            };
        }
        h.copy_from_slice(&self.buffer);

        let c_marine = self.params.c_marine;
        let c_surface = self.params.c_surface;
        if c_marine.is_some() || c_surface.is_some() {
            let c_marine = c_marine.unwrap_or(T::zero());
            let c_surface = c_surface.unwrap_or(T::zero());
            let scale = self.dt / (self.cell_size * self.cell_size);
            for r in 1..rows.saturating_sub(1) {
                for c in 1..cols - 1 {
                    let i = r * cols + c;
                    let here = self.buffer[i];
                    let lap = self.buffer[i - cols] + self.buffer[i + cols] + self.buffer[i - 1] + self.buffer[i + 1]
                        - T::lit(4.0) * here;
                    let coeff = if here >= self.sea_level { c_surface } else { c_marine };
                    h[i] = here + coeff * scale * lap;
                }
            }
        }

        if h.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::NumericalOverflow { step: step_index })
        }
    }
}

/// Advances `topo` by one time step of `dt` years.
///
/// Order of processes: uplift of interior cells, stream-power incision
/// `K (P A)^m S^n dt` clamped at the receiver elevation, then explicit linear
/// diffusion with the surface or marine coefficient depending on `sea_level`.
/// Boundary cells never change.
pub fn step<T: Real>(topo: &GridTopography<T>, params: &ParameterVector<T>, dt: T, sea_level: T) -> Result<GridTopography<T>> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidConfig("time step must be positive".into()));
    }
    if !params.is_finite() {
        return Err(Error::NumericalOverflow { step: 0 });
    }
    let mut kernel = Kernel::new(params, dt, sea_level, topo.rows(), topo.cols(), topo.cell_size());
    let mut out = topo.clone();
    kernel.step(out.elevations_mut(), 1)?;
    Ok(out)
}

/// Runs the model for `config.duration` years and records the sediment history.
pub fn simulate<T: Real>(initial: &GridTopography<T>, params: &ParameterVector<T>, config: &LemConfig) -> Result<SimulationOutput<T>> {
    config.validate(initial)?;
    if !params.is_finite() {
        return Err(Error::NumericalOverflow { step: 0 });
    }
    let n_sites = config.sediment_sites.len();
    let mut sediment = SedimentRecord::zeros(n_sites, config.n_checkpoints);
    let steps = config.steps();
    if steps == 0 {
        return Ok(SimulationOutput { final_topography: initial.clone(), sediment });
    }

    let dt = T::lit(config.time_step);
    let mut kernel = Kernel::new(params, dt, initial.sea_level(), initial.rows(), initial.cols(), initial.cell_size());
    let mut topo = initial.clone();
    let uplift_rate = params.uplift_rate_m_per_year();
    let checkpoints = config.checkpoint_steps();
    let mut next = 0;
    for s in 1..=steps {
        kernel.step(topo.elevations_mut(), s)?;
        while next < checkpoints.len() && checkpoints[next] == s {
            let years = T::lit(s as f64 * config.time_step);
            for (j, &(r, c)) in config.sediment_sites.iter().enumerate() {
                let baseline = if initial.is_boundary(r, c) { T::zero() } else { uplift_rate * years };
                sediment.set(j, next, topo.get(r, c) - (initial.get(r, c) + baseline));
            }
            next += 1;
        }
    }
    Ok(SimulationOutput { final_topography: topo, sediment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn params(rainfall: f64, uplift: Option<f64>, diffusion: Option<(f64, f64)>) -> ParameterVector<f64> {
        ParameterVector {
            rainfall,
            erodibility: 5e-6,
            m_exponent: 0.5,
            n_exponent: 1.0,
            c_marine: diffusion.map(|d| d.0),
            c_surface: diffusion.map(|d| d.1),
            uplift,
        }
    }

    fn rough(rows: usize, cols: usize, seed: u64) -> GridTopography<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        GridTopography::from_fn(rows, cols, 1000.0, 0.0, |r, c| (r + c) as f64 * 20.0 + rng.random_range(-30.0..30.0)).unwrap()
    }

    #[test]
    fn inert_parameters_leave_grid_unchanged() {
        let g = rough(8, 9, 1);
        let p = params(0.0, Some(0.0), Some((0.0, 0.0)));
        assert_eq!(step(&g, &p, 1000.0, 0.0).unwrap(), g);
    }

    #[test]
    fn uplift_only_raises_interior_by_rate_times_dt() {
        let g = GridTopography::flat(5, 5, 1000.0, 3.0).unwrap();
        let mut p = params(1.5, Some(1.0), None);
        p.erodibility = 0.0;
        let out = step(&g, &p, 1000.0, 0.0).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                let expect = if g.is_boundary(r, c) { 3.0 } else { 4.0 };
                assert_relative_eq!(out.get(r, c), expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn flat_grid_does_not_erode() {
        let g = GridTopography::flat(6, 6, 1000.0, 250.0).unwrap();
        let out = step(&g, &params(3.0, None, None), 1e4, 0.0).unwrap();
        assert_eq!(out, g);
    }

    #[test]
    fn erosion_never_raises_and_stops_at_receiver() {
        for seed in 0..20 {
            let g = rough(10, 10, seed);
            let mut p = params(3.0, None, None);
            p.erodibility = 1e-3; // strong enough to hit the clamp everywhere
            let out = step(&g, &p, 1e4, 0.0).unwrap();
            let flow = crate::lem::flow::flow_route(&g);
            for i in 0..g.len() {
                assert!(out.elevations()[i] <= g.elevations()[i]);
                let rcv = flow.receiver[i];
                assert!(out.elevations()[i] >= g.elevations()[rcv]);
            }
        }
    }

    #[test]
    fn diffusion_change_equals_boundary_flux() {
        let g = rough(7, 8, 3);
        let mut p = params(0.0, None, Some((0.4, 0.4)));
        p.erodibility = 0.0;
        let dt = 1000.0;
        let out = step(&g, &p, dt, -1e9).unwrap();
        let (rows, cols) = (g.rows(), g.cols());
        let interior = |r: usize, c: usize| !g.is_boundary(r, c);
        let mut change = 0.0;
        let mut flux = 0.0;
        for r in 0..rows {
            for c in 0..cols {
                if !interior(r, c) {
                    continue;
                }
                change += out.get(r, c) - g.get(r, c);
                for (dr, dc) in [(-1i32, 0i32), (1, 0), (0, -1), (0, 1)] {
                    let (rr, cc) = ((r as i32 + dr) as usize, (c as i32 + dc) as usize);
                    if !interior(rr, cc) {
                        flux += g.get(rr, cc) - g.get(r, c);
                    }
                }
            }
        }
        flux *= 0.4 * dt / (1000.0 * 1000.0);
        assert_relative_eq!(change, flux, epsilon = 1e-9);
    }

    #[test]
    fn marine_coefficient_applies_below_sea_level() {
        let mut g = GridTopography::flat(3, 3, 1.0, 0.0).unwrap();
        g.set(1, 1, -1.0);
        let mut p = params(0.0, None, Some((0.1, 0.0)));
        p.erodibility = 0.0;
        let out = step(&g, &p, 1.0, 0.0).unwrap();
        assert_relative_eq!(out.get(1, 1), -1.0 + 0.1 * 4.0, epsilon = 1e-12);
        p.c_marine = Some(0.0);
        p.c_surface = Some(0.1);
        assert_eq!(step(&g, &p, 1.0, 0.0).unwrap(), g);
    }

    #[test]
    fn unstable_diffusion_overflows() {
        let g = rough(8, 8, 5);
        let mut p = params(1.5, None, Some((0.5, 1e300)));
        p.erodibility = 5e-6;
        let cfg = LemConfig { duration: 1e6, time_step: 1e4, n_checkpoints: 4, sediment_sites: vec![(3, 3)] };
        assert!(matches!(simulate(&g, &p, &cfg), Err(Error::NumericalOverflow { .. })));
        assert!(matches!(step(&g, &p, -1.0, 0.0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn zero_duration_is_identity() {
        let g = rough(6, 6, 2);
        let cfg = LemConfig { duration: 0.0, time_step: 1e3, n_checkpoints: 4, sediment_sites: vec![(2, 2), (3, 3)] };
        let out = simulate(&g, &params(1.5, Some(1.0), None), &cfg).unwrap();
        assert_eq!(out.final_topography, g);
        assert!(out.sediment.values.iter().all(|&v| v == 0.0));
        assert_eq!((out.sediment.sites, out.sediment.times), (2, 4));
    }

    #[test]
    fn uplift_is_excluded_from_record() {
        let g = GridTopography::flat(6, 6, 1000.0, 0.0).unwrap();
        let mut p = params(0.0, Some(1.0), None);
        p.erodibility = 0.0;
        let cfg = LemConfig::desk(6, 6);
        let out = simulate(&g, &p, &cfg).unwrap();
        assert!(out.sediment.values.iter().all(|v| v.abs() < 1e-9));
        assert_relative_eq!(out.final_topography.get(2, 2), 1000.0, epsilon = 1e-6);
    }

    #[test]
    fn config_validation() {
        let g = GridTopography::<f64>::flat(4, 4, 1.0, 0.0).unwrap();
        let good = LemConfig { duration: 100.0, time_step: 10.0, n_checkpoints: 5, sediment_sites: vec![(1, 1)] };
        assert!(good.validate(&g).is_ok());
        assert_eq!(good.checkpoint_steps(), vec![2, 4, 6, 8, 10]);
        let mut bad = good.clone();
        bad.time_step = 30.0;
        assert!(bad.validate(&g).is_err());
        let mut bad = good.clone();
        bad.n_checkpoints = 3;
        assert!(bad.validate(&g).is_err());
        let mut bad = good.clone();
        bad.sediment_sites = vec![(4, 0)];
        assert!(bad.validate(&g).is_err());
        let mut bad = good;
        bad.sediment_sites.clear();
        assert!(bad.validate(&g).is_err());
    }

    #[test]
    fn diagonal_sites_are_interior_and_distinct() {
        let sites = diagonal_sites(32, 32, 10);
        assert_eq!(sites.len(), 10);
        assert!(sites.iter().all(|&(r, c)| r == c && (1..31).contains(&r)));
        assert!(sites.windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(diagonal_sites(8, 8, 10).len(), 6);
    }

    #[test]
    fn parameter_vector_round_trip() {
        use ParamName::*;
        let names = [Rainfall, Erodibility, MExponent, NExponent, Uplift];
        let p = ParameterVector::from_values(&names, &[1.5, 5e-6, 0.5, 1.0, 1.0]).unwrap();
        assert_eq!(p.c_marine, None);
        assert_eq!(p.to_values(&names).unwrap(), vec![1.5, 5e-6, 0.5, 1.0, 1.0]);
        assert!(p.to_values(&[CSurface]).is_err());
        assert!(ParameterVector::from_values(&[Rainfall], &[1.0]).is_err());
    }

    #[test]
    fn sediment_csv_layout() {
        let rec = SedimentRecord::from_rows(&[vec![1.0, -2.0], vec![0.5, 0.25]]).unwrap();
        let mut buf = Vec::new();
        rec.write_csv(&mut buf, &[(1, 1), (2, 2)], &[5e5, 1e6]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "site,row,col,t500000,t1000000\n0,1,1,1,-2\n1,2,2,0.5,0.25\n");
    }

    #[test]
    fn works_in_single_precision() {
        let g = GridTopography::<f32>::flat(8, 8, 1000.0, 0.0).unwrap();
        let p = ParameterVector { rainfall: 1.5f32, erodibility: 5e-6, m_exponent: 0.5, n_exponent: 1.0, c_marine: None, c_surface: None, uplift: Some(1.0) };
        let out = simulate(&g, &p, &LemConfig::desk(8, 8)).unwrap();
        assert!(out.final_topography.elevations().iter().any(|&h| h > 10.0));
    }
}
