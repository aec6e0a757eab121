use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::ObservedGroups;
use super::models::{closeness_in_chart, gelman_in_chart, CollapsedLikelihood, Model};
use crate::numerics::log_sum_exp;
use crate::{Error, Result};

const MIN_CELLS: usize = 50;

/// A uniform axis of `count` cells over `[min, max]`; nodes sit at cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, min: f64, max: f64, count: usize) -> Self {
        Self { name: name.into(), min, max, count }
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) / self.count as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.width()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.center(i)).collect()
    }

    /// Cell containing `v`, or `None` outside the axis.
    pub fn cell_of(&self, v: f64) -> Option<usize> {
        if !(v >= self.min && v < self.max) {
            return None;
        }
        Some((((v - self.min) / self.width()) as usize).min(self.count - 1))
    }

    fn validate(&self) -> Result<()> {
        if self.count < MIN_CELLS {
            return Err(Error::Config(format!("axis {} needs >= {MIN_CELLS} cells, got {}", self.name, self.count)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::Config(format!("axis {} has invalid range [{}, {}]", self.name, self.min, self.max)));
        }
        Ok(())
    }
}

/// Grid over the model's unconstrained chart: `(logit μ, ln γ)` for the
/// closeness model, `(logit(α/(α+β)), ln(α+β))` for Gelman's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x: Axis,
    pub y: Axis,
}

impl GridSpec {
    pub fn for_model(model: &Model) -> Self {
        match model {
            Model::Closeness(_) => {
                Self { x: Axis::new("logit_mu", -4.0, 0.0, 200), y: Axis::new("log_gamma", -6.0, 8.0, 280) }
            }
            Model::Gelman(_) => {
                Self { x: Axis::new("logit_mean", -4.0, 0.0, 200), y: Axis::new("log_total", -6.0, 8.0, 280) }
            }
        }
    }
}

/// Normalized log density on a 2-D grid, stored x-major: cell `(i, j)` is
/// `log_density[i * y.count + j]`. `Σ exp(log_density) · cell_area = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPosterior {
    pub x: Axis,
    pub y: Axis,
    pub transform: String,
    pub log_density: Vec<f64>,
}

impl GridPosterior {
    pub fn cell_area(&self) -> f64 {
        self.x.width() * self.y.width()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.log_density[i * self.y.count + j]
    }

    /// Total probability mass on the grid (1 up to rounding).
    pub fn mass(&self) -> f64 {
        self.log_density.iter().map(|l| l.exp()).sum::<f64>() * self.cell_area()
    }

    /// Probability mass of each x cell.
    pub fn marginal_x(&self) -> Vec<f64> {
        let area = self.cell_area();
        self.log_density.chunks(self.y.count).map(|row| row.iter().map(|l| l.exp()).sum::<f64>() * area).collect()
    }

    /// Probability mass of each y cell.
    pub fn marginal_y(&self) -> Vec<f64> {
        let area = self.cell_area();
        let mut out = vec![0.0; self.y.count];
        for row in self.log_density.chunks(self.y.count) {
            for (o, l) in out.iter_mut().zip(row) {
                *o += l.exp() * area;
            }
        }
        out
    }

    /// Chart coordinates of the highest cell.
    pub fn argmax(&self) -> (f64, f64) {
        let k = self.log_density.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).unwrap_or(0);
        (self.x.center(k / self.y.count), self.y.center(k % self.y.count))
    }

    /// Posterior expectation of `f(x, y)` under the grid approximation.
    pub fn expectation<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        let area = self.cell_area();
        let mut acc = 0.0;
        for i in 0..self.x.count {
            let x = self.x.center(i);
            for j in 0..self.y.count {
                acc += self.at(i, j).exp() * f(x, self.y.center(j));
            }
        }
        acc * area
    }

    /// CSV with header `x,y,log_density`, one row per cell.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,log_density")?;
        for i in 0..self.x.count {
            let x = self.x.center(i);
            for j in 0..self.y.count {
                writeln!(w, "{},{},{}", x, self.y.center(j), self.at(i, j))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates the collapsed log posterior in the model's chart at every cell
/// center and normalizes by log-sum-exp.
pub fn grid_posterior(model: &Model, data: &ObservedGroups, spec: &GridSpec) -> Result<GridPosterior> {
    model.validate()?;
    spec.x.validate()?;
    spec.y.validate()?;
    let lik = CollapsedLikelihood::new(data);
    let ys = spec.y.centers();
    let raw: Vec<f64> = (0..spec.x.count)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = spec.x.center(i);
            let lik = &lik;
            ys.iter().map(move |&y| match model {
                Model::Closeness(c) => closeness_in_chart(x, y, lik, c),
                Model::Gelman(g) => gelman_in_chart(x, y, lik, g),
            })
        })
        .collect();
    let raw: Vec<f64> = raw.into_iter().map(|v| if v.is_nan() { f64::NEG_INFINITY } else { v }).collect();
    let total = log_sum_exp(&raw);
    if !total.is_finite() {
        return Err(Error::Numeric("degenerate grid: every cell has zero posterior density".into()));
    }
    let shift = total + (spec.x.width() * spec.y.width()).ln();
    let transform = match model {
        Model::Closeness(_) => "logit_mu,log_gamma",
        Model::Gelman(_) => "logit_mean,log_total",
    };
    Ok(GridPosterior {
        x: spec.x.clone(),
        y: spec.y.clone(),
        transform: transform.into(),
        log_density: raw.into_iter().map(|v| v - shift).collect(),
    })
}

/// Normalized histogram of `values` over the cells of `axis`; values
/// outside the axis are counted in the normalizer but in no cell.
pub fn histogram(values: &[f64], axis: &Axis) -> Vec<f64> {
    let mut h = vec![0.0; axis.count];
    for v in values {
        if let Some(i) = axis.cell_of(*v) {
            h[i] += 1.0;
        }
    }
    let n = values.len().max(1) as f64;
    h.iter_mut().for_each(|c| *c /= n);
    h
}

/// Sums adjacent groups of `factor` cells.
pub fn coarsen(masses: &[f64], factor: usize) -> Vec<f64> {
    masses.chunks(factor.max(1)).map(|c| c.iter().sum()).collect()
}

/// `½ Σ |p_i − q_i|`, treating any mass missing from either vector as
/// sitting outside the common support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let inside: f64 = (0..n).map(|i| (get(p, i) - get(q, i)).abs()).sum();
    let outside = ((1.0 - p.iter().sum::<f64>()) - (1.0 - q.iter().sum::<f64>())).abs();
    0.5 * (inside + outside)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::models::{ClosenessModelConfig, GelmanModelConfig};

    fn data() -> ObservedGroups {
        ObservedGroups::from_pairs(&[(0, 20), (2, 20), (4, 19), (1, 18), (6, 22), (3, 14), (5, 20)]).unwrap()
    }

    #[test]
    fn normalized() {
        for model in [Model::Closeness(ClosenessModelConfig::default()), Model::Gelman(GelmanModelConfig::default())] {
            let g = grid_posterior(&model, &data(), &GridSpec::for_model(&model)).unwrap();
            assert!((g.mass() - 1.0).abs() < 1e-6);
            assert!((g.marginal_x().iter().sum::<f64>() - 1.0).abs() < 1e-6);
            assert!((g.marginal_y().iter().sum::<f64>() - 1.0).abs() < 1e-6);
            assert_eq!(g.log_density.len(), 200 * 280);
        }
    }

    #[test]
    fn deterministic() {
        let model = Model::Closeness(ClosenessModelConfig::default());
        let spec = GridSpec::for_model(&model);
        assert_eq!(grid_posterior(&model, &data(), &spec).unwrap(), grid_posterior(&model, &data(), &spec).unwrap());
    }

    #[test]
    fn rejects_coarse_axes() {
        let model = Model::Closeness(ClosenessModelConfig::default());
        let mut spec = GridSpec::for_model(&model);
        spec.x.count = 49;
        assert!(matches!(grid_posterior(&model, &data(), &spec), Err(Error::Config(_))));
        let mut spec = GridSpec::for_model(&model);
        spec.y.max = spec.y.min;
        assert!(grid_posterior(&model, &data(), &spec).is_err());
    }

    #[test]
    fn degenerate_grid() {
        let model = Model::Closeness(ClosenessModelConfig::default());
        let spec = GridSpec { x: Axis::new("x", 1e300, f64::MAX, 60), y: Axis::new("y", 800.0, 900.0, 60) };
        assert!(grid_posterior(&model, &data(), &spec).is_err());
    }

    #[test]
    fn histogram_and_tv() {
        let axis = Axis::new("x", 0.0, 1.0, 4);
        let h = histogram(&[0.1, 0.3, 0.3, 0.9, 2.0], &axis);
        assert_eq!(h, vec![0.2, 0.4, 0.0, 0.2]);
        assert_eq!(coarsen(&h, 2), vec![0.6000000000000001, 0.2]);
        assert_eq!(total_variation(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert!((total_variation(&[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!((total_variation(&[0.5, 0.3], &[0.5, 0.5]) - 0.2).abs() < 1e-15);
    }
}
