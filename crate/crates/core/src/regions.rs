//! Regime labels over the (w, p) plane together with the curves that bound
//! the regions, as plot-ready data.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exponents::{classify_regime, p_fujita, w_star, FlrwParams, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionGridSpec {
    pub resolution_w: usize,
    pub resolution_p: usize,
    /// Open lower end of the w axis.
    pub w_min: f64,
    pub w_max: f64,
    /// Open lower end of the p axis.
    pub p_min: f64,
    pub p_max: f64,
}

impl Default for RegionGridSpec {
    fn default() -> Self {
        RegionGridSpec {
            resolution_w: 200,
            resolution_p: 200,
            w_min: -0.99,
            w_max: 1.0,
            p_min: 1.0,
            p_max: 6.0,
        }
    }
}

impl RegionGridSpec {
    pub fn square(resolution: usize) -> Self {
        RegionGridSpec {
            resolution_w: resolution,
            resolution_p: resolution,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub name: String,
    /// `[w, p]` pairs inside the axis ranges.
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub n: u32,
    pub w_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// `labels[i][j]` is the regime at `(w_axis[i], p_axis[j])`.
    pub labels: Vec<Vec<Regime>>,
    pub boundary_curves: Vec<BoundaryCurve>,
}

/// `count` points on `(lo, hi]`.
fn half_open_axis(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi - lo) / count as f64;
    (1..=count)
        .map(|k| if k == count { hi } else { lo + k as f64 * step })
        .collect()
}

impl RegionGrid {
    pub fn build(n: u32, spec: &RegionGridSpec) -> Result<Self> {
        if n < 2 {
            return domain(format!("n must be >= 2, got {n}"));
        }
        if spec.resolution_w < 2 || spec.resolution_p < 2 {
            return domain("resolution must be >= 2");
        }
        if !(spec.w_min >= -1.0 && spec.w_max <= 1.0 && spec.w_min < spec.w_max) {
            return domain("w axis must lie in [-1, 1] with w_min < w_max");
        }
        if !(spec.p_min >= 1.0 && spec.p_max > spec.p_min) {
            return domain("p axis must lie in [1, inf) with p_min < p_max");
        }
        let w_axis = half_open_axis(spec.w_min, spec.w_max, spec.resolution_w);
        let p_axis = half_open_axis(spec.p_min, spec.p_max, spec.resolution_p);
        let labels = w_axis
            .iter()
            .map(|&w| {
                p_axis
                    .iter()
                    .map(|&p| classify_regime(n, w, p).map(|r| r.regime))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let in_p = |p: f64| p > spec.p_min && p <= spec.p_max;
        let w_acc = 2.0 / n as f64 - 1.0;
        let decel: Vec<f64> = w_axis.iter().copied().filter(|&w| w > w_acc).collect();
        let mut curves = Vec::new();

        let mut fujita = Vec::new();
        let mut pc = Vec::new();
        for &w in &decel {
            let f = FlrwParams::new(n, w)?;
            if let Ok(pf) = p_fujita(f.fujita_dimension()) {
                if in_p(pf) {
                    fujita.push([w, pf]);
                }
            }
            let c = f.p_crit();
            if in_p(c) {
                pc.push([w, c]);
            }
        }
        curves.push(BoundaryCurve { name: "p_fujita".into(), points: fujita });
        curves.push(BoundaryCurve { name: "p_crit".into(), points: pc });

        let vertical = |w: f64| -> Vec<[f64; 2]> { p_axis.iter().map(|&p| [w, p]).collect() };
        if w_acc > spec.w_min && w_acc <= spec.w_max {
            curves.push(BoundaryCurve {
                name: "accelerated".into(),
                points: vertical(w_acc),
            });
        }
        if let Some(ws) = w_star(n)? {
            if ws > spec.w_min && ws <= spec.w_max {
                curves.push(BoundaryCurve {
                    name: "w_star".into(),
                    points: vertical(ws),
                });
            }
        }

        Ok(RegionGrid {
            n,
            w_axis,
            p_axis,
            labels,
            boundary_curves: curves,
        })
    }

    fn nearest(axis: &[f64], x: f64) -> usize {
        axis.iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Label of the grid point nearest to `(w, p)`.
    pub fn label_near(&self, w: f64, p: f64) -> Regime {
        self.labels[Self::nearest(&self.w_axis, w)][Self::nearest(&self.p_axis, p)]
    }

    pub fn curve(&self, name: &str) -> Option<&BoundaryCurve> {
        self.boundary_curves.iter().find(|c| c.name == name)
    }

    /// `(w, p, label)` rows, w-major.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, Regime)> + '_ {
        self.w_axis.iter().enumerate().flat_map(move |(i, &w)| {
            self.p_axis
                .iter()
                .enumerate()
                .map(move |(j, &p)| (w, p, self.labels[i][j]))
        })
    }
}
