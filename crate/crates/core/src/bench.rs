//! Depth and width series per topology family, with fitted growth.

use serde::Serialize;

use crate::datamove::{build_data_mover, Destinations};
use crate::fit::{linear_fit, loglog_fit, scale_fit, LinearFit, ScaleFit};
use crate::pram::build_parallel_lookup;
use crate::sortnet::local_network;
use crate::topology::{build_topology, Family, Topology, TopologySpec};
use crate::{Error, Result};

/// The standard topology of `family` on `n` nodes; grids are as square as
/// `n` allows.
pub fn standard_topology(family: Family, n: usize) -> Result<Topology> {
    let spec = match family {
        Family::Line => TopologySpec::Line(n),
        Family::Hypercube => TopologySpec::Hypercube(n),
        Family::Complete => TopologySpec::Complete(n),
        Family::Grid2d => {
            let rows = (1..=n).rev().find(|r| r * r <= n && n.is_multiple_of(*r)).unwrap_or(1);
            TopologySpec::Grid { rows, cols: n / rows }
        }
        Family::Custom => return Err(Error::InvalidParameter("no standard custom topology".into())),
    };
    build_topology(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub family: String,
    pub n: usize,
    pub d: usize,
    /// Layers of the local sorting network on one wire per node.
    pub dg_layers: usize,
    pub vn_stage_depth: usize,
    pub vn_width: usize,
    pub unn_stage_depth: usize,
    pub unn_width: usize,
}

/// Builds `V_N` and `U_(N,N)` on each size and records their metrics.
pub fn bench_series(family: Family, ns: &[usize], d: usize) -> Result<Vec<BenchRow>> {
    ns.iter()
        .map(|&n| {
            let topo = standard_topology(family, n)?;
            let dg = local_network(&topo, 1)?;
            let net = local_network(&topo, 2)?;
            let vn = build_data_mover(n, d, &net, &Destinations::Quantum)?.metrics();
            let unn = build_parallel_lookup(n, d, &net)?.metrics();
            Ok(BenchRow {
                family: family.to_string(),
                n,
                d,
                dg_layers: dg.depth(),
                vn_stage_depth: vn.stage_depth,
                vn_width: vn.width,
                unn_stage_depth: unn.stage_depth,
                unn_width: unn.width,
            })
        })
        .collect()
}

/// Growth of each series: `exponent` is the slope against `log N`,
/// `log_power` the slope against `log log N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub exponent: f64,
    pub log_power: f64,
}

fn growth(ns: &[f64], ys: &[f64]) -> Result<GrowthFit> {
    let logs: Vec<f64> = ns.iter().map(|n| n.log2()).collect();
    Ok(GrowthFit { exponent: loglog_fit(ns, ys)?.slope, log_power: loglog_fit(&logs, ys)?.slope })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchFit {
    pub family: String,
    pub dg: GrowthFit,
    pub vn_stage_depth: GrowthFit,
    pub unn_stage_depth: GrowthFit,
    /// `U_(N,N)` width against `N (log2 N + d)`.
    pub unn_width: ScaleFit,
    /// Least squares of `V_N` stage-depth on `D_G` of the doubled network.
    pub vn_vs_layers: LinearFit,
}

pub fn fit_series(rows: &[BenchRow]) -> Result<BenchFit> {
    let family = rows.first().map(|r| r.family.clone()).unwrap_or_default();
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let col = |f: fn(&BenchRow) -> usize| rows.iter().map(|r| f(r) as f64).collect::<Vec<_>>();
    let model: Vec<f64> = rows.iter().map(|r| width_model(r.n, r.d)).collect();
    let vn = col(|r| r.vn_stage_depth);
    Ok(BenchFit {
        family,
        dg: growth(&ns, &col(|r| r.dg_layers))?,
        vn_stage_depth: growth(&ns, &vn)?,
        unn_stage_depth: growth(&ns, &col(|r| r.unn_stage_depth))?,
        unn_width: scale_fit(&col(|r| r.unn_width), &model)?,
        vn_vs_layers: linear_fit(&col(|r| r.dg_layers), &vn)?,
    })
}

/// `N (log2 N + d)`.
pub fn width_model(n: usize, d: usize) -> f64 {
    n as f64 * ((n as f64).log2() + d as f64)
}

/// `log2 N * log2(d log2 N)`.
pub fn depth_model(n: usize, d: usize) -> f64 {
    let l = (n as f64).log2();
    l * (d as f64 * l).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_and_line_layer_counts() {
        let h = bench_series(Family::Hypercube, &[8, 16], 1).unwrap();
        assert_eq!(h.iter().map(|r| r.dg_layers).collect::<Vec<_>>(), vec![6, 10]);
        // Two wires per node: bitonic on 2N wires.
        assert_eq!(h[0].vn_stage_depth, 2 * 10 + 3);
        let l = bench_series(Family::Line, &[4, 8], 1).unwrap();
        assert_eq!(l.iter().map(|r| r.dg_layers).collect::<Vec<_>>(), vec![4, 8]);
        let fit = fit_series(&l).unwrap();
        assert!((fit.dg.exponent - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_shapes() {
        let t = standard_topology(Family::Grid2d, 12).unwrap();
        assert_eq!(t.grid_shape(), Some((3, 4)));
        assert!(standard_topology(Family::Custom, 4).is_err());
    }
}
