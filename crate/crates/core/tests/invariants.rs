//! Phase-space invariants of the averaged dynamics at production scale.

use khps_core::eigen::{kh_eigenpairs, FdDomain};
use khps_core::laser::PulseParams;
use khps_core::phasespace::{SuperpositionWigner, WignerGrid, WignerWindow};
use khps_core::potential::{kh_averaged_potential, PotentialModel};
use khps_core::{Complex, SpatialGrid};

/// Largest |x| among the cells of highest |W| that hold half of ∬|W|.
fn half_mass_extent(w: &WignerGrid) -> f64 {
    let win = &w.window;
    let mut cells: Vec<(f64, f64)> = Vec::with_capacity(w.values.len());
    for i in 0..win.n_x {
        for j in 0..win.n_p {
            cells.push((w.at(i, j).abs(), win.x(i)));
        }
    }
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let total: f64 = cells.iter().map(|c| c.0).sum();
    let (mut acc, mut extent) = (0.0, 0.0f64);
    for (v, x) in cells {
        if acc >= 0.5 * total {
            break;
        }
        acc += v;
        extent = extent.max(x.abs());
    }
    extent
}

#[test]
fn coherent_state_is_confined_in_momentum_not_position() {
    let grid = SpatialGrid::production();
    let model = PotentialModel::default();
    let pulse = PulseParams::production();
    let avg = kh_averaged_potential(&model, &grid, pulse.alpha0(), 2048).unwrap();
    let (_, kh) = kh_eigenpairs(&avg, &FdDomain::default()).unwrap();
    let well = avg.local_minima().iter().map(|m| m.x.abs()).fold(0.0, f64::max);
    let s = 0.5f64.sqrt();
    let sup = SuperpositionWigner::new(
        &kh[0],
        &kh[1],
        (Complex::new(s, 0.0), Complex::new(s, 0.0)),
        &WignerWindow::default(),
    )
    .unwrap();
    let t10 = 2.0 * std::f64::consts::PI / sup.omega10();
    let mut failures = Vec::new();
    for k in 0..8 {
        let t = t10 * k as f64 / 8.0;
        let w = sup.at(t);
        let inside = 1.0 - w.momentum_tail_fraction(0.25);
        let extent = half_mass_extent(&w);
        if inside < 0.99 || extent <= well {
            failures.push(format!(
                "t = {t:.1}: inside |p| ≤ 0.25 = {inside:.4}, half-mass x-extent {extent:.2} vs well {well:.2}"
            ));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
