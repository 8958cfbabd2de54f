//! Error against a reference, occupation rates, aerodynamic coefficients and shedding frequency.

use rustfft::{num_complex::Complex, FftPlanner};
use thiserror::Error;

use crate::lbm::SchemeSpec;
use crate::mesh::CellTree;
use crate::multiresolution::UniformField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("fields differ in shape")]
    Shape,
    #[error("moment index {0} out of range")]
    Moment(usize),
    #[error("series too short: {0} samples after the transient")]
    TooShort(usize),
    #[error("sampling times are not increasing and uniform")]
    Sampling,
    #[error("spectrum has no dominant peak (peak power {peak:.3e}, mean {mean:.3e})")]
    NoDominantPeak { peak: f64, mean: f64 },
}

/// Moment `row` of `M f` on every cell of a uniform field.
pub fn moment_field(scheme: &SchemeSpec, f: &UniformField, row: usize) -> Result<Vec<f64>, DiagnosticsError> {
    let q = scheme.q();
    if row >= q || f.q() != q {
        return Err(DiagnosticsError::Moment(row));
    }
    let m = &scheme.moment_matrix()[row * q..(row + 1) * q];
    Ok((0..f.num_cells())
        .map(|lin| m.iter().zip(f.cell(lin)).map(|(a, b)| a * b).sum())
        .collect())
}

/// `Σ|m̂̂ - m_ref| / Σ|m_ref|` over the finest grid for moment `row`; the absolute error is
/// returned when the reference moment vanishes identically.
pub fn additional_error(
    scheme: &SchemeSpec,
    adaptive: &UniformField,
    reference: &UniformField,
    row: usize,
) -> Result<f64, DiagnosticsError> {
    if adaptive.lattice() != reference.lattice()
        || adaptive.level() != reference.level()
        || adaptive.q() != reference.q()
    {
        return Err(DiagnosticsError::Shape);
    }
    let a = moment_field(scheme, adaptive, row)?;
    let r = moment_field(scheme, reference, row)?;
    let num: f64 = a.iter().zip(&r).map(|(x, y)| (x - y).abs()).sum();
    let den: f64 = r.iter().map(|y| y.abs()).sum();
    Ok(if den < 1e-300 { num } else { num / den })
}

/// Memory and mesh occupation rates `(MemOR, MeshOR)`: stored cells over all cells of the
/// full mesh, and complete leaves over finest cells.
pub fn occupation_rates(tree: &CellTree) -> (f64, f64) {
    let lat = tree.lattice();
    let mem = tree.len() as f64 / lat.cells_all_levels() as f64;
    let mesh = tree.num_leaves() as f64 / lat.cells_on_level(lat.max_level()) as f64;
    (mem, mesh)
}

/// Drag and lift coefficients `2F/(ρ0 u0² L)` with `F` the momentum removed during one step
/// divided by the step.
pub fn drag_lift(removed_momentum: [f64; 2], dt: f64, rho0: f64, u0: f64, length: f64) -> (f64, f64) {
    let norm = 2.0 / (rho0 * u0 * u0 * length * dt);
    (norm * removed_momentum[0], norm * removed_momentum[1])
}

/// Dominant frequency of a lift series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strouhal {
    pub st: f64,
    pub frequency: f64,
    /// Frequency bin of the peak.
    pub bin: usize,
    /// Width of one frequency bin.
    pub resolution: f64,
}

/// Strouhal number `L f / u0` from the dominant frequency of `(t, C_L)` samples taken at
/// uniform times, ignoring samples with `t < transient`. The series is detrended and
/// Hann-windowed before the transform.
pub fn strouhal(series: &[(f64, f64)], u0: f64, length: f64, transient: f64) -> Result<Strouhal, DiagnosticsError> {
    let s: Vec<(f64, f64)> = series.iter().copied().filter(|(t, _)| *t >= transient).collect();
    let n = s.len();
    if n < 8 {
        return Err(DiagnosticsError::TooShort(n));
    }
    let dt = (s[n - 1].0 - s[0].0) / (n - 1) as f64;
    if dt.is_nan() || dt <= 0.0 || s.windows(2).any(|w| ((w[1].0 - w[0].0) - dt).abs() > 1e-6 * dt) {
        return Err(DiagnosticsError::Sampling);
    }
    // least-squares line through the samples
    let nf = n as f64;
    let xm = (nf - 1.0) / 2.0;
    let ym = s.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxy: f64 = s.iter().enumerate().map(|(i, p)| (i as f64 - xm) * (p.1 - ym)).sum();
    let sxx: f64 = (0..n).map(|i| (i as f64 - xm).powi(2)).sum();
    let slope = sxy / sxx;
    let mut buf: Vec<Complex<f64>> = s
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (nf - 1.0)).cos();
            Complex::new(w * (p.1 - ym - slope * (i as f64 - xm)), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let power: Vec<f64> = buf[1..=n / 2].iter().map(|c| c.norm_sqr()).collect();
    let (idx, &peak) = power
        .iter()
        .enumerate()
        .fold((0, &0.0), |best, (i, p)| if *p > *best.1 { (i, p) } else { best });
    let mean = power.iter().sum::<f64>() / power.len() as f64;
    if peak.is_nan() || peak <= 0.0 || peak < 10.0 * mean {
        return Err(DiagnosticsError::NoDominantPeak { peak, mean });
    }
    let bin = idx + 1;
    let resolution = 1.0 / (nf * dt);
    let frequency = bin as f64 * resolution;
    Ok(Strouhal {
        st: length * frequency / u0,
        frequency,
        bin,
        resolution,
    })
}
