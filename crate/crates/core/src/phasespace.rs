//! Wigner function W(ξ) = (2/π)·Tr[ρ D(ξ) Π D(−ξ)] = (2/π)·Tr[ρ D(2ξ) Π],
//! with Π the photon-number parity, so that −2/π ≤ W ≤ 2/π. Grids,
//! CSV/PGM export and lobe counting.

use std::f64::consts::FRAC_2_PI;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{self, FieldState};
use crate::openquantum::DensityMatrix;
use crate::output::fmt17;

/// Anything with a Wigner function.
pub trait PhaseSpaceState: Sync {
    fn dim(&self) -> usize;
    /// Tr[ρ M Π] for a matrix M on the truncated space.
    fn parity_weighted_trace(&self, m: &Array2<C64>) -> C64;
}

fn parity(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl PhaseSpaceState for FieldState {
    fn dim(&self) -> usize {
        FieldState::dim(self)
    }

    fn parity_weighted_trace(&self, m: &Array2<C64>) -> C64 {
        let psi = self.amplitudes();
        let flipped: Array1<C64> = psi.iter().enumerate().map(|(n, z)| z * parity(n)).collect();
        let mv = m.dot(&flipped);
        psi.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

impl PhaseSpaceState for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn parity_weighted_trace(&self, m: &Array2<C64>) -> C64 {
        let rho = self.matrix();
        let d = rho.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..d {
            let p = parity(n);
            for k in 0..d {
                acc += rho[[n, k]] * m[[k, n]] * p;
            }
        }
        acc
    }
}

/// W at a single phase-space point.
pub fn wigner_point<S: PhaseSpaceState + ?Sized>(state: &S, xi: C64) -> f64 {
    let m = fock::displacement_elements(xi * 2.0, state.dim());
    FRAC_2_PI * state.parity_weighted_trace(&m).re
}

/// Closed rectangle in phase space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn square(half_width: f64) -> Self {
        Bounds {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
        }
    }

    /// ±(√s + 3).
    pub fn for_exclusion_circle(s: usize) -> Self {
        Bounds::square((s as f64).sqrt() + 3.0)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::InvalidParameter(format!("invalid grid bounds {self:?}")));
        }
        Ok(())
    }
}

/// Default raster size per axis.
pub const DEFAULT_GRID_POINTS: usize = 121;

/// Samples of W on a uniform grid including both endpoints on each axis.
/// `values[[j, i]]` sits at (x_i, y_j).
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub bounds: Bounds,
    pub nx: usize,
    pub ny: usize,
    pub values: Array2<f64>,
}

fn axis(min: f64, max: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        min
    } else {
        min + (max - min) * i as f64 / (n - 1) as f64
    }
}

impl WignerGrid {
    pub fn x(&self, i: usize) -> f64 {
        axis(self.bounds.x_min, self.bounds.x_max, self.nx, i)
    }

    pub fn y(&self, j: usize) -> f64 {
        axis(self.bounds.y_min, self.bounds.y_max, self.ny, j)
    }

    pub fn dx(&self) -> f64 {
        (self.bounds.x_max - self.bounds.x_min) / (self.nx.max(2) - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.bounds.y_max - self.bounds.y_min) / (self.ny.max(2) - 1) as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Point of the largest value.
    pub fn argmax(&self) -> (f64, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for ((j, i), &v) in self.values.indexed_iter() {
            if v > best.2 {
                best = (j, i, v);
            }
        }
        (self.x(best.1), self.y(best.0))
    }

    /// Trapezoid-rule integral over the rectangle.
    pub fn integral(&self) -> f64 {
        let wx = |i: usize| if i == 0 || i + 1 == self.nx { 0.5 } else { 1.0 };
        let wy = |j: usize| if j == 0 || j + 1 == self.ny { 0.5 } else { 1.0 };
        let sum: f64 = self.values.indexed_iter().map(|((j, i), v)| wx(i) * wy(j) * v).sum();
        sum * self.dx() * self.dy()
    }

    /// Writes `x,y,w` rows, x fastest, starting at (x_min, y_min).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,w")?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                writeln!(out, "{},{},{}", fmt17(self.x(i)), fmt17(self.y(j)), fmt17(self.values[[j, i]]))?;
            }
        }
        Ok(())
    }

    /// Binary 8-bit PGM, top row at y_max, W mapped linearly from
    /// [−2/π, 2/π] to [0, 255].
    pub fn write_pgm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "P5")?;
        write!(
            out,
            "# x_min={} x_max={} y_min={} y_max={}\n# w_min={} w_max={}\n",
            fmt17(self.bounds.x_min),
            fmt17(self.bounds.x_max),
            fmt17(self.bounds.y_min),
            fmt17(self.bounds.y_max),
            fmt17(-FRAC_2_PI),
            fmt17(FRAC_2_PI)
        )?;
        write!(out, "{} {}\n255\n", self.nx, self.ny)?;
        let mut pixels = Vec::with_capacity(self.nx * self.ny);
        for j in (0..self.ny).rev() {
            for i in 0..self.nx {
                pixels.push(gray(self.values[[j, i]]));
            }
        }
        out.write_all(&pixels)
    }
}

/// Gray level of a Wigner value.
pub fn gray(w: f64) -> u8 {
    let t = (w + FRAC_2_PI) / (2.0 * FRAC_2_PI);
    (t.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// W over a grid, rows evaluated in parallel.
pub fn wigner_grid<S: PhaseSpaceState + ?Sized>(state: &S, bounds: Bounds, nx: usize, ny: usize) -> Result<WignerGrid> {
    bounds.validate()?;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParameter(format!("grid size {nx}x{ny}")));
    }
    let rows: Vec<Vec<f64>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let y = axis(bounds.y_min, bounds.y_max, ny, j);
            (0..nx)
                .map(|i| wigner_point(state, C64::new(axis(bounds.x_min, bounds.x_max, nx, i), y)))
                .collect()
        })
        .collect();
    let values = Array2::from_shape_fn((ny, nx), |(j, i)| rows[j][i]);
    Ok(WignerGrid { bounds, nx, ny, values })
}

pub fn export_csv(grid: &WignerGrid, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    grid.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn export_pgm(grid: &WignerGrid, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    grid.write_pgm(&mut out)?;
    out.flush()?;
    Ok(())
}

/// Reads a grid written by [`export_csv`].
pub fn read_csv(path: &Path) -> Result<WignerGrid> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line.trim() != "x,y,w" {
                return Err(Error::InvalidParameter(format!("unexpected header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", lineno + 1)))?;
        if fields.len() != 3 {
            return Err(Error::InvalidParameter(format!("line {}: expected 3 fields", lineno + 1)));
        }
        rows.push((fields[0], fields[1], fields[2]));
    }
    if rows.is_empty() {
        return Err(Error::InvalidParameter("grid file has no data".into()));
    }
    let y0 = rows[0].1;
    let nx = rows.iter().take_while(|r| r.1 == y0).count();
    if rows.len() % nx != 0 {
        return Err(Error::InvalidParameter("ragged grid".into()));
    }
    let ny = rows.len() / nx;
    let bounds = Bounds {
        x_min: rows[0].0,
        x_max: rows[nx - 1].0,
        y_min: y0,
        y_max: rows[rows.len() - 1].1,
    };
    let values = Array2::from_shape_fn((ny, nx), |(j, i)| rows[j * nx + i].2);
    Ok(WignerGrid { bounds, nx, ny, values })
}

/// Convolves the grid with an isotropic Gaussian of standard deviation
/// `sigma` (phase-space units) along each axis. With σ² = 1/4 the result
/// is the Husimi Q function.
pub fn smooth(grid: &WignerGrid, sigma: f64) -> WignerGrid {
    let kernel = |step: f64| -> Vec<f64> {
        let half = (4.0 * sigma / step).ceil() as isize;
        (-half..=half)
            .map(|k| (-(k as f64 * step).powi(2) / (2.0 * sigma * sigma)).exp() * step / (sigma * (2.0 * std::f64::consts::PI).sqrt()))
            .collect()
    };
    let conv = |data: &Array2<f64>, ker: &[f64], along_x: bool| -> Array2<f64> {
        let half = (ker.len() / 2) as isize;
        let (ny, nx) = data.dim();
        Array2::from_shape_fn((ny, nx), |(j, i)| {
            let mut acc = 0.0;
            for (k, w) in ker.iter().enumerate() {
                let off = k as isize - half;
                let (jj, ii) = if along_x { (j as isize, i as isize + off) } else { (j as isize + off, i as isize) };
                if jj >= 0 && ii >= 0 && (jj as usize) < ny && (ii as usize) < nx {
                    acc += w * data[[jj as usize, ii as usize]];
                }
            }
            acc
        })
    };
    let rows = conv(&grid.values, &kernel(grid.dx()), true);
    let values = conv(&rows, &kernel(grid.dy()), false);
    WignerGrid { values, ..grid.clone() }
}

/// Positive lobes: strict local maxima of the Husimi-smoothed grid that reach
/// `min_fraction` of its global maximum. Interference fringes average out
/// under the smoothing, leaving one peak per coherent component.
pub fn count_lobes(grid: &WignerGrid, min_fraction: f64) -> Vec<(f64, f64)> {
    let q = smooth(grid, 0.5);
    let top = q.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (ny, nx) = q.values.dim();
    let mut peaks = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let v = q.values[[j, i]];
            if v < min_fraction * top {
                continue;
            }
            let mut is_max = true;
            for dj in -1isize..=1 {
                for di in -1isize..=1 {
                    if dj == 0 && di == 0 {
                        continue;
                    }
                    let (jj, ii) = (j as isize + dj, i as isize + di);
                    if jj < 0 || ii < 0 || jj as usize >= ny || ii as usize >= nx {
                        continue;
                    }
                    let w = q.values[[jj as usize, ii as usize]];
                    if w > v || (w == v && (dj, di) < (0, 0)) {
                        is_max = false;
                    }
                }
            }
            if is_max {
                peaks.push((q.x(i), q.y(j)));
            }
        }
    }
    peaks
}
