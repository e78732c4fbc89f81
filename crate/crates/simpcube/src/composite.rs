//! Composite certificates: tile a rectangle, bound the defect on every
//! cell, and sum the pieces into an integral enclosure.
//!
//! On one cell the mean integral satisfies I = A - Q + D, so the total
//! integral over the cell is area*(A - Q) plus area*D, and |D| is what
//! the a-priori bounds control. Summing over a tiling gives an estimate
//! together with a half-width that is rigorous up to the quadrature
//! tolerance used for A (Q is a finite sample sum and exact).

use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bounds::{corner_mixed_magnitudes, theorem3_bound, theorem4_bound, BoundKind, SupSource};
use crate::cubature::{a_functional, defect, q_functional};
use crate::domain::{Function2D, Rectangle, Tolerances};
use crate::error::{Error, Result};

/// Uniform nx-by-ny tiling of a rectangle, row-major: the cell at
/// column i, row j sits at index `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rect: Rectangle,
    nx: u32,
    ny: u32,
    cells: Vec<Rectangle>,
}

fn split_axis(lo: f64, hi: f64, n: u32) -> Vec<f64> {
    let w = hi - lo;
    (0..=n)
        .map(|k| if k == n { hi } else { lo + w * k as f64 / n as f64 })
        .collect()
}

impl Grid {
    pub fn new(rect: &Rectangle, nx: u32, ny: u32) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter {
                name: "grid",
                requirement: "at least one cell per axis",
                value: (nx.min(ny)) as f64,
            });
        }
        let xs = split_axis(rect.a(), rect.b(), nx);
        let ys = split_axis(rect.c(), rect.d(), ny);
        let mut cells = Vec::with_capacity(nx as usize * ny as usize);
        for j in 0..ny as usize {
            for i in 0..nx as usize {
                cells.push(Rectangle::new(xs[i], xs[i + 1], ys[j], ys[j + 1])?);
            }
        }
        Ok(Self { rect: *rect, nx, ny, cells })
    }

    pub fn rect(&self) -> &Rectangle {
        &self.rect
    }

    pub fn nx(&self) -> u32 {
        self.nx
    }

    pub fn ny(&self) -> u32 {
        self.ny
    }

    pub fn cells(&self) -> &[Rectangle] {
        &self.cells
    }

    pub fn cell(&self, i: u32, j: u32) -> &Rectangle {
        &self.cells[(j * self.nx + i) as usize]
    }
}

/// How to bound |f_xy| on each cell.
#[derive(Clone, Copy)]
pub enum CellBound<'a> {
    /// Corner values of |f_xy| from `Function2D::mixed`; valid when
    /// |f_xy| is convex per variable.
    Theorem3,
    /// Caller-supplied sup of |f_xy| over a given cell.
    Theorem4User(&'a (dyn Fn(&Rectangle) -> f64 + Sync)),
    /// One sup valid on every cell.
    Theorem4Constant(f64),
    /// Lattice-sampled sup; a diagnostic, not a proof.
    Theorem4Empirical,
}

impl CellBound<'_> {
    fn kind(&self) -> (BoundKind, Option<SupSource>) {
        match self {
            CellBound::Theorem3 => (BoundKind::Theorem3, None),
            CellBound::Theorem4User(_) | CellBound::Theorem4Constant(_) => {
                (BoundKind::Theorem4, Some(SupSource::User))
            }
            CellBound::Theorem4Empirical => (BoundKind::Theorem4, Some(SupSource::Empirical)),
        }
    }
}

/// Lattice points per axis for the empirical sup.
pub const EMPIRICAL_LATTICE: u32 = 33;

/// Max of |f_xy| over an endpoint-inclusive lattice, with the number of
/// mixed-partial evaluations. Sampling can only undershoot the true
/// sup, so treat the result as a diagnostic.
pub fn empirical_sup_mixed<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
) -> Result<(f64, u64)> {
    let n = EMPIRICAL_LATTICE;
    let xs = split_axis(rect.a(), rect.b(), n - 1);
    let ys = split_axis(rect.c(), rect.d(), n - 1);
    let mut sup = 0.0f64;
    for &x in &xs {
        for &y in &ys {
            let d = f.mixed(x, y).ok_or(Error::MissingMixedPartial)?;
            if !d.is_finite() {
                return Err(Error::NonFiniteValue { x, y, value: d });
            }
            sup = sup.max(d.abs());
        }
    }
    Ok((sup, (n as u64) * (n as u64)))
}

/// One cell's contribution to a certificate. All entries are on the
/// total-integral scale: `estimate` approximates the integral of f over
/// the cell, and the true value lies within `bound + oracle_error` of
/// it when the bound's hypothesis holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellReport {
    pub cell: Rectangle,
    /// area * (A - Q).
    pub estimate: f64,
    /// area times the defect bound.
    pub bound: f64,
    /// area times the quadrature error committed inside A.
    pub oracle_error: f64,
    pub evals: u64,
}

fn cell_report<F: Function2D + ?Sized>(
    f: &F,
    cell: &Rectangle,
    tol: &Tolerances,
    bound: &CellBound,
) -> Result<CellReport> {
    let q = q_functional(f, cell)?;
    let a = a_functional(f, cell, tol)?;
    let (mean_bound, extra_evals) = match bound {
        CellBound::Theorem3 => {
            let corners = corner_mixed_magnitudes(f, cell)?;
            (theorem3_bound(corners, cell)?, 4)
        }
        CellBound::Theorem4User(sup_of) => (theorem4_bound(sup_of(cell), cell)?, 0),
        CellBound::Theorem4Constant(sup) => (theorem4_bound(*sup, cell)?, 0),
        CellBound::Theorem4Empirical => {
            let (sup, evals) = empirical_sup_mixed(f, cell)?;
            (theorem4_bound(sup, cell)?, evals)
        }
    };
    let area = cell.area();
    Ok(CellReport {
        cell: *cell,
        estimate: area * (a.value - q),
        bound: area * mean_bound,
        oracle_error: area * a.err,
        evals: 9 + a.evals + extra_evals,
    })
}

fn records<F: Function2D + ?Sized>(
    f: &F,
    cells: &[Rectangle],
    tol: &Tolerances,
    bound: &CellBound,
    parallel: bool,
) -> Result<Vec<CellReport>> {
    #[cfg(feature = "parallel")]
    if parallel {
        return cells
            .par_iter()
            .map(|cell| cell_report(f, cell, tol, bound))
            .collect();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    cells.iter().map(|cell| cell_report(f, cell, tol, bound)).collect()
}

/// An enclosure for the integral of f: the true value lies in
/// `estimate ± half_width` whenever the cell bound's hypothesis holds
/// on every cell (and, for the empirical sup, the lattice saw the max).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub estimate: f64,
    pub half_width: f64,
    pub kind: BoundKind,
    pub sup_source: Option<SupSource>,
    pub cells: Vec<CellReport>,
    pub evals: u64,
}

impl Certificate {
    fn from_reports(
        reports: Vec<CellReport>,
        kind: BoundKind,
        sup_source: Option<SupSource>,
    ) -> Self {
        let mut estimate = 0.0;
        let mut half_width = 0.0;
        let mut evals = 0;
        for r in &reports {
            estimate += r.estimate;
            half_width += r.bound + r.oracle_error;
            evals += r.evals;
        }
        Self { estimate, half_width, kind, sup_source, cells: reports, evals }
    }
}

/// Certifies the integral of f over `rect` on a uniform nx-by-ny grid.
/// With the `parallel` feature the cells are processed with rayon;
/// results are identical to [`certify_seq`] bit for bit.
pub fn certify<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
    nx: u32,
    ny: u32,
    tol: &Tolerances,
    bound: &CellBound,
) -> Result<Certificate> {
    let grid = Grid::new(rect, nx, ny)?;
    let reports = records(f, grid.cells(), tol, bound, true)?;
    let (kind, sup_source) = bound.kind();
    Ok(Certificate::from_reports(reports, kind, sup_source))
}

/// Sequential twin of [`certify`].
pub fn certify_seq<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
    nx: u32,
    ny: u32,
    tol: &Tolerances,
    bound: &CellBound,
) -> Result<Certificate> {
    let grid = Grid::new(rect, nx, ny)?;
    let reports = records(f, grid.cells(), tol, bound, false)?;
    let (kind, sup_source) = bound.kind();
    Ok(Certificate::from_reports(reports, kind, sup_source))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefineReport {
    pub certificate: Certificate,
    pub target_met: bool,
    pub splits: u32,
}

/// Greedy adaptive refinement: starting from `start` as a single cell,
/// repeatedly bisect the cell with the largest bound contribution until
/// the summed half-width reaches `target_half_width` or the tiling has
/// `max_cells` cells. Bisection halves the longer side, so cells stay
/// well shaped.
pub fn refine<F: Function2D + ?Sized>(
    f: &F,
    start: &Rectangle,
    bound: &CellBound,
    tol: &Tolerances,
    target_half_width: f64,
    max_cells: usize,
) -> Result<RefineReport> {
    if !(target_half_width.is_finite() && target_half_width > 0.0) {
        return Err(Error::InvalidParameter {
            name: "target_half_width",
            requirement: "finite and positive",
            value: target_half_width,
        });
    }
    if max_cells == 0 {
        return Err(Error::InvalidParameter {
            name: "max_cells",
            requirement: "at least 1",
            value: 0.0,
        });
    }

    let mut reports = vec![cell_report(f, start, tol, bound)?];
    let mut splits = 0u32;
    loop {
        let half_width: f64 = reports.iter().map(|r| r.bound + r.oracle_error).sum();
        if half_width <= target_half_width || reports.len() >= max_cells {
            break;
        }
        // First cell attaining the max bound; if even the worst cell
        // contributes nothing, splitting cannot help.
        let mut worst = 0;
        for (k, r) in reports.iter().enumerate() {
            if r.bound > reports[worst].bound {
                worst = k;
            }
        }
        if reports[worst].bound <= 0.0 {
            break;
        }
        let (left, right) = reports[worst].cell.bisect();
        reports[worst] = cell_report(f, &left, tol, bound)?;
        reports.push(cell_report(f, &right, tol, bound)?);
        splits += 1;
    }
    let (kind, sup_source) = bound.kind();
    let certificate = Certificate::from_reports(reports, kind, sup_source);
    let target_met = certificate.half_width <= target_half_width;
    Ok(RefineReport { certificate, target_met, splits })
}

/// One row of a tightness scan: the worst observed |defect| / bound
/// ratio over the cells of an n-by-n grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TightnessRow {
    pub n: u32,
    pub max_ratio: f64,
}

fn cell_ratio<F: Function2D + ?Sized>(
    f: &F,
    cell: &Rectangle,
    tol: &Tolerances,
) -> Result<f64> {
    let d = defect(f, cell, tol)?;
    let (sup, _) = empirical_sup_mixed(f, cell)?;
    let bound = theorem4_bound(sup, cell)?;
    if bound > 0.0 {
        return Ok(d.defect.abs() / bound);
    }
    // A zero bound asserts a vanishing mixed partial, which forces a
    // vanishing defect. Tolerate quadrature noise, reject anything
    // larger: the claimed sup contradicts the observed defect.
    if d.defect.abs() <= tol.residual() + d.oracle_error {
        Ok(0.0)
    } else {
        Err(Error::HypothesisViolation {
            a: cell.a(),
            b: cell.b(),
            c: cell.c(),
            d: cell.d(),
            defect: d.defect,
        })
    }
}

fn scan_rows<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
    grids: &[u32],
    tol: &Tolerances,
    parallel: bool,
) -> Result<Vec<TightnessRow>> {
    let mut rows = Vec::with_capacity(grids.len());
    for &n in grids {
        let grid = Grid::new(rect, n, n)?;
        let ratios: Vec<f64>;
        #[cfg(feature = "parallel")]
        {
            ratios = if parallel {
                grid.cells()
                    .par_iter()
                    .map(|cell| cell_ratio(f, cell, tol))
                    .collect::<Result<_>>()?
            } else {
                grid.cells()
                    .iter()
                    .map(|cell| cell_ratio(f, cell, tol))
                    .collect::<Result<_>>()?
            };
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = parallel;
            ratios = grid
                .cells()
                .iter()
                .map(|cell| cell_ratio(f, cell, tol))
                .collect::<Result<_>>()?;
        }
        let max_ratio = ratios.iter().cloned().fold(0.0f64, f64::max);
        rows.push(TightnessRow { n, max_ratio });
    }
    Ok(rows)
}

/// How sharp the sup-norm bound is in practice: for each grid size n,
/// the largest |defect| / bound ratio over the n² cells, with the sup
/// sampled empirically per cell.
pub fn tightness_scan<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
    grids: &[u32],
    tol: &Tolerances,
) -> Result<Vec<TightnessRow>> {
    scan_rows(f, rect, grids, tol, true)
}

/// Sequential twin of [`tightness_scan`].
pub fn tightness_scan_seq<F: Function2D + ?Sized>(
    f: &F,
    rect: &Rectangle,
    grids: &[u32],
    tol: &Tolerances,
) -> Result<Vec<TightnessRow>> {
    scan_rows(f, rect, grids, tol, false)
}
