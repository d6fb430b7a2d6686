//! Adaptive quadrature: globally adaptive Gauss–Kronrod (7/15) in one dimension and
//! adaptive Simpson cubature over rectangles.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::sum::order_independent_sum;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature did not reach tolerance {tol:e} within {cap} subdivisions (estimate {estimate}, error {error:e})")]
    SubdivisionCap {
        tol: f64,
        cap: usize,
        estimate: f64,
        error: f64,
    },
    #[error("integrand produced a non-finite value at {at:?}")]
    NonFinite { at: Vec<f64> },
    #[error("invalid integration bounds")]
    InvalidBounds,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadratureError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadratureError::NonFinite { at: vec![c] });
    }
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = h * x;
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        if !f1.is_finite() || !f2.is_finite() {
            return Err(QuadratureError::NonFinite {
                at: vec![if f1.is_finite() { c + dx } else { c - dx }],
            });
        }
        kron += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok((kron * h, ((kron - gauss) * h).abs()))
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive G7/K15 quadrature of `f` over `[a, b]`.
///
/// Stops once the summed error estimate is below `max(tol_abs, tol_rel * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol_abs: f64,
    tol_rel: f64,
    max_subdivisions: usize,
) -> Result<QuadResult, QuadratureError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadratureError::InvalidBounds);
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&f, lo, hi)?;
    let mut heap = BinaryHeap::new();
    heap.push(Cell {
        a: lo,
        b: hi,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut total_err = e;
    let mut n = 1;
    loop {
        let target = tol_abs.max(tol_rel * total.abs());
        if total_err <= target {
            break;
        }
        if n >= max_subdivisions {
            return Err(QuadratureError::SubdivisionCap {
                tol: target,
                cap: max_subdivisions,
                estimate: total,
                error: total_err,
            });
        }
        let cell = heap.pop().expect("heap holds at least one cell");
        let mid = 0.5 * (cell.a + cell.b);
        if mid <= cell.a || mid >= cell.b {
            // cannot split further; accept what we have
            heap.push(Cell { error: 0.0, ..cell });
            total_err -= cell.error;
            continue;
        }
        let (v1, e1) = gk15(&f, cell.a, mid)?;
        let (v2, e2) = gk15(&f, mid, cell.b)?;
        total += v1 + v2 - cell.value;
        total_err += e1 + e2 - cell.error;
        heap.push(Cell {
            a: cell.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Cell {
            a: mid,
            b: cell.b,
            value: v2,
            error: e2,
        });
        n += 1;
    }
    // Re-sum the cells in a fixed order so the result does not carry the drift of
    // the incremental updates.
    let mut cells: Vec<Cell> = heap.into_vec();
    cells.sort_by(|x, y| x.a.total_cmp(&y.a));
    let values: Vec<f64> = cells.iter().map(|c| c.value).collect();
    let errors: Vec<f64> = cells.iter().map(|c| c.error).collect();
    Ok(QuadResult {
        value: sign * order_independent_sum(&values),
        error: order_independent_sum(&errors),
        subdivisions: n,
    })
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn square(half_width: f64) -> Self {
        Self::new(-half_width, half_width, -half_width, half_width)
    }

    fn quarters(&self) -> [Rect; 4] {
        let xm = 0.5 * (self.x0 + self.x1);
        let ym = 0.5 * (self.y0 + self.y1);
        [
            Rect::new(self.x0, xm, self.y0, ym),
            Rect::new(xm, self.x1, self.y0, ym),
            Rect::new(self.x0, xm, ym, self.y1),
            Rect::new(xm, self.x1, ym, self.y1),
        ]
    }
}

fn simpson_rect<F: Fn(f64, f64) -> f64>(f: &F, r: &Rect) -> Result<f64, QuadratureError> {
    const W: [f64; 3] = [1.0, 4.0, 1.0];
    let xs = [r.x0, 0.5 * (r.x0 + r.x1), r.x1];
    let ys = [r.y0, 0.5 * (r.y0 + r.y1), r.y1];
    let mut acc = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let v = f(x, y);
            if !v.is_finite() {
                return Err(QuadratureError::NonFinite { at: vec![x, y] });
            }
            acc += W[i] * W[j] * v;
        }
    }
    Ok(acc * (r.x1 - r.x0) * (r.y1 - r.y0) / 36.0)
}

#[derive(Debug, Clone, Copy)]
struct Cell2 {
    rect: Rect,
    coarse: f64,
    fine: f64,
    error: f64,
}

impl PartialEq for Cell2 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell2 {}
impl PartialOrd for Cell2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell2 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.rect.x0.total_cmp(&self.rect.x0))
            .then_with(|| other.rect.y0.total_cmp(&self.rect.y0))
    }
}

fn make_cell2<F: Fn(f64, f64) -> f64>(f: &F, rect: Rect) -> Result<Cell2, QuadratureError> {
    let coarse = simpson_rect(f, &rect)?;
    let mut fine = 0.0;
    for q in rect.quarters() {
        fine += simpson_rect(f, &q)?;
    }
    Ok(Cell2 {
        rect,
        coarse,
        fine,
        error: (fine - coarse).abs() / 15.0,
    })
}

/// Globally adaptive Simpson cubature over a rectangle.
///
/// Each cell carries a 3×3 Simpson estimate and the refined estimate from its four
/// quarters; the Richardson-corrected difference is the cell error. The cell with the
/// largest error is split until the total error is below `tol_abs`. `max_cells` caps
/// the number of live cells.
pub fn integrate_rect<F: Fn(f64, f64) -> f64>(
    f: F,
    rect: Rect,
    tol_abs: f64,
    max_cells: usize,
) -> Result<QuadResult, QuadratureError> {
    if !(rect.x0 < rect.x1 && rect.y0 < rect.y1) {
        return Err(QuadratureError::InvalidBounds);
    }
    let mut heap = BinaryHeap::new();
    // Start from a modest uniform grid so narrow features are not missed entirely.
    let seed = 8;
    let dx = (rect.x1 - rect.x0) / seed as f64;
    let dy = (rect.y1 - rect.y0) / seed as f64;
    let mut total_err = 0.0;
    for i in 0..seed {
        for j in 0..seed {
            let r = Rect::new(
                rect.x0 + i as f64 * dx,
                if i + 1 == seed { rect.x1 } else { rect.x0 + (i + 1) as f64 * dx },
                rect.y0 + j as f64 * dy,
                if j + 1 == seed { rect.y1 } else { rect.y0 + (j + 1) as f64 * dy },
            );
            let c = make_cell2(&f, r)?;
            total_err += c.error;
            heap.push(c);
        }
    }
    while total_err > tol_abs {
        if heap.len() + 3 > max_cells {
            let fine: Vec<f64> = heap.iter().map(|c| c.fine).collect();
            return Err(QuadratureError::SubdivisionCap {
                tol: tol_abs,
                cap: max_cells,
                estimate: order_independent_sum(&fine),
                error: total_err,
            });
        }
        let cell = heap.pop().expect("non-empty");
        total_err -= cell.error;
        for q in cell.rect.quarters() {
            let c = make_cell2(&f, q)?;
            total_err += c.error;
            heap.push(c);
        }
    }
    let cells = heap.into_vec();
    let n = cells.len();
    let values: Vec<f64> = cells
        .iter()
        .map(|c| c.fine + (c.fine - c.coarse) / 15.0)
        .collect();
    let errors: Vec<f64> = cells.iter().map(|c| c.error).collect();
    Ok(QuadResult {
        value: order_independent_sum(&values),
        error: order_independent_sum(&errors),
        subdivisions: n,
    })
}

/// Composite trapezoid rule on a uniform grid.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = super::sum::CompensatedSum::new();
    acc.add(0.5 * (f(a) + f(b)));
    for i in 1..n {
        acc.add(f(a + i as f64 * h));
    }
    acc.value() * h
}
