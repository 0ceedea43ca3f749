//! Exact ball integrals of cell-valued functions and sliding extrema over ball-shaped
//! neighbourhoods of the centre lattice.
//!
//! Radii here are measured in units of the grid spacing and ball centres sit on cell
//! centres, so a single stencil serves every centre.

use crate::grid::{Ball, GridFunction};

/// Area of the disk of radius `rho` (centred at the origin) inside `[0, x] x [0, y]`, `x, y >= 0`.
fn quadrant_area(x: f64, y: f64, rho: f64) -> f64 {
    let x = x.min(rho);
    let y = y.min(rho);
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    let r2 = rho * rho;
    if x * x + y * y <= r2 {
        return x * y;
    }
    // Antiderivative of sqrt(rho^2 - t^2).
    let g = |t: f64| 0.5 * (t * (r2 - t * t).max(0.0).sqrt() + r2 * (t / rho).clamp(-1.0, 1.0).asin());
    let xs = (r2 - y * y).max(0.0).sqrt();
    y * xs + g(x) - g(xs)
}

fn signed_quadrant_area(x: f64, y: f64, rho: f64) -> f64 {
    let s = x.signum() * y.signum();
    if s == 0.0 {
        0.0
    } else {
        s * quadrant_area(x.abs(), y.abs(), rho)
    }
}

/// Area of `disk(0, rho) ∩ [x0, x1] x [y0, y1]`.
pub(crate) fn disk_rect_area(x0: f64, x1: f64, y0: f64, y1: f64, rho: f64) -> f64 {
    let a = signed_quadrant_area(x1, y1, rho) - signed_quadrant_area(x0, y1, rho) - signed_quadrant_area(x1, y0, rho)
        + signed_quadrant_area(x0, y0, rho);
    a.max(0.0)
}

/// Weights of the cells met by a ball centred on a cell centre.
#[derive(Clone, Debug)]
pub(crate) enum Stencil {
    /// Cells `|dx| <= full` have weight 1, cells `|dx| = full + 1` weight `edge`.
    Line { full: isize, edge: f64 },
    /// Row `dy` has full cells `|dx| <= rows[dy + reach]`, plus listed partial cells.
    Disk {
        reach: isize,
        rows: Vec<isize>,
        partial: Vec<(isize, isize, f64)>,
    },
}

impl Stencil {
    pub(crate) fn new(dim: usize, rho: f64) -> Self {
        if dim == 1 {
            let full = (rho - 0.5).floor() as isize;
            let edge = if full < 0 { rho } else { rho - (full as f64 + 0.5) };
            Stencil::Line {
                full: full.max(-1),
                edge,
            }
        } else {
            let reach = (rho + 0.5).ceil() as isize;
            let r2 = rho * rho;
            let mut rows = Vec::with_capacity((2 * reach + 1) as usize);
            let mut partial = Vec::new();
            for dy in -reach..=reach {
                let ay = dy.abs() as f64;
                let mut w: isize = -1;
                while {
                    let ax = (w + 1) as f64;
                    (ax + 0.5).powi(2) + (ay + 0.5).powi(2) <= r2
                } {
                    w += 1;
                }
                rows.push(w);
                let near_y = (ay - 0.5).max(0.0);
                let mut dx = w + 1;
                while {
                    let near_x = (dx as f64 - 0.5).max(0.0);
                    near_x * near_x + near_y * near_y < r2
                } {
                    let x0 = dx as f64 - 0.5;
                    let y0 = dy as f64 - 0.5;
                    let area = disk_rect_area(x0, x0 + 1.0, y0, y0 + 1.0, rho);
                    if area > 0.0 {
                        partial.push((dx, dy, area));
                        if dx != 0 {
                            partial.push((-dx, dy, area));
                        }
                    }
                    dx += 1;
                }
            }
            Stencil::Disk { reach, rows, partial }
        }
    }

    /// Sum of the stencil weights (the ball volume in cell units, for balls inside the box).
    #[cfg(test)]
    pub(crate) fn total_weight(&self) -> f64 {
        match self {
            Stencil::Line { full, edge } => {
                if *full < 0 {
                    2.0 * edge
                } else {
                    (2 * full + 1) as f64 + 2.0 * edge
                }
            }
            Stencil::Disk { rows, partial, .. } => {
                rows.iter().map(|&w| (2 * w + 1).max(0) as f64).sum::<f64>() + partial.iter().map(|p| p.2).sum::<f64>()
            }
        }
    }
}

fn prefix(values: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(values.len() + 1);
    let mut acc = 0.0;
    p.push(0.0);
    for &v in values {
        acc += v;
        p.push(acc);
    }
    p
}

/// Range sum over `[lo, hi]` (inclusive, clipped to `0..n`).
#[inline]
fn range_sum(p: &[f64], lo: isize, hi: isize) -> f64 {
    let n = (p.len() - 1) as isize;
    let lo = lo.max(0);
    let hi = hi.min(n - 1);
    if hi < lo {
        0.0
    } else {
        p[(hi + 1) as usize] - p[lo as usize]
    }
}

/// Cell-unit ball integrals at every lattice centre: `sum over cells of overlap * value`.
/// Multiply by `h^n` for the physical integral.
pub(crate) fn ball_sums(values: &[f64], dim: usize, n: usize, stencil: &Stencil) -> Vec<f64> {
    let ni = n as isize;
    match stencil {
        Stencil::Line { full, edge } => {
            let p = prefix(values);
            (0..ni)
                .map(|i| {
                    if *full < 0 {
                        return 2.0 * edge * values[i as usize];
                    }
                    let mut s = range_sum(&p, i - full, i + full);
                    let (l, r) = (i - full - 1, i + full + 1);
                    if *edge > 0.0 {
                        if l >= 0 {
                            s += edge * values[l as usize];
                        }
                        if r < ni {
                            s += edge * values[r as usize];
                        }
                    }
                    s
                })
                .collect()
        }
        Stencil::Disk { reach, rows, partial } => {
            debug_assert_eq!(dim, 2);
            let row_prefix: Vec<Vec<f64>> = values.chunks(n).map(prefix).collect();
            let mut out = vec![0.0; n * n];
            for i in 0..ni {
                for j in 0..ni {
                    let mut s = 0.0;
                    for dy in -reach..=*reach {
                        let w = rows[(dy + reach) as usize];
                        let row = i + dy;
                        if w < 0 || row < 0 || row >= ni {
                            continue;
                        }
                        s += range_sum(&row_prefix[row as usize], j - w, j + w);
                    }
                    for &(dx, dy, a) in partial {
                        let (r, c) = (i + dy, j + dx);
                        if r >= 0 && r < ni && c >= 0 && c < ni {
                            s += a * values[(r * ni + c) as usize];
                        }
                    }
                    out[(i * ni + j) as usize] = s;
                }
            }
            out
        }
    }
}

/// Exact integral of the cell-valued zero-extended `f` over an arbitrary ball.
pub fn ball_integral(f: &GridFunction, ball: &Ball) -> f64 {
    let grid = f.grid();
    let h = grid.spacing();
    let l = grid.half_width();
    let n = grid.points_per_axis() as isize;
    let v = f.values();
    let rho = ball.radius / h;
    let cx = (ball.center[0] + l) / h;
    if grid.dim() == 1 {
        let lo = (cx - rho).max(0.0);
        let hi = (cx + rho).min(n as f64);
        if hi <= lo {
            return 0.0;
        }
        let (k0, k1) = (lo.floor() as isize, (hi.ceil() as isize).min(n));
        let mut s = 0.0;
        for k in k0..k1 {
            let a = (k as f64).max(lo);
            let b = ((k + 1) as f64).min(hi);
            if b > a {
                s += (b - a) * v[k as usize];
            }
        }
        s * h
    } else {
        let cy = (ball.center[1] + l) / h;
        let i0 = ((cx - rho).floor() as isize).max(0);
        let i1 = ((cx + rho).ceil() as isize).min(n);
        let j0 = ((cy - rho).floor() as isize).max(0);
        let j1 = ((cy + rho).ceil() as isize).min(n);
        let mut s = 0.0;
        for i in i0..i1 {
            for j in j0..j1 {
                let val = v[(i * n + j) as usize];
                if val == 0.0 {
                    continue;
                }
                let x0 = i as f64 - cx;
                let y0 = j as f64 - cy;
                s += val * disk_rect_area(x0, x0 + 1.0, y0, y0 + 1.0, rho);
            }
        }
        s * h * h
    }
}

/// Running maximum of `input` over windows `[i - w, i + w]`, monotone-deque version.
pub(crate) fn sliding_max(input: &[f64], w: usize, out: &mut [f64]) {
    let n = input.len();
    let mut dq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut next = 0usize;
    for i in 0..n {
        let hi = (i + w).min(n - 1);
        while next <= hi {
            while let Some(&b) = dq.back() {
                if input[b] <= input[next] {
                    dq.pop_back();
                } else {
                    break;
                }
            }
            dq.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(w);
        while let Some(&f) = dq.front() {
            if f < lo {
                dq.pop_front();
            } else {
                break;
            }
        }
        out[i] = input[*dq.front().expect("window is non-empty")];
    }
}

/// Integer half-widths of the lattice disk `dx^2 + dy^2 <= rho^2` (closed) or `< rho^2`.
fn disk_rows(rho: f64, closed: bool) -> Vec<(isize, usize)> {
    let r2 = rho * rho;
    let inside = |dx: isize, dy: isize| {
        let d = (dx * dx + dy * dy) as f64;
        if closed {
            d <= r2
        } else {
            d < r2
        }
    };
    let reach = rho.ceil() as isize;
    let mut rows = Vec::new();
    for dy in -reach..=reach {
        if !inside(0, dy) {
            continue;
        }
        let mut w = 0isize;
        while inside(w + 1, dy) {
            w += 1;
        }
        rows.push((dy, w as usize));
    }
    rows
}

/// `out(x) = max { input(c) : c lattice centre, |c - x| <= rho }` (or `<` when `closed` is false).
pub(crate) fn neighbourhood_max(input: &[f64], dim: usize, n: usize, rho: f64, closed: bool) -> Vec<f64> {
    if dim == 1 {
        let w = if closed {
            rho.floor() as usize
        } else {
            (rho.ceil() as usize).saturating_sub(1)
        };
        let mut out = vec![0.0; n];
        sliding_max(input, w, &mut out);
        return out;
    }
    let rows = disk_rows(rho, closed);
    let mut out = vec![f64::NEG_INFINITY; n * n];
    let mut widths: Vec<usize> = rows.iter().map(|r| r.1).collect();
    widths.sort_unstable();
    widths.dedup();
    let mut rowmax = vec![0.0; n * n];
    let ni = n as isize;
    for w in widths {
        for (src, dst) in input.chunks(n).zip(rowmax.chunks_mut(n)) {
            sliding_max(src, w, dst);
        }
        for &(dy, _) in rows.iter().filter(|r| r.1 == w) {
            for i in 0..ni {
                let r = i + dy;
                if r < 0 || r >= ni {
                    continue;
                }
                let (o, s) = ((i * ni) as usize, (r * ni) as usize);
                for j in 0..n {
                    let v = rowmax[s + j];
                    if v > out[o + j] {
                        out[o + j] = v;
                    }
                }
            }
        }
    }
    out
}
