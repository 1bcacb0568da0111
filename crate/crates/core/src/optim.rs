//! Two-dimensional maximization: exhaustive grid scan followed by a
//! bounded Nelder-Mead polish.

/// Axis-aligned box `[lo, hi]²` sampled with spacing `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        debug_assert!(hi > lo && step > 0.0);
        Self { lo, hi, step }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).round() as usize;
        (0..=n)
            .map(|i| (self.lo + i as f64 * self.step).min(self.hi))
            .collect()
    }
}

/// Result of a grid scan on a separable-input objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMax {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Scans all pairs `(xs[i], xs[j])` in lexicographic order and keeps the
/// first strict maximum, so ties resolve to the lexicographically smallest
/// pair.
pub fn grid_argmax<F>(xs: &[f64], mut f: F) -> GridMax
where
    F: FnMut(usize, usize) -> f64,
{
    let mut best = GridMax {
        i: 0,
        j: 0,
        x: xs[0],
        y: xs[0],
        value: f64::NEG_INFINITY,
    };
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            let v = f(i, j);
            if v > best.value {
                best = GridMax {
                    i,
                    j,
                    x: xs[i],
                    y: xs[j],
                    value: v,
                };
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    /// Stop once the simplex diameter falls below this.
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.05,
            x_tol: 1e-10,
            max_iter: 4000,
        }
    }
}

/// Maximizes `f` over `[lo, hi]²` starting from `start`. Trial points are
/// clamped into the box.
pub fn nelder_mead_max<F>(
    mut f: F,
    start: [f64; 2],
    lo: f64,
    hi: f64,
    opts: NelderMeadOptions,
) -> ([f64; 2], f64)
where
    F: FnMut([f64; 2]) -> f64,
{
    let clamp = |p: [f64; 2]| [p[0].clamp(lo, hi), p[1].clamp(lo, hi)];
    // minimize g = -f
    let mut g = |p: [f64; 2]| {
        let v = f(p);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };

    let s = opts.initial_step;
    let p0 = clamp(start);
    let away = |c: f64| if c + s <= hi { c + s } else { c - s };
    let mut pts = [p0, [away(p0[0]), p0[1]], [p0[0], away(p0[1])]];
    let mut vals = [g(pts[0]), g(pts[1]), g(pts[2])];

    for _ in 0..opts.max_iter {
        // order: best (lowest g) first
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = [pts[idx[0]], pts[idx[1]], pts[idx[2]]];
        vals = [vals[idx[0]], vals[idx[1]], vals[idx[2]]];

        let diam = (1..3)
            .map(|k| ((pts[k][0] - pts[0][0]).powi(2) + (pts[k][1] - pts[0][1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        if diam < opts.x_tol {
            break;
        }

        let c = [(pts[0][0] + pts[1][0]) / 2.0, (pts[0][1] + pts[1][1]) / 2.0];
        let along = |t: f64| clamp([c[0] + t * (pts[2][0] - c[0]), c[1] + t * (pts[2][1] - c[1])]);

        let xr = along(-1.0);
        let fr = g(xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = g(xe);
            if fe < fr {
                pts[2] = xe;
                vals[2] = fe;
            } else {
                pts[2] = xr;
                vals[2] = fr;
            }
            continue;
        }
        if fr < vals[1] {
            pts[2] = xr;
            vals[2] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[2] {
            let x = along(-0.5);
            (x, g(x))
        } else {
            let x = along(0.5);
            (x, g(x))
        };
        if fc < vals[2].min(fr) {
            pts[2] = xc;
            vals[2] = fc;
            continue;
        }
        // shrink toward the best vertex
        for k in 1..3 {
            pts[k] = [
                pts[0][0] + 0.5 * (pts[k][0] - pts[0][0]),
                pts[0][1] + 0.5 * (pts[k][1] - pts[0][1]),
            ];
            vals[k] = g(pts[k]);
        }
    }

    let best = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (pts[best], -vals[best])
}
