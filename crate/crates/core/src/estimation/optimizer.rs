//! Sign-based gradient ascent with per-coordinate step adaptation, over a
//! box in unconstrained coordinates.

pub(crate) type Point = [f64; 2];

#[derive(Debug, Clone, Copy)]
pub(crate) struct AscentSettings {
    pub grad_tolerance: f64,
    pub max_steps: usize,
    pub fd_step: f64,
    pub initial_step: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Outcome {
    pub x: Point,
    pub value: f64,
    pub converged: bool,
    pub steps: usize,
}

const GROW: f64 = 1.2;
const SHRINK: f64 = 0.5;
const MAX_STEP: f64 = 2.0;
// For a smooth objective a small enough step along the gradient signs always
// climbs, so steps can only collapse at a maximum, including one sitting on a
// kink where the gradient never vanishes.
const STEP_TOLERANCE: f64 = 1e-10;

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Central finite differences.
pub(crate) fn fd_gradient<F: Fn(Point) -> f64>(f: &F, x: Point, h: f64) -> Point {
    let mut g = [0.0; 2];
    for i in 0..2 {
        let mut up = x;
        let mut down = x;
        up[i] += h;
        down[i] -= h;
        g[i] = (f(up) - f(down)) / (2.0 * h);
    }
    g
}

// Components pushing out of the box at an active bound carry no information.
fn project(g: Point, x: Point, lower: Point, upper: Point) -> Point {
    let mut p = g;
    for i in 0..2 {
        if (x[i] <= lower[i] && g[i] < 0.0) || (x[i] >= upper[i] && g[i] > 0.0) {
            p[i] = 0.0;
        }
    }
    p
}

// Unlike f64::signum, zero maps to zero.
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn norm(g: Point) -> f64 {
    g[0].hypot(g[1])
}

/// Maximizes `f` over the box `[lower, upper]` starting from `start`.
///
/// Steps are only accepted when they do not decrease `f`; a rejected step
/// halves every step size. Convergence means the projected gradient norm
/// fell to `grad_tolerance`, or every step size shrank below
/// `STEP_TOLERANCE`, within `max_steps`.
pub(crate) fn ascend<F: Fn(Point) -> f64>(
    f: &F,
    start: Point,
    lower: Point,
    upper: Point,
    settings: &AscentSettings,
) -> Outcome {
    let clamp = |x: Point| [x[0].clamp(lower[0], upper[0]), x[1].clamp(lower[1], upper[1])];
    let mut x = clamp(start);
    let mut value = f(x);
    if !value.is_finite() {
        return Outcome {
            x,
            value,
            converged: false,
            steps: 0,
        };
    }
    let mut delta = [settings.initial_step; 2];
    let mut prev = [0.0; 2];
    for step in 0..settings.max_steps {
        let g = project(fd_gradient(f, x, settings.fd_step), x, lower, upper);
        if g.iter().any(|v| !v.is_finite()) {
            return Outcome {
                x,
                value,
                converged: false,
                steps: step,
            };
        }
        if norm(g) <= settings.grad_tolerance {
            return Outcome {
                x,
                value,
                converged: true,
                steps: step,
            };
        }
        if delta.iter().all(|&d| d < STEP_TOLERANCE) {
            return Outcome {
                x,
                value,
                converged: true,
                steps: step,
            };
        }
        let mut dir = g;
        for i in 0..2 {
            let s = g[i] * prev[i];
            if s > 0.0 {
                delta[i] = (delta[i] * GROW).min(MAX_STEP);
            } else if s < 0.0 {
                delta[i] *= SHRINK;
                dir[i] = 0.0;
            }
        }
        let candidate = clamp([
            x[0] + sign(dir[0]) * delta[0],
            x[1] + sign(dir[1]) * delta[1],
        ]);
        let next = f(candidate);
        if next.is_finite() && next >= value {
            x = candidate;
            value = next;
            prev = dir;
        } else {
            delta = [delta[0] * SHRINK, delta[1] * SHRINK];
            prev = [0.0; 2];
        }
    }
    let g = project(fd_gradient(f, x, settings.fd_step), x, lower, upper);
    Outcome {
        x,
        value,
        converged: norm(g) <= settings.grad_tolerance,
        steps: settings.max_steps,
    }
}
