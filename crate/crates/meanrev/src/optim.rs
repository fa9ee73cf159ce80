//! Bounded Nelder–Mead direct search (internal, used by the calibrator).
//!
//! Box constraints are enforced with a smooth periodic change of variables
//! rather than clipping: each bounded coordinate `z ∈ [lo, hi]` is
//! parameterized as
//!
//! ```text
//! z = lo + (hi − lo) · sin²(θ),   θ ∈ ℝ (unconstrained),
//! ```
//!
//! so the simplex moves in an unconstrained space and can never leave the
//! box, while the objective stays smooth at the walls (clipping flattens the
//! objective there and stalls the simplex). The transform is the classic
//! bounded-parameter trick from derivative-free minimizers.
//!
//! The search is fully deterministic: no randomness, fixed coefficients
//! (reflection 1, expansion 2, contraction ½, shrink ½), and a convergence
//! test on the simplex diameter measured in the *bounded* space.

/// Box bounds for a 3-parameter search.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bounds3 {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Bounds3 {
    fn to_unconstrained(&self, z: [f64; 3]) -> [f64; 3] {
        let mut theta = [0.0; 3];
        for i in 0..3 {
            let span = self.hi[i] - self.lo[i];
            let frac = ((z[i] - self.lo[i]) / span).clamp(1e-12, 1.0 - 1e-12);
            theta[i] = frac.sqrt().asin();
        }
        theta
    }

    fn to_bounded(&self, theta: [f64; 3]) -> [f64; 3] {
        let mut z = [0.0; 3];
        for i in 0..3 {
            let s = theta[i].sin();
            z[i] = self.lo[i] + (self.hi[i] - self.lo[i]) * s * s;
        }
        z
    }
}

/// Result of one bounded Nelder–Mead run.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NmOutcome {
    /// Best point found, in the bounded space.
    pub x: [f64; 3],
    /// Objective value at `x`.
    pub loss: f64,
    /// Iterations consumed.
    pub iters: usize,
    /// Whether the simplex-diameter criterion was met before `max_iter`.
    pub converged: bool,
}

/// Minimizes `f` over the box from `start` (bounded space).
///
/// Stops when the simplex diameter in bounded space drops below `diam_tol`
/// (max-norm around the best vertex) or after `max_iter` iterations.
pub(crate) fn minimize_bounded<F: FnMut(&[f64; 3]) -> f64>(
    mut f: F,
    bounds: &Bounds3,
    start: [f64; 3],
    initial_spread: f64,
    max_iter: usize,
    diam_tol: f64,
) -> NmOutcome {
    let theta0 = bounds.to_unconstrained(start);
    let mut vertices: Vec<[f64; 3]> = Vec::with_capacity(4);
    vertices.push(theta0);
    for i in 0..3 {
        let mut v = theta0;
        v[i] += initial_spread;
        vertices.push(v);
    }
    let mut values: Vec<f64> = vertices.iter().map(|v| f(&bounds.to_bounded(*v))).collect();

    let order = |vertices: &mut Vec<[f64; 3]>, values: &mut Vec<f64>| {
        let mut idx: Vec<usize> = (0..vertices.len()).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        *vertices = idx.iter().map(|&i| vertices[i]).collect();
        *values = idx.iter().map(|&i| values[i]).collect();
    };

    let diameter = |vertices: &[[f64; 3]], bounds: &Bounds3| -> f64 {
        let best = bounds.to_bounded(vertices[0]);
        vertices[1..]
            .iter()
            .map(|v| {
                let z = bounds.to_bounded(*v);
                (0..3).map(|i| (z[i] - best[i]).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };

    order(&mut vertices, &mut values);
    let mut iters = 0;
    let mut converged = false;
    while iters < max_iter {
        if diameter(&vertices, bounds) < diam_tol {
            converged = true;
            break;
        }
        iters += 1;

        // Centroid of all but the worst vertex.
        let mut centroid = [0.0; 3];
        for v in &vertices[..3] {
            for i in 0..3 {
                centroid[i] += v[i] / 3.0;
            }
        }
        let worst = vertices[3];
        let reflect = std::array::from_fn(|i| centroid[i] + (centroid[i] - worst[i]));
        let f_reflect = f(&bounds.to_bounded(reflect));

        if f_reflect < values[0] {
            // Try expanding further along the same direction.
            let expand = std::array::from_fn(|i| centroid[i] + 2.0 * (centroid[i] - worst[i]));
            let f_expand = f(&bounds.to_bounded(expand));
            if f_expand < f_reflect {
                vertices[3] = expand;
                values[3] = f_expand;
            } else {
                vertices[3] = reflect;
                values[3] = f_reflect;
            }
        } else if f_reflect < values[2] {
            vertices[3] = reflect;
            values[3] = f_reflect;
        } else {
            // Contract toward the better of (worst, reflected).
            let (anchor, f_anchor) = if f_reflect < values[3] {
                (reflect, f_reflect)
            } else {
                (worst, values[3])
            };
            let contract = std::array::from_fn(|i| centroid[i] + 0.5 * (anchor[i] - centroid[i]));
            let f_contract = f(&bounds.to_bounded(contract));
            if f_contract < f_anchor {
                vertices[3] = contract;
                values[3] = f_contract;
            } else {
                // Shrink everything toward the best vertex.
                let best = vertices[0];
                for v in vertices.iter_mut().skip(1) {
                    for i in 0..3 {
                        v[i] = best[i] + 0.5 * (v[i] - best[i]);
                    }
                }
                for (v, val) in vertices.iter().zip(values.iter_mut()).skip(1) {
                    *val = f(&bounds.to_bounded(*v));
                }
            }
        }
        order(&mut vertices, &mut values);
    }

    NmOutcome {
        x: bounds.to_bounded(vertices[0]),
        loss: values[0],
        iters,
        converged,
    }
}
