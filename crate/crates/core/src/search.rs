//! Derivative-free local refinement shared by the lower-bound polisher and
//! the ground-truth oracles.

/// Grid points per half-axis of the refinement window, by dimension.
fn half_points(n: usize) -> usize {
    match n {
        1 => 20,
        2 => 10,
        _ => 3,
    }
}

const MAX_ROUNDS: usize = 4000;

/// Shrinking-window grid search on a box.
///
/// Each round evaluates a regular grid over `center ± width` (clipped to the
/// box) and recenters on the best point. The window halves when the center
/// survives, keeps its size when the best point sits on the window edge and
/// contracts by 0.8 otherwise, so narrow valleys of a max-type function are
/// followed without relying on coordinate moves. `f` may return
/// `+∞` to mark infeasible points.
pub(crate) fn zoom_minimize<F>(
    f: F,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    initial_width: f64,
    min_width: f64,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let s = half_points(n) as i64;
    let mut center = start.to_vec();
    let mut best = f(&center);
    let mut width = initial_width;
    let mut probe = vec![0.0; n];
    let mut offsets = vec![-s; n];
    for _ in 0..MAX_ROUNDS {
        if width < min_width {
            break;
        }
        let mut improved: Option<(Vec<f64>, bool)> = None;
        let mut round_best = best;
        offsets.iter_mut().for_each(|o| *o = -s);
        loop {
            for i in 0..n {
                probe[i] = (center[i] + width * offsets[i] as f64 / s as f64).clamp(lower[i], upper[i]);
            }
            let v = f(&probe);
            if v < round_best {
                round_best = v;
                let on_edge = offsets.iter().any(|o| o.abs() == s);
                improved = Some((probe.clone(), on_edge));
            }
            // odometer over the (2s+1)^n grid
            let mut axis = 0;
            while axis < n {
                offsets[axis] += 1;
                if offsets[axis] <= s {
                    break;
                }
                offsets[axis] = -s;
                axis += 1;
            }
            if axis == n {
                break;
            }
        }
        match improved {
            Some((p, on_edge)) => {
                center = p;
                best = round_best;
                if !on_edge {
                    width *= 0.8;
                }
            }
            None => width *= 0.5,
        }
    }
    (center, best)
}
