//! Derivative-free simplex minimization.

use serde::Serialize;

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Stop when the spread of objective values across the simplex drops below this.
    pub f_tol: f64,
    /// ... and the simplex diameter drops below this.
    pub x_tol: f64,
    pub max_evals: usize,
    /// Number of restarts from the current best vertex with a shrunken simplex.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            f_tol: 1e-10,
            x_tol: 1e-10,
            max_evals: 4000,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `x0`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let mut best = run_once(&mut f, x0, opts.initial_step, opts, 0);
    let mut step = opts.initial_step;
    for _ in 0..opts.restarts {
        step *= 0.1;
        let start = best.x.clone();
        let next = run_once(&mut f, &start, step.max(opts.x_tol * 10.0), opts, best.evals);
        let improved = next.f < best.f - opts.f_tol;
        let evals = next.evals;
        let iterations = best.iterations + next.iterations;
        if next.f <= best.f {
            best = next;
        }
        best.evals = evals;
        best.iterations = iterations;
        if !improved || best.evals >= opts.max_evals {
            break;
        }
    }
    best
}

fn run_once<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x0: &[f64],
    step: f64,
    opts: &NelderMeadOptions,
    evals_so_far: usize,
) -> NelderMeadResult {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;

    let n = x0.len();
    let mut evals = evals_so_far;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = f(x0);
    evals += 1;
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        evals += 1;
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_spread = (simplex[n].1 - simplex[0].1).abs();
        let x_spread = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if f_spread <= opts.f_tol && x_spread <= opts.x_tol.max(1e-15) {
            converged = true;
            break;
        }
        if x_spread <= 1e-15 {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();

        let point = |coef: f64, buf: &mut Vec<f64>| {
            for i in 0..n {
                buf[i] = centroid[i] + coef * (worst.0[i] - centroid[i]);
            }
        };

        point(-ALPHA, &mut trial);
        let fr = f(&trial);
        evals += 1;
        if fr < simplex[0].1 {
            let reflected = trial.clone();
            point(-GAMMA, &mut trial);
            let fe = f(&trial);
            evals += 1;
            simplex[n] = if fe < fr { (trial.clone(), fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (trial.clone(), fr);
            continue;
        }
        let (coef, reference) = if fr < worst.1 { (-RHO, fr) } else { (RHO, worst.1) };
        point(coef, &mut trial);
        let fc = f(&trial);
        evals += 1;
        if fc < reference {
            simplex[n] = (trial.clone(), fc);
            continue;
        }
        // shrink toward the best vertex
        let best = simplex[0].0.clone();
        for (x, v) in simplex.iter_mut().skip(1) {
            for i in 0..n {
                x[i] = best[i] + SIGMA * (x[i] - best[i]);
            }
            *v = f(x);
            evals += 1;
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        f: v,
        evals,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_rosenbrock_minimum() {
        let r = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &NelderMeadOptions {
                initial_step: 0.5,
                f_tol: 1e-14,
                x_tol: 1e-10,
                max_evals: 20_000,
                restarts: 3,
            },
        );
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{:?}", r);
    }

    #[test]
    fn converges_on_kinked_maximum() {
        // max of a min of planes: the optimum sits on a kink
        let g = |x: &[f64]| -(x[0] + 0.3).min(0.5 - x[0]).min(0.2 - x[1]).min(x[1] + 1.0);
        let r = minimize(g, &[0.0, 0.0], &NelderMeadOptions::default());
        assert!((r.f + 0.4).abs() < 1e-8, "{:?}", r);
    }
}
