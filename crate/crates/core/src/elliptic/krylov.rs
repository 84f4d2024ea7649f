//! Matrix-free Krylov kernels on flat vectors.
//!
//! Norms are weighted by a uniform quadrature weight so residuals match the
//! discrete `L^2` norm of the corresponding grid field.

use super::SolveReport;

#[derive(Debug, Clone, Copy)]
pub struct Stop {
    /// Absolute target on the weighted residual norm.
    pub target: f64,
    pub max_iter: usize,
    pub weight: f64,
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn wnorm(a: &[f64], weight: f64) -> f64 {
    (weight * dot(a, a)).sqrt()
}

pub fn remove_mean(a: &mut [f64]) {
    let m = a.iter().sum::<f64>() / a.len() as f64;
    a.iter_mut().for_each(|v| *v -= m);
}

/// Preconditioned conjugate gradients for a symmetric positive
/// (semi-)definite operator. With `project`, the constant null space is
/// removed from every residual and from the iterate.
pub fn pcg(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precond: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    stop: Stop,
    project: bool,
) -> SolveReport {
    restarted(stop, |st| pcg_once(&mut apply, &mut precond, b, x, st, project))
}

/// Reruns a solver from its last iterate while the recomputed residual
/// misses the target but the recurrence claimed convergence (rounding
/// drift between the two).
fn restarted(stop: Stop, mut run: impl FnMut(Stop) -> SolveReport) -> SolveReport {
    let mut total = 0;
    let mut best = f64::INFINITY;
    loop {
        let left = stop.max_iter.saturating_sub(total);
        let mut rep = run(Stop { max_iter: left, ..stop });
        total += rep.iterations;
        rep.iterations = total;
        if rep.converged || total >= stop.max_iter || !(rep.final_residual < 0.5 * best) {
            return rep;
        }
        best = rep.final_residual;
    }
}

fn pcg_once(
    apply: &mut impl FnMut(&[f64], &mut [f64]),
    precond: &mut impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    stop: Stop,
    project: bool,
) -> SolveReport {
    let n = b.len();
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    if project {
        remove_mean(x);
    }
    apply(x, &mut q);
    for k in 0..n {
        r[k] = b[k] - q[k];
    }
    if project {
        remove_mean(&mut r);
    }
    let mut res = wnorm(&r, stop.weight);
    if res <= stop.target {
        return SolveReport {
            iterations: 0,
            final_residual: res,
            converged: true,
        };
    }
    precond(&r, &mut z);
    if project {
        remove_mean(&mut z);
    }
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    let mut it = 0;
    while it < stop.max_iter {
        it += 1;
        apply(&d, &mut q);
        let dq = dot(&d, &q);
        if !(dq > 0.0) {
            break;
        }
        let a = rz / dq;
        for k in 0..n {
            x[k] += a * d[k];
            r[k] -= a * q[k];
        }
        if project {
            remove_mean(&mut r);
        }
        res = wnorm(&r, stop.weight);
        if res <= stop.target {
            break;
        }
        precond(&r, &mut z);
        if project {
            remove_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            d[k] = z[k] + beta * d[k];
        }
    }
    if project {
        remove_mean(x);
    }
    // recompute the true residual for the report
    apply(x, &mut q);
    for k in 0..n {
        r[k] = b[k] - q[k];
    }
    if project {
        remove_mean(&mut r);
    }
    let res = wnorm(&r, stop.weight);
    SolveReport {
        iterations: it,
        final_residual: res,
        converged: res <= stop.target,
    }
}

/// Right-preconditioned BiCGSTAB for nonsymmetric operators.
pub fn bicgstab(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precond: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    stop: Stop,
) -> SolveReport {
    restarted(stop, |st| bicgstab_once(&mut apply, &mut precond, b, x, st))
}

fn bicgstab_once(
    apply: &mut impl FnMut(&[f64], &mut [f64]),
    precond: &mut impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    stop: Stop,
) -> SolveReport {
    let n = b.len();
    let mut r = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    apply(x, &mut tmp);
    for k in 0..n {
        r[k] = b[k] - tmp[k];
    }
    let mut res = wnorm(&r, stop.weight);
    if res <= stop.target {
        return SolveReport {
            iterations: 0,
            final_residual: res,
            converged: true,
        };
    }
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ph = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut sh = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut it = 0;
    while it < stop.max_iter {
        it += 1;
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 || omega == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        precond(&p, &mut ph);
        apply(&ph, &mut v);
        let r0v = dot(&r0, &v);
        if r0v == 0.0 {
            break;
        }
        alpha = rho / r0v;
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        if wnorm(&s, stop.weight) <= stop.target {
            for k in 0..n {
                x[k] += alpha * ph[k];
            }
            break;
        }
        precond(&s, &mut sh);
        apply(&sh, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for k in 0..n {
            x[k] += alpha * ph[k] + omega * sh[k];
            r[k] = s[k] - omega * t[k];
        }
        res = wnorm(&r, stop.weight);
        if res <= stop.target {
            break;
        }
    }
    apply(x, &mut tmp);
    for k in 0..n {
        r[k] = b[k] - tmp[k];
    }
    let res = wnorm(&r, stop.weight);
    SolveReport {
        iterations: it,
        final_residual: res,
        converged: res <= stop.target,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(x: &[f64], y: &mut [f64], shift: f64, skew: f64) {
        let n = x.len();
        for k in 0..n {
            let l = if k > 0 { x[k - 1] } else { 0.0 };
            let r = if k + 1 < n { x[k + 1] } else { 0.0 };
            y[k] = (2.0 + shift) * x[k] - (1.0 + skew) * l - (1.0 - skew) * r;
        }
    }

    #[test]
    fn cg_solves_spd_system() {
        let b: Vec<f64> = (0..50).map(|k| (k as f64 * 0.3).sin()).collect();
        let mut x = vec![0.0; 50];
        let stop = Stop { target: 1e-12, max_iter: 500, weight: 1.0 };
        let rep = pcg(|x, y| tridiag(x, y, 0.1, 0.0), |r, z| z.copy_from_slice(r), &b, &mut x, stop, false);
        assert!(rep.converged, "{rep:?}");
        let mut y = vec![0.0; 50];
        tridiag(&x, &mut y, 0.1, 0.0);
        assert!(y.iter().zip(&b).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn bicgstab_solves_nonsymmetric_system() {
        let b: Vec<f64> = (0..40).map(|k| 1.0 + (k as f64).cos()).collect();
        let mut x = vec![0.0; 40];
        let stop = Stop { target: 1e-11, max_iter: 500, weight: 1.0 };
        let rep = bicgstab(|x, y| tridiag(x, y, 0.5, 0.4), |r, z| z.copy_from_slice(r), &b, &mut x, stop);
        assert!(rep.converged, "{rep:?}");
    }
}
