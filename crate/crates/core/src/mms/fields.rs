//! Closed-form space-time fields with their derivatives up to third order
//! in space and first order in time (plus the mixed `t`-`x` derivatives).

use std::ops::{Add, Mul};

/// Value and derivatives of a scalar function `g(x, y, t)` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub x: f64,
    pub y: f64,
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
    pub xxx: f64,
    pub xxy: f64,
    pub xyy: f64,
    pub yyy: f64,
    pub t: f64,
    pub tx: f64,
    pub ty: f64,
}

/// `f(k s)` for `f` in {sin, cos} with derivatives up to third order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wave {
    Sin,
    Cos,
}

impl Wave {
    /// `[f, f', f'', f''']` at `s` for wavenumber `k`.
    fn derivs(self, k: f64, s: f64) -> [f64; 4] {
        let (sn, cs) = (k * s).sin_cos();
        match self {
            Wave::Sin => [sn, k * cs, -k * k * sn, -k * k * k * cs],
            Wave::Cos => [cs, -k * sn, -k * k * cs, k * k * k * sn],
        }
    }
}

impl Jet {
    pub fn constant(c: f64) -> Self {
        Jet { v: c, ..Default::default() }
    }

    /// `a(t) X(kx x) Y(ky y)` with `da = a'(t)`.
    pub fn separable(a: f64, da: f64, wx: Wave, kx: f64, wy: Wave, ky: f64, x: f64, y: f64) -> Self {
        let [x0, x1, x2, x3] = wx.derivs(kx, x);
        let [y0, y1, y2, y3] = wy.derivs(ky, y);
        Jet {
            v: a * x0 * y0,
            x: a * x1 * y0,
            y: a * x0 * y1,
            xx: a * x2 * y0,
            xy: a * x1 * y1,
            yy: a * x0 * y2,
            xxx: a * x3 * y0,
            xxy: a * x2 * y1,
            xyy: a * x1 * y2,
            yyy: a * x0 * y3,
            t: da * x0 * y0,
            tx: da * x1 * y0,
            ty: da * x0 * y1,
        }
    }

    /// `F(g)` given `[F, F', F'', F''']` evaluated at `g.v`.
    ///
    /// Faa di Bruno up to third order:
    /// `d_i F = F' g_i`,
    /// `d_ij F = F'' g_i g_j + F' g_ij`,
    /// `d_ijk F = F''' g_i g_j g_k + F''(g_ij g_k + g_ik g_j + g_jk g_i) + F' g_ijk`,
    /// `d_t d_i F = F'' g_t g_i + F' g_ti`.
    pub fn compose(&self, f: [f64; 4]) -> Jet {
        let g = self;
        let [f0, f1, f2, f3] = f;
        let third = |gi: f64, gj: f64, gk: f64, gij: f64, gik: f64, gjk: f64, gijk: f64| {
            f3 * gi * gj * gk + f2 * (gij * gk + gik * gj + gjk * gi) + f1 * gijk
        };
        Jet {
            v: f0,
            x: f1 * g.x,
            y: f1 * g.y,
            xx: f2 * g.x * g.x + f1 * g.xx,
            xy: f2 * g.x * g.y + f1 * g.xy,
            yy: f2 * g.y * g.y + f1 * g.yy,
            xxx: third(g.x, g.x, g.x, g.xx, g.xx, g.xx, g.xxx),
            xxy: third(g.x, g.x, g.y, g.xx, g.xy, g.xy, g.xxy),
            xyy: third(g.x, g.y, g.y, g.xy, g.xy, g.yy, g.xyy),
            yyy: third(g.y, g.y, g.y, g.yy, g.yy, g.yy, g.yyy),
            t: f1 * g.t,
            tx: f2 * g.t * g.x + f1 * g.tx,
            ty: f2 * g.t * g.y + f1 * g.ty,
        }
    }

    /// `1 / g`.
    pub fn recip(&self) -> Jet {
        let s = self.v;
        self.compose([1.0 / s, -1.0 / (s * s), 2.0 / (s * s * s), -6.0 / (s * s * s * s)])
    }

    /// `log g`.
    pub fn ln(&self) -> Jet {
        let s = self.v;
        self.compose([s.ln(), 1.0 / s, -1.0 / (s * s), 2.0 / (s * s * s)])
    }

    pub fn lap(&self) -> f64 {
        self.xx + self.yy
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            x: self.x + o.x,
            y: self.y + o.y,
            xx: self.xx + o.xx,
            xy: self.xy + o.xy,
            yy: self.yy + o.yy,
            xxx: self.xxx + o.xxx,
            xxy: self.xxy + o.xxy,
            xyy: self.xyy + o.xyy,
            yyy: self.yyy + o.yyy,
            t: self.t + o.t,
            tx: self.tx + o.tx,
            ty: self.ty + o.ty,
        }
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self * o.v,
            x: self * o.x,
            y: self * o.y,
            xx: self * o.xx,
            xy: self * o.xy,
            yy: self * o.yy,
            xxx: self * o.xxx,
            xxy: self * o.xxy,
            xyy: self * o.xyy,
            yyy: self * o.yyy,
            t: self * o.t,
            tx: self * o.tx,
            ty: self * o.ty,
        }
    }
}

/// Velocity `u = c0 grad(psi) + perp_grad(stream)` with its derivatives.
///
/// `perp_grad(s) = (s_y, -s_x)`, so `div u = c0 lap(psi)` by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityJet {
    pub u: [f64; 2],
    /// `du[i][j] = d_j u_i`.
    pub du: [[f64; 2]; 2],
    /// `[lap u_1, lap u_2]`.
    pub lap: [f64; 2],
    /// `[d_x div u, d_y div u]`.
    pub grad_div: [f64; 2],
    pub ut: [f64; 2],
}

impl VelocityJet {
    pub fn new(c0: f64, psi: &Jet, stream: &Jet) -> Self {
        let (p, s) = (psi, stream);
        VelocityJet {
            u: [c0 * p.x + s.y, c0 * p.y - s.x],
            du: [[c0 * p.xx + s.xy, c0 * p.xy + s.yy], [c0 * p.xy - s.xx, c0 * p.yy - s.xy]],
            lap: [c0 * (p.xxx + p.xyy) + s.xxy + s.yyy, c0 * (p.xxy + p.yyy) - s.xxx - s.xyy],
            grad_div: [c0 * (p.xxx + p.xyy), c0 * (p.xxy + p.yyy)],
            ut: [c0 * p.tx + s.ty, c0 * p.ty - s.tx],
        }
    }

    pub fn div(&self) -> f64 {
        self.du[0][0] + self.du[1][1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(f64, f64, f64) -> Jet) {
        let (x, y, t) = (0.31, 0.67, 0.2);
        let h = 1e-5;
        let j = f(x, y, t);
        let dx = |g: fn(&Jet) -> f64| (g(&f(x + h, y, t)) - g(&f(x - h, y, t))) / (2.0 * h);
        let dy = |g: fn(&Jet) -> f64| (g(&f(x, y + h, t)) - g(&f(x, y - h, t))) / (2.0 * h);
        let dt = |g: fn(&Jet) -> f64| (g(&f(x, y, t + h)) - g(&f(x, y, t - h))) / (2.0 * h);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * (1.0 + b.abs());
        assert!(close(dx(|j| j.v), j.x));
        assert!(close(dy(|j| j.v), j.y));
        assert!(close(dx(|j| j.x), j.xx));
        assert!(close(dy(|j| j.x), j.xy));
        assert!(close(dy(|j| j.y), j.yy));
        assert!(close(dx(|j| j.xx), j.xxx));
        assert!(close(dy(|j| j.xx), j.xxy));
        assert!(close(dy(|j| j.xy), j.xyy));
        assert!(close(dy(|j| j.yy), j.yyy));
        assert!(close(dt(|j| j.v), j.t));
        assert!(close(dt(|j| j.x), j.tx));
        assert!(close(dt(|j| j.y), j.ty));
    }

    fn rho(x: f64, y: f64, t: f64) -> Jet {
        let a = 0.3 * (-2.0 * t).exp();
        Jet::constant(1.5) + Jet::separable(a, -2.0 * a, Wave::Cos, 3.0, Wave::Sin, 2.0, x, y)
    }

    #[test]
    fn separable_derivatives() {
        fd_check(rho);
    }

    #[test]
    fn reciprocal_and_log() {
        fd_check(|x, y, t| rho(x, y, t).recip());
        fd_check(|x, y, t| rho(x, y, t).ln());
    }
}
