use std::fmt;

use super::{Grid, GridError, Location, ScalarField, VectorField};

/// Tangential friction coefficient `b(x) >= 0` of the slip condition.
#[derive(Clone, Copy)]
pub enum Friction {
    Zero,
    Constant(f64),
    Profile(fn(f64, f64) -> f64),
}

impl fmt::Debug for Friction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Friction::Zero => write!(f, "Zero"),
            Friction::Constant(b) => write!(f, "Constant({b})"),
            Friction::Profile(_) => write!(f, "Profile(..)"),
        }
    }
}

impl PartialEq for Friction {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Friction::Zero, Friction::Zero) => true,
            (Friction::Constant(a), Friction::Constant(b)) => a == b,
            (Friction::Profile(a), Friction::Profile(b)) => *a as usize == *b as usize,
            _ => false,
        }
    }
}

impl Friction {
    #[inline]
    pub fn at(&self, x: f64, y: f64) -> f64 {
        match self {
            Friction::Zero => 0.0,
            Friction::Constant(b) => *b,
            Friction::Profile(p) => p(x, y),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Friction::Zero) || matches!(self, Friction::Constant(b) if *b == 0.0)
    }

    /// Ghost reflection factor: the ghost value `g = factor * interior`
    /// makes the one-sided wall shear equal `b` times the averaged wall
    /// velocity.
    #[inline]
    pub fn ghost_factor(&self, x: f64, y: f64, h: f64) -> f64 {
        let bh = 0.5 * self.at(x, y) * h;
        (1.0 - bh) / (1.0 + bh)
    }

    /// Nonnegativity check on every wall sample point of `grid`.
    pub fn is_admissible(&self, grid: &Grid) -> bool {
        let mut ok = true;
        for i in 0..=grid.nx {
            let x = i as f64 * grid.hx;
            ok &= self.at(x, 0.0) >= 0.0 && self.at(x, grid.ly) >= 0.0;
        }
        for j in 0..=grid.ny {
            let y = j as f64 * grid.hy;
            ok &= self.at(0.0, y) >= 0.0 && self.at(grid.lx, y) >= 0.0;
        }
        ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wall {
    Left,
    Right,
    Bottom,
    Top,
}

/// Boundary velocity data: normal components on the boundary faces and
/// tangential components at the wall points between them.
///
/// Left/right walls: `normal[j]` for `j in 0..ny` (first component),
/// `tangential[j]` for `j in 0..=ny` (second component, at `y = j hy`).
/// Bottom/top walls: `normal[i]` for `i in 0..nx`, `tangential[i]` for
/// `i in 0..=nx`. Tangential entries are raw component values.
#[derive(Debug, Clone, PartialEq)]
pub struct WallTrace {
    pub left_normal: Vec<f64>,
    pub right_normal: Vec<f64>,
    pub bottom_normal: Vec<f64>,
    pub top_normal: Vec<f64>,
    pub left_tangential: Vec<f64>,
    pub right_tangential: Vec<f64>,
    pub bottom_tangential: Vec<f64>,
    pub top_tangential: Vec<f64>,
}

impl WallTrace {
    pub fn zero(grid: &Grid) -> Self {
        Self {
            left_normal: vec![0.0; grid.ny],
            right_normal: vec![0.0; grid.ny],
            bottom_normal: vec![0.0; grid.nx],
            top_normal: vec![0.0; grid.nx],
            left_tangential: vec![0.0; grid.ny + 1],
            right_tangential: vec![0.0; grid.ny + 1],
            bottom_tangential: vec![0.0; grid.nx + 1],
            top_tangential: vec![0.0; grid.nx + 1],
        }
    }

    /// Samples a velocity function along the walls.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let mut t = Self::zero(grid);
        let (lx, ly, hx, hy) = (grid.lx, grid.ly, grid.hx, grid.hy);
        for j in 0..grid.ny {
            let y = (j as f64 + 0.5) * hy;
            t.left_normal[j] = f(0.0, y).0;
            t.right_normal[j] = f(lx, y).0;
        }
        for j in 0..=grid.ny {
            let y = j as f64 * hy;
            t.left_tangential[j] = f(0.0, y).1;
            t.right_tangential[j] = f(lx, y).1;
        }
        for i in 0..grid.nx {
            let x = (i as f64 + 0.5) * hx;
            t.bottom_normal[i] = f(x, 0.0).1;
            t.top_normal[i] = f(x, ly).1;
        }
        for i in 0..=grid.nx {
            let x = i as f64 * hx;
            t.bottom_tangential[i] = f(x, 0.0).0;
            t.top_tangential[i] = f(x, ly).0;
        }
        t
    }

    /// Reads the trace a ghost-filled field already carries.
    pub fn of_field(v: &VectorField) -> Self {
        let g = v.grid;
        let (nx, ny) = (g.nx as isize, g.ny as isize);
        let mut t = Self::zero(&g);
        for j in 0..ny {
            t.left_normal[j as usize] = v.x.at(0, j);
            t.right_normal[j as usize] = v.x.at(nx, j);
        }
        for j in 0..=ny {
            t.left_tangential[j as usize] = 0.5 * (v.y.at(-1, j) + v.y.at(0, j));
            t.right_tangential[j as usize] = 0.5 * (v.y.at(nx - 1, j) + v.y.at(nx, j));
        }
        for i in 0..nx {
            t.bottom_normal[i as usize] = v.y.at(i, 0);
            t.top_normal[i as usize] = v.y.at(i, ny);
        }
        for i in 0..=nx {
            t.bottom_tangential[i as usize] = 0.5 * (v.x.at(i, -1) + v.x.at(i, 0));
            t.top_tangential[i as usize] = 0.5 * (v.x.at(i, ny - 1) + v.x.at(i, ny));
        }
        t
    }

    /// Net outward flux `\oint u . n` (midpoint rule on the faces).
    pub fn net_flux(&self, grid: &Grid) -> f64 {
        let sx: f64 = self
            .right_normal
            .iter()
            .zip(&self.left_normal)
            .map(|(r, l)| r - l)
            .sum();
        let sy: f64 = self
            .top_normal
            .iter()
            .zip(&self.bottom_normal)
            .map(|(t, b)| t - b)
            .sum();
        sx * grid.hy + sy * grid.hx
    }

    /// Largest normal component magnitude.
    pub fn max_normal(&self) -> f64 {
        self.left_normal
            .iter()
            .chain(&self.right_normal)
            .chain(&self.bottom_normal)
            .chain(&self.top_normal)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn fits(&self, grid: &Grid) -> bool {
        self.left_normal.len() == grid.ny
            && self.right_normal.len() == grid.ny
            && self.bottom_normal.len() == grid.nx
            && self.top_normal.len() == grid.nx
            && self.left_tangential.len() == grid.ny + 1
            && self.right_tangential.len() == grid.ny + 1
            && self.bottom_tangential.len() == grid.nx + 1
            && self.top_tangential.len() == grid.nx + 1
    }
}

/// Boundary condition attached to a field when ghosts are filled.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySpec {
    /// Zero normal derivative (scalars at centers).
    NeumannZero,
    /// Constant wall value (scalars at centers).
    DirichletConst(f64),
    /// Zero velocity on every wall.
    NoSlip,
    /// Zero normal velocity; the wall shear balances friction:
    /// `curl u = -b (u . tau)` with `tau` the counter-clockwise tangent.
    ///
    /// With a `shift` field `s`, the condition holds for `u + s` instead of
    /// `u`, which is how a slip condition on the full velocity is carried
    /// over to a decomposed variable.
    SlipFriction {
        friction: Friction,
        shift: Option<Box<VectorField>>,
    },
    /// Prescribed velocity trace.
    VelocityProfile(WallTrace),
}

impl BoundarySpec {
    pub fn slip(friction: Friction) -> Self {
        BoundarySpec::SlipFriction {
            friction,
            shift: None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundarySpec::NeumannZero => "NeumannZero",
            BoundarySpec::DirichletConst(_) => "DirichletConst",
            BoundarySpec::NoSlip => "NoSlip",
            BoundarySpec::SlipFriction { .. } => "SlipFriction",
            BoundarySpec::VelocityProfile(_) => "VelocityProfile",
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(
            self,
            BoundarySpec::NeumannZero | BoundarySpec::DirichletConst(_)
        )
    }

    /// The linear part of the condition (all inhomogeneous data set to zero).
    pub fn homogeneous(&self) -> Self {
        match self {
            BoundarySpec::NeumannZero => BoundarySpec::NeumannZero,
            BoundarySpec::DirichletConst(_) => BoundarySpec::DirichletConst(0.0),
            BoundarySpec::NoSlip | BoundarySpec::VelocityProfile(_) => BoundarySpec::NoSlip,
            BoundarySpec::SlipFriction { friction, .. } => BoundarySpec::slip(*friction),
        }
    }
}

/// Fills the ghost layer of a cell-centered scalar.
pub fn apply_scalar_bc(f: &mut ScalarField, bc: &BoundarySpec) -> Result<(), GridError> {
    if f.loc != Location::Center {
        return Err(GridError::IncompatibleBc {
            bc: bc.name(),
            location: f.loc,
        });
    }
    let (nx, ny) = (f.grid.nx as isize, f.grid.ny as isize);
    let ghost: Box<dyn Fn(f64) -> f64> = match bc {
        BoundarySpec::NeumannZero => Box::new(|v| v),
        BoundarySpec::DirichletConst(g) => {
            let g = *g;
            Box::new(move |v| 2.0 * g - v)
        }
        other => {
            return Err(GridError::IncompatibleBc {
                bc: other.name(),
                location: f.loc,
            })
        }
    };
    for j in 0..ny {
        let v = ghost(f.at(0, j));
        f.set(-1, j, v);
        let v = ghost(f.at(nx - 1, j));
        f.set(nx, j, v);
    }
    for i in -1..=nx {
        let v = ghost(f.at(i, 0));
        f.set(i, -1, v);
        let v = ghost(f.at(i, ny - 1));
        f.set(i, ny, v);
    }
    Ok(())
}

/// Fills boundary normal faces and tangential ghosts of a velocity field.
pub fn apply_vector_bc(v: &mut VectorField, bc: &BoundarySpec) -> Result<(), GridError> {
    let g = v.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    match bc {
        BoundarySpec::NoSlip => {
            set_normals(v, |_, _| 0.0);
            fill_ghosts(v, |_, _, _, interior| -interior);
        }
        BoundarySpec::VelocityProfile(trace) => {
            if !trace.fits(&g) {
                return Err(GridError::IncompatibleBc {
                    bc: "VelocityProfile (trace size)",
                    location: Location::XFace,
                });
            }
            set_normals(v, |wall, k| match wall {
                Wall::Left => trace.left_normal[k],
                Wall::Right => trace.right_normal[k],
                Wall::Bottom => trace.bottom_normal[k],
                Wall::Top => trace.top_normal[k],
            });
            fill_ghosts(v, |wall, k, _, interior| {
                let t = match wall {
                    Wall::Left => trace.left_tangential[k],
                    Wall::Right => trace.right_tangential[k],
                    Wall::Bottom => trace.bottom_tangential[k],
                    Wall::Top => trace.top_tangential[k],
                };
                2.0 * t - interior
            });
        }
        BoundarySpec::SlipFriction { friction, shift } => {
            if let Some(s) = shift {
                if !s.grid.same_mesh(&g) {
                    return Err(GridError::GridMismatch);
                }
            }
            let s = shift.as_deref();
            set_normals(v, |wall, k| {
                let k = k as isize;
                match (s, wall) {
                    (None, _) => 0.0,
                    (Some(s), Wall::Left) => -s.x.at(0, k),
                    (Some(s), Wall::Right) => -s.x.at(nx, k),
                    (Some(s), Wall::Bottom) => -s.y.at(k, 0),
                    (Some(s), Wall::Top) => -s.y.at(k, ny),
                }
            });
            fill_ghosts(v, |wall, k, (x, y), interior| {
                let k = k as isize;
                let h = match wall {
                    Wall::Left | Wall::Right => g.hx,
                    Wall::Bottom | Wall::Top => g.hy,
                };
                let factor = friction.ghost_factor(x, y, h);
                match s {
                    None => factor * interior,
                    Some(s) => {
                        let (si, sg) = match wall {
                            Wall::Left => (s.y.at(0, k), s.y.at(-1, k)),
                            Wall::Right => (s.y.at(nx - 1, k), s.y.at(nx, k)),
                            Wall::Bottom => (s.x.at(k, 0), s.x.at(k, -1)),
                            Wall::Top => (s.x.at(k, ny - 1), s.x.at(k, ny)),
                        };
                        factor * (interior + si) - sg
                    }
                }
            });
        }
        other => {
            return Err(GridError::IncompatibleBc {
                bc: other.name(),
                location: Location::XFace,
            })
        }
    }
    Ok(())
}

fn set_normals(v: &mut VectorField, value: impl Fn(Wall, usize) -> f64) {
    let (nx, ny) = (v.grid.nx as isize, v.grid.ny as isize);
    for j in 0..ny {
        v.x.set(0, j, value(Wall::Left, j as usize));
        v.x.set(nx, j, value(Wall::Right, j as usize));
    }
    for i in 0..nx {
        v.y.set(i, 0, value(Wall::Bottom, i as usize));
        v.y.set(i, ny, value(Wall::Top, i as usize));
    }
}

/// `ghost(wall, k, wall_point, interior_value)`; normal faces must be set
/// first because the wall-end ghosts reflect them.
fn fill_ghosts(v: &mut VectorField, ghost: impl Fn(Wall, usize, (f64, f64), f64) -> f64) {
    let g = v.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    for i in 0..=nx {
        let x = i as f64 * g.hx;
        let gb = ghost(Wall::Bottom, i as usize, (x, 0.0), v.x.at(i, 0));
        v.x.set(i, -1, gb);
        let gt = ghost(Wall::Top, i as usize, (x, g.ly), v.x.at(i, ny - 1));
        v.x.set(i, ny, gt);
    }
    for j in 0..=ny {
        let y = j as f64 * g.hy;
        let gl = ghost(Wall::Left, j as usize, (0.0, y), v.y.at(0, j));
        v.y.set(-1, j, gl);
        let gr = ghost(Wall::Right, j as usize, (g.lx, y), v.y.at(nx - 1, j));
        v.y.set(nx, j, gr);
    }
}

/// Fields that carry a ghost layer.
pub trait GhostFill: Clone {
    fn fill(&mut self, bc: &BoundarySpec) -> Result<(), GridError>;
}

impl GhostFill for ScalarField {
    fn fill(&mut self, bc: &BoundarySpec) -> Result<(), GridError> {
        apply_scalar_bc(self, bc)
    }
}

impl GhostFill for VectorField {
    fn fill(&mut self, bc: &BoundarySpec) -> Result<(), GridError> {
        apply_vector_bc(self, bc)
    }
}

/// Returns a copy of `f` with its ghost layer filled under `bc`.
pub fn apply_bc<F: GhostFill>(f: &F, bc: &BoundarySpec) -> Result<F, GridError> {
    let mut out = f.clone();
    out.fill(bc)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{curl2d, Regime};

    #[test]
    fn neumann_mirrors_interior() {
        let g = Grid::unit(6, Regime::C).unwrap();
        let f = ScalarField::from_fn(&g, Location::Center, |x, y| x + 10.0 * y);
        let f = apply_bc(&f, &BoundarySpec::NeumannZero).unwrap();
        for j in 0..6 {
            assert_eq!(f.at(-1, j), f.at(0, j));
            assert_eq!(f.at(6, j), f.at(5, j));
        }
        for i in 0..6 {
            assert_eq!(f.at(i, -1), f.at(i, 0));
            assert_eq!(f.at(i, 6), f.at(i, 5));
        }
    }

    #[test]
    fn dirichlet_averages_to_wall_value() {
        let g = Grid::unit(6, Regime::B).unwrap();
        let f = ScalarField::from_fn(&g, Location::Center, |x, y| 1.0 + x * y);
        let f = apply_bc(&f, &BoundarySpec::DirichletConst(1.5)).unwrap();
        for j in 0..6 {
            assert!((0.5 * (f.at(-1, j) + f.at(0, j)) - 1.5).abs() < 1e-15);
        }
    }

    #[test]
    fn noslip_zeroes_normal_faces() {
        let g = Grid::unit(8, Regime::C).unwrap();
        let v = VectorField::from_fn(&g, |x, y| (1.0 + x, 2.0 + y));
        let v = apply_bc(&v, &BoundarySpec::NoSlip).unwrap();
        for j in 0..8 {
            assert_eq!(v.x.at(0, j), 0.0);
            assert_eq!(v.x.at(8, j), 0.0);
        }
        for i in 0..8 {
            assert_eq!(v.y.at(i, 0), 0.0);
            assert_eq!(v.y.at(i, 8), 0.0);
            assert_eq!(v.x.at(i, -1), -v.x.at(i, 0));
        }
        let t = WallTrace::of_field(&v);
        assert!(t.bottom_tangential.iter().all(|t| t.abs() < 1e-15));
    }

    #[test]
    fn free_slip_limit_on_shear_flow() {
        // Hand evaluation on a 4x4 grid: with b = 0 the ghost mirrors the
        // first interior row, so the one-sided wall shear vanishes and the
        // wall-corner curl is 0 = -b * u_tau for every wall point.
        let g = Grid::unit(4, Regime::A).unwrap();
        let v = VectorField::from_fn(&g, |_, y| (y, 0.0));
        let v = apply_bc(&v, &BoundarySpec::slip(Friction::Zero)).unwrap();
        assert_eq!(v.x.at(2, -1), v.x.at(2, 0));
        assert_eq!(v.x.at(2, 4), v.x.at(2, 3));
        let c = curl2d(&v).unwrap();
        for i in 1..4 {
            assert!(c.at(i, 0).abs() < 1e-15);
            assert!(c.at(i, 4).abs() < 1e-15);
        }
        // interior corner keeps the shear of the flow
        assert!((c.at(2, 2) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn friction_balances_wall_curl() {
        let g = Grid::unit(8, Regime::A).unwrap();
        let b = 0.7;
        let v = VectorField::from_fn(&g, |x, y| (1.0 + 0.3 * x + y * y, 0.2 * x * y));
        let v = apply_bc(&v, &BoundarySpec::slip(Friction::Constant(b))).unwrap();
        let c = curl2d(&v).unwrap();
        let t = WallTrace::of_field(&v);
        // counter-clockwise tangent: bottom (1,0), top (-1,0), left (0,-1), right (0,1)
        for i in 1..8usize {
            let ii = i as isize;
            assert!((c.at(ii, 0) + b * t.bottom_tangential[i]).abs() < 1e-12);
            assert!((c.at(ii, 8) - b * t.top_tangential[i]).abs() < 1e-12);
        }
        for j in 1..8usize {
            let jj = j as isize;
            assert!((c.at(0, jj) - b * t.left_tangential[j]).abs() < 1e-12);
            assert!((c.at(8, jj) + b * t.right_tangential[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_bc_on_vector_is_rejected() {
        let g = Grid::unit(4, Regime::A).unwrap();
        let v = VectorField::zeros(&g);
        assert!(apply_bc(&v, &BoundarySpec::NeumannZero).is_err());
        let f = ScalarField::centers(&g);
        assert!(apply_bc(&f, &BoundarySpec::NoSlip).is_err());
    }

    #[test]
    fn profile_trace_round_trip() {
        let g = Grid::new(6, 5, 1.0, 2.0, Regime::B).unwrap();
        let prof = |x: f64, y: f64| (x * (1.0 - x) + y, 0.5 * y - x);
        let trace = WallTrace::from_fn(&g, prof);
        let v = VectorField::from_fn(&g, |x, y| (x + 3.0 * y, -y));
        let v = apply_bc(&v, &BoundarySpec::VelocityProfile(trace.clone())).unwrap();
        let back = WallTrace::of_field(&v);
        for (a, b) in back.top_tangential.iter().zip(&trace.top_tangential) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(back.left_normal, trace.left_normal);
    }
}
