use super::{Grid, GridError};

/// Where on the staggered mesh a set of samples lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Location {
    Center,
    Corner,
    XFace,
    YFace,
}

impl Location {
    pub fn tag(self) -> u32 {
        match self {
            Location::Center => 0,
            Location::Corner => 1,
            Location::XFace => 2,
            Location::YFace => 3,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            0 => Some(Location::Center),
            1 => Some(Location::Corner),
            2 => Some(Location::XFace),
            3 => Some(Location::YFace),
            _ => None,
        }
    }

    /// Index ranges `(i_lo, i_hi, j_lo, j_hi)` of stored samples, inclusive,
    /// ghost layer included.
    pub fn storage_range(self, grid: &Grid) -> (isize, isize, isize, isize) {
        let (nx, ny) = (grid.nx as isize, grid.ny as isize);
        match self {
            Location::Center => (-1, nx, -1, ny),
            Location::Corner => (0, nx, 0, ny),
            Location::XFace => (0, nx, -1, ny),
            Location::YFace => (-1, nx, 0, ny),
        }
    }

    /// Index ranges of the physical (non-ghost) samples, inclusive.
    pub fn physical_range(self, grid: &Grid) -> (isize, isize, isize, isize) {
        let (nx, ny) = (grid.nx as isize, grid.ny as isize);
        match self {
            Location::Center => (0, nx - 1, 0, ny - 1),
            Location::Corner => (0, nx, 0, ny),
            Location::XFace => (0, nx, 0, ny - 1),
            Location::YFace => (0, nx - 1, 0, ny),
        }
    }
}

/// Dense 2D array addressed by signed logical indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub(crate) i_lo: isize,
    pub(crate) j_lo: isize,
    pub(crate) width: usize,
    pub(crate) height: usize,
    pub(crate) data: Vec<f64>,
}

impl Layer {
    pub fn new(i_lo: isize, i_hi: isize, j_lo: isize, j_hi: isize) -> Self {
        let width = (i_hi - i_lo + 1) as usize;
        let height = (j_hi - j_lo + 1) as usize;
        Self {
            i_lo,
            j_lo,
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn for_location(loc: Location, grid: &Grid) -> Self {
        let (a, b, c, d) = loc.storage_range(grid);
        Self::new(a, b, c, d)
    }

    #[inline(always)]
    fn offset(&self, i: isize, j: isize) -> usize {
        debug_assert!(i >= self.i_lo && ((i - self.i_lo) as usize) < self.width);
        debug_assert!(j >= self.j_lo && ((j - self.j_lo) as usize) < self.height);
        (j - self.j_lo) as usize * self.width + (i - self.i_lo) as usize
    }

    #[inline(always)]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        self.data[self.offset(i, j)]
    }

    #[inline(always)]
    pub fn set(&mut self, i: isize, j: isize, v: f64) {
        let k = self.offset(i, j);
        self.data[k] = v;
    }

    #[inline(always)]
    pub fn add(&mut self, i: isize, j: isize, v: f64) {
        let k = self.offset(i, j);
        self.data[k] += v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub loc: Location,
    pub values: Layer,
}

impl ScalarField {
    pub fn zeros(grid: &Grid, loc: Location) -> Result<Self, GridError> {
        match loc {
            Location::Center | Location::Corner => Ok(Self {
                grid: *grid,
                loc,
                values: Layer::for_location(loc, grid),
            }),
            found => Err(GridError::LocationMismatch {
                expected: Location::Center,
                found,
            }),
        }
    }

    pub fn centers(grid: &Grid) -> Self {
        Self {
            grid: *grid,
            loc: Location::Center,
            values: Layer::for_location(Location::Center, grid),
        }
    }

    pub fn corners(grid: &Grid) -> Self {
        Self {
            grid: *grid,
            loc: Location::Corner,
            values: Layer::for_location(Location::Corner, grid),
        }
    }

    pub fn constant(grid: &Grid, loc: Location, c: f64) -> Self {
        let mut f = match loc {
            Location::Corner => Self::corners(grid),
            _ => Self::centers(grid),
        };
        f.values.data.iter_mut().for_each(|v| *v = c);
        f
    }

    /// Samples `f(x, y)` at every stored point, ghosts included.
    pub fn from_fn(grid: &Grid, loc: Location, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = match loc {
            Location::Corner => Self::corners(grid),
            _ => Self::centers(grid),
        };
        let (a, b, c, d) = out.loc.storage_range(grid);
        for j in c..=d {
            for i in a..=b {
                let (x, y) = grid.coords(out.loc, i, j);
                out.values.set(i, j, f(x, y));
            }
        }
        out
    }

    #[inline(always)]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        self.values.at(i, j)
    }

    #[inline(always)]
    pub fn set(&mut self, i: isize, j: isize, v: f64) {
        self.values.set(i, j, v)
    }

    pub fn expect(&self, loc: Location) -> Result<(), GridError> {
        if self.loc == loc {
            Ok(())
        } else {
            Err(GridError::LocationMismatch {
                expected: loc,
                found: self.loc,
            })
        }
    }

    /// Iterator over physical indices.
    pub fn physical_indices(&self) -> impl Iterator<Item = (isize, isize)> {
        let (a, b, c, d) = self.loc.physical_range(&self.grid);
        (c..=d).flat_map(move |j| (a..=b).map(move |i| (i, j)))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        out.values.data.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    /// Pointwise combination over all stored samples.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, GridError> {
        self.expect(other.loc)?;
        if !self.grid.same_mesh(&other.grid) {
            return Err(GridError::GridMismatch);
        }
        let mut out = self.clone();
        for (o, (a, b)) in out
            .values
            .data
            .iter_mut()
            .zip(self.values.data.iter().zip(other.values.data.iter()))
        {
            *o = f(*a, *b);
        }
        Ok(out)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.physical_indices()
            .map(|(i, j)| self.at(i, j))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Area-weighted mean over the physical samples.
    pub fn mean(&self) -> f64 {
        let mut s = 0.0;
        let mut w = 0.0;
        for (i, j) in self.physical_indices() {
            let wt = super::norms::point_weight(&self.grid, self.loc, i, j);
            s += wt * self.at(i, j);
            w += wt;
        }
        s / w
    }

    /// Shifts the physical samples and ghosts by `c`.
    pub fn shift(&mut self, c: f64) {
        self.values.data.iter_mut().for_each(|v| *v += c);
    }

    pub fn all_finite(&self) -> bool {
        self.physical_indices().all(|(i, j)| self.at(i, j).is_finite())
    }

    /// Copies physical values into a flat vector (row-major, x fastest).
    pub fn interior_vec(&self) -> Vec<f64> {
        self.physical_indices().map(|(i, j)| self.at(i, j)).collect()
    }

    pub fn set_interior(&mut self, v: &[f64]) {
        let idx: Vec<_> = self.physical_indices().collect();
        assert_eq!(idx.len(), v.len());
        for ((i, j), x) in idx.into_iter().zip(v) {
            self.set(i, j, *x);
        }
    }
}

/// Staggered vector field: first component on x-faces, second on y-faces.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub x: Layer,
    pub y: Layer,
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: *grid,
            x: Layer::for_location(Location::XFace, grid),
            y: Layer::for_location(Location::YFace, grid),
        }
    }

    /// Samples a vector function at every stored face point, ghosts included.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let mut out = Self::zeros(grid);
        let (a, b, c, d) = Location::XFace.storage_range(grid);
        for j in c..=d {
            for i in a..=b {
                let (x, y) = grid.coords(Location::XFace, i, j);
                out.x.set(i, j, f(x, y).0);
            }
        }
        let (a, b, c, d) = Location::YFace.storage_range(grid);
        for j in c..=d {
            for i in a..=b {
                let (x, y) = grid.coords(Location::YFace, i, j);
                out.y.set(i, j, f(x, y).1);
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.x.data.iter_mut().for_each(|v| *v *= s);
        out.y.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        for (o, v) in self.x.data.iter_mut().zip(&other.x.data) {
            *o += a * v;
        }
        for (o, v) in self.y.data.iter_mut().zip(&other.y.data) {
            *o += a * v;
        }
    }

    pub fn add(&self, other: &VectorField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn x_physical(&self) -> impl Iterator<Item = (isize, isize)> {
        let (a, b, c, d) = Location::XFace.physical_range(&self.grid);
        (c..=d).flat_map(move |j| (a..=b).map(move |i| (i, j)))
    }

    pub fn y_physical(&self) -> impl Iterator<Item = (isize, isize)> {
        let (a, b, c, d) = Location::YFace.physical_range(&self.grid);
        (c..=d).flat_map(move |j| (a..=b).map(move |i| (i, j)))
    }

    pub fn all_finite(&self) -> bool {
        self.x_physical().all(|(i, j)| self.x.at(i, j).is_finite())
            && self.y_physical().all(|(i, j)| self.y.at(i, j).is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        let a = self.x_physical().map(|(i, j)| self.x.at(i, j).abs());
        let b = self.y_physical().map(|(i, j)| self.y.at(i, j).abs());
        a.chain(b).fold(0.0, f64::max)
    }

    /// Components averaged to cell centers.
    pub fn center_components(&self, i: isize, j: isize) -> (f64, f64) {
        (
            0.5 * (self.x.at(i, j) + self.x.at(i + 1, j)),
            0.5 * (self.y.at(i, j) + self.y.at(i, j + 1)),
        )
    }
}
