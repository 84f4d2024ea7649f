//! Binary field snapshots.
//!
//! Layout (little-endian): `b"MCF1"`, `nx: u64`, `ny: u64`, location tag
//! `u32`, time `f64`, then every stored sample (ghosts included) row by row,
//! x fastest.

use std::io::{Read, Write};

use super::{Grid, GridError, Layer, Location, ScalarField, VectorField};

pub const MAGIC: &[u8; 4] = b"MCF1";
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub nx: u64,
    pub ny: u64,
    pub location: Location,
    pub time: f64,
}

fn io_err(e: std::io::Error) -> GridError {
    GridError::Snapshot(e.to_string())
}

pub fn write_layer<W: Write>(w: &mut W, grid: &Grid, loc: Location, layer: &Layer, time: f64) -> Result<(), GridError> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * layer.data().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(grid.nx as u64).to_le_bytes());
    buf.extend_from_slice(&(grid.ny as u64).to_le_bytes());
    buf.extend_from_slice(&loc.tag().to_le_bytes());
    buf.extend_from_slice(&time.to_le_bytes());
    for v in layer.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf).map_err(io_err)
}

pub fn read_header<R: Read>(r: &mut R) -> Result<Header, GridError> {
    let mut h = [0u8; HEADER_LEN];
    r.read_exact(&mut h).map_err(io_err)?;
    if &h[0..4] != MAGIC {
        return Err(GridError::Snapshot("bad magic".into()));
    }
    let nx = u64::from_le_bytes(h[4..12].try_into().unwrap());
    let ny = u64::from_le_bytes(h[12..20].try_into().unwrap());
    let tag = u32::from_le_bytes(h[20..24].try_into().unwrap());
    let time = f64::from_le_bytes(h[24..32].try_into().unwrap());
    let location = Location::from_tag(tag).ok_or_else(|| GridError::Snapshot(format!("unknown location tag {tag}")))?;
    Ok(Header { nx, ny, location, time })
}

/// Reads one record into a layer shaped for `grid`; returns its location and time.
pub fn read_layer<R: Read>(r: &mut R, grid: &Grid) -> Result<(Location, f64, Layer), GridError> {
    let h = read_header(r)?;
    if h.nx != grid.nx as u64 || h.ny != grid.ny as u64 {
        return Err(GridError::Snapshot(format!(
            "snapshot is {}x{}, grid is {}x{}",
            h.nx, h.ny, grid.nx, grid.ny
        )));
    }
    let mut layer = Layer::for_location(h.location, grid);
    let mut bytes = vec![0u8; 8 * layer.data().len()];
    r.read_exact(&mut bytes).map_err(io_err)?;
    for (v, c) in layer.data_mut().iter_mut().zip(bytes.chunks_exact(8)) {
        *v = f64::from_le_bytes(c.try_into().unwrap());
    }
    Ok((h.location, h.time, layer))
}

pub fn write_scalar<W: Write>(w: &mut W, f: &ScalarField, time: f64) -> Result<(), GridError> {
    write_layer(w, &f.grid, f.loc, &f.values, time)
}

pub fn read_scalar<R: Read>(r: &mut R, grid: &Grid) -> Result<(ScalarField, f64), GridError> {
    let (loc, t, values) = read_layer(r, grid)?;
    if !matches!(loc, Location::Center | Location::Corner) {
        return Err(GridError::Snapshot(format!("expected a scalar record, found {loc:?}")));
    }
    Ok((ScalarField { grid: *grid, loc, values }, t))
}

/// A vector field is stored as an x-face record followed by a y-face record.
pub fn write_vector<W: Write>(w: &mut W, v: &VectorField, time: f64) -> Result<(), GridError> {
    write_layer(w, &v.grid, Location::XFace, &v.x, time)?;
    write_layer(w, &v.grid, Location::YFace, &v.y, time)
}

pub fn read_vector<R: Read>(r: &mut R, grid: &Grid) -> Result<(VectorField, f64), GridError> {
    let (lx, t, x) = read_layer(r, grid)?;
    let (ly, _, y) = read_layer(r, grid)?;
    if lx != Location::XFace || ly != Location::YFace {
        return Err(GridError::Snapshot("expected x-face then y-face records".into()));
    }
    Ok((VectorField { grid: *grid, x, y }, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Regime;

    #[test]
    fn scalar_round_trip_is_exact() {
        let g = Grid::new(5, 4, 1.0, 2.0, Regime::B).unwrap();
        let f = ScalarField::from_fn(&g, Location::Center, |x, y| (x * 7.1).sin() / (1.0 + y));
        let mut buf = Vec::new();
        write_scalar(&mut buf, &f, 0.125).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 8 * 7 * 6);
        assert_eq!(&buf[..4], b"MCF1");
        let (back, t) = read_scalar(&mut buf.as_slice(), &g).unwrap();
        assert_eq!(t, 0.125);
        assert_eq!(back, f);
    }

    #[test]
    fn vector_round_trip_and_size_check() {
        let g = Grid::unit(6, Regime::A).unwrap();
        let v = VectorField::from_fn(&g, |x, y| (x - y, x * y));
        let mut buf = Vec::new();
        write_vector(&mut buf, &v, 2.0).unwrap();
        let (back, _) = read_vector(&mut buf.as_slice(), &g).unwrap();
        assert_eq!(back, v);
        let other = Grid::unit(8, Regime::A).unwrap();
        assert!(read_vector(&mut buf.as_slice(), &other).is_err());
        buf[0] = b'X';
        assert!(read_header(&mut buf.as_slice()).is_err());
    }
}
