use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::lbm::SchemeSpec;
use crate::mesh::{CellTree, Lattice};
use crate::multiresolution::{Field, UniformField};

/// Magic bytes of the binary grid dump.
pub const GRID_MAGIC: &[u8; 8] = b"MRLBMGRD";

/// Float formatting used by every text output: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Conserved moments of every population vector of a field.
pub fn conserved_of(scheme: &SchemeSpec, f: &[f64]) -> Vec<f64> {
    scheme.conserved_moments(f)
}

/// Write the complete leaves of a tree with their conserved moments.
///
/// Columns: `level, k0..k{d-1}, x0..x{d-1}, edge, <moments>`, where `x` is the cell origin.
pub fn write_cells_csv(
    path: &Path,
    scheme: &SchemeSpec,
    tree: &CellTree,
    field: &Field,
    names: &[&str],
) -> io::Result<()> {
    let lat = tree.lattice();
    let dim = lat.dim();
    let mut w = BufWriter::new(File::create(path)?);
    let mut header = vec!["level".to_string()];
    header.extend((0..dim).map(|i| format!("k{i}")));
    header.extend((0..dim).map(|i| format!("x{i}")));
    header.push("edge".into());
    header.extend(names.iter().map(|s| s.to_string()));
    writeln!(w, "{}", header.join(","))?;
    for &pos in tree.leaves() {
        let pos = pos as usize;
        let cell = tree.cell(pos);
        let g = lat.geometry(&cell);
        let mut row = vec![cell.level.to_string()];
        row.extend((0..dim).map(|i| cell.k[i].to_string()));
        row.extend((0..dim).map(|i| fmt_f64(g.origin[i])));
        row.push(fmt_f64(g.edge));
        row.extend(conserved_of(scheme, field.cell(pos)).into_iter().map(fmt_f64));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// One row of a cells CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRow {
    pub level: u32,
    pub k: Vec<i32>,
    pub origin: Vec<f64>,
    pub edge: f64,
    pub values: Vec<f64>,
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Read a file written by [`write_cells_csv`] for a `dim`-dimensional lattice.
pub fn read_cells_csv(path: &Path, dim: usize) -> io::Result<(Vec<String>, Vec<CellRow>)> {
    let r = BufReader::new(File::open(path)?);
    let mut lines = r.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| bad("empty file"))??
        .split(',')
        .map(String::from)
        .collect();
    let nvals = header
        .len()
        .checked_sub(2 + 2 * dim)
        .ok_or_else(|| bad("header too short"))?;
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != header.len() {
            return Err(bad(format!("row has {} fields", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(e.to_string()));
        let int = |s: &str| s.parse::<i32>().map_err(|e| bad(e.to_string()));
        rows.push(CellRow {
            level: f[0].parse().map_err(|_| bad("level"))?,
            k: f[1..=dim].iter().map(|s| int(s)).collect::<Result<_, _>>()?,
            origin: f[1 + dim..1 + 2 * dim].iter().map(|s| num(s)).collect::<Result<_, _>>()?,
            edge: num(f[1 + 2 * dim])?,
            values: f[2 + 2 * dim..].iter().map(|s| num(s)).collect::<Result<_, _>>()?,
        });
    }
    let names = header[header.len() - nvals..].to_vec();
    Ok((names, rows))
}

/// Uniform grid of `components` values per cell, first axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDump {
    pub dim: usize,
    pub level: u32,
    pub extent: [u32; 3],
    pub components: usize,
    pub data: Vec<f64>,
}

impl GridDump {
    /// Conserved moments of a uniform population field.
    pub fn from_populations(scheme: &SchemeSpec, f: &UniformField) -> Self {
        let lat = f.lattice();
        let e = lat.extent(f.level());
        let mut data = Vec::with_capacity(f.num_cells() * scheme.conserved().len());
        for lin in 0..f.num_cells() {
            data.extend(scheme.conserved_moments(f.cell(lin)));
        }
        Self {
            dim: lat.dim(),
            level: f.level(),
            extent: [e[0] as u32, e[1] as u32, e[2] as u32],
            components: scheme.conserved().len(),
            data,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.extent.iter().map(|&e| e as usize).product()
    }

    /// Little-endian layout: magic, `u32` dim, level, three extents, components, then `f64` data.
    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(GRID_MAGIC)?;
        for v in [self.dim as u32, self.level, self.extent[0], self.extent[1], self.extent[2], self.components as u32] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> io::Result<Self> {
        if bytes.len() < 32 || &bytes[..8] != GRID_MAGIC {
            return Err(bad("not a grid dump"));
        }
        let u = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().expect("4 bytes"));
        let dump = Self {
            dim: u(0) as usize,
            level: u(1),
            extent: [u(2), u(3), u(4)],
            components: u(5) as usize,
            data: Vec::new(),
        };
        let n = dump.num_cells() * dump.components;
        let body = &bytes[32..];
        if body.len() != 8 * n {
            return Err(bad(format!("expected {n} values, found {} bytes", body.len())));
        }
        let data = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Self { data, ..dump })
    }

    /// Shape of the lattice whose finest level matches this grid, if any.
    pub fn lattice(&self, min_level: u32) -> Option<Lattice> {
        let mut base = [1u32; 3];
        for i in 0..self.dim {
            let b = self.extent[i] >> self.level;
            if b == 0 || b << self.level != self.extent[i] {
                return None;
            }
            base[i] = b;
        }
        Lattice::with_base(self.dim, min_level.min(self.level), self.level, base).ok()
    }
}

/// Append-only CSV flushed after every row.
#[derive(Debug)]
pub struct MetricsWriter {
    w: BufWriter<File>,
}

impl MetricsWriter {
    pub fn create(path: &Path, header: &[String]) -> io::Result<Self> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", header.join(","))?;
        w.flush()?;
        Ok(Self { w })
    }

    pub fn row(&mut self, step: u64, values: &[String]) -> io::Result<()> {
        let mut s = step.to_string();
        for v in values {
            s.push(',');
            s.push_str(v);
        }
        writeln!(self.w, "{s}")?;
        self.w.flush()
    }
}
