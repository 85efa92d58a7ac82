//! Rectangular `(J, E)` scans with CSV and plain PGM output.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::effective::search::linear_axis;
use crate::effective::JEState;
use crate::forcelaw::ForceLaw;
use crate::space::{classify, is_uniform_rotation, ClassifyOptions, Membership};

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("axis needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("axis range {lo}:{hi} must be finite with lo < hi")]
    BadRange { lo: f64, hi: f64 },
    #[error("invalid axis '{0}', expected lo:hi:n")]
    AxisSyntax(String),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Inclusive linear range with `n` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Axis, ScanError> {
        if n < 2 {
            return Err(ScanError::TooFewPoints(n));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ScanError::BadRange { lo, hi });
        }
        Ok(Axis { lo, hi, n })
    }

    pub fn values(&self) -> Vec<f64> {
        linear_axis(self.lo, self.hi, self.n)
    }
}

impl FromStr for Axis {
    type Err = ScanError;

    /// `lo:hi:n`
    fn from_str(s: &str) -> Result<Axis, ScanError> {
        let bad = || ScanError::AxisSyntax(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else { return Err(bad()) };
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        let n = n.trim().parse().map_err(|_| bad())?;
        Axis::new(lo, hi, n)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub j: f64,
    pub e: f64,
    pub member: bool,
    /// Attained boundary state, or margin inside the boundary band.
    pub boundary: bool,
    pub ur: bool,
    /// `E - inf V_J`; NaN when evaluation failed.
    pub margin: f64,
}

impl Cell {
    fn same_bits(&self, other: &Cell) -> bool {
        self.j.to_bits() == other.j.to_bits()
            && self.e.to_bits() == other.e.to_bits()
            && self.member == other.member
            && self.boundary == other.boundary
            && self.ur == other.ur
            && self.margin.to_bits() == other.margin.to_bits()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanGrid {
    pub j_axis: Vec<f64>,
    pub e_axis: Vec<f64>,
    /// E-major: `cells[ie * nJ + ij]`.
    pub cells: Vec<Cell>,
    /// Per-cell evaluation failures as `(cell index, message)`.
    pub errors: Vec<(usize, String)>,
}

impl ScanGrid {
    pub fn n_j(&self) -> usize {
        self.j_axis.len()
    }

    pub fn n_e(&self) -> usize {
        self.e_axis.len()
    }

    pub fn cell(&self, ij: usize, ie: usize) -> &Cell {
        &self.cells[ie * self.n_j() + ij]
    }

    pub fn member_count(&self) -> usize {
        self.cells.iter().filter(|c| c.member).count()
    }

    /// Same axes and cells down to the bit; NaN margins compare by bits.
    pub fn bit_identical(&self, other: &ScanGrid) -> bool {
        self.j_axis.len() == other.j_axis.len()
            && self.e_axis.len() == other.e_axis.len()
            && self.j_axis.iter().zip(&other.j_axis).all(|(a, b)| a.to_bits() == b.to_bits())
            && self.e_axis.iter().zip(&other.e_axis).all(|(a, b)| a.to_bits() == b.to_bits())
            && self.cells.len() == other.cells.len()
            && self.cells.iter().zip(&other.cells).all(|(a, b)| a.same_bits(b))
    }
}

fn scan_cell(law: &ForceLaw, st: JEState, opts: &ClassifyOptions) -> Result<Cell, String> {
    let c = classify(law, st, opts).map_err(|e| e.to_string())?;
    let ur = is_uniform_rotation(law, st, opts).map_err(|e| e.to_string())?.is_some();
    Ok(Cell {
        j: st.j,
        e: st.e,
        member: c.member.is_member(),
        boundary: c.member == Membership::BoundaryAttained || c.in_band(),
        ur,
        margin: c.margin,
    })
}

/// Classify every lattice point. Rows are distributed over `threads`
/// workers (0 = available parallelism); the result does not depend on it.
pub fn scan(
    law: &ForceLaw,
    j: Axis,
    e: Axis,
    opts: &ClassifyOptions,
    threads: usize,
) -> Result<ScanGrid, ScanError> {
    let j = Axis::new(j.lo, j.hi, j.n)?;
    let e = Axis::new(e.lo, e.hi, e.n)?;
    let (j_axis, e_axis) = (j.values(), e.values());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|err| ScanError::Pool(err.to_string()))?;
    let rows: Vec<Vec<Result<Cell, String>>> = pool.install(|| {
        e_axis
            .par_iter()
            .map(|&ev| j_axis.iter().map(|&jv| scan_cell(law, JEState::new(jv, ev), opts)).collect())
            .collect()
    });
    let mut cells = Vec::with_capacity(j_axis.len() * e_axis.len());
    let mut errors = Vec::new();
    for (idx, res) in rows.into_iter().flatten().enumerate() {
        match res {
            Ok(c) => cells.push(c),
            Err(msg) => {
                let (ie, ij) = (idx / j_axis.len(), idx % j_axis.len());
                cells.push(Cell {
                    j: j_axis[ij],
                    e: e_axis[ie],
                    member: false,
                    boundary: false,
                    ur: false,
                    margin: f64::NAN,
                });
                errors.push((idx, msg));
            }
        }
    }
    Ok(ScanGrid { j_axis, e_axis, cells, errors })
}

pub const CSV_HEADER: &str = "J,E,member,boundary,ur,margin";

/// Header `J,E,member,boundary,ur,margin`; rows E-major then J; numbers with
/// 17 significant digits.
pub fn write_csv<W: Write>(grid: &ScanGrid, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for c in &grid.cells {
        writeln!(
            out,
            "{:.16e},{:.16e},{},{},{},{:.16e}",
            c.j, c.e, c.member as u8, c.boundary as u8, c.ur as u8, c.margin
        )?;
    }
    out.flush()
}

pub fn save_csv(grid: &ScanGrid, path: &Path) -> Result<(), ScanError> {
    let file = std::fs::File::create(path)?;
    write_csv(grid, io::BufWriter::new(file))?;
    Ok(())
}

/// Inverse of [`write_csv`]. Axes are recovered from the distinct
/// coordinates in row order; cells with a NaN margin are listed as errors.
pub fn read_csv<R: BufRead>(input: R) -> Result<ScanGrid, ScanError> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim_end() != CSV_HEADER {
        return Err(ScanError::Csv { line: 1, message: format!("unexpected header '{header}'") });
    }
    let mut cells = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let err = |message: String| ScanError::Csv { line: lineno, message };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(err(format!("expected 6 fields, got {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number '{s}'")));
        let flag = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(err(format!("bad flag '{other}'"))),
        };
        cells.push(Cell {
            j: num(f[0])?,
            e: num(f[1])?,
            member: flag(f[2])?,
            boundary: flag(f[3])?,
            ur: flag(f[4])?,
            margin: num(f[5])?,
        });
    }
    let mut j_axis: Vec<f64> = Vec::new();
    for c in &cells {
        if j_axis.first().is_some_and(|&j0| j0.to_bits() == c.j.to_bits()) {
            break;
        }
        j_axis.push(c.j);
    }
    let n_j = j_axis.len().max(1);
    if cells.len() % n_j != 0 {
        return Err(ScanError::Csv { line: 0, message: "row count is not a multiple of the J axis".into() });
    }
    let e_axis: Vec<f64> = cells.iter().step_by(n_j).map(|c| c.e).collect();
    for (idx, c) in cells.iter().enumerate() {
        let (ie, ij) = (idx / n_j, idx % n_j);
        if c.j.to_bits() != j_axis[ij].to_bits() || c.e.to_bits() != e_axis[ie].to_bits() {
            return Err(ScanError::Csv { line: idx + 2, message: "rows are not an E-major lattice".into() });
        }
    }
    let errors = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.margin.is_nan())
        .map(|(i, _)| (i, "evaluation failed".to_string()))
        .collect();
    Ok(ScanGrid { j_axis, e_axis, cells, errors })
}

pub fn load_csv(path: &Path) -> Result<ScanGrid, ScanError> {
    read_csv(io::BufReader::new(std::fs::File::open(path)?))
}

pub const PIXEL_OUTSIDE: u8 = 0;
pub const PIXEL_MEMBER: u8 = 128;
pub const PIXEL_BOUNDARY: u8 = 255;
const PGM_LINE: usize = 70;

pub fn pixel(c: &Cell) -> u8 {
    if c.boundary || c.ur {
        PIXEL_BOUNDARY
    } else if c.member {
        PIXEL_MEMBER
    } else {
        PIXEL_OUTSIDE
    }
}

/// Plain PGM (`P2`), width nJ, height nE, maxval 255, highest E on top.
pub fn write_pgm<W: Write>(grid: &ScanGrid, mut out: W) -> io::Result<()> {
    write!(out, "P2\n{} {}\n255\n", grid.n_j(), grid.n_e())?;
    for ie in (0..grid.n_e()).rev() {
        let mut line = String::new();
        for ij in 0..grid.n_j() {
            let px = pixel(grid.cell(ij, ie)).to_string();
            if !line.is_empty() && line.len() + 1 + px.len() > PGM_LINE {
                writeln!(out, "{line}")?;
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&px);
        }
        writeln!(out, "{line}")?;
    }
    out.flush()
}

pub fn save_pgm(grid: &ScanGrid, path: &Path) -> Result<(), ScanError> {
    let file = std::fs::File::create(path)?;
    write_pgm(grid, io::BufWriter::new(file))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcelaw::Builtin;

    fn law(b: Builtin) -> ForceLaw {
        ForceLaw::from_builtin(b)
    }

    fn opts(l: &ForceLaw) -> ClassifyOptions {
        ClassifyOptions::for_law(l)
    }

    fn csv_string(g: &ScanGrid) -> String {
        let mut buf = Vec::new();
        write_csv(g, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    fn pgm_string(g: &ScanGrid) -> String {
        let mut buf = Vec::new();
        write_pgm(g, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn axis_parsing() {
        let a: Axis = "-2:1.5:31".parse().unwrap();
        assert_eq!(a, Axis { lo: -2.0, hi: 1.5, n: 31 });
        assert!("1:0:3".parse::<Axis>().is_err());
        assert!("0:1:1".parse::<Axis>().is_err());
        assert!("0:1".parse::<Axis>().is_err());
    }

    #[test]
    fn small_grid_csv_rows() {
        let z = law(Builtin::Zero);
        let g = scan(&z, Axis::new(-1.0, 1.0, 2).unwrap(), Axis::new(-1.0, 1.0, 2).unwrap(), &opts(&z), 1)
            .unwrap();
        let text = csv_string(&g);
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn origin_is_member_for_zero_law() {
        let z = law(Builtin::Zero);
        let g = scan(&z, Axis::new(-1.0, 1.0, 3).unwrap(), Axis::new(-1.0, 1.0, 3).unwrap(), &opts(&z), 2)
            .unwrap();
        let c = g.cell(1, 1);
        assert_eq!((c.j, c.e), (0.0, 0.0));
        assert!(c.member && c.ur);
        let row = csv_string(&g).lines().nth(5).unwrap().to_string();
        assert!(row.starts_with("0.0000000000000000e0,0.0000000000000000e0,1,"), "{row}");
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let g = law(Builtin::Gravitational { k: 1.0 });
        let grid = scan(&g, Axis::new(-2.0, 2.0, 9).unwrap(), Axis::new(-2.0, 1.0, 7).unwrap(), &opts(&g), 0)
            .unwrap();
        let back = read_csv(csv_string(&grid).as_bytes()).unwrap();
        assert!(grid.bit_identical(&back));
        assert_eq!(grid, back);
    }

    #[test]
    fn one_pixel_fixture() {
        let grid = ScanGrid {
            j_axis: vec![1.0],
            e_axis: vec![1.0],
            cells: vec![Cell { j: 1.0, e: 1.0, member: true, boundary: false, ur: false, margin: 1.0 }],
            errors: Vec::new(),
        };
        assert_eq!(pgm_string(&grid), "P2\n1 1\n255\n128\n");
    }

    #[test]
    fn repulsive_elastic_is_uniform_grey() {
        let re = law(Builtin::RepulsiveElastic { k: 1.0 });
        let grid =
            scan(&re, Axis::new(-3.0, 3.0, 11).unwrap(), Axis::new(-3.0, 3.0, 11).unwrap(), &opts(&re), 0)
                .unwrap();
        assert!(grid.cells.iter().all(|c| c.member && pixel(c) == PIXEL_MEMBER));
    }

    #[test]
    fn pgm_rows_are_top_down_and_short() {
        let h = law(Builtin::Hooke { k: 1.0 });
        let grid = scan(&h, Axis::new(-2.0, 2.0, 41).unwrap(), Axis::new(-1.0, 3.0, 5).unwrap(), &opts(&h), 0)
            .unwrap();
        let text = pgm_string(&grid);
        assert!(text.lines().all(|l| l.len() <= 70));
        let pixels: Vec<u8> = text.lines().skip(3).flat_map(|l| l.split(' ')).map(|p| p.parse().unwrap()).collect();
        assert_eq!(pixels.len(), 41 * 5);
        // Bottom row is E = -1: nothing admissible.
        assert!(pixels[4 * 41..].iter().all(|&p| p == PIXEL_OUTSIDE));
        // Top row is E = 3: |J| < 3 everywhere, all admissible.
        assert!(pixels[..41].iter().all(|&p| p != PIXEL_OUTSIDE));
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let g = law(Builtin::GravityPlusInverseSquare { k: 1.0, q: 1.0 });
        let (ja, ea) = (Axis::new(-3.0, 3.0, 13).unwrap(), Axis::new(-3.0, 3.0, 13).unwrap());
        let a = scan(&g, ja, ea, &opts(&g), 1).unwrap();
        let b = scan(&g, ja, ea, &opts(&g), 4).unwrap();
        assert_eq!(csv_string(&a), csv_string(&b));
        assert_eq!(pgm_string(&a), pgm_string(&b));
    }
}
