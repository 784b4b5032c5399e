//! CSV and PGM serialization of grids and sinograms.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::grid::ScalarGrid;
use crate::sinogram::SinogramGrid;

/// `x,y,value` rows in node order; an optional trailing `# ...` line.
pub fn write_grid_csv<W: Write>(w: &mut W, g: &ScalarGrid, trailer: Option<&str>) -> io::Result<()> {
    writeln!(w, "x,y,value")?;
    for (k, v) in g.values.iter().enumerate() {
        let p = g.spec.node(k);
        writeln!(w, "{},{},{}", p[0], p[1], v)?;
    }
    if let Some(t) = trailer {
        writeln!(w, "# {t}")?;
    }
    Ok(())
}

/// `theta,alpha,value` rows.
pub fn write_sinogram_csv<W: Write>(w: &mut W, s: &SinogramGrid, trailer: Option<&str>) -> io::Result<()> {
    writeln!(w, "theta,alpha,value")?;
    for i in 0..s.fan.n_theta {
        for j in 0..s.fan.n_alpha {
            writeln!(w, "{},{},{}", s.fan.theta(i), s.fan.alpha(j), s.get(i, j))?;
        }
    }
    if let Some(t) = trailer {
        writeln!(w, "# {t}")?;
    }
    Ok(())
}

/// Min–max scaled 16-bit plain PGM; returns (min, max). Row 0 is the top (largest y).
pub fn write_pgm<W: Write>(w: &mut W, g: &ScalarGrid) -> io::Result<(f64, f64)> {
    let lo = g.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = g.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    writeln!(w, "P2\n{} {}\n65535", g.spec.nx, g.spec.ny)?;
    for j in (0..g.spec.ny).rev() {
        let line: Vec<String> = (0..g.spec.nx)
            .map(|i| (((g.get(i, j) - lo) / span * 65535.0).round() as u32).to_string())
            .collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok((lo, hi))
}

/// Write `path` as PGM and `path.scale.txt` with the value range.
pub fn save_pgm(path: &Path, g: &ScalarGrid) -> io::Result<()> {
    let mut buf = Vec::new();
    let (lo, hi) = write_pgm(&mut buf, g)?;
    fs::write(path, buf)?;
    let mut side = path.as_os_str().to_owned();
    side.push(".scale.txt");
    fs::write(side, format!("min = {lo}\nmax = {hi}\n"))
}
