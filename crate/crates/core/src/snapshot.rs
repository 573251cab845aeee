//! Field snapshots as CSV text.
//!
//! Layout:
//!
//! ```text
//! # nx=<nx> ny=<ny> lx=<lx> ly=<ly> t=<time>
//! f(0,0),f(1,0),...,f(nx-1,0)
//! ...
//! f(0,ny-1),...,f(nx-1,ny-1)
//! ```
//!
//! One grid row (fixed `j`) per line, values in scientific notation with 17
//! significant digits. Header numbers use the shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

pub fn to_csv_string(field: &Field, t: f64) -> String {
    let g = field.grid();
    let mut out = String::with_capacity(g.len() * 25 + 64);
    let _ = writeln!(
        out,
        "# nx={} ny={} lx={} ly={} t={}",
        g.nx(),
        g.ny(),
        g.lx(),
        g.ly(),
        t
    );
    for row in field.values().chunks(g.nx()) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, field: &Field, t: f64) -> Result<()> {
    fs::write(path, to_csv_string(field, t)).map_err(|e| Error::io(path, e))
}

/// Parses a snapshot produced by [`to_csv_string`], returning the field and
/// its time stamp.
///
/// The grid is rebuilt from `nx`, `ny`, `lx`, `ly` in exact-domain form.
pub fn from_csv_str(text: &str) -> Result<(Field, f64)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty input".into()))?;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing '#' header line".into()))?;

    let (mut nx, mut ny, mut lx, mut ly, mut t) = (None, None, None, None, None);
    for tok in header.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number for {key}: {v:?}")))
        };
        let count = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad count for {key}: {v:?}")))
        };
        match key {
            "nx" => nx = Some(count(val)?),
            "ny" => ny = Some(count(val)?),
            "lx" => lx = Some(num(val)?),
            "ly" => ly = Some(num(val)?),
            "t" => t = Some(num(val)?),
            _ => return Err(Error::Parse(format!("unknown header key {key:?}"))),
        }
    }
    let missing = |k: &str| Error::Parse(format!("header lacks {k}"));
    let (nx, ny) = (
        nx.ok_or_else(|| missing("nx"))?,
        ny.ok_or_else(|| missing("ny"))?,
    );
    let (lx, ly) = (
        lx.ok_or_else(|| missing("lx"))?,
        ly.ok_or_else(|| missing("ly"))?,
    );
    let t = t.ok_or_else(|| missing("t"))?;
    let grid = Grid::new(nx, ny, lx, ly)?;

    let mut values = Vec::with_capacity(grid.len());
    let mut rows = 0;
    for (lineno, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let before = values.len();
        for cell in line.split(',') {
            let v = cell
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: bad value {cell:?}", lineno + 2)))?;
            values.push(v);
        }
        if values.len() - before != nx {
            return Err(Error::Parse(format!(
                "line {}: expected {nx} values, got {}",
                lineno + 2,
                values.len() - before
            )));
        }
        rows += 1;
    }
    if rows != ny {
        return Err(Error::Parse(format!("expected {ny} rows, got {rows}")));
    }
    Ok((Field::from_values(grid, values)?, t))
}

pub fn read_csv(path: &Path) -> Result<(Field, f64)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_csv_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_layout() {
        let g = Grid::new(3, 4, 1.0, 1.5).unwrap();
        let f = Field::from_fn(g, |x, y| x + 10.0 * y);
        let text = to_csv_string(&f, 10.0);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# nx=3 ny=4 lx=1 ly=1.5 t=10");
        assert_eq!(
            lines.next().unwrap(),
            "0.0000000000000000e0,5.0000000000000000e-1,1.0000000000000000e0"
        );
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn rejects_ragged_rows() {
        let text = "# nx=3 ny=3 lx=1 ly=1 t=0\n1,2,3\n1,2\n1,2,3\n";
        assert!(from_csv_str(text).is_err());
        let text = "# nx=3 ny=3 lx=1 ly=1 t=0\n1,2,3\n1,2,3\n";
        assert!(from_csv_str(text).is_err());
        let text = "nx=3 ny=3 lx=1 ly=1 t=0\n1,2,3\n1,2,3\n1,2,3\n";
        assert!(from_csv_str(text).is_err());
    }

    proptest! {
        #[test]
        fn round_trips_bit_exactly(
            vals in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 20),
            t in 0.0f64..2000.0,
        ) {
            let g = Grid::new(5, 4, 2.0 * std::f64::consts::PI, 3.0).unwrap();
            let f = Field::from_values(g, vals).unwrap();
            let (back, tb) = from_csv_str(&to_csv_string(&f, t)).unwrap();
            prop_assert_eq!(tb.to_bits(), t.to_bits());
            prop_assert_eq!(back.grid(), f.grid());
            for (a, b) in back.values().iter().zip(f.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
