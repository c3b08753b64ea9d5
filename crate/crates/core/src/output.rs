//! CSV writers for snapshots, step logs and convergence tables.
//!
//! Floats are written with 17 significant digits so that every value
//! round-trips exactly.

use std::io::Write;

use crate::convergence::ConvergenceRow;
use crate::error::{Result, RmhdError};
use crate::recovery::recover;
use crate::solver1d::{Grid1D, StepRecord};
use crate::solver2d::{Grid2D, StepRecord2d};
use crate::state::Eos;

const PRIMITIVE_COLUMNS: [&str; 8] = ["rho", "v1", "v2", "v3", "B1", "B2", "B3", "p"];
const CONSERVED_COLUMNS: [&str; 8] = ["D", "m1", "m2", "m3", "B1c", "B2c", "B3c", "E"];

/// Round-trip-exact float formatting.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> RmhdError {
    RmhdError::Io(e.to_string())
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

/// The conserved columns drop the repeated field components.
fn conserved_fields(u: &crate::state::ConservedState) -> [f64; 5] {
    [u.d, u.m[0], u.m[1], u.m[2], u.e]
}

fn conserved_header() -> impl Iterator<Item = &'static str> {
    CONSERVED_COLUMNS.iter().copied().filter(|c| !c.ends_with('c'))
}

/// One row per cell: `x, ρ, v, B, p, D, m, E`.
pub fn write_snapshot_1d<W: Write>(w: W, grid: &Grid1D, eos: &Eos) -> Result<()> {
    let mut out = writer(w);
    let header: Vec<&str> = ["x"].into_iter().chain(PRIMITIVE_COLUMNS).chain(conserved_header()).collect();
    out.write_record(&header).map_err(csv_err)?;
    for (j, u) in grid.cells.iter().enumerate() {
        let v = recover(u, eos).map_err(|e| RmhdError::at_cell(format!("{j}"), e))?.prim;
        let row: Vec<String> = std::iter::once(grid.x_center(j))
            .chain(v.to_array())
            .chain(conserved_fields(u))
            .map(fmt_f64)
            .collect();
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_step_log_1d<W: Write>(w: W, log: &[StepRecord]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["step", "t", "dt", "min_rho", "min_p", "max_v", "limiter_activations"])
        .map_err(csv_err)?;
    for r in log {
        let mut row = vec![r.step.to_string()];
        row.extend([r.t, r.dt, r.min_rho, r.min_p, r.max_v].map(fmt_f64));
        row.push(r.limiter_activations.to_string());
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// One row per cell in row-major order: `i, j, x, y`, primitives, conserved.
pub fn write_snapshot_2d<W: Write>(w: W, grid: &Grid2D) -> Result<()> {
    let mut out = writer(w);
    let header: Vec<&str> = ["i", "j", "x", "y"]
        .into_iter()
        .chain(PRIMITIVE_COLUMNS)
        .chain(conserved_header())
        .collect();
    out.write_record(&header).map_err(csv_err)?;
    let g = &grid.geom;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let u = grid.at(i, j);
            let v = recover(u, &grid.eos)
                .map_err(|e| RmhdError::at_cell(format!("({i}, {j})"), e))?
                .prim;
            let mut row = vec![i.to_string(), j.to_string()];
            row.extend(
                [g.x_center(i), g.y_center(j)]
                    .into_iter()
                    .chain(v.to_array())
                    .chain(conserved_fields(u))
                    .map(fmt_f64),
            );
            out.write_record(&row).map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Per-step diagnostics: `step, t, dt, E_inf, min_rho, min_p, max_lorentz`.
pub fn write_diagnostics_2d<W: Write>(w: W, log: &[StepRecord2d]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["step", "t", "dt", "E_inf", "min_rho", "min_p", "max_lorentz"])
        .map_err(csv_err)?;
    for r in log {
        let mut row = vec![r.step.to_string()];
        row.extend([r.t, r.dt, r.div_sup, r.min_rho, r.min_p, r.max_lorentz].map(fmt_f64));
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Error table; the order columns are omitted for a single mesh.
pub fn write_convergence<W: Write>(w: W, rows: &[ConvergenceRow]) -> Result<()> {
    let mut out = writer(w);
    let with_orders = rows.len() > 1;
    let mut header = vec!["n", "l1", "l2"];
    if with_orders {
        header.extend(["order_l1", "order_l2"]);
    }
    header.extend(["steps", "limiter_activations"]);
    out.write_record(&header).map_err(csv_err)?;
    let opt = |o: Option<f64>| o.map(fmt_f64).unwrap_or_default();
    for r in rows {
        let mut row = vec![r.n.to_string(), fmt_f64(r.l1), fmt_f64(r.l2)];
        if with_orders {
            row.extend([opt(r.order_l1), opt(r.order_l2)]);
        }
        row.extend([r.steps.to_string(), r.limiter_activations.to_string()]);
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the numeric body of a CSV written by this module.
pub fn read_numeric_csv<R: std::io::Read>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| RmhdError::Io(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryKind;
    use crate::state::{primitive_to_conserved, PrimitiveState};

    #[test]
    fn snapshot_round_trips() {
        let eos = Eos::default();
        let v = PrimitiveState::new(1.0 / 3.0, [0.1, -0.2, 0.3], [1.0, 0.7, -0.1], 0.123456789);
        let u = primitive_to_conserved(&v, &eos).unwrap();
        let g = Grid1D::new(0.0, 1.0, vec![u; 4], BoundaryKind::Outflow).unwrap();
        let mut buf = Vec::new();
        write_snapshot_1d(&mut buf, &g, &eos).unwrap();
        let (h, rows) = read_numeric_csv(buf.as_slice()).unwrap();
        assert_eq!(h.len(), 14);
        assert_eq!(h[0], "x");
        assert_eq!(h[13], "E");
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1][0], 0.375);
        assert_eq!(rows[0][9], u.d);
        assert_eq!(rows[0][13], u.e);
        assert!((rows[0][8] - v.p).abs() < 1e-12);
    }

    #[test]
    fn convergence_columns() {
        let row = |n, o| ConvergenceRow {
            n,
            l1: 1.0,
            l2: 2.0,
            order_l1: o,
            order_l2: o,
            steps: 3,
            limiter_activations: 0,
        };
        let mut one = Vec::new();
        write_convergence(&mut one, &[row(10, None)]).unwrap();
        let text = String::from_utf8(one).unwrap();
        assert!(text.starts_with("n,l1,l2,steps,limiter_activations\n"));
        let mut two = Vec::new();
        write_convergence(&mut two, &[row(10, None), row(20, Some(2.0))]).unwrap();
        let text = String::from_utf8(two).unwrap();
        assert!(text.starts_with("n,l1,l2,order_l1,order_l2,"));
        assert_eq!(text.lines().nth(1).unwrap().split(',').nth(3), Some(""));
    }

    #[test]
    fn float_format_is_exact() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
