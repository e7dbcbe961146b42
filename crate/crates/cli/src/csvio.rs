//! CSV output in the documented schemas.
//!
//! Grid dumps are `level,index,x,weight` (the standard-normal dump drops
//! the level column), benchmark tables are
//! `<label>,rmq,mc,ci_lo,ci_hi[,closed_form,abs_error]`, the Brownian
//! comparison is `N,err_equal,err_optimal,err_regular`, and dispatch
//! schedules are `budget,level,size`. Reals are written in shortest
//! round-trip decimal form.

use std::io::Write;

use anyhow::Result;

use crate::runs::{CompareRow, TableRow};
use rmq_core::gaussian::StdNormalQuantizer;
use rmq_core::tree::QuantizationTree;

/// Writes every level's points and weights as `level,index,x,weight`.
pub fn write_tree_grids_csv<W: Write>(out: W, tree: &QuantizationTree) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["level", "index", "x", "weight"])?;
    for (k, level) in tree.levels.iter().enumerate() {
        for (i, (&x, &weight)) in level.grid.iter().zip(&level.weights).enumerate() {
            w.serialize((k, i, x, weight))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a standard-normal quantizer as `index,x,weight`.
pub fn write_normal_grid_csv<W: Write>(out: W, q: &StdNormalQuantizer) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "x", "weight"])?;
    for (i, (&x, &weight)) in q.points.iter().zip(&q.weights).enumerate() {
        w.serialize((i, x, weight))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the Brownian comparison sweep as
/// `N,err_equal,err_optimal,err_regular`.
pub fn write_compare_csv<W: Write>(out: W, rows: &[CompareRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "err_equal", "err_optimal", "err_regular"])?;
    for row in rows {
        w.serialize((row.budget, row.err_equal, row.err_optimal, row.err_regular))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes per-budget size schedules as `budget,level,size`.
pub fn write_dispatch_csv<W: Write>(out: W, schedules: &[(usize, Vec<usize>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["budget", "level", "size"])?;
    for (budget, sizes) in schedules {
        for (level, size) in sizes.iter().enumerate() {
            w.serialize((budget, level, size))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a benchmark table as `<label>,rmq,mc,ci_lo,ci_hi`, extended by
/// `closed_form,abs_error` columns when any row carries a closed form.
pub fn write_table_csv<W: Write>(out: W, label: &str, rows: &[TableRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let with_closed = rows.iter().any(|row| row.closed_form.is_some());
    if with_closed {
        w.write_record([label, "rmq", "mc", "ci_lo", "ci_hi", "closed_form", "abs_error"])?;
    } else {
        w.write_record([label, "rmq", "mc", "ci_lo", "ci_hi"])?;
    }
    for row in rows {
        if with_closed {
            let closed = row
                .closed_form
                .ok_or_else(|| anyhow::anyhow!("row {} is missing its closed form", row.label))?;
            w.serialize((
                row.label,
                row.rmq,
                row.mc.price,
                row.mc.ci_low,
                row.mc.ci_high,
                closed,
                (row.rmq - closed).abs(),
            ))?;
        } else {
            w.serialize((row.label, row.rmq, row.mc.price, row.mc.ci_low, row.mc.ci_high))?;
        }
    }
    w.flush()?;
    Ok(())
}
