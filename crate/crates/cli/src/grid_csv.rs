//! Surface grids from CSV.
//!
//! ```text
//! nu,nv
//! 3,3
//! u_index,v_index,x0,x1,x2,x3
//! 0,0,0.0,0.0,0.0,1.0
//! ...
//! ```
//!
//! Header lines are optional. The first numeric record holds `nu, nv`; every
//! later one is a node. Each of the `nu·nv` nodes must appear exactly once, in
//! any order. The grid is in index units, so step sizes are 1.

use std::io::Read;

use anyhow::{anyhow, bail, Context};

use hyperfill::hyperbolic::{HPoint, MinkowskiVector};
use hyperfill::surfaces::{Grid, ParamSurface};

fn is_numeric(field: &str) -> bool {
    field.trim().parse::<f64>().is_ok()
}

pub fn read_surface<R: Read>(input: R, tau_point: f64) -> anyhow::Result<ParamSurface> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut dims: Option<(usize, usize)> = None;
    let mut slots: Vec<Option<HPoint>> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("CSV record {}", line + 1))?;
        if rec.iter().all(|f| f.is_empty()) || !rec.iter().all(is_numeric) {
            if dims.is_some() && rec.iter().any(is_numeric) {
                bail!("line {}: mixed text and numbers", line + 1);
            }
            continue;
        }
        let Some((nu, nv)) = dims else {
            if rec.len() != 2 {
                bail!("line {}: expected `nu,nv`, got {} fields", line + 1, rec.len());
            }
            let parse = |k: usize| -> anyhow::Result<usize> {
                rec[k]
                    .parse()
                    .map_err(|_| anyhow!("line {}: grid size {:?} is not an integer", line + 1, &rec[k]))
            };
            let (nu, nv) = (parse(0)?, parse(1)?);
            dims = Some((nu, nv));
            slots = vec![None; nu * nv];
            continue;
        };
        if rec.len() != 6 {
            bail!("line {}: expected 6 fields, got {}", line + 1, rec.len());
        }
        let index = |k: usize| -> anyhow::Result<usize> {
            rec[k]
                .parse()
                .map_err(|_| anyhow!("line {}: index {:?} is not an integer", line + 1, &rec[k]))
        };
        let (i, j) = (index(0)?, index(1)?);
        if i >= nu || j >= nv {
            bail!("line {}: node ({i}, {j}) outside a {nu}x{nv} grid", line + 1);
        }
        let coords = (2..6).map(|k| rec[k].parse::<f64>()).collect::<Result<Vec<_>, _>>()?;
        let v = MinkowskiVector::new(coords)?;
        let residual = (v.norm_sq() + 1.0).abs();
        if residual > tau_point * v.max_abs().powi(2).max(1.0) {
            bail!(
                "line {}: node ({i}, {j}) is off the hyperboloid by {residual:e}",
                line + 1
            );
        }
        let slot = &mut slots[i * nv + j];
        if slot.is_some() {
            bail!("line {}: node ({i}, {j}) given twice", line + 1);
        }
        *slot = Some(HPoint::new(v)?);
    }
    let (nu, nv) = dims.ok_or_else(|| anyhow!("no `nu,nv` record found"))?;
    let points = slots
        .into_iter()
        .enumerate()
        .map(|(k, p)| p.ok_or_else(|| anyhow!("node ({}, {}) missing", k / nv, k % nv)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(ParamSurface::new(Grid::new(0.0, 0.0, 1.0, 1.0, nu, nv)?, points)?)
}

/// Inverse of [`read_surface`], with headers.
pub fn write_surface(s: &ParamSurface) -> String {
    let g = s.grid();
    let mut out = format!("nu,nv\n{},{}\nu_index,v_index,x0,x1,x2,x3\n", g.nu, g.nv);
    for i in 0..g.nu {
        for j in 0..g.nv {
            let c = s.point(i, j).coords();
            out.push_str(&format!("{i},{j},{:?},{:?},{:?},{:?}\n", c[0], c[1], c[2], c[3]));
        }
    }
    out
}
