//! Grid sweeps over push direction/magnitude or CoM velocity.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use vhip_core::f64::Vector3;
use vhip_core::simulation::Scenario;
use vhip_core::{assess_zero_step, run};

use crate::{ensure, load_scenario, parse_range, Range, EXIT_OK};

/// Cells within this many grid steps of a verdict change are in the boundary band.
pub const BOUNDARY_BAND: usize = 2;

pub const CSV_HEADER_PUSH: &str =
    "i,j,angle_deg,magnitude,verdict,tags,outcome,agree,near_boundary,error";
pub const CSV_HEADER_VELOCITY: &str = "i,j,vx,vy,verdict,tags,outcome,agree,near_boundary,error";

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Scenario used as the template for every cell.
    pub template: PathBuf,
    /// Horizontal push heading in degrees, `start:end:count`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range, requires = "magnitude")]
    pub angle: Option<Range>,
    /// Horizontal push magnitude in m/s, `start:end:count`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range, requires = "angle")]
    pub magnitude: Option<Range>,
    /// Vertical push component in m/s.
    #[arg(long, default_value_t = 0.0)]
    pub push_vz: f64,
    /// Initial CoM x-velocity in m/s, `start:end:count`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range, requires = "vy", conflicts_with = "angle")]
    pub vx: Option<Range>,
    /// Initial CoM y-velocity in m/s, `start:end:count`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range, requires = "vx", conflicts_with = "angle")]
    pub vy: Option<Range>,
    /// Bound on u for the verdict.
    #[arg(long)]
    pub u_max: Option<f64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub workers: Option<usize>,
    /// CSV output instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    /// Push of heading `p1` (degrees) and magnitude `p2` applied to the initial state.
    Push,
    /// Initial horizontal velocity `(p1, p2)`.
    Velocity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
    pub p1: f64,
    pub p2: f64,
    pub capturable: Option<bool>,
    pub tags: Vec<&'static str>,
    pub outcome: Option<&'static str>,
    pub near_boundary: bool,
    pub error: Option<String>,
}

impl Cell {
    pub fn agree(&self) -> Option<bool> {
        Some(self.capturable? == (self.outcome? == "converged"))
    }
}

pub struct Grid {
    pub kind: GridKind,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub push_vz: f64,
    pub u_max: Option<f64>,
}

impl Grid {
    fn cell_scenario(&self, template: &Scenario<f64>, a: f64, b: f64) -> Scenario<f64> {
        let mut sc = template.clone();
        match self.kind {
            GridKind::Push => {
                let h = a.to_radians();
                let dv = Vector3::new(b * h.cos(), b * h.sin(), self.push_vz);
                sc.initial = sc.initial.pushed(dv);
            }
            GridKind::Velocity => {
                sc.initial.v = Vector3::new(a, b, sc.initial.v.z);
            }
        }
        sc
    }

    fn evaluate(&self, template: &Scenario<f64>, i: usize, j: usize) -> Cell {
        let (p1, p2) = (self.p1[i], self.p2[j]);
        let mut cell = Cell {
            i,
            j,
            p1,
            p2,
            capturable: None,
            tags: Vec::new(),
            outcome: None,
            near_boundary: false,
            error: None,
        };
        let sc = self.cell_scenario(template, p1, p2);
        let verdict = sc
            .support()
            .and_then(|s| assess_zero_step(&sc.initial, &s, &sc.constants, self.u_max));
        match verdict {
            Ok(a) => {
                cell.capturable = Some(a.capturable);
                cell.tags = a.failure_reasons.iter().map(|r| r.tag()).collect();
            }
            Err(e) => cell.error = Some(e.to_string()),
        }
        match run(&sc) {
            Ok(log) => cell.outcome = Some(log.outcome.tag()),
            Err(e) => cell.error = Some(e.to_string()),
        }
        cell
    }

    /// Evaluates every cell in row-major `(i, j)` order.
    pub fn run(&self, template: &Scenario<f64>) -> Vec<Cell> {
        let index: Vec<(usize, usize)> = (0..self.p1.len())
            .flat_map(|i| (0..self.p2.len()).map(move |j| (i, j)))
            .collect();
        let mut cells: Vec<Cell> = index
            .par_iter()
            .map(|&(i, j)| self.evaluate(template, i, j))
            .collect();
        mark_boundary(&mut cells, self.p1.len(), self.p2.len());
        cells
    }
}

fn mark_boundary(cells: &mut [Cell], n1: usize, n2: usize) {
    let verdict: Vec<Option<bool>> = cells.iter().map(|c| c.capturable).collect();
    let band = BOUNDARY_BAND as isize;
    for c in cells.iter_mut() {
        let mut near = false;
        for di in -band..=band {
            for dj in -band..=band {
                let (i, j) = (c.i as isize + di, c.j as isize + dj);
                if i < 0 || j < 0 || i >= n1 as isize || j >= n2 as isize {
                    continue;
                }
                near |= verdict[i as usize * n2 + j as usize] != c.capturable;
            }
        }
        c.near_boundary = near;
    }
}

fn yes_no(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

pub fn write_csv(kind: GridKind, cells: &[Cell], out: &mut dyn Write) -> std::io::Result<()> {
    let header = match kind {
        GridKind::Push => CSV_HEADER_PUSH,
        GridKind::Velocity => CSV_HEADER_VELOCITY,
    };
    writeln!(out, "{header}")?;
    for c in cells {
        let verdict = match c.capturable {
            Some(true) => "capturable",
            Some(false) => "not-capturable",
            None => "error",
        };
        let error = c.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        writeln!(
            out,
            "{},{},{},{},{verdict},{},{},{},{},{error}",
            c.i,
            c.j,
            c.p1,
            c.p2,
            c.tags.join("|"),
            c.outcome.unwrap_or("error"),
            yes_no(c.agree()),
            c.near_boundary,
        )?;
    }
    Ok(())
}

#[derive(Debug, Default, PartialEq)]
pub struct SweepSummary {
    pub cells: usize,
    pub capturable: usize,
    pub errors: usize,
    pub agree: usize,
    pub interior: usize,
    pub interior_agree: usize,
}

pub fn summarize(cells: &[Cell]) -> SweepSummary {
    let mut s = SweepSummary {
        cells: cells.len(),
        ..Default::default()
    };
    for c in cells {
        s.capturable += (c.capturable == Some(true)) as usize;
        s.errors += c.error.is_some() as usize;
        let agree = c.agree() == Some(true);
        s.agree += agree as usize;
        if !c.near_boundary {
            s.interior += 1;
            s.interior_agree += agree as usize;
        }
    }
    s
}

pub fn sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<u8> {
    let file = load_scenario(&args.template)?;
    let template = file.to_scenario()?;
    let grid = match (&args.angle, &args.magnitude, &args.vx, &args.vy) {
        (Some(a), Some(m), None, None) => Grid {
            kind: GridKind::Push,
            p1: a.0.clone(),
            p2: m.0.clone(),
            push_vz: args.push_vz,
            u_max: args.u_max,
        },
        (None, None, Some(x), Some(y)) => Grid {
            kind: GridKind::Velocity,
            p1: x.0.clone(),
            p2: y.0.clone(),
            push_vz: 0.0,
            u_max: args.u_max,
        },
        _ => anyhow::bail!("give either --angle and --magnitude, or --vx and --vy"),
    };
    if let Some(w) = args.workers {
        ensure(w >= 1, "--workers must be at least 1")?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.unwrap_or(0))
        .build()
        .context("building the worker pool")?;
    let cells = pool.install(|| grid.run(&template));

    let mut buf = Vec::new();
    write_csv(grid.kind, &cells, &mut buf)?;
    match &args.out {
        Some(p) => std::fs::write(p, &buf).with_context(|| format!("writing {}", p.display()))?,
        None => stdout.write_all(&buf)?,
    }
    let s = summarize(&cells);
    log::info!(
        "{} cells, {} capturable, {} errors; agreement {}/{} overall, {}/{} outside the boundary band",
        s.cells,
        s.capturable,
        s.errors,
        s.agree,
        s.cells,
        s.interior_agree,
        s.interior
    );
    eprintln!(
        "sweep: {} cells, {} capturable, agreement {}/{} ({}/{} outside the boundary band)",
        s.cells, s.capturable, s.agree, s.cells, s.interior_agree, s.interior
    );
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(i: usize, j: usize, c: bool) -> Cell {
        Cell {
            i,
            j,
            p1: 0.0,
            p2: 0.0,
            capturable: Some(c),
            tags: vec![],
            outcome: Some(if c { "converged" } else { "fell" }),
            near_boundary: false,
            error: None,
        }
    }

    #[test]
    fn boundary_band_is_two_cells_wide() {
        let mut cells: Vec<Cell> = (0..8).map(|j| cell(0, j, j >= 4)).collect();
        mark_boundary(&mut cells, 1, 8);
        let near: Vec<bool> = cells.iter().map(|c| c.near_boundary).collect();
        assert_eq!(near, [false, false, true, true, true, true, false, false]);
    }

    #[test]
    fn agreement() {
        let mut c = cell(0, 0, true);
        assert_eq!(c.agree(), Some(true));
        c.outcome = Some("fell");
        assert_eq!(c.agree(), Some(false));
        c.capturable = None;
        assert_eq!(c.agree(), None);
    }
}
