//! One runner per CLI subcommand. Each writes CSV files into an output
//! directory and returns their paths.

use std::path::{Path, PathBuf};

use crate::config::ValidationMode;
use crate::error::Result;
use crate::kernel::{check_positivity, check_scaling, check_semigroup, kernel, tail_series_at};
use crate::mild::{MildOperator, PathState};
use crate::noise::{sample_sheet, SheetIncrements};
use crate::weak::{battery_residual_first, battery_residual_second, bump_battery};

use super::converge::convergence_study;
use super::mc::run_mc;
use super::output::{num, write_summary, CsvFile};
use super::run_config::{ModelKind, Oracle, RunConfig};
use super::solve_on;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Kernel,
    SimulateLinear,
    SimulateMild,
    Verify,
    Mc,
    Converge,
}

impl Command {
    pub fn validation_mode(self) -> ValidationMode {
        match self {
            Command::Kernel => ValidationMode::KernelOracle,
            _ => ValidationMode::Solver,
        }
    }
}

pub fn run_command(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate(cmd.validation_mode()).into_result()?;
    std::fs::create_dir_all(out)?;
    match cmd {
        Command::Kernel => run_kernel(cfg, out),
        Command::SimulateLinear => {
            let mut c = cfg.clone();
            c.model = ModelKind::Linear;
            run_simulate(&c, out)
        }
        Command::SimulateMild => {
            let mut c = cfg.clone();
            c.model = ModelKind::Nonlinear;
            run_simulate(&c, out)
        }
        Command::Verify => run_verify(cfg, out),
        Command::Mc => run_mc_command(cfg, out),
        Command::Converge => run_converge(cfg, out),
    }
}

fn run_kernel(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let g = &cfg.grid;
    let p = &cfg.params;
    let t = cfg.kernel_t;
    let s = kernel(t, cfg.kernel_k, p, g)?;
    let values_path = out.join("kernel.csv");
    let mut w = CsvFile::create(&values_path, &["x", "value"])?;
    for (i, v) in s.values.iter().enumerate() {
        w.row([num(g.x(i)), num(*v)])?;
    }
    w.finish()?;

    let (min, density) = check_positivity(t, p, g)?;
    let mut rows = vec![
        ("t", num(t)),
        ("k", cfg.kernel_k.to_string()),
        ("mass", num(s.mass())),
        ("min", num(min)),
        ("density", density.to_string()),
        ("imag_residue", num(s.imag_residue)),
        ("semigroup_error", num(check_semigroup(t / 2.0, t / 2.0, p, g)?)),
        ("scaling_error", num(check_scaling(t, cfg.kernel_k, p, g)?)),
    ];
    let x_tail = g.half_width / 2.0;
    if let Ok(series) = tail_series_at(t, x_tail, cfg.kernel_k, cfg.tail_terms, p) {
        let spec_val = s.values[((x_tail + g.half_width) / g.dx()).round() as usize];
        rows.push(("tail_x", num(x_tail)));
        rows.push(("tail_series", num(series)));
        rows.push(("kernel_at_tail_x", num(spec_val)));
    }
    let checks_path = out.join("kernel_checks.csv");
    write_summary(&checks_path, &rows)?;
    Ok(vec![values_path, checks_path])
}

fn write_trajectory(path: &Path, traj: &PathState, levels: &[usize]) -> Result<()> {
    let g = &traj.grid;
    let mut w = CsvFile::create(path, &["t", "x", "u"])?;
    for &n in levels {
        for (i, v) in traj.levels[n].iter().enumerate() {
            w.row([num(g.time(n)), num(g.x(i)), num(*v)])?;
        }
    }
    w.finish()
}

fn run_simulate(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let g = cfg.grid;
    let sheet = sample_sheet(&g, cfg.seed, 0)?;
    let (traj, diag) = solve_on(cfg, &g, &sheet)?;
    let mut files = Vec::new();

    let noise_path = out.join("noise.bin");
    sheet.save(&noise_path)?;
    files.push(noise_path);

    let traj_path = out.join("trajectory.csv");
    write_trajectory(&traj_path, &traj, &cfg.output_levels()?)?;
    files.push(traj_path);

    if let Some(d) = diag {
        let p = out.join("picard.csv");
        let mut w = CsvFile::create(&p, &["iteration", "distance"])?;
        for (i, v) in d.distances.iter().enumerate() {
            w.row([(i + 1).to_string(), num(*v)])?;
        }
        w.finish()?;
        files.push(p);
        let op = MildOperator::new(&cfg.params, &cfg.coefficients(), &g)?;
        let u0 = cfg.initial_field();
        let p = out.join("picard_summary.csv");
        write_summary(
            &p,
            &[
                ("iterations", d.iterations.to_string()),
                ("converged", d.converged.to_string()),
                ("fixed_point_residual", num(op.fixed_point_residual(&u0, &traj, &sheet)?)),
            ],
        )?;
        files.push(p);
        if cfg.oracle == Oracle::Etd {
            let etd = op.etd_march(&u0, &sheet)?;
            let p = out.join("etd_diff.csv");
            let mut w = CsvFile::create(&p, &["t", "l2_diff"])?;
            for n in 0..=g.n_steps {
                let d = etd.levels[n].sub(&traj.levels[n]).l2_norm(g.dx());
                w.row([num(g.time(n)), num(d)])?;
            }
            w.finish()?;
            files.push(p);
        }
    }
    Ok(files)
}

fn run_verify(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let levels = cfg.levels.max(1) as u32;
    let finest = cfg.grid.refine(1 << (levels - 1), 1 << (levels - 1));
    let fine_sheet = sample_sheet(&finest, cfg.seed, 0)?;
    let coeffs = cfg.coefficients();
    let p = out.join("verify.csv");
    let mut w = CsvFile::create(&p, &["phi_id", "t", "residual_first", "residual_second", "level"])?;
    for l in 0..levels {
        let g = cfg.grid.refine(1 << l, 1 << l);
        let sheet: SheetIncrements = fine_sheet.aggregate_to(&g)?;
        let (path, _) = solve_on(cfg, &g, &sheet)?;
        let battery = bump_battery(&g, &cfg.params)?;
        let first = battery_residual_first(&path, &sheet, &battery, g.n_steps, &coeffs, &cfg.params)?;
        let second = battery_residual_second(&path, &sheet, &battery, g.n_steps, &coeffs, &cfg.params)?;
        for (id, (a, b)) in first.iter().zip(&second).enumerate() {
            w.row([id.to_string(), num(g.horizon), num(*a), num(*b), l.to_string()])?;
        }
    }
    w.finish()?;
    Ok(vec![p])
}

fn run_mc_command(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let r = run_mc(cfg, cfg.n_paths, cfg.seed)?;
    let p = out.join("moments.csv");
    let mut w = CsvFile::create(&p, &["t", "m2", "m2_se", "m4", "m4_se"])?;
    for i in 0..r.times.len() {
        w.row([num(r.times[i]), num(r.m2[i]), num(r.m2_se[i]), num(r.m4[i]), num(r.m4_se[i])])?;
    }
    w.finish()?;
    let s = out.join("moments_summary.csv");
    write_summary(
        &s,
        &[
            ("n_paths", r.n_paths.to_string()),
            ("excluded", r.excluded.to_string()),
            ("sup_m2", num(r.sup_m2)),
            ("sup_m4", num(r.sup_m4)),
        ],
    )?;
    Ok(vec![p, s])
}

fn run_converge(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let r = convergence_study(cfg, cfg.levels)?;
    let p = out.join("convergence.csv");
    let mut w = CsvFile::create(&p, &["level", "N", "M", "difference", "order"])?;
    for (l, (n, m)) in r.levels.iter().enumerate() {
        let d = r.differences.get(l).map_or(String::new(), |v| num(*v));
        let o = r.orders.get(l).map_or(String::new(), |v| num(*v));
        w.row([l.to_string(), n.to_string(), m.to_string(), d, o])?;
    }
    w.finish()?;
    Ok(vec![p])
}
