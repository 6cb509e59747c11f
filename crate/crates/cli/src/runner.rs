use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use cdlab_core::assembly::{
    assemble, exact_solution_1d, solve_system, DiscreteSolution, Grid, Method, ProblemSpec, Source,
};
use cdlab_core::banded::relative_residual;
use cdlab_core::experiments::{self, Figure2Point};
use cdlab_core::mesh::{uniform_partition, TensorMesh2D};
use cdlab_core::parabolic::{self, ParabolicProblem};
use cdlab_core::par;
use cdlab_core::theory::{self, TestFunctionRecipe, VerifyOptions};

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{self, write_csv, write_json, write_text};

/// Named pass/fail outcome with a short measured value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    match cfg.experiment {
        Experiment::Solve => solve(cfg),
        Experiment::Figure1 => figure1(cfg),
        Experiment::Figure2 => figure2(cfg),
        Experiment::Infsup => infsup(cfg),
        Experiment::Props => props(cfg),
        Experiment::Parabolic => parabolic(cfg),
        Experiment::BoundaryLayer => boundary_layer(cfg),
    }
}

fn spec_and_grid(cfg: &ExperimentConfig) -> Result<(ProblemSpec, Grid)> {
    if cfg.ny == 0 {
        let spec = ProblemSpec::one_d(cfg.alpha, cfg.beta, cfg.gamma, cfg.f, cfg.t);
        Ok((spec, Grid::OneD(uniform_partition(cfg.t, cfg.nx)?)))
    } else {
        let spec = ProblemSpec::two_d(cfg.alpha, cfg.beta, cfg.gamma, cfg.f, cfg.t, cfg.v);
        Ok((spec, Grid::TwoD(TensorMesh2D::uniform(cfg.t, cfg.v, cfg.nx, cfg.ny)?)))
    }
}

fn write_solution(dir: &Path, name: &str, comment: &str, spec: &ProblemSpec, sol: &DiscreteSolution) -> Result<()> {
    let mut buf = format!("# {comment}\n").into_bytes();
    sol.write_csv(spec, &mut buf)?;
    std::fs::write(dir.join(name), buf)?;
    Ok(())
}

fn solve(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let (spec, grid) = spec_and_grid(cfg)?;
    let method: Method = cfg.method.parse()?;
    let sys = assemble(&spec, &grid, method)?;
    let x = solve_system(&sys)?;
    let residual = relative_residual(&sys.matrix, &x, &sys.rhs);
    let mut values = vec![0.0; grid.n_vertices()];
    for (&d, v) in sys.dofs.iter().zip(&x) {
        values[d] = *v;
    }
    let sol = DiscreteSolution { grid: grid.clone(), values, method };
    write_solution(&cfg.out_dir, "solution.csv", &cfg.comment(), &spec, &sol)?;
    let script = match &grid {
        Grid::OneD(_) => output::lines_script("solution.csv", "u", &[2], "solution.png").replace("set logscale x\n", ""),
        Grid::TwoD(_) => output::surface_script("solution.csv", method.tag(), "solution.png"),
    };
    write_text(&cfg.out_dir, "solution.gp", &script)?;
    let mut checks = vec![Check::new("residual_le_1e-10", residual <= 1e-10, format!("{residual:.3e}"))];
    if let Grid::OneD(m) = &grid {
        let closed_form = matches!(spec.source, Source::Constant(f) if f == 1.0) && cfg.gamma == 0.0 && cfg.beta > 0.0;
        if closed_form && method == Method::PgExact {
            let exact: Vec<f64> = m.vertices.iter().map(|&t| exact_solution_1d(cfg.alpha, cfg.beta, cfg.t, t)).collect();
            let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let err = exact.iter().zip(&sol.values).fold(0.0f64, |a, (e, v)| a.max((e - v).abs())) / scale;
            checks.push(Check::new("nodal_exactness_le_1e-9", err <= 1e-9, format!("{err:.3e}")));
        }
    }
    Ok(checks)
}

#[derive(Serialize)]
struct MidlineRow {
    x: f64,
    pg_exact: f64,
    galerkin: f64,
}

#[derive(Serialize)]
struct Figure1Summary {
    peclet: f64,
    midline_y: f64,
    tv_pg_exact: f64,
    tv_galerkin: f64,
    contrast: f64,
    undershoot: f64,
}

fn figure1(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let mut cfg = cfg.clone();
    cfg.ny = cfg.nx;
    let spec = ProblemSpec::two_d(cfg.alpha, cfg.beta, cfg.gamma, cfg.f, cfg.t, cfg.v);
    let fig = experiments::figure1(&spec, cfg.nx)?;
    let dir = &cfg.out_dir;
    let comment = cfg.comment();
    write_solution(dir, "figure1_pg_exact.csv", &comment, &spec, &fig.upwinded)?;
    write_solution(dir, "figure1_galerkin.csv", &comment, &spec, &fig.galerkin)?;
    let mesh = TensorMesh2D::uniform(cfg.t, cfg.v, cfg.nx, cfg.nx)?;
    let (up, gal) = (fig.upwinded.line(fig.midline), fig.galerkin.line(fig.midline));
    let rows: Vec<MidlineRow> = mesh
        .flow
        .vertices
        .iter()
        .zip(up.iter().zip(&gal))
        .map(|(&x, (&a, &b))| MidlineRow { x, pg_exact: a, galerkin: b })
        .collect();
    write_csv(dir, "figure1_midline.csv", &comment, &rows)?;
    let script = format!(
        "{}\n{}\n{}",
        output::surface_script("figure1_pg_exact.csv", "pg-exact", "figure1_pg_exact.png"),
        output::surface_script("figure1_galerkin.csv", "galerkin", "figure1_galerkin.png"),
        output::profiles_script("figure1_midline.csv", "figure1_midline.png")
    );
    write_text(dir, "figure1.gp", &script)?;
    let summary = Figure1Summary {
        peclet: fig.peclet,
        midline_y: mesh.point(0, fig.midline).1,
        tv_pg_exact: fig.tv_upwinded,
        tv_galerkin: fig.tv_galerkin,
        contrast: fig.contrast(),
        undershoot: fig.undershoot,
    };
    write_json(dir, "figure1.json", &summary)?;
    Ok(vec![
        Check::new("tv_contrast_ge_5", fig.contrast() >= 5.0, format!("{:.3}", fig.contrast())),
        Check::new("undershoot_le_1e-6", fig.undershoot <= 1e-6, format!("{:.3e}", fig.undershoot)),
    ])
}

#[derive(Serialize)]
struct RidgeRow {
    sigma: f64,
    alpha_star: f64,
}

fn figure2(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let points = experiments::figure2(&cfg.alphas, &cfg.cells, cfg.beta, cfg.level)?;
    let dir = &cfg.out_dir;
    let comment = cfg.comment();
    write_csv(dir, "figure2.csv", &comment, &points)?;
    let ridge = experiments::ridge(&points);
    let rows: Vec<RidgeRow> = ridge
        .argmax
        .iter()
        .map(|&(sigma, alpha_star)| RidgeRow { sigma, alpha_star })
        .collect();
    write_csv(dir, "figure2_ridge.csv", &comment, &rows)?;
    write_text(
        dir,
        "figure2.gp",
        &format!(
            "{}set output 'figure2_ridge.png'\nunset view\nunset dgrid3d\nplot 'figure2_ridge.csv' using 1:2 with linespoints title 'ridge'\n",
            output::heatmap_script("figure2.csv", "relative distance", "figure2.png")
        ),
    )?;
    let reference: Figure2Point = experiments::upwinding_distance(cfg.alpha, cfg.beta, cfg.nx, cfg.level)?;
    write_json(dir, "figure2_ridge.json", &ridge)?;
    let basis = experiments::basis_sweep(&cfg.alphas, &cfg.cells, cfg.beta, cfg.level)?;
    write_csv(dir, "figure2_basis.csv", &comment, &basis)?;
    write_json(dir, "figure2_basis_ridge.json", &experiments::ridge(&basis))?;
    Ok(vec![
        Check::new(
            "reference_distance_le_0.05",
            reference.rel_distance <= 0.05,
            format!("alpha={} sigma={} distance={:.4}", reference.alpha, reference.sigma, reference.rel_distance),
        ),
        Check::new(
            "ridge_constant_in_[0.03,0.5]",
            (0.03..=0.5).contains(&ridge.c),
            format!("c={:.4} slope={:.3}", ridge.c, ridge.slope),
        ),
    ])
}

#[derive(Serialize)]
struct InfSupRow {
    alpha: f64,
    tau: f64,
    inf_sup: f64,
    scaled: f64,
    certified_bound: f64,
    sampled_min: f64,
}

fn infsup(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let recipe = TestFunctionRecipe {
        lambda: cfg.lambda,
        ..Default::default()
    };
    let rows = par::map_slice(&cfg.alphas, |&alpha| -> Result<InfSupRow> {
        let mut c = cfg.clone();
        c.alpha = alpha;
        let (spec, grid) = spec_and_grid(&c)?;
        let m = theory::measure_certified_inf_sup(&grid, &spec, &recipe, cfg.samples, cfg.seed)?;
        Ok(InfSupRow {
            alpha,
            tau: cfg.t / cfg.nx as f64,
            inf_sup: m.true_constant,
            scaled: m.true_constant * alpha.ln().abs(),
            certified_bound: m.certified_bound,
            sampled_min: m.sampled_min,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let dir = &cfg.out_dir;
    write_csv(dir, "infsup.csv", &cfg.comment(), &rows)?;
    write_text(dir, "infsup.gp", &output::lines_script("infsup.csv", "constant", &[3, 4, 5], "infsup.png"))?;
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(r.scaled), h.max(r.scaled)));
    let ordered = rows
        .iter()
        .all(|r| r.certified_bound <= r.sampled_min + 1e-12 && r.sampled_min <= r.inf_sup + 1e-8);
    Ok(vec![
        Check::new("log_scaled_spread_le_3", hi / lo <= 3.0, format!("{:.3}", hi / lo)),
        Check::new("certified_le_sampled_le_true", ordered, format!("{} points", rows.len())),
    ])
}

#[derive(Serialize)]
struct PropsRow {
    id: String,
    fitted_constant: f64,
    slope: f64,
    transfer_ratio: f64,
    pass: bool,
}

fn file_id(id: &str) -> String {
    id.replace('Φ', "Phi")
}

fn props(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let opts = VerifyOptions {
        seed: cfg.seed,
        samples: cfg.samples,
    };
    let dir = cfg.out_dir.join("props");
    std::fs::create_dir_all(&dir)?;
    let mut reports = Vec::new();
    for id in &cfg.ids {
        let r = theory::verify_proposition(id, &opts)?;
        write_json(&dir, &format!("{}.json", file_id(&r.id)), &r)?;
        reports.push(r);
    }
    write_json(&cfg.out_dir, "props.json", &reports)?;
    let rows: Vec<PropsRow> = reports
        .iter()
        .map(|r| PropsRow {
            id: r.id.clone(),
            fitted_constant: r.fitted_constant,
            slope: r.slope,
            transfer_ratio: r.transfer_ratio,
            pass: r.pass,
        })
        .collect();
    write_csv(&cfg.out_dir, "props.csv", &cfg.comment(), &rows)?;
    Ok(reports
        .iter()
        .map(|r| {
            Check::new(
                &r.id,
                r.pass,
                format!("law {} C={:.3} slope={:.3}", r.claimed_law, r.fitted_constant, r.slope),
            )
        })
        .collect())
}

#[derive(Serialize)]
struct ParabolicRow {
    alpha: f64,
    tau: f64,
    sigma: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct ParabolicDiagnostics {
    max_residual: f64,
    spread: f64,
    inverse_inequality_constant: f64,
    combined_lower_bound: f64,
    energy_decay_ratio: f64,
}

fn parabolic(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    use rand::SeedableRng;
    let points = parabolic::stability_sweep(&cfg.alphas, &cfg.cells, parabolic::default_source())?;
    let rows: Vec<ParabolicRow> = points
        .iter()
        .map(|p| ParabolicRow {
            alpha: p.alpha,
            tau: p.tau,
            sigma: p.sigma,
            ratio: p.ratio,
        })
        .collect();
    let dir = &cfg.out_dir;
    write_csv(dir, "parabolic.csv", &cfg.comment(), &rows)?;
    write_text(dir, "parabolic.gp", &output::lines_script("parabolic.csv", "ratio", &[4], "parabolic.png"))?;
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), p| (l.min(p.ratio), h.max(p.ratio)));
    let spread = hi / lo;
    let max_residual = points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = *cfg.cells.iter().max().unwrap_or(&16);
    let alpha = cfg.alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let mesh = uniform_partition(1.0, n)?;
    let inverse = parabolic::inverse_inequality(&mesh, alpha, cfg.samples, &mut rng)?;
    let small = ParabolicProblem::on_unit_interval(12, alpha, 1.0, parabolic::default_source())?;
    let combined = parabolic::combined_lower_bound(&small, 12, 2.0, cfg.samples, &mut rng)?;
    let u0 = nalgebra::DVector::from_fn(11, |i, _| ((i + 1) as f64).sin());
    let decay = parabolic::energy_decay_ratio(&small, u0, 24)?;
    write_json(
        dir,
        "parabolic.json",
        &ParabolicDiagnostics {
            max_residual,
            spread,
            inverse_inequality_constant: inverse.constant,
            combined_lower_bound: combined.exact,
            energy_decay_ratio: decay,
        },
    )?;
    Ok(vec![
        Check::new("ratio_spread_le_5", spread <= 5.0, format!("{spread:.3}")),
        Check::new("reformulation_residual_le_1e-10", max_residual <= 1e-10, format!("{max_residual:.3e}")),
        Check::new("combined_test_function_coercive", combined.exact > 0.0, format!("{:.4}", combined.exact)),
        Check::new("energy_dissipation", decay <= 1.0, format!("{decay:.6}")),
    ])
}

fn boundary_layer(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let (points, fit) = experiments::boundary_layer(&cfg.alphas, cfg.beta, cfg.t)?;
    let dir = &cfg.out_dir;
    write_csv(dir, "boundary_layer.csv", &cfg.comment(), &points)?;
    write_text(
        dir,
        "boundary_layer.gp",
        &output::lines_script("boundary_layer.csv", "value", &[2, 3], "boundary_layer.png"),
    )?;
    write_json(dir, "boundary_layer_fit.json", &fit)?;
    Ok(vec![
        Check::new("log_fit_r2_gt_0.99", fit.r_squared > 0.99, format!("{:.6}", fit.r_squared)),
        Check::new("log_slope_positive", fit.b > 0.0, format!("a={:.4} b={:.4}", fit.a, fit.b)),
    ])
}
