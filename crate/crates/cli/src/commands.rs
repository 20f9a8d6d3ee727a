//! One function per subcommand. Each writes its artifacts into the output
//! directory and returns the process exit code.

use crate::config::{GenerateKind, RunConfig};
use crate::manifest::write_manifest;
use anyhow::{bail, Context, Result};
use confdiam_core::doubling::{build_double, convergence_study, make_teardrop};
use confdiam_core::gates::{hoffman_spruck_check, main_inequality_report, ReportOptions, Verdict};
use confdiam_core::geodesy::GraphOptions;
use confdiam_core::io::{read_mesh, write_off, CurveComponent, CurveSet};
use confdiam_core::plateau::{minimize_area, screen_boundary, spanning_mesh, SolveError, SolverOptions};
use confdiam_core::{generate, surface, ConformalAmbient, ImmersedMesh, Vec3};
use serde::Serialize;
use std::path::Path;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_VIOLATED: u8 = 2;

/// Samples of the teardrop profile.
const TEARDROP_SAMPLES: usize = 256;

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub struct Run<'a> {
    pub cfg: &'a RunConfig,
    pub json: bool,
}

impl Run<'_> {
    fn out(&self) -> &Path {
        &self.cfg.out
    }

    fn ambient(&self) -> Result<ConformalAmbient> {
        Ok(ConformalAmbient::from_cli_name(&self.cfg.ambient)?)
    }

    fn mesh(&self) -> Result<ImmersedMesh> {
        let path = self.cfg.mesh.as_ref().expect("validated");
        read_mesh(path).with_context(|| format!("reading mesh {}", path.display()))
    }

    fn curves(&self) -> Result<CurveSet> {
        let path = self.cfg.boundary.as_ref().expect("validated");
        CurveSet::read(path).with_context(|| format!("reading curves {}", path.display()))
    }

    fn report_options(&self) -> ReportOptions {
        ReportOptions {
            strict: self.cfg.strict,
            graph: GraphOptions { quadrature_order: self.cfg.quadrature, steiner_per_edge: self.cfg.steiner },
        }
    }

    fn emit<T: Serialize>(&self, value: &T, summary: String) -> Result<()> {
        if self.json {
            println!("{}", serde_json::to_string_pretty(value)?);
        } else {
            println!("{summary}");
        }
        Ok(())
    }

    fn finish(&self, outputs: &[String]) -> Result<()> {
        write_manifest(self.cfg, self.out(), outputs)
    }
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    ambient: &'a str,
    vertices: usize,
    faces: usize,
    report: confdiam_core::gates::GateReport,
}

pub fn check(ctx: &Run) -> Result<u8> {
    let a = ctx.ambient()?;
    let mesh = ctx.mesh()?;
    let report = main_inequality_report(&mesh, &a, ctx.cfg.alpha, &ctx.report_options())?;
    let code = if report.verdict == Verdict::Violated { EXIT_VIOLATED } else { EXIT_OK };
    let summary = format!(
        "verdict {:?}  margin {}  diameter {}  rhs {}",
        report.verdict,
        fmt_opt(report.margin),
        fmt_opt(report.diameter),
        fmt_opt(report.rhs)
    );
    let out =
        CheckOutput { ambient: &ctx.cfg.ambient, vertices: mesh.vertex_count(), faces: mesh.face_count(), report };
    write_json(&ctx.out().join("report.json"), &out)?;
    ctx.finish(&["report.json".into()])?;
    ctx.emit(&out, summary)?;
    Ok(code)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{v:.6e}"))
}

#[derive(Serialize)]
struct ConvergenceCsvRow {
    eps: f64,
    tube_integral: f64,
    tube_area: f64,
    limit: f64,
    error: f64,
    error_ratio: Option<f64>,
    d_sigma: f64,
    d_m_eps: f64,
    monotone: bool,
    wu_zheng_verdict: Verdict,
    doubled_bound: Option<f64>,
    doubled_bound_ok: Option<bool>,
}

pub fn double(ctx: &Run) -> Result<u8> {
    let a = ctx.ambient()?;
    let mesh = ctx.mesh()?;
    let drop = make_teardrop(ctx.cfg.eta, TEARDROP_SAMPLES)?;
    let study = convergence_study(&mesh, &a, &drop, &ctx.cfg.eps, ctx.cfg.s_res, &ctx.report_options())?;
    let mut outputs = vec!["convergence.csv".to_string(), "convergence.json".to_string()];
    for (i, &eps) in ctx.cfg.eps.iter().enumerate() {
        let doubled = build_double(&mesh, &a, eps, &drop, ctx.cfg.s_res)?;
        let name = format!("double_{i}.off");
        write_off(&doubled.mesh, &ctx.out().join(&name))?;
        outputs.push(name);
    }
    let rows: Vec<ConvergenceCsvRow> = study
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| ConvergenceCsvRow {
            eps: r.eps,
            tube_integral: r.tube_integral,
            tube_area: r.tube_area,
            limit: r.limit,
            error: r.error,
            error_ratio: (i > 0).then(|| study.rows[i - 1].error / r.error),
            d_sigma: r.d_sigma,
            d_m_eps: r.d_m_eps,
            monotone: r.monotone,
            wu_zheng_verdict: r.wu_zheng.verdict,
            doubled_bound: r.doubled_bound,
            doubled_bound_ok: r.doubled_bound_ok,
        })
        .collect();
    write_csv(&ctx.out().join("convergence.csv"), &rows)?;
    write_json(&ctx.out().join("convergence.json"), &study)?;
    ctx.finish(&outputs)?;
    let violated =
        study.rows.iter().any(|r| r.wu_zheng.verdict == Verdict::Violated || r.doubled_bound_ok == Some(false));
    let summary = rows
        .iter()
        .map(|r| {
            format!(
                "eps {:.4}  tube {:.6}  limit {:.6}  error {:.3e}  d(Σ) {:.6}  d(M) {:.6}  monotone {}",
                r.eps, r.tube_integral, r.limit, r.error, r.d_sigma, r.d_m_eps, r.monotone
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    ctx.emit(&study, summary)?;
    Ok(if violated { EXIT_VIOLATED } else { EXIT_OK })
}

#[derive(Serialize)]
struct HistoryRow {
    iteration: usize,
    area: f64,
    grad_norm: f64,
    step: f64,
}

#[derive(Serialize)]
struct SolveSummary {
    status: &'static str,
    iterations: usize,
    initial_area: f64,
    final_area: f64,
    total_mean_curvature: f64,
    min_face_quality: f64,
    vertices: usize,
    faces: usize,
}

pub fn solve(ctx: &Run) -> Result<u8> {
    let a = ctx.ambient()?;
    let curves = ctx.curves()?;
    let initial = spanning_mesh(&curves.polylines(), ctx.cfg.layers)?;
    let opts = SolverOptions { max_iters: ctx.cfg.max_iters, ..Default::default() };
    let (status, outcome, code) = match minimize_area(&initial, &a, &opts) {
        Ok(o) => (if o.converged { "converged" } else { "max-iterations" }, o, EXIT_OK),
        Err(SolveError::NeckCollapse(o)) => ("neck-collapse", *o, EXIT_OK),
        Err(SolveError::Stalled(o)) => ("stalled", *o, EXIT_INPUT),
        Err(SolveError::Input(e)) => return Err(e.into()),
    };
    let rows: Vec<HistoryRow> = outcome
        .history
        .iter()
        .enumerate()
        .map(|(iteration, h)| HistoryRow { iteration, area: h.area, grad_norm: h.grad_norm, step: h.step })
        .collect();
    write_off(&outcome.mesh, &ctx.out().join("solution.off"))?;
    write_csv(&ctx.out().join("history.csv"), &rows)?;
    let summary = SolveSummary {
        status,
        iterations: outcome.iterations(),
        initial_area: outcome.history[0].area,
        final_area: outcome.final_area(),
        total_mean_curvature: surface::total_mean_curvature(&outcome.mesh, &a)?,
        min_face_quality: outcome.mesh.min_face_quality(),
        vertices: outcome.mesh.vertex_count(),
        faces: outcome.mesh.face_count(),
    };
    write_json(&ctx.out().join("solve.json"), &summary)?;
    ctx.finish(&["solution.off".into(), "history.csv".into(), "solve.json".into()])?;
    let text = format!(
        "status {}  iterations {}  area {:.8}  ∫|H| {:.3e}",
        summary.status, summary.iterations, summary.final_area, summary.total_mean_curvature
    );
    ctx.emit(&summary, text)?;
    if code != EXIT_OK {
        eprintln!("error: solver stalled with no admissible step");
    }
    Ok(code)
}

#[derive(Serialize)]
struct ScreenOutput {
    names: Vec<String>,
    #[serde(flatten)]
    verdict: confdiam_core::plateau::ScreenVerdict,
}

pub fn screen(ctx: &Run) -> Result<u8> {
    let a = ctx.ambient()?;
    let curves = ctx.curves()?;
    let verdict = screen_boundary(&curves.polylines(), &a, ctx.cfg.alpha, ctx.cfg.area_budget, ctx.cfg.strict)?;
    let out = ScreenOutput { names: curves.components.iter().map(|c| c.name.clone()).collect(), verdict };
    write_json(&ctx.out().join("verdict.json"), &out)?;
    ctx.finish(&["verdict.json".into()])?;
    let summary = format!(
        "verdict {:?}  separation {:.6e}  bound {:.6e}",
        out.verdict.verdict, out.verdict.separation, out.verdict.bound
    );
    ctx.emit(&out, summary)?;
    Ok(EXIT_OK)
}

/// Vertex values of a test function from a descriptor: `hat:center`,
/// `bump:center`, or `hat:x,y,z,r` (a hat of radius `r` around a point).
/// Boundary values are zero.
pub fn test_function(mesh: &ImmersedMesh, descriptor: &str) -> Result<Vec<f64>> {
    let (shape, place) = descriptor.split_once(':').context("function descriptor must look like 'hat:center'")?;
    let profile: fn(f64) -> f64 = match shape {
        "hat" => |t| (1.0 - t).max(0.0),
        "bump" => |t| (1.0 - t * t).max(0.0).powi(2),
        other => bail!("unknown function shape '{other}'"),
    };
    let (center, radius) = if place == "center" {
        let centroid = mesh.positions().iter().fold(Vec3::zeros(), |s, p| s + p) / mesh.vertex_count() as f64;
        let c = mesh
            .interior_vertices()
            .min_by(|&u, &v| {
                let du = (mesh.position(u) - centroid).norm();
                let dv = (mesh.position(v) - centroid).norm();
                du.total_cmp(&dv).then(u.cmp(&v))
            })
            .context("mesh has no interior vertex")?;
        let c = *mesh.position(c);
        let r = mesh
            .boundary_loops()
            .iter()
            .flatten()
            .map(|&v| (mesh.position(v) - c).norm())
            .fold(f64::INFINITY, f64::min);
        (c, r)
    } else {
        let nums = place
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .context("expected 'x,y,z,r'")?;
        let [x, y, z, r] = nums[..] else { bail!("expected four numbers 'x,y,z,r'") };
        (Vec3::new(x, y, z), r)
    };
    if !(radius > 0.0 && radius.is_finite()) {
        bail!("function support radius must be positive");
    }
    Ok((0..mesh.vertex_count())
        .map(|v| if mesh.is_boundary_vertex(v) { 0.0 } else { profile((mesh.position(v) - center).norm() / radius) })
        .collect())
}

pub fn sobolev(ctx: &Run) -> Result<u8> {
    let a = ctx.ambient()?;
    let mesh = ctx.mesh()?;
    let f = test_function(&mesh, &ctx.cfg.f)?;
    let check = hoffman_spruck_check(&mesh, &a, &f, ctx.cfg.alpha, ctx.cfg.strict)?;
    write_json(&ctx.out().join("sobolev.json"), &check)?;
    ctx.finish(&["sobolev.json".into()])?;
    ctx.emit(&check, format!("lhs {:.10e}  rhs {:.10e}", check.lhs, check.rhs))?;
    Ok(if check.lhs > check.rhs { EXIT_VIOLATED } else { EXIT_OK })
}

pub fn generate(ctx: &Run) -> Result<u8> {
    let c = ctx.cfg;
    let kind = c.kind.expect("validated");
    let jittered = |m: ImmersedMesh| {
        if c.jitter > 0.0 {
            generate::jitter_interior(&m, c.jitter, c.seed)
        } else {
            m
        }
    };
    let name = match kind {
        GenerateKind::CatenoidBoundary | GenerateKind::CirclePair => {
            let (c0, c1) = if kind == GenerateKind::CatenoidBoundary {
                let half = Vec3::new(0.0, 0.0, 0.5 * c.height);
                (generate::circle(-half, c.radius, c.points), generate::circle(half, c.radius, c.points))
            } else {
                let half = Vec3::new(0.5 * c.sep, 0.0, 0.0);
                (generate::circle(-half, c.radius, c.points), generate::circle(half, c.radius, c.points))
            };
            let set = CurveSet { components: vec![CurveComponent::new("a", &c0), CurveComponent::new("b", &c1)] };
            let mut text = set.to_json();
            text.push('\n');
            std::fs::write(ctx.out().join("curves.json"), text)?;
            "curves.json".to_string()
        }
        _ => {
            let mesh = match kind {
                GenerateKind::Disk => generate::disk(c.radius, c.rings),
                GenerateKind::Annulus => generate::annulus(c.inner, c.radius, c.rings),
                GenerateKind::SphericalCap => generate::spherical_cap(c.radius, c.angle, c.rings),
                GenerateKind::Icosphere => generate::icosphere(c.subdiv),
                _ => unreachable!("curve kinds handled above"),
            };
            let mesh = jittered(mesh);
            let file = format!("{}.off", kind_name(kind));
            write_off(&mesh, &ctx.out().join(&file))?;
            file
        }
    };
    ctx.finish(std::slice::from_ref(&name))?;
    if !ctx.json {
        println!("wrote {}", ctx.out().join(&name).display());
    }
    Ok(EXIT_OK)
}

fn kind_name(kind: GenerateKind) -> &'static str {
    match kind {
        GenerateKind::Disk => "disk",
        GenerateKind::Annulus => "annulus",
        GenerateKind::SphericalCap => "spherical-cap",
        GenerateKind::Icosphere => "icosphere",
        GenerateKind::CatenoidBoundary => "catenoid-boundary",
        GenerateKind::CirclePair => "circle-pair",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hat_center_vanishes_on_boundary() {
        let disk = generate::disk(1.0, 6);
        let f = test_function(&disk, "hat:center").unwrap();
        assert!(disk.boundary_loops()[0].iter().all(|&v| f[v] == 0.0));
        assert!((f.iter().cloned().fold(0.0, f64::max) - 1.0).abs() < 1e-12);
        assert!(f.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn explicit_hat_and_bad_descriptors() {
        let disk = generate::disk(1.0, 6);
        let f = test_function(&disk, "bump:0,0,0,0.5").unwrap();
        assert!(f.iter().any(|&x| x > 0.9));
        assert!(test_function(&disk, "hat").is_err());
        assert!(test_function(&disk, "wave:center").is_err());
        assert!(test_function(&disk, "hat:1,2").is_err());
        assert!(test_function(&disk, "hat:0,0,0,-1").is_err());
    }
}
