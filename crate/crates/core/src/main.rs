//! Command-line front end: generate graph families, solve Tutte embeddings,
//! run discrete and continuum solvers, check regularity properties, render
//! SVG pictures, and drive convergence experiments from JSON plans.

use std::error::Error;
use std::fs;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use tma::continuum::{self, ConvexPotential, SampledPotential};
use tma::embedding::{t_surface, EmbeddedGraph, HarmonicEmbedding};
use tma::expr;
use tma::geom::{cx, Region};
use tma::harmonic::{self, DomainSlice};
use tma::harness::{
    generate_family, run_dirichlet_convergence, run_gradient_convergence,
    run_green_convergence, run_regularity_crosscheck, ExperimentPlan, FamilySpec,
};
use tma::planar::{graph_from_json, graph_to_json, PlanarMap};
use tma::regularity;
use tma::render;
use tma::walk::{StopRule, WalkEngine, Welford};
use tma::Cx;

type CliResult = Result<(), Box<dyn Error>>;

#[derive(Parser)]
#[command(
    name = "tma",
    version,
    about = "Harmonic embeddings of weighted planar graphs: solvers, t-surfaces, \
             regularity checks, random walks and convergence experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a graph family instance and write it as graph JSON.
    Gen {
        /// square | isoradial[:a1,a2,..] | perturbed:lo,hi | hull
        #[arg(long)]
        family: String,
        /// quad | aniso:a,b | expshear:eps | file:phi.json (hull family)
        #[arg(long, default_value = "quad")]
        potential: String,
        #[arg(long)]
        delta: f64,
        /// disc:cx,cy,r | square:a,b | rect:x0,y0,x1,y1
        #[arg(long)]
        region: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: String,
    },
    /// Solve the Tutte embedding of a graph and write an embedding file.
    Embed {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        out: String,
    },
    /// Render an embedding file as SVG.
    Render {
        #[arg(long)]
        emb: String,
        #[arg(long, value_enum, default_value_t = RenderWhat::Embedding)]
        what: RenderWhat,
        #[arg(long)]
        svg: String,
    },
    /// Check a regularity property of an embedded graph.
    Check {
        /// conv | lip | lipkd | rw | expfat
        #[arg(long, value_enum)]
        property: Property,
        #[arg(long)]
        emb: String,
        #[arg(long)]
        delta: f64,
        /// Scan-ball constant (segments of length up to C*delta).
        #[arg(long, default_value_t = 4.0)]
        scan_c: f64,
        /// Region to scan; defaults to the embedding's bounding box.
        #[arg(long)]
        region: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        walk_budget: u64,
        /// Secondary scale for the fat-faces check; defaults to 2*delta.
        #[arg(long)]
        delta_prime: Option<f64>,
        #[arg(long)]
        out: String,
    },
    /// Solve the discrete Dirichlet problem on a region slice.
    Dirichlet {
        #[arg(long)]
        emb: String,
        #[arg(long)]
        omega: String,
        /// Boundary data, e.g. "re(w^2)" or "2*x^2 - y^2".
        #[arg(long)]
        g: String,
        #[arg(long)]
        out: String,
    },
    /// Discrete Green's function of a region slice with a given pole vertex.
    Green {
        #[arg(long)]
        emb: String,
        /// Defaults to the whole graph.
        #[arg(long)]
        omega: Option<String>,
        #[arg(long)]
        pole: usize,
        #[arg(long)]
        out: String,
    },
    /// Simulate random walks until they exit a region; report exit statistics.
    Walk {
        #[arg(long)]
        emb: String,
        #[arg(long)]
        start: usize,
        /// Absorbing rule: the walk stops on leaving this region.
        #[arg(long)]
        stop: String,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: String,
    },
    /// Solve the continuum linearized problem by finite elements.
    Pde {
        #[arg(long, default_value = "quad")]
        potential: String,
        #[arg(long)]
        omega: String,
        #[arg(long)]
        g: String,
        /// Mesh scale.
        #[arg(long)]
        h: f64,
        #[arg(long)]
        out: String,
    },
    /// Check whether a potential has constant Hessian determinant.
    Macheck {
        #[arg(long)]
        potential: String,
        #[arg(long)]
        region: String,
        #[arg(long, default_value_t = 1e-8)]
        rtol: f64,
        /// Also compute the weak residual of the gradient field at this
        /// mesh scale.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Run a convergence experiment from a JSON plan; write a CSV report.
    Converge {
        #[arg(long, value_enum)]
        mode: ConvergeMode,
        #[arg(long)]
        plan: String,
        #[arg(long)]
        out: String,
    },
    /// Cross-check potential-side and walk-side regularity verdicts.
    Crosscheck {
        #[arg(long)]
        plan: String,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderWhat {
    Embedding,
    Dual,
    Tembedding,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Conv,
    Lip,
    Lipkd,
    Rw,
    Expfat,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvergeMode {
    Dirichlet,
    Green,
    Gradient,
}

/// On-disk embedding: the graph plus primal/dual positions and potential,
/// so downstream commands can reload without re-solving.
#[derive(Serialize, Deserialize)]
struct EmbFile {
    graph: serde_json::Value,
    #[serde(rename = "H")]
    h: Vec<[f64; 2]>,
    #[serde(rename = "Hstar")]
    hstar: Vec<[f64; 2]>,
    #[serde(rename = "Phi")]
    phi: Vec<f64>,
    residual: f64,
}

fn write_emb(path: &str, g: &EmbeddedGraph) -> CliResult {
    let boundary_pos: Vec<Option<Cx>> = (0..g.map.n_vertices)
        .map(|v| g.map.boundary[v].then(|| g.emb.pos[v]))
        .collect();
    let file = EmbFile {
        graph: serde_json::from_str(&graph_to_json(&g.map, &boundary_pos))?,
        h: g.emb.pos.iter().map(|p| [p.re, p.im]).collect(),
        hstar: g.dual_emb.pos.iter().map(|p| [p.re, p.im]).collect(),
        phi: g.pot.phi.clone(),
        residual: g.emb.residual,
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

fn read_emb(path: &str) -> Result<EmbeddedGraph, Box<dyn Error>> {
    let file: EmbFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let (map, _) = graph_from_json(&file.graph.to_string())?;
    let pos: Vec<Cx> = file.h.iter().map(|&[x, y]| cx(x, y)).collect();
    let emb = HarmonicEmbedding::from_positions(Arc::new(map), pos)?;
    Ok(EmbeddedGraph::from_embedding(emb)?)
}

fn parse_region(s: &str) -> Result<Region, Box<dyn Error>> {
    Region::parse(s).map_err(|e| e.into())
}

/// `quad`, `aniso:a,b`, `expshear:eps`, or `file:grid.json` with a sampled
/// potential.
fn parse_potential(s: &str) -> Result<ConvexPotential, Box<dyn Error>> {
    if let Some(path) = s.strip_prefix("file:") {
        let grid: SampledPotential = serde_json::from_str(&fs::read_to_string(path)?)?;
        return Ok(ConvexPotential::Sampled(grid));
    }
    Ok(ConvexPotential::parse(s)?)
}

fn parse_family(s: &str) -> Result<FamilySpec, Box<dyn Error>> {
    let (kind, rest) = match s.split_once(':') {
        Some((k, r)) => (k, Some(r)),
        None => (s, None),
    };
    let nums = |r: Option<&str>| -> Result<Vec<f64>, Box<dyn Error>> {
        r.unwrap_or("")
            .split(',')
            .filter(|t| !t.is_empty())
            .map(|t| t.trim().parse::<f64>().map_err(|e| e.into()))
            .collect()
    };
    match kind {
        "square" => Ok(FamilySpec::Square),
        "isoradial" => {
            let mut angles = nums(rest)?;
            if angles.is_empty() {
                angles = vec![std::f64::consts::FRAC_PI_2];
            }
            Ok(FamilySpec::Isoradial { angles, theta_min: 0.3 })
        }
        "perturbed" => {
            let v = nums(rest)?;
            if v.len() != 2 {
                return Err("perturbed family needs `perturbed:lo,hi`".into());
            }
            Ok(FamilySpec::Perturbed { lo: v[0], hi: v[1] })
        }
        "hull" => Ok(FamilySpec::Hull),
        other => Err(format!("unknown family `{other}`").into()),
    }
}

fn load_plan(path: &str) -> Result<ExperimentPlan, Box<dyn Error>> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn boundary_positions(map: &PlanarMap, emb_pos: &[Cx]) -> Vec<Option<Cx>> {
    (0..map.n_vertices)
        .map(|v| map.boundary[v].then(|| emb_pos[v]))
        .collect()
}

fn bbox_region(g: &EmbeddedGraph) -> Region {
    let (mut x0, mut y0, mut x1, mut y1) =
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &g.emb.pos {
        x0 = x0.min(p.re);
        y0 = y0.min(p.im);
        x1 = x1.max(p.re);
        y1 = y1.max(p.im);
    }
    Region::Rect { x0, y0, x1, y1 }
}

/// Field written by `dirichlet` / `green`: values for every graph vertex,
/// with the slice membership spelled out.
fn field_json(g: &EmbeddedGraph, slice: &DomainSlice, values: &[f64]) -> serde_json::Value {
    json!({
        "values": values,
        "interior": slice.interior,
        "boundary": slice.boundary,
        "positions": g.emb.pos.iter().map(|p| [p.re, p.im]).collect::<Vec<_>>(),
    })
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.cmd {
        Cmd::Gen { family, potential, delta, region, seed, out } => {
            let fam = parse_family(&family)?;
            let pot = parse_potential(&potential)?;
            let region = parse_region(&region)?;
            let g = generate_family(&fam, &pot, delta, &region, seed)?;
            let bp = boundary_positions(&g.map, &g.emb.pos);
            fs::write(&out, graph_to_json(&g.map, &bp))?;
            println!(
                "generated {} vertices, {} edges -> {out}",
                g.map.n_vertices,
                g.map.n_edges()
            );
        }
        Cmd::Embed { graph, out } => {
            let (map, bp) = graph_from_json(&fs::read_to_string(&graph)?)?;
            let g = EmbeddedGraph::solve(Arc::new(map), &bp)?;
            write_emb(&out, &g)?;
            println!(
                "embedded {} vertices, max relative residual {:.3e} -> {out}",
                g.map.n_vertices, g.emb.residual
            );
        }
        Cmd::Render { emb, what, svg } => {
            let g = read_emb(&emb)?;
            let content = match what {
                RenderWhat::Embedding => render::render_embedding(&g),
                RenderWhat::Dual => render::render_dual(&g),
                RenderWhat::Tembedding => {
                    let cg = g.corner_graph();
                    let ts = t_surface(&g.emb, &g.dual_emb, &cg);
                    render::render_tembedding(&cg, &ts)
                }
            };
            fs::write(&svg, content)?;
            println!("wrote {svg}");
        }
        Cmd::Check {
            property,
            emb,
            delta,
            scan_c,
            region,
            seed,
            walk_budget,
            delta_prime,
            out,
        } => {
            let g = read_emb(&emb)?;
            let region = match region {
                Some(s) => parse_region(&s)?,
                None => bbox_region(&g),
            };
            let report = match property {
                Property::Conv => regularity::check_conv(&g, delta, scan_c, 64)?,
                Property::Lip => regularity::check_lip(&g, delta, scan_c, 64)?,
                Property::Lipkd => {
                    let cg = g.corner_graph();
                    let ts = t_surface(&g.emb, &g.dual_emb, &cg);
                    regularity::check_lip_kdelta(&cg, &ts, delta, Some(&region), 400)?
                }
                Property::Rw => regularity::check_rw_property(
                    &g,
                    &region,
                    delta,
                    scan_c,
                    walk_budget,
                    seed,
                )?,
                Property::Expfat => regularity::exp_fat_check(
                    &g,
                    &region,
                    delta,
                    delta_prime.unwrap_or(2.0 * delta),
                )?,
            };
            fs::write(&out, serde_json::to_string_pretty(&report)?)?;
            println!(
                "{}: constant {:.6e}, pass {:?} -> {out}",
                report.property, report.constant, report.pass
            );
        }
        Cmd::Dirichlet { emb, omega, g, out } => {
            let graph = read_emb(&emb)?;
            let omega = parse_region(&omega)?;
            let expr = expr::parse(&g)?;
            let slice = harmonic::slice_domain(&graph.emb, &omega)?;
            let data: Vec<f64> =
                graph.emb.pos.iter().map(|&p| expr.eval(p)).collect();
            let field = harmonic::solve_dirichlet(&graph.emb, &slice, &data)?;
            fs::write(
                &out,
                serde_json::to_string_pretty(&field_json(&graph, &slice, &field.values))?,
            )?;
            println!("solved {} interior vertices -> {out}", slice.interior.len());
        }
        Cmd::Green { emb, omega, pole, out } => {
            let graph = read_emb(&emb)?;
            let slice = match omega {
                Some(s) => harmonic::slice_domain(&graph.emb, &parse_region(&s)?)?,
                None => DomainSlice::full(&graph.map),
            };
            let field = harmonic::green(&graph.emb, &slice, pole)?;
            fs::write(
                &out,
                serde_json::to_string_pretty(&field_json(&graph, &slice, &field.values))?,
            )?;
            println!(
                "Green's function with pole {pole}: G(pole) = {:.6e} -> {out}",
                field.values[pole]
            );
        }
        Cmd::Walk { emb, start, stop, n, seed, out } => {
            let graph = read_emb(&emb)?;
            let rule = StopRule::ExitRegion(parse_region(&stop)?);
            let engine = WalkEngine::new(&graph.emb, seed);
            let (mut time, mut ex, mut ey) =
                (Welford::default(), Welford::default(), Welford::default());
            for idx in 0..n {
                let traj = engine.simulate(start, &rule, idx)?;
                time.push(traj.total_time());
                let p = graph.emb.pos[traj.last_vertex()];
                ex.push(p.re);
                ey.push(p.im);
            }
            let report = json!({
                "n": n,
                "seed": seed,
                "mean_exit_time": time.mean_result(seed),
                "mean_exit_x": ex.mean_result(seed),
                "mean_exit_y": ey.mean_result(seed),
            });
            fs::write(&out, serde_json::to_string_pretty(&report)?)?;
            println!(
                "{n} walks from {start}: mean exit time {:.6e} -> {out}",
                time.mean_result(seed).estimate
            );
        }
        Cmd::Pde { potential, omega, g, h, out } => {
            let pot = parse_potential(&potential)?;
            let omega = parse_region(&omega)?;
            let expr = expr::parse(&g)?;
            let field =
                continuum::solve_lphi_dirichlet(&pot, &omega, |w| expr.eval(w), h)?;
            let report = json!({
                "h": h,
                "nodes": field.mesh.nodes.iter().map(|p| [p.re, p.im]).collect::<Vec<_>>(),
                "boundary": field.mesh.is_boundary,
                "values": field.values,
                "weak_residual": field.weak_residual,
            });
            fs::write(&out, serde_json::to_string_pretty(&report)?)?;
            println!("solved {} nodes at h = {h} -> {out}", field.mesh.n_nodes());
        }
        Cmd::Macheck { potential, region, rtol, h } => {
            let pot = parse_potential(&potential)?;
            let region = parse_region(&region)?;
            let flat = continuum::ma_flatness(&pot, &region, rtol);
            let mut report = serde_json::to_value(&flat)?;
            if let Some(h) = h {
                let psi = continuum::lphi_psi_residual(&pot, &region, h)?;
                report["psi_residual"] = serde_json::to_value(&psi)?;
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Cmd::Converge { mode, plan, out } => {
            let plan = load_plan(&plan)?;
            let report = match mode {
                ConvergeMode::Dirichlet => run_dirichlet_convergence(&plan)?,
                ConvergeMode::Green => run_green_convergence(&plan)?,
                ConvergeMode::Gradient => run_gradient_convergence(&plan)?,
            };
            fs::write(&out, report.to_csv())?;
            println!(
                "fitted rate {:.3}, pass {} -> {out}",
                report.fitted_rate, report.pass
            );
        }
        Cmd::Crosscheck { plan, out } => {
            let plan = load_plan(&plan)?;
            let report = run_regularity_crosscheck(&plan)?;
            let table = report.to_table();
            if let Some(out) = out {
                fs::write(&out, &table)?;
            }
            print!("{table}");
            println!(
                "consistent: {}, constant bounds: {}",
                report.all_consistent, report.all_bounds_ok
            );
        }
    }
    Ok(())
}
