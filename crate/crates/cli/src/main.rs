use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use slabfold::config::{parse_config, Experiment, RunConfig};
use slabfold::dualtools::{
    dual_of_config, interior_pair_count, separation_witness, touches, Point,
};
use slabfold::geometry::{induced_rect_graph, PlanarRect};
use slabfold::gridgen::{audit_catalog, build_catalog, RectCatalog, Window};
use slabfold::percolation::{
    crossing_predicate, estimate_crossing, fkg_check, label_clusters, phi_census, road_survival,
    sample_config, spanning_components, CrossingSpec, Direction,
};
use slabfold::planner::{validate_plan, ParamPlan};
use slabfold::render::{
    render_assembly, render_catalog, render_grid, render_window, RenderOptions,
};
use slabfold::report::{
    AuditSummary, CatalogStats, CensusSummary, CrossingRecord, FkgRecord, PlanEcho, Report,
    RoadRecord,
};
use slabfold::slicing::{assemble_phi, SlabAssembly};
use slabfold::tree::{build_overlap_tree, ray, RectTree};

#[derive(Parser)]
#[command(
    name = "slabfold",
    version,
    about = "Folded invariant percolation on the slab Z^2 x {0,1}"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the parameter plan.
    Plan(Common),
    /// Build catalog, tree and folded assembly, and audit them.
    Build(Common),
    /// Crossing, road-survival and FKG experiments.
    Simulate(Common),
    /// Cluster census of the folded process.
    Census(Common),
    /// Dual configuration and a separation witness on a planar box.
    Dual(Common),
    /// Write SVG figures.
    Render(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Viewport as WIDTHxHEIGHT.
    #[arg(long, value_parser = parse_viewport)]
    viewport: Option<[i64; 2]>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Require strictly increasing short sides across levels.
    #[arg(long)]
    strict: bool,
}

fn parse_viewport(s: &str) -> std::result::Result<[i64; 2], String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let w = w.trim().parse().map_err(|e| format!("width: {e}"))?;
    let h = h.trim().parse().map_err(|e| format!("height: {e}"))?;
    Ok([w, h])
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let text = fs::read_to_string(&self.config)
            .with_context(|| format!("reading {}", self.config.display()))?;
        let mut cfg = parse_config(&text)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(v) = self.viewport {
            cfg.viewport = v;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        cfg.strict |= self.strict;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `dir/stem.ext`, or `dir/stem-N.ext` for the first free `N`.
fn fresh_path(dir: &Path, stem: &str, ext: &str) -> PathBuf {
    let first = dir.join(format!("{stem}.{ext}"));
    if !first.exists() {
        return first;
    }
    (1..)
        .map(|k| dir.join(format!("{stem}-{k}.{ext}")))
        .find(|p| !p.exists())
        .unwrap()
}

struct Run {
    cfg: RunConfig,
    plan: ParamPlan,
    report: Report,
}

impl Run {
    fn new(cfg: RunConfig) -> Result<Self> {
        let plan = cfg.plan()?;
        let validation = validate_plan(&plan, cfg.strict)?;
        let report = Report::new(cfg.seed, PlanEcho::new(&plan, validation));
        fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
        Ok(Self { cfg, plan, report })
    }

    fn write(&self, stem: &str, ext: &str, body: &str) -> Result<PathBuf> {
        let path = fresh_path(&self.cfg.out, stem, ext);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn audit(&mut self, name: &str, violations: usize) {
        self.report.audits.push(AuditSummary {
            name: name.into(),
            pass: violations == 0,
            violations,
        });
        println!(
            "audit {name}: {}",
            if violations == 0 { "pass" } else { "FAIL" }
        );
    }

    fn build(&mut self) -> Result<(RectCatalog, RectTree, SlabAssembly)> {
        let catalog = build_catalog(&self.cfg.param_seed(), self.cfg.viewport_rect())?;
        self.audit("catalog", audit_catalog(&catalog).len());
        let tree = build_overlap_tree(&catalog)?;
        let assembly = assemble_phi(&catalog, &tree, &self.plan.m, self.cfg.seed)?;
        let overlap = assembly.audit();
        self.audit("overlap", overlap.violations.len());
        let mut stats = CatalogStats::new(&catalog, &tree);
        stats.slices = assembly.slice_count();
        stats.vertices = assembly.graph.vertex_count();
        stats.edges = assembly.graph.edge_count();
        stats.components = assembly.component_count;
        self.report.catalog = Some(stats);
        Ok((catalog, tree, assembly))
    }

    fn finish(self) -> Result<ExitCode> {
        let path = self.write("report", "json", &self.report.to_json())?;
        println!("report: {}", path.display());
        Ok(if self.report.all_audits_pass() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        })
    }
}

fn cmd_plan(run: Run) -> Result<ExitCode> {
    let v = &run.report.plan.validation;
    println!("n      = {:?}", run.plan.n);
    println!("lambda = {:?}", run.plan.lambda);
    println!("k      = {:?}", run.plan.k.k);
    println!("m      = {:?}", run.plan.m);
    println!("sum 1/L_i = {:.4}", v.inverse_frame_sum);
    println!("sum m^g L / n^g = {:.4}", v.target_series);
    for w in &v.warnings {
        println!("warning: {w}");
    }
    run.finish()
}

fn cmd_build(mut run: Run) -> Result<ExitCode> {
    let (catalog, _, assembly) = run.build()?;
    run.write("catalog", "txt", &catalog.records())?;
    run.write("assembly", "txt", &assembly.records())?;
    println!(
        "{} rects, {} slices, {} vertices, {} components",
        catalog.len(),
        assembly.slice_count(),
        assembly.graph.vertex_count(),
        assembly.component_count
    );
    run.finish()
}

fn desk_prefix(catalog: &RectCatalog, tree: &RectTree, len: usize) -> Option<Vec<usize>> {
    catalog
        .entries
        .iter()
        .filter(|e| e.j == 0 && !e.clipped)
        .find_map(|e| {
            ray(tree, catalog, e.id, len)
                .ok()
                .filter(|r| r.entries.len() == len)
        })
        .map(|r| r.entries)
}

fn cmd_simulate(mut run: Run) -> Result<ExitCode> {
    let (trials, seed) = (run.cfg.trials, run.cfg.seed);
    let ps = run.cfg.p.clone();
    let wants = |e| run.cfg.experiments.contains(&e);
    let (crossing, road, fkg) = (
        wants(Experiment::Crossing),
        wants(Experiment::Road),
        wants(Experiment::Fkg),
    );
    if crossing {
        for &p in &ps {
            for n in [8, 16, 32, 64] {
                let spec =
                    CrossingSpec::rect(PlanarRect::from_bounds(0, 2 * n, 0, n), Direction::H);
                let est = estimate_crossing(&spec, p, trials, seed);
                println!(
                    "crossing 2n x n n={n} p={p}: {:.4} +- {:.4}",
                    est.p_hat, est.sigma
                );
                run.report.crossing.push(CrossingRecord {
                    label: format!("rect {}x{n} horizontal", 2 * n),
                    p,
                    estimate: est,
                });
            }
        }
    }
    if road {
        let catalog = build_catalog(&run.cfg.param_seed(), run.cfg.viewport_rect())?;
        let tree = build_overlap_tree(&catalog)?;
        let len = 2 * run.cfg.frames.len();
        let prefix = desk_prefix(&catalog, &tree, len)
            .context("no unclipped ray of full length in the viewport")?;
        let members: Vec<_> = prefix
            .iter()
            .map(|&k| CrossingSpec::lengthwise(catalog.entries[k].rect))
            .collect();
        for &p in &ps {
            let survival = road_survival(&members, p, trials, seed);
            println!(
                "road p={p}: joint {:.4} +- {:.4}, product of marginals {:.4}",
                survival.joint.p_hat,
                survival.joint.sigma,
                survival.product_of_marginals()
            );
            let failures = survival.extraction_failures;
            run.report.road.push(RoadRecord {
                p,
                members: members.len(),
                product_of_marginals: survival.product_of_marginals(),
                survival,
            });
            run.audit(&format!("road extraction p={p}"), failures);
        }
    }
    if fkg {
        for (name, rect) in [
            ("1x1", PlanarRect::from_bounds(0, 1, 0, 1)),
            ("2x1", PlanarRect::from_bounds(0, 2, 0, 1)),
        ] {
            let g = induced_rect_graph(&rect, 0);
            let h = crossing_predicate(&CrossingSpec::rect(rect, Direction::H), &g);
            let v = crossing_predicate(&CrossingSpec::rect(rect, Direction::V), &g);
            let mut fails = 0;
            for &p in &ps {
                for (label, a, b) in [("H,H", &h, &h), ("H,V", &h, &v), ("V,V", &v, &v)] {
                    let result = fkg_check(&g, a, b, p)?;
                    fails += usize::from(!result.pass);
                    run.report.fkg.push(FkgRecord {
                        label: format!("{name} {label}"),
                        p,
                        result,
                    });
                }
            }
            run.audit(&format!("fkg {name}"), fails);
        }
    }
    run.finish()
}

fn cmd_census(mut run: Run) -> Result<ExitCode> {
    let (catalog, _, assembly) = run.build()?;
    let span = match run.cfg.span_rect() {
        Some(r) => r,
        None => catalog
            .default_span_box()
            .context("no unclipped top-level window for the default span box")?,
    };
    let full = spanning_components(&assembly, &span);
    let result = phi_census(
        &assembly,
        run.cfg.census_p,
        run.cfg.trials,
        run.cfg.seed,
        &span,
    );
    let mut lines = String::from("# trial statistic value\n");
    for (t, c) in result.counts.iter().enumerate() {
        lines.push_str(&format!("{t} spanning_components {c}\n"));
    }
    run.write("census", "txt", &lines)?;
    let summary = CensusSummary::new(&result, full);
    println!(
        "census p={}: median {} mean {:.3} min {} (all open: {full})",
        summary.p, summary.median, summary.mean, summary.min
    );
    run.report.census = Some(summary);
    run.finish()
}

fn cmd_dual(mut run: Run) -> Result<ExitCode> {
    let side = run.cfg.viewport[0].min(run.cfg.viewport[1]).min(256);
    let vp = PlanarRect::from_bounds(0, side - 1, 0, side - 1);
    let g = induced_rect_graph(&vp, 0);
    let p = run.cfg.p.first().copied().unwrap_or(0.5);
    let cfg = sample_config(&g, p, run.cfg.seed);
    let dual = dual_of_config(&cfg)?;
    let interior_open = g
        .edges()
        .iter()
        .zip(&cfg.open)
        .filter(|((a, b), &o)| {
            o && if a.y == b.y {
                a.y > vp.v.lo && a.y < vp.v.hi
            } else {
                a.x > vp.h.lo && a.x < vp.h.hi
            }
        })
        .count();
    let balance = interior_open + dual.open_count() == interior_pair_count(&vp);
    run.audit("dual edge conservation", usize::from(!balance));

    let lab = label_clusters(&cfg);
    let vs = g.vertices();
    let mut big: Vec<(usize, u32)> = lab
        .sizes
        .iter()
        .enumerate()
        .map(|(l, &s)| (s, l as u32))
        .collect();
    big.sort_unstable_by(|a, b| b.cmp(a));
    if big.len() >= 2 {
        let pts = |l: u32| -> Vec<Point> {
            vs.iter()
                .zip(&lab.label)
                .filter(|(_, &c)| c == l)
                .map(|(v, _)| v.planar())
                .collect()
        };
        let (c1, c2) = (pts(big[0].1), pts(big[1].1));
        match separation_witness(&c1, &c2, &cfg)? {
            Some(w) => {
                let valid = w.edges.iter().all(|&f| dual.is_open(f) == Some(true))
                    && touches(&w.vertices(), &c1);
                run.audit("witness validity", usize::from(!valid));
                println!(
                    "witness: {} dual edges in {} pieces",
                    w.edges.len(),
                    w.pieces
                );
                run.write("witness", "txt", &w.records())?;
            }
            None => println!("witness: interface lies on the box border"),
        }
    }
    run.finish()
}

fn cmd_render(mut run: Run) -> Result<ExitCode> {
    let opts = RenderOptions::default();
    let (catalog, _, assembly) = run.build()?;
    let area = PlanarRect::from_bounds(0, 29, 0, 29);
    run.write(
        "grid",
        "svg",
        &render_grid(
            &catalog.grids[0],
            &area,
            RenderOptions {
                scale: 10.0,
                ..opts
            },
        ),
    )?;
    let w1 = Window::at(1, 0, 0, &catalog.params);
    run.write(
        "window",
        "svg",
        &render_window(
            &w1,
            &catalog.params,
            RenderOptions {
                scale: 20.0,
                ..opts
            },
        ),
    )?;
    run.write("catalog", "svg", &render_catalog(&catalog, opts))?;
    run.write(
        "assembly",
        "svg",
        &render_assembly(&assembly, &catalog.viewport, opts),
    )?;
    run.finish()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        let (common, f): (&Common, fn(Run) -> Result<ExitCode>) = match &cli.command {
            Command::Plan(c) => (c, cmd_plan),
            Command::Build(c) => (c, cmd_build),
            Command::Simulate(c) => (c, cmd_simulate),
            Command::Census(c) => (c, cmd_census),
            Command::Dual(c) => (c, cmd_dual),
            Command::Render(c) => (c, cmd_render),
        };
        let cfg = common.load()?;
        if cfg.trials == 0 {
            bail!("trials must be positive");
        }
        f(Run::new(cfg)?)
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
