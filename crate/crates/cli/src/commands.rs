use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use regpan::graph::io::{read_bigraph, read_graph, write_bigraph, write_graph};
use regpan::graph::{bipartize, brute_min_max_deviation, split_sides, BRUTE_FORCE_LIMIT};
use regpan::panning::{
    check_regularity, communities_text, is_regular, pan_all, pan_once, rounds_csv, stages_csv,
};
use regpan::qsim::{quantum_exists_regularity, ExistenceOptions, ExistenceReport};
use regpan::sbm::{check_condition4, sample_sbm, Condition4};
use regpan::solvers::QuboSolver;
use regpan::{Error, QuboProblem, Result};
use serde::Serialize;

use crate::bench::{bench_csv, run_bench};
use crate::{Command, RunConfig};

pub(crate) fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<()> {
    let start = Instant::now();
    match cmd {
        Command::GenSbm(_) => gen_sbm(cfg)?,
        Command::Bipartize => bipartize_cmd(cfg)?,
        Command::CheckRegularity => check(cfg)?,
        Command::SolveQubo => solve_qubo(cfg)?,
        Command::Pan => pan(cfg)?,
        Command::PanAll(_) => pan_all_cmd(cfg)?,
        Command::Qexist(_) => qexist(cfg)?,
        Command::Bench(_) => bench(cfg)?,
    }
    eprintln!("{}: {:.3} s", cmd.name(), start.elapsed().as_secs_f64());
    Ok(())
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn solver(cfg: &RunConfig) -> Result<Box<dyn QuboSolver>> {
    cfg.solver_kind()
        .build(cfg.solver_config.clone(), cfg.endpoint.as_deref())
}

#[derive(Serialize)]
struct SbmSummary {
    n: usize,
    k: usize,
    edges: usize,
    density: f64,
    community_sizes: Vec<usize>,
    block_densities: Vec<Vec<Option<f64>>>,
    condition4: Condition4,
}

fn gen_sbm(cfg: &RunConfig) -> Result<()> {
    let params = cfg.sbm.as_ref().ok_or_else(|| {
        Error::InvalidParameter("SBM parameters needed: --probs and --densities, or `sbm` in the config".into())
    })?;
    let out = cfg
        .output
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("--output is required".into()))?;
    let pg = sample_sbm(params, cfg.seed())?;
    fs::write(out, write_graph(&pg.graph))?;
    let labels = cfg.labels.clone().unwrap_or_else(|| out.with_extension("labels"));
    fs::write(labels, pg.labels_text())?;
    emit(
        None,
        &json(&SbmSummary {
            n: pg.graph.n(),
            k: pg.k,
            edges: pg.graph.edge_count(),
            density: pg.graph.density(),
            community_sizes: pg.community_sizes(),
            block_densities: pg.block_densities(),
            condition4: check_condition4(&pg),
        })?,
    )
}

fn bipartize_cmd(cfg: &RunConfig) -> Result<()> {
    let g = read_graph(cfg.input()?)?;
    let b = bipartize(&g, &split_sides(g.n(), cfg.seed())?);
    let ids = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    let text = format!(
        "# left {}\n# right {}\n{}",
        ids(b.left_ids()),
        ids(b.right_ids()),
        write_bigraph(&b)
    );
    emit(cfg.output.as_deref(), &text)?;
    eprintln!(
        "bipartite graph {} + {} nodes, {} edges, density {:.4}",
        b.n_left(),
        b.n_right(),
        b.total_edges(),
        b.density()
    );
    Ok(())
}

fn check(cfg: &RunConfig) -> Result<()> {
    let g = read_bigraph(cfg.input()?)?;
    let verdict = check_regularity(&g, cfg.epsilon()?, solver(cfg)?.as_ref())?;
    emit(cfg.output.as_deref(), &json(&verdict)?)
}

fn solve_qubo(cfg: &RunConfig) -> Result<()> {
    let q = QuboProblem::from_json(&fs::read_to_string(cfg.input()?)?)?;
    let result = solver(cfg)?.solve_seeded(&q, cfg.seed())?;
    if result.truncated {
        log::warn!("time budget exhausted; result is the best found so far");
    }
    emit(cfg.output.as_deref(), &json(&result)?)
}

fn output_dir(cfg: &RunConfig) -> Result<Option<&Path>> {
    if let Some(dir) = cfg.output.as_deref() {
        fs::create_dir_all(dir)?;
        return Ok(Some(dir));
    }
    Ok(None)
}

fn pan(cfg: &RunConfig) -> Result<()> {
    let g = read_graph(cfg.input()?)?;
    let t = pan_once(&g, solver(cfg)?.as_ref(), cfg.seed())?;
    let text = json(&t)?;
    if let Some(dir) = output_dir(cfg)? {
        fs::write(dir.join("trajectory.json"), &text)?;
        fs::write(dir.join("stages.csv"), stages_csv(&t))?;
        fs::write(dir.join("community.txt"), communities_text(std::slice::from_ref(&t.community)))?;
    }
    emit(None, &text)
}

fn pan_all_cmd(cfg: &RunConfig) -> Result<()> {
    let g = read_graph(cfg.input()?)?;
    let r = pan_all(&g, solver(cfg)?.as_ref(), cfg.seed(), cfg.stop)?;
    let text = json(&r)?;
    if let Some(dir) = output_dir(cfg)? {
        fs::write(dir.join("result.json"), &text)?;
        fs::write(dir.join("rounds.csv"), rounds_csv(&r))?;
        fs::write(dir.join("communities.txt"), communities_text(&r.communities))?;
    }
    emit(None, &text)
}

#[derive(Serialize)]
struct QexistOutput {
    #[serde(flatten)]
    report: ExistenceReport,
    phase_bits: usize,
    /// Brute-force answer, when the graph is small enough.
    classical_exists: Option<bool>,
    agreement: Option<bool>,
}

fn qexist(cfg: &RunConfig) -> Result<()> {
    let g = read_bigraph(cfg.input()?)?;
    let eps = cfg.epsilon()?;
    let opts = ExistenceOptions {
        m: cfg.qexist.phase_bits,
        fast: cfg.qexist.fast,
        shots: cfg.qexist.shots,
        seed: cfg.seed(),
    };
    let report = quantum_exists_regularity(&g, eps, &opts)?;
    let classical_exists = if g.n_left() + g.n_right() <= BRUTE_FORCE_LIMIT {
        let ext = brute_min_max_deviation(&g)?;
        Some(!is_regular(ext.min, ext.max, eps, g.n_left(), g.n_right()))
    } else {
        None
    };
    let out = QexistOutput {
        phase_bits: report.phase_bits,
        agreement: classical_exists.map(|c| c == report.exists),
        classical_exists,
        report,
    };
    emit(cfg.output.as_deref(), &json(&out)?)
}

fn bench(cfg: &RunConfig) -> Result<()> {
    let rows = run_bench(
        &cfg.bench,
        &cfg.solver_config,
        cfg.endpoint.as_deref(),
        cfg.seed(),
    )?;
    emit(cfg.output.as_deref(), &bench_csv(&rows))
}
