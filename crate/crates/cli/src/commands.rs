use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use epi_lab_core::counterexample::{
    build_f, compute_j, construct, entropy_gap_experiment, k_functional, mgf_bound_check, AdmissiblePerturbation,
    Counterexample, CounterexampleSummary, PerturbationG, DEFAULT_ETA, DEFAULT_J_STEP,
};
use epi_lab_core::density::{
    cumulants, entropy, entropy_power, mean, moment, read_csv, relative_entropy_to_gaussian, shape_report, variance,
    write_csv,
};
use epi_lab_core::edgeworth::edgeworth_error_report;
use epi_lab_core::hadamard::{fourier_chain, sample_complex_unconditional, theorem2_check, SamplerKind, DEFAULT_K};
use epi_lab_core::schur::schur_violation_scan;
use epi_lab_core::{Error, Grid, GridDensity};
use serde_json::{json, Map, Value};

use crate::config::{ConfigFile, NList};
use crate::output::{emit, envelope};
use crate::{Cli, CliError, Command, CounterexampleBase, DensityArgs, DensityChoice, Format, PerturbationChoice};

/// `verify-j` succeeds when the merged-kernel `J` exceeds this.
pub const J_THRESHOLD: f64 = 0.003;
/// Default noise floor below which an entropy gap is not called positive.
pub const DEFAULT_GAP_TOL: f64 = 1e-14;
pub const DEFAULT_SEED: u64 = 1;
/// Margins are accepted down to this many combined standard errors.
pub const SIGMAS: f64 = 3.0;

const COMMON_KEYS: [&str; 6] = ["out", "format", "seed", "grid_lo", "grid_hi", "grid_points"];

/// What a command hands back for serialization.
struct Outcome {
    result: Value,
    csv: String,
    code: u8,
    summary: String,
}

/// Resolved common settings plus the record of every parameter used.
struct Context {
    file: ConfigFile,
    out: Option<PathBuf>,
    format: Format,
    seed: u64,
    grid: Grid,
    params: Map<String, Value>,
}

impl Context {
    fn new(cli: &Cli, file: ConfigFile) -> Result<Self, CliError> {
        let c = &cli.common;
        let out = file.pick::<PathBuf>(c.out.clone(), "out")?;
        let format = file.pick_or(c.format, "format", Format::Json)?;
        let seed = file.pick_or(c.seed, "seed", DEFAULT_SEED)?;
        let lo = file.pick_or(c.grid_lo, "grid_lo", -16.0)?;
        let hi = file.pick_or(c.grid_hi, "grid_hi", 16.0)?;
        let points = file.pick_or(c.grid_points, "grid_points", 1 << 14)?;
        let grid = Grid::new(lo, hi, points)?;
        let mut params = Map::new();
        params.insert("grid_lo".into(), json!(lo));
        params.insert("grid_hi".into(), json!(hi));
        params.insert("grid_points".into(), json!(points));
        Ok(Self { file, out, format, seed, grid, params })
    }

    fn record(&mut self, key: &str, value: Value) {
        self.params.insert(key.into(), value);
    }

    fn record_seed(&mut self) -> u64 {
        self.record("seed", json!(self.seed));
        self.seed
    }
}

fn allowed(extra: &[&'static str]) -> Vec<&'static str> {
    COMMON_KEYS.iter().chain(extra).copied().collect()
}

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let file = match &cli.common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let (name, keys): (&str, &[&'static str]) = match &cli.command {
        Command::VerifyJ { .. } => ("verify-j", &["g", "step"]),
        Command::Counterexample { .. } => ("counterexample", &["density", "eta", "epsilon", "kappa", "n_list", "gap_tol"]),
        Command::SchurScan { .. } => ("schur-scan", &["density", "density_file", "eta", "n", "pairs"]),
        Command::HadamardCheck { .. } => ("hadamard-check", &["n", "kind", "m", "k", "chain", "export_batch"]),
        Command::EdgeworthFit { .. } => {
            ("edgeworth-fit", &["density", "density_file", "eta", "m", "n_list", "max_exponent"])
        }
        Command::DensityInfo { .. } => ("density-info", &["density", "density_file", "eta"]),
    };
    file.check_keys(&allowed(keys))?;
    let mut ctx = Context::new(cli, file)?;

    let outcome = match &cli.command {
        Command::VerifyJ { g, step } => verify_j(&mut ctx, *g, *step)?,
        Command::Counterexample { density, eta, epsilon, kappa, n_list, gap_tol } => {
            counterexample(&mut ctx, *density, *eta, *epsilon, *kappa, n_list.clone(), *gap_tol)?
        }
        Command::SchurScan { density, n, pairs } => schur_scan(&mut ctx, density, *n, *pairs)?,
        Command::HadamardCheck { n, kind, m, k, chain, export_batch } => {
            hadamard_check(&mut ctx, *n, kind.clone(), *m, *k, *chain, export_batch.clone())?
        }
        Command::EdgeworthFit { density, m, n_list, max_exponent } => {
            edgeworth_fit(&mut ctx, density, *m, n_list.clone(), *max_exponent)?
        }
        Command::DensityInfo { density } => density_info(&mut ctx, density)?,
    };

    let bytes = match ctx.format {
        Format::Json => {
            let doc = envelope(name, ctx.params, outcome.result, outcome.code);
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => outcome.csv.into_bytes(),
    };
    emit(ctx.out.as_deref(), &bytes)?;
    eprintln!("{name}: {} (exit {})", outcome.summary, outcome.code);
    Ok(outcome.code)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

fn verify_j(ctx: &mut Context, g: Option<PerturbationChoice>, step: Option<f64>) -> Result<Outcome, CliError> {
    let choice = ctx.file.pick_or(g, "g", PerturbationChoice::Explicit)?;
    let step = ctx.file.pick_or(step, "step", DEFAULT_J_STEP)?;
    ctx.record("g", json!(if choice == PerturbationChoice::Explicit { "explicit" } else { "zero" }));
    ctx.record("step", json!(step));
    let g = match choice {
        PerturbationChoice::Explicit => PerturbationG::explicit(),
        PerturbationChoice::Zero => PerturbationG::zero(),
    };
    let j = compute_j(&g, step)?;
    let code = if j.j_combined > J_THRESHOLD { 0 } else { 1 };
    let mut result = to_value(&j);
    let obj = result.as_object_mut().expect("object");
    obj.insert("consistency_residual".into(), json!((j.j1 - j.j2 - j.j_combined).abs()));
    // Simpson error estimate is |J(h) - J(2h)| / 15
    obj.insert("step_doubling_change".into(), json!(15.0 * j.quadrature_error_estimate));
    obj.insert("threshold".into(), json!(J_THRESHOLD));
    let csv = format!(
        "J1,J2,J_combined,quadrature_error_estimate,step\n{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
        j.j1, j.j2, j.j_combined, j.quadrature_error_estimate, j.step
    );
    Ok(Outcome { result, csv, code, summary: format!("J = {:.10} (J1 = {:.10}, J2 = {:.10})", j.j_combined, j.j1, j.j2) })
}

fn t_grid() -> Vec<f64> {
    (-16..=16).filter(|&i| i != 0).map(|i| i as f64 * 0.25).collect()
}

fn shape_checks(d: &GridDensity) -> Value {
    let shape = shape_report(d, None, None);
    let mgf = match mgf_bound_check(d, &t_grid()) {
        Ok(r) => json!({"holds": true, "max_ratio": r.max_ratio}),
        Err(Error::MgfBound { t, .. }) => json!({"holds": false, "violated_at": t}),
        Err(e) => json!({"holds": false, "error": e.to_string()}),
    };
    json!({
        "log_concave": shape.log_concave,
        "symmetric": shape.symmetric,
        "variance": variance(d),
        "ex4_minus_3": moment(d, 4) - 3.0,
        "mgf_bound": mgf,
    })
}

fn counterexample(
    ctx: &mut Context,
    base: Option<CounterexampleBase>,
    eta: Option<f64>,
    epsilon: Option<f64>,
    kappa: Option<f64>,
    n_list: Option<NList>,
    gap_tol: Option<f64>,
) -> Result<Outcome, CliError> {
    let base = ctx.file.pick_or(base, "density", CounterexampleBase::Counterexample)?;
    let eta = ctx.file.pick_or(eta, "eta", DEFAULT_ETA)?;
    let epsilon = ctx.file.pick(epsilon, "epsilon")?;
    let kappa = ctx.file.pick(kappa, "kappa")?;
    let n_list = ctx.file.pick_or(n_list, "n_list", NList(vec![4, 8, 16, 32, 64]))?.0;
    let gap_tol = ctx.file.pick_or(gap_tol, "gap_tol", DEFAULT_GAP_TOL)?;
    ctx.record("n_list", json!(n_list));
    ctx.record("gap_tol", json!(gap_tol));
    let grid = ctx.grid;

    let (summary_value, f, headline) = match base {
        CounterexampleBase::Gaussian => {
            ctx.record("density", json!("gaussian"));
            let f = GridDensity::gaussian(0.0, 1.0, grid)?;
            let ex4 = moment(&f, 4) - 3.0;
            let k = k_functional(&f);
            let table = entropy_gap_experiment(&f, &n_list, ex4, k)?;
            let v = json!({
                "EX4_minus_3": ex4,
                "K": k,
                "gap_table": to_value(&table.rows),
                "predicted_slope": table.predicted_slope,
                "n0": table.n0,
            });
            (v, f, table)
        }
        CounterexampleBase::Counterexample => {
            ctx.record("density", json!("counterexample"));
            ctx.record("eta", json!(eta));
            let c = match (epsilon, kappa) {
                (None, None) => construct(&grid, eta)?,
                (Some(eps), kappa) => {
                    let pert = AdmissiblePerturbation::new(PerturbationG::explicit(), eta, kappa.unwrap_or(0.0), eps)?;
                    let density = build_f(&pert, &grid)?;
                    let j = compute_j(&pert.shape(&grid)?, DEFAULT_J_STEP)?;
                    let ex4_minus_3 = moment(&density, 4) - 3.0;
                    let k = k_functional(&density);
                    Counterexample { perturbation: pert, density, j, ex4_minus_3, k }
                }
                (None, Some(_)) => return Err(CliError::Config("`kappa` requires `epsilon`".into())),
            };
            ctx.record("epsilon", json!(c.perturbation.epsilon));
            ctx.record("kappa", json!(c.perturbation.fourth_moment_tilt));
            let table = entropy_gap_experiment(&c.density, &n_list, c.ex4_minus_3, c.k)?;
            let v = to_value(&CounterexampleSummary::new(&c, &table));
            (v, c.density, table)
        }
    };
    let mut result = summary_value;
    result.as_object_mut().expect("object").insert("checks".into(), shape_checks(&f));
    let code = if headline.rows.iter().any(|r| r.delta_n > gap_tol) { 0 } else { 1 };
    let mut csv = String::from("n,delta_n,n_delta_n,predicted\n");
    for r in &headline.rows {
        csv.push_str(&format!("{},{:.16e},{:.16e},{:.16e}\n", r.n, r.delta_n, r.n_delta_n, r.predicted));
    }
    let last = headline.rows.last().expect("nonempty n_list");
    let summary = format!(
        "n0 = {}, n Delta_n at n = {}: {:.3e} (predicted {:.3e})",
        headline.n0.map(|n| n.to_string()).unwrap_or_else(|| "none".into()),
        last.n,
        last.n_delta_n,
        headline.predicted_slope
    );
    Ok(Outcome { result, csv, code, summary })
}

fn load_density(ctx: &mut Context, args: &DensityArgs) -> Result<GridDensity, CliError> {
    if let Some(path) = ctx.file.pick::<PathBuf>(args.density_file.clone(), "density_file")? {
        ctx.record("density_file", json!(path.display().to_string()));
        let reader = BufReader::new(File::open(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
        return Ok(read_csv(reader)?);
    }
    let choice = ctx.file.pick_or(args.density, "density", DensityChoice::Counterexample)?;
    let grid = ctx.grid;
    let d = match choice {
        DensityChoice::Counterexample => {
            let eta = ctx.file.pick_or(args.eta, "eta", DEFAULT_ETA)?;
            ctx.record("eta", json!(eta));
            construct(&grid, eta)?.density
        }
        DensityChoice::Gaussian => GridDensity::gaussian(0.0, 1.0, grid)?,
        DensityChoice::Uniform => {
            let r = 3f64.sqrt();
            GridDensity::uniform(-r, r, grid)?
        }
        DensityChoice::Logistic => {
            let s = 3f64.sqrt() / std::f64::consts::PI;
            GridDensity::from_fn(grid, |x| {
                let e = (-(x / s).abs()).exp();
                e / (s * (1.0 + e).powi(2))
            })?
        }
    };
    let name = match choice {
        DensityChoice::Counterexample => "counterexample",
        DensityChoice::Gaussian => "gaussian",
        DensityChoice::Uniform => "uniform",
        DensityChoice::Logistic => "logistic",
    };
    ctx.record("density", json!(name));
    Ok(d)
}

fn schur_scan(ctx: &mut Context, density: &DensityArgs, n: Option<usize>, pairs: Option<usize>) -> Result<Outcome, CliError> {
    let d = load_density(ctx, density)?;
    let n = ctx.file.pick_or(n, "n", 4)?;
    let pairs = ctx.file.pick_or(pairs, "pairs", 100)?;
    ctx.record("n", json!(n));
    ctx.record("pairs", json!(pairs));
    let seed = ctx.record_seed();
    let scan = schur_violation_scan(&d, n, pairs, seed)?;
    let violations = scan.violations().len();
    let min_margin = scan.entries.iter().map(|e| e.margin).fold(f64::INFINITY, f64::min);
    let mut result = to_value(&scan);
    let obj = result.as_object_mut().expect("object");
    obj.insert("violations".into(), json!(violations));
    obj.insert("min_margin".into(), json!(min_margin));
    let mut csv = Vec::new();
    scan.write_csv(&mut csv)?;
    Ok(Outcome {
        result,
        csv: String::from_utf8(csv).expect("utf8"),
        code: if violations == 0 { 0 } else { 1 },
        summary: format!("{violations} violations in {} pairs, min margin {min_margin:.3e}", scan.entries.len()),
    })
}

fn hadamard_check(
    ctx: &mut Context,
    n: Option<usize>,
    kind: Option<String>,
    m: Option<usize>,
    k: Option<usize>,
    chain: bool,
    export_batch: Option<PathBuf>,
) -> Result<Outcome, CliError> {
    let n = ctx.file.pick_or(n, "n", 4)?;
    let m = ctx.file.pick_or(m, "m", 100_000)?;
    let k = ctx.file.pick_or(k, "k", DEFAULT_K)?;
    let chain = ctx.file.pick_or(chain.then_some(true), "chain", false)?;
    let kind = ctx.file.pick::<String>(kind, "kind")?;
    let export = ctx.file.pick::<PathBuf>(export_batch, "export_batch")?;
    let kinds: Vec<SamplerKind> = match &kind {
        Some(s) => vec![s.parse()?],
        None => SamplerKind::ALL.to_vec(),
    };
    if export.is_some() && kinds.len() != 1 {
        return Err(CliError::Config("`export_batch` needs a single `kind`".into()));
    }
    ctx.record("n", json!(n));
    ctx.record("m", json!(m));
    ctx.record("k", json!(k));
    ctx.record("chain", json!(chain));
    ctx.record("kinds", json!(kinds.iter().map(|k| k.as_str()).collect::<Vec<_>>()));
    let seed = ctx.record_seed();

    let mut results = Vec::new();
    let mut csv = String::from("n,m,kind,lhs,lhs_se,rhs,rhs_se,margin,margin_se\n");
    let mut all_hold = true;
    let mut lines = Vec::new();
    for kind in kinds {
        let batch = sample_complex_unconditional(kind, n, m, seed)?;
        if let Some(path) = &export {
            let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            batch.write_csv(std::io::BufWriter::new(f))?;
        }
        let report = theorem2_check(&batch, k)?;
        let holds = report.holds(SIGMAS);
        all_hold &= holds;
        let mut v = to_value(&report);
        let obj = v.as_object_mut().expect("object");
        obj.insert("holds".into(), json!(holds));
        obj.insert("equality_within_3se".into(), json!(report.equality_within(SIGMAS)));
        if chain {
            let c = fourier_chain(&batch, k)?;
            all_hold &= c.holds(SIGMAS);
            let mut cv = to_value(&c);
            cv.as_object_mut().expect("object").insert("holds".into(), json!(c.holds(SIGMAS)));
            obj.insert("fourier_chain".into(), cv);
        }
        csv.push_str(&format!(
            "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            report.n, report.m, report.kind, report.lhs, report.lhs_se, report.rhs, report.rhs_se, report.margin, report.margin_se
        ));
        lines.push(format!("{} margin {:+.4} ({:+.1} se)", report.kind, report.margin, report.margin / report.margin_se));
        results.push(v);
    }
    Ok(Outcome {
        result: Value::Array(results),
        csv,
        code: if all_hold { 0 } else { 1 },
        summary: lines.join("; "),
    })
}

fn edgeworth_fit(
    ctx: &mut Context,
    density: &DensityArgs,
    m: Option<usize>,
    n_list: Option<NList>,
    max_exponent: Option<f64>,
) -> Result<Outcome, CliError> {
    let d = load_density(ctx, density)?;
    let m = ctx.file.pick_or(m, "m", 4)?;
    let n_list = ctx.file.pick_or(n_list, "n_list", NList(vec![8, 16, 32, 64]))?.0;
    let max_exponent = ctx.file.pick_or(max_exponent, "max_exponent", -1.2)?;
    ctx.record("m", json!(m));
    ctx.record("n_list", json!(n_list));
    ctx.record("max_exponent", json!(max_exponent));
    let report = edgeworth_error_report(&d, m, &n_list)?;
    let code = match report.fit_exponent {
        Some(e) if e <= max_exponent => 0,
        _ => 1,
    };
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    let summary = match report.fit_exponent {
        Some(e) => format!("fitted exponent {e:.4} (threshold {max_exponent})"),
        None => "fewer than two sample counts, no fit".into(),
    };
    Ok(Outcome { result: to_value(&report), csv: String::from_utf8(csv).expect("utf8"), code, summary })
}

fn density_info(ctx: &mut Context, density: &DensityArgs) -> Result<Outcome, CliError> {
    let d = load_density(ctx, density)?;
    let g = d.grid();
    let h = entropy(&d);
    let result = json!({
        "grid": {"lo": g.lo(), "hi": g.hi(), "points": g.len(), "dx": g.dx()},
        "mass": d.total_mass(),
        "mean": mean(&d),
        "variance": variance(&d),
        "entropy": h,
        "entropy_power": entropy_power(&d),
        "relative_entropy_to_gaussian": relative_entropy_to_gaussian(&d),
        "cumulants": cumulants(&d, 6)?,
        "shape": to_value(&shape_report(&d, None, None)),
        "checks": shape_checks(&d),
    });
    let mut csv = Vec::new();
    write_csv(&d, &mut csv)?;
    Ok(Outcome {
        result,
        csv: String::from_utf8(csv).expect("utf8"),
        code: 0,
        summary: format!("entropy {h:.12}, variance {:.12}", variance(&d)),
    })
}
