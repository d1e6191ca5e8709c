//! Batch front end: charges, STCMC solves, foliations, spectra, the
//! graphical Schwarzschild example and the acceptance suite.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use stcmc::acceptance::{run_criterion, CRITERIA};
use stcmc::charges::{log_grid, log_slope, ChargeTable, Trend, CHARGE_BAND};
use stcmc::chart::{DataProvider, ProviderSpec, Vec3};
use stcmc::solver::{foliate, laplace_spectrum, newton_solve, operator_bound_check, SolveConfig};
use stcmc::surface::{surface_frames, write_surface_csv, GraphSurface};
use stcmc::{Result, StcmcError};

#[derive(Parser, Debug)]
#[command(name = "stcmc", version, about = "STCMC foliations and asymptotic charges of initial data sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ADM energy, momentum, centers and velocity integrals over coordinate spheres.
    Charges(Common),
    /// Solve for one STCMC surface with 2/sigma as its spacetime mean curvature.
    Solve(Common),
    /// Solve a sequence of leaves for increasing sigma.
    Foliate(Common),
    /// Laplace spectrum and operator floor on one STCMC leaf.
    Spectrum(Common),
    /// C_BOM, Z and their sum on the graphical Schwarzschild slice.
    #[command(name = "example-s9")]
    ExampleS9(Common),
    /// Run the acceptance suite; exit status 0 iff every criterion passes.
    Check(Common),
}

#[derive(Args, Debug, Default, Clone)]
struct Common {
    /// euclidean, schwarzschild, graphical, or a JSON file with a provider description.
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    mass: Option<f64>,
    /// Boost direction of the graphical slice, `x,y,z`.
    #[arg(long, value_parser = parse_vec3)]
    u: Option<Vec3>,
    /// Translate the data so that its origin sits at `x,y,z`.
    #[arg(long, value_parser = parse_vec3)]
    center: Option<Vec3>,
    /// Comma separated radii, or `log:<start>:<stop>:<count>`.
    #[arg(long, value_parser = parse_grid)]
    radii: Option<::std::vec::Vec<f64>>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Comma separated, strictly increasing, or `log:<start>:<stop>:<count>`.
    #[arg(long, value_parser = parse_grid)]
    sigma_list: Option<::std::vec::Vec<f64>>,
    /// Band limit of surfaces (default 24); for `charges`, of the flux grid (default 32).
    #[arg(long)]
    lmax: Option<usize>,
    /// Newton tolerance on sup |stcmc - 2/sigma| (default 1e-10).
    #[arg(long)]
    tol: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with any of the fields above, plus `provider` and `criteria`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Radii of the example, `log:<start>:<stop>:<count>`.
    #[arg(long, value_parser = parse_grid)]
    s_grid: Option<::std::vec::Vec<f64>>,
    /// Criteria to run in `check`, comma separated (default all).
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<usize>>,
}

/// Config file schema: the flags, plus a full provider description.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    data: Option<String>,
    provider: Option<ProviderSpec>,
    mass: Option<f64>,
    u: Option<Vec3>,
    center: Option<Vec3>,
    radii: Option<GridSpec>,
    sigma: Option<f64>,
    sigma_list: Option<GridSpec>,
    lmax: Option<usize>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    s_grid: Option<GridSpec>,
    criteria: Option<Vec<usize>>,
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum GridSpec {
    List(Vec<f64>),
    Text(String),
}

impl GridSpec {
    fn values(self) -> Result<Vec<f64>> {
        match self {
            GridSpec::List(v) => Ok(v),
            GridSpec::Text(s) => parse_grid(&s).map_err(StcmcError::InvalidConfig),
        }
    }
}

fn parse_vec3(text: &str) -> std::result::Result<Vec3, String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|p| format!("expected three components, got {}", p.len()))
}

fn parse_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
    if let Some(rest) = text.strip_prefix("log:") {
        let f: Vec<&str> = rest.split(':').collect();
        if f.len() != 3 {
            return Err(format!("expected log:<start>:<stop>:<count>, got {text:?}"));
        }
        let start: f64 = f[0].parse().map_err(|e| format!("bad start {:?}: {e}", f[0]))?;
        let stop: f64 = f[1].parse().map_err(|e| format!("bad stop {:?}: {e}", f[1]))?;
        let count: usize = f[2].parse().map_err(|e| format!("bad count {:?}: {e}", f[2]))?;
        return log_grid(start, stop, count).map_err(|e| e.to_string());
    }
    text.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}")))
        .collect()
}

/// Flags merged over the config file; flags win.
struct RunConfig {
    provider: DataProvider,
    mass: f64,
    u: Vec3,
    center: Vec3,
    radii: Option<Vec<f64>>,
    sigma: Option<f64>,
    sigma_list: Option<Vec<f64>>,
    lmax: Option<usize>,
    tol: f64,
    out: Option<PathBuf>,
    s_grid: Option<Vec<f64>>,
    criteria: Option<Vec<usize>>,
}

fn config_error(msg: impl Into<String>) -> StcmcError {
    StcmcError::InvalidConfig(msg.into())
}

impl RunConfig {
    fn resolve(flags: Common) -> Result<RunConfig> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| config_error(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let grid = |flag: Option<Vec<f64>>, file: Option<GridSpec>| -> Result<Option<Vec<f64>>> {
            match (flag, file) {
                (Some(v), _) => Ok(Some(v)),
                (None, Some(g)) => g.values().map(Some),
                (None, None) => Ok(None),
            }
        };
        let mass = flags.mass.or(file.mass).unwrap_or(1.0);
        let u = flags.u.or(file.u).unwrap_or([1.0, 0.0, 0.0]);
        let data = flags.data.or(file.data);
        let mut provider = match (data.as_deref(), file.provider) {
            (Some(name), _) => named_provider(name, mass, u)?,
            (None, Some(spec)) => DataProvider::new(spec)?,
            (None, None) => DataProvider::schwarzschild(mass)?,
        };
        let center = flags.center.or(file.center);
        if let Some(c) = center {
            provider = provider.translated(c)?;
        }
        let tol = flags.tol.or(file.tol).unwrap_or(1e-10);
        Ok(RunConfig {
            provider,
            mass,
            u,
            center: center.unwrap_or([0.0; 3]),
            radii: grid(flags.radii, file.radii)?,
            sigma: flags.sigma.or(file.sigma),
            sigma_list: grid(flags.sigma_list, file.sigma_list)?,
            lmax: flags.lmax.or(file.lmax),
            tol,
            out: flags.out.or(file.out),
            s_grid: grid(flags.s_grid, file.s_grid)?,
            criteria: flags.criteria.or(file.criteria),
        })
    }

    fn solve_config(&self) -> Result<SolveConfig> {
        let config = SolveConfig { tolerance: self.tol, ..SolveConfig::with_band(self.lmax.unwrap_or(24)) };
        config.validate()?;
        Ok(config)
    }

    fn sigma(&self) -> Result<f64> {
        self.sigma.ok_or_else(|| config_error("--sigma is required"))
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        match &self.out {
            Some(path) => {
                let f = File::create(path).map_err(|e| config_error(format!("cannot create {}: {e}", path.display())))?;
                Ok(Box::new(BufWriter::new(f)))
            }
            None => Ok(Box::new(BufWriter::new(io::stdout()))),
        }
    }
}

fn named_provider(name: &str, mass: f64, u: Vec3) -> Result<DataProvider> {
    match name {
        "euclidean" => Ok(DataProvider::euclidean()),
        "schwarzschild" => DataProvider::schwarzschild(mass),
        "graphical" => DataProvider::graphical(mass, u),
        path if path.ends_with(".json") => {
            let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {path}: {e}")))?;
            DataProvider::from_json(&text)
        }
        other => Err(config_error(format!(
            "unknown data {other:?}; expected euclidean, schwarzschild, graphical or a .json file"
        ))),
    }
}

fn io_error(e: io::Error) -> StcmcError {
    config_error(format!("write failed: {e}"))
}

fn fmt3(v: Vec3) -> String {
    format!("({:.6e}, {:.6e}, {:.6e})", v[0], v[1], v[2])
}

fn fmt_opt3(v: Option<Vec3>) -> String {
    v.map_or_else(|| "undefined".to_string(), fmt3)
}

fn run_charges(cfg: RunConfig) -> Result<()> {
    let radii = cfg.radii.clone().ok_or_else(|| config_error("--radii is required"))?;
    let table = ChargeTable::compute_with_band(&cfg.provider, &radii, cfg.lmax.unwrap_or(CHARGE_BAND))?;
    let mut out = cfg.output()?;
    table.write_csv(&mut out).map_err(io_error)?;
    out.flush().map_err(io_error)?;
    let c = &table.charges;
    eprintln!("E limit     {:.10e}", c.energy_limit);
    eprintln!("P limit     {}", fmt3(c.momentum_limit));
    match c.mass {
        Some(m) => eprintln!("ADM mass    {m:.10e}"),
        None => eprintln!("ADM mass    undefined (E^2 < |P|^2)"),
    }
    if let Some(centers) = &table.centers {
        eprintln!("C_BOM       {}{}", fmt_opt3(centers.bom_limit()), diverging(&centers.bom_trend));
        eprintln!("Z           {}{}", fmt_opt3(centers.correction_limit()), diverging(&centers.correction_trend));
        eprintln!("C_STCMC     {}{}", fmt_opt3(centers.stcmc_limit()), diverging(&centers.stcmc_trend));
    }
    if let Some(ev) = &table.evolution {
        eprintln!("V limit     {}  |V - P/E| = {:.3e}", fmt3(ev.velocity_limit), ev.discrepancy);
    }
    Ok(())
}

fn diverging(trends: &[Trend; 3]) -> &'static str {
    if trends.iter().any(|t| t.diverges) {
        "  (log-periodic, diverges)"
    } else {
        ""
    }
}

fn run_solve(cfg: RunConfig) -> Result<()> {
    let sigma = cfg.sigma()?;
    let config = cfg.solve_config()?;
    let seed = GraphSurface::sphere(cfg.center, sigma, config.band)?;
    let result = newton_solve(&cfg.provider, sigma, &seed, &config)?;
    let geo = surface_frames(&cfg.provider, &result.surface)?;
    let s = geo.scalars();
    let z = result.surface.center;
    eprintln!("sigma        {sigma}");
    eprintln!("base radius  {:.12e}", result.surface.radius);
    eprintln!("base center  {}", fmt3(z));
    eprintln!("area radius  {:.12e}", s.area_radius);
    eprintln!("Hawking mass {:.12e}", s.hawking_mass);
    eprintln!("radii        [{:.12e}, {:.12e}]", s.min_coordinate_radius, s.max_coordinate_radius);
    eprintln!("residual     sup {:.3e}, L2 {:.3e}", result.residual_sup, result.residual_l2);
    eprintln!("iterations   {}", result.iterations);
    eprintln!("condition    {:.3e}", result.condition);
    let mut out = cfg.output()?;
    write_surface_csv(&mut out, &result.surface, &geo)?;
    out.flush().map_err(io_error)
}

fn run_foliate(cfg: RunConfig) -> Result<()> {
    let sigmas = cfg.sigma_list.clone().ok_or_else(|| config_error("--sigma-list is required"))?;
    let config = cfg.solve_config()?;
    let seed = GraphSurface::sphere(cfg.center, sigmas[0], config.band)?;
    let foliation = foliate(&cfg.provider, &sigmas, Some(&seed), &config)?;
    let mut out = cfg.output()?;
    foliation.write_csv(&mut out)?;
    out.flush().map_err(io_error)?;
    for leaf in &foliation.leaves {
        eprintln!(
            "sigma {:>10.3}  m_H {:.8e}  center {}  lapse {}",
            leaf.sigma,
            leaf.hawking_mass,
            fmt3(leaf.center),
            if leaf.lapse_positive { "positive" } else { "not positive" }
        );
    }
    Ok(())
}

fn run_spectrum(cfg: RunConfig) -> Result<()> {
    let sigma = cfg.sigma()?;
    let config = cfg.solve_config()?;
    let seed = GraphSurface::sphere(cfg.center, sigma, config.band)?;
    let leaf = newton_solve(&cfg.provider, sigma, &seed, &config)?.surface;
    let report = laplace_spectrum(&cfg.provider, &leaf, 8)?;
    let bound = operator_bound_check(&cfg.provider, &leaf)?;
    let mut out = cfg.output()?;
    writeln!(out, "index,eigenvalue").map_err(io_error)?;
    for (i, v) in report.eigenvalues.iter().enumerate() {
        writeln!(out, "{i},{v:.16e}").map_err(io_error)?;
    }
    out.flush().map_err(io_error)?;
    eprintln!("area radius      {:.10e}", report.area_radius);
    eprintln!("Hawking mass     {:.10e}", report.hawking_mass);
    eprintln!("2/s^2 + 6m/s^3   {:.10e}", report.predicted);
    eprintln!(
        "lambda 1..3      {:.10e} {:.10e} {:.10e}",
        report.eigenvalues.get(1).copied().unwrap_or(f64::NAN),
        report.eigenvalues.get(2).copied().unwrap_or(f64::NAN),
        report.eigenvalues.get(3).copied().unwrap_or(f64::NAN)
    );
    eprintln!("sigma_min(L)     {:.10e}  bound 3|m|/s^3 {:.10e}  ratio {:.4}", bound.sigma_min, bound.bound, bound.ratio);
    Ok(())
}

fn run_example(cfg: RunConfig) -> Result<()> {
    let radii = match (&cfg.s_grid, &cfg.radii) {
        (Some(s), _) | (None, Some(s)) => s.clone(),
        (None, None) => log_grid(1e2, 1e4, 16)?,
    };
    let provider = DataProvider::graphical(cfg.mass, cfg.u)?;
    let table = ChargeTable::compute_with_band(&provider, &radii, cfg.lmax.unwrap_or(CHARGE_BAND))?;
    let centers = table.centers.as_ref().ok_or(StcmcError::ZeroEnergy)?;
    let mut out = cfg.output()?;
    writeln!(out, "radius,CBOM1,CBOM2,CBOM3,Z1,Z2,Z3,SUM1,SUM2,SUM3,SUM_NORM").map_err(io_error)?;
    for (i, s) in radii.iter().enumerate() {
        let (b, z, c) = (centers.bom[i], centers.correction[i], centers.stcmc[i]);
        let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        let cells: Vec<String> =
            [*s, b[0], b[1], b[2], z[0], z[1], z[2], c[0], c[1], c[2], norm].iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(",")).map_err(io_error)?;
    }
    out.flush().map_err(io_error)?;
    let un = (cfg.u[0] * cfg.u[0] + cfg.u[1] * cfg.u[1] + cfg.u[2] * cfg.u[2]).sqrt();
    // cos(ln s) and sin(ln s) coefficients of the component along u
    let along = |trends: &[Trend; 3]| {
        let mut acc = [0.0; 2];
        for (t, ui) in trends.iter().zip(&cfg.u) {
            if let Some(o) = t.oscillation {
                acc[0] += ui / un * o.cos;
                acc[1] += ui / un * o.sin;
            }
        }
        acc
    };
    eprintln!("E limit                 {:.10e}", table.charges.energy_limit);
    let (b, z) = (along(&centers.bom_trend), along(&centers.correction_trend));
    eprintln!("C_BOM . u  cos, sin     {:.6}, {:.6}", b[0], b[1]);
    eprintln!("Z . u      cos, sin     {:.6}, {:.6}", z[0], z[1]);
    let norms: Vec<f64> = centers.stcmc.iter().map(|c| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()).collect();
    eprintln!("|C_BOM + Z| slope       {:.4}", log_slope(&radii, &norms));
    Ok(())
}

fn run_check(cfg: RunConfig) -> Result<bool> {
    let ids: Vec<usize> = cfg.criteria.clone().unwrap_or_else(|| (1..=CRITERIA).collect());
    if let Some(bad) = ids.iter().find(|&&id| id == 0 || id > CRITERIA) {
        return Err(config_error(format!("no criterion {bad}; expected 1..={CRITERIA}")));
    }
    let mut out = cfg.output()?;
    let mut all = true;
    for id in ids {
        let outcome = run_criterion(id)?;
        all &= outcome.passed;
        writeln!(out, "{}", outcome.line()).map_err(io_error)?;
        out.flush().map_err(io_error)?;
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (flags, run): (Common, fn(RunConfig) -> Result<bool>) = match cli.command {
        Command::Charges(c) => (c, |r| run_charges(r).map(|_| true)),
        Command::Solve(c) => (c, |r| run_solve(r).map(|_| true)),
        Command::Foliate(c) => (c, |r| run_foliate(r).map(|_| true)),
        Command::Spectrum(c) => (c, |r| run_spectrum(r).map(|_| true)),
        Command::ExampleS9(c) => (c, |r| run_example(r).map(|_| true)),
        Command::Check(c) => (c, run_check),
    };
    match RunConfig::resolve(flags).and_then(run) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
