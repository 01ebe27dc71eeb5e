//! Argument parsing and the subcommands.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperbar_core::calibration::{bootstrap_calibrate, CalibrationSetup, NelderMeadOptions};
use hyperbar_core::montecarlo::{self, McConfig};
use hyperbar_core::pricing::{
    did_book, dic_book, BarrierContract, GreekMethod, PriceAndGreeks, PricingParams,
};
use hyperbar_core::transforms::european_calls_quadrature;
use hyperbar_core::PiecewiseModel;
use serde_json::json;

use crate::error::{CliError, Context};
use crate::model_file::{JumpWeights, ModelFile};
use crate::output::{emit, sig6, Cell, Format, Table};
use crate::parallel;
use crate::quotes::load_quotes;

#[derive(Debug, Parser)]
#[command(name = "hyperbar", version, about = "Down-and-in barrier options under hyper-exponential additive models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,
    /// Output file; standard output if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for Monte Carlo.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Semi-analytic prices.
    Price(ContractArgs),
    /// Prices with delta and gamma.
    Greeks(ContractArgs),
    /// Semi-analytic prices next to Monte-Carlo confidence intervals.
    Validate {
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// European calls at the model maturities.
    European(EuropeanArgs),
    /// Bootstrap fit of a model to call quotes.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Down-and-in digital.
    Did,
    /// Down-and-in call.
    Dic,
}

#[derive(Debug, Args)]
pub struct ContractArgs {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "did")]
    pub kind: Kind,
    /// Barrier in percent of the model spot.
    #[arg(long, default_value_t = 90.0)]
    pub barrier_pct: f64,
    /// Spots in percent of the model spot (digital): `a,b,c` or `start:stop:step`.
    #[arg(long)]
    pub spots: Option<String>,
    /// Strikes in percent of the spot (call): `a,b,c` or `start:stop:step`.
    #[arg(long)]
    pub strikes: Option<String>,
    /// Period lengths; the leading model periods by default all of them.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Talbot precision; 6 for digitals and 7 for calls by default.
    #[arg(long)]
    pub talbot_m: Option<usize>,
    #[arg(long, default_value_t = 1024)]
    pub fft_n: usize,
    #[arg(long, default_value_t = 0.25)]
    pub fft_delta: f64,
    #[arg(long, default_value_t = 0.75)]
    pub damp_alpha: f64,
    /// Greeks by central differences with this relative bump.
    #[arg(long)]
    pub fd_bump: Option<f64>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 200_000)]
    pub mc_paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub mc_dt: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub antithetic: bool,
}

#[derive(Debug, Args)]
pub struct EuropeanArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Strikes in percent of the spot.
    #[arg(long)]
    pub strikes: String,
    /// Only this maturity (1-based); all by default.
    #[arg(long)]
    pub maturity_index: Option<usize>,
    #[arg(long, default_value_t = 0.75)]
    pub damp_alpha: f64,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Template model: supplies r, d, spot, schedule and jump rates.
    #[arg(long)]
    pub model: PathBuf,
    /// Quote file (CSV).
    #[arg(long)]
    pub quotes: PathBuf,
    /// Fit positive jump amplitudes as well.
    #[arg(long)]
    pub fit_positive: bool,
    #[arg(long, default_value_t = 5)]
    pub multistarts: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.75)]
    pub damp_alpha: f64,
}

/// `a,b,c` or `start:stop:step` (inclusive).
pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage(format!("cannot read number list `{s}`"));
    let s = s.trim();
    if s.is_empty() {
        return Err(CliError::usage("empty number list"));
    }
    if s.contains(':') {
        let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
        let [a, b, step] = parts[..] else { return Err(bad()) };
        if !(step > 0.0 && b >= a) {
            return Err(bad());
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + step * i as f64).collect());
    }
    s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
}

fn load_model(path: &Path) -> Result<PiecewiseModel, CliError> {
    ModelFile::load(path)?.to_model()
}

struct Prepared {
    model: PiecewiseModel,
    contract: BarrierContract,
    /// Percent levels: spots for digitals, strikes for calls.
    pcts: Vec<f64>,
    /// Absolute levels.
    levels: Vec<f64>,
    params: PricingParams,
}

fn prepare(a: &ContractArgs) -> Result<Prepared, CliError> {
    let model = load_model(&a.model)?;
    let schedule = match &a.schedule {
        Some(s) => parse_list(s)?,
        None => model.durations(),
    };
    let model = model.restricted_to_schedule(&schedule).context("schedule")?;
    let s0 = model.spot();
    let barrier = a.barrier_pct / 100.0 * s0;
    let mut params = PricingParams::for_kind(match a.kind {
        Kind::Did => hyperbar_core::pricing::ContractKind::DownAndInDigital,
        Kind::Dic => hyperbar_core::pricing::ContractKind::DownAndInCall,
    });
    if let Some(m) = a.talbot_m {
        if !(3..=12).contains(&m) {
            return Err(CliError::usage(format!("--talbot-m {m} outside 3..=12")));
        }
        params.talbot_m = m;
    }
    if !(a.fft_n.is_power_of_two() && a.fft_n >= 2 && a.fft_n <= 1 << 16) {
        return Err(CliError::usage(format!("--fft-n {} must be a power of two up to 65536", a.fft_n)));
    }
    params.fft_n = a.fft_n;
    params.fft_delta = a.fft_delta;
    params.damp_alpha = a.damp_alpha;
    if let Some(b) = a.fd_bump {
        params.greeks = GreekMethod::FiniteDifference { bump: b };
    }
    let (contract, pcts) = match a.kind {
        Kind::Did => {
            if a.strikes.is_some() {
                return Err(CliError::usage("--strikes applies to --kind dic"));
            }
            let pcts = parse_list(a.spots.as_deref().unwrap_or("100"))?;
            (BarrierContract::digital(barrier, schedule), pcts)
        }
        Kind::Dic => {
            if a.spots.is_some() {
                return Err(CliError::usage("--spots applies to --kind did"));
            }
            let s = a.strikes.as_deref().ok_or_else(|| CliError::usage("--kind dic needs --strikes"))?;
            (BarrierContract::call(barrier, s0, schedule), parse_list(s)?)
        }
    };
    if pcts.iter().any(|p| !(*p > 0.0)) {
        return Err(CliError::usage("percent levels must be positive"));
    }
    let levels = pcts.iter().map(|p| p / 100.0 * s0).collect();
    Ok(Prepared { model, contract, pcts, levels, params })
}

fn book(p: &Prepared) -> Result<Vec<PriceAndGreeks>, CliError> {
    match p.contract.kind {
        hyperbar_core::pricing::ContractKind::DownAndInDigital => {
            did_book(&p.model, &p.contract, &p.levels, &p.params).context("pricing")
        }
        hyperbar_core::pricing::ContractKind::DownAndInCall => {
            dic_book(&p.model, &p.contract, &p.levels, &p.params).context("pricing")
        }
    }
}

fn level_column(p: &Prepared) -> &'static str {
    match p.contract.kind {
        hyperbar_core::pricing::ContractKind::DownAndInDigital => "spot_pct",
        hyperbar_core::pricing::ContractKind::DownAndInCall => "strike_pct",
    }
}

fn add_params_meta(t: &mut Table, p: &Prepared) {
    t.meta("barrier", sig6(p.contract.barrier));
    t.meta("schedule", p.contract.schedule.iter().map(|x| sig6(*x)).collect::<Vec<_>>().join(" "));
    t.meta("talbot_m", p.params.talbot_m);
    if p.contract.kind == hyperbar_core::pricing::ContractKind::DownAndInCall {
        t.meta("fft_n", p.params.fft_n);
        t.meta("fft_delta", p.params.fft_delta);
        t.meta("damp_alpha", p.params.damp_alpha);
    }
}

fn cmd_price(a: &ContractArgs) -> Result<Table, CliError> {
    let p = prepare(a)?;
    let rows = book(&p)?;
    let disc = (-p.model.r() * p.model.total_maturity()).exp();
    let mut t = match p.contract.kind {
        hyperbar_core::pricing::ContractKind::DownAndInDigital => Table::new(&["spot_pct", "price", "down_and_out"]),
        hyperbar_core::pricing::ContractKind::DownAndInCall => Table::new(&["strike_pct", "price", "on_grid"]),
    };
    add_params_meta(&mut t, &p);
    for (pct, r) in p.pcts.iter().zip(&rows) {
        let last = match r.snapped {
            Some(s) => Cell::Flag(s),
            None => Cell::Num(disc - r.price),
        };
        t.push(vec![Cell::Num(*pct), Cell::Num(r.price), last]);
    }
    Ok(t)
}

/// Greek scales as printed in the result tables.
fn greek_scales(kind: hyperbar_core::pricing::ContractKind) -> (f64, f64, &'static str, &'static str) {
    match kind {
        hyperbar_core::pricing::ContractKind::DownAndInDigital => (1e-3, 1e-6, "delta_x1e-3", "gamma_x1e-6"),
        hyperbar_core::pricing::ContractKind::DownAndInCall => (1e-1, 1e-4, "delta_x1e-1", "gamma_x1e-4"),
    }
}

fn cmd_greeks(a: &ContractArgs) -> Result<Table, CliError> {
    let p = prepare(a)?;
    let rows = book(&p)?;
    let (ds, gs, dn, gn) = greek_scales(p.contract.kind);
    let mut t = Table::new(&[level_column(&p), "price", dn, gn]);
    add_params_meta(&mut t, &p);
    t.meta("greeks", if a.fd_bump.is_some() { "finite-difference" } else { "analytic" });
    for (pct, r) in p.pcts.iter().zip(&rows) {
        t.push(vec![
            Cell::Num(*pct),
            Cell::Num(r.price),
            Cell::Num(r.delta.unwrap_or(f64::NAN) / ds),
            Cell::Num(r.gamma.unwrap_or(f64::NAN) / gs),
        ]);
    }
    Ok(t)
}

fn cmd_validate(a: &ContractArgs, mc: &McArgs) -> Result<Table, CliError> {
    let p = prepare(a)?;
    let rows = book(&p)?;
    let cfg = McConfig { paths: mc.mc_paths, dt: mc.mc_dt, seed: mc.seed, antithetic: mc.antithetic, ..McConfig::default() };
    let task = montecarlo::barrier_book_task(&p.model, &p.contract, &p.levels, &cfg).context("montecarlo")?;
    let est = parallel::run(&task);
    let mut t = Table::new(&[level_column(&p), "ta_price", "mc_price", "mc_ci_low", "mc_ci_high", "inside_ci"]);
    add_params_meta(&mut t, &p);
    t.meta("mc_paths", cfg.paths);
    t.meta("mc_dt", cfg.dt);
    t.meta("seed", cfg.seed);
    let mut inside = 0;
    for ((pct, r), e) in p.pcts.iter().zip(&rows).zip(&est) {
        let ok = e.contains(r.price);
        inside += ok as usize;
        t.push(vec![Cell::Num(*pct), Cell::Num(r.price), Cell::Num(e.mean), Cell::Num(e.ci_low), Cell::Num(e.ci_high), Cell::Flag(ok)]);
    }
    t.meta("inside_ci", format!("{inside} of {}", rows.len()));
    Ok(t)
}

fn cmd_european(a: &EuropeanArgs) -> Result<Table, CliError> {
    let m = load_model(&a.model)?;
    let pcts = parse_list(&a.strikes)?;
    let strikes: Vec<f64> = pcts.iter().map(|p| p / 100.0 * m.spot()).collect();
    let idx: Vec<usize> = match a.maturity_index {
        Some(i) if i >= 1 && i <= m.num_periods() => vec![i],
        Some(i) => return Err(CliError::usage(format!("--maturity-index {i} outside 1..={}", m.num_periods()))),
        None => (1..=m.num_periods()).collect(),
    };
    let mats = m.maturities();
    let mut t = Table::new(&["maturity", "strike_pct", "strike", "price"]);
    t.meta("damp_alpha", a.damp_alpha);
    for i in idx {
        let prices = european_calls_quadrature(&m, i, &strikes, a.damp_alpha).context("transforms")?;
        for ((pct, k), price) in pcts.iter().zip(&strikes).zip(prices) {
            t.push(vec![Cell::Num(mats[i - 1]), Cell::Num(*pct), Cell::Num(*k), Cell::Num(price)]);
        }
    }
    Ok(t)
}

fn cmd_calibrate(a: &CalibrateArgs, format: Format) -> Result<String, CliError> {
    let template = load_model(&a.model)?;
    let quotes = load_quotes(&a.quotes)?;
    let first = &template.periods()[0];
    let setup = CalibrationSetup {
        alpha_plus: first.pos_jumps.iter().map(|f| f.rate).collect(),
        fit_positive: a.fit_positive,
        multistarts: a.multistarts,
        seed: a.seed,
        damp_alpha: a.damp_alpha,
        optimizer: NelderMeadOptions::default(),
        ..CalibrationSetup::new(
            template.durations(),
            template.r(),
            template.d(),
            template.spot(),
            first.neg_jumps.iter().map(|f| f.rate).collect(),
        )
    };
    let res = bootstrap_calibrate(&quotes, &setup).context("calibration")?;
    let n_minus = setup.alpha_minus.len();
    match format {
        Format::Json => {
            let fits: Vec<_> = res
                .fits
                .iter()
                .map(|f| {
                    json!({
                        "maturity": f.maturity,
                        "sigma": f.params[0],
                        "pi_minus": f.params[1..1 + n_minus],
                        "pi_plus": f.params[1 + n_minus..],
                        "rmse": f.rmse,
                        "evaluations": f.evals,
                        "converged": f.converged,
                        "objective_trace": f.trace,
                    })
                })
                .collect();
            let doc = json!({
                "model": ModelFile::from_model(&res.model, JumpWeights::Density),
                "rmse": res.rmse,
                "arpe": res.arpe,
                "converged": res.converged(),
                "fits": fits,
            });
            Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
        }
        Format::Csv => {
            let mut t = Table::new(&["maturity", "sigma", "pi_minus", "pi_plus", "rmse", "evaluations", "converged"]);
            t.meta("rmse", sig6(res.rmse));
            t.meta("arpe", sig6(res.arpe));
            t.meta("jump_weights", "density");
            let join = |v: &[f64]| v.iter().map(|x| sig6(*x)).collect::<Vec<_>>().join(" ");
            for f in &res.fits {
                t.push(vec![
                    Cell::Num(f.maturity),
                    Cell::Num(f.params[0]),
                    Cell::Text(join(&f.params[1..1 + n_minus])),
                    Cell::Text(join(&f.params[1 + n_minus..])),
                    Cell::Num(f.rmse),
                    Cell::Int(f.evals as i64),
                    Cell::Flag(f.converged),
                ]);
            }
            Ok(t.render(Format::Csv))
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        // A second initialisation in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let text = match &cli.command {
        Command::Price(a) => cmd_price(a)?.render(cli.format),
        Command::Greeks(a) => cmd_greeks(a)?.render(cli.format),
        Command::Validate { contract, mc } => cmd_validate(contract, mc)?.render(cli.format),
        Command::European(a) => cmd_european(a)?.render(cli.format),
        Command::Calibrate(a) => cmd_calibrate(a, cli.format)?,
    };
    emit(&text, cli.out.as_deref())
}
