//! Command-line front end.
//!
//! Commands that produce artifacts print the main one to stdout, or with
//! `--out DIR` write every artifact into `DIR` together with a
//! `manifest.json` describing the run.

mod data;
mod manifest;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use data::{
    groups_to_csv, load_counts_csv, load_groups_csv, load_rat_tumor, parse_counts_csv, parse_groups_csv, RAT_TUMOR_CSV,
};
pub use manifest::{fingerprint, write_atomic, RunManifest, MANIFEST_FILE};

use crate::closeness::{
    conditional_curves, conditional_theta_given_mu, interpret_dirichlet, log_joint_unnormalized,
    log_marginal_mu_unnormalized, BaseMeasure, DensityMode, RemotenessSpec, ReverseConditional,
};
use crate::hdm::{cpt_estimate, jeffreys_baseline, run_hdm, ContingencyCounts, GammaMode, HdmConfig};
use crate::inference::{
    diagnostics, grid_posterior, posterior_summary, run_sampler, sensitivity_sweep, BetaPrior, ChainSet,
    ClosenessModelConfig, GammaPrior, GelmanModelConfig, GridSpec, Model, ObservedGroups, ParamSummary, SamplerConfig,
    UpdateScheme,
};
use crate::manifold::{fisher_log_sqrt_det, kl_divergence, manifold_volume, volume_argmax, volume_table, SimplexPoint};
use crate::quadrature::QuadratureConfig;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "closeness", version, about = "KL closeness distributions and hierarchical Beta/Dirichlet inference")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// KL divergence D(mu || theta).
    Kl {
        #[arg(long, value_delimiter = ',', required = true)]
        mu: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
    },
    /// Volume of the multinomial manifold M_n.
    Volume {
        #[arg(long, conflicts_with_all = ["table", "argmax"])]
        n: Option<usize>,
        /// Print `n,volume` for n = 1..=TABLE.
        #[arg(long)]
        table: Option<usize>,
        /// Print the n in 1..=ARGMAX with the largest volume.
        #[arg(long)]
        argmax: Option<usize>,
    },
    /// Point evaluation of closeness densities (log scale).
    Density(DensityArgs),
    /// Both conditionals on M_1 over [0, 1].
    ConditionalCurves {
        #[arg(long, default_value_t = 0.4)]
        anchor: f64,
        #[arg(long, default_value_t = 10.0)]
        gamma: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long)]
        quad_points: Option<usize>,
        #[arg(long, default_value = "fisher")]
        base_measure: BaseMeasure,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sample a hierarchical model for grouped binomial data.
    Fit {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Normalized log posterior on a grid of transformed hyperparameters.
    Grid {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        x_count: Option<usize>,
        #[arg(long)]
        y_count: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Refit the closeness model under several Gamma prior rates.
    Sensitivity {
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.1,0.01")]
        rates: Vec<f64>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Estimate a conditional probability table with the hierarchical Dirichlet model.
    Cpt {
        /// Long-form CSV with header `x,y,count`.
        #[arg(long)]
        counts: PathBuf,
        /// Fix gamma instead of giving it a Gamma prior.
        #[arg(long)]
        fixed_gamma: Option<f64>,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Read a Dirichlet as a closeness conditional.
    Interpret {
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        #[arg(long, default_value = "fisher")]
        base_measure: BaseMeasure,
    },
    /// Dump the embedded rat-tumor table as `y,n` CSV.
    Dataset {
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    Joint,
    Marginal,
    Conditional,
    Reverse,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub kind: DensityKind,
    #[arg(long, value_delimiter = ',')]
    pub mu: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<f64>,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value = "fisher")]
    pub base_measure: BaseMeasure,
    /// Density against the base measure (default).
    #[arg(long, conflicts_with = "integration")]
    pub intrinsic: bool,
    /// Density against Lebesgue measure in the expectation chart.
    #[arg(long)]
    pub integration: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Closeness,
    Gelman,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    #[arg(long)]
    pub base_measure: Option<BaseMeasure>,
    /// `rats` for the embedded table or a path to a `y,n` CSV.
    #[arg(long, default_value = "rats")]
    pub data: String,
    #[arg(long)]
    pub gamma_shape: Option<f64>,
    #[arg(long)]
    pub gamma_rate: Option<f64>,
    #[arg(long)]
    pub prior_exponent: Option<f64>,
    /// JSON config file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SamplerArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// `STEP_MU,STEP_GAMMA` in the transformed chart.
    #[arg(long, value_parser = parse_scales)]
    pub proposal_scales: Option<[f64; 2]>,
    #[arg(long)]
    pub no_adapt: bool,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeName {
    Collapsed,
    Uncollapsed,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Directory for artifacts and the run manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// JSON config file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<ModelName>,
    pub base_measure: Option<BaseMeasure>,
    pub mu_prior: Option<BetaPrior>,
    pub gamma_prior: Option<GammaPrior>,
    pub prior_exponent: Option<f64>,
    pub sampler: Option<SamplerConfig>,
    pub grid: Option<GridSpec>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
            }
        }
    }
}

fn resolve_model(args: &ModelArgs, file: &FileConfig) -> Model {
    match args.model.or(file.model).unwrap_or(ModelName::Closeness) {
        ModelName::Closeness => {
            let mut c = ClosenessModelConfig::default();
            if let Some(p) = file.mu_prior {
                c.mu_prior = p;
            }
            if let Some(p) = file.gamma_prior {
                c.gamma_prior = p;
            }
            if let Some(b) = args.base_measure.or(file.base_measure) {
                c.base_measure = b;
            }
            if let Some(s) = args.gamma_shape {
                c.gamma_prior.shape = s;
            }
            if let Some(r) = args.gamma_rate {
                c.gamma_prior.rate = r;
            }
            Model::Closeness(c)
        }
        ModelName::Gelman => {
            let mut g = GelmanModelConfig::default();
            if let Some(e) = args.prior_exponent.or(file.prior_exponent) {
                g.prior_exponent = e;
            }
            Model::Gelman(g)
        }
    }
}

fn parse_scales(s: &str) -> std::result::Result<[f64; 2], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 2]>::try_from(v.as_slice()).map_err(|_| format!("expected two comma-separated values, got {}", v.len()))
}

fn resolve_sampler(args: &SamplerArgs, file: Option<&SamplerConfig>) -> SamplerConfig {
    let mut s = file.cloned().unwrap_or_default();
    if let Some(v) = args.seed {
        s.seed = v;
    }
    if let Some(v) = args.chains {
        s.chains = v;
    }
    if let Some(v) = args.iterations {
        s.iterations = v;
    }
    if let Some(v) = args.burn_in {
        s.burn_in = v;
    }
    if let Some(v) = args.proposal_scales {
        s.proposal_scales = v;
    }
    if args.no_adapt {
        s.adapt = false;
    }
    match args.scheme {
        Some(SchemeName::Collapsed) => s.scheme = UpdateScheme::Collapsed,
        Some(SchemeName::Uncollapsed) => s.scheme = UpdateScheme::Uncollapsed,
        None => {}
    }
    s
}

fn load_data(spec: &str) -> Result<ObservedGroups> {
    if spec == "rats" {
        Ok(load_rat_tumor())
    } else {
        load_groups_csv(Path::new(spec))
    }
}

fn point(coords: &[f64], what: &str) -> Result<SimplexPoint> {
    SimplexPoint::try_from(coords.to_vec()).map_err(|e| Error::Config(format!("--{what}: {e}")))
}

/// Artifacts of one command: the first is the one printed without `--out`.
struct Output {
    manifest: RunManifest,
    files: Vec<(String, Vec<u8>)>,
}

impl Output {
    fn new(command: &str, config: Value) -> Self {
        Self { manifest: RunManifest::new(command, config), files: Vec::new() }
    }

    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    fn dataset(&mut self, data: &ObservedGroups) {
        self.manifest.dataset_sha256 = Some(fingerprint(groups_to_csv(data).as_bytes()));
    }

    fn emit(mut self, out: &OutArgs, stdout: &mut dyn std::io::Write) -> Result<()> {
        match &out.out {
            None => {
                if let Some((_, bytes)) = self.files.first() {
                    stdout.write_all(bytes)?;
                }
            }
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                for (name, bytes) in &self.files {
                    write_atomic(&dir.join(name), bytes)?;
                    self.manifest.artifacts.push(PathBuf::from(name));
                }
                let mut m = serde_json::to_vec_pretty(&self.manifest).map_err(|e| Error::Numeric(e.to_string()))?;
                m.push(b'\n');
                write_atomic(&dir.join(MANIFEST_FILE), &m)?;
            }
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(|e| Error::Numeric(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("config types serialize")
}

fn summary_record(s: &ParamSummary) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("mean".into(), json!(s.mean));
    m.insert("sd".into(), json!(s.sd));
    for (k, q) in ["q2.5", "q25", "q50", "q75", "q97.5"].iter().zip(s.quantiles) {
        m.insert((*k).into(), json!(q));
    }
    m
}

/// Per-parameter summary and diagnostics keyed by parameter name.
fn summary_json(chains: &ChainSet, extra: &[(&str, Vec<Vec<f64>>)]) -> Result<Value> {
    let mut out = serde_json::Map::new();
    let diag = diagnostics(chains).ok();
    for (i, (name, s)) in posterior_summary(chains)?.into_iter().enumerate() {
        let mut rec = summary_record(&s);
        if let Some(d) = diag.as_ref().map(|d| &d[i]) {
            rec.insert("rhat".into(), json!(d.split_rhat));
            rec.insert("ess".into(), json!(d.ess));
        }
        out.insert(name, Value::Object(rec));
    }
    for (name, cols) in extra {
        let mut rec = summary_record(&ParamSummary::of(&cols.concat())?);
        rec.insert("rhat".into(), json!(crate::inference::split_rhat(cols)));
        rec.insert("ess".into(), json!(crate::inference::effective_sample_size(cols)));
        out.insert((*name).into(), Value::Object(rec));
    }
    let mut acc = serde_json::Map::new();
    for (c, chain) in chains.chains.iter().enumerate() {
        acc.insert(c.to_string(), json!(chain.acceptance));
    }
    out.insert("acceptance".into(), Value::Object(acc));
    Ok(Value::Object(out))
}

fn samples_csv(chains: &ChainSet) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    chains.write_csv(&mut buf)?;
    Ok(buf)
}

fn scalar(v: f64) -> Vec<u8> {
    format!("{v}\n").into_bytes()
}

/// Runs one parsed command, writing console output to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn std::io::Write) -> Result<()> {
    match cli.command {
        Command::Kl { mu, theta } => {
            let d = kl_divergence(&point(&mu, "mu")?, &point(&theta, "theta")?)?;
            stdout.write_all(&scalar(d))?;
        }
        Command::Volume { n, table, argmax } => {
            if let Some(max) = table {
                let mut s = String::from("n,volume\n");
                for (n, v) in volume_table(max)? {
                    s.push_str(&format!("{n},{v}\n"));
                }
                stdout.write_all(s.as_bytes())?;
            } else if let Some(max) = argmax {
                writeln!(stdout, "{}", volume_argmax(max)?)?;
            } else {
                let n = n.ok_or_else(|| Error::Config("give --n, --table or --argmax".into()))?;
                stdout.write_all(&scalar(manifold_volume(n)?))?;
            }
        }
        Command::Density(a) => stdout.write_all(&scalar(density(&a)?))?,
        Command::ConditionalCurves { anchor, gamma, points, quad_points, base_measure, out } => {
            let spec = RemotenessSpec::new(gamma, base_measure, 1)?;
            let mut quad = QuadratureConfig::default_for(1);
            if let Some(p) = quad_points {
                quad = quad.with_points(p);
            }
            let curves = conditional_curves(&spec, anchor, points, &quad)?;
            let mut csv = String::from("x,theta_given_mu,mu_given_theta\n");
            for c in &curves {
                csv.push_str(&format!("{},{},{}\n", c.x, c.theta_given_mu, c.mu_given_theta));
            }
            let cfg = json!({"anchor": anchor, "gamma": gamma, "points": points, "base_measure": base_measure, "quadrature": quad});
            let mut o = Output::new("conditional-curves", cfg);
            o.add("curves.csv", csv.into_bytes());
            o.emit(&out, stdout)?;
        }
        Command::Fit { model, sampler, out } => {
            let file = FileConfig::load(model.config.as_deref())?;
            let m = resolve_model(&model, &file);
            let s = resolve_sampler(&sampler, file.sampler.as_ref());
            let data = load_data(&model.data)?;
            let chains = run_sampler(&m, &data, &s)?;
            let extra = match m {
                Model::Gelman(_) => vec![("alpha_over_total", chains.map_rows(|r| r[0] / (r[0] + r[1])))],
                Model::Closeness(_) => vec![],
            };
            let summary = summary_json(&chains, &extra)?;
            let mut o = Output::new("fit", json!({"data": model.data, "model": value(&m), "sampler": value(&s)}));
            o.manifest.seed = Some(s.seed);
            o.dataset(&data);
            o.add("summary.json", to_json(&summary)?);
            o.add("samples.csv", samples_csv(&chains)?);
            o.emit(&out, stdout)?;
        }
        Command::Grid { model, x_count, y_count, out } => {
            let file = FileConfig::load(model.config.as_deref())?;
            let m = resolve_model(&model, &file);
            let mut spec = file.grid.clone().unwrap_or_else(|| GridSpec::for_model(&m));
            if let Some(c) = x_count {
                spec.x.count = c;
            }
            if let Some(c) = y_count {
                spec.y.count = c;
            }
            let data = load_data(&model.data)?;
            let g = grid_posterior(&m, &data, &spec)?;
            let mut csv = Vec::new();
            g.write_csv(&mut csv)?;
            let mut o = Output::new(
                "grid",
                json!({"data": model.data, "model": value(&m), "grid": value(&spec), "transform": g.transform}),
            );
            o.dataset(&data);
            o.add("grid.csv", csv);
            o.emit(&out, stdout)?;
        }
        Command::Sensitivity { rates, model, sampler, out } => {
            let file = FileConfig::load(model.config.as_deref())?;
            let base = match resolve_model(&model, &file) {
                Model::Closeness(c) => c,
                Model::Gelman(_) => return Err(Error::Config("sensitivity applies to the closeness model".into())),
            };
            let s = resolve_sampler(&sampler, file.sampler.as_ref());
            let data = load_data(&model.data)?;
            let rows = sensitivity_sweep(&data, &rates, &base, &s)?;
            let mut o = Output::new(
                "sensitivity",
                json!({"data": model.data, "rates": rates, "model": value(&Model::Closeness(base)), "sampler": value(&s)}),
            );
            o.manifest.seed = Some(s.seed);
            o.dataset(&data);
            o.add("sensitivity.json", to_json(&rows)?);
            o.emit(&out, stdout)?;
        }
        Command::Cpt { counts, fixed_gamma, sampler, config, out } => {
            let file = FileConfig::load(config.as_deref())?;
            let mut cfg = HdmConfig::default();
            if let Some(p) = file.gamma_prior {
                cfg.gamma = GammaMode::Prior(p);
            }
            if let Some(b) = file.base_measure {
                cfg.base_measure = b;
            }
            if let Some(g) = fixed_gamma {
                cfg.gamma = GammaMode::Fixed(g);
            }
            let s = resolve_sampler(&sampler, file.sampler.as_ref());
            let table: ContingencyCounts = load_counts_csv(&counts)?;
            let chains = run_hdm(&table, &cfg, &s)?;
            let result = json!({
                "hdm": cpt_estimate(&chains)?,
                "jeffreys": jeffreys_baseline(&table),
                "summary": summary_json(&chains, &[])?,
            });
            let mut o = Output::new("cpt", json!({"counts": counts, "hdm": value(&cfg), "sampler": value(&s)}));
            o.manifest.seed = Some(s.seed);
            o.manifest.dataset_sha256 = Some(fingerprint(&to_json(&table)?));
            o.add("cpt.json", to_json(&result)?);
            o.add("samples.csv", samples_csv(&chains)?);
            o.emit(&out, stdout)?;
        }
        Command::Interpret { alpha, base_measure } => {
            let i = interpret_dirichlet(&alpha, base_measure)?;
            stdout.write_all(&to_json(&i)?)?;
        }
        Command::Dataset { out } => {
            let data = load_rat_tumor();
            let mut o = Output::new("dataset", json!({"data": "rats"}));
            o.dataset(&data);
            o.add("rat_tumor.csv", groups_to_csv(&data).into_bytes());
            o.emit(&out, stdout)?;
        }
    }
    Ok(())
}

fn density(a: &DensityArgs) -> Result<f64> {
    let mode = if a.integration { DensityMode::Integration } else { DensityMode::Intrinsic };
    let fisher_chart = a.base_measure == BaseMeasure::Fisher && mode == DensityMode::Integration;
    let need = |v: &[f64], what: &str| {
        if v.is_empty() {
            Err(Error::Config(format!("--kind {:?} needs --{what}", a.kind).to_lowercase()))
        } else {
            point(v, what)
        }
    };
    match a.kind {
        DensityKind::Joint => {
            let (mu, theta) = (need(&a.mu, "mu")?, need(&a.theta, "theta")?);
            let spec = RemotenessSpec::new(a.gamma, a.base_measure, mu.dim())?;
            let p = log_joint_unnormalized(&spec, &mu, &theta)?;
            Ok(if fisher_chart { p + fisher_log_sqrt_det(&mu) + fisher_log_sqrt_det(&theta) } else { p })
        }
        DensityKind::Marginal => {
            let mu = need(&a.mu, "mu")?;
            let spec = RemotenessSpec::new(a.gamma, a.base_measure, mu.dim())?;
            let p = log_marginal_mu_unnormalized(&spec, &mu)?;
            Ok(if fisher_chart { p + fisher_log_sqrt_det(&mu) } else { p })
        }
        DensityKind::Conditional => {
            let (mu, theta) = (need(&a.mu, "mu")?, need(&a.theta, "theta")?);
            let spec = RemotenessSpec::new(a.gamma, a.base_measure, mu.dim())?;
            conditional_theta_given_mu(&spec, &mu)?.log_density(&theta, mode)
        }
        DensityKind::Reverse => {
            let (mu, theta) = (need(&a.mu, "mu")?, need(&a.theta, "theta")?);
            let spec = RemotenessSpec::new(a.gamma, a.base_measure, mu.dim())?;
            ReverseConditional::new(&spec, &theta, &QuadratureConfig::default_for(spec.n()))?.log_density(&mu, mode)
        }
    }
}

/// Parses `args`, runs the command and maps errors to exit codes:
/// 0 on success, 2 for usage, input and configuration errors, 3 for
/// numeric or sampler failures.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut stdout = std::io::stdout().lock();
    match execute(cli, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<String> {
        let cli = Cli::try_parse_from(std::iter::once("closeness").chain(args.iter().copied()))
            .map_err(|e| Error::Config(e.to_string()))?;
        let mut buf = Vec::new();
        execute(cli, &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn scalar_commands() {
        assert!(run(&["volume", "--n", "1"]).unwrap().starts_with("3.14159265"));
        assert_eq!(run(&["volume", "--argmax", "12"]).unwrap(), "6\n");
        assert_eq!(run(&["volume", "--table", "2"]).unwrap().lines().count(), 3);
        let kl: f64 = run(&["kl", "--mu", "0.25,0.75", "--theta", "0.5,0.5"]).unwrap().trim().parse().unwrap();
        assert!((kl - 0.130_812_0).abs() < 1e-7);
        let i: Value = serde_json::from_str(&run(&["interpret", "--alpha", "2.5,1.5"]).unwrap()).unwrap();
        assert_eq!(i["kind"], "centered");
        assert!((i["gamma"].as_f64().unwrap() - 3.0).abs() < 1e-12);
        assert!((i["mu"][0].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn density_modes() {
        let intrinsic: f64 =
            run(&["density", "--kind", "conditional", "--mu", "0.5,0.5", "--theta", "0.5,0.5", "--gamma", "3"])
                .unwrap()
                .trim()
                .parse()
                .unwrap();
        let integ: f64 = run(&[
            "density",
            "--kind",
            "conditional",
            "--mu",
            "0.5,0.5",
            "--theta",
            "0.5,0.5",
            "--gamma",
            "3",
            "--integration",
        ])
        .unwrap()
        .trim()
        .parse()
        .unwrap();
        assert!((integ - intrinsic - 2.0_f64.ln()).abs() < 1e-12);
        assert!(run(&["density", "--kind", "joint", "--mu", "0.5,0.5", "--gamma", "1"]).is_err());
    }

    #[test]
    fn config_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(
            &p,
            r#"{"model":"closeness","gamma_prior":{"shape":2.0,"rate":0.5},"sampler":{"seed":7,"chains":3}}"#,
        )
        .unwrap();
        let file = FileConfig::load(Some(&p)).unwrap();
        let args = ModelArgs {
            model: None,
            base_measure: None,
            data: "rats".into(),
            gamma_shape: None,
            gamma_rate: Some(0.01),
            prior_exponent: None,
            config: Some(p.clone()),
        };
        match resolve_model(&args, &file) {
            Model::Closeness(c) => assert_eq!(c.gamma_prior, GammaPrior { shape: 2.0, rate: 0.01 }),
            other => panic!("{other:?}"),
        }
        let s = resolve_sampler(
            &SamplerArgs {
                seed: Some(9),
                chains: None,
                iterations: None,
                burn_in: None,
                proposal_scales: None,
                no_adapt: false,
                scheme: None,
            },
            file.sampler.as_ref(),
        );
        assert_eq!((s.seed, s.chains, s.iterations), (9, 3, 10_000));
        std::fs::write(&p, r#"{"modle":"closeness"}"#).unwrap();
        assert!(matches!(FileConfig::load(Some(&p)), Err(Error::Config(_))));
    }
}
