//! Command-line front end for the `h2xh2` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::parallel::{isoparametric_scan, ScanReport};
use crate::verify::tables::{poincare_dump, table, TableFormat, TableName};
use crate::verify::{
    parse_tolerance, run_suite, sobol_points, write_atomic, ConfigError, Format, LGrid, SuiteConfig,
};
use crate::zoo::{CurvatureSpec, Family, ModelSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "h2xh2", version, about = "Hypersurfaces of H2 x H2: identity checks, parallel flows and tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the identity suite on one model.
    Verify(VerifyArgs),
    /// Scan parallel hypersurfaces over an l-grid.
    Parallel(ParallelArgs),
    /// Print a fixed table.
    Table(TableArgs),
    /// Write chart grid points projected to the Poincaré disk as CSV.
    PoincareDump(DumpArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// M_Gamma, M_kk, M_11, M_1m1 or M_tau.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long = "kappa-gamma", allow_hyphen_values = true)]
    pub kappa_gamma: Option<f64>,
    /// Curvature of the first generating curve: a number, `tanh` or `tanh:<scale>:<shift>`.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<CurvatureSpec>,
    /// Curvature of the second generating curve; defaults to `--kappa`.
    #[arg(long = "kappa-tilde", allow_hyphen_values = true)]
    pub kappa_tilde: Option<CurvatureSpec>,
}

#[derive(Debug, Clone, Args)]
pub struct SuiteArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// JSON configuration file; command-line flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u32>,
    /// `start:stop:step`.
    #[arg(long = "l-grid", allow_hyphen_values = true)]
    pub l_grid: Option<LGrid>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub suite: SuiteArgs,
    /// Override one tolerance, `name=value`; repeatable.
    #[arg(long = "tol", value_parser = parse_tolerance)]
    pub tol: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Args)]
pub struct ParallelArgs {
    #[command(flatten)]
    pub suite: SuiteArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(value_enum)]
    pub which: TableName,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    pub format: TableFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Grid points per chart coordinate.
    #[arg(long, default_value_t = 9)]
    pub n: usize,
}

fn need(v: Option<f64>, flag: &str, kind: &str) -> Result<f64, ConfigError> {
    v.ok_or_else(|| ConfigError::Invalid(format!("{kind} needs --{flag}")))
}

impl ModelArgs {
    fn given(&self) -> bool {
        self.model.is_some()
    }

    pub fn spec(&self) -> Result<ModelSpec, ConfigError> {
        let kind = self
            .model
            .as_deref()
            .ok_or_else(|| ConfigError::Invalid("no model given (use --model or --config)".into()))?;
        let family = match kind {
            "M_Gamma" => Family::Gamma {
                kappa_gamma: need(self.kappa_gamma, "kappa-gamma", kind)?,
            },
            "M_kk" => {
                let kappa = self
                    .kappa
                    .ok_or_else(|| ConfigError::Invalid("M_kk needs --kappa".into()))?;
                Family::Kk {
                    c: need(self.c, "c", kind)?,
                    kappa,
                    kappa_tilde: self.kappa_tilde.unwrap_or(kappa),
                }
            }
            "M_11" => Family::OneOne {
                c: need(self.c, "c", kind)?,
            },
            "M_1m1" => Family::OneMinusOne {
                c: need(self.c, "c", kind)?,
            },
            "M_tau" => Family::Tau {
                tau: need(self.tau, "tau", kind)?,
            },
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown model '{other}' (expected M_Gamma, M_kk, M_11, M_1m1 or M_tau)"
                )))
            }
        };
        Ok(family.into())
    }
}

impl SuiteArgs {
    /// Merges the configuration file, if any, with the flags.
    pub fn config(&self) -> Result<SuiteConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let mut cfg = SuiteConfig::from_json_file(path)?;
                if self.model.given() {
                    cfg.model = self.model.spec()?;
                }
                cfg
            }
            None => SuiteConfig::new(self.model.spec()?),
        };
        if let Some(n) = self.samples {
            cfg.samples = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(g) = self.l_grid {
            cfg.l_grid = g;
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        Ok(cfg)
    }
}

/// Output of `parallel`.
#[derive(Debug, Serialize)]
pub struct ParallelReport {
    pub config: SuiteConfig,
    pub n_points: usize,
    pub scan: ScanReport,
}

impl ParallelReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,h_min,h_max,h_spread,lambda1_spread,lambda2_spread,lambda3_spread,det_min,det_first,focal\n");
        for r in &self.scan.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.l,
                r.h_min,
                r.h_max,
                r.h_spread,
                r.lambda_spread[0],
                r.lambda_spread[1],
                r.lambda_spread[2],
                r.det_min,
                r.det_first,
                r.focal
            ));
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serialises");
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv(),
        }
    }
}

/// Points used by `parallel`: at most 20 of the configured samples.
pub const PARALLEL_POINTS: usize = 20;

pub fn run_parallel(cfg: SuiteConfig) -> Result<ParallelReport, ConfigError> {
    let cfg = cfg.resolve()?;
    let model = cfg.model.build()?;
    let n = cfg.samples.min(PARALLEL_POINTS);
    let pts = sobol_points(&model.surface.domain, n, cfg.seed);
    let scan = isoparametric_scan(&model.surface, &pts, &cfg.l_grid.values())?;
    Ok(ParallelReport {
        config: cfg,
        n_points: n,
        scan,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), ConfigError> {
    match out {
        Some(path) => write_atomic(path, text).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(args: VerifyArgs) -> Result<i32, ConfigError> {
    let mut cfg = args.suite.config()?;
    cfg.tolerances.extend(args.tol);
    let report = run_suite(cfg)?;
    emit(report.config.output.as_deref(), &report.render(report.config.format))?;
    let failures: Vec<_> = report.failures().collect();
    if failures.is_empty() {
        return Ok(EXIT_OK);
    }
    eprintln!("{} check(s) failed:", failures.len());
    for f in failures {
        let r = f.max_residual.map_or("n/a".to_string(), |r| format!("{r:e}"));
        eprintln!("  {}: residual {r} > tolerance {:e} {}", f.name, f.tolerance, f.notes);
    }
    Ok(EXIT_FAIL)
}

fn parallel(args: ParallelArgs) -> Result<i32, ConfigError> {
    let report = run_parallel(args.suite.config()?)?;
    emit(report.config.output.as_deref(), &report.render(report.config.format))?;
    Ok(EXIT_OK)
}

fn print_table(args: TableArgs) -> Result<i32, ConfigError> {
    let t = table(args.which)?;
    emit(args.out.as_deref(), &t.render(args.format))?;
    Ok(EXIT_OK)
}

fn dump(args: DumpArgs) -> Result<i32, ConfigError> {
    if args.n < 2 {
        return Err(ConfigError::Invalid("--n must be at least 2".into()));
    }
    let model = args.model.spec()?.build()?;
    let csv = poincare_dump(&model, args.n)?;
    emit(Some(&args.out), &csv)?;
    Ok(EXIT_OK)
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let res = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Parallel(a) => parallel(a),
        Command::Table(a) => print_table(a),
        Command::PoincareDump(a) => dump(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("h2xh2").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn model_flags() {
        let Command::Verify(v) = parse(&["verify", "--model", "M_tau", "--tau", "-2"]).command else {
            panic!()
        };
        assert_eq!(v.suite.model.spec().unwrap().family, Family::Tau { tau: -2.0 });
        let Command::Verify(v) = parse(&["verify", "--model", "M_kk", "--c", "0.5", "--kappa", "tanh"]).command else {
            panic!()
        };
        let spec = v.suite.model.spec().unwrap();
        assert!(matches!(spec.family, Family::Kk { kappa_tilde: CurvatureSpec::Tanh { .. }, .. }));
    }

    #[test]
    fn missing_parameter_is_a_config_error() {
        let Command::Verify(v) = parse(&["verify", "--model", "M_11"]).command else {
            panic!()
        };
        assert!(v.suite.model.spec().unwrap_err().to_string().contains("--c"));
    }

    #[test]
    fn tolerance_and_grid_flags() {
        let Command::Verify(v) = parse(&["verify", "--model", "M_11", "--c", "0.3", "--tol", "gauss=1e-3", "--l-grid", "-1:1:0.1"]).command else {
            panic!()
        };
        assert_eq!(v.tol, vec![("gauss".to_string(), 1e-3)]);
        assert_eq!(v.suite.config().unwrap().l_grid, LGrid { start: -1.0, stop: 1.0, step: 0.1 });
    }

    #[test]
    fn tube_scan_flags_the_focal_row() {
        let mut cfg = SuiteConfig::new(Family::Tau { tau: -2.0 }.into());
        cfg.samples = 4;
        cfg.l_grid = "-0.5:1.2:0.01".parse().unwrap();
        let r = run_parallel(cfg).unwrap();
        let focal: Vec<f64> = r.scan.rows.iter().filter(|r| r.focal).map(|r| r.l).collect();
        assert!(!focal.is_empty());
        assert!(focal.iter().all(|l| (l - 0.9312).abs() < 0.05), "{focal:?}");
    }
}
