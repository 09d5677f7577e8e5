//! Command-line front end: wires networks and datasets on disk to the
//! landscape operations and writes JSON reports.
//!
//! Exit codes: 0 on success, 1 on a domain error (a violated mathematical
//! contract), 2 on I/O or parse failures.

use clap::{Args, Parser, Subcommand, ValueEnum};
use landscape_lab::cost::{CostReport, EmpiricalMeasure, Regularizer};
use landscape_lab::efficiency::{
    activation_admissibility, in_e0, poly_efficiency_rank, taxonomy, Lambda, PolyPattern,
    ToleranceConfig,
};
use landscape_lab::error::Error as LabError;
use landscape_lab::experiments::{
    certify_efficient_minimum, find_critical_points, median_pairwise_distance, morse_mc,
    redundant_critical_demo, DemoConfig, Kernel, MorseConfig, SearchConfig,
};
use landscape_lab::io::{
    csv_float, dataset_from_csv, network_from_json, network_to_json, Dataset, ReportEnvelope,
};
use landscape_lab::net::{Activation, Network};
use landscape_lab::polyslice::{
    default_vandermonde_nodes, generalized_vandermonde_det, is_zero_by_slicing, random_directions,
    slice as poly_slice, vandermonde_directions, Polynomial,
};
use landscape_lab::transforms::{
    criticality_along_line, extend_deactivated_bias, extend_duplicate, line_response_check,
    prune_deactivated, prune_linear_dependence, redundancy_line, response_sup_diff,
};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "landscape-lab",
    about = "Loss-landscape laboratory for shallow analytic networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ToleranceArgs {
    /// Absolute threshold for zero weight-vector norms.
    #[arg(long = "tol-zero", default_value_t = 1e-9)]
    tol_zero: f64,
    /// Relative threshold for +/- pair matches.
    #[arg(long = "tol-pair", default_value_t = 1e-9)]
    tol_pair: f64,
    /// Relative singular-value cutoff for rank tests.
    #[arg(long = "tol-rank", default_value_t = 1e-8)]
    tol_rank: f64,
}

impl ToleranceArgs {
    fn config(&self) -> ToleranceConfig {
        ToleranceConfig {
            zero_abs: self.tol_zero,
            pair_rel: self.tol_pair,
            rank_rel: self.tol_rank,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelKind {
    Rbf,
    White,
}

#[derive(Args)]
struct KernelArgs {
    /// Covariance kernel for Gaussian targets.
    #[arg(long, value_enum, default_value = "rbf")]
    kernel: KernelKind,
    /// RBF bandwidth; defaults to the median pairwise atom distance.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Variance of the white kernel.
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
}

impl KernelArgs {
    fn kernel(&self, mu: &EmpiricalMeasure) -> Kernel {
        match self.kernel {
            KernelKind::Rbf => Kernel::Rbf {
                bandwidth: self.bandwidth.unwrap_or_else(|| median_pairwise_distance(mu)),
            },
            KernelKind::White => Kernel::White { sigma2: self.sigma2 },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify the redundancies of a network on a dataset.
    Classify {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional polynomial-independence pattern, e.g. "0,0,1,2".
        #[arg(long)]
        pattern: Option<String>,
        #[command(flatten)]
        tol: ToleranceArgs,
    },
    /// Prune deactivated and linearly dependent neurons.
    Prune {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Pruned network JSON destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replayable prune trace destination.
        #[arg(long = "trace-out")]
        trace_out: Option<PathBuf>,
        #[command(flatten)]
        tol: ToleranceArgs,
    },
    /// Extend a network by a duplication or a disconnected neuron.
    Extend {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, value_enum)]
        kind: ExtendKind,
        /// Source neuron for a duplication.
        #[arg(long, default_value_t = 0)]
        source: usize,
        /// Outer-weight split for a duplication (not 0 or 1).
        #[arg(long = "lambda-mix", default_value_t = 0.5)]
        lambda_mix: f64,
        /// Hidden bias of the disconnected neuron.
        #[arg(long = "beta-new", default_value_t = 0.0)]
        beta_new: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Constant-response line through a redundant parameter.
    Line {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Dependency coefficients "constant,c_1,...,c_m".
        #[arg(long)]
        lambda: String,
        #[arg(long = "t-max", default_value_t = 10.0)]
        t_max: f64,
        #[arg(long = "t-steps", default_value_t = 41)]
        t_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: ToleranceArgs,
    },
    /// Cost, gradient, Hessian, decomposition, Gram matrix, and spectrum.
    Landscape {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Ridge strength; omit for the unregularized cost.
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multistart damped-Newton search for critical points.
    Critfind {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Restrict a polynomial to a line, or run the slicing zero test.
    Slice {
        /// Polynomial JSON: {"d": 2, "terms": [{"r": [1,0], "c": 2.5}, ...]}.
        #[arg(long)]
        poly: PathBuf,
        /// Direction "v_1,...,v_d" for a single slice.
        #[arg(long)]
        dir: Option<String>,
        /// Run the zero test over seeded random verified directions instead.
        #[arg(long = "check-zero")]
        check_zero: bool,
        /// Seed for the random directions of the zero test.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generalized Vandermonde determinant, or a verified direction set.
    Vandermonde {
        /// Strictly increasing positive nodes "a_1,...,a_N".
        #[arg(long)]
        a: Option<String>,
        /// Strictly increasing exponents "l_1,...,l_N".
        #[arg(long)]
        lambda: Option<String>,
        /// Build slicing directions for this polynomial degree instead.
        #[arg(long)]
        degree: Option<usize>,
        /// Input dimension for the direction construction.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Taylor-coefficient rank check of an activation.
    Admissible {
        #[arg(long)]
        activation: String,
        #[arg(long, default_value_t = 12)]
        truncation: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Morse Monte-Carlo probe over random Gaussian targets.
    McMorse {
        /// Network JSON providing the topology and activation.
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Efficiency margin tau.
        #[arg(long = "tol-margin", default_value_t = 1e-4)]
        tol_margin: f64,
        /// Relative eigenvalue ratio below which a Hessian counts degenerate.
        #[arg(long = "tol-degen", default_value_t = 1e-8)]
        tol_degen: f64,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-point CSV (trial, point, min_eig, max_eig, efficient_flag).
        #[arg(long = "csv-out")]
        csv_out: Option<PathBuf>,
    },
    /// Certify a strongly convex ball around an efficient parameter.
    CertifyMin {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Norm of the target perturbation around the network response.
        #[arg(long)]
        radius: f64,
        /// Ball radius; omitted walks the built-in ladder.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// End-to-end redundant-critical-point construction.
    DemoRedundant {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        hidden: usize,
        #[arg(long, default_value_t = 25)]
        atoms: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExtendKind {
    Duplicate,
    Bias,
}

fn read_to_string(path: &Path) -> Result<String, LabError> {
    std::fs::read_to_string(path).map_err(LabError::from)
}

fn load_network(path: &Path) -> Result<Network, LabError> {
    network_from_json(&read_to_string(path)?)
}

fn load_dataset(path: &Path) -> Result<Dataset, LabError> {
    dataset_from_csv(&read_to_string(path)?, &path.display().to_string())
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>, LabError> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| LabError::InvalidArgument(format!("{what}: `{p}`: {e}")))
        })
        .collect()
}

fn emit<T: Serialize>(command: &str, report: T, out: Option<&Path>) -> Result<(), LabError> {
    let text = ReportEnvelope::new(command, report).to_json_pretty()?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), LabError> {
    match cli.command {
        Command::Classify { net, data, out, pattern, tol } => {
            let network = load_network(&net)?;
            let dataset = load_dataset(&data)?;
            let config = tol.config();
            let report = taxonomy(&network, &dataset.measure, &config)?;
            let e0 = in_e0(&network, &config)?;
            let rank = match &pattern {
                Some(text) => Some(poly_efficiency_rank(
                    &network,
                    &dataset.measure,
                    &PolyPattern::parse(text)?,
                    &config,
                )?),
                None => None,
            };
            #[derive(Serialize)]
            struct ClassifyReport {
                redundancy: landscape_lab::efficiency::RedundancyReport,
                explicit_domain: landscape_lab::efficiency::E0Report,
                #[serde(skip_serializing_if = "Option::is_none")]
                polynomial_rank: Option<landscape_lab::efficiency::RankReport>,
            }
            emit(
                "classify",
                ClassifyReport {
                    redundancy: report,
                    explicit_domain: e0,
                    polynomial_rank: rank,
                },
                out.as_deref(),
            )
        }
        Command::Prune { net, data, out, trace_out, tol } => {
            let network = load_network(&net)?;
            let dataset = load_dataset(&data)?;
            let config = tol.config();
            let (deactivated, trace_a) = prune_deactivated(&network, &config)?;
            let (pruned, trace_b) = prune_linear_dependence(&deactivated, &dataset.measure, &config)?;
            let steps: Vec<_> = trace_a
                .steps
                .into_iter()
                .chain(trace_b.steps)
                .collect();
            let trace = landscape_lab::transforms::PruneTrace {
                steps,
                final_topology: pruned.topology(),
            };
            let sup_diff = response_sup_diff(&network, &pruned, &dataset.measure)?;
            if let Some(path) = &trace_out {
                std::fs::write(path, serde_json::to_string_pretty(&trace)? + "\n")?;
            }
            let pruned_json = network_to_json(&pruned)?;
            if let Some(path) = &out {
                std::fs::write(path, pruned_json + "\n")?;
            } else {
                println!("{pruned_json}");
            }
            eprintln!(
                "pruned {} -> {} hidden neurons, response deviation {sup_diff:.3e}",
                network.topology().hidden,
                pruned.topology().hidden
            );
            Ok(())
        }
        Command::Extend { net, kind, source, lambda_mix, beta_new, out } => {
            let network = load_network(&net)?;
            let extended = match kind {
                ExtendKind::Duplicate => extend_duplicate(&network, source, lambda_mix)?,
                ExtendKind::Bias => extend_deactivated_bias(&network, beta_new)?,
            };
            let json = network_to_json(&extended)?;
            match out {
                Some(path) => std::fs::write(path, json + "\n")?,
                None => println!("{json}"),
            }
            Ok(())
        }
        Command::Line { net, data, lambda, t_max, t_steps, out, tol } => {
            let network = load_network(&net)?;
            let dataset = load_dataset(&data)?;
            let coeffs = parse_f64_list(&lambda, "lambda")?;
            if coeffs.len() != network.topology().hidden + 1 {
                return Err(LabError::DimensionMismatch {
                    context: "line coefficients (constant plus one per neuron)",
                    expected: network.topology().hidden + 1,
                    got: coeffs.len(),
                });
            }
            let dependency = Lambda {
                constant: coeffs[0],
                coeffs: coeffs[1..].to_vec(),
            };
            let config = tol.config();
            let line = redundancy_line(&network, dependency, &dataset.measure, &config)?;
            let steps = t_steps.max(2);
            let grid: Vec<f64> = (0..steps)
                .map(|k| -t_max + 2.0 * t_max * k as f64 / (steps - 1) as f64)
                .collect();
            let deviation = line_response_check(&line, &dataset.measure, &grid)?;
            let criticality = criticality_along_line(&line, &dataset.measure, &dataset.targets)?;
            #[derive(Serialize)]
            struct LineReport {
                max_response_deviation: f64,
                criticality: landscape_lab::transforms::LineCriticality,
            }
            emit(
                "line",
                LineReport {
                    max_response_deviation: deviation,
                    criticality,
                },
                out.as_deref(),
            )
        }
        Command::Landscape { net, data, ridge, out } => {
            let network = load_network(&net)?;
            let dataset = load_dataset(&data)?;
            let reg = match ridge {
                Some(lambda) => Regularizer::ridge(lambda)?,
                None => Regularizer::None,
            };
            let report = CostReport::compute(&network, &dataset.measure, &dataset.targets, &reg)?;
            emit("landscape", report, out.as_deref())
        }
        Command::Critfind { net, data, starts, seed, ridge, out } => {
            let network = load_network(&net)?;
            let dataset = load_dataset(&data)?;
            let reg = match ridge {
                Some(lambda) => Regularizer::ridge(lambda)?,
                None => Regularizer::None,
            };
            let mut cfg = SearchConfig::with_seed(seed, starts);
            // the loaded parameters are the first start, so a network sitting
            // at a critical point reports it
            cfg.explicit_starts = vec![network.params.clone()];
            let report = find_critical_points(
                &dataset.measure,
                &dataset.targets,
                &network.topology(),
                &network.activation,
                &reg,
                &cfg,
            )?;
            emit("critfind", report, out.as_deref())
        }
        Command::Slice { poly, dir, check_zero, seed, out } => {
            let polynomial: Polynomial = serde_json::from_str(&read_to_string(&poly)?)?;
            #[derive(Serialize)]
            struct SliceReport {
                #[serde(skip_serializing_if = "Option::is_none")]
                coefficients: Option<Vec<f64>>,
                #[serde(skip_serializing_if = "Option::is_none")]
                is_zero: Option<bool>,
            }
            let report = if check_zero {
                let seed = seed.ok_or_else(|| {
                    LabError::InvalidArgument("--check-zero requires --seed".into())
                })?;
                let degree = polynomial.degree().unwrap_or(0).max(1);
                let dirs = random_directions(polynomial.dim(), degree, seed)?;
                SliceReport {
                    coefficients: None,
                    is_zero: Some(is_zero_by_slicing(&polynomial, &dirs)?),
                }
            } else {
                let dir = dir.ok_or_else(|| {
                    LabError::InvalidArgument("either --dir or --check-zero is required".into())
                })?;
                let v = parse_f64_list(&dir, "direction")?;
                SliceReport {
                    coefficients: Some(poly_slice(&polynomial, &v)?),
                    is_zero: None,
                }
            };
            emit("slice", report, out.as_deref())
        }
        Command::Vandermonde { a, lambda, degree, dim, out } => {
            #[derive(Serialize)]
            struct VandermondeReport {
                #[serde(skip_serializing_if = "Option::is_none")]
                det: Option<f64>,
                #[serde(skip_serializing_if = "Option::is_none")]
                directions: Option<Vec<Vec<f64>>>,
                #[serde(skip_serializing_if = "Option::is_none")]
                verified: Option<bool>,
            }
            let report = match (a, lambda, degree, dim) {
                (Some(a), Some(lambda), None, None) => {
                    let nodes = parse_f64_list(&a, "a")?;
                    let exps = parse_f64_list(&lambda, "lambda")?;
                    VandermondeReport {
                        det: Some(generalized_vandermonde_det(&nodes, &exps)?),
                        directions: None,
                        verified: None,
                    }
                }
                (a, None, Some(n), Some(d)) => {
                    let nodes = match a {
                        Some(text) => parse_f64_list(&text, "a")?,
                        None => default_vandermonde_nodes(d, n)?,
                    };
                    let set = vandermonde_directions(n, d, &nodes)?;
                    VandermondeReport {
                        det: None,
                        directions: Some(set.directions.to_nested()),
                        verified: Some(set.verified),
                    }
                }
                _ => {
                    return Err(LabError::InvalidArgument(
                        "pass --a with --lambda for a determinant, or --degree with --dim for directions".into(),
                    ))
                }
            };
            emit("vandermonde", report, out.as_deref())
        }
        Command::Admissible { activation, truncation, out } => {
            let act = Activation::parse(&activation)?;
            let report = activation_admissibility(&act, truncation)?;
            emit("admissible", report, out.as_deref())
        }
        Command::McMorse {
            net,
            data,
            trials,
            seed,
            tol_margin,
            tol_degen,
            starts,
            out,
            csv_out,
        } => {
            let network = load_network(&net)?;
            let dataset = load_dataset(&data)?;
            let mut cfg = MorseConfig::new(
                network.topology(),
                network.activation.clone(),
                Kernel::Rbf {
                    bandwidth: median_pairwise_distance(&dataset.measure),
                },
            );
            cfg.trials = trials;
            cfg.seed = seed;
            cfg.e0_margin_tau = tol_margin;
            cfg.degeneracy_tol = tol_degen;
            cfg.starts_per_trial = starts;
            let report = morse_mc(&dataset.measure, &cfg)?;
            if let Some(path) = &csv_out {
                let mut csv = String::from("trial,point,min_eig,max_eig,efficient\n");
                for (idx, p) in report.points.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        p.trial,
                        idx,
                        csv_float(p.min_eig),
                        csv_float(p.max_eig),
                        u8::from(p.efficient)
                    ));
                }
                std::fs::write(path, csv)?;
            }
            emit("mc-morse", report, out.as_deref())
        }
        Command::CertifyMin { net, data, radius, delta, seed, kernel, out } => {
            let network = load_network(&net)?;
            let dataset = load_dataset(&data)?;
            let k = kernel.kernel(&dataset.measure);
            let report =
                certify_efficient_minimum(&network, &dataset.measure, k, radius, delta, seed)?;
            emit("certify-min", report, out.as_deref())
        }
        Command::DemoRedundant { dim, hidden, atoms, trials, seed, out } => {
            let cfg = DemoConfig {
                input_dim: dim,
                base_hidden: hidden,
                atoms,
                trials,
                seed,
                ..DemoConfig::default()
            };
            let report = redundant_critical_demo(&cfg)?;
            emit("demo-redundant", report, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_io_or_parse() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
