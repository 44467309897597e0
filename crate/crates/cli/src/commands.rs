use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use pursuit_core::bounds::BoundSpec;
use pursuit_core::sim::gap_demo;
use pursuit_core::verify::{self, HoeffdingOptions, MgfOptions, MgfSetting, SeriesOptions, Suite};
use pursuit_core::{compute_bound, run_experiment, Error, LambdaSchedule};

use crate::config::{Format, RunConfig, DEFAULT_REWARD_PROBS};
use crate::error::CliError;
use crate::output::{report_table, trace_table, unix_ms, Cell, RunManifest, Table};
use crate::{BoundArgs, SuiteArg, VerifyArgs};

fn write_table(table: &Table, format: Format, path: &Path) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    table.write(format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn print_table(table: &Table, format: Format) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    table.write(format, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn simulate(config: &RunConfig) -> Result<(), CliError> {
    let started = unix_ms();
    let exp = &config.experiment;
    let run = run_experiment(exp)?;
    std::fs::create_dir_all(&config.out_dir)?;
    let ext = match config.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let trace_path = config.out_dir.join(format!("trace.{ext}"));
    let report_path = config.out_dir.join(format!("report.{ext}"));
    let manifest_path = config.out_dir.join("manifest.json");
    let actions = exp.environment.num_actions();
    write_table(&trace_table(&run.traces, actions), config.format, &trace_path)?;
    write_table(&report_table(&run.report), config.format, &report_path)?;
    let outputs = vec![trace_path, report_path, manifest_path.clone()];
    RunManifest::new(config, started, outputs.clone()).write(&manifest_path)?;
    for path in outputs {
        println!("{}", path.display());
    }
    if let Some(n) = run.report.lower_bound_violations.filter(|&n| n > 0) {
        eprintln!("warning: {n} floor violations recorded");
    }
    Ok(())
}

pub const COMPARE_HEADER: [&str; 9] = [
    "t",
    "epsilon",
    "p_hat_a",
    "stderr_a",
    "p_hat_b",
    "stderr_b",
    "wrong_lock_a",
    "wrong_lock_b",
    "wrong_lock_z",
];

pub fn compare(config: &RunConfig, first: &str, second: &str) -> Result<(), CliError> {
    let a: LambdaSchedule = first.parse()?;
    let b: LambdaSchedule = second.parse()?;
    let gap = gap_demo(&config.experiment, a, b)?;
    let [ra, rb] = &gap.reports;
    let mut table = Table::new(COMPARE_HEADER);
    for (ca, cb) in ra.checkpoints.iter().zip(&rb.checkpoints) {
        for (k, (ea, eb)) in ca.optimality.iter().zip(&cb.optimality).enumerate() {
            let lock = |r: &pursuit_core::sim::EstimateReport| {
                Cell::float(r.convergence[k].wrong_lock.map(|p| p.p_hat))
            };
            table.push(vec![
                Cell::Int(ca.t),
                Cell::Float(ea.epsilon),
                Cell::Float(ea.optimality.p_hat),
                Cell::Float(ea.optimality.stderr),
                Cell::Float(eb.optimality.p_hat),
                Cell::Float(eb.optimality.stderr),
                lock(ra),
                lock(rb),
                Cell::float(gap.wrong_lock_z[k]),
            ]);
        }
    }
    print_table(&table, config.format)
}

pub const BOUND_HEADER: [&str; 13] = [
    "epsilon", "delta", "theta", "actions", "eta", "h", "a", "b", "t4", "t3", "t_star",
    "tail_t4", "status",
];

#[derive(Debug, Clone, Copy)]
struct BoundInputs {
    eps: Option<f64>,
    delta: Option<f64>,
    theta: Option<f64>,
    eta: Option<f64>,
    h: Option<f64>,
}

impl BoundInputs {
    fn spec(&self, actions: usize, ceiling: Option<u64>) -> Result<BoundSpec, CliError> {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
        };
        let (eps, delta, theta) = (need(self.eps, "eps")?, need(self.delta, "delta")?, need(self.theta, "theta")?);
        let spec = match (self.eta, self.h) {
            (Some(eta), _) => BoundSpec::new(eps, delta, theta, actions, eta)?,
            (None, Some(h)) => BoundSpec::with_h(eps, delta, theta, actions, h)?,
            (None, None) => return Err(CliError::Usage("one of --eta or --h is required".into())),
        };
        Ok(match ceiling {
            Some(c) => spec.with_ceiling(c),
            None => spec,
        })
    }
}

/// `key=lo:hi:step`, inclusive of `hi` up to rounding.
fn scan_values(scan: &str) -> Result<(String, Vec<f64>), CliError> {
    let bad = || CliError::Usage(format!("--scan expects key=lo:hi:step, got '{scan}'"));
    let (key, range) = scan.split_once('=').ok_or_else(bad)?;
    let parts: Vec<f64> = range
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as u64;
    let values = (0..=n)
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect();
    Ok((key.trim().to_owned(), values))
}

pub fn bound(args: &BoundArgs, format: Format) -> Result<(), CliError> {
    let base = BoundInputs {
        eps: args.eps,
        delta: args.delta,
        theta: args.theta,
        eta: args.eta,
        h: args.h,
    };
    let inputs = match &args.scan {
        None => vec![base],
        Some(scan) => {
            let (key, values) = scan_values(scan)?;
            values
                .into_iter()
                .map(|v| {
                    let mut row = base;
                    match key.as_str() {
                        "eps" | "epsilon" => row.eps = Some(v),
                        "delta" => row.delta = Some(v),
                        "theta" => row.theta = Some(v),
                        "eta" => {
                            row.eta = Some(v);
                            row.h = None;
                        }
                        other => {
                            return Err(CliError::Usage(format!(
                                "cannot scan '{other}' (expected eps, delta, theta or eta)"
                            )))
                        }
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    // every row is validated before any is solved
    let specs: Vec<BoundSpec> = inputs
        .iter()
        .map(|i| i.spec(args.actions, args.ceiling))
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(BOUND_HEADER);
    let mut first_ceiling = None;
    for (input, spec) in inputs.iter().zip(&specs) {
        let mut row = vec![
            Cell::Float(spec.epsilon),
            Cell::Float(spec.delta),
            Cell::Float(spec.theta),
            Cell::Int(spec.actions as u64),
            Cell::float(input.eta),
            Cell::Float(spec.h()),
        ];
        match compute_bound(spec) {
            Ok(r) => row.extend([
                Cell::Float(r.a),
                Cell::Float(r.b),
                Cell::Int(r.t4),
                Cell::Int(r.t3),
                Cell::Int(r.t_star),
                Cell::Float(r.tail_at_t4),
                Cell::Text("ok".into()),
            ]),
            Err(e @ Error::CeilingExceeded { quantity, .. }) => {
                let params = spec.mgf_params();
                row.extend([
                    Cell::Float(params.a()),
                    Cell::Float(1.0 / params.envelope_exponent()),
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Text(format!("ceiling:{quantity}")),
                ]);
                first_ceiling.get_or_insert(e);
            }
            Err(e) => return Err(e.into()),
        }
        table.push(row);
    }
    print_table(&table, format)?;
    match first_ceiling {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub const VERIFY_HEADER: [&str; 5] = ["suite", "name", "passed", "margin", "detail"];

pub fn verify(args: &VerifyArgs, seed: Option<u64>, format: Format) -> Result<(), CliError> {
    let suites = match args.suite {
        SuiteArg::All => Suite::ALL.to_vec(),
        SuiteArg::Series => vec![Suite::Series],
        SuiteArg::Integral => vec![Suite::Integral],
        SuiteArg::Mgf => vec![Suite::Mgf],
        SuiteArg::Hoeffding => vec![Suite::Hoeffding],
    };
    let mut checks = Vec::new();
    for suite in suites {
        checks.extend(match suite {
            Suite::Series => {
                let mut opts = SeriesOptions::default();
                if let Some(t) = args.t_max {
                    opts.t_max = t;
                }
                verify::series(&opts)?
            }
            Suite::Integral => verify::integral()?,
            Suite::Mgf => {
                let mut opts = MgfOptions::default();
                if args.theta.is_some() || args.reward_probs.is_some() || args.eta.is_some() {
                    opts.settings = vec![MgfSetting {
                        theta: args.theta.unwrap_or(0.8),
                        reward_probs: args
                            .reward_probs
                            .clone()
                            .unwrap_or_else(|| DEFAULT_REWARD_PROBS.to_vec()),
                        eta: args.eta,
                    }];
                }
                if let Some(times) = &args.times {
                    opts.times = times.clone();
                }
                opts.replicates = args.replicates.unwrap_or(opts.replicates);
                opts.seed = seed.unwrap_or(opts.seed);
                verify::mgf(&opts)?
            }
            Suite::Hoeffding => {
                let mut opts = HoeffdingOptions::default();
                opts.theta = args.theta.unwrap_or(opts.theta);
                opts.eta = args.eta.unwrap_or(opts.eta);
                if let Some(d) = &args.reward_probs {
                    opts.reward_probs = d.clone();
                }
                if let Some(&t) = args.times.as_ref().and_then(|t| t.iter().max()) {
                    opts.time = t;
                }
                opts.replicates = args.replicates.unwrap_or(opts.replicates);
                opts.seed = seed.unwrap_or(opts.seed);
                verify::hoeffding(&opts)?
            }
        });
    }
    let mut table = Table::new(VERIFY_HEADER);
    for c in &checks {
        table.push(vec![
            Cell::Text(c.suite.clone()),
            Cell::Text(c.name.clone()),
            Cell::Bool(c.passed),
            Cell::Float(c.margin),
            Cell::Text(c.detail.clone()),
        ]);
    }
    print_table(&table, format)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed {
            failed,
            total: checks.len(),
        });
    }
    Ok(())
}
