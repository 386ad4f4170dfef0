use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use forestcheck::audit::{
    grid_check, point_map, threshold_sweep, AuditReport, ConfigEcho, ModelSummary, WitnessPoint, GRID_SEMANTICS,
};
use forestcheck::explain::abductive_explanation;
use forestcheck::ingest::{parse_fixture, parse_space_config, validate_against_fixture, GbtOptions, ModelBundle};
use forestcheck::model::decimal::{format_rational, parse_decimal};
use forestcheck::model::{Ensemble, FeatureSpace, Point};
use forestcheck::spec::{parse_spec_entries, SpecBody, ThresholdImplication};
use forestcheck::verify::{verify_suite, Limits};
use forestcheck::{Error, Result};

/// Exact verification of tree-ensemble classifiers.
#[derive(Parser)]
#[command(name = "forestcheck", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify every specification in a file; exit 0 proven, 1 violated, 2 error.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        specs: PathBuf,
    },
    /// Minimal set of features that forces the prediction at one instance.
    Explain {
        #[command(flatten)]
        common: Common,
        /// Comma-separated feature values, in feature order.
        #[arg(long, allow_hyphen_values = true)]
        instance: String,
        /// Deletion order as comma-separated feature names or indices.
        #[arg(long)]
        order: Option<String>,
    },
    /// Evaluate a threshold specification on a uniform grid (detection only).
    Grid {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        specs: PathBuf,
        #[arg(long)]
        spec_id: String,
        /// Points per feature; repeatable.
        #[arg(long = "n", default_values_t = [30usize, 50, 100, 200])]
        n: Vec<usize>,
    },
    /// Re-verify a threshold specification as one premise constant varies.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        specs: PathBuf,
        #[arg(long)]
        spec_id: String,
        /// Zero-based index of the premise atom to vary.
        #[arg(long, default_value_t = 0)]
        atom: usize,
        /// Comma-separated decimal thresholds.
        #[arg(long, allow_hyphen_values = true)]
        thresholds: String,
    },
    /// Compare model logits against a recorded prediction fixture.
    CheckModel {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Gradient-boosted JSON dump or additive-model dump.
    #[arg(long)]
    model: PathBuf,
    /// Base score (logit offset) of a gradient-boosted dump.
    #[arg(long, allow_hyphen_values = true)]
    base_score: Option<String>,
    /// Feature names and bounds.
    #[arg(long)]
    space: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Left-first sequential search; elapsed times are reported as 0.
    #[arg(long)]
    deterministic: bool,
    #[arg(long, default_value_t = 10_000_000)]
    max_nodes: u64,
    #[arg(long, default_value_t = 300.0)]
    timeout_s: f64,
    /// Accept and ignore `missing` default branches in the dump.
    #[arg(long)]
    allow_missing_branch: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

struct Loaded {
    space: FeatureSpace,
    bundle: ModelBundle,
    ensemble: Ensemble,
    limits: Limits,
    config: ConfigEcho,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

impl Common {
    fn load(&self) -> Result<Loaded> {
        let space = parse_space_config(&read(&self.space)?)?;
        let options = GbtOptions {
            allow_missing_branch: self.allow_missing_branch,
        };
        let bundle = ModelBundle::load(&read(&self.model)?, self.base_score.as_deref(), &space, options)?;
        let ensemble = bundle.ensemble();
        if !(self.timeout_s.is_finite() && self.timeout_s > 0.0) {
            return Err(Error::InvalidModel(format!("timeout must be positive, got {}", self.timeout_s)));
        }
        let limits = Limits {
            max_nodes: self.max_nodes,
            timeout: Duration::from_secs_f64(self.timeout_s),
            deterministic: self.deterministic,
        };
        let config = ConfigEcho {
            model_path: Some(self.model.display().to_string()),
            space_path: Some(self.space.display().to_string()),
            base_score: self.base_score.clone(),
            ..ConfigEcho::with_limits(&limits)
        };
        Ok(Loaded {
            space,
            bundle,
            ensemble,
            limits,
            config,
        })
    }

    fn emit(&self, json: &Value, text: &str) -> Result<()> {
        let body = match self.format {
            Format::Json => serde_json::to_string_pretty(json).expect("serializable") + "\n",
            Format::Text => text.to_string(),
        };
        match &self.out {
            Some(path) => fs::write(path, body).map_err(|e| Error::io(path, e)),
            None => std::io::stdout()
                .write_all(body.as_bytes())
                .map_err(|e| Error::io("<stdout>", e)),
        }
    }
}

fn template(loaded: &Loaded, specs: &Path, id: &str) -> Result<ThresholdImplication> {
    let entries = parse_spec_entries(&read(specs)?, &loaded.space)?;
    let entry = entries
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::MalformedSpecs(format!("no spec with id `{id}`")))?;
    match entry.spec?.body {
        SpecBody::Implication(t) => Ok(t),
        SpecBody::Monotone(_) => Err(Error::MalformedSpecs(format!("spec `{id}` is not an implication"))),
    }
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Verify { common, specs } => {
            let loaded = common.load()?;
            let entries = parse_spec_entries(&read(&specs)?, &loaded.space)?;
            let suite = verify_suite(&loaded.ensemble, &entries, &loaded.limits);
            let config = ConfigEcho {
                specs_path: Some(specs.display().to_string()),
                ..loaded.config.clone()
            };
            let summary = ModelSummary::of(&loaded.ensemble, Some(&loaded.bundle));
            let report = AuditReport::new(summary, config, &loaded.space, &suite);
            let json = serde_json::to_value(&report).expect("serializable");
            common.emit(&json, &report.to_text())?;
            Ok(report.exit_code() as u8)
        }
        Command::Explain { common, instance, order } => {
            let loaded = common.load()?;
            let values: Vec<&str> = split_list(&instance).collect();
            let point = Point::cast_decimals(&values)?;
            loaded.space.check_point(&point)?;
            let order = order
                .map(|o| {
                    split_list(&o)
                        .map(|f| f.parse::<usize>().or_else(|_| loaded.space.resolve(f)))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            let r = abductive_explanation(&loaded.ensemble, &point, order.as_deref(), &loaded.limits)?;
            let names: Vec<&str> = loaded.space.names().collect();
            let fixed: serde_json::Map<String, Value> = r
                .features
                .iter()
                .map(|&j| (names[j].to_string(), point_map(&loaded.space, &point)[names[j]].clone()))
                .collect();
            let at = WitnessPoint::new(&loaded.space, &point, &r.logit);
            let json = json!({
                "instance": at.point,
                "logit": at.logit,
                "probability": at.probability,
                "predicted": r.predicted.to_string(),
                "features": r.features.iter().map(|&j| names[j]).collect::<Vec<_>>(),
                "fixed": fixed,
                "queries_used": r.queries_used,
                "warning": r.warning(),
            });
            let mut text = format!(
                "prediction {} (logit {}, {}%)\nsufficient features: {}\n",
                r.predicted,
                at.logit,
                at.percent,
                if r.features.is_empty() {
                    "none".to_string()
                } else {
                    r.features.iter().map(|&j| format!("{}={}", names[j], point[j])).collect::<Vec<_>>().join(" ")
                }
            );
            text += &format!("queries: {}\n", r.queries_used);
            if let Some(w) = r.warning() {
                text += &format!("warning: {w}\n");
            }
            common.emit(&json, &text)?;
            Ok(0)
        }
        Command::Grid { common, specs, spec_id, n } => {
            let loaded = common.load()?;
            let spec = template(&loaded, &specs, &spec_id)?;
            let mut rows = Vec::new();
            let mut text = format!("{GRID_SEMANTICS}\n{:>6} {:>16} {:>16} {:>12} {:>10}\n", "n", "points", "premise", "violations", "ms");
            for &k in &n {
                let g = grid_check(&loaded.ensemble, &spec, k)?;
                let ms = if common.deterministic { 0 } else { g.elapsed.as_millis() as u64 };
                text += &format!(
                    "{:>6} {:>16} {:>16} {:>12} {:>10}\n",
                    g.n, g.total_points, g.premise_count, g.violations_found, ms
                );
                rows.push(json!({
                    "n": g.n,
                    "total_points": g.total_points.to_string(),
                    "premise_count": g.premise_count.to_string(),
                    "violations_found": g.violations_found.to_string(),
                    "first_violation": g.first_violation.as_ref().map(|(p, l)| WitnessPoint::new(&loaded.space, p, l)),
                    "elapsed_ms": ms,
                }));
            }
            let json = json!({"spec_id": spec_id, "semantics": GRID_SEMANTICS, "rows": rows});
            common.emit(&json, &text)?;
            Ok(0)
        }
        Command::Sweep {
            common,
            specs,
            spec_id,
            atom,
            thresholds,
        } => {
            let loaded = common.load()?;
            let spec = template(&loaded, &specs, &spec_id)?;
            let values = split_list(&thresholds)
                .map(|t| parse_decimal(t).ok_or_else(|| Error::MalformedSpecs(format!("threshold `{t}` is not a decimal"))))
                .collect::<Result<Vec<_>>>()?;
            let rows = threshold_sweep(&loaded.ensemble, &spec, atom, &values, &loaded.limits)?;
            let mut code = 0u8;
            let mut text = format!("{:>14} {:>14} {:<13} {}\n", "threshold", "binary32", "status", "witness logit");
            let mut json_rows = Vec::new();
            for row in &rows {
                let (status, error) = match &row.outcome {
                    Ok(v) => (v.status.to_string(), None),
                    Err(Error::ResourceExhausted { .. }) => ("exhausted".to_string(), None),
                    Err(e) => ("error".to_string(), Some(e.to_string())),
                };
                code = code.max(match status.as_str() {
                    "proven" => 0,
                    "violated" => 1,
                    _ => 2,
                });
                let logit = row.witness_logit().map(format_rational);
                text += &format!(
                    "{:>14} {:>14} {:<13} {}\n",
                    format_rational(&row.threshold),
                    row.constant.to_string(),
                    status,
                    logit.as_deref().unwrap_or("-")
                );
                json_rows.push(json!({
                    "threshold": format_rational(&row.threshold),
                    "constant": row.constant.to_string().parse::<serde_json::Number>().expect("binary32 display is a JSON number"),
                    "status": status,
                    "witness_logit": logit,
                    "error": error,
                }));
            }
            let json = json!({"spec_id": spec_id, "atom": atom, "rows": json_rows});
            common.emit(&json, &text)?;
            Ok(code)
        }
        Command::CheckModel {
            common,
            fixture,
            tolerance,
        } => {
            let loaded = common.load()?;
            let fx = parse_fixture(&read(&fixture)?, &loaded.space)?;
            let r = validate_against_fixture(loaded.bundle.logit_model(), &fx, tolerance)?;
            let json = json!({
                "rows_checked": r.rows_checked,
                "max_abs_deviation": r.max_abs_deviation,
                "tolerance": r.tolerance,
                "passed": r.passed(),
                "failing_rows": r.failing_rows.iter().map(|f| json!({
                    "row": f.row, "expected": f.expected, "actual": f.actual, "deviation": f.deviation
                })).collect::<Vec<_>>(),
            });
            let mut text = format!(
                "{} rows, max |delta logit| {:e} (tolerance {:e}): {}\n",
                r.rows_checked,
                r.max_abs_deviation,
                r.tolerance,
                if r.passed() { "ok" } else { "FAILED" }
            );
            for f in r.failing_rows.iter().take(20) {
                text += &format!("  row {}: expected {} got {}\n", f.row, f.expected, f.actual);
            }
            common.emit(&json, &text)?;
            Ok(if r.passed() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
