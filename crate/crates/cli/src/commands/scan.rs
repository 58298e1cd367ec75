use clap::{Args, ValueEnum};
use serde::Serialize;
use sepsol::nlparams::{reduce, ProblemParams, ReducedParams};
use sepsol::periodfn::{
    admissible_interval, monotonicity, parallel_map, period_limits, period_of, Monotonicity, OrbitKind, PeriodLimits,
};

use crate::error::{input, CliError};
use crate::output::{self, Format};
use crate::{Common, ParamArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    SignChanging,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "sign-changing")]
    pub kind: Kind,
    /// Explicit comma-separated amplitudes; overrides the range flags.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 30)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "log")]
    pub spacing: Spacing,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize)]
struct Row {
    amplitude: f64,
    period: Option<f64>,
    method: Option<String>,
    est_error: Option<f64>,
    check_method: Option<String>,
    check_period: Option<f64>,
    check_error: Option<f64>,
    check_skipped: Option<String>,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct ScanReport {
    schema: &'static str,
    params: ProblemParams,
    reduced: ReducedParams,
    kind: OrbitKind,
    rows: Vec<Row>,
    verdict: Option<Monotonicity>,
    max_violation: Option<f64>,
    limits: Option<PeriodLimits>,
}

fn build_grid(args: &ScanArgs) -> Result<Vec<f64>, CliError> {
    let grid = match &args.grid {
        Some(g) => g.clone(),
        None => {
            let (Some(lo), Some(hi)) = (args.from, args.to) else {
                return Err(CliError::Input("give --grid or both --from and --to".into()));
            };
            let n = args.points;
            match n {
                0 => Vec::new(),
                1 => vec![lo],
                _ => (0..n)
                    .map(|i| {
                        let s = i as f64 / (n - 1) as f64;
                        if i == n - 1 {
                            return hi;
                        }
                        match args.spacing {
                            Spacing::Linear => lo + (hi - lo) * s,
                            Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * s).exp(),
                        }
                    })
                    .collect(),
            }
        }
    };
    if grid.is_empty() {
        return Err(CliError::Input("amplitude grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(CliError::Input(format!("amplitudes must be finite and positive, got {bad}")));
    }
    Ok(grid)
}

fn check_range(kind: OrbitKind, grid: &[f64], rp: &ReducedParams) -> Result<(), CliError> {
    if kind == OrbitKind::SignChanging {
        if rp.p == 1.0 {
            return Err(CliError::Input("sign-changing scans need p > 1".into()));
        }
        return Ok(());
    }
    let (lo, hi) = if rp.p == 1.0 {
        admissible_interval(rp).map_err(input)?
    } else {
        let a = rp
            .stationary_amplitude(&rp.nonlinearity())
            .ok_or_else(|| CliError::Input(format!("positive orbits need b + d > 0, got {}", rp.b + rp.d)))?;
        (0.0, a)
    };
    match grid.iter().find(|&&m| !(m > lo && m < hi)) {
        Some(m) => Err(CliError::Input(format!("amplitude {m} outside the admissible interval ({lo}, {hi})"))),
        None => Ok(()),
    }
}

fn method_name(m: sepsol::periodfn::PeriodMethod) -> String {
    match m {
        sepsol::periodfn::PeriodMethod::EventTiming => "event-timing".into(),
        sepsol::periodfn::PeriodMethod::Quadrature => "quadrature".into(),
    }
}

pub fn run(args: &ScanArgs) -> Result<(), CliError> {
    let params = args.params.problem()?;
    let cfg = args.common.integrator()?;
    let grid = build_grid(args)?;
    let rp = reduce(&params);
    let nl = rp.nonlinearity();
    let kind = match args.kind {
        Kind::SignChanging => OrbitKind::SignChanging,
        Kind::Positive => OrbitKind::Positive,
    };
    check_range(kind, &grid, &rp)?;

    let results = parallel_map(&grid, |&a| Ok(period_of(kind, a, &rp, &nl, &cfg)))?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut periods = Vec::new();
    let mut failed = 0usize;
    for (&amplitude, r) in grid.iter().zip(results) {
        rows.push(match r {
            Ok(s) => {
                periods.push(s.period);
                Row {
                    amplitude,
                    period: Some(s.period),
                    method: Some(method_name(s.method)),
                    est_error: Some(s.est_error),
                    check_method: s.check.map(|c| method_name(c.method)),
                    check_period: s.check.map(|c| c.period),
                    check_error: s.check.map(|c| c.est_error),
                    check_skipped: s.check_skipped,
                    error: None,
                }
            }
            Err(e) => {
                failed += 1;
                Row {
                    amplitude,
                    period: None,
                    method: None,
                    est_error: None,
                    check_method: None,
                    check_period: None,
                    check_error: None,
                    check_skipped: None,
                    error: Some(e.to_string()),
                }
            }
        });
    }
    let (verdict, max_violation) = if periods.len() >= 2 {
        let (v, m) = monotonicity(&periods);
        (Some(v), Some(m))
    } else {
        (None, None)
    };
    let report = ScanReport {
        schema: "sepsol.period-scan.v1",
        params,
        reduced: rp,
        kind,
        rows,
        verdict,
        max_violation,
        limits: period_limits(kind, &rp, &nl).ok(),
    };
    let text = match args.common.format_or(Format::Csv) {
        Format::Json => output::json(&report)?,
        Format::Csv => {
            let mut t = output::csv_table(&report.rows)?;
            let verdict = match report.verdict {
                Some(v) => serde_json::to_value(v).map(|v| v.as_str().unwrap_or_default().to_string()).unwrap_or_default(),
                None => "undetermined".into(),
            };
            t.push_str(&format!("# verdict: {verdict}, max violation {}\n", output::opt(report.max_violation)));
            if let Some(l) = &report.limits {
                t.push_str(&format!("# limits: at zero {}, at upper end {}\n", l.at_zero.as_f64(), l.at_upper.as_f64()));
            }
            t
        }
    };
    output::emit(args.common.out.as_ref(), &text)?;
    if failed > 0 {
        return Err(CliError::Numeric(format!("{failed} of {} amplitudes failed", grid.len())));
    }
    Ok(())
}
