use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use sepsol::solset::{build_solution_set, p1_explicit, AngularProfile, ExplicitFamily, ProfileKind, SolutionSet, SolveConfig, SAMPLES_PER_PERIOD};

use crate::error::CliError;
use crate::output::{self, Format};
use crate::{Common, ParamArgs};

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Largest sign-changing mode searched.
    #[arg(long, default_value_t = 6)]
    pub k_max: u32,
    /// Directory receiving one `sigma,omega` CSV per profile.
    #[arg(long)]
    pub profile_dir: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct Output<'a> {
    schema: &'static str,
    #[serde(flatten)]
    set: &'a SolutionSet,
}

#[derive(Serialize)]
struct SummaryRow {
    kind: &'static str,
    k: u32,
    amplitude: Option<f64>,
    target_period: Option<f64>,
    measured_period: Option<f64>,
    max_residual: f64,
    sign_changes: Option<usize>,
    verified: bool,
}

#[derive(Serialize)]
struct ProfileRow {
    sigma: f64,
    omega: f64,
}

fn kind_name(kind: ProfileKind) -> &'static str {
    match kind {
        ProfileKind::SignChanging => "sign-changing",
        ProfileKind::Positive => "positive",
        ProfileKind::Constant => "constant",
        ProfileKind::Explicit => "explicit",
    }
}

fn family_name(f: &ExplicitFamily) -> String {
    match f {
        ExplicitFamily::Translate { k_param } => format!("explicit-translate-K{k_param}"),
        ExplicitFamily::PositiveZero => "explicit-positive-zero".into(),
        ExplicitFamily::SignChangingZero => "explicit-sign-changing-zero".into(),
    }
}

fn write_profile(dir: &Path, name: &str, profile: &AngularProfile) -> Result<(), CliError> {
    let rows: Vec<ProfileRow> = profile
        .sigma
        .iter()
        .zip(&profile.omega)
        .map(|(&sigma, &omega)| ProfileRow { sigma, omega })
        .collect();
    let path = dir.join(format!("{name}.csv"));
    fs::write(&path, output::csv_table(&rows)?).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn write_profiles(dir: &Path, set: &SolutionSet) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    for modes in [&set.sign_changing, &set.positive] {
        for (i, m) in modes.iter().enumerate() {
            let repeat = modes[..i].iter().filter(|o| o.k == m.k).count();
            let suffix = if repeat == 0 { String::new() } else { format!("-{}", repeat + 1) };
            write_profile(dir, &format!("{}-k{}{suffix}", kind_name(m.kind), m.k), &m.profile)?;
        }
    }
    for e in &set.explicit_families {
        let profile = p1_explicit(e.family, set.params.q, SAMPLES_PER_PERIOD)?;
        write_profile(dir, &family_name(&e.family), &profile)?;
    }
    Ok(())
}

pub fn run(args: &SolveArgs) -> Result<(), CliError> {
    let params = args.params.problem()?;
    let integrator = args.common.integrator()?;
    if args.k_max == 0 {
        return Err(CliError::Input("--k-max must be at least 1".into()));
    }
    let cfg = SolveConfig {
        k_max: args.k_max,
        integrator,
        ..SolveConfig::default()
    };
    let set = build_solution_set(&params, &cfg)?;
    if let Some(dir) = &args.profile_dir {
        write_profiles(dir, &set)?;
    }
    let text = match args.common.format_or(Format::Json) {
        Format::Json => output::json(&Output {
            schema: "sepsol.solve-set.v1",
            set: &set,
        })?,
        Format::Csv => {
            let mut rows: Vec<SummaryRow> = set
                .sign_changing
                .iter()
                .chain(&set.positive)
                .map(|m| SummaryRow {
                    kind: kind_name(m.kind),
                    k: m.k,
                    amplitude: Some(m.amplitude),
                    target_period: Some(m.target_period),
                    measured_period: Some(m.measured_period),
                    max_residual: m.residual.max_residual,
                    sign_changes: Some(m.sign_changes),
                    verified: m.verified(),
                })
                .collect();
            rows.extend(set.explicit_families.iter().map(|e| SummaryRow {
                kind: "explicit",
                k: e.k,
                amplitude: None,
                target_period: None,
                measured_period: None,
                max_residual: e.residual.max_residual,
                sign_changes: None,
                verified: e.residual.passed,
            }));
            let mut t = output::csv_table(&rows)?;
            for c in &set.constants {
                t.push_str(&format!("# constant solutions: ±{c}\n"));
            }
            for n in set.notes.iter().chain(&set.failures) {
                t.push_str(&format!("# {n}\n"));
            }
            t
        }
    };
    output::emit(args.common.out.as_ref(), &text)?;
    if !set.failures.is_empty() {
        return Err(CliError::Numeric(set.failures.join("; ")));
    }
    Ok(())
}
