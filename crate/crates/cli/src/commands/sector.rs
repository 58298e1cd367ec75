use clap::Args;
use serde::Serialize;
use sepsol::solset::{sector_exists, SectorReport};

use crate::error::{input, CliError};
use crate::output::{self, Format};
use crate::Common;

#[derive(Args, Debug)]
pub struct SectorArgs {
    #[arg(short = 'p', allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(short = 'q', allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Opening angle of the sector, in `(0, 2π)`.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct Output<'a> {
    schema: &'static str,
    p: f64,
    q: f64,
    #[serde(flatten)]
    report: &'a SectorReport,
}

pub fn run(args: &SectorArgs) -> Result<(), CliError> {
    let (Some(p), Some(q), Some(theta)) = (args.p, args.q, args.theta) else {
        return Err(CliError::Input("-p, -q and --theta are required".into()));
    };
    let report = sector_exists(p, q, theta).map_err(input)?;
    let text = match args.common.format_or(Format::Json) {
        Format::Json => output::json(&Output {
            schema: "sepsol.sector.v1",
            p,
            q,
            report: &report,
        })?,
        Format::Csv => output::csv_pairs(&[
            ("p", p.to_string()),
            ("q", q.to_string()),
            ("theta", report.theta.to_string()),
            ("k_geom", report.k_geom.to_string()),
            ("beta_s", report.beta_s.to_string()),
            ("beta_q", report.beta_q.to_string()),
            ("exists", report.exists.to_string()),
            ("unconditional", report.unconditional.to_string()),
        ])?,
    };
    output::emit(args.common.out.as_ref(), &text)
}
