use clap::Args;
use serde::Serialize;
use sepsol::nlparams::{m_q, mode_bounds, reduce, EMinimum, ModeBounds};

use crate::error::{input, CliError};
use crate::output::{self, opt, Format};
use crate::{Common, ParamArgs};

#[derive(Args, Debug)]
pub struct ParamsArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize)]
struct Regime {
    /// Sign of `b + d`: "positive", "zero" or "negative".
    b_plus_d: &'static str,
    /// "increasing" or "has-minimum"; absent for `p = 1`.
    energy: Option<&'static str>,
    energy_min: Option<EMinimum>,
}

#[derive(Debug, Serialize)]
struct ParamsReport {
    schema: &'static str,
    p: f64,
    q: f64,
    c: f64,
    beta_q: f64,
    lambda_q: f64,
    c_q: f64,
    b: f64,
    d: f64,
    a: Option<f64>,
    m_d: Option<f64>,
    #[serde(rename = "M_q")]
    m_q: Option<f64>,
    k_q: Option<u32>,
    mode_bounds: ModeBounds,
    constant_solution: Option<f64>,
    regime: Regime,
}

pub fn run(args: &ParamsArgs) -> Result<(), CliError> {
    let params = args.params.problem()?;
    args.common.integrator()?;
    let rp = reduce(&params);
    let nl = rp.nonlinearity();
    let bounds = mode_bounds(&params).map_err(input)?;
    let p1 = params.p == 1.0;
    let energy = rp.energy();
    let regime = Regime {
        b_plus_d: match rp.b + rp.d {
            s if s > 0.0 => "positive",
            s if s < 0.0 => "negative",
            _ => "zero",
        },
        energy: (!p1).then(|| if energy.minimum().is_some() { "has-minimum" } else { "increasing" }),
        energy_min: if p1 { None } else { energy.minimum() },
    };
    let report = ParamsReport {
        schema: "sepsol.params.v1",
        p: params.p,
        q: params.q,
        c: params.c,
        beta_q: params.beta(),
        lambda_q: params.lambda(),
        c_q: params.c_q(),
        b: rp.b,
        d: rp.d,
        a: rp.stationary_amplitude(&nl),
        m_d: if p1 { None } else { rp.saddle_slope().ok() },
        m_q: if p1 { None } else { m_q(&params).ok() },
        k_q: bounds.k_q,
        mode_bounds: bounds,
        constant_solution: params.constant_solution(),
        regime,
    };
    let text = match args.common.format_or(Format::Json) {
        Format::Json => output::json(&report)?,
        Format::Csv => {
            let range = |r: sepsol::nlparams::ModeRange| if r.is_empty() { String::new() } else { format!("{}..={}", r.lo, r.hi) };
            output::csv_pairs(&[
                ("p", report.p.to_string()),
                ("q", report.q.to_string()),
                ("c", report.c.to_string()),
                ("beta_q", report.beta_q.to_string()),
                ("lambda_q", report.lambda_q.to_string()),
                ("c_q", report.c_q.to_string()),
                ("b", report.b.to_string()),
                ("d", report.d.to_string()),
                ("a", opt(report.a)),
                ("m_d", opt(report.m_d)),
                ("M_q", opt(report.m_q)),
                ("k_q", report.k_q.map(|k| k.to_string()).unwrap_or_default()),
                ("positive_modes", range(bounds.positive)),
                ("constant_solution", opt(report.constant_solution)),
                ("b_plus_d", report.regime.b_plus_d.to_string()),
                ("energy", report.regime.energy.unwrap_or_default().to_string()),
            ])?
        }
    };
    output::emit(args.common.out.as_ref(), &text)
}
