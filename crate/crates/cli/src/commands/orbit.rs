use clap::Args;
use serde::Serialize;
use sepsol::nlparams::{phi, reduce, Nonlinearity, ProblemParams, ReducedParams};
use sepsol::odeint::{integrate, integrate_grid, Event, IntegratorConfig};
use sepsol::orbitlab::{classify, homoclinic, homoclinic_with_offset, painleve, painleve_p1, OrbitTag, Witness};
use sepsol::vfield::{field_p1, field_polar_p1, field_wy, PhasePoint, SlopeState};

use crate::error::CliError;
use crate::output::{self, Format};
use crate::{Common, ParamArgs};

#[derive(Args, Debug)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Starting abscissa `w`.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub w0: f64,
    /// Starting slope `y = w'`.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub y0: f64,
    /// Length of the integration interval in reduced time.
    #[arg(long, default_value_t = 20.0)]
    pub span: f64,
    /// Number of uniformly spaced output rows.
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    /// Shoot the homoclinic orbit instead of integrating from a start point.
    #[arg(long)]
    pub homoclinic: bool,
    /// Launch offset from the saddle for `--homoclinic`.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

/// Coordinates the orbit is integrated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Flow {
    /// `(w, y)`.
    Cartesian,
    /// `(θ, ρ)`, used for `p = 1`, `d = 0`.
    PolarP1,
    /// `(w, u)` with `u = y/√(w²+y²)`, used for `p = 1`, `d ≠ 0`.
    SlopeP1,
}

impl Flow {
    fn name(self) -> &'static str {
        match self {
            Flow::Cartesian => "cartesian",
            Flow::PolarP1 => "polar",
            Flow::SlopeP1 => "slope",
        }
    }

    fn to_wy(self, s: &[f64; 2]) -> (f64, f64) {
        match self {
            Flow::Cartesian => (s[0], s[1]),
            Flow::PolarP1 => (s[1] * s[0].cos(), s[1] * s[0].sin()),
            Flow::SlopeP1 => (s[0], s[0] * s[1] / (1.0 - s[1] * s[1]).sqrt()),
        }
    }

    fn lift(self, w: f64, y: f64) -> [f64; 2] {
        match self {
            Flow::Cartesian => [w, y],
            Flow::PolarP1 => [y.atan2(w), w.hypot(y)],
            Flow::SlopeP1 => [w, phi(y / w, 1.0)],
        }
    }

    fn field(self, s: &[f64; 2], rp: &ReducedParams, nl: &dyn Nonlinearity) -> sepsol::Result<[f64; 2]> {
        match self {
            Flow::Cartesian => field_wy(PhasePoint { w: s[0], y: s[1] }, rp, nl).map(|e| e.value),
            Flow::PolarP1 => field_polar_p1(s[0], s[1], rp, nl),
            Flow::SlopeP1 => field_p1(SlopeState { w: s[0], u: s[1] }, rp, nl),
        }
    }
}

#[derive(Debug, Serialize)]
struct Row {
    tau: f64,
    w: f64,
    y: f64,
    rho: f64,
}

impl Row {
    fn new(tau: f64, w: f64, y: f64) -> Self {
        Self { tau, w, y, rho: w.hypot(y) }
    }
}

#[derive(Debug, Serialize)]
struct EventRow {
    tau: f64,
    kind: &'static str,
    w: f64,
    y: f64,
}

#[derive(Debug, Serialize)]
struct Drift {
    initial: f64,
    max_abs_drift: f64,
    /// `max_abs_drift / |initial|`, absent when `|initial| < 1e-12`.
    max_rel_drift: Option<f64>,
}

#[derive(Debug, Serialize)]
struct HomoclinicMeta {
    m_d: f64,
    apex_w: f64,
    return_slope: f64,
    epsilon: f64,
}

#[derive(Debug, Serialize)]
struct Meta {
    schema: &'static str,
    params: ProblemParams,
    reduced: ReducedParams,
    chart: &'static str,
    stationary: bool,
    class: Option<OrbitTag>,
    witness: Option<Witness>,
    classification_error: Option<String>,
    events: Vec<EventRow>,
    first_integral: Option<Drift>,
    homoclinic: Option<HomoclinicMeta>,
}

#[derive(Serialize)]
struct Full<'a> {
    #[serde(flatten)]
    meta: &'a Meta,
    rows: &'a [Row],
}

fn drift(values: impl Iterator<Item = sepsol::Result<f64>>) -> Option<Drift> {
    let vals: Vec<f64> = values.collect::<sepsol::Result<_>>().ok()?;
    let initial = *vals.first()?;
    let max_abs_drift = vals.iter().map(|v| (v - initial).abs()).fold(0.0, f64::max);
    Some(Drift {
        initial,
        max_abs_drift,
        max_rel_drift: (initial.abs() >= 1e-12).then(|| max_abs_drift / initial.abs()),
    })
}

fn first_integral(rows: &[Row], rp: &ReducedParams, nl: &dyn Nonlinearity) -> Option<Drift> {
    if rp.p == 1.0 {
        if rows.iter().any(|r| !(r.w > 0.0)) {
            return None;
        }
        drift(rows.iter().map(|r| painleve_p1(r.w, phi(r.y / r.w, 1.0), rp, nl)))
    } else {
        drift(rows.iter().map(|r| painleve(PhasePoint { w: r.w, y: r.y }, rp, nl)))
    }
}

fn shoot(args: &OrbitArgs, params: ProblemParams, rp: ReducedParams, cfg: &IntegratorConfig) -> Result<(Meta, Vec<Row>), CliError> {
    if rp.p == 1.0 {
        return Err(CliError::Input("--homoclinic needs p > 1".into()));
    }
    let h = match args.epsilon {
        Some(eps) if !(eps > 0.0) => return Err(CliError::Input(format!("--epsilon must be positive, got {eps}"))),
        Some(eps) => homoclinic_with_offset(&rp, eps, cfg)?,
        None => homoclinic(&rp, cfg)?,
    };
    let rows: Vec<Row> = h.trajectory.t.iter().zip(&h.trajectory.states).map(|(&t, s)| Row::new(t, s[0], s[1])).collect();
    let nl = rp.nonlinearity();
    let meta = Meta {
        schema: "sepsol.orbit.v1",
        params,
        reduced: rp,
        chart: "regularized",
        stationary: false,
        class: Some(OrbitTag::Homoclinic),
        witness: None,
        classification_error: None,
        events: h
            .trajectory
            .events
            .iter()
            .map(|e| EventRow { tau: e.t, kind: e.kind, w: e.state[0], y: e.state[1] })
            .collect(),
        first_integral: first_integral(&rows, &rp, &nl),
        homoclinic: Some(HomoclinicMeta {
            m_d: h.m_initial,
            apex_w: h.apex_w,
            return_slope: h.return_slope,
            epsilon: h.epsilon,
        }),
    };
    Ok((meta, rows))
}

/// Orbit type for `p = 1` read off the integrated arc.
fn p1_class(flow: Flow, start: &[f64; 2], end: &[f64; 2], rows: &[Row], y_crossings: usize) -> Option<OrbitTag> {
    if flow == Flow::PolarP1 && (end[0] - start[0]).abs() >= 2.0 * std::f64::consts::PI {
        return Some(OrbitTag::ClosedAroundOrigin);
    }
    (rows.iter().all(|r| r.w > 0.0) && y_crossings >= 2).then_some(OrbitTag::ClosedAroundP0)
}

fn trace(args: &OrbitArgs, params: ProblemParams, rp: ReducedParams, cfg: &IntegratorConfig) -> Result<(Meta, Vec<Row>), CliError> {
    let (w0, y0) = (args.w0, args.y0);
    if !(w0.is_finite() && y0.is_finite()) {
        return Err(CliError::Input("start must be finite".into()));
    }
    if w0 == 0.0 && y0 == 0.0 {
        return Err(CliError::Input("the origin is a singular point of the field".into()));
    }
    if !(args.span > 0.0 && args.span.is_finite()) {
        return Err(CliError::Input(format!("--span must be positive, got {}", args.span)));
    }
    if args.samples < 2 {
        return Err(CliError::Input("--samples must be at least 2".into()));
    }
    let flow = match (rp.p == 1.0, rp.d == 0.0) {
        (false, _) => Flow::Cartesian,
        (true, true) => Flow::PolarP1,
        (true, false) => Flow::SlopeP1,
    };
    if flow == Flow::SlopeP1 && !(w0 > 0.0) {
        return Err(CliError::Input("p = 1 with c ≠ 0 is integrated in the slope chart and needs w0 > 0".into()));
    }
    let nl = rp.nonlinearity();
    let s0 = flow.lift(w0, y0);
    let mut meta = Meta {
        schema: "sepsol.orbit.v1",
        params,
        reduced: rp,
        chart: flow.name(),
        stationary: false,
        class: None,
        witness: None,
        classification_error: None,
        events: Vec::new(),
        first_integral: None,
        homoclinic: None,
    };
    let at_rest = y0 == 0.0 && rp.stationary_amplitude(&nl).is_some_and(|a| (w0.abs() - a).abs() <= 1e-12 * a);
    if at_rest || flow.field(&s0, &rp, &nl)? == [0.0, 0.0] {
        meta.stationary = true;
        return Ok((meta, vec![Row::new(0.0, w0, y0)]));
    }

    let field = |_: f64, s: &[f64; 2]| flow.field(s, &rp, &nl);
    let n = args.samples;
    let grid: Vec<f64> = (0..n).map(|i| args.span * i as f64 / (n - 1) as f64).collect();
    let mut cfg = *cfg;
    cfg.max_step = cfg.max_step.min(grid[1]);
    let cfg = &cfg;
    let states = integrate_grid(field, s0, &grid, cfg)?;
    let rows: Vec<Row> = grid
        .iter()
        .zip(&states)
        .map(|(&t, s)| {
            let (w, y) = flow.to_wy(s);
            Row::new(t, w, y)
        })
        .collect();
    let events = [
        Event::new("w=0", move |_, s: &[f64; 2]| flow.to_wy(s).0),
        Event::new("y=0", move |_, s: &[f64; 2]| flow.to_wy(s).1),
    ];
    let tr = integrate(field, 0.0, s0, args.span, &events, cfg)?;
    meta.events = tr
        .events
        .iter()
        .map(|e| {
            let (w, y) = flow.to_wy(&e.state);
            EventRow { tau: e.t, kind: e.kind, w, y }
        })
        .collect();

    if flow == Flow::Cartesian {
        match classify(PhasePoint { w: w0.abs(), y: y0.abs() }, &rp, &nl, cfg) {
            Ok(c) => {
                meta.class = Some(c.tag);
                meta.witness = Some(c.witness);
            }
            Err(e) => meta.classification_error = Some(e.to_string()),
        }
    } else {
        let y_crossings = meta.events.iter().filter(|e| e.kind == "y=0").count();
        meta.class = p1_class(flow, &s0, states.last().unwrap_or(&s0), &rows, y_crossings);
        if meta.class.is_none() {
            meta.classification_error = Some("orbit did not close within the span".into());
        }
    }
    meta.first_integral = first_integral(&rows, &rp, &nl);
    Ok((meta, rows))
}

pub fn run(args: &OrbitArgs) -> Result<(), CliError> {
    let params = args.params.problem()?;
    let cfg = args.common.integrator()?;
    let rp = reduce(&params);
    let (meta, rows) = if args.homoclinic { shoot(args, params, rp, &cfg)? } else { trace(args, params, rp, &cfg)? };
    let text = match args.common.format_or(Format::Csv) {
        Format::Json => output::json(&Full { meta: &meta, rows: &rows })?,
        Format::Csv => {
            let mut t = output::csv_table(&rows)?;
            let trailer = serde_json::to_string(&meta).map_err(|e| CliError::Numeric(e.to_string()))?;
            t.push_str(&format!("# {trailer}\n"));
            t
        }
    };
    output::emit(args.common.out.as_ref(), &text)
}
