//! Solution sets of the angular equation on the circle.
//!
//! Nonconstant profiles are generated from closed orbits of the reduced
//! system whose period matches a mode `k`, then lifted to the angular
//! variable and checked against the angular equation by finite differences.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nlparams::{beta_q, mode_bounds, reduce, ModeBounds, Nonlinearity, ProblemParams, ReducedParams};
use crate::odeint::{integrate as ode, integrate_grid, Direction, Event, IntegratorConfig};
use crate::periodfn::{find_amplitude_for_period, period_of, OrbitKind};
use crate::vfield::{field_p1, field_wy, PhasePoint, SlopeState};

/// Samples per least period of generated profiles before refinement.
pub const SAMPLES_PER_PERIOD: usize = 2520;
/// Minimum samples per least period accepted by [`verify_profile`].
pub const MIN_SAMPLES_PER_PERIOD: usize = 2048;
/// Default relative residual tolerance of [`verify_profile`].
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    SignChanging,
    Positive,
    Constant,
    Explicit,
}

/// Samples of a profile `ω` on the uniform grid `σᵢ = 2πi/n` of `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularProfile {
    pub label: String,
    pub k: u32,
    pub kind: ProfileKind,
    pub sigma: Vec<f64>,
    pub omega: Vec<f64>,
}

impl AngularProfile {
    fn from_period(label: String, k: u32, kind: ProfileKind, one_period: &[f64]) -> Self {
        let n = one_period.len() * k as usize;
        Self {
            label,
            k,
            kind,
            sigma: (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect(),
            omega: (0..n).map(|i| one_period[i % one_period.len()]).collect(),
        }
    }

    fn from_fn(label: String, k: u32, kind: ProfileKind, per_period: usize, f: impl Fn(f64) -> f64) -> Self {
        let n = per_period * k as usize;
        let sigma: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let omega = sigma.iter().map(|&s| f(s)).collect();
        Self { label, k, kind, sigma, omega }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    fn max_abs(&self) -> f64 {
        self.omega.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of sign changes over one full turn, read cyclically and
    /// skipping exact zeros.
    pub fn sign_changes(&self) -> usize {
        let signs: Vec<f64> = self.omega.iter().filter(|v| **v != 0.0).map(|v| v.signum()).collect();
        if signs.is_empty() {
            return 0;
        }
        (0..signs.len()).filter(|&i| signs[i] != signs[(i + 1) % signs.len()]).count()
    }

    /// Largest `|ω(σ + 2π/m) - ω(σ)|` over the grid; `None` when the shift is
    /// not a whole number of samples.
    pub fn shift_defect(&self, m: u32) -> Option<f64> {
        let n = self.len();
        if m == 0 || !n.is_multiple_of(m as usize) {
            return None;
        }
        let s = n / m as usize;
        Some((0..n).map(|i| (self.omega[(i + s) % n] - self.omega[i]).abs()).fold(0.0, f64::max))
    }

    /// `2π/k` is a period to `tol` (relative) and no `2π/j` with `k | j`,
    /// `j > k`, representable on the grid is.
    pub fn least_period_ok(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let periodic = self.shift_defect(self.k).is_some_and(|d| d <= tol * scale);
        let n = self.len() as u32;
        let smaller = (2..=12)
            .filter_map(|m| self.shift_defect(self.k * m).filter(|_| self.k * m < n))
            .any(|d| d <= 1e-6 * scale);
        periodic && !smaller
    }
}

/// Finite-difference residual of the angular equation along a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Largest residual relative to `scale`.
    pub max_residual: f64,
    /// Root-mean-square residual relative to `scale`.
    pub l2_residual: f64,
    /// Largest magnitude of any term of the equation on the checked points.
    pub scale: f64,
    pub checked: usize,
    pub excluded: usize,
    pub tol: f64,
    pub passed: bool,
}

fn signed_pow(s: f64, e: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.abs().powf(e).copysign(s)
    }
}

/// Fourth-order central difference on a periodic grid.
fn periodic_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let at = |o: isize| v[(i as isize + o).rem_euclid(n as isize) as usize];
            (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
        })
        .collect()
}

/// Checks `(A^((p-2)/2) ω')' + λ A^((p-2)/2) ω + |ω|^(q-1) ω - c|ω|^(p-2) ω = 0`,
/// `A = β²ω² + ω'²`, with fourth-order periodic differences. Points within
/// four samples of a zero of `ω` (a sign change or `|ω| <= 1e-10 max|ω|`)
/// are skipped.
pub fn verify_profile(profile: &AngularProfile, params: &ProblemParams, tol: f64) -> Result<ResidualReport> {
    let n = profile.len();
    if profile.k == 0 || n / (profile.k as usize) < MIN_SAMPLES_PER_PERIOD {
        return Err(Error::GridTooCoarse(format!(
            "{} samples for {} periods; need {MIN_SAMPLES_PER_PERIOD} per period",
            n, profile.k
        )));
    }
    let (p, q, c) = (params.p, params.q, params.c);
    let beta = params.beta();
    let lambda = params.lambda();
    let h = 2.0 * PI / n as f64;
    let om = &profile.omega;
    let d1 = periodic_derivative(om, h);
    let weight: Vec<f64> = (0..n)
        .map(|i| (beta * beta * om[i] * om[i] + d1[i] * d1[i]).powf((p - 2.0) / 2.0))
        .collect();
    let flux: Vec<f64> = (0..n).map(|i| weight[i] * d1[i]).collect();
    let dflux = periodic_derivative(&flux, h);

    let tiny = 1e-10 * profile.max_abs();
    let mut skip = vec![false; n];
    for i in 0..n {
        let j = (i + 1) % n;
        if om[i].abs() <= tiny || om[i] * om[j] < 0.0 {
            for o in -4isize..=5 {
                skip[(i as isize + o).rem_euclid(n as isize) as usize] = true;
            }
        }
    }
    let mut terms = Vec::with_capacity(n);
    let mut scale = 0.0f64;
    for i in (0..n).filter(|&i| !skip[i]) {
        let t = [
            dflux[i],
            lambda * weight[i] * om[i],
            signed_pow(om[i], q),
            -c * signed_pow(om[i], p - 1.0),
        ];
        scale = t.iter().fold(scale, |m, v| m.max(v.abs()));
        terms.push(t.iter().sum::<f64>());
    }
    let checked = terms.len();
    if checked == 0 {
        return Err(Error::GridTooCoarse("every sample lies next to a zero".into()));
    }
    let scale = scale.max(f64::MIN_POSITIVE);
    let max_residual = terms.iter().fold(0.0f64, |m, r| m.max(r.abs())) / scale;
    let l2_residual = (terms.iter().map(|r| r * r).sum::<f64>() / checked as f64).sqrt() / scale;
    Ok(ResidualReport {
        max_residual,
        l2_residual,
        scale,
        checked,
        excluded: n - checked,
        tol,
        passed: max_residual < tol,
    })
}

/// Residual of the reduced `p = 1` equation
/// `(w'/√(w²+w'²))' - b w/√(w²+w'²) + w - d sign(w)` from exact derivatives.
pub fn p1_reduced_residual(w: f64, wp: f64, wpp: f64, rp: &ReducedParams) -> f64 {
    let rho = w.hypot(wp);
    w * (w * wpp - wp * wp) / rho.powi(3) - rp.b * w / rho + w - rp.d * w.signum()
}

/// Closed-form `p = 1`, `c = 0` families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ExplicitFamily {
    /// `ω_K⁺ = (√(1 - K² sin²σ) - K cos σ)^(1/q)`, `K ∈ (0, 1)`.
    Translate { k_param: f64 },
    /// `ω₀⁺ = (2|sin σ|)^(1/q)`, requires `q < 1`.
    PositiveZero,
    /// `ω₀ = 2^(1/q) |sin σ|^((1-q)/q) sin σ`, requires `q <= 1`.
    SignChangingZero,
}

/// Samples an explicit `p = 1` family member with `per_period` samples per
/// least period.
pub fn p1_explicit(family: ExplicitFamily, q: f64, per_period: usize) -> Result<AngularProfile> {
    if !(q > 0.0) {
        return Err(Error::Domain(format!("need q > 0, got {q}")));
    }
    let e = 1.0 / q;
    match family {
        ExplicitFamily::Translate { k_param } => {
            if !(k_param > 0.0 && k_param < 1.0) {
                return Err(Error::Domain(format!("need K in (0, 1), got {k_param}")));
            }
            let kk = k_param;
            Ok(AngularProfile::from_fn(format!("explicit-K{kk}"), 1, ProfileKind::Explicit, per_period, move |s| {
                let w = (1.0 - kk * kk * s.sin().powi(2)).sqrt() - kk * s.cos();
                w.powf(e)
            }))
        }
        ExplicitFamily::PositiveZero => {
            if !(q < 1.0) {
                return Err(Error::Domain(format!("the positive zero family needs q < 1, got {q}")));
            }
            Ok(AngularProfile::from_fn("explicit-positive-zero".into(), 2, ProfileKind::Explicit, per_period, move |s| {
                (2.0 * s.sin().abs()).powf(e)
            }))
        }
        ExplicitFamily::SignChangingZero => {
            if !(q <= 1.0) {
                return Err(Error::Domain(format!("the sign-changing family needs q <= 1, got {q}")));
            }
            Ok(AngularProfile::from_fn("explicit-sign-changing".into(), 1, ProfileKind::Explicit, per_period, move |s| {
                2f64.powf(e) * s.sin().abs().powf((1.0 - q) / q) * s.sin()
            }))
        }
    }
}

/// One nonconstant mode of a solution set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSolution {
    pub k: u32,
    pub kind: ProfileKind,
    /// `ν` for sign-changing, `μ` for positive modes.
    pub amplitude: f64,
    pub target_period: f64,
    pub measured_period: f64,
    pub residual: ResidualReport,
    pub sign_changes: usize,
    pub min_value: f64,
    pub least_period_ok: bool,
    pub samples_per_period: usize,
    #[serde(skip)]
    pub profile: AngularProfile,
}

impl ModeSolution {
    /// Every per-profile check holds.
    pub fn verified(&self) -> bool {
        let zeros = match self.kind {
            ProfileKind::SignChanging => self.sign_changes == 2 * self.k as usize,
            _ => self.sign_changes == 0 && self.min_value > 0.0,
        };
        let period = (self.measured_period - self.target_period).abs() <= 1e-6 * self.target_period;
        self.residual.passed && zeros && self.least_period_ok && period
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplicitEntry {
    pub family: ExplicitFamily,
    pub k: u32,
    pub residual: ResidualReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSet {
    pub params: ProblemParams,
    pub reduced: ReducedParams,
    pub constants: Vec<f64>,
    pub sign_changing: Vec<ModeSolution>,
    pub positive: Vec<ModeSolution>,
    pub explicit_families: Vec<ExplicitEntry>,
    pub mode_bounds: ModeBounds,
    /// Convention relating `k` to the reduced period.
    pub period_convention: &'static str,
    pub k_max: u32,
    pub notes: Vec<String>,
    /// Modes that were searched for but not produced or not verified.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveConfig {
    /// Largest sign-changing mode searched.
    pub k_max: u32,
    pub integrator: IntegratorConfig,
    pub residual_tol: f64,
    /// Largest grid refinement factor tried when a profile fails its
    /// residual check.
    pub max_refinement: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            k_max: 6,
            integrator: IntegratorConfig::default(),
            residual_tol: DEFAULT_RESIDUAL_TOL,
            max_refinement: 32,
        }
    }
}

/// Tolerances for sampling orbits that feed finite differences.
fn profile_cfg(cfg: &IntegratorConfig) -> IntegratorConfig {
    cfg.with_tol(cfg.rel_tol.min(1e-13), f64::MIN_POSITIVE).with_radial_norm()
}

/// One reduced period of the orbit generating mode `k`, sampled at
/// [`SAMPLES_PER_PERIOD`] uniform times.
fn reduced_period_samples(
    kind: OrbitKind,
    amplitude: f64,
    rp: &ReducedParams,
    nl: &dyn Nonlinearity,
    cfg: &IntegratorConfig,
    n: usize,
) -> Result<Vec<f64>> {
    let p1 = rp.p == 1.0;
    let field = |_: f64, s: &[f64; 2]| -> Result<[f64; 2]> {
        if p1 {
            field_p1(SlopeState { w: s[0], u: s[1] }, rp, nl)
        } else {
            field_wy(PhasePoint { w: s[0], y: s[1] }, rp, nl).map(|e| e.value)
        }
    };
    let (start, pieces) = match kind {
        OrbitKind::SignChanging => ([0.0, amplitude], 4),
        OrbitKind::Positive => ([amplitude, 0.0], 2),
    };
    // Time to the symmetry axis, measured on the orbit itself.
    let ev = [Event::new("axis", |_, s: &[f64; 2]| s[1]).direction(Direction::Falling).terminal()];
    let cfg = profile_cfg(cfg);
    let tr = ode(field, 0.0, start, 1e7, &ev, &cfg)?;
    let t_piece = tr
        .events
        .first()
        .ok_or_else(|| Error::NoCrossing("generating orbit never reached its symmetry axis".into()))?
        .t;
    let m = n / pieces;
    let grid: Vec<f64> = (0..=m).map(|j| t_piece * j as f64 / m as f64).collect();
    let piece: Vec<f64> = integrate_grid(field, start, &grid, &cfg)?.iter().map(|s| s[0]).collect();
    let mut w = vec![0.0; n];
    match kind {
        OrbitKind::SignChanging => {
            for j in 0..=2 * m {
                w[j] = if j <= m { piece[j] } else { piece[2 * m - j] };
            }
            w[0] = 0.0;
            w[2 * m] = 0.0;
            for j in 2 * m + 1..n {
                w[j] = -w[j - 2 * m];
            }
        }
        OrbitKind::Positive => {
            for j in 0..n {
                w[j] = if j <= m { piece[j] } else { piece[n - j] };
            }
        }
    }
    Ok(w)
}

fn solve_mode(
    k: u32,
    kind: OrbitKind,
    amplitude: f64,
    params: &ProblemParams,
    rp: &ReducedParams,
    nl: &dyn Nonlinearity,
    cfg: &SolveConfig,
) -> Result<ModeSolution> {
    let target = params.mode_period(k);
    let pkind = match kind {
        OrbitKind::SignChanging => ProfileKind::SignChanging,
        OrbitKind::Positive => ProfileKind::Positive,
    };
    let label = format!("{}-k{k}-a{amplitude:.6e}", if pkind == ProfileKind::SignChanging { "sign-changing" } else { "positive" });
    let mut per_period = SAMPLES_PER_PERIOD;
    let (profile, residual) = loop {
        let w = reduced_period_samples(kind, amplitude, rp, nl, &cfg.integrator, per_period)?;
        let one: Vec<f64> = w.iter().map(|&v| params.lift_value(v)).collect();
        let profile = AngularProfile::from_period(label.clone(), k, pkind, &one);
        let residual = verify_profile(&profile, params, cfg.residual_tol)?;
        if residual.passed || per_period >= SAMPLES_PER_PERIOD * cfg.max_refinement {
            break (profile, residual);
        }
        per_period *= 2;
    };
    let measured_period = period_of(kind, amplitude, rp, nl, &cfg.integrator)?.period;
    Ok(ModeSolution {
        k,
        kind: pkind,
        amplitude,
        target_period: target,
        measured_period,
        residual,
        sign_changes: profile.sign_changes(),
        min_value: profile.omega.iter().cloned().fold(f64::INFINITY, f64::min),
        least_period_ok: profile.least_period_ok(1e-8),
        samples_per_period: per_period,
        profile,
    })
}

/// Amplitude search and profile generation for each listed mode.
fn collect_modes(
    modes: &[u32],
    kind: OrbitKind,
    params: &ProblemParams,
    rp: &ReducedParams,
    nl: &dyn Nonlinearity,
    cfg: &SolveConfig,
    notes: &mut Vec<String>,
    failures: &mut Vec<String>,
) -> Vec<ModeSolution> {
    let results = crate::periodfn::parallel_map(modes, |&k| {
        let r: Result<Vec<ModeSolution>> = (|| {
            let amps = find_amplitude_for_period(params.mode_period(k), kind, rp, nl, &cfg.integrator)?;
            amps.into_iter().map(|a| solve_mode(k, kind, a, params, rp, nl, cfg)).collect()
        })();
        Ok((k, r))
    })
    .expect("mode workers are infallible");
    let mut out = Vec::new();
    for (k, r) in results {
        match r {
            Ok(v) => {
                if v.len() > 1 {
                    notes.push(format!("{kind:?} mode k = {k}: {} distinct amplitudes", v.len()));
                }
                for m in &v {
                    if !m.verified() {
                        failures.push(format!("{kind:?} mode k = {k} (amplitude {}) failed verification", m.amplitude));
                    }
                }
                out.extend(v);
            }
            Err(e) => failures.push(format!("{kind:?} mode k = {k}: {e}")),
        }
    }
    out
}

/// Constant, sign-changing and positive solutions for the given parameters;
/// sign-changing modes are searched up to `cfg.k_max`.
pub fn build_solution_set(params: &ProblemParams, cfg: &SolveConfig) -> Result<SolutionSet> {
    let rp = reduce(params);
    let nl = rp.nonlinearity();
    let bounds = mode_bounds(params)?;
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    let constants: Vec<f64> = params.constant_solution().into_iter().collect();
    let mut sign_changing = Vec::new();
    let mut positive = Vec::new();
    let mut explicit_families = Vec::new();

    if params.p > 1.0 {
        let k_q = bounds.k_q.unwrap_or(1);
        let modes: Vec<u32> = (k_q..=cfg.k_max).collect();
        if modes.is_empty() {
            notes.push(format!("first sign-changing mode k_q = {k_q} exceeds k_max = {}", cfg.k_max));
        }
        sign_changing = collect_modes(&modes, OrbitKind::SignChanging, params, &rp, &nl, cfg, &mut notes, &mut failures);
        let pmodes: Vec<u32> = bounds.positive.iter().collect();
        positive = collect_modes(&pmodes, OrbitKind::Positive, params, &rp, &nl, cfg, &mut notes, &mut failures);
    } else {
        let c = params.c;
        if c > 0.0 {
            let pmodes: Vec<u32> = bounds.positive.iter().collect();
            positive = collect_modes(&pmodes, OrbitKind::Positive, params, &rp, &nl, cfg, &mut notes, &mut failures);
        }
        if c == 0.0 {
            let mut fams: Vec<ExplicitFamily> = (1..=9).map(|i| ExplicitFamily::Translate { k_param: i as f64 / 10.0 }).collect();
            if params.q < 1.0 {
                fams.push(ExplicitFamily::PositiveZero);
            }
            if params.q <= 1.0 {
                fams.push(ExplicitFamily::SignChangingZero);
            }
            for family in fams {
                let profile = p1_explicit(family, params.q, SAMPLES_PER_PERIOD)?;
                let residual = verify_profile(&profile, params, cfg.residual_tol)?;
                if !residual.passed {
                    failures.push(format!("explicit family {family:?} failed verification"));
                }
                explicit_families.push(ExplicitEntry { family, k: profile.k, residual });
            }
            notes.push("translate family sampled at K = 0.1, 0.2, ..., 0.9".into());
        }
    }
    Ok(SolutionSet {
        params: *params,
        reduced: rp,
        constants,
        sign_changing,
        positive,
        explicit_families,
        mode_bounds: bounds,
        period_convention: "mode k has reduced period 2π·(τ/σ)/k",
        k_max: cfg.k_max,
        notes,
        failures,
    })
}

/// Existence test for sign-changing singular solutions in a planar sector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorReport {
    pub theta: f64,
    pub k_geom: f64,
    pub beta_s: f64,
    pub beta_q: f64,
    pub exists: bool,
    /// `p < 2` and `q >= 2(p-1)/(2-p)`: existence for every opening.
    pub unconditional: bool,
    pub notes: Vec<String>,
}

/// Positive root `β_S` of `(s-1)β² + (s(p-2)/(p-1) - 2)β - 1 = 0`,
/// `s = (1 + θ/π)²`.
pub fn sector_beta(p: f64, theta: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("need p > 1, got {p}")));
    }
    if !(theta > 0.0 && theta < 2.0 * PI) {
        return Err(Error::Domain(format!("need 0 < θ < 2π, got {theta}")));
    }
    let k = PI / theta;
    let s = (1.0 + 1.0 / k).powi(2);
    let a = s - 1.0;
    let b = s * (p - 2.0) / (p - 1.0) - 2.0;
    let disc = (b * b + 4.0 * a).sqrt();
    Ok(if b >= 0.0 { 2.0 / (b + disc) } else { (disc - b) / (2.0 * a) })
}

pub fn sector_exists(p: f64, q: f64, theta: f64) -> Result<SectorReport> {
    let beta_s = sector_beta(p, theta)?;
    let beta_q = beta_q(p, q)?;
    let unconditional = p < 2.0 && q >= 2.0 * (p - 1.0) / (2.0 - p);
    let exists = beta_q < beta_s;
    let mut notes = Vec::new();
    if unconditional && !exists {
        notes.push("unconditional criterion and exponent comparison disagree".into());
    }
    Ok(SectorReport {
        theta,
        k_geom: PI / theta,
        beta_s,
        beta_q,
        exists,
        unconditional,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile_residual_vanishes() {
        let params = ProblemParams::new(3.0, 5.0, 70.0).unwrap();
        let v = params.constant_solution().unwrap();
        let prof = AngularProfile::from_fn("c".into(), 1, ProfileKind::Constant, 2520, |_| v);
        let r = verify_profile(&prof, &params, 1e-12).unwrap();
        assert!(r.max_residual < 1e-13, "{r:?}");
    }

    #[test]
    fn coarse_grid_rejected() {
        let params = ProblemParams::new(2.0, 3.0, 0.0).unwrap();
        let prof = AngularProfile::from_fn("c".into(), 2, ProfileKind::Constant, 1000, |s| s.sin());
        assert!(matches!(verify_profile(&prof, &params, 1e-5), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn reduced_p1_identity_exact() {
        let rp = ReducedParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let worst = (0..2520)
            .map(|i| 2.0 * PI * i as f64 / 2520.0)
            .filter(|s| s.sin() != 0.0)
            .map(|s| p1_reduced_residual(2.0 * s.sin(), 2.0 * s.cos(), -2.0 * s.sin(), &rp).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn explicit_profiles_verify() {
        for q in [0.5, 0.8, 2.0] {
            let params = ProblemParams::new(1.0, q, 0.0).unwrap();
            for i in 1..=9 {
                let prof = p1_explicit(ExplicitFamily::Translate { k_param: i as f64 / 10.0 }, q, 2520).unwrap();
                let r = verify_profile(&prof, &params, 1e-6).unwrap();
                assert!(r.passed, "q={q} K={}: {r:?}", i as f64 / 10.0);
                assert!(prof.least_period_ok(1e-12));
            }
        }
        let params = ProblemParams::new(1.0, 0.5, 0.0).unwrap();
        for fam in [ExplicitFamily::PositiveZero, ExplicitFamily::SignChangingZero] {
            let prof = p1_explicit(fam, 0.5, 2520).unwrap();
            let r = verify_profile(&prof, &params, 1e-6).unwrap();
            assert!(r.passed, "{fam:?} {r:?}");
        }
        assert!(p1_explicit(ExplicitFamily::PositiveZero, 1.0, 2520).is_err());
        assert!(p1_explicit(ExplicitFamily::Translate { k_param: 1.0 }, 1.0, 2520).is_err());
    }

    #[test]
    fn explicit_translate_values() {
        let prof = p1_explicit(ExplicitFamily::Translate { k_param: 0.5 }, 1.0, 2520).unwrap();
        assert!((prof.omega[0] - 0.5).abs() < 1e-15);
        assert!((prof.omega[1260] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn sign_change_and_shift_checks() {
        let prof = AngularProfile::from_fn("s".into(), 3, ProfileKind::SignChanging, 2520, |s| (3.0 * s).sin());
        assert_eq!(prof.sign_changes(), 6);
        assert!(prof.least_period_ok(1e-8));
        let wrong = AngularProfile { k: 1, ..prof.clone() };
        assert!(!wrong.least_period_ok(1e-8));
    }

    #[test]
    fn sector_p2_closed_form() {
        for theta in [0.3, 1.0, PI, 5.0, 6.2] {
            let b = sector_beta(2.0, theta).unwrap();
            assert!((b - PI / theta).abs() < 1e-12 * (PI / theta), "{theta}");
        }
        let r = sector_exists(2.0, 3.0, PI).unwrap();
        assert!(!r.exists && (r.beta_s - 1.0).abs() < 1e-15);
        assert!(sector_exists(2.0, 5.0, PI).unwrap().exists);
        assert!(sector_exists(1.5, 2.0, 6.0).unwrap().unconditional);
        assert!(sector_exists(2.0, 3.0, 0.0).is_err());
    }

    #[test]
    fn duffing_solution_set_modes() {
        let params = ProblemParams::new(2.0, 3.0, 0.0).unwrap();
        let set = build_solution_set(&params, &SolveConfig { k_max: 3, ..Default::default() }).unwrap();
        assert!(set.constants.is_empty() && set.positive.is_empty());
        let ks: Vec<u32> = set.sign_changing.iter().map(|m| m.k).collect();
        assert_eq!(ks, vec![2, 3]);
        for m in &set.sign_changing {
            assert!(m.verified(), "{m:?}");
        }
        assert!(set.notes.is_empty(), "{:?}", set.notes);
    }
}
