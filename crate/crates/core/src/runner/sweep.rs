use std::io::Write;

use rayon::prelude::*;

use super::config::{Family, MethodChoice, Metric, SweepConfig};
use crate::dispersion::{propagate_gaussian_closed_form, Medium, PropagationSpec};
use crate::error::{Error, Result};
use crate::metrics::{gamma_gaussian, symbol_rate, BroadeningMethod, NumericBroadening};
use crate::modes::{
    ChirpedGaussianMode, GeneralizedGaussianMode, SechMode, TemporalMode, TimeBinQubitMode,
};
use crate::qkd::{key_rate, monte_carlo_oracle, QkdLinkParams};
use crate::units::PS;

/// One combination of swept mode, medium and link parameters; a curve over L.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveParams {
    pub family: Family,
    pub medium: Medium<f64>,
    pub sigma_ps: Option<f64>,
    pub chirp: f64,
    pub shape_q: Option<f64>,
    pub separation_ps: Option<f64>,
    pub packet_sigma_ps: Option<f64>,
    pub theta_rad: Option<f64>,
    pub phi_rad: Option<f64>,
    pub window_ps: Option<f64>,
}

impl CurveParams {
    pub fn mode(&self) -> Result<TemporalMode<f64>> {
        let sigma = self.sigma_ps.unwrap_or(f64::NAN) * PS;
        Ok(match self.family {
            Family::Gaussian => ChirpedGaussianMode::new(sigma, self.chirp)?.into(),
            Family::Ggd => {
                GeneralizedGaussianMode::new(sigma, self.chirp, self.shape_q.unwrap_or(f64::NAN))?
                    .into()
            }
            Family::Sech => SechMode::new(sigma, self.chirp)?.into(),
            Family::Timebin => TimeBinQubitMode::new(
                self.separation_ps.unwrap_or(f64::NAN) * PS,
                self.packet_sigma_ps.unwrap_or(f64::NAN) * PS,
                self.chirp,
                self.theta_rad.unwrap_or(f64::NAN),
                self.phi_rad.unwrap_or(f64::NAN),
            )?
            .into(),
        })
    }

    fn is_gaussian(&self) -> bool {
        match self.family {
            Family::Gaussian => true,
            Family::Ggd => self.shape_q == Some(2.0),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub experiment: String,
    pub curve: CurveParams,
    pub l_m: f64,
    /// Sample time of a pdf trace.
    pub t_s: Option<f64>,
    /// Values for the metric's output columns, `None` when not computed.
    pub outputs: Vec<Option<f64>>,
    pub method: Option<BroadeningMethod>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn output(&self, metric: Metric, column: &str) -> Option<f64> {
        let idx = output_columns(metric).iter().position(|c| *c == column)?;
        self.outputs.get(idx).copied().flatten()
    }
}

pub fn output_columns(metric: Metric) -> &'static [&'static str] {
    match metric {
        Metric::Broadening => &["sigma0_s", "sigma_l_s", "gamma"],
        Metric::SymbolRate => &["sigma_l_s", "t_symbol_s", "f_symbol_bd"],
        Metric::Keyrate => &[
            "sigma_l_s",
            "sigma_eff_s",
            "eta",
            "p_sig",
            "p_error",
            "p_raw",
            "qber",
            "qber_capped",
            "key_rate",
            "p_sig_mc",
            "p_error_mc",
            "stderr_sig_mc",
            "stderr_error_mc",
        ],
        Metric::Pdf => &["pdf_per_s"],
    }
}

const PARAM_COLUMNS: [&str; 12] = [
    "experiment",
    "family",
    "medium",
    "beta_s2_per_m",
    "sigma_ps",
    "chirp",
    "shape_q",
    "separation_ps",
    "packet_sigma_ps",
    "theta_rad",
    "phi_rad",
    "window_ps",
];

/// Fixed CSV header for a metric.
pub fn header(metric: Metric) -> Vec<&'static str> {
    let mut h: Vec<&str> = PARAM_COLUMNS.to_vec();
    h.push("l_m");
    if metric == Metric::Pdf {
        h.push("t_s");
    }
    h.extend_from_slice(output_columns(metric));
    h.push("method");
    h.push("error");
    h
}

/// Nine significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub metric: Metric,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header(self.metric))?;
        for row in &self.rows {
            let c = &row.curve;
            let mut rec = vec![
                row.experiment.clone(),
                c.family.as_str().to_string(),
                c.medium.label.clone(),
                fmt_float(c.medium.beta),
                fmt_opt(c.sigma_ps),
                fmt_float(c.chirp),
                fmt_opt(c.shape_q),
                fmt_opt(c.separation_ps),
                fmt_opt(c.packet_sigma_ps),
                fmt_opt(c.theta_rad),
                fmt_opt(c.phi_rad),
                fmt_opt(c.window_ps),
                fmt_float(row.l_m),
            ];
            if self.metric == Metric::Pdf {
                rec.push(fmt_opt(row.t_s));
            }
            rec.extend(row.outputs.iter().map(|&v| fmt_opt(v)));
            rec.push(
                row.method
                    .map(|m| m.as_str().to_string())
                    .unwrap_or_default(),
            );
            rec.push(row.error.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

fn opt_list(v: &[f64], used: bool) -> Vec<Option<f64>> {
    if used {
        v.iter().copied().map(Some).collect()
    } else {
        vec![None]
    }
}

/// Curves in lexicographic parameter order.
pub fn curves(config: &SweepConfig) -> Result<Vec<CurveParams>> {
    let fam = config.mode;
    let timebin = fam == Family::Timebin;
    let sigmas = opt_list(&config.sigma_ps, !timebin);
    let qs = opt_list(&config.shape_q, fam == Family::Ggd);
    let seps = opt_list(&config.separation_ps, timebin);
    let packets = opt_list(&config.packet_sigma_ps, timebin);
    let thetas = opt_list(&config.theta_rad, timebin);
    let phis = opt_list(&config.phi_rad, timebin);
    let windows = opt_list(&config.window_ps, config.metric == Metric::Keyrate);
    let mut out = Vec::new();
    for medium in config.media()? {
        for &sigma_ps in &sigmas {
            for &chirp in &config.chirp {
                for &shape_q in &qs {
                    for &separation_ps in &seps {
                        for &packet_sigma_ps in &packets {
                            for &theta_rad in &thetas {
                                for &phi_rad in &phis {
                                    for &window_ps in &windows {
                                        out.push(CurveParams {
                                            family: fam,
                                            medium: medium.clone(),
                                            sigma_ps,
                                            chirp,
                                            shape_q,
                                            separation_ps,
                                            packet_sigma_ps,
                                            theta_rad,
                                            phi_rad,
                                            window_ps,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn method_for(config: &SweepConfig, curve: &CurveParams) -> Result<BroadeningMethod> {
    match (config.method, curve.is_gaussian()) {
        (MethodChoice::ClosedForm, false) => Err(Error::Config(format!(
            "no closed form for {} modes; use method auto or numeric",
            curve.family.as_str()
        ))),
        (MethodChoice::ClosedForm, true) | (MethodChoice::Auto, true) => {
            Ok(BroadeningMethod::ClosedForm)
        }
        _ => Ok(BroadeningMethod::Numeric),
    }
}

struct Ctx<'a> {
    config: &'a SweepConfig,
    curve: &'a CurveParams,
    width: usize,
}

impl Ctx<'_> {
    fn row(
        &self,
        l_m: f64,
        t_s: Option<f64>,
        outputs: Vec<Option<f64>>,
        method: Option<BroadeningMethod>,
    ) -> SweepRow {
        SweepRow {
            experiment: self.config.experiment.clone(),
            curve: self.curve.clone(),
            l_m,
            t_s,
            outputs,
            method,
            error: None,
        }
    }

    fn failed(&self, l_m: f64, t_s: Option<f64>, err: &Error) -> SweepRow {
        SweepRow {
            error: Some(err.to_string()),
            ..self.row(l_m, t_s, vec![None; self.width], None)
        }
    }
}

fn sd_curve(ctx: &Ctx, lengths: &[f64]) -> Vec<Result<(f64, f64, BroadeningMethod)>> {
    let curve = ctx.curve;
    let method = match method_for(ctx.config, curve) {
        Ok(m) => m,
        Err(e) => {
            return lengths
                .iter()
                .map(|_| Err(Error::Config(e.to_string())))
                .collect()
        }
    };
    let beta = curve.medium.beta;
    match method {
        BroadeningMethod::ClosedForm => {
            let sigma = curve.sigma_ps.unwrap_or(f64::NAN) * PS;
            lengths
                .iter()
                .map(|&l| {
                    let g = gamma_gaussian(sigma, curve.chirp, beta, l);
                    Ok((g.sigma0, g.sigma_l, g.method))
                })
                .collect()
        }
        BroadeningMethod::Numeric => {
            let l_max = lengths.iter().copied().fold(0.0, f64::max);
            let nb = curve
                .mode()
                .and_then(|m| NumericBroadening::new(&m, beta, l_max));
            match nb {
                Ok(nb) => lengths
                    .par_iter()
                    .map(|&l| nb.gamma_at(l).map(|g| (g.sigma0, g.sigma_l, g.method)))
                    .collect(),
                Err(e) => {
                    let msg = e.to_string();
                    let numerical = e.is_numerical();
                    lengths
                        .iter()
                        .map(|_| {
                            Err(if numerical {
                                Error::Resolution(msg.clone())
                            } else {
                                Error::Config(msg.clone())
                            })
                        })
                        .collect()
                }
            }
        }
    }
}

fn eval_curve(config: &SweepConfig, curve: &CurveParams, lengths: &[f64]) -> Vec<SweepRow> {
    let ctx = Ctx {
        config,
        curve,
        width: output_columns(config.metric).len(),
    };
    match config.metric {
        Metric::Broadening => sd_curve(&ctx, lengths)
            .into_iter()
            .zip(lengths)
            .map(|(r, &l)| match r {
                Ok((s0, sl, m)) => {
                    ctx.row(l, None, vec![Some(s0), Some(sl), Some(sl / s0)], Some(m))
                }
                Err(e) => ctx.failed(l, None, &e),
            })
            .collect(),
        Metric::SymbolRate => sd_curve(&ctx, lengths)
            .into_iter()
            .zip(lengths)
            .map(
                |(r, &l)| match r.and_then(|(_, sl, m)| Ok((symbol_rate(sl)?, sl, m))) {
                    Ok((s, sl, m)) => ctx.row(
                        l,
                        None,
                        vec![Some(sl), Some(s.t_symbol), Some(s.f_symbol)],
                        Some(m),
                    ),
                    Err(e) => ctx.failed(l, None, &e),
                },
            )
            .collect(),
        Metric::Keyrate => lengths
            .iter()
            .map(|&l| match keyrate_point(config, curve, l) {
                Ok(outputs) => ctx.row(l, None, outputs, Some(BroadeningMethod::ClosedForm)),
                Err(e) => ctx.failed(l, None, &e),
            })
            .collect(),
        Metric::Pdf => pdf_rows(&ctx, lengths),
    }
}

fn keyrate_point(config: &SweepConfig, curve: &CurveParams, l: f64) -> Result<Vec<Option<f64>>> {
    let mode = ChirpedGaussianMode::new(curve.sigma_ps.unwrap_or(f64::NAN) * PS, curve.chirp)?;
    let mut params = QkdLinkParams::new(
        mode,
        curve.medium.clone(),
        config.jitter_ps * PS,
        curve.window_ps.unwrap_or(f64::NAN) * PS,
        config.slot_separation_ps * PS,
        l,
    )?;
    params.attenuation = config.attenuation_convention;
    params.qber = config.qber_convention;
    let r = key_rate(&params)?;
    let mut out = vec![
        Some(r.sigma_l),
        Some(r.sigma_eff),
        Some(r.eta),
        Some(r.p_sig),
        Some(r.p_error),
        Some(r.p_raw),
        Some(r.qber_q),
        Some(if r.qber_capped { 1.0 } else { 0.0 }),
        Some(r.key_rate_k),
    ];
    if config.monte_carlo_samples > 0 {
        let mc = monte_carlo_oracle(&params, config.monte_carlo_samples, config.seed)?;
        out.extend([
            Some(mc.p_sig_hat),
            Some(mc.p_error_hat),
            Some(mc.stderr_sig),
            Some(mc.stderr_error),
        ]);
    } else {
        out.extend([None; 4]);
    }
    Ok(out)
}

/// Linear interpolation of a sampled density; zero outside the grid.
fn interpolate(pdf: &[f64], t0: f64, dt: f64, t: f64) -> f64 {
    let x = (t - t0) / dt;
    if !(x >= 0.0) || x > (pdf.len() - 1) as f64 {
        return 0.0;
    }
    let k = (x.floor() as usize).min(pdf.len() - 2);
    let f = x - k as f64;
    pdf[k] * (1.0 - f) + pdf[k + 1] * f
}

fn pdf_rows(ctx: &Ctx, lengths: &[f64]) -> Vec<SweepRow> {
    let times = ctx.config.times_s();
    let curve = ctx.curve;
    let fail_all = |e: &Error| {
        lengths
            .iter()
            .flat_map(|&l| times.iter().map(move |&t| (l, t)))
            .map(|(l, t)| ctx.failed(l, Some(t), e))
            .collect::<Vec<_>>()
    };
    let method = match method_for(ctx.config, curve) {
        Ok(m) => m,
        Err(e) => return fail_all(&e),
    };
    let mode = match curve.mode() {
        Ok(m) => m,
        Err(e) => return fail_all(&e),
    };
    match (method, &mode) {
        (BroadeningMethod::ClosedForm, TemporalMode::ChirpedGaussian(g)) => {
            let mut rows = Vec::new();
            for &l in lengths {
                let spec = match PropagationSpec::new(curve.medium.clone(), l) {
                    Ok(s) => s,
                    Err(e) => return fail_all(&e),
                };
                for &t in &times {
                    let p = propagate_gaussian_closed_form(g, &spec, t).norm_sqr();
                    rows.push(ctx.row(
                        l,
                        Some(t),
                        vec![Some(p)],
                        Some(BroadeningMethod::ClosedForm),
                    ));
                }
            }
            rows
        }
        _ => {
            let l_max = lengths.iter().copied().fold(0.0, f64::max);
            let nb = match NumericBroadening::new(&mode, curve.medium.beta, l_max) {
                Ok(nb) => nb,
                Err(e) => return fail_all(&e),
            };
            let per_l: Vec<Vec<SweepRow>> = lengths
                .par_iter()
                .map(|&l| match nb.propagated(l) {
                    Ok(swf) => {
                        let pdf = swf.pdf();
                        let g = swf.grid();
                        times
                            .iter()
                            .map(|&t| {
                                let p = interpolate(&pdf, g.t_start(), g.dt(), t);
                                ctx.row(l, Some(t), vec![Some(p)], Some(BroadeningMethod::Numeric))
                            })
                            .collect()
                    }
                    Err(e) => times.iter().map(|&t| ctx.failed(l, Some(t), &e)).collect(),
                })
                .collect();
            per_l.into_iter().flatten().collect()
        }
    }
}

fn thread_limit() -> Option<usize> {
    std::env::var("PDL_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Evaluates every curve of the sweep. Rows come out in curve order, then L
/// (then t for pdf traces), independent of scheduling. Point failures are
/// recorded in the row instead of aborting the sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepTable> {
    config.validate()?;
    let curves = curves(config)?;
    let lengths = config.lengths_m();
    let work = || {
        curves
            .par_iter()
            .map(|c| eval_curve(config, c, &lengths))
            .collect::<Vec<_>>()
    };
    let per_curve = match thread_limit() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("PDL_THREADS: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(SweepTable {
        metric: config.metric,
        rows: per_curve.into_iter().flatten().collect(),
    })
}
