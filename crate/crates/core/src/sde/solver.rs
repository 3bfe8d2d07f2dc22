//! Ensemble solvers for the mild formulation
//! `X(t) = ∫ S(t−s)F(s,X(s))ds + ∫ S(t−s)G(s,X(s))dW(s)`, both integrals
//! starting at `t0 − memory`.
//!
//! Members advance on the extended grid with step index `k` counted from its
//! first node, so the Picard iteration and the exponential Euler scheme draw
//! identical increments for the same `(seed, member, k)`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::contraction::{stepanov_norm, theta_st};
use super::noise::BrownianDriver;
use super::problem::{SdeProblem, SolverConfig};
use super::semigroup::step_factors;
use crate::ap::grid::{GridWindow, SampledPath};
use crate::error::{Error, Result};

/// Members per parallel work unit. Per-chunk partial sums are added in chunk
/// order, so reductions do not depend on scheduling.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Picard,
    ExponentialEuler,
    ExactOu,
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub config: SolverConfig,
    pub paths: Vec<SampledPath>,
    pub driver_seed: u64,
    /// `sup_t mean‖X_{n+1} − X_n‖²` per Picard iteration; empty otherwise.
    pub diagnostics: Vec<f64>,
    pub solver: SolverKind,
    /// Contraction constant computed from the problem, when available.
    pub theta_st: Option<f64>,
}

impl Ensemble {
    pub fn window(&self) -> &GridWindow {
        &self.config.window
    }

    pub fn dim(&self) -> usize {
        self.paths.first().map_or(0, SampledPath::dim)
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// States of all members at node `k`, member-major.
    pub fn states_at(&self, k: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * self.dim());
        for p in &self.paths {
            out.extend_from_slice(p.at(k));
        }
        out
    }

    /// `t ↦ mean‖X(t)‖²` over members.
    pub fn mean_square(&self) -> Vec<f64> {
        let n = self.window().len();
        let mut acc = vec![0.0; n];
        for p in &self.paths {
            for (a, v) in acc.iter_mut().zip(p.values().chunks_exact(p.dim())) {
                *a += v.iter().map(|x| x * x).sum::<f64>();
            }
        }
        acc.iter_mut().for_each(|a| *a /= self.len() as f64);
        acc
    }

    /// Ratios `diagnostics[n+1] / diagnostics[n]`.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.diagnostics.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// `member,t,x_1..x_d` rows for the first `max_members` members, sorted
    /// by member then time.
    pub fn write_csv<W: Write>(&self, out: W, max_members: Option<usize>) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["member".to_string(), "t".to_string()];
        header.extend((1..=self.dim()).map(|i| format!("x_{i}")));
        w.write_record(&header).map_err(io_err)?;
        let take = max_members.unwrap_or(self.len()).min(self.len());
        let mut row = Vec::with_capacity(self.dim() + 2);
        for (m, path) in self.paths.iter().take(take).enumerate() {
            for k in 0..path.len() {
                row.clear();
                row.push(m.to_string());
                row.push(path.window().node(k).to_string());
                row.extend(path.at(k).iter().map(f64::to_string));
                w.write_record(&row).map_err(io_err)?;
            }
        }
        w.flush().map_err(|e| Error::invalid(e.to_string()))
    }

    /// `iter,supMeanSq` rows, iterations counted from 1.
    pub fn write_diagnostics_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iter", "supMeanSq"]).map_err(io_err)?;
        for (i, d) in self.diagnostics.iter().enumerate() {
            w.write_record([(i + 1).to_string(), d.to_string()]).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::invalid(e.to_string()))
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv output: {e}"))
}

/// Shared per-run quantities.
struct Setup<'a> {
    problem: &'a SdeProblem,
    ext: GridWindow,
    lead: usize,
    factors: Vec<f64>,
    driver: Option<BrownianDriver>,
}

impl<'a> Setup<'a> {
    fn new(problem: &'a SdeProblem, config: &SolverConfig) -> Result<Self> {
        problem.validate()?;
        config.validate()?;
        let ext = config.extended_window();
        let dt = ext.dt();
        Ok(Self {
            problem,
            lead: ext.len() - config.window.len(),
            ext,
            factors: step_factors(&problem.decay, dt),
            driver: (!problem.is_deterministic()).then(|| BrownianDriver::new(config.seed, &problem.q_diag, dt)),
        })
    }

    fn theta(&self) -> Option<f64> {
        let k = stepanov_norm(&self.problem.lipschitz, 2.0, &self.ext).ok()?;
        Some(theta_st(k, self.problem.min_decay(), self.problem.trace_q()))
    }
}

/// Scratch buffers for one member.
struct Work {
    f_cur: Vec<f64>,
    f_next: Vec<f64>,
    g: Vec<f64>,
    dw: Vec<f64>,
    det: Vec<f64>,
    sto: Vec<f64>,
}

impl Work {
    fn new(d: usize, m: usize) -> Self {
        Self {
            f_cur: vec![0.0; d],
            f_next: vec![0.0; d],
            g: vec![0.0; d * m],
            dw: vec![0.0; m],
            det: vec![0.0; d],
            sto: vec![0.0; d],
        }
    }
}

/// One Picard sweep for one member: `new = Γ(old)` on the extended grid.
/// Deterministic part by exponential trapezoid
/// `I_{k+1} = e(I_k + dt/2·F_k) + dt/2·F_{k+1}`, stochastic part by the
/// left-point sum `S_{k+1} = e(S_k + G_k ΔW_k)`.
fn picard_member(s: &Setup, member: u64, old: &[f64], new: &mut [f64], w: &mut Work) -> Result<()> {
    let d = s.problem.dim();
    let m = s.problem.noise_dim();
    let dt = s.ext.dt();
    let half = 0.5 * dt;
    let mut stream = s.driver.as_ref().map(|drv| drv.stream(member, 0));
    w.det.iter_mut().for_each(|v| *v = 0.0);
    w.sto.iter_mut().for_each(|v| *v = 0.0);
    new[..d].iter_mut().for_each(|v| *v = 0.0);
    s.problem.drift_into(s.ext.node(0), &old[..d], &mut w.f_cur)?;
    for k in 0..s.ext.len() - 1 {
        let t = s.ext.node(k);
        let xk = &old[k * d..(k + 1) * d];
        if let Some(stream) = stream.as_mut() {
            s.problem.diffusion_into(t, xk, &mut w.g)?;
            stream.next_into(&mut w.dw);
            for i in 0..d {
                let gdw: f64 = (0..m).map(|j| w.g[i * m + j] * w.dw[j]).sum();
                w.sto[i] = s.factors[i] * (w.sto[i] + gdw);
            }
        }
        let x_next = &old[(k + 1) * d..(k + 2) * d];
        s.problem.drift_into(s.ext.node(k + 1), x_next, &mut w.f_next)?;
        let out = &mut new[(k + 1) * d..(k + 2) * d];
        for i in 0..d {
            w.det[i] = s.factors[i] * (w.det[i] + half * w.f_cur[i]) + half * w.f_next[i];
            out[i] = w.det[i] + w.sto[i];
        }
        std::mem::swap(&mut w.f_cur, &mut w.f_next);
    }
    Ok(())
}

/// Picard iteration from `X₀ ≡ 0`, all members in lockstep. Stops when the
/// sup over the output window of the ensemble mean squared update falls
/// below `picard_tol`.
pub fn picard_solve(problem: &SdeProblem, config: &SolverConfig) -> Result<Ensemble> {
    let s = Setup::new(problem, config)?;
    let theta = s.theta();
    if let Some(th) = theta {
        if th >= 1.0 {
            log::warn!("contraction constant {th:.4} >= 1; iterating anyway");
        }
    }
    let d = problem.dim();
    let m = problem.noise_dim();
    let ne = s.ext.len();
    let n_out = config.window.len();
    let n = config.ensemble_n;
    let mut old: Vec<Vec<f64>> = vec![vec![0.0; ne * d]; n];
    let mut new: Vec<Vec<f64>> = vec![vec![0.0; ne * d]; n];
    let mut diagnostics = Vec::new();
    for iter in 1..=config.picard_max_iter {
        let partials: Vec<Vec<f64>> = new
            .par_chunks_mut(CHUNK)
            .zip(old.par_chunks(CHUNK))
            .enumerate()
            .map(|(c, (new_chunk, old_chunk))| {
                let mut w = Work::new(d, m);
                let mut sums = vec![0.0; n_out];
                for (j, (nw, od)) in new_chunk.iter_mut().zip(old_chunk).enumerate() {
                    picard_member(&s, (c * CHUNK + j) as u64, od, nw, &mut w)?;
                    for (k, acc) in sums.iter_mut().enumerate() {
                        let base = (s.lead + k) * d;
                        *acc += (0..d).map(|i| (nw[base + i] - od[base + i]).powi(2)).sum::<f64>();
                    }
                }
                Ok(sums)
            })
            .collect::<Result<_>>()?;
        let mut total = vec![0.0; n_out];
        for part in &partials {
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        }
        let sup = total.iter().fold(0.0f64, |a, &b| a.max(b)) / n as f64;
        if !sup.is_finite() {
            return Err(Error::NonFinite { t: config.window.t0() });
        }
        diagnostics.push(sup);
        log::debug!("picard iteration {iter}: {sup:e}");
        std::mem::swap(&mut old, &mut new);
        if sup < config.picard_tol {
            let paths = old
                .into_iter()
                .map(|v| SampledPath::new(config.window, d, v[s.lead * d..].to_vec()))
                .collect::<Result<_>>()?;
            return Ok(Ensemble {
                config: *config,
                paths,
                driver_seed: config.seed,
                diagnostics,
                solver: SolverKind::Picard,
                theta_st: theta,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: config.picard_max_iter,
        last: diagnostics.last().copied().unwrap_or(f64::NAN),
    })
}

/// `X_{k+1} = S(dt)(X_k + F(t_k,X_k)dt + G(t_k,X_k)ΔW_k)` from `X = 0` at
/// `t0 − memory`.
pub fn exponential_euler_solve(problem: &SdeProblem, config: &SolverConfig) -> Result<Ensemble> {
    let s = Setup::new(problem, config)?;
    let d = problem.dim();
    let m = problem.noise_dim();
    let dt = s.ext.dt();
    let n_out = config.window.len();
    let paths: Vec<SampledPath> = (0..config.ensemble_n)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|members| {
            let mut w = Work::new(d, m);
            let mut x = vec![0.0; d];
            let mut out = Vec::with_capacity(members.len());
            for &member in members {
                x.iter_mut().for_each(|v| *v = 0.0);
                let mut stream = s.driver.as_ref().map(|drv| drv.stream(member as u64, 0));
                let mut vals = Vec::with_capacity(n_out * d);
                if s.lead == 0 {
                    vals.extend_from_slice(&x);
                }
                for k in 0..s.ext.len() - 1 {
                    let t = s.ext.node(k);
                    problem.drift_into(t, &x, &mut w.f_cur)?;
                    w.sto.iter_mut().for_each(|v| *v = 0.0);
                    if let Some(stream) = stream.as_mut() {
                        problem.diffusion_into(t, &x, &mut w.g)?;
                        stream.next_into(&mut w.dw);
                        for i in 0..d {
                            w.sto[i] = (0..m).map(|j| w.g[i * m + j] * w.dw[j]).sum();
                        }
                    }
                    for i in 0..d {
                        x[i] = s.factors[i] * (x[i] + w.f_cur[i] * dt + w.sto[i]);
                    }
                    if k + 1 >= s.lead {
                        vals.extend_from_slice(&x);
                    }
                }
                out.push(SampledPath::new(config.window, d, vals)?);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(Ensemble {
        config: *config,
        paths,
        driver_seed: config.seed,
        diagnostics: Vec::new(),
        solver: SolverKind::ExponentialEuler,
        theta_st: s.theta(),
    })
}

/// `sup_t (mean‖X(t) − Y(t)‖²)^{1/2}` for ensembles on one grid.
pub fn sup_rms_distance(a: &Ensemble, b: &Ensemble) -> Result<f64> {
    if a.len() != b.len() || a.dim() != b.dim() || !a.window().same_grid(b.window()) {
        return Err(Error::GridMismatch);
    }
    let n = a.window().len();
    let mut acc = vec![0.0; n];
    for (p, q) in a.paths.iter().zip(&b.paths) {
        for (k, slot) in acc.iter_mut().enumerate() {
            *slot += p.at(k).iter().zip(q.at(k)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        }
    }
    Ok((acc.into_iter().fold(0.0, f64::max) / a.len() as f64).sqrt())
}
