//! Per-run regret traces.
//!
//! A trace is one iteration record per optimizer step plus run metadata. The
//! CSV form is byte-reproducible given (config, seed): floats are printed in
//! Rust's shortest round-trip form and wall time is deliberately kept out of
//! the file (it lives in the summary instead).
//!
//! Column order is fixed:
//! `t,method,theta,norm,x1..xd,y,best_y,regret,cum_regret,active,eliminated,xi,beta,beta_sigma`
//! with a `# key=value` metadata line above the header. `regret` and
//! `cum_regret` are computed from the observed `y` against `known_max`, so
//! both can be recomputed exactly from the other columns.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One optimizer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub t: usize,
    /// Length scale used for the GP fit this step.
    pub theta: f64,
    /// Norm parameter of the selected learner.
    pub norm: f64,
    /// Queried point.
    pub x: Vec<f64>,
    /// Observed (noisy) value.
    pub y: f64,
    /// Running max of observed values over trace rows.
    pub best_y: f64,
    /// `known_max - y` when the objective's max is known.
    pub regret: Option<f64>,
    /// Running sum of `regret`.
    pub cum_regret: Option<f64>,
    /// Active candidates after this step (1 for single-learner baselines).
    pub active_candidates: usize,
    /// `(theta, norm)` pairs eliminated this step.
    pub eliminated: Vec<(f64, f64)>,
    /// Noise-concentration parameter, when the method uses one.
    pub xi: Option<f64>,
    /// Confidence radius used in the acquisition.
    pub beta: f64,
    /// `beta * sigma(x)` recorded at query time; elimination statistics
    /// replay from these exact values.
    pub beta_sigma: f64,
}

/// A full seeded run: metadata plus the iteration records.
#[derive(Debug, Clone)]
pub struct RegretTrace {
    pub method: String,
    pub seed: u64,
    pub config_hash: String,
    pub dim: usize,
    pub known_max: Option<f64>,
    /// Resolved length-scale upper bound for the run.
    pub theta0: f64,
    pub records: Vec<IterationRecord>,
    /// Wall time of the run in seconds; excluded from the CSV form.
    pub wall_time_secs: f64,
    /// Deterministic diagnostics (e.g. the candidate floor being hit).
    pub notes: Vec<String>,
}

impl RegretTrace {
    pub fn new(
        method: impl Into<String>,
        seed: u64,
        config_hash: impl Into<String>,
        dim: usize,
        known_max: Option<f64>,
        theta0: f64,
    ) -> Self {
        RegretTrace {
            method: method.into(),
            seed,
            config_hash: config_hash.into(),
            dim,
            known_max,
            theta0,
            records: Vec::new(),
            wall_time_secs: 0.0,
            notes: Vec::new(),
        }
    }

    /// Append a step, deriving `best_y`, `regret` and `cum_regret` from the
    /// previous record.
    #[allow(clippy::too_many_arguments)]
    pub fn push_step(
        &mut self,
        theta: f64,
        norm: f64,
        x: Vec<f64>,
        y: f64,
        active_candidates: usize,
        eliminated: Vec<(f64, f64)>,
        xi: Option<f64>,
        beta: f64,
        beta_sigma: f64,
    ) {
        let t = self.records.len() + 1;
        let best_y = match self.records.last() {
            Some(prev) if prev.best_y >= y => prev.best_y,
            _ => y,
        };
        let regret = self.known_max.map(|km| km - y);
        let cum_regret = regret.map(|r| {
            r + self
                .records
                .last()
                .and_then(|p| p.cum_regret)
                .unwrap_or(0.0)
        });
        self.records.push(IterationRecord {
            t,
            theta,
            norm,
            x,
            y,
            best_y,
            regret,
            cum_regret,
            active_candidates,
            eliminated,
            xi,
            beta,
            beta_sigma,
        });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Cumulative regret at the final step.
    pub fn final_cumulative_regret(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.cum_regret)
    }

    /// Best (simple) regret at the final step: `known_max - best_y`.
    pub fn final_best_regret(&self) -> Option<f64> {
        match (self.known_max, self.records.last()) {
            (Some(km), Some(r)) => Some(km - r.best_y),
            _ => None,
        }
    }

    /// Length scales in play order.
    pub fn selected_lengthscales(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.theta)
    }

    /// Recompute `best_y`, `regret` and `cum_regret` from the `y` column and
    /// check they match the stored values bit-exactly.
    pub fn verify_bookkeeping(&self) -> Result<()> {
        let mut best = f64::NEG_INFINITY;
        let mut cum = 0.0;
        for r in &self.records {
            best = if r.y > best { r.y } else { best };
            if r.best_y.to_bits() != best.to_bits() {
                return Err(Error::Invariant(format!(
                    "best_y mismatch at t={}: stored {}, recomputed {best}",
                    r.t, r.best_y
                )));
            }
            if let Some(km) = self.known_max {
                let reg = km - r.y;
                cum += reg;
                if r.regret.map(f64::to_bits) != Some(reg.to_bits())
                    || r.cum_regret.map(f64::to_bits) != Some(cum.to_bits())
                {
                    return Err(Error::Invariant(format!(
                        "regret bookkeeping mismatch at t={}",
                        r.t
                    )));
                }
            }
        }
        Ok(())
    }

    fn header(&self) -> String {
        let mut h = String::from("t,method,theta,norm");
        for j in 1..=self.dim {
            let _ = write!(h, ",x{j}");
        }
        h.push_str(",y,best_y,regret,cum_regret,active,eliminated,xi,beta,beta_sigma");
        h
    }

    /// CSV form, including the metadata comment line.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let km = self
            .known_max
            .map_or_else(|| "none".to_string(), |v| format!("{v}"));
        let _ = writeln!(
            out,
            "# method={} seed={} config={} dim={} theta0={} known_max={}",
            self.method, self.seed, self.config_hash, self.dim, self.theta0, km
        );
        let _ = writeln!(out, "{}", self.header());
        for r in &self.records {
            let _ = write!(out, "{},{},{},{}", r.t, self.method, r.theta, r.norm);
            for v in &r.x {
                let _ = write!(out, ",{v}");
            }
            let _ = write!(out, ",{},{}", r.y, r.best_y);
            let _ = write!(out, ",{}", opt(r.regret));
            let _ = write!(out, ",{}", opt(r.cum_regret));
            let _ = write!(out, ",{}", r.active_candidates);
            let elim = r
                .eliminated
                .iter()
                .map(|(th, n)| format!("{th}@{n}"))
                .collect::<Vec<_>>()
                .join(";");
            let _ = write!(out, ",{elim}");
            let _ = write!(out, ",{}", opt(r.xi));
            let _ = writeln!(out, ",{},{}", r.beta, r.beta_sigma);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv_string().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    /// Parse a trace back from its CSV form.
    pub fn parse_csv<R: BufRead>(reader: R) -> Result<RegretTrace> {
        let mut lines = reader.lines().enumerate();
        let (_, meta) = lines
            .next()
            .ok_or_else(|| parse_err(0, "empty trace file".into()))
            .and_then(|(i, l)| l.map(|l| (i, l)).map_err(|e| parse_err(i, e.to_string())))?;
        let meta = meta
            .strip_prefix("# ")
            .ok_or_else(|| parse_err(0, "missing metadata line".into()))?;
        let mut method = String::new();
        let mut seed = 0u64;
        let mut config = String::new();
        let mut dim = 0usize;
        let mut theta0 = f64::NAN;
        let mut known_max = None;
        for kv in meta.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| parse_err(0, format!("bad metadata token {kv}")))?;
            match k {
                "method" => method = v.to_string(),
                "seed" => seed = v.parse().map_err(|_| parse_err(0, "bad seed".into()))?,
                "config" => config = v.to_string(),
                "dim" => dim = v.parse().map_err(|_| parse_err(0, "bad dim".into()))?,
                "theta0" => theta0 = v.parse().map_err(|_| parse_err(0, "bad theta0".into()))?,
                "known_max" => {
                    known_max = if v == "none" {
                        None
                    } else {
                        Some(v.parse().map_err(|_| parse_err(0, "bad known_max".into()))?)
                    }
                }
                _ => return Err(parse_err(0, format!("unknown metadata key {k}"))),
            }
        }
        let mut trace = RegretTrace::new(method, seed, config, dim, known_max, theta0);
        let (i, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing header".into()))
            .and_then(|(i, l)| l.map(|l| (i, l)).map_err(|e| parse_err(i, e.to_string())))?;
        if header != trace.header() {
            return Err(parse_err(i, format!("unexpected header: {header}")));
        }
        for (i, line) in lines {
            let line = line.map_err(|e| parse_err(i, e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            let expected = 12 + dim;
            if cells.len() != expected {
                return Err(parse_err(
                    i,
                    format!("expected {expected} cells, got {}", cells.len()),
                ));
            }
            let fnum = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| parse_err(i, format!("bad number {s}")))
            };
            let fopt = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    fnum(s).map(Some)
                }
            };
            let mut x = Vec::with_capacity(dim);
            for j in 0..dim {
                x.push(fnum(cells[4 + j])?);
            }
            let eliminated = if cells[9 + dim].is_empty() {
                Vec::new()
            } else {
                cells[9 + dim]
                    .split(';')
                    .map(|pair| {
                        let (a, b) = pair
                            .split_once('@')
                            .ok_or_else(|| parse_err(i, format!("bad eliminated cell {pair}")))?;
                        Ok((fnum(a)?, fnum(b)?))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            trace.records.push(IterationRecord {
                t: cells[0].parse().map_err(|_| parse_err(i, "bad t".into()))?,
                theta: fnum(cells[2])?,
                norm: fnum(cells[3])?,
                x,
                y: fnum(cells[4 + dim])?,
                best_y: fnum(cells[5 + dim])?,
                regret: fopt(cells[6 + dim])?,
                cum_regret: fopt(cells[7 + dim])?,
                active_candidates: cells[8 + dim]
                    .parse()
                    .map_err(|_| parse_err(i, "bad active count".into()))?,
                eliminated,
                xi: fopt(cells[10 + dim])?,
                beta: fnum(cells[11 + dim])?,
                beta_sigma: fnum(cells.last().unwrap())?,
            });
        }
        Ok(trace)
    }

    pub fn read_csv(path: &Path) -> Result<RegretTrace> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(std::io::BufReader::new(f))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v}"))
}

fn parse_err(line_index: usize, message: String) -> Error {
    Error::Data {
        line: line_index + 1,
        message,
    }
}
