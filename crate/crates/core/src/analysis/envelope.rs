use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::algorithms::RunTrace;
use crate::error::{Error, Result};
use crate::graph::{diameter, graph_union, is_connected, Graph};
use crate::linalg::format_f64;

/// Constants of the consensus envelope
/// `‖x_k - x̄_k‖ ≤ n^{3/2} γ^⌊k/(τ̄ d_G)⌋ ‖x_0 - x̄_0‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub q: f64,
    /// Connectivity window, in iterations.
    pub tau_bar: usize,
    pub d_g: usize,
    pub gamma_envelope: f64,
}

impl EnvelopeParams {
    pub fn new(q: f64, tau_bar: usize, d_g: usize) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("q = {q} outside (0, 1)")));
        }
        if tau_bar == 0 || d_g == 0 {
            return Err(Error::InvalidParameter("tau_bar and d_G must be >= 1".into()));
        }
        Ok(Self {
            q,
            tau_bar,
            d_g,
            gamma_envelope: gamma_envelope(q, tau_bar, d_g),
        })
    }

    /// `q = 1/(1 + n_max)` and the diameter of `reference`.
    pub fn for_reference(reference: &Graph, tau_bar: usize) -> Result<Self> {
        let d_g = diameter(reference)
            .finite()
            .ok_or_else(|| Error::InvalidParameter("reference graph is disconnected".into()))?;
        Self::new(min_weight_bound(reference), tau_bar, d_g.max(1))
    }

    pub fn bound(&self, n: usize, k: usize, initial: f64) -> f64 {
        let exponent = k / (self.tau_bar * self.d_g);
        (n as f64).powf(1.5) * self.gamma_envelope.powi(exponent.min(i32::MAX as usize) as i32) * initial
    }
}

pub fn gamma_envelope(q: f64, tau_bar: usize, d_g: usize) -> f64 {
    1.0 - q.powf((tau_bar * d_g) as f64)
}

/// Lower bound on every positive Metropolis–Hastings weight over subgraphs
/// of `reference`.
pub fn min_weight_bound(reference: &Graph) -> f64 {
    1.0 / (1.0 + reference.max_degree() as f64)
}

/// Iteration-level window implied by a cycle-level refresh period `r`
/// with cycles of `tau` iterations.
pub fn tau_bar_from_refresh(refresh_period: usize, tau: usize) -> usize {
    (refresh_period.max(1) - 1) * tau + 1
}

/// Runs of identical graphs: `(first iteration, length, graph)`.
fn segments(trace: &RunTrace) -> Vec<(usize, usize, &Graph)> {
    let k_max = trace.iterations();
    let mut out = Vec::new();
    for (c, rec) in trace.cycles.iter().enumerate() {
        if rec.start >= k_max {
            break;
        }
        let end = trace.cycles.get(c + 1).map_or(k_max, |n| n.start.min(k_max));
        out.push((rec.start, end - rec.start, &rec.graph));
    }
    out
}

/// Checks that the union of graphs over every window of `tau_bar`
/// consecutive executed iterations is connected.
pub fn check_connectivity_window(trace: &RunTrace, tau_bar: usize) -> Result<()> {
    if tau_bar == 0 {
        return Err(Error::InvalidParameter("tau_bar must be >= 1".into()));
    }
    let segs = segments(trace);
    let k_max = trace.iterations();
    // A window starting at a segment boundary touches the fewest segments.
    for (s, &(start, _, _)) in segs.iter().enumerate() {
        if start + tau_bar > k_max {
            break;
        }
        let last_iter = start + tau_bar - 1;
        let e = s + segs[s..].partition_point(|seg| seg.0 <= last_iter) - 1;
        let union = graph_union(segs[s..=e].iter().map(|seg| seg.2))?;
        if !is_connected(&union) {
            return Err(Error::ConnectivityViolated {
                first: start,
                last: last_iter,
            });
        }
    }
    Ok(())
}

/// Smallest window length for which every complete window of executed
/// iterations has a connected union; `None` if no such window exists.
pub fn measure_tau_bar(trace: &RunTrace) -> Option<usize> {
    let segs = segments(trace);
    let mut worst = 1;
    for s in 0..segs.len() {
        let mut acc = segs[s].2.clone();
        for e in s..segs.len() {
            if e > s {
                acc = graph_union([&acc, segs[e].2]).ok()?;
            }
            if is_connected(&acc) {
                let need = if e == s { 1 } else { segs[e].0 - segs[s].0 + 1 };
                worst = worst.max(need);
                break;
            }
        }
    }
    check_connectivity_window(trace, worst).ok().map(|_| worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub k: usize,
    pub actual: f64,
    pub bound: f64,
    /// `bound / actual`; infinite at exact consensus.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub params: EnvelopeParams,
    pub holds: bool,
    pub min_margin: f64,
    pub first_violation: Option<usize>,
    pub rows: Vec<EnvelopeRow>,
}

#[derive(Serialize)]
struct EnvelopeSummary<'a> {
    pass: bool,
    min_margin: Option<f64>,
    first_violation: Option<usize>,
    params: &'a EnvelopeParams,
}

impl EnvelopeReport {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        write_margin_csv(out, self.rows.iter().map(|r| (r.k, r.actual, r.bound, r.margin)))
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&EnvelopeSummary {
            pass: self.holds,
            min_margin: self.min_margin.is_finite().then_some(self.min_margin),
            first_violation: self.first_violation,
            params: &self.params,
        })?)
    }
}

pub(crate) fn write_margin_csv(out: impl Write, rows: impl Iterator<Item = (usize, f64, f64, f64)>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "actual", "bound", "margin"])?;
    for (k, actual, bound, margin) in rows {
        w.write_record([k.to_string(), format_f64(actual), format_f64(bound), format_f64(margin)])?;
    }
    w.flush()?;
    Ok(())
}

/// Checks the consensus envelope at every row of `trace`. Fails with
/// [`Error::ConnectivityViolated`] when the graph sequence breaks the
/// `tau_bar` connectivity window; a violated bound is reported in the
/// returned report instead.
pub fn consensus_envelope(trace: &RunTrace, params: &EnvelopeParams) -> Result<EnvelopeReport> {
    check_connectivity_window(trace, params.tau_bar)?;
    let n = trace.final_x.rows();
    let initial = trace.rows.first().map_or(0.0, |r| r.disagreement);
    // Relative slack for the rounding of an exactly-met bound.
    let slack = 1e-12 * initial.max(f64::MIN_POSITIVE);
    let mut rows = Vec::with_capacity(trace.rows.len());
    let mut min_margin = f64::INFINITY;
    let mut first_violation = None;
    for r in &trace.rows {
        let bound = params.bound(n, r.k, initial);
        let margin = if r.disagreement == 0.0 { f64::INFINITY } else { bound / r.disagreement };
        min_margin = min_margin.min(margin);
        if r.disagreement > bound + slack && first_violation.is_none() {
            first_violation = Some(r.k);
        }
        rows.push(EnvelopeRow {
            k: r.k,
            actual: r.disagreement,
            bound,
            margin,
        });
    }
    Ok(EnvelopeReport {
        params: *params,
        holds: first_violation.is_none(),
        min_margin,
        first_violation,
        rows,
    })
}
