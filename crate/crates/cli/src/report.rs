//! Report structures, text rendering, and JSON/CSV serialization.
//!
//! Output is deterministic: tables iterate in key order and every number is
//! printed with a fixed format, so equal configurations produce byte-equal
//! output.

use std::fmt::Write as _;

use serde::Serialize;

use pingpong_core::analysis::{InfoReport, JointDistribution, SweepPoint};
use pingpong_core::protocol::SessionStats;

use crate::config::RunConfig;

/// Twelve-decimal fixed format for exact quantities; normalizes negative
/// zero away.
pub fn f12(value: f64) -> String {
    let value = if value == 0.0 { 0.0 } else { value };
    format!("{value:.12}")
}

fn f6(value: f64) -> String {
    let value = if value == 0.0 { 0.0 } else { value };
    format!("{value:.6}")
}

fn std_error(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// One cell of a joint probability table.
#[derive(Debug, Serialize)]
pub struct JointRow {
    pub j: u8,
    pub k: Option<u8>,
    pub m: u8,
    pub probability: f64,
}

/// JSON payload of `exact`.
#[derive(Debug, Serialize)]
pub struct ExactReport {
    pub variant: String,
    pub symmetrize: bool,
    pub joint: Vec<JointRow>,
    pub i_ae: f64,
    pub i_ab: f64,
    pub i_be: f64,
    pub qber: f64,
    pub induced_loss: f64,
    pub detection_z: f64,
    pub detection_two_basis: f64,
}

impl ExactReport {
    pub fn new(config: &RunConfig, joint: &JointDistribution, info: &InfoReport) -> ExactReport {
        let rows = joint
            .iter()
            .map(|(&(j, k, m), &probability)| JointRow {
                j,
                k,
                m,
                probability,
            })
            .collect();
        ExactReport {
            variant: config.variant.as_str().to_string(),
            symmetrize: config.symmetrize,
            joint: rows,
            i_ae: info.i_ae,
            i_ab: info.i_ab,
            i_be: info.i_be,
            qber: info.qber,
            induced_loss: info.induced_loss,
            detection_z: info.detection_z,
            detection_two_basis: info.detection_two_basis,
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "exact analysis");
        let _ = writeln!(out, "variant: {}", self.variant);
        let _ = writeln!(out, "symmetrize: {}", self.symmetrize);
        let _ = writeln!(out);
        let _ = writeln!(out, " j k m  probability");
        for row in &self.joint {
            let k = row.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(out, " {} {} {}  {}", row.j, k, row.m, f12(row.probability));
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "I_AE (sender/eavesdropper)    = {} bits", f12(self.i_ae));
        let _ = writeln!(out, "I_AB (sender/receiver)        = {} bits", f12(self.i_ab));
        let _ = writeln!(out, "I_BE (receiver/eavesdropper)  = {} bits", f12(self.i_be));
        let _ = writeln!(out, "QBER                          = {}", f12(self.qber));
        let _ = writeln!(out, "induced loss                  = {}", f12(self.induced_loss));
        let _ = writeln!(out, "detection (z-only control)    = {}", f12(self.detection_z));
        let _ = writeln!(out, "detection (two-basis control) = {}", f12(self.detection_two_basis));
        out
    }
}

/// A rate with its binomial standard error.
#[derive(Debug, Serialize)]
pub struct Rate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl Rate {
    fn new(value: f64, samples: u64) -> Rate {
        Rate {
            value,
            std_error: std_error(value, samples),
            samples,
        }
    }

    fn render(&self) -> String {
        format!("{} ± {}", f6(self.value), f6(self.std_error))
    }
}

/// One empirical joint cell with its count and frequency.
#[derive(Debug, Serialize)]
pub struct EmpiricalRow {
    pub j: u8,
    pub k: u8,
    pub m: u8,
    pub count: u64,
    pub frequency: f64,
}

/// JSON payload of `simulate`.
#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub variant: String,
    pub symmetrize: bool,
    pub eta: f64,
    pub rounds: u64,
    pub seed: u64,
    pub control_probability: f64,
    pub attack_fraction: f64,
    pub two_basis: bool,
    pub control_rounds: u64,
    pub photon_found_rate: Rate,
    pub detection_rate: Rate,
    pub message_rounds: u64,
    pub message_decoded: u64,
    pub message_lost: u64,
    pub qber: Rate,
    pub joint: Vec<EmpiricalRow>,
}

impl SimulateReport {
    pub fn new(config: &RunConfig, stats: &SessionStats) -> SimulateReport {
        let jkm_total: u64 = stats.jkm_counts.values().sum();
        let joint = stats
            .jkm_counts
            .iter()
            .map(|(&(j, k, m), &count)| EmpiricalRow {
                j,
                k,
                m,
                count,
                frequency: count as f64 / jkm_total.max(1) as f64,
            })
            .collect();
        SimulateReport {
            variant: config.variant.as_str().to_string(),
            symmetrize: config.symmetrize,
            eta: config.eta,
            rounds: config.rounds,
            seed: config.seed,
            control_probability: config.control_probability,
            attack_fraction: config.attack_fraction,
            two_basis: config.two_basis,
            control_rounds: stats.control_rounds,
            photon_found_rate: Rate::new(stats.photon_found_rate(), stats.control_rounds),
            detection_rate: Rate::new(stats.detection_rate(), stats.control_rounds),
            message_rounds: stats.message_rounds,
            message_decoded: stats.message_decoded,
            message_lost: stats.message_lost,
            qber: Rate::new(stats.qber(), stats.message_decoded),
            joint,
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "simulation");
        let _ = writeln!(
            out,
            "variant: {}  symmetrize: {}  eta: {}  rounds: {}  seed: {}",
            self.variant,
            self.symmetrize,
            f6(self.eta),
            self.rounds,
            self.seed
        );
        let _ = writeln!(
            out,
            "control probability: {}  attack fraction: {}  two-basis: {}",
            f6(self.control_probability),
            f6(self.attack_fraction),
            self.two_basis
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "control rounds: {}", self.control_rounds);
        let _ = writeln!(out, "  photon found rate: {}", self.photon_found_rate.render());
        let _ = writeln!(out, "  detection rate:    {}", self.detection_rate.render());
        let _ = writeln!(
            out,
            "message rounds: {} (decoded {}, lost {})",
            self.message_rounds, self.message_decoded, self.message_lost
        );
        let _ = writeln!(out, "  qber: {}", self.qber.render());
        if !self.joint.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, " j k m  count     frequency");
            for row in &self.joint {
                let _ = writeln!(
                    out,
                    " {} {} {}  {:<8}  {}",
                    row.j,
                    row.k,
                    row.m,
                    row.count,
                    f6(row.frequency)
                );
            }
        }
        out
    }
}

/// Renders the sweep as CSV with the stable header.
pub fn render_sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("eta,variant,f_star,I_AE_eff,I_AB_eff,induced_loss\n");
    for point in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            f12(point.eta),
            point.kind.as_str(),
            f12(point.f_star),
            f12(point.i_ae_eff),
            f12(point.i_ab_eff),
            f12(point.induced_loss)
        );
    }
    out
}
