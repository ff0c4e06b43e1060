use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use super::ClickRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    /// Gamma-distributed arrival time with shape `k` and scale `scale_ns`.
    Gamma,
    /// Every photon arrives at `peak_ns`.
    Fixed,
}

/// Single-photon temporal profile, optionally smeared by Gaussian timing jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Wavepacket {
    pub shape: ShapeKind,
    pub k: f64,
    pub scale_ns: f64,
    pub peak_ns: f64,
    pub jitter_ns: f64,
}

impl Default for Wavepacket {
    /// Peak at 200 ns with 98% of the probability inside the first microsecond.
    fn default() -> Self {
        Wavepacket {
            shape: ShapeKind::Gamma,
            k: 2.256,
            scale_ns: 159.24,
            peak_ns: 200.0,
            jitter_ns: 0.0,
        }
    }
}

impl Wavepacket {
    pub fn fixed(peak_ns: f64) -> Self {
        Wavepacket {
            shape: ShapeKind::Fixed,
            peak_ns,
            ..Wavepacket::default()
        }
    }

    /// Most likely arrival time.
    pub fn mode_ns(&self) -> f64 {
        match self.shape {
            ShapeKind::Gamma => (self.k - 1.0).max(0.0) * self.scale_ns,
            ShapeKind::Fixed => self.peak_ns,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.shape {
            ShapeKind::Gamma => self.k > 0.0 && self.scale_ns > 0.0,
            ShapeKind::Fixed => self.peak_ns >= 0.0,
        };
        if ok && self.jitter_ns >= 0.0 && self.jitter_ns.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid wave packet {self:?}"
            )))
        }
    }
}

/// Draw one photon arrival time in ns after the pulse start.
pub fn sample_arrival<R: Rng + ?Sized>(wp: &Wavepacket, rng: &mut R) -> f64 {
    let base = match wp.shape {
        ShapeKind::Gamma => Gamma::new(wp.k, wp.scale_ns)
            .expect("validated gamma parameters")
            .sample(rng),
        ShapeKind::Fixed => wp.peak_ns,
    };
    let t = if wp.jitter_ns > 0.0 {
        base + Normal::new(0.0, wp.jitter_ns)
            .expect("validated jitter")
            .sample(rng)
    } else {
        base
    };
    t.abs()
}

/// Two-step arrival-time filter for a fusion herald.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostSelectionPolicy {
    pub window_ns: (f64, f64),
    pub tau_max_ns: f64,
}

impl Default for PostSelectionPolicy {
    fn default() -> Self {
        Self::m_f0()
    }
}

impl PostSelectionPolicy {
    /// Photons emitted from `m_F = 0`.
    pub fn m_f0() -> Self {
        PostSelectionPolicy {
            window_ns: (0.0, 1000.0),
            tau_max_ns: 250.0,
        }
    }

    /// Photons emitted from `m_F = ±2`, whose wave packets are longer.
    pub fn m_f2() -> Self {
        PostSelectionPolicy {
            tau_max_ns: 400.0,
            ..Self::m_f0()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_ns.0 < self.window_ns.1 && self.tau_max_ns > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid post-selection policy {self:?}"
            )))
        }
    }

    pub fn in_window(&self, t: f64) -> bool {
        t >= self.window_ns.0 && t <= self.window_ns.1
    }

    pub fn judge(&self, t_r: f64, t_l: f64) -> Verdict {
        if !self.in_window(t_r) || !self.in_window(t_l) {
            Verdict::RejectWindow
        } else if (t_r - t_l).abs() > self.tau_max_ns {
            Verdict::RejectTau
        } else {
            Verdict::Accept
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    RejectWindow,
    RejectTau,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::RejectWindow => "reject_window",
            Verdict::RejectTau => "reject_tau",
        })
    }
}

pub fn post_select(pair: (&ClickRecord, &ClickRecord), policy: &PostSelectionPolicy) -> Verdict {
    policy.judge(pair.0.time_ns, pair.1.time_ns)
}
