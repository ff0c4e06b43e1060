//! Stabilizer expectations, witness bounds, Bell fidelity and parity fringes.

mod correlators;
mod ensemble;
mod parity;
mod witness;

use std::fmt::{self, Display, Write as _};

pub use correlators::{
    product_correlator, product_correlator_from_records, shot_product, shot_value,
    stabilizer_expectations, stabilizer_expectations_from_records, Estimate, StabilizerValue,
};
pub use ensemble::{
    bell_fidelity_depolarizing, calibrate_bell_depolarizing, depolarizing_average, noisy_witness,
    EnsembleAverage, NoisyWitness,
};
pub use parity::{fit_sinusoid, fit_sinusoid_free, parity_scan, ParityPoint, SineFit};
pub use witness::{
    bell_fidelity, wilson_interval, witness_bound, WitnessReport, GENUINE_THRESHOLD,
};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Line-oriented `key value...` report.
///
/// ```text
/// format_version 1
/// report witness
/// seed 7
/// g_a 0.950000 0.021794 100
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new(kind: &str, seed: Option<u64>) -> Self {
        let mut r = Report {
            lines: vec![
                format!("format_version {REPORT_FORMAT_VERSION}"),
                format!("report {kind}"),
            ],
        };
        if let Some(s) = seed {
            r.push("seed", s);
        }
        r
    }

    pub fn push(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push(format!("{key} {value}"));
        self
    }

    pub fn comment(&mut self, text: &str) -> &mut Self {
        self.lines.push(format!("# {text}"));
        self
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    /// Value fields of the first line with this key.
    pub fn get(&self, key: &str) -> Option<Vec<&str>> {
        self.lines.iter().find_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some(key)).then(|| it.collect())
        })
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

impl WitnessReport {
    /// `g_a`/`g_b` lines hold value, stderr and shot count; `p` holds value, upper
    /// error and lower error.
    pub fn write_to(&self, r: &mut Report) {
        r.push("g_a", self.g_a)
            .push("g_b", self.g_b)
            .push(
                "p",
                format_args!(
                    "{:.6} {:.6} {:.6}",
                    self.p, self.p_err_plus, self.p_err_minus
                ),
            )
            .push("threshold", GENUINE_THRESHOLD)
            .push("genuine", self.genuine);
    }
}

/// Format stabilizer values one per line as `stabilizer <pauli> <set> <value> <stderr> <n>`.
pub fn write_stabilizers(values: &[StabilizerValue], r: &mut Report) {
    for v in values {
        let mut s = String::new();
        write!(
            s,
            "{} {} {}",
            v.generator,
            v.set.map_or("-".to_string(), |l| l.to_string()),
            v.estimate
        )
        .unwrap();
        r.push("stabilizer", s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_layout() {
        let mut r = Report::new("witness", Some(7));
        witness_bound(Estimate::exact(1.0), Estimate::exact(0.9))
            .unwrap()
            .write_to(&mut r);
        let text = r.to_string();
        assert!(text.starts_with("format_version 1\nreport witness\nseed 7\n"));
        assert_eq!(r.get("genuine"), Some(vec!["true"]));
        assert_eq!(r.get("p").unwrap()[0], "0.900000");
    }
}
