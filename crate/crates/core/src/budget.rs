//! Visibility budget: independent distinguishability penalties combined into
//! an expected net visibility.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom_engine::visibility_at;
use crate::wavepacket::{fwhm_to_sigma, ShapeFamily};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Penalty {
    pub label: String,
    /// Largest fractional visibility loss attributed to this effect.
    pub max_visibility_reduction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyLedger {
    pub entries: Vec<Penalty>,
    /// Visibility ceiling set by the source statistics (1/3 for unheralded
    /// thermal sources).
    pub base_cap: f64,
}

impl Default for PenaltyLedger {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
            base_cap: 1.0 / 3.0,
        }
    }
}

impl PenaltyLedger {
    pub fn new(base_cap: f64) -> Result<Self> {
        let ledger = Self {
            entries: Vec::new(),
            base_cap,
        };
        ledger.validate()?;
        Ok(ledger)
    }

    pub fn with_entry(mut self, label: impl Into<String>, reduction: f64) -> Result<Self> {
        self.entries.push(Penalty {
            label: label.into(),
            max_visibility_reduction: reduction,
        });
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_cap > 0.0 && self.base_cap <= 1.0) {
            return Err(Error::invalid("base_cap", format!("must be in (0, 1], got {}", self.base_cap)));
        }
        for e in &self.entries {
            if !(0.0..=1.0).contains(&e.max_visibility_reduction) {
                return Err(Error::invalid(
                    "max_visibility_reduction",
                    format!("`{}` must be in [0, 1], got {}", e.label, e.max_visibility_reduction),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetRow {
    pub label: String,
    pub factor: f64,
    pub cumulative: f64,
}

/// Labeled result of [`compose_budget`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetBreakdown {
    pub rows: Vec<BudgetRow>,
    pub total: f64,
    pub rule: &'static str,
}

impl BudgetBreakdown {
    /// CSV with columns `label,factor,cumulative`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["label", "factor", "cumulative"])?;
        for row in &self.rows {
            out.write_record([row.label.clone(), row.factor.to_string(), row.cumulative.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

impl fmt::Display for BudgetBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "composition: {}", self.rule)?;
        for row in &self.rows {
            writeln!(f, "{:<28} x{:.5} -> {:.5}", row.label, row.factor, row.cumulative)?;
        }
        write!(f, "{:<28}           {:.5}", "total", self.total)
    }
}

pub const MULTIPLICATIVE_RULE: &str = "base_cap * jitter_visibility * prod(1 - reduction_i)";

/// Expected net visibility: base_cap · jitter_visibility · Π(1 − rᵢ).
pub fn compose_budget(ledger: &PenaltyLedger, jitter_visibility: f64) -> Result<BudgetBreakdown> {
    ledger.validate()?;
    if !(0.0..=1.0).contains(&jitter_visibility) {
        return Err(Error::invalid("jitter_visibility", format!("must be in [0, 1], got {jitter_visibility}")));
    }
    let mut rows = Vec::with_capacity(ledger.entries.len() + 2);
    let mut running = ledger.base_cap;
    rows.push(BudgetRow {
        label: "source statistics cap".into(),
        factor: ledger.base_cap,
        cumulative: running,
    });
    running *= jitter_visibility;
    rows.push(BudgetRow {
        label: "timing jitter".into(),
        factor: jitter_visibility,
        cumulative: running,
    });
    for e in &ledger.entries {
        let factor = 1.0 - e.max_visibility_reduction;
        running *= factor;
        rows.push(BudgetRow {
            label: e.label.clone(),
            factor,
            cumulative: running,
        });
    }
    Ok(BudgetBreakdown {
        rows,
        total: running,
        rule: MULTIPLICATIVE_RULE,
    })
}

/// Fractional visibility loss from a fixed temporal offset between the two
/// photons: 1 − V(walk-off) for photons of the given coherence FWHM.
pub fn walkoff_penalty(walkoff_ps: f64, coherence_fwhm_ps: f64) -> Result<f64> {
    if !(coherence_fwhm_ps > 0.0) {
        return Err(Error::invalid("coherence_fwhm_ps", "must be > 0"));
    }
    let sigma = fwhm_to_sigma(coherence_fwhm_ps, ShapeFamily::Gaussian)?;
    Ok(1.0 - visibility_at(walkoff_ps, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn measured_ledger() -> PenaltyLedger {
        PenaltyLedger::default()
            .with_entry("multipair", 0.009)
            .and_then(|l| l.with_entry("spectral", 0.01))
            .and_then(|l| l.with_entry("gvd walk-off", 0.002))
            .and_then(|l| l.with_entry("polarization", 0.03))
            .unwrap()
    }

    #[test]
    fn budget_examples() {
        let empty = compose_budget(&PenaltyLedger::default(), 1.0).unwrap();
        assert_relative_eq!(empty.total, 1.0 / 3.0);
        let b = compose_budget(&measured_ledger(), 0.957).unwrap();
        let oracle = (1.0 / 3.0) * 0.957 * 0.991 * 0.99 * 0.998 * 0.97;
        assert_relative_eq!(b.total, oracle, max_relative = 1e-14);
        assert!((b.total - 0.3029).abs() < 1e-4);
        let killed = PenaltyLedger::default().with_entry("blocked", 1.0).unwrap();
        assert_eq!(compose_budget(&killed, 0.9).unwrap().total, 0.0);
        assert!(b.to_string().contains("total"));
    }

    #[test]
    fn walkoff_examples() {
        // 1 − exp(−7.3²/(4·49.68²))
        let p = walkoff_penalty(7.3, 117.0).unwrap();
        assert!((p - 0.00538).abs() < 1e-5, "{p}");
        assert_eq!(walkoff_penalty(0.0, 117.0).unwrap(), 0.0);
        assert!(walkoff_penalty(8.0, 117.0).unwrap() > p);
    }

    #[test]
    fn rejects_bad_ledgers() {
        assert!(PenaltyLedger::new(0.0).is_err());
        assert!(PenaltyLedger::default().with_entry("x", 1.5).is_err());
    }

    proptest! {
        #[test]
        fn reordering_does_not_change_the_total(rs in prop::collection::vec(0.0f64..1.0, 0..6), jv in 0.0f64..1.0) {
            let mut ledger = PenaltyLedger::default();
            for (i, r) in rs.iter().enumerate() {
                ledger = ledger.with_entry(format!("p{i}"), *r).unwrap();
            }
            let forward = compose_budget(&ledger, jv).unwrap().total;
            ledger.entries.reverse();
            let backward = compose_budget(&ledger, jv).unwrap().total;
            prop_assert!((forward - backward).abs() <= 1e-15);
            prop_assert!(forward <= ledger.base_cap);
        }

        #[test]
        fn cap_is_reached_only_without_penalties(r in 1e-6f64..1.0) {
            let ledger = PenaltyLedger::default().with_entry("x", r).unwrap();
            prop_assert!(compose_budget(&ledger, 1.0).unwrap().total < ledger.base_cap);
            prop_assert!(compose_budget(&PenaltyLedger::default(), 1.0 - r).unwrap().total < 1.0 / 3.0);
        }
    }
}
