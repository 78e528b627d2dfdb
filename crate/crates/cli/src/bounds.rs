//! Bound tables over dimension sweeps.

use std::time::Instant;

use privstate_core::measures::{self, closed};
use privstate_core::states::{KA, KB, SB};
use privstate_core::{family_construct, Family, StateFamilyParams};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{csv_string, Check, VerificationReport};

pub const TABLE_HEADER: [&str; 7] = ["family", "d", "en_measured", "en_closed", "hash_lb", "repeater_ub", "sc_ub"];

pub const TABLE_FAMILIES: [Family; 5] =
    [Family::Swap, Family::Fourier, Family::Flower, Family::Ppt, Family::PptInvariant];

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub family: Family,
    pub d: usize,
    pub en_measured: f64,
    pub en_closed: Option<f64>,
    pub hash_lb: f64,
    pub repeater_ub: f64,
    /// `|K_B| · repeater_ub`; absent for the PPT families.
    pub sc_ub: Option<f64>,
}

fn is_ppt_family(f: Family) -> bool {
    matches!(f, Family::Ppt | Family::PptInvariant)
}

pub fn compute_row(family: Family, d: usize) -> privstate_core::Result<BoundsRow> {
    if !TABLE_FAMILIES.contains(&family) {
        return Err(privstate_core::Error::UnsupportedFamily(format!(
            "no bound table for {family} (supported: swap, fourier, flower, ppt, ppt_invariant)"
        )));
    }
    let g = family_construct(&StateFamilyParams::new(family, d))?.state;
    let en_measured = measures::log_negativity(&g, &[KB, SB])?.value;
    let full = measures::hashing_lower_bound(&g, &[KB, SB])?.value;
    let keys = measures::hashing_lower_bound(&g.marginal(&[KA, KB])?, &[KB])?.value;
    let hash_lb = full.max(keys);
    let en_closed = match family {
        Family::Swap => Some(closed::en_swap(d)),
        Family::Fourier => Some(closed::en_fourier(d)),
        Family::Flower => Some(closed::en_flower(d)),
        _ => Some(0.0),
    };
    let repeater_ub = match family {
        Family::Ppt => closed::repeater_ppt(d),
        Family::PptInvariant => closed::ppt_invariant_bound(d),
        _ => 2.0 * en_measured,
    };
    let key_dim = g.layout().part(KB)?.dim;
    let sc_ub = (!is_ppt_family(family)).then(|| closed::single_copy_combinator(key_dim, repeater_ub));
    Ok(BoundsRow { family, d, en_measured, en_closed, hash_lb, repeater_ub, sc_ub })
}

pub fn default_dims(family: Family) -> Vec<usize> {
    match family {
        Family::Swap => (2..=8).collect(),
        Family::Fourier => vec![2, 3, 4, 9],
        Family::Flower => vec![2, 4, 8],
        _ => vec![4, 9],
    }
}

/// Checks attached to one table row.
pub fn row_checks(row: &BoundsRow, cfg: &RunConfig) -> Vec<Check> {
    let base = format!("bounds.{}.d{:02}", row.family, row.d);
    let mut out = Vec::new();
    if let Some(c) = row.en_closed {
        out.push(Check::close(
            format!("{base}.en-closed"),
            "measured log-negativity matches its closed form",
            row.en_measured,
            c,
            cfg.tol_or(1e-8),
        ));
    }
    out.push(Check::flag(
        format!("{base}.hash-below-en"),
        "hashing lower bound does not exceed log-negativity",
        row.hash_lb <= row.en_measured + 1e-10,
    ));
    if is_ppt_family(row.family) {
        out.push(Check::flag(
            format!("{base}.repeater-nonnegative"),
            "repeater bound is a finite non-negative rate",
            row.repeater_ub.is_finite() && row.repeater_ub >= 0.0,
        ));
    } else {
        out.push(Check::close(
            format!("{base}.repeater-2en"),
            "repeater bound is twice the log-negativity",
            row.repeater_ub,
            2.0 * row.en_measured,
            cfg.tol_or(1e-10),
        ));
    }
    if row.family == Family::Swap && row.d == 2 {
        out.push(Check::close(
            format!("{base}.repeater-value"),
            "swap repeater bound at d = 2 is 2 log2(3/2)",
            row.repeater_ub,
            1.169925,
            cfg.tol_or(1e-6),
        ));
    }
    out
}

/// Rows and checks for the configured family and dimensions.
pub fn run_bounds(cfg: &RunConfig) -> Result<(VerificationReport, Vec<BoundsRow>), CliError> {
    let family = cfg.family.unwrap_or(Family::Swap);
    let dims = cfg.dims_or(&default_dims(family));
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for d in dims {
        let start = Instant::now();
        let row = compute_row(family, d)?;
        checks.extend(row_checks(&row, cfg).into_iter().map(|c| c.timed(start)));
        rows.push(row);
    }
    Ok((VerificationReport::new(crate::metadata(cfg), checks), rows))
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.12}")).unwrap_or_default()
}

pub fn table_csv(rows: &[BoundsRow]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(TABLE_HEADER)?;
    for r in rows {
        w.write_record([
            r.family.name().to_string(),
            r.d.to_string(),
            cell(Some(r.en_measured)),
            cell(r.en_closed),
            cell(Some(r.hash_lb)),
            cell(Some(r.repeater_ub)),
            cell(r.sc_ub),
        ])?;
    }
    csv_string(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_rows() {
        let cfg = RunConfig::default();
        for d in 2..=8 {
            let row = compute_row(Family::Swap, d).unwrap();
            assert!((row.en_measured - closed::en_swap(d)).abs() < 1e-8);
            assert!(row_checks(&row, &cfg).iter().all(Check::passed), "d={d}");
        }
        let r2 = compute_row(Family::Swap, 2).unwrap();
        assert!((r2.repeater_ub - 1.169925).abs() < 1e-6);
        assert_eq!(r2.sc_ub, Some(2.0 * r2.repeater_ub));
    }

    #[test]
    fn flower_and_ppt_rows() {
        let f = compute_row(Family::Flower, 2).unwrap();
        assert!((f.hash_lb - 1.0).abs() < 1e-9);
        let p = compute_row(Family::Ppt, 4).unwrap();
        assert!(p.sc_ub.is_none());
        assert!(p.en_measured.abs() < 1e-8);
        assert!(compute_row(Family::Alpha, 4).is_err());
    }

    #[test]
    fn table_layout() {
        let rows = vec![compute_row(Family::Swap, 2).unwrap(), compute_row(Family::Ppt, 4).unwrap()];
        let s = table_csv(&rows).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "family,d,en_measured,en_closed,hash_lb,repeater_ub,sc_ub");
        assert!(lines.next().unwrap().starts_with("swap,2,0.584962500721,"));
        assert!(lines.next().unwrap().ends_with(','));
        assert!(!s.contains('\r'));
    }
}
