//! Text and CSV serialization of reports: flat key-value records, rate
//! curve tables and per-trial record dumps. All numbers are printed with
//! 12 significant digits.

use crate::engine::{Decision, FrequencyReport, MeasurementBasis, Role, TrialRecord};
use crate::rate::RatePoint;
use crate::security::SecurityReport;

/// 12-significant-digit scientific formatting shared by every emitter.
pub fn fmt_sig(v: f64) -> String {
    format!("{v:.11e}")
}

const SECURITY_KEYS: [&str; 12] = [
    "eps_forge",
    "eps_repud",
    "eps_sample_forge",
    "eps_sample_repud",
    "eps_decoy",
    "eps_sec",
    "eps_rob",
    "a_root",
    "s_c",
    "delta",
    "delta_1",
    "delta_2",
];

fn security_values(r: &SecurityReport<f64>) -> [f64; 12] {
    [
        r.eps_forge,
        r.eps_repud,
        r.eps_sample_forge,
        r.eps_sample_repud,
        r.eps_decoy,
        r.eps_sec,
        r.eps_rob,
        r.a_root,
        r.s_c,
        r.delta,
        r.delta_1,
        r.delta_2,
    ]
}

/// Flat `key = value` record, one line per field.
pub fn security_report_kv(r: &SecurityReport<f64>) -> String {
    SECURITY_KEYS
        .iter()
        .zip(security_values(r))
        .map(|(k, v)| format!("{k} = {}\n", fmt_sig(v)))
        .collect()
}

pub fn security_report_csv_header() -> String {
    SECURITY_KEYS.join(",")
}

pub fn security_report_csv_row(r: &SecurityReport<f64>) -> String {
    security_values(r).map(fmt_sig).join(",")
}

/// Rate curve table with one row per distance.
pub fn rate_points_csv(points: &[RatePoint]) -> String {
    let mut out = String::from("L_km,N_min,R,bps,eps_forge,eps_repud,eps_rob,eps_sec,feasible\n");
    for p in points {
        let (ef, er, erob, esec) = match &p.report {
            Some(r) => (r.eps_forge, r.eps_repud, r.eps_rob, r.eps_sec),
            None => (0.0, 0.0, 0.0, 0.0),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_sig(p.l_km),
            fmt_sig(p.n_min),
            fmt_sig(p.r),
            fmt_sig(p.bps),
            fmt_sig(ef),
            fmt_sig(er),
            fmt_sig(erob),
            fmt_sig(esec),
            p.feasible
        ));
    }
    out
}

fn basis_name(b: MeasurementBasis) -> &'static str {
    match b {
        MeasurementBasis::Z => "Z",
        MeasurementBasis::X => "X",
        MeasurementBasis::Y => "Y",
    }
}

fn decision_name(d: Decision) -> String {
    match d {
        Decision::Conclusive(b) => b.to_string(),
        Decision::Inconclusive => "inconclusive".to_string(),
    }
}

/// Per-trial dump of kept pulses.
pub fn records_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(
        "pulse_index,set_index,sent_bit,bob_click,charlie_click,bob_basis,charlie_basis,bob_conclusive,charlie_conclusive,role\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.pulse_index,
            r.set_index,
            r.sent_bit,
            r.bob_click,
            r.charlie_click,
            basis_name(r.bob_basis),
            basis_name(r.charlie_basis),
            decision_name(r.bob_conclusive),
            decision_name(r.charlie_conclusive),
            match r.role {
                Role::Test => "test",
                Role::Untested => "untested",
            }
        ));
    }
    out
}

/// Human-readable empirical frequency summary with the analytic bounds
/// alongside (pass a bound as NaN to omit the comparison).
pub fn frequency_report_text(
    f: &FrequencyReport,
    bound_repudiation: f64,
    bound_robustness: f64,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("repetitions = {}\n", f.repetitions));
    out.push_str(&format!(
        "pr_bob_accept_charlie_reject = {} (count {}, wilson_upper {})\n",
        fmt_sig(f.freq_bob_accept_charlie_reject),
        f.bob_accept_charlie_reject,
        fmt_sig(f.upper_bob_accept_charlie_reject),
    ));
    out.push_str(&format!(
        "pr_charlie_accept = {} (count {}, wilson_upper {})\n",
        fmt_sig(f.freq_charlie_accept),
        f.charlie_accept,
        fmt_sig(f.upper_charlie_accept),
    ));
    out.push_str(&format!(
        "pr_bob_reject = {} (count {}, wilson_upper {})\n",
        fmt_sig(f.freq_bob_reject),
        f.bob_reject,
        fmt_sig(f.upper_bob_reject),
    ));
    if bound_repudiation.is_finite() {
        out.push_str(&format!("bound_repudiation = {}\n", fmt_sig(bound_repudiation)));
    }
    if bound_robustness.is_finite() {
        out.push_str(&format!("bound_robustness = {}\n", fmt_sig(bound_robustness)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> SecurityReport<f64> {
        SecurityReport {
            eps_forge: 1.5e-7,
            eps_repud: 2.5e-6,
            eps_sample_forge: 1e-10,
            eps_sample_repud: 1e-10,
            eps_decoy: 0.0,
            eps_sec: 2.6502e-6,
            eps_rob: 3e-8,
            a_root: 0.004,
            s_c: 0.0745,
            delta: 0.021,
            delta_1: 1e-4,
            delta_2: 2e-4,
        }
    }

    #[test]
    fn formatting_is_twelve_significant_digits() {
        assert_eq!(fmt_sig(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_sig(294.0), "2.94000000000e2");
        assert_eq!(fmt_sig(0.0), "0.00000000000e0");
    }

    #[test]
    fn kv_and_csv_align() {
        let r = sample_report();
        let kv = security_report_kv(&r);
        assert_eq!(kv.lines().count(), 12);
        assert!(kv.contains("eps_sec = 2.65020000000e-6"));
        let header = security_report_csv_header();
        let row = security_report_csv_row(&r);
        assert_eq!(header.split(',').count(), row.split(',').count());
        assert!(header.starts_with("eps_forge,"));
    }

    #[test]
    fn rate_csv_shape() {
        let p = RatePoint {
            l_km: 100.0,
            n_min: 1.7e7,
            r: 1.0 / 3.4e7,
            bps: 294.0,
            feasible: true,
            report: Some(sample_report()),
        };
        let infeasible = RatePoint {
            l_km: 200.0,
            n_min: 0.0,
            r: 0.0,
            bps: 0.0,
            feasible: false,
            report: None,
        };
        let csv = rate_points_csv(&[p, infeasible]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "L_km,N_min,R,bps,eps_forge,eps_repud,eps_rob,eps_sec,feasible");
        assert!(lines[1].ends_with(",true"));
        assert!(lines[2].ends_with(",false"));
    }

    #[test]
    fn record_csv_header() {
        let csv = records_csv(&[]);
        assert_eq!(
            csv.trim_end(),
            "pulse_index,set_index,sent_bit,bob_click,charlie_click,bob_basis,charlie_basis,bob_conclusive,charlie_conclusive,role"
        );
    }
}
