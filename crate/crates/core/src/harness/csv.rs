//! CSV emission. Floats are printed with 17 significant digits so re-parsing
//! reconstructs every value bit-exactly.

use std::io::Write;
use std::path::Path;

use super::ResultTable;
use crate::error::Result;

fn f64_exact(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `policy,run,t,arm,cum_regret` rows sorted by (policy, run, t).
/// The arm column is 1-based. Failed runs contribute no rows.
pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "policy,run,t,arm,cum_regret")?;

    let mut order: Vec<usize> = (0..table.policies.len()).collect();
    order.sort_by_key(|&i| table.policies[i].name());
    for policy_idx in order {
        let name = table.policies[policy_idx].name();
        for (run, trace) in table.traces_for(policy_idx) {
            for t in 0..trace.chosen.len() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    name,
                    run,
                    t + 1,
                    trace.chosen[t] + 1,
                    f64_exact(trace.cum_regret[t])
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `policy,t,mean_cum_regret,ci_half_width,runs` aggregate rows.
pub fn emit_summary_csv(table: &ResultTable, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "policy,t,mean_cum_regret,ci_half_width,runs")?;

    let mut order: Vec<usize> = (0..table.policies.len()).collect();
    order.sort_by_key(|&i| table.policies[i].name());
    for policy_idx in order {
        let name = table.policies[policy_idx].name();
        if let Some(agg) = table.aggregate(policy_idx) {
            for t in 0..agg.mean.len() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    name,
                    t + 1,
                    f64_exact(agg.mean[t]),
                    f64_exact(agg.ci_half_width[t]),
                    agg.surviving_runs
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
