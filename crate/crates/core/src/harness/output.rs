//! CSV and JSON emission. All writers are deterministic: fixed column
//! orders, struct-ordered JSON, shortest-roundtrip float formatting.

use std::path::Path;

use crate::analysis::CollapseDiagnostic;
use crate::error::Result;
use crate::mechanism::Trajectory;

/// Render a trajectory as CSV text with columns t,agent,W,U,requested,won.
/// Full recordings emit one row per round per agent with running totals;
/// checkpoint recordings emit the stored snapshots.
pub fn trajectory_csv_string(traj: &Trajectory) -> String {
    let mut out = String::from("t,agent,W,U,requested,won\n");
    if let Some(rounds) = &traj.rounds {
        let n = traj.n;
        let mut wins = vec![0u64; n];
        let mut utils = vec![0.0f64; n];
        for r in rounds {
            if let Some(w) = r.winner {
                wins[w] += 1;
                utils[w] += r.winner_value.unwrap_or(0.0);
            }
            for a in 0..n {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.t,
                    a,
                    wins[a],
                    utils[a],
                    u8::from(r.requests[a]),
                    u8::from(r.winner == Some(a)),
                ));
            }
        }
    } else {
        for cp in &traj.checkpoints {
            for a in 0..traj.n {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    cp.t,
                    a,
                    cp.wins[a],
                    cp.utilities[a],
                    u8::from(cp.requests[a]),
                    u8::from(cp.winner == Some(a)),
                ));
            }
        }
    }
    out
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    std::fs::write(path, trajectory_csv_string(traj))?;
    Ok(())
}

/// Diagnostic series: t, gap_within_max, gap_cross_min, then one X column
/// per agent.
pub fn diagnostic_csv_string(diag: &CollapseDiagnostic, n: usize) -> String {
    let mut out = String::from("t,gap_within_max,gap_cross_min");
    for a in 0..n {
        out.push_str(&format!(",x_{a}"));
    }
    out.push('\n');
    for (i, &t) in diag.times.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}",
            t, diag.within_group_gap[i], diag.cross_group_gap[i]
        ));
        for a in 0..n {
            out.push_str(&format!(",{}", diag.x[i][a]));
        }
        out.push('\n');
    }
    out
}

pub fn write_diagnostic_csv(path: &Path, diag: &CollapseDiagnostic, n: usize) -> Result<()> {
    std::fs::write(path, diagnostic_csv_string(diag, n))?;
    Ok(())
}

/// Pretty-printed JSON plus trailing newline.
pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
