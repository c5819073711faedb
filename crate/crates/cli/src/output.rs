//! Serialization of trajectories and reports. All numeric output uses Rust's
//! shortest round-trip decimal formatting, so files are exact replay inputs
//! and byte-identical across runs of the same configuration.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use virtdyn_core::convergence::ConvergenceReport;
use virtdyn_core::recurrence::DiscreteTrajectory;

use crate::ConfigDoc;

pub fn trajectory_csv(config: &ConfigDoc, traj: &DiscreteTrajectory) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("# schema=1\n");
    let _ = writeln!(
        out,
        "# c={} gamma={} alpha={} y0={} w0={} horizon={} mode={} steps={}",
        config.c,
        config.gamma,
        config.alpha,
        config.y0,
        config.w0,
        config.horizon,
        config.mode,
        traj.n_steps()
    );
    out.push_str("n,t,y,w,dt,dy,dw,a,f\n");
    for (i, state) in traj.states().iter().enumerate() {
        let _ = write!(out, "{},{},{},{}", state.n, state.t, state.y, state.w);
        if let Some(inc) = traj.increments().get(i) {
            // f is the per-interval force, equal to the acceleration a
            let _ = writeln!(out, ",{},{},{},{},{}", inc.dt, inc.dy, inc.dw, inc.a, inc.a);
        } else {
            out.push_str(",,,,,\n");
        }
    }
    out.into_bytes()
}

#[derive(Serialize)]
struct TrajectoryDoc<'a> {
    schema: u32,
    config: &'a ConfigDoc,
    states: &'a [virtdyn_core::recurrence::ModelState],
    increments: &'a [virtdyn_core::recurrence::StepIncrements],
}

pub fn trajectory_json(config: &ConfigDoc, traj: &DiscreteTrajectory) -> Vec<u8> {
    let doc = TrajectoryDoc {
        schema: 1,
        config,
        states: traj.states(),
        increments: traj.increments(),
    };
    pretty_json(&doc)
}

pub fn pretty_json<T: Serialize>(doc: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(doc).expect("report serialization cannot fail");
    bytes.push(b'\n');
    bytes
}

pub fn write_bytes(out: Option<&Path>, bytes: &[u8]) -> Result<(), String> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(bytes)
                .and_then(|_| lock.flush())
                .map_err(|e| format!("cannot write to stdout: {e}"))
        }
    }
}

fn float_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// A standalone matplotlib script with the sweep data inlined, plotting both
/// sup errors against c on log-log axes with a c^-1 guide line.
pub fn plot_script(report: &ConvergenceReport) -> String {
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str("# log-log sup errors vs signal speed; data inlined, no external files\n");
    s.push_str("import matplotlib\n");
    s.push_str("matplotlib.use(\"Agg\")\n");
    s.push_str("import matplotlib.pyplot as plt\n\n");
    let _ = writeln!(s, "c = [{}]", float_list(&report.c_values));
    let _ = writeln!(s, "sup_y = [{}]", float_list(&report.sup_errors_y));
    let _ = writeln!(s, "sup_w = [{}]", float_list(&report.sup_errors_w));
    let _ = writeln!(s, "rate_y = {}", report.fitted_rate_y);
    let _ = writeln!(s, "rate_w = {}", report.fitted_rate_w);
    s.push_str(
        "\nfig, ax = plt.subplots(figsize=(6, 4.5))\n\
         ax.loglog(c, sup_y, \"o-\", label=f\"sup |y - x| (rate {rate_y:+.2f})\")\n\
         ax.loglog(c, sup_w, \"s-\", label=f\"sup |w - v| (rate {rate_w:+.2f})\")\n\
         guide = [sup_w[0] * c[0] / ci for ci in c]\n\
         ax.loglog(c, guide, \"k--\", alpha=0.5, label=\"~ 1/c\")\n\
         ax.set_xlabel(\"signal speed c\")\n\
         ax.set_ylabel(\"sup error\")\n",
    );
    let _ = writeln!(
        s,
        "ax.set_title(\"gamma={} y0={} w0={} A={} mode={}\")",
        report.gamma,
        report.y0,
        report.w0,
        report.horizon_a,
        report.mode
    );
    s.push_str(
        "ax.grid(True, which=\"both\", alpha=0.3)\n\
         ax.legend()\n\
         fig.tight_layout()\n\
         fig.savefig(\"sweep_errors.png\", dpi=150)\n\
         print(\"wrote sweep_errors.png\")\n",
    );
    s
}
