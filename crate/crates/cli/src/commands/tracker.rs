use serde_json::json;
use strokelab_core::tracker::{evaluate_tracker, Convention};

use super::{frame_spec, path_str, read_trajectory};
use crate::config::ConfigFile;
use crate::io::{ensure_distinct, write_json};
use crate::{CliError, EvalTrackerArgs};

pub const DEFAULT_THRESHOLD: f64 = 25.0;

pub fn run(a: EvalTrackerArgs, cfg: &ConfigFile) -> Result<String, CliError> {
    if let Some(out) = &a.out {
        ensure_distinct(&[out], &[&a.gt, &a.pred])?;
    }
    let frame = frame_spec(cfg)?;
    let threshold = cfg.pick(a.threshold, "threshold", DEFAULT_THRESHOLD)?;
    let convention = cfg.pick(a.mislocalized, "mislocalized", Convention::Literal)?;
    let gt = read_trajectory(&a.gt, frame)?;
    let pred = read_trajectory(&a.pred, frame)?;
    let report = evaluate_tracker(&gt, &pred, threshold, convention)?;
    if let Some(out) = &a.out {
        write_json(
            out,
            &json!({
                "config": {
                    "gt": path_str(&a.gt),
                    "pred": path_str(&a.pred),
                    "threshold": threshold,
                    "mislocalized": convention,
                },
                "report": report,
            }),
        )?;
    }
    let m = report.metrics_rounded;
    let c = report.counts;
    Ok(format!(
        "eval-tracker: tp={} tn={} fp={} fn={} precision {:.4} recall {:.4} accuracy {:.2}% f1 {:.4}",
        c.tp, c.tn, c.fp, c.fn_, m.precision, m.recall, m.accuracy_pct, m.f1
    ))
}
