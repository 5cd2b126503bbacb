use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use qwalk::analysis::{distribution, Distribution, WalkSummary};
use qwalk::evolution::Evolution;
use qwalk::isomorphism::{
    check_decomposition_claims, check_translation_equivalence, isomorphism_trials,
    ISOMORPHISM_TOLERANCE,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{invalid, RunConfig};
use crate::output::{fmt_num, fmt_prob, read_distribution, write_distribution, write_json};

#[derive(Serialize)]
struct Final {
    recurrence: f64,
    variance_x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    variance_y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discrepancy: Option<f64>,
}

#[derive(Serialize)]
struct RunSummary {
    config: Value,
    halfwidth: usize,
    recurrence: Vec<f64>,
    variance_x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    variance_y: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discrepancy: Option<Vec<f64>>,
    norm_residual: Vec<f64>,
    #[serde(rename = "final")]
    last: Final,
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_timing(dir: &Path, command: &str, start: Instant) -> Result<()> {
    write_json(
        &dir.join("timing.json"),
        &json!({ "command": command, "wall_seconds": start.elapsed().as_secs_f64() }),
    )
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let start = Instant::now();
    let spec = cfg.walk_spec(cfg.phi)?;
    let reference = cfg.reference.as_deref().map(read_distribution).transpose()?;
    if let Some(r) = &reference {
        if r.dimensionality() != spec.dimensionality() {
            return Err(invalid("reference", "dimensionality differs from the walk"));
        }
    }
    prepare_out(&cfg.out)?;
    let steps_dir = cfg.out.join("steps");
    if cfg.per_step {
        prepare_out(&steps_dir)?;
    }
    let width = cfg.steps.to_string().len();

    let mut ev = Evolution::new(&spec)?;
    let mut summaries = Vec::with_capacity(cfg.steps);
    let mut residuals = Vec::with_capacity(cfg.steps);
    while let Some(r) = ev.advance()? {
        let p = distribution(ev.state());
        summaries.push(WalkSummary::of(ev.steps_done(), &p, reference.as_ref())?);
        residuals.push(r);
        if cfg.per_step {
            let name = format!("step_{:0width$}.csv", ev.steps_done());
            write_distribution(&steps_dir.join(name), &p)?;
        }
    }
    let p = distribution(ev.state());
    let last = WalkSummary::of(cfg.steps, &p, reference.as_ref())?;
    write_distribution(&cfg.out.join("distribution.csv"), &p)?;

    let two = p.lattice().dimensionality().axes() == 2;
    let summary = RunSummary {
        config: cfg.echo(Some(cfg.phi)),
        halfwidth: p.lattice().halfwidth(),
        recurrence: summaries.iter().map(|s| s.recurrence).collect(),
        variance_x: summaries.iter().map(|s| s.variance_x).collect(),
        variance_y: two.then(|| summaries.iter().filter_map(|s| s.variance_y).collect()),
        discrepancy: reference
            .as_ref()
            .map(|_| summaries.iter().filter_map(|s| s.discrepancy).collect()),
        norm_residual: residuals,
        last: Final {
            recurrence: last.recurrence,
            variance_x: last.variance_x,
            variance_y: last.variance_y,
            discrepancy: last.discrepancy,
        },
    };
    write_json(&cfg.out.join("summary.json"), &summary)?;
    write_timing(&cfg.out, "run", start)?;

    println!(
        "t = {}: P(origin) = {}, Var_x = {}{}",
        cfg.steps,
        fmt_prob(last.recurrence),
        fmt_num(last.variance_x),
        last.variance_y
            .map(|v| format!(", Var_y = {}", fmt_num(v)))
            .unwrap_or_default()
    );
    if let Some(d) = last.discrepancy {
        println!("1-norm distance to reference: {}", fmt_num(d));
    }
    println!("wrote {}", cfg.out.display());
    Ok(())
}

struct SweepRow {
    phi: f64,
    final_dist: Distribution,
}

pub fn sweep(cfg: &RunConfig) -> Result<()> {
    let start = Instant::now();
    if cfg.phis.is_empty() {
        return Err(invalid("phis", "the sweep grid is empty"));
    }
    let specs = cfg
        .phis
        .iter()
        .map(|&phi| cfg.walk_spec(phi))
        .collect::<Result<Vec<_>>>()?;
    prepare_out(&cfg.out)?;

    let rows = specs
        .par_iter()
        .zip(cfg.phis.par_iter())
        .map(|(spec, &phi)| -> Result<SweepRow> {
            let state = Evolution::new(spec)?.finish()?;
            Ok(SweepRow { phi, final_dist: distribution(&state) })
        })
        .collect::<Result<Vec<_>>>()?;

    let two = cfg.dim.axes() == 2;
    let mut csv = String::from(if two {
        "phi,recurrence,variance_x,variance_y\n"
    } else {
        "phi,recurrence,variance_x\n"
    });
    for row in &rows {
        let s = WalkSummary::of(cfg.steps, &row.final_dist, None)?;
        csv.push_str(&format!("{},{},{}", fmt_num(row.phi), fmt_prob(s.recurrence), fmt_num(s.variance_x)));
        if let Some(vy) = s.variance_y {
            csv.push_str(&format!(",{}", fmt_num(vy)));
        }
        csv.push('\n');
    }
    let path = cfg.out.join("sweep.csv");
    fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
    write_json(&cfg.out.join("sweep.json"), &json!({ "config": cfg.echo(None) }))?;
    write_timing(&cfg.out, "sweep", start)?;
    print!("{csv}");
    println!("wrote {}", cfg.out.display());
    Ok(())
}

pub fn isocheck(cfg: &RunConfig) -> Result<()> {
    let start = Instant::now();
    if cfg.l == 0 {
        return Err(invalid("l", "halfwidth must be at least 1"));
    }
    if cfg.trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let results = isomorphism_trials(cfg.l, cfg.trials, cfg.seed)?;
    let translation = check_translation_equivalence(cfg.l)?;
    let decomposition = check_decomposition_claims()?;
    let max_dev = results.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let passed = max_dev < ISOMORPHISM_TOLERANCE && translation < ISOMORPHISM_TOLERANCE;

    let report = json!({
        "l": cfg.l,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "tolerance": ISOMORPHISM_TOLERANCE,
        "passed": passed,
        "max_deviation": max_dev,
        "translation_deviation": translation,
        "results": results.iter().map(|r| json!({
            "index": r.index,
            "kind": r.kind.name(),
            "deviation": r.deviation,
        })).collect::<Vec<_>>(),
        "decomposition": {
            "separable_trials": decomposition.separable_trials,
            "separable_max_deviation": decomposition.separable_max_deviation,
            "separable_confirmed": decomposition.separable_confirmed(),
            "entangled_finding": decomposition.entangled_finding.name(),
            "entangled": decomposition.entangled.iter().map(|c| json!({
                "tau": c.tau,
                "deviation_exact": c.deviation_exact,
                "global_phase": c.global_phase,
                "deviation_global_phase": c.deviation_global_phase,
                "deviation_minus_zz": c.deviation_minus_zz,
            })).collect::<Vec<_>>(),
        },
    });
    prepare_out(&cfg.out)?;
    write_json(&cfg.out.join("isocheck.json"), &report)?;
    write_timing(&cfg.out, "isocheck", start)?;

    println!(
        "L = {}, {} trials: max deviation {:e}, translation deviation {:e}",
        cfg.l, cfg.trials, max_dev, translation
    );
    println!(
        "decomposition: separable max deviation {:e}, entangled finding {}",
        decomposition.separable_max_deviation,
        decomposition.entangled_finding.name()
    );
    if !passed {
        bail!("isomorphism check failed: deviation above {ISOMORPHISM_TOLERANCE:e}");
    }
    Ok(())
}
