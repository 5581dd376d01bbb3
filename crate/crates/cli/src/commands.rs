use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context};
use cutstack::covers::{covering_curve, CoverOptions, CurveRow};
use cutstack::scenarios::{FamilyTable, StageDescriptor, StageSchedule};
use cutstack::slowent::{blume_curve, mass_split_check, slow_entropy_curves, CurveReport};
use cutstack::verify::{block_grid, run_block_grid, verify_perturbed_bound, BoundReport, Verdict};
use cutstack::{ExactTower, Rational};
use rayon::prelude::*;

use crate::config::{Loaded, ScenarioSpec};
use crate::output::{write_csv, write_svg, write_text, Provenance, Series};

/// Resolved inputs shared by every subcommand.
pub struct Ctx {
    pub loaded: Loaded,
    pub schedule: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub svg: bool,
    pub timing: bool,
}

impl Ctx {
    fn provenance(&self, command: &'static str) -> Provenance {
        Provenance { command, config_hash: self.loaded.hash(), seed: self.seed }
    }
}

/// `cut_stack(k=4)` style label from the stage's config form.
fn stage_label(stage: &StageDescriptor) -> String {
    let v = serde_json::to_value(stage).expect("stage serializes");
    let obj = v.as_object().expect("tagged stage");
    let name = obj.get("stage").and_then(|s| s.as_str()).unwrap_or("?");
    let args: Vec<String> = obj.iter().filter(|(k, _)| *k != "stage").map(|(k, v)| format!("{k}={v}")).collect();
    format!("{name}({})", args.join(","))
}

struct Built {
    tower: ExactTower,
    rows: Vec<Vec<String>>,
}

/// Executes the schedule, recording one summary row per stage. A failing
/// stage is reported with its index.
fn run_schedule(sched: &StageSchedule) -> anyhow::Result<Built> {
    let mut rows = Vec::new();
    let mut reached = 0;
    let result = sched.execute_each::<Rational>(|i, stage, t| {
        reached = i;
        rows.push(vec![
            i.to_string(),
            stage.map(stage_label).unwrap_or_else(|| "initial".into()),
            t.columns().len().to_string(),
            t.min_height().to_string(),
            t.max_height().to_string(),
            t.measure().to_string(),
        ]);
        Ok(())
    });
    let tower = match result {
        Ok(t) => t,
        Err(e) => {
            let label = sched.stages.get(reached).map(stage_label).unwrap_or_default();
            return Err(anyhow::Error::new(e).context(format!("stage {reached} ({label}) failed")));
        }
    };
    Ok(Built { tower, rows })
}

const STAGE_HEADER: [&str; 6] = ["stage_index", "stage", "columns", "min_height", "max_height", "measure"];

fn emit_build(ctx: &Ctx, prov: &Provenance, built: &Built) -> anyhow::Result<()> {
    let meta: BTreeMap<String, String> = [
        ("tool".to_string(), format!("cutstack {}", env!("CARGO_PKG_VERSION"))),
        ("config_sha256".to_string(), prov.config_hash.clone()),
        ("seed".to_string(), prov.seed.to_string()),
    ]
    .into();
    write_text(&ctx.out, "tower.json", &built.tower.to_snapshot_with(&meta))?;
    write_csv(&ctx.out, "stages.csv", prov, &STAGE_HEADER, &built.rows)?;
    Ok(())
}

fn load_tower(ctx: &mut Ctx) -> anyhow::Result<Built> {
    let sched = ctx.loaded.schedule(ctx.schedule.as_deref())?;
    run_schedule(&sched)
}

pub fn build(ctx: &mut Ctx) -> anyhow::Result<()> {
    let built = load_tower(ctx)?;
    let prov = ctx.provenance("build");
    emit_build(ctx, &prov, &built)?;
    let t = &built.tower;
    println!(
        "built {} columns, heights {}..{}, measure {} -> {}",
        t.columns().len(),
        t.min_height(),
        t.max_height(),
        t.measure(),
        ctx.out.join("tower.json").display()
    );
    Ok(())
}

fn cover_options(ctx: &Ctx) -> CoverOptions {
    ctx.loaded.config.caps.cover.clone()
}

/// Covering curves for every `(epsilon, delta)` pair of the grid.
fn curves(ctx: &Ctx, tower: &ExactTower) -> anyhow::Result<Vec<Vec<CurveRow>>> {
    let g = &ctx.loaded.config.grids;
    let points: Vec<(usize, &ExactTower)> = g.n.iter().map(|&n| (n, tower)).collect();
    let mut out = Vec::new();
    for eps in &g.epsilon {
        for delta in &g.delta {
            out.push(covering_curve(&points, eps, delta, ctx.loaded.config.names, &cover_options(ctx))?);
        }
    }
    Ok(out)
}

pub fn cover(ctx: &mut Ctx) -> anyhow::Result<()> {
    let built = load_tower(ctx)?;
    let prov = ctx.provenance("cover");
    let all = curves(ctx, &built.tower)?;
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for curve in &all {
        for r in curve {
            rows.push(vec![
                r.n.to_string(),
                r.epsilon.to_string(),
                r.delta.to_string(),
                r.count.map(|c| c.to_string()).unwrap_or_else(|| "NA".into()),
                r.method.map(|m| m.to_string()).unwrap_or_else(|| "none".into()),
                r.neglected.to_string(),
                r.flag.clone(),
                if ctx.timing { r.runtime_ms.to_string() } else { "NA".into() },
            ]);
        }
        if let Some(first) = curve.first() {
            series.push(Series {
                label: format!("eps={} delta={}", first.epsilon, first.delta),
                points: curve.iter().filter_map(|r| r.count.map(|c| (r.n as f64, c as f64))).collect(),
            });
        }
    }
    let header = ["n", "epsilon", "delta", "S_count", "method", "neglected_mass", "flag", "runtime_ms"];
    let path = write_csv(&ctx.out, "cover.csv", &prov, &header, &rows)?;
    if ctx.svg {
        write_svg(&ctx.out, "cover.svg", &prov, "covering number", ("n", "S (balls)"), &series)?;
    }
    println!("{} cover rows -> {}", rows.len(), path.display());
    Ok(())
}

pub fn slowent(ctx: &mut Ctx) -> anyhow::Result<()> {
    let built = load_tower(ctx)?;
    let prov = ctx.provenance("slowent");
    let cfg = &ctx.loaded.config;
    let mut rows = Vec::new();
    let mut trend_rows = Vec::new();
    let mut series = Vec::new();
    for curve in curves(ctx, &built.tower)? {
        let Some(first) = curve.first() else { continue };
        let (eps, delta) = (first.epsilon.to_string(), first.delta.to_string());
        let report: CurveReport = slow_entropy_curves(&curve, &cfg.rate, &cfg.grids.t)?;
        for r in &report.rows {
            rows.push(vec![
                eps.clone(),
                delta.clone(),
                r.n.to_string(),
                r.t.to_string(),
                r.value.to_string(),
                r.log2_rate.to_string(),
                r.ratio.to_string(),
            ]);
        }
        for (t, trend) in &report.trends {
            trend_rows.push(vec![eps.clone(), delta.clone(), t.to_string(), trend.as_str().to_string()]);
            series.push(Series {
                label: format!("eps={eps} t={t}"),
                points: report.rows.iter().filter(|r| r.t == *t).map(|r| (r.n as f64, r.ratio)).collect(),
            });
        }
    }
    let header = ["epsilon", "delta", "n", "t", "S_count", "log2_rate_bits", "ratio_S_over_rate"];
    let path = write_csv(&ctx.out, "slowent.csv", &prov, &header, &rows)?;
    write_csv(&ctx.out, "slowent_trends.csv", &prov, &["epsilon", "delta", "t", "trend"], &trend_rows)?;
    if ctx.svg {
        write_svg(&ctx.out, "slowent.svg", &prov, "S / a_n(t)", ("n", "ratio"), &series)?;
    }
    println!("{} slow-entropy rows -> {}", rows.len(), path.display());
    Ok(())
}

pub fn blume(ctx: &mut Ctx) -> anyhow::Result<()> {
    let built = load_tower(ctx)?;
    let prov = ctx.provenance("blume");
    let cfg = &ctx.loaded.config;
    let tower = &built.tower;
    let points: Vec<(usize, &ExactTower)> = cfg.grids.n.iter().map(|&n| (n, tower)).collect();
    let report = blume_curve(&points, &cfg.blume_sequence, cfg.names)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), r.value.to_string(), r.log2_rate.to_string(), r.ratio.to_string()])
        .collect();
    let path = write_csv(&ctx.out, "blume.csv", &prov, &["n", "H_bits", "log2_a_n", "ratio_H_over_a_n"], &rows)?;

    let mut split_rows = Vec::new();
    for &n in &cfg.grids.n {
        let names = match cfg.names {
            cutstack::covers::NameMode::Truncated => tower.name_distribution(n)?,
            cutstack::covers::NameMode::Cyclic => tower.cyclic_name_distribution(n)?,
        };
        let a_n = cfg.blume_sequence.value(n)?;
        for &t in &cfg.grids.t {
            let s = mass_split_check(&names, a_n, t)?;
            let mut row = vec![
                n.to_string(),
                t.to_string(),
                s.t_a.to_string(),
                s.entropy.to_string(),
                s.light_mass.to_string(),
                s.heavy_count.to_string(),
                s.atoms_above_inv_e.to_string(),
            ];
            row.extend(s.checks.iter().map(|c| c.slack.to_string()));
            row.extend(s.checks.iter().map(|c| c.holds.to_string()));
            split_rows.push(row);
        }
    }
    let split_header = [
        "n",
        "t",
        "t_a_n",
        "H_bits",
        "light_mass",
        "heavy_count",
        "atoms_above_inv_e",
        "entropy_lower_bound_slack",
        "light_mass_bound_slack",
        "heavy_count_bound_slack",
        "entropy_lower_bound_holds",
        "light_mass_bound_holds",
        "heavy_count_bound_holds",
    ];
    write_csv(&ctx.out, "mass_split.csv", &prov, &split_header, &split_rows)?;
    if ctx.svg {
        let series =
            [Series { label: "H(P_n)".into(), points: report.rows.iter().map(|r| (r.n as f64, r.value)).collect() }];
        write_svg(&ctx.out, "blume.svg", &prov, "entropy of n-names", ("n", "H (bits)"), &series)?;
    }
    println!("{} entropy rows -> {}", rows.len(), path.display());
    Ok(())
}

fn summary_row(r: &BoundReport) -> Vec<String> {
    let num = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "NA".into());
    vec![
        r.instance.clone(),
        num(r.bound_log2),
        r.observed.to_string(),
        num(r.margin()),
        r.verdict.to_string(),
        r.method.clone(),
    ]
}

pub fn verify(ctx: &mut Ctx) -> anyhow::Result<()> {
    let prov = ctx.provenance("verify");
    let settings = &ctx.loaded.config.verify;
    let opts = CoverOptions { node_budget: settings.node_budget, ..cover_options(ctx) };
    let instances = block_grid(&settings.grid)?;
    let mut reports = run_block_grid(&instances, &opts)?;
    for eta in &settings.etas {
        let perturbed = instances
            .par_iter()
            .map(|i| {
                let i = i.clone().with_eta(eta.clone())?;
                verify_perturbed_bound(&i, None, ctx.seed, &opts)
            })
            .collect::<cutstack::Result<Vec<_>>>()?;
        reports.extend(perturbed);
    }
    let rows: Vec<Vec<String>> = reports.iter().map(summary_row).collect();
    let header = ["instance", "bound_log2", "observed_S", "margin_log2", "verdict", "method"];
    let path = write_csv(&ctx.out, "verify_summary.csv", &prov, &header, &rows)?;
    let json = serde_json::to_string_pretty(&reports).context("serializing reports")?;
    write_text(&ctx.out, "verify_reports.json", &(json + "\n"))?;

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &reports {
        *counts.entry(r.verdict.as_str()).or_default() += 1;
    }
    let tally: Vec<String> = counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("{} instances ({}) -> {}", reports.len(), tally.join(" "), path.display());
    let failed = reports.iter().filter(|r| !r.verdict.is_pass()).count();
    if failed > 0 {
        let first = reports.iter().find(|r| r.verdict == Verdict::Violated || r.verdict == Verdict::Inconclusive);
        bail!("{failed} instances did not pass; first: {}", first.map(|r| r.instance.as_str()).unwrap_or(""));
    }
    Ok(())
}

fn family_rows(table: &FamilyTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                r.r_k.to_string(),
                r.t_k.to_string(),
                r.s_k.to_string(),
                r.h_k.map(|h| h.to_string()).unwrap_or_else(|| "overflow".into()),
                r.sigma_k.to_string(),
                r.alpha_k.to_string(),
                r.beta_k.to_string(),
                r.entropy_gap.to_string(),
            ]
        })
        .collect()
}

pub fn scenario(ctx: &mut Ctx) -> anyhow::Result<()> {
    let prov = ctx.provenance("scenario");
    let Some(spec) = ctx.loaded.config.scenario.clone() else {
        bail!(crate::config::ConfigError("the scenario command needs a [scenario] section".into()));
    };
    let (sched, table) = match spec {
        ScenarioSpec::RigidFamily { .. } => {
            let (s, t) = ctx.loaded.family()?;
            (s, Some(t))
        }
        _ => (ctx.loaded.scenario_schedule(&spec)?, None),
    };
    let mut sched = sched;
    sched.limits = ctx.loaded.config.caps.tower.clone();
    let text = toml::to_string(&sched).context("serializing schedule")?;
    write_text(&ctx.out, "schedule.toml", &format!("# config_sha256={} seed={}\n{text}", prov.config_hash, prov.seed))?;
    let meta: Vec<Vec<String>> = sched.metadata.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect();
    write_csv(&ctx.out, "scenario.csv", &prov, &["key", "value"], &meta)?;
    if let Some(t) = &table {
        let header = ["k", "r_k", "t_k", "s_k", "h_k", "sigma_k", "alpha_k", "beta_k", "entropy_gap"];
        write_csv(&ctx.out, "family.csv", &prov, &header, &family_rows(t))?;
    }
    let built = run_schedule(&sched)?;
    emit_build(ctx, &prov, &built)?;
    println!(
        "{}: {} stages, {} columns, height {}..{} -> {}",
        sched.construction,
        sched.stages.len(),
        built.tower.columns().len(),
        built.tower.min_height(),
        built.tower.max_height(),
        ctx.out.display()
    );
    Ok(())
}
