use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use rayon::prelude::*;

use gapfill::experiment::{correlations, CorrelationMode};
use gapfill::experiment::neighbor_sweep;
use gapfill::experiment::{complete_gaps, evaluate as run_evaluation, ModelTrainer, Plan, Predictor, Strategy};
use gapfill::features::build_dataset;
use gapfill::gaps::{complete_ratio, component_histogram, filter_wells, missingness, write_histogram_csv};
use gapfill::inject::{inject_gaps, GapSpec};
use gapfill::las::{load_corpus, read_las_file, sanitize_file_name, write_corpus, write_las, ParseOptions};
use gapfill::models::{train_model, ModelKind, TrainedModel};
use gapfill::rng::derive_seed;
use gapfill::synth::{generate, SynthSpec};
use gapfill::{plot, PropertyKind, WellLog};

use crate::manifest::RunManifest;
use crate::settings::{parse_models, parse_targets, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Some inputs or jobs failed.
    Partial,
    /// Nothing usable was produced.
    Failed,
}

impl Outcome {
    pub fn exit_code(self) -> ExitCode {
        match self {
            Outcome::Ok => ExitCode::SUCCESS,
            Outcome::Partial | Outcome::Failed => ExitCode::from(1),
        }
    }

    fn partial_if(cond: bool) -> Outcome {
        if cond {
            Outcome::Partial
        } else {
            Outcome::Ok
        }
    }
}

pub struct Context {
    pub name: &'static str,
    pub settings: Settings,
    pub parse: ParseOptions,
    pub seed_given: bool,
}

impl Context {
    fn manifest(&self) -> RunManifest {
        RunManifest::new(self.name, &self.settings)
    }

    /// Creates the output directory, refusing to write into an input.
    fn out_dir(&self, inputs: &[&Path]) -> Result<PathBuf> {
        let out = self.settings.out.clone();
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let canon = out.canonicalize()?;
        for input in inputs {
            let dir = if input.is_dir() { input.to_path_buf() } else { input.parent().unwrap_or(Path::new(".")).to_path_buf() };
            let dir = if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir };
            if dir.canonicalize().is_ok_and(|d| d == canon) {
                bail!(gapfill::Error::InvalidConfig(format!(
                    "--out {} is an input directory; choose another",
                    out.display()
                )));
            }
        }
        Ok(out)
    }

    /// Loads the corpus. Unreadable files are reported and skipped.
    fn load(&self) -> Result<(Vec<WellLog>, usize)> {
        let dir = self.settings.corpus()?;
        let corpus = load_corpus(dir, &self.parse)?;
        for e in &corpus.errors {
            eprintln!("warning: skipped {}: {}", e.path.display(), e.error);
        }
        if corpus.wells.is_empty() {
            bail!(gapfill::Error::EmptyInput("no readable LAS files in the corpus"));
        }
        Ok((corpus.wells, corpus.errors.len()))
    }

    /// Wells passing the filter, unless filtering is off.
    fn eligible(&self, wells: Vec<WellLog>) -> Result<Vec<WellLog>> {
        if self.settings.no_filter {
            return Ok(wells);
        }
        let outcome = filter_wells(&wells, &self.settings.filter);
        for (w, why) in &outcome.rejected {
            eprintln!("filtered out {}: {why}", w.name());
        }
        let keep: HashSet<&str> = outcome.accepted.iter().map(|w| w.name()).collect();
        let out: Vec<WellLog> = wells.iter().filter(|w| keep.contains(w.name())).cloned().collect();
        if out.is_empty() {
            bail!(gapfill::Error::EmptyInput("no well passes the filter"));
        }
        Ok(out)
    }

    /// Test wells: `--test-wells N` picks N by seed, otherwise all. Sorted by name.
    fn test_wells(&self, wells: &[WellLog]) -> Vec<String> {
        let mut names: Vec<String> = wells.iter().map(|w| w.name().to_string()).collect();
        if let Some(n) = self.settings.test_wells {
            if n < names.len() {
                names.sort_by_key(|name| (derive_seed(self.settings.seed, &["test-well", name]), name.clone()));
                names.truncate(n);
            }
        }
        names.sort();
        names
    }
}

fn write(out: &Path, name: &str, bytes: impl AsRef<[u8]>, manifest: &mut RunManifest) -> Result<()> {
    let path = out.join(name);
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    manifest.outputs.push(name.to_string());
    Ok(())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> gapfill::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn file_label(s: &str) -> String {
    s.replace(':', "-")
}

pub fn validate(ctx: &Context, paths: &[PathBuf]) -> Result<Outcome> {
    let paths: Vec<PathBuf> = if paths.is_empty() { vec![ctx.settings.corpus()?.to_path_buf()] } else { paths.to_vec() };
    let (mut good, mut bad) = (0usize, 0usize);
    for path in &paths {
        if path.is_dir() {
            let corpus = load_corpus(path, &ctx.parse)?;
            for w in &corpus.wells {
                println!("ok     {}  rows={} extent={:.2} m", w.name(), w.rows(), w.extent());
            }
            for e in &corpus.errors {
                println!("error  {}: {}", e.path.display(), e.error);
            }
            good += corpus.wells.len();
            bad += corpus.errors.len();
        } else {
            match read_las_file(path, &ctx.parse) {
                Ok(w) => {
                    println!("ok     {}  rows={} extent={:.2} m", w.name(), w.rows(), w.extent());
                    good += 1;
                }
                Err(e) => {
                    println!("error  {}: {e}", path.display());
                    bad += 1;
                }
            }
        }
    }
    println!("{good} valid, {bad} invalid");
    if good == 0 && bad == 0 {
        bail!(gapfill::Error::EmptyInput("no LAS files found"));
    }
    Ok(if good == 0 { Outcome::Failed } else { Outcome::partial_if(bad > 0) })
}

pub fn stats(ctx: &Context) -> Result<Outcome> {
    let (wells, skipped) = ctx.load()?;
    let corpus = ctx.settings.corpus()?;
    let out = ctx.out_dir(&[corpus])?;
    let mut m = ctx.manifest();
    m.input(corpus)?;
    let stats = missingness(&wells)?;
    write(&out, "stats.csv", csv_bytes(|b| stats.write_csv(b))?, &mut m)?;
    let hist = component_histogram(&wells);
    write(&out, "components.csv", csv_bytes(|b| write_histogram_csv(&hist, b))?, &mut m)?;
    write(&out, "stats.json", serde_json::to_string_pretty(&stats)? + "\n", &mut m)?;

    println!(
        "{} wells, {:.2} km logged, {:.1}% complete rows, {:.2} gaps/km",
        stats.wells,
        stats.extent_km,
        100.0 * stats.complete_fraction,
        stats.gaps_per_km
    );
    for p in &stats.properties {
        println!("{:<5} missing {:>6.2}%  gaps {:>5}", p.property.to_string(), 100.0 * p.missing_fraction, p.gap_count);
    }
    let total: usize = hist.values().sum();
    for (order, count) in &hist {
        println!("components of order {order}: {count} ({:.1}%)", 100.0 * *count as f64 / total.max(1) as f64);
    }
    m.write(&out)?;
    Ok(Outcome::partial_if(skipped > 0))
}

pub fn filter(ctx: &Context) -> Result<Outcome> {
    let (wells, skipped) = ctx.load()?;
    let corpus = ctx.settings.corpus()?;
    let out = ctx.out_dir(&[corpus])?;
    let mut m = ctx.manifest();
    m.input(corpus)?;
    let criteria = &ctx.settings.filter;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["well", "status", "reason", "extent_m", "complete_ratio"])?;
    let mut accepted = 0;
    for well in &wells {
        let verdict = criteria.check(well);
        accepted += usize::from(verdict.is_none());
        w.write_record([
            well.name().to_string(),
            if verdict.is_none() { "accepted" } else { "rejected" }.to_string(),
            verdict.map(|r| r.to_string()).unwrap_or_default(),
            well.extent().to_string(),
            complete_ratio(well, criteria.ratio_mode).to_string(),
        ])?;
    }
    write(&out, "filter.csv", w.into_inner()?, &mut m)?;
    println!("{accepted} of {} wells accepted", wells.len());
    m.write(&out)?;
    Ok(Outcome::partial_if(skipped > 0))
}

pub fn inject(ctx: &Context, input: Option<&Path>, aligned: bool) -> Result<Outcome> {
    let (wells, mut failures, source) = match input {
        Some(path) => (vec![read_las_file(path, &ctx.parse)?], 0, path.to_path_buf()),
        None => {
            let (w, s) = ctx.load()?;
            (w, s, ctx.settings.corpus()?.to_path_buf())
        }
    };
    let out = ctx.out_dir(&[&source])?;
    let mut m = ctx.manifest();
    m.input(&source)?.argument("aligned", aligned);
    let spec = GapSpec { aligned, ..ctx.settings.gaps };

    let results: Vec<_> = wells.par_iter().map(|w| (w, inject_gaps(w, &spec))).collect();
    let mut log = csv::Writer::from_writer(Vec::new());
    log.write_record(["well", "property", "start_row", "rows", "start_depth", "span"])?;
    for (well, result) in results {
        let r = match result {
            Ok(r) => r,
            Err(e) => {
                eprintln!("warning: {}: {e}", well.name());
                failures += 1;
                continue;
            }
        };
        let stem = sanitize_file_name(well.name());
        write(&out, &format!("{stem}.las"), write_las(&r.modified_well), &mut m)?;
        write(&out, &format!("{stem}_truth.csv"), csv_bytes(|b| r.write_ground_truth_csv(b))?, &mut m)?;
        for g in &r.injected {
            log.write_record([
                well.name().to_string(),
                g.property.to_string(),
                g.start_row.to_string(),
                g.row_count.to_string(),
                g.start_depth.to_string(),
                g.span.to_string(),
            ])?;
        }
        println!("{}: {} gaps injected", well.name(), r.injected.len());
    }
    write(&out, "injected.csv", log.into_inner()?, &mut m)?;
    m.write(&out)?;
    Ok(if failures == wells.len() { Outcome::Failed } else { Outcome::partial_if(failures > 0) })
}

pub fn train(ctx: &Context, only: &[String]) -> Result<Outcome> {
    let (mut wells, skipped) = ctx.load()?;
    if !only.is_empty() {
        for name in only {
            if !wells.iter().any(|w| w.name() == name) {
                bail!(gapfill::Error::UnknownWell(name.clone()));
            }
        }
        wells.retain(|w| only.iter().any(|n| n == w.name()));
    }
    let corpus = ctx.settings.corpus()?;
    let out = ctx.out_dir(&[corpus])?;
    let mut m = ctx.manifest();
    m.input(corpus)?.argument("wells", only);
    let refs: Vec<&WellLog> = wells.iter().collect();
    let s = &ctx.settings;
    let jobs: Vec<(PropertyKind, ModelKind)> =
        s.targets.iter().flat_map(|&t| s.models.iter().map(move |&k| (t, k))).collect();
    let trained: Vec<Result<(PropertyKind, ModelKind, TrainedModel)>> = jobs
        .par_iter()
        .map(|&(t, k)| {
            let ds = build_dataset(&refs, t, &HashSet::new())?;
            let seed = derive_seed(s.seed, &["train", &t.to_string(), k.as_str()]);
            Ok((t, k, train_model(k, &ds, &s.model_config, seed)?))
        })
        .collect();
    for r in trained {
        let (t, k, model) = r?;
        let name = format!("model_{t}_{k}.json");
        m.seeds.insert(name.clone(), model.seed);
        write(&out, &name, model.to_json()?, &mut m)?;
        println!("{name}: {} training rows", model.train_rows);
    }
    m.write(&out)?;
    Ok(Outcome::partial_if(skipped > 0))
}

pub fn complete(ctx: &Context, input: &Path, model: &str, kind: Option<&str>, target: Option<&str>) -> Result<Outcome> {
    let well = read_las_file(input, &ctx.parse)?;
    let out = ctx.out_dir(&[input])?;
    let mut m = ctx.manifest();
    m.input(input)?.argument("model", model).argument("kind", kind).argument("target", target);
    let wanted = target.map(|t| parse_targets(&t.split(',').map(String::from).collect::<Vec<_>>())).transpose()?;

    let (targets, model_label, strategy, predictor_for): (Vec<PropertyKind>, String, &str, Box<dyn Fn(PropertyKind) -> gapfill::Result<Box<dyn Predictor>>>) =
        if model == "train-local" {
            let kind = match kind {
                Some(k) => *parse_models(&[k.to_string()])?.first().context("empty --kind")?,
                None => ModelKind::Gb,
            };
            let config = ctx.settings.model_config;
            let seed = ctx.settings.seed;
            let local = well.clone();
            let f = move |t: PropertyKind| -> gapfill::Result<Box<dyn Predictor>> {
                let ds = build_dataset(&[&local], t, &HashSet::new())?;
                let seed = derive_seed(seed, &["complete", &t.to_string(), kind.as_str()]);
                Ok(Box::new(train_model(kind, &ds, &config, seed)?))
            };
            (wanted.unwrap_or_else(|| PropertyKind::ALL.to_vec()), kind.to_string(), "local", Box::new(f))
        } else {
            let trained = TrainedModel::load(Path::new(model))?;
            m.input(Path::new(model))?;
            if let Some(w) = &wanted {
                if w != &[trained.target] {
                    bail!(gapfill::Error::InvalidConfig(format!(
                        "model {model} predicts {} only",
                        trained.target
                    )));
                }
            }
            let label = trained.kind().to_string();
            let targets = vec![trained.target];
            let f = move |_: PropertyKind| -> gapfill::Result<Box<dyn Predictor>> { Ok(Box::new(trained.clone())) };
            (targets, label, "pretrained", Box::new(f))
        };

    let completion = complete_gaps(&well, &targets, &*predictor_for)?;
    let stem = sanitize_file_name(well.name());
    write(&out, &format!("{stem}.las"), write_las(&completion.well), &mut m)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["well", "row", "depth", "property", "status", "value", "model", "strategy"])?;
    for c in &completion.filled {
        w.write_record([
            well.name().to_string(),
            c.row.to_string(),
            c.depth.to_string(),
            c.property.to_string(),
            "filled".to_string(),
            c.value.to_string(),
            model_label.clone(),
            strategy.to_string(),
        ])?;
    }
    for &(row, property) in &completion.unpredictable {
        w.write_record([
            well.name().to_string(),
            row.to_string(),
            well.depth(row).to_string(),
            property.to_string(),
            "unpredictable".to_string(),
            String::new(),
            model_label.clone(),
            strategy.to_string(),
        ])?;
    }
    write(&out, &format!("{stem}_audit.csv"), w.into_inner()?, &mut m)?;
    println!(
        "{}: {} cells filled, {} unpredictable (a sibling is missing)",
        well.name(),
        completion.filled.len(),
        completion.unpredictable.len()
    );
    m.write(&out)?;
    Ok(Outcome::partial_if(!completion.unpredictable.is_empty()))
}

pub fn evaluate(ctx: &Context, plots: bool) -> Result<Outcome> {
    let s = &ctx.settings;
    let (wells, _) = ctx.load()?;
    let corpus_dir = s.corpus()?;
    let out = ctx.out_dir(&[corpus_dir])?;
    let mut m = ctx.manifest();
    m.input(corpus_dir)?;
    let wells = ctx.eligible(wells)?;
    let tests = ctx.test_wells(&wells);
    m.argument("eligible_wells", wells.iter().map(|w| w.name()).collect::<Vec<_>>()).argument("test_wells", &tests);
    m.seeds.insert("gaps".into(), derive_seed(s.seed, &["gaps"]));

    let plan = Plan {
        targets: s.targets.clone(),
        models: s.models.clone(),
        strategies: s.strategies.clone(),
        gaps: s.gaps,
        seed: s.seed,
    };
    let trainer = ModelTrainer { config: s.model_config };
    let report = run_evaluation(&wells, &tests, &plan, &trainer)?;

    write(&out, "report.csv", csv_bytes(|b| report.write_csv(b))?, &mut m)?;
    write(&out, "aggregate.csv", csv_bytes(|b| report.write_aggregate_csv(b))?, &mut m)?;
    write(&out, "gaps.csv", csv_bytes(|b| report.write_gaps_csv(b))?, &mut m)?;
    write(&out, "predictions.csv", csv_bytes(|b| report.write_predictions_csv(b))?, &mut m)?;
    if plots {
        let mut groups: BTreeMap<(PropertyKind, ModelKind, Strategy), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for w in &report.wells {
            let g = groups.entry((w.target, w.model, w.strategy)).or_default();
            for p in &w.predictions {
                g.0.push(p.truth);
                g.1.push(p.predicted);
            }
        }
        for ((t, k, st), (truth, pred)) in groups {
            let title = format!("{t} {k} {st}");
            let name = format!("scatter_{t}_{k}_{}.svg", file_label(&st.to_string()));
            write(&out, &name, plot::scatter(&title, &truth, &pred), &mut m)?;
        }
    }
    let table = report.pretty_table();
    write(&out, "table.txt", &table, &mut m)?;
    print!("{table}");
    for w in report.wells.iter().filter(|w| !w.succeeded()) {
        eprintln!(
            "warning: {} {} {} {}: {}",
            w.well,
            w.target,
            w.model,
            w.strategy,
            w.error.as_deref().unwrap_or("no score")
        );
    }
    m.write(&out)?;
    Ok(if report.succeeded() == 0 { Outcome::Failed } else { Outcome::Ok })
}

pub fn sweep(ctx: &Context, chosen: &[String]) -> Result<Outcome> {
    let s = &ctx.settings;
    let (wells, _) = ctx.load()?;
    let corpus_dir = s.corpus()?;
    let out = ctx.out_dir(&[corpus_dir])?;
    let mut m = ctx.manifest();
    m.input(corpus_dir)?;
    let wells = ctx.eligible(wells)?;
    let tests = if chosen.is_empty() {
        let mut t = ctx.test_wells(&wells);
        if s.test_wells.is_none() {
            // one well by default
            let pick = {
                let mut names = t.clone();
                names.sort_by_key(|n| (derive_seed(s.seed, &["test-well", n]), n.clone()));
                names[0].clone()
            };
            t = vec![pick];
        }
        t
    } else {
        chosen.to_vec()
    };
    m.argument("test_wells", &tests);
    let trainer = ModelTrainer { config: s.model_config };

    let mut buf = Vec::new();
    let mut series: BTreeMap<(PropertyKind, ModelKind), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    let mut failed = 0;
    for name in &tests {
        for &t in &s.targets {
            for &k in &s.models {
                let sweep = neighbor_sweep(&wells, name, t, k, &s.gaps, s.seed, s.k_max, &trainer)?;
                if let Some(n) = sweep.notice() {
                    eprintln!("notice: {n}");
                }
                let mut part = Vec::new();
                sweep.write_csv(&mut part)?;
                if buf.is_empty() {
                    buf = part;
                } else {
                    let body = part.iter().position(|&b| b == b'\n').map_or(&part[..0], |i| &part[i + 1..]);
                    buf.extend_from_slice(body);
                }
                for p in &sweep.points {
                    match p.score.mape {
                        Some(v) => series.entry((t, k)).or_default().entry(p.k).or_default().push(v),
                        None => failed += 1,
                    }
                }
            }
        }
    }
    write(&out, "sweep.csv", buf, &mut m)?;
    let lines: Vec<(String, Vec<(f64, f64)>)> = series
        .iter()
        .map(|((t, k), pts)| {
            let xy = pts.iter().map(|(kk, v)| (*kk as f64, v.iter().sum::<f64>() / v.len() as f64)).collect();
            (format!("{t} {k}"), xy)
        })
        .collect();
    write(&out, "mape_vs_k.svg", plot::line_chart("MAPE against neighbour count", "k", "MAPE (%)", &lines), &mut m)?;
    for (label, pts) in &lines {
        let row: Vec<String> = pts.iter().map(|(k, v)| format!("k={k}:{v:.3}")).collect();
        println!("{label}: {}", row.join(" "));
    }
    m.write(&out)?;
    Ok(if series.is_empty() { Outcome::Failed } else { Outcome::partial_if(failed > 0) })
}

pub fn correlate(ctx: &Context, mode: Option<&str>) -> Result<Outcome> {
    let (wells, skipped) = ctx.load()?;
    let corpus_dir = ctx.settings.corpus()?;
    let out = ctx.out_dir(&[corpus_dir])?;
    let mut m = ctx.manifest();
    m.input(corpus_dir)?.argument("mode", mode);
    let modes = match mode {
        Some(s) => vec![s.parse::<CorrelationMode>()?],
        None => vec![CorrelationMode::PerWell, CorrelationMode::Global],
    };
    for mode in modes {
        let label = match mode {
            CorrelationMode::PerWell => "per_well",
            CorrelationMode::Global => "global",
        };
        let matrix = correlations(&wells, mode)?;
        write(&out, &format!("correlation_{label}.csv"), csv_bytes(|b| matrix.write_csv(b))?, &mut m)?;
        let title = format!("Pearson correlation ({label}, {} wells)", matrix.wells);
        write(&out, &format!("correlation_{label}.svg"), plot::heatmap(&title, &matrix), &mut m)?;
        println!("{label}:");
        for a in PropertyKind::ALL {
            let cells: Vec<String> = PropertyKind::ALL
                .iter()
                .map(|&b| matrix.get(a, b).map(|v| format!("{v:>7.3}")).unwrap_or_else(|| "      -".into()))
                .collect();
            println!("  {:<5}{}", a.to_string(), cells.join(""));
        }
    }
    m.write(&out)?;
    Ok(Outcome::partial_if(skipped > 0))
}

pub fn synth(ctx: &Context, preset: Option<&str>, spec: Option<&Path>, wells: Option<usize>) -> Result<Outcome> {
    let s = &ctx.settings;
    let mut generator = match spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut g = SynthSpec::from_json(&text)?;
            if ctx.seed_given {
                g.seed = s.seed;
            }
            g
        }
        None => SynthSpec::preset(preset.unwrap_or("standard"), s.seed)?,
    };
    if let Some(n) = wells {
        generator.n_wells = n;
    }
    generator.validate()?;
    let out = ctx.out_dir(&[])?;
    let mut m = ctx.manifest();
    if let Some(path) = spec {
        m.input(path)?;
    }
    m.argument("preset", preset).argument("spec", &generator);
    m.seeds.insert("generator".into(), generator.seed);
    let logs = generate(&generator)?;
    for p in write_corpus(&out, &logs)? {
        m.outputs.push(p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default());
    }
    write(&out, "synth_spec.json", serde_json::to_string_pretty(&generator)? + "\n", &mut m)?;
    println!("{} wells written to {}", logs.len(), out.display());
    m.write(&out)?;
    Ok(Outcome::Ok)
}

pub fn plot(ctx: &Context, input: &Path, audit: Option<&Path>, target: Option<&str>) -> Result<Outcome> {
    let well = read_las_file(input, &ctx.parse)?;
    let out = ctx.out_dir(&[input])?;
    let mut m = ctx.manifest();
    m.input(input)?;
    let properties = match target {
        Some(t) => parse_targets(&t.split(',').map(String::from).collect::<Vec<_>>())?,
        None => PropertyKind::ALL.to_vec(),
    };
    let mut overlay = Vec::new();
    if let Some(path) = audit {
        m.input(path)?;
        let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        for rec in r.deserialize::<BTreeMap<String, String>>() {
            let rec = rec?;
            if rec.get("status").map(String::as_str) != Some("filled") {
                continue;
            }
            let field = |k: &str| rec.get(k).cloned().unwrap_or_default();
            let property: PropertyKind = field("property").parse()?;
            let depth: f64 = field("depth").parse().context("audit depth")?;
            let value: f64 = field("value").parse().context("audit value")?;
            overlay.push((property, depth, value));
        }
    }
    let name = format!("tracks_{}.svg", sanitize_file_name(well.name()));
    write(&out, &name, plot::log_tracks(&well, &properties, &overlay), &mut m)?;
    println!("wrote {}", out.join(&name).display());
    m.write(&out)?;
    Ok(Outcome::Ok)
}
