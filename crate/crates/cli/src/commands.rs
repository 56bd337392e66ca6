use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use sketchgraph::cpt::{augment_corpus, derive_seed, AugmentOptions, CptConfig};
use sketchgraph::metrics::{evaluate, summarize, EvalOptions, Matching, Pf1Options};
use sketchgraph::raster::{render_handdrawn_sized, render_sized, HanddrawConfig, SketchImage};
use sketchgraph::scaffold::{matched_loss, total_loss, LossOptions, PredictionBundle};
use sketchgraph::sketch::{self as core_sketch, read_sketches, to_json_line, validate as violations, TokenSequence};
use sketchgraph::solver::{build_system, solve as run_solver, VariableVector};
use sketchgraph::SketchGraph;

use crate::io::{create, numbered_lines, open, report, sink, write_json};
use crate::{AugmentArgs, EvalArgs, ImageFormat, LossArgs, RenderArgs, SolveArgs, UsageError};

/// A record tagged with its 1-based input line.
#[derive(Serialize)]
struct Lined<'a, T: Serialize> {
    line: usize,
    #[serde(flatten)]
    inner: &'a T,
}

fn line_error(line: usize, error: impl std::fmt::Display) {
    report(&json!({ "line": line, "error": error.to_string() }));
}

pub fn validate(input: &Path) -> Result<bool> {
    let (mut lines, mut invalid) = (0, 0);
    for (line, parsed) in read_sketches(open(input)?) {
        lines += 1;
        match parsed {
            Err(e) => {
                invalid += 1;
                line_error(line, e);
            }
            Ok(s) => {
                let v = violations(&s);
                if !v.is_empty() {
                    invalid += 1;
                    report(&json!({ "line": line, "violations": v }));
                }
            }
        }
    }
    let mut summary = json!({ "lines": lines, "valid": lines - invalid, "invalid": invalid });
    if lines == 0 {
        summary["note"] = json!("empty input");
    }
    write_json(&mut std::io::stdout().lock(), &summary)?;
    Ok(invalid == 0)
}

pub fn tokenize(input: &Path, output: Option<&Path>) -> Result<bool> {
    let mut out = sink(output)?;
    let mut ok = true;
    for (line, parsed) in read_sketches(open(input)?) {
        match parsed.and_then(|s| tokenize_valid(&s)) {
            Ok(t) => write_json(&mut out, &t)?,
            Err(e) => {
                ok = false;
                line_error(line, e);
            }
        }
    }
    out.flush()?;
    Ok(ok)
}

fn tokenize_valid(s: &SketchGraph) -> Result<TokenSequence, sketchgraph::SketchError> {
    if let Some(v) = violations(s).first() {
        return Err(sketchgraph::SketchError::Invalid(v.to_string()));
    }
    core_sketch::tokenize(s)
}

pub fn detokenize(input: &Path, output: Option<&Path>) -> Result<bool> {
    let mut out = sink(output)?;
    let mut ok = true;
    for (line, text) in numbered_lines(open(input)?) {
        let parsed = text
            .map_err(anyhow::Error::from)
            .and_then(|t| Ok(serde_json::from_str::<TokenSequence>(&t)?))
            .and_then(|t| Ok(core_sketch::detokenize(&t)?));
        match parsed {
            Ok(s) => writeln!(out, "{}", to_json_line(&s))?,
            Err(e) => {
                ok = false;
                line_error(line, e);
            }
        }
    }
    out.flush()?;
    Ok(ok)
}

fn write_png(path: &Path, img: &SketchImage) -> Result<()> {
    let mut enc = png::Encoder::new(create(path)?, img.width as u32, img.height as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let mut w = enc.write_header()?;
    w.write_image_data(&img.to_gray8())?;
    w.finish()?;
    Ok(())
}

pub fn render(a: &RenderArgs) -> Result<bool> {
    if a.size == 0 || a.size > 8192 {
        return Err(UsageError(format!("--size must be in 1..=8192, got {}", a.size)).into());
    }
    fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    let (mut rendered, mut skipped) = (0, 0);
    for (line, parsed) in read_sketches(open(&a.input)?) {
        let img = parsed.and_then(|s| {
            if a.handdrawn {
                let cfg = HanddrawConfig { seed: derive_seed(a.seed, line, 0), ..HanddrawConfig::default() };
                render_handdrawn_sized(&s, &cfg, a.size, a.size)
            } else {
                render_sized(&s, a.size, a.size)
            }
        });
        let img = match img {
            Ok(img) => img,
            Err(e) => {
                skipped += 1;
                line_error(line, e);
                continue;
            }
        };
        match a.format {
            ImageFormat::Pgm => {
                let path = a.out_dir.join(format!("{line}.pgm"));
                fs::write(&path, img.to_pgm()).with_context(|| format!("cannot write {}", path.display()))?;
            }
            ImageFormat::Png => write_png(&a.out_dir.join(format!("{line}.png")), &img)?,
        }
        rendered += 1;
    }
    write_json(&mut std::io::stdout().lock(), &json!({ "rendered": rendered, "skipped": skipped }))?;
    Ok(skipped == 0)
}

/// `<output>.manifest.json`
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn augment(a: &AugmentArgs) -> Result<bool> {
    if a.jobs == 0 {
        return Err(UsageError("--jobs must be at least 1".into()).into());
    }
    if !(a.alpha.is_finite() && a.alpha > 0.0) || !(a.min_delta.is_finite() && a.min_delta >= 0.0) {
        return Err(UsageError("--alpha must be positive and --min-delta non-negative".into()).into());
    }
    let opts = AugmentOptions {
        strategy: a.strategy.into(),
        k: a.k,
        seed: a.seed,
        jobs: a.jobs,
        cpt: CptConfig {
            rounds: a.rounds,
            alpha: a.alpha,
            seed: a.seed,
            max_attempts: a.max_attempts,
            min_param_delta: a.min_delta,
            renormalize: !a.no_renormalize,
        },
    };
    let mut out = create(&a.output)?;
    let manifest = augment_corpus(open(&a.input)?, &mut out, &opts)?;
    out.flush()?;
    let path = manifest_path(&a.output);
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("cannot write {}", path.display()))?;
    for e in &manifest.line_errors {
        line_error(e.line, &e.error);
    }
    let summary = json!({
        "total_in": manifest.total_in,
        "total_out": manifest.total_out,
        "rejects_by_reason": manifest.rejects_by_reason,
        "line_errors": manifest.line_errors.len(),
        "manifest": path,
    });
    write_json(&mut std::io::stdout().lock(), &summary)?;
    Ok(manifest.line_errors.is_empty())
}

pub fn eval(a: &EvalArgs) -> Result<bool> {
    if a.pf1_bins > 63 {
        return Err(UsageError("--pf1-bins must be at most 63".into()).into());
    }
    let opts = EvalOptions {
        include_padding: a.include_padding,
        pf1: Pf1Options { bins: a.pf1_bins, inclusive: !a.pf1_exclusive },
    };
    let mut out = std::io::stdout().lock();
    let (mut preds, mut gts) = (read_sketches(open(&a.pred)?), read_sketches(open(&a.gt)?));
    let mut reports = Vec::new();
    let mut ok = true;
    loop {
        let (p, g) = match (preds.next(), gts.next()) {
            (None, None) => break,
            (Some((line, _)), None) | (None, Some((line, _))) => {
                anyhow::bail!("prediction and ground-truth files have different line counts (first unmatched line {line})")
            }
            (Some(p), Some(g)) => (p, g),
        };
        let line = g.0;
        let scored = p
            .1
            .and_then(|pred| Ok((pred, g.1?)))
            .and_then(|(pred, gt)| evaluate(&pred, &gt, &opts));
        match scored {
            Ok(mut r) => {
                if a.no_subrefs {
                    r.cf1 = r.cf1_no_subref;
                    r.cf1_counts = r.cf1_no_subref_counts;
                }
                write_json(&mut out, &Lined { line, inner: &r })?;
                reports.push(r);
            }
            Err(e) => {
                ok = false;
                line_error(line, e);
            }
        }
    }
    write_json(&mut out, &json!({ "summary": summarize(&reports) }))?;
    Ok(ok)
}

pub fn dof(input: &Path) -> Result<bool> {
    let mut out = std::io::stdout().lock();
    let mut ok = true;
    for (line, parsed) in read_sketches(open(input)?) {
        let result = parsed
            .map_err(anyhow::Error::from)
            .and_then(|s| Ok(sketchgraph::solver::dof_estimate(&s)?));
        match result {
            Ok(dof) => write_json(&mut out, &json!({ "line": line, "dof": dof }))?,
            Err(e) => {
                ok = false;
                write_json(&mut out, &json!({ "line": line, "error": e.to_string() }))?;
                line_error(line, e);
            }
        }
    }
    Ok(ok)
}

pub fn solve(a: &SolveArgs) -> Result<bool> {
    let mut out = sink(a.output.as_deref())?;
    let mut rep_out = a.report.as_deref().map(create).transpose()?;
    let mut ok = true;
    for (line, parsed) in read_sketches(open(&a.input)?) {
        let result = parsed.map_err(anyhow::Error::from).and_then(|s| {
            let sys = build_system(&s, &[])?;
            let start = VariableVector::from_sketch(&s);
            let rep = run_solver(&sys, &start)?;
            Ok((start.with_theta(rep.theta_final.clone()).apply_to(&s), rep))
        });
        match result {
            Ok((solved, rep)) => {
                if !rep.converged {
                    ok = false;
                    line_error(line, format!("solver stopped at residual {:e}", rep.max_constraint_residual));
                }
                writeln!(out, "{}", to_json_line(&solved))?;
                if let Some(w) = rep_out.as_mut() {
                    write_json(w, &Lined { line, inner: &rep })?;
                }
            }
            Err(e) => {
                ok = false;
                line_error(line, e);
            }
        }
    }
    out.flush()?;
    if let Some(w) = rep_out.as_mut() {
        w.flush()?;
    }
    Ok(ok)
}

#[derive(Serialize)]
struct LossLine {
    line: usize,
    total: f64,
    token: f64,
    constraint: f64,
    clamped: bool,
    /// Ground-truth row of each predicted row.
    perm: Vec<usize>,
}

pub fn loss(a: &LossArgs) -> Result<bool> {
    let opts = LossOptions { include_padding: a.include_padding };
    let mut out = std::io::stdout().lock();
    let mut bundles = numbered_lines(open(&a.bundles)?);
    let mut gts = read_sketches(open(&a.gt)?);
    let mut ok = true;
    loop {
        let ((_, b), (line, g)) = match (bundles.next(), gts.next()) {
            (None, None) => break,
            (Some((line, _)), None) | (None, Some((line, _))) => {
                anyhow::bail!("bundle and ground-truth files have different line counts (first unmatched line {line})")
            }
            (Some(b), Some(g)) => (b, g),
        };
        let result = (|| -> Result<LossLine> {
            let bundle: PredictionBundle = serde_json::from_str(&b?)?;
            let gt = g?;
            let tokens = tokenize_valid(&gt)?;
            let (r, m) = if a.identity {
                let m = Matching::identity(bundle.rows());
                (total_loss(&bundle, &tokens, &gt.constraints, &m, &opts)?, m)
            } else {
                matched_loss(&bundle, &tokens, &gt.constraints, &opts)?
            };
            Ok(LossLine { line, total: r.total, token: r.token, constraint: r.constraint, clamped: r.clamped, perm: m.perm })
        })();
        match result {
            Ok(l) => write_json(&mut out, &l)?,
            Err(e) => {
                ok = false;
                line_error(line, format!("{e:#}"));
            }
        }
    }
    Ok(ok)
}
