//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use lvseg_cli::pnm::load_mask;
use lvseg_cli::report::CSV_HEADER;
use lvseg_core::drlse::{band_gradient_deviation, reinitialize, LevelSetField};
use lvseg_core::imgrid::{BinaryMask, EllipseSpec};
use lvseg_core::metrics::{confusion, dice, hausdorff, mcc, pixel_accuracy, ConfusionCounts};
use lvseg_core::pipeline::{
    make_phantom, phantom_center, prepare, segment_endocardium, segment_endocardium_prepared,
    CaseConfig, Method, Phantom, StageResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const SEED: u64 = 7;
const SIZE: usize = 128;
const R_INNER: f64 = 30.0;
const R_OUTER: f64 = 45.0;
const NOISE: f64 = 0.05;
const HIGH_NOISE: f64 = 0.15;

const ORACLE_TOL: f64 = 1e-12;
const ORACLE_BUDGET_S: f64 = 5.0;
const BAND: f64 = 3.0;
const REGULARITY_MAX: f64 = 0.3;
const REGULARITY_BUDGET_S: f64 = 30.0;
const ENERGY_RISE_FRAC: f64 = 1e-3;
const DICE_MIN: f64 = 0.95;
const HAUSDORFF_MAX: f64 = 3.0;
const END_TO_END_BUDGET_S: f64 = 60.0;
const ITERATION_BUDGET: &str = "85";
const LONG_RUN_STEPS: usize = 1000;
const LONG_RUN_MU_DT: f64 = 0.2;
const REINIT_TOL: f64 = 0.1;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn phantom(noise: f64) -> Phantom {
    make_phantom(SIZE, R_INNER, R_OUTER, noise, SEED).unwrap()
}

fn default_config() -> CaseConfig {
    let c = phantom_center(SIZE);
    CaseConfig {
        ellipse: EllipseSpec::circle(c, c, R_INNER / 2.0),
        ..Default::default()
    }
}

// Criterion 1

fn naive_counts(a: &BinaryMask, b: &BinaryMask) -> [u64; 4] {
    let mut c = [0; 4];
    for (&p, &l) in a.bits().iter().zip(b.bits()) {
        c[match (p, l) {
            (true, true) => 0,
            (false, false) => 1,
            (true, false) => 2,
            (false, true) => 3,
        }] += 1;
    }
    c
}

fn naive_hausdorff(a: &BinaryMask, b: &BinaryMask) -> Option<f64> {
    let pts = |m: &BinaryMask| -> Vec<(f64, f64)> {
        (0..m.height())
            .flat_map(|y| (0..m.width()).map(move |x| (x, y)))
            .filter(|&(x, y)| m.get(x, y))
            .map(|(x, y)| (x as f64, y as f64))
            .collect()
    };
    let (pa, pb) = (pts(a), pts(b));
    if pa.is_empty() || pb.is_empty() {
        return None;
    }
    let directed = |from: &[(f64, f64)], to: &[(f64, f64)]| {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| (p.0 - q.0).hypot(p.1 - q.1))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Some(directed(&pa, &pb).max(directed(&pb, &pa)))
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0;
    for _ in 0..200 {
        let density = rng.random_range(0.05..0.95);
        let a = BinaryMask::from_fn(8, 8, |_, _| rng.random_bool(density)).unwrap();
        let b = BinaryMask::from_fn(8, 8, |_, _| rng.random_bool(density)).unwrap();
        let [tp, tn, fp, fn_] = naive_counts(&a, &b);
        let c = confusion(&a, &b).unwrap();
        let (ftp, ftn, ffp, ffn) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
        let want_dice = (2 * tp + fp + fn_ > 0).then(|| 2.0 * ftp / (2.0 * ftp + ffp + ffn));
        let den = (ftp + ffp) * (ftp + ffn) * (ftn + ffp) * (ftn + ffn);
        let want_mcc = (den != 0.0).then(|| (ftp * ftn - ffp * ffn) / den.sqrt());
        let mcc_ok = match (mcc(&c).ok(), want_mcc) {
            (Some(g), Some(w)) => (g - w).abs() <= ORACLE_TOL,
            (g, w) => g == w,
        };
        let ok = (c.tp, c.tn, c.fp, c.fn_) == (tp, tn, fp, fn_)
            && dice(&a, &b).ok() == want_dice
            && hausdorff(&a, &b).ok() == naive_hausdorff(&a, &b)
            && (pixel_accuracy(&c) - (ftp + ftn) / 64.0).abs() <= ORACLE_TOL
            && mcc_ok;
        mismatches += usize::from(!ok);
    }

    let row = |bits: [bool; 6]| BinaryMask::new(6, 1, bits.to_vec()).unwrap();
    let half = dice(
        &row([true, true, true, true, false, false]),
        &row([false, false, true, true, true, true]),
    )
    .unwrap();
    let mut p = BinaryMask::empty(5, 5).unwrap();
    let mut q = BinaryMask::empty(5, 5).unwrap();
    p.set(0, 0, true);
    q.set(3, 4, true);
    let hd = hausdorff(&p, &q).unwrap();
    let third = mcc(&ConfusionCounts {
        tp: 2,
        tn: 2,
        fp: 1,
        fn_: 1,
    })
    .unwrap();
    let hand_ok = half == 0.5 && hd == 5.0 && (third - 1.0 / 3.0).abs() <= ORACLE_TOL;

    let t = secs(start.elapsed());
    Outcome::new(
        mismatches == 0 && hand_ok && t < ORACLE_BUDGET_S,
        format!("{mismatches}/200 pairs differ from brute force; hand cases dice={half} hd={hd} mcc={third:.12}; {t:.2}s (< {ORACLE_BUDGET_S}s)"),
    )
}

// Criteria 2 and 3 share one run.

fn regularity(run: &StageResult, elapsed: Duration) -> Outcome {
    let dev = band_gradient_deviation(&run.phi, BAND).unwrap_or(f64::INFINITY);
    let t = secs(elapsed);
    Outcome::new(
        dev < REGULARITY_MAX && t < REGULARITY_BUDGET_S,
        format!("mean ||grad phi|-1| over |phi|<{BAND} = {dev:.4} (< {REGULARITY_MAX}); {t:.2}s (< {REGULARITY_BUDGET_S}s)"),
    )
}

fn energy_descent(run: &StageResult) -> Outcome {
    let trace = &run.energy_trace;
    let (e0, last) = (trace[0], *trace.last().unwrap());
    let (worst_step, worst_rise) = trace.windows(2).map(|w| w[1] - w[0]).enumerate().fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, d)| if d > acc.1 { (i + 1, d) } else { acc },
    );
    let tol = ENERGY_RISE_FRAC * e0.abs();
    Outcome::new(
        last < e0 && worst_rise <= tol,
        format!("E0={e0:.3} final={last:.3}; largest single-step rise {worst_rise:.3} at step {worst_step} (<= {tol:.3})"),
    )
}

// CLI helpers

fn lvseg(args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_lvseg"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{:?}: {}",
            o.status.code(),
            String::from_utf8_lossy(&o.stderr).trim()
        ))
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn phantom_cli(out: &Path, noise: f64) -> Result<(), String> {
    lvseg(&[
        "phantom",
        "--seed",
        &SEED.to_string(),
        "--noise",
        &noise.to_string(),
        "--out",
        s(out),
    ])
}

fn case_cli(mode: &str, ph: &Path, out: &Path, extra: &[&str]) -> Result<(), String> {
    let (image, le, lp) = (
        ph.join("phantom.pgm"),
        ph.join("label_endo.pgm"),
        ph.join("label_epi.pgm"),
    );
    let mut args = vec![
        mode,
        "--image",
        s(&image),
        "--label-endo",
        s(&le),
        "--label-epi",
        s(&lp),
        "--out",
        s(out),
    ];
    args.extend_from_slice(extra);
    lvseg(&args)
}

fn csv_rows(out: &Path) -> Result<Vec<Vec<String>>, String> {
    let text = fs::read_to_string(out.join("metrics.csv")).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err("unexpected CSV header".into());
    }
    Ok(lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect())
}

fn num(field: &str) -> f64 {
    field.parse().unwrap_or(f64::NAN)
}

fn end_to_end(tmp: &Path) -> Result<Outcome, String> {
    let start = Instant::now();
    let out = tmp.join("c4");
    phantom_cli(&out, NOISE)?;
    let t = secs(start.elapsed());
    let rows = csv_rows(&out)?;
    let get = |stage: &str| {
        rows.iter()
            .find(|r| r[1] == stage)
            .map(|r| (num(&r[4]), num(&r[5])))
    };
    let (Some((de, he)), Some((dp, hp))) = (get("endo"), get("epi")) else {
        return Err("missing endo or epi row".into());
    };
    let endo = load_mask(&out.join("endo_mask.pgm")).map_err(|e| e.to_string())?;
    let epi = load_mask(&out.join("epi_mask.pgm")).map_err(|e| e.to_string())?;
    let outside = endo
        .bits()
        .iter()
        .zip(epi.bits())
        .filter(|(&e, &p)| e && !p)
        .count();
    Ok(Outcome::new(
        de >= DICE_MIN
            && dp >= DICE_MIN
            && he <= HAUSDORFF_MAX
            && hp <= HAUSDORFF_MAX
            && outside == 0
            && t < END_TO_END_BUDGET_S,
        format!(
            "endo Dice {de:.4} HD {he:.3}; epi Dice {dp:.4} HD {hp:.3} (>= {DICE_MIN}, <= {HAUSDORFF_MAX}px); \
             {outside} endo pixels outside epi; {t:.2}s (< {END_TO_END_BUDGET_S}s)"
        ),
    ))
}

fn baseline_direction() -> Outcome {
    let ph = phantom(NOISE);
    let cfg = default_config();
    let prep = prepare(&ph.image, &cfg).unwrap();
    let drlse = segment_endocardium_prepared(&prep, &cfg, Method::Drlse).unwrap();
    let lsf = segment_endocardium_prepared(&prep, &cfg, Method::Baseline).unwrap();
    let (dd, dl) = (
        dice(&drlse.mask, &ph.endo).unwrap(),
        dice(&lsf.mask, &ph.endo).unwrap(),
    );
    let (gd, gl) = (
        band_gradient_deviation(&drlse.phi, BAND).unwrap_or(f64::NAN),
        band_gradient_deviation(&lsf.phi, BAND).unwrap_or(f64::NAN),
    );
    Outcome::new(
        dd >= dl && gl > gd,
        format!(
            "endo Dice drlse {dd:.4} vs lsf {dl:.4} (drlse >= lsf: {}); band deviation lsf {gl:.4} vs drlse {gd:.4} (lsf > drlse: {})",
            dd >= dl,
            gl > gd
        ),
    )
}

fn ablation(tmp: &Path) -> Result<Outcome, String> {
    let ph = tmp.join("c6_phantom");
    phantom_cli(&ph, HIGH_NOISE)?;
    let out = tmp.join("c6");
    case_cli("ablate-preproc", &ph, &out, &[])?;
    let rows = csv_rows(&out)?;
    let arms: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    let want = [
        "bilateral+gradient",
        "wiener+gradient",
        "bilateral",
        "wiener",
        "gradient",
        "none",
    ];
    let budget = rows.iter().all(|r| r[8] == ITERATION_BUDGET);
    let dice_of = |arm: &str| {
        rows.iter()
            .find(|r| r[2] == arm)
            .map_or(f64::NAN, |r| num(&r[4]))
    };
    let (bf, none) = (dice_of("bilateral"), dice_of("none"));
    Ok(Outcome::new(
        arms == want && budget && bf >= none,
        format!("arms {arms:?}; all at {ITERATION_BUDGET} iterations: {budget}; noise {HIGH_NOISE} Dice bilateral {bf:.4} vs none {none:.4}"),
    ))
}

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn without_wall_ms(text: &str) -> String {
    text.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism(tmp: &Path) -> Result<Outcome, String> {
    let mut notes = Vec::new();
    let mut all_equal = true;
    let mut compared = 0;
    for mode in ["phantom", "segment", "ablate-preproc", "compare-baseline"] {
        let dirs = [
            tmp.join(format!("c7_{mode}_a")),
            tmp.join(format!("c7_{mode}_b")),
        ];
        for d in &dirs {
            if mode == "phantom" {
                phantom_cli(d, NOISE)?;
            } else {
                case_cli(
                    mode,
                    &tmp.join("c7_phantom_a"),
                    d,
                    &["--snapshot-every", "20"],
                )?;
            }
        }
        let (fa, fb) = (files_under(&dirs[0]), files_under(&dirs[1]));
        let mut same = fa == fb;
        if same {
            for f in &fa {
                let (a, b) = (
                    fs::read(dirs[0].join(f)).unwrap(),
                    fs::read(dirs[1].join(f)).unwrap(),
                );
                same &= if f.extension().is_some_and(|e| e == "csv") {
                    without_wall_ms(&String::from_utf8_lossy(&a))
                        == without_wall_ms(&String::from_utf8_lossy(&b))
                } else {
                    a == b
                };
                compared += 1;
            }
        }
        if !same {
            notes.push(format!("{mode} differs"));
        }
        all_equal &= same;
    }
    Ok(Outcome::new(
        all_equal,
        format!(
            "4 modes, {compared} file pairs compared{}",
            if notes.is_empty() {
                String::new()
            } else {
                format!("; {}", notes.join(", "))
            }
        ),
    ))
}

fn numerical_safety() -> Outcome {
    let ph = phantom(NOISE);
    let mut cfg = default_config();
    cfg.endo.iters = LONG_RUN_STEPS;
    let mu_dt = cfg.endo.mu * cfg.endo.timestep;
    let long = segment_endocardium(&ph.image, &cfg);
    let finite = match &long {
        Ok(r) => r.phi.phi().iter().all(|v| v.is_finite()),
        Err(_) => false,
    };

    // Signed distance to a circle, scaled by a smooth positive factor.
    let n = 96;
    let c = (n as f64 - 1.0) / 2.0;
    let distorted = LevelSetField::from_fn(n, n, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let factor = 1.5 + (0.3 * fx).sin() * (0.2 * fy).cos();
        ((fx - c).hypot(fy - c) - 25.0) * factor
    })
    .unwrap();
    let before = band_gradient_deviation(&distorted, BAND).unwrap();
    let after = reinitialize(&distorted)
        .ok()
        .and_then(|r| band_gradient_deviation(&r, BAND))
        .unwrap_or(f64::NAN);
    Outcome::new(
        finite && mu_dt == LONG_RUN_MU_DT && after < REINIT_TOL,
        format!(
            "{LONG_RUN_STEPS} steps at mu*dt={mu_dt}: all phi finite = {finite}{}; reinit band deviation {before:.3} -> {after:.4} (< {REINIT_TOL})",
            long.err().map_or(String::new(), |e| format!(" ({e})"))
        ),
    )
}

fn main() -> ExitCode {
    let tmp = TempDir::new().unwrap();
    let ph = phantom(NOISE);
    let start = Instant::now();
    let run = segment_endocardium(&ph.image, &default_config()).unwrap();
    let run_time = start.elapsed();

    let fail = |e: String| Outcome::new(false, e);
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "metric oracle suite", metric_oracles()),
        (2, "DRLSE regularity", regularity(&run, run_time)),
        (3, "energy descent", energy_descent(&run)),
        (
            4,
            "end-to-end phantom segmentation",
            end_to_end(tmp.path()).unwrap_or_else(fail),
        ),
        (5, "baseline comparison direction", baseline_direction()),
        (
            6,
            "preprocessing ablation",
            ablation(tmp.path()).unwrap_or_else(fail),
        ),
        (
            7,
            "determinism",
            determinism(tmp.path()).unwrap_or_else(fail),
        ),
        (8, "numerical safety", numerical_safety()),
    ];

    let mut failed = 0;
    for (n, name, o) in &results {
        println!(
            "criterion {n} {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
