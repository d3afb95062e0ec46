//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! and the run exits non-zero if any criterion fails. Built without the test
//! harness so the report is never captured:
//! `cargo test -p jscc-core --test acceptance`.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use jscc_core::analysis::analyze;
use jscc_core::catalog::{find, CATALOG};
use jscc_core::codec::{encode_source, encode_source_traditional, LiftedCode, DEFAULT_MAX_FILLERS};
use jscc_core::exit::{binary_entropy, channel_threshold, shannon_limit, ExitConfig};
use jscc_core::lifting::{lift, lift_peg, QcMatrix, DEFAULT_ATTEMPTS};
use jscc_core::optimize::{
    de_optimize, enumerate_search, Block, DeParams, FreeCell, LinkRule, SearchSpace,
};
use jscc_core::sim::{run_point, SimConfig, SimPoint};
use jscc_core::{JointCode, Orientation, Protomatrix, TriangularLink};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn code(id: &str) -> JointCode {
    find(id)
        .unwrap_or_else(|| panic!("unknown code {id}"))
        .code()
}

fn threshold(code: &JointCode) -> (f64, f64) {
    let r = channel_threshold(code, ExitConfig::default()).expect("threshold");
    (r.threshold_db, r.threshold_source_db)
}

/// Indices of `values` sorted ascending.
fn order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

fn complexity_and_latency() -> Outcome {
    let pairs = [
        ("example1_opt1", "example1_orig", ["20%", "0", "20%", "0"]),
        (
            "example2_j4_opt3",
            "example2_j4",
            ["23.1%", "12.5%", "23.1%", "10%"],
        ),
        ("example3_opt", "example3_org", ["33.3%", "33.3%", "0", "0"]),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (new, old, want) in pairs {
        let got: Vec<String> = analyze(&code(new), &code(old))
            .map_err(|e| e.to_string())?
            .percentages()
            .iter()
            .map(ToString::to_string)
            .collect();
        ok &= got == want;
        detail.push(format!("{new}: ({})", got.join(", ")));
    }
    check(ok, detail.join("; "))
}

fn example1_variant(x1: u32, x2: u32) -> JointCode {
    let base = code("example1_orig");
    let orientation = if x2 > 0 {
        Orientation::Upper
    } else {
        Orientation::Lower
    };
    let t = Protomatrix::from_rows(&[[1, x2], [x1, 1]]).unwrap();
    base.with_link(TriangularLink::new(orientation, t, 3).unwrap())
        .unwrap()
}

fn example1_link_thresholds() -> Outcome {
    let cases = [
        (0, 1, -5.267),
        (0, 2, -5.204),
        (0, 3, -5.049),
        (0, 0, -5.127),
        (1, 0, -4.819),
        (2, 0, -4.526),
        (3, 0, -4.273),
    ];
    let got: Vec<f64> = cases
        .iter()
        .map(|&(x1, x2, _)| threshold(&example1_variant(x1, x2)).0)
        .collect();
    let want: Vec<f64> = cases.iter().map(|c| c.2).collect();
    let close = got.iter().zip(&want).all(|(g, w)| (g - w).abs() <= 0.1);
    let same_order = order(&got) == order(&want);
    let listed: Vec<String> = cases
        .iter()
        .zip(&got)
        .map(|(c, g)| format!("({},{}) {g:.3}", c.0, c.1))
        .collect();
    check(
        close && same_order,
        format!(
            "{} | order {}",
            listed.join(", "),
            if same_order { "ok" } else { "differs" }
        ),
    )
}

fn example2_to_4_thresholds() -> Outcome {
    let family = [
        ("example2_j3", -9.324),
        ("example2_j3_opt1", -9.555),
        ("example2_j3_opt2", -9.680),
        ("example2_j3_opt3", -9.734),
        ("example2_j4", -9.390),
        ("example2_j4_opt1", -9.616),
        ("example2_j4_opt2", -9.722),
        ("example2_j4_opt3", -9.744),
    ];
    // Es/N0 per source symbol
    let got: Vec<f64> = family
        .iter()
        .map(|(id, _)| threshold(&code(id)).1)
        .collect();
    let want: Vec<f64> = family.iter().map(|f| f.1).collect();
    let close = got.iter().zip(&want).all(|(g, w)| (g - w).abs() <= 0.1);
    let same_order = order(&got) == order(&want);
    let mut detail: Vec<String> = family
        .iter()
        .zip(&got)
        .map(|(f, g)| format!("{} {g:.3}", &f.0[9..]))
        .collect();
    let mut ok = close && same_order;
    for (id, want) in [
        ("example3_org", -0.653),
        ("example3_opt", -0.840),
        ("example4_opt2", -5.815),
    ] {
        let g = threshold(&code(id)).0;
        ok &= (g - want).abs() <= 0.1;
        detail.push(format!("{id} {g:.3}"));
    }
    detail.push(format!(
        "order {}",
        if same_order { "ok" } else { "differs" }
    ));
    check(ok, detail.join(", "))
}

fn shannon() -> Outcome {
    // closed form: Es/N0 = (2^(2 R H(p1)) - 1) / 2
    let oracle =
        |p1: f64, r: f64| 10.0 * (((2f64).powf(2.0 * r * binary_entropy(p1)) - 1.0) / 2.0).log10();
    let a = shannon_limit(0.04, 1.0).gaussian_db;
    let b = shannon_limit(0.14, 1.0).gaussian_db;
    let c = shannon_limit(0.01, 2.0);
    let ok = (a - -7.00).abs() <= 0.02
        && (b - -2.05).abs() <= 0.02
        && (a - oracle(0.04, 1.0)).abs() < 1e-9
        && (b - oracle(0.14, 1.0)).abs() < 1e-9;
    check(
        ok,
        format!(
            "p1=0.04: {a:.3}, p1=0.14: {b:.3}; p1=0.01 R=2 (reported only, published -12.02): {:.3} per channel symbol, {:.3} per source symbol",
            c.gaussian_db, c.gaussian_source_db
        ),
    )
}

fn syndrome_oracle(qc: &QcMatrix, x: &[u8]) -> bool {
    let z = qc.z2();
    (0..qc.rows()).all(|r| {
        let mut syn = vec![0u8; z];
        for c in 0..qc.cols() {
            if let Some(h) = qc.shift(r, c) {
                for (i, s) in syn.iter_mut().enumerate() {
                    *s ^= x[c * z + (i + h) % z];
                }
            }
        }
        syn.iter().all(|&b| b == 0)
    })
}

fn encoder_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut frames = 0usize;
    let mut identity_checks = 0usize;
    for z2 in [50, 400, 800] {
        for entry in CATALOG.iter() {
            let c = entry.code();
            let lifted = LiftedCode::build(&c, 4, z2, 1, DEFAULT_ATTEMPTS, DEFAULT_MAX_FILLERS, 10)
                .map_err(|e| format!("{} z2={z2}: {e}", entry.id))?;
            for _ in 0..1000 {
                let mut s: Vec<u8> = (0..lifted.qc().source_len())
                    .map(|_| rng.gen_bool(c.p1()) as u8)
                    .collect();
                lifted.conform_source(&mut s);
                let cw = lifted
                    .encode(&s)
                    .map_err(|e| format!("{} z2={z2}: {e}", entry.id))?;
                if !syndrome_oracle(lifted.qc(), &cw.joint()) {
                    return Err(format!("{} z2={z2}: non-zero syndrome", entry.id));
                }
                if c.link().is_identity() {
                    let trad =
                        encode_source_traditional(&s, lifted.qc()).map_err(|e| e.to_string())?;
                    if trad != encode_source(&s, lifted.qc()).map_err(|e| e.to_string())? {
                        return Err(format!(
                            "{} z2={z2}: triangular and parallel encoders differ",
                            entry.id
                        ));
                    }
                    identity_checks += 1;
                }
                frames += 1;
            }
        }
    }
    Ok(format!(
        "{frames} frames with zero syndrome, {identity_checks} identity-link frames encoder-equal"
    ))
}

fn lifting_suite() -> Outcome {
    let mut worst = usize::MAX;
    for entry in CATALOG.iter() {
        let c = entry.code();
        let proto = c.assemble_joint();
        let l = c.layout();
        let base = lift_peg(&c, 4, 1).map_err(|e| e.to_string())?;
        let dense = base.to_dense();
        for pr in 0..proto.rows() {
            for pc in 0..proto.cols() {
                let b = proto.get(pr, pc) as usize;
                for i in 0..4 {
                    let row: usize = (0..4).map(|j| dense[pr * 4 + i][pc * 4 + j] as usize).sum();
                    let col: usize = (0..4).map(|j| dense[pr * 4 + j][pc * 4 + i] as usize).sum();
                    if (row, col) != (b, b) {
                        return Err(format!(
                            "{}: cell ({pr}, {pc}) multiplicity broken",
                            entry.id
                        ));
                    }
                }
            }
        }
        for z2 in [50, 400, 800] {
            let qc = lift(&c, 4, z2, 1, DEFAULT_ATTEMPTS)
                .map_err(|e| format!("{} z2={z2}: {e}", entry.id))?;
            match qc.girth() {
                jscc_core::lifting::Girth::Finite(g) if g < 6 => {
                    return Err(format!("{} z2={z2}: girth {g}", entry.id));
                }
                jscc_core::lifting::Girth::Finite(g) => worst = worst.min(g),
                jscc_core::lifting::Girth::Acyclic => {}
            }
            for j in 0..l.m_s * 4 {
                if qc.shift(j, l.link_start() * 4 + j) != Some(0) {
                    return Err(format!(
                        "{} z2={z2}: link diagonal block {j} is not the identity",
                        entry.id
                    ));
                }
            }
            if z2 == 400 {
                let again = lift(&c, 4, z2, 1, DEFAULT_ATTEMPTS).map_err(|e| e.to_string())?;
                if again.to_text() != qc.to_text() {
                    return Err(format!("{}: re-lift differs", entry.id));
                }
            }
        }
    }
    Ok(format!("all fixture lifts have girth >= 6 (smallest {worst}), multiplicities and identity diagonals hold, re-lifts identical"))
}

fn fixed_frames(id: &str, z2: usize, esn0: f64, frames: u64, sim_seed: u64) -> SimPoint {
    let c = code(id);
    let lifted =
        LiftedCode::build(&c, 4, z2, 1, DEFAULT_ATTEMPTS, DEFAULT_MAX_FILLERS, 10).expect("lift");
    let mut cfg = SimConfig::new(id, 4, z2, vec![esn0]);
    cfg.sim_seed = sim_seed;
    // stop right after `frames` frames
    cfg.max_frames = frames - 1;
    cfg.min_frames = frames;
    cfg.target_error_frames = u64::MAX;
    run_point::<f32>(&lifted, &cfg, esn0).expect("simulation")
}

fn noiseless_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut bits = 0usize;
    for entry in CATALOG.iter() {
        let c = entry.code();
        let lifted = LiftedCode::build(&c, 4, 50, 1, DEFAULT_ATTEMPTS, DEFAULT_MAX_FILLERS, 10)
            .map_err(|e| e.to_string())?;
        let mut dec = lifted.decoder::<f64>();
        for _ in 0..20 {
            let mut s: Vec<u8> = (0..lifted.qc().source_len())
                .map(|_| rng.gen_bool(c.p1()) as u8)
                .collect();
            lifted.conform_source(&mut s);
            let cw = lifted.encode(&s).map_err(|e| e.to_string())?;
            let x: Vec<f64> = lifted.modulate(&cw);
            let out = dec.decode(&lifted.llr(&x, 30.0), 200);
            let errors = lifted.source_errors(&s, &out.bits[..s.len()]);
            if errors > 0 {
                return Err(format!(
                    "{}: {errors} source errors without noise",
                    entry.id
                ));
            }
            bits += lifted.info_len();
        }
    }
    Ok(format!("SSER 0 over {bits} source bits"))
}

fn desk_scale_ordering() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    let pairs = [
        ("example1_orig", "example1_opt1", -4.0),
        ("example3_org", "example3_opt", 0.2),
    ];
    for (orig, opt, esn0) in pairs {
        let a = fixed_frames(orig, 100, esn0, 1500, 1);
        let b = fixed_frames(opt, 100, esn0, 1500, 1);
        ok &= b.sser < a.sser;
        detail.push(format!(
            "{orig} {:.2e} vs {opt} {:.2e} at {esn0} dB",
            a.sser, b.sser
        ));
    }
    for family in ["example2_j3", "example2_j4"] {
        let ids = [
            family.to_string(),
            format!("{family}_opt1"),
            format!("{family}_opt2"),
            format!("{family}_opt3"),
        ];
        let sser: Vec<f64> = ids
            .iter()
            .map(|id| fixed_frames(id, 100, -5.6, 1500, 1).sser)
            .collect();
        // thresholds fall along the chain, so error rates should too
        ok &= sser.windows(2).all(|w| w[1] < w[0]);
        let listed: Vec<String> = sser.iter().map(|s| format!("{s:.2e}")).collect();
        detail.push(format!("{family} chain at -5.6 dB: {}", listed.join(" > ")));
    }
    check(
        ok,
        format!("z2=100, 1500 frames each; {}", detail.join("; ")),
    )
}

fn desk_scale_monotone() -> Outcome {
    let grid = [-4.6, -4.3, -4.0];
    let mut ok = true;
    let mut detail = Vec::new();
    for id in ["example1_orig", "example1_opt1"] {
        let pts: Vec<SimPoint> = grid
            .iter()
            .map(|&e| fixed_frames(id, 100, e, 1500, 3))
            .collect();
        for w in pts.windows(2) {
            // equal bit counts, so compare error counts with a 2-sigma allowance
            let (a, b) = (w[0].bit_errors as f64, w[1].bit_errors as f64);
            ok &= b <= a + 2.0 * (a + 1.0).sqrt();
        }
        let listed: Vec<String> = pts.iter().map(|p| format!("{:.2e}", p.sser)).collect();
        detail.push(format!("{id}: {}", listed.join(", ")));
    }
    check(ok, format!("Es/N0 {grid:?} dB; {}", detail.join("; ")))
}

fn link_cell(row: usize, col: usize) -> FreeCell {
    FreeCell {
        block: Block::Link,
        row,
        col,
        lo: 0,
        hi: 3,
    }
}

fn optimizer() -> Outcome {
    let config = ExitConfig::default();
    let cells = vec![link_cell(0, 1), link_cell(1, 0)];
    let mut ok = true;
    let mut detail = Vec::new();

    // assignments are (x2, x1): upper cell first
    let space = SearchSpace::new(
        code("example1_orig"),
        cells.clone(),
        LinkRule::Either,
        false,
    )
    .map_err(|e| e.to_string())?;
    let ranked = enumerate_search(&space, &config).map_err(|e| e.to_string())?;
    let best = &ranked[0];
    ok &= best.assignment == [1, 0];
    detail.push(format!(
        "Ex1 best (x1={}, x2={}) {:.3} dB",
        best.assignment[1], best.assignment[0], best.threshold_db
    ));

    for template in ["example2_j3", "example2_j4"] {
        let t = code(template);
        let base = threshold(&t).0;
        let space = SearchSpace::new(t, cells.clone(), LinkRule::Either, false)
            .map_err(|e| e.to_string())?;
        let improving: BTreeSet<(u32, u32)> = enumerate_search(&space, &config)
            .map_err(|e| e.to_string())?
            .into_iter()
            .filter(|e| e.threshold_db < base)
            .map(|e| (e.assignment[1], e.assignment[0]))
            .collect();
        ok &= improving == BTreeSet::from([(1, 0), (2, 0), (3, 0)]);
        detail.push(format!("{template} improving (x1,x2) {improving:?}"));
    }

    let t = code("example3_org");
    let m = t.link().size();
    let lower: Vec<FreeCell> = (0..m)
        .flat_map(|i| (0..i).map(move |j| link_cell(i, j)))
        .collect();
    let space = SearchSpace::new(t, lower, LinkRule::Fixed, false).map_err(|e| e.to_string())?;
    let de = de_optimize(&space, DeParams::default(), &config, 1);
    ok &= de.best.threshold_db <= -0.75;
    detail.push(format!(
        "Ex3 DE {:.3} dB at {:?} ({} evaluations)",
        de.best.threshold_db,
        de.best.assignment,
        de.evaluated.len()
    ));
    check(ok, detail.join("; "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Complexity and latency percentages", complexity_and_latency),
        (
            "Example 1 link variants: thresholds and order",
            example1_link_thresholds,
        ),
        (
            "Examples 2-4 thresholds and Example 2 order",
            example2_to_4_thresholds,
        ),
        ("Shannon limits", shannon),
        ("Encoder soundness", encoder_soundness),
        ("Lifting properties", lifting_suite),
        (
            "Desk-scale SSER: noiseless round trip",
            noiseless_round_trip,
        ),
        ("Desk-scale SSER: optimized codes win", desk_scale_ordering),
        ("Desk-scale SSER: monotone sweeps", desk_scale_monotone),
        ("Optimizer", optimizer),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS  {name} ({secs:.1} s): {d}"),
            Err(d) => {
                println!("FAIL  {name} ({secs:.1} s): {d}");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!(
            "acceptance: {} of {} criteria failed: {failed:?}",
            failed.len(),
            criteria.len()
        );
        std::process::exit(1);
    }
}
