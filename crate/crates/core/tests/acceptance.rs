//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria are evaluated from the verification suites at full size, plus a
//! determinism replay through the command-line binary. Two sub-checks are
//! recorded as known failures (`XFAIL`); the run fails on any other failure,
//! and also if a known failure starts passing, so the list stays honest.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use driftfill::verify::{self, Check, Suite, SuiteOptions};

const BIN: &str = env!("CARGO_BIN_EXE_driftfill");

/// Sub-checks that fail at desk scale for understood reasons.
const KNOWN_FAILURES: &[&str] = &["lemma::good_set_series", "moments::paley_zygmund_floor"];

struct Criterion {
    id: usize,
    title: &'static str,
    checks: &'static [&'static str],
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "traversal completions match exhaustive search",
        checks: &[
            "traversal::standard_completions_match_search",
            "traversal::alternate_completions_match_search_alpha_0.6",
            "traversal::alternate_completions_match_search_alpha_0.75",
            "traversal::alternate_completions_match_search_alpha_0.9",
        ],
    },
    Criterion {
        id: 2,
        title: "standard Hilbert hits all centers, Hölder 0.5",
        checks: &["curves::standard_hits_all_centers", "curves::standard_holder_exponent"],
    },
    Criterion {
        id: 3,
        title: "generalized curve Hölder exponent, zero-path coverage",
        checks: &["curves::generalized_holder_exponent", "curves::zero_path_coverage"],
    },
    Criterion { id: 4, title: "naive curve jumps at 1/2", checks: &["curves::naive_gap"] },
    Criterion {
        id: 5,
        title: "exceptional set sums, alternate curve continuous at 1/2",
        checks: &[
            "traversal::exceptional_partial_sums_alpha_0.6",
            "traversal::exceptional_partial_sums_alpha_0.75",
            "traversal::exceptional_partial_sums_alpha_0.9",
            "curves::alternate_continuous_at_half",
        ],
    },
    Criterion { id: 6, title: "reverse-Hölder witnesses", checks: &["curves::reverse_holder_witness"] },
    Criterion { id: 7, title: "Brownian coverage, d = 2", checks: &["curves::brownian_coverage"] },
    Criterion { id: 8, title: "shifted child cubes stay in their parents", checks: &["curves::overlap_containment"] },
    Criterion {
        id: 9,
        title: "collar volume, good set, reverse-Hölder pairs",
        checks: &["lemma::boundary_volume", "lemma::good_set_series", "lemma::reverse_holder_pairs"],
    },
    Criterion {
        id: 10,
        title: "occupation-time scaling, d = 3",
        checks: &["moments::first_moment_slope", "moments::paley_zygmund_floor"],
    },
    Criterion {
        id: 11,
        title: "box dimension of the perturbed Cantor image",
        checks: &["dimension::perturbed_image_dimension", "dimension::brownian_range_dimension"],
    },
];

fn run(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(BIN).args(args).current_dir(dir).output().map_err(|e| e.to_string())?;
    // 2 reports a failed verification, which still writes its output
    if matches!(out.status.code(), Some(0 | 2)) {
        Ok(())
    } else {
        Err(format!("{args:?} exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))
    }
}

/// Runs each command once, replays it from its manifest under other job
/// counts and compares the CSV bytes.
fn determinism() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let commands: &[(&str, &[&str])] = &[
        ("curve.csv", &["curve", "--family", "generalized", "--depth", "4", "--dense"]),
        ("alt.csv", &["curve", "--family", "alternate", "--alpha", "0.8", "--depth", "5"]),
        ("path.csv", &["path", "--d", "3", "--level", "12", "--seed", "7"]),
        ("cover.json", &["cover", "--seeds", "4", "--level", "14", "--depth", "14", "--csv", "cover.csv"]),
    ];
    let mut compared = 0;
    for (out, args) in commands {
        let mut first = vec!["--jobs", "1"];
        first.extend_from_slice(args);
        first.extend(["--out", out]);
        run(dir, &first)?;
        let csv = if *out == "cover.json" { "cover.csv" } else { out };
        let reference = std::fs::read(dir.join(csv)).map_err(|e| e.to_string())?;
        let manifest = format!("{out}.manifest.json");
        for jobs in ["1", "3"] {
            let replay_csv = format!("replay_{jobs}.csv");
            let mut replay = vec!["--jobs", jobs, "--config", &manifest, args[0], "--out"];
            let replay_out = format!("replay_{jobs}_{out}");
            replay.push(&replay_out);
            if *out == "cover.json" {
                replay.extend(["--csv", &replay_csv]);
            }
            run(dir, &replay)?;
            let again = if *out == "cover.json" { replay_csv.clone() } else { replay_out.clone() };
            let bytes = std::fs::read(dir.join(&again)).map_err(|e| e.to_string())?;
            if bytes != reference {
                return Err(format!("{} differs from {csv} under --jobs {jobs}", again));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} replays byte-identical"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let opts = SuiteOptions::default();
    let mut checks: BTreeMap<String, Check> = BTreeMap::new();
    for suite in [Suite::Traversal, Suite::Curves, Suite::Lemma, Suite::Moments, Suite::Dimension] {
        let t = Instant::now();
        match verify::run(suite, &opts) {
            Ok(reports) => {
                for r in reports {
                    for c in r.checks {
                        checks.insert(format!("{}::{}", r.suite, c.name), c);
                    }
                }
            }
            Err(e) => {
                println!("ERROR suite {}: {e}", suite.name());
                return ExitCode::FAILURE;
            }
        }
        println!("suite {} finished in {:.1}s", suite.name(), t.elapsed().as_secs_f64());
    }

    let mut unexpected = Vec::new();
    for c in CRITERIA {
        let mut failed = Vec::new();
        for &name in c.checks {
            match checks.get(name) {
                Some(ch) if ch.passed => {
                    if KNOWN_FAILURES.contains(&name) {
                        unexpected.push(format!("{name} passed but is listed as a known failure"));
                    }
                }
                Some(ch) => {
                    failed.push(format!("{name} (expected {}, measured {})", ch.expected, ch.measured));
                    if !KNOWN_FAILURES.contains(&name) {
                        unexpected.push(name.to_string());
                    }
                }
                None => {
                    failed.push(format!("{name} missing"));
                    unexpected.push(format!("{name} missing"));
                }
            }
        }
        if failed.is_empty() {
            println!("PASS criterion {}: {}", c.id, c.title);
        } else {
            println!("FAIL criterion {}: {}", c.id, c.title);
            for f in failed {
                let known = KNOWN_FAILURES.iter().any(|k| f.starts_with(k));
                println!("    {} {f}", if known { "XFAIL" } else { "FAIL" });
            }
        }
    }
    match determinism() {
        Ok(msg) => println!("PASS criterion 12: manifests replay deterministically ({msg})"),
        Err(e) => {
            println!("FAIL criterion 12: manifests replay deterministically ({e})");
            unexpected.push("determinism".into());
        }
    }

    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        println!("all failures are known failures: {}", KNOWN_FAILURES.join(", "));
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcomes: {}", unexpected.join("; "));
        ExitCode::FAILURE
    }
}
