use std::path::PathBuf;

use equibif::config::ProblemConfig;
use equibif::continuation::Termination;
use equibif::pipeline::{analyze, diagram_from_dir, euler, run_continuation, run_pipeline, spectrum, write_artifacts, LambdaSelection};
use equibif::Error;
use serde_json::Value;

fn fixture(name: &str) -> ProblemConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    ProblemConfig::load(&path).unwrap()
}

fn artifact<'a>(artifacts: &'a [equibif::pipeline::Artifact], name: &str) -> &'a str {
    &artifacts.iter().find(|a| a.name == name).unwrap_or_else(|| panic!("no {name}")).contents
}

#[test]
fn scalar_cubic_end_to_end() {
    let cfg = fixture("scalar_cubic.toml");
    let run = run_pipeline(&cfg, &LambdaSelection::AllFlagged).unwrap();
    let lambdas: Vec<String> = run.report.candidates.iter().map(|(c, _)| c.lambda.label()).collect();
    // Λ ∩ [−1, 10] = {k² : k ≥ 0} ∩ [−1, 10] since A = [1] on the unit interval.
    let expected: Vec<String> = (0..)
        .map(|k: i64| k * k)
        .take_while(|v| *v <= 10)
        .map(|v| v.to_string())
        .collect();
    assert_eq!(lambdas, expected);
    assert!(run.report.candidates.iter().all(|(_, v)| v.verdict == equibif::analysis::VerdictKind::GlobalBifurcation));
    assert_eq!(run.lambda0.len(), 4);
    assert_eq!(run.branches.len(), 8);
    for i in 0..8 {
        let csv = artifact(&run.artifacts, &format!("branch_{i:03}.csv"));
        assert!(csv.starts_with("step,lambda,h1_norm,residual,inertia\n"));
        assert!(csv.lines().count() > 3);
    }
    let summary: Value = serde_json::from_str(artifact(&run.artifacts, "branches.json")).unwrap();
    assert_eq!(summary["branches"].as_array().unwrap().len(), 8);
    assert!(artifact(&run.artifacts, "analysis.json").contains("GlobalBifurcation"));
}

#[test]
fn outputs_are_deterministic() {
    let cfg = fixture("circle_orbit.toml");
    let sel = LambdaSelection::parse("-1/2").unwrap();
    let a = run_pipeline(&cfg, &sel).unwrap().artifacts;
    let b = run_pipeline(&cfg, &sel).unwrap().artifacts;
    assert_eq!(a, b);
}

#[test]
fn non_invariant_potential_is_an_assumption_failure() {
    let cfg = fixture("non_invariant.toml");
    let err = analyze(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("element 1"), "{err}");
    let detail = equibif::pipeline::error_json(&err);
    assert_eq!(detail["exit_code"], 2);
}

#[test]
fn square_spectrum_multiplicities() {
    let out = spectrum(&fixture("square_scalar.toml")).unwrap();
    let json: Value = serde_json::from_str(artifact(&out, "spectrum.json")).unwrap();
    let mults: Vec<u64> = json["eigenvalues"].as_array().unwrap().iter().map(|e| e["multiplicity"].as_u64().unwrap()).collect();
    // Brute force over k1² + k2² ≤ 40.
    let mut counts = std::collections::BTreeMap::new();
    for a in 0..=6u64 {
        for b in 0..=6u64 {
            if a * a + b * b <= 40 {
                *counts.entry(a * a + b * b).or_insert(0u64) += 1;
            }
        }
    }
    assert_eq!(mults, counts.values().copied().collect::<Vec<_>>());
    assert_eq!(&mults[..3], &[1, 2, 1]);
    assert_eq!(json["simplicity"]["simple"], false);
}

#[test]
fn square_multiplicity_two_candidates_are_inconclusive() {
    let (report, _) = analyze(&fixture("square_scalar.toml")).unwrap();
    for (c, v) in &report.candidates {
        let odd = v.criterion_sum % 2 == 1;
        assert_eq!(v.verdict == equibif::analysis::VerdictKind::GlobalBifurcation, odd, "λ = {}", c.lambda.label());
    }
    let one = report.candidates.iter().find(|(c, _)| c.lambda.label() == "1").unwrap();
    assert_eq!(one.1.criterion_sum, 2);
}

#[test]
fn uncertified_lambda_is_refused_for_continuation() {
    let cfg = fixture("square_scalar.toml");
    let err = run_continuation(&cfg, &LambdaSelection::parse("1").unwrap()).unwrap_err();
    assert!(matches!(err, Error::Contract(_)));
    assert!(run_continuation(&cfg, &LambdaSelection::parse("3").unwrap()).is_err());
}

#[test]
fn mode_loop_reconnects_through_the_pipeline() {
    let run = run_continuation(&fixture("mode_loop.toml"), &LambdaSelection::parse("1/2").unwrap()).unwrap();
    assert!(run
        .branches
        .iter()
        .any(|b| matches!(b.termination, Termination::ReconnectedTrivial(l) if (l - 1.0).abs() < 1e-3)));
}

#[test]
fn euler_jumps_follow_parity() {
    let out = euler(&fixture("rotation_d4.toml"), &LambdaSelection::AllFlagged).unwrap();
    let json: Value = serde_json::from_str(artifact(&out, "euler.json")).unwrap();
    let jumps = json["jumps"].as_array().unwrap();
    assert!(!jumps.is_empty());
    for j in jumps {
        // R² is irreducible under D4 with no fixed vector, so every candidate
        // has dim V^G = 0 and the G-coordinate does not move.
        assert_eq!(j["isotropy_coefficient"], 0, "{j}");
    }
    let out = euler(&fixture("z2_swap.toml"), &LambdaSelection::parse("1").unwrap()).unwrap();
    let json: Value = serde_json::from_str(artifact(&out, "euler.json")).unwrap();
    assert_ne!(json["jumps"][0]["isotropy_coefficient"], 0);
}

#[test]
fn diagram_is_rebuilt_from_written_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_continuation(&fixture("pitchfork.toml"), &LambdaSelection::AllFlagged).unwrap();
    write_artifacts(dir.path(), &run.artifacts).unwrap();
    let svg = diagram_from_dir(dir.path()).unwrap();
    assert_eq!(svg[0].contents, artifact(&run.artifacts, "diagram.svg").replace("λ0=1 +", "branch_000").replace("λ0=1 −", "branch_001"));
    std::fs::remove_file(dir.path().join("branch_001.csv")).unwrap();
    assert!(diagram_from_dir(dir.path()).is_err());
    let empty = tempfile::tempdir().unwrap();
    let svg = diagram_from_dir(empty.path()).unwrap();
    assert!(svg[0].contents.contains("id=\"trivial\"") && !svg[0].contents.contains("class=\"branch\""));
}
