use std::io::Write;
use std::process::{Command, Output};

use srr_core::service::verify_allocation;
use srr_core::{Allocation, Demand, PointMultiset};

const REGION_223: &str =
    r#"{"k":2,"T":[{"subset":[1],"value":2},{"subset":[2],"value":2},{"subset":[1,2],"value":3}]}"#;

fn example_region_json() -> String {
    let caps: Vec<String> = [
        (vec![1], 2),
        (vec![2], 2),
        (vec![3], 2),
        (vec![1, 2], 3),
        (vec![1, 3], 3),
        (vec![2, 3], 3),
        (vec![1, 2, 3], 4),
    ]
    .iter()
    .map(|(subset, value)| format!("{{\"subset\":{subset:?},\"value\":{value}}}"))
    .collect();
    format!("{{\"k\":3,\"T\":[{}]}}", caps.join(","))
}

fn srr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srr"))
        .args(args)
        .env_remove("SRR_NODE_LIMIT")
        .output()
        .expect("binary runs")
}

fn srr_with_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srr"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

fn stderr_text(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn gen_set_lists_both_generators_for_the_slack_pair_region() {
    let output = srr(&["region", "gen-set", REGION_223]);
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    let value = stdout_json(&output);
    assert_eq!(value["generating_set"], serde_json::json!([[1, 2], [2, 1]]));
}

#[test]
fn canonicalize_tightens_loose_caps_and_is_idempotent() {
    let region =
        r#"{"k":2,"T":[{"subset":[1],"value":5},{"subset":[2],"value":1},{"subset":[1,2],"value":3}]}"#;
    let output = srr(&["region", "canonicalize", region]);
    assert_eq!(exit_code(&output), 0);
    let value = stdout_json(&output);
    assert_eq!(value["changed"], true);
    let canonical = &value["canonical"];
    assert_eq!(canonical["T"][0]["value"], 3);
    assert_eq!(canonical["T"][1]["value"], 1);
    assert_eq!(canonical["T"][2]["value"], 3);

    let again = srr(&["region", "canonicalize", &canonical.to_string()]);
    assert_eq!(exit_code(&again), 0);
    assert_eq!(stdout_json(&again)["changed"], false);
}

#[test]
fn contains_reports_false_with_exit_zero() {
    let output = srr(&["region", "contains", REGION_223, r#"{"lambda":[2,2]}"#]);
    assert_eq!(exit_code(&output), 0);
    assert_eq!(stdout_json(&output)["contains"], false);

    let inside = srr(&[
        "region",
        "contains",
        REGION_223,
        r#"{"lambda":["1/2","1/2"]}"#,
    ]);
    assert_eq!(exit_code(&inside), 0);
    assert_eq!(stdout_json(&inside)["contains"], true);
}

#[test]
fn nmin_reproduces_the_three_file_walkthrough() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(example_region_json().as_bytes()).unwrap();
    let path = file.path().to_str().unwrap();

    let output = srr(&["nmin", path]);
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    let value = stdout_json(&output);
    assert_eq!(value["bounds"]["relaxation_optimum"], "19/4");
    assert_eq!(value["bounds"]["hyperplane_lp"], 5);
    assert_eq!(value["bounds"]["hyperplane_ilp"], 6);
    assert_eq!(value["bounds"]["best"], 6);
    assert_eq!(value["exact"]["size"], 6);
    assert_eq!(value["exact"]["allocations"].as_array().unwrap().len(), 3);
}

#[test]
fn nmin_env_node_budget_exits_three() {
    let output = srr_with_env(&["nmin", REGION_223], "SRR_NODE_LIMIT", "1");
    assert_eq!(exit_code(&output), 3);
    assert!(
        stderr_text(&output).contains("node limit 1 exceeded"),
        "{}",
        stderr_text(&output)
    );
}

#[test]
fn node_limit_flag_overrides_the_env() {
    let output = srr_with_env(
        &["nmin", REGION_223, "--node-limit", "1000000"],
        "SRR_NODE_LIMIT",
        "1",
    );
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    assert_eq!(stdout_json(&output)["exact"]["size"], 4);
}

#[test]
fn malformed_region_json_exits_two_and_names_the_problem() {
    let missing = r#"{"k":2,"T":[{"subset":[1],"value":2}]}"#;
    let output = srr(&["region", "gen-set", missing]);
    assert_eq!(exit_code(&output), 2);
    let err = stderr_text(&output);
    assert!(err.contains("subset"), "{err}");

    let bad_rate = srr(&["region", "contains", REGION_223, r#"{"lambda":[1,-1]}"#]);
    assert_eq!(exit_code(&bad_rate), 2);
    assert!(stderr_text(&bad_rate).contains("lambda"), "{}", stderr_text(&bad_rate));
}

#[test]
fn construct_k2_emits_a_certified_recipe() {
    let output = srr(&["construct", "k2", "2", "2", "3"]);
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    let value = stdout_json(&output);
    assert_eq!(value["recipe"]["size"], 4);
    assert_eq!(value["report"]["coverage"]["covered"], true);
    assert_eq!(value["report"]["certified_optimal"], true);
    assert_eq!(value["report"]["bounds"]["best"], 4);
}

#[test]
fn construct_rejects_an_impossible_sum_cap() {
    let output = srr(&["construct", "k2", "3", "3", "2"]);
    assert_eq!(exit_code(&output), 2);
    assert!(
        stderr_text(&output).contains("Sigma < max(X, Y)"),
        "{}",
        stderr_text(&output)
    );
}

#[test]
fn construct_simplex_covers_the_uniform_region() {
    let output = srr(&["construct", "simplex", "3", "1"]);
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    let value = stdout_json(&output);
    assert_eq!(value["recipe"]["size"], 7);
    assert_eq!(value["report"]["coverage"]["covered"], true);
    assert_eq!(value["report"]["certified_optimal"], true);
}

#[test]
fn check_covers_distinguishes_coverage() {
    let covering = r#"{"k":2,"n":{"1":2,"2":2}}"#;
    let output = srr(&["check", "covers", covering, REGION_223]);
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    assert_eq!(stdout_json(&output)["covered"], true);

    let small = r#"{"k":2,"n":{"1":1,"2":1,"3":1}}"#;
    let output = srr(&["check", "covers", small, REGION_223]);
    assert_eq!(exit_code(&output), 1);
    let value = stdout_json(&output);
    assert_eq!(value["covered"], false);
    let items = value["items"].as_array().unwrap();
    assert!(items.iter().any(|item| item["allocation"].is_null()));
}

#[test]
fn check_member_witness_re_verifies_after_the_round_trip() {
    let design_json = r#"{"k":2,"n":{"1":1,"2":1,"3":1}}"#;
    let demand_json = r#"{"lambda":["3/2","1/2"]}"#;
    let output = srr(&["check", "member", design_json, demand_json]);
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    let value = stdout_json(&output);
    assert_eq!(value["member"], true);

    let allocation: Allocation =
        serde_json::from_value(value["allocation"].clone()).expect("allocation parses back");
    let design: PointMultiset = serde_json::from_str(design_json).unwrap();
    let demand: Demand = serde_json::from_str(demand_json).unwrap();
    assert!(verify_allocation(&design, &demand, &allocation).unwrap());
}

#[test]
fn check_member_negative_exits_one() {
    let output = srr(&[
        "check",
        "member",
        r#"{"k":2,"n":{"1":1,"2":1,"3":1}}"#,
        r#"{"lambda":["3/2","3/2"]}"#,
    ]);
    assert_eq!(exit_code(&output), 1);
    let value = stdout_json(&output);
    assert_eq!(value["member"], false);
    assert!(value["allocation"].is_null());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(example_region_json().as_bytes()).unwrap();
    let path = file.path().to_str().unwrap();

    let first = srr(&["nmin", path]);
    let second = srr(&["nmin", path]);
    assert_eq!(exit_code(&first), 0);
    assert_eq!(first.stdout, second.stdout);

    let sweep_a = srr(&["sweep-k2", "--max", "2", "--format", "csv"]);
    let sweep_b = srr(&["sweep-k2", "--max", "2", "--format", "csv"]);
    assert_eq!(exit_code(&sweep_a), 0);
    assert_eq!(sweep_a.stdout, sweep_b.stdout);
}

#[test]
fn sweep_agrees_everywhere_and_counts_rows() {
    let output = srr(&["sweep-k2", "--max", "3"]);
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    let value = stdout_json(&output);
    assert_eq!(value["all_agree"], true);
    // One row per triple x, y <= 3, max(x,y) <= sigma <= x+y.
    assert_eq!(value["rows"].as_array().unwrap().len(), 30);
}

#[test]
fn format_flag_works_before_the_subcommand() {
    let output = srr(&["--format", "csv", "sweep-k2", "--max", "1"]);
    assert_eq!(exit_code(&output), 0);
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.starts_with("x,y,sigma,size,formula,nmin,averaging,covered,agrees"));
}

#[test]
fn vertices_csv_lists_the_pentagon_corners() {
    let output = srr(&["region", "vertices", REGION_223, "--format", "csv"]);
    assert_eq!(exit_code(&output), 0);
    let text = String::from_utf8_lossy(&output.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda_1,lambda_2");
    assert!(lines.contains(&"2,1"), "{text}");
    assert!(lines.contains(&"1,2"), "{text}");
    assert!(lines.contains(&"0,0"), "{text}");
}

#[test]
fn bounds_markdown_includes_the_inequality_walkthrough() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(example_region_json().as_bytes()).unwrap();
    let path = file.path().to_str().unwrap();

    let output = srr(&["bounds", path, "--format", "markdown"]);
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("- n_4 + n_5 + n_6 + n_7 >= 2"), "{text}");
    assert!(text.contains("- n_2 + n_3 + n_4 + n_5 >= 3"), "{text}");
    assert!(text.contains("- n_1 + n_2 + n_4 + n_7 >= 4"), "{text}");
    assert!(text.contains("| hyperplane ILP | 6 |"), "{text}");
    assert!(text.contains("| best | 6 |"), "{text}");
}

#[test]
fn bounds_json_re_parses_and_matches_the_markdown_verdict() {
    let output = srr(&["bounds", REGION_223, "--lp-only"]);
    assert_eq!(exit_code(&output), 0);
    let value = stdout_json(&output);
    assert_eq!(value["report"]["hyperplane_lp"], 4);
    assert!(value["report"]["hyperplane_ilp"].is_null());
    assert_eq!(value["inequalities"].as_array().unwrap().len(), 3);
}

#[test]
fn unsupported_format_combinations_fail_cleanly() {
    let output = srr(&[
        "check",
        "covers",
        r#"{"k":2,"n":{"1":1}}"#,
        REGION_223,
        "--format",
        "csv",
    ]);
    assert_eq!(exit_code(&output), 2);
    assert!(
        stderr_text(&output).contains("not supported"),
        "{}",
        stderr_text(&output)
    );
}

#[test]
fn unknown_flags_are_rejected() {
    let output = srr(&["region", "gen-set", REGION_223, "--bogus"]);
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn nmin_above_the_exact_cap_reports_bounds_with_a_notice() {
    // k = 5 exceeds the exact-minimum cap; closed-form bounds and the
    // notice still come back. LP-only keeps the run fast because the
    // hyperplane program needs the generating set.
    let caps: Vec<String> = (1u32..32)
        .map(|mask| {
            format!(
                "{{\"subset\":{:?},\"value\":{}}}",
                (1..=5).filter(|i| mask >> (i - 1) & 1 == 1).collect::<Vec<u32>>(),
                mask.count_ones()
            )
        })
        .collect();
    let region = format!("{{\"k\":5,\"T\":[{}]}}", caps.join(","));
    let output = srr(&["nmin", &region, "--lp-only"]);
    assert_eq!(exit_code(&output), 0, "{}", stderr_text(&output));
    let value = stdout_json(&output);
    assert!(value["exact"].is_null());
    assert!(value["notice"].as_str().unwrap().contains("skipped"));
    assert!(value["bounds"]["averaging"]["value"].as_u64().unwrap() >= 1);
}