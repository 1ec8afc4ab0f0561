//! Shared between the determinism tests and the acceptance suite.
#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

pub fn inputs(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../inputs").join(name);
    p.to_str().expect("utf-8 path").to_string()
}

/// stdout and exit code of one run.
pub fn run(args: &[String]) -> (Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_sepkit"))
        .args(args)
        .env_remove("SEPKIT_BUDGET")
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code())
}

pub fn args(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

pub fn commands() -> Vec<Vec<String>> {
    let mut all = vec![
        args(&["separate", "--group", "f2", "--subgroup", "aa,b a B", "--element", "a", "--element", "b"]),
        args(&["separate", "--group", "f2", "--subgroup", "aa,b", "--element", "a", "--format", "dot"]),
        args(&["chabauty", "approx", "--group", "f2", "--subgroup", "aa,b a B", "--radius", "2"]),
        args(&["chabauty", "approx", "--group", "f2", "--subgroup", "ab", "--radius", "2", "--method", "joint-separation", "--format", "dot"]),
        args(&["orbit", "--action", &inputs("trivial_f2.json"), "--point", "3"]),
        args(&["orbit", "--action", &inputs("cosets_a_f2.json"), "--point", "0", "--budget", "100"]),
        args(&["amen", "folner-check", "--action", &inputs("shift_z.json"), "--set", "0,1,2,3", "--omega", "a", "--epsilon", "1"]),
        args(&["amen", "folner-search", "--action", &inputs("affine_bs2.json"), "--point", "0", "--omega", "s,t", "--epsilon", "1/2"]),
        args(&[
            "amen", "combine", "--sigma", &inputs("z_two_copies_01.json"), "--tau", &inputs("z_two_copies_10.json"),
            "--point", "0", "--epsilon", "1/2", "--s", "a", "--t", "a", "--a", "0,1",
        ]),
        args(&["bs-witness", "--n", "2", "--dmax", "4"]),
        args(&["amen", "bs-witness", "--n", "3", "--dmax", "4"]),
        args(&["suite", "separation", "--cases", "200", "--seed", "11", "--jobs", "4"]),
        args(&["suite", "folner", "--cases", "100", "--seed", "11", "--jobs", "3"]),
    ];
    for s in ["schedule_f2_finite_orbits.json", "schedule_finf_transitivity.json", "schedule_zz_amenable.json"] {
        all.push(args(&["generic", "run", "--schedule", &inputs(s)]));
    }
    all
}

