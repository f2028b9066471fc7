use mwk_core::premodule::verify::{verify_rule, VerifyConfig, ALL_RULES};

fn main() {
    let cfg = VerifyConfig { samples: 8, seed: 42, field: mwk_core::fields::FieldDesc::rational(5, 1) };
    for rule in ALL_RULES {
        let r = verify_rule(rule, &cfg);
        println!("{}: {}", rule, if r.passed() { "pass".into() } else { format!("FAIL {:?}", &r.failures[..r.failures.len().min(2)]) });
    }
}
