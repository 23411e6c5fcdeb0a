//! Parse a debate config, report every violation, and show who speaks to whom.
//!
//!     cargo run --example debate_config

use madre::model::{parse_debate_config, recipients, speaking_schedule, validate_config};

const CONFIG: &str = r#"
rounds = 2
agreement = "majority_vote"
topology = { kind = "structured", edges = [
    { from = "alice", to = "bob" },
    { from = "bob", to = "carol" },
    { from = "carol", to = "alice" },
] }
protocol = { kind = "sequential", order = ["carol", "alice", "bob"] }
format = { kind = "verbatim" }

[task]
labels = ["F", "NF"]
user_prompt = "Requirement: {input}"

[[participants]]
name = "alice"
role = "debater"
system_prompt = "You are {name}, {stance}."
persona = { background = "a test engineer", stance = { argue_for = "F" } }

[[participants]]
name = "bob"
role = "debater"
system_prompt = "You are {name}, {stance}."
persona = { stance = "critic" }

[[participants]]
name = "carol"
role = "debater"
system_prompt = "You are {name}."
"#;

fn main() -> anyhow::Result<()> {
    let config = parse_debate_config(CONFIG)?;
    assert!(validate_config(&config).is_empty());
    println!("fingerprint {}", config.fingerprint());

    for p in &config.participants {
        println!("{:>6}: {}", p.name, p.rendered_system_prompt());
    }
    for round in 0..=config.rounds {
        let phases = speaking_schedule(&config, round)?;
        println!("round {round}: {phases:?}");
    }
    for name in config.debaters() {
        println!("{name} -> {:?}", recipients(&config, name, 0)?);
    }

    // the same debate with a judge rule but no judge, and a stray stance label
    let broken = CONFIG
        .replace("majority_vote", "judge_decision")
        .replace("argue_for = \"F\"", "argue_for = \"X\"");
    for v in validate_config(&parse_debate_config(&broken)?) {
        println!("violation {}: {}", v.code, v.message);
    }
    Ok(())
}
