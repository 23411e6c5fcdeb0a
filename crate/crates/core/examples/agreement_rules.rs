//! The vote-based agreement rules on a handful of ballots.
//!
//!     cargo run --example agreement_rules

use madre::engine::{average, majority_vote, weighted_vote, Vote};

fn main() {
    let labels = vec!["F".to_string(), "NF".to_string()];

    let ballots = [Vote::label("a", "NF"), Vote::label("b", "F"), Vote::label("c", "NF")];
    println!("majority: {:?}", majority_vote(&ballots, &labels));

    // a tie is reported, and the declared label order breaks it
    let tied = [Vote::label("a", "NF"), Vote::label("b", "F")];
    let tally = majority_vote(&tied, &labels).unwrap();
    println!("tie: winner {} (tied: {:?})", tally.winner, tally.tied);

    // one confident voter can outweigh two hesitant ones
    let weighted = [
        Vote::weighted("a", "F", 0.95),
        Vote::weighted("b", "NF", 0.4),
        Vote::weighted("c", "NF", 0.4),
    ];
    println!("weighted: {:?}", weighted_vote(&weighted, &labels));

    let estimates = [Vote::number("a", 3.0), Vote::number("b", 4.5), Vote::number("c", 6.0)];
    println!("average: {:?}", average(&estimates));
}
