//! McNemar's test on reference discordant counts, with the sensitivity
//! variants alongside.
//!
//!     cargo run --example mcnemar_table

use madre::eval::report::mcnemar_table;
use madre::eval::{mcnemar_with, ContingencyTable, McNemarVariant};

fn main() {
    let tables = [
        ("MAD (n=0) vs Baseline", ContingencyTable::discordant(71, 15)),
        ("MAD (n=1) vs Baseline", ContingencyTable::discordant(75, 14)),
        ("balanced", ContingencyTable::discordant(5, 5)),
    ];
    for variant in [
        McNemarVariant::ContinuityCorrected,
        McNemarVariant::Uncorrected,
        McNemarVariant::ExactBinomial,
    ] {
        println!("{variant:?}");
        let results: Vec<_> = tables.iter().map(|(_, t)| mcnemar_with(t, variant)).collect();
        let rows: Vec<_> = tables.iter().zip(&results).map(|((n, t), r)| (*n, t, r)).collect();
        println!("{}", mcnemar_table(&rows));
    }
}
