//! Cost rows for reference token counts under the example price file.
//!
//!     cargo run --example cost_report

use std::time::Duration;

use madre::eval::report::cost_table;
use madre::eval::UsageReport;
use madre::llm::{PriceTable, Usage};

fn main() -> anyhow::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/prices.example.toml");
    let prices = PriceTable::from_toml(&std::fs::read_to_string(path)?)?;
    let hours = |h: f64| Some(Duration::from_secs_f64(h * 3600.0));

    let baseline = UsageReport::from_usage(621, Usage::new(152_145, 8_694), &prices, hours(1.9));
    let n0 = UsageReport::from_usage(621, Usage::new(1_068_517, 453_126), &prices, hours(6.4));
    let n1 = UsageReport::from_usage(621, Usage::new(2_137_034, 906_252), &prices, hours(12.8));
    print!(
        "{}",
        cost_table(&[("Baseline", &baseline), ("MAD (n=0)", &n0), ("MAD (n=1)", &n1)])
    );
    if n1.looks_doubled_from(&n0) {
        println!("note: MAD (n=1) token counts are exactly twice MAD (n=0)");
    }
    Ok(())
}
