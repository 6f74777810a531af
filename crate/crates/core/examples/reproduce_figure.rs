//! Regenerates one figure or table and writes its artifacts.
//!
//!     cargo run --release --example reproduce_figure -- fig2c [seed]

use std::path::Path;

use muxent::config::Overrides;
use muxent::reproduce::{reproduce, ReproduceOptions, Target};

fn main() -> muxent::Result<()> {
    let mut args = std::env::args().skip(1);
    let target: Target = args.next().unwrap_or_else(|| "table_a1".into()).parse()?;
    let seed = args.next().and_then(|s| s.parse().ok());
    let opts = ReproduceOptions {
        preset: None,
        layers: vec![],
        overrides: Overrides { seed, ..Default::default() },
        output_dir: "muxent-out".into(),
    };
    let report = reproduce(target, &opts)?;
    print!("{}", report.summary_text());
    for p in report.write(Path::new(&opts.output_dir))? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
