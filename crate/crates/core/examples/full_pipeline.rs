// Configure and run every stage on a synthetic corpus, writing the report
// bundle to a temporary directory.

use spectroscopy::pipeline::{execute, Command, PipelineConfig, RunOptions, CONFIG_TEMPLATE};

fn main() -> spectroscopy::Result<()> {
    let mut config = PipelineConfig::from_toml(CONFIG_TEMPLATE)?;
    config.counterfactual.replicas = 100;
    config.counterfactual.seed = 42;
    config.output.dir = std::env::temp_dir().join("spectroscopy-example-bundle");
    config.validate()?;

    let summary = execute(&config, Command::Run, &RunOptions { workers: Some(2) })?;
    println!(
        "{} files in {}",
        summary.files.len(),
        summary.out_dir.display()
    );
    let pools = std::fs::read_to_string(summary.out_dir.join("pools.csv"))?;
    print!("{pools}");
    let consistency = std::fs::read_to_string(summary.out_dir.join("consistency.csv"))?;
    for line in consistency.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
