use clap::Parser;
use feynhand::cli::{self, JobSpec};
use feynhand::units::DEFAULT_PX_PER_CM;
use std::path::PathBuf;

/// Compile Feynman-diagram DSL sources (.fh) to SVG.
#[derive(Parser, Debug)]
#[command(name = "feynhand", version, about)]
struct Args {
    /// Input source files
    #[arg(required = true, value_name = "FILE")]
    inputs: Vec<PathBuf>,

    /// Output directory for generated SVGs
    #[arg(long, value_name = "DIR", default_value = "graphics/fh")]
    out: PathBuf,

    /// Pixels per centimeter in the generated SVGs
    #[arg(long, value_name = "N", default_value_t = DEFAULT_PX_PER_CM)]
    ppc: f64,

    /// Regenerate outputs even when the content hash is unchanged
    #[arg(long)]
    force_remake: bool,

    /// Override the output name stem
    #[arg(long, value_name = "NAME")]
    name: Option<String>,

    /// Parse and resolve only; write nothing
    #[arg(long)]
    check: bool,
}

fn main() {
    let args = Args::parse();
    let spec = JobSpec {
        inputs: args.inputs,
        out_dir: args.out,
        ppc: args.ppc,
        force_remake: args.force_remake,
        name_override: args.name,
        check_only: args.check,
    };
    std::process::exit(cli::run(&spec));
}
