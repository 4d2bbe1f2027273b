//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on a codec or I/O error, 2 on a usage
//! error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tlxs::base::{BaseConfig, BaseHeader, BaseTarget};
use tlxs::container::{decode_base_only, demux, HEADER_LEN};
use tlxs::corpus::{lena, synthetic, SyntheticKind};
use tlxs::image::{bits_per_pixel, load_pnm, mse, psnr, store_pnm};
use tlxs::pipeline::{bench_sweep, decode_two_layer, encode_two_layer, to_csv};
use tlxs::residual::{extension_info, LosslessCoderId};

#[derive(Parser)]
#[command(name = "tlxs", version, about = "Two-layer lossless image codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a PNM image into a layered file.
    Encode(EncodeArgs),
    /// Decode a layered file to the original image.
    Decode(IoArgs),
    /// Decode only the base layer.
    DecodeBase(IoArgs),
    /// Print the headers of a layered file.
    Inspect { file: PathBuf },
    /// Compare two PNM images.
    Metrics {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Coded file whose size gives the bit rate.
        #[arg(long)]
        coded: Option<PathBuf>,
    },
    /// Sweep base rates and lossless coders, writing CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
#[group(id = "layer", multiple = false)]
struct LayerChoice {
    /// Base-layer rate in bits per pixel [default: 2.0].
    #[arg(long)]
    bpp: Option<f64>,
    /// Code the image losslessly without a base layer.
    #[arg(long)]
    no_base: bool,
    /// Quantization step 1 in every base band.
    #[arg(long)]
    lossless_base: bool,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    layer: LayerChoice,
    #[arg(long, default_value = "predictive", value_parser = parse_coder)]
    coder: LosslessCoderId,
    #[arg(long, default_value_t = 5)]
    levels_h: u8,
    #[arg(long, default_value_t = 2)]
    levels_v: u8,
}

#[derive(Args)]
struct IoArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// PNM image to sweep; the bundled natural image when omitted.
    #[arg(long, conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// Sweep a generated image instead.
    #[arg(long, value_parser = parse_kind)]
    synthetic: Option<SyntheticKind>,
    #[arg(long, default_value_t = 256, requires = "synthetic")]
    size: usize,
    #[arg(long, default_value_t = 8, requires = "synthetic")]
    depth: u8,
    /// Comma-separated base rates; 0 is the point without a base layer.
    #[arg(long, default_value = "0,0.25,0.5,1,2,4,8", value_delimiter = ',')]
    grid: Vec<f64>,
    #[arg(long, default_value = "predictive,wavelet", value_delimiter = ',', value_parser = parse_coder)]
    coders: Vec<LosslessCoderId>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5)]
    levels_h: u8,
    #[arg(long, default_value_t = 2)]
    levels_v: u8,
}

fn parse_coder(s: &str) -> std::result::Result<LosslessCoderId, String> {
    s.parse().map_err(|e: tlxs::Error| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<SyntheticKind, String> {
    s.parse().map_err(|e: tlxs::Error| e.to_string())
}

/// Raised for argument problems clap cannot see; maps to exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn distinct(input: &Path, output: &Path) -> Result<()> {
    let same = match (fs::canonicalize(input), fs::canonicalize(output)) {
        (Ok(a), Ok(b)) => a == b,
        _ => input == output,
    };
    if same {
        return Err(Usage(format!(
            "output {} would overwrite the input",
            output.display()
        ))
        .into());
    }
    Ok(())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn encode(args: &EncodeArgs) -> Result<()> {
    distinct(&args.input, &args.output)?;
    let image =
        load_pnm(&args.input).with_context(|| format!("loading {}", args.input.display()))?;
    let config = if args.layer.no_base {
        None
    } else {
        let target = if args.layer.lossless_base {
            BaseTarget::Lossless
        } else {
            BaseTarget::Bpp(args.layer.bpp.unwrap_or(2.0))
        };
        let config = BaseConfig {
            levels_h: args.levels_h,
            levels_v: args.levels_v,
            target,
            ..BaseConfig::default()
        };
        config.validate().map_err(|e| Usage(e.to_string()))?;
        Some(config)
    };
    let encoded = encode_two_layer(&image, config.as_ref(), args.coder)?;
    fs::write(&args.output, &encoded.file)
        .with_context(|| format!("writing {}", args.output.display()))?;
    let bpp = |bytes| bits_per_pixel(bytes, image.width(), image.height());
    println!(
        "base {:.4} bpp, extension {:.4} bpp, total {:.4} bpp",
        bpp(encoded.base_len)?,
        bpp(encoded.ext_len)?,
        bpp(encoded.file.len())?
    );
    Ok(())
}

fn decode(args: &IoArgs) -> Result<()> {
    distinct(&args.input, &args.output)?;
    let decoded = decode_two_layer(&read(&args.input)?)?;
    store_pnm(&decoded.image, &args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    println!("lossless: {}", decoded.lossless);
    Ok(())
}

fn decode_base(args: &IoArgs) -> Result<()> {
    distinct(&args.input, &args.output)?;
    let image = decode_base_only(&read(&args.input)?)?;
    store_pnm(&image, &args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    println!(
        "base layer: {}x{}, {} bits",
        image.width(),
        image.height(),
        image.bit_depth()
    );
    Ok(())
}

fn inspect(path: &Path) -> Result<()> {
    let file = read(path)?;
    let layered = demux(&file)?;
    let meta = layered.meta;
    println!("magic: TLXS");
    println!("version: 1");
    println!("width: {}", meta.width);
    println!("height: {}", meta.height);
    println!("components: {}", meta.components);
    println!("bit_depth: {}", meta.bit_depth);
    println!(
        "coder: {}",
        meta.coder.map_or("none", LosslessCoderId::name)
    );
    println!("header: {HEADER_LEN} bytes");
    println!("total: {} bytes", file.len());
    if layered.has_base() {
        let header = BaseHeader::parse(layered.base)?;
        println!(
            "base: {} bytes, levels {}/{}",
            layered.base.len(),
            header.levels_h,
            header.levels_v
        );
        for (c, bands) in header.bands.iter().enumerate() {
            for band in bands {
                println!(
                    "  c{c} {}{} {}x{}: step {} k {} mode {:?} bits {}",
                    band.info.orientation.name(),
                    band.info.level,
                    band.info.width,
                    band.info.height,
                    band.step,
                    band.k,
                    band.mode,
                    band.bit_len
                );
            }
        }
    } else {
        println!("base: absent");
    }
    if layered.has_extension() {
        let (coder, depth) = extension_info(layered.extension)?;
        println!(
            "extension: {} bytes, {coder}, depth {depth}",
            layered.extension.len()
        );
    } else {
        println!("extension: absent");
    }
    Ok(())
}

fn metrics(reference: &Path, test: &Path, coded: Option<&Path>) -> Result<()> {
    let a = load_pnm(reference).with_context(|| format!("loading {}", reference.display()))?;
    let b = load_pnm(test).with_context(|| format!("loading {}", test.display()))?;
    println!("mse: {:.6}", mse(&a, &b)?);
    println!("psnr: {:.4} dB", psnr(&a, &b)?);
    println!("identical: {}", a == b);
    if let Some(path) = coded {
        let len = fs::metadata(path)
            .with_context(|| format!("reading {}", path.display()))?
            .len();
        println!(
            "bpp: {:.4}",
            bits_per_pixel(len as usize, a.width(), a.height())?
        );
    }
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let image = match (&args.input, args.synthetic) {
        (Some(path), _) => load_pnm(path).with_context(|| format!("loading {}", path.display()))?,
        (None, Some(kind)) => synthetic(kind, args.size, args.size, args.depth, 1, 0)
            .map_err(|e| Usage(e.to_string()))?,
        (None, None) => lena(),
    };
    if let Some(input) = &args.input {
        distinct(input, &args.out)?;
    }
    let template = BaseConfig {
        levels_h: args.levels_h,
        levels_v: args.levels_v,
        ..BaseConfig::default()
    };
    let rows = bench_sweep(&image, &args.grid, &args.coders, &template).map_err(|e| match e {
        tlxs::Error::InvalidConfig(msg) => anyhow::Error::new(Usage(msg)),
        other => other.into(),
    })?;
    fs::write(&args.out, to_csv(&rows))
        .with_context(|| format!("writing {}", args.out.display()))?;
    let lossless = rows.iter().filter(|r| r.lossless).count();
    println!(
        "{} rows, {lossless} lossless, written to {}",
        rows.len(),
        args.out.display()
    );
    if lossless != rows.len() {
        bail!("{} rows were not lossless", rows.len() - lossless);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode(args) => encode(&args),
        Command::Decode(args) => decode(&args),
        Command::DecodeBase(args) => decode_base(&args),
        Command::Inspect { file } => inspect(&file),
        Command::Metrics {
            reference,
            test,
            coded,
        } => metrics(&reference, &test, coded.as_deref()),
        Command::Bench(args) => bench(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
