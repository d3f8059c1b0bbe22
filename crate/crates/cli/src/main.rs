//! `lpcnet`: command-line front end for the codec.
//!
//! Messages go to stderr, data only to the named output files.
//! Exit status: 0 success, 1 runtime error (bad input, I/O), 2 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lpcnet_codec::bitstream::{parse_stream, write_stream, Packet, PACKET_BYTES};
use lpcnet_codec::codec::{analyze, Encoder, FeatureDecoder, Decoder, STREAM_OFFSET};
use lpcnet_codec::dsp::wav::{read_wav, to_pcm, write_wav};
use lpcnet_codec::features::{parse_features, write_features};
use lpcnet_codec::model::io::{load_model, save_model};
use lpcnet_codec::model::{count_weights, count_weights_exact, generate_random_model, gflops, DensitySpec, ModelDims, ModelWeights};
use lpcnet_codec::quant::vq::DEFAULT_M_BEST;
use lpcnet_codec::quant::Codebooks;
use lpcnet_codec::synth::{synthesize, Model};
use lpcnet_codec::train::{train_codebooks, DEFAULT_ITERATIONS};
use lpcnet_codec::{FeatureFrame, FRAME_SIZE, PACKET_SIZE, SAMPLE_RATE};

#[derive(Parser)]
#[command(name = "lpcnet", version, about = "1.6 kb/s neural speech codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// WAV to bitstream.
    Encode(EncodeArgs),
    /// Bitstream to WAV.
    Decode(DecodeArgs),
    /// WAV to a feature file (unquantized unless --quantized).
    Features(FeaturesArgs),
    /// Feature file to WAV.
    Synth(SynthArgs),
    /// Train codebooks from a feature file.
    TrainCodebooks(TrainArgs),
    /// Write deterministic random codebooks.
    GenerateCodebooks(GenerateCodebooksArgs),
    /// Write a seeded random model.
    GenerateModel(GenerateModelArgs),
    /// Print model dimensions, densities and complexity.
    ModelInfo(ModelInfoArgs),
    /// Time synthesis and print complexity figures.
    Bench(BenchArgs),
    /// Dump the pitch track of a WAV as CSV.
    PitchDebug(PitchDebugArgs),
}

#[derive(Args)]
struct CodebookOpt {
    /// Codebook file; defaults to the generated tables for seed 0.
    #[arg(long, value_name = "FILE")]
    codebooks: Option<PathBuf>,
}

#[derive(Args)]
struct ModelOpt {
    /// Model weight file.
    #[arg(long, env = "LPCNET_MODEL", value_name = "FILE")]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct StreamFormat {
    /// Bitstream as concatenated 8-byte packets (the default).
    #[arg(long, conflicts_with = "hex")]
    raw: bool,
    /// Bitstream as hex text, one packet per line.
    #[arg(long)]
    hex: bool,
}

#[derive(Args)]
struct EncodeArgs {
    input: PathBuf,
    output: PathBuf,
    #[command(flatten)]
    codebooks: CodebookOpt,
    #[command(flatten)]
    format: StreamFormat,
    /// Survivors kept per stage in the cepstral VQ search.
    #[arg(long, default_value_t = DEFAULT_M_BEST as u32, value_parser = clap::value_parser!(u32).range(1..=1024))]
    m_best: u32,
}

#[derive(Args)]
struct DecodeArgs {
    input: PathBuf,
    output: PathBuf,
    #[command(flatten)]
    model: ModelOpt,
    #[command(flatten)]
    codebooks: CodebookOpt,
    #[command(flatten)]
    format: StreamFormat,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FeaturesArgs {
    input: PathBuf,
    output: PathBuf,
    /// Dump the features the decoder reconstructs from the bitstream.
    #[arg(long)]
    quantized: bool,
    #[command(flatten)]
    codebooks: CodebookOpt,
}

#[derive(Args)]
struct SynthArgs {
    input: PathBuf,
    output: PathBuf,
    #[command(flatten)]
    model: ModelOpt,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iterations: usize,
}

#[derive(Args)]
struct GenerateCodebooksArgs {
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DimsOpt {
    #[arg(long, default_value_t = ModelDims::default().n_a)]
    n_a: usize,
    #[arg(long, default_value_t = ModelDims::default().n_b)]
    n_b: usize,
    #[arg(long, default_value_t = ModelDims::default().embed_dim)]
    embed_dim: usize,
    #[arg(long, default_value_t = ModelDims::default().frame_hidden)]
    frame_hidden: usize,
    #[arg(long, default_value_t = ModelDims::default().cond_dim)]
    cond_dim: usize,
}

impl DimsOpt {
    fn dims(&self) -> ModelDims {
        ModelDims {
            n_a: self.n_a,
            n_b: self.n_b,
            embed_dim: self.embed_dim,
            frame_hidden: self.frame_hidden,
            cond_dim: self.cond_dim,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct GenerateModelArgs {
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    dims: DimsOpt,
    /// Block density of the update and reset gate matrices.
    #[arg(long, default_value_t = DensitySpec::default().update)]
    gate_density: f64,
    /// Block density of the candidate matrix.
    #[arg(long, default_value_t = DensitySpec::default().candidate)]
    candidate_density: f64,
}

#[derive(Args)]
struct ModelInfoArgs {
    /// Weight file (falls back to LPCNET_MODEL).
    #[arg(env = "LPCNET_MODEL")]
    model: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    model: ModelOpt,
    /// Use a generated model with this seed instead of a file.
    #[arg(long, conflicts_with = "model")]
    random: Option<u64>,
    /// Seconds of audio to synthesize.
    #[arg(long, default_value_t = 1.0)]
    seconds: f64,
}

#[derive(Args)]
struct PitchDebugArgs {
    input: PathBuf,
    /// CSV output file.
    output: PathBuf,
}

fn load_codebooks(opt: &CodebookOpt) -> Result<Arc<Codebooks>> {
    Ok(Arc::new(match &opt.codebooks {
        Some(p) => Codebooks::load(p).with_context(|| format!("loading codebooks {}", p.display()))?,
        None => Codebooks::generate(0),
    }))
}

fn load_model_arc(opt: &ModelOpt) -> Result<Arc<Model>> {
    let Some(path) = &opt.model else {
        bail!("no model given: pass --model FILE or set LPCNET_MODEL (a test model can be made with `lpcnet generate-model`)");
    };
    let weights = load_model(path).with_context(|| format!("loading model {}", path.display()))?;
    Ok(Arc::new(Model::new(weights)?))
}

fn read_input_wav(path: &Path) -> Result<Vec<i16>> {
    read_wav(path).with_context(|| format!("reading {}", path.display()))
}

fn read_stream(path: &Path, format: &StreamFormat) -> Result<Vec<Packet>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if !format.hex {
        return parse_stream(&bytes).with_context(|| format!("parsing {}", path.display()));
    }
    let text = String::from_utf8(bytes).context("hex bitstream is not text")?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            let l = l.trim();
            let ok = l.len() == 2 * PACKET_BYTES && l.bytes().all(|b| b.is_ascii_hexdigit());
            if !ok {
                bail!("line {}: expected {} hex digits, found {l:?}", n + 1, 2 * PACKET_BYTES);
            }
            let v = u64::from_str_radix(l, 16).expect("validated hex");
            Ok(Packet(v.to_be_bytes()))
        })
        .collect()
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn encode(a: EncodeArgs) -> Result<()> {
    let mut pcm = read_input_wav(&a.input)?;
    let samples = pcm.len();
    // flush: the last input sample must still reach a decoded frame
    let padded = (samples + STREAM_OFFSET).div_ceil(PACKET_SIZE) * PACKET_SIZE;
    pcm.resize(padded, 0);
    let mut enc = Encoder::with_m_best(load_codebooks(&a.codebooks)?, a.m_best as usize);
    let packets = enc.encode_all(&pcm)?;
    let data = if a.format.hex {
        packets.iter().map(|p| format!("{:016x}\n", u64::from_be_bytes(p.0))).collect::<String>().into_bytes()
    } else {
        write_stream(&packets)
    };
    write_output(&a.output, &data)?;
    eprintln!(
        "{} samples -> {} packets, {} bytes ({} b/s)",
        samples,
        packets.len(),
        PACKET_BYTES * packets.len(),
        PACKET_BYTES * 8 * SAMPLE_RATE / PACKET_SIZE
    );
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let packets = read_stream(&a.input, &a.format)?;
    let mut dec = Decoder::new(load_model_arc(&a.model)?, load_codebooks(&a.codebooks)?, a.seed);
    let mut out = Vec::with_capacity(packets.len() * PACKET_SIZE);
    for p in &packets {
        out.extend(dec.decode_packet(Some(p)));
    }
    // drop the decoder's lead-in so output lines up with the encoder input
    let pcm = out.get(STREAM_OFFSET..).unwrap_or_default();
    write_wav(&a.output, pcm).with_context(|| format!("writing {}", a.output.display()))?;
    eprintln!("{} packets -> {} samples", packets.len(), pcm.len());
    Ok(())
}

fn features(a: FeaturesArgs) -> Result<()> {
    let pcm = read_input_wav(&a.input)?;
    let frames: Vec<FeatureFrame> = if a.quantized {
        let cb = load_codebooks(&a.codebooks)?;
        let mut padded = pcm.clone();
        padded.resize(pcm.len().div_ceil(PACKET_SIZE) * PACKET_SIZE, 0);
        let packets = Encoder::new(cb.clone()).encode_all(&padded)?;
        let mut fd = FeatureDecoder::new(cb);
        packets.iter().flat_map(|p| fd.decode(Some(p))).collect()
    } else {
        if a.codebooks.codebooks.is_some() {
            bail!("--codebooks only applies with --quantized");
        }
        analyze(&pcm)
    };
    let mut buf = Vec::new();
    write_features(&mut buf, &frames)?;
    write_output(&a.output, &buf)?;
    eprintln!("{} samples -> {} frames", pcm.len(), frames.len());
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let bytes = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let frames = parse_features(&bytes).with_context(|| format!("parsing {}", a.input.display()))?;
    let model = load_model_arc(&a.model)?;
    let pcm = to_pcm(&synthesize(model, &frames, a.seed));
    write_wav(&a.output, &pcm).with_context(|| format!("writing {}", a.output.display()))?;
    eprintln!("{} frames -> {} samples", frames.len(), pcm.len());
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let bytes = fs::read(&a.features).with_context(|| format!("reading {}", a.features.display()))?;
    let frames = parse_features(&bytes)?;
    let (cb, report) = train_codebooks(&frames, a.iterations, a.seed)?;
    cb.save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!("trained on {} frames", frames.len());
    for (i, d) in report.anchor_stage_distortion.iter().enumerate() {
        eprintln!("  anchor stage {}: distortion {d:.5}", i + 1);
    }
    eprintln!("  delta average: distortion {:.5}", report.delta_avg_distortion);
    eprintln!("  delta single: distortion {:.5}", report.delta_single_distortion);
    Ok(())
}

fn generate_codebooks(a: GenerateCodebooksArgs) -> Result<()> {
    Codebooks::generate(a.seed).save(&a.out).with_context(|| format!("writing {}", a.out.display()))
}

fn generate_model(a: GenerateModelArgs) -> Result<()> {
    let density = DensitySpec { update: a.gate_density, reset: a.gate_density, candidate: a.candidate_density };
    let w = generate_random_model(a.seed, a.dims.dims(), density)?;
    save_model(&w, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!("wrote {} ({} weights)", a.out.display(), w.count_weights_actual());
    Ok(())
}

fn complexity_report(w: &ModelWeights, out: &mut impl Write) -> std::io::Result<()> {
    let d = &w.dims;
    let gates = w.gru_a_rec.gates();
    let density = gates.iter().map(|g| g.block_count()).sum::<usize>() as f64
        / gates.iter().map(|g| g.total_blocks()).sum::<usize>() as f64;
    let formula = count_weights(d.n_a, density, d.n_b, d.q);
    let actual = w.count_weights_actual();
    writeln!(out, "n_a {}  n_b {}  q {}  embed {}  features {}  frame_hidden {}  cond {}",
        d.n_a, d.n_b, d.q, d.embed_dim, d.feature_dim, d.frame_hidden, d.cond_dim)?;
    for (name, g) in ["update", "reset", "candidate"].iter().zip(gates) {
        writeln!(out, "{name:>9} gate: {}/{} blocks, density {:.4}", g.block_count(), g.total_blocks(), g.density())?;
    }
    writeln!(out, "mean density {density:.4}")?;
    writeln!(out, "weights per sample: {formula} (formula, {:.1}), {actual} stored", count_weights_exact(d.n_a, density, d.n_b, d.q))?;
    writeln!(out, "complexity: {:.3} GFLOPS", gflops(formula as f64))
}

fn model_info(a: ModelInfoArgs) -> Result<()> {
    let w = load_model(&a.model).with_context(|| format!("loading model {}", a.model.display()))?;
    complexity_report(&w, &mut std::io::stderr())?;
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    if !(a.seconds > 0.0 && a.seconds.is_finite()) {
        bail!("--seconds must be positive");
    }
    let model = match a.random {
        Some(seed) => Arc::new(Model::new(generate_random_model(seed, ModelDims::default(), DensitySpec::default())?)?),
        None => load_model_arc(&a.model)?,
    };
    let n = ((a.seconds * SAMPLE_RATE as f64) as usize).div_ceil(FRAME_SIZE).max(1);
    let frames: Vec<FeatureFrame> = (0..n)
        .map(|i| {
            let mut f = FeatureFrame { period: 100.0 + 20.0 * (i as f64 * 0.1).sin(), correlation: 0.8, ..Default::default() };
            f.cepstrum[0] = 8.0;
            f.cepstrum[1] = 1.0;
            f
        })
        .collect();
    let t = Instant::now();
    let out = synthesize(model.clone(), &frames, 0);
    let secs = t.elapsed().as_secs_f64();
    let mut err = std::io::stderr();
    complexity_report(&model.weights, &mut err)?;
    writeln!(err, "synthesized {} samples in {secs:.3} s: {:.0} samples/s, {:.3}x real time",
        out.len(), out.len() as f64 / secs, out.len() as f64 / SAMPLE_RATE as f64 / secs)?;
    Ok(())
}

fn pitch_debug(a: PitchDebugArgs) -> Result<()> {
    let mut pcm = read_input_wav(&a.input)?;
    pcm.resize(pcm.len().div_ceil(PACKET_SIZE) * PACKET_SIZE, 0);
    let mut enc = Encoder::new(Arc::new(Codebooks::generate(0)));
    let mut csv = String::from("packet,subframe,lag,r,w,J\n");
    for (k, chunk) in pcm.chunks_exact(PACKET_SIZE).enumerate() {
        let t = enc.encode_packet_full(chunk)?.track;
        for i in 0..t.lags.len() {
            csv += &format!("{k},{i},{},{:.6},{:.6},{:.6}\n", t.lags[i], t.correlations[i], t.weights[i], t.scores[i]);
        }
    }
    write_output(&a.output, csv.as_bytes())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Features(a) => features(a),
        Command::Synth(a) => synth(a),
        Command::TrainCodebooks(a) => train(a),
        Command::GenerateCodebooks(a) => generate_codebooks(a),
        Command::GenerateModel(a) => generate_model(a),
        Command::ModelInfo(a) => model_info(a),
        Command::Bench(a) => bench(a),
        Command::PitchDebug(a) => pitch_debug(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
