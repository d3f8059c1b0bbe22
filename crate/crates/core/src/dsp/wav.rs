//! WAV I/O restricted to 16 kHz mono 16-bit PCM.

use std::io::{Read, Seek, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::SAMPLE_RATE;

fn spec() -> hound::WavSpec {
    hound::WavSpec {
        channels: 1,
        sample_rate: SAMPLE_RATE as u32,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    }
}

fn check(spec: &hound::WavSpec) -> Result<()> {
    let mut problems = Vec::new();
    if spec.channels != 1 {
        problems.push(format!("{} channels (need mono)", spec.channels));
    }
    if spec.sample_rate != SAMPLE_RATE as u32 {
        problems.push(format!("{} Hz (need {SAMPLE_RATE} Hz)", spec.sample_rate));
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        problems.push(format!(
            "{}-bit {:?} samples (need 16-bit integer PCM)",
            spec.bits_per_sample, spec.sample_format
        ));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::UnsupportedWav(problems.join(", ")))
    }
}

pub fn read_wav_from<R: Read>(reader: R) -> Result<Vec<i16>> {
    let mut r = hound::WavReader::new(reader)?;
    check(&r.spec())?;
    r.samples::<i16>().map(|s| s.map_err(Error::from)).collect()
}

pub fn read_wav<P: AsRef<Path>>(path: P) -> Result<Vec<i16>> {
    read_wav_from(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn write_wav_to<W: Write + Seek>(writer: W, samples: &[i16]) -> Result<()> {
    let mut w = hound::WavWriter::new(writer, spec())?;
    for &s in samples {
        w.write_sample(s)?;
    }
    w.finalize()?;
    Ok(())
}

pub fn write_wav<P: AsRef<Path>>(path: P, samples: &[i16]) -> Result<()> {
    write_wav_to(std::io::BufWriter::new(std::fs::File::create(path)?), samples)
}

/// Rounds and saturates real samples to 16-bit PCM.
pub fn to_pcm(samples: &[f32]) -> Vec<i16> {
    samples
        .iter()
        .map(|&x| if x.is_nan() { 0 } else { x.round().clamp(-32768.0, 32767.0) as i16 })
        .collect()
}
