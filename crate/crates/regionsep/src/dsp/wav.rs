//! Multichannel WAV read/write, PCM16 and float32, 16 kHz enforced.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use ndarray::Array2;

use super::{MultichannelAudio, SAMPLE_RATE};
use crate::error::{Error, Result};

/// Read a WAV file into a multichannel block. Rejects anything that is not
/// 16 kHz PCM16 or float32.
pub fn read_wav(path: impl AsRef<Path>) -> Result<MultichannelAudio> {
    let mut reader = WavReader::open(path.as_ref())?;
    let spec = reader.spec();
    if spec.sample_rate != SAMPLE_RATE {
        return Err(Error::BadSampleRate {
            expected: SAMPLE_RATE,
            got: spec.sample_rate,
        });
    }
    let channels = spec.channels as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()?,
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()?,
        (fmt, bits) => {
            return Err(Error::Wav(format!(
                "unsupported sample format {fmt:?} / {bits} bits"
            )))
        }
    };
    let frames = interleaved.len() / channels;
    let mut samples = Array2::zeros((frames, channels));
    for t in 0..frames {
        for ch in 0..channels {
            samples[[t, ch]] = interleaved[t * channels + ch];
        }
    }
    MultichannelAudio::new(samples, spec.sample_rate)
}

/// Write a multichannel block as a float32 WAV.
pub fn write_wav_f32(path: impl AsRef<Path>, audio: &MultichannelAudio) -> Result<()> {
    let spec = WavSpec {
        channels: audio.num_channels() as u16,
        sample_rate: audio.sample_rate(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path.as_ref(), spec)?;
    for t in 0..audio.num_samples() {
        for ch in 0..audio.num_channels() {
            writer.write_sample(audio.samples()[[t, ch]] as f32)?;
        }
    }
    writer.finalize()?;
    Ok(())
}

/// Write a multichannel block as PCM16, clipping to full scale.
pub fn write_wav_pcm16(path: impl AsRef<Path>, audio: &MultichannelAudio) -> Result<()> {
    let spec = WavSpec {
        channels: audio.num_channels() as u16,
        sample_rate: audio.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path.as_ref(), spec)?;
    for t in 0..audio.num_samples() {
        for ch in 0..audio.num_channels() {
            let v = (audio.samples()[[t, ch]] * 32768.0)
                .round()
                .clamp(-32768.0, 32767.0) as i16;
            writer.write_sample(v)?;
        }
    }
    writer.finalize()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn f32_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let chans: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..1000).map(|_| rng.gen_range(-0.9..0.9)).collect())
            .collect();
        let audio = MultichannelAudio::from_channels(chans, SAMPLE_RATE).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        write_wav_f32(&path, &audio).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.num_channels(), 3);
        assert_eq!(back.num_samples(), 1000);
        for (a, b) in audio.samples().iter().zip(back.samples().iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn pcm16_round_trip_within_quantization() {
        let audio = MultichannelAudio::from_mono(
            (0..500).map(|i| (i as f64 / 100.0).sin() * 0.5).collect(),
            SAMPLE_RATE,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        write_wav_pcm16(&path, &audio).unwrap();
        let back = read_wav(&path).unwrap();
        for (a, b) in audio.samples().iter().zip(back.samples().iter()) {
            assert!((a - b).abs() < 1.0 / 32768.0 + 1e-9);
        }
    }

    #[test]
    fn non_16k_is_rejected() {
        let audio = MultichannelAudio::from_mono(vec![0.0; 100], 48000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        write_wav_f32(&path, &audio).unwrap();
        assert!(matches!(
            read_wav(&path),
            Err(Error::BadSampleRate { got: 48000, .. })
        ));
    }
}
