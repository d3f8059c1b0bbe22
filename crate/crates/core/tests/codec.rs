mod common;

use std::sync::Arc;

use lpcnet_codec::bitstream::{parse_stream, write_stream, Packet};
use lpcnet_codec::codec::{Decoder, Encoder, FeatureDecoder};
use lpcnet_codec::model::{generate_random_model, DensitySpec, ModelDims};
use lpcnet_codec::quant::Codebooks;
use lpcnet_codec::synth::Model;
use lpcnet_codec::PACKET_SIZE;

fn codebooks() -> Arc<Codebooks> {
    Arc::new(Codebooks::generate(0))
}

fn small_model() -> Arc<Model> {
    let dims = ModelDims { n_a: 32, n_b: 8, embed_dim: 8, frame_hidden: 16, cond_dim: 16, ..Default::default() };
    Arc::new(Model::new(generate_random_model(2, dims, DensitySpec::uniform(0.3)).unwrap()).unwrap())
}

#[test]
fn packet_count_follows_duration() {
    let cb = codebooks();
    for samples in [0, 639, 640, 6399, 6400, 16000] {
        let pcm = common::speechlike(samples, 1);
        let packets = Encoder::new(cb.clone()).encode_all(&pcm).unwrap();
        assert_eq!(packets.len(), samples / PACKET_SIZE);
        assert_eq!(write_stream(&packets).len(), 8 * packets.len());
    }
}

#[test]
fn decoding_gives_640_samples_per_packet_and_is_seeded() {
    let cb = codebooks();
    let m = small_model();
    let pcm = common::speechlike(6400, 3);
    let packets = Encoder::new(cb.clone()).encode_all(&pcm).unwrap();
    let run = |seed| {
        let mut d = Decoder::new(m.clone(), cb.clone(), seed);
        packets.iter().flat_map(|p| {
            let out = d.decode_packet(Some(p));
            assert_eq!(out.len(), PACKET_SIZE);
            out
        }).collect::<Vec<i16>>()
    };
    assert_eq!(run(1), run(1));
    assert_ne!(run(1), run(2));
}

#[test]
fn all_zero_and_all_one_packets_decode() {
    let mut d = Decoder::new(small_model(), codebooks(), 0);
    for p in [Packet([0; 8]), Packet([0xff; 8])] {
        let out = d.decode_packet_f32(Some(&p));
        assert_eq!(out.len(), PACKET_SIZE);
        assert!(out.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn encoder_anchor_tracks_decoder() {
    let cb = codebooks();
    let pcm = common::speechlike(64_000, 4);
    let mut enc = Encoder::new(cb.clone());
    let mut dec = FeatureDecoder::new(cb);
    for chunk in pcm.chunks_exact(PACKET_SIZE) {
        let p = enc.encode_packet(chunk).unwrap();
        dec.decode(Some(&p));
        assert_eq!(enc.anchor(), dec.anchor());
    }
}

/// One lost packet disturbs at most the next packet's features.
#[test]
fn single_loss_resynchronizes() {
    let cb = codebooks();
    let pcm = common::speechlike(16 * PACKET_SIZE, 5);
    let packets = Encoder::new(cb.clone()).encode_all(&pcm).unwrap();
    let clean: Vec<_> = {
        let mut d = FeatureDecoder::new(cb.clone());
        packets.iter().map(|p| d.decode(Some(p))).collect()
    };
    for lost in 1..packets.len() - 2 {
        let mut d = FeatureDecoder::new(cb.clone());
        for (k, p) in packets.iter().enumerate() {
            let got = d.decode(if k == lost { None } else { Some(p) });
            if k < lost || k >= lost + 2 {
                assert_eq!(got, clean[k], "lost {lost}, packet {k}");
            }
            if k == lost + 1 {
                // the anchor comes from the packet's own bits
                assert_eq!(got[3], clean[k][3]);
            }
        }
    }
}

#[test]
fn stream_bytes_roundtrip() {
    let pcm = common::speechlike(3200, 6);
    let packets = Encoder::new(codebooks()).encode_all(&pcm).unwrap();
    let bytes = write_stream(&packets);
    assert_eq!(parse_stream(&bytes).unwrap(), packets);
    assert!(parse_stream(&bytes[..bytes.len() - 1]).is_err());
}
