use std::collections::HashSet;

use super::*;
use crate::codec::{Bits, ToneComposition};

fn all_codewords(cfg: &BlockConfig) -> Vec<Bits> {
    let book = cfg.codebook().unwrap();
    (0..book.codeword_count())
        .map(|v| Bits::from_value(v, book.bits()))
        .collect()
}

#[test]
fn ideal_channel_delivers_every_codeword() {
    let cfg = BlockConfig::ideal(11);
    let words = all_codewords(&cfg);
    assert_eq!(words.len(), 16);
    for (k, bits) in words.iter().enumerate() {
        let t = run_block(&cfg.with_seed(k as u64), bits).unwrap();
        assert_eq!(t.verdict, Verdict::Delivered, "codeword {bits}");
        assert_eq!(t.decoded_bits.as_ref(), Some(bits));
        assert!(t.round_trip_ok());
        assert_eq!(t.n1, cfg.n2);
        assert_eq!(t.forward_check.qber(), Some(0.0));
        assert_eq!(t.backward_check.as_ref().unwrap().qber(), Some(0.0));
    }
}

#[test]
fn operating_point_stream_holds_about_eighty_photons() {
    let cfg = BlockConfig::operating_point(0);
    let bits: Bits = "1010".parse().unwrap();
    let runs = 60;
    let mut total = 0usize;
    let mut delivered = 0;
    for s in 0..runs {
        let t = run_block(&cfg.with_seed(s), &bits).unwrap();
        total += t.stream.len();
        delivered += usize::from(t.round_trip_ok());
        assert_eq!(t.decoded_bits.as_ref().map(Bits::len).unwrap_or(4), 4);
    }
    // Expected 78.7 per block, sd about 8.
    let mean = total as f64 / runs as f64;
    assert!((mean - 78.7).abs() < 4.0, "mean stream length {mean}");
    assert!(delivered >= runs as usize - 1, "delivered {delivered}/{runs}");
}

#[test]
fn intercept_resend_is_caught_forward() {
    let mut cfg = BlockConfig::ideal(5);
    cfg.eavesdropper = Eavesdropper::InterceptResendForward;
    cfg.error_threshold = 0.1;
    let t = run_block(&cfg, &"0110".parse().unwrap()).unwrap();
    let r = t.forward_check.result.unwrap();
    // About 2500 same-basis samples: sd of the QBER is under 0.01.
    assert!(r.sampled > 2000, "{r:?}");
    assert!((r.qber - 0.25).abs() < 0.03, "{r:?}");
    assert_eq!(t.verdict, Verdict::AbortedForward);
    assert!(t.backward_check.is_none());
    assert!(t.stream.is_empty());
}

#[test]
fn flipping_every_returning_photon_is_caught_backward() {
    let mut cfg = BlockConfig::ideal(6);
    cfg.eavesdropper = Eavesdropper::FlipBackward;
    let t = run_block(&cfg, &"0001".parse().unwrap()).unwrap();
    assert_eq!(t.forward_check.qber(), Some(0.0));
    assert_eq!(t.backward_check.unwrap().qber(), Some(1.0));
    assert_eq!(t.verdict, Verdict::AbortedBackward);
}

#[test]
fn backward_only_noise_shows_in_backward_check() {
    let mut cfg = BlockConfig::ideal(8);
    cfg.channel.error_rate = 0.02;
    cfg.noise = NoiseLegs::Backward;
    let t = run_block(&cfg, &"1100".parse().unwrap()).unwrap();
    assert_eq!(t.forward_check.qber(), Some(0.0));
    let back = t.backward_check.unwrap().result.unwrap();
    assert_eq!(back.sampled, 2500);
    assert!((back.qber - 0.02).abs() < 0.01, "{back:?}");
}

#[test]
fn forward_only_noise_leaves_backward_clean() {
    let mut cfg = BlockConfig::ideal(9);
    cfg.channel.error_rate = 0.02;
    cfg.noise = NoiseLegs::Forward;
    let t = run_block(&cfg, &"1100".parse().unwrap()).unwrap();
    let fwd = t.forward_check.qber().unwrap();
    assert!((fwd - 0.02).abs() < 0.01, "{fwd}");
    assert_eq!(t.backward_check.unwrap().qber(), Some(0.0));
}

#[test]
fn photon_roles_partition_the_received_set() {
    for seed in 0..10 {
        let cfg = BlockConfig::operating_point(seed);
        let t = run_block(&cfg, &"0111".parse().unwrap()).unwrap();
        let Some(back) = &t.backward_check else {
            continue;
        };
        let fwd: HashSet<usize> = t.forward_check.positions.iter().copied().collect();
        let bck: HashSet<usize> = back.positions.iter().copied().collect();
        let enc: HashSet<usize> = t.encoding_positions.iter().copied().collect();
        assert_eq!(fwd.len() + bck.len() + enc.len(), t.n1);
        assert!(fwd.is_disjoint(&bck) && fwd.is_disjoint(&enc) && bck.is_disjoint(&enc));
        assert!(fwd.len() == (0.5 * t.n1 as f64).ceil() as usize);
        assert!(t.n1 <= t.n2);

        let c = cfg.check_fraction();
        let bound = (1.0 - c) * (1.0 - c) * t.n1 as f64;
        assert!(t.encoded as f64 <= bound + 1e-9, "{} > {bound}", t.encoded);
        assert!(t.stream.len() <= t.encoded);
        for r in t.stream.records() {
            let slot = (r.arrival_s * cfg.channel.f_rep_hz).round() as usize;
            assert!(enc.contains(&slot));
        }
    }
}

#[test]
fn encoding_happens_only_after_a_passed_forward_check() {
    let cfg = BlockConfig::ideal(3);
    let t = run_block(&cfg, &"0000".parse().unwrap()).unwrap();
    let names: Vec<&str> = t
        .events
        .iter()
        .map(|e| match e {
            ProtocolEvent::Prepared { .. } => "prepared",
            ProtocolEvent::ForwardTransmitted { .. } => "forward",
            ProtocolEvent::ForwardChecked { .. } => "forward_check",
            ProtocolEvent::Encoded { .. } => "encoded",
            ProtocolEvent::BackwardTransmitted { .. } => "backward",
            ProtocolEvent::BackwardChecked { .. } => "backward_check",
            ProtocolEvent::Decoded { .. } => "decoded",
        })
        .collect();
    assert_eq!(
        names,
        [
            "prepared",
            "forward",
            "forward_check",
            "encoded",
            "backward",
            "backward_check",
            "decoded"
        ]
    );
    assert_eq!(t.events[2], ProtocolEvent::ForwardChecked { pass: true });

    let mut eve = cfg.clone();
    eve.eavesdropper = Eavesdropper::InterceptResendForward;
    let t = run_block(&eve, &"0000".parse().unwrap()).unwrap();
    assert_eq!(t.events.len(), 3);
    assert_eq!(t.events[2], ProtocolEvent::ForwardChecked { pass: false });
    assert!(t.encoding_positions.is_empty());
}

#[test]
fn zero_photons_abort_forward_without_a_check() {
    let mut cfg = BlockConfig::operating_point(1);
    cfg.channel.alpha_db_per_km = 1e6;
    cfg.channel.l1_km = 1.0;
    cfg.channel.l2_km = 1.0;
    let t = run_block(&cfg, &"0000".parse().unwrap()).unwrap();
    assert_eq!(t.n1, 0);
    assert!(t.forward_check.result.is_none());
    assert_eq!(t.verdict, Verdict::AbortedForward);
}

#[test]
fn blocks_replay_bit_identically() {
    let cfg = BlockConfig::operating_point(77);
    let bits: Bits = "1001".parse().unwrap();
    let a = run_block(&cfg, &bits).unwrap();
    let b = run_block(&cfg, &bits).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let c = run_block(&cfg.with_seed(78), &bits).unwrap();
    assert_ne!(a.stream, c.stream);
}

#[test]
fn transcript_json_has_no_private_offsets() {
    let t = run_block(&BlockConfig::ideal(2), &"0101".parse().unwrap()).unwrap();
    let json = serde_json::to_string(&t).unwrap();
    assert!(!json.contains("offset"));
    for key in ["\"n1\"", "\"forward_check\"", "\"backward_check\"", "\"stream\"", "\"verdict\""] {
        assert!(json.contains(key), "{key}");
    }
}

fn two_tone_config(composition: ToneComposition) -> BlockConfig {
    let mut cfg = BlockConfig::ideal(4);
    cfg.grid = crate::codec::FrequencyGrid::new(1e3, 5e3, 1e3).unwrap();
    cfg.tones = 2;
    cfg.composition = composition;
    cfg.n2 = 1000;
    cfg.t_span_s = 1e-3;
    cfg.channel.f_rep_hz = 1e6;
    cfg
}

#[test]
fn explicit_tones_need_not_form_a_codeword() {
    let cfg = two_tone_config(ToneComposition::Interleave);
    // {4 kHz, 5 kHz} has rank 9, beyond the eight codewords.
    let t = run_block_with_tones(&cfg, &[5e3, 4e3]).unwrap();
    assert!(t.message_bits.is_none());
    assert_eq!(t.sent_tones, vec![4e3, 5e3]);
    assert!(t.tones_recovered(), "{:?}", t.decoded_tones);
    assert_eq!(t.verdict, Verdict::DecodeFailed);
}

#[test]
fn interleaved_two_tone_codewords_round_trip() {
    let cfg = two_tone_config(ToneComposition::Interleave);
    for (k, bits) in all_codewords(&cfg).iter().enumerate() {
        let t = run_block(&cfg.with_seed(k as u64), bits).unwrap();
        assert!(t.round_trip_ok(), "{bits}: {:?}", t.decoded_tones);
    }
}

#[test]
fn xor_of_two_tones_peaks_at_their_difference() {
    let cfg = two_tone_config(ToneComposition::Xor);
    let t = run_block_with_tones(&cfg, &[4e3, 5e3]).unwrap();
    let peak = t.spectrum.as_ref().unwrap().argmax_channel().unwrap();
    assert_eq!(peak.frequency_hz, 1e3);
    assert!(!t.tones_recovered());
}

#[test]
fn invalid_configs_are_rejected_with_their_key() {
    let key = |cfg: BlockConfig| match cfg.validate() {
        Err(ProtocolError::InvalidConfig { key, .. }) => key.to_string(),
        Err(ProtocolError::Channel(crate::channel::ChannelError::Invalid { key, .. })) => {
            key.to_string()
        }
        other => format!("{other:?}"),
    };
    let mut c = BlockConfig::operating_point(0);
    c.n2 = 0;
    assert_eq!(key(c), "n2");
    let mut c = BlockConfig::operating_point(0);
    c.error_threshold = 0.001;
    assert_eq!(key(c), "error_threshold");
    let mut c = BlockConfig::operating_point(0);
    c.channel.check_fraction = 0.0;
    assert_eq!(key(c), "check_fraction");
    let mut c = BlockConfig::operating_point(0);
    c.n2 = 20_000;
    assert_eq!(key(c), "n2");
    let mut c = BlockConfig::operating_point(0);
    c.snr_threshold = 0.5;
    assert_eq!(key(c), "snr_threshold");
    assert!(run_block(&BlockConfig::ideal(0), &"101".parse().unwrap()).is_err());
}

#[test]
fn kilobyte_session_over_ideal_channel() {
    let cfg = BlockConfig::ideal(2024);
    let message: Vec<u8> = (0..1024u32).map(|i| (i * 37 % 251) as u8).collect();
    let report = run_session(&cfg, &message, SessionOptions::default()).unwrap();
    assert!(report.is_delivered());
    assert_eq!(report.blocks, 2048);
    assert_eq!(report.blocks_sent, 2048);
    assert_eq!(report.bit_errors, 0);
    assert_eq!(report.throughput_bps, 4000.0);
    assert_eq!(report.decoded_message().unwrap(), message);
}

#[test]
fn empty_message_is_trivially_delivered() {
    let report = run_session(&BlockConfig::operating_point(0), b"", SessionOptions::default())
        .unwrap();
    assert!(report.is_delivered());
    assert_eq!((report.blocks, report.blocks_sent), (0, 0));
    assert_eq!(report.decoded_message().unwrap(), Vec::<u8>::new());
}

#[test]
fn sessions_replay_and_report_aborts() {
    let cfg = BlockConfig::operating_point(99);
    let opts = SessionOptions {
        keep_transcripts: true,
        ..SessionOptions::default()
    };
    let a = run_session(&cfg, b"hi", opts).unwrap();
    let b = run_session(&cfg, b"hi", opts).unwrap();
    assert_eq!(a, b);
    assert!(a.is_delivered(), "{:?}", a.status);
    assert_eq!(a.decoded_message().unwrap(), b"hi");
    assert_eq!(a.transcripts.len(), a.blocks_sent);

    let mut eve = cfg.clone();
    eve.eavesdropper = Eavesdropper::FlipBackward;
    let r = run_session(&eve, b"hi", SessionOptions::default()).unwrap();
    assert_eq!(
        r.status,
        SessionStatus::Aborted {
            block: 0,
            verdict: Verdict::AbortedBackward
        }
    );
    assert!(r.decoded_message().is_none());
}

#[test]
fn zero_capacity_codebook_cannot_carry_a_message() {
    let mut cfg = BlockConfig::ideal(0);
    cfg.tones = 16;
    assert_eq!(
        run_session(&cfg, b"x", SessionOptions::default()),
        Err(ProtocolError::NoCapacity)
    );
}
