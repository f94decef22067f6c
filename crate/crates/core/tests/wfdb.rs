use prealarm::wfdb::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn every_twelve_bit_pair_round_trips() {
    // all 4096 x 4096 pairs, one row of second samples at a time
    let firsts: Vec<i16> = (-2048..=2047).collect();
    for b in -2048..=2047_i16 {
        let mut v = Vec::with_capacity(2 * firsts.len());
        for &a in &firsts {
            v.push(a);
            v.push(b);
        }
        let bytes = encode_212(&v);
        assert_eq!(bytes.len(), 3 * firsts.len());
        assert_eq!(decode_212(&bytes, v.len()).unwrap(), v);
    }
}

#[test]
fn two_channel_interleave() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 1001;
    let a: Vec<i16> = (0..n).map(|_| rng.random_range(-2048..=2047)).collect();
    let b: Vec<i16> = (0..n).map(|_| rng.random_range(-2048..=2047)).collect();
    let inter: Vec<i16> = a.iter().zip(&b).flat_map(|(x, y)| [*x, *y]).collect();
    let (da, db) = decode_format212(&encode_212(&inter), n).unwrap();
    assert_eq!((da, db), (a, b));
}

#[test]
fn record_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let fs = 360.0;
    let ml: Vec<f64> = (0..5000).map(|i| ((i as f64) * 0.01).sin()).collect();
    let v5: Vec<f64> = (0..5000).map(|i| ((i as f64) * 0.02).cos() * 0.5).collect();
    let ann = vec![
        AnnotationEntry { sample_index: 100, symbol: 'N', aux: None },
        AnnotationEntry { sample_index: 400, symbol: 'V', aux: None },
        AnnotationEntry { sample_index: 700, symbol: '+', aux: Some("(N".into()) },
        AnnotationEntry { sample_index: 701, symbol: 'A', aux: None },
        AnnotationEntry { sample_index: 1000, symbol: 'Q', aux: None },
        AnnotationEntry { sample_index: 4900, symbol: 'F', aux: None },
    ];
    write_wfdb(dir.path(), "t1", fs, &[("MLII", &ml), ("V5", &v5)], 200.0, &ann).unwrap();
    let rec = load_wfdb(dir.path(), "t1", "atr", &AamiMap::default()).unwrap();
    assert_eq!(rec.sampling_rate(), fs);
    assert_eq!(rec.num_samples(), 5000);
    assert_eq!(rec.select_channel("V5"), 1);
    for (orig, got) in [&ml, &v5].iter().zip(&rec.signals) {
        let err = orig.iter().zip(got).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 0.5 / 200.0 + 1e-12, "quantization error {err}");
    }
    let syms: Vec<char> = rec.annotations.iter().map(|a| a.symbol).collect();
    assert_eq!(syms, vec!['N', 'V', 'A', 'Q', 'F']);
    assert_eq!(rec.stats.non_beat, 1);
    assert!(rec.annotations[3].is_discarded());
}

#[test]
fn missing_record_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(load_wfdb(dir.path(), "nope", "atr", &AamiMap::default()).is_err());
}
