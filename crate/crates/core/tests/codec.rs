use jscc_core::catalog::CATALOG;
use jscc_core::codec::{
    encode_source, encode_source_traditional, CodecError, LiftedCode, DEFAULT_MAX_FILLERS,
};
use jscc_core::lifting::{lift, QcMatrix, DEFAULT_ATTEMPTS};
use jscc_core::{JointCode, Orientation, Protomatrix, TriangularLink};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Syndrome straight from the shift grid, one circulant at a time.
fn syndrome_oracle(qc: &QcMatrix, x: &[u8]) -> Vec<u8> {
    let z = qc.z2();
    let mut syn = vec![0u8; qc.rows() * z];
    for r in 0..qc.rows() {
        for c in 0..qc.cols() {
            if let Some(h) = qc.shift(r, c) {
                for i in 0..z {
                    syn[r * z + i] ^= x[c * z + (i + h) % z];
                }
            }
        }
    }
    syn
}

fn random_source(rng: &mut ChaCha8Rng, n: usize, p1: f64) -> Vec<u8> {
    (0..n).map(|_| rng.gen_bool(p1) as u8).collect()
}

#[test]
fn every_fixture_encodes_to_a_codeword() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for entry in CATALOG.iter() {
        let code = entry.code();
        let lifted =
            LiftedCode::build(&code, 4, 50, 1, DEFAULT_ATTEMPTS, DEFAULT_MAX_FILLERS, 10).unwrap();
        for _ in 0..40 {
            // dense sources exercise more of the graph than p1 would
            let mut s = random_source(&mut rng, lifted.qc().source_len(), 0.5);
            lifted.conform_source(&mut s);
            let cw = lifted.encode(&s).unwrap();
            let syn = syndrome_oracle(lifted.qc(), &cw.joint());
            assert!(syn.iter().all(|&b| b == 0), "{}", entry.id);
        }
    }
}

#[test]
fn triangular_encoder_matches_parallel_encoder_for_identity_links() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ids = [
        "example1_orig",
        "example2_j3",
        "example2_j4",
        "example3_org",
    ];
    let mut trials = 0;
    for id in ids {
        let code = jscc_core::catalog::find(id).unwrap().code();
        assert!(code.link().is_identity());
        let qc = lift(&code, 4, 30, 2, 50).unwrap();
        for _ in 0..300 {
            let s = random_source(&mut rng, qc.source_len(), 0.3);
            assert_eq!(
                encode_source(&s, &qc).unwrap(),
                encode_source_traditional(&s, &qc).unwrap()
            );
            trials += 1;
        }
    }
    assert!(trials >= 1000);
}

#[test]
fn linked_source_encoding_satisfies_source_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for id in ["example1_opt1", "example2_j4_opt3", "example3_opt"] {
        let code = jscc_core::catalog::find(id).unwrap().code();
        let qc = lift(&code, 4, 40, 1, 50).unwrap();
        let ms = qc.layout().m_s * qc.z1() * qc.z2();
        for _ in 0..50 {
            let s = random_source(&mut rng, qc.source_len(), 0.5);
            let u = encode_source(&s, &qc).unwrap();
            let mut x = s.clone();
            x.extend(vec![0u8; qc.parity_len()]);
            x.extend(&u);
            let syn = syndrome_oracle(&qc, &x);
            assert!(syn[..ms].iter().all(|&b| b == 0), "{id}");
        }
    }
}

#[test]
fn zero_source_gives_zero_codeword() {
    let code = jscc_core::catalog::find("example2_j3_opt2").unwrap().code();
    let lifted = LiftedCode::build(&code, 4, 20, 1, 50, DEFAULT_MAX_FILLERS, 10).unwrap();
    let cw = lifted.encode(&vec![0; lifted.qc().source_len()]).unwrap();
    assert!(cw.joint().iter().all(|&b| b == 0));
}

fn singular_toy() -> (JointCode, QcMatrix) {
    let code = JointCode::new(
        Protomatrix::from_rows(&[[1u32, 1]]).unwrap(),
        Protomatrix::from_rows(&[[1u32, 1, 1], [1, 1, 1]]).unwrap(),
        TriangularLink::identity(1, Orientation::Lower),
        [],
        0.1,
    )
    .unwrap();
    // both parity columns use shift 0 everywhere, so H_p = [I I; I I]
    let shifts = vec![
        vec![0, 0, -1, -1, 0],
        vec![-1, -1, 0, 0, 0],
        vec![-1, -1, 0, 0, 1],
    ];
    let qc = QcMatrix::from_shifts(code.layout(), 1, 3, 0, shifts).unwrap();
    (code, qc)
}

#[test]
fn rank_deficient_parity_part_is_reported() {
    let (code, qc) = singular_toy();
    let lifted = LiftedCode::new(code, qc).unwrap();
    assert_eq!(lifted.channel_encoder().deficiency(), 3);
    assert!(!lifted.fillers().is_empty());
    let s = vec![1, 0, 0, 0, 0, 0];
    match lifted.encode(&s) {
        Err(CodecError::Singular { deficiency }) => assert_eq!(deficiency, 3),
        other => panic!("expected a singular error, got {other:?}"),
    }
    // conforming the source makes it encodable
    let mut s = s;
    lifted.conform_source(&mut s);
    let cw = lifted.encode(&s).unwrap();
    assert!(syndrome_oracle(lifted.qc(), &cw.joint())
        .iter()
        .all(|&b| b == 0));
}

#[test]
fn length_errors() {
    let code = jscc_core::catalog::find("example1_orig").unwrap().code();
    let lifted = LiftedCode::build(&code, 4, 10, 1, 50, DEFAULT_MAX_FILLERS, 10).unwrap();
    assert!(matches!(
        lifted.encode(&[0, 1]),
        Err(CodecError::Length { what: "source", .. })
    ));
}

#[test]
fn noiseless_frames_decode_without_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for id in ["example1_opt1", "example3_opt"] {
        let code = jscc_core::catalog::find(id).unwrap().code();
        let lifted = LiftedCode::build(&code, 4, 40, 1, 50, DEFAULT_MAX_FILLERS, 10).unwrap();
        let mut dec = lifted.decoder::<f64>();
        for _ in 0..10 {
            let mut s = random_source(&mut rng, lifted.qc().source_len(), code.p1());
            lifted.conform_source(&mut s);
            let cw = lifted.encode(&s).unwrap();
            let x: Vec<f64> = lifted.modulate(&cw);
            assert_eq!(x.len(), lifted.positions().len());
            let out = dec.decode(&lifted.llr(&x, 20.0), 50);
            assert!(out.converged);
            assert_eq!(lifted.source_errors(&s, &out.bits[..s.len()]), 0);
        }
    }
}

#[test]
fn noiseless_decoding_needs_at_most_two_iterations() {
    let code = jscc_core::catalog::find("example2_j3_opt1").unwrap().code();
    let lifted = LiftedCode::build(&code, 4, 30, 1, 50, DEFAULT_MAX_FILLERS, 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut s = random_source(&mut rng, lifted.qc().source_len(), code.p1());
    lifted.conform_source(&mut s);
    let cw = lifted.encode(&s).unwrap();
    let x: Vec<f64> = lifted.modulate(&cw);
    let out = lifted.decoder::<f64>().decode(&lifted.llr(&x, 40.0), 50);
    assert!(
        out.converged && out.iterations <= 2,
        "{} iterations",
        out.iterations
    );
    assert_eq!(&out.bits[..s.len()], &s[..]);
}

#[test]
fn single_flipped_channel_bit_is_corrected() {
    let code = jscc_core::catalog::find("example1_opt1").unwrap().code();
    let lifted = LiftedCode::build(&code, 4, 30, 1, 50, DEFAULT_MAX_FILLERS, 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut s = random_source(&mut rng, lifted.qc().source_len(), code.p1());
    lifted.conform_source(&mut s);
    let cw = lifted.encode(&s).unwrap();
    let mut y: Vec<f64> = lifted.modulate(&cw);
    y[7] = -y[7];
    let out = lifted.decoder::<f64>().decode(&lifted.llr(&y, 3.0), 50);
    assert!(out.converged);
    assert_eq!(lifted.source_errors(&s, &out.bits[..s.len()]), 0);
    assert_eq!(&out.bits[..], &cw.joint()[..]);
}
