use nuhuncc::adversary::{self, LeakageInstance};
use nuhuncc::is_codec::{CodeParams, Codebook};
use nuhuncc::polar::{self, PolarParams, ProfileMethod};
use nuhuncc::{BitMatrix, BitVector};

#[test]
fn leakage_within_bound_on_small_systems() {
    for (n, ell, w, k_s, p) in [(2, 4, 2, 1, 0.11), (2, 5, 2, 1, 0.3), (4, 4, 1, 1, 0.2)] {
        let prof = polar::entropy_profile(&PolarParams::new(n, p, 0.25), ProfileMethod::Exact).unwrap();
        let cb = Codebook::generate(&CodeParams::new(ell, w, k_s, 1.0, 3)).unwrap();
        let inst = LeakageInstance { profile: &prof, codebook: &cb, w, t: 1.0 };
        let rep = adversary::leakage_exact(&inst, &[0]).unwrap();
        assert!(rep.max_distance <= rep.bound, "{rep:?}");
        assert!(rep.max_distance <= 2.0 && rep.mean_distance <= rep.max_distance + 1e-12);
    }
}

#[test]
fn blind_eavesdropper_learns_nothing() {
    let prof = polar::entropy_profile(&PolarParams::new(2, 0.11, 0.25), ProfileMethod::Exact).unwrap();
    let cb = Codebook::generate(&CodeParams::new(4, 0, 2, 1.0, 1)).unwrap();
    let inst = LeakageInstance { profile: &prof, codebook: &cb, w: 0, t: 1.0 };
    assert_eq!(adversary::leakage_exact(&inst, &[0, 1]).unwrap().max_distance, 0.0);
}

#[test]
fn observation_selects_rows() {
    let x = BitMatrix::from_rows(&[BitVector::from_bits(&[1, 0]), BitVector::from_bits(&[0, 1]), BitVector::from_bits(&[1, 1])], 2).unwrap();
    let z = adversary::it_eve_observe(&x, &[2, 0]).unwrap();
    assert_eq!(z.row(0), x.row(2));
    assert_eq!(z.row(1), x.row(0));
    assert!(adversary::it_eve_observe(&x, &[0, 1, 2]).is_err());
}

#[test]
fn advantage_ratio_is_antisymmetric() {
    for (b1, pm, b2, pn) in [(3.0, 0.2, 5.0, 0.1), (1.0, 0.5, 1.0, 0.5), (7.0, 0.01, 0.0, 0.3)] {
        let a = adversary::advantage_ratio(b1, pm, b2, pn);
        let b = adversary::advantage_ratio(b2, pn, b1, pm);
        assert!((a + b).abs() < 1e-15);
        assert!(a.abs() <= 1.0);
    }
    assert_eq!(adversary::advantage_ratio(0.0, 0.1, 0.0, 0.1), 0.0);
}

#[test]
fn bound_shrinks_in_every_argument() {
    let b = |n, kw, ell, c, d| adversary::advantage_bound(n, 0.25, kw, ell, 1.0, c, d);
    assert!(b(1 << 16, 12, 16, 8, 2.0) < b(16, 12, 16, 8, 2.0));
    assert!(b(16, 12, 32, 8, 2.0) < b(16, 12, 16, 8, 2.0));
    assert!(b(16, 12, 16, 16, 2.0) < b(16, 12, 16, 8, 2.0));
    assert!(b(16, 12, 16, 8, 3.0) < b(16, 12, 16, 8, 2.0));
}

#[test]
fn zeta_spans_zero_to_half() {
    assert_eq!(adversary::zeta_of_delta(0.0).unwrap(), 0.0);
    assert!((adversary::zeta_of_delta(1.0).unwrap() - 0.5).abs() < 1e-15);
    let (hi, lo) = adversary::codeword_probability_bounds(0.1, 3);
    assert!((hi - 0.6f64.powi(3)).abs() < 1e-15 && (lo - 0.4f64.powi(3)).abs() < 1e-15);
    assert!(adversary::zeta_of_delta(1.5).is_err());
}

#[test]
fn column_marginal_matches_enumeration() {
    let (n, p) = (8usize, 0.11f64);
    let g = polar::materialize_gn(n).unwrap();
    let mut marg = vec![0.0; n];
    for word in 0..1u64 << n {
        let v = BitVector::from_uint(word, n);
        let ones = v.count_ones() as i32;
        let pr = p.powi(ones) * (1.0 - p).powi(n as i32 - ones);
        let a = g.left_mul(&v).unwrap();
        for (j, m) in marg.iter_mut().enumerate() {
            if a.get(j) {
                *m += pr;
            }
        }
    }
    for (j, want) in marg.iter().enumerate() {
        assert!((adversary::column_marginal(n, p, j) - want).abs() < 1e-12, "column {j}");
    }
}

#[test]
fn empty_observation_keeps_whole_bins() {
    let cb = Codebook::generate(&CodeParams::new(8, 0, 3, 1.0, 2)).unwrap();
    let (a, b) = adversary::filter_bins(&cb, &[], &BitVector::zeros(0), 1, 6).unwrap();
    assert_eq!((a.len(), b.len()), (cb.bin_size(), cb.bin_size()));
    let x = cb.word(1, 5);
    let coords: Vec<usize> = (0..8).collect();
    let (a, _) = adversary::filter_bins(&cb, &coords, &BitVector::from_uint(x as u64, 8), 1, 6).unwrap();
    assert!(a.contains(&5));
}
