use adaptive_bitvec::oracle::NaiveBits;
use adaptive_bitvec::{AdaptiveBitvector, Error, Event};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// One random operation applied to both sides; returns whether it was an update.
fn step(rng: &mut ChaCha8Rng, q: u32, b: &mut AdaptiveBitvector, o: &mut NaiveBits) -> bool {
    let n = o.len();
    if rng.gen_ratio(1, q) {
        match rng.gen_range(0..3) {
            0 => {
                let i = rng.gen_range(1..=n + 1);
                let v = rng.gen_bool(0.5);
                b.insert(i, v).unwrap();
                o.insert(i, v).unwrap();
            }
            1 if n > 0 => {
                let i = rng.gen_range(1..=n);
                assert_eq!(b.delete(i), o.delete(i));
            }
            _ if n > 0 => {
                let i = rng.gen_range(1..=n);
                let v = rng.gen_bool(0.5);
                assert_eq!(b.write(i, v), o.write(i, v));
            }
            _ => {
                b.insert(1, true).unwrap();
                o.insert(1, true).unwrap();
            }
        }
        true
    } else {
        let bit = rng.gen_bool(0.5);
        match rng.gen_range(0..3) {
            0 if n > 0 => {
                let i = rng.gen_range(1..=n);
                assert_eq!(b.access(i), o.access(i));
            }
            1 => {
                let i = rng.gen_range(0..=n);
                assert_eq!(b.rank(bit, i), o.rank(bit, i));
            }
            _ => {
                let j = rng.gen_range(1..=n + 2);
                assert_eq!(b.select(bit, j), o.select(bit, j));
            }
        }
        false
    }
}

#[test]
fn mixed_streams_match_oracle() {
    for (seed, q) in [(1, 1), (2, 4), (3, 64), (4, 1024)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start: Vec<bool> = (0..3000).map(|_| rng.gen_bool(0.4)).collect();
        let mut b = AdaptiveBitvector::from_bits(start.iter().copied());
        let mut o = NaiveBits::from_bits(start);
        for k in 0..30_000 {
            step(&mut rng, q, &mut b, &mut o);
            if k % 500 == 0 {
                assert_eq!(b.to_bits(), o.as_slice(), "seed {seed} op {k}");
                assert!(b.check().is_empty(), "seed {seed} op {k}: {:?}", b.check());
            }
        }
        assert_eq!(b.to_bits(), o.as_slice());
        assert!(b.check().is_empty());
    }
}

#[test]
fn validator_clean_after_every_operation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut b = AdaptiveBitvector::new();
    let mut o = NaiveBits::new();
    for k in 0..6000 {
        step(&mut rng, 8, &mut b, &mut o);
        let v = b.check();
        assert!(v.is_empty(), "op {k}: {v:?}");
    }
}

#[test]
fn dualities() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // large enough that level-1 nodes fit under the flatten cap
    let mut b = AdaptiveBitvector::from_bits((0..30_000).map(|_| rng.gen_bool(0.3)));
    let n = b.len();
    for i in 0..=n {
        assert_eq!(b.rank(true, i).unwrap() + b.rank(false, i).unwrap(), i);
    }
    for bit in [false, true] {
        let total = b.rank(bit, n).unwrap();
        for j in 1..=total {
            let p = b.select(bit, j).unwrap().unwrap();
            assert_eq!(b.rank(bit, p).unwrap(), j);
            assert_eq!(b.access(p).unwrap(), bit);
        }
        assert_eq!(b.select(bit, total + 1).unwrap(), None);
    }
    assert!(b.stats().flatten_count > 0);
    assert!(b.check().is_empty());
}

#[test]
fn flattening_never_changes_answers() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let bits: Vec<bool> = (0..30_000).map(|_| rng.gen_bool(0.5)).collect();
    let mut b = AdaptiveBitvector::from_bits(bits.iter().copied());
    let o = NaiveBits::from_bits(bits.iter().copied());
    let mut flattened = 0;
    for _ in 0..100_000 {
        let before = b.stats().flatten_count;
        let bit = rng.gen_bool(0.5);
        let i = rng.gen_range(0..=b.len());
        assert_eq!(b.rank(bit, i), o.rank(bit, i));
        if b.stats().flatten_count > before {
            flattened += 1;
            assert_eq!(b.to_bits(), bits);
            for _ in 0..100 {
                let j = rng.gen_range(1..=b.len() / 2);
                assert_eq!(b.select(bit, j), o.select(bit, j));
                let p = rng.gen_range(1..=b.len());
                assert_eq!(b.access(p), o.access(p));
            }
        }
    }
    assert!(flattened > 0);
    assert!(b.check().is_empty());
}

#[test]
fn large_bulk_load_answers_queries() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bits: Vec<bool> = (0..1_000_000).map(|_| rng.gen_bool(0.5)).collect();
    let mut b = AdaptiveBitvector::from_bits(bits.iter().copied());
    let o = NaiveBits::from_bits(bits);
    assert!(b.check().is_empty());
    for _ in 0..1000 {
        let bit = rng.gen_bool(0.5);
        match rng.gen_range(0..3) {
            0 => {
                let i = rng.gen_range(1..=o.len());
                assert_eq!(b.access(i), o.access(i));
            }
            1 => {
                let i = rng.gen_range(0..=o.len());
                assert_eq!(b.rank(bit, i), o.rank(bit, i));
            }
            _ => {
                let j = rng.gen_range(1..=o.len() / 2);
                assert_eq!(b.select(bit, j), o.select(bit, j));
            }
        }
    }
}

#[test]
fn flatten_events_respect_the_cap() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut b = AdaptiveBitvector::from_bits((0..20_000).map(|_| rng.gen_bool(0.5)));
    let mut o = NaiveBits::from_bits(b.to_bits());
    b.set_event_log(true);
    let mut flattens = 0;
    for _ in 0..60_000 {
        step(&mut rng, 200, &mut b, &mut o);
        let cap = b.params().flatten_cap;
        for e in b.take_events() {
            if let Event::Flatten { size, .. } = e {
                assert!(size <= cap, "flatten of {size} over cap {cap}");
                flattens += 1;
            }
        }
    }
    assert!(flattens > 0);
}

#[test]
fn errors_name_the_bound() {
    let mut b = AdaptiveBitvector::from_bits([true, false]);
    assert_eq!(b.access(3), Err(Error::IndexOutOfRange { index: 3, min: 1, max: 2 }));
    assert_eq!(b.insert(4, true), Err(Error::IndexOutOfRange { index: 4, min: 1, max: 3 }));
    assert_eq!(b.rank(true, 3), Err(Error::IndexOutOfRange { index: 3, min: 0, max: 2 }));
    assert!(b.select(false, 0).is_err());
    let mut e = AdaptiveBitvector::new();
    assert_eq!(e.delete(1), Err(Error::IndexOutOfRange { index: 1, min: 1, max: 0 }));
    assert_eq!(e.select(true, 1), Ok(None));
    // failed calls leave no trace
    assert_eq!(e.stats().queries, 1);
    assert_eq!(e.stats().updates, 0);
}

#[test]
fn space_report_components_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut b = AdaptiveBitvector::from_bits((0..50_000).map(|_| rng.gen_bool(0.5)));
    for _ in 0..200_000 {
        let i = rng.gen_range(0..=b.len());
        b.rank(true, i).unwrap();
    }
    let r = b.space_report();
    assert_eq!(r.payload_bits, 50_000);
    assert!(r.static_index_bits > 0);
    assert_eq!(
        r.total_bits,
        r.payload_bits + r.dynamic_leaf_slack_bits + r.static_leaf_slack_bits + r.static_index_bits + r.internal_node_bits
    );
    assert!(r.overhead_ratio > 0.0);
}
