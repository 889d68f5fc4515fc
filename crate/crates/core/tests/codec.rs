use std::time::Instant;

use ppos_core::ethstate::header_hash;
use ppos_core::hashcodec::rlp::{self, RlpError, RlpItem};
use ppos_core::hashcodec::{keccak256, sha256d, Digest32, EMPTY_TRIE_ROOT};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use tiny_keccak::{Hasher, Keccak};

fn h(s: &str) -> Vec<u8> {
    hex::decode(s).unwrap()
}

fn d(s: &str) -> Digest32 {
    s.parse().unwrap()
}

#[test]
fn keccak_vectors() {
    assert_eq!(keccak256(b""), d("c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"));
    assert_eq!(keccak256([0x80]), d("56e81f171bcc55a6ff8345e692c0f86e5b48e01b996cadc001622fb5e363b421"));
    assert_eq!(keccak256(b"abc"), d("4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45"));
}

#[test]
fn sha256d_vectors() {
    assert_eq!(sha256d(b""), d("5df6e0e2761359d30a8275058e299fcc0381534545f55cf43e41983f5d4c9456"));
}

#[test]
fn bitcoin_genesis_header_hash() {
    let header = h(concat!(
        "01000000",
        "0000000000000000000000000000000000000000000000000000000000000000",
        "3ba3edfd7a7b12b27ac72c3e67768f617fc81bc3888a51323a9fb8aa4b1e5e4a",
        "29ab5f49",
        "ffff001d",
        "1dac2b7c",
    ));
    assert_eq!(
        sha256d(&header).to_reversed_hex(),
        "000000000019d6689c085ae165831e934ff763ae46a2a6c172b3f1b60a8ce26f"
    );
}

/// Mainnet genesis header assembled from its published fields.
pub fn mainnet_genesis_header() -> Vec<u8> {
    let fields = vec![
        RlpItem::bytes([0u8; 32]),
        RlpItem::bytes(h("1dcc4de8dec75d7aab85b567b6ccd41ad312451b948a7413f0a142fd40d49347")),
        RlpItem::bytes([0u8; 20]),
        RlpItem::bytes(h("d7f8974fb5ac78d9ac099b9ad5018bedc2ce0a72dad1827a1709da30580f0544")),
        RlpItem::bytes(EMPTY_TRIE_ROOT.0),
        RlpItem::bytes(EMPTY_TRIE_ROOT.0),
        RlpItem::bytes(vec![0u8; 256]),
        RlpItem::u64(0x4_0000_0000),
        RlpItem::u64(0),
        RlpItem::u64(5000),
        RlpItem::u64(0),
        RlpItem::u64(0),
        RlpItem::bytes(h("11bbe8db4e347b4e8c937c1c8370e4b5ed33adb3db69cbdb7a38e1e50b1b82fa")),
        RlpItem::bytes([0u8; 32]),
        RlpItem::bytes(h("0000000000000042")),
    ];
    RlpItem::List(fields).encode()
}

#[test]
fn ethereum_mainnet_genesis_hash() {
    let c = header_hash(&mainnet_genesis_header()).unwrap();
    assert_eq!(c.block_hash, d("d4e56740f876aef8c010b86a40d5f56745a118d0906a34e69aec8c0db1cb8fa3"));
    assert_eq!(c.state_root, d("d7f8974fb5ac78d9ac099b9ad5018bedc2ce0a72dad1827a1709da30580f0544"));
}

#[test]
fn harvested_rlp_vectors() {
    let list = |v: Vec<RlpItem>| RlpItem::List(v);
    let b = |s: &[u8]| RlpItem::bytes(s.to_vec());
    let cases: Vec<(RlpItem, &str)> = vec![
        (b(b"dog"), "83646f67"),
        (list(vec![b(b"cat"), b(b"dog")]), "c88363617483646f67"),
        (b(b""), "80"),
        (list(vec![]), "c0"),
        (RlpItem::u64(0), "80"),
        (RlpItem::u64(15), "0f"),
        (RlpItem::u64(1024), "820400"),
        (b(&[0x00]), "00"),
        (
            list(vec![list(vec![]), list(vec![list(vec![])]), list(vec![list(vec![]), list(vec![list(vec![])])])]),
            "c7c0c1c0c3c0c1c0",
        ),
        (
            b(b"Lorem ipsum dolor sit amet, consectetur adipisicing elit"),
            "b8384c6f72656d20697073756d20646f6c6f722073697420616d65742c20636f6e7365637465747572206164697069736963696e6720656c6974",
        ),
    ];
    for (item, expected) in cases {
        assert_eq!(hex::encode(item.encode()), expected, "{item:?}");
        assert_eq!(rlp::decode(&h(expected)).unwrap(), item);
    }
}

#[test]
fn non_canonical_encodings_rejected() {
    for bad in ["8100", "8105", "b800", "b90001", "f80100", "c281", "f800", "8200", "c2"] {
        let raw = h(bad);
        assert!(rlp::decode(&raw).is_err(), "{bad} accepted");
    }
    assert!(matches!(rlp::decode(&h("0000")), Err(RlpError::TrailingBytes(_))));
}

fn random_item(rng: &mut ChaCha20Rng, depth: usize) -> RlpItem {
    if depth >= 4 || rng.gen_bool(0.6) {
        let len = match rng.gen_range(0..4) {
            0 => 0,
            1 => 1,
            2 => rng.gen_range(2..56),
            _ => rng.gen_range(56..300),
        };
        let mut v = vec![0u8; len];
        rng.fill(&mut v[..]);
        RlpItem::Bytes(v)
    } else {
        let n = rng.gen_range(0..6);
        RlpItem::List((0..n).map(|_| random_item(rng, depth + 1)).collect())
    }
}

#[test]
fn roundtrip_10k_random_items_under_10s() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let start = Instant::now();
    for _ in 0..10_000 {
        let item = random_item(&mut rng, 0);
        let enc = item.encode();
        assert_eq!(rlp::decode(&enc).unwrap(), item);
    }
    assert!(start.elapsed().as_secs_f64() < 10.0, "{:?}", start.elapsed());
}

#[test]
fn keccak_matches_second_implementation() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for len in (0..300).chain([1000, 4096]) {
        let mut data = vec![0u8; len];
        rng.fill(&mut data[..]);
        let mut k = Keccak::v256();
        k.update(&data);
        let mut out = [0u8; 32];
        k.finalize(&mut out);
        assert_eq!(keccak256(&data).0, out, "len {len}");
    }
}

fn arb_item() -> impl Strategy<Value = RlpItem> {
    let leaf = prop::collection::vec(any::<u8>(), 0..80).prop_map(RlpItem::Bytes);
    leaf.prop_recursive(4, 64, 8, |inner| prop::collection::vec(inner, 0..8).prop_map(RlpItem::List))
}

proptest! {
    #[test]
    fn roundtrip(item in arb_item()) {
        prop_assert_eq!(rlp::decode(&item.encode()).unwrap(), item);
    }

    #[test]
    fn injective(a in arb_item(), b in arb_item()) {
        prop_assume!(a != b);
        prop_assert_ne!(a.encode(), b.encode());
    }

    #[test]
    fn decode_never_panics(data in prop::collection::vec(any::<u8>(), 0..200)) {
        if let Ok(item) = rlp::decode(&data) {
            prop_assert_eq!(item.encode(), data);
        }
    }
}
