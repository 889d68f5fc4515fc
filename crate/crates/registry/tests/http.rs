mod common;

use common::*;
use ppos_core::attestor::RelationId;
use ppos_core::Digest32;
use ppos_registry::{serve, Registry, RegistryClient, RegistryError, RoundRegistry, RoundStatus, Snapshot};

#[test]
fn client_drives_a_served_registry() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    let server = serve(Registry::open(&path).unwrap(), "127.0.0.1:0").unwrap();
    let mut client = RegistryClient::new(server.url());

    assert_eq!(client.get_round(1), Err(RegistryError::UnknownRound(1)));
    let r = client.open_round(snapshot()).unwrap();
    assert_eq!((r.round_id, r.status), (1, RoundStatus::Open));
    assert_eq!(client.open_round(snapshot()), Err(RegistryError::PreviousRoundOpen(1)));
    client.submit_liabilities(1, liabilities()).unwrap();
    for s in reserves() {
        client.submit_reserve(1, s).unwrap();
    }
    match client.submit_reserve(1, reserve(RelationId::EthReserve)) {
        Err(RegistryError::AttestationInvalid(d)) => assert!(d.contains("DuplicateAttestation")),
        other => panic!("{other:?}"),
    }
    assert!(matches!(client.finalize_round(1, solvency(2)), Err(RegistryError::BindingMismatch(_))));
    let done = client.finalize_round(1, solvency(1)).unwrap();
    assert!(matches!(done.status, RoundStatus::Finalized { accepted: true, .. }));

    client.open_round(Snapshot { eth_block_hash: Some(Digest32([2u8; 32])), ..snapshot() }).unwrap();
    client.submit_liabilities(2, liabilities()).unwrap();
    assert!(matches!(
        client.submit_reserve(2, reserve(RelationId::EthReserve)),
        Err(RegistryError::SnapshotMismatch(_))
    ));
    assert!(matches!(client.submit_liabilities(2, liabilities()), Err(RegistryError::WrongStatus { .. })));

    let listed = client.list_rounds().unwrap();
    server.shutdown();
    let local = Registry::open(&path).unwrap();
    assert_eq!(listed, local.list_rounds().unwrap());
}

#[test]
fn malformed_requests_are_400() {
    let server = serve(Registry::in_memory(), "127.0.0.1:0").unwrap();
    let url = server.url();
    let err = ureq::post(&format!("{url}/rounds")).send_string("not json").unwrap_err();
    assert!(matches!(err, ureq::Error::Status(400, _)));
    let err = ureq::get(&format!("{url}/rounds/abc")).call().unwrap_err();
    assert!(matches!(err, ureq::Error::Status(400, _)));
    let err = ureq::get(&format!("{url}/rounds/7")).call().unwrap_err();
    assert!(matches!(err, ureq::Error::Status(404, _)));
    server.shutdown();
}

#[test]
fn unreachable_registry_is_a_transport_error() {
    let client = RegistryClient::new("http://127.0.0.1:9");
    assert!(matches!(client.list_rounds(), Err(RegistryError::Transport(_))));
}
