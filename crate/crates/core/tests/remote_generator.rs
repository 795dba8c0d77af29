use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use claimguard::extraction::ClaimGrammar;
use claimguard::generator::{Generator, RemoteGenerator};
use claimguard::model::{KnowledgeState, Provenance, QueryContext, Triple};
use claimguard::Error;

/// Serves one request with a canned status and body; hands back the request body.
fn serve_once(status: &'static str, body: &'static str) -> (String, mpsc::Receiver<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut length = 0;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if line == "\r\n" || line.is_empty() {
                break;
            }
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                length = v.trim().parse().unwrap();
            }
        }
        let mut request = vec![0; length];
        reader.read_exact(&mut request).unwrap();
        tx.send(String::from_utf8(request).unwrap()).unwrap();
        let mut stream = stream;
        write!(
            stream,
            "HTTP/1.1 {status}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
    });
    (url, rx)
}

fn state() -> KnowledgeState {
    KnowledgeState::from_facts([Triple::parse("einstein", "born_in", "ulm").unwrap()], Provenance::Kb)
}

fn client(url: &str) -> RemoteGenerator {
    RemoteGenerator::new(url, Duration::from_secs(5), ClaimGrammar::default()).unwrap().with_retries(0)
}

#[test]
fn generates_and_extracts_claims() {
    let (url, requests) = serve_once("200 OK", r#"{"text": "Einstein was born in Ulm.", "claim_confidences": [0.75]}"#);
    let r = client(&url).generate(&QueryContext::new("Where?"), &state(), 0).unwrap();
    assert_eq!(r.claims.len(), 1);
    assert_eq!(r.claims[0].to_string(), "born_in(einstein, ulm)");
    assert_eq!(r.claim_confidences, Some(vec![0.75]));
    let sent: serde_json::Value = serde_json::from_str(&requests.recv().unwrap()).unwrap();
    assert_eq!(sent["context"], "Where?");
    assert_eq!(sent["constraints"][0]["object"], "ulm");
}

#[test]
fn server_errors_are_unavailable() {
    let (url, _rx) = serve_once("500 Internal Server Error", "{}");
    let err = client(&url).generate(&QueryContext::new(""), &state(), 0).unwrap_err();
    assert!(matches!(err, Error::GeneratorUnavailable(ref m) if m.contains("500")), "{err}");
}

#[test]
fn malformed_payload_is_a_protocol_violation() {
    let (url, _rx) = serve_once("200 OK", r#"{"words": 3}"#);
    let err = client(&url).generate(&QueryContext::new(""), &state(), 0).unwrap_err();
    assert!(matches!(err, Error::GeneratorUnavailable(ref m) if m.contains("protocol violation")), "{err}");
}

#[test]
fn out_of_range_confidence_is_rejected() {
    let (url, _rx) = serve_once("200 OK", r#"{"text": "", "claim_confidences": [1.5]}"#);
    assert!(client(&url).generate(&QueryContext::new(""), &state(), 0).is_err());
}

#[test]
fn unreachable_endpoint_is_unavailable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let g = RemoteGenerator::new(format!("http://127.0.0.1:{port}"), Duration::from_secs(2), ClaimGrammar::default()).unwrap();
    assert!(matches!(g.generate(&QueryContext::new(""), &state(), 0), Err(Error::GeneratorUnavailable(_))));
}

#[test]
fn zero_timeout_is_rejected() {
    assert!(RemoteGenerator::new("http://localhost", Duration::ZERO, ClaimGrammar::default()).is_err());
}
