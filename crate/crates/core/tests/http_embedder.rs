use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use graphilosophy::embedding::{EmbedError, EmbedMode, EmbeddingProvider, HttpEmbedder};

/// Serves `statuses` in order (repeating the last one), counting requests.
/// A 200 answer carries a vector derived from the request body length.
fn fake_server(statuses: Vec<u16>) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/embed", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap_or(0);
                }
            }
            let mut body = vec![0u8; len];
            let _ = reader.read_exact(&mut body);
            let n = counter.fetch_add(1, Ordering::SeqCst);
            let status = statuses[n.min(statuses.len() - 1)];
            let payload = if status == 200 {
                format!("{{\"vector\":[1.0,{}.0,0.5]}}", body.len())
            } else {
                "{}".to_string()
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{payload}",
                payload.len()
            );
        }
    });
    (url, hits)
}

#[test]
fn responses_are_cached_in_memory_and_on_disk() {
    let (url, hits) = fake_server(vec![200]);
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.jsonl");

    let e = HttpEmbedder::new(url.clone(), Some("secret".into()), 3).with_cache_file(&cache).unwrap();
    let a = e.embed("學而時習之", EmbedMode::Passage).unwrap();
    let b = e.embed("學而時習之", EmbedMode::Passage).unwrap();
    assert_eq!(a, b);
    assert_eq!(hits.load(Ordering::SeqCst), 1);
    e.embed("學而時習之", EmbedMode::Query).unwrap();
    assert_eq!(hits.load(Ordering::SeqCst), 2);

    let reopened = HttpEmbedder::new(url, None, 3).with_cache_file(&cache).unwrap();
    assert_eq!(reopened.embed("學而時習之", EmbedMode::Passage).unwrap(), a);
    assert_eq!(hits.load(Ordering::SeqCst), 2);
    assert_eq!(std::fs::read_to_string(&cache).unwrap().lines().count(), 2);
}

#[test]
fn server_errors_are_retried() {
    let (url, hits) = fake_server(vec![503, 503, 200]);
    let e = HttpEmbedder::new(url, None, 3).with_max_attempts(3);
    assert!(e.embed("nhân", EmbedMode::Query).is_ok());
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[test]
fn client_errors_and_bad_dimensions_fail() {
    let (url, hits) = fake_server(vec![400]);
    let e = HttpEmbedder::new(url, None, 3).with_max_attempts(3);
    assert!(matches!(e.embed("nhân", EmbedMode::Query), Err(EmbedError::BadResponse(_))));
    assert_eq!(hits.load(Ordering::SeqCst), 1);

    let (url, _) = fake_server(vec![200]);
    let e = HttpEmbedder::new(url, None, 8);
    assert!(matches!(e.embed("nhân", EmbedMode::Query), Err(EmbedError::DimMismatch(8, 3))));
}
