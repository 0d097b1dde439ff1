//! The HTTP client against a local one-shot server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use causalfair::llm::{request_report, LlmConfig, LlmError};
use causalfair::PromptPair;

/// Serves one request with `status` and `body`; returns the raw request.
fn serve_once(status: &str, body: String, delay: Duration) -> (String, thread::JoinHandle<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let status = status.to_string();
    let handle = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut head = String::new();
        let mut len = 0;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
            head.push_str(&line);
            if line == "\r\n" || line.is_empty() {
                break;
            }
        }
        let mut payload = vec![0; len];
        reader.read_exact(&mut payload).unwrap();
        thread::sleep(delay);
        let mut stream = stream;
        let _ = write!(
            stream,
            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        );
        head + &String::from_utf8(payload).unwrap()
    });
    (url, handle)
}

fn prompts() -> PromptPair {
    PromptPair {
        system: "system text".into(),
        user: r#"{"schema_version":"1"}"#.into(),
    }
}

fn config(url: String, key_env: &str) -> LlmConfig {
    LlmConfig {
        enabled: true,
        endpoint: Some(url),
        timeout_secs: 2,
        api_key_env: key_env.into(),
        ..LlmConfig::default()
    }
}

fn reply() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/llm_reply.json")).unwrap()
}

#[test]
fn happy_path_sends_prompts_and_parses_sections() {
    std::env::set_var("CF_TEST_KEY_OK", "secret-token");
    let (url, h) = serve_once("200 OK", reply(), Duration::ZERO);
    let r = request_report(&config(url, "CF_TEST_KEY_OK"), &prompts()).unwrap();
    assert!(!r.structure_violation);
    assert!(r.text.unwrap().starts_with("Title: \"Fairness Decomposition Report\""));
    let req = h.join().unwrap();
    assert!(req.starts_with("POST /v1/chat/completions"));
    assert!(req.contains("Bearer secret-token"));
    let body: serde_json::Value = serde_json::from_str(&req[req.find("\r\n\r\n").unwrap() + 4..]).unwrap();
    assert_eq!(body["messages"][0]["content"], "system text");
    assert_eq!(body["messages"][1]["role"], "user");
    assert_eq!(body["reasoning_effort"], "high");
}

#[test]
fn non_2xx_is_a_status_error() {
    std::env::set_var("CF_TEST_KEY_500", "k");
    let (url, h) = serve_once(
        "500 Internal Server Error",
        "{\"error\":\"boom\"}".into(),
        Duration::ZERO,
    );
    let e = request_report(&config(url, "CF_TEST_KEY_500"), &prompts()).unwrap_err();
    h.join().unwrap();
    assert!(matches!(e, LlmError::Status { status: 500, .. }), "{e:?}");
    assert_eq!(e.exit_code(), 5);
}

#[test]
fn slow_server_times_out() {
    std::env::set_var("CF_TEST_KEY_SLOW", "k");
    let (url, _h) = serve_once("200 OK", reply(), Duration::from_secs(4));
    let e = request_report(&config(url, "CF_TEST_KEY_SLOW"), &prompts()).unwrap_err();
    assert!(matches!(e, LlmError::Timeout(2)), "{e:?}");
}

#[test]
fn missing_credential_and_refused_connection_are_distinct() {
    let cfg = config("http://127.0.0.1:9/".into(), "CF_TEST_KEY_UNSET");
    assert!(matches!(
        request_report(&cfg, &prompts()),
        Err(LlmError::MissingCredential(_))
    ));
    std::env::set_var("CF_TEST_KEY_REFUSED", "k");
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    drop(listener);
    let e = request_report(&config(url, "CF_TEST_KEY_REFUSED"), &prompts()).unwrap_err();
    assert!(matches!(e, LlmError::Network(_)), "{e:?}");
}
