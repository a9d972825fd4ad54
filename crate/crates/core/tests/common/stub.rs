//! A local chat-completion endpoint that answers from a queue of canned
//! replies and records every request it receives.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};

#[derive(Clone, Debug)]
pub struct Captured {
    pub path: String,
    pub authorization: Option<String>,
    pub body: Value,
}

impl Captured {
    /// Content of the `n`th message.
    pub fn message(&self, n: usize) -> &str {
        self.body["messages"][n]["content"].as_str().unwrap_or_default()
    }

    pub fn message_count(&self) -> usize {
        self.body["messages"].as_array().map_or(0, Vec::len)
    }
}

pub struct Stub {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Captured>>>,
}

impl Stub {
    pub fn captured(&self) -> Vec<Captured> {
        self.requests.lock().unwrap().clone()
    }
}

fn serve(mut stream: TcpStream, replies: &Mutex<VecDeque<String>>, requests: &Mutex<Vec<Captured>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut request_line = String::new();
    if reader.read_line(&mut request_line).is_err() || request_line.is_empty() {
        return;
    }
    let path = request_line.split_whitespace().nth(1).unwrap_or_default().to_string();
    let mut length = 0;
    let mut authorization = None;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            match k.to_ascii_lowercase().as_str() {
                "content-length" => length = v.trim().parse().unwrap(),
                "authorization" => authorization = Some(v.trim().to_string()),
                _ => {}
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).unwrap();
    requests.lock().unwrap().push(Captured {
        path,
        authorization,
        body: serde_json::from_slice(&body).unwrap_or(Value::Null),
    });
    let reply = replies.lock().unwrap().pop_front();
    let (status, payload) = match reply {
        Some(content) => (
            "200 OK",
            json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string(),
        ),
        None => ("500 Internal Server Error", "{}".to_string()),
    };
    let _ = write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    );
}

/// Start a stub that answers with `replies` in order, then with HTTP 500.
pub fn start(replies: &[&str]) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let replies = Arc::new(Mutex::new(replies.iter().map(|s| s.to_string()).collect::<VecDeque<_>>()));
    let requests = Arc::new(Mutex::new(Vec::new()));
    let recorded = requests.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            match stream {
                Ok(s) => serve(s, &replies, &recorded),
                Err(_) => break,
            }
        }
    });
    Stub { url, requests }
}

/// Environment variable holding a dummy key, set once per test binary.
pub fn key_env() -> &'static str {
    const NAME: &str = "HOPSIM_STUB_KEY";
    static SET: std::sync::Once = std::sync::Once::new();
    SET.call_once(|| std::env::set_var(NAME, "stub-secret"));
    NAME
}
