//! Minimal chat-completion endpoint answering from a recorded cassette.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use bichain::modules::ModuleKind;
use bichain::remote::{Cassette, CassetteTransport, Transport};
use serde_json::{json, Value};

pub struct StubServer {
    pub url: String,
    state: Arc<State>,
}

struct State {
    responder: CassetteTransport,
    modules: HashMap<String, ModuleKind>,
    /// Requests answered with 503 before serving normally.
    unavailable: AtomicUsize,
    requests: AtomicUsize,
    prompts: Mutex<Vec<String>>,
    auth: Mutex<Vec<Option<String>>>,
}

impl StubServer {
    pub fn start(cassette: &Cassette, unavailable: usize) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub port");
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let state = Arc::new(State {
            responder: cassette.responder(),
            modules: cassette.interactions.iter().map(|i| (i.prompt.clone(), i.module)).collect(),
            unavailable: AtomicUsize::new(unavailable),
            requests: AtomicUsize::new(0),
            prompts: Mutex::new(Vec::new()),
            auth: Mutex::new(Vec::new()),
        });
        let shared = Arc::clone(&state);
        thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let state = Arc::clone(&shared);
                thread::spawn(move || serve(stream, &state));
            }
        });
        StubServer { url, state }
    }

    /// HTTP requests received, refused ones included.
    pub fn requests(&self) -> usize {
        self.state.requests.load(Ordering::SeqCst)
    }

    /// Prompts of the requests that were answered.
    pub fn prompts(&self) -> Vec<String> {
        self.state.prompts.lock().unwrap().clone()
    }

    pub fn authorization_headers(&self) -> Vec<Option<String>> {
        self.state.auth.lock().unwrap().clone()
    }
}

fn serve(stream: TcpStream, state: &State) {
    let mut reader = BufReader::new(stream.try_clone().expect("clone stream"));
    let mut writer = stream;
    loop {
        let mut request_line = String::new();
        if reader.read_line(&mut request_line).unwrap_or(0) == 0 {
            return;
        }
        let mut length = 0usize;
        let mut auth = None;
        loop {
            let mut header = String::new();
            if reader.read_line(&mut header).unwrap_or(0) == 0 {
                return;
            }
            let header = header.trim_end();
            if header.is_empty() {
                break;
            }
            if let Some((name, value)) = header.split_once(':') {
                match name.trim().to_ascii_lowercase().as_str() {
                    "content-length" => length = value.trim().parse().unwrap_or(0),
                    "authorization" => auth = Some(value.trim().to_string()),
                    _ => {}
                }
            }
        }
        let mut body = vec![0u8; length];
        if reader.read_exact(&mut body).is_err() {
            return;
        }
        state.requests.fetch_add(1, Ordering::SeqCst);
        state.auth.lock().unwrap().push(auth);
        let (status, reply) = answer(&body, state);
        let response = format!(
            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{reply}",
            reply.len()
        );
        if writer.write_all(response.as_bytes()).is_err() {
            return;
        }
    }
}

fn answer(body: &[u8], state: &State) -> (&'static str, String) {
    if state.unavailable.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1)).is_ok() {
        return ("503 Service Unavailable", json!({"error": "busy"}).to_string());
    }
    let Ok(request) = serde_json::from_slice::<Value>(body) else {
        return ("400 Bad Request", json!({"error": "bad json"}).to_string());
    };
    let prompt = request.pointer("/messages/0/content").and_then(Value::as_str).unwrap_or_default().to_string();
    state.prompts.lock().unwrap().push(prompt.clone());
    let kind = state.modules.get(&prompt).copied().unwrap_or(ModuleKind::FactCheck);
    match state.responder.complete(kind, &prompt) {
        Ok(content) => (
            "200 OK",
            json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]}).to_string(),
        ),
        Err(e) => ("404 Not Found", json!({"error": e.to_string()}).to_string()),
    }
}
