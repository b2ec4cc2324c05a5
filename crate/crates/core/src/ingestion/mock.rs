//! In-process HTTP server speaking the provider wire contract, backed by a
//! fixed ground-truth table. Used by tests and offline demos.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use tiny_http::{Header, Response, Server};
use url::Url;

use crate::table::AudienceTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MockBehavior {
    #[default]
    Serve,
    /// Answer every request with this status and an empty body.
    AlwaysStatus(u16),
    /// Answer the first `n` requests with 503, then serve normally.
    FailFirst(u64),
}

pub struct MockProvider {
    server: Arc<Server>,
    url: String,
    requests: Arc<AtomicU64>,
    handle: Option<JoinHandle<()>>,
}

impl MockProvider {
    /// Serves every table under its population fingerprint.
    pub fn start(tables: &[AudienceTable], behavior: MockBehavior) -> std::io::Result<Self> {
        let mut truth: HashMap<(String, String), u64> = HashMap::new();
        for table in tables {
            let fp = table.population().fingerprint();
            for (id, _, count) in table.iter() {
                truth.insert((fp.clone(), id.to_owned()), count);
            }
        }
        let server = Server::http("127.0.0.1:0").map_err(std::io::Error::other)?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("mock provider has no ip address"))?;
        let server = Arc::new(server);
        let requests = Arc::new(AtomicU64::new(0));
        let handle = {
            let server = Arc::clone(&server);
            let requests = Arc::clone(&requests);
            std::thread::spawn(move || {
                for request in server.incoming_requests() {
                    let n = requests.fetch_add(1, Ordering::SeqCst);
                    let (status, body) = respond(&truth, behavior, n, request.url());
                    let response = Response::from_string(body)
                        .with_status_code(status)
                        .with_header(
                            Header::from_bytes("Content-Type", "application/json").unwrap(),
                        );
                    let _ = request.respond(response);
                }
            })
        };
        Ok(Self {
            server,
            url: format!("http://{addr}"),
            requests,
            handle: Some(handle),
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }
}

fn respond(
    truth: &HashMap<(String, String), u64>,
    behavior: MockBehavior,
    n: u64,
    path: &str,
) -> (u16, String) {
    match behavior {
        MockBehavior::AlwaysStatus(status) => return (status, String::new()),
        MockBehavior::FailFirst(k) if n < k => return (503, String::new()),
        _ => {}
    }
    let Ok(url) = Url::parse(&format!("http://mock{path}")) else {
        return (400, String::new());
    };
    if url.path() != "/audience" {
        return (404, String::new());
    }
    let query: HashMap<_, _> = url.query_pairs().into_owned().collect();
    let (Some(pop), Some(interest)) = (query.get("pop"), query.get("interest")) else {
        return (400, String::new());
    };
    match truth.get(&(pop.clone(), interest.clone())) {
        Some(count) => (200, format!(r#"{{"audience_size":{count}}}"#)),
        None => (404, String::new()),
    }
}

impl Drop for MockProvider {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}
