//! Local HTTP front end for a [`Registry`] and a client for it.
//!
//! | method | path                     | body         |
//! |--------|--------------------------|--------------|
//! | GET    | `/rounds`                |              |
//! | GET    | `/rounds/{id}`           |              |
//! | POST   | `/rounds`                | `Snapshot`   |
//! | POST   | `/rounds/{id}/liabilities` | `Submission` |
//! | POST   | `/rounds/{id}/reserves`  | `Submission` |
//! | POST   | `/rounds/{id}/finalize`  | `Submission` |
//!
//! Success bodies are the round (or list of rounds); failures carry the
//! serialized [`RegistryError`].

use std::net::SocketAddr;
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;

use serde::de::DeserializeOwned;
use serde::Serialize;
use tiny_http::{Header, Method, Request, Response, Server};

use crate::registry::{Registry, RoundRegistry};
use crate::round::{Round, Snapshot, Submission};
use crate::RegistryError;

const WORKERS: usize = 4;

pub struct ServerHandle {
    server: Arc<Server>,
    workers: Vec<JoinHandle<()>>,
    addr: SocketAddr,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Blocks until the server stops.
    pub fn join(mut self) {
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }

    pub fn shutdown(mut self) {
        self.server.unblock();
        for _ in 1..self.workers.len() {
            self.server.unblock();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

/// Serves `registry` on `addr` (`127.0.0.1:0` picks a free port). Writes
/// are serialized by a lock; reads share it.
pub fn serve(registry: Registry, addr: &str) -> Result<ServerHandle, RegistryError> {
    let server = Arc::new(Server::http(addr).map_err(|e| RegistryError::Io(e.to_string()))?);
    let addr = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| RegistryError::Io("server is not bound to an IP address".into()))?;
    let registry = Arc::new(RwLock::new(registry));
    let workers = (0..WORKERS)
        .map(|_| {
            let server = server.clone();
            let registry = registry.clone();
            std::thread::spawn(move || {
                while let Ok(req) = server.recv() {
                    handle(&registry, req);
                }
            })
        })
        .collect();
    Ok(ServerHandle { server, workers, addr })
}

fn json_response<T: Serialize>(status: u16, body: &T) -> Response<std::io::Cursor<Vec<u8>>> {
    let bytes = serde_json::to_vec(body).expect("responses serialize");
    Response::from_data(bytes)
        .with_status_code(status)
        .with_header(Header::from_bytes("Content-Type", "application/json").expect("static header"))
}

fn body<T: DeserializeOwned>(req: &mut Request) -> Result<T, RegistryError> {
    let mut text = String::new();
    req.as_reader().read_to_string(&mut text).map_err(|e| RegistryError::BadRequest(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| RegistryError::BadRequest(e.to_string()))
}

fn route(reg: &RwLock<Registry>, req: &mut Request) -> Result<serde_json::Value, RegistryError> {
    let path: Vec<String> = req.url().trim_matches('/').split('/').map(str::to_string).collect();
    let parts: Vec<&str> = path.iter().map(String::as_str).collect();
    let id = |s: &str| s.parse::<u64>().map_err(|_| RegistryError::BadRequest(format!("bad round id {s:?}")));
    let write = || reg.write().unwrap_or_else(|e| e.into_inner());
    let read = || reg.read().unwrap_or_else(|e| e.into_inner());
    let round = match (req.method(), parts.as_slice()) {
        (Method::Get, ["rounds"]) => return Ok(serde_json::to_value(read().list_rounds()?).expect("serialize")),
        (Method::Get, ["rounds", n]) => read().get_round(id(n)?)?,
        (Method::Post, ["rounds"]) => {
            let snapshot: Snapshot = body(req)?;
            write().open_round(snapshot)?
        }
        (Method::Post, ["rounds", n, op]) => {
            let n = id(n)?;
            let sub: Submission = body(req)?;
            match *op {
                "liabilities" => write().submit_liabilities(n, sub)?,
                "reserves" => write().submit_reserve(n, sub)?,
                "finalize" => write().finalize_round(n, sub)?,
                other => return Err(RegistryError::BadRequest(format!("unknown operation {other:?}"))),
            }
        }
        (m, _) => return Err(RegistryError::BadRequest(format!("no route for {m} {}", req.url()))),
    };
    Ok(serde_json::to_value(round).expect("rounds serialize"))
}

fn handle(reg: &RwLock<Registry>, mut req: Request) {
    let resp = match route(reg, &mut req) {
        Ok(v) => json_response(200, &v),
        Err(e) => json_response(e.http_status(), &e),
    };
    let _ = req.respond(resp);
}

/// Drives a registry served by [`serve`].
pub struct RegistryClient {
    base: String,
    agent: ureq::Agent,
}

impl RegistryClient {
    pub fn new(base: impl Into<String>) -> Self {
        RegistryClient { base: base.into().trim_end_matches('/').to_string(), agent: ureq::Agent::new() }
    }

    fn finish<T: DeserializeOwned>(result: Result<ureq::Response, ureq::Error>) -> Result<T, RegistryError> {
        match result {
            Ok(resp) => resp.into_json().map_err(|e| RegistryError::Transport(e.to_string())),
            Err(ureq::Error::Status(_, resp)) => {
                let text = resp.into_string().map_err(|e| RegistryError::Transport(e.to_string()))?;
                Err(serde_json::from_str::<RegistryError>(&text).unwrap_or(RegistryError::Transport(text)))
            }
            Err(e) => Err(RegistryError::Transport(e.to_string())),
        }
    }

    fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, RegistryError> {
        Self::finish(self.agent.get(&format!("{}{path}", self.base)).call())
    }

    fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, RegistryError> {
        Self::finish(self.agent.post(&format!("{}{path}", self.base)).send_json(body))
    }
}

impl RoundRegistry for RegistryClient {
    fn open_round(&mut self, snapshot: Snapshot) -> Result<Round, RegistryError> {
        self.post("/rounds", &snapshot)
    }

    fn submit_liabilities(&mut self, round_id: u64, submission: Submission) -> Result<Round, RegistryError> {
        self.post(&format!("/rounds/{round_id}/liabilities"), &submission)
    }

    fn submit_reserve(&mut self, round_id: u64, submission: Submission) -> Result<Round, RegistryError> {
        self.post(&format!("/rounds/{round_id}/reserves"), &submission)
    }

    fn finalize_round(&mut self, round_id: u64, submission: Submission) -> Result<Round, RegistryError> {
        self.post(&format!("/rounds/{round_id}/finalize"), &submission)
    }

    fn get_round(&self, round_id: u64) -> Result<Round, RegistryError> {
        self.get(&format!("/rounds/{round_id}"))
    }

    fn list_rounds(&self) -> Result<Vec<Round>, RegistryError> {
        self.get("/rounds")
    }
}
