#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use examd_core::store::Store;
use examd_core::{
    Authenticator, Category, Clock, Credentials, ExamBlueprint, PasswordPolicy, Question, Role,
};
use examd_server::{AppState, Server, ServerConfig};
use reqwest::{Client, Method, Response};
use serde_json::Value;
use tokio::sync::oneshot;

pub const FAST: PasswordPolicy = PasswordPolicy { iterations: 2 };

/// Distinct, unremarkable choice texts so a leaked key would have to be
/// structural.
pub fn bank(per_category: usize) -> Vec<Question> {
    let mut out = vec![];
    for cat in Category::canonical() {
        for i in 0..per_category {
            let id = format!("{}-{i:02}", cat.as_str().to_lowercase());
            let choices = ["w", "x", "y", "z"].map(|c| format!("{id} option {c}"));
            out.push(Question {
                id: id.as_str().into(),
                category: cat.clone(),
                text: format!("{cat} question {i}"),
                choices: choices.to_vec(),
                correct_index: ((i * 7 + cat.as_str().len()) % 4) as u32,
            });
        }
    }
    out
}

pub struct TestServer {
    pub base: String,
    pub state: Arc<AppState>,
    pub admin: Credentials,
    pub store_path: PathBuf,
    pub http: Client,
    shutdown: Option<oneshot::Sender<()>>,
    handle: Option<tokio::task::JoinHandle<()>>,
    dir: tempfile::TempDir,
}

pub struct Setup {
    pub blueprint: ExamBlueprint,
    pub bank: Vec<Question>,
    pub clock: Arc<dyn Clock>,
}

impl Default for Setup {
    fn default() -> Self {
        Setup {
            blueprint: ExamBlueprint::default(),
            bank: bank(12),
            clock: Arc::new(examd_core::SystemClock),
        }
    }
}

impl TestServer {
    pub async fn start(setup: Setup) -> TestServer {
        let dir = tempfile::tempdir().unwrap();
        let store_path = dir.path().join("store.dat");
        let admin = {
            let mut store = Store::open(&store_path).unwrap();
            for q in setup.bank {
                store.put_question(q).unwrap();
            }
            Authenticator::new(FAST, 3600)
                .create_account(&mut store, "Exam", "Admin", Role::Admin)
                .unwrap()
        };
        let config = ServerConfig {
            listen: "127.0.0.1:0".parse().unwrap(),
            store_path: store_path.clone(),
            blueprint: setup.blueprint,
            password_policy: FAST,
            sweep_interval: Duration::from_millis(50),
            ..ServerConfig::default()
        };
        let server = Server::bind(config, setup.clock).await.unwrap();
        let base = format!("http://{}", server.local_addr().unwrap());
        let state = server.state();
        let (tx, rx) = oneshot::channel();
        let handle = tokio::spawn(async move {
            server
                .run(async {
                    let _ = rx.await;
                })
                .await
                .unwrap();
        });
        TestServer {
            base,
            state,
            admin,
            store_path,
            http: Client::new(),
            shutdown: Some(tx),
            handle: Some(handle),
            dir,
        }
    }

    /// Shuts down gracefully; the returned directory keeps the store alive.
    pub async fn stop(mut self) -> tempfile::TempDir {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(h) = self.handle.take() {
            h.await.unwrap();
        }
        std::mem::replace(&mut self.dir, tempfile::tempdir().unwrap())
    }

    pub async fn call(
        &self,
        method: Method,
        path: &str,
        token: Option<&str>,
        body: Option<Value>,
    ) -> Response {
        let mut req = self.http.request(method, format!("{}{path}", self.base));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        req.send().await.unwrap()
    }

    /// Sends a request and returns the status with the JSON body (or the raw
    /// text as a JSON string when the body is not JSON).
    pub async fn json(
        &self,
        method: Method,
        path: &str,
        token: Option<&str>,
        body: Option<Value>,
    ) -> (u16, Value) {
        let resp = self.call(method, path, token, body).await;
        let status = resp.status().as_u16();
        let text = resp.text().await.unwrap();
        let value = serde_json::from_str(&text).unwrap_or(Value::String(text));
        (status, value)
    }

    pub async fn login(&self, creds: &Credentials) -> String {
        let (status, body) = self
            .json(
                Method::POST,
                "/api/login",
                None,
                Some(serde_json::json!({"username": creds.username, "password": creds.password})),
            )
            .await;
        assert_eq!(status, 200, "{body}");
        body["token"].as_str().unwrap().to_owned()
    }

    pub async fn admin_token(&self) -> String {
        self.login(&self.admin).await
    }

    pub async fn add_candidate(&self, admin: &str, first: &str, last: &str) -> Credentials {
        let (status, body) = self
            .json(
                Method::POST,
                "/api/admin/users",
                Some(admin),
                Some(serde_json::json!({"first_name": first, "last_name": last})),
            )
            .await;
        assert_eq!(status, 201, "{body}");
        serde_json::from_value(body).unwrap()
    }

    /// The answer key of a question, read from the server's own store.
    pub fn key_of(&self, id: &str) -> u32 {
        self.state
            .store()
            .get_question(&id.into())
            .expect("question on form comes from the bank")
            .correct_index
    }
}

/// Every object key anywhere in a JSON value.
pub fn keys(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                out.push(k.clone());
                keys(x, out);
            }
        }
        Value::Array(a) => a.iter().for_each(|x| keys(x, out)),
        _ => {}
    }
}

/// True when no key in the value names an answer key.
pub fn keyless(v: &Value) -> bool {
    let mut ks = vec![];
    keys(v, &mut ks);
    const KEY_FIELDS: [&str; 6] = [
        "correct_index",
        "correct",
        "correct_choice",
        "answer_key",
        "key",
        "verdict",
    ];
    !ks.iter()
        .any(|k| KEY_FIELDS.contains(&k.to_lowercase().as_str()))
}
