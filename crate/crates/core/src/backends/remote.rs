//! HTTP adapter for external model services.
//!
//! Every call is `POST <endpoint>` with a JSON body tagged by `op`; the reply
//! is `{"output": ...}`:
//!
//! | op                | request fields                    | output                  |
//! |-------------------|-----------------------------------|-------------------------|
//! | `translate`       | `text`, `src`, `tgt`              | string                  |
//! | `generate_qa`     | `caption`                         | `[[question, answer]]`  |
//! | `answer`          | `question`, `context`             | string                  |
//! | `direct_generate` | `caption`, `target_answer`, `lang`| `[question]`            |
//!
//! Transport errors and 5xx responses are retried with exponential backoff;
//! 4xx responses fail at once.

use std::net::{TcpStream, ToSocketAddrs};
use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::Url;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{
    BackendError, BackendResult, Capability, DirectQgRequest, DirectQuestionGenerator, QgOutput, QuestionAnswerer,
    QuestionGenerator, RemoteConfig, Translator,
};
use crate::lang::LanguageCode;

#[derive(Debug)]
pub struct RemoteBackend {
    url: Url,
    client: Client,
    config: RemoteConfig,
}

#[derive(Deserialize)]
struct Reply<T> {
    output: T,
}

impl RemoteBackend {
    pub fn new(endpoint: &str, config: &RemoteConfig) -> BackendResult<Self> {
        let url = Url::parse(endpoint).map_err(|e| BackendError::Config(format!("{endpoint}: {e}")))?;
        if url.host_str().is_none() {
            return Err(BackendError::Config(format!("{endpoint}: missing host")));
        }
        let client = Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(RemoteBackend {
            url,
            client,
            config: config.clone(),
        })
    }

    pub fn endpoint(&self) -> &str {
        self.url.as_str()
    }

    /// TCP connect to the endpoint's host and port.
    pub fn health_check(&self) -> BackendResult<()> {
        let unreachable = |message: String| BackendError::Unreachable {
            endpoint: self.url.to_string(),
            message,
        };
        let host = self.url.host_str().unwrap_or_default();
        let port = self.url.port_or_known_default().unwrap_or(80);
        let addrs = (host, port).to_socket_addrs().map_err(|e| unreachable(e.to_string()))?;
        let timeout = Duration::from_secs(self.config.timeout_secs.clamp(1, 5));
        let mut last = "no address".to_string();
        for addr in addrs {
            match TcpStream::connect_timeout(&addr, timeout) {
                Ok(_) => return Ok(()),
                Err(e) => last = e.to_string(),
            }
        }
        Err(unreachable(last))
    }

    fn call<T: DeserializeOwned>(&self, body: Value) -> BackendResult<T> {
        let backend = self.url.to_string();
        let mut attempt = 0;
        loop {
            let err = match self.client.post(self.url.clone()).json(&body).send() {
                Ok(resp) if resp.status().is_success() => {
                    let text = resp.text().map_err(|e| BackendError::Transport {
                        backend: backend.clone(),
                        message: e.to_string(),
                    })?;
                    return serde_json::from_str::<Reply<T>>(&text).map(|r| r.output).map_err(|e| {
                        BackendError::Protocol {
                            backend,
                            message: e.to_string(),
                        }
                    });
                }
                Ok(resp) => {
                    let status = resp.status().as_u16();
                    let message = resp.text().unwrap_or_default();
                    let err = BackendError::Status {
                        backend: backend.clone(),
                        status,
                        message,
                    };
                    if status < 500 {
                        return Err(err);
                    }
                    err
                }
                Err(e) => BackendError::Transport {
                    backend: backend.clone(),
                    message: e.to_string(),
                },
            };
            if attempt >= self.config.retries {
                return Err(err);
            }
            log::warn!("{err}; retry {} of {}", attempt + 1, self.config.retries);
            thread::sleep(Duration::from_millis(
                self.config.backoff_ms.saturating_mul(1 << attempt.min(16)),
            ));
            attempt += 1;
        }
    }

    fn capability_named(&self, op: &str) -> Capability {
        Capability {
            name: format!("remote:{op}:{}", self.url),
            concurrent_safe: self.config.concurrent_safe,
            pairs: None,
        }
    }
}

impl Translator for RemoteBackend {
    fn capability(&self) -> Capability {
        self.capability_named("translate")
    }

    fn translate(&self, text: &str, src: LanguageCode, tgt: LanguageCode) -> BackendResult<String> {
        if src == tgt {
            return Ok(text.to_string());
        }
        let out: String = self.call(json!({"op": "translate", "text": text, "src": src, "tgt": tgt}))?;
        if out.trim().is_empty() && !text.trim().is_empty() {
            return Err(BackendError::Protocol {
                backend: self.url.to_string(),
                message: format!("empty translation {src}->{tgt}"),
            });
        }
        Ok(out)
    }
}

impl QuestionGenerator for RemoteBackend {
    fn capability(&self) -> Capability {
        self.capability_named("generate_qa")
    }

    fn generate_qa(&self, english_caption: &str) -> BackendResult<QgOutput> {
        let pairs: Vec<(String, String)> = self.call(json!({"op": "generate_qa", "caption": english_caption}))?;
        Ok(QgOutput::from_pairs(pairs))
    }
}

impl QuestionAnswerer for RemoteBackend {
    fn capability(&self) -> Capability {
        self.capability_named("answer")
    }

    fn answer_from_context(&self, question: &str, context: &str) -> BackendResult<String> {
        self.call(json!({"op": "answer", "question": question, "context": context}))
    }
}

impl DirectQuestionGenerator for RemoteBackend {
    fn capability(&self) -> Capability {
        self.capability_named("direct_generate")
    }

    fn direct_generate(&self, request: &DirectQgRequest) -> BackendResult<Vec<String>> {
        self.call(json!({
            "op": "direct_generate",
            "caption": request.caption,
            "target_answer": request.target_answer,
            "lang": request.lang,
        }))
    }
}
