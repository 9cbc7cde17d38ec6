//! Page fetching behind a trait, so the pipeline never cares whether a
//! body came over the network or out of a test table.
//!
//! [`HttpFetcher`] is deliberately plain: blocking GET, ≤ 5 redirects,
//! a timeout, and per-host politeness (one request in flight per host,
//! with a minimum delay between consecutive requests to the same host).
//! Error variants stay distinct — a scheduler treats a 404 differently
//! from a timeout.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use thiserror::Error;

/// Default request timeout, overridable via `HARVEST_TIMEOUT_SECS`.
pub const DEFAULT_TIMEOUT_SECS: u64 = 30;
/// Default user agent, overridable via `HARVEST_USER_AGENT`.
pub const DEFAULT_USER_AGENT: &str = "bartree-harvest/1.0";
/// Minimum default pause between two requests to the same host.
pub const DEFAULT_POLITENESS: Duration = Duration::from_secs(1);
const MAX_REDIRECTS: usize = 5;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FetchError {
    #[error("network error fetching {url}: {reason}")]
    Network { url: String, reason: String },
    #[error("HTTP status {status} fetching {url}")]
    HttpStatus { url: String, status: u16 },
    #[error("timed out fetching {url} after {seconds}s")]
    Timeout { url: String, seconds: u64 },
}

/// A fetched page body plus where the redirect chain ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchedPage {
    pub final_url: String,
    pub status: u16,
    pub body: String,
}

pub trait Fetcher {
    fn fetch(&self, url: &str) -> Result<FetchedPage, FetchError>;
}

/// Blocking HTTP fetcher with redirect limit, timeout and per-host
/// politeness.
pub struct HttpFetcher {
    client: reqwest::blocking::Client,
    timeout: Duration,
    politeness: Duration,
    /// One lock per host; holding it for the duration of a request gives
    /// the one-in-flight guarantee, the stored instant the spacing.
    hosts: Mutex<HashMap<String, Arc<Mutex<Option<Instant>>>>>,
}

impl HttpFetcher {
    /// Reads `HARVEST_TIMEOUT_SECS` and `HARVEST_USER_AGENT` from the
    /// environment, falling back to the defaults.
    pub fn from_env() -> Self {
        let timeout = std::env::var("HARVEST_TIMEOUT_SECS")
            .ok()
            .and_then(|v| v.parse::<u64>().ok())
            .unwrap_or(DEFAULT_TIMEOUT_SECS);
        let user_agent = std::env::var("HARVEST_USER_AGENT")
            .unwrap_or_else(|_| DEFAULT_USER_AGENT.to_string());
        Self::with_settings(Duration::from_secs(timeout), &user_agent, DEFAULT_POLITENESS)
    }

    pub fn with_settings(timeout: Duration, user_agent: &str, politeness: Duration) -> Self {
        let client = reqwest::blocking::Client::builder()
            .user_agent(user_agent)
            .redirect(reqwest::redirect::Policy::limited(MAX_REDIRECTS))
            .timeout(timeout)
            .build()
            .expect("static client configuration");
        HttpFetcher { client, timeout, politeness, hosts: Mutex::new(HashMap::new()) }
    }

    fn host_slot(&self, url: &str) -> Arc<Mutex<Option<Instant>>> {
        let host = url::Url::parse(url)
            .ok()
            .and_then(|u| u.host_str().map(|h| h.to_string()))
            .unwrap_or_else(|| url.to_string());
        let mut map = self.hosts.lock().expect("host map lock");
        map.entry(host).or_default().clone()
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, url: &str) -> Result<FetchedPage, FetchError> {
        let slot = self.host_slot(url);
        let mut last = slot.lock().expect("host slot lock");
        if let Some(prev) = *last {
            let since = prev.elapsed();
            if since < self.politeness {
                std::thread::sleep(self.politeness - since);
            }
        }
        let result = (|| {
            let response = self.client.get(url).send().map_err(|e| {
                if e.is_timeout() {
                    FetchError::Timeout { url: url.to_string(), seconds: self.timeout.as_secs() }
                } else {
                    FetchError::Network { url: url.to_string(), reason: e.to_string() }
                }
            })?;
            let status = response.status();
            let final_url = response.url().to_string();
            if !status.is_success() {
                return Err(FetchError::HttpStatus { url: final_url, status: status.as_u16() });
            }
            let body = response.text().map_err(|e| {
                if e.is_timeout() {
                    FetchError::Timeout { url: url.to_string(), seconds: self.timeout.as_secs() }
                } else {
                    FetchError::Network { url: url.to_string(), reason: e.to_string() }
                }
            })?;
            Ok(FetchedPage { final_url, status: status.as_u16(), body })
        })();
        *last = Some(Instant::now());
        result
    }
}

/// In-memory fetcher for tests and benchmarks: URL → canned body or
/// canned error. Records every URL it is asked for.
#[derive(Default)]
pub struct MemoryFetcher {
    pages: Mutex<HashMap<String, Result<String, FetchError>>>,
    requests: Mutex<Vec<String>>,
}

impl MemoryFetcher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&self, url: &str, body: &str) {
        self.pages
            .lock()
            .expect("page map lock")
            .insert(url.to_string(), Ok(body.to_string()));
    }

    pub fn insert_error(&self, url: &str, err: FetchError) {
        self.pages.lock().expect("page map lock").insert(url.to_string(), Err(err));
    }

    pub fn remove(&self, url: &str) {
        self.pages.lock().expect("page map lock").remove(url);
    }

    /// Every URL fetched so far, in order.
    pub fn requests(&self) -> Vec<String> {
        self.requests.lock().expect("request log lock").clone()
    }
}

impl Fetcher for MemoryFetcher {
    fn fetch(&self, url: &str) -> Result<FetchedPage, FetchError> {
        self.requests.lock().expect("request log lock").push(url.to_string());
        match self.pages.lock().expect("page map lock").get(url) {
            Some(Ok(body)) => Ok(FetchedPage {
                final_url: url.to_string(),
                status: 200,
                body: body.clone(),
            }),
            Some(Err(e)) => Err(e.clone()),
            None => Err(FetchError::Network {
                url: url.to_string(),
                reason: "no page registered for this URL".to_string(),
            }),
        }
    }
}
