//! Client for an audience-estimate provider.
//!
//! Wire contract: `GET {base_url}/audience?pop={fingerprint}&interest={id}`
//! answered with status 200 and body `{"audience_size": <integer>}`.
//! Status 429, any 5xx and transport failures are retried with exponential
//! backoff; every other non-200 status or a malformed body is a contract
//! violation and fails immediately.

use std::io::Read;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use url::Url;

use super::cache::{AudienceCache, CacheKey};
use super::rate_limit::RateLimiter;
use crate::error::{Error, Result};
use crate::population::PopulationSpec;
use crate::table::{AudienceTable, InterestId, MAX_AUDIENCE};

const MAX_BACKOFF: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub base_url: String,
    pub max_requests_per_window: u32,
    pub window_secs: f64,
    pub max_retries: u32,
    pub cache_ttl_secs: f64,
    /// First retry delay; doubles on each further retry.
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
}

fn default_backoff_ms() -> u64 {
    200
}

fn default_concurrency() -> usize {
    4
}

impl ProviderConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            max_requests_per_window: 60,
            window_secs: 60.0,
            max_retries: 3,
            cache_ttl_secs: 3600.0,
            backoff_base_ms: default_backoff_ms(),
            max_concurrency: default_concurrency(),
        }
    }

    pub fn validate(&self) -> Result<Url> {
        let invalid = |m: String| Err(Error::InvalidConfig(m));
        if self.max_requests_per_window < 1 {
            return invalid("max_requests_per_window must be at least 1".into());
        }
        if !(self.window_secs > 0.0 && self.window_secs.is_finite()) {
            return invalid(format!(
                "window_secs must be positive, got {}",
                self.window_secs
            ));
        }
        if !(self.cache_ttl_secs >= 0.0 && self.cache_ttl_secs.is_finite()) {
            return invalid(format!(
                "cache_ttl_secs must be non-negative, got {}",
                self.cache_ttl_secs
            ));
        }
        if self.max_concurrency < 1 {
            return invalid("max_concurrency must be at least 1".into());
        }
        let url = Url::parse(&self.base_url)
            .map_err(|e| Error::InvalidConfig(format!("base_url {}: {e}", self.base_url)))?;
        if url.cannot_be_a_base() {
            return invalid(format!("base_url {} cannot be a base", self.base_url));
        }
        Ok(url)
    }

    pub fn window(&self) -> Duration {
        Duration::from_secs_f64(self.window_secs)
    }

    pub fn cache_ttl(&self) -> Duration {
        Duration::from_secs_f64(self.cache_ttl_secs)
    }

    /// Delay before retry number `retry` (0-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry).unwrap_or(u64::MAX);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor)).min(MAX_BACKOFF)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// One HTTP GET. Errors are transport-level failures (connection refused,
/// timeouts); HTTP error statuses are returned as responses.
pub trait Transport: Send + Sync {
    fn get(&self, url: &Url) -> std::result::Result<HttpResponse, String>;
}

#[derive(Debug, Clone)]
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { agent }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(30))
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &Url) -> std::result::Result<HttpResponse, String> {
        let mut response = self
            .agent
            .get(url.as_str())
            .call()
            .map_err(|e| e.to_string())?;
        let status = response.status().as_u16();
        let mut body = String::new();
        response
            .body_mut()
            .as_reader()
            .read_to_string(&mut body)
            .map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AudienceBody {
    audience_size: u64,
}

pub fn audience_url(base: &Url, fingerprint: &str, interest: &str) -> Url {
    let mut url = base.clone();
    url.path_segments_mut()
        .expect("validated base url")
        .pop_if_empty()
        .push("audience");
    url.query_pairs_mut()
        .clear()
        .append_pair("pop", fingerprint)
        .append_pair("interest", interest);
    url
}

enum Attempt {
    Done(u64),
    Transient(String),
}

/// Rate-limited, caching, retrying client over a [`Transport`].
pub struct AudienceProvider<T> {
    config: ProviderConfig,
    base_url: Url,
    transport: T,
    limiter: RateLimiter,
    cache: AudienceCache,
    requests: AtomicU64,
}

impl<T: Transport> AudienceProvider<T> {
    pub fn new(config: ProviderConfig, transport: T) -> Result<Self> {
        let base_url = config.validate()?;
        Ok(Self {
            limiter: RateLimiter::new(config.max_requests_per_window as usize, config.window()),
            cache: AudienceCache::new(config.cache_ttl()),
            config,
            base_url,
            transport,
            requests: AtomicU64::new(0),
        })
    }

    /// Records every rate-limiter grant; see [`AudienceProvider::limiter`].
    pub fn with_request_trace(mut self) -> Self {
        self.limiter = RateLimiter::new(
            self.config.max_requests_per_window as usize,
            self.config.window(),
        )
        .with_trace();
        self
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    pub fn limiter(&self) -> &RateLimiter {
        &self.limiter
    }

    pub fn cache(&self) -> &AudienceCache {
        &self.cache
    }

    /// Requests issued so far, retries included.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    /// One count per requested interest, or an error; never a partial table.
    pub fn fetch_audience(
        &self,
        population: &PopulationSpec,
        interests: &[InterestId],
    ) -> Result<AudienceTable> {
        population.validate()?;
        if interests.is_empty() {
            return Err(Error::EmptyTable);
        }
        let mut seen = std::collections::HashSet::new();
        for interest in interests {
            if interest.id.is_empty() {
                return Err(Error::EmptyInterestId);
            }
            if !seen.insert(interest.id.as_str()) {
                return Err(Error::DuplicateInterest(interest.id.clone()));
            }
        }

        let fingerprint = population.fingerprint();
        let now = Instant::now();
        let mut counts: Vec<Option<u64>> = interests
            .iter()
            .map(|i| {
                self.cache
                    .get(&CacheKey::new(fingerprint.as_str(), i.id.as_str()), now)
            })
            .collect();
        let missing: Vec<usize> = (0..interests.len())
            .filter(|&i| counts[i].is_none())
            .collect();

        if !missing.is_empty() {
            let next = AtomicUsize::new(0);
            let failed = AtomicBool::new(false);
            let results: Mutex<Vec<(usize, Result<u64>)>> =
                Mutex::new(Vec::with_capacity(missing.len()));
            let workers = self.config.max_concurrency.min(missing.len());
            thread::scope(|s| {
                for _ in 0..workers {
                    s.spawn(|| loop {
                        if failed.load(Ordering::SeqCst) {
                            break;
                        }
                        let slot = next.fetch_add(1, Ordering::SeqCst);
                        let Some(&index) = missing.get(slot) else {
                            break;
                        };
                        let result = self.fetch_one(&fingerprint, &interests[index].id);
                        if result.is_err() {
                            failed.store(true, Ordering::SeqCst);
                        }
                        results.lock().unwrap().push((index, result));
                    });
                }
            });
            let mut results = results.into_inner().unwrap();
            results.sort_by_key(|(index, _)| *index);
            for (index, result) in results {
                counts[index] = Some(result?);
            }
        }

        let counts = interests
            .iter()
            .zip(counts)
            .map(|(i, c)| (i.clone(), c.expect("every interest fetched or cached")));
        AudienceTable::from_counts(population.clone(), counts)
    }

    fn fetch_one(&self, fingerprint: &str, interest: &str) -> Result<u64> {
        let url = audience_url(&self.base_url, fingerprint, interest);
        let mut retries = 0;
        loop {
            match self.attempt(&url)? {
                Attempt::Done(value) => {
                    self.cache
                        .insert(CacheKey::new(fingerprint, interest), value, Instant::now());
                    return Ok(value);
                }
                Attempt::Transient(reason) if retries >= self.config.max_retries => {
                    return Err(Error::ProviderUnavailable {
                        interest: interest.to_owned(),
                        retries,
                        last_error: reason,
                    });
                }
                Attempt::Transient(reason) => {
                    let delay = self.config.backoff(retries);
                    log::debug!("{url}: {reason}; retrying in {delay:?}");
                    thread::sleep(delay);
                    retries += 1;
                }
            }
        }
    }

    fn attempt(&self, url: &Url) -> Result<Attempt> {
        self.limiter.acquire();
        self.requests.fetch_add(1, Ordering::SeqCst);
        let response = match self.transport.get(url) {
            Ok(r) => r,
            Err(e) => return Ok(Attempt::Transient(e)),
        };
        match response.status {
            200 => {
                let body: AudienceBody = serde_json::from_str(&response.body).map_err(|e| {
                    Error::ContractViolation(format!("{url}: body {:?}: {e}", response.body))
                })?;
                if body.audience_size > MAX_AUDIENCE {
                    return Err(Error::ContractViolation(format!(
                        "{url}: audience_size {} out of range",
                        body.audience_size
                    )));
                }
                Ok(Attempt::Done(body.audience_size))
            }
            429 | 500..=599 => Ok(Attempt::Transient(format!("status {}", response.status))),
            status => Err(Error::ContractViolation(format!(
                "{url}: unexpected status {status}"
            ))),
        }
    }
}

/// Fetches over HTTP with a fresh client and an empty cache.
pub fn fetch_audience(
    provider: &ProviderConfig,
    population: &PopulationSpec,
    interests: &[InterestId],
) -> Result<AudienceTable> {
    AudienceProvider::new(provider.clone(), UreqTransport::default())?
        .fetch_audience(population, interests)
}
