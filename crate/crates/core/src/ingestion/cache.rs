use std::collections::HashMap;
use std::sync::RwLock;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub fingerprint: String,
    pub interest: String,
}

impl CacheKey {
    pub fn new(fingerprint: impl Into<String>, interest: impl Into<String>) -> Self {
        Self {
            fingerprint: fingerprint.into(),
            interest: interest.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub key: CacheKey,
    pub value: u64,
    pub fetched_at: Instant,
}

impl CacheEntry {
    pub fn is_expired(&self, now: Instant, ttl: Duration) -> bool {
        now.saturating_duration_since(self.fetched_at) > ttl
    }
}

/// Audience counts keyed by population fingerprint and interest id.
/// Safe to share between fetch workers.
#[derive(Debug)]
pub struct AudienceCache {
    ttl: Duration,
    entries: RwLock<HashMap<CacheKey, CacheEntry>>,
}

impl AudienceCache {
    pub fn new(ttl: Duration) -> Self {
        Self {
            ttl,
            entries: RwLock::new(HashMap::new()),
        }
    }

    pub fn get(&self, key: &CacheKey, now: Instant) -> Option<u64> {
        let entries = self.entries.read().unwrap();
        entries
            .get(key)
            .filter(|e| !e.is_expired(now, self.ttl))
            .map(|e| e.value)
    }

    pub fn insert(&self, key: CacheKey, value: u64, fetched_at: Instant) {
        let entry = CacheEntry {
            key: key.clone(),
            value,
            fetched_at,
        };
        self.entries.write().unwrap().insert(key, entry);
    }

    /// Drops expired entries.
    pub fn purge(&self, now: Instant) {
        let ttl = self.ttl;
        self.entries
            .write()
            .unwrap()
            .retain(|_, e| !e.is_expired(now, ttl));
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
