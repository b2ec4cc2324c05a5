//! Getting audience tables in and out: CSV files and a provider client.

pub mod cache;
mod csv_io;
pub mod mock;
pub mod provider;
pub mod rate_limit;

pub use cache::{AudienceCache, CacheEntry, CacheKey};
pub use csv_io::{
    load_audience_csv, read_audience_csv, write_audience, write_audience_csv, AUDIENCE_HEADER,
};
pub use mock::{MockBehavior, MockProvider};
pub use provider::{
    fetch_audience, AudienceProvider, HttpResponse, ProviderConfig, Transport, UreqTransport,
};
pub use rate_limit::RateLimiter;
