use std::time::Duration;

use assim_core::ingestion::rate_limit::max_in_any_window;
use assim_core::ingestion::{
    fetch_audience, AudienceProvider, MockBehavior, MockProvider, ProviderConfig, UreqTransport,
};
use assim_core::{fixtures, AudienceTable, Error, InterestId};

fn interests(table: &AudienceTable) -> Vec<InterestId> {
    table
        .iter()
        .map(|(id, name, _)| InterestId::new(id, name))
        .collect()
}

fn quick(url: &str) -> ProviderConfig {
    ProviderConfig {
        backoff_base_ms: 1,
        ..ProviderConfig::new(url)
    }
}

fn client(config: ProviderConfig) -> AudienceProvider<UreqTransport> {
    AudienceProvider::new(config, UreqTransport::new(Duration::from_secs(5))).unwrap()
}

#[test]
fn fetches_every_population_by_fingerprint() {
    let (dest, target, home) = fixtures::worked_example();
    let mock = MockProvider::start(
        &[dest.clone(), target.clone(), home.clone()],
        MockBehavior::Serve,
    )
    .unwrap();
    for table in [&dest, &target, &home] {
        let got =
            fetch_audience(&quick(mock.url()), table.population(), &interests(table)).unwrap();
        assert_eq!(&got, table);
    }
    assert_eq!(mock.request_count(), 15);
}

#[test]
fn cached_counts_skip_the_network() {
    let (dest, _, _) = fixtures::worked_example();
    let mock = MockProvider::start(std::slice::from_ref(&dest), MockBehavior::Serve).unwrap();
    let provider = client(quick(mock.url()));
    let ids = interests(&dest);
    provider.fetch_audience(dest.population(), &ids).unwrap();
    assert_eq!(mock.request_count(), 5);
    let again = provider
        .fetch_audience(dest.population(), &ids[1..3])
        .unwrap();
    assert_eq!(mock.request_count(), 5);
    assert_eq!(again.len(), 2);
}

#[test]
fn expired_cache_refetches() {
    let (dest, _, _) = fixtures::worked_example();
    let mock = MockProvider::start(std::slice::from_ref(&dest), MockBehavior::Serve).unwrap();
    let provider = client(ProviderConfig {
        cache_ttl_secs: 0.01,
        ..quick(mock.url())
    });
    let ids = interests(&dest);
    provider.fetch_audience(dest.population(), &ids).unwrap();
    std::thread::sleep(Duration::from_millis(30));
    provider.fetch_audience(dest.population(), &ids).unwrap();
    assert_eq!(mock.request_count(), 10);
}

#[test]
fn transient_failures_are_retried() {
    let (dest, _, _) = fixtures::worked_example();
    let mock =
        MockProvider::start(std::slice::from_ref(&dest), MockBehavior::FailFirst(2)).unwrap();
    let provider = client(ProviderConfig {
        max_retries: 2,
        max_concurrency: 1,
        ..quick(mock.url())
    });
    let got = provider
        .fetch_audience(dest.population(), &interests(&dest))
        .unwrap();
    assert_eq!(got, dest);
    assert_eq!(mock.request_count(), 7);
}

#[test]
fn server_errors_exhaust_retries() {
    let mock = MockProvider::start(&[], MockBehavior::AlwaysStatus(503)).unwrap();
    let provider = client(ProviderConfig {
        max_retries: 2,
        ..quick(mock.url())
    });
    let err = provider
        .fetch_audience(
            &fixtures::germany_non_expats(),
            &[InterestId::new("berlin", "Berlin")],
        )
        .unwrap_err();
    assert!(
        matches!(err, Error::ProviderUnavailable { retries: 2, .. }),
        "{err}"
    );
    assert_eq!(mock.request_count(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let mock = MockProvider::start(&[], MockBehavior::AlwaysStatus(403)).unwrap();
    let provider = client(ProviderConfig {
        max_retries: 5,
        ..quick(mock.url())
    });
    let err = provider
        .fetch_audience(
            &fixtures::germany_non_expats(),
            &[InterestId::new("berlin", "Berlin")],
        )
        .unwrap_err();
    assert_eq!(err.code(), "ContractViolation");
    assert_eq!(mock.request_count(), 1);
}

#[test]
fn unknown_interest_is_a_contract_violation() {
    let (dest, _, _) = fixtures::worked_example();
    let mock = MockProvider::start(std::slice::from_ref(&dest), MockBehavior::Serve).unwrap();
    let err = fetch_audience(
        &quick(mock.url()),
        dest.population(),
        &[InterestId::new("no_such_interest", "?")],
    )
    .unwrap_err();
    assert_eq!(err.code(), "ContractViolation");
}

#[test]
fn unreachable_provider_is_unavailable() {
    let url = {
        let mock = MockProvider::start(&[], MockBehavior::Serve).unwrap();
        mock.url().to_owned()
    };
    let err = fetch_audience(
        &ProviderConfig {
            max_retries: 1,
            ..quick(&url)
        },
        &fixtures::germany_non_expats(),
        &[InterestId::new("berlin", "Berlin")],
    )
    .unwrap_err();
    assert!(
        matches!(err, Error::ProviderUnavailable { retries: 1, .. }),
        "{err}"
    );
}

#[test]
fn concurrent_load_stays_under_rate_limit() {
    let population = fixtures::germany_non_expats();
    let truth = AudienceTable::from_counts(
        population.clone(),
        (0..300).map(|i| (InterestId::new(format!("x{i:03}"), format!("x {i}")), i * 3)),
    )
    .unwrap();
    let mock = MockProvider::start(std::slice::from_ref(&truth), MockBehavior::Serve).unwrap();
    let config = ProviderConfig {
        max_requests_per_window: 40,
        window_secs: 0.02,
        max_concurrency: 12,
        ..quick(mock.url())
    };
    let window = config.window();
    let provider = client(config).with_request_trace();
    let got = provider
        .fetch_audience(&population, &interests(&truth))
        .unwrap();
    assert_eq!(got, truth);
    let trace = provider.limiter().trace();
    assert_eq!(trace.len(), 300);
    assert!(max_in_any_window(&trace, window) <= 40);
}
