//! Network-backed constraints: `contentType` and `dimension`.
//!
//! All HTTP goes through the [`Fetcher`] trait so tests can swap in the
//! stubs from [`stub`]. The real implementation is [`HttpFetcher`].

mod http;
mod sniff;
pub mod stub;

use std::collections::HashMap;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;
use url::Url;

pub use http::HttpFetcher;
pub use sniff::{sniff_dimensions, SniffError};

use crate::constraint::Verdict;
use crate::schema::DimensionBounds;
use crate::value::AtomicValue;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
pub const SNIFF_PREFIX: usize = 64 * 1024;
pub const MAX_REDIRECTS: usize = 5;
pub const USER_AGENT: &str = concat!("bibcheck/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Head,
    Get,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchRequest {
    pub url: String,
    pub method: Method,
    /// Bytes of body to read at most; irrelevant for HEAD.
    pub max_body: usize,
    pub timeout: Duration,
}

/// One HTTP exchange, without redirect handling.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FetchResponse {
    pub status: u16,
    pub content_type: Option<String>,
    pub location: Option<String>,
    pub body: Vec<u8>,
}

pub trait Fetcher: Send + Sync {
    fn send(&self, request: &FetchRequest) -> Result<FetchResponse, NetError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("invalid URL {0:?}")]
    InvalidUrl(String),
    #[error("timed out")]
    Timeout,
    #[error("connection failed: {0}")]
    Connection(String),
    #[error("more than {MAX_REDIRECTS} redirects")]
    TooManyRedirects,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchResult {
    pub final_url: String,
    pub http_status: u16,
    /// Lowercased `type/subtype`, parameters stripped.
    pub content_type: Option<String>,
    pub leading_bytes: Vec<u8>,
}

/// Lowercases a Content-Type header value and strips its parameters.
pub fn normalize_content_type(header: &str) -> Option<String> {
    let essence = header.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
    let (ty, sub) = essence.split_once('/')?;
    let token = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_graphic() && b != b'/');
    (token(ty) && token(sub)).then_some(essence)
}

fn parse_http_url(text: &str) -> Result<Url, NetError> {
    match Url::parse(text) {
        Ok(url) if matches!(url.scheme(), "http" | "https") && url.has_host() => Ok(url),
        _ => Err(NetError::InvalidUrl(text.to_owned())),
    }
}

fn send_within(
    fetcher: &Arc<dyn Fetcher>,
    request: FetchRequest,
    deadline: Instant,
) -> Result<FetchResponse, NetError> {
    let remaining = deadline.saturating_duration_since(Instant::now());
    if remaining.is_zero() {
        return Err(NetError::Timeout);
    }
    let (tx, rx) = mpsc::channel();
    let fetcher = Arc::clone(fetcher);
    let request = FetchRequest {
        timeout: remaining,
        ..request
    };
    thread::spawn(move || {
        let _ = tx.send(fetcher.send(&request));
    });
    match rx.recv_timeout(remaining) {
        Ok(result) => result,
        Err(_) => Err(NetError::Timeout),
    }
}

/// Fetches `url`, following up to five redirects, within `timeout` overall.
///
/// With `want_body` the request is a GET reading at most
/// [`SNIFF_PREFIX`] bytes; otherwise HEAD, falling back to GET when the
/// server rejects the method with 405 or 501.
pub fn fetch(
    url: &str,
    timeout: Duration,
    fetcher: &Arc<dyn Fetcher>,
    want_body: bool,
) -> Result<FetchResult, NetError> {
    let deadline = Instant::now() + timeout;
    let mut current = parse_http_url(url)?;
    let mut redirects = 0;
    loop {
        let get = |url: &Url| FetchRequest {
            url: url.to_string(),
            method: Method::Get,
            max_body: SNIFF_PREFIX,
            timeout,
        };
        let mut response = if want_body {
            send_within(fetcher, get(&current), deadline)?
        } else {
            let head = FetchRequest {
                method: Method::Head,
                max_body: 0,
                ..get(&current)
            };
            let r = send_within(fetcher, head, deadline)?;
            if matches!(r.status, 405 | 501) {
                send_within(fetcher, get(&current), deadline)?
            } else {
                r
            }
        };
        if (300..400).contains(&response.status) {
            if let Some(location) = response.location.as_deref() {
                if redirects == MAX_REDIRECTS {
                    return Err(NetError::TooManyRedirects);
                }
                redirects += 1;
                current = current
                    .join(location)
                    .ok()
                    .filter(|u| matches!(u.scheme(), "http" | "https"))
                    .ok_or_else(|| NetError::InvalidUrl(location.to_owned()))?;
                continue;
            }
        }
        response.body.truncate(SNIFF_PREFIX);
        return Ok(FetchResult {
            final_url: current.to_string(),
            http_status: response.status,
            content_type: response.content_type.as_deref().and_then(normalize_content_type),
            leading_bytes: response.body,
        });
    }
}

/// Header-only fetch.
pub fn fetch_head(url: &str, timeout: Duration, fetcher: &Arc<dyn Fetcher>) -> Result<FetchResult, NetError> {
    fetch(url, timeout, fetcher, false)
}

fn success(result: &FetchResult) -> Result<(), String> {
    if (200..300).contains(&result.http_status) {
        Ok(())
    } else {
        Err(format!("HTTP status {}", result.http_status))
    }
}

fn check_content_type(result: &FetchResult, allowed: &[String]) -> Result<(), String> {
    success(result)?;
    match &result.content_type {
        Some(ct) if allowed.iter().any(|a| a.eq_ignore_ascii_case(ct)) => Ok(()),
        Some(ct) => Err(format!("content type {ct} is not allowed")),
        None => Err("no content type".to_owned()),
    }
}

/// Checks every stated bound; shortside and longside are orientation-free.
pub fn dimension_fits(width: u32, height: u32, bounds: &DimensionBounds) -> bool {
    let measures = [width, height, width.min(height), width.max(height)];
    bounds
        .pairs()
        .iter()
        .zip(measures)
        .all(|((_, lo, hi), m)| lo.is_none_or(|lo| m >= lo) && hi.is_none_or(|hi| m <= hi))
}

fn check_dimension(result: &FetchResult, bounds: &DimensionBounds) -> Result<(), String> {
    success(result)?;
    let (w, h) = sniff_dimensions(&result.leading_bytes).map_err(|e| e.to_string())?;
    if dimension_fits(w, h, bounds) {
        Ok(())
    } else {
        Err(format!("{w}x{h} is out of bounds"))
    }
}

fn all_instances(values: &[AtomicValue], outcomes: Vec<Result<(), String>>) -> Verdict {
    if values.is_empty() {
        return Verdict::na();
    }
    match values.iter().zip(outcomes).find_map(|(v, r)| r.err().map(|e| (v, e))) {
        Some((v, reason)) => Verdict::fail(format!("{}: {reason}", v.raw)),
        None => Verdict::pass(),
    }
}

/// Free-standing `contentType` evaluation without caching.
pub fn eval_content_type(
    values: &[AtomicValue],
    allowed: &[String],
    fetcher: &Arc<dyn Fetcher>,
    timeout: Duration,
) -> Verdict {
    let outcomes = values
        .iter()
        .map(|v| {
            fetch_head(&v.raw, timeout, fetcher)
                .map_err(|e| e.to_string())
                .and_then(|r| check_content_type(&r, allowed))
        })
        .collect();
    all_instances(values, outcomes)
}

/// Free-standing `dimension` evaluation without caching.
pub fn eval_dimension(
    values: &[AtomicValue],
    bounds: &DimensionBounds,
    fetcher: &Arc<dyn Fetcher>,
    timeout: Duration,
) -> Verdict {
    let outcomes = values
        .iter()
        .map(|v| {
            fetch(&v.raw, timeout, fetcher, true)
                .map_err(|e| e.to_string())
                .and_then(|r| check_dimension(&r, bounds))
        })
        .collect();
    all_instances(values, outcomes)
}

type CacheKey = (String, bool);

/// Fetcher plus run-wide settings and a per-URL result cache. Failed
/// fetches are cached too, so nothing is retried within a run.
pub struct NetChecker {
    fetcher: Arc<dyn Fetcher>,
    timeout: Duration,
    parallelism: usize,
    cache: Mutex<HashMap<CacheKey, Result<FetchResult, NetError>>>,
}

impl NetChecker {
    pub fn new(fetcher: Arc<dyn Fetcher>) -> Self {
        NetChecker {
            fetcher,
            timeout: DEFAULT_TIMEOUT,
            parallelism: 4,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism.max(1);
        self
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    fn cached_fetch(&self, url: &str, want_body: bool) -> Result<FetchResult, NetError> {
        let key = (url.to_owned(), want_body);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let result = fetch(url, self.timeout, &self.fetcher, want_body);
        self.cache.lock().unwrap().entry(key).or_insert(result).clone()
    }

    /// Fetches every distinct value, up to `parallelism` at a time, and
    /// returns one result per value in input order.
    fn fetch_all(&self, values: &[AtomicValue], want_body: bool) -> Vec<Result<FetchResult, NetError>> {
        let mut distinct: Vec<&str> = Vec::new();
        for v in values {
            if !distinct.contains(&v.raw.as_str()) {
                distinct.push(&v.raw);
            }
        }
        let mut fetched = HashMap::new();
        for chunk in distinct.chunks(self.parallelism) {
            if let [url] = chunk {
                fetched.insert(*url, self.cached_fetch(url, want_body));
                continue;
            }
            thread::scope(|s| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|&url| (url, s.spawn(move || self.cached_fetch(url, want_body))))
                    .collect();
                for (url, h) in handles {
                    fetched.insert(url, h.join().expect("fetch thread panicked"));
                }
            });
        }
        values.iter().map(|v| fetched[v.raw.as_str()].clone()).collect()
    }

    pub fn eval_content_type(&self, values: &[AtomicValue], allowed: &[String]) -> Verdict {
        let outcomes = self
            .fetch_all(values, false)
            .into_iter()
            .map(|r| {
                r.map_err(|e| e.to_string())
                    .and_then(|r| check_content_type(&r, allowed))
            })
            .collect();
        all_instances(values, outcomes)
    }

    pub fn eval_dimension(&self, values: &[AtomicValue], bounds: &DimensionBounds) -> Verdict {
        let outcomes = self
            .fetch_all(values, true)
            .into_iter()
            .map(|r| r.map_err(|e| e.to_string()).and_then(|r| check_dimension(&r, bounds)))
            .collect();
        all_instances(values, outcomes)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::stub::{StubFetcher, StubResponse};
    use super::*;
    use crate::constraint::Status;

    fn png(w: u32, h: u32) -> Vec<u8> {
        let mut b = b"\x89PNG\r\n\x1a\n\x00\x00\x00\x0dIHDR".to_vec();
        b.extend_from_slice(&w.to_be_bytes());
        b.extend_from_slice(&h.to_be_bytes());
        b
    }

    fn stub() -> Arc<StubFetcher> {
        Arc::new(
            StubFetcher::new()
                .with("http://img.test/a.png", StubResponse::ok("image/png", png(10, 20)))
                .with("http://img.test/b.png", StubResponse::ok("image/png", png(20, 10)))
                .with(
                    "http://img.test/page",
                    StubResponse::ok("text/html; charset=utf-8", b"<html>".to_vec()),
                )
                .with("http://img.test/photo", StubResponse::ok("Image/JPEG", Vec::new()))
                .with(
                    "http://img.test/slow",
                    StubResponse::ok("image/png", png(1, 1)).delayed(Duration::from_millis(500)),
                )
                .with("http://img.test/moved", StubResponse::redirect("/a.png"))
                .with("http://img.test/loop", StubResponse::redirect("/loop"))
                .with(
                    "http://img.test/nohead",
                    StubResponse::ok("image/gif", Vec::new()).rejecting_head(),
                ),
        )
    }

    fn vals(raws: &[&str]) -> Vec<AtomicValue> {
        raws.iter().map(|&r| AtomicValue::from(r)).collect()
    }

    #[test]
    fn head_fetch_normalizes_content_type() {
        let f: Arc<dyn Fetcher> = stub();
        let r = fetch_head("http://img.test/a.png", DEFAULT_TIMEOUT, &f).unwrap();
        assert_eq!(r.content_type.as_deref(), Some("image/png"));
        let r = fetch_head("http://img.test/page", DEFAULT_TIMEOUT, &f).unwrap();
        assert_eq!(r.content_type.as_deref(), Some("text/html"));
    }

    #[test]
    fn invalid_urls_and_timeouts() {
        let f: Arc<dyn Fetcher> = stub();
        assert_eq!(
            fetch_head("notaurl", DEFAULT_TIMEOUT, &f),
            Err(NetError::InvalidUrl("notaurl".into()))
        );
        assert!(matches!(
            fetch_head("ftp://img.test/x", DEFAULT_TIMEOUT, &f),
            Err(NetError::InvalidUrl(_))
        ));
        assert_eq!(
            fetch_head("http://img.test/slow", Duration::from_millis(50), &f),
            Err(NetError::Timeout)
        );
    }

    #[test]
    fn redirects_are_followed_and_bounded() {
        let s = stub();
        let f: Arc<dyn Fetcher> = s.clone();
        let r = fetch_head("http://img.test/moved", DEFAULT_TIMEOUT, &f).unwrap();
        assert_eq!(r.final_url, "http://img.test/a.png");
        assert_eq!(
            fetch_head("http://img.test/loop", DEFAULT_TIMEOUT, &f),
            Err(NetError::TooManyRedirects)
        );
        assert_eq!(
            s.requests().iter().filter(|r| r.url == "http://img.test/loop").count(),
            MAX_REDIRECTS + 1
        );
    }

    #[test]
    fn rejected_head_falls_back_to_get() {
        let s = stub();
        let f: Arc<dyn Fetcher> = s.clone();
        let r = fetch_head("http://img.test/nohead", DEFAULT_TIMEOUT, &f).unwrap();
        assert_eq!(r.content_type.as_deref(), Some("image/gif"));
        let methods: Vec<Method> = s.requests().iter().map(|r| r.method).collect();
        assert_eq!(methods, [Method::Head, Method::Get]);
        assert!(s.requests()[1].max_body <= SNIFF_PREFIX);
    }

    #[test]
    fn content_type_examples() {
        let f: Arc<dyn Fetcher> = stub();
        let allowed = vec!["image/jpeg".to_string(), "image/png".to_string()];
        let t = Duration::from_secs(1);
        assert_eq!(
            eval_content_type(&vals(&["http://img.test/photo"]), &allowed, &f, t).status,
            Status::Pass
        );
        let v = eval_content_type(&vals(&["http://img.test/page"]), &["image/png".into()], &f, t);
        assert_eq!(v.status, Status::Fail);
        assert_eq!(eval_content_type(&[], &allowed, &f, t).status, Status::Na);
        let v = eval_content_type(&vals(&["http://img.test/missing"]), &allowed, &f, t);
        assert!(v.detail.unwrap().contains("404"));
    }

    #[test]
    fn dimension_examples() {
        let f: Arc<dyn Fetcher> = stub();
        let t = Duration::from_secs(1);
        let b = DimensionBounds {
            min_shortside: Some(10),
            max_longside: Some(20),
            ..Default::default()
        };
        assert_eq!(
            eval_dimension(&vals(&["http://img.test/a.png"]), &b, &f, t).status,
            Status::Pass
        );
        let w = DimensionBounds {
            min_width: Some(11),
            ..Default::default()
        };
        assert_eq!(
            eval_dimension(&vals(&["http://img.test/a.png"]), &w, &f, t).status,
            Status::Fail
        );
        let s = DimensionBounds {
            min_shortside: Some(10),
            ..Default::default()
        };
        assert_eq!(
            eval_dimension(&vals(&["http://img.test/b.png"]), &s, &f, t).status,
            Status::Pass
        );
        let v = eval_dimension(&vals(&["http://img.test/page"]), &s, &f, t);
        assert!(v.detail.unwrap().contains("unsupported"));
    }

    #[test]
    fn checker_caches_per_url_and_keeps_order() {
        let s = stub();
        let checker = NetChecker::new(s.clone()).with_parallelism(3);
        let urls = vals(&[
            "http://img.test/a.png",
            "http://img.test/page",
            "http://img.test/a.png",
            "http://img.test/b.png",
        ]);
        let v = checker.eval_content_type(&urls, &["image/png".into()]);
        assert_eq!(v.status, Status::Fail);
        assert!(v.detail.unwrap().starts_with("http://img.test/page"));
        checker.eval_content_type(&urls, &["image/png".into()]);
        let heads = s.requests().iter().filter(|r| r.url == "http://img.test/a.png").count();
        assert_eq!(heads, 1);
    }

    fn bounds() -> impl Strategy<Value = DimensionBounds> {
        let b = || proptest::option::of(1u32..50);
        (b(), b(), b(), b(), b(), b(), b(), b()).prop_map(|(a, b, c, d, e, f, g, h)| DimensionBounds {
            min_width: a,
            max_width: b,
            min_height: c,
            max_height: d,
            min_shortside: e,
            max_shortside: f,
            min_longside: g,
            max_longside: h,
        })
    }

    proptest! {
        #[test]
        fn side_checks_ignore_orientation(w in 1u32..60, h in 1u32..60, mut b in bounds()) {
            b.min_width = None; b.max_width = None; b.min_height = None; b.max_height = None;
            prop_assert_eq!(dimension_fits(w, h, &b), dimension_fits(h, w, &b));
        }
    }
}
