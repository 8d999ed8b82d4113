//! Offline [`Fetcher`]s for tests and dry runs.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use url::Url;

use super::{FetchRequest, FetchResponse, Fetcher, Method, NetError};

#[derive(Debug, Clone, Default)]
pub struct StubResponse {
    pub response: FetchResponse,
    pub delay: Duration,
    pub reject_head: bool,
}

impl StubResponse {
    pub fn ok(content_type: &str, body: Vec<u8>) -> Self {
        StubResponse {
            response: FetchResponse {
                status: 200,
                content_type: Some(content_type.to_owned()),
                location: None,
                body,
            },
            ..Default::default()
        }
    }

    pub fn status(status: u16) -> Self {
        StubResponse {
            response: FetchResponse {
                status,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    pub fn redirect(location: &str) -> Self {
        let mut r = StubResponse::status(302);
        r.response.location = Some(location.to_owned());
        r
    }

    pub fn delayed(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    /// Answers HEAD with 405 Method Not Allowed.
    pub fn rejecting_head(mut self) -> Self {
        self.reject_head = true;
        self
    }
}

/// Serves canned responses by exact URL and records every request.
/// Unknown URLs get a 404.
#[derive(Debug, Default)]
pub struct StubFetcher {
    routes: HashMap<String, StubResponse>,
    log: Mutex<Vec<FetchRequest>>,
}

impl StubFetcher {
    pub fn new() -> Self {
        StubFetcher::default()
    }

    pub fn with(mut self, url: &str, response: StubResponse) -> Self {
        self.routes.insert(url.to_owned(), response);
        self
    }

    pub fn requests(&self) -> Vec<FetchRequest> {
        self.log.lock().unwrap().clone()
    }
}

impl Fetcher for StubFetcher {
    fn send(&self, request: &FetchRequest) -> Result<FetchResponse, NetError> {
        self.log.lock().unwrap().push(request.clone());
        let Some(route) = self.routes.get(&request.url) else {
            return Ok(StubResponse::status(404).response);
        };
        if !route.delay.is_zero() {
            thread::sleep(route.delay);
        }
        if route.reject_head && request.method == Method::Head {
            return Ok(StubResponse::status(405).response);
        }
        let mut response = route.response.clone();
        match request.method {
            Method::Head => response.body.clear(),
            Method::Get => response.body.truncate(request.max_body),
        }
        Ok(response)
    }
}

/// Serves files from a directory: the last path segment of the URL names
/// the file, and its extension decides the content type. Host names are
/// ignored.
#[derive(Debug, Clone)]
pub struct FixtureFetcher {
    dir: PathBuf,
}

impl FixtureFetcher {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        FixtureFetcher {
            dir: dir.as_ref().to_owned(),
        }
    }
}

fn content_type_for(name: &str) -> &'static str {
    let ext = name
        .rsplit_once('.')
        .map(|(_, e)| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "png" => "image/png",
        "gif" => "image/gif",
        "jpg" | "jpeg" => "image/jpeg",
        "html" | "htm" => "text/html; charset=utf-8",
        "txt" => "text/plain",
        _ => "application/octet-stream",
    }
}

impl Fetcher for FixtureFetcher {
    fn send(&self, request: &FetchRequest) -> Result<FetchResponse, NetError> {
        let url = Url::parse(&request.url).map_err(|_| NetError::InvalidUrl(request.url.clone()))?;
        let name = url.path_segments().and_then(|mut s| s.next_back()).unwrap_or("");
        if name.is_empty() || name.starts_with('.') {
            return Ok(StubResponse::status(404).response);
        }
        match std::fs::read(self.dir.join(name)) {
            Ok(mut body) => {
                match request.method {
                    Method::Head => body.clear(),
                    Method::Get => body.truncate(request.max_body),
                }
                Ok(FetchResponse {
                    status: 200,
                    content_type: Some(content_type_for(name).to_owned()),
                    location: None,
                    body,
                })
            }
            Err(_) => Ok(StubResponse::status(404).response),
        }
    }
}
