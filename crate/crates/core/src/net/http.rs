use std::io::Read;

use super::{FetchRequest, FetchResponse, Fetcher, Method, NetError, USER_AGENT};

/// Real HTTP(S) client. Redirects are handled by the caller, one hop per
/// request, so the agent never follows them itself.
#[derive(Debug, Default, Clone, Copy)]
pub struct HttpFetcher;

impl HttpFetcher {
    pub fn new() -> Self {
        HttpFetcher
    }
}

fn convert(response: ureq::Response, request: &FetchRequest) -> Result<FetchResponse, NetError> {
    let status = response.status();
    let content_type = response.header("content-type").map(str::to_owned);
    let location = response.header("location").map(str::to_owned);
    let mut body = Vec::new();
    if request.method == Method::Get {
        response
            .into_reader()
            .take(request.max_body as u64)
            .read_to_end(&mut body)
            .map_err(|e| NetError::Connection(e.to_string()))?;
    }
    Ok(FetchResponse {
        status,
        content_type,
        location,
        body,
    })
}

impl Fetcher for HttpFetcher {
    fn send(&self, request: &FetchRequest) -> Result<FetchResponse, NetError> {
        let agent = ureq::AgentBuilder::new()
            .redirects(0)
            .timeout(request.timeout)
            .user_agent(USER_AGENT)
            .build();
        let method = match request.method {
            Method::Head => "HEAD",
            Method::Get => "GET",
        };
        match agent.request(method, &request.url).call() {
            Ok(response) => convert(response, request),
            Err(ureq::Error::Status(_, response)) => convert(response, request),
            Err(ureq::Error::Transport(t)) => match t.kind() {
                ureq::ErrorKind::InvalidUrl | ureq::ErrorKind::UnknownScheme => {
                    Err(NetError::InvalidUrl(request.url.clone()))
                }
                ureq::ErrorKind::Io if t.to_string().contains("timed out") => Err(NetError::Timeout),
                _ => Err(NetError::Connection(t.to_string())),
            },
        }
    }
}
