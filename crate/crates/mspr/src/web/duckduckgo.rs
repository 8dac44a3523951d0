//! Live adapter for the DuckDuckGo HTML endpoint.
//!
//! DuckDuckGo exposes no official JSON search API, so this client fetches the
//! public HTML results page and extracts titles, links and snippets. Requests
//! go through the shared rate limiter and retry with exponential backoff.

use super::rate_limit::{Clock, RateLimiter, SystemClock};
use super::{WebResult, WebSearch};
use crate::error::{Error, Result};
use regex::Regex;
use std::sync::Arc;
use std::time::Duration;

const ENDPOINT: &str = "https://html.duckduckgo.com/html/";
const USER_AGENT: &str = "Mozilla/5.0 (compatible; mspr/0.1; +https://localhost)";
const MAX_ATTEMPTS: u32 = 3;
const INITIAL_BACKOFF: Duration = Duration::from_millis(500);

pub struct DuckDuckGoClient {
    http: reqwest::blocking::Client,
    limiter: RateLimiter,
    clock: Arc<dyn Clock>,
}

impl DuckDuckGoClient {
    pub fn new(requests_per_second: f64) -> Self {
        let clock: Arc<dyn Clock> = Arc::new(SystemClock::new());
        Self::with_clock(requests_per_second, clock)
    }

    pub fn with_clock(requests_per_second: f64, clock: Arc<dyn Clock>) -> Self {
        let http = reqwest::blocking::Client::builder()
            .user_agent(USER_AGENT)
            .timeout(Duration::from_secs(20))
            .build()
            .expect("reqwest client");
        DuckDuckGoClient {
            http,
            limiter: RateLimiter::per_second(requests_per_second, clock.clone()),
            clock,
        }
    }

    fn fetch(&self, query: &str) -> Result<String> {
        let response = self
            .http
            .get(ENDPOINT)
            .query(&[("q", query)])
            .send()
            .map_err(|e| Error::WebTransport {
                status: None,
                message: e.to_string(),
            })?;
        let status = response.status();
        if !status.is_success() {
            return Err(Error::WebTransport {
                status: Some(status.as_u16()),
                message: format!("provider returned {status}"),
            });
        }
        response.text().map_err(|e| Error::WebTransport {
            status: Some(status.as_u16()),
            message: e.to_string(),
        })
    }
}

impl WebSearch for DuckDuckGoClient {
    fn search(&self, query: &str, top_k: usize) -> Result<Vec<WebResult>> {
        super::with_retries(self.clock.as_ref(), MAX_ATTEMPTS, INITIAL_BACKOFF, || {
            self.limiter.acquire();
            let html = self.fetch(query)?;
            let mut results = parse_results(&html);
            results.truncate(top_k);
            Ok(results)
        })
    }
}

/// Pull (title, url, snippet) triples out of the HTML results page.
fn parse_results(html: &str) -> Vec<WebResult> {
    // Anchors carry class result__a; snippets carry class result__snippet.
    let link_re =
        Regex::new(r#"(?s)<a[^>]*class="[^"]*result__a[^"]*"[^>]*href="([^"]*)"[^>]*>(.*?)</a>"#)
            .expect("static regex");
    let snippet_re = Regex::new(r#"(?s)<a[^>]*class="[^"]*result__snippet[^"]*"[^>]*>(.*?)</a>"#)
        .expect("static regex");

    let snippets: Vec<String> = snippet_re
        .captures_iter(html)
        .map(|c| clean_fragment(&c[1]))
        .collect();

    link_re
        .captures_iter(html)
        .enumerate()
        .map(|(i, c)| WebResult {
            url: resolve_redirect(&c[1]),
            title: clean_fragment(&c[2]),
            snippet: snippets.get(i).cloned().unwrap_or_default(),
        })
        .filter(|r| !r.url.is_empty())
        .collect()
}

/// DuckDuckGo wraps result urls in a redirect with the target in `uddg`.
fn resolve_redirect(href: &str) -> String {
    if let Some(pos) = href.find("uddg=") {
        let tail = &href[pos + 5..];
        let encoded = tail.split('&').next().unwrap_or(tail);
        return percent_decode(encoded);
    }
    href.to_string()
}

fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%'
            && i + 2 < bytes.len()
            && bytes[i + 1].is_ascii_hexdigit()
            && bytes[i + 2].is_ascii_hexdigit()
        {
            let hex = std::str::from_utf8(&bytes[i + 1..i + 3]).expect("ascii hex");
            out.push(u8::from_str_radix(hex, 16).expect("ascii hex"));
            i += 3;
            continue;
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

/// Strip tags and unescape the handful of entities the page uses.
fn clean_fragment(fragment: &str) -> String {
    let tag_re = Regex::new(r"<[^>]*>").expect("static regex");
    let text = tag_re.replace_all(fragment, "");
    text.replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#x27;", "'")
        .replace("&#39;", "'")
        .replace("&nbsp;", " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = r##"
<div class="result results_links results_links_deep web-result">
  <h2 class="result__title">
    <a rel="nofollow" class="result__a" href="//duckduckgo.com/l/?uddg=https%3A%2F%2Fwww.rust%2Dlang.org%2F&amp;rut=abc">The <b>Rust</b> Programming Language</a>
  </h2>
  <a class="result__snippet" href="//duckduckgo.com/l/?uddg=https%3A%2F%2Fwww.rust%2Dlang.org%2F">A language empowering everyone to build reliable software.</a>
</div>
<div class="result">
  <h2 class="result__title">
    <a rel="nofollow" class="result__a" href="https://doc.rust-lang.org/book/">The Book &amp; more</a>
  </h2>
</div>
"##;

    #[test]
    fn parses_titles_links_and_snippets() {
        let results = parse_results(FIXTURE);
        assert_eq!(results.len(), 2);
        assert_eq!(results[0].url, "https://www.rust-lang.org/");
        assert_eq!(results[0].title, "The Rust Programming Language");
        assert_eq!(
            results[0].snippet,
            "A language empowering everyone to build reliable software."
        );
        assert_eq!(results[1].url, "https://doc.rust-lang.org/book/");
        assert_eq!(results[1].title, "The Book & more");
        assert_eq!(results[1].snippet, "");
    }

    #[test]
    fn no_results_page_parses_to_empty() {
        assert!(parse_results("<html><body>No results.</body></html>").is_empty());
    }

    #[test]
    fn percent_decoding_handles_escapes_and_garbage() {
        assert_eq!(percent_decode("a%20b"), "a b");
        assert_eq!(percent_decode("100%"), "100%");
        assert_eq!(percent_decode("%zz"), "%zz");
    }
}
