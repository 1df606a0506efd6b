//! Label oracle client for a VirusTotal-compatible report API.
//!
//! `GET <base_url>/report/<sha256>` must answer with
//! `{"engines": {"<name>": {"detected": <bool>}, ...}}`. Fixture mode
//! replays the same JSON from `<dir>/<sha256>.json` so labeling can run
//! offline.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::thread;
use std::time::{Duration, Instant};

use serde::Deserialize;

use super::{consensus_label, Dataset, DatasetError, ScanVerdicts};

/// Environment variable holding the API key for HTTP mode.
pub const API_KEY_ENV: &str = "DROIDLENS_ORACLE_KEY";
const API_KEY_HEADER: &str = "x-apikey";

#[derive(Debug, Deserialize)]
struct ReportBody {
    engines: BTreeMap<String, EngineVerdict>,
}

#[derive(Debug, Deserialize)]
struct EngineVerdict {
    detected: bool,
}

/// Parses a report body into verdicts for `hash`.
pub fn parse_report(hash: &str, body: &str) -> Result<ScanVerdicts, DatasetError> {
    let report: ReportBody = serde_json::from_str(body)
        .map_err(|e| DatasetError::Oracle(format!("report for {hash}: {e}")))?;
    Ok(ScanVerdicts {
        file_hash: hash.to_string(),
        engines: report
            .engines
            .into_iter()
            .map(|(name, v)| (name, v.detected))
            .collect(),
    })
}

/// Lowercased hash if `id` is a 64-digit hex SHA-256.
pub fn normalize_sha256(id: &str) -> Option<String> {
    (id.len() == 64 && id.bytes().all(|b| b.is_ascii_hexdigit())).then(|| id.to_ascii_lowercase())
}

enum Source {
    Http {
        base_url: String,
        api_key: Option<String>,
        agent: ureq::Agent,
    },
    Fixtures(PathBuf),
}

pub struct OracleClient {
    source: Source,
    min_interval: Duration,
    last_request: Option<Instant>,
}

impl OracleClient {
    /// HTTP mode, at most `requests_per_minute` requests (0 = unlimited).
    pub fn http(base_url: &str, api_key: Option<String>, requests_per_minute: u32) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Self {
            source: Source::Http {
                base_url: base_url.trim_end_matches('/').to_string(),
                api_key,
                agent,
            },
            min_interval: interval(requests_per_minute),
            last_request: None,
        }
    }

    pub fn fixtures(dir: impl Into<PathBuf>) -> Self {
        Self {
            source: Source::Fixtures(dir.into()),
            min_interval: Duration::ZERO,
            last_request: None,
        }
    }

    /// `http://` and `https://` locations select HTTP mode with the key
    /// from [`API_KEY_ENV`]; anything else is a fixture directory.
    pub fn from_location(location: &str, requests_per_minute: u32) -> Result<Self, DatasetError> {
        if location.starts_with("http://") || location.starts_with("https://") {
            let key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
            Ok(Self::http(location, key, requests_per_minute))
        } else {
            let dir = PathBuf::from(location);
            if !dir.is_dir() {
                return Err(DatasetError::Oracle(format!(
                    "fixture directory {} does not exist",
                    dir.display()
                )));
            }
            Ok(Self::fixtures(dir))
        }
    }

    fn throttle(&mut self) {
        if let Some(last) = self.last_request {
            let elapsed = last.elapsed();
            if elapsed < self.min_interval {
                thread::sleep(self.min_interval - elapsed);
            }
        }
        self.last_request = Some(Instant::now());
    }

    pub fn fetch(&mut self, sha256: &str) -> Result<ScanVerdicts, DatasetError> {
        let hash = normalize_sha256(sha256).ok_or_else(|| {
            DatasetError::Oracle(format!("{sha256:?} is not a SHA-256 hex digest"))
        })?;
        if matches!(self.source, Source::Http { .. }) {
            self.throttle();
        }
        let body = match &self.source {
            Source::Fixtures(dir) => {
                let path = dir.join(format!("{hash}.json"));
                fs::read_to_string(&path)
                    .map_err(|e| DatasetError::Oracle(format!("fixture {}: {e}", path.display())))?
            }
            Source::Http {
                base_url,
                api_key,
                agent,
            } => {
                let url = format!("{base_url}/report/{hash}");
                let mut request = agent.get(&url);
                if let Some(key) = api_key {
                    request = request.header(API_KEY_HEADER, key);
                }
                let mut response = request
                    .call()
                    .map_err(|e| DatasetError::Oracle(format!("GET {url}: {e}")))?;
                let status = response.status();
                if !status.is_success() {
                    return Err(DatasetError::Oracle(format!("GET {url}: HTTP {status}")));
                }
                response
                    .body_mut()
                    .read_to_string()
                    .map_err(|e| DatasetError::Oracle(format!("GET {url}: {e}")))?
            }
        };
        parse_report(&hash, &body)
    }
}

fn interval(requests_per_minute: u32) -> Duration {
    if requests_per_minute == 0 {
        Duration::ZERO
    } else {
        Duration::from_secs_f64(60.0 / f64::from(requests_per_minute))
    }
}

/// Labels feature rows whose ids are SHA-256 digests, one oracle lookup each.
pub fn label_features(
    client: &mut OracleClient,
    ids: &[String],
    rows: &[Vec<f64>],
    threshold: usize,
) -> Result<Dataset, DatasetError> {
    let labels = ids
        .iter()
        .map(|id| {
            let verdicts = client.fetch(id)?;
            consensus_label(&verdicts, threshold)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Dataset::new(ids.to_vec(), rows.to_vec(), labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HASH: &str = "AB00000000000000000000000000000000000000000000000000000000000001";

    #[test]
    fn parses_engine_map() {
        let v = parse_report(
            "h",
            r#"{"engines": {"A": {"detected": true}, "B": {"detected": false, "result": null}}}"#,
        )
        .unwrap();
        assert_eq!(v.engines.len(), 2);
        assert_eq!(v.detections(), 1);
    }

    #[test]
    fn rejects_bad_body() {
        assert!(parse_report("h", r#"{"engine": {}}"#).is_err());
        assert!(parse_report("h", "not json").is_err());
    }

    #[test]
    fn hash_normalization() {
        assert_eq!(normalize_sha256(HASH).unwrap(), HASH.to_ascii_lowercase());
        assert!(normalize_sha256("abc").is_none());
        assert!(normalize_sha256(&"g".repeat(64)).is_none());
    }

    #[test]
    fn fixture_mode() {
        let dir = tempfile::tempdir().unwrap();
        let hash = HASH.to_ascii_lowercase();
        fs::write(
            dir.path().join(format!("{hash}.json")),
            r#"{"engines": {"A": {"detected": false}, "B": {"detected": true}}}"#,
        )
        .unwrap();
        let mut client = OracleClient::from_location(dir.path().to_str().unwrap(), 4).unwrap();
        let v = client.fetch(HASH).unwrap();
        assert_eq!(v.file_hash, hash);
        assert_eq!(consensus_label(&v, 1).unwrap(), 1);
        assert!(client.fetch(&"0".repeat(64)).is_err());
    }

    #[test]
    fn missing_fixture_dir() {
        assert!(OracleClient::from_location("/definitely/not/here", 4).is_err());
    }

    #[test]
    fn interval_from_rate() {
        assert_eq!(interval(0), Duration::ZERO);
        assert_eq!(interval(4), Duration::from_secs(15));
    }
}
