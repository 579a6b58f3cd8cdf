use std::io::Read;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Where a derived artifact came from. Embedded in every pipeline output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dump_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dump_sha256: Option<String>,
    pub tool_version: String,
    pub timestamp: String,
}

impl Provenance {
    /// Provenance stamped with the crate version. The timestamp honours
    /// `SOURCE_DATE_EPOCH` so reruns can be byte-identical.
    pub fn new(dump_file: Option<String>, dump_sha256: Option<String>) -> Self {
        Provenance {
            dump_file,
            dump_sha256,
            tool_version: concat!("annoforge ", env!("CARGO_PKG_VERSION")).to_string(),
            timestamp: build_timestamp(std::env::var("SOURCE_DATE_EPOCH").ok().as_deref(), Utc::now()),
        }
    }

    pub fn for_dump(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned());
        Ok(Self::new(name, Some(sha256_file(path)?)))
    }
}

fn build_timestamp(source_date_epoch: Option<&str>, now: DateTime<Utc>) -> String {
    let at = source_date_epoch
        .and_then(|v| v.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
        .unwrap_or(now);
    at.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn sha256_file(path: impl AsRef<Path>) -> std::io::Result<String> {
    let mut file = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}
