//! Binary cache of a filtered gazetteer.
//!
//! Layout, integers little-endian:
//!
//! ```text
//! "GPGZ1" | sha256(inputs) [32] | payload length u64 | payload | sha256(payload) [32]
//! ```
//!
//! The input hash covers the content of every GeoNames file and the minimum
//! city population, so editing any input or the threshold makes the cache
//! stale. Entries are stored already filtered.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use geopulse_core::gazetteer::{load_geonames, GeoEntry, GeoKind, Gazetteer};
use geopulse_core::table::RowIssue;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MAGIC: &[u8; 5] = b"GPGZ1";
const HASH_LEN: usize = 32;
const HEADER_LEN: usize = MAGIC.len() + HASH_LEN + 8;

#[derive(Debug, Clone)]
pub struct GeonamesInputs {
    pub country_info: PathBuf,
    pub admin1: PathBuf,
    pub cities: Option<PathBuf>,
    pub min_city_population: u64,
}

impl GeonamesInputs {
    /// SHA-256 over the inputs; also reports a missing file as exit-code 2.
    pub fn content_hash(&self) -> Result<[u8; HASH_LEN], CliError> {
        let mut h = Sha256::new();
        for path in [Some(&self.country_info), Some(&self.admin1), self.cities.as_ref()] {
            match path {
                Some(p) => {
                    let bytes = fs::read(p).map_err(|e| CliError::io(p, e))?;
                    h.update([1]);
                    h.update((bytes.len() as u64).to_le_bytes());
                    h.update(&bytes);
                }
                None => h.update([0]),
            }
        }
        h.update(self.min_city_population.to_le_bytes());
        Ok(h.finalize().into())
    }

    pub fn load(&self) -> Result<(Gazetteer, Vec<RowIssue>), CliError> {
        let loaded = load_geonames(&self.country_info, &self.admin1, self.cities.as_deref())?;
        for issue in &loaded.issues {
            log::warn!("gazetteer input line {}: {}", issue.line, issue.reason);
        }
        Ok((Gazetteer::build(loaded.items, self.min_city_population)?, loaded.issues))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Built,
    Rebuilt { reason: String },
}

/// Use the cache at `path` if it matches `inputs`, otherwise rebuild it.
pub fn load_or_build(inputs: &GeonamesInputs, path: &Path) -> Result<(Gazetteer, CacheOutcome), CliError> {
    let hash = inputs.content_hash()?;
    let rebuild_reason = match fs::read(path) {
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => Some(format!("unreadable: {e}")),
        Ok(bytes) => match decode(&bytes) {
            Err(reason) => Some(format!("corrupt: {reason}")),
            Ok((stored, _)) if stored != hash => Some("inputs changed".to_string()),
            Ok((_, entries)) => {
                // Entries were filtered before caching.
                return Ok((Gazetteer::build(entries, 0)?, CacheOutcome::Hit));
            }
        },
    };
    if let Some(reason) = &rebuild_reason {
        log::warn!("gazetteer cache {}: {reason}; rebuilding", path.display());
    }
    let (gazetteer, _) = inputs.load()?;
    write_atomic(path, &encode(&hash, gazetteer.entries()))?;
    let outcome = match rebuild_reason {
        None => CacheOutcome::Built,
        Some(reason) => CacheOutcome::Rebuilt { reason },
    };
    Ok((gazetteer, outcome))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn encode(input_hash: &[u8; HASH_LEN], entries: &[GeoEntry]) -> Vec<u8> {
    let mut payload = Vec::new();
    payload.extend((entries.len() as u64).to_le_bytes());
    for e in entries {
        put_str(&mut payload, &e.surface);
        payload.push(e.kind as u8);
        payload.extend(e.country_code.as_str().as_bytes());
        match &e.admin1_code {
            Some(a) => {
                payload.push(1);
                put_str(&mut payload, a);
            }
            None => payload.push(0),
        }
        payload.extend(e.population.to_le_bytes());
    }
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + HASH_LEN);
    out.extend(MAGIC);
    out.extend(input_hash);
    out.extend((payload.len() as u64).to_le_bytes());
    out.extend(&payload);
    out.extend(Sha256::digest(&payload));
    out
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend((s.len() as u32).to_le_bytes());
    buf.extend(s.as_bytes());
}

pub fn decode(bytes: &[u8]) -> Result<([u8; HASH_LEN], Vec<GeoEntry>), String> {
    if bytes.len() < HEADER_LEN + HASH_LEN || &bytes[..MAGIC.len()] != MAGIC {
        return Err("bad magic or truncated header".into());
    }
    let input_hash: [u8; HASH_LEN] = bytes[MAGIC.len()..MAGIC.len() + HASH_LEN].try_into().expect("sized");
    let len = u64::from_le_bytes(bytes[HEADER_LEN - 8..HEADER_LEN].try_into().expect("sized")) as usize;
    if bytes.len() != HEADER_LEN + len + HASH_LEN {
        return Err("length mismatch".into());
    }
    let payload = &bytes[HEADER_LEN..HEADER_LEN + len];
    if Sha256::digest(payload).as_slice() != &bytes[HEADER_LEN + len..] {
        return Err("payload checksum mismatch".into());
    }
    let mut r = Reader { buf: payload, pos: 0 };
    let count = r.u64()? as usize;
    let mut entries = Vec::with_capacity(count.min(payload.len()));
    for _ in 0..count {
        let surface = r.string()?;
        let kind = match r.u8()? {
            0 => GeoKind::Country,
            1 => GeoKind::Admin1,
            2 => GeoKind::City,
            3 => GeoKind::AlternateName,
            k => return Err(format!("unknown kind {k}")),
        };
        let cc = std::str::from_utf8(r.take(2)?).map_err(|e| e.to_string())?;
        let country = cc.parse().map_err(|_| format!("bad country code {cc:?}"))?;
        let admin1 = match r.u8()? {
            0 => None,
            _ => Some(r.string()?),
        };
        let population = r.u64()?;
        entries.push(GeoEntry::new(&surface, kind, country, admin1, population).map_err(|e| e.to_string())?);
    }
    if r.pos != payload.len() {
        return Err("trailing bytes".into());
    }
    Ok((input_hash, entries))
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or("truncated payload")?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("sized")))
    }

    fn string(&mut self) -> Result<String, String> {
        let n = u32::from_le_bytes(self.take(4)?.try_into().expect("sized")) as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries() -> Vec<GeoEntry> {
        vec![
            GeoEntry::new("São Paulo", GeoKind::City, "BR".parse().unwrap(), Some("27".into()), 10_021_295).unwrap(),
            GeoEntry::new("Georgia", GeoKind::Country, "GE".parse().unwrap(), None, 3_731_000).unwrap(),
        ]
    }

    #[test]
    fn round_trip() {
        let bytes = encode(&[7; 32], &entries());
        assert!(bytes.starts_with(b"GPGZ1"));
        let (hash, back) = decode(&bytes).unwrap();
        assert_eq!(hash, [7; 32]);
        assert_eq!(back, entries());
    }

    #[test]
    fn any_flipped_byte_is_detected() {
        let bytes = encode(&[7; 32], &entries());
        for i in (0..bytes.len()).filter(|i| !(5..37).contains(i)) {
            let mut bad = bytes.clone();
            bad[i] ^= 0x40;
            assert!(decode(&bad).is_err(), "byte {i}");
        }
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
    }
}
