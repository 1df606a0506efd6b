use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::DatasetError;
use crate::dex::{opcode_histogram, parse_dex_with, OpcodeHistogram, ParseOptions};

#[derive(Debug, Clone, Copy, Default)]
pub struct ExtractOptions {
    pub verify_checksum: bool,
    /// Log and drop apps with an unparseable file instead of failing.
    pub skip_invalid: bool,
}

/// Opcode histograms for a corpus directory.
#[derive(Debug, Clone, Default)]
pub struct Extracted {
    pub ids: Vec<String>,
    pub histograms: Vec<OpcodeHistogram>,
    /// Apps dropped under `skip_invalid`, with the reason.
    pub skipped: Vec<(String, String)>,
}

impl Extracted {
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.histograms
            .iter()
            .map(OpcodeHistogram::to_features)
            .collect()
    }
}

fn is_dex(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("dex"))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    let io = |source| DatasetError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths = fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(io)?;
    paths.sort();
    Ok(paths)
}

fn histogram_of(path: &Path, options: ExtractOptions) -> Result<OpcodeHistogram, DatasetError> {
    let bytes = fs::read(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parse = ParseOptions {
        verify_checksum: options.verify_checksum,
    };
    parse_dex_with(&bytes, parse)
        .and_then(|dex| opcode_histogram(&dex))
        .map_err(|source| DatasetError::Dex {
            path: path.to_path_buf(),
            source,
        })
}

/// Walks `dir`: each top-level `.dex` file is one app named by its file
/// stem; each subdirectory is one app named by the directory, whose `.dex`
/// files (multi-dex) are summed. Apps are returned in name order.
pub fn extract_corpus(dir: &Path, options: ExtractOptions) -> Result<Extracted, DatasetError> {
    let mut apps: Vec<(String, Vec<PathBuf>)> = Vec::new();
    for path in sorted_entries(dir)? {
        if path.is_dir() {
            let files: Vec<PathBuf> = sorted_entries(&path)?
                .into_iter()
                .filter(|p| is_dex(p))
                .collect();
            if files.is_empty() {
                log::warn!("{}: no .dex files, skipped", path.display());
                continue;
            }
            let name = path
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            apps.push((name, files));
        } else if is_dex(&path) {
            let name = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            apps.push((name, vec![path]));
        }
    }
    apps.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(w) = apps.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(DatasetError::DuplicateId(w[0].0.clone()));
    }

    let results: Vec<Result<OpcodeHistogram, DatasetError>> = apps
        .par_iter()
        .map(|(_, files)| {
            let mut total = OpcodeHistogram::new();
            for f in files {
                total += &histogram_of(f, options)?;
            }
            Ok(total)
        })
        .collect();
    let mut out = Extracted::default();
    for ((id, _), r) in apps.into_iter().zip(results) {
        match r {
            Ok(h) => {
                out.ids.push(id);
                out.histograms.push(h);
            }
            Err(e) if options.skip_invalid => {
                log::warn!("skipping {id}: {e}");
                out.skipped.push((id, e.to_string()));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dex::{ClassBuilder, DexBuilder};

    fn dex_with(insns: Vec<u16>) -> Vec<u8> {
        DexBuilder::new()
            .class(ClassBuilder::new().direct_method(insns))
            .build()
    }

    #[test]
    fn files_and_multidex_dirs() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.dex"), dex_with(vec![0x0012, 0x000e])).unwrap();
        fs::create_dir(dir.path().join("a")).unwrap();
        fs::write(dir.path().join("a/classes.dex"), dex_with(vec![0x000e])).unwrap();
        fs::write(dir.path().join("a/classes2.dex"), dex_with(vec![0x000e])).unwrap();
        fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let out = extract_corpus(dir.path(), ExtractOptions::default()).unwrap();
        assert_eq!(out.ids, ["a", "b"]);
        assert_eq!(out.histograms[0].count(0x0e), 2);
        assert_eq!(out.histograms[1].count(0x12), 1);
    }

    #[test]
    fn invalid_file_fails_or_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("bad.dex"), b"not a dex").unwrap();
        fs::write(dir.path().join("good.dex"), dex_with(vec![0x000e])).unwrap();
        assert!(matches!(
            extract_corpus(dir.path(), ExtractOptions::default()),
            Err(DatasetError::Dex { .. })
        ));
        let options = ExtractOptions {
            skip_invalid: true,
            ..ExtractOptions::default()
        };
        let out = extract_corpus(dir.path(), options).unwrap();
        assert_eq!(out.ids, ["good"]);
        assert_eq!(out.skipped.len(), 1);
    }
}
