use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::datagen::images::GrayImage;
use crate::datagen::mixing::{mix_image, mix_linear, mix_nonlinear, sample_mixing_matrix};
use crate::datagen::sources::gen_sources;
use crate::error::{Error, Result};
use crate::math::csv::{from_csv_str, to_csv_string};
use crate::math::{column_stats, ColumnStats, Matrix, Rng};

pub const DATASET_FORMAT_VERSION: u32 = 1;

pub const OBSERVATIONS_FILE: &str = "observations.csv";
pub const SOURCES_FILE: &str = "sources.csv";
pub const VALIDATION_OBSERVATIONS_FILE: &str = "validation_observations.csv";
pub const VALIDATION_SOURCES_FILE: &str = "validation_sources.csv";
pub const SPLITS_FILE: &str = "splits.json";
pub const META_FILE: &str = "meta.json";

/// Image-study dimensions.
pub const IMAGE_DIMS: [usize; 4] = [2, 5, 10, 20];

/// Replications per image dimension: 50, 50, 20, 10.
pub fn default_replications(dim: usize) -> Option<usize> {
    match dim {
        2 | 5 => Some(50),
        10 => Some(20),
        20 => Some(10),
        _ => None,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingKind {
    Nonlinear,
    Linear,
}

impl std::str::FromStr for MixingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonlinear" => Ok(Self::Nonlinear),
            "linear" => Ok(Self::Linear),
            other => Err(Error::Config(format!("unknown mixing kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    NonlinearSynthetic,
    LinearSynthetic,
    ImageNonlinear,
    ImageLinear,
}

impl DatasetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::NonlinearSynthetic => "nonlinear-synthetic",
            Self::LinearSynthetic => "linear-synthetic",
            Self::ImageNonlinear => "image-nonlinear",
            Self::ImageLinear => "image-linear",
        }
    }
}

/// Where validation rows live: inside the main matrices, or in a separately
/// generated held-out set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidationSource {
    Rows,
    Generated,
}

/// Zero-based row indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Splits {
    pub test: Vec<usize>,
    pub train: Vec<usize>,
    /// Indices into the main matrices for [`ValidationSource::Rows`], into the
    /// held-out matrices for [`ValidationSource::Generated`].
    pub validation: Vec<usize>,
    pub validation_source: ValidationSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedMatrix {
    pub name: String,
    pub sha256: String,
    pub matrix: Matrix,
}

impl NamedMatrix {
    fn new(name: &str, matrix: Matrix) -> Self {
        Self {
            name: name.into(),
            sha256: sha256_hex(to_csv_string(&matrix, false).as_bytes()),
            matrix,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format_version: u32,
    pub kind: DatasetKind,
    pub seed: u64,
    pub replication: Option<usize>,
    pub n: usize,
    pub source_dim: Option<usize>,
    pub obs_dim: usize,
    /// Raw observation statistics used for normalization, when applied.
    pub normalization: Option<ColumnStats>,
    pub mixing: Vec<NamedMatrix>,
    pub images: Vec<String>,
    /// SHA-256 of every data file, keyed by file name.
    pub files: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub sources: Option<Matrix>,
    pub observations: Matrix,
    pub validation_sources: Option<Matrix>,
    pub validation_observations: Option<Matrix>,
    pub splits: Splits,
    pub meta: DatasetMeta,
}

fn pick(m: &Matrix, idx: &[usize]) -> Result<Matrix> {
    if idx.is_empty() {
        return Err(Error::Config("split is empty".into()));
    }
    m.select_rows(idx)
}

impl Dataset {
    fn data_files(&self) -> Result<Vec<(&'static str, String)>> {
        let mut files = vec![(OBSERVATIONS_FILE, to_csv_string(&self.observations, true))];
        if let Some(y) = &self.sources {
            files.push((SOURCES_FILE, to_csv_string(y, true)));
        }
        if let Some(x) = &self.validation_observations {
            files.push((VALIDATION_OBSERVATIONS_FILE, to_csv_string(x, true)));
        }
        if let Some(y) = &self.validation_sources {
            files.push((VALIDATION_SOURCES_FILE, to_csv_string(y, true)));
        }
        let mut splits = serde_json::to_string_pretty(&self.splits)?;
        splits.push('\n');
        files.push((SPLITS_FILE, splits));
        Ok(files)
    }

    /// Records the checksum of every data file in the metadata.
    fn seal(mut self) -> Result<Self> {
        self.meta.files = self
            .data_files()?
            .into_iter()
            .map(|(name, text)| (name.to_string(), sha256_hex(text.as_bytes())))
            .collect();
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<()> {
        let n = self.observations.rows();
        if let Some(y) = &self.sources {
            if y.rows() != n {
                return Err(Error::Dimension(format!("{} source rows, {n} observations", y.rows())));
            }
        }
        let s = &self.splits;
        let mut seen = vec![false; n];
        let mut claim = |idx: &[usize], what: &str| -> Result<()> {
            for &i in idx {
                if i >= n {
                    return Err(Error::Config(format!("{what} index {i} out of range (n = {n})")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Config(format!("row {i} appears in more than one split")));
                }
            }
            Ok(())
        };
        claim(&s.test, "test")?;
        claim(&s.train, "train")?;
        match s.validation_source {
            ValidationSource::Rows => claim(&s.validation, "validation")?,
            ValidationSource::Generated => {
                let held = self.validation_observations.as_ref().ok_or_else(|| {
                    Error::Config("generated validation set is missing".into())
                })?;
                if let Some(&i) = s.validation.iter().find(|&&i| i >= held.rows()) {
                    return Err(Error::Config(format!("validation index {i} out of range")));
                }
            }
        }
        Ok(())
    }

    pub fn train_observations(&self) -> Result<Matrix> {
        pick(&self.observations, &self.splits.train)
    }

    pub fn test_observations(&self) -> Result<Matrix> {
        pick(&self.observations, &self.splits.test)
    }

    pub fn test_sources(&self) -> Result<Option<Matrix>> {
        self.sources
            .as_ref()
            .map(|y| pick(y, &self.splits.test))
            .transpose()
    }

    fn validation_pair(&self) -> (Option<&Matrix>, Option<&Matrix>) {
        match self.splits.validation_source {
            ValidationSource::Rows => (Some(&self.observations), self.sources.as_ref()),
            ValidationSource::Generated => (
                self.validation_observations.as_ref(),
                self.validation_sources.as_ref(),
            ),
        }
    }

    pub fn validation_observations(&self) -> Result<Matrix> {
        let x = self
            .validation_pair()
            .0
            .ok_or_else(|| Error::Config("dataset has no validation set".into()))?;
        pick(x, &self.splits.validation)
    }

    pub fn validation_sources(&self) -> Result<Option<Matrix>> {
        self.validation_pair()
            .1
            .map(|y| pick(y, &self.splits.validation))
            .transpose()
    }

    /// Writes the dataset directory and returns the SHA-256 of every file,
    /// `meta.json` included.
    pub fn save(&self, dir: &Path) -> Result<BTreeMap<String, String>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut sums = BTreeMap::new();
        let mut meta = serde_json::to_string_pretty(&self.meta)?;
        meta.push('\n');
        let mut files = self.data_files()?;
        files.push((META_FILE, meta));
        for (name, text) in files {
            let path = dir.join(name);
            std::fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
            sums.insert(name.to_string(), sha256_hex(text.as_bytes()));
        }
        Ok(sums)
    }

    /// Reads a dataset directory, verifying every file against the checksums
    /// recorded in `meta.json`.
    pub fn load(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "dataset directory not found"),
            ));
        }
        let read = |name: &str| -> Result<String> {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))
        };
        let meta: DatasetMeta = serde_json::from_str(&read(META_FILE)?)?;
        if meta.format_version != DATASET_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "dataset format {} is not supported",
                meta.format_version
            )));
        }
        let mut texts = BTreeMap::new();
        for (name, want) in &meta.files {
            let text = read(name)?;
            let got = sha256_hex(text.as_bytes());
            if &got != want {
                return Err(Error::Parse {
                    context: dir.join(name).display().to_string(),
                    reason: format!("checksum mismatch: expected {want}, found {got}"),
                });
            }
            texts.insert(name.as_str(), text);
        }
        let matrix = |name: &str| -> Result<Option<Matrix>> {
            texts
                .get(name)
                .map(|t| from_csv_str(t, &dir.join(name).display().to_string()))
                .transpose()
        };
        let observations = matrix(OBSERVATIONS_FILE)?
            .ok_or_else(|| Error::Config(format!("{} lists no {OBSERVATIONS_FILE}", META_FILE)))?;
        let splits_text = texts
            .get(SPLITS_FILE)
            .ok_or_else(|| Error::Config(format!("{} lists no {SPLITS_FILE}", META_FILE)))?;
        let ds = Dataset {
            sources: matrix(SOURCES_FILE)?,
            observations,
            validation_sources: matrix(VALIDATION_SOURCES_FILE)?,
            validation_observations: matrix(VALIDATION_OBSERVATIONS_FILE)?,
            splits: serde_json::from_str(splits_text)?,
            meta,
        };
        ds.check()?;
        Ok(ds)
    }
}

/// Parameters of the synthetic benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub source_dim: usize,
    pub obs_dim: usize,
    pub test_n: usize,
    pub validation_n: usize,
    pub normalize: bool,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 4000,
            source_dim: 6,
            obs_dim: 24,
            test_n: 500,
            validation_n: 500,
            normalize: true,
        }
    }
}

/// Synthetic benchmark with the default shape (4000 × 24 observations of six
/// sources).
pub fn make_synthetic(kind: MixingKind, n: usize, seed: u64) -> Result<Dataset> {
    make_synthetic_with(kind, &SyntheticSpec { n, ..SyntheticSpec::default() }, seed)
}

/// The first `test_n` rows are the test split and the rest train. Validation
/// rows are generated afresh and pushed through the same mixing.
pub fn make_synthetic_with(kind: MixingKind, spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    if spec.n < 1000 {
        return Err(Error::Config(format!("synthetic data needs n >= 1000, got {}", spec.n)));
    }
    if spec.test_n == 0 || spec.test_n >= spec.n || spec.validation_n < 2 {
        return Err(Error::Config("test and validation sizes must leave training rows".into()));
    }
    if spec.source_dim == 0 || spec.obs_dim == 0 {
        return Err(Error::Config("dimensions must be positive".into()));
    }
    let y = gen_sources(spec.n, spec.source_dim, &mut Rng::substream(seed, "sources"));
    let y_val = gen_sources(
        spec.validation_n,
        spec.source_dim,
        &mut Rng::substream(seed, "validation-sources"),
    );
    let mut rng = Rng::substream(seed, "mixing");
    let a = sample_mixing_matrix(spec.source_dim, spec.obs_dim, &mut rng);
    let (raw, raw_val, mixing, kind) = match kind {
        MixingKind::Nonlinear => {
            let b = sample_mixing_matrix(spec.obs_dim, spec.obs_dim, &mut rng);
            (
                mix_nonlinear(&y, &a, &b)?,
                mix_nonlinear(&y_val, &a, &b)?,
                vec![NamedMatrix::new("A", a), NamedMatrix::new("B", b)],
                DatasetKind::NonlinearSynthetic,
            )
        }
        MixingKind::Linear => (
            mix_linear(&y, &a)?,
            mix_linear(&y_val, &a)?,
            vec![NamedMatrix::new("A", a)],
            DatasetKind::LinearSynthetic,
        ),
    };
    let (x, x_val, normalization) = if spec.normalize {
        let stats = column_stats(&raw);
        (stats.apply(&raw)?, stats.apply(&raw_val)?, Some(stats))
    } else {
        (raw, raw_val, None)
    };
    Dataset {
        sources: Some(y),
        observations: x,
        validation_sources: Some(y_val),
        validation_observations: Some(x_val),
        splits: Splits {
            test: (0..spec.test_n).collect(),
            train: (spec.test_n..spec.n).collect(),
            validation: (0..spec.validation_n).collect(),
            validation_source: ValidationSource::Generated,
        },
        meta: DatasetMeta {
            format_version: DATASET_FORMAT_VERSION,
            kind,
            seed,
            replication: None,
            n: spec.n,
            source_dim: Some(spec.source_dim),
            obs_dim: spec.obs_dim,
            normalization,
            mixing,
            images: Vec::new(),
            files: BTreeMap::new(),
        },
    }
    .seal()
}

/// Drops constant images with a warning; they cannot serve as sources.
pub fn usable_images(images: &[GrayImage]) -> Vec<&GrayImage> {
    images
        .iter()
        .filter(|im| {
            if im.is_constant() {
                log::warn!("image {} is constant and cannot be a source; skipping", im.name);
                false
            } else {
                true
            }
        })
        .collect()
}

/// One image-study dataset: `dim` distinct images as sources (pixels as
/// samples), mixed and column-normalized. Rows are split 10/10/80 into
/// validation/test/train at random.
pub fn make_image_replication(
    images: &[GrayImage],
    dim: usize,
    kind: MixingKind,
    seed: u64,
    replication: usize,
) -> Result<Dataset> {
    if !IMAGE_DIMS.contains(&dim) {
        return Err(Error::Config(format!("image dimension must be one of {IMAGE_DIMS:?}, got {dim}")));
    }
    let usable = usable_images(images);
    if usable.len() < dim {
        return Err(Error::Config(format!(
            "need {dim} non-constant images, only {} available",
            usable.len()
        )));
    }
    let n = usable[0].pixels.len();
    if let Some(im) = usable.iter().find(|im| im.pixels.len() != n) {
        return Err(Error::Dimension(format!(
            "image {} has {} pixels, expected {n}",
            im.name,
            im.pixels.len()
        )));
    }
    let rep = replication as u64;
    let mut pick_rng = Rng::indexed_substream(seed, "image-choice", rep);
    let chosen: Vec<&GrayImage> = pick_rng.permutation(usable.len())[..dim]
        .iter()
        .map(|&k| usable[k])
        .collect();
    let y = Matrix::from_columns(&chosen.iter().map(|im| im.pixels.clone()).collect::<Vec<_>>())?;
    let mut rng = Rng::indexed_substream(seed, "image-mixing", rep);
    let (raw, mixing, kind) = match kind {
        MixingKind::Nonlinear => {
            let a = sample_mixing_matrix(dim, dim, &mut rng);
            let b = sample_mixing_matrix(dim, dim, &mut rng);
            (
                mix_image(&y, &a, &b)?,
                vec![NamedMatrix::new("A", a), NamedMatrix::new("B", b)],
                DatasetKind::ImageNonlinear,
            )
        }
        MixingKind::Linear => {
            let c = sample_mixing_matrix(dim, dim, &mut rng);
            (mix_linear(&y, &c)?, vec![NamedMatrix::new("C", c)], DatasetKind::ImageLinear)
        }
    };
    let stats = column_stats(&raw);
    let x = stats.apply(&raw)?;
    let mut order = Rng::indexed_substream(seed, "image-split", rep).permutation(n);
    let tenth = n / 10;
    let mut validation: Vec<usize> = order.drain(..tenth).collect();
    let mut test: Vec<usize> = order.drain(..tenth).collect();
    let mut train = order;
    validation.sort_unstable();
    test.sort_unstable();
    train.sort_unstable();
    Dataset {
        sources: Some(y),
        observations: x,
        validation_sources: None,
        validation_observations: None,
        splits: Splits {
            test,
            train,
            validation,
            validation_source: ValidationSource::Rows,
        },
        meta: DatasetMeta {
            format_version: DATASET_FORMAT_VERSION,
            kind,
            seed,
            replication: Some(replication),
            n,
            source_dim: Some(dim),
            obs_dim: dim,
            normalization: Some(stats),
            mixing,
            images: chosen.iter().map(|im| im.name.clone()).collect(),
            files: BTreeMap::new(),
        },
    }
    .seal()
}

/// `replications` image datasets, each from its own random stream.
pub fn make_image_dataset(
    images: &[GrayImage],
    dim: usize,
    kind: MixingKind,
    seed: u64,
    replications: usize,
) -> Result<Vec<Dataset>> {
    (0..replications)
        .map(|r| make_image_replication(images, dim, kind, seed, r))
        .collect()
}
